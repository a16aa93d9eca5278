#include <stdio.h>
#include "releq.h"

int main(void) {
    ReleqProblem *p = NULL;
    ReleqBranch *b = NULL;
    double u[1], det = 0.0;
    size_t len = 0;

    if (releq_problem_from_catalog("planar_rotor", &p) != RELEQ_STATUS_OK) {
        char *msg = releq_last_error();
        fprintf(stderr, "error: %s\n", msg);
        releq_string_free(msg);
        return 1;
    }
    if (releq_find_seed(p, NULL, 0, u, 1, &len, &det) != RELEQ_STATUS_OK) return 1;
    printf("u0 = %.12f det = %.12f\n", u[0], det);

    if (releq_branch_compute(p, NULL, 0, 1.0, 8, &b) != RELEQ_STATUS_OK) return 1;
    printf("points = %zu\n", releq_branch_len(b));
    releq_branch_free(b);
    releq_problem_free(p);
    return 0;
}
