//! Small dense helpers shared by the algebraic modules. All "orthonormal"
//! statements are with respect to an explicit symmetric positive-definite
//! weight matrix `w`.

use nalgebra::{DMatrix, DVector};

pub fn w_dot(w: &DMatrix<f64>, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    (x.transpose() * w * y)[(0, 0)]
}

pub fn w_norm(w: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    w_dot(w, x, x).max(0.0).sqrt()
}

/// Flip the sign so the largest-magnitude entry is positive (first one on ties).
fn canonical_sign(mut x: DVector<f64>) -> DVector<f64> {
    let mut best = 0usize;
    for i in 0..x.len() {
        if x[i].abs() > x[best].abs() + 1e-12 {
            best = i;
        }
    }
    if !x.is_empty() && x[best] < 0.0 {
        x.neg_mut();
    }
    x
}

/// Modified Gram-Schmidt in the `w` inner product. A vector is dropped when
/// its residual falls below `tol` times its original norm.
pub fn mgs(vectors: &[DVector<f64>], w: &DMatrix<f64>, tol: f64) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        let n0 = w_norm(w, v);
        if n0 == 0.0 {
            continue;
        }
        let mut r = v.clone();
        // two passes keep orthogonality at roundoff level
        for _ in 0..2 {
            for b in &out {
                let c = w_dot(w, b, &r);
                r -= b * c;
            }
        }
        let n = w_norm(w, &r);
        if n > tol * n0 {
            out.push(r / n);
        }
    }
    out
}

/// `w`-orthonormal basis of span(vectors), rank decided by singular values
/// above `tol_rel` times the largest one.
pub fn span_basis(vectors: &[DVector<f64>], w: &DMatrix<f64>, tol_rel: f64) -> Vec<DVector<f64>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let n = w.nrows();
    let chol = w.clone().cholesky().expect("weight matrix must be positive definite");
    let l = chol.l();
    let lt = l.transpose();
    let mut y = DMatrix::zeros(n, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        y.set_column(j, &(&lt * v));
    }
    let svd = y.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return Vec::new();
    }
    let mut idx: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > tol_rel * smax)
        .collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
    let lt_inv = lt.try_inverse().expect("triangular factor invertible");
    let raw: Vec<DVector<f64>> = idx
        .into_iter()
        .map(|i| canonical_sign(&lt_inv * u.column(i).into_owned()))
        .collect();
    // re-orthonormalize to clean up the back-substitution
    mgs(&raw, w, 1e-12)
}

/// Kernel of a square matrix via SVD, threshold `tol_rel * sigma_max`.
/// A zero matrix has the whole space as kernel.
pub fn null_space(m: &DMatrix<f64>, tol_rel: f64) -> (Vec<DVector<f64>>, Vec<f64>) {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let mut ker = Vec::new();
    for (i, s) in sv.iter().enumerate() {
        if smax == 0.0 || *s <= tol_rel * smax {
            ker.push(vt.row(i).transpose().into_owned());
        }
    }
    // SVD of a wide/short matrix may return fewer rows than n; fill with the
    // complement of the row space in that case
    if vt.nrows() < n {
        let rows: Vec<DVector<f64>> = (0..vt.nrows()).map(|i| vt.row(i).transpose().into_owned()).collect();
        let id = DMatrix::identity(n, n);
        let mut all = rows;
        for i in 0..n {
            all.push(DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 }));
        }
        let ortho = mgs(&all, &id, 1e-10);
        ker.extend(ortho.into_iter().skip(vt.nrows()));
    }
    (ker, sv)
}

/// `w`-orthogonal projection residual of `x` off a `w`-orthonormal basis.
pub fn projection_residual(x: &DVector<f64>, basis: &[DVector<f64>], w: &DMatrix<f64>) -> f64 {
    let mut r = x.clone();
    for b in basis {
        let c = w_dot(w, b, &r);
        r -= b * c;
    }
    w_norm(w, &r)
}

/// Largest principal angle (radians) between the spans of two `w`-orthonormal
/// bases. Returns pi/2 when the dimensions differ.
pub fn max_principal_angle(a: &[DVector<f64>], b: &[DVector<f64>], w: &DMatrix<f64>) -> f64 {
    if a.len() != b.len() {
        return std::f64::consts::FRAC_PI_2;
    }
    let mut worst: f64 = 0.0;
    for x in a {
        worst = worst.max(projection_residual(x, b, w));
    }
    for y in b {
        worst = worst.max(projection_residual(y, a, w));
    }
    worst.min(1.0).asin()
}

/// Determinant after scaling each row to unit max-norm. Zero rows give 0.
pub fn equilibrated_det(a: &DMatrix<f64>) -> f64 {
    let mut m = a.clone();
    for i in 0..m.nrows() {
        let s = m.row(i).iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        if s == 0.0 {
            return 0.0;
        }
        for j in 0..m.ncols() {
            m[(i, j)] /= s;
        }
    }
    if m.nrows() == 0 {
        return 1.0;
    }
    m.determinant()
}

/// Matrix whose columns are the given vectors.
pub fn columns(vectors: &[DVector<f64>], nrows: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(nrows, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        m.set_column(j, v);
    }
    m
}

/// Frobenius-type max-abs norm used for scale-relative thresholds.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mgs_drops_dependent_vectors() {
        let w = DMatrix::identity(3, 3);
        let v = vec![
            DVector::from_vec(vec![1.0, 0.0, 0.0]),
            DVector::from_vec(vec![2.0, 0.0, 0.0]),
            DVector::from_vec(vec![1.0, 1.0, 0.0]),
        ];
        let b = mgs(&v, &w, 1e-10);
        assert_eq!(b.len(), 2);
        assert!(w_dot(&w, &b[0], &b[1]).abs() < 1e-15);
    }

    #[test]
    fn span_basis_respects_weight() {
        let w = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0]));
        let b = span_basis(&[DVector::from_vec(vec![1.0, 1.0])], &w, 1e-8);
        assert_eq!(b.len(), 1);
        assert!((w_norm(&w, &b[0]) - 1.0).abs() < 1e-14);
        assert!((b[0][0] - b[0][1]).abs() < 1e-14);
    }

    #[test]
    fn null_space_of_zero_is_everything() {
        let (k, _) = null_space(&DMatrix::zeros(2, 2), 1e-8);
        assert_eq!(k.len(), 2);
    }

    #[test]
    fn principal_angle_of_equal_spans_is_zero() {
        let w = DMatrix::identity(3, 3);
        let a = mgs(&[DVector::from_vec(vec![1.0, 1.0, 0.0])], &w, 1e-12);
        let b = mgs(&[DVector::from_vec(vec![-3.0, -3.0, 0.0])], &w, 1e-12);
        assert!(max_principal_angle(&a, &b, &w) < 1e-15);
    }

    #[test]
    fn equilibration_removes_row_scale() {
        let a = DMatrix::from_row_slice(2, 2, &[1e-12, 0.0, 0.0, 3.0]);
        assert!((equilibrated_det(&a) - 1.0).abs() < 1e-15);
        assert_eq!(equilibrated_det(&DMatrix::zeros(1, 1)), 0.0);
    }
}
