use nalgebra::{DMatrix, DVector};
use releq::branch::{continue_branch, find_seed};
use releq::catalog::Params;
use releq::error::Error;
use releq::geometry::{hessian, DiffScheme};
use releq::lie::CoVector;
use releq::numerics::Numerics;
use releq::problem::Problem;
use releq::stability::{branch_stability, classify_definiteness, hessian_f_u, patrick_check, Stability};

fn problem(name: &str, pairs: &[(&str, f64)]) -> Problem {
    let p: Params = pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    Problem::catalog(name, &p, Numerics::default()).unwrap()
}

#[test]
fn rotor_hessian_at_seed_is_four() {
    let p = problem("planar_rotor", &[]);
    let b = p.blowup();
    let h = hessian_f_u(&b, &p.fam, 0.0, &DVector::from_element(1, 1.0)).unwrap();
    assert!((h[(0, 0)] - 4.0).abs() < 1e-6, "{h}");
    assert_eq!(classify_definiteness(&h, 1e-8), Stability::PositiveDefinite);
}

#[test]
fn rotor_branch_is_stable_and_matches_patrick() {
    let p = problem("planar_rotor", &[]);
    let b = p.blowup();
    let seed = find_seed(&b, &p.fam, &DVector::from_element(1, 1.3)).unwrap();
    let mut br = continue_branch(&b, &seed, 1.0, 8).unwrap();
    let rep = branch_stability(&b, &mut br).unwrap();
    assert!(br.points.iter().all(|pt| pt.stability == Stability::PositiveDefinite));
    assert!(rep.theorem_applicable);
    assert_eq!(rep.first_change_tau, None);
    assert!(rep.small_tau_positive);

    let mid = &br.points[4];
    assert!((mid.tau - 0.5).abs() < 1e-15);
    let pc = patrick_check(&p.sys, &mid.q, &mid.beta, 1e-8).unwrap();
    assert_eq!(pc.class, mid.stability);
}

#[test]
fn patrick_on_rotor_closed_form() {
    let p = problem("planar_rotor", &[]);
    let r = patrick_check(&p.sys, &DVector::from_vec(vec![1.0, 0.0]), &CoVector::from_slice(&[1.0]), 1e-8).unwrap();
    assert_eq!(r.dim_g_mu, 1);
    assert_eq!(r.hessian.nrows(), 1);
    assert!((r.hessian[(0, 0)] - 4.0).abs() < 1e-6, "{}", r.hessian);
    assert_eq!(r.class, Stability::PositiveDefinite);
    let at_origin = patrick_check(&p.sys, &DVector::zeros(2), &CoVector::from_slice(&[1.0]), 1e-8);
    assert!(matches!(at_origin, Err(Error::SymmetricPoint(_))));
}

#[test]
fn patrick_on_two_particle_uses_coadjoint_kernel() {
    let p = problem("so3_two_particle", &[]);
    let q = p.sys.exp_qe(&(p.slice.sigma(&p.default_guess()) * 0.1)).unwrap();
    let r = patrick_check(&p.sys, &q, &CoVector::from_slice(&[0.0, 0.0, 0.01]), 1e-8).unwrap();
    assert_eq!(r.dim_g_mu, 1);
    assert_eq!(r.hessian.nrows(), 5);
}

#[test]
fn inverted_rotor_far_out_is_negative_definite() {
    let p = problem("planar_rotor", &[("k", -1.0)]);
    let b = p.blowup();
    let h = hessian_f_u(&b, &p.fam, 0.2, &DVector::from_element(1, 2.0)).unwrap();
    let expected = -1.0 + 3.0 / 16.0;
    assert!((h[(0, 0)] - expected).abs() < 1e-6);
    assert_eq!(classify_definiteness(&h, 1e-8), Stability::NegativeDefinite);
}

#[test]
fn pendulum_slow_rotations_are_stable() {
    let p = problem("spherical_pendulum", &[]);
    let b = p.blowup();
    let seed = find_seed(&b, &p.fam, &p.default_guess()).unwrap();
    let mut br = continue_branch(&b, &seed, 0.3, 12).unwrap();
    let rep = branch_stability(&b, &mut br).unwrap();
    assert_eq!(rep.root, Stability::PositiveDefinite);
    assert!(rep.small_tau_positive);
}

#[test]
fn hessian_agrees_with_direct_amended_path() {
    let p = problem("spherical_pendulum", &[]);
    let b = p.blowup();
    let f0 = b.f0(&p.fam);
    let scheme = DiffScheme::slice();
    for &tau in &[0.1, 0.3] {
        let u = DVector::from_element(1, 1.05);
        let h = hessian_f_u(&b, &p.fam, tau, &u).unwrap();
        let beta = p.fam.beta(tau);
        let direct = hessian(
            |x| {
                let q = p.sys.exp_qe(&(p.slice.sigma(x) * tau))?;
                Ok((p.sys.amended_potential(&beta, &q)? - f0) / (tau * tau))
            },
            &u,
            &scheme,
        )
        .unwrap();
        assert!((&h - &direct).amax() < 1e-6, "tau {tau}: {h} vs {direct}");
    }
}

#[test]
fn nonabelian_is_refused() {
    let p = problem("so3_two_particle", &[]);
    let b = p.blowup();
    assert_eq!(hessian_f_u(&b, &p.fam, 0.0, &p.default_guess()), Err(Error::NonAbelian));
}

#[test]
fn quadratic_hessian_is_exact() {
    let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
    let h = hessian(|x| Ok(0.5 * (x.transpose() * &a * x)[(0, 0)]), &DVector::from_vec(vec![0.3, -0.7]), &DiffScheme::slice())
        .unwrap();
    assert!((&h - &a).amax() < 1e-9);
}
