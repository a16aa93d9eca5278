use nalgebra::DVector;
use releq::branch::{continue_branch, delta_matrix, find_seed, parse_branch_csv, min_k0_generator, verify_branch};
use releq::catalog::Params;
use releq::error::Error;
use releq::numerics::Numerics;
use releq::problem::Problem;

fn params(pairs: &[(&str, f64)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn problem(name: &str, pairs: &[(&str, f64)]) -> Problem {
    Problem::catalog(name, &params(pairs), Numerics::default()).unwrap()
}

fn u1(x: f64) -> DVector<f64> {
    DVector::from_element(1, x)
}

#[test]
fn rotor_slice_is_radial() {
    let p = problem("planar_rotor", &[]);
    assert_eq!(p.slice.dim_u, 1);
    assert!((&p.slice.basis_u[0] - DVector::from_vec(vec![1.0, 0.0])).amax() < 1e-12);
}

#[test]
fn rotor_f_matches_closed_form() {
    let p = problem("planar_rotor", &[]);
    let b = p.blowup();
    for &u in &[0.8, 1.0, 1.3] {
        let exact = 0.5 * u * u + 0.5 / (u * u);
        for &tau in &[0.0, 2e-4, 1e-3, 0.05, 0.4] {
            let f = b.f(&p.fam, tau, &u1(u)).unwrap();
            assert!((f - exact).abs() < 1e-7, "u={u} tau={tau}: {f} vs {exact}");
        }
        let tau = 0.3;
        let f1 = b.f1(&p.fam, tau, &u1(u)).unwrap();
        assert!((f1 - tau * tau * exact).abs() < 1e-10);
    }
    assert!((b.f1(&p.fam, 0.0, &u1(0.7)).unwrap() - b.f0(&p.fam)).abs() < 1e-15);
}

#[test]
fn rotor_seed_and_delta() {
    let p = problem("planar_rotor", &[]);
    let b = p.blowup();
    let seed = find_seed(&b, &p.fam, &u1(1.3)).unwrap();
    assert!((seed.u[0] - 1.0).abs() < 1e-10, "seed {}", seed.u[0]);
    assert!((seed.delta.matrix[(0, 0)] - 4.0).abs() < 1e-6, "delta {}", seed.delta.matrix);
    let exact = find_seed(&b, &p.fam, &u1(1.0)).unwrap();
    assert_eq!(exact.iterations, 0);
    let d = delta_matrix(&b, &p.fam, &u1(1.2)).unwrap();
    let expected = 1.0 + 3.0 / 1.2f64.powi(4);
    assert!((d.matrix[(0, 0)] - expected).abs() < 1e-6);
    assert!(d.uu_asymmetry < 1e-8);
}

#[test]
fn inverted_rotor_has_no_seed() {
    let p = problem("planar_rotor", &[("k", -1.0)]);
    let b = p.blowup();
    assert!(matches!(find_seed(&b, &p.fam, &u1(1.3)), Err(Error::NewtonDiverged(_))));
}

#[test]
fn rotor_branch_is_circular_orbits() {
    let p = problem("planar_rotor", &[]);
    let b = p.blowup();
    let seed = find_seed(&b, &p.fam, &u1(1.3)).unwrap();
    let br = continue_branch(&b, &seed, 1.0, 16).unwrap();
    assert_eq!(br.points.len(), 17);
    for pt in &br.points {
        assert!((pt.u[0] - 1.0).abs() < 1e-8, "u at {}: {}", pt.tau, pt.u[0]);
        assert!((pt.zeta.0[0] - 1.0).abs() < 1e-8, "zeta at {}: {}", pt.tau, pt.zeta.0[0]);
        assert!((&pt.q - DVector::from_vec(vec![pt.tau, 0.0])).amax() < 1e-8);
        assert!((pt.beta.0[0] - pt.tau * pt.tau).abs() < 1e-14);
        assert!(pt.res_f <= 1e-10);
    }
    for w in br.points.windows(2) {
        assert!(w[1].tau > w[0].tau);
        assert!(w[1].tau - w[0].tau <= 1.0 / 16.0 + 1e-15);
    }
    for pt in &br.points[1..] {
        assert!(min_k0_generator(&p.sys, &p.analysis, &pt.q) >= 1e-6 * pt.tau);
    }
    let v = verify_branch(&p.sys, &br, 2.0, 4, 1e-4).unwrap();
    assert!(v.dynamic_passed, "dynamic {}", v.max_dynamic);
    assert!(v.max_amended < 1e-6);
    assert!(v.augmented_at_root < 1e-8);
}

#[test]
fn zero_tau_max_gives_the_seed() {
    let p = problem("planar_rotor", &[]);
    let b = p.blowup();
    let seed = find_seed(&b, &p.fam, &u1(1.3)).unwrap();
    let br = continue_branch(&b, &seed, 0.0, 8).unwrap();
    assert_eq!(br.points.len(), 1);
    assert_eq!(br.points[0].tau, 0.0);
    assert_eq!(&br.points[0].q, p.sys.q_e());
}

#[test]
fn csv_round_trip() {
    let p = problem("planar_rotor", &[]);
    let b = p.blowup();
    let seed = find_seed(&b, &p.fam, &u1(1.3)).unwrap();
    let br = continue_branch(&b, &seed, 0.5, 4).unwrap();
    let text = br.to_csv();
    assert!(text.starts_with("tau,u[0],mu1[0],mu2[0],q[0],q[1],zeta[0],beta[0],res_F,res_G,stability\n"));
    let rows = parse_branch_csv(&text).unwrap();
    assert_eq!(rows.len(), br.points.len());
    for (r, pt) in rows.iter().zip(&br.points) {
        assert_eq!(r.tau, pt.tau);
        assert_eq!(r.u, pt.u);
        assert_eq!(r.stability, pt.stability);
    }
    assert!(parse_branch_csv("tau,stability\n1.0,Sideways\n").is_err());
}

#[test]
fn pendulum_f1_matches_amended_potential() {
    let p = problem("spherical_pendulum", &[]);
    let b = p.blowup();
    let u = u1(0.9);
    let tau = 0.5;
    let q = p.sys.exp_qe(&(p.slice.sigma(&u) * tau)).unwrap();
    let direct = p.sys.amended_potential(&p.fam.beta(tau), &q).unwrap();
    assert!((b.f1(&p.fam, tau, &u).unwrap() - direct).abs() < 1e-10);
}

fn fitted_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn pendulum_f_remainder_is_cubic_or_better() {
    let p = problem("spherical_pendulum", &[]);
    let b = p.blowup();
    let u = u1(1.1);
    let f0 = b.f0(&p.fam);
    let fz = b.f(&p.fam, 0.0, &u).unwrap();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for k in 0..9 {
        let tau = 1e-3 * 10f64.powf(k as f64 / 4.0);
        let rem = b.f1(&p.fam, tau, &u).unwrap() - f0 - tau * tau * fz;
        xs.push(tau.ln());
        ys.push(rem.abs().ln());
    }
    let s = fitted_slope(&xs, &ys);
    assert!(s >= 2.8, "slope {s}");
}

#[test]
fn pendulum_regimes_agree_at_switch() {
    let p = problem("spherical_pendulum", &[]);
    let b = p.blowup();
    let u = u1(1.0);
    let ts = p.sys.numerics().tau_switch;
    let below = b.f(&p.fam, ts, &u).unwrap();
    let above = b.f(&p.fam, ts * (1.0 + 1e-9), &u).unwrap();
    assert!((below - above).abs() <= p.sys.numerics().tol_match, "{below} vs {above}");
}

#[test]
fn pendulum_branch_is_steady_rotation() {
    let p = problem("spherical_pendulum", &[]);
    let b = p.blowup();
    let seed = find_seed(&b, &p.fam, &p.default_guess()).unwrap();
    assert!(seed.delta.equilibrated_det.abs() > 1e-10);
    let br = continue_branch(&b, &seed, 0.5, 16).unwrap();
    let (g0, l) = (1.0, 1.0);
    for pt in &br.points {
        let cos_theta = -(1.0 - pt.q.norm_squared()).sqrt();
        let omega = pt.zeta.0[0];
        assert!((cos_theta + g0 / (l * omega * omega)).abs() < 1e-6, "tau {}: {cos_theta} vs {omega}", pt.tau);
    }
    let v = verify_branch(&p.sys, &br, 1.0, 8, 1e-4).unwrap();
    assert!(v.max_amended <= 1e-6, "amended {}", v.max_amended);
    assert!(v.dynamic_passed, "dynamic {}", v.max_dynamic);
}

#[test]
fn pendulum_branch_is_grid_independent() {
    let p = problem("spherical_pendulum", &[]);
    let b = p.blowup();
    let seed = find_seed(&b, &p.fam, &p.default_guess()).unwrap();
    let coarse = continue_branch(&b, &seed, 0.2, 4).unwrap();
    let fine = continue_branch(&b, &seed, 0.2, 8).unwrap();
    for c in &coarse.points {
        let f = fine.points.iter().find(|f| (f.tau - c.tau).abs() < 1e-14).unwrap();
        assert!((&c.u - &f.u).amax() < 1e-8, "tau {}", c.tau);
    }
}

#[test]
fn root_velocity_lies_in_torus() {
    for name in ["planar_rotor", "spherical_pendulum", "flat_t2", "so3_two_particle"] {
        let p = problem(name, &[]);
        let b = p.blowup();
        let seed = find_seed(&b, &p.fam, &p.default_guess()).unwrap();
        let r = p.sys.algebra().torus_residual(&seed.zeta0);
        assert!(r <= 1e-9, "{name}: {r}");
    }
}

#[test]
fn g1_vanishes_at_tau_zero() {
    for name in ["planar_rotor", "flat_t2", "spherical_pendulum", "double_spherical_pendulum", "so3_two_particle"] {
        let p = problem(name, &[]);
        let b = p.blowup();
        let g = b.g1(&p.fam, 0.0, &p.default_guess()).unwrap();
        assert!(g.iter().all(|x| x.abs() <= 1e-7), "{name}: {g}");
    }
}

#[test]
fn two_particle_seed_solves_g() {
    let p = problem("so3_two_particle", &[]);
    assert_eq!(p.analysis.k2.len(), 2);
    let b = p.blowup();
    let seed = find_seed(&b, &p.fam, &p.default_guess()).unwrap();
    let r = b.residual(&seed.fam, 0.0, &b.pack(&seed.u, &seed.fam)).unwrap();
    assert!(r.amax() <= 1e-6, "{r}");
    let br = continue_branch(&b, &seed, 0.1, 4).unwrap();
    for pt in &br.points {
        assert!(pt.res_g <= 1e-6);
    }
}

#[test]
fn central_force_has_no_trivial_isotropy_slice() {
    let r = Problem::catalog("so3_central_force", &Params::new(), Numerics::default());
    assert!(matches!(r, Err(Error::TrivialIsotropyFailed)), "{r:?}");
}

#[test]
fn flat_t2_branches_are_distinct() {
    let p = problem("flat_t2", &[]);
    let grid = p.bifurcation.mu1_grid.clone();
    let mut firsts = Vec::new();
    for mu1 in &grid {
        let pm = p.with_mu1(mu1).unwrap();
        let b = pm.blowup();
        let seed = find_seed(&b, &pm.fam, &pm.default_guess()).unwrap();
        let br = continue_branch(&b, &seed, 0.1, 4).unwrap();
        for pt in &br.points {
            let m1 = pm.analysis.pi1(&pt.beta);
            assert!((&m1.0 - DVector::from_column_slice(mu1)).amax() < 1e-12);
        }
        for pt in &br.points[1..] {
            assert!(min_k0_generator(&pm.sys, &pm.analysis, &pt.q) >= 1e-6 * pt.tau);
        }
        firsts.push(pm.analysis.pi1(&br.points[0].beta).0);
    }
    assert!((&firsts[0] - &firsts[1]).amax() > 0.1);
}
