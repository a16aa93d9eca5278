//! Acceptance criteria, one line per criterion.

use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::Instant;

use nalgebra::DVector;
use releq::branch::{continue_branch, find_seed, min_k0_generator, verify_branch, Branch};
use releq::catalog::{self, Params};
use releq::numerics::Numerics;
use releq::problem::Problem;
use releq::reduction::{ls_data, phi_k0_derivatives, zeta};
use releq::splittings::{analyze_symmetry, check_montaldi, declared_isotropy_angle};
use releq::stability::{branch_stability, patrick_check, Stability};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const TOL_IDENTITY: f64 = 1e-7;
const IDENTITY_DRAWS: usize = 50;
const TOL_MONTALDI: f64 = 1e-8;
const TOL_KERNEL: f64 = 1e-8;
const TOL_LS_ZETA: f64 = 1e-9;
const TOL_LS_TORUS: f64 = 1e-9;
const TOL_LS_PHI: f64 = 1e-6;
const LS_TAUS: [f64; 3] = [0.02, 0.05, 0.1];
const MIN_F_SLOPE: f64 = 2.8;
const MIN_G_SLOPE: f64 = 0.9;
const TOL_ROTOR_SEED: f64 = 1e-10;
const TOL_ROTOR_DELTA: f64 = 1e-6;
const TOL_ROTOR_BRANCH: f64 = 1e-8;
const TOL_ROTOR_PATRICK: f64 = 1e-6;
const TOL_PENDULUM_COS: f64 = 1e-6;
const TOL_DYNAMIC: f64 = 1e-4;
const HORIZON: f64 = 10.0;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn problem(name: &str) -> Result<Problem, String> {
    Problem::catalog(name, &Params::new(), Numerics::default()).map_err(err)
}

fn default_branch(p: &Problem) -> Result<Branch, String> {
    let b = p.blowup();
    let seed = find_seed(&b, &p.fam, &p.default_guess()).map_err(err)?;
    continue_branch(&b, &seed, p.bifurcation.tau_max, p.bifurcation.n_steps).map_err(err)
}

fn fitted_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Log-spaced τ over [1e-3, 1e-1].
fn slope_taus() -> Vec<f64> {
    (0..=8).map(|k| 1e-3 * 10f64.powf(k as f64 / 4.0)).collect()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn identities() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for e in catalog::entries() {
        let sys = catalog::make_system(e.name, &Params::new()).map_err(err)?;
        let r = sys.verify_identities(IDENTITY_DRAWS, 0x1d_e471).map_err(err)?;
        if sys.has_group_action() && r.finite_equivariance.is_none() {
            return Err(format!("{}: finite equivariance not evaluated", e.name));
        }
        worst = worst.max(r.max_residual());
        lines.push(format!("{}={:.1e}", e.name, r.max_residual()));
    }
    check(worst <= TOL_IDENTITY, format!("max residual {worst:.2e} over {IDENTITY_DRAWS} draws ({})", lines.join(", ")))
}

fn montaldi() -> Outcome {
    let (mut grad, mut cross): (f64, f64) = (0.0, 0.0);
    for e in catalog::entries() {
        let sys = catalog::make_system(e.name, &Params::new()).map_err(err)?;
        let a = analyze_symmetry(&sys).map_err(err)?;
        let r = check_montaldi(&sys, &a).map_err(err)?;
        grad = grad.max(r.potential_gradient);
        cross = cross.max(r.torus_cross);
    }
    check(grad <= TOL_MONTALDI && cross <= TOL_MONTALDI, format!("max |dV(q_e)| {grad:.2e}, max torus/k2 pairing {cross:.2e}"))
}

fn kernel() -> Outcome {
    let (mut kern, mut img): (f64, f64) = (0.0, 0.0);
    for e in catalog::entries() {
        let sys = catalog::make_system(e.name, &Params::new()).map_err(err)?;
        let a = analyze_symmetry(&sys).map_err(err)?;
        let angle = declared_isotropy_angle(&sys, &a).ok_or_else(|| format!("{}: no declared isotropy", e.name))?;
        let (a1, a2) = a.inertia_image_angles();
        kern = kern.max(angle);
        img = img.max(a1).max(a2);
    }
    check(kern <= TOL_KERNEL && img <= TOL_KERNEL, format!("kernel angle {kern:.2e}, m_i image angle {img:.2e}"))
}

fn ls_consistency() -> Outcome {
    let (mut dz, mut torus, mut phi): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut cases = 0;
    for name in ["spherical_pendulum", "flat_t2"] {
        let base = problem(name)?;
        for mu1 in &base.bifurcation.mu1_grid {
            let p = base.with_mu1(mu1).map_err(err)?;
            let b = p.blowup();
            let seed = find_seed(&b, &p.fam, &p.default_guess()).map_err(err)?;
            let v = p.slice.sigma(&seed.u);
            for &tau in &LS_TAUS {
                let z = zeta(&p.sys, &p.analysis, &seed.fam, &v, tau).map_err(err)?;
                let q = p.sys.exp_qe(&(&v * tau)).map_err(err)?;
                let inv = p.sys.locked_inertia(&q).0.pseudo_inverse(1e-14).map_err(err)?;
                let oracle = inv * seed.fam.beta(tau).0;
                dz = dz.max((&z.0 - oracle).norm());
            }
            let ls = ls_data(&p.sys, &p.analysis, &seed.fam, &v).map_err(err)?;
            torus = torus.max(p.sys.algebra().torus_residual(&ls.zeta0().map_err(err)?));
            let xi0 = ls.xi0.clone().ok_or("direction lies in Z_mu")?;
            let (_, d2) = phi_k0_derivatives(&p.sys, &p.analysis, &seed.fam, &v, &xi0).map_err(err)?;
            let scale = 1.0 + ls.a.amax() * xi0.0.amax() + ls.b.amax();
            phi = phi.max(d2.amax() / scale);
            cases += 1;
        }
    }
    check(
        dz <= TOL_LS_ZETA && torus <= TOL_LS_TORUS && phi <= TOL_LS_PHI,
        format!("{cases} families: |zeta - I^-1 beta| {dz:.2e}, zeta(0) torus residual {torus:.2e}, scaled phi'' on k0 {phi:.2e}"),
    )
}

/// F₁(τ) − F₀ − τ²F(0) over [`slope_taus`] at a point off the seed.
fn f_remainders(name: &str) -> Result<(Vec<f64>, f64), String> {
    let p = problem(name)?;
    let b = p.blowup();
    let u = p.default_guess() * 1.1;
    let f0 = b.f0(&p.fam);
    let fz = b.f(&p.fam, 0.0, &u).map_err(err)?;
    let mut rem = Vec::new();
    for tau in slope_taus() {
        rem.push(b.f1(&p.fam, tau, &u).map_err(err)? - f0 - tau * tau * fz);
    }
    Ok((rem, f0.abs() + fz.abs()))
}

fn blowup_orders() -> Outcome {
    let logt: Vec<f64> = slope_taus().iter().map(|t| t.ln()).collect();
    let mut f_slopes = Vec::new();
    for name in ["spherical_pendulum", "double_spherical_pendulum", "so3_two_particle"] {
        let (rem, _) = f_remainders(name)?;
        let ys: Vec<f64> = rem.iter().map(|r| r.abs().ln()).collect();
        f_slopes.push((name, fitted_slope(&logt, &ys)));
    }
    // flat_t2 has F constant in τ along its slice, so only a rounding floor applies.
    let (rem, scale) = f_remainders("flat_t2")?;
    let flat = rem.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let flat_ok = flat <= 64.0 * f64::EPSILON * scale;
    let p = problem("so3_two_particle")?;
    let b = p.blowup();
    let u = p.default_guess();
    let mut ys = Vec::new();
    for tau in slope_taus() {
        ys.push(b.g1(&p.fam, tau, &u).map_err(err)?.norm().ln());
    }
    let g_slope = fitted_slope(&logt, &ys);
    let f_min = f_slopes.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let f_text: Vec<String> = f_slopes.iter().map(|(n, s)| format!("{n} {s:.2}")).collect();
    check(
        f_min >= MIN_F_SLOPE && flat_ok && g_slope >= MIN_G_SLOPE,
        format!(
            "F remainder slopes [{}], flat_t2 remainder {flat:.1e} (identically zero), G1 slope so3_two_particle {g_slope:.2}",
            f_text.join(", ")
        ),
    )
}

fn rotor_oracle() -> Outcome {
    let p = problem("planar_rotor")?;
    if p.fam.theta1.0.as_slice() != [1.0] {
        return Err(format!("theta1 is {:?}", p.fam.theta1.0.as_slice()));
    }
    let b = p.blowup();
    let seed = find_seed(&b, &p.fam, &DVector::from_element(1, 1.3)).map_err(err)?;
    let du = (seed.u[0] - 1.0).abs();
    let dd = (seed.delta.matrix[(0, 0)] - 4.0).abs();
    let br = continue_branch(&b, &seed, p.bifurcation.tau_max, p.bifurcation.n_steps).map_err(err)?;
    let bu = br.points.iter().map(|pt| (pt.u[0] - 1.0).abs()).fold(0.0, f64::max);
    let bz = br.points.iter().map(|pt| (pt.zeta.0[0] - 1.0).abs()).fold(0.0, f64::max);
    let mid = &br.points[br.points.len() / 2];
    let pc = patrick_check(&p.sys, &mid.q, &mid.beta, 1e-8).map_err(err)?;
    let dh = (pc.hessian[(0, 0)] - 4.0).abs();
    check(
        du <= TOL_ROTOR_SEED && dd <= TOL_ROTOR_DELTA && bu <= TOL_ROTOR_BRANCH && bz <= TOL_ROTOR_BRANCH && dh <= TOL_ROTOR_PATRICK,
        format!("|u0-1| {du:.1e}, |Delta-4| {dd:.1e}, max |u-1| {bu:.1e}, max |zeta-1| {bz:.1e}, |Patrick-4| {dh:.1e}"),
    )
}

/// Polar radius ρ = sin θ of the steady rotation with momentum `mu`, from
/// bisection on d/dρ of ρ ↦ m g ℓ z(ρ) + μ²/(2 m ℓ² ρ²) with z = −√(1−ρ²).
fn pendulum_radius(mu: f64, m: f64, l: f64, g0: f64) -> f64 {
    let d = |r: f64| m * g0 * l * r / (1.0 - r * r).sqrt() - mu * mu / (m * l * l * r.powi(3));
    let (mut lo, mut hi) = (1e-12, 1.0 - 1e-15);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if d(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn pendulum_branch() -> Outcome {
    let p = problem("spherical_pendulum")?;
    let prm = catalog::resolve_params("spherical_pendulum", &Params::new()).map_err(err)?;
    let (m, l, g0) = (prm["m"], prm["l"], prm["g0"]);
    let mut br = default_branch(&p)?;
    let mut cos_res: f64 = 0.0;
    let mut root_res: f64 = 0.0;
    for pt in br.points.iter().filter(|pt| pt.tau > 0.0) {
        let rho = pt.q.norm();
        let cos_theta = -(1.0 - rho * rho).sqrt();
        let omega = pt.zeta.0[0];
        cos_res = cos_res.max((cos_theta + g0 / (l * omega * omega)).abs());
        root_res = root_res.max((rho - pendulum_radius(pt.beta.0[0], m, l, g0)).abs());
    }
    let v = verify_branch(&p.sys, &br, HORIZON, 1, TOL_DYNAMIC).map_err(err)?;
    let rep = branch_stability(&p.blowup(), &mut br).map_err(err)?;
    let small_pd = br.points.iter().skip(1).take(8).all(|pt| pt.stability == Stability::PositiveDefinite);
    check(
        cos_res <= TOL_PENDULUM_COS && root_res <= TOL_PENDULUM_COS && v.dynamic_passed && rep.small_tau_positive && small_pd,
        format!(
            "{} points: cos residual {cos_res:.1e}, 1-D root residual {root_res:.1e}, dynamic deviation {:.1e} over horizon {HORIZON}, small-tau PD {small_pd}",
            br.points.len(),
            v.max_dynamic
        ),
    )
}

fn distinctness() -> Outcome {
    let base = problem("flat_t2")?;
    let grid = base.bifurcation.mu1_grid.clone();
    if grid.len() < 2 {
        return Err("flat_t2 grid has fewer than two values".into());
    }
    let mut momenta = Vec::new();
    for mu1 in &grid[..2] {
        let p = base.with_mu1(mu1).map_err(err)?;
        let br = default_branch(&p)?;
        let pi1: Vec<DVector<f64>> = br
            .points
            .iter()
            .map(|pt| p.analysis.pi1(&p.sys.locked_inertia(&pt.q).apply(&pt.zeta)).0)
            .collect();
        momenta.push((br.points.iter().map(|pt| pt.tau).collect::<Vec<_>>(), pi1));
    }
    if momenta[0].0 != momenta[1].0 {
        return Err("branches use different tau grids".into());
    }
    let gap = momenta[0].1.iter().zip(&momenta[1].1).map(|(a, b)| (a - b).amax()).fold(f64::INFINITY, f64::min);
    check(gap > 1e-6, format!("{} grid points, min Pi1 momentum gap {gap:.3e}", momenta[0].0.len()))
}

fn isotropy_jump() -> Outcome {
    let mut branches = 0;
    let mut root: f64 = 0.0;
    let mut weakest = f64::INFINITY;
    for e in catalog::entries() {
        let base = match Problem::catalog(e.name, &Params::new(), Numerics::default()) {
            Ok(p) => p,
            Err(releq::error::Error::TrivialIsotropyFailed) => continue,
            Err(x) => return Err(format!("{}: {x}", e.name)),
        };
        for mu1 in &base.bifurcation.mu1_grid {
            let p = base.with_mu1(mu1).map_err(err)?;
            let br = default_branch(&p).map_err(|x| format!("{}: {x}", e.name))?;
            for pt in &br.points {
                let g = min_k0_generator(&p.sys, &p.analysis, &pt.q);
                if pt.tau == 0.0 {
                    root = root.max(g);
                } else {
                    weakest = weakest.min(g / pt.tau);
                }
            }
            branches += 1;
        }
    }
    check(root <= 1e-12 && weakest > 0.0, format!("{branches} branches: root generator {root:.1e}, min |k0 generator|/tau {weakest:.3e}"))
}

fn run_all(config: &Path, out: &Path, threads: &str) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_releq"))
        .args(["all", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", threads])
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .status()
        .map_err(err)?;
    match status.code() {
        Some(0 | 3) => Ok(()),
        c => Err(format!("{}: exit {c:?}", config.display())),
    }
}

fn dir_contents(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(err)? {
        let path = entry.map_err(err)?.path();
        files.push((path.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&path).map_err(err)?));
    }
    files.sort();
    Ok(files)
}

fn determinism() -> Outcome {
    let configs = PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs"));
    let scratch = std::env::temp_dir().join(format!("releq-acceptance-{}", std::process::id()));
    let mut names: Vec<PathBuf> = std::fs::read_dir(&configs)
        .map_err(err)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    names.sort();
    let result = std::thread::scope(|sc| {
        let jobs: Vec<_> = names
            .iter()
            .map(|cfg| {
                let scratch = &scratch;
                sc.spawn(move || -> Result<usize, String> {
                    let stem = cfg.file_stem().unwrap().to_string_lossy().into_owned();
                    let a = scratch.join(format!("{stem}-a"));
                    let b = scratch.join(format!("{stem}-b"));
                    let second = std::thread::spawn({
                        let (cfg, b) = (cfg.clone(), b.clone());
                        move || run_all(&cfg, &b, "2")
                    });
                    run_all(cfg, &a, "1")?;
                    second.join().map_err(|_| "worker panicked".to_string())??;
                    let (ca, cb) = (dir_contents(&a)?, dir_contents(&b)?);
                    if ca != cb {
                        return Err(format!("{stem}: outputs differ"));
                    }
                    Ok(ca.len())
                })
            })
            .collect();
        let mut files = 0;
        for j in jobs {
            files += j.join().map_err(|_| "worker panicked".to_string())??;
        }
        Ok(format!("{} configs, {files} files byte-identical across runs", names.len()))
    });
    let _ = std::fs::remove_dir_all(&scratch);
    result
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("identity suite", identities),
        ("Montaldi conditions", montaldi),
        ("kernel identity", kernel),
        ("Lyapunov-Schmidt consistency", ls_consistency),
        ("blow-up orders", blowup_orders),
        ("planar rotor closed-form branch", rotor_oracle),
        ("spherical pendulum branch", pendulum_branch),
        ("branch distinctness", distinctness),
        ("trivial symmetry breaking", isotropy_jump),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (title, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = f();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS {:>2} {title}: {d} [{secs:.1}s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {title}: {d} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
