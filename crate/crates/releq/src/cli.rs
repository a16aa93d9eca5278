//! Command-line front end. Exit codes: 0 success, 1 configuration or I/O
//! problem, 2 verification failure, 3 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use rayon::prelude::*;

use crate::branch::{continue_branch, find_seed, min_k0_generator, parse_branch_csv, verify_branch, Branch, BranchVerification, Seed};
use crate::catalog::{self, BifurcationDefaults};
use crate::config::{parse_seed_guess, Config, SeedGuess};
use crate::error::Error;
use crate::lie::{AlgVector, CoVector};
use crate::mechanics::ChartSystem;
use crate::problem::Problem;
use crate::report::{num, vector, Report};
use crate::splittings::{analyze_symmetry, check_hypothesis_h, check_montaldi, declared_isotropy_angle, m0_invariance};
use crate::stability::{classify_definiteness, hessian_f_u, patrick_check, summarize, Stability};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Random draws per identity in `verify`.
pub const IDENTITY_SAMPLES: usize = 50;
pub const IDENTITY_SEED: u64 = 0x1d_e471;
/// Residual bound for the identity suite, Montaldi conditions and kernel angles.
pub const TOL_VERIFY: f64 = 1e-7;
pub const TOL_KERNEL: f64 = 1e-8;
pub const TOL_DYNAMIC: f64 = 1e-4;

#[derive(Parser, Debug)]
#[command(name = "releq", version, about = "Branches of relative equilibria near symmetric equilibria")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Identity suite, torus relative-equilibrium condition and Montaldi conditions.
    Verify(RunArgs),
    /// Isotropy splittings at the equilibrium.
    Analyze(RunArgs),
    /// Seed search at tau = 0 for every mu1 in the grid.
    Seed(RunArgs),
    /// Continuation of every branch, one CSV per mu1.
    Branch(RunArgs),
    /// Stability classification of existing branch CSVs.
    Stability(RunArgs),
    /// Everything above, in order.
    All(RunArgs),
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    /// Configuration file (alternative to --config).
    #[arg(value_name = "CONFIG")]
    config_path: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides outputs.dir.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Newton start, e.g. `u=1.3:0.2,mu2=0:0:0`.
    #[arg(long = "seed-guess")]
    seed_guess: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Status {
    Ok,
    Verify,
    Numeric,
}

impl Status {
    fn code(self) -> i32 {
        match self {
            Status::Ok => EXIT_OK,
            Status::Verify => EXIT_VERIFY,
            Status::Numeric => EXIT_NUMERIC,
        }
    }
}

struct Ctx {
    cfg: Config,
    out: PathBuf,
    guess: Option<SeedGuess>,
    sys: ChartSystem,
    bif: BifurcationDefaults,
    report: Report,
    status: Status,
}

impl Ctx {
    fn fail(&mut self, s: Status) {
        self.status = self.status.max(s);
    }

    fn numeric(&mut self, context: &str, e: &Error) {
        eprintln!("error: {}: {context}: {e}", e.name());
        self.fail(Status::Numeric);
    }
}

fn config_error(msg: impl std::fmt::Display) -> i32 {
    eprintln!("config error: {msg}");
    EXIT_CONFIG
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let (name, a) = match &cli.command {
        Command::Verify(a) => ("verify", a),
        Command::Analyze(a) => ("analyze", a),
        Command::Seed(a) => ("seed", a),
        Command::Branch(a) => ("branch", a),
        Command::Stability(a) => ("stability", a),
        Command::All(a) => ("all", a),
    };
    let path = match (&a.config, &a.config_path) {
        (Some(p), None) | (None, Some(p)) => p.clone(),
        (Some(_), Some(_)) => return config_error("give the configuration either positionally or with --config, not both"),
        (None, None) => return config_error("no configuration file given"),
    };
    let cfg = match Config::load(&path) {
        Ok(c) => c,
        Err(e) => return config_error(format!("{}: {e}", path.display())),
    };
    let guess = match &a.seed_guess {
        Some(s) => match parse_seed_guess(s) {
            Ok(g) => Some(g),
            Err(e) => return config_error(e),
        },
        None => cfg.bifurcation.seed_guess.clone(),
    };
    let out = a.out.clone().or_else(|| cfg.outputs.dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let sys = match cfg.build_system() {
        Ok(s) => s,
        Err(e @ (Error::BadParams(_) | Error::UnknownSystem(_))) => return config_error(e),
        Err(e) => {
            eprintln!("error: {}: {e}", e.name());
            return EXIT_NUMERIC;
        }
    };
    let bif = match cfg.bifurcation_inputs() {
        Ok(b) => b,
        Err(e) => return config_error(e),
    };
    if let Err(e) = fs::create_dir_all(&out) {
        return config_error(format!("cannot create {}: {e}", out.display()));
    }
    let mut ctx = Ctx { report: header(&cfg, name), cfg, out, guess, sys, bif, status: Status::Ok };

    let threads = a.threads.unwrap_or(0);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => return config_error(format!("--threads: {e}")),
    };
    let io = pool.install(|| {
        match name {
            "verify" => cmd_verify(&mut ctx),
            "analyze" => cmd_analyze(&mut ctx),
            "seed" => cmd_seed(&mut ctx),
            "branch" => cmd_branch(&mut ctx)?,
            "stability" => cmd_stability(&mut ctx)?,
            _ => {
                cmd_verify(&mut ctx);
                cmd_analyze(&mut ctx);
                cmd_seed(&mut ctx);
                cmd_branch(&mut ctx)?;
                cmd_stability(&mut ctx)?;
            }
        }
        let text = ctx.report.render();
        fs::write(ctx.out.join("analysis.txt"), &text)?;
        print!("{text}");
        Ok::<(), std::io::Error>(())
    });
    if let Err(e) = io {
        eprintln!("error: cannot write output: {e}");
        return EXIT_CONFIG;
    }
    ctx.status.code()
}

fn header(cfg: &Config, command: &str) -> Report {
    let mut h = vec![
        "releq analysis report".to_string(),
        format!("command: {command}"),
        format!("system: {}", cfg.system.name),
    ];
    if let Ok(p) = catalog::resolve_params(&cfg.system.name, &cfg.system.params) {
        let parts: Vec<String> = p.iter().map(|(k, v)| format!("{k} = {v}")).collect();
        h.push(format!("params: {}", parts.join(", ")));
    }
    let ov = cfg.overrides();
    if ov.is_empty() {
        h.push("overrides: none".to_string());
    } else {
        h.push("overrides:".to_string());
        h.extend(ov.into_iter().map(|l| format!("  {l}")));
    }
    Report { header: h, sections: Vec::new() }
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn cmd_verify(ctx: &mut Ctx) {
    let sys = ctx.sys.clone();
    let ids = match sys.verify_identities(IDENTITY_SAMPLES, IDENTITY_SEED) {
        Ok(r) => r,
        Err(e) => return ctx.numeric("identity suite", &e),
    };
    let analysis = match analyze_symmetry(&sys) {
        Ok(a) => a,
        Err(e) => return ctx.numeric("symmetry analysis", &e),
    };
    let (h, m) = match (check_hypothesis_h(&sys, &analysis), check_montaldi(&sys, &analysis)) {
        (Ok(h), Ok(m)) => (h, m),
        (Err(e), _) | (_, Err(e)) => return ctx.numeric("hypothesis checks", &e),
    };
    let angle = declared_isotropy_angle(&sys, &analysis);
    let ids_ok = ids.max_residual() <= TOL_VERIFY;
    let kernel_ok = angle.is_none_or(|a| a <= TOL_KERNEL);
    let s = ctx.report.section("verify");
    s.kv("samples", ids.samples)
        .kv("useful_identity", num(ids.useful_identity))
        .kv("infinitesimal_equivariance", num(ids.infinitesimal_equivariance))
        .kv("finite_equivariance", ids.finite_equivariance.map_or("unavailable".to_string(), num))
        .kv("identities", pass(ids_ok))
        .kv("hypothesis_h_max_residual", num(h.max_residual))
        .kv("hypothesis_h", pass(h.passed))
        .kv("montaldi_potential_gradient", num(m.potential_gradient))
        .kv("montaldi_torus_cross", num(m.torus_cross))
        .kv("montaldi", pass(m.passed))
        .kv("declared_isotropy_angle", angle.map_or("none declared".to_string(), num))
        .kv("kernel", pass(kernel_ok));
    if !(ids_ok && h.passed && m.passed && kernel_ok) {
        ctx.fail(Status::Verify);
    }
}

fn basis_lines(s: &mut crate::report::Section, name: &str, basis: &[DVector<f64>]) {
    s.kv(&format!("dim_{name}"), basis.len());
    for (i, b) in basis.iter().enumerate() {
        s.kv(&format!("{name}[{i}]"), vector(b.as_slice()));
    }
}

fn cmd_analyze(ctx: &mut Ctx) {
    let sys = ctx.sys.clone();
    let a = match analyze_symmetry(&sys) {
        Ok(a) => a,
        Err(e) => return ctx.numeric("symmetry analysis", &e),
    };
    let (torus, _) = sys.algebra().split_torus_complement();
    let (ang_img, ang_m) = a.inertia_image_angles();
    let s = ctx.report.section("analyze");
    s.kv("dim_g", a.dim_g()).kv("dim_torus", torus.len()).kv("abelian", sys.algebra().is_abelian());
    s.kv("q_e", vector(a.q_e.as_slice()));
    s.kv("inertia_singular_values", vector(&a.singular_values));
    s.kv("spectral_gap", if a.spectral_gap.is_finite() { num(a.spectral_gap) } else { "inf".to_string() });
    basis_lines(s, "k0", &a.k0);
    basis_lines(s, "k1", &a.k1);
    basis_lines(s, "k2", &a.k2);
    s.kv("inertia_image_angle", num(ang_img));
    s.kv("m_subspace_angle", num(ang_m));
    s.kv("m0_invariance_angle", num(m0_invariance(&sys, &a)));
}

fn guess_for(ctx: &Ctx, p: &Problem) -> Result<(DVector<f64>, crate::reduction::BetaFamily), Error> {
    match &ctx.guess {
        None => Ok((p.default_guess(), p.fam.clone())),
        Some(g) => {
            crate::error::check_dim(p.slice.dim_u, g.u.len())?;
            let fam = match &g.mu2 {
                Some(m) => {
                    crate::error::check_dim(p.analysis.dim_g(), m.len())?;
                    p.fam.with_mu2(CoVector::from_slice(m))
                }
                None => p.fam.clone(),
            };
            Ok((DVector::from_column_slice(&g.u), fam))
        }
    }
}

fn seed_for(ctx: &Ctx, mu1: &[f64]) -> Result<(Problem, Seed), Error> {
    let p = Problem::new(ctx.sys.clone(), ctx.bif.clone(), mu1)?;
    let (u, fam) = guess_for(ctx, &p)?;
    let seed = find_seed(&p.blowup(), &fam, &u)?;
    Ok((p, seed))
}

fn cmd_seed(ctx: &mut Ctx) {
    let grid = ctx.bif.mu1_grid.clone();
    let results: Vec<_> = grid.par_iter().map(|mu1| seed_for(ctx, mu1)).collect();
    let mut lines = Vec::new();
    let mut errors = Vec::new();
    for (i, (mu1, r)) in grid.iter().zip(results).enumerate() {
        lines.push(format!("mu1[{i}]: {}", vector(mu1)));
        match r {
            Ok((p, s)) => {
                lines.push(format!("  slice_dim: {}", p.slice.dim_u));
                lines.push(format!("  v0: {}", vector(p.slice.v0.as_slice())));
                lines.push(format!("  u0: {}", vector(s.u.as_slice())));
                lines.push(format!("  mu2_0: {}", vector(s.fam.mu2.0.as_slice())));
                lines.push(format!("  det_delta: {}", num(s.delta.det)));
                lines.push(format!("  equilibrated_det_delta: {}", num(s.delta.equilibrated_det)));
                lines.push(format!("  newton_iterations: {}", s.iterations));
                lines.push(format!("  residual: {}", num(s.residual)));
                lines.push(format!("  zeta0: {}", vector(s.zeta0.0.as_slice())));
                lines.push(format!("  torus_residual_zeta0: {}", num(p.sys.algebra().torus_residual(&s.zeta0))));
                lines.push(format!("  det_a: {}", num(s.ls.det_a)));
            }
            Err(e) => {
                lines.push(format!("  error: {}: {e}", e.name()));
                errors.push(e);
            }
        }
    }
    let s = ctx.report.section("seed");
    for l in lines {
        s.line(l);
    }
    for e in errors {
        ctx.numeric("seed", &e);
    }
}

struct BranchRun {
    branch: Branch,
    verification: BranchVerification,
    root_k0_generator: f64,
    min_k0_ratio: f64,
    torus_annihilation: f64,
    coadjoint_invariance: f64,
}

fn run_branch(ctx: &Ctx, mu1: &[f64]) -> Result<BranchRun, Error> {
    let (p, seed) = seed_for(ctx, mu1)?;
    let branch = continue_branch(&p.blowup(), &seed, ctx.bif.tau_max, ctx.bif.n_steps)?;
    let verification = verify_branch(&p.sys, &branch, ctx.cfg.horizon(), 1, TOL_DYNAMIC)?;
    let root_k0_generator = if p.analysis.k0.is_empty() { 0.0 } else {
        p.analysis.k0.iter().map(|x| p.sys.generator(&AlgVector(x.clone()), &branch.points[0].q).norm()).fold(0.0, f64::max)
    };
    let min_k0_ratio = branch.points[1..]
        .iter()
        .map(|pt| min_k0_generator(&p.sys, &p.analysis, &pt.q) / pt.tau)
        .fold(f64::INFINITY, f64::min);
    let (torus, _) = p.sys.algebra().split_torus_complement();
    let mut torus_annihilation: f64 = 0.0;
    let mut coadjoint_invariance: f64 = 0.0;
    for pt in &branch.points {
        coadjoint_invariance = coadjoint_invariance.max(p.sys.algebra().coadjoint_ad_star(&pt.zeta, &pt.beta)?.0.amax());
        for t in &torus {
            let r = p.sys.algebra().coadjoint_ad_star(&AlgVector(t.clone()), &pt.beta)?;
            torus_annihilation = torus_annihilation.max(r.0.amax());
        }
    }
    Ok(BranchRun { branch, verification, root_k0_generator, min_k0_ratio, torus_annihilation, coadjoint_invariance })
}

fn csv_path(out: &Path, i: usize) -> PathBuf {
    out.join(format!("branch_mu1_{i}.csv"))
}

fn cmd_branch(ctx: &mut Ctx) -> std::io::Result<()> {
    let grid = ctx.bif.mu1_grid.clone();
    let runs: Vec<_> = grid.par_iter().map(|mu1| run_branch(ctx, mu1)).collect();
    let mut lines = vec![
        format!("tau_max: {}", num(ctx.bif.tau_max)),
        format!("n_steps: {}", ctx.bif.n_steps),
        format!("horizon: {}", num(ctx.cfg.horizon())),
    ];
    let mut errors = Vec::new();
    let mut verify_failed = false;
    let mut successes = Vec::new();
    for (i, (mu1, r)) in grid.iter().zip(runs).enumerate() {
        lines.push(format!("mu1[{i}]: {}", vector(mu1)));
        let path = csv_path(&ctx.out, i);
        match r {
            Ok(b) => {
                fs::write(&path, b.branch.to_csv())?;
                let v = &b.verification;
                let (max_f, max_g) = b.branch.points.iter().fold((0.0f64, 0.0f64), |(f, g), p| (f.max(p.res_f), g.max(p.res_g)));
                lines.push(format!("  file: {}", path.file_name().unwrap_or_default().to_string_lossy()));
                lines.push(format!("  points: {}", b.branch.points.len()));
                lines.push(format!("  halvings: {}", b.branch.halvings));
                lines.push(format!("  seed_u: {}", vector(b.branch.seed_u.as_slice())));
                lines.push(format!("  det_delta: {}", num(b.branch.delta_det)));
                lines.push(format!("  max_res_F: {}", num(max_f)));
                lines.push(format!("  max_res_G: {}", num(max_g)));
                lines.push(format!("  augmented_residual_at_root: {}", num(v.augmented_at_root)));
                lines.push(format!("  max_amended_residual: {}", num(v.max_amended)));
                if v.dynamic_available {
                    lines.push(format!("  max_dynamic_deviation: {}", num(v.max_dynamic)));
                    lines.push(format!("  dynamic_check: {}", pass(v.dynamic_passed)));
                } else {
                    lines.push("  dynamic_check: unavailable (no group action)".to_string());
                }
                lines.push(format!("  k0_generator_at_root: {}", num(b.root_k0_generator)));
                if b.branch.points.len() > 1 {
                    lines.push(format!("  min_k0_generator_over_tau: {}", num(b.min_k0_ratio)));
                }
                lines.push(format!("  torus_annihilation_of_beta: {}", num(b.torus_annihilation)));
                lines.push(format!("  coadjoint_invariance_of_beta: {}", num(b.coadjoint_invariance)));
                if v.dynamic_available && !v.dynamic_passed {
                    verify_failed = true;
                }
                successes.push(i);
            }
            Err(e) => {
                let _ = fs::remove_file(&path);
                lines.push(format!("  error: {}: {e}", e.name()));
                errors.push(e);
            }
        }
    }
    lines.push(format!("successful_branches: {}/{}", successes.len(), grid.len()));
    if let Some(&last) = successes.last() {
        lines.push(format!("largest_successful_mu1: {}", vector(&grid[last])));
    }
    let s = ctx.report.section("branch");
    for l in lines {
        s.line(l);
    }
    for e in errors {
        ctx.numeric("branch", &e);
    }
    if verify_failed {
        ctx.fail(Status::Verify);
    }
    Ok(())
}

/// Replaces the trailing stability column of every data row.
fn restamp(text: &str, classes: &[Stability]) -> String {
    let mut out = String::with_capacity(text.len());
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            out.push_str(line);
        } else {
            let cut = line.rfind(',').map_or(0, |k| k + 1);
            out.push_str(&line[..cut]);
            out.push_str(classes[i - 1].name());
        }
        out.push('\n');
    }
    out
}

/// Per-row classes and the Patrick check as (τ, class).
type StabilityRows = (Vec<Stability>, Option<(f64, Stability)>);

fn stability_for(ctx: &Ctx, mu1: &[f64], text: &str) -> Result<StabilityRows, Error> {
    let p = Problem::new(ctx.sys.clone(), ctx.bif.clone(), mu1)?;
    let b = p.blowup();
    let rows = parse_branch_csv(text)?;
    let tol = p.sys.numerics().tol_eig;
    let mut classes = Vec::with_capacity(rows.len());
    for r in &rows {
        let fam = p.fam.with_mu2(CoVector(r.mu2.clone()));
        classes.push(classify_definiteness(&hessian_f_u(&b, &fam, r.tau, &r.u)?, tol));
    }
    let mid = rows.len() / 2;
    let patrick = if rows.len() > 1 && rows[mid].tau > 0.0 {
        let r = &rows[mid];
        let fam = p.fam.with_mu2(CoVector(r.mu2.clone()));
        let q = p.sys.exp_qe(&(p.slice.sigma(&r.u) * r.tau))?;
        Some((r.tau, patrick_check(&p.sys, &q, &fam.beta(r.tau), tol)?.class))
    } else {
        None
    };
    Ok((classes, patrick))
}

fn cmd_stability(ctx: &mut Ctx) -> std::io::Result<()> {
    let grid = ctx.bif.mu1_grid.clone();
    if grid.iter().enumerate().any(|(i, _)| !csv_path(&ctx.out, i).exists()) && !ctx.report.sections.iter().any(|s| s.title == "branch") {
        cmd_branch(ctx)?;
    }
    let mut lines = Vec::new();
    let mut errors = Vec::new();
    if !ctx.sys.algebra().is_abelian() {
        lines.push("skipped: NonAbelian (second variation of F is only classified for abelian groups)".to_string());
    } else {
        let texts: Vec<Option<String>> = (0..grid.len()).map(|i| fs::read_to_string(csv_path(&ctx.out, i)).ok()).collect();
        let results: Vec<_> = grid
            .par_iter()
            .zip(texts.par_iter())
            .map(|(mu1, t)| t.as_ref().map(|t| stability_for(ctx, mu1, t)))
            .collect();
        for (i, (r, text)) in results.into_iter().zip(texts).enumerate() {
            lines.push(format!("mu1[{i}]: {}", vector(&grid[i])));
            match (r, text) {
                (None, _) | (_, None) => lines.push("  no branch file".to_string()),
                (Some(Ok((classes, patrick))), Some(text)) => {
                    let rows = parse_branch_csv(&text).map(|r| r.iter().map(|x| x.tau).collect::<Vec<_>>()).unwrap_or_default();
                    let rep = summarize(rows.iter().cloned().zip(classes.iter().cloned()));
                    fs::write(csv_path(&ctx.out, i), restamp(&text, &classes))?;
                    lines.push(format!("  root: {}", rep.root.name()));
                    lines.push(format!("  theorem_applicable: {}", rep.theorem_applicable));
                    lines.push(format!(
                        "  first_change_tau: {}",
                        rep.first_change_tau.map_or("none".to_string(), num)
                    ));
                    lines.push(format!("  small_tau_positive_definite: {}", rep.small_tau_positive));
                    if let Some((tau, class)) = patrick {
                        let idx = rows.iter().position(|t| *t == tau).unwrap_or(0);
                        lines.push(format!("  patrick_tau: {}", num(tau)));
                        lines.push(format!("  patrick_class: {}", class.name()));
                        lines.push(format!("  patrick_agrees: {}", class == classes[idx]));
                    }
                }
                (Some(Err(e)), _) => {
                    lines.push(format!("  error: {}: {e}", e.name()));
                    errors.push(e);
                }
            }
        }
    }
    let s = ctx.report.section("stability");
    for l in lines {
        s.line(l);
    }
    for e in errors {
        ctx.numeric("stability", &e);
    }
    Ok(())
}
