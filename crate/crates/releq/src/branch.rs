//! Slice chart, blown-up functions F₁, F, G₁, G, the Δ matrix, seed search
//! and continuation of relative-equilibrium branches in τ.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{derivative, derivative_scalar, gradient, hessian, jacobian, Deriv, DiffScheme};
use crate::lie::{AlgVector, CoVector};
use crate::linalg::{self, columns, equilibrated_det, mgs, w_dot, w_norm};
use crate::mechanics::ChartSystem;
use crate::reduction::{self, check_trivial_isotropy, ls_data, neville, zeta_direct, BetaFamily, LsData};
use crate::splittings::SymmetryAnalysis;
use crate::stability::Stability;

/// Cheap Jacobian used inside Newton iterations; the reported Δ uses the
/// slice scheme instead.
const NEWTON_JACOBIAN: DiffScheme = DiffScheme { step_rel: 1e-4, order: 2, richardson_levels: 0 };
const MAX_BACKTRACK: usize = 12;
const MAX_HALVINGS: u32 = 10;

#[derive(Debug, Clone)]
pub struct SliceChart {
    /// Base direction, unit length in g(q_e).
    pub v0: DVector<f64>,
    /// g(q_e)-orthonormal basis of the slice; `basis_u[0]` is `v0`.
    pub basis_u: Vec<DVector<f64>>,
    pub dim_u: usize,
    /// g(q_e)-orthonormal basis of 𝔤·q_e.
    pub group_tangent: Vec<DVector<f64>>,
    /// Linearized k₀-orbit directions at v0.
    pub orbit_tangent: Vec<DVector<f64>>,
    pub g_qe: DMatrix<f64>,
}

impl SliceChart {
    /// σ(u) = Σ u_i `basis_u[i]`.
    pub fn sigma(&self, u: &DVector<f64>) -> DVector<f64> {
        let mut v = DVector::zeros(self.v0.len());
        for (i, b) in self.basis_u.iter().enumerate() {
            v += b * u[i];
        }
        v
    }

    /// Smallest singular value of [linearized k₀-orbit at σ(u) | slice basis]
    /// in g(q_e)-orthonormal coordinates; zero when σ(u) is tangent to its
    /// own orbit or the slice degenerates.
    pub fn split_condition(&self, sys: &ChartSystem, analysis: &SymmetryAnalysis, u: &DVector<f64>) -> Result<f64> {
        let v = self.sigma(u);
        let vn = w_norm(&self.g_qe, &v);
        if vn == 0.0 {
            return Ok(0.0);
        }
        let mut cols = Vec::new();
        for t in linearized_orbit(sys, analysis, &v)? {
            cols.push(t / vn);
        }
        cols.extend(self.basis_u.iter().cloned());
        let l = self.g_qe.clone().cholesky().ok_or_else(|| Error::MetricDegenerate(vec![]))?.l();
        let m = l.transpose() * columns(&cols, self.v0.len());
        Ok(m.singular_values().min())
    }
}

/// d/dt ξ_Q(q_e + t v) at t = 0 for the k₀ basis.
fn linearized_orbit(sys: &ChartSystem, analysis: &SymmetryAnalysis, v: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
    let q_e = sys.q_e();
    let mut out = Vec::new();
    for x in &analysis.k0 {
        let xi = AlgVector(x.clone());
        out.push(derivative(|t| Ok(sys.generator(&xi, &(q_e + v * t))), Deriv::First, 0.0, &sys.numerics().first)?);
    }
    Ok(out)
}

pub fn make_slice(sys: &ChartSystem, analysis: &SymmetryAnalysis, fam: &BetaFamily, v0: &DVector<f64>) -> Result<SliceChart> {
    check_dim(sys.n(), v0.len())?;
    let g = sys.metric().eval(sys.q_e());
    let r = reduction::orbit_normal_residual(sys, v0);
    if r > 1e-8 {
        return Err(Error::NotInSlice(r));
    }
    let n0 = w_norm(&g, v0);
    if n0 == 0.0 {
        return Err(Error::TrivialIsotropyFailed);
    }
    let v0 = v0 / n0;
    check_trivial_isotropy(sys, analysis, &v0)?;
    let ls = ls_data(sys, analysis, fam, &v0)?;
    if ls.in_z {
        return Err(Error::InZMu(ls.det_a));
    }

    let e = sys.generator_matrix(sys.q_e());
    let gens: Vec<DVector<f64>> = (0..e.ncols()).map(|j| e.column(j).into_owned()).collect();
    let group_tangent = linalg::span_basis(&gens, &g, 1e-10);
    let orbit = linearized_orbit(sys, analysis, &v0)?;
    let mut stacked = group_tangent.clone();
    stacked.extend(orbit.iter().cloned());
    let fixed = mgs(&stacked, &g, 1e-8);
    let orbit_tangent: Vec<DVector<f64>> = fixed[group_tangent.len()..].to_vec();
    let mut all = fixed.clone();
    all.push(v0.clone());
    for i in 0..sys.n() {
        all.push(DVector::from_fn(sys.n(), |k, _| if k == i { 1.0 } else { 0.0 }));
    }
    let basis_u: Vec<DVector<f64>> = mgs(&all, &g, 1e-8).into_iter().skip(fixed.len()).collect();
    // v0 is orthogonal to everything before it, so it survives unchanged
    debug_assert!((&basis_u[0] - &v0).amax() < 1e-8);
    Ok(SliceChart { dim_u: basis_u.len(), v0, basis_u, group_tangent, orbit_tangent, g_qe: g })
}

/// Everything the blown-up functions need.
#[derive(Clone, Copy)]
pub struct Blowup<'a> {
    pub sys: &'a ChartSystem,
    pub analysis: &'a SymmetryAnalysis,
    pub slice: &'a SliceChart,
}

impl<'a> Blowup<'a> {
    pub fn new(sys: &'a ChartSystem, analysis: &'a SymmetryAnalysis, slice: &'a SliceChart) -> Self {
        Blowup { sys, analysis, slice }
    }

    fn tau_s(&self) -> f64 {
        self.sys.numerics().tau_switch
    }

    pub fn dim_k2(&self) -> usize {
        self.analysis.k2.len()
    }

    /// Number of unknowns (u, μ₂-coordinates).
    pub fn dim(&self) -> usize {
        self.slice.dim_u + self.dim_k2()
    }

    /// F₀(μ) = V(q_e) + ½⟨Π₁μ, Î(q_e)⁻¹Π₁μ⟩.
    pub fn f0(&self, fam: &BetaFamily) -> f64 {
        self.sys.potential(self.sys.q_e()) + 0.5 * fam.mu1.pair(&reduction::eta_mu(self.analysis, fam))
    }

    fn ls(&self, fam: &BetaFamily, u: &DVector<f64>) -> Result<LsData> {
        let ls = ls_data(self.sys, self.analysis, fam, &self.slice.sigma(u))?;
        if ls.in_z {
            return Err(Error::InZMu(ls.det_a));
        }
        Ok(ls)
    }

    /// ζ(τ, σ(u), μ).
    pub fn zeta(&self, fam: &BetaFamily, tau: f64, u: &DVector<f64>) -> Result<AlgVector> {
        if tau.abs() > self.tau_s() {
            return zeta_direct(self.sys, fam, &self.slice.sigma(u), tau);
        }
        let ls = self.ls(fam, u)?;
        reduction::zeta_with(self.sys, fam, &ls, tau)
    }

    pub fn f1(&self, fam: &BetaFamily, tau: f64, u: &DVector<f64>) -> Result<f64> {
        check_dim(self.slice.dim_u, u.len())?;
        if tau == 0.0 {
            return Ok(self.f0(fam));
        }
        let q = self.sys.exp_qe(&(self.slice.sigma(u) * tau))?;
        let z = if tau.abs() > self.tau_s() { reduction::zeta_at(self.sys, fam, &q, tau)? } else { self.zeta(fam, tau, u)? };
        Ok(self.sys.potential(&q) + 0.5 * fam.beta(tau).pair(&z))
    }

    fn f_direct(&self, fam: &BetaFamily, tau: f64, u: &DVector<f64>) -> Result<f64> {
        Ok((self.f1(fam, tau, u)? - self.f0(fam)) / (tau * tau))
    }

    /// F(0, u) = ½ ∂²F₁/∂τ² at τ = 0.
    fn f_at_zero(&self, fam: &BetaFamily, u: &DVector<f64>) -> Result<f64> {
        let sch = self.sys.numerics().blowup;
        Ok(0.5 * derivative_scalar(|t| self.f1(fam, t, u), Deriv::Second, 0.0, &sch)?)
    }

    /// F with F₁ = F₀ + τ²F. Below τ_switch the value is interpolated between
    /// F(0) and direct quotients at τ_switch·{1, 2, 4}.
    pub fn f(&self, fam: &BetaFamily, tau: f64, u: &DVector<f64>) -> Result<f64> {
        let ts = self.tau_s();
        if tau.abs() > ts {
            return self.f_direct(fam, tau, u);
        }
        let f0 = self.f_at_zero(fam, u)?;
        if tau == 0.0 {
            return Ok(f0);
        }
        let s = ts.copysign(tau);
        let mut nodes = vec![(0.0, DVector::from_element(1, f0))];
        for k in [1.0, 2.0, 4.0] {
            nodes.push((k * s, DVector::from_element(1, self.f_direct(fam, k * s, u)?)));
        }
        Ok(neville(&nodes, tau)[0])
    }

    /// ⟨G₁(τ, u), ς_i⟩ over the k₂ basis: derivative in s of
    /// V − ½⟨𝕀ζ, ζ⟩ at Exp(τσ(u) + s ς_Q(q_e)) with ζ = ζ(τ) frozen.
    pub fn g1(&self, fam: &BetaFamily, tau: f64, u: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.slice.dim_u, u.len())?;
        let d2 = self.dim_k2();
        if d2 == 0 {
            return Ok(DVector::zeros(0));
        }
        let z = self.zeta(fam, tau, u)?;
        let base = self.slice.sigma(u) * tau;
        let sch = self.sys.numerics().slice;
        let mut out = DVector::zeros(d2);
        for (i, k) in self.analysis.k2.iter().enumerate() {
            let w = self.sys.generator(&AlgVector(k.clone()), self.sys.q_e());
            out[i] = derivative_scalar(
                |s| {
                    let q = self.sys.exp_qe(&(&base + &w * s))?;
                    Ok(self.sys.potential(&q) - 0.5 * self.sys.locked_inertia(&q).apply(&z).pair(&z))
                },
                Deriv::First,
                0.0,
                &sch,
            )?;
        }
        Ok(out)
    }

    fn g_at_zero(&self, fam: &BetaFamily, u: &DVector<f64>) -> Result<DVector<f64>> {
        let sch = self.sys.numerics().blowup;
        derivative(|t| self.g1(fam, t, u), Deriv::First, 0.0, &sch)
    }

    /// G with G₁ = τG, interpolated below τ_switch like [`Blowup::f`].
    pub fn g(&self, fam: &BetaFamily, tau: f64, u: &DVector<f64>) -> Result<DVector<f64>> {
        if self.dim_k2() == 0 {
            return Ok(DVector::zeros(0));
        }
        let ts = self.tau_s();
        if tau.abs() > ts {
            return Ok(self.g1(fam, tau, u)? / tau);
        }
        let g0 = self.g_at_zero(fam, u)?;
        if tau == 0.0 {
            return Ok(g0);
        }
        let s = ts.copysign(tau);
        let mut nodes = vec![(0.0, g0)];
        for k in [1.0, 2.0, 4.0] {
            nodes.push((k * s, self.g1(fam, k * s, u)? / (k * s)));
        }
        Ok(neville(&nodes, tau))
    }

    /// Splits unknowns x = (u, c) with μ₂ = Σ c_i `m₂[i]`.
    pub fn unpack(&self, fam: &BetaFamily, x: &DVector<f64>) -> (DVector<f64>, BetaFamily) {
        let du = self.slice.dim_u;
        let u = x.rows(0, du).into_owned();
        let c = x.rows(du, self.dim_k2()).into_owned();
        let mu2 = if self.dim_k2() == 0 { DVector::zeros(self.analysis.dim_g()) } else { self.analysis.m2_matrix() * c };
        (u, fam.with_mu2(CoVector(mu2)))
    }

    pub fn pack(&self, u: &DVector<f64>, fam: &BetaFamily) -> DVector<f64> {
        let c = if self.dim_k2() == 0 {
            DVector::zeros(0)
        } else {
            // m₂ basis is orthonormal in the dual product
            self.analysis.m2_matrix().transpose() * &self.analysis.w_inv * &fam.mu2.0
        };
        let mut x = DVector::zeros(self.dim());
        x.rows_mut(0, u.len()).copy_from(u);
        x.rows_mut(u.len(), c.len()).copy_from(&c);
        x
    }

    /// (∂F/∂u, G) at (τ, u, μ₁ + μ₂).
    pub fn residual(&self, fam: &BetaFamily, tau: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        let (u, f) = self.unpack(fam, x);
        let sch = self.sys.numerics().slice;
        let df = gradient(|uu| self.f(&f, tau, uu), &u, &sch)?;
        let g = self.g(&f, tau, &u)?;
        let mut r = DVector::zeros(self.dim());
        r.rows_mut(0, df.len()).copy_from(&df);
        r.rows_mut(df.len(), g.len()).copy_from(&g);
        Ok(r)
    }

    /// Jacobian of [`Blowup::residual`] in x; the Hessian of F when k₂ is empty.
    fn residual_jacobian(&self, fam: &BetaFamily, tau: f64, x: &DVector<f64>, scheme: &DiffScheme) -> Result<DMatrix<f64>> {
        if self.dim_k2() == 0 {
            return hessian(|u| self.f(fam, tau, u), x, scheme);
        }
        jacobian(|y| self.residual(fam, tau, y), x, scheme)
    }

    fn residual_scale(&self, fam: &BetaFamily) -> f64 {
        self.f0(fam).abs().max(1.0)
    }

    /// Δ at τ = 0 with block diagnostics.
    pub fn delta(&self, fam: &BetaFamily, x: &DVector<f64>) -> Result<DeltaReport> {
        let sch = self.sys.numerics().slice;
        let m = self.residual_jacobian(fam, 0.0, x, &sch)?;
        let du = self.slice.dim_u;
        let uu = m.view((0, 0), (du, du)).into_owned();
        let asym = (&uu - uu.transpose()).amax();
        Ok(DeltaReport { det: m.determinant(), equilibrated_det: equilibrated_det(&m), matrix: m, uu_asymmetry: asym })
    }

    fn newton(&self, fam: &BetaFamily, tau: f64, x0: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>, usize)> {
        let nm = self.sys.numerics();
        let scale = self.residual_scale(fam);
        let tol = nm.tol_newton;
        let mut x = x0.clone();
        let mut r = self.residual(fam, tau, &x)?;
        let mut iters = 0;
        while r.amax() / scale > tol {
            if iters >= nm.max_newton_iter {
                return Err(Error::NewtonDiverged(format!("no convergence after {iters} iterations (residual {:e})", r.amax())));
            }
            iters += 1;
            let j = self.residual_jacobian(fam, tau, &x, &NEWTON_JACOBIAN)?;
            let dx = j.lu().solve(&(-&r)).ok_or_else(|| Error::NewtonDiverged("singular Jacobian".into()))?;
            let mut lambda = 1.0;
            let mut accepted = None;
            for _ in 0..MAX_BACKTRACK {
                let trial = &x + &dx * lambda;
                if let Ok(rt) = self.residual(fam, tau, &trial) {
                    if rt.amax() < r.amax() || rt.amax() / scale <= tol {
                        accepted = Some((trial, rt));
                        break;
                    }
                }
                lambda *= 0.5;
            }
            match accepted {
                Some((xt, rt)) => {
                    x = xt;
                    r = rt;
                }
                None => {
                    return Err(Error::NewtonDiverged(format!("line search failed at iteration {iters} (residual {:e})", r.amax())))
                }
            }
        }
        Ok((x, r, iters))
    }
}

#[derive(Debug, Clone)]
pub struct DeltaReport {
    pub matrix: DMatrix<f64>,
    pub det: f64,
    pub equilibrated_det: f64,
    /// max |∂²F/∂u_i∂u_j − ∂²F/∂u_j∂u_i|.
    pub uu_asymmetry: f64,
}

pub fn f1(b: &Blowup, fam: &BetaFamily, tau: f64, u: &DVector<f64>) -> Result<f64> {
    b.f1(fam, tau, u)
}
pub fn f(b: &Blowup, fam: &BetaFamily, tau: f64, u: &DVector<f64>) -> Result<f64> {
    b.f(fam, tau, u)
}
pub fn g1(b: &Blowup, fam: &BetaFamily, tau: f64, u: &DVector<f64>) -> Result<DVector<f64>> {
    b.g1(fam, tau, u)
}
pub fn g(b: &Blowup, fam: &BetaFamily, tau: f64, u: &DVector<f64>) -> Result<DVector<f64>> {
    b.g(fam, tau, u)
}
pub fn delta_matrix(b: &Blowup, fam: &BetaFamily, u: &DVector<f64>) -> Result<DeltaReport> {
    b.delta(fam, &b.pack(u, fam))
}

#[derive(Debug, Clone)]
pub struct Seed {
    pub u: DVector<f64>,
    /// Family with the solved μ₂.
    pub fam: BetaFamily,
    pub iterations: usize,
    pub residual: f64,
    pub delta: DeltaReport,
    pub ls: LsData,
    pub zeta0: AlgVector,
}

/// Newton search for a seed (u⁰, μ₂⁰) of the branch at τ = 0, starting from
/// `guess_u` and the μ₂ carried by `fam`.
pub fn find_seed(b: &Blowup, fam: &BetaFamily, guess_u: &DVector<f64>) -> Result<Seed> {
    check_dim(b.slice.dim_u, guess_u.len())?;
    let x0 = b.pack(guess_u, fam);
    let (x, r, iterations) = b.newton(fam, 0.0, &x0).map_err(|e| match e {
        Error::NewtonDiverged(_) => e,
        other => Error::NewtonDiverged(format!("{} during iteration", other.name())),
    })?;
    let (u, f) = b.unpack(fam, &x);
    let delta = b.delta(fam, &x)?;
    if delta.equilibrated_det.abs() <= b.sys.numerics().tol_z {
        return Err(Error::DeltaDegenerate(delta.det));
    }
    let ls = b.ls(&f, &u)?;
    let zeta0 = ls.zeta0()?;
    Ok(Seed { u, fam: f, iterations, residual: r.amax(), delta, ls, zeta0 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchPoint {
    pub tau: f64,
    pub u: DVector<f64>,
    pub mu1: CoVector,
    pub mu2: CoVector,
    pub q: DVector<f64>,
    pub zeta: AlgVector,
    pub beta: CoVector,
    pub res_f: f64,
    pub res_g: f64,
    pub stability: Stability,
    /// Slice splitting condition at σ(u); not serialized.
    pub split_cond: f64,
}

#[derive(Debug, Clone)]
pub struct Branch {
    pub points: Vec<BranchPoint>,
    pub seed_u: DVector<f64>,
    pub seed_fam: BetaFamily,
    pub delta_det: f64,
    pub tau_max: f64,
    pub n_steps: usize,
    /// Number of step halvings needed along the way.
    pub halvings: usize,
}

fn make_point(b: &Blowup, fam: &BetaFamily, tau: f64, x: &DVector<f64>, r: &DVector<f64>, zeta: AlgVector) -> Result<BranchPoint> {
    let (u, f) = b.unpack(fam, x);
    let q = b.sys.exp_qe(&(b.slice.sigma(&u) * tau))?;
    let du = b.slice.dim_u;
    let res_f = r.rows(0, du).amax();
    let res_g = if b.dim_k2() == 0 { 0.0 } else { r.rows(du, b.dim_k2()).amax() };
    let split_cond = b.slice.split_condition(b.sys, b.analysis, &u)?;
    Ok(BranchPoint {
        tau,
        u,
        mu1: f.mu1.clone(),
        mu2: f.mu2.clone(),
        q,
        zeta,
        beta: f.beta(tau),
        res_f,
        res_g,
        stability: Stability::NotComputed,
        split_cond,
    })
}

/// Norm of the k₀ generators at q, the smallest over the basis.
pub fn min_k0_generator(sys: &ChartSystem, analysis: &SymmetryAnalysis, q: &DVector<f64>) -> f64 {
    analysis
        .k0
        .iter()
        .map(|x| sys.generator(&AlgVector(x.clone()), q).norm())
        .fold(f64::INFINITY, f64::min)
}

pub fn continue_branch(b: &Blowup, seed: &Seed, tau_max: f64, n_steps: usize) -> Result<Branch> {
    if !(tau_max >= 0.0) || n_steps == 0 {
        return Err(Error::BadParams("tau_max must be nonnegative and n_steps positive".into()));
    }
    let fam = &seed.fam;
    let x_seed = b.pack(&seed.u, fam);
    let r0 = b.residual(fam, 0.0, &x_seed)?;
    let mut points = vec![make_point(b, fam, 0.0, &x_seed, &r0, seed.zeta0.clone())?];
    let mut branch = Branch {
        points: Vec::new(),
        seed_u: seed.u.clone(),
        seed_fam: fam.clone(),
        delta_det: seed.delta.det,
        tau_max,
        n_steps,
        halvings: 0,
    };
    if tau_max == 0.0 {
        branch.points = points;
        return Ok(branch);
    }
    let base = tau_max / n_steps as f64;
    let min_step = tau_max / f64::powi(2.0, MAX_HALVINGS as i32);
    let mut h = base;
    let mut hist: Vec<(f64, DVector<f64>)> = vec![(0.0, x_seed)];
    let mut tau = 0.0;
    let sys = b.sys;
    while tau < tau_max {
        let t_next = (tau + h).min(tau_max);
        let (t_prev, x_prev) = hist.last().unwrap().clone();
        let pred = if hist.len() >= 2 {
            let (t_pp, x_pp) = &hist[hist.len() - 2];
            &x_prev + (&x_prev - x_pp) * ((t_next - t_prev) / (t_prev - t_pp))
        } else {
            x_prev.clone()
        };
        match b.newton(fam, t_next, &pred) {
            Ok((x, r, _)) => {
                let (u, f) = b.unpack(fam, &x);
                let z = b.zeta(&f, t_next, &u)?;
                let p = make_point(b, fam, t_next, &x, &r, z)?;
                let scale = b.slice.sigma(&u).norm();
                if min_k0_generator(sys, b.analysis, &p.q) < 1e-6 * t_next * scale {
                    return Err(Error::TrivialIsotropyFailed);
                }
                points.push(p);
                hist.push((t_next, x));
                tau = t_next;
                h = (2.0 * h).min(base);
            }
            Err(e @ (Error::InZMu(_) | Error::TrivialIsotropyFailed)) => return Err(e),
            Err(_) => {
                h *= 0.5;
                branch.halvings += 1;
                if h < min_step {
                    return Err(Error::StepFailed(t_next));
                }
            }
        }
    }
    branch.points = points;
    Ok(branch)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchVerification {
    /// Amended-criterion residual per τ > 0 point, off 𝔱·q.
    pub amended: Vec<f64>,
    /// Dynamic deviation per checked τ > 0 point.
    pub dynamic: Vec<f64>,
    /// ‖dV_ζ(0)(q_e)‖ at the branch root.
    pub augmented_at_root: f64,
    pub max_amended: f64,
    pub max_dynamic: f64,
    pub dynamic_passed: bool,
    /// False when the system has no closed-form group action to compare with.
    pub dynamic_available: bool,
}

/// Checks every τ > 0 point with the amended criterion and, every
/// `dynamic_stride` points, with a direct simulation over `horizon`.
pub fn verify_branch(sys: &ChartSystem, branch: &Branch, horizon: f64, dynamic_stride: usize, tol: f64) -> Result<BranchVerification> {
    let mut amended = Vec::new();
    let mut dynamic = Vec::new();
    let mut root = 0.0;
    let (torus, _) = sys.algebra().split_torus_complement();
    let mut k = 0usize;
    for p in &branch.points {
        if p.tau == 0.0 {
            root = sys.d_augmented(&p.zeta, &p.q)?.norm();
            continue;
        }
        let grad = sys.d_amended(&p.beta, &p.q)?;
        let g = sys.metric().eval(&p.q);
        let gi = g.clone().cholesky().ok_or_else(|| Error::MetricDegenerate(p.q.iter().cloned().collect()))?;
        let mut vec = gi.solve(&grad);
        let tq: Vec<DVector<f64>> = torus.iter().map(|t| sys.generator(&AlgVector(t.clone()), &p.q)).collect();
        for t in mgs(&tq, &g, 1e-10) {
            let c = w_dot(&g, &t, &vec);
            vec -= t * c;
        }
        amended.push(w_norm(&g, &vec));
        if dynamic_stride > 0 && sys.has_group_action() && k.is_multiple_of(dynamic_stride) {
            dynamic.push(sys.dynamic_deviation(&p.q, &p.zeta, horizon)?);
        }
        k += 1;
    }
    let max_amended = amended.iter().cloned().fold(0.0, f64::max);
    let max_dynamic = dynamic.iter().cloned().fold(0.0, f64::max);
    Ok(BranchVerification {
        dynamic_available: sys.has_group_action(),
        dynamic_passed: max_dynamic <= tol, amended, dynamic, augmented_at_root: root, max_amended, max_dynamic })
}

/// CSV header for a branch with the given dimensions.
pub fn csv_header(dim_u: usize, dim_g: usize, n: usize) -> String {
    let mut cols = vec!["tau".to_string()];
    let mut push = |name: &str, k: usize| {
        for i in 0..k {
            cols.push(format!("{name}[{i}]"));
        }
    };
    push("u", dim_u);
    push("mu1", dim_g);
    push("mu2", dim_g);
    push("q", n);
    push("zeta", dim_g);
    push("beta", dim_g);
    cols.extend(["res_F", "res_G", "stability"].iter().map(|s| s.to_string()));
    cols.join(",")
}

impl Branch {
    pub fn to_csv(&self) -> String {
        let p0 = &self.points[0];
        let mut out = csv_header(p0.u.len(), p0.mu1.dim(), p0.q.len());
        out.push('\n');
        for p in &self.points {
            let mut fields = vec![format!("{:e}", p.tau)];
            for v in [&p.u, &p.mu1.0, &p.mu2.0, &p.q, &p.zeta.0, &p.beta.0] {
                fields.extend(v.iter().map(|x| format!("{x:e}")));
            }
            fields.push(format!("{:e}", p.res_f));
            fields.push(format!("{:e}", p.res_g));
            fields.push(p.stability.name().to_string());
            let _ = writeln!(out, "{}", fields.join(","));
        }
        out
    }
}

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub tau: f64,
    pub u: DVector<f64>,
    pub mu1: DVector<f64>,
    pub mu2: DVector<f64>,
    pub stability: Stability,
}

pub fn parse_branch_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or_else(|| Error::BadParams("empty branch CSV".into()))?.split(',').collect();
    let idx = |prefix: &str| -> Vec<usize> {
        header.iter().enumerate().filter(|(_, h)| h.starts_with(&format!("{prefix}["))).map(|(i, _)| i).collect()
    };
    let (iu, i1, i2) = (idx("u"), idx("mu1"), idx("mu2"));
    let ist = header.iter().position(|h| *h == "stability").ok_or_else(|| Error::BadParams("CSV lacks stability column".into()))?;
    let mut rows = Vec::new();
    for (ln, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != header.len() {
            return Err(Error::BadParams(format!("CSV line {} has {} fields, expected {}", ln + 2, f.len(), header.len())));
        }
        let num = |i: usize| -> Result<f64> {
            f[i].parse::<f64>().map_err(|_| Error::BadParams(format!("CSV line {}: bad number '{}'", ln + 2, f[i])))
        };
        let vec = |ix: &[usize]| -> Result<DVector<f64>> {
            Ok(DVector::from_vec(ix.iter().map(|&i| num(i)).collect::<Result<Vec<_>>>()?))
        };
        rows.push(CsvRow {
            tau: num(0)?,
            u: vec(&iu)?,
            mu1: vec(&i1)?,
            mu2: vec(&i2)?,
            stability: Stability::from_name(f[ist])
                .ok_or_else(|| Error::BadParams(format!("CSV line {}: unknown stability '{}'", ln + 2, f[ist])))?,
        });
    }
    Ok(rows)
}
