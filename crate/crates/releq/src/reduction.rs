//! Lyapunov-Schmidt data at q_e: the momentum rescaling β, the solvable
//! component η_μ, the bifurcation matrices A and B, the singular set Z_μ and
//! the velocity ζ(τ) extended smoothly through τ = 0.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{derivative, derivative_matrix, Deriv};
use crate::lie::{AlgVector, CoVector};
use crate::linalg::{self, equilibrated_det};
use crate::mechanics::ChartSystem;
use crate::splittings::SymmetryAnalysis;

/// Membership tolerance for the components of a [`BetaFamily`].
const TOL_MEMBER: f64 = 1e-10;
/// Probe parameter for the trivial-isotropy check along Exp(εv).
const ISOTROPY_PROBE: f64 = 0.05;

/// β(τ, μ) = Π₁μ + τΠ₂μ + τ²ϑ₁.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaFamily {
    pub mu1: CoVector,
    pub mu2: CoVector,
    pub theta1: CoVector,
}

impl BetaFamily {
    pub fn new(analysis: &SymmetryAnalysis, mu1: CoVector, mu2: CoVector, theta1: CoVector) -> Result<Self> {
        let d = analysis.dim_g();
        check_dim(d, mu1.dim())?;
        check_dim(d, mu2.dim())?;
        check_dim(d, theta1.dim())?;
        let checks = [
            ("mu1", &mu1, &analysis.m1),
            ("mu2", &mu2, &analysis.m2),
            ("theta1", &theta1, &analysis.m0),
        ];
        for (name, x, basis) in checks {
            let r = analysis.dual_residual(x, basis);
            if r > TOL_MEMBER * (1.0 + x.0.norm()) {
                return Err(Error::InvalidFamily(format!("{name} is not in its subspace (residual {r:e})")));
            }
        }
        if theta1.0.norm() == 0.0 {
            return Err(Error::InvalidFamily("theta1 must be nonzero".into()));
        }
        Ok(BetaFamily { mu1, mu2, theta1 })
    }

    /// Family with μ₁ = Π₁μ and μ₂ = Π₂μ.
    pub fn from_mu(analysis: &SymmetryAnalysis, mu: &CoVector, theta1: CoVector) -> Result<Self> {
        BetaFamily::new(analysis, analysis.pi1(mu), analysis.pi2(mu), theta1)
    }

    pub fn with_mu2(&self, mu2: CoVector) -> Self {
        BetaFamily { mu2, ..self.clone() }
    }

    pub fn mu(&self) -> CoVector {
        CoVector(&self.mu1.0 + &self.mu2.0)
    }

    pub fn beta(&self, tau: f64) -> CoVector {
        CoVector(&self.mu1.0 + &self.mu2.0 * tau + &self.theta1.0 * (tau * tau))
    }
}

/// Î(q_e)⁻¹Π₁μ, the k₁-component of the velocity at τ = 0.
pub fn eta_mu(analysis: &SymmetryAnalysis, fam: &BetaFamily) -> AlgVector {
    AlgVector(&analysis.ihat_inv * &fam.mu1.0)
}

/// First and second τ-derivatives of 𝕀(Exp_{q_e}(τv)) at τ = 0.
#[derive(Debug, Clone)]
pub struct InertiaJet {
    pub t: DMatrix<f64>,
    pub av: DMatrix<f64>,
}

pub fn inertia_jet(sys: &ChartSystem, v: &DVector<f64>) -> Result<InertiaJet> {
    let sch = sys.numerics().blowup;
    let path = |tau: f64| -> Result<DMatrix<f64>> { Ok(sys.locked_inertia(&sys.exp_qe(&(v * tau))?).0) };
    Ok(InertiaJet {
        t: derivative_matrix(path, Deriv::First, 0.0, &sch)?,
        av: derivative_matrix(path, Deriv::Second, 0.0, &sch)?,
    })
}

/// Residual of `v` off the g(q_e)-orthogonal complement of 𝔤·q_e.
pub fn orbit_normal_residual(sys: &ChartSystem, v: &DVector<f64>) -> f64 {
    let g = sys.metric().eval(sys.q_e());
    let e = sys.generator_matrix(sys.q_e());
    let cols: Vec<DVector<f64>> = (0..e.ncols()).map(|j| e.column(j).into_owned()).collect();
    let tangent = linalg::span_basis(&cols, &g, 1e-10);
    let vn = linalg::w_norm(&g, v);
    let mut r: f64 = 0.0;
    for t in &tangent {
        r = r.max(linalg::w_dot(&g, t, v).abs());
    }
    if vn > 0.0 {
        r / vn
    } else {
        0.0
    }
}

/// Checks that Exp_{q_e}(εv) is an asymmetric point for a small ε.
pub fn check_trivial_isotropy(sys: &ChartSystem, analysis: &SymmetryAnalysis, v: &DVector<f64>) -> Result<()> {
    let vn = v.norm();
    if vn == 0.0 {
        return Err(Error::TrivialIsotropyFailed);
    }
    let eps = ISOTROPY_PROBE / vn.max(1.0);
    let q = sys.exp_qe(&(v * eps))?;
    for x in &analysis.k0 {
        if sys.generator(&AlgVector(x.clone()), &q).norm() < 1e-6 * eps * vn {
            return Err(Error::TrivialIsotropyFailed);
        }
    }
    if !sys.locked_inertia(&q).is_invertible(sys.numerics().tol_rank) {
        return Err(Error::TrivialIsotropyFailed);
    }
    Ok(())
}

/// Bifurcation data for one direction v and one momentum family.
#[derive(Debug, Clone)]
pub struct LsData {
    pub v: DVector<f64>,
    pub jet: InertiaJet,
    pub eta_mu: AlgVector,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    /// Determinant of A after row equilibration.
    pub det_a: f64,
    pub in_z: bool,
    /// ξ₀ in k₀ when v is not in Z_μ.
    pub xi0: Option<AlgVector>,
}

impl LsData {
    /// ζ(0) = ξ₀ + η_μ.
    pub fn zeta0(&self) -> Result<AlgVector> {
        let xi0 = self.xi0.as_ref().ok_or(Error::InZMu(self.det_a))?;
        Ok(AlgVector(&xi0.0 + &self.eta_mu.0))
    }
}

/// Matrix A over the k₀ basis from a precomputed jet.
pub fn assemble_a_from(analysis: &SymmetryAnalysis, jet: &InertiaJet) -> DMatrix<f64> {
    let k0 = analysis.k0_matrix();
    let corr = &jet.t * &analysis.ihat_inv * &analysis.p_big * &jet.t;
    k0.transpose() * (&jet.av - corr * 2.0) * &k0
}

/// Vector B over the k₀ basis from a precomputed jet.
pub fn assemble_b_from(analysis: &SymmetryAnalysis, jet: &InertiaJet, fam: &BetaFamily) -> DVector<f64> {
    let k0 = analysis.k0_matrix();
    let hi = &analysis.ihat_inv;
    let eta = hi * &fam.mu1.0;
    let first = &jet.av * &eta;
    let second = &jet.t * hi * &analysis.p_big * &jet.t * &eta;
    let third = &jet.t * hi * &fam.mu2.0;
    k0.transpose() * (first - second * 2.0 + third * 2.0) - k0.transpose() * &fam.theta1.0 * 2.0
}

pub fn assemble_a(sys: &ChartSystem, analysis: &SymmetryAnalysis, v: &DVector<f64>) -> Result<DMatrix<f64>> {
    Ok(assemble_a_from(analysis, &inertia_jet(sys, v)?))
}

pub fn assemble_b(sys: &ChartSystem, analysis: &SymmetryAnalysis, v: &DVector<f64>, fam: &BetaFamily) -> Result<DVector<f64>> {
    Ok(assemble_b_from(analysis, &inertia_jet(sys, v)?, fam))
}

/// Solves Aα + B = 0 and returns ξ₀ = Σ α_a ξ_a.
pub fn solve_xi0(analysis: &SymmetryAnalysis, a: &DMatrix<f64>, b: &DVector<f64>, tol_z: f64) -> Result<AlgVector> {
    let det = equilibrated_det(a);
    if det.abs() <= tol_z {
        return Err(Error::InZMu(det));
    }
    let alpha = a.clone().lu().solve(&(-b)).ok_or(Error::InZMu(det))?;
    Ok(AlgVector(analysis.k0_matrix() * alpha))
}

pub fn ls_data(sys: &ChartSystem, analysis: &SymmetryAnalysis, fam: &BetaFamily, v: &DVector<f64>) -> Result<LsData> {
    check_dim(sys.n(), v.len())?;
    let r = orbit_normal_residual(sys, v);
    if r > 1e-8 {
        return Err(Error::NotInSlice(r));
    }
    let jet = inertia_jet(sys, v)?;
    let a = assemble_a_from(analysis, &jet);
    let b = assemble_b_from(analysis, &jet, fam);
    let det_a = equilibrated_det(&a);
    let in_z = det_a.abs() <= sys.numerics().tol_z;
    let xi0 = if in_z { None } else { Some(solve_xi0(analysis, &a, &b, sys.numerics().tol_z)?) };
    Ok(LsData { v: v.clone(), jet, eta_mu: eta_mu(analysis, fam), a, b, det_a, in_z, xi0 })
}

/// 𝕀(Exp_{q_e}(τv))⁻¹β(τ, μ).
pub fn zeta_direct(sys: &ChartSystem, fam: &BetaFamily, v: &DVector<f64>, tau: f64) -> Result<AlgVector> {
    zeta_at(sys, fam, &sys.exp_qe(&(v * tau))?, tau)
}

/// 𝕀(q)⁻¹β(τ, μ) at a given configuration.
pub fn zeta_at(sys: &ChartSystem, fam: &BetaFamily, q: &DVector<f64>, tau: f64) -> Result<AlgVector> {
    let i = sys.locked_inertia(q);
    if !i.is_invertible(sys.numerics().tol_rank) {
        let sv = i.0.singular_values();
        return Err(Error::SingularInertia(sv.min()));
    }
    i.solve(&fam.beta(tau)).ok_or(Error::SingularInertia(0.0))
}

/// Polynomial through (0, y0) and (t_i, y_i), evaluated at `t` (Neville).
pub(crate) fn neville(nodes: &[(f64, DVector<f64>)], t: f64) -> DVector<f64> {
    let xs: Vec<f64> = nodes.iter().map(|n| n.0).collect();
    let mut p: Vec<DVector<f64>> = nodes.iter().map(|n| n.1.clone()).collect();
    let m = p.len();
    for level in 1..m {
        for i in 0..m - level {
            let (xi, xj) = (xs[i], xs[i + level]);
            p[i] = (&p[i] * (xj - t) - &p[i + 1] * (xi - t)) / (xj - xi);
        }
    }
    p.swap_remove(0)
}

fn stencil(tau: f64, tau_s: f64) -> [f64; 3] {
    let s = if tau < 0.0 { -tau_s } else { tau_s };
    [0.25 * s, 0.5 * s, s]
}

/// ζ(τ) from precomputed LS data. For |τ| > τ_switch this is the direct
/// solve; below it the value interpolates between the analytic limit ζ(0)
/// and direct solves at τ_switch·{1/4, 1/2, 1}.
pub fn zeta_with(sys: &ChartSystem, fam: &BetaFamily, ls: &LsData, tau: f64) -> Result<AlgVector> {
    let tau_s = sys.numerics().tau_switch;
    if tau.abs() > tau_s {
        return zeta_direct(sys, fam, &ls.v, tau);
    }
    let z0 = ls.zeta0()?;
    if tau == 0.0 {
        return Ok(z0);
    }
    let mut nodes = vec![(0.0, z0.0)];
    for t in stencil(tau, tau_s) {
        nodes.push((t, zeta_direct(sys, fam, &ls.v, t)?.0));
    }
    Ok(AlgVector(neville(&nodes, tau)))
}

pub fn zeta(sys: &ChartSystem, analysis: &SymmetryAnalysis, fam: &BetaFamily, v: &DVector<f64>, tau: f64) -> Result<AlgVector> {
    check_trivial_isotropy(sys, analysis, v)?;
    if tau.abs() > sys.numerics().tau_switch {
        return zeta_direct(sys, fam, v, tau);
    }
    let ls = ls_data(sys, analysis, fam, v)?;
    zeta_with(sys, fam, &ls, tau)
}

/// Distance between the Richardson limit of the direct solves at
/// τ_switch·{1, 1/2, 1/4} and the analytic anchor ζ(0).
pub fn zeta_limit_mismatch(sys: &ChartSystem, fam: &BetaFamily, ls: &LsData) -> Result<f64> {
    let tau_s = sys.numerics().tau_switch;
    let mut nodes = Vec::new();
    for t in stencil(1.0, tau_s) {
        nodes.push((t, zeta_direct(sys, fam, &ls.v, t)?.0));
    }
    let limit = neville(&nodes, 0.0);
    Ok((limit - ls.zeta0()?.0).amax())
}

/// Pairings ⟨φ(τ), ξ_b⟩ over the k₀ basis, where φ(τ) is the k°-component
/// of 𝕀(Exp(τv))(ξ + η(τ)) − β(τ) and η(τ) ∈ k solves the Π-component.
pub fn phi_k0(sys: &ChartSystem, analysis: &SymmetryAnalysis, fam: &BetaFamily, v: &DVector<f64>, xi: &AlgVector, tau: f64) -> Result<DVector<f64>> {
    let d = analysis.dim_g();
    let mut kk = analysis.k1.clone();
    kk.extend(analysis.k2.iter().cloned());
    let km = linalg::columns(&kk, d);
    let i = sys.locked_inertia(&sys.exp_qe(&(v * tau))?).0;
    let beta = fam.beta(tau).0;
    let eta = if kk.is_empty() {
        DVector::zeros(d)
    } else {
        let small = km.transpose() * &i * &km;
        let rhs = km.transpose() * (&beta - &i * &xi.0);
        let c = small.lu().solve(&rhs).ok_or(Error::SingularInertia(0.0))?;
        &km * c
    };
    let resid = &i * (&xi.0 + eta) - beta;
    Ok(analysis.k0_matrix().transpose() * resid)
}

/// First and second τ-derivatives of [`phi_k0`] at τ = 0.
pub fn phi_k0_derivatives(sys: &ChartSystem, analysis: &SymmetryAnalysis, fam: &BetaFamily, v: &DVector<f64>, xi: &AlgVector) -> Result<(DVector<f64>, DVector<f64>)> {
    let sch = sys.numerics().blowup;
    let f = |t: f64| phi_k0(sys, analysis, fam, v, xi, t);
    Ok((derivative(f, Deriv::First, 0.0, &sch)?, derivative(f, Deriv::Second, 0.0, &sch)?))
}
