//! Formal stability along branches: second variation of F in the slice
//! (abelian groups) and the Patrick criterion on the amended potential.

use nalgebra::{DMatrix, DVector};

use crate::branch::{Blowup, Branch};
use crate::error::{Error, Result};
use crate::geometry::hessian;
use crate::lie::{AlgVector, CoVector};
use crate::linalg::{self, mgs, null_space};
use crate::mechanics::ChartSystem;
use crate::reduction::BetaFamily;

/// Number of grid points after the root at which stability must persist
/// when the root is positive definite.
pub const N_SMALL: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    PositiveDefinite,
    NegativeDefinite,
    Indefinite,
    Degenerate,
    NotComputed,
}

impl Stability {
    pub fn name(&self) -> &'static str {
        match self {
            Stability::PositiveDefinite => "PositiveDefinite",
            Stability::NegativeDefinite => "NegativeDefinite",
            Stability::Indefinite => "Indefinite",
            Stability::Degenerate => "Degenerate",
            Stability::NotComputed => "NotComputed",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [
            Stability::PositiveDefinite,
            Stability::NegativeDefinite,
            Stability::Indefinite,
            Stability::Degenerate,
            Stability::NotComputed,
        ]
        .into_iter()
        .find(|x| x.name() == s)
    }
}

/// Classification by eigenvalues with threshold `tol_eig · max|M_ij|`.
pub fn classify_definiteness(m: &DMatrix<f64>, tol_eig: f64) -> Stability {
    if m.nrows() == 0 {
        return Stability::Degenerate;
    }
    let sym = (m + m.transpose()) * 0.5;
    let tol = tol_eig * sym.amax();
    let ev = sym.symmetric_eigenvalues();
    let (lo, hi) = (ev.min(), ev.max());
    if lo > tol {
        Stability::PositiveDefinite
    } else if hi < -tol {
        Stability::NegativeDefinite
    } else if ev.iter().any(|l| l.abs() <= tol) {
        Stability::Degenerate
    } else {
        Stability::Indefinite
    }
}

/// Hessian of u ↦ F(τ, u, μ) in slice coordinates.
pub fn hessian_f_u(b: &Blowup, fam: &BetaFamily, tau: f64, u: &DVector<f64>) -> Result<DMatrix<f64>> {
    if b.dim_k2() != 0 {
        return Err(Error::NonAbelian);
    }
    hessian(|x| b.f(fam, tau, x), u, &b.sys.numerics().slice)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub root: Stability,
    /// The root is positive definite, which is the hypothesis for stability
    /// of the nearby branch.
    pub theorem_applicable: bool,
    /// First τ at which the classification differs from the root's.
    pub first_change_tau: Option<f64>,
    /// Whether the first [`N_SMALL`] points after the root are positive
    /// definite; only meaningful when `theorem_applicable`.
    pub small_tau_positive: bool,
}

pub fn branch_stability(b: &Blowup, branch: &mut Branch) -> Result<StabilityReport> {
    if b.dim_k2() != 0 {
        return Err(Error::NonAbelian);
    }
    let tol = b.sys.numerics().tol_eig;
    for p in branch.points.iter_mut() {
        let fam = BetaFamily { mu1: p.mu1.clone(), mu2: p.mu2.clone(), theta1: branch.seed_fam.theta1.clone() };
        p.stability = classify_definiteness(&hessian_f_u(b, &fam, p.tau, &p.u)?, tol);
    }
    Ok(summarize(branch.points.iter().map(|p| (p.tau, p.stability))))
}

pub fn summarize(classes: impl Iterator<Item = (f64, Stability)>) -> StabilityReport {
    let classes: Vec<(f64, Stability)> = classes.collect();
    let root = classes.first().map(|c| c.1).unwrap_or(Stability::NotComputed);
    let first_change_tau = classes.iter().find(|c| c.1 != root).map(|c| c.0);
    let small_tau_positive = classes.iter().skip(1).take(N_SMALL).all(|c| c.1 == Stability::PositiveDefinite);
    StabilityReport {
        root,
        theorem_applicable: root == Stability::PositiveDefinite,
        first_change_tau,
        small_tau_positive,
    }
}

#[derive(Debug, Clone)]
pub struct PatrickReport {
    /// Dimension of 𝔤_μ.
    pub dim_g_mu: usize,
    /// Restricted Hessian of V_μ on the complement of 𝔤_μ·q.
    pub hessian: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    pub class: Stability,
}

/// d²V_μ(q) on the g(q)-orthogonal complement of 𝔤_μ·q.
pub fn patrick_check(sys: &ChartSystem, q: &DVector<f64>, mu: &CoVector, tol_eig: f64) -> Result<PatrickReport> {
    let alg = sys.algebra();
    let d = alg.dim();
    if !sys.locked_inertia(q).is_invertible(sys.numerics().tol_rank) {
        return Err(Error::SymmetricPoint(q.iter().cloned().collect()));
    }
    let mut cols = DMatrix::zeros(d, d);
    for i in 0..d {
        cols.set_column(i, &alg.coadjoint_ad_star(&AlgVector::basis(d, i), mu)?.0);
    }
    let (g_mu, _) = null_space(&cols, sys.numerics().tol_rank);
    let g = sys.metric().eval(q);
    let orbit: Vec<DVector<f64>> = g_mu.iter().map(|x| sys.generator(&AlgVector(x.clone()), q)).collect();
    let fixed = mgs(&orbit, &g, 1e-10);
    let mut all = fixed.clone();
    for i in 0..sys.n() {
        all.push(DVector::from_fn(sys.n(), |k, _| if k == i { 1.0 } else { 0.0 }));
    }
    let comp: Vec<DVector<f64>> = mgs(&all, &g, 1e-8).into_iter().skip(fixed.len()).collect();
    let h = hessian(|x| sys.amended_potential(mu, x), q, &sys.numerics().second)?;
    let c = linalg::columns(&comp, sys.n());
    let restricted = c.transpose() * h * &c;
    let restricted = (&restricted + restricted.transpose()) * 0.5;
    let eigenvalues = restricted.symmetric_eigenvalues().iter().cloned().collect();
    Ok(PatrickReport { dim_g_mu: g_mu.len(), class: classify_definiteness(&restricted, tol_eig), hessian: restricted, eigenvalues })
}
