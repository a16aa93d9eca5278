//! Splittings of 𝔤 and 𝔤* at q_e, the projections Π, Π₁, Π₂, the restricted
//! inverse Î(q_e)⁻¹, and the hypothesis checks at q_e.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lie::{AlgVector, CoVector};
use crate::linalg::{self, columns, max_principal_angle, mgs, null_space, span_basis};
use crate::mechanics::{ChartSystem, InertiaTensor};

/// Threshold on the distance of ker 𝕀(q_e) from 𝔱.
const TOL_TORUS: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct SymmetryAnalysis {
    pub q_e: DVector<f64>,
    pub inertia: InertiaTensor,
    /// Invariant inner product on 𝔤 and its inverse (the dual product on 𝔤*).
    pub w: DMatrix<f64>,
    pub w_inv: DMatrix<f64>,
    /// `w`-orthonormal bases.
    pub k0: Vec<DVector<f64>>,
    pub k1: Vec<DVector<f64>>,
    pub k2: Vec<DVector<f64>>,
    /// `w_inv`-orthonormal bases, m_i = W k_i.
    pub m0: Vec<DVector<f64>>,
    pub m1: Vec<DVector<f64>>,
    pub m2: Vec<DVector<f64>>,
    /// Π: 𝔤* → m₁⊕m₂ along m₀.
    pub p_big: DMatrix<f64>,
    pub p1: DMatrix<f64>,
    pub p2: DMatrix<f64>,
    /// Î(q_e)⁻¹ extended by zero on m₀; maps into k = k₁⊕k₂.
    pub ihat_inv: DMatrix<f64>,
    /// Singular values of 𝕀(q_e), descending.
    pub singular_values: Vec<f64>,
    /// Ratio of the smallest retained to the largest discarded singular value
    /// (infinite when one side is empty).
    pub spectral_gap: f64,
}

impl SymmetryAnalysis {
    pub fn dim_g(&self) -> usize {
        self.w.nrows()
    }
    pub fn p(&self) -> usize {
        self.k0.len()
    }
    /// k₀ basis as columns.
    pub fn k0_matrix(&self) -> DMatrix<f64> {
        columns(&self.k0, self.dim_g())
    }
    pub fn k2_matrix(&self) -> DMatrix<f64> {
        columns(&self.k2, self.dim_g())
    }
    pub fn m2_matrix(&self) -> DMatrix<f64> {
        columns(&self.m2, self.dim_g())
    }
    pub fn m1_matrix(&self) -> DMatrix<f64> {
        columns(&self.m1, self.dim_g())
    }
    pub fn pi1(&self, mu: &CoVector) -> CoVector {
        CoVector(&self.p1 * &mu.0)
    }
    pub fn pi2(&self, mu: &CoVector) -> CoVector {
        CoVector(&self.p2 * &mu.0)
    }
    /// Projection residual of a covector off span(basis) in the dual product.
    pub fn dual_residual(&self, mu: &CoVector, basis: &[DVector<f64>]) -> f64 {
        linalg::projection_residual(&mu.0, basis, &self.w_inv)
    }
    /// Projection residual of an algebra vector off span(basis).
    pub fn primal_residual(&self, x: &AlgVector, basis: &[DVector<f64>]) -> f64 {
        linalg::projection_residual(&x.0, basis, &self.w)
    }
    /// Largest principal angle between m_i and 𝕀(q_e)k_i, for i = 1, 2.
    pub fn inertia_image_angles(&self) -> (f64, f64) {
        let img = |k: &[DVector<f64>]| {
            let v: Vec<DVector<f64>> = k.iter().map(|x| &self.inertia.0 * x).collect();
            span_basis(&v, &self.w_inv, 1e-8)
        };
        (
            max_principal_angle(&self.m1, &img(&self.k1), &self.w_inv),
            max_principal_angle(&self.m2, &img(&self.k2), &self.w_inv),
        )
    }
}

pub fn analyze_symmetry(sys: &ChartSystem) -> Result<SymmetryAnalysis> {
    let alg = sys.algebra();
    let d = alg.dim();
    let w = alg.inner_product().clone();
    let w_inv = w.clone().try_inverse().ok_or_else(|| Error::InvalidAlgebra("inner product not invertible".into()))?;
    let tol_rank = sys.numerics().tol_rank;
    let inertia = sys.locked_inertia(sys.q_e());

    let (ker, sv) = null_space(&inertia.0, tol_rank);
    let mut sorted = sv.clone();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let smax = sorted.first().cloned().unwrap_or(0.0);
    let kept: Vec<f64> = sorted.iter().cloned().filter(|s| smax > 0.0 && *s > tol_rank * smax).collect();
    let dropped: Vec<f64> = sorted.iter().cloned().filter(|s| !(smax > 0.0 && *s > tol_rank * smax)).collect();
    let spectral_gap = match (kept.last(), dropped.first()) {
        (Some(k), Some(dr)) if *dr > 0.0 => k / dr,
        _ => f64::INFINITY,
    };

    let k0 = span_basis(&ker, &w, tol_rank);
    let (torus, k2) = alg.split_torus_complement();
    for x in &k0 {
        let r = linalg::projection_residual(x, &torus, &w);
        if r > TOL_TORUS {
            return Err(Error::IsotropyNotInTorus(r));
        }
    }
    let mut stacked = k0.clone();
    stacked.extend(torus.iter().cloned());
    let k1: Vec<DVector<f64>> = mgs(&stacked, &w, 1e-8).into_iter().skip(k0.len()).collect();
    if k0.len() + k1.len() + k2.len() != d {
        return Err(Error::InvalidAlgebra(format!(
            "splitting dimensions {}+{}+{} do not add up to {d}",
            k0.len(),
            k1.len(),
            k2.len()
        )));
    }

    let to_dual = |k: &[DVector<f64>]| k.iter().map(|x| &w * x).collect::<Vec<_>>();
    let (m0, m1, m2) = (to_dual(&k0), to_dual(&k1), to_dual(&k2));

    let proj = |k: &[DVector<f64>]| {
        let km = columns(k, d);
        &w * &km * km.transpose()
    };
    let mut kk = k1.clone();
    kk.extend(k2.iter().cloned());
    let p_big = proj(&kk);
    let p1 = proj(&k1);
    let p2 = proj(&k2);

    let ihat_inv = if kk.is_empty() {
        DMatrix::zeros(d, d)
    } else {
        let km = columns(&kk, d);
        let small = km.transpose() * &inertia.0 * &km;
        let inv = small.try_inverse().ok_or(Error::SingularInertia(0.0))?;
        &km * inv * km.transpose()
    };

    Ok(SymmetryAnalysis {
        q_e: sys.q_e().clone(),
        inertia,
        w,
        w_inv,
        k0,
        k1,
        k2,
        m0,
        m1,
        m2,
        p_big,
        p1,
        p2,
        ihat_inv,
        singular_values: sorted,
        spectral_gap,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    /// ‖d V_ξ(q_e)‖ per tested ξ (torus basis first, then random combinations).
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub passed: bool,
}

/// Checks that q_e is a relative equilibrium for every velocity in 𝔱.
pub fn check_hypothesis_h(sys: &ChartSystem, analysis: &SymmetryAnalysis) -> Result<HypothesisReport> {
    let alg = sys.algebra();
    let (torus, _) = alg.split_torus_complement();
    let mut dirs: Vec<DVector<f64>> = torus.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(0x4848);
    for _ in 0..3 {
        let mut x = DVector::zeros(alg.dim());
        for t in &torus {
            x += t * rng.gen_range(-1.0..1.0);
        }
        dirs.push(x);
    }
    let mut residuals = Vec::with_capacity(dirs.len());
    for x in dirs {
        residuals.push(sys.d_augmented(&AlgVector(x), &analysis.q_e)?.norm());
    }
    let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
    Ok(HypothesisReport { passed: max_residual <= sys.numerics().tol_h, residuals, max_residual })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MontaldiReport {
    /// ‖dV(q_e)‖.
    pub potential_gradient: f64,
    /// max |⟨𝕀(q_e)ξ, κ⟩| over ξ in the 𝔱 basis and κ in the k₂ basis.
    pub torus_cross: f64,
    pub passed: bool,
}

pub fn check_montaldi(sys: &ChartSystem, analysis: &SymmetryAnalysis) -> Result<MontaldiReport> {
    let grad = sys.potential_gradient(&analysis.q_e)?.norm();
    let (torus, _) = sys.algebra().split_torus_complement();
    let mut cross: f64 = 0.0;
    for t in &torus {
        let it = &analysis.inertia.0 * t;
        for k in &analysis.k2 {
            cross = cross.max(it.dot(k).abs());
        }
    }
    let tol = sys.numerics().tol_h;
    Ok(MontaldiReport { potential_gradient: grad, torus_cross: cross, passed: grad <= tol && cross <= tol })
}

/// Largest principal angle between the numerical kernel of 𝕀(q_e) and the
/// declared isotropy algebra, if one was declared.
pub fn declared_isotropy_angle(sys: &ChartSystem, analysis: &SymmetryAnalysis) -> Option<f64> {
    sys.declared_isotropy().map(|decl| {
        let b = span_basis(decl, &analysis.w, sys.numerics().tol_rank);
        max_principal_angle(&analysis.k0, &b, &analysis.w)
    })
}

/// Largest principal angle between m₀ and its image under Ad* of exp(t ξ),
/// ξ in k₀, over a few fixed t.
pub fn m0_invariance(sys: &ChartSystem, analysis: &SymmetryAnalysis) -> f64 {
    let alg = sys.algebra();
    let mut worst: f64 = 0.0;
    for x in &analysis.k0 {
        for t in [0.3, 1.1, -2.0] {
            let m = alg.ad_exp(&AlgVector(x.clone()), -t).transpose();
            let moved: Vec<DVector<f64>> = analysis.m0.iter().map(|v| &m * v).collect();
            let moved = span_basis(&moved, &analysis.w_inv, 1e-10);
            worst = worst.max(max_principal_angle(&analysis.m0, &moved, &analysis.w_inv));
        }
    }
    worst
}
