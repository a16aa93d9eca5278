//! Simple mechanical G-systems in one chart: generators, locked inertia,
//! momentum, augmented/amended potentials and identity validators.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};
use crate::geometry::{
    self, derivative_matrix, derivative_scalar, ChartPoint, ChartVector, Deriv, MetricField,
};
use crate::lie::{AlgVector, CoVector, LieAlgebraSpec};
use crate::numerics::Numerics;

type PotentialFn = dyn Fn(&ChartPoint) -> f64 + Send + Sync;
type GradientFn = dyn Fn(&ChartPoint) -> DVector<f64> + Send + Sync;
type GeneratorFn = dyn Fn(&AlgVector, &ChartPoint) -> ChartVector + Send + Sync;
type ActionFn = dyn Fn(&AlgVector, f64, &ChartPoint) -> ChartPoint + Send + Sync;
type DomainFn = dyn Fn(&ChartPoint) -> bool + Send + Sync;

/// Locked inertia tensor: `matrix[(a, b)] = ⟨𝕀 e_a, e_b⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct InertiaTensor(pub DMatrix<f64>);

impl InertiaTensor {
    pub fn apply(&self, x: &AlgVector) -> CoVector {
        CoVector(&self.0 * &x.0)
    }

    /// Whether the smallest singular value exceeds `tol_rank` times the largest.
    pub fn is_invertible(&self, tol_rank: f64) -> bool {
        let sv = self.0.singular_values();
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        smax > 0.0 && smin > tol_rank * smax
    }

    pub fn solve(&self, m: &CoVector) -> Option<AlgVector> {
        self.0.clone().lu().solve(&m.0).map(AlgVector)
    }
}

/// A simple mechanical system with symmetry, expressed in a chart around q_e.
///
/// Callbacks must be pure; the system is immutable once built and can be
/// shared across threads.
#[derive(Clone)]
pub struct ChartSystem {
    pub name: String,
    n: usize,
    metric: MetricField,
    potential: Arc<PotentialFn>,
    potential_gradient: Option<Arc<GradientFn>>,
    generators: Arc<GeneratorFn>,
    algebra: LieAlgebraSpec,
    q_e: ChartPoint,
    chart_radius: f64,
    group_action: Option<Arc<ActionFn>>,
    domain: Option<Arc<DomainFn>>,
    declared_isotropy: Option<Vec<DVector<f64>>>,
    numerics: Numerics,
}

impl std::fmt::Debug for ChartSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChartSystem")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("dim_g", &self.algebra.dim())
            .field("q_e", &self.q_e.as_slice())
            .field("chart_radius", &self.chart_radius)
            .finish()
    }
}

/// Builder for [`ChartSystem`]; `build` checks the construction invariants.
pub struct ChartSystemBuilder {
    sys: ChartSystem,
}

impl ChartSystemBuilder {
    pub fn potential_gradient(mut self, f: impl Fn(&ChartPoint) -> DVector<f64> + Send + Sync + 'static) -> Self {
        self.sys.potential_gradient = Some(Arc::new(f));
        self
    }

    /// Finite action of exp(t ξ) on chart points.
    pub fn group_action(
        mut self,
        f: impl Fn(&AlgVector, f64, &ChartPoint) -> ChartPoint + Send + Sync + 'static,
    ) -> Self {
        self.sys.group_action = Some(Arc::new(f));
        self
    }

    /// Validity region of the chart; the default is the ball of radius
    /// `chart_radius` about q_e.
    pub fn domain(mut self, f: impl Fn(&ChartPoint) -> bool + Send + Sync + 'static) -> Self {
        self.sys.domain = Some(Arc::new(f));
        self
    }

    /// Isotropy algebra of q_e as declared by the system author, used as a
    /// cross-check of the numerical kernel of 𝕀(q_e).
    pub fn declared_isotropy(mut self, basis: Vec<DVector<f64>>) -> Self {
        self.sys.declared_isotropy = Some(basis);
        self
    }

    pub fn numerics(mut self, numerics: Numerics) -> Self {
        self.sys.numerics = numerics;
        self
    }

    pub fn name(mut self, name: &str) -> Self {
        self.sys.name = name.to_string();
        self
    }

    pub fn build(self) -> Result<ChartSystem> {
        let sys = self.sys;
        sys.numerics.validate()?;
        sys.check_invariants()?;
        Ok(sys)
    }
}

impl ChartSystem {
    pub fn builder(
        metric: MetricField,
        potential: impl Fn(&ChartPoint) -> f64 + Send + Sync + 'static,
        generators: impl Fn(&AlgVector, &ChartPoint) -> ChartVector + Send + Sync + 'static,
        algebra: LieAlgebraSpec,
        q_e: ChartPoint,
        chart_radius: f64,
    ) -> ChartSystemBuilder {
        ChartSystemBuilder {
            sys: ChartSystem {
                name: "custom".into(),
                n: q_e.len(),
                metric,
                potential: Arc::new(potential),
                potential_gradient: None,
                generators: Arc::new(generators),
                algebra,
                q_e,
                chart_radius,
                group_action: None,
                domain: None,
                declared_isotropy: None,
                numerics: Numerics::default(),
            },
        }
    }

    /// Same system with different numerics (invariants are unaffected).
    pub fn with_numerics(&self, numerics: Numerics) -> Result<ChartSystem> {
        numerics.validate()?;
        let mut s = self.clone();
        s.numerics = numerics;
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn algebra(&self) -> &LieAlgebraSpec {
        &self.algebra
    }
    pub fn dim_g(&self) -> usize {
        self.algebra.dim()
    }
    pub fn q_e(&self) -> &ChartPoint {
        &self.q_e
    }
    pub fn chart_radius(&self) -> f64 {
        self.chart_radius
    }
    pub fn metric(&self) -> &MetricField {
        &self.metric
    }
    pub fn numerics(&self) -> &Numerics {
        &self.numerics
    }
    pub fn has_group_action(&self) -> bool {
        self.group_action.is_some()
    }
    pub fn declared_isotropy(&self) -> Option<&[DVector<f64>]> {
        self.declared_isotropy.as_deref()
    }

    pub fn inside(&self, q: &ChartPoint) -> bool {
        if !q.iter().all(|x| x.is_finite()) {
            return false;
        }
        match &self.domain {
            Some(d) => d(q),
            None => (q - &self.q_e).norm() < self.chart_radius,
        }
    }

    fn require_inside(&self, q: &ChartPoint) -> Result<()> {
        check_dim(self.n, q.len())?;
        if self.inside(q) {
            Ok(())
        } else {
            Err(Error::LeftChart(q.iter().cloned().collect()))
        }
    }

    pub fn potential(&self, q: &ChartPoint) -> f64 {
        (self.potential)(q)
    }

    pub fn potential_gradient(&self, q: &ChartPoint) -> Result<DVector<f64>> {
        match &self.potential_gradient {
            Some(g) => Ok(g(q)),
            None => geometry::gradient(|x| Ok((self.potential)(x)), q, &self.numerics.first),
        }
    }

    pub fn generator(&self, xi: &AlgVector, q: &ChartPoint) -> ChartVector {
        (self.generators)(xi, q)
    }

    /// exp(t ξ)·q, when the system supplies a group action.
    pub fn act(&self, xi: &AlgVector, t: f64, q: &ChartPoint) -> Option<ChartPoint> {
        self.group_action.as_ref().map(|f| f(xi, t, q))
    }

    /// Generators of the basis of 𝔤 at q, one column each.
    pub fn generator_matrix(&self, q: &ChartPoint) -> DMatrix<f64> {
        let d = self.dim_g();
        let mut m = DMatrix::zeros(self.n, d);
        for a in 0..d {
            m.set_column(a, &self.generator(&AlgVector::basis(d, a), q));
        }
        m
    }

    pub fn locked_inertia(&self, q: &ChartPoint) -> InertiaTensor {
        let e = self.generator_matrix(q);
        let g = self.metric.eval(q);
        let m = e.transpose() * g * &e;
        InertiaTensor((&m + m.transpose()) * 0.5)
    }

    pub fn momentum(&self, q: &ChartPoint, v: &ChartVector) -> CoVector {
        let e = self.generator_matrix(q);
        let g = self.metric.eval(q);
        CoVector(e.transpose() * (g * v))
    }

    pub fn exp_at(&self, q: &ChartPoint, v: &ChartVector) -> Result<ChartPoint> {
        self.require_inside(q)?;
        geometry::riemannian_exp(&self.metric, q, v, &self.numerics.exp_options(), &|x: &ChartPoint| self.inside(x))
    }

    /// Exp_{q_e}(v).
    pub fn exp_qe(&self, v: &ChartVector) -> Result<ChartPoint> {
        self.exp_at(&self.q_e, v)
    }

    pub fn augmented_potential(&self, xi: &AlgVector, q: &ChartPoint) -> f64 {
        let i = self.locked_inertia(q);
        self.potential(q) - 0.5 * i.apply(xi).pair(xi)
    }

    pub fn d_augmented(&self, xi: &AlgVector, q: &ChartPoint) -> Result<DVector<f64>> {
        check_dim(self.dim_g(), xi.dim())?;
        let inertia_part =
            geometry::gradient(|x| Ok(0.5 * self.locked_inertia(x).apply(xi).pair(xi)), q, &self.numerics.first)?;
        Ok(self.potential_gradient(q)? - inertia_part)
    }

    pub fn amended_potential(&self, mu: &CoVector, q: &ChartPoint) -> Result<f64> {
        check_dim(self.dim_g(), mu.dim())?;
        Ok(self.potential(q) + 0.5 * self.inverse_inertia_pairing(mu, q)?)
    }

    fn inverse_inertia_pairing(&self, mu: &CoVector, q: &ChartPoint) -> Result<f64> {
        let i = self.locked_inertia(q);
        if !i.is_invertible(self.numerics.tol_rank) {
            return Err(Error::SymmetricPoint(q.iter().cloned().collect()));
        }
        let x = i.solve(mu).ok_or_else(|| Error::SymmetricPoint(q.iter().cloned().collect()))?;
        Ok(mu.pair(&x))
    }

    pub fn d_amended(&self, mu: &CoVector, q: &ChartPoint) -> Result<DVector<f64>> {
        check_dim(self.dim_g(), mu.dim())?;
        self.inverse_inertia_pairing(mu, q)?;
        let part = geometry::gradient(|x| Ok(0.5 * self.inverse_inertia_pairing(mu, x)?), q, &self.numerics.first)?;
        Ok(self.potential_gradient(q)? + part)
    }

    /// Deterministic sample points in the inner half of the chart.
    fn sample_points(&self, count: usize, seed: u64) -> Vec<ChartPoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        let mut tries = 0;
        while out.len() < count && tries < 100 * count.max(1) {
            tries += 1;
            let d: DVector<f64> = DVector::from_fn(self.n, |_, _| rng.gen_range(-1.0..1.0));
            let r = 0.5 * self.chart_radius * rng.gen_range(0.05..1.0) / d.norm().max(1e-12_f64);
            let q = &self.q_e + d * r.min(0.5 * self.chart_radius);
            if self.inside(&q) {
                out.push(q);
            }
        }
        out
    }

    fn random_alg(&self, rng: &mut ChaCha8Rng) -> AlgVector {
        AlgVector(DVector::from_fn(self.dim_g(), |_, _| rng.gen_range(-1.0..1.0)))
    }

    fn check_invariants(&self) -> Result<()> {
        let n = self.n;
        let d = self.dim_g();
        if n == 0 {
            return Err(Error::InvalidSystem("chart dimension must be positive".into()));
        }
        if !(self.chart_radius > 0.0) {
            return Err(Error::InvalidSystem("chart_radius must be positive".into()));
        }
        if !self.inside(&self.q_e) {
            return Err(Error::InvalidSystem("q_e is outside the chart domain".into()));
        }
        if let Some(iso) = &self.declared_isotropy {
            for b in iso {
                check_dim(d, b.len())?;
            }
        }
        let tol = self.numerics.tol_inv;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut points = vec![self.q_e.clone()];
        points.extend(self.sample_points(6, 0xc0ffee));
        for q in &points {
            let g = self.metric.eval(q);
            check_dim(n, g.nrows())?;
            check_dim(n, g.ncols())?;
            if (&g - g.transpose()).amax() > 1e-12 * (1.0 + g.amax()) {
                return Err(Error::InvalidSystem(format!("metric not symmetric at {:?}", q.as_slice())));
            }
            if g.clone().cholesky().is_none() {
                return Err(Error::MetricDegenerate(q.iter().cloned().collect()));
            }
            let xi = self.random_alg(&mut rng);
            let eta = self.random_alg(&mut rng);
            let lhs = self.generator(&xi, q) + self.generator(&eta, q);
            let rhs = self.generator(&AlgVector(&xi.0 + &eta.0), q);
            check_dim(n, rhs.len())?;
            if (&lhs - &rhs).amax() > 1e-10 * (1.0 + rhs.amax()) {
                return Err(Error::InvalidSystem("generators are not linear in the algebra argument".into()));
            }
            let xq = self.generator(&xi, q);
            let dv = derivative_scalar(|t| Ok(self.potential(&(q + &xq * t))), Deriv::First, q.norm(), &self.numerics.first)?;
            if dv.abs() > tol * (1.0 + xq.norm()) {
                return Err(Error::InvalidSystem(format!("potential is not invariant along generators (dV(ξ_Q) = {dv:e})")));
            }
            let lie = self.metric_lie_derivative(&xi, q)?;
            if lie > tol * (1.0 + g.amax()) {
                return Err(Error::InvalidSystem(format!("metric is not invariant along generators (residual {lie:e})")));
            }
        }
        Ok(())
    }

    /// max |(L_X g)_ij| for X = ξ_Q.
    fn metric_lie_derivative(&self, xi: &AlgVector, q: &ChartPoint) -> Result<f64> {
        let sch = self.numerics.first;
        let x = self.generator(xi, q);
        let g = self.metric.eval(q);
        let dg = self.metric.derivatives(q, &sch)?;
        let mut lg = DMatrix::zeros(self.n, self.n);
        for k in 0..self.n {
            lg += &dg[k] * x[k];
        }
        let dx = geometry::jacobian(|y| Ok(self.generator(xi, y)), q, &sch)?;
        // dx[(k, i)] = ∂_i X^k
        lg += dx.transpose() * &g + &g * &dx;
        Ok(lg.amax())
    }

    /// Checks the locked-inertia identities on `samples` random draws.
    pub fn verify_identities(&self, samples: usize, seed: u64) -> Result<IdentityReport> {
        let alg = &self.algebra;
        let sch = self.numerics.first;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = self.sample_points(samples, seed ^ 0xa5a5);
        let mut rep = IdentityReport {
            samples: points.len(),
            useful_identity: 0.0,
            infinitesimal_equivariance: 0.0,
            finite_equivariance: None,
        };
        for q in &points {
            let xi = self.random_alg(&mut rng);
            let eta = self.random_alg(&mut rng);
            let zeta = self.random_alg(&mut rng);
            let i_q = self.locked_inertia(q);
            // (i) d⟨𝕀(·)ξ,η⟩(q)(ζ_Q(q)) = ⟨𝕀[ξ,ζ],η⟩ + ⟨𝕀ξ,[η,ζ]⟩
            let zq = self.generator(&zeta, q);
            let lhs = derivative_scalar(
                |t| Ok(self.locked_inertia(&(q + &zq * t)).apply(&xi).pair(&eta)),
                Deriv::First,
                q.norm(),
                &sch,
            )?;
            let rhs = i_q.apply(&alg.bracket(&xi, &zeta)?).pair(&eta) + i_q.apply(&xi).pair(&alg.bracket(&eta, &zeta)?);
            rep.useful_identity = rep.useful_identity.max((lhs - rhs).abs());
            // (ii) T_q𝕀(ξ_Q(q)) = −ad*_ξ∘𝕀(q) − 𝕀(q)∘ad_ξ
            let xq = self.generator(&xi, q);
            let t_i = derivative_matrix(|t| Ok(self.locked_inertia(&(q + &xq * t)).0), Deriv::First, q.norm(), &sch)?;
            let ad = alg.ad_matrix(&xi);
            let rhs = -(ad.transpose() * &i_q.0) - &i_q.0 * &ad;
            rep.infinitesimal_equivariance = rep.infinitesimal_equivariance.max((t_i - rhs).amax());
        }
        // (iii) 𝕀(exp(tξ)·q) = Ad*_{exp(-tξ)} 𝕀(q) Ad_{exp(-tξ)}
        if self.group_action.is_some() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(17));
            let mut worst: f64 = 0.0;
            for q in &points {
                let xi = self.random_alg(&mut rng);
                let t = rng.gen_range(-1.0..1.0);
                let moved = self.act(&xi, t, q).expect("group action present");
                let m = alg.ad_exp(&xi, -t);
                let rhs = m.transpose() * self.locked_inertia(q).0 * &m;
                worst = worst.max((self.locked_inertia(&moved).0 - rhs).amax());
            }
            rep.finite_equivariance = Some(worst);
        }
        Ok(rep)
    }

    /// Largest deviation between the Euler-Lagrange trajectory from
    /// (q, ξ_Q(q)) and the group orbit t ↦ exp(tξ)·q at 16 checkpoints.
    pub fn dynamic_deviation(&self, q: &ChartPoint, xi: &AlgVector, horizon: f64) -> Result<f64> {
        self.require_inside(q)?;
        check_dim(self.dim_g(), xi.dim())?;
        if self.group_action.is_none() {
            return Err(Error::InvalidSystem("dynamic verification needs a group action".into()));
        }
        const CHECKPOINTS: usize = 16;
        let seg = horizon / CHECKPOINTS as f64;
        let sub = ((seg.abs() / 5e-3).ceil() as usize).max(1);
        let dt = seg / sub as f64;
        let sch = self.numerics.first;
        let accel = |x: &ChartPoint, v: &ChartVector| -> Result<DVector<f64>> {
            let geo = geometry::geodesic_accel(&self.metric, x, v, &sch)?;
            let g = self.metric.eval(x);
            let force = g.cholesky().ok_or_else(|| Error::MetricDegenerate(x.iter().cloned().collect()))?.solve(&self.potential_gradient(x)?);
            Ok(geo - force)
        };
        let mut x = q.clone();
        let mut v = self.generator(xi, q);
        let mut worst: f64 = 0.0;
        for c in 1..=CHECKPOINTS {
            for _ in 0..sub {
                let k1x = v.clone();
                let k1v = accel(&x, &v)?;
                let x2 = &x + &k1x * (0.5 * dt);
                let v2 = &v + &k1v * (0.5 * dt);
                let k2v = accel(&x2, &v2)?;
                let x3 = &x + &v2 * (0.5 * dt);
                let v3 = &v + &k2v * (0.5 * dt);
                let k3v = accel(&x3, &v3)?;
                let x4 = &x + &v3 * dt;
                let v4 = &v + &k3v * dt;
                let k4v = accel(&x4, &v4)?;
                x += (k1x + &v2 * 2.0 + &v3 * 2.0 + &v4) * (dt / 6.0);
                v += (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (dt / 6.0);
                self.require_inside(&x)?;
            }
            let target = self.act(xi, seg * c as f64, q).expect("group action present");
            worst = worst.max((&x - target).amax());
        }
        Ok(worst)
    }

    /// Whether (q, ξ_Q(q)) evolves as exp(tξ)·q within `tol` over `horizon`.
    pub fn dynamic_verify_releq(&self, q: &ChartPoint, xi: &AlgVector, horizon: f64, tol: f64) -> Result<bool> {
        Ok(self.dynamic_deviation(q, xi, horizon)? <= tol)
    }
}

/// Maximum residuals of the locked-inertia identities.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub samples: usize,
    pub useful_identity: f64,
    pub infinitesimal_equivariance: f64,
    pub finite_equivariance: Option<f64>,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.useful_identity.max(self.infinitesimal_equivariance).max(self.finite_equivariance.unwrap_or(0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotor(potential_ok: bool) -> Result<ChartSystem> {
        let rot = |xi: &AlgVector, q: &ChartPoint| DVector::from_vec(vec![-xi.0[0] * q[1], xi.0[0] * q[0]]);
        let b = if potential_ok {
            ChartSystem::builder(
                MetricField::constant(DMatrix::identity(2, 2)),
                |q: &ChartPoint| 0.5 * q.norm_squared(),
                rot,
                LieAlgebraSpec::abelian(1),
                DVector::from_vec(vec![1.0, 0.0]),
                5.0,
            )
        } else {
            ChartSystem::builder(
                MetricField::constant(DMatrix::identity(2, 2)),
                |q: &ChartPoint| q[0],
                rot,
                LieAlgebraSpec::abelian(1),
                DVector::from_vec(vec![1.0, 0.0]),
                5.0,
            )
        };
        b.potential_gradient(|q| q.clone())
            .group_action(|xi, t, q| {
                let (s, c) = (xi.0[0] * t).sin_cos();
                DVector::from_vec(vec![c * q[0] - s * q[1], s * q[0] + c * q[1]])
            })
            .build()
    }

    #[test]
    fn locked_inertia_and_momentum_of_rotor() {
        let s = rotor(true).unwrap();
        let q = DVector::from_vec(vec![0.3, 0.4]);
        assert!((s.locked_inertia(&q).0[(0, 0)] - 0.25).abs() < 1e-15);
        let v = DVector::from_vec(vec![1.0, 2.0]);
        // q × v
        assert!((s.momentum(&q, &v).0[0] - (0.3 * 2.0 - 0.4 * 1.0)).abs() < 1e-15);
    }

    #[test]
    fn amended_potential_matches_closed_form() {
        let s = rotor(true).unwrap();
        let q = DVector::from_vec(vec![1.5, 0.0]);
        let mu = CoVector(DVector::from_vec(vec![2.0]));
        let v = s.amended_potential(&mu, &q).unwrap();
        assert!((v - (0.5 * 2.25 + 0.5 * 4.0 / 2.25)).abs() < 1e-14);
        let g = s.d_amended(&mu, &q).unwrap();
        assert!((g[0] - (1.5 - 4.0 / 1.5f64.powi(3))).abs() < 1e-7);
        let xi = AlgVector(DVector::from_vec(vec![1.0]));
        // r = 1, ξ = 1 is a relative equilibrium: dV_ξ = r - ξ² r = 0
        let d = s.d_augmented(&xi, &DVector::from_vec(vec![1.0, 0.0])).unwrap();
        assert!(d.amax() < 1e-8);
    }

    #[test]
    fn amended_potential_rejects_symmetric_point() {
        let s = rotor(true).unwrap();
        let mu = CoVector(DVector::from_vec(vec![1.0]));
        assert!(matches!(s.amended_potential(&mu, &DVector::zeros(2)), Err(Error::SymmetricPoint(_))));
    }

    #[test]
    fn non_invariant_potential_is_rejected() {
        assert!(matches!(rotor(false), Err(Error::InvalidSystem(_))));
    }

    #[test]
    fn identities_hold_for_rotor() {
        let s = rotor(true).unwrap();
        let r = s.verify_identities(20, 7).unwrap();
        assert_eq!(r.samples, 20);
        assert!(r.max_residual() < 1e-8, "{r:?}");
        assert!(r.finite_equivariance.is_some());
    }

    #[test]
    fn dynamic_check_separates_releq_from_non_releq() {
        let s = rotor(true).unwrap();
        let q = DVector::from_vec(vec![1.0, 0.0]);
        let one = AlgVector(DVector::from_vec(vec![1.0]));
        let two = AlgVector(DVector::from_vec(vec![2.0]));
        assert!(s.dynamic_deviation(&q, &one, 10.0).unwrap() < 1e-8);
        assert!(!s.dynamic_verify_releq(&q, &two, 10.0, 1e-6).unwrap());
    }
}
