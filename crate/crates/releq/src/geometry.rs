//! Single-chart Riemannian geometry and the finite-difference engine.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Point of the chart (coordinates).
pub type ChartPoint = DVector<f64>;
/// Tangent vector in chart coordinates; its base point is carried by context.
pub type ChartVector = DVector<f64>;

/// Central-difference scheme with Richardson extrapolation over step sizes
/// h, 2h, ..., 2^levels h where h = step_rel * max(1, scale).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffScheme {
    pub step_rel: f64,
    pub order: u8,
    pub richardson_levels: usize,
}

impl DiffScheme {
    pub fn new(step_rel: f64, order: u8, richardson_levels: usize) -> Result<Self> {
        let s = DiffScheme { step_rel, order, richardson_levels };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_rel > 0.0 && self.step_rel.is_finite()) {
            return Err(Error::BadParams(format!("step_rel must be positive, got {}", self.step_rel)));
        }
        if self.order != 2 && self.order != 4 {
            return Err(Error::BadParams(format!("order must be 2 or 4, got {}", self.order)));
        }
        if self.richardson_levels > 8 {
            return Err(Error::BadParams("richardson_levels must be at most 8".into()));
        }
        Ok(())
    }

    /// eps^(1/3) steps for first derivatives.
    pub fn first() -> Self {
        DiffScheme { step_rel: f64::EPSILON.cbrt(), order: 2, richardson_levels: 2 }
    }

    /// Steps for second derivatives.
    pub fn second() -> Self {
        DiffScheme { step_rel: 1e-3, order: 2, richardson_levels: 2 }
    }

    /// Steps for derivatives in tau at the symmetric point.
    pub fn blowup() -> Self {
        DiffScheme { step_rel: 1e-2, order: 2, richardson_levels: 3 }
    }

    /// Steps for derivatives in slice coordinates and momenta.
    pub fn slice() -> Self {
        DiffScheme { step_rel: 1e-3, order: 2, richardson_levels: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Deriv {
    First,
    Second,
}

fn check_finite(v: &DVector<f64>) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("finite-difference stencil"))
    }
}

/// Derivative at t = 0 of a vector-valued function of one real variable,
/// componentwise. `scale` is the magnitude of the underlying argument and
/// sets the step through h = step_rel * max(1, scale).
pub fn derivative<F>(mut f: F, which: Deriv, scale: f64, scheme: &DiffScheme) -> Result<DVector<f64>>
where
    F: FnMut(f64) -> Result<DVector<f64>>,
{
    let h0 = scheme.step_rel * scale.abs().max(1.0);
    let needs_center = which == Deriv::Second;
    let f0 = if needs_center {
        let v = f(0.0)?;
        check_finite(&v)?;
        Some(v)
    } else {
        None
    };
    // steps double between levels, so nodes recur exactly
    let mut seen: Vec<(f64, DVector<f64>)> = Vec::new();
    let mut eval = |t: f64| -> Result<DVector<f64>> {
        if let Some((_, v)) = seen.iter().find(|(s, _)| *s == t) {
            return Ok(v.clone());
        }
        let v = f(t)?;
        check_finite(&v)?;
        seen.push((t, v.clone()));
        Ok(v)
    };
    let mut table: Vec<DVector<f64>> = Vec::with_capacity(scheme.richardson_levels + 1);
    for k in 0..=scheme.richardson_levels {
        let h = h0 * f64::powi(2.0, k as i32);
        let d = match (scheme.order, which) {
            (2, Deriv::First) => (eval(h)? - eval(-h)?) / (2.0 * h),
            (2, Deriv::Second) => {
                let c = f0.as_ref().unwrap();
                (eval(h)? - c * 2.0 + eval(-h)?) / (h * h)
            }
            (_, Deriv::First) => {
                let (p1, m1, p2, m2) = (eval(h)?, eval(-h)?, eval(2.0 * h)?, eval(-2.0 * h)?);
                ((p1 - m1) * 8.0 - p2 + m2) / (12.0 * h)
            }
            (_, Deriv::Second) => {
                let c = f0.as_ref().unwrap();
                let (p1, m1, p2, m2) = (eval(h)?, eval(-h)?, eval(2.0 * h)?, eval(-2.0 * h)?);
                ((p1 + m1) * 16.0 - c * 30.0 - p2 - m2) / (12.0 * h * h)
            }
        };
        table.push(d);
    }
    // error expansion in even powers starting at h^order; neighbours differ
    // by a factor 2 in step
    let mut p = scheme.order as i32;
    while table.len() > 1 {
        let r = f64::powi(2.0, p);
        table = table.windows(2).map(|w| (&w[0] * r - &w[1]) / (r - 1.0)).collect();
        p += 2;
    }
    Ok(table.pop().unwrap())
}

/// Derivative at τ = 0 with the step scaled to an argument of size 0.
pub fn dir_derivative<F>(f: F, which: Deriv, scheme: &DiffScheme) -> Result<DVector<f64>>
where
    F: FnMut(f64) -> Result<DVector<f64>>,
{
    derivative(f, which, 0.0, scheme)
}

/// Scalar convenience wrapper around [`derivative`].
pub fn derivative_scalar<F>(mut f: F, which: Deriv, scale: f64, scheme: &DiffScheme) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    Ok(derivative(|t| Ok(DVector::from_element(1, f(t)?)), which, scale, scheme)?[0])
}

/// Matrix convenience wrapper around [`derivative`].
pub fn derivative_matrix<F>(mut f: F, which: Deriv, scale: f64, scheme: &DiffScheme) -> Result<DMatrix<f64>>
where
    F: FnMut(f64) -> Result<DMatrix<f64>>,
{
    let mut shape = (0, 0);
    let d = derivative(
        |t| {
            let m = f(t)?;
            shape = m.shape();
            Ok(DVector::from_column_slice(m.as_slice()))
        },
        which,
        scale,
        scheme,
    )?;
    Ok(DMatrix::from_column_slice(shape.0, shape.1, d.as_slice()))
}

/// Gradient of a scalar function of chart coordinates.
pub fn gradient<F>(f: F, x: &DVector<f64>, scheme: &DiffScheme) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> Result<f64>,
{
    let n = x.len();
    let scale = x.norm();
    let mut g = DVector::zeros(n);
    for i in 0..n {
        g[i] = derivative_scalar(
            |t| {
                let mut y = x.clone();
                y[i] += t;
                f(&y)
            },
            Deriv::First,
            scale,
            scheme,
        )?;
    }
    Ok(g)
}

/// Jacobian of a vector function: column j is the derivative along e_j.
pub fn jacobian<F>(f: F, x: &DVector<f64>, scheme: &DiffScheme) -> Result<DMatrix<f64>>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    let n = x.len();
    let scale = x.norm();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        cols.push(derivative(
            |t| {
                let mut y = x.clone();
                y[j] += t;
                f(&y)
            },
            Deriv::First,
            scale,
            scheme,
        )?);
    }
    let m = cols.first().map(|c| c.len()).unwrap_or(0);
    Ok(DMatrix::from_fn(m, n, |i, j| cols[j][i]))
}

/// Hessian from second directional derivatives along e_i and e_i + e_j;
/// symmetric by construction.
pub fn hessian<F>(f: F, x: &DVector<f64>, scheme: &DiffScheme) -> Result<DMatrix<f64>>
where
    F: Fn(&DVector<f64>) -> Result<f64>,
{
    let n = x.len();
    let scale = x.norm();
    let along = |d: &DVector<f64>| {
        derivative_scalar(|t| f(&(x + d * t)), Deriv::Second, scale, scheme)
    };
    let e = |i: usize| DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 });
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = along(&e(i))?;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let dij = along(&(e(i) + e(j)))?;
            let v = 0.5 * (dij - h[(i, i)] - h[(j, j)]);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    Ok(h)
}

type MetricFn = dyn Fn(&ChartPoint) -> DMatrix<f64> + Send + Sync;
type MetricDerivFn = dyn Fn(&ChartPoint) -> Vec<DMatrix<f64>> + Send + Sync;

/// Riemannian metric in the chart, with an optional analytic derivative
/// callback returning ∂_l g for l = 0..n.
#[derive(Clone)]
pub struct MetricField {
    eval: Arc<MetricFn>,
    deriv: Option<Arc<MetricDerivFn>>,
    flat: bool,
}

impl std::fmt::Debug for MetricField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MetricField").field("analytic_derivative", &self.deriv.is_some()).finish()
    }
}

impl MetricField {
    pub fn new(eval: impl Fn(&ChartPoint) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        MetricField { eval: Arc::new(eval), deriv: None, flat: false }
    }

    pub fn with_derivative(
        mut self,
        deriv: impl Fn(&ChartPoint) -> Vec<DMatrix<f64>> + Send + Sync + 'static,
    ) -> Self {
        self.deriv = Some(Arc::new(deriv));
        self
    }

    /// Constant metric.
    pub fn constant(g: DMatrix<f64>) -> Self {
        let n = g.nrows();
        let mut m = MetricField::new(move |_| g.clone()).with_derivative(move |_| vec![DMatrix::zeros(n, n); n]);
        m.flat = true;
        m
    }

    /// Whether the metric is constant in the chart, so geodesics are lines.
    pub fn is_flat(&self) -> bool {
        self.flat
    }

    pub fn eval(&self, q: &ChartPoint) -> DMatrix<f64> {
        (self.eval)(q)
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.deriv.is_some()
    }

    /// ∂_l g at q for every chart direction l.
    pub fn derivatives(&self, q: &ChartPoint, scheme: &DiffScheme) -> Result<Vec<DMatrix<f64>>> {
        if let Some(d) = &self.deriv {
            return Ok(d(q));
        }
        let scale = q.norm();
        (0..q.len())
            .map(|l| {
                derivative_matrix(
                    |t| {
                        let mut y = q.clone();
                        y[l] += t;
                        Ok((self.eval)(&y))
                    },
                    Deriv::First,
                    scale,
                    scheme,
                )
            })
            .collect()
    }
}

fn cholesky_at(metric: &MetricField, q: &ChartPoint) -> Result<(DMatrix<f64>, nalgebra::Cholesky<f64, nalgebra::Dyn>)> {
    let g = metric.eval(q);
    check_dim(q.len(), g.nrows())?;
    if !g.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("metric"));
    }
    let ch = g.clone().cholesky().ok_or_else(|| Error::MetricDegenerate(q.iter().cloned().collect()))?;
    Ok((g, ch))
}

/// Christoffel symbols of the second kind, `Γ[k][i][j]`.
#[derive(Debug, Clone)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.n + i) * self.n + j]
    }

    /// Γ^k_ij v^i w^j.
    pub fn contract(&self, v: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        DVector::from_fn(n, |k, _| {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += self.get(k, i, j) * v[i] * w[j];
                }
            }
            s
        })
    }
}

pub fn christoffel(metric: &MetricField, q: &ChartPoint, scheme: &DiffScheme) -> Result<Christoffel> {
    let n = q.len();
    let (_, ch) = cholesky_at(metric, q)?;
    let d = metric.derivatives(q, scheme)?;
    check_dim(n, d.len())?;
    let mut data = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            // first kind: Γ_{l,ij} = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
            let first = DVector::from_fn(n, |l, _| 0.5 * (d[i][(j, l)] + d[j][(i, l)] - d[l][(i, j)]));
            let second = ch.solve(&first);
            for k in 0..n {
                data[(k * n + i) * n + j] = second[k];
            }
        }
    }
    Ok(Christoffel { n, data })
}

/// Geodesic acceleration −Γ(v, v) at q.
pub fn geodesic_accel(metric: &MetricField, q: &ChartPoint, v: &ChartVector, scheme: &DiffScheme) -> Result<DVector<f64>> {
    let n = q.len();
    let (_, ch) = cholesky_at(metric, q)?;
    let d = metric.derivatives(q, scheme)?;
    let mut dv = DMatrix::zeros(n, n);
    for i in 0..n {
        dv += &d[i] * v[i];
    }
    let mut c = &dv * v;
    for l in 0..n {
        c[l] -= 0.5 * v.dot(&(&d[l] * v));
    }
    Ok(-ch.solve(&c))
}

/// Options for [`riemannian_exp`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpOptions {
    pub geo_steps: usize,
    pub tol_geo: f64,
    pub scheme: DiffScheme,
}

impl Default for ExpOptions {
    fn default() -> Self {
        ExpOptions { geo_steps: 64, tol_geo: 1e-10, scheme: DiffScheme::first() }
    }
}

/// Maximum number of step doublings before GeoTolerance is reported.
const MAX_REFINE: usize = 6;

fn rk4_geodesic<D>(
    metric: &MetricField,
    q: &ChartPoint,
    v: &ChartVector,
    t_final: f64,
    steps: usize,
    scheme: &DiffScheme,
    inside: &D,
    mut visit: impl FnMut(&ChartPoint, &ChartVector),
) -> Result<(ChartPoint, ChartVector)>
where
    D: Fn(&ChartPoint) -> bool + ?Sized,
{
    let dt = t_final / steps as f64;
    let mut x = q.clone();
    let mut p = v.clone();
    let acc = |x: &ChartPoint, p: &ChartVector| geodesic_accel(metric, x, p, scheme);
    for _ in 0..steps {
        let k1x = p.clone();
        let k1p = acc(&x, &p)?;
        let x2 = &x + &k1x * (0.5 * dt);
        let p2 = &p + &k1p * (0.5 * dt);
        let k2p = acc(&x2, &p2)?;
        let x3 = &x + &p2 * (0.5 * dt);
        let p3 = &p + &k2p * (0.5 * dt);
        let k3p = acc(&x3, &p3)?;
        let x4 = &x + &p3 * dt;
        let p4 = &p + &k3p * dt;
        let k4p = acc(&x4, &p4)?;
        x += (k1x + &p2 * 2.0 + &p3 * 2.0 + &p4) * (dt / 6.0);
        p += (k1p + k2p * 2.0 + k3p * 2.0 + k4p) * (dt / 6.0);
        if !x.iter().all(|c| c.is_finite()) || !p.iter().all(|c| c.is_finite()) {
            return Err(Error::NonFinite("geodesic integration"));
        }
        if !inside(&x) {
            return Err(Error::LeftChart(x.iter().cloned().collect()));
        }
        visit(&x, &p);
    }
    Ok((x, p))
}

/// Exp_q(v): the geodesic through q with initial velocity v at unit time.
/// RK4 with `geo_steps` substeps; the result is accepted when the
/// step-doubling estimate is below `tol_geo`, otherwise the step count is
/// doubled (a bounded number of times).
pub fn riemannian_exp<D>(
    metric: &MetricField,
    q: &ChartPoint,
    v: &ChartVector,
    opts: &ExpOptions,
    inside: &D,
) -> Result<ChartPoint>
where
    D: Fn(&ChartPoint) -> bool + ?Sized,
{
    check_dim(q.len(), v.len())?;
    if v.iter().all(|x| *x == 0.0) {
        return Ok(q.clone());
    }
    if metric.is_flat() {
        let end = q + v;
        let mid = q + v * 0.5;
        if !inside(&end) || !inside(&mid) {
            return Err(Error::LeftChart(end.iter().cloned().collect()));
        }
        return Ok(end);
    }
    let half = opts.geo_steps.max(2) / 2;
    let mut coarse = rk4_geodesic(metric, q, v, 1.0, half, &opts.scheme, inside, |_, _| {})?.0;
    let mut steps = half * 2;
    let mut est = f64::INFINITY;
    for _ in 0..=MAX_REFINE {
        let fine = rk4_geodesic(metric, q, v, 1.0, steps, &opts.scheme, inside, |_, _| {})?.0;
        est = (&fine - &coarse).amax() / 15.0;
        if est <= opts.tol_geo {
            return Ok(fine);
        }
        coarse = fine;
        steps *= 2;
    }
    Err(Error::GeoTolerance(est))
}

/// Positions and velocities along the geodesic, sampled after every step.
pub fn geodesic_trajectory<D>(
    metric: &MetricField,
    q: &ChartPoint,
    v: &ChartVector,
    t_final: f64,
    steps: usize,
    scheme: &DiffScheme,
    inside: &D,
) -> Result<Vec<(ChartPoint, ChartVector)>>
where
    D: Fn(&ChartPoint) -> bool + ?Sized,
{
    let mut out = vec![(q.clone(), v.clone())];
    rk4_geodesic(metric, q, v, t_final, steps, scheme, inside, |x, p| out.push((x.clone(), p.clone())))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn sphere(l: f64) -> MetricField {
        MetricField::new(move |q: &ChartPoint| {
            DMatrix::from_diagonal(&DVector::from_vec(vec![l * l, l * l * q[0].sin().powi(2)]))
        })
    }

    fn anywhere(_: &ChartPoint) -> bool {
        true
    }

    #[test]
    fn derivative_of_constant_and_quadratic() {
        for s in [DiffScheme::first(), DiffScheme::second(), DiffScheme::new(1e-3, 4, 1).unwrap()] {
            assert_eq!(derivative_scalar(|_| Ok(3.0), Deriv::First, 0.0, &s).unwrap(), 0.0);
            assert_eq!(derivative_scalar(|_| Ok(3.0), Deriv::Second, 0.0, &s).unwrap(), 0.0);
            let d1 = derivative_scalar(|t| Ok(t * t), Deriv::First, 0.0, &s).unwrap();
            let d2 = derivative_scalar(|t| Ok(t * t), Deriv::Second, 0.0, &s).unwrap();
            assert!(d1.abs() <= 1e-9);
            assert!((d2 - 2.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn second_derivative_of_sine_vanishes() {
        let d = dir_derivative(|t| Ok(DVector::from_element(1, t.sin())), Deriv::Second, &DiffScheme::second()).unwrap();
        assert!(d[0].abs() <= 1e-8);
    }

    #[test]
    fn richardson_improves_cubic_first_derivative() {
        // f = e^t: exact derivative 1
        let crude = DiffScheme::new(1e-2, 2, 0).unwrap();
        let refined = DiffScheme::new(1e-2, 2, 2).unwrap();
        let e0 = (derivative_scalar(|t| Ok(t.exp()), Deriv::First, 0.0, &crude).unwrap() - 1.0).abs();
        let e2 = (derivative_scalar(|t| Ok(t.exp()), Deriv::First, 0.0, &refined).unwrap() - 1.0).abs();
        assert!(e0 > 1e-6);
        assert!(e2 < 1e-11);
    }

    #[test]
    fn non_finite_stencil_is_reported() {
        let r = derivative_scalar(|t| Ok(1.0 / t.max(0.0)), Deriv::First, 0.0, &DiffScheme::first());
        assert!(matches!(r, Err(Error::NonFinite(_))));
    }

    #[test]
    fn bad_scheme_rejected() {
        assert!(DiffScheme::new(0.0, 2, 1).is_err());
        assert!(DiffScheme::new(1e-3, 3, 1).is_err());
    }

    #[test]
    fn hessian_of_quadratic_is_exact() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, -1.0]);
        let f = |x: &DVector<f64>| Ok(0.5 * x.dot(&(&a * x)));
        let h = hessian(f, &DVector::from_vec(vec![0.3, -0.7]), &DiffScheme::second()).unwrap();
        assert!((h - &a).amax() <= 1e-9);
    }

    #[test]
    fn flat_christoffels_vanish() {
        let m = MetricField::constant(DMatrix::identity(3, 3));
        let g = christoffel(&m, &DVector::from_vec(vec![0.1, 0.2, 0.3]), &DiffScheme::first()).unwrap();
        assert!(g.data.iter().all(|x| *x == 0.0));
        let fd = MetricField::new(|_| DMatrix::identity(2, 2) * 2.0);
        let g = christoffel(&fd, &DVector::from_vec(vec![0.1, 0.2]), &DiffScheme::first()).unwrap();
        assert!(g.data.iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn sphere_christoffel_matches_symbolic() {
        let g = christoffel(&sphere(1.7), &DVector::from_vec(vec![PI / 3.0, 0.4]), &DiffScheme::first()).unwrap();
        // Γ^θ_φφ = −sinθ cosθ, Γ^φ_θφ = cotθ for this metric
        let th = PI / 3.0;
        assert!((g.get(0, 1, 1) + (3f64.sqrt() / 2.0) * 0.5).abs() < 1e-9);
        assert!((g.get(1, 0, 1) - th.cos() / th.sin()).abs() < 1e-9);
        assert!(g.get(0, 0, 0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_metric_reported() {
        let m = MetricField::new(|_| DMatrix::zeros(2, 2));
        let r = christoffel(&m, &DVector::zeros(2), &DiffScheme::first());
        assert!(matches!(r, Err(Error::MetricDegenerate(_))));
    }

    #[test]
    fn flat_exp_is_translation() {
        let m = MetricField::constant(DMatrix::identity(2, 2));
        let q = DVector::from_vec(vec![0.5, -1.0]);
        let v = DVector::from_vec(vec![0.25, 3.0]);
        let e = riemannian_exp(&m, &q, &v, &ExpOptions::default(), &anywhere).unwrap();
        assert!((e - (&q + &v)).amax() < 1e-14);
        let z = riemannian_exp(&m, &q, &DVector::zeros(2), &ExpOptions::default(), &anywhere).unwrap();
        assert_eq!(z, q);
    }

    #[test]
    fn meridian_geodesic_on_sphere() {
        let q = DVector::from_vec(vec![PI / 2.0, 0.0]);
        let v = DVector::from_vec(vec![PI / 4.0, 0.0]);
        let e = riemannian_exp(&sphere(1.0), &q, &v, &ExpOptions::default(), &anywhere).unwrap();
        assert!((e[0] - 3.0 * PI / 4.0).abs() < 1e-10);
        assert!(e[1].abs() < 1e-12);
    }

    #[test]
    fn leaving_the_chart_is_reported() {
        let m = MetricField::constant(DMatrix::identity(1, 1));
        let inside = |x: &ChartPoint| x[0].abs() < 1.0;
        let r = riemannian_exp(&m, &DVector::zeros(1), &DVector::from_element(1, 2.0), &ExpOptions::default(), &inside);
        assert!(matches!(r, Err(Error::LeftChart(_))));
    }

    #[test]
    fn tight_tolerance_reports_geo_tolerance() {
        let opts = ExpOptions { geo_steps: 2, tol_geo: 1e-300, scheme: DiffScheme::first() };
        let q = DVector::from_vec(vec![1.0, 0.0]);
        let v = DVector::from_vec(vec![0.3, 0.9]);
        let r = riemannian_exp(&sphere(1.0), &q, &v, &opts, &anywhere);
        assert!(matches!(r, Err(Error::GeoTolerance(_))));
    }

    #[test]
    fn geodesic_energy_is_conserved() {
        let m = sphere(1.3);
        let q = DVector::from_vec(vec![1.0, 0.2]);
        let v = DVector::from_vec(vec![0.4, 0.7]);
        let traj = geodesic_trajectory(&m, &q, &v, 1.0, 64, &DiffScheme::first(), &anywhere).unwrap();
        let e = |x: &ChartPoint, p: &ChartVector| p.dot(&(m.eval(x) * p));
        let e0 = e(&q, &v);
        for (x, p) in &traj {
            assert!(((e(x, p) - e0) / e0).abs() <= 1e-8);
        }
    }

    #[test]
    fn exp_is_radially_homogeneous() {
        let m = sphere(1.0);
        let q = DVector::from_vec(vec![1.1, 0.3]);
        let v = DVector::from_vec(vec![0.5, -0.8]);
        let traj = geodesic_trajectory(&m, &q, &v, 1.0, 256, &DiffScheme::first(), &anywhere).unwrap();
        for (tau, idx) in [(0.25, 64usize), (0.5, 128), (1.0, 256)] {
            let direct = riemannian_exp(&m, &q, &(&v * tau), &ExpOptions::default(), &anywhere).unwrap();
            assert!((direct - &traj[idx].0).amax() <= 1e-10, "tau = {tau}");
        }
    }

    proptest! {
        #[test]
        fn christoffel_symmetric_in_lower_indices(a in 0.2f64..2.0, b in -1.0f64..1.0, x in -0.5f64..0.5, y in -0.5f64..0.5) {
            let m = MetricField::new(move |q: &ChartPoint| {
                let s = 1.0 + a * q[0] * q[0] + 0.3 * (b * q[1]).sin();
                DMatrix::from_row_slice(2, 2, &[s, 0.1 * q[0] * q[1], 0.1 * q[0] * q[1], 1.0 + q[1] * q[1]])
            });
            let g = christoffel(&m, &DVector::from_vec(vec![x, y]), &DiffScheme::first()).unwrap();
            for k in 0..2 { for i in 0..2 { for j in 0..2 {
                prop_assert!((g.get(k, i, j) - g.get(k, j, i)).abs() <= 1e-9);
            }}}
        }

        #[test]
        fn polynomial_exactness(c0 in -3.0f64..3.0, c1 in -3.0f64..3.0, c2 in -3.0f64..3.0) {
            let f = |t: f64| Ok(c0 + c1 * t + c2 * t * t);
            let d1 = derivative_scalar(f, Deriv::First, 0.0, &DiffScheme::first()).unwrap();
            let d2 = derivative_scalar(f, Deriv::Second, 0.0, &DiffScheme::second()).unwrap();
            prop_assert!((d1 - c1).abs() <= 1e-9);
            prop_assert!((d2 - 2.0 * c2).abs() <= 1e-9);
        }
    }
}
