//! Built-in systems with closed-form relative-equilibrium relations.
//!
//! Every potential is shifted so that V(q_e) = 0.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{ChartPoint, MetricField};
use crate::lie::{AlgVector, LieAlgebraSpec};
use crate::mechanics::ChartSystem;
use crate::numerics::Numerics;

pub type Params = BTreeMap<String, f64>;

/// A catalog system: default parameters and the relations it is known to obey.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub params: Params,
    pub chart_radius: fn(&Params) -> f64,
    pub oracle_notes: &'static str,
}

/// Bifurcation inputs that work out of the box for a catalog system.
#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationDefaults {
    pub v0: Vec<f64>,
    pub theta1: Vec<f64>,
    pub mu1_grid: Vec<Vec<f64>>,
    pub tau_max: f64,
    pub n_steps: usize,
}

fn params(pairs: &[(&str, f64)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

pub fn entries() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            name: "planar_rotor",
            params: params(&[("k", 1.0)]),
            chart_radius: |_| 10.0,
            oracle_notes: "V = k r^2/2 on the plane; circular orbits have omega^2 = k, slice seed u^4 = theta1^2 / k",
        },
        CatalogEntry {
            name: "flat_t2",
            params: params(&[("a", 1.0), ("k1", 1.0), ("k2", 1.0), ("kappa", 1.0)]),
            chart_radius: |p| 0.9 * p["a"],
            oracle_notes: "two planes, first with warped angular metric h(r)^2 = a^2 + kappa (r - a)^2; \
                           F(0) = k1 w^2/2 + k2 rho^2/2 - mu1^2 kappa w^2 / (2 a^4) + theta1^2 / (2 rho^2)",
        },
        CatalogEntry {
            name: "spherical_pendulum",
            params: params(&[("m", 1.0), ("l", 1.0), ("g0", 1.0)]),
            chart_radius: |_| 0.9,
            oracle_notes: "steady rotations satisfy cos(theta) = -g0 / (l omega^2), theta the polar angle from the upward vertical",
        },
        CatalogEntry {
            name: "double_spherical_pendulum",
            params: params(&[("m1", 1.0), ("m2", 1.0), ("l1", 1.0), ("l2", 1.0), ("g0", 1.0)]),
            chart_radius: |_| 0.9,
            oracle_notes: "property checks only; slow rotations bifurcate from the lower normal mode",
        },
        CatalogEntry {
            name: "so3_central_force",
            params: params(&[("k", 1.0), ("r0", 1.0)]),
            chart_radius: |p| 0.5 * p["r0"],
            oracle_notes: "circular orbits satisfy V'(r) = r omega^2; every point has nontrivial isotropy, so no slice exists",
        },
        CatalogEntry {
            name: "so3_two_particle",
            params: params(&[("a", 1.0), ("b", 2.0), ("tension", 0.5), ("k1", 1.0), ("k2", 1.0), ("k3", 1.0)]),
            chart_radius: |p| 0.5 * p["a"],
            oracle_notes: "two unit masses on the z-axis held by central springs and a tensioned link",
        },
    ]
}

pub fn entry(name: &str) -> Result<CatalogEntry> {
    entries().into_iter().find(|e| e.name == name).ok_or_else(|| Error::UnknownSystem(name.to_string()))
}

/// Defaults merged with overrides; unknown keys and non-finite values are rejected.
pub fn resolve_params(name: &str, overrides: &Params) -> Result<Params> {
    let e = entry(name)?;
    let mut p = e.params.clone();
    for (k, v) in overrides {
        if !p.contains_key(k) {
            return Err(Error::BadParams(format!("unknown parameter '{k}' for {name}")));
        }
        if !v.is_finite() {
            return Err(Error::BadParams(format!("parameter '{k}' must be finite")));
        }
        p.insert(k.clone(), *v);
    }
    Ok(p)
}

fn positive(p: &Params, keys: &[&str]) -> Result<()> {
    for k in keys {
        if !(p[*k] > 0.0) {
            return Err(Error::BadParams(format!("parameter '{k}' must be positive, got {}", p[*k])));
        }
    }
    Ok(())
}

pub fn make_system(name: &str, overrides: &Params) -> Result<ChartSystem> {
    make_system_with(name, overrides, None, Numerics::default())
}

pub fn make_system_with(name: &str, overrides: &Params, chart_radius: Option<f64>, numerics: Numerics) -> Result<ChartSystem> {
    let e = entry(name)?;
    let p = resolve_params(name, overrides)?;
    let radius = chart_radius.unwrap_or((e.chart_radius)(&p));
    if !(radius > 0.0) {
        return Err(Error::BadParams("chart_radius must be positive".into()));
    }
    let b = match name {
        "planar_rotor" => planar_rotor(&p, radius)?,
        "flat_t2" => flat_t2(&p, radius)?,
        "spherical_pendulum" => spherical_pendulum(&p, radius)?,
        "double_spherical_pendulum" => double_spherical_pendulum(&p, radius)?,
        "so3_central_force" => so3_central_force(&p, radius)?,
        "so3_two_particle" => so3_two_particle(&p, radius)?,
        _ => return Err(Error::UnknownSystem(name.to_string())),
    };
    b.name(name).numerics(numerics).build()
}

fn rotate2(x: f64, y: f64, angle: f64) -> (f64, f64) {
    let (s, c) = angle.sin_cos();
    (c * x - s * y, s * x + c * y)
}

/// Rotation of each consecutive (x, y) pair of `q` by `angle`.
fn rotate_pairs(q: &ChartPoint, angle: f64) -> ChartPoint {
    let mut out = q.clone();
    for i in (0..q.len()).step_by(2) {
        let (x, y) = rotate2(q[i], q[i + 1], angle);
        out[i] = x;
        out[i + 1] = y;
    }
    out
}

fn rotation_generator_pairs(w: f64, q: &ChartPoint) -> ChartPoint {
    let mut out = DVector::zeros(q.len());
    for i in (0..q.len()).step_by(2) {
        out[i] = -w * q[i + 1];
        out[i + 1] = w * q[i];
    }
    out
}

fn planar_rotor(p: &Params, radius: f64) -> Result<crate::mechanics::ChartSystemBuilder> {
    let k = p["k"];
    if k == 0.0 {
        return Err(Error::BadParams("parameter 'k' must be nonzero".into()));
    }
    Ok(ChartSystem::builder(
        MetricField::constant(DMatrix::identity(2, 2)),
        move |q: &ChartPoint| 0.5 * k * q.norm_squared(),
        |xi: &AlgVector, q: &ChartPoint| rotation_generator_pairs(xi.0[0], q),
        LieAlgebraSpec::abelian(1),
        DVector::zeros(2),
        radius,
    )
    .potential_gradient(move |q| q * k)
    .group_action(|xi, t, q| rotate_pairs(q, xi.0[0] * t))
    .declared_isotropy(vec![DVector::from_vec(vec![1.0])]))
}

/// Plane-1 metric f I + (1 - f) x xᵀ/r², f = h²/r², h² = a² + κ(r - a)².
fn warped_plane(x: f64, y: f64, a: f64, kappa: f64) -> [[f64; 2]; 2] {
    let r2 = x * x + y * y;
    let r = r2.sqrt();
    let h2 = a * a + kappa * (r - a).powi(2);
    let f = h2 / r2;
    let (nx, ny) = (x / r, y / r);
    [[f + (1.0 - f) * nx * nx, (1.0 - f) * nx * ny], [(1.0 - f) * nx * ny, f + (1.0 - f) * ny * ny]]
}

fn warped_plane_derivative(x: f64, y: f64, a: f64, kappa: f64, l: usize) -> [[f64; 2]; 2] {
    let xs = [x, y];
    let r2 = x * x + y * y;
    let r = r2.sqrt();
    let h2 = a * a + kappa * (r - a).powi(2);
    let f = h2 / r2;
    let xl = xs[l];
    let df = 2.0 * kappa * (r - a) * xl / (r * r2) - 2.0 * h2 * xl / (r2 * r2);
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let pij = xs[i] * xs[j] / r2;
            let e_i = if i == l { 1.0 } else { 0.0 };
            let e_j = if j == l { 1.0 } else { 0.0 };
            let dp = (e_i * xs[j] + xs[i] * e_j) / r2 - 2.0 * xl * xs[i] * xs[j] / (r2 * r2);
            let id = if i == j { 1.0 } else { 0.0 };
            out[i][j] = df * (id - pij) + (1.0 - f) * dp;
        }
    }
    out
}

fn flat_t2(p: &Params, radius: f64) -> Result<crate::mechanics::ChartSystemBuilder> {
    positive(p, &["a", "k1", "k2"])?;
    if p["kappa"] < 0.0 {
        return Err(Error::BadParams("parameter 'kappa' must be nonnegative".into()));
    }
    let (a, k1, k2, kappa) = (p["a"], p["k1"], p["k2"], p["kappa"]);
    let metric = MetricField::new(move |q: &ChartPoint| {
        let w = warped_plane(q[0], q[1], a, kappa);
        let mut g = DMatrix::identity(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                g[(i, j)] = w[i][j];
            }
        }
        g
    })
    .with_derivative(move |q: &ChartPoint| {
        (0..4)
            .map(|l| {
                let mut d = DMatrix::zeros(4, 4);
                if l < 2 {
                    let w = warped_plane_derivative(q[0], q[1], a, kappa, l);
                    for i in 0..2 {
                        for j in 0..2 {
                            d[(i, j)] = w[i][j];
                        }
                    }
                }
                d
            })
            .collect()
    });
    Ok(ChartSystem::builder(
        metric,
        move |q: &ChartPoint| {
            let x = norm_excess(&[a, 0.0], &[q[0] - a, q[1]]);
            0.5 * k1 * x * x + 0.5 * k2 * (q[2] * q[2] + q[3] * q[3])
        },
        |xi: &AlgVector, q: &ChartPoint| {
            DVector::from_vec(vec![-xi.0[0] * q[1], xi.0[0] * q[0], -xi.0[1] * q[3], xi.0[1] * q[2]])
        },
        LieAlgebraSpec::abelian(2),
        DVector::from_vec(vec![a, 0.0, 0.0, 0.0]),
        radius,
    )
    .potential_gradient(move |q| {
        let r1 = q[0].hypot(q[1]);
        let s = k1 * (r1 - a) / r1;
        DVector::from_vec(vec![s * q[0], s * q[1], k2 * q[2], k2 * q[3]])
    })
    .group_action(|xi, t, q| {
        let (x1, y1) = rotate2(q[0], q[1], xi.0[0] * t);
        let (x2, y2) = rotate2(q[2], q[3], xi.0[1] * t);
        DVector::from_vec(vec![x1, y1, x2, y2])
    })
    .domain(move |q| {
        let r1 = q[0].hypot(q[1]);
        let r2 = q[2].hypot(q[3]);
        r1 > 0.1 * a && r2 < 10.0 * a
    })
    .declared_isotropy(vec![DVector::from_vec(vec![0.0, 1.0])]))
}

/// Scaled horizontal projection chart of a sphere at its south pole:
/// position ℓ(s, -√(1 - |s|²)).
fn sphere_jacobian(s: &[f64]) -> DMatrix<f64> {
    let c = (1.0 - s[0] * s[0] - s[1] * s[1]).sqrt();
    DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, s[0] / c, s[1] / c])
}

fn sphere_jacobian_derivative(s: &[f64], l: usize) -> DMatrix<f64> {
    let c2 = 1.0 - s[0] * s[0] - s[1] * s[1];
    let c = c2.sqrt();
    let mut d = DMatrix::zeros(3, 2);
    for j in 0..2 {
        let delta = if j == l { 1.0 } else { 0.0 };
        d[(2, j)] = delta / c + s[j] * s[l] / (c2 * c);
    }
    d
}

/// 1 - √(1 - |s|²) without cancellation.
fn sphere_height(s: &[f64]) -> f64 {
    let r2 = s[0] * s[0] + s[1] * s[1];
    r2 / (1.0 + (1.0 - r2).sqrt())
}

/// |e + d| - |e| without cancellation for small d.
fn norm_excess(e: &[f64], d: &[f64]) -> f64 {
    let (ne, nd) = (norm(e), norm(d));
    let shifted: Vec<f64> = e.iter().zip(d).map(|(a, b)| a + b).collect();
    (2.0 * dot(e, d) + nd * nd) / (norm(&shifted) + ne)
}

/// |e + d| - |e| - ê·d, the part of [`norm_excess`] beyond first order.
fn norm_excess_curvature(e: &[f64], d: &[f64]) -> f64 {
    let ne = norm(e);
    let x = norm_excess(e, d);
    let shifted: Vec<f64> = e.iter().zip(d).map(|(a, b)| a + b).collect();
    (dot(d, d) - dot(e, d) / ne * x) / (norm(&shifted) + ne)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn spherical_pendulum(p: &Params, radius: f64) -> Result<crate::mechanics::ChartSystemBuilder> {
    positive(p, &["m", "l", "g0"])?;
    if radius >= 1.0 {
        return Err(Error::BadParams("chart_radius must be below 1 for the pendulum chart".into()));
    }
    let (m, l, g0) = (p["m"], p["l"], p["g0"]);
    let ml2 = m * l * l;
    let metric = MetricField::new(move |q: &ChartPoint| {
        let j = sphere_jacobian(q.as_slice());
        j.transpose() * j * ml2
    })
    .with_derivative(move |q: &ChartPoint| {
        let j = sphere_jacobian(q.as_slice());
        (0..2)
            .map(|k| {
                let dj = sphere_jacobian_derivative(q.as_slice(), k);
                (dj.transpose() * &j + j.transpose() * dj) * ml2
            })
            .collect()
    });
    Ok(ChartSystem::builder(
        metric,
        move |q: &ChartPoint| m * g0 * l * sphere_height(q.as_slice()),
        |xi: &AlgVector, q: &ChartPoint| rotation_generator_pairs(xi.0[0], q),
        LieAlgebraSpec::abelian(1),
        DVector::zeros(2),
        radius,
    )
    .potential_gradient(move |q| {
        let c = (1.0 - q.norm_squared()).sqrt();
        q * (m * g0 * l / c)
    })
    .group_action(|xi, t, q| rotate_pairs(q, xi.0[0] * t))
    .declared_isotropy(vec![DVector::from_vec(vec![1.0])]))
}

fn double_spherical_pendulum(p: &Params, radius: f64) -> Result<crate::mechanics::ChartSystemBuilder> {
    positive(p, &["m1", "m2", "l1", "l2", "g0"])?;
    if radius >= 1.0 {
        return Err(Error::BadParams("chart_radius must be below 1 for the pendulum chart".into()));
    }
    let (m1, m2, l1, l2, g0) = (p["m1"], p["m2"], p["l1"], p["l2"], p["g0"]);
    let blocks = move |j1: &DMatrix<f64>, j2: &DMatrix<f64>, d1: &DMatrix<f64>, d2: &DMatrix<f64>| {
        // symmetric part of (m1+m2) l1² d1ᵀj1 etc., assembled into 4x4
        let b11 = (d1.transpose() * j1) * ((m1 + m2) * l1 * l1);
        let b12 = (d1.transpose() * j2) * (m2 * l1 * l2);
        let b21 = (d2.transpose() * j1) * (m2 * l1 * l2);
        let b22 = (d2.transpose() * j2) * (m2 * l2 * l2);
        let mut g = DMatrix::zeros(4, 4);
        g.view_mut((0, 0), (2, 2)).copy_from(&b11);
        g.view_mut((0, 2), (2, 2)).copy_from(&b12);
        g.view_mut((2, 0), (2, 2)).copy_from(&b21);
        g.view_mut((2, 2), (2, 2)).copy_from(&b22);
        g
    };
    let kinetic = move |q: &ChartPoint| {
        let j1 = sphere_jacobian(&q.as_slice()[0..2]);
        let j2 = sphere_jacobian(&q.as_slice()[2..4]);
        blocks(&j1, &j2, &j1, &j2)
    };
    let metric = MetricField::new(kinetic).with_derivative(move |q: &ChartPoint| {
        let (s1, s2) = (&q.as_slice()[0..2], &q.as_slice()[2..4]);
        let j1 = sphere_jacobian(s1);
        let j2 = sphere_jacobian(s2);
        let z = DMatrix::zeros(3, 2);
        (0..4)
            .map(|l| {
                let (dj1, dj2) = if l < 2 {
                    (sphere_jacobian_derivative(s1, l), z.clone())
                } else {
                    (z.clone(), sphere_jacobian_derivative(s2, l - 2))
                };
                let half = blocks(&dj1, &dj2, &j1, &j2);
                &half + half.transpose()
            })
            .collect()
    });
    Ok(ChartSystem::builder(
        metric,
        move |q: &ChartPoint| {
            g0 * ((m1 + m2) * l1 * sphere_height(&q.as_slice()[0..2]) + m2 * l2 * sphere_height(&q.as_slice()[2..4]))
        },
        |xi: &AlgVector, q: &ChartPoint| rotation_generator_pairs(xi.0[0], q),
        LieAlgebraSpec::abelian(1),
        DVector::zeros(4),
        radius,
    )
    .potential_gradient(move |q| {
        let c1 = (1.0 - q[0] * q[0] - q[1] * q[1]).sqrt();
        let c2 = (1.0 - q[2] * q[2] - q[3] * q[3]).sqrt();
        let a = (m1 + m2) * g0 * l1 / c1;
        let b = m2 * g0 * l2 / c2;
        DVector::from_vec(vec![a * q[0], a * q[1], b * q[2], b * q[3]])
    })
    .group_action(|xi, t, q| rotate_pairs(q, xi.0[0] * t))
    .domain(move |q| q[0].hypot(q[1]) < radius && q[2].hypot(q[3]) < radius)
    .declared_isotropy(vec![DVector::from_vec(vec![1.0])]))
}

/// Rotation by angle |ω| about ω (Rodrigues).
fn rodrigues(w: &Vector3<f64>) -> Matrix3<f64> {
    let th = w.norm();
    if th == 0.0 {
        return Matrix3::identity();
    }
    let k = w / th;
    let kx = Matrix3::new(0.0, -k.z, k.y, k.z, 0.0, -k.x, -k.y, k.x, 0.0);
    Matrix3::identity() + kx * th.sin() + kx * kx * (1.0 - th.cos())
}

fn rotate_triples(xi: &AlgVector, t: f64, q: &ChartPoint) -> ChartPoint {
    let r = rodrigues(&(Vector3::new(xi.0[0], xi.0[1], xi.0[2]) * t));
    let mut out = q.clone();
    for i in (0..q.len()).step_by(3) {
        let p = r * Vector3::new(q[i], q[i + 1], q[i + 2]);
        out[i] = p.x;
        out[i + 1] = p.y;
        out[i + 2] = p.z;
    }
    out
}

fn cross_triples(xi: &AlgVector, q: &ChartPoint) -> ChartPoint {
    let w = Vector3::new(xi.0[0], xi.0[1], xi.0[2]);
    let mut out = DVector::zeros(q.len());
    for i in (0..q.len()).step_by(3) {
        let p = w.cross(&Vector3::new(q[i], q[i + 1], q[i + 2]));
        out[i] = p.x;
        out[i + 1] = p.y;
        out[i + 2] = p.z;
    }
    out
}

fn so3_central_force(p: &Params, radius: f64) -> Result<crate::mechanics::ChartSystemBuilder> {
    positive(p, &["k", "r0"])?;
    let (k, r0) = (p["k"], p["r0"]);
    Ok(ChartSystem::builder(
        MetricField::constant(DMatrix::identity(3, 3)),
        move |q: &ChartPoint| {
            let x = norm_excess(&[0.0, 0.0, r0], &[q[0], q[1], q[2] - r0]);
            0.5 * k * x * x
        },
        cross_triples,
        LieAlgebraSpec::so3(),
        DVector::from_vec(vec![0.0, 0.0, r0]),
        radius,
    )
    .potential_gradient(move |q| {
        let r = q.norm();
        q * (k * (r - r0) / r)
    })
    .group_action(rotate_triples)
    .declared_isotropy(vec![DVector::from_vec(vec![0.0, 0.0, 1.0])]))
}

fn so3_two_particle(p: &Params, radius: f64) -> Result<crate::mechanics::ChartSystemBuilder> {
    positive(p, &["a", "b", "k1", "k2", "k3"])?;
    let (a, b, t, k1, k2, k3) = (p["a"], p["b"], p["tension"], p["k1"], p["k2"], p["k3"]);
    if !(b > a) {
        return Err(Error::BadParams("parameter 'b' must exceed 'a'".into()));
    }
    let d0 = b - a;
    let dv1 = move |r: f64| t + k1 * (r - a);
    let dv2 = move |r: f64| -t + k2 * (r - b);
    let dv3 = move |r: f64| t + k3 * (r - d0);
    let split = |q: &ChartPoint| {
        let p1 = Vector3::new(q[0], q[1], q[2]);
        let p2 = Vector3::new(q[3], q[4], q[5]);
        (p1, p2)
    };
    let (e1, e2, e21) = ([0.0, 0.0, a], [0.0, 0.0, b], [0.0, 0.0, d0]);
    Ok(ChartSystem::builder(
        MetricField::constant(DMatrix::identity(6, 6)),
        move |q: &ChartPoint| {
            let d1 = [q[0], q[1], q[2] - a];
            let d2 = [q[3], q[4], q[5] - b];
            let d21 = [d2[0] - d1[0], d2[1] - d1[1], d2[2] - d1[2]];
            let (x1, x2, x3) = (norm_excess(&e1, &d1), norm_excess(&e2, &d2), norm_excess(&e21, &d21));
            // tension terms t (x1 - x2 + x3): all references lie on the z-axis,
            // so their first-order parts cancel identically
            let tension = norm_excess_curvature(&e1, &d1) - norm_excess_curvature(&e2, &d2) + norm_excess_curvature(&e21, &d21);
            t * tension + 0.5 * (k1 * x1 * x1 + k2 * x2 * x2 + k3 * x3 * x3)
        },
        cross_triples,
        LieAlgebraSpec::so3(),
        DVector::from_vec(vec![0.0, 0.0, a, 0.0, 0.0, b]),
        radius,
    )
    .potential_gradient(move |q| {
        let (p1, p2) = split(q);
        let (r1, r2) = (p1.norm(), p2.norm());
        let dvec = p2 - p1;
        let d = dvec.norm();
        let g1 = p1 * (dv1(r1) / r1) - dvec * (dv3(d) / d);
        let g2 = p2 * (dv2(r2) / r2) + dvec * (dv3(d) / d);
        DVector::from_vec(vec![g1.x, g1.y, g1.z, g2.x, g2.y, g2.z])
    })
    .group_action(rotate_triples)
    .declared_isotropy(vec![DVector::from_vec(vec![0.0, 0.0, 1.0])]))
}

/// Working bifurcation inputs for a catalog system.
pub fn default_bifurcation(name: &str, overrides: &Params) -> Result<BifurcationDefaults> {
    let p = resolve_params(name, overrides)?;
    let d = match name {
        "planar_rotor" => BifurcationDefaults {
            v0: vec![1.0, 0.0],
            theta1: vec![1.0],
            mu1_grid: vec![vec![0.0]],
            tau_max: 1.0,
            n_steps: 64,
        },
        "flat_t2" => BifurcationDefaults {
            v0: vec![0.0, 0.0, 1.0, 0.0],
            theta1: vec![0.0, 1.0],
            mu1_grid: vec![vec![0.2, 0.0], vec![0.4, 0.0]],
            tau_max: 0.3 * p["a"],
            n_steps: 32,
        },
        "spherical_pendulum" => BifurcationDefaults {
            v0: vec![1.0 / (p["l"] * p["m"].sqrt()), 0.0],
            theta1: vec![1.0],
            mu1_grid: vec![vec![0.0]],
            tau_max: 0.5,
            n_steps: 32,
        },
        "double_spherical_pendulum" => {
            let (m1, m2, l1, l2, g0) = (p["m1"], p["m2"], p["l1"], p["l2"], p["g0"]);
            let mass = nalgebra::Matrix2::new((m1 + m2) * l1 * l1, m2 * l1 * l2, m2 * l1 * l2, m2 * l2 * l2);
            let stiff = nalgebra::Matrix2::new((m1 + m2) * g0 * l1, 0.0, 0.0, m2 * g0 * l2);
            // lower mode of K x = λ M x through the Cholesky factor of M
            let l = mass.cholesky().expect("mass matrix positive definite").l();
            let li = l.try_inverse().expect("triangular factor invertible");
            let sym = li * stiff * li.transpose();
            let eig = sym.symmetric_eigen();
            let i = if eig.eigenvalues[0] <= eig.eigenvalues[1] { 0 } else { 1 };
            let mut x = li.transpose() * eig.eigenvectors.column(i);
            // unit length in the kinetic metric (xᵀ M x = 1 already); fix the sign
            if x[0] < 0.0 {
                x = -x;
            }
            BifurcationDefaults {
                v0: vec![x[0], 0.0, x[1], 0.0],
                theta1: vec![1.0],
                mu1_grid: vec![vec![0.0]],
                tau_max: 0.3,
                n_steps: 32,
            }
        }
        "so3_central_force" => BifurcationDefaults {
            v0: vec![0.0, 0.0, 1.0],
            theta1: vec![0.0, 0.0, 1.0],
            mu1_grid: vec![vec![0.0, 0.0, 0.0]],
            tau_max: 0.2,
            n_steps: 16,
        },
        "so3_two_particle" => {
            let (a, b) = (p["a"], p["b"]);
            let n = a.hypot(b);
            BifurcationDefaults {
                v0: vec![b / n, 0.0, 0.0, -a / n, 0.0, 0.0],
                theta1: vec![0.0, 0.0, 1.0],
                mu1_grid: vec![vec![0.0, 0.0, 0.0]],
                tau_max: 0.2,
                n_steps: 16,
            }
        }
        _ => return Err(Error::UnknownSystem(name.to_string())),
    };
    Ok(d)
}
