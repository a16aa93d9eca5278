use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DiffScheme, ExpOptions};

/// Tolerances, step sizes and iteration limits shared by every module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    pub tol_alg: f64,
    /// Relative singular-value threshold for ranks and kernels.
    pub tol_rank: f64,
    /// Invariance checks of potential and metric along generators.
    pub tol_inv: f64,
    /// Torus relative-equilibrium and Montaldi residuals.
    pub tol_h: f64,
    pub tol_geo: f64,
    pub geo_steps: usize,
    pub tau_switch: f64,
    pub tol_match: f64,
    /// Threshold on |det A| after row equilibration.
    pub tol_z: f64,
    pub tol_newton: f64,
    pub max_newton_iter: usize,
    /// Relative eigenvalue threshold for definiteness classification.
    pub tol_eig: f64,
    pub first: DiffScheme,
    pub second: DiffScheme,
    pub blowup: DiffScheme,
    pub slice: DiffScheme,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            tol_alg: 1e-10,
            tol_rank: 1e-8,
            tol_inv: 1e-8,
            tol_h: 1e-8,
            tol_geo: 1e-10,
            geo_steps: 64,
            tau_switch: 1e-3,
            tol_match: 1e-7,
            tol_z: 1e-10,
            tol_newton: 1e-10,
            max_newton_iter: 50,
            tol_eig: 1e-8,
            first: DiffScheme::first(),
            second: DiffScheme::second(),
            blowup: DiffScheme::blowup(),
            slice: DiffScheme::slice(),
        }
    }
}

impl Numerics {
    pub fn validate(&self) -> Result<()> {
        for s in [&self.first, &self.second, &self.blowup, &self.slice] {
            s.validate()?;
        }
        let positive = [
            ("tol_alg", self.tol_alg),
            ("tol_rank", self.tol_rank),
            ("tol_inv", self.tol_inv),
            ("tol_h", self.tol_h),
            ("tol_geo", self.tol_geo),
            ("tau_switch", self.tau_switch),
            ("tol_match", self.tol_match),
            ("tol_z", self.tol_z),
            ("tol_newton", self.tol_newton),
            ("tol_eig", self.tol_eig),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::BadParams(format!("{name} must be positive, got {v}")));
            }
        }
        if self.geo_steps < 2 {
            return Err(Error::BadParams("geo_steps must be at least 2".into()));
        }
        if self.max_newton_iter == 0 {
            return Err(Error::BadParams("max_newton_iter must be positive".into()));
        }
        Ok(())
    }

    pub fn exp_options(&self) -> ExpOptions {
        ExpOptions { geo_steps: self.geo_steps, tol_geo: self.tol_geo, scheme: self.first }
    }

    /// Fields whose value differs from the default, as `name = value` lines.
    pub fn overrides(&self) -> Vec<String> {
        let cur = serde_json::to_value(self).expect("numerics serialize");
        let def = serde_json::to_value(Numerics::default()).expect("numerics serialize");
        let mut out = Vec::new();
        if let (Some(c), Some(d)) = (cur.as_object(), def.as_object()) {
            for (k, v) in c {
                if d.get(k) != Some(v) {
                    out.push(format!("{k} = {v}"));
                }
            }
        }
        out
    }
}
