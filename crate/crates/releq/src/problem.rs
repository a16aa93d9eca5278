//! Owned bundle of everything a branch computation needs.

use nalgebra::DVector;

use crate::branch::{make_slice, Blowup, SliceChart};
use crate::catalog::{self, BifurcationDefaults, Params};
use crate::error::{check_dim, Result};
use crate::lie::CoVector;
use crate::mechanics::ChartSystem;
use crate::numerics::Numerics;
use crate::reduction::BetaFamily;
use crate::splittings::{analyze_symmetry, SymmetryAnalysis};

#[derive(Debug, Clone)]
pub struct Problem {
    pub sys: ChartSystem,
    pub analysis: SymmetryAnalysis,
    pub slice: SliceChart,
    pub fam: BetaFamily,
    pub bifurcation: BifurcationDefaults,
}

impl Problem {
    /// Builds the slice at `bifurcation.v0` for the family (μ₁, 0, ϑ₁).
    pub fn new(sys: ChartSystem, bifurcation: BifurcationDefaults, mu1: &[f64]) -> Result<Self> {
        let analysis = analyze_symmetry(&sys)?;
        let d = analysis.dim_g();
        check_dim(d, mu1.len())?;
        check_dim(sys.n(), bifurcation.v0.len())?;
        let fam = BetaFamily::new(
            &analysis,
            CoVector::from_slice(mu1),
            CoVector::zeros(d),
            CoVector::from_slice(&bifurcation.theta1),
        )?;
        let slice = make_slice(&sys, &analysis, &fam, &DVector::from_column_slice(&bifurcation.v0))?;
        Ok(Problem { sys, analysis, slice, fam, bifurcation })
    }

    /// Catalog system with its default bifurcation inputs and the first μ₁
    /// of the default grid.
    pub fn catalog(name: &str, params: &Params, numerics: Numerics) -> Result<Self> {
        let sys = catalog::make_system_with(name, params, None, numerics)?;
        let bif = catalog::default_bifurcation(name, params)?;
        let mu1 = bif.mu1_grid[0].clone();
        Problem::new(sys, bif, &mu1)
    }

    /// Same system and slice direction with another μ₁.
    pub fn with_mu1(&self, mu1: &[f64]) -> Result<Self> {
        Problem::new(self.sys.clone(), self.bifurcation.clone(), mu1)
    }

    pub fn blowup(&self) -> Blowup<'_> {
        Blowup::new(&self.sys, &self.analysis, &self.slice)
    }

    /// Default Newton start: unit step along v0.
    pub fn default_guess(&self) -> DVector<f64> {
        let mut u = DVector::zeros(self.slice.dim_u);
        u[0] = 1.0;
        u
    }
}
