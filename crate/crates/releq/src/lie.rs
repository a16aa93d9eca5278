//! Finite-dimensional Lie algebras given by structure constants in a fixed
//! basis, with an ad-invariant inner product and a distinguished torus.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg;

pub const TOL_ALG: f64 = 1e-10;
pub const TOL_RANK: f64 = 1e-8;

/// Element of the Lie algebra, in the fixed basis.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgVector(pub DVector<f64>);

/// Element of the dual of the Lie algebra, in the dual basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CoVector(pub DVector<f64>);

impl AlgVector {
    pub fn zeros(n: usize) -> Self {
        AlgVector(DVector::zeros(n))
    }
    pub fn from_slice(x: &[f64]) -> Self {
        AlgVector(DVector::from_column_slice(x))
    }
    pub fn basis(n: usize, i: usize) -> Self {
        AlgVector(DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 }))
    }
    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl CoVector {
    pub fn zeros(n: usize) -> Self {
        CoVector(DVector::zeros(n))
    }
    pub fn from_slice(x: &[f64]) -> Self {
        CoVector(DVector::from_column_slice(x))
    }
    pub fn dim(&self) -> usize {
        self.0.len()
    }
    /// Natural pairing ⟨self, x⟩.
    pub fn pair(&self, x: &AlgVector) -> f64 {
        self.0.dot(&x.0)
    }
}

/// Serializable form of [`LieAlgebraSpec`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraDef {
    pub dim_g: usize,
    /// `structure_constants[k][i][j]` is the e_k coefficient of [e_i, e_j].
    pub structure_constants: Vec<Vec<Vec<f64>>>,
    pub inner_product: Vec<Vec<f64>>,
    pub torus_basis: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct LieAlgebraSpec {
    dim: usize,
    c: Vec<f64>,
    inner: DMatrix<f64>,
    torus: Vec<DVector<f64>>,
}

impl LieAlgebraSpec {
    /// Validates antisymmetry, Jacobi, torus commutativity/independence and
    /// ad-invariance of the inner product.
    pub fn new(
        dim: usize,
        structure_constants: Vec<f64>,
        inner_product: DMatrix<f64>,
        torus_basis: Vec<DVector<f64>>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidAlgebra("dim_g must be positive".into()));
        }
        check_dim(dim * dim * dim, structure_constants.len())?;
        check_dim(dim, inner_product.nrows())?;
        check_dim(dim, inner_product.ncols())?;
        let spec = LieAlgebraSpec { dim, c: structure_constants, inner: inner_product, torus: torus_basis };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_def(def: &AlgebraDef) -> Result<Self> {
        let n = def.dim_g;
        let mut c = vec![0.0; n * n * n];
        check_dim(n, def.structure_constants.len())?;
        for (k, plane) in def.structure_constants.iter().enumerate() {
            check_dim(n, plane.len())?;
            for (i, row) in plane.iter().enumerate() {
                check_dim(n, row.len())?;
                for (j, v) in row.iter().enumerate() {
                    c[(k * n + i) * n + j] = *v;
                }
            }
        }
        check_dim(n, def.inner_product.len())?;
        let mut w = DMatrix::zeros(n, n);
        for (i, row) in def.inner_product.iter().enumerate() {
            check_dim(n, row.len())?;
            for (j, v) in row.iter().enumerate() {
                w[(i, j)] = *v;
            }
        }
        let mut torus = Vec::new();
        for t in &def.torus_basis {
            check_dim(n, t.len())?;
            torus.push(DVector::from_column_slice(t));
        }
        LieAlgebraSpec::new(n, c, w, torus)
    }

    pub fn to_def(&self) -> AlgebraDef {
        let n = self.dim;
        AlgebraDef {
            dim_g: n,
            structure_constants: (0..n)
                .map(|k| (0..n).map(|i| (0..n).map(|j| self.c(k, i, j)).collect()).collect())
                .collect(),
            inner_product: (0..n).map(|i| (0..n).map(|j| self.inner[(i, j)]).collect()).collect(),
            torus_basis: self.torus.iter().map(|t| t.iter().cloned().collect()).collect(),
        }
    }

    /// Abelian algebra of dimension `n`: 𝔱 = 𝔤, identity inner product.
    pub fn abelian(n: usize) -> Self {
        let torus = (0..n).map(|i| AlgVector::basis(n, i).0).collect();
        LieAlgebraSpec::new(n, vec![0.0; n * n * n], DMatrix::identity(n, n), torus)
            .expect("abelian algebra is valid")
    }

    /// so(3) with [e_i, e_j] = ε_ijk e_k, identity inner product (negative
    /// Killing form scaled by 1/2) and torus span{e3}.
    pub fn so3() -> Self {
        let mut c = vec![0.0; 27];
        let eps = |i: usize, j: usize, k: usize| -> f64 {
            match (i, j, k) {
                (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
                (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
                _ => 0.0,
            }
        };
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    c[(k * 3 + i) * 3 + j] = eps(i, j, k);
                }
            }
        }
        LieAlgebraSpec::new(3, c, DMatrix::identity(3, 3), vec![AlgVector::basis(3, 2).0])
            .expect("so(3) is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn c(&self, k: usize, i: usize, j: usize) -> f64 {
        self.c[(k * self.dim + i) * self.dim + j]
    }

    pub fn inner_product(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn torus_basis(&self) -> &[DVector<f64>] {
        &self.torus
    }

    pub fn is_abelian(&self) -> bool {
        self.c.iter().all(|x| *x == 0.0)
    }

    pub fn inner(&self, x: &AlgVector, y: &AlgVector) -> f64 {
        linalg::w_dot(&self.inner, &x.0, &y.0)
    }

    /// Flat map x ↦ ⟨x, ·⟩.
    pub fn flat(&self, x: &AlgVector) -> CoVector {
        CoVector(&self.inner * &x.0)
    }

    /// Matrix of ad_x: column j is [x, e_j].
    pub fn ad_matrix(&self, x: &AlgVector) -> DMatrix<f64> {
        let n = self.dim;
        DMatrix::from_fn(n, n, |k, j| (0..n).map(|i| self.c(k, i, j) * x.0[i]).sum())
    }

    pub fn bracket(&self, x: &AlgVector, y: &AlgVector) -> Result<AlgVector> {
        check_dim(self.dim, x.dim())?;
        check_dim(self.dim, y.dim())?;
        Ok(AlgVector(self.ad_matrix(x) * &y.0))
    }

    /// ⟨ad*_x m, y⟩ = ⟨m, [x, y]⟩.
    pub fn coadjoint_ad_star(&self, x: &AlgVector, m: &CoVector) -> Result<CoVector> {
        check_dim(self.dim, x.dim())?;
        check_dim(self.dim, m.dim())?;
        Ok(CoVector(self.ad_matrix(x).transpose() * &m.0))
    }

    /// Matrix of Ad_{exp(t x)} = exp(t ad_x).
    pub fn ad_exp(&self, x: &AlgVector, t: f64) -> DMatrix<f64> {
        (self.ad_matrix(x) * t).exp()
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim;
        let w = &self.inner;
        if !w.iter().all(|x| x.is_finite()) || !self.c.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidAlgebra("non-finite entries".into()));
        }
        if (w - w.transpose()).amax() > TOL_ALG * (1.0 + w.amax()) {
            return Err(Error::InvalidAlgebra("inner product not symmetric".into()));
        }
        if w.clone().cholesky().is_none() {
            return Err(Error::InvalidAlgebra("inner product not positive definite".into()));
        }
        let scale = 1.0 + self.c.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if (self.c(k, i, j) + self.c(k, j, i)).abs() > TOL_ALG * scale {
                        return Err(Error::InvalidAlgebra(format!("antisymmetry fails at c[{k}][{i}][{j}]")));
                    }
                }
            }
        }
        let e = |i: usize| AlgVector::basis(n, i);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let r = self.jacobi_residual(&e(i), &e(j), &e(k));
                    if r > TOL_ALG * scale * scale {
                        return Err(Error::InvalidAlgebra(format!("Jacobi fails on ({i},{j},{k}): {r:e}")));
                    }
                    let z = e(i);
                    let zx = AlgVector(self.ad_matrix(&z) * &e(j).0);
                    let zy = AlgVector(self.ad_matrix(&z) * &e(k).0);
                    let inv = self.inner(&zx, &e(k)) + self.inner(&e(j), &zy);
                    if inv.abs() > TOL_ALG * scale * (1.0 + w.amax()) {
                        return Err(Error::InvalidAlgebra(format!(
                            "inner product not ad-invariant on ({i},{j},{k}): {inv:e}"
                        )));
                    }
                }
            }
        }
        for t in &self.torus {
            check_dim(n, t.len())?;
        }
        let tb = linalg::span_basis(&self.torus, w, TOL_RANK);
        if tb.len() != self.torus.len() {
            return Err(Error::InvalidAlgebra("torus basis is linearly dependent".into()));
        }
        for a in &self.torus {
            for b in &self.torus {
                let br = self.ad_matrix(&AlgVector(a.clone())) * b;
                if br.amax() > TOL_ALG * scale {
                    return Err(Error::InvalidAlgebra("torus basis vectors do not commute".into()));
                }
            }
        }
        Ok(())
    }

    pub fn jacobi_residual(&self, x: &AlgVector, y: &AlgVector, z: &AlgVector) -> f64 {
        let b = |a: &AlgVector, c: &AlgVector| AlgVector(self.ad_matrix(a) * &c.0);
        let t1 = b(&b(x, y), z);
        let t2 = b(&b(y, z), x);
        let t3 = b(&b(z, x), y);
        (t1.0 + t2.0 + t3.0).amax()
    }

    /// Orthonormal bases of 𝔱 and of [𝔤, 𝔱].
    pub fn split_torus_complement(&self) -> (Vec<DVector<f64>>, Vec<DVector<f64>>) {
        let n = self.dim;
        let t = linalg::span_basis(&self.torus, &self.inner, TOL_RANK);
        let mut brackets = Vec::new();
        for i in 0..n {
            for tj in &self.torus {
                brackets.push(self.ad_matrix(&AlgVector::basis(n, i)) * tj);
            }
        }
        let comp = linalg::span_basis(&brackets, &self.inner, TOL_RANK);
        (t, comp)
    }

    /// Residual of the orthogonal projection of `x` onto 𝔱.
    pub fn torus_residual(&self, x: &AlgVector) -> f64 {
        let t = linalg::span_basis(&self.torus, &self.inner, TOL_RANK);
        linalg::projection_residual(&x.0, &t, &self.inner)
    }

    /// Whether `x ∈ 𝔱` is regular, i.e. ker ad_x = 𝔱.
    pub fn is_regular(&self, x: &AlgVector) -> Result<bool> {
        check_dim(self.dim, x.dim())?;
        let res = self.torus_residual(x);
        if res > TOL_ALG * (1.0 + linalg::w_norm(&self.inner, &x.0)) {
            return Err(Error::NotInTorus(res));
        }
        let sv = self.ad_matrix(x).singular_values();
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        let rank = if smax == 0.0 { 0 } else { sv.iter().filter(|s| **s > TOL_RANK * smax).count() };
        Ok(rank == self.dim - self.torus.len())
    }
}

impl TryFrom<AlgebraDef> for LieAlgebraSpec {
    type Error = Error;
    fn try_from(def: AlgebraDef) -> Result<Self> {
        LieAlgebraSpec::from_def(&def)
    }
}
