//! Tensor powers, both materialised and applied site by site.

use super::operator::{DensityMatrix, HermitianOperator};
use crate::numeric::c;
use crate::{CMatrix, Complex64, Error, Limits, Result};

/// `rho^{⊗n}` as a dense matrix.
pub fn tensor_power(rho: &DensityMatrix, n: usize, limits: &Limits) -> Result<DensityMatrix> {
    Ok(DensityMatrix::from_trusted(hermitian_power(rho.op(), n, limits)?))
}

pub(crate) fn hermitian_power(
    op: &HermitianOperator,
    n: usize,
    limits: &Limits,
) -> Result<HermitianOperator> {
    if n == 0 {
        return Err(Error::InvalidArgument("tensor power needs n >= 1".into()));
    }
    limits.check_power(op.dim(), n)?;
    let mut acc = op.matrix().clone();
    for _ in 1..n {
        acc = acc.kronecker(op.matrix());
    }
    Ok(HermitianOperator::from_matrix_unchecked(acc))
}

/// `Σ_i I ⊗ … ⊗ log sigma ⊗ … ⊗ I` over `n` sites, which equals
/// `log(sigma^{⊗n})`.
pub fn local_log_sum(
    sigma: &DensityMatrix,
    n: usize,
    limits: &Limits,
) -> Result<HermitianOperator> {
    if n == 0 {
        return Err(Error::InvalidArgument("local_log_sum needs n >= 1".into()));
    }
    sigma.require_full_rank()?;
    let k = sigma.dim();
    let dim = limits.check_power(k, n)?;
    let log_sigma = sigma.op().map_spectrum(f64::ln);
    let mut out = CMatrix::zeros(dim, dim);
    for site in 0..n {
        let left = CMatrix::identity(k.pow(site as u32), k.pow(site as u32));
        let right_dim = k.pow((n - 1 - site) as u32);
        let right = CMatrix::identity(right_dim, right_dim);
        out += left.kronecker(log_sigma.matrix()).kronecker(&right);
    }
    Ok(HermitianOperator::from_matrix_unchecked(out))
}

/// The operator `local^{⊗n}`, applied to vectors without materialising it.
///
/// Basis index `x = Σ_i x_i k^{n-1-i}`, matching `kronecker` ordering.
#[derive(Debug, Clone)]
pub struct ProductOperator {
    local: CMatrix,
    n: usize,
}

impl ProductOperator {
    pub fn new(local: CMatrix, n: usize) -> Result<Self> {
        if local.nrows() != local.ncols() {
            return Err(Error::NotSquare {
                rows: local.nrows(),
                cols: local.ncols(),
            });
        }
        Ok(Self { local, n })
    }

    pub fn of_state(rho: &DensityMatrix, n: usize) -> Self {
        Self {
            local: rho.matrix().clone(),
            n,
        }
    }

    pub fn local_dim(&self) -> usize {
        self.local.nrows()
    }

    pub fn sites(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.local_dim().pow(self.n as u32)
    }

    /// In-place `v <- local^{⊗n} v`.
    pub fn apply_in_place(&self, v: &mut [Complex64]) {
        let k = self.local_dim();
        debug_assert_eq!(v.len(), self.dim());
        let mut tmp = vec![c(0.0); k];
        for site in 0..self.n {
            let stride = k.pow((self.n - 1 - site) as u32);
            let block = stride * k;
            for base in (0..v.len()).step_by(block) {
                for off in 0..stride {
                    for (a, t) in tmp.iter_mut().enumerate() {
                        *t = v[base + off + a * stride];
                    }
                    for r in 0..k {
                        let mut acc = c(0.0);
                        for (col, t) in tmp.iter().enumerate() {
                            acc += self.local[(r, col)] * t;
                        }
                        v[base + off + r * stride] = acc;
                    }
                }
            }
        }
    }

    /// `local^{⊗n} V` for every column of `V`.
    pub fn apply_columns(&self, v: &CMatrix) -> CMatrix {
        let mut out = v.clone();
        for mut col in out.column_iter_mut() {
            let slice = col.as_mut_slice();
            self.apply_in_place(slice);
        }
        out
    }

    /// `V† local^{⊗n} V`.
    pub fn compress(&self, v: &CMatrix) -> CMatrix {
        let w = self.apply_columns(v);
        v.adjoint() * w
    }

    /// `Tr(V V† local^{⊗n})` for an isometry `V`.
    pub fn expectation_on(&self, v: &CMatrix) -> f64 {
        let w = self.apply_columns(v);
        crate::numeric::column_overlap_sum(v, &w)
    }
}
