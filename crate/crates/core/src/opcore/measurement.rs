//! Projection-valued and positive-operator-valued measures.
//!
//! A [`Pvm`] stores each cell as an orthonormal basis of its range rather than
//! as a dense projector. Ranks, pinching and measured probabilities are then
//! cheap even when the cells live on a 1024-dimensional tensor power.

use std::fmt;

use nalgebra::SVD;
use serde::{Deserialize, Serialize};

use super::operator::{DensityMatrix, HermitianOperator};
use super::tensor::ProductOperator;
use crate::numeric::{self, c};
use crate::spectrum::FiniteDistribution;
use crate::{CMatrix, Error, Result, Tolerances};

/// Structured label of a measurement outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CellLabel {
    Index { index: usize },
    Eigenvalue { value: f64 },
    Partition { parts: Vec<usize> },
    Spin { twice_j: usize },
    Joint { first: Box<CellLabel>, second: Box<CellLabel> },
    Named { name: String },
}

impl CellLabel {
    pub fn index(index: usize) -> Self {
        CellLabel::Index { index }
    }

    pub fn joint(first: CellLabel, second: CellLabel) -> Self {
        CellLabel::Joint {
            first: Box::new(first),
            second: Box::new(second),
        }
    }
}

impl fmt::Display for CellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellLabel::Index { index } => write!(f, "{index}"),
            CellLabel::Eigenvalue { value } => write!(f, "ev={value:.12e}"),
            CellLabel::Partition { parts } => {
                let parts: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "({})", parts.join(","))
            }
            CellLabel::Spin { twice_j } => {
                if twice_j % 2 == 0 {
                    write!(f, "j={}", twice_j / 2)
                } else {
                    write!(f, "j={twice_j}/2")
                }
            }
            CellLabel::Joint { first, second } => write!(f, "{first}|{second}"),
            CellLabel::Named { name } => write!(f, "{name}"),
        }
    }
}

/// One outcome of a [`Pvm`]: a label and an orthonormal basis of the range.
#[derive(Debug, Clone)]
pub struct PvmCell {
    label: CellLabel,
    basis: CMatrix,
}

impl PvmCell {
    pub fn label(&self) -> &CellLabel {
        &self.label
    }

    /// `dim × rank` isometry whose columns span the cell.
    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn projector(&self) -> HermitianOperator {
        HermitianOperator::from_matrix_unchecked(&self.basis * self.basis.adjoint())
    }
}

/// Finite family of mutually orthogonal projectors summing to the identity.
#[derive(Debug, Clone)]
pub struct Pvm {
    dim: usize,
    cells: Vec<PvmCell>,
}

impl Pvm {
    /// Builds a PVM from cell bases, checking orthonormality and completeness.
    pub fn from_bases(dim: usize, cells: Vec<(CellLabel, CMatrix)>) -> Result<Self> {
        Self::from_bases_with(dim, cells, &Tolerances::default())
    }

    pub fn from_bases_with(
        dim: usize,
        cells: Vec<(CellLabel, CMatrix)>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let pvm = Self::from_bases_unchecked(dim, cells)?;
        let defect = pvm.orthonormality_defect();
        if defect > tol.proj * tol.reject_factor {
            return Err(Error::InvalidMeasurement(format!(
                "cells are not orthonormal and complete (defect {defect:e})"
            )));
        }
        if defect > tol.proj {
            return Ok(pvm.reorthonormalized());
        }
        Ok(pvm)
    }

    /// Shape checks only; the caller guarantees orthonormality.
    pub(crate) fn from_bases_unchecked(
        dim: usize,
        cells: Vec<(CellLabel, CMatrix)>,
    ) -> Result<Self> {
        let mut total = 0;
        let mut out = Vec::with_capacity(cells.len());
        for (label, basis) in cells {
            if basis.nrows() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: basis.nrows(),
                });
            }
            if basis.ncols() == 0 {
                continue;
            }
            total += basis.ncols();
            out.push(PvmCell { label, basis });
        }
        if total != dim {
            return Err(Error::InvalidMeasurement(format!(
                "cell ranks sum to {total}, expected {dim}"
            )));
        }
        Ok(Self { dim, cells: out })
    }

    /// Builds a PVM from dense projectors.
    pub fn from_projectors(cells: Vec<(CellLabel, HermitianOperator)>) -> Result<Self> {
        let tol = Tolerances::default();
        let dim = cells
            .first()
            .map(|(_, p)| p.dim())
            .ok_or_else(|| Error::InvalidMeasurement("empty PVM".into()))?;
        let mut bases = Vec::with_capacity(cells.len());
        for (label, p) in cells {
            p.check_dim(dim)?;
            bases.push((label, range_of_projector(&p, &tol)?));
        }
        Self::from_bases_with(dim, bases, &tol)
    }

    /// `{ |i><i| }` in the standard basis.
    pub fn computational(dim: usize) -> Self {
        let cells = (0..dim)
            .map(|i| {
                let mut v = CMatrix::zeros(dim, 1);
                v[(i, 0)] = c(1.0);
                PvmCell {
                    label: CellLabel::index(i),
                    basis: v,
                }
            })
            .collect();
        Self { dim, cells }
    }

    /// The single-outcome PVM `{ I }`.
    pub fn trivial(dim: usize) -> Self {
        Self {
            dim,
            cells: vec![PvmCell {
                label: CellLabel::index(0),
                basis: CMatrix::identity(dim, dim),
            }],
        }
    }

    /// Groups the columns of a unitary into cells of the given sizes.
    pub fn from_unitary(unitary: &CMatrix, sizes: &[usize]) -> Result<Self> {
        let dim = unitary.nrows();
        let mut start = 0;
        let mut cells = Vec::with_capacity(sizes.len());
        for (i, &s) in sizes.iter().enumerate() {
            if start + s > unitary.ncols() {
                return Err(Error::InvalidArgument("cell sizes exceed unitary width".into()));
            }
            cells.push((CellLabel::index(i), unitary.columns(start, s).into_owned()));
            start += s;
        }
        Self::from_bases(dim, cells)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[PvmCell] {
        &self.cells
    }

    pub fn labels(&self) -> Vec<CellLabel> {
        self.cells.iter().map(|c| c.label.clone()).collect()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.cells.iter().map(PvmCell::rank).collect()
    }

    /// `w(E)`: the largest cell rank.
    pub fn width(&self) -> usize {
        self.cells.iter().map(PvmCell::rank).max().unwrap_or(0)
    }

    pub fn projector(&self, i: usize) -> HermitianOperator {
        self.cells[i].projector()
    }

    pub fn to_povm(&self) -> Povm {
        Povm {
            dim: self.dim,
            elements: self
                .cells
                .iter()
                .map(|cell| (cell.label.clone(), cell.projector()))
                .collect(),
        }
    }

    /// Largest entry of `|B†B - I|` over the concatenated cell bases.
    pub fn orthonormality_defect(&self) -> f64 {
        let all = self.concatenated();
        let gram = all.adjoint() * &all;
        let id = CMatrix::identity(gram.nrows(), gram.ncols());
        numeric::max_abs(&(gram - id))
    }

    /// Largest deviation from idempotence, orthogonality and completeness,
    /// measured on the dense projectors.
    pub fn projector_defect(&self) -> f64 {
        let projectors: Vec<CMatrix> = self
            .cells
            .iter()
            .map(|cell| &cell.basis * cell.basis.adjoint())
            .collect();
        let mut worst: f64 = 0.0;
        let mut sum = CMatrix::zeros(self.dim, self.dim);
        for (i, p) in projectors.iter().enumerate() {
            worst = worst.max(numeric::max_abs(&(p * p - p)));
            for q in projectors.iter().skip(i + 1) {
                worst = worst.max(numeric::max_abs(&(p * q)));
            }
            sum += p;
        }
        let id = CMatrix::identity(self.dim, self.dim);
        worst.max(numeric::max_abs(&(sum - id)))
    }

    fn concatenated(&self) -> CMatrix {
        let mut all = CMatrix::zeros(self.dim, self.dim);
        let mut col = 0;
        for cell in &self.cells {
            all.columns_mut(col, cell.rank()).copy_from(&cell.basis);
            col += cell.rank();
        }
        all
    }

    fn reorthonormalized(self) -> Self {
        // Löwdin orthonormalisation keeps each column as close as possible
        // to the supplied one.
        let all = self.concatenated();
        let gram = HermitianOperator::from_matrix_unchecked(all.adjoint() * &all);
        let inv_sqrt = gram.map_spectrum(|x| 1.0 / x.max(f64::MIN_POSITIVE).sqrt());
        let fixed = all * inv_sqrt.matrix();
        let mut col = 0;
        let cells = self
            .cells
            .into_iter()
            .map(|cell| {
                let r = cell.rank();
                let basis = fixed.columns(col, r).into_owned();
                col += r;
                PvmCell {
                    label: cell.label,
                    basis,
                }
            })
            .collect();
        Self {
            dim: self.dim,
            cells,
        }
    }

    /// Outcome distribution `Tr E_i rho`.
    pub fn distribution(&self, rho: &DensityMatrix) -> Result<FiniteDistribution> {
        rho.op().check_dim(self.dim)?;
        let probs = self
            .cells
            .iter()
            .map(|cell| {
                let w = rho.matrix() * &cell.basis;
                numeric::column_overlap_sum(&cell.basis, &w)
            })
            .collect();
        self.finish_distribution(probs)
    }

    /// Outcome distribution of `rho^{⊗n}` without materialising the power.
    pub fn product_distribution(&self, rho: &DensityMatrix, n: usize) -> Result<FiniteDistribution> {
        let prod = ProductOperator::of_state(rho, n);
        if prod.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: prod.dim(),
            });
        }
        let probs = self
            .cells
            .iter()
            .map(|cell| prod.expectation_on(&cell.basis))
            .collect();
        self.finish_distribution(probs)
    }

    fn finish_distribution(&self, probs: Vec<f64>) -> Result<FiniteDistribution> {
        let labels = self.cells.iter().map(|c| c.label.to_string()).collect();
        FiniteDistribution::from_measurement(labels, probs, &Tolerances::default())
    }

    /// Largest component of `op V_i` leaving the span of `V_i`, over cells.
    ///
    /// Zero (to rounding) iff every cell is an invariant subspace of `op`;
    /// for a complete PVM that is equivalent to `op` commuting with every
    /// projector when `op` is normal.
    pub fn invariance_defect(&self, apply: impl Fn(&CMatrix) -> CMatrix) -> f64 {
        self.cells
            .iter()
            .map(|cell| {
                let w = apply(&cell.basis);
                let inside = &cell.basis * (cell.basis.adjoint() * &w);
                numeric::max_abs(&(w - inside))
            })
            .fold(0.0, f64::max)
    }

    /// Invariance defect against a dense operator (and its adjoint).
    pub fn commutation_defect(&self, op: &CMatrix) -> Result<f64> {
        if op.nrows() != self.dim || op.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: op.nrows(),
            });
        }
        let adj = op.adjoint();
        Ok(self
            .invariance_defect(|v| op * v)
            .max(self.invariance_defect(|v| &adj * v)))
    }

    /// Per-cell sub-measurement: each cell split along the eigenbasis of
    /// `V_i† X V_i`, where `X` is supplied through `compress`.
    pub fn refine_by(&self, mut compress: impl FnMut(&CMatrix) -> CMatrix) -> Pvm {
        let mut cells = Vec::with_capacity(self.dim);
        for cell in &self.cells {
            let block = compress(&cell.basis);
            let (_, vectors) = numeric::eigh(&block);
            let rotated = &cell.basis * vectors;
            for (j, col) in rotated.column_iter().enumerate() {
                cells.push(PvmCell {
                    label: CellLabel::joint(cell.label.clone(), CellLabel::index(j)),
                    basis: CMatrix::from_columns(&[col]),
                });
            }
        }
        Pvm {
            dim: self.dim,
            cells,
        }
    }
}

/// Extracts an orthonormal basis of the range of a projector, snapping
/// eigenvalues to `{0, 1}`.
fn range_of_projector(p: &HermitianOperator, tol: &Tolerances) -> Result<CMatrix> {
    let spectral = p.eigh();
    let mut worst: f64 = 0.0;
    let mut keep = Vec::new();
    for (i, &v) in spectral.values.iter().enumerate() {
        let d = v.abs().min((1.0 - v).abs());
        worst = worst.max(d);
        if v > 0.5 {
            keep.push(i);
        }
    }
    if worst > tol.proj * tol.reject_factor {
        return Err(Error::NotProjective { deviation: worst });
    }
    Ok(spectral.vectors.select_columns(&keep))
}

/// Finite family of positive operators summing to the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    dim: usize,
    elements: Vec<(CellLabel, HermitianOperator)>,
}

impl Povm {
    pub fn new(elements: Vec<(CellLabel, HermitianOperator)>) -> Result<Self> {
        let tol = Tolerances::default();
        let dim = elements
            .first()
            .map(|(_, e)| e.dim())
            .ok_or_else(|| Error::InvalidMeasurement("empty POVM".into()))?;
        let mut sum = CMatrix::zeros(dim, dim);
        for (_, e) in &elements {
            e.check_dim(dim)?;
            let min = e.min_eigenvalue();
            if min < -tol.psd * tol.reject_factor {
                return Err(Error::NotPositive {
                    min_eigenvalue: min,
                });
            }
            sum += e.matrix();
        }
        let defect = numeric::max_abs(&(sum - CMatrix::identity(dim, dim)));
        if defect > tol.proj * tol.reject_factor {
            return Err(Error::InvalidMeasurement(format!(
                "POVM elements do not sum to the identity (defect {defect:e})"
            )));
        }
        Ok(Self { dim, elements })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[(CellLabel, HermitianOperator)] {
        &self.elements
    }

    /// Converts to a [`Pvm`], failing with [`Error::NotProjective`] when any
    /// element is not a projector.
    pub fn to_pvm(&self) -> Result<Pvm> {
        Pvm::from_projectors(self.elements.clone())
    }

    /// Outcome distribution `Tr M_i rho`.
    pub fn distribution(&self, rho: &DensityMatrix) -> Result<FiniteDistribution> {
        rho.op().check_dim(self.dim)?;
        let labels = self.elements.iter().map(|(l, _)| l.to_string()).collect();
        let probs = self
            .elements
            .iter()
            .map(|(_, e)| numeric::trace_product(e.matrix(), rho.matrix()))
            .collect();
        FiniteDistribution::from_measurement(labels, probs, &Tolerances::default())
    }
}

/// Returns, for each cell of `coarse`, the indices of the `fine` cells whose
/// sum equals it; `None` when `fine` does not refine `coarse`.
pub fn refinement_map(coarse: &Pvm, fine: &Pvm) -> Result<Option<Vec<Vec<usize>>>> {
    refinement_map_with(coarse, fine, Tolerances::default().proj)
}

pub fn refinement_map_with(coarse: &Pvm, fine: &Pvm, tol: f64) -> Result<Option<Vec<Vec<usize>>>> {
    if coarse.dim != fine.dim {
        return Err(Error::DimensionMismatch {
            left: coarse.dim,
            right: fine.dim,
        });
    }
    let mut map = vec![Vec::new(); coarse.len()];
    for (j, f) in fine.cells.iter().enumerate() {
        let rank = f.rank() as f64;
        let mut owner = None;
        for (i, e) in coarse.cells.iter().enumerate() {
            // Tr(E_i F_j) = ||V_i† W_j||_F^2 equals rank(F_j) iff F_j <= E_i.
            let overlap = (e.basis.adjoint() * &f.basis).norm_squared();
            if (overlap - rank).abs() <= tol * rank.max(1.0) {
                if owner.is_some() {
                    return Ok(None);
                }
                owner = Some(i);
            } else if overlap > tol * rank.max(1.0) {
                return Ok(None);
            }
        }
        match owner {
            Some(i) => map[i].push(j),
            None => return Ok(None),
        }
    }
    for (i, e) in coarse.cells.iter().enumerate() {
        let covered: usize = map[i].iter().map(|&j| fine.cells[j].rank()).sum();
        if covered != e.rank() {
            return Ok(None);
        }
    }
    Ok(Some(map))
}

/// `coarse <= fine`.
pub fn is_refinement(coarse: &Pvm, fine: &Pvm) -> bool {
    matches!(refinement_map(coarse, fine), Ok(Some(_)))
}

/// The simultaneous measurement `{ F_j E_i }` of two commuting PVMs.
///
/// Two projectors commute iff all principal angles between their ranges are
/// `0` or `π/2`, i.e. the singular values of `V_i† W_j` lie in `{0, 1}`; the
/// range of `E_i F_j` is spanned by the directions with singular value one.
pub fn joint_pvm(e: &Pvm, f: &Pvm) -> Result<Pvm> {
    joint_pvm_with(e, f, Tolerances::default().proj)
}

pub fn joint_pvm_with(e: &Pvm, f: &Pvm, tol: f64) -> Result<Pvm> {
    if e.dim != f.dim {
        return Err(Error::DimensionMismatch {
            left: e.dim,
            right: f.dim,
        });
    }
    // Singular values are accurate to ~sqrt of the projector error, so the
    // {0,1} test uses the square root of the projector tolerance.
    let sv_tol = tol.sqrt();
    let mut cells = Vec::new();
    for ei in &e.cells {
        for fj in &f.cells {
            let overlap = ei.basis.adjoint() * &fj.basis;
            let svd = SVD::new(overlap, true, false);
            let u = svd.u.expect("requested U");
            let mut keep = Vec::new();
            for (idx, &s) in svd.singular_values.iter().enumerate() {
                if (s - 1.0).abs() <= sv_tol {
                    keep.push(idx);
                } else if s > sv_tol {
                    return Err(Error::NonCommuting {
                        defect: s.min(1.0 - s).abs(),
                    });
                }
            }
            if keep.is_empty() {
                continue;
            }
            let basis = &ei.basis * u.select_columns(&keep);
            cells.push((CellLabel::joint(fj.label.clone(), ei.label.clone()), basis));
        }
    }
    Pvm::from_bases(e.dim, cells)
}

/// `P(i) = Tr M_i rho`.
pub fn measured_distribution(rho: &DensityMatrix, m: &Povm) -> Result<FiniteDistribution> {
    m.distribution(rho)
}

/// Spectral measure of `x`: eigenvalues whose consecutive gaps are below
/// `degeneracy_tol` share a cell, labelled by the cluster mean.
pub fn spectral_pvm(x: &HermitianOperator, degeneracy_tol: f64) -> Pvm {
    let spectral = x.eigh();
    let groups = numeric::cluster_sorted(&spectral.values, degeneracy_tol);
    let cells = groups
        .into_iter()
        .map(|g| {
            let mean = spectral.values[g.clone()].iter().sum::<f64>() / g.len() as f64;
            PvmCell {
                label: CellLabel::Eigenvalue { value: mean },
                basis: spectral.vectors.columns(g.start, g.len()).into_owned(),
            }
        })
        .collect();
    Pvm {
        dim: x.dim(),
        cells,
    }
}

/// [`spectral_pvm`] with the default tolerance `1e-8 ×` spectral range.
pub fn spectral_pvm_default(x: &HermitianOperator) -> Pvm {
    let ev = x.eigenvalues();
    let range = ev[ev.len() - 1] - ev[0];
    spectral_pvm(x, default_degeneracy_tol(range))
}

pub(crate) fn default_degeneracy_tol(range: f64) -> f64 {
    if range > 0.0 {
        1e-8 * range
    } else {
        f64::MIN_POSITIVE
    }
}
