//! The joint measurement `E^n × E(sigma^{⊗n})`.
//!
//! In the eigenbasis of `sigma`, `sigma^{⊗n}` is diagonal and constant on
//! each content block, and `E^n` is block diagonal over the same blocks.
//! A joint cell is therefore the union, over blocks whose `sigma^{⊗n}`
//! eigenvalue falls in one cluster, of the isotypic ranges in those blocks.
//! The cells are finally rotated back by `U^{⊗n}`.

use super::schur::{character_blocks, BlockDecomposition};
use super::spin::spin_blocks;
use crate::numeric;
use crate::opcore::{CellLabel, DensityMatrix, ProductOperator, Pvm};
use crate::{CMatrix, Complex64, Limits, Result};

/// One cell of a [`SteinMeasurement`].
#[derive(Debug, Clone, PartialEq)]
pub struct SteinCell {
    /// Partition (or spin, for qubits) label of the isotypic sector.
    pub sector: CellLabel,
    /// `log` of the `sigma^{⊗n}` eigenvalue shared by the whole cell.
    pub log_sigma_eigenvalue: f64,
    pub rank: usize,
}

/// `E^n × E(sigma^{⊗n})` with exact per-cell `sigma^{⊗n}` eigenvalues.
#[derive(Debug, Clone)]
pub struct SteinMeasurement {
    pub n: usize,
    pub pvm: Pvm,
    pub cells: Vec<SteinCell>,
}

impl SteinMeasurement {
    /// `log Tr sigma^{⊗n} E_i = log(rank_i) + log μ_i`, exact up to rounding
    /// even where the probability underflows a direct trace evaluation.
    pub fn log_sigma_probabilities(&self) -> Vec<f64> {
        self.cells
            .iter()
            .map(|c| (c.rank as f64).ln() + c.log_sigma_eigenvalue)
            .collect()
    }
}

/// Which construction to use for `E^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectorMethod {
    /// Total spin for qubits, central characters otherwise.
    Auto,
    Characters,
    Spin,
}

pub fn stein_pvm(sigma: &DensityMatrix, n: usize, limits: &Limits) -> Result<Pvm> {
    Ok(stein_measurement(sigma, n, limits)?.pvm)
}

pub fn stein_measurement(sigma: &DensityMatrix, n: usize, limits: &Limits) -> Result<SteinMeasurement> {
    stein_measurement_with(sigma, n, limits, SectorMethod::Auto)
}

pub fn stein_measurement_with(
    sigma: &DensityMatrix,
    n: usize,
    limits: &Limits,
    method: SectorMethod,
) -> Result<SteinMeasurement> {
    sigma.require_full_rank()?;
    let k = sigma.dim();
    let blocks = match (method, k) {
        (SectorMethod::Spin, _) | (SectorMethod::Auto, 2) => spin_blocks(n, limits)?,
        _ => character_blocks(n, k, limits)?,
    };
    let spectral = sigma.op().eigh();
    let log_mu: Vec<f64> = spectral.values.iter().map(|m| m.ln()).collect();

    // log eigenvalue of sigma^{⊗n} on each content block
    let block_logs: Vec<f64> = blocks
        .blocks
        .iter()
        .map(|b| b.content.iter().zip(&log_mu).map(|(&c, &l)| c as f64 * l).sum())
        .collect();
    let clusters = cluster_logs(&block_logs, n, &log_mu);

    let sector_label = |li: usize| -> CellLabel {
        if k == 2 && matches!(method, SectorMethod::Auto | SectorMethod::Spin) {
            let parts = blocks.partitions[li].parts();
            CellLabel::Spin {
                twice_j: parts[0] - parts.get(1).copied().unwrap_or(0),
            }
        } else {
            CellLabel::Partition {
                parts: blocks.partitions[li].parts().to_vec(),
            }
        }
    };

    let dim = blocks.dim();
    let mut local_cells = Vec::new();
    let mut cells = Vec::new();
    for li in 0..blocks.partitions.len() {
        for (mean_log, members) in &clusters {
            let basis = union_basis(&blocks, li, members, dim);
            if basis.ncols() == 0 {
                continue;
            }
            let sector = sector_label(li);
            let label = CellLabel::joint(
                sector.clone(),
                CellLabel::Eigenvalue {
                    value: mean_log.exp(),
                },
            );
            cells.push(SteinCell {
                sector,
                log_sigma_eigenvalue: *mean_log,
                rank: basis.ncols(),
            });
            local_cells.push((label, basis));
        }
    }

    let lift = ProductOperator::new(spectral.vectors.clone(), n)?;
    let lifted = local_cells
        .into_iter()
        .map(|(label, basis)| (label, lift.apply_columns(&basis)))
        .collect();
    let pvm = Pvm::from_bases_unchecked(dim, lifted)?;
    Ok(SteinMeasurement { n, pvm, cells })
}

/// Groups content blocks whose `log` eigenvalues agree to within
/// `1e-8 × n·(log μ_max − log μ_min)`, floored at the rounding level of the
/// sums; returns `(mean log, block indices)` in increasing order.
///
/// Clustering happens in the log domain because products like `0.03^10`
/// sit far below any absolute tolerance yet are perfectly distinct.
fn cluster_logs(block_logs: &[f64], n: usize, log_mu: &[f64]) -> Vec<(f64, Vec<usize>)> {
    let range = n as f64 * (log_mu[log_mu.len() - 1] - log_mu[0]);
    let scale = log_mu.iter().fold(1.0_f64, |m, l| m.max(l.abs()));
    let tol = crate::opcore::default_degeneracy_tol(range).max(1e-12 * n as f64 * scale);
    let mut order: Vec<usize> = (0..block_logs.len()).collect();
    order.sort_by(|&a, &b| block_logs[a].total_cmp(&block_logs[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| block_logs[i]).collect();
    numeric::cluster_sorted(&sorted, tol)
        .into_iter()
        .map(|g| {
            let members: Vec<usize> = order[g.clone()].to_vec();
            let mean = sorted[g.clone()].iter().sum::<f64>() / g.len() as f64;
            (mean, members)
        })
        .collect()
}

/// Local (σ-eigenbasis) basis of sector `li` restricted to `members`.
fn union_basis(blocks: &BlockDecomposition, li: usize, members: &[usize], dim: usize) -> CMatrix {
    let rank: usize = members.iter().map(|&b| blocks.blocks[b].ranges[li].ncols()).sum();
    let mut out = CMatrix::zeros(dim, rank);
    let mut col = 0;
    for &b in members {
        let block = &blocks.blocks[b];
        let r = &block.ranges[li];
        for c in 0..r.ncols() {
            for (l, &x) in block.strings.iter().enumerate() {
                out[(x, col)] = Complex64::new(r[(l, c)], 0.0);
            }
            col += 1;
        }
    }
    out
}
