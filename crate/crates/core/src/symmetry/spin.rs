//! Total-spin decomposition of `n` qubits, the `k = 2` fast path of the
//! isotypic decomposition.
//!
//! Basis letter `0` is spin up. On the block of strings with `a` ones the
//! Casimir is `J² = J_− J_+ + J_z² + J_z` with `J_z = (n − 2a)/2`, and
//! `J_+` maps the block to the one with `a − 1` ones, so each block needs
//! only a real symmetric eigendecomposition of size `C(n, a)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::partition::Partition;
use super::schur::{content_classes, BlockDecomposition, ContentBlock};
use crate::numeric;
use crate::opcore::{CellLabel, HermitianOperator, Pvm};
use crate::{CMatrix, Complex64, Error, Limits, Result};

/// One total-spin sector: `2j`, the irrep dimension `2j + 1`, and how many
/// copies occur in `(C^2)^{⊗n}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinBlock {
    pub twice_j: usize,
    pub block_dim: usize,
    pub multiplicity: usize,
}

impl SpinBlock {
    pub fn j(&self) -> f64 {
        self.twice_j as f64 / 2.0
    }
}

/// Sectors of `n` spin-1/2 particles, largest `j` first, from the coupling
/// recursion `m(n, j) = m(n−1, j−1/2) + m(n−1, j+1/2)`.
pub fn qubit_spin_blocks(n: usize) -> Vec<SpinBlock> {
    if n == 0 {
        return Vec::new();
    }
    // mult[t] = multiplicity of 2j = t
    let mut mult = vec![0usize; n + 2];
    mult[1] = 1;
    for sites in 2..=n {
        let mut next = vec![0usize; n + 2];
        for t in 0..=sites {
            let from_below = if t >= 1 { mult[t - 1] } else { 0 };
            next[t] = from_below + mult[t + 1];
        }
        mult = next;
    }
    (0..=n)
        .rev()
        .filter(|&t| mult[t] > 0)
        .map(|t| SpinBlock {
            twice_j: t,
            block_dim: t + 1,
            multiplicity: mult[t],
        })
        .collect()
}

/// Partition `(n − t, t)` labelling the sector with `2j = n − 2t`.
pub fn spin_partition(n: usize, twice_j: usize) -> Partition {
    let t = (n - twice_j) / 2;
    let parts = if t == 0 { vec![n] } else { vec![n - t, t] };
    Partition::new(parts).expect("two-row partition")
}

/// `2j` from a Casimir eigenvalue `j(j+1)`, with the rounding error.
fn twice_j_of(ev: f64) -> (usize, f64) {
    let tj = ((1.0 + 4.0 * ev.max(0.0)).sqrt() - 1.0).round().max(0.0) as usize;
    let j = tj as f64 / 2.0;
    (tj, (ev - j * (j + 1.0)).abs())
}

/// Block decomposition of `(C^2)^{⊗n}` by total spin, in the same layout as
/// the character construction (partitions ordered by decreasing `j`).
pub(crate) fn spin_blocks(n: usize, limits: &Limits) -> Result<BlockDecomposition> {
    if n == 0 {
        return Err(Error::InvalidArgument("need n >= 1".into()));
    }
    let dim = limits.check_power(2, n)?;
    let sectors = qubit_spin_blocks(n);
    let partitions: Vec<Partition> = sectors.iter().map(|s| spin_partition(n, s.twice_j)).collect();
    let index_of = |tj: usize| sectors.iter().position(|s| s.twice_j == tj);

    let classes = content_classes(n, 2, dim);
    let mut local = vec![usize::MAX; dim];
    for (_, strings) in &classes {
        for (l, &x) in strings.iter().enumerate() {
            local[x] = l;
        }
    }

    let mut defect: f64 = 0.0;
    let mut blocks = Vec::with_capacity(classes.len());
    for (content, strings) in classes {
        let a = content[1];
        let m = (n as f64 - 2.0 * a as f64) / 2.0;
        let size = strings.len();
        // J_+ flips one 1 (spin down) to 0 (spin up)
        let lower = if a > 0 { numeric::binomial(n, a - 1) as usize } else { 0 };
        let mut raise = DMatrix::<f64>::zeros(lower, size);
        for (col, &x) in strings.iter().enumerate() {
            for bit in 0..n {
                if x >> bit & 1 == 1 {
                    raise[(local[x ^ (1 << bit)], col)] = 1.0;
                }
            }
        }
        let mut casimir = raise.transpose() * &raise;
        for i in 0..size {
            casimir[(i, i)] += m * m + m;
        }
        let (values, vectors) = numeric::eigh_real(&casimir);
        let mut cols: Vec<Vec<usize>> = vec![Vec::new(); partitions.len()];
        for (i, &ev) in values.iter().enumerate() {
            let (tj, err) = twice_j_of(ev);
            defect = defect.max(err);
            let li = index_of(tj).ok_or_else(|| {
                Error::InvalidMeasurement(format!("unexpected Casimir eigenvalue {ev}"))
            })?;
            cols[li].push(i);
        }
        let ranges = cols.iter().map(|c| vectors.select_columns(c)).collect();
        blocks.push(ContentBlock {
            content,
            strings,
            ranges,
        });
    }
    Ok(BlockDecomposition {
        n,
        k: 2,
        partitions,
        blocks,
        projector_defect: defect,
    })
}

/// Eigenspaces of the total-spin Casimir `J²`, labelled by `j`.
pub fn total_spin_pvm(n: usize, limits: &Limits) -> Result<Pvm> {
    let blocks = spin_blocks(n, limits)?;
    let sectors = qubit_spin_blocks(n);
    let cells = sectors
        .iter()
        .enumerate()
        .map(|(li, s)| {
            (
                CellLabel::Spin {
                    twice_j: s.twice_j,
                },
                blocks.component_basis(li),
            )
        })
        .collect();
    Pvm::from_bases(blocks.dim(), cells)
}

/// Dense `J² = Σ_{a ∈ x,y,z} (Σ_i S_a^{(i)})²`, for cross-checks.
pub fn total_spin_casimir(n: usize, limits: &Limits) -> Result<HermitianOperator> {
    let dim = limits.check_power(2, n)?;
    let half = Complex64::new(0.5, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let zero = Complex64::new(0.0, 0.0);
    let paulis = [
        [zero, half, half, zero],
        [zero, -i * half, i * half, zero],
        [half, zero, zero, -half],
    ];
    let mut out = CMatrix::zeros(dim, dim);
    for s in paulis {
        let single = HermitianOperator::new(CMatrix::from_row_slice(2, 2, &s))?;
        let id = HermitianOperator::identity(2);
        let mut total = CMatrix::zeros(dim, dim);
        for site in 0..n {
            let mut term = if site == 0 { single.clone() } else { id.clone() };
            for other in 1..n {
                term = term.kron(if other == site { &single } else { &id });
            }
            total += term.matrix();
        }
        out += &total * &total;
    }
    HermitianOperator::new(out)
}
