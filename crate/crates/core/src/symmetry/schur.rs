//! Isotypic (Schur–Weyl) decomposition of `(C^k)^{⊗n}`.
//!
//! Every permutation of tensor factors preserves the content (letter counts)
//! of a computational basis string, so the isotypic projectors are block
//! diagonal over content classes. They are assembled block by block as real
//! matrices and only then embedded in the full space.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::partition::{partitions_of, permutations, sn_character, Partition};
use crate::numeric::{self, factorial};
use crate::opcore::{CellLabel, HermitianOperator, Pvm};
use crate::{CMatrix, Complex64, Error, Limits, Result, Tolerances};

/// Basis strings sharing one content vector, with the range of every
/// isotypic projector restricted to them.
#[derive(Debug, Clone)]
pub(crate) struct ContentBlock {
    /// Number of occurrences of each letter `0..k`.
    pub content: Vec<usize>,
    /// Global indices `Σ x_i k^{n-1-i}` of the strings, ascending.
    pub strings: Vec<usize>,
    /// Per partition (same order as [`BlockDecomposition::partitions`]):
    /// orthonormal columns spanning `P_λ` restricted to this block.
    pub ranges: Vec<DMatrix<f64>>,
}

/// Isotypic decomposition stored per content block.
#[derive(Debug, Clone)]
pub(crate) struct BlockDecomposition {
    pub n: usize,
    pub k: usize,
    pub partitions: Vec<Partition>,
    pub blocks: Vec<ContentBlock>,
    /// Largest distance of a block-projector eigenvalue from `{0, 1}`.
    pub projector_defect: f64,
}

pub(crate) fn digits(mut x: usize, n: usize, k: usize) -> Vec<usize> {
    let mut d = vec![0; n];
    for slot in d.iter_mut().rev() {
        *slot = x % k;
        x /= k;
    }
    d
}

/// Content classes in descending lexicographic order of content.
pub(crate) fn content_classes(n: usize, k: usize, dim: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut classes: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for x in 0..dim {
        let mut content = vec![0; k];
        for d in digits(x, n, k) {
            content[d] += 1;
        }
        classes.entry(content).or_default().push(x);
    }
    classes.into_iter().rev().collect()
}

/// Orthonormal range of a real symmetric block that should be a projector,
/// together with its eigenvalue distance from `{0, 1}`.
pub(crate) fn projector_range(p: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let (values, vectors) = numeric::eigh_real(p);
    let mut defect: f64 = 0.0;
    let mut keep = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        defect = defect.max(v.abs().min((v - 1.0).abs()));
        if v > 0.5 {
            keep.push(i);
        }
    }
    (vectors.select_columns(&keep), defect)
}

/// Builds `P_λ = (d_λ/n!) Σ_π χ_λ(π) U_π` on every content block.
pub(crate) fn character_blocks(n: usize, k: usize, limits: &Limits) -> Result<BlockDecomposition> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidArgument("need n >= 1 and k >= 1".into()));
    }
    let dim = limits.check_power(k, n)?;
    limits.check_factorial(n)?;
    let partitions = partitions_of(n, k);
    let classes = content_classes(n, k, dim);

    // position of each global string inside its block
    let mut locate = vec![(0usize, 0usize); dim];
    for (b, (_, strings)) in classes.iter().enumerate() {
        for (l, &x) in strings.iter().enumerate() {
            locate[x] = (b, l);
        }
    }
    let string_digits: Vec<Vec<usize>> = (0..dim).map(|x| digits(x, n, k)).collect();

    // characters depend only on the cycle type
    let mut char_table: BTreeMap<Partition, Vec<f64>> = BTreeMap::new();
    for mu in partitions_of(n, n) {
        let row = partitions
            .iter()
            .map(|lambda| sn_character(lambda, &mu).map(|c| c as f64))
            .collect::<Result<Vec<_>>>()?;
        char_table.insert(mu, row);
    }

    let mut acc: Vec<Vec<DMatrix<f64>>> = classes
        .iter()
        .map(|(_, s)| vec![DMatrix::zeros(s.len(), s.len()); partitions.len()])
        .collect();
    let powers: Vec<usize> = (0..n).map(|i| k.pow((n - 1 - i) as u32)).collect();
    for perm in permutations(n) {
        let chars = &char_table[&Partition::cycle_type(&perm)];
        for x in 0..dim {
            let d = &string_digits[x];
            let y: usize = (0..n).map(|i| d[perm[i]] * powers[i]).sum();
            let (b, col) = locate[x];
            let (_, row) = locate[y];
            for (li, &chi) in chars.iter().enumerate() {
                if chi != 0.0 {
                    acc[b][li][(row, col)] += chi;
                }
            }
        }
    }

    let nf = factorial(n) as f64;
    let mut defect: f64 = 0.0;
    let mut blocks = Vec::with_capacity(classes.len());
    for ((content, strings), mats) in classes.into_iter().zip(acc) {
        let mut ranges = Vec::with_capacity(partitions.len());
        for (lambda, mut p) in partitions.iter().zip(mats) {
            p *= lambda.sn_dim() as f64 / nf;
            let (range, d) = projector_range(&p);
            defect = defect.max(d);
            ranges.push(range);
        }
        blocks.push(ContentBlock {
            content,
            strings,
            ranges,
        });
    }
    Ok(BlockDecomposition {
        n,
        k,
        partitions,
        blocks,
        projector_defect: defect,
    })
}

impl BlockDecomposition {
    pub fn dim(&self) -> usize {
        self.k.pow(self.n as u32)
    }

    /// Global basis of component `li`, concatenating the block ranges.
    pub fn component_basis(&self, li: usize) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim(), self.rank(li));
        let mut col = 0;
        for block in &self.blocks {
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

    pub fn rank(&self, li: usize) -> usize {
        self.blocks.iter().map(|b| b.ranges[li].ncols()).sum()
    }
}

/// One isotypic component of `(C^k)^{⊗n}`.
#[derive(Debug, Clone)]
pub struct SchurComponent {
    pub partition: Partition,
    /// Dimension `d_λ` of the symmetric-group irrep.
    pub sn_dim: usize,
    /// Dimension of the `SL(k)` irrep.
    pub sl_dim: usize,
    /// Orthonormal basis of the isotypic subspace (`k^n × rank`).
    pub basis: CMatrix,
}

impl SchurComponent {
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn projector(&self) -> HermitianOperator {
        HermitianOperator::new(&self.basis * self.basis.adjoint()).expect("projector is Hermitian")
    }
}

/// Isotypic decomposition `(C^k)^{⊗n} = ⊕_λ V_λ ⊗ W_λ`.
#[derive(Debug, Clone)]
pub struct SchurDecomposition {
    pub n: usize,
    pub k: usize,
    pub components: Vec<SchurComponent>,
    /// Largest eigenvalue distance from `{0, 1}` seen while extracting ranges.
    pub projector_defect: f64,
}

impl SchurDecomposition {
    pub fn dim(&self) -> usize {
        self.k.pow(self.n as u32)
    }

    /// The decomposition as a PVM labelled by partitions.
    pub fn pvm(&self) -> Result<Pvm> {
        let cells = self
            .components
            .iter()
            .map(|c| {
                (
                    CellLabel::Partition {
                        parts: c.partition.parts().to_vec(),
                    },
                    c.basis.clone(),
                )
            })
            .collect();
        Pvm::from_bases_with(self.dim(), cells, &Tolerances::default())
    }

    /// `w(E^n)`, the largest component rank.
    pub fn width(&self) -> usize {
        self.components.iter().map(SchurComponent::rank).max().unwrap_or(0)
    }

    /// `Σ_λ d_λ · dim W_λ`, which must equal `k^n`.
    pub fn dimension_count(&self) -> usize {
        self.components.iter().map(|c| c.sn_dim * c.sl_dim).sum()
    }

    /// `sl_dim <= (n+1)^{k−1}` for every component.
    pub fn sl_dims_within_bound(&self) -> bool {
        let bound = (self.n as u128 + 1).pow(self.k as u32 - 1);
        self.components.iter().all(|c| c.sl_dim as u128 <= bound)
    }
}

/// Isotypic PVM from central characters, `P_λ = (d_λ/n!) Σ_π χ_λ(π) U_π`,
/// over partitions with at most `k` rows.
pub fn isotypic_pvm(n: usize, k: usize, limits: &Limits) -> Result<SchurDecomposition> {
    let blocks = character_blocks(n, k, limits)?;
    let components = blocks
        .partitions
        .iter()
        .enumerate()
        .map(|(li, lambda)| SchurComponent {
            partition: lambda.clone(),
            sn_dim: lambda.sn_dim() as usize,
            sl_dim: lambda.sl_dim(k) as usize,
            basis: blocks.component_basis(li),
        })
        .collect();
    Ok(SchurDecomposition {
        n,
        k,
        components,
        projector_defect: blocks.projector_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::binomial;
    use crate::opcore::{is_refinement, tensor_power, ProductOperator};
    use crate::random::{random_density, random_invertible, Substream};

    fn ranks(d: &SchurDecomposition) -> Vec<usize> {
        d.components.iter().map(SchurComponent::rank).collect()
    }

    #[test]
    fn two_qubits() {
        let d = isotypic_pvm(2, 2, &Limits::default()).unwrap();
        assert_eq!(ranks(&d), vec![3, 1]);
    }

    #[test]
    fn three_qubits() {
        let d = isotypic_pvm(3, 2, &Limits::default()).unwrap();
        assert_eq!(ranks(&d), vec![4, 4]);
        assert_eq!(d.components[1].sn_dim, 2);
        assert_eq!(d.components[1].sl_dim, 2);
    }

    #[test]
    fn symmetric_component_is_repeated_combination() {
        for (n, k) in [(3, 2), (2, 3), (4, 2), (3, 3)] {
            let d = isotypic_pvm(n, k, &Limits::default()).unwrap();
            let sym = &d.components[0];
            assert_eq!(sym.partition.parts(), &[n]);
            assert_eq!(sym.sl_dim as u128, binomial(n + k - 1, k - 1));
            assert_eq!(sym.rank(), sym.sl_dim);
        }
    }

    #[test]
    fn ranks_match_dimension_formulas() {
        for (n, k) in [(4, 2), (5, 2), (3, 3), (4, 3)] {
            let d = isotypic_pvm(n, k, &Limits::default()).unwrap();
            assert_eq!(d.dimension_count(), d.dim());
            for c in &d.components {
                assert_eq!(c.rank(), c.sn_dim * c.sl_dim, "{} n={n} k={k}", c.partition);
            }
            assert!(d.projector_defect < 1e-9);
            let pvm = d.pvm().unwrap();
            assert!(pvm.projector_defect() < 1e-9);
        }
    }

    #[test]
    fn commutes_with_tensor_powers() {
        let mut rng = Substream::new(51, "schur-commute").rng();
        let d = isotypic_pvm(4, 2, &Limits::default()).unwrap();
        let pvm = d.pvm().unwrap();
        for _ in 0..5 {
            let rho = random_density(&mut rng, 2);
            let dense = tensor_power(&rho, 4, &Limits::default()).unwrap();
            assert!(pvm.commutation_defect(dense.matrix()).unwrap() < 1e-9);
            let g = ProductOperator::new(random_invertible(&mut rng, 2), 4).unwrap();
            assert!(pvm.invariance_defect(|v| g.apply_columns(v)) < 1e-9);
        }
    }

    #[test]
    fn budgets() {
        assert!(matches!(
            isotypic_pvm(9, 2, &Limits::default()),
            Err(Error::FactorialBudget { n: 9, limit: 8 })
        ));
        assert!(matches!(
            isotypic_pvm(8, 2, &Limits::with_max_dim(2)),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn trivial_site_count() {
        let d = isotypic_pvm(1, 3, &Limits::default()).unwrap();
        assert_eq!(ranks(&d), vec![3]);
        assert!(is_refinement(&d.pvm().unwrap(), &Pvm::computational(3)));
    }
}
