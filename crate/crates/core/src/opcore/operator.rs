use crate::numeric::{self, c};
use crate::{CMatrix, Complex64, Error, Result, Tolerances};

/// A finite-dimensional self-adjoint operator.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    m: CMatrix,
}

/// Spectral decomposition with eigenvalues in ascending order.
#[derive(Debug, Clone)]
pub struct Spectral {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Spectral {
    /// Rebuild `f(X)` from the decomposition.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> HermitianOperator {
        HermitianOperator {
            m: numeric::from_spectrum(&self.values, &self.vectors, f),
        }
    }
}

impl HermitianOperator {
    /// Validates Hermiticity with the default tolerances.
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerances(m, &Tolerances::default())
    }

    /// Symmetrizes `m` when its defect is below `reject_factor * herm`,
    /// otherwise rejects it.
    pub fn with_tolerances(mut m: CMatrix, tol: &Tolerances) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidArgument("operator dimension must be >= 1".into()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("operator has non-finite entries".into()));
        }
        let defect = numeric::hermiticity_defect(&m);
        if defect > tol.herm * tol.reject_factor {
            return Err(Error::NotHermitian { deviation: defect });
        }
        numeric::hermitize(&mut m);
        Ok(Self { m })
    }

    /// Wraps a matrix produced by trusted code, only symmetrizing it.
    pub(crate) fn from_matrix_unchecked(mut m: CMatrix) -> Self {
        numeric::hermitize(&mut m);
        Self { m }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: CMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            m: CMatrix::zeros(dim, dim),
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self {
            m: CMatrix::from_fn(n, n, |i, j| if i == j { c(values[i]) } else { c(0.0) }),
        }
    }

    /// Rank-one projector onto the normalised span of `v`.
    pub fn projector_onto(v: &[Complex64]) -> Result<Self> {
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if norm2 <= 0.0 {
            return Err(Error::InvalidArgument("zero vector".into()));
        }
        let n = v.len();
        let m = CMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj() / norm2);
        Ok(Self::from_matrix_unchecked(m))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    pub fn eigh(&self) -> Spectral {
        let (values, vectors) = numeric::eigh(&self.m);
        Spectral { values, vectors }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigh().values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues().last().expect("dim >= 1")
    }

    /// `f(X)` through the spectral decomposition.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Self {
        self.eigh().apply(f)
    }

    /// Real part of `Tr(self · other)`.
    pub fn trace_product(&self, other: &HermitianOperator) -> Result<f64> {
        self.check_dim(other.dim())?;
        Ok(numeric::trace_product(&self.m, &other.m))
    }

    pub fn add(&self, other: &HermitianOperator) -> Result<Self> {
        self.check_dim(other.dim())?;
        Ok(Self {
            m: &self.m + &other.m,
        })
    }

    pub fn sub(&self, other: &HermitianOperator) -> Result<Self> {
        self.check_dim(other.dim())?;
        Ok(Self {
            m: &self.m - &other.m,
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { m: &self.m * c(s) }
    }

    /// `self ⊗ other` (the first factor is the most significant index).
    pub fn kron(&self, other: &HermitianOperator) -> Self {
        Self {
            m: self.m.kronecker(&other.m),
        }
    }

    /// Largest entry of `|[self, other]|`.
    pub fn commutator_defect(&self, other: &HermitianOperator) -> Result<f64> {
        self.check_dim(other.dim())?;
        let comm = &self.m * &other.m - &other.m * &self.m;
        Ok(numeric::max_abs(&comm))
    }

    pub(crate) fn check_dim(&self, other: usize) -> Result<()> {
        if self.dim() != other {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other,
            });
        }
        Ok(())
    }
}

/// Positive semidefinite unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        Self::with_tolerances(op, &Tolerances::default())
    }

    /// Validates, clamping eigenvalues in `[-reject_factor·psd, 0)` to zero
    /// and renormalising a trace within `reject_factor·trace` of one.
    pub fn with_tolerances(op: HermitianOperator, tol: &Tolerances) -> Result<Self> {
        let spectral = op.eigh();
        let min = spectral.values[0];
        if min < -tol.psd * tol.reject_factor {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        let op = if min < 0.0 {
            spectral.apply(|x| x.max(0.0))
        } else {
            op
        };
        let trace = op.trace();
        if (trace - 1.0).abs() > tol.trace * tol.reject_factor || trace <= 0.0 {
            return Err(Error::BadTrace { trace });
        }
        let op = if trace != 1.0 { op.scale(1.0 / trace) } else { op };
        Ok(Self { op })
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::new(HermitianOperator::new(m)?)
    }

    pub(crate) fn from_trusted(op: HermitianOperator) -> Self {
        Self { op }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            op: HermitianOperator::identity(dim).scale(1.0 / dim as f64),
        }
    }

    /// Diagonal state with the given probabilities.
    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(HermitianOperator::diagonal(probs))
    }

    /// Pure state `|v><v|` (normalised).
    pub fn pure(v: &[Complex64]) -> Result<Self> {
        Ok(Self {
            op: HermitianOperator::projector_onto(v)?,
        })
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &CMatrix {
        self.op.matrix()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// Smallest eigenvalue; states with `min_eigenvalue() <= threshold` are
    /// treated as singular.
    pub fn min_eigenvalue(&self) -> f64 {
        self.op.min_eigenvalue()
    }

    pub(crate) fn require_full_rank(&self) -> Result<()> {
        let min = self.min_eigenvalue();
        if min <= FULL_RANK_THRESHOLD {
            return Err(Error::Singular {
                min_eigenvalue: min,
            });
        }
        Ok(())
    }
}

/// Eigenvalue at or below which a state is considered singular.
pub const FULL_RANK_THRESHOLD: f64 = 1e-12;

/// Operator `A` with `0 <= A <= I`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestOperator {
    op: HermitianOperator,
}

impl TestOperator {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let tol = Tolerances::default();
        let spectral = op.eigh();
        let min = spectral.values[0];
        let max = *spectral.values.last().expect("dim >= 1");
        let slack = tol.psd * tol.reject_factor;
        if min < -slack {
            return Err(Error::NotATest { eigenvalue: min });
        }
        if max > 1.0 + slack {
            return Err(Error::NotATest { eigenvalue: max });
        }
        if min < 0.0 || max > 1.0 {
            return Ok(Self {
                op: spectral.apply(|x| x.clamp(0.0, 1.0)),
            });
        }
        Ok(Self { op })
    }

    pub(crate) fn from_trusted(op: HermitianOperator) -> Self {
        Self { op }
    }

    pub fn accept_all(dim: usize) -> Self {
        Self {
            op: HermitianOperator::identity(dim),
        }
    }

    pub fn reject_all(dim: usize) -> Self {
        Self {
            op: HermitianOperator::zeros(dim),
        }
    }

    /// Convex combination `weight·a + (1 - weight)·b`.
    pub fn mix(a: &TestOperator, b: &TestOperator, weight: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::InvalidArgument(format!("mixing weight {weight} outside [0,1]")));
        }
        let op = a.op.scale(weight).add(&b.op.scale(1.0 - weight))?;
        Ok(Self { op })
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2(a: [[f64; 2]; 2]) -> CMatrix {
        CMatrix::from_fn(2, 2, |i, j| c(a[i][j]))
    }

    #[test]
    fn rejects_far_from_hermitian() {
        let err = HermitianOperator::new(m2([[1.0, 0.5], [0.0, 1.0]])).unwrap_err();
        assert!(matches!(err, Error::NotHermitian { .. }));
    }

    #[test]
    fn symmetrizes_rounding_noise() {
        let op = HermitianOperator::new(m2([[1.0, 0.5], [0.5 + 1e-7, 1.0]])).unwrap();
        assert_eq!(op.matrix()[(0, 1)], op.matrix()[(1, 0)].conj());
    }

    #[test]
    fn density_clamps_and_renormalises() {
        let rho = DensityMatrix::new(HermitianOperator::diagonal(&[1.0 + 1e-7, -1e-6])).unwrap();
        let ev = rho.op().eigenvalues();
        assert!(ev[0] >= 0.0);
        assert!((rho.op().trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn density_rejects_bad_inputs() {
        assert!(matches!(
            DensityMatrix::diagonal(&[1.5, -0.5]),
            Err(Error::NotPositive { .. })
        ));
        assert!(matches!(
            DensityMatrix::diagonal(&[0.5, 0.4]),
            Err(Error::BadTrace { .. })
        ));
    }

    #[test]
    fn test_operator_bounds() {
        assert!(TestOperator::new(HermitianOperator::diagonal(&[0.0, 1.0])).is_ok());
        assert!(matches!(
            TestOperator::new(HermitianOperator::diagonal(&[0.0, 1.1])),
            Err(Error::NotATest { .. })
        ));
    }

    #[test]
    fn map_spectrum_inverts_log() {
        let rho = DensityMatrix::diagonal(&[0.25, 0.75]).unwrap();
        let back = rho.op().map_spectrum(f64::ln).map_spectrum(f64::exp);
        for (a, b) in back.matrix().iter().zip(rho.matrix().iter()) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}
