//! Dense complex linear algebra and the validated matrix newtypes used by
//! every other module.
//!
//! Composite spaces always use the Kronecker index convention: for `a ⊗ b`
//! the composite basis index is `i_a * dim_b + i_b`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type StateVector = DVector<C64>;

pub const TOL_HERM: f64 = 1e-10;
pub const TOL_TRACE: f64 = 1e-10;
pub const TOL_UNITARY: f64 = 1e-10;
pub const TOL_PSD: f64 = 1e-10;
pub const TOL_EIG: f64 = 1e-9;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Largest entrywise modulus.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermiticity_deviation(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(m - m.adjoint()))
}

/// `(m + m†) / 2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Outer product `|v⟩⟨v|`.
pub fn projector(v: &StateVector) -> ComplexMatrix {
    v * v.adjoint()
}

/// Computational basis vector `e_index` of length `dim`.
pub fn basis_vector(dim: usize, index: usize) -> StateVector {
    let mut v = StateVector::zeros(dim);
    v[index] = ONE;
    v
}

fn check_square(m: &ComplexMatrix, what: &str) -> Result<()> {
    if m.nrows() == 0 || !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "{what} must be a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

fn check_same_dim(a: usize, b: usize, what: &str) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(format!("{what}: {a} vs {b}")));
    }
    Ok(())
}

/// Square Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianObservable(ComplexMatrix);

impl HermitianObservable {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        check_square(&matrix, "observable")?;
        let deviation = hermiticity_deviation(&matrix);
        if deviation > TOL_HERM {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self(matrix))
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    /// Largest eigenvalue minus smallest eigenvalue.
    pub fn spectral_diameter(&self) -> f64 {
        let eig = eigendecompose(self);
        eig.values[eig.values.len() - 1] - eig.values[0]
    }

    pub fn spectral_radius(&self) -> f64 {
        eigendecompose(self)
            .values
            .iter()
            .fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }
}

/// Square matrix with `U†U = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryOperator(ComplexMatrix);

impl UnitaryOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        check_square(&matrix, "unitary")?;
        let n = matrix.nrows();
        let deviation = max_abs(&(matrix.adjoint() * &matrix - ComplexMatrix::identity(n, n)));
        if deviation > TOL_UNITARY {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self(matrix))
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// `U ρ U†`.
    pub fn conjugate(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        check_same_dim(self.dim(), rho.dim(), "unitary and state")?;
        DensityMatrix::from_computed(&self.0 * rho.matrix() * self.0.adjoint())
    }

    /// `exp(-i t H)` computed from the eigendecomposition of `H`.
    pub fn evolution(h: &HermitianObservable, t: f64) -> Self {
        let eig = eigendecompose(h);
        let phases: Vec<C64> = eig
            .values
            .iter()
            .map(|&e| C64::from_polar(1.0, -t * e))
            .collect();
        Self(eig.vectors.scale_columns(&phases) * eig.vectors.adjoint())
    }
}

/// Trace-one positive semidefinite Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        check_square(&matrix, "density matrix")?;
        let deviation = hermiticity_deviation(&matrix);
        if deviation > TOL_HERM {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > TOL_TRACE || trace.im.abs() > TOL_TRACE {
            return Err(Error::InvalidState(format!("trace is {trace}, expected 1")));
        }
        let min_eig = eigenvalues(&hermitian_part(&matrix))[0];
        if min_eig < -TOL_PSD {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self(matrix))
    }

    /// Hermitizes a matrix produced by arithmetic on valid states before
    /// validating it, so rounding noise in the anti-Hermitian part is dropped.
    pub fn from_computed(matrix: ComplexMatrix) -> Result<Self> {
        check_square(&matrix, "density matrix")?;
        let deviation = hermiticity_deviation(&matrix);
        if deviation > TOL_HERM {
            return Err(Error::NotHermitian { deviation });
        }
        Self::new(hermitian_part(&matrix))
    }

    /// `|ψ⟩⟨ψ|` for a normalized state vector.
    pub fn from_pure(psi: &StateVector) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > TOL_TRACE {
            return Err(Error::InvalidState(format!("state vector norm {norm}")));
        }
        Ok(Self(projector(psi)))
    }

    /// `|index⟩⟨index|`.
    pub fn basis(dim: usize, index: usize) -> Self {
        Self(projector(&basis_vector(dim, index)))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn purity(&self) -> f64 {
        (&self.0 * &self.0).trace().re
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix(tensor_product(&self.0, &other.0))
    }
}

/// Kronecker product `a ⊗ b`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Which factor of a bipartite space to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factor {
    First,
    Second,
}

/// Traces out one factor of a bipartite operator on a `dims.0 × dims.1`
/// dimensional space.
pub fn partial_trace(
    m: &ComplexMatrix,
    dims: (usize, usize),
    keep: Factor,
) -> Result<ComplexMatrix> {
    let (da, db) = dims;
    if da == 0 || db == 0 || m.nrows() != da * db || m.ncols() != da * db {
        return Err(Error::DimensionMismatch(format!(
            "partial trace of a {}x{} matrix over dims ({da}, {db})",
            m.nrows(),
            m.ncols()
        )));
    }
    let out = match keep {
        Factor::First => ComplexMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()
        }),
        Factor::Second => ComplexMatrix::from_fn(db, db, |i, j| {
            (0..da).map(|k| m[(k * db + i, k * db + j)]).sum()
        }),
    };
    Ok(out)
}

/// `½‖a − b‖₁`, clamped to `[0, 1]`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    check_same_dim(a.dim(), b.dim(), "trace distance")?;
    let diff = hermitian_part(&(a.matrix() - b.matrix()));
    let sum: f64 = eigenvalues(&diff).iter().map(|v| v.abs()).sum();
    Ok((0.5 * sum).clamp(0.0, 1.0))
}

/// `Tr[ρ Q]`, rejecting a non-negligible imaginary part.
pub fn expectation(obs: &HermitianObservable, state: &DensityMatrix) -> Result<f64> {
    check_same_dim(obs.dim(), state.dim(), "expectation")?;
    let value = trace_of_product(state.matrix(), obs.matrix());
    if value.im.abs() > TOL_HERM {
        return Err(Error::ComplexExpectation { imag: value.im });
    }
    Ok(value.re)
}

/// `Tr[a b]` without forming the product.
pub(crate) fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    })
}

/// Seeded sample from the normalized `G G†` ensemble.
pub fn random_density_matrix(dim: usize, seed: u64) -> DensityMatrix {
    assert!(dim >= 1, "dimension must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = gaussian_matrix(dim, dim, &mut rng);
    let gg = &g * g.adjoint();
    let trace = gg.trace().re;
    DensityMatrix(hermitian_part(&(gg / C64::new(trace, 0.0))))
}

/// Seeded Haar-random pure state.
pub fn random_pure_state(dim: usize, seed: u64) -> StateVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = gaussian_matrix(dim, 1, &mut rng);
    let v = StateVector::from_column_slice(g.as_slice());
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

/// `rows × cols` matrix with orthonormal columns (Haar measure), from the QR
/// decomposition of a complex Gaussian matrix with the phase of `R`'s
/// diagonal removed.
pub fn random_isometry(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    assert!(cols <= rows, "isometry needs cols <= rows");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = gaussian_matrix(rows, cols, &mut rng);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let phases: Vec<C64> = (0..cols)
        .map(|i| {
            let d = r[(i, i)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                ONE
            }
        })
        .collect();
    q.scale_columns(&phases)
}

pub fn random_unitary(dim: usize, seed: u64) -> UnitaryOperator {
    UnitaryOperator(random_isometry(dim, dim, seed))
}

/// Seeded random Hermitian matrix `(G + G†)/2`.
pub fn random_hermitian(dim: usize, seed: u64) -> HermitianObservable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = gaussian_matrix(dim, dim, &mut rng);
    HermitianObservable(hermitian_part(&g))
}

/// Eigenvalues in ascending order with matching eigenvector columns.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Eigen {
    /// `V diag(λ) V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let diag: Vec<C64> = self.values.iter().map(|&v| C64::new(v, 0.0)).collect();
        self.vectors.scale_columns(&diag) * self.vectors.adjoint()
    }
}

pub fn eigendecompose(m: &HermitianObservable) -> Eigen {
    eigh(m.matrix())
}

/// Hermitian eigendecomposition of a matrix already known to be Hermitian.
pub(crate) fn eigh(m: &ComplexMatrix) -> Eigen {
    let se = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(m.nrows(), order.len(), |r, c| {
        se.eigenvectors[(r, order[c])]
    });
    Eigen { values, vectors }
}

pub(crate) fn eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Returns the state with its `dim`-dimensional structure checked against a
/// composite `d × d` layout, giving back `d`.
pub(crate) fn square_root_dim(dim: usize) -> Result<usize> {
    let d = (dim as f64).sqrt().round() as usize;
    if d * d != dim {
        return Err(Error::DimensionMismatch(format!(
            "dimension {dim} is not a perfect square"
        )));
    }
    Ok(d)
}

trait ScaleColumns {
    fn scale_columns(&self, factors: &[C64]) -> ComplexMatrix;
}

impl ScaleColumns for ComplexMatrix {
    fn scale_columns(&self, factors: &[C64]) -> ComplexMatrix {
        let mut out = self.clone();
        for (j, f) in factors.iter().enumerate() {
            for v in out.column_mut(j).iter_mut() {
                *v *= *f;
            }
        }
        out
    }
}
