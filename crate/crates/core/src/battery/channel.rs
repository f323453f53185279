//! Battery-mediated evolution of the system–apparatus pair.
//!
//! The global unitary is block diagonal in the battery momentum,
//! `U_SAW = ∫ dp V(p) ⊗ |p⟩⟨p|`, with
//! `V(p) = e^{−ipH/γ} U e^{ipH/γ}`. Writing this through `H`'s eigenbasis
//! `{|i⟩, E_i}` gives `V(p)_ij = u_ij e^{−ip(E_i − E_j)/γ}`, which is the
//! eigenbasis form with battery displacements `a_i = −E_i/γ` and needs no
//! choice of basis inside degenerate eigenspaces. Tracing out the battery
//! leaves the mixture of unitaries `σ = ∫ dp μ(p) V(p) ρ V(p)†`.

use crate::battery::BatteryWavefunction;
use crate::error::{Error, Result};
use crate::measurement::ideal_measure;
use crate::quantum::{
    eigendecompose, expectation, trace_distance, ComplexMatrix, DensityMatrix, HermitianObservable,
    UnitaryOperator, C64,
};

/// Weight deficit allowed before the battery counts as spilling off the grid.
pub const TOL_WEIGHT: f64 = 1e-8;

/// `U` and `ρ`-independent data for evaluating `V(p)` at many momenta,
/// expressed in the eigenbasis of `H`.
pub(crate) struct ConjugationFrame {
    basis: ComplexMatrix,
    /// `(E_i − E_j)/γ`
    frequencies: ComplexMatrix,
    u_in_frame: ComplexMatrix,
}

impl ConjugationFrame {
    pub(crate) fn new(u: &UnitaryOperator, h: &HermitianObservable, gamma: f64) -> Result<Self> {
        if u.dim() != h.dim() {
            return Err(Error::DimensionMismatch(format!(
                "unitary is {0}x{0} but charge is {1}x{1}",
                u.dim(),
                h.dim()
            )));
        }
        if !(gamma.is_finite() && gamma != 0.0) {
            return Err(Error::InvalidArgument(format!(
                "gamma must be non-zero, got {gamma}"
            )));
        }
        let eig = eigendecompose(h);
        let n = h.dim();
        let frequencies = ComplexMatrix::from_fn(n, n, |i, j| {
            C64::new((eig.values[i] - eig.values[j]) / gamma, 0.0)
        });
        let u_in_frame = eig.vectors.adjoint() * u.matrix() * &eig.vectors;
        Ok(Self {
            basis: eig.vectors,
            frequencies,
            u_in_frame,
        })
    }

    pub(crate) fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub(crate) fn to_frame(&self, m: &ComplexMatrix) -> ComplexMatrix {
        self.basis.adjoint() * m * &self.basis
    }

    pub(crate) fn out_of_frame(&self, m: &ComplexMatrix) -> ComplexMatrix {
        &self.basis * m * self.basis.adjoint()
    }

    pub(crate) fn to_frame_vector(
        &self,
        v: &crate::quantum::StateVector,
    ) -> crate::quantum::StateVector {
        self.basis.adjoint() * v
    }

    /// `V(p)` in the eigenbasis of `H`.
    pub(crate) fn v_in_frame(&self, p: f64) -> ComplexMatrix {
        self.u_in_frame.zip_map(&self.frequencies, |u, w| {
            u * C64::from_polar(1.0, -p * w.re)
        })
    }
}

/// `V(p) = e^{−ipH/γ} U e^{ipH/γ}`; `V(0) = U`.
pub fn conjugated_unitary(
    u: &UnitaryOperator,
    h: &HermitianObservable,
    gamma: f64,
    p: f64,
) -> Result<UnitaryOperator> {
    if p == 0.0 {
        if u.dim() != h.dim() {
            return Err(Error::DimensionMismatch("unitary and charge".into()));
        }
        return Ok(u.clone());
    }
    let frame = ConjugationFrame::new(u, h, gamma)?;
    UnitaryOperator::new(frame.out_of_frame(&frame.v_in_frame(p)))
}

/// Reduced state of the pair after the battery-assisted unitary, by
/// quadrature over the battery's momentum grid.
pub fn reduced_channel(
    rho: &DensityMatrix,
    u: &UnitaryOperator,
    h: &HermitianObservable,
    battery: &BatteryWavefunction,
) -> Result<DensityMatrix> {
    if rho.dim() != u.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state is {0}x{0} but unitary is {1}x{1}",
            rho.dim(),
            u.dim()
        )));
    }
    let frame = ConjugationFrame::new(u, h, battery.gamma())?;
    let weights = battery.weights();
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > TOL_WEIGHT {
        return Err(Error::Containment(format!(
            "quadrature weights sum to {total}"
        )));
    }
    // Nodes this far below the peak cannot move the result at double precision.
    let cutoff = weights.iter().copied().fold(0.0, f64::max) * 1e-20;

    let rho_in_frame = frame.to_frame(rho.matrix());
    let n = rho.dim();
    let mut acc = ComplexMatrix::zeros(n, n);
    for (w, p) in weights.iter().zip(battery.grid().points()) {
        if *w <= cutoff {
            continue;
        }
        let v = frame.v_in_frame(p);
        acc += (&v * &rho_in_frame * v.adjoint()) * C64::new(*w, 0.0);
    }
    let mut sigma = frame.out_of_frame(&acc);
    let trace = sigma.trace().re;
    if (trace - 1.0).abs() > TOL_WEIGHT {
        return Err(Error::Containment(format!(
            "reduced state has trace {trace}"
        )));
    }
    sigma /= C64::new(trace, 0.0);
    DensityMatrix::from_computed(sigma)
}

/// Trace distance between a realized pair state and the ideal measurement
/// output for `rho_s`.
pub fn channel_epsilon(sigma_sa: &DensityMatrix, rho_s: &DensityMatrix) -> Result<f64> {
    trace_distance(sigma_sa, &ideal_measure(rho_s)?)
}

/// Battery-side work `−(Tr[σH] − Tr[ρH])`.
pub fn work_cost(
    rho_initial: &DensityMatrix,
    sigma: &DensityMatrix,
    h: &HermitianObservable,
) -> Result<f64> {
    Ok(-(expectation(h, sigma)? - expectation(h, rho_initial)?))
}
