//! The ideal measurement layer: the generalized CNOT `U_SA`, exact charge
//! deltas, state reconstruction from deltas, and undoing the interaction.
//!
//! The apparatus always starts in `|0⟩_A`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::charges::{canonical_labels, charge_observable, z_prefactor, ChargeAxis, ChargeLabel};
use crate::error::{Error, Result};
use crate::quantum::{
    eigh, expectation, hermitian_part, square_root_dim, ComplexMatrix, DensityMatrix,
    UnitaryOperator, C64, ONE,
};

/// Eigenvalues of a reconstruction down to `-TOL_RECONSTRUCT` are clipped to
/// zero; anything more negative is an error.
pub const TOL_RECONSTRUCT: f64 = 1e-6;

/// A change of one charge's expectation value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChargeDeltaRecord {
    pub label: ChargeLabel,
    pub delta: f64,
}

/// `Σ_m |m⟩⟨m|_S ⊗ Σ_n |(m+n) mod d⟩⟨n|_A`. For `d = 2` this is CNOT with
/// the system as control.
pub fn build_measurement_unitary(d: usize) -> Result<UnitaryOperator> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "measurement unitary needs d >= 2, got {d}"
        )));
    }
    let mut u = ComplexMatrix::zeros(d * d, d * d);
    for m in 0..d {
        for n in 0..d {
            u[(m * d + (m + n) % d, m * d + n)] = ONE;
        }
    }
    UnitaryOperator::new(u)
}

/// `ρ_S ⊗ |0⟩⟨0|_A`.
pub fn initial_sa_state(rho_s: &DensityMatrix) -> DensityMatrix {
    rho_s.tensor(&DensityMatrix::basis(rho_s.dim(), 0))
}

/// `U_SA (ρ_S ⊗ |0⟩⟨0|_A) U_SA†`.
pub fn ideal_measure(rho_s: &DensityMatrix) -> Result<DensityMatrix> {
    let u = build_measurement_unitary(rho_s.dim())?;
    u.conjugate(&initial_sa_state(rho_s))
}

/// `Tr[ρ_f Q] − Tr[ρ_i Q]` with both expectations computed explicitly.
pub fn charge_delta(rho_s: &DensityMatrix, label: ChargeLabel) -> Result<ChargeDeltaRecord> {
    let d = rho_s.dim();
    let q = charge_observable(d, label)?;
    let initial = initial_sa_state(rho_s);
    let fin = ideal_measure(rho_s)?;
    let delta = expectation(&q, &fin)? - expectation(&q, &initial)?;
    Ok(ChargeDeltaRecord { label, delta })
}

/// The same delta from the closed-form expressions in the state's matrix
/// elements `p_mn`:
///
/// * `Δq_z^{mm} = √(2/(m(m+1))) (Σ_{k=1}^{m−1} p_kk − m p_mm)`
/// * `Δq_x^{mn} = p_mn + p_nm`
/// * `Δq_y^{mn} = i p_mn − i p_nm`
///
/// The `z` sum starts at `k = 1` because the `p_00` contribution is already
/// present in the initial state `ρ_S ⊗ |0⟩⟨0|`.
pub fn charge_delta_closed_form(
    rho_s: &DensityMatrix,
    label: ChargeLabel,
) -> Result<ChargeDeltaRecord> {
    let d = rho_s.dim();
    if d < 2 {
        return Err(Error::InvalidArgument(format!("need d >= 2, got {d}")));
    }
    label.validate(d)?;
    let p = rho_s.matrix();
    let (m, n) = (label.m, label.n);
    let delta = match label.axis {
        ChargeAxis::Z => {
            let lower: f64 = (1..m).map(|k| p[(k, k)].re).sum();
            z_prefactor(m) * (lower - m as f64 * p[(m, m)].re)
        }
        ChargeAxis::X => (p[(m, n)] + p[(n, m)]).re,
        ChargeAxis::Y => (C64::i() * p[(m, n)] - C64::i() * p[(n, m)]).re,
    };
    Ok(ChargeDeltaRecord { label, delta })
}

/// Deltas for every charge, in canonical order.
pub fn all_charge_deltas(rho_s: &DensityMatrix) -> Result<Vec<ChargeDeltaRecord>> {
    canonical_labels(rho_s.dim())
        .into_iter()
        .map(|label| charge_delta(rho_s, label))
        .collect()
}

/// Inverts a full set of `d² − 1` deltas back into `ρ_S`.
///
/// Diagonal entries come from the `z` deltas in ascending `m`, `p_00` from
/// normalization, and off-diagonals from `p_mn = (Δq_x − iΔq_y)/2`.
pub fn reconstruct_state(deltas: &[ChargeDeltaRecord]) -> Result<DensityMatrix> {
    reconstruct_state_with_tolerance(deltas, TOL_RECONSTRUCT)
}

pub(crate) fn reconstruct_state_with_tolerance(
    deltas: &[ChargeDeltaRecord],
    tol: f64,
) -> Result<DensityMatrix> {
    let d = square_root_dim(deltas.len() + 1).map_err(|_| {
        Error::InvalidArgument(format!("{} deltas is not d² − 1 for any d", deltas.len()))
    })?;
    if d < 2 {
        return Err(Error::InvalidArgument("need at least one delta".into()));
    }
    let by_label: HashMap<ChargeLabel, f64> = deltas.iter().map(|r| (r.label, r.delta)).collect();
    let get = |label: ChargeLabel| {
        by_label
            .get(&label)
            .copied()
            .ok_or_else(|| Error::MissingLabel(label.to_string()))
    };

    let mut p = ComplexMatrix::zeros(d, d);
    let mut lower_sum = 0.0;
    for m in 1..d {
        let dz = get(ChargeLabel::z(m))?;
        let pmm = (lower_sum - dz / z_prefactor(m)) / m as f64;
        p[(m, m)] = C64::new(pmm, 0.0);
        lower_sum += pmm;
    }
    p[(0, 0)] = C64::new(1.0 - lower_sum, 0.0);
    for m in 0..d {
        for n in m + 1..d {
            let dx = get(ChargeLabel::x(m, n))?;
            let dy = get(ChargeLabel::y(m, n))?;
            let pmn = C64::new(dx, -dy) / 2.0;
            p[(m, n)] = pmn;
            p[(n, m)] = pmn.conj();
        }
    }
    project_to_state(p, tol)
}

/// Clips eigenvalues in `[-tol, 0)` and renormalizes.
pub(crate) fn project_to_state(p: ComplexMatrix, tol: f64) -> Result<DensityMatrix> {
    let p = hermitian_part(&p);
    let eig = eigh(&p);
    let min = eig.values[0];
    if min < -tol {
        return Err(Error::NotPositive { eigenvalue: min });
    }
    if min >= 0.0 {
        return DensityMatrix::new(p);
    }
    let clipped: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    let rebuilt = crate::quantum::Eigen {
        values: clipped.iter().map(|v| v / total).collect(),
        vectors: eig.vectors,
    }
    .reconstruct();
    DensityMatrix::new(hermitian_part(&rebuilt))
}

/// `U_SA† σ_SA U_SA`.
pub fn recover(sigma_sa: &DensityMatrix) -> Result<DensityMatrix> {
    let d = square_root_dim(sigma_sa.dim())?;
    build_measurement_unitary(d)?.adjoint().conjugate(sigma_sa)
}
