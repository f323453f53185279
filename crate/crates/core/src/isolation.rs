//! Information isolation: a unitary is isolated with respect to a set of
//! charges when it commutes with every one of them, so no charge can flow
//! to an outside observer.

use serde::{Deserialize, Serialize};

use crate::charges::ChargeSet;
use crate::error::{Error, Result};
use crate::quantum::{expectation, DensityMatrix, HermitianObservable, UnitaryOperator};

pub const DEFAULT_ISOLATION_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Isolated,
    Leaky,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsolationEntry {
    pub name: String,
    /// Frobenius norm of `[U, Q]`.
    pub commutator_norm: f64,
    /// Charge change for the state supplied to the report, if any.
    pub delta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsolationReport {
    pub tol: f64,
    pub verdict: Verdict,
    pub charges: Vec<IsolationEntry>,
}

impl IsolationReport {
    pub fn is_isolated(&self) -> bool {
        self.verdict == Verdict::Isolated
    }

    pub fn commutator_norms(&self) -> Vec<f64> {
        self.charges.iter().map(|c| c.commutator_norm).collect()
    }
}

fn check_dims(u: &UnitaryOperator, charges: &[HermitianObservable]) -> Result<()> {
    if let Some(q) = charges.iter().find(|q| q.dim() != u.dim()) {
        return Err(Error::DimensionMismatch(format!(
            "unitary is {0}x{0} but a charge is {1}x{1}",
            u.dim(),
            q.dim()
        )));
    }
    Ok(())
}

/// Commutator norms of `U` against each charge. Charges are named by
/// position; use [`check_charge_set`] for labelled output.
pub fn check_isolation(
    u: &UnitaryOperator,
    charges: &[HermitianObservable],
    tol: f64,
) -> Result<IsolationReport> {
    check_dims(u, charges)?;
    let entries: Vec<IsolationEntry> = charges
        .iter()
        .enumerate()
        .map(|(i, q)| {
            let comm = u.matrix() * q.matrix() - q.matrix() * u.matrix();
            IsolationEntry {
                name: i.to_string(),
                commutator_norm: comm.norm(),
                delta: None,
            }
        })
        .collect();
    let verdict = if entries.iter().all(|e| e.commutator_norm <= tol) {
        Verdict::Isolated
    } else {
        Verdict::Leaky
    };
    Ok(IsolationReport {
        tol,
        verdict,
        charges: entries,
    })
}

/// `Tr[UρU† Q] − Tr[ρ Q]` for each charge.
pub fn leak_profile(
    u: &UnitaryOperator,
    rho: &DensityMatrix,
    charges: &[HermitianObservable],
) -> Result<Vec<f64>> {
    check_dims(u, charges)?;
    let evolved = u.conjugate(rho)?;
    charges
        .iter()
        .map(|q| Ok(expectation(q, &evolved)? - expectation(q, rho)?))
        .collect()
}

/// [`check_isolation`] against a non-local charge set, labelled by charge,
/// with per-charge deltas when a state is given.
pub fn check_charge_set(
    u: &UnitaryOperator,
    set: &ChargeSet,
    tol: f64,
    state: Option<&DensityMatrix>,
) -> Result<IsolationReport> {
    let observables = set.observables();
    let mut report = check_isolation(u, &observables, tol)?;
    let deltas = state
        .map(|rho| leak_profile(u, rho, &observables))
        .transpose()?;
    for (i, (entry, label)) in report.charges.iter_mut().zip(set.labels()).enumerate() {
        entry.name = label.to_string();
        entry.delta = deltas.as_ref().map(|d| d[i]);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charges::build_charge_set;
    use crate::measurement::{build_measurement_unitary, initial_sa_state};
    use crate::quantum::{
        random_density_matrix, random_hermitian, random_unitary, ComplexMatrix, C64,
    };

    fn qubit_obs(entries: [f64; 4]) -> HermitianObservable {
        let e: Vec<C64> = entries.iter().map(|&v| C64::new(v, 0.0)).collect();
        HermitianObservable::new(ComplexMatrix::from_row_slice(2, 2, &e)).unwrap()
    }

    #[test]
    fn generator_evolution_is_isolated() {
        for seed in 0..5 {
            let q = random_hermitian(4, seed);
            let u = UnitaryOperator::evolution(&q, 0.3 + seed as f64);
            let report = check_isolation(&u, std::slice::from_ref(&q), 1e-10).unwrap();
            assert!(report.is_isolated(), "{:?}", report.commutator_norms());
            let rho = random_density_matrix(4, 10 + seed);
            let delta = leak_profile(&u, &rho, std::slice::from_ref(&q)).unwrap()[0];
            assert!(delta.abs() < 1e-10);
        }
    }

    #[test]
    fn measurement_unitary_leaks() {
        let set = build_charge_set(2).unwrap();
        let u = build_measurement_unitary(2).unwrap();
        let report = check_charge_set(&u, &set, DEFAULT_ISOLATION_TOL, None).unwrap();
        assert_eq!(report.verdict, Verdict::Leaky);
        assert_eq!(report.charges[0].name, "z:1:1");
    }

    #[test]
    fn identity_is_isolated() {
        let set = build_charge_set(3).unwrap();
        let report = check_charge_set(&UnitaryOperator::identity(9), &set, 1e-10, None).unwrap();
        assert!(report.is_isolated());
        assert!(report.commutator_norms().iter().all(|&n| n == 0.0));
    }

    #[test]
    fn energy_flip_example() {
        let (e0, gap) = (0.7, 1.3);
        let h = qubit_obs([e0, 0.0, 0.0, e0 + gap]);
        let flip = UnitaryOperator::new(qubit_obs([0.0, 1.0, 1.0, 0.0]).into_matrix()).unwrap();
        let delta = leak_profile(&flip, &DensityMatrix::basis(2, 0), &[h]).unwrap()[0];
        assert!((delta - gap).abs() < 1e-12);
    }

    #[test]
    fn phase_flip_example() {
        let h = qubit_obs([0.3, 0.0, 0.0, 1.1]);
        let h_prime = qubit_obs([0.0, 1.0, 1.0, 0.0]);
        let z = UnitaryOperator::new(qubit_obs([1.0, 0.0, 0.0, -1.0]).into_matrix()).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = DensityMatrix::from_pure(&crate::quantum::StateVector::from_vec(vec![
            C64::new(s, 0.0),
            C64::new(s, 0.0),
        ]))
        .unwrap();
        let deltas = leak_profile(&z, &plus, &[h, h_prime]).unwrap();
        assert!(deltas[0].abs() < 1e-12);
        assert!((deltas[1] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_never_leaks() {
        let set = build_charge_set(2).unwrap();
        let u = random_unitary(4, 3);
        let deltas =
            leak_profile(&u, &DensityMatrix::maximally_mixed(4), &set.observables()).unwrap();
        assert!(deltas.iter().all(|d| d.abs() < 1e-12));
    }

    #[test]
    fn report_carries_deltas() {
        let set = build_charge_set(2).unwrap();
        let u = build_measurement_unitary(2).unwrap();
        let rho = initial_sa_state(&random_density_matrix(2, 0));
        let report = check_charge_set(&u, &set, 1e-10, Some(&rho)).unwrap();
        assert!(report.charges.iter().all(|c| c.delta.is_some()));
    }

    #[test]
    fn norms_invariant_under_common_conjugation() {
        let set = build_charge_set(2).unwrap();
        let u = random_unitary(4, 1);
        let w = random_unitary(4, 2);
        let conj = |m: &ComplexMatrix| w.matrix() * m * w.matrix().adjoint();
        let rotated_u = UnitaryOperator::new(conj(u.matrix())).unwrap();
        let rotated: Vec<HermitianObservable> = set
            .observables()
            .iter()
            .map(|q| {
                HermitianObservable::new(crate::quantum::hermitian_part(&conj(q.matrix()))).unwrap()
            })
            .collect();
        let a = check_isolation(&u, &set.observables(), 1e-10).unwrap();
        let b = check_isolation(&rotated_u, &rotated, 1e-10).unwrap();
        for (x, y) in a.commutator_norms().iter().zip(b.commutator_norms()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let u = UnitaryOperator::identity(3);
        assert!(check_isolation(&u, &[HermitianObservable::identity(4)], 1e-10).is_err());
    }
}
