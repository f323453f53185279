//! The full measurement protocol: one battery-assisted round per charge,
//! work bookkeeping, reconstruction from the recorded work, and undoing
//! each round.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::battery::{
    battery_position_distribution_mixed, channel_epsilon, gaussian_battery,
    initial_position_distribution, reduced_channel, sample_work_estimate, work_cost,
    BatteryWavefunction, MomentumGrid,
};
use crate::charges::{build_charge_set, ChargeLabel};
use crate::error::{Error, Result};
use crate::measurement::{
    build_measurement_unitary, ideal_measure, initial_sa_state, reconstruct_state_with_tolerance,
    recover, ChargeDeltaRecord, TOL_RECONSTRUCT,
};
use crate::quantum::{trace_distance, DensityMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// The pair evolves by exactly `U_SA`.
    Ideal,
    /// The pair evolves by the reduced channel of a Gaussian battery.
    Battery,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolConfig {
    pub d: usize,
    pub mode: Mode,
    /// Battery momentum width.
    pub s: f64,
    pub gamma: f64,
    /// `None` picks [`MomentumGrid::for_width`] for each width.
    pub grid: Option<MomentumGrid>,
    pub seed: u64,
    /// When set (battery mode only), each round's work is estimated from
    /// this many sampled battery positions instead of exact accounting.
    pub samples: Option<u64>,
}

impl ProtocolConfig {
    pub fn ideal(d: usize) -> Self {
        Self {
            d,
            mode: Mode::Ideal,
            s: 0.0,
            gamma: 1.0,
            grid: None,
            seed: 0,
            samples: None,
        }
    }

    pub fn battery(d: usize, s: f64) -> Self {
        Self {
            mode: Mode::Battery,
            s,
            ..Self::ideal(d)
        }
    }

    pub fn grid(&self) -> Result<MomentumGrid> {
        match self.grid {
            Some(g) => Ok(g),
            None => MomentumGrid::for_width(self.s),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::InvalidArgument(format!(
                "d must be >= 2, got {}",
                self.d
            )));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if self.mode == Mode::Battery && !(self.s.is_finite() && self.s > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "battery width must be positive, got {}",
                self.s
            )));
        }
        if self.samples == Some(0) {
            return Err(Error::InvalidArgument("samples must be positive".into()));
        }
        Ok(())
    }

    fn build_battery(&self) -> Result<Option<BatteryWavefunction>> {
        match self.mode {
            Mode::Ideal => Ok(None),
            Mode::Battery => gaussian_battery(self.grid()?, self.s, self.gamma).map(Some),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkEntry {
    pub label: ChargeLabel,
    /// Charge change recorded on the battery side.
    pub work: f64,
    /// Trace distance of the realized pair state to the ideal one.
    pub epsilon: f64,
    pub n_samples: Option<u64>,
    pub stderr: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkLedger {
    pub d: usize,
    pub mode: Mode,
    pub s: f64,
    pub gamma: f64,
    pub entries: Vec<WorkEntry>,
}

impl WorkLedger {
    /// Charge deltas on the pair, `−work` per entry.
    pub fn charge_deltas(&self) -> Vec<ChargeDeltaRecord> {
        self.entries
            .iter()
            .map(|e| ChargeDeltaRecord {
                label: e.label,
                delta: -e.work,
            })
            .collect()
    }

    pub fn max_epsilon(&self) -> f64 {
        self.entries.iter().map(|e| e.epsilon).fold(0.0, f64::max)
    }

    pub fn get(&self, label: &ChargeLabel) -> Option<&WorkEntry> {
        self.entries.iter().find(|e| &e.label == label)
    }
}

/// Everything one run of the protocol produces.
#[derive(Clone, Debug)]
pub struct ProtocolRun {
    pub ledger: WorkLedger,
    pub reconstructed: DensityMatrix,
    /// Pair state after undoing the last round.
    pub recovered_sa: DensityMatrix,
    /// Per round, trace distance between the undone pair state and
    /// `ρ_S ⊗ |0⟩⟨0|`.
    pub recovery_errors: Vec<f64>,
}

struct Round {
    entry: WorkEntry,
    recovered: DensityMatrix,
    recovery_error: f64,
}

fn run_round(
    rho_s: &DensityMatrix,
    config: &ProtocolConfig,
    battery: Option<&BatteryWavefunction>,
    index: usize,
    label: ChargeLabel,
    charge: &crate::quantum::HermitianObservable,
) -> Result<Round> {
    let initial = initial_sa_state(rho_s);
    let u = build_measurement_unitary(config.d)?;
    let sigma = match battery {
        None => ideal_measure(rho_s)?,
        Some(b) => reduced_channel(&initial, &u, charge, b)?,
    };
    let epsilon = channel_epsilon(&sigma, rho_s)?;
    let exact_work = work_cost(&initial, &sigma, charge)?;
    let (work, n_samples, stderr) = match (battery, config.samples) {
        (Some(b), Some(n)) => {
            let before = initial_position_distribution(b)?;
            let after = battery_position_distribution_mixed(&initial, b, &u, charge)?;
            let seed = config.seed.wrapping_add(index as u64);
            let est = sample_work_estimate(&after, n, seed, b.gamma(), before.mean())?;
            (est.estimate, Some(n), Some(est.stderr))
        }
        _ => (exact_work, None, None),
    };
    let recovered = recover(&sigma)?;
    let recovery_error = trace_distance(&recovered, &initial)?;
    Ok(Round {
        entry: WorkEntry {
            label,
            work,
            epsilon,
            n_samples,
            stderr,
        },
        recovered,
        recovery_error,
    })
}

/// Runs one round per charge (in canonical order), then reconstructs `ρ_S`
/// from the recorded work.
pub fn run_protocol(rho_s: &DensityMatrix, config: &ProtocolConfig) -> Result<ProtocolRun> {
    config.validate()?;
    if rho_s.dim() != config.d {
        return Err(Error::DimensionMismatch(format!(
            "state has dimension {} but config says d = {}",
            rho_s.dim(),
            config.d
        )));
    }
    let charges = build_charge_set(config.d)?;
    let battery = config.build_battery()?;
    let rounds: Vec<Round> = charges
        .iter()
        .collect::<Vec<_>>()
        .par_iter()
        .enumerate()
        .map(|(i, (label, q))| run_round(rho_s, config, battery.as_ref(), i, *label, q))
        .collect::<Result<_>>()?;

    let ledger = WorkLedger {
        d: config.d,
        mode: config.mode,
        s: config.s,
        gamma: config.gamma,
        entries: rounds.iter().map(|r| r.entry.clone()).collect(),
    };
    let reconstructed = reconstruct_state_with_tolerance(&ledger.charge_deltas(), TOL_RECONSTRUCT)?;
    let recovery_errors = rounds.iter().map(|r| r.recovery_error).collect();
    let recovered_sa = rounds
        .into_iter()
        .last()
        .map(|r| r.recovered)
        .expect("charge set is never empty");
    Ok(ProtocolRun {
        ledger,
        reconstructed,
        recovered_sa,
        recovery_errors,
    })
}

/// Sampled and exact work for one charge round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledWork {
    pub label: ChargeLabel,
    pub estimate: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub exact_work: f64,
}

/// Runs the battery round for a single charge and estimates its work from
/// `n` sampled battery readouts seeded with `config.seed`.
pub fn sample_charge_work(
    rho_s: &DensityMatrix,
    label: ChargeLabel,
    n: u64,
    config: &ProtocolConfig,
) -> Result<SampledWork> {
    config.validate()?;
    if config.mode != Mode::Battery {
        return Err(Error::InvalidArgument("sampling needs battery mode".into()));
    }
    if rho_s.dim() != config.d {
        return Err(Error::DimensionMismatch(format!(
            "state has dimension {} but config says d = {}",
            rho_s.dim(),
            config.d
        )));
    }
    let charge = crate::charges::charge_observable(config.d, label)?;
    let battery = gaussian_battery(config.grid()?, config.s, config.gamma)?;
    let initial = initial_sa_state(rho_s);
    let u = build_measurement_unitary(config.d)?;
    let sigma = reduced_channel(&initial, &u, &charge, &battery)?;
    let exact_work = work_cost(&initial, &sigma, &charge)?;
    let before = initial_position_distribution(&battery)?;
    let after = battery_position_distribution_mixed(&initial, &battery, &u, &charge)?;
    let est = sample_work_estimate(&after, n, config.seed, battery.gamma(), before.mean())?;
    Ok(SampledWork {
        label,
        estimate: est.estimate,
        stderr: est.stderr,
        n_samples: est.n_samples,
        exact_work,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub s: f64,
    pub max_epsilon: f64,
    pub reconstruction_error: f64,
}

/// Runs the protocol at each battery width. In ideal mode every row is the
/// `s → 0` limit.
pub fn epsilon_sweep(
    rho_s: &DensityMatrix,
    s_values: &[f64],
    config: &ProtocolConfig,
) -> Result<Vec<SweepRow>> {
    if let Some(bad) = s_values.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "sweep widths must be positive, got {bad}"
        )));
    }
    s_values
        .iter()
        .map(|&s| {
            let cfg = ProtocolConfig {
                s,
                samples: None,
                ..config.clone()
            };
            let run = run_protocol(rho_s, &cfg)?;
            Ok(SweepRow {
                s,
                max_epsilon: run.ledger.max_epsilon(),
                reconstruction_error: trace_distance(&run.reconstructed, rho_s)?,
            })
        })
        .collect()
}

/// CSV with header `s,max_epsilon,reconstruction_error`, 17 significant digits.
pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("s,max_epsilon,reconstruction_error\n");
    for r in rows {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e}\n",
            r.s, r.max_epsilon, r.reconstruction_error
        ));
    }
    out
}
