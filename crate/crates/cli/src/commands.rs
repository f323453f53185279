use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thermomeasure::battery::{
    epsilon_sweep, run_protocol, sample_charge_work, sweep_to_csv, Mode, SampledWork, WorkLedger,
};
use thermomeasure::channel::{
    choi_distance, tomograph_channel, ChannelJson, ChoiJson, ChoiMatrix, QuantumChannel,
};
use thermomeasure::charges::{build_charge_set, ChargeLabel};
use thermomeasure::isolation::{
    check_isolation, leak_profile, IsolationReport, DEFAULT_ISOLATION_TOL,
};
use thermomeasure::json::MatrixJson;
use thermomeasure::quantum::{trace_distance, DensityMatrix, HermitianObservable, UnitaryOperator};

use crate::config::{Common, Settings};
use crate::output::{emit, to_json};
use crate::CliError;

const DEFAULT_SWEEP: [f64; 6] = [0.3, 0.1, 0.03, 0.01, 0.003, 0.001];
const DEFAULT_SAMPLES: u64 = 100_000;

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn read_state(path: &Path) -> Result<DensityMatrix, CliError> {
    let m: MatrixJson = read_json(path)?;
    Ok(DensityMatrix::new(m.to_matrix()?)?)
}

fn write_json<T: Serialize>(settings: &Settings, value: &T) -> Result<(), CliError> {
    let text = to_json(value).map_err(thermomeasure::Error::from)?;
    write_text(settings, &text)
}

fn write_text(settings: &Settings, text: &str) -> Result<(), CliError> {
    emit(settings.out.as_deref(), text)
        .map_err(|e| CliError::Input(format!("cannot write output: {e}")))
}

#[derive(Serialize, Deserialize)]
struct ChargeEntry {
    label: String,
    matrix: MatrixJson,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChargeFile {
    d: usize,
    charges: Vec<ChargeEntry>,
}

pub fn charges(common: Common) -> Result<(), CliError> {
    let settings = Settings::resolve(common)?;
    let d = settings
        .d
        .ok_or_else(|| CliError::Input("charges needs --d".into()))?;
    let set = build_charge_set(d)?;
    let mut entries = Vec::with_capacity(set.len());
    for (label, q) in set.iter() {
        let trace = q.matrix().trace().norm();
        if trace > 1e-12 {
            return Err(CliError::Input(format!(
                "charge {label} has trace {trace:e}"
            )));
        }
        entries.push(ChargeEntry {
            label: label.to_string(),
            matrix: MatrixJson::from(q.matrix()),
        });
    }
    write_json(
        &settings,
        &ChargeFile {
            d,
            charges: entries,
        },
    )
}

#[derive(Serialize)]
struct RecoveryEntry {
    label: ChargeLabel,
    error: f64,
}

#[derive(Serialize)]
struct MeasureReport {
    ledger: WorkLedger,
    max_epsilon: f64,
    reconstructed: MatrixJson,
    reconstruction_error: f64,
    recovery_errors: Vec<RecoveryEntry>,
}

pub fn measure(state: &Path, samples: Option<u64>, common: Common) -> Result<(), CliError> {
    let settings = Settings::resolve(common)?;
    let rho = read_state(state)?;
    let mut config = settings.protocol(rho.dim(), Mode::Ideal)?;
    config.samples = samples.or(settings.file.samples);
    if config.samples.is_some() && config.mode != Mode::Battery {
        return Err(CliError::Input("--samples needs --mode battery".into()));
    }
    config.validate()?;
    let run = run_protocol(&rho, &config)?;
    let report = MeasureReport {
        max_epsilon: run.ledger.max_epsilon(),
        reconstructed: MatrixJson::from(run.reconstructed.matrix()),
        reconstruction_error: trace_distance(&run.reconstructed, &rho)?,
        recovery_errors: run
            .ledger
            .entries
            .iter()
            .zip(&run.recovery_errors)
            .map(|(e, &error)| RecoveryEntry {
                label: e.label,
                error,
            })
            .collect(),
        ledger: run.ledger,
    };
    write_json(&settings, &report)
}

pub fn sweep(state: &Path, s_list: Option<Vec<f64>>, common: Common) -> Result<(), CliError> {
    let settings = Settings::resolve(common)?;
    let rho = read_state(state)?;
    let s_values = s_list
        .or_else(|| settings.file.s_list.clone())
        .unwrap_or_else(|| DEFAULT_SWEEP.to_vec());
    if s_values.is_empty() {
        return Err(CliError::Input("empty --s-list".into()));
    }
    let config = settings.protocol(rho.dim(), Mode::Battery)?;
    let rows = epsilon_sweep(&rho, &s_values, &config)?;
    write_text(&settings, &sweep_to_csv(&rows))
}

pub fn isolation(
    unitary: &Path,
    charges: Option<&Path>,
    state: Option<&Path>,
    common: Common,
) -> Result<(), CliError> {
    let settings = Settings::resolve(common)?;
    let u_json: MatrixJson = read_json(unitary)?;
    let u = UnitaryOperator::new(u_json.to_matrix()?)?;
    let (names, observables) = match charges {
        Some(path) => {
            let file: ChargeFile = read_json(path)?;
            let mut names = Vec::new();
            let mut observables = Vec::new();
            for entry in file.charges {
                names.push(entry.label);
                observables.push(HermitianObservable::new(entry.matrix.to_matrix()?)?);
            }
            (names, observables)
        }
        None => {
            let d = match settings.d {
                Some(d) => d,
                None => (1..=u.dim()).find(|k| k * k == u.dim()).ok_or_else(|| {
                    CliError::Input("unitary dimension is not d², pass --charges".into())
                })?,
            };
            let set = build_charge_set(d)?;
            (
                set.labels().iter().map(ToString::to_string).collect(),
                set.observables(),
            )
        }
    };
    let tol = settings.tol.unwrap_or(DEFAULT_ISOLATION_TOL);
    let mut report: IsolationReport = check_isolation(&u, &observables, tol)?;
    let deltas = match state {
        Some(path) => Some(leak_profile(&u, &read_state(path)?, &observables)?),
        None => None,
    };
    for (i, (entry, name)) in report.charges.iter_mut().zip(names).enumerate() {
        entry.name = name;
        entry.delta = deltas.as_ref().map(|d| d[i]);
    }
    write_json(&settings, &report)
}

#[derive(Serialize)]
struct ChannelReport {
    choi: ChoiJson,
    max_epsilon: f64,
    raw_marginal_deviation: f64,
    warning: Option<String>,
    reference_distance: Option<f64>,
}

fn read_channel(path: &Path) -> Result<QuantumChannel, CliError> {
    let json: ChannelJson = read_json(path)?;
    Ok(QuantumChannel::try_from(&json)?)
}

pub fn channel(channel: &Path, reference: Option<&Path>, common: Common) -> Result<(), CliError> {
    let mut settings = Settings::resolve(common)?;
    let c = read_channel(channel)?;
    if let Some(d) = settings.d {
        if d != c.d() {
            return Err(CliError::Input(format!(
                "--d {d} does not match channel dimension {}",
                c.d()
            )));
        }
    }
    // --d names the channel dimension, not the d² protocol dimension.
    settings.d = None;
    let config = settings.protocol(c.d() * c.d(), Mode::Ideal)?;
    let tomo = tomograph_channel(&c, &config)?;
    let reference_distance = match reference {
        Some(path) => {
            let r = read_channel(path)?;
            Some(choi_distance(&tomo.choi, &ChoiMatrix::of_channel(&r)?)?)
        }
        None => None,
    };
    if let Some(w) = &tomo.warning {
        eprintln!("warning: {w}");
    }
    let report = ChannelReport {
        choi: ChoiJson::from(&tomo.choi),
        max_epsilon: tomo.run.ledger.max_epsilon(),
        raw_marginal_deviation: tomo.raw_marginal_deviation,
        warning: tomo.warning,
        reference_distance,
    };
    write_json(&settings, &report)
}

pub fn sample(
    state: &Path,
    label: Option<String>,
    n: Option<u64>,
    common: Common,
) -> Result<(), CliError> {
    let settings = Settings::resolve(common)?;
    let rho = read_state(state)?;
    let label: ChargeLabel = label
        .or_else(|| settings.file.label.clone())
        .unwrap_or_else(|| "z:1:1".into())
        .parse()?;
    let n = n.or(settings.file.n).unwrap_or(DEFAULT_SAMPLES);
    let config = settings.protocol(rho.dim(), Mode::Battery)?;
    let result: SampledWork = sample_charge_work(&rho, label, n, &config)?;
    write_json(&settings, &result)
}
