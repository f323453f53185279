//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion and exits non-zero if any failed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use thermomeasure::battery::{
    battery_position_distribution, conjugated_unitary, gaussian_battery,
    initial_position_distribution, reduced_channel, run_protocol, sample_charge_work, MomentumGrid,
    ProtocolConfig, ProtocolRun,
};
use thermomeasure::channel::{choi_distance, tomograph_channel, ChoiMatrix, QuantumChannel};
use thermomeasure::charges::{build_charge_set, canonical_labels, charge_observable, ChargeLabel};
use thermomeasure::isolation::{
    check_charge_set, check_isolation, leak_profile, DEFAULT_ISOLATION_TOL,
};
use thermomeasure::measurement::{build_measurement_unitary, charge_delta, initial_sa_state};
use thermomeasure::quantum::{
    basis_vector, expectation, max_abs, random_density_matrix, random_hermitian, random_pure_state,
    tensor_product, trace_distance, ComplexMatrix, DensityMatrix, HermitianObservable, StateVector,
    UnitaryOperator, C64,
};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn real_matrix(n: usize, entries: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_iterator(n, n, entries.iter().map(|&v| c(v, 0.0))).transpose()
}

type Check = fn() -> Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Qubit deltas against the closed forms written out from matrix entries.
fn criterion_1() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let rho = random_density_matrix(2, seed);
        let r = rho.matrix();
        let expected = [
            (ChargeLabel::z(1), -r[(1, 1)].re),
            (ChargeLabel::x(0, 1), (r[(0, 1)] + r[(1, 0)]).re),
            (
                ChargeLabel::y(0, 1),
                (c(0.0, 1.0) * r[(0, 1)] - c(0.0, 1.0) * r[(1, 0)]).re,
            ),
        ];
        for (label, want) in expected {
            let got = charge_delta(&rho, label).map_err(|e| e.to_string())?.delta;
            worst = worst.max((got - want).abs());
        }
    }
    ensure(worst < 1e-12, || format!("max deviation {worst:.3e}"))?;
    Ok(format!("max deviation {worst:.3e} over 100 states"))
}

fn criterion_2() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for d in 2..=4 {
        for seed in 0..100 {
            let rho = random_density_matrix(d, 1000 * d as u64 + seed);
            let run = run_protocol(&rho, &ProtocolConfig::ideal(d)).map_err(|e| e.to_string())?;
            worst = worst.max(trace_distance(&run.reconstructed, &rho).map_err(|e| e.to_string())?);
        }
    }
    ensure(worst < 1e-10, || format!("max trace distance {worst:.3e}"))?;
    Ok(format!("max trace distance {worst:.3e} over 300 states"))
}

const SWEEP: [f64; 6] = [0.3, 0.1, 0.03, 0.01, 0.003, 0.001];

fn sweep_runs(d: usize) -> Result<(DensityMatrix, Vec<ProtocolRun>), String> {
    let rho = random_density_matrix(d, 77 + d as u64);
    let runs = SWEEP
        .iter()
        .map(|&s| run_protocol(&rho, &ProtocolConfig::battery(d, s)).map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((rho, runs))
}

fn criterion_3() -> Result<String, String> {
    let mut summary = Vec::new();
    for d in [2, 3] {
        let (rho, runs) = sweep_runs(d)?;
        let eps: Vec<f64> = runs.iter().map(|r| r.ledger.max_epsilon()).collect();
        ensure(eps.windows(2).all(|w| w[1] < w[0]), || {
            format!("d={d}: max-ε not strictly decreasing: {eps:?}")
        })?;
        let last = *eps.last().unwrap();
        ensure(last < 1e-3, || format!("d={d}: final max-ε {last:.3e}"))?;
        let recon =
            trace_distance(&runs.last().unwrap().reconstructed, &rho).map_err(|e| e.to_string())?;
        ensure(recon < 1e-3, || {
            format!("d={d}: reconstruction error {recon:.3e}")
        })?;
        summary.push(format!(
            "d={d}: final max-ε {last:.3e}, reconstruction {recon:.3e}"
        ));
    }
    Ok(summary.join("; "))
}

fn criterion_4() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    let mut rounds = 0;
    for d in [2, 3] {
        let (_, runs) = sweep_runs(d)?;
        for run in &runs {
            for (entry, err) in run.ledger.entries.iter().zip(&run.recovery_errors) {
                worst = worst.max((entry.epsilon - err).abs());
                rounds += 1;
            }
        }
    }
    ensure(worst < 1e-12, || format!("max |recovery − ε| {worst:.3e}"))?;
    Ok(format!(
        "max |recovery − ε| {worst:.3e} over {rounds} rounds"
    ))
}

/// γΔ⟨x⟩ from the position pipeline against −ΔE_SA from the reduced state.
fn criterion_5() -> Result<String, String> {
    let u = build_measurement_unitary(2).map_err(|e| e.to_string())?;
    let mut inputs: Vec<StateVector> = (0..2).map(|k| basis_vector(2, k)).collect();
    inputs.extend((0..4).map(|seed| random_pure_state(2, 500 + seed)));
    let mut worst: f64 = 0.0;
    let mut branches = 0;
    for &(s, gamma) in &[(0.1, 1.0), (0.05, 1.0), (0.01, 1.0), (0.05, 2.5)] {
        let battery = gaussian_battery(MomentumGrid::for_width(s).unwrap(), s, gamma)
            .map_err(|e| e.to_string())?;
        let before = initial_position_distribution(&battery)
            .map_err(|e| e.to_string())?
            .mean();
        for psi in &inputs {
            let phi = tensor_product(
                &ComplexMatrix::from_column_slice(2, 1, psi.as_slice()),
                &ComplexMatrix::from_column_slice(2, 1, basis_vector(2, 0).as_slice()),
            );
            let phi = StateVector::from_column_slice(phi.as_slice());
            let rho = DensityMatrix::from_pure(&phi).map_err(|e| e.to_string())?;
            for label in canonical_labels(2) {
                let h = charge_observable(2, label).map_err(|e| e.to_string())?;
                let sigma = reduced_channel(&rho, &u, &h, &battery).map_err(|e| e.to_string())?;
                let delta_e = expectation(&h, &sigma).unwrap() - expectation(&h, &rho).unwrap();
                let after = battery_position_distribution(&phi, &battery, &u, &h)
                    .map_err(|e| e.to_string())?;
                let shift = gamma * (after.mean() - before);
                worst = worst.max((shift + delta_e).abs());
                branches += 1;
            }
        }
    }
    ensure(worst < 1e-6, || format!("max |γΔ⟨x⟩ + ΔE_SA| {worst:.3e}"))?;
    Ok(format!(
        "max |γΔ⟨x⟩ + ΔE_SA| {worst:.3e} over {branches} branches"
    ))
}

fn criterion_6() -> Result<String, String> {
    let rho = random_density_matrix(2, 31);
    let ns = [1_000u64, 10_000, 100_000, 1_000_000];
    let label = ChargeLabel::z(1);
    let mut slopes = Vec::new();
    let mut worst_z: f64 = 0.0;
    for seed in 0..10 {
        let config = ProtocolConfig {
            seed,
            ..ProtocolConfig::battery(2, 0.05)
        };
        let mut points = Vec::new();
        for &n in &ns {
            let w = sample_charge_work(&rho, label, n, &config).map_err(|e| e.to_string())?;
            points.push(((n as f64).ln(), w.stderr.ln()));
            if n == 1_000_000 {
                worst_z = worst_z.max((w.estimate - w.exact_work).abs() / w.stderr);
            }
        }
        slopes.push(least_squares_slope(&points));
    }
    let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
    ensure(slopes.iter().all(|s| (s + 0.5).abs() <= 0.1), || {
        format!("slopes {slopes:?}")
    })?;
    ensure(worst_z < 4.0, || {
        format!("N=1e6 estimate off by {worst_z:.2} stderr")
    })?;
    Ok(format!(
        "mean slope {mean:.4}, worst N=1e6 deviation {worst_z:.2} stderr"
    ))
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn criterion_7() -> Result<String, String> {
    let set = build_charge_set(2).map_err(|e| e.to_string())?;
    let u_sa = build_measurement_unitary(2).map_err(|e| e.to_string())?;
    let report =
        check_charge_set(&u_sa, &set, DEFAULT_ISOLATION_TOL, None).map_err(|e| e.to_string())?;
    ensure(!report.is_isolated(), || "U_SA flagged isolated".into())?;

    for seed in 0..10 {
        let q = random_hermitian(4, seed);
        let t = 0.37 * (seed + 1) as f64;
        let u = UnitaryOperator::evolution(&q, t);
        let r = check_isolation(&u, std::slice::from_ref(&q), DEFAULT_ISOLATION_TOL)
            .map_err(|e| e.to_string())?;
        ensure(r.is_isolated(), || {
            format!("e^(-iQt) flagged leaky, norms {:?}", r.commutator_norms())
        })?;
    }

    let (e0, gap) = (0.25, 1.7);
    let h = HermitianObservable::new(real_matrix(2, &[e0, 0.0, 0.0, e0 + gap])).unwrap();
    let flip = UnitaryOperator::new(real_matrix(2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
    let delta =
        leak_profile(&flip, &DensityMatrix::basis(2, 0), std::slice::from_ref(&h)).unwrap()[0];
    ensure((delta - gap).abs() < 1e-12, || {
        format!("energy flip delta {delta}")
    })?;

    let h_s = HermitianObservable::new(real_matrix(2, &[0.0, 0.0, 0.0, 1.0])).unwrap();
    let h_prime = HermitianObservable::new(real_matrix(2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
    let z = UnitaryOperator::new(real_matrix(2, &[1.0, 0.0, 0.0, -1.0])).unwrap();
    let plus = DensityMatrix::new(real_matrix(2, &[0.5, 0.5, 0.5, 0.5])).unwrap();
    let deltas = leak_profile(&z, &plus, &[h_s, h_prime]).unwrap();
    ensure(
        deltas[0].abs() < 1e-12 && (deltas[1] + 2.0).abs() < 1e-12,
        || format!("phase flip deltas {deltas:?}"),
    )?;
    Ok(format!(
        "U_SA leaky, 10 generator evolutions isolated, flip Δ = {delta:.3}, phase flip {:?}",
        deltas
    ))
}

fn amplitude_damping(g: f64) -> QuantumChannel {
    let k0 = real_matrix(2, &[1.0, 0.0, 0.0, (1.0 - g).sqrt()]);
    let k1 = real_matrix(2, &[0.0, g.sqrt(), 0.0, 0.0]);
    QuantumChannel::new(2, vec![k0, k1]).unwrap()
}

fn criterion_8() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for (d, count) in [(2usize, 50u64), (3, 10)] {
        for seed in 0..count {
            let rank = 1 + (seed as usize % (d * d));
            let ch = QuantumChannel::random(d, rank, 9000 + seed).map_err(|e| e.to_string())?;
            let t =
                tomograph_channel(&ch, &ProtocolConfig::ideal(d * d)).map_err(|e| e.to_string())?;
            let exact = ChoiMatrix::of_channel(&ch).map_err(|e| e.to_string())?;
            worst = worst.max(choi_distance(&t.choi, &exact).map_err(|e| e.to_string())?);
        }
    }
    ensure(worst < 1e-10, || format!("ideal Choi distance {worst:.3e}"))?;

    let ad = amplitude_damping(0.3);
    let t =
        tomograph_channel(&ad, &ProtocolConfig::battery(4, 0.001)).map_err(|e| e.to_string())?;
    let exact = ChoiMatrix::of_channel(&ad).map_err(|e| e.to_string())?;
    let battery = choi_distance(&t.choi, &exact).map_err(|e| e.to_string())?;
    ensure(battery < 5e-3, || {
        format!("battery Choi distance {battery:.3e}")
    })?;
    Ok(format!(
        "ideal max {worst:.3e} over 60 channels, battery s=0.001 {battery:.3e}"
    ))
}

fn criterion_9() -> Result<String, String> {
    for d in 2..=5 {
        let set = build_charge_set(d).map_err(|e| e.to_string())?;
        ensure(set.len() == d * d - 1, || {
            format!("d={d}: {} charges", set.len())
        })?;
        let qs = set.observables();
        for (a, qa) in qs.iter().enumerate() {
            let tr = qa.matrix().trace().norm();
            ensure(tr < 1e-12, || format!("d={d}: trace {tr:e}"))?;
            for i in 0..d * d {
                for j in 0..d * d {
                    let on_diag = i % (d + 1) == 0 && j % (d + 1) == 0;
                    ensure(on_diag || qa.matrix()[(i, j)].norm() == 0.0, || {
                        format!("d={d}: support at ({i},{j})")
                    })?;
                }
            }
            for (b, qb) in qs.iter().enumerate() {
                let g = (qa.matrix() * qb.matrix()).trace();
                let want = if a == b { 2.0 } else { 0.0 };
                ensure((g - c(want, 0.0)).norm() < 1e-12, || {
                    format!("d={d}: Tr[Q{a}Q{b}] = {g}")
                })?;
            }
        }
        let u = build_measurement_unitary(d).map_err(|e| e.to_string())?;
        let dev =
            max_abs(&(u.matrix().adjoint() * u.matrix() - ComplexMatrix::identity(d * d, d * d)));
        ensure(dev < 1e-14, || format!("d={d}: U_SA unitarity {dev:e}"))?;
    }
    let cnot = real_matrix(
        4,
        &[
            1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0.,
        ],
    );
    ensure(
        build_measurement_unitary(2).unwrap().matrix() == &cnot,
        || "U_SA != CNOT at d=2".into(),
    )?;

    let u = build_measurement_unitary(2).unwrap();
    let h = charge_observable(2, ChargeLabel::x(0, 1)).unwrap();
    let gamma = 1.3;
    ensure(
        conjugated_unitary(&u, &h, gamma, 0.0).unwrap().matrix() == u.matrix(),
        || "V(0) != U".into(),
    )?;
    for &p in &[-2.0, -0.3, 0.7, 5.0] {
        let v = conjugated_unitary(&u, &h, gamma, p).map_err(|e| e.to_string())?;
        let dev = max_abs(&(v.matrix().adjoint() * v.matrix() - ComplexMatrix::identity(4, 4)));
        ensure(dev < 1e-12, || format!("V({p}) unitarity {dev:e}"))?;
        let e = UnitaryOperator::evolution(&h, p / gamma);
        let direct = e.matrix() * u.matrix() * e.matrix().adjoint();
        let diff = max_abs(&(v.matrix() - direct));
        ensure(diff < 1e-12, || {
            format!("V({p}) differs from direct conjugation by {diff:e}")
        })?;
    }

    let rho = initial_sa_state(&random_density_matrix(2, 4));
    let battery = gaussian_battery(MomentumGrid::for_width(0.1).unwrap(), 0.1, gamma).unwrap();
    let sigma = reduced_channel(&rho, &u, &h, &battery).map_err(|e| e.to_string())?;
    let tr = sigma.matrix().trace();
    ensure((tr - c(1.0, 0.0)).norm() < 1e-12, || {
        format!("reduced trace {tr}")
    })?;
    for &a in &[0.5, -3.0, 40.0] {
        let moved =
            reduced_channel(&rho, &u, &h, &battery.translated(a)).map_err(|e| e.to_string())?;
        let diff = max_abs(&(moved.matrix() - sigma.matrix()));
        ensure(diff < 1e-12, || {
            format!("translation by {a} changes channel by {diff:e}")
        })?;
    }
    Ok("charge sets d=2..5, U_SA, V(p), translation invariance, trace preservation".into())
}

fn main() {
    let criteria: [(&str, Check, Duration); 9] = [
        ("1 qubit closed forms", criterion_1, Duration::from_secs(1)),
        (
            "2 ideal tomography round trip",
            criterion_2,
            Duration::from_secs(30),
        ),
        (
            "3 epsilon convergence",
            criterion_3,
            Duration::from_secs(300),
        ),
        (
            "4 recovery equals epsilon",
            criterion_4,
            Duration::from_secs(300),
        ),
        (
            "5 first law via battery position",
            criterion_5,
            Duration::from_secs(30),
        ),
        (
            "6 sampled work estimator",
            criterion_6,
            Duration::from_secs(120),
        ),
        ("7 isolation checker", criterion_7, Duration::from_secs(1)),
        (
            "8 channel tomography",
            criterion_8,
            Duration::from_secs(300),
        ),
        (
            "9 structural invariants",
            criterion_9,
            Duration::from_secs(10),
        ),
    ];
    let mut failures = 0;
    for (name, check, budget) in criteria {
        let start = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if elapsed > budget => {
                Err(format!("{msg} (took {elapsed:.2?}, budget {budget:?})"))
            }
            other => other,
        };
        match outcome {
            Ok(msg) => println!("PASS criterion {name}: {msg} [{elapsed:.2?}]"),
            Err(msg) => {
                failures += 1;
                println!("FAIL criterion {name}: {msg} [{elapsed:.2?}]");
            }
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
