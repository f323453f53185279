//! Battery position readout.
//!
//! After the global unitary, the battery-plus-pair state in momentum space
//! is `ψ(p) V(p)|φ⟩`. Its position wavefunction is
//! `Φ(x) = (2π)^{−1/2} ∫ dp e^{−ipx} ψ(p) V(p)|φ⟩`, evaluated componentwise
//! on the dual grid with one FFT per component. The sign of the exponent
//! makes `γx̂` the generator that `V(p)` conserves together with `H`, so the
//! mean battery energy moves by exactly `−ΔE_SA`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::battery::channel::ConjugationFrame;
use crate::battery::BatteryWavefunction;
use crate::error::{Error, Result};
use crate::quantum::{eigh, DensityMatrix, HermitianObservable, StateVector, UnitaryOperator, C64};

/// Probability allowed in the outer sixteenth of the position grid on each
/// side before the battery counts as wrapping around.
pub const TOL_POSITION_EDGE: f64 = 1e-8;

/// Discrete distribution over the battery's position grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PositionDistribution {
    pub positions: Vec<f64>,
    pub probabilities: Vec<f64>,
}

impl PositionDistribution {
    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.positions
            .iter()
            .zip(&self.probabilities)
            .map(|(x, p)| x * p)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.positions
            .iter()
            .zip(&self.probabilities)
            .map(|(x, p)| (x - mean).powi(2) * p)
            .sum()
    }

    fn mix(parts: &[(f64, PositionDistribution)]) -> PositionDistribution {
        let positions = parts[0].1.positions.clone();
        let mut probabilities = vec![0.0; positions.len()];
        for (w, dist) in parts {
            for (acc, p) in probabilities.iter_mut().zip(&dist.probabilities) {
                *acc += w * p;
            }
        }
        PositionDistribution {
            positions,
            probabilities,
        }
    }

    fn check_contained(self) -> Result<Self> {
        let total = self.total();
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::Containment(format!(
                "position distribution sums to {total}"
            )));
        }
        let edge = self.probabilities.len() / 16;
        let tails: f64 = self.probabilities[..edge].iter().sum::<f64>()
            + self.probabilities[self.probabilities.len() - edge..]
                .iter()
                .sum::<f64>();
        if tails > TOL_POSITION_EDGE {
            return Err(Error::Containment(format!(
                "battery position spills to the grid edge (tail mass {tails:.3e})"
            )));
        }
        Ok(self)
    }
}

/// Transforms momentum-space components `f[c][k]` to position
/// probabilities `Σ_c |Φ_c(x_j)|² Δx`.
fn position_probabilities(
    battery: &BatteryWavefunction,
    components: Vec<Vec<C64>>,
) -> PositionDistribution {
    let grid = battery.grid();
    let len = grid.len();
    let half = len / 2;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(len);
    let scale = grid.spacing() / (2.0 * std::f64::consts::PI).sqrt();
    let dx = grid.position_spacing();
    let mut probabilities = vec![0.0; len];
    for mut f in components {
        // e^{−i p_k x_j} = (−1)^k (−1)^{j − len/2} e^{−2πi kj/len}
        for (k, v) in f.iter_mut().enumerate() {
            if k % 2 == 1 {
                *v = -*v;
            }
        }
        fft.process(&mut f);
        for (j, v) in f.iter().enumerate() {
            let sign = if (j + half).is_multiple_of(2) { 1.0 } else { -1.0 };
            probabilities[j] += (v * (sign * scale)).norm_sqr() * dx;
        }
    }
    PositionDistribution {
        positions: (0..len).map(|j| grid.position(j)).collect(),
        probabilities,
    }
}

/// Position distribution of the unperturbed battery.
pub fn initial_position_distribution(
    battery: &BatteryWavefunction,
) -> Result<PositionDistribution> {
    position_probabilities(battery, vec![battery.amplitudes().to_vec()]).check_contained()
}

/// Final battery position distribution for a pure pair input `|φ⟩`.
pub fn battery_position_distribution(
    phi: &StateVector,
    battery: &BatteryWavefunction,
    u: &UnitaryOperator,
    h: &HermitianObservable,
) -> Result<PositionDistribution> {
    pure_branch(phi, battery, &ConjugationFrame::new(u, h, battery.gamma())?)?.check_contained()
}

fn pure_branch(
    phi: &StateVector,
    battery: &BatteryWavefunction,
    frame: &ConjugationFrame,
) -> Result<PositionDistribution> {
    if phi.len() != frame.dim() {
        return Err(Error::DimensionMismatch(format!(
            "pure state of length {} for a {}-dimensional unitary",
            phi.len(),
            frame.dim()
        )));
    }
    let norm = phi.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState(format!("pure state has norm {norm}")));
    }
    let phi = frame.to_frame_vector(phi);
    let n = phi.len();
    let mut components = vec![vec![C64::new(0.0, 0.0); battery.grid().len()]; n];
    for (k, (psi, p)) in battery
        .amplitudes()
        .iter()
        .zip(battery.grid().points())
        .enumerate()
    {
        if psi.norm_sqr() == 0.0 {
            continue;
        }
        let out = frame.v_in_frame(p) * &phi;
        for c in 0..n {
            components[c][k] = psi * out[c];
        }
    }
    Ok(position_probabilities(battery, components))
}

/// Final battery position distribution for a mixed pair input, mixing the
/// pure branches of its eigendecomposition.
pub fn battery_position_distribution_mixed(
    rho: &DensityMatrix,
    battery: &BatteryWavefunction,
    u: &UnitaryOperator,
    h: &HermitianObservable,
) -> Result<PositionDistribution> {
    let frame = ConjugationFrame::new(u, h, battery.gamma())?;
    if rho.dim() != frame.dim() {
        return Err(Error::DimensionMismatch("state and unitary".into()));
    }
    let eig = eigh(rho.matrix());
    let mut parts = Vec::new();
    for (i, &w) in eig.values.iter().enumerate() {
        if w <= 1e-15 {
            continue;
        }
        let phi: StateVector = eig.vectors.column(i).into_owned();
        parts.push((w, pure_branch(&phi, battery, &frame)?));
    }
    let total: f64 = parts.iter().map(|(w, _)| w).sum();
    for part in &mut parts {
        part.0 /= total;
    }
    PositionDistribution::mix(&parts).check_contained()
}

/// Work estimated from `n` i.i.d. battery position readouts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub n_samples: u64,
}

/// Draws `n` positions, returns `γ (x̄ − initial_mean)` and its standard error.
pub fn sample_work_estimate(
    distribution: &PositionDistribution,
    n: u64,
    seed: u64,
    gamma: f64,
    initial_mean: f64,
) -> Result<WorkEstimate> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let sampler = WeightedAliasIndex::new(distribution.probabilities.clone())
        .map_err(|e| Error::InvalidArgument(format!("bad position distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Welford
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..n {
        let x = distribution.positions[sampler.sample(&mut rng)];
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    let stderr = if n > 1 {
        (m2 / (n - 1) as f64 / n as f64).sqrt()
    } else {
        0.0
    };
    Ok(WorkEstimate {
        estimate: gamma * (mean - initial_mean),
        stderr: gamma * stderr,
        n_samples: n,
    })
}
