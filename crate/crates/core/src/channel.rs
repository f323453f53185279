//! Channel tomography through the Choi state.
//!
//! A channel `E` on a `d`-dimensional system is applied to half of the
//! maximally entangled state `|ψ⟩_BS = Σ_k |kk⟩/√d`; the resulting
//! `ρ_BS = (I ⊗ E)(|ψ⟩⟨ψ|)` is measured as an unknown `d²`-dimensional state
//! with the work-cost protocol. Choi states are normalized to trace one.

use serde::{Deserialize, Serialize};

use crate::battery::{run_protocol, Mode, ProtocolConfig, ProtocolRun};
use crate::error::{Error, Result};
use crate::json::MatrixJson;
use crate::quantum::{
    eigh, hermitian_part, max_abs, partial_trace, random_isometry, tensor_product, trace_distance,
    ComplexMatrix, DensityMatrix, Factor, StateVector, UnitaryOperator, C64,
};

pub const TOL_KRAUS: f64 = 1e-10;
pub const TOL_CHOI_MARGINAL: f64 = 1e-8;
/// Largest system dimension for which tomography is supported.
pub const MAX_TOMOGRAPHY_DIM: usize = 4;
/// Raw marginal deviation above which battery-mode tomography attaches a
/// warning.
pub const MARGINAL_WARNING: f64 = 1e-3;

/// Trace-preserving channel in Kraus form, `d → d`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumChannel {
    d: usize,
    kraus: Vec<ComplexMatrix>,
}

impl QuantumChannel {
    pub fn new(d: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        if d == 0 || kraus.is_empty() {
            return Err(Error::InvalidArgument(
                "channel needs d >= 1 and at least one Kraus operator".into(),
            ));
        }
        if let Some(k) = kraus.iter().find(|k| k.nrows() != d || k.ncols() != d) {
            return Err(Error::DimensionMismatch(format!(
                "Kraus operator is {}x{} for d = {d}",
                k.nrows(),
                k.ncols()
            )));
        }
        let sum = kraus
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, k| acc + k.adjoint() * k);
        let deviation = max_abs(&(sum - ComplexMatrix::identity(d, d)));
        if deviation > TOL_KRAUS {
            return Err(Error::NotTracePreserving { deviation });
        }
        Ok(Self { d, kraus })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            d,
            kraus: vec![ComplexMatrix::identity(d, d)],
        }
    }

    pub fn unitary(u: &UnitaryOperator) -> Self {
        Self {
            d: u.dim(),
            kraus: vec![u.matrix().clone()],
        }
    }

    /// Kraus operators cut from a seeded Haar isometry `C^d → C^{d·rank}`.
    pub fn random(d: usize, rank: usize, seed: u64) -> Result<Self> {
        if d == 0 || rank == 0 {
            return Err(Error::InvalidArgument(
                "random channel needs d, rank >= 1".into(),
            ));
        }
        let v = random_isometry(d * rank, d, seed);
        let kraus = (0..rank)
            .map(|k| ComplexMatrix::from_fn(d, d, |i, j| v[(k * d + i, j)]))
            .collect();
        Self::new(d, kraus)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// `Σ K ρ K†`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.d {
            return Err(Error::DimensionMismatch("channel and state".into()));
        }
        let out = self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.d, self.d), |acc, k| {
                acc + k * rho.matrix() * k.adjoint()
            });
        DensityMatrix::from_computed(out)
    }

    /// One Kraus decomposition of the channel with the given Choi state.
    /// Kraus operators are not unique; compare channels in Choi form.
    pub fn from_choi(choi: &ChoiMatrix) -> Result<Self> {
        let d = choi.d;
        let eig = eigh(choi.state.matrix());
        let kraus = eig
            .values
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > 1e-14)
            .map(|(c, &l)| {
                // Choi vector component (b, s) is K[s, b] / √d.
                let scale = (l * d as f64).sqrt();
                ComplexMatrix::from_fn(d, d, |s, b| eig.vectors[(b * d + s, c)] * scale)
            })
            .collect();
        Self::new(d, kraus)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelJson {
    pub d: usize,
    pub kraus: Vec<MatrixJson>,
}

impl TryFrom<&ChannelJson> for QuantumChannel {
    type Error = Error;

    fn try_from(value: &ChannelJson) -> Result<Self> {
        let kraus = value
            .kraus
            .iter()
            .map(MatrixJson::to_matrix)
            .collect::<Result<Vec<_>>>()?;
        QuantumChannel::new(value.d, kraus)
    }
}

impl From<&QuantumChannel> for ChannelJson {
    fn from(c: &QuantumChannel) -> Self {
        Self {
            d: c.d,
            kraus: c.kraus.iter().map(MatrixJson::from).collect(),
        }
    }
}

/// Trace-one Choi state on `B ⊗ S` whose `B` marginal is `I/d`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix {
    d: usize,
    state: DensityMatrix,
}

impl ChoiMatrix {
    pub fn new(d: usize, state: DensityMatrix) -> Result<Self> {
        if state.dim() != d * d {
            return Err(Error::DimensionMismatch(format!(
                "Choi state of dimension {} for d = {d}",
                state.dim()
            )));
        }
        let deviation = marginal_deviation(state.matrix(), d)?;
        if deviation > TOL_CHOI_MARGINAL {
            return Err(Error::InvalidState(format!(
                "Choi marginal deviates from I/d by {deviation:.3e}"
            )));
        }
        Ok(Self { d, state })
    }

    /// Exact Choi state of `channel`.
    pub fn of_channel(channel: &QuantumChannel) -> Result<Self> {
        let d = channel.d();
        let psi = DensityMatrix::from_pure(&maximally_entangled_state(d))?;
        Self::new(d, apply_channel_to_subsystem(channel, &psi)?)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChoiJson {
    pub d: usize,
    #[serde(flatten)]
    pub matrix: MatrixJson,
}

impl From<&ChoiMatrix> for ChoiJson {
    fn from(c: &ChoiMatrix) -> Self {
        Self {
            d: c.d,
            matrix: MatrixJson::from(c.state.matrix()),
        }
    }
}

/// Maximum deviation of `Tr_S ρ_BS` from `I/d`.
fn marginal_deviation(m: &ComplexMatrix, d: usize) -> Result<f64> {
    let marginal = partial_trace(m, (d, d), Factor::First)?;
    Ok(max_abs(
        &(marginal - ComplexMatrix::identity(d, d) / C64::new(d as f64, 0.0)),
    ))
}

/// `Σ_k |kk⟩ / √d`.
pub fn maximally_entangled_state(d: usize) -> StateVector {
    let mut v = StateVector::zeros(d * d);
    let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    for k in 0..d {
        v[k * d + k] = amp;
    }
    v
}

/// `Σ (I ⊗ K) ρ (I ⊗ K)†` on `B ⊗ S`.
pub fn apply_channel_to_subsystem(
    channel: &QuantumChannel,
    state: &DensityMatrix,
) -> Result<DensityMatrix> {
    let d = channel.d();
    if state.dim() != d * d {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} for a channel on d = {d}",
            state.dim()
        )));
    }
    // Re-checked so hand-built channels cannot slip through.
    QuantumChannel::new(d, channel.kraus.clone())?;
    let id = ComplexMatrix::identity(d, d);
    let out = channel
        .kraus()
        .iter()
        .fold(ComplexMatrix::zeros(d * d, d * d), |acc, k| {
            let lifted = tensor_product(&id, k);
            acc + &lifted * state.matrix() * lifted.adjoint()
        });
    DensityMatrix::from_computed(out)
}

/// Trace distance between Choi states.
pub fn choi_distance(a: &ChoiMatrix, b: &ChoiMatrix) -> Result<f64> {
    if a.d != b.d {
        return Err(Error::DimensionMismatch(
            "Choi matrices of different d".into(),
        ));
    }
    trace_distance(&a.state, &b.state)
}

#[derive(Clone, Debug)]
pub struct ChannelTomography {
    pub choi: ChoiMatrix,
    pub run: ProtocolRun,
    /// Marginal deviation of the reconstruction before it was projected.
    pub raw_marginal_deviation: f64,
    pub warning: Option<String>,
}

/// Reconstructs the Choi state of `channel` by running the state protocol
/// on `ρ_BS` as an unknown `d²`-dimensional state. `config.d` must be `d²`.
pub fn tomograph_channel(
    channel: &QuantumChannel,
    config: &ProtocolConfig,
) -> Result<ChannelTomography> {
    let d = channel.d();
    if !(2..=MAX_TOMOGRAPHY_DIM).contains(&d) {
        return Err(Error::InvalidArgument(format!(
            "channel tomography supports 2 <= d <= {MAX_TOMOGRAPHY_DIM}, got {d}"
        )));
    }
    if config.d != d * d {
        return Err(Error::DimensionMismatch(format!(
            "protocol dimension {} must be d² = {}",
            config.d,
            d * d
        )));
    }
    let psi = DensityMatrix::from_pure(&maximally_entangled_state(d))?;
    let rho_bs = apply_channel_to_subsystem(channel, &psi)?;
    let run = run_protocol(&rho_bs, config)?;
    let raw_marginal_deviation = marginal_deviation(run.reconstructed.matrix(), d)?;
    let projected = project_to_choi(run.reconstructed.matrix(), d)?;
    let warning =
        (config.mode == Mode::Battery && raw_marginal_deviation > MARGINAL_WARNING).then(|| {
            format!("reconstructed marginal deviates from I/d by {raw_marginal_deviation:.3e}")
        });
    Ok(ChannelTomography {
        choi: ChoiMatrix::new(d, projected)?,
        run,
        raw_marginal_deviation,
        warning,
    })
}

/// Alternates between fixing the `B` marginal to `I/d` and clipping
/// negative eigenvalues until both hold.
fn project_to_choi(m: &ComplexMatrix, d: usize) -> Result<DensityMatrix> {
    let id = ComplexMatrix::identity(d, d);
    let maximally_mixed = &id / C64::new(d as f64, 0.0);
    let mut x = m.clone();
    for _ in 0..1000 {
        let marginal = partial_trace(&x, (d, d), Factor::First)?;
        x -= tensor_product(&(marginal - &maximally_mixed), &maximally_mixed);
        x = hermitian_part(&x);
        let eig = eigh(&x);
        if eig.values[0] >= -crate::quantum::TOL_PSD / 10.0 {
            return DensityMatrix::new(x);
        }
        let clipped: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        x = crate::quantum::Eigen {
            values: clipped.iter().map(|v| v / total).collect(),
            vectors: eig.vectors,
        }
        .reconstruct();
        if marginal_deviation(&x, d)? <= TOL_CHOI_MARGINAL / 10.0 {
            return DensityMatrix::new(hermitian_part(&x));
        }
    }
    Err(Error::NotPositive {
        eigenvalue: eigh(&x).values[0],
    })
}
