//! Work accounting with an explicit battery.
//!
//! Each charge `H` gets its own battery with charge operator `γx̂`. The
//! global evolution conserves `H + γx̂` exactly and commutes with battery
//! translations, so the pair sees a mixture of unitaries that approaches
//! `U_SA` as the battery's momentum spread `s` shrinks, while the battery's
//! mean position records the work.

mod channel;
mod position;
mod protocol;
mod wavefunction;

pub use channel::{channel_epsilon, conjugated_unitary, reduced_channel, work_cost, TOL_WEIGHT};
pub use position::{
    battery_position_distribution, battery_position_distribution_mixed,
    initial_position_distribution, sample_work_estimate, PositionDistribution, WorkEstimate,
    TOL_POSITION_EDGE,
};
pub use protocol::{
    epsilon_sweep, run_protocol, sample_charge_work, sweep_to_csv, Mode, ProtocolConfig,
    ProtocolRun, SampledWork, SweepRow, WorkEntry, WorkLedger,
};
pub use wavefunction::{gaussian_battery, BatteryWavefunction, MomentumGrid};
