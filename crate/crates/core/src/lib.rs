//! Almost collapse-free quantum measurement by counting charge-wise work.
//!
//! An unknown qudit state `ρ_S` is coupled to an apparatus by a generalized
//! CNOT. The interaction changes the expectation values of `d² − 1`
//! non-local charges on the system–apparatus pair, and those changes
//! determine `ρ_S` completely. Each change is paid for by a battery whose
//! joint evolution with the pair conserves the charge exactly; reading the
//! battery reveals the work, and because the pair only ever underwent an
//! (almost) unitary evolution, it can be rotated back to its initial state.
//!
//! Modules, bottom up:
//!
//! * [`quantum`]: dense complex matrices, density matrices, trace distance
//! * [`charges`]: the non-local charge observables
//! * [`measurement`]: the exact measurement unitary, charge deltas and
//!   state reconstruction
//! * [`battery`]: battery-mediated evolution, work accounting, the full
//!   protocol
//! * [`isolation`]: commutation-based isolation checks
//! * [`channel`]: channel tomography via Choi states
//!
//! The `book/` directory at the repository root walks through each of these
//! with runnable examples; every snippet there is compiled and run as a
//! doctest of this crate.

pub mod battery;
pub mod channel;
pub mod charges;
pub mod error;
pub mod isolation;
pub mod json;
pub mod measurement;
pub mod quantum;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/states.md")]
    mod states {}
    #[doc = include_str!("../../../book/src/charges.md")]
    mod charges {}
    #[doc = include_str!("../../../book/src/measurement.md")]
    mod measurement {}
    #[doc = include_str!("../../../book/src/battery.md")]
    mod battery {}
    #[doc = include_str!("../../../book/src/isolation.md")]
    mod isolation {}
    #[doc = include_str!("../../../book/src/channels.md")]
    mod channels {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
