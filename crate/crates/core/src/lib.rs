//! Simulator and protocol library for secure computation with selective
//! abort over a synchronous point-to-point network.
//!
//! [`netsim`] is the network; [`protocols::run_protocol`] is the entry point
//! the harness uses. Everything else is a building block that can also be
//! driven directly on a [`netsim::Network`].

pub mod adversary;
pub mod bits;
pub mod broadcast;
pub mod committee;
pub mod crypto;
pub mod idealfunc;
pub mod netsim;
pub mod primitives;
pub mod protocols;
pub mod routing;

pub use bits::BitString;
pub use netsim::{AbortReason, Network, PartyId};
pub use protocols::{run_protocol, ProtocolId, RunConfig, RunError, RunReport};
