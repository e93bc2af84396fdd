//! Deterministic discrete-event simulation of gate-level netlists.
//!
//! The kernel knows nothing about dual-rail encoding or handshakes; it
//! simulates binary nets driven by single-output gates. Two properties
//! matter for everything built on top:
//!
//! * **Determinism.** Events are ordered by `(time, net, insertion
//!   sequence)`; randomized delays come from a seeded generator; repeated
//!   runs of the same netlist, stimuli and delay model produce identical
//!   traces.
//! * **Transport-delay semantics.** A gate re-evaluates whenever one of
//!   its inputs changes. When its logical state changes it schedules the
//!   new value on its output net after the gate delay. Pulses are not
//!   swallowed: delay-insensitive circuits must tolerate them, and the
//!   protocol monitors in [`crate::dualrail`] are there to catch the
//!   fallout when a circuit is not actually delay-insensitive.
//!
//! Time is measured in integer picoseconds ([`Ps`]); delay tables are
//! written in nanoseconds and converted on parse.

mod delay;
mod netlist;
mod sim;

pub use delay::{DelayModel, DelayTable, DelayTableError, DEFAULT_JITTER_MAX_PS, DEFAULT_JITTER_MIN_PS};
pub use netlist::{
    Gate, GateId, GateKind, KindCounts, NetId, Netlist, NetlistBuilder, NetlistError,
};
pub use sim::{
    deadlock_check, simulate, Liveness, Process, SimApi, Simulation, Trace, TraceEvent,
};

/// Simulation time in picoseconds.
pub type Ps = u64;

/// Picoseconds per nanosecond; delay tables and CLI arguments use ns.
pub const PS_PER_NS: Ps = 1_000;

/// Convert a non-negative nanosecond quantity to picoseconds (rounded).
pub fn ns_to_ps(ns: f64) -> Ps {
    debug_assert!(ns >= 0.0, "delays are non-negative");
    (ns * PS_PER_NS as f64).round() as Ps
}

/// Convert picoseconds to nanoseconds for reporting.
pub fn ps_to_ns(ps: Ps) -> f64 {
    ps as f64 / PS_PER_NS as f64
}
