//! Simulation and compilation stack for FLYSIG, a delay-insensitive,
//! dual-rail, bit-serial dataflow processor.
//!
//! The crate is layered bottom-up:
//!
//! * [`kernel`] — deterministic discrete-event simulation of gate-level
//!   netlists (C-elements, simple combinational gates) under fixed or
//!   randomized per-gate delays.
//! * [`dualrail`] — dual-rail data encoding, four-phase handshake
//!   protocol monitors, and environment drivers (producers/consumers).
//! * [`oplib`] — the operator library: dual-rail registers and shift
//!   registers, read/write selectors, fork/join, DIMS and complete
//!   dual-rail adders, and the bit-serial word adder. Every operator has
//!   both a gate-level netlist and a behavioral stream model, and the two
//!   are cross-checked in the test suite.
//! * [`dfg`] — a small dataflow-graph language, structure analysis,
//!   strength-reduction rewrites, and scheduling onto a processor
//!   configuration.
//! * [`processor`] — the processor model itself: tokens, memory cells,
//!   routing, token-level and gate-level simulation, multi-processor
//!   networks, and prototype-to-target derivation.
//! * [`batch`] — a small helper for running independent simulation jobs
//!   either sequentially or (with the `parallel` feature, enabled by
//!   default) on a rayon thread pool.
//!
//! Determinism is a design invariant: every simulation entry point is a
//! pure function of its inputs and an explicit seed. Randomized delay
//! assignments are drawn from a seeded ChaCha stream, and the event loop
//! breaks ties by (time, net, insertion sequence), so repeated runs are
//! bit-identical.

pub mod batch;
pub mod dfg;
pub mod dualrail;
pub mod kernel;
pub mod oplib;
pub mod processor;
