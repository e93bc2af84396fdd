//! Operator library: the catalogue of delay-insensitive dataflow
//! operators, each available in two forms that are kept equivalent by
//! tests:
//!
//! * a **gate-level netlist fragment** ([`fragments`]) built from
//!   C-elements and simple gates, and
//! * a **behavioral stream model** ([`behavioral`]) that maps input bit
//!   streams to output bit streams.
//!
//! [`build_operator`] instantiates any operator standalone with named
//! port channels, [`resource_report`] prices it in gates, and
//! [`characterize`](characterize::characterize) measures its forward
//! latency and steady-state cycle time under a delay model.

pub mod behavioral;
pub mod characterize;
pub mod fragments;

pub use characterize::{
    characterize, run_operator, run_operator_stretched, Characterization, OperatorRun,
};
pub use fragments::{AdderCore, RegisterInit};

use crate::dualrail::Channel;
use crate::kernel::{KindCounts, NetlistBuilder};

/// Every operator the library can instantiate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    /// One half-buffer stage, optionally holding a power-up token.
    Register(RegisterInit),
    /// Data stages (input side first) with interleaved empties; tokens
    /// emit in reverse stage order.
    ShiftRegister(Vec<RegisterInit>),
    /// Replicate one channel to two consumers.
    Fork2,
    /// Synchronize two channels; outputs share one acknowledge.
    Join2,
    /// Steer one of two inputs to the output under a select token.
    RSelect,
    /// Steer the input to one of two outputs under a select token.
    WSelect,
    /// Full adder, DIMS minterm implementation (strong indication).
    DimsAdder,
    /// Full adder, complete dual-rail implementation (weak indication).
    DualRailAdder,
    /// Frame-gated one-bit delay with per-frame refill.
    FrameGatedDelay { width: usize, init: bool },
    /// Bit-serial word adder with a frame-gated carry loop.
    SerialAdder { width: usize },
    /// Closed ring emitting a fixed bit pattern cyclically.
    ConstRing { bits: Vec<bool> },
}

impl OperatorKind {
    /// Canonical port names, inputs then outputs, in the order
    /// [`build_operator`] and the behavioral models use them.
    pub fn port_names(&self) -> (Vec<&'static str>, Vec<&'static str>) {
        match self {
            OperatorKind::Register(_)
            | OperatorKind::ShiftRegister(_)
            | OperatorKind::FrameGatedDelay { .. } => (vec!["in"], vec!["out"]),
            OperatorKind::Fork2 => (vec!["in"], vec!["out0", "out1"]),
            OperatorKind::Join2 => (vec!["a", "b"], vec!["out_a", "out_b"]),
            OperatorKind::RSelect => (vec!["sel", "a", "b"], vec!["out"]),
            OperatorKind::WSelect => (vec!["sel", "in"], vec!["t", "f"]),
            OperatorKind::DimsAdder | OperatorKind::DualRailAdder => {
                (vec!["a", "b", "cin"], vec!["sum", "cout"])
            }
            OperatorKind::SerialAdder { .. } => (vec!["a", "b"], vec!["sum"]),
            OperatorKind::ConstRing { .. } => (vec![], vec!["out"]),
        }
    }
}

/// The channels of an instantiated operator, in `port_names` order.
pub struct OperatorPorts {
    pub inputs: Vec<Channel>,
    pub outputs: Vec<Channel>,
}

/// Instantiate `kind` standalone in `b`, creating its port channels
/// under `prefix`. The ports are unclaimed: the caller decides which
/// side the environment drives.
pub fn build_operator(b: &mut NetlistBuilder, kind: &OperatorKind, prefix: &str) -> OperatorPorts {
    let (in_names, out_names) = kind.port_names();
    let inputs: Vec<Channel> = in_names
        .iter()
        .map(|n| Channel::new(b, &format!("{prefix}.{n}")))
        .collect();
    let mut outputs: Vec<Channel> = Vec::new();
    if matches!(kind, OperatorKind::Join2) {
        let (o0, o1) =
            Channel::pair_shared_ack(b, &format!("{prefix}.out_a"), &format!("{prefix}.out_b"));
        outputs.push(o0);
        outputs.push(o1);
    } else {
        for n in &out_names {
            outputs.push(Channel::new(b, &format!("{prefix}.{n}")));
        }
    }

    match kind {
        OperatorKind::Register(init) => {
            fragments::register(b, *init, &inputs[0], &outputs[0], prefix);
        }
        OperatorKind::ShiftRegister(inits) => {
            fragments::shift_register(b, inits, &inputs[0], &outputs[0], prefix);
        }
        OperatorKind::Fork2 => {
            fragments::fork2(b, &inputs[0], &outputs[0], &outputs[1], prefix);
        }
        OperatorKind::Join2 => {
            fragments::join2(b, &inputs[0], &inputs[1], &outputs[0], &outputs[1], prefix);
        }
        OperatorKind::RSelect => {
            fragments::rselect(b, &inputs[0], &inputs[1], &inputs[2], &outputs[0], prefix);
        }
        OperatorKind::WSelect => {
            fragments::wselect(b, &inputs[0], &inputs[1], &outputs[0], &outputs[1], prefix);
        }
        OperatorKind::DimsAdder => {
            fragments::dims_adder(
                b, &inputs[0], &inputs[1], &inputs[2], &outputs[0], &outputs[1], prefix,
            );
        }
        OperatorKind::DualRailAdder => {
            fragments::dr_adder(
                b, &inputs[0], &inputs[1], &inputs[2], &outputs[0], &outputs[1], prefix,
            );
        }
        OperatorKind::FrameGatedDelay { width, init } => {
            fragments::frame_gated_delay(b, *width, *init, &inputs[0], &outputs[0], prefix);
        }
        OperatorKind::SerialAdder { width } => {
            // The fully delay-insensitive core; the cheap complete
            // dual-rail cell is available for resource studies via
            // `fragments::serial_adder` directly.
            fragments::serial_adder(
                b,
                *width,
                fragments::AdderCore::Dims,
                &inputs[0],
                &inputs[1],
                &outputs[0],
                prefix,
            );
        }
        OperatorKind::ConstRing { bits } => {
            fragments::const_ring(b, bits, bits.len().max(1), &outputs[0], prefix);
        }
    }
    OperatorPorts { inputs, outputs }
}

/// Gate budget of one operator instance.
#[derive(Clone, Copy, Debug)]
pub struct ResourceReport {
    pub counts: KindCounts,
    pub total_gates: usize,
    pub c_gates: usize,
}

/// Price `kind` by instantiating it in a scratch netlist.
pub fn resource_report(kind: &OperatorKind) -> ResourceReport {
    let mut b = NetlistBuilder::new();
    let ports = build_operator(&mut b, kind, "op");
    for ch in &ports.inputs {
        ch.claim_producer(&mut b);
    }
    for ch in &ports.outputs {
        ch.claim_consumer(&mut b);
    }
    let netlist = b
        .finalize()
        .expect("operator fragments are structurally closed");
    let counts = *netlist.kind_counts();
    ResourceReport {
        counts,
        total_gates: counts.total(),
        c_gates: counts.c_gates(),
    }
}
