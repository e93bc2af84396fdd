//! The FLYSIG processor model.
//!
//! A processor is described by a [`ProcessorConfig`] (operator
//! inventory, routing, initial memory image, link bubbles), validated
//! into a [`Machine`], and then simulated at either of two levels:
//!
//! * **token level** ([`simulate_processor`] with [`Level::Token`]) —
//!   word-granular dataflow execution over the memory/routing/operation
//!   ring, with time accounted from characterized operator timings;
//! * **gate level** ([`Level::Gate`]) — full elaboration to a dual-rail
//!   netlist built from the operator library, simulated event by event
//!   under an arbitrary delay model.
//!
//! Both levels produce identical output value sequences; the gate level
//! additionally yields real latencies, throughputs, and the behavior of
//! rings under bubble starvation.

pub mod analysis;
pub mod config;
mod derive;
mod gate;
mod network;
mod token_sim;
pub mod validate;

pub use analysis::{analyze_rings, RingReport};
pub use config::{
    CellId, ConfigParseError, Destination, Endpoint, LinkDecl, MemoryDecl, Mode, OpId, Operation,
    OperatorDecl, OperatorFunction, ProcessorConfig, Source, TokenInit, Word,
};
pub use derive::{derive_target, PruneReport};
pub use gate::elaborate;
pub use network::{connect_processors, simulate_network, Network, PortBinding, PortMap};
pub use token_sim::{LinkOccupancy, TokenRunStats};
pub use validate::{
    route_token, validate, ConfigError, ConfigWarning, DestRef, Machine, MachineOp, MachineStatus,
    ProducerRef,
};

use crate::kernel::{DelayModel, Ps};

/// A data item in flight: operands being assembled for one operation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub op_id: OpId,
    /// One bit per operand slot; the token is executable when all are set.
    pub valid_flags: Vec<bool>,
    /// One bit per destination table entry of the operation.
    pub guard_flags: Vec<bool>,
    pub operands: Vec<Word>,
}

impl Token {
    /// A token may be dispatched only once every operand has arrived.
    pub fn executable(&self) -> bool {
        !self.valid_flags.is_empty() && self.valid_flags.iter().all(|&v| v)
    }
}

/// One cell of the token memory: empty, or holding one token.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MemoryCell {
    pub contents: Option<Token>,
}

/// Does the cell hold a dispatchable token?
pub fn token_evaluation(cell: &MemoryCell) -> bool {
    cell.contents.as_ref().is_some_and(Token::executable)
}

/// Select the destinations a result is actually delivered to: bit `i`
/// of the guard picks entry `i` of the destination table. An all-zero
/// guard is a configuration bug (the result would vanish).
pub fn guard_evaluate<'a, D>(result: &Token, dests: &'a [D]) -> Result<Vec<&'a D>, ConfigError> {
    if !result.guard_flags.iter().any(|&g| g) {
        return Err(ConfigError::EmptyGuard { op: result.op_id });
    }
    Ok(dests
        .iter()
        .zip(&result.guard_flags)
        .filter(|(_, &g)| g)
        .map(|(d, _)| d)
        .collect())
}

/// Simulation level of a processor instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Gate,
    Token,
}

/// Why a simulation run failed to deliver every expected output.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RunError {
    #[error("deadlock: {0}")]
    Deadlock(String),
    #[error("simulation still active at t_max = {t_max_ps} ps (oscillation or undersized t_max)")]
    OscillationAtTmax { t_max_ps: Ps },
}

/// Result of simulating one processor (or network) on input streams.
#[derive(Clone, Debug)]
pub struct RunReport {
    /// Decoded output words per external output port.
    pub outputs: Vec<Vec<Word>>,
    /// Completion time of each output word, per port (ps).
    pub output_times: Vec<Vec<Ps>>,
    /// First-output time minus first-input time, if any output appeared.
    pub latency_ps: Option<Ps>,
    /// Output words per nanosecond over the post-warmup window.
    pub throughput_per_ns: f64,
    pub deadlock: bool,
    /// Present when the run ended abnormally.
    pub error: Option<RunError>,
    /// Token-level bookkeeping (also filled by gate runs where cheap).
    pub stats: TokenRunStats,
}

impl RunReport {
    /// Throughput in output words per microsecond (CSV unit).
    pub fn throughput_per_us(&self) -> f64 {
        self.throughput_per_ns * 1000.0
    }
}

/// Simulate a configured machine on `inputs` (one word stream per
/// external input port).
///
/// Latency is first-output completion minus first-input availability
/// (inputs are available at t = 0). Throughput is steady-state: output
/// words per ns over the window that starts 10% into the effective run
/// span, excluding pipeline fill.
pub fn simulate_processor(
    machine: &Machine,
    inputs: &[Vec<Word>],
    level: Level,
    model: &DelayModel,
    t_max: Ps,
) -> Result<RunReport, ConfigError> {
    if inputs.len() != machine.n_inputs {
        return Err(ConfigError::PortUnbound {
            msg: format!(
                "{} input stream(s) supplied for {} input port(s)",
                inputs.len(),
                machine.n_inputs
            ),
        });
    }
    if machine.has_remote_dests() {
        return Err(ConfigError::PortUnbound {
            msg: "configuration has remote destinations; simulate it as part of a network".into(),
        });
    }
    match level {
        Level::Token => token_sim::run(machine, inputs, model, t_max),
        Level::Gate => gate::run(machine, inputs, model, t_max),
    }
}

/// Compute latency and steady-state throughput from per-port output
/// completion times. Shared by both levels and by network runs.
pub(crate) fn timing_summary(output_times: &[Vec<Ps>]) -> (Option<Ps>, f64) {
    let first = output_times.iter().filter_map(|t| t.first()).min().copied();
    let mut all: Vec<Ps> = output_times.iter().flatten().copied().collect();
    all.sort_unstable();
    let throughput = match (all.first(), all.last()) {
        (Some(&t0), Some(&t1)) if all.len() >= 2 && t1 > t0 => {
            // Steady-state window: drop everything before 10% of the
            // effective span so pipeline fill does not dilute the rate.
            let warmup = t0 + (t1 - t0) / 10;
            let tail: Vec<Ps> = all.iter().copied().filter(|&t| t >= warmup).collect();
            match (tail.first(), tail.last()) {
                (Some(&w0), Some(&w1)) if tail.len() >= 2 && w1 > w0 => {
                    (tail.len() as f64 - 1.0) / (crate::kernel::ps_to_ns(w1 - w0))
                }
                _ => all.len() as f64 / crate::kernel::ps_to_ns(t1.max(1)),
            }
        }
        (Some(_), _) => 0.0,
        _ => 0.0,
    };
    (first, throughput)
}
