//! Standalone operator harness and timing characterization.
//!
//! [`run_operator`] instantiates one operator, wraps every input port in
//! a stream producer and every output port in an eager consumer, attaches
//! handshake monitors to all ports, and runs the gate-level simulation.
//! [`characterize`] uses that harness to extract the two numbers the
//! token-level timing model needs: forward latency (first output token
//! relative to start) and steady-state cycle time per token.

use super::{behavioral::behavioral, build_operator, OperatorKind};
use crate::dualrail::{
    monitor_channel, ChannelReport, Consumer, ConsumerHandle, PairConsumer, Producer,
    ProducerHandle,
};
use crate::kernel::{DelayModel, NetId, NetlistBuilder, Ps, Simulation, Trace};

/// Everything observed from one standalone operator run.
pub struct OperatorRun {
    /// Consumed bits per output port.
    pub outputs: Vec<Vec<bool>>,
    /// (time, bit) consumption records per output port.
    pub records: Vec<Vec<(Ps, bool)>>,
    /// Whether each input producer emitted its whole stream.
    pub producers_done: Vec<bool>,
    /// Handshake monitor reports for all ports (inputs then outputs).
    pub reports: Vec<ChannelReport>,
    /// True if the simulation reached quiescence before the horizon.
    pub quiescent: bool,
    pub trace: Trace,
}

impl OperatorRun {
    pub fn all_clean(&self) -> bool {
        self.reports.iter().all(|r| r.is_clean())
    }

    pub fn violation_summary(&self) -> String {
        self.reports
            .iter()
            .filter(|r| !r.is_clean())
            .map(|r| format!("{}: {:?}", r.name, r.violations))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// Drive `kind` with `inputs` (one bit stream per input port) under
/// `model`, consuming every output eagerly, until quiescence or `t_max`.
pub fn run_operator(
    kind: &OperatorKind,
    inputs: &[Vec<bool>],
    model: &DelayModel,
    t_max: Ps,
) -> OperatorRun {
    run_operator_stretched(kind, inputs, model, t_max, &[])
}

/// Like [`run_operator`], but first stretches the delay of the gates
/// driving the named nets (operator nets are prefixed `op.`). A
/// delay-insensitive operator must produce the reference behaviour under
/// every stretch; a single stretch that makes it misbehave is a complete
/// counterexample to a DI claim.
pub fn run_operator_stretched(
    kind: &OperatorKind,
    inputs: &[Vec<bool>],
    model: &DelayModel,
    t_max: Ps,
    stretches: &[(&str, Ps)],
) -> OperatorRun {
    let mut b = NetlistBuilder::new();
    let ports = build_operator(&mut b, kind, "op");
    assert_eq!(
        ports.inputs.len(),
        inputs.len(),
        "one input stream per input port"
    );

    let mut prod_handles: Vec<ProducerHandle> = Vec::new();
    let mut cons_handles: Vec<ConsumerHandle> = Vec::new();
    let mut procs: Vec<(Box<dyn crate::kernel::Process>, Vec<NetId>)> = Vec::new();
    for (ch, bits) in ports.inputs.iter().zip(inputs) {
        ch.claim_producer(&mut b);
        let (p, h) = Producer::new(ch.clone(), bits.clone());
        procs.push((p, Producer::watch(ch).to_vec()));
        prod_handles.push(h);
    }
    // Outputs that share an acknowledge net (a join's pair) get one
    // paired consumer; everything else gets an independent one.
    let mut i = 0;
    while i < ports.outputs.len() {
        let ch = &ports.outputs[i];
        ch.claim_consumer(&mut b);
        let shared = ports.outputs.get(i + 1).filter(|n| n.ack == ch.ack);
        if let Some(next) = shared {
            let (c, [h0, h1]) = PairConsumer::new(ch.clone(), next.clone());
            procs.push((c, PairConsumer::watch(ch, next).to_vec()));
            cons_handles.push(h0);
            cons_handles.push(h1);
            i += 2;
        } else {
            let (c, h) = Consumer::new(ch.clone());
            procs.push((c, Consumer::watch(ch).to_vec()));
            cons_handles.push(h);
            i += 1;
        }
    }

    let mut netlist = b.finalize().expect("operator harness netlist is closed");
    for (net, ps) in stretches {
        assert!(
            netlist.stretch_gate(net, *ps),
            "no gate drives a net named '{net}'"
        );
    }
    let mut sim = Simulation::new(&netlist, model).expect("delay model resolves");
    let mut port_nets: Vec<NetId> = Vec::new();
    for ch in ports.inputs.iter().chain(&ports.outputs) {
        port_nets.extend(ch.nets());
    }
    sim.record_only(&port_nets);
    for (p, watch) in procs {
        sim.add_process(p, &watch);
    }
    let trace = sim.run(t_max);

    let mut reports = Vec::new();
    for (ch, name) in ports
        .inputs
        .iter()
        .zip(kind.port_names().0)
        .chain(ports.outputs.iter().zip(kind.port_names().1))
    {
        reports.push(monitor_channel(&trace, ch, name));
    }

    OperatorRun {
        outputs: cons_handles.iter().map(|h| h.bits()).collect(),
        records: cons_handles.iter().map(|h| h.records()).collect(),
        producers_done: prod_handles.iter().map(|h| h.is_done()).collect(),
        reports,
        quiescent: trace.is_quiescent(),
        trace,
    }
}

/// Canonical characterization stimulus: alternating bits on every input
/// port. Alternation exercises both rails and, for the selectors, both
/// steering directions.
pub fn probe_streams(kind: &OperatorKind, samples: usize) -> Vec<Vec<bool>> {
    let n_in = kind.port_names().0.len();
    (0..n_in)
        .map(|_| (0..samples).map(|k| k % 2 == 0).collect())
        .collect()
}

/// Measured timing of one operator under a delay model.
#[derive(Clone, Copy, Debug)]
pub struct Characterization {
    /// Start of simulation to first token on output port 0.
    pub forward_latency: Ps,
    /// Steady-state time per token on output port 0.
    pub cycle_time: Ps,
    /// Tokens observed on output port 0.
    pub tokens: usize,
}

/// Measure forward latency and cycle time of `kind` with `samples`
/// alternating input tokens. The cycle time averages the steady tail of
/// the output record (the first quarter is discarded as pipeline
/// fill).
pub fn characterize(kind: &OperatorKind, model: &DelayModel, samples: usize) -> Characterization {
    let inputs = probe_streams(kind, samples);
    let horizon = 2_000_000 + samples as Ps * 200_000;
    let run = run_operator(kind, &inputs, model, horizon);
    let rec = &run.records[0];
    assert!(
        rec.len() >= 2,
        "characterization needs at least two output tokens, got {}",
        rec.len()
    );
    let first = rec[0].0;
    let skip = rec.len() / 4;
    let steady = &rec[skip..];
    let span = steady.last().unwrap().0 - steady[0].0;
    let cycle_time = span / (steady.len() as Ps - 1).max(1);
    Characterization {
        forward_latency: first,
        cycle_time,
        tokens: rec.len(),
    }
}

/// Expected outputs for the same stimulus, from the behavioral model.
pub fn expected_outputs(kind: &OperatorKind, inputs: &[Vec<bool>], source_limit: usize) -> Vec<Vec<bool>> {
    behavioral(kind, inputs, source_limit)
}
