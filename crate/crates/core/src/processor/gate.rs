//! Gate-level elaboration: lower a validated [`Machine`] to a dual-rail
//! netlist built entirely from operator-library fragments, and simulate
//! it bit by bit under an arbitrary delay model.
//!
//! Lowering rules:
//!
//! * `add`/`sub` — the bit-serial DIMS adder (subtraction crosses the
//!   second operand's rails and refills the carry loop with ones);
//! * `reg` — a chain of `2W-1` half-buffer stages; an initial word sits
//!   in the odd stages (most significant bit nearest the input) so the
//!   least significant bit is emitted first, and every power-up token
//!   has its trailing spacer stage;
//! * `shl k` — `k` cascaded frame-gated delays (drop the frame's last
//!   bit, inject a zero at the frame start: one left shift per stage);
//! * `const v` — a closed self-refilling ring emitting the word
//!   cyclically;
//! * links — one empty *word* register (`2W-1` half-buffer stages, the
//!   memory cell a result is written into) per configured bubble; a
//!   zero-bubble link is wired straight into the consumer's operand
//!   join, with one spacer stage where [`needs_spacer`] demands it;
//! * fan-out — trees of 2-way forks (C-element acknowledge merge).
//!
//! External input ports are driven by four-phase producer processes,
//! output ports drained by eager consumer processes; both live outside
//! the netlist, so the machine sees a maximally willing environment.

use crate::dualrail::{words_to_bits, Channel, Consumer, Producer};
use crate::kernel::{DelayModel, GateKind, Netlist, NetlistBuilder, Ps, Simulation};
use crate::oplib::fragments::{self, AdderCore, RegisterInit};

use super::analysis::needs_spacer;
use super::config::{OperatorFunction, TokenInit};
use super::token_sim::TokenRunStats;
use super::validate::{ConfigError, DestRef, Machine, ProducerRef};
use super::{timing_summary, RunError, RunReport};

/// A fully elaborated processor: the netlist plus its port channels.
pub struct GateInstance {
    pub netlist: Netlist,
    pub inputs: Vec<Channel>,
    pub outputs: Vec<Channel>,
}

/// Plain 1:1 channel connection (rails forward, acknowledge back).
fn wire(b: &mut NetlistBuilder, from: &Channel, to: &Channel) {
    b.gate(GateKind::Buf, &[from.t], to.t);
    b.gate(GateKind::Buf, &[from.f], to.f);
    b.gate(GateKind::Buf, &[to.ack], from.ack);
}

/// Connect `from` to every `(target, stages)`: `stages` empty buffer
/// stages in front of each target, and a fork tree when there are
/// several targets.
fn connect(b: &mut NetlistBuilder, from: &Channel, targets: &[(Channel, usize)], prefix: &str) {
    let chain = |b: &mut NetlistBuilder, n: usize, i: &Channel, o: &Channel, p: &str| {
        fragments::register_chain(b, &vec![RegisterInit::Empty; n], i, o, p);
    };
    match targets {
        [] => unreachable!("validation guarantees at least one destination"),
        [(to, 0)] => wire(b, from, to),
        [(to, stages)] => chain(b, *stages, from, to, &format!("{prefix}.buf0")),
        _ => {
            let entries: Vec<Channel> = targets
                .iter()
                .enumerate()
                .map(|(j, (to, stages))| {
                    if *stages == 0 {
                        to.clone()
                    } else {
                        let leaf = Channel::new(b, &format!("{prefix}.leaf{j}"));
                        chain(b, *stages, &leaf, to, &format!("{prefix}.buf{j}"));
                        leaf
                    }
                })
                .collect();
            let mut src = from.clone();
            for j in 0..entries.len() - 1 {
                if j == entries.len() - 2 {
                    fragments::fork2(
                        b,
                        &src,
                        &entries[j],
                        &entries[j + 1],
                        &format!("{prefix}.fork{j}"),
                    );
                } else {
                    let rest = Channel::new(b, &format!("{prefix}.rest{j}"));
                    fragments::fork2(b, &src, &entries[j], &rest, &format!("{prefix}.fork{j}"));
                    src = rest;
                }
            }
        }
    }
}

fn reg_stages(init: Option<&TokenInit>, width: usize) -> Vec<RegisterInit> {
    match init {
        Some(t) if t.valid.first().copied().unwrap_or(false) => {
            let bits = crate::dualrail::word_to_bits(t.operands[0], width);
            let mut stages = Vec::with_capacity(2 * width - 1);
            for j in (0..width).rev() {
                stages.push(RegisterInit::from_bit(bits[j]));
                if j > 0 {
                    stages.push(RegisterInit::Empty);
                }
            }
            stages
        }
        _ => vec![RegisterInit::Empty; 2 * width - 1],
    }
}

/// Lower `machine` to a closed dual-rail netlist with named port
/// channels (`in<k>`, `out<k>`).
pub fn elaborate(machine: &Machine) -> Result<GateInstance, ConfigError> {
    let w = machine.width;
    let mut b = NetlistBuilder::new();

    let in_chs: Vec<Channel> = (0..machine.n_inputs)
        .map(|k| Channel::new(&mut b, &format!("in{k}")))
        .collect();
    let out_chs: Vec<Channel> = (0..machine.n_outputs)
        .map(|k| Channel::new(&mut b, &format!("out{k}")))
        .collect();
    let op_out: Vec<Channel> = machine
        .ops
        .iter()
        .map(|op| Channel::new(&mut b, &format!("op{}.out", op.id)))
        .collect();
    let slot_ch: Vec<Vec<Channel>> = machine
        .ops
        .iter()
        .map(|op| {
            (0..op.sources.len())
                .map(|s| Channel::new(&mut b, &format!("op{}.in{s}", op.id)))
                .collect()
        })
        .collect();

    // Operator bodies.
    for (i, op) in machine.ops.iter().enumerate() {
        let prefix = format!("op{}", op.id);
        match &op.func {
            OperatorFunction::Add => fragments::serial_addsub(
                &mut b,
                w,
                AdderCore::Dims,
                false,
                &slot_ch[i][0],
                &slot_ch[i][1],
                &op_out[i],
                &prefix,
            ),
            OperatorFunction::Sub => fragments::serial_addsub(
                &mut b,
                w,
                AdderCore::Dims,
                true,
                &slot_ch[i][0],
                &slot_ch[i][1],
                &op_out[i],
                &prefix,
            ),
            OperatorFunction::Reg => fragments::register_chain(
                &mut b,
                &reg_stages(op.init.as_ref(), w),
                &slot_ch[i][0],
                &op_out[i],
                &prefix,
            ),
            OperatorFunction::Shl { amount } => {
                let mut cur = slot_ch[i][0].clone();
                for j in 0..*amount {
                    let next = if j + 1 == *amount {
                        op_out[i].clone()
                    } else {
                        Channel::new(&mut b, &format!("{prefix}.sh{j}"))
                    };
                    fragments::frame_gated_delay(&mut b, w, false, &cur, &next, &format!("{prefix}.f{j}"));
                    cur = next;
                }
            }
            OperatorFunction::Const { value } => fragments::const_ring(
                &mut b,
                &crate::dualrail::word_to_bits(*value, w),
                w + 1,
                &op_out[i],
                &prefix,
            ),
        }
    }

    // Input port edges: every (op, slot) reading IN[k]. A port has no
    // power-up token, so a spacer is needed only when the port fans out
    // into an initialized register head.
    for (k, in_ch) in in_chs.iter().enumerate() {
        let mut targets: Vec<(usize, usize)> = Vec::new();
        for (i, op) in machine.ops.iter().enumerate() {
            for (s, src) in op.sources.iter().enumerate() {
                if *src == ProducerRef::Input(k) {
                    targets.push((i, s));
                }
            }
        }
        let fanout = targets.len();
        let wired: Vec<(Channel, usize)> = targets
            .into_iter()
            .map(|(i, s)| {
                let op = &machine.ops[i];
                let head_token = super::analysis::head_holds_token(&op.func, op.init.is_some());
                let stages = match op.in_bubbles[s] as usize {
                    0 => usize::from(fanout > 1 && head_token),
                    bubbles => bubbles * (2 * w - 1),
                };
                (slot_ch[i][s].clone(), stages)
            })
            .collect();
        connect(&mut b, in_ch, &wired, &format!("in{k}.edge"));
        in_ch.claim_producer(&mut b);
    }

    // Operator output edges.
    for (p, op) in machine.ops.iter().enumerate() {
        let targets: Vec<(Channel, usize)> = op
            .enabled_dests()
            .map(|(_, d)| match d {
                DestRef::Slot { op: c, slot } => {
                    let consumer = &machine.ops[*c];
                    let stages = match consumer.in_bubbles[*slot] as usize {
                        0 => usize::from(needs_spacer(op, consumer)),
                        bubbles => bubbles * (2 * w - 1),
                    };
                    (slot_ch[*c][*slot].clone(), stages)
                }
                DestRef::Output(k) => (
                    out_chs[*k].clone(),
                    machine.output_bubbles[*k] as usize * (2 * w - 1),
                ),
                DestRef::Remote { .. } => {
                    unreachable!("remote destinations are resolved by network merging")
                }
            })
            .collect();
        connect(&mut b, &op_out[p], &targets, &format!("op{}.edge", op.id));
    }

    for out_ch in &out_chs {
        out_ch.claim_consumer(&mut b);
    }

    let netlist = b.finalize().map_err(|errs| ConfigError::InconsistentRouting {
        msg: format!("elaboration produced an open netlist: {errs:?}"),
    })?;
    Ok(GateInstance {
        netlist,
        inputs: in_chs,
        outputs: out_chs,
    })
}

pub(super) fn run(
    machine: &Machine,
    inputs: &[Vec<super::config::Word>],
    model: &DelayModel,
    t_max: Ps,
) -> Result<RunReport, ConfigError> {
    let inst = elaborate(machine)?;
    let mut sim =
        Simulation::new(&inst.netlist, model).map_err(|e| ConfigError::InconsistentRouting {
            msg: format!("delay model rejected the netlist: {e}"),
        })?;

    let mut producer_handles = Vec::new();
    for (k, ch) in inst.inputs.iter().enumerate() {
        let bits = words_to_bits(&inputs[k], machine.width);
        let (proc, handle) = Producer::new(ch.clone(), bits);
        sim.add_process(proc, &Producer::watch(ch));
        producer_handles.push(handle);
    }
    let mut consumer_handles = Vec::new();
    for ch in &inst.outputs {
        let (proc, handle) = Consumer::new(ch.clone());
        sim.add_process(proc, &Consumer::watch(ch));
        consumer_handles.push(handle);
    }

    let trace = sim.run(t_max);
    let quiescent = trace.is_quiescent();
    let producers_done = producer_handles.iter().all(|h| h.is_done());

    let mut outputs = Vec::with_capacity(consumer_handles.len());
    let mut output_times = Vec::with_capacity(consumer_handles.len());
    for h in &consumer_handles {
        let words = h.words(machine.width);
        outputs.push(words.iter().map(|&(_, w)| w).collect::<Vec<_>>());
        output_times.push(words.iter().map(|&(t, _)| t).collect::<Vec<_>>());
    }

    let deadlock = quiescent && !producers_done;
    let error = if !quiescent {
        Some(RunError::OscillationAtTmax { t_max_ps: t_max })
    } else if deadlock {
        Some(RunError::Deadlock(format!(
            "quiescent at {} ps with {} producer(s) stalled",
            trace.quiescent_at.unwrap_or(0),
            producer_handles.iter().filter(|h| !h.is_done()).count()
        )))
    } else {
        None
    };

    let (latency_ps, throughput_per_ns) = timing_summary(&output_times);
    let words_emitted: u64 = outputs.iter().map(|v| v.len() as u64).sum();
    Ok(RunReport {
        outputs,
        output_times,
        latency_ps,
        throughput_per_ns: if deadlock { 0.0 } else { throughput_per_ns },
        deadlock,
        error,
        stats: TokenRunStats {
            words_emitted,
            ..TokenRunStats::default()
        },
    })
}
