//! Token-level simulation: the processor executed at word granularity.
//!
//! Execution follows the memory/routing/operation ring: each operation
//! assembles its operand words (one arrival per valid flag); once every
//! flag is set the token is dispatched to its operator instance — FIFO
//! by ready time, operation id as the tie break — the function is
//! applied, and guard evaluation delivers the result to the destination
//! cells or output ports, setting the consumers' valid flags. Flags
//! clear on dispatch, so no token executes twice per delivery.
//!
//! The network is a Kahn process network: output *values* are
//! independent of link capacities and scheduling, so this level
//! computes the exact output sequences. Time is accounted from
//! characterized gate-level operator timings (memoized per operator
//! kind and delay model). The deadlock verdict for closed rings is the
//! occupancy law from [`super::analysis`] — the same law the gate
//! level realizes physically — because a word-granular scheduler
//! cannot see bit-level pipeline saturation.

use std::collections::{HashMap, VecDeque};
use std::sync::{Mutex, OnceLock};

use crate::dualrail::{word_to_bits, wrap};
use crate::kernel::{DelayModel, GateKind, Ps};
use crate::oplib::{characterize, OperatorKind, RegisterInit};

use super::config::{OperatorFunction, Word};
use super::validate::{ConfigError, DestRef, Machine, ProducerRef};
use super::{timing_summary, RunError, RunReport};

/// High-water mark of one operand link.
#[derive(Clone, Debug)]
pub struct LinkOccupancy {
    pub from: String,
    pub to: String,
    pub max_words: usize,
}

/// Bookkeeping exposed through the status interface.
#[derive(Clone, Debug, Default)]
pub struct TokenRunStats {
    pub tokens_dispatched: u64,
    pub words_emitted: u64,
    pub links: Vec<LinkOccupancy>,
    /// Per closed ring: words resident at power-up, and whether that
    /// count held at every dispatch (token conservation).
    pub ring_tokens: Vec<(u32, bool)>,
}

/// Stable fingerprint of a delay model, for the characterization memo.
fn model_fingerprint(model: &DelayModel) -> String {
    match model {
        DelayModel::Fixed(table) => {
            let mut s = String::from("fixed");
            for kind in GateKind::ALL {
                if let Ok(ps) = table.get(kind) {
                    s.push_str(&format!(",{}={}", kind.token(), ps));
                }
            }
            s
        }
        DelayModel::Randomized {
            min_ps,
            max_ps,
            seed,
        } => format!("rnd,{min_ps},{max_ps},{seed}"),
    }
}

fn op_kind(func: &OperatorFunction, width: usize) -> OperatorKind {
    match func {
        // The subtractor is the adder with crossed input rails: same timing.
        OperatorFunction::Add | OperatorFunction::Sub => OperatorKind::SerialAdder { width },
        OperatorFunction::Reg => OperatorKind::Register(RegisterInit::Empty),
        OperatorFunction::Shl { .. } => OperatorKind::FrameGatedDelay { width, init: false },
        OperatorFunction::Const { value } => OperatorKind::ConstRing {
            bits: word_to_bits(*value, width),
        },
    }
}

/// Characterized service time for one word through `func`: the
/// steady-state per-bit cycle time of the corresponding gate-level
/// operator, times the word width. Memoized per (kind, model).
fn word_time(func: &OperatorFunction, width: usize, model: &DelayModel) -> Ps {
    static MEMO: OnceLock<Mutex<HashMap<String, Ps>>> = OnceLock::new();
    let kind = op_kind(func, width);
    let key = format!("{kind:?}|{}", model_fingerprint(model));
    let memo = MEMO.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(ps) = memo.lock().unwrap().get(&key) {
        return *ps;
    }
    let c = characterize(&kind, model, 24);
    let per_word = c.cycle_time * width as Ps;
    memo.lock().unwrap().insert(key, per_word);
    per_word
}

fn apply(func: &OperatorFunction, operands: &[Word], width: usize) -> Word {
    match func {
        OperatorFunction::Add => wrap(operands[0] + operands[1], width),
        OperatorFunction::Sub => wrap(operands[0] - operands[1], width),
        OperatorFunction::Reg => operands[0],
        OperatorFunction::Shl { amount } => wrap(operands[0] << amount, width),
        OperatorFunction::Const { value } => *value,
    }
}

struct Edge {
    queue: VecDeque<(Ps, Word)>,
    cap: usize,
    max_seen: usize,
}

pub(super) fn run(
    machine: &Machine,
    inputs: &[Vec<Word>],
    model: &DelayModel,
    t_max: Ps,
) -> Result<RunReport, ConfigError> {
    let dense_of: HashMap<u32, usize> = machine
        .ops
        .iter()
        .enumerate()
        .map(|(i, o)| (o.id, i))
        .collect();

    // One edge per operand slot. Input-port edges are unbounded (the
    // stimulus is external); operator links hold one word in the cell
    // slot plus one per configured bubble.
    let mut edges: Vec<Vec<Edge>> = machine
        .ops
        .iter()
        .map(|op| {
            op.sources
                .iter()
                .zip(&op.in_bubbles)
                .map(|(src, bubbles)| Edge {
                    queue: VecDeque::new(),
                    cap: match src {
                        ProducerRef::Input(_) => usize::MAX,
                        ProducerRef::Op(_) => 1 + *bubbles as usize,
                    },
                    max_seen: 0,
                })
                .collect()
        })
        .collect();

    // Initial memory image: preloaded operands are ready at t = 0.
    for (i, op) in machine.ops.iter().enumerate() {
        if let Some(init) = &op.init {
            for (s, (&valid, &word)) in init.valid.iter().zip(&init.operands).enumerate() {
                if valid {
                    edges[i][s].queue.push_back((0, word));
                }
            }
        }
    }
    // Whole input streams are available from t = 0.
    for (i, op) in machine.ops.iter().enumerate() {
        for (s, src) in op.sources.iter().enumerate() {
            if let ProducerRef::Input(k) = src {
                for &w in &inputs[*k] {
                    edges[i][s].queue.push_back((0, w));
                }
            }
        }
    }

    // Ring bookkeeping: the operand edges that lie on each ring.
    let ring_edges: Vec<Vec<(usize, usize)>> = machine
        .rings
        .iter()
        .map(|ring| {
            let cyc: Vec<usize> = ring.ops.iter().map(|id| dense_of[id]).collect();
            let mut list = Vec::new();
            for (pos, &p) in cyc.iter().enumerate() {
                let c = cyc[(pos + 1) % cyc.len()];
                for (s, src) in machine.ops[c].sources.iter().enumerate() {
                    if *src == ProducerRef::Op(p) {
                        list.push((c, s));
                    }
                }
            }
            list
        })
        .collect();
    let ring_count =
        |edges: &[Vec<Edge>], re: &[(usize, usize)]| -> u32 {
            re.iter().map(|&(c, s)| edges[c][s].queue.len() as u32).sum()
        };
    let mut ring_tokens: Vec<(u32, bool)> = ring_edges
        .iter()
        .map(|re| (ring_count(&edges, re), true))
        .collect();

    let mut stats = TokenRunStats {
        ring_tokens: ring_tokens.clone(),
        ..TokenRunStats::default()
    };

    // A ring below the occupancy threshold wedges before completing a
    // single word at gate level; the word-granular scheduler would sail
    // past it, so the law's verdict is applied up front.
    if machine.predicted_deadlock() {
        let bad: Vec<String> = machine
            .rings
            .iter()
            .filter(|r| !r.predicted_live)
            .map(|r| format!("{:?} ({} places, {} tokens)", r.ops, r.places, r.tokens))
            .collect();
        return Ok(RunReport {
            outputs: vec![Vec::new(); machine.n_outputs],
            output_times: vec![Vec::new(); machine.n_outputs],
            latency_ps: None,
            throughput_per_ns: 0.0,
            deadlock: true,
            error: Some(RunError::Deadlock(format!(
                "ring(s) below occupancy threshold: {}",
                bad.join("; ")
            ))),
            stats,
        });
    }

    let n_instances = machine.ops.iter().map(|o| o.inst + 1).max().unwrap_or(0);
    let mut inst_free: Vec<Ps> = vec![0; n_instances];
    let word_times: Vec<Ps> = machine
        .ops
        .iter()
        .map(|op| word_time(&op.func, machine.width, model))
        .collect();

    let mut outputs: Vec<Vec<(Ps, Word)>> = vec![Vec::new(); machine.n_outputs];
    let mut pending_beyond_tmax = false;

    loop {
        // Earliest-ready dispatchable operation, id as tie break.
        let mut best: Option<(Ps, u32, usize)> = None;
        'ops: for (i, op) in machine.ops.iter().enumerate() {
            let mut ready = inst_free[op.inst];
            for (s, _) in op.sources.iter().enumerate() {
                match edges[i][s].queue.front() {
                    Some(&(t, _)) => ready = ready.max(t),
                    None => continue 'ops,
                }
            }
            for (_, d) in op.enabled_dests() {
                if let DestRef::Slot { op: c, slot } = d {
                    let e = &edges[*c][*slot];
                    if e.queue.len() >= e.cap {
                        continue 'ops;
                    }
                }
            }
            if best.is_none_or(|(bt, bid, _)| (ready, op.id) < (bt, bid)) {
                best = Some((ready, op.id, i));
            }
        }
        let Some((t_fire, _, i)) = best else { break };
        if t_fire > t_max {
            pending_beyond_tmax = true;
            break;
        }

        let op = &machine.ops[i];
        let mut operands = Vec::with_capacity(op.sources.len());
        for s in 0..op.sources.len() {
            operands.push(edges[i][s].queue.pop_front().unwrap().1);
        }
        let result = apply(&op.func, &operands, machine.width);
        let t_done = t_fire + word_times[i];
        inst_free[op.inst] = t_done;
        stats.tokens_dispatched += 1;

        let deliveries: Vec<DestRef> = op.enabled_dests().map(|(_, d)| d.clone()).collect();
        for d in deliveries {
            match d {
                DestRef::Slot { op: c, slot } => {
                    let e = &mut edges[c][slot];
                    e.queue.push_back((t_done, result));
                    e.max_seen = e.max_seen.max(e.queue.len());
                }
                DestRef::Output(k) => {
                    outputs[k].push((t_done, result));
                    stats.words_emitted += 1;
                }
                DestRef::Remote { .. } => unreachable!("rejected before simulation"),
            }
        }

        for (r, re) in ring_edges.iter().enumerate() {
            if ring_count(&edges, re) != ring_tokens[r].0 {
                ring_tokens[r].1 = false;
            }
        }
    }

    let leftover: usize = machine
        .ops
        .iter()
        .enumerate()
        .flat_map(|(i, op)| {
            op.sources.iter().enumerate().filter_map(move |(s, src)| {
                matches!(src, ProducerRef::Input(_)).then_some((i, s))
            })
        })
        .map(|(i, s)| edges[i][s].queue.len())
        .sum();

    let (deadlock, error) = if leftover > 0 && pending_beyond_tmax {
        (false, Some(RunError::OscillationAtTmax { t_max_ps: t_max }))
    } else if leftover > 0 {
        (
            true,
            Some(RunError::Deadlock(format!(
                "{leftover} input word(s) never consumed"
            ))),
        )
    } else {
        (false, None)
    };

    stats.ring_tokens = ring_tokens;
    stats.links = machine
        .ops
        .iter()
        .enumerate()
        .flat_map(|(i, op)| {
            let edges = &edges;
            op.sources.iter().enumerate().map(move |(s, src)| {
                let from = match src {
                    ProducerRef::Input(k) => format!("IN[{k}]"),
                    ProducerRef::Op(p) => format!("op{}", machine.ops[*p].id),
                };
                LinkOccupancy {
                    from,
                    to: format!("op{}[{s}]", op.id),
                    max_words: edges[i][s].max_seen,
                }
            })
        })
        .collect();

    let output_words: Vec<Vec<Word>> = outputs
        .iter()
        .map(|v| v.iter().map(|&(_, w)| w).collect())
        .collect();
    let output_times: Vec<Vec<Ps>> = outputs
        .iter()
        .map(|v| v.iter().map(|&(t, _)| t).collect())
        .collect();
    let (latency_ps, throughput_per_ns) = timing_summary(&output_times);

    Ok(RunReport {
        outputs: output_words,
        output_times,
        latency_ps,
        throughput_per_ns: if deadlock { 0.0 } else { throughput_per_ns },
        deadlock,
        error,
        stats,
    })
}
