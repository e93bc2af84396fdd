//! Ring analysis: enumerate the simple cycles implied by routing and
//! apply the pipeline occupancy law to each.
//!
//! A closed delay-insensitive ring advances only while it holds
//! strictly more than twice as many places as tokens
//! (`places >= 2*tokens + 1`); the deficit case wedges permanently.
//! Place and token contributions per operator follow directly from the
//! gate-level elaboration in [`super::gate`]:
//!
//! * `add`/`sub` — one empty sum-register stage: 1 place, 0 tokens
//!   (the carry loop is a private, always-live ring and does not
//!   count toward routing rings).
//! * `reg` — a chain of `2W-1` latch stages holding the `W` bits of
//!   the initial word in alternating slots: `2W-1` places, `W` tokens
//!   (0 tokens when configured without an initial word).
//! * `shl k` — `k` frame stages of 4 latches each, one injected frame
//!   bit per stage: `4k` places, `k` tokens.
//! * each link bubble — one empty *word* register (the memory cell a
//!   result is written into): `2W-1` places. A zero-bubble link is the
//!   degenerate cell-less case, the producer wired straight into the
//!   consumer's operand join.
//! * a spacer stage is inserted wherever a token-holding tail latch
//!   would power up in direct contact with a token-holding head latch
//!   (only possible on zero-bubble links; see `needs_spacer`): 1 place.
//!
//! With these numbers a plain accumulator ring (`add` + initialized
//! `reg`) holds `2W` places and `W` tokens at zero bubbles — exactly
//! one place short of live — so every zero-bubble cycle is correctly
//! predicted to deadlock, and a single bubble restores liveness.

use super::config::{OpId, OperatorFunction};
use super::validate::{MachineOp, ProducerRef};

/// Occupancy report for one simple cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingReport {
    /// Operation ids on the cycle, starting from the smallest dense index.
    pub ops: Vec<OpId>,
    pub places: u32,
    pub tokens: u32,
    pub predicted_live: bool,
}

/// Places and tokens a traversed operator contributes to a ring.
pub fn op_contribution(func: &OperatorFunction, initialized: bool, width: usize) -> (u32, u32) {
    let w = width as u32;
    match func {
        OperatorFunction::Add | OperatorFunction::Sub => (1, 0),
        OperatorFunction::Reg => (2 * w - 1, if initialized { w } else { 0 }),
        OperatorFunction::Shl { amount } => (4 * amount, *amount),
        // A constant source has no inputs and can never sit on a cycle.
        OperatorFunction::Const { .. } => (0, 0),
    }
}

/// Does the producer's final latch power up holding a token?
pub fn tail_holds_token(func: &OperatorFunction, initialized: bool) -> bool {
    match func {
        OperatorFunction::Reg => initialized,
        OperatorFunction::Shl { .. } => true,
        OperatorFunction::Const { .. } => true,
        OperatorFunction::Add | OperatorFunction::Sub => false,
    }
}

/// Does the consumer's first latch power up holding a token?
pub fn head_holds_token(func: &OperatorFunction, initialized: bool) -> bool {
    matches!(func, OperatorFunction::Reg) && initialized
}

/// A latch that powers up full must not have tokens presented to it
/// before it has drained: its input-side acknowledge is already high,
/// so (a) a full upstream tail latch would retire its power-up token
/// without transferring it, and (b) a fork feeding it would count the
/// stale acknowledge as a completed branch delivery and release the
/// other branches early. The elaborator breaks both cases with one
/// empty spacer stage, which the law must count.
pub fn needs_spacer(producer: &MachineOp, consumer: &MachineOp) -> bool {
    head_holds_token(&consumer.func, consumer.init.is_some())
        && (tail_holds_token(&producer.func, producer.init.is_some()) || producer.fanout() > 1)
}

/// Edge place cost from producer `p` to consumer `c` (both dense
/// indices): one empty word register per configured bubble, plus the
/// spacer a cell-less edge may need. Parallel edges (one producer
/// feeding several slots) take the cheapest slot, which is the
/// conservative choice for liveness.
fn edge_places(ops: &[MachineOp], p: usize, c: usize, width: usize) -> u32 {
    let bubbles = ops[c]
        .sources
        .iter()
        .zip(&ops[c].in_bubbles)
        .filter(|(s, _)| **s == ProducerRef::Op(p))
        .map(|(_, b)| *b)
        .min()
        .unwrap_or(0);
    if bubbles == 0 {
        u32::from(needs_spacer(&ops[p], &ops[c]))
    } else {
        bubbles * (2 * width as u32 - 1)
    }
}

const MAX_CYCLES: usize = 4096;

/// Enumerate every simple cycle (vertex-distinct, operator-level) and
/// score it against the occupancy law.
pub fn analyze_rings(ops: &[MachineOp], width: usize) -> Vec<RingReport> {
    let n = ops.len();
    // producer -> consumers, deduplicated.
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (c, op) in ops.iter().enumerate() {
        for s in &op.sources {
            if let ProducerRef::Op(p) = s {
                if !succ[*p].contains(&c) {
                    succ[*p].push(c);
                }
            }
        }
    }
    for list in &mut succ {
        list.sort_unstable();
    }

    let mut cycles: Vec<Vec<usize>> = Vec::new();
    let mut on_path = vec![false; n];
    let mut path: Vec<usize> = Vec::new();
    // Simple cycles are rooted at their smallest vertex: from each root
    // `s`, walk only vertices >= s and record paths that close on `s`.
    fn dfs(
        v: usize,
        root: usize,
        succ: &[Vec<usize>],
        on_path: &mut [bool],
        path: &mut Vec<usize>,
        cycles: &mut Vec<Vec<usize>>,
    ) {
        on_path[v] = true;
        path.push(v);
        for &w in &succ[v] {
            if w == root {
                if cycles.len() < MAX_CYCLES {
                    cycles.push(path.clone());
                }
            } else if w > root && !on_path[w] {
                dfs(w, root, succ, on_path, path, cycles);
            }
        }
        path.pop();
        on_path[v] = false;
    }
    for root in 0..n {
        dfs(root, root, &succ, &mut on_path, &mut path, &mut cycles);
    }

    cycles
        .into_iter()
        .map(|cycle| {
            let mut places = 0u32;
            let mut tokens = 0u32;
            for (i, &v) in cycle.iter().enumerate() {
                let op = &ops[v];
                let (p, t) = op_contribution(&op.func, op.init.is_some(), width);
                places += p;
                tokens += t;
                let next = cycle[(i + 1) % cycle.len()];
                places += edge_places(ops, v, next, width);
            }
            RingReport {
                ops: cycle.iter().map(|&v| ops[v].id).collect(),
                places,
                tokens,
                predicted_live: places >= 2 * tokens + 1,
            }
        })
        .collect()
}
