//! Reference interpreter: the graph's meaning as a Kahn process
//! network.
//!
//! Every node is an actor that fires when all of its operand queues are
//! non-empty, consuming one word from each and pushing one result to
//! every consumer.  An initialized register first emits its stored word,
//! then copies; an uninitialized one is a plain buffer.  The fixpoint is
//! schedule-independent, so these streams are *the* semantics that the
//! token- and gate-level simulations of an emitted configuration must
//! reproduce — the interpreter is the oracle for every rewrite.
//!
//! Constants are unbounded sources.  A cone driven only by constants
//! therefore never quiesces; `fuel` bounds the firings of each node so
//! such graphs still terminate (finite graphs are unaffected as long as
//! `fuel` exceeds their stream lengths).

use std::collections::VecDeque;

use super::ast::{Dfg, NodeKind};
use crate::dualrail::wrap;

/// Run the network to quiescence (or to `fuel` firings per node) and
/// return one stream per output, in output declaration order.
pub fn evaluate(dfg: &Dfg, inputs: &[Vec<i64>], fuel: usize) -> Vec<Vec<i64>> {
    assert_eq!(
        inputs.len(),
        dfg.inputs.len(),
        "graph `{}` has {} input(s), got {} stream(s)",
        dfg.name,
        dfg.inputs.len(),
        inputs.len()
    );
    let w = dfg.width;
    let n = dfg.nodes.len();
    let consumers = dfg.consumers();
    let const_val = |id: usize| match dfg.nodes[id].kind {
        NodeKind::Const(v) => Some(wrap(v, w)),
        _ => None,
    };

    // One FIFO per operand slot.  Queues from constant predecessors stay
    // unused: those operands are always available.
    let mut queues: Vec<Vec<VecDeque<i64>>> = dfg
        .nodes
        .iter()
        .map(|node| vec![VecDeque::new(); node.preds.len()])
        .collect();

    let push = |queues: &mut Vec<Vec<VecDeque<i64>>>, from: usize, value: i64| {
        for &(c, slot) in &consumers[from] {
            queues[c][slot].push_back(value);
        }
    };
    for (port, &nid) in dfg.inputs.iter().enumerate() {
        for &v in &inputs[port] {
            push(&mut queues, nid, wrap(v, w));
        }
    }
    for (id, node) in dfg.nodes.iter().enumerate() {
        if let NodeKind::Delay { init: Some(v) } = node.kind {
            push(&mut queues, id, wrap(v, w));
        }
    }

    let out_slot = |id: usize| dfg.outputs.iter().position(|&o| o == id);
    let mut results: Vec<Vec<i64>> = vec![Vec::new(); dfg.outputs.len()];
    let mut fired = vec![0usize; n];

    loop {
        let mut progress = false;
        for id in 0..n {
            if matches!(dfg.nodes[id].kind, NodeKind::Input | NodeKind::Const(_)) {
                continue;
            }
            while fired[id] < fuel {
                let node = &dfg.nodes[id];
                let ready = node
                    .preds
                    .iter()
                    .enumerate()
                    .all(|(s, &p)| const_val(p).is_some() || !queues[id][s].is_empty());
                if !ready {
                    break;
                }
                let value = match node.kind {
                    NodeKind::Add => wrap(take(&mut queues, dfg, id, 0) + take(&mut queues, dfg, id, 1), w),
                    NodeKind::Sub => wrap(take(&mut queues, dfg, id, 0) - take(&mut queues, dfg, id, 1), w),
                    NodeKind::MulConst(c) => wrap(c * take(&mut queues, dfg, id, 0), w),
                    NodeKind::Shl(k) => wrap(take(&mut queues, dfg, id, 0) << k, w),
                    NodeKind::Delay { .. } | NodeKind::Output => take(&mut queues, dfg, id, 0),
                    NodeKind::Input | NodeKind::Const(_) => unreachable!(),
                };
                match out_slot(id) {
                    Some(k) => results[k].push(value),
                    None => push(&mut queues, id, value),
                }
                fired[id] += 1;
                progress = true;
            }
        }
        if !progress {
            return results;
        }
    }
}

/// Pop operand `slot` of node `id`: from its queue, or synthesized when
/// the predecessor is a constant source.
fn take(queues: &mut [Vec<VecDeque<i64>>], dfg: &Dfg, id: usize, slot: usize) -> i64 {
    let p = dfg.nodes[id].preds[slot];
    match dfg.nodes[p].kind {
        NodeKind::Const(v) => wrap(v, dfg.width),
        _ => queues[id][slot].pop_front().expect("checked non-empty"),
    }
}
