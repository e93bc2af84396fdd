//! Graph rewrites: the repeated-addend optimization and the
//! constant-multiply decomposition.
//!
//! Both rewrites are semantics-preserving in the Kahn-network sense
//! (checked against [`evaluate`](super::evaluate) in the test suite) and
//! both only ever *remove* adders and registers, trading them for shift
//! operators — which the hardware realizes as initialized bit-delay
//! stages inside the word frame, far cheaper than a full adder.

use std::collections::HashSet;

use super::ast::{Dfg, Node, NodeId, NodeKind};
use super::DfgError;
use crate::dualrail::wrap;

/// Collapse chains of additions of one repeated operand.
///
/// A term like `y = a + x + x + x` naively schedules three adders with a
/// pipeline buffer after each.  Because `x + x` is a fixed shift, the
/// same stream function is `y = (a + x) + (x << 1)`: two adders, one
/// buffer register, and one initialized bit-delay element doing the
/// shift.  Generally a chain of `k >= 3` additions of `x` onto a base
/// `b` becomes `(b + x) + sum of (x << p)` over the set bits `p` of
/// `k - 1`, which strictly reduces the adder count.  Graphs without the
/// pattern come back unchanged.
pub fn optimize_repeated_add(dfg: &Dfg) -> Dfg {
    let mut g = dfg.clone();
    let consumers = g.consumers();
    let is_add = |g: &Dfg, id: NodeId| matches!(g.nodes[id].kind, NodeKind::Add);

    // Follow single-consumer uninitialized buffers downstream from `id`,
    // returning the buffers crossed and the first non-buffer consumer
    // (with the operand slot it reads through).  `None` when fan-out
    // or an initialized register breaks the chain.
    let descend = |g: &Dfg, id: NodeId| -> Option<(Vec<NodeId>, NodeId, usize)> {
        let mut bufs = Vec::new();
        let mut seen = HashSet::new();
        let (mut cur, mut slot) = match consumers[id][..] {
            [(c, s)] => (c, s),
            _ => return None,
        };
        while matches!(g.nodes[cur].kind, NodeKind::Delay { init: None }) {
            if !seen.insert(cur) {
                return None; // buffer-only cycle
            }
            let [(c, s)] = consumers[cur][..] else {
                return None;
            };
            bufs.push(cur);
            (cur, slot) = (c, s);
        }
        Some((bufs, cur, slot))
    };

    // The chain step: from add `cur` with repeated operand `x`, the next
    // chain member is `cur`'s sole (buffered) consumer when that is an
    // add whose other operand is `x` again.
    let next = |g: &Dfg, cur: NodeId, x: NodeId| -> Option<(Vec<NodeId>, NodeId)> {
        let (bufs, c, slot) = descend(g, cur)?;
        (is_add(g, c) && g.nodes[c].preds[1 - slot] == x).then_some((bufs, c))
    };

    struct Chain {
        adds: Vec<NodeId>,
        buffers: Vec<NodeId>,
        base: NodeId,
        x: NodeId,
    }

    let mut claimed: HashSet<NodeId> = HashSet::new();
    let mut chains: Vec<Chain> = Vec::new();
    for head in 0..g.nodes.len() {
        if !is_add(&g, head) || claimed.contains(&head) {
            continue;
        }
        // Try each operand as the repeated one; a chain only counts from
        // its head, i.e. when no earlier add links into `head` with the
        // same repeated operand.
        for side in [1usize, 0] {
            let x = g.nodes[head].preds[side];
            let base = g.nodes[head].preds[1 - side];
            if side == 0 && x == base {
                continue; // both operands equal: side 1 already tried it
            }
            let interior = g.nodes[head].preds.iter().enumerate().any(|(s, &p)| {
                g.nodes[head].preds[1 - s] == x
                    && matches!(g.nodes[p].kind, NodeKind::Add | NodeKind::Delay { init: None })
                    && upstream_links(&g, &consumers, p, x)
            });
            if interior {
                continue;
            }
            let mut adds = vec![head];
            let mut buffers = Vec::new();
            let mut cur = head;
            while let Some((bufs, c)) = next(&g, cur, x) {
                if claimed.contains(&c) {
                    break;
                }
                buffers.extend(bufs);
                adds.push(c);
                cur = c;
            }
            if adds.len() >= 3 {
                claimed.extend(adds.iter().copied());
                claimed.extend(buffers.iter().copied());
                chains.push(Chain {
                    adds,
                    buffers,
                    base,
                    x,
                });
                break;
            }
        }
    }

    let mut dead: HashSet<NodeId> = HashSet::new();
    for chain in chains {
        let k = chain.adds.len();
        let head = chain.adds[0];
        let end = *chain.adds.last().unwrap();
        // Set-bit positions of k-1: the shift terms that replace the
        // k-1 interior additions of x.
        let positions: Vec<u32> = (0..usize::BITS)
            .filter(|p| (k - 1) & (1usize << p) != 0)
            .collect();
        if positions.last().copied().unwrap_or(0) as usize >= g.width {
            continue; // shift would overrun the word; keep the chain
        }

        // Head becomes the base addition b + x, keeping its id and name.
        g.nodes[head].kind = NodeKind::Add;
        g.nodes[head].preds = vec![chain.base, chain.x];

        // Fold the shift terms in; the last fold lands on the chain
        // end's id so every downstream consumer stays wired.
        let mut acc = head;
        for (i, &p) in positions.iter().enumerate() {
            let term = if p == 0 {
                chain.x
            } else {
                let name = g.fresh_name(&format!("{}_sh{p}", g.nodes[chain.x].name));
                g.nodes.push(Node {
                    name,
                    kind: NodeKind::Shl(p),
                    preds: vec![chain.x],
                });
                g.nodes.len() - 1
            };
            let last = i + 1 == positions.len();
            if last {
                g.nodes[end].kind = NodeKind::Add;
                g.nodes[end].preds = vec![acc, term];
                acc = end;
            } else {
                let name = g.fresh_name(&format!("{}_p{i}", g.nodes[end].name));
                g.nodes.push(Node {
                    name,
                    kind: NodeKind::Add,
                    preds: vec![acc, term],
                });
                acc = g.nodes.len() - 1;
            }
        }

        dead.extend(chain.adds[1..k - 1].iter().copied());
        dead.extend(chain.buffers.iter().copied());
    }

    if !dead.is_empty() || g != *dfg {
        g.retain_nodes(&dead);
    }
    g
}

/// True when some add links *into* `p`'s position with repeated operand
/// `x` — i.e. `p` (an add, or a buffer trailing one) is itself fed by a
/// qualifying chain predecessor, making its consumer an interior member.
fn upstream_links(g: &Dfg, consumers: &[Vec<(NodeId, usize)>], p: NodeId, x: NodeId) -> bool {
    // Resolve buffers back to the producing add.
    let mut cur = p;
    let mut seen = HashSet::new();
    while let NodeKind::Delay { init: None } = g.nodes[cur].kind {
        if consumers[cur].len() != 1 || !seen.insert(cur) {
            return false;
        }
        cur = g.nodes[cur].preds[0];
    }
    matches!(g.nodes[cur].kind, NodeKind::Add)
        && consumers[cur].len() == 1
        && g.nodes[cur].preds.contains(&x)
}

/// Lower every constant multiplication to shifts and additions.
///
/// The digit set is chosen per constant: plain binary over the width-bit
/// residue, or canonical signed digits when those need strictly fewer
/// combining operators (ties go to binary, so `3x` stays `x + (x<<1)`
/// rather than `(x<<2) - x`).  `1x` splices to a wire, `0x` becomes the
/// constant zero.  Constants must fit the word width.
pub fn decompose_mul_const(dfg: &Dfg) -> Result<Dfg, DfgError> {
    let mut g = dfg.clone();
    let w = g.width;
    let mut dead: HashSet<NodeId> = HashSet::new();

    for id in 0..g.nodes.len() {
        let NodeKind::MulConst(c) = g.nodes[id].kind else {
            continue;
        };
        if wrap(c, w) != c {
            return Err(DfgError::ConstantOverflow { value: c, width: w });
        }
        let x = g.nodes[id].preds[0];

        if c == 0 {
            g.nodes[id].kind = NodeKind::Const(0);
            g.nodes[id].preds.clear();
            continue;
        }
        if c == 1 {
            for node in &mut g.nodes {
                for pred in &mut node.preds {
                    if *pred == id {
                        *pred = x;
                    }
                }
            }
            dead.insert(id);
            continue;
        }

        let digits = choose_digits(c, w);
        debug_assert!(!digits.is_empty());
        let lead = digits.iter().position(|&(_, sign)| sign > 0);

        // A single positive digit is exactly one shift, rewritten in
        // place (position 0 would be c == 1, spliced above).
        if digits.len() == 1 && lead.is_some() {
            debug_assert!(digits[0].0 > 0);
            g.nodes[id].kind = NodeKind::Shl(digits[0].0);
            continue;
        }

        let mulc_name = g.nodes[id].name.clone();
        let term = |g: &mut Dfg, pos: u32| -> NodeId {
            if pos == 0 {
                return x;
            }
            let name = g.fresh_name(&format!("{mulc_name}_s{pos}"));
            g.nodes.push(Node {
                name,
                kind: NodeKind::Shl(pos),
                preds: vec![x],
            });
            g.nodes.len() - 1
        };

        // Terms in digit order, except that a positive term leads when
        // one exists; with none, subtract everything from an explicit
        // zero.
        let mut order: Vec<usize> = (0..digits.len()).collect();
        let mut acc = match lead {
            Some(i) => {
                order.remove(i);
                term(&mut g, digits[i].0)
            }
            None => {
                let name = g.fresh_name(&format!("{mulc_name}_z"));
                g.nodes.push(Node {
                    name,
                    kind: NodeKind::Const(0),
                    preds: vec![],
                });
                g.nodes.len() - 1
            }
        };

        for (i, &di) in order.iter().enumerate() {
            let (pos, sign) = digits[di];
            let t = term(&mut g, pos);
            let kind = if sign > 0 { NodeKind::Add } else { NodeKind::Sub };
            let last = i + 1 == order.len();
            if last {
                g.nodes[id].kind = kind;
                g.nodes[id].preds = vec![acc, t];
            } else {
                let name = g.fresh_name(&format!("{mulc_name}_t{i}"));
                g.nodes.push(Node {
                    name,
                    kind,
                    preds: vec![acc, t],
                });
                acc = g.nodes.len() - 1;
            }
        }
    }

    g.retain_nodes(&dead);
    Ok(g)
}

/// Digit plan for multiplying by `c` at width `w`: `(position, sign)`
/// terms, positions strictly below `w`.  Binary expands the unsigned
/// residue of `c` (multiplication is invariant under it modulo `2^w`);
/// canonical signed digits are used only when strictly cheaper.
fn choose_digits(c: i64, w: usize) -> Vec<(u32, i8)> {
    let residue = (c as u64) & ((1u64 << w) - 1);
    let binary: Vec<(u32, i8)> = (0..w as u32)
        .filter(|p| residue >> p & 1 == 1)
        .map(|p| (p, 1i8))
        .collect();
    let csd = csd_digits(c);

    let combine = |digits: &[(u32, i8)]| -> usize {
        let all_negative = digits.iter().all(|&(_, s)| s < 0);
        digits.len() - 1 + usize::from(all_negative)
    };
    let csd_fits = csd.iter().all(|&(p, _)| (p as usize) < w);
    if csd_fits && combine(&csd) < combine(&binary) {
        csd
    } else {
        binary
    }
}

/// Canonical signed-digit form: digits in `{-1, 0, +1}` with no two
/// adjacent non-zeros, minimal non-zero count.
fn csd_digits(c: i64) -> Vec<(u32, i8)> {
    let mut v = c;
    let mut pos = 0u32;
    let mut out = Vec::new();
    while v != 0 {
        if v & 1 != 0 {
            let d: i64 = if v.rem_euclid(4) == 1 { 1 } else { -1 };
            out.push((pos, d as i8));
            v -= d;
        }
        v >>= 1;
        pos += 1;
    }
    out
}
