//! Structure reporting: the operation / register / feedback-cycle
//! counts used to compare implementation variants.

use super::ast::{Dfg, NodeKind};

/// The three columns of a structure report.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StructureCounts {
    /// Arithmetic nodes: `add`, `sub`, `shl`, and (before decomposition)
    /// `mulc`.
    pub operations: usize,
    /// Register nodes (`reg`), initialized or not.
    pub registers: usize,
    /// Simple directed cycles.  Every one passes through a register —
    /// register-free cycles are rejected at parse time.
    pub feedback_cycles: usize,
}

/// Count the graph's structure.  Cycle counting follows the same
/// convention as the machine-level ring analysis: vertex-distinct simple
/// cycles over deduplicated edges, so a graph and the configuration
/// emitted from it report the same number.
pub fn count_structure(dfg: &Dfg) -> StructureCounts {
    let n = dfg.nodes.len();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (c, node) in dfg.nodes.iter().enumerate() {
        for &p in &node.preds {
            if !succ[p].contains(&c) {
                succ[p].push(c);
            }
        }
    }
    for list in &mut succ {
        list.sort_unstable();
    }

    let mut count = 0usize;
    let mut on_path = vec![false; n];
    let mut path: Vec<usize> = Vec::new();
    // Each simple cycle is found exactly once, rooted at its smallest
    // vertex: from root `s`, walk only vertices >= s and count paths
    // that close back on `s`.
    fn dfs(
        v: usize,
        root: usize,
        succ: &[Vec<usize>],
        on_path: &mut [bool],
        path: &mut Vec<usize>,
        count: &mut usize,
    ) {
        on_path[v] = true;
        path.push(v);
        for &w in &succ[v] {
            if w == root {
                *count += 1;
            } else if w > root && !on_path[w] {
                dfs(w, root, succ, on_path, path, count);
            }
        }
        path.pop();
        on_path[v] = false;
    }
    for root in 0..n {
        dfs(root, root, &succ, &mut on_path, &mut path, &mut count);
    }

    StructureCounts {
        operations: dfg.nodes.iter().filter(|n| n.kind.is_operation()).count(),
        registers: dfg
            .nodes
            .iter()
            .filter(|n| matches!(n.kind, NodeKind::Delay { .. }))
            .count(),
        feedback_cycles: count,
    }
}
