//! Graph representation: nodes, ordered operand edges, and the emitter
//! that turns a graph back into its textual form.

use std::collections::HashSet;
use std::fmt::Write as _;

/// Dense index into [`Dfg::nodes`].
pub type NodeId = usize;

/// What a node computes.  Arithmetic is two's complement at the graph's
/// word width; `Delay` is the algorithmic register (a one-word memory
/// cell, optionally holding an initial word).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeKind {
    /// External input stream.
    Input,
    /// External output tap; exactly one predecessor.
    Output,
    /// Constant word source.
    Const(i64),
    /// Two-operand wrapped addition.
    Add,
    /// Two-operand wrapped subtraction (minuend first).
    Sub,
    /// Multiplication by a compile-time constant.  Not a hardware
    /// primitive: decomposed into `Add`/`Sub`/`Shl` before emission.
    MulConst(i64),
    /// Wrapped left shift by a fixed amount (`amount < width`).
    Shl(u32),
    /// Word register.  `init: Some(v)` prepends `v` to the stream (the
    /// initialized memory cell); `init: None` is a plain buffer.
    Delay { init: Option<i64> },
}

impl NodeKind {
    /// Operand count the node expects.
    pub fn arity(&self) -> usize {
        match self {
            NodeKind::Input | NodeKind::Const(_) => 0,
            NodeKind::Output
            | NodeKind::MulConst(_)
            | NodeKind::Shl(_)
            | NodeKind::Delay { .. } => 1,
            NodeKind::Add | NodeKind::Sub => 2,
        }
    }

    /// True for the kinds reported in the "operations" column of a
    /// structure count (registers are counted separately).
    pub fn is_operation(&self) -> bool {
        matches!(
            self,
            NodeKind::Add | NodeKind::Sub | NodeKind::MulConst(_) | NodeKind::Shl(_)
        )
    }
}

/// One graph node: a unique name, a kind, and its ordered operands.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub name: String,
    pub kind: NodeKind,
    pub preds: Vec<NodeId>,
}

/// A dataflow graph.  `nodes` is in declaration order, which the
/// emitter preserves so that compilation is deterministic end to end.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfg {
    pub name: String,
    pub width: usize,
    pub nodes: Vec<Node>,
    /// Input nodes in declaration order; position = external port index.
    pub inputs: Vec<NodeId>,
    /// Output nodes in declaration order; position = external port index.
    pub outputs: Vec<NodeId>,
}

impl Dfg {
    /// Consumer lists: for every node, the `(consumer, operand slot)`
    /// pairs that read it, in consumer declaration order.
    pub fn consumers(&self) -> Vec<Vec<(NodeId, usize)>> {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for (c, node) in self.nodes.iter().enumerate() {
            for (slot, &p) in node.preds.iter().enumerate() {
                out[p].push((c, slot));
            }
        }
        out
    }

    /// A name not yet used by any node: `base` itself when free,
    /// otherwise `base_2`, `base_3`, ...
    pub fn fresh_name(&self, base: &str) -> String {
        let taken: HashSet<&str> = self.nodes.iter().map(|n| n.name.as_str()).collect();
        if !taken.contains(base) {
            return base.to_string();
        }
        let mut k = 2usize;
        loop {
            let cand = format!("{base}_{k}");
            if !taken.contains(cand.as_str()) {
                return cand;
            }
            k += 1;
        }
    }

    /// Drop the nodes in `dead` (which must have no remaining
    /// consumers), compacting ids and remapping every edge and port
    /// list.  Declaration order of the survivors is preserved.
    pub fn retain_nodes(&mut self, dead: &HashSet<NodeId>) {
        let mut remap = vec![usize::MAX; self.nodes.len()];
        let mut kept = Vec::with_capacity(self.nodes.len() - dead.len());
        for (id, node) in self.nodes.drain(..).enumerate() {
            if !dead.contains(&id) {
                remap[id] = kept.len();
                kept.push(node);
            }
        }
        for node in &mut kept {
            for p in &mut node.preds {
                debug_assert_ne!(remap[*p], usize::MAX, "edge into removed node");
                *p = remap[*p];
            }
        }
        self.nodes = kept;
        for port in self.inputs.iter_mut().chain(self.outputs.iter_mut()) {
            *port = remap[*port];
        }
    }

    /// Regenerate the textual form.  Parsing the result yields a graph
    /// with the same structure counts and the same stream semantics.
    pub fn emit_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dfg {} width={}", self.name, self.width);
        for node in &self.nodes {
            let p = |k: usize| self.nodes[node.preds[k]].name.as_str();
            match &node.kind {
                NodeKind::Input => {
                    let _ = writeln!(s, "in {}", node.name);
                }
                NodeKind::Const(v) => {
                    let _ = writeln!(s, "const {} = {}", node.name, v);
                }
                NodeKind::Add => {
                    let _ = writeln!(s, "op {} = add {} {}", node.name, p(0), p(1));
                }
                NodeKind::Sub => {
                    let _ = writeln!(s, "op {} = sub {} {}", node.name, p(0), p(1));
                }
                NodeKind::MulConst(c) => {
                    let _ = writeln!(s, "op {} = mulc {} {}", node.name, p(0), c);
                }
                NodeKind::Shl(k) => {
                    let _ = writeln!(s, "op {} = shl {} {}", node.name, p(0), k);
                }
                NodeKind::Delay { init: Some(v) } => {
                    let _ = writeln!(s, "reg {} = {} init={}", node.name, p(0), v);
                }
                NodeKind::Delay { init: None } => {
                    let _ = writeln!(s, "reg {} = {}", node.name, p(0));
                }
                NodeKind::Output => {
                    let _ = writeln!(s, "out {} = {}", node.name, p(0));
                }
            }
        }
        s
    }
}
