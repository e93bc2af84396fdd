//! Scheduling and configuration emission.
//!
//! Every arithmetic node, register, and constant is assigned to an
//! operator instance from an inventory (greedy, in declaration order —
//! deterministic by construction), then the graph's edges become the
//! routing table, memory image, and link/bubble annotations of a
//! [`ProcessorConfig`].  With sharing enabled, several operations of one
//! kind may time-multiplex a single instance; registers are stateful and
//! are never shared.
//!
//! Any remaining constant multiplications are lowered first, so feeding
//! this stage a freshly parsed graph is legal; the emitted configuration
//! then reflects the decomposed structure.
//!
//! [`ProcessorConfig`]: crate::processor::ProcessorConfig

use std::collections::HashMap;

use super::ast::{Dfg, Node, NodeId, NodeKind};
use super::rewrite::decompose_mul_const;
use super::DfgError;
use crate::processor::{
    Destination, Endpoint, LinkDecl, MemoryDecl, Mode, Operation, OperatorDecl, OperatorFunction,
    ProcessorConfig, Source, TokenInit,
};

/// How many operator instances of each kind the target machine offers.
/// `sharing` allows several scheduled operations to time-multiplex one
/// instance; without it the inventory must seat every node one-to-one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Inventory {
    pub adders: usize,
    pub subtractors: usize,
    pub shifters: usize,
    pub registers: usize,
    pub constants: usize,
    pub sharing: bool,
}

impl Inventory {
    /// No hardware limit: every node gets its own instance.
    pub fn unlimited() -> Self {
        Inventory {
            adders: usize::MAX,
            subtractors: usize::MAX,
            shifters: usize::MAX,
            registers: usize::MAX,
            constants: usize::MAX,
            sharing: true,
        }
    }
}

/// Schedule `dfg` onto `inventory` and emit the processor
/// configuration, annotating every operator-to-operator link with
/// `bubbles_per_link` empty word registers.
///
/// One bubble per link is the canonical live configuration; zero-bubble
/// emission is permitted (for boundary experiments) and surfaces as a
/// ring-without-bubble warning when the result is validated.
pub fn schedule_and_emit(
    dfg: &Dfg,
    inventory: &Inventory,
    bubbles_per_link: u32,
) -> Result<ProcessorConfig, DfgError> {
    let mut g = decompose_mul_const(dfg)?;
    buffer_bare_outputs(&mut g);
    let consumers = g.consumers();

    // Dense op numbering over the schedulable nodes.
    let mut op_of: HashMap<NodeId, u32> = HashMap::new();
    for (id, node) in g.nodes.iter().enumerate() {
        if !matches!(node.kind, NodeKind::Input | NodeKind::Output) {
            op_of.insert(id, op_of.len() as u32);
        }
    }
    let in_port = |id: NodeId| g.inputs.iter().position(|&n| n == id).unwrap();
    let out_port = |id: NodeId| g.outputs.iter().position(|&n| n == id).unwrap();

    let instances = assign_instances(&g, inventory)?;

    let mut operators: Vec<OperatorDecl> = Vec::new();
    let mut routing: Vec<Operation> = Vec::new();
    let mut memory: Vec<MemoryDecl> = Vec::new();
    let mut links: Vec<LinkDecl> = Vec::new();

    for (id, node) in g.nodes.iter().enumerate() {
        let Some(&op_id) = op_of.get(&id) else {
            continue;
        };
        let inst = &instances[&id];
        if !operators.iter().any(|o| o.name == inst.name) {
            operators.push(OperatorDecl {
                name: inst.name.clone(),
                func: inst.func.clone(),
            });
        }

        let sources = node
            .preds
            .iter()
            .map(|&p| match g.nodes[p].kind {
                NodeKind::Input => Source::External(in_port(p)),
                _ => Source::Cell(op_of[&p]),
            })
            .collect();
        let dests: Vec<Destination> = consumers[id]
            .iter()
            .map(|&(c, _)| match g.nodes[c].kind {
                NodeKind::Output => Destination::External(out_port(c)),
                _ => Destination::Cell(op_of[&c]),
            })
            .collect();

        if let NodeKind::Delay { init: Some(v) } = node.kind {
            memory.push(MemoryDecl {
                cell: op_id,
                op: Some(op_id),
                token: Some(TokenInit {
                    valid: vec![true],
                    guard: vec![true; dests.len()],
                    operands: vec![v],
                }),
            });
        }
        for &(c, _) in &consumers[id] {
            if let Some(&c_op) = op_of.get(&c) {
                let link = LinkDecl {
                    from: Endpoint::Op(op_id),
                    to: Endpoint::Op(c_op),
                    bubbles: bubbles_per_link,
                };
                if !links.contains(&link) {
                    links.push(link);
                }
            }
        }

        routing.push(Operation {
            id: op_id,
            inst: inst.name.clone(),
            sources,
            dests,
        });
    }

    Ok(ProcessorConfig {
        name: g.name.clone(),
        width: g.width,
        mode: Mode::Prototype,
        operators,
        routing,
        memory,
        links,
    })
}

/// An output port must be driven by an operator, not wired straight to
/// an input port: give such outputs a plain buffer register.
fn buffer_bare_outputs(g: &mut Dfg) {
    for k in 0..g.outputs.len() {
        let out_id = g.outputs[k];
        let src = g.nodes[out_id].preds[0];
        if matches!(g.nodes[src].kind, NodeKind::Input) {
            let name = g.fresh_name(&format!("{}_buf", g.nodes[out_id].name));
            g.nodes.push(Node {
                name,
                kind: NodeKind::Delay { init: None },
                preds: vec![src],
            });
            let buf = g.nodes.len() - 1;
            g.nodes[out_id].preds[0] = buf;
        }
    }
}

struct Instance {
    name: String,
    func: OperatorFunction,
}

/// Greedy instance assignment.  Nodes group by exact hardware shape
/// (adder; subtractor; shifter per amount; constant per value;
/// register).  Registers hold state and always get their own instance;
/// other groups share round-robin when the inventory runs short and
/// sharing is enabled.
fn assign_instances(
    g: &Dfg,
    inventory: &Inventory,
) -> Result<HashMap<NodeId, Instance>, DfgError> {
    // Group nodes by hardware shape, in first-appearance order.
    let mut groups: Vec<(OperatorFunction, Vec<NodeId>)> = Vec::new();
    for (id, node) in g.nodes.iter().enumerate() {
        let func = match node.kind {
            NodeKind::Add => OperatorFunction::Add,
            NodeKind::Sub => OperatorFunction::Sub,
            NodeKind::Shl(k) => OperatorFunction::Shl { amount: k },
            NodeKind::Const(v) => OperatorFunction::Const { value: v },
            NodeKind::Delay { .. } => OperatorFunction::Reg,
            NodeKind::Input | NodeKind::Output | NodeKind::MulConst(_) => continue,
        };
        match groups.iter_mut().find(|(f, _)| *f == func) {
            Some((_, members)) => members.push(id),
            None => groups.push((func, vec![id])),
        }
    }

    // Family budgets: shifter and constant budgets span all amounts and
    // values respectively.
    let budget = |func: &OperatorFunction| match func {
        OperatorFunction::Add => inventory.adders,
        OperatorFunction::Sub => inventory.subtractors,
        OperatorFunction::Shl { .. } => inventory.shifters,
        OperatorFunction::Const { .. } => inventory.constants,
        OperatorFunction::Reg => inventory.registers,
    };
    let mut family_need: HashMap<&'static str, (usize, usize)> = HashMap::new();
    for (func, members) in &groups {
        let need = if inventory.sharing && !matches!(func, OperatorFunction::Reg) {
            1 // sharing can collapse a group onto one instance
        } else {
            members.len()
        };
        let entry = family_need.entry(func.kind_token()).or_insert((0, budget(func)));
        entry.0 += need;
    }
    for (kind, (needed, available)) in &family_need {
        if needed > available {
            return Err(DfgError::InsufficientOperators {
                kind: (*kind).to_string(),
                needed: *needed,
                available: *available,
            });
        }
    }

    // Per-family leftover budget above the per-group minimum, handed out
    // in group order so assignment stays deterministic.
    let mut family_left: HashMap<&'static str, usize> = family_need
        .iter()
        .map(|(&k, &(needed, available))| (k, available.saturating_sub(needed)))
        .collect();

    let mut out = HashMap::new();
    for (func, members) in &groups {
        let min = if inventory.sharing && !matches!(func, OperatorFunction::Reg) {
            1
        } else {
            members.len()
        };
        let left = family_left.get_mut(func.kind_token()).unwrap();
        let extra = (*left).min(members.len() - min);
        *left -= extra;
        let n_inst = min + extra;
        for (i, &id) in members.iter().enumerate() {
            // Instance j is named after the first node it serves.
            let j = i % n_inst;
            out.insert(
                id,
                Instance {
                    name: g.nodes[members[j]].name.clone(),
                    func: func.clone(),
                },
            );
        }
    }
    Ok(out)
}
