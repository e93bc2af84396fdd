//! Semantic validation: resolve a parsed [`ProcessorConfig`] into a
//! `Machine` whose operations, cells, ports, and links are fully
//! cross-checked, or report why the configuration is unloadable.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::analysis::{analyze_rings, RingReport};
use super::config::{
    CellId, Destination, Endpoint, Mode, OpId, Operation, OperatorFunction, ProcessorConfig,
    Source, TokenInit, Word,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("operation {op} references unknown operator instance '{inst}'")]
    UnknownOperator { op: OpId, inst: String },
    #[error("width mismatch: {msg}")]
    WidthMismatch { msg: String },
    #[error("no operation is routed for {what}")]
    UnroutedOperation { what: String },
    #[error("operation {op} has an empty destination set")]
    EmptyDestination { op: OpId },
    #[error("operation {op} has an all-zero guard (no destination would ever be written)")]
    EmptyGuard { op: OpId },
    #[error("port binding error: {msg}")]
    PortUnbound { msg: String },
    #[error("inconsistent routing: {msg}")]
    InconsistentRouting { msg: String },
}

/// Non-fatal findings from validation, chiefly the ring-occupancy law.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConfigWarning {
    /// A closed ring holds too few empty places for its tokens to
    /// circulate (`places < 2*tokens + 1`); the gate-level machine will
    /// wedge on this ring.
    RingWithoutBubble {
        ops: Vec<OpId>,
        places: u32,
        tokens: u32,
    },
}

impl std::fmt::Display for ConfigWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigWarning::RingWithoutBubble {
                ops,
                places,
                tokens,
            } => write!(
                f,
                "ring without bubble: ops {ops:?} hold {tokens} token(s) in {places} place(s); \
                 a delay-insensitive ring needs places >= 2*tokens + 1"
            ),
        }
    }
}

/// Resolved producer of one operand slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProducerRef {
    /// External input port.
    Input(usize),
    /// Dense index of the producing operation.
    Op(usize),
}

/// Resolved destination of one result delivery.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DestRef {
    /// Deliver into slot `slot` of operation `op` (dense index).
    Slot { op: usize, slot: usize },
    /// External output port.
    Output(usize),
    /// Unresolved cross-processor delivery (resolved by networks).
    Remote { proc: String, cell: CellId },
}

/// One fully resolved operation.
#[derive(Clone, Debug)]
pub struct MachineOp {
    pub id: OpId,
    pub inst: usize,
    pub inst_name: String,
    pub func: OperatorFunction,
    pub cell: CellId,
    pub sources: Vec<ProducerRef>,
    pub dests: Vec<DestRef>,
    /// Guard bits, one per entry of `dests`.
    pub guard: Vec<bool>,
    /// Initial token (registers only).
    pub init: Option<TokenInit>,
    /// Bubble stages on each incoming edge, one per source slot.
    pub in_bubbles: Vec<u32>,
}

impl MachineOp {
    /// Destination entries actually wired (guard bit set), with their
    /// positions in the destination table.
    pub fn enabled_dests(&self) -> impl Iterator<Item = (usize, &DestRef)> {
        self.dests
            .iter()
            .enumerate()
            .zip(self.guard.iter())
            .filter(|(_, &g)| g)
            .map(|(d, _)| d)
    }

    /// Number of consumers this operation's output is replicated to.
    pub fn fanout(&self) -> usize {
        self.guard.iter().filter(|&&g| g).count()
    }
}

/// A validated, fully resolved processor description.
#[derive(Clone, Debug)]
pub struct Machine {
    pub name: String,
    pub width: usize,
    pub mode: Mode,
    pub ops: Vec<MachineOp>,
    pub n_inputs: usize,
    pub n_outputs: usize,
    /// Which operation feeds each output port, with its dest index.
    pub output_feed: Vec<(usize, usize)>,
    /// Bubble stages configured on each op→OUT link.
    pub output_bubbles: Vec<u32>,
    /// Ring analysis results, one entry per simple cycle.
    pub rings: Vec<RingReport>,
    /// Inventory instances never referenced by routing (prototype spares).
    pub unused_instances: Vec<String>,
}

/// Structure counters surfaced by the status interface.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MachineStatus {
    /// Arithmetic operations scheduled (add/sub/shl).
    pub operations: usize,
    /// Register operations scheduled.
    pub registers: usize,
    pub feedback_cycles: usize,
    pub inputs: usize,
    pub outputs: usize,
}

impl Machine {
    pub fn status(&self) -> MachineStatus {
        MachineStatus {
            operations: self.ops.iter().filter(|o| o.func.is_arithmetic()).count(),
            registers: self
                .ops
                .iter()
                .filter(|o| o.func == OperatorFunction::Reg)
                .count(),
            feedback_cycles: self.rings.len(),
            inputs: self.n_inputs,
            outputs: self.n_outputs,
        }
    }

    pub fn op_by_id(&self, id: OpId) -> Option<&MachineOp> {
        self.ops.iter().find(|o| o.id == id)
    }

    /// True when any ring is predicted to wedge.
    pub fn predicted_deadlock(&self) -> bool {
        self.rings.iter().any(|r| !r.predicted_live)
    }

    pub fn has_remote_dests(&self) -> bool {
        self.ops
            .iter()
            .any(|o| o.dests.iter().any(|d| matches!(d, DestRef::Remote { .. })))
    }
}

fn check_word(width: usize, value: Word, what: &str) -> Result<(), ConfigError> {
    let lo = -(1i64 << (width - 1));
    let hi = (1i64 << (width - 1)) - 1;
    if value < lo || value > hi {
        return Err(ConfigError::WidthMismatch {
            msg: format!("{what} value {value} does not fit {width}-bit two's complement"),
        });
    }
    Ok(())
}

/// Validate `config` and resolve it. Returns the machine plus warnings
/// (ring-law violations are warnings: the configuration loads, runs,
/// and deadlocks exactly as predicted).
pub fn validate(config: &ProcessorConfig) -> Result<(Machine, Vec<ConfigWarning>), ConfigError> {
    if !(2..=32).contains(&config.width) {
        return Err(ConfigError::WidthMismatch {
            msg: format!("word width {} is outside the supported 2..=32", config.width),
        });
    }
    let width = config.width;

    // Operator inventory.
    let mut inst_index: HashMap<&str, usize> = HashMap::new();
    for (i, decl) in config.operators.iter().enumerate() {
        if inst_index.insert(decl.name.as_str(), i).is_some() {
            return Err(ConfigError::InconsistentRouting {
                msg: format!("duplicate operator instance '{}'", decl.name),
            });
        }
        match decl.func {
            OperatorFunction::Const { value } => check_word(width, value, "constant")?,
            OperatorFunction::Shl { amount } => {
                if amount == 0 || amount as usize >= width {
                    return Err(ConfigError::WidthMismatch {
                        msg: format!(
                            "shift amount {amount} of '{}' must be in 1..{width}",
                            decl.name
                        ),
                    });
                }
            }
            _ => {}
        }
    }

    // Routing rows: dense index, uniqueness, instance and arity checks.
    let mut op_index: BTreeMap<OpId, usize> = BTreeMap::new();
    for (i, op) in config.routing.iter().enumerate() {
        if op_index.insert(op.id, i).is_some() {
            return Err(ConfigError::InconsistentRouting {
                msg: format!("duplicate operation id {}", op.id),
            });
        }
    }
    let mut ops: Vec<MachineOp> = Vec::with_capacity(config.routing.len());
    for op in &config.routing {
        let inst = *inst_index
            .get(op.inst.as_str())
            .ok_or(ConfigError::UnknownOperator {
                op: op.id,
                inst: op.inst.clone(),
            })?;
        let func = config.operators[inst].func.clone();
        if op.sources.len() != func.arity() {
            return Err(ConfigError::InconsistentRouting {
                msg: format!(
                    "operation {} has {} source(s) but kind '{}' takes {}",
                    op.id,
                    op.sources.len(),
                    func.kind_token(),
                    func.arity()
                ),
            });
        }
        if op.dests.is_empty() {
            return Err(ConfigError::EmptyDestination { op: op.id });
        }
        ops.push(MachineOp {
            id: op.id,
            inst,
            inst_name: op.inst.clone(),
            func,
            cell: op.id, // provisional; memory section may rebind below
            sources: Vec::new(),
            dests: Vec::new(),
            guard: Vec::new(),
            init: None,
            in_bubbles: Vec::new(),
        });
    }
    let dense = |id: OpId| op_index.get(&id).copied();

    // Memory image: cell-to-op binding and initial tokens.
    let mut cell_owner: HashMap<CellId, usize> = HashMap::new();
    let mut explicit_cells: HashMap<usize, CellId> = HashMap::new();
    for decl in &config.memory {
        let Some(op_id) = decl.op else {
            continue; // unbound empty cell: inert
        };
        let op = dense(op_id).ok_or(ConfigError::UnroutedOperation {
            what: format!("memory cell {} (op {op_id})", decl.cell),
        })?;
        if cell_owner.insert(decl.cell, op).is_some() {
            return Err(ConfigError::InconsistentRouting {
                msg: format!("cell {} declared twice", decl.cell),
            });
        }
        if explicit_cells.insert(op, decl.cell).is_some() {
            return Err(ConfigError::InconsistentRouting {
                msg: format!("operation {op_id} owns more than one cell"),
            });
        }
        if let Some(token) = &decl.token {
            let arity = ops[op].func.arity();
            if token.valid.len() != arity || token.operands.len() != arity {
                return Err(ConfigError::InconsistentRouting {
                    msg: format!(
                        "initial token of cell {} must carry {arity} valid bit(s) and operand(s)",
                        decl.cell
                    ),
                });
            }
            if ops[op].func != OperatorFunction::Reg {
                return Err(ConfigError::InconsistentRouting {
                    msg: format!(
                        "cell {} holds an initial token but operation {op_id} is not a register; \
                         only registers elaborate to initialized gate-level stages",
                        decl.cell
                    ),
                });
            }
            for &w in &token.operands {
                check_word(width, w, "initial operand")?;
            }
            ops[op].init = Some(token.clone());
        }
    }
    for (op, cell) in &explicit_cells {
        ops[*op].cell = *cell;
    }
    // Implicit cells (cell id = op id) for undeclared operations.
    for (i, op) in ops.iter().enumerate() {
        if explicit_cells.contains_key(&i) {
            continue;
        }
        if let Some(owner) = cell_owner.get(&op.id) {
            if *owner != i {
                return Err(ConfigError::InconsistentRouting {
                    msg: format!(
                        "operation {} has no declared cell and its implicit cell {} is taken",
                        op.id, op.id
                    ),
                });
            }
        }
        cell_owner.insert(op.id, i);
    }

    // Resolve sources and collect input ports.
    let mut max_in: Option<usize> = None;
    let mut ops_on_inst: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, op) in config.routing.iter().enumerate() {
        ops_on_inst.entry(ops[i].inst).or_default().push(i);
        let _ = op;
    }
    for (i, row) in config.routing.iter().enumerate() {
        let mut resolved = Vec::with_capacity(row.sources.len());
        for src in &row.sources {
            let r = match src {
                Source::External(k) => {
                    max_in = Some(max_in.map_or(*k, |m: usize| m.max(*k)));
                    ProducerRef::Input(*k)
                }
                Source::Cell(c) => {
                    let p = *cell_owner.get(c).ok_or(ConfigError::UnroutedOperation {
                        what: format!("source cell {c} of operation {}", row.id),
                    })?;
                    ProducerRef::Op(p)
                }
                Source::InstOut(inst) => {
                    let idx = *inst_index.get(inst.as_str()).ok_or_else(|| {
                        ConfigError::UnknownOperator {
                            op: row.id,
                            inst: inst.clone(),
                        }
                    })?;
                    let cands = ops_on_inst.get(&idx).map(Vec::as_slice).unwrap_or(&[]);
                    match cands {
                        [single] => ProducerRef::Op(*single),
                        [] => {
                            return Err(ConfigError::UnroutedOperation {
                                what: format!("instance '{inst}' (no operation scheduled on it)"),
                            })
                        }
                        _ => {
                            return Err(ConfigError::InconsistentRouting {
                                msg: format!(
                                    "source '{inst}.out' is ambiguous: the instance is shared"
                                ),
                            })
                        }
                    }
                }
            };
            resolved.push(r);
        }
        ops[i].sources = resolved;
    }
    let n_inputs = max_in.map_or(0, |m| m + 1);
    {
        let mut seen = vec![false; n_inputs];
        for op in &ops {
            for s in &op.sources {
                if let ProducerRef::Input(k) = s {
                    seen[*k] = true;
                }
            }
        }
        if let Some(gap) = seen.iter().position(|s| !s) {
            return Err(ConfigError::PortUnbound {
                msg: format!("input ports are not contiguous: IN[{gap}] is never read"),
            });
        }
    }

    // Resolve destinations; cross-check against the consumers' sources.
    // `pending[(consumer, producer)]` counts slots of `consumer` that
    // name `producer`, to be matched by equally many dst entries.
    let mut pending: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (b, op) in ops.iter().enumerate() {
        for (slot, src) in op.sources.iter().enumerate() {
            if let ProducerRef::Op(p) = src {
                pending.entry((b, *p)).or_default().push(slot);
            }
        }
    }
    let mut max_out: Option<usize> = None;
    let mut output_feed: HashMap<usize, (usize, usize)> = HashMap::new();
    for (p, row) in config.routing.iter().enumerate() {
        let mut dests = Vec::with_capacity(row.dests.len());
        for (di, d) in row.dests.iter().enumerate() {
            let r = match d {
                Destination::Cell(c) => {
                    let b = *cell_owner.get(c).ok_or(ConfigError::UnroutedOperation {
                        what: format!("destination cell {c} of operation {}", row.id),
                    })?;
                    let slots = pending.get_mut(&(b, p)).and_then(|v| {
                        if v.is_empty() {
                            None
                        } else {
                            Some(v.remove(0))
                        }
                    });
                    let slot = slots.ok_or_else(|| ConfigError::InconsistentRouting {
                        msg: format!(
                            "operation {} lists cell {c} as a destination, but operation {} \
                             does not source it that many times",
                            row.id, ops[b].id
                        ),
                    })?;
                    DestRef::Slot { op: b, slot }
                }
                Destination::External(k) => {
                    max_out = Some(max_out.map_or(*k, |m: usize| m.max(*k)));
                    if output_feed.insert(*k, (p, di)).is_some() {
                        return Err(ConfigError::PortUnbound {
                            msg: format!("output port OUT[{k}] has more than one producer"),
                        });
                    }
                    DestRef::Output(*k)
                }
                Destination::Remote { proc, cell } => DestRef::Remote {
                    proc: proc.clone(),
                    cell: *cell,
                },
            };
            dests.push(r);
        }
        ops[p].dests = dests;
    }
    if let Some(((b, p), slots)) = pending.iter().find(|(_, v)| !v.is_empty()) {
        return Err(ConfigError::InconsistentRouting {
            msg: format!(
                "operation {} sources operation {} (slot {}), which never lists it as a destination",
                ops[*b].id, ops[*p].id, slots[0]
            ),
        });
    }
    let n_outputs = max_out.map_or(0, |m| m + 1);
    let mut output_feed_v = Vec::with_capacity(n_outputs);
    for k in 0..n_outputs {
        match output_feed.get(&k) {
            Some(&f) => output_feed_v.push(f),
            None => {
                return Err(ConfigError::PortUnbound {
                    msg: format!("output ports are not contiguous: OUT[{k}] has no producer"),
                })
            }
        }
    }

    // Guards: one bit per destination, default all-ones, at least one set.
    for (i, op) in ops.iter_mut().enumerate() {
        let declared = config.routing[i].id;
        let guard = match &op.init {
            Some(t) if !t.guard.is_empty() => t.guard.clone(),
            _ => vec![true; op.dests.len()],
        };
        if guard.len() != op.dests.len() {
            return Err(ConfigError::InconsistentRouting {
                msg: format!(
                    "operation {declared}: guard has {} bit(s) for {} destination(s)",
                    guard.len(),
                    op.dests.len()
                ),
            });
        }
        if !guard.iter().any(|&g| g) {
            return Err(ConfigError::EmptyGuard { op: declared });
        }
        op.guard = guard;
    }

    // Link bubbles: accepted per (from, to) endpoint pair, applied to
    // every edge between the pair.
    let mut link_map: HashMap<(Endpoint, Endpoint), u32> = HashMap::new();
    for l in &config.links {
        if link_map.insert((l.from, l.to), l.bubbles).is_some() {
            return Err(ConfigError::InconsistentRouting {
                msg: format!("duplicate link line {:?} -> {:?}", l.from, l.to),
            });
        }
    }
    let op_id_of = |i: usize, ops: &[MachineOp]| ops[i].id;
    let mut used_links: HashMap<(Endpoint, Endpoint), bool> = HashMap::new();
    for b in 0..ops.len() {
        let mut in_bubbles = Vec::with_capacity(ops[b].sources.len());
        for src in &ops[b].sources {
            let from = match src {
                ProducerRef::Input(k) => Endpoint::In(*k),
                ProducerRef::Op(p) => Endpoint::Op(op_id_of(*p, &ops)),
            };
            let key = (from, Endpoint::Op(ops[b].id));
            let bubbles = link_map.get(&key).copied().unwrap_or(0);
            if link_map.contains_key(&key) {
                used_links.insert(key, true);
            }
            in_bubbles.push(bubbles);
        }
        ops[b].in_bubbles = in_bubbles;
    }
    let mut output_bubbles = Vec::with_capacity(n_outputs);
    for (k, feed) in output_feed_v.iter().enumerate() {
        let key = (Endpoint::Op(ops[feed.0].id), Endpoint::Out(k));
        output_bubbles.push(link_map.get(&key).copied().unwrap_or(0));
        if link_map.contains_key(&key) {
            used_links.insert(key, true);
        }
    }
    for key in link_map.keys() {
        if !used_links.contains_key(key) {
            return Err(ConfigError::InconsistentRouting {
                msg: format!(
                    "link {:?} -> {:?} does not correspond to any routed edge",
                    key.0, key.1
                ),
            });
        }
    }

    // Prototype spares; targets must be exactly pruned.
    let referenced: Vec<bool> = {
        let mut v = vec![false; config.operators.len()];
        for op in &ops {
            v[op.inst] = true;
        }
        v
    };
    let unused_instances: Vec<String> = config
        .operators
        .iter()
        .zip(&referenced)
        .filter(|(_, used)| !**used)
        .map(|(d, _)| d.name.clone())
        .collect();
    if config.mode == Mode::Target && !unused_instances.is_empty() {
        return Err(ConfigError::InconsistentRouting {
            msg: format!(
                "target configuration carries unused operators {unused_instances:?}; \
                 targets are fully pruned by derivation"
            ),
        });
    }

    let rings = analyze_rings(&ops, width);
    let warnings: Vec<ConfigWarning> = rings
        .iter()
        .filter(|r| !r.predicted_live)
        .map(|r| ConfigWarning::RingWithoutBubble {
            ops: r.ops.clone(),
            places: r.places,
            tokens: r.tokens,
        })
        .collect();

    Ok((
        Machine {
            name: config.name.clone(),
            width,
            mode: config.mode,
            ops,
            n_inputs,
            n_outputs,
            output_feed: output_feed_v,
            output_bubbles,
            rings,
            unused_instances,
        },
        warnings,
    ))
}

/// Spec'd single-row validation probe: find the operator instance an
/// executable token is routed to.
pub fn route_token(op_id: OpId, routing: &[Operation]) -> Result<String, ConfigError> {
    routing
        .iter()
        .find(|r| r.id == op_id)
        .map(|r| r.inst.clone())
        .ok_or(ConfigError::UnroutedOperation {
            what: format!("op id {op_id}"),
        })
}
