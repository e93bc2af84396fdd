//! Processor networks: chain machines through their external ports so
//! that upstream results are written straight into downstream memory
//! cells, and the whole composition runs under one event loop.
//!
//! Connection is by *merging*: the machines' operation lists are
//! concatenated (ids and instance indices offset), and each bound
//! upstream output edge is spliced onto the slots that the downstream
//! input port used to feed. `remote:<proc>.<cell>` destinations
//! resolve the same way: the target cell's operation must expose
//! exactly one input port, and the remote edge takes that port's
//! place (with one bubble of link slack, the physical buffering of a
//! crossing channel). The merged [`Machine`] then goes through the
//! ordinary ring analysis and simulates at either level, so
//! cross-processor rings obey the same occupancy law as local ones.

use std::collections::{HashMap, HashSet};

use crate::kernel::{DelayModel, Ps};

use super::analysis::analyze_rings;
use super::config::Word;
use super::validate::{ConfigError, DestRef, Machine, MachineOp, ProducerRef};
use super::{Level, Mode, RunReport};

/// Empty stages granted to a resolved `remote:` destination edge.
pub const REMOTE_LINK_BUBBLES: u32 = 1;

/// One upstream-output → downstream-input binding. `bubbles` empty
/// stages are inserted on the crossing channel (a cross-processor ring
/// needs at least one, exactly like a local ring).
#[derive(Clone, Copy, Debug)]
pub struct PortBinding {
    pub out_port: usize,
    pub in_port: usize,
    pub bubbles: u32,
}

/// Port map for [`connect_processors`].
pub type PortMap = Vec<PortBinding>;

/// A merged processor network.
#[derive(Clone, Debug)]
pub struct Network {
    pub machine: Machine,
}

/// Connect `upstream`'s bound output ports to `downstream`'s bound
/// input ports. Passing the same name twice forms a self-connection
/// (a ring closed through the port fabric instead of local routing).
pub fn connect_processors(
    upstream: (&str, &Machine),
    downstream: (&str, &Machine),
    map: &PortMap,
) -> Result<Network, ConfigError> {
    let self_loop = upstream.0 == downstream.0;
    let procs: Vec<(&str, &Machine)> = if self_loop {
        vec![upstream]
    } else {
        vec![upstream, downstream]
    };
    let down_pi = usize::from(!self_loop);
    let bindings: Vec<Binding> = map
        .iter()
        .map(|b| Binding {
            up: 0,
            out_port: b.out_port,
            down: down_pi,
            in_port: b.in_port,
            bubbles: b.bubbles,
        })
        .collect();
    Ok(Network {
        machine: merge(&procs, &bindings)?,
    })
}

/// Simulate a network exactly like a single processor.
pub fn simulate_network(
    network: &Network,
    inputs: &[Vec<Word>],
    level: Level,
    model: &DelayModel,
    t_max: Ps,
) -> Result<RunReport, ConfigError> {
    super::simulate_processor(&network.machine, inputs, level, model, t_max)
}

struct Binding {
    up: usize,
    out_port: usize,
    down: usize,
    in_port: usize,
    bubbles: u32,
}

fn merge(procs: &[(&str, &Machine)], bindings: &[Binding]) -> Result<Machine, ConfigError> {
    let width = procs[0].1.width;
    for (name, m) in procs {
        if m.width != width {
            return Err(ConfigError::WidthMismatch {
                msg: format!(
                    "processor '{name}' has width {}, the network runs at width {width}",
                    m.width
                ),
            });
        }
    }

    // Offsets for dense op indices, op ids, and instance indices.
    let mut op_off = Vec::with_capacity(procs.len());
    let mut id_off = Vec::with_capacity(procs.len());
    let mut inst_off = Vec::with_capacity(procs.len());
    let (mut ops_acc, mut ids_acc, mut inst_acc) = (0usize, 0u32, 0usize);
    for (_, m) in procs {
        op_off.push(ops_acc);
        id_off.push(ids_acc);
        inst_off.push(inst_acc);
        ops_acc += m.ops.len();
        ids_acc += m.ops.iter().map(|o| o.id + 1).max().unwrap_or(0);
        inst_acc += m.ops.iter().map(|o| o.inst + 1).max().unwrap_or(0);
    }
    let proc_index: HashMap<&str, usize> =
        procs.iter().enumerate().map(|(i, (n, _))| (*n, i)).collect();

    // Validate explicit bindings.
    let mut bound_inputs: HashSet<(usize, usize)> = HashSet::new();
    let mut bound_outputs: HashSet<(usize, usize)> = HashSet::new();
    let mut port_target: HashMap<(usize, usize), (usize, usize, u32)> = HashMap::new();
    for b in bindings {
        let up_m = procs
            .get(b.up)
            .ok_or(ConfigError::PortUnbound {
                msg: format!("binding references processor #{}", b.up),
            })?
            .1;
        let down_m = procs[b.down].1;
        if b.out_port >= up_m.n_outputs {
            return Err(ConfigError::PortUnbound {
                msg: format!("'{}' has no OUT[{}]", procs[b.up].0, b.out_port),
            });
        }
        if b.in_port >= down_m.n_inputs {
            return Err(ConfigError::PortUnbound {
                msg: format!("'{}' has no IN[{}]", procs[b.down].0, b.in_port),
            });
        }
        if !bound_outputs.insert((b.up, b.out_port)) {
            return Err(ConfigError::PortUnbound {
                msg: format!("OUT[{}] of '{}' bound twice", b.out_port, procs[b.up].0),
            });
        }
        if !bound_inputs.insert((b.down, b.in_port)) {
            return Err(ConfigError::PortUnbound {
                msg: format!("IN[{}] of '{}' bound twice", b.in_port, procs[b.down].0),
            });
        }
        port_target.insert((b.up, b.out_port), (b.down, b.in_port, b.bubbles));
    }

    // Resolve remote destinations to (proc, input port) pairs up front,
    // because they consume downstream input ports just like bindings.
    let resolve_remote = |proc: &str, cell: u32| -> Result<(usize, usize), ConfigError> {
        let pi = *proc_index.get(proc).ok_or(ConfigError::PortUnbound {
            msg: format!("remote destination names unknown processor '{proc}'"),
        })?;
        let target = procs[pi]
            .1
            .ops
            .iter()
            .find(|o| o.cell == cell)
            .ok_or(ConfigError::PortUnbound {
                msg: format!("remote destination {proc}.{cell}: no such cell"),
            })?;
        let mut ports: Vec<usize> = target
            .sources
            .iter()
            .filter_map(|s| match s {
                ProducerRef::Input(j) => Some(*j),
                ProducerRef::Op(_) => None,
            })
            .collect();
        ports.dedup();
        match ports.as_slice() {
            [j] => Ok((pi, *j)),
            [] => Err(ConfigError::PortUnbound {
                msg: format!("remote destination {proc}.{cell}: cell has no input port to bind"),
            }),
            _ => Err(ConfigError::PortUnbound {
                msg: format!("remote destination {proc}.{cell}: cell reads several input ports"),
            }),
        }
    };
    for (pi, (_, m)) in procs.iter().enumerate() {
        for op in &m.ops {
            for d in &op.dests {
                if let DestRef::Remote { proc, cell } = d {
                    let (tp, tj) = resolve_remote(proc, *cell)?;
                    if !bound_inputs.insert((tp, tj)) {
                        return Err(ConfigError::PortUnbound {
                            msg: format!(
                                "IN[{tj}] of '{}' bound twice (remote destination from '{}')",
                                procs[tp].0, procs[pi].0
                            ),
                        });
                    }
                }
            }
        }
    }

    // Renumber surviving external ports.
    let mut in_map: Vec<Vec<Option<usize>>> = Vec::new();
    let mut out_map: Vec<Vec<Option<usize>>> = Vec::new();
    let (mut next_in, mut next_out) = (0usize, 0usize);
    for (pi, (_, m)) in procs.iter().enumerate() {
        in_map.push(
            (0..m.n_inputs)
                .map(|j| {
                    (!bound_inputs.contains(&(pi, j))).then(|| {
                        let v = next_in;
                        next_in += 1;
                        v
                    })
                })
                .collect(),
        );
        out_map.push(
            (0..m.n_outputs)
                .map(|k| {
                    (!bound_outputs.contains(&(pi, k))).then(|| {
                        let v = next_out;
                        next_out += 1;
                        v
                    })
                })
                .collect(),
        );
    }

    // Slots fed by a given (proc, IN port), from the original machines.
    let slots_of_port = |pi: usize, j: usize| -> Vec<(usize, usize)> {
        procs[pi]
            .1
            .ops
            .iter()
            .enumerate()
            .flat_map(|(c, op)| {
                op.sources
                    .iter()
                    .enumerate()
                    .filter(move |(_, s)| **s == ProducerRef::Input(j))
                    .map(move |(s, _)| (c, s))
            })
            .collect()
    };

    // Clone and remap every operation.
    let mut ops: Vec<MachineOp> = Vec::with_capacity(ops_acc);
    for (pi, (name, m)) in procs.iter().enumerate() {
        for op in &m.ops {
            let mut new_op = op.clone();
            new_op.id += id_off[pi];
            new_op.inst += inst_off[pi];
            new_op.inst_name = format!("{name}.{}", op.inst_name);
            for src in &mut new_op.sources {
                if let ProducerRef::Op(p) = src {
                    *p += op_off[pi];
                }
                // Input sources are renumbered or rewired below.
            }
            ops.push(new_op);
        }
    }

    // Expand destinations in one pass per op, so several bindings on
    // one producer cannot invalidate each other's entry indices.
    // Consumer rewires are collected and applied afterwards.
    let mut rewires: Vec<(usize, usize, usize, u32)> = Vec::new(); // (consumer, slot, producer, bubbles)
    for (pi, (_, m)) in procs.iter().enumerate() {
        for local in 0..m.ops.len() {
            let g = local + op_off[pi];
            let mut dests = Vec::with_capacity(ops[g].dests.len());
            let mut guard = Vec::with_capacity(ops[g].guard.len());
            for (d, bit) in ops[g].dests.clone().iter().zip(ops[g].guard.clone()) {
                let splice: Option<(usize, usize, u32)> = match d {
                    DestRef::Output(k) => match port_target.get(&(pi, *k)) {
                        Some(&(down, in_j, bubbles)) => Some((down, in_j, bubbles)),
                        None => {
                            let mapped = out_map[pi][*k].expect("unbound output survives");
                            dests.push(DestRef::Output(mapped));
                            guard.push(bit);
                            None
                        }
                    },
                    DestRef::Remote { proc, cell } => {
                        let (tp, tj) = resolve_remote(proc, *cell)?;
                        Some((tp, tj, REMOTE_LINK_BUBBLES))
                    }
                    DestRef::Slot { op, slot } => {
                        dests.push(DestRef::Slot {
                            op: *op + op_off[pi],
                            slot: *slot,
                        });
                        guard.push(bit);
                        None
                    }
                };
                if let Some((down, in_j, bubbles)) = splice {
                    let slots = slots_of_port(down, in_j);
                    if slots.is_empty() {
                        return Err(ConfigError::PortUnbound {
                            msg: format!(
                                "IN[{in_j}] of '{}' feeds no operation",
                                procs[down].0
                            ),
                        });
                    }
                    for &(c, s) in &slots {
                        dests.push(DestRef::Slot {
                            op: c + op_off[down],
                            slot: s,
                        });
                        guard.push(bit);
                        rewires.push((c + op_off[down], s, g, bubbles));
                    }
                }
            }
            ops[g].dests = dests;
            ops[g].guard = guard;
        }
    }
    for (c, s, p, bubbles) in rewires {
        ops[c].sources[s] = ProducerRef::Op(p);
        ops[c].in_bubbles[s] = bubbles;
    }

    // Renumber the remaining external input references.
    for (pi, (_, m)) in procs.iter().enumerate() {
        for local in 0..m.ops.len() {
            for src in &mut ops[local + op_off[pi]].sources {
                if let ProducerRef::Input(j) = *src {
                    let mapped = in_map[pi][j].ok_or(ConfigError::PortUnbound {
                        msg: format!("bound input port IN[{j}] still referenced"),
                    })?;
                    *src = ProducerRef::Input(mapped);
                }
            }
        }
    }

    // Rebuild the output feed table.
    let mut output_feed = vec![(0usize, 0usize); next_out];
    let mut output_bubbles = vec![0u32; next_out];
    for (pi, (_, m)) in procs.iter().enumerate() {
        for k in 0..m.n_outputs {
            if let Some(new_k) = out_map[pi][k] {
                let (p_local, _) = m.output_feed[k];
                let p = p_local + op_off[pi];
                let dest_idx = ops[p]
                    .dests
                    .iter()
                    .position(|d| *d == DestRef::Output(new_k))
                    .expect("renumbered output dest exists");
                output_feed[new_k] = (p, dest_idx);
                output_bubbles[new_k] = m.output_bubbles[k];
            }
        }
    }

    let rings = analyze_rings(&ops, width);
    let name = procs
        .iter()
        .map(|(n, _)| *n)
        .collect::<Vec<_>>()
        .join("+");
    Ok(Machine {
        name,
        width,
        mode: Mode::Prototype,
        ops,
        n_inputs: next_in,
        n_outputs: next_out,
        output_feed,
        output_bubbles,
        rings,
        unused_instances: Vec::new(),
    })
}
