//! The discrete-event engine.
//!
//! # Initialization
//!
//! Power-up mirrors how a delay-insensitive circuit comes out of reset:
//!
//! 1. Every net starts at 0, every gate's logical state starts at its
//!    `preset` flag (0 unless the gate carries a power-up token).
//! 2. A bounded Jacobi relaxation runs with preset gates *held* (the
//!    "reset epoch"): all non-preset gates are re-evaluated against the
//!    previous sweep simultaneously until a fixpoint. This lets
//!    acknowledge inverters rise, power-up tokens propagate into empty
//!    downstream latches, and so on, exactly as a real circuit settles
//!    while reset is asserted. The relaxation is deliberately Jacobi
//!    (not Gauss-Seidel): a genuinely unstable structure, e.g. a
//!    cross-coupled NOR pair, must not be "settled" by sequential-sweep
//!    luck — it stays inconsistent and oscillates after release.
//! 3. At t = 0 the hold is released: any gate whose evaluated function
//!    disagrees with its state (including previously held ones) updates
//!    its state and schedules the new value after its gate delay.
//!
//! # Event ordering
//!
//! The heap orders events by `(time, net, insertion sequence)`; an event
//! that would set a net to its current value is discarded. A per-timestamp
//! event budget turns zero-delay livelock into a reported condition
//! instead of a hang.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use thiserror::Error;

use super::netlist::{NetId, Netlist};
use super::{DelayModel, DelayTableError, Ps};

/// One recorded net transition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub time: Ps,
    pub net: NetId,
    pub value: bool,
}

/// Result of a simulation run.
#[derive(Clone, Debug)]
pub struct Trace {
    /// Recorded transitions in processing order (time-ordered).
    pub events: Vec<TraceEvent>,
    /// Net values after reset settling, before the first event (t = 0⁻).
    pub initial_values: Vec<bool>,
    /// Net values when the run ended.
    pub final_values: Vec<bool>,
    /// Time of the last processed event if the circuit went quiescent
    /// before `t_max`; `None` if activity persisted at the horizon or the
    /// run was stopped by the per-timestamp budget.
    pub quiescent_at: Option<Ps>,
    /// Simulation horizon the run was asked for.
    pub t_max: Ps,
    /// True when the per-timestamp event budget tripped (zero-delay
    /// oscillation).
    pub livelock: bool,
    /// Total applied (non-redundant) events.
    pub processed_events: u64,
}

impl Trace {
    pub fn is_quiescent(&self) -> bool {
        self.quiescent_at.is_some()
    }

    pub fn events_on<'a>(&'a self, net: NetId) -> impl Iterator<Item = &'a TraceEvent> + 'a {
        self.events.iter().filter(move |e| e.net == net)
    }

    /// Number of rising transitions recorded on `net`.
    pub fn rises_on(&self, net: NetId) -> usize {
        self.events_on(net).filter(|e| e.value).count()
    }

    pub fn initial_value(&self, net: NetId) -> bool {
        self.initial_values[net.0 as usize]
    }

    pub fn final_value(&self, net: NetId) -> bool {
        self.final_values[net.0 as usize]
    }
}

/// Liveness verdict from [`deadlock_check`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Liveness {
    /// The expected number of probe events was observed.
    Ok { observed: usize },
    /// The circuit went quiescent with fewer probe events than expected.
    Deadlock {
        observed: usize,
        expected: usize,
        quiescent_at: Ps,
    },
    /// The run ended without quiescence (horizon or livelock) before the
    /// expected activity completed; no deadlock verdict is possible.
    Undecided { observed: usize, expected: usize },
}

impl Liveness {
    pub fn is_deadlock(&self) -> bool {
        matches!(self, Liveness::Deadlock { .. })
    }

    pub fn is_ok(&self) -> bool {
        matches!(self, Liveness::Ok { .. })
    }
}

/// Deadlock = quiescent with missing activity. `expected_rises` is the
/// number of rising transitions the caller expects across the probe nets
/// (for dual-rail channels: one rise per codeword).
pub fn deadlock_check(trace: &Trace, probes: &[NetId], expected_rises: usize) -> Liveness {
    let observed: usize = probes.iter().map(|&p| trace.rises_on(p)).sum();
    if observed >= expected_rises {
        Liveness::Ok { observed }
    } else if let Some(q) = trace.quiescent_at {
        Liveness::Deadlock {
            observed,
            expected: expected_rises,
            quiescent_at: q,
        }
    } else {
        Liveness::Undecided {
            observed,
            expected: expected_rises,
        }
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Delay(#[from] DelayTableError),
    #[error("cannot drive net '{name}': not a primary input")]
    DriveNonInput { name: String },
}

/// Interface handed to [`Process`] callbacks. Processes may read any net
/// and drive primary inputs, either immediately (same timestamp) or after
/// a delay.
pub struct SimApi<'a> {
    now: Ps,
    values: &'a [bool],
    writes: &'a mut Vec<(Ps, NetId, bool)>,
}

impl<'a> SimApi<'a> {
    pub fn now(&self) -> Ps {
        self.now
    }

    pub fn value(&self, net: NetId) -> bool {
        self.values[net.0 as usize]
    }

    /// Drive a primary input at the current timestamp.
    pub fn drive(&mut self, net: NetId, value: bool) {
        self.drive_after(0, net, value);
    }

    /// Drive a primary input `delay` picoseconds from now.
    pub fn drive_after(&mut self, delay: Ps, net: NetId, value: bool) {
        self.writes.push((self.now + delay, net, value));
    }
}

/// A reactive environment process: initialized once at t = 0 (after reset
/// settling) and woken on transitions of the nets it watches. Producers
/// and consumers in [`crate::dualrail`] are implemented on this trait.
pub trait Process {
    fn init(&mut self, api: &mut SimApi);
    fn on_event(&mut self, net: NetId, value: bool, api: &mut SimApi);
}

type HeapEntry = Reverse<(Ps, u32, u64, bool)>;

/// A configured simulation run over a borrowed netlist.
pub struct Simulation<'n> {
    netlist: &'n Netlist,
    delays: Vec<Ps>,
    values: Vec<bool>,
    state: Vec<bool>,
    initial_values: Vec<bool>,
    heap: BinaryHeap<HeapEntry>,
    seq: u64,
    processes: Vec<Box<dyn Process>>,
    watchers: Vec<Vec<u32>>,
    record_mask: Option<Vec<bool>>,
    write_buf: Vec<(Ps, NetId, bool)>,
}

impl<'n> Simulation<'n> {
    /// Resolve delays, run reset settling, and schedule the release
    /// events. The simulation is ready to accept stimuli and run.
    pub fn new(netlist: &'n Netlist, model: &DelayModel) -> Result<Self, SimError> {
        let delays = model.resolve(netlist)?;
        let n_nets = netlist.net_count();
        let n_gates = netlist.gate_count();
        let mut values = vec![false; n_nets];
        let mut state: Vec<bool> = netlist.gates().iter().map(|g| g.preset).collect();
        for (g, &s) in netlist.gates().iter().zip(&state) {
            values[g.output.0 as usize] = s;
        }

        // Reset epoch: Jacobi relaxation with every storage element held
        // at its power-up state — preset C-elements at their token, all
        // other C-elements empty — the way a global reset wire forces
        // latches in hardware. Only combinational gates relax, settling
        // the acknowledge network consistently around the frozen tokens.
        // Were empty latches allowed to relax too, a latch downstream of
        // a preset one would capture the token before the blocking
        // acknowledge has propagated, duplicating it. Token motion
        // happens after release, through ordinary causal events.
        let bound = 2 * n_gates + 8;
        for _ in 0..bound {
            let mut next = state.clone();
            let mut changed = false;
            for (i, g) in netlist.gates().iter().enumerate() {
                if g.preset || g.kind.is_sequential() {
                    continue;
                }
                let v = netlist.eval_gate(g, &values, state[i]);
                if v != state[i] {
                    next[i] = v;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            state = next;
            for (i, g) in netlist.gates().iter().enumerate() {
                values[g.output.0 as usize] = state[i];
            }
        }
        let initial_values = values.clone();

        // Release: every gate whose function disagrees with its held state
        // fires now, preset gates included.
        let mut heap = BinaryHeap::new();
        let mut seq = 0u64;
        for (i, g) in netlist.gates().iter().enumerate() {
            let v = netlist.eval_gate(g, &values, state[i]);
            if v != state[i] {
                state[i] = v;
                seq += 1;
                heap.push(Reverse((delays[i], g.output.0, seq, v)));
            }
        }

        Ok(Simulation {
            netlist,
            delays,
            values,
            state,
            initial_values,
            heap,
            seq,
            processes: Vec::new(),
            watchers: vec![Vec::new(); n_nets],
            record_mask: None,
            write_buf: Vec::new(),
        })
    }

    /// Register a reactive process woken on transitions of `watch` nets.
    pub fn add_process(&mut self, process: Box<dyn Process>, watch: &[NetId]) {
        let idx = self.processes.len() as u32;
        self.processes.push(process);
        for &n in watch {
            let w = &mut self.watchers[n.0 as usize];
            if !w.contains(&idx) {
                w.push(idx);
            }
        }
    }

    /// Record only the given nets in the trace (plus nothing else).
    /// Recording policy does not affect simulation semantics, only the
    /// size of the returned trace.
    pub fn record_only(&mut self, nets: &[NetId]) {
        let mut mask = vec![false; self.netlist.net_count()];
        for &n in nets {
            mask[n.0 as usize] = true;
        }
        self.record_mask = Some(mask);
    }

    /// Schedule an absolute-time write to a primary input.
    pub fn drive_at(&mut self, time: Ps, net: NetId, value: bool) -> Result<(), SimError> {
        if !self.netlist.is_primary_input(net) {
            return Err(SimError::DriveNonInput {
                name: self.netlist.net_name(net).to_string(),
            });
        }
        self.seq += 1;
        self.heap.push(Reverse((time, net.0, self.seq, value)));
        Ok(())
    }

    /// Net value as of now (pre-run: the reset-settled value).
    pub fn value(&self, net: NetId) -> bool {
        self.values[net.0 as usize]
    }

    /// Run until quiescence, the horizon `t_max`, or a livelock trip.
    pub fn run(mut self, t_max: Ps) -> Trace {
        let mut events: Vec<TraceEvent> = Vec::new();
        let mut procs = std::mem::take(&mut self.processes);

        // Initialize processes at t = 0 against the settled state.
        {
            let mut api = SimApi {
                now: 0,
                values: &self.values,
                writes: &mut self.write_buf,
            };
            for p in procs.iter_mut() {
                p.init(&mut api);
            }
        }
        self.flush_writes();

        let delta_budget = 1024 + 32 * self.netlist.gate_count() as u64;
        let mut delta_time: Ps = Ps::MAX;
        let mut delta_count: u64 = 0;
        let mut last_time: Ps = 0;
        let mut processed: u64 = 0;
        let mut livelock = false;
        let mut horizon_hit = false;

        while let Some(&Reverse((t, net, _, value))) = self.heap.peek() {
            if t > t_max {
                horizon_hit = true;
                break;
            }
            self.heap.pop();
            let ni = net as usize;
            if self.values[ni] == value {
                continue;
            }
            if t == delta_time {
                delta_count += 1;
                if delta_count > delta_budget {
                    livelock = true;
                    break;
                }
            } else {
                delta_time = t;
                delta_count = 0;
            }
            self.values[ni] = value;
            last_time = t;
            processed += 1;
            if self
                .record_mask
                .as_ref()
                .map(|m| m[ni])
                .unwrap_or(true)
            {
                events.push(TraceEvent {
                    time: t,
                    net: NetId(net),
                    value,
                });
            }
            for &gid in self.netlist.fanout(NetId(net)) {
                let gi = gid.0 as usize;
                let gate = &self.netlist.gates()[gi];
                let new = self.netlist.eval_gate(gate, &self.values, self.state[gi]);
                if new != self.state[gi] {
                    self.state[gi] = new;
                    self.seq += 1;
                    self.heap
                        .push(Reverse((t + self.delays[gi], gate.output.0, self.seq, new)));
                }
            }
            if !self.watchers[ni].is_empty() {
                let mut api = SimApi {
                    now: t,
                    values: &self.values,
                    writes: &mut self.write_buf,
                };
                // Indexed loop: watcher lists are fixed after construction.
                for wi in 0..self.watchers[ni].len() {
                    let pi = self.watchers[ni][wi] as usize;
                    procs[pi].on_event(NetId(net), value, &mut api);
                }
                self.flush_writes();
            }
        }

        let quiescent_at = if livelock || horizon_hit {
            None
        } else {
            Some(last_time)
        };
        Trace {
            events,
            initial_values: self.initial_values,
            final_values: self.values,
            quiescent_at,
            t_max,
            livelock,
            processed_events: processed,
        }
    }

    fn flush_writes(&mut self) {
        for (t, net, value) in self.write_buf.drain(..) {
            debug_assert!(
                self.netlist.is_primary_input(net),
                "process drove non-input net '{}'",
                self.netlist.net_name(net)
            );
            self.seq += 1;
            self.heap.push(Reverse((t, net.0, self.seq, value)));
        }
    }
}

/// One-shot convenience: pre-seeded stimuli, no reactive processes.
pub fn simulate(
    netlist: &Netlist,
    model: &DelayModel,
    stimuli: &[(Ps, NetId, bool)],
    t_max: Ps,
) -> Result<Trace, SimError> {
    let mut sim = Simulation::new(netlist, model)?;
    for &(t, net, value) in stimuli {
        sim.drive_at(t, net, value)?;
    }
    Ok(sim.run(t_max))
}
