//! Netlist representation: nets, gates, and the builder used by the
//! operator library to compose fragments.

use std::fmt;

use thiserror::Error;

use super::Ps;

/// Index of a binary net.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NetId(pub u32);

impl fmt::Debug for NetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// Index of a gate.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GateId(pub u32);

impl fmt::Debug for GateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.0)
    }
}

/// The gate alphabet. Deliberately small: everything in the operator
/// library is built from C-elements and a handful of combinational gates.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum GateKind {
    /// Muller C-element, 2 inputs: output goes high when both inputs are
    /// high, low when both are low, and holds its state otherwise.
    CElement,
    /// Muller C-element, 3 inputs.
    CElement3,
    And2,
    Or2,
    Or3,
    Nor2,
    /// Single-input buffer (also used as a named alias for a net).
    Buf,
    /// Zero-input constant driver. Drives 0, or 1 when preset.
    Source,
    /// Single-input observation point; its output net is registered as a
    /// probe and counted by [`super::deadlock_check`].
    Probe,
}

impl GateKind {
    pub const ALL: [GateKind; 9] = [
        GateKind::CElement,
        GateKind::CElement3,
        GateKind::And2,
        GateKind::Or2,
        GateKind::Or3,
        GateKind::Nor2,
        GateKind::Buf,
        GateKind::Source,
        GateKind::Probe,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Source => 0,
            GateKind::Buf | GateKind::Probe => 1,
            GateKind::CElement3 | GateKind::Or3 => 3,
            _ => 2,
        }
    }

    /// State-holding gates: C-elements (and sources, trivially).
    pub fn is_sequential(self) -> bool {
        matches!(
            self,
            GateKind::CElement | GateKind::CElement3 | GateKind::Source
        )
    }

    /// True for Muller C-elements; used by resource reports because the
    /// interesting cost comparison between adder implementations is the
    /// number of C-gates, not raw gate count.
    pub fn is_c_gate(self) -> bool {
        matches!(self, GateKind::CElement | GateKind::CElement3)
    }

    /// Token used in delay-table files.
    pub fn token(self) -> &'static str {
        match self {
            GateKind::CElement => "C_ELEMENT",
            GateKind::CElement3 => "C_ELEMENT3",
            GateKind::And2 => "AND2",
            GateKind::Or2 => "OR2",
            GateKind::Or3 => "OR3",
            GateKind::Nor2 => "NOR2",
            GateKind::Buf => "BUF",
            GateKind::Source => "SOURCE",
            GateKind::Probe => "PROBE",
        }
    }

    pub fn from_token(s: &str) -> Option<GateKind> {
        GateKind::ALL.iter().copied().find(|k| k.token() == s)
    }
}

/// A single-output gate instance.
#[derive(Clone, Debug)]
pub struct Gate {
    pub kind: GateKind,
    pub inputs: Vec<NetId>,
    pub output: NetId,
    /// Per-gate delay override in ps; `None` means the delay model decides.
    pub delay_override: Option<Ps>,
    /// Power-up logical state. Preset gates are held at their state during
    /// the pre-release settling phase (the "reset epoch"); everything else
    /// starts at 0. Only meaningful for sequential gates: this is how
    /// initialized registers get their power-up token.
    pub preset: bool,
}

/// Gate counts per kind, for resource reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KindCounts {
    counts: [(GateKind, usize); 9],
}

impl KindCounts {
    fn new() -> Self {
        let mut counts = [(GateKind::Buf, 0); 9];
        for (slot, kind) in counts.iter_mut().zip(GateKind::ALL) {
            slot.0 = kind;
        }
        KindCounts { counts }
    }

    fn bump(&mut self, kind: GateKind) {
        for slot in self.counts.iter_mut() {
            if slot.0 == kind {
                slot.1 += 1;
            }
        }
    }

    pub fn get(&self, kind: GateKind) -> usize {
        self.counts
            .iter()
            .find(|(k, _)| *k == kind)
            .map(|(_, n)| *n)
            .unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.iter().map(|(_, n)| n).sum()
    }

    pub fn c_gates(&self) -> usize {
        self.counts
            .iter()
            .filter(|(k, _)| k.is_c_gate())
            .map(|(_, n)| n)
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (GateKind, usize)> + '_ {
        self.counts.iter().copied()
    }
}

/// Structural errors caught when a netlist is finalized.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum NetlistError {
    #[error("gate {gate:?} ({kind:?}) expects {expected} inputs, got {got}")]
    ArityMismatch {
        gate: GateId,
        kind: GateKind,
        expected: usize,
        got: usize,
    },
    #[error("net '{name}' has multiple drivers ({first:?} and {second:?})")]
    MultipleDrivers {
        net: NetId,
        name: String,
        first: GateId,
        second: GateId,
    },
    #[error("net '{name}' is read but has no driver and is not a primary input")]
    UndrivenNet { net: NetId, name: String },
    #[error("net '{name}' is declared a primary input but is driven by gate {gate:?}")]
    DrivenInput {
        net: NetId,
        name: String,
        gate: GateId,
    },
}

/// Mutable netlist under construction. Fragment builders in the operator
/// library append gates here; structural validation is deferred to
/// [`NetlistBuilder::finalize`] so that composition code stays free of
/// error plumbing.
#[derive(Default)]
pub struct NetlistBuilder {
    net_names: Vec<String>,
    gates: Vec<Gate>,
    inputs: Vec<NetId>,
    errors: Vec<NetlistError>,
}

impl NetlistBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Create a fresh net. Names are debug labels; uniqueness is not
    /// required or enforced.
    pub fn net(&mut self, name: impl Into<String>) -> NetId {
        let id = NetId(self.net_names.len() as u32);
        self.net_names.push(name.into());
        id
    }

    /// Create a net and declare it a primary input (driven by the
    /// environment, not by a gate).
    pub fn input(&mut self, name: impl Into<String>) -> NetId {
        let id = self.net(name);
        self.inputs.push(id);
        id
    }

    /// Declare an existing net a primary input. Used when environment
    /// drivers claim one side of an already-created channel.
    pub fn mark_input(&mut self, net: NetId) {
        if !self.inputs.contains(&net) {
            self.inputs.push(net);
        }
    }

    pub fn is_input(&self, net: NetId) -> bool {
        self.inputs.contains(&net)
    }

    /// Append a gate driving `output`.
    pub fn gate(&mut self, kind: GateKind, inputs: &[NetId], output: NetId) -> GateId {
        let id = GateId(self.gates.len() as u32);
        if inputs.len() != kind.arity() {
            self.errors.push(NetlistError::ArityMismatch {
                gate: id,
                kind,
                expected: kind.arity(),
                got: inputs.len(),
            });
        }
        self.gates.push(Gate {
            kind,
            inputs: inputs.to_vec(),
            output,
            delay_override: None,
            preset: false,
        });
        id
    }

    /// Set the power-up state of a sequential gate.
    pub fn preset(&mut self, gate: GateId) {
        self.gates[gate.0 as usize].preset = true;
    }

    /// Override the delay of a single gate (picoseconds).
    pub fn set_delay(&mut self, gate: GateId, ps: Ps) {
        self.gates[gate.0 as usize].delay_override = Some(ps);
    }

    /// Convenience: a constant-0 driver.
    pub fn tie_low(&mut self, name: impl Into<String>) -> NetId {
        let n = self.net(name);
        self.gate(GateKind::Source, &[], n);
        n
    }

    /// Convenience: a constant-1 driver (preset source).
    pub fn tie_high(&mut self, name: impl Into<String>) -> NetId {
        let n = self.net(name);
        let g = self.gate(GateKind::Source, &[], n);
        self.preset(g);
        n
    }

    /// Attach a probe to `src`; the probe's output net is registered as an
    /// observation point for liveness checks.
    pub fn probe(&mut self, src: NetId, name: impl Into<String>) -> NetId {
        let out = self.net(name);
        self.gate(GateKind::Probe, &[src], out);
        out
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn net_count(&self) -> usize {
        self.net_names.len()
    }

    /// Validate and freeze the netlist.
    pub fn finalize(self) -> Result<Netlist, Vec<NetlistError>> {
        let NetlistBuilder {
            net_names,
            gates,
            inputs,
            mut errors,
        } = self;
        let n_nets = net_names.len();
        let mut driver: Vec<Option<GateId>> = vec![None; n_nets];
        for (i, g) in gates.iter().enumerate() {
            let gid = GateId(i as u32);
            let out = g.output.0 as usize;
            match driver[out] {
                None => driver[out] = Some(gid),
                Some(first) => errors.push(NetlistError::MultipleDrivers {
                    net: g.output,
                    name: net_names[out].clone(),
                    first,
                    second: gid,
                }),
            }
        }
        for &inp in &inputs {
            if let Some(gate) = driver[inp.0 as usize] {
                errors.push(NetlistError::DrivenInput {
                    net: inp,
                    name: net_names[inp.0 as usize].clone(),
                    gate,
                });
            }
        }
        let mut read = vec![false; n_nets];
        for g in &gates {
            for &i in &g.inputs {
                read[i.0 as usize] = true;
            }
        }
        for n in 0..n_nets {
            if read[n] && driver[n].is_none() && !inputs.contains(&NetId(n as u32)) {
                errors.push(NetlistError::UndrivenNet {
                    net: NetId(n as u32),
                    name: net_names[n].clone(),
                });
            }
        }
        if !errors.is_empty() {
            return Err(errors);
        }

        let mut fanout: Vec<Vec<GateId>> = vec![Vec::new(); n_nets];
        for (i, g) in gates.iter().enumerate() {
            for &inp in &g.inputs {
                let f = &mut fanout[inp.0 as usize];
                // A gate reading the same net twice still evaluates once.
                if f.last() != Some(&GateId(i as u32)) {
                    f.push(GateId(i as u32));
                }
            }
        }
        let probes = gates
            .iter()
            .filter(|g| g.kind == GateKind::Probe)
            .map(|g| g.output)
            .collect();
        let mut counts = KindCounts::new();
        for g in &gates {
            counts.bump(g.kind);
        }
        Ok(Netlist {
            net_names,
            gates,
            inputs,
            driver,
            fanout,
            probes,
            counts,
        })
    }
}

/// A validated, immutable netlist.
#[derive(Debug)]
pub struct Netlist {
    net_names: Vec<String>,
    gates: Vec<Gate>,
    inputs: Vec<NetId>,
    driver: Vec<Option<GateId>>,
    fanout: Vec<Vec<GateId>>,
    probes: Vec<NetId>,
    counts: KindCounts,
}

impl Netlist {
    pub fn net_count(&self) -> usize {
        self.net_names.len()
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, id: GateId) -> &Gate {
        &self.gates[id.0 as usize]
    }

    pub fn net_name(&self, net: NetId) -> &str {
        &self.net_names[net.0 as usize]
    }

    pub fn primary_inputs(&self) -> &[NetId] {
        &self.inputs
    }

    pub fn is_primary_input(&self, net: NetId) -> bool {
        self.inputs.contains(&net)
    }

    pub fn driver(&self, net: NetId) -> Option<GateId> {
        self.driver[net.0 as usize]
    }

    pub fn fanout(&self, net: NetId) -> &[GateId] {
        &self.fanout[net.0 as usize]
    }

    /// Observation points (outputs of PROBE gates).
    pub fn probes(&self) -> &[NetId] {
        &self.probes
    }

    pub fn kind_counts(&self) -> &KindCounts {
        &self.counts
    }

    /// Force the delay of the gate driving the net called `driven_net`,
    /// overriding whatever the delay model would assign. This is the
    /// adversarial "stretch one wire" experiment behind every
    /// delay-insensitivity claim: a DI circuit must stay correct for any
    /// single stretch, so one misbehaving stretch is a complete
    /// counterexample. Returns false if no net has that name or the net
    /// has no driver.
    pub fn stretch_gate(&mut self, driven_net: &str, ps: Ps) -> bool {
        let Some(idx) = self.net_names.iter().position(|n| n == driven_net) else {
            return false;
        };
        let Some(gate) = self.driver[idx] else {
            return false;
        };
        self.gates[gate.0 as usize].delay_override = Some(ps);
        true
    }

    /// Evaluate a gate's logical function against net values, given its
    /// current held state (relevant for C-elements and sources).
    pub fn eval_gate(&self, gate: &Gate, values: &[bool], state: bool) -> bool {
        let v = |n: NetId| values[n.0 as usize];
        match gate.kind {
            GateKind::CElement | GateKind::CElement3 => {
                let mut all_hi = true;
                let mut all_lo = true;
                for &i in &gate.inputs {
                    if v(i) {
                        all_lo = false;
                    } else {
                        all_hi = false;
                    }
                }
                if all_hi {
                    true
                } else if all_lo {
                    false
                } else {
                    state
                }
            }
            GateKind::And2 => v(gate.inputs[0]) && v(gate.inputs[1]),
            GateKind::Or2 => v(gate.inputs[0]) || v(gate.inputs[1]),
            GateKind::Or3 => v(gate.inputs[0]) || v(gate.inputs[1]) || v(gate.inputs[2]),
            GateKind::Nor2 => !(v(gate.inputs[0]) || v(gate.inputs[1])),
            GateKind::Buf | GateKind::Probe => v(gate.inputs[0]),
            GateKind::Source => state,
        }
    }
}
