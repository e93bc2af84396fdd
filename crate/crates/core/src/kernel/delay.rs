//! Gate delay models: fixed per-kind tables and randomized per-gate
//! assignments for delay-insensitivity checks.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::netlist::{GateKind, Netlist};
use super::{ns_to_ps, Ps};

/// Default jitter bounds for randomized delays: 0.1 ns .. 2.0 ns.
pub const DEFAULT_JITTER_MIN_PS: Ps = 100;
pub const DEFAULT_JITTER_MAX_PS: Ps = 2_000;

/// Per-kind fixed delay table.
#[derive(Clone, Debug, PartialEq)]
pub struct DelayTable {
    entries: HashMap<GateKind, Ps>,
    default: Option<Ps>,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum DelayTableError {
    #[error("line {line}: unknown gate kind '{token}'")]
    UnknownGateKind { line: usize, token: String },
    #[error("line {line}: malformed entry '{text}' (expected '<KIND> <delay_ns>')")]
    Malformed { line: usize, text: String },
    #[error("line {line}: invalid delay '{text}' (must be a non-negative number)")]
    BadDelay { line: usize, text: String },
    #[error("no delay for gate kind {kind:?} and no DEFAULT entry")]
    MissingKind { kind: GateKind },
}

impl DelayTable {
    pub fn new() -> Self {
        DelayTable {
            entries: HashMap::new(),
            default: None,
        }
    }

    /// The built-in table used when no delay file is given.
    pub fn builtin() -> Self {
        let mut t = DelayTable::new();
        t.set(GateKind::CElement, ns_to_ps(0.5));
        t.set(GateKind::CElement3, ns_to_ps(0.6));
        t.set(GateKind::And2, ns_to_ps(0.3));
        t.set(GateKind::Or2, ns_to_ps(0.3));
        t.set(GateKind::Or3, ns_to_ps(0.4));
        t.set(GateKind::Nor2, ns_to_ps(0.2));
        t.set(GateKind::Buf, ns_to_ps(0.1));
        t.set(GateKind::Source, ns_to_ps(0.1));
        t.set(GateKind::Probe, ns_to_ps(0.1));
        t
    }

    pub fn set(&mut self, kind: GateKind, ps: Ps) {
        self.entries.insert(kind, ps);
    }

    pub fn set_default(&mut self, ps: Ps) {
        self.default = Some(ps);
    }

    pub fn get(&self, kind: GateKind) -> Result<Ps, DelayTableError> {
        self.entries
            .get(&kind)
            .copied()
            .or(self.default)
            .ok_or(DelayTableError::MissingKind { kind })
    }

    /// Parse the text format: one `<GATEKIND> <delay_ns>` entry per line,
    /// `DEFAULT <delay_ns>` as a fallback for unlisted kinds, `#` comments
    /// and blank lines ignored.
    pub fn parse(text: &str) -> Result<DelayTable, DelayTableError> {
        let mut table = DelayTable::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let mut parts = body.split_whitespace();
            let (tok, val) = match (parts.next(), parts.next(), parts.next()) {
                (Some(t), Some(v), None) => (t, v),
                _ => {
                    return Err(DelayTableError::Malformed {
                        line,
                        text: body.to_string(),
                    })
                }
            };
            let ns: f64 = val.parse().map_err(|_| DelayTableError::BadDelay {
                line,
                text: val.to_string(),
            })?;
            if !ns.is_finite() || ns < 0.0 {
                return Err(DelayTableError::BadDelay {
                    line,
                    text: val.to_string(),
                });
            }
            if tok == "DEFAULT" {
                table.set_default(ns_to_ps(ns));
            } else {
                let kind =
                    GateKind::from_token(tok).ok_or_else(|| DelayTableError::UnknownGateKind {
                        line,
                        token: tok.to_string(),
                    })?;
                table.set(kind, ns_to_ps(ns));
            }
        }
        Ok(table)
    }
}

impl Default for DelayTable {
    fn default() -> Self {
        Self::builtin()
    }
}

/// How gate delays are assigned for a simulation run.
#[derive(Clone, Debug)]
pub enum DelayModel {
    /// Every gate of a kind gets the table delay (unless the gate carries
    /// an explicit override).
    Fixed(DelayTable),
    /// Every gate independently draws a uniform delay from
    /// `[min_ps, max_ps]`, deterministically from `seed`. Used to check
    /// delay-insensitivity: outputs must not depend on the draw.
    Randomized { min_ps: Ps, max_ps: Ps, seed: u64 },
}

impl DelayModel {
    pub fn fixed_default() -> Self {
        DelayModel::Fixed(DelayTable::builtin())
    }

    pub fn randomized(seed: u64) -> Self {
        DelayModel::Randomized {
            min_ps: DEFAULT_JITTER_MIN_PS,
            max_ps: DEFAULT_JITTER_MAX_PS,
            seed,
        }
    }

    /// Resolve the per-gate delay vector for a netlist. Explicit per-gate
    /// overrides always win; randomized draws are made in gate-id order so
    /// the assignment is a pure function of the seed.
    pub fn resolve(&self, netlist: &Netlist) -> Result<Vec<Ps>, DelayTableError> {
        match self {
            DelayModel::Fixed(table) => netlist
                .gates()
                .iter()
                .map(|g| match g.delay_override {
                    Some(ps) => Ok(ps),
                    None => table.get(g.kind),
                })
                .collect(),
            DelayModel::Randomized { min_ps, max_ps, seed } => {
                let (lo, hi) = (*min_ps.min(max_ps), *min_ps.max(max_ps));
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok(netlist
                    .gates()
                    .iter()
                    .map(|g| {
                        // Draw for every gate to keep the stream aligned,
                        // then apply overrides.
                        let draw = rng.gen_range(lo..=hi);
                        g.delay_override.unwrap_or(draw)
                    })
                    .collect())
            }
        }
    }
}
