//! Four-phase protocol monitor.
//!
//! The monitor replays a recorded trace against one channel in causal
//! order (the trace preserves processing order, which is deterministic)
//! and checks the return-to-zero discipline:
//!
//! * the rail pair must never show the illegal `(1,1)` code;
//! * a codeword may only complete when the acknowledge is low
//!   ([`ViolationKind::AckHeldOverSpacer`] otherwise);
//! * between two codewords the acknowledge must complete a full
//!   rise-and-fall cycle — a fresh codeword without that cycle means the
//!   producer did not wait for the spacer phase
//!   ([`ViolationKind::MissingSpacer`]);
//! * the acknowledge may not rise while the rails are empty
//!   ([`ViolationKind::AckBeforeData`]).

use crate::kernel::{Ps, Trace};

use super::{rail_state, Channel, RailState};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// Both rails of the pair were high.
    BothRailsHigh,
    /// A codeword completed although the acknowledge never finished its
    /// rise-and-fall cycle for the previous codeword: the spacer phase
    /// was skipped or not waited out.
    MissingSpacer,
    /// The acknowledge rose while the rails were empty.
    AckBeforeData,
    /// A codeword completed while the acknowledge was still high.
    AckHeldOverSpacer,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub time: Ps,
}

/// Everything the monitor extracted from one channel.
#[derive(Clone, Debug)]
pub struct ChannelReport {
    pub name: String,
    /// Completed codewords: (time, bit). A codeword already present after
    /// reset settling is reported at time 0.
    pub codewords: Vec<(Ps, bool)>,
    pub violations: Vec<Violation>,
}

impl ChannelReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn bits(&self) -> Vec<bool> {
        self.codewords.iter().map(|&(_, b)| b).collect()
    }
}

/// Replay `trace` against `ch` and report codewords and violations.
pub fn monitor_channel(trace: &Trace, ch: &Channel, name: &str) -> ChannelReport {
    let mut t_v = trace.initial_value(ch.t);
    let mut f_v = trace.initial_value(ch.f);
    let mut a_v = trace.initial_value(ch.ack);

    let mut codewords: Vec<(Ps, bool)> = Vec::new();
    let mut violations: Vec<Violation> = Vec::new();

    let mut state = rail_state(t_v, f_v);
    let mut have_prev_codeword = false;
    // Acknowledge cycle bookkeeping since the last codeword completion.
    let mut ack_rose = a_v;
    let mut ack_cycle_done = false;

    if let Some(bit) = state.codeword() {
        codewords.push((0, bit));
        have_prev_codeword = true;
    }
    if state == RailState::Illegal {
        violations.push(Violation {
            kind: ViolationKind::BothRailsHigh,
            time: 0,
        });
    }

    for ev in trace
        .events
        .iter()
        .filter(|e| e.net == ch.t || e.net == ch.f || e.net == ch.ack)
    {
        if ev.net == ch.ack {
            a_v = ev.value;
            if ev.value {
                ack_rose = true;
                if state == RailState::Empty {
                    violations.push(Violation {
                        kind: ViolationKind::AckBeforeData,
                        time: ev.time,
                    });
                }
            } else if ack_rose {
                ack_cycle_done = true;
            }
            continue;
        }

        if ev.net == ch.t {
            t_v = ev.value;
        } else {
            f_v = ev.value;
        }
        let next = rail_state(t_v, f_v);
        if next == state {
            continue;
        }
        match next {
            RailState::Illegal => violations.push(Violation {
                kind: ViolationKind::BothRailsHigh,
                time: ev.time,
            }),
            RailState::True | RailState::False => {
                if a_v {
                    violations.push(Violation {
                        kind: ViolationKind::AckHeldOverSpacer,
                        time: ev.time,
                    });
                } else if have_prev_codeword && !ack_cycle_done {
                    violations.push(Violation {
                        kind: ViolationKind::MissingSpacer,
                        time: ev.time,
                    });
                }
                codewords.push((ev.time, next == RailState::True));
                have_prev_codeword = true;
                ack_rose = false;
                ack_cycle_done = false;
            }
            RailState::Empty => {}
        }
        state = next;
    }

    ChannelReport {
        name: name.to_string(),
        codewords,
        violations,
    }
}
