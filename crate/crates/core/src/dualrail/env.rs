//! Environment drivers: a four-phase producer that feeds a channel and an
//! always-ready (optionally throttled) consumer that drains one.
//!
//! Both are reactive [`Process`]es with zero intrinsic delay: they respond
//! to handshake edges at the timestamp they occur. All timing in a test
//! therefore comes from the circuit under test, not from the environment.

use std::cell::{Cell, RefCell};
use std::rc::Rc;

use crate::kernel::{NetId, Process, Ps, SimApi};

use super::{bits_to_word, rail_state, Channel, RailState};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ProducerPhase {
    /// The channel acknowledge was already high at init (a power-up token
    /// sits downstream); wait for it to clear before the first codeword.
    AwaitInitialFall,
    AwaitRise,
    AwaitFall,
    Done,
}

/// Observation handle for a [`Producer`].
#[derive(Clone)]
pub struct ProducerHandle {
    done: Rc<Cell<bool>>,
    completed: Rc<Cell<usize>>,
}

impl ProducerHandle {
    /// All values emitted and the final handshake completed.
    pub fn is_done(&self) -> bool {
        self.done.get()
    }

    /// Number of fully completed handshakes.
    pub fn completed(&self) -> usize {
        self.completed.get()
    }
}

/// Drives a bit stream into a channel under the four-phase discipline.
/// Register the process with a watch on `ch.ack`.
pub struct Producer {
    ch: Channel,
    bits: Vec<bool>,
    idx: usize,
    phase: ProducerPhase,
    done: Rc<Cell<bool>>,
    completed: Rc<Cell<usize>>,
}

impl Producer {
    pub fn new(ch: Channel, bits: Vec<bool>) -> (Box<Producer>, ProducerHandle) {
        let done = Rc::new(Cell::new(false));
        let completed = Rc::new(Cell::new(0));
        let handle = ProducerHandle {
            done: done.clone(),
            completed: completed.clone(),
        };
        (
            Box::new(Producer {
                ch,
                bits,
                idx: 0,
                phase: ProducerPhase::AwaitRise,
                done,
                completed,
            }),
            handle,
        )
    }

    /// The nets this process must watch.
    pub fn watch(ch: &Channel) -> [NetId; 1] {
        [ch.ack]
    }

    fn rail(&self) -> NetId {
        if self.bits[self.idx] {
            self.ch.t
        } else {
            self.ch.f
        }
    }

    fn emit_or_finish(&mut self, api: &mut SimApi) {
        if self.idx >= self.bits.len() {
            self.phase = ProducerPhase::Done;
            self.done.set(true);
        } else {
            api.drive(self.rail(), true);
            self.phase = ProducerPhase::AwaitRise;
        }
    }
}

impl Process for Producer {
    fn init(&mut self, api: &mut SimApi) {
        if api.value(self.ch.ack) {
            self.phase = ProducerPhase::AwaitInitialFall;
        } else {
            self.emit_or_finish(api);
        }
    }

    fn on_event(&mut self, net: NetId, value: bool, api: &mut SimApi) {
        if net != self.ch.ack {
            return;
        }
        match (self.phase, value) {
            (ProducerPhase::AwaitRise, true) => {
                api.drive(self.rail(), false);
                self.phase = ProducerPhase::AwaitFall;
            }
            (ProducerPhase::AwaitFall, false) => {
                self.idx += 1;
                self.completed.set(self.idx);
                self.emit_or_finish(api);
            }
            (ProducerPhase::AwaitInitialFall, false) => {
                self.emit_or_finish(api);
            }
            _ => {}
        }
    }
}

/// Observation handle for a [`Consumer`].
#[derive(Clone)]
pub struct ConsumerHandle {
    received: Rc<RefCell<Vec<(Ps, bool)>>>,
}

impl ConsumerHandle {
    /// Timestamped received bits, in arrival order.
    pub fn records(&self) -> Vec<(Ps, bool)> {
        self.received.borrow().clone()
    }

    pub fn bits(&self) -> Vec<bool> {
        self.received.borrow().iter().map(|&(_, b)| b).collect()
    }

    pub fn len(&self) -> usize {
        self.received.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.received.borrow().is_empty()
    }

    /// Group received bits into words (LSB first); a trailing partial
    /// word is discarded. Each word is timestamped with the arrival of
    /// its last bit.
    pub fn words(&self, width: usize) -> Vec<(Ps, i64)> {
        self.received
            .borrow()
            .chunks_exact(width)
            .map(|chunk| {
                let bits: Vec<bool> = chunk.iter().map(|&(_, b)| b).collect();
                (chunk[width - 1].0, bits_to_word(&bits))
            })
            .collect()
    }
}

/// Drains a channel: records each codeword, acknowledges it (optionally
/// after a fixed delay), and releases the acknowledge on the spacer.
/// Register the process with a watch on `ch.t` and `ch.f`.
pub struct Consumer {
    ch: Channel,
    acked: bool,
    ack_delay: Ps,
    received: Rc<RefCell<Vec<(Ps, bool)>>>,
}

impl Consumer {
    pub fn new(ch: Channel) -> (Box<Consumer>, ConsumerHandle) {
        Consumer::with_ack_delay(ch, 0)
    }

    /// A throttled consumer: acknowledges `ack_delay` ps after each rail
    /// edge it responds to. Used to apply backpressure in cycle-time
    /// measurements.
    pub fn with_ack_delay(ch: Channel, ack_delay: Ps) -> (Box<Consumer>, ConsumerHandle) {
        let received = Rc::new(RefCell::new(Vec::new()));
        let handle = ConsumerHandle {
            received: received.clone(),
        };
        (
            Box::new(Consumer {
                ch,
                acked: false,
                ack_delay,
                received,
            }),
            handle,
        )
    }

    /// The nets this process must watch.
    pub fn watch(ch: &Channel) -> [NetId; 2] {
        [ch.t, ch.f]
    }

    fn react(&mut self, api: &mut SimApi) {
        let state = rail_state(api.value(self.ch.t), api.value(self.ch.f));
        match state {
            RailState::True | RailState::False if !self.acked => {
                self.received
                    .borrow_mut()
                    .push((api.now(), state == RailState::True));
                self.acked = true;
                api.drive_after(self.ack_delay, self.ch.ack, true);
            }
            RailState::Empty if self.acked => {
                self.acked = false;
                api.drive_after(self.ack_delay, self.ch.ack, false);
            }
            _ => {}
        }
    }
}

impl Process for Consumer {
    fn init(&mut self, api: &mut SimApi) {
        // A power-up token may already sit on the channel.
        self.react(api);
    }

    fn on_event(&mut self, net: NetId, _value: bool, api: &mut SimApi) {
        if net == self.ch.t || net == self.ch.f {
            self.react(api);
        }
    }
}

/// Drains a pair of channels that share one acknowledge net (a join's
/// output): the acknowledge rises only once *both* channels hold a
/// codeword and falls only once both are empty. Records per channel.
/// Register the process with a watch on all four rails.
pub struct PairConsumer {
    ch0: Channel,
    ch1: Channel,
    acked: bool,
    received: [Rc<RefCell<Vec<(Ps, bool)>>>; 2],
}

impl PairConsumer {
    pub fn new(ch0: Channel, ch1: Channel) -> (Box<PairConsumer>, [ConsumerHandle; 2]) {
        assert_eq!(ch0.ack, ch1.ack, "pair consumer needs a shared acknowledge");
        let received = [
            Rc::new(RefCell::new(Vec::new())),
            Rc::new(RefCell::new(Vec::new())),
        ];
        let handles = [
            ConsumerHandle {
                received: received[0].clone(),
            },
            ConsumerHandle {
                received: received[1].clone(),
            },
        ];
        (
            Box::new(PairConsumer {
                ch0,
                ch1,
                acked: false,
                received,
            }),
            handles,
        )
    }

    /// The nets this process must watch.
    pub fn watch(ch0: &Channel, ch1: &Channel) -> [NetId; 4] {
        [ch0.t, ch0.f, ch1.t, ch1.f]
    }

    fn react(&mut self, api: &mut SimApi) {
        let s0 = rail_state(api.value(self.ch0.t), api.value(self.ch0.f));
        let s1 = rail_state(api.value(self.ch1.t), api.value(self.ch1.f));
        let full = |s: RailState| matches!(s, RailState::True | RailState::False);
        if !self.acked && full(s0) && full(s1) {
            self.received[0]
                .borrow_mut()
                .push((api.now(), s0 == RailState::True));
            self.received[1]
                .borrow_mut()
                .push((api.now(), s1 == RailState::True));
            self.acked = true;
            api.drive(self.ch0.ack, true);
        } else if self.acked && s0 == RailState::Empty && s1 == RailState::Empty {
            self.acked = false;
            api.drive(self.ch0.ack, false);
        }
    }
}

impl Process for PairConsumer {
    fn init(&mut self, api: &mut SimApi) {
        self.react(api);
    }

    fn on_event(&mut self, net: NetId, _value: bool, api: &mut SimApi) {
        let mine = net == self.ch0.t || net == self.ch0.f || net == self.ch1.t || net == self.ch1.f;
        if mine {
            self.react(api);
        }
    }
}
