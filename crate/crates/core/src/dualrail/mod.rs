//! Dual-rail data encoding and the four-phase handshake.
//!
//! Each bit travels on a rail pair `(t, f)`:
//!
//! | t | f | meaning            |
//! |---|---|--------------------|
//! | 0 | 0 | EMPTY (spacer)     |
//! | 1 | 0 | TRUE               |
//! | 0 | 1 | FALSE              |
//! | 1 | 1 | ILLEGAL            |
//!
//! A [`Channel`] bundles a rail pair with an acknowledge net flowing the
//! other way. The four-phase return-to-zero discipline is: producer
//! raises exactly one rail; consumer raises `ack` once it has used the
//! value; producer returns the rails to the spacer; consumer lowers
//! `ack`; only then may the next codeword be issued.
//!
//! Words are transmitted bit-serially, least-significant bit first, in
//! two's complement at a configured width.

mod env;
mod monitor;
mod stimulus;

pub use env::{Consumer, ConsumerHandle, PairConsumer, Producer, ProducerHandle};
pub use monitor::{monitor_channel, ChannelReport, Violation, ViolationKind};
pub use stimulus::{parse_stimulus, StimulusError};

use crate::kernel::{NetId, NetlistBuilder};

/// State of one rail pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RailState {
    Empty,
    True,
    False,
    Illegal,
}

impl RailState {
    /// The encoded bit, if the pair holds a codeword.
    pub fn codeword(self) -> Option<bool> {
        match self {
            RailState::True => Some(true),
            RailState::False => Some(false),
            _ => None,
        }
    }
}

/// Decode a rail pair.
pub fn rail_state(t: bool, f: bool) -> RailState {
    match (t, f) {
        (false, false) => RailState::Empty,
        (true, false) => RailState::True,
        (false, true) => RailState::False,
        (true, true) => RailState::Illegal,
    }
}

/// A dual-rail channel: data rails `t`/`f` and the `ack` flowing back.
#[derive(Clone, Debug)]
pub struct Channel {
    pub t: NetId,
    pub f: NetId,
    pub ack: NetId,
}

impl Channel {
    /// Create a channel with fresh nets `<name>.t`, `<name>.f`,
    /// `<name>.ack`.
    pub fn new(b: &mut NetlistBuilder, name: &str) -> Channel {
        Channel {
            t: b.net(format!("{name}.t")),
            f: b.net(format!("{name}.f")),
            ack: b.net(format!("{name}.ack")),
        }
    }

    /// Two channels sharing one acknowledge net. Used for operator
    /// outputs that deliver a pair of values under a single handshake
    /// (e.g. join).
    pub fn pair_shared_ack(b: &mut NetlistBuilder, n0: &str, n1: &str) -> (Channel, Channel) {
        let first = Channel::new(b, n0);
        let second = Channel {
            t: b.net(format!("{n1}.t")),
            f: b.net(format!("{n1}.f")),
            ack: first.ack,
        };
        (first, second)
    }

    pub fn nets(&self) -> [NetId; 3] {
        [self.t, self.f, self.ack]
    }

    /// Declare the data rails environment-driven (a producer will sit on
    /// this channel).
    pub fn claim_producer(&self, b: &mut NetlistBuilder) {
        b.mark_input(self.t);
        b.mark_input(self.f);
    }

    /// Declare the acknowledge environment-driven (a consumer will sit on
    /// this channel).
    pub fn claim_consumer(&self, b: &mut NetlistBuilder) {
        b.mark_input(self.ack);
    }
}

/// Canonical representative of `value` in two's complement at `width`
/// bits (the range `[-2^(width-1), 2^(width-1))`).
pub fn wrap(value: i64, width: usize) -> i64 {
    debug_assert!((1..=32).contains(&width));
    let m = 1i64 << width;
    let r = ((value % m) + m) % m;
    if r >= m / 2 {
        r - m
    } else {
        r
    }
}

/// LSB-first two's complement bits of `value` at `width`.
pub fn word_to_bits(value: i64, width: usize) -> Vec<bool> {
    let u = (wrap(value, width) as u64) & ((1u64 << width) - 1);
    (0..width).map(|k| (u >> k) & 1 == 1).collect()
}

/// Decode LSB-first two's complement bits (the highest bit is the sign).
pub fn bits_to_word(bits: &[bool]) -> i64 {
    assert!(!bits.is_empty() && bits.len() <= 32);
    let mut u: i64 = 0;
    for (k, &bit) in bits.iter().enumerate() {
        if bit {
            u |= 1 << k;
        }
    }
    wrap(u, bits.len())
}

/// Flatten words into an LSB-first bit stream at `width`.
pub fn words_to_bits(words: &[i64], width: usize) -> Vec<bool> {
    words
        .iter()
        .flat_map(|&w| word_to_bits(w, width))
        .collect()
}

/// Group a bit stream back into words; a trailing partial word is
/// discarded.
pub fn bits_to_words(bits: &[bool], width: usize) -> Vec<i64> {
    bits.chunks_exact(width).map(bits_to_word).collect()
}
