//! Dual-rail layer tests: encoding, word codecs, the wire loopback
//! handshake, the protocol monitor, and stimulus parsing.

use flysig::dualrail::{
    bits_to_word, bits_to_words, monitor_channel, parse_stimulus, rail_state, word_to_bits,
    words_to_bits, wrap, Channel, Consumer, Producer, RailState, StimulusError, ViolationKind,
};
use flysig::kernel::{DelayModel, NetlistBuilder, Ps, Simulation};

const NS: Ps = 1_000;

#[test]
fn rail_encoding_table() {
    assert_eq!(rail_state(false, false), RailState::Empty);
    assert_eq!(rail_state(true, false), RailState::True);
    assert_eq!(rail_state(false, true), RailState::False);
    assert_eq!(rail_state(true, true), RailState::Illegal);
    assert_eq!(RailState::True.codeword(), Some(true));
    assert_eq!(RailState::False.codeword(), Some(false));
    assert_eq!(RailState::Empty.codeword(), None);
    assert_eq!(RailState::Illegal.codeword(), None);
}

#[test]
fn word_codec_roundtrip() {
    // -3 at width 4 is 1101b; LSB first: [1,0,1,1].
    assert_eq!(word_to_bits(-3, 4), vec![true, false, true, true]);
    assert_eq!(bits_to_word(&[true, false, true, true]), -3);

    assert_eq!(wrap(130, 8), -126);
    assert_eq!(wrap(-129, 8), 127);
    assert_eq!(wrap(255, 8), -1);
    assert_eq!(wrap(-1, 8), -1);

    for w in [4usize, 8, 16] {
        for v in [-7i64, -1, 0, 1, 5, 100, -100] {
            let canon = wrap(v, w);
            assert_eq!(bits_to_word(&word_to_bits(v, w)), canon);
        }
    }

    let words = [3i64, -4, 7, 0];
    assert_eq!(bits_to_words(&words_to_bits(&words, 8), 8), words);
}

/// Producer and consumer wired back to back with no gates between them:
/// the complete four-phase handshake over a plain wire. Values arrive in
/// order, the protocol is clean, and the run goes quiescent.
#[test]
fn wire_loopback_handshake() {
    let mut b = NetlistBuilder::new();
    let ch = Channel::new(&mut b, "ch");
    ch.claim_producer(&mut b);
    ch.claim_consumer(&mut b);
    let n = b.finalize().unwrap();

    let bits = vec![true, false, true, true, false];
    let mut sim = Simulation::new(&n, &DelayModel::fixed_default()).unwrap();
    let (p, ph) = Producer::new(ch.clone(), bits.clone());
    sim.add_process(p, &Producer::watch(&ch));
    let (c, chh) = Consumer::new(ch.clone());
    sim.add_process(c, &Consumer::watch(&ch));
    let trace = sim.run(100 * NS);

    assert!(ph.is_done());
    assert_eq!(ph.completed(), 5);
    assert_eq!(chh.bits(), bits);
    assert!(trace.is_quiescent());

    let report = monitor_channel(&trace, &ch, "ch");
    assert!(report.is_clean(), "violations: {:?}", report.violations);
    assert_eq!(report.bits(), bits);
}

/// A throttled consumer slows the handshake but not its outcome.
#[test]
fn throttled_consumer_preserves_values() {
    let mut b = NetlistBuilder::new();
    let ch = Channel::new(&mut b, "ch");
    ch.claim_producer(&mut b);
    ch.claim_consumer(&mut b);
    let n = b.finalize().unwrap();

    let bits = vec![true, true, false, true];
    let mut sim = Simulation::new(&n, &DelayModel::fixed_default()).unwrap();
    let (p, ph) = Producer::new(ch.clone(), bits.clone());
    sim.add_process(p, &Producer::watch(&ch));
    let (c, chh) = Consumer::with_ack_delay(ch.clone(), 3 * NS);
    sim.add_process(c, &Consumer::watch(&ch));
    let trace = sim.run(200 * NS);

    assert!(ph.is_done());
    assert_eq!(chh.bits(), bits);
    let report = monitor_channel(&trace, &ch, "ch");
    assert!(report.is_clean(), "violations: {:?}", report.violations);
    // Four handshakes, each two ack edges of 3 ns: at least 24 ns.
    assert!(trace.quiescent_at.unwrap() >= 24 * NS);
}

/// Drive protocol violations by hand and check each classification.
#[test]
fn monitor_flags_violations() {
    let build = || {
        let mut b = NetlistBuilder::new();
        let ch = Channel::new(&mut b, "ch");
        ch.claim_producer(&mut b);
        ch.claim_consumer(&mut b);
        (b.finalize().unwrap(), ch)
    };
    let model = DelayModel::fixed_default();

    // Both rails high.
    let (n, ch) = build();
    let trace = flysig::kernel::simulate(
        &n,
        &model,
        &[(1 * NS, ch.t, true), (2 * NS, ch.f, true)],
        10 * NS,
    )
    .unwrap();
    let rep = monitor_channel(&trace, &ch, "ch");
    assert_eq!(rep.violations.len(), 1);
    assert_eq!(rep.violations[0].kind, ViolationKind::BothRailsHigh);
    assert_eq!(rep.violations[0].time, 2 * NS);

    // Codeword replaced by its opposite in one timestamp: no spacer.
    let (n, ch) = build();
    let trace = flysig::kernel::simulate(
        &n,
        &model,
        &[
            (1 * NS, ch.t, true),
            (5 * NS, ch.t, false),
            (5 * NS, ch.f, true),
        ],
        10 * NS,
    )
    .unwrap();
    let rep = monitor_channel(&trace, &ch, "ch");
    assert!(rep
        .violations
        .iter()
        .any(|v| v.kind == ViolationKind::MissingSpacer && v.time == 5 * NS));
    // Both codewords were still seen.
    assert_eq!(rep.bits(), vec![true, false]);

    // Acknowledge rises on an empty channel.
    let (n, ch) = build();
    let trace =
        flysig::kernel::simulate(&n, &model, &[(3 * NS, ch.ack, true)], 10 * NS).unwrap();
    let rep = monitor_channel(&trace, &ch, "ch");
    assert_eq!(rep.violations.len(), 1);
    assert_eq!(rep.violations[0].kind, ViolationKind::AckBeforeData);

    // Next codeword issued while the acknowledge is still high.
    let (n, ch) = build();
    let trace = flysig::kernel::simulate(
        &n,
        &model,
        &[
            (1 * NS, ch.t, true),
            (2 * NS, ch.ack, true),
            (3 * NS, ch.t, false),
            (4 * NS, ch.f, true), // ack never fell
        ],
        10 * NS,
    )
    .unwrap();
    let rep = monitor_channel(&trace, &ch, "ch");
    assert!(rep
        .violations
        .iter()
        .any(|v| v.kind == ViolationKind::AckHeldOverSpacer && v.time == 4 * NS));

    // A clean complete handshake has no violations.
    let (n, ch) = build();
    let trace = flysig::kernel::simulate(
        &n,
        &model,
        &[
            (1 * NS, ch.t, true),
            (2 * NS, ch.ack, true),
            (3 * NS, ch.t, false),
            (4 * NS, ch.ack, false),
            (5 * NS, ch.f, true),
            (6 * NS, ch.ack, true),
            (7 * NS, ch.f, false),
            (8 * NS, ch.ack, false),
        ],
        10 * NS,
    )
    .unwrap();
    let rep = monitor_channel(&trace, &ch, "ch");
    assert!(rep.is_clean());
    assert_eq!(rep.bits(), vec![true, false]);
}

#[test]
fn stimulus_parsing() {
    let rows = parse_stimulus("# two ports\n 1 -2\n3 4\n\n-5 6 # trailing\n").unwrap();
    assert_eq!(rows, vec![vec![1, -2], vec![3, 4], vec![-5, 6]]);

    assert!(matches!(
        parse_stimulus("1\nx\n"),
        Err(StimulusError::BadValue { line: 2, .. })
    ));
    assert!(matches!(
        parse_stimulus("1 2\n3\n"),
        Err(StimulusError::RaggedRow { line: 2, .. })
    ));
    assert!(matches!(
        parse_stimulus("# nothing\n"),
        Err(StimulusError::Empty)
    ));
}
