//! Operator library semantics: every gate-level fragment is driven
//! through full four-phase handshakes and checked against hand-derived
//! expectations and its behavioral stream model.

use flysig::dualrail::{bits_to_words, words_to_bits, wrap};
use flysig::kernel::DelayModel;
use flysig::oplib::{
    behavioral::behavioral, characterize, resource_report, run_operator, OperatorKind,
    OperatorRun, RegisterInit,
};

const T_MAX: u64 = 400_000_000;

fn run_clean(kind: &OperatorKind, inputs: &[Vec<bool>]) -> OperatorRun {
    let run = run_operator(kind, inputs, &DelayModel::fixed_default(), T_MAX);
    assert!(
        run.all_clean(),
        "protocol violations on {kind:?}: {}",
        run.violation_summary()
    );
    run
}

fn bits(s: &[u8]) -> Vec<bool> {
    s.iter().map(|&b| b != 0).collect()
}

#[test]
fn register_passes_stream_through_empty_stage() {
    let kind = OperatorKind::Register(RegisterInit::Empty);
    let input = bits(&[1, 0, 1, 1]);
    let run = run_clean(&kind, &[input.clone()]);
    assert_eq!(run.outputs[0], input);
    assert!(run.producers_done[0]);
    assert!(run.quiescent);
}

#[test]
fn initialized_register_prepends_its_power_up_token() {
    let zero = run_clean(&OperatorKind::Register(RegisterInit::Zero), &[bits(&[1])]);
    assert_eq!(zero.outputs[0], bits(&[0, 1]));

    let one = run_clean(&OperatorKind::Register(RegisterInit::One), &[bits(&[0])]);
    assert_eq!(one.outputs[0], bits(&[1, 0]));
}

#[test]
fn shift_register_emits_stored_tokens_output_end_first() {
    // Two zero-initialized stages hold the word 0; the stream follows.
    let kind = OperatorKind::ShiftRegister(vec![RegisterInit::Zero, RegisterInit::Zero]);
    let run = run_clean(&kind, &[bits(&[1, 1])]);
    assert_eq!(run.outputs[0], bits(&[0, 0, 1, 1]));

    // Mixed initialization: the stage nearest the output leaves first.
    let kind = OperatorKind::ShiftRegister(vec![RegisterInit::Zero, RegisterInit::One]);
    let run = run_clean(&kind, &[bits(&[1, 0])]);
    assert_eq!(run.outputs[0], bits(&[1, 0, 1, 0]));
}

#[test]
fn fork_duplicates_every_token() {
    let input = bits(&[1, 0, 1]);
    let run = run_clean(&OperatorKind::Fork2, &[input.clone()]);
    assert_eq!(run.outputs[0], input);
    assert_eq!(run.outputs[1], input);
    assert!(run.quiescent);
}

#[test]
fn join_synchronizes_both_streams() {
    let a = bits(&[1, 0]);
    let b = bits(&[0, 0]);
    let run = run_clean(&OperatorKind::Join2, &[a.clone(), b.clone()]);
    assert_eq!(run.outputs[0], a);
    assert_eq!(run.outputs[1], b);
}

#[test]
fn rselect_steers_by_select_and_never_acks_the_unselected_port() {
    // sel TRUE reads port a, FALSE reads port b.
    let sel = bits(&[1, 0, 1]);
    let a = bits(&[1, 0, 1]); // third token stays pending
    let b = bits(&[1]);
    let run = run_clean(&OperatorKind::RSelect, &[sel, a, b]);
    assert_eq!(run.outputs[0], bits(&[1, 1, 0]));
    assert!(run.producers_done[0], "all selects consumed");
    assert!(
        !run.producers_done[1],
        "unselected third token on port a must stay pending, unacknowledged"
    );
    assert!(run.producers_done[2]);
    assert!(run.quiescent);
}

#[test]
fn wselect_partitions_the_stream_by_select() {
    let sel = bits(&[1, 1, 0, 1]);
    let input = bits(&[1, 0, 1, 1]);
    let run = run_clean(&OperatorKind::WSelect, &[sel, input]);
    assert_eq!(run.outputs[0], bits(&[1, 0, 1]), "TRUE branch");
    assert_eq!(run.outputs[1], bits(&[1]), "FALSE branch");
    assert!(run.quiescent);
}

/// All eight input combinations of a full adder, LSB-first in (a, b, cin)
/// index order; sum and carry columns written out by hand.
fn adder_truth_table() -> ([Vec<bool>; 3], Vec<bool>, Vec<bool>) {
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut c = Vec::new();
    for i in 0..8u8 {
        a.push(i & 4 != 0);
        b.push(i & 2 != 0);
        c.push(i & 1 != 0);
    }
    let sum = bits(&[0, 1, 1, 0, 1, 0, 0, 1]);
    let cout = bits(&[0, 0, 0, 1, 0, 1, 1, 1]);
    ([a, b, c], sum, cout)
}

#[test]
fn both_adders_implement_the_full_adder_truth_table() {
    let (inputs, sum, cout) = adder_truth_table();
    for kind in [OperatorKind::DimsAdder, OperatorKind::DualRailAdder] {
        let run = run_clean(&kind, &inputs);
        assert_eq!(run.outputs[0], sum, "{kind:?} sum");
        assert_eq!(run.outputs[1], cout, "{kind:?} carry");
        assert_eq!(
            run.outputs,
            behavioral(&kind, &inputs, 0),
            "{kind:?} behavioral model"
        );
        assert!(run.quiescent);
    }
}

#[test]
fn complete_dual_rail_adder_eliminates_the_dims_minterm_plane() {
    let dims = resource_report(&OperatorKind::DimsAdder);
    let dr = resource_report(&OperatorKind::DualRailAdder);
    assert_eq!(dims.c_gates, 9, "8 minterm C3 gates plus the ack join");
    assert_eq!(dr.c_gates, 1, "only the ack join remains");
    assert!(dr.c_gates < dims.c_gates);
    assert_eq!(dims.total_gates, 18);
    assert_eq!(dr.total_gates, 22);
}

#[test]
fn serial_adder_adds_word_streams_lsb_first() {
    let width = 8;
    let a = [5i64, -3, 100, -128, 127];
    let b = [-3i64, -3, 27, -128, 1];
    let expected: Vec<i64> = a.iter().zip(&b).map(|(x, y)| wrap(x + y, width)).collect();
    assert_eq!(expected, vec![2, -6, 127, 0, -128]);

    let kind = OperatorKind::SerialAdder { width };
    let inputs = [words_to_bits(&a, width), words_to_bits(&b, width)];
    let run = run_clean(&kind, &inputs);
    assert_eq!(bits_to_words(&run.outputs[0], width), expected);
    assert!(run.quiescent);
    assert_eq!(run.outputs, behavioral(&kind, &inputs, 0));
}

#[test]
fn serial_adder_handles_wider_frames() {
    let width = 16;
    let a = [1000i64, -20000];
    let b = [2345i64, -20000];
    let expected: Vec<i64> = a.iter().zip(&b).map(|(x, y)| wrap(x + y, width)).collect();
    assert_eq!(expected, vec![3345, 25536]);

    let kind = OperatorKind::SerialAdder { width };
    let inputs = [words_to_bits(&a, width), words_to_bits(&b, width)];
    let run = run_clean(&kind, &inputs);
    assert_eq!(bits_to_words(&run.outputs[0], width), expected);
}

#[test]
fn frame_gated_delay_shifts_bits_within_each_frame() {
    // Width-4 frames: each output frame is (input << 1) | init, the
    // frame's top bit is discarded, and completing a frame releases the
    // next frame's injected initial bit.
    let kind = OperatorKind::FrameGatedDelay {
        width: 4,
        init: false,
    };
    let input = bits(&[1, 0, 1, 0, 1, 1, 0, 0]); // words 5, 3 LSB first
    let run = run_clean(&kind, &[input.clone()]);
    assert_eq!(run.outputs[0], bits(&[0, 1, 0, 1, 0, 1, 1, 0, 0]));
    assert_eq!(run.outputs, behavioral(&kind, &[input], 0));
    // Word view: (5 << 1) wraps to -6, (3 << 1) is 6 in 4-bit two's complement.
    assert_eq!(bits_to_words(&run.outputs[0][..8], 4), vec![-6, 6]);
    assert!(run.quiescent);
}

#[test]
fn const_ring_emits_its_pattern_cyclically() {
    let kind = OperatorKind::ConstRing {
        bits: bits(&[1, 0, 0]),
    };
    let run = run_operator(&kind, &[], &DelayModel::fixed_default(), 3_000_000);
    assert!(run.all_clean(), "{}", run.violation_summary());
    let got = &run.outputs[0];
    assert!(got.len() >= 9, "ring should keep emitting, got {}", got.len());
    for (k, &bit) in got.iter().enumerate() {
        assert_eq!(bit, [true, false, false][k % 3], "token {k}");
    }
}

#[test]
fn behavioral_models_match_gates_on_random_streams() {
    use rand::{Rng, SeedableRng};
    let kinds = [
        OperatorKind::Register(RegisterInit::Empty),
        OperatorKind::Register(RegisterInit::One),
        OperatorKind::ShiftRegister(vec![
            RegisterInit::One,
            RegisterInit::Zero,
            RegisterInit::Zero,
        ]),
        OperatorKind::Fork2,
        OperatorKind::Join2,
        OperatorKind::RSelect,
        OperatorKind::WSelect,
        OperatorKind::DimsAdder,
        OperatorKind::DualRailAdder,
        OperatorKind::FrameGatedDelay {
            width: 4,
            init: true,
        },
        OperatorKind::SerialAdder { width: 8 },
    ];
    for (i, kind) in kinds.iter().enumerate() {
        for seed in 0..6u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed * 100 + i as u64);
            let n_in = kind.port_names().0.len();
            let len = rng.gen_range(8..=16);
            let inputs: Vec<Vec<bool>> = (0..n_in)
                .map(|_| (0..len).map(|_| rng.gen_bool(0.5)).collect())
                .collect();
            let run = run_clean(kind, &inputs);
            let expected = behavioral(kind, &inputs, 0);
            assert_eq!(
                run.outputs, expected,
                "{kind:?} diverged from behavioral model (seed {seed})"
            );
        }
    }
}

#[test]
fn characterization_is_deterministic_and_positive() {
    let kind = OperatorKind::SerialAdder { width: 8 };
    let model = DelayModel::fixed_default();
    let c1 = characterize(&kind, &model, 32);
    let c2 = characterize(&kind, &model, 32);
    assert!(c1.forward_latency > 0);
    assert!(c1.cycle_time > 0);
    assert_eq!(c1.forward_latency, c2.forward_latency);
    assert_eq!(c1.cycle_time, c2.cycle_time);
    assert_eq!(c1.tokens, 32);
}
