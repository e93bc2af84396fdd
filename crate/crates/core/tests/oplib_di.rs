//! Delay-insensitivity property: every operator must produce the same
//! output streams, with a clean four-phase protocol on every port, under
//! arbitrary per-gate delays. Each operator runs once with the fixed
//! nominal delay table as reference, then across a batch of seeds with
//! every gate delay drawn independently at random.

use flysig::kernel::DelayModel;
use flysig::oplib::{run_operator, run_operator_stretched, OperatorKind, RegisterInit};

const T_MAX: u64 = 800_000_000;
const TRIALS: u64 = 20;

fn alternating(n: usize) -> Vec<bool> {
    (0..n).map(|k| k % 2 == 0).collect()
}

fn di_check(kind: OperatorKind, inputs: Vec<Vec<bool>>) {
    let reference = run_operator(&kind, &inputs, &DelayModel::fixed_default(), T_MAX);
    assert!(
        reference.all_clean(),
        "{kind:?} reference run: {}",
        reference.violation_summary()
    );
    assert!(reference.quiescent, "{kind:?} reference must quiesce");

    for seed in 0..TRIALS {
        let model = DelayModel::randomized(seed);
        let run = run_operator(&kind, &inputs, &model, T_MAX);
        assert!(
            run.all_clean(),
            "{kind:?} seed {seed}: {}",
            run.violation_summary()
        );
        assert!(run.quiescent, "{kind:?} seed {seed} must quiesce");
        assert_eq!(
            run.outputs, reference.outputs,
            "{kind:?} seed {seed}: outputs changed under randomized delays"
        );
        assert_eq!(
            run.producers_done, reference.producers_done,
            "{kind:?} seed {seed}: consumption pattern changed"
        );
    }
}

#[test]
fn register_is_delay_insensitive() {
    di_check(
        OperatorKind::Register(RegisterInit::Zero),
        vec![alternating(10)],
    );
}

#[test]
fn shift_register_is_delay_insensitive() {
    di_check(
        OperatorKind::ShiftRegister(vec![RegisterInit::One, RegisterInit::Zero]),
        vec![alternating(8)],
    );
}

#[test]
fn fork_is_delay_insensitive() {
    di_check(OperatorKind::Fork2, vec![alternating(8)]);
}

#[test]
fn join_is_delay_insensitive() {
    di_check(OperatorKind::Join2, vec![alternating(8), alternating(8)]);
}

#[test]
fn rselect_is_delay_insensitive() {
    let sel = vec![true, false, true, true, false, false, true, false];
    di_check(OperatorKind::RSelect, vec![sel, alternating(6), alternating(6)]);
}

#[test]
fn wselect_is_delay_insensitive() {
    let sel = vec![true, false, true, true, false, false, true, false];
    di_check(OperatorKind::WSelect, vec![sel, alternating(8)]);
}

#[test]
fn dims_adder_is_delay_insensitive() {
    di_check(
        OperatorKind::DimsAdder,
        vec![alternating(8), alternating(8), alternating(8)],
    );
}

/// The complete dual-rail adder is specified for bounded delay jitter
/// (its AND-plane return-to-zero is unindicated): within a ±25% band it
/// must behave identically across seeds and keep the protocol clean.
#[test]
fn dual_rail_adder_holds_under_bounded_jitter() {
    let kind = OperatorKind::DualRailAdder;
    let inputs = vec![alternating(8), alternating(8), alternating(8)];
    let reference = run_operator(&kind, &inputs, &DelayModel::fixed_default(), T_MAX);
    assert!(reference.all_clean());
    for seed in 0..TRIALS {
        let model = DelayModel::Randomized {
            min_ps: 400,
            max_ps: 650,
            seed,
        };
        let run = run_operator(&kind, &inputs, &model, T_MAX);
        assert!(run.all_clean(), "seed {seed}: {}", run.violation_summary());
        assert!(run.quiescent, "seed {seed}");
        assert_eq!(run.outputs, reference.outputs, "seed {seed}");
    }
}

/// Negative control: stretching one gate is the canonical adversarial
/// delay experiment, and a single misbehaving stretch refutes a DI
/// claim. The cheap adder's weak spot is its operand pair plane: after
/// a (1,1,0) token retires, the pair term `p11` falls unobserved by any
/// output (an orphan). Stretch that one fall past the handshake's
/// re-arm time and the next token's carry rail conjures a spurious
/// minterm from stale operands. The same stretch on the DIMS adder
/// merely stalls the handshake, because every C-element transition is
/// acknowledged before the next token may enter.
#[test]
fn a_single_stretched_gate_defeats_the_dual_rail_adder() {
    // (a,b,cin) = (1,1,0) then (0,0,1), repeated: each boundary retires
    // p11 while handing the next token a raised carry rail.
    let n = 12usize;
    let a: Vec<bool> = (0..n).map(|k| k % 2 == 0).collect();
    let cin: Vec<bool> = (0..n).map(|k| k % 2 == 1).collect();
    let inputs = vec![a.clone(), a, cin];
    let stretch: &[(&str, u64)] = &[("op.p11", 20_000)];

    let kind = OperatorKind::DualRailAdder;
    let reference = run_operator(&kind, &inputs, &DelayModel::fixed_default(), T_MAX);
    assert!(reference.all_clean(), "{}", reference.violation_summary());
    let run = run_operator_stretched(&kind, &inputs, &DelayModel::fixed_default(), T_MAX, stretch);
    assert!(
        !run.all_clean() || run.outputs != reference.outputs,
        "expected the stretched pair gate to corrupt the minterm adder"
    );

    // Contrast: the fully indicated adder tolerates the analogous
    // stretch (its slowest comparable gate is the C-element minterm).
    let kind = OperatorKind::DimsAdder;
    let reference = run_operator(&kind, &inputs, &DelayModel::fixed_default(), T_MAX);
    assert!(reference.all_clean(), "{}", reference.violation_summary());
    let run = run_operator_stretched(
        &kind,
        &inputs,
        &DelayModel::fixed_default(),
        T_MAX,
        &[("op.m110", 20_000)],
    );
    assert!(run.all_clean(), "{}", run.violation_summary());
    assert!(run.quiescent);
    assert_eq!(run.outputs, reference.outputs);
}

#[test]
fn frame_gated_delay_is_delay_insensitive() {
    di_check(
        OperatorKind::FrameGatedDelay {
            width: 4,
            init: false,
        },
        vec![alternating(12)],
    );
}

#[test]
fn serial_adder_is_delay_insensitive() {
    di_check(
        OperatorKind::SerialAdder { width: 8 },
        vec![alternating(16), alternating(16)],
    );
}
