//! Gate-level processor simulation: full elaboration to a dual-rail
//! netlist, cross-checked against the token level and against the ring
//! occupancy law (the zero-bubble accumulator must deadlock physically,
//! not just in the static analysis).

use flysig::kernel::{ns_to_ps, DelayModel, DelayTable};
use flysig::processor::{
    simulate_processor, validate, Level, Machine, ProcessorConfig, RunError, RunReport,
};

fn fixed() -> DelayModel {
    DelayModel::Fixed(DelayTable::builtin())
}

fn machine(text: &str) -> Machine {
    validate(&ProcessorConfig::parse(text).expect("parse"))
        .expect("validate")
        .0
}

fn run(m: &Machine, inputs: &[Vec<i64>], level: Level, model: &DelayModel) -> RunReport {
    simulate_processor(m, inputs, level, model, ns_to_ps(200_000.0)).expect("simulate")
}

fn accumulator(bubbles: u32) -> String {
    format!(
        "proc acc width=8 mode=prototype\n\
         [OPERATORS]\n\
         a1 add\n\
         r1 reg\n\
         [ROUTING]\n\
         0 inst=a1 src=IN[0],1 dst=1\n\
         1 inst=r1 src=0 dst=0,OUT[0]\n\
         [MEMORY]\n\
         1 token op=1 valid=1 guard=11 operands=0\n\
         [LINKS]\n\
         0 1 bubbles={bubbles}\n\
         1 0 bubbles={bubbles}\n"
    )
}

/// Deterministic test-vector stream.
fn samples(seed: u64, n: usize, width: usize) -> Vec<i64> {
    let mut x = seed.wrapping_mul(0x9e3779b97f4a7c15) | 1;
    (0..n)
        .map(|_| {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            let span = 1i64 << width;
            (x as i64).rem_euclid(span) - span / 2
        })
        .collect()
}

#[test]
fn gate_identity_config_is_a_passthrough() {
    let m = machine(
        "proc ident width=8\n[OPERATORS]\nr1 reg\n[ROUTING]\n0 inst=r1 src=IN[0] dst=OUT[0]\n",
    );
    let report = run(&m, &[vec![3, 1, 4]], Level::Gate, &fixed());
    assert_eq!(report.outputs, vec![vec![3, 1, 4]]);
    assert!(!report.deadlock, "{:?}", report.error);
    assert!(report.latency_ps.unwrap() > 0);
}

#[test]
fn gate_single_adder_matches_wrapped_sum() {
    let m = machine(
        "proc add width=8\n[OPERATORS]\na add\n[ROUTING]\n0 inst=a src=IN[0],IN[1] dst=OUT[0]\n",
    );
    let a = vec![3, 100, -100, 127];
    let b = vec![5, 50, -100, 1];
    let report = run(&m, &[a.clone(), b.clone()], Level::Gate, &fixed());
    let expect: Vec<i64> = a
        .iter()
        .zip(&b)
        .map(|(&x, &y)| ((x + y + 128).rem_euclid(256)) - 128)
        .collect();
    assert_eq!(report.outputs, vec![expect]);
}

#[test]
fn gate_sub_shl_const_values_match_token_level() {
    for text in [
        "proc s width=8\n[OPERATORS]\ns1 sub\n[ROUTING]\n0 inst=s1 src=IN[0],IN[1] dst=OUT[0]\n",
        "proc sh width=8\n[OPERATORS]\nh shl amount=3\n[ROUTING]\n0 inst=h src=IN[0] dst=OUT[0]\n",
        "proc k width=8\n[OPERATORS]\nk7 const value=-9\na1 add\n[ROUTING]\n\
         0 inst=k7 dst=1\n1 inst=a1 src=IN[0],0 dst=OUT[0]\n",
    ] {
        let m = machine(text);
        let ins: Vec<Vec<i64>> = (0..m.n_inputs).map(|k| samples(40 + k as u64, 5, 8)).collect();
        let gate = run(&m, &ins, Level::Gate, &fixed());
        let token = run(&m, &ins, Level::Token, &fixed());
        assert!(!gate.deadlock, "{}: {:?}", m.name, gate.error);
        assert_eq!(
            gate.outputs, token.outputs,
            "gate/token divergence on {}",
            m.name
        );
    }
}

#[test]
fn gate_repeated_add_chain_with_fanout() {
    let m = machine(
        "proc axxx width=8\n\
         [OPERATORS]\na1 add\na2 add\na3 add\n\
         [ROUTING]\n\
         0 inst=a1 src=IN[0],IN[1] dst=1\n\
         1 inst=a2 src=0,IN[1] dst=2\n\
         2 inst=a3 src=1,IN[1] dst=OUT[0]\n",
    );
    let report = run(&m, &[vec![2], vec![5]], Level::Gate, &fixed());
    assert_eq!(report.outputs, vec![vec![17]]);
}

#[test]
fn gate_accumulator_streams_prefix_sums() {
    let m = machine(&accumulator(1));
    let report = run(&m, &[vec![1, 2, 3, 4, 5]], Level::Gate, &fixed());
    assert_eq!(report.outputs, vec![vec![0, 1, 3, 6, 10, 15]]);
    assert!(!report.deadlock, "{:?}", report.error);
    assert!(report.throughput_per_ns > 0.0);
}

#[test]
fn gate_zero_bubble_ring_deadlocks_physically() {
    // The static law says 16 places / 8 tokens cannot circulate. The
    // netlist must agree: the run goes quiescent with the input stream
    // stuck, before the full output sequence appears.
    let m = machine(&accumulator(0));
    assert!(m.predicted_deadlock());
    let report = run(&m, &[vec![1, 2, 3]], Level::Gate, &fixed());
    assert!(report.deadlock, "zero-bubble ring must stall the netlist");
    assert!(matches!(report.error, Some(RunError::Deadlock(_))));
    assert!(
        report.outputs[0].len() < 4,
        "only a prefix may escape, got {:?}",
        report.outputs[0]
    );
    // Whatever did escape is a prefix of the live sequence.
    let live = [0i64, 1, 3, 6];
    assert_eq!(report.outputs[0], live[..report.outputs[0].len()]);
}

#[test]
fn gate_one_bubble_is_the_liveness_boundary() {
    // The accumulator ring holds 16 places / 8 tokens with cell-less
    // links (b = 0): one place short of 2T+1, so it must wedge. One
    // cell per link (b = 1) restores circulation. This pins the static
    // law to the physical behavior on both sides of the boundary.
    for (bubbles, expect_live) in [(0u32, false), (1u32, true)] {
        let m = machine(&accumulator(bubbles));
        assert_eq!(m.predicted_deadlock(), !expect_live);
        let report = run(&m, &[vec![7, 7]], Level::Gate, &fixed());
        assert_eq!(
            !report.deadlock, expect_live,
            "bubbles={bubbles} must be {}",
            if expect_live { "live" } else { "dead" }
        );
    }
}

#[test]
fn gate_token_equivalence_on_random_streams() {
    let m = machine(&accumulator(1));
    for seed in 0..4u64 {
        let ins = vec![samples(seed, 6, 8)];
        let gate = run(&m, &ins, Level::Gate, &fixed());
        let token = run(&m, &ins, Level::Token, &fixed());
        assert!(!gate.deadlock, "seed {seed}: {:?}", gate.error);
        assert_eq!(gate.outputs, token.outputs, "seed {seed}");
    }
}

#[test]
fn gate_outputs_invariant_across_random_delay_seeds() {
    // Delay-insensitivity at processor scope: decoded output words do
    // not depend on the delay assignment.
    let m = machine(&accumulator(1));
    let ins = vec![samples(99, 5, 8)];
    let reference = run(&m, &ins, Level::Gate, &fixed());
    assert!(!reference.deadlock);
    for seed in 1..=10u64 {
        let jittered = run(
            &m,
            &ins,
            Level::Gate,
            &DelayModel::Randomized {
                min_ps: 40,
                max_ps: 900,
                seed,
            },
        );
        assert_eq!(
            jittered.outputs, reference.outputs,
            "outputs changed under delay seed {seed}"
        );
    }
}
