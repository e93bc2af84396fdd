//! Kernel-level tests: timing, C-element semantics, reset settling,
//! oscillation, determinism, and structural validation.

use flysig::kernel::{
    deadlock_check, simulate, DelayModel, DelayTable, DelayTableError, GateKind, Liveness,
    NetlistBuilder, NetlistError, Ps, Simulation,
};

const NS: Ps = 1_000;

/// A single 1 ns buffer: input rises at 5 ns, output must rise at exactly
/// 6 ns; falls track the same delay.
#[test]
fn buf_propagation_delay() {
    let mut b = NetlistBuilder::new();
    let a = b.input("a");
    let y = b.net("y");
    let g = b.gate(GateKind::Buf, &[a], y);
    b.set_delay(g, NS);
    let n = b.finalize().unwrap();

    let trace = simulate(
        &n,
        &DelayModel::fixed_default(),
        &[(5 * NS, a, true), (9 * NS, a, false)],
        20 * NS,
    )
    .unwrap();

    let ys: Vec<_> = trace.events_on(y).map(|e| (e.time, e.value)).collect();
    assert_eq!(ys, vec![(6 * NS, true), (10 * NS, false)]);
    assert_eq!(trace.quiescent_at, Some(10 * NS));
}

/// C-element truth table: rises only when both inputs are high, falls only
/// when both are low, holds otherwise.
#[test]
fn c_element_hold_semantics() {
    let mut b = NetlistBuilder::new();
    let a = b.input("a");
    let c = b.input("c");
    let y = b.net("y");
    let g = b.gate(GateKind::CElement, &[a, c], y);
    b.set_delay(g, NS);
    let n = b.finalize().unwrap();

    // a rises (hold 0), c rises (both high -> 1), a falls (hold 1),
    // c falls (both low -> 0).
    let trace = simulate(
        &n,
        &DelayModel::fixed_default(),
        &[
            (1 * NS, a, true),
            (3 * NS, c, true),
            (5 * NS, a, false),
            (7 * NS, c, false),
        ],
        20 * NS,
    )
    .unwrap();
    let ys: Vec<_> = trace.events_on(y).map(|e| (e.time, e.value)).collect();
    assert_eq!(ys, vec![(4 * NS, true), (8 * NS, false)]);
}

/// A preset C-element with mixed inputs holds its power-up token.
#[test]
fn preset_c_element_holds_token() {
    let mut b = NetlistBuilder::new();
    let hi = b.tie_high("hi");
    let lo = b.input("lo");
    let y = b.net("y");
    let g = b.gate(GateKind::CElement, &[lo, hi], y);
    b.preset(g);
    let n = b.finalize().unwrap();

    let trace = simulate(&n, &DelayModel::fixed_default(), &[], 10 * NS).unwrap();
    assert!(trace.initial_value(y), "power-up token present at t=0");
    assert!(trace.final_value(y), "mixed inputs hold the token");
    assert_eq!(trace.events_on(y).count(), 0);
}

/// A preset C-element whose inputs are both low at release drains: the
/// all-low input state forces the output low after one gate delay.
#[test]
fn unsupported_preset_drains_at_release() {
    let mut b = NetlistBuilder::new();
    let a = b.input("a");
    let c = b.input("c");
    let y = b.net("y");
    let g = b.gate(GateKind::CElement, &[a, c], y);
    b.preset(g);
    b.set_delay(g, NS);
    let n = b.finalize().unwrap();

    let trace = simulate(&n, &DelayModel::fixed_default(), &[], 10 * NS).unwrap();
    assert!(trace.initial_value(y));
    let ys: Vec<_> = trace.events_on(y).map(|e| (e.time, e.value)).collect();
    assert_eq!(ys, vec![(NS, false)]);
}

/// Cross-coupled NOR pair with equal 1 ns delays. Hand-derived schedule:
/// the reset relaxation cannot settle it (it is genuinely unstable), both
/// gates fire at release, and the pair oscillates with a 2 ns period —
/// four events per period, never quiescent.
#[test]
fn nor_pair_oscillates() {
    let mut b = NetlistBuilder::new();
    let n1 = b.net("n1");
    let n2 = b.net("n2");
    let g1 = b.gate(GateKind::Nor2, &[n2, n2], n1);
    let g2 = b.gate(GateKind::Nor2, &[n1, n1], n2);
    b.set_delay(g1, NS);
    b.set_delay(g2, NS);
    let n = b.finalize().unwrap();

    let trace = simulate(&n, &DelayModel::fixed_default(), &[], 10 * NS).unwrap();
    assert_eq!(trace.quiescent_at, None, "oscillation persists at horizon");
    assert!(!trace.livelock, "nonzero delays: not a zero-delay livelock");

    let n1_events: Vec<_> = trace.events_on(n1).map(|e| (e.time, e.value)).collect();
    let expected: Vec<_> = (1..=10)
        .map(|k| (k as Ps * NS, k % 2 == 1))
        .collect();
    assert_eq!(n1_events, expected);
    assert_eq!(trace.rises_on(n1), 5);
    assert_eq!(trace.rises_on(n2), 5);
}

/// A zero-delay unstable loop must be reported as livelock, not hang.
#[test]
fn zero_delay_livelock_is_detected() {
    let mut b = NetlistBuilder::new();
    let n1 = b.net("n1");
    let g = b.gate(GateKind::Nor2, &[n1, n1], n1);
    b.set_delay(g, 0);
    let n = b.finalize().unwrap();

    let trace = simulate(&n, &DelayModel::fixed_default(), &[], 10 * NS).unwrap();
    assert!(trace.livelock);
    assert_eq!(trace.quiescent_at, None);
}

/// Identical inputs produce bit-identical traces, for both fixed and
/// seeded-random delay models; a different seed gives a different delay
/// assignment.
#[test]
fn deterministic_replay() {
    let mut b = NetlistBuilder::new();
    let a = b.input("a");
    let c = b.input("c");
    let x = b.net("x");
    let y = b.net("y");
    let z = b.net("z");
    b.gate(GateKind::Or2, &[a, c], x);
    b.gate(GateKind::CElement, &[x, c], y);
    b.gate(GateKind::Nor2, &[y, a], z);
    let n = b.finalize().unwrap();

    let stim = [
        (1 * NS, a, true),
        (2 * NS, c, true),
        (4 * NS, a, false),
        (6 * NS, c, false),
    ];
    for model in [DelayModel::fixed_default(), DelayModel::randomized(7)] {
        let t1 = simulate(&n, &model, &stim, 50 * NS).unwrap();
        let t2 = simulate(&n, &model, &stim, 50 * NS).unwrap();
        assert_eq!(t1.events, t2.events);
        assert_eq!(t1.final_values, t2.final_values);
        assert_eq!(t1.quiescent_at, t2.quiescent_at);
    }

    let d1 = DelayModel::randomized(7).resolve(&n).unwrap();
    let d1b = DelayModel::randomized(7).resolve(&n).unwrap();
    let d2 = DelayModel::randomized(8).resolve(&n).unwrap();
    assert_eq!(d1, d1b);
    assert_ne!(d1, d2);
}

#[test]
fn randomized_delays_respect_bounds() {
    let mut b = NetlistBuilder::new();
    let a = b.input("a");
    for i in 0..64 {
        let y = b.net(format!("y{i}"));
        b.gate(GateKind::Buf, &[a], y);
    }
    let n = b.finalize().unwrap();
    let model = DelayModel::Randomized {
        min_ps: 100,
        max_ps: 2_000,
        seed: 3,
    };
    let delays = model.resolve(&n).unwrap();
    assert!(delays.iter().all(|&d| (100..=2_000).contains(&d)));
}

#[test]
fn builder_rejects_structural_errors() {
    // Multiple drivers.
    let mut b = NetlistBuilder::new();
    let a = b.input("a");
    let y = b.net("y");
    b.gate(GateKind::Buf, &[a], y);
    b.gate(GateKind::Buf, &[a], y);
    let errs = b.finalize().unwrap_err();
    assert!(errs
        .iter()
        .any(|e| matches!(e, NetlistError::MultipleDrivers { .. })));

    // Undriven net that is read.
    let mut b = NetlistBuilder::new();
    let ghost = b.net("ghost");
    let y = b.net("y");
    b.gate(GateKind::Buf, &[ghost], y);
    let errs = b.finalize().unwrap_err();
    assert!(errs
        .iter()
        .any(|e| matches!(e, NetlistError::UndrivenNet { .. })));

    // Arity mismatch.
    let mut b = NetlistBuilder::new();
    let a = b.input("a");
    let y = b.net("y");
    b.gate(GateKind::CElement, &[a], y);
    let errs = b.finalize().unwrap_err();
    assert!(errs
        .iter()
        .any(|e| matches!(e, NetlistError::ArityMismatch { .. })));

    // Primary input with a driver.
    let mut b = NetlistBuilder::new();
    let a = b.input("a");
    let y = b.input("y");
    b.gate(GateKind::Buf, &[a], y);
    let errs = b.finalize().unwrap_err();
    assert!(errs
        .iter()
        .any(|e| matches!(e, NetlistError::DrivenInput { .. })));
}

#[test]
fn delay_table_parsing() {
    let table = DelayTable::parse(
        "# gate delays in ns\n\
         C_ELEMENT 0.5\n\
         BUF 0.1   # buffers are fast\n\
         \n\
         DEFAULT 0.25\n",
    )
    .unwrap();
    assert_eq!(table.get(GateKind::CElement).unwrap(), 500);
    assert_eq!(table.get(GateKind::Buf).unwrap(), 100);
    // Falls back to DEFAULT.
    assert_eq!(table.get(GateKind::Or3).unwrap(), 250);

    assert!(matches!(
        DelayTable::parse("FROB 1.0"),
        Err(DelayTableError::UnknownGateKind { line: 1, .. })
    ));
    assert!(matches!(
        DelayTable::parse("BUF -1.0"),
        Err(DelayTableError::BadDelay { .. })
    ));
    assert!(matches!(
        DelayTable::parse("BUF"),
        Err(DelayTableError::Malformed { .. })
    ));
    // No DEFAULT, missing kind surfaces at resolve time.
    let sparse = DelayTable::parse("BUF 0.1").unwrap();
    assert!(matches!(
        sparse.get(GateKind::CElement),
        Err(DelayTableError::MissingKind { .. })
    ));
}

/// Probe counting drives the deadlock verdict: quiescent with fewer
/// probe rises than expected is a deadlock, quiescent with all expected
/// rises is OK.
#[test]
fn deadlock_check_on_probes() {
    let mut b = NetlistBuilder::new();
    let a = b.input("a");
    let p = b.probe(a, "a_probe");
    let n = b.finalize().unwrap();

    let trace = simulate(
        &n,
        &DelayModel::fixed_default(),
        &[(1 * NS, a, true), (2 * NS, a, false)],
        10 * NS,
    )
    .unwrap();
    assert_eq!(n.probes(), &[p]);
    assert!(deadlock_check(&trace, n.probes(), 1).is_ok());
    let verdict = deadlock_check(&trace, n.probes(), 2);
    match verdict {
        Liveness::Deadlock {
            observed,
            expected,
            quiescent_at,
        } => {
            assert_eq!((observed, expected), (1, 2));
            assert!(quiescent_at >= 2 * NS);
        }
        other => panic!("expected deadlock, got {other:?}"),
    }
}

/// Recording policy must not change simulation semantics, only the trace
/// contents.
#[test]
fn record_mask_filters_trace_only() {
    let mut b = NetlistBuilder::new();
    let a = b.input("a");
    let x = b.net("x");
    let y = b.net("y");
    b.gate(GateKind::Buf, &[a], x);
    b.gate(GateKind::Buf, &[x], y);
    let n = b.finalize().unwrap();
    let model = DelayModel::fixed_default();

    let full = simulate(&n, &model, &[(NS, a, true)], 10 * NS).unwrap();

    let mut sim = Simulation::new(&n, &model).unwrap();
    sim.record_only(&[y]);
    sim.drive_at(NS, a, true).unwrap();
    let filtered = sim.run(10 * NS);

    assert_eq!(filtered.quiescent_at, full.quiescent_at);
    assert_eq!(filtered.final_values, full.final_values);
    assert!(filtered.events.iter().all(|e| e.net == y));
    assert_eq!(
        filtered.events_on(y).count(),
        full.events_on(y).count()
    );
}

/// Driving a non-input net is rejected.
#[test]
fn drive_requires_primary_input() {
    let mut b = NetlistBuilder::new();
    let a = b.input("a");
    let y = b.net("y");
    b.gate(GateKind::Buf, &[a], y);
    let n = b.finalize().unwrap();
    let mut sim = Simulation::new(&n, &DelayModel::fixed_default()).unwrap();
    assert!(sim.drive_at(0, y, true).is_err());
    assert!(sim.drive_at(0, a, true).is_ok());
}
