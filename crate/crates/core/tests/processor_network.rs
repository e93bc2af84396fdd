//! Processor networks (port-map and remote-destination composition)
//! and prototype→target derivation.

use flysig::kernel::{ns_to_ps, DelayModel, DelayTable};
use flysig::processor::{
    connect_processors, derive_target, simulate_network, simulate_processor, validate,
    ConfigError, Level, Machine, Mode, PortBinding, ProcessorConfig,
};

fn fixed() -> DelayModel {
    DelayModel::Fixed(DelayTable::builtin())
}

fn machine(text: &str) -> Machine {
    validate(&ProcessorConfig::parse(text).expect("parse"))
        .expect("validate")
        .0
}

/// Front half: one adder, externally fed.
const FRONT: &str = "proc front width=8\n\
    [OPERATORS]\na add\n\
    [ROUTING]\n0 inst=a src=IN[0],IN[1] dst=OUT[0]\n";

/// Back half: an accumulator over its external input.
const BACK: &str = "proc back width=8\n\
    [OPERATORS]\na add\nr reg\n\
    [ROUTING]\n\
    0 inst=a src=IN[0],1 dst=1\n\
    1 inst=r src=0 dst=0,OUT[0]\n\
    [MEMORY]\n1 token op=1 valid=1 guard=11 operands=0\n\
    [LINKS]\n0 1 bubbles=1\n1 0 bubbles=1\n";

/// The same function in one processor: acc += (a + b).
const WHOLE: &str = "proc whole width=8\n\
    [OPERATORS]\na1 add\na2 add\nr reg\n\
    [ROUTING]\n\
    0 inst=a1 src=IN[0],IN[1] dst=1\n\
    1 inst=a2 src=0,2 dst=2\n\
    2 inst=r src=1 dst=1,OUT[0]\n\
    [MEMORY]\n2 token op=2 valid=1 guard=11 operands=0\n\
    [LINKS]\n0 1 bubbles=1\n1 2 bubbles=1\n2 1 bubbles=1\n";

#[test]
fn network_pipeline_matches_single_processor() {
    let front = machine(FRONT);
    let back = machine(BACK);
    let whole = machine(WHOLE);
    let net = connect_processors(
        ("front", &front),
        ("back", &back),
        &vec![PortBinding {
            out_port: 0,
            in_port: 0,
            bubbles: 1,
        }],
    )
    .expect("connect");
    assert_eq!(net.machine.n_inputs, 2);
    assert_eq!(net.machine.n_outputs, 1);

    let ins = vec![vec![1, 2, 3, 4], vec![10, 20, 30, 40]];
    for level in [Level::Token, Level::Gate] {
        let split = simulate_network(&net, &ins, level, &fixed(), ns_to_ps(200_000.0))
            .expect("network run");
        let single = simulate_processor(&whole, &ins, level, &fixed(), ns_to_ps(200_000.0))
            .expect("single run");
        assert!(!split.deadlock, "{level:?}: {:?}", split.error);
        assert_eq!(
            split.outputs, single.outputs,
            "{level:?}: split pipeline must equal the fused processor"
        );
    }
}

#[test]
fn network_rejects_width_mismatch() {
    let front = machine(FRONT);
    let wide = machine(
        "proc wide width=16\n[OPERATORS]\nr reg\n[ROUTING]\n0 inst=r src=IN[0] dst=OUT[0]\n",
    );
    let err = connect_processors(
        ("front", &front),
        ("wide", &wide),
        &vec![PortBinding {
            out_port: 0,
            in_port: 0,
            bubbles: 1,
        }],
    )
    .unwrap_err();
    assert!(matches!(err, ConfigError::WidthMismatch { .. }));
}

#[test]
fn network_rejects_dangling_ports() {
    let front = machine(FRONT);
    let back = machine(BACK);
    // No OUT[3] on the upstream side.
    let err = connect_processors(
        ("front", &front),
        ("back", &back),
        &vec![PortBinding {
            out_port: 3,
            in_port: 0,
            bubbles: 1,
        }],
    )
    .unwrap_err();
    assert!(matches!(err, ConfigError::PortUnbound { .. }));
    // No IN[5] on the downstream side.
    let err = connect_processors(
        ("front", &front),
        ("back", &back),
        &vec![PortBinding {
            out_port: 0,
            in_port: 5,
            bubbles: 1,
        }],
    )
    .unwrap_err();
    assert!(matches!(err, ConfigError::PortUnbound { .. }));
}

/// Accumulator split open: the feedback path leaves through OUT[0]
/// and must come back through IN[1] via the port fabric. OUT[1] is the
/// observable tap.
const OPEN_LOOP: &str = "proc loopy width=8\n\
    [OPERATORS]\na add\nr reg\n\
    [ROUTING]\n\
    0 inst=a src=IN[0],IN[1] dst=1\n\
    1 inst=r src=0 dst=OUT[0],OUT[1]\n\
    [MEMORY]\n1 token op=1 valid=1 guard=11 operands=0\n";

#[test]
fn self_connection_closes_a_live_cross_ring() {
    let m = machine(OPEN_LOOP);
    let net = connect_processors(
        ("loopy", &m),
        ("loopy", &m),
        &vec![PortBinding {
            out_port: 0,
            in_port: 1,
            bubbles: 1,
        }],
    )
    .expect("self-connect");
    // One input and one output port survive the splice.
    assert_eq!(net.machine.n_inputs, 1);
    assert_eq!(net.machine.n_outputs, 1);
    // The spliced ring is analyzed like a local one and is live.
    assert_eq!(net.machine.rings.len(), 1);
    assert!(net.machine.rings[0].predicted_live);

    for level in [Level::Token, Level::Gate] {
        let report = simulate_network(
            &net,
            &[vec![1, 2, 3, 4, 5]],
            level,
            &fixed(),
            ns_to_ps(200_000.0),
        )
        .expect("run");
        assert!(!report.deadlock, "{level:?}: {:?}", report.error);
        assert_eq!(report.outputs, vec![vec![0, 1, 3, 6, 10, 15]], "{level:?}");
    }
}

#[test]
fn self_connection_without_bubble_deadlocks() {
    let m = machine(OPEN_LOOP);
    let net = connect_processors(
        ("loopy", &m),
        ("loopy", &m),
        &vec![PortBinding {
            out_port: 0,
            in_port: 1,
            bubbles: 0,
        }],
    )
    .expect("self-connect");
    assert!(net.machine.predicted_deadlock());
    for level in [Level::Token, Level::Gate] {
        let report =
            simulate_network(&net, &[vec![1, 2, 3]], level, &fixed(), ns_to_ps(200_000.0))
                .expect("run");
        assert!(report.deadlock, "{level:?} must deadlock without a bubble");
    }
}

#[test]
fn remote_destination_binds_the_named_cell() {
    // `front` writes straight into cell 0 of `sink` instead of using
    // an output port.
    let front = machine(
        "proc front width=8\n[OPERATORS]\na add\n\
         [ROUTING]\n0 inst=a src=IN[0],IN[1] dst=remote:sink.0\n",
    );
    let sink = machine(
        "proc sink width=8\n[OPERATORS]\nr reg\n[ROUTING]\n0 inst=r src=IN[0] dst=OUT[0]\n",
    );
    // A machine with remote destinations cannot run on its own.
    assert!(simulate_processor(&front, &[vec![1], vec![2]], Level::Token, &fixed(), 1000).is_err());

    let net = connect_processors(("front", &front), ("sink", &sink), &vec![]).expect("connect");
    assert_eq!(net.machine.n_inputs, 2, "sink's input port is consumed");
    let report = simulate_network(
        &net,
        &[vec![1, 2, 3], vec![10, 20, 30]],
        Level::Token,
        &fixed(),
        ns_to_ps(200_000.0),
    )
    .expect("run");
    assert_eq!(report.outputs, vec![vec![11, 22, 33]]);

    // Naming an unknown processor or cell is a dangling map.
    let bad = machine(
        "proc front width=8\n[OPERATORS]\na add\n\
         [ROUTING]\n0 inst=a src=IN[0],IN[1] dst=remote:nowhere.0\n",
    );
    assert!(matches!(
        connect_processors(("front", &bad), ("sink", &sink), &vec![]),
        Err(ConfigError::PortUnbound { .. })
    ));
}

#[test]
fn derive_prunes_spare_inventory() {
    // Prototype with 8 adders and 4 registers; routing uses 3 adders.
    let mut text = String::from("proc proto width=8 mode=prototype\n[OPERATORS]\n");
    for i in 0..8 {
        text.push_str(&format!("add{i} add\n"));
    }
    for i in 0..4 {
        text.push_str(&format!("reg{i} reg\n"));
    }
    text.push_str(
        "[ROUTING]\n\
         0 inst=add0 src=IN[0],IN[1] dst=1\n\
         1 inst=add1 src=0,IN[1] dst=2\n\
         2 inst=add2 src=1,IN[1] dst=OUT[0]\n",
    );
    let config = ProcessorConfig::parse(&text).unwrap();
    let (target, report) = derive_target(&config).expect("derive");

    assert_eq!(target.mode, Mode::Target);
    assert_eq!(target.operators.len(), 3, "exactly the referenced adders");
    assert_eq!(report.kept, 3);
    assert_eq!(report.removed.len(), 9);
    assert_eq!(report.removed_of_kind("add"), 5);
    assert_eq!(report.removed_of_kind("reg"), 4);

    // Resource counts never grow.
    assert!(target.operators.len() <= config.operators.len());
    assert_eq!(target.routing, config.routing);

    // Derivation is a fixpoint.
    let (again, report2) = derive_target(&target).expect("derive twice");
    assert_eq!(again, target);
    assert!(report2.removed.is_empty());

    // The prototype would be rejected if declared a target as-is.
    let mut bad = config.clone();
    bad.mode = Mode::Target;
    assert!(validate(&bad).is_err());
}

#[test]
fn derive_preserves_behavior() {
    let proto_text = "proc proto width=8 mode=prototype\n\
        [OPERATORS]\na1 add\na2 add\nspare1 add\nspare2 sub\nr reg\nspare3 reg\n\
        [ROUTING]\n\
        0 inst=a1 src=IN[0],IN[1] dst=1\n\
        1 inst=a2 src=0,2 dst=2\n\
        2 inst=r src=1 dst=1,OUT[0]\n\
        [MEMORY]\n2 token op=2 valid=1 guard=11 operands=0\n\
        [LINKS]\n0 1 bubbles=1\n1 2 bubbles=1\n2 1 bubbles=1\n";
    let config = ProcessorConfig::parse(proto_text).unwrap();
    let (target_cfg, report) = derive_target(&config).expect("derive");
    assert_eq!(report.removed.len(), 3);

    let proto = validate(&config).unwrap().0;
    let target = validate(&target_cfg).unwrap().0;

    // 100 random samples through both machines, token level; one gate
    // cross-check on a short stream.
    let mut x = 0x2545f4914f6cdd1du64;
    let mut stream = |n: usize| -> Vec<i64> {
        (0..n)
            .map(|_| {
                x ^= x << 13;
                x ^= x >> 7;
                x ^= x << 17;
                (x as i64).rem_euclid(256) - 128
            })
            .collect()
    };
    for _ in 0..10 {
        let ins = vec![stream(10), stream(10)];
        let a = simulate_processor(&proto, &ins, Level::Token, &fixed(), ns_to_ps(500_000.0))
            .unwrap();
        let b = simulate_processor(&target, &ins, Level::Token, &fixed(), ns_to_ps(500_000.0))
            .unwrap();
        assert_eq!(a.outputs, b.outputs);
    }
    let ins = vec![stream(4), stream(4)];
    let a = simulate_processor(&proto, &ins, Level::Gate, &fixed(), ns_to_ps(500_000.0)).unwrap();
    let b = simulate_processor(&target, &ins, Level::Gate, &fixed(), ns_to_ps(500_000.0)).unwrap();
    assert_eq!(a.outputs, b.outputs);
}
