//! The ring liveness law: a closed ring of half-buffer stages holding
//! `k` tokens circulates only if it has at least `2k + 1` stages — every
//! token needs its own stage plus a trailing spacer stage, and one
//! additional free stage must exist for anything to move into. Rings at
//! exactly `2k` stages wedge immediately.

use flysig::dualrail::Channel;
use flysig::kernel::{deadlock_check, DelayModel, NetlistBuilder, Simulation};
use flysig::oplib::fragments::register_chain;
use flysig::oplib::RegisterInit;

/// Build a closed ring with the given stages and probe the loop rail.
fn ring_liveness(stages: &[RegisterInit], expected_rises: usize) -> flysig::kernel::Liveness {
    let mut b = NetlistBuilder::new();
    let loop_ch = Channel::new(&mut b, "loop");
    register_chain(&mut b, stages, &loop_ch, &loop_ch, "ring");
    b.probe(loop_ch.t, "lap");
    let netlist = b.finalize().expect("closed ring");
    let sim = Simulation::new(&netlist, &DelayModel::fixed_default()).unwrap();
    let trace = sim.run(1_000_000);
    deadlock_check(&trace, netlist.probes(), expected_rises)
}

fn places_for(stages: &[RegisterInit]) -> usize {
    stages.len()
}

fn tokens_in(stages: &[RegisterInit]) -> usize {
    stages.iter().filter(|s| s.token().is_some()).count()
}

#[test]
fn ring_liveness_follows_the_two_k_plus_one_law() {
    use RegisterInit::{Empty, One};
    let cases: Vec<Vec<RegisterInit>> = vec![
        vec![One, Empty],                      // 2 places, 1 token: dead
        vec![One, Empty, Empty],               // 3 places, 1 token: live
        vec![One, Empty, One, Empty],          // 4 places, 2 tokens: dead
        vec![One, Empty, One, Empty, Empty],   // 5 places, 2 tokens: live
        vec![One, One, Empty, Empty, Empty],   // tokens adjacent: still live
    ];
    for stages in &cases {
        let places = places_for(stages);
        let tokens = tokens_in(stages);
        let law_says_live = places >= 2 * tokens + 1;
        let verdict = ring_liveness(stages, 4);
        assert_eq!(
            verdict.is_ok(),
            law_says_live,
            "ring {stages:?}: places={places} tokens={tokens}, law says live={law_says_live}, got {verdict:?}"
        );
        assert_eq!(verdict.is_deadlock(), !law_says_live, "ring {stages:?}");
    }
}

#[test]
fn dead_ring_quiesces_without_circulation() {
    use RegisterInit::{Empty, One};
    let verdict = ring_liveness(&[One, Empty], 1);
    match verdict {
        flysig::kernel::Liveness::Deadlock { observed, .. } => {
            assert_eq!(observed, 0, "the token must not complete a lap")
        }
        other => panic!("expected deadlock, got {other:?}"),
    }
}
