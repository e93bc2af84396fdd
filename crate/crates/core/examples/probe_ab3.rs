use flysig::dfg::{evaluate, parse_dfg, schedule_and_emit, Inventory};
use flysig::kernel::{ns_to_ps, DelayModel};
use flysig::processor::{simulate_processor, validate, Level};
use std::fs;

fn main() {
    let text = fs::read_to_string("benchmarks/filter_ab_3.dfg").unwrap();
    let g = parse_dfg(&text).unwrap();
    let cfg = schedule_and_emit(&g, &Inventory::unlimited(), 0).unwrap();
    let (m, warnings) = validate(&cfg).unwrap();
    println!("warnings: {warnings:?}");
    println!("predicted_deadlock: {}", m.predicted_deadlock());
    for ring in &m.rings {
        println!("ring: places={} tokens={}", ring.places, ring.tokens);
    }
    let ins = vec![vec![1, 2, 3, 4, 5]];
    let want = evaluate(&g, &ins, 10_000);
    for level in [Level::Token, Level::Gate] {
        let r = simulate_processor(&m, &ins, level, &DelayModel::fixed_default(), ns_to_ps(1_000_000.0)).unwrap();
        println!("{level:?}: deadlock={} outputs={:?} want={:?}", r.deadlock, r.outputs, want);
    }
}
