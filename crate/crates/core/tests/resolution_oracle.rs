mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{oracle, random_instance};
use pdnet_core::model::default_warehouse_hosts;
use pdnet_core::resolution::{graph_completion_inference, ResolutionConfig};
use pdnet_core::Execution;

fn run(inst: &common::Instance, limit: usize) -> BTreeMap<String, String> {
    let config = ResolutionConfig { iteration_limit: limit, warehouse_hosts: default_warehouse_hosts(), ..ResolutionConfig::default() };
    let (_, _, matches) =
        graph_completion_inference(&inst.library_descriptions(), &inst.library_entities(), &config, Execution::Sequential).unwrap();
    matches.into_iter().map(|m| (m.description_id, m.entity_id)).collect()
}

#[test]
fn fixpoint_matches_oracle() {
    for seed in 0..500 {
        let inst = random_instance(seed);
        let ids: Vec<String> = inst.library_entities().into_iter().map(|e| e.entity_id).collect();
        let expected: BTreeMap<String, String> =
            oracle(&inst).into_iter().map(|(d, e)| (d, ids[e].clone())).collect();
        assert_eq!(run(&inst, usize::MAX), expected, "seed {seed}");
    }
}

#[test]
fn limit_three_versus_fixpoint() {
    let mut violations = Vec::new();
    for seed in 0..500 {
        let inst = random_instance(seed);
        let limited: BTreeSet<_> = run(&inst, 3).into_iter().collect();
        let full: BTreeSet<_> = run(&inst, usize::MAX).into_iter().collect();
        if !limited.is_subset(&full) {
            violations.push(seed);
        }
    }
    println!("limit-3 not a subset of fixpoint on {} of 500 seeds: {:?}", violations.len(), violations);
}

/// Two label fronts meet on one description at pass 3. A three-pass run
/// matches it through its name; the fourth pass sees both keys carry a
/// second entity and removes them, so the fixpoint leaves it unmatched.
#[test]
fn limit_three_can_keep_a_key_fixpoint_removes() {
    use common::{Instance, Key};
    let d = |i: &str, n: &str, u: &str| (i.to_string(), "p".to_string(), Some(n.to_string()), Some(u.to_string()));
    let inst = Instance {
        entities: vec![vec![Key::Name("alpha".into())], vec![Key::Url("w0.org/x".into())]],
        descriptions: vec![
            d("d1", "alpha", "u1.org/x"),
            d("d2", "n1", "u1.org/x"),
            d("d3", "n1", "u2.org/x"),
            d("d4", "m1", "w0.org/x"),
            d("d5", "m1", "w1.org/x"),
            d("d6", "m2", "w1.org/x"),
            d("d7", "m2", "u2.org/x"),
        ],
        generic: BTreeSet::new(),
    };
    let ids: Vec<String> = inst.library_entities().into_iter().map(|e| e.entity_id).collect();
    let limited = run(&inst, 3);
    let full = run(&inst, usize::MAX);
    assert_eq!(limited.get("d7"), Some(&ids[1]));
    assert_eq!(full.get("d7"), None);
    let expected: BTreeMap<String, String> = oracle(&inst).into_iter().map(|(d, e)| (d, ids[e].clone())).collect();
    assert_eq!(full, expected);
}
