use super::*;
use crate::model::{EntityOrigin, IdentityAttribute};

fn desc(id: &str, paper: &str, name: Option<&str>, url: Option<&str>) -> DatasetDescription {
    let mut d = DatasetDescription::new(id, paper);
    d.dataset_name = name.map(String::from);
    d.dataset_url = url.map(String::from);
    d
}

fn entity(names: &[&str], urls: &[&str]) -> DatasetEntity {
    DatasetEntity::new(
        names[0],
        names.iter().map(|n| crate::model::normalize_name(n).unwrap()).collect(),
        urls.iter().map(|u| crate::model::normalize_url(u).unwrap()).collect(),
        EntityOrigin::Imported,
    )
}

fn pairs(ms: &[Match]) -> Vec<(String, String)> {
    ms.iter().map(|m| (m.description_id.clone(), m.entity_id.clone())).collect()
}

#[test]
fn coco_completion() {
    let coco = entity(&["MS COCO"], &["https://cocodataset.org/"]);
    let ds = [
        desc("a#0", "a", Some("COCO 2014"), Some("https://cocodataset.org/")),
        desc("b#0", "b", Some("COCO 2014"), None),
    ];
    let gi = graph_inference_baseline(&ds, std::slice::from_ref(&coco), &ResolutionConfig::default(), Execution::Sequential).unwrap();
    assert_eq!(gi.len(), 1);
    assert_eq!(gi[0].via.kind, crate::model::AttributeKind::Url);

    let (graph, report, gci) =
        graph_completion_inference(&ds, std::slice::from_ref(&coco), &ResolutionConfig::default(), Execution::Parallel).unwrap();
    assert_eq!(report.edges_added[0], 1);
    assert!(report.converged);
    let coco_2014 = IdentityAttribute::name("coco 2014");
    assert_eq!(graph.refers_to(&coco_2014).unwrap().iter().collect::<Vec<_>>(), vec![&coco.entity_id]);
    assert_eq!(pairs(&gci), vec![("a#0".into(), coco.entity_id.clone()), ("b#0".into(), coco.entity_id.clone())]);
    assert_eq!(gci[1].via, coco_2014);
}

#[test]
fn shared_specific_url_is_ambiguous() {
    let glue = entity(&["GLUE"], &[]);
    let squad = entity(&["SQuAD"], &[]);
    let ds = [
        desc("a#0", "a", Some("GLUE"), Some("https://example.org/benchmarks")),
        desc("b#0", "b", Some("SQuAD"), Some("https://example.org/benchmarks")),
        desc("c#0", "c", None, Some("https://example.org/benchmarks")),
    ];
    let (graph, report, m) =
        graph_completion_inference(&ds, &[glue.clone(), squad.clone()], &ResolutionConfig::default(), Execution::Sequential)
            .unwrap();
    assert_eq!(report.removed[0], 1);
    let removed = &graph.removed_i_nodes()[0];
    assert_eq!(removed.reason, RemovalReason::Ambiguous);
    assert_eq!(removed.pass, 1);
    assert_eq!(removed.entities.len(), 2);
    // names still match; the URL-only description does not
    assert_eq!(pairs(&m), vec![("a#0".into(), glue.entity_id), ("b#0".into(), squad.entity_id)]);
}

#[test]
fn warehouse_front_page_is_generic() {
    let e = entity(&["Titanic"], &["https://kaggle.com"]);
    let ds = [desc("a#0", "a", None, Some("kaggle.com"))];
    let (graph, _, m) = graph_completion_inference(&ds, &[e], &ResolutionConfig::default(), Execution::Sequential).unwrap();
    assert!(m.is_empty());
    assert_eq!(graph.removed_i_nodes()[0].reason, RemovalReason::Generic);
    assert_eq!(graph.removed_i_nodes()[0].pass, 0);
}

#[test]
fn creation_shapes() {
    let ds = [
        desc("a#0", "a", None, None),
        desc("b#0", "b", None, Some("https://x.org/d")),
        desc("c#0", "c", Some("D"), Some("https://x.org/d")),
    ];
    let (g, conflicts) = create_graph(&ds, &[]);
    assert!(conflicts.is_empty());
    assert_eq!(g.d_nodes().count(), 3);
    assert_eq!(g.i_nodes().count(), 2);
    assert_eq!(g.descriptions_of(&IdentityAttribute::url("x.org/d")), vec!["b#0", "c#0"]);
    assert_eq!(g.has_edges().len(), 3);
}

#[test]
fn import_conflict_first_wins() {
    let a = entity(&["Alpha", "shared"], &[]);
    let b = entity(&["Beta", "shared"], &[]);
    let (g, conflicts) = create_graph(&[], &[a.clone(), b.clone()]);
    assert_eq!(conflicts.len(), 1);
    assert_eq!(conflicts[0].kept_entity, a.entity_id);
    assert_eq!(conflicts[0].dropped_entity, b.entity_id);
    assert_eq!(g.refers_to(&IdentityAttribute::name("shared")).unwrap().len(), 1);
}

#[test]
fn no_overlap_fixpoint_after_one_pass() {
    let ds = [desc("a#0", "a", Some("X"), Some("https://x.org/x"))];
    let (mut g, _) = create_graph(&ds, &[entity(&["Y"], &[])]);
    let report = g.complete_and_refine(&ResolutionConfig::default());
    assert_eq!(report.passes, 1);
    assert_eq!(report.edges_added, vec![0]);
    assert!(report.converged);
}

#[test]
fn iteration_limit_bounds_hops() {
    // chain: e -n0- d0 -u0- d1 -n1- d2 -u1- d3 -n2- d4
    let e = entity(&["n0"], &[]);
    let ds = [
        desc("d0", "p", Some("n0"), Some("https://h.org/u0")),
        desc("d1", "p", Some("n1"), Some("https://h.org/u0")),
        desc("d2", "p", Some("n1"), Some("https://h.org/u1")),
        desc("d3", "p", Some("n2"), Some("https://h.org/u1")),
        desc("d4", "p", Some("n2"), None),
    ];
    let limited = ResolutionConfig { iteration_limit: 2, ..ResolutionConfig::default() };
    let (_, r, m) = graph_completion_inference(&ds, std::slice::from_ref(&e), &limited, Execution::Sequential).unwrap();
    assert!(!r.converged);
    assert_eq!(m.len(), 3);
    let (_, r, m) = graph_completion_inference(&ds, &[e], &ResolutionConfig::fixpoint(), Execution::Sequential).unwrap();
    assert!(r.converged);
    assert_eq!(r.passes, 5);
    assert_eq!(m.len(), 5);
}

#[test]
fn name_matching_uses_canonical_only() {
    let coco = entity(&["MS COCO", "COCO"], &["https://cocodataset.org"]);
    let glue = entity(&["GLUE"], &[]);
    let ds = [
        desc("a#0", "a", Some("glue"), None),
        desc("b#0", "b", Some("COCO 2014"), None),
        desc("c#0", "c", Some("COCO"), None),
        desc("d#0", "d", None, Some("cocodataset.org")),
    ];
    let m = name_matching_baseline(&ds, &[coco.clone(), glue.clone()]);
    assert_eq!(pairs(&m), vec![("a#0".into(), glue.entity_id.clone())]);
    let gi = graph_inference_baseline(&ds, &[coco.clone(), glue], &ResolutionConfig::default(), Execution::Sequential).unwrap();
    assert_eq!(gi.len(), 3);
    assert!(gi.iter().all(|m| m.method == MatchMethod::GraphInference));
    assert!(graph_inference_baseline(&[], &[coco], &ResolutionConfig::default(), Execution::Sequential).unwrap().is_empty());
}

#[test]
fn resolution_is_order_independent() {
    let es = [entity(&["A"], &["https://a.org/x"]), entity(&["B"], &["https://b.org/y"])];
    let mut ds = vec![
        desc("1", "p1", Some("A v2"), Some("https://a.org/x")),
        desc("2", "p2", Some("A v2"), Some("https://b.org/y")),
        desc("3", "p3", Some("B"), None),
        desc("4", "p4", Some("New"), Some("https://new.org/n")),
        desc("5", "p5", Some("new"), Some("https://new.org/n")),
    ];
    let config = ResolutionConfig::default();
    let first = resolve(&ds, &es, &config, Execution::Parallel).unwrap();
    ds.reverse();
    let mut es_rev = es.to_vec();
    es_rev.reverse();
    let second = resolve(&ds, &es_rev, &config, Execution::Sequential).unwrap();
    assert_eq!(first.matches, second.matches);
    assert_eq!(first.new_entities, second.new_entities);
    assert_eq!(first.report.new_entities_uncertain, 1);
}

#[test]
fn discovery_thresholds() {
    let url = Some("https://huggingface.co/datasets/openbmb/UltraFeedback");
    let ds = [
        desc("p1#0", "p1", Some("UltraFeedback"), url),
        desc("p2#0", "p2", Some("UltraFeedback"), url),
        desc("p3#0", "p3", Some("Ultra-Feedback"), url),
        desc("q1#0", "q1", Some("TwoPaper"), Some("https://two.org/d")),
        desc("q2#0", "q2", Some("TwoPaper"), Some("https://two.org/d")),
        desc("r1#0", "r1", Some("NameOnly"), None),
        desc("r2#0", "r2", Some("NameOnly"), None),
        desc("r3#0", "r3", Some("NameOnly"), None),
        desc("s1#0", "s1", Some("Single"), Some("https://single.org/d")),
        desc("s1#1", "s1", Some("Single"), Some("https://single.org/d")),
    ];
    let r = resolve(&ds, &[], &ResolutionConfig::default(), Execution::Sequential).unwrap();
    assert_eq!(r.new_entities.len(), 2);
    let uf = r.new_entities.iter().find(|e| e.canonical_name == "UltraFeedback").unwrap();
    assert!(!uf.uncertain);
    assert_eq!(uf.mention_count, 3);
    assert_eq!(uf.name_keys.len(), 1);
    assert_eq!(uf.origin, EntityOrigin::Discovered);
    let two = r.new_entities.iter().find(|e| e.canonical_name == "TwoPaper").unwrap();
    assert!(two.uncertain);
    assert_eq!(r.matches.len(), 5);
    for e in &r.new_entities {
        assert!(!e.name_keys.is_empty() && !e.url_keys.is_empty());
    }
    let lambda1 = ResolutionConfig { lambda: 1, ..ResolutionConfig::default() };
    let r = resolve(&ds, &[], &lambda1, Execution::Sequential).unwrap();
    assert_eq!(r.new_entities.len(), 3);
    assert!(r.new_entities.iter().all(|e| !e.uncertain));
}

#[test]
fn discovery_skips_dead_urls() {
    let url = Some("https://github.com");
    let ds: Vec<_> = (0..3).map(|i| desc(&format!("p{i}#0"), &format!("p{i}"), Some("Thing"), url)).collect();
    let r = resolve(&ds, &[], &ResolutionConfig::default(), Execution::Sequential).unwrap();
    assert!(r.new_entities.is_empty());
}

#[test]
fn config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("hosts.txt"), "# extra\nfigshare.com\n").unwrap();
    let p = dir.path().join("pdnet.json");
    std::fs::write(&p, r#"{"lambda": 2, "warehouse_hosts_file": "hosts.txt"}"#).unwrap();
    let c = ResolutionConfig::load(&p).unwrap();
    assert_eq!(c.lambda, 2);
    assert_eq!(c.iteration_limit, 3);
    assert!(c.warehouse_hosts.contains("figshare.com") && c.warehouse_hosts.contains("kaggle.com"));
    std::fs::write(&p, r#"{"lambda": 0}"#).unwrap();
    assert!(matches!(ResolutionConfig::load(&p), Err(ConfigError::Invalid { .. })));
    std::fs::write(&p, r#"{"fixpoint": true, "bogus": 1}"#).unwrap();
    assert!(ResolutionConfig::load(&p).is_err());
    std::fs::write(&p, r#"{"fixpoint": true}"#).unwrap();
    assert_eq!(ResolutionConfig::load(&p).unwrap().iteration_limit, usize::MAX);
}
