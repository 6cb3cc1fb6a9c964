use pilot_bench::datasets::*;
use pilot_bench::rouge::max_pairwise;
use pilot_bench::Sizes;
use pilot_core::{RouteTarget, SiaAction};

const SEED: u64 = 2025;

#[test]
fn default_datasets_pass_the_overlap_filter() {
    let s = Sizes::default();
    let route: Vec<String> = route_dataset(SEED, s.route).unwrap().into_iter().map(|i| i.text).collect();
    let bind: Vec<String> =
        sensorbind_dataset(SEED, s.sensorbind_easy, s.sensorbind_hard).unwrap().into_iter().map(|i| i.text).collect();
    let turns: Vec<String> = taskparser_dataset(SEED, s.taskparser_easy, s.taskparser_hard, s.taskparser_hard_turns)
        .unwrap()
        .into_iter()
        .flat_map(|d| d.turns.into_iter().map(|t| t.text))
        .collect();
    let fast: Vec<String> = fastthinking_dataset(SEED, s.fastthinking)
        .unwrap()
        .into_iter()
        .flat_map(|t| std::iter::once(t.seed_text).chain(t.variants))
        .collect();
    let tools: Vec<String> = toolext_dataset(SEED, 100).unwrap().queries.into_iter().map(|q| q.text).collect();
    for (name, texts) in [("route", route), ("sensorbind", bind), ("taskparser", turns), ("fastthinking", fast), ("toolext", tools)] {
        let m = max_pairwise(&texts);
        assert!(m <= 0.7, "{name}: max pairwise {m}");
    }
}

#[test]
fn route_split_is_preserved_at_any_scale() {
    for n in [20, 50, 100] {
        let items = route_dataset(SEED, n).unwrap();
        let sia = items.iter().filter(|i| i.target == RouteTarget::Sia).count();
        assert_eq!(items.len(), n);
        assert_eq!(sia, (n as f64 * 0.58).round() as usize);
    }
}

#[test]
fn taskparser_turn_structure() {
    let d = taskparser_dataset(SEED, 7, 33, 228).unwrap();
    assert_eq!(d.len(), 40);
    assert_eq!(d.iter().map(|d| d.turns.len()).sum::<usize>(), 256);
    for dialogue in &d {
        assert!(matches!(dialogue.turns[0].expected_action, SiaAction::New { .. }));
    }
    let kinds: std::collections::BTreeSet<&str> =
        d.iter().flat_map(|d| d.turns.iter().map(|t| t.expected_action.name())).collect();
    for k in ["NEW", "UPDATE", "DELETE", "UPGRADE", "DOWNGRADE", "MEMORY"] {
        assert!(kinds.contains(k), "no {k} turn");
    }
}

#[test]
fn fastthinking_clusters() {
    let tasks = fastthinking_dataset(SEED, 10).unwrap();
    assert_eq!(tasks.iter().map(|t| t.variants.len()).sum::<usize>(), 50);
    let canon: std::collections::BTreeSet<&str> = tasks.iter().map(|t| t.canonical.as_str()).collect();
    assert_eq!(canon.len(), 10);
}

#[test]
fn toolext_scales() {
    for n in [30, 50, 70, 100] {
        let set = toolext_dataset(SEED, n).unwrap();
        assert_eq!((set.skills.len(), set.queries.len()), (n, n));
    }
}

#[test]
fn exhausted_banks_report_insufficient_diversity() {
    assert!(matches!(toolext_dataset(SEED, 10_000), Err(pilot_core::Error::InsufficientDiversity(_))));
    assert!(matches!(route_dataset(SEED, 10_000), Err(pilot_core::Error::InsufficientDiversity(_))));
}
