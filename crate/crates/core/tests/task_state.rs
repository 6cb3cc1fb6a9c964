use std::collections::BTreeSet;

use pilot_core::sia::{apply_action, token_jaccard, TaskStateManager, DEFAULT_MATCH_THRESHOLD};
use pilot_core::{Error, SiaAction, TaskState};
use proptest::prelude::*;

fn oracle_jaccard(a: &str, b: &str) -> f64 {
    let set = |s: &str| s.split_whitespace().map(str::to_lowercase).collect::<BTreeSet<_>>();
    let (a, b) = (set(a), set(b));
    let union = a.union(&b).count();
    if union == 0 {
        0.0
    } else {
        a.intersection(&b).count() as f64 / union as f64
    }
}

fn trip() -> TaskState {
    TaskState {
        main_task: "Plan a day trip to New York City".into(),
        details: vec!["Date tomorrow".into(), "return by 7:00 PM".into(), "goal enjoy the city".into()],
        model_tier: Default::default(),
    }
}

fn update(units: &[&str]) -> SiaAction {
    SiaAction::Update { details: units.iter().map(|s| s.to_string()).collect() }
}

fn delete(units: &[&str]) -> SiaAction {
    SiaAction::Delete { details: units.iter().map(|s| s.to_string()).collect() }
}

#[test]
fn six_pm_update_replaces_only_the_time() {
    assert_eq!(oracle_jaccard("return by 6:00 PM", "return by 7:00 PM"), 0.6);
    assert_eq!(token_jaccard("return by 6:00 PM", "return by 7:00 PM"), 0.6);
    let next = apply_action(Some(&trip()), &update(&["return by 6:00 PM"]), DEFAULT_MATCH_THRESHOLD).unwrap();
    assert_eq!(next.main_task, trip().main_task);
    assert_eq!(next.details, ["Date tomorrow", "return by 6:00 PM", "goal enjoy the city"]);
}

#[test]
fn verbatim_delete_removes_exactly_that_unit() {
    let next = apply_action(Some(&trip()), &delete(&["goal enjoy the city"]), DEFAULT_MATCH_THRESHOLD).unwrap();
    assert_eq!(next.details, ["Date tomorrow", "return by 7:00 PM"]);
    let err = apply_action(Some(&trip()), &delete(&["bring an umbrella"]), DEFAULT_MATCH_THRESHOLD).unwrap_err();
    assert!(matches!(err, Error::NoMatchingDetail(_)));
}

#[test]
fn manager_rejects_edits_without_a_task_and_keeps_state_on_failure() {
    let mut tsm = TaskStateManager::new();
    assert!(matches!(tsm.apply(&update(&["x"])), Err(Error::NoActiveTask)));
    tsm.apply(&SiaAction::New { main_task: "Plan a picnic".into(), details: vec!["bring fruit".into()] }).unwrap();
    let before = tsm.state().cloned();
    assert!(tsm.apply(&delete(&["unrelated words here"])).is_err());
    assert_eq!(tsm.state().cloned(), before);
    assert!(tsm.apply(&update(&["bad; unit"])).is_err());
    assert_eq!(tsm.state().cloned(), before);
}

/// Units over disjoint vocabularies so that only the intended unit can match.
fn units() -> impl Strategy<Value = Vec<Vec<String>>> {
    prop::collection::vec(2usize..6, 1..7).prop_map(|lens| {
        lens.iter().enumerate().map(|(i, &n)| (0..n).map(|k| format!("u{i}w{k}")).collect()).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn update_touches_at_most_one_unit(units in units(), target in any::<prop::sample::Index>(), keep in 0usize..6, fresh in 0usize..4) {
        let details: Vec<String> = units.iter().map(|u| u.join(" ")).collect();
        let state = TaskState { main_task: "task".into(), details: details.clone(), model_tier: Default::default() };
        let t = target.index(units.len());
        let mut tokens: Vec<String> = units[t].iter().take(keep).cloned().collect();
        tokens.extend((0..fresh).map(|k| format!("fresh{k}")));
        prop_assume!(!tokens.is_empty());
        let unit = tokens.join(" ");
        prop_assume!(!details.contains(&unit));

        let next = apply_action(Some(&state), &update(&[&unit]), DEFAULT_MATCH_THRESHOLD).unwrap();
        if oracle_jaccard(&details[t], &unit) >= DEFAULT_MATCH_THRESHOLD {
            prop_assert_eq!(next.details.len(), details.len());
            for (i, d) in details.iter().enumerate() {
                if i == t {
                    prop_assert_eq!(&next.details[i], &unit);
                } else {
                    prop_assert_eq!(&next.details[i], d);
                }
            }
        } else {
            prop_assert_eq!(&next.details[..details.len()], &details[..]);
            prop_assert_eq!(next.details.last().unwrap(), &unit);
        }
        prop_assert_eq!(next.main_task, state.main_task);
    }

    #[test]
    fn verbatim_delete_keeps_every_other_unit(units in units(), target in any::<prop::sample::Index>()) {
        let details: Vec<String> = units.iter().map(|u| u.join(" ")).collect();
        let state = TaskState { main_task: "task".into(), details: details.clone(), model_tier: Default::default() };
        let t = target.index(details.len());
        let next = apply_action(Some(&state), &delete(&[&details[t]]), DEFAULT_MATCH_THRESHOLD).unwrap();
        let mut expected = details.clone();
        expected.remove(t);
        prop_assert_eq!(next.details, expected);
    }

    #[test]
    fn jaccard_matches_set_oracle(a in "[a-d ]{0,12}", b in "[a-d ]{0,12}") {
        prop_assert!((token_jaccard(&a, &b) - oracle_jaccard(&a, &b)).abs() < 1e-12);
        prop_assert_eq!(token_jaccard(&a, &b), token_jaccard(&b, &a));
    }
}
