mod common;

use common::*;
use kpc::compose::{AssembledKB, ClauseOrigin};
use kpc::eval::{evaluate, stratify};
use kpc::morphism::apply_morphism;
use kpc::oracle::{
    check_equivalence, forward_rename, generate_bridge_rules, random_fact_base, run_trials,
    translate_facts, OracleError,
};
use kpc::syntax::parse_facts_with;
use kpc::terms::GroundAtom;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn stdlib_morphisms() -> Vec<String> {
    stdlib()
        .library
        .morphisms()
        .map(|m| m.name.clone())
        .collect()
}

#[test]
fn every_stdlib_morphism_agrees_with_its_bridge_rules() {
    for (i, name) in stdlib_morphisms().iter().enumerate() {
        let (p, r) = stdlib().resolved(name).unwrap();
        let summary = run_trials(&p, &r, 100, 1000 + i as u64).unwrap();
        if let Some((facts, report)) = &summary.first_failure {
            panic!("{name}: {facts:?}\n{report}");
        }
        assert_eq!(summary.passed, 100, "{name}");
    }
}

#[test]
fn translating_back_and_forward_is_the_identity() {
    let mut rng = StdRng::seed_from_u64(3);
    for name in stdlib_morphisms() {
        let (_, r) = stdlib().resolved(&name).unwrap();
        for _ in 0..30 {
            let facts = random_fact_base(&r, &mut rng, 6, 12);
            let back = translate_facts(&facts, &r).unwrap();
            assert_eq!(forward_rename(&back, &r), facts, "{name}");
        }
    }
}

#[test]
fn random_fact_bases_stay_in_bounds() {
    let mut rng = StdRng::seed_from_u64(4);
    let (_, r) = stdlib().resolved("electrical-circuit").unwrap();
    let visible = r.visible_predicates();
    for _ in 0..50 {
        let facts = random_fact_base(&r, &mut rng, 6, 12);
        assert!(facts.len() <= 12);
        let individuals: std::collections::BTreeSet<String> = facts
            .iter()
            .flat_map(|f| f.args.iter().map(|a| a.to_string()))
            .filter(|a| a.starts_with('i') && a[1..].chars().all(|c| c.is_ascii_digit()))
            .collect();
        assert!(individuals.len() <= 6);
        assert!(facts.iter().all(|f| visible.contains(&f.pred)));
    }
}

/// The pattern together with its bridge rules must still stratify.
#[test]
fn bridged_patterns_stratify() {
    for name in stdlib_morphisms() {
        let (p, r) = stdlib().resolved(&name).unwrap();
        let bridge = generate_bridge_rules(&r);
        let mapped_preds = r
            .mapped()
            .filter(|(_, t)| t.kind() == kpc::terms::SymbolKind::Predicate)
            .count();
        assert_eq!(bridge.rules.len(), 2 * mapped_preds, "{name}");
        let mut kb = AssembledKB::from_theory(&name, &p.theory);
        for rule in &bridge.rules {
            kb.add_rule(rule.clone(), ClauseOrigin::Added).unwrap();
        }
        stratify(&kb).unwrap_or_else(|e| panic!("{name}: {e}"));
        evaluate(&kb).unwrap();
    }
}

#[test]
fn demo_circuit_is_equivalent_across_routes() {
    let (p, r) = stdlib().resolved("electrical-circuit").unwrap();
    let sig = apply_morphism(&r).signature;
    let text = std::fs::read_to_string(stdlib().root.join("facts/demo-circuit.kfact")).unwrap();
    let facts: Vec<GroundAtom> = parse_facts_with(&text, &sig)
        .unwrap()
        .into_iter()
        .map(|c| c.head.to_ground().unwrap())
        .collect();
    let report = check_equivalence(&p, &r, &facts).unwrap();
    assert!(report.is_equivalent(), "{report}");
    assert!(report.morphed.contains(&atom("powered(light1).")));
    assert!(report
        .morphed
        .contains(&atom("circuit-to(battery1, light1).")));
    assert!(report.morphed.iter().all(|a| !a.mentions_hidden()));
}

#[test]
fn facts_outside_the_image_are_rejected() {
    let (p, r) = stdlib().resolved("computer-ram").unwrap();
    let facts = facts("expansion_slots(c1, 8).");
    assert!(matches!(
        check_equivalence(&p, &r, &facts),
        Err(OracleError::UntranslatableFact { .. })
    ));
}

#[test]
fn trials_are_reproducible() {
    let (p, r) = stdlib().resolved("computer-slots").unwrap();
    let mut a = StdRng::seed_from_u64(9);
    let mut b = StdRng::seed_from_u64(9);
    for _ in 0..10 {
        assert_eq!(
            random_fact_base(&r, &mut a, 6, 12),
            random_fact_base(&r, &mut b, 6, 12)
        );
    }
    let s1 = run_trials(&p, &r, 20, 5).unwrap();
    let s2 = run_trials(&p, &r, 20, 5).unwrap();
    assert_eq!((s1.trials, s1.passed), (s2.trials, s2.passed));
}
