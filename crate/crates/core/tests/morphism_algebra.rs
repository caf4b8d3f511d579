mod common;

use std::collections::BTreeSet;

use common::*;
use kpc::compose::{assemble_kb, FlatPattern, PatternLibrary};
use kpc::eval::evaluate;
use kpc::morphism::{apply_morphism, eliminate_dead_axioms, ResolvedMorphism};
use kpc::syntax::{parse_manifest, parse_morphism, parse_pattern};
use kpc::terms::{is_hidden_name, Name};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn identity_is_a_fixpoint(seed in any::<u64>()) {
        let (p, _) = random_pattern(&mut rng(seed), "p");
        let id = ResolvedMorphism::identity("id", "p", &p.theory);
        prop_assert_eq!(apply_morphism(&id), p.theory);
    }

    #[test]
    fn renaming_composes(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let (p, _) = random_pattern(&mut rng, "p");
        let r1 = random_renaming(&mut rng, &p, "m1", 0, 0.2);
        let mid = FlatPattern::from_theory("mid", apply_morphism(&r1));
        let r2 = random_renaming(&mut rng, &mid, "m2", 1, 0.0);
        prop_assert_eq!(apply_morphism(&r1.compose(&r2)), apply_morphism(&r2));
    }

    #[test]
    fn renaming_keeps_clause_shape(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let (p, _) = random_pattern(&mut rng, "p");
        let r = random_renaming(&mut rng, &p, "m", 0, 0.3);
        let out = apply_morphism(&r);
        prop_assert_eq!(out.clauses.len(), p.theory.clauses.len());
        for (a, b) in p.theory.clauses.iter().zip(&out.clauses) {
            prop_assert_eq!(a.body.len(), b.body.len());
            let arities = |c: &kpc::terms::Clause| c.atoms().map(|x| x.arity()).collect::<Vec<_>>();
            prop_assert_eq!(arities(a), arities(b));
        }
        prop_assert_eq!(out.signature.len(), p.theory.signature.len());
    }

    #[test]
    fn repeated_applications_hide_disjointly(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let (p, _) = random_pattern(&mut rng, "p");
        let a = random_renaming(&mut rng.clone(), &p, "m", 0, 0.5);
        let b = random_renaming(&mut rng, &p, "m", 1, 0.5);
        let hidden = |r: &ResolvedMorphism| -> BTreeSet<Name> {
            r.hidden.iter().map(|s| r.target_of(s).unwrap().clone()).collect()
        };
        prop_assert!(hidden(&a).is_disjoint(&hidden(&b)));
        prop_assert!(hidden(&a).is_disjoint(&a.visible_targets()));
        prop_assert!(hidden(&b).is_disjoint(&a.visible_targets()));
    }

    /// Dropping clauses that cannot reach a visible predicate leaves the
    /// visible part of every model alone.
    #[test]
    fn dead_axiom_elimination_is_sound(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let (p, preds) = random_pattern(&mut rng, "p");
        let visible: BTreeSet<Name> = preds
            .iter()
            .filter(|_| rng.random_bool(0.4))
            .map(|(n, _)| Name::from(n.as_str()))
            .collect();
        let pruned = eliminate_dead_axioms(&p.theory, &visible);
        let fs = random_facts(&mut rng, &preds, 3, 8);
        prop_assert_eq!(
            model_of("full", &p.theory, &fs).restrict(&visible),
            model_of("pruned", &pruned, &fs).restrict(&visible)
        );
    }
}

#[test]
fn elimination_extremes() {
    let mut rng = rng(7);
    for _ in 0..20 {
        let (p, _) = random_pattern(&mut rng, "p");
        let all: BTreeSet<Name> = p.theory.signature.names().cloned().collect();
        assert_eq!(eliminate_dead_axioms(&p.theory, &all), p.theory);
        assert!(eliminate_dead_axioms(&p.theory, &BTreeSet::new())
            .clauses
            .is_empty());
    }
}

/// One morphism applied twice in one KB: two rule copies, distinct hidden
/// names, one shared visible vocabulary.
#[test]
fn same_morphism_twice_in_one_kb() {
    let mut lib = PatternLibrary::new();
    lib.add_pattern(
        parse_pattern(
            "pattern box {
               uses base
               signature { concept box pred size/2, used/2, left/2, lid/2 }
               axioms {
                 left(B, L) :- isa(B, box), size(B, S), used(B, U), L is S - U.
                 lid(B, B) :- isa(B, box), size(B, S).
               }
             }",
        )
        .unwrap(),
    )
    .unwrap();
    lib.add_pattern(parse_pattern("pattern base { signature { pred isa/2 } axioms { } }").unwrap())
        .unwrap();
    lib.add_morphism(
        parse_morphism(
            "morphism crate-box from box {
               map { box -> crate size -> capacity used -> load left -> room isa -> isa }
             }",
        )
        .unwrap(),
    )
    .unwrap();
    let man = parse_manifest("kb depot { apply crate-box apply crate-box }").unwrap();
    let kb = assemble_kb(&man, &lib).unwrap();
    assert_eq!(kb.rules.len(), 4);
    let hidden: Vec<&str> = kb
        .signature
        .names()
        .map(|n| n.as_ref())
        .filter(|n| is_hidden_name(n))
        .collect();
    assert_eq!(hidden, ["hidden:crate-box:0:lid", "hidden:crate-box:1:lid"]);
    let mut kb = kb;
    kb.load_facts_text("isa(k1, crate). capacity(k1, 10). load(k1, 4).")
        .unwrap();
    let m = evaluate(&kb).unwrap();
    assert_eq!(
        m.atoms_of("room")
            .map(|a| a.to_string())
            .collect::<Vec<_>>(),
        ["room(k1, 6)"]
    );
}

#[test]
fn renaming_then_inverse_restores_the_pattern() {
    let mut rng = rng(11);
    for _ in 0..50 {
        let (p, _) = random_pattern(&mut rng, "p");
        let r = random_renaming(&mut rng, &p, "m", 0, 0.0);
        let image = FlatPattern::from_theory("image", apply_morphism(&r));
        let back = kpc::syntax::MorphismSource {
            name: "back".into(),
            source: "image".into(),
            summary: None,
            pairs: r
                .inverse()
                .into_iter()
                .map(|(t, s)| (t.to_string(), s.to_string()))
                .collect(),
            hides: Vec::new(),
        };
        let inv = kpc::morphism::complete_morphism(&back, &image, 0);
        assert_eq!(apply_morphism(&inv), p.theory);
    }
}
