//! Extensional check that morphing a pattern agrees with keeping the pattern
//! and adding bridge rules between its vocabulary and the target's.
//!
//! Three models are computed over the same target-vocabulary facts:
//!
//! * **A**: the morphed theory plus the facts.
//! * **B**: the facts translated back into pattern vocabulary, evaluated by the
//!   pattern, and the result renamed forward.
//! * **C**: the pattern plus bridge rules `q :- p` and `p :- q` for every mapped
//!   predicate pair, plus the facts.
//!
//! Each is restricted to the morphism's visible target predicates and to
//! atoms that mention no hidden name. Individuals that appear only in the
//! facts are shared by both vocabularies.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use thiserror::Error;

use crate::compose::{AssembledKB, ComposeError, FlatPattern};
use crate::eval::{evaluate, EvalError};
use crate::morphism::{apply_morphism, ResolvedMorphism, Theory};
use crate::terms::{
    Atom, Clause, Decl, GroundAtom, Literal, Name, Signature, SymbolKind, Term, Value,
};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("fact `{fact}` has no counterpart in the pattern: `{pred}` is not the image of a mapped predicate")]
    UntranslatableFact { fact: String, pred: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Compose(#[from] ComposeError),
}

impl OracleError {
    pub fn kind(&self) -> &'static str {
        match self {
            OracleError::UntranslatableFact { .. } => "UntranslatableFact",
            OracleError::Eval(e) => e.kind(),
            OracleError::Compose(e) => e.kind(),
        }
    }
}

/// Rules that make each mapped predicate pair interchangeable, plus the
/// constant correspondence.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BridgeRuleSet {
    pub rules: Vec<Clause>,
    /// Source constant to target constant, for mapped constants only.
    pub constants: BTreeMap<Name, Name>,
}

fn var_atom(pred: &Name, arity: usize) -> Atom {
    Atom {
        pred: pred.clone(),
        args: (1..=arity).map(|i| Term::var(&format!("X{i}"))).collect(),
    }
}

fn bridge_rules_with(r: &ResolvedMorphism, pattern_side: &dyn Fn(&Name) -> Name) -> BridgeRuleSet {
    let mut out = BridgeRuleSet::default();
    for (src, tgt) in r.mapped() {
        match tgt.kind() {
            SymbolKind::Predicate => {
                let p = var_atom(&pattern_side(src), tgt.arity());
                let q = var_atom(tgt.name(), tgt.arity());
                out.rules
                    .push(Clause::new(q.clone(), vec![Literal::Pos(p.clone())]));
                out.rules.push(Clause::new(p, vec![Literal::Pos(q)]));
            }
            _ => {
                out.constants.insert(src.clone(), tgt.name().clone());
            }
        }
    }
    out
}

/// Two rules per mapped predicate; hidden symbols get none. Constants are
/// recorded in the substitution table instead.
pub fn generate_bridge_rules(r: &ResolvedMorphism) -> BridgeRuleSet {
    bridge_rules_with(r, &|n| n.clone())
}

/// Renames target-vocabulary facts back into the pattern's vocabulary.
/// Constants outside the morphism's image are left unchanged.
pub fn translate_facts(
    facts: &[GroundAtom],
    r: &ResolvedMorphism,
) -> Result<Vec<GroundAtom>, OracleError> {
    let inverse = r.inverse();
    let preds = r.visible_predicates();
    facts
        .iter()
        .map(|f| {
            if !preds.contains(&f.pred) {
                return Err(OracleError::UntranslatableFact {
                    fact: f.to_string(),
                    pred: f.pred.to_string(),
                });
            }
            Ok(f.rename_symbols(|n| inverse.get(n).cloned()))
        })
        .collect()
}

/// Renames pattern-vocabulary atoms into the target vocabulary, hidden
/// symbols included.
pub fn forward_rename(atoms: &[GroundAtom], r: &ResolvedMorphism) -> Vec<GroundAtom> {
    atoms
        .iter()
        .map(|a| a.rename_symbols(|n| r.target_of(n).cloned()))
        .collect()
}

/// The three restricted models and their differences.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub morphism: String,
    pub fact_count: usize,
    pub morphed: BTreeSet<GroundAtom>,
    pub translated: BTreeSet<GroundAtom>,
    pub bridged: BTreeSet<GroundAtom>,
}

impl EquivalenceReport {
    pub fn is_equivalent(&self) -> bool {
        self.morphed == self.translated && self.morphed == self.bridged
    }

    /// `(label, atom)` pairs for every atom missing from at least one route.
    /// The label names the routes that contain the atom.
    pub fn differences(&self) -> Vec<(String, GroundAtom)> {
        let all: BTreeSet<&GroundAtom> = self
            .morphed
            .iter()
            .chain(&self.translated)
            .chain(&self.bridged)
            .collect();
        all.into_iter()
            .filter_map(|a| {
                let present: String = [
                    ('A', &self.morphed),
                    ('B', &self.translated),
                    ('C', &self.bridged),
                ]
                .iter()
                .filter(|(_, s)| s.contains(a))
                .map(|(c, _)| *c)
                .collect();
                (present.len() < 3).then(|| (present, a.clone()))
            })
            .collect()
    }
}

impl fmt::Display for EquivalenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "morphism {} over {} facts",
            self.morphism, self.fact_count
        )?;
        writeln!(f, "  A (morphed):    {} atoms", self.morphed.len())?;
        writeln!(f, "  B (translated): {} atoms", self.translated.len())?;
        writeln!(f, "  C (bridged):    {} atoms", self.bridged.len())?;
        let diffs = self.differences();
        if diffs.is_empty() {
            writeln!(f, "  equivalent")
        } else {
            writeln!(f, "  {} atoms differ:", diffs.len())?;
            for (routes, atom) in diffs {
                writeln!(f, "    only in {routes}: {atom}")?;
            }
            Ok(())
        }
    }
}

fn restrict(
    atoms: impl IntoIterator<Item = GroundAtom>,
    preds: &BTreeSet<Name>,
) -> BTreeSet<GroundAtom> {
    atoms
        .into_iter()
        .filter(|a| preds.contains(&a.pred) && !a.mentions_hidden())
        .collect()
}

fn kb_with_facts(
    name: &str,
    theory: &Theory,
    facts: &[GroundAtom],
) -> Result<AssembledKB, OracleError> {
    let mut kb = AssembledKB::from_theory(name, theory);
    for f in facts {
        kb.add_fact(f.clone())?;
    }
    Ok(kb)
}

/// Builds the route-C theory. Pattern predicates whose names are taken by a
/// different target symbol move to a `pattern:` name; pattern constants are
/// replaced by their images, hidden ones by their fresh names.
fn bridged_theory(p: &Theory, r: &ResolvedMorphism) -> Result<Theory, OracleError> {
    let target_names: BTreeSet<Name> = r.mapping.values().map(|s| s.name().clone()).collect();
    let pattern_side = |n: &Name| -> Name {
        if target_names.contains(n) && r.target_of(n) != Some(n) {
            format!("pattern:{n}").into()
        } else {
            n.clone()
        }
    };
    let bridge = bridge_rules_with(r, &pattern_side);
    let mut sig = Signature::new();
    let mut declare = |name: Name, decl: Decl| {
        sig.declare_name(name, decl)
            .map_err(|e| ComposeError::ConflictingDeclaration {
                context: format!("bridged theory for {}", r.name),
                source: e,
            })
    };
    for s in r.mapping.values() {
        declare(s.name().clone(), s.decl())?;
    }
    for s in p.signature.predicates() {
        declare(pattern_side(s.name()), s.decl())?;
    }
    let mut clauses: Vec<Clause> = p
        .clauses
        .iter()
        .map(|c| {
            c.rename_symbols(|n| {
                if p.signature.is_constant(n) {
                    r.target_of(n).cloned()
                } else if p.signature.contains(n) {
                    Some(pattern_side(n))
                } else {
                    None
                }
            })
        })
        .collect();
    clauses.extend(bridge.rules);
    Ok(Theory::new(sig, clauses))
}

/// Computes routes A, B and C for one fact base over the target vocabulary.
pub fn check_equivalence(
    p: &FlatPattern,
    r: &ResolvedMorphism,
    facts: &[GroundAtom],
) -> Result<EquivalenceReport, OracleError> {
    let preds = r.visible_predicates();

    let back = translate_facts(facts, r)?;

    let morphed_theory = apply_morphism(r);
    let a = evaluate(&kb_with_facts(&r.name, &morphed_theory, facts)?)?;

    let b = evaluate(&kb_with_facts(&p.name, &p.theory, &back)?)?;
    let b_forward: Vec<GroundAtom> = b.atoms().iter().cloned().collect();

    let c = evaluate(&kb_with_facts(
        &p.name,
        &bridged_theory(&p.theory, r)?,
        facts,
    )?)?;

    Ok(EquivalenceReport {
        morphism: r.name.clone(),
        fact_count: facts.len(),
        morphed: restrict(a.into_atoms(), &preds),
        translated: restrict(forward_rename(&b_forward, r), &preds),
        bridged: restrict(c.into_atoms(), &preds),
    })
}

/// Where random values for one argument position come from.
#[derive(Clone, Debug, Default)]
struct PositionPool {
    numeric: bool,
    constants: BTreeSet<Name>,
}

/// Looks at how the pattern uses each argument position: positions whose
/// variables meet arithmetic or comparisons get integers, positions that
/// hold constants get those constants as well as individuals.
fn position_pools(r: &ResolvedMorphism) -> BTreeMap<(Name, usize), PositionPool> {
    let mut pools: BTreeMap<(Name, usize), PositionPool> = BTreeMap::new();
    for clause in &r.source.clauses {
        let mut numeric_vars: BTreeSet<&Name> = BTreeSet::new();
        for lit in &clause.body {
            if matches!(lit, Literal::Arith { .. } | Literal::Compare { .. }) {
                for t in lit.terms() {
                    if let Term::Var(v) = t {
                        numeric_vars.insert(v);
                    }
                }
            }
        }
        for atom in clause.atoms() {
            for (i, t) in atom.args.iter().enumerate() {
                let pool = pools.entry((atom.pred.clone(), i)).or_default();
                match t {
                    Term::Int(_) => pool.numeric = true,
                    Term::Var(v) if numeric_vars.contains(v) => pool.numeric = true,
                    Term::Const(c) => {
                        if let Some(t) = r.target_of(c).filter(|_| !r.hidden.contains(c)) {
                            pool.constants.insert(t.clone());
                        }
                    }
                    Term::Var(_) => {}
                }
            }
        }
    }
    pools
}

/// A random fact base over the morphism's visible target predicates, with
/// at most `max_individuals` individuals named `i0`, `i1`, ... and at most
/// `max_facts` facts.
pub fn random_fact_base(
    r: &ResolvedMorphism,
    rng: &mut impl Rng,
    max_individuals: usize,
    max_facts: usize,
) -> Vec<GroundAtom> {
    let preds: Vec<(Name, Name, usize)> = r
        .mapped()
        .filter(|(_, t)| t.kind() == SymbolKind::Predicate)
        .map(|(s, t)| (s.clone(), t.name().clone(), t.arity()))
        .collect();
    if preds.is_empty() || max_individuals == 0 {
        return Vec::new();
    }
    let pools = position_pools(r);
    let n_ind = rng.random_range(1..=max_individuals);
    let n_facts = rng.random_range(0..=max_facts);
    let mut out: BTreeSet<GroundAtom> = BTreeSet::new();
    for _ in 0..n_facts {
        let (src, tgt, arity) = &preds[rng.random_range(0..preds.len())];
        let args = (0..*arity)
            .map(|i| {
                let pool = pools.get(&(src.clone(), i)).cloned().unwrap_or_default();
                if pool.numeric {
                    Value::Int(rng.random_range(0..=12))
                } else if !pool.constants.is_empty() && rng.random_bool(0.5) {
                    let k = rng.random_range(0..pool.constants.len());
                    Value::Sym(pool.constants.iter().nth(k).expect("in range").clone())
                } else {
                    Value::Sym(format!("i{}", rng.random_range(0..n_ind)).into())
                }
            })
            .collect();
        out.insert(GroundAtom {
            pred: tgt.clone(),
            args,
        });
    }
    out.into_iter().collect()
}

/// Outcome of a batch of randomized equivalence checks.
#[derive(Clone, Debug)]
pub struct TrialSummary {
    pub trials: usize,
    pub passed: usize,
    /// The first failing fact base and its report.
    pub first_failure: Option<(Vec<GroundAtom>, EquivalenceReport)>,
}

impl TrialSummary {
    pub fn all_passed(&self) -> bool {
        self.passed == self.trials
    }
}

/// Runs `trials` independent checks over random fact bases (at most 6
/// individuals and 12 facts each). The same seed gives the same fact bases.
pub fn run_trials(
    p: &FlatPattern,
    r: &ResolvedMorphism,
    trials: usize,
    seed: u64,
) -> Result<TrialSummary, OracleError> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut summary = TrialSummary {
        trials,
        passed: 0,
        first_failure: None,
    };
    for _ in 0..trials {
        let facts = random_fact_base(r, &mut rng, 6, 12);
        let report = check_equivalence(p, r, &facts)?;
        if report.is_equivalent() {
            summary.passed += 1;
        } else if summary.first_failure.is_none() {
            summary.first_failure = Some((facts, report));
        }
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morphism::complete_morphism;
    use crate::syntax::{parse_facts, parse_morphism, parse_pattern};

    const CONTAINER: &str = r#"
        pattern container {
          signature { concept container pred capacity/2, occupied_space/2, free_space/2, isa/2 }
          axioms {
            free_space(X, F) :- isa(X, container), capacity(X, C), occupied_space(X, O), F is C - O.
          }
        }"#;

    const SLOTS: &str = "morphism slots from container {
        map { container -> computer capacity -> expansion_slots
              occupied_space -> occupied_slots free_space -> free_slots isa -> isa }
    }";

    fn flat(text: &str) -> FlatPattern {
        let p = parse_pattern(text).unwrap();
        FlatPattern::from_theory(&p.name, Theory::new(p.signature, p.clauses))
    }

    fn resolved(p: &FlatPattern, m: &str) -> ResolvedMorphism {
        complete_morphism(&parse_morphism(m).unwrap(), p, 0)
    }

    fn facts(text: &str) -> Vec<GroundAtom> {
        parse_facts(text)
            .unwrap()
            .into_iter()
            .map(|c| c.head.to_ground().unwrap())
            .collect()
    }

    #[test]
    fn bridge_rules_for_slots() {
        let p = flat(CONTAINER);
        let r = resolved(&p, SLOTS);
        let b = generate_bridge_rules(&r);
        let text: Vec<String> = b.rules.iter().map(|c| c.to_string()).collect();
        assert!(text.contains(&"expansion_slots(X1, X2) :- capacity(X1, X2).".to_string()));
        assert!(text.contains(&"capacity(X1, X2) :- expansion_slots(X1, X2).".to_string()));
        assert!(text.contains(&"free_slots(X1, X2) :- free_space(X1, X2).".to_string()));
        assert_eq!(b.rules.len(), 8);
        assert_eq!(
            b.constants.get("container").map(|n| n.as_ref()),
            Some("computer")
        );
    }

    #[test]
    fn identity_bridges_are_tautologies() {
        let p = flat(CONTAINER);
        let r = ResolvedMorphism::identity("id", "container", &p.theory);
        for c in generate_bridge_rules(&r).rules {
            assert_eq!(c.head, *c.body[0].atom().unwrap());
        }
    }

    #[test]
    fn all_hidden_gives_no_rules() {
        let p = flat(CONTAINER);
        let r = resolved(&p, "morphism nothing from container { map { } }");
        let b = generate_bridge_rules(&r);
        assert!(b.rules.is_empty());
        assert!(b.constants.is_empty());
    }

    #[test]
    fn translation_round_trips() {
        let p = flat(CONTAINER);
        let r = resolved(&p, SLOTS);
        let fs = facts("expansion_slots(c1, 8). isa(c1, computer).");
        let back = translate_facts(&fs, &r).unwrap();
        assert_eq!(back, facts("capacity(c1, 8). isa(c1, container)."));
        assert_eq!(forward_rename(&back, &r), fs);
        let err = translate_facts(&facts("colour(c1, red)."), &r).unwrap_err();
        assert!(matches!(err, OracleError::UntranslatableFact { .. }));
    }

    #[test]
    fn routes_agree_on_the_worked_example() {
        let p = flat(CONTAINER);
        let r = resolved(&p, SLOTS);
        let fs = facts("expansion_slots(c1, 8). occupied_slots(c1, 3). isa(c1, computer).");
        let report = check_equivalence(&p, &r, &fs).unwrap();
        assert!(report.is_equivalent(), "{report}");
        assert!(report.morphed.contains(&GroundAtom::new(
            "free_slots",
            vec![Value::sym("c1"), Value::Int(5)]
        )));
        let empty = check_equivalence(&p, &r, &[]).unwrap();
        assert!(empty.is_equivalent());
        assert!(empty.morphed.is_empty());
    }

    #[test]
    fn swapped_names_do_not_collide() {
        let p = flat(
            "pattern sw { signature { pred a/1, b/1, c/1 }
               axioms { b(X) :- a(X). c(X) :- a(X), \\+ b(X). } }",
        );
        let r = resolved(&p, "morphism swap from sw { map { a -> b b -> a c -> c } }");
        let fs = facts("b(x). a(y).");
        let report = check_equivalence(&p, &r, &fs).unwrap();
        assert!(report.is_equivalent(), "{report}");
    }

    #[test]
    fn random_trials_pass_and_are_reproducible() {
        let p = flat(CONTAINER);
        let r = resolved(&p, SLOTS);
        let s = run_trials(&p, &r, 30, 7).unwrap();
        assert!(s.all_passed());
        let mut r1 = StdRng::seed_from_u64(3);
        let mut r2 = StdRng::seed_from_u64(3);
        assert_eq!(
            random_fact_base(&r, &mut r1, 6, 12),
            random_fact_base(&r, &mut r2, 6, 12)
        );
    }

    #[test]
    fn numeric_positions_get_integers() {
        let p = flat(CONTAINER);
        let r = resolved(&p, SLOTS);
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..20 {
            for f in random_fact_base(&r, &mut rng, 6, 12) {
                if f.pred.as_ref() == "expansion_slots" {
                    assert!(matches!(f.args[1], Value::Int(_)));
                    assert!(matches!(f.args[0], Value::Sym(_)));
                }
            }
        }
    }
}
