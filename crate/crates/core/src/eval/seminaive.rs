use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use super::{
    apply_builtin, ground, match_atom, rules_by_stratum, stratify, Bindings, Derivation, EvalError,
    EvalOptions, Model,
};
use crate::compose::AssembledKB;
use crate::terms::{Clause, GroundAtom, Literal, Name, Value};

/// Tuples per predicate. Each tuple is stored once.
#[derive(Default)]
struct Store {
    rows: HashMap<Name, Vec<Vec<Value>>>,
    seen: HashSet<GroundAtom>,
}

impl Store {
    fn insert(&mut self, a: GroundAtom) -> bool {
        if self.seen.contains(&a) {
            return false;
        }
        self.rows
            .entry(a.pred.clone())
            .or_default()
            .push(a.args.clone());
        self.seen.insert(a);
        true
    }

    fn contains(&self, a: &GroundAtom) -> bool {
        self.seen.contains(a)
    }

    fn rows(&self, pred: &Name) -> &[Vec<Value>] {
        self.rows.get(pred).map_or(&[], Vec::as_slice)
    }
}

/// Which tuples a positive literal is matched against.
#[derive(Clone, Copy)]
enum Source {
    /// Everything known before the current round.
    Old,
    /// Atoms first derived in the previous round.
    Delta,
    /// `Old` and `Delta` together.
    Full,
}

/// Receives each complete match of a rule body with its premises.
type Emit<'a> = dyn FnMut(&Bindings, &[GroundAtom]) -> Result<(), EvalError> + 'a;

struct Round<'a> {
    old: &'a Store,
    delta: &'a Store,
}

impl Round<'_> {
    fn rows<'s>(&'s self, pred: &Name, src: Source) -> impl Iterator<Item = &'s Vec<Value>> + 's {
        let (a, b): (&[Vec<Value>], &[Vec<Value>]) = match src {
            Source::Old => (self.old.rows(pred), &[]),
            Source::Delta => (self.delta.rows(pred), &[]),
            Source::Full => (self.old.rows(pred), self.delta.rows(pred)),
        };
        a.iter().chain(b.iter())
    }

    fn holds(&self, a: &GroundAtom) -> bool {
        self.old.contains(a) || self.delta.contains(a)
    }

    /// Enumerates the body left to right; `emit` receives the final
    /// bindings and the matched positive atoms.
    fn solve(
        &self,
        body: &[Literal],
        sources: &[Source],
        b: Bindings,
        premises: &mut Vec<GroundAtom>,
        emit: &mut Emit<'_>,
    ) -> Result<(), EvalError> {
        let Some((lit, rest)) = body.split_first() else {
            return emit(&b, premises);
        };
        let rest_sources = &sources[1..];
        match lit {
            Literal::Pos(a) => {
                for row in self.rows(&a.pred, sources[0]) {
                    if let Some(nb) = match_atom(a, row, &b) {
                        premises.push(GroundAtom {
                            pred: a.pred.clone(),
                            args: row.clone(),
                        });
                        let r = self.solve(rest, rest_sources, nb, premises, emit);
                        premises.pop();
                        r?;
                    }
                }
                Ok(())
            }
            Literal::Neg(a) => {
                if self.holds(&ground(a, &b)?) {
                    Ok(())
                } else {
                    self.solve(rest, rest_sources, b, premises, emit)
                }
            }
            builtin => match apply_builtin(builtin, b)? {
                Some(nb) => self.solve(rest, rest_sources, nb, premises, emit),
                None => Ok(()),
            },
        }
    }
}

type Derivations = BTreeMap<GroundAtom, BTreeSet<Derivation>>;

/// Evaluates the KB to its stratified least fixpoint.
pub fn evaluate(kb: &AssembledKB) -> Result<Model, EvalError> {
    evaluate_with(kb, &EvalOptions::default())
}

/// Semi-naive evaluation, stratum by stratum. Within a stratum each round
/// only considers rule instances that use at least one atom first derived
/// in the previous round.
pub fn evaluate_with(kb: &AssembledKB, opts: &EvalOptions) -> Result<Model, EvalError> {
    let report = stratify(kb)?;
    let mut old = Store::default();
    for f in &kb.facts {
        old.insert(f.clone());
    }
    let mut derivations: Option<Derivations> = opts.provenance.then(BTreeMap::new);

    for (preds, rule_ids) in rules_by_stratum(&report, &kb.rules) {
        if rule_ids.is_empty() {
            continue;
        }
        let rules: Vec<(usize, &Clause)> = rule_ids.iter().map(|&i| (i, &kb.rules[i])).collect();

        // First round: every rule against everything known.
        let empty = Store::default();
        let mut delta = Store::default();
        {
            let round = Round {
                old: &old,
                delta: &empty,
            };
            for &(idx, rule) in &rules {
                let sources = vec![Source::Old; rule.body.len()];
                fire(&round, idx, rule, &sources, &mut delta, &mut derivations)?;
            }
        }

        while !delta.seen.is_empty() {
            let mut next = Store::default();
            {
                let round = Round {
                    old: &old,
                    delta: &delta,
                };
                for &(idx, rule) in &rules {
                    let recursive: Vec<usize> = rule
                        .body
                        .iter()
                        .enumerate()
                        .filter(|(_, l)| matches!(l, Literal::Pos(a) if preds.contains(&a.pred)))
                        .map(|(i, _)| i)
                        .collect();
                    for &i in &recursive {
                        if delta
                            .rows(&rule.body[i].atom().expect("positive").pred)
                            .is_empty()
                        {
                            continue;
                        }
                        let sources: Vec<Source> = (0..rule.body.len())
                            .map(|j| {
                                if j == i {
                                    Source::Delta
                                } else if j < i && recursive.contains(&j) {
                                    Source::Old
                                } else {
                                    Source::Full
                                }
                            })
                            .collect();
                        fire(&round, idx, rule, &sources, &mut next, &mut derivations)?;
                    }
                }
            }
            for a in std::mem::replace(&mut delta, next).seen {
                old.insert(a);
            }
        }
    }

    Ok(Model::new(
        old.seen.into_iter().collect(),
        report.strata,
        kb.signature.clone(),
        derivations,
    ))
}

/// Runs one rule and adds heads not already known to `out`.
fn fire(
    round: &Round<'_>,
    idx: usize,
    rule: &Clause,
    sources: &[Source],
    out: &mut Store,
    derivations: &mut Option<Derivations>,
) -> Result<(), EvalError> {
    let mut premises = Vec::new();
    round.solve(
        &rule.body,
        sources,
        Bindings::new(),
        &mut premises,
        &mut |b, prem| {
            let head = ground(&rule.head, b)?;
            if let Some(d) = derivations.as_mut() {
                d.entry(head.clone()).or_default().insert(Derivation {
                    rule: idx,
                    premises: prem.to_vec(),
                });
            }
            if !round.holds(&head) {
                out.insert(head);
            }
            Ok(())
        },
    )
}
