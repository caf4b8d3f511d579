//! A deliberately plain evaluator used to cross-check the semi-naive one.
//! It shares no matching code with it: levels are found by relaxation,
//! and each pass re-derives everything from the full atom set.

use std::collections::{BTreeMap, BTreeSet};

use super::{EvalError, Model};
use crate::compose::AssembledKB;
use crate::terms::{ArithExpr, Atom, Clause, GroundAtom, Literal, Name, Term, Value};

type Subst = Vec<(Name, Value)>;

fn lookup<'a>(s: &'a Subst, v: &str) -> Option<&'a Value> {
    s.iter().find(|(k, _)| k.as_ref() == v).map(|(_, x)| x)
}

fn value(t: &Term, s: &Subst) -> Result<Value, EvalError> {
    match t {
        Term::Var(v) => lookup(s, v)
            .cloned()
            .ok_or_else(|| EvalError::ArithmeticOnUnbound(v.to_string())),
        Term::Const(c) => Ok(Value::Sym(c.clone())),
        Term::Int(i) => Ok(Value::Int(*i)),
    }
}

fn arith(e: &ArithExpr, s: &Subst) -> Result<Option<i64>, EvalError> {
    match e {
        ArithExpr::Term(t) => Ok(match value(t, s)? {
            Value::Int(i) => Some(i),
            Value::Sym(_) => None,
        }),
        ArithExpr::Binary(op, l, r) => {
            let (Some(a), Some(b)) = (arith(l, s)?, arith(r, s)?) else {
                return Ok(None);
            };
            Ok(op.apply(a, b))
        }
    }
}

fn unify(atom: &Atom, fact: &GroundAtom, s: &Subst) -> Option<Subst> {
    if atom.pred != fact.pred || atom.args.len() != fact.args.len() {
        return None;
    }
    let mut s = s.clone();
    for (t, v) in atom.args.iter().zip(&fact.args) {
        match t {
            Term::Var(name) => match lookup(&s, name) {
                Some(x) if x != v => return None,
                Some(_) => {}
                None => s.push((name.clone(), v.clone())),
            },
            other => {
                if value(other, &s).ok().as_ref() != Some(v) {
                    return None;
                }
            }
        }
    }
    Some(s)
}

fn instantiate(atom: &Atom, s: &Subst) -> Result<GroundAtom, EvalError> {
    Ok(GroundAtom {
        pred: atom.pred.clone(),
        args: atom
            .args
            .iter()
            .map(|t| value(t, s))
            .collect::<Result<_, _>>()?,
    })
}

fn substitutions(
    body: &[Literal],
    db: &BTreeSet<GroundAtom>,
    s: Subst,
) -> Result<Vec<Subst>, EvalError> {
    let Some((lit, rest)) = body.split_first() else {
        return Ok(vec![s]);
    };
    let mut out = Vec::new();
    match lit {
        Literal::Pos(a) => {
            for fact in db {
                if let Some(s2) = unify(a, fact, &s) {
                    out.extend(substitutions(rest, db, s2)?);
                }
            }
        }
        Literal::Neg(a) => {
            if !db.contains(&instantiate(a, &s)?) {
                out.extend(substitutions(rest, db, s)?);
            }
        }
        Literal::Arith { result, expr } => {
            if let Some(n) = arith(expr, &s)? {
                let n = Value::Int(n);
                match result {
                    Term::Var(v) if lookup(&s, v).is_none() => {
                        let mut s2 = s;
                        s2.push((v.clone(), n));
                        out.extend(substitutions(rest, db, s2)?);
                    }
                    t => {
                        if value(t, &s)? == n {
                            out.extend(substitutions(rest, db, s)?);
                        }
                    }
                }
            }
        }
        Literal::Compare { left, op, right } => {
            if op.holds(&value(left, &s)?, &value(right, &s)?) {
                out.extend(substitutions(rest, db, s)?);
            }
        }
    }
    Ok(out)
}

/// Level of each predicate: a head is at least as high as its positive body
/// predicates and strictly higher than its negated ones.
fn levels(kb: &AssembledKB) -> Result<BTreeMap<Name, usize>, EvalError> {
    let mut level: BTreeMap<Name, usize> = BTreeMap::new();
    for r in &kb.rules {
        for p in r.predicates() {
            level.insert(p.clone(), 0);
        }
    }
    let bound = level.len();
    loop {
        let mut changed = false;
        for r in &kb.rules {
            let mut need = 0;
            for lit in &r.body {
                match lit {
                    Literal::Pos(a) => need = need.max(level[&a.pred]),
                    Literal::Neg(a) => need = need.max(level[&a.pred] + 1),
                    _ => {}
                }
            }
            if need > level[&r.head.pred] {
                if need > bound {
                    return Err(EvalError::UnstratifiableNegation(vec![r.head.pred.clone()]));
                }
                level.insert(r.head.pred.clone(), need);
                changed = true;
            }
        }
        if !changed {
            return Ok(level);
        }
    }
}

/// Naive stratified evaluation. Returns the same atoms as the semi-naive
/// evaluator; the model carries no provenance.
pub fn evaluate_naive(kb: &AssembledKB) -> Result<Model, EvalError> {
    let level = levels(kb)?;
    let height = level.values().max().map_or(0, |m| m + 1);
    let mut db: BTreeSet<GroundAtom> = kb.facts.iter().cloned().collect();
    for l in 0..height {
        let rules: Vec<&Clause> = kb
            .rules
            .iter()
            .filter(|r| level[&r.head.pred] == l)
            .collect();
        loop {
            let mut fresh = Vec::new();
            for r in &rules {
                for s in substitutions(&r.body, &db, Vec::new())? {
                    let head = instantiate(&r.head, &s)?;
                    if !db.contains(&head) {
                        fresh.push(head);
                    }
                }
            }
            if fresh.is_empty() {
                break;
            }
            db.extend(fresh);
        }
    }
    let mut strata: Vec<Vec<Name>> = vec![Vec::new(); height];
    for (p, l) in level {
        strata[l].push(p);
    }
    Ok(Model::new(db, strata, kb.signature.clone(), None))
}
