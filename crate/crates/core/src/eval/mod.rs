//! Bottom-up evaluation: stratification, a semi-naive evaluator, a naive
//! reference evaluator, conjunctive queries and integrity checks.

mod naive;
mod seminaive;
mod stratify;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::compose::AssembledKB;
use crate::terms::{
    is_hidden_name, ArithExpr, Atom, Clause, GroundAtom, Literal, Name, Signature, Term, Value,
};

pub use naive::evaluate_naive;
pub use seminaive::{evaluate, evaluate_with};
pub use stratify::{stratify_rules, StratificationReport};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unstratifiable negation through {}", .0.iter().map(|n| n.as_ref()).collect::<Vec<_>>().join(" -> "))]
    UnstratifiableNegation(Vec<Name>),
    #[error("variable `{0}` is unbound where a value is needed")]
    ArithmeticOnUnbound(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("query variable `{0}` is not bound by a positive goal before use")]
    UnsafeQuery(String),
}

impl EvalError {
    pub fn kind(&self) -> &'static str {
        match self {
            EvalError::UnstratifiableNegation(_) => "UnstratifiableNegation",
            EvalError::ArithmeticOnUnbound(_) => "ArithmeticOnUnbound",
            EvalError::UnknownPredicate(_) => "UnknownPredicate",
            EvalError::UnsafeQuery(_) => "UnsafeQuery",
        }
    }
}

pub fn stratify(kb: &AssembledKB) -> Result<StratificationReport, EvalError> {
    stratify_rules(&kb.signature, &kb.rules)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct EvalOptions {
    /// Record every rule instance that derives each atom.
    pub provenance: bool,
}

/// One way an atom was derived: a rule (index into the KB's rules) and the
/// ground positive body atoms it used.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Derivation {
    pub rule: usize,
    pub premises: Vec<GroundAtom>,
}

/// The stratified least fixpoint of a KB.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Model {
    atoms: BTreeSet<GroundAtom>,
    strata: Vec<Vec<Name>>,
    signature: Signature,
    derivations: Option<BTreeMap<GroundAtom, BTreeSet<Derivation>>>,
}

/// Everything that any derivation of an atom depends on, transitively.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Support {
    pub rules: BTreeSet<usize>,
    pub atoms: BTreeSet<GroundAtom>,
}

impl Model {
    pub(crate) fn new(
        atoms: BTreeSet<GroundAtom>,
        strata: Vec<Vec<Name>>,
        signature: Signature,
        derivations: Option<BTreeMap<GroundAtom, BTreeSet<Derivation>>>,
    ) -> Self {
        Model {
            atoms,
            strata,
            signature,
            derivations,
        }
    }

    pub fn atoms(&self) -> &BTreeSet<GroundAtom> {
        &self.atoms
    }

    pub fn into_atoms(self) -> BTreeSet<GroundAtom> {
        self.atoms
    }

    pub fn contains(&self, atom: &GroundAtom) -> bool {
        self.atoms.contains(atom)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn strata(&self) -> &[Vec<Name>] {
        &self.strata
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    /// Atoms of one predicate, in order.
    pub fn atoms_of<'a>(&'a self, pred: &'a str) -> impl Iterator<Item = &'a GroundAtom> + 'a {
        let start = GroundAtom {
            pred: pred.into(),
            args: Vec::new(),
        };
        self.atoms
            .range(start..)
            .take_while(move |a| a.pred.as_ref() == pred)
    }

    /// Atoms over the given predicates, skipping any that mention hidden names.
    pub fn restrict(&self, preds: &BTreeSet<Name>) -> BTreeSet<GroundAtom> {
        self.atoms
            .iter()
            .filter(|a| preds.contains(&a.pred) && !a.mentions_hidden())
            .cloned()
            .collect()
    }

    /// Atoms with no hidden predicate or constant.
    pub fn visible(&self) -> BTreeSet<GroundAtom> {
        self.atoms
            .iter()
            .filter(|a| !a.mentions_hidden())
            .cloned()
            .collect()
    }

    /// Recorded derivations, if evaluated with provenance. Facts have none.
    pub fn derivations(&self, atom: &GroundAtom) -> Option<&BTreeSet<Derivation>> {
        self.derivations.as_ref()?.get(atom)
    }

    pub fn has_provenance(&self) -> bool {
        self.derivations.is_some()
    }

    /// Union over all derivation trees of `atom`: every rule fired and every
    /// atom used, including `atom` itself. Requires provenance.
    pub fn support(&self, atom: &GroundAtom) -> Option<Support> {
        let derivations = self.derivations.as_ref()?;
        let mut support = Support::default();
        let mut stack = vec![atom.clone()];
        while let Some(a) = stack.pop() {
            if !support.atoms.insert(a.clone()) {
                continue;
            }
            for d in derivations.get(&a).into_iter().flatten() {
                support.rules.insert(d.rule);
                stack.extend(d.premises.iter().cloned());
            }
        }
        Some(support)
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.atoms {
            writeln!(f, "{a}.")?;
        }
        Ok(())
    }
}

pub(crate) type Bindings = BTreeMap<Name, Value>;

pub(crate) fn term_value(t: &Term, b: &Bindings) -> Result<Value, EvalError> {
    match t {
        Term::Var(v) => b
            .get(v)
            .cloned()
            .ok_or_else(|| EvalError::ArithmeticOnUnbound(v.to_string())),
        Term::Const(c) => Ok(Value::Sym(c.clone())),
        Term::Int(i) => Ok(Value::Int(*i)),
    }
}

/// `Ok(None)` when the expression has no integer value (a non-integer
/// operand, overflow, or division by zero); the literal then fails.
pub(crate) fn eval_expr(e: &ArithExpr, b: &Bindings) -> Result<Option<i64>, EvalError> {
    Ok(match e {
        ArithExpr::Term(t) => match term_value(t, b)? {
            Value::Int(i) => Some(i),
            Value::Sym(_) => None,
        },
        ArithExpr::Binary(op, l, r) => match (eval_expr(l, b)?, eval_expr(r, b)?) {
            (Some(x), Some(y)) => op.apply(x, y),
            _ => None,
        },
    })
}

/// Extends `b` so that `atom` matches `fact`, or returns `None`.
pub(crate) fn match_atom(atom: &Atom, args: &[Value], b: &Bindings) -> Option<Bindings> {
    if atom.args.len() != args.len() {
        return None;
    }
    let mut out: Option<Bindings> = None;
    for (t, v) in atom.args.iter().zip(args) {
        match t {
            Term::Const(c) => {
                if !matches!(v, Value::Sym(s) if s == c) {
                    return None;
                }
            }
            Term::Int(i) => {
                if *v != Value::Int(*i) {
                    return None;
                }
            }
            Term::Var(name) => {
                let current = out.as_ref().unwrap_or(b);
                match current.get(name) {
                    Some(bound) if bound != v => return None,
                    Some(_) => {}
                    None => {
                        out.get_or_insert_with(|| b.clone())
                            .insert(name.clone(), v.clone());
                    }
                }
            }
        }
    }
    Some(out.unwrap_or_else(|| b.clone()))
}

pub(crate) fn ground(atom: &Atom, b: &Bindings) -> Result<GroundAtom, EvalError> {
    Ok(GroundAtom {
        pred: atom.pred.clone(),
        args: atom
            .args
            .iter()
            .map(|t| term_value(t, b))
            .collect::<Result<_, _>>()?,
    })
}

/// Applies a non-atom literal (arithmetic or comparison) to a binding.
pub(crate) fn apply_builtin(lit: &Literal, b: Bindings) -> Result<Option<Bindings>, EvalError> {
    match lit {
        Literal::Arith { result, expr } => {
            let Some(v) = eval_expr(expr, &b)? else {
                return Ok(None);
            };
            let v = Value::Int(v);
            match result {
                Term::Var(name) => match b.get(name) {
                    Some(bound) => Ok((*bound == v).then_some(b)),
                    None => {
                        let mut b = b;
                        b.insert(name.clone(), v);
                        Ok(Some(b))
                    }
                },
                other => Ok((term_value(other, &b)? == v).then_some(b)),
            }
        }
        Literal::Compare { left, op, right } => {
            let l = term_value(left, &b)?;
            let r = term_value(right, &b)?;
            Ok(op.holds(&l, &r).then_some(b))
        }
        Literal::Pos(_) | Literal::Neg(_) => unreachable!("atoms are matched by the evaluator"),
    }
}

/// One answer: query variables in order of first occurrence with their values.
pub type Answer = Vec<(Name, Value)>;

/// All substitutions for the goal's variables under which every positive
/// goal holds in the model, every negated goal does not, and every builtin
/// succeeds. Answers are deduplicated and sorted by their values.
pub fn query(m: &Model, goal: &[Literal]) -> Result<Vec<Answer>, EvalError> {
    let mut bound: BTreeSet<&Name> = BTreeSet::new();
    let mut order: Vec<Name> = Vec::new();
    for lit in goal {
        if let Some(a) = lit.atom() {
            if !m.signature.contains(&a.pred) && m.atoms_of(&a.pred).next().is_none() {
                return Err(EvalError::UnknownPredicate(a.pred.to_string()));
            }
        }
        let check = |t: &Term, bound: &BTreeSet<&Name>| match t {
            Term::Var(v) if !bound.contains(v) => Err(EvalError::UnsafeQuery(v.to_string())),
            _ => Ok(()),
        };
        match lit {
            Literal::Pos(a) => {
                for t in &a.args {
                    if let Term::Var(v) = t {
                        bound.insert(v);
                    }
                }
            }
            Literal::Neg(a) => a.args.iter().try_for_each(|t| check(t, &bound))?,
            Literal::Arith { result, expr } => {
                expr.terms()
                    .into_iter()
                    .try_for_each(|t| check(t, &bound))?;
                if let Term::Var(v) = result {
                    bound.insert(v);
                }
            }
            Literal::Compare { left, right, .. } => {
                check(left, &bound)?;
                check(right, &bound)?;
            }
        }
        for t in lit.terms() {
            if let Term::Var(v) = t {
                if !order.contains(v) {
                    order.push(v.clone());
                }
            }
        }
    }

    let mut results: BTreeSet<Vec<Value>> = BTreeSet::new();
    solve(m, goal, Bindings::new(), &mut |b| {
        results.insert(order.iter().map(|v| b[v].clone()).collect());
    })?;
    Ok(results
        .into_iter()
        .map(|vals| order.iter().cloned().zip(vals).collect())
        .collect())
}

fn solve(
    m: &Model,
    goal: &[Literal],
    b: Bindings,
    emit: &mut dyn FnMut(&Bindings),
) -> Result<(), EvalError> {
    let Some((lit, rest)) = goal.split_first() else {
        emit(&b);
        return Ok(());
    };
    match lit {
        Literal::Pos(a) => {
            for fact in m.atoms_of(&a.pred) {
                if let Some(nb) = match_atom(a, &fact.args, &b) {
                    solve(m, rest, nb, emit)?;
                }
            }
            Ok(())
        }
        Literal::Neg(a) => {
            if m.contains(&ground(a, &b)?) {
                Ok(())
            } else {
                solve(m, rest, b, emit)
            }
        }
        builtin => match apply_builtin(builtin, b)? {
            Some(nb) => solve(m, rest, nb, emit),
            None => Ok(()),
        },
    }
}

/// A condition the model must satisfy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Constraint {
    /// No `pred(x, x)`: the binary relation has no cycles.
    Acyclic(Name),
    /// The body must have no solution.
    Denial { name: String, body: Vec<Literal> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub constraint: String,
    pub atom: Option<GroundAtom>,
    pub bindings: Answer,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.constraint)?;
        if let Some(a) = &self.atom {
            write!(f, ": {a}")?;
        }
        if !self.bindings.is_empty() {
            let parts: Vec<String> = self
                .bindings
                .iter()
                .map(|(k, v)| format!("{k} = {v}"))
                .collect();
            write!(f, ": {}", parts.join(", "))?;
        }
        Ok(())
    }
}

/// Violations are data: an empty list means the model satisfies every constraint.
pub fn check_integrity(m: &Model, constraints: &[Constraint]) -> Result<Vec<Violation>, EvalError> {
    let mut out = Vec::new();
    for c in constraints {
        match c {
            Constraint::Acyclic(pred) => {
                for a in m.atoms_of(pred) {
                    if a.args.len() == 2 && a.args[0] == a.args[1] {
                        out.push(Violation {
                            constraint: format!("acyclic({pred})"),
                            atom: Some(a.clone()),
                            bindings: Vec::new(),
                        });
                    }
                }
            }
            Constraint::Denial { name, body } => {
                for answer in query(m, body)? {
                    out.push(Violation {
                        constraint: name.clone(),
                        atom: None,
                        bindings: answer,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Lint: atoms whose arithmetic-derived arguments came out negative.
pub fn negative_results(kb: &AssembledKB, m: &Model) -> Vec<GroundAtom> {
    let mut positions: BTreeSet<(Name, usize)> = BTreeSet::new();
    for rule in &kb.rules {
        let results: BTreeSet<&Name> = rule
            .body
            .iter()
            .filter_map(|l| match l {
                Literal::Arith {
                    result: Term::Var(v),
                    ..
                } => Some(v),
                _ => None,
            })
            .collect();
        for (i, t) in rule.head.args.iter().enumerate() {
            if matches!(t, Term::Var(v) if results.contains(v)) {
                positions.insert((rule.head.pred.clone(), i));
            }
        }
    }
    m.atoms
        .iter()
        .filter(|a| {
            a.args.iter().enumerate().any(|(i, v)| {
                matches!(v, Value::Int(n) if *n < 0) && positions.contains(&(a.pred.clone(), i))
            })
        })
        .cloned()
        .collect()
}

/// Rules grouped for per-stratum evaluation: `(stratum predicates, rule indices)`.
pub(crate) fn rules_by_stratum(
    report: &StratificationReport,
    rules: &[Clause],
) -> Vec<(BTreeSet<Name>, Vec<usize>)> {
    report
        .strata
        .iter()
        .map(|preds| {
            let set: BTreeSet<Name> = preds.iter().cloned().collect();
            let idx = rules
                .iter()
                .enumerate()
                .filter(|(_, r)| set.contains(&r.head.pred))
                .map(|(i, _)| i)
                .collect();
            (set, idx)
        })
        .collect()
}

/// True if `name` is a generated hidden name; re-exported for report filters.
pub fn is_hidden(name: &str) -> bool {
    is_hidden_name(name)
}
