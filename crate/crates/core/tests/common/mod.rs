//! Shared fixtures for the integration tests: corpus access, random
//! generators and brute-force reference computations.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use kpc::compose::{AssembledKB, FlatPattern};
use kpc::eval::{evaluate, Model};
use kpc::morphism::{complete_morphism, validate_morphism, ResolvedMorphism, Theory};
use kpc::stdlib::{load_stdlib, Stdlib};
use kpc::syntax::{parse_facts, parse_pattern, MorphismSource};
use kpc::terms::{GroundAtom, Value};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn stdlib() -> &'static Stdlib {
    static LIB: OnceLock<Stdlib> = OnceLock::new();
    LIB.get_or_init(|| load_stdlib().expect("bundled corpus loads"))
}

pub fn flat(name: &str) -> FlatPattern {
    stdlib().flattened[name].clone()
}

pub fn atom(text: &str) -> GroundAtom {
    facts(text).remove(0)
}

pub fn facts(text: &str) -> Vec<GroundAtom> {
    parse_facts(text)
        .expect("fact text parses")
        .into_iter()
        .map(|c| c.head.to_ground().expect("ground"))
        .collect()
}

pub fn sym(s: &str) -> Value {
    Value::sym(s)
}

/// A KB over one theory plus ground facts.
pub fn kb_with(name: &str, theory: &Theory, facts: &[GroundAtom]) -> AssembledKB {
    let mut kb = AssembledKB::from_theory(name, theory);
    for f in facts {
        kb.add_fact(f.clone()).expect("fact fits the signature");
    }
    kb
}

pub fn model_of(name: &str, theory: &Theory, facts: &[GroundAtom]) -> Model {
    evaluate(&kb_with(name, theory, facts)).expect("evaluates")
}

/// Names `n0`, `n1`, ... for graph nodes.
pub fn node(i: usize) -> String {
    format!("n{i}")
}

/// A random directed graph on 1 to `max_nodes` nodes. With `acyclic`, edges
/// only go from lower to higher index.
pub fn random_graph(
    rng: &mut StdRng,
    max_nodes: usize,
    acyclic: bool,
) -> (usize, Vec<(usize, usize)>) {
    let n = rng.random_range(1..=max_nodes);
    let density: f64 = rng.random_range(0.1..0.5);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if (acyclic && a >= b) || (!acyclic && a == b && !rng.random_bool(0.1)) {
                continue;
            }
            if rng.random_bool(density) {
                edges.push((a, b));
            }
        }
    }
    (n, edges)
}

pub fn edge_facts(pred: &str, edges: &[(usize, usize)]) -> Vec<GroundAtom> {
    edges
        .iter()
        .map(|(a, b)| GroundAtom::new(pred, vec![sym(&node(*a)), sym(&node(*b))]))
        .collect()
}

/// Transitive closure by repeated boolean matrix squaring.
pub fn closure_by_squaring(n: usize, edges: &[(usize, usize)]) -> BTreeSet<(usize, usize)> {
    let mut m = vec![vec![false; n]; n];
    for &(a, b) in edges {
        m[a][b] = true;
    }
    loop {
        let mut next = m.clone();
        for (i, row) in m.iter().enumerate() {
            for (k, _) in row.iter().enumerate().filter(|(_, &ik)| ik) {
                for (j, _) in m[k].iter().enumerate().filter(|(_, &kj)| kj) {
                    next[i][j] = true;
                }
            }
        }
        if next == m {
            break;
        }
        m = next;
    }
    let mut out = BTreeSet::new();
    for (i, row) in m.iter().enumerate() {
        for (j, &r) in row.iter().enumerate() {
            if r {
                out.insert((i, j));
            }
        }
    }
    out
}

/// Nodes reachable from `start` by a path of one or more edges whose every
/// node after `start` satisfies `allowed`.
pub fn reachable_through(
    start: usize,
    edges: &[(usize, usize)],
    allowed: &dyn Fn(usize) -> bool,
) -> BTreeSet<usize> {
    let mut succ: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(a, b) in edges {
        succ.entry(a).or_default().push(b);
    }
    let mut seen = BTreeSet::new();
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for &w in succ.get(&v).into_iter().flatten() {
            if allowed(w) && seen.insert(w) {
                stack.push(w);
            }
        }
    }
    seen
}

/// `(pred, index)` pairs of a model restricted to atoms whose arguments are
/// all graph nodes.
pub fn node_pairs(m: &Model, pred: &str) -> BTreeSet<(usize, usize)> {
    m.atoms_of(pred)
        .filter_map(|a| match a.args.as_slice() {
            [Value::Sym(x), Value::Sym(y)] => Some((
                x.strip_prefix('n')?.parse().ok()?,
                y.strip_prefix('n')?.parse().ok()?,
            )),
            _ => None,
        })
        .collect()
}

pub fn node_set(m: &Model, pred: &str) -> BTreeSet<usize> {
    m.atoms_of(pred)
        .filter_map(|a| match a.args.as_slice() {
            [Value::Sym(x)] => x.strip_prefix('n')?.parse().ok(),
            _ => None,
        })
        .collect()
}

/// A random stratified pattern named `name`: predicates `p0`..`p{k-1}` of
/// arity 1 or 2 and individuals `c0`, `c1`. A rule for `p_i` uses `p_j`
/// positively only for `j <= i` and negatively only for `j < i`. Every
/// clause is safe. `p0` has no rules.
pub fn random_pattern(rng: &mut StdRng, name: &str) -> (FlatPattern, Vec<(String, usize)>) {
    let k = rng.random_range(2..=5);
    let preds: Vec<(String, usize)> = (0..k)
        .map(|i| (format!("p{i}"), rng.random_range(1..=2)))
        .collect();
    let vars = ["X", "Y", "Z"];
    let mut clauses = Vec::new();
    for _ in 0..rng.random_range(1..=6) {
        let i = rng.random_range(1..k);
        let mut body = Vec::new();
        let mut bound: Vec<&str> = Vec::new();
        for _ in 0..rng.random_range(1..=2) {
            let (p, n) = &preds[rng.random_range(0..=i)];
            let args: Vec<String> = (0..*n)
                .map(|_| {
                    if rng.random_bool(0.15) {
                        format!("c{}", rng.random_range(0..2))
                    } else {
                        let v = vars[rng.random_range(0..vars.len())];
                        if !bound.contains(&v) {
                            bound.push(v);
                        }
                        v.to_string()
                    }
                })
                .collect();
            body.push(format!("{p}({})", args.join(", ")));
        }
        let pick = |rng: &mut StdRng, bound: &[&str]| -> String {
            if bound.is_empty() || rng.random_bool(0.1) {
                format!("c{}", rng.random_range(0..2))
            } else {
                bound[rng.random_range(0..bound.len())].to_string()
            }
        };
        if rng.random_bool(0.3) {
            let (p, n) = &preds[rng.random_range(0..i)];
            let args: Vec<String> = (0..*n).map(|_| pick(rng, &bound)).collect();
            body.push(format!("\\+ {p}({})", args.join(", ")));
        }
        let (h, n) = &preds[i];
        let args: Vec<String> = (0..*n).map(|_| pick(rng, &bound)).collect();
        clauses.push(format!("{h}({}) :- {}.", args.join(", "), body.join(", ")));
    }
    let decls: Vec<String> = preds.iter().map(|(p, n)| format!("{p}/{n}")).collect();
    let text = format!(
        "pattern {name} {{ signature {{ individual c0, c1 pred {} }} axioms {{ {} }} }}",
        decls.join(", "),
        clauses.join(" ")
    );
    let p = parse_pattern(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
    let flat = FlatPattern::from_theory(name, Theory::new(p.signature, p.clauses));
    (flat, preds)
}

/// Random ground facts over the given predicates with constants
/// `c0`..`c{max_consts-1}`.
pub fn random_facts(
    rng: &mut StdRng,
    preds: &[(String, usize)],
    max_consts: usize,
    max_facts: usize,
) -> Vec<GroundAtom> {
    let mut out = BTreeSet::new();
    for _ in 0..rng.random_range(0..=max_facts) {
        let (p, n) = &preds[rng.random_range(0..preds.len())];
        let args = (0..*n)
            .map(|_| sym(&format!("c{}", rng.random_range(0..max_consts))))
            .collect();
        out.insert(GroundAtom::new(p, args));
    }
    out.into_iter().collect()
}

/// A random injective renaming of `flat` named `name`. Targets are
/// drawn from the pattern's own names (so swaps happen) and fresh
/// `<name>-t<i>` names; each symbol is hidden with probability `hide`.
pub fn random_renaming(
    rng: &mut StdRng,
    flat: &FlatPattern,
    name: &str,
    application: usize,
    hide: f64,
) -> ResolvedMorphism {
    let names: Vec<String> = flat
        .theory
        .signature
        .names()
        .map(|n| n.to_string())
        .collect();
    let mut pool: Vec<String> = names
        .iter()
        .filter(|n| !kpc::terms::is_hidden_name(n))
        .cloned()
        .chain((0..names.len()).map(|i| format!("{name}-t{i}")))
        .collect();
    pool.shuffle(rng);
    let mut pairs = Vec::new();
    let mut hides = Vec::new();
    for (n, target) in names.iter().zip(pool) {
        if rng.random_bool(hide) {
            hides.push(n.clone());
        } else {
            pairs.push((n.clone(), target));
        }
    }
    let ms = MorphismSource {
        name: name.to_string(),
        source: flat.name.clone(),
        summary: None,
        pairs,
        hides,
    };
    let issues = validate_morphism(&ms, flat, &kpc::terms::Signature::new());
    assert!(issues.is_empty(), "{issues:?}");
    complete_morphism(&ms, flat, application)
}
