use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use super::EvalError;
use crate::terms::{Clause, Literal, Name, Signature, SymbolKind};

/// Predicates grouped by evaluation level.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StratificationReport {
    /// `strata[i]` holds the predicates evaluated at level `i`, sorted.
    pub strata: Vec<Vec<Name>>,
    /// `(head, negated)`: `head` has a rule with `\+ negated(...)` in its body.
    pub negative_edges: Vec<(Name, Name)>,
}

impl StratificationReport {
    pub fn stratum_of(&self, pred: &str) -> Option<usize> {
        self.strata
            .iter()
            .position(|s| s.iter().any(|p| p.as_ref() == pred))
    }
}

struct Graph {
    nodes: Vec<Name>,
    /// (target, negative)
    edges: Vec<BTreeSet<(usize, bool)>>,
}

impl Graph {
    fn build(sig: &Signature, rules: &[Clause]) -> Self {
        let mut names: BTreeSet<Name> = sig
            .symbols()
            .filter(|s| s.kind() == SymbolKind::Predicate)
            .map(|s| s.name().clone())
            .collect();
        for r in rules {
            names.extend(r.predicates().cloned());
        }
        let nodes: Vec<Name> = names.into_iter().collect();
        let index: BTreeMap<Name, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        let mut edges = vec![BTreeSet::new(); nodes.len()];
        for r in rules {
            let h = index[&r.head.pred];
            for lit in &r.body {
                match lit {
                    Literal::Pos(a) => {
                        edges[h].insert((index[&a.pred], false));
                    }
                    Literal::Neg(a) => {
                        edges[h].insert((index[&a.pred], true));
                    }
                    _ => {}
                }
            }
        }
        Graph { nodes, edges }
    }

    /// Strongly connected components, dependencies first.
    fn sccs(&self) -> Vec<Vec<usize>> {
        let mut g: DiGraph<(), ()> = DiGraph::with_capacity(self.nodes.len(), 0);
        for _ in &self.nodes {
            g.add_node(());
        }
        for (v, es) in self.edges.iter().enumerate() {
            for &(w, _) in es {
                g.update_edge(NodeIndex::new(v), NodeIndex::new(w), ());
            }
        }
        tarjan_scc(&g)
            .into_iter()
            .map(|comp| {
                let mut comp: Vec<usize> = comp.into_iter().map(NodeIndex::index).collect();
                comp.sort_unstable();
                comp
            })
            .collect()
    }

    /// A cycle through the negative edge `from -> to`, both in one component.
    fn cycle_through(&self, from: usize, to: usize, comp: &BTreeSet<usize>) -> Vec<Name> {
        // Breadth-first path from `to` back to `from` inside the component.
        let mut prev: BTreeMap<usize, usize> = BTreeMap::new();
        let mut queue = std::collections::VecDeque::from([to]);
        let mut seen = BTreeSet::from([to]);
        while let Some(v) = queue.pop_front() {
            if v == from {
                break;
            }
            for &(w, _) in &self.edges[v] {
                if comp.contains(&w) && seen.insert(w) {
                    prev.insert(w, v);
                    queue.push_back(w);
                }
            }
        }
        let mut path = vec![from];
        let mut cur = from;
        while cur != to {
            cur = prev[&cur];
            path.push(cur);
        }
        path.reverse();
        // `path` runs to ... from; the cycle is from -> to -> ... -> from.
        path.pop();
        std::iter::once(from)
            .chain(path)
            .map(|i| self.nodes[i].clone())
            .collect()
    }
}

/// Partitions predicates into the fewest levels such that every negative
/// dependency points to a strictly lower level.
pub fn stratify_rules(
    sig: &Signature,
    rules: &[Clause],
) -> Result<StratificationReport, EvalError> {
    let g = Graph::build(sig, rules);
    let mut level = vec![0usize; g.nodes.len()];
    for comp in g.sccs() {
        let members: BTreeSet<usize> = comp.iter().copied().collect();
        let mut lvl = 0;
        for &v in &comp {
            for &(w, neg) in &g.edges[v] {
                if members.contains(&w) {
                    if neg {
                        return Err(EvalError::UnstratifiableNegation(
                            g.cycle_through(v, w, &members),
                        ));
                    }
                } else {
                    lvl = lvl.max(level[w] + usize::from(neg));
                }
            }
        }
        for &v in &comp {
            level[v] = lvl;
        }
    }
    let height = level.iter().max().map_or(0, |m| m + 1);
    let mut strata = vec![Vec::new(); height];
    for (i, n) in g.nodes.iter().enumerate() {
        strata[level[i]].push(n.clone());
    }
    let mut negative_edges = Vec::new();
    for (v, es) in g.edges.iter().enumerate() {
        for &(w, neg) in es {
            if neg {
                negative_edges.push((g.nodes[v].clone(), g.nodes[w].clone()));
            }
        }
    }
    Ok(StratificationReport {
        strata,
        negative_edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_rules;

    fn rules(text: &str) -> Vec<Clause> {
        parse_rules(text, &Signature::new())
            .unwrap()
            .into_iter()
            .map(|(c, _)| c)
            .collect()
    }

    #[test]
    fn blocked_sits_below_unblocked() {
        let rs = rules(
            "isa(X, node) :- to(X, Y).
             unblocked(X) :- isa(X, node), \\+ blocked(X).
             udr(X, Y) :- to(X, Y), \\+ blocked(Y).
             ur(X, Y) :- udr(X, Y).
             ur(X, Z) :- udr(X, Y), ur(Y, Z).",
        );
        let mut sig = Signature::new();
        sig.declare(&crate::terms::Symbol::predicate("blocked", 1).unwrap())
            .unwrap();
        let report = stratify_rules(&sig, &rs).unwrap();
        assert_eq!(report.stratum_of("blocked"), Some(0));
        assert_eq!(report.stratum_of("to"), Some(0));
        assert_eq!(report.stratum_of("unblocked"), Some(1));
        assert_eq!(report.stratum_of("ur"), Some(1));
        assert_eq!(report.strata.len(), 2);
    }

    #[test]
    fn direct_negative_self_loop() {
        let rs = rules("p(a) :- q(a), \\+ p(a).");
        match stratify_rules(&Signature::new(), &rs).unwrap_err() {
            EvalError::UnstratifiableNegation(cycle) => {
                assert_eq!(cycle, vec![Name::from("p")])
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn indirect_negative_cycle() {
        let rs = rules("p(X) :- r(X), \\+ q(X).  q(X) :- r(X), p(X).");
        match stratify_rules(&Signature::new(), &rs).unwrap_err() {
            EvalError::UnstratifiableNegation(cycle) => {
                assert_eq!(cycle, vec![Name::from("p"), Name::from("q")])
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn negation_free_is_one_stratum() {
        let rs = rules("r(X, Y) :- e(X, Y).  r(X, Z) :- e(X, Y), r(Y, Z).");
        let report = stratify_rules(&Signature::new(), &rs).unwrap();
        assert_eq!(report.strata.len(), 1);
        assert!(report.negative_edges.is_empty());
    }
}
