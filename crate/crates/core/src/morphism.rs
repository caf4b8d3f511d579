//! Morphisms: validation, completion with fresh hidden names, application by
//! clause rewriting, and optional dead-axiom elimination.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::compose::FlatPattern;
use crate::syntax::MorphismSource;
use crate::terms::{
    is_hidden_name, is_valid_name, Clause, Decl, Name, Signature, Symbol, SymbolKind, HIDDEN_PREFIX,
};

/// A signature together with the clauses over it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Theory {
    pub signature: Signature,
    pub clauses: Vec<Clause>,
}

impl Theory {
    pub fn new(signature: Signature, clauses: Vec<Clause>) -> Self {
        Theory { signature, clauses }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MorphismIssue {
    #[error("`{symbol}` is mapped more than once")]
    DoubleMapping { symbol: String },
    #[error("`{symbol}` is not in the source signature")]
    UnknownSourceSymbol { symbol: String },
    #[error("`{source_symbol} -> {target}` needs {required} but the target declares {declared}")]
    TargetSignatureConflict {
        source_symbol: String,
        target: String,
        required: Decl,
        declared: Decl,
    },
    #[error("{sources:?} are all mapped to `{target}`")]
    NonInjective {
        target: String,
        sources: Vec<String>,
    },
    #[error("target `{target}` is not a valid symbol name")]
    InvalidTarget { target: String },
}

impl MorphismIssue {
    pub fn kind(&self) -> &'static str {
        match self {
            MorphismIssue::DoubleMapping { .. } => "DoubleMapping",
            MorphismIssue::UnknownSourceSymbol { .. } => "UnknownSourceSymbol",
            MorphismIssue::TargetSignatureConflict { .. } => "TargetSignatureConflict",
            MorphismIssue::NonInjective { .. } => "NonInjective",
            MorphismIssue::InvalidTarget { .. } => "InvalidTarget",
        }
    }
}

/// A total, injective, kind- and arity-preserving renaming of a theory's
/// signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolvedMorphism {
    pub name: String,
    /// Name of the pattern the source theory was flattened from.
    pub source_name: String,
    pub source: Theory,
    pub mapping: BTreeMap<Name, Symbol>,
    /// Source symbols that were given fresh names.
    pub hidden: BTreeSet<Name>,
}

/// Checks a morphism against its (flattened) source and the target
/// signature built so far. An empty report means the morphism is consistent.
pub fn validate_morphism(
    m: &MorphismSource,
    source: &FlatPattern,
    target_sig: &Signature,
) -> Vec<MorphismIssue> {
    validate_against(m, &source.theory.signature, target_sig)
}

pub(crate) fn validate_against(
    m: &MorphismSource,
    source_sig: &Signature,
    target_sig: &Signature,
) -> Vec<MorphismIssue> {
    let mut issues = Vec::new();
    let mut push = |issue: MorphismIssue| {
        if !issues.contains(&issue) {
            issues.push(issue);
        }
    };
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut by_target: BTreeMap<&str, Vec<&str>> = BTreeMap::new();

    for (from, to) in &m.pairs {
        if !seen.insert(from) {
            push(MorphismIssue::DoubleMapping {
                symbol: from.clone(),
            });
            continue;
        }
        let Some(required) = source_sig.get(from) else {
            push(MorphismIssue::UnknownSourceSymbol {
                symbol: from.clone(),
            });
            continue;
        };
        if !is_valid_name(to) || is_hidden_name(to) {
            push(MorphismIssue::InvalidTarget { target: to.clone() });
            continue;
        }
        if let Some(declared) = target_sig.get(to) {
            if declared != required {
                push(MorphismIssue::TargetSignatureConflict {
                    source_symbol: from.clone(),
                    target: to.clone(),
                    required,
                    declared,
                });
            }
        }
        by_target.entry(to).or_default().push(from);
    }
    for h in &m.hides {
        if !seen.insert(h) {
            push(MorphismIssue::DoubleMapping { symbol: h.clone() });
        } else if !source_sig.contains(h) {
            push(MorphismIssue::UnknownSourceSymbol { symbol: h.clone() });
        }
    }
    for (target, sources) in by_target {
        if sources.len() > 1 {
            push(MorphismIssue::NonInjective {
                target: target.to_string(),
                sources: sources.into_iter().map(String::from).collect(),
            });
        }
    }
    issues
}

/// Fresh name for a hidden symbol: `hidden:<morphism>:<application>:<symbol>`.
pub fn hidden_name(morphism: &str, application: usize, symbol: &str) -> Name {
    format!("{HIDDEN_PREFIX}{morphism}:{application}:{symbol}").into()
}

/// Totalises a validated morphism: every source symbol that is unmapped or
/// explicitly hidden gets a fresh name scoped to this application.
///
/// `application` is the per-assembly application counter; two applications
/// of the same morphism therefore never share hidden names.
pub fn complete_morphism(
    m: &MorphismSource,
    source: &FlatPattern,
    application: usize,
) -> ResolvedMorphism {
    complete_over(m, &source.name, &source.theory, application)
}

pub(crate) fn complete_over(
    m: &MorphismSource,
    source_name: &str,
    source: &Theory,
    application: usize,
) -> ResolvedMorphism {
    let explicit_hides: BTreeSet<&str> = m.hides.iter().map(String::as_str).collect();
    let pairs: BTreeMap<&str, &str> = m
        .pairs
        .iter()
        .map(|(a, b)| (a.as_str(), b.as_str()))
        .collect();
    let mut mapping = BTreeMap::new();
    let mut hidden = BTreeSet::new();
    for symbol in source.signature.symbols() {
        let target = match pairs.get(symbol.name().as_ref()) {
            Some(t) if !explicit_hides.contains(symbol.name().as_ref()) => Name::from(*t),
            _ => {
                hidden.insert(symbol.name().clone());
                hidden_name(&m.name, application, symbol.name())
            }
        };
        let image = Symbol::new(target, symbol.decl()).expect("validated target name");
        mapping.insert(symbol.name().clone(), image);
    }
    ResolvedMorphism {
        name: m.name.clone(),
        source_name: source_name.to_string(),
        source: source.clone(),
        mapping,
        hidden,
    }
}

impl ResolvedMorphism {
    /// Maps every symbol of `source` to itself.
    pub fn identity(name: &str, source_name: &str, source: &Theory) -> Self {
        ResolvedMorphism {
            name: name.to_string(),
            source_name: source_name.to_string(),
            source: source.clone(),
            mapping: source
                .signature
                .symbols()
                .map(|s| (s.name().clone(), s))
                .collect(),
            hidden: BTreeSet::new(),
        }
    }

    pub fn target_of(&self, name: &str) -> Option<&Name> {
        self.mapping.get(name).map(|s| s.name())
    }

    /// Source symbols with a real counterpart in the target.
    pub fn mapped(&self) -> impl Iterator<Item = (&Name, &Symbol)> + '_ {
        self.mapping
            .iter()
            .filter(|(k, _)| !self.hidden.contains(*k))
    }

    /// Target names of mapped (non-hidden) symbols.
    pub fn visible_targets(&self) -> BTreeSet<Name> {
        self.mapped().map(|(_, t)| t.name().clone()).collect()
    }

    /// Visible target predicates.
    pub fn visible_predicates(&self) -> BTreeSet<Name> {
        self.mapped()
            .filter(|(_, t)| t.kind() == SymbolKind::Predicate)
            .map(|(_, t)| t.name().clone())
            .collect()
    }

    /// Inverse of the mapping on visible targets.
    pub fn inverse(&self) -> BTreeMap<Name, Name> {
        self.mapped()
            .map(|(s, t)| (t.name().clone(), s.clone()))
            .collect()
    }

    /// `then ∘ self`: first rename by `self`, then by `then`, whose source
    /// must be the image of `self`.
    pub fn compose(&self, then: &ResolvedMorphism) -> ResolvedMorphism {
        let mapping = self
            .mapping
            .iter()
            .map(|(s, mid)| {
                let target = then
                    .mapping
                    .get(mid.name())
                    .cloned()
                    .unwrap_or_else(|| mid.clone());
                (s.clone(), target)
            })
            .collect();
        let hidden = self
            .mapping
            .iter()
            .filter(|(s, mid)| self.hidden.contains(*s) || then.hidden.contains(mid.name()))
            .map(|(s, _)| s.clone())
            .collect();
        ResolvedMorphism {
            name: format!("{}.{}", then.name, self.name),
            source_name: self.source_name.clone(),
            source: self.source.clone(),
            mapping,
            hidden,
        }
    }
}

impl fmt::Display for ResolvedMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "morphism {} from {}", self.name, self.source_name)?;
        for (s, t) in &self.mapping {
            let tag = if self.hidden.contains(s) {
                "  (hidden)"
            } else {
                ""
            };
            writeln!(f, "  {s} -> {}{tag}", t.name())?;
        }
        Ok(())
    }
}

/// Rewrites every clause of the source through the mapping. Clause order,
/// literal order and variable names are preserved; the signature becomes the
/// image of the source signature.
pub fn apply_morphism(r: &ResolvedMorphism) -> Theory {
    let rename = |n: &Name| r.mapping.get(n).map(|s| s.name().clone());
    let clauses = r
        .source
        .clauses
        .iter()
        .map(|c| c.rename_symbols(rename))
        .collect();
    let signature = r.mapping.values().cloned().collect();
    Theory { signature, clauses }
}

/// Keeps the clauses whose head predicate can contribute to a predicate in
/// `visible`, following body-to-head dependencies backwards (through
/// negated literals as well). The signature is left as is.
pub fn eliminate_dead_axioms(t: &Theory, visible: &BTreeSet<Name>) -> Theory {
    let mut depends_on: BTreeMap<&Name, BTreeSet<&Name>> = BTreeMap::new();
    for c in &t.clauses {
        let deps = depends_on.entry(&c.head.pred).or_default();
        deps.extend(c.body.iter().filter_map(|l| l.atom()).map(|a| &a.pred));
    }
    let mut live: BTreeSet<&Name> = BTreeSet::new();
    let mut queue: VecDeque<&Name> = visible.iter().collect();
    while let Some(p) = queue.pop_front() {
        if !live.insert(p) {
            continue;
        }
        if let Some(deps) = depends_on.get(p) {
            queue.extend(deps.iter().copied().filter(|d| !live.contains(d)));
        }
    }
    Theory {
        signature: t.signature.clone(),
        clauses: t
            .clauses
            .iter()
            .filter(|c| live.contains(&c.head.pred))
            .cloned()
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_morphism, parse_pattern, parse_rules};

    const CONTAINER: &str = r#"
        pattern container {
          signature {
            concept container
            pred isa/2, capacity/2, occupied_space/2, free_space/2
            pred wall/2, wall-porosity/2, porous/1
          }
          axioms {
            free_space(C, F) :- isa(C, container), capacity(C, S), occupied_space(C, O), F is S - O.
            porous(C) :- isa(C, container), wall(C, W), wall-porosity(W, P), P > 0.
          }
        }"#;

    const RAM: &str = "morphism m1 from container { map {
        container -> computer  capacity -> ram_size  free_space -> available_ram
        occupied_space -> occupied_ram  isa -> isa } }";

    fn container() -> FlatPattern {
        let p = parse_pattern(CONTAINER).unwrap();
        FlatPattern::from_theory("container", Theory::new(p.signature, p.clauses))
    }

    fn computer_sig() -> Signature {
        [
            Symbol::concept("computer").unwrap(),
            Symbol::predicate("ram_size", 2).unwrap(),
            Symbol::predicate("expansion_slots", 2).unwrap(),
        ]
        .into_iter()
        .collect()
    }

    #[test]
    fn ram_morphism_is_consistent() {
        let m = parse_morphism(RAM).unwrap();
        assert_eq!(validate_morphism(&m, &container(), &computer_sig()), vec![]);
    }

    #[test]
    fn target_signature_conflict() {
        // f: A -> B in the source, but g already exists in the target with another shape.
        let src =
            parse_pattern("pattern s { signature { concept A, B pred f/2 } axioms { f(A, B). } }")
                .unwrap();
        let src = FlatPattern::from_theory("s", Theory::new(src.signature, src.clauses));
        let target: Signature = [Symbol::predicate("g", 3).unwrap()].into_iter().collect();
        let m = parse_morphism("morphism m from s { map { f -> g  A -> X  B -> Y } }").unwrap();
        assert_eq!(
            validate_morphism(&m, &src, &target),
            vec![MorphismIssue::TargetSignatureConflict {
                source_symbol: "f".into(),
                target: "g".into(),
                required: Decl::predicate(2),
                declared: Decl::predicate(3),
            }]
        );
        let target: Signature = [Symbol::individual("X").unwrap()].into_iter().collect();
        assert!(matches!(
            validate_morphism(&m, &src, &target)[..],
            [MorphismIssue::TargetSignatureConflict { .. }]
        ));
    }

    #[test]
    fn conflation_is_rejected() {
        let m = parse_morphism(
            "morphism m from container { map { capacity -> ram_size  free_space -> ram_size } }",
        )
        .unwrap();
        assert_eq!(
            validate_morphism(&m, &container(), &Signature::new()),
            vec![MorphismIssue::NonInjective {
                target: "ram_size".into(),
                sources: vec!["capacity".into(), "free_space".into()]
            }]
        );
    }

    #[test]
    fn double_mapping_and_unknown_symbols() {
        let m = MorphismSource {
            name: "m".into(),
            source: "container".into(),
            summary: None,
            pairs: vec![
                ("capacity".into(), "x".into()),
                ("capacity".into(), "y".into()),
                ("volume".into(), "z".into()),
            ],
            hides: vec!["capacity".into(), "nothing".into()],
        };
        let issues = validate_morphism(&m, &container(), &Signature::new());
        assert!(issues.contains(&MorphismIssue::DoubleMapping {
            symbol: "capacity".into()
        }));
        assert!(issues.contains(&MorphismIssue::UnknownSourceSymbol {
            symbol: "volume".into()
        }));
        assert!(issues.contains(&MorphismIssue::UnknownSourceSymbol {
            symbol: "nothing".into()
        }));
    }

    #[test]
    fn unmapped_symbols_get_fresh_names() {
        let m = parse_morphism(RAM).unwrap();
        let r = complete_morphism(&m, &container(), 0);
        assert_eq!(
            r.target_of("wall-porosity").map(|n| n.as_ref()),
            Some("hidden:m1:0:wall-porosity")
        );
        assert_eq!(
            r.hidden.iter().map(|n| n.as_ref()).collect::<Vec<_>>(),
            vec!["porous", "wall", "wall-porosity"]
        );
        let again = complete_morphism(&m, &container(), 1);
        let first: BTreeSet<_> = r.hidden.iter().map(|h| r.target_of(h).unwrap()).collect();
        assert!(again
            .hidden
            .iter()
            .all(|h| !first.contains(again.target_of(h).unwrap())));
    }

    #[test]
    fn explicit_hide_overrides_nothing_else() {
        let m = parse_morphism("morphism m from container { map { isa -> isa } hide { porous } }")
            .unwrap();
        assert_eq!(
            validate_morphism(&m, &container(), &Signature::new()),
            vec![]
        );
        let r = complete_morphism(&m, &container(), 3);
        assert!(r.hidden.contains("porous"));
        assert!(!r.hidden.contains("isa"));
    }

    #[test]
    fn free_space_becomes_available_ram() {
        let m = parse_morphism(RAM).unwrap();
        let t = apply_morphism(&complete_morphism(&m, &container(), 0));
        let sig = t.signature.clone();
        let (expected, _) = parse_rules(
            "available_ram(C, F) :- isa(C, computer), ram_size(C, S), occupied_ram(C, O), F is S - O.",
            &sig,
        )
        .unwrap()
        .remove(0);
        assert_eq!(t.clauses[0], expected);
        assert_eq!(t.clauses.len(), 2);
        assert_eq!(t.signature.len(), container().theory.signature.len());
    }

    #[test]
    fn identity_is_a_fixpoint() {
        let c = container();
        let id = ResolvedMorphism::identity("id", "container", &c.theory);
        assert_eq!(apply_morphism(&id), c.theory);
    }

    #[test]
    fn dead_axioms() {
        let m = parse_morphism(RAM).unwrap();
        let t = apply_morphism(&complete_morphism(&m, &container(), 0));
        let visible: BTreeSet<Name> = ["available_ram", "isa", "ram_size", "occupied_ram"]
            .into_iter()
            .map(Name::from)
            .collect();
        let pruned = eliminate_dead_axioms(&t, &visible);
        assert_eq!(pruned.clauses, vec![t.clauses[0].clone()]);

        let everything: BTreeSet<Name> = t.signature.names().cloned().collect();
        assert_eq!(eliminate_dead_axioms(&t, &everything), t);
        assert!(eliminate_dead_axioms(&t, &BTreeSet::new())
            .clauses
            .is_empty());
    }
}
