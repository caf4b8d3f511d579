//! Pattern libraries, `uses` resolution, flattening and knowledge-base assembly.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::morphism::{
    apply_morphism, complete_over, eliminate_dead_axioms, validate_against, MorphismIssue,
    ResolvedMorphism, Theory,
};
use crate::syntax::{
    parse_facts_with, parse_manifest, parse_morphism_lenient, parse_pattern, parse_rules,
    Application, Manifest, MorphismSource, ParseError, PatternSource,
};
use crate::terms::{
    check_clause_safety, merge_signatures, Clause, ClauseIssue, Decl, GroundAtom, Name, Signature,
    SymbolKind, TermError, Value,
};

#[derive(Debug, Error)]
pub enum ComposeError {
    #[error("unknown pattern `{name}`{}", referenced_by.as_ref().map(|r| format!(" (used by `{r}`)")).unwrap_or_default())]
    UnknownPattern {
        name: String,
        referenced_by: Option<String>,
    },
    #[error("unknown morphism `{0}`")]
    UnknownMorphism(String),
    #[error("`{kind}` `{name}` is defined more than once")]
    DuplicateDefinition { kind: &'static str, name: String },
    #[error("cyclic uses: {}", .0.join(" -> "))]
    CyclicUses(Vec<String>),
    #[error("in `{context}`: {source}")]
    ConflictingDeclaration { context: String, source: TermError },
    #[error("in `{context}`: clause `{clause}`: {}", issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidClause {
        context: String,
        clause: String,
        issues: Vec<ClauseIssue>,
    },
    #[error("morphism `{morphism}`: {}", issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidMorphism {
        morphism: String,
        issues: Vec<MorphismIssue>,
    },
    #[error("application {index} (`{name}`): {source}")]
    AtApplication {
        index: usize,
        name: String,
        #[source]
        source: Box<ComposeError>,
    },
    #[error("fact `{fact}`: {reason}")]
    InvalidFact { fact: String, reason: String },
    #[error("{}{}: {source}", path.display(), source.line().map(|l| format!(":{l}")).unwrap_or_default())]
    Parse {
        path: PathBuf,
        #[source]
        source: ParseError,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ComposeError {
    pub fn kind(&self) -> &'static str {
        match self {
            ComposeError::UnknownPattern { .. } => "UnknownPattern",
            ComposeError::UnknownMorphism(_) => "UnknownMorphism",
            ComposeError::DuplicateDefinition { .. } => "DuplicateDefinition",
            ComposeError::CyclicUses(_) => "CyclicUses",
            ComposeError::ConflictingDeclaration { .. } => "ConflictingDeclaration",
            ComposeError::InvalidClause { issues, .. } => {
                issues.first().map_or("InvalidClause", ClauseIssue::kind)
            }
            ComposeError::InvalidMorphism { issues, .. } => issues
                .first()
                .map_or("InvalidMorphism", MorphismIssue::kind),
            ComposeError::AtApplication { source, .. } => source.kind(),
            ComposeError::InvalidFact { .. } => "InvalidFact",
            ComposeError::Parse { source, .. } => source.kind(),
            ComposeError::Io { .. } => "Io",
        }
    }

    /// The innermost error, past application annotations.
    pub fn root(&self) -> &ComposeError {
        match self {
            ComposeError::AtApplication { source, .. } => source.root(),
            other => other,
        }
    }
}

fn read(path: &Path) -> Result<String, ComposeError> {
    fs::read_to_string(path).map_err(|source| ComposeError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_file<T>(
    path: &Path,
    parse: impl FnOnce(&str) -> Result<T, ParseError>,
) -> Result<T, ComposeError> {
    parse(&read(path)?).map_err(|source| ComposeError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a manifest and remembers its directory for relative fact paths.
pub fn load_manifest(path: &Path) -> Result<Manifest, ComposeError> {
    let mut m = parse_file(path, parse_manifest)?;
    m.base_dir = path.parent().map(Path::to_path_buf);
    Ok(m)
}

/// Named patterns and morphisms.
#[derive(Clone, Debug, Default)]
pub struct PatternLibrary {
    patterns: BTreeMap<String, PatternSource>,
    morphisms: BTreeMap<String, MorphismSource>,
}

impl PatternLibrary {
    pub fn new() -> Self {
        PatternLibrary::default()
    }

    pub fn add_pattern(&mut self, p: PatternSource) -> Result<(), ComposeError> {
        if self.patterns.contains_key(&p.name) {
            return Err(ComposeError::DuplicateDefinition {
                kind: "pattern",
                name: p.name,
            });
        }
        self.patterns.insert(p.name.clone(), p);
        Ok(())
    }

    pub fn add_morphism(&mut self, m: MorphismSource) -> Result<(), ComposeError> {
        if self.morphisms.contains_key(&m.name) {
            return Err(ComposeError::DuplicateDefinition {
                kind: "morphism",
                name: m.name,
            });
        }
        self.morphisms.insert(m.name.clone(), m);
        Ok(())
    }

    /// Adds or replaces a pattern, returning the one it replaced.
    pub fn put_pattern(&mut self, p: PatternSource) -> Option<PatternSource> {
        self.patterns.insert(p.name.clone(), p)
    }

    pub fn put_morphism(&mut self, m: MorphismSource) -> Option<MorphismSource> {
        self.morphisms.insert(m.name.clone(), m)
    }

    pub fn pattern(&self, name: &str) -> Option<&PatternSource> {
        self.patterns.get(name)
    }

    pub fn morphism(&self, name: &str) -> Option<&MorphismSource> {
        self.morphisms.get(name)
    }

    pub fn patterns(&self) -> impl Iterator<Item = &PatternSource> + '_ {
        self.patterns.values()
    }

    pub fn morphisms(&self) -> impl Iterator<Item = &MorphismSource> + '_ {
        self.morphisms.values()
    }

    /// Reads `patterns/*.kpat` and `morphisms/*.kmor` under `root`.
    pub fn load_dir(&mut self, root: &Path) -> Result<(), ComposeError> {
        for path in files_with_extension(&root.join("patterns"), "kpat")? {
            self.add_pattern(parse_file(&path, parse_pattern)?)?;
        }
        for path in files_with_extension(&root.join("morphisms"), "kmor")? {
            self.add_morphism(parse_file(&path, parse_morphism_lenient)?)?;
        }
        Ok(())
    }
}

/// Files in `dir` with the given extension, sorted by path. A missing
/// directory yields nothing.
pub fn files_with_extension(dir: &Path, ext: &str) -> Result<Vec<PathBuf>, ComposeError> {
    let entries = match fs::read_dir(dir) {
        Ok(e) => e,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(source) => {
            return Err(ComposeError::Io {
                path: dir.to_path_buf(),
                source,
            })
        }
    };
    let mut out = Vec::new();
    for entry in entries {
        let path = entry
            .map_err(|source| ComposeError::Io {
                path: dir.to_path_buf(),
                source,
            })?
            .path();
        if path.extension().is_some_and(|e| e == ext) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// Topological order of the `uses` graph: every pattern comes after the
/// patterns it uses. Ties are broken by name, so the order is deterministic.
pub fn resolve_uses_order(lib: &PatternLibrary) -> Result<Vec<String>, ComposeError> {
    let mut order = Vec::new();
    let mut done = BTreeSet::new();
    for name in lib.patterns.keys() {
        visit(lib, name, None, &mut Vec::new(), &mut done, &mut order)?;
    }
    Ok(order)
}

fn visit(
    lib: &PatternLibrary,
    name: &str,
    referenced_by: Option<&str>,
    stack: &mut Vec<String>,
    done: &mut BTreeSet<String>,
    order: &mut Vec<String>,
) -> Result<(), ComposeError> {
    if done.contains(name) {
        return Ok(());
    }
    if let Some(pos) = stack.iter().position(|s| s == name) {
        return Err(ComposeError::CyclicUses(stack[pos..].to_vec()));
    }
    let p = lib
        .pattern(name)
        .ok_or_else(|| ComposeError::UnknownPattern {
            name: name.to_string(),
            referenced_by: referenced_by.map(String::from),
        })?;
    stack.push(name.to_string());
    for used in &p.uses {
        visit(lib, used, Some(name), stack, done, order)?;
    }
    stack.pop();
    done.insert(name.to_string());
    order.push(name.to_string());
    Ok(())
}

/// A pattern merged with everything it transitively uses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatPattern {
    pub name: String,
    pub theory: Theory,
    /// For each clause, the pattern it was written in.
    pub origins: Vec<String>,
}

impl FlatPattern {
    pub fn from_theory(name: &str, theory: Theory) -> Self {
        let origins = vec![name.to_string(); theory.clauses.len()];
        FlatPattern {
            name: name.to_string(),
            theory,
            origins,
        }
    }

    /// The flattened pattern as a self-contained source with no `uses`.
    pub fn to_source(&self) -> PatternSource {
        PatternSource {
            name: self.name.clone(),
            summary: String::new(),
            description: None,
            uses: Vec::new(),
            signature: self.theory.signature.clone(),
            clauses: self.theory.clauses.clone(),
        }
    }
}

/// Merges `name` with its transitive `uses`. Clauses reached along several
/// paths appear once (alpha-equivalent clauses count as equal). Every clause
/// must be safe over the merged signature.
pub fn flatten_pattern(name: &str, lib: &PatternLibrary) -> Result<FlatPattern, ComposeError> {
    let mut order = Vec::new();
    visit(
        lib,
        name,
        None,
        &mut Vec::new(),
        &mut BTreeSet::new(),
        &mut order,
    )?;
    let mut signature = Signature::new();
    for p in &order {
        signature = merge_signatures(&signature, &lib.patterns[p].signature).map_err(|source| {
            ComposeError::ConflictingDeclaration {
                context: name.to_string(),
                source,
            }
        })?;
    }
    let mut seen = BTreeSet::new();
    let (mut clauses, mut origins) = (Vec::new(), Vec::new());
    for p in &order {
        for clause in &lib.patterns[p].clauses {
            let clause = clause.resolve_constants(&signature);
            let issues = check_clause_safety(&clause, &signature);
            if !issues.is_empty() {
                return Err(ComposeError::InvalidClause {
                    context: p.clone(),
                    clause: clause.to_string(),
                    issues,
                });
            }
            if seen.insert(clause.canonical()) {
                clauses.push(clause);
                origins.push(p.clone());
            }
        }
    }
    Ok(FlatPattern {
        name: name.to_string(),
        theory: Theory { signature, clauses },
        origins,
    })
}

/// Where a clause of an assembled KB came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClauseOrigin {
    Application {
        index: usize,
        /// `None` for an identity include.
        morphism: Option<String>,
        /// The pattern the clause was written in (before flattening).
        pattern: String,
    },
    RuleFile {
        path: PathBuf,
        line: usize,
    },
    Added,
}

impl ClauseOrigin {
    pub fn application(&self) -> Option<usize> {
        match self {
            ClauseOrigin::Application { index, .. } => Some(*index),
            _ => None,
        }
    }
}

/// One manifest application after resolution.
#[derive(Clone, Debug)]
pub struct AppliedMorphism {
    pub index: usize,
    pub morphism: ResolvedMorphism,
    /// `false` for identity includes.
    pub morphed: bool,
}

/// A knowledge base flattened into one executable rule set.
#[derive(Clone, Debug, Default)]
pub struct AssembledKB {
    pub name: String,
    pub signature: Signature,
    pub rules: Vec<Clause>,
    /// Parallel to `rules`.
    pub provenance: Vec<ClauseOrigin>,
    pub facts: Vec<GroundAtom>,
    pub applications: Vec<AppliedMorphism>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Default)]
pub struct AssembleOptions {
    /// Drop morphed axioms that cannot reach a visible predicate.
    pub eliminate_dead: bool,
}

impl AssembledKB {
    /// A KB over a single theory with no provenance beyond "added".
    pub fn from_theory(name: &str, theory: &Theory) -> Self {
        AssembledKB {
            name: name.to_string(),
            signature: theory.signature.clone(),
            rules: theory.clauses.clone(),
            provenance: vec![ClauseOrigin::Added; theory.clauses.len()],
            ..AssembledKB::default()
        }
    }

    /// Adds a ground fact. Its predicate must be declared with the right
    /// arity; undeclared constants become individuals.
    pub fn add_fact(&mut self, fact: GroundAtom) -> Result<(), ComposeError> {
        let invalid = |reason: String| ComposeError::InvalidFact {
            fact: fact.to_string(),
            reason,
        };
        match self.signature.get(&fact.pred) {
            Some(d) if d == Decl::predicate(fact.args.len()) => {}
            Some(d) => return Err(invalid(format!("`{}` is declared as {d}", fact.pred))),
            None => return Err(invalid(format!("undeclared predicate `{}`", fact.pred))),
        }
        for v in &fact.args {
            if let Value::Sym(s) = v {
                self.signature
                    .declare_name(s.clone(), Decl::individual())
                    .or_else(|e| match self.signature.get(s) {
                        Some(d) if d.is_constant() => Ok(()),
                        _ => Err(e),
                    })
                    .map_err(|e| invalid(e.to_string()))?;
            }
        }
        if !self.facts.contains(&fact) {
            self.facts.push(fact);
        }
        Ok(())
    }

    /// Parses fact text against this KB's signature and adds the facts.
    pub fn load_facts_text(&mut self, text: &str) -> Result<(), ParseOrFactError> {
        for clause in parse_facts_with(text, &self.signature)? {
            let fact = clause
                .head
                .to_ground()
                .expect("parser only returns ground facts");
            self.add_fact(fact)?;
        }
        Ok(())
    }

    /// Adds a rule. Undeclared head predicates are declared from their use;
    /// the rule must then be safe.
    pub fn add_rule(&mut self, clause: Clause, origin: ClauseOrigin) -> Result<(), ComposeError> {
        let mut sig = self.signature.clone();
        for atom in clause.atoms() {
            if !sig.contains(&atom.pred) {
                let _ = sig.declare_name(atom.pred.clone(), Decl::predicate(atom.arity()));
            }
        }
        for c in clause.constants() {
            if !sig.contains(c) {
                let _ = sig.declare_name(c.clone(), Decl::individual());
            }
        }
        let clause = clause.resolve_constants(&sig);
        let issues = check_clause_safety(&clause, &sig);
        if !issues.is_empty() {
            return Err(ComposeError::InvalidClause {
                context: self.name.clone(),
                clause: clause.to_string(),
                issues,
            });
        }
        self.signature = sig;
        self.rules.push(clause);
        self.provenance.push(origin);
        Ok(())
    }

    pub fn theory(&self) -> Theory {
        Theory::new(self.signature.clone(), self.rules.clone())
    }
}

#[derive(Debug, Error)]
pub enum ParseOrFactError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Fact(#[from] ComposeError),
}

pub fn assemble_kb(man: &Manifest, lib: &PatternLibrary) -> Result<AssembledKB, ComposeError> {
    assemble_kb_with(man, lib, &AssembleOptions::default())
}

/// Builds a KB from a manifest: each application is flattened, completed,
/// validated against the target signature accumulated so far, morphed, and
/// added; rule and fact files are loaded last.
pub fn assemble_kb_with(
    man: &Manifest,
    lib: &PatternLibrary,
    opts: &AssembleOptions,
) -> Result<AssembledKB, ComposeError> {
    let mut kb = AssembledKB {
        name: man.name.clone(),
        signature: man.signature.clone(),
        ..AssembledKB::default()
    };
    let mut predicate_owners: BTreeMap<Name, Vec<(usize, Name)>> = BTreeMap::new();

    for (index, app) in man.applications.iter().enumerate() {
        let at = |source: ComposeError| ComposeError::AtApplication {
            index,
            name: app.target_name().to_string(),
            source: Box::new(source),
        };
        let (flat, resolved, morphism_name) = match app {
            Application::Morph(m) => {
                let ms = lib
                    .morphism(m)
                    .ok_or_else(|| at(ComposeError::UnknownMorphism(m.clone())))?;
                let flat = flatten_pattern(&ms.source, lib).map_err(at)?;
                let issues = validate_against(ms, &flat.theory.signature, &kb.signature);
                if !issues.is_empty() {
                    return Err(at(ComposeError::InvalidMorphism {
                        morphism: m.clone(),
                        issues,
                    }));
                }
                let r = complete_over(ms, &flat.name, &flat.theory, index);
                (flat, r, Some(m.clone()))
            }
            Application::Include(p) => {
                let flat = flatten_pattern(p, lib).map_err(at)?;
                let r = ResolvedMorphism::identity(p, p, &flat.theory);
                (flat, r, None)
            }
        };

        for (s, t) in resolved.mapped() {
            if t.kind() == SymbolKind::Predicate {
                predicate_owners
                    .entry(t.name().clone())
                    .or_default()
                    .push((index, s.clone()));
            }
        }

        let mut theory = apply_morphism(&resolved);
        let mut origins = flat.origins.clone();
        if opts.eliminate_dead && morphism_name.is_some() {
            let kept = eliminate_dead_axioms(&theory, &resolved.visible_predicates());
            let keep: BTreeSet<&Clause> = kept.clauses.iter().collect();
            origins = theory
                .clauses
                .iter()
                .zip(origins)
                .filter(|(c, _)| keep.contains(c))
                .map(|(_, o)| o)
                .collect();
            theory = kept;
        }
        kb.signature = merge_signatures(&kb.signature, &theory.signature).map_err(|source| {
            at(ComposeError::ConflictingDeclaration {
                context: man.name.clone(),
                source,
            })
        })?;
        for (clause, pattern) in theory.clauses.into_iter().zip(origins) {
            kb.rules.push(clause);
            kb.provenance.push(ClauseOrigin::Application {
                index,
                morphism: morphism_name.clone(),
                pattern,
            });
        }
        kb.applications.push(AppliedMorphism {
            index,
            morphism: resolved,
            morphed: morphism_name.is_some(),
        });
    }

    for (target, owners) in &predicate_owners {
        let apps: BTreeSet<usize> = owners.iter().map(|(i, _)| *i).collect();
        let shared_plumbing = owners.iter().all(|(_, s)| s == target);
        if apps.len() > 1 && !shared_plumbing {
            let from: Vec<String> = owners
                .iter()
                .map(|(i, s)| format!("{s} (application {i})"))
                .collect();
            kb.warnings.push(format!(
                "predicate `{target}` is the image of several applications: {}",
                from.join(", ")
            ));
        }
    }

    for path in &man.rule_files {
        let path = man.resolve_path(path);
        let sig = kb.signature.clone();
        for (clause, line) in parse_file(&path, |t| parse_rules(t, &sig))? {
            kb.add_rule(
                clause,
                ClauseOrigin::RuleFile {
                    path: path.clone(),
                    line,
                },
            )?;
        }
    }
    for path in &man.fact_files {
        let path = man.resolve_path(path);
        let text = read(&path)?;
        kb.load_facts_text(&text).map_err(|e| match e {
            ParseOrFactError::Parse(source) => ComposeError::Parse {
                path: path.clone(),
                source,
            },
            ParseOrFactError::Fact(e) => e,
        })?;
    }
    Ok(kb)
}

fn dot_id(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT graph of the library: one node per pattern and per KB, plain edges
/// for `uses` and identity includes, bold labelled edges for morphism
/// applications. Nodes and edges are sorted.
pub fn export_inclusion_graph(lib: &PatternLibrary, mans: &[Manifest]) -> String {
    let mut nodes: BTreeMap<String, &'static str> = BTreeMap::new();
    let mut edges: BTreeSet<(String, String, Option<String>)> = BTreeSet::new();
    for p in lib.patterns() {
        nodes.insert(p.name.clone(), "box");
        for u in &p.uses {
            edges.insert((u.clone(), p.name.clone(), None));
        }
    }
    for m in mans {
        let kb = if lib.pattern(&m.name).is_some() {
            format!("kb:{}", m.name)
        } else {
            m.name.clone()
        };
        nodes.insert(kb.clone(), "ellipse");
        for app in &m.applications {
            match app {
                Application::Morph(name) => {
                    let source = lib
                        .morphism(name)
                        .map(|ms| ms.source.clone())
                        .unwrap_or_else(|| name.clone());
                    nodes.entry(source.clone()).or_insert("box");
                    edges.insert((source, kb.clone(), Some(name.clone())));
                }
                Application::Include(p) => {
                    nodes.entry(p.clone()).or_insert("box");
                    edges.insert((p.clone(), kb.clone(), None));
                }
            }
        }
    }
    let mut out = String::from("digraph kpc {\n");
    for (n, shape) in &nodes {
        let _ = writeln!(out, "  {} [shape={shape}];", dot_id(n));
    }
    for (from, to, label) in &edges {
        match label {
            Some(l) => {
                let _ = writeln!(
                    out,
                    "  {} -> {} [style=bold, label={}];",
                    dot_id(from),
                    dot_id(to),
                    dot_id(l)
                );
            }
            None => {
                let _ = writeln!(out, "  {} -> {};", dot_id(from), dot_id(to));
            }
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lib(patterns: &[&str], morphisms: &[&str]) -> PatternLibrary {
        let mut lib = PatternLibrary::new();
        for p in patterns {
            lib.add_pattern(parse_pattern(p).unwrap()).unwrap();
        }
        for m in morphisms {
            lib.add_morphism(crate::syntax::parse_morphism(m).unwrap())
                .unwrap();
        }
        lib
    }

    #[test]
    fn two_cycle_is_reported() {
        let l = lib(&["pattern a { uses b }", "pattern b { uses a }"], &[]);
        match resolve_uses_order(&l).unwrap_err() {
            ComposeError::CyclicUses(path) => assert_eq!(path, vec!["a", "b"]),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn single_pattern_order() {
        let l = lib(&["pattern only { }"], &[]);
        assert_eq!(resolve_uses_order(&l).unwrap(), vec!["only"]);
    }

    #[test]
    fn unknown_use() {
        let l = lib(&["pattern a { uses ghost }"], &[]);
        assert!(matches!(
            resolve_uses_order(&l),
            Err(ComposeError::UnknownPattern { name, .. }) if name == "ghost"
        ));
    }

    const BASE: &str = "pattern base { signature { pred e/2, r/2 } axioms {
        r(X, Y) :- e(X, Y).  r(X, Z) :- e(X, Y), r(Y, Z). } }";
    const A: &str = "pattern a { uses base signature { pred ra/1 } axioms { ra(X) :- r(X, Y). } }";
    const B: &str = "pattern b { uses base signature { pred rb/1 } axioms { rb(Y) :- r(X, Y). } }";
    const X: &str =
        "pattern x { uses a, b signature { pred both/1 } axioms { both(X) :- ra(X), rb(X). } }";

    #[test]
    fn diamond_inclusion_deduplicates() {
        let l = lib(&[BASE, A, B, X], &[]);
        let flat = flatten_pattern("x", &l).unwrap();
        assert_eq!(flat.theory.clauses.len(), 1 + 1 + 1 + 2);
        assert_eq!(flat.origins, vec!["base", "base", "a", "b", "x"]);
        assert_eq!(flat.theory.signature.len(), 5);
        let order = resolve_uses_order(&l).unwrap();
        let pos = |n: &str| order.iter().position(|o| o == n).unwrap();
        assert!(pos("base") < pos("a") && pos("a") < pos("x") && pos("b") < pos("x"));
    }

    #[test]
    fn flattening_is_idempotent() {
        let l = lib(&[BASE, A, B, X], &[]);
        let flat = flatten_pattern("x", &l).unwrap();
        let mut again = PatternLibrary::new();
        again.add_pattern(flat.to_source()).unwrap();
        assert_eq!(flatten_pattern("x", &again).unwrap().theory, flat.theory);
    }

    #[test]
    fn conflicting_uses() {
        let l = lib(
            &[BASE, "pattern c { uses base signature { pred r/3 } }"],
            &[],
        );
        assert!(matches!(
            flatten_pattern("c", &l),
            Err(ComposeError::ConflictingDeclaration { .. })
        ));
    }

    #[test]
    fn unsafe_clause_surfaces_at_flatten() {
        let l = lib(
            &[
                BASE,
                "pattern u { uses base signature { pred s/1 } axioms { s(X) :- r(Y, Y). } }",
            ],
            &[],
        );
        assert!(matches!(
            flatten_pattern("u", &l),
            Err(ComposeError::InvalidClause { .. })
        ));
    }

    #[test]
    fn facts_only_manifest() {
        let l = lib(&[], &[]);
        let man = Manifest {
            name: "k".into(),
            summary: None,
            signature: [crate::terms::Symbol::predicate("p", 1).unwrap()]
                .into_iter()
                .collect(),
            applications: vec![],
            fact_files: vec![],
            rule_files: vec![],
            base_dir: None,
        };
        let mut kb = assemble_kb(&man, &l).unwrap();
        assert!(kb.rules.is_empty());
        kb.load_facts_text("p(a). p(b).").unwrap();
        assert_eq!(kb.facts.len(), 2);
        assert!(kb.load_facts_text("q(a).").is_err());
        assert!(kb.load_facts_text("p(a, b).").is_err());
    }

    #[test]
    fn application_errors_carry_index() {
        let l = lib(
            &[BASE],
            &["morphism m from base { map { e -> edge  r -> edge } }"],
        );
        let man = parse_manifest("kb k { include base apply m }").unwrap();
        match assemble_kb(&man, &l).unwrap_err() {
            ComposeError::AtApplication { index, source, .. } => {
                assert_eq!(index, 1);
                assert!(matches!(*source, ComposeError::InvalidMorphism { .. }));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn dot_export() {
        assert_eq!(
            export_inclusion_graph(&PatternLibrary::new(), &[]),
            "digraph kpc {\n}\n"
        );
        let l = lib(&[BASE], &["morphism m from base { map { e -> edge } }"]);
        let man = parse_manifest("kb k { apply m }").unwrap();
        let dot = export_inclusion_graph(&l, &[man]);
        assert_eq!(
            dot,
            "digraph kpc {\n  \"base\" [shape=box];\n  \"k\" [shape=ellipse];\n  \"base\" -> \"k\" [style=bold, label=\"m\"];\n}\n"
        );
    }
}
