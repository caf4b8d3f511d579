//! Text formats: patterns (`.kpat`), morphisms (`.kmor`), KB manifests
//! (`.kman`), fact files (`.kfact`) and queries.
//!
//! ```text
//! % comment
//! pattern blockable-dag {
//!   summary "Extension to DAG theory, in which nodes can be blocked."
//!   uses dag
//!   signature { pred blocked/1, unblocked/1 }
//!   axioms {
//!     unblocked(X) :- isa(X, Node), \+ blocked(X).
//!   }
//! }
//!
//! morphism computer-ram from container {
//!   map { container -> computer  capacity -> ram_size }
//!   hide { wall-thickness }
//! }
//!
//! kb computer {
//!   apply computer-ram
//!   include taxonomy
//!   facts "../facts/computer.kfact"
//! }
//! ```
//!
//! Capitalised identifiers in clauses are variables unless the signature in
//! scope declares them as a concept or individual.

mod lexer;
mod parser;
mod render;

use std::path::PathBuf;

use thiserror::Error;

use crate::terms::{Clause, ClauseIssue, Signature, TermError};

pub use parser::{
    parse_facts, parse_facts_with, parse_manifest, parse_morphism, parse_morphism_lenient,
    parse_morphism_with, parse_pattern, parse_pattern_located, parse_pattern_with, parse_query,
    parse_rules,
};
pub use render::{render_manifest, render_morphism, render_pattern, render_theory};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{col}: expected {expected}, found {found}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub expected: String,
    pub found: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("line {line}: `{name}` declared more than once")]
    DuplicateSignatureEntry { name: String, line: usize },
    #[error("line {line}: invalid declaration of `{name}`: {reason}")]
    InvalidDeclaration {
        name: String,
        line: usize,
        reason: TermError,
    },
    #[error("line {line}: undeclared symbol `{name}` in axiom")]
    UndeclaredSymbolInAxiom { name: String, line: usize },
    #[error("line {line}: {issue}")]
    InvalidClause { line: usize, issue: ClauseIssue },
    #[error("line {line}: `{name}` uses the reserved `hidden:` prefix")]
    ReservedName { name: String, line: usize },
    #[error("line {line}: source symbol `{name}` is mapped more than once")]
    DuplicateSourceKey { name: String, line: usize },
    #[error("{line}:{col}: fact `{atom}` is not ground")]
    NonGroundFact {
        line: usize,
        col: usize,
        atom: String,
    },
    #[error("kb `{name}` has no applications and no fact files")]
    EmptyManifest { name: String },
}

impl ParseError {
    /// Variant name, for diagnostics. Invalid clauses report their first issue.
    pub fn kind(&self) -> &'static str {
        match self {
            ParseError::Syntax(_) => "SyntaxError",
            ParseError::DuplicateSignatureEntry { .. } => "DuplicateSignatureEntry",
            ParseError::InvalidDeclaration { reason, .. } => reason.kind(),
            ParseError::UndeclaredSymbolInAxiom { .. } => "UndeclaredSymbolInAxiom",
            ParseError::InvalidClause { issue, .. } => issue.kind(),
            ParseError::ReservedName { .. } => "ReservedName",
            ParseError::DuplicateSourceKey { .. } => "DuplicateSourceKey",
            ParseError::NonGroundFact { .. } => "NonGroundFact",
            ParseError::EmptyManifest { .. } => "EmptyManifest",
        }
    }

    /// Line number the error points at, when it has one.
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::Syntax(e) => Some(e.line),
            ParseError::DuplicateSignatureEntry { line, .. }
            | ParseError::InvalidDeclaration { line, .. }
            | ParseError::UndeclaredSymbolInAxiom { line, .. }
            | ParseError::InvalidClause { line, .. }
            | ParseError::ReservedName { line, .. }
            | ParseError::DuplicateSourceKey { line, .. }
            | ParseError::NonGroundFact { line, .. } => Some(*line),
            ParseError::EmptyManifest { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Accept generated `hidden:` names, as found in morphed theories.
    pub allow_reserved: bool,
    /// Keep repeated `map` entries for the same source symbol instead of
    /// rejecting them, so that morphism validation can report them.
    pub allow_duplicate_keys: bool,
}

/// A pattern as written: its own declarations and axioms, before the
/// patterns it uses are merged in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternSource {
    pub name: String,
    pub summary: String,
    pub description: Option<String>,
    pub uses: Vec<String>,
    pub signature: Signature,
    pub clauses: Vec<Clause>,
}

/// A morphism as written. Names are resolved against the source pattern later.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorphismSource {
    pub name: String,
    pub source: String,
    pub summary: Option<String>,
    /// `(source, target)` pairs in file order.
    pub pairs: Vec<(String, String)>,
    pub hides: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Application {
    /// Import a morphed copy of the morphism's source pattern.
    Morph(String),
    /// Import a pattern unchanged.
    Include(String),
}

impl Application {
    pub fn target_name(&self) -> &str {
        match self {
            Application::Morph(n) | Application::Include(n) => n,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifest {
    pub name: String,
    pub summary: Option<String>,
    /// Symbols the KB declares up front; morphism targets must agree with them.
    pub signature: Signature,
    pub applications: Vec<Application>,
    pub fact_files: Vec<PathBuf>,
    pub rule_files: Vec<PathBuf>,
    /// Directory that relative fact and rule paths resolve against.
    pub base_dir: Option<PathBuf>,
}

impl Manifest {
    pub fn resolve_path(&self, path: &std::path::Path) -> PathBuf {
        match &self.base_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        }
    }
}
