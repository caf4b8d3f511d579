//! Symbols, signatures, terms, literals and clauses.
//!
//! Everything here is immutable once built. Names are reference-counted
//! strings, so cloning a clause or a signature never copies text.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

/// A shared, immutable symbol or variable name.
pub type Name = Arc<str>;

/// Prefix reserved for symbols generated while hiding unmapped pattern symbols.
pub const HIDDEN_PREFIX: &str = "hidden:";

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("invalid symbol name `{0}`")]
    InvalidName(String),
    #[error("predicate `{0}` must have arity >= 1")]
    ZeroArityPredicate(String),
    #[error("conflicting declaration for `{name}`: {existing} vs {incoming}")]
    ConflictingDeclaration {
        name: String,
        existing: Decl,
        incoming: Decl,
    },
}

impl TermError {
    pub fn kind(&self) -> &'static str {
        match self {
            TermError::InvalidName(_) => "InvalidName",
            TermError::ZeroArityPredicate(_) => "ZeroArityPredicate",
            TermError::ConflictingDeclaration { .. } => "ConflictingDeclaration",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolKind {
    Predicate,
    Concept,
    Individual,
}

impl fmt::Display for SymbolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SymbolKind::Predicate => "pred",
            SymbolKind::Concept => "concept",
            SymbolKind::Individual => "individual",
        })
    }
}

/// Kind and arity of a declared name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Decl {
    pub kind: SymbolKind,
    pub arity: usize,
}

impl Decl {
    pub fn predicate(arity: usize) -> Self {
        Decl {
            kind: SymbolKind::Predicate,
            arity,
        }
    }

    pub fn concept() -> Self {
        Decl {
            kind: SymbolKind::Concept,
            arity: 0,
        }
    }

    pub fn individual() -> Self {
        Decl {
            kind: SymbolKind::Individual,
            arity: 0,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.kind != SymbolKind::Predicate
    }
}

impl fmt::Display for Decl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SymbolKind::Predicate => write!(f, "pred/{}", self.arity),
            kind => write!(f, "{kind}"),
        }
    }
}

/// One signature element. Two symbols are equal iff name, kind and arity match.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    name: Name,
    decl: Decl,
}

impl Symbol {
    pub fn new(name: impl Into<Name>, decl: Decl) -> Result<Self, TermError> {
        let name = name.into();
        if !is_valid_name(&name) {
            return Err(TermError::InvalidName(name.to_string()));
        }
        match decl.kind {
            SymbolKind::Predicate if decl.arity == 0 => {
                return Err(TermError::ZeroArityPredicate(name.to_string()))
            }
            SymbolKind::Concept | SymbolKind::Individual if decl.arity != 0 => {
                return Err(TermError::InvalidName(name.to_string()))
            }
            _ => {}
        }
        Ok(Symbol { name, decl })
    }

    pub fn predicate(name: &str, arity: usize) -> Result<Self, TermError> {
        Symbol::new(name, Decl::predicate(arity))
    }

    pub fn concept(name: &str) -> Result<Self, TermError> {
        Symbol::new(name, Decl::concept())
    }

    pub fn individual(name: &str) -> Result<Self, TermError> {
        Symbol::new(name, Decl::individual())
    }

    pub fn name(&self) -> &Name {
        &self.name
    }

    pub fn decl(&self) -> Decl {
        self.decl
    }

    pub fn kind(&self) -> SymbolKind {
        self.decl.kind
    }

    pub fn arity(&self) -> usize {
        self.decl.arity
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.decl.kind {
            SymbolKind::Predicate => write!(f, "{}/{}", self.name, self.decl.arity),
            _ => write!(f, "{}", self.name),
        }
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-'
}

/// Plain identifiers: a letter or underscore, then letters, digits, `_` and
/// internal `-`. Generated hidden names (`hidden:...`) are also accepted.
pub fn is_valid_name(name: &str) -> bool {
    if let Some(rest) = name.strip_prefix(HIDDEN_PREFIX) {
        return !rest.is_empty() && rest.chars().all(|c| is_ident_char(c) || c == ':');
    }
    is_plain_identifier(name)
}

pub fn is_plain_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    !name.ends_with('-') && name.chars().all(is_ident_char) && !name.contains("--")
}

pub fn is_hidden_name(name: &str) -> bool {
    name.starts_with(HIDDEN_PREFIX)
}

/// A finite map from names to their declaration. Names are never overloaded.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    entries: BTreeMap<Name, Decl>,
}

impl Signature {
    pub fn new() -> Self {
        Signature::default()
    }

    /// Adds a symbol; re-declaring with the same kind and arity is a no-op.
    pub fn declare(&mut self, symbol: &Symbol) -> Result<(), TermError> {
        self.declare_name(symbol.name.clone(), symbol.decl)
    }

    pub(crate) fn declare_name(&mut self, name: Name, decl: Decl) -> Result<(), TermError> {
        match self.entries.get(&name) {
            Some(existing) if *existing != decl => Err(TermError::ConflictingDeclaration {
                name: name.to_string(),
                existing: *existing,
                incoming: decl,
            }),
            Some(_) => Ok(()),
            None => {
                self.entries.insert(name, decl);
                Ok(())
            }
        }
    }

    pub fn get(&self, name: &str) -> Option<Decl> {
        self.entries.get(name).copied()
    }

    pub fn symbol(&self, name: &str) -> Option<Symbol> {
        self.entries.get_key_value(name).map(|(n, d)| Symbol {
            name: n.clone(),
            decl: *d,
        })
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn is_constant(&self, name: &str) -> bool {
        self.get(name).is_some_and(|d| d.is_constant())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Symbols in lexicographic name order.
    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.entries.iter().map(|(n, d)| Symbol {
            name: n.clone(),
            decl: *d,
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &Name> + '_ {
        self.entries.keys()
    }

    pub fn predicates(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.symbols().filter(|s| s.kind() == SymbolKind::Predicate)
    }

    pub fn constants(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.symbols().filter(|s| s.kind() != SymbolKind::Predicate)
    }
}

impl FromIterator<Symbol> for Signature {
    /// Panics on conflicting declarations; use [`Signature::declare`] for fallible input.
    fn from_iter<I: IntoIterator<Item = Symbol>>(iter: I) -> Self {
        let mut sig = Signature::new();
        for s in iter {
            sig.declare(&s).expect("conflicting declarations");
        }
        sig
    }
}

/// Union of two signatures. Fails if a name is declared in both with a
/// different kind or arity.
pub fn merge_signatures(base: &Signature, extension: &Signature) -> Result<Signature, TermError> {
    let mut merged = base.clone();
    for (name, decl) in &extension.entries {
        merged.declare_name(name.clone(), *decl)?;
    }
    Ok(merged)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Name),
    Const(Name),
    Int(i64),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(name: &str) -> Self {
        Term::Const(name.into())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: Name,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: &str, args: Vec<Term>) -> Self {
        Atom {
            pred: pred.into(),
            args,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_var())
    }

    fn variables<'a>(&'a self, out: &mut Vec<&'a Name>) {
        for t in &self.args {
            if let Term::Var(v) = t {
                out.push(v);
            }
        }
    }

    /// Converts a variable-free atom into a ground atom.
    pub fn to_ground(&self) -> Option<GroundAtom> {
        let args = self
            .args
            .iter()
            .map(|t| match t {
                Term::Var(_) => None,
                Term::Const(c) => Some(Value::Sym(c.clone())),
                Term::Int(i) => Some(Value::Int(*i)),
            })
            .collect::<Option<Vec<_>>>()?;
        Some(GroundAtom {
            pred: self.pred.clone(),
            args,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "//",
        }
    }

    /// Checked integer arithmetic; `None` on overflow or division by zero.
    pub fn apply(self, a: i64, b: i64) -> Option<i64> {
        match self {
            ArithOp::Add => a.checked_add(b),
            ArithOp::Sub => a.checked_sub(b),
            ArithOp::Mul => a.checked_mul(b),
            ArithOp::Div => a.checked_div(b),
        }
    }

    fn precedence(self) -> u8 {
        match self {
            ArithOp::Add | ArithOp::Sub => 1,
            ArithOp::Mul | ArithOp::Div => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArithExpr {
    Term(Term),
    Binary(ArithOp, Box<ArithExpr>, Box<ArithExpr>),
}

impl ArithExpr {
    pub fn binary(op: ArithOp, lhs: ArithExpr, rhs: ArithExpr) -> Self {
        ArithExpr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn terms(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        self.collect_terms(&mut out);
        out
    }

    fn collect_terms<'a>(&'a self, out: &mut Vec<&'a Term>) {
        match self {
            ArithExpr::Term(t) => out.push(t),
            ArithExpr::Binary(_, l, r) => {
                l.collect_terms(out);
                r.collect_terms(out);
            }
        }
    }

    fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> ArithExpr {
        match self {
            ArithExpr::Term(t) => ArithExpr::Term(f(t)),
            ArithExpr::Binary(op, l, r) => ArithExpr::binary(*op, l.map_terms(f), r.map_terms(f)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "\\=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    /// `=` and `\=` compare any two values; ordering operators hold only
    /// between integers.
    pub fn holds(self, left: &Value, right: &Value) -> bool {
        match (self, left, right) {
            (CmpOp::Eq, l, r) => l == r,
            (CmpOp::Ne, l, r) => l != r,
            (op, Value::Int(a), Value::Int(b)) => match op {
                CmpOp::Lt => a < b,
                CmpOp::Le => a <= b,
                CmpOp::Gt => a > b,
                CmpOp::Ge => a >= b,
                CmpOp::Eq | CmpOp::Ne => unreachable!(),
            },
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Literal {
    Pos(Atom),
    /// Negation as failure.
    Neg(Atom),
    Arith {
        result: Term,
        expr: ArithExpr,
    },
    Compare {
        left: Term,
        op: CmpOp,
        right: Term,
    },
}

impl Literal {
    pub fn atom(&self) -> Option<&Atom> {
        match self {
            Literal::Pos(a) | Literal::Neg(a) => Some(a),
            _ => None,
        }
    }

    fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Literal {
        let map_atom = |a: &Atom, f: &mut dyn FnMut(&Term) -> Term| Atom {
            pred: a.pred.clone(),
            args: a.args.iter().map(f).collect(),
        };
        match self {
            Literal::Pos(a) => Literal::Pos(map_atom(a, f)),
            Literal::Neg(a) => Literal::Neg(map_atom(a, f)),
            Literal::Arith { result, expr } => Literal::Arith {
                result: f(result),
                expr: expr.map_terms(f),
            },
            Literal::Compare { left, op, right } => Literal::Compare {
                left: f(left),
                op: *op,
                right: f(right),
            },
        }
    }

    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Literal::Pos(a) | Literal::Neg(a) => a.args.iter().collect(),
            Literal::Arith { result, expr } => {
                let mut v = vec![result];
                v.extend(expr.terms());
                v
            }
            Literal::Compare { left, right, .. } => vec![left, right],
        }
    }
}

/// A Horn rule `head :- body`. An empty body makes the clause a fact.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause {
    pub head: Atom,
    pub body: Vec<Literal>,
}

impl Clause {
    pub fn new(head: Atom, body: Vec<Literal>) -> Self {
        Clause { head, body }
    }

    pub fn fact(head: Atom) -> Self {
        Clause {
            head,
            body: Vec::new(),
        }
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }

    pub fn is_ground_fact(&self) -> bool {
        self.body.is_empty() && self.head.is_ground()
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> + '_ {
        std::iter::once(&self.head).chain(self.body.iter().filter_map(Literal::atom))
    }

    /// Predicate names in head and body, in occurrence order.
    pub fn predicates(&self) -> impl Iterator<Item = &Name> + '_ {
        self.atoms().map(|a| &a.pred)
    }

    pub fn terms(&self) -> impl Iterator<Item = &Term> + '_ {
        self.head
            .args
            .iter()
            .chain(self.body.iter().flat_map(|l| l.terms()))
    }

    pub fn constants(&self) -> impl Iterator<Item = &Name> + '_ {
        self.terms().filter_map(|t| match t {
            Term::Const(c) => Some(c),
            _ => None,
        })
    }

    /// Rewrites every term with `f`; predicates and structure are kept.
    pub fn map_terms(&self, mut f: impl FnMut(&Term) -> Term) -> Clause {
        Clause {
            head: Atom {
                pred: self.head.pred.clone(),
                args: self.head.args.iter().map(&mut f).collect(),
            },
            body: self.body.iter().map(|l| l.map_terms(&mut f)).collect(),
        }
    }

    /// Renames predicate and constant names through `rename`; names for which
    /// it returns `None` are left alone. Variables and integers are untouched.
    pub fn rename_symbols(&self, rename: impl Fn(&Name) -> Option<Name>) -> Clause {
        let apply = |n: &Name| rename(n).unwrap_or_else(|| n.clone());
        let renamed = self.map_terms(|t| match t {
            Term::Const(c) => Term::Const(apply(c)),
            other => other.clone(),
        });
        let rename_atom = |a: Atom| Atom {
            pred: apply(&a.pred),
            args: a.args,
        };
        Clause {
            head: rename_atom(renamed.head),
            body: renamed
                .body
                .into_iter()
                .map(|l| match l {
                    Literal::Pos(a) => Literal::Pos(rename_atom(a)),
                    Literal::Neg(a) => Literal::Neg(rename_atom(a)),
                    other => other,
                })
                .collect(),
        }
    }

    /// Capitalised names parse as variables unless the signature in scope
    /// declares them as constants (`Node`, `Producer`). Once a wider signature
    /// is known, this turns such variables into constants.
    pub fn resolve_constants(&self, sig: &Signature) -> Clause {
        self.map_terms(|t| match t {
            Term::Var(v) if sig.is_constant(v) => Term::Const(v.clone()),
            other => other.clone(),
        })
    }

    /// Variables renamed `V0, V1, ...` in order of first occurrence, so that
    /// alpha-equivalent clauses compare equal.
    pub fn canonical(&self) -> Clause {
        let mut seen: BTreeMap<Name, Name> = BTreeMap::new();
        self.map_terms(|t| match t {
            Term::Var(v) => {
                let next = seen.len();
                Term::Var(
                    seen.entry(v.clone())
                        .or_insert_with(|| format!("V{next}").into())
                        .clone(),
                )
            }
            other => other.clone(),
        })
    }
}

/// Where an unsafe variable occurs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarPosition {
    Head,
    /// Index into the clause body.
    Negated(usize),
    Arithmetic(usize),
    Comparison(usize),
}

impl fmt::Display for VarPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarPosition::Head => f.write_str("head"),
            VarPosition::Negated(i) => write!(f, "negated literal {}", i + 1),
            VarPosition::Arithmetic(i) => write!(f, "arithmetic literal {}", i + 1),
            VarPosition::Comparison(i) => write!(f, "comparison {}", i + 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ClauseIssue {
    #[error("unsafe variable `{name}` in {position}")]
    UnsafeVariable { name: String, position: VarPosition },
    #[error("undeclared symbol `{0}`")]
    UndeclaredSymbol(String),
    #[error("`{name}` used with arity {found}, declared {expected}")]
    ArityMismatch {
        name: String,
        expected: Decl,
        found: usize,
    },
    #[error("`{name}` is declared as {declared} but used as {used}")]
    KindMismatch {
        name: String,
        declared: Decl,
        used: &'static str,
    },
}

impl ClauseIssue {
    /// Variant name, for diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            ClauseIssue::UnsafeVariable { .. } => "UnsafeVariable",
            ClauseIssue::UndeclaredSymbol(_) => "UndeclaredSymbol",
            ClauseIssue::ArityMismatch { .. } => "ArityMismatch",
            ClauseIssue::KindMismatch { .. } => "KindMismatch",
        }
    }
}

/// Checks declarations and range restriction. The clause is safe iff the
/// returned report is empty.
///
/// Body literals are scanned left to right. Positive atoms bind their
/// variables; an arithmetic literal binds its result term. Negated atoms,
/// arithmetic expressions and comparisons may only use variables bound
/// earlier, and every head variable must be bound by the end of the body.
pub fn check_clause_safety(clause: &Clause, sig: &Signature) -> Vec<ClauseIssue> {
    let mut report = declaration_issues(clause, sig);
    let mut bound: BTreeSet<&Name> = BTreeSet::new();
    let flag = |report: &mut Vec<ClauseIssue>, v: &Name, position: VarPosition| {
        let issue = ClauseIssue::UnsafeVariable {
            name: v.to_string(),
            position,
        };
        if !report.contains(&issue) {
            report.push(issue);
        }
    };
    for (i, lit) in clause.body.iter().enumerate() {
        match lit {
            Literal::Pos(a) => {
                let mut vs = Vec::new();
                a.variables(&mut vs);
                bound.extend(vs);
            }
            Literal::Neg(a) => {
                let mut vs = Vec::new();
                a.variables(&mut vs);
                for v in vs {
                    if !bound.contains(v) {
                        flag(&mut report, v, VarPosition::Negated(i));
                    }
                }
            }
            Literal::Arith { result, expr } => {
                for t in expr.terms() {
                    if let Term::Var(v) = t {
                        if !bound.contains(v) {
                            flag(&mut report, v, VarPosition::Arithmetic(i));
                        }
                    }
                }
                if let Term::Var(v) = result {
                    bound.insert(v);
                }
            }
            Literal::Compare { left, right, .. } => {
                for t in [left, right] {
                    if let Term::Var(v) = t {
                        if !bound.contains(v) {
                            flag(&mut report, v, VarPosition::Comparison(i));
                        }
                    }
                }
            }
        }
    }
    let mut head_vars = Vec::new();
    clause.head.variables(&mut head_vars);
    for v in head_vars {
        if !bound.contains(v) {
            flag(&mut report, v, VarPosition::Head);
        }
    }
    report
}

fn declaration_issues(clause: &Clause, sig: &Signature) -> Vec<ClauseIssue> {
    let mut report = Vec::new();
    let mut push = |issue: ClauseIssue| {
        if !report.contains(&issue) {
            report.push(issue);
        }
    };
    for atom in clause.atoms() {
        match sig.get(&atom.pred) {
            None => push(ClauseIssue::UndeclaredSymbol(atom.pred.to_string())),
            Some(d) if d.kind != SymbolKind::Predicate => push(ClauseIssue::KindMismatch {
                name: atom.pred.to_string(),
                declared: d,
                used: "predicate",
            }),
            Some(d) if d.arity != atom.arity() => push(ClauseIssue::ArityMismatch {
                name: atom.pred.to_string(),
                expected: d,
                found: atom.arity(),
            }),
            Some(_) => {}
        }
    }
    for c in clause.constants() {
        match sig.get(c) {
            None => push(ClauseIssue::UndeclaredSymbol(c.to_string())),
            Some(d) if !d.is_constant() => push(ClauseIssue::KindMismatch {
                name: c.to_string(),
                declared: d,
                used: "constant",
            }),
            Some(_) => {}
        }
    }
    report
}

/// A variable-free value in a model.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Sym(Name),
}

impl Value {
    pub fn sym(name: &str) -> Self {
        Value::Sym(name.into())
    }

    pub fn to_term(&self) -> Term {
        match self {
            Value::Int(i) => Term::Int(*i),
            Value::Sym(s) => Term::Const(s.clone()),
        }
    }
}

/// A ground atom: predicate applied to values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    pub pred: Name,
    pub args: Vec<Value>,
}

impl GroundAtom {
    pub fn new(pred: &str, args: Vec<Value>) -> Self {
        GroundAtom {
            pred: pred.into(),
            args,
        }
    }

    pub fn to_atom(&self) -> Atom {
        Atom {
            pred: self.pred.clone(),
            args: self.args.iter().map(Value::to_term).collect(),
        }
    }

    pub fn rename_symbols(&self, rename: impl Fn(&Name) -> Option<Name>) -> GroundAtom {
        let apply = |n: &Name| rename(n).unwrap_or_else(|| n.clone());
        GroundAtom {
            pred: apply(&self.pred),
            args: self
                .args
                .iter()
                .map(|v| match v {
                    Value::Sym(s) => Value::Sym(apply(s)),
                    other => other.clone(),
                })
                .collect(),
        }
    }

    pub fn mentions_hidden(&self) -> bool {
        is_hidden_name(&self.pred)
            || self
                .args
                .iter()
                .any(|v| matches!(v, Value::Sym(s) if is_hidden_name(s)))
    }
}

// Text forms. Names that are not plain identifiers (generated hidden names)
// are single-quoted.

pub(crate) fn write_name(f: &mut fmt::Formatter<'_>, name: &str) -> fmt::Result {
    if is_plain_identifier(name) {
        f.write_str(name)
    } else {
        write!(f, "'{name}'")
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Sym(s) => write_name(f, s),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(c) => write_name(f, c),
            Term::Int(i) => write!(f, "{i}"),
        }
    }
}

fn write_args<T: fmt::Display>(f: &mut fmt::Formatter<'_>, args: &[T]) -> fmt::Result {
    f.write_str("(")?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    f.write_str(")")
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_name(f, &self.pred)?;
        write_args(f, &self.args)
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_name(f, &self.pred)?;
        write_args(f, &self.args)
    }
}

impl ArithExpr {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        match self {
            ArithExpr::Term(Term::Int(i)) if *i < 0 && min_prec > 0 => write!(f, "({i})"),
            ArithExpr::Term(t) => write!(f, "{t}"),
            ArithExpr::Binary(op, l, r) => {
                let p = op.precedence();
                let paren = p < min_prec;
                if paren {
                    f.write_str("(")?;
                }
                l.fmt_prec(f, p)?;
                write!(f, " {} ", op.symbol())?;
                // Left-associative: a right operand of equal precedence needs parens.
                r.fmt_prec(f, p + 1)?;
                if paren {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for ArithExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Pos(a) => write!(f, "{a}"),
            Literal::Neg(a) => write!(f, "\\+ {a}"),
            Literal::Arith { result, expr } => write!(f, "{result} is {expr}"),
            Literal::Compare { left, op, right } => write!(f, "{left} {} {right}", op.symbol()),
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            f.write_str(" :- ")?;
            for (i, l) in self.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{l}")?;
            }
        }
        f.write_str(".")
    }
}
