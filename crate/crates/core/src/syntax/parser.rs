use std::collections::BTreeSet;
use std::path::PathBuf;

use super::lexer::{tokenize, Tok, Token};
use super::{
    Application, Manifest, MorphismSource, ParseError, ParseOptions, PatternSource, SyntaxError,
};
use crate::terms::{
    is_hidden_name, is_valid_name, ArithExpr, ArithOp, Atom, Clause, ClauseIssue, CmpOp, Decl,
    Literal, Signature, Symbol, SymbolKind, Term,
};

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    opts: ParseOptions,
}

type PResult<T> = Result<T, ParseError>;

/// Capitalised or underscore-initial identifiers read as variables.
fn variable_like(name: &str) -> bool {
    name.starts_with(|c: char| c.is_uppercase() || c == '_')
}

impl Parser {
    fn new(text: &str, opts: ParseOptions) -> PResult<Self> {
        Ok(Parser {
            toks: tokenize(text)?,
            pos: 0,
            opts,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn line(&self) -> usize {
        self.toks[self.pos].line
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> ParseError {
        let (line, col) = self.here();
        ParseError::Syntax(SyntaxError {
            line,
            col,
            expected: expected.to_string(),
            found: self.peek().to_string(),
        })
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.error(&tok.to_string()))
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<()> {
        if self.at_keyword(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&format!("`{kw}`")))
        }
    }

    fn expect_eof(&mut self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.error("end of input"))
        }
    }

    /// A symbol name: plain identifier, or a quoted generated name.
    fn name(&mut self, what: &str) -> PResult<String> {
        let line = self.line();
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            Tok::Quoted(s) if is_valid_name(&s) => {
                if is_hidden_name(&s) && !self.opts.allow_reserved {
                    return Err(ParseError::ReservedName { name: s, line });
                }
                self.bump();
                Ok(s)
            }
            _ => Err(self.error(what)),
        }
    }

    fn string(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.error("string literal")),
        }
    }

    fn once<T>(&self, slot: &Option<T>, kw: &str) -> PResult<()> {
        if slot.is_some() {
            Err(self.error(&format!("at most one `{kw}`")))
        } else {
            Ok(())
        }
    }

    // ---- declarations -------------------------------------------------

    /// `{ concept A, B  individual c  pred p/2, q/1 }`
    fn signature_block(&mut self) -> PResult<Vec<(Symbol, usize)>> {
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        while !self.eat(&Tok::RBrace) {
            let kind = match self.peek() {
                Tok::Ident(s) if s == "concept" => SymbolKind::Concept,
                Tok::Ident(s) if s == "individual" => SymbolKind::Individual,
                Tok::Ident(s) if s == "pred" => SymbolKind::Predicate,
                _ => return Err(self.error("`concept`, `individual`, `pred` or `}`")),
            };
            self.bump();
            loop {
                let line = self.line();
                let name = self.name("symbol name")?;
                let decl = if kind == SymbolKind::Predicate {
                    self.expect(Tok::Slash)?;
                    let arity = match self.peek() {
                        Tok::Int(n) => *n as usize,
                        _ => return Err(self.error("arity")),
                    };
                    self.bump();
                    Decl::predicate(arity)
                } else {
                    Decl { kind, arity: 0 }
                };
                let symbol = Symbol::new(name.as_str(), decl).map_err(|reason| {
                    ParseError::InvalidDeclaration {
                        name: name.clone(),
                        line,
                        reason,
                    }
                })?;
                out.push((symbol, line));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        Ok(out)
    }

    fn name_list(&mut self) -> PResult<Vec<String>> {
        let mut out = vec![self.name("name")?];
        while self.eat(&Tok::Comma) {
            out.push(self.name("name")?);
        }
        Ok(out)
    }

    // ---- clauses --------------------------------------------------------

    fn term(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(if variable_like(&s) {
                    Term::Var(s.into())
                } else {
                    Term::Const(s.into())
                })
            }
            Tok::Quoted(_) => Ok(Term::Const(self.name("constant")?.into())),
            Tok::Int(i) => {
                self.bump();
                Ok(Term::Int(i))
            }
            Tok::Minus if matches!(self.peek_at(1), Tok::Int(_)) => {
                self.bump();
                match self.bump() {
                    Tok::Int(i) => Ok(Term::Int(-i)),
                    _ => unreachable!(),
                }
            }
            _ => Err(self.error("term")),
        }
    }

    fn atom(&mut self) -> PResult<Atom> {
        let pred = match self.peek() {
            Tok::Ident(s) if variable_like(s) => return Err(self.error("predicate name")),
            Tok::Ident(_) | Tok::Quoted(_) => self.name("predicate name")?,
            _ => return Err(self.error("atom")),
        };
        self.expect(Tok::LParen)?;
        let mut args = vec![self.term()?];
        while self.eat(&Tok::Comma) {
            args.push(self.term()?);
        }
        self.expect(Tok::RParen)?;
        Ok(Atom {
            pred: pred.into(),
            args,
        })
    }

    fn expr(&mut self) -> PResult<ArithExpr> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = ArithExpr::binary(op, lhs, self.product()?);
        }
    }

    fn product(&mut self) -> PResult<ArithExpr> {
        let mut lhs = self.primary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => ArithOp::Mul,
                Tok::IntDiv => ArithOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = ArithExpr::binary(op, lhs, self.primary()?);
        }
    }

    fn primary(&mut self) -> PResult<ArithExpr> {
        if self.eat(&Tok::LParen) {
            let e = self.expr()?;
            self.expect(Tok::RParen)?;
            Ok(e)
        } else {
            Ok(ArithExpr::Term(self.term()?))
        }
    }

    fn literal(&mut self) -> PResult<Literal> {
        if self.eat(&Tok::Not) {
            return Ok(Literal::Neg(self.atom()?));
        }
        let is_atom = match (self.peek(), self.peek_at(1)) {
            (Tok::Ident(s), Tok::LParen) => !variable_like(s),
            (Tok::Quoted(_), Tok::LParen) => true,
            _ => false,
        };
        if is_atom {
            return Ok(Literal::Pos(self.atom()?));
        }
        let left = self.term()?;
        if self.at_keyword("is") {
            self.bump();
            return Ok(Literal::Arith {
                result: left,
                expr: self.expr()?,
            });
        }
        let op = match self.peek() {
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            _ => return Err(self.error("`is` or a comparison operator")),
        };
        self.bump();
        Ok(Literal::Compare {
            left,
            op,
            right: self.term()?,
        })
    }

    fn body(&mut self) -> PResult<Vec<Literal>> {
        let mut body = vec![self.literal()?];
        while self.eat(&Tok::Comma) {
            body.push(self.literal()?);
        }
        Ok(body)
    }

    /// `head.` or `head :- lit, ... .`; returns the clause and its line.
    fn clause(&mut self) -> PResult<(Clause, usize)> {
        let line = self.line();
        let head = self.atom()?;
        let body = if self.eat(&Tok::Neck) {
            self.body()?
        } else {
            Vec::new()
        };
        self.expect(Tok::Dot)?;
        Ok((Clause::new(head, body), line))
    }

    fn clause_block(&mut self) -> PResult<Vec<(Clause, usize)>> {
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        while !self.eat(&Tok::RBrace) {
            out.push(self.clause()?);
        }
        Ok(out)
    }
}

fn build_signature(decls: &[(Symbol, usize)]) -> PResult<Signature> {
    let mut sig = Signature::new();
    for (symbol, line) in decls {
        if sig.contains(symbol.name()) {
            return Err(ParseError::DuplicateSignatureEntry {
                name: symbol.name().to_string(),
                line: *line,
            });
        }
        sig.declare(symbol).expect("fresh name");
    }
    Ok(sig)
}

/// Parses a pattern file, rejecting generated `hidden:` names.
pub fn parse_pattern(text: &str) -> Result<PatternSource, ParseError> {
    parse_pattern_with(text, ParseOptions::default())
}

/// Checks performed here are local: symbols must agree with this pattern's
/// own declarations. A pattern with no `uses` must declare every symbol it
/// mentions; otherwise undeclared symbols are resolved when flattening.
pub fn parse_pattern_with(text: &str, opts: ParseOptions) -> Result<PatternSource, ParseError> {
    parse_pattern_located(text, opts).map(|(p, _)| p)
}

/// Like [`parse_pattern_with`], also returning the line each axiom starts on.
pub fn parse_pattern_located(
    text: &str,
    opts: ParseOptions,
) -> Result<(PatternSource, Vec<usize>), ParseError> {
    let mut p = Parser::new(text, opts)?;
    p.expect_keyword("pattern")?;
    let name = p.name("pattern name")?;
    p.expect(Tok::LBrace)?;
    let (mut summary, mut description, mut uses, mut decls, mut axioms) =
        (None, None, None, None, None);
    while !p.eat(&Tok::RBrace) {
        match p.peek() {
            Tok::Ident(s) if s == "summary" => {
                p.once(&summary, "summary")?;
                p.bump();
                summary = Some(p.string()?);
            }
            Tok::Ident(s) if s == "description" => {
                p.once(&description, "description")?;
                p.bump();
                description = Some(p.string()?);
            }
            Tok::Ident(s) if s == "uses" => {
                p.once(&uses, "uses")?;
                p.bump();
                uses = Some(p.name_list()?);
            }
            Tok::Ident(s) if s == "signature" => {
                p.once(&decls, "signature")?;
                p.bump();
                decls = Some(p.signature_block()?);
            }
            Tok::Ident(s) if s == "axioms" => {
                p.once(&axioms, "axioms")?;
                p.bump();
                axioms = Some(p.clause_block()?);
            }
            _ => {
                return Err(
                    p.error("`summary`, `description`, `uses`, `signature`, `axioms` or `}`")
                )
            }
        }
    }
    p.expect_eof()?;

    let signature = build_signature(&decls.unwrap_or_default())?;
    let uses = uses.unwrap_or_default();
    let mut clauses = Vec::new();
    let mut lines = Vec::new();
    for (clause, line) in axioms.unwrap_or_default() {
        let clause = clause.resolve_constants(&signature);
        check_local_symbols(&clause, &signature, uses.is_empty(), line)?;
        clauses.push(clause);
        lines.push(line);
    }
    let source = PatternSource {
        name,
        summary: summary.unwrap_or_default(),
        description,
        uses,
        signature,
        clauses,
    };
    Ok((source, lines))
}

fn check_local_symbols(
    clause: &Clause,
    sig: &Signature,
    self_contained: bool,
    line: usize,
) -> PResult<()> {
    for atom in clause.atoms() {
        match sig.get(&atom.pred) {
            None if self_contained => {
                return Err(ParseError::UndeclaredSymbolInAxiom {
                    name: atom.pred.to_string(),
                    line,
                })
            }
            Some(d) if d.kind != SymbolKind::Predicate => {
                return Err(ParseError::InvalidClause {
                    line,
                    issue: ClauseIssue::KindMismatch {
                        name: atom.pred.to_string(),
                        declared: d,
                        used: "predicate",
                    },
                })
            }
            Some(d) if d.arity != atom.arity() => {
                return Err(ParseError::InvalidClause {
                    line,
                    issue: ClauseIssue::ArityMismatch {
                        name: atom.pred.to_string(),
                        expected: d,
                        found: atom.arity(),
                    },
                })
            }
            _ => {}
        }
    }
    for c in clause.constants() {
        match sig.get(c) {
            None if self_contained => {
                return Err(ParseError::UndeclaredSymbolInAxiom {
                    name: c.to_string(),
                    line,
                })
            }
            Some(d) if !d.is_constant() => {
                return Err(ParseError::InvalidClause {
                    line,
                    issue: ClauseIssue::KindMismatch {
                        name: c.to_string(),
                        declared: d,
                        used: "constant",
                    },
                })
            }
            _ => {}
        }
    }
    Ok(())
}

/// `morphism NAME from PATTERN { [summary "..."] map { a -> b ... } [hide { x ... }] }`.
/// Single `map a -> b` entries are accepted as well.
pub fn parse_morphism(text: &str) -> Result<MorphismSource, ParseError> {
    parse_morphism_with(text, ParseOptions::default())
}

/// Like [`parse_morphism`], but repeated source symbols are kept so that
/// validation reports them as double mappings.
pub fn parse_morphism_lenient(text: &str) -> Result<MorphismSource, ParseError> {
    parse_morphism_with(
        text,
        ParseOptions {
            allow_duplicate_keys: true,
            ..ParseOptions::default()
        },
    )
}

pub fn parse_morphism_with(text: &str, opts: ParseOptions) -> Result<MorphismSource, ParseError> {
    let mut p = Parser::new(text, opts)?;
    p.expect_keyword("morphism")?;
    let name = p.name("morphism name")?;
    p.expect_keyword("from")?;
    let source = p.name("source pattern name")?;
    p.expect(Tok::LBrace)?;
    let mut summary = None;
    let mut pairs: Vec<(String, String)> = Vec::new();
    let mut hides = Vec::new();
    let mut seen = BTreeSet::new();
    let mut pair = |p: &mut Parser, pairs: &mut Vec<(String, String)>| -> PResult<()> {
        let line = p.line();
        let from = p.name("source symbol")?;
        p.expect(Tok::Arrow)?;
        let to = p.name("target symbol")?;
        if !seen.insert(from.clone()) && !opts.allow_duplicate_keys {
            return Err(ParseError::DuplicateSourceKey { name: from, line });
        }
        pairs.push((from, to));
        Ok(())
    };
    while !p.eat(&Tok::RBrace) {
        match p.peek() {
            Tok::Ident(s) if s == "summary" => {
                p.once(&summary, "summary")?;
                p.bump();
                summary = Some(p.string()?);
            }
            Tok::Ident(s) if s == "map" => {
                p.bump();
                if p.eat(&Tok::LBrace) {
                    while !p.eat(&Tok::RBrace) {
                        pair(&mut p, &mut pairs)?;
                    }
                } else {
                    pair(&mut p, &mut pairs)?;
                }
            }
            Tok::Ident(s) if s == "hide" => {
                p.bump();
                if p.eat(&Tok::LBrace) {
                    while !p.eat(&Tok::RBrace) {
                        hides.push(p.name("symbol to hide")?);
                    }
                } else {
                    hides.push(p.name("symbol to hide")?);
                }
            }
            _ => return Err(p.error("`summary`, `map`, `hide` or `}`")),
        }
    }
    p.expect_eof()?;
    Ok(MorphismSource {
        name,
        source,
        summary,
        pairs,
        hides,
    })
}

/// `kb NAME { [summary "..."] [signature {...}] (apply M | include P | facts "f" | rules "f")* }`
pub fn parse_manifest(text: &str) -> Result<Manifest, ParseError> {
    let mut p = Parser::new(text, ParseOptions::default())?;
    p.expect_keyword("kb")?;
    let name = p.name("kb name")?;
    p.expect(Tok::LBrace)?;
    let (mut summary, mut decls) = (None, None);
    let mut applications = Vec::new();
    let (mut fact_files, mut rule_files) = (Vec::new(), Vec::new());
    while !p.eat(&Tok::RBrace) {
        match p.peek() {
            Tok::Ident(s) if s == "summary" => {
                p.once(&summary, "summary")?;
                p.bump();
                summary = Some(p.string()?);
            }
            Tok::Ident(s) if s == "signature" => {
                p.once(&decls, "signature")?;
                p.bump();
                decls = Some(p.signature_block()?);
            }
            Tok::Ident(s) if s == "apply" => {
                p.bump();
                applications.push(Application::Morph(p.name("morphism name")?));
            }
            Tok::Ident(s) if s == "include" => {
                p.bump();
                applications.push(Application::Include(p.name("pattern name")?));
            }
            Tok::Ident(s) if s == "facts" => {
                p.bump();
                fact_files.push(PathBuf::from(p.string()?));
            }
            Tok::Ident(s) if s == "rules" => {
                p.bump();
                rule_files.push(PathBuf::from(p.string()?));
            }
            _ => {
                return Err(
                    p.error("`summary`, `signature`, `apply`, `include`, `facts`, `rules` or `}`")
                )
            }
        }
    }
    p.expect_eof()?;
    if applications.is_empty() && fact_files.is_empty() {
        return Err(ParseError::EmptyManifest { name });
    }
    Ok(Manifest {
        name,
        summary,
        signature: build_signature(&decls.unwrap_or_default())?,
        applications,
        fact_files,
        rule_files,
        base_dir: None,
    })
}

/// Parses ground facts with no signature in scope, so every capitalised
/// identifier is a variable and makes its fact non-ground.
pub fn parse_facts(text: &str) -> Result<Vec<Clause>, ParseError> {
    parse_facts_with(text, &Signature::new())
}

/// Parses ground facts; capitalised names declared as constants in `sig`
/// are constants.
pub fn parse_facts_with(text: &str, sig: &Signature) -> Result<Vec<Clause>, ParseError> {
    let mut p = Parser::new(text, ParseOptions::default())?;
    let mut out = Vec::new();
    while *p.peek() != Tok::Eof {
        let (line, col) = p.here();
        let head = p.atom()?;
        p.expect(Tok::Dot)?;
        let clause = Clause::fact(head).resolve_constants(sig);
        if !clause.head.is_ground() {
            return Err(ParseError::NonGroundFact {
                line,
                col,
                atom: clause.head.to_string(),
            });
        }
        out.push(clause);
    }
    Ok(out)
}

/// Parses a file of clauses (facts and rules) against `sig`.
pub fn parse_rules(text: &str, sig: &Signature) -> Result<Vec<(Clause, usize)>, ParseError> {
    let mut p = Parser::new(text, ParseOptions::default())?;
    let mut out = Vec::new();
    while *p.peek() != Tok::Eof {
        let (clause, line) = p.clause()?;
        out.push((clause.resolve_constants(sig), line));
    }
    Ok(out)
}

/// `?- lit, ... .` The leading `?-` and trailing `.` are optional.
pub fn parse_query(text: &str, sig: &Signature) -> Result<Vec<Literal>, ParseError> {
    let mut p = Parser::new(text, ParseOptions::default())?;
    p.eat(&Tok::QueryStart);
    let body = p.body()?;
    p.eat(&Tok::Dot);
    p.expect_eof()?;
    let probe = Clause::new(Atom::new("query", vec![Term::Int(0)]), body).resolve_constants(sig);
    Ok(probe.body)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undeclared_constant_in_self_contained_pattern() {
        let err =
            parse_pattern("pattern p { signature { pred q/1 } axioms { q(a). } }").unwrap_err();
        assert_eq!(
            err,
            ParseError::UndeclaredSymbolInAxiom {
                name: "a".into(),
                line: 1
            }
        );
    }

    #[test]
    fn empty_input_is_a_syntax_error_at_origin() {
        match parse_pattern("").unwrap_err() {
            ParseError::Syntax(e) => assert_eq!((e.line, e.col), (1, 1)),
            other => panic!("unexpected {other:?}"),
        }
        match parse_pattern("  % only a comment\n").unwrap_err() {
            ParseError::Syntax(e) => assert_eq!(e.found, "end of input"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn declared_capitalised_names_are_constants() {
        let p = parse_pattern(
            "pattern d { signature { concept Node pred to/2, isa/2 }
               axioms { isa(X, Node) :- to(X, Y). } }",
        )
        .unwrap();
        assert_eq!(p.clauses[0].head.args[1], Term::constant("Node"));
        assert_eq!(p.clauses[0].head.args[0], Term::var("X"));
    }

    #[test]
    fn duplicate_declaration() {
        let err = parse_pattern("pattern p {\n signature { pred q/1\n concept q } }").unwrap_err();
        assert_eq!(
            err,
            ParseError::DuplicateSignatureEntry {
                name: "q".into(),
                line: 3
            }
        );
    }

    #[test]
    fn arity_mismatch_against_local_declaration() {
        let err = parse_pattern(
            "pattern p { uses base signature { pred q/1 } axioms { q(X, Y) :- r(X, Y). } }",
        )
        .unwrap_err();
        assert!(matches!(
            err,
            ParseError::InvalidClause {
                issue: ClauseIssue::ArityMismatch { .. },
                ..
            }
        ));
    }

    #[test]
    fn morphism_pairs_keep_file_order() {
        let m = parse_morphism(
            "morphism computer-ram from container {
               map {
                 container -> computer
                 capacity -> ram_size
                 free_space -> available_ram
                 occupied_space -> occupied_ram
                 isa -> isa
               }
             }",
        )
        .unwrap();
        let expected: Vec<(String, String)> = [
            ("container", "computer"),
            ("capacity", "ram_size"),
            ("free_space", "available_ram"),
            ("occupied_space", "occupied_ram"),
            ("isa", "isa"),
        ]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
        assert_eq!(m.pairs, expected);
        assert_eq!(m.source, "container");
    }

    #[test]
    fn morphism_double_mapping_is_rejected() {
        let err = parse_morphism("morphism m from p {\n map a -> x\n map a -> y\n}").unwrap_err();
        assert_eq!(
            err,
            ParseError::DuplicateSourceKey {
                name: "a".into(),
                line: 3
            }
        );
    }

    #[test]
    fn lenient_morphism_parse_keeps_duplicates() {
        let opts = ParseOptions {
            allow_duplicate_keys: true,
            ..ParseOptions::default()
        };
        let m = parse_morphism_with("morphism m from p { map { a -> x a -> y } }", opts).unwrap();
        assert_eq!(m.pairs.len(), 2);
    }

    #[test]
    fn empty_map_block() {
        let m = parse_morphism("morphism m from p { map { } }").unwrap();
        assert!(m.pairs.is_empty() && m.hides.is_empty());
    }

    #[test]
    fn reserved_names_need_opt_in() {
        let text = "pattern t { signature { pred 'hidden:m:0:p'/1 } }";
        assert!(matches!(
            parse_pattern(text),
            Err(ParseError::ReservedName { .. })
        ));
        let opts = ParseOptions {
            allow_reserved: true,
            ..ParseOptions::default()
        };
        assert!(parse_pattern_with(text, opts).is_ok());
    }

    #[test]
    fn facts_must_be_ground() {
        let facts = parse_facts("% wiring\nwired-to(battery1, switch1).\n").unwrap();
        assert_eq!(facts[0].head.to_string(), "wired-to(battery1, switch1)");
        assert!(matches!(
            parse_facts("wired-to(X, switch1)."),
            Err(ParseError::NonGroundFact {
                line: 1,
                col: 1,
                ..
            })
        ));
        let sig: Signature = [Symbol::concept("Electrical-Appliance").unwrap()]
            .into_iter()
            .collect();
        let f = parse_facts_with("isa(light1, Electrical-Appliance).", &sig).unwrap();
        assert!(f[0].is_ground_fact());
    }

    #[test]
    fn manifest_needs_content() {
        assert_eq!(
            parse_manifest("kb empty { summary \"nothing\" }").unwrap_err(),
            ParseError::EmptyManifest {
                name: "empty".into()
            }
        );
        let m = parse_manifest(
            "kb k { apply m1 include taxonomy facts \"a.kfact\" rules \"r.kfact\" }",
        )
        .unwrap();
        assert_eq!(
            m.applications,
            vec![
                Application::Morph("m1".into()),
                Application::Include("taxonomy".into())
            ]
        );
        assert_eq!(m.fact_files, vec![PathBuf::from("a.kfact")]);
    }

    #[test]
    fn arithmetic_and_comparisons() {
        let q = parse_query(
            "?- p(X, N), M is N - 1 * (2 + X) // 3, M >= -2, X \\= a.",
            &Signature::new(),
        )
        .unwrap();
        assert_eq!(q.len(), 4);
        assert_eq!(q[1].to_string(), "M is N - 1 * (2 + X) // 3");
        assert_eq!(q[2].to_string(), "M >= -2");
    }

    #[test]
    fn variable_as_predicate_is_rejected() {
        assert!(parse_query("?- P(x).", &Signature::new()).is_err());
    }
}
