//! The `kpc` command line: `check`, `morph`, `assemble`, `query`, `equiv`
//! and `graph`.
//!
//! Exit status is 0 on success, 1 when an input fails validation (or an
//! equivalence check fails) and 2 on a usage error. With `--format json`
//! every output line is one JSON object.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use crate::compose::{
    assemble_kb_with, export_inclusion_graph, files_with_extension, flatten_pattern, load_manifest,
    resolve_uses_order, AssembleOptions, AssembledKB, ClauseOrigin, ComposeError, FlatPattern,
    PatternLibrary,
};
use crate::eval::{evaluate, negative_results, query, EvalError};
use crate::morphism::{
    apply_morphism, complete_morphism, eliminate_dead_axioms, validate_morphism, MorphismIssue,
};
use crate::oracle::{check_equivalence, run_trials, EquivalenceReport, OracleError};
use crate::stdlib::default_stdlib_dir;
use crate::syntax::{
    parse_facts_with, parse_morphism_lenient, parse_pattern, parse_pattern_located, parse_query,
    render_theory, Manifest, MorphismSource, ParseError, ParseOptions,
};
use crate::terms::{Clause, Decl, GroundAtom, Signature, Value};

#[derive(Debug, Parser)]
#[command(
    name = "kpc",
    version,
    about = "Knowledge pattern compiler and reasoner"
)]
struct Cli {
    /// Library directory holding `patterns/`, `morphisms/` and `kbs/`.
    /// Repeatable; defaults to the bundled corpus (or `$KPC_STDLIB`).
    #[arg(long = "lib", value_name = "DIR", global = true)]
    lib: Vec<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,

    /// More progress detail on stderr.
    #[arg(short, long, action = ArgAction::Count, global = true)]
    verbose: u8,

    /// Suppress warnings.
    #[arg(short, long, global = true, conflicts_with = "verbose")]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate pattern, morphism, manifest and fact files.
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Print the morphed copy of a morphism's source pattern.
    Morph {
        /// Morphism name or `.kmor` file.
        morphism: String,
        #[arg(long)]
        eliminate_dead: bool,
    },
    /// Print a manifest's knowledge base as one flat theory.
    Assemble {
        /// Manifest name or `.kman` file.
        manifest: String,
        #[arg(long)]
        eliminate_dead: bool,
    },
    /// Evaluate a knowledge base and answer a goal such as `?- powered(X).`
    Query { manifest: String, goal: String },
    /// Compare morphing with bridge rules on a fact base.
    Equiv {
        morphism: String,
        #[arg(long, value_name = "FILE")]
        facts: PathBuf,
        /// Also run this many randomized fact bases.
        #[arg(long, value_name = "N")]
        trials: Option<usize>,
    },
    /// DOT graph of the library and the given knowledge bases.
    Graph { manifests: Vec<String> },
}

/// One reported problem.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Diagnostic {
    file: Option<PathBuf>,
    line: Option<usize>,
    kind: &'static str,
    message: String,
}

impl Diagnostic {
    fn new(kind: &'static str, message: impl Into<String>) -> Self {
        Diagnostic {
            file: None,
            line: None,
            kind,
            message: message.into(),
        }
    }

    fn at(mut self, file: &Path, line: Option<usize>) -> Self {
        self.file.get_or_insert_with(|| file.to_path_buf());
        if self.line.is_none() {
            self.line = line;
        }
        self
    }
}

enum Failure {
    Usage(String),
    Invalid(Vec<Diagnostic>),
}

impl From<Diagnostic> for Failure {
    fn from(d: Diagnostic) -> Self {
        Failure::Invalid(vec![d])
    }
}

type Outcome = Result<i32, Failure>;

/// Runs one invocation. `args` includes the program name.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return if code == 0 { 0 } else { 2 };
        }
    };
    let mut ctx = Ctx {
        format: cli.format,
        verbose: cli.verbose,
        quiet: cli.quiet,
        out,
        err,
    };
    let result = Workspace::load(&cli.lib, &mut ctx).and_then(|mut ws| match cli.command {
        Command::Check { files } => check(&mut ws, &files, &mut ctx),
        Command::Morph {
            morphism,
            eliminate_dead,
        } => morph(&mut ws, &morphism, eliminate_dead, &mut ctx),
        Command::Assemble {
            manifest,
            eliminate_dead,
        } => assemble(&ws, &manifest, eliminate_dead, &mut ctx),
        Command::Query { manifest, goal } => run_query(&ws, &manifest, &goal, &mut ctx),
        Command::Equiv {
            morphism,
            facts,
            trials,
        } => equiv(&mut ws, &morphism, &facts, trials, &mut ctx),
        Command::Graph { manifests } => graph(&ws, &manifests, &mut ctx),
    });
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            ctx.error_line("usage", &msg);
            2
        }
        Err(Failure::Invalid(diags)) => {
            for d in &diags {
                ctx.diagnostic(d);
            }
            1
        }
    }
}

struct Ctx<'a> {
    format: Format,
    verbose: u8,
    quiet: bool,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn json(&self) -> bool {
        self.format == Format::Json
    }

    fn emit(&mut self, value: Json) {
        let _ = writeln!(self.out, "{value}");
    }

    fn text(&mut self, s: &str) {
        let _ = write!(self.out, "{s}");
        if !s.is_empty() && !s.ends_with('\n') {
            let _ = writeln!(self.out);
        }
    }

    fn info(&mut self, msg: &str) {
        if self.verbose > 0 {
            let _ = writeln!(self.err, "kpc: {msg}");
        }
    }

    fn warn(&mut self, msg: &str) {
        if self.quiet {
            return;
        }
        if self.json() {
            let _ = writeln!(
                self.err,
                "{}",
                json!({"severity": "warning", "message": msg})
            );
        } else {
            let _ = writeln!(self.err, "warning: {msg}");
        }
    }

    fn error_line(&mut self, kind: &str, msg: &str) {
        if self.json() {
            let _ = writeln!(
                self.err,
                "{}",
                json!({"severity": "error", "kind": kind, "message": msg})
            );
        } else {
            let _ = writeln!(self.err, "error: {msg}");
        }
    }

    fn diagnostic(&mut self, d: &Diagnostic) {
        if self.json() {
            let _ = writeln!(
                self.err,
                "{}",
                json!({
                    "severity": "error",
                    "file": d.file.as_ref().map(|p| p.display().to_string()),
                    "line": d.line,
                    "kind": d.kind,
                    "message": d.message,
                })
            );
        } else {
            let anchor = match (&d.file, d.line) {
                (Some(f), Some(l)) => format!("{}:{l}: ", f.display()),
                (Some(f), None) => format!("{}: ", f.display()),
                _ => String::new(),
            };
            let _ = writeln!(self.err, "{anchor}error[{}]: {}", d.kind, d.message);
        }
    }
}

/// The library directories and their definitions, with the file each
/// definition came from.
struct Workspace {
    dirs: Vec<PathBuf>,
    lib: PatternLibrary,
    files: BTreeMap<(&'static str, String), PathBuf>,
}

impl Workspace {
    fn load(dirs: &[PathBuf], ctx: &mut Ctx<'_>) -> Result<Self, Failure> {
        let dirs = if dirs.is_empty() {
            vec![default_stdlib_dir()]
        } else {
            dirs.to_vec()
        };
        let mut ws = Workspace {
            dirs,
            lib: PatternLibrary::new(),
            files: BTreeMap::new(),
        };
        for dir in ws.dirs.clone() {
            if !dir.is_dir() {
                return Err(Failure::Usage(format!(
                    "library directory {} does not exist",
                    dir.display()
                )));
            }
            for path in
                files_with_extension(&dir.join("patterns"), "kpat").map_err(compose_diags)?
            {
                let p = read_parsed(&path, parse_pattern)?;
                ws.files.insert(("pattern", p.name.clone()), path.clone());
                ws.lib
                    .add_pattern(p)
                    .map_err(|e| in_file(compose_diags(e), &path))?;
            }
            for path in
                files_with_extension(&dir.join("morphisms"), "kmor").map_err(compose_diags)?
            {
                let m = read_parsed(&path, parse_morphism_lenient)?;
                ws.files.insert(("morphism", m.name.clone()), path.clone());
                ws.lib
                    .add_morphism(m)
                    .map_err(|e| in_file(compose_diags(e), &path))?;
            }
            ctx.info(&format!("library {}", dir.display()));
        }
        Ok(ws)
    }

    /// A morphism by name, or loaded from a `.kmor` file (which then
    /// shadows any library morphism of the same name).
    fn morphism(&mut self, arg: &str) -> Result<MorphismSource, Failure> {
        let path = Path::new(arg);
        if arg.ends_with(".kmor") || path.is_file() {
            let m = read_parsed(path, parse_morphism_lenient)?;
            self.files
                .insert(("morphism", m.name.clone()), path.to_path_buf());
            self.lib.put_morphism(m.clone());
            return Ok(m);
        }
        self.lib
            .morphism(arg)
            .cloned()
            .ok_or_else(|| compose_diags(ComposeError::UnknownMorphism(arg.to_string())))
    }

    /// A manifest by path, or by KB name among the libraries' `kbs/`.
    fn manifest(&self, arg: &str) -> Result<(PathBuf, Manifest), Failure> {
        let path = Path::new(arg);
        if arg.ends_with(".kman") || path.is_file() {
            let m = load_manifest(path).map_err(compose_diags)?;
            return Ok((path.to_path_buf(), m));
        }
        for dir in &self.dirs {
            for p in files_with_extension(&dir.join("kbs"), "kman").map_err(compose_diags)? {
                let m = load_manifest(&p).map_err(compose_diags)?;
                if m.name == arg {
                    return Ok((p, m));
                }
            }
        }
        Err(Diagnostic::new("UnknownKb", format!("no knowledge base named `{arg}`")).into())
    }

    fn morphism_file(&self, name: &str) -> Option<&PathBuf> {
        self.files.get(&("morphism", name.to_string()))
    }

    /// The flattened source of a morphism, after checking the morphism
    /// against it.
    fn validated_source(&self, m: &MorphismSource) -> Result<FlatPattern, Failure> {
        let file = self.morphism_file(&m.name).cloned();
        let flat = flatten_pattern(&m.source, &self.lib).map_err(|e| {
            let diags = self.located(e);
            match &file {
                Some(f) => in_file(diags, f),
                None => diags,
            }
        })?;
        let issues = validate_morphism(m, &flat, &Signature::new());
        if !issues.is_empty() {
            return Err(Failure::Invalid(self.issue_diags(&m.name, &issues)));
        }
        Ok(flat)
    }

    /// Diagnostics for an error about one pattern clause point at the
    /// clause in its source file.
    fn located(&self, e: ComposeError) -> Failure {
        let ComposeError::InvalidClause {
            context, clause, ..
        } = &e
        else {
            return compose_diags(e);
        };
        let Some(path) = self.files.get(&("pattern", context.clone())) else {
            return compose_diags(e);
        };
        let line = fs::read_to_string(path).ok().and_then(|text| {
            let (p, lines) = parse_pattern_located(&text, ParseOptions::default()).ok()?;
            let i = p.clauses.iter().position(|c| c.to_string() == *clause)?;
            lines.get(i).copied()
        });
        Failure::Invalid(
            compose_diags_of(&e)
                .into_iter()
                .map(|d| d.at(path, line))
                .collect(),
        )
    }

    fn issue_diags(&self, morphism: &str, issues: &[MorphismIssue]) -> Vec<Diagnostic> {
        let file = self.morphism_file(morphism);
        let text = file.and_then(|f| fs::read_to_string(f).ok());
        issues
            .iter()
            .map(|issue| {
                let mut d =
                    Diagnostic::new(issue.kind(), format!("morphism `{morphism}`: {issue}"));
                if let Some(f) = file {
                    let line = text.as_deref().and_then(|t| issue_line(t, issue));
                    d = d.at(f, line);
                }
                d
            })
            .collect()
    }

    fn assemble(
        &self,
        path: &Path,
        man: &Manifest,
        eliminate_dead: bool,
    ) -> Result<AssembledKB, Failure> {
        assemble_kb_with(man, &self.lib, &AssembleOptions { eliminate_dead }).map_err(|e| {
            let mut diags = Vec::new();
            self.collect(&e, path, &mut diags);
            Failure::Invalid(diags)
        })
    }

    /// Diagnostics for an assembly error raised while building the manifest at `path`.
    fn collect(&self, e: &ComposeError, path: &Path, diags: &mut Vec<Diagnostic>) {
        match e {
            ComposeError::AtApplication {
                index,
                name,
                source,
            } => {
                let line = fs::read_to_string(path)
                    .ok()
                    .and_then(|t| nth_application_line(&t, *index));
                let start = diags.len();
                self.collect(source, path, diags);
                for d in &mut diags[start..] {
                    d.message = format!("application {index} (`{name}`): {}", d.message);
                    if d.file.is_none() {
                        d.file = Some(path.to_path_buf());
                        d.line = line;
                    }
                }
            }
            ComposeError::InvalidMorphism { morphism, issues } => {
                diags.extend(self.issue_diags(morphism, issues));
            }
            other => {
                let mut ds = compose_diags_of(other);
                for d in &mut ds {
                    d.file.get_or_insert_with(|| path.to_path_buf());
                }
                diags.extend(ds);
            }
        }
    }
}

fn read_parsed<T>(
    path: &Path,
    parse: impl FnOnce(&str) -> Result<T, ParseError>,
) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Diagnostic::new("Io", e.to_string()).at(path, None))?;
    parse(&text).map_err(|e| parse_diag(&e, path).into())
}

fn parse_diag(e: &ParseError, path: &Path) -> Diagnostic {
    Diagnostic::new(e.kind(), e.to_string()).at(path, e.line())
}

fn compose_diags_of(e: &ComposeError) -> Vec<Diagnostic> {
    match e {
        ComposeError::Parse { path, source } => vec![parse_diag(source, path)],
        ComposeError::Io { path, source } => {
            vec![Diagnostic::new("Io", source.to_string()).at(path, None)]
        }
        ComposeError::InvalidMorphism { morphism, issues } => issues
            .iter()
            .map(|i| Diagnostic::new(i.kind(), format!("morphism `{morphism}`: {i}")))
            .collect(),
        ComposeError::AtApplication {
            index,
            name,
            source,
        } => compose_diags_of(source)
            .into_iter()
            .map(|mut d| {
                d.message = format!("application {index} (`{name}`): {}", d.message);
                d
            })
            .collect(),
        other => vec![Diagnostic::new(other.kind(), other.to_string())],
    }
}

fn compose_diags(e: ComposeError) -> Failure {
    Failure::Invalid(compose_diags_of(&e))
}

fn in_file(f: Failure, path: &Path) -> Failure {
    match f {
        Failure::Invalid(ds) => {
            Failure::Invalid(ds.into_iter().map(|d| d.at(path, None)).collect())
        }
        usage => usage,
    }
}

fn eval_diag(e: EvalError) -> Failure {
    Diagnostic::new(e.kind(), e.to_string()).into()
}

/// Line of the `map` entry an issue is about: the last `sym ->` for a
/// double mapping or conflation, the first otherwise.
fn issue_line(text: &str, issue: &MorphismIssue) -> Option<usize> {
    let (symbol, as_source, last) = match issue {
        MorphismIssue::DoubleMapping { symbol } => (symbol.as_str(), true, true),
        MorphismIssue::UnknownSourceSymbol { symbol } => (symbol.as_str(), true, false),
        MorphismIssue::TargetSignatureConflict { source_symbol, .. } => {
            (source_symbol.as_str(), true, false)
        }
        MorphismIssue::NonInjective { target, .. } => (target.as_str(), false, true),
        MorphismIssue::InvalidTarget { target } => (target.as_str(), false, false),
    };
    let mut hits = text.lines().enumerate().filter(|(_, line)| {
        let code = line.split('%').next().unwrap_or("");
        let toks: Vec<&str> = code.split_whitespace().collect();
        toks.windows(2).any(|w| {
            if as_source {
                w[0] == symbol && w[1] == "->"
            } else {
                w[0] == "->" && w[1].trim_end_matches([',', '}']) == symbol
            }
        })
    });
    let hit = if last { hits.last() } else { hits.next() };
    hit.map(|(i, _)| i + 1)
}

fn nth_application_line(text: &str, index: usize) -> Option<usize> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let first = l.split_whitespace().next();
            matches!(first, Some("apply" | "include"))
        })
        .nth(index)
        .map(|(i, _)| i + 1)
}

fn check(ws: &mut Workspace, files: &[PathBuf], ctx: &mut Ctx<'_>) -> Outcome {
    enum Parsed {
        Pattern(String),
        Morphism(MorphismSource),
        Manifest(Manifest),
        Facts(String),
    }
    let mut diags: Vec<Diagnostic> = Vec::new();
    let mut parsed: Vec<(PathBuf, Parsed)> = Vec::new();
    for path in files {
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        let result = match ext {
            "kpat" => read_parsed(path, parse_pattern).map(|p| {
                let name = p.name.clone();
                ws.files.insert(("pattern", name.clone()), path.clone());
                ws.lib.put_pattern(p);
                Parsed::Pattern(name)
            }),
            "kmor" => read_parsed(path, parse_morphism_lenient).map(|m| {
                ws.files.insert(("morphism", m.name.clone()), path.clone());
                ws.lib.put_morphism(m.clone());
                Parsed::Morphism(m)
            }),
            "kman" => load_manifest(path)
                .map(Parsed::Manifest)
                .map_err(compose_diags),
            "kfact" => fs::read_to_string(path)
                .map(Parsed::Facts)
                .map_err(|e| Diagnostic::new("Io", e.to_string()).at(path, None).into()),
            _ => {
                return Err(Failure::Usage(format!(
                    "{}: expected a .kpat, .kmor, .kman or .kfact file",
                    path.display()
                )))
            }
        };
        match result {
            Ok(p) => parsed.push((path.clone(), p)),
            Err(Failure::Invalid(ds)) => diags.extend(ds),
            Err(usage) => return Err(usage),
        }
    }

    if let Err(e) = resolve_uses_order(&ws.lib) {
        diags.extend(compose_diags_of(&e));
    }
    let constants = constant_signature(&ws.lib);
    let mut ok = Vec::new();
    for (path, item) in &parsed {
        let result = match item {
            Parsed::Pattern(name) => flatten_pattern(name, &ws.lib)
                .map(|_| ())
                .map_err(|e| in_file(ws.located(e), path)),
            Parsed::Morphism(m) => ws.validated_source(m).map(|_| ()),
            Parsed::Manifest(man) => ws.assemble(path, man, false).map(|_| ()),
            Parsed::Facts(text) => parse_facts_with(text, &constants)
                .map(|_| ())
                .map_err(|e| parse_diag(&e, path).into()),
        };
        match result {
            Ok(()) => ok.push(path.clone()),
            Err(Failure::Invalid(ds)) => diags.extend(ds),
            Err(usage) => return Err(usage),
        }
    }

    for path in &ok {
        if ctx.json() {
            ctx.emit(json!({"file": path.display().to_string(), "status": "ok"}));
        } else {
            ctx.text(&format!("{}: ok", path.display()));
        }
    }
    if diags.is_empty() {
        Ok(0)
    } else {
        Err(Failure::Invalid(diags))
    }
}

/// Every constant the library can name: declared in a pattern, or the
/// image of a mapped constant. Used to read stand-alone fact files.
fn constant_signature(lib: &PatternLibrary) -> Signature {
    let mut sig = Signature::new();
    for p in lib.patterns() {
        for s in p.signature.constants() {
            let _ = sig.declare(&s);
        }
    }
    for m in lib.morphisms() {
        let Some(p) = lib.pattern(&m.source) else {
            continue;
        };
        for (from, to) in &m.pairs {
            if let Some(decl) = p.signature.get(from).filter(Decl::is_constant) {
                let _ = sig.declare_name(to.as_str().into(), decl);
            }
        }
    }
    sig
}

fn morph(ws: &mut Workspace, arg: &str, eliminate_dead: bool, ctx: &mut Ctx<'_>) -> Outcome {
    let m = ws.morphism(arg)?;
    let flat = ws.validated_source(&m)?;
    let r = complete_morphism(&m, &flat, 0);
    let mut theory = apply_morphism(&r);
    let total = theory.clauses.len();
    if eliminate_dead {
        theory = eliminate_dead_axioms(&theory, &r.visible_predicates());
        ctx.info(&format!("kept {} of {total} clauses", theory.clauses.len()));
    }
    let hidden: Vec<String> = r.hidden.iter().map(|h| h.to_string()).collect();
    if ctx.json() {
        ctx.emit(json!({
            "type": "theory",
            "name": m.name,
            "source": m.source,
            "hidden": hidden,
            "clauses": theory.clauses.len(),
            "dropped": total - theory.clauses.len(),
        }));
        for s in theory.signature.symbols() {
            ctx.emit(json!({"type": "symbol", "name": s.name().to_string(), "decl": s.decl().to_string()}));
        }
        for c in &theory.clauses {
            ctx.emit(json!({"type": "clause", "clause": c.to_string()}));
        }
    } else {
        let mut text = format!("% {} applied to {}\n", m.name, m.source);
        if !hidden.is_empty() {
            text.push_str(&format!("% hidden: {}\n", hidden.join(", ")));
        }
        if eliminate_dead {
            text.push_str(&format!(
                "% dead axioms removed: {}\n",
                total - theory.clauses.len()
            ));
        }
        let summary = format!("{} morphed by {}", m.source, m.name);
        text.push_str(&render_theory(
            &m.name,
            &summary,
            &theory.signature,
            &theory.clauses,
        ));
        ctx.text(&text);
    }
    Ok(0)
}

fn origin_json(o: &ClauseOrigin) -> Json {
    match o {
        ClauseOrigin::Application {
            index,
            morphism,
            pattern,
        } => json!({"application": index, "morphism": morphism, "pattern": pattern}),
        ClauseOrigin::RuleFile { path, line } => {
            json!({"file": path.display().to_string(), "line": line})
        }
        ClauseOrigin::Added => json!({}),
    }
}

fn load_kb(
    ws: &Workspace,
    arg: &str,
    eliminate_dead: bool,
    ctx: &mut Ctx<'_>,
) -> Result<AssembledKB, Failure> {
    let (path, man) = ws.manifest(arg)?;
    let kb = ws.assemble(&path, &man, eliminate_dead)?;
    for w in &kb.warnings {
        ctx.warn(w);
    }
    ctx.info(&format!(
        "assembled {}: {} rules, {} facts",
        kb.name,
        kb.rules.len(),
        kb.facts.len()
    ));
    Ok(kb)
}

fn assemble(ws: &Workspace, arg: &str, eliminate_dead: bool, ctx: &mut Ctx<'_>) -> Outcome {
    let kb = load_kb(ws, arg, eliminate_dead, ctx)?;
    if ctx.json() {
        ctx.emit(json!({
            "type": "kb",
            "name": kb.name,
            "rules": kb.rules.len(),
            "facts": kb.facts.len(),
        }));
        for (rule, origin) in kb.rules.iter().zip(&kb.provenance) {
            ctx.emit(
                json!({"type": "rule", "clause": rule.to_string(), "origin": origin_json(origin)}),
            );
        }
        for f in &kb.facts {
            ctx.emit(json!({"type": "fact", "atom": f.to_string()}));
        }
        return Ok(0);
    }
    let mut text = format!("% kb {}\n", kb.name);
    for app in &kb.applications {
        let n = kb
            .provenance
            .iter()
            .filter(|o| o.application() == Some(app.index))
            .count();
        let how = if app.morphed { "apply" } else { "include" };
        text.push_str(&format!(
            "% application {}: {how} {} ({n} clause{} from {})\n",
            app.index,
            app.morphism.name,
            if n == 1 { "" } else { "s" },
            app.morphism.source_name
        ));
    }
    let mut clauses = kb.rules.clone();
    clauses.extend(kb.facts.iter().map(|f| Clause::fact(f.to_atom())));
    let summary = format!("Knowledge base {}", kb.name);
    text.push_str(&render_theory(&kb.name, &summary, &kb.signature, &clauses));
    ctx.text(&text);
    Ok(0)
}

fn value_json(v: &Value) -> Json {
    match v {
        Value::Int(n) => json!(n),
        Value::Sym(s) => json!(s.to_string()),
    }
}

fn run_query(ws: &Workspace, arg: &str, goal: &str, ctx: &mut Ctx<'_>) -> Outcome {
    let kb = load_kb(ws, arg, false, ctx)?;
    let goal_lits = parse_query(goal, &kb.signature)
        .map_err(|e| Failure::from(Diagnostic::new(e.kind(), format!("goal: {e}"))))?;
    let model = evaluate(&kb).map_err(eval_diag)?;
    ctx.info(&format!(
        "model: {} atoms in {} strata",
        model.len(),
        model.strata().len()
    ));
    for a in negative_results(&kb, &model) {
        ctx.warn(&format!("negative arithmetic result in `{a}`"));
    }
    let answers = query(&model, &goal_lits).map_err(eval_diag)?;
    if ctx.json() {
        for ans in &answers {
            let obj: serde_json::Map<String, Json> = ans
                .iter()
                .map(|(n, v)| (n.to_string(), value_json(v)))
                .collect();
            ctx.emit(Json::Object(obj));
        }
    } else if answers.is_empty() {
        ctx.text("false.");
    } else {
        for ans in &answers {
            if ans.is_empty() {
                ctx.text("true.");
            } else {
                let parts: Vec<String> = ans.iter().map(|(n, v)| format!("{n} = {v}")).collect();
                ctx.text(&parts.join(", "));
            }
        }
    }
    Ok(0)
}

fn report_json(r: &EquivalenceReport) -> Json {
    let list = |s: &std::collections::BTreeSet<GroundAtom>| -> Vec<String> {
        s.iter().map(|a| a.to_string()).collect()
    };
    json!({
        "type": "report",
        "morphism": r.morphism,
        "facts": r.fact_count,
        "equivalent": r.is_equivalent(),
        "A": list(&r.morphed),
        "B": list(&r.translated),
        "C": list(&r.bridged),
    })
}

fn oracle_diag(e: OracleError) -> Failure {
    match e {
        OracleError::Compose(c) => compose_diags(c),
        other => Diagnostic::new(other.kind(), other.to_string()).into(),
    }
}

fn equiv(
    ws: &mut Workspace,
    arg: &str,
    facts_path: &Path,
    trials: Option<usize>,
    ctx: &mut Ctx<'_>,
) -> Outcome {
    let m = ws.morphism(arg)?;
    let flat = ws.validated_source(&m)?;
    let r = complete_morphism(&m, &flat, 0);
    let target = apply_morphism(&r).signature;
    let facts: Vec<GroundAtom> = read_parsed(facts_path, |t| parse_facts_with(t, &target))?
        .into_iter()
        .filter_map(|c| c.head.to_ground())
        .collect();
    let report =
        check_equivalence(&flat, &r, &facts).map_err(|e| in_file(oracle_diag(e), facts_path))?;
    let mut ok = report.is_equivalent();
    if ctx.json() {
        ctx.emit(report_json(&report));
    } else {
        ctx.text(&report.to_string());
    }
    if let Some(n) = trials {
        let summary = run_trials(&flat, &r, n, 0).map_err(oracle_diag)?;
        ok &= summary.all_passed();
        if ctx.json() {
            ctx.emit(json!({"type": "trials", "trials": summary.trials, "passed": summary.passed}));
            if let Some((_, rep)) = &summary.first_failure {
                ctx.emit(report_json(rep));
            }
        } else {
            ctx.text(&format!(
                "trials: {}/{} equivalent",
                summary.passed, summary.trials
            ));
            if let Some((fs, rep)) = &summary.first_failure {
                let shown: Vec<String> = fs.iter().map(|f| f.to_string()).collect();
                ctx.text(&format!("first failing fact base: {}", shown.join(" ")));
                ctx.text(&rep.to_string());
            }
        }
    }
    Ok(if ok { 0 } else { 1 })
}

fn graph(ws: &Workspace, args: &[String], ctx: &mut Ctx<'_>) -> Outcome {
    let mut mans = Vec::new();
    for a in args {
        mans.push(ws.manifest(a)?.1);
    }
    let dot = export_inclusion_graph(&ws.lib, &mans);
    if ctx.json() {
        ctx.emit(json!({"type": "graph", "dot": dot}));
    } else {
        ctx.text(&dot);
    }
    Ok(0)
}
