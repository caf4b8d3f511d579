//! The bundled corpus of patterns, morphisms, knowledge bases and facts.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::compose::{
    assemble_kb, files_with_extension, flatten_pattern, load_manifest, resolve_uses_order,
    AssembledKB, ComposeError, FlatPattern, PatternLibrary,
};
use crate::morphism::{complete_morphism, validate_morphism, ResolvedMorphism};
use crate::syntax::{parse_morphism_lenient, parse_pattern, Manifest, ParseError};
use crate::terms::Signature;

/// Overrides the corpus location.
pub const STDLIB_ENV: &str = "KPC_STDLIB";

/// `$KPC_STDLIB` if set, otherwise the `stdlib` directory of the source tree.
pub fn default_stdlib_dir() -> PathBuf {
    match std::env::var_os(STDLIB_ENV) {
        Some(p) if !p.is_empty() => PathBuf::from(p),
        _ => Path::new(env!("CARGO_MANIFEST_DIR")).join("../../stdlib"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Origin {
    /// Transcribed as written.
    PaperVerbatim,
    /// A displayed axiom rewritten into Horn clauses with negation as failure.
    PaperTranslated,
    /// Named in the source text, with axioms written here.
    Reconstructed,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::PaperVerbatim => "paper-verbatim",
            Origin::PaperTranslated => "paper-translated",
            Origin::Reconstructed => "reconstructed",
        }
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Origin {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper-verbatim" => Ok(Origin::PaperVerbatim),
            "paper-translated" => Ok(Origin::PaperTranslated),
            "reconstructed" => Ok(Origin::Reconstructed),
            other => Err(other.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusEntry {
    pub path: PathBuf,
    pub origin: Origin,
}

#[derive(Debug, Error)]
pub enum StdlibError {
    #[error("{}: expected exactly one origin tag, found {found}", path.display())]
    OriginCount { path: PathBuf, found: usize },
    #[error("{}: unknown origin `{tag}`", path.display())]
    UnknownOrigin { path: PathBuf, tag: String },
    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<ComposeError>,
    },
    #[error(transparent)]
    Compose(Box<ComposeError>),
}

impl From<ComposeError> for StdlibError {
    fn from(e: ComposeError) -> Self {
        StdlibError::Compose(Box::new(e))
    }
}

impl StdlibError {
    /// The underlying composition error, if any.
    pub fn compose_error(&self) -> Option<&ComposeError> {
        match self {
            StdlibError::InFile { source, .. } | StdlibError::Compose(source) => {
                Some(source.root())
            }
            _ => None,
        }
    }
}

/// A fully validated corpus.
#[derive(Clone, Debug)]
pub struct Stdlib {
    pub root: PathBuf,
    pub library: PatternLibrary,
    /// Every pattern, flattened, by name.
    pub flattened: BTreeMap<String, FlatPattern>,
    /// Pattern names with every pattern after those it uses.
    pub order: Vec<String>,
    /// Source file of each pattern and morphism, by name.
    pub files: BTreeMap<String, PathBuf>,
    pub manifests: Vec<(PathBuf, Manifest)>,
}

impl Stdlib {
    pub fn manifest(&self, name: &str) -> Option<&Manifest> {
        self.manifests
            .iter()
            .find(|(_, m)| m.name == name)
            .map(|(_, m)| m)
    }

    pub fn manifest_path(&self, name: &str) -> Option<&Path> {
        self.manifests
            .iter()
            .find(|(_, m)| m.name == name)
            .map(|(p, _)| p.as_path())
    }

    /// Assembles a bundled knowledge base by name.
    pub fn assemble(&self, name: &str) -> Result<AssembledKB, ComposeError> {
        let m = self
            .manifest(name)
            .ok_or_else(|| ComposeError::UnknownPattern {
                name: name.to_string(),
                referenced_by: None,
            })?;
        assemble_kb(m, &self.library)
    }

    /// A morphism completed over its flattened source, as a lone application.
    pub fn resolved(
        &self,
        morphism: &str,
    ) -> Result<(FlatPattern, ResolvedMorphism), ComposeError> {
        let m = self
            .library
            .morphism(morphism)
            .ok_or_else(|| ComposeError::UnknownMorphism(morphism.to_string()))?;
        let flat =
            self.flattened
                .get(&m.source)
                .cloned()
                .ok_or_else(|| ComposeError::UnknownPattern {
                    name: m.source.clone(),
                    referenced_by: Some(morphism.to_string()),
                })?;
        let r = complete_morphism(m, &flat, 0);
        Ok((flat, r))
    }
}

fn parse_at<T>(
    path: &Path,
    parse: impl FnOnce(&str) -> Result<T, ParseError>,
) -> Result<T, ComposeError> {
    let text = fs::read_to_string(path).map_err(|source| ComposeError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse(&text).map_err(|source| ComposeError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads and validates the corpus under `root`: every pattern flattens,
/// every morphism is consistent with its source, and every knowledge base
/// assembles with its facts.
pub fn load_library(root: &Path) -> Result<Stdlib, StdlibError> {
    let mut library = PatternLibrary::new();
    let mut files = BTreeMap::new();
    for path in files_with_extension(&root.join("patterns"), "kpat")? {
        let p = parse_at(&path, parse_pattern)?;
        files.insert(p.name.clone(), path.clone());
        library
            .add_pattern(p)
            .map_err(|source| StdlibError::InFile {
                path,
                source: Box::new(source),
            })?;
    }
    for path in files_with_extension(&root.join("morphisms"), "kmor")? {
        let m = parse_at(&path, parse_morphism_lenient)?;
        files.insert(m.name.clone(), path.clone());
        library
            .add_morphism(m)
            .map_err(|source| StdlibError::InFile {
                path,
                source: Box::new(source),
            })?;
    }

    let order = resolve_uses_order(&library)?;
    let mut flattened = BTreeMap::new();
    for name in &order {
        let flat = flatten_pattern(name, &library).map_err(|source| StdlibError::InFile {
            path: files[name].clone(),
            source: Box::new(source),
        })?;
        flattened.insert(name.clone(), flat);
    }

    for m in library.morphisms() {
        let in_file = |source| StdlibError::InFile {
            path: files[&m.name].clone(),
            source: Box::new(source),
        };
        let flat = flattened.get(&m.source).ok_or_else(|| {
            in_file(ComposeError::UnknownPattern {
                name: m.source.clone(),
                referenced_by: Some(m.name.clone()),
            })
        })?;
        let issues = validate_morphism(m, flat, &Signature::new());
        if !issues.is_empty() {
            return Err(in_file(ComposeError::InvalidMorphism {
                morphism: m.name.clone(),
                issues,
            }));
        }
    }

    let mut manifests = Vec::new();
    for path in files_with_extension(&root.join("kbs"), "kman")? {
        let m = load_manifest(&path)?;
        assemble_kb(&m, &library).map_err(|source| StdlibError::InFile {
            path: path.clone(),
            source: Box::new(source),
        })?;
        manifests.push((path, m));
    }

    Ok(Stdlib {
        root: root.to_path_buf(),
        library,
        flattened,
        order,
        files,
        manifests,
    })
}

/// Loads the corpus from [`default_stdlib_dir`].
pub fn load_stdlib() -> Result<Stdlib, StdlibError> {
    load_library(&default_stdlib_dir())
}

/// The origin tag of one corpus file: a `% origin: <tag>` comment, or
/// `<!-- origin: <tag> -->` in Markdown.
pub fn origin_of(path: &Path, text: &str) -> Result<Origin, StdlibError> {
    let tags: Vec<&str> = text
        .lines()
        .filter_map(|l| {
            let l = l.trim();
            let body = l
                .strip_prefix('%')
                .or_else(|| l.strip_prefix("<!--").and_then(|r| r.strip_suffix("-->")))?;
            body.trim().strip_prefix("origin:").map(str::trim)
        })
        .collect();
    match tags.as_slice() {
        [tag] => tag.parse().map_err(|tag| StdlibError::UnknownOrigin {
            path: path.to_path_buf(),
            tag,
        }),
        _ => Err(StdlibError::OriginCount {
            path: path.to_path_buf(),
            found: tags.len(),
        }),
    }
}

/// Every corpus file under `root` with its origin tag, sorted by path.
pub fn corpus_entries(root: &Path) -> Result<Vec<CorpusEntry>, StdlibError> {
    let mut paths = Vec::new();
    for (dir, ext) in [
        ("patterns", "kpat"),
        ("morphisms", "kmor"),
        ("kbs", "kman"),
        ("facts", "kfact"),
    ] {
        paths.extend(files_with_extension(&root.join(dir), ext)?);
    }
    paths.push(root.join("TRACEABILITY.md"));
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let text = fs::read_to_string(&path).map_err(|source| ComposeError::Io {
                path: path.clone(),
                source,
            })?;
            let origin = origin_of(&path, &text)?;
            Ok(CorpusEntry { path, origin })
        })
        .collect()
}

/// One row of the traceability table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceRow {
    pub pattern: String,
    pub axiom: usize,
    pub statement: String,
    /// `(pattern, clause number from 1)`.
    pub clauses: Vec<(String, usize)>,
    pub encoding: String,
}

/// Reads the rows of the Markdown table in `TRACEABILITY.md`. Lines that are
/// not table rows, the header and the separator are skipped.
pub fn parse_traceability(text: &str) -> Vec<TraceRow> {
    text.lines()
        .filter_map(|line| {
            let cells: Vec<&str> = line
                .trim()
                .strip_prefix('|')?
                .strip_suffix('|')?
                .split('|')
                .map(str::trim)
                .collect();
            let [pattern, axiom, _label, statement, clauses, encoding] = cells.as_slice() else {
                return None;
            };
            let axiom = axiom.parse().ok()?;
            let clauses = clauses
                .split(',')
                .filter_map(|c| {
                    let (p, n) = c.trim().rsplit_once('/')?;
                    Some((p.to_string(), n.parse().ok()?))
                })
                .collect();
            Some(TraceRow {
                pattern: pattern.to_string(),
                axiom,
                statement: statement.to_string(),
                clauses,
                encoding: encoding.to_string(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_tags() {
        let p = Path::new("x.kpat");
        assert_eq!(
            origin_of(p, "% origin: reconstructed\npattern x {}").unwrap(),
            Origin::Reconstructed
        );
        assert_eq!(
            origin_of(p, "<!-- origin: paper-verbatim -->").unwrap(),
            Origin::PaperVerbatim
        );
        assert!(matches!(
            origin_of(p, "% nothing here"),
            Err(StdlibError::OriginCount { found: 0, .. })
        ));
        assert!(matches!(
            origin_of(p, "% origin: reconstructed\n% origin: reconstructed"),
            Err(StdlibError::OriginCount { found: 2, .. })
        ));
        assert!(matches!(
            origin_of(p, "% origin: folklore"),
            Err(StdlibError::UnknownOrigin { .. })
        ));
    }

    #[test]
    fn traceability_rows() {
        let rows = parse_traceability(
            "| Pattern | Axiom | Label | Displayed axiom | Clauses | Encoding |\n\
             |---|---|---|---|---|---|\n\
             | dag | 2 | | to ↔ from | dag/3, dag/4 | horn |\n\
             text\n",
        );
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].axiom, 2);
        assert_eq!(
            rows[0].clauses,
            vec![("dag".to_string(), 3), ("dag".to_string(), 4)]
        );
    }
}
