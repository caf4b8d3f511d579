//! Canonical text output. Parsing rendered text yields a structurally equal value.

use std::fmt::Write;

use super::{Application, Manifest, MorphismSource, PatternSource};
use crate::terms::{is_plain_identifier, Clause, Signature, SymbolKind};

fn name(n: &str) -> String {
    if is_plain_identifier(n) {
        n.to_string()
    } else {
        format!("'{n}'")
    }
}

fn string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn signature_block(out: &mut String, sig: &Signature, indent: &str) {
    if sig.is_empty() {
        let _ = writeln!(out, "{indent}signature {{ }}");
        return;
    }
    let _ = writeln!(out, "{indent}signature {{");
    for kind in [
        SymbolKind::Concept,
        SymbolKind::Individual,
        SymbolKind::Predicate,
    ] {
        for s in sig.symbols().filter(|s| s.kind() == kind) {
            match kind {
                SymbolKind::Predicate => {
                    let _ = writeln!(out, "{indent}  pred {}/{}", name(s.name()), s.arity());
                }
                _ => {
                    let _ = writeln!(out, "{indent}  {kind} {}", name(s.name()));
                }
            }
        }
    }
    let _ = writeln!(out, "{indent}}}");
}

fn axioms_block(out: &mut String, clauses: &[Clause]) {
    if clauses.is_empty() {
        out.push_str("  axioms { }\n");
        return;
    }
    out.push_str("  axioms {\n");
    for c in clauses {
        let _ = writeln!(out, "    {c}");
    }
    out.push_str("  }\n");
}

pub fn render_pattern(p: &PatternSource) -> String {
    let mut out = format!("pattern {} {{\n", name(&p.name));
    if !p.summary.is_empty() {
        let _ = writeln!(out, "  summary {}", string(&p.summary));
    }
    if let Some(d) = &p.description {
        let _ = writeln!(out, "  description {}", string(d));
    }
    if !p.uses.is_empty() {
        let uses: Vec<String> = p.uses.iter().map(|u| name(u)).collect();
        let _ = writeln!(out, "  uses {}", uses.join(", "));
    }
    signature_block(&mut out, &p.signature, "  ");
    axioms_block(&mut out, &p.clauses);
    out.push_str("}\n");
    out
}

/// Renders a flat theory (for example a morphed pattern or an assembled KB)
/// as a self-contained pattern.
pub fn render_theory(
    theory_name: &str,
    summary: &str,
    sig: &Signature,
    clauses: &[Clause],
) -> String {
    render_pattern(&PatternSource {
        name: theory_name.to_string(),
        summary: summary.to_string(),
        description: None,
        uses: Vec::new(),
        signature: sig.clone(),
        clauses: clauses.to_vec(),
    })
}

pub fn render_morphism(m: &MorphismSource) -> String {
    let mut out = format!("morphism {} from {} {{\n", name(&m.name), name(&m.source));
    if let Some(s) = &m.summary {
        let _ = writeln!(out, "  summary {}", string(s));
    }
    if m.pairs.is_empty() {
        out.push_str("  map { }\n");
    } else {
        out.push_str("  map {\n");
        for (from, to) in &m.pairs {
            let _ = writeln!(out, "    {} -> {}", name(from), name(to));
        }
        out.push_str("  }\n");
    }
    if !m.hides.is_empty() {
        let hides: Vec<String> = m.hides.iter().map(|h| name(h)).collect();
        let _ = writeln!(out, "  hide {{ {} }}", hides.join(" "));
    }
    out.push_str("}\n");
    out
}

pub fn render_manifest(m: &Manifest) -> String {
    let mut out = format!("kb {} {{\n", name(&m.name));
    if let Some(s) = &m.summary {
        let _ = writeln!(out, "  summary {}", string(s));
    }
    if !m.signature.is_empty() {
        signature_block(&mut out, &m.signature, "  ");
    }
    for a in &m.applications {
        match a {
            Application::Morph(n) => {
                let _ = writeln!(out, "  apply {}", name(n));
            }
            Application::Include(n) => {
                let _ = writeln!(out, "  include {}", name(n));
            }
        }
    }
    for f in &m.rule_files {
        let _ = writeln!(out, "  rules {}", string(&f.to_string_lossy()));
    }
    for f in &m.fact_files {
        let _ = writeln!(out, "  facts {}", string(&f.to_string_lossy()));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::super::{parse_manifest, parse_morphism, parse_pattern};
    use super::*;

    const DAG_LIKE: &str = r#"
        pattern g {
          summary "A \"small\" graph theory."
          signature { concept Node pred to/2, reaches/2, isa/2 }
          axioms {
            isa(X,Node):-to(X,Y).
            reaches(X,Y) :- to(X,Y).
            reaches(X,Z) :- to(X,Y), reaches(Y,Z).
          }
        }"#;

    #[test]
    fn pattern_round_trip() {
        let p = parse_pattern(DAG_LIKE).unwrap();
        let text = render_pattern(&p);
        assert_eq!(parse_pattern(&text).unwrap(), p);
        assert!(text.contains("isa(X, Node) :- to(X, Y)."));
    }

    #[test]
    fn whitespace_is_normalised() {
        let squashed: String = DAG_LIKE.split_whitespace().collect::<Vec<_>>().join(" ");
        let a = render_pattern(&parse_pattern(DAG_LIKE).unwrap());
        let b = render_pattern(&parse_pattern(&squashed).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn empty_morphism_renders_empty_map() {
        let m = parse_morphism("morphism m from p { map { } }").unwrap();
        let text = render_morphism(&m);
        assert!(text.contains("map { }"));
        assert_eq!(parse_morphism(&text).unwrap(), m);
    }

    #[test]
    fn manifest_round_trip() {
        let m = parse_manifest(
            r#"kb c { summary "s" signature { concept computer pred ram_size/2 }
                      apply a include b rules "r.kfact" facts "f.kfact" }"#,
        )
        .unwrap();
        assert_eq!(parse_manifest(&render_manifest(&m)).unwrap(), m);
    }
}
