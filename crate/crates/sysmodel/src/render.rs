//! Text and JSON renderings. The JSON forms carry the same fields as the
//! text forms.

use serde_json::{json, Value as Json};
use sysmodel_core::refine::{RefinementVerdict, Violation};
use sysmodel_core::{Finding, Span, ValidationReport};

use crate::docgraph::{DocGraph, DocNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

fn location(doc: &Option<String>, span: &Option<Span>) -> Json {
    json!({
        "doc": doc,
        "line": span.map(|s| s.start.line),
        "col": span.map(|s| s.start.col),
    })
}

fn finding_json(f: &Finding) -> Json {
    json!({
        "severity": f.severity.to_string(),
        "code": f.code,
        "location": location(&f.doc, &f.span),
        "message": f.message,
    })
}

fn violation_json(v: &Violation) -> Json {
    json!({ "rule": v.rule, "location": location(&v.doc, &v.span), "message": v.message })
}

fn to_string(j: Json) -> String {
    let mut s = serde_json::to_string_pretty(&j).expect("json");
    s.push('\n');
    s
}

/// One finding per line, then a count line.
pub fn report(r: &ValidationReport, format: Format) -> String {
    let errors = r.errors().count();
    let warnings = r.findings.len() - errors;
    match format {
        Format::Text => {
            let mut s: String = r.findings.iter().map(|f| format!("{f}\n")).collect();
            s.push_str(&format!("{errors} error(s), {warnings} warning(s)\n"));
            s
        }
        Format::Structured => to_string(json!({
            "findings": r.findings.iter().map(finding_json).collect::<Vec<_>>(),
            "errors": errors,
            "warnings": warnings,
        })),
    }
}

/// The verdict, then the witness trace if there is one.
pub fn verdict(v: &RefinementVerdict, format: Format) -> String {
    match format {
        Format::Text => {
            let mut s = v.to_string();
            if let Some(w) = &v.witness {
                s.push_str("witness:\n");
                for line in w.lines() {
                    s.push_str(&format!("  {line}\n"));
                }
            }
            s
        }
        Format::Structured => to_string(verdict_json(v)),
    }
}

pub fn verdict_json(v: &RefinementVerdict) -> Json {
    json!({
        "accepted": v.accepted,
        "violations": v.violations.iter().map(violation_json).collect::<Vec<_>>(),
        "checked_rules": v.checked_rules,
        "notes": v.notes,
        "witness": v.witness.as_ref().map(|w| w.lines().collect::<Vec<_>>()),
    })
}

/// A header line per run followed by its canonical trace lines.
pub fn runs(header: &[(&str, String)], traces: &[String], format: Format) -> String {
    match format {
        Format::Text => {
            let mut s = String::from("#");
            for (k, v) in header {
                s.push_str(&format!(" {k}={v}"));
            }
            s.push('\n');
            for (i, t) in traces.iter().enumerate() {
                if traces.len() > 1 {
                    s.push_str(&format!("## run {}\n", i + 1));
                }
                s.push_str(t);
            }
            s
        }
        Format::Structured => {
            let mut obj = serde_json::Map::new();
            for (k, v) in header {
                obj.insert((*k).into(), Json::String(v.clone()));
            }
            obj.insert("runs".into(), json!(traces.iter().map(|t| t.lines().collect::<Vec<_>>()).collect::<Vec<_>>()));
            to_string(Json::Object(obj))
        }
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn tri(b: Option<bool>) -> &'static str {
    b.map_or("-", yes_no)
}

fn node_json(n: &DocNode) -> Json {
    json!({
        "id": n.id,
        "kind": n.kind.extension(),
        "path": n.path,
        "author": n.author,
        "created": n.created,
        "updated": n.updated,
        "validated": n.validated,
        "verified": n.verified,
        "tested": n.tested,
        "consistent": n.consistent,
        "redundant": n.redundant,
        "violations": n.violations,
    })
}

/// Node table with flags, then numbered edges.
pub fn status(g: &DocGraph, format: Format) -> String {
    match format {
        Format::Text => {
            let mut rows = vec![["id", "kind", "validated", "verified", "tested", "consistent", "redundant", "updated"].map(String::from)];
            for n in g.nodes().values() {
                rows.push([
                    n.id.clone(),
                    n.kind.extension().into(),
                    yes_no(n.validated).into(),
                    yes_no(n.verified).into(),
                    yes_no(n.tested).into(),
                    tri(n.consistent).into(),
                    tri(n.redundant).into(),
                    n.updated.clone(),
                ]);
            }
            let widths: Vec<usize> = (0..8).map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
            let mut s = String::new();
            for r in &rows {
                let cells: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
                s.push_str(cells.join("  ").trim_end());
                s.push('\n');
            }
            for n in g.nodes().values() {
                for v in &n.violations {
                    s.push_str(&format!("{}: {v}\n", n.id));
                }
            }
            for (i, e) in g.edges().iter().enumerate() {
                s.push_str(&format!("[{i}] {} {} -> {}\n", e.kind, e.sources.join(","), e.targets.join(",")));
            }
            s
        }
        Format::Structured => to_string(json!({
            "nodes": g.nodes().values().map(node_json).collect::<Vec<_>>(),
            "edges": g.edges().iter().enumerate().map(|(i, e)| json!({
                "index": i,
                "kind": e.kind.keyword(),
                "sources": e.sources,
                "targets": e.targets,
            })).collect::<Vec<_>>(),
        })),
    }
}
