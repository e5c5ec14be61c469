use alloc::string::String;
use core::fmt::Write;

use crate::dsl::ast::*;
use crate::dsl::Stimulus;
use crate::model::{MessageKind, Transition};

/// Canonical text of a document. Parsing the result yields an equal body.
pub fn serialize(doc: &Document) -> String {
    let mut out = String::new();
    match &doc.body {
        Body::Class(b) => class_diagram(&mut out, b),
        Body::Object(b) => object_diagram(&mut out, b),
        Body::State(b) => state_diagram(&mut out, b),
        Body::Sequence(b) => sequence_diagram(&mut out, b),
        Body::Text(t) => out.push_str(t),
    }
    out
}

pub fn serialize_stimuli(stimuli: &[Stimulus]) -> String {
    let mut out = String::new();
    for s in stimuli {
        let m = &s.message;
        let _ = write!(out, "round {}: {} -> {} . {}(", s.round, m.sender, m.receiver, m.selector);
        join(&mut out, &m.args);
        out.push_str(")\n");
    }
    out
}

fn join<T: core::fmt::Display>(out: &mut String, items: &[T]) {
    for (i, it) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{it}");
    }
}

fn class_diagram(out: &mut String, b: &ClassDiagramBody) {
    for (i, item) in b.items.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        match item {
            ClassItem::Assoc(a) => {
                let _ = writeln!(out, "assoc {}: {} -> {}", a.name, a.source, a.target);
            }
            ClassItem::Class(c) => {
                let _ = write!(out, "class {}", c.name);
                if let Some(p) = &c.parent {
                    let _ = write!(out, " extends {p}");
                }
                out.push_str(" {\n");
                for m in &c.members {
                    match m {
                        Member::Attr(a) => {
                            let _ = writeln!(out, "  attr {}: {}", a.name, a.ty);
                        }
                        Member::Method(m) => {
                            let _ = write!(out, "  method {}(", m.name);
                            for (k, p) in m.params.iter().enumerate() {
                                if k > 0 {
                                    out.push_str(", ");
                                }
                                let _ = write!(out, "{}: {}", p.name, p.ty);
                            }
                            let _ = writeln!(out, "): {}", m.result);
                        }
                        Member::Invariant(e) => {
                            let _ = writeln!(out, "  invariant {e}");
                        }
                    }
                }
                out.push_str("}\n");
            }
        }
    }
}

fn state_diagram(out: &mut String, b: &StateDiagramBody) {
    let _ = writeln!(out, "statemachine {} {{", b.class);
    let _ = writeln!(out, "  states {};", b.states.join(", "));
    let _ = writeln!(out, "  initial {};", b.initial.join(", "));
    for t in &b.transitions {
        out.push_str("  ");
        transition(out, t);
        out.push('\n');
    }
    out.push_str("}\n");
}

pub(crate) fn transition(out: &mut String, t: &Transition) {
    let _ = write!(out, "trans {} -> {} on {}({})", t.source, t.target, t.trigger.selector, t.trigger.params.join(", "));
    if let Some(g) = &t.guard {
        let _ = write!(out, " if {g}");
    }
    if t.actions.is_empty() && t.outputs.is_empty() {
        return;
    }
    out.push_str(" /");
    let mut first = true;
    let mut sep = |out: &mut String| {
        out.push_str(if first { " " } else { ", " });
        first = false;
    };
    for a in &t.actions {
        sep(out);
        let _ = write!(out, "{} = {}", a.attribute, a.value);
    }
    for o in &t.outputs {
        sep(out);
        out.push_str("emit ");
        if o.kind == MessageKind::Return {
            out.push_str("return ");
        }
        let _ = write!(out, "{}(", o.selector);
        join(out, &o.args);
        let _ = write!(out, ") to {}", o.target);
    }
}

fn sequence_diagram(out: &mut String, b: &SequenceDiagramBody) {
    let _ = writeln!(out, "sequence {} {{", b.name);
    out.push_str("  objects ");
    for (i, l) in b.lifelines.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{}: {}", l.role, l.class);
    }
    out.push_str(";\n");
    for s in &b.steps {
        match s {
            SeqStep::Event(e) => {
                let _ = write!(out, "  {} -> {} : {}(", e.sender, e.receiver, e.selector);
                join(out, &e.args);
                out.push_str(")\n");
            }
            SeqStep::Label { role, label } => {
                let _ = writeln!(out, "  state {role} : {label}");
            }
        }
    }
    out.push_str("}\n");
}

fn object_diagram(out: &mut String, b: &ObjectDiagramBody) {
    out.push_str("objects {\n");
    for o in &b.objects {
        let _ = write!(out, "  {}: {} {{", o.id, o.class);
        for (i, (name, v)) in o.bindings.iter().enumerate() {
            out.push_str(if i == 0 { " " } else { ", " });
            let _ = write!(out, "{name} = {v}");
        }
        out.push_str(if o.bindings.is_empty() { "}\n" } else { " }\n" });
    }
    for l in &b.links {
        let _ = writeln!(out, "  link {} {} -> {}", l.assoc, l.source, l.target);
    }
    for c in &b.creatables {
        let _ = writeln!(out, "  creatable {}: {} by {}", c.id, c.class, c.owner);
    }
    out.push_str("}\n");
}
