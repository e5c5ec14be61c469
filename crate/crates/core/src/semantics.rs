//! Elaboration of document sets into a [`SystemModel`] and the context
//! conditions between documents.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::dsl::{Body, ClassDecl, ClassItem, Document, DocumentKind, NodeRef, ObjectDiagramBody};
use crate::expr::{Env, TypeEnv};
use crate::ids::{ClassName, ObjectId};
use crate::model::{Association, Automaton, ClassTable, ObjectState, SystemModel};
use crate::report::{Finding, Span, ValidationReport};
use crate::value::{Value, ValueType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum View {
    Structural,
    Behavioral,
    Data,
    Interface,
}

pub type ViewSet = BTreeSet<View>;

/// Views a document contributes to. Free text has none.
pub fn classify_view(d: &Document) -> ViewSet {
    use View::*;
    let views: &[View] = match d.kind() {
        DocumentKind::ClassDiagram => &[Structural, Data, Interface],
        DocumentKind::ObjectDiagram => &[Structural, Data],
        DocumentKind::StateDiagram => &[Behavioral, Data, Interface],
        DocumentKind::SequenceDiagram => &[Behavioral, Interface],
        DocumentKind::Text => &[],
    };
    views.iter().copied().collect()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ElaborateOptions<'a> {
    /// Id of the object diagram supplying initial objects. May be omitted
    /// when the set contains exactly one.
    pub object_diagram: Option<&'a str>,
}

/// Where a class or association was declared.
type Origins = BTreeMap<String, (String, Option<Span>)>;

/// Merged class table of all class diagrams, plus merge findings.
/// Declarations of the same name must be identical.
pub fn merge_class_diagrams<'a>(docs: impl IntoIterator<Item = &'a Document>) -> (ClassTable, ValidationReport) {
    let (t, report, ..) = merge(docs);
    (t, report)
}

fn merge<'a>(docs: impl IntoIterator<Item = &'a Document>) -> (ClassTable, ValidationReport, Origins, Origins) {
    let mut cds: Vec<&Document> = docs.into_iter().filter(|d| d.kind() == DocumentKind::ClassDiagram).collect();
    cds.sort_by(|a, b| a.id.cmp(&b.id));
    let mut decls: BTreeMap<ClassName, &ClassDecl> = BTreeMap::new();
    let mut assocs: BTreeMap<String, &Association> = BTreeMap::new();
    let mut class_origin = Origins::new();
    let mut assoc_origin = Origins::new();
    let mut report = ValidationReport::new();
    for d in &cds {
        let body = d.as_class().expect("class diagram");
        for (i, item) in body.items.iter().enumerate() {
            let span = d.span(NodeRef::Item(i));
            match item {
                ClassItem::Class(c) => match decls.get(&c.name) {
                    Some(prev) if *prev == c => {}
                    Some(_) => report.push(
                        Finding::error("E-DUP-CLASS", format!("class `{}` is declared differently elsewhere", c.name))
                            .at(&d.id, span),
                    ),
                    None => {
                        decls.insert(c.name.clone(), c);
                        class_origin.insert(c.name.to_string(), (d.id.clone(), span));
                    }
                },
                ClassItem::Assoc(a) => match assocs.get(&a.name) {
                    Some(prev) if *prev == a => {}
                    Some(_) => report.push(
                        Finding::error("E-DUP-ASSOC", format!("association `{}` is declared differently elsewhere", a.name))
                            .at(&d.id, span),
                    ),
                    None => {
                        assocs.insert(a.name.clone(), a);
                        assoc_origin.insert(a.name.clone(), (d.id.clone(), span));
                    }
                },
            }
        }
    }
    let mut t = ClassTable::default();
    for (name, c) in &decls {
        t.classes.insert(name.clone(), c.signature());
        if let Some(p) = &c.parent {
            t.parents.insert(name.clone(), p.clone());
        }
        let invs: Vec<_> = c.invariants().cloned().collect();
        if !invs.is_empty() {
            t.invariants.insert(name.clone(), invs);
        }
    }
    for (name, a) in &assocs {
        t.associations.insert(name.clone(), (*a).clone());
    }
    for (class, f) in t.findings_by_class() {
        if f.code == "E-ASSOC-CLASS" {
            continue;
        }
        report.push(locate(f, class_origin.get(class.as_str())));
    }
    for (name, a) in &t.associations {
        for end in [&a.source, &a.target] {
            if !t.contains(end) {
                report.push(locate(
                    Finding::error("E-ASSOC-CLASS", format!("association `{name}` refers to unknown class `{end}`")),
                    assoc_origin.get(name),
                ));
            }
        }
    }
    (t, report, class_origin, assoc_origin)
}

fn locate(f: Finding, origin: Option<&(String, Option<Span>)>) -> Finding {
    match origin {
        Some((doc, span)) => f.at(doc, *span),
        None => f,
    }
}

fn effective(t: &ClassTable, c: &ClassName) -> Option<crate::model::Signature> {
    t.effective_signature(c).ok()
}

/// Typing and signature conditions of a state diagram against `t`.
pub fn check_state_diagram(sd: &Document, t: &ClassTable) -> ValidationReport {
    let mut r = ValidationReport::new();
    let Some(body) = sd.as_state() else { return r };
    let Some(sig) = effective(t, &body.class) else {
        r.push(
            Finding::error("E-SD-UNKNOWN-CLASS", format!("state diagram for unknown class `{}`", body.class))
                .at(&sd.id, sd.span(NodeRef::Header)),
        );
        return r;
    };
    let attrs = sig.attribute_types();
    for (i, tr) in body.transitions.iter().enumerate() {
        let at = sd.span(NodeRef::Transition(i));
        let mut err = |code: &'static str, msg: String| r.push(Finding::error(code, msg).at(&sd.id, at));
        let Some(method) = sig.method(&tr.trigger.selector) else {
            err("E-SIG-TRIGGER", format!("trigger `{}` is not a method of `{}`", tr.trigger.selector, body.class));
            continue;
        };
        if method.params.len() != tr.trigger.params.len() {
            err(
                "E-SIG-TRIGGER",
                format!(
                    "trigger `{}` takes {} parameters, {} given",
                    tr.trigger.selector,
                    method.params.len(),
                    tr.trigger.params.len()
                ),
            );
            continue;
        }
        let mut vars = attrs.clone();
        for (p, ty) in tr.trigger.params.iter().zip(method.arg_types()) {
            vars.insert(p.clone(), ty);
        }
        let tenv = TypeEnv { vars: &vars, has_self: true, has_sender: true };
        if let Some(g) = &tr.guard {
            match g.type_of(&tenv) {
                Ok(ValueType::Bool) => {}
                Ok(ty) => err("E-EXPR-TYPE", format!("guard `{g}` has type {ty}, expected Bool")),
                Err(e) => err("E-EXPR-TYPE", format!("guard `{g}`: {e}")),
            }
        }
        for a in &tr.actions {
            let Some(want) = attrs.get(&a.attribute) else {
                err("E-UNKNOWN-ATTR", format!("`{}` is not an attribute of `{}`", a.attribute, body.class));
                continue;
            };
            match a.value.type_of(&tenv) {
                Ok(ty) if ty == *want => {}
                Ok(ty) => err("E-EXPR-TYPE", format!("`{}` has type {want}, assigned {ty}", a.attribute)),
                Err(e) => err("E-EXPR-TYPE", format!("assignment to `{}`: {e}", a.attribute)),
            }
        }
        for o in &tr.outputs {
            for arg in &o.args {
                if let Err(e) = arg.type_of(&tenv) {
                    err("E-EXPR-TYPE", format!("argument of `{}`: {e}", o.selector));
                }
            }
            match o.target.type_of(&tenv) {
                Ok(ValueType::Ref) => {}
                Ok(ty) => err("E-EXPR-TYPE", format!("target of `{}` has type {ty}, expected Ref", o.selector)),
                Err(e) => err("E-EXPR-TYPE", format!("target of `{}`: {e}", o.selector)),
            }
        }
    }
    r.sort();
    r
}

/// Compatibility of an object diagram with `t`.
pub fn check_object_diagram(od: &Document, t: &ClassTable) -> ValidationReport {
    let mut r = ValidationReport::new();
    let Some(body) = od.as_object() else { return r };
    let known_ids: BTreeSet<&ObjectId> =
        body.objects.iter().map(|o| &o.id).chain(body.creatables.iter().map(|c| &c.id)).collect();
    for (i, o) in body.objects.iter().enumerate() {
        let at = od.span(NodeRef::Object(i));
        if o.id.is_env() {
            r.push(Finding::error("E-RESERVED-ID", "`env` cannot name an object").at(&od.id, at));
        }
        let Some(sig) = effective(t, &o.class) else {
            r.push(Finding::error("E-UNKNOWN-CLASS", format!("object `{}` has unknown class `{}`", o.id, o.class)).at(&od.id, at));
            continue;
        };
        for (k, (name, v)) in o.bindings.iter().enumerate() {
            let at = od.span(NodeRef::Binding(i, k));
            match sig.attribute(name) {
                None => r.push(
                    Finding::error("E-UNKNOWN-ATTR", format!("`{name}` is not an attribute of `{}`", o.class)).at(&od.id, at),
                ),
                Some(a) if a.ty != v.ty() => r.push(
                    Finding::error("E-ATTR-TYPE", format!("`{name}` has type {}, bound to {}", a.ty, v.ty())).at(&od.id, at),
                ),
                Some(_) => {}
            }
            if let Value::Ref(Some(target)) = v {
                if !known_ids.contains(target) {
                    r.push(
                        Finding::error("E-DANGLING-REF", format!("`{name}` refers to undeclared object `{target}`"))
                            .at(&od.id, at),
                    );
                }
            }
        }
        if let Some(state) = initial_valuation(o.bindings.as_slice(), &sig) {
            let invs = t.effective_invariants(&o.class).unwrap_or_default();
            let env = Env { attrs: Some(&state), this: Some(&o.id), ..Env::default() };
            for inv in invs {
                if inv.eval_bool(&env) != Ok(true) {
                    r.push(
                        Finding::warning("W-INVARIANT", format!("object `{}` violates invariant `{inv}`", o.id))
                            .at(&od.id, at),
                    );
                }
            }
        }
    }
    let class_of = |id: &ObjectId| body.objects.iter().find(|o| o.id == *id).map(|o| &o.class);
    for (i, l) in body.links.iter().enumerate() {
        let at = od.span(NodeRef::Link(i));
        let Some(a) = t.associations.get(&l.assoc) else {
            r.push(Finding::error("E-UNKNOWN-ASSOC", format!("unknown association `{}`", l.assoc)).at(&od.id, at));
            continue;
        };
        for (end, want) in [(&l.source, &a.source), (&l.target, &a.target)] {
            let ok = class_of(end).is_some_and(|c| t.is_subclass(c, want));
            if !ok {
                r.push(
                    Finding::error(
                        "E-ASSOC-ENDPOINT",
                        format!("`{end}` is not an instance of `{want}` as association `{}` requires", l.assoc),
                    )
                    .at(&od.id, at),
                );
            }
        }
    }
    for (i, c) in body.creatables.iter().enumerate() {
        let at = od.span(NodeRef::Creatable(i));
        if c.id.is_env() {
            r.push(Finding::error("E-RESERVED-ID", "`env` cannot name an object").at(&od.id, at));
        }
        if !t.contains(&c.class) {
            r.push(Finding::error("E-UNKNOWN-CLASS", format!("object `{}` has unknown class `{}`", c.id, c.class)).at(&od.id, at));
        }
    }
    r.sort();
    r
}

/// Defaults overridden by bindings; `None` if a binding does not fit.
fn initial_valuation(bindings: &[(String, Value)], sig: &crate::model::Signature) -> Option<BTreeMap<String, Value>> {
    let mut val: BTreeMap<String, Value> =
        sig.attributes.iter().map(|a| (a.name.clone(), Value::default_for(a.ty))).collect();
    for (name, v) in bindings {
        let slot = val.get_mut(name)?;
        if slot.ty() != v.ty() {
            return None;
        }
        *slot = v.clone();
    }
    Some(val)
}

/// Lifeline classes exist and every event matches a method of its receiver.
pub fn check_sequence_diagram(qd: &Document, t: &ClassTable) -> ValidationReport {
    let mut r = ValidationReport::new();
    let Some(body) = qd.as_sequence() else { return r };
    for (i, l) in body.lifelines.iter().enumerate() {
        if !t.contains(&l.class) {
            r.push(
                Finding::error("E-UNKNOWN-CLASS", format!("lifeline `{}` has unknown class `{}`", l.role, l.class))
                    .at(&qd.id, qd.span(NodeRef::Lifeline(i))),
            );
        }
    }
    for (i, e) in body.events() {
        let at = qd.span(NodeRef::SeqStep(i));
        let Some(l) = body.lifeline(&e.receiver) else { continue };
        let Some(sig) = effective(t, &l.class) else { continue };
        let Some(m) = sig.method(&e.selector) else {
            r.push(
                Finding::error("E-UNKNOWN-METHOD", format!("`{}` is not a method of `{}`", e.selector, l.class)).at(&qd.id, at),
            );
            continue;
        };
        if m.params.len() != e.args.len() {
            r.push(
                Finding::error(
                    "E-ARITY",
                    format!("`{}` takes {} arguments, {} given", e.selector, m.params.len(), e.args.len()),
                )
                .at(&qd.id, at),
            );
            continue;
        }
        for (k, (ty, v)) in m.arg_types().zip(&e.args).enumerate() {
            if v.ty() != ty {
                r.push(
                    Finding::error("E-ARG-TYPE", format!("argument {} of `{}` must be {ty}, found {}", k + 1, e.selector, v.ty()))
                        .at(&qd.id, at),
                );
            }
        }
    }
    r.sort();
    r
}

/// All context conditions that do not need a designated object diagram.
pub fn check_documents(docs: &[Document], refers_to: &[(String, String)]) -> ValidationReport {
    checked(docs, refers_to).0
}

struct Checked<'a> {
    table: ClassTable,
    state_diagrams: BTreeMap<ClassName, &'a Document>,
    object_diagrams: Vec<&'a Document>,
}

fn checked<'a>(docs: &'a [Document], refers_to: &[(String, String)]) -> (ValidationReport, Checked<'a>) {
    let mut sorted: Vec<&Document> = docs.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let mut r = ValidationReport::new();
    let mut ids = BTreeSet::new();
    for d in &sorted {
        if !ids.insert(d.id.as_str()) {
            r.push(Finding::error("E-DUP-DOC", format!("document `{}` given twice", d.id)).at(&d.id, None));
        }
    }
    for (from, to) in refers_to {
        for end in [from, to] {
            if !ids.contains(end.as_str()) {
                r.push(Finding::error("E-UNKNOWN-DOC", format!("refers-to edge names unknown document `{end}`")));
            }
        }
    }
    if !sorted.iter().any(|d| d.kind() == DocumentKind::ClassDiagram) {
        r.push(Finding::error("E-NO-CLASS-DIAGRAM", "at least one class diagram is required"));
    }
    let (table, merge_report, ..) = merge(sorted.iter().copied());
    r.extend(merge_report);
    let mut state_diagrams = BTreeMap::new();
    let mut object_diagrams = Vec::new();
    for d in &sorted {
        match &d.body {
            Body::State(sd) => {
                if state_diagrams.contains_key(&sd.class) {
                    r.push(
                        Finding::error("E-DUP-AUTOMATON", format!("second state diagram for class `{}`", sd.class))
                            .at(&d.id, d.span(NodeRef::Header)),
                    );
                } else {
                    state_diagrams.insert(sd.class.clone(), *d);
                }
                r.extend(check_state_diagram(d, &table));
            }
            Body::Sequence(_) => r.extend(check_sequence_diagram(d, &table)),
            Body::Object(_) => {
                object_diagrams.push(*d);
                r.extend(check_object_diagram(d, &table));
            }
            Body::Text(_) => r.push(Finding::warning("W-NO-VIEW", "free text contributes to no view").at(&d.id, None)),
            Body::Class(_) => {}
        }
    }
    r.sort();
    (r, Checked { table, state_diagrams, object_diagrams })
}

/// Builds the canonical model of a document set: merged class table,
/// automata from state diagrams (stutter for the rest) and initial objects
/// from one object diagram.
pub fn elaborate(
    docs: &[Document],
    refers_to: &[(String, String)],
    opts: ElaborateOptions<'_>,
) -> Result<SystemModel, ValidationReport> {
    let (mut r, c) = checked(docs, refers_to);
    let od = match opts.object_diagram {
        Some(id) => match c.object_diagrams.iter().find(|d| d.id == id) {
            Some(d) => Some(*d),
            None => {
                r.push(Finding::error("E-NO-OBJECTS", format!("`{id}` is not an object diagram of this set")));
                None
            }
        },
        None => match c.object_diagrams.as_slice() {
            [d] => Some(*d),
            [] => {
                r.push(Finding::error("E-NO-OBJECTS", "no object diagram supplies initial objects"));
                None
            }
            _ => {
                r.push(Finding::error("E-OBJECTS-AMBIGUOUS", "several object diagrams; choose one"));
                None
            }
        },
    };
    if r.has_errors() {
        r.sort();
        return Err(r);
    }
    let od = od.expect("checked above");
    let automata: BTreeMap<ClassName, Automaton> = c
        .table
        .classes
        .keys()
        .map(|k| {
            let a = match c.state_diagrams.get(k) {
                Some(d) => d.as_state().expect("state diagram").to_automaton().expect("parser checks states"),
                None => Automaton::stutter(k.clone()),
            };
            (k.clone(), a)
        })
        .collect();
    let body = od.as_object().expect("object diagram");
    build_model(c.table, automata, body).map_err(|e| {
        let mut r = ValidationReport::new();
        r.push(Finding::error("E-MODEL", e.to_string()).at(&od.id, od.span(NodeRef::Header)));
        r
    })
}

/// Model from an already checked class table, automata and object diagram.
pub fn build_model(
    table: ClassTable,
    automata: BTreeMap<ClassName, Automaton>,
    body: &ObjectDiagramBody,
) -> Result<SystemModel, crate::model::ModelError> {
    let mut object_classes = BTreeMap::new();
    let mut initial = Vec::new();
    for o in &body.objects {
        object_classes.insert(o.id.clone(), o.class.clone());
        let sig = table.effective_signature(&o.class).map_err(|_| crate::model::ModelError::UnknownClass {
            object: o.id.clone(),
            class: o.class.clone(),
        })?;
        let valuation = initial_valuation(&o.bindings, &sig).ok_or_else(|| crate::model::ModelError::InvalidState {
            object: o.id.clone(),
            reason: "bindings do not fit the class".into(),
        })?;
        let control = automata
            .get(&o.class)
            .and_then(|a| a.initial_controls.first().cloned())
            .ok_or_else(|| crate::model::ModelError::MissingAutomaton(o.class.clone()))?;
        initial.push((o.id.clone(), ObjectState { control, valuation }));
    }
    let mut creatables: BTreeMap<ObjectId, BTreeSet<ObjectId>> = BTreeMap::new();
    for c in &body.creatables {
        object_classes.insert(c.id.clone(), c.class.clone());
        creatables.entry(c.owner.clone()).or_default().insert(c.id.clone());
    }
    SystemModel::new(table, automata, object_classes, initial, creatables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    fn doc(id: &str, text: &str) -> Document {
        let ext = id.rsplit('.').next().unwrap();
        crate::dsl::parse_with_extension(id, ext, text).unwrap()
    }

    const CD: &str = "class Account {\n  attr balance: Int\n  method deposit(amount: Int): Bool\n}\n";

    #[test]
    fn minimal_consistent_set_elaborates() {
        let docs = [
            doc("a.cd", CD),
            doc("a.sd", "statemachine Account { states S; initial S; trans S -> S on deposit(n) / balance = balance + n }"),
            doc("a.od", "objects { acc: Account { balance = 1 } }"),
        ];
        let m = elaborate(&docs, &[], ElaborateOptions::default()).unwrap();
        assert_eq!(m.automata().len(), 1);
        assert_eq!(m.initial_objects()[0].1.valuation["balance"], Value::Int(1));
    }

    #[test]
    fn unknown_trigger_is_reported() {
        let docs = [
            doc("a.cd", CD),
            doc("a.sd", "statemachine Account { states S; initial S; trans S -> S on withdraw(n) }"),
        ];
        let r = check_documents(&docs, &[]);
        assert_eq!(r.codes(), ["E-SIG-TRIGGER"]);
        assert_eq!(r.findings[0].to_string(), "error E-SIG-TRIGGER a.sd:1:45 trigger `withdraw` is not a method of `Account`");
    }

    #[test]
    fn object_diagram_conditions() {
        let cd = doc("a.cd", "class A { attr x: Int invariant x >= 0 }\nassoc r: A -> A\n");
        let t = merge_class_diagrams([&cd]).0;
        let od = doc("o.od", "objects { a: A { x = -1 } b: B c: A { y = 1, x = true } link q a -> c link r a -> b }");
        let r = check_object_diagram(&od, &t);
        assert_eq!(
            r.codes(),
            ["W-INVARIANT", "E-UNKNOWN-CLASS", "E-UNKNOWN-ATTR", "E-ATTR-TYPE", "E-UNKNOWN-ASSOC", "E-ASSOC-ENDPOINT"]
        );
    }

    #[test]
    fn sequence_diagram_conditions() {
        let cd = doc("a.cd", "class A { method f(x: Int): Bool }\nclass B extends A {}\n");
        let t = merge_class_diagrams([&cd]).0;
        let ok = doc("s.qd", "sequence S { objects b: B; env -> b : f(1) b -> env : done() }");
        assert!(check_sequence_diagram(&ok, &t).is_empty());
        let bad = doc("s.qd", "sequence S { objects b: B, c: C; env -> b : f() env -> b : f(true) env -> b : g() }");
        assert_eq!(check_sequence_diagram(&bad, &t).codes(), ["E-UNKNOWN-CLASS", "E-ARITY", "E-ARG-TYPE", "E-UNKNOWN-METHOD"]);
    }

    #[test]
    fn merge_is_identical_or_disjoint() {
        let a = doc("a.cd", "class A { attr x: Int }");
        let b = doc("b.cd", "class A { attr x: Int }\nclass B {}");
        let (t, r) = merge_class_diagrams([&a, &b]);
        assert!(r.is_empty());
        assert_eq!(t.classes.len(), 2);
        let c = doc("c.cd", "class A { attr x: Bool }");
        let (_, r) = merge_class_diagrams([&a, &c]);
        assert_eq!(r.codes(), ["E-DUP-CLASS"]);
        assert_eq!(r.findings[0].doc.as_deref(), Some("c.cd"));
    }

    #[test]
    fn elaboration_is_order_independent() {
        let docs = [
            doc("b.cd", "class B { method g(): Int }"),
            doc("a.cd", CD),
            doc("a.od", "objects { acc: Account b: B creatable n: B by acc }"),
        ];
        let m1 = elaborate(&docs, &[], ElaborateOptions::default()).unwrap();
        let mut rev = docs.clone();
        rev.reverse();
        let m2 = elaborate(&rev, &[], ElaborateOptions::default()).unwrap();
        assert_eq!(m1, m2);
        assert!(m1.may_create(&ObjectId::new("acc"), &ObjectId::new("n")));
    }

    #[test]
    fn object_diagram_selection() {
        let docs = [doc("a.cd", CD)];
        assert_eq!(elaborate(&docs, &[], ElaborateOptions::default()).unwrap_err().codes(), ["E-NO-OBJECTS"]);
        let docs = [doc("a.cd", CD), doc("x.od", "objects { a: Account }"), doc("y.od", "objects { b: Account }")];
        assert_eq!(elaborate(&docs, &[], ElaborateOptions::default()).unwrap_err().codes(), ["E-OBJECTS-AMBIGUOUS"]);
        let m = elaborate(&docs, &[], ElaborateOptions { object_diagram: Some("y.od") }).unwrap();
        assert!(m.is_initial(&ObjectId::new("b")));
    }

    #[test]
    fn views() {
        let d = parse("a.cd", DocumentKind::ClassDiagram, CD).unwrap();
        assert_eq!(classify_view(&d), [View::Structural, View::Data, View::Interface].into_iter().collect());
        let t = parse("n.txt", DocumentKind::Text, "notes").unwrap();
        assert!(classify_view(&t).is_empty());
        assert_eq!(check_documents(&[d, t], &[]).codes(), ["W-NO-VIEW"]);
    }
}
