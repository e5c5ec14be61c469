use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{RefineError, RefinementVerdict, Violation};
use crate::dsl::{Document, Lifeline, NodeRef, SeqEvent, SequenceDiagramBody};
use crate::expr::{Env, Expr, UnOp};
use crate::ids::ClassName;
use crate::model::{ClassTable, Transition};
use crate::semantics::check_sequence_diagram;
use crate::value::Value;

const RULES: [&str; 3] = ["R-QS-INVALID", "R-QS-NO-LIFELINE", "R-QS-NOPATH"];

/// The unique lifeline of `class`, if any.
pub fn target_lifeline<'a>(qd: &'a Document, class: &ClassName) -> Result<Option<&'a Lifeline>, RefineError> {
    let body = qd
        .as_sequence()
        .ok_or_else(|| RefineError::WrongKind { expected: "sequence diagram", found: qd.id.clone() })?;
    let mut hits = body.lifelines.iter().filter(|l| &l.class == class);
    let first = hits.next();
    if hits.next().is_some() {
        return Err(RefineError::AmbiguousLifeline { doc: qd.id.clone(), class: class.clone() });
    }
    Ok(first)
}

/// Events received by `role`, with their step index.
pub fn trigger_word<'a>(body: &'a SequenceDiagramBody, role: &str) -> Vec<(usize, &'a SeqEvent)> {
    body.events().filter(|(_, e)| e.receiver == role).collect()
}

fn uses_context(e: &Expr) -> bool {
    match e {
        Expr::SelfRef | Expr::SenderRef => true,
        Expr::Lit(_) | Expr::Var(_) => false,
        Expr::Unary(UnOp::Neg | UnOp::Not, x) => uses_context(x),
        Expr::Binary(_, l, r) => uses_context(l) || uses_context(r),
    }
}

/// `Some(b)` when the guard is decided by the arguments alone.
fn guard_by_args(t: &Transition, args: &[Value]) -> Option<bool> {
    let Some(g) = &t.guard else { return Some(true) };
    let params: BTreeMap<String, Value> = t.trigger.params.iter().cloned().zip(args.iter().cloned()).collect();
    if uses_context(g) || g.free_vars().iter().any(|v| !params.contains_key(v)) {
        return None;
    }
    let env = Env { params: Some(&params), ..Env::default() };
    Some(g.eval_bool(&env).unwrap_or(false))
}

/// Accepted iff the messages the lifeline of the state diagram's class
/// receives label a path from an initial state. Guards over parameters are
/// evaluated on the literal arguments; other guards are assumed to hold.
pub fn check_seq_against_state(qd: &Document, sd: &Document, t: &ClassTable) -> Result<RefinementVerdict, RefineError> {
    let body = qd
        .as_sequence()
        .ok_or_else(|| RefineError::WrongKind { expected: "sequence diagram", found: qd.id.clone() })?;
    let sb = sd.as_state().ok_or_else(|| RefineError::WrongKind { expected: "state diagram", found: sd.id.clone() })?;
    let mut v = Vec::new();
    let mut notes = Vec::new();
    for f in check_sequence_diagram(qd, t).errors() {
        v.push(Violation { rule: "R-QS-INVALID", message: format!("{} {}", f.code, f.message), doc: f.doc.clone(), span: f.span });
    }
    let Some(lifeline) = target_lifeline(qd, &sb.class)? else {
        v.push(
            Violation::new("R-QS-NO-LIFELINE", format!("no lifeline of class `{}`", sb.class)).at(&qd.id, qd.span(NodeRef::Header)),
        );
        return Ok(RefinementVerdict::new(&RULES, v, notes));
    };
    let mut current: BTreeSet<&str> = sb.initial.iter().map(String::as_str).collect();
    for (i, e) in trigger_word(body, &lifeline.role) {
        let mut next = BTreeSet::new();
        for tr in &sb.transitions {
            if !current.contains(tr.source.as_str()) || tr.trigger.selector != e.selector || tr.trigger.params.len() != e.args.len() {
                continue;
            }
            match guard_by_args(tr, &e.args) {
                Some(true) => {
                    next.insert(tr.target.as_str());
                }
                Some(false) => {}
                None => {
                    let n = format!("guard of `{}` -> `{}` on {} assumed satisfiable", tr.source, tr.target, tr.trigger.selector);
                    if !notes.contains(&n) {
                        notes.push(n);
                    }
                    next.insert(tr.target.as_str());
                }
            }
        }
        if next.is_empty() {
            let states: Vec<&str> = current.iter().copied().collect();
            v.push(
                Violation::new(
                    "R-QS-NOPATH",
                    format!(
                        "`{}` cannot receive {}({}) in state {}",
                        lifeline.role,
                        e.selector,
                        e.args.iter().map(|a| format!("{a}")).collect::<Vec<_>>().join(", "),
                        states.join(" or ")
                    ),
                )
                .at(&qd.id, qd.span(NodeRef::SeqStep(i))),
            );
            break;
        }
        current = next;
    }
    Ok(RefinementVerdict::new(&RULES, v, notes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_with_extension;
    use crate::semantics::merge_class_diagrams;

    fn doc(id: &str, text: &str) -> Document {
        parse_with_extension(id, id.rsplit('.').next().unwrap(), text).unwrap()
    }

    const CD: &str = "class S { attr n: Int method open(k: Int): Bool method close(): Bool }";
    const SD: &str = "statemachine S {
  states Closed, Open;
  initial Closed;
  trans Closed -> Open on open(k) if k > 0
  trans Open -> Closed on close() / emit done() to sender
  trans Open -> Open on open(k) if n > k
}";

    fn verdict(qd: &str) -> RefinementVerdict {
        let cd = doc("s.cd", CD);
        let (t, _) = merge_class_diagrams([&cd]);
        check_seq_against_state(&doc("x.qd", qd), &doc("s.sd", SD), &t).unwrap()
    }

    #[test]
    fn explicit_path_accepted() {
        let v = verdict("sequence ok { objects s: S; env -> s : open(1) s -> env : done() env -> s : close() }");
        assert!(v.accepted, "{v}");
        let v = verdict("sequence ok { objects s: S; env -> s : open(1) env -> s : close() env -> s : open(2) }");
        assert!(v.accepted, "{v}");
        assert!(v.notes.is_empty());
    }

    #[test]
    fn guards_on_arguments_are_evaluated() {
        let v = verdict("sequence g { objects s: S; env -> s : open(0) }");
        assert_eq!(v.rules(), ["R-QS-NOPATH"]);
        assert_eq!(v.violations[0].span.unwrap().start.line, 1);
        let v = verdict("sequence g { objects s: S; env -> s : open(3) env -> s : open(9) }");
        assert!(v.accepted);
        assert_eq!(v.notes.len(), 1);
    }

    #[test]
    fn unknown_trigger_and_missing_lifeline() {
        let v = verdict("sequence u { objects s: S; env -> s : close() }");
        assert_eq!(v.rules(), ["R-QS-NOPATH"]);
        let cd = doc("s.cd", "class S { method open(k: Int): Bool } class T { method go(): Bool }");
        let (t, _) = merge_class_diagrams([&cd]);
        let v = check_seq_against_state(&doc("q.qd", "sequence n { objects a: T; env -> a : go() }"), &doc("s.sd", SD), &t).unwrap();
        assert_eq!(v.rules(), ["R-QS-NO-LIFELINE"]);
        let two = doc("q.qd", "sequence n { objects a: S, b: S; env -> a : close() }");
        assert!(matches!(check_seq_against_state(&two, &doc("s.sd", SD), &t), Err(RefineError::AmbiguousLifeline { .. })));
    }

    #[test]
    fn invalid_sequence_reported() {
        let v = verdict("sequence i { objects s: S; env -> s : open(true) }");
        assert_eq!(v.rules()[0], "R-QS-INVALID");
    }
}
