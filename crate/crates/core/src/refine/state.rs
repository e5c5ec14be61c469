use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{RefineError, RefinementVerdict, Violation};
use crate::dsl::{Document, NodeRef, StateDiagramBody};
use crate::model::Transition;

const RULES: [&str; 6] = [
    "R-SD-CLASS",
    "R-SD-LOST-STATE",
    "R-SD-NEWTRANS (artifact-defined)",
    "R-SD-RETARGET",
    "R-SD-DELETE",
    "R-SD-INIT",
];

/// Sends states of the new diagram to the old states they refine. States
/// without an entry map to the old state of the same name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StateMapping {
    pub entries: BTreeMap<String, String>,
}

impl StateMapping {
    pub fn identity() -> Self {
        Self::default()
    }

    /// One `NEW -> OLD` pair per line; blank lines and `#` comments are
    /// ignored.
    pub fn parse(text: &str) -> Result<Self, RefineError> {
        let mut entries = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || RefineError::MappingError(format!("line {}: expected `NEW -> OLD`", n + 1));
            let (new, old) = line.split_once("->").ok_or_else(bad)?;
            let (new, old) = (new.trim(), old.trim());
            if new.is_empty() || old.is_empty() || new.contains(char::is_whitespace) || old.contains(char::is_whitespace) {
                return Err(bad());
            }
            if entries.insert(new.to_string(), old.to_string()).is_some() {
                return Err(RefineError::MappingError(format!("line {}: `{new}` mapped twice", n + 1)));
            }
        }
        Ok(StateMapping { entries })
    }

    /// Total map over the new states, or `MappingError`.
    pub fn resolve(&self, old: &StateDiagramBody, new: &StateDiagramBody) -> Result<BTreeMap<String, String>, RefineError> {
        for (k, v) in &self.entries {
            if !new.states.contains(k) {
                return Err(RefineError::MappingError(format!("`{k}` is not a state of the new diagram")));
            }
            if !old.states.contains(v) {
                return Err(RefineError::MappingError(format!("`{v}` is not a state of the old diagram")));
            }
        }
        let mut h = BTreeMap::new();
        for s in &new.states {
            let target = match self.entries.get(s) {
                Some(t) => t.clone(),
                None if old.states.contains(s) => s.clone(),
                None => return Err(RefineError::MappingError(format!("new state `{s}` has no counterpart"))),
            };
            h.insert(s.clone(), target);
        }
        Ok(h)
    }
}

/// States reachable from the initial ones over the transition graph,
/// ignoring guards.
pub fn reachable_states(b: &StateDiagramBody) -> BTreeSet<String> {
    let mut seen: BTreeSet<String> = b.initial.iter().cloned().collect();
    let mut work: Vec<String> = b.initial.clone();
    while let Some(s) = work.pop() {
        for t in b.transitions.iter().filter(|t| t.source == s) {
            if seen.insert(t.target.clone()) {
                work.push(t.target.clone());
            }
        }
    }
    seen
}

fn same_effect(a: &Transition, b: &Transition) -> bool {
    a.trigger == b.trigger && a.guard == b.guard && a.actions == b.actions && a.outputs == b.outputs
}

/// Checks that `new` refines `old` under `mapping` (new state to old state):
///
/// (a) every old state has a preimage;
/// (b) every new transition from a reachable state is the image of an old
///     transition, or a silent loop (no actions, no outputs, source and
///     target mapped to the same old state) on a trigger the old state does
///     not handle at all;
/// (c) every reachable new state keeps, for each old transition of its image,
///     an image transition with the same trigger and guard;
/// (d) initial states map to old initial states.
///
/// Acceptance implies inclusion of bounded trace sets when control states
/// of the new diagram are renamed through the mapping.
pub fn refine_state_diagram(old: &Document, new: &Document, mapping: &StateMapping) -> Result<RefinementVerdict, RefineError> {
    let ob = old.as_state().ok_or_else(|| RefineError::WrongKind { expected: "state diagram", found: old.id.clone() })?;
    let nb = new.as_state().ok_or_else(|| RefineError::WrongKind { expected: "state diagram", found: new.id.clone() })?;
    let mut v = Vec::new();
    let mut notes = Vec::new();
    if ob.class != nb.class {
        v.push(
            Violation::new("R-SD-CLASS", format!("diagrams describe `{}` and `{}`", ob.class, nb.class))
                .at(&new.id, new.span(NodeRef::Header)),
        );
        return Ok(RefinementVerdict::new(&RULES, v, notes));
    }
    let h = mapping.resolve(ob, nb)?;
    let image: BTreeSet<&String> = h.values().collect();
    for (i, s) in ob.states.iter().enumerate() {
        if !image.contains(s) {
            v.push(
                Violation::new("R-SD-LOST-STATE", format!("old state `{s}` has no refinement"))
                    .at(&old.id, old.span(NodeRef::State(i))),
            );
        }
    }
    for (i, s) in nb.initial.iter().enumerate() {
        if !ob.initial.contains(&h[s]) {
            v.push(
                Violation::new("R-SD-INIT", format!("initial state `{s}` refines non-initial `{}`", h[s]))
                    .at(&new.id, new.span(NodeRef::Initial(i))),
            );
        }
    }
    let reach = reachable_states(nb);
    let is_image = |t: &Transition| {
        ob.transitions
            .iter()
            .any(|o| o.source == h[&t.source] && o.target == h[&t.target] && same_effect(o, t))
    };
    for (j, t) in nb.transitions.iter().enumerate() {
        if is_image(t) {
            continue;
        }
        let at = new.span(NodeRef::Transition(j));
        let src = &h[&t.source];
        let silent = h[&t.source] == h[&t.target]
            && t.actions.is_empty()
            && t.outputs.is_empty()
            && !ob.transitions.iter().any(|o| o.source == *src && o.trigger.selector == t.trigger.selector);
        if silent {
            continue;
        }
        if !reach.contains(&t.source) {
            notes.push(format!("transition {} leaves unreachable state `{}`", j + 1, t.source));
            continue;
        }
        let retarget = ob.transitions.iter().find(|o| o.source == *src && same_effect(o, t));
        match retarget {
            Some(o) => v.push(
                Violation::new(
                    "R-SD-RETARGET",
                    format!(
                        "`{}` on {} now leads to `{}` (refines `{}`), was `{}`",
                        t.source, t.trigger.selector, t.target, h[&t.target], o.target
                    ),
                )
                .at(&new.id, at),
            ),
            None => v.push(
                Violation::new(
                    "R-SD-NEWTRANS",
                    format!("`{}` -> `{}` on {} is not the image of an old transition", t.source, t.target, t.trigger.selector),
                )
                .at(&new.id, at),
            ),
        }
    }
    for s in nb.states.iter().filter(|s| reach.contains(*s)) {
        for (k, o) in ob.transitions.iter().enumerate() {
            if o.source != h[s] {
                continue;
            }
            let kept = nb
                .transitions
                .iter()
                .any(|t| t.source == *s && t.trigger == o.trigger && t.guard == o.guard && is_image(t));
            if !kept {
                let guard = o.guard.as_ref().map(|g| format!(" if {g}")).unwrap_or_default();
                v.push(
                    Violation::new(
                        "R-SD-DELETE",
                        format!("state `{s}` no longer handles {}({}){guard}", o.trigger.selector, o.trigger.params.join(", ")),
                    )
                    .at(&old.id, old.span(NodeRef::Transition(k))),
                );
            }
        }
    }
    v.dedup();
    Ok(RefinementVerdict::new(&RULES, v, notes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse, DocumentKind};

    const OLD: &str = "statemachine C {
  states A, B;
  initial A;
  trans A -> B on go()
  trans A -> A on go()
  trans B -> A on back() / emit done() to sender
}";

    fn sd(id: &str, text: &str) -> Document {
        parse(id, DocumentKind::StateDiagram, text).unwrap()
    }

    fn check(new: &str, map: &str) -> RefinementVerdict {
        refine_state_diagram(&sd("old.sd", OLD), &sd("new.sd", new), &StateMapping::parse(map).unwrap()).unwrap()
    }

    #[test]
    fn identity_and_unreachable_state() {
        assert!(check(OLD, "").accepted);
        let extra = OLD.replace("states A, B;", "states A, B, X;").replace("}", "  trans X -> B on back() / emit z() to self\n}");
        let v = check(&extra, "X -> A");
        assert!(v.accepted, "{v}");
        assert_eq!(v.notes.len(), 1);
    }

    #[test]
    fn nondeterminism_reduction_accepted() {
        let v = check(&OLD.replace("  trans A -> A on go()\n", ""), "");
        assert!(v.accepted, "{v}");
    }

    #[test]
    fn deleting_all_handlers_rejected() {
        let v = check(&OLD.replace("  trans B -> A on back() / emit done() to sender\n", ""), "");
        assert_eq!(v.rules(), ["R-SD-DELETE"]);
    }

    #[test]
    fn retarget_and_new_transition() {
        let v = check(&OLD.replace("trans A -> B on go()", "trans A -> A on go()\n  trans A -> A on go() / emit x() to self"), "");
        assert_eq!(v.rules(), ["R-SD-NEWTRANS"]);
        let split = "statemachine C {
  states A, B, B2;
  initial A;
  trans A -> B on go()
  trans A -> A on go()
  trans B -> A on back() / emit done() to sender
  trans A -> B2 on back() / emit done() to sender
}";
        // A handles no `back` in the old diagram, but the new loop is not silent
        assert_eq!(check(split, "B2 -> A").rules(), ["R-SD-NEWTRANS", "R-SD-DELETE", "R-SD-DELETE"]);
        let retarget = OLD.replace("trans B -> A on back()", "trans B -> B on back()");
        assert_eq!(check(&retarget, "").rules(), ["R-SD-RETARGET", "R-SD-DELETE"]);
    }

    #[test]
    fn state_split_and_silent_loop() {
        let new = "statemachine C {
  states A, B1, B2;
  initial A;
  trans A -> B1 on go()
  trans A -> A on go()
  trans B1 -> B2 on go()
  trans B1 -> A on back() / emit done() to sender
  trans B2 -> A on back() / emit done() to sender
}";
        let v = check(new, "B1 -> B\nB2 -> B");
        assert!(v.accepted, "{v}");
    }

    #[test]
    fn init_lost_state_and_mapping_errors() {
        let v = check(&OLD.replace("initial A;", "initial A, B;"), "");
        assert_eq!(v.rules(), ["R-SD-INIT"]);
        let only_a = "statemachine C { states A; initial A; trans A -> A on go() }";
        assert_eq!(check(only_a, "").rules(), ["R-SD-LOST-STATE"]);
        let err = refine_state_diagram(&sd("o.sd", OLD), &sd("n.sd", "statemachine C { states Z; initial Z; }"), &StateMapping::identity());
        assert!(matches!(err, Err(RefineError::MappingError(_))));
        assert!(StateMapping::parse("A B").is_err());
        let other = "statemachine D { states A, B; initial A; }";
        assert_eq!(check(other, "").rules(), ["R-SD-CLASS"]);
    }
}
