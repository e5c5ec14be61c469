use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{RefineError, RefinementVerdict, Violation};
use crate::dsl::{ClassItem, Document, DocumentKind, NodeRef};
use crate::expr::{Env, Expr};
use crate::ids::ObjectId;
use crate::report::Span;
use crate::semantics::merge_class_diagrams;
use crate::value::{Value, ValueType};

/// Integers tried per free variable when checking implications.
pub const INT_DOMAIN: core::ops::RangeInclusive<i64> = -32..=32;
/// Above this many free variables implication falls back to syntax.
pub const MAX_VARS: usize = 3;

const RULES: [&str; 5] = ["R-CD-INVALID", "R-CD-DELETE", "R-CD-RETYPE", "R-CD-INHERIT", "R-CD-INVARIANT"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Implication {
    Holds,
    /// Assignment under which the premise holds and the conclusion does not.
    Fails(BTreeMap<String, Value>),
    /// The domain is not enumerable (too many or non-scalar variables).
    Undecided,
}

/// Does `premise` imply `conclusion` for every assignment of the free
/// variables over the bounded domain? Evaluation errors make the premise
/// false and the conclusion false.
pub fn implies_bounded(premise: &Expr, conclusion: &Expr, types: &BTreeMap<String, ValueType>) -> Implication {
    let mut vars: Vec<String> = premise.free_vars().into_iter().collect();
    for v in conclusion.free_vars() {
        if !vars.contains(&v) {
            vars.push(v);
        }
    }
    vars.sort();
    if vars.len() > MAX_VARS {
        return Implication::Undecided;
    }
    let mut domains: Vec<Vec<Value>> = Vec::new();
    for v in &vars {
        match types.get(v) {
            Some(ValueType::Int) => domains.push(INT_DOMAIN.map(Value::Int).collect()),
            Some(ValueType::Bool) => domains.push(alloc::vec![Value::Bool(false), Value::Bool(true)]),
            _ => return Implication::Undecided,
        }
    }
    let this = ObjectId::new("self");
    let mut idx = alloc::vec![0usize; vars.len()];
    loop {
        let attrs: BTreeMap<String, Value> =
            vars.iter().cloned().zip(idx.iter().zip(&domains).map(|(i, d)| d[*i].clone())).collect();
        let env = Env { attrs: Some(&attrs), this: Some(&this), ..Env::default() };
        if premise.eval_bool(&env) == Ok(true) && conclusion.eval_bool(&env) != Ok(true) {
            return Implication::Fails(attrs);
        }
        // odometer increment
        let mut k = 0;
        loop {
            if k == idx.len() {
                return Implication::Holds;
            }
            idx[k] += 1;
            if idx[k] < domains[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

pub fn refine_class_diagram(old: &Document, new: &Document) -> Result<RefinementVerdict, RefineError> {
    refine_class_diagrams(&[old], new)
}

/// `new` refines the integration of `olds`: nothing deleted or retyped,
/// inheritance only added, invariants only strengthened.
pub fn refine_class_diagrams(olds: &[&Document], new: &Document) -> Result<RefinementVerdict, RefineError> {
    for d in olds.iter().chain([&new]) {
        if d.kind() != DocumentKind::ClassDiagram {
            return Err(RefineError::WrongKind { expected: "class diagram", found: d.id.clone() });
        }
    }
    let (old_t, old_report) = merge_class_diagrams(olds.iter().copied());
    let (new_t, new_report) = merge_class_diagrams([new]);
    let mut v = Vec::new();
    let mut notes = Vec::new();
    for f in old_report.errors().chain(new_report.errors()) {
        let mut viol = Violation::new("R-CD-INVALID", format!("{} {}", f.code, f.message));
        viol.doc = f.doc.clone();
        viol.span = f.span;
        v.push(viol);
    }
    if !v.is_empty() {
        return Ok(RefinementVerdict::new(&RULES, v, notes));
    }
    let old_loc = |name: &str| locate_class(olds, name);
    let new_loc = |name: &str| locate_class(&[new], name);
    for (c, old_sig) in &old_t.classes {
        let Some(_) = new_t.classes.get(c) else {
            let (doc, span) = old_loc(c.as_str());
            v.push(Violation::new("R-CD-DELETE", format!("class `{c}` was deleted")).at(&doc, span));
            continue;
        };
        let eff = new_t.effective_signature(c).expect("valid table");
        let (doc, span) = new_loc(c.as_str());
        for a in &old_sig.attributes {
            match eff.attribute(&a.name) {
                None => v.push(
                    Violation::new("R-CD-DELETE", format!("attribute `{c}.{}` was deleted", a.name)).at(&doc, span),
                ),
                Some(b) if b.ty != a.ty => v.push(
                    Violation::new("R-CD-RETYPE", format!("attribute `{c}.{}` changed from {} to {}", a.name, a.ty, b.ty))
                        .at(&doc, span),
                ),
                Some(_) => {}
            }
        }
        for m in &old_sig.methods {
            match eff.method(&m.name) {
                None => {
                    v.push(Violation::new("R-CD-DELETE", format!("method `{c}.{}` was deleted", m.name)).at(&doc, span))
                }
                Some(n) if !n.same_shape(m) => v.push(
                    Violation::new("R-CD-RETYPE", format!("method `{c}.{}` changed its signature", m.name)).at(&doc, span),
                ),
                Some(_) => {}
            }
        }
        if let Some(p) = old_t.parents.get(c) {
            if !new_t.is_subclass(c, p) {
                v.push(
                    Violation::new("R-CD-INHERIT", format!("`{c}` is no longer a subclass of `{p}`")).at(&doc, span),
                );
            }
        }
        let inherited_only = !old_t.invariants.contains_key(c)
            && !new_t.invariants.contains_key(c)
            && old_t.parents.get(c).is_some_and(|p| new_t.parents.get(c) == Some(p));
        let old_inv = old_t.effective_invariants(c).expect("valid table");
        // same pair as the parent's, already checked there
        if old_inv.is_empty() || inherited_only {
            continue;
        }
        let new_inv = new_t.effective_invariants(c).expect("valid table");
        let premise = Expr::conjunction(new_inv.iter().cloned());
        let conclusion = Expr::conjunction(old_inv.iter().cloned());
        match implies_bounded(&premise, &conclusion, &eff.attribute_types()) {
            Implication::Holds => {}
            Implication::Fails(at) => {
                let shown: Vec<String> = at.iter().map(|(k, x)| format!("{k}={x}")).collect();
                v.push(
                    Violation::new(
                        "R-CD-INVARIANT",
                        format!("invariant of `{c}` is weakened, e.g. at {}", shown.join(",")),
                    )
                    .at(&doc, span),
                );
            }
            Implication::Undecided => {
                let new_conj: Vec<&Expr> = new_inv.iter().flat_map(|e| e.conjuncts()).collect();
                let missing: Vec<String> = old_inv
                    .iter()
                    .flat_map(|e| e.conjuncts())
                    .filter(|e| !new_conj.contains(e))
                    .map(|e| e.to_string())
                    .collect();
                notes.push(format!("invariant of `{c}` checked syntactically"));
                if !missing.is_empty() {
                    v.push(
                        Violation::new(
                            "R-CD-INVARIANT",
                            format!("invariant of `{c}` drops `{}`", missing.join("`, `")),
                        )
                        .at(&doc, span),
                    );
                }
            }
        }
    }
    for (name, a) in &old_t.associations {
        let (doc, span) = locate_assoc(olds, name);
        match new_t.associations.get(name) {
            None => v.push(Violation::new("R-CD-DELETE", format!("association `{name}` was deleted")).at(&doc, span)),
            Some(b) if b != a => {
                let (doc, span) = locate_assoc(&[new], name);
                v.push(Violation::new("R-CD-RETYPE", format!("association `{name}` changed its ends")).at(&doc, span))
            }
            Some(_) => {}
        }
    }
    Ok(RefinementVerdict::new(&RULES, v, notes))
}

fn locate_class(docs: &[&Document], name: &str) -> (String, Option<Span>) {
    for d in docs {
        if let Some(b) = d.as_class() {
            for (i, item) in b.items.iter().enumerate() {
                if matches!(item, ClassItem::Class(c) if c.name.as_str() == name) {
                    return (d.id.clone(), d.span(NodeRef::Item(i)));
                }
            }
        }
    }
    (docs.first().map(|d| d.id.clone()).unwrap_or_default(), None)
}

fn locate_assoc(docs: &[&Document], name: &str) -> (String, Option<Span>) {
    for d in docs {
        if let Some(b) = d.as_class() {
            for (i, item) in b.items.iter().enumerate() {
                if matches!(item, ClassItem::Assoc(a) if a.name == name) {
                    return (d.id.clone(), d.span(NodeRef::Item(i)));
                }
            }
        }
    }
    (docs.first().map(|d| d.id.clone()).unwrap_or_default(), None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse, parse_expr};

    fn cd(id: &str, text: &str) -> Document {
        parse(id, DocumentKind::ClassDiagram, text).unwrap()
    }

    const OLD: &str = "class A {\n  attr x: Int\n  method f(): Int\n  invariant x >= 0\n}\nclass B extends A {\n}\nassoc r: A -> B\n";

    fn check(new: &str) -> RefinementVerdict {
        refine_class_diagram(&cd("old.cd", OLD), &cd("new.cd", new)).unwrap()
    }

    #[test]
    fn reflexive_and_additions() {
        assert!(check(OLD).accepted);
        let v = check(&alloc::format!("{OLD}class C extends B {{\n  attr y: Bool\n}}\n"));
        assert!(v.accepted, "{v}");
    }

    #[test]
    fn strengthening_accepted_weakening_rejected() {
        let strong = OLD.replace("invariant x >= 0", "invariant x >= 0 and x <= 10");
        assert!(check(&strong).accepted);
        let weak = OLD.replace("invariant x >= 0", "invariant x >= -1");
        let v = check(&weak);
        assert_eq!(v.rules(), ["R-CD-INVARIANT"]);
        assert!(v.violations[0].message.contains("x=-1"));
    }

    #[test]
    fn deletions_retypes_and_inheritance() {
        assert_eq!(check(&OLD.replace("  method f(): Int\n", "")).rules(), ["R-CD-DELETE"]);
        assert_eq!(check(&OLD.replace("attr x: Int", "attr x: Bool").replace("invariant x >= 0", "")).rules(), ["R-CD-RETYPE", "R-CD-INVARIANT"]);
        assert_eq!(check(&OLD.replace("class B extends A", "class B")).rules(), ["R-CD-INHERIT", "R-CD-INVARIANT"]);
        assert_eq!(check(&OLD.replace("assoc r: A -> B", "assoc r: B -> A")).rules(), ["R-CD-RETYPE"]);
    }

    #[test]
    fn bounded_implication() {
        let types: BTreeMap<String, ValueType> =
            [("x".into(), ValueType::Int), ("b".into(), ValueType::Bool)].into_iter().collect();
        let e = |s: &str| parse_expr(s).unwrap();
        assert_eq!(implies_bounded(&e("x > 3 and b"), &e("x > 2"), &types), Implication::Holds);
        assert!(matches!(implies_bounded(&e("x > 2"), &e("x > 3"), &types), Implication::Fails(_)));
        let many: BTreeMap<String, ValueType> =
            ["a", "b", "c", "d"].iter().map(|v| (String::from(*v), ValueType::Int)).collect();
        assert_eq!(implies_bounded(&e("a + b + c + d > 0"), &e("true"), &many), Implication::Undecided);
    }

    #[test]
    fn syntactic_fallback_is_noted() {
        let old = "class A {\n  attr s: String\n  invariant s != \"\"\n}\n";
        let same = refine_class_diagram(&cd("o.cd", old), &cd("n.cd", old)).unwrap();
        assert!(same.accepted);
        assert_eq!(same.notes.len(), 1);
        let dropped = refine_class_diagram(&cd("o.cd", old), &cd("n.cd", "class A {\n  attr s: String\n}\n")).unwrap();
        assert_eq!(dropped.rules(), ["R-CD-INVARIANT"]);
    }

    #[test]
    fn integration_of_several() {
        let a = cd("a.cd", "class A {\n  attr x: Int\n}\n");
        let b = cd("b.cd", "class B {\n}\n");
        let both = cd("n.cd", "class A {\n  attr x: Int\n}\nclass B extends A {\n}\n");
        assert!(refine_class_diagrams(&[&a, &b], &both).unwrap().accepted);
        let only_a = cd("n.cd", "class A {\n  attr x: Int\n}\n");
        assert_eq!(refine_class_diagrams(&[&a, &b], &only_a).unwrap().rules(), ["R-CD-DELETE"]);
    }
}
