//! Class signatures, single inheritance and the class-table axioms.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::expr::{Expr, TypeEnv};
use crate::ids::ClassName;
use crate::report::{Finding, ValidationReport};
use crate::value::ValueType;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Attribute {
    pub name: String,
    pub ty: ValueType,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Param {
    pub name: String,
    pub ty: ValueType,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Method {
    pub name: String,
    pub params: Vec<Param>,
    pub result: ValueType,
}

impl Method {
    pub fn arg_types(&self) -> impl Iterator<Item = ValueType> + '_ {
        self.params.iter().map(|p| p.ty)
    }

    /// Same argument and result types; parameter names are irrelevant.
    pub fn same_shape(&self, other: &Method) -> bool {
        self.name == other.name
            && self.result == other.result
            && self.arg_types().eq(other.arg_types())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Signature {
    pub attributes: Vec<Attribute>,
    pub methods: Vec<Method>,
}

impl Signature {
    pub fn attribute(&self, name: &str) -> Option<&Attribute> {
        self.attributes.iter().find(|a| a.name == name)
    }

    pub fn method(&self, name: &str) -> Option<&Method> {
        self.methods.iter().find(|m| m.name == name)
    }

    /// Every member of `self` appears identically in `other`.
    pub fn is_included_in(&self, other: &Signature) -> bool {
        self.attributes.iter().all(|a| other.attribute(&a.name) == Some(a))
            && self
                .methods
                .iter()
                .all(|m| other.method(&m.name).is_some_and(|o| o.same_shape(m)))
    }

    pub fn attribute_types(&self) -> BTreeMap<String, ValueType> {
        self.attributes.iter().map(|a| (a.name.clone(), a.ty)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Association {
    pub name: String,
    pub source: ClassName,
    pub target: ClassName,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassError {
    #[error("unknown class `{0}`")]
    UnknownClass(ClassName),
    #[error("class `{class}` extends unknown class `{parent}`")]
    UnknownParent { class: ClassName, parent: ClassName },
    #[error("class `{0}` is part of an inheritance cycle")]
    Cycle(ClassName),
    #[error("class `{class}` redeclares inherited member `{member}` with a different type")]
    ConflictingInheritedMember { class: ClassName, member: String },
}

/// Classes with their own (non-inherited) signatures, single-inheritance
/// parents, invariant conjuncts and associations.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClassTable {
    pub classes: BTreeMap<ClassName, Signature>,
    /// Absent key means the class has no parent.
    pub parents: BTreeMap<ClassName, ClassName>,
    pub invariants: BTreeMap<ClassName, Vec<Expr>>,
    pub associations: BTreeMap<String, Association>,
}

impl ClassTable {
    pub fn contains(&self, c: &ClassName) -> bool {
        self.classes.contains_key(c)
    }

    /// `c` followed by its ancestors, nearest first.
    pub fn ancestry(&self, c: &ClassName) -> Result<Vec<ClassName>, ClassError> {
        if !self.contains(c) {
            return Err(ClassError::UnknownClass(c.clone()));
        }
        let mut chain = alloc::vec![c.clone()];
        let mut cur = c;
        while let Some(p) = self.parents.get(cur) {
            if !self.contains(p) {
                return Err(ClassError::UnknownParent { class: cur.clone(), parent: p.clone() });
            }
            if chain.contains(p) {
                return Err(ClassError::Cycle(p.clone()));
            }
            chain.push(p.clone());
            cur = p;
        }
        Ok(chain)
    }

    /// Reflexive-transitive subclass relation. False on broken hierarchies.
    pub fn is_subclass(&self, c: &ClassName, d: &ClassName) -> bool {
        self.ancestry(c).is_ok_and(|chain| chain.contains(d))
    }

    /// Ancestor members first, each class in declaration order.
    pub fn effective_signature(&self, c: &ClassName) -> Result<Signature, ClassError> {
        let chain = self.ancestry(c)?;
        let mut sig = Signature::default();
        for class in chain.iter().rev() {
            let own = &self.classes[class];
            for a in &own.attributes {
                match sig.attribute(&a.name) {
                    Some(prev) if prev == a => {}
                    Some(_) => return Err(conflict(class, &a.name)),
                    None => sig.attributes.push(a.clone()),
                }
            }
            for m in &own.methods {
                match sig.method(&m.name) {
                    Some(prev) if prev.same_shape(m) => {}
                    Some(_) => return Err(conflict(class, &m.name)),
                    None => sig.methods.push(m.clone()),
                }
            }
        }
        Ok(sig)
    }

    /// Own invariant conjuncts of `c` and all ancestors, root first.
    pub fn effective_invariants(&self, c: &ClassName) -> Result<Vec<Expr>, ClassError> {
        let chain = self.ancestry(c)?;
        Ok(chain
            .iter()
            .rev()
            .flat_map(|k| self.invariants.get(k).into_iter().flatten().cloned())
            .collect())
    }

    /// Findings tagged with the class they concern; used to attach
    /// source locations during elaboration.
    pub(crate) fn findings_by_class(&self) -> Vec<(ClassName, Finding)> {
        let mut out = Vec::new();
        let mut cyclic = BTreeSet::new();
        for c in self.classes.keys() {
            match self.ancestry(c) {
                Err(ClassError::Cycle(_)) => {
                    cyclic.insert(c.clone());
                    out.push((
                        c.clone(),
                        Finding::error("E-CYCLE", format!("class `{c}` is part of an inheritance cycle")),
                    ));
                }
                Err(ClassError::UnknownParent { class, parent }) if &class == c => out.push((
                    c.clone(),
                    Finding::error(
                        "E-UNKNOWN-PARENT",
                        format!("class `{c}` extends unknown class `{parent}`"),
                    ),
                )),
                _ => {}
            }
        }
        for (c, sig) in &self.classes {
            if cyclic.contains(c) {
                continue;
            }
            let Ok(chain) = self.ancestry(c) else { continue };
            // inherited view built from the ancestors only
            let Ok(inherited) = chain
                .get(1)
                .map(|p| self.effective_signature(p))
                .unwrap_or(Ok(Signature::default()))
            else {
                continue;
            };
            for a in &sig.attributes {
                if inherited.attribute(&a.name).is_some_and(|p| p != a) {
                    out.push((c.clone(), conflict_finding(c, &a.name)));
                }
            }
            for m in &sig.methods {
                if inherited.method(&m.name).is_some_and(|p| !p.same_shape(m)) {
                    out.push((c.clone(), conflict_finding(c, &m.name)));
                }
            }
            if let Ok(eff) = self.effective_signature(c) {
                let vars = eff.attribute_types();
                let tenv = TypeEnv { vars: &vars, has_self: true, has_sender: false };
                for inv in self.invariants.get(c).into_iter().flatten() {
                    match inv.type_of(&tenv) {
                        Ok(ValueType::Bool) => {}
                        Ok(t) => out.push((
                            c.clone(),
                            Finding::error(
                                "E-INV-TYPE",
                                format!("invariant `{inv}` of `{c}` has type {t}, expected Bool"),
                            ),
                        )),
                        Err(e) => out.push((
                            c.clone(),
                            Finding::error("E-INV-TYPE", format!("invariant `{inv}` of `{c}`: {e}")),
                        )),
                    }
                }
            }
        }
        for a in self.associations.values() {
            for end in [&a.source, &a.target] {
                if !self.contains(end) {
                    out.push((
                        end.clone(),
                        Finding::error(
                            "E-ASSOC-CLASS",
                            format!("association `{}` refers to unknown class `{end}`", a.name),
                        ),
                    ));
                }
            }
        }
        out
    }
}

fn conflict(class: &ClassName, member: &str) -> ClassError {
    ClassError::ConflictingInheritedMember { class: class.clone(), member: member.into() }
}

fn conflict_finding(class: &ClassName, member: &str) -> Finding {
    Finding::error("E-SIG-CONFLICT", format!("{}", conflict(class, member)))
}

pub fn effective_signature(c: &ClassName, t: &ClassTable) -> Result<Signature, ClassError> {
    t.effective_signature(c)
}

/// Empty iff the subclass relation is a partial order over known classes,
/// signatures are only extended along it, and invariants are Bool-typed.
pub fn check_class_table(t: &ClassTable) -> ValidationReport {
    let mut report = ValidationReport {
        findings: t.findings_by_class().into_iter().map(|(_, f)| f).collect(),
    };
    report.sort();
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::BinOp;

    fn attr(name: &str, ty: ValueType) -> Attribute {
        Attribute { name: name.into(), ty }
    }

    fn method(name: &str, args: &[ValueType], result: ValueType) -> Method {
        Method {
            name: name.into(),
            params: args
                .iter()
                .enumerate()
                .map(|(i, t)| Param { name: format!("p{i}"), ty: *t })
                .collect(),
            result,
        }
    }

    fn table(entries: &[(&str, Option<&str>, Signature)]) -> ClassTable {
        let mut t = ClassTable::default();
        for (name, parent, sig) in entries {
            t.classes.insert(ClassName::new(*name), sig.clone());
            if let Some(p) = parent {
                t.parents.insert(ClassName::new(*name), ClassName::new(*p));
            }
        }
        t
    }

    #[test]
    fn subclass_inherits_members() {
        let account = Signature {
            attributes: alloc::vec![attr("balance", ValueType::Int)],
            methods: alloc::vec![method("deposit", &[ValueType::Int], ValueType::Bool)],
        };
        let savings = Signature {
            attributes: alloc::vec![attr("rate", ValueType::Int)],
            methods: alloc::vec![],
        };
        let t = table(&[("Account", None, account.clone()), ("Savings", Some("Account"), savings)]);
        let eff = t.effective_signature(&"Savings".into()).unwrap();
        assert!(account.is_included_in(&eff));
        assert_eq!(eff.attributes[0].name, "balance");
        assert_eq!(eff.attributes[1].name, "rate");
        assert!(check_class_table(&t).is_empty());
    }

    #[test]
    fn root_class_signature_unchanged() {
        let sig = Signature { attributes: alloc::vec![attr("x", ValueType::Bool)], methods: alloc::vec![] };
        let t = table(&[("A", None, sig.clone())]);
        assert_eq!(t.effective_signature(&"A".into()).unwrap(), sig);
    }

    #[test]
    fn cycle_is_reported() {
        let t = table(&[
            ("A", Some("B"), Signature::default()),
            ("B", Some("A"), Signature::default()),
        ]);
        let r = check_class_table(&t);
        assert_eq!(r.codes(), alloc::vec!["E-CYCLE", "E-CYCLE"]);
        assert!(matches!(t.effective_signature(&"A".into()), Err(ClassError::Cycle(_))));
    }

    #[test]
    fn narrowing_result_type_conflicts() {
        let base = Signature {
            attributes: alloc::vec![],
            methods: alloc::vec![method("get", &[], ValueType::Int)],
        };
        let sub = Signature {
            attributes: alloc::vec![],
            methods: alloc::vec![method("get", &[], ValueType::Bool)],
        };
        let t = table(&[("A", None, base), ("B", Some("A"), sub)]);
        assert_eq!(check_class_table(&t).codes(), alloc::vec!["E-SIG-CONFLICT"]);
        assert!(matches!(
            t.effective_signature(&"B".into()),
            Err(ClassError::ConflictingInheritedMember { .. })
        ));
    }

    #[test]
    fn identical_redeclaration_is_fine() {
        let base = Signature {
            attributes: alloc::vec![attr("x", ValueType::Int)],
            methods: alloc::vec![method("f", &[ValueType::Int], ValueType::Int)],
        };
        let t = table(&[("A", None, base.clone()), ("B", Some("A"), base)]);
        assert!(check_class_table(&t).is_empty());
        assert_eq!(t.effective_signature(&"B".into()).unwrap().attributes.len(), 1);
    }

    #[test]
    fn unknown_parent_and_bad_invariant() {
        let mut t = table(&[("A", Some("Z"), Signature::default())]);
        t.classes.insert("C".into(), Signature { attributes: alloc::vec![attr("x", ValueType::Int)], methods: alloc::vec![] });
        t.invariants.insert("C".into(), alloc::vec![Expr::bin(BinOp::Add, Expr::var("x"), Expr::int(1))]);
        let r = check_class_table(&t);
        assert_eq!(r.codes(), alloc::vec!["E-INV-TYPE", "E-UNKNOWN-PARENT"]);
    }

    #[test]
    fn unknown_class_query() {
        let t = ClassTable::default();
        assert_eq!(
            effective_signature(&"Nope".into(), &t),
            Err(ClassError::UnknownClass("Nope".into()))
        );
    }
}
