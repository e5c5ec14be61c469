use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::ids::{ClassName, ObjectId};
use crate::model::automaton::{Automaton, ObjectState};
use crate::model::message::Message;
use crate::model::signature::{ClassTable, Signature};
use crate::report::ValidationReport;
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("class table is inconsistent:\n{0}")]
    InvalidClassTable(ValidationReport),
    #[error("a system needs at least one initial object")]
    NoInitialObjects,
    #[error("unknown object `{0}`")]
    UnknownObject(ObjectId),
    #[error("object `{object}` has unknown class `{class}`")]
    UnknownClass { object: ObjectId, class: ClassName },
    #[error("`env` is reserved and cannot name an object")]
    ReservedId,
    #[error("no automaton for class `{0}`")]
    MissingAutomaton(ClassName),
    #[error("object `{0}` is listed as initial twice")]
    DuplicateInitial(ObjectId),
    #[error("object `{0}` is creatable by more than one owner")]
    OverlappingCreatables(ObjectId),
    #[error("initial object `{0}` cannot be creatable")]
    InitialCreatable(ObjectId),
    #[error("initial state of `{object}` is invalid: {reason}")]
    InvalidState { object: ObjectId, reason: String },
}

/// The elaborated semantic universe of a document set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemModel {
    class_table: ClassTable,
    signatures: BTreeMap<ClassName, Signature>,
    automata: BTreeMap<ClassName, Automaton>,
    object_classes: BTreeMap<ObjectId, ClassName>,
    initial_objects: Vec<(ObjectId, ObjectState)>,
    creatables: BTreeMap<ObjectId, BTreeSet<ObjectId>>,
}

impl SystemModel {
    /// `object_classes` is the class function over initial and creatable
    /// objects; `creatables` owners may include `env`.
    pub fn new(
        class_table: ClassTable,
        automata: BTreeMap<ClassName, Automaton>,
        object_classes: BTreeMap<ObjectId, ClassName>,
        initial_objects: Vec<(ObjectId, ObjectState)>,
        creatables: BTreeMap<ObjectId, BTreeSet<ObjectId>>,
    ) -> Result<Self, ModelError> {
        let report = crate::model::check_class_table(&class_table);
        if !report.is_empty() {
            return Err(ModelError::InvalidClassTable(report));
        }
        let signatures = class_table
            .classes
            .keys()
            .map(|c| (c.clone(), class_table.effective_signature(c).expect("checked table")))
            .collect();
        for c in class_table.classes.keys() {
            if !automata.contains_key(c) {
                return Err(ModelError::MissingAutomaton(c.clone()));
            }
        }
        for (id, class) in &object_classes {
            if id.is_env() {
                return Err(ModelError::ReservedId);
            }
            if !class_table.contains(class) {
                return Err(ModelError::UnknownClass { object: id.clone(), class: class.clone() });
            }
        }
        if initial_objects.is_empty() {
            return Err(ModelError::NoInitialObjects);
        }
        let mut initial = BTreeSet::new();
        for (id, _) in &initial_objects {
            if !object_classes.contains_key(id) {
                return Err(ModelError::UnknownObject(id.clone()));
            }
            if !initial.insert(id.clone()) {
                return Err(ModelError::DuplicateInitial(id.clone()));
            }
        }
        let mut created = BTreeSet::new();
        for (owner, ids) in &creatables {
            if !owner.is_env() && !object_classes.contains_key(owner) {
                return Err(ModelError::UnknownObject(owner.clone()));
            }
            for id in ids {
                if !object_classes.contains_key(id) {
                    return Err(ModelError::UnknownObject(id.clone()));
                }
                if initial.contains(id) {
                    return Err(ModelError::InitialCreatable(id.clone()));
                }
                if !created.insert(id.clone()) {
                    return Err(ModelError::OverlappingCreatables(id.clone()));
                }
            }
        }
        let model = SystemModel {
            class_table,
            signatures,
            automata,
            object_classes,
            initial_objects,
            creatables,
        };
        for (id, state) in &model.initial_objects {
            model.validate_state(id, state)?;
        }
        Ok(model)
    }

    fn validate_state(&self, id: &ObjectId, state: &ObjectState) -> Result<(), ModelError> {
        let invalid = |reason: String| ModelError::InvalidState { object: id.clone(), reason };
        let class = &self.object_classes[id];
        if !self.automata[class].control_states.contains(&state.control) {
            return Err(invalid(alloc::format!("unknown control state `{}`", state.control)));
        }
        let sig = &self.signatures[class];
        if state.valuation.len() != sig.attributes.len() {
            return Err(invalid("valuation does not cover exactly the class attributes".into()));
        }
        for a in &sig.attributes {
            match state.valuation.get(&a.name) {
                Some(v) if v.ty() == a.ty => {}
                _ => return Err(invalid(alloc::format!("attribute `{}` missing or ill-typed", a.name))),
            }
        }
        Ok(())
    }

    pub fn class_table(&self) -> &ClassTable {
        &self.class_table
    }

    pub fn automata(&self) -> &BTreeMap<ClassName, Automaton> {
        &self.automata
    }

    pub fn initial_objects(&self) -> &[(ObjectId, ObjectState)] {
        &self.initial_objects
    }

    pub fn creatables(&self) -> &BTreeMap<ObjectId, BTreeSet<ObjectId>> {
        &self.creatables
    }

    pub fn objects(&self) -> &BTreeMap<ObjectId, ClassName> {
        &self.object_classes
    }

    /// The class function.
    pub fn class_of(&self, id: &ObjectId) -> Option<&ClassName> {
        self.object_classes.get(id)
    }

    pub fn signature(&self, class: &ClassName) -> Option<&Signature> {
        self.signatures.get(class)
    }

    pub fn automaton_of(&self, id: &ObjectId) -> Option<&Automaton> {
        self.class_of(id).and_then(|c| self.automata.get(c))
    }

    pub fn is_initial(&self, id: &ObjectId) -> bool {
        self.initial_objects.iter().any(|(i, _)| i == id)
    }

    pub fn may_create(&self, owner: &ObjectId, id: &ObjectId) -> bool {
        self.creatables.get(owner).is_some_and(|s| s.contains(id))
    }

    /// Alternative starting states of an initial object: its declared
    /// valuation under each initial control, declared control first.
    pub fn initial_states(&self, id: &ObjectId) -> Vec<ObjectState> {
        let Some((_, declared)) = self.initial_objects.iter().find(|(i, _)| i == id) else {
            return Vec::new();
        };
        let automaton = self.automaton_of(id).expect("validated");
        let mut out = alloc::vec![declared.clone()];
        for c in &automaton.initial_controls {
            if *c != declared.control {
                out.push(ObjectState { control: c.clone(), valuation: declared.valuation.clone() });
            }
        }
        out
    }

    /// States of an object created mid-run: attribute defaults under each
    /// initial control, first declared first.
    pub fn fresh_states(&self, id: &ObjectId) -> Vec<ObjectState> {
        let Some(class) = self.class_of(id) else { return Vec::new() };
        let valuation: BTreeMap<String, Value> = self.signatures[class]
            .attributes
            .iter()
            .map(|a| (a.name.clone(), Value::default_for(a.ty)))
            .collect();
        self.automata[class]
            .initial_controls
            .iter()
            .map(|c| ObjectState { control: c.clone(), valuation: valuation.clone() })
            .collect()
    }

    /// `m` is addressed to `id` and its selector, arity and argument types
    /// match a method of `id`'s effective signature. The environment
    /// accepts everything addressed to it.
    pub fn accepts(&self, id: &ObjectId, m: &Message) -> Result<bool, ModelError> {
        if id.is_env() {
            return Ok(m.receiver == *id);
        }
        let class = self.class_of(id).ok_or_else(|| ModelError::UnknownObject(id.clone()))?;
        if m.receiver != *id {
            return Ok(false);
        }
        Ok(self.signatures[class].method(&m.selector).is_some_and(|meth| {
            meth.params.len() == m.args.len()
                && meth.arg_types().zip(&m.args).all(|(t, v)| v.ty() == t)
        }))
    }
}

pub fn accepts(id: &ObjectId, m: &Message, model: &SystemModel) -> Result<bool, ModelError> {
    model.accepts(id, m)
}
