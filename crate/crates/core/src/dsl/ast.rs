use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::expr::Expr;
use crate::ids::{ClassName, ObjectId};
use crate::model::{Association, Attribute, Automaton, AutomatonError, ClassTable, Method, Signature, Transition};
use crate::report::Span;
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DocumentKind {
    ClassDiagram,
    ObjectDiagram,
    StateDiagram,
    SequenceDiagram,
    Text,
}

impl DocumentKind {
    pub const ALL: [DocumentKind; 5] = [
        DocumentKind::ClassDiagram,
        DocumentKind::ObjectDiagram,
        DocumentKind::StateDiagram,
        DocumentKind::SequenceDiagram,
        DocumentKind::Text,
    ];

    /// File extension without the dot; also the short name in manifests.
    pub fn extension(self) -> &'static str {
        match self {
            DocumentKind::ClassDiagram => "cd",
            DocumentKind::ObjectDiagram => "od",
            DocumentKind::StateDiagram => "sd",
            DocumentKind::SequenceDiagram => "qd",
            DocumentKind::Text => "txt",
        }
    }

    pub fn from_extension(ext: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.extension() == ext)
    }

    /// Everything except free text has a formal meaning.
    pub fn is_formal(self) -> bool {
        self != DocumentKind::Text
    }
}

impl fmt::Display for DocumentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

/// Addresses a parsed node for span lookup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeRef {
    /// The whole diagram header (`statemachine`, `sequence`, `objects`).
    Header,
    /// Top-level class-diagram item.
    Item(usize),
    Member(usize, usize),
    State(usize),
    Initial(usize),
    Transition(usize),
    Lifeline(usize),
    /// Sequence-diagram event or state label.
    SeqStep(usize),
    Object(usize),
    Binding(usize, usize),
    Link(usize),
    Creatable(usize),
}

pub type SpanMap = BTreeMap<NodeRef, Span>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub body: Body,
    pub source: String,
    pub spans: SpanMap,
}

impl Document {
    pub fn kind(&self) -> DocumentKind {
        self.body.kind()
    }

    pub fn span(&self, node: NodeRef) -> Option<Span> {
        self.spans.get(&node).copied()
    }

    pub fn as_class(&self) -> Option<&ClassDiagramBody> {
        match &self.body {
            Body::Class(b) => Some(b),
            _ => None,
        }
    }

    pub fn as_object(&self) -> Option<&ObjectDiagramBody> {
        match &self.body {
            Body::Object(b) => Some(b),
            _ => None,
        }
    }

    pub fn as_state(&self) -> Option<&StateDiagramBody> {
        match &self.body {
            Body::State(b) => Some(b),
            _ => None,
        }
    }

    pub fn as_sequence(&self) -> Option<&SequenceDiagramBody> {
        match &self.body {
            Body::Sequence(b) => Some(b),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Body {
    Class(ClassDiagramBody),
    Object(ObjectDiagramBody),
    State(StateDiagramBody),
    Sequence(SequenceDiagramBody),
    Text(String),
}

impl Body {
    pub fn kind(&self) -> DocumentKind {
        match self {
            Body::Class(_) => DocumentKind::ClassDiagram,
            Body::Object(_) => DocumentKind::ObjectDiagram,
            Body::State(_) => DocumentKind::StateDiagram,
            Body::Sequence(_) => DocumentKind::SequenceDiagram,
            Body::Text(_) => DocumentKind::Text,
        }
    }
}

// ---- class diagrams ----

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClassDiagramBody {
    pub items: Vec<ClassItem>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassItem {
    Class(ClassDecl),
    Assoc(Association),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDecl {
    pub name: ClassName,
    pub parent: Option<ClassName>,
    pub members: Vec<Member>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Member {
    Attr(Attribute),
    Method(Method),
    Invariant(Expr),
}

impl ClassDecl {
    pub fn signature(&self) -> Signature {
        let mut sig = Signature::default();
        for m in &self.members {
            match m {
                Member::Attr(a) => sig.attributes.push(a.clone()),
                Member::Method(m) => sig.methods.push(m.clone()),
                Member::Invariant(_) => {}
            }
        }
        sig
    }

    pub fn invariants(&self) -> impl Iterator<Item = &Expr> {
        self.members.iter().filter_map(|m| match m {
            Member::Invariant(e) => Some(e),
            _ => None,
        })
    }
}

impl ClassDiagramBody {
    pub fn classes(&self) -> impl Iterator<Item = (usize, &ClassDecl)> {
        self.items.iter().enumerate().filter_map(|(i, it)| match it {
            ClassItem::Class(c) => Some((i, c)),
            ClassItem::Assoc(_) => None,
        })
    }

    pub fn associations(&self) -> impl Iterator<Item = (usize, &Association)> {
        self.items.iter().enumerate().filter_map(|(i, it)| match it {
            ClassItem::Assoc(a) => Some((i, a)),
            ClassItem::Class(_) => None,
        })
    }

    pub fn class(&self, name: &ClassName) -> Option<&ClassDecl> {
        self.classes().map(|(_, c)| c).find(|c| &c.name == name)
    }

    /// The table declared by this diagram alone (names are unique per diagram).
    pub fn class_table(&self) -> ClassTable {
        let mut t = ClassTable::default();
        for (_, c) in self.classes() {
            t.classes.insert(c.name.clone(), c.signature());
            if let Some(p) = &c.parent {
                t.parents.insert(c.name.clone(), p.clone());
            }
            let invs: Vec<Expr> = c.invariants().cloned().collect();
            if !invs.is_empty() {
                t.invariants.insert(c.name.clone(), invs);
            }
        }
        for (_, a) in self.associations() {
            t.associations.insert(a.name.clone(), a.clone());
        }
        t
    }
}

// ---- state diagrams ----

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateDiagramBody {
    pub class: ClassName,
    pub states: Vec<String>,
    pub initial: Vec<String>,
    pub transitions: Vec<Transition>,
}

impl StateDiagramBody {
    pub fn to_automaton(&self) -> Result<Automaton, AutomatonError> {
        Automaton::new(
            self.class.clone(),
            self.states.clone(),
            self.initial.clone(),
            self.transitions.clone(),
        )
    }
}

// ---- sequence diagrams ----

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lifeline {
    pub role: String,
    pub class: ClassName,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeqEvent {
    pub sender: String,
    pub receiver: String,
    pub selector: String,
    pub args: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeqStep {
    Event(SeqEvent),
    /// `state ROLE : LABEL` names the control state of a lifeline at this point.
    Label { role: String, label: String },
}

/// `env` is an implicit lifeline standing for external actors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceDiagramBody {
    pub name: String,
    pub lifelines: Vec<Lifeline>,
    pub steps: Vec<SeqStep>,
}

impl SequenceDiagramBody {
    pub fn events(&self) -> impl Iterator<Item = (usize, &SeqEvent)> {
        self.steps.iter().enumerate().filter_map(|(i, s)| match s {
            SeqStep::Event(e) => Some((i, e)),
            SeqStep::Label { .. } => None,
        })
    }

    pub fn lifeline(&self, role: &str) -> Option<&Lifeline> {
        self.lifelines.iter().find(|l| l.role == role)
    }
}

// ---- object diagrams ----

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectDecl {
    pub id: ObjectId,
    pub class: ClassName,
    pub bindings: Vec<(String, Value)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Link {
    pub assoc: String,
    pub source: ObjectId,
    pub target: ObjectId,
}

/// `creatable ID: CLASS by OWNER`; the owner may be `env`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CreatableDecl {
    pub id: ObjectId,
    pub class: ClassName,
    pub owner: ObjectId,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ObjectDiagramBody {
    pub objects: Vec<ObjectDecl>,
    pub links: Vec<Link>,
    pub creatables: Vec<CreatableDecl>,
}
