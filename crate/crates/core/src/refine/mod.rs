//! Syntactic refinement steps between documents and the bounded trace-set
//! checks that back them.

mod class;
mod seqcheck;
mod state;
mod synth;
mod trace;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::ids::ClassName;
use crate::report::{write_location, Span};
use crate::sim::SimError;

pub use class::{implies_bounded, refine_class_diagram, refine_class_diagrams, Implication, INT_DOMAIN, MAX_VARS};
pub use seqcheck::{check_seq_against_state, target_lifeline, trigger_word};
pub use state::{refine_state_diagram, reachable_states, StateMapping};
pub use synth::{projection_steps, synthesize_state_diagram, MergeStrategy, ProjectedStep, SynthesisOptions};
pub use trace::{
    consistency_intersection, consistency_of_state_diagrams, renaming, state_diagram_models, trace_refinement_check,
    TraceBounds,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: &'static str,
    pub message: String,
    pub doc: Option<String>,
    pub span: Option<Span>,
}

impl Violation {
    pub fn new(rule: &'static str, message: impl Into<String>) -> Self {
        Violation { rule, message: message.into(), doc: None, span: None }
    }

    pub fn at(mut self, doc: &str, span: Option<Span>) -> Self {
        self.doc = Some(doc.into());
        self.span = span;
        self
    }
}

/// `RULE file:line:col message`.
impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ", self.rule)?;
        write_location(f, self.doc.as_deref(), self.span)?;
        write!(f, " {}", self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RefinementVerdict {
    pub accepted: bool,
    pub violations: Vec<Violation>,
    pub checked_rules: Vec<String>,
    pub notes: Vec<String>,
    /// A trace in the canonical text format, when the check produces one.
    pub witness: Option<String>,
}

impl RefinementVerdict {
    pub fn new(checked_rules: &[&str], violations: Vec<Violation>, notes: Vec<String>) -> Self {
        RefinementVerdict {
            accepted: violations.is_empty(),
            violations,
            checked_rules: checked_rules.iter().map(|r| String::from(*r)).collect(),
            notes,
            witness: None,
        }
    }

    pub fn rules(&self) -> Vec<&'static str> {
        self.violations.iter().map(|v| v.rule).collect()
    }
}

/// `ACCEPTED` or `REJECTED`, then one violation per line and notes.
impl fmt::Display for RefinementVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", if self.accepted { "ACCEPTED" } else { "REJECTED" })?;
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RefineError {
    #[error("expected a {expected} document, got `{found}`")]
    WrongKind { expected: &'static str, found: String },
    #[error("state mapping: {0}")]
    MappingError(String),
    #[error("several lifelines of class `{class}` in `{doc}`")]
    AmbiguousLifeline { doc: String, class: ClassName },
    #[error("no lifeline of class `{class}` in `{doc}`")]
    MissingLifeline { doc: String, class: ClassName },
    #[error("class `{0}` never receives a message")]
    ProjectionEmpty(ClassName),
    #[error("state label conflict: {0}")]
    LabelConflict(String),
    #[error("enumeration exceeded the cap of {cap} nodes")]
    ExplosionLimit { cap: usize },
    #[error("need at least {0} models")]
    TooFewModels(usize),
    #[error("documents do not elaborate:\n{0}")]
    Elaboration(crate::report::ValidationReport),
    #[error(transparent)]
    Sim(SimError),
}

impl From<SimError> for RefineError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::ExplosionLimit { cap } => RefineError::ExplosionLimit { cap },
            e => RefineError::Sim(e),
        }
    }
}
