//! Semantics kernel for a small UML-like modeling language.
//!
//! Diagram documents (class, object, state and sequence diagrams) are parsed
//! by [`dsl`], elaborated into a [`SystemModel`] by [`semantics`], executed as
//! bounded nondeterministic runs over a buffering medium by [`sim`], and
//! compared against each other by the checks in [`refine`].
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dsl;
pub mod expr;
pub mod ids;
pub mod model;
pub mod refine;
pub mod report;
pub mod semantics;
pub mod sim;
pub mod value;

pub use ids::{ClassName, ObjectId};
pub use model::{
    accepts, black_box, check_class_table, effective_signature, enabled_steps, Automaton,
    ClassTable, Message, MessageKind, ObjectState, Signature, SystemModel, TimedStream,
    Transition,
};
pub use report::{Finding, Severity, Span, ValidationReport};
pub use value::{Value, ValueType};

/// Default node budget for every bounded enumeration.
pub const DEFAULT_BRANCH_CAP: usize = 10_000;
