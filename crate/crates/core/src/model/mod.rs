//! Identifiers, messages, timed streams, signatures, automata and the
//! system model they are assembled into.

mod automaton;
mod message;
mod signature;
mod system;

pub use automaton::{
    black_box, enabled_steps, Assignment, Automaton, AutomatonError, BlackBoxError, ObjectState,
    OutputTemplate, Step, StepError, Transition, Trigger, STUTTER_STATE,
};
pub use message::{Message, MessageKind, StreamItem, TimedStream};
pub use signature::{
    check_class_table, effective_signature, Association, Attribute, ClassError, ClassTable,
    Method, Param, Signature,
};
pub use system::{accepts, ModelError, SystemModel};
