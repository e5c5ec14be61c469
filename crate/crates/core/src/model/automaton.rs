//! Per-class automata and their single-step and black-box behavior.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::expr::{Env, EvalError, Expr};
use crate::ids::ClassName;
use crate::model::message::{Message, MessageKind, TimedStream};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Trigger {
    pub selector: String,
    pub params: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment {
    pub attribute: String,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OutputTemplate {
    pub kind: MessageKind,
    pub selector: String,
    pub args: Vec<Expr>,
    /// Must evaluate to a non-null reference.
    pub target: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub source: String,
    pub target: String,
    pub trigger: Trigger,
    /// `None` reads as `true`.
    pub guard: Option<Expr>,
    /// Applied left to right.
    pub actions: Vec<Assignment>,
    /// Instantiated over the post-action valuation.
    pub outputs: Vec<OutputTemplate>,
}

impl Transition {
    /// The label without endpoints.
    pub fn same_label(&self, other: &Transition) -> bool {
        self.trigger == other.trigger
            && self.guard == other.guard
            && self.actions == other.actions
            && self.outputs == other.outputs
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomatonError {
    #[error("automaton for `{0}` has no initial state")]
    NoInitialState(ClassName),
    #[error("`{0}` is not a declared control state")]
    UnknownState(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automaton {
    pub owner_class: ClassName,
    pub control_states: Vec<String>,
    pub initial_controls: Vec<String>,
    pub transitions: Vec<Transition>,
}

/// Control state name of the stutter automaton given to classes without
/// a state diagram.
pub const STUTTER_STATE: &str = "idle";

impl Automaton {
    pub fn new(
        owner_class: ClassName,
        control_states: Vec<String>,
        initial_controls: Vec<String>,
        transitions: Vec<Transition>,
    ) -> Result<Self, AutomatonError> {
        if initial_controls.is_empty() {
            return Err(AutomatonError::NoInitialState(owner_class));
        }
        let known = |s: &String| control_states.contains(s);
        let mentioned = initial_controls
            .iter()
            .chain(transitions.iter().flat_map(|t| [&t.source, &t.target]));
        for s in mentioned {
            if !known(s) {
                return Err(AutomatonError::UnknownState(s.clone()));
            }
        }
        Ok(Automaton { owner_class, control_states, initial_controls, transitions })
    }

    /// One control state, no transitions: accepts everything, emits nothing.
    pub fn stutter(owner_class: ClassName) -> Self {
        Automaton {
            owner_class,
            control_states: alloc::vec![STUTTER_STATE.into()],
            initial_controls: alloc::vec![STUTTER_STATE.into()],
            transitions: Vec::new(),
        }
    }
}

/// Control state plus attribute valuation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjectState {
    pub control: String,
    pub valuation: BTreeMap<String, Value>,
}

/// `control,{a=1,b=true}` with attributes in name order.
impl fmt::Display for ObjectState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{{", self.control)?;
        for (i, (k, v)) in self.valuation.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}={v}")?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Step {
    pub state: ObjectState,
    pub outputs: Vec<Message>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("evaluating transition {index}: {source}")]
    Eval { index: usize, source: EvalError },
    #[error("transition {index} emits to a null or non-reference target")]
    BadTarget { index: usize },
    #[error("transition {index} assigns unknown attribute `{attribute}`")]
    UnknownAttribute { index: usize, attribute: String },
}

/// All reactions of `a` in state `s` to `m`: one per transition whose
/// source, trigger and guard match, in declaration order, duplicates removed.
/// Empty when nothing is enabled; the message is then consumed without effect.
pub fn enabled_steps(a: &Automaton, s: &ObjectState, m: &Message) -> Result<Vec<Step>, StepError> {
    let mut out: Vec<Step> = Vec::new();
    for (index, t) in a.transitions.iter().enumerate() {
        if t.source != s.control
            || t.trigger.selector != m.selector
            || t.trigger.params.len() != m.args.len()
        {
            continue;
        }
        let params: BTreeMap<String, Value> =
            t.trigger.params.iter().cloned().zip(m.args.iter().cloned()).collect();
        let eval_err = |source| StepError::Eval { index, source };
        let env = Env {
            params: Some(&params),
            attrs: Some(&s.valuation),
            this: Some(&m.receiver),
            sender: Some(&m.sender),
        };
        if let Some(g) = &t.guard {
            if !g.eval_bool(&env).map_err(eval_err)? {
                continue;
            }
        }
        let mut valuation = s.valuation.clone();
        for act in &t.actions {
            let env = Env { attrs: Some(&valuation), ..env };
            let v = act.value.eval(&env).map_err(eval_err)?;
            match valuation.get_mut(&act.attribute) {
                Some(slot) => *slot = v,
                None => {
                    return Err(StepError::UnknownAttribute {
                        index,
                        attribute: act.attribute.clone(),
                    })
                }
            }
        }
        let env = Env { attrs: Some(&valuation), ..env };
        let mut outputs = Vec::with_capacity(t.outputs.len());
        for o in &t.outputs {
            let receiver = match o.target.eval(&env).map_err(eval_err)? {
                Value::Ref(Some(id)) => id,
                _ => return Err(StepError::BadTarget { index }),
            };
            let args = o
                .args
                .iter()
                .map(|e| e.eval(&env))
                .collect::<Result<Vec<_>, _>>()
                .map_err(eval_err)?;
            outputs.push(Message {
                sender: m.receiver.clone(),
                receiver,
                selector: o.selector.clone(),
                args,
                kind: o.kind,
            });
        }
        let step = Step { state: ObjectState { control: t.target.clone(), valuation }, outputs };
        if !out.contains(&step) {
            out.push(step);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlackBoxError {
    #[error("bound {bound} is shorter than the input prefix ({inputs} messages)")]
    BoundTooShort { bound: usize, inputs: usize },
    #[error("branch count exceeded the cap of {cap}")]
    ExplosionLimit { cap: usize },
    #[error(transparent)]
    Step(#[from] StepError),
}

/// Every output stream the automaton can produce when fed `inputs` one per
/// round for `bound` rounds (quiet rounds after the inputs run out).
/// Each stream carries exactly `bound` ticks.
pub fn black_box(
    a: &Automaton,
    init: &ObjectState,
    inputs: &[Message],
    bound: usize,
    cap: usize,
) -> Result<BTreeSet<TimedStream<Message>>, BlackBoxError> {
    if bound < inputs.len() {
        return Err(BlackBoxError::BoundTooShort { bound, inputs: inputs.len() });
    }
    let mut results = BTreeSet::new();
    let mut nodes = 0usize;
    let mut stack = alloc::vec![(init.clone(), 0usize, TimedStream::new())];
    while let Some((state, round, out)) = stack.pop() {
        if round == bound {
            results.insert(out);
            continue;
        }
        nodes += 1;
        if nodes > cap {
            return Err(BlackBoxError::ExplosionLimit { cap });
        }
        let Some(input) = inputs.get(round) else {
            // nothing left to react to
            let mut out = out;
            for _ in round..bound {
                out.tick();
            }
            results.insert(out);
            continue;
        };
        let steps = enabled_steps(a, &state, input)?;
        if steps.is_empty() {
            let mut out = out;
            out.tick();
            stack.push((state, round + 1, out));
            continue;
        }
        for step in steps {
            let mut out = out.clone();
            for m in step.outputs {
                out.push(m);
            }
            out.tick();
            stack.push((step.state, round + 1, out));
        }
    }
    Ok(results)
}
