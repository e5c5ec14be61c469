//! Bounded system runs: one delivery per round over a buffering medium,
//! tick-separated timed streams, creation of objects on first delivery.

mod medium;
mod trace;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use crate::dsl::Stimulus;
use crate::ids::{ClassName, ObjectId};
use crate::model::{enabled_steps, Message, ObjectState, Step, StepError, SystemModel, TimedStream};
pub use medium::MediumState;
pub use trace::{Projection, RunTrace, TraceEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchedulerPolicy {
    SeededRandom(u64),
    RoundRobin,
    /// Every scheduling and nondeterministic choice, up to a node budget.
    ExhaustiveEnumeration(usize),
}

impl core::fmt::Display for SchedulerPolicy {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SchedulerPolicy::SeededRandom(s) => write!(f, "random({s})"),
            SchedulerPolicy::RoundRobin => f.write_str("round-robin"),
            SchedulerPolicy::ExhaustiveEnumeration(c) => write!(f, "exhaustive({c})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("stimulus {index} is invalid: {reason}")]
    InvalidStimulus { index: usize, reason: String },
    #[error("`{sender}` may not create `{receiver}`")]
    CreationViolation { sender: ObjectId, receiver: ObjectId },
    #[error("`{sender}` emitted `{message}`, which its receiver does not accept")]
    InvalidOutput { sender: ObjectId, message: Message },
    #[error("enumeration exceeded the cap of {cap} nodes")]
    ExplosionLimit { cap: usize },
    #[error("a run needs at least one round")]
    NoRounds,
    #[error("`{object}`: {source}")]
    Step { object: ObjectId, source: StepError },
}

/// What happened in one round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepEvent {
    pub round: usize,
    /// `None` for a quiescent round.
    pub delivered: Option<Message>,
    pub created: bool,
    /// Number of reactions that were available (0 means stutter).
    pub alternatives: usize,
    pub outputs: Vec<Message>,
}

impl StepEvent {
    pub fn actor(&self) -> Option<&ObjectId> {
        self.delivered.as_ref().map(|m| &m.receiver)
    }
}

/// An in-flight run. A value: stepping produces a new state.
#[derive(Debug, Clone)]
pub struct RunState<'m> {
    model: &'m SystemModel,
    stimuli: &'m [Stimulus],
    medium: MediumState,
    live: BTreeMap<ObjectId, ObjectState>,
    tick_count: usize,
    trace: RunTrace,
    policy: SchedulerPolicy,
    cursor: usize,
    rng: Option<ChaCha8Rng>,
    injected: bool,
}

/// Checks stimuli and starts a run with every initial object in its
/// declared state.
pub fn init_run<'m>(
    model: &'m SystemModel,
    stimuli: &'m [Stimulus],
    policy: SchedulerPolicy,
) -> Result<RunState<'m>, SimError> {
    let declared: Vec<ObjectState> = model.initial_objects().iter().map(|(_, s)| s.clone()).collect();
    init_with_states(model, stimuli, policy, &declared)
}

fn validate_stimuli(model: &SystemModel, stimuli: &[Stimulus]) -> Result<(), SimError> {
    let env = ObjectId::env();
    for (index, s) in stimuli.iter().enumerate() {
        let bad = |reason: &str| SimError::InvalidStimulus { index, reason: reason.into() };
        let m = &s.message;
        if !m.sender.is_env() {
            return Err(bad("sender must be `env`"));
        }
        if !model.is_initial(&m.receiver) && !model.may_create(&env, &m.receiver) {
            return Err(bad("receiver is neither initial nor creatable by `env`"));
        }
        if !model.accepts(&m.receiver, m).unwrap_or(false) {
            return Err(bad("receiver does not accept the message"));
        }
    }
    Ok(())
}

fn init_with_states<'m>(
    model: &'m SystemModel,
    stimuli: &'m [Stimulus],
    policy: SchedulerPolicy,
    states: &[ObjectState],
) -> Result<RunState<'m>, SimError> {
    validate_stimuli(model, stimuli)?;
    let mut trace = RunTrace::default();
    let env = ObjectId::env();
    trace.input.insert(env.clone(), TimedStream::new());
    trace.output.insert(env, TimedStream::new());
    let mut live = BTreeMap::new();
    for ((id, _), s) in model.initial_objects().iter().zip(states) {
        live.insert(id.clone(), s.clone());
        trace.input.insert(id.clone(), TimedStream::new());
        trace.output.insert(id.clone(), TimedStream::new());
        trace.state.insert(id.clone(), TimedStream::new());
    }
    let rng = match policy {
        SchedulerPolicy::SeededRandom(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    Ok(RunState {
        model,
        stimuli,
        medium: MediumState::default(),
        live,
        tick_count: 0,
        trace,
        policy,
        cursor: 0,
        rng,
        injected: false,
    })
}

impl<'m> RunState<'m> {
    pub fn model(&self) -> &'m SystemModel {
        self.model
    }

    pub fn medium(&self) -> &MediumState {
        &self.medium
    }

    pub fn live(&self) -> &BTreeMap<ObjectId, ObjectState> {
        &self.live
    }

    pub fn tick_count(&self) -> usize {
        self.tick_count
    }

    pub fn trace(&self) -> &RunTrace {
        &self.trace
    }

    pub fn into_trace(self) -> RunTrace {
        self.trace
    }

    /// Puts this round's stimuli into the medium. Idempotent per round.
    pub fn inject(&mut self) {
        if self.injected {
            return;
        }
        self.injected = true;
        let env = ObjectId::env();
        for s in self.stimuli.iter().filter(|s| s.round == self.tick_count) {
            self.trace.output.get_mut(&env).expect("env stream").push(s.message.clone());
            self.medium.send(s.message.clone());
        }
    }

    /// Deliverable `(receiver, sender)` pairs after injection.
    pub fn pairs(&mut self) -> Vec<(ObjectId, ObjectId)> {
        self.inject();
        self.medium.pairs()
    }

    /// States the receiver of `pair` may be in when the message arrives:
    /// its current state, or the fresh states if delivery creates it.
    pub fn arrival_states(&self, pair: &(ObjectId, ObjectId)) -> Result<Vec<ObjectState>, SimError> {
        let (receiver, sender) = pair;
        if let Some(s) = self.live.get(receiver) {
            return Ok(alloc::vec![s.clone()]);
        }
        if self.model.may_create(sender, receiver) {
            Ok(self.model.fresh_states(receiver))
        } else {
            Err(SimError::CreationViolation { sender: sender.clone(), receiver: receiver.clone() })
        }
    }

    fn enabled(&self, pair: &(ObjectId, ObjectId), arrival: &ObjectState) -> Result<Vec<Step>, SimError> {
        let (receiver, sender) = pair;
        let m = self
            .medium
            .queue(receiver)
            .iter()
            .find(|m| m.sender == *sender)
            .expect("pair is deliverable");
        let a = self.model.automaton_of(receiver).expect("receiver has a class");
        enabled_steps(a, arrival, m).map_err(|source| SimError::Step { object: receiver.clone(), source })
    }

    /// Reactions available to the receiver of `pair` from `arrival`;
    /// a single stutter step when no transition is enabled.
    pub fn reactions(&self, pair: &(ObjectId, ObjectId), arrival: &ObjectState) -> Result<Vec<Step>, SimError> {
        let steps = self.enabled(pair, arrival)?;
        if steps.is_empty() {
            Ok(alloc::vec![Step { state: arrival.clone(), outputs: Vec::new() }])
        } else {
            Ok(steps)
        }
    }

    /// Delivers the head message of `pair` with the receiver starting in
    /// `arrival_states(pair)[arrival]` and reacting with
    /// `reactions(..)[branch]`, then closes the round.
    pub fn deliver(
        &self,
        pair: &(ObjectId, ObjectId),
        arrival: usize,
        branch: usize,
    ) -> Result<(RunState<'m>, StepEvent), SimError> {
        let mut next = self.clone();
        next.inject();
        let starts = next.arrival_states(pair)?;
        let start = starts[arrival].clone();
        let enabled = next.enabled(pair, &start)?;
        let alternatives = enabled.len();
        let step = match enabled.into_iter().nth(branch) {
            Some(step) => step,
            None if alternatives == 0 && branch == 0 => Step { state: start, outputs: Vec::new() },
            None => panic!("branch {branch} out of range"),
        };
        let (receiver, sender) = pair;
        let m = next.medium.take(receiver, sender).expect("deliverable");
        let created = !next.live.contains_key(receiver);
        if created {
            let pad = next.tick_count;
            for map in [&mut next.trace.input, &mut next.trace.output] {
                let mut s = TimedStream::new();
                for _ in 0..pad {
                    s.tick();
                }
                map.insert(receiver.clone(), s);
            }
            let mut s = TimedStream::new();
            for _ in 0..pad {
                s.tick();
            }
            next.trace.state.insert(receiver.clone(), s);
        }
        next.trace.input.get_mut(receiver).expect("stream").push(m.clone());
        next.live.insert(receiver.clone(), step.state.clone());
        for o in &step.outputs {
            next.trace.output.get_mut(receiver).expect("stream").push(o.clone());
            if o.receiver.is_env() {
                next.trace.input.get_mut(&o.receiver).expect("env stream").push(o.clone());
                continue;
            }
            if !next.model.accepts(&o.receiver, o).unwrap_or(false) {
                return Err(SimError::InvalidOutput { sender: receiver.clone(), message: o.clone() });
            }
            next.medium.send(o.clone());
        }
        let event = StepEvent {
            round: next.tick_count,
            delivered: Some(m),
            created,
            alternatives,
            outputs: step.outputs,
        };
        next.close_round();
        Ok((next, event))
    }

    /// A round in which nothing is delivered.
    pub fn idle(&self) -> (RunState<'m>, StepEvent) {
        let mut next = self.clone();
        next.inject();
        let event =
            StepEvent { round: next.tick_count, delivered: None, created: false, alternatives: 0, outputs: Vec::new() };
        next.close_round();
        (next, event)
    }

    fn close_round(&mut self) {
        for (id, s) in &self.live {
            self.trace.state.get_mut(id).expect("stream").push(s.clone());
        }
        for s in self.trace.input.values_mut().chain(self.trace.output.values_mut()) {
            s.tick();
        }
        for s in self.trace.state.values_mut() {
            s.tick();
        }
        self.tick_count += 1;
        self.injected = false;
    }

    /// One round under a deterministic or seeded policy.
    pub fn step(&self) -> Result<(RunState<'m>, StepEvent), SimError> {
        let mut cur = self.clone();
        let pairs = cur.pairs();
        if pairs.is_empty() {
            return Ok(cur.idle());
        }
        let pair_ix = match self.policy {
            SchedulerPolicy::SeededRandom(_) => cur.rng.as_mut().expect("seeded").random_range(0..pairs.len()),
            SchedulerPolicy::RoundRobin => {
                let i = cur.cursor % pairs.len();
                cur.cursor += 1;
                i
            }
            SchedulerPolicy::ExhaustiveEnumeration(_) => 0,
        };
        let pair = &pairs[pair_ix];
        let start = cur.arrival_states(pair)?.remove(0);
        let n = cur.reactions(pair, &start)?.len();
        let branch = match self.policy {
            SchedulerPolicy::SeededRandom(_) if n > 1 => cur.rng.as_mut().expect("seeded").random_range(0..n),
            _ => 0,
        };
        cur.deliver(pair, 0, branch)
    }

    /// Every successor of this state: all pairs, arrival states and
    /// reactions.
    pub fn successors(&self) -> Result<Vec<(RunState<'m>, StepEvent)>, SimError> {
        let mut cur = self.clone();
        let pairs = cur.pairs();
        if pairs.is_empty() {
            return Ok(alloc::vec![cur.idle()]);
        }
        let mut out = Vec::new();
        for pair in &pairs {
            let starts = cur.arrival_states(pair)?;
            for (a, start) in starts.iter().enumerate() {
                let n = cur.reactions(pair, start)?.len();
                for b in 0..n {
                    out.push(cur.deliver(pair, a, b)?);
                }
            }
        }
        Ok(out)
    }
}

/// Runs for `rounds` rounds. Deterministic policies yield one trace;
/// exhaustive enumeration yields every distinct trace or fails with
/// `ExplosionLimit`.
pub fn run(
    model: &SystemModel,
    stimuli: &[Stimulus],
    rounds: usize,
    policy: SchedulerPolicy,
) -> Result<Vec<RunTrace>, SimError> {
    if rounds == 0 {
        return Err(SimError::NoRounds);
    }
    if let SchedulerPolicy::ExhaustiveEnumeration(cap) = policy {
        let set = enumerate_runs(model, stimuli, rounds, cap)?;
        if set.truncated {
            return Err(SimError::ExplosionLimit { cap });
        }
        return Ok(set.traces.into_values().collect());
    }
    let mut rs = init_run(model, stimuli, policy)?;
    while rs.tick_count < rounds {
        rs = rs.step()?.0;
    }
    Ok(alloc::vec![rs.into_trace()])
}

/// Distinct traces keyed by their full canonical text.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunSet {
    pub traces: BTreeMap<String, RunTrace>,
    /// The node budget ran out before the search finished.
    pub truncated: bool,
}

impl RunSet {
    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    /// Canonical texts under `projection`.
    pub fn projected(&self, model: &SystemModel, projection: &Projection) -> alloc::collections::BTreeSet<String> {
        self.traces.values().map(|t| render(model, t, projection)).collect()
    }
}

/// Trace text with class lookups taken from `model`.
pub fn render(model: &SystemModel, trace: &RunTrace, projection: &Projection) -> String {
    let class_of = |id: &ObjectId| -> Option<ClassName> { model.class_of(id).cloned() };
    trace.render(projection, &class_of)
}

/// Every run of `rounds` rounds over all scheduling choices, initial
/// controls and reactions. Expands at most `cap` nodes.
pub fn enumerate_runs(
    model: &SystemModel,
    stimuli: &[Stimulus],
    rounds: usize,
    cap: usize,
) -> Result<RunSet, SimError> {
    if rounds == 0 {
        return Err(SimError::NoRounds);
    }
    validate_stimuli(model, stimuli)?;
    let policy = SchedulerPolicy::ExhaustiveEnumeration(cap);
    let mut starts: Vec<Vec<ObjectState>> = alloc::vec![Vec::new()];
    for (id, _) in model.initial_objects() {
        let alts = model.initial_states(id);
        starts = starts
            .into_iter()
            .flat_map(|prefix| {
                alts.iter().map(move |s| {
                    let mut p = prefix.clone();
                    p.push(s.clone());
                    p
                })
            })
            .collect();
    }
    let mut stack = Vec::new();
    for s in starts.iter().rev() {
        stack.push(init_with_states(model, stimuli, policy, s)?);
    }
    let mut set = RunSet::default();
    let mut nodes = 0usize;
    while let Some(rs) = stack.pop() {
        if rs.tick_count == rounds {
            let text = render(model, &rs.trace, &Projection::Full);
            set.traces.entry(text).or_insert(rs.trace);
            continue;
        }
        nodes += 1;
        if nodes > cap {
            set.truncated = true;
            break;
        }
        let mut succ = rs.successors()?;
        succ.reverse();
        stack.extend(succ.into_iter().map(|(s, _)| s));
    }
    Ok(set)
}

#[cfg(test)]
mod tests;
