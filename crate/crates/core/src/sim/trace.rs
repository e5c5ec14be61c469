use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::ids::{ClassName, ObjectId};
use crate::model::{Message, ObjectState, TimedStream};

/// The run triple: timed input, output and state streams per object.
/// `env` has input and output streams but no state stream.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RunTrace {
    pub input: BTreeMap<ObjectId, TimedStream<Message>>,
    pub output: BTreeMap<ObjectId, TimedStream<Message>>,
    pub state: BTreeMap<ObjectId, TimedStream<ObjectState>>,
}

/// How control states appear in rendered traces.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum Projection {
    #[default]
    Full,
    /// Control names renamed per class; unmapped names are kept.
    Renamed(BTreeMap<ClassName, BTreeMap<String, String>>),
    /// Messages only; state lines are dropped.
    Observable,
}

/// One line of the canonical trace text, without the trailing newline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent<'a> {
    In(&'a Message),
    State(String),
    Out(&'a Message),
    Tick,
}

impl RunTrace {
    pub fn rounds(&self) -> usize {
        self.input.values().map(TimedStream::ticks).max().unwrap_or(0)
    }

    pub fn objects(&self) -> impl Iterator<Item = &ObjectId> {
        let mut ids: Vec<&ObjectId> = self.input.keys().chain(self.state.keys()).collect();
        ids.sort();
        ids.dedup();
        ids.into_iter()
    }

    /// Events of every round in canonical order: objects by id, then
    /// inputs, state, outputs and the closing tick.
    pub fn events(
        &self,
        projection: &Projection,
        class_of: &dyn Fn(&ObjectId) -> Option<ClassName>,
    ) -> Vec<(usize, &ObjectId, TraceEvent<'_>)> {
        let mut out = Vec::new();
        let ids: Vec<&ObjectId> = self.objects().collect();
        let inputs: Vec<_> = ids.iter().map(|id| per_round(&self.input, id)).collect();
        let outputs: Vec<_> = ids.iter().map(|id| per_round(&self.output, id)).collect();
        let states: Vec<_> = ids.iter().map(|id| per_round(&self.state, id)).collect();
        for round in 0..self.rounds() {
            for (k, id) in ids.iter().enumerate() {
                for m in at(&inputs[k], round) {
                    out.push((round, *id, TraceEvent::In(m)));
                }
                if *projection != Projection::Observable {
                    for s in at(&states[k], round) {
                        out.push((round, *id, TraceEvent::State(render_state(s, projection, class_of(id).as_ref()))));
                    }
                }
                for m in at(&outputs[k], round) {
                    out.push((round, *id, TraceEvent::Out(m)));
                }
                out.push((round, *id, TraceEvent::Tick));
            }
        }
        out
    }

    /// Canonical line format:
    /// `round=<n> obj=<id> in=<msg>|state=<ctrl,{..}>|out=<msg>|tick`.
    pub fn render(&self, projection: &Projection, class_of: &dyn Fn(&ObjectId) -> Option<ClassName>) -> String {
        let mut s = String::new();
        for (round, id, ev) in self.events(projection, class_of) {
            let _ = write!(s, "round={round} obj={id} ");
            let _ = match ev {
                TraceEvent::In(m) => writeln!(s, "in={m}"),
                TraceEvent::State(st) => writeln!(s, "state={st}"),
                TraceEvent::Out(m) => writeln!(s, "out={m}"),
                TraceEvent::Tick => writeln!(s, "tick"),
            };
        }
        s
    }

    /// Drops everything after round `k`.
    pub fn truncate_rounds(&mut self, k: usize) {
        for s in self.input.values_mut().chain(self.output.values_mut()) {
            s.truncate_rounds(k);
        }
        for s in self.state.values_mut() {
            s.truncate_rounds(k);
        }
    }
}

fn per_round<'a, T>(m: &'a BTreeMap<ObjectId, TimedStream<T>>, id: &ObjectId) -> Vec<Vec<&'a T>> {
    m.get(id).map(|s| s.rounds()).unwrap_or_default()
}

fn at<'a, T>(rounds: &[Vec<&'a T>], round: usize) -> Vec<&'a T> {
    rounds.get(round).cloned().unwrap_or_default()
}

fn render_state(s: &ObjectState, projection: &Projection, class: Option<&ClassName>) -> String {
    let control = match (projection, class) {
        (Projection::Renamed(map), Some(c)) => {
            map.get(c).and_then(|m| m.get(&s.control)).unwrap_or(&s.control).clone()
        }
        _ => s.control.clone(),
    };
    alloc::format!("{}", ObjectState { control, valuation: s.valuation.clone() })
}
