//! Seeded generators for documents, models and refinement cases.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sysmodel_core::dsl::{
    parse, parse_with_extension, serialize, Body, ClassDecl, ClassDiagramBody, ClassItem, CreatableDecl, Document,
    DocumentKind, Lifeline, Link, Member, ObjectDecl, ObjectDiagramBody, SeqEvent, SeqStep, SequenceDiagramBody,
    StateDiagramBody,
};
use sysmodel_core::expr::{BinOp, Expr, UnOp};
use sysmodel_core::model::{
    Assignment, Association, Attribute, Automaton, ClassTable, Message, MessageKind, Method, ObjectState,
    OutputTemplate, Param, Signature, SystemModel, Transition, Trigger,
};
use sysmodel_core::dsl::parse_stimuli;
use sysmodel_core::refine::{
    refine_state_diagram, renaming, state_diagram_models, trace_refinement_check, RefinementVerdict, StateMapping, TraceBounds,
};
use sysmodel_core::semantics::{elaborate, ElaborateOptions};
use sysmodel_core::{ClassName, ObjectId, Value, ValueType};

pub type Rand = ChaCha8Rng;

pub fn rng(seed: u64) -> Rand {
    ChaCha8Rng::seed_from_u64(seed)
}

fn pick<T: Clone>(r: &mut Rand, xs: &[T]) -> T {
    xs.choose(r).expect("non-empty").clone()
}

pub fn doc(id: &str, text: &str) -> Document {
    let ext = id.rsplit('.').next().unwrap_or("txt");
    parse_with_extension(id, ext, text).unwrap_or_else(|e| panic!("{id}: {e}\n{text}"))
}

/// Wraps a body into a document with no source text or spans.
pub fn bare(id: &str, body: Body) -> Document {
    Document { id: id.into(), body, source: String::new(), spans: BTreeMap::new() }
}

// ---- class tables ----

/// Up to `max` classes, mostly forests with mostly compatible members;
/// sometimes cycles, unknown parents or clashing redeclarations.
pub fn class_table(r: &mut Rand, max: usize) -> ClassTable {
    let n = r.random_range(1..=max);
    let names: Vec<ClassName> = (0..n).map(|i| ClassName::new(format!("C{i}"))).collect();
    let canon_attr: BTreeMap<&str, ValueType> =
        ["a", "b", "c", "d"].into_iter().map(|a| (a, if r.random_bool(0.5) { ValueType::Int } else { ValueType::Bool })).collect();
    let mut t = ClassTable::default();
    for (i, c) in names.iter().enumerate() {
        let roll = r.random_range(0..100);
        if roll < 5 {
            t.parents.insert(c.clone(), pick(r, &names));
        } else if roll < 8 {
            t.parents.insert(c.clone(), ClassName::new("Missing"));
        } else if i > 0 && roll < 70 {
            t.parents.insert(c.clone(), names[r.random_range(0..i)].clone());
        }
        let mut sig = Signature::default();
        for (name, ty) in &canon_attr {
            if r.random_bool(0.3) {
                let ty = if r.random_bool(0.08) { flip(*ty) } else { *ty };
                sig.attributes.push(Attribute { name: (*name).into(), ty });
            }
        }
        for name in ["f", "g"] {
            if r.random_bool(0.3) {
                let arity = if name == "f" { 1 } else { 0 };
                let arity = if r.random_bool(0.08) { arity + 1 } else { arity };
                let params = (0..arity).map(|k| Param { name: format!("p{k}"), ty: ValueType::Int }).collect();
                sig.methods.push(Method { name: name.into(), params, result: ValueType::Bool });
            }
        }
        t.classes.insert(c.clone(), sig);
    }
    t
}

fn flip(t: ValueType) -> ValueType {
    if t == ValueType::Int {
        ValueType::Bool
    } else {
        ValueType::Int
    }
}

// ---- single automata ----

pub struct BlackBoxCase {
    pub text: String,
    pub automaton: Automaton,
    pub init: ObjectState,
    pub inputs: Vec<Message>,
    pub bound: usize,
}

/// Automaton of class `Box` (`x: Int`, `inc(k: Int)`, `reset()`) with at
/// most 5 states and 8 transitions, and an input prefix of at most 4.
pub fn black_box_case(r: &mut Rand) -> BlackBoxCase {
    let n = r.random_range(1..=5);
    let states: Vec<String> = (0..n).map(|i| format!("q{i}")).collect();
    let mut text = format!("statemachine Box {{\n  states {};\n  initial q0;\n", states.join(", "));
    for _ in 0..r.random_range(0..=8) {
        let (s, t) = (pick(r, &states), pick(r, &states));
        let inc = r.random_bool(0.6);
        let trig = if inc { "inc(k)" } else { "reset()" };
        let guards: &[&str] = if inc { &["", "", "k > 0", "x < 2", "k == x", "not (x == 0)"] } else { &["", "", "x < 2"] };
        let actions: &[&str] = if inc { &["", "x = x + k", "x = k", "x = 0"] } else { &["", "x = 0", "x = x + 1"] };
        let outs: &[&str] =
            if inc { &["", "emit out(x) to sender", "emit echo(k) to sender", "emit ack() to sender"] } else { &["", "emit out(x) to sender", "emit ack() to sender"] };
        let g = pick(r, guards);
        let mut effects: Vec<&str> = [pick(r, actions), pick(r, outs)].into_iter().filter(|e| !e.is_empty()).collect();
        if r.random_bool(0.2) {
            effects.push("emit ack() to sender");
        }
        write!(text, "  trans {s} -> {t} on {trig}").unwrap();
        if !g.is_empty() {
            write!(text, " if {g}").unwrap();
        }
        if !effects.is_empty() {
            write!(text, " / {}", effects.join(", ")).unwrap();
        }
        text.push('\n');
    }
    text.push_str("}\n");
    let d = parse("box.sd", DocumentKind::StateDiagram, &text).unwrap();
    let automaton = d.as_state().unwrap().to_automaton().unwrap();
    let init = ObjectState { control: "q0".into(), valuation: [("x".to_string(), Value::Int(r.random_range(0..3)))].into() };
    let len = r.random_range(0..=4);
    let inputs = (0..len)
        .map(|_| {
            if r.random_bool(0.7) {
                Message::call("env", "box", "inc", vec![Value::Int(r.random_range(-1..3))])
            } else {
                Message::call("env", "box", "reset", vec![])
            }
        })
        .collect();
    let bound = len + r.random_range(0..=2);
    BlackBoxCase { text, automaton, init, inputs, bound }
}

// ---- small systems ----

/// A document set with stimuli, as text.
#[derive(Debug, Clone)]
pub struct ToyModel {
    pub docs: Vec<(String, String)>,
    pub stimuli: String,
}

impl ToyModel {
    pub fn documents(&self) -> Vec<Document> {
        self.docs.iter().map(|(id, t)| doc(id, t)).collect()
    }

    pub fn model(&self) -> SystemModel {
        elaborate(&self.documents(), &[], ElaborateOptions::default()).unwrap_or_else(|e| panic!("{e}\n{:?}", self.docs))
    }
}

fn toy_transition(r: &mut Rand, states: &[&str], attr: &str, targets: &[String]) -> String {
    let (s, t) = (pick(r, states), pick(r, states));
    let go = r.random_bool(0.5);
    let mut line = format!("  trans {s} -> {t} on {}", if go { "go(k)" } else { "ping()" });
    let (g2, g1) = (format!("{attr} < 2"), format!("{attr} < 1"));
    let guard = if go { pick(r, &["", "", "k > 0", g2.as_str()]) } else { pick(r, &["", "", g1.as_str()]) };
    if !guard.is_empty() {
        write!(line, " if {guard}").unwrap();
    }
    let mut effects = Vec::new();
    if r.random_bool(0.4) {
        effects.push(format!("{attr} = {attr} + 1"));
    }
    for _ in 0..r.random_range(0..=2) {
        let to = pick(r, targets);
        effects.push(if r.random_bool(0.5) { format!("emit ping() to {to}") } else { format!("emit go({attr}) to {to}") });
    }
    if !effects.is_empty() {
        write!(line, " / {}", effects.join(", ")).unwrap();
    }
    line.push('\n');
    line
}

/// One owner object `p0` of class `P`, one or two `N` objects, an
/// optional `kid` only `p0` may create and an optional `late` only the
/// environment may create; at most four objects in all.
pub fn toy_model(r: &mut Rand, rounds: usize) -> ToyModel {
    let cd = "class P {\n  attr n: Int\n  method go(k: Int): Bool\n  method ping(): Bool\n}\n\nclass N {\n  attr x: Int\n  method go(k: Int): Bool\n  method ping(): Bool\n}\n";
    let ns: Vec<String> = (1..=r.random_range(1..=2)).map(|i| format!("o{i}")).collect();
    let kid = r.random_bool(0.5);
    let late = r.random_bool(0.3) && ns.len() + usize::from(kid) < 3;
    let mut od = String::from("objects {\n  p0: P\n");
    for o in &ns {
        writeln!(od, "  {o}: N {{ x = {} }}", r.random_range(0..2)).unwrap();
    }
    if kid {
        od.push_str("  creatable kid: N by p0\n");
    }
    if late {
        od.push_str("  creatable late: N by env\n");
    }
    od.push_str("}\n");
    let mut p_targets: Vec<String> = vec!["sender".into()];
    p_targets.extend(ns.iter().map(|o| format!("@{o}")));
    if kid {
        p_targets.push("@kid".into());
    }
    let mut n_targets: Vec<String> = vec!["sender".into(), "@p0".into()];
    n_targets.extend(ns.iter().map(|o| format!("@{o}")));
    let two = r.random_bool(0.2);
    let mut psd = format!("statemachine P {{\n  states A, B;\n  initial {};\n", if two { "A, B" } else { "A" });
    for _ in 0..r.random_range(1..=4) {
        psd.push_str(&toy_transition(r, &["A", "B"], "n", &p_targets));
    }
    psd.push_str("}\n");
    let mut nsd = String::from("statemachine N {\n  states S, T;\n  initial S;\n");
    for _ in 0..r.random_range(1..=4) {
        nsd.push_str(&toy_transition(r, &["S", "T"], "x", &n_targets));
    }
    nsd.push_str("}\n");
    let mut receivers: Vec<String> = vec!["p0".into()];
    receivers.extend(ns.iter().cloned());
    if late {
        receivers.push("late".into());
    }
    let mut stimuli = String::new();
    for _ in 0..r.random_range(1..=3) {
        let round = r.random_range(0..rounds.max(1));
        let to = pick(r, &receivers);
        let call = if r.random_bool(0.5) { format!("go({})", r.random_range(0..3)) } else { "ping()".into() };
        writeln!(stimuli, "round {round}: env -> {to} . {call}").unwrap();
    }
    ToyModel {
        docs: vec![("toy.cd".into(), cd.into()), ("toy.od".into(), od), ("p.sd".into(), psd), ("n.sd".into(), nsd)],
        stimuli,
    }
}

// ---- state-diagram refinement ----

pub const REFINE_CD: &str = "class C {\n  attr x: Int\n  method a(k: Int): Bool\n  method b(): Bool\n  method c(): Bool\n}\n";
pub const REFINE_OD: &str = "objects {\n  o: C\n}\n";

/// Old state diagram of class `C` with one object `o` and one stimulus per
/// trigger. With `fire`, transition 0 leaves the only initial state on the
/// trigger of the round-0 stimulus and has no guard.
#[derive(Debug, Clone)]
pub struct SdFamily {
    pub old: StateDiagramBody,
    pub stimuli: String,
}

impl SdFamily {
    pub fn base_docs(&self) -> Vec<Document> {
        vec![doc("c.cd", REFINE_CD), doc("c.od", REFINE_OD)]
    }

    pub fn old_doc(&self) -> Document {
        reparse("old.sd", &self.old)
    }
}

pub fn reparse(id: &str, body: &StateDiagramBody) -> Document {
    let text = serialize(&bare(id, Body::State(body.clone())));
    doc(id, &text)
}

fn trigger(sel: &str) -> Trigger {
    Trigger { selector: sel.into(), params: if sel == "a" { vec!["k".into()] } else { vec![] } }
}

fn refine_transition(r: &mut Rand, states: &[String], sel: &str) -> Transition {
    let guard = match (sel, r.random_range(0..4)) {
        ("a", 0) => Some(Expr::bin(BinOp::Gt, Expr::var("k"), Expr::int(0))),
        (_, 1) => Some(Expr::bin(BinOp::Lt, Expr::var("x"), Expr::int(2))),
        _ => None,
    };
    let mut actions = vec![];
    if r.random_bool(0.4) {
        actions.push(Assignment { attribute: "x".into(), value: Expr::bin(BinOp::Add, Expr::var("x"), Expr::int(1)) });
    }
    let mut outputs = vec![];
    match r.random_range(0..6) {
        0 | 1 => outputs.push(out("r", vec![Expr::var("x")], to_env())),
        2 => outputs.push(out("s", vec![], to_env())),
        3 => outputs.push(out("b", vec![], Expr::SelfRef)),
        _ => {}
    }
    Transition { source: pick(r, states), target: pick(r, states), trigger: trigger(sel), guard, actions, outputs }
}

fn to_env() -> Expr {
    Expr::Lit(Value::Ref(Some(ObjectId::env())))
}

fn out(sel: &str, args: Vec<Expr>, target: Expr) -> OutputTemplate {
    OutputTemplate { kind: MessageKind::Call, selector: sel.into(), args, target }
}

pub fn sd_family(r: &mut Rand, fire: bool) -> SdFamily {
    let n = r.random_range(2..=4);
    let states: Vec<String> = (0..n).map(|i| format!("S{i}")).collect();
    let mut initial = vec!["S0".to_string()];
    if !fire && r.random_bool(0.2) {
        initial.push("S1".into());
    }
    let mut order = vec!["a", "b", "c"];
    order.shuffle(r);
    let mut transitions = Vec::new();
    if fire {
        let mut t = refine_transition(r, &states, order[0]);
        t.source = "S0".into();
        t.guard = None;
        transitions.push(t);
    }
    for _ in 0..r.random_range(2..=6) {
        let sel = pick(r, &["a", "b", "c"]);
        let t = refine_transition(r, &states, sel);
        if r.random_bool(0.25) {
            // same source, trigger and guard with another effect
            let mut twin = refine_transition(r, &states, sel);
            twin.source = t.source.clone();
            twin.guard = t.guard.clone();
            transitions.push(twin);
        }
        transitions.push(t);
    }
    dedup(&mut transitions);
    let mut stimuli = String::new();
    for (round, sel) in order.iter().enumerate() {
        let args = if *sel == "a" { "1" } else { "" };
        writeln!(stimuli, "round {round}: env -> o . {sel}({args})").unwrap();
    }
    SdFamily { old: StateDiagramBody { class: "C".into(), states, initial, transitions }, stimuli }
}

fn dedup(ts: &mut Vec<Transition>) {
    let mut seen = BTreeSet::new();
    ts.retain(|t| seen.insert(t.clone()));
}

#[derive(Debug, Clone)]
pub struct RefinementPair {
    pub family: SdFamily,
    pub new: StateDiagramBody,
    /// `NEW -> OLD` lines.
    pub mapping: String,
    pub ops: Vec<&'static str>,
    /// Only rule-preserving edits were applied.
    pub legal: bool,
}

impl RefinementPair {
    pub fn new_doc(&self) -> Document {
        reparse("new.sd", &self.new)
    }

    pub fn syntactic(&self) -> RefinementVerdict {
        let mapping = StateMapping::parse(&self.mapping).expect("mapping");
        refine_state_diagram(&self.family.old_doc(), &self.new_doc(), &mapping).expect("same class")
    }

    /// Bounded trace inclusion of the new model in the old one, control
    /// states renamed through the mapping.
    pub fn semantic(&self, rounds: usize) -> RefinementVerdict {
        let (old, new) = state_diagram_models(&self.family.base_docs(), None, &self.family.old_doc(), &self.new_doc()).expect("models");
        let stimuli = parse_stimuli(&self.family.stimuli).expect("stimuli");
        let bounds = TraceBounds { rounds, ..TraceBounds::default() };
        trace_refinement_check(&old, &new, &stimuli, bounds, &renaming(&ClassName::new("C"), self.map())).expect("bounded")
    }

    /// New state to old state, identity included.
    pub fn map(&self) -> BTreeMap<String, String> {
        let mut h: BTreeMap<String, String> = self.new.states.iter().map(|s| (s.clone(), s.clone())).collect();
        for line in self.mapping.lines() {
            let (a, b) = line.split_once(" -> ").unwrap();
            h.insert(a.into(), b.into());
        }
        h
    }
}

fn reachable(b: &StateDiagramBody) -> BTreeSet<String> {
    let mut seen: BTreeSet<String> = b.initial.iter().cloned().collect();
    loop {
        let more: Vec<String> =
            b.transitions.iter().filter(|t| seen.contains(&t.source) && !seen.contains(&t.target)).map(|t| t.target.clone()).collect();
        if more.is_empty() {
            return seen;
        }
        seen.extend(more);
    }
}

/// Applies one to three edits. With `legal`, every edit preserves the
/// refinement rules; otherwise the last edit retargets an old transition
/// or adds a transition with a new effect.
pub fn refinement_pair(r: &mut Rand, legal: bool) -> RefinementPair {
    let family = sd_family(r, false);
    let mut new = family.old.clone();
    let mut h: BTreeMap<String, String> = new.states.iter().map(|s| (s.clone(), s.clone())).collect();
    let mut ops = Vec::new();
    let mut fresh = 0;
    for _ in 0..r.random_range(1..=2) {
        match r.random_range(0..4) {
            0 => {
                let x = pick(r, &new.states);
                let y = format!("{x}x{fresh}");
                fresh += 1;
                let copies: Vec<Transition> = new
                    .transitions
                    .iter()
                    .filter(|t| t.source == x)
                    .map(|t| Transition { source: y.clone(), ..t.clone() })
                    .collect();
                new.transitions.extend(copies);
                for t in new.transitions.iter_mut() {
                    if t.target == x && r.random_bool(0.5) {
                        t.target = y.clone();
                    }
                }
                if new.initial.contains(&x) && r.random_bool(0.3) {
                    new.initial.push(y.clone());
                }
                new.states.push(y.clone());
                h.insert(y, h[&x].clone());
                ops.push("split");
            }
            1 => {
                let u = format!("U{fresh}");
                fresh += 1;
                let img = pick(r, &family.old.states);
                new.states.push(u.clone());
                h.insert(u.clone(), img);
                for _ in 0..r.random_range(1..=2) {
                    let mut t = {
                        let sel = pick(r, &["a", "b", "c"]);
                        refine_transition(r, &new.states, sel)
                    };
                    t.source = u.clone();
                    new.transitions.push(t);
                }
                ops.push("unreachable-state");
            }
            2 => {
                let mut groups: BTreeMap<(String, Trigger, Option<Expr>), Vec<usize>> = BTreeMap::new();
                for (i, t) in new.transitions.iter().enumerate() {
                    groups.entry((t.source.clone(), t.trigger.clone(), t.guard.clone())).or_default().push(i);
                }
                if let Some(ix) = groups.values().filter(|v| v.len() > 1).collect::<Vec<_>>().choose(r) {
                    let drop = *ix.choose(r).unwrap();
                    new.transitions.remove(drop);
                    ops.push("drop-duplicate");
                }
            }
            _ => {
                let s = pick(r, &new.states);
                let unhandled: Vec<&str> = ["a", "b", "c"]
                    .into_iter()
                    .filter(|sel| !family.old.transitions.iter().any(|t| t.source == h[&s] && t.trigger.selector == *sel))
                    .collect();
                if let Some(sel) = unhandled.choose(r) {
                    let siblings: Vec<String> = new.states.iter().filter(|z| h[*z] == h[&s]).cloned().collect();
                    let guard = if r.random_bool(0.3) { Some(Expr::bin(BinOp::Lt, Expr::var("x"), Expr::int(1))) } else { None };
                    new.transitions.push(Transition {
                        source: s.clone(),
                        target: pick(r, &siblings),
                        trigger: trigger(sel),
                        guard,
                        actions: vec![],
                        outputs: vec![],
                    });
                    ops.push("silent-loop");
                }
            }
        }
    }
    if !legal {
        let reach = reachable(&new);
        let from_reach: Vec<usize> = (0..new.transitions.len()).filter(|i| reach.contains(&new.transitions[*i].source)).collect();
        let retarget = from_reach
            .iter()
            .copied()
            .filter(|i| new.states.iter().any(|z| h[z] != h[&new.transitions[*i].target]))
            .collect::<Vec<_>>();
        if r.random_bool(0.5) && !retarget.is_empty() {
            let i = *retarget.choose(r).unwrap();
            let old_img = h[&new.transitions[i].target].clone();
            let others: Vec<String> = new.states.iter().filter(|z| h[*z] != old_img).cloned().collect();
            new.transitions[i].target = pick(r, &others);
            ops.push("retarget");
        } else {
            let s = pick(r, &reach.iter().cloned().collect::<Vec<_>>());
            let mut t = {
                        let sel = pick(r, &["a", "b", "c"]);
                        refine_transition(r, &new.states, sel)
                    };
            t.source = s;
            t.outputs = vec![out("z", vec![], to_env())];
            new.transitions.push(t);
            ops.push("new-transition");
        }
    }
    dedup(&mut new.transitions);
    let mapping: String = h.iter().filter(|(a, b)| a != b).map(|(a, b)| format!("{a} -> {b}\n")).collect();
    RefinementPair { family, new, mapping, ops, legal }
}

impl SdFamily {
    /// Bounded trace inclusion of `concrete` in this family's old diagram.
    pub fn check_against_old(&self, concrete: &StateDiagramBody, rounds: usize) -> RefinementVerdict {
        let (old, new) = state_diagram_models(&self.base_docs(), None, &self.old_doc(), &reparse("new.sd", concrete)).expect("models");
        let stimuli = parse_stimuli(&self.stimuli).expect("stimuli");
        let bounds = TraceBounds { rounds, ..TraceBounds::default() };
        trace_refinement_check(&old, &new, &stimuli, bounds, &Default::default()).expect("bounded")
    }
}

/// `old` with `emit probe() to @env` appended to transition 0.
pub fn probe_mutant(f: &SdFamily) -> StateDiagramBody {
    let mut m = f.old.clone();
    m.transitions[0].outputs.push(out("probe", vec![], to_env()));
    m
}

// ---- sequence diagrams ----

pub const BUNDLE_CD: &str =
    "class A {\n  method p(k: Int): Bool\n  method q(): Bool\n  method r(): Bool\n}\n\nclass B {\n  method u(): Bool\n  method w(k: Int): Bool\n}\n";

fn bundle_event(r: &mut Rand, first: bool) -> SeqEvent {
    let (s, t) = if first { ("env", "a") } else { pick(r, &[("env", "a"), ("b", "a"), ("a", "b"), ("a", "env"), ("a", "a"), ("env", "b"), ("b", "env"), ("a", "env")]) };
    let (sel, args) = match t {
        "a" => match r.random_range(0..3) {
            0 => ("p", vec![Value::Int(r.random_range(0..2))]),
            1 => ("q", vec![]),
            _ => ("r", vec![]),
        },
        "b" => {
            if r.random_bool(0.5) {
                ("u", vec![])
            } else {
                ("w", vec![Value::Int(r.random_range(0..2))])
            }
        }
        _ => {
            if r.random_bool(0.5) {
                ("ok", vec![])
            } else {
                ("val", vec![Value::Int(1)])
            }
        }
    };
    SeqEvent { sender: s.into(), receiver: t.into(), selector: sel.into(), args }
}

/// One to four sequences of one to six events over lifelines `a: A` and
/// `b: B`; each starts with `env -> a`. Later sequences often copy a
/// prefix of an earlier one. With `labels`, some events are followed by a
/// `state a` label.
pub fn sequence_bundle(r: &mut Rand, labels: bool) -> Vec<Document> {
    let mut bodies: Vec<Vec<SeqEvent>> = Vec::new();
    for _ in 0..r.random_range(1..=4) {
        let len = r.random_range(1..=6);
        let mut events: Vec<SeqEvent> = match bodies.choose(r) {
            Some(prev) if r.random_bool(0.6) => prev[..r.random_range(1..=prev.len())].to_vec(),
            _ => vec![bundle_event(r, true)],
        };
        events.truncate(len);
        while events.len() < len {
            events.push(bundle_event(r, false));
        }
        bodies.push(events);
    }
    bodies
        .into_iter()
        .enumerate()
        .map(|(i, events)| {
            let mut steps = Vec::new();
            for e in events {
                steps.push(SeqStep::Event(e));
                if labels && r.random_bool(0.3) {
                    steps.push(SeqStep::Label { role: "a".into(), label: pick(r, &["Idle", "Busy"]).into() });
                }
            }
            let body = SequenceDiagramBody {
                name: format!("Q{i}"),
                lifelines: vec![Lifeline { role: "a".into(), class: "A".into() }, Lifeline { role: "b".into(), class: "B".into() }],
                steps,
            };
            let id = format!("q{i}.qd");
            doc(&id, &serialize(&bare(&id, Body::Sequence(body))))
        })
        .collect()
}

// ---- arbitrary documents ----

const VARS: [&str; 4] = ["x", "y", "n", "k"];

pub fn expr(r: &mut Rand, depth: u32) -> Expr {
    if depth == 0 || r.random_bool(0.3) {
        return match r.random_range(0..9) {
            0 | 1 => Expr::var(pick(r, &VARS)),
            2 => Expr::int(r.random_range(-5..=20)),
            3 => Expr::bool(r.random_bool(0.5)),
            4 => Expr::SelfRef,
            5 => Expr::SenderRef,
            6 => Expr::Lit(Value::Ref(None)),
            7 => Expr::Lit(Value::Ref(Some(ObjectId::new("o1")))),
            _ => Expr::Lit(Value::Str(pick(r, &["", "a b", "q\"t", "\\n"]).into())),
        };
    }
    match r.random_range(0..8) {
        0 => Expr::Unary(UnOp::Not, Box::new(expr(r, depth - 1))),
        1 => Expr::Unary(UnOp::Neg, Box::new(expr(r, depth - 1))),
        _ => {
            let op = pick(
                r,
                &[BinOp::And, BinOp::Or, BinOp::Eq, BinOp::Ne, BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge, BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div],
            );
            Expr::bin(op, expr(r, depth - 1), expr(r, depth - 1))
        }
    }
}

fn value(r: &mut Rand) -> Value {
    match r.random_range(0..5) {
        0 => Value::Int(r.random_range(-100..100)),
        1 => Value::Bool(r.random_bool(0.5)),
        2 => Value::Str(pick(r, &["", "hi", "a\tb"]).into()),
        3 => Value::Ref(None),
        _ => Value::Ref(Some(ObjectId::new(pick(r, &["o1", "o2"])))),
    }
}

fn ty(r: &mut Rand) -> ValueType {
    pick(r, &[ValueType::Int, ValueType::Bool, ValueType::Str, ValueType::Ref])
}

fn subset<'a>(r: &mut Rand, xs: &[&'a str], p: f64) -> Vec<&'a str> {
    xs.iter().copied().filter(|_| r.random_bool(p)).collect()
}

/// A syntactically valid document of `kind` built as a tree, without
/// source text or spans.
pub fn document(r: &mut Rand, kind: DocumentKind) -> Document {
    let id = format!("gen.{}", kind.extension());
    let body = match kind {
        DocumentKind::ClassDiagram => {
            let classes = subset(r, &["Alpha", "Beta", "Gamma", "Delta"], 0.6);
            let mut items = Vec::new();
            for c in &classes {
                let mut members = Vec::new();
                for a in subset(r, &["a", "b", "c"], 0.4) {
                    members.push(Member::Attr(Attribute { name: a.into(), ty: ty(r) }));
                }
                for m in subset(r, &["f", "g"], 0.4) {
                    let params = subset(r, &["p", "q"], 0.5).into_iter().map(|p| Param { name: p.into(), ty: ty(r) }).collect();
                    members.push(Member::Method(Method { name: m.into(), params, result: ty(r) }));
                }
                for _ in 0..r.random_range(0..=2) {
                    members.push(Member::Invariant(expr(r, 3)));
                }
                members.shuffle(r);
                let parent = if r.random_bool(0.4) { Some(ClassName::new(pick(r, &["Alpha", "Beta", "Omega"]))) } else { None };
                items.push(ClassItem::Class(ClassDecl { name: ClassName::new(*c), parent, members }));
            }
            for a in subset(r, &["r1", "r2"], 0.4) {
                items.push(ClassItem::Assoc(Association {
                    name: a.into(),
                    source: ClassName::new(pick(r, &["Alpha", "Beta"])),
                    target: ClassName::new(pick(r, &["Gamma", "Alpha"])),
                }));
            }
            items.shuffle(r);
            Body::Class(ClassDiagramBody { items })
        }
        DocumentKind::StateDiagram => {
            let states: Vec<String> = (0..r.random_range(1..=4)).map(|i| format!("S{i}")).collect();
            let mut initial: Vec<String> = states.iter().filter(|_| r.random_bool(0.4)).cloned().collect();
            if initial.is_empty() {
                initial.push(states[0].clone());
            }
            let transitions = (0..r.random_range(0..=5))
                .map(|_| Transition {
                    source: pick(r, &states),
                    target: pick(r, &states),
                    trigger: Trigger {
                        selector: pick(r, &["go", "stop", "tick"]).into(),
                        params: subset(r, &["k", "j"], 0.4).into_iter().map(String::from).collect(),
                    },
                    guard: r.random_bool(0.5).then(|| expr(r, 2)),
                    actions: subset(r, &["x", "y"], 0.3)
                        .into_iter()
                        .map(|a| Assignment { attribute: a.into(), value: expr(r, 2) })
                        .collect(),
                    outputs: (0..r.random_range(0..=2))
                        .map(|_| OutputTemplate {
                            kind: if r.random_bool(0.2) { MessageKind::Return } else { MessageKind::Call },
                            selector: pick(r, &["ack", "done"]).into(),
                            args: (0..r.random_range(0..=2)).map(|_| expr(r, 1)).collect(),
                            target: pick(r, &[Expr::SenderRef, Expr::SelfRef, Expr::var("peer"), Expr::Lit(Value::Ref(Some(ObjectId::new("o2"))))]),
                        })
                        .collect(),
                })
                .collect();
            Body::State(StateDiagramBody { class: "Gizmo".into(), states, initial, transitions })
        }
        DocumentKind::SequenceDiagram => {
            let mut roles = subset(r, &["a", "b", "c"], 0.6);
            if roles.is_empty() {
                roles.push("a");
            }
            let lifelines: Vec<Lifeline> =
                roles.iter().map(|ro| Lifeline { role: (*ro).into(), class: ClassName::new(pick(r, &["Alpha", "Beta"])) }).collect();
            let mut ends: Vec<&str> = roles.clone();
            ends.push("env");
            let steps = (0..r.random_range(0..=6))
                .map(|_| {
                    if !roles.is_empty() && r.random_bool(0.2) {
                        SeqStep::Label { role: pick(r, &roles).into(), label: pick(r, &["Idle", "Busy"]).into() }
                    } else {
                        SeqStep::Event(SeqEvent {
                            sender: pick(r, &ends).into(),
                            receiver: pick(r, &ends).into(),
                            selector: pick(r, &["go", "ok"]).into(),
                            args: (0..r.random_range(0..=2)).map(|_| value(r)).collect(),
                        })
                    }
                })
                .collect();
            Body::Sequence(SequenceDiagramBody { name: "Scenario".into(), lifelines, steps })
        }
        DocumentKind::ObjectDiagram => {
            let ids = subset(r, &["o1", "o2", "o3"], 0.6);
            let objects: Vec<ObjectDecl> = ids
                .iter()
                .map(|id| ObjectDecl {
                    id: ObjectId::new(*id),
                    class: ClassName::new(pick(r, &["Alpha", "Beta"])),
                    bindings: subset(r, &["a", "b"], 0.4).into_iter().map(|a| (a.to_string(), value(r))).collect(),
                })
                .collect();
            let links = if ids.is_empty() {
                vec![]
            } else {
                (0..r.random_range(0..=2))
                    .map(|_| Link { assoc: "r1".into(), source: ObjectId::new(pick(r, &ids)), target: ObjectId::new(pick(r, &ids)) })
                    .collect()
            };
            let mut owners = ids.clone();
            owners.push("env");
            let creatables = subset(r, &["k1", "k2"], 0.3)
                .into_iter()
                .map(|k| CreatableDecl { id: ObjectId::new(k), class: "Beta".into(), owner: ObjectId::new(pick(r, &owners)) })
                .collect();
            Body::Object(ObjectDiagramBody { objects, links, creatables })
        }
        DocumentKind::Text => {
            let mut s = String::new();
            for _ in 0..r.random_range(0..4) {
                writeln!(s, "{}", pick(r, &["Free text { with } braces.", "", "class Foo is described here", "-> arrows"])).unwrap();
            }
            Body::Text(s)
        }
    };
    bare(&id, body)
}
