use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{target_lifeline, RefineError};
use crate::dsl::{parse, Body, Document, DocumentKind, SeqStep, SequenceDiagramBody, StateDiagramBody};
use crate::expr::Expr;
use crate::ids::{ClassName, ObjectId};
use crate::model::{ClassTable, MessageKind, OutputTemplate, Signature, Transition, Trigger};
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MergeStrategy {
    /// Sequences sharing a prefix share its states.
    #[default]
    TrieByPrefix,
    /// One path per sequence from a common initial state; states carrying
    /// the same `state` label are merged.
    ByExplicitStateLabels,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthesisOptions {
    pub target_class: ClassName,
    pub merge: MergeStrategy,
    /// A trigger repeated back to back becomes a self-loop.
    pub loop_folding: bool,
}

impl SynthesisOptions {
    pub fn new(target_class: impl Into<ClassName>) -> Self {
        SynthesisOptions { target_class: target_class.into(), merge: MergeStrategy::TrieByPrefix, loop_folding: false }
    }
}

/// One received message and what the lifeline sends before the next one.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ProjectedStep {
    pub selector: String,
    pub params: Vec<String>,
    pub outputs: Vec<OutputTemplate>,
}

/// The lifeline's view of a sequence: its received messages with the
/// outputs following each, plus `state` labels keyed by the number of
/// steps before them. Messages sent before the first reception are dropped.
pub fn projection_steps(
    body: &SequenceDiagramBody,
    role: &str,
    sig: Option<&Signature>,
) -> (Vec<ProjectedStep>, Vec<(usize, String)>) {
    let mut steps: Vec<ProjectedStep> = Vec::new();
    let mut labels = Vec::new();
    let mut trigger_sender: Option<&str> = None;
    for step in &body.steps {
        match step {
            SeqStep::Label { role: r, label } if r == role => labels.push((steps.len(), label.clone())),
            SeqStep::Label { .. } => {}
            SeqStep::Event(e) => {
                if e.sender == role {
                    if let (Some(cur), Some(from)) = (steps.last_mut(), trigger_sender) {
                        let target = if e.receiver == role {
                            Expr::SelfRef
                        } else if e.receiver == from {
                            Expr::SenderRef
                        } else {
                            Expr::Lit(Value::Ref(Some(ObjectId::new(e.receiver.as_str()))))
                        };
                        cur.outputs.push(OutputTemplate {
                            kind: MessageKind::Call,
                            selector: e.selector.clone(),
                            args: e.args.iter().cloned().map(Expr::Lit).collect(),
                            target,
                        });
                    }
                }
                if e.receiver == role {
                    let params = match sig.and_then(|s| s.method(&e.selector)) {
                        Some(m) if m.params.len() == e.args.len() => m.params.iter().map(|p| p.name.clone()).collect(),
                        _ => (0..e.args.len()).map(|k| format!("p{k}")).collect(),
                    };
                    steps.push(ProjectedStep { selector: e.selector.clone(), params, outputs: Vec::new() });
                    trigger_sender = Some(e.sender.as_str());
                }
            }
        }
    }
    (steps, labels)
}

struct Graph {
    /// Union-find parent per node.
    parent: Vec<usize>,
    label: Vec<Option<String>>,
    edges: Vec<(usize, usize, ProjectedStep)>,
    children: BTreeMap<(usize, ProjectedStep), usize>,
}

impl Graph {
    fn new() -> Self {
        Graph { parent: alloc::vec![0], label: alloc::vec![None], edges: Vec::new(), children: BTreeMap::new() }
    }

    fn fresh(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.label.push(None);
        self.parent.len() - 1
    }

    fn find(&mut self, mut n: usize) -> usize {
        while self.parent[n] != n {
            self.parent[n] = self.parent[self.parent[n]];
            n = self.parent[n];
        }
        n
    }

    fn set_label(&mut self, n: usize, l: &str) -> Result<(), RefineError> {
        match &self.label[n] {
            Some(old) if old != l => Err(RefineError::LabelConflict(format!("one state labelled both `{old}` and `{l}`"))),
            _ => {
                self.label[n] = Some(l.to_string());
                Ok(())
            }
        }
    }

    /// Adds one word. `share` reuses existing children (trie insertion).
    fn add_path(&mut self, steps: &[ProjectedStep], share: bool, fold: bool) -> Vec<usize> {
        let mut at = 0;
        let mut positions = alloc::vec![0];
        for (k, s) in steps.iter().enumerate() {
            let next = if fold && k > 0 && steps[k - 1] == *s {
                at
            } else if let Some(&c) = self.children.get(&(at, s.clone())).filter(|_| share) {
                c
            } else {
                self.fresh()
            };
            if !self.children.contains_key(&(at, s.clone())) || !share {
                self.children.insert((at, s.clone()), next);
                self.edges.push((at, next, s.clone()));
            }
            at = next;
            positions.push(at);
        }
        positions
    }
}

fn is_generated_name(l: &str) -> bool {
    l.len() > 1 && l.starts_with('s') && l[1..].bytes().all(|b| b.is_ascii_digit())
}

/// Builds a state diagram for `opts.target_class` whose trigger paths
/// include every projection. No guards or actions are generated.
pub fn synthesize_state_diagram(seqs: &[&Document], opts: &SynthesisOptions, t: &ClassTable) -> Result<Document, RefineError> {
    let sig = t.effective_signature(&opts.target_class).ok();
    let mut words = Vec::new();
    for qd in seqs {
        let body = qd
            .as_sequence()
            .ok_or_else(|| RefineError::WrongKind { expected: "sequence diagram", found: qd.id.clone() })?;
        let lifeline = target_lifeline(qd, &opts.target_class)?
            .ok_or_else(|| RefineError::MissingLifeline { doc: qd.id.clone(), class: opts.target_class.clone() })?;
        words.push(projection_steps(body, &lifeline.role, sig.as_ref()));
    }
    if words.iter().all(|(w, _)| w.is_empty()) {
        return Err(RefineError::ProjectionEmpty(opts.target_class.clone()));
    }
    let mut g = Graph::new();
    let share = opts.merge == MergeStrategy::TrieByPrefix;
    for (w, labels) in &words {
        let positions = g.add_path(w, share, opts.loop_folding);
        if !share {
            for (k, l) in labels {
                if is_generated_name(l) {
                    return Err(RefineError::LabelConflict(format!("label `{l}` clashes with generated state names")));
                }
                g.set_label(positions[*k], l)?;
            }
        }
    }
    if !share {
        let mut by_label: BTreeMap<String, usize> = BTreeMap::new();
        for n in 0..g.parent.len() {
            if let Some(l) = g.label[n].clone() {
                match by_label.get(&l) {
                    Some(&first) => {
                        let (a, b) = (g.find(first), g.find(n));
                        g.parent[b] = a;
                    }
                    None => {
                        by_label.insert(l, n);
                    }
                }
            }
        }
    }
    let mut names: BTreeMap<usize, String> = BTreeMap::new();
    let mut states = Vec::new();
    for n in 0..g.parent.len() {
        let r = g.find(n);
        if !names.contains_key(&r) {
            let name = g.label[r].clone().unwrap_or_else(|| format!("s{}", names.len()));
            names.insert(r, name.clone());
            states.push(name);
        }
    }
    let mut transitions: Vec<Transition> = Vec::new();
    for (a, b, s) in g.edges.clone() {
        let tr = Transition {
            source: names[&g.find(a)].clone(),
            target: names[&g.find(b)].clone(),
            trigger: Trigger { selector: s.selector, params: s.params },
            guard: None,
            actions: Vec::new(),
            outputs: s.outputs,
        };
        if !transitions.contains(&tr) {
            transitions.push(tr);
        }
    }
    let body = StateDiagramBody { class: opts.target_class.clone(), initial: alloc::vec![names[&g.find(0)].clone()], states, transitions };
    let id = format!("{}.sd", opts.target_class);
    let draft = Document { id: id.clone(), body: Body::State(body), source: String::new(), spans: BTreeMap::new() };
    let text = crate::dsl::serialize(&draft);
    Ok(parse(&id, DocumentKind::StateDiagram, &text).expect("synthesized diagram reparses"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_with_extension;
    use crate::refine::check_seq_against_state;
    use crate::semantics::merge_class_diagrams;

    const CD: &str = "class A { method open(k: Int): Bool method read(): Bool method close(): Bool }";

    fn qd(id: &str, text: &str) -> Document {
        parse_with_extension(id, "qd", text).unwrap()
    }

    fn table() -> ClassTable {
        merge_class_diagrams([&parse_with_extension("a.cd", "cd", CD).unwrap()]).0
    }

    fn synth(docs: &[&Document], merge: MergeStrategy, fold: bool) -> Result<Document, RefineError> {
        let opts = SynthesisOptions { target_class: "A".into(), merge, loop_folding: fold };
        synthesize_state_diagram(docs, &opts, &table())
    }

    #[test]
    fn linear_path() {
        let q = qd("a.qd", "sequence x { objects a: A; env -> a : open(1) a -> env : ok() env -> a : close() }");
        let sd = synth(&[&q], MergeStrategy::TrieByPrefix, false).unwrap();
        let b = sd.as_state().unwrap();
        assert_eq!(b.states, ["s0", "s1", "s2"]);
        assert_eq!(b.transitions[0].trigger.params, ["k"]);
        assert_eq!(b.transitions[0].outputs[0].target, Expr::SenderRef);
        assert!(check_seq_against_state(&q, &sd, &table()).unwrap().accepted);
    }

    #[test]
    fn shared_prefix_branches() {
        let q1 = qd("1.qd", "sequence x { objects a: A; env -> a : open(1) env -> a : read() }");
        let q2 = qd("2.qd", "sequence y { objects a: A; env -> a : open(1) env -> a : close() }");
        let sd = synth(&[&q1, &q2], MergeStrategy::TrieByPrefix, false).unwrap();
        assert_eq!(sd.as_state().unwrap().states.len(), 4);
        let sd = synth(&[&q1, &q2], MergeStrategy::ByExplicitStateLabels, false).unwrap();
        assert_eq!(sd.as_state().unwrap().states.len(), 5);
    }

    #[test]
    fn labels_merge_states() {
        let q1 = qd("1.qd", "sequence x { objects a: A; env -> a : open(1) state a : Open env -> a : read() state a : Open }");
        let q2 = qd("2.qd", "sequence y { objects a: A; env -> a : open(2) state a : Open env -> a : close() }");
        let sd = synth(&[&q1, &q2], MergeStrategy::ByExplicitStateLabels, false).unwrap();
        let b = sd.as_state().unwrap();
        assert_eq!(b.states, ["s0", "Open", "s2"]);
        for q in [&q1, &q2] {
            assert!(check_seq_against_state(q, &sd, &table()).unwrap().accepted);
        }
        let bad = qd("3.qd", "sequence z { objects a: A; state a : X state a : Y env -> a : read() }");
        assert!(matches!(synth(&[&bad], MergeStrategy::ByExplicitStateLabels, false), Err(RefineError::LabelConflict(_))));
        let clash = qd("4.qd", "sequence z { objects a: A; env -> a : read() state a : s1 }");
        assert!(matches!(synth(&[&clash], MergeStrategy::ByExplicitStateLabels, false), Err(RefineError::LabelConflict(_))));
    }

    #[test]
    fn loop_folding() {
        let q = qd("1.qd", "sequence x { objects a: A; env -> a : read() env -> a : read() env -> a : read() env -> a : close() }");
        let sd = synth(&[&q], MergeStrategy::TrieByPrefix, true).unwrap();
        assert_eq!(sd.as_state().unwrap().states.len(), 3);
        assert!(check_seq_against_state(&q, &sd, &table()).unwrap().accepted);
    }

    #[test]
    fn self_messages_and_errors() {
        let q = qd("1.qd", "sequence x { objects a: A, b: A; env -> a : read() a -> a : close() a -> b : read() }");
        let (steps, _) = projection_steps(q.as_sequence().unwrap(), "a", None);
        assert_eq!(steps.len(), 2);
        assert_eq!(steps[0].outputs[0].target, Expr::SelfRef);
        assert_eq!(steps[1].outputs[0].target, Expr::Lit(Value::Ref(Some(ObjectId::new("b")))));
        let quiet = qd("2.qd", "sequence x { objects a: A; a -> env : read() }");
        assert!(matches!(synth(&[&quiet], MergeStrategy::TrieByPrefix, false), Err(RefineError::ProjectionEmpty(_))));
        let none = qd("3.qd", "sequence x { objects b: B; }");
        assert!(matches!(synth(&[&none], MergeStrategy::TrieByPrefix, false), Err(RefineError::MissingLifeline { .. })));
    }
}
