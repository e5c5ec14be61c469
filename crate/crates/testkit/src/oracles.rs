//! Brute-force reference implementations. Each one recomputes a result
//! from the data types alone, without calling the algorithm it checks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use sysmodel_core::dsl::{SeqStep, SequenceDiagramBody, StateDiagramBody, Stimulus};
use sysmodel_core::expr::Expr;
use sysmodel_core::model::{Automaton, ClassTable, Message, ObjectState, SystemModel, TimedStream, Transition};
use sysmodel_core::{ClassName, ObjectId, Value, ValueType};

use crate::eval::{eval, holds, Scope};

// ---- class tables ----

/// Strict ancestors per class by fixpoint iteration over `parents`.
pub fn strict_ancestors(t: &ClassTable) -> BTreeMap<ClassName, BTreeSet<ClassName>> {
    let mut reach: BTreeMap<ClassName, BTreeSet<ClassName>> =
        t.classes.keys().map(|c| (c.clone(), t.parents.get(c).into_iter().cloned().collect())).collect();
    loop {
        let mut changed = false;
        for c in t.classes.keys() {
            let extra: BTreeSet<ClassName> = reach[c].iter().filter_map(|d| reach.get(d)).flatten().cloned().collect();
            let r = reach.get_mut(c).unwrap();
            for e in extra {
                changed |= r.insert(e);
            }
        }
        if !changed {
            return reach;
        }
    }
}

type Sigma = (BTreeMap<String, ValueType>, BTreeMap<String, (Vec<ValueType>, ValueType)>);

/// Members visible in `c`, the nearest declaration winning.
fn sigma(t: &ClassTable, c: &ClassName) -> Sigma {
    let mut attrs = BTreeMap::new();
    let mut methods = BTreeMap::new();
    let mut cur = Some(c);
    while let Some(k) = cur {
        let own = &t.classes[k];
        for a in &own.attributes {
            attrs.entry(a.name.clone()).or_insert(a.ty);
        }
        for m in &own.methods {
            methods.entry(m.name.clone()).or_insert((m.params.iter().map(|p| p.ty).collect(), m.result));
        }
        cur = t.parents.get(k);
    }
    (attrs, methods)
}

/// The inheritance law: parents are known, the subclass relation is
/// acyclic, associations name known classes, and for every pair c below d
/// the members of d appear unchanged in c.
pub fn inheritance_law_holds(t: &ClassTable) -> bool {
    if t.parents.values().any(|p| !t.classes.contains_key(p)) {
        return false;
    }
    if t.associations.values().any(|a| !t.classes.contains_key(&a.source) || !t.classes.contains_key(&a.target)) {
        return false;
    }
    let anc = strict_ancestors(t);
    if anc.iter().any(|(c, a)| a.contains(c)) {
        return false;
    }
    for (c, ds) in &anc {
        let (ca, cm) = sigma(t, c);
        for d in ds {
            let (da, dm) = sigma(t, d);
            if da.iter().any(|(n, ty)| ca.get(n) != Some(ty)) || dm.iter().any(|(n, s)| cm.get(n) != Some(s)) {
                return false;
            }
        }
    }
    true
}

// ---- single automata ----

/// Distinct reactions of `a` in `s` to `m`; `None` on a runtime error.
pub fn reactions(a: &Automaton, s: &ObjectState, m: &Message) -> Option<Vec<(ObjectState, Vec<Message>)>> {
    let mut out: Vec<(ObjectState, Vec<Message>)> = Vec::new();
    for t in &a.transitions {
        if t.source != s.control || t.trigger.selector != m.selector || t.trigger.params.len() != m.args.len() {
            continue;
        }
        let params: BTreeMap<String, Value> = t.trigger.params.iter().cloned().zip(m.args.iter().cloned()).collect();
        fn scope<'a>(params: &'a BTreeMap<String, Value>, attrs: &'a BTreeMap<String, Value>, m: &'a Message) -> Scope<'a> {
            Scope { params, attrs, this: Some(&m.receiver), sender: Some(&m.sender) }
        }
        if let Some(g) = &t.guard {
            if !holds(g, &scope(&params, &s.valuation, m))? {
                continue;
            }
        }
        let mut vals = s.valuation.clone();
        for act in &t.actions {
            let v = eval(&act.value, &scope(&params, &vals, m))?;
            *vals.get_mut(&act.attribute)? = v;
        }
        let mut msgs = Vec::new();
        for o in &t.outputs {
            let Value::Ref(Some(to)) = eval(&o.target, &scope(&params, &vals, m))? else { return None };
            let args = o.args.iter().map(|e| eval(e, &scope(&params, &vals, m))).collect::<Option<Vec<_>>>()?;
            msgs.push(Message { sender: m.receiver.clone(), receiver: to, selector: o.selector.clone(), args, kind: o.kind });
        }
        let r = (ObjectState { control: t.target.clone(), valuation: vals }, msgs);
        if !out.contains(&r) {
            out.push(r);
        }
    }
    Some(out)
}

/// Every output stream over `bound` rounds, one input per round, by
/// recursive enumeration of execution trees.
pub fn black_box_oracle(a: &Automaton, init: &ObjectState, inputs: &[Message], bound: usize) -> Option<BTreeSet<TimedStream<Message>>> {
    fn go(
        a: &Automaton,
        s: &ObjectState,
        inputs: &[Message],
        left: usize,
        prefix: &TimedStream<Message>,
        acc: &mut BTreeSet<TimedStream<Message>>,
    ) -> Option<()> {
        if left == 0 {
            acc.insert(prefix.clone());
            return Some(());
        }
        let Some((m, rest)) = inputs.split_first() else {
            let mut p = prefix.clone();
            (0..left).for_each(|_| p.tick());
            acc.insert(p);
            return Some(());
        };
        let rs = reactions(a, s, m)?;
        if rs.is_empty() {
            let mut p = prefix.clone();
            p.tick();
            return go(a, s, rest, left - 1, &p, acc);
        }
        for (next, outs) in rs {
            let mut p = prefix.clone();
            outs.into_iter().for_each(|o| p.push(o));
            p.tick();
            go(a, &next, rest, left - 1, &p, acc)?;
        }
        Some(())
    }
    let mut acc = BTreeSet::new();
    go(a, init, inputs, bound, &TimedStream::new(), &mut acc)?;
    Some(acc)
}

// ---- whole systems ----

#[derive(Clone, Default)]
struct Round {
    ins: Vec<Message>,
    state: Option<ObjectState>,
    outs: Vec<Message>,
}

#[derive(Clone)]
struct Sys {
    live: BTreeMap<ObjectId, ObjectState>,
    /// In-flight messages per receiver, oldest first.
    queue: BTreeMap<ObjectId, Vec<Message>>,
    log: Vec<BTreeMap<ObjectId, Round>>,
}

fn fresh(model: &SystemModel, id: &ObjectId) -> Vec<ObjectState> {
    let class = &model.objects()[id];
    let vals: BTreeMap<String, Value> =
        model.signature(class).unwrap().attributes.iter().map(|a| (a.name.clone(), Value::default_for(a.ty))).collect();
    model.automata()[class]
        .initial_controls
        .iter()
        .map(|c| ObjectState { control: c.clone(), valuation: vals.clone() })
        .collect()
}

fn accepted_by(model: &SystemModel, m: &Message) -> bool {
    let Some(class) = model.objects().get(&m.receiver) else { return false };
    model.signature(class).unwrap().methods.iter().any(|meth| {
        meth.name == m.selector
            && meth.params.len() == m.args.len()
            && meth.params.iter().zip(&m.args).all(|(p, v)| p.ty == v.ty())
    })
}

/// Full canonical texts of every run of `rounds` rounds, by a separate
/// small-step interpreter: each round injects that round's stimuli, then
/// delivers the oldest message of one (receiver, sender) pair, or idles.
/// `None` on a creation violation, invalid output or runtime error.
pub fn system_traces(model: &SystemModel, stimuli: &[Stimulus], rounds: usize) -> Option<BTreeSet<String>> {
    let env = ObjectId::env();
    let mut starts: Vec<BTreeMap<ObjectId, ObjectState>> = vec![BTreeMap::new()];
    for (id, declared) in model.initial_objects() {
        let a = &model.automata()[&model.objects()[id]];
        let mut alts = vec![declared.clone()];
        for c in &a.initial_controls {
            if *c != declared.control {
                alts.push(ObjectState { control: c.clone(), valuation: declared.valuation.clone() });
            }
        }
        starts = starts
            .into_iter()
            .flat_map(|p| {
                alts.iter().map(move |s| {
                    let mut p = p.clone();
                    p.insert(id.clone(), s.clone());
                    p
                })
            })
            .collect();
    }
    let mut out = BTreeSet::new();
    for live in starts {
        let sys = Sys { live, queue: BTreeMap::new(), log: Vec::new() };
        explore(model, stimuli, rounds, sys, &env, &mut out)?;
    }
    Some(out)
}

fn explore(model: &SystemModel, stimuli: &[Stimulus], rounds: usize, mut sys: Sys, env: &ObjectId, out: &mut BTreeSet<String>) -> Option<()> {
    let r = sys.log.len();
    if r == rounds {
        out.insert(render(model, &sys));
        return Some(());
    }
    let mut rec: BTreeMap<ObjectId, Round> = BTreeMap::new();
    for s in stimuli.iter().filter(|s| s.round == r) {
        rec.entry(env.clone()).or_default().outs.push(s.message.clone());
        sys.queue.entry(s.message.receiver.clone()).or_default().push(s.message.clone());
    }
    let mut pairs = BTreeSet::new();
    for (recv, q) in &sys.queue {
        for m in q {
            pairs.insert((recv.clone(), m.sender.clone()));
        }
    }
    if pairs.is_empty() {
        let mut next = sys.clone();
        close(&mut next, rec);
        return explore(model, stimuli, rounds, next, env, out);
    }
    for (recv, from) in pairs {
        let starts = match sys.live.get(&recv) {
            Some(s) => vec![s.clone()],
            None if model.creatables().get(&from).is_some_and(|c| c.contains(&recv)) => fresh(model, &recv),
            None => return None,
        };
        let pos = sys.queue[&recv].iter().position(|m| m.sender == from).unwrap();
        let m = sys.queue[&recv][pos].clone();
        let a = &model.automata()[&model.objects()[&recv]];
        for start in starts {
            let mut rs = reactions(a, &start, &m)?;
            if rs.is_empty() {
                rs.push((start.clone(), Vec::new()));
            }
            for (state, outs) in rs {
                let mut next = sys.clone();
                let mut rec = rec.clone();
                let q = next.queue.get_mut(&recv).unwrap();
                q.remove(pos);
                if q.is_empty() {
                    next.queue.remove(&recv);
                }
                rec.entry(recv.clone()).or_default().ins.push(m.clone());
                next.live.insert(recv.clone(), state);
                for o in outs {
                    rec.entry(recv.clone()).or_default().outs.push(o.clone());
                    if o.receiver.is_env() {
                        rec.entry(env.clone()).or_default().ins.push(o);
                    } else if accepted_by(model, &o) {
                        next.queue.entry(o.receiver.clone()).or_default().push(o);
                    } else {
                        return None;
                    }
                }
                close(&mut next, rec);
                explore(model, stimuli, rounds, next, env, out)?;
            }
        }
    }
    Some(())
}

fn close(sys: &mut Sys, mut rec: BTreeMap<ObjectId, Round>) {
    for (id, s) in &sys.live {
        rec.entry(id.clone()).or_default().state = Some(s.clone());
    }
    sys.log.push(rec);
}

fn render(model: &SystemModel, sys: &Sys) -> String {
    let mut ids: BTreeSet<ObjectId> = model.initial_objects().iter().map(|(id, _)| id.clone()).collect();
    ids.insert(ObjectId::env());
    ids.extend(sys.live.keys().cloned());
    let mut s = String::new();
    let empty = Round::default();
    for (r, rec) in sys.log.iter().enumerate() {
        for id in &ids {
            let x = rec.get(id).unwrap_or(&empty);
            for m in &x.ins {
                writeln!(s, "round={r} obj={id} in={m}").unwrap();
            }
            if let Some(st) = &x.state {
                writeln!(s, "round={r} obj={id} state={st}").unwrap();
            }
            for m in &x.outs {
                writeln!(s, "round={r} obj={id} out={m}").unwrap();
            }
            writeln!(s, "round={r} obj={id} tick").unwrap();
        }
    }
    s
}

// ---- sequence diagrams ----

/// The lifeline's received messages, each with the outputs that follow
/// it, flattened to comparable strings.
pub fn projected_keys(body: &SequenceDiagramBody, role: &str) -> Vec<String> {
    let mut keys: Vec<String> = Vec::new();
    let mut from = String::new();
    for step in &body.steps {
        let SeqStep::Event(e) = step else { continue };
        if e.sender == role && !keys.is_empty() {
            let to = if e.receiver == role {
                "self".to_string()
            } else if e.receiver == from {
                "sender".to_string()
            } else {
                format!("@{}", e.receiver)
            };
            let args: Vec<String> = e.args.iter().map(|a| a.to_string()).collect();
            write!(keys.last_mut().unwrap(), " !{}({})>{to}", e.selector, args.join(",")).unwrap();
        }
        if e.receiver == role {
            keys.push(format!("{}/{}", e.selector, e.args.len()));
            from = e.sender.clone();
        }
    }
    keys
}

/// States of a trie holding every word: distinct prefixes, the empty one
/// included.
pub fn trie_size(words: &[Vec<String>]) -> usize {
    let mut prefixes: BTreeSet<&[String]> = BTreeSet::new();
    for w in words {
        for k in 0..=w.len() {
            prefixes.insert(&w[..k]);
        }
    }
    prefixes.len().max(1)
}

fn decided_by_params(t: &Transition, args: &[Value]) -> bool {
    let params: BTreeMap<String, Value> = t.trigger.params.iter().cloned().zip(args.iter().cloned()).collect();
    let Some(g) = &t.guard else { return true };
    fn context_free(e: &Expr, params: &BTreeMap<String, Value>) -> bool {
        match e {
            Expr::SelfRef | Expr::SenderRef => false,
            Expr::Var(v) => params.contains_key(v),
            Expr::Lit(_) => true,
            Expr::Unary(_, x) => context_free(x, params),
            Expr::Binary(_, l, r) => context_free(l, params) && context_free(r, params),
        }
    }
    if !context_free(g, &params) {
        return true;
    }
    let none = BTreeMap::new();
    holds(g, &Scope { params: &params, attrs: &none, this: None, sender: None }).unwrap_or(false)
}

/// Does the word of (selector, arguments) label a path from an initial
/// state? Depth-first over explicit paths. Guards over parameters are
/// evaluated, other guards count as satisfiable.
pub fn path_exists(sd: &StateDiagramBody, word: &[(String, Vec<Value>)]) -> bool {
    fn dfs(sd: &StateDiagramBody, at: &str, word: &[(String, Vec<Value>)]) -> bool {
        let Some(((sel, args), rest)) = word.split_first() else { return true };
        sd.transitions.iter().any(|t| {
            t.source == at
                && t.trigger.selector == *sel
                && t.trigger.params.len() == args.len()
                && decided_by_params(t, args)
                && dfs(sd, &t.target, rest)
        })
    }
    sd.initial.iter().any(|s| dfs(sd, s, word))
}

// ---- invariants ----

/// `premise` implies `conclusion` on every assignment of `vars` over
/// -32..=32 and both booleans, by nested enumeration.
pub fn implies_brute(premise: &Expr, conclusion: &Expr, vars: &[(String, ValueType)]) -> bool {
    fn go(p: &Expr, c: &Expr, vars: &[(String, ValueType)], acc: &mut BTreeMap<String, Value>) -> bool {
        let Some(((name, ty), rest)) = vars.split_first() else {
            let none = BTreeMap::new();
            let this = ObjectId::new("self");
            let s = Scope { params: &none, attrs: acc, this: Some(&this), sender: None };
            return holds(p, &s) != Some(true) || holds(c, &s) == Some(true);
        };
        let domain: Vec<Value> = match ty {
            ValueType::Int => (-32..=32).map(Value::Int).collect(),
            ValueType::Bool => vec![Value::Bool(false), Value::Bool(true)],
            _ => return true,
        };
        domain.into_iter().all(|v| {
            acc.insert(name.clone(), v);
            let ok = go(p, c, rest, acc);
            acc.remove(name);
            ok
        })
    }
    go(premise, conclusion, vars, &mut BTreeMap::new())
}


// ---- medium ----

/// Runs one seeded execution and checks the medium against a ledger of
/// every message sent: per-pair deliveries form a prefix of the sends,
/// nothing is lost, duplicated, invented or altered, and every object is
/// created at most once and only by an allowed sender.
pub fn medium_laws(model: &SystemModel, stimuli: &[Stimulus], rounds: usize, seed: u64) -> Result<(), String> {
    use sysmodel_core::sim::{init_run, SchedulerPolicy};
    let mut rs = init_run(model, stimuli, SchedulerPolicy::SeededRandom(seed)).map_err(|e| e.to_string())?;
    let mut sent: BTreeMap<(ObjectId, ObjectId), Vec<Message>> = BTreeMap::new();
    let mut delivered: BTreeMap<(ObjectId, ObjectId), usize> = BTreeMap::new();
    let mut created: BTreeSet<ObjectId> = BTreeSet::new();
    for round in 0..rounds {
        for s in stimuli.iter().filter(|s| s.round == round) {
            sent.entry((s.message.receiver.clone(), s.message.sender.clone())).or_default().push(s.message.clone());
        }
        let (next, ev) = rs.step().map_err(|e| e.to_string())?;
        if let Some(m) = &ev.delivered {
            let pair = (m.receiver.clone(), m.sender.clone());
            let k = delivered.entry(pair.clone()).or_default();
            let expected = sent.get(&pair).and_then(|q| q.get(*k));
            if expected != Some(m) {
                return Err(format!("round {round}: delivered {m}, expected {expected:?}"));
            }
            *k += 1;
            if ev.created {
                if model.is_initial(&m.receiver) || !model.may_create(&m.sender, &m.receiver) {
                    return Err(format!("round {round}: illegal creation of {}", m.receiver));
                }
                if !created.insert(m.receiver.clone()) {
                    return Err(format!("round {round}: {} created twice", m.receiver));
                }
            }
            for o in ev.outputs.iter().filter(|o| !o.receiver.is_env()) {
                sent.entry((o.receiver.clone(), o.sender.clone())).or_default().push(o.clone());
            }
        }
        rs = next;
    }
    // what is left in flight is exactly the undelivered suffix
    let mut in_flight = 0;
    for ((r, s), q) in &sent {
        let k = delivered.get(&(r.clone(), s.clone())).copied().unwrap_or(0);
        let left: Vec<&Message> = rs.medium().queue(r).iter().filter(|m| m.sender == *s).collect();
        let expected: Vec<&Message> = q[k..].iter().collect();
        if left != expected {
            return Err(format!("pair ({r}, {s}): in flight {left:?}, expected {expected:?}"));
        }
        in_flight += left.len();
    }
    if in_flight != rs.medium().len() {
        return Err("medium holds messages nobody sent".into());
    }
    Ok(())
}
