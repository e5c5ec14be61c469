use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::dsl::{parse_stimuli, parse_with_extension, Document};
use crate::semantics::{elaborate, ElaborateOptions};
use crate::value::Value;

fn model(files: &[(&str, &str)]) -> SystemModel {
    let docs: Vec<Document> = files
        .iter()
        .map(|(id, text)| parse_with_extension(id, id.rsplit('.').next().unwrap(), text).unwrap())
        .collect();
    elaborate(&docs, &[], ElaborateOptions::default()).unwrap()
}

const PING_CD: &str = "class P { attr n: Int method ping(k: Int): Bool method pong(k: Int): Bool }";
const PING_SD: &str = "statemachine P {
  states S;
  initial S;
  trans S -> S on ping(k) if k < 3 / n = n + 1, emit pong(k + 1) to @b
  trans S -> S on pong(k) / n = n + 1, emit ping(k) to @a
}";

fn ping_model() -> SystemModel {
    model(&[("p.cd", PING_CD), ("p.sd", PING_SD), ("p.od", "objects { a: P b: P }")])
}

fn text(m: &SystemModel, t: &RunTrace) -> String {
    render(m, t, &Projection::Full)
}

#[test]
fn quiescent_run_is_ticks_only() {
    let m = ping_model();
    let traces = run(&m, &[], 2, SchedulerPolicy::RoundRobin).unwrap();
    let t = &traces[0];
    assert_eq!(
        text(&m, t),
        "round=0 obj=a state=S,{n=0}\nround=0 obj=a tick\nround=0 obj=b state=S,{n=0}\nround=0 obj=b tick\nround=0 obj=env tick\n\
round=1 obj=a state=S,{n=0}\nround=1 obj=a tick\nround=1 obj=b state=S,{n=0}\nround=1 obj=b tick\nround=1 obj=env tick\n"
    );
    assert!(t.input.values().all(|s| s.ticks() == 2));
}

#[test]
fn ping_pong_round_robin() {
    let m = ping_model();
    let stimuli = parse_stimuli("round 0: env -> a . ping(0)").unwrap();
    let t = &run(&m, &stimuli, 6, SchedulerPolicy::RoundRobin).unwrap()[0];
    let a_in: Vec<String> = t.input[&ObjectId::new("a")].payload().map(|m| alloc::format!("{m}")).collect();
    assert_eq!(a_in, ["env->a.ping(0)", "b->a.ping(1)", "b->a.ping(2)"]);
    let last = t.state[&ObjectId::new("b")].payload().last().unwrap().clone();
    assert_eq!(last.valuation["n"], Value::Int(3));
    // round 5 delivers ping(3) to a, whose guard fails: stutter
    let b_out = t.output[&ObjectId::new("b")].payload().count();
    assert_eq!(b_out, 3);
}

#[test]
fn seeded_runs_reproduce() {
    let m = ping_model();
    let stimuli = parse_stimuli("round 0: env -> a . ping(0)\nround 0: env -> b . ping(1)").unwrap();
    let r1 = run(&m, &stimuli, 8, SchedulerPolicy::SeededRandom(7)).unwrap();
    let r2 = run(&m, &stimuli, 8, SchedulerPolicy::SeededRandom(7)).unwrap();
    assert_eq!(text(&m, &r1[0]), text(&m, &r2[0]));
}

#[test]
fn creation_on_delivery() {
    let m = model(&[
        ("c.cd", "class F { method make(): Bool method hello(): Bool }"),
        ("c.sd", "statemachine F { states S, T; initial S; trans S -> T on make() / emit hello() to @kid }"),
        ("c.od", "objects { boss: F creatable kid: F by boss creatable late: F by env }"),
    ]);
    let stimuli = parse_stimuli("round 1: env -> boss . make()\nround 1: env -> late . hello()").unwrap();
    let t = &run(&m, &stimuli, 4, SchedulerPolicy::RoundRobin).unwrap()[0];
    let kid = ObjectId::new("kid");
    assert_eq!(t.input[&kid].ticks(), 4);
    assert_eq!(t.state[&kid].payload().next().unwrap().control, "S");
    assert!(t.state.contains_key(&ObjectId::new("late")));
    // creation by an object that does not own the id
    let bad = parse_stimuli("round 0: env -> kid . hello()").unwrap();
    assert!(matches!(run(&m, &bad, 2, SchedulerPolicy::RoundRobin), Err(SimError::InvalidStimulus { .. })));
}

#[test]
fn creation_violation_detected() {
    let m = model(&[
        ("c.cd", "class F { method go(): Bool method hello(): Bool }"),
        ("c.sd", "statemachine F { states S; initial S; trans S -> S on go() / emit hello() to @kid }"),
        ("c.od", "objects { a: F b: F creatable kid: F by b }"),
    ]);
    let stimuli = parse_stimuli("round 0: env -> a . go()").unwrap();
    let err = run(&m, &stimuli, 3, SchedulerPolicy::RoundRobin).unwrap_err();
    assert_eq!(err, SimError::CreationViolation { sender: "a".into(), receiver: "kid".into() });
}

#[test]
fn one_binary_choice_gives_two_runs() {
    let m = model(&[
        ("c.cd", "class C { attr x: Int method go(): Bool }"),
        ("c.sd", "statemachine C { states S; initial S; trans S -> S on go() / x = 1 trans S -> S on go() / x = 2 }"),
        ("c.od", "objects { c: C }"),
    ]);
    let stimuli = parse_stimuli("round 0: env -> c . go()").unwrap();
    let set = enumerate_runs(&m, &stimuli, 3, 1000).unwrap();
    assert_eq!(set.len(), 2);
    assert!(!set.truncated);
    let det = enumerate_runs(&ping_model(), &stimuli_for_a(), 3, 1000).unwrap();
    assert_eq!(det.len(), 1);
    let tiny = enumerate_runs(&m, &stimuli, 3, 1).unwrap();
    assert!(tiny.truncated);
    assert_eq!(run(&m, &stimuli, 3, SchedulerPolicy::ExhaustiveEnumeration(1)), Err(SimError::ExplosionLimit { cap: 1 }));
}

fn stimuli_for_a() -> Vec<Stimulus> {
    parse_stimuli("round 0: env -> a . ping(0)").unwrap()
}

#[test]
fn independent_deliveries_commute() {
    let m = ping_model();
    let stimuli = parse_stimuli("round 0: env -> a . pong(9)\nround 0: env -> b . ping(5)").unwrap();
    let mut s0 = init_run(&m, &stimuli, SchedulerPolicy::RoundRobin).unwrap();
    let pairs = s0.pairs();
    assert_eq!(pairs.len(), 2);
    let ab = s0.deliver(&pairs[0], 0, 0).unwrap().0;
    let ab = {
        let mut s = ab;
        let p = s.pairs().into_iter().find(|p| p.0.as_str() == "b" && p.1.is_env()).unwrap();
        s.deliver(&p, 0, 0).unwrap().0
    };
    let ba = s0.deliver(&pairs[1], 0, 0).unwrap().0;
    let ba = {
        let mut s = ba;
        let p = s.pairs().into_iter().find(|p| p.0.as_str() == "a" && p.1.is_env()).unwrap();
        s.deliver(&p, 0, 0).unwrap().0
    };
    assert_eq!(ab.live(), ba.live());
}

#[test]
fn outputs_to_env_are_recorded_immediately() {
    let m = model(&[
        ("c.cd", "class C { method go(): Bool }"),
        ("c.sd", "statemachine C { states S; initial S; trans S -> S on go() / emit done(1) to sender }"),
        ("c.od", "objects { c: C }"),
    ]);
    let stimuli = parse_stimuli("round 0: env -> c . go()").unwrap();
    let t = &run(&m, &stimuli, 1, SchedulerPolicy::RoundRobin).unwrap()[0];
    let env_in: Vec<&Message> = t.input[&ObjectId::env()].payload().collect();
    assert_eq!(env_in, vec![&Message::call("c", "env", "done", vec![Value::Int(1)])]);
}
