//! Hand-built conformance corpus for the three technical steps.

use sysmodel_core::dsl::{parse_with_extension, Document};
use sysmodel_core::refine::{check_seq_against_state, refine_class_diagrams, refine_state_diagram, StateMapping};
use sysmodel_core::semantics::merge_class_diagrams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    ClassToClass,
    StateToState,
    SequenceToState,
}

impl Step {
    pub fn label(self) -> &'static str {
        match self {
            Step::ClassToClass => "cd -> cd",
            Step::StateToState => "sd -> sd",
            Step::SequenceToState => "qd -> sd",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Case {
    pub name: &'static str,
    pub step: Step,
    pub sources: Vec<String>,
    pub target: String,
    pub map: &'static str,
    /// Rule codes of the expected violations; empty means accepted.
    pub expect: Vec<&'static str>,
}

const BANK: &str = "class Base {
}

class Account {
  attr balance: Int
  attr open: Bool
  method deposit(k: Int): Bool
  method close(): Bool
  invariant balance >= 0
}

class Savings extends Account {
  attr rate: Int
  invariant rate >= 0 and rate <= 10
}

class Bank extends Base {
  method find(id: Int): Bool
}

assoc holds: Bank -> Account
";

const DOOR: &str = "statemachine Door {
  states Closed, Open, Locked;
  initial Closed;
  trans Closed -> Open on open()
  trans Open -> Closed on close() / emit closed() to sender
  trans Closed -> Locked on lock(k) if k > 0
  trans Closed -> Locked on lock(k) if k > 0 / emit locked() to sender
  trans Locked -> Closed on unlock(k) if k > 0
}
";

const DOOR_CD: &str = "class Door {
  attr n: Int
  method open(): Bool
  method close(): Bool
  method lock(k: Int): Bool
  method unlock(k: Int): Bool
}

class User {
  method closed(): Bool
  method locked(): Bool
}
";

fn cd(name: &'static str, new: String, expect: Vec<&'static str>) -> Case {
    Case { name, step: Step::ClassToClass, sources: vec![BANK.into()], target: new, map: "", expect }
}

fn sd(name: &'static str, new: String, map: &'static str, expect: Vec<&'static str>) -> Case {
    Case { name, step: Step::StateToState, sources: vec![DOOR.into()], target: new, map, expect }
}

fn qd(name: &'static str, lifelines: &str, events: &str, expect: Vec<&'static str>) -> Case {
    let text = format!("sequence {} {{\n  objects {lifelines};\n{events}}}\n", name.replace('-', "_"));
    Case { name, step: Step::SequenceToState, sources: vec![text], target: DOOR.into(), map: "", expect }
}

fn with(base: &str, from: &str, to: &str) -> String {
    assert!(base.contains(from), "`{from}` not in base");
    base.replacen(from, to, 1)
}

fn class_cases() -> Vec<Case> {
    let b = BANK;
    let mut v = vec![
        cd("cd-identity", b.into(), vec![]),
        cd("cd-new-class", format!("{b}\nclass Loan extends Account {{\n  attr term: Int\n}}\n"), vec![]),
        cd("cd-new-attribute", with(b, "  attr open: Bool\n", "  attr open: Bool\n  attr owner: Int\n"), vec![]),
        cd("cd-new-method", with(b, "  method close(): Bool\n", "  method close(): Bool\n  method audit(): Int\n"), vec![]),
        cd("cd-stronger-invariant", with(b, "invariant balance >= 0", "invariant balance >= 0 and balance <= 1000"), vec![]),
        cd("cd-invariant-on-unconstrained", with(b, "  method find(id: Int): Bool\n", "  attr size: Int\n  method find(id: Int): Bool\n  invariant size > 0\n"), vec![]),
        cd("cd-new-association", format!("{b}assoc backs: Savings -> Bank\n"), vec![]),
        cd(
            "cd-intermediate-superclass",
            with(b, "class Savings extends Account", "class Special extends Account {\n}\n\nclass Savings extends Special"),
            vec![],
        ),
        cd("cd-attribute-pulled-up", with(&with(b, "  attr rate: Int\n", ""), "  attr open: Bool\n", "  attr open: Bool\n  attr rate: Int\n"), vec![]),
        cd("cd-new-superclass", with(b, "class Account {", "class Entity {\n}\n\nclass Account extends Entity {"), vec![]),
        cd("cd-stronger-subclass-invariant", with(b, "rate >= 0 and rate <= 10", "rate >= 1 and rate <= 5"), vec![]),
    ];
    let (first, second) = b.split_at(b.find("class Savings").unwrap());
    v.push(Case {
        name: "cd-integration-of-two",
        step: Step::ClassToClass,
        sources: vec![first.into(), second.into()],
        target: b.into(),
        map: "",
        expect: vec![],
    });
    v.extend([
        cd("cd-class-deleted", with(b, "class Savings extends Account {\n  attr rate: Int\n  invariant rate >= 0 and rate <= 10\n}\n", ""), vec!["R-CD-DELETE"]),
        cd("cd-attribute-deleted", with(b, "  attr open: Bool\n", ""), vec!["R-CD-DELETE"]),
        cd("cd-method-deleted", with(b, "  method close(): Bool\n", ""), vec!["R-CD-DELETE"]),
        cd("cd-attribute-retyped", with(b, "attr open: Bool", "attr open: Int"), vec!["R-CD-RETYPE"]),
        cd("cd-method-retyped", with(b, "deposit(k: Int)", "deposit(k: Bool)"), vec!["R-CD-RETYPE"]),
        cd("cd-inheritance-removed", with(b, "class Bank extends Base", "class Bank"), vec!["R-CD-INHERIT"]),
        cd("cd-weaker-invariant", with(b, "invariant balance >= 0", "invariant balance >= -5"), vec!["R-CD-INVARIANT", "R-CD-INVARIANT"]),
        cd("cd-invariant-dropped", with(b, "  invariant rate >= 0 and rate <= 10\n", ""), vec!["R-CD-INVARIANT"]),
        cd("cd-association-deleted", with(b, "assoc holds: Bank -> Account\n", ""), vec!["R-CD-DELETE"]),
        cd("cd-association-retyped", with(b, "assoc holds: Bank -> Account", "assoc holds: Bank -> Savings"), vec!["R-CD-RETYPE"]),
        cd("cd-unknown-parent", format!("{b}\nclass Loan extends Missing {{\n}}\n"), vec!["R-CD-INVALID"]),
        cd("cd-subclass-retypes-inherited", with(b, "  attr rate: Int\n", "  attr rate: Int\n  attr balance: Bool\n"), vec!["R-CD-INVALID"]),
    ]);
    v
}

fn state_cases() -> Vec<Case> {
    let d = DOOR;
    vec![
        sd("sd-identity", d.into(), "", vec![]),
        sd(
            "sd-state-split",
            with(
                &with(d, "states Closed, Open, Locked;", "states Closed, Open1, Open2, Locked;"),
                "  trans Closed -> Open on open()\n  trans Open -> Closed on close() / emit closed() to sender\n",
                "  trans Closed -> Open1 on open()\n  trans Open1 -> Open2 on open()\n  trans Open1 -> Closed on close() / emit closed() to sender\n  trans Open2 -> Closed on close() / emit closed() to sender\n",
            ),
            "Open1 -> Open\nOpen2 -> Open",
            vec![],
        ),
        sd(
            "sd-unreachable-state",
            with(&with(d, "Locked;", "Locked, Ghost;"), "}\n", "  trans Ghost -> Open on unlock(k) / emit boo() to sender\n}\n"),
            "Ghost -> Locked",
            vec![],
        ),
        sd("sd-drop-duplicate", with(d, "  trans Closed -> Locked on lock(k) if k > 0\n", ""), "", vec![]),
        sd("sd-drop-other-duplicate", with(d, "  trans Closed -> Locked on lock(k) if k > 0 / emit locked() to sender\n", ""), "", vec![]),
        sd("sd-silent-loop", with(d, "}\n", "  trans Locked -> Locked on open()\n}\n"), "", vec![]),
        sd("sd-silent-loop-on-initial", with(d, "}\n", "  trans Closed -> Closed on close()\n}\n"), "", vec![]),
        sd("sd-renamed-state", d.replace("Closed", "Shut"), "Shut -> Closed", vec![]),
        sd(
            "sd-all-renamed",
            d.replace("Closed", "C").replace("Open", "O").replace("Locked", "L"),
            "C -> Closed\nO -> Open\nL -> Locked",
            vec![],
        ),
        sd(
            "sd-reordered",
            "statemachine Door {
  states Locked, Open, Closed;
  initial Closed;
  trans Locked -> Closed on unlock(k) if k > 0
  trans Closed -> Locked on lock(k) if k > 0 / emit locked() to sender
  trans Closed -> Locked on lock(k) if k > 0
  trans Open -> Closed on close() / emit closed() to sender
  trans Closed -> Open on open()
}
"
            .into(),
            "",
            vec![],
        ),
        sd("sd-isolated-extra-state", with(d, "Locked;", "Locked, Spare;"), "Spare -> Open", vec![]),
        sd(
            "sd-locked-split",
            with(
                &with(d, "states Closed, Open, Locked;", "states Closed, Open, L1, L2;"),
                "  trans Closed -> Locked on lock(k) if k > 0\n  trans Closed -> Locked on lock(k) if k > 0 / emit locked() to sender\n  trans Locked -> Closed on unlock(k) if k > 0\n",
                "  trans Closed -> L1 on lock(k) if k > 0\n  trans Closed -> L1 on lock(k) if k > 0 / emit locked() to sender\n  trans L1 -> L2 on open()\n  trans L1 -> Closed on unlock(k) if k > 0\n  trans L2 -> Closed on unlock(k) if k > 0\n",
            ),
            "L1 -> Locked\nL2 -> Locked",
            vec![],
        ),
        sd("sd-other-class", d.replace("statemachine Door", "statemachine Window"), "", vec!["R-SD-CLASS"]),
        sd(
            "sd-state-lost",
            with(
                &with(d, "states Closed, Open, Locked;", "states Closed, Open;"),
                "  trans Closed -> Locked on lock(k) if k > 0\n  trans Closed -> Locked on lock(k) if k > 0 / emit locked() to sender\n  trans Locked -> Closed on unlock(k) if k > 0\n",
                "",
            ),
            "",
            vec!["R-SD-LOST-STATE", "R-SD-DELETE", "R-SD-DELETE"],
        ),
        sd("sd-initial-moved", with(d, "initial Closed;", "initial Open;"), "", vec!["R-SD-INIT"]),
        sd("sd-initial-added", with(d, "initial Closed;", "initial Closed, Open;"), "", vec!["R-SD-INIT"]),
        sd("sd-new-output", with(d, "}\n", "  trans Closed -> Open on open() / emit hello() to sender\n}\n"), "", vec!["R-SD-NEWTRANS"]),
        sd("sd-new-guarded-handler", with(d, "}\n", "  trans Locked -> Locked on unlock(k) if k > 9\n}\n"), "", vec!["R-SD-NEWTRANS"]),
        sd("sd-handler-deleted", with(d, "  trans Locked -> Closed on unlock(k) if k > 0\n", ""), "", vec!["R-SD-DELETE"]),
        sd("sd-guard-changed", with(d, "unlock(k) if k > 0", "unlock(k) if k > 1"), "", vec!["R-SD-NEWTRANS", "R-SD-DELETE"]),
        sd("sd-output-changed", with(d, "emit closed()", "emit shut()"), "", vec!["R-SD-NEWTRANS", "R-SD-DELETE"]),
        sd("sd-retarget", with(d, "trans Open -> Closed on close()", "trans Open -> Locked on close()"), "", vec!["R-SD-RETARGET", "R-SD-DELETE"]),
        sd("sd-retarget-loop", with(d, "trans Locked -> Closed on unlock(k)", "trans Locked -> Open on unlock(k)"), "", vec!["R-SD-RETARGET", "R-SD-DELETE"]),
        sd(
            "sd-split-loses-handler",
            with(
                &with(d, "states Closed, Open, Locked;", "states Closed, Open1, Open2, Locked;"),
                "  trans Closed -> Open on open()\n  trans Open -> Closed on close() / emit closed() to sender\n",
                "  trans Closed -> Open1 on open()\n  trans Open1 -> Open2 on open()\n  trans Open1 -> Closed on close() / emit closed() to sender\n",
            ),
            "Open1 -> Open\nOpen2 -> Open",
            vec!["R-SD-DELETE"],
        ),
    ]
}

fn sequence_cases() -> Vec<Case> {
    let d = "d: Door";
    let du = "d: Door, u: User";
    vec![
        qd("q-open", d, "  env -> d : open()\n", vec![]),
        qd("q-open-close", d, "  env -> d : open()\n  env -> d : close()\n", vec![]),
        qd("q-open-close-open", d, "  env -> d : open()\n  env -> d : close()\n  env -> d : open()\n", vec![]),
        qd("q-lock-unlock", d, "  env -> d : lock(1)\n  env -> d : unlock(2)\n", vec![]),
        qd("q-lock-then-open", d, "  env -> d : lock(3)\n  env -> d : unlock(1)\n  env -> d : open()\n  env -> d : close()\n", vec![]),
        qd("q-with-reply", d, "  env -> d : open()\n  env -> d : close()\n  d -> env : closed()\n", vec![]),
        qd("q-user", du, "  u -> d : open()\n  u -> d : close()\n  d -> u : closed()\n", vec![]),
        qd("q-no-events", d, "", vec![]),
        qd("q-other-traffic", du, "  env -> u : locked()\n  env -> d : lock(5)\n  d -> u : locked()\n", vec![]),
        qd("q-large-argument", d, "  env -> d : lock(500)\n", vec![]),
        qd(
            "q-long",
            d,
            "  env -> d : open()\n  env -> d : close()\n  env -> d : lock(1)\n  env -> d : unlock(1)\n  env -> d : open()\n  env -> d : close()\n",
            vec![],
        ),
        qd("q-self-call", du, "  d -> d : open()\n  u -> d : close()\n", vec![]),
        qd("q-close-first", d, "  env -> d : close()\n", vec!["R-QS-NOPATH"]),
        qd("q-open-twice", d, "  env -> d : open()\n  env -> d : open()\n", vec!["R-QS-NOPATH"]),
        qd("q-guard-false", d, "  env -> d : lock(0)\n", vec!["R-QS-NOPATH"]),
        qd("q-unlock-first", d, "  env -> d : unlock(1)\n", vec!["R-QS-NOPATH"]),
        qd("q-open-while-locked", d, "  env -> d : lock(1)\n  env -> d : open()\n", vec!["R-QS-NOPATH"]),
        qd("q-no-door", "u: User", "  env -> u : closed()\n", vec!["R-QS-NO-LIFELINE"]),
        qd("q-unknown-method", d, "  env -> d : kick()\n", vec!["R-QS-INVALID", "R-QS-NOPATH"]),
        qd("q-argument-type", d, "  env -> d : lock(true)\n", vec!["R-QS-INVALID", "R-QS-NOPATH"]),
        qd("q-arity", d, "  env -> d : lock()\n", vec!["R-QS-INVALID", "R-QS-NOPATH"]),
        qd("q-unknown-class", "d: Door, g: Ghost", "  env -> d : open()\n", vec!["R-QS-INVALID"]),
        qd("q-close-twice", d, "  env -> d : open()\n  env -> d : close()\n  env -> d : close()\n", vec!["R-QS-NOPATH"]),
        qd("q-lock-while-open", d, "  env -> d : open()\n  env -> d : lock(1)\n", vec!["R-QS-NOPATH"]),
    ]
}

pub fn corpus() -> Vec<Case> {
    let mut v = class_cases();
    v.extend(state_cases());
    v.extend(sequence_cases());
    v
}

fn doc(id: &str, text: &str) -> Result<Document, String> {
    parse_with_extension(id, id.rsplit('.').next().unwrap(), text).map_err(|e| format!("{id}: {e}"))
}

/// The rule codes the case produces, sorted.
pub fn outcome(case: &Case) -> Result<Vec<&'static str>, String> {
    let v = match case.step {
        Step::ClassToClass => {
            let olds = case.sources.iter().enumerate().map(|(i, s)| doc(&format!("old{i}.cd"), s)).collect::<Result<Vec<_>, _>>()?;
            let refs: Vec<&Document> = olds.iter().collect();
            refine_class_diagrams(&refs, &doc("new.cd", &case.target)?)
        }
        Step::StateToState => {
            let map = StateMapping::parse(case.map).map_err(|e| e.to_string())?;
            refine_state_diagram(&doc("old.sd", &case.sources[0])?, &doc("new.sd", &case.target)?, &map)
        }
        Step::SequenceToState => {
            let (table, _) = merge_class_diagrams([&doc("door.cd", DOOR_CD)?]);
            check_seq_against_state(&doc("case.qd", &case.sources[0])?, &doc("door.sd", &case.target)?, &table)
        }
    }
    .map_err(|e| e.to_string())?;
    let mut rules = v.rules();
    rules.sort();
    Ok(rules)
}

/// `Ok` when the case yields exactly its expected codes.
pub fn conforms(case: &Case) -> Result<(), String> {
    let got = outcome(case)?;
    let mut want = case.expect.clone();
    want.sort();
    if got == want {
        Ok(())
    } else {
        Err(format!("{}: expected {:?}, got {:?}", case.name, want, got))
    }
}
