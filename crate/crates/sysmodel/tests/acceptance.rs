//! Acceptance suite: one PASS/FAIL line per criterion.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use sysmodel::docgraph::DocGraph;
use sysmodel_core::dsl::{parse, parse_stimuli, serialize, Document, DocumentKind};
use sysmodel_core::refine::{check_seq_against_state, synthesize_state_diagram, trigger_word, MergeStrategy, SynthesisOptions};
use sysmodel_core::{black_box, check_class_table};
use sysmodel_testkit::gen::{
    black_box_case, class_table, doc, document, probe_mutant, refinement_pair, sd_family, sequence_bundle, toy_model, BUNDLE_CD,
};
use sysmodel_testkit::oracles::{
    black_box_oracle, inheritance_law_holds, medium_laws, path_exists, projected_keys, system_traces, trie_size,
};
use sysmodel_testkit::rng;

#[path = "support/graphs.rs"]
mod graphs;
#[path = "support/conformance.rs"]
mod conformance;

/// Summary on success plus lines shown under the verdict.
struct Pass {
    summary: String,
    lines: Vec<String>,
}

fn pass(summary: impl Into<String>) -> Result<Pass, String> {
    Ok(Pass { summary: summary.into(), lines: Vec::new() })
}

fn criterion(n: u32, name: &str, limit: Duration, f: impl FnOnce() -> Result<Pass, String>) -> bool {
    let start = Instant::now();
    let result = f();
    let took = start.elapsed();
    let late = took > limit;
    let (ok, summary, lines) = match result {
        Ok(p) if !late => (true, p.summary, p.lines),
        Ok(p) => (false, format!("{} but over time", p.summary), p.lines),
        Err(e) => (false, e, Vec::new()),
    };
    println!(
        "{} [{n}] {name}: {summary} ({:.2} s, limit {} s)",
        if ok { "PASS" } else { "FAIL" },
        took.as_secs_f64(),
        limit.as_secs()
    );
    for l in lines {
        println!("    {l}");
    }
    ok
}

fn inheritance_law() -> Result<Pass, String> {
    let mut clean = 0;
    for seed in 0..200u64 {
        let t = class_table(&mut rng(seed), 10);
        let report = check_class_table(&t);
        if report.is_empty() != inheritance_law_holds(&t) {
            return Err(format!("seed {seed}: checker {:?} disagrees with pair enumeration", report.codes()));
        }
        clean += usize::from(report.is_empty());
    }
    pass(format!("200 tables agree ({clean} lawful, {} not)", 200 - clean))
}

fn medium() -> Result<Pass, String> {
    for seed in 0..500u64 {
        let rounds = 1 + (seed % 12) as usize;
        let toy = toy_model(&mut rng(seed), rounds);
        let stimuli = parse_stimuli(&toy.stimuli).map_err(|e| e.to_string())?;
        medium_laws(&toy.model(), &stimuli, rounds, seed).map_err(|e| format!("seed {seed}: {e}"))?;
    }
    pass("500 runs keep per-pair FIFO order, lose and invent nothing, create at most once")
}

fn black_box_equivalence() -> Result<Pass, String> {
    let mut multi = 0;
    for seed in 0..100u64 {
        let case = black_box_case(&mut rng(seed));
        let got = black_box(&case.automaton, &case.init, &case.inputs, case.bound, 1_000_000).ok();
        let want = black_box_oracle(&case.automaton, &case.init, &case.inputs, case.bound);
        if got != want {
            return Err(format!("seed {seed}: sets differ\n{}", case.text));
        }
        multi += usize::from(want.is_some_and(|s| s.len() > 1));
    }
    pass(format!("100 automata match the path oracle ({multi} with several output streams)"))
}

const SEMANTIC: [&str; 2] = ["R-SD-RETARGET", "R-SD-NEWTRANS"];

fn soundness_link() -> Result<Pass, String> {
    let (mut accepted, mut rejected, mut witnessed) = (0, 0, 0);
    let mut seed = 0u64;
    while accepted < 100 || rejected < 100 {
        let legal = seed % 2 == 0;
        let pair = refinement_pair(&mut rng(seed), legal);
        let v = pair.syntactic();
        if v.accepted && accepted < 100 {
            accepted += 1;
            for rounds in 2..=6 {
                let t = pair.semantic(rounds);
                if !t.accepted {
                    return Err(format!("seed {seed}: accepted step breaks trace inclusion at {rounds} rounds\n{t}"));
                }
            }
        } else if !v.accepted && rejected < 100 && v.rules().iter().any(|r| SEMANTIC.contains(r)) {
            rejected += 1;
            let w = (2..=6).map(|b| pair.semantic(b)).find(|t| !t.accepted);
            if let Some(t) = w {
                if t.witness.is_none() {
                    return Err(format!("seed {seed}: rejection without witness"));
                }
                witnessed += 1;
            }
        }
        seed += 1;
    }
    pass(format!(
        "100 accepted pairs include traces at bounds 2..6; of 100 semantic rejections {witnessed} have a witness, {} are syntactic-only",
        100 - witnessed
    ))
}

fn set_inclusion() -> Result<Pass, String> {
    let mut lines = Vec::new();
    for seed in 0..50u64 {
        let f = sd_family(&mut rng(seed), true);
        let same = f.check_against_old(&f.old, 3);
        if !same.accepted {
            return Err(format!("seed {seed}: not reflexive\n{same}"));
        }
    }
    for seed in 0..50u64 {
        let f = sd_family(&mut rng(1000 + seed), true);
        let v = f.check_against_old(&probe_mutant(&f), 3);
        match v.witness {
            Some(w) if !v.accepted && w.contains("probe()") => {
                let shown: Vec<&str> = w.lines().collect();
                lines.push(format!("mutant {seed}: {}", shown.join(" | ")));
            }
            _ => return Err(format!("mutant {seed} not rejected with a probe witness\n{v}")),
        }
    }
    Ok(Pass { summary: "reflexive on 50 models, 50 mutants rejected with witnesses".into(), lines })
}

fn synthesis() -> Result<Pass, String> {
    let table = doc("ab.cd", BUNDLE_CD).as_class().unwrap().class_table();
    let mut inputs = 0;
    for seed in 0..100u64 {
        let bundle = sequence_bundle(&mut rng(seed), false);
        let refs: Vec<&Document> = bundle.iter().collect();
        let mut opts = SynthesisOptions::new("A");
        opts.merge = MergeStrategy::TrieByPrefix;
        let sd = synthesize_state_diagram(&refs, &opts, &table).map_err(|e| format!("seed {seed}: {e}"))?;
        let body = sd.as_state().unwrap();
        for qd in &bundle {
            inputs += 1;
            let v = check_seq_against_state(qd, &sd, &table).map_err(|e| e.to_string())?;
            let word: Vec<_> =
                trigger_word(qd.as_sequence().unwrap(), "a").into_iter().map(|(_, e)| (e.selector.clone(), e.args.clone())).collect();
            if !v.accepted || !path_exists(body, &word) {
                return Err(format!("seed {seed}: {} not covered\n{v}", qd.id));
            }
        }
        let words: Vec<Vec<String>> = bundle.iter().map(|d| projected_keys(d.as_sequence().unwrap(), "a")).collect();
        if body.states.len() != trie_size(&words) {
            return Err(format!("seed {seed}: {} states, trie has {}", body.states.len(), trie_size(&words)));
        }
    }
    pass(format!("100 bundles, {inputs} inputs covered, state counts equal trie sizes"))
}

const KINDS: [DocumentKind; 5] = [
    DocumentKind::ClassDiagram,
    DocumentKind::StateDiagram,
    DocumentKind::SequenceDiagram,
    DocumentKind::ObjectDiagram,
    DocumentKind::Text,
];

fn round_trips() -> Result<Pass, String> {
    for seed in 0..500u64 {
        let d = document(&mut rng(seed), KINDS[(seed % 5) as usize]);
        let text = serialize(&d);
        let back = parse(&d.id, d.kind(), &text).map_err(|e| format!("seed {seed}: {e}\n{text}"))?;
        if back.body != d.body || serialize(&back) != text {
            return Err(format!("seed {seed}: structure changed\n{text}"));
        }
    }
    let mut nodes = 0;
    for seed in 0..100u64 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let g = graphs::random_graph(&mut rng(seed), dir.path(), 10);
        g.save().map_err(|e| e.to_string())?;
        let back = DocGraph::load(dir.path()).map_err(|e| e.to_string())?;
        if back != g || back.to_manifest() != g.to_manifest() {
            return Err(format!("graph seed {seed}: load differs from save"));
        }
        nodes += g.nodes().len();
    }
    pass(format!("500 documents and 100 graphs ({nodes} nodes) round-trip"))
}

const SHOP_CD: &str = "class Shop {\n  attr stock: Int\n  method order(n: Int): Bool\n  method refill(): Bool\n}\n";
const SHOP_OD: &str = "objects {\n  s: Shop { stock = 1 }\n}\n";
const SHOP_SD: &str = "statemachine Shop {\n  states Open, Empty;\n  initial Open;\n  trans Open -> Open on order(n) if n <= stock / stock = stock - n, emit ok() to sender\n  trans Open -> Empty on order(n) if n > stock / emit sorry() to sender\n  trans Empty -> Open on refill() / stock = 5\n}\n";
const SHOP_STIM: &str = "round 0: env -> s . order(1)\nround 1: env -> s . order(3)\nround 2: env -> s . refill()\n";

fn cli(ws: &Path, args: &[String]) -> (i32, String) {
    let mut argv = vec!["sysmodel".to_string(), "--workspace".into(), ws.display().to_string()];
    argv.extend(args.iter().cloned());
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = sysmodel::cli::run(argv, &mut out, &mut err);
    out.extend(err);
    (code, String::from_utf8(out).expect("utf8"))
}

/// Run texts of a text-format simulation listing.
fn listed_runs(out: &str) -> BTreeSet<String> {
    let mut runs = Vec::new();
    let mut cur = String::new();
    for line in out.lines().skip(1) {
        if line.starts_with("## run ") {
            if !cur.is_empty() {
                runs.push(std::mem::take(&mut cur));
            }
        } else {
            cur.push_str(line);
            cur.push('\n');
        }
    }
    runs.push(cur);
    runs.into_iter().collect()
}

fn reproducibility() -> Result<Pass, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for (name, text) in [("shop.cd", SHOP_CD), ("shop.od", SHOP_OD), ("shop.sd", SHOP_SD), ("run.stim", SHOP_STIM)] {
        fs::write(dir.path().join(name), text).map_err(|e| e.to_string())?;
    }
    let args: Vec<String> = ["--seed", "7", "--rounds", "6", "simulate", "shop.cd", "shop.od", "shop.sd", "--stimuli", "run.stim"]
        .map(String::from)
        .into();
    let outputs: Vec<(i32, String)> = (0..3).map(|_| cli(dir.path(), &args)).collect();
    if outputs[0].0 != 0 || outputs.iter().any(|o| *o != outputs[0]) {
        return Err(format!("seeded simulation output varies or fails:\n{}", outputs[0].1));
    }
    let (mut compared, mut refused) = (0, 0);
    for seed in 0..20u64 {
        let rounds = 1 + (seed % 4) as usize;
        let toy = toy_model(&mut rng(seed), rounds);
        let ws = tempfile::tempdir().map_err(|e| e.to_string())?;
        let mut args: Vec<String> =
            ["--rounds", &rounds.to_string(), "simulate", "--exhaustive", "--stimuli", "s.stim"].map(String::from).into();
        for (id, text) in &toy.docs {
            fs::write(ws.path().join(id), text).map_err(|e| e.to_string())?;
            args.push(id.clone());
        }
        fs::write(ws.path().join("s.stim"), &toy.stimuli).map_err(|e| e.to_string())?;
        let (code, out) = cli(ws.path(), &args);
        let oracle = system_traces(&toy.model(), &parse_stimuli(&toy.stimuli).map_err(|e| e.to_string())?, rounds);
        match oracle {
            Some(set) => {
                let header_ok = out.lines().next().is_some_and(|h| h.ends_with(&format!("runs={}", set.len())));
                if code != 0 || !header_ok || listed_runs(&out) != set {
                    return Err(format!("toy {seed}: enumeration differs from the oracle ({} runs)\n{out}", set.len()));
                }
                compared += 1;
            }
            None if code == 2 => refused += 1,
            None => return Err(format!("toy {seed}: oracle finds no valid run but the simulator exits {code}")),
        }
    }
    pass(format!("3 identical seeded outputs; {compared} toy models enumerate the oracle's run set, {refused} refused by both"))
}

fn conformance() -> Result<Pass, String> {
    let corpus = conformance::corpus();
    let mut lines = Vec::new();
    for step in [conformance::Step::ClassToClass, conformance::Step::StateToState, conformance::Step::SequenceToState] {
        let cases: Vec<&conformance::Case> = corpus.iter().filter(|c| c.step == step).collect();
        let accept = cases.iter().filter(|c| c.expect.is_empty()).count();
        if accept != 12 || cases.len() != 24 {
            return Err(format!("{}: corpus has {accept} accept cases of {}", step.label(), cases.len()));
        }
        for c in &cases {
            conformance::conforms(c)?;
        }
        let codes: BTreeSet<&str> = cases.iter().flat_map(|c| c.expect.iter().copied()).collect();
        lines.push(format!("{}: 12 accepted, 12 rejected with {}", step.label(), codes.into_iter().collect::<Vec<_>>().join(", ")));
    }
    Ok(Pass { summary: "72 cases yield their exact rule codes".into(), lines })
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        criterion(1, "inheritance-signature law", secs(5), inheritance_law),
        criterion(2, "medium laws", secs(30), medium),
        criterion(3, "black-box oracle equivalence", secs(60), black_box_equivalence),
        criterion(4, "refinement soundness link", secs(300), soundness_link),
        criterion(5, "set-inclusion semantics", secs(120), set_inclusion),
        criterion(6, "synthesis completeness", secs(30), synthesis),
        criterion(7, "round-trips", secs(30), round_trips),
        criterion(8, "reproducibility", secs(30), reproducibility),
        criterion(9, "conformance corpus", secs(10), conformance),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
