//! Command-line front end. Exit codes: 0 success or accepted, 1 rejected
//! or findings, 2 input error, 3 resource limit.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use sysmodel_core::dsl::{serialize, Document, DocumentKind, Stimulus};
use sysmodel_core::refine::{
    check_seq_against_state, refine_class_diagrams, refine_state_diagram, renaming, synthesize_state_diagram,
    trace_refinement_check, MergeStrategy, RefineError, RefinementVerdict, StateMapping, SynthesisOptions, TraceBounds,
};
use sysmodel_core::semantics::{check_documents, elaborate, merge_class_diagrams, ElaborateOptions};
use sysmodel_core::sim::{enumerate_runs, render, run as sim_run, Projection, SchedulerPolicy, SimError};
use sysmodel_core::{ClassName, SystemModel};

use crate::docgraph::{DocGraph, EdgeKind, Flag, GraphError, Redundancy};
use crate::files::{self, LoadError};
use crate::render::{self, Format};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECTED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "sysmodel", version, about = "Check, simulate and refine diagram documents")]
pub struct Cli {
    /// Root for relative paths and the document graph.
    #[arg(long, global = true, env = "SYSMODEL_WORKSPACE", default_value = ".")]
    pub workspace: PathBuf,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Rounds per run.
    #[arg(long, global = true, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
    pub rounds: u64,
    /// Node budget for exhaustive enumeration.
    #[arg(long, global = true, default_value_t = 200_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub cap: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse documents and report context-condition findings.
    Check {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Elaborate a document set and print runs.
    Simulate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long)]
        stimuli: Option<PathBuf>,
        /// Every run instead of one seeded run.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, value_enum, default_value_t = Policy::Random)]
        policy: Policy,
        /// Object diagram to take initial objects from.
        #[arg(long)]
        object_diagram: Option<String>,
    },
    /// Check a refinement step between documents.
    Refine {
        #[arg(long, value_enum)]
        kind: RefineKind,
        #[arg(long, num_args = 1.., required = true)]
        old: Vec<PathBuf>,
        #[arg(long, num_args = 1.., required = true)]
        new: Vec<PathBuf>,
        /// State mapping, lines `NEW -> OLD`.
        #[arg(long)]
        map: Option<PathBuf>,
        /// Class whose states `--map` renames (trace kind).
        #[arg(long)]
        class: Option<String>,
        #[arg(long)]
        stimuli: Option<PathBuf>,
        /// Compare messages only (trace kind).
        #[arg(long)]
        observable: bool,
    },
    /// Build a state diagram from sequence diagrams.
    Synthesize {
        /// Sequence diagrams plus the class diagrams they use.
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long)]
        class: String,
        #[arg(long, value_enum, default_value_t = Merge::Trie)]
        merge: Merge,
        #[arg(long)]
        fold_loops: bool,
        #[arg(short = 'o', long)]
        output: PathBuf,
    },
    /// Maintain the document graph of the workspace.
    Graph {
        #[command(subcommand)]
        command: GraphCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum GraphCommand {
    Init,
    Add {
        path: PathBuf,
        #[arg(long, default_value = "unknown")]
        author: String,
    },
    Link {
        #[arg(value_enum)]
        kind: LinkKind,
        #[arg(long, value_delimiter = ',', required = true)]
        from: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        to: Vec<String>,
    },
    /// Validate one transform edge by index, or all of them.
    Validate {
        edge: Option<usize>,
        #[arg(long)]
        map: Option<PathBuf>,
    },
    Status,
    /// Decide whether a sequence diagram is derivable from state diagrams.
    Redundant { id: String },
    Flag {
        id: String,
        #[arg(value_enum)]
        flag: FlagArg,
        #[arg(value_enum)]
        value: OnOff,
    },
    /// Record an edit of a document.
    Touch {
        id: String,
        #[arg(long, default_value = "unknown")]
        author: String,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Policy {
    Random,
    RoundRobin,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RefineKind {
    Cd,
    Sd,
    Qd,
    Trace,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Merge {
    Trie,
    Labels,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LinkKind {
    Refers,
    Transform,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FlagArg {
    Validated,
    Verified,
    Tested,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OnOff {
    On,
    Off,
}

/// A failed command: message and exit code.
struct Failure(String, i32);

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        Failure(e.to_string(), EXIT_INPUT)
    }
}

impl From<RefineError> for Failure {
    fn from(e: RefineError) -> Self {
        let code = if matches!(e, RefineError::ExplosionLimit { .. }) { EXIT_LIMIT } else { EXIT_INPUT };
        Failure(e.to_string(), code)
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        let code = if matches!(e, SimError::ExplosionLimit { .. }) { EXIT_LIMIT } else { EXIT_INPUT };
        Failure(e.to_string(), code)
    }
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::Refine(r) => r.into(),
            e => Failure(e.to_string(), EXIT_INPUT),
        }
    }
}

type Outcome = Result<i32, Failure>;

struct Ctx<'a> {
    cli: &'a Cli,
    out: String,
    err: String,
}

impl Ctx<'_> {
    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.cli.workspace.join(p)
        }
    }

    fn load(&self, p: &Path) -> Result<Document, Failure> {
        Ok(files::load_document(&self.resolve(p), &p.display().to_string())?)
    }

    fn load_all(&self, ps: &[PathBuf]) -> Result<Vec<Document>, Failure> {
        ps.iter().map(|p| self.load(p)).collect()
    }

    fn stimuli(&self, p: &Option<PathBuf>) -> Result<Vec<Stimulus>, Failure> {
        match p {
            Some(p) => Ok(files::load_stimuli(&self.resolve(p))?),
            None => Ok(Vec::new()),
        }
    }

    fn mapping(&self, p: &Option<PathBuf>) -> Result<Option<StateMapping>, Failure> {
        let Some(p) = p else { return Ok(None) };
        let text = files::read(&self.resolve(p))?;
        Ok(Some(StateMapping::parse(&text)?))
    }

    fn model(&self, docs: &[Document], object_diagram: Option<&str>) -> Result<SystemModel, Failure> {
        elaborate(docs, &[], ElaborateOptions { object_diagram })
            .map_err(|r| Failure(render::report(&r, self.cli.format), EXIT_INPUT))
    }

    fn verdict(&mut self, v: &RefinementVerdict) -> i32 {
        self.out.push_str(&render::verdict(v, self.cli.format));
        if v.accepted {
            EXIT_OK
        } else {
            EXIT_REJECTED
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Output goes to `out` and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut ctx = Ctx { cli: &cli, out: String::new(), err: String::new() };
    let code = match dispatch(&mut ctx) {
        Ok(code) => code,
        Err(Failure(msg, code)) => {
            ctx.err.push_str(&msg);
            if !msg.ends_with('\n') {
                ctx.err.push('\n');
            }
            code
        }
    };
    let _ = out.write_all(ctx.out.as_bytes());
    let _ = err.write_all(ctx.err.as_bytes());
    code
}

fn dispatch(ctx: &mut Ctx<'_>) -> Outcome {
    let cli = ctx.cli;
    match &cli.command {
        Command::Check { paths } => check(ctx, paths),
        Command::Simulate { paths, stimuli, exhaustive, policy, object_diagram } => {
            simulate(ctx, paths, stimuli, *exhaustive, *policy, object_diagram.as_deref())
        }
        Command::Refine { kind, old, new, map, class, stimuli, observable } => {
            refine(ctx, *kind, old, new, map, class.as_deref(), stimuli, *observable)
        }
        Command::Synthesize { paths, class, merge, fold_loops, output } => synthesize(ctx, paths, class, *merge, *fold_loops, output),
        Command::Graph { command } => graph(ctx, command),
    }
}

fn check(ctx: &mut Ctx<'_>, paths: &[PathBuf]) -> Outcome {
    let docs = ctx.load_all(paths)?;
    let mut report = check_documents(&docs, &[]);
    let ods = docs.iter().filter(|d| d.kind() == DocumentKind::ObjectDiagram).count();
    if !report.has_errors() && ods == 1 {
        if let Err(r) = elaborate(&docs, &[], ElaborateOptions::default()) {
            report.extend(r);
            report.sort();
        }
    }
    ctx.out.push_str(&render::report(&report, ctx.cli.format));
    Ok(if report.has_errors() { EXIT_REJECTED } else { EXIT_OK })
}

fn simulate(
    ctx: &mut Ctx<'_>,
    paths: &[PathBuf],
    stimuli: &Option<PathBuf>,
    exhaustive: bool,
    policy: Policy,
    object_diagram: Option<&str>,
) -> Outcome {
    let docs = ctx.load_all(paths)?;
    let model = ctx.model(&docs, object_diagram)?;
    let stimuli = ctx.stimuli(stimuli)?;
    let rounds = ctx.cli.rounds as usize;
    let (header, traces) = if exhaustive {
        let cap = ctx.cli.cap as usize;
        let set = enumerate_runs(&model, &stimuli, rounds, cap)?;
        if set.truncated {
            return Err(SimError::ExplosionLimit { cap }.into());
        }
        let traces: Vec<String> = set.traces.values().map(|t| render(&model, t, &Projection::Full)).collect();
        let header = vec![
            ("policy", SchedulerPolicy::ExhaustiveEnumeration(cap).to_string()),
            ("rounds", rounds.to_string()),
            ("runs", traces.len().to_string()),
        ];
        (header, traces)
    } else {
        let policy = match policy {
            Policy::Random => SchedulerPolicy::SeededRandom(ctx.cli.seed),
            Policy::RoundRobin => SchedulerPolicy::RoundRobin,
        };
        let runs = sim_run(&model, &stimuli, rounds, policy)?;
        let traces: Vec<String> = runs.iter().map(|t| render(&model, t, &Projection::Full)).collect();
        let header = vec![("policy", policy.to_string()), ("seed", ctx.cli.seed.to_string()), ("rounds", rounds.to_string())];
        (header, traces)
    };
    ctx.out.push_str(&render::runs(&header, &traces, ctx.cli.format));
    Ok(EXIT_OK)
}

fn single<'d>(docs: &'d [Document], what: &str) -> Result<&'d Document, Failure> {
    match docs {
        [d] => Ok(d),
        _ => Err(Failure(format!("expected exactly one {what} document, got {}", docs.len()), EXIT_INPUT)),
    }
}

fn require_kind(docs: &[Document], kind: DocumentKind) -> Result<(), Failure> {
    match docs.iter().find(|d| d.kind() != kind) {
        Some(d) => Err(RefineError::WrongKind { expected: kind_name(kind), found: d.id.clone() }.into()),
        None => Ok(()),
    }
}

fn kind_name(k: DocumentKind) -> &'static str {
    match k {
        DocumentKind::ClassDiagram => "class diagram",
        DocumentKind::ObjectDiagram => "object diagram",
        DocumentKind::StateDiagram => "state diagram",
        DocumentKind::SequenceDiagram => "sequence diagram",
        DocumentKind::Text => "text",
    }
}

#[allow(clippy::too_many_arguments)]
fn refine(
    ctx: &mut Ctx<'_>,
    kind: RefineKind,
    old: &[PathBuf],
    new: &[PathBuf],
    map: &Option<PathBuf>,
    class: Option<&str>,
    stimuli: &Option<PathBuf>,
    observable: bool,
) -> Outcome {
    let olds = ctx.load_all(old)?;
    let news = ctx.load_all(new)?;
    let v = match kind {
        RefineKind::Cd => {
            require_kind(&olds, DocumentKind::ClassDiagram)?;
            require_kind(&news, DocumentKind::ClassDiagram)?;
            let refs: Vec<&Document> = olds.iter().collect();
            refine_class_diagrams(&refs, single(&news, "new")?)?
        }
        RefineKind::Sd => {
            require_kind(&olds, DocumentKind::StateDiagram)?;
            require_kind(&news, DocumentKind::StateDiagram)?;
            let m = ctx.mapping(map)?.unwrap_or_else(StateMapping::identity);
            refine_state_diagram(single(&olds, "old")?, single(&news, "new")?, &m)?
        }
        RefineKind::Qd => {
            let (cds, qds): (Vec<&Document>, Vec<&Document>) =
                olds.iter().partition(|d| d.kind() == DocumentKind::ClassDiagram);
            require_kind(&news, DocumentKind::StateDiagram)?;
            if let Some(d) = qds.iter().find(|d| d.kind() != DocumentKind::SequenceDiagram) {
                return Err(RefineError::WrongKind { expected: "sequence diagram", found: d.id.clone() }.into());
            }
            let (table, report) = merge_class_diagrams(cds);
            if report.has_errors() {
                return Err(Failure(render::report(&report, ctx.cli.format), EXIT_INPUT));
            }
            let sd = single(&news, "new")?;
            let mut all = RefinementVerdict::new(&[], Vec::new(), Vec::new());
            for qd in qds {
                let v = check_seq_against_state(qd, sd, &table)?;
                all.violations.extend(v.violations);
                for r in v.checked_rules {
                    if !all.checked_rules.contains(&r) {
                        all.checked_rules.push(r);
                    }
                }
                all.notes.extend(v.notes);
            }
            all.accepted = all.violations.is_empty();
            all
        }
        RefineKind::Trace => {
            let a = ctx.model(&olds, None)?;
            let c = ctx.model(&news, None)?;
            let stimuli = ctx.stimuli(stimuli)?;
            let projection = match (observable, ctx.mapping(map)?, class) {
                (true, _, _) => Projection::Observable,
                (false, Some(m), Some(class)) => renaming(&ClassName::new(class), m.entries),
                (false, Some(_), None) => return Err(Failure("--map needs --class for the trace kind".into(), EXIT_INPUT)),
                (false, None, _) => Projection::Full,
            };
            let bounds = TraceBounds { rounds: ctx.cli.rounds as usize, cap: ctx.cli.cap as usize };
            trace_refinement_check(&a, &c, &stimuli, bounds, &projection)?
        }
    };
    Ok(ctx.verdict(&v))
}

fn synthesize(ctx: &mut Ctx<'_>, paths: &[PathBuf], class: &str, merge: Merge, fold: bool, output: &Path) -> Outcome {
    let docs = ctx.load_all(paths)?;
    let (cds, qds): (Vec<&Document>, Vec<&Document>) = docs.iter().partition(|d| d.kind() == DocumentKind::ClassDiagram);
    let (table, report) = merge_class_diagrams(cds);
    if report.has_errors() {
        return Err(Failure(render::report(&report, ctx.cli.format), EXIT_INPUT));
    }
    let mut opts = SynthesisOptions::new(class);
    opts.merge = match merge {
        Merge::Trie => MergeStrategy::TrieByPrefix,
        Merge::Labels => MergeStrategy::ByExplicitStateLabels,
    };
    opts.loop_folding = fold;
    let sd = synthesize_state_diagram(&qds, &opts, &table)?;
    let text = serialize(&sd);
    let target = ctx.resolve(output);
    files::write_atomic(&target, &text).map_err(|e| Failure(format!("{}: {e}", target.display()), EXIT_INPUT))?;
    // re-read what was written and check every input against it
    let written = ctx.load(output)?;
    let mut code = EXIT_OK;
    for qd in qds {
        let v = check_seq_against_state(qd, &written, &table)?;
        ctx.out.push_str(&format!("{}: ", qd.id));
        if ctx.verdict(&v) != EXIT_OK {
            code = EXIT_REJECTED;
        }
    }
    let states = written.as_state().map_or(0, |b| b.states.len());
    ctx.err.push_str(&format!("wrote {} ({states} states)\n", output.display()));
    Ok(code)
}

fn graph(ctx: &mut Ctx<'_>, cmd: &GraphCommand) -> Outcome {
    let root = ctx.cli.workspace.clone();
    if let GraphCommand::Init = cmd {
        DocGraph::init(&root)?;
        ctx.err.push_str(&format!("initialized {}\n", root.join(crate::docgraph::MANIFEST).display()));
        return Ok(EXIT_OK);
    }
    let mut g = DocGraph::load(&root)?;
    let mut code = EXIT_OK;
    match cmd {
        GraphCommand::Init => unreachable!(),
        GraphCommand::Add { path, author } => {
            let id = g.add_document(path, author)?;
            ctx.out.push_str(&format!("{id}\n"));
        }
        GraphCommand::Link { kind, from, to } => {
            let kind = match kind {
                LinkKind::Refers => EdgeKind::RefersTo,
                LinkKind::Transform => EdgeKind::Transform,
            };
            let from: Vec<&str> = from.iter().map(String::as_str).collect();
            let to: Vec<&str> = to.iter().map(String::as_str).collect();
            let e = g.link(kind, &from, &to)?;
            let i = g.edges().iter().position(|x| *x == e).expect("inserted");
            ctx.out.push_str(&format!("[{i}] {} {} -> {}\n", e.kind, e.sources.join(","), e.targets.join(",")));
        }
        GraphCommand::Validate { edge, map } => {
            let m = ctx.mapping(map)?;
            let indices: Vec<usize> = match edge {
                Some(i) => vec![*i],
                None => (0..g.edges().len()).filter(|i| g.edges()[*i].kind == EdgeKind::Transform).collect(),
            };
            for i in indices {
                let v = g.validate_transform(i, m.as_ref())?;
                ctx.out.push_str(&format!("[{i}] "));
                if ctx.verdict(&v) != EXIT_OK {
                    code = EXIT_REJECTED;
                }
            }
        }
        GraphCommand::Status => {
            ctx.out.push_str(&render::status(&g, ctx.cli.format));
            return Ok(EXIT_OK);
        }
        GraphCommand::Redundant { id } => match g.mark_redundant(id)? {
            Redundancy::Decided(b) => ctx.out.push_str(&format!("{id}: redundant={b}\n")),
            Redundancy::Undeterminable(why) => ctx.err.push_str(&format!("warning: {id}: {why}\n")),
        },
        GraphCommand::Flag { id, flag, value } => {
            let flag = match flag {
                FlagArg::Validated => Flag::Validated,
                FlagArg::Verified => Flag::Verified,
                FlagArg::Tested => Flag::Tested,
            };
            g.set_flag(id, flag, matches!(value, OnOff::On))?;
        }
        GraphCommand::Touch { id, author } => g.touch(id, author, &crate::docgraph::now())?,
    }
    g.save()?;
    Ok(code)
}
