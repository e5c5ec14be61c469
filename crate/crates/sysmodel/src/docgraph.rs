//! Persistent document graph: diagram documents with lifecycle flags,
//! linked by refers-to and transform edges.
//!
//! The manifest is line-oriented text, one record per line:
//!
//! ```text
//! node <id> <kind> <path> author=<s> created=<ts> updated=<ts> flags=v:0,V:0,t:0,c:u,r:u
//! violation <id> <text>
//! edge <refers|transform> <src[,src...]> -> <dst[,dst...]>
//! ```
//!
//! Nodes come first by id, then violations in node order, then edges in
//! lexicographic order. Fields are percent-escaped.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io;
use std::path::{Path, PathBuf};

use sysmodel_core::dsl::{Document, DocumentKind, ParseError};
use sysmodel_core::model::ClassTable;
use sysmodel_core::refine::{
    check_seq_against_state, refine_class_diagrams, refine_state_diagram, target_lifeline, RefineError,
    RefinementVerdict, StateMapping,
};
use sysmodel_core::semantics::merge_class_diagrams;
use thiserror::Error;

use crate::files::{self, LoadError};

pub const MANIFEST: &str = "sysmodel.graph";

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    ManifestFormat { path: PathBuf, line: usize, message: String },
    #[error("{path}:{source}")]
    ParseFailure { path: String, source: ParseError },
    #[error("`{0}` is already in the graph")]
    DuplicatePath(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("the {0} edge would close a cycle")]
    CycleError(EdgeKind),
    #[error("no transform rule for {0}")]
    UnsupportedTransformShape(String),
    #[error("there is no edge {0}")]
    UnknownEdge(usize),
    #[error("edge {0} is not a transform edge")]
    NotTransform(usize),
    #[error("no document graph in {}", .0.display())]
    NotInitialized(PathBuf),
    #[error("a document graph already exists in {}", .0.display())]
    AlreadyInitialized(PathBuf),
    #[error("`{id}`: cannot set {flag}: {reason}")]
    FlagRejected { id: String, flag: Flag, reason: &'static str },
    #[error("document file `{0}` is missing")]
    MissingFile(String),
    #[error("an edge needs at least one source and one target")]
    EmptyEdge,
    #[error(transparent)]
    Refine(#[from] RefineError),
}

impl From<LoadError> for GraphError {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Io { path, source } => GraphError::Io { path, source },
            LoadError::Parse { path, source } => GraphError::ParseFailure { path, source },
            LoadError::NoExtension(p) => GraphError::ParseFailure { path: p.clone(), source: ParseError::UnknownKind(p) },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    RefersTo,
    Transform,
}

impl EdgeKind {
    pub fn keyword(self) -> &'static str {
        match self {
            EdgeKind::RefersTo => "refers",
            EdgeKind::Transform => "transform",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "refers" => Some(EdgeKind::RefersTo),
            "transform" => Some(EdgeKind::Transform),
            _ => None,
        }
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flag {
    Validated,
    Verified,
    Tested,
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flag::Validated => "validated",
            Flag::Verified => "verified",
            Flag::Tested => "tested",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocNode {
    pub id: String,
    pub kind: DocumentKind,
    /// Relative to the graph root, `/`-separated.
    pub path: String,
    pub author: String,
    pub created: String,
    pub updated: String,
    pub validated: bool,
    pub verified: bool,
    pub tested: bool,
    pub consistent: Option<bool>,
    pub redundant: Option<bool>,
    /// Violations from the last transform validation that targeted this node.
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DocEdge {
    pub kind: EdgeKind,
    pub sources: Vec<String>,
    pub targets: Vec<String>,
}

impl fmt::Display for DocEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |ids: &[String]| ids.iter().map(|i| escape(i)).collect::<Vec<_>>().join(",");
        write!(f, "edge {} {} -> {}", self.kind, join(&self.sources), join(&self.targets))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Redundancy {
    Decided(bool),
    /// Only sequence diagrams are decided; the flag stays unset.
    Undeterminable(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocGraph {
    root: PathBuf,
    nodes: BTreeMap<String, DocNode>,
    /// Kept sorted by manifest line.
    edges: Vec<DocEdge>,
}

pub fn now() -> String {
    chrono::Utc::now().format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        if c == '%' || c == ',' || c == '=' || c.is_whitespace() || c.is_control() {
            let mut buf = [0u8; 4];
            for b in c.encode_utf8(&mut buf).bytes() {
                out.push_str(&format!("%{b:02X}"));
            }
        } else {
            out.push(c);
        }
    }
    out
}

fn unescape(s: &str) -> Option<String> {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            let hex = std::str::from_utf8(bytes.get(i + 1..i + 3)?).ok()?;
            out.push(u8::from_str_radix(hex, 16).ok()?);
            i += 3;
        } else {
            out.push(bytes[i]);
            i += 1;
        }
    }
    String::from_utf8(out).ok()
}

fn bit(b: bool) -> char {
    if b {
        '1'
    } else {
        '0'
    }
}

fn tri(b: Option<bool>) -> char {
    b.map_or('u', bit)
}

impl DocGraph {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        DocGraph { root: root.into(), nodes: BTreeMap::new(), edges: Vec::new() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.root.join(MANIFEST)
    }

    pub fn nodes(&self) -> &BTreeMap<String, DocNode> {
        &self.nodes
    }

    pub fn node(&self, id: &str) -> Result<&DocNode, GraphError> {
        self.nodes.get(id).ok_or_else(|| GraphError::UnknownNode(id.into()))
    }

    pub fn edges(&self) -> &[DocEdge] {
        &self.edges
    }

    /// Creates and saves an empty graph.
    pub fn init(root: impl Into<PathBuf>) -> Result<Self, GraphError> {
        let g = DocGraph::new(root);
        let path = g.manifest_path();
        if path.exists() {
            return Err(GraphError::AlreadyInitialized(g.root));
        }
        g.save()?;
        Ok(g)
    }

    pub fn load(root: impl Into<PathBuf>) -> Result<Self, GraphError> {
        let root = root.into();
        let path = root.join(MANIFEST);
        if !path.exists() {
            return Err(GraphError::NotInitialized(root));
        }
        let text = std::fs::read_to_string(&path).map_err(|source| GraphError::Io { path: path.clone(), source })?;
        DocGraph::from_manifest(root, &text)
    }

    /// Every document file must exist. The manifest is replaced atomically.
    pub fn save(&self) -> Result<(), GraphError> {
        for n in self.nodes.values() {
            if !self.root.join(&n.path).is_file() {
                return Err(GraphError::MissingFile(n.path.clone()));
            }
        }
        let path = self.manifest_path();
        files::write_atomic(&path, &self.to_manifest()).map_err(|source| GraphError::Io { path, source })
    }

    pub fn to_manifest(&self) -> String {
        let mut out = String::new();
        for n in self.nodes.values() {
            out.push_str(&format!(
                "node {} {} {} author={} created={} updated={} flags=v:{},V:{},t:{},c:{},r:{}\n",
                escape(&n.id),
                n.kind.extension(),
                escape(&n.path),
                escape(&n.author),
                escape(&n.created),
                escape(&n.updated),
                bit(n.validated),
                bit(n.verified),
                bit(n.tested),
                tri(n.consistent),
                tri(n.redundant),
            ));
        }
        for n in self.nodes.values() {
            for v in &n.violations {
                out.push_str(&format!("violation {} {}\n", escape(&n.id), escape(v)));
            }
        }
        for e in &self.edges {
            out.push_str(&format!("{e}\n"));
        }
        out
    }

    pub fn from_manifest(root: impl Into<PathBuf>, text: &str) -> Result<Self, GraphError> {
        let mut g = DocGraph::new(root);
        let manifest = g.manifest_path();
        let err = |line: usize, message: String| GraphError::ManifestFormat { path: manifest.clone(), line, message };
        let mut edges = Vec::new();
        let mut violations = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let no = i + 1;
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(' ').collect();
            match fields[0] {
                "node" => {
                    let n = parse_node(&fields).map_err(|m| err(no, m))?;
                    if g.nodes.contains_key(&n.id) {
                        return Err(err(no, format!("duplicate node `{}`", n.id)));
                    }
                    g.nodes.insert(n.id.clone(), n);
                }
                "violation" if fields.len() == 3 => {
                    let id = unescape(fields[1]).ok_or_else(|| err(no, "bad escape".into()))?;
                    let text = unescape(fields[2]).ok_or_else(|| err(no, "bad escape".into()))?;
                    violations.push((no, id, text));
                }
                "edge" => edges.push((no, parse_edge(&fields).map_err(|m| err(no, m))?)),
                other => return Err(err(no, format!("unknown record `{other}`"))),
            }
        }
        for (no, id, text) in violations {
            let n = g.nodes.get_mut(&id).ok_or_else(|| err(no, format!("unknown node `{id}`")))?;
            n.violations.push(text);
        }
        for (no, e) in edges {
            g.insert_edge(e).map_err(|e| err(no, e.to_string()))?;
        }
        Ok(g)
    }

    /// Adds the document at `path` (absolute or relative to the root),
    /// stamped with the current time.
    pub fn add_document(&mut self, path: &Path, author: &str) -> Result<String, GraphError> {
        self.add_document_at(path, author, &now())
    }

    pub fn add_document_at(&mut self, path: &Path, author: &str, timestamp: &str) -> Result<String, GraphError> {
        let rel = self.relative(path);
        if self.nodes.values().any(|n| n.path == rel) {
            return Err(GraphError::DuplicatePath(rel));
        }
        let doc = files::load_document(&self.root.join(&rel), &rel)?;
        let base = Path::new(&rel).file_name().and_then(|f| f.to_str()).unwrap_or(&rel).to_owned();
        let mut id = base.clone();
        let mut k = 2;
        while self.nodes.contains_key(&id) {
            id = format!("{base}~{k}");
            k += 1;
        }
        self.nodes.insert(
            id.clone(),
            DocNode {
                id: id.clone(),
                kind: doc.kind(),
                path: rel,
                author: author.into(),
                created: timestamp.into(),
                updated: timestamp.into(),
                validated: false,
                verified: false,
                tested: false,
                consistent: None,
                redundant: None,
                violations: Vec::new(),
            },
        );
        Ok(id)
    }

    /// Records an edit: re-parses the file, stamps the author and time and
    /// clears every derived flag.
    pub fn touch(&mut self, id: &str, author: &str, timestamp: &str) -> Result<(), GraphError> {
        let doc = self.document(id)?;
        let n = self.nodes.get_mut(id).expect("checked");
        n.kind = doc.kind();
        n.author = author.into();
        n.updated = timestamp.into();
        n.validated = false;
        n.verified = false;
        n.consistent = None;
        n.redundant = None;
        n.violations.clear();
        Ok(())
    }

    fn relative(&self, path: &Path) -> String {
        let p = path.strip_prefix(&self.root).unwrap_or(path);
        p.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/")
    }

    pub fn document(&self, id: &str) -> Result<Document, GraphError> {
        let n = self.node(id)?;
        Ok(files::load_document(&self.root.join(&n.path), &n.path)?)
    }

    /// Adds an edge unless it closes a cycle among edges of its kind.
    /// Adding an existing edge is a no-op.
    pub fn link(&mut self, kind: EdgeKind, sources: &[&str], targets: &[&str]) -> Result<DocEdge, GraphError> {
        let norm = |ids: &[&str]| -> Vec<String> {
            let set: BTreeSet<String> = ids.iter().map(|s| s.to_string()).collect();
            set.into_iter().collect()
        };
        let e = DocEdge { kind, sources: norm(sources), targets: norm(targets) };
        self.insert_edge(e.clone())?;
        Ok(e)
    }

    fn insert_edge(&mut self, e: DocEdge) -> Result<(), GraphError> {
        if e.sources.is_empty() || e.targets.is_empty() {
            return Err(GraphError::EmptyEdge);
        }
        for id in e.sources.iter().chain(&e.targets) {
            self.node(id)?;
        }
        if self.edges.contains(&e) {
            return Ok(());
        }
        if self.closes_cycle(&e) {
            return Err(GraphError::CycleError(e.kind));
        }
        let line = e.to_string();
        let at = self.edges.partition_point(|x| x.to_string() < line);
        self.edges.insert(at, e);
        Ok(())
    }

    fn closes_cycle(&self, new: &DocEdge) -> bool {
        let mut succ: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for e in self.edges.iter().filter(|e| e.kind == new.kind).chain([new]) {
            for s in &e.sources {
                succ.entry(s).or_default().extend(e.targets.iter().map(String::as_str));
            }
        }
        // a cycle through the new edge means some target reaches a source
        let mut seen = BTreeSet::new();
        let mut stack: Vec<&str> = new.targets.iter().map(String::as_str).collect();
        while let Some(n) = stack.pop() {
            if new.sources.iter().any(|s| s == n) {
                return true;
            }
            if seen.insert(n) {
                stack.extend(succ.get(n).into_iter().flatten().copied());
            }
        }
        false
    }

    pub fn set_flag(&mut self, id: &str, flag: Flag, value: bool) -> Result<(), GraphError> {
        let n = self.nodes.get_mut(id).ok_or_else(|| GraphError::UnknownNode(id.into()))?;
        let reject = |reason| Err(GraphError::FlagRejected { id: id.into(), flag, reason });
        match flag {
            Flag::Validated => n.validated = value,
            Flag::Verified if value && !n.kind.is_formal() => return reject("free text cannot be verified"),
            Flag::Verified => n.verified = value,
            Flag::Tested if value => return reject("no document kind is executable"),
            Flag::Tested => n.tested = false,
        }
        Ok(())
    }

    /// Class diagrams reachable by refers-to edges from `ids`; every class
    /// diagram of the graph when there are none.
    fn class_table_for(&self, ids: &[String]) -> Result<ClassTable, GraphError> {
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        let mut stack: Vec<&str> = ids.iter().map(String::as_str).collect();
        while let Some(n) = stack.pop() {
            if seen.insert(n) {
                for e in self.edges.iter().filter(|e| e.kind == EdgeKind::RefersTo && e.sources.iter().any(|s| s == n)) {
                    stack.extend(e.targets.iter().map(String::as_str));
                }
            }
        }
        let cd = |id: &&str| self.nodes[*id].kind == DocumentKind::ClassDiagram;
        let mut cds: Vec<&str> = seen.into_iter().filter(cd).collect();
        if cds.is_empty() {
            cds = self.nodes.keys().map(String::as_str).filter(cd).collect();
        }
        let docs = cds.iter().map(|id| self.document(id)).collect::<Result<Vec<_>, _>>()?;
        Ok(merge_class_diagrams(&docs).0)
    }

    /// Checks a transform edge by the rule for its document kinds and
    /// records the outcome on each target. Documents are never modified.
    pub fn validate_transform(&mut self, index: usize, mapping: Option<&StateMapping>) -> Result<RefinementVerdict, GraphError> {
        let e = self.edges.get(index).ok_or(GraphError::UnknownEdge(index))?.clone();
        if e.kind != EdgeKind::Transform {
            return Err(GraphError::NotTransform(index));
        }
        let sources = e.sources.iter().map(|id| self.document(id)).collect::<Result<Vec<_>, _>>()?;
        let src_kinds: BTreeSet<DocumentKind> = sources.iter().map(Document::kind).collect();
        let shape = |t: DocumentKind| {
            let ks: Vec<&str> = src_kinds.iter().map(|k| k.extension()).collect();
            format!("{} -> {}", ks.join(","), t.extension())
        };
        let mut per_target = Vec::new();
        for t in &e.targets {
            let target = self.document(t)?;
            let kinds: Vec<DocumentKind> = src_kinds.iter().copied().collect();
            let v = match (kinds.as_slice(), target.kind()) {
                ([DocumentKind::ClassDiagram], DocumentKind::ClassDiagram) => {
                    let olds: Vec<&Document> = sources.iter().collect();
                    refine_class_diagrams(&olds, &target)?
                }
                ([DocumentKind::StateDiagram], DocumentKind::StateDiagram) if sources.len() == 1 => {
                    let identity = StateMapping::identity();
                    refine_state_diagram(&sources[0], &target, mapping.unwrap_or(&identity))?
                }
                ([DocumentKind::SequenceDiagram], DocumentKind::StateDiagram) => {
                    let mut ids = e.sources.clone();
                    ids.push(t.clone());
                    let table = self.class_table_for(&ids)?;
                    let mut all = RefinementVerdict::new(&[], Vec::new(), Vec::new());
                    for qd in &sources {
                        let v = check_seq_against_state(qd, &target, &table)?;
                        merge_verdict(&mut all, v);
                    }
                    all
                }
                _ => return Err(GraphError::UnsupportedTransformShape(shape(target.kind()))),
            };
            per_target.push((t.clone(), v));
        }
        let mut all = RefinementVerdict::new(&[], Vec::new(), Vec::new());
        for (t, v) in per_target {
            let n = self.nodes.get_mut(&t).expect("checked");
            n.consistent = Some(v.accepted);
            n.violations = v.violations.iter().map(ToString::to_string).collect();
            merge_verdict(&mut all, v);
        }
        Ok(all)
    }

    /// Decides redundancy of a sequence diagram: it is redundant iff some
    /// state diagram in the graph admits it as a path.
    pub fn mark_redundant(&mut self, id: &str) -> Result<Redundancy, GraphError> {
        let n = self.node(id)?;
        if n.kind != DocumentKind::SequenceDiagram {
            return Ok(Redundancy::Undeterminable(format!(
                "redundancy of a {} document is not decidable here; flag left unset",
                n.kind.extension()
            )));
        }
        let qd = self.document(id)?;
        let table = self.class_table_for(&[])?;
        let sd_ids: Vec<String> =
            self.nodes.values().filter(|n| n.kind == DocumentKind::StateDiagram).map(|n| n.id.clone()).collect();
        let mut redundant = false;
        for sd_id in sd_ids {
            let sd = self.document(&sd_id)?;
            let class = &sd.as_state().expect("state diagram").class;
            if !matches!(target_lifeline(&qd, class), Ok(Some(_))) {
                continue;
            }
            if check_seq_against_state(&qd, &sd, &table).is_ok_and(|v| v.accepted) {
                redundant = true;
                break;
            }
        }
        self.nodes.get_mut(id).expect("checked").redundant = Some(redundant);
        Ok(Redundancy::Decided(redundant))
    }
}

fn merge_verdict(all: &mut RefinementVerdict, v: RefinementVerdict) {
    all.violations.extend(v.violations);
    all.accepted = all.violations.is_empty();
    for r in v.checked_rules {
        if !all.checked_rules.contains(&r) {
            all.checked_rules.push(r);
        }
    }
    all.notes.extend(v.notes);
    if all.witness.is_none() {
        all.witness = v.witness;
    }
}

fn parse_node(f: &[&str]) -> Result<DocNode, String> {
    if f.len() != 8 {
        return Err(format!("a node record has 8 fields, found {}", f.len()));
    }
    let un = |s: &str| unescape(s).ok_or_else(|| format!("bad escape in `{s}`"));
    let keyed = |s: &str, key: &str| -> Result<String, String> {
        let v = s.strip_prefix(key).and_then(|r| r.strip_prefix('=')).ok_or_else(|| format!("expected `{key}=`"))?;
        un(v)
    };
    let kind = DocumentKind::from_extension(f[2]).ok_or_else(|| format!("unknown document kind `{}`", f[2]))?;
    let flags = f[7].strip_prefix("flags=").ok_or("expected `flags=`")?;
    let parts: Vec<&str> = flags.split(',').collect();
    let want = ["v", "V", "t", "c", "r"];
    if parts.len() != want.len() {
        return Err(format!("malformed flags `{flags}`"));
    }
    let mut vals = Vec::new();
    for (p, k) in parts.iter().zip(want) {
        let v = p.strip_prefix(k).and_then(|r| r.strip_prefix(':')).ok_or_else(|| format!("expected flag `{k}`"))?;
        vals.push(match v {
            "0" => Some(false),
            "1" => Some(true),
            "u" if k == "c" || k == "r" => None,
            _ => return Err(format!("bad value for flag `{k}`")),
        });
    }
    let n = DocNode {
        id: un(f[1])?,
        kind,
        path: un(f[3])?,
        author: keyed(f[4], "author")?,
        created: keyed(f[5], "created")?,
        updated: keyed(f[6], "updated")?,
        validated: vals[0].expect("binary"),
        verified: vals[1].expect("binary"),
        tested: vals[2].expect("binary"),
        consistent: vals[3],
        redundant: vals[4],
        violations: Vec::new(),
    };
    if n.verified && !kind.is_formal() {
        return Err("free text cannot be verified".into());
    }
    if n.tested {
        return Err("no document kind is executable".into());
    }
    Ok(n)
}

fn parse_edge(f: &[&str]) -> Result<DocEdge, String> {
    if f.len() != 5 || f[3] != "->" {
        return Err("expected `edge <kind> <sources> -> <targets>`".into());
    }
    let kind = EdgeKind::from_keyword(f[1]).ok_or_else(|| format!("unknown edge kind `{}`", f[1]))?;
    let ids = |s: &str| -> Result<Vec<String>, String> {
        let mut v = s.split(',').map(|x| unescape(x).ok_or_else(|| format!("bad escape in `{x}`"))).collect::<Result<Vec<_>, _>>()?;
        v.sort();
        v.dedup();
        Ok(v)
    };
    Ok(DocEdge { kind, sources: ids(f[2])?, targets: ids(f[4])? })
}
