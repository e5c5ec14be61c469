//! Random document graphs built through the public operations.

use std::fs;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::Rng;
use sysmodel::docgraph::{DocGraph, EdgeKind, Flag, GraphError};
use sysmodel_testkit::gen::Rand;

/// A graph of up to `max` documents with random flags and edges, built
/// through the public operations. Files are written under `root`.
pub fn random_graph(r: &mut Rand, root: &Path, max: usize) -> DocGraph {
    let mut g = DocGraph::new(root);
    let n = r.random_range(0..=max);
    let authors = ["ann", "Bo Li", "x=y,z", "100%", ""];
    let mut ids = Vec::new();
    for i in 0..n {
        let (name, text) = if r.random_bool(0.6) {
            (format!("d{i}.cd"), format!("class C{i} {{\n}}\n"))
        } else {
            (format!("notes {i}.txt"), "free text\n".to_string())
        };
        let sub = if r.random_bool(0.3) { "sub/" } else { "" };
        fs::create_dir_all(root.join(sub)).unwrap();
        fs::write(root.join(sub).join(&name), text).unwrap();
        let stamp = format!("2024-0{}-0{}T10:00:00Z", r.random_range(1..10), r.random_range(1..10));
        let id = g.add_document_at(Path::new(&format!("{sub}{name}")), authors.choose(r).unwrap(), &stamp).unwrap();
        if r.random_bool(0.5) {
            g.set_flag(&id, Flag::Validated, true).unwrap();
        }
        if r.random_bool(0.5) {
            let _ = g.set_flag(&id, Flag::Verified, true);
        }
        ids.push(id);
    }
    if ids.is_empty() {
        return g;
    }
    for _ in 0..r.random_range(0..=n * 2) {
        let kind = if r.random_bool(0.5) { EdgeKind::RefersTo } else { EdgeKind::Transform };
        let src: Vec<&str> = (0..r.random_range(1..=2)).map(|_| ids.choose(r).unwrap().as_str()).collect();
        let dst: Vec<&str> = (0..r.random_range(1..=2)).map(|_| ids.choose(r).unwrap().as_str()).collect();
        match g.link(kind, &src, &dst) {
            Ok(_) | Err(GraphError::CycleError(_)) => {}
            Err(e) => panic!("{e}"),
        }
    }
    for i in 0..g.edges().len() {
        if g.edges()[i].kind == EdgeKind::Transform && r.random_bool(0.5) {
            let _ = g.validate_transform(i, None);
        }
    }
    g
}
