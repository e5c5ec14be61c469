//! File formats, the document graph and the command-line front end for
//! `sysmodel-core`.

pub mod cli;
pub mod docgraph;
pub mod files;
pub mod render;
