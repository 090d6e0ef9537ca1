//! Named graph collections read from a directory of graph files.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{graph_theory_name, parse_graph, FeynmanGraph};
use crate::theory::Theory;

/// A graph with the name it is displayed under.
#[derive(Debug, Clone)]
pub struct NamedGraph {
    pub name: String,
    pub graph: FeynmanGraph,
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Reads one graph file; the name defaults to the file stem.
pub fn load_graph(path: &Path, theory: &Arc<Theory>) -> Result<NamedGraph> {
    let text = read_text(path)?;
    let mut graph = parse_graph(&text, theory)?;
    let name = match graph.name() {
        Some(n) => n.to_string(),
        None => {
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            graph.set_name(Some(stem.clone()));
            stem
        }
    };
    Ok(NamedGraph { name, graph })
}

/// Every graph file in `dir` written for `theory`, sorted by file name.
/// Files for other theories are skipped.
pub fn load_dir(dir: &Path, theory: &Arc<Theory>) -> Result<Vec<NamedGraph>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    })?;
    let mut paths: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for p in paths {
        let Ok(text) = read_text(&p) else { continue };
        if graph_theory_name(&text).as_deref() != Some(theory.name.as_str()) {
            continue;
        }
        out.push(load_graph(&p, theory)?);
    }
    Ok(out)
}
