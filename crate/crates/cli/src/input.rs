use std::io::Read;
use std::path::Path;

use graphdiv::metric::{parse_qgraph, QDivisor, QGraph};
use graphdiv::graph::quartic_dual_graph;
use graphdiv::{parse_graph, Divisor, Family, MultiGraph};

fn read_source(arg: &str) -> Result<Option<String>, String> {
    if arg == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| format!("reading stdin: {e}"))?;
        return Ok(Some(s));
    }
    if Path::new(arg).is_file() {
        return std::fs::read_to_string(arg)
            .map(Some)
            .map_err(|e| format!("reading {arg}: {e}"));
    }
    Ok(None)
}

/// A graph from a file, stdin (`-`), a family spec like `banana:3`, or
/// `quartic` for the reduction graph of the quartic fixture.
pub fn load_graph(arg: &str) -> Result<MultiGraph, String> {
    match read_source(arg)? {
        Some(text) => parse_graph(&text).map_err(|e| format!("{arg}: {e}")),
        None if arg == "quartic" => Ok(quartic_dual_graph()),
        None => Family::parse(arg)
            .and_then(|f| f.build())
            .map_err(|e| format!("`{arg}` is neither a readable file nor a graph family: {e}")),
    }
}

/// A Q-graph from a file or stdin in the length-annotated format, or a
/// family spec with unit lengths. Returns parser warnings alongside.
pub fn load_qgraph(arg: &str) -> Result<(QGraph<i64>, Vec<String>), String> {
    match read_source(arg)? {
        Some(text) => parse_qgraph(&text).map_err(|e| format!("{arg}: {e}")),
        None => load_graph(arg).map(|g| (QGraph::unit(g), Vec::new())),
    }
}

/// Inline JSON, or `@path` to read it from a file.
pub fn json_text(arg: &str) -> Result<String, String> {
    match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| format!("reading {path}: {e}")),
        None => Ok(arg.to_string()),
    }
}

pub fn load_divisor(graph: &MultiGraph, arg: &str) -> Result<Divisor, String> {
    Divisor::parse_json(graph, &json_text(arg)?).map_err(|e| format!("divisor: {e}"))
}

pub fn load_qdivisor(graph: &QGraph<i64>, arg: &str) -> Result<QDivisor<i64>, String> {
    QDivisor::parse_json(graph, &json_text(arg)?).map_err(|e| format!("divisor: {e}"))
}

pub fn is_json_array(arg: &str) -> Result<bool, String> {
    Ok(json_text(arg)?.trim_start().starts_with('['))
}
