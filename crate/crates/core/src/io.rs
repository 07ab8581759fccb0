//! Graph and partition file formats.
//!
//! Text graph format:
//!
//! ```text
//! n m
//! i j        (m lines, 0-based, i < j, lexicographically sorted)
//! x: 1 -1 …  (optional planted partition)
//! ```
//!
//! The JSON mirror is the serde form of [`Instance`]:
//! `{"n", "edges", "hidden", "seed", "params"}`.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{PccError, Result};
use crate::model::{Graph, Instance, Partition};

/// A graph read from disk, with the planted partition when the file has one.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFile {
    pub graph: Graph,
    pub hidden: Option<Partition>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> PccError {
    PccError::Parse {
        line,
        msg: msg.into(),
    }
}

fn format_labels(x: &Partition) -> String {
    x.labels()
        .iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_labels(s: &str, line: usize) -> Result<Partition> {
    let labels = s
        .split_whitespace()
        .map(|tok| match tok {
            "1" | "+1" => Ok(1i8),
            "-1" => Ok(-1i8),
            other => Err(parse_err(line, format!("label `{other}` is not ±1"))),
        })
        .collect::<Result<Vec<_>>>()?;
    Partition::new(labels)
}

pub fn write_graph_text<W: Write>(mut w: W, graph: &Graph, hidden: Option<&Partition>) -> Result<()> {
    writeln!(w, "{} {}", graph.n(), graph.num_edges())?;
    for &(i, j) in graph.edges() {
        writeln!(w, "{i} {j}")?;
    }
    if let Some(x) = hidden {
        writeln!(w, "x: {}", format_labels(x))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_graph_text<R: Read>(r: R) -> Result<GraphFile> {
    let mut lines = BufReader::new(r).lines().enumerate();
    let (n, m) = loop {
        let Some((no, line)) = lines.next() else {
            return Err(parse_err(1, "missing `n m` header"));
        };
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let mut next = |what: &str| -> Result<usize> {
            parts
                .next()
                .ok_or_else(|| parse_err(no + 1, format!("missing {what}")))?
                .parse()
                .map_err(|e| parse_err(no + 1, format!("bad {what}: {e}")))
        };
        break (next("n")?, next("m")?);
    };
    let mut edges = Vec::with_capacity(m);
    let mut hidden = None;
    for (no, line) in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("x:") {
            if hidden.is_some() {
                return Err(parse_err(no + 1, "duplicate partition line"));
            }
            hidden = Some(parse_labels(rest, no + 1)?);
            continue;
        }
        if hidden.is_some() {
            return Err(parse_err(no + 1, "edge after partition line"));
        }
        let mut parts = line.split_whitespace();
        let mut next = || -> Result<u32> {
            parts
                .next()
                .ok_or_else(|| parse_err(no + 1, "expected `i j`"))?
                .parse()
                .map_err(|e| parse_err(no + 1, format!("bad vertex: {e}")))
        };
        let (i, j) = (next()?, next()?);
        if parts.next().is_some() {
            return Err(parse_err(no + 1, "trailing tokens"));
        }
        if i >= j || j as usize >= n {
            return Err(parse_err(no + 1, format!("edge ({i}, {j}) needs i < j < n")));
        }
        if edges.last().is_some_and(|&last| last >= (i, j)) {
            return Err(parse_err(no + 1, "edges must be sorted and unique"));
        }
        edges.push((i, j));
    }
    if edges.len() != m {
        return Err(parse_err(1, format!("header says {m} edges, found {}", edges.len())));
    }
    if let Some(x) = &hidden {
        if x.len() != n {
            return Err(PccError::DimensionMismatch {
                expected: n,
                got: x.len(),
            });
        }
    }
    let graph = Graph::from_edges(n, edges.into_iter().map(|(i, j)| (i as usize, j as usize)))?;
    Ok(GraphFile { graph, hidden })
}

pub fn instance_to_json(inst: &Instance) -> Result<String> {
    Ok(serde_json::to_string(inst)?)
}

pub fn instance_from_json(s: &str) -> Result<Instance> {
    let inst: Instance = serde_json::from_str(s)?;
    inst.graph.validate()?;
    if inst.hidden.len() != inst.graph.n() {
        return Err(PccError::DimensionMismatch {
            expected: inst.graph.n(),
            got: inst.hidden.len(),
        });
    }
    Ok(inst)
}

/// Write the text format, or the JSON mirror when the path ends in `.json`.
pub fn save_instance(path: &Path, inst: &Instance) -> Result<()> {
    if is_json(path) {
        fs::write(path, instance_to_json(inst)? + "\n")?;
    } else {
        let f = fs::File::create(path)?;
        write_graph_text(std::io::BufWriter::new(f), &inst.graph, Some(&inst.hidden))?;
    }
    Ok(())
}

/// Read either format; JSON is recognized by extension or a leading `{`.
pub fn load_graph(path: &Path) -> Result<GraphFile> {
    let text = fs::read_to_string(path)?;
    if is_json(path) || text.trim_start().starts_with('{') {
        let inst = instance_from_json(&text)?;
        Ok(GraphFile {
            graph: inst.graph,
            hidden: Some(inst.hidden),
        })
    } else {
        read_graph_text(text.as_bytes())
    }
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// A partition file holds a single line of ±1 labels (an `x:` prefix is allowed).
pub fn read_partition(path: &Path) -> Result<Partition> {
    let text = fs::read_to_string(path)?;
    let line = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .ok_or_else(|| parse_err(1, "empty partition file"))?;
    parse_labels(line.strip_prefix("x:").unwrap_or(line), 1)
}

pub fn write_partition(path: &Path, x: &Partition) -> Result<()> {
    fs::write(path, format_labels(x) + "\n")?;
    Ok(())
}
