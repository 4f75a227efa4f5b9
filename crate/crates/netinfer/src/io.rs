//! Text and CSV file formats.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use netinfer_core::cascade::CoverageRun;
use netinfer_core::eval::RocCurve;
use netinfer_core::sampler::TracePoint;
use netinfer_core::{Activation, Cascade, EdgeMarginals, Graph, Mode, NodeId};

use crate::error::{Error, Result};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Graph read from an edge list, with the dense-to-original id map.
#[derive(Debug, Clone)]
pub struct EdgeList {
    pub graph: Graph,
    /// `original_ids[dense]` is the id used in the file.
    pub original_ids: Vec<u64>,
    pub self_loops: usize,
    pub duplicates: usize,
}

fn data_tokens(line: &str) -> Option<impl Iterator<Item = &str>> {
    let line = line.trim();
    if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
        return None;
    }
    Some(
        line.split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty()),
    )
}

// `# nodes N` fixes the node count and means the ids are already dense.
fn declared_nodes(line: &str) -> Option<usize> {
    let rest = line
        .trim()
        .strip_prefix('#')?
        .trim()
        .strip_prefix("nodes")?;
    rest.trim().parse().ok()
}

/// Parses whitespace-separated `u v` lines. Columns past the second are ignored,
/// as are blank lines and lines starting with `#` or `%`.
///
/// Without a `# nodes N` header, nodes are the ids mentioned, relabeled densely in
/// increasing id order.
pub fn parse_edge_list(text: &str, mode: Mode, path: &Path) -> Result<EdgeList> {
    let mut declared = None;
    let mut pairs = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let lineno = k as u64 + 1;
        if let Some(n) = declared_nodes(line) {
            declared = Some(n);
            continue;
        }
        let Some(mut tokens) = data_tokens(line) else {
            continue;
        };
        let mut id = || -> Result<u64> {
            let tok = tokens
                .next()
                .ok_or_else(|| Error::parse(path, lineno, "expected two node ids"))?;
            tok.parse()
                .map_err(|_| Error::parse(path, lineno, format!("invalid node id {tok:?}")))
        };
        let (u, v) = (id()?, id()?);
        pairs.push((u, v, lineno));
    }

    let original_ids: Vec<u64> = match declared {
        Some(n) => (0..n as u64).collect(),
        None => {
            let mut ids: Vec<u64> = pairs.iter().flat_map(|&(u, v, _)| [u, v]).collect();
            ids.sort_unstable();
            ids.dedup();
            ids
        }
    };
    let dense: HashMap<u64, NodeId> = original_ids
        .iter()
        .enumerate()
        .map(|(d, &o)| (o, d as NodeId))
        .collect();
    let mut graph = Graph::new(original_ids.len(), mode)?;
    let (mut self_loops, mut duplicates) = (0, 0);
    for (u, v, lineno) in pairs {
        if u == v {
            self_loops += 1;
            continue;
        }
        let lookup = |x: u64| {
            dense.get(&x).copied().ok_or_else(|| {
                Error::parse(
                    path,
                    lineno,
                    format!("node {x} outside the declared node count"),
                )
            })
        };
        if !graph.add_edge(lookup(u)?, lookup(v)?)? {
            duplicates += 1;
        }
    }
    Ok(EdgeList {
        graph,
        original_ids,
        self_loops,
        duplicates,
    })
}

pub fn load_edge_list(path: &Path, mode: Mode) -> Result<EdgeList> {
    parse_edge_list(&read_text(path)?, mode, path)
}

/// Writes `u v` lines (`u < v` when undirected) under a `# nodes N` header.
pub fn format_edge_list(g: &Graph) -> String {
    let mode = match g.mode() {
        Mode::Directed => "directed",
        Mode::Undirected => "undirected",
    };
    let mut out = format!(
        "# {mode} graph, {} edges\n# nodes {}\n",
        g.edge_count(),
        g.node_count()
    );
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}").unwrap();
    }
    out
}

pub fn save_edge_list(g: &Graph, path: &Path) -> Result<()> {
    write_text(path, &format_edge_list(g))
}

pub fn save_node_map(original_ids: &[u64], path: &Path) -> Result<()> {
    let mut out = String::from("dense_id,original_id\n");
    for (d, o) in original_ids.iter().enumerate() {
        writeln!(out, "{d},{o}").unwrap();
    }
    write_text(path, &out)
}

/// Reads `node dept` lines (original ids) and returns a department per dense node.
/// Every node of the graph must be labeled; labels for other ids are ignored.
pub fn load_labels(path: &Path, original_ids: &[u64]) -> Result<Vec<u32>> {
    let text = read_text(path)?;
    let dense: HashMap<u64, usize> = original_ids
        .iter()
        .enumerate()
        .map(|(d, &o)| (o, d))
        .collect();
    let mut labels = vec![None; original_ids.len()];
    for (k, line) in text.lines().enumerate() {
        let lineno = k as u64 + 1;
        let Some(tokens) = data_tokens(line) else {
            continue;
        };
        let tokens: Vec<&str> = tokens.collect();
        if tokens.len() < 2 {
            return Err(Error::parse(path, lineno, "expected `node dept`"));
        }
        let node: u64 = tokens[0]
            .parse()
            .map_err(|_| Error::parse(path, lineno, format!("invalid node id {:?}", tokens[0])))?;
        let dept: u32 = tokens[1].parse().map_err(|_| {
            Error::parse(path, lineno, format!("invalid department {:?}", tokens[1]))
        })?;
        if let Some(&d) = dense.get(&node) {
            labels[d] = Some(dept);
        }
    }
    labels
        .into_iter()
        .enumerate()
        .map(|(d, l)| {
            l.ok_or_else(|| {
                Error::Invalid(format!("node {} has no department label", original_ids[d]))
            })
        })
        .collect()
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes())
}

fn field<T: std::str::FromStr>(
    rec: &csv::StringRecord,
    k: usize,
    name: &str,
    path: &Path,
) -> Result<T> {
    let line = rec.position().map_or(0, |p| p.line());
    let raw = rec
        .get(k)
        .ok_or_else(|| Error::parse(path, line, format!("missing {name}")))?;
    raw.parse()
        .map_err(|_| Error::parse(path, line, format!("invalid {name} {raw:?}")))
}

// Records of a headed CSV, skipping the header row if present.
fn records(text: &str, first_column: &str, path: &Path) -> Result<Vec<csv::StringRecord>> {
    let mut out = Vec::new();
    for (k, rec) in csv_reader(text).into_records().enumerate() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::parse(path, line, e.to_string())
        })?;
        if k == 0 && rec.get(0) == Some(first_column) {
            continue;
        }
        if rec.iter().all(str::is_empty) {
            continue;
        }
        out.push(rec);
    }
    Ok(out)
}

/// Parses `cascade_id,node_id,time` rows, grouping by cascade id. Rows of a cascade
/// may appear in any order.
pub fn parse_cascades(text: &str, path: &Path) -> Result<Vec<Cascade>> {
    let mut groups: BTreeMap<u32, Vec<Activation>> = BTreeMap::new();
    for rec in records(text, "cascade_id", path)? {
        let id: u32 = field(&rec, 0, "cascade id", path)?;
        let node: NodeId = field(&rec, 1, "node id", path)?;
        let time: f64 = field(&rec, 2, "time", path)?;
        groups
            .entry(id)
            .or_default()
            .push(Activation::new(node, time));
    }
    Ok(groups
        .into_iter()
        .map(|(id, events)| Cascade::new(id, events))
        .collect::<Result<_, _>>()?)
}

pub fn load_cascades(path: &Path) -> Result<Vec<Cascade>> {
    parse_cascades(&read_text(path)?, path)
}

pub fn format_cascades(cascades: &[Cascade]) -> String {
    let mut out = String::from("cascade_id,node_id,time\n");
    for c in cascades {
        for e in c.events() {
            writeln!(out, "{},{},{}", c.id(), e.node, e.time).unwrap();
        }
    }
    out
}

pub fn save_cascades(cascades: &[Cascade], path: &Path) -> Result<()> {
    write_text(path, &format_cascades(cascades))
}

pub fn format_coverage(run: &CoverageRun, f_target: f64) -> String {
    format!(
        "f_target={f_target}\nachieved_f={}\nreached={}\ncascade_count={}\nsingleton_count={}\nmean_cascade_size={}\n",
        run.achieved_f,
        run.reached,
        run.cascades.len(),
        run.singleton_count(),
        run.mean_cascade_size()
    )
}

/// `i,j,q` rows, one per dyad (`i < j` when undirected).
pub fn format_marginals(m: &EdgeMarginals) -> String {
    let mut out = String::from("i,j,q\n");
    for (i, j, q) in m.iter() {
        writeln!(out, "{i},{j},{q}").unwrap();
    }
    out
}

pub fn save_marginals(m: &EdgeMarginals, path: &Path) -> Result<()> {
    write_text(path, &format_marginals(m))
}

/// Reads `i,j,q` rows for a graph on `n` nodes. Dyads without a row get `q = 0`.
pub fn parse_marginals(text: &str, n: usize, mode: Mode, path: &Path) -> Result<EdgeMarginals> {
    let space = netinfer_core::DyadSpace::new(n, mode);
    let mut q = vec![0.0; space.len()];
    let mut seen = vec![false; space.len()];
    for rec in records(text, "i", path)? {
        let line = rec.position().map_or(0, |p| p.line());
        let i: NodeId = field(&rec, 0, "node i", path)?;
        let j: NodeId = field(&rec, 1, "node j", path)?;
        let value: f64 = field(&rec, 2, "marginal", path)?;
        let d = space.index(i, j).ok_or_else(|| {
            Error::Invalid(format!(
                "{}:{line}: dyad ({i}, {j}) does not fit a {n}-node graph",
                path.display()
            ))
        })?;
        if std::mem::replace(&mut seen[d], true) {
            return Err(Error::parse(
                path,
                line,
                format!("dyad ({i}, {j}) listed twice"),
            ));
        }
        q[d] = value;
    }
    Ok(EdgeMarginals::from_values(n, mode, q)?)
}

pub fn load_marginals(path: &Path, n: usize, mode: Mode) -> Result<EdgeMarginals> {
    parse_marginals(&read_text(path)?, n, mode, path)
}

pub fn format_roc(curve: &RocCurve) -> String {
    let mut out = String::from("threshold,fpr,tpr\n");
    for p in &curve.points {
        writeln!(out, "{},{},{}", p.threshold, p.fpr, p.tpr).unwrap();
    }
    out
}

pub fn format_trace(trace: &[TracePoint]) -> String {
    let mut out = String::from("step,log_posterior,acceptance_rate\n");
    for p in trace {
        writeln!(out, "{},{},{}", p.step, p.log_posterior, p.acceptance_rate).unwrap();
    }
    out
}
