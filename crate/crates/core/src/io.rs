//! Text formats: edge lists, pair lists, fit files and truth files.
//!
//! Fit file layout (`gsbm-fit v1`):
//!
//! ```text
//! gsbm-fit v1 n=<n>
//! [config]          key,value rows of the solver configuration
//! [meta]            iterations, converged, radius
//! [labels]          one node label per line, index order
//! [l_hat]           n rows of n comma-separated values
//! [s_hat]           n rows of n comma-separated values
//! [trace] len=<m>   m objective values, one per line
//! [end]
//! ```
//!
//! Floats are written in shortest round-trip decimal form, so loading a saved
//! fit reproduces every entry bit for bit.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{GsbmError, Result};
use crate::linalg::{DenseMatrix, SymMatrix};
use crate::sim::{GroundTruth, OutlierConfig, SbmConfig};
use crate::solver::{FitResult, SolverConfig};

pub const FIT_MAGIC: &str = "gsbm-fit";
pub const FIT_VERSION: &str = "v1";

/// Adjacency and mask of an observed network.
///
/// Both matrices are symmetric 0/1 with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedGraph {
    pub n: usize,
    pub a: SymMatrix,
    pub omega: SymMatrix,
    /// Original label of each index.
    pub labels: Vec<String>,
    pub warnings: Vec<String>,
}

impl ObservedGraph {
    /// Fully observed graph from an adjacency matrix, labelled `0..n`.
    pub fn fully_observed(a: SymMatrix) -> Self {
        let n = a.n();
        ObservedGraph {
            n,
            omega: full_mask(n),
            a,
            labels: (0..n).map(|i| i.to_string()).collect(),
            warnings: Vec::new(),
        }
    }

    pub fn edge_count(&self) -> usize {
        upper_pairs(&self.a).count()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n)
            .map(|i| self.a.row(i).iter().filter(|&&x| x != 0.0).count())
            .collect()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Replaces the mask, warning about edges on unobserved dyads.
    pub fn with_mask(mut self, omega: SymMatrix) -> Result<Self> {
        if omega.n() != self.n {
            return Err(GsbmError::shape(format!("{0}x{0}", self.n), format!("{0}x{0}", omega.n())));
        }
        let hidden = upper_pairs(&self.a).filter(|&(i, j)| omega.get(i, j) == 0.0).count();
        if hidden > 0 {
            self.warnings.push(format!("{hidden} edge(s) lie on unobserved dyads"));
        }
        self.omega = omega;
        Ok(self)
    }

    /// Indices of the largest connected component (ties go to the component
    /// with the smallest index), ascending.
    pub fn largest_component(&self) -> Vec<usize> {
        let n = self.n;
        let mut comp = vec![usize::MAX; n];
        let mut best: Vec<usize> = Vec::new();
        for root in 0..n {
            if comp[root] != usize::MAX {
                continue;
            }
            comp[root] = root;
            let mut members = vec![root];
            let mut head = 0;
            while head < members.len() {
                let u = members[head];
                head += 1;
                for (v, &x) in self.a.row(u).iter().enumerate() {
                    if x != 0.0 && comp[v] == usize::MAX {
                        comp[v] = root;
                        members.push(v);
                    }
                }
            }
            if members.len() > best.len() {
                best = members;
            }
        }
        best.sort_unstable();
        best
    }

    /// Induced subgraph on `keep` (indices in the given order).
    pub fn subgraph(&self, keep: &[usize]) -> Result<Self> {
        if let Some(&bad) = keep.iter().find(|&&i| i >= self.n) {
            return Err(GsbmError::Input(format!("node {bad} out of range for {} nodes", self.n)));
        }
        let m = keep.len();
        let a = SymMatrix::from_upper(m, |i, j| self.a.get(keep[i], keep[j]));
        let omega = SymMatrix::from_upper(m, |i, j| self.omega.get(keep[i], keep[j]));
        Ok(ObservedGraph {
            n: m,
            a,
            omega,
            labels: keep.iter().map(|&i| self.labels[i].clone()).collect(),
            warnings: self.warnings.clone(),
        })
    }

    /// Restriction to the largest connected component.
    pub fn largest_component_graph(&self) -> Self {
        let keep = self.largest_component();
        let mut g = self.subgraph(&keep).expect("component indices are in range");
        if keep.len() < self.n {
            g.warnings
                .push(format!("kept largest component: {} of {} nodes", keep.len(), self.n));
        }
        g
    }
}

fn full_mask(n: usize) -> SymMatrix {
    SymMatrix::from_upper(n, |i, j| if i == j { 0.0 } else { 1.0 })
}

fn upper_pairs(m: &SymMatrix) -> impl Iterator<Item = (usize, usize)> + '_ {
    let n = m.n();
    (0..n).flat_map(move |i| (i + 1..n).filter(move |&j| m.get(i, j) != 0.0).map(move |j| (i, j)))
}

/// Significant tokens of each line, with 1-based line numbers.
fn tokens(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(k, line)| {
        let body = line.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        (!toks.is_empty()).then_some((k + 1, toks))
    })
}

fn pair_tokens<'a>(line: usize, toks: &[&'a str]) -> Result<(&'a str, &'a str)> {
    match toks {
        [u, v] => Ok((u, v)),
        _ => Err(GsbmError::Parse {
            line,
            msg: format!("expected 2 tokens, found {}", toks.len()),
        }),
    }
}

/// Parses an undirected edge list; every dyad is observed.
///
/// Labels get indices in first-appearance order. Repeated edges (in either
/// direction) collapse; self-loops are dropped with a warning.
pub fn parse_edge_list(text: &str) -> Result<ObservedGraph> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut self_loops = 0usize;
    let mut intern = |label: &str| -> usize {
        *index.entry(label.to_string()).or_insert_with(|| {
            labels.push(label.to_string());
            labels.len() - 1
        })
    };
    for (line, toks) in tokens(text) {
        let (u, v) = pair_tokens(line, &toks)?;
        let (i, j) = (intern(u), intern(v));
        if i == j {
            self_loops += 1;
        } else {
            edges.push((i.min(j), i.max(j)));
        }
    }
    let n = labels.len();
    let mut a = SymMatrix::zeros(n);
    for (i, j) in edges {
        a.set_sym(i, j, 1.0);
    }
    let mut warnings = Vec::new();
    if self_loops > 0 {
        warnings.push(format!("dropped {self_loops} self-loop(s)"));
    }
    Ok(ObservedGraph {
        n,
        a,
        omega: full_mask(n),
        labels,
        warnings,
    })
}

/// How a pair list defines the mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskMode {
    /// Listed pairs are the observed dyads.
    Observed,
    /// Listed pairs are the unobserved dyads; all others are observed.
    Missing,
}

impl std::str::FromStr for MaskMode {
    type Err = GsbmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "observed" => Ok(MaskMode::Observed),
            "missing" => Ok(MaskMode::Missing),
            other => Err(GsbmError::Config(format!("unknown mask mode `{other}`"))),
        }
    }
}

fn build_mask(pairs: &[(usize, usize)], n: usize, mode: MaskMode) -> SymMatrix {
    let (listed, rest) = match mode {
        MaskMode::Observed => (1.0, 0.0),
        MaskMode::Missing => (0.0, 1.0),
    };
    let mut omega = SymMatrix::from_upper(n, |i, j| if i == j { 0.0 } else { rest });
    for &(i, j) in pairs {
        if i != j {
            omega.set_sym(i, j, listed);
        }
    }
    omega
}

/// Parses a pair list of 0-based indices into a mask.
pub fn parse_mask(text: &str, n: usize, mode: MaskMode) -> Result<SymMatrix> {
    let mut pairs = Vec::new();
    for (line, toks) in tokens(text) {
        let (u, v) = pair_tokens(line, &toks)?;
        let parse = |t: &str| -> Result<usize> {
            let i: usize = t.parse().map_err(|_| GsbmError::Parse {
                line,
                msg: format!("`{t}` is not a node index"),
            })?;
            if i >= n {
                return Err(GsbmError::Parse {
                    line,
                    msg: format!("index {i} out of range for {n} nodes"),
                });
            }
            Ok(i)
        };
        pairs.push((parse(u)?, parse(v)?));
    }
    Ok(build_mask(&pairs, n, mode))
}

/// Parses a pair list whose tokens are node labels of `graph`.
pub fn parse_mask_labels(text: &str, graph: &ObservedGraph, mode: MaskMode) -> Result<SymMatrix> {
    let index: HashMap<&str, usize> = graph.labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut pairs = Vec::new();
    for (line, toks) in tokens(text) {
        let (u, v) = pair_tokens(line, &toks)?;
        let look = |t: &str| {
            index.get(t).copied().ok_or_else(|| GsbmError::Parse {
                line,
                msg: format!("unknown node `{t}`"),
            })
        };
        pairs.push((look(u)?, look(v)?));
    }
    Ok(build_mask(&pairs, graph.n, mode))
}

/// One `u v` line per edge (upper triangle, row-major), using `labels`.
pub fn write_edge_list(a: &SymMatrix, labels: &[String]) -> String {
    let mut out = String::new();
    for (i, j) in upper_pairs(a) {
        let _ = writeln!(out, "{} {}", labels[i], labels[j]);
    }
    out
}

/// One `u v` line per pair.
pub fn write_pair_list(pairs: &[(usize, usize)], labels: &[String]) -> String {
    let mut out = String::new();
    for &(i, j) in pairs {
        let _ = writeln!(out, "{} {}", labels[i], labels[j]);
    }
    out
}

/// Ground-truth summary written next to generated graphs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthFile {
    pub n: usize,
    pub seed: u64,
    pub sbm: SbmConfig,
    pub outlier_config: OutlierConfig,
    /// Community per node; `None` for outliers.
    pub communities: Vec<Option<usize>>,
    pub outliers: Vec<usize>,
    pub outlier_communities: Vec<Vec<usize>>,
    pub p_observe: f64,
}

impl TruthFile {
    pub fn new(truth: &GroundTruth, seed: u64, p_observe: f64) -> Self {
        let mut communities: Vec<Option<usize>> = truth.communities.iter().map(|&c| Some(c)).collect();
        communities.resize(truth.n(), None);
        TruthFile {
            n: truth.n(),
            seed,
            sbm: truth.sbm,
            outlier_config: truth.outlier_config,
            communities,
            outliers: truth.outliers.clone(),
            outlier_communities: truth.outlier_communities.clone(),
            p_observe,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("truth file serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| GsbmError::Parse {
            line: e.line(),
            msg: e.to_string(),
        })
    }
}

/// Writes `contents` to a sibling temporary file, then renames it over `path`.
pub fn atomic_write(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile_in(dir, path)?;
    let result = (|| {
        tmp.1.write_all(contents)?;
        tmp.1.sync_all()?;
        std::fs::rename(&tmp.0, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp.0);
    }
    result.map_err(GsbmError::from)
}

fn tempfile_in(dir: &Path, target: &Path) -> Result<(std::path::PathBuf, std::fs::File)> {
    let stem = target.file_name().and_then(|s| s.to_str()).unwrap_or("out");
    for attempt in 0..100u32 {
        let candidate = dir.join(format!(".{stem}.{}.{attempt}.tmp", std::process::id()));
        match std::fs::OpenOptions::new().write(true).create_new(true).open(&candidate) {
            Ok(f) => return Ok((candidate, f)),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(GsbmError::Io(format!("cannot create a temporary file in {}", dir.display())))
}

fn write_matrix(out: &mut String, m: &DenseMatrix) {
    for i in 0..m.n_rows() {
        let row = m.row(i);
        for (j, x) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{x}");
        }
        out.push('\n');
    }
}

/// Renders a fit in the `gsbm-fit v1` format.
pub fn fit_to_string(fit: &FitResult) -> String {
    let n = fit.n();
    let c = &fit.config;
    let mut out = format!("{FIT_MAGIC} {FIT_VERSION} n={n}\n[config]\n");
    let _ = writeln!(out, "lambda1,{}", c.lambda1);
    let _ = writeln!(out, "lambda2,{}", c.lambda2);
    let _ = writeln!(out, "epsilon,{}", c.epsilon);
    let _ = writeln!(out, "eta,{}", c.eta);
    let _ = writeln!(out, "max_iters,{}", c.max_iters);
    let _ = writeln!(out, "rel_tol,{}", c.rel_tol);
    let _ = writeln!(out, "svd_tol,{}", c.svd_tol);
    let _ = writeln!(out, "svd_max_iter,{}", c.svd_max_iter);
    out.push_str("[meta]\n");
    let _ = writeln!(out, "iterations,{}", fit.iterations);
    let _ = writeln!(out, "converged,{}", fit.converged);
    let _ = writeln!(out, "radius,{}", fit.radius);
    out.push_str("[labels]\n");
    for l in &fit.labels {
        out.push_str(l);
        out.push('\n');
    }
    out.push_str("[l_hat]\n");
    write_matrix(&mut out, fit.l_hat.as_dense());
    out.push_str("[s_hat]\n");
    write_matrix(&mut out, &fit.s_hat);
    let _ = writeln!(out, "[trace] len={}", fit.objective_trace.len());
    for v in &fit.objective_trace {
        let _ = writeln!(out, "{v}");
    }
    out.push_str("[end]\n");
    out
}

struct Reader<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Reader<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.lines
            .next()
            .map(|(k, l)| (k + 1, l))
            .ok_or_else(|| GsbmError::Truncated(format!("file ends before {what}")))
    }

    fn expect(&mut self, header: &str) -> Result<()> {
        let (line, text) = self.next(header)?;
        if text.trim_end() == header {
            Ok(())
        } else {
            Err(GsbmError::Parse {
                line,
                msg: format!("expected `{header}`, found `{text}`"),
            })
        }
    }

    fn key_value(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (line, text) = self.next(key)?;
        match text.split_once(',') {
            Some((k, v)) if k == key => Ok((line, v.trim())),
            _ => Err(GsbmError::Parse {
                line,
                msg: format!("expected `{key},<value>`, found `{text}`"),
            }),
        }
    }

    fn value<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let (line, v) = self.key_value(key)?;
        v.parse().map_err(|_| GsbmError::Parse {
            line,
            msg: format!("bad value `{v}` for {key}"),
        })
    }

    fn matrix(&mut self, n: usize, what: &str) -> Result<DenseMatrix> {
        let mut data = Vec::with_capacity(n * n);
        for _ in 0..n {
            let (line, text) = self.next(what)?;
            let before = data.len();
            for tok in text.split(',') {
                data.push(parse_f64(tok, line)?);
            }
            if data.len() - before != n {
                return Err(GsbmError::Parse {
                    line,
                    msg: format!("{what} row has {} entries, expected {n}", data.len() - before),
                });
            }
        }
        DenseMatrix::from_vec(n, n, data)
    }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.trim().parse().map_err(|_| GsbmError::Parse {
        line,
        msg: format!("`{tok}` is not a number"),
    })
}

/// Parses the `gsbm-fit v1` format.
pub fn fit_from_str(text: &str) -> Result<FitResult> {
    let mut r = Reader {
        lines: text.lines().enumerate(),
    };
    let (_, header) = r.next("header").map_err(|_| GsbmError::Truncated("empty fit file".into()))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(FIT_MAGIC) {
        return Err(GsbmError::Parse {
            line: 1,
            msg: format!("not a fit file: `{header}`"),
        });
    }
    match parts.next() {
        Some(FIT_VERSION) => {}
        other => {
            return Err(GsbmError::Version(format!(
                "unsupported fit file version `{}` (expected {FIT_VERSION})",
                other.unwrap_or("")
            )))
        }
    }
    let n: usize = parts
        .next()
        .and_then(|t| t.strip_prefix("n="))
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| GsbmError::Parse {
            line: 1,
            msg: "header lacks `n=<count>`".into(),
        })?;

    r.expect("[config]")?;
    let config = SolverConfig {
        lambda1: r.value("lambda1")?,
        lambda2: r.value("lambda2")?,
        epsilon: r.value("epsilon")?,
        eta: r.value("eta")?,
        max_iters: r.value("max_iters")?,
        rel_tol: r.value("rel_tol")?,
        svd_tol: r.value("svd_tol")?,
        svd_max_iter: r.value("svd_max_iter")?,
    };
    r.expect("[meta]")?;
    let iterations: usize = r.value("iterations")?;
    let converged: bool = r.value("converged")?;
    let radius: f64 = r.value("radius")?;

    r.expect("[labels]")?;
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        labels.push(r.next("labels")?.1.to_string());
    }
    r.expect("[l_hat]")?;
    let l_hat = SymMatrix::try_from_dense(r.matrix(n, "l_hat")?)?;
    r.expect("[s_hat]")?;
    let s_hat = r.matrix(n, "s_hat")?;

    let (line, trace_header) = r.next("[trace]")?;
    let len: usize = trace_header
        .strip_prefix("[trace] len=")
        .and_then(|t| t.trim().parse().ok())
        .ok_or_else(|| GsbmError::Parse {
            line,
            msg: format!("expected `[trace] len=<m>`, found `{trace_header}`"),
        })?;
    let mut objective_trace = Vec::with_capacity(len);
    for _ in 0..len {
        let (line, text) = r.next("trace")?;
        objective_trace.push(parse_f64(text, line)?);
    }
    r.expect("[end]")?;

    Ok(FitResult {
        l_hat,
        s_hat,
        radius,
        objective_trace,
        iterations,
        converged,
        config,
        labels,
        steps: Vec::new(),
    })
}

pub fn save_fit(fit: &FitResult, path: &Path) -> Result<()> {
    atomic_write(path, fit_to_string(fit).as_bytes())
}

pub fn load_fit(path: &Path) -> Result<FitResult> {
    fit_from_str(&std::fs::read_to_string(path)?)
}
