//! Weighted directed graphs in CSR form, with edge-list loading and
//! diffusion-model weight preparation.
//!
//! Vertex ids are dense `[0, n)`; original labels from the input file are kept
//! for report emission. Forward and reverse adjacency describe the same edge
//! multiset, and the reverse view reads weights through the canonical edge
//! index so the two can never disagree.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{keyed_rng, stream};

/// Diffusion model a graph's weights are prepared for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    IndependentCascade,
    LinearThreshold,
}

impl Model {
    pub fn parse(s: &str) -> Result<Model> {
        match s.to_ascii_lowercase().as_str() {
            "ic" => Ok(Model::IndependentCascade),
            "lt" => Ok(Model::LinearThreshold),
            other => Err(Error::Parameter(format!("unknown model '{other}', expected ic|lt"))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Model::IndependentCascade => "ic",
            Model::LinearThreshold => "lt",
        }
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parsed edge list with vertex ids already remapped to a dense range.
#[derive(Debug, Clone)]
pub struct EdgeList {
    pub n: usize,
    /// (src, dst, optional weight), in input order; both directions are
    /// present for undirected inputs.
    pub edges: Vec<(u32, u32, Option<f64>)>,
    /// Dense id -> original label.
    pub labels: Vec<u64>,
}

/// Read an edge list from a text file. Lines are `src dst [weight]`,
/// `#`-prefixed lines are comments.
pub fn load_edge_list(path: &Path, directed: bool) -> Result<EdgeList> {
    let file = File::open(path)?;
    parse_edge_list(BufReader::new(file), directed)
}

pub fn parse_edge_list(reader: impl BufRead, directed: bool) -> Result<EdgeList> {
    let mut remap: HashMap<u64, u32> = HashMap::new();
    let mut labels: Vec<u64> = Vec::new();
    let mut edges: Vec<(u32, u32, Option<f64>)> = Vec::new();

    let mut intern = |label: u64, labels: &mut Vec<u64>| -> u32 {
        *remap.entry(label).or_insert_with(|| {
            labels.push(label);
            (labels.len() - 1) as u32
        })
    };

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let src: u64 = fields
            .next()
            .unwrap()
            .parse()
            .map_err(|_| Error::parse(lineno, "source is not an integer"))?;
        let dst: u64 = fields
            .next()
            .ok_or_else(|| Error::parse(lineno, "missing destination"))?
            .parse()
            .map_err(|_| Error::parse(lineno, "destination is not an integer"))?;
        let weight = match fields.next() {
            None => None,
            Some(w) => {
                let w: f64 = w
                    .parse()
                    .map_err(|_| Error::parse(lineno, "weight is not a number"))?;
                if !(0.0..=1.0).contains(&w) {
                    return Err(Error::parse(lineno, format!("weight {w} outside [0, 1]")));
                }
                Some(w)
            }
        };
        if fields.next().is_some() {
            return Err(Error::parse(lineno, "trailing fields"));
        }
        let s = intern(src, &mut labels);
        let d = intern(dst, &mut labels);
        edges.push((s, d, weight));
        if !directed && s != d {
            edges.push((d, s, weight));
        }
    }

    if edges.is_empty() {
        return Err(Error::EmptyInput("edge list holds no edges".into()));
    }
    Ok(EdgeList { n: labels.len(), edges, labels })
}

/// Immutable weighted directed graph.
///
/// The canonical edge index is the forward-CSR slot; `weights` is indexed by
/// it, and the reverse adjacency references it, so both views share one
/// weight store. Weights may be unassigned (NaN) until [`Graph::prepare_weights`]
/// runs; sampling and diffusion refuse to operate on an unprepared graph.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    fwd_off: Vec<usize>,
    fwd_to: Vec<u32>,
    /// Per canonical edge; NaN while unassigned.
    weights: Vec<f64>,
    rev_off: Vec<usize>,
    rev_to: Vec<u32>,
    rev_eidx: Vec<u32>,
    /// Incoming weight sums, valid once prepared.
    rev_wsum: Vec<f64>,
    labels: Vec<u64>,
    prepared: Option<Model>,
}

impl Graph {
    /// Build adjacency from a dense edge list. Duplicate edges are kept as
    /// parallel edges.
    pub fn from_edge_list(list: EdgeList) -> Graph {
        let n = list.n;
        let m = list.edges.len();
        let mut fwd_off = vec![0usize; n + 1];
        for &(s, _, _) in &list.edges {
            fwd_off[s as usize + 1] += 1;
        }
        for i in 0..n {
            fwd_off[i + 1] += fwd_off[i];
        }
        let mut cursor = fwd_off.clone();
        let mut fwd_to = vec![0u32; m];
        let mut weights = vec![f64::NAN; m];
        for &(s, d, w) in &list.edges {
            let slot = cursor[s as usize];
            cursor[s as usize] += 1;
            fwd_to[slot] = d;
            weights[slot] = w.unwrap_or(f64::NAN);
        }

        let mut rev_off = vec![0usize; n + 1];
        for &d in &fwd_to {
            rev_off[d as usize + 1] += 1;
        }
        for i in 0..n {
            rev_off[i + 1] += rev_off[i];
        }
        let mut cursor = rev_off.clone();
        let mut rev_to = vec![0u32; m];
        let mut rev_eidx = vec![0u32; m];
        #[allow(clippy::needless_range_loop)] // eidx is the canonical edge id
        for src in 0..n {
            for eidx in fwd_off[src]..fwd_off[src + 1] {
                let dst = fwd_to[eidx] as usize;
                let slot = cursor[dst];
                cursor[dst] += 1;
                rev_to[slot] = src as u32;
                rev_eidx[slot] = eidx as u32;
            }
        }

        let mut labels = list.labels;
        if labels.len() < n {
            labels = (0..n as u64).collect();
        }

        Graph {
            n,
            fwd_off,
            fwd_to,
            weights,
            rev_off,
            rev_to,
            rev_eidx,
            rev_wsum: vec![0.0; n],
            labels,
            prepared: None,
        }
    }

    /// Convenience: a fully weighted, prepared graph from explicit edges.
    pub fn prepared_from_edges(n: usize, edges: &[(u32, u32, f64)], model: Model) -> Result<Graph> {
        let list = EdgeList {
            n,
            edges: edges.iter().map(|&(s, d, w)| (s, d, Some(w))).collect(),
            labels: (0..n as u64).collect(),
        };
        Graph::from_edge_list(list).prepare_weights(model, 0.0, 0.0, 0)
    }

    /// Assign missing edge weights uniformly from `[lo, hi]`, then enforce the
    /// model's constraints. For the linear-threshold model every vertex's
    /// incoming weights are divided by `max(1, incoming sum)`; weights are
    /// never scaled up. Deterministic in `(seed, canonical edge index)`.
    pub fn prepare_weights(mut self, model: Model, lo: f64, hi: f64, seed: u64) -> Result<Graph> {
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return Err(Error::Parameter(format!(
                "weight range [{lo}, {hi}] must satisfy 0 <= lo <= hi <= 1"
            )));
        }
        for (eidx, w) in self.weights.iter_mut().enumerate() {
            if w.is_nan() {
                let u: f64 = keyed_rng(seed, stream::EDGE_WEIGHT, eidx as u64).gen();
                *w = lo + u * (hi - lo);
            }
        }
        if model == Model::LinearThreshold {
            let mut insum = vec![0.0f64; self.n];
            #[allow(clippy::needless_range_loop)] // v indexes the CSR offsets too
            for v in 0..self.n {
                for slot in self.rev_off[v]..self.rev_off[v + 1] {
                    insum[v] += self.weights[self.rev_eidx[slot] as usize];
                }
            }
            #[allow(clippy::needless_range_loop)]
            for v in 0..self.n {
                if insum[v] > 1.0 {
                    let scale = 1.0 / insum[v];
                    for slot in self.rev_off[v]..self.rev_off[v + 1] {
                        self.weights[self.rev_eidx[slot] as usize] *= scale;
                    }
                }
            }
        }
        for v in 0..self.n {
            let mut sum = 0.0;
            for slot in self.rev_off[v]..self.rev_off[v + 1] {
                sum += self.weights[self.rev_eidx[slot] as usize];
            }
            self.rev_wsum[v] = sum;
        }
        self.prepared = Some(model);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.fwd_to.len()
    }

    pub fn model(&self) -> Option<Model> {
        self.prepared
    }

    pub fn require_prepared(&self, model: Model) -> Result<()> {
        if self.prepared != Some(model) {
            return Err(Error::State(format!(
                "graph is not prepared for model {model} (prepared: {:?})",
                self.prepared.map(|m| m.as_str())
            )));
        }
        Ok(())
    }

    /// Out-neighbors of `v` with edge weights.
    pub fn out_edges(&self, v: u32) -> impl Iterator<Item = (u32, f64)> + '_ {
        let range = self.fwd_off[v as usize]..self.fwd_off[v as usize + 1];
        range.map(move |slot| (self.fwd_to[slot], self.weights[slot]))
    }

    /// In-neighbors of `v` with edge weights.
    pub fn in_edges(&self, v: u32) -> impl Iterator<Item = (u32, f64)> + '_ {
        let range = self.rev_off[v as usize]..self.rev_off[v as usize + 1];
        range.map(move |slot| (self.rev_to[slot], self.weights[self.rev_eidx[slot] as usize]))
    }

    pub fn in_degree(&self, v: u32) -> usize {
        self.rev_off[v as usize + 1] - self.rev_off[v as usize]
    }

    pub fn out_degree(&self, v: u32) -> usize {
        self.fwd_off[v as usize + 1] - self.fwd_off[v as usize]
    }

    /// Sum of incoming edge weights (valid once prepared).
    pub fn in_weight_sum(&self, v: u32) -> f64 {
        self.rev_wsum[v as usize]
    }

    pub fn label(&self, v: u32) -> u64 {
        self.labels[v as usize]
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    const CACHE_MAGIC: &'static [u8; 5] = b"GIRI1";

    /// Write the binary cache: magic, little-endian u64 n and edge count, then
    /// the CSR arrays (u64 offsets, u32 targets, f64 weights, u64 labels) and
    /// a trailing preparation marker.
    pub fn save_cache(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(Self::CACHE_MAGIC)?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        w.write_all(&(self.edge_count() as u64).to_le_bytes())?;
        for &off in &self.fwd_off {
            w.write_all(&(off as u64).to_le_bytes())?;
        }
        for &t in &self.fwd_to {
            w.write_all(&t.to_le_bytes())?;
        }
        for &wt in &self.weights {
            w.write_all(&wt.to_le_bytes())?;
        }
        for &l in &self.labels {
            w.write_all(&l.to_le_bytes())?;
        }
        let marker = match self.prepared {
            None => 0u8,
            Some(Model::IndependentCascade) => 1,
            Some(Model::LinearThreshold) => 2,
        };
        w.write_all(&[marker])?;
        w.flush()?;
        Ok(())
    }

    /// Load a graph written by [`Graph::save_cache`].
    pub fn load_cache(path: &Path) -> Result<Graph> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic)?;
        if &magic != Self::CACHE_MAGIC {
            return Err(Error::Format("bad magic bytes".into()));
        }
        let n = read_u64(&mut r)? as usize;
        let m = read_u64(&mut r)? as usize;
        let mut fwd_off = Vec::with_capacity(n + 1);
        for _ in 0..=n {
            fwd_off.push(read_u64(&mut r)? as usize);
        }
        if fwd_off.last() != Some(&m) {
            return Err(Error::Format("offset array does not close at edge count".into()));
        }
        let mut fwd_to = Vec::with_capacity(m);
        for _ in 0..m {
            fwd_to.push(read_u32(&mut r)?);
        }
        let mut weights = Vec::with_capacity(m);
        for _ in 0..m {
            weights.push(read_f64(&mut r)?);
        }
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            labels.push(read_u64(&mut r)?);
        }
        let mut marker = [0u8; 1];
        r.read_exact(&mut marker)?;
        let prepared = match marker[0] {
            0 => None,
            1 => Some(Model::IndependentCascade),
            2 => Some(Model::LinearThreshold),
            other => return Err(Error::Format(format!("unknown preparation marker {other}"))),
        };

        // Rebuild the edge list in canonical order and rerun construction.
        let mut edges = Vec::with_capacity(m);
        for src in 0..n {
            for slot in fwd_off[src]..fwd_off[src + 1] {
                let w = weights[slot];
                edges.push((src as u32, fwd_to[slot], if w.is_nan() { None } else { Some(w) }));
            }
        }
        let mut g = Graph::from_edge_list(EdgeList { n, edges, labels });
        if let Some(model) = prepared {
            // Weights are already model-feasible; re-preparing only refreshes sums.
            g = g.prepare_weights(model, 0.0, 0.0, 0)?;
        }
        Ok(g)
    }
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}
