//! Sparse directed and bipartite graph types plus their TSV loaders.
//!
//! Node labels are arbitrary strings interned to dense ids in first-seen
//! order; every algorithm works on ids and the CLI maps ids back to labels.
//! Adjacency is stored in compressed sparse row (CSR) form: `row_ptr` offsets
//! into parallel `col_idx`/`weights` arrays, neighbors sorted per row.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};

use crate::error::{Error, Result};

/// Dense node identifier, contiguous in `0..node_count`.
pub type NodeId = usize;

/// Weighted sparse directed graph with interned string labels.
///
/// Invariants: all stored weights are strictly positive (zero-weight edges
/// are dropped at load), ids are contiguous, and duplicate `(source, target)`
/// pairs have been merged by weight summation.
#[derive(Debug, Clone)]
pub struct DirectedGraph {
    row_ptr: Vec<usize>,
    col_idx: Vec<NodeId>,
    weights: Vec<f64>,
    in_strength: Vec<f64>,
    labels: Vec<String>,
    label_to_id: HashMap<String, NodeId>,
}

/// Options for [`load_directed_graph`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Mirror every edge `a -> b` as `b -> a`, building an undirected graph
    /// out of explicit symmetric pairs.
    pub undirected: bool,
}

/// Accumulates labeled edges and produces a [`DirectedGraph`].
#[derive(Debug, Default)]
pub struct GraphBuilder {
    labels: Vec<String>,
    label_to_id: HashMap<String, NodeId>,
    edges: Vec<(NodeId, NodeId, f64)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Interns `label`, assigning the next dense id on first sight.
    pub fn intern(&mut self, label: &str) -> NodeId {
        if let Some(&id) = self.label_to_id.get(label) {
            return id;
        }
        let id = self.labels.len();
        self.labels.push(label.to_owned());
        self.label_to_id.insert(label.to_owned(), id);
        id
    }

    /// Adds one directed edge; zero-weight edges are dropped silently.
    ///
    /// Panics on negative or non-finite weights — the TSV loaders reject
    /// those with proper errors before they reach the builder.
    pub fn add_edge(&mut self, source: &str, target: &str, weight: f64) {
        assert!(
            weight >= 0.0 && weight.is_finite(),
            "edge weight must be finite and non-negative, got {weight}"
        );
        let s = self.intern(source);
        let t = self.intern(target);
        if weight != 0.0 {
            self.edges.push((s, t, weight));
        }
    }

    /// Registers a node that may have no edges at all.
    pub fn add_node(&mut self, label: &str) {
        self.intern(label);
    }

    /// Merges duplicates, sorts adjacency, and freezes the graph.
    pub fn build(self) -> DirectedGraph {
        let n = self.labels.len();
        let mut edges = self.edges;
        edges.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<(NodeId, NodeId, f64)> = Vec::with_capacity(edges.len());
        for (s, t, w) in edges {
            match merged.last_mut() {
                Some((ps, pt, pw)) if *ps == s && *pt == t => *pw += w,
                _ => merged.push((s, t, w)),
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        for &(s, _, _) in &merged {
            row_ptr[s + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let col_idx: Vec<NodeId> = merged.iter().map(|e| e.1).collect();
        let weights: Vec<f64> = merged.iter().map(|e| e.2).collect();
        let mut in_strength = vec![0.0; n];
        for &(_, t, w) in &merged {
            in_strength[t] += w;
        }
        DirectedGraph {
            row_ptr,
            col_idx,
            weights,
            in_strength,
            labels: self.labels,
            label_to_id: self.label_to_id,
        }
    }
}

impl DirectedGraph {
    /// Builds a graph from labeled edge triples; convenient in tests.
    pub fn from_edges<S, I>(edges: I) -> Self
    where
        S: AsRef<str>,
        I: IntoIterator<Item = (S, S, f64)>,
    {
        let mut b = GraphBuilder::new();
        for (s, t, w) in edges {
            b.add_edge(s.as_ref(), t.as_ref(), w);
        }
        b.build()
    }

    /// Builds an undirected graph: every pair is inserted in both directions.
    pub fn from_undirected_edges<S, I>(edges: I) -> Self
    where
        S: AsRef<str>,
        I: IntoIterator<Item = (S, S, f64)>,
    {
        let mut b = GraphBuilder::new();
        for (s, t, w) in edges {
            b.add_edge(s.as_ref(), t.as_ref(), w);
            b.add_edge(t.as_ref(), s.as_ref(), w);
        }
        b.build()
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    /// Number of stored directed edges (after duplicate merging).
    pub fn edge_count(&self) -> usize {
        self.col_idx.len()
    }

    /// Out-neighbors of `i` with weights, sorted by target id.
    pub fn out_edges(&self, i: NodeId) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.weights[r].iter().copied())
    }

    pub fn out_degree(&self, i: NodeId) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    /// Sum of out-going edge weights of `i`.
    pub fn out_strength(&self, i: NodeId) -> f64 {
        self.out_edges(i).map(|(_, w)| w).sum()
    }

    /// Sum of in-coming edge weights of `i`.
    pub fn in_strength(&self, i: NodeId) -> f64 {
        self.in_strength[i]
    }

    /// Weight of edge `i -> j`, or 0 if absent.
    pub fn weight(&self, i: NodeId, j: NodeId) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(pos) => self.weights[r.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn label(&self, i: NodeId) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.labels.iter().map(String::as_str)
    }

    pub fn id(&self, label: &str) -> Result<NodeId> {
        self.label_to_id
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel {
                label: label.to_owned(),
            })
    }

    /// Checks that every edge has a mirror of equal weight, as required by the
    /// undirected-only algorithms. Returns the first offending edge otherwise.
    pub fn require_symmetric(&self) -> Result<()> {
        for i in 0..self.node_count() {
            for (j, w) in self.out_edges(i) {
                if (self.weight(j, i) - w).abs() > 1e-12 * w.abs().max(1.0) {
                    return Err(Error::NotSymmetric {
                        from: self.labels[i].clone(),
                        to: self.labels[j].clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Checks symmetry and that every node is reachable from node 0.
    pub fn require_connected(&self) -> Result<()> {
        self.require_symmetric()?;
        if self.node_count() == 0 {
            return Err(Error::EmptyGraph);
        }
        let seen = self.reachable_from(&[0], false);
        let unreachable = seen.iter().filter(|&&s| !s).count();
        if unreachable > 0 {
            return Err(Error::Disconnected {
                root: self.labels[0].clone(),
                count: unreachable,
                total: self.node_count(),
            });
        }
        Ok(())
    }

    /// BFS reachability over out-edges (or in-edges when `reversed`).
    pub fn reachable_from(&self, starts: &[NodeId], reversed: bool) -> Vec<bool> {
        let n = self.node_count();
        let rev = if reversed {
            Some(self.reverse_adjacency())
        } else {
            None
        };
        let mut seen = vec![false; n];
        let mut queue: Vec<NodeId> = Vec::new();
        for &s in starts {
            if !seen[s] {
                seen[s] = true;
                queue.push(s);
            }
        }
        while let Some(u) = queue.pop() {
            let push = |v: NodeId, seen: &mut Vec<bool>, queue: &mut Vec<NodeId>| {
                if !seen[v] {
                    seen[v] = true;
                    queue.push(v);
                }
            };
            match &rev {
                None => {
                    for (v, _) in self.out_edges(u) {
                        push(v, &mut seen, &mut queue);
                    }
                }
                Some(rev) => {
                    for &v in &rev[u] {
                        push(v, &mut seen, &mut queue);
                    }
                }
            }
        }
        seen
    }

    /// In-neighbor lists (unweighted), for algorithms that walk edges backwards.
    pub fn reverse_adjacency(&self) -> Vec<Vec<NodeId>> {
        let mut rev = vec![Vec::new(); self.node_count()];
        for i in 0..self.node_count() {
            for (j, _) in self.out_edges(i) {
                rev[j].push(i);
            }
        }
        rev
    }

    /// Writes the graph back out as `source<TAB>target<TAB>weight` lines.
    /// Loading the output reproduces the graph exactly (labels and weights).
    pub fn to_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        for i in 0..self.node_count() {
            for (j, w) in self.out_edges(i) {
                writeln!(out, "{}\t{}\t{}", self.labels[i], self.labels[j], w)?;
            }
        }
        Ok(())
    }

    /// Returns a copy with one extra node connected to and from every
    /// original node by unit-weight edges. The new node takes id `N` and a
    /// label not colliding with any existing one.
    pub fn add_ground_node(&self) -> DirectedGraph {
        let mut label = String::from("_ground");
        while self.label_to_id.contains_key(&label) {
            label.push('_');
        }
        let mut b = GraphBuilder::new();
        for l in &self.labels {
            b.add_node(l);
        }
        for i in 0..self.node_count() {
            for (j, w) in self.out_edges(i) {
                b.edges.push((i, j, w));
            }
        }
        let g = b.intern(&label);
        for i in 0..g {
            b.edges.push((i, g, 1.0));
            b.edges.push((g, i, 1.0));
        }
        b.build()
    }
}

/// Sniffs the gzip magic bytes and decompresses transparently.
fn maybe_gunzip<'a, R: Read + 'a>(mut input: R) -> Result<Box<dyn Read + 'a>> {
    let mut magic = [0u8; 2];
    let mut read = 0;
    while read < 2 {
        match input.read(&mut magic[read..])? {
            0 => break,
            k => read += k,
        }
    }
    let head = std::io::Cursor::new(magic[..read].to_vec());
    let rest = head.chain(input);
    if read == 2 && magic == [0x1f, 0x8b] {
        Ok(Box::new(flate2::read::GzDecoder::new(rest)))
    } else {
        Ok(Box::new(rest))
    }
}

fn split_line(line: &str) -> Vec<&str> {
    line.split('\t').map(str::trim).collect()
}

fn is_skippable(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

/// Loads an edge-list TSV: `source<TAB>target[<TAB>weight]`, `#` comments,
/// UTF-8, optionally gzip-compressed. A missing weight defaults to 1.0.
pub fn load_directed_graph<R: Read>(
    input: R,
    options: ParseOptions,
) -> Result<DirectedGraph> {
    let reader = BufReader::new(maybe_gunzip(input)?);
    let mut b = GraphBuilder::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if is_skippable(&line) {
            continue;
        }
        let fields = split_line(&line);
        let (source, target, weight) = match fields.as_slice() {
            [s, t] => (*s, *t, 1.0),
            [s, t, w] => {
                let weight: f64 = w.parse().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("invalid weight `{w}`"),
                })?;
                (*s, *t, weight)
            }
            _ => {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected 2 or 3 tab-separated fields, got {}", fields.len()),
                })
            }
        };
        if source.is_empty() || target.is_empty() {
            return Err(Error::Parse {
                line: lineno,
                message: "empty node label".into(),
            });
        }
        if weight < 0.0 || !weight.is_finite() {
            return Err(Error::NegativeWeight {
                line: lineno,
                weight,
            });
        }
        b.add_edge(source, target, weight);
        if options.undirected {
            b.add_edge(target, source, weight);
        }
    }
    Ok(b.build())
}

/// User–item bipartite graph with optional ratings and timestamps.
///
/// Entries are unique per `(user, item)` pair; the loader resolves duplicates
/// by keeping the last occurrence. Adjacency is stored twice (per-user rows
/// and per-item rows) so both directions of the diffusion algorithms stream
/// over contiguous memory.
#[derive(Debug, Clone)]
pub struct BipartiteGraph {
    user_labels: Vec<String>,
    user_to_id: HashMap<String, usize>,
    item_labels: Vec<String>,
    item_to_id: HashMap<String, usize>,
    // per-user CSR
    user_ptr: Vec<usize>,
    user_items: Vec<usize>,
    user_ratings: Vec<Option<f64>>,
    user_timestamps: Vec<Option<i64>>,
    // per-item CSR (users only; ratings reachable through the user rows)
    item_ptr: Vec<usize>,
    item_users: Vec<usize>,
    item_user_ratings: Vec<Option<f64>>,
}

/// One parsed user–item entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub user: usize,
    pub item: usize,
    pub rating: Option<f64>,
    pub timestamp: Option<i64>,
}

impl BipartiteGraph {
    /// Builds a graph from `(user, item, rating, timestamp)` tuples; later
    /// duplicates of a `(user, item)` pair replace earlier ones.
    pub fn from_entries<'a, I>(entries: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a str, Option<f64>, Option<i64>)>,
    {
        let mut user_labels = Vec::new();
        let mut user_to_id = HashMap::new();
        let mut item_labels = Vec::new();
        let mut item_to_id = HashMap::new();
        let mut map: HashMap<(usize, usize), (usize, Option<f64>, Option<i64>)> = HashMap::new();
        for (order, (u, i, r, t)) in entries.into_iter().enumerate() {
            let uid = *user_to_id.entry(u.to_owned()).or_insert_with(|| {
                user_labels.push(u.to_owned());
                user_labels.len() - 1
            });
            let iid = *item_to_id.entry(i.to_owned()).or_insert_with(|| {
                item_labels.push(i.to_owned());
                item_labels.len() - 1
            });
            map.insert((uid, iid), (order, r, t));
        }
        let mut entries: Vec<_> = map
            .into_iter()
            .map(|((u, i), (_, r, t))| Entry {
                user: u,
                item: i,
                rating: r,
                timestamp: t,
            })
            .collect();
        entries.sort_unstable_by_key(|e| (e.user, e.item));
        Self::from_sorted(user_labels, user_to_id, item_labels, item_to_id, entries)
    }

    fn from_sorted(
        user_labels: Vec<String>,
        user_to_id: HashMap<String, usize>,
        item_labels: Vec<String>,
        item_to_id: HashMap<String, usize>,
        entries: Vec<Entry>,
    ) -> Self {
        let nu = user_labels.len();
        let ni = item_labels.len();
        let mut user_ptr = vec![0usize; nu + 1];
        let mut user_items = Vec::with_capacity(entries.len());
        let mut user_ratings = Vec::with_capacity(entries.len());
        let mut user_timestamps = Vec::with_capacity(entries.len());
        for e in &entries {
            user_ptr[e.user + 1] += 1;
            user_items.push(e.item);
            user_ratings.push(e.rating);
            user_timestamps.push(e.timestamp);
        }
        for u in 0..nu {
            user_ptr[u + 1] += user_ptr[u];
        }
        let mut by_item = entries;
        by_item.sort_unstable_by_key(|e| (e.item, e.user));
        let mut item_ptr = vec![0usize; ni + 1];
        let mut item_users = Vec::with_capacity(by_item.len());
        let mut item_user_ratings = Vec::with_capacity(by_item.len());
        for e in &by_item {
            item_ptr[e.item + 1] += 1;
            item_users.push(e.user);
            item_user_ratings.push(e.rating);
        }
        for i in 0..ni {
            item_ptr[i + 1] += item_ptr[i];
        }
        BipartiteGraph {
            user_labels,
            user_to_id,
            item_labels,
            item_to_id,
            user_ptr,
            user_items,
            user_ratings,
            user_timestamps,
            item_ptr,
            item_users,
            item_user_ratings,
        }
    }

    pub fn user_count(&self) -> usize {
        self.user_labels.len()
    }

    pub fn item_count(&self) -> usize {
        self.item_labels.len()
    }

    pub fn entry_count(&self) -> usize {
        self.user_items.len()
    }

    /// Number of items collected by user `u`.
    pub fn user_degree(&self, u: usize) -> usize {
        self.user_ptr[u + 1] - self.user_ptr[u]
    }

    /// Number of users who collected item `i`.
    pub fn item_degree(&self, i: usize) -> usize {
        self.item_ptr[i + 1] - self.item_ptr[i]
    }

    /// Items of user `u` with optional ratings and timestamps, sorted by item.
    pub fn items_of(&self, u: usize) -> impl Iterator<Item = Entry> + '_ {
        let r = self.user_ptr[u]..self.user_ptr[u + 1];
        r.map(move |k| Entry {
            user: u,
            item: self.user_items[k],
            rating: self.user_ratings[k],
            timestamp: self.user_timestamps[k],
        })
    }

    /// Users who collected item `i`, with their ratings, sorted by user.
    pub fn users_of(&self, i: usize) -> impl Iterator<Item = (usize, Option<f64>)> + '_ {
        let r = self.item_ptr[i]..self.item_ptr[i + 1];
        r.map(move |k| (self.item_users[k], self.item_user_ratings[k]))
    }

    /// Whether user `u` collected item `i`.
    pub fn has_entry(&self, u: usize, i: usize) -> bool {
        self.user_items[self.user_ptr[u]..self.user_ptr[u + 1]]
            .binary_search(&i)
            .is_ok()
    }

    /// Rating user `u` gave item `i`, if the entry exists and is rated.
    pub fn rating(&self, u: usize, i: usize) -> Option<f64> {
        self.user_items[self.user_ptr[u]..self.user_ptr[u + 1]]
            .binary_search(&i)
            .ok()
            .and_then(|pos| self.user_ratings[self.user_ptr[u] + pos])
    }

    /// Mean of user `u`'s ratings over rated entries, if any.
    pub fn mean_rating(&self, u: usize) -> Option<f64> {
        let r = self.user_ptr[u]..self.user_ptr[u + 1];
        let rated: Vec<f64> = self.user_ratings[r].iter().flatten().copied().collect();
        if rated.is_empty() {
            None
        } else {
            Some(rated.iter().sum::<f64>() / rated.len() as f64)
        }
    }

    pub fn user_label(&self, u: usize) -> &str {
        &self.user_labels[u]
    }

    pub fn item_label(&self, i: usize) -> &str {
        &self.item_labels[i]
    }

    pub fn user_id(&self, label: &str) -> Result<usize> {
        self.user_to_id
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel {
                label: label.to_owned(),
            })
    }

    pub fn item_id(&self, label: &str) -> Result<usize> {
        self.item_to_id
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel {
                label: label.to_owned(),
            })
    }

    /// Rebuilds the graph keeping only entries for which `keep` returns true.
    /// Users and items retain their ids and labels even if left with degree 0.
    pub fn filter_entries<F: FnMut(&Entry) -> bool>(&self, mut keep: F) -> BipartiteGraph {
        let mut entries = Vec::new();
        for u in 0..self.user_count() {
            for e in self.items_of(u) {
                if keep(&e) {
                    entries.push(e);
                }
            }
        }
        entries.sort_unstable_by_key(|e| (e.user, e.item));
        BipartiteGraph::from_sorted(
            self.user_labels.clone(),
            self.user_to_id.clone(),
            self.item_labels.clone(),
            self.item_to_id.clone(),
            entries,
        )
    }
}

/// Loads a ratings TSV: `user<TAB>item[<TAB>rating[<TAB>timestamp]]`.
/// Duplicate `(user, item)` pairs keep the last line; each duplicate adds a
/// warning string to the returned list.
pub fn load_bipartite<R: Read>(input: R) -> Result<(BipartiteGraph, Vec<String>)> {
    let reader = BufReader::new(maybe_gunzip(input)?);
    let mut raw: Vec<(String, String, Option<f64>, Option<i64>)> = Vec::new();
    let mut seen: HashMap<(String, String), usize> = HashMap::new();
    let mut warnings = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if is_skippable(&line) {
            continue;
        }
        let fields = split_line(&line);
        let (user, item, rating, timestamp) = match fields.as_slice() {
            [u, i] => (*u, *i, None, None),
            [u, i, r] => (*u, *i, Some(parse_rating(r, lineno)?), None),
            [u, i, r, t] => {
                let ts: i64 = t.parse().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("invalid timestamp `{t}`"),
                })?;
                (*u, *i, Some(parse_rating(r, lineno)?), Some(ts))
            }
            _ => {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!(
                        "expected 2 to 4 tab-separated fields, got {}",
                        fields.len()
                    ),
                })
            }
        };
        if user.is_empty() || item.is_empty() {
            return Err(Error::Parse {
                line: lineno,
                message: "empty user or item label".into(),
            });
        }
        let key = (user.to_owned(), item.to_owned());
        if let Some(&first) = seen.get(&key) {
            warnings.push(format!(
                "line {lineno}: duplicate entry ({user}, {item}); overriding line {first}"
            ));
        }
        seen.insert(key, lineno);
        raw.push((user.to_owned(), item.to_owned(), rating, timestamp));
    }
    let graph = BipartiteGraph::from_entries(
        raw.iter()
            .map(|(u, i, r, t)| (u.as_str(), i.as_str(), *r, *t)),
    );
    Ok((graph, warnings))
}

fn parse_rating(field: &str, lineno: usize) -> Result<f64> {
    let r: f64 = field.parse().map_err(|_| Error::Parse {
        line: lineno,
        message: format!("invalid rating `{field}`"),
    })?;
    if !r.is_finite() {
        return Err(Error::Parse {
            line: lineno,
            message: format!("non-finite rating `{field}`"),
        });
    }
    Ok(r)
}
