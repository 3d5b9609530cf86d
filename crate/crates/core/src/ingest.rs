//! Follower edge lists and the two ways of turning them into hypergraphs.
//!
//! A line `A B` reads "A follows B" unless `reverse_pairs` is set.

use std::collections::{HashMap, HashSet, VecDeque};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{Hyperarc, OrientedHypergraph};

/// Cleaned follower relation over opaque string labels.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ArcList {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    /// `(follower, followed)` as indices into `labels`, in first-seen order.
    arcs: Vec<(usize, usize)>,
    pub self_loops_dropped: usize,
    pub duplicates_dropped: usize,
    pub lines_read: usize,
}

impl ArcList {
    /// Builds a cleaned arc list from `(follower, followed)` label pairs.
    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, S)>,
        S: AsRef<str>,
    {
        let mut b = Builder::default();
        for (a, c) in pairs {
            b.push(a.as_ref(), c.as_ref());
        }
        b.finish(0)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    pub fn n_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn id_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// Number of followers of every label.
    pub fn follower_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.labels.len()];
        for &(_, followed) in &self.arcs {
            c[followed] += 1;
        }
        c
    }

    /// `(follower label, followed label)` pairs.
    pub fn label_pairs(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.arcs.iter().map(|&(a, b)| (self.labels[a].as_str(), self.labels[b].as_str()))
    }
}

#[derive(Default)]
struct Builder {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    arcs: Vec<(usize, usize)>,
    seen: HashSet<(usize, usize)>,
    self_loops: usize,
    duplicates: usize,
}

impl Builder {
    fn id(&mut self, label: &str) -> usize {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.labels.len();
        self.labels.push(label.to_owned());
        self.index.insert(label.to_owned(), i);
        i
    }

    fn push(&mut self, follower: &str, followed: &str) {
        if follower == followed {
            self.self_loops += 1;
            return;
        }
        let a = self.id(follower);
        let b = self.id(followed);
        if self.seen.insert((a, b)) {
            self.arcs.push((a, b));
        } else {
            self.duplicates += 1;
        }
    }

    fn finish(self, lines_read: usize) -> ArcList {
        ArcList {
            labels: self.labels,
            index: self.index,
            arcs: self.arcs,
            self_loops_dropped: self.self_loops,
            duplicates_dropped: self.duplicates,
            lines_read,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Stop after this many physical lines (comments and blanks included).
    pub max_lines: Option<usize>,
    /// Read `A B` as "B follows A".
    pub reverse_pairs: bool,
}

/// Parses a whitespace-separated edge list. Blank lines and lines starting
/// with `#` or `%` are skipped. Self-loops and repeated pairs are dropped and
/// counted.
pub fn parse_edge_list<R: BufRead>(mut reader: R, opts: ParseOptions) -> Result<ArcList> {
    let mut b = Builder::default();
    let mut line = String::new();
    let mut lineno = 0;
    loop {
        if opts.max_lines.is_some_and(|m| lineno >= m) {
            break;
        }
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            break;
        }
        lineno += 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with('%') {
            continue;
        }
        let mut it = t.split_whitespace();
        let (Some(a), Some(c), None) = (it.next(), it.next(), it.next()) else {
            return Err(Error::MalformedLine { line: lineno });
        };
        if opts.reverse_pairs {
            b.push(c, a);
        } else {
            b.push(a, c);
        }
    }
    let list = b.finish(lineno);
    if list.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(list)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HyperarcMode {
    /// One hyperarc `({u}, {v})` per arc `u → v`.
    PairwiseGraph,
    /// One hyperarc `({u}, followers(u))` per followed user `u`.
    FollowerStarHypergraph,
}

/// Groups followers: one hyperarc per followed user, with the user as the
/// singleton output set and all followers as the input set. Unit weights.
pub fn build_follower_star(arcs: &ArcList) -> Result<OrientedHypergraph> {
    if arcs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut followers: Vec<Vec<usize>> = vec![Vec::new(); arcs.n_labels()];
    for &(a, b) in &arcs.arcs {
        followers[b].push(a);
    }
    let hyperarcs = followers
        .into_iter()
        .enumerate()
        .filter(|(_, f)| !f.is_empty())
        .map(|(u, f)| Hyperarc::new([u], f))
        .collect();
    OrientedHypergraph::new(arcs.n_labels(), hyperarcs, None)?.with_labels(arcs.labels.clone())
}

/// One hyperarc `({u}, {v})` per arc `u → v`.
pub fn build_pairwise(arcs: &ArcList) -> Result<OrientedHypergraph> {
    if arcs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let hyperarcs = arcs.arcs.iter().map(|&(a, b)| Hyperarc::new([a], [b])).collect();
    OrientedHypergraph::new(arcs.n_labels(), hyperarcs, None)?.with_labels(arcs.labels.clone())
}

pub fn build(arcs: &ArcList, mode: HyperarcMode) -> Result<OrientedHypergraph> {
    match mode {
        HyperarcMode::PairwiseGraph => build_pairwise(arcs),
        HyperarcMode::FollowerStarHypergraph => build_follower_star(arcs),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Leader {
    Label(String),
    /// The label with the most followers (lowest index on ties).
    Auto,
}

/// Breadth-first expansion over the undirected follower graph from the
/// leader, stopping at `max_vertices`. Returns the induced arcs, which form a
/// weakly connected network containing the leader.
pub fn extract_subnetwork(arcs: &ArcList, leader: &Leader, max_vertices: usize) -> Result<ArcList> {
    if arcs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let start = match leader {
        Leader::Label(l) => arcs.id_of(l).ok_or_else(|| Error::UnknownLeader(l.clone()))?,
        Leader::Auto => {
            let counts = arcs.follower_counts();
            // max_by_key returns the last maximum; scan in reverse to get the first
            (0..counts.len()).rev().max_by_key(|&i| counts[i]).unwrap_or(0)
        }
    };
    let n = arcs.n_labels();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in &arcs.arcs {
        adj[a].push(b);
        adj[b].push(a);
    }
    for l in &mut adj {
        l.sort_unstable();
        l.dedup();
    }

    let mut keep = vec![false; n];
    let mut queue = VecDeque::from([start]);
    keep[start] = true;
    let mut count = 1;
    'bfs: while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if count >= max_vertices {
                break 'bfs;
            }
            if !keep[v] {
                keep[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }

    let mut b = Builder::default();
    // leader first so it keeps a stable id even without arcs
    b.id(&arcs.labels[start]);
    for &(a, c) in &arcs.arcs {
        if keep[a] && keep[c] {
            b.push(&arcs.labels[a], &arcs.labels[c]);
        }
    }
    let mut out = b.finish(arcs.lines_read);
    out.self_loops_dropped = arcs.self_loops_dropped;
    out.duplicates_dropped = arcs.duplicates_dropped;
    Ok(out)
}

/// True iff the undirected version of the arc list is connected.
pub fn is_weakly_connected(arcs: &ArcList) -> bool {
    let n = arcs.n_labels();
    if n == 0 {
        return true;
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in &arcs.arcs {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == n
}
