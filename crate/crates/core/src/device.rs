//! Device coupling graphs.
//!
//! A [`DeviceGraph`] is the set of physical qubits of a machine together with
//! the couplers that allow two-qubit gates. Undirected edges are stored once,
//! as `(min, max)`; directed devices keep the orientation they were given.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Node budget used by callers that do not care to pick one.
pub const DEFAULT_MATCHING_BUDGET: u64 = 2_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DeviceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: self-loop on qubit {qubit}")]
    SelfLoop { line: usize, qubit: usize },
    #[error("line {line}: edge endpoint {qubit} out of range for {num_qubits} qubits")]
    OutOfRange {
        line: usize,
        qubit: usize,
        num_qubits: usize,
    },
    #[error("device must have at least one qubit")]
    Empty,
}

/// Physical qubits `0..num_qubits` and their couplers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviceGraph {
    name: String,
    num_qubits: usize,
    directed: bool,
    edges: Vec<(usize, usize)>,
    out_adj: Vec<Vec<usize>>,
    // underlying undirected adjacency, used for matchings and distances
    adj: Vec<Vec<usize>>,
}

impl DeviceGraph {
    /// Build and validate a device graph. Duplicate edges are merged; for
    /// undirected graphs `(a, b)` and `(b, a)` are the same edge.
    pub fn new(
        name: impl Into<String>,
        num_qubits: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        directed: bool,
    ) -> Result<Self, DeviceError> {
        let lined = edges.into_iter().map(|e| (0, e));
        Self::build(name.into(), num_qubits, lined, directed)
    }

    fn build(
        name: String,
        num_qubits: usize,
        edges: impl IntoIterator<Item = (usize, (usize, usize))>,
        directed: bool,
    ) -> Result<Self, DeviceError> {
        if num_qubits == 0 {
            return Err(DeviceError::Empty);
        }
        let mut set = BTreeSet::new();
        for (line, (a, b)) in edges {
            for q in [a, b] {
                if q >= num_qubits {
                    return Err(DeviceError::OutOfRange {
                        line,
                        qubit: q,
                        num_qubits,
                    });
                }
            }
            if a == b {
                return Err(DeviceError::SelfLoop { line, qubit: a });
            }
            set.insert(if directed { (a, b) } else { (a.min(b), a.max(b)) });
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut out_adj = vec![Vec::new(); num_qubits];
        let mut adj = vec![Vec::new(); num_qubits];
        for &(a, b) in &edges {
            out_adj[a].push(b);
            if !directed {
                out_adj[b].push(a);
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in out_adj.iter_mut().chain(adj.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self {
            name,
            num_qubits,
            directed,
            edges,
            out_adj,
            adj,
        })
    }

    /// `rows × cols` nearest-neighbour array; qubit `r * cols + c`.
    pub fn grid(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "grid dimensions must be positive");
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let q = r * cols + c;
                if c + 1 < cols {
                    edges.push((q, q + 1));
                }
                if r + 1 < rows {
                    edges.push((q, q + cols));
                }
            }
        }
        Self::new(format!("grid{rows}x{cols}"), rows * cols, edges, false)
            .expect("grid edges are valid")
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
        Self::new(format!("k{n}"), n, edges, false).expect("valid")
    }

    /// Cycle `0-1-…-(n-1)-0`. For `n < 3` this degenerates to a path.
    pub fn cycle(n: usize) -> Self {
        let mut edges: Vec<_> = (1..n).map(|b| (b - 1, b)).collect();
        if n >= 3 {
            edges.push((n - 1, 0));
        }
        Self::new(format!("c{n}"), n, edges, false).expect("valid")
    }

    pub fn path(n: usize) -> Self {
        Self::new(format!("p{n}"), n, (1..n).map(|b| (b - 1, b)), false).expect("valid")
    }

    /// Star with centre `0`.
    pub fn star(n: usize) -> Self {
        Self::new(format!("star{n}"), n, (1..n).map(|b| (0, b)), false).expect("valid")
    }

    /// Devices bundled with the crate, by lowercase name.
    pub fn builtin(name: &str) -> Option<Self> {
        BUILTIN_DEVICES
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(name))
            .map(|(_, text)| load_device(text).expect("bundled device files are valid"))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Edges in canonical order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Whether a two-qubit gate may act on `(a, b)` in that orientation.
    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.num_qubits && self.out_adj[a].binary_search(&b).is_ok()
    }

    /// Whether `a` and `b` share a coupler in either orientation.
    pub fn coupled(&self, a: usize, b: usize) -> bool {
        a < self.num_qubits && self.adj[a].binary_search(&b).is_ok()
    }

    /// Out-neighbours of `p` (all neighbours on undirected devices), sorted.
    pub fn neighbors(&self, p: usize) -> &[usize] {
        &self.out_adj[p]
    }

    /// Neighbours of `p` ignoring edge direction, sorted.
    pub fn undirected_neighbors(&self, p: usize) -> &[usize] {
        &self.adj[p]
    }

    pub fn degree(&self, p: usize) -> usize {
        self.adj[p].len()
    }

    /// Hop distances from `src` over the underlying undirected graph.
    pub fn distances_from(&self, src: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.num_qubits];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(p) = queue.pop_front() {
            let d = dist[p].unwrap();
            for &n in &self.adj[p] {
                if dist[n].is_none() {
                    dist[n] = Some(d + 1);
                    queue.push_back(n);
                }
            }
        }
        dist
    }

    /// All-pairs hop distances; `usize::MAX` marks disconnected pairs.
    pub fn distance_matrix(&self) -> Vec<Vec<usize>> {
        (0..self.num_qubits)
            .map(|p| {
                self.distances_from(p)
                    .into_iter()
                    .map(|d| d.unwrap_or(usize::MAX))
                    .collect()
            })
            .collect()
    }

    /// BFS shortest path from `a` to `b` (inclusive), ignoring direction.
    /// Among equal-length paths the one through lower-indexed parents wins.
    pub fn shortest_path(&self, a: usize, b: usize) -> Option<Vec<usize>> {
        let mut parent = vec![usize::MAX; self.num_qubits];
        parent[a] = a;
        let mut queue = VecDeque::from([a]);
        while let Some(p) = queue.pop_front() {
            if p == b {
                break;
            }
            for &n in &self.adj[p] {
                if parent[n] == usize::MAX {
                    parent[n] = p;
                    queue.push_back(n);
                }
            }
        }
        if parent[b] == usize::MAX {
            return None;
        }
        let mut path = vec![b];
        let mut cur = b;
        while cur != a {
            cur = parent[cur];
            path.push(cur);
        }
        path.reverse();
        Some(path)
    }

    /// Serialize in the edge-list format read by [`load_device`].
    pub fn to_edge_list(&self) -> String {
        let mut out = format!(
            "device {} {} {}\n",
            self.name,
            self.num_qubits,
            if self.directed { "directed" } else { "undirected" }
        );
        for (a, b) in &self.edges {
            out.push_str(&format!("{a} {b}\n"));
        }
        out
    }
}

impl fmt::Display for DeviceGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({} qubits, {} edges{})",
            self.name,
            self.num_qubits,
            self.edges.len(),
            if self.directed { ", directed" } else { "" }
        )
    }
}

impl FromStr for DeviceGraph {
    type Err = DeviceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        load_device(s)
    }
}

/// Bundled edge-list files. Only Ourense is taken from a drawn topology; the
/// others carry an "externally sourced" note in their headers.
pub const BUILTIN_DEVICES: &[(&str, &str)] = &[
    ("ourense", include_str!("../devices/ourense.edges")),
    ("tokyo", include_str!("../devices/tokyo.edges")),
    ("aspen4", include_str!("../devices/aspen4.edges")),
];

/// Parse the line-oriented edge-list format:
///
/// ```text
/// # comment
/// device <name> <N> <directed|undirected>
/// <a> <b>
/// ```
pub fn load_device(source: &str) -> Result<DeviceGraph, DeviceError> {
    let parse_err = |line: usize, message: String| DeviceError::Parse { line, message };
    let mut header: Option<(String, usize, bool)> = None;
    let mut edges = Vec::new();
    for (idx, raw) in source.lines().enumerate() {
        let line = idx + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = text.split_whitespace().collect();
        if header.is_none() {
            match fields.as_slice() {
                ["device", name, n, kind] => {
                    let n: usize = n
                        .parse()
                        .map_err(|_| parse_err(line, format!("invalid qubit count `{n}`")))?;
                    let directed = match *kind {
                        "directed" => true,
                        "undirected" => false,
                        other => {
                            return Err(parse_err(
                                line,
                                format!("expected `directed` or `undirected`, found `{other}`"),
                            ))
                        }
                    };
                    header = Some((name.to_string(), n, directed));
                }
                _ => {
                    return Err(parse_err(
                        line,
                        "expected header `device <name> <N> <directed|undirected>`".into(),
                    ))
                }
            }
            continue;
        }
        match fields.as_slice() {
            [a, b] => {
                let parse = |s: &str| {
                    s.parse::<usize>()
                        .map_err(|_| parse_err(line, format!("invalid qubit index `{s}`")))
                };
                edges.push((line, (parse(a)?, parse(b)?)));
            }
            _ => return Err(parse_err(line, format!("expected `a b`, found `{text}`"))),
        }
    }
    let (name, n, directed) =
        header.ok_or_else(|| parse_err(0, "missing `device` header line".into()))?;
    DeviceGraph::build(name, n, edges, directed)
}

/// Lower bound or exact value of the minimum size of a maximal matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchingBound {
    pub value: usize,
    /// `false` when the search budget ran out and `value` is only a lower bound.
    pub exact: bool,
}

/// Minimum cardinality over all maximal matchings of the underlying
/// undirected graph, by memoized branch and bound.
///
/// The search branches on an undominated edge `(u, v)`: some matching edge
/// must touch `u` or `v`. Pruning uses `ceil(g / 2)` for any matching `g` of
/// the remaining free subgraph, since each new matching edge can dominate at
/// most two edges of `g`. When more than `budget` nodes are expanded the
/// result falls back to that same lower bound for the whole graph, with
/// `exact = false`.
pub fn matching_bound(g: &DeviceGraph, budget: u64) -> MatchingBound {
    if g.edges.is_empty() {
        return MatchingBound {
            value: 0,
            exact: true,
        };
    }
    let n = g.num_qubits;
    if n > 128 {
        return MatchingBound {
            value: greedy_lower_bound(&g.adj, None),
            exact: false,
        };
    }
    let adj: Vec<u128> = g
        .adj
        .iter()
        .map(|ns| ns.iter().fold(0u128, |m, &q| m | (1u128 << q)))
        .collect();
    let mut search = MatchingSearch {
        adj: &adj,
        nodes: 0,
        budget,
        exhausted: false,
        memo: HashMap::new(),
    };
    let all = if n == 128 { u128::MAX } else { (1u128 << n) - 1 };
    match search.solve(all, u32::MAX) {
        Some(v) if !search.exhausted => MatchingBound {
            value: v as usize,
            exact: true,
        },
        _ => MatchingBound {
            value: greedy_lower_bound(&g.adj, None),
            exact: false,
        },
    }
}

/// `ceil(|m| / 2)` for a greedily built matching `m`, restricted to
/// vertices in `free` when given.
fn greedy_lower_bound(adj: &[Vec<usize>], free: Option<u128>) -> usize {
    let is_free = |q: usize| free.is_none_or(|f| f >> q & 1 == 1);
    let mut used = vec![false; adj.len()];
    let mut size = 0usize;
    for u in 0..adj.len() {
        if used[u] || !is_free(u) {
            continue;
        }
        if let Some(&v) = adj[u].iter().find(|&&v| !used[v] && is_free(v)) {
            used[u] = true;
            used[v] = true;
            size += 1;
        }
    }
    size.div_ceil(2)
}

#[derive(Clone, Copy)]
enum Memo {
    Exact(u32),
    AtLeast(u32),
}

struct MatchingSearch<'a> {
    adj: &'a [u128],
    nodes: u64,
    budget: u64,
    exhausted: bool,
    memo: HashMap<u128, Memo>,
}

impl MatchingSearch<'_> {
    fn lower_bound(&self, free: u128) -> u32 {
        let mut rest = free;
        let mut size = 0u32;
        while rest != 0 {
            let u = rest.trailing_zeros() as usize;
            rest &= !(1u128 << u);
            let avail = self.adj[u] & rest;
            if avail != 0 {
                let v = avail.trailing_zeros() as usize;
                rest &= !(1u128 << v);
                size += 1;
            }
        }
        size.div_ceil(2)
    }

    /// Exact optimum of the free subgraph if it is below `limit`, else `None`.
    fn solve(&mut self, free: u128, limit: u32) -> Option<u32> {
        if self.exhausted {
            return None;
        }
        let mut scan = free;
        let mut pick = None;
        while scan != 0 {
            let u = scan.trailing_zeros() as usize;
            scan &= !(1u128 << u);
            let avail = self.adj[u] & free;
            if avail != 0 {
                pick = Some((u, avail.trailing_zeros() as usize));
                break;
            }
        }
        let Some((u, v)) = pick else {
            return (limit > 0).then_some(0);
        };
        if limit <= 1 || self.lower_bound(free).max(1) >= limit {
            return None;
        }
        match self.memo.get(&free) {
            Some(Memo::Exact(x)) => return (*x < limit).then_some(*x),
            Some(Memo::AtLeast(b)) if *b >= limit => return None,
            _ => {}
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return None;
        }

        let mut candidates = Vec::new();
        let mut nu = self.adj[u] & free;
        while nu != 0 {
            let x = nu.trailing_zeros() as usize;
            nu &= !(1u128 << x);
            candidates.push((u, x));
        }
        let mut nv = self.adj[v] & free & !(1u128 << u);
        while nv != 0 {
            let y = nv.trailing_zeros() as usize;
            nv &= !(1u128 << y);
            candidates.push((v, y));
        }

        let mut best = None;
        let mut cur = limit;
        for (a, b) in candidates {
            let rest = free & !(1u128 << a) & !(1u128 << b);
            if let Some(x) = self.solve(rest, cur - 1) {
                best = Some(x + 1);
                cur = x + 1;
            }
            if self.exhausted {
                return None;
            }
            if cur <= 1 {
                break;
            }
        }
        let entry = match best {
            Some(x) => Memo::Exact(x),
            None => Memo::AtLeast(limit),
        };
        self.memo.insert(free, entry);
        best
    }
}
