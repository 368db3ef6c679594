//! Undirected graphs with a designated source and target, the canonical edge
//! indexing, coalitions over intermediate nodes, and the s-t connectivity
//! value function.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use log::warn;

use crate::error::{Error, Result};

pub type NodeId = usize;

/// Largest supported node count. Coalitions over the `n - 2` intermediate
/// nodes are stored in a single `u64`.
pub const MAX_NODES: usize = 66;

/// Simple undirected graph on dense node ids `0..n` with source `s` and
/// target `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    s: NodeId,
    t: NodeId,
    edges: BTreeSet<(NodeId, NodeId)>,
    adj: Vec<u128>,
    players: Vec<NodeId>,
}

impl Graph {
    /// Builds a graph, storing each edge once as `(min, max)`. Repeated edges
    /// are collapsed.
    pub fn new<I>(n: usize, s: NodeId, t: NodeId, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("a graph needs at least 2 nodes, got {n}")));
        }
        if n > MAX_NODES {
            return Err(Error::InvalidArgument(format!(
                "{n} nodes exceed the supported maximum of {MAX_NODES}"
            )));
        }
        check_node(s, n)?;
        check_node(t, n)?;
        if s == t {
            return Err(Error::InvalidArgument("source and target must differ".into()));
        }
        let mut set = BTreeSet::new();
        let mut adj = vec![0u128; n];
        for (u, w) in edges {
            check_node(u, n)?;
            check_node(w, n)?;
            if u == w {
                return Err(Error::SelfLoop(u));
            }
            let pair = (u.min(w), u.max(w));
            if set.insert(pair) {
                adj[u] |= 1 << w;
                adj[w] |= 1 << u;
            }
        }
        let players = (0..n).filter(|&v| v != s && v != t).collect();
        Ok(Self { n, s, t, edges: set, adj, players })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> NodeId {
        self.s
    }

    pub fn t(&self) -> NodeId {
        self.t
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: NodeId, w: NodeId) -> bool {
        u < self.n && w < self.n && self.adj[u] >> w & 1 == 1
    }

    pub fn neighbors(&self, u: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        let bits = self.adj[u];
        (0..self.n).filter(move |&w| bits >> w & 1 == 1)
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adj[u].count_ones() as usize
    }

    /// True when `(s, t)` is itself an edge, which makes `V(empty) = 1`.
    pub fn is_trivially_connected(&self) -> bool {
        self.has_edge(self.s, self.t)
    }

    /// Intermediate nodes `F = N \ {s, t}` in ascending id order. Position
    /// `j` in this list is bit `j` of every [`Coalition`].
    pub fn players(&self) -> &[NodeId] {
        &self.players
    }

    pub fn player_count(&self) -> usize {
        self.players.len()
    }

    pub fn player_position(&self, node: NodeId) -> Option<usize> {
        self.players.binary_search(&node).ok()
    }

    pub fn full_coalition(&self) -> Coalition {
        Coalition::full(self.player_count())
    }

    pub fn empty_coalition(&self) -> Coalition {
        Coalition::empty(self.player_count())
    }

    fn check_coalition(&self, q: &Coalition) -> Result<()> {
        if q.width() != self.player_count() {
            return Err(Error::CoalitionWidth { got: q.width(), expected: self.player_count() });
        }
        Ok(())
    }

    /// Node mask (bit per node id) of `Q ∪ {s, t}`.
    fn enabled_nodes(&self, mask: u64) -> u128 {
        let mut enabled = (1u128 << self.s) | (1u128 << self.t);
        for (j, &v) in self.players.iter().enumerate() {
            if mask >> j & 1 == 1 {
                enabled |= 1 << v;
            }
        }
        enabled
    }

    /// `H_{Q ∪ {s,t}}`: same node ids, keeping only edges whose endpoints are
    /// both enabled.
    pub fn induced_subgraph(&self, q: &Coalition) -> Result<Graph> {
        self.check_coalition(q)?;
        let enabled = self.enabled_nodes(q.mask());
        let kept = self
            .edges
            .iter()
            .copied()
            .filter(|&(u, w)| enabled >> u & 1 == 1 && enabled >> w & 1 == 1);
        Graph::new(self.n, self.s, self.t, kept)
    }

    /// Breadth-first search from `s`.
    pub fn is_st_connected_bfs(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([self.s]);
        seen[self.s] = true;
        while let Some(u) = queue.pop_front() {
            if u == self.t {
                return true;
            }
            for w in self.neighbors(u) {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        false
    }

    /// Connectivity of `s` and `t` inside `H_{Q ∪ {s,t}}` for a raw coalition
    /// mask, without allocating. No trivial-connection screen.
    pub fn connected_within(&self, mask: u64) -> bool {
        let enabled = self.enabled_nodes(mask);
        let target = 1u128 << self.t;
        let mut reached = 1u128 << self.s;
        let mut frontier = reached;
        while frontier != 0 {
            if reached & target != 0 {
                return true;
            }
            let mut next = 0u128;
            let mut f = frontier;
            while f != 0 {
                let u = f.trailing_zeros() as usize;
                f &= f - 1;
                next |= self.adj[u];
            }
            next &= enabled & !reached;
            reached |= next;
            frontier = next;
        }
        reached & target != 0
    }

    /// The s-t connectivity value `V_st(R)`.
    pub fn value_st(&self, r: &Coalition) -> Result<u8> {
        if self.is_trivially_connected() {
            return Err(Error::TriviallyConnected);
        }
        self.check_coalition(r)?;
        Ok(u8::from(self.connected_within(r.mask())))
    }

    pub fn edge_index_map(&self) -> EdgeIndexMap {
        EdgeIndexMap::new(self.n, self.s, self.t).expect("graph endpoints are valid")
    }

    pub fn adjacency_string(&self) -> AdjacencyString {
        AdjacencyString::from_graph(self)
    }

    /// Canonical edge-list text.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    /// Parses the edge-list format. Duplicate edges are logged and dropped.
    pub fn parse(text: &str) -> Result<Graph> {
        let mut n = None;
        let mut s = None;
        let mut t = None;
        let mut edges: Vec<(usize, usize, usize)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut fields = content.split_whitespace();
            let key = fields.next().unwrap_or_default();
            let nums: Vec<usize> = fields
                .map(|f| {
                    f.parse::<usize>()
                        .map_err(|_| Error::Parse { line, msg: format!("expected an integer, found `{f}`") })
                })
                .collect::<Result<_>>()?;
            let expect = |count: usize| -> Result<()> {
                if nums.len() != count {
                    return Err(Error::Parse {
                        line,
                        msg: format!("`{key}` takes {count} argument(s), found {}", nums.len()),
                    });
                }
                Ok(())
            };
            let set_once = |slot: &mut Option<usize>, v: usize| -> Result<()> {
                if slot.replace(v).is_some() {
                    return Err(Error::Parse { line, msg: format!("repeated `{key}` header") });
                }
                Ok(())
            };
            match key {
                "n" => {
                    expect(1)?;
                    set_once(&mut n, nums[0])?;
                }
                "s" => {
                    expect(1)?;
                    set_once(&mut s, nums[0])?;
                }
                "t" => {
                    expect(1)?;
                    set_once(&mut t, nums[0])?;
                }
                "e" => {
                    expect(2)?;
                    edges.push((line, nums[0], nums[1]));
                }
                other => {
                    return Err(Error::Parse { line, msg: format!("unknown record `{other}`") });
                }
            }
        }
        let missing = |what: &str| Error::Parse { line: 0, msg: format!("missing `{what}` header") };
        let n = n.ok_or_else(|| missing("n"))?;
        let s = s.ok_or_else(|| missing("s"))?;
        let t = t.ok_or_else(|| missing("t"))?;
        let mut seen = BTreeSet::new();
        let mut pairs = Vec::with_capacity(edges.len());
        for (line, u, w) in edges {
            if u >= n || w >= n {
                return Err(Error::Parse { line, msg: format!("edge ({u}, {w}) references a node outside 0..{n}") });
            }
            if u == w {
                return Err(Error::Parse { line, msg: format!("self-loop at node {u}") });
            }
            if !seen.insert((u.min(w), u.max(w))) {
                warn!("line {line}: duplicate edge ({u}, {w}) ignored");
                continue;
            }
            pairs.push((u, w));
        }
        Graph::new(n, s, t, pairs).map_err(|e| Error::Parse { line: 0, msg: e.to_string() })
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n {}", self.n)?;
        writeln!(f, "s {}", self.s)?;
        writeln!(f, "t {}", self.t)?;
        for (u, w) in &self.edges {
            writeln!(f, "e {u} {w}")?;
        }
        Ok(())
    }
}

impl FromStr for Graph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Graph::parse(s)
    }
}

fn check_node(v: NodeId, n: usize) -> Result<()> {
    if v >= n {
        return Err(Error::InvalidNode { node: v, n });
    }
    Ok(())
}

/// Number of unordered pairs on `n` nodes.
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Colex rank of the pair `{u, w}`: `w(w-1)/2 + u` for `u < w`.
pub fn colex_index(u: NodeId, w: NodeId) -> usize {
    let (lo, hi) = (u.min(w), u.max(w));
    hi * (hi - 1) / 2 + lo
}

/// Inverse of [`colex_index`].
pub fn colex_pair(index: usize) -> (NodeId, NodeId) {
    // largest w with w(w-1)/2 <= index
    let mut w = ((1.0 + (1.0 + 8.0 * index as f64).sqrt()) / 2.0).floor() as usize;
    while w * (w - 1) / 2 > index {
        w -= 1;
    }
    while (w + 1) * w / 2 <= index {
        w += 1;
    }
    (index - w * (w - 1) / 2, w)
}

/// Bijection between unordered node pairs and `0..C(n,2)`: colex order with
/// the `(s, t)` pair swapped into index 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeIndexMap {
    n: usize,
    st_colex: usize,
}

impl EdgeIndexMap {
    pub fn new(n: usize, s: NodeId, t: NodeId) -> Result<Self> {
        check_node(s, n)?;
        check_node(t, n)?;
        if s == t {
            return Err(Error::InvalidArgument("source and target must differ".into()));
        }
        Ok(Self { n, st_colex: colex_index(s, t) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        pair_count(self.n)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, u: NodeId, w: NodeId) -> Result<usize> {
        check_node(u, self.n)?;
        check_node(w, self.n)?;
        if u == w {
            return Err(Error::SelfLoop(u));
        }
        let c = colex_index(u, w);
        Ok(if c == self.st_colex {
            0
        } else if c == 0 {
            self.st_colex
        } else {
            c
        })
    }

    pub fn pair(&self, index: usize) -> Result<(NodeId, NodeId)> {
        if index >= self.len() {
            return Err(Error::InvalidArgument(format!("edge index {index} out of range 0..{}", self.len())));
        }
        let c = if index == 0 {
            self.st_colex
        } else if index == self.st_colex {
            0
        } else {
            index
        };
        Ok(colex_pair(c))
    }
}

/// Adjacency bits `x_uw` laid out by [`EdgeIndexMap`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdjacencyString {
    bits: Vec<bool>,
}

impl AdjacencyString {
    pub fn from_graph(g: &Graph) -> Self {
        let map = g.edge_index_map();
        let mut bits = vec![false; map.len()];
        for (u, w) in g.edges() {
            bits[map.index(u, w).expect("edge endpoints are valid")] = true;
        }
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, index: usize) -> bool {
        self.bits[index]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

/// Subset of intermediate nodes, bit `j` standing for the `j`-th entry of
/// [`Graph::players`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coalition {
    width: usize,
    mask: u64,
}

impl Coalition {
    pub fn new(width: usize, mask: u64) -> Result<Self> {
        if width > 64 {
            return Err(Error::InvalidArgument(format!("coalition width {width} exceeds 64")));
        }
        if width < 64 && mask >> width != 0 {
            return Err(Error::InvalidArgument(format!("mask {mask:#x} has bits beyond width {width}")));
        }
        Ok(Self { width, mask })
    }

    pub fn empty(width: usize) -> Self {
        Self { width, mask: 0 }
    }

    pub fn full(width: usize) -> Self {
        let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
        Self { width, mask }
    }

    pub fn from_positions<I: IntoIterator<Item = usize>>(width: usize, positions: I) -> Result<Self> {
        let mut mask = 0u64;
        for p in positions {
            if p >= width {
                return Err(Error::InvalidArgument(format!("position {p} outside width {width}")));
            }
            mask |= 1 << p;
        }
        Self::new(width, mask)
    }

    /// Parses a bit string whose `j`-th character is bit `j`, e.g. `1100000`.
    pub fn parse_bits(text: &str) -> Result<Self> {
        let text = text.trim();
        let mut mask = 0u64;
        for (j, ch) in text.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => mask |= 1 << j,
                other => return Err(Error::InvalidArgument(format!("invalid coalition character `{other}`"))),
            }
        }
        Self::new(text.chars().count(), mask)
    }

    pub fn to_bits(&self) -> String {
        (0..self.width).map(|j| if self.contains(j) { '1' } else { '0' }).collect()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn contains(&self, position: usize) -> bool {
        position < self.width && self.mask >> position & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn with(&self, position: usize) -> Self {
        assert!(position < self.width);
        Self { width: self.width, mask: self.mask | 1 << position }
    }

    pub fn without(&self, position: usize) -> Self {
        assert!(position < self.width);
        Self { width: self.width, mask: self.mask & !(1 << position) }
    }

    pub fn is_subset_of(&self, other: &Coalition) -> bool {
        self.mask & !other.mask == 0
    }

    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.width).filter(move |&j| self.contains(j))
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bits())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn colex_order_for_four_nodes() {
        assert_eq!(colex_index(0, 1), 0);
        assert_eq!(colex_index(0, 2), 1);
        assert_eq!(colex_index(1, 2), 2);
        assert_eq!(colex_index(0, 3), 3);
        assert_eq!(colex_index(3, 0), 3);
        for k in 0..200 {
            let (u, w) = colex_pair(k);
            assert!(u < w);
            assert_eq!(colex_index(u, w), k);
        }
    }

    #[test]
    fn st_pair_gets_index_zero() {
        for n in 2..9 {
            for s in 0..n {
                for t in 0..n {
                    if s == t {
                        continue;
                    }
                    let map = EdgeIndexMap::new(n, s, t).unwrap();
                    assert_eq!(map.index(s, t).unwrap(), 0);
                    assert_eq!(map.index(t, s).unwrap(), 0);
                    let mut seen = vec![false; map.len()];
                    for k in 0..map.len() {
                        let (u, w) = map.pair(k).unwrap();
                        assert_eq!(map.index(w, u).unwrap(), k);
                        seen[k] = true;
                    }
                    assert!(seen.into_iter().all(|b| b));
                }
            }
        }
    }

    #[test]
    fn edge_index_errors() {
        let map = EdgeIndexMap::new(4, 0, 3).unwrap();
        assert_eq!(map.index(1, 1), Err(Error::SelfLoop(1)));
        assert!(matches!(map.index(1, 4), Err(Error::InvalidNode { node: 4, n: 4 })));
        assert!(map.pair(6).is_err());
    }

    #[test]
    fn parse_path_graph() {
        let g = Graph::parse("n 4\ns 0\nt 3\ne 0 1\ne 1 3").unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 3)]);
        assert!(g.is_st_connected_bfs());
    }

    #[test]
    fn parse_canonicalizes_and_dedupes() {
        let text = "# comment\nn 3\ns 0\nt 2\ne 1 0  # trailing\ne 0 1\ne 2 1\n";
        let g = Graph::parse(text).unwrap();
        assert_eq!(g.to_text(), "n 3\ns 0\nt 2\ne 0 1\ne 1 2\n");
        assert_eq!(Graph::parse(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn parse_errors() {
        let bad = [
            "n 4\ns 0\nt 3\ne 2 2",
            "n 4\ns 0\nt 3\ne 0 4",
            "n 4\ns 0\ne 0 1",
            "n 4\ns 0\nt 3\nx 1",
            "n 4\ns 0\nt 3\ne 0",
            "n 4\ns zero\nt 3",
            "n 4\ns 0\ns 1\nt 3",
            "n 4\ns 2\nt 2",
        ];
        for text in bad {
            assert!(matches!(Graph::parse(text), Err(Error::Parse { .. })), "{text:?}");
        }
        let err = Graph::parse("n 4\ns 0\nt 3\ne 2 2").unwrap_err();
        assert!(err.to_string().contains("self-loop"));
    }

    #[test]
    fn induced_subgraph_cases() {
        let g = fixtures::example();
        assert_eq!(g.induced_subgraph(&g.full_coalition()).unwrap(), g);
        let empty = g.induced_subgraph(&g.empty_coalition()).unwrap();
        assert_eq!(empty.edge_count(), 0);
        let ab = Coalition::parse_bits("1100000").unwrap();
        let h = g.induced_subgraph(&ab).unwrap();
        assert!(h.has_edge(0, 1) && h.has_edge(1, 2) && h.has_edge(2, 8));
        assert!(h.is_st_connected_bfs());
        assert!(g.induced_subgraph(&Coalition::full(3)).is_err());
    }

    #[test]
    fn bfs_cases() {
        assert!(fixtures::path().is_st_connected_bfs());
        let edgeless = Graph::new(4, 0, 3, []).unwrap();
        assert!(!edgeless.is_st_connected_bfs());
        let g = fixtures::example();
        let only_b = Coalition::parse_bits("0100000").unwrap();
        assert!(!g.induced_subgraph(&only_b).unwrap().is_st_connected_bfs());
    }

    #[test]
    fn value_function_cases() {
        let g = fixtures::series();
        assert_eq!(g.value_st(&Coalition::parse_bits("11").unwrap()), Ok(1));
        assert_eq!(g.value_st(&Coalition::parse_bits("10").unwrap()), Ok(0));
        assert_eq!(g.value_st(&g.empty_coalition()), Ok(0));
        let ex = fixtures::example();
        assert_eq!(ex.value_st(&Coalition::parse_bits("1100000").unwrap()), Ok(1));
        assert_eq!(ex.value_st(&Coalition::parse_bits("0100000").unwrap()), Ok(0));
        let trivial = fixtures::trivial();
        assert_eq!(trivial.value_st(&trivial.empty_coalition()), Err(Error::TriviallyConnected));
    }

    #[test]
    fn coalition_bits() {
        let c = Coalition::parse_bits("1100000").unwrap();
        assert_eq!(c.width(), 7);
        assert_eq!(c.mask(), 0b11);
        assert_eq!(c.to_string(), "1100000");
        assert!(Coalition::new(3, 0b1000).is_err());
        assert!(Coalition::parse_bits("10x").is_err());
        assert_eq!(Coalition::full(64).len(), 64);
    }

    #[test]
    fn adjacency_string_matches_edges() {
        let g = fixtures::diamond();
        let x = g.adjacency_string();
        let map = g.edge_index_map();
        assert_eq!(x.len(), pair_count(g.n()));
        assert!(!x.get(0));
        for k in 0..x.len() {
            let (u, w) = map.pair(k).unwrap();
            assert_eq!(x.get(k), g.has_edge(u, w));
        }
    }
}
