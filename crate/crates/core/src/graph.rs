//! Finite base graphs carrying a reversible transition kernel.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{stable_sum, ReversibleChain, WeightedSpace};
use crate::limits::PROB_TOL;

/// Index of a base vertex, always in `0..n`.
pub type VertexId = usize;

/// Finite vertex set with kernel `p(x, y)` reversible for `nu`.
///
/// Neighbor lists are sorted by vertex, merged, and include self-loops. The
/// adjacency relation `x ~ y` is "y appears in the row of x", which is
/// symmetric whenever the kernel is reversible.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseGraph {
    neighbors: Vec<Vec<(VertexId, f64)>>,
    nu: WeightedSpace,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReversibilityReport {
    pub max_violation: f64,
    pub worst_pair: Option<(VertexId, VertexId)>,
}

impl BaseGraph {
    /// Builds a graph from explicit rows and checks every invariant.
    pub fn new(rows: Vec<Vec<(VertexId, f64)>>, nu: Vec<f64>) -> Result<Self> {
        let g = Self::from_kernel_unverified(rows, nu)?;
        let report = validate_reversibility(&g);
        if report.max_violation > PROB_TOL {
            let (x, y) = report.worst_pair.expect("violation has a pair");
            return Err(Error::Reversibility {
                x,
                y,
                violation: report.max_violation,
            });
        }
        Ok(g)
    }

    /// Checks shape, measure and stochasticity but not detailed balance.
    ///
    /// Only meant for diagnosing candidate kernels with
    /// [`validate_reversibility`]; the spectral and log-Sobolev routines
    /// assume reversibility.
    pub fn from_kernel_unverified(rows: Vec<Vec<(VertexId, f64)>>, nu: Vec<f64>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Schema("graph has no vertices".into()));
        }
        if nu.len() != n {
            return Err(Error::Schema(format!(
                "nu has {} entries for {n} vertices",
                nu.len()
            )));
        }
        let nu_total = stable_sum(nu.iter().copied());
        if (nu_total - 1.0).abs() > PROB_TOL {
            return Err(Error::Schema(format!("nu sums to {nu_total}, expected 1")));
        }
        let nu = WeightedSpace::new(nu)?;

        let mut neighbors = Vec::with_capacity(n);
        for (x, row) in rows.into_iter().enumerate() {
            let mut merged: BTreeMap<VertexId, f64> = BTreeMap::new();
            for (y, p) in row {
                if y >= n {
                    return Err(Error::Schema(format!("vertex {y} out of range 0..{n}")));
                }
                if !p.is_finite() || p < 0.0 {
                    return Err(Error::Schema(format!(
                        "p({x},{y}) = {p} is not a probability"
                    )));
                }
                *merged.entry(y).or_default() += p;
            }
            let row: Vec<_> = merged.into_iter().filter(|&(_, p)| p > 0.0).collect();
            let row_sum = stable_sum(row.iter().map(|&(_, p)| p));
            if (row_sum - 1.0).abs() > PROB_TOL {
                return Err(Error::Stochasticity { vertex: x, row_sum });
            }
            neighbors.push(row);
        }
        Ok(Self { neighbors, nu })
    }

    pub fn vertex_count(&self) -> usize {
        self.neighbors.len()
    }

    /// Row of `x`: `(y, p(x, y))` pairs, self-loop included.
    pub fn neighbors(&self, x: VertexId) -> &[(VertexId, f64)] {
        &self.neighbors[x]
    }

    pub fn p(&self, x: VertexId, y: VertexId) -> f64 {
        self.neighbors[x]
            .binary_search_by_key(&y, |&(v, _)| v)
            .map(|i| self.neighbors[x][i].1)
            .unwrap_or(0.0)
    }

    pub fn is_adjacent(&self, x: VertexId, y: VertexId) -> bool {
        self.p(x, y) > 0.0
    }

    pub fn nu(&self) -> &WeightedSpace {
        &self.nu
    }

    /// `nu* = min_x nu(x)`.
    pub fn nu_star(&self) -> f64 {
        self.nu.min_weight()
    }

    /// Unordered pairs `x < y` with `x ~ y`.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::new();
        for (x, row) in self.neighbors.iter().enumerate() {
            out.extend(row.iter().filter(|&&(y, _)| y > x).map(|&(y, _)| (x, y)));
        }
        out
    }

    /// Number of distinct neighbors other than `x` itself.
    pub fn degree(&self, x: VertexId) -> usize {
        self.neighbors[x].iter().filter(|&&(y, _)| y != x).count()
    }

    /// True for `K_n` with self-loops: `p(x, y) = 1/n` for every ordered pair.
    pub fn is_complete_uniform(&self) -> bool {
        let n = self.vertex_count();
        let target = 1.0 / n as f64;
        self.nu.is_uniform()
            && self.neighbors.iter().all(|row| {
                row.len() == n && row.iter().all(|&(_, p)| (p - target).abs() <= PROB_TOL)
            })
    }

    /// Adjacency rows as bitmasks; only for graphs with at most 64 vertices.
    pub(crate) fn neighbor_masks(&self) -> Vec<u64> {
        assert!(self.vertex_count() <= 64);
        self.neighbors
            .iter()
            .map(|row| row.iter().fold(0u64, |m, &(y, _)| m | (1u64 << y)))
            .collect()
    }

    /// Serializes to the graph document format.
    pub fn to_document(&self) -> GraphDocument {
        let mut edges = Vec::new();
        let mut self_loops = Vec::new();
        for (x, row) in self.neighbors.iter().enumerate() {
            for &(y, p) in row {
                if y == x {
                    self_loops.push((x, p));
                } else if y > x {
                    edges.push((x, y, p, self.p(y, x)));
                }
            }
        }
        GraphDocument {
            n: self.vertex_count(),
            edges,
            self_loops,
            nu: Some(self.nu.weights().to_vec()),
        }
    }
}

impl ReversibleChain for BaseGraph {
    fn measure(&self) -> &WeightedSpace {
        &self.nu
    }

    fn for_each_rate(&self, s: usize, visit: &mut dyn FnMut(usize, f64)) {
        for &(t, p) in &self.neighbors[s] {
            if t != s {
                visit(t, p);
            }
        }
    }
}

/// Largest `|nu(x)p(x,y) - nu(y)p(y,x)|` over listed pairs.
pub fn validate_reversibility(g: &BaseGraph) -> ReversibilityReport {
    let mut report = ReversibilityReport {
        max_violation: 0.0,
        worst_pair: None,
    };
    for x in 0..g.vertex_count() {
        for &(y, pxy) in g.neighbors(x) {
            let v = (g.nu.weight(x) * pxy - g.nu.weight(y) * g.p(y, x)).abs();
            if v > report.max_violation {
                report.max_violation = v;
                report.worst_pair = Some((x.min(y), x.max(y)));
            }
        }
    }
    report
}

fn check_cap(what: &'static str, requested: Option<usize>, cap: usize) -> Result<usize> {
    match requested {
        Some(r) if r <= cap => Ok(r),
        Some(r) => Err(Error::cap(what, r as u128, cap as u128)),
        None => Err(Error::cap(what, u128::MAX, cap as u128)),
    }
}

/// The `d`-dimensional discrete torus `Z_n^d` with the simple random walk.
///
/// For `n = 2` both directions along an axis reach the same vertex and the
/// parallel edges merge into one of probability `1/d`.
pub fn build_torus(n: usize, d: usize, cap: usize) -> Result<BaseGraph> {
    if n < 2 || d < 1 {
        return Err(Error::Domain(format!(
            "torus needs side >= 2 and dim >= 1, got ({n}, {d})"
        )));
    }
    let size = check_cap("torus vertices", n.checked_pow(d as u32), cap)?;
    let p = 1.0 / (2 * d) as f64;
    let rows = (0..size)
        .map(|v| {
            let mut row = Vec::with_capacity(2 * d);
            let mut stride = 1;
            for _ in 0..d {
                let coord = (v / stride) % n;
                let base = v - coord * stride;
                row.push((base + ((coord + 1) % n) * stride, p));
                row.push((base + ((coord + n - 1) % n) * stride, p));
                stride *= n;
            }
            row
        })
        .collect();
    BaseGraph::new(rows, vec![1.0 / size as f64; size])
}

/// `K_n` with self-loops: `p(x, y) = 1/n` for every ordered pair.
pub fn build_complete(n: usize) -> Result<BaseGraph> {
    if n == 0 {
        return Err(Error::Domain("complete graph needs n >= 1".into()));
    }
    let p = 1.0 / n as f64;
    let rows = (0..n).map(|_| (0..n).map(|y| (y, p)).collect()).collect();
    BaseGraph::new(rows, vec![p; n])
}

fn tree_size(b: usize, depth: usize, cap: usize) -> Result<usize> {
    if b < 2 || depth < 1 {
        return Err(Error::Domain(format!(
            "tree needs b >= 2 and depth >= 1, got ({b}, {depth})"
        )));
    }
    let mut total: usize = 1;
    let mut level: usize = 1;
    for _ in 0..depth {
        level = check_cap("tree vertices", level.checked_mul(b), cap)?;
        total = check_cap("tree vertices", total.checked_add(level), cap)?;
    }
    Ok(total)
}

fn tree_adjacency(b: usize, size: usize) -> Vec<Vec<VertexId>> {
    let mut adj = vec![Vec::new(); size];
    for child in 1..size {
        let parent = (child - 1) / b;
        adj[parent].push(child);
        adj[child].push(parent);
    }
    adj
}

/// Complete rooted `b`-ary tree with the max-degree lazy walk.
///
/// Each tree edge carries `1/(b+1)` and the remaining mass sits on a
/// self-loop, so the kernel is symmetric and `nu` is uniform. Vertices are
/// numbered breadth first with the root at 0.
pub fn build_tree(b: usize, depth: usize, cap: usize) -> Result<BaseGraph> {
    let size = tree_size(b, depth, cap)?;
    let p = 1.0 / (b + 1) as f64;
    let rows = tree_adjacency(b, size)
        .into_iter()
        .enumerate()
        .map(|(x, nbrs)| {
            let hold = 1.0 - nbrs.len() as f64 * p;
            let mut row: Vec<_> = nbrs.into_iter().map(|y| (y, p)).collect();
            if hold > 0.0 {
                row.push((x, hold));
            }
            row
        })
        .collect();
    BaseGraph::new(rows, vec![1.0 / size as f64; size])
}

/// Complete rooted `b`-ary tree with the simple random walk `p = 1/deg(x)`,
/// reversible for `nu(x) = deg(x) / 2|E|`.
pub fn build_tree_degree_walk(b: usize, depth: usize, cap: usize) -> Result<BaseGraph> {
    let size = tree_size(b, depth, cap)?;
    let adj = tree_adjacency(b, size);
    let two_edges = 2 * (size - 1);
    let nu = adj
        .iter()
        .map(|a| a.len() as f64 / two_edges as f64)
        .collect();
    let rows = adj
        .into_iter()
        .map(|nbrs| {
            let p = 1.0 / nbrs.len() as f64;
            nbrs.into_iter().map(|y| (y, p)).collect()
        })
        .collect();
    BaseGraph::new(rows, nu)
}

/// The hypercube `{0,1}^N` with `p(x, y) = 1/N` across each Hamming edge.
pub fn build_hypercube(dim: usize, cap: usize) -> Result<BaseGraph> {
    if dim == 0 {
        return Err(Error::Domain("hypercube needs N >= 1".into()));
    }
    let size = check_cap(
        "hypercube vertices",
        u32::try_from(dim)
            .ok()
            .and_then(|d| 1usize.checked_shl(d))
            .filter(|_| dim < 64),
        cap,
    )?;
    let p = 1.0 / dim as f64;
    let rows = (0..size)
        .map(|x| (0..dim).map(|i| (x ^ (1 << i), p)).collect())
        .collect();
    BaseGraph::new(rows, vec![1.0 / size as f64; size])
}

/// Two-point torus: `p(0,1) = p(1,0) = 1/2`, lazy half on each vertex.
pub fn build_two_point() -> BaseGraph {
    BaseGraph::new(
        vec![vec![(0, 0.5), (1, 0.5)], vec![(0, 0.5), (1, 0.5)]],
        vec![0.5, 0.5],
    )
    .expect("two-point graph is valid")
}

/// Random connected weighted graph with the conductance walk.
///
/// A random spanning path is joined by each further pair with probability
/// `density`, every edge and self-loop gets a conductance in `[0.1, 1)`, and
/// `p(x, y) = w(x, y) / w(x)` is reversible for `nu(x) = w(x) / sum w`.
#[allow(clippy::needless_range_loop)]
pub fn build_random_reversible(n: usize, density: f64, seed: u64) -> Result<BaseGraph> {
    use rand::seq::SliceRandom;
    use rand::Rng;

    if n < 2 {
        return Err(Error::Domain(format!("random graph needs n >= 2, got {n}")));
    }
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::Domain(format!("density {density} outside [0, 1]")));
    }
    let mut rng = crate::seeding::rng_for(seed, 0x7261_6e64, n as u64);
    let mut w = vec![vec![0.0; n]; n];
    let mut order: Vec<VertexId> = (0..n).collect();
    order.shuffle(&mut rng);
    for pair in order.windows(2) {
        let c = rng.gen_range(0.1..1.0);
        w[pair[0]][pair[1]] = c;
        w[pair[1]][pair[0]] = c;
    }
    for x in 0..n {
        for y in x + 1..n {
            if w[x][y] == 0.0 && rng.gen_bool(density) {
                let c = rng.gen_range(0.1..1.0);
                w[x][y] = c;
                w[y][x] = c;
            }
        }
        if rng.gen_bool(0.5) {
            w[x][x] = rng.gen_range(0.1..1.0);
        }
    }
    let totals: Vec<f64> = w
        .iter()
        .map(|row| stable_sum(row.iter().copied()))
        .collect();
    let grand = stable_sum(totals.iter().copied());
    let rows = w
        .iter()
        .zip(&totals)
        .map(|(row, &t)| {
            row.iter()
                .enumerate()
                .filter(|&(_, &c)| c > 0.0)
                .map(|(y, &c)| (y, c / t))
                .collect()
        })
        .collect();
    BaseGraph::new(rows, totals.iter().map(|t| t / grand).collect())
}

/// JSON graph document. Edges are listed once per unordered pair as
/// `[x, y, p(x,y), p(y,x)]`; a missing `nu` means uniform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub n: usize,
    #[serde(default)]
    pub edges: Vec<(VertexId, VertexId, f64, f64)>,
    #[serde(default)]
    pub self_loops: Vec<(VertexId, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<Vec<f64>>,
}

impl GraphDocument {
    pub fn into_graph(self) -> Result<BaseGraph> {
        let n = self.n;
        if n == 0 {
            return Err(Error::Schema("graph has no vertices".into()));
        }
        let mut rows = vec![Vec::new(); n];
        for (x, y, pxy, pyx) in self.edges {
            if x >= n || y >= n {
                return Err(Error::Schema(format!(
                    "edge ({x}, {y}) out of range 0..{n}"
                )));
            }
            if x == y {
                return Err(Error::Schema(format!(
                    "edge ({x}, {x}) is a self-loop; list it under self_loops"
                )));
            }
            rows[x].push((y, pxy));
            rows[y].push((x, pyx));
        }
        for (x, p) in self.self_loops {
            if x >= n {
                return Err(Error::Schema(format!(
                    "self-loop at {x} out of range 0..{n}"
                )));
            }
            rows[x].push((x, p));
        }
        let nu = self.nu.unwrap_or_else(|| vec![1.0 / n as f64; n]);
        BaseGraph::new(rows, nu)
    }
}

/// Parses and validates a graph document.
pub fn load_graph(document: &str) -> Result<BaseGraph> {
    let doc: GraphDocument =
        serde_json::from_str(document).map_err(|e| Error::Schema(e.to_string()))?;
    doc.into_graph()
}

/// Bitset over the vertices of a graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubsetMask {
    n: usize,
    words: Vec<u64>,
}

impl SubsetMask {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn from_indices<I: IntoIterator<Item = VertexId>>(n: usize, indices: I) -> Self {
        let mut s = Self::empty(n);
        for i in indices {
            s.insert(i);
        }
        s
    }

    /// Low `n` bits of `bits`; requires `n <= 64`.
    pub fn from_bits(n: usize, bits: u64) -> Self {
        assert!(n <= 64);
        let mut s = Self::empty(n);
        if n > 0 {
            let keep = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
            s.words[0] = bits & keep;
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, i: VertexId) {
        assert!(i < self.n, "vertex {i} out of range");
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: VertexId) -> bool {
        i < self.n && self.words[i / 64] & (1 << (i % 64)) != 0
    }

    /// Number of members (popcount).
    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.n
    }

    pub fn is_subset_of(&self, other: &SubsetMask) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.n).filter(move |&i| self.contains(i))
    }

    /// The bits as a `u64`; requires `n <= 64`.
    pub fn bits(&self) -> u64 {
        assert!(self.n <= 64);
        self.words.first().copied().unwrap_or(0)
    }
}

/// `closure(B) = { x : x ~ y for some y in B }`.
///
/// This is the neighbor set of `B`, which contains `B` only where self-loops
/// or internal edges put it there.
pub fn closure(g: &BaseGraph, b: &SubsetMask) -> Result<SubsetMask> {
    if b.is_empty() {
        return Err(Error::EmptySubset);
    }
    assert_eq!(b.universe(), g.vertex_count(), "subset universe mismatch");
    let mut out = SubsetMask::empty(g.vertex_count());
    for y in b.iter() {
        for &(x, _) in g.neighbors(y) {
            out.insert(x);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const CAP: usize = 1 << 20;

    fn assert_invariants(g: &BaseGraph) {
        for x in 0..g.vertex_count() {
            let s: f64 = g.neighbors(x).iter().map(|&(_, p)| p).sum();
            assert!((s - 1.0).abs() <= 1e-12);
        }
        assert!(validate_reversibility(g).max_violation <= 1e-12);
        assert!((g.nu().weights().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn torus_cycle_four() {
        let g = build_torus(4, 1, CAP).unwrap();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.neighbors(0), &[(1, 0.5), (3, 0.5)]);
        assert!(g.nu().weights().iter().all(|&w| w == 0.25));
        assert_invariants(&g);
    }

    #[test]
    fn torus_two_dim_is_doubly_stochastic() {
        let g = build_torus(4, 2, CAP).unwrap();
        assert_eq!(g.vertex_count(), 16);
        let mut col = [0.0; 16];
        for x in 0..16 {
            assert_eq!(g.neighbors(x).len(), 4);
            for &(y, p) in g.neighbors(x) {
                col[y] += p;
            }
        }
        assert!(col.iter().all(|c| (c - 1.0).abs() < 1e-12));
        assert_invariants(&g);
    }

    #[test]
    fn torus_side_two_merges_parallel_edges() {
        let g = build_torus(2, 2, CAP).unwrap();
        assert_eq!(g.neighbors(0), &[(1, 0.5), (2, 0.5)]);
        let line = build_torus(2, 1, CAP).unwrap();
        assert_eq!(line.neighbors(0), &[(1, 1.0)]);
    }

    #[test]
    fn torus_cap() {
        assert!(matches!(
            build_torus(10, 7, CAP),
            Err(Error::CapExceeded { .. })
        ));
        assert!(matches!(
            build_torus(1 << 40, 3, CAP),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn complete_graph_rows() {
        let k1 = build_complete(1).unwrap();
        assert_eq!(k1.neighbors(0), &[(0, 1.0)]);
        let k4 = build_complete(4).unwrap();
        for x in 0..4 {
            for y in 0..4 {
                assert_eq!(k4.p(x, y), 0.25);
            }
        }
        assert!(k4.is_complete_uniform());
        assert!(!build_torus(4, 1, CAP).unwrap().is_complete_uniform());
    }

    #[test]
    fn tree_depth_one() {
        let g = build_tree(2, 1, CAP).unwrap();
        assert_eq!(g.vertex_count(), 3);
        let third = 1.0 / 3.0;
        assert_relative_eq!(g.p(0, 1), third);
        assert_relative_eq!(g.p(0, 2), third);
        assert_relative_eq!(g.p(0, 0), third, epsilon = 1e-15);
        assert_relative_eq!(g.p(1, 0), third);
        assert_relative_eq!(g.p(1, 1), 2.0 * third, epsilon = 1e-15);
    }

    #[test]
    fn trees_are_uniform_reversible() {
        let g = build_tree(2, 2, CAP).unwrap();
        assert_eq!(g.vertex_count(), 7);
        assert_invariants(&g);
        let g = build_tree(3, 2, CAP).unwrap();
        assert_eq!(g.vertex_count(), 13);
        assert_eq!(validate_reversibility(&g).max_violation, 0.0);
        let deg = build_tree_degree_walk(3, 2, CAP).unwrap();
        assert_invariants(&deg);
        assert!(!deg.nu().is_uniform());
    }

    #[test]
    fn naive_tree_kernel_breaks_uniform_balance() {
        // root 0 with leaves 1, 2; p = 1/deg(x) under uniform nu
        let rows = vec![vec![(1, 0.5), (2, 0.5)], vec![(0, 1.0)], vec![(0, 1.0)]];
        let g = BaseGraph::from_kernel_unverified(rows, vec![1.0 / 3.0; 3]).unwrap();
        let r = validate_reversibility(&g);
        let expected: f64 = (1.0 / 3.0 * 1.0 - 1.0 / 3.0 * 0.5f64).abs();
        assert_relative_eq!(r.max_violation, expected, epsilon = 1e-15);
        assert_eq!(r.worst_pair, Some((0, 1)));
    }

    #[test]
    fn hypercube_small() {
        let g = build_hypercube(1, CAP).unwrap();
        assert_eq!(g.neighbors(0), &[(1, 1.0)]);
        let g = build_hypercube(3, CAP).unwrap();
        assert_eq!(g.vertex_count(), 8);
        assert!((0..8).all(|x| g.degree(x) == 3));
        assert_invariants(&g);
        assert!(matches!(
            build_hypercube(21, CAP),
            Err(Error::CapExceeded { .. })
        ));
        assert!(matches!(
            build_hypercube(200, CAP),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn two_point() {
        let g = build_two_point();
        assert_eq!(validate_reversibility(&g).max_violation, 0.0);
        assert_eq!(g.p(0, 1), 0.5);
        assert_eq!(g.p(1, 1), 0.5);
    }

    #[test]
    fn load_cycle_round_trip() {
        let doc = r#"{"n": 4, "edges": [[0,1,0.5,0.5],[1,2,0.5,0.5],[2,3,0.5,0.5],[3,0,0.5,0.5]]}"#;
        let g = load_graph(doc).unwrap();
        assert_eq!(g, build_torus(4, 1, CAP).unwrap());
        let again = build_torus(4, 2, CAP)
            .unwrap()
            .to_document()
            .into_graph()
            .unwrap();
        assert_eq!(again, build_torus(4, 2, CAP).unwrap());
    }

    #[test]
    fn load_detects_broken_balance() {
        let doc = r#"{"n": 2, "edges": [[0,1,0.3,0.6]], "self_loops": [[0,0.7],[1,0.4]]}"#;
        match load_graph(doc) {
            Err(Error::Reversibility { x, y, violation }) => {
                assert_eq!((x, y), (0, 1));
                assert_relative_eq!(violation, 0.15, epsilon = 1e-15);
            }
            other => panic!("expected reversibility error, got {other:?}"),
        }
    }

    #[test]
    fn load_detects_bad_rows_and_schema() {
        let doc = r#"{"n": 2, "edges": [[0,1,0.5,0.5]], "self_loops": [[0,0.4],[1,0.5]]}"#;
        assert!(matches!(
            load_graph(doc),
            Err(Error::Stochasticity { vertex: 0, .. })
        ));
        assert!(matches!(
            load_graph(r#"{"n": 2, "bogus": 1}"#),
            Err(Error::Schema(_))
        ));
        assert!(matches!(
            load_graph(r#"{"n": 2, "edges": [[0,5,1,1]]}"#),
            Err(Error::Schema(_))
        ));
        assert!(matches!(load_graph("not json"), Err(Error::Schema(_))));
    }

    #[test]
    fn closure_examples() {
        let z4 = build_torus(4, 1, CAP).unwrap();
        let c = closure(&z4, &SubsetMask::from_indices(4, [0])).unwrap();
        assert_eq!(c.iter().collect::<Vec<_>>(), vec![1, 3]);

        let k4 = build_complete(4).unwrap();
        let c = closure(&k4, &SubsetMask::from_indices(4, [0])).unwrap();
        assert!(c.is_full());

        let z8 = build_torus(8, 1, CAP).unwrap();
        let c = closure(&z8, &SubsetMask::from_indices(8, [0, 4])).unwrap();
        assert_eq!(c.iter().collect::<Vec<_>>(), vec![1, 3, 5, 7]);

        assert!(matches!(
            closure(&z8, &SubsetMask::empty(8)),
            Err(Error::EmptySubset)
        ));
    }

    #[test]
    fn subset_mask_basics() {
        let s = SubsetMask::from_indices(70, [0, 3, 69]);
        assert_eq!(s.len(), 3);
        assert!(s.contains(69) && !s.contains(68));
        let t = SubsetMask::from_indices(70, [0, 3, 5, 69]);
        assert!(s.is_subset_of(&t) && !t.is_subset_of(&s));
        let b = SubsetMask::from_bits(5, 0b1111_1111);
        assert_eq!(b.len(), 5);
        assert!(b.is_full());
    }
}
