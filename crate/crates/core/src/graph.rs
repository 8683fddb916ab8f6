//! Finite directed multigraphs, path words, vertex matrices and the
//! component decomposition.
//!
//! Paths follow the range/source convention: a path `e1 e2 … ek` is
//! composable when `s(e_i) = r(e_{i+1})`, so infinite paths extend to the
//! right and the shift drops the leftmost edge.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Index of a vertex in its graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

/// Index of an edge in its graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub range: VertexId,
    pub source: VertexId,
}

/// Default cap on the number of paths [`DirectedMultigraph::enumerate_paths`]
/// will materialise.
pub const DEFAULT_PATH_CAP: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedMultigraph {
    vertex_names: Vec<String>,
    edge_names: Vec<String>,
    edges: Vec<Edge>,
    /// Edges with range `v`, in edge-id order.
    incoming: Vec<Vec<EdgeId>>,
    /// Edges with source `v`, in edge-id order.
    outgoing: Vec<Vec<EdgeId>>,
}

impl DirectedMultigraph {
    /// Builds a graph from vertex names and `(edge name, range, source)`
    /// triples referring to those names.
    pub fn new(vertices: Vec<String>, edges: Vec<(String, String, String)>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Format(String::from("graph has no vertices")));
        }
        let mut index = BTreeMap::new();
        for (i, name) in vertices.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::Format(alloc::format!("duplicate vertex id {name:?}")));
            }
        }
        let lookup = |name: &String| {
            index
                .get(name)
                .copied()
                .map(VertexId)
                .ok_or_else(|| Error::Format(alloc::format!("edge refers to unknown vertex {name:?}")))
        };
        let mut seen = BTreeMap::new();
        let mut edge_names = Vec::with_capacity(edges.len());
        let mut list = Vec::with_capacity(edges.len());
        for (name, range, source) in &edges {
            if seen.insert(name.clone(), ()).is_some() {
                return Err(Error::Format(alloc::format!("duplicate edge id {name:?}")));
            }
            list.push(Edge { range: lookup(range)?, source: lookup(source)? });
            edge_names.push(name.clone());
        }
        Ok(Self::assemble(vertices, edge_names, list))
    }

    /// Builds a graph on vertices `0..num_vertices` named `"0"`, `"1"`, … with
    /// edges named `"e0"`, `"e1"`, … given as `(range, source)` pairs.
    pub fn from_pairs(num_vertices: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        if num_vertices == 0 {
            return Err(Error::Format(String::from("graph has no vertices")));
        }
        let mut edges = Vec::with_capacity(pairs.len());
        for &(r, s) in pairs {
            if r >= num_vertices || s >= num_vertices {
                return Err(Error::Format(alloc::format!(
                    "edge ({r}, {s}) refers to a vertex outside 0..{num_vertices}"
                )));
            }
            edges.push(Edge { range: VertexId(r), source: VertexId(s) });
        }
        let vertex_names = (0..num_vertices).map(|i| alloc::format!("{i}")).collect();
        let edge_names = (0..pairs.len()).map(|i| alloc::format!("e{i}")).collect();
        Ok(Self::assemble(vertex_names, edge_names, edges))
    }

    fn assemble(vertex_names: Vec<String>, edge_names: Vec<String>, edges: Vec<Edge>) -> Self {
        let n = vertex_names.len();
        let mut incoming = vec![Vec::new(); n];
        let mut outgoing = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            incoming[e.range.0].push(EdgeId(i));
            outgoing[e.source.0].push(EdgeId(i));
        }
        Self { vertex_names, edge_names, edges, incoming, outgoing }
    }

    pub fn num_vertices(&self) -> usize {
        self.vertex_names.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.num_vertices()).map(VertexId)
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.num_edges()).map(EdgeId)
    }

    pub fn edge(&self, e: EdgeId) -> Edge {
        self.edges[e.0]
    }

    pub fn range(&self, e: EdgeId) -> VertexId {
        self.edges[e.0].range
    }

    pub fn source(&self, e: EdgeId) -> VertexId {
        self.edges[e.0].source
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertex_names[v.0]
    }

    pub fn edge_name(&self, e: EdgeId) -> &str {
        &self.edge_names[e.0]
    }

    pub fn vertex_by_name(&self, name: &str) -> Option<VertexId> {
        self.vertex_names.iter().position(|n| n == name).map(VertexId)
    }

    pub fn edge_by_name(&self, name: &str) -> Option<EdgeId> {
        self.edge_names.iter().position(|n| n == name).map(EdgeId)
    }

    /// Edges `e` with `r(e) = v`.
    pub fn edges_into(&self, v: VertexId) -> &[EdgeId] {
        &self.incoming[v.0]
    }

    /// Edges `e` with `s(e) = v`.
    pub fn edges_from(&self, v: VertexId) -> &[EdgeId] {
        &self.outgoing[v.0]
    }

    /// Vertices emitting no edges. The shift on the infinite-path space is
    /// surjective exactly when this is empty.
    pub fn sinks(&self) -> Vec<VertexId> {
        self.vertices().filter(|v| self.outgoing[v.0].is_empty()).collect()
    }

    /// Vertices receiving no edges; their cylinder sets are empty.
    pub fn sources(&self) -> Vec<VertexId> {
        self.vertices().filter(|v| self.incoming[v.0].is_empty()).collect()
    }

    pub fn has_sinks(&self) -> bool {
        self.outgoing.iter().any(Vec::is_empty)
    }

    pub fn require_no_sinks(&self) -> Result<()> {
        match self.sinks().first() {
            Some(&v) => Err(Error::Sink { vertex: String::from(self.vertex_name(v)) }),
            None => Ok(()),
        }
    }

    /// Vertices `v` with `Z(v)` nonempty, i.e. the ranges of infinite paths.
    pub fn supported_vertices(&self) -> Vec<VertexId> {
        // v supports an infinite path iff it can reach a cycle by repeatedly
        // stepping from r(e) to s(e).
        let n = self.num_vertices();
        let mut alive = vec![true; n];
        loop {
            let mut changed = false;
            for v in 0..n {
                if alive[v] && !self.incoming[v].iter().any(|&e| alive[self.source(e).0]) {
                    alive[v] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        (0..n).filter(|&v| alive[v]).map(VertexId).collect()
    }

    pub fn vertex_matrix(&self) -> VertexMatrix {
        let n = self.num_vertices();
        let mut entries = vec![0u64; n * n];
        for e in &self.edges {
            entries[e.range.0 * n + e.source.0] += 1;
        }
        VertexMatrix { n, entries }
    }

    /// All paths of length `len` with source `v`, in lexicographic order.
    pub fn enumerate_paths(&self, v: VertexId, len: usize, cap: usize) -> Result<Vec<PathWord>> {
        let mut layer = vec![PathWord::vertex(v)];
        for _ in 0..len {
            let mut next = Vec::new();
            for w in &layer {
                for &e in self.edges_from(w.anchor) {
                    if next.len() >= cap {
                        return Err(Error::TooManyPaths { cap });
                    }
                    let mut edges = Vec::with_capacity(w.edges.len() + 1);
                    edges.push(e);
                    edges.extend_from_slice(&w.edges);
                    next.push(PathWord { anchor: self.range(e), edges });
                }
            }
            layer = next;
        }
        layer.sort();
        Ok(layer)
    }

    /// All paths of length `len` with range `v` (the cylinders partitioning
    /// `Z(v)` at depth `len`), in lexicographic order.
    pub fn paths_from_range(&self, v: VertexId, len: usize, cap: usize) -> Result<Vec<PathWord>> {
        let mut layer = vec![PathWord::vertex(v)];
        for _ in 0..len {
            let mut next = Vec::new();
            for w in &layer {
                for &e in self.edges_into(w.source(self)) {
                    if next.len() >= cap {
                        return Err(Error::TooManyPaths { cap });
                    }
                    next.push(w.extended(e));
                }
            }
            layer = next;
        }
        Ok(layer)
    }

    /// Every path of length `len`, in lexicographic order.
    pub fn all_paths(&self, len: usize, cap: usize) -> Result<Vec<PathWord>> {
        let mut out = Vec::new();
        for v in self.vertices() {
            let remaining = cap.saturating_sub(out.len());
            out.extend(self.paths_from_range(v, len, remaining.max(1))?);
            if out.len() > cap {
                return Err(Error::TooManyPaths { cap });
            }
        }
        Ok(out)
    }

    /// Checks that a word is a path in this graph.
    pub fn validate_word(&self, w: &PathWord) -> Result<()> {
        if w.anchor.0 >= self.num_vertices() {
            return Err(Error::InvalidWord(String::from("anchor vertex out of range")));
        }
        let mut at = w.anchor;
        for &e in &w.edges {
            if e.0 >= self.num_edges() {
                return Err(Error::InvalidWord(alloc::format!("unknown edge index {}", e.0)));
            }
            if self.range(e) != at {
                return Err(Error::InvalidWord(alloc::format!(
                    "edge {} does not compose: expected range {}",
                    self.edge_name(e),
                    self.vertex_name(at)
                )));
            }
            at = self.source(e);
        }
        Ok(())
    }

    /// Builds the path `e1 … ek` from edge ids, checking composability.
    pub fn path(&self, edges: &[EdgeId]) -> Result<PathWord> {
        let first = edges
            .first()
            .ok_or_else(|| Error::InvalidWord(String::from("empty edge list; use a vertex word")))?;
        if first.0 >= self.num_edges() {
            return Err(Error::InvalidWord(alloc::format!("unknown edge index {}", first.0)));
        }
        let w = PathWord { anchor: self.range(*first), edges: edges.to_vec() };
        self.validate_word(&w)?;
        Ok(w)
    }

    /// Tarjan's algorithm followed by a stable topological sort of the
    /// condensation, ordered so the vertex matrix is block upper-triangular.
    pub fn scc_decompose(&self) -> ComponentDecomposition {
        let raw = tarjan(self);
        let ncomp = raw.len();
        let mut comp_of = vec![0usize; self.num_vertices()];
        for (c, comp) in raw.iter().enumerate() {
            for &v in comp {
                comp_of[v] = c;
            }
        }
        // Block upper-triangular means an edge with range in C and source in
        // C' forces C to precede C'.
        let mut succ = vec![Vec::new(); ncomp];
        let mut indeg = vec![0usize; ncomp];
        for e in &self.edges {
            let (cr, cs) = (comp_of[e.range.0], comp_of[e.source.0]);
            if cr != cs && !succ[cr].contains(&cs) {
                succ[cr].push(cs);
                indeg[cs] += 1;
            }
        }
        let key: Vec<usize> = raw.iter().map(|c| *c.iter().min().unwrap()).collect();
        let mut ready: alloc::collections::BTreeSet<(usize, usize)> =
            (0..ncomp).filter(|&c| indeg[c] == 0).map(|c| (key[c], c)).collect();
        let mut order = Vec::with_capacity(ncomp);
        while let Some(&(k, c)) = ready.iter().next() {
            ready.remove(&(k, c));
            order.push(c);
            for &d in &succ[c] {
                indeg[d] -= 1;
                if indeg[d] == 0 {
                    ready.insert((key[d], d));
                }
            }
        }
        let components = order
            .iter()
            .map(|&c| {
                let mut vertices: Vec<VertexId> = raw[c].iter().copied().map(VertexId).collect();
                vertices.sort();
                let nontrivial = vertices.len() > 1
                    || self.edges.iter().any(|e| e.range == vertices[0] && e.source == vertices[0]);
                Component { vertices, nontrivial }
            })
            .collect::<Vec<_>>();
        let mut component_of = vec![0usize; self.num_vertices()];
        for (i, c) in components.iter().enumerate() {
            for v in &c.vertices {
                component_of[v.0] = i;
            }
        }
        ComponentDecomposition { components, component_of }
    }

    /// `v ≤ w` iff there is a path with range `v` and source `w`.
    pub fn reachability(&self) -> Vec<Vec<bool>> {
        let n = self.num_vertices();
        let mut reach = vec![vec![false; n]; n];
        for v in 0..n {
            reach[v][v] = true;
            let mut stack = vec![v];
            while let Some(u) = stack.pop() {
                for &e in &self.incoming[u] {
                    let s = self.source(e).0;
                    if !reach[v][s] {
                        reach[v][s] = true;
                        stack.push(s);
                    }
                }
            }
        }
        reach
    }

    /// `H` is hereditary when `v ∈ H` and `v ≤ w` imply `w ∈ H`.
    pub fn is_hereditary(&self, set: &[VertexId]) -> bool {
        let reach = self.reachability();
        let member = |v: usize| set.iter().any(|x| x.0 == v);
        set.iter().all(|v| (0..self.num_vertices()).all(|w| !reach[v.0][w] || member(w)))
    }
}

fn tarjan(g: &DirectedMultigraph) -> Vec<Vec<usize>> {
    let n = g.num_vertices();
    // Successors along v -> s(e) for e with r(e) = v, i.e. the order `≤`.
    let succ: Vec<Vec<usize>> =
        (0..n).map(|v| g.incoming[v].iter().map(|&e| g.source(e).0).collect()).collect();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0usize;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut next)) = call.last_mut() {
            if *next < succ[v].len() {
                let w = succ[v][*next];
                *next += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comps.push(comp);
                }
            }
        }
    }
    comps
}

/// A finite path `e1 … ek` anchored at its range vertex. Length zero is the
/// vertex itself.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PathWord {
    /// `r(e1)`, or the vertex for a length-zero word.
    pub anchor: VertexId,
    pub edges: Vec<EdgeId>,
}

impl PathWord {
    pub fn vertex(v: VertexId) -> Self {
        Self { anchor: v, edges: Vec::new() }
    }

    /// Single-edge path; does not need the graph beyond the edge's range.
    pub fn edge(g: &DirectedMultigraph, e: EdgeId) -> Self {
        Self { anchor: g.range(e), edges: vec![e] }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_vertex(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn range(&self) -> VertexId {
        self.anchor
    }

    pub fn source(&self, g: &DirectedMultigraph) -> VertexId {
        self.edges.last().map_or(self.anchor, |&e| g.source(e))
    }

    /// Whether `self` is an initial segment of `other`.
    pub fn is_prefix_of(&self, other: &PathWord) -> bool {
        self.anchor == other.anchor && other.edges.starts_with(&self.edges)
    }

    /// The first `k` edges.
    pub fn prefix(&self, k: usize) -> PathWord {
        PathWord { anchor: self.anchor, edges: self.edges[..k].to_vec() }
    }

    /// `σ^k` applied to the word: drops the first `k` edges.
    pub fn shifted(&self, g: &DirectedMultigraph, k: usize) -> PathWord {
        assert!(k <= self.len(), "cannot shift a word of length {} by {k}", self.len());
        if k == 0 {
            return self.clone();
        }
        PathWord { anchor: g.source(self.edges[k - 1]), edges: self.edges[k..].to_vec() }
    }

    /// Concatenation, or `None` when `s(self) ≠ r(other)`.
    pub fn concat(&self, g: &DirectedMultigraph, other: &PathWord) -> Option<PathWord> {
        if self.source(g) != other.anchor {
            return None;
        }
        let mut edges = self.edges.clone();
        edges.extend_from_slice(&other.edges);
        Some(PathWord { anchor: self.anchor, edges })
    }

    /// Appends an edge without checking composability.
    pub fn extended(&self, e: EdgeId) -> PathWord {
        let mut edges = self.edges.clone();
        edges.push(e);
        PathWord { anchor: self.anchor, edges }
    }

    /// The longer of two prefix-nested words, else `None`.
    pub fn merge(&self, other: &PathWord) -> Option<PathWord> {
        if self.is_prefix_of(other) {
            Some(other.clone())
        } else if other.is_prefix_of(self) {
            Some(self.clone())
        } else {
            None
        }
    }

    pub fn display<'a>(&'a self, g: &'a DirectedMultigraph) -> WordDisplay<'a> {
        WordDisplay { word: self, graph: g }
    }
}

pub struct WordDisplay<'a> {
    word: &'a PathWord,
    graph: &'a DirectedMultigraph,
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_vertex() {
            return write!(f, "{}", self.graph.vertex_name(self.word.anchor));
        }
        for (i, &e) in self.word.edges.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(self.graph.edge_name(e))?;
        }
        Ok(())
    }
}

/// `A(v, w)` = number of edges with range `v` and source `w`, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexMatrix {
    n: usize,
    entries: Vec<u64>,
}

impl VertexMatrix {
    pub fn from_rows(rows: &[Vec<u64>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "vertex matrix must be square");
        Self { n, entries: rows.iter().flatten().copied().collect() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, v: usize, w: usize) -> u64 {
        self.entries[v * self.n + w]
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.entries.chunks(self.n.max(1)).map(<[u64]>::to_vec).collect()
    }

    /// Restriction to the rows and columns in `idx`.
    pub fn submatrix(&self, idx: &[usize]) -> VertexMatrix {
        let entries = idx.iter().flat_map(|&v| idx.iter().map(move |&w| (v, w))).map(|(v, w)| self.get(v, w)).collect();
        VertexMatrix { n: idx.len(), entries }
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|v| (0..self.n).map(|w| self.get(v, w) as f64).collect()).collect()
    }

    /// Largest column sum, `max_w Σ_v A(v, w)`.
    pub fn max_column_sum(&self) -> u64 {
        (0..self.n).map(|w| (0..self.n).map(|v| self.get(v, w)).sum()).max().unwrap_or(0)
    }

    /// Exact `A^N`.
    pub fn power(&self, exponent: u32) -> Vec<Vec<BigUint>> {
        let n = self.n;
        let mut acc: Vec<Vec<BigUint>> =
            (0..n).map(|i| (0..n).map(|j| if i == j { BigUint::one() } else { BigUint::zero() }).collect()).collect();
        for _ in 0..exponent {
            let mut next = vec![vec![BigUint::zero(); n]; n];
            for i in 0..n {
                for k in 0..n {
                    if acc[i][k].is_zero() {
                        continue;
                    }
                    for j in 0..n {
                        let a = self.get(k, j);
                        if a != 0 {
                            next[i][j] += &acc[i][k] * a;
                        }
                    }
                }
            }
            acc = next;
        }
        acc
    }

    /// `w ↦ Σ_v A^N(v, w)` in exact arithmetic.
    pub fn power_column_sums(&self, exponent: u32) -> Vec<BigUint> {
        self.column_sum_sequence(exponent).pop().unwrap()
    }

    /// Column sums of `A^0, A^1, …, A^max_exponent`.
    pub fn column_sum_sequence(&self, max_exponent: u32) -> Vec<Vec<BigUint>> {
        let n = self.n;
        let mut row = vec![BigUint::one(); n];
        let mut out = Vec::with_capacity(max_exponent as usize + 1);
        out.push(row.clone());
        for _ in 0..max_exponent {
            let mut next = vec![BigUint::zero(); n];
            for (v, rv) in row.iter().enumerate() {
                if rv.is_zero() {
                    continue;
                }
                for (w, nw) in next.iter_mut().enumerate() {
                    let a = self.get(v, w);
                    if a != 0 {
                        *nw += rv * a;
                    }
                }
            }
            row = next;
            out.push(row.clone());
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub vertices: Vec<VertexId>,
    /// Whether the induced subgraph contains a cycle.
    pub nontrivial: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentDecomposition {
    /// Components in block upper-triangular order.
    pub components: Vec<Component>,
    component_of: Vec<usize>,
}

impl ComponentDecomposition {
    pub fn component_of(&self, v: VertexId) -> usize {
        self.component_of[v.0]
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Vertex order obtained by concatenating the components.
    pub fn vertex_order(&self) -> Vec<VertexId> {
        self.components.iter().flat_map(|c| c.vertices.iter().copied()).collect()
    }

    /// Components receiving no edges from other components; each is hereditary.
    pub fn hereditary_components(&self, g: &DirectedMultigraph) -> Vec<usize> {
        (0..self.len())
            .filter(|&c| {
                !g.edge_ids().any(|e| {
                    self.component_of(g.range(e)) == c && self.component_of(g.source(e)) != c
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{cycle, dumbbell, single_loop};

    #[test]
    fn dumbbell_vertex_matrix() {
        let g = dumbbell(2, 3);
        assert_eq!(g.num_vertices(), 2);
        assert_eq!(g.num_edges(), 6);
        assert_eq!(g.vertex_matrix().rows(), vec![vec![2, 1], vec![0, 3]]);
    }

    #[test]
    fn small_matrices() {
        assert_eq!(single_loop().vertex_matrix().rows(), vec![vec![1]]);
        assert_eq!(cycle(2).vertex_matrix().rows(), vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn empty_edge_list_is_valid_with_a_sink() {
        let g = DirectedMultigraph::from_pairs(1, &[]).unwrap();
        assert_eq!(g.sinks(), vec![VertexId(0)]);
        assert!(g.require_no_sinks().is_err());
    }

    #[test]
    fn dangling_vertex_is_a_format_error() {
        let err = DirectedMultigraph::new(
            vec!["v".into()],
            vec![("e".into(), "v".into(), "w".into())],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Format(_)));
        assert!(DirectedMultigraph::new(vec![], vec![]).is_err());
        assert!(DirectedMultigraph::new(vec!["v".into(), "v".into()], vec![]).is_err());
    }

    #[test]
    fn dumbbell_column_sums() {
        let a = dumbbell(2, 3).vertex_matrix();
        let s1 = a.power_column_sums(1);
        let s2 = a.power_column_sums(2);
        assert_eq!(s1[1], BigUint::from(4u32));
        assert_eq!(s2[1], BigUint::from(14u32));
        assert_eq!(s2[0], BigUint::from(4u32));
    }

    #[test]
    fn column_sums_match_explicit_powers() {
        let a = VertexMatrix::from_rows(&[vec![1, 2, 0], vec![0, 1, 1], vec![3, 0, 0]]);
        for n in 0..7 {
            let p = a.power(n);
            let sums = a.power_column_sums(n);
            for w in 0..3 {
                let s: BigUint = (0..3).map(|v| p[v][w].clone()).sum();
                assert_eq!(s, sums[w]);
            }
        }
    }

    #[test]
    fn dumbbell_components() {
        let g = dumbbell(2, 3);
        let d = g.scc_decompose();
        assert_eq!(d.len(), 2);
        assert!(d.components.iter().all(|c| c.nontrivial));
        assert_eq!(d.components[0].vertices, vec![VertexId(0)]);
        assert_eq!(d.components[1].vertices, vec![VertexId(1)]);
        // w receives no edge from v, so {w} is the hereditary block.
        assert!(g.is_hereditary(&[VertexId(1)]));
        assert!(!g.is_hereditary(&[VertexId(0)]));
        assert_eq!(d.hereditary_components(&g), vec![1]);
    }

    #[test]
    fn strongly_connected_is_one_component() {
        let d = cycle(4).scc_decompose();
        assert_eq!(d.len(), 1);
        assert!(d.components[0].nontrivial);
    }

    #[test]
    fn dag_has_trivial_components() {
        // 0 <- 1 <- 2 (edges listed as (range, source))
        let g = DirectedMultigraph::from_pairs(3, &[(0, 1), (1, 2)]).unwrap();
        let d = g.scc_decompose();
        assert_eq!(d.len(), 3);
        assert!(d.components.iter().all(|c| !c.nontrivial));
        assert_eq!(d.vertex_order(), vec![VertexId(0), VertexId(1), VertexId(2)]);
    }

    #[test]
    fn enumerate_paths_examples() {
        let g = dumbbell(2, 3);
        assert_eq!(g.enumerate_paths(VertexId(1), 1, DEFAULT_PATH_CAP).unwrap().len(), 4);
        assert_eq!(g.enumerate_paths(VertexId(1), 0, DEFAULT_PATH_CAP).unwrap(), vec![PathWord::vertex(VertexId(1))]);
        let l = single_loop();
        assert_eq!(l.enumerate_paths(VertexId(0), 5, DEFAULT_PATH_CAP).unwrap().len(), 1);
        assert!(matches!(
            g.enumerate_paths(VertexId(1), 6, 100),
            Err(Error::TooManyPaths { cap: 100 })
        ));
    }

    #[test]
    fn enumerated_paths_are_valid_with_the_right_source() {
        let g = dumbbell(2, 3);
        for p in g.enumerate_paths(VertexId(1), 3, DEFAULT_PATH_CAP).unwrap() {
            g.validate_word(&p).unwrap();
            assert_eq!(p.source(&g), VertexId(1));
        }
    }

    #[test]
    fn word_operations() {
        let g = dumbbell(2, 3);
        let e0 = PathWord::edge(&g, EdgeId(0));
        let e0e1 = g.path(&[EdgeId(0), EdgeId(1)]).unwrap();
        assert!(e0.is_prefix_of(&e0e1));
        assert_eq!(e0.merge(&e0e1), Some(e0e1.clone()));
        assert_eq!(e0e1.shifted(&g, 1), PathWord::edge(&g, EdgeId(1)));
        assert_eq!(e0e1.shifted(&g, 2), PathWord::vertex(VertexId(0)));
        assert!(g.path(&[EdgeId(0), EdgeId(3)]).is_err());
        let names: alloc::string::String = alloc::format!("{}", e0e1.display(&g));
        assert_eq!(names, "v0 v1");
    }

    #[test]
    fn supported_vertices_exclude_dead_ends() {
        // vertex 1 receives nothing, so Z(1) is empty.
        let g = DirectedMultigraph::from_pairs(2, &[(0, 0), (0, 1)]).unwrap();
        assert_eq!(g.supported_vertices(), vec![VertexId(0)]);
        assert_eq!(g.sources(), vec![VertexId(1)]);
    }
}
