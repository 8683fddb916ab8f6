//! Cylinder sets of the one-sided path space and step functions built from
//! their indicators.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::graph::{DirectedMultigraph, PathWord, VertexId, DEFAULT_PATH_CAP};

/// The cylinder `Z(μ)` of infinite paths beginning with `μ`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cylinder {
    pub word: PathWord,
}

impl Cylinder {
    pub fn new(word: PathWord) -> Self {
        Self { word }
    }

    pub fn vertex(v: VertexId) -> Self {
        Self { word: PathWord::vertex(v) }
    }

    /// `Z(μ) ∩ Z(ν)`: the longer word when one extends the other.
    pub fn intersect(&self, other: &Cylinder) -> Option<Cylinder> {
        self.word.merge(&other.word).map(Cylinder::new)
    }

    /// Whether the cylinder contains an infinite path.
    pub fn is_nonempty(&self, g: &DirectedMultigraph) -> bool {
        g.supported_vertices().contains(&self.word.source(g))
    }
}

/// `|σ^{-N}(z)|` for any `z` with `r(z) = u`.
pub fn preimage_count(g: &DirectedMultigraph, u: VertexId, n: u32) -> Result<BigUint> {
    g.require_no_sinks()?;
    Ok(g.vertex_matrix().power_column_sums(n).swap_remove(u.0))
}

/// `{z ∈ Z(μ) : σ^l(z) ∈ Z(λ)}` as a single cylinder, or `None` when empty.
pub fn shifted_cylinder_constraint(
    g: &DirectedMultigraph,
    mu: &PathWord,
    l: usize,
    lambda: &PathWord,
) -> Result<Option<PathWord>> {
    if mu.len() < l {
        return Err(Error::InvalidArgument(alloc::format!(
            "word of length {} cannot be shifted by {l}; expand it first",
            mu.len()
        )));
    }
    let tail = mu.shifted(g, l);
    Ok(tail.merge(lambda).map(|m| {
        let mut edges = mu.edges[..l].to_vec();
        edges.extend_from_slice(&m.edges);
        PathWord { anchor: mu.anchor, edges }
    }))
}

/// A finite real combination of cylinder indicators, read as a step function
/// on the path space.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CylinderFunction {
    terms: BTreeMap<PathWord, f64>,
}

impl CylinderFunction {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn indicator(word: PathWord) -> Self {
        let mut f = Self::zero();
        f.add_term(word, 1.0);
        f
    }

    /// The constant function 1.
    pub fn one(g: &DirectedMultigraph) -> Self {
        let mut f = Self::zero();
        for v in g.vertices() {
            f.add_term(PathWord::vertex(v), 1.0);
        }
        f
    }

    pub fn add_term(&mut self, word: PathWord, coeff: f64) {
        if coeff == 0.0 {
            return;
        }
        let entry = self.terms.entry(word).or_insert(0.0);
        *entry += coeff;
        if *entry == 0.0 {
            self.terms.retain(|_, c| *c != 0.0);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PathWord, f64)> {
        self.terms.iter().map(|(w, &c)| (w, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_word_len(&self) -> usize {
        self.terms.keys().map(PathWord::len).max().unwrap_or(0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = Self::zero();
        for (w, a) in self.terms() {
            out.add_term(w.clone(), c * a);
        }
        out
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, a) in other.terms() {
            out.add_term(w.clone(), a);
        }
        out
    }

    /// Value on the cylinder `Z(κ)`, which must be deep enough to resolve
    /// every term.
    pub fn value_on(&self, kappa: &PathWord) -> Result<f64> {
        let mut v = 0.0;
        for (w, c) in self.terms() {
            if w.len() > kappa.len() {
                return Err(Error::Resolution { needed: w.len(), available: kappa.len() });
            }
            if w.is_prefix_of(kappa) {
                v += c;
            }
        }
        Ok(v)
    }

    /// Equivalent form with pairwise non-nested words: a word that prefixes
    /// another is split into its one-step extensions until no nesting remains.
    pub fn canonical(&self, g: &DirectedMultigraph) -> Self {
        let mut cur = self.clone();
        loop {
            let nested = cur
                .terms
                .keys()
                .find(|a| cur.terms.keys().any(|b| b != *a && a.is_prefix_of(b)))
                .cloned();
            let Some(a) = nested else { return cur };
            let c = cur.terms.remove(&a).unwrap();
            for &e in g.edges_into(a.source(g)) {
                cur.add_term(a.extended(e), c);
            }
        }
    }

    /// Rewrites every word shorter than `len` as the sum over its extensions
    /// of length `len`.
    pub fn refined_to(&self, g: &DirectedMultigraph, len: usize) -> Self {
        let mut out = Self::zero();
        for (w, c) in self.terms() {
            if w.len() >= len {
                out.add_term(w.clone(), c);
                continue;
            }
            let mut layer = alloc::vec![w.clone()];
            for _ in w.len()..len {
                layer = layer
                    .iter()
                    .flat_map(|p| g.edges_into(p.source(g)).iter().map(move |&e| p.extended(e)))
                    .collect();
            }
            for p in layer {
                out.add_term(p, c);
            }
        }
        out
    }

    /// Step-function values on every path of length `len`.
    pub fn values_at_depth(&self, g: &DirectedMultigraph, len: usize) -> Result<Vec<(PathWord, f64)>> {
        g.all_paths(len, DEFAULT_PATH_CAP)?
            .into_iter()
            .map(|p| self.value_on(&p).map(|v| (p, v)))
            .collect()
    }

    /// Whether the function is pointwise nonnegative.
    pub fn is_nonnegative(&self, g: &DirectedMultigraph) -> bool {
        let len = self.max_word_len();
        match self.values_at_depth(g, len) {
            Ok(vals) => vals.iter().all(|&(_, v)| v >= 0.0),
            Err(_) => false,
        }
    }

    /// Whether every coefficient is nonnegative.
    pub fn has_nonnegative_coefficients(&self) -> bool {
        self.terms.values().all(|&c| c >= 0.0)
    }

    /// Pointwise product `a·x`, the left action of the coefficient algebra.
    pub fn pointwise(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (a, c) in self.terms() {
            for (b, d) in other.terms() {
                if let Some(m) = a.merge(b) {
                    out.add_term(m, c * d);
                }
            }
        }
        out
    }

    /// Right action `(x·a)(w) = x(w) a(σ w)`. Words of `self` must have
    /// length at least 1.
    pub fn right_action(&self, g: &DirectedMultigraph, a: &Self) -> Result<Self> {
        self.right_action_by(g, 1, a)
    }

    /// `(x·a)(w) = x(w) a(σ^k w)` for `x` viewed in the `k`-fold tensor power.
    pub fn right_action_by(&self, g: &DirectedMultigraph, k: usize, a: &Self) -> Result<Self> {
        let x = self.refined_min(g, k);
        let mut out = Self::zero();
        for (mu, c) in x.terms() {
            for (lambda, d) in a.terms() {
                if let Some(w) = shifted_cylinder_constraint(g, mu, k, lambda)? {
                    out.add_term(w, c * d);
                }
            }
        }
        Ok(out)
    }

    /// Every word lengthened to at least `k` edges.
    fn refined_min(&self, g: &DirectedMultigraph, k: usize) -> Self {
        if self.max_word_len() >= k && self.terms.keys().all(|w| w.len() >= k) {
            return self.clone();
        }
        let mut out = Self::zero();
        for (w, c) in self.terms() {
            if w.len() >= k {
                out.add_term(w.clone(), c);
            } else {
                let single = Self::indicator(w.clone()).refined_to(g, k);
                out = out.plus(&single.scaled(c));
            }
        }
        out
    }

    /// The coefficient-algebra inner product of the `k`-fold tensor power,
    /// `⟨x, y⟩(z) = Σ_{σ^k w = z} x(w) y(w)` (real coefficients).
    pub fn inner_product_by(&self, g: &DirectedMultigraph, k: usize, other: &Self) -> Self {
        let x = self.refined_min(g, k);
        let y = other.refined_min(g, k);
        let mut out = Self::zero();
        for (mu, c) in x.terms() {
            for (nu, d) in y.terms() {
                if let Some(m) = mu.merge(nu) {
                    out.add_term(m.shifted(g, k), c * d);
                }
            }
        }
        out
    }

    /// `⟨x, y⟩(z) = Σ_{σ w = z} x(w) y(w)`.
    pub fn inner_product(&self, g: &DirectedMultigraph, other: &Self) -> Self {
        self.inner_product_by(g, 1, other)
    }

    /// Supremum norm.
    pub fn sup_norm(&self, g: &DirectedMultigraph) -> Result<f64> {
        Ok(self
            .values_at_depth(g, self.max_word_len())?
            .into_iter()
            .map(|(_, v)| v.abs())
            .fold(0.0, f64::max))
    }
}
