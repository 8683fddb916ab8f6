//! Symbolic elements of the Toeplitz algebra and the KMS states `φ_ε`.
//!
//! Every spanning element `ψ^l(χ_{Z(μ)}) ψ^m(χ_{Z(ν)})*` with `|μ| ≥ l` and
//! `|ν| ≥ m` equals `S_α P_γ S_β*`, where `α = μ_{1..l}`, `β = ν_{1..m}`,
//! `P_γ = π(χ_{Z(γ)})` and `γ` is the longer of the tails `σ^l μ`, `σ^m ν`
//! (the element is zero when the tails are not nested). Products of such
//! triples are again triples, which is what [`ToeplitzElement::multiply`]
//! implements.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;


#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::graph::{DirectedMultigraph, EdgeId, PathWord, VertexId, DEFAULT_PATH_CAP};
use crate::measure::{
    extend_vertex_measure, f_beta, normalize_to_simplex, resolvent_measure, resolvent_vertex, CylinderMeasure,
    SplittingRule,
};
use crate::spectral::{column_sums, critical_beta, dominates, spectral_radius, DEFAULT_TOL};

/// Threshold below which a Cuntz–Pimsner gap counts as zero.
pub const CP_GAP_THRESHOLD: f64 = 1e-8;

/// `S_left P_middle S_right*` with `s(left) = r(middle) = s(right)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    pub left: PathWord,
    pub middle: PathWord,
    pub right: PathWord,
}

impl Term {
    pub fn new(g: &DirectedMultigraph, left: PathWord, middle: PathWord, right: PathWord) -> Result<Self> {
        let anchor = middle.range();
        if left.source(g) != anchor || right.source(g) != anchor {
            return Err(Error::InvalidWord("term legs do not meet at the projection's range".into()));
        }
        Ok(Self { left, middle, right })
    }

    pub fn degree(&self) -> i64 {
        self.left.len() as i64 - self.right.len() as i64
    }

    pub fn adjoint(&self) -> Self {
        Self { left: self.right.clone(), middle: self.middle.clone(), right: self.left.clone() }
    }

    /// Product of two terms; `None` when it vanishes.
    pub fn multiply(&self, g: &DirectedMultigraph, other: &Term) -> Option<Term> {
        // S_{β1}* S_{α2} is S_κ when α2 = β1 κ and S_κ* when β1 = α2 κ.
        let (b1, a2) = (&self.right, &other.left);
        if b1.is_prefix_of(a2) {
            let kappa = a2.shifted(g, b1.len());
            let delta = project_through(g, &self.middle, &kappa)?;
            let middle = delta.merge(&other.middle)?;
            let left = self.left.concat(g, &kappa)?;
            Some(Term { left, middle, right: other.right.clone() })
        } else if a2.is_prefix_of(b1) {
            let kappa = b1.shifted(g, a2.len());
            let delta = project_through(g, &other.middle, &kappa)?;
            let middle = self.middle.merge(&delta)?;
            let right = other.right.concat(g, &kappa)?;
            Some(Term { left: self.left.clone(), middle, right })
        } else {
            None
        }
    }
}

/// `P_γ S_κ = S_κ P_δ`; returns `δ`, or `None` when the product is zero.
fn project_through(g: &DirectedMultigraph, gamma: &PathWord, kappa: &PathWord) -> Option<PathWord> {
    gamma.merge(kappa).map(|m| m.shifted(g, kappa.len()))
}

/// `ψ^l(χ_{Z(μ)}) ψ^m(χ_{Z(ν)})*` in normal form `|μ| ≥ l`, `|ν| ≥ m`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpanningElement {
    pub l: usize,
    pub mu: PathWord,
    pub m: usize,
    pub nu: PathWord,
}

impl SpanningElement {
    pub fn new(l: usize, mu: PathWord, m: usize, nu: PathWord) -> Result<Self> {
        if mu.len() < l || nu.len() < m {
            return Err(Error::InvalidArgument("spanning element words must be at least as long as the degrees".into()));
        }
        Ok(Self { l, mu, m, nu })
    }

    /// The equivalent triple, or `None` when the element is zero.
    pub fn to_term(&self, g: &DirectedMultigraph) -> Option<Term> {
        let left = self.mu.prefix(self.l);
        let right = self.nu.prefix(self.m);
        let middle = self.mu.shifted(g, self.l).merge(&self.nu.shifted(g, self.m))?;
        Some(Term { left, middle, right })
    }

    pub fn degree(&self) -> i64 {
        self.l as i64 - self.m as i64
    }
}

/// A finite real combination of terms.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ToeplitzElement {
    terms: BTreeMap<Term, f64>,
}

impl ToeplitzElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_term(term: Term) -> Self {
        let mut t = Self::zero();
        t.add_term(term, 1.0);
        t
    }

    /// `1 = Σ_v P_v`.
    pub fn unit(g: &DirectedMultigraph) -> Self {
        let mut t = Self::zero();
        for v in g.vertices() {
            t.add_term(vertex_term(v), 1.0);
        }
        t
    }

    pub fn vertex_projection(v: VertexId) -> Self {
        Self::from_term(vertex_term(v))
    }

    /// `P_γ = π(χ_{Z(γ)})`.
    pub fn cylinder_projection(gamma: PathWord) -> Self {
        let v = PathWord::vertex(gamma.range());
        Self::from_term(Term { left: v.clone(), middle: gamma, right: v })
    }

    pub fn edge(g: &DirectedMultigraph, e: EdgeId) -> Self {
        Self::path(g, &PathWord::edge(g, e))
    }

    /// `S_λ`.
    pub fn path(g: &DirectedMultigraph, lambda: &PathWord) -> Self {
        let s = PathWord::vertex(lambda.source(g));
        Self::from_term(Term { left: lambda.clone(), middle: s.clone(), right: s })
    }

    /// `S_λ S_ν*`; zero when the sources differ.
    pub fn path_pair(g: &DirectedMultigraph, lambda: &PathWord, nu: &PathWord) -> Self {
        let s = lambda.source(g);
        if s != nu.source(g) {
            return Self::zero();
        }
        Self::from_term(Term { left: lambda.clone(), middle: PathWord::vertex(s), right: nu.clone() })
    }

    /// `ψ^l(χ_{Z(μ)}) ψ^m(χ_{Z(ν)})*` for arbitrary words: a word shorter
    /// than its degree is first expanded over its extensions of that length.
    pub fn spanning(g: &DirectedMultigraph, l: usize, mu: &PathWord, m: usize, nu: &PathWord) -> Result<Self> {
        let mut out = Self::zero();
        for a in extensions_to(g, mu, l)? {
            for b in extensions_to(g, nu, m)? {
                if let Some(t) = SpanningElement::new(l, a.clone(), m, b)?.to_term(g) {
                    out.add_term(t, 1.0);
                }
            }
        }
        Ok(out)
    }

    pub fn add_term(&mut self, term: Term, coeff: f64) {
        if coeff == 0.0 {
            return;
        }
        let c = self.terms.entry(term.clone()).or_insert(0.0);
        *c += coeff;
        if *c == 0.0 {
            self.terms.remove(&term);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Term, f64)> {
        self.terms.iter().map(|(t, &c)| (t, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = Self::zero();
        for (t, a) in self.terms() {
            out.add_term(t.clone(), c * a);
        }
        out
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (t, a) in other.terms() {
            out.add_term(t.clone(), a);
        }
        out
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.plus(&other.scaled(-1.0))
    }

    /// Real coefficients, so the involution only reverses each term.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for (t, a) in self.terms() {
            out.add_term(t.adjoint(), a);
        }
        out
    }

    pub fn multiply(&self, g: &DirectedMultigraph, other: &Self) -> Self {
        let mut out = Self::zero();
        for (s, a) in self.terms() {
            for (t, b) in other.terms() {
                if let Some(p) = s.multiply(g, t) {
                    out.add_term(p, a * b);
                }
            }
        }
        out
    }

    /// The common gauge degree, or `None` for mixed degrees. The zero element
    /// has degree 0.
    pub fn degree(&self) -> Option<i64> {
        let mut it = self.terms.keys().map(Term::degree);
        let first = it.next().unwrap_or(0);
        it.all(|d| d == first).then_some(first)
    }

    /// Longest projection word, which bounds the measure depth needed.
    pub fn max_middle_len(&self) -> usize {
        self.terms.keys().map(|t| t.middle.len()).max().unwrap_or(0)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.minus(other).terms().map(|(_, c)| c.abs()).fold(0.0, f64::max)
    }

    /// Sum of absolute coefficients; each term has norm at most 1.
    pub fn coefficient_norm(&self) -> f64 {
        self.terms().map(|(_, c)| c.abs()).sum()
    }
}

fn vertex_term(v: VertexId) -> Term {
    let w = PathWord::vertex(v);
    Term { left: w.clone(), middle: w.clone(), right: w }
}

fn extensions_to(g: &DirectedMultigraph, w: &PathWord, len: usize) -> Result<Vec<PathWord>> {
    if w.len() >= len {
        return Ok(alloc::vec![w.clone()]);
    }
    let tails = g.paths_from_range(w.source(g), len - w.len(), DEFAULT_PATH_CAP)?;
    Ok(tails.iter().filter_map(|t| w.concat(g, t)).collect())
}

/// The state `φ_ε` at inverse temperature `β`, with its resolvent measure
/// `μ = Σ_n e^{−βn} Rⁿ ε` cached to the configured depth.
#[derive(Clone, Debug)]
pub struct KmsState {
    graph: DirectedMultigraph,
    beta: f64,
    epsilon: CylinderMeasure,
    mu: CylinderMeasure,
    m_vec: Vec<f64>,
    y: Vec<f64>,
}

impl KmsState {
    /// State of `ε / ∫f_β dε`, resolved to `depth`.
    pub fn normalized(g: &DirectedMultigraph, beta: f64, eps: &CylinderMeasure, depth: usize) -> Result<Self> {
        let eps = normalize_to_simplex(g, eps, beta)?;
        Self::unnormalized(g, beta, &eps, depth)
    }

    /// The positive functional defined by `ε` as given; a state exactly when
    /// `∫ f_β dε = 1`.
    pub fn unnormalized(g: &DirectedMultigraph, beta: f64, eps: &CylinderMeasure, depth: usize) -> Result<Self> {
        g.require_no_sinks()?;
        let mu = resolvent_measure(g, eps, beta, depth)?;
        let m_vec = resolvent_vertex(g, beta, &eps.vertex_marginal(g))?;
        let y = f_beta(g, beta)?.y;
        Ok(Self { graph: g.clone(), beta, epsilon: eps.restricted(depth)?, mu, m_vec, y })
    }

    /// Extends a vertex vector with `rule`, normalises, and builds the state.
    pub fn from_vertex_vector(
        g: &DirectedMultigraph,
        beta: f64,
        eps: &[f64],
        depth: usize,
        rule: &dyn SplittingRule,
    ) -> Result<Self> {
        let m = extend_vertex_measure(g, eps, depth, rule)?;
        Self::normalized(g, beta, &m, depth)
    }

    pub fn graph(&self) -> &DirectedMultigraph {
        &self.graph
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn epsilon(&self) -> &CylinderMeasure {
        &self.epsilon
    }

    pub fn mu(&self) -> &CylinderMeasure {
        &self.mu
    }

    /// `(I − e^{−β}A)^{-1} ε_vec`.
    pub fn m_vec(&self) -> &[f64] {
        &self.m_vec
    }

    pub fn f_beta(&self) -> &[f64] {
        &self.y
    }

    pub fn depth(&self) -> usize {
        self.mu.depth()
    }

    /// `φ(S_α P_γ S_β*) = δ_{α,β} e^{−β|α|} μ(Z(γ))`.
    pub fn evaluate_term(&self, t: &Term) -> Result<f64> {
        if t.left != t.right {
            if t.middle.len() > self.depth() {
                return Err(Error::Resolution { needed: t.middle.len(), available: self.depth() });
            }
            return Ok(0.0);
        }
        Ok((-self.beta * t.left.len() as f64).exp() * self.mu.mass(&t.middle)?)
    }

    pub fn evaluate(&self, x: &ToeplitzElement) -> Result<f64> {
        let mut acc = 0.0;
        for (t, c) in x.terms() {
            acc += c * self.evaluate_term(t)?;
        }
        Ok(acc)
    }

    /// Compares `φ(bc)` with `e^{−β·deg b} φ(cb)` and checks that `φ`
    /// vanishes on every element of nonzero degree involved.
    pub fn kms_check(&self, b: &ToeplitzElement, c: &ToeplitzElement, tol: f64) -> Result<KmsCheck> {
        let db = b.degree().ok_or(Error::NotHomogeneous)?;
        let dc = c.degree().ok_or(Error::NotHomogeneous)?;
        let g = &self.graph;
        let bc = b.multiply(g, c);
        let cb = c.multiply(g, b);
        let lhs = self.evaluate(&bc)?;
        let rhs = (-self.beta * db as f64).exp() * self.evaluate(&cb)?;
        let mut vanishing = 0.0f64;
        for (x, d) in [(b, db), (c, dc), (&bc, db + dc), (&cb, db + dc)] {
            if d != 0 {
                vanishing = vanishing.max(self.evaluate(x)?.abs());
            }
        }
        let diff = (lhs - rhs).abs();
        Ok(KmsCheck { lhs, rhs, diff, vanishing, pass: diff <= tol && vanishing <= tol })
    }

    /// `φ(P_v − Σ_{r(e)=v} S_e S_e*)`.
    pub fn cp_gap(&self, v: VertexId) -> Result<f64> {
        self.evaluate(&cp_gap_element(&self.graph, v))
    }

    pub fn cp_gaps(&self) -> Result<Vec<f64>> {
        self.graph.vertices().map(|v| self.cp_gap(v)).collect()
    }

    /// Whether every gap is below [`CP_GAP_THRESHOLD`].
    pub fn factors_through_quotient(&self) -> Result<bool> {
        Ok(self.cp_gaps()?.iter().all(|g| g.abs() <= CP_GAP_THRESHOLD))
    }

    /// Vertex marginal, `y·ε`, and `φ(S_λ S_ν*)` for all pairs of paths of
    /// length at most `max_len` with a common source.
    pub fn restrict_to_tck(&self, max_len: usize) -> Result<TckRestriction> {
        let g = &self.graph;
        let eps_vec = self.epsilon.vertex_marginal(g);
        let y_dot_eps = self.y.iter().zip(&eps_vec).map(|(a, b)| a * b).sum();
        let mut words = Vec::new();
        for k in 0..=max_len {
            words.extend(g.all_paths(k, DEFAULT_PATH_CAP)?);
        }
        let mut table = Vec::new();
        for lambda in &words {
            for nu in &words {
                if lambda.source(g) == nu.source(g) {
                    let value = self.evaluate(&ToeplitzElement::path_pair(g, lambda, nu))?;
                    table.push((lambda.clone(), nu.clone(), value));
                }
            }
        }
        Ok(TckRestriction { eps_vec, y_dot_eps, table })
    }
}

/// `P_v − Σ_{r(e)=v} S_e S_e*`, which lies in the kernel of the quotient map
/// onto the Cuntz–Pimsner algebra.
pub fn cp_gap_element(g: &DirectedMultigraph, v: VertexId) -> ToeplitzElement {
    let mut x = ToeplitzElement::vertex_projection(v);
    for &e in g.edges_into(v) {
        let p = PathWord::edge(g, e);
        x = x.minus(&ToeplitzElement::path_pair(g, &p, &p));
    }
    x
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct KmsCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub diff: f64,
    /// Largest `|φ(x)|` over the nonzero-degree elements among `b, c, bc, cb`.
    pub vanishing: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TckRestriction {
    pub eps_vec: Vec<f64>,
    pub y_dot_eps: f64,
    pub table: Vec<(PathWord, PathWord, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CriticalSequence {
    pub vertex: usize,
    pub betas: Vec<f64>,
    /// `(f_{β_n}(p) − 1) / f_{β_n}(p)`, the value of `φ(Σ_e S_e S_e*)` for
    /// the state with `ε = δ_p / f_{β_n}(p)`.
    pub values: Vec<f64>,
}

/// Approach to β_c from above. `p` defaults to [`crate::spectral::critical_vertex`];
/// an explicit `p` must satisfy `Σ_v A^N(v,p) ≥ ρ^N` for all `N ≤ n_max`.
pub fn critical_limit_sequence(
    g: &DirectedMultigraph,
    p: Option<VertexId>,
    betas: &[f64],
    n_max: u32,
) -> Result<CriticalSequence> {
    let bc = critical_beta(g)?;
    if betas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument("inverse temperatures must be strictly decreasing".into()));
    }
    if let Some(&b) = betas.iter().find(|&&b| !(b > bc)) {
        return Err(Error::SubcriticalTemperature { beta: b, beta_c: bc });
    }
    let p = match p {
        Some(p) => {
            let sums = column_sums(g, n_max);
            if !dominates(&sums, p.0, spectral_radius(g, DEFAULT_TOL).value.ln()) {
                return Err(Error::NoCriticalVertex { n_max });
            }
            p
        }
        None => crate::spectral::critical_vertex(g, n_max)?,
    };
    let values = betas
        .iter()
        .map(|&b| {
            let f = f_beta(g, b)?.y[p.0];
            Ok((f - 1.0) / f)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CriticalSequence { vertex: p.0, betas: betas.to_vec(), values })
}
