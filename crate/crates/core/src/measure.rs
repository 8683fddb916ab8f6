//! Finite measures on the path space stored as consistent cylinder-weight
//! trees, the operator `R`, the resolvent `ε ↦ μ`, `f_β` and the simplex
//! normalisation.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::graph::{DirectedMultigraph, EdgeId, PathWord, VertexId, DEFAULT_PATH_CAP};
use crate::linalg::{ln_big, solve};
use crate::spectral::{column_sums, require_supercritical, DEFAULT_N_MAX};

/// Default gap required between β and β_c.
pub const BETA_MARGIN: f64 = 1e-9;

/// Finite measure known on every cylinder of length at most `depth`.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderMeasure {
    depth: usize,
    weights: BTreeMap<PathWord, f64>,
}

impl CylinderMeasure {
    /// Builds a measure from explicit weights. Missing words weigh zero; the
    /// tree must be consistent to within `tol`.
    pub fn from_weights(
        g: &DirectedMultigraph,
        depth: usize,
        weights: impl IntoIterator<Item = (PathWord, f64)>,
        tol: f64,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for k in 0..=depth {
            for p in g.all_paths(k, DEFAULT_PATH_CAP)? {
                map.insert(p, 0.0);
            }
        }
        for (w, x) in weights {
            if w.len() > depth {
                return Err(Error::Resolution { needed: w.len(), available: depth });
            }
            g.validate_word(&w)?;
            if !(x >= 0.0) || !x.is_finite() {
                return Err(Error::Format(alloc::format!("weight {x} is not a finite nonnegative number")));
            }
            map.insert(w, x);
        }
        let m = Self { depth, weights: map };
        let gap = m.consistency_defect(g);
        if gap > tol {
            return Err(Error::Format(alloc::format!("weights are inconsistent by {gap}")));
        }
        Ok(m)
    }

    /// The depth-0 measure with the given vertex masses.
    pub fn from_vertex_vector(g: &DirectedMultigraph, eps: &[f64]) -> Result<Self> {
        if eps.len() != g.num_vertices() {
            return Err(Error::InvalidArgument("vertex vector has the wrong length".into()));
        }
        Self::from_weights(g, 0, g.vertices().map(|v| (PathWord::vertex(v), eps[v.0])), 0.0)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `ν(Z(word))`; zero for words that are not paths.
    pub fn mass(&self, word: &PathWord) -> Result<f64> {
        if word.len() > self.depth {
            return Err(Error::Resolution { needed: word.len(), available: self.depth });
        }
        Ok(self.weights.get(word).copied().unwrap_or(0.0))
    }

    pub fn vertex_mass(&self, v: VertexId) -> f64 {
        self.weights.get(&PathWord::vertex(v)).copied().unwrap_or(0.0)
    }

    pub fn vertex_marginal(&self, g: &DirectedMultigraph) -> Vec<f64> {
        g.vertices().map(|v| self.vertex_mass(v)).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().filter(|(w, _)| w.is_vertex()).map(|(_, &x)| x).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PathWord, f64)> {
        self.weights.iter().map(|(w, &x)| (w, x))
    }

    /// The same measure forgotten beyond depth `d`.
    pub fn restricted(&self, d: usize) -> Result<Self> {
        if d > self.depth {
            return Err(Error::Resolution { needed: d, available: self.depth });
        }
        let weights = self.weights.iter().filter(|(w, _)| w.len() <= d).map(|(w, &x)| (w.clone(), x)).collect();
        Ok(Self { depth: d, weights })
    }

    pub fn scaled(&self, c: f64) -> Self {
        let weights = self.weights.iter().map(|(w, &x)| (w.clone(), c * x)).collect();
        Self { depth: self.depth, weights }
    }

    /// `a·self + b·other` at the smaller of the two depths.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        let depth = self.depth.min(other.depth);
        let weights = self
            .weights
            .iter()
            .filter(|(w, _)| w.len() <= depth)
            .map(|(w, &x)| (w.clone(), a * x + b * other.weights.get(w).copied().unwrap_or(0.0)))
            .collect();
        Self { depth, weights }
    }

    /// Largest `|Σ_{r(e)=s(ν)} w(νe) − w(ν)|` over words shorter than the depth.
    pub fn consistency_defect(&self, g: &DirectedMultigraph) -> f64 {
        self.weights
            .iter()
            .filter(|(w, _)| w.len() < self.depth)
            .map(|(w, &x)| {
                let children: f64 = g
                    .edges_into(w.source(g))
                    .iter()
                    .map(|&e| self.weights.get(&w.extended(e)).copied().unwrap_or(0.0))
                    .sum();
                (children - x).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest difference on the cylinders both measures resolve.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let depth = self.depth.min(other.depth);
        self.weights
            .iter()
            .filter(|(w, _)| w.len() <= depth)
            .map(|(w, &x)| (x - other.weights.get(w).copied().unwrap_or(0.0)).abs())
            .fold(0.0, f64::max)
    }
}

/// `(Rν)(Z(μ)) = ν(Z(σμ))` for `|μ| ≥ 1` and `(Rν)(Z(v)) = Σ_u A(v,u) ν(Z(u))`.
/// The result is resolved one level deeper than `ν`.
pub fn apply_r(g: &DirectedMultigraph, nu: &CylinderMeasure) -> Result<CylinderMeasure> {
    g.require_no_sinks()?;
    let a = g.vertex_matrix();
    let mut weights = BTreeMap::new();
    for v in g.vertices() {
        let x: f64 = g.vertices().map(|u| a.get(v.0, u.0) as f64 * nu.vertex_mass(u)).sum();
        weights.insert(PathWord::vertex(v), x);
    }
    for k in 1..=nu.depth + 1 {
        for p in g.all_paths(k, DEFAULT_PATH_CAP)? {
            let x = nu.mass(&p.shifted(g, 1))?;
            weights.insert(p, x);
        }
    }
    Ok(CylinderMeasure { depth: nu.depth + 1, weights })
}

/// `y` with `y − e^{−β} Aᵀ y = 1`; `f_β(z) = y_{r(z)}`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FBetaVector {
    pub beta: f64,
    pub y: Vec<f64>,
    /// `‖y − e^{−β}Aᵀy − 1‖∞` of the computed solution.
    pub residual: f64,
}

fn vertex_system(g: &DirectedMultigraph, beta: f64, transpose: bool) -> DMatrix<f64> {
    let a = g.vertex_matrix();
    let n = g.num_vertices();
    let t = (-beta).exp();
    DMatrix::from_fn(n, n, |i, j| {
        let entry = if transpose { a.get(j, i) } else { a.get(i, j) } as f64;
        let id = if i == j { 1.0 } else { 0.0 };
        id - t * entry
    })
}

pub fn f_beta(g: &DirectedMultigraph, beta: f64) -> Result<FBetaVector> {
    require_supercritical(g, beta, BETA_MARGIN)?;
    let n = g.num_vertices();
    let (y, residual) = solve(&vertex_system(g, beta, true), &DVector::from_element(n, 1.0))?;
    Ok(FBetaVector { beta, y: y.iter().copied().collect(), residual })
}

/// `m = (I − e^{−β} A)^{-1} ε` for a vertex vector `ε`.
pub fn resolvent_vertex(g: &DirectedMultigraph, beta: f64, eps: &[f64]) -> Result<Vec<f64>> {
    require_supercritical(g, beta, BETA_MARGIN)?;
    if eps.len() != g.num_vertices() {
        return Err(Error::InvalidArgument("vertex vector has the wrong length".into()));
    }
    let (m, _) = solve(&vertex_system(g, beta, false), &DVector::from_column_slice(eps))?;
    Ok(m.iter().copied().collect())
}

/// `∫ f_β dε = Σ_v y_v ε(Z(v))`.
pub fn integral_f_beta(g: &DirectedMultigraph, eps: &CylinderMeasure, beta: f64) -> Result<f64> {
    let y = f_beta(g, beta)?.y;
    Ok(y.iter().zip(eps.vertex_marginal(g)).map(|(a, b)| a * b).sum())
}

/// `μ = Σ_n e^{−βn} Rⁿ ε` in closed form at every cylinder of length ≤ `depth`:
/// `μ(Z(κ)) = Σ_{n≤k} e^{−βn} ε(Z(σⁿκ)) + e^{−βk} [((I − e^{−β}A)^{-1} − I) ε]_{s(κ)}`.
pub fn resolvent_measure(
    g: &DirectedMultigraph,
    eps: &CylinderMeasure,
    beta: f64,
    depth: usize,
) -> Result<CylinderMeasure> {
    g.require_no_sinks()?;
    if eps.depth < depth {
        return Err(Error::Resolution { needed: depth, available: eps.depth });
    }
    let marginal = eps.vertex_marginal(g);
    let m = resolvent_vertex(g, beta, &marginal)?;
    let t = (-beta).exp();
    let mut weights = BTreeMap::new();
    for k in 0..=depth {
        for p in g.all_paths(k, DEFAULT_PATH_CAP)? {
            let mut x = 0.0;
            let mut tn = 1.0;
            for n in 0..=k {
                x += tn * eps.mass(&p.shifted(g, n))?;
                if n < k {
                    tn *= t;
                }
            }
            let s = p.source(g).0;
            x += tn * (m[s] - marginal[s]);
            weights.insert(p, x);
        }
    }
    Ok(CylinderMeasure { depth, weights })
}

/// Constants `δ > 0`, `K` with `e^{−βm} max_w Σ_v A^m(v,w) ≤ e^{−δm}` for
/// `K ≤ m ≤ n_max`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TailBound {
    pub beta: f64,
    pub delta: f64,
    pub k: u32,
    pub n_max: u32,
    /// `ln max_w Σ_v A^m(v,w)` for `m = 0..=n_max`.
    ln_max_colsum: Vec<f64>,
}

impl TailBound {
    /// Bound on `Σ_{n ≥ from} e^{−βn} max_w Σ_v A^n(v,w)`: exact terms below
    /// `K`, then a geometric series in `e^{−δ}`.
    pub fn remainder(&self, from: usize) -> f64 {
        let k = self.k as usize;
        let exact: f64 = (from..k).map(|n| (self.ln_max_colsum[n] - self.beta * n as f64).exp()).sum();
        let start = from.max(k) as f64;
        exact + (-self.delta * start).exp() / (1.0 - (-self.delta).exp())
    }

    /// Smallest number of terms whose remainder is at most `tol`.
    pub fn terms_for(&self, tol: f64) -> usize {
        let mut m = self.k as usize;
        while self.remainder(m) > tol {
            m += 1;
        }
        // the exact part may allow stopping before K
        while m > 0 && self.remainder(m - 1) <= tol {
            m -= 1;
        }
        m
    }
}

pub fn tail_bound(g: &DirectedMultigraph, beta: f64, n_max: u32) -> Result<TailBound> {
    let bc = require_supercritical(g, beta, BETA_MARGIN)?;
    let sums = column_sums(g, n_max);
    let ln_max_colsum: Vec<f64> = sums.iter().map(|s| ln_big(s.iter().max().unwrap())).collect();
    let rates: Vec<f64> = (1..=n_max as usize).map(|m| ln_max_colsum[m] / m as f64).collect();
    // suffix maxima S_K = max_{K ≤ m ≤ n_max} s_m
    let mut suffix = vec![f64::NEG_INFINITY; rates.len() + 1];
    for i in (0..rates.len()).rev() {
        suffix[i] = suffix[i + 1].max(rates[i]);
    }
    let target = 0.5 * (beta - bc);
    let mut best: Option<(f64, u32)> = None;
    for (i, &s) in suffix[..rates.len()].iter().enumerate() {
        let delta = beta - s;
        if delta >= target {
            return Ok(TailBound { beta, delta, k: i as u32 + 1, n_max, ln_max_colsum });
        }
        if delta > 0.0 && best.is_none_or(|(d, _)| delta > d) {
            best = Some((delta, i as u32 + 1));
        }
    }
    match best {
        Some((delta, k)) => Ok(TailBound { beta, delta, k, n_max, ln_max_colsum }),
        None => Err(Error::TailBoundUnavailable { n_max }),
    }
}

/// Partial sum `Σ_{n<terms} e^{−βn} Rⁿε` at depth `depth`, computed by
/// iterating `R`, together with a certified bound on the omitted tail.
pub fn resolvent_series(
    g: &DirectedMultigraph,
    eps: &CylinderMeasure,
    beta: f64,
    depth: usize,
    terms: usize,
) -> Result<(CylinderMeasure, f64)> {
    let tb = tail_bound(g, beta, DEFAULT_N_MAX)?;
    let t = (-beta).exp();
    let base = eps.restricted(depth)?;
    // R on a flat vector: each word of positive length reads its shift, each
    // vertex reads its column of A
    let words: Vec<PathWord> = base.weights.keys().cloned().collect();
    let index: BTreeMap<&PathWord, usize> = words.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let a = g.vertex_matrix();
    let sources: Vec<Vec<(usize, f64)>> = words
        .iter()
        .map(|w| {
            if w.is_vertex() {
                g.vertices()
                    .filter(|u| a.get(w.range().0, u.0) > 0)
                    .filter_map(|u| Some((*index.get(&PathWord::vertex(u))?, a.get(w.range().0, u.0) as f64)))
                    .collect()
            } else {
                index.get(&w.shifted(g, 1)).map(|&j| (j, 1.0)).into_iter().collect()
            }
        })
        .collect();
    let mut term: Vec<f64> = base.weights.values().copied().collect();
    let mut acc = vec![0.0; words.len()];
    let mut tn = 1.0;
    for _ in 0..terms {
        for (s, x) in acc.iter_mut().zip(&term) {
            *s += tn * x;
        }
        term = sources.iter().map(|src| src.iter().map(|&(j, c)| c * term[j]).sum()).collect();
        tn *= t;
    }
    let acc = CylinderMeasure { depth, weights: words.into_iter().zip(acc).collect() };
    Ok((acc, eps.total_mass() * tb.remainder(terms)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubinvarianceReport {
    pub pass: bool,
    /// Smallest `e^β μ(Z(κ)) − (Rμ)(Z(κ))`.
    pub worst_slack: f64,
    pub worst_word: PathWord,
    /// `ε = μ − e^{−β} R μ` at the depth of `μ`.
    pub recovered: CylinderMeasure,
}

/// Checks `Rμ ≤ e^β μ` on every resolved cylinder.
pub fn check_subinvariance(
    g: &DirectedMultigraph,
    mu: &CylinderMeasure,
    beta: f64,
    tol: f64,
) -> Result<SubinvarianceReport> {
    let r = apply_r(g, mu)?;
    let eb = beta.exp();
    let t = (-beta).exp();
    let mut worst = (f64::INFINITY, PathWord::vertex(VertexId(0)));
    let mut weights = BTreeMap::new();
    for (w, x) in mu.iter() {
        let rx = r.mass(w)?;
        let slack = eb * x - rx;
        if slack < worst.0 {
            worst = (slack, w.clone());
        }
        weights.insert(w.clone(), x - t * rx);
    }
    let recovered = CylinderMeasure { depth: mu.depth, weights };
    let min_recovered = recovered.iter().map(|(_, x)| x).fold(f64::INFINITY, f64::min);
    Ok(SubinvarianceReport {
        pass: worst.0 >= -tol && min_recovered >= -tol,
        worst_slack: worst.0,
        worst_word: worst.1,
        recovered,
    })
}

/// `ε / ∫ f_β dε`.
pub fn normalize_to_simplex(g: &DirectedMultigraph, eps: &CylinderMeasure, beta: f64) -> Result<CylinderMeasure> {
    let z = integral_f_beta(g, eps, beta)?;
    if !(z > 0.0) {
        return Err(Error::ZeroMeasure);
    }
    Ok(eps.scaled(1.0 / z))
}

pub fn normalize_vertex_vector(g: &DirectedMultigraph, eps: &[f64], beta: f64) -> Result<Vec<f64>> {
    let y = f_beta(g, beta)?.y;
    let z: f64 = y.iter().zip(eps).map(|(a, b)| a * b).sum();
    if !(z > 0.0) {
        return Err(Error::ZeroMeasure);
    }
    Ok(eps.iter().map(|x| x / z).collect())
}

/// How the mass of a word is shared among its one-step extensions.
pub trait SplittingRule {
    /// Weights for the extensions `word·e`, `e ∈ edges`, summing to 1.
    /// `edges` is nonempty.
    fn split(&self, g: &DirectedMultigraph, word: &PathWord, edges: &[EdgeId]) -> Vec<f64>;
}

/// Equal shares.
#[derive(Clone, Copy, Debug, Default)]
pub struct Uniform;

impl SplittingRule for Uniform {
    fn split(&self, _: &DirectedMultigraph, _: &PathWord, edges: &[EdgeId]) -> Vec<f64> {
        vec![1.0 / edges.len() as f64; edges.len()]
    }
}

/// Shares proportional to fixed positive edge weights.
#[derive(Clone, Debug)]
pub struct Proportional {
    pub edge_weights: Vec<f64>,
}

impl SplittingRule for Proportional {
    fn split(&self, _: &DirectedMultigraph, _: &PathWord, edges: &[EdgeId]) -> Vec<f64> {
        let total: f64 = edges.iter().map(|e| self.edge_weights[e.0]).sum();
        edges.iter().map(|e| self.edge_weights[e.0] / total).collect()
    }
}

/// Any closure `(graph, word, edges) -> shares`.
pub struct SplitFn(pub Box<dyn Fn(&DirectedMultigraph, &PathWord, &[EdgeId]) -> Vec<f64>>);

impl SplittingRule for SplitFn {
    fn split(&self, g: &DirectedMultigraph, word: &PathWord, edges: &[EdgeId]) -> Vec<f64> {
        (self.0)(g, word, edges)
    }
}

/// A consistent weight tree of the given depth with vertex marginal `eps`.
pub fn extend_vertex_measure(
    g: &DirectedMultigraph,
    eps: &[f64],
    depth: usize,
    rule: &dyn SplittingRule,
) -> Result<CylinderMeasure> {
    g.require_no_sinks()?;
    if eps.len() != g.num_vertices() {
        return Err(Error::InvalidArgument("vertex vector has the wrong length".into()));
    }
    if let Some(&x) = eps.iter().find(|&&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidArgument(alloc::format!("vertex mass {x} is not finite and nonnegative")));
    }
    let mut alive = alloc::vec![false; g.num_vertices()];
    for v in g.supported_vertices() {
        alive[v.0] = true;
    }
    let mut weights = BTreeMap::new();
    let mut layer: Vec<(PathWord, f64)> = g.vertices().map(|v| (PathWord::vertex(v), eps[v.0])).collect();
    for k in 0..=depth {
        let mut next = Vec::new();
        for (w, x) in &layer {
            weights.insert(w.clone(), *x);
            if k == depth {
                continue;
            }
            // edges out of vertices without infinite paths carry no mass
            let edges: Vec<EdgeId> = g.edges_into(w.source(g)).iter().copied().filter(|e| alive[g.source(*e).0]).collect();
            if edges.is_empty() {
                if *x > 0.0 {
                    return Err(Error::NoAdmissibleSplit { mass: *x });
                }
                continue;
            }
            let shares = rule.split(g, w, &edges);
            let total: f64 = shares.iter().sum();
            if shares.len() != edges.len() || shares.iter().any(|&s| s < 0.0) || (total - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument("splitting rule returned invalid shares".into()));
            }
            for (&e, s) in edges.iter().zip(shares) {
                next.push((w.extended(e), x * s));
            }
            for &e in g.edges_into(w.source(g)) {
                if !alive[g.source(e).0] {
                    next.push((w.extended(e), 0.0));
                }
            }
        }
        layer = next;
    }
    Ok(CylinderMeasure { depth, weights })
}

/// `{e_v / y_v}` over vertices `v` with `Z(v)` nonempty.
pub fn simplex_extreme_points(g: &DirectedMultigraph, beta: f64) -> Result<Vec<(VertexId, Vec<f64>)>> {
    let y = f_beta(g, beta)?.y;
    Ok(g.supported_vertices()
        .into_iter()
        .map(|v| {
            let mut p = vec![0.0; g.num_vertices()];
            p[v.0] = 1.0 / y[v.0];
            (v, p)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{cycle, dumbbell, full_shift, single_loop};
    use crate::spectral::critical_beta;
    use proptest::prelude::*;

    fn uniform_point(g: &DirectedMultigraph, v: usize, depth: usize) -> CylinderMeasure {
        let mut e = vec![0.0; g.num_vertices()];
        e[v] = 1.0;
        extend_vertex_measure(g, &e, depth, &Uniform).unwrap()
    }

    #[test]
    fn f_beta_full_shift_closed_form() {
        for n in 1..5 {
            let g = full_shift(n);
            let beta = (n as f64).ln() + 0.7;
            let y = f_beta(&g, beta).unwrap();
            let expect = 1.0 / (1.0 - n as f64 * (-beta).exp());
            assert!((y.y[0] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn f_beta_dumbbell_at_ln_six() {
        let y = f_beta(&dumbbell(2, 3), 6f64.ln()).unwrap();
        assert!((y.y[0] - 1.5).abs() < 1e-12);
        assert!((y.y[1] - 2.5).abs() < 1e-12);
        // the Neumann series gives the same values
        let sums = column_sums(&dumbbell(2, 3), 200);
        for v in 0..2 {
            let s: f64 = (0..=200).map(|n| (ln_big(&sums[n][v]) - n as f64 * 6f64.ln()).exp()).sum();
            assert!((s - y.y[v]).abs() < 1e-12);
        }
    }

    #[test]
    fn f_beta_tends_to_one() {
        let y = f_beta(&dumbbell(2, 3), 60.0).unwrap();
        assert!(y.y.iter().all(|&x| (x - 1.0).abs() < 1e-20 + 1e-24));
    }

    #[test]
    fn f_beta_rejects_subcritical() {
        assert!(matches!(f_beta(&dumbbell(2, 3), 3f64.ln()), Err(Error::SubcriticalTemperature { .. })));
        assert!(f_beta(&dumbbell(2, 3), 1.0).is_err());
    }

    #[test]
    fn apply_r_on_point_mass() {
        let g = dumbbell(2, 3);
        let eps = CylinderMeasure::from_vertex_vector(&g, &[0.0, 1.0]).unwrap();
        let r = apply_r(&g, &eps).unwrap();
        assert_eq!(r.vertex_mass(VertexId(0)), 1.0);
        assert_eq!(r.vertex_mass(VertexId(1)), 3.0);
        assert_eq!(r.depth(), 1);
        assert!(r.consistency_defect(&g) < 1e-15);
    }

    #[test]
    fn apply_r_is_identity_on_single_loop() {
        let g = single_loop();
        let nu = extend_vertex_measure(&g, &[2.5], 3, &Uniform).unwrap();
        let r = apply_r(&g, &nu).unwrap();
        assert_eq!(r.restricted(3).unwrap(), nu);
    }

    #[test]
    fn r_squared_matches_preimage_sums() {
        // (R²ν)(Z(μ)) = ∫ Σ_{σ²w = z} χ_{Z(μ)}(w) dν(z), summed over the
        // depth-2 cylinders z, whose preimages are the words λz with |λ| = 2.
        let g = dumbbell(2, 3);
        let nu = extend_vertex_measure(&g, &[0.3, 0.7], 2, &Uniform).unwrap();
        let r2 = apply_r(&g, &apply_r(&g, &nu).unwrap()).unwrap();
        for k in 0..=4 {
            for mu in g.all_paths(k, 1000).unwrap() {
                let mut brute = 0.0;
                for z in g.all_paths(2, 1000).unwrap() {
                    for lam in g.enumerate_paths(z.range(), 2, 1000).unwrap() {
                        let w = lam.concat(&g, &z).unwrap();
                        if mu.is_prefix_of(&w) {
                            brute += nu.mass(&z).unwrap();
                        }
                    }
                }
                let got = r2.mass(&mu).unwrap();
                assert!((got - brute).abs() < 1e-12, "{mu:?}: {got} vs {brute}");
            }
        }
    }

    #[test]
    fn resolvent_vertex_level_matches_matrix_inverse() {
        let g = dumbbell(2, 3);
        let beta = 6f64.ln();
        let eps = uniform_point(&g, 0, 2);
        let mu = resolvent_measure(&g, &eps, beta, 2).unwrap();
        let m = resolvent_vertex(&g, beta, &[1.0, 0.0]).unwrap();
        assert!((mu.vertex_mass(VertexId(0)) - m[0]).abs() < 1e-14);
        assert!((mu.vertex_mass(VertexId(1)) - m[1]).abs() < 1e-14);
        // (I − A/6)^{-1} e_v = (3/2, 0)
        assert!((m[0] - 1.5).abs() < 1e-14 && m[1].abs() < 1e-14);
    }

    #[test]
    fn resolvent_collapses_at_large_beta() {
        let g = dumbbell(2, 3);
        let eps = uniform_point(&g, 1, 2);
        let mu = resolvent_measure(&g, &eps, 80.0, 2).unwrap();
        assert!(mu.max_abs_diff(&eps) < 1e-30);
    }

    #[test]
    fn resolvent_matches_series_on_dumbbell() {
        let g = dumbbell(2, 3);
        let beta = 6f64.ln();
        let eps = uniform_point(&g, 0, 2);
        let closed = resolvent_measure(&g, &eps, beta, 2).unwrap();
        let (series, tail) = resolvent_series(&g, &eps, beta, 2, 61).unwrap();
        assert!(closed.max_abs_diff(&series) <= 1e-10);
        assert!(closed.max_abs_diff(&series) <= tail + 1e-14);
    }

    #[test]
    fn resolvent_round_trip() {
        let g = dumbbell(2, 3);
        let beta = 6f64.ln();
        let eps = extend_vertex_measure(&g, &[0.2, 0.3], 4, &Uniform).unwrap();
        let mu = resolvent_measure(&g, &eps, beta, 4).unwrap();
        let report = check_subinvariance(&g, &mu, beta, 1e-12).unwrap();
        assert!(report.pass);
        assert!(report.recovered.max_abs_diff(&eps) < 1e-12);
    }

    #[test]
    fn perron_measure_subinvariance() {
        let g = cycle(3);
        let x = [1.0 / 3.0; 3];
        let mu = CylinderMeasure::from_vertex_vector(&g, &x).unwrap();
        let above = check_subinvariance(&g, &mu, 0.5, 1e-12).unwrap();
        assert!(above.pass);
        assert!((above.worst_slack - (0.5f64.exp() - 1.0) / 3.0).abs() < 1e-14);
        let below = check_subinvariance(&g, &mu, -0.5, 1e-12).unwrap();
        assert!(!below.pass);
    }

    #[test]
    fn normalisation_examples() {
        let g = full_shift(2);
        let beta = 4f64.ln();
        let haar = extend_vertex_measure(&g, &[1.0], 3, &Uniform).unwrap();
        let n = normalize_to_simplex(&g, &haar, beta).unwrap();
        assert!(n.max_abs_diff(&haar.scaled(1.0 - 2.0 / 4.0)) < 1e-15);
        assert!((integral_f_beta(&g, &n, beta).unwrap() - 1.0).abs() < 1e-12);
        let again = normalize_to_simplex(&g, &n, beta).unwrap();
        assert!(again.max_abs_diff(&n) < 1e-15);

        let d = dumbbell(2, 3);
        let p = normalize_vertex_vector(&d, &[1.0, 0.0], 6f64.ln()).unwrap();
        assert!((p[0] - 1.0 / 1.5).abs() < 1e-14 && p[1] == 0.0);
        assert_eq!(normalize_vertex_vector(&d, &[0.0, 0.0], 6f64.ln()), Err(Error::ZeroMeasure));
    }

    #[test]
    fn extension_examples() {
        let g = dumbbell(2, 3);
        let m = extend_vertex_measure(&g, &[1.0, 0.0], 1, &Uniform).unwrap();
        for e in 0..6 {
            let w = PathWord::edge(&g, EdgeId(e));
            // v0, v1 and c all have range v
            let expect = if e < 3 { 1.0 / 3.0 } else { 0.0 };
            assert_eq!(m.mass(&w).unwrap(), expect);
        }
        let l = single_loop();
        let a = extend_vertex_measure(&l, &[0.4], 3, &Uniform).unwrap();
        let b = extend_vertex_measure(&l, &[0.4], 3, &Proportional { edge_weights: vec![5.0] }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn two_rules_share_the_marginal_only() {
        let g = dumbbell(2, 3);
        let eps = [0.3, 0.2];
        let a = extend_vertex_measure(&g, &eps, 2, &Uniform).unwrap();
        let b = extend_vertex_measure(&g, &eps, 2, &Proportional { edge_weights: vec![1.0, 2.0, 1.0, 1.0, 3.0, 1.0] })
            .unwrap();
        assert_eq!(a.vertex_marginal(&g), b.vertex_marginal(&g));
        assert!(a.max_abs_diff(&b) > 1e-3);
        assert!(a.consistency_defect(&g) < 1e-15 && b.consistency_defect(&g) < 1e-15);
    }

    #[test]
    fn extension_fails_where_no_edge_arrives() {
        // vertex 1 receives no edge, so Z(1) is empty
        let g = DirectedMultigraph::from_pairs(2, &[(0, 0), (0, 1)]).unwrap();
        let err = extend_vertex_measure(&g, &[0.0, 1.0], 1, &Uniform).unwrap_err();
        assert_eq!(err, Error::NoAdmissibleSplit { mass: 1.0 });
    }

    #[test]
    fn extension_skips_edges_from_dead_vertices() {
        let g = DirectedMultigraph::from_pairs(2, &[(0, 0), (0, 1)]).unwrap();
        let m = extend_vertex_measure(&g, &[1.0, 0.0], 3, &Uniform).unwrap();
        let lp = PathWord::edge(&g, EdgeId(0));
        let dead = PathWord::edge(&g, EdgeId(1));
        assert_eq!(m.mass(&lp).unwrap(), 1.0);
        assert_eq!(m.mass(&dead).unwrap(), 0.0);
        assert!(m.consistency_defect(&g) < 1e-15);
    }

    #[test]
    fn extreme_points_of_dumbbell() {
        let g = dumbbell(2, 3);
        let pts = simplex_extreme_points(&g, 6f64.ln()).unwrap();
        assert_eq!(pts.len(), 2);
        assert!((pts[0].1[0] - 1.0 / 1.5).abs() < 1e-14);
        assert!((pts[1].1[1] - 1.0 / 2.5).abs() < 1e-14);
        let y = f_beta(&g, 6f64.ln()).unwrap().y;
        let mid: f64 = (0..2).map(|v| y[v] * 0.5 * (pts[0].1[v] + pts[1].1[v])).sum();
        assert!((mid - 1.0).abs() < 1e-14);
        assert_eq!(simplex_extreme_points(&single_loop(), 1.0).unwrap().len(), 1);
    }

    #[test]
    fn tail_bound_examples() {
        let g = full_shift(3);
        let tb = tail_bound(&g, 3f64.ln() + 1.0, 64).unwrap();
        assert!((tb.delta - 1.0).abs() < 1e-12);
        assert_eq!(tb.k, 1);
        let big = tail_bound(&dumbbell(2, 3), 40.0, 64).unwrap();
        assert_eq!(big.k, 1);
        assert!(big.delta <= 40.0 - 3f64.ln() && big.delta > 40.0 - 3f64.ln() - 2f64.ln() - 1e-9);
        let near = tail_bound(&dumbbell(2, 3), 3f64.ln() + 0.1, 64).unwrap();
        assert!(near.delta >= 0.05 && near.k > 1);
        let sums = column_sums(&dumbbell(2, 3), 64);
        for m in near.k as usize..=64 {
            let c = ln_big(sums[m].iter().max().unwrap());
            assert!(c - near.beta * m as f64 <= -near.delta * m as f64 + 1e-9);
        }
    }

    #[test]
    fn no_invariant_vertex_measure_above_critical() {
        let g = dumbbell(2, 3);
        for beta in [3f64.ln() + 0.01, 2.0, 5.0] {
            let a = g.vertex_matrix();
            let m = DMatrix::from_fn(2, 2, |i, j| if i == j { beta.exp() } else { 0.0 } - a.get(i, j) as f64);
            let inv = m.clone().try_inverse().unwrap();
            assert!(inv.iter().all(|&x| x >= 0.0));
            assert!(solve(&m, &DVector::zeros(2)).unwrap().0.amax() == 0.0);
        }
    }

    fn arb_graph() -> impl Strategy<Value = DirectedMultigraph> {
        (1usize..=4).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n), 0..=6).prop_map(move |mut pairs| {
                for v in 0..n {
                    pairs.push(((v + 1) % n, v));
                }
                DirectedMultigraph::from_pairs(n, &pairs).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn f_beta_identity(g in arb_graph(), off in 0.05f64..2.0) {
            let beta = critical_beta(&g).unwrap() + off;
            let y = f_beta(&g, beta).unwrap();
            let a = g.vertex_matrix();
            let t = (-beta).exp();
            for w in 0..g.num_vertices() {
                let aty: f64 = (0..g.num_vertices()).map(|v| a.get(v, w) as f64 * y.y[v]).sum();
                prop_assert!((y.y[w] - t * aty - 1.0).abs() <= 1e-9);
                prop_assert!(y.y[w] >= 1.0 - 1e-12);
            }
        }

        #[test]
        fn round_trip_and_series(g in arb_graph(), off in 0.3f64..2.0, seed in proptest::collection::vec(0.0f64..1.0, 4)) {
            let beta = critical_beta(&g).unwrap() + off;
            let eps_vec: Vec<f64> = (0..g.num_vertices()).map(|v| seed[v]).collect();
            let eps = extend_vertex_measure(&g, &eps_vec, 3, &Uniform).unwrap();
            let mu = resolvent_measure(&g, &eps, beta, 3).unwrap();
            let report = check_subinvariance(&g, &mu, beta, 1e-9).unwrap();
            prop_assert!(report.pass);
            prop_assert!(report.recovered.max_abs_diff(&eps) <= 1e-9);
            let tb = tail_bound(&g, beta, 64).unwrap();
            let terms = tb.terms_for(1e-6).min(400);
            let (series, tail) = resolvent_series(&g, &eps, beta, 3, terms).unwrap();
            prop_assert!(mu.max_abs_diff(&series) <= tail + 1e-9);
        }

        #[test]
        fn r_is_linear(g in arb_graph(), a in 0.0f64..3.0, b in 0.0f64..3.0) {
            let n = g.num_vertices();
            let e1: Vec<f64> = (0..n).map(|v| v as f64 + 1.0).collect();
            let e2: Vec<f64> = (0..n).map(|v| (n - v) as f64).collect();
            let n1 = extend_vertex_measure(&g, &e1, 2, &Uniform).unwrap();
            let n2 = extend_vertex_measure(&g, &e2, 2, &Proportional { edge_weights: (0..g.num_edges()).map(|e| e as f64 + 1.0).collect() }).unwrap();
            let lhs = apply_r(&g, &n1.combine(a, &n2, b)).unwrap();
            let rhs = apply_r(&g, &n1).unwrap().combine(a, &apply_r(&g, &n2).unwrap(), b);
            prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * (1.0 + a + b) * 10.0);
        }
    }
}
