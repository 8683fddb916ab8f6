//! Finite truncation of the representation on `⊕_n L²(Z, Rⁿε)`, used as an
//! independent oracle for the symbolic state formula.
//!
//! Level `n` (for `0 ≤ n ≤ N`) holds step functions constant on cylinders of
//! length `base + n`, where `base = D − N`. On such a cylinder `Z(κ)` the level
//! weight is `(Rⁿε)(Z(κ)) = ε(Z(σⁿκ))`, so `ε` only needs depth `base`. Basis
//! words of zero weight are null vectors and are dropped. Matrices are written
//! in the orthonormal basis `χ_{Z(κ)} / ‖χ_{Z(κ)}‖`, so adjoints are transposes.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;


#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::graph::{DirectedMultigraph, EdgeId, PathWord};
use crate::kms::{Term, ToeplitzElement};
use crate::linalg::SparseMatrix;
use crate::measure::{tail_bound, CylinderMeasure};
use crate::shift::CylinderFunction;
use crate::spectral::DEFAULT_N_MAX;

pub const DEFAULT_LEVELS: usize = 4;
pub const DEFAULT_DEPTH: usize = 6;
pub const DEFAULT_DIM_CAP: usize = 20_000;

#[derive(Clone, Debug)]
struct Level {
    words: Vec<PathWord>,
    index: BTreeMap<PathWord, usize>,
    weights: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct FockTruncation {
    graph: DirectedMultigraph,
    beta: f64,
    eps_total: f64,
    levels: Vec<Level>,
    offsets: Vec<usize>,
    base: usize,
}

impl FockTruncation {
    /// Levels `0..=n_levels` over cylinders of length up to `depth`.
    pub fn build(
        g: &DirectedMultigraph,
        eps: &CylinderMeasure,
        beta: f64,
        n_levels: usize,
        depth: usize,
        dim_cap: usize,
    ) -> Result<Self> {
        g.require_no_sinks()?;
        if depth < n_levels {
            return Err(Error::InvalidArgument(alloc::format!(
                "cylinder depth {depth} is below the level cap {n_levels}"
            )));
        }
        let base = depth - n_levels;
        if eps.depth() < base {
            return Err(Error::Resolution { needed: base, available: eps.depth() });
        }
        let mut levels = Vec::with_capacity(n_levels + 1);
        let mut offsets = Vec::with_capacity(n_levels + 2);
        let mut total = 0;
        for n in 0..=n_levels {
            let paths = g.all_paths(base + n, dim_cap).map_err(|e| match e {
                Error::TooManyPaths { cap } => Error::DimensionCap { dim: cap + 1, cap },
                other => other,
            })?;
            let mut words = Vec::new();
            let mut weights = Vec::new();
            for p in paths {
                let w = eps.mass(&p.shifted(g, n))?;
                if w > 0.0 {
                    words.push(p);
                    weights.push(w);
                }
            }
            if words.len() > dim_cap {
                return Err(Error::DimensionCap { dim: words.len(), cap: dim_cap });
            }
            let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
            offsets.push(total);
            total += words.len();
            levels.push(Level { words, index, weights });
        }
        offsets.push(total);
        Ok(Self { graph: g.clone(), beta, eps_total: eps.total_mass(), levels, offsets, base })
    }

    pub fn graph(&self) -> &DirectedMultigraph {
        &self.graph
    }

    /// Highest level `N`.
    pub fn top_level(&self) -> usize {
        self.levels.len() - 1
    }

    /// Cylinder length resolved on every level.
    pub fn base_depth(&self) -> usize {
        self.base
    }

    pub fn level_dims(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.words.len()).collect()
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Level of a global basis index.
    pub fn level_of(&self, i: usize) -> usize {
        self.offsets.partition_point(|&o| o <= i) - 1
    }

    fn weight(&self, level: usize, i: usize) -> f64 {
        self.levels[level].weights[i]
    }

    /// `θ^k(x)`: `(θ^k(x) ξ)_{n+k}(κ) = x(κ) ξ_n(σ^k κ)`, truncated at the top
    /// level.
    pub fn creation(&self, x: &CylinderFunction, k: usize) -> Result<SparseMatrix> {
        let g = &self.graph;
        let mut trip = Vec::new();
        for n in 0..self.levels.len().saturating_sub(k) {
            let target = &self.levels[n + k];
            for (i, kappa) in target.words.iter().enumerate() {
                let v = x.value_on(kappa)?;
                if v == 0.0 {
                    continue;
                }
                let src = kappa.shifted(g, k);
                let j = self.levels[n].index[&src];
                let scale = (target.weights[i] / self.weight(n, j)).sqrt();
                trip.push((self.offsets[n + k] + i, self.offsets[n] + j, scale * v));
            }
        }
        Ok(SparseMatrix::from_triplets(self.dim(), self.dim(), trip))
    }

    /// `θ(x)*` from `(θ(x)* η)_n(κ) = Σ_{s(e) = r(κ)} x(eκ) η_{n+1}(eκ)`,
    /// assembled pointwise rather than by transposition.
    pub fn creation_adjoint(&self, x: &CylinderFunction) -> Result<SparseMatrix> {
        let g = &self.graph;
        let mut trip = Vec::new();
        for n in 0..self.top_level() {
            for (j, kappa) in self.levels[n].words.iter().enumerate() {
                for &e in g.edges_from(kappa.range()) {
                    let ek = PathWord::edge(g, e).concat(g, kappa).expect("edge composes");
                    let v = x.value_on(&ek)?;
                    if v == 0.0 {
                        continue;
                    }
                    let Some(i) = self.levels[n + 1].index.get(&ek) else { continue };
                    let scale = (self.weight(n + 1, *i) / self.weight(n, j)).sqrt();
                    trip.push((self.offsets[n] + j, self.offsets[n + 1] + i, scale * v));
                }
            }
        }
        Ok(SparseMatrix::from_triplets(self.dim(), self.dim(), trip))
    }

    /// `ρ(a)`, multiplication by `a` on every level. Words of `a` must be
    /// resolved on level 0.
    pub fn multiplication(&self, a: &CylinderFunction) -> Result<SparseMatrix> {
        if a.max_word_len() > self.base {
            return Err(Error::Resolution { needed: a.max_word_len(), available: self.base });
        }
        let mut diag = Vec::with_capacity(self.dim());
        for l in &self.levels {
            for w in &l.words {
                diag.push(a.value_on(w)?);
            }
        }
        Ok(SparseMatrix::diagonal(&diag))
    }

    /// Operator of `S_α P_γ S_β* = θ^{|α|}(χ_α) ρ(χ_γ) θ^{|β|}(χ_β)*`.
    pub fn term_matrix(&self, t: &Term) -> Result<SparseMatrix> {
        let s_left = self.creation(&CylinderFunction::indicator(t.left.clone()), t.left.len())?;
        let p = self.multiplication(&CylinderFunction::indicator(t.middle.clone()))?;
        let s_right = self.creation(&CylinderFunction::indicator(t.right.clone()), t.right.len())?;
        Ok(s_left.mul(&p).mul(&s_right.transpose()))
    }

    pub fn element_matrix(&self, x: &ToeplitzElement) -> Result<SparseMatrix> {
        let mut acc = SparseMatrix::zeros(self.dim(), self.dim());
        for (t, c) in x.terms() {
            acc = acc.add(&self.term_matrix(t)?.scaled(c));
        }
        Ok(acc)
    }

    /// `ξ^{k,μ} = χ_{Z(μ)}` on level `k = |μ|`, in orthonormal coordinates.
    fn partition_vector(&self, mu: &PathWord) -> Vec<(usize, f64)> {
        let k = mu.len();
        let level = &self.levels[k];
        level
            .words
            .iter()
            .enumerate()
            .filter(|(_, w)| mu.is_prefix_of(w))
            .map(|(i, _)| (self.offsets[k] + i, level.weights[i].sqrt()))
            .collect()
    }

    /// `Σ_{k≤N} Σ_{|μ|=k} e^{−βk} (T ξ^{k,μ} | ξ^{k,μ})` plus a bound on the
    /// levels beyond the truncation.
    pub fn state_via_partitions(&self, x: &ToeplitzElement) -> Result<PartitionState> {
        let tb = tail_bound(&self.graph, self.beta, DEFAULT_N_MAX)?;
        if x.max_middle_len() > self.base {
            return Err(Error::Resolution { needed: x.max_middle_len(), available: self.base });
        }
        let m = self.element_matrix(x)?;
        let mut value = 0.0;
        for k in 0..=self.top_level() {
            let weight = (-self.beta * k as f64).exp();
            for mu in self.graph.all_paths(k, usize::MAX)? {
                let xi = self.partition_vector(&mu);
                if xi.is_empty() {
                    continue;
                }
                let mut pos = BTreeMap::new();
                for &(i, v) in &xi {
                    pos.insert(i, v);
                }
                let mut q = 0.0;
                for &(j, v) in &xi {
                    for &(i, a) in m.row(j) {
                        if let Some(&u) = pos.get(&i) {
                            q += v * a * u;
                        }
                    }
                }
                value += weight * q;
            }
        }
        let tail = x.coefficient_norm() * self.eps_total * tb.remainder(self.top_level() + 1);
        Ok(PartitionState { value, tail_bound: tail })
    }

    /// `ρ(a) − Σ_e θ(a·χ_{Z(e)}) θ(χ_{Z(e)})*` and its spectral data.
    pub fn verify_positivity(&self, a: &CylinderFunction) -> Result<PositivityReport> {
        if !a.has_nonnegative_coefficients() {
            return Err(Error::NegativeCoefficient);
        }
        let g = &self.graph;
        let rho = self.multiplication(a)?;
        let mut sum = SparseMatrix::zeros(self.dim(), self.dim());
        for e in g.edge_ids() {
            let xi = CylinderFunction::indicator(PathWord::edge(g, e));
            let left = self.creation(&a.pointwise(&xi), 1)?;
            let right = self.creation(&xi, 1)?;
            sum = sum.add(&left.mul(&right.transpose()));
        }
        let diff = rho.sub(&sum);
        let l0 = self.offsets[1];
        let level0_residual = diff.sub(&rho).max_abs_where(|i| i < l0, |j| j < l0);
        let upper_residual = diff.max_abs_where(|i| i >= l0, |j| j >= l0);
        let cross = diff.max_abs_where(|i| i < l0, |j| j >= l0).max(diff.max_abs_where(|i| i >= l0, |j| j < l0));
        let (min_eigenvalue, _) = diff.symmetric_eigen_range();
        let upper: Vec<usize> = (l0..self.dim()).collect();
        let (upper_min, _) = diff.principal(&upper).symmetric_eigen_range();
        Ok(PositivityReport {
            min_eigenvalue,
            upper_min_eigenvalue: upper_min,
            level0_residual,
            upper_residual: upper_residual.max(cross),
        })
    }

    /// Residuals of `θ(x)*θ(y) = ρ(⟨x,y⟩)`, `θ(a·x) = ρ(a)θ(x)` and
    /// `θ(x·a) = θ(x)ρ(a)` on the levels below the top.
    pub fn check_relations(
        &self,
        x: &CylinderFunction,
        y: &CylinderFunction,
        a: &CylinderFunction,
    ) -> Result<RelationReport> {
        let g = &self.graph;
        let top = self.offsets[self.top_level()];
        let interior = |j: usize| j < top;
        let tx = self.creation(x, 1)?;
        let ty = self.creation(y, 1)?;
        let toeplitz = tx
            .transpose()
            .mul(&ty)
            .sub(&self.multiplication(&x.inner_product(g, y))?)
            .max_abs_where(|_| true, interior);
        let ra = self.multiplication(a)?;
        let left = self.creation(&a.pointwise(x), 1)?.sub(&ra.mul(&tx)).max_abs_where(|_| true, interior);
        let right = self
            .creation(&x.right_action(g, a)?, 1)?
            .sub(&tx.mul(&ra))
            .max_abs_where(|_| true, interior);
        let adjoint = self.creation_adjoint(x)?.sub(&tx.transpose()).max_abs();
        Ok(RelationReport { toeplitz, left_action: left, right_action: right, adjoint })
    }

    /// `‖θ(x)‖²` on the interior levels next to `c₁ ‖x‖∞²`.
    pub fn creation_norm_bound(&self, x: &CylinderFunction) -> Result<(f64, f64)> {
        let g = &self.graph;
        let tx = self.creation(x, 1)?;
        let top = self.offsets[self.top_level()];
        let interior: Vec<usize> = (0..top).collect();
        let (_, norm_sq) = tx.transpose().mul(&tx).principal(&interior).symmetric_eigen_range();
        let c1 = g.vertex_matrix().max_column_sum() as f64;
        let sup = x.sup_norm(g)?;
        Ok((norm_sq, c1 * sup * sup))
    }

    /// Compares `T(b) T(c)` with `T(bc)` on the input levels whose images stay
    /// inside the truncation. Returns the largest entry difference and the
    /// number of levels compared.
    pub fn product_residual(&self, b: &ToeplitzElement, c: &ToeplitzElement) -> Result<(f64, usize)> {
        let g = &self.graph;
        let top = self.top_level() as i64;
        let reach = |x: &ToeplitzElement| {
            x.terms().map(|(t, _)| t.degree()).fold(0i64, i64::max)
        };
        let span = |x: &ToeplitzElement| x.terms().map(|(t, _)| t.degree()).collect::<Vec<_>>();
        let mb = self.element_matrix(b)?;
        let mc = self.element_matrix(c)?;
        let mbc = self.element_matrix(&b.multiply(g, c))?;
        let diff = mb.mul(&mc).sub(&mbc);
        let (up_c, degs_c, degs_b) = (reach(c), span(c), span(b));
        let admissible = |n: i64| {
            n + up_c <= top
                && degs_c.iter().all(|&dc| degs_b.iter().all(|&db| n + dc + db.max(0) <= top))
        };
        let levels: Vec<bool> = (0..=top).map(admissible).collect();
        let count = levels.iter().filter(|&&ok| ok).count();
        let res = diff.max_abs_where(|_| true, |j| levels[self.level_of(j)]);
        Ok((res, count))
    }

    /// Creation operators of single edges, in edge order.
    pub fn edge_creations(&self) -> Result<Vec<(EdgeId, SparseMatrix)>> {
        let g = &self.graph;
        g.edge_ids()
            .map(|e| Ok((e, self.creation(&CylinderFunction::indicator(PathWord::edge(g, e)), 1)?)))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PartitionState {
    pub value: f64,
    pub tail_bound: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PositivityReport {
    /// Smallest eigenvalue over all levels.
    pub min_eigenvalue: f64,
    /// Smallest eigenvalue on levels `1..=N`.
    pub upper_min_eigenvalue: f64,
    /// Largest entry of the difference minus `ρ(a)` on level 0.
    pub level0_residual: f64,
    /// Largest entry of the difference touching levels `1..=N`.
    pub upper_residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RelationReport {
    pub toeplitz: f64,
    pub left_action: f64,
    pub right_action: f64,
    /// Pointwise adjoint against the transpose of the creation matrix.
    pub adjoint: f64,
}

impl RelationReport {
    pub fn max(&self) -> f64 {
        self.toeplitz.max(self.left_action).max(self.right_action).max(self.adjoint)
    }
}
