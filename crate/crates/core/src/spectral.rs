//! Perron–Frobenius data of the vertex matrix: spectral radius with
//! certified brackets, β_c, the empirical β_l sequence and growth constants.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigUint;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::graph::{DirectedMultigraph, VertexId, VertexMatrix};
use crate::linalg::ln_big;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_N_MAX: u32 = 64;

const MAX_ITERATIONS: usize = 20_000;

/// Spectral radius with a Collatz–Wielandt enclosure `lower ≤ ρ ≤ upper`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SpectralRadius {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub has_cycle: bool,
}

/// Perron data of one irreducible diagonal block.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BlockPerron {
    pub rho: f64,
    pub lower: f64,
    pub upper: f64,
    /// `A_C x = ρ x`, positive, entries sum to 1.
    pub right: Vec<f64>,
    /// `A_Cᵀ y = ρ y`, positive, entries sum to 1.
    pub left: Vec<f64>,
}

impl BlockPerron {
    /// `‖A_C x − ρ x‖∞` for the right vector.
    pub fn residual(&self, block: &VertexMatrix) -> f64 {
        let n = block.dim();
        (0..n)
            .map(|i| {
                let ax: f64 = (0..n).map(|j| block.get(i, j) as f64 * self.right[j]).sum();
                (ax - self.rho * self.right[i]).abs()
            })
            .fold(0.0, f64::max)
    }
}

fn dense(a: &VertexMatrix) -> DMatrix<f64> {
    let n = a.dim();
    DMatrix::from_fn(n, n, |i, j| a.get(i, j) as f64)
}

/// Power iteration on `B = A + I`, which is primitive whenever `A` is
/// irreducible. Every few rounds the iterating matrix is squared so slowly
/// mixing blocks still converge in a bounded number of steps.
fn perron_vector(b: &DMatrix<f64>, tol: f64) -> (f64, f64, DVector<f64>) {
    let n = b.nrows();
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut m = b.clone();
    let (mut lo, mut hi) = (0.0, f64::INFINITY);
    for it in 0..MAX_ITERATIONS {
        let y = b * &x;
        let (mut l, mut h) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let r = y[i] / x[i];
            l = l.min(r);
            h = h.max(r);
        }
        lo = f64::max(lo, l);
        hi = f64::min(hi, h);
        let floor = 8.0 * f64::EPSILON * hi;
        if hi - lo <= tol.max(floor) {
            break;
        }
        let mut next = &m * &x;
        let s = next.sum();
        next /= s;
        // keep entries strictly positive against underflow
        for v in next.iter_mut() {
            if *v < f64::MIN_POSITIVE {
                *v = f64::MIN_POSITIVE;
            }
        }
        x = next;
        if it % 16 == 15 {
            let sq = &m * &m;
            let norm = sq.amax();
            m = sq / norm;
        }
    }
    let s = x.sum();
    (lo, hi, x / s)
}

/// Perron root and vectors of an irreducible block with at least one cycle.
pub fn block_perron(block: &VertexMatrix, tol: f64) -> BlockPerron {
    let n = block.dim();
    if n == 1 {
        let r = block.get(0, 0) as f64;
        return BlockPerron { rho: r, lower: r, upper: r, right: vec![1.0], left: vec![1.0] };
    }
    let b = dense(block) + DMatrix::identity(n, n);
    let (lo, hi, right) = perron_vector(&b, tol);
    let (lo_t, hi_t, left) = perron_vector(&b.transpose(), tol);
    let lower = lo.max(lo_t) - 1.0;
    let upper = hi.min(hi_t) - 1.0;
    BlockPerron {
        rho: 0.5 * (lower + upper),
        lower,
        upper,
        right: right.iter().copied().collect(),
        left: left.iter().copied().collect(),
    }
}

/// Perron data for each nontrivial component, in component order.
pub fn component_perron(g: &DirectedMultigraph, tol: f64) -> Vec<(usize, BlockPerron)> {
    let a = g.vertex_matrix();
    let dec = g.scc_decompose();
    dec.components
        .iter()
        .enumerate()
        .filter(|(_, c)| c.nontrivial)
        .map(|(i, c)| {
            let idx: Vec<usize> = c.vertices.iter().map(|v| v.0).collect();
            (i, block_perron(&a.submatrix(&idx), tol))
        })
        .collect()
}

pub fn spectral_radius(g: &DirectedMultigraph, tol: f64) -> SpectralRadius {
    let blocks = component_perron(g, tol);
    if blocks.is_empty() {
        return SpectralRadius { value: 0.0, lower: 0.0, upper: 0.0, has_cycle: false };
    }
    let best = blocks.iter().map(|(_, b)| b).fold(None::<&BlockPerron>, |acc, b| match acc {
        Some(a) if a.rho >= b.rho => Some(a),
        _ => Some(b),
    });
    let best = best.unwrap();
    let lower = blocks.iter().map(|(_, b)| b.lower).fold(0.0, f64::max);
    let upper = blocks.iter().map(|(_, b)| b.upper).fold(0.0, f64::max);
    SpectralRadius { value: best.rho, lower, upper, has_cycle: true }
}

/// `ln ρ(A)`, or an error for acyclic graphs.
pub fn critical_beta(g: &DirectedMultigraph) -> Result<f64> {
    let r = spectral_radius(g, DEFAULT_TOL);
    if r.has_cycle {
        Ok(r.value.ln())
    } else {
        Err(Error::NoCycle)
    }
}

/// Fails unless `β > β_c + margin`.
pub fn require_supercritical(g: &DirectedMultigraph, beta: f64, margin: f64) -> Result<f64> {
    let bc = critical_beta(g)?;
    if !(beta - bc > margin) {
        return Err(Error::SubcriticalTemperature { beta, beta_c: bc });
    }
    Ok(bc)
}

/// Column sums `w ↦ Σ_v A^N(v, w)` for `N = 0..=n_max`.
pub fn column_sums(g: &DirectedMultigraph, n_max: u32) -> Vec<Vec<BigUint>> {
    g.vertex_matrix().column_sum_sequence(n_max)
}

/// `β_c` together with the diagnostic sequence `N ↦ N⁻¹ ln max_w Σ_v A^N(v,w)`
/// for `N = 1..=n_max`.
pub fn beta_c(g: &DirectedMultigraph, n_max: u32) -> Result<(f64, Vec<f64>)> {
    let bc = critical_beta(g)?;
    let sums = column_sums(g, n_max);
    let seq = (1..=n_max as usize)
        .map(|n| ln_big(sums[n].iter().max().unwrap()) / n as f64)
        .collect();
    Ok((bc, seq))
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BetaL {
    /// Maximum over the last quartile of the sequence.
    pub estimate: f64,
    /// `N ↦ N⁻¹ ln min_w Σ_v A^N(v,w)`, `N = 1..=n_max`.
    pub sequence: Vec<f64>,
}

/// Empirical β_l. The minimum runs over vertices that are ranges of
/// infinite paths.
pub fn beta_l_empirical(g: &DirectedMultigraph, n_max: u32) -> Result<BetaL> {
    g.require_no_sinks()?;
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be positive".into()));
    }
    let support = g.supported_vertices();
    if support.is_empty() {
        return Err(Error::NoCycle);
    }
    let sums = column_sums(g, n_max);
    let sequence: Vec<f64> = (1..=n_max as usize)
        .map(|n| {
            let min = support.iter().map(|v| &sums[n][v.0]).min().unwrap();
            ln_big(min) / n as f64
        })
        .collect();
    let start = sequence.len() - (sequence.len() / 4).max(1);
    let estimate = sequence[start..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(BetaL { estimate, sequence })
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GrowthBound {
    /// `max_{N,w} Σ_v A^N(v,w) / (N^{n−1} ρ^N)`.
    pub beta_e: f64,
    /// Exponent `n − 1` where `n` is the number of components.
    pub exponent: u32,
    /// Per-`N` maxima of the ratio, `N = 1..=n_max`.
    pub ratios: Vec<f64>,
    /// The last quartile of `ratios` stays below the earlier maximum.
    pub pass: bool,
}

pub fn growth_bound_check(g: &DirectedMultigraph, n_max: u32) -> Result<GrowthBound> {
    let rho = spectral_radius(g, DEFAULT_TOL);
    if !rho.has_cycle {
        return Err(Error::NoCycle);
    }
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be positive".into()));
    }
    let exponent = g.scc_decompose().len() as u32 - 1;
    let sums = column_sums(g, n_max);
    let ln_rho = rho.value.ln();
    let ratios: Vec<f64> = (1..=n_max as usize)
        .map(|n| {
            let max = sums[n].iter().max().unwrap();
            if max.is_zero() {
                return 0.0;
            }
            (ln_big(max) - exponent as f64 * (n as f64).ln() - n as f64 * ln_rho).exp()
        })
        .collect();
    let beta_e = ratios.iter().copied().fold(0.0, f64::max);
    let split = ratios.len() - ratios.len() / 4;
    let head = ratios[..split].iter().copied().fold(0.0, f64::max);
    let tail = ratios[split..].iter().copied().fold(0.0, f64::max);
    let pass = beta_e.is_finite() && tail <= head * (1.0 + 1e-9);
    Ok(GrowthBound { beta_e, exponent, ratios, pass })
}

/// A vertex `p` with `Σ_v A^N(v,p) ≥ ρ^N` for every `N ≤ n_max`. The default
/// candidate maximises the left Perron vector of a block achieving `ρ`.
pub fn critical_vertex(g: &DirectedMultigraph, n_max: u32) -> Result<VertexId> {
    let rho = spectral_radius(g, DEFAULT_TOL);
    if !rho.has_cycle {
        return Err(Error::NoCycle);
    }
    let dec = g.scc_decompose();
    let mut candidates = Vec::new();
    for (c, perron) in component_perron(g, DEFAULT_TOL) {
        if (perron.rho - rho.value).abs() <= 1e-9 * rho.value.max(1.0) {
            let verts = &dec.components[c].vertices;
            let best = (0..verts.len())
                .max_by(|&i, &j| perron.left[i].partial_cmp(&perron.left[j]).unwrap().then(j.cmp(&i)))
                .unwrap();
            candidates.push(verts[best]);
        }
    }
    candidates.extend(g.vertices());
    let sums = column_sums(g, n_max);
    let ln_rho = rho.value.ln();
    candidates
        .into_iter()
        .find(|p| dominates(&sums, p.0, ln_rho))
        .ok_or(Error::NoCriticalVertex { n_max })
}

/// Whether column `p` satisfies `Σ_v A^N(v,p) ≥ ρ^N` for all recorded `N`.
pub fn dominates(sums: &[Vec<BigUint>], p: usize, ln_rho: f64) -> bool {
    sums.iter().enumerate().skip(1).all(|(n, s)| {
        !s[p].is_zero() && ln_big(&s[p]) >= n as f64 * ln_rho - 1e-9 * (n as f64).max(1.0)
    })
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ComponentSummary {
    pub vertices: Vec<usize>,
    pub nontrivial: bool,
    pub rho: f64,
    pub hereditary: bool,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SpectralReport {
    pub rho: SpectralRadius,
    pub beta_c: Option<f64>,
    pub beta_c_sequence: Vec<f64>,
    /// `None` when the graph has sinks.
    pub beta_l: Option<BetaL>,
    pub components: Vec<ComponentSummary>,
    pub achieving_components: Vec<usize>,
    /// Right Perron vector per nontrivial component.
    pub perron_vectors: Vec<(usize, Vec<f64>)>,
    pub perron_residuals: Vec<(usize, f64)>,
    pub growth: Option<GrowthBound>,
}

impl SpectralReport {
    pub fn compute(g: &DirectedMultigraph, tol: f64, n_max: u32) -> Self {
        let rho = spectral_radius(g, tol);
        let a = g.vertex_matrix();
        let dec = g.scc_decompose();
        let blocks = component_perron(g, tol);
        let hereditary = dec.hereditary_components(g);
        let components = dec
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| ComponentSummary {
                vertices: c.vertices.iter().map(|v| v.0).collect(),
                nontrivial: c.nontrivial,
                rho: blocks.iter().find(|(j, _)| *j == i).map_or(0.0, |(_, b)| b.rho),
                hereditary: hereditary.contains(&i),
            })
            .collect();
        let achieving_components = blocks
            .iter()
            .filter(|(_, b)| rho.has_cycle && (b.rho - rho.value).abs() <= 1e-9 * rho.value.max(1.0))
            .map(|(i, _)| *i)
            .collect();
        let perron_residuals = blocks
            .iter()
            .map(|(i, b)| {
                let idx: Vec<usize> = dec.components[*i].vertices.iter().map(|v| v.0).collect();
                (*i, b.residual(&a.submatrix(&idx)))
            })
            .collect();
        let (beta_c, beta_c_sequence) = match beta_c(g, n_max) {
            Ok((b, s)) => (Some(b), s),
            Err(_) => (None, Vec::new()),
        };
        SpectralReport {
            beta_c,
            beta_c_sequence,
            beta_l: beta_l_empirical(g, n_max).ok(),
            components,
            achieving_components,
            perron_vectors: blocks.iter().map(|(i, b)| (*i, b.right.clone())).collect(),
            perron_residuals,
            growth: growth_bound_check(g, n_max).ok(),
            rho,
        }
    }
}
