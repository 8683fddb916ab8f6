//! Seeded random inputs for the invariant checks.

use kmslab_core::graph::DEFAULT_PATH_CAP;
use kmslab_core::kms::ToeplitzElement;
use kmslab_core::shift::CylinderFunction;
use kmslab_core::{DirectedMultigraph, PathWord};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Graph on at most `max_vertices` vertices with at most `max_edges` edges,
/// every vertex emitting at least one edge.
pub fn random_graph(rng: &mut impl Rng, max_vertices: usize, max_edges: usize) -> DirectedMultigraph {
    let n = rng.random_range(1..=max_vertices.min(max_edges));
    let extra = rng.random_range(0..=max_edges - n);
    let mut pairs: Vec<(usize, usize)> = (0..n).map(|s| (rng.random_range(0..n), s)).collect();
    for _ in 0..extra {
        pairs.push((rng.random_range(0..n), rng.random_range(0..n)));
    }
    DirectedMultigraph::from_pairs(n, &pairs).expect("indices are in range")
}

/// Paths of each length up to a bound, for uniform choice.
pub struct WordTable {
    by_len: Vec<Vec<PathWord>>,
}

impl WordTable {
    pub fn new(g: &DirectedMultigraph, max_len: usize) -> Self {
        let by_len = (0..=max_len).map(|k| g.all_paths(k, DEFAULT_PATH_CAP).expect("small graphs")).collect();
        WordTable { by_len }
    }

    pub fn max_len(&self) -> usize {
        self.by_len.len() - 1
    }

    /// A path of length `len`, if any exist.
    pub fn word(&self, rng: &mut impl Rng, len: usize) -> Option<PathWord> {
        self.by_len.get(len)?.choose(rng).cloned()
    }

    pub fn all(&self, len: usize) -> &[PathWord] {
        &self.by_len[len]
    }
}

/// Limits for [`random_spanning`].
#[derive(Clone, Copy, Debug)]
pub struct SpanningShape {
    /// Longest `μ`, `ν`.
    pub max_word: usize,
    /// Longest cylinder left after removing the tensor degree.
    pub max_middle: usize,
}

/// `ψ^{⊗l}(χ_{Z(μ)}) ψ^{⊗m}(χ_{Z(ν)})*` with `|μ| ≥ l`, `|ν| ≥ m`.
pub fn random_spanning(
    rng: &mut impl Rng,
    g: &DirectedMultigraph,
    words: &WordTable,
    shape: SpanningShape,
) -> (usize, PathWord, usize, PathWord) {
    let top = shape.max_word.min(words.max_len());
    loop {
        let mu_len = rng.random_range(0..=top);
        let nu_len = rng.random_range(0..=top);
        let l = rng.random_range(mu_len.saturating_sub(shape.max_middle)..=mu_len);
        let m = rng.random_range(nu_len.saturating_sub(shape.max_middle)..=nu_len);
        let (Some(mu), Some(nu)) = (words.word(rng, mu_len), words.word(rng, nu_len)) else {
            continue;
        };
        // bias towards composable pairs so that products are not all zero
        if rng.random_bool(0.5) && mu.shifted(g, l).range() != nu.shifted(g, m).range() {
            continue;
        }
        return (l, mu, m, nu);
    }
}

pub fn spanning_element(
    g: &DirectedMultigraph,
    (l, mu, m, nu): &(usize, PathWord, usize, PathWord),
    coeff: f64,
) -> ToeplitzElement {
    ToeplitzElement::spanning(g, *l, mu, *m, nu).expect("sampled words are paths").scaled(coeff)
}

/// Sum of one to three spanning elements sharing a degree.
pub fn random_homogeneous(
    rng: &mut impl Rng,
    g: &DirectedMultigraph,
    words: &WordTable,
    shape: SpanningShape,
) -> ToeplitzElement {
    let first = random_spanning(rng, g, words, shape);
    let degree = first.0 as i64 - first.2 as i64;
    let mut x = spanning_element(g, &first, rng.random_range(-1.0..1.0));
    for _ in 0..rng.random_range(0..=2) {
        for _ in 0..32 {
            let s = random_spanning(rng, g, words, shape);
            if s.0 as i64 - s.2 as i64 == degree {
                x = x.plus(&spanning_element(g, &s, rng.random_range(-1.0..1.0)));
                break;
            }
        }
    }
    x
}

/// Sum of one to three arbitrary spanning elements.
pub fn random_element(
    rng: &mut impl Rng,
    g: &DirectedMultigraph,
    words: &WordTable,
    shape: SpanningShape,
) -> ToeplitzElement {
    let mut x = ToeplitzElement::zero();
    for _ in 0..rng.random_range(1..=3) {
        let s = random_spanning(rng, g, words, shape);
        x = x.plus(&spanning_element(g, &s, rng.random_range(-1.0..1.0)));
    }
    x
}

/// `Σ c_i χ_{Z(w_i)}` with `c_i ∈ [0, 1)` and `|w_i| ≤ max_len`.
pub fn random_nonnegative_function(rng: &mut impl Rng, words: &WordTable, max_len: usize) -> CylinderFunction {
    let mut f = CylinderFunction::zero();
    for _ in 0..rng.random_range(1..=4) {
        let len = rng.random_range(0..=max_len.min(words.max_len()));
        if let Some(w) = words.word(rng, len) {
            f.add_term(w, rng.random_range(0.0..1.0));
        }
    }
    f
}

/// Point of the probability simplex on `n` coordinates restricted to `support`.
pub fn random_simplex_point(rng: &mut impl Rng, n: usize, support: &[usize]) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for &i in support {
        x[i] = -rng.random_range(f64::MIN_POSITIVE..1.0).ln();
    }
    let s: f64 = x.iter().sum();
    x.iter().map(|v| v / s).collect()
}
