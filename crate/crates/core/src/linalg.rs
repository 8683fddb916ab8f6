//! Small dense and sparse helpers shared by the numeric modules.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_bigint::BigUint;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};

/// Natural log of a big integer without overflowing `f64`.
pub fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * core::f64::consts::LN_2
}

/// Solves `m x = b` by LU with one round of residual refinement. Returns the
/// solution and the final residual in the max norm.
pub fn solve(m: &DMatrix<f64>, b: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let lu = m.clone().lu();
    let mut x = lu.solve(b).ok_or(Error::Singular)?;
    let r = b - m * &x;
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }
    let residual = (b - m * &x).amax();
    if !residual.is_finite() || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular);
    }
    Ok((x, residual))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Row-major sparse matrix with sorted column indices per row.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, rows: vec![Vec::new(); nrows] }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let rows = d.iter().enumerate().map(|(i, &v)| if v == 0.0 { Vec::new() } else { vec![(i, v)] }).collect();
        Self { nrows: d.len(), ncols: d.len(), rows }
    }

    pub fn from_triplets(nrows: usize, ncols: usize, triplets: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut acc: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); nrows];
        for (i, j, v) in triplets {
            assert!(i < nrows && j < ncols, "triplet ({i}, {j}) out of bounds");
            *acc[i].entry(j).or_insert(0.0) += v;
        }
        let rows = acc.into_iter().map(|r| r.into_iter().filter(|&(_, v)| v != 0.0).collect()).collect();
        Self { nrows, ncols, rows }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i].binary_search_by_key(&j, |&(c, _)| c).map_or(0.0, |k| self.rows[i][k].1)
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows.iter().enumerate().flat_map(|(i, r)| r.iter().map(move |&(j, v)| (i, j, v)))
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.ncols, self.nrows, self.triplets().map(|(i, j, v)| (j, i, v)))
    }

    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.ncols, other.nrows, "dimension mismatch in sparse product");
        let mut rows = Vec::with_capacity(self.nrows);
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        for r in &self.rows {
            acc.clear();
            for &(k, a) in r {
                for &(j, b) in &other.rows[k] {
                    *acc.entry(j).or_insert(0.0) += a * b;
                }
            }
            rows.push(acc.iter().filter(|&(_, &v)| v != 0.0).map(|(&j, &v)| (j, v)).collect());
        }
        SparseMatrix { nrows: self.nrows, ncols: other.ncols, rows }
    }

    pub fn scaled(&self, c: f64) -> SparseMatrix {
        let rows = self.rows.iter().map(|r| r.iter().map(|&(j, v)| (j, c * v)).collect()).collect();
        SparseMatrix { nrows: self.nrows, ncols: self.ncols, rows }
    }

    pub fn add(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols), "dimension mismatch in sparse sum");
        Self::from_triplets(self.nrows, self.ncols, self.triplets().chain(other.triplets()))
    }

    pub fn sub(&self, other: &SparseMatrix) -> SparseMatrix {
        self.add(&other.scaled(-1.0))
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().map(|&(j, v)| v * x[j]).sum()).collect()
    }

    /// Largest absolute entry among rows and columns accepted by the filters.
    pub fn max_abs_where(&self, keep_row: impl Fn(usize) -> bool, keep_col: impl Fn(usize) -> bool) -> f64 {
        self.triplets()
            .filter(|&(i, j, _)| keep_row(i) && keep_col(j))
            .map(|(_, _, v)| v.abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs_where(|_| true, |_| true)
    }

    /// Principal submatrix on the given index set.
    pub fn principal(&self, idx: &[usize]) -> SparseMatrix {
        let mut pos = BTreeMap::new();
        for (k, &i) in idx.iter().enumerate() {
            pos.insert(i, k);
        }
        let trip = idx.iter().enumerate().flat_map(|(k, &i)| {
            let pos = &pos;
            self.rows[i].iter().filter_map(move |&(j, v)| pos.get(&j).map(|&l| (k, l, v)))
        });
        Self::from_triplets(idx.len(), idx.len(), trip.collect::<Vec<_>>())
    }

    /// Extreme eigenvalues `(min, max)` of a symmetric matrix. The sparsity
    /// graph is split into connected blocks and each block is solved densely.
    pub fn symmetric_eigen_range(&self) -> (f64, f64) {
        assert_eq!(self.nrows, self.ncols, "eigenvalues need a square matrix");
        let n = self.nrows;
        if n == 0 {
            return (0.0, 0.0);
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (i, j, _) in self.triplets() {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a] = b;
            }
        }
        let mut blocks: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..n {
            let r = find(&mut parent, i);
            blocks.entry(r).or_default().push(i);
        }
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for idx in blocks.values() {
            let sub = self.principal(idx);
            let k = idx.len();
            let mut dense = DMatrix::<f64>::zeros(k, k);
            for (i, j, v) in sub.triplets() {
                dense[(i, j)] = v;
            }
            // symmetrise to absorb round-off asymmetry
            let sym = (&dense + dense.transpose()) * 0.5;
            let eig = SymmetricEigen::new(sym);
            for &ev in eig.eigenvalues.iter() {
                lo = lo.min(ev);
                hi = hi.max(ev);
            }
        }
        (lo, hi)
    }
}
