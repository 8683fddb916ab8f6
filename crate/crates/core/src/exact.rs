//! Rational arithmetic for vertex-level quantities when `e^{−β}` is rational.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::graph::DirectedMultigraph;
use crate::spectral::{spectral_radius, DEFAULT_TOL};

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Gaussian elimination with exact pivots.
pub fn solve(mut m: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Result<Vec<BigRational>> {
    let n = m.len();
    for col in 0..n {
        let p = (col..n).find(|&r| !m[r][col].is_zero()).ok_or(Error::Singular)?;
        m.swap(col, p);
        b.swap(col, p);
        let inv = m[col][col].recip();
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] * &inv;
            for c in col..n {
                let t = &f * &m[col][c];
                m[r][c] -= t;
            }
            let t = &f * &b[col];
            b[r] -= t;
        }
    }
    Ok((0..n).map(|i| &b[i] / &m[i][i]).collect())
}

fn check_t(g: &DirectedMultigraph, t: &BigRational) -> Result<()> {
    if !t.is_positive() {
        return Err(Error::InvalidArgument("e^{-β} must be positive".into()));
    }
    let tf = t.to_f64().unwrap_or(f64::INFINITY);
    let beta = -tf.ln();
    let rho = spectral_radius(g, DEFAULT_TOL);
    if rho.has_cycle && tf * rho.upper >= 1.0 {
        return Err(Error::SubcriticalTemperature { beta, beta_c: rho.value.ln() });
    }
    Ok(())
}

fn i_minus_t(g: &DirectedMultigraph, t: &BigRational, transpose: bool) -> Vec<Vec<BigRational>> {
    let a = g.vertex_matrix().rows();
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let entry = if transpose { a[j][i] } else { a[i][j] };
                    let d = if i == j { BigRational::one() } else { BigRational::zero() };
                    d - t * BigRational::from_integer(BigInt::from(entry))
                })
                .collect()
        })
        .collect()
}

/// `f_β` per vertex, solving `(I − tAᵀ) y = 1` for `t = e^{−β}`.
pub fn f_beta_exact(g: &DirectedMultigraph, t: &BigRational) -> Result<Vec<BigRational>> {
    check_t(g, t)?;
    let n = g.num_vertices();
    solve(i_minus_t(g, t, true), vec![BigRational::one(); n])
}

/// Vertex masses `μ(Z(v))` of `Σ tⁿ Rⁿ ε`, solving `(I − tA) m = ε`.
pub fn resolvent_exact(g: &DirectedMultigraph, t: &BigRational, eps: &[BigRational]) -> Result<Vec<BigRational>> {
    check_t(g, t)?;
    if eps.len() != g.num_vertices() {
        return Err(Error::InvalidArgument("one mass per vertex".into()));
    }
    solve(i_minus_t(g, t, false), eps.to_vec())
}

/// `ε / (y·ε)`, so that `∫ f_β dε = 1`.
pub fn normalize_exact(g: &DirectedMultigraph, t: &BigRational, eps: &[BigRational]) -> Result<Vec<BigRational>> {
    let y = f_beta_exact(g, t)?;
    let total: BigRational = y.iter().zip(eps).map(|(a, b)| a * b).sum();
    if total.is_zero() {
        return Err(Error::ZeroMeasure);
    }
    Ok(eps.iter().map(|e| e / &total).collect())
}
