//! Covering maps `σ_A(e^{2πix}) = e^{2πiAx}` of `𝕋^d` by integer matrices with
//! `N = |det A| > 1`, and the states on the monomials `u_m v^k v^{*l} u_n*`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::measure::BETA_MARGIN;

pub type IntMatrix = Vec<Vec<i64>>;

/// Fourier coefficients `ν̂(r) = ∫ z^r dν` of a finitely supported character
/// expansion; missing keys are zero.
pub type FourierData = BTreeMap<Vec<i64>, Complex64>;

pub fn haar(d: usize) -> FourierData {
    let mut f = FourierData::new();
    f.insert(vec![0; d], Complex64::new(1.0, 0.0));
    f
}

#[derive(Clone, Debug, PartialEq)]
pub struct TorusSystem {
    a: IntMatrix,
    b: IntMatrix,
    n: u64,
}

impl TorusSystem {
    pub fn new(a: IntMatrix) -> Result<Self> {
        let d = a.len();
        if d == 0 || a.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidArgument(format!("matrix must be square and nonempty")));
        }
        let det = determinant(&to_big(&a)).abs();
        let n = det.to_u64().filter(|&n| n > 1).ok_or_else(|| {
            Error::InvalidArgument(format!("|det A| = {det} must exceed 1"))
        })?;
        let b = (0..d).map(|i| (0..d).map(|j| a[j][i]).collect()).collect();
        Ok(Self { a, b, n })
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.a
    }

    /// `B = Aᵀ`.
    pub fn transpose(&self) -> &IntMatrix {
        &self.b
    }

    /// Number of preimages of each point, `|det A|`.
    pub fn degree(&self) -> u64 {
        self.n
    }

    pub fn beta_c(&self) -> f64 {
        (self.n as f64).ln()
    }

    /// `f_β ≡ 1/(1 − N e^{−β})`.
    pub fn f_beta_const(&self, beta: f64) -> Result<f64> {
        self.require_supercritical(beta)?;
        Ok(1.0 / (1.0 - self.q(beta)))
    }

    fn q(&self, beta: f64) -> f64 {
        self.n as f64 * (-beta).exp()
    }

    fn require_supercritical(&self, beta: f64) -> Result<()> {
        let beta_c = self.beta_c();
        if beta.is_nan() || beta <= beta_c + BETA_MARGIN {
            return Err(Error::SubcriticalTemperature { beta, beta_c });
        }
        Ok(())
    }

    /// `φ(u_m v^k v^{*l} u_n*)` for the state with `ε = (1 − Ne^{−β})ν`,
    /// summing until the remaining terms are below `tol`.
    pub fn evaluate_monomial(
        &self,
        beta: f64,
        nu: &FourierData,
        el: &Monomial,
        tol: f64,
    ) -> Result<MonomialValue> {
        self.require_supercritical(beta)?;
        let d = self.dim();
        if el.m.len() != d || el.n.len() != d {
            return Err(Error::InvalidArgument(format!("monomial exponents must have length {d}")));
        }
        let zero = MonomialValue { value: Complex64::new(0.0, 0.0), tail_bound: 0.0, terms: 0 };
        if el.k != el.l {
            return Ok(zero);
        }
        let q = self.q(beta);
        let scale = (self.n as f64).powi(-(el.k as i32));
        let coeff_bound = nu.values().map(|c| c.norm()).fold(0.0, f64::max);
        let b = to_big(&self.b);
        let mut r: Vec<BigInt> = el.m.iter().zip(&el.n).map(|(m, n)| BigInt::from(m - n)).collect();

        let mut value = Complex64::new(0.0, 0.0);
        let mut j = 0usize;
        loop {
            if j >= el.k {
                if r.iter().all(Zero::is_zero) {
                    // B^{-j'}(m−n) = 0 from here on: the rest is geometric
                    let c = fourier(nu, &r);
                    value += c * (q.powi(j as i32) * scale);
                    return Ok(MonomialValue { value, tail_bound: 0.0, terms: j + 1 });
                }
                value += fourier(nu, &r) * (q.powi(j as i32) * scale * (1.0 - q));
            }
            let tail = q.powi(j as i32 + 1) * scale * coeff_bound;
            if j >= el.k && tail <= tol {
                return Ok(MonomialValue { value, tail_bound: tail, terms: j + 1 });
            }
            match solve_in_lattice(&b, &r)? {
                Some(next) => r = next,
                None => return Ok(MonomialValue { value, tail_bound: 0.0, terms: j + 1 }),
            }
            j += 1;
        }
    }
}

fn fourier(nu: &FourierData, r: &[BigInt]) -> Complex64 {
    let key: Option<Vec<i64>> = r.iter().map(ToPrimitive::to_i64).collect();
    key.and_then(|k| nu.get(&k).copied()).unwrap_or_default()
}

/// `u_m v^k v^{*l} u_n*`.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Monomial {
    pub m: Vec<i64>,
    pub k: usize,
    pub l: usize,
    pub n: Vec<i64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonomialValue {
    pub value: Complex64,
    pub tail_bound: f64,
    pub terms: usize,
}

fn to_big(m: &IntMatrix) -> Vec<Vec<BigInt>> {
    m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

/// Fraction-free Bareiss elimination.
pub fn determinant(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    let mut a = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    if n == 0 {
        return BigInt::one();
    }
    sign * &a[n - 1][n - 1]
}

fn mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = a.len();
    let m = b.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| (0..m).map(|j| (0..b.len()).map(|k| &a[i][k] * &b[k][j]).sum()).collect())
        .collect()
}

/// Column Hermite form `M U = H` with `H` lower triangular, positive pivots and
/// entries left of each pivot reduced into `[0, pivot)`, `U` unimodular.
pub fn column_hermite_form(m: &[Vec<BigInt>]) -> Result<(Vec<Vec<BigInt>>, Vec<Vec<BigInt>>)> {
    let n = m.len();
    let mut h = m.to_vec();
    let mut u: Vec<Vec<BigInt>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect();
    let combine = |x: &mut Vec<Vec<BigInt>>, i: usize, c: usize, p: &BigInt, q: &BigInt, r: &BigInt, s: &BigInt| {
        // (col_i, col_c) ← (p col_i + q col_c, r col_i + s col_c)
        for row in x.iter_mut() {
            let (a, b) = (row[i].clone(), row[c].clone());
            row[i] = p * &a + q * &b;
            row[c] = r * &a + s * &b;
        }
    };
    for i in 0..n {
        for c in i + 1..n {
            if h[i][c].is_zero() {
                continue;
            }
            let (a, b) = (h[i][i].clone(), h[i][c].clone());
            let e = a.extended_gcd(&b);
            let (p, q, r, s) = (e.x, e.y, -(&b / &e.gcd), &a / &e.gcd);
            combine(&mut h, i, c, &p, &q, &r, &s);
            combine(&mut u, i, c, &p, &q, &r, &s);
        }
        if h[i][i].is_zero() {
            return Err(Error::Singular);
        }
        if h[i][i].is_negative() {
            for x in [&mut h, &mut u] {
                for row in x.iter_mut() {
                    row[i] = -row[i].clone();
                }
            }
        }
        for c in 0..i {
            let f = h[i][c].div_floor(&h[i][i]);
            if f.is_zero() {
                continue;
            }
            for x in [&mut h, &mut u] {
                for row in x.iter_mut() {
                    let t = &row[i] * &f;
                    row[c] -= t;
                }
            }
        }
    }
    Ok((h, u))
}

/// Integer solution of `M x = r` for nonsingular `M`, if one exists.
pub fn solve_in_lattice(m: &[Vec<BigInt>], r: &[BigInt]) -> Result<Option<Vec<BigInt>>> {
    let (h, u) = column_hermite_form(m)?;
    let n = m.len();
    let mut y = vec![BigInt::zero(); n];
    for i in 0..n {
        let acc: BigInt = (0..i).map(|k| &h[i][k] * &y[k]).sum();
        let (q, rem) = (&r[i] - acc).div_rem(&h[i][i]);
        if !rem.is_zero() {
            return Ok(None);
        }
        y[i] = q;
    }
    Ok(Some((0..n).map(|i| (0..n).map(|k| &u[i][k] * &y[k]).sum()).collect()))
}

/// Whether `r ∈ B^j ℤ^d`, with `B^{−j} r` when it is.
pub fn lattice_membership(b: &IntMatrix, j: u32, r: &[i64]) -> Result<Option<Vec<BigInt>>> {
    let d = b.len();
    if r.len() != d {
        return Err(Error::InvalidArgument(format!("vector must have length {d}")));
    }
    let base = to_big(b);
    let mut p: Vec<Vec<BigInt>> =
        (0..d).map(|i| (0..d).map(|k| BigInt::from((i == k) as i64)).collect()).collect();
    for _ in 0..j {
        p = mat_mul(&p, &base);
    }
    let r: Vec<BigInt> = r.iter().map(|&x| BigInt::from(x)).collect();
    solve_in_lattice(&p, &r)
}
