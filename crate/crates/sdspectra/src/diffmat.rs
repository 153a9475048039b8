//! The first-difference matrix `D`, its powers, inverses, and the exact
//! integer Gram matrix `(D^r)^T D^r`.
//!
//! `D` is lower bidiagonal with 1 on the diagonal and -1 on the subdiagonal.
//! Operators are stored implicitly as `(n, r)`; applications run in `O(r n)`
//! and dense matrices are materialized only on demand.

use crate::error::{Error, Result};
use crate::dense::Mat;

/// Exact binomial coefficient in checked 128-bit arithmetic.
///
/// Returns 0 for `k > n`. Panics on overflow, which cannot occur for the
/// dimensions this crate accepts (n <= 2048 + r, r <= 6 for Gram use).
pub fn binom(n: u64, k: u64) -> i128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for t in 1..=k {
        acc = acc
            .checked_mul((n - k + t) as i128)
            .expect("binomial overflow");
        acc /= t as i128; // exact: product of t consecutive integers
    }
    acc
}

/// Implicit difference operator `D^r` on vectors of length `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DifferenceOperator {
    pub n: usize,
    pub r: usize,
}

impl DifferenceOperator {
    pub fn new(n: usize, r: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::SizeOutOfRange { n, min: 2, max: usize::MAX });
        }
        if r < 1 {
            return Err(Error::OrderOutOfRange { n, r });
        }
        Ok(DifferenceOperator { n, r })
    }

    /// Gram matrix `(D^r)^T D^r` via the exact closed form.
    /// Requires `r < n/2`.
    pub fn gram(&self) -> Result<GramMatrix> {
        build_gram(self.n, self.r)
    }

    pub fn apply_dr(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: v.len() });
        }
        Ok(apply_d_pow(v, self.r))
    }

    pub fn apply_dr_transpose(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: v.len() });
        }
        Ok(apply_d_transpose_pow(v, self.r))
    }

    pub fn apply_dr_inv(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: v.len() });
        }
        Ok(apply_d_inv_pow(v, self.r))
    }
}

/// `(D v)_1 = v_1`, `(D v)_i = v_i - v_{i-1}`.
pub fn apply_d(v: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len());
    let mut prev = 0.0;
    for &x in v {
        out.push(x - prev);
        prev = x;
    }
    out
}

/// `(D^T v)_i = v_i - v_{i+1}`, last entry `v_n`.
pub fn apply_d_transpose(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let next = if i + 1 < n { v[i + 1] } else { 0.0 };
        out.push(v[i] - next);
    }
    out
}

/// r-fold composition of `apply_d`.
pub fn apply_d_pow(v: &[f64], r: usize) -> Vec<f64> {
    let mut w = v.to_vec();
    for _ in 0..r {
        w = apply_d(&w);
    }
    w
}

/// r-fold composition of `apply_d_transpose`.
pub fn apply_d_transpose_pow(v: &[f64], r: usize) -> Vec<f64> {
    let mut w = v.to_vec();
    for _ in 0..r {
        w = apply_d_transpose(&w);
    }
    w
}

/// `D^{-1}`: the running cumulative sum, exact inverse of `apply_d`.
pub fn apply_d_inv(v: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len());
    let mut acc = 0.0;
    for &x in v {
        acc += x;
        out.push(acc);
    }
    out
}

/// r-fold cumulative sum; exact over integers when `v` is integer-valued.
pub fn apply_d_inv_pow(v: &[f64], r: usize) -> Vec<f64> {
    let mut w = v.to_vec();
    for _ in 0..r {
        w = apply_d_inv(&w);
    }
    w
}

/// r-fold cumulative sum in exact 128-bit integers.
pub fn apply_d_inv_pow_i128(v: &[i128], r: usize) -> Vec<i128> {
    let mut w = v.to_vec();
    for _ in 0..r {
        let mut acc: i128 = 0;
        for x in w.iter_mut() {
            acc = acc.checked_add(*x).expect("cumulative sum overflow");
            *x = acc;
        }
    }
    w
}

/// Entry reversal: `result_i = v_{n+1-i}`.
pub fn reverse(v: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    out.reverse();
    out
}

/// One exact entry of `(D^r)^T D^r` (0-based indices).
///
/// Interior band: `(-1)^m binom(2r, r-m)` with `m = |i-j|`; the lower-right
/// `r x r` corner switches to the truncated convolution
/// `(-1)^m sum_l binom(r, l+m) binom(r, l)`; zero beyond the band.
pub fn gram_entry(n: usize, r: usize, i: usize, j: usize) -> Result<i128> {
    if 2 * r >= n {
        return Err(Error::OrderOutOfRange { n, r });
    }
    if i >= n || j >= n {
        return Err(Error::IndexOutOfRange { i, j, n });
    }
    let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
    let m = hi - lo;
    if m > r {
        return Ok(0);
    }
    let sign = if m % 2 == 0 { 1 } else { -1 };
    // 1-based row index of the smaller coordinate decides the regime.
    let value = if lo + 1 <= n - r {
        binom(2 * r as u64, (r - m) as u64)
    } else {
        let cap = n - (hi + 1); // N - j in 1-based terms
        let mut acc: i128 = 0;
        for l in 0..=cap as u64 {
            acc += binom(r as u64, l + m as u64) * binom(r as u64, l);
        }
        acc
    };
    Ok(sign * value)
}

/// Banded symmetric integer matrix `(D^r)^T D^r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GramMatrix {
    pub n: usize,
    pub r: usize,
    entries: Vec<i128>, // row-major n x n
}

impl GramMatrix {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i128 {
        self.entries[i * self.n + j]
    }

    /// Dense f64 copy (entries are small integers, conversion is exact).
    pub fn to_mat(&self) -> Mat {
        Mat::from_fn(self.n, self.n, |i, j| self.get(i, j) as f64)
    }

    /// Banded matrix-vector product.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        let r = self.r;
        (0..n)
            .map(|i| {
                let lo = i.saturating_sub(r);
                let hi = (i + r).min(n - 1);
                (lo..=hi).map(|j| self.get(i, j) as f64 * v[j]).sum()
            })
            .collect()
    }

    /// Row-major CSV with exact integer text.
    pub fn csv_string(&self) -> String {
        let mut s = String::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if j > 0 {
                    s.push(',');
                }
                s.push_str(&self.get(i, j).to_string());
            }
            s.push('\n');
        }
        s
    }
}

/// Materializes the full Gram matrix from `gram_entry`.
pub fn build_gram(n: usize, r: usize) -> Result<GramMatrix> {
    if n < 2 {
        return Err(Error::SizeOutOfRange { n, min: 2, max: usize::MAX });
    }
    if r < 1 || 2 * r >= n {
        return Err(Error::OrderOutOfRange { n, r });
    }
    let mut entries = vec![0i128; n * n];
    for i in 0..n {
        let lo = i.saturating_sub(r);
        let hi = (i + r).min(n - 1);
        for j in lo..=hi {
            entries[i * n + j] = gram_entry(n, r, i, j)?;
        }
    }
    Ok(GramMatrix { n, r, entries })
}

// ── Dense integer oracles ────────────────────────────────────────────

/// Dense `D^r` with exact integer entries (row-major), built by repeated
/// integer matrix multiplication. `O(n^2 r)` using bandedness.
pub fn dense_d_pow_i128(n: usize, r: usize) -> Vec<i128> {
    // D itself.
    let mut d = vec![0i128; n * n];
    for i in 0..n {
        d[i * n + i] = 1;
        if i > 0 {
            d[i * n + i - 1] = -1;
        }
    }
    let mut acc = d.clone();
    for _ in 1..r {
        let mut next = vec![0i128; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = acc[i * n + k];
                if a == 0 {
                    continue;
                }
                for j in k.saturating_sub(1)..=k {
                    next[i * n + j] += a * d[k * n + j];
                }
            }
        }
        acc = next;
    }
    acc
}

/// Exact integer product `(D^r)^T D^r`, the independent oracle for
/// `build_gram`.
pub fn gram_product_oracle(n: usize, r: usize) -> Vec<i128> {
    let dr = dense_d_pow_i128(n, r);
    let mut out = vec![0i128; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0i128;
            for k in 0..n {
                acc += dr[k * n + i] * dr[k * n + j];
            }
            out[i * n + j] = acc;
        }
    }
    out
}

/// Dense f64 copy of `D^r` (exact conversion; entries are binomials).
pub fn dense_d_pow(n: usize, r: usize) -> Mat {
    let ints = dense_d_pow_i128(n, r);
    Mat::from_fn(n, n, |i, j| ints[i * n + j] as f64)
}

/// Inverse Gram `D^{-r} (D^{-r})^T` in f64.
///
/// `(D^{-r})_{i,j} = binom(i-j+r-1, r-1)` for `i >= j`; every term in the
/// product accumulation is nonnegative, so the f64 sums carry no
/// cancellation and are accurate to ~n*eps relative.
pub fn inverse_gram_mat(n: usize, r: usize) -> Mat {
    let mut c = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            c[(i, j)] = binom((i - j + r - 1) as u64, (r - 1) as u64) as f64;
        }
    }
    let mut m = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut acc = 0.0;
            for k in 0..=j {
                acc += c[(i, k)] * c[(j, k)];
            }
            m[(i, j)] = acc;
            m[(j, i)] = acc;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_vec(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    fn dense_apply(dense: &[i128], n: usize, v: &[f64]) -> Vec<f64> {
        (0..n)
            .map(|i| (0..n).map(|j| dense[i * n + j] as f64 * v[j]).sum())
            .collect()
    }

    #[test]
    fn apply_d_zeros_and_ones() {
        assert_eq!(apply_d(&[0.0; 5]), vec![0.0; 5]);
        assert_eq!(apply_d(&[1.0; 4]), vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn apply_d_matches_dense_product() {
        let v = random_vec(32, 1);
        let dense = dense_d_pow_i128(32, 1);
        let got = apply_d(&v);
        let want = dense_apply(&dense, 32, &v);
        for i in 0..32 {
            assert!((got[i] - want[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn apply_d_pow_basis_column() {
        let mut e1 = vec![0.0; 5];
        e1[0] = 1.0;
        assert_eq!(apply_d_pow(&e1, 2), vec![1.0, -2.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn apply_d_pow_r1_is_apply_d() {
        let v = random_vec(17, 2);
        assert_eq!(apply_d_pow(&v, 1), apply_d(&v));
    }

    #[test]
    fn apply_d_pow_matches_dense_r3() {
        let v = random_vec(24, 3);
        let dense = dense_d_pow_i128(24, 3);
        let got = apply_d_pow(&v, 3);
        let want = dense_apply(&dense, 24, &v);
        for i in 0..24 {
            assert!((got[i] - want[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn transpose_pow_matches_dense_transpose() {
        let v = random_vec(24, 4);
        let dense = dense_d_pow_i128(24, 3);
        let got = apply_d_transpose_pow(&v, 3);
        // (D^r)^T v
        let want: Vec<f64> = (0..24)
            .map(|i| (0..24).map(|j| dense[j * 24 + i] as f64 * v[j]).sum())
            .collect();
        for i in 0..24 {
            assert!((got[i] - want[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn inv_roundtrip_and_examples() {
        let v = random_vec(20, 5);
        let back = apply_d_inv(&apply_d(&v));
        for i in 0..20 {
            assert!((back[i] - v[i]).abs() < 1e-12);
        }
        let mut e1 = vec![0.0; 4];
        e1[0] = 1.0;
        assert_eq!(apply_d_inv(&e1), vec![1.0; 4]);
        assert_eq!(apply_d_inv(&[1.0, -1.0, 1.0]), vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn gram_entry_reference_7x7() {
        // Displayed (D^2)^T D^2 for N = 7.
        assert_eq!(gram_entry(7, 2, 0, 0).unwrap(), 6);
        assert_eq!(gram_entry(7, 2, 0, 1).unwrap(), -4);
        assert_eq!(gram_entry(7, 2, 0, 2).unwrap(), 1);
        assert_eq!(gram_entry(7, 2, 5, 5).unwrap(), 5);
        assert_eq!(gram_entry(7, 2, 5, 6).unwrap(), -2);
        assert_eq!(gram_entry(7, 2, 6, 6).unwrap(), 1);
    }

    #[test]
    fn gram_entry_band_zero_and_errors() {
        assert_eq!(gram_entry(10, 2, 0, 5).unwrap(), 0);
        assert!(matches!(
            gram_entry(5, 3, 0, 0),
            Err(Error::OrderOutOfRange { .. })
        ));
        assert!(matches!(
            gram_entry(10, 2, 10, 0),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn build_gram_known_7x7() {
        let g = build_gram(7, 2).unwrap();
        let expected: [[i128; 7]; 7] = [
            [6, -4, 1, 0, 0, 0, 0],
            [-4, 6, -4, 1, 0, 0, 0],
            [1, -4, 6, -4, 1, 0, 0],
            [0, 1, -4, 6, -4, 1, 0],
            [0, 0, 1, -4, 6, -4, 1],
            [0, 0, 0, 1, -4, 5, -2],
            [0, 0, 0, 0, 1, -2, 1],
        ];
        for i in 0..7 {
            for j in 0..7 {
                assert_eq!(g.get(i, j), expected[i][j], "at ({i},{j})");
            }
        }
    }

    #[test]
    fn build_gram_matches_exact_product() {
        for (n, r) in [(5usize, 1usize), (20, 3), (7, 2), (13, 5)] {
            let g = build_gram(n, r).unwrap();
            let oracle = gram_product_oracle(n, r);
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(g.get(i, j), oracle[i * n + j], "n={n} r={r} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn build_gram_symmetric() {
        let g = build_gram(40, 4).unwrap();
        for i in 0..40 {
            for j in 0..40 {
                assert_eq!(g.get(i, j), g.get(j, i));
            }
        }
    }

    #[test]
    fn dr_reversal_identity() {
        // (D^r)_{i,j} = (D^r)_{N-j, N-i} in 1-based terms.
        for (n, r) in [(12usize, 3usize), (9, 4)] {
            let d = dense_d_pow_i128(n, r);
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(d[i * n + j], d[(n - 1 - j) * n + (n - 1 - i)]);
                }
            }
        }
    }

    #[test]
    fn reverse_examples() {
        assert_eq!(reverse(&[1.0, 2.0, 3.0]), vec![3.0, 2.0, 1.0]);
        assert_eq!(reverse(&[1.0, 2.0, 1.0]), vec![1.0, 2.0, 1.0]);
        let v = random_vec(11, 6);
        assert_eq!(reverse(&reverse(&v)), v);
    }

    #[test]
    fn inverse_gram_small_exact() {
        // n=4, r=1: D^{ -1} is all-ones lower triangular, M_ij = min(i,j)+1.
        let m = inverse_gram_mat(4, 1);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m[(i, j)], (i.min(j) + 1) as f64);
            }
        }
    }

    #[test]
    fn binom_values() {
        assert_eq!(binom(4, 2), 6);
        assert_eq!(binom(2053, 5), {
            let mut acc: i128 = 1;
            for t in 0..5u64 {
                acc *= (2053 - t) as i128;
            }
            acc / 120
        });
        assert_eq!(binom(3, 5), 0);
    }
}
