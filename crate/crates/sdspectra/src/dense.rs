//! Small dense-matrix toolbox: real symmetric eigensolver (Householder
//! tridiagonalization + implicit-shift QL), one-sided Jacobi SVD, Householder
//! least squares, Hessenberg eigenvalues, and complex helpers.
//!
//! Everything here is plain `f64`/`Complex64` with row-major storage; the
//! matrices involved are at most a few thousand on a side.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Row-major dense real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &[f64]) {
        for i in 0..self.rows {
            self[(i, j)] = v[i];
        }
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `max |self - I|` entrywise.
    pub fn max_abs_minus_identity(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let target = if i == j { 1.0 } else { 0.0 };
                m = m.max((self[(i, j)] - target).abs());
            }
        }
        m
    }

    /// Reverses both row and column order.
    pub fn flipped(&self) -> Mat {
        Mat::from_fn(self.rows, self.cols, |i, j| {
            self[(self.rows - 1 - i, self.cols - 1 - j)]
        })
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

// ── Symmetric eigensolver ────────────────────────────────────────────

/// Full eigendecomposition of a symmetric matrix.
///
/// Returns eigenvalues in ascending order and the matrix whose columns are
/// the corresponding orthonormal eigenvectors. Householder reduction to
/// tridiagonal form followed by the implicit-shift QL iteration (EISPACK
/// tred2/tql2 lineage).
pub fn sym_eigen(a: &Mat) -> Result<(Vec<f64>, Mat)> {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    if n < 2 {
        return Err(Error::SizeOutOfRange { n, min: 2, max: usize::MAX });
    }
    let mut z = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut z, &mut d, &mut e);
    tql2(&mut d, &mut e, &mut z)?;
    sort_eigen_ascending(&mut d, &mut z);
    Ok((d, z))
}

/// Householder reduction of a symmetric matrix to tridiagonal form with
/// accumulated transformations (Numerical-Recipes-style tred2).
fn tred2(z: &mut Mat, d: &mut [f64], e: &mut [f64]) {
    let n = z.rows;
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| z[(i, k)].abs()).sum();
            if scale == 0.0 {
                e[i] = z[(i, l)];
            } else {
                for k in 0..=l {
                    z[(i, k)] /= scale;
                    h += z[(i, k)] * z[(i, k)];
                }
                let f = z[(i, l)];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                z[(i, l)] = f - g;
                let mut ff = 0.0;
                for j in 0..=l {
                    z[(j, i)] = z[(i, j)] / h;
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += z[(j, k)] * z[(i, k)];
                    }
                    for k in (j + 1)..=l {
                        g += z[(k, j)] * z[(i, k)];
                    }
                    e[j] = g / h;
                    ff += e[j] * z[(i, j)];
                }
                let hh = ff / (h + h);
                for j in 0..=l {
                    let f = z[(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        z[(j, k)] -= f * e[k] + g * z[(i, k)];
                    }
                }
            }
        } else {
            e[i] = z[(i, l)];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for i in 0..n {
        if d[i] != 0.0 {
            for j in 0..i {
                let mut g = 0.0;
                for k in 0..i {
                    g += z[(i, k)] * z[(k, j)];
                }
                for k in 0..i {
                    z[(k, j)] -= g * z[(k, i)];
                }
            }
        }
        d[i] = z[(i, i)];
        z[(i, i)] = 1.0;
        for j in 0..i {
            z[(j, i)] = 0.0;
            z[(i, j)] = 0.0;
        }
    }
}

/// Implicit-shift QL iteration on a symmetric tridiagonal matrix with
/// eigenvector accumulation (EISPACK tql2 lineage).
fn tql2(d: &mut [f64], e: &mut [f64], z: &mut Mat) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 50 {
                    return Err(Error::EigenNoConvergence { index: l });
                }

                // Implicit shift from the 2x2 leading block.
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for i in (l + 2)..n {
                    d[i] -= h;
                }
                f += h;

                // QL sweep.
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let h = z[(k, i + 1)];
                        z[(k, i + 1)] = s * z[(k, i)] + c * h;
                        z[(k, i)] = c * z[(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

fn sort_eigen_ascending(d: &mut [f64], z: &mut Mat) {
    let n = d.len();
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        for j in (i + 1)..n {
            if d[j] < d[k] {
                k = j;
            }
        }
        if k != i {
            d.swap(i, k);
            for row in 0..z.rows {
                let t = z[(row, i)];
                z[(row, i)] = z[(row, k)];
                z[(row, k)] = t;
            }
        }
    }
}

// ── One-sided Jacobi SVD ─────────────────────────────────────────────

/// One-sided (Hestenes) Jacobi SVD of a square matrix.
///
/// Returns `(sigma, u, v)` with `a = u * diag(sigma) * v^T`, singular values
/// in descending order. Independent of the QL eigensolver above; serves as a
/// cross-check oracle at small dimensions.
pub fn jacobi_svd(a: &Mat) -> Result<(Vec<f64>, Mat, Mat)> {
    assert_eq!(a.rows, a.cols);
    let n = a.cols;
    let mut g = a.clone();
    let mut v = Mat::identity(n);
    let eps = f64::EPSILON;

    let mut converged = false;
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for i in 0..n {
                    alpha += g[(i, p)] * g[(i, p)];
                    beta += g[(i, q)] * g[(i, q)];
                    gamma += g[(i, p)] * g[(i, q)];
                }
                if gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..n {
                    let gp = g[(i, p)];
                    let gq = g[(i, q)];
                    g[(i, p)] = c * gp - s * gq;
                    g[(i, q)] = s * gp + c * gq;
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::EigenNoConvergence { index: 0 });
    }

    let mut sigma: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| g[(i, j)] * g[(i, j)]).sum::<f64>().sqrt())
        .collect();
    let mut u = Mat::zeros(n, n);
    for j in 0..n {
        if sigma[j] > 0.0 {
            for i in 0..n {
                u[(i, j)] = g[(i, j)] / sigma[j];
            }
        }
    }
    // Descending order.
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        for j in (i + 1)..n {
            if sigma[j] > sigma[k] {
                k = j;
            }
        }
        if k != i {
            sigma.swap(i, k);
            for row in 0..n {
                let t = u[(row, i)];
                u[(row, i)] = u[(row, k)];
                u[(row, k)] = t;
                let t = v[(row, i)];
                v[(row, i)] = v[(row, k)];
                v[(row, k)] = t;
            }
        }
    }
    Ok((sigma, u, v))
}

// ── Householder least squares ────────────────────────────────────────

/// Solves `min ||a x - b||_2` for a full-column-rank `a` (rows >= cols) by
/// Householder QR. No normal equations are formed.
pub fn qr_lstsq(a: &Mat, b: &[f64]) -> Result<Vec<f64>> {
    let m = a.rows;
    let n = a.cols;
    assert!(m >= n, "least squares requires rows >= cols");
    if b.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: b.len() });
    }
    let mut r = a.clone();
    let mut y = b.to_vec();
    let scale = a.max_abs().max(f64::MIN_POSITIVE);

    for k in 0..n {
        let mut norm = 0.0f64;
        for i in k..m {
            norm = norm.hypot(r[(i, k)]);
        }
        if norm == 0.0 {
            return Err(Error::RankDeficient { col: k, pivot: 0.0 });
        }
        let alpha = if r[(k, k)] > 0.0 { -norm } else { norm };
        let mut vk = vec![0.0; m - k];
        vk[0] = r[(k, k)] - alpha;
        for i in (k + 1)..m {
            vk[i - k] = r[(i, k)];
        }
        let vnorm2: f64 = vk.iter().map(|x| x * x).sum();
        r[(k, k)] = alpha;
        for i in (k + 1)..m {
            r[(i, k)] = 0.0;
        }
        if vnorm2 == 0.0 {
            continue;
        }
        for j in (k + 1)..n {
            let mut dot = 0.0;
            for i in k..m {
                dot += vk[i - k] * r[(i, j)];
            }
            let f = 2.0 * dot / vnorm2;
            for i in k..m {
                r[(i, j)] -= f * vk[i - k];
            }
        }
        let mut dot = 0.0;
        for i in k..m {
            dot += vk[i - k] * y[i];
        }
        let f = 2.0 * dot / vnorm2;
        for i in k..m {
            y[i] -= f * vk[i - k];
        }
    }

    let tol = f64::EPSILON * (m as f64).sqrt() * scale * (n as f64);
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let pivot = r[(k, k)];
        if pivot.abs() <= tol {
            return Err(Error::RankDeficient { col: k, pivot });
        }
        let mut s = y[k];
        for j in (k + 1)..n {
            s -= r[(k, j)] * x[j];
        }
        x[k] = s / pivot;
    }
    Ok(x)
}

// ── Real Hessenberg eigenvalues ──────────────────────────────────────

/// Eigenvalues of a real upper-Hessenberg matrix by the Francis double-shift
/// QR iteration (EISPACK hqr lineage, eigenvalues only). Consumes `h`.
pub fn hessenberg_eigenvalues(h: &mut Mat) -> Result<Vec<Complex64>> {
    let nn = h.rows as isize;
    assert_eq!(h.rows, h.cols);
    let eps = f64::EPSILON;
    let mut out = vec![Complex64::new(0.0, 0.0); h.rows];

    let idx = |i: isize, j: isize| (i as usize, j as usize);
    let mut norm = 0.0;
    for i in 0..nn {
        for j in (i - 1).max(0)..nn {
            norm += h[idx(i, j)].abs();
        }
    }

    let mut n = nn - 1;
    let mut exshift = 0.0;
    let mut iter = 0;
    let mut total = 0;
    while n >= 0 {
        total += 1;
        if total > 60 * nn {
            return Err(Error::EigenNoConvergence { index: n as usize });
        }
        // Look for a negligible subdiagonal element.
        let mut l = n;
        while l > 0 {
            let mut s = h[idx(l - 1, l - 1)].abs() + h[idx(l, l)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[idx(l, l - 1)].abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == n {
            // One real root.
            out[n as usize] = Complex64::new(h[idx(n, n)] + exshift, 0.0);
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            // Two roots (real pair or complex conjugates).
            let w = h[idx(n, n - 1)] * h[idx(n - 1, n)];
            let p = (h[idx(n - 1, n - 1)] - h[idx(n, n)]) / 2.0;
            let q = p * p + w;
            let z = q.abs().sqrt();
            let x = h[idx(n, n)] + exshift;
            if q >= 0.0 {
                let z = if p >= 0.0 { p + z } else { p - z };
                let r0 = x + z;
                let r1 = if z != 0.0 { x - w / z } else { r0 };
                out[(n - 1) as usize] = Complex64::new(r0, 0.0);
                out[n as usize] = Complex64::new(r1, 0.0);
            } else {
                out[(n - 1) as usize] = Complex64::new(x + p, z);
                out[n as usize] = Complex64::new(x + p, -z);
            }
            n -= 2;
            iter = 0;
        } else {
            // Form shift.
            let mut x = h[idx(n, n)];
            let mut y = h[idx(n - 1, n - 1)];
            let mut w = h[idx(n, n - 1)] * h[idx(n - 1, n)];

            if iter == 10 || iter == 20 {
                // Exceptional shift.
                exshift += x;
                for i in l..=n {
                    h[idx(i, i)] -= x;
                }
                let s = h[idx(n, n - 1)].abs() + h[idx(n - 1, n - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::EigenNoConvergence { index: n as usize });
            }

            // Two consecutive small subdiagonals.
            let mut m = n - 2;
            let mut p = 0.0;
            let mut q = 0.0;
            let mut r = 0.0;
            while m >= l {
                let z = h[idx(m, m)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / h[idx(m + 1, m)] + h[idx(m, m + 1)];
                q = h[idx(m + 1, m + 1)] - z - rr - ss;
                r = h[idx(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[idx(m, m - 1)].abs() * (q.abs() + r.abs())
                    < eps
                        * (p.abs()
                            * (h[idx(m - 1, m - 1)].abs()
                                + h[idx(m, m)].abs()
                                + h[idx(m + 1, m + 1)].abs()))
                {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=n {
                h[idx(i, i - 2)] = 0.0;
                if i > m + 2 {
                    h[idx(i, i - 3)] = 0.0;
                }
            }

            // Double QR step on rows l..=n, columns m..=n.
            for k in m..=(n - 1) {
                let notlast = k != n - 1;
                if k != m {
                    p = h[idx(k, k - 1)];
                    q = h[idx(k + 1, k - 1)];
                    r = if notlast { h[idx(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                let mut s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s == 0.0 {
                    continue;
                }
                if k != m {
                    h[idx(k, k - 1)] = -s * x;
                } else if l != m {
                    h[idx(k, k - 1)] = -h[idx(k, k - 1)];
                }
                p += s;
                x = p / s;
                y = q / s;
                let z = r / s;
                q /= p;
                r /= p;

                // Row modification.
                for j in k..nn {
                    let mut pp = h[idx(k, j)] + q * h[idx(k + 1, j)];
                    if notlast {
                        pp += r * h[idx(k + 2, j)];
                        h[idx(k + 2, j)] -= pp * z;
                    }
                    h[idx(k, j)] -= pp * x;
                    h[idx(k + 1, j)] -= pp * y;
                }
                // Column modification.
                for i in 0..=n.min(k + 3) {
                    let mut pp = x * h[idx(i, k)] + y * h[idx(i, k + 1)];
                    if notlast {
                        pp += z * h[idx(i, k + 2)];
                        h[idx(i, k + 2)] -= pp * r;
                    }
                    h[idx(i, k)] -= pp;
                    h[idx(i, k + 1)] -= pp * q;
                }
            }
        }
    }
    Ok(out)
}

// ── Complex matrices ─────────────────────────────────────────────────

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Complex64,
    ) -> Self {
        let mut m = CMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn matmul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows);
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.norm()))
    }

    /// `max |self - I|` entrywise.
    pub fn max_abs_minus_identity(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let target = if i == j { 1.0 } else { 0.0 };
                m = m.max((self[(i, j)] - target).norm());
            }
        }
        m
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Solves `a x = b` for square complex `a` by Gaussian elimination with
/// partial pivoting.
pub fn complex_solve(a: &CMat, b: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = a.rows;
    assert_eq!(a.cols, n);
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    let mut work = a.clone();
    let mut x = b.to_vec();
    for col in 0..n {
        let mut pivot = col;
        for row in (col + 1)..n {
            if work[(row, col)].norm() > work[(pivot, col)].norm() {
                pivot = row;
            }
        }
        if work[(pivot, col)].norm() == 0.0 {
            return Err(Error::RankDeficient { col, pivot: 0.0 });
        }
        if pivot != col {
            for j in col..n {
                let t = work[(col, j)];
                work[(col, j)] = work[(pivot, j)];
                work[(pivot, j)] = t;
            }
            x.swap(col, pivot);
        }
        for row in (col + 1)..n {
            let f = work[(row, col)] / work[(col, col)];
            if f.norm() == 0.0 {
                continue;
            }
            for j in (col + 1)..n {
                let w = work[(col, j)];
                work[(row, j)] -= f * w;
            }
            let t = x[col];
            x[row] -= f * t;
        }
    }
    for col in (0..n).rev() {
        let mut s = x[col];
        for j in (col + 1)..n {
            s -= work[(col, j)] * x[j];
        }
        x[col] = s / work[(col, col)];
    }
    Ok(x)
}

/// Eigendecomposition of a Hermitian matrix via the real symmetric embedding
/// `[[Re, -Im], [Im, Re]]`, whose spectrum is that of `h` doubled.
///
/// Returns eigenvalues in ascending order (each listed once) with unit
/// eigenvectors as columns.
pub fn hermitian_eigen(h: &CMat) -> Result<(Vec<f64>, CMat)> {
    assert_eq!(h.rows, h.cols);
    let d = h.rows;
    let mut embed = Mat::zeros(2 * d, 2 * d);
    for i in 0..d {
        for j in 0..d {
            let v = h[(i, j)];
            embed[(i, j)] = v.re;
            embed[(i + d, j + d)] = v.re;
            embed[(i, j + d)] = -v.im;
            embed[(i + d, j)] = v.im;
        }
    }
    let (vals, z) = sym_eigen(&embed)?;
    // Eigenvalues come in duplicated adjacent pairs; keep one per pair.
    let mut out_vals = Vec::with_capacity(d);
    let mut out_vecs = CMat::zeros(d, d);
    for t in 0..d {
        out_vals.push(0.5 * (vals[2 * t] + vals[2 * t + 1]));
        let mut norm = 0.0;
        for i in 0..d {
            let re = z[(i, 2 * t)];
            let im = z[(i + d, 2 * t)];
            norm += re * re + im * im;
        }
        let norm = norm.sqrt();
        for i in 0..d {
            out_vecs[(i, t)] = Complex64::new(z[(i, 2 * t)], z[(i + d, 2 * t)]) / norm;
        }
    }
    Ok((out_vals, out_vecs))
}

/// Singular values of a complex matrix (rows >= cols), ascending, via the
/// Hermitian eigenvalues of `a* a`.
pub fn complex_singular_values(a: &CMat) -> Result<Vec<f64>> {
    let gram = a.adjoint().matmul(a);
    let (vals, _) = hermitian_eigen(&gram)?;
    Ok(vals.iter().map(|&v| v.max(0.0).sqrt()).collect())
}
