//! Closed-form Vandermonde inversion through the explicit factor inverses
//! `A^{-1} = U^{-1} L^{-1}`.

use num_complex::Complex64;

use crate::dense::CMat;
use crate::error::{Error, Result};

/// Minimum admissible pairwise node distance.
pub const NODE_SEPARATION: f64 = 1e-10;

/// Pairwise-distinct Vandermonde nodes `x_1 .. x_n`.
#[derive(Debug, Clone)]
pub struct VandermondeNodes {
    nodes: Vec<Complex64>,
}

impl VandermondeNodes {
    /// Validates pairwise separation (guard `1e-10`; closer nodes produce a
    /// conditioning error instead of a garbage inverse).
    pub fn new(nodes: Vec<Complex64>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Config("empty node list".into()));
        }
        let mut min_dist = f64::INFINITY;
        for i in 0..nodes.len() {
            for j in (i + 1)..nodes.len() {
                min_dist = min_dist.min((nodes[i] - nodes[j]).norm());
            }
        }
        if nodes.len() > 1 && min_dist < NODE_SEPARATION {
            return Err(Error::CoincidentNodes { min_dist, limit: NODE_SEPARATION });
        }
        Ok(VandermondeNodes { nodes })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.nodes
    }

    /// The Vandermonde matrix itself: `A_{i,j} = x_i^{j-1}`.
    pub fn matrix(&self) -> CMat {
        let n = self.len();
        CMat::from_fn(n, n, |i, j| self.nodes[i].powu(j as u32))
    }
}

/// Lower-triangular factor inverse:
/// `(L^{-1})_{i,j} = prod_{k=1, k != j}^{i} 1/(x_j - x_k)` for `i >= j`.
pub fn inv_l(nodes: &VandermondeNodes) -> CMat {
    let n = nodes.len();
    let x = nodes.as_slice();
    let mut out = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut acc = Complex64::new(1.0, 0.0);
            for k in 0..=i {
                if k != j {
                    acc /= x[j] - x[k];
                }
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Upper-triangular factor inverse in closed form:
/// `(U^{-1})_{i,j} = (-1)^{i+j} e_{j-i}(x_1 .. x_{j-1})` for `i <= j`, where
/// `e_d` is the elementary symmetric polynomial of degree `d`.
///
/// The `e_d` values are built by the incremental one-node-at-a-time update
/// rather than explicit subset sums.
pub fn inv_u(nodes: &VandermondeNodes) -> CMat {
    let n = nodes.len();
    let x = nodes.as_slice();
    let mut out = CMat::zeros(n, n);
    // elem[d] = e_d of the nodes folded in so far.
    let mut elem = vec![Complex64::new(0.0, 0.0); n + 1];
    elem[0] = Complex64::new(1.0, 0.0);
    for j in 0..n {
        // Column j+1 (1-based) uses e_* of x_1..x_j.
        for i in 0..=j {
            let d = j - i;
            let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
            out[(i, j)] = sign * elem[d];
        }
        // Fold x_{j+1} in for the next column.
        for d in (1..=j + 1).rev() {
            let prev = elem[d - 1];
            elem[d] += prev * x[j];
        }
    }
    out
}

/// `U^{-1}` from the recursive definition
/// `(U^{-1})_{i,j} = (U^{-1})_{i-1,j-1} - (U^{-1})_{i,j-1} x_{j-1}`,
/// kept as an independent route to cross-check the closed form.
pub fn inv_u_recursive(nodes: &VandermondeNodes) -> CMat {
    let n = nodes.len();
    let x = nodes.as_slice();
    let mut out = CMat::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            out[(i, j)] = if i == j {
                Complex64::new(1.0, 0.0)
            } else if j == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                let above = if i == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    out[(i - 1, j - 1)]
                };
                above - out[(i, j - 1)] * x[j - 1]
            };
        }
    }
    out
}

/// Full inverse `A^{-1} = U^{-1} L^{-1}`.
pub fn vand_inverse(nodes: &VandermondeNodes) -> CMat {
    inv_u(nodes).matmul(&inv_l(nodes))
}

/// Gaussian elimination with partial pivoting, the independent oracle for
/// `vand_inverse`.
pub fn pivoted_inverse(a: &CMat) -> Result<CMat> {
    let n = a.rows;
    let mut work = a.clone();
    let mut inv = CMat::identity(n);
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
            for j in 0..n {
                let t = work[(col, j)];
                work[(col, j)] = work[(pivot, j)];
                work[(pivot, j)] = t;
                let t = inv[(col, j)];
                inv[(col, j)] = inv[(pivot, j)];
                inv[(pivot, j)] = t;
            }
        }
        let d = work[(col, col)];
        for j in 0..n {
            work[(col, j)] /= d;
            inv[(col, j)] /= d;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = work[(row, col)];
            if f.norm() == 0.0 {
                continue;
            }
            for j in 0..n {
                let w = work[(col, j)];
                work[(row, j)] -= f * w;
                let v = inv[(col, j)];
                inv[(row, j)] -= f * v;
            }
        }
    }
    Ok(inv)
}
