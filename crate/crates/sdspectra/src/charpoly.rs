//! Characteristic polynomial `p(x) = (1-x)^{2r} - (-1)^r lambda x^r` of the
//! eigenvector recurrence, its `2r` closed-form roots, and verifiers for the
//! root properties (inverse/conjugate pairing, unimodular pair, realness,
//! separation bounds).

use num_complex::Complex64;

use crate::dense::{hessenberg_eigenvalues, Mat};
use crate::diffmat::binom;
use crate::error::{Error, Result};

/// `1 + sqrt(2)`; all root moduli lie in `[bound^-2, bound^2]` and every
/// root sits within `bound * lambda^(1/2r)` of 1.
pub fn modulus_bound() -> f64 {
    1.0 + std::f64::consts::SQRT_2
}

/// One root of the characteristic polynomial, tagged by its branch labels:
/// `k` indexes the r-th root of unity in the quadratic factor, `ell` the
/// sign of the square root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub k: usize,
    pub ell: u8,
    pub value: Complex64,
}

/// The `2r` roots for one eigenvalue `lambda`, with magnitude ordering.
#[derive(Debug, Clone)]
pub struct RootSet {
    pub lambda: f64,
    pub r: usize,
    /// Roots in `(k, ell)` order: index `2k + ell`.
    pub roots: Vec<Root>,
    /// Permutation of root indices sorted by ascending modulus; positions
    /// `r-1` and `r` (0-based) hold the two unimodular roots.
    pub magnitude_order: Vec<usize>,
    pub min_pairwise_distance: f64,
    /// Cleared when the minimum pairwise distance drops below 1e-8, so
    /// downstream boundary solves can react to conditioning.
    pub well_separated: bool,
}

impl RootSet {
    pub fn root(&self, k: usize, ell: u8) -> Complex64 {
        self.roots[2 * k + ell as usize].value
    }

    /// Root at magnitude position `pos` (0-based, ascending modulus).
    pub fn by_magnitude(&self, pos: usize) -> &Root {
        &self.roots[self.magnitude_order[pos]]
    }

    pub fn lambda_root_2r(&self) -> f64 {
        self.lambda.powf(1.0 / (2.0 * self.r as f64))
    }

    /// JSON array of `{k, ell, re, im, abs, class}`.
    pub fn json_string(&self) -> String {
        let mut s = String::from("[");
        for (t, root) in self.roots.iter().enumerate() {
            if t > 0 {
                s.push(',');
            }
            let m = root.value.norm();
            let class = if (m - 1.0).abs() <= 1e-10 {
                "unimodular"
            } else if m > 1.0 {
                "expanding"
            } else {
                "contracting"
            };
            s.push_str(&format!(
                "{{\"k\":{},\"ell\":{},\"re\":{},\"im\":{},\"abs\":{},\"class\":\"{}\"}}",
                root.k, root.ell, root.value.re, root.value.im, m, class
            ));
        }
        s.push(']');
        s
    }
}

/// Direct evaluation `(1-x)^{2r} - (-1)^r lambda x^r`.
pub fn eval_p(x: Complex64, lambda: f64, r: usize) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
    (one - x).powi(2 * r as i32) - sign * lambda * x.powi(r as i32)
}

/// Product-form evaluation over the quadratic factors,
/// `prod_k ((1-x)^2 + lambda^{1/r} e^{2 pi i k / r} x)`.
///
/// This equals `p(x)` identically; the variant with both signs negated
/// inside each factor is `(-1)^r p(x)` and has the same roots.
pub fn eval_p_factored(x: Complex64, lambda: f64, r: usize) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let lam_r = lambda.powf(1.0 / r as f64);
    let mut acc = Complex64::new(1.0, 0.0);
    for k in 0..r {
        let phase = 2.0 * std::f64::consts::PI * k as f64 / r as f64;
        let w = lam_r * Complex64::new(phase.cos(), phase.sin());
        acc *= (one - x) * (one - x) + w * x;
    }
    acc
}

/// The `2r` closed-form roots with principal-branch square roots.
///
/// `lambda` must lie in `[1e-300, 4^r (1 - 1e-12)]`; at the upper edge the
/// `k = 0` quadratic degenerates to a double root at -1.
pub fn roots_for(lambda: f64, r: usize) -> Result<RootSet> {
    let cap = 4f64.powi(r as i32) * (1.0 - 1e-12);
    if !(1e-300..=cap).contains(&lambda) {
        return Err(Error::LambdaOutOfRange { lambda, r });
    }
    let lam_r = lambda.powf(1.0 / r as f64);
    let mut roots = Vec::with_capacity(2 * r);
    for k in 0..r {
        let phase = 2.0 * std::f64::consts::PI * k as f64 / r as f64;
        let w = lam_r * Complex64::new(phase.cos(), phase.sin());
        let disc = (w * w - 4.0 * w).sqrt();
        let two = Complex64::new(2.0, 0.0);
        roots.push(Root { k, ell: 0, value: (two - w + disc) / 2.0 });
        roots.push(Root { k, ell: 1, value: (two - w - disc) / 2.0 });
    }

    let mut order: Vec<usize> = (0..2 * r).collect();
    order.sort_by(|&a, &b| {
        roots[a]
            .value
            .norm()
            .partial_cmp(&roots[b].value.norm())
            .unwrap()
    });

    let mut min_dist = f64::INFINITY;
    for a in 0..2 * r {
        for b in (a + 1)..2 * r {
            min_dist = min_dist.min((roots[a].value - roots[b].value).norm());
        }
    }

    Ok(RootSet {
        lambda,
        r,
        roots,
        magnitude_order: order,
        min_pairwise_distance: min_dist,
        well_separated: min_dist >= 1e-8,
    })
}

/// Modulus class of a root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum ModulusClass {
    Unimodular,
    Expanding,
    Contracting,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct RootClass {
    pub k: usize,
    pub ell: u8,
    pub is_real: bool,
    pub modulus: ModulusClass,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ClassificationReport {
    pub lambda: f64,
    pub r: usize,
    pub classes: Vec<RootClass>,
    pub real_count: usize,
    pub unimodular_count: usize,
}

/// Tags each root real/complex and unimodular/expanding/contracting, and
/// checks the structural facts: real roots occur exactly when `r` is even
/// and `k = r/2`; exactly the two `k = 0` roots are unimodular, all other
/// moduli differ from 1 by more than 1e-12.
pub fn classify(set: &RootSet) -> Result<ClassificationReport> {
    let r = set.r;
    let mut classes = Vec::with_capacity(2 * r);
    let mut real_count = 0;
    let mut unimodular_count = 0;
    for root in &set.roots {
        let m = root.value.norm();
        let is_real = root.value.im.abs() <= 1e-10 * (1.0 + m);
        let modulus = if (m - 1.0).abs() <= 1e-10 {
            ModulusClass::Unimodular
        } else if m > 1.0 {
            ModulusClass::Expanding
        } else {
            ModulusClass::Contracting
        };

        let should_be_real = r % 2 == 0 && root.k == r / 2;
        if is_real != should_be_real {
            return Err(Error::Precondition(format!(
                "root (k={}, ell={}) realness contradicts r={} (is_real={is_real})",
                root.k, root.ell, r
            )));
        }
        if (modulus == ModulusClass::Unimodular) != (root.k == 0) {
            return Err(Error::Precondition(format!(
                "root (k={}, ell={}) |rho| = {m} contradicts the k=0 unimodular pair",
                root.k, root.ell
            )));
        }
        if root.k != 0 && (m - 1.0).abs() <= 1e-12 {
            return Err(Error::Precondition(format!(
                "root (k={}, ell={}) modulus within 1e-12 of 1",
                root.k, root.ell
            )));
        }

        if is_real {
            real_count += 1;
        }
        if modulus == ModulusClass::Unimodular {
            unimodular_count += 1;
        }
        classes.push(RootClass { k: root.k, ell: root.ell, is_real, modulus });
    }
    if unimodular_count != 2 {
        return Err(Error::Precondition(format!(
            "expected exactly 2 unimodular roots, found {unimodular_count}"
        )));
    }
    Ok(ClassificationReport { lambda: set.lambda, r, classes, real_count, unimodular_count })
}

/// Pairwise-distance statistics, normalized by `lambda^(1/2r)`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SeparationStats {
    pub lambda: f64,
    pub r: usize,
    pub min_pairwise: f64,
    pub max_pairwise: f64,
    pub min_pairwise_normalized: f64,
    pub max_pairwise_normalized: f64,
    /// `min | |rho| - |rho'| | / lambda^(1/2r)` over pairs that are not
    /// conjugates, inverses, or conjugate inverses of each other (the pairs
    /// excluded from the modulus-gap bound).
    pub min_modulus_gap_normalized: f64,
    /// All pairwise distances obey `2 (1+sqrt 2) lambda^(1/2r)`.
    pub upper_bound_ok: bool,
}

pub fn separation_stats(set: &RootSet) -> SeparationStats {
    let scale = set.lambda_root_2r();
    let n = set.roots.len();
    let mut min_pair = f64::INFINITY;
    let mut max_pair = 0.0f64;
    let mut min_gap = f64::INFINITY;
    for a in 0..n {
        for b in (a + 1)..n {
            let ra = set.roots[a].value;
            let rb = set.roots[b].value;
            let dist = (ra - rb).norm();
            min_pair = min_pair.min(dist);
            max_pair = max_pair.max(dist);

            let tol = 1e-9 * (1.0 + ra.norm());
            let paired = (ra - rb.conj()).norm() <= tol
                || (ra * rb - 1.0).norm() <= tol
                || (ra * rb.conj() - 1.0).norm() <= tol;
            if !paired {
                min_gap = min_gap.min((ra.norm() - rb.norm()).abs());
            }
        }
    }
    let upper = 2.0 * modulus_bound() * scale;
    SeparationStats {
        lambda: set.lambda,
        r: set.r,
        min_pairwise: min_pair,
        max_pairwise: max_pair,
        min_pairwise_normalized: min_pair / scale,
        max_pairwise_normalized: max_pair / scale,
        min_modulus_gap_normalized: if min_gap.is_finite() { min_gap / scale } else { f64::NAN },
        upper_bound_ok: max_pair <= upper * (1.0 + 1e-12),
    }
}

/// Independent root oracle: eigenvalues of the companion matrix of the
/// monic `p(x)`.
pub fn companion_roots(lambda: f64, r: usize) -> Result<Vec<Complex64>> {
    let deg = 2 * r;
    // p(x) = sum_k binom(2r,k) (-x)^k - (-1)^r lambda x^r, monic in x^{2r}.
    let mut coeff = vec![0.0f64; deg + 1];
    for (k, c) in coeff.iter_mut().enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        *c = sign * binom(deg as u64, k as u64) as f64;
    }
    let sign_r = if r % 2 == 0 { 1.0 } else { -1.0 };
    coeff[r] -= sign_r * lambda;

    let mut h = Mat::zeros(deg, deg);
    for j in 0..deg {
        h[(0, j)] = -coeff[deg - 1 - j];
    }
    for i in 1..deg {
        h[(i, i - 1)] = 1.0;
    }
    hessenberg_eigenvalues(&mut h)
}

/// Symmetric Hausdorff distance between two root multisets.
pub fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let one_sided = |xs: &[Complex64], ys: &[Complex64]| {
        xs.iter()
            .map(|x| ys.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0f64, f64::max)
    };
    one_sided(a, b).max(one_sided(b, a))
}

/// Max residual `|p(rho)| / (1 + |rho|)^{2r}` over the set.
pub fn max_root_residual(set: &RootSet) -> f64 {
    set.roots
        .iter()
        .map(|root| {
            eval_p(root.value, set.lambda, set.r).norm()
                / (1.0 + root.value.norm()).powi(2 * set.r as i32)
        })
        .fold(0.0, f64::max)
}
