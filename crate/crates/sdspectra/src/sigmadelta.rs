//! First-order and greedy r-th order Sigma-Delta quantizers with exact
//! state-equation verification.
//!
//! The defining identity is `D^r u = y - q`: the state `u` absorbs the
//! quantization error through the r-th difference. The greedy multilevel
//! scheme keeps `||u||_inf <= delta/2` whenever the alphabet reaches
//! `||y||_inf + 2^{r-1} delta` (one-line induction on the nearest-level
//! error).

use crate::diffmat::{apply_d_pow, binom};
use crate::error::{Error, Result};

/// Quantization alphabet: one-bit `{-1, +1}` or the midrise multilevel set
/// `{+-(2k-1) delta/2 : k = 1..L}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alphabet {
    OneBit,
    Midrise { delta: f64, levels: usize },
}

impl Alphabet {
    pub fn one_bit() -> Self {
        Alphabet::OneBit
    }

    pub fn midrise(delta: f64, levels: usize) -> Result<Self> {
        if !(delta > 0.0) || levels < 1 {
            return Err(Error::Config(format!(
                "midrise alphabet needs delta > 0 and levels >= 1, got ({delta}, {levels})"
            )));
        }
        Ok(Alphabet::Midrise { delta, levels })
    }

    /// Level spacing; one-bit is midrise with `delta = 2`, `L = 1`.
    pub fn delta(&self) -> f64 {
        match self {
            Alphabet::OneBit => 2.0,
            Alphabet::Midrise { delta, .. } => *delta,
        }
    }

    pub fn levels(&self) -> usize {
        match self {
            Alphabet::OneBit => 1,
            Alphabet::Midrise { levels, .. } => *levels,
        }
    }

    /// Largest representable level `(2L-1) delta / 2`.
    pub fn max_level(&self) -> f64 {
        (2.0 * self.levels() as f64 - 1.0) * self.delta() / 2.0
    }

    /// Bits per stored symbol: `ceil(log2 |A|)` with `|A| = 2L`.
    pub fn bits_per_symbol(&self) -> u32 {
        (2 * self.levels() as u64).next_power_of_two().trailing_zeros()
    }

    /// Nearest alphabet element, ties away from zero (`sign(0) = +1`).
    pub fn nearest(&self, x: f64) -> f64 {
        match self {
            Alphabet::OneBit => {
                if x >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
            Alphabet::Midrise { delta, levels } => {
                let t = x / delta;
                let max_u = *levels as f64 - 0.5;
                let u = if t > 0.0 {
                    (t - 0.5).round() + 0.5
                } else if t < 0.0 {
                    (t + 0.5).round() - 0.5
                } else {
                    0.5
                };
                u.clamp(-max_u, max_u) * delta
            }
        }
    }

    /// Integerized symbol `2q/delta` (odd for every alphabet element).
    pub fn symbol_index(&self, q: f64) -> Result<i64> {
        let t = 2.0 * q / self.delta();
        let rounded = t.round();
        if (t - rounded).abs() > 1e-9
            || rounded.abs() > (2 * self.levels() - 1) as f64
            || (rounded as i64).rem_euclid(2) == 0
        {
            return Err(Error::NotAlphabetElement(q));
        }
        Ok(rounded as i64)
    }

    /// Greedy-stability sufficiency: `max_level >= ||y||_inf + 2^{r-1} delta`.
    pub fn sufficient_for(&self, y_inf: f64, r: usize) -> bool {
        self.max_level() >= y_inf + 2f64.powi(r as i32 - 1) * self.delta()
    }
}

/// Output of one quantization pass: `q` over the alphabet and the state `u`
/// with `D^r u = y - q` holding identically.
#[derive(Debug, Clone)]
pub struct QuantizationRun {
    pub y: Vec<f64>,
    pub r: usize,
    pub q: Vec<f64>,
    pub u: Vec<f64>,
    pub alphabet: Alphabet,
    /// Whether a stability bound `||u||_inf <= delta/2` is guaranteed for
    /// this input (alphabet sufficiency, or the classical first-order
    /// one-bit condition `||y||_inf <= 1`).
    pub stability_guaranteed: bool,
}

impl QuantizationRun {
    pub fn u_inf(&self) -> f64 {
        self.u.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// CSV with columns `(i, y, q, u)`.
    pub fn csv_string(&self) -> String {
        let mut s = String::from("i,y,q,u\n");
        for i in 0..self.y.len() {
            s.push_str(&format!("{},{},{},{}\n", i + 1, self.y[i], self.q[i], self.u[i]));
        }
        s
    }
}

/// First-order one-bit quantizer:
/// `q_i = sign(y_i + u_{i-1})`, `u_i = y_i + u_{i-1} - q_i`, `u_0 = 0`,
/// with `sign(0) = +1`.
pub fn quantize_order1(y: &[f64]) -> QuantizationRun {
    let alphabet = Alphabet::OneBit;
    let mut q = Vec::with_capacity(y.len());
    let mut u = Vec::with_capacity(y.len());
    let mut prev = 0.0;
    for &yi in y {
        let h = yi + prev;
        let qi = alphabet.nearest(h);
        let ui = h - qi;
        q.push(qi);
        u.push(ui);
        prev = ui;
    }
    let y_inf = y.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    QuantizationRun {
        y: y.to_vec(),
        r: 1,
        q,
        u,
        alphabet,
        stability_guaranteed: y_inf <= 1.0,
    }
}

/// Greedy r-th order quantizer:
/// `h_i = y_i + sum_{k=1}^{r} (-1)^{k+1} binom(r,k) u_{i-k}` (`u_{<=0} = 0`),
/// `q_i = nearest(h_i)`, `u_i = h_i - q_i`.
///
/// A midrise alphabet failing the sufficiency precondition is rejected
/// before running. The one-bit alphabet is allowed at any r; for r >= 2 the
/// run is flagged unstable-unverified.
pub fn quantize_order_r(y: &[f64], r: usize, alphabet: Alphabet) -> Result<QuantizationRun> {
    if r < 1 {
        return Err(Error::Config("order r must be >= 1".into()));
    }
    let y_inf = y.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let sufficient = alphabet.sufficient_for(y_inf, r);
    if let Alphabet::Midrise { .. } = alphabet {
        if !sufficient {
            return Err(Error::AlphabetInsufficient {
                max_level: alphabet.max_level(),
                required: y_inf + 2f64.powi(r as i32 - 1) * alphabet.delta(),
            });
        }
    }
    let stability_guaranteed =
        sufficient || (alphabet == Alphabet::OneBit && r == 1 && y_inf <= 1.0);

    let weights: Vec<f64> = (1..=r)
        .map(|k| {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            sign * binom(r as u64, k as u64) as f64
        })
        .collect();
    let mut q = Vec::with_capacity(y.len());
    let mut u = Vec::with_capacity(y.len());
    for (i, &yi) in y.iter().enumerate() {
        let mut h = yi;
        for (k, w) in weights.iter().enumerate() {
            if i > k {
                h += w * u[i - 1 - k];
            }
        }
        let qi = alphabet.nearest(h);
        q.push(qi);
        u.push(h - qi);
    }
    Ok(QuantizationRun { y: y.to_vec(), r, q, u, alphabet, stability_guaranteed })
}

/// Recomputed state-equation residual and state bound for a finished run.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RunReport {
    pub max_state_residual: f64,
    pub u_inf: f64,
    pub state_equation_ok: bool,
    pub stable: bool,
}

/// Recomputes `D^r u - (y - q)` entrywise.
pub fn verify_run(run: &QuantizationRun) -> RunReport {
    let dru = apply_d_pow(&run.u, run.r);
    let y_inf = run.y.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut worst = 0.0f64;
    for i in 0..run.y.len() {
        worst = worst.max((dru[i] - (run.y[i] - run.q[i])).abs());
    }
    let u_inf = run.u_inf();
    RunReport {
        max_state_residual: worst,
        u_inf,
        state_equation_ok: worst <= 1e-12 * (1.0 + y_inf),
        stable: u_inf <= run.alphabet.delta() / 2.0 + 1e-12,
    }
}
