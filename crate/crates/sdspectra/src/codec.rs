//! Compressed Sigma-Delta encoding: frames, random selector matrices, the
//! integer payload `R D^{-r} q`, least-squares decoding, and the
//! rate-distortion / sigma_min experiments.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dense::{complex_singular_values, qr_lstsq, CMat, Mat};
use crate::diffmat::{apply_d_inv_pow, apply_d_inv_pow_i128};
use crate::error::{Error, Result};
use crate::sigmadelta::{quantize_order_r, Alphabet, QuantizationRun};
use crate::spectral::{eigh_gram, fit_slope, SpectralDecomposition};

// ── Seed derivation ──────────────────────────────────────────────────

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic per-trial seed derivation, independent of scheduling.
pub fn mix_seed(master: u64, parts: &[u64]) -> u64 {
    let mut h = splitmix64(master);
    for &p in parts {
        h = splitmix64(h ^ splitmix64(p));
    }
    h
}

// ── Frames ───────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum FrameKind {
    SingularVector,
    Harmonic,
}

/// `N x d` full-column-rank measurement frame; rows are the measurement
/// vectors.
#[derive(Debug, Clone)]
pub struct Frame {
    pub n: usize,
    pub d: usize,
    pub kind: FrameKind,
    pub cols: Mat,
    pub row_normalized: bool,
}

impl Frame {
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: x.len() });
        }
        Ok(self.cols.matvec(x))
    }
}

/// Frame from the `d` left singular vectors of `D^r` with the smallest
/// singular values, ordered by ascending sigma.
pub fn frame_singular(decomp: &SpectralDecomposition, d: usize) -> Result<Frame> {
    let n = decomp.n;
    if d > n {
        return Err(Error::DimensionMismatch { expected: n, got: d });
    }
    let mut cols = Mat::zeros(n, d);
    for j in 0..d {
        cols.set_col(j, &decomp.u.col(n - 1 - j));
    }
    Ok(Frame { n, d, kind: FrameKind::SingularVector, cols, row_normalized: false })
}

/// Real trigonometric frame: `{cos, sin}` column pairs at the `d` lowest
/// nonzero frequencies, each column scaled to unit l2 norm. With
/// `row_normalized` every row is rescaled to unit l2 norm (the normalized-
/// rows frame model).
pub fn frame_harmonic(n: usize, d: usize, row_normalized: bool) -> Result<Frame> {
    if d > n || d == 0 {
        return Err(Error::DimensionMismatch { expected: n, got: d });
    }
    let top_freq = d / 2 + 1;
    if 2 * top_freq >= n {
        return Err(Error::Config(format!(
            "harmonic frame needs 2*(d/2+1) < n, got d={d}, n={n}"
        )));
    }
    let mut cols = Mat::zeros(n, d);
    for c in 0..d {
        let freq = (c / 2 + 1) as f64;
        for t in 0..n {
            let angle = 2.0 * std::f64::consts::PI * freq * t as f64 / n as f64;
            cols[(t, c)] = if c % 2 == 0 { angle.cos() } else { angle.sin() };
        }
    }
    for c in 0..d {
        let norm: f64 = (0..n).map(|t| cols[(t, c)] * cols[(t, c)]).sum::<f64>().sqrt();
        for t in 0..n {
            cols[(t, c)] /= norm;
        }
    }
    if row_normalized {
        for t in 0..n {
            let norm: f64 = (0..d).map(|c| cols[(t, c)] * cols[(t, c)]).sum::<f64>().sqrt();
            if norm > 0.0 {
                for c in 0..d {
                    cols[(t, c)] /= norm;
                }
            }
        }
    }
    Ok(Frame { n, d, kind: FrameKind::Harmonic, cols, row_normalized })
}

// ── Random selector ──────────────────────────────────────────────────

/// `m x N` 0/1 matrix with exactly one 1 per row, positions i.i.d. uniform
/// from a seeded generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectorMatrix {
    pub m: usize,
    pub n: usize,
    pub rows: Vec<usize>,
    pub seed: u64,
}

pub fn make_selector(m: usize, n: usize, seed: u64) -> Result<SelectorMatrix> {
    if m < 1 || n < 1 {
        return Err(Error::Config(format!("selector needs m >= 1, n >= 1, got ({m}, {n})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..m).map(|_| rng.gen_range(0..n)).collect();
    Ok(SelectorMatrix { m, n, rows, seed })
}

impl SelectorMatrix {
    /// Applies `R` to a vector: picks the selected entries.
    pub fn select(&self, v: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|&row| v[row]).collect()
    }
}

// ── Payload ──────────────────────────────────────────────────────────

/// Compressed integer payload: the selected entries of `D^{-r} q`, held as
/// integerized values `t = s / (delta/2)` with bit accounting.
///
/// Entry width is `ceil(r log2 N) + 1` bits. Every alphabet element is an
/// odd multiple of `delta/2`, which pins the parity of each `t_i` to that
/// of `binom(row_i + r - 1, r)` (1-based rows); entries are stored as the
/// parity-compressed two's-complement value `(t - parity)/2`. For the
/// one-bit alphabet this realizes exactly the `m (r log2 N + 1)`-bit budget.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedPayload {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub selector_seed: u64,
    pub delta: f64,
    pub levels: usize,
    /// Integerized selected entries `t_i = s_i / (delta/2)`.
    pub entries: Vec<i128>,
    /// Payload bits, excluding the 32-byte header.
    pub bit_count: u64,
}

/// `ceil(r * log2 n)` via exact integer arithmetic on `n^r`.
fn magnitude_bits(n: usize, r: usize) -> u32 {
    let pow = (n as u128).pow(r as u32);
    if pow.is_power_of_two() {
        pow.trailing_zeros()
    } else {
        128 - pow.leading_zeros()
    }
}

/// Parity of `t_i` for 0-based selector row: `binom(row + r, r) mod 2`
/// (hockey stick over the odd alphabet symbols). Lucas' theorem:
/// `binom(a,b)` is odd iff `b & (a-b) == 0`.
fn entry_parity(row0: usize, r: usize) -> i128 {
    let a = (row0 + r) as u64;
    let b = r as u64;
    if b & (a - b) == 0 {
        1
    } else {
        0
    }
}

impl EncodedPayload {
    /// Selected entries of `D^{-r} q` as reals: `s_i = t_i * delta / 2`.
    pub fn s_values(&self) -> Vec<f64> {
        self.entries.iter().map(|&t| t as f64 * self.delta / 2.0).collect()
    }

    pub fn entry_bits(&self) -> u32 {
        magnitude_bits(self.n, self.r) + 1
    }

    /// Fixed preamble size in bits, reported separately from the payload
    /// budget `bit_count`.
    pub const HEADER_BITS: u64 = 256;

    /// Bit-exact serialization: a 32-byte header `(m, n, r, levels: u32;
    /// seed: u64; delta: f64)` followed by the packed parity-compressed
    /// entries, little-endian bit order.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&(self.m as u32).to_le_bytes());
        out.extend_from_slice(&(self.n as u32).to_le_bytes());
        out.extend_from_slice(&(self.r as u32).to_le_bytes());
        out.extend_from_slice(&(self.levels as u32).to_le_bytes());
        out.extend_from_slice(&self.selector_seed.to_le_bytes());
        out.extend_from_slice(&self.delta.to_le_bytes());

        let width = self.entry_bits() as usize;
        let sel = make_selector(self.m, self.n, self.selector_seed).expect("valid selector");
        let mut bits = vec![0u8; (self.m * width).div_ceil(8)];
        for (i, &t) in self.entries.iter().enumerate() {
            let parity = entry_parity(sel.rows[i], self.r);
            let code = (t - parity) / 2;
            let field = (code as u128) & (u128::MAX >> (128 - width));
            for b in 0..width {
                if (field >> b) & 1 == 1 {
                    let pos = i * width + b;
                    bits[pos / 8] |= 1 << (pos % 8);
                }
            }
        }
        out.extend_from_slice(&bits);
        out
    }

    /// Parses a serialized payload, regenerating the selector from the seed.
    pub fn from_bytes(bytes: &[u8]) -> Result<EncodedPayload> {
        if bytes.len() < 32 {
            return Err(Error::InvalidPayload("header truncated".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
        let m = u32_at(0);
        let n = u32_at(4);
        let r = u32_at(8);
        let levels = u32_at(12);
        let seed = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
        let delta = f64::from_le_bytes(bytes[24..32].try_into().unwrap());
        if m == 0 || n == 0 || r == 0 || levels == 0 || !(delta > 0.0) {
            return Err(Error::InvalidPayload("bad header fields".into()));
        }
        let width = (magnitude_bits(n, r) + 1) as usize;
        if bytes.len() != 32 + (m * width).div_ceil(8) {
            return Err(Error::InvalidPayload(format!(
                "expected {} payload bytes, got {}",
                32 + (m * width).div_ceil(8),
                bytes.len() - 32
            )));
        }
        let sel = make_selector(m, n, seed)?;
        let body = &bytes[32..];
        let mut entries = Vec::with_capacity(m);
        for i in 0..m {
            let mut field = 0u128;
            for b in 0..width {
                let pos = i * width + b;
                if (body[pos / 8] >> (pos % 8)) & 1 == 1 {
                    field |= 1 << b;
                }
            }
            // Sign-extend the width-bit two's complement field.
            let shift = 128 - width;
            let code = ((field << shift) as i128) >> shift;
            entries.push(2 * code + entry_parity(sel.rows[i], r));
        }
        Ok(EncodedPayload {
            m,
            n,
            r,
            selector_seed: seed,
            delta,
            levels,
            entries,
            bit_count: (m * width) as u64,
        })
    }
}

/// Encodes a quantized sequence: `s = R D^{-r} q` by exact integer r-fold
/// cumulative sums of the odd symbol integers `2q/delta`.
pub fn encode(
    q: &[f64],
    r: usize,
    selector: &SelectorMatrix,
    alphabet: &Alphabet,
) -> Result<EncodedPayload> {
    let n = q.len();
    if selector.n != n {
        return Err(Error::DimensionMismatch { expected: n, got: selector.n });
    }
    let symbols: Vec<i128> = q
        .iter()
        .map(|&qi| alphabet.symbol_index(qi).map(|s| s as i128))
        .collect::<Result<_>>()?;
    let full = apply_d_inv_pow_i128(&symbols, r);
    let width = magnitude_bits(n, r) + 1;
    let cap: i128 = 1i128 << (width - 1);
    let mut entries = Vec::with_capacity(selector.m);
    for &row in &selector.rows {
        let t = full[row];
        let code = (t - entry_parity(row, r)) / 2;
        if code < -cap || code >= cap {
            return Err(Error::PayloadOverflow { value: t, bits: width });
        }
        entries.push(t);
    }
    Ok(EncodedPayload {
        m: selector.m,
        n,
        r,
        selector_seed: selector.seed,
        delta: alphabet.delta(),
        levels: alphabet.levels(),
        entries,
        bit_count: (selector.m as u64) * width as u64,
    })
}

// ── Decoding ─────────────────────────────────────────────────────────

/// The `m x d` design matrix `R D^{-r} F`.
pub fn design_matrix(frame: &Frame, selector: &SelectorMatrix, r: usize) -> Result<Mat> {
    if selector.n != frame.n {
        return Err(Error::DimensionMismatch { expected: frame.n, got: selector.n });
    }
    let mut sunk = Mat::zeros(frame.n, frame.d);
    for c in 0..frame.d {
        sunk.set_col(c, &apply_d_inv_pow(&frame.cols.col(c), r));
    }
    let mut a = Mat::zeros(selector.m, frame.d);
    for (i, &row) in selector.rows.iter().enumerate() {
        for c in 0..frame.d {
            a[(i, c)] = sunk[(row, c)];
        }
    }
    Ok(a)
}

/// Least-squares decode `x^ = (R D^{-r} F)^+ s` by orthogonal
/// factorization; the pseudoinverse is never materialized.
pub fn decode(payload: &EncodedPayload, frame: &Frame, selector: &SelectorMatrix) -> Result<Vec<f64>> {
    decode_ls(&payload.s_values(), frame, selector, payload.r)
}

pub fn decode_ls(s: &[f64], frame: &Frame, selector: &SelectorMatrix, r: usize) -> Result<Vec<f64>> {
    let a = design_matrix(frame, selector, r)?;
    qr_lstsq(&a, s)
}

/// Both sides of the reconstruction-error identity
/// `||x - x^||_2 = ||(R D^{-r} F)^+ R u||_2`.
pub fn error_identity(
    x: &[f64],
    x_hat: &[f64],
    run: &QuantizationRun,
    frame: &Frame,
    selector: &SelectorMatrix,
) -> Result<(f64, f64)> {
    let lhs: f64 = x
        .iter()
        .zip(x_hat.iter())
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let ru = selector.select(&run.u);
    let w = decode_ls(&ru, frame, selector, run.r)?;
    let rhs: f64 = w.iter().map(|a| a * a).sum::<f64>().sqrt();
    Ok((lhs, rhs))
}

// ── Rate-distortion experiment ───────────────────────────────────────

/// Alphabet used by the experiments at order r: one-bit for r = 1, else the
/// smallest midrise alphabet (delta = 1) sufficient for `||y||_inf <= 1`.
pub fn experiment_alphabet(r: usize) -> Alphabet {
    if r == 1 {
        Alphabet::OneBit
    } else {
        let levels = (3 + (1usize << r)).div_ceil(2);
        Alphabet::Midrise { delta: 1.0, levels }
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct RdConfig {
    pub n_list: Vec<usize>,
    pub r_list: Vec<usize>,
    pub d: usize,
    /// `m = n / m_divisor`.
    pub m_divisor: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for RdConfig {
    fn default() -> Self {
        RdConfig {
            n_list: vec![64, 128, 256, 512, 1024],
            r_list: vec![1, 2],
            d: 2,
            m_divisor: 4,
            trials: 50,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct RdRecord {
    pub n: usize,
    pub r: usize,
    pub d: usize,
    pub m: usize,
    pub trial: usize,
    pub bits: u64,
    pub err_l2: f64,
    pub bound_rhs: f64,
}

fn sample_unit_ball(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    // Gaussian direction via Box-Muller, radius u^{1/d}.
    let mut z = Vec::with_capacity(d);
    while z.len() < d {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        let mag = (-2.0 * u1.ln()).sqrt();
        let ang = 2.0 * std::f64::consts::PI * u2;
        z.push(mag * ang.cos());
        if z.len() < d {
            z.push(mag * ang.sin());
        }
    }
    let norm: f64 = z.iter().map(|a| a * a).sum::<f64>().sqrt();
    let radius: f64 = rng.gen_range(0.0f64..1.0).powf(1.0 / d as f64);
    z.iter().map(|a| a / norm * radius).collect()
}

/// Runs the full sweep. Trials within one `(n, r)` point run in parallel;
/// determinism comes from per-trial seed derivation, not scheduling.
pub fn rate_distortion_experiment(config: &RdConfig) -> Result<Vec<RdRecord>> {
    validate_rd_config(config)?;
    let mut out = Vec::new();
    for &n in &config.n_list {
        for &r in &config.r_list {
            let decomp = eigh_gram(n, r)?;
            let frame = frame_singular(&decomp, config.d)?;
            let m = n / config.m_divisor;
            let alphabet = experiment_alphabet(r);
            let records: Result<Vec<RdRecord>> = (0..config.trials)
                .into_par_iter()
                .map(|trial| {
                    rd_trial(config, &frame, n, r, m, alphabet, trial)
                })
                .collect();
            out.extend(records?);
        }
    }
    Ok(out)
}

fn rd_trial(
    config: &RdConfig,
    frame: &Frame,
    n: usize,
    r: usize,
    m: usize,
    alphabet: Alphabet,
    trial: usize,
) -> Result<RdRecord> {
    let seed_t = mix_seed(config.seed, &[n as u64, r as u64, trial as u64]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed_t);
    let x = sample_unit_ball(config.d, &mut rng);
    let y = frame.apply(&x)?;
    let run = quantize_order_r(&y, r, alphabet)?;
    let selector = make_selector(m, n, mix_seed(seed_t, &[0xC0DE]))?;
    let payload = encode(&run.q, r, &selector, &alphabet)?;
    let x_hat = decode(&payload, frame, &selector)?;
    let (err, rhs) = error_identity(&x, &x_hat, &run, frame, &selector)?;
    Ok(RdRecord {
        n,
        r,
        d: config.d,
        m,
        trial,
        bits: payload.bit_count,
        err_l2: err,
        bound_rhs: rhs,
    })
}

fn validate_rd_config(config: &RdConfig) -> Result<()> {
    if config.n_list.is_empty() || config.r_list.is_empty() {
        return Err(Error::Config("empty n or r list".into()));
    }
    if config.m_divisor == 0 || config.trials == 0 || config.d == 0 {
        return Err(Error::Config("d, m_divisor, trials must be positive".into()));
    }
    for &n in &config.n_list {
        if n / config.m_divisor < config.d {
            return Err(Error::Config(format!(
                "m = {}/{} leaves fewer rows than d = {}",
                n, config.m_divisor, config.d
            )));
        }
    }
    Ok(())
}

/// Experiment output CSV: `N,r,d,m,trial,bits,err_l2,bound_rhs`.
pub fn rd_csv(records: &[RdRecord]) -> String {
    let mut s = String::from("N,r,d,m,trial,bits,err_l2,bound_rhs\n");
    for rec in records {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            rec.n, rec.r, rec.d, rec.m, rec.trial, rec.bits, rec.err_l2, rec.bound_rhs
        ));
    }
    s
}

pub fn median(values: &mut Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = values.len();
    if k == 0 {
        return f64::NAN;
    }
    if k % 2 == 1 {
        values[k / 2]
    } else {
        0.5 * (values[k / 2 - 1] + values[k / 2])
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct RdSummary {
    /// `(n, r, median error)` per sweep point.
    pub medians: Vec<(usize, usize, f64)>,
    /// `(r, fitted log-log slope of median error vs N)`.
    pub slopes: Vec<(usize, f64)>,
    /// Max `| ||x - x^|| - ||A^+ R u|| |` over all records.
    pub max_identity_gap: f64,
}

pub fn summarize_rd(records: &[RdRecord]) -> RdSummary {
    let mut medians = Vec::new();
    let mut rs: Vec<usize> = records.iter().map(|rec| rec.r).collect();
    rs.sort_unstable();
    rs.dedup();
    let mut ns: Vec<usize> = records.iter().map(|rec| rec.n).collect();
    ns.sort_unstable();
    ns.dedup();
    for &r in &rs {
        for &n in &ns {
            let mut errs: Vec<f64> = records
                .iter()
                .filter(|rec| rec.r == r && rec.n == n)
                .map(|rec| rec.err_l2)
                .collect();
            if !errs.is_empty() {
                medians.push((n, r, median(&mut errs)));
            }
        }
    }
    let mut slopes = Vec::new();
    for &r in &rs {
        let pts: Vec<(f64, f64)> = medians
            .iter()
            .filter(|&&(_, rr, _)| rr == r)
            .map(|&(n, _, med)| ((n as f64).ln(), med.ln()))
            .collect();
        if pts.len() >= 2 {
            slopes.push((r, fit_slope(&pts)));
        }
    }
    let max_identity_gap = records
        .iter()
        .map(|rec| (rec.err_l2 - rec.bound_rhs).abs())
        .fold(0.0, f64::max);
    RdSummary { medians, slopes, max_identity_gap }
}

// ── sigma_min experiment ─────────────────────────────────────────────

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SigmaMinConfig {
    pub r: usize,
    pub m: usize,
    pub ell: usize,
    pub d: usize,
    /// DFT size the selector samples from (the ambient dimension N).
    pub n_dft: usize,
    pub seeds: Vec<u64>,
}

impl Default for SigmaMinConfig {
    fn default() -> Self {
        SigmaMinConfig {
            r: 2,
            m: 512,
            ell: 32,
            d: 4,
            n_dft: 2048,
            seeds: (0..50).map(|t| mix_seed(11, &[t])).collect(),
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SigmaMinStats {
    pub config_r: usize,
    pub m: usize,
    pub ell: usize,
    pub d: usize,
    pub values: Vec<f64>,
    pub median: f64,
    pub q10: f64,
    pub q90: f64,
    /// Reference scale `sqrt(ell)`.
    pub sqrt_ell: f64,
}

/// Empirical `sigma_min(V^T R F~)` over seeds, where `V` holds the `ell`
/// least significant left singular vectors of the `m x m` `D^r` and `F~`
/// is `d` nonzero-frequency columns of the `n_dft x n_dft` DFT.
///
/// Requires the admissible range `ell <= m / pi^2`.
pub fn sigma_min_check(config: &SigmaMinConfig) -> Result<SigmaMinStats> {
    let SigmaMinConfig { r, m, ell, d, n_dft, ref seeds } = *config;
    if (ell as f64) > m as f64 / (std::f64::consts::PI * std::f64::consts::PI) {
        return Err(Error::Precondition(format!(
            "ell = {ell} outside the admissible range ell <= m/pi^2 = {:.2}",
            m as f64 / (std::f64::consts::PI * std::f64::consts::PI)
        )));
    }
    if d > ell {
        return Err(Error::Config(format!("need d <= ell, got d={d}, ell={ell}")));
    }
    if seeds.is_empty() {
        return Err(Error::Config("empty seed list".into()));
    }
    let decomp = eigh_gram(m, r)?;
    let v = frame_singular(&decomp, ell)?; // m x ell, ascending sigma

    // d nonzero-frequency columns of the n_dft-point DFT.
    let dft_col = |t: usize, c: usize| -> Complex64 {
        let angle = -2.0 * std::f64::consts::PI * (t as f64) * ((c + 1) as f64) / n_dft as f64;
        Complex64::new(angle.cos(), angle.sin())
    };

    let mut values = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let sel = make_selector(m, n_dft, seed)?;
        let mut a = CMat::zeros(ell, d);
        for s in 0..ell {
            for c in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for (t, &row) in sel.rows.iter().enumerate() {
                    acc += v.cols[(t, s)] * dft_col(row, c);
                }
                a[(s, c)] = acc;
            }
        }
        let sv = complex_singular_values(&a)?;
        values.push(sv[0]);
    }
    let mut sorted = values.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let quantile = |q: f64| sorted[((sorted.len() - 1) as f64 * q).round() as usize];
    Ok(SigmaMinStats {
        config_r: r,
        m,
        ell,
        d,
        median: {
            let mut v = values.clone();
            median(&mut v)
        },
        q10: quantile(0.1),
        q90: quantile(0.9),
        sqrt_ell: (ell as f64).sqrt(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffmat::binom;

    #[test]
    fn selector_deterministic_and_in_range() {
        let a = make_selector(100, 64, 42).unwrap();
        let b = make_selector(100, 64, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.rows.iter().all(|&row| row < 64));
        let c = make_selector(100, 64, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn selector_histogram_uniform() {
        let n = 16;
        let draws = 1_000_000;
        let sel = make_selector(draws, n, 7).unwrap();
        let mut counts = vec![0usize; n];
        for &row in &sel.rows {
            counts[row] += 1;
        }
        let p = 1.0 / n as f64;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        let expected = draws as f64 * p;
        for (bin, &c) in counts.iter().enumerate() {
            assert!(
                (c as f64 - expected).abs() <= 3.0 * sigma,
                "bin {bin}: {c} vs {expected} +- {sigma}"
            );
        }
    }

    #[test]
    fn selector_picks_entry() {
        let sel = SelectorMatrix { m: 1, n: 5, rows: vec![2], seed: 0 };
        assert_eq!(sel.select(&[10.0, 11.0, 12.0, 13.0, 14.0]), vec![12.0]);
    }

    #[test]
    fn encode_hand_examples() {
        let alphabet = Alphabet::OneBit;
        // q = (1,-1,1), r = 1, selector row 2 (1-based) -> s = 0.
        let sel = SelectorMatrix { m: 1, n: 3, rows: vec![1], seed: 0 };
        let payload = encode(&[1.0, -1.0, 1.0], 1, &sel, &alphabet).unwrap();
        assert_eq!(payload.s_values(), vec![0.0]);
        // q all ones, row N -> s = N.
        let n = 12;
        let sel = SelectorMatrix { m: 1, n, rows: vec![n - 1], seed: 0 };
        let payload = encode(&vec![1.0; n], 1, &sel, &alphabet).unwrap();
        assert_eq!(payload.s_values(), vec![n as f64]);
    }

    #[test]
    fn payload_magnitude_bound() {
        let alphabet = Alphabet::OneBit;
        let n = 128;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for r in 1..=3usize {
            let cap = binom((n + r - 1) as u64, r as u64);
            for trial in 0..100 {
                let q: Vec<f64> =
                    (0..n).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
                let sel = make_selector(16, n, trial).unwrap();
                let payload = encode(&q, r, &sel, &alphabet).unwrap();
                for &t in &payload.entries {
                    assert!(t.abs() <= cap, "r={r}: |{t}| > {cap}");
                }
            }
        }
    }

    #[test]
    fn bit_accounting_power_of_two() {
        let alphabet = Alphabet::OneBit;
        for (n, r) in [(64usize, 1usize), (128, 2), (256, 3)] {
            let q: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
            let m = n / 4;
            let sel = make_selector(m, n, 3).unwrap();
            let payload = encode(&q, r, &sel, &alphabet).unwrap();
            let log2n = (n as f64).log2().round() as u64;
            assert_eq!(payload.bit_count, m as u64 * (r as u64 * log2n + 1));
        }
    }

    #[test]
    fn payload_bytes_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for r in 1..=3usize {
            let n = 96; // not a power of two
            let q: Vec<f64> =
                (0..n).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
            let sel = make_selector(24, n, 17).unwrap();
            let payload = encode(&q, r, &sel, &Alphabet::OneBit).unwrap();
            let bytes = payload.to_bytes();
            let back = EncodedPayload::from_bytes(&bytes).unwrap();
            assert_eq!(payload, back);
            // multilevel path
            let alphabet = Alphabet::midrise(0.5, 4).unwrap();
            let qm: Vec<f64> = (0..n)
                .map(|_| alphabet.nearest(rng.gen_range(-1.0..1.0)))
                .collect();
            let payload = encode(&qm, r, &sel, &alphabet).unwrap();
            let back = EncodedPayload::from_bytes(&payload.to_bytes()).unwrap();
            assert_eq!(payload, back);
        }
    }

    #[test]
    fn frame_singular_columns() {
        let decomp = eigh_gram(48, 2).unwrap();
        let frame = frame_singular(&decomp, 4).unwrap();
        // orthonormal columns
        let g = frame.cols.transpose().matmul(&frame.cols);
        for i in 0..4 {
            for j in 0..4 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((g[(i, j)] - target).abs() < 1e-8);
            }
        }
        // d = 1 column equals u_N
        let f1 = frame_singular(&decomp, 1).unwrap();
        let un = decomp.u.col(47);
        for i in 0..48 {
            assert_eq!(f1.cols[(i, 0)], un[i]);
        }
    }

    #[test]
    fn frame_harmonic_structure() {
        let frame = frame_harmonic(64, 4, false).unwrap();
        let g = frame.cols.transpose().matmul(&frame.cols);
        for i in 0..4 {
            for j in 0..4 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((g[(i, j)] - target).abs() < 1e-8, "({i},{j})");
            }
        }
        // constant row norms for the paired frame
        let norms: Vec<f64> = (0..64)
            .map(|t| (0..4).map(|c| frame.cols[(t, c)].powi(2)).sum::<f64>().sqrt())
            .collect();
        for w in &norms {
            assert!((w - norms[0]).abs() < 1e-10);
        }
        let rn = frame_harmonic(64, 4, true).unwrap();
        for t in 0..64 {
            let norm: f64 = (0..4).map(|c| rn.cols[(t, c)].powi(2)).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn decode_noiseless_consistency() {
        let decomp = eigh_gram(64, 1).unwrap();
        let frame = frame_singular(&decomp, 3).unwrap();
        let sel = make_selector(16, 64, 5).unwrap();
        let a = design_matrix(&frame, &sel, 1).unwrap();
        let x = vec![0.3, -0.5, 0.2];
        let s = a.matvec(&x);
        let x_hat = decode_ls(&s, &frame, &sel, 1).unwrap();
        for k in 0..3 {
            assert!((x_hat[k] - x[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn error_identity_holds() {
        let decomp = eigh_gram(256, 1).unwrap();
        let frame = frame_singular(&decomp, 2).unwrap();
        let sel = make_selector(64, 256, 21).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = sample_unit_ball(2, &mut rng);
        let y = frame.apply(&x).unwrap();
        let run = quantize_order_r(&y, 1, Alphabet::OneBit).unwrap();
        let payload = encode(&run.q, 1, &sel, &Alphabet::OneBit).unwrap();
        let x_hat = decode(&payload, &frame, &sel).unwrap();
        let (lhs, rhs) = error_identity(&x, &x_hat, &run, &frame, &sel).unwrap();
        assert!((lhs - rhs).abs() <= 1e-8, "identity gap {}", (lhs - rhs).abs());
        // The operator-norm form ||x - x^|| <= ||A^+|| ||R u||: sigma_min of
        // the m x d design matrix from the 2x2 eigenproblem of A^T A.
        let a = design_matrix(&frame, &sel, 1).unwrap();
        let (vals, _) = crate::dense::sym_eigen(&a.transpose().matmul(&a)).unwrap();
        let sigma_min = vals[0].max(0.0).sqrt();
        let ru = sel.select(&run.u);
        let ru_norm: f64 = ru.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(lhs <= ru_norm / sigma_min + 1e-10, "operator bound violated");
    }

    #[test]
    fn rd_experiment_smoke_and_determinism() {
        let config = RdConfig {
            n_list: vec![64, 128],
            r_list: vec![1],
            d: 2,
            m_divisor: 4,
            trials: 8,
            seed: 123,
        };
        let records = rate_distortion_experiment(&config).unwrap();
        assert_eq!(records.len(), 16);
        let again = rate_distortion_experiment(&config).unwrap();
        assert_eq!(rd_csv(&records), rd_csv(&again));
        let summary = summarize_rd(&records);
        assert!(summary.max_identity_gap <= 1e-8);
        assert_eq!(summary.medians.len(), 2);
    }

    #[test]
    fn sigma_min_rejects_out_of_range_ell() {
        let config = SigmaMinConfig { r: 1, m: 64, ell: 8, d: 2, n_dft: 256, seeds: vec![1] };
        assert!(sigma_min_check(&config).is_err()); // 8 > 64/pi^2 ~ 6.48
    }

    #[test]
    fn sigma_min_smoke() {
        let config = SigmaMinConfig {
            r: 1,
            m: 128,
            ell: 12,
            d: 3,
            n_dft: 512,
            seeds: (0..8).collect(),
        };
        let stats = sigma_min_check(&config).unwrap();
        assert_eq!(stats.values.len(), 8);
        let again = sigma_min_check(&config).unwrap();
        assert_eq!(stats.values, again.values);
        assert!(stats.median > 0.0);
    }

    #[test]
    fn mix_seed_spreads() {
        let a = mix_seed(1, &[2, 3]);
        let b = mix_seed(1, &[3, 2]);
        let c = mix_seed(2, &[2, 3]);
        assert_ne!(a, b);
        assert_ne!(a, c);
    }
}
