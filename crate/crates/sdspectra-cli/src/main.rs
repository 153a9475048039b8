//! Command-line driver: exact Gram dumps, invariant verification suites,
//! and reproducible seeded experiments with CSV/JSON outputs.
//!
//! Every output embeds a hash of the effective configuration; reruns with
//! the same config and seed are byte-identical. `SD_SPECTRA_THREADS` caps
//! the worker pool.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use sdspectra::codec::{self, mix_seed, RdConfig, SigmaMinConfig};
use sdspectra::spectral;
use sdspectra::verify;

#[derive(Parser)]
#[command(name = "sdspectra", version, about = "Difference-matrix spectra and Sigma-Delta codec experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the exact integer Gram matrix (D^r)^T D^r as CSV.
    Gram {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        /// Output path; '-' writes to stdout.
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Run a module invariant suite; nonzero exit on any failed check.
    Verify {
        /// all | diffmat | spectral | roots | recurrence | vandermonde |
        /// sigmadelta | codec
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// JSON report path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment sweep and emit CSV plus a summary JSON.
    Experiment {
        #[arg(long)]
        kind: ExperimentKind,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory.
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Dimension sweep, comma separated.
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<usize>>,
        /// Order sweep, comma separated.
        #[arg(long, value_delimiter = ',')]
        r: Option<Vec<usize>>,
        #[arg(long)]
        d: Option<usize>,
        /// Selector rows for sigma-min.
        #[arg(long)]
        m: Option<usize>,
        /// Rate-distortion selector rule m = N / m-divisor.
        #[arg(long)]
        m_divisor: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        /// Slope tolerance for the fitted-decay summaries.
        #[arg(long)]
        tol_slope_margin: Option<f64>,
        /// sigma-min threshold factor: median >= (1 - eta) sqrt(ell).
        #[arg(long)]
        tol_eta: Option<f64>,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ExperimentKind {
    RateDistortion,
    SigmaMin,
    FlatnessSweep,
    SigmaDecay,
}

// ── Config file ──────────────────────────────────────────────────────

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(default)]
struct FileConfig {
    verify: VerifySection,
    rate_distortion: Option<RdConfig>,
    sigma_min: Option<SigmaMinSection>,
    flatness: Option<FlatnessSection>,
    sigma_decay: Option<SigmaDecaySection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct VerifySection {
    seed: u64,
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection { seed: 20240901 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct SigmaMinSection {
    r: usize,
    m: usize,
    ell: usize,
    d: usize,
    n_dft: usize,
    seed: u64,
    seed_count: usize,
}

impl Default for SigmaMinSection {
    fn default() -> Self {
        SigmaMinSection { r: 2, m: 512, ell: 32, d: 4, n_dft: 2048, seed: 11, seed_count: 50 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct FlatnessSection {
    n_list: Vec<usize>,
    r: usize,
}

impl Default for FlatnessSection {
    fn default() -> Self {
        FlatnessSection { n_list: vec![128, 256, 512, 1024], r: 2 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct SigmaDecaySection {
    n: usize,
    r_list: Vec<usize>,
}

impl Default for SigmaDecaySection {
    fn default() -> Self {
        SigmaDecaySection { n: 512, r_list: vec![1, 2, 3] }
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))
        }
    }
}

fn config_hash<T: Serialize>(effective: &T) -> String {
    let canonical = serde_json::to_string(effective).expect("serializable config");
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn write_output(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}

fn main() -> Result<()> {
    if let Ok(threads) = std::env::var("SD_SPECTRA_THREADS") {
        let threads: usize = threads
            .parse()
            .context("SD_SPECTRA_THREADS must be a positive integer")?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .ok();
    }

    let cli = Cli::parse();
    match cli.command {
        Command::Gram { n, r, out } => cmd_gram(n, r, &out),
        Command::Verify { suite, config, seed, out } => cmd_verify(&suite, &config, seed, &out),
        Command::Experiment {
            kind,
            config,
            out,
            seed,
            n,
            r,
            d,
            m,
            m_divisor,
            trials,
            tol_slope_margin,
            tol_eta,
        } => {
            let overrides = Overrides {
                seed,
                n,
                r,
                d,
                m,
                m_divisor,
                trials,
                tol_slope_margin,
                tol_eta,
            };
            cmd_experiment(kind, &config, &out, overrides)
        }
    }
}

fn cmd_gram(n: usize, r: usize, out: &str) -> Result<()> {
    let gram = sdspectra::diffmat::build_gram(n, r)?;
    let csv = gram.csv_string();
    if out == "-" {
        print!("{csv}");
    } else {
        write_output(Path::new(out), &csv)?;
        eprintln!("wrote {n}x{n} Gram matrix (r = {r}) to {out}");
    }
    Ok(())
}

fn cmd_verify(
    suite: &str,
    config: &Option<PathBuf>,
    seed: Option<u64>,
    out: &Option<PathBuf>,
) -> Result<()> {
    let file = load_config(config)?;
    let seed = seed.unwrap_or(file.verify.seed);

    #[derive(Serialize)]
    struct VerifyReport {
        config_hash: String,
        suite: String,
        seed: u64,
        passed: bool,
        suites: Vec<verify::SuiteReport>,
    }

    let hash = config_hash(&(suite, seed));
    let suites = verify::suite_by_name(suite, seed)?;
    let mut all_passed = true;
    for s in &suites {
        for check in &s.checks {
            let tag = if check.passed { "PASS" } else { "FAIL" };
            let measured: Vec<String> = check
                .measured
                .iter()
                .map(|(k, v)| format!("{k}={v:.3e}"))
                .collect();
            println!("[{tag}] {}::{} {}", s.suite, check.name, measured.join(" "));
            all_passed &= check.passed;
        }
    }
    let report = VerifyReport {
        config_hash: hash,
        suite: suite.to_string(),
        seed,
        passed: all_passed,
        suites,
    };
    let json = serde_json::to_string_pretty(&report)?;
    if let Some(path) = out {
        write_output(path, &json)?;
    }
    if !all_passed {
        bail!("verification failed");
    }
    println!("verify: all checks passed");
    Ok(())
}

struct Overrides {
    seed: Option<u64>,
    n: Option<Vec<usize>>,
    r: Option<Vec<usize>>,
    d: Option<usize>,
    m: Option<usize>,
    m_divisor: Option<usize>,
    trials: Option<usize>,
    tol_slope_margin: Option<f64>,
    tol_eta: Option<f64>,
}

fn cmd_experiment(
    kind: ExperimentKind,
    config: &Option<PathBuf>,
    out: &Path,
    ov: Overrides,
) -> Result<()> {
    let file = load_config(config)?;
    match kind {
        ExperimentKind::RateDistortion => {
            let mut cfg = file.rate_distortion.unwrap_or_default();
            if let Some(s) = ov.seed {
                cfg.seed = s;
            }
            if let Some(n) = ov.n {
                cfg.n_list = n;
            }
            if let Some(r) = ov.r {
                cfg.r_list = r;
            }
            if let Some(d) = ov.d {
                cfg.d = d;
            }
            if let Some(m) = ov.m_divisor {
                cfg.m_divisor = m;
            }
            if let Some(t) = ov.trials {
                cfg.trials = t;
            }
            let margin = ov.tol_slope_margin.unwrap_or(0.3);
            run_rate_distortion(&cfg, margin, out)
        }
        ExperimentKind::SigmaMin => {
            let mut cfg = file.sigma_min.unwrap_or_default();
            if let Some(s) = ov.seed {
                cfg.seed = s;
            }
            if let Some(r) = ov.r {
                cfg.r = r[0];
            }
            if let Some(d) = ov.d {
                cfg.d = d;
            }
            if let Some(m) = ov.m {
                cfg.m = m;
            }
            if let Some(n) = ov.n {
                cfg.n_dft = n[0];
            }
            if let Some(t) = ov.trials {
                cfg.seed_count = t;
            }
            let eta = ov.tol_eta.unwrap_or(0.5);
            run_sigma_min(&cfg, eta, out)
        }
        ExperimentKind::FlatnessSweep => {
            let mut cfg = file.flatness.unwrap_or_default();
            if let Some(n) = ov.n {
                cfg.n_list = n;
            }
            if let Some(r) = ov.r {
                cfg.r = r[0];
            }
            run_flatness(&cfg, out)
        }
        ExperimentKind::SigmaDecay => {
            let mut cfg = file.sigma_decay.unwrap_or_default();
            if let Some(n) = ov.n {
                cfg.n = n[0];
            }
            if let Some(r) = ov.r {
                cfg.r_list = r;
            }
            let margin = ov.tol_slope_margin.unwrap_or(0.1);
            run_sigma_decay(&cfg, margin, out)
        }
    }
}

fn run_rate_distortion(cfg: &RdConfig, slope_margin: f64, out: &Path) -> Result<()> {
    let hash = config_hash(cfg);
    let records = codec::rate_distortion_experiment(cfg)?;
    let summary = codec::summarize_rd(&records);

    let mut csv = format!("# config_hash={hash}\n");
    csv.push_str(&codec::rd_csv(&records));
    write_output(&out.join("rate_distortion.csv"), &csv)?;

    #[derive(Serialize)]
    struct Summary<'a> {
        config_hash: String,
        config: &'a RdConfig,
        medians: &'a [(usize, usize, f64)],
        slopes: &'a [(usize, f64)],
        max_identity_gap: f64,
        slope_margin: f64,
        /// slope <= -(r - 1/2) + margin per order
        slopes_ok: bool,
    }
    let slopes_ok = summary
        .slopes
        .iter()
        .all(|&(r, s)| s <= -(r as f64 - 0.5) + slope_margin);
    let json = serde_json::to_string_pretty(&Summary {
        config_hash: hash.clone(),
        config: cfg,
        medians: &summary.medians,
        slopes: &summary.slopes,
        max_identity_gap: summary.max_identity_gap,
        slope_margin,
        slopes_ok,
    })?;
    write_output(&out.join("rate_distortion_summary.json"), &json)?;
    for (r, s) in &summary.slopes {
        println!("rate-distortion r={r}: fitted slope {s:.3}");
    }
    println!("max error-identity gap {:.3e}", summary.max_identity_gap);
    Ok(())
}

fn run_sigma_min(cfg: &SigmaMinSection, eta: f64, out: &Path) -> Result<()> {
    let hash = config_hash(cfg);
    let config = SigmaMinConfig {
        r: cfg.r,
        m: cfg.m,
        ell: cfg.ell,
        d: cfg.d,
        n_dft: cfg.n_dft,
        seeds: (0..cfg.seed_count as u64).map(|t| mix_seed(cfg.seed, &[t])).collect(),
    };
    let stats = codec::sigma_min_check(&config)?;

    let mut csv = format!("# config_hash={hash}\nseed_index,sigma_min\n");
    for (i, v) in stats.values.iter().enumerate() {
        csv.push_str(&format!("{i},{v}\n"));
    }
    write_output(&out.join("sigma_min.csv"), &csv)?;

    #[derive(Serialize)]
    struct Summary {
        config_hash: String,
        r: usize,
        m: usize,
        ell: usize,
        d: usize,
        n_dft: usize,
        median: f64,
        q10: f64,
        q90: f64,
        sqrt_ell: f64,
        eta: f64,
        threshold: f64,
        median_ok: bool,
    }
    let threshold = (1.0 - eta) * stats.sqrt_ell;
    let json = serde_json::to_string_pretty(&Summary {
        config_hash: hash,
        r: cfg.r,
        m: cfg.m,
        ell: cfg.ell,
        d: cfg.d,
        n_dft: cfg.n_dft,
        median: stats.median,
        q10: stats.q10,
        q90: stats.q90,
        sqrt_ell: stats.sqrt_ell,
        eta,
        threshold,
        median_ok: stats.median >= threshold,
    })?;
    write_output(&out.join("sigma_min_summary.json"), &json)?;
    println!(
        "sigma-min: median {:.3} vs threshold {:.3} (sqrt(ell) = {:.3})",
        stats.median, threshold, stats.sqrt_ell
    );
    Ok(())
}

fn run_flatness(cfg: &FlatnessSection, out: &Path) -> Result<()> {
    let hash = config_hash(cfg);
    let mut csv = format!("# config_hash={hash}\nn,r,s\n");
    let mut values = Vec::new();
    for &n in &cfg.n_list {
        let decomp = spectral::eigh_gram(n, cfg.r)?;
        let rep = spectral::flatness(&decomp);
        csv.push_str(&format!("{},{},{}\n", n, cfg.r, rep.s));
        values.push((n, rep.s));
    }
    write_output(&out.join("flatness.csv"), &csv)?;

    #[derive(Serialize)]
    struct Summary {
        config_hash: String,
        r: usize,
        values: Vec<(usize, f64)>,
        /// s(n_max) / s(n_min)
        growth_ratio: f64,
    }
    let growth_ratio = values.last().unwrap().1 / values.first().unwrap().1;
    let json = serde_json::to_string_pretty(&Summary {
        config_hash: hash,
        r: cfg.r,
        values: values.clone(),
        growth_ratio,
    })?;
    write_output(&out.join("flatness_summary.json"), &json)?;
    for (n, s) in &values {
        println!("flatness r={} n={n}: s = {s:.4}", cfg.r);
    }
    Ok(())
}

fn run_sigma_decay(cfg: &SigmaDecaySection, margin: f64, out: &Path) -> Result<()> {
    let hash = config_hash(cfg);
    let mut csv = format!("# config_hash={hash}\nr,j,sigma\n");
    let mut slopes = Vec::new();
    for &r in &cfg.r_list {
        let decomp = spectral::eigh_gram(cfg.n, r)?;
        for j in 1..=cfg.n {
            csv.push_str(&format!("{},{},{}\n", r, j, decomp.sigma[j - 1]));
        }
        slopes.push((r, spectral::sigma_decay_slope(&decomp)));
    }
    write_output(&out.join("sigma_decay.csv"), &csv)?;

    #[derive(Serialize)]
    struct Summary {
        config_hash: String,
        n: usize,
        slopes: Vec<(usize, f64)>,
        margin: f64,
        slopes_ok: bool,
    }
    let slopes_ok = slopes.iter().all(|&(r, s)| (s - r as f64).abs() <= margin);
    let json = serde_json::to_string_pretty(&Summary {
        config_hash: hash,
        n: cfg.n,
        slopes: slopes.clone(),
        margin,
        slopes_ok,
    })?;
    write_output(&out.join("sigma_decay_summary.json"), &json)?;
    for (r, s) in &slopes {
        println!("sigma-decay r={r}: slope {s:.3}");
    }
    Ok(())
}
