//! Command-line front end: configuration parsing, subcommand dispatch,
//! persistence, and plot-ready table emission.
//!
//! Exit codes: 0 success, 1 usage/input, 2 mathematical precondition,
//! 3 trial-failure budget exceeded.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{local_law_scan, OmegaVContext, ScaleParams, LOCAL_LAW_SAFETY};
use crate::ensemble::{assemble, sample_wigner, Symmetry};
use crate::error::Error;
use crate::experiments::{derive_seed, run_trials, summarize, ExperimentConfig, Mode, TrialRecord};
use crate::freeconv::{density_fc, edge_constants, EdgeConstants, Regime};
use crate::jsonio::{fmt_f64, record_from_line, record_to_line, summary_to_csv, summary_to_json, Jv};

#[derive(Parser)]
#[command(name = "spectral-lab", version, about = "Deformed Wigner matrix laboratory")]
struct Cli {
    /// Path to the JSON run configuration.
    #[arg(long, global = true, default_value = "config.json")]
    config: PathBuf,
    /// Directory for records, manifests and summaries.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Worker count; defaults to SPECTRAL_LAB_WORKERS or the available cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Overrides the config's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the edge constants of the configured measure and coupling.
    Edge,
    /// Emit a CSV table of the deformed density over an energy grid.
    Density {
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        points: usize,
    },
    /// Run the configured Monte Carlo trials; write records and a manifest.
    Simulate {
        /// Keep valid records already present in the output file.
        #[arg(long)]
        resume: bool,
    },
    /// Summarize a record stream into summary.json and summary.csv.
    Analyze {
        /// Records file; defaults to <out-dir>/records.jsonl.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Local-law scan plus typical-potential checks, one JSON line per seed.
    Locallaw {
        #[arg(long, value_delimiter = ',', required = true)]
        seeds: Vec<u64>,
    },
    /// Typical-potential event checks, one JSON line per seed.
    Omegav {
        #[arg(long, value_delimiter = ',', required = true)]
        seeds: Vec<u64>,
    },
}

struct CliError {
    code: i32,
    msg: String,
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError { code: 1, msg: msg.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::TrialBudgetExceeded { .. } => 3,
            _ => 2,
        };
        CliError { code, msg: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::usage(format!("io: {e}"))
    }
}

pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if is_help { 0 } else { 1 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            e.code
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let workers = resolve_workers(cli.workers);
    match cli.cmd {
        Cmd::Edge => cmd_edge(&cli.config, cli.seed),
        Cmd::Density { from, to, points } => cmd_density(&cli.config, cli.seed, from, to, points),
        Cmd::Simulate { resume } => {
            cmd_simulate(&cli.config, &cli.out_dir, cli.seed, workers, resume)
        }
        Cmd::Analyze { records } => cmd_analyze(&cli.config, &cli.out_dir, cli.seed, records),
        Cmd::Locallaw { seeds } => cmd_locallaw(&cli.config, cli.seed, &seeds, true),
        Cmd::Omegav { seeds } => cmd_locallaw(&cli.config, cli.seed, &seeds, false),
    }
}

fn resolve_workers(flag: Option<usize>) -> usize {
    flag.or_else(|| std::env::var("SPECTRAL_LAB_WORKERS").ok().and_then(|s| s.parse().ok()))
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        })
        .max(1)
}

fn default_d() -> Vec<f64> {
    vec![1.0]
}
fn default_n0() -> usize {
    5
}
fn default_symmetry() -> Symmetry {
    Symmetry::RealSymmetric
}
fn default_epsilon() -> f64 {
    0.05
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    a: f64,
    b: f64,
    #[serde(default = "default_d")]
    d: Vec<f64>,
    lambda: f64,
    n: usize,
    trials: usize,
    #[serde(default = "default_n0")]
    n0: usize,
    #[serde(default = "default_symmetry")]
    symmetry: Symmetry,
    #[serde(default = "default_epsilon")]
    epsilon: f64,
    master_seed: u64,
    mode: Mode,
}

fn read_config(path: &Path, seed_override: Option<u64>) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    let raw: RawConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("config parse error: {e}")))?;
    Ok(ExperimentConfig {
        a: raw.a,
        b: raw.b,
        d: raw.d,
        lambda: raw.lambda,
        n: raw.n,
        trials: raw.trials,
        n0: raw.n0,
        symmetry: raw.symmetry,
        epsilon: raw.epsilon,
        master_seed: seed_override.unwrap_or(raw.master_seed),
        mode: raw.mode,
    })
}

/// Parsed, defaulted and validated configuration (the simulate/analyze path).
pub fn parse_config(path: &Path) -> Result<ExperimentConfig, String> {
    match read_config(path, None) {
        Ok(cfg) => match cfg.validate() {
            Ok(()) => Ok(cfg),
            Err(e) => Err(e.to_string()),
        },
        Err(e) => Err(e.msg),
    }
}

/// Config serialized with 17-significant-digit floats (round-trips exactly).
pub fn serialize_config(cfg: &ExperimentConfig) -> String {
    let mode = match cfg.mode {
        Mode::Weibull => "weibull",
        Mode::Eigenvector => "eigenvector",
        Mode::GaussianEdge => "gaussian-edge",
        Mode::LocalLaw => "local-law",
    };
    let sym = match cfg.symmetry {
        Symmetry::RealSymmetric => "real",
        Symmetry::ComplexHermitian => "complex",
    };
    let mut out = Jv::Obj(vec![
        ("a", Jv::Num(cfg.a)),
        ("b", Jv::Num(cfg.b)),
        ("d", Jv::Arr(cfg.d.iter().map(|&x| Jv::Num(x)).collect())),
        ("lambda", Jv::Num(cfg.lambda)),
        ("n", Jv::Int(cfg.n as u64)),
        ("trials", Jv::Int(cfg.trials as u64)),
        ("n0", Jv::Int(cfg.n0 as u64)),
        ("symmetry", Jv::Str(sym.to_string())),
        ("epsilon", Jv::Num(cfg.epsilon)),
        ("master_seed", Jv::Int(cfg.master_seed)),
        ("mode", Jv::Str(mode.to_string())),
    ])
    .to_string();
    out.push('\n');
    out
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Supercritical => "supercritical",
        Regime::Subcritical => "subcritical",
    }
}

fn edge_jv(ec: &EdgeConstants) -> Jv {
    Jv::Obj(vec![
        ("lambda", Jv::Num(ec.lambda)),
        ("lambda_plus", Jv::Num(ec.lambda_plus)),
        ("lambda_minus", Jv::Num(ec.lambda_minus)),
        ("tau_plus", Jv::Num(ec.tau_plus)),
        ("tau_minus", Jv::Num(ec.tau_minus)),
        ("l_plus", Jv::Num(ec.l_plus)),
        ("l_minus", Jv::Num(ec.l_minus)),
        ("upper_regime", Jv::Str(regime_name(ec.upper_regime).to_string())),
        ("lower_regime", Jv::Str(regime_name(ec.lower_regime).to_string())),
        ("c_lambda", ec.c_lambda.map(Jv::Num).unwrap_or(Jv::Null)),
        ("c_mu", ec.c_mu.map(Jv::Num).unwrap_or(Jv::Null)),
        ("beta_exp", Jv::Num(ec.beta_exp)),
        ("frak_b", Jv::Num(ec.frak_b)),
    ])
}

fn cmd_edge(config: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let cfg = read_config(config, seed)?;
    let measure = cfg.measure()?;
    let ec = edge_constants(&measure, cfg.lambda)?;
    println!("lambda={}", fmt_f64(ec.lambda));
    println!("lambda_plus={}", fmt_f64(ec.lambda_plus));
    println!("lambda_minus={}", fmt_f64(ec.lambda_minus));
    println!("tau_plus={}", fmt_f64(ec.tau_plus));
    println!("tau_minus={}", fmt_f64(ec.tau_minus));
    println!("l_plus={}", fmt_f64(ec.l_plus));
    println!("l_minus={}", fmt_f64(ec.l_minus));
    println!("upper_regime={}", regime_name(ec.upper_regime));
    println!("lower_regime={}", regime_name(ec.lower_regime));
    if let Some(cl) = ec.c_lambda {
        println!("c_lambda={}", fmt_f64(cl));
    }
    if let Some(cm) = ec.c_mu {
        println!("c_mu={}", fmt_f64(cm));
    }
    println!("beta_exp={}", fmt_f64(ec.beta_exp));
    println!("frak_b={}", fmt_f64(ec.frak_b));
    println!("{}", edge_jv(&ec).to_string());
    Ok(())
}

fn cmd_density(
    config: &Path,
    seed: Option<u64>,
    from: f64,
    to: f64,
    points: usize,
) -> Result<(), CliError> {
    if points == 0 || !(to > from) {
        return Err(CliError::usage("density grid needs points >= 1 and to > from"));
    }
    let cfg = read_config(config, seed)?;
    let measure = cfg.measure()?;
    let lambda = cfg.lambda;
    let energies: Vec<f64> = (0..points)
        .map(|i| from + (to - from) * i as f64 / (points - 1).max(1) as f64)
        .collect();
    let eval = |&e: &f64| density_fc(&measure, lambda, e);
    #[cfg(feature = "parallel")]
    let rows: Vec<crate::error::Result<f64>> = {
        use rayon::prelude::*;
        energies.par_iter().map(eval).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<crate::error::Result<f64>> = energies.iter().map(eval).collect();

    let mut out = String::from("E,mu_fc\n");
    for (e, row) in energies.iter().zip(rows) {
        match row {
            Ok(val) => {
                out.push_str(&fmt_f64(*e));
                out.push(',');
                out.push_str(&fmt_f64(val));
                out.push('\n');
            }
            Err(err) => {
                eprintln!("warning: density at E = {e} failed: {err}");
                out.push_str(&fmt_f64(*e));
                out.push_str(",\n");
            }
        }
    }
    print!("{out}");
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct RunManifest {
    version: String,
    config: ExperimentConfig,
    started_at_unix_ms: u64,
    finished_at_unix_ms: Option<u64>,
    records_path: String,
    status: String,
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(manifest)
        .map_err(|e| CliError::usage(format!("manifest encode: {e}")))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

fn read_records(path: &Path) -> Result<Vec<TrialRecord>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read records {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec = record_from_line(line)
            .map_err(|e| CliError::usage(format!("line {}: {e}", lineno + 1)))?;
        out.push(rec);
    }
    Ok(out)
}

fn cmd_simulate(
    config: &Path,
    out_dir: &Path,
    seed: Option<u64>,
    workers: usize,
    resume: bool,
) -> Result<(), CliError> {
    let cfg = read_config(config, seed)?;
    cfg.validate()?;
    fs::create_dir_all(out_dir)?;
    let records_path = out_dir.join("records.jsonl");
    let manifest_path = out_dir.join("manifest.json");

    let mut have: BTreeMap<u64, TrialRecord> = BTreeMap::new();
    if resume && records_path.exists() {
        for rec in read_records(&records_path)? {
            if rec.trial_index >= cfg.trials as u64 {
                continue;
            }
            let expect = derive_seed(cfg.master_seed, rec.trial_index);
            if rec.derived_seed != expect {
                return Err(CliError::usage(format!(
                    "resume mismatch at trial {}: derived seed {} does not belong to master seed {}",
                    rec.trial_index, rec.derived_seed, cfg.master_seed
                )));
            }
            have.insert(rec.trial_index, rec);
        }
    }

    let started_at = if resume && manifest_path.exists() {
        let text = fs::read_to_string(&manifest_path)?;
        match serde_json::from_str::<RunManifest>(&text) {
            Ok(old) if old.config == cfg => old.started_at_unix_ms,
            Ok(_) => {
                return Err(CliError::usage(
                    "resume mismatch: manifest was written for a different configuration",
                ))
            }
            Err(e) => return Err(CliError::usage(format!("manifest parse: {e}"))),
        }
    } else {
        now_ms()
    };
    let mut manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        started_at_unix_ms: started_at,
        finished_at_unix_ms: None,
        records_path: records_path.display().to_string(),
        status: "running".to_string(),
    };
    // the manifest lands before trial zero runs
    write_manifest(&manifest_path, &manifest)?;

    let missing: Vec<u64> = (0..cfg.trials as u64).filter(|i| !have.contains_key(i)).collect();
    let results = run_trials(&cfg, &missing, workers)?;
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(rec) => {
                have.insert(rec.trial_index, rec);
            }
            Err(e) => {
                eprintln!("warning: {e}");
                failures.push(e);
            }
        }
    }
    if failures.len() * 100 > cfg.trials {
        manifest.status = "failed".to_string();
        manifest.finished_at_unix_ms = Some(now_ms());
        write_manifest(&manifest_path, &manifest)?;
        return Err(Error::TrialBudgetExceeded {
            failed: failures.len(),
            total: cfg.trials,
            first: Box::new(failures.remove(0)),
        }
        .into());
    }

    let mut body = String::new();
    for rec in have.values() {
        body.push_str(&record_to_line(rec));
        body.push('\n');
    }
    fs::write(&records_path, body)?;

    manifest.status = "complete".to_string();
    manifest.finished_at_unix_ms = Some(now_ms());
    write_manifest(&manifest_path, &manifest)?;
    println!("records written to {}", records_path.display());
    println!("manifest written to {}", manifest_path.display());
    Ok(())
}

fn cmd_analyze(
    config: &Path,
    out_dir: &Path,
    seed: Option<u64>,
    records: Option<PathBuf>,
) -> Result<(), CliError> {
    let cfg = read_config(config, seed)?;
    cfg.validate()?;
    let records_path = records.unwrap_or_else(|| out_dir.join("records.jsonl"));
    let recs = read_records(&records_path)?;
    if recs.is_empty() {
        return Err(CliError::usage(format!(
            "record schema violation: {} holds no records",
            records_path.display()
        )));
    }
    let summary = summarize(&cfg, &recs)?;
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("summary.json"), summary_to_json(&summary))?;
    fs::write(out_dir.join("summary.csv"), summary_to_csv(&summary))?;
    println!("summary written to {}", out_dir.join("summary.json").display());
    Ok(())
}

fn cmd_locallaw(
    config: &Path,
    seed: Option<u64>,
    seeds: &[u64],
    with_scan: bool,
) -> Result<(), CliError> {
    let cfg = read_config(config, seed)?;
    let measure = cfg.measure()?;
    let params = ScaleParams::new(cfg.n, cfg.b, cfg.epsilon, cfg.n0)?;
    let ctx = OmegaVContext::new(&measure, cfg.lambda, &params)?;
    let nf = cfg.n as f64;
    let bound = LOCAL_LAW_SAFETY * nf.powf(-0.5 + 2.0 * cfg.epsilon);
    for &s in seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let v = measure.sample_sorted(cfg.n, &mut rng);
        let omega = ctx.check(&v);
        if !with_scan {
            let line = Jv::Obj(vec![
                ("seed", Jv::Int(s)),
                ("gap_lower_ok", Jv::Bool(omega.gap_lower_ok)),
                ("gap_upper_ok", Jv::Bool(omega.gap_upper_ok)),
                ("r2_sup", Jv::Num(omega.r2_sup)),
                ("clt_sup", Jv::Num(omega.clt_sup)),
                ("pass", Jv::Bool(omega.pass)),
            ]);
            println!("{}", line.to_string());
            continue;
        }
        let omega_jv = Jv::Obj(vec![
            ("gap_lower_ok", Jv::Bool(omega.gap_lower_ok)),
            ("gap_upper_ok", Jv::Bool(omega.gap_upper_ok)),
            ("r2_sup", Jv::Num(omega.r2_sup)),
            ("clt_sup", Jv::Num(omega.clt_sup)),
            ("pass", Jv::Bool(omega.pass)),
        ]);
        let w = sample_wigner(cfg.n, cfg.symmetry, &mut rng);
        let h = assemble(&v, cfg.lambda, w)?;
        let line = match local_law_scan(&h, &v, cfg.lambda, &measure, &params) {
            Ok(scan) => Jv::Obj(vec![
                ("seed", Jv::Int(s)),
                ("sup_deviation", Jv::Num(scan.sup_deviation)),
                ("bound", Jv::Num(bound)),
                ("pass", Jv::Bool(scan.sup_deviation <= bound)),
                ("grid_points_used", Jv::Int(scan.grid_points_used as u64)),
                ("omega_v", omega_jv),
            ]),
            Err(Error::EmptyDomain) => Jv::Obj(vec![
                ("seed", Jv::Int(s)),
                ("sup_deviation", Jv::Null),
                ("bound", Jv::Num(bound)),
                ("pass", Jv::Bool(false)),
                ("grid_points_used", Jv::Int(0)),
                ("error", Jv::Str("empty domain".to_string())),
                ("omega_v", omega_jv),
            ]),
            Err(e) => return Err(e.into()),
        };
        println!("{}", line.to_string());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_rejections() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        fs::write(
            &path,
            r#"{"a":2,"b":2,"lambda":2,"n":1000,"trials":100,"mode":"weibull","master_seed":1}"#,
        )
        .unwrap();
        let cfg = parse_config(&path).unwrap();
        assert_eq!(cfg.n0, 5);
        assert_eq!(cfg.epsilon, 0.05);
        assert_eq!(cfg.symmetry, Symmetry::RealSymmetric);
        assert_eq!(cfg.d, vec![1.0]);

        // weibull below the critical coupling is rejected by validation
        fs::write(
            &path,
            r#"{"a":2,"b":2,"lambda":1,"n":1000,"trials":100,"mode":"weibull","master_seed":1}"#,
        )
        .unwrap();
        let err = parse_config(&path).unwrap_err();
        assert!(err.contains("lambda"), "{err}");

        // unknown keys are named
        fs::write(
            &path,
            r#"{"a":2,"b":2,"lamda":2,"n":1000,"trials":100,"mode":"weibull","master_seed":1}"#,
        )
        .unwrap();
        let err = parse_config(&path).unwrap_err();
        assert!(err.contains("lamda"), "{err}");
    }

    #[test]
    fn config_roundtrip() {
        let cfg = ExperimentConfig {
            a: 2.0,
            b: 2.5,
            d: vec![1.0, 0.125],
            lambda: 2.25,
            n: 64,
            trials: 3,
            n0: 5,
            symmetry: Symmetry::ComplexHermitian,
            epsilon: 0.06,
            master_seed: 99,
            mode: Mode::Eigenvector,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        fs::write(&path, serialize_config(&cfg)).unwrap();
        let back = parse_config(&path).unwrap();
        assert_eq!(cfg, back);
    }
}
