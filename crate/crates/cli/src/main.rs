//! `superdecay`: build constructions, verify them, sample them to CSV and summarize reports.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 bad input
//! (unreadable file, schema or parameter-domain violation, wrong kind).

mod config;
mod sample;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;
use superdecay::{verify, ConstructionFile, PackingMode, Suite, TimelineKind, VerificationReport};

use config::{merge_tolerances, RunConfig};
use sample::Grid;

/// Tag identifying report files.
const REPORT_FORMAT: &str = "superdecay-report";

#[derive(Parser)]
#[command(name = "superdecay", version, about = "Super-exponentially decaying solutions and their verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; every field is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "SUPERDECAY_OUT")]
    out: Option<PathBuf>,
    /// Worker threads for sampling loops (default: available cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Build a construction and write it to `construction.json`.
    Build {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        kind: Option<TimelineKind>,
        #[arg(long)]
        n0: Option<u32>,
        /// Number of blocks.
        #[arg(long)]
        blocks: Option<usize>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        /// First frequency; overrides `--n0`.
        #[arg(long)]
        k_first: Option<f64>,
        /// Packing mode: strict or flexible.
        #[arg(long)]
        mode: Option<PackingMode>,
    },
    /// Run verification suites on a construction file and write `report.json`.
    Verify {
        #[command(flatten)]
        common: Common,
        construction: PathBuf,
        /// Suite to run (repeatable); default is every suite that applies.
        #[arg(long, value_delimiter = ',')]
        suite: Vec<SuiteArg>,
        #[arg(long)]
        seed: Option<u64>,
        /// Tolerance overrides: `name=value,...` or a JSON file.
        #[arg(long)]
        tolerances: Option<String>,
    },
    /// Sample a construction to CSV.
    Sample {
        #[command(flatten)]
        common: Common,
        construction: PathBuf,
        #[arg(long, value_enum, default_value_t = Grid::Tline)]
        grid: Grid,
        /// Points along the t-line, or per side of the slice.
        #[arg(long)]
        points: Option<usize>,
        /// Time of the slice.
        #[arg(long, default_value_t = 0.5)]
        t: f64,
    },
    /// Summarize a report, write its decay table, and exit 0 iff it passed.
    Report {
        #[command(flatten)]
        common: Common,
        report: PathBuf,
    },
}

#[derive(Clone, Copy)]
enum SuiteArg {
    All,
    One(Suite),
}

impl std::str::FromStr for SuiteArg {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "all" {
            Ok(Self::All)
        } else {
            s.parse().map(Self::One)
        }
    }
}

/// Report file: the resolved configuration next to the measurements.
#[derive(Serialize)]
struct ReportFile<'a> {
    format: &'static str,
    version: u32,
    construction_file: String,
    config: &'a RunConfig,
    report: &'a VerificationReport,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Build { common, kind, n0, blocks, mu, alpha, k_first, mode } => {
            let mut cfg = setup(&common)?;
            let p = &mut cfg.build;
            p.kind = kind.unwrap_or(p.kind);
            p.n0 = n0.unwrap_or(p.n0);
            p.blocks = blocks.unwrap_or(p.blocks);
            p.mu = mu.unwrap_or(p.mu);
            p.alpha = alpha.unwrap_or(p.alpha);
            p.k_first = k_first.or(p.k_first);
            p.mode = mode.unwrap_or(p.mode);
            build(&cfg, common.out.as_deref())
        }
        Command::Verify { common, construction, suite, seed, tolerances } => {
            let mut cfg = setup(&common)?;
            if !suite.is_empty() {
                cfg.suites = suite.iter().filter_map(|s| if let SuiteArg::One(s) = s { Some(*s) } else { None }).collect();
                if suite.iter().any(|s| matches!(s, SuiteArg::All)) {
                    cfg.suites.clear();
                }
            }
            cfg.verify.seed = seed.unwrap_or(cfg.verify.seed);
            if let Some(overrides) = tolerances {
                cfg.verify.tolerances = merge_tolerances(cfg.verify.tolerances, &overrides)?;
            }
            run_verify(cfg, &construction, common.out.as_deref())
        }
        Command::Sample { common, construction, grid, points, t } => {
            let cfg = setup(&common)?;
            let file = load_construction(&construction)?;
            let dir = out_dir(&cfg, common.out.as_deref())?;
            let path = dir.join(&cfg.output.samples);
            let out = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            let out = std::io::BufWriter::new(out);
            match grid {
                Grid::Tline => sample::write_tline(&file.construction, points.unwrap_or(1000), out)?,
                Grid::Slice => sample::write_slice(&file.construction, points.unwrap_or(64), t, out)?,
            }
            println!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { common, report } => {
            let cfg = setup(&common)?;
            summarize_report(&cfg, &report, common.out.as_deref())
        }
    }
}

fn setup(common: &Common) -> Result<RunConfig> {
    if let Some(n) = common.workers {
        if n == 0 {
            bail!("--workers must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the worker pool")?;
    }
    RunConfig::load(common.config.as_deref())
}

fn out_dir(cfg: &RunConfig, flag: Option<&Path>) -> Result<PathBuf> {
    let dir = cfg.out_dir(flag);
    fs::create_dir_all(&dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    Ok(dir)
}

fn load_construction(path: &Path) -> Result<ConstructionFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ConstructionFile::from_json(&text).with_context(|| format!("loading {}", path.display()))
}

fn build(cfg: &RunConfig, flag: Option<&Path>) -> Result<ExitCode> {
    let construction = cfg.build.build()?;
    let file = ConstructionFile::new(cfg.build, construction);
    let dir = out_dir(cfg, flag)?;
    let path = dir.join(&cfg.output.construction);
    fs::write(&path, file.to_json()?).with_context(|| format!("writing {}", path.display()))?;

    let c = &file.construction;
    let (t0, t1) = c.t_range();
    println!("{} construction, {} blocks on [{t0}, {t1}]", c.kind().name(), c.block_count());
    println!("{:>4}  {:>14}  {:>14}  {:>22}", "n", "k", "k'", "ln C_n");
    for (i, (k, kp, log_c)) in c.block_table().into_iter().enumerate() {
        println!("{:>4}  {k:>14.6}  {kp:>14.6}  {log_c:>22.10}", i + 1);
    }
    println!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn run_verify(mut cfg: RunConfig, path: &Path, flag: Option<&Path>) -> Result<ExitCode> {
    let file = load_construction(path)?;
    let report = verify(&file.construction, &cfg.suites, &cfg.verify)?;
    let dir = out_dir(&cfg, flag)?;
    cfg.build = file.params;
    cfg.suites = report.suites.clone();
    cfg.output.dir = Some(dir.clone());
    let out = dir.join(&cfg.output.report);
    let body = ReportFile {
        format: REPORT_FORMAT,
        version: superdecay::verifier::REPORT_VERSION,
        construction_file: path.display().to_string(),
        config: &cfg,
        report: &report,
    };
    fs::write(&out, serde_json::to_string_pretty(&body)?).with_context(|| format!("writing {}", out.display()))?;

    let value = serde_json::to_value(&report)?;
    print_summary(&value);
    println!("wrote {}", out.display());
    Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

/// Human summary of a report given as JSON; nothing parses this output.
fn print_summary(report: &Value) {
    let kind = report["kind"].as_str().unwrap_or("?");
    let blocks = report["blocks"].as_u64().unwrap_or(0);
    let passed = report["passed"].as_bool().unwrap_or(false);
    println!("{kind}, {blocks} blocks: {}", if passed { "PASS" } else { "FAIL" });
    for check in report["checks"].as_array().into_iter().flatten() {
        let sign = if check["comparison"] == "at_least" { ">=" } else { "<=" };
        println!(
            "  {} {}/{}: {} {sign} {} [{}]",
            if check["passed"].as_bool() == Some(true) { "pass" } else { "FAIL" },
            check["suite"].as_str().unwrap_or("?"),
            check["name"].as_str().unwrap_or("?"),
            show(&check["measured"]),
            show(&check["threshold"]),
            check["source"].as_str().unwrap_or("?"),
        );
    }
    for m in report["margins"].as_array().into_iter().flatten() {
        println!(
            "  margin {} {}: declared {} measured {} (ratio {})",
            m["scope"].as_str().unwrap_or("?"),
            m["claim"].as_str().unwrap_or("?"),
            show(&m["declared"]),
            show(&m["measured"]),
            show(&m["margin"]),
        );
    }
}

fn show(v: &Value) -> String {
    match v.as_f64() {
        Some(x) => format!("{x:.6e}"),
        None => "n/a".into(),
    }
}

fn summarize_report(cfg: &RunConfig, path: &Path, flag: Option<&Path>) -> Result<ExitCode> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    // Parsed loosely: non-finite measurements are written as null.
    let file: Value = serde_json::from_str(&text).with_context(|| format!("{} is not JSON", path.display()))?;
    if file["format"] != REPORT_FORMAT {
        bail!("{} is not a {REPORT_FORMAT} file", path.display());
    }
    let report = &file["report"];
    if !report["passed"].is_boolean() || !report["checks"].is_array() {
        bail!("{} has no report section with checks and a verdict", path.display());
    }
    print_summary(report);

    let dir = out_dir(cfg, flag)?;
    let out = dir.join(&cfg.output.decay);
    let mut w = csv::Writer::from_path(&out).with_context(|| format!("creating {}", out.display()))?;
    w.write_record(["t", "sup_logmag"])?;
    let decay = &report["decay"];
    let times = decay["times"].as_array().cloned().unwrap_or_default();
    let logs = decay["log_sup"].as_array().cloned().unwrap_or_default();
    for (t, l) in times.iter().zip(&logs) {
        let cell = |v: &Value| v.as_f64().map_or_else(|| "nan".to_string(), |x| format!("{x:.16e}"));
        w.write_record([cell(t), cell(l)])?;
    }
    w.flush()?;
    println!("wrote {}", out.display());
    Ok(if report["passed"].as_bool() == Some(true) { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
