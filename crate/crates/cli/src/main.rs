//! `qsphere`: batch verification runs over one configuration.
//!
//! Every subcommand writes `<dir>/<subcommand>.json` (deterministic for a fixed
//! configuration) and `<dir>/<subcommand>.meta.json` (timing and version).
//! Exit codes: 0 all checks passed, 1 a check failed, 2 bad configuration.

mod commands;
mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use commands::Outcome;
use config::{Config, ConfigError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(
    name = "qsphere",
    version,
    about = "Equivariant spectral triples on odd quantum spheres"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct GlobalArgs {
    /// TOML configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    ell: Option<usize>,
    #[arg(long, global = true)]
    q: Option<f64>,
    #[arg(long, global = true)]
    n_max: Option<u32>,
    #[arg(long, global = true)]
    m_max: Option<u32>,
    #[arg(long, global = true)]
    interior_margin: Option<u32>,
    /// builtin Dirac operator: torus, neg_torus or abs_torus
    #[arg(long, global = true)]
    dirac: Option<String>,
    /// CSV spectrum table with columns g1,…,g{ell+1},d
    #[arg(long, global = true)]
    dirac_table: Option<PathBuf>,
    /// closed-form spectrum in g1,…,g{ell+1} and deg
    #[arg(long, global = true)]
    dirac_expr: Option<String>,
    #[arg(long, global = true)]
    trend_threshold: Option<f64>,
    /// report directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Residuals of the defining relations and of torus covariance
    VerifyRelations,
    /// Bounded-commutator check and linear-growth check for the configured D
    CheckDirac,
    /// Path-lemma walks to the origin, validated as growth-graph edges
    GrowthGraph,
    /// Sign-pattern classification of Γ⁺ and its K-homology class
    ClassifySign {
        #[arg(long)]
        search_max: Option<u32>,
    },
    /// Index of P u P for the configured D
    IndexPairing {
        /// fail unless the index equals this value
        #[arg(long, allow_hyphen_values = true)]
        expect: Option<i64>,
    },
    /// Counting function and its log-log slope
    SpectralDimension {
        #[arg(long)]
        lo: Option<u64>,
        #[arg(long)]
        hi: Option<u64>,
    },
    /// Tail residual of the completely positive lift
    ExtensionLift {
        /// monomial such as "z1 z2*"; repeatable
        #[arg(long = "word")]
        words: Vec<String>,
        #[arg(long)]
        r_max: Option<u32>,
        #[arg(long)]
        fourier_max: Option<u32>,
    },
    /// Elementary operators of the ideal rebuilt from generators
    ReconstructIdeal {
        /// comma-separated, e.g. 1,0
        #[arg(long, value_delimiter = ',')]
        i: Option<Vec<i64>>,
        #[arg(long, value_delimiter = ',')]
        j: Option<Vec<i64>>,
        #[arg(long, allow_hyphen_values = true)]
        k: Option<i64>,
    },
    /// Localization of the extension class along evaluation at 1
    Ev1Check,
    /// Every subcommand in turn
    All,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::VerifyRelations => "verify-relations",
            Command::CheckDirac => "check-dirac",
            Command::GrowthGraph => "growth-graph",
            Command::ClassifySign { .. } => "classify-sign",
            Command::IndexPairing { .. } => "index-pairing",
            Command::SpectralDimension { .. } => "spectral-dimension",
            Command::ExtensionLift { .. } => "extension-lift",
            Command::ReconstructIdeal { .. } => "reconstruct-ideal",
            Command::Ev1Check => "ev1-check",
            Command::All => "all",
        }
    }

    fn apply(&self, cfg: &mut Config) {
        match self {
            Command::ClassifySign {
                search_max: Some(s),
            } => cfg.thresholds.sign_search_max = *s,
            Command::IndexPairing { expect } => {
                if expect.is_some() {
                    cfg.index.expected = *expect;
                }
            }
            Command::SpectralDimension { lo, hi } => {
                if lo.is_some() {
                    cfg.spectral.lo = *lo;
                }
                if hi.is_some() {
                    cfg.spectral.hi = *hi;
                }
            }
            Command::ExtensionLift {
                words,
                r_max,
                fourier_max,
            } => {
                if !words.is_empty() {
                    cfg.extension.words = words.clone();
                }
                if let Some(r) = r_max {
                    cfg.extension.r_max = *r;
                }
                if let Some(f) = fourier_max {
                    cfg.extension.fourier_max = *f;
                }
            }
            Command::ReconstructIdeal { i, j, k } => {
                if i.is_some() {
                    cfg.ideal.i = i.clone();
                }
                if j.is_some() {
                    cfg.ideal.j = j.clone();
                }
                if k.is_some() {
                    cfg.ideal.k = *k;
                }
            }
            _ => {}
        }
    }
}

const ALL: [Command; 9] = [
    Command::VerifyRelations,
    Command::CheckDirac,
    Command::GrowthGraph,
    Command::ClassifySign { search_max: None },
    Command::IndexPairing { expect: None },
    Command::SpectralDimension { lo: None, hi: None },
    Command::ExtensionLift {
        words: Vec::new(),
        r_max: None,
        fourier_max: None,
    },
    Command::ReconstructIdeal {
        i: None,
        j: None,
        k: None,
    },
    Command::Ev1Check,
];

fn resolve(global: &GlobalArgs, command: &Command) -> Result<Config, ConfigError> {
    let mut cfg = match &global.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let l = &mut cfg.lattice;
    if let Some(v) = global.ell {
        l.ell = v;
    }
    if let Some(v) = global.n_max {
        l.n_max = v;
    }
    if let Some(v) = global.m_max {
        l.m_max = v;
    }
    if let Some(v) = global.interior_margin {
        l.interior_margin = v;
    }
    if let Some(v) = global.q {
        cfg.operator.q = v;
    }
    if global.dirac.is_some() || global.dirac_table.is_some() || global.dirac_expr.is_some() {
        cfg.dirac.builtin = global.dirac.clone();
        cfg.dirac.table = global.dirac_table.clone();
        cfg.dirac.expression = global.dirac_expr.clone();
    }
    if let Some(v) = global.trend_threshold {
        cfg.thresholds.trend_threshold = v;
    }
    if let Some(v) = &global.out {
        cfg.output.dir = v.clone();
    }
    command.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(command: &Command, cfg: &Config) -> Result<Outcome> {
    match command {
        Command::VerifyRelations => commands::verify_relations(cfg),
        Command::CheckDirac => commands::check_dirac(cfg),
        Command::GrowthGraph => commands::growth_graph(cfg),
        Command::ClassifySign { .. } => commands::classify_sign(cfg),
        Command::IndexPairing { .. } => commands::index_pairing(cfg),
        Command::SpectralDimension { .. } => commands::spectral_dimension(cfg),
        Command::ExtensionLift { .. } => commands::extension_lift(cfg),
        Command::ReconstructIdeal { .. } => commands::reconstruct_ideal(cfg),
        Command::Ev1Check => commands::ev1_check(cfg),
        Command::All => unreachable!("expanded by the caller"),
    }
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Runs one subcommand and writes its report; returns whether it passed.
fn run_one(command: &Command, cfg: &Config, config_file: Option<&Path>) -> Result<bool> {
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let clock = Instant::now();
    let outcome = dispatch(command, cfg)?;
    let elapsed = clock.elapsed().as_secs_f64();
    let name = command.name();
    let passed = outcome.failures.is_empty();
    fs::create_dir_all(&cfg.output.dir)
        .with_context(|| format!("creating {}", cfg.output.dir.display()))?;
    write_json(
        &cfg.output.dir.join(format!("{name}.json")),
        &json!({
            "schema_version": SCHEMA_VERSION,
            "command": name,
            "passed": passed,
            "failures": outcome.failures,
            "config": cfg,
            "report": outcome.report,
        }),
    )?;
    write_json(
        &cfg.output.dir.join(format!("{name}.meta.json")),
        &json!({
            "schema_version": SCHEMA_VERSION,
            "command": name,
            "tool_version": env!("CARGO_PKG_VERSION"),
            "config_file": config_file,
            "started_unix_seconds": started,
            "elapsed_seconds": elapsed,
        }),
    )?;
    let status = if passed { "PASS" } else { "FAIL" };
    println!("{name}: {status}");
    for f in &outcome.failures {
        println!("  {f}");
    }
    Ok(passed)
}

fn run(cli: &Cli) -> Result<bool> {
    let commands: Vec<Command> = match cli.command {
        Command::All => ALL.to_vec(),
        ref c => vec![c.clone()],
    };
    let mut all_passed = true;
    let mut summary = Vec::new();
    let mut cfg = None;
    for c in &commands {
        let resolved = resolve(&cli.global, c)?;
        let passed = run_one(c, &resolved, cli.global.config.as_deref())?;
        summary.push(json!({ "command": c.name(), "passed": passed }));
        all_passed &= passed;
        cfg = Some(resolved);
    }
    if let (Command::All, Some(cfg)) = (&cli.command, cfg) {
        write_json(
            &cfg.output.dir.join("all.json"),
            &json!({
                "schema_version": SCHEMA_VERSION,
                "command": "all",
                "passed": all_passed,
                "results": summary,
            }),
        )?;
    }
    Ok(all_passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.downcast_ref::<ConfigError>().is_some() => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
