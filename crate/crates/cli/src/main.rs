use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

mod config;
mod output;
mod suites;

use config::{parse_config, RegSuite, RunConfig};
use output::Output;

#[derive(Parser)]
#[command(name = "fracwave", version, about = "Fractional wave equations: solver, extension and regularity experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate E_{γ,μ}(z) and report the branch used
    #[command(hide = true)]
    Ml {
        #[arg(long, allow_negative_numbers = true)]
        gamma: f64,
        #[arg(long, allow_negative_numbers = true)]
        mu: f64,
        #[arg(long, allow_negative_numbers = true)]
        z: f64,
    },
    /// Spectral solution: solution.csv, modes.csv
    Solve(ConfigArgs),
    /// Extension field: extension.csv, profiles.csv
    Extend(ConfigArgs),
    /// Weighted Ψ_ℓ integrals and the factorial-growth fit
    Psibounds {
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long, default_value_t = 8)]
        ellmax: usize,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// τ-refinement sweep of the fully discrete scheme: orders.csv
    Convergence {
        #[command(flatten)]
        common: ConfigArgs,
        #[arg(long)]
        levels: Option<u32>,
    },
    /// Time, space or space-time regularity checks: regularity.csv
    Regularity {
        #[command(flatten)]
        common: ConfigArgs,
        #[arg(long)]
        suite: Option<String>,
    },
    /// Run the acceptance suite (criteria as "all", "1,3" or "2-5")
    Accept {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value = "fracwave-out")]
        out: PathBuf,
    },
}

#[derive(clap::Args)]
struct ConfigArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn load(&self) -> anyhow::Result<RunConfig> {
        let text = std::fs::read_to_string(&self.config).with_context(|| format!("reading {}", self.config.display()))?;
        let mut cfg = parse_config(&text)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.out = out.display().to_string();
        }
        Ok(cfg)
    }
}

/// Output directory plus the resolved configuration echoed into it. The
/// output path itself is left out of the hash.
fn open_output(cfg: &RunConfig, command: &str) -> anyhow::Result<Output> {
    let resolved = cfg.resolved();
    let identity: String = resolved.lines().filter(|l| !l.starts_with("out = ")).map(|l| format!("{l}\n")).collect();
    let out = Output::create(Path::new(&cfg.out), &format!("command = {command}\n{identity}"))?;
    out.text("resolved_config.ini", &resolved)?;
    Ok(out)
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.cmd {
        Cmd::Ml { gamma, mu, z } => suites::ml_probe(gamma, mu, z),
        Cmd::Solve(a) => {
            let cfg = a.load()?;
            suites::solve(&cfg, &open_output(&cfg, "solve")?)
        }
        Cmd::Extend(a) => {
            let cfg = a.load()?;
            suites::extend(&cfg, &open_output(&cfg, "extend")?)
        }
        Cmd::Psibounds { s, theta, ellmax, beta, lambda, out } => {
            let dir = out.unwrap_or_else(|| PathBuf::from("fracwave-out"));
            let identity = format!("command = psibounds\ns = {s:?}\ntheta = {theta:?}\nellmax = {ellmax}\nbeta = {beta:?}\nlambda = {lambda:?}\n");
            suites::psibounds(s, beta, theta, lambda, ellmax, &Output::create(&dir, &identity)?)
        }
        Cmd::Convergence { common, levels } => {
            let mut cfg = common.load()?;
            if let Some(l) = levels {
                cfg.levels = l;
                cfg.validate()?;
            }
            suites::convergence(&cfg, &open_output(&cfg, "convergence")?)
        }
        Cmd::Regularity { common, suite } => {
            let mut cfg = common.load()?;
            if let Some(s) = suite {
                cfg.suite = RegSuite::parse(&s)?;
            }
            suites::regularity(&cfg, cfg.suite, &open_output(&cfg, "regularity")?)
        }
        Cmd::Accept { suite, seed, out } => {
            let ids = fracwave_core::acceptance::parse_selection(&suite).map_err(anyhow::Error::msg)?;
            let list = ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
            let o = Output::create(&out, &format!("command = accept\ncriteria = {list}\nseed = {seed}\n"))?;
            suites::accept(&ids, seed, &o)
        }
    }
}

fn error_report(cli_out: Option<PathBuf>, e: &anyhow::Error) {
    let chain: Vec<String> = e.chain().map(|c| c.to_string()).collect();
    let report = serde_json::json!({"error": chain.first(), "causes": &chain[1..], "version": fracwave_core::VERSION});
    eprintln!("{}", serde_json::to_string_pretty(&report).unwrap_or_default());
    if let Some(dir) = cli_out {
        if std::fs::create_dir_all(&dir).is_ok() {
            let _ = std::fs::write(dir.join("error.json"), format!("{report:#}\n"));
        }
    }
}

fn out_dir(cli: &Cli) -> Option<PathBuf> {
    match &cli.cmd {
        Cmd::Ml { .. } => None,
        Cmd::Solve(a) | Cmd::Extend(a) => a.out.clone(),
        Cmd::Convergence { common, .. } | Cmd::Regularity { common, .. } => common.out.clone(),
        Cmd::Psibounds { out, .. } => out.clone(),
        Cmd::Accept { out, .. } => Some(out.clone()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("FRACWAVE_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let dir = out_dir(&cli);
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            error_report(dir, &e);
            ExitCode::from(2)
        }
    }
}
