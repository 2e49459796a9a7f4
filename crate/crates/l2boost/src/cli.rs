//! Command-line interface.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand};
use l2boost_core::inference::{double_selection, iv_estimate, normal_quantile};
use l2boost_core::montecarlo::{Experiment, McSummary};
use l2boost_core::{BoostingConfig, Matrix, StopRule, Variant};
use serde::{Deserialize, Serialize};

use crate::config::{self, Overrides};
use crate::data::Dataset;
use crate::error::{AppError, Result};
use crate::mc::run_mc;
use crate::report::{build_report, Format, SummaryReport};

pub const FIT_REPORT: &str = "fit_report.json";

#[derive(Debug, Parser)]
#[command(name = "l2boost", version, about = "L2Boosting estimators and Monte Carlo experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a Monte Carlo experiment and write summary.csv, summary.json and
    /// effective_config.toml.
    Simulate(SimulateArgs),
    /// Estimate a treatment or IV coefficient from a CSV file.
    Fit(FitArgs),
    /// Re-render the table of an earlier `simulate` run.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// TOML run configuration; built-in defaults otherwise.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = parse_experiment)]
    pub experiment: Option<Experiment>,
    /// Repeatable; replaces the configured list.
    #[arg(long = "variant", value_parser = parse_variant)]
    pub variants: Vec<Variant>,
    #[arg(long, value_name = "N")]
    pub replications: Option<usize>,
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Dotted override such as `iv.mu=30` or `boosting.stop_rule=tol`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long, value_name = "DIR", default_value = "l2boost-out")]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Worker threads; 0 uses every available core. Results do not depend
    /// on this.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("regressors").required(true).args(["instruments", "controls"])))]
pub struct FitArgs {
    #[arg(long, value_name = "PATH")]
    pub data: PathBuf,
    #[arg(long, value_name = "NAME")]
    pub outcome: String,
    /// Treatment, or the endogenous regressor when `--instruments` is given.
    #[arg(long, value_name = "NAME")]
    pub treatment: String,
    /// Comma-separated names, or a prefix (`z*`). Selects 2SLS with a
    /// boosted first stage.
    #[arg(long, value_name = "LIST|PREFIX")]
    pub instruments: Option<String>,
    /// Comma-separated names, or a prefix (`x*`). Selects double selection.
    #[arg(long, value_name = "LIST|PREFIX")]
    pub controls: Option<String>,
    #[arg(long, value_parser = parse_variant, default_value = "ba")]
    pub variant: Variant,
    #[arg(long, value_parser = parse_stop, default_value = "aicc")]
    pub stop: StopRule,
    #[arg(long = "m-max", value_name = "N", default_value_t = 100)]
    pub m_max: usize,
    #[arg(long, value_name = "DIR", default_value = "l2boost-out")]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory holding the artifacts of `simulate`.
    #[arg(long, value_name = "DIR", default_value = "l2boost-out")]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

fn parse_variant(s: &str) -> std::result::Result<Variant, String> {
    Variant::from_key(s).ok_or_else(|| format!("expected one of ba, post-ba, oba; got `{s}`"))
}

fn parse_stop(s: &str) -> std::result::Result<StopRule, String> {
    StopRule::from_key(s).ok_or_else(|| format!("expected one of fixed, aicc, tol; got `{s}`"))
}

fn parse_experiment(s: &str) -> std::result::Result<Experiment, String> {
    match s {
        "iv" => Ok(Experiment::Iv),
        "te" => Ok(Experiment::Te),
        _ => Err(format!("expected iv or te; got `{s}`")),
    }
}

/// Runs a parsed command, returning what it prints on stdout.
pub fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Fit(a) => cmd_fit(&a),
        Command::Report(a) => cmd_report(&a),
    }
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<String> {
    let overrides = Overrides {
        set: args.set.clone(),
        experiment: args.experiment,
        variants: args.variants.clone(),
        replications: args.replications,
        master_seed: args.seed,
    };
    let cfg = config::load(args.config.as_deref(), &overrides)?;
    let mut results: Vec<(Variant, McSummary)> = Vec::new();
    for &variant in &cfg.variants {
        results.push((variant, run_mc(&cfg.mc_config(variant), args.workers)?));
    }
    let report = build_report(&cfg, &results);
    report.write_artifacts(&cfg, &args.output)?;
    Ok(report.render(args.format))
}

pub fn cmd_report(args: &ReportArgs) -> Result<String> {
    Ok(SummaryReport::read(&args.output)?.render(args.format))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    /// Which regression the selection belongs to.
    pub equation: String,
    pub m_star: usize,
    pub selected: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// `iv` or `double-selection`.
    pub method: String,
    pub variant: Variant,
    pub stop_rule: StopRule,
    pub m_max: usize,
    pub observations: usize,
    pub outcome: String,
    pub treatment: String,
    pub estimate: f64,
    pub se: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub selections: Vec<Selection>,
    /// Controls used in the final regression (double selection only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub union: Option<Vec<String>>,
}

impl FitReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let what = match self.method.as_str() {
            "iv" => "2SLS, boosted first stage",
            _ => "double selection, HC1 standard error",
        };
        writeln!(out, "{what} ({}, stop = {})", self.variant.label(), self.stop_rule.key()).unwrap();
        writeln!(out, "observations  {}", self.observations).unwrap();
        writeln!(out, "estimate      {:.6}", self.estimate).unwrap();
        writeln!(out, "std. error    {:.6}", self.se).unwrap();
        writeln!(out, "95% CI        [{:.6}, {:.6}]", self.ci_lower, self.ci_upper).unwrap();
        for s in &self.selections {
            writeln!(
                out,
                "{}: m_star = {}, {} selected: {}",
                s.equation,
                s.m_star,
                s.selected.len(),
                s.selected.join(", ")
            )
            .unwrap();
        }
        if let Some(u) = &self.union {
            writeln!(out, "union ({}): {}", u.len(), u.join(", ")).unwrap();
        }
        out
    }
}

pub fn cmd_fit(args: &FitArgs) -> Result<String> {
    let report = fit_report(args)?;
    fs::create_dir_all(&args.output).map_err(AppError::io(&args.output))?;
    let path = args.output.join(FIT_REPORT);
    let json = serde_json::to_string_pretty(&report).expect("fit report serializes") + "\n";
    fs::write(&path, &json).map_err(AppError::io(path))?;
    Ok(match args.format {
        Format::Json => json,
        _ => report.render_text(),
    })
}

pub fn fit_report(args: &FitArgs) -> Result<FitReport> {
    let data = Dataset::from_path(&args.data)?;
    let y = data.column(&args.outcome)?;
    let d = data.column(&args.treatment)?;
    if args.outcome == args.treatment {
        return Err(AppError::Data("outcome and treatment must be different columns".into()));
    }
    let cfg = BoostingConfig::new(args.variant).with_stop(args.stop, args.m_max);
    cfg.validate().map_err(|e| AppError::Config(e.to_string()))?;
    let exclude = [args.outcome.as_str(), args.treatment.as_str()];
    let (method, selection) = match (&args.instruments, &args.controls) {
        (Some(s), None) => ("iv", s),
        (None, Some(s)) => ("double-selection", s),
        _ => return Err(AppError::Config("give exactly one of --instruments or --controls".into())),
    };
    let cols = data.select(selection, &exclude)?;
    let x = Matrix::from_columns(data.nrows(), &cols.iter().map(|&j| data.columns[j].clone()).collect::<Vec<_>>())?;
    let names = |support: &[usize]| -> Vec<String> { support.iter().map(|&k| data.names[cols[k]].clone()).collect() };
    let (estimate, se, selections, union) = if method == "iv" {
        let e = iv_estimate(y, d, &x, &cfg)?;
        let sel = Selection {
            equation: "first stage".into(),
            m_star: e.m_star,
            selected: names(&e.first_stage_support),
        };
        (e.beta_hat, e.se, vec![sel], None)
    } else {
        let e = double_selection(y, d, &x, &cfg)?;
        let sels = vec![
            Selection {
                equation: "outcome".into(),
                m_star: e.m_star_y,
                selected: names(&e.support_y),
            },
            Selection {
                equation: "treatment".into(),
                m_star: e.m_star_d,
                selected: names(&e.support_d),
            },
        ];
        (e.alpha_hat, e.se, sels, Some(names(&e.support_union)))
    };
    let z = normal_quantile(0.975);
    Ok(FitReport {
        method: method.into(),
        variant: args.variant,
        stop_rule: args.stop,
        m_max: args.m_max,
        observations: data.nrows(),
        outcome: args.outcome.clone(),
        treatment: args.treatment.clone(),
        estimate,
        se,
        ci_lower: estimate - z * se,
        ci_upper: estimate + z * se,
        selections,
        union,
    })
}

/// Entry point shared by the binary: parses `argv`, runs, prints and returns
/// the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
