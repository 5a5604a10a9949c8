//! Command-line front end: `test` runs one of the two-sample tests on data
//! files, `simulate` runs the calibrated power and consistency studies, and
//! `plot` turns their CSVs into SVG charts.
//!
//! Exit codes: 0 success, 2 usage or input problems, 3 degenerate data,
//! 4 quadrature failure.

mod io;
mod svg;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polyatree::empirical::{EmpiricalConfig, H1Integration};
use polyatree::harness::{
    calibrate_threshold, level_decomposition_study, null_consistency_experiment, power_curve,
    PowerStudyConfig, TestMethod,
};
use polyatree::scenarios::ScenarioKind;
use polyatree::subjective::SubjectiveConfig;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use io::{sig6, CsvCell, CsvTable, RunManifest};

/// Like `println!`, but when stdout disappears mid-stream (`| head`) the
/// process stops quietly like any other filter instead of panicking.
macro_rules! outln {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let mut stdout = std::io::stdout().lock();
        if writeln!(stdout, $($arg)*).is_err() {
            std::process::exit(0);
        }
    }};
}

#[derive(Debug)]
pub struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: 2,
        }
    }
}

impl From<polyatree::Error> for CliError {
    fn from(e: polyatree::Error) -> Self {
        let code = match &e {
            polyatree::Error::DegenerateData(_) => 3,
            polyatree::Error::NoConvergence { .. } => 4,
            _ => 2,
        };
        Self {
            message: e.to_string(),
            code,
        }
    }
}

#[derive(Parser)]
#[command(name = "polyatree", version, about = "Bayesian two-sample testing with Polya trees")]
struct Cli {
    /// Cap the worker thread pool (default: one thread per core).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test whether two samples share a distribution.
    Test(TestArgs),
    /// Run a calibrated simulation study and write its CSVs.
    Simulate(SimulateArgs),
    /// Render an SVG chart from a simulate CSV.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    /// Normal-centered partition; answers depend on the data scale.
    Subjective,
    /// Pooled-data-centered partition; answers depend only on ranks.
    Empirical,
}

impl MethodArg {
    fn name(self) -> &'static str {
        match self {
            Self::Subjective => "subjective",
            Self::Empirical => "empirical",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    /// Group 2 is N(theta, 1).
    Mean,
    /// Group 2 is N(0, theta^2).
    Variance,
    /// Group 2 is an even mixture of N(-theta, 1) and N(theta, 1).
    Mixture,
    /// Group 2 is Student t with 1/theta degrees of freedom.
    #[value(alias = "tails")]
    Tail,
    /// Group 2 is skew-normal with shape theta.
    Skew,
    /// Group 2 is N(0, 1) contaminated by N(0, 20) with weight theta.
    Outlier,
    /// log of group 2 is N(theta, 1); group 1 is log-standard-normal.
    LognormalMean,
    /// log of group 2 is N(0, theta^2); group 1 is log-standard-normal.
    LognormalVariance,
}

impl ScenarioArg {
    fn kind(self) -> ScenarioKind {
        match self {
            Self::Mean => ScenarioKind::MeanShift,
            Self::Variance => ScenarioKind::VarianceShift,
            Self::Mixture => ScenarioKind::Mixture,
            Self::Tail => ScenarioKind::Tails,
            Self::Skew => ScenarioKind::Skew,
            Self::Outlier => ScenarioKind::Outlier,
            Self::LognormalMean => ScenarioKind::LognormalMean,
            Self::LognormalVariance => ScenarioKind::LognormalVariance,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Self::Mean => "mean",
            Self::Variance => "variance",
            Self::Mixture => "mixture",
            Self::Tail => "tail",
            Self::Skew => "skew",
            Self::Outlier => "outlier",
            Self::LognormalMean => "lognormal-mean",
            Self::LognormalVariance => "lognormal-variance",
        }
    }
}

/// Flags shared by `test` and `simulate` that pin down the test itself.
#[derive(Args)]
struct MethodFlags {
    #[arg(long, value_enum, default_value_t = MethodArg::Subjective)]
    method: MethodArg,

    /// Concentration multiplier in alpha = c * level^2.
    #[arg(long, default_value_t = 1.0)]
    c: f64,

    /// Prior probability that the groups share one distribution.
    #[arg(long, default_value_t = 0.5)]
    prior_h0: f64,

    /// Deepest partition level expanded.
    #[arg(long, default_value_t = 32)]
    depth_cap: u32,

    /// Quadrature nodes per axis for the empirical method's alternative.
    #[arg(long, default_value_t = 32, value_name = "N")]
    h1_nodes: usize,

    /// Estimate the empirical method's alternative by Monte Carlo with
    /// this many draws instead of quadrature.
    #[arg(long, value_name = "N")]
    h1_mc_samples: Option<usize>,
}

impl MethodFlags {
    fn build(&self, seed: u64) -> TestMethod {
        match self.method {
            MethodArg::Subjective => TestMethod::Subjective(SubjectiveConfig {
                c: self.c,
                prior_h0: self.prior_h0,
                depth_cap: self.depth_cap,
            }),
            MethodArg::Empirical => TestMethod::Empirical(EmpiricalConfig {
                c: self.c,
                prior_h0: self.prior_h0,
                depth_cap: self.depth_cap,
                h1_integration: match self.h1_mc_samples {
                    Some(samples) => H1Integration::MonteCarlo {
                        samples,
                        master_seed: seed,
                    },
                    None => H1Integration::TensorQuadrature {
                        nodes_per_axis: self.h1_nodes,
                    },
                },
            }),
        }
    }

    fn config_json(&self, seed: u64) -> serde_json::Value {
        let mut cfg = serde_json::json!({
            "method": self.method.name(),
            "c": self.c,
            "prior_h0": self.prior_h0,
            "depth_cap": self.depth_cap,
        });
        if matches!(self.method, MethodArg::Empirical) {
            cfg["h1_integration"] = match self.h1_mc_samples {
                Some(samples) => serde_json::json!({
                    "kind": "monte-carlo", "samples": samples, "master_seed": seed,
                }),
                None => serde_json::json!({
                    "kind": "tensor-quadrature", "nodes_per_axis": self.h1_nodes,
                }),
            };
        }
        cfg
    }
}

#[derive(Args)]
struct TestArgs {
    /// First sample: one number per line, `#` starts a comment.
    #[arg(long, value_name = "FILE", requires = "group2", conflicts_with = "csv")]
    group1: Option<PathBuf>,

    /// Second sample, same format as --group1.
    #[arg(long, value_name = "FILE", requires = "group1")]
    group2: Option<PathBuf>,

    /// Combined input instead: two-column CSV `value,group`, group 1 or 2.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,

    #[command(flatten)]
    method: MethodFlags,

    /// Seed for the Monte Carlo alternative (--h1-mc-samples).
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Print the report as JSON instead of text.
    #[arg(long)]
    json: bool,

    /// Also write report.json and manifest.json into this directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum StudyArg {
    /// Calibrated power curve over theta, plus a level decomposition.
    Power,
    /// Posterior mass on "different" under null data as group size grows.
    Null,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    scenario: ScenarioArg,

    #[command(flatten)]
    method: MethodFlags,

    /// Theta grid as START:STOP:STEP (inclusive) or a single value;
    /// default is a scenario-specific grid spanning its range.
    #[arg(long, value_name = "A:B:STEP")]
    theta_grid: Option<String>,

    /// Observations per group.
    #[arg(long, default_value_t = 50)]
    n: usize,

    /// Replicates per theta.
    #[arg(long, default_value_t = 100)]
    reps: usize,

    /// Null replicates behind the calibrated rejection threshold.
    #[arg(long, default_value_t = 500)]
    calib_reps: usize,

    /// Null quantile of -log BF used as the rejection threshold.
    #[arg(long, default_value_t = 0.95)]
    quantile: f64,

    /// Master seed; every replicate stream is derived from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, value_enum, default_value_t = StudyArg::Power)]
    study: StudyArg,

    /// Group sizes for --study null, comma separated, increasing.
    #[arg(long, value_name = "N,N,...", default_value = "10,20,50,100,200")]
    n_grid: String,

    /// Directory the CSVs and manifest are written into.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    /// A CSV written by `polyatree simulate`.
    #[arg(long, value_name = "FILE")]
    input: PathBuf,

    /// Output SVG path (default: the input with an .svg extension).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::usage(format!("cannot size thread pool: {e}")))?;
    }
    match cli.command {
        Command::Test(args) => cmd_test(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Plot(args) => cmd_plot(args),
    }
}

fn cmd_test(args: TestArgs) -> Result<(), CliError> {
    let (y1, y2, input_paths): (Vec<f64>, Vec<f64>, Vec<&Path>) = match (&args.csv, &args.group1) {
        (Some(csv), None) => {
            let (y1, y2) = io::read_combined_csv(csv)?;
            (y1, y2, vec![csv.as_path()])
        }
        (None, Some(g1)) => {
            let g2 = args.group2.as_ref().expect("clap enforces --group2");
            (
                io::read_sample(g1)?,
                io::read_sample(g2)?,
                vec![g1.as_path(), g2.as_path()],
            )
        }
        _ => {
            return Err(CliError::usage(
                "provide either --group1 and --group2, or --csv",
            ))
        }
    };

    let result = args.method.build(args.seed).run(&y1, &y2)?;

    let mut config = args.method.config_json(args.seed);
    config["n1"] = serde_json::json!(y1.len());
    config["n2"] = serde_json::json!(y2.len());
    let mut manifest = RunManifest::new("test", args.seed, config);
    for path in input_paths {
        manifest.add_input(path)?;
    }

    let report = serde_json::json!({
        "method": args.method.method.name(),
        "log_bf": result.log_bf_h0_over_h1,
        "posterior_h0": result.posterior_h0,
        "levels": result
            .level_contributions
            .iter()
            .map(|&(level, contribution)| {
                serde_json::json!({ "level": level, "contribution": contribution })
            })
            .collect::<Vec<_>>(),
        "warnings": result.warnings,
        "manifest": serde_json::to_value(&manifest)
            .map_err(|e| CliError::usage(format!("report serialization failed: {e}")))?,
    });

    if args.json {
        outln!(
            "{}",
            serde_json::to_string_pretty(&report)
                .map_err(|e| CliError::usage(format!("report serialization failed: {e}")))?
        );
    } else {
        outln!("method: {}", args.method.method.name());
        outln!("n1 = {}, n2 = {}", y1.len(), y2.len());
        outln!("log BF (H0/H1) = {}", sig6(result.log_bf_h0_over_h1));
        outln!("Pr(H0 | data) = {}", sig6(result.posterior_h0));
        outln!("junctions evaluated: {}", result.junction_count);
        outln!("level contributions:");
        for &(level, contribution) in &result.level_contributions {
            outln!("  {:>3}  {}", level, sig6(contribution));
        }
        if result.warnings.is_empty() {
            outln!("warnings: none");
        } else {
            for w in &result.warnings {
                outln!("warning: {w}");
            }
        }
    }

    if let Some(dir) = &args.out {
        let body = serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::usage(format!("report serialization failed: {e}")))?;
        io::write_output(&dir.join("report.json"), &format!("{body}\n"))?;
        let path = manifest.write_to(dir)?;
        eprintln!("wrote {} and {}", dir.join("report.json").display(), path.display());
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let kind = args.scenario.kind();
    let theta_grid = match &args.theta_grid {
        Some(text) => parse_theta_grid(text)?,
        None => default_theta_grid(kind),
    };
    let method = args.method.build(args.seed);

    let mut config = args.method.config_json(args.seed);
    config["scenario"] = serde_json::json!(args.scenario.name());
    config["n_per_group"] = serde_json::json!(args.n);
    config["replicates"] = serde_json::json!(args.reps);
    config["calibration_replicates"] = serde_json::json!(args.calib_reps);
    config["calibration_quantile"] = serde_json::json!(args.quantile);
    config["study"] = serde_json::json!(match args.study {
        StudyArg::Power => "power",
        StudyArg::Null => "null",
    });
    let mut written = Vec::new();

    match args.study {
        StudyArg::Power => {
            config["theta_grid"] = serde_json::json!(theta_grid);
            let power_config = PowerStudyConfig {
                scenario: kind,
                theta_grid: theta_grid.clone(),
                n_per_group: args.n,
                replicates: args.reps,
                calibration_quantile: args.quantile,
                method,
                master_seed: args.seed,
            };
            let calib_config = PowerStudyConfig {
                replicates: args.calib_reps,
                ..power_config.clone()
            };
            let threshold = calibrate_threshold(&calib_config)?;
            let curve = power_curve(&power_config, threshold)?;

            outln!(
                "threshold: {} ({} null quantile of -log BF over {} replicates)",
                sig6(threshold),
                sig6(args.quantile),
                args.calib_reps
            );
            outln!("theta     power_pt  power_ks  power_wc  mean_ph1");
            let mut table =
                CsvTable::new("theta,power_pt,power_ks,power_wilcoxon,mean_ph1,ph1_lo,ph1_hi");
            for p in &curve.points {
                outln!(
                    "{:<9} {:<9} {:<9} {:<9} {}",
                    sig6(p.theta),
                    sig6(p.power_pt),
                    sig6(p.power_ks),
                    sig6(p.power_wilcoxon),
                    sig6(p.mean_ph1)
                );
                table.row(&[
                    CsvCell::Float(p.theta),
                    CsvCell::Float(p.power_pt),
                    CsvCell::Float(p.power_ks),
                    CsvCell::Float(p.power_wilcoxon),
                    CsvCell::Float(p.mean_ph1),
                    CsvCell::Float(p.ph1_lo),
                    CsvCell::Float(p.ph1_hi),
                ]);
            }
            let power_path = args.out.join("power.csv");
            table.write_to(&power_path)?;
            written.push(power_path);

            // Decompose the evidence by level at the middle of the grid,
            // where the alternative is active but not saturated.
            let mid_theta = theta_grid[theta_grid.len() / 2];
            config["level_decomposition_theta"] = serde_json::json!(mid_theta);
            let levels = level_decomposition_study(&power_config, mid_theta)?;
            let mut level_table = CsvTable::new("level,min,q1,median,q3,max");
            for l in &levels {
                level_table.row(&[
                    CsvCell::Int(u64::from(l.level)),
                    CsvCell::Float(l.min),
                    CsvCell::Float(l.q1),
                    CsvCell::Float(l.median),
                    CsvCell::Float(l.q3),
                    CsvCell::Float(l.max),
                ]);
            }
            let levels_path = args.out.join("levels.csv");
            level_table.write_to(&levels_path)?;
            written.push(levels_path);
        }
        StudyArg::Null => {
            let n_grid = parse_n_grid(&args.n_grid)?;
            config["n_grid"] = serde_json::json!(n_grid);
            let points =
                null_consistency_experiment(&n_grid, args.reps, &method, args.seed)?;
            outln!("n         mean_ph1  [5%, 95%]");
            let mut table = CsvTable::new("n,mean_ph1,ph1_lo,ph1_hi");
            for p in &points {
                outln!(
                    "{:<9} {:<9} [{}, {}]",
                    p.n_per_group,
                    sig6(p.mean_ph1),
                    sig6(p.ph1_lo),
                    sig6(p.ph1_hi)
                );
                table.row(&[
                    CsvCell::Int(p.n_per_group as u64),
                    CsvCell::Float(p.mean_ph1),
                    CsvCell::Float(p.ph1_lo),
                    CsvCell::Float(p.ph1_hi),
                ]);
            }
            let null_path = args.out.join("null.csv");
            table.write_to(&null_path)?;
            written.push(null_path);
        }
    }

    let manifest = RunManifest::new("simulate", args.seed, config);
    written.push(manifest.write_to(&args.out)?);
    for path in &written {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_plot(args: PlotArgs) -> Result<(), CliError> {
    let (header, rows) = read_plot_csv(&args.input)?;
    let columns: Vec<&str> = header.split(',').collect();
    let col = |name: &str| columns.iter().position(|c| *c == name);

    let svg = if let (Some(x), Some(pt), Some(ks), Some(wc)) = (
        col("theta"),
        col("power_pt"),
        col("power_ks"),
        col("power_wilcoxon"),
    ) {
        let series = |idx: usize, label: &str, stroke, dash| svg::Series {
            label: label.to_string(),
            points: rows.iter().map(|r| (r[x], r[idx])).collect(),
            stroke,
            dash,
        };
        svg::line_chart(
            &[
                series(pt, "Polya tree", "#1f77b4", None),
                series(ks, "Kolmogorov-Smirnov", "#d62728", Some("6 3")),
                series(wc, "Wilcoxon", "#2ca02c", Some("2 3")),
            ],
            "theta",
            "power",
            true,
        )
    } else if let (Some(level), Some(min), Some(q1), Some(median), Some(q3), Some(max)) = (
        col("level"),
        col("min"),
        col("q1"),
        col("median"),
        col("q3"),
        col("max"),
    ) {
        let boxes: Vec<svg::BoxRow> = rows
            .iter()
            .map(|r| svg::BoxRow {
                category: r[level] as u64,
                min: r[min],
                q1: r[q1],
                median: r[median],
                q3: r[q3],
                max: r[max],
            })
            .collect();
        svg::box_plot(&boxes, "level", "log BF contribution")
    } else if let (Some(n), Some(mean), Some(lo), Some(hi)) = (
        col("n"),
        col("mean_ph1"),
        col("ph1_lo"),
        col("ph1_hi"),
    ) {
        let series = |idx: usize, label: &str, dash| svg::Series {
            label: label.to_string(),
            points: rows.iter().map(|r| (r[n], r[idx])).collect(),
            stroke: "#1f77b4",
            dash,
        };
        svg::line_chart(
            &[
                series(mean, "mean Pr(H1)", None),
                series(lo, "5% quantile", Some("6 3")),
                series(hi, "95% quantile", Some("6 3")),
            ],
            "n per group",
            "Pr(H1 | data)",
            true,
        )
    } else {
        return Err(CliError::usage(format!(
            "{}: unrecognized CSV header {header:?}",
            args.input.display()
        )));
    };

    let out = args
        .out
        .unwrap_or_else(|| args.input.with_extension("svg"));
    io::write_output(&out, &svg)?;
    eprintln!("wrote {}", out.display());
    Ok(())
}

/// First line is the header; every later non-empty line is a float row of
/// the same width.
fn read_plot_csv(path: &Path) -> Result<(String, Vec<Vec<f64>>), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| CliError::usage(format!("{}: empty CSV", path.display())))?
        .trim()
        .to_string();
    let width = header.split(',').count();
    let mut rows = Vec::new();
    for line in lines {
        let row: Vec<f64> = line
            .split(',')
            .map(|cell| cell.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| {
                CliError::usage(format!("{}: malformed CSV row {line:?}", path.display()))
            })?;
        if row.len() != width {
            return Err(CliError::usage(format!(
                "{}: row has {} cells, header has {width}",
                path.display(),
                row.len()
            )));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::usage(format!(
            "{}: CSV has a header but no data rows",
            path.display()
        )));
    }
    Ok((header, rows))
}

/// `A:B:STEP` (inclusive endpoints) or a single value.
fn parse_theta_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::usage(format!("bad theta grid {text:?}: expected A:B:STEP"));
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [single] => {
            let v: f64 = single.trim().parse().map_err(|_| bad())?;
            Ok(vec![v])
        }
        [a, b, step] => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            let step: f64 = step.trim().parse().map_err(|_| bad())?;
            if !a.is_finite() || !b.is_finite() || !(step > 0.0) || b < a {
                return Err(CliError::usage(format!(
                    "bad theta grid {text:?}: need finite A <= B and STEP > 0"
                )));
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            // Clamp to B so the last point cannot drift past the scenario
            // range by float accumulation.
            Ok((0..count).map(|i| (a + i as f64 * step).min(b)).collect())
        }
        _ => Err(bad()),
    }
}

fn parse_n_grid(text: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| CliError::usage(format!("bad n grid entry {part:?}")))
        })
        .collect()
}

fn default_theta_grid(kind: ScenarioKind) -> Vec<f64> {
    match kind {
        ScenarioKind::MeanShift | ScenarioKind::Mixture | ScenarioKind::LognormalMean => {
            vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0]
        }
        ScenarioKind::VarianceShift | ScenarioKind::LognormalVariance => {
            vec![1.0, 1.25, 1.5, 2.0, 2.5, 3.0]
        }
        ScenarioKind::Tails => vec![1e-3, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0],
        ScenarioKind::Skew => vec![1.0, 2.5, 4.0, 5.5, 7.0, 8.5, 10.0],
        ScenarioKind::Outlier => vec![0.0, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0],
    }
}
