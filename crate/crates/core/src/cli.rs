//! `percolate` command-line front end.
//!
//! Subcommands: `sweep` (curve CSVs), `threshold` (crossing estimate JSON),
//! `table` (all neighborhoods) and `fit` (power law over a points CSV).
//! Every run writes `<subcommand>_manifest.json` next to its outputs with
//! the resolved configuration in canonical form.
//!
//! Exit codes:
//!
//! | code | meaning                                            |
//! |------|----------------------------------------------------|
//! | 0    | success                                            |
//! | 2    | invalid flags, configuration or fit input          |
//! | 3    | no crossing or ambiguous crossing                  |
//! | 4    | I/O failure                                        |
//! | 5    | sweep aborted; partial results flushed             |

use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::experiment::{
    estimate_threshold, run_sweep_with, PGrid, PercolationCurve, SweepError, SweepOptions,
    SweepPlan, ThresholdEstimate, ThresholdRequest, COARSE_FACTOR,
};
use crate::fitting::{fit_power_law, read_points_csv, write_fit_csv, Weighting};
use crate::format::fmt_sig;
use crate::neighborhood::{Neighborhood, CANONICAL_NAMES};
use crate::REFERENCE_THRESHOLDS;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_240_917;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

/// Environment variable that overrides the default output directory.
pub const OUT_DIR_ENV: &str = "PERCOLATE_OUT";

pub const RNG_DESCRIPTION: &str =
    "ChaCha8; key = master_seed (u64 LE) || L (u64 LE) || 16 zero bytes; stream = realization index; value = (u64 >> 11) * 2^-53";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Crossing(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Aborted(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Crossing(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Aborted(_) => 5,
        }
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// L = 32, 64; N = 10^4; Δp = 2·10⁻³.
    #[default]
    Desk,
    /// L = 63, 100; N = 10^5; Δp = 2·10⁻⁴.
    Paper,
}

impl Preset {
    pub fn sizes(self) -> Vec<usize> {
        match self {
            Preset::Desk => vec![32, 64],
            Preset::Paper => vec![63, 100],
        }
    }

    pub fn realizations(self) -> u64 {
        match self {
            Preset::Desk => 10_000,
            Preset::Paper => 100_000,
        }
    }

    pub fn delta_p(self) -> f64 {
        match self {
            Preset::Desk => 2e-3,
            Preset::Paper => 2e-4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "percolate",
    version,
    about = "Site percolation thresholds on the simple cubic lattice"
)]
pub struct Cli {
    /// TOML file with default values for any flag; unknown keys are rejected.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spanning-probability curves, one CSV per (neighborhood, L).
    Sweep(RunArgs),
    /// Threshold from the crossing of the two largest sizes' curves.
    Threshold(RunArgs),
    /// Thresholds of all seven neighborhoods (or the listed ones).
    Table(RunArgs),
    /// Power-law fit p_c = A z^-gamma over a `label,z,p_c,u` CSV.
    Fit(FitArgs),
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// Neighborhood names, comma separated (NN, 2NN, 3NN, NN+2NN, ...).
    #[arg(long, value_delimiter = ',')]
    pub neighborhood: Vec<String>,
    /// Lattice sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
    /// Grid as `min,max,step`. For threshold/table: search window and Δp.
    #[arg(long = "p")]
    pub p: Option<String>,
    #[arg(long)]
    pub realizations: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker thread hint; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, env = OUT_DIR_ENV)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
}

#[derive(Debug, Args, Default)]
pub struct FitArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub weighting: Option<Weighting>,
    #[arg(long, env = OUT_DIR_ENV)]
    pub out: Option<PathBuf>,
}

/// Keys accepted in a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub neighborhood: Option<Vec<String>>,
    pub sizes: Option<Vec<usize>>,
    pub p: Option<String>,
    pub realizations: Option<u64>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub preset: Option<Preset>,
    pub input: Option<PathBuf>,
    pub weighting: Option<Weighting>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config file: {e}")))
    }

    fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridArg {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl std::str::FromStr for GridArg {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || CliError::Config(format!("--p expects min,max,step; got {s:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let v: Vec<f64> = parts
            .iter()
            .map(|x| x.parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        Ok(GridArg {
            min: v[0],
            max: v[1],
            step: v[2],
        })
    }
}

/// Fully resolved run settings, recorded verbatim in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: String,
    pub neighborhoods: Vec<String>,
    pub sizes: Vec<usize>,
    pub grid: Option<GridArg>,
    pub delta_p: f64,
    #[serde(rename = "N")]
    pub realizations: u64,
    pub master_seed: u64,
    pub threads: Option<usize>,
    pub out: PathBuf,
    pub preset: Preset,
    pub input: Option<PathBuf>,
    pub weighting: Option<Weighting>,
}

impl RunConfig {
    fn parsed_neighborhoods(&self) -> Vec<Neighborhood> {
        self.neighborhoods
            .iter()
            .map(|n| n.parse().expect("validated during resolution"))
            .collect()
    }

    fn sweep_options(&self) -> SweepOptions {
        SweepOptions {
            threads: self.threads,
            ..Default::default()
        }
    }
}

fn parse_neighborhoods(names: &[String]) -> Result<Vec<String>, CliError> {
    names
        .iter()
        .map(|n| {
            n.parse::<Neighborhood>()
                .map(|n| n.name())
                .map_err(|e| CliError::Config(e.to_string()))
        })
        .collect()
}

fn resolve_run(subcommand: &str, args: RunArgs, file: ConfigFile) -> Result<RunConfig, CliError> {
    let preset = args.preset.or(file.preset).unwrap_or_default();
    let names = if !args.neighborhood.is_empty() {
        args.neighborhood
    } else {
        file.neighborhood.unwrap_or_default()
    };
    let neighborhoods = if names.is_empty() {
        if subcommand == "table" {
            CANONICAL_NAMES.iter().map(|s| s.to_string()).collect()
        } else {
            return Err(CliError::Config(format!(
                "--neighborhood is required; valid names are {}",
                CANONICAL_NAMES.join(", ")
            )));
        }
    } else {
        parse_neighborhoods(&names)?
    };

    let mut sizes = if !args.sizes.is_empty() {
        args.sizes
    } else {
        file.sizes.unwrap_or_else(|| preset.sizes())
    };
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.iter().any(|&l| l < 2) {
        return Err(CliError::Config("lattice sizes must be at least 2".into()));
    }
    if subcommand != "sweep" {
        if sizes.len() < 2 {
            return Err(CliError::Config(
                "a crossing needs two distinct sizes".into(),
            ));
        }
        sizes = sizes[sizes.len() - 2..].to_vec();
    }

    let grid = match args.p.or(file.p) {
        Some(s) => Some(s.parse::<GridArg>()?),
        None => None,
    };
    let delta_p = grid.map_or(preset.delta_p(), |g| g.step);
    if let Some(g) = grid {
        PGrid::new(g.min, g.max, g.step).map_err(|e| CliError::Config(e.to_string()))?;
    }
    let realizations = args
        .realizations
        .or(file.realizations)
        .unwrap_or(preset.realizations());
    if realizations == 0 {
        return Err(CliError::Config("--realizations must be at least 1".into()));
    }
    let threads = args.threads.or(file.threads);
    if threads == Some(0) {
        return Err(CliError::Config("--threads must be at least 1".into()));
    }
    Ok(RunConfig {
        subcommand: subcommand.to_string(),
        neighborhoods,
        sizes,
        grid,
        delta_p,
        realizations,
        master_seed: args.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        threads,
        out: args.out.or(file.out).unwrap_or_else(|| PathBuf::from(".")),
        preset,
        input: None,
        weighting: None,
    })
}

fn resolve_fit(args: FitArgs, file: ConfigFile) -> Result<RunConfig, CliError> {
    let input = args
        .input
        .or(file.input)
        .ok_or_else(|| CliError::Config("--input is required".into()))?;
    Ok(RunConfig {
        subcommand: "fit".into(),
        neighborhoods: vec![],
        sizes: vec![],
        grid: None,
        delta_p: 0.0,
        realizations: 0,
        master_seed: 0,
        threads: None,
        out: args.out.or(file.out).unwrap_or_else(|| PathBuf::from(".")),
        preset: Preset::default(),
        input: Some(input),
        weighting: Some(args.weighting.or(file.weighting).unwrap_or_default()),
    })
}

/// Parses flags plus the optional config file into a [`RunConfig`].
pub fn resolve(cli: Cli) -> Result<RunConfig, CliError> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Sweep(a) => resolve_run("sweep", a, file),
        Command::Threshold(a) => resolve_run("threshold", a, file),
        Command::Table(a) => resolve_run("table", a, file),
        Command::Fit(a) => resolve_fit(a, file),
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    rng: &'static str,
    status: &'a str,
    complete: bool,
    wall_time_seconds: f64,
    outputs: &'a [String],
}

struct Run<'a> {
    config: &'a RunConfig,
    started: Instant,
    outputs: Vec<String>,
}

impl<'a> Run<'a> {
    /// Creates the output directory and writes a provisional manifest, so an
    /// unwritable destination fails before any computation.
    fn start(config: &'a RunConfig) -> Result<Self, CliError> {
        fs::create_dir_all(&config.out).map_err(|e| CliError::io(&config.out, e))?;
        let run = Run {
            config,
            started: Instant::now(),
            outputs: Vec::new(),
        };
        run.write_manifest("running", false)?;
        Ok(run)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.config.out.join(name)
    }

    fn write_file(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
    ) -> Result<(), CliError> {
        let path = self.path(name);
        let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut w = BufWriter::new(file);
        body(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| CliError::io(&path, e))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        self.write_file(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value).map_err(std::io::Error::other)?;
            writeln!(w)
        })
    }

    fn write_manifest(&self, status: &str, complete: bool) -> Result<(), CliError> {
        let manifest = Manifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            tool: "percolate",
            version: env!("CARGO_PKG_VERSION"),
            config: self.config,
            rng: RNG_DESCRIPTION,
            status,
            complete,
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
            outputs: &self.outputs,
        };
        let path = self.path(&format!("{}_manifest.json", self.config.subcommand));
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))
    }
}

fn file_stem(neighborhood: &str) -> String {
    neighborhood.to_string()
}

/// Writes one curve CSV per (neighborhood, L).
pub fn cmd_sweep(config: &RunConfig) -> Result<(), CliError> {
    let mut run = Run::start(config)?;
    let grid = match config.grid {
        Some(g) => PGrid::new(g.min, g.max, g.step),
        None => PGrid::aligned(0.0, 1.0, config.delta_p * COARSE_FACTOR),
    }
    .map_err(|e| CliError::Config(e.to_string()))?;

    let mut aborted = None;
    for spec in config.parsed_neighborhoods() {
        let plan = SweepPlan::new(
            spec,
            config.sizes.clone(),
            grid.clone(),
            config.realizations,
            config.master_seed,
        )
        .map_err(|e| CliError::Config(e.to_string()))?;
        let curves = match run_sweep_with(&plan, &config.sweep_options()) {
            Ok(curves) => curves,
            Err(SweepError::Aborted { reason, partial }) => {
                aborted = Some(reason.to_string());
                partial
            }
            Err(e) => return Err(CliError::Config(e.to_string())),
        };
        for curve in &curves {
            write_curve(&mut run, curve)?;
        }
        if aborted.is_some() {
            break;
        }
    }
    match aborted {
        Some(reason) => {
            run.write_manifest(&format!("aborted: {reason}"), false)?;
            Err(CliError::Aborted(format!(
                "sweep aborted ({reason}); partial results flushed"
            )))
        }
        None => run.write_manifest("ok", true),
    }
}

fn write_curve(run: &mut Run, curve: &PercolationCurve) -> Result<(), CliError> {
    let name = format!(
        "curve_{}_L{}.csv",
        file_stem(&curve.neighborhood),
        curve.side
    );
    run.write_file(&name, |w| curve.write_csv(w))
}

fn threshold_request(config: &RunConfig, spec: Neighborhood) -> ThresholdRequest {
    ThresholdRequest {
        neighborhood: spec,
        sizes: (config.sizes[0], config.sizes[1]),
        delta_p: config.delta_p,
        realizations: config.realizations,
        master_seed: config.master_seed,
        window: config.grid.map(|g| (g.min, g.max)),
    }
}

/// Writes `threshold_<name>.json` per requested neighborhood.
pub fn cmd_threshold(config: &RunConfig) -> Result<(), CliError> {
    let mut run = Run::start(config)?;
    let mut failures = Vec::new();
    for spec in config.parsed_neighborhoods() {
        let name = spec.name();
        match estimate_threshold(&threshold_request(config, spec), &config.sweep_options()) {
            Ok(est) => run.write_json(&format!("threshold_{}.json", file_stem(&name)), &est)?,
            Err(e) => {
                run.write_json(
                    &format!("threshold_{}.json", file_stem(&name)),
                    &serde_json::json!({
                        "neighborhood": name,
                        "error": e.failure.to_string(),
                        "stages": e.history,
                    }),
                )?;
                failures.push(e.to_string());
            }
        }
    }
    finish_with_failures(run, failures)
}

fn finish_with_failures(run: Run, failures: Vec<String>) -> Result<(), CliError> {
    if failures.is_empty() {
        run.write_manifest("ok", true)
    } else {
        run.write_manifest("crossing failures", true)?;
        Err(CliError::Crossing(failures.join("; ")))
    }
}

/// One row of the threshold table.
#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub neighborhood: String,
    pub z: usize,
    pub p_c: Option<f64>,
    pub u: Option<f64>,
    pub bracket: Option<(f64, f64)>,
    pub reference_p_c: Option<f64>,
    pub error: Option<String>,
    pub estimate: Option<ThresholdEstimate>,
}

/// Estimates every neighborhood; failures are recorded per row.
pub fn table_rows(config: &RunConfig) -> Vec<TableRow> {
    config
        .parsed_neighborhoods()
        .into_iter()
        .map(|spec| {
            let name = spec.name();
            let z = spec.z();
            let reference_p_c = REFERENCE_THRESHOLDS
                .iter()
                .find(|r| r.0 == name)
                .map(|r| r.2);
            let result =
                estimate_threshold(&threshold_request(config, spec), &config.sweep_options());
            match result {
                Ok(est) => {
                    eprintln!(
                        "{name:>11}  z = {z:>2}  p_c = {:.5} ± {:.5}",
                        est.p_c, est.u
                    );
                    TableRow {
                        neighborhood: name,
                        z,
                        p_c: Some(est.p_c),
                        u: Some(est.u),
                        bracket: Some(est.bracket),
                        reference_p_c,
                        error: None,
                        estimate: Some(est),
                    }
                }
                Err(e) => {
                    eprintln!("{name:>11}  z = {z:>2}  failed: {}", e.failure);
                    TableRow {
                        neighborhood: name,
                        z,
                        p_c: None,
                        u: None,
                        bracket: None,
                        reference_p_c,
                        error: Some(e.failure.to_string()),
                        estimate: None,
                    }
                }
            }
        })
        .collect()
}

fn write_table_csv(rows: &[TableRow], w: &mut dyn Write) -> std::io::Result<()> {
    let opt = |x: Option<f64>| x.map(fmt_sig).unwrap_or_default();
    writeln!(
        w,
        "neighborhood,z,p_c,u,bracket_lo,bracket_hi,reference_p_c,error"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.neighborhood,
            r.z,
            opt(r.p_c),
            opt(r.u),
            opt(r.bracket.map(|b| b.0)),
            opt(r.bracket.map(|b| b.1)),
            opt(r.reference_p_c),
            r.error
                .as_deref()
                .map(|e| format!("\"{}\"", e.replace('"', "'")))
                .unwrap_or_default()
        )?;
    }
    Ok(())
}

/// Writes `table.csv` and `table.json`.
pub fn cmd_table(config: &RunConfig) -> Result<Vec<TableRow>, CliError> {
    let mut run = Run::start(config)?;
    let rows = table_rows(config);
    run.write_file("table.csv", |w| write_table_csv(&rows, w))?;
    run.write_json("table.json", &rows)?;
    let failures: Vec<String> = rows
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| format!("{}: {e}", r.neighborhood)))
        .collect();
    finish_with_failures(run, failures)?;
    Ok(rows)
}

/// Writes `fit.json` and the plot-ready `fit_curve.csv`.
pub fn cmd_fit(config: &RunConfig) -> Result<(), CliError> {
    let input = config.input.as_ref().expect("fit config has an input");
    let text = fs::read(input).map_err(|e| CliError::io(input, e))?;
    let points = read_points_csv(&text[..])
        .map_err(|e| CliError::Config(format!("{}: {e}", input.display())))?;
    let weighting = config.weighting.unwrap_or_default();
    let fit = fit_power_law(&points, weighting)
        .map_err(|e| CliError::Config(format!("fit rejected: {e}")))?;
    let mut run = Run::start(config)?;
    run.write_json("fit.json", &fit)?;
    run.write_file("fit_curve.csv", |w| write_fit_csv(&points, &fit, w))?;
    run.write_manifest("ok", true)
}

pub fn execute(config: &RunConfig) -> Result<(), CliError> {
    match config.subcommand.as_str() {
        "sweep" => cmd_sweep(config),
        "threshold" => cmd_threshold(config),
        "table" => cmd_table(config).map(|_| ()),
        "fit" => cmd_fit(config),
        other => Err(CliError::Config(format!("unknown subcommand {other}"))),
    }
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match resolve(cli).and_then(|config| execute(&config)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
