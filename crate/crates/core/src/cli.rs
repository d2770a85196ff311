//! The `tripath` command-line front end.
//!
//! Exit codes: 0 success, 2 unreadable or malformed input, 3 domain or
//! validity error, 4 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::campaign::{run_campaign, sweep_corrected_kappa, sweep_rate_dependent};
use crate::config::{ExperimentConfigFile, OutputFormat, SweepSection};
use crate::detector::characterize_deadtime;
use crate::error::{Error, Result};
use crate::fixtures::{pairwise_visibilities, Fixtures, GratingColumn};
use crate::formats;
use crate::interference::{delta, epsilon, kappa};
use crate::optics::qber_from_visibility;
use crate::stats::{fit_normal, summary, FitMethod, NormalFit, Summary};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Io(_) => EXIT_PARSE,
        Error::Domain(_)
        | Error::Validity(_)
        | Error::DimensionMismatch { .. }
        | Error::BadPort { .. }
        | Error::UndefinedVisibility(_)
        | Error::NonInvertible { .. }
        | Error::Unsorted(_)
        | Error::TooLarge(_) => EXIT_DOMAIN,
        Error::UndefinedKappa | Error::NoSolution { .. } | Error::IllConditioned(_) | Error::Degenerate(_) => {
            EXIT_NUMERICAL
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "tripath", version, about = "Three-path interference and SPAD deadtime toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a Monte Carlo campaign or a deterministic correction sweep.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the output directory in the config file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Fail when any grid rate could not be simulated.
        #[arg(long)]
        strict: bool,
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
    },
    /// Evaluate epsilon, delta and kappa for measured rate octets.
    Kappa {
        rates_file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
    },
    /// Fit a normal distribution to a list of kappa values.
    Fit {
        kappa_file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Theoretical two-path visibilities and the QBER bound.
    Visibility {
        /// Grating column of the shipped fixtures.
        #[arg(long, conflicts_with = "efficiencies", default_value = "experiment")]
        fixture: String,
        /// Path efficiencies A,B,C as fractions.
        #[arg(long, value_delimiter = ',')]
        efficiencies: Option<Vec<f64>>,
        /// Measured visibility in percent, converted to a QBER.
        #[arg(long, allow_negative_numbers = true)]
        measured: Option<f64>,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
    },
    /// Deadtime from superposition measurements.
    Deadtime {
        measurements_file: PathBuf,
        /// Include the per-row estimates.
        #[arg(long)]
        per_row: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Simulate {
            config,
            seed,
            out,
            strict,
            format,
        } => cmd_simulate(&config, seed, out.as_deref(), strict, format, stdout),
        Command::Kappa { rates_file, out, format } => cmd_kappa(&rates_file, out.as_deref(), format, stdout),
        Command::Fit { kappa_file, out } => cmd_fit(&kappa_file, out.as_deref(), stdout),
        Command::Visibility {
            fixture,
            efficiencies,
            measured,
            format,
        } => cmd_visibility(&fixture, efficiencies.as_deref(), measured, format, stdout),
        Command::Deadtime {
            measurements_file,
            per_row,
            out,
        } => cmd_deadtime(&measurements_file, per_row, out.as_deref(), stdout),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn open(path: &Path) -> Result<BufReader<fs::File>> {
    fs::File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Writes `bytes` to `out`, or to stdout when no path is given.
fn emit(out: Option<&Path>, bytes: &[u8], stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, bytes)?;
        }
        None => stdout.write_all(bytes)?,
    }
    Ok(())
}

fn json_bytes<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    formats::write_json(value, &mut buf)?;
    Ok(buf)
}

#[derive(Serialize)]
struct SummaryTable<'a> {
    summaries: &'a [crate::campaign::RateSummary],
    errors: &'a [crate::campaign::RateError],
}

pub fn cmd_simulate(
    config_path: &Path,
    seed: Option<u64>,
    out_dir: Option<&Path>,
    strict: bool,
    format: Option<OutputFormat>,
    stdout: &mut dyn Write,
) -> Result<i32> {
    let file = ExperimentConfigFile::parse(&read_file(config_path)?)?;
    let config = file.campaign_config(seed)?;
    let format = format.unwrap_or(file.output.format);
    let dir = out_dir.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(&file.output.dir));
    let ext = match format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    };
    let data_path = dir.join(format!("{}.{ext}", file.output.stem));
    let meta_path = dir.join(format!("{}.meta.json", file.output.stem));

    let mut data = Vec::new();
    let problems: Vec<String> = match &file.sweep {
        Some(SweepSection::CorrectedKappa { assumed_taus }) => {
            let sweep = sweep_corrected_kappa(file.detector_true.tau0, assumed_taus, &config.rate_grid)?;
            match format {
                OutputFormat::Csv => formats::write_correction_sweep_csv(&sweep, &config.rate_grid, &mut data)?,
                OutputFormat::Json => formats::write_json(&sweep, &mut data)?,
            }
            sweep.warnings
        }
        Some(SweepSection::RateDependent { assumed_tau }) => {
            let sweep = sweep_rate_dependent(&file.detector_true, *assumed_tau, &config.rate_grid)?;
            match format {
                OutputFormat::Csv => formats::write_rate_dependent_csv(&sweep, &mut data)?,
                OutputFormat::Json => formats::write_json(&sweep, &mut data)?,
            }
            for x in &sweep.crossings {
                writeln!(stdout, "zero crossing at {}/s", formats::fmt_float(*x))?;
            }
            sweep.warnings
        }
        None => {
            let result = run_campaign(&config)?;
            match format {
                OutputFormat::Csv => formats::write_campaign_csv(&result, &mut data)?,
                OutputFormat::Json => formats::write_json(
                    &SummaryTable {
                        summaries: &result.summaries,
                        errors: &result.errors,
                    },
                    &mut data,
                )?,
            }
            result
                .errors
                .iter()
                .map(|e| format!("rate {}/s: {}", formats::fmt_float(e.rate_hz), e.message))
                .collect()
        }
    };

    let meta = json_bytes(&formats::Sidecar::new(&config, problems.clone()))?;
    fs::create_dir_all(&dir)?;
    fs::write(&data_path, &data)?;
    fs::write(&meta_path, &meta)?;
    writeln!(stdout, "wrote {}", data_path.display())?;
    writeln!(stdout, "wrote {}", meta_path.display())?;
    for p in &problems {
        writeln!(stdout, "warning: {p}")?;
    }
    if strict && !problems.is_empty() {
        return Err(Error::Validity(format!("{} grid rate(s) failed", problems.len())));
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct OctetReport {
    index: usize,
    epsilon: f64,
    delta: f64,
    kappa: Option<f64>,
    undefined: bool,
}

#[derive(Debug, Serialize)]
struct FitReport {
    method: FitMethod,
    fit: Option<NormalFit>,
    error: Option<String>,
}

#[derive(Debug, Serialize)]
struct KappaReport {
    octets: Vec<OctetReport>,
    n_defined: usize,
    n_undefined: usize,
    summary: Option<Summary>,
    fits: Vec<FitReport>,
}

fn fit_reports(values: &[f64]) -> Vec<FitReport> {
    [FitMethod::MomentsOnData, FitMethod::LeastSquaresOnHistogram]
        .into_iter()
        .map(|method| match fit_normal(values, method) {
            Ok(fit) => FitReport {
                method,
                fit: Some(fit),
                error: None,
            },
            Err(e) => FitReport {
                method,
                fit: None,
                error: Some(e.to_string()),
            },
        })
        .collect()
}

pub fn cmd_kappa(rates_file: &Path, out: Option<&Path>, format: OutputFormat, stdout: &mut dyn Write) -> Result<i32> {
    let octets = formats::read_rate_octets(open(rates_file)?)?;
    let reports: Vec<OctetReport> = octets
        .iter()
        .enumerate()
        .map(|(index, (o, _))| {
            let k = kappa(o).ok();
            OctetReport {
                index,
                epsilon: epsilon(o),
                delta: delta(o),
                kappa: k,
                undefined: k.is_none(),
            }
        })
        .collect();
    let values: Vec<f64> = reports.iter().filter_map(|r| r.kappa).collect();

    let bytes = match format {
        OutputFormat::Json => json_bytes(&KappaReport {
            n_defined: values.len(),
            n_undefined: reports.len() - values.len(),
            summary: summary(&values).ok(),
            fits: fit_reports(&values),
            octets: reports,
        })?,
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Error::Io(e.to_string());
            w.write_record(["index", "epsilon", "delta", "kappa"]).map_err(io)?;
            for r in &reports {
                w.write_record([
                    r.index.to_string(),
                    formats::fmt_float(r.epsilon),
                    formats::fmt_float(r.delta),
                    r.kappa.map(formats::fmt_float).unwrap_or_else(|| "undefined".into()),
                ])
                .map_err(io)?;
            }
            w.into_inner().map_err(|e| Error::Io(e.to_string()))?
        }
    };
    emit(out, &bytes, stdout)?;
    Ok(EXIT_OK)
}

pub fn cmd_fit(kappa_file: &Path, out: Option<&Path>, stdout: &mut dyn Write) -> Result<i32> {
    let values = formats::read_values(open(kappa_file)?)?;
    let fits = [FitMethod::MomentsOnData, FitMethod::LeastSquaresOnHistogram]
        .into_iter()
        .map(|m| fit_normal(&values, m))
        .collect::<Result<Vec<_>>>()?;
    emit(out, &json_bytes(&fits)?, stdout)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct VisibilityReport {
    efficiencies: [f64; 3],
    paths: [&'static str; 3],
    visibility_percent: [f64; 3],
    measured_visibility_percent: Option<f64>,
    qber_percent: Option<f64>,
}

pub fn cmd_visibility(
    fixture: &str,
    efficiencies: Option<&[f64]>,
    measured: Option<f64>,
    format: OutputFormat,
    stdout: &mut dyn Write,
) -> Result<i32> {
    let eff: [f64; 3] = match efficiencies {
        Some(e) => {
            if e.iter().any(|x| !(*x > 0.0 && *x <= 1.0)) {
                return Err(Error::Domain(format!("efficiencies must lie in (0, 1], got {e:?}")));
            }
            e.try_into()
                .map_err(|_| Error::DimensionMismatch { expected: 3, got: e.len() })?
        }
        None => {
            let column: GratingColumn = fixture.parse().map_err(|e: Error| Error::Domain(e.to_string()))?;
            Fixtures::shipped().path_efficiencies(column)
        }
    };
    let qber = match measured {
        Some(v) => Some(100.0 * qber_from_visibility(v / 100.0)?),
        None => None,
    };
    let report = VisibilityReport {
        efficiencies: eff,
        paths: ["AB", "AC", "BC"],
        visibility_percent: pairwise_visibilities(eff)?,
        measured_visibility_percent: measured,
        qber_percent: qber,
    };
    match format {
        OutputFormat::Json => stdout.write_all(&json_bytes(&report)?)?,
        OutputFormat::Csv => {
            writeln!(stdout, "paths,visibility_percent")?;
            for (p, v) in report.paths.iter().zip(report.visibility_percent) {
                writeln!(stdout, "{p},{v:.6}")?;
            }
            if let (Some(v), Some(q)) = (measured, qber) {
                writeln!(stdout, "measured {v:.2}% -> qber {q:.3}%")?;
            }
        }
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct DeadtimeReport {
    tau_s: f64,
    uncertainty_s: f64,
    tau_ns: f64,
    uncertainty_ns: f64,
    rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    per_row_s: Option<Vec<f64>>,
}

pub fn cmd_deadtime(path: &Path, per_row: bool, out: Option<&Path>, stdout: &mut dyn Write) -> Result<i32> {
    let rows = formats::read_superposition(open(path)?)?;
    let est = characterize_deadtime(&rows)?;
    let report = DeadtimeReport {
        tau_s: est.tau,
        uncertainty_s: est.uncertainty,
        tau_ns: est.tau * 1e9,
        uncertainty_ns: est.uncertainty * 1e9,
        rows: rows.len(),
        per_row_s: per_row.then_some(est.per_measurement),
    };
    emit(out, &json_bytes(&report)?, stdout)?;
    Ok(EXIT_OK)
}
