//! Command line front end.
//!
//! Every output file starts with the effective configuration, as `#` comment
//! lines for CSV and as a `config` member for JSON, so a run can be
//! reproduced from its artifacts alone.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration or usage error,
//! 3 numerical failure (convergence, horizon too short), 4 failed checks.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::angle::{circle_distance, Angle};
use crate::config::{Config, ConfigError, OutputFormat};
use crate::error::Error as CoreError;
use crate::geodesic::{
    integrate, numerical_return_length, section_verdict, trace_section, EventKind, GeodesicState, IntegratorSettings,
    SectionLength, SectionTrace, SectionVerdict,
};
use crate::metric::{Chart, GluedMetric};
use crate::period::{classify_scan, PeriodReport, TransitionMap};
use crate::verifier::{rational_closure, Fraction, RadiusPair};

/// Numerical return lengths are matched to this direction tolerance.
const RETURN_DIRECTION_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "glued-sphere", version, about = "Sections of a foliation on two glued disks")]
pub struct Cli {
    /// TOML configuration file; defaults are used for missing keys.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides `verify.seed`.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Overrides `output.directory`.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the period of every sample angle under the transition map.
    ScanPeriods,
    /// Trace the section starting along `theta0` from the chart-1 center.
    Trace {
        #[arg(long, allow_hyphen_values = true)]
        theta0: f64,
        #[arg(long, default_value_t = 129)]
        max_legs: usize,
        /// Cross-check against the numerical geodesic integrator.
        #[arg(long)]
        numeric: bool,
    },
    /// Run the foliation checks.
    Verify,
    /// Sample the warp function on both charts.
    BuildMetric {
        #[arg(long, default_value_t = 64)]
        n_t: usize,
        #[arg(long, default_value_t = 360)]
        n_theta: usize,
    },
    /// Least common period of circles of radii r and s, in units of 2π.
    CommonPeriod {
        #[arg(required_unless_present = "irrational")]
        r_num: Option<u64>,
        #[arg(required_unless_present = "irrational")]
        r_den: Option<u64>,
        #[arg(required_unless_present = "irrational")]
        s_num: Option<u64>,
        #[arg(required_unless_present = "irrational")]
        s_den: Option<u64>,
        /// Treat r/s as irrational.
        #[arg(long, conflicts_with_all = ["r_num", "r_den", "s_num", "s_den"])]
        irrational: bool,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Core(#[from] CoreError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
    #[error("{failed} of {total} checks failed")]
    ChecksFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Config(_) => 2,
            CliError::Core(e) => match e.root_cause() {
                CoreError::InvalidParameter { .. } | CoreError::NonPositiveRadius => 2,
                _ => 3,
            },
            CliError::ChecksFailed { .. } => 4,
        }
    }
}

fn io_err(context: impl Into<String>) -> impl FnOnce(io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}

/// Everything a run needs besides the subcommand.
struct Run {
    config: Config,
    directory: PathBuf,
}

impl Run {
    fn new(cli: &Cli) -> Result<Self, CliError> {
        let mut config = match &cli.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        if let Some(seed) = cli.seed {
            config.verify.seed = seed;
        }
        if let Some(dir) = &cli.out {
            config.output.directory = dir.clone();
        }
        let directory = config.output.directory.clone();
        Ok(Run { config, directory })
    }

    fn create(&self, name: &str) -> Result<(PathBuf, BufWriter<File>), CliError> {
        fs::create_dir_all(&self.directory).map_err(io_err(format!("cannot create {}", self.directory.display())))?;
        let path = self.directory.join(name);
        let file = File::create(&path).map_err(io_err(format!("cannot create {}", path.display())))?;
        Ok((path, BufWriter::new(file)))
    }

    fn extension(&self) -> &'static str {
        match self.config.output.format {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }

    fn write_csv(&self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<PathBuf, CliError> {
        let (path, mut w) = self.create(name)?;
        let context = format!("cannot write {}", path.display());
        w.write_all(self.config.header().as_bytes())
            .and_then(|_| body(&mut w))
            .and_then(|_| w.flush())
            .map_err(io_err(context))?;
        Ok(path)
    }

    fn write_json(&self, name: &str, value: impl Serialize) -> Result<PathBuf, CliError> {
        let (path, mut w) = self.create(name)?;
        let context = format!("cannot write {}", path.display());
        let doc = json!({ "config": &self.config, "result": value });
        serde_json::to_writer_pretty(&mut w, &doc)
            .map_err(io::Error::from)
            .and_then(|_| writeln!(w))
            .and_then(|_| w.flush())
            .map_err(io_err(context))?;
        Ok(path)
    }
}

/// Parses the configuration, runs the subcommand and writes its outputs.
/// Human-readable results go to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    if let Command::CommonPeriod {
        r_num,
        r_den,
        s_num,
        s_den,
        irrational,
    } = &cli.command
    {
        return common_period(*r_num, *r_den, *s_num, *s_den, *irrational, out);
    }

    let run = Run::new(cli)?;
    let written = match &cli.command {
        Command::ScanPeriods => scan_periods(&run, out)?,
        Command::Trace {
            theta0,
            max_legs,
            numeric,
        } => trace(&run, *theta0, *max_legs, *numeric, out)?,
        Command::Verify => return verify(&run, out),
        Command::BuildMetric { n_t, n_theta } => build_metric(&run, *n_t, *n_theta)?,
        Command::CommonPeriod { .. } => unreachable!("handled above"),
    };
    writeln!(out, "wrote {}", written.display()).map_err(io_err("stdout"))
}

#[derive(Serialize)]
struct HistogramEntry {
    period: Option<usize>,
    searched_to: usize,
    count: usize,
}

#[derive(Serialize)]
struct ScanDocument<'a> {
    n_samples: usize,
    k_max: usize,
    tol: f64,
    histogram: Vec<HistogramEntry>,
    samples: &'a [crate::period::PeriodSample],
}

impl<'a> From<&'a PeriodReport> for ScanDocument<'a> {
    fn from(r: &'a PeriodReport) -> Self {
        let histogram = r
            .histogram
            .iter()
            .map(|(p, &count)| HistogramEntry {
                period: p.finite(),
                searched_to: r.k_max,
                count,
            })
            .collect();
        ScanDocument {
            n_samples: r.n_samples,
            k_max: r.k_max,
            tol: r.tol,
            histogram,
            samples: &r.samples,
        }
    }
}

fn scan_periods(run: &Run, out: &mut dyn Write) -> Result<PathBuf, CliError> {
    let map = TransitionMap::new(run.config.build_diffeo()?);
    let s = &run.config.scan;
    let report = classify_scan(&map, s.n_samples, s.k_max, s.tol)?;
    write!(out, "{}", report.summary()).map_err(io_err("stdout"))?;
    let name = format!("periods.{}", run.extension());
    match run.config.output.format {
        OutputFormat::Csv => run.write_csv(&name, |w| report.write_csv(w)),
        OutputFormat::Json => run.write_json(&name, ScanDocument::from(&report)),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NumericCheck {
    pub s_max: f64,
    pub gluing_events: usize,
    pub compared_crossings: usize,
    pub max_crossing_mismatch: f64,
    pub return_length: Option<f64>,
}

/// Integrates the radial geodesic of a trace and compares its gluing
/// crossings and return length with the exact itinerary.
pub fn numeric_cross_check(
    metric: &GluedMetric,
    trace: &SectionTrace,
    verdict: &SectionVerdict,
    base: &IntegratorSettings,
) -> Result<NumericCheck, CoreError> {
    let total: u64 = trace.legs.iter().map(|l| l.length()).sum();
    let s_max = match verdict.length {
        SectionLength::Finite(l) => l as f64 + 0.5,
        SectionLength::Unbounded => total as f64 - 0.5,
    };
    let settings = IntegratorSettings { s_max, ..*base };
    let init = GeodesicState::radial(Chart::One, 0.0, trace.start, true);
    let traj = integrate(metric, init, &settings)?;
    let gluings: Vec<_> = traj.events.iter().filter(|e| matches!(e.kind, EventKind::Gluing { .. })).collect();
    let mut mismatch: f64 = 0.0;
    let mut compared = 0;
    for (event, crossing) in gluings.iter().zip(&trace.crossings) {
        let expected = match event.kind {
            EventKind::Gluing { to: Chart::Two, .. } => crossing.chart2,
            _ => crossing.chart1,
        };
        mismatch = mismatch.max(circle_distance(event.theta_after, expected.radians()));
        compared += 1;
    }
    let return_length = if verdict.closed {
        numerical_return_length(metric, trace.start, RETURN_DIRECTION_TOL, &settings)?
    } else {
        None
    };
    Ok(NumericCheck {
        s_max,
        gluing_events: gluings.len(),
        compared_crossings: compared,
        max_crossing_mismatch: mismatch,
        return_length,
    })
}

fn trace(run: &Run, theta0: f64, max_legs: usize, numeric: bool, out: &mut dyn Write) -> Result<PathBuf, CliError> {
    if !theta0.is_finite() {
        return Err(CoreError::invalid("theta0", "must be finite").into());
    }
    let metric = run.config.build_metric()?;
    let settings = run.config.trace_settings(max_legs);
    let trace = trace_section(metric.diffeo(), Angle::new(theta0), &settings)?;
    let verdict = section_verdict(&trace, settings.tol)?;
    let numeric = if numeric {
        Some(numeric_cross_check(&metric, &trace, &verdict, &run.config.integrator.settings()?)?)
    } else {
        None
    };

    let length = match verdict.length {
        SectionLength::Finite(l) => l.to_string(),
        SectionLength::Unbounded => "unbounded".to_string(),
    };
    let w = |e| io_err("stdout")(e);
    writeln!(out, "start      {:.15}", trace.start.radians()).map_err(w)?;
    writeln!(out, "class      {}", verdict.period).map_err(w)?;
    writeln!(out, "closed     {}", verdict.closed).map_err(w)?;
    writeln!(out, "length     {length}").map_err(w)?;
    writeln!(out, "legs       {}", trace.legs.len()).map_err(w)?;
    writeln!(out, "injective  {}", verdict.injective).map_err(w)?;
    if let Some(wit) = &verdict.witness {
        writeln!(
            out,
            "witness    chart {} legs {} and {}, headings {:.9} and {:.9}",
            wit.chart,
            wit.first_leg,
            wit.second_leg,
            wit.first_heading.radians(),
            wit.second_heading.radians()
        )
        .map_err(w)?;
    }
    if let Some(n) = &numeric {
        writeln!(out, "numeric    crossing mismatch {:.3e} over {}", n.max_crossing_mismatch, n.compared_crossings).map_err(w)?;
        if let Some(l) = n.return_length {
            writeln!(out, "numeric    return length {l:.12}").map_err(w)?;
        }
    }

    #[derive(Serialize)]
    struct TraceDocument<'a> {
        trace: &'a SectionTrace,
        verdict: &'a SectionVerdict,
        #[serde(skip_serializing_if = "Option::is_none")]
        numeric: Option<NumericCheck>,
    }
    run.write_json(
        "trace.json",
        TraceDocument {
            trace: &trace,
            verdict: &verdict,
            numeric,
        },
    )
}

fn verify(run: &Run, out: &mut dyn Write) -> Result<(), CliError> {
    let metric = run.config.build_metric()?;
    let report = crate::verifier::verify(&metric, &run.config.verify_settings()?);
    writeln!(out, "{report}").map_err(io_err("stdout"))?;
    let name = format!("verify.{}", run.extension());
    let path = match run.config.output.format {
        OutputFormat::Csv => run.write_csv(&name, |w| report.write_csv(w))?,
        OutputFormat::Json => run.write_json(&name, &report)?,
    };
    writeln!(out, "wrote {}", path.display()).map_err(io_err("stdout"))?;
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(CliError::ChecksFailed {
            failed,
            total: report.checks.len(),
        });
    }
    Ok(())
}

fn build_metric(run: &Run, n_t: usize, n_theta: usize) -> Result<PathBuf, CliError> {
    if n_t < 2 || n_theta == 0 {
        return Err(CoreError::invalid("n_t/n_theta", "need n_t >= 2 and n_theta >= 1").into());
    }
    let metric = run.config.build_metric()?;
    run.write_csv("metric_grid.csv", |w| metric.write_grid_csv(w, n_t, n_theta))
}

fn common_period(
    r_num: Option<u64>,
    r_den: Option<u64>,
    s_num: Option<u64>,
    s_den: Option<u64>,
    irrational: bool,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let radii = if irrational {
        RadiusPair::Irrational
    } else {
        let (Some(rn), Some(rd), Some(sn), Some(sd)) = (r_num, r_den, s_num, s_den) else {
            return Err(CoreError::invalid("radii", "four positive integers or --irrational").into());
        };
        RadiusPair::Rational(Fraction::new(rn, rd)?, Fraction::new(sn, sd)?)
    };
    writeln!(out, "{}", rational_closure(radii)?).map_err(io_err("stdout"))
}

/// Exit status for a finished run; errors are reported on stderr.
pub fn main_with(cli: &Cli) -> u8 {
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    match run(cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            let _ = lock.flush();
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

