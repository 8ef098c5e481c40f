//! TOML experiment configuration.
//!
//! ```toml
//! [diffeo]
//! kind = "bump"            # identity | rotation | bump | harmonic | spline
//! amplitude = 0.3          # bump, harmonic
//! support_lo = 3.141592653589793
//! support_hi = 6.283185307179586
//! angle = 0.0              # rotation
//! mode = 2                 # harmonic: F(x) = x + amplitude·sin(mode·x + phase)
//! phase = 0.0
//! knots = []               # spline: [[theta, F(theta)], ...]
//!
//! [metric]
//! t0 = 0.25
//! t1 = 0.75
//! psi2 = []                # [[theta, psi], ...]; empty means psi2 = 1
//! # psi1_override = 1.0    # breaks the gluing on purpose
//!
//! [integrator]
//! ds = 0.001
//! s_max = 20.0
//! radial_tol = 1e-9
//! t_guard = 1e-6
//!
//! [scan]
//! n_samples = 360
//! k_max = 64
//! tol = 1e-9
//!
//! [verify]
//! n_geodesics = 100
//! n_radial = 36
//! seed = 0
//!
//! [output]
//! directory = "out"
//! format = "csv"           # csv | json
//! ```
//!
//! Every key is optional. Angles are radians.

use std::f64::consts::{PI, TAU};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circle_map::CircleDiffeo;
use crate::error::Error as CoreError;
use crate::geodesic::{IntegratorSettings, TraceSettings};
use crate::metric::{GluedMetric, VerticalScale, DEFAULT_T0, DEFAULT_T1};
use crate::period::{DEFAULT_K_MAX, DEFAULT_TOL};
use crate::spline::PeriodicSpline;
use crate::verifier::VerifySettings;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

impl ConfigError {
    fn invalid(key: &str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    fn from_core(section: &str, err: CoreError) -> Self {
        match err {
            CoreError::InvalidParameter { name, reason } => {
                let key = match name {
                    "support" => "support_lo/support_hi",
                    "t0/t1" => "t0/t1",
                    "psi" => "psi2",
                    other => other,
                };
                ConfigError::invalid(&format!("{section}.{key}"), reason)
            }
            CoreError::MonotonicityViolation { min_slope, at } => ConfigError::invalid(
                &format!("{section}.amplitude"),
                format!("map is not monotone: slope {min_slope:.4} at θ = {at:.4}"),
            ),
            other => ConfigError::invalid(section, other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffeoKindName {
    Identity,
    Rotation,
    Bump,
    Harmonic,
    Spline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiffeoConfig {
    pub kind: DiffeoKindName,
    pub amplitude: f64,
    pub support_lo: f64,
    pub support_hi: f64,
    pub angle: f64,
    pub mode: u32,
    pub phase: f64,
    pub knots: Vec<[f64; 2]>,
}

impl Default for DiffeoConfig {
    fn default() -> Self {
        DiffeoConfig {
            kind: DiffeoKindName::Bump,
            amplitude: 0.3,
            support_lo: PI,
            support_hi: TAU,
            angle: 0.0,
            mode: 2,
            phase: 0.0,
            knots: Vec::new(),
        }
    }
}

impl DiffeoConfig {
    pub fn build(&self) -> Result<CircleDiffeo, ConfigError> {
        let f = match self.kind {
            DiffeoKindName::Identity => Ok(CircleDiffeo::identity()),
            DiffeoKindName::Rotation => CircleDiffeo::rotation(self.angle),
            DiffeoKindName::Bump => CircleDiffeo::bump(self.amplitude, self.support_lo, self.support_hi),
            DiffeoKindName::Harmonic => CircleDiffeo::harmonic(self.amplitude, self.mode, self.phase),
            DiffeoKindName::Spline => {
                let knots: Vec<(f64, f64)> = self.knots.iter().map(|k| (k[0], k[1])).collect();
                CircleDiffeo::spline(&knots)
            }
        };
        f.map_err(|e| ConfigError::from_core("diffeo", e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricConfig {
    pub t0: f64,
    pub t1: f64,
    pub psi2: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi1_override: Option<f64>,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            t0: DEFAULT_T0,
            t1: DEFAULT_T1,
            psi2: Vec::new(),
            psi1_override: None,
        }
    }
}

impl MetricConfig {
    pub fn build(&self, f: CircleDiffeo) -> Result<GluedMetric, ConfigError> {
        let psi2 = if self.psi2.is_empty() {
            VerticalScale::Constant(1.0)
        } else {
            let table: Vec<(f64, f64)> = self.psi2.iter().map(|k| (k[0], k[1])).collect();
            VerticalScale::Table(PeriodicSpline::new(&table).map_err(|e| ConfigError::from_core("metric.psi2", e))?)
        };
        let metric = GluedMetric::with_psi2(f, self.t0, self.t1, psi2).map_err(|e| ConfigError::from_core("metric", e))?;
        match self.psi1_override {
            None => Ok(metric),
            Some(c) => metric
                .with_psi1_override(VerticalScale::Constant(c))
                .map_err(|_| ConfigError::invalid("metric.psi1_override", "must be positive")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub ds: f64,
    pub s_max: f64,
    pub radial_tol: f64,
    pub t_guard: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        let d = IntegratorSettings::default();
        IntegratorConfig {
            ds: d.ds,
            s_max: d.s_max,
            radial_tol: d.radial_tol,
            t_guard: d.t_guard,
        }
    }
}

impl IntegratorConfig {
    pub fn settings(&self) -> Result<IntegratorSettings, ConfigError> {
        let s = IntegratorSettings {
            ds: self.ds,
            s_max: self.s_max,
            radial_tol: self.radial_tol,
            t_guard: self.t_guard,
            ..Default::default()
        };
        s.validate().map_err(|e| ConfigError::from_core("integrator", e))?;
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub n_samples: usize,
    pub k_max: usize,
    pub tol: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            n_samples: 360,
            k_max: DEFAULT_K_MAX,
            tol: DEFAULT_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub n_geodesics: usize,
    pub n_radial: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        let d = VerifySettings::default();
        VerifyConfig {
            n_geodesics: d.n_geodesics,
            n_radial: d.n_radial,
            seed: d.seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub format: OutputFormat,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: PathBuf::from("out"),
            format: OutputFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub diffeo: DiffeoConfig,
    pub metric: MetricConfig,
    pub integrator: IntegratorConfig,
    pub scan: ScanConfig,
    pub verify: VerifyConfig,
    pub output: OutputConfig,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let config: Config = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Builds every object the config describes, so that bad values surface
    /// at load time.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.build_metric()?;
        self.integrator.settings()?;
        if self.scan.n_samples == 0 {
            return Err(ConfigError::invalid("scan.n_samples", "must be at least 1"));
        }
        if self.scan.k_max == 0 {
            return Err(ConfigError::invalid("scan.k_max", "must be at least 1"));
        }
        if !(self.scan.tol > 0.0 && self.scan.tol.is_finite()) {
            return Err(ConfigError::invalid("scan.tol", "must be positive"));
        }
        if self.verify.n_radial == 0 {
            return Err(ConfigError::invalid("verify.n_radial", "must be at least 1"));
        }
        Ok(())
    }

    pub fn build_diffeo(&self) -> Result<CircleDiffeo, ConfigError> {
        self.diffeo.build()
    }

    pub fn build_metric(&self) -> Result<GluedMetric, ConfigError> {
        self.metric.build(self.build_diffeo()?)
    }

    pub fn trace_settings(&self, max_legs: usize) -> TraceSettings {
        TraceSettings {
            max_legs,
            k_max: self.scan.k_max,
            tol: self.scan.tol,
        }
    }

    pub fn verify_settings(&self) -> Result<VerifySettings, ConfigError> {
        Ok(VerifySettings {
            n_geodesics: self.verify.n_geodesics,
            n_radial: self.verify.n_radial,
            seed: self.verify.seed,
            integrator: self.integrator.settings()?,
            ..Default::default()
        })
    }

    /// The effective configuration as TOML, defaults included.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// [`Config::to_toml`] with every line prefixed by `# `.
    pub fn header(&self) -> String {
        self.to_toml()
            .lines()
            .map(|l| if l.is_empty() { "#\n".to_string() } else { format!("# {l}\n") })
            .collect()
    }
}
