//! TOML experiment descriptions for the command-line front end.
//!
//! ```toml
//! [source]
//! kind = "coherent"
//!
//! [detector_true]
//! kind = "constant"
//! tau0 = 45e-9
//!
//! [interferometer]
//! path_amplitudes = [1.0, 1.0, 1.0]
//!
//! [campaign]
//! runs = 10000
//! acquisition_time = 1.0
//! seed = 1
//! log_grid = { start = 10.0, stop = 1e7, points = 25 }
//!
//! [output]
//! stem = "shot_noise"
//! ```

use serde::{Deserialize, Serialize};

use crate::campaign::CampaignConfig;
use crate::detector::{DeadtimeKind, DeadtimeModel};
use crate::error::{Error, Result};
use crate::fixtures::{Fixtures, GratingColumn};
use crate::source::SourceModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfigFile {
    pub source: SourceSection,
    pub detector_true: DeadtimeModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector_assumed: Option<DeadtimeModel>,
    #[serde(default)]
    pub interferometer: InterferometerSection,
    pub campaign: CampaignSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub output: OutputSection,
}

/// Source kind and its rate-independent parameters. The rate itself comes
/// from the campaign grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSection {
    Coherent {},
    IdealSps { pulse_period: f64 },
    ContaminatedSps { pulse_period: f64, g2_zero: f64 },
}

impl SourceSection {
    pub fn template(&self) -> Result<SourceModel> {
        match *self {
            SourceSection::Coherent {} => SourceModel::coherent(0.0),
            SourceSection::IdealSps { pulse_period } => SourceModel::ideal_sps(pulse_period, 0.0),
            SourceSection::ContaminatedSps {
                pulse_period,
                g2_zero,
            } => SourceModel::contaminated_sps(pulse_period, 0.0, g2_zero),
        }
    }
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterferometerSection {
    /// Explicit path amplitudes; mutually exclusive with `grating`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_amplitudes: Option<[f64; 3]>,
    /// Take the amplitudes from the shipped grating efficiencies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grating: Option<GratingColumn>,
    #[serde(default = "unit")]
    pub transmission: f64,
}

impl Default for InterferometerSection {
    fn default() -> Self {
        Self {
            path_amplitudes: None,
            grating: None,
            transmission: 1.0,
        }
    }
}

impl InterferometerSection {
    pub fn amplitudes(&self) -> Result<[f64; 3]> {
        match (self.path_amplitudes, self.grating) {
            (Some(_), Some(_)) => Err(Error::Domain(
                "give either path_amplitudes or grating, not both".into(),
            )),
            (Some(a), None) => Ok(a),
            (None, Some(column)) => Ok(Fixtures::shipped().path_efficiencies(column)),
            (None, None) => Ok([1.0; 3]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignSection {
    pub runs: usize,
    #[serde(default = "unit")]
    pub acquisition_time: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_grid: Option<LogGrid>,
}

/// Logarithmically spaced rates from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl LogGrid {
    pub fn rates(&self) -> Result<Vec<f64>> {
        if !(self.start > 0.0 && self.stop > self.start && self.points >= 2) {
            return Err(Error::Domain(format!(
                "log grid needs 0 < start < stop and >= 2 points, got {self:?}"
            )));
        }
        let (a, b) = (self.start.log10(), self.stop.log10());
        let last = (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|i| match i {
                0 => self.start,
                i if i == self.points - 1 => self.stop,
                i => 10f64.powf(a + (b - a) * i as f64 / last),
            })
            .collect())
    }
}

impl CampaignSection {
    pub fn rates(&self) -> Result<Vec<f64>> {
        match (&self.rate_grid, &self.log_grid) {
            (Some(r), None) => Ok(r.clone()),
            (None, Some(g)) => g.rates(),
            _ => Err(Error::Domain("give exactly one of rate_grid or log_grid".into())),
        }
    }
}

/// Deterministic correction sweeps evaluated on the campaign grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepSection {
    /// Constant true deadtime from `detector_true`, corrected with each
    /// assumed deadtime.
    CorrectedKappa { assumed_taus: Vec<f64> },
    /// Rate-dependent `detector_true`, corrected with itself and with a
    /// constant deadtime.
    RateDependent { assumed_tau: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

fn default_dir() -> String {
    ".".into()
}

fn default_stem() -> String {
    "campaign".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default = "default_stem")]
    pub stem: String,
    #[serde(default)]
    pub format: OutputFormat,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            stem: default_stem(),
            format: OutputFormat::Csv,
        }
    }
}

impl ExperimentConfigFile {
    /// Parses and validates a configuration. Unknown keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.campaign_config(None)?;
        match &self.sweep {
            Some(SweepSection::CorrectedKappa { assumed_taus }) => {
                if self.detector_true.kind != DeadtimeKind::Constant {
                    return Err(Error::Domain("corrected_kappa sweep needs a constant true detector".into()));
                }
                if assumed_taus.is_empty() || assumed_taus.iter().any(|t| !t.is_finite() || *t <= 0.0) {
                    return Err(Error::Domain("assumed_taus must be nonempty and positive".into()));
                }
            }
            Some(SweepSection::RateDependent { assumed_tau }) => {
                if self.detector_true.kind != DeadtimeKind::LinearInRate {
                    return Err(Error::Domain("rate_dependent sweep needs a linear_in_rate true detector".into()));
                }
                if !assumed_tau.is_finite() || *assumed_tau <= 0.0 {
                    return Err(Error::Domain("assumed_tau must be positive".into()));
                }
            }
            None => {}
        }
        Ok(())
    }

    /// The campaign described by this file, with an optional seed override.
    pub fn campaign_config(&self, seed: Option<u64>) -> Result<CampaignConfig> {
        let config = CampaignConfig {
            source: self.source.template()?,
            true_detector: self.detector_true,
            assumed_detector: self.detector_assumed,
            path_amplitudes: self.interferometer.amplitudes()?,
            acquisition_time: self.campaign.acquisition_time,
            runs: self.campaign.runs,
            rng_seed: seed.unwrap_or(self.campaign.seed),
            rate_grid: self.campaign.rates()?,
            transmission: self.interferometer.transmission,
            keep_samples: false,
        };
        config.validate()?;
        Ok(config)
    }
}
