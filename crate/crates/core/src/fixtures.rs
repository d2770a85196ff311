//! Published reference constants, shipped as `data/fixtures.toml`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::two_path_visibility;

const SHIPPED: &str = include_str!("../data/fixtures.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fixtures {
    pub grating: Grating,
    pub visibility: Visibilities,
    pub deadtime: Deadtime,
    pub single_photon: SinglePhoton,
    pub kappa_result: KappaResult,
    pub qber: Qber,
    pub bias: Bias,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grating {
    pub unit: String,
    pub source: String,
    pub orders: [i32; 3],
    pub theory: [f64; 3],
    pub experiment: [f64; 3],
    pub theory_overall: f64,
    pub experiment_overall: f64,
    pub theory_uniformity: f64,
    pub experiment_uniformity: f64,
    pub prose_theory_zero_order: f64,
    pub prose_experiment_zero_order: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Visibilities {
    pub unit: String,
    pub source: String,
    pub paths: [String; 4],
    pub theory: [f64; 4],
    pub experiment: [f64; 4],
    pub path_orders: [i32; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Deadtime {
    pub source: String,
    pub measured_tau_ns: f64,
    pub measured_tau_uncertainty_ns: f64,
    pub model_tau_ns: f64,
    pub scan_taus_ns: [f64; 3],
    pub uncorrected_model_tau_ns: f64,
    pub repetitions: u32,
    pub linear_tau0_ns: f64,
    pub linear_slope_fs: f64,
    pub linear_source: String,
    pub constant_crossing_mhz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SinglePhoton {
    pub source: String,
    pub g2_zero: f64,
    pub pulse_rate_mhz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KappaResult {
    pub source: String,
    pub mean: f64,
    pub std: f64,
    pub runs: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Qber {
    pub source: String,
    pub visibility_percent: f64,
    pub qber_percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bias {
    pub source: String,
    pub rate_hz: f64,
    pub mean_delta_given_eps_neg: f64,
    pub mean_delta_given_eps_pos: f64,
    pub mean_eps: f64,
    pub mean_delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GratingColumn {
    Theory,
    Experiment,
}

impl std::str::FromStr for GratingColumn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theory" => Ok(Self::Theory),
            "experiment" => Ok(Self::Experiment),
            other => Err(Error::Parse(format!("unknown grating column '{other}'"))),
        }
    }
}

impl Fixtures {
    /// The fixtures compiled into the library.
    pub fn shipped() -> Self {
        Self::parse(SHIPPED).expect("shipped fixtures parse")
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Grating efficiencies of paths A, B, C as fractions.
    pub fn path_efficiencies(&self, column: GratingColumn) -> [f64; 3] {
        let per_order = match column {
            GratingColumn::Theory => self.grating.theory,
            GratingColumn::Experiment => self.grating.experiment,
        };
        self.visibility.path_orders.map(|order| {
            let k = self.grating.orders.iter().position(|&o| o == order).expect("order listed");
            per_order[k] / 100.0
        })
    }
}

/// Two-path visibilities AB, AC, BC in percent for given path efficiencies.
pub fn pairwise_visibilities(efficiencies: [f64; 3]) -> Result<[f64; 3]> {
    let [a, b, c] = efficiencies;
    Ok([
        100.0 * two_path_visibility(a, b)?,
        100.0 * two_path_visibility(a, c)?,
        100.0 * two_path_visibility(b, c)?,
    ])
}
