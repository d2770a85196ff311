//! Monte Carlo measurement campaigns for the Sorkin parameter.
//!
//! One run measures the eight shutter configurations in a random order.
//! For every configuration the expected photon rate at the detector is
//! computed, shot noise is drawn from the source statistics, the resulting
//! rate is passed through the detector response and, optionally, corrected
//! with an assumed detector model before `κ` is evaluated.
//!
//! Every run owns an independent random stream derived from the campaign
//! seed, the rate index and the run index, so results do not depend on the
//! number of worker threads.

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::{detected_rate_pulsed, DeadtimeModel};
use crate::error::{Error, Result};
use crate::interference::{
    interferometer_rate_with_phases, kappa, randomized_config_order, KappaSample, RateOctet,
    ShutterConfig,
};
use crate::rng::{self, SimRng};
use crate::source::{draw_counts_with, SourceModel};

/// Describes how the incident rate maps onto configuration rates.
pub const TRANSMISSION_CONVENTION: &str =
    "all-open in-phase configuration rate equals incident rate times transmission";

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    /// Template source; it is retuned to each configuration rate.
    pub source: SourceModel,
    pub true_detector: DeadtimeModel,
    #[serde(default)]
    pub assumed_detector: Option<DeadtimeModel>,
    pub path_amplitudes: [f64; 3],
    /// Seconds per shutter configuration.
    pub acquisition_time: f64,
    pub runs: usize,
    pub rng_seed: u64,
    /// Incident rates, photons/s, strictly ascending.
    pub rate_grid: Vec<f64>,
    #[serde(default = "unit")]
    pub transmission: f64,
    /// Keep every run's [`KappaSample`] in the result.
    #[serde(default)]
    pub keep_samples: bool,
}

impl CampaignConfig {
    /// Equal path amplitudes, 1 s per configuration, no correction.
    pub fn new(source: SourceModel, true_detector: DeadtimeModel, rate_grid: Vec<f64>, runs: usize, rng_seed: u64) -> Self {
        Self {
            source,
            true_detector,
            assumed_detector: None,
            path_amplitudes: [1.0; 3],
            acquisition_time: 1.0,
            runs,
            rng_seed,
            rate_grid,
            transmission: 1.0,
            keep_samples: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.source.validate()?;
        self.true_detector.validate()?;
        if let Some(a) = &self.assumed_detector {
            a.validate()?;
        }
        if self.runs == 0 {
            return Err(Error::Domain("runs must be >= 1".into()));
        }
        if !(self.acquisition_time.is_finite() && self.acquisition_time > 0.0) {
            return Err(Error::Domain(format!(
                "acquisition time must be > 0, got {}",
                self.acquisition_time
            )));
        }
        if self.rate_grid.is_empty() {
            return Err(Error::Domain("rate grid is empty".into()));
        }
        if self.rate_grid.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::Domain("rate grid entries must be finite and >= 0".into()));
        }
        if self.rate_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("rate grid must be strictly ascending".into()));
        }
        if self.path_amplitudes.iter().any(|a| !(a.is_finite() && *a >= 0.0))
            || self.path_amplitudes.iter().sum::<f64>() == 0.0
        {
            return Err(Error::Domain(format!("bad path amplitudes {:?}", self.path_amplitudes)));
        }
        if !(self.transmission > 0.0 && self.transmission <= 1.0) {
            return Err(Error::Domain(format!(
                "transmission must lie in (0, 1], got {}",
                self.transmission
            )));
        }
        Ok(())
    }
}

/// Statistics over the runs at one incident rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub rate_hz: f64,
    /// Mean over runs with defined `κ`; NaN if there are none.
    pub mean_kappa: f64,
    /// Sample standard deviation over runs with defined `κ`.
    pub std_kappa: f64,
    pub mean_eps: f64,
    pub mean_delta: f64,
    pub n_undefined: usize,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateError {
    pub rate_hz: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub summaries: Vec<RateSummary>,
    pub errors: Vec<RateError>,
    /// Per-rate samples, aligned with `summaries`, when requested.
    pub samples: Option<Vec<Vec<KappaSample>>>,
    pub config: CampaignConfig,
}

/// Runs the full campaign. Rates whose detector model fails are reported in
/// `errors` and skipped.
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignResult> {
    config.validate()?;
    let mut summaries = Vec::new();
    let mut errors = Vec::new();
    let mut kept = Vec::new();

    for (rate_index, &rate) in config.rate_grid.iter().enumerate() {
        let runs: Result<Vec<KappaSample>> = (0..config.runs)
            .into_par_iter()
            .map(|run| {
                let mut gen = rng::substream(config.rng_seed, rng::run_stream(rate_index, run));
                simulate_run(config, rate, &mut gen)
            })
            .collect();
        match runs {
            Ok(samples) => {
                summaries.push(summarize(rate, &samples));
                if config.keep_samples {
                    kept.push(samples);
                }
            }
            Err(e) => errors.push(RateError {
                rate_hz: rate,
                message: e.to_string(),
            }),
        }
    }

    Ok(CampaignResult {
        summaries,
        errors,
        samples: config.keep_samples.then_some(kept),
        config: config.clone(),
    })
}

/// Expected photon rate reaching the detector in configuration `c`.
fn configuration_rate(config: &CampaignConfig, c: ShutterConfig, incident: f64) -> Result<f64> {
    interferometer_rate_with_phases(c, config.path_amplitudes, [0.0; 3], config.transmission, incident, 0.0)
}

/// One measurement run at the given incident rate.
pub fn simulate_run(config: &CampaignConfig, incident: f64, gen: &mut SimRng) -> Result<KappaSample> {
    let order = randomized_config_order(gen.next_u64());
    let mut rates = [0.0; 8];
    for &c in &order {
        let expected = configuration_rate(config, c, incident)?;
        let detected = measure(config, expected, gen)?;
        rates[c.index()] = match &config.assumed_detector {
            Some(assumed) => assumed.correct_rate(detected)?,
            None => detected,
        };
    }
    let octet = RateOctet::from_array(rates)?;
    Ok(KappaSample::from_octet(&octet, order, config.acquisition_time))
}

fn measure(config: &CampaignConfig, expected: f64, gen: &mut SimRng) -> Result<f64> {
    let det = &config.true_detector;
    let source = config.source.with_mean_rate(expected)?;
    match source {
        SourceModel::Coherent { .. } => {
            let sample = draw_counts_with(&source, 1.0, config.acquisition_time, gen)?;
            det.detected_rate(sample.effective_rate())
        }
        SourceModel::IdealSps {
            pulse_period,
            emission_probability,
        } => detected_rate_pulsed(det.efficiency * emission_probability, pulse_period, det),
        SourceModel::ContaminatedSps {
            pulse_period,
            g2_zero,
            ..
        } => {
            let sample = draw_counts_with(&source, 1.0, config.acquisition_time, gen)?;
            let q = (sample.effective_rate() * pulse_period).min(1.0);
            let eta = det.efficiency;
            // both photons of a pair arrive together and fire the diode once
            let pair = 0.5 * g2_zero * q * q;
            let trigger = (eta * q - pair * eta * eta).clamp(0.0, 1.0);
            detected_rate_pulsed(trigger, pulse_period, det)
        }
    }
}

fn summarize(rate: f64, samples: &[KappaSample]) -> RateSummary {
    let n = samples.len() as f64;
    let kappas: Vec<f64> = samples.iter().filter_map(|s| s.kappa).collect();
    let (mean_kappa, std_kappa) = mean_and_std(&kappas);
    RateSummary {
        rate_hz: rate,
        mean_kappa,
        std_kappa,
        mean_eps: samples.iter().map(|s| s.epsilon).sum::<f64>() / n,
        mean_delta: samples.iter().map(|s| s.delta).sum::<f64>() / n,
        n_undefined: samples.len() - kappas.len(),
        runs: samples.len(),
    }
}

/// Mean and sample standard deviation, accumulated relative to the first
/// value. Identical samples give exactly zero spread.
fn mean_and_std(xs: &[f64]) -> (f64, f64) {
    let Some(&shift) = xs.first() else {
        return (f64::NAN, 0.0);
    };
    let n = xs.len() as f64;
    let (s1, s2) = xs.iter().fold((0.0, 0.0), |(a, b), &x| {
        let d = x - shift;
        (a + d, b + d * d)
    });
    let mean = shift + s1 / n;
    let std = if xs.len() > 1 {
        ((s2 - s1 * s1 / n) / (n - 1.0)).max(0.0).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

/// Noise-free `κ` at one incident rate: exact configuration rates pushed
/// through the true detector and optionally corrected.
pub fn deterministic_kappa(
    incident: f64,
    path_amplitudes: [f64; 3],
    true_detector: &DeadtimeModel,
    assumed_detector: Option<&DeadtimeModel>,
) -> Result<f64> {
    let rates = ShutterConfig::ALL
        .iter()
        .map(|&c| {
            let r = interferometer_rate_with_phases(c, path_amplitudes, [0.0; 3], 1.0, incident, 0.0)?;
            let d = true_detector.detected_rate(r)?;
            match assumed_detector {
                Some(a) => a.correct_rate(d),
                None => Ok(d),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    kappa(&RateOctet::from_array(rates.try_into().expect("eight rates"))?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrectionCurve {
    pub assumed_tau: f64,
    /// Rates at which the correction succeeded.
    pub rates: Vec<f64>,
    pub kappa: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrectionSweep {
    pub true_tau: f64,
    pub curves: Vec<CorrectionCurve>,
    pub warnings: Vec<String>,
}

/// Deterministic `κ` after correcting a constant-deadtime detector with a
/// range of assumed deadtimes. A curve stops at the first rate where the
/// assumed model cannot be inverted.
pub fn sweep_corrected_kappa(true_tau: f64, assumed_taus: &[f64], rate_grid: &[f64]) -> Result<CorrectionSweep> {
    let truth = DeadtimeModel::constant(true_tau)?;
    if true_tau <= 0.0 || assumed_taus.iter().any(|t| !t.is_finite() || *t <= 0.0) {
        return Err(Error::Domain("deadtimes must be positive".into()));
    }
    let mut warnings = Vec::new();
    let mut curves = Vec::new();
    for &tau in assumed_taus {
        let assumed = DeadtimeModel::constant(tau)?;
        let mut curve = CorrectionCurve {
            assumed_tau: tau,
            rates: Vec::new(),
            kappa: Vec::new(),
        };
        for &r in rate_grid {
            match deterministic_kappa(r, [1.0; 3], &truth, Some(&assumed)) {
                Ok(k) => {
                    curve.rates.push(r);
                    curve.kappa.push(k);
                }
                Err(e) => {
                    warnings.push(format!("assumed tau {tau:.4e} s: grid truncated at {r:.4e}/s ({e})"));
                    break;
                }
            }
        }
        curves.push(curve);
    }
    Ok(CorrectionSweep {
        true_tau,
        curves,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateDependentSweep {
    pub rates: Vec<f64>,
    /// Correction with the true rate-dependent model.
    pub matched: Vec<f64>,
    /// Correction with a constant deadtime.
    pub constant: Vec<f64>,
    pub assumed_tau: f64,
    /// Zero crossings of the constant-deadtime curve, located by bisection.
    pub crossings: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Deterministic `κ` for a detector with rate-dependent deadtime corrected
/// either with the matching model or with a constant deadtime.
pub fn sweep_rate_dependent(
    true_model: &DeadtimeModel,
    assumed_constant_tau: f64,
    rate_grid: &[f64],
) -> Result<RateDependentSweep> {
    true_model.validate()?;
    let assumed = DeadtimeModel {
        kind: crate::detector::DeadtimeKind::Constant,
        tau0: assumed_constant_tau,
        slope: 0.0,
        ..*true_model
    };
    assumed.validate()?;
    let amps = [1.0; 3];
    let constant_at = |r: f64| deterministic_kappa(r, amps, true_model, Some(&assumed));

    let mut out = RateDependentSweep {
        rates: Vec::new(),
        matched: Vec::new(),
        constant: Vec::new(),
        assumed_tau: assumed_constant_tau,
        crossings: Vec::new(),
        warnings: Vec::new(),
    };
    for &r in rate_grid {
        let pair = deterministic_kappa(r, amps, true_model, Some(true_model)).and_then(|m| Ok((m, constant_at(r)?)));
        match pair {
            Ok((m, c)) => {
                out.rates.push(r);
                out.matched.push(m);
                out.constant.push(c);
            }
            Err(e) => {
                out.warnings.push(format!("grid truncated at {r:.4e}/s ({e})"));
                break;
            }
        }
    }

    for i in 1..out.rates.len() {
        let (k0, k1) = (out.constant[i - 1], out.constant[i]);
        if k0 == 0.0 {
            out.crossings.push(out.rates[i - 1]);
        } else if k0 * k1 < 0.0 {
            out.crossings.push(bisect(&constant_at, out.rates[i - 1], out.rates[i])?);
        }
    }
    Ok(out)
}

fn bisect(f: &impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut f_lo = f(lo)?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Shot-noise bias statistics at one rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasStudy {
    pub rate_hz: f64,
    pub runs: usize,
    pub mean_eps: f64,
    pub mean_delta: f64,
    /// `None` when no run had negative `ε`.
    pub mean_delta_given_eps_neg: Option<f64>,
    /// `None` when no run had positive `ε`.
    pub mean_delta_given_eps_pos: Option<f64>,
    pub n_eps_neg: usize,
    pub n_eps_pos: usize,
    pub mean_kappa: f64,
    pub n_undefined: usize,
}

/// Bias study for a coherent source, an ideal detector and 1 s per
/// configuration.
pub fn bias_study(rate: f64, runs: usize, seed: u64) -> Result<BiasStudy> {
    bias_study_with_source(&SourceModel::coherent(rate)?, rate, runs, 1.0, seed)
}

pub fn bias_study_with_source(
    source: &SourceModel,
    rate: f64,
    runs: usize,
    acquisition_time: f64,
    seed: u64,
) -> Result<BiasStudy> {
    if runs < 1000 {
        return Err(Error::Domain(format!("bias study needs >= 1000 runs, got {runs}")));
    }
    let mut config = CampaignConfig::new(*source, DeadtimeModel::linear_detector(), vec![rate], runs, seed);
    config.acquisition_time = acquisition_time;
    config.keep_samples = true;
    let result = run_campaign(&config)?;
    if let Some(e) = result.errors.first() {
        return Err(Error::Validity(e.message.clone()));
    }
    let samples = &result.samples.as_ref().expect("samples kept")[0];
    let summary = &result.summaries[0];

    let conditional = |keep: fn(f64) -> bool| {
        let picked: Vec<f64> = samples.iter().filter(|s| keep(s.epsilon)).map(|s| s.delta).collect();
        let mean = (!picked.is_empty()).then(|| picked.iter().sum::<f64>() / picked.len() as f64);
        (mean, picked.len())
    };
    let (neg, n_neg) = conditional(|e| e < 0.0);
    let (pos, n_pos) = conditional(|e| e > 0.0);

    Ok(BiasStudy {
        rate_hz: rate,
        runs,
        mean_eps: summary.mean_eps,
        mean_delta: summary.mean_delta,
        mean_delta_given_eps_neg: neg,
        mean_delta_given_eps_pos: pos,
        n_eps_neg: n_neg,
        n_eps_pos: n_pos,
        mean_kappa: summary.mean_kappa,
        n_undefined: summary.n_undefined,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Convergence {
    pub passed: bool,
    /// `|mean_{N+1} − mean_N|` for `N = 1 .. n−1`.
    pub increments: Vec<f64>,
}

impl Convergence {
    pub fn final_increment(&self) -> f64 {
        *self.increments.last().expect("at least one increment")
    }
}

/// Tracks how much the running mean moves when one more sample is added.
pub fn convergence_check(samples: &[f64], tolerance: f64) -> Result<Convergence> {
    if samples.len() < 2 {
        return Err(Error::Domain("convergence check needs >= 2 samples".into()));
    }
    let mut increments = Vec::with_capacity(samples.len() - 1);
    let mut sum = samples[0];
    let mut mean = sum;
    for (i, &x) in samples.iter().enumerate().skip(1) {
        sum += x;
        let next = sum / (i + 1) as f64;
        increments.push((next - mean).abs());
        mean = next;
    }
    let passed = *increments.last().expect("nonempty") < tolerance;
    Ok(Convergence { passed, increments })
}
