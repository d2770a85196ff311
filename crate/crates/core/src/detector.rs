//! Single-photon avalanche diode response.
//!
//! The steady-state response to a Poissonian photon stream of actual rate
//! `R_act` is the non-paralyzable deadtime law
//!
//! ```text
//! R_det = η R_act / (1 + τ η R_act) + R_0
//! ```
//!
//! with detection efficiency `η` applied before the deadtime (a photon that
//! does not avalanche does not dead-time the diode) and dark counts `R_0`
//! added outside the saturation term. The deadtime is either constant or
//! shrinks linearly with the photon-triggered detected rate,
//! `τ(R) = τ0 − slope·R`.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, SimRng};
use crate::source::poisson;

/// Fraction of the zero-deadtime rate `tau0/slope` up to which the linear
/// deadtime law is trusted.
pub const LINEAR_VALIDITY_FRACTION: f64 = 0.8;
/// Largest `R·τ(R)` accepted for the linear deadtime law.
pub const MAX_DEAD_FRACTION: f64 = 0.8;

const FIXED_POINT_MAX_ITER: usize = 100;
const FIXED_POINT_TOL: f64 = 1e-12;
const FIXED_POINT_DAMPING: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeadtimeKind {
    Constant,
    LinearInRate,
}

fn unit_efficiency() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeadtimeModel {
    pub kind: DeadtimeKind,
    /// Deadtime at zero rate, seconds.
    pub tau0: f64,
    /// Deadtime decrease per unit detected rate, s per (1/s). Linear kind only.
    #[serde(default)]
    pub slope: f64,
    /// Dark count rate, counts/s.
    #[serde(default)]
    pub dark_rate: f64,
    #[serde(default = "unit_efficiency")]
    pub efficiency: f64,
}

impl DeadtimeModel {
    pub fn constant(tau: f64) -> Result<Self> {
        let m = Self {
            kind: DeadtimeKind::Constant,
            tau0: tau,
            slope: 0.0,
            dark_rate: 0.0,
            efficiency: 1.0,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn linear_in_rate(tau0: f64, slope: f64) -> Result<Self> {
        let m = Self {
            kind: DeadtimeKind::LinearInRate,
            tau0,
            slope,
            dark_rate: 0.0,
            efficiency: 1.0,
        };
        m.validate()?;
        Ok(m)
    }

    /// An ideal linear detector (zero deadtime).
    pub fn linear_detector() -> Self {
        Self {
            kind: DeadtimeKind::Constant,
            tau0: 0.0,
            slope: 0.0,
            dark_rate: 0.0,
            efficiency: 1.0,
        }
    }

    pub fn with_dark_rate(mut self, dark_rate: f64) -> Result<Self> {
        self.dark_rate = dark_rate;
        self.validate()?;
        Ok(self)
    }

    pub fn with_efficiency(mut self, efficiency: f64) -> Result<Self> {
        self.efficiency = efficiency;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau0.is_finite() && self.tau0 >= 0.0) {
            return Err(Error::Domain(format!("tau0 must be >= 0, got {}", self.tau0)));
        }
        if !(self.dark_rate.is_finite() && self.dark_rate >= 0.0) {
            return Err(Error::Domain(format!("dark rate must be >= 0, got {}", self.dark_rate)));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::Domain(format!(
                "efficiency must lie in (0, 1], got {}",
                self.efficiency
            )));
        }
        if self.kind == DeadtimeKind::LinearInRate
            && !(self.slope.is_finite() && self.slope >= 0.0 && self.tau0 > 0.0)
        {
            return Err(Error::Domain(format!(
                "linear deadtime needs tau0 > 0 and slope >= 0, got tau0 = {}, slope = {}",
                self.tau0, self.slope
            )));
        }
        Ok(())
    }

    /// Largest photon-triggered detected rate where the model is trusted.
    pub fn max_valid_rate(&self) -> f64 {
        match self.kind {
            DeadtimeKind::Constant => f64::INFINITY,
            DeadtimeKind::LinearInRate if self.slope == 0.0 => f64::INFINITY,
            DeadtimeKind::LinearInRate => LINEAR_VALIDITY_FRACTION * self.tau0 / self.slope,
        }
    }

    /// Deadtime at photon-triggered detected rate `rate`.
    pub fn tau_at_rate(&self, rate: f64) -> Result<f64> {
        if !(rate.is_finite() && rate >= 0.0) {
            return Err(Error::Domain(format!("rate must be >= 0, got {rate}")));
        }
        match self.kind {
            DeadtimeKind::Constant => Ok(self.tau0),
            DeadtimeKind::LinearInRate => {
                let tau = self.tau0 - self.slope * rate;
                if rate > self.max_valid_rate() || rate * tau > MAX_DEAD_FRACTION {
                    return Err(Error::Validity(format!(
                        "rate {rate:.4e}/s beyond the linear deadtime range (max {:.4e}/s)",
                        self.max_valid_rate()
                    )));
                }
                Ok(tau)
            }
        }
    }

    /// Steady-state detected rate for a Poissonian stream of `actual_rate`.
    pub fn detected_rate(&self, actual_rate: f64) -> Result<f64> {
        detected_rate(actual_rate, self)
    }

    pub fn correct_rate(&self, detected: f64) -> Result<f64> {
        correct_rate(detected, self)
    }
}

/// Steady-state detected rate for a Poissonian photon stream.
///
/// For the rate-dependent law the deadtime is evaluated at the detected
/// photon-triggered rate, found by damped fixed-point iteration.
pub fn detected_rate(actual_rate: f64, model: &DeadtimeModel) -> Result<f64> {
    model.validate()?;
    if !(actual_rate.is_finite() && actual_rate >= 0.0) {
        return Err(Error::Domain(format!("actual rate must be >= 0, got {actual_rate}")));
    }
    let x = model.efficiency * actual_rate;
    let photon = match model.kind {
        DeadtimeKind::Constant => x / (1.0 + model.tau0 * x),
        DeadtimeKind::LinearInRate => linear_fixed_point(x, model)?,
    };
    Ok(photon + model.dark_rate)
}

fn linear_fixed_point(x: f64, model: &DeadtimeModel) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    let mut d = x / (1.0 + model.tau0 * x);
    for _ in 0..FIXED_POINT_MAX_ITER {
        let tau = model.tau_at_rate(d)?;
        let next = (1.0 - FIXED_POINT_DAMPING) * d + FIXED_POINT_DAMPING * x / (1.0 + tau * x);
        if (next - d).abs() <= FIXED_POINT_TOL * next {
            model.tau_at_rate(next)?;
            return Ok(next);
        }
        d = next;
    }
    Err(Error::Validity(format!(
        "deadtime fixed point did not converge for incident rate {x:.4e}/s"
    )))
}

/// Inverts [`detected_rate`]: the actual incident rate implied by `detected`.
pub fn correct_rate(detected: f64, assumed: &DeadtimeModel) -> Result<f64> {
    assumed.validate()?;
    if !detected.is_finite() || detected < assumed.dark_rate {
        return Err(Error::Domain(format!(
            "detected rate {detected} is below the dark rate {}",
            assumed.dark_rate
        )));
    }
    let photon = detected - assumed.dark_rate;
    let tau = assumed.tau_at_rate(photon)?;
    let dead = tau * photon;
    if dead >= 1.0 {
        return Err(Error::NonInvertible { rate: photon, tau });
    }
    Ok(photon / (1.0 - dead) / assumed.efficiency)
}

/// Steady-state detected rate for a pulsed source.
///
/// `trigger_probability` is the chance that a pulse fires the diode when it
/// is live. After a detection every pulse closer than `τ` is lost, so with
/// `J` such pulses the rate is `p / (T (1 + J p))`. Pulse periods longer
/// than `τ` give a perfectly linear response.
pub fn detected_rate_pulsed(
    trigger_probability: f64,
    pulse_period: f64,
    model: &DeadtimeModel,
) -> Result<f64> {
    model.validate()?;
    if !(0.0..=1.0).contains(&trigger_probability) {
        return Err(Error::Domain(format!(
            "trigger probability must lie in [0, 1], got {trigger_probability}"
        )));
    }
    if !(pulse_period.is_finite() && pulse_period > 0.0) {
        return Err(Error::Domain(format!("pulse period must be > 0, got {pulse_period}")));
    }
    let p = trigger_probability;
    let rate_for = |blocked: f64| p / (pulse_period * (1.0 + blocked * p));
    let blocked_for = |tau: f64| ((tau / pulse_period).ceil() - 1.0).max(0.0);

    let mut blocked = blocked_for(model.tau0);
    let mut d = rate_for(blocked);
    if model.kind == DeadtimeKind::LinearInRate {
        let mut settled = false;
        for _ in 0..FIXED_POINT_MAX_ITER {
            let next_blocked = blocked_for(model.tau_at_rate(d)?);
            if next_blocked == blocked {
                settled = true;
                break;
            }
            blocked = next_blocked;
            d = rate_for(blocked);
        }
        if !settled {
            return Err(Error::Validity("pulsed deadtime response did not settle".into()));
        }
    }
    Ok(d + model.dark_rate)
}

/// Applies non-paralyzable deadtime to a photon arrival stream.
///
/// Each photon arriving while the diode is live avalanches with probability
/// `η`; dark counts are drawn as an independent Poisson stream over
/// `[0, duration)` and always avalanche when live. An event is registered
/// iff it occurs at least `τ` after the previous registered event. For the
/// rate-dependent law `τ` is taken at the steady-state detected rate of the
/// stream.
pub fn apply_deadtime_events(
    arrivals: &[f64],
    duration: f64,
    model: &DeadtimeModel,
    seed: u64,
) -> Result<Vec<f64>> {
    model.validate()?;
    if let Some(i) = arrivals.windows(2).position(|w| w[0].is_nan() || w[1].is_nan() || w[0] > w[1]) {
        return Err(Error::Unsorted(i + 1));
    }
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(Error::Domain(format!("duration must be >= 0, got {duration}")));
    }

    let tau = match model.kind {
        DeadtimeKind::Constant => model.tau0,
        DeadtimeKind::LinearInRate => {
            let incident = if duration > 0.0 {
                arrivals.len() as f64 / duration
            } else {
                0.0
            };
            let photon_only = DeadtimeModel {
                dark_rate: 0.0,
                ..*model
            };
            model.tau_at_rate(detected_rate(incident, &photon_only)?)?
        }
    };

    let mut efficiency_rng = rng::substream(seed, 0);
    let darks = dark_stream(model.dark_rate, duration, &mut rng::substream(seed, 1))?;

    let mut detected = Vec::new();
    let mut last: Option<f64> = None;
    let (mut i, mut j) = (0, 0);
    while i < arrivals.len() || j < darks.len() {
        let take_dark = j < darks.len() && (i >= arrivals.len() || darks[j] < arrivals[i]);
        let t = if take_dark { darks[j] } else { arrivals[i] };
        let live = last.is_none_or(|l| t >= l + tau);
        if live {
            let fires = take_dark || model.efficiency >= 1.0 || efficiency_rng.random::<f64>() < model.efficiency;
            if fires {
                detected.push(t);
                last = Some(t);
            }
        }
        if take_dark {
            j += 1;
        } else {
            i += 1;
        }
    }
    Ok(detected)
}

fn dark_stream(rate: f64, duration: f64, rng: &mut SimRng) -> Result<Vec<f64>> {
    if rate == 0.0 || duration == 0.0 {
        return Ok(Vec::new());
    }
    let exp = Exp::new(rate).map_err(|e| Error::Domain(e.to_string()))?;
    let mut out = Vec::new();
    let mut t = exp.sample(rng);
    while t < duration {
        out.push(t);
        t += exp.sample(rng);
    }
    Ok(out)
}

/// Detected rates for the four blocked/unblocked combinations of two
/// mutually incoherent sources.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionMeasurement {
    pub r_both: f64,
    pub r_only1: f64,
    pub r_only2: f64,
    pub r_none: f64,
    #[serde(default = "one_repetition")]
    pub repetitions: u32,
}

fn one_repetition() -> u32 {
    1
}

impl SuperpositionMeasurement {
    pub fn new(r_both: f64, r_only1: f64, r_only2: f64, r_none: f64) -> Result<Self> {
        let m = Self {
            r_both,
            r_only1,
            r_only2,
            r_none,
            repetitions: 1,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for r in [self.r_both, self.r_only1, self.r_only2, self.r_none] {
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::Domain(format!("rates must be >= 0, got {r}")));
            }
        }
        if self.repetitions == 0 {
            return Err(Error::Domain("repetitions must be >= 1".into()));
        }
        Ok(())
    }

    /// Dark-subtracted rates (both, only1, only2).
    fn photon_rates(&self) -> [f64; 3] {
        [
            self.r_both - self.r_none,
            self.r_only1 - self.r_none,
            self.r_only2 - self.r_none,
        ]
    }

    /// Additivity residual of the deadtime-corrected rates, and its
    /// derivative with respect to `tau`.
    pub fn residual(&self, tau: f64) -> (f64, f64) {
        let [a, b, c] = self.photon_rates();
        let corr = |x: f64| x / (1.0 - tau * x);
        let dcorr = |x: f64| (x / (1.0 - tau * x)).powi(2);
        (corr(a) - corr(b) - corr(c), dcorr(a) - dcorr(b) - dcorr(c))
    }

    /// Simulates one measurement with actual source rates `rate1`, `rate2`
    /// seen through `detector`. With `window = Some(T)` the four rates carry
    /// Poisson counting noise of a `T`-second acquisition.
    pub fn simulate<R: Rng + ?Sized>(
        rate1: f64,
        rate2: f64,
        detector: &DeadtimeModel,
        window: Option<f64>,
        rng: &mut R,
    ) -> Result<Self> {
        let exact = [
            detector.detected_rate(rate1 + rate2)?,
            detector.detected_rate(rate1)?,
            detector.detected_rate(rate2)?,
            detector.detected_rate(0.0)?,
        ];
        let rates = match window {
            None => exact,
            Some(t) => exact.map(|r| poisson(r * t, rng) as f64 / t),
        };
        Self::new(rates[0], rates[1], rates[2], rates[3])
    }
}

/// Deadtime extracted by the superposition method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeadtimeEstimate {
    pub tau: f64,
    /// Sample standard deviation of the per-measurement estimates; zero for
    /// a single measurement.
    pub uncertainty: f64,
    pub per_measurement: Vec<f64>,
}

/// Finds the constant deadtime minimising the summed squared additivity
/// residuals of the corrected rates.
pub fn characterize_deadtime(measurements: &[SuperpositionMeasurement]) -> Result<DeadtimeEstimate> {
    if measurements.is_empty() {
        return Err(Error::Domain("no superposition measurements".into()));
    }
    for m in measurements {
        m.validate()?;
        let [a, b, c] = m.photon_rates();
        if a <= 0.0 || b <= 0.0 || c <= 0.0 {
            return Err(Error::IllConditioned(
                "dark-subtracted rates must be positive".into(),
            ));
        }
    }

    let tau = minimize_residuals(measurements)?;
    let per_measurement = measurements
        .iter()
        .map(|m| minimize_residuals(std::slice::from_ref(m)))
        .collect::<Result<Vec<_>>>()?;
    let uncertainty = if per_measurement.len() > 1 {
        let n = per_measurement.len() as f64;
        let mean = per_measurement.iter().sum::<f64>() / n;
        (per_measurement.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };

    if tau <= 0.0 {
        return Err(Error::IllConditioned(format!(
            "no deadtime nonlinearity observable (best tau = {tau:.3e} s)"
        )));
    }
    if per_measurement.len() > 1 && tau < 3.0 * uncertainty {
        return Err(Error::IllConditioned(format!(
            "deadtime {tau:.3e} s not resolved above its spread {uncertainty:.3e} s"
        )));
    }
    Ok(DeadtimeEstimate {
        tau,
        uncertainty,
        per_measurement,
    })
}

fn minimize_residuals(measurements: &[SuperpositionMeasurement]) -> Result<f64> {
    let objective = |tau: f64| -> (f64, f64, f64) {
        // (sum r^2, sum r r', sum r'^2)
        measurements.iter().fold((0.0, 0.0, 0.0), |acc, m| {
            let (r, dr) = m.residual(tau);
            (acc.0 + r * r, acc.1 + r * dr, acc.2 + dr * dr)
        })
    };

    let max_rate = measurements
        .iter()
        .flat_map(|m| m.photon_rates())
        .fold(0.0, f64::max);
    let bound = 0.999 / max_rate;

    if objective(0.0).2 == 0.0 {
        return Err(Error::IllConditioned("objective is flat in tau".into()));
    }

    // coarse scan, then Gauss-Newton with step halving
    const SCAN: usize = 400;
    let mut tau = (0..=SCAN)
        .map(|k| -bound + 2.0 * bound * k as f64 / SCAN as f64)
        .map(|t| (t, objective(t).0))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(t, _)| t)
        .unwrap_or(0.0);

    for _ in 0..100 {
        let (f, g, h) = objective(tau);
        if h == 0.0 {
            break;
        }
        let mut step = -g / h;
        let mut accepted = false;
        for _ in 0..60 {
            let trial = tau + step;
            if trial.abs() < bound && objective(trial).0 <= f {
                tau = trial;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted || step.abs() <= 1e-15 * tau.abs().max(1e-12) {
            break;
        }
    }
    Ok(tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const NS: f64 = 1e-9;
    const FS: f64 = 1e-15;

    fn published_linear() -> DeadtimeModel {
        DeadtimeModel::linear_in_rate(51.8 * NS, 3.333 * FS).unwrap()
    }

    #[test]
    fn detected_rate_examples() {
        let m = DeadtimeModel::constant(45.0 * NS).unwrap().with_dark_rate(100.0).unwrap();
        assert_eq!(detected_rate(0.0, &m).unwrap(), 100.0);

        let m = DeadtimeModel::constant(45.0 * NS).unwrap();
        assert_relative_eq!(detected_rate(1e7, &m).unwrap(), 1e7 / 1.45, max_relative = 1e-14);
        assert_relative_eq!(detected_rate(1e7, &m).unwrap(), 6.8966e6, max_relative = 1e-5);

        let lin = DeadtimeModel::linear_detector().with_efficiency(0.5).unwrap().with_dark_rate(7.0).unwrap();
        assert_eq!(detected_rate(1e6, &lin).unwrap(), 0.5e6 + 7.0);
        assert!(matches!(detected_rate(-1.0, &m), Err(Error::Domain(_))));
    }

    /// The linear deadtime law turns the steady state into a quadratic
    /// `s x d² − (1 + τ0 x) d + x = 0`, solved here in closed form.
    #[test]
    fn linear_fixed_point_matches_quadratic_root() {
        let m = published_linear();
        for x in [1e3, 1e5, 1e6, 2.49e6, 5e6, 1e7] {
            let b = 1.0 + m.tau0 * x;
            let a = m.slope * x;
            let root = 2.0 * x / (b + (b * b - 4.0 * a * x).sqrt());
            assert_relative_eq!(detected_rate(x, &m).unwrap(), root, max_relative = 1e-11);
        }
    }

    #[test]
    fn correct_rate_examples() {
        let m = DeadtimeModel::constant(45.0 * NS).unwrap().with_dark_rate(250.0).unwrap();
        assert_eq!(correct_rate(250.0, &m).unwrap(), 0.0);
        assert!(matches!(correct_rate(100.0, &m), Err(Error::Domain(_))));
        assert!(matches!(
            correct_rate(250.0 + 1.0 / (45.0 * NS), &m),
            Err(Error::NonInvertible { .. })
        ));
    }

    #[test]
    fn mismatched_correction_follows_composition() {
        let truth = DeadtimeModel::constant(43.5 * NS).unwrap();
        let assumed = DeadtimeModel::constant(45.0 * NS).unwrap();
        let r = 1e7;
        let corrected = correct_rate(detected_rate(r, &truth).unwrap(), &assumed).unwrap();
        // 1/c = 1/r + tau_true - tau_assumed
        let expected = 1.0 / (1.0 / r - 1.5 * NS);
        assert_relative_eq!(corrected, expected, max_relative = 1e-12);
        assert!((corrected / r - 1.0 - 0.0152284).abs() < 1e-6);
    }

    #[test]
    fn tau_at_rate_examples() {
        let m = published_linear();
        assert_relative_eq!(m.tau_at_rate(0.0).unwrap(), 51.8 * NS, max_relative = 1e-15);
        assert_relative_eq!(m.tau_at_rate(1e6).unwrap(), 48.467 * NS, max_relative = 1e-12);
        assert_relative_eq!(m.tau_at_rate(2.49e6).unwrap(), 43.5 * NS, max_relative = 1e-3);
        assert!(matches!(m.tau_at_rate(1.3e7), Err(Error::Validity(_))));
        let c = DeadtimeModel::constant(45.0 * NS).unwrap();
        assert_eq!(c.tau_at_rate(1e9).unwrap(), 45.0 * NS);
    }

    #[test]
    fn linear_model_refuses_saturation() {
        let m = published_linear();
        assert!(matches!(detected_rate(1e9, &m), Err(Error::Validity(_))));
        assert!(detected_rate(1e7, &m).is_ok());
    }

    #[test]
    fn efficiency_changes_response() {
        let a = DeadtimeModel::constant(43.5 * NS).unwrap().with_efficiency(0.34).unwrap();
        let b = DeadtimeModel::constant(43.5 * NS).unwrap().with_efficiency(0.32).unwrap();
        assert!(detected_rate(2e6, &a).unwrap() > detected_rate(2e6, &b).unwrap());
    }

    #[test]
    fn pulsed_response() {
        let m = DeadtimeModel::constant(45.0 * NS).unwrap();
        // period longer than tau: linear
        assert_relative_eq!(detected_rate_pulsed(0.3, 100.0 * NS, &m).unwrap(), 3e6, max_relative = 1e-15);
        // 20 ns period: pulses at 20 and 40 ns are blocked
        let d = detected_rate_pulsed(1.0, 20.0 * NS, &m).unwrap();
        assert_relative_eq!(d, 1.0 / (60.0 * NS), max_relative = 1e-12);
        assert!(detected_rate_pulsed(0.5, 100.0 * NS, &published_linear()).is_ok());
    }

    #[test]
    fn deadtime_events_definition() {
        let tau = 45.0 * NS;
        let m = DeadtimeModel::constant(tau).unwrap();
        let out = apply_deadtime_events(&[0.0, tau / 2.0, 2.0 * tau], 1e-6, &m, 0).unwrap();
        assert_eq!(out, vec![0.0, 2.0 * tau]);
        assert!(apply_deadtime_events(&[], 1e-6, &m, 0).unwrap().is_empty());
        assert!(matches!(
            apply_deadtime_events(&[0.0, 2.0, 1.0], 3.0, &m, 0),
            Err(Error::Unsorted(2))
        ));
    }

    #[test]
    fn deadtime_events_match_steady_state() {
        use crate::source::{pulse_train_timestamps, SourceModel};
        let m = DeadtimeModel::constant(45.0 * NS).unwrap();
        let arrivals = pulse_train_timestamps(&SourceModel::coherent(1e7).unwrap(), 1.0, 9).unwrap();
        let detected = apply_deadtime_events(&arrivals, 1.0, &m, 9).unwrap().len() as f64;
        let expected = detected_rate(arrivals.len() as f64, &m).unwrap();
        assert!((detected - expected).abs() < 3.0 * expected.sqrt(), "{detected} vs {expected}");
    }

    #[test]
    fn darks_and_efficiency_in_event_sim() {
        let m = DeadtimeModel::constant(10.0 * NS)
            .unwrap()
            .with_dark_rate(1e4)
            .unwrap()
            .with_efficiency(0.5)
            .unwrap();
        let arrivals: Vec<f64> = (0..100_000).map(|k| k as f64 * 1e-5).collect();
        let out = apply_deadtime_events(&arrivals, 1.0, &m, 4).unwrap();
        // ~5e4 photons + ~1e4 darks, deadtime negligible at these rates
        let n = out.len() as f64;
        assert!((n - 6e4).abs() < 5.0 * 6e4f64.sqrt(), "{n}");
        assert!(out.windows(2).all(|w| w[1] - w[0] >= 10.0 * NS));
    }

    /// Closed form of a single-measurement fit:
    /// `abc τ² − 2bc τ − (a − b − c) = 0`, smaller root.
    fn single_measurement_root(m: &SuperpositionMeasurement) -> f64 {
        let [a, b, c] = m.photon_rates();
        (b * c - (b * b * c * c + a * b * c * (a - b - c)).sqrt()) / (a * b * c)
    }

    #[test]
    fn superposition_noiseless_recovery() {
        let truth = DeadtimeModel::constant(43.5 * NS).unwrap().with_dark_rate(300.0).unwrap();
        let mut gen = rng::from_seed(1);
        let ms: Vec<_> = (0..100)
            .map(|k| {
                let r1 = 2e6 * (1.0 + 0.001 * k as f64);
                SuperpositionMeasurement::simulate(r1, 1.9e6, &truth, None, &mut gen).unwrap()
            })
            .collect();
        let est = characterize_deadtime(&ms).unwrap();
        assert!((est.tau - 43.5 * NS).abs() < 1e-3 * NS, "{}", est.tau);
        for (m, t) in ms.iter().zip(&est.per_measurement) {
            assert_relative_eq!(*t, single_measurement_root(m), max_relative = 1e-9);
        }
    }

    #[test]
    fn superposition_noisy_recovery() {
        let truth = DeadtimeModel::constant(43.5 * NS).unwrap();
        let mut gen = rng::from_seed(2);
        let ms: Vec<_> = (0..100)
            .map(|_| SuperpositionMeasurement::simulate(2e6, 2e6, &truth, Some(1.0), &mut gen).unwrap())
            .collect();
        let est = characterize_deadtime(&ms).unwrap();
        assert!((est.tau - 43.5 * NS).abs() < 3.0 * est.uncertainty);
        for (m, t) in ms.iter().zip(&est.per_measurement) {
            assert_relative_eq!(*t, single_measurement_root(m), max_relative = 1e-6);
        }
    }

    #[test]
    fn linear_detector_is_ill_conditioned() {
        let mut gen = rng::from_seed(3);
        let lin = DeadtimeModel::linear_detector();
        let ms: Vec<_> = (0..10)
            .map(|_| SuperpositionMeasurement::simulate(2e6, 2e6, &lin, None, &mut gen).unwrap())
            .collect();
        assert!(matches!(characterize_deadtime(&ms), Err(Error::IllConditioned(_))));
        assert!(characterize_deadtime(&[]).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_constant(r in 1e3..1e7f64, tau in 1e-9..60e-9f64, dark in 0.0..1e3f64) {
            let m = DeadtimeModel::constant(tau).unwrap().with_dark_rate(dark).unwrap();
            let back = correct_rate(detected_rate(r, &m).unwrap(), &m).unwrap();
            prop_assert!((back / r - 1.0).abs() < 1e-9);
        }

        #[test]
        fn round_trip_linear(r in 1e3..1e7f64, eta in 0.3..1.0f64) {
            let m = published_linear().with_efficiency(eta).unwrap();
            let back = correct_rate(detected_rate(r, &m).unwrap(), &m).unwrap();
            prop_assert!((back / r - 1.0).abs() < 1e-9);
        }

        #[test]
        fn monotone_and_bounded(a in 0.0..1e9f64, b in 0.0..1e9f64, tau in 1e-9..1e-7f64) {
            let m = DeadtimeModel::constant(tau).unwrap().with_dark_rate(50.0).unwrap();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let (dlo, dhi) = (detected_rate(lo, &m).unwrap(), detected_rate(hi, &m).unwrap());
            prop_assert!(dlo <= dhi);
            prop_assert!(dhi <= 1.0 / tau + 50.0);
        }
    }
}
