//! Photon statistics of the light sources.
//!
//! Three models are provided: a shot-noise limited coherent state, an ideal
//! pulsed single-photon source, and a pulsed source with a residual
//! two-photon component characterised by its pulse-wise `g2(0)`.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Exp, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Largest number of pulses or expected events a timestamp train may hold.
pub const MAX_TRAIN_EVENTS: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceModel {
    /// Poissonian photon statistics.
    Coherent { mean_rate: f64 },
    /// At most one photon per pulse, no photon-number fluctuations.
    IdealSps {
        pulse_period: f64,
        emission_probability: f64,
    },
    /// Per-pulse photon number in {0, 1, 2}; `emission_probability` is the
    /// mean photon number per pulse.
    ContaminatedSps {
        pulse_period: f64,
        emission_probability: f64,
        g2_zero: f64,
    },
}

impl SourceModel {
    pub fn coherent(mean_rate: f64) -> Result<Self> {
        let s = SourceModel::Coherent { mean_rate };
        s.validate()?;
        Ok(s)
    }

    pub fn ideal_sps(pulse_period: f64, emission_probability: f64) -> Result<Self> {
        let s = SourceModel::IdealSps {
            pulse_period,
            emission_probability,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn contaminated_sps(pulse_period: f64, emission_probability: f64, g2_zero: f64) -> Result<Self> {
        let s = SourceModel::ContaminatedSps {
            pulse_period,
            emission_probability,
            g2_zero,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SourceModel::Coherent { mean_rate } => {
                if !(mean_rate.is_finite() && mean_rate >= 0.0) {
                    return Err(Error::Domain(format!("mean rate must be >= 0, got {mean_rate}")));
                }
            }
            SourceModel::IdealSps {
                pulse_period,
                emission_probability,
            } => check_pulsed(pulse_period, emission_probability)?,
            SourceModel::ContaminatedSps {
                pulse_period,
                emission_probability,
                g2_zero,
            } => {
                check_pulsed(pulse_period, emission_probability)?;
                if !(0.0..1.0).contains(&g2_zero) {
                    return Err(Error::Domain(format!("g2(0) must lie in [0, 1), got {g2_zero}")));
                }
            }
        }
        Ok(())
    }

    /// Mean photon rate leaving the source, photons/s.
    pub fn mean_rate(&self) -> f64 {
        match *self {
            SourceModel::Coherent { mean_rate } => mean_rate,
            SourceModel::IdealSps {
                pulse_period,
                emission_probability,
            }
            | SourceModel::ContaminatedSps {
                pulse_period,
                emission_probability,
                ..
            } => emission_probability / pulse_period,
        }
    }

    pub fn pulse_period(&self) -> Option<f64> {
        match *self {
            SourceModel::Coherent { .. } => None,
            SourceModel::IdealSps { pulse_period, .. }
            | SourceModel::ContaminatedSps { pulse_period, .. } => Some(pulse_period),
        }
    }

    pub fn g2_zero(&self) -> f64 {
        match *self {
            SourceModel::Coherent { .. } => 1.0,
            SourceModel::IdealSps { .. } => 0.0,
            SourceModel::ContaminatedSps { g2_zero, .. } => g2_zero,
        }
    }

    /// True when the source emits without photon-number fluctuations.
    pub fn is_noise_free(&self) -> bool {
        matches!(self, SourceModel::IdealSps { .. })
    }

    /// Same kind of source retuned to emit `rate` photons/s. Pulsed sources
    /// keep their period and adjust the per-pulse photon number.
    pub fn with_mean_rate(&self, rate: f64) -> Result<Self> {
        let s = match *self {
            SourceModel::Coherent { .. } => SourceModel::Coherent { mean_rate: rate },
            SourceModel::IdealSps { pulse_period, .. } => SourceModel::IdealSps {
                pulse_period,
                emission_probability: rate * pulse_period,
            },
            SourceModel::ContaminatedSps {
                pulse_period,
                g2_zero,
                ..
            } => SourceModel::ContaminatedSps {
                pulse_period,
                emission_probability: rate * pulse_period,
                g2_zero,
            },
        };
        s.validate()?;
        Ok(s)
    }

    /// Probabilities of 0, 1 and 2 photons in one pulse.
    pub fn pulse_photon_probabilities(&self) -> Option<[f64; 3]> {
        match *self {
            SourceModel::Coherent { .. } => None,
            SourceModel::IdealSps {
                emission_probability: p,
                ..
            } => Some([1.0 - p, p, 0.0]),
            SourceModel::ContaminatedSps {
                emission_probability: mu,
                g2_zero,
                ..
            } => {
                // g2 = 2 P2 / mu^2 with mu = P1 + 2 P2
                let p2 = 0.5 * g2_zero * mu * mu;
                let p1 = mu - 2.0 * p2;
                Some([1.0 - p1 - p2, p1, p2])
            }
        }
    }
}

fn check_pulsed(pulse_period: f64, emission_probability: f64) -> Result<()> {
    if !(pulse_period.is_finite() && pulse_period > 0.0) {
        return Err(Error::Domain(format!("pulse period must be > 0, got {pulse_period}")));
    }
    if !(0.0..=1.0).contains(&emission_probability) {
        return Err(Error::Domain(format!(
            "emission probability must lie in [0, 1], got {emission_probability}"
        )));
    }
    Ok(())
}

/// Photon counts collected over a fixed window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountSample {
    pub counts: u64,
    pub duration: f64,
}

impl CountSample {
    pub fn new(counts: u64, duration: f64) -> Result<Self> {
        check_duration(duration)?;
        Ok(Self { counts, duration })
    }

    pub fn effective_rate(&self) -> f64 {
        self.counts as f64 / self.duration
    }
}

fn check_duration(duration: f64) -> Result<()> {
    if duration.is_finite() && duration > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("duration must be > 0, got {duration}")))
    }
}

fn check_transmission(transmission: f64) -> Result<()> {
    if (0.0..=1.0).contains(&transmission) {
        Ok(())
    } else {
        Err(Error::Domain(format!("transmission must lie in [0, 1], got {transmission}")))
    }
}

/// Number of pulse slots `k * period` inside `[0, duration)`.
pub fn pulse_count(pulse_period: f64, duration: f64) -> u64 {
    let ratio = duration / pulse_period;
    let nearest = ratio.round();
    // 1 s / 100 ns is 9999999.999...; treat near-integers as exact
    if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as u64
    } else {
        ratio.ceil() as u64
    }
}

pub(crate) fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean)
        .map(|d| d.sample(rng) as u64)
        .unwrap_or(0)
}

pub(crate) fn binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).map(|d| d.sample(rng)).unwrap_or(0)
}

/// Draws the photon count reaching a detector behind `transmission` within
/// `duration` seconds.
///
/// Path loss thins single photons one by one (binomial), so even the ideal
/// single-photon source shows partition noise when `transmission < 1`.
pub fn draw_counts(
    source: &SourceModel,
    transmission: f64,
    duration: f64,
    seed: u64,
) -> Result<CountSample> {
    let mut gen = rng::from_seed(seed);
    draw_counts_with(source, transmission, duration, &mut gen)
}

pub fn draw_counts_with<R: Rng + ?Sized>(
    source: &SourceModel,
    transmission: f64,
    duration: f64,
    rng: &mut R,
) -> Result<CountSample> {
    source.validate()?;
    check_transmission(transmission)?;
    check_duration(duration)?;
    let counts = match *source {
        SourceModel::Coherent { mean_rate } => poisson(mean_rate * transmission * duration, rng),
        SourceModel::IdealSps {
            pulse_period,
            emission_probability,
        } => {
            let emitted = (pulse_count(pulse_period, duration) as f64 * emission_probability).round() as u64;
            binomial(emitted, transmission, rng)
        }
        SourceModel::ContaminatedSps { pulse_period, .. } => {
            let stats = sample_pulses_with(source, pulse_count(pulse_period, duration), rng)?;
            binomial(stats.photons(), transmission, rng)
        }
    };
    CountSample::new(counts, duration)
}

/// Histogram of per-pulse photon numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct PulseStatistics {
    pub empty: u64,
    pub single: u64,
    pub double: u64,
}

impl PulseStatistics {
    pub fn pulses(&self) -> u64 {
        self.empty + self.single + self.double
    }

    pub fn photons(&self) -> u64 {
        self.single + 2 * self.double
    }

    /// Pulse-wise `g2(0) = 2 P2 / (P1 + 2 P2)^2`.
    pub fn g2_zero(&self) -> Option<f64> {
        let n = self.pulses() as f64;
        let (p1, p2) = (self.single as f64 / n, self.double as f64 / n);
        let mean = p1 + 2.0 * p2;
        (n > 0.0 && mean > 0.0).then(|| 2.0 * p2 / (mean * mean))
    }
}

/// Samples the photon number of `pulses` consecutive pulses.
pub fn sample_pulses(source: &SourceModel, pulses: u64, seed: u64) -> Result<PulseStatistics> {
    sample_pulses_with(source, pulses, &mut rng::from_seed(seed))
}

fn sample_pulses_with<R: Rng + ?Sized>(
    source: &SourceModel,
    pulses: u64,
    rng: &mut R,
) -> Result<PulseStatistics> {
    let [_, p1, p2] = source
        .pulse_photon_probabilities()
        .ok_or_else(|| Error::Domain("continuous-wave source has no pulses".into()))?;
    let single = binomial(pulses, p1, rng);
    let rest = pulses - single;
    let double = if p1 < 1.0 {
        binomial(rest, p2 / (1.0 - p1), rng)
    } else {
        0
    };
    Ok(PulseStatistics {
        empty: rest - double,
        single,
        double,
    })
}

/// Photon arrival times in `[0, duration)`.
///
/// Pulsed sources emit at integer multiples of the pulse period, with both
/// photons of a two-photon pulse sharing the same timestamp; the coherent
/// source is a homogeneous Poisson process.
pub fn pulse_train_timestamps(source: &SourceModel, duration: f64, seed: u64) -> Result<Vec<f64>> {
    source.validate()?;
    if duration == 0.0 {
        return Ok(Vec::new());
    }
    check_duration(duration)?;
    let mut gen = rng::from_seed(seed);

    match *source {
        SourceModel::Coherent { mean_rate } => {
            let expected = mean_rate * duration;
            if expected > MAX_TRAIN_EVENTS {
                return Err(Error::TooLarge(format!("{expected:.3e} expected arrivals")));
            }
            if mean_rate == 0.0 {
                return Ok(Vec::new());
            }
            let exp = Exp::new(mean_rate).map_err(|e| Error::Domain(e.to_string()))?;
            let mut times = Vec::with_capacity((expected * 1.01 + 16.0) as usize);
            let mut t = exp.sample(&mut gen);
            while t < duration {
                times.push(t);
                t += exp.sample(&mut gen);
            }
            Ok(times)
        }
        SourceModel::IdealSps { pulse_period, .. } | SourceModel::ContaminatedSps { pulse_period, .. } => {
            let slots = duration / pulse_period;
            if slots > MAX_TRAIN_EVENTS {
                return Err(Error::TooLarge(format!("{slots:.3e} pulses")));
            }
            let [_, p1, p2] = source.pulse_photon_probabilities().expect("pulsed source");
            let mut times = Vec::new();
            for k in 0..pulse_count(pulse_period, duration) {
                let t = k as f64 * pulse_period;
                let u: f64 = gen.random();
                let photons = if u < p1 {
                    1
                } else if u < p1 + p2 {
                    2
                } else {
                    0
                };
                times.extend(std::iter::repeat_n(t, photons));
            }
            Ok(times)
        }
    }
}
