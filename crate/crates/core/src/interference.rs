//! The Sorkin estimator for third-order interference.
//!
//! With three paths A, B, C that can each be blocked, eight count rates are
//! measured. Born's rule makes every detection probability a quadratic form
//! in the path amplitudes, so the combination
//!
//! ```text
//! ε = R_ABC − R_AB − R_AC − R_BC + R_A + R_B + R_C − R_0
//! ```
//!
//! vanishes identically. It is normalised by the summed magnitude of the
//! two-path interference terms, `κ = ε / δ`. Rates are stored raw; the dark
//! rate `R_0` enters the formulas directly and cancels.

use std::fmt;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// A subset of the three paths left open.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ShutterConfig(u8);

impl ShutterConfig {
    pub const NONE: Self = Self(0);
    pub const A: Self = Self(0b001);
    pub const B: Self = Self(0b010);
    pub const C: Self = Self(0b100);
    pub const AB: Self = Self(0b011);
    pub const AC: Self = Self(0b101);
    pub const BC: Self = Self(0b110);
    pub const ABC: Self = Self(0b111);

    /// All eight configurations, in octet field order.
    pub const ALL: [Self; 8] = [
        Self::NONE,
        Self::A,
        Self::B,
        Self::C,
        Self::AB,
        Self::AC,
        Self::BC,
        Self::ABC,
    ];

    pub fn from_mask(mask: u8) -> Result<Self> {
        if mask > 0b111 {
            return Err(Error::Domain(format!("shutter mask {mask} out of range")));
        }
        Ok(Self(mask))
    }

    pub fn mask(self) -> u8 {
        self.0
    }

    pub fn is_open(self, path: usize) -> bool {
        path < 3 && self.0 & (1 << path) != 0
    }

    pub fn open_count(self) -> u32 {
        self.0.count_ones()
    }

    /// Position of this configuration in [`ShutterConfig::ALL`].
    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&c| c == self).expect("all masks are listed")
    }
}

impl fmt::Display for ShutterConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            return f.write_str("0");
        }
        for (i, name) in ['A', 'B', 'C'].into_iter().enumerate() {
            if self.is_open(i) {
                write!(f, "{name}")?;
            }
        }
        Ok(())
    }
}

impl TryFrom<String> for ShutterConfig {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        if s == "0" {
            return Ok(Self::NONE);
        }
        let mut mask = 0u8;
        for ch in s.chars() {
            let bit = match ch.to_ascii_uppercase() {
                'A' => 0b001,
                'B' => 0b010,
                'C' => 0b100,
                _ => return Err(Error::Parse(format!("bad shutter configuration '{s}'"))),
            };
            mask |= bit;
        }
        if mask == 0 {
            return Err(Error::Parse("empty shutter configuration".into()));
        }
        Ok(Self(mask))
    }
}

impl From<ShutterConfig> for String {
    fn from(c: ShutterConfig) -> String {
        c.to_string()
    }
}

/// Count rates for all eight shutter configurations, counts/s.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RateOctet {
    pub r0: f64,
    pub ra: f64,
    pub rb: f64,
    pub rc: f64,
    pub rab: f64,
    pub rac: f64,
    pub rbc: f64,
    pub rabc: f64,
}

impl RateOctet {
    /// Builds an octet from rates listed in [`ShutterConfig::ALL`] order.
    pub fn from_array(r: [f64; 8]) -> Result<Self> {
        let o = Self {
            r0: r[0],
            ra: r[1],
            rb: r[2],
            rc: r[3],
            rab: r[4],
            rac: r[5],
            rbc: r[6],
            rabc: r[7],
        };
        o.validate()?;
        Ok(o)
    }

    pub fn from_fn(mut f: impl FnMut(ShutterConfig) -> f64) -> Result<Self> {
        Self::from_array(ShutterConfig::ALL.map(&mut f))
    }

    pub fn to_array(&self) -> [f64; 8] {
        [
            self.r0, self.ra, self.rb, self.rc, self.rab, self.rac, self.rbc, self.rabc,
        ]
    }

    pub fn get(&self, config: ShutterConfig) -> f64 {
        self.to_array()[config.index()]
    }

    pub fn validate(&self) -> Result<()> {
        for (c, r) in ShutterConfig::ALL.iter().zip(self.to_array()) {
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::Domain(format!("rate for configuration {c} is {r}")));
            }
        }
        Ok(())
    }

    /// Applies `f` to every rate.
    pub fn try_map(&self, f: impl FnMut(f64) -> Result<f64>) -> Result<Self> {
        let mapped: Vec<f64> = self.to_array().into_iter().map(f).collect::<Result<_>>()?;
        Self::from_array(mapped.try_into().expect("eight rates"))
    }
}

/// Third-order interference term.
pub fn epsilon(r: &RateOctet) -> f64 {
    r.rabc - r.rab - r.rac - r.rbc + r.ra + r.rb + r.rc - r.r0
}

/// Sum of the magnitudes of the three two-path interference terms.
pub fn delta(r: &RateOctet) -> f64 {
    (r.rab - r.ra - r.rb + r.r0).abs()
        + (r.rac - r.ra - r.rc + r.r0).abs()
        + (r.rbc - r.rb - r.rc + r.r0).abs()
}

/// The Sorkin parameter `ε/δ`.
pub fn kappa(r: &RateOctet) -> Result<f64> {
    let d = delta(r);
    if d > 0.0 {
        Ok(epsilon(r) / d)
    } else {
        Err(Error::UndefinedKappa)
    }
}

/// One evaluated octet from a measurement run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaSample {
    pub epsilon: f64,
    pub delta: f64,
    /// `None` when `delta` is zero.
    pub kappa: Option<f64>,
    pub config_order: [ShutterConfig; 8],
    /// Acquisition time per configuration, seconds.
    pub acquisition_time: f64,
}

impl KappaSample {
    pub fn from_octet(rates: &RateOctet, config_order: [ShutterConfig; 8], acquisition_time: f64) -> Self {
        Self {
            epsilon: epsilon(rates),
            delta: delta(rates),
            kappa: kappa(rates).ok(),
            config_order,
            acquisition_time,
        }
    }
}

/// A uniformly random measurement order of the eight configurations.
pub fn randomized_config_order(seed: u64) -> [ShutterConfig; 8] {
    let mut order = ShutterConfig::ALL;
    order.shuffle(&mut rng::from_seed(seed));
    order
}

/// Expected detected-port rate of a three-path interferometer operated in
/// an interference maximum.
///
/// The open paths add coherently, giving
/// `incident · (Σ_open a_i)² / (Σ_all a_i)² + dark`, so the all-open rate
/// equals `incident_rate`.
pub fn interferometer_rate(
    config: ShutterConfig,
    path_amplitudes: [f64; 3],
    incident_rate: f64,
    dark_rate: f64,
) -> Result<f64> {
    interferometer_rate_with_phases(config, path_amplitudes, [0.0; 3], 1.0, incident_rate, dark_rate)
}

/// General form of [`interferometer_rate`] with path phases and an overall
/// transmission factor. The normalisation still refers to the in-phase
/// all-open rate, so `incident_rate · transmission` is the largest rate any
/// configuration can reach.
pub fn interferometer_rate_with_phases(
    config: ShutterConfig,
    path_amplitudes: [f64; 3],
    phases: [f64; 3],
    transmission: f64,
    incident_rate: f64,
    dark_rate: f64,
) -> Result<f64> {
    if path_amplitudes.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
        return Err(Error::Domain(format!("amplitudes must be >= 0, got {path_amplitudes:?}")));
    }
    let norm: f64 = path_amplitudes.iter().sum();
    if norm == 0.0 {
        return Err(Error::Domain("at least one path amplitude must be positive".into()));
    }
    for (name, v) in [("incident rate", incident_rate), ("dark rate", dark_rate)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::Domain(format!("{name} must be >= 0, got {v}")));
        }
    }
    if !(transmission > 0.0 && transmission <= 1.0) {
        return Err(Error::Domain(format!("transmission must lie in (0, 1], got {transmission}")));
    }
    let field: Complex64 = (0..3)
        .filter(|&i| config.is_open(i))
        .map(|i| Complex64::from_polar(path_amplitudes[i], phases[i]))
        .sum();
    Ok(incident_rate * transmission * field.norm_sqr() / (norm * norm) + dark_rate)
}

/// The expected octet for the given interferometer settings.
pub fn interferometer_octet(
    path_amplitudes: [f64; 3],
    incident_rate: f64,
    dark_rate: f64,
) -> Result<RateOctet> {
    let rates = ShutterConfig::ALL
        .iter()
        .map(|&c| interferometer_rate(c, path_amplitudes, incident_rate, dark_rate))
        .collect::<Result<Vec<_>>>()?;
    RateOctet::from_array(rates.try_into().expect("eight rates"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn octet(r: [f64; 8]) -> RateOctet {
        RateOctet::from_array(r).unwrap()
    }

    const BORN: [f64; 8] = [0.0, 1.0, 1.0, 1.0, 4.0, 4.0, 4.0, 9.0];
    const ADDITIVE: [f64; 8] = [0.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 3.0];

    #[test]
    fn epsilon_examples() {
        assert_eq!(epsilon(&octet(BORN)), 0.0);
        assert_eq!(epsilon(&octet(ADDITIVE)), 0.0);
        let mut r = BORN;
        r[7] = 9.06;
        assert!((epsilon(&octet(r)) - 0.06).abs() < 1e-12);
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta(&octet(BORN)), 6.0);
        assert_eq!(delta(&octet(ADDITIVE)), 0.0);
        assert_eq!(delta(&octet(BORN.map(|x| x + 0.5))), 6.0);
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(kappa(&octet(BORN)).unwrap(), 0.0);
        let mut r = BORN;
        r[7] = 9.06;
        assert!((kappa(&octet(r)).unwrap() - 0.01).abs() < 1e-12);
        assert_eq!(kappa(&octet(ADDITIVE)), Err(Error::UndefinedKappa));
    }

    #[test]
    fn octet_validation() {
        assert!(RateOctet::from_array([0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).is_err());
        assert!(RateOctet::from_array([f64::NAN; 8]).is_err());
        let o = octet(BORN);
        assert_eq!(o.get(ShutterConfig::ABC), 9.0);
        assert_eq!(o.get(ShutterConfig::NONE), 0.0);
    }

    #[test]
    fn shutter_configs() {
        let mut masks: Vec<u8> = ShutterConfig::ALL.iter().map(|c| c.mask()).collect();
        masks.sort();
        masks.dedup();
        assert_eq!(masks.len(), 8);
        for c in ShutterConfig::ALL {
            assert_eq!(ShutterConfig::try_from(c.to_string()).unwrap(), c);
        }
        assert_eq!(ShutterConfig::BC.to_string(), "BC");
        assert!(ShutterConfig::try_from("AD".to_string()).is_err());
        assert!(ShutterConfig::from_mask(8).is_err());
    }

    #[test]
    fn config_order_is_reproducible_permutation() {
        assert_eq!(randomized_config_order(42), randomized_config_order(42));
        let mut sorted = randomized_config_order(7);
        sorted.sort_by_key(|c| c.index());
        assert_eq!(sorted, ShutterConfig::ALL);
    }

    #[test]
    fn config_order_first_entry_uniform() {
        let n = 10_000;
        let mut first = [0usize; 8];
        for seed in 0..n {
            first[randomized_config_order(seed as u64)[0].index()] += 1;
        }
        let p = 1.0 / 8.0;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        for count in first {
            assert!((count as f64 - n as f64 * p).abs() < 3.0 * sigma, "{first:?}");
        }
    }

    #[test]
    fn interferometer_rate_examples() {
        let a = [1.0; 3];
        assert_eq!(interferometer_rate(ShutterConfig::NONE, a, 1e6, 25.0).unwrap(), 25.0);
        assert!((interferometer_rate(ShutterConfig::B, a, 9e6, 0.0).unwrap() - 1e6).abs() < 1e-6);
        assert_eq!(interferometer_rate(ShutterConfig::ABC, a, 9e6, 0.0).unwrap(), 9e6);
        assert!(kappa(&interferometer_octet(a, 1e6, 0.0).unwrap()).unwrap().abs() < 1e-15);
        assert!(interferometer_rate(ShutterConfig::A, [-1.0, 1.0, 1.0], 1.0, 0.0).is_err());
        assert!(interferometer_rate(ShutterConfig::A, [0.0; 3], 1.0, 0.0).is_err());
    }

    fn rate_vec() -> impl Strategy<Value = [f64; 8]> {
        proptest::array::uniform8(0.0..1e6f64)
    }

    proptest! {
        #[test]
        fn born_generator_gives_null(
            a in proptest::array::uniform3(0.01..1.0f64),
            phi in proptest::array::uniform3(-3.2..3.2f64),
            t in 0.05..1.0f64,
            incident in 1.0..1e7f64,
            dark in 0.0..1e3f64,
        ) {
            let o = RateOctet::from_fn(|c| {
                interferometer_rate_with_phases(c, a, phi, t, incident, dark).unwrap()
            }).unwrap();
            if let Ok(k) = kappa(&o) {
                prop_assert!(k.abs() <= 1e-9, "{k}");
            }
            prop_assert!(epsilon(&o).abs() <= 1e-9 * incident);
        }

        #[test]
        fn kappa_scale_invariant(r in rate_vec(), s in 1e-3..1e3f64) {
            let base = octet(r);
            let scaled = octet(r.map(|x| x * s));
            if let (Ok(k1), Ok(k2)) = (kappa(&base), kappa(&scaled)) {
                prop_assert!((k1 - k2).abs() <= 1e-9 * (1.0 + k1.abs()));
            }
        }

        #[test]
        fn offset_cancels(r in rate_vec(), c in 0.0..1e4f64) {
            let base = octet(r);
            let shifted = octet(r.map(|x| x + c));
            prop_assert!((epsilon(&base) - epsilon(&shifted)).abs() <= 1e-8 * (1.0 + c + 8e6));
            prop_assert!((delta(&base) - delta(&shifted)).abs() <= 1e-8 * (1.0 + c + 8e6));
        }

        #[test]
        fn formulas_match_direct_sum(r in rate_vec()) {
            let o = octet(r);
            let signs = [-1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, 1.0];
            let direct: f64 = r.iter().zip(signs).map(|(x, s)| x * s).sum();
            prop_assert!((epsilon(&o) - direct).abs() <= 1e-8 * 8e6);
            let pair = |ij: usize, i: usize, j: usize| (r[ij] - r[i] - r[j] + r[0]).abs();
            let d = pair(4, 1, 2) + pair(5, 1, 3) + pair(6, 2, 3);
            prop_assert!((delta(&o) - d).abs() <= 1e-8 * 8e6);
        }
    }
}
