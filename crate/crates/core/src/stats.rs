//! Histograms, normal fits and summary statistics for `κ` samples.

use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt};
use nalgebra::storage::Owned;
use nalgebra::{DVector, Dyn, OMatrix, Vector3, U3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower bound on the automatically chosen number of bins.
pub const MIN_AUTO_BINS: usize = 10;
const MAX_AUTO_BINS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_edges[1] - self.bin_edges[0]
    }
}

/// Equal-width histogram spanning `[min, max]`. The maximum falls in the
/// last bin. Constant data get a unit-width span centred on the value.
pub fn build_histogram(data: &[f64], n_bins: usize) -> Result<Histogram> {
    if data.is_empty() {
        return Err(Error::Domain("cannot histogram empty data".into()));
    }
    if n_bins == 0 {
        return Err(Error::Domain("need at least one bin".into()));
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("data contain non-finite values".into()));
    }
    let (mut lo, mut hi) = min_max(data);
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / n_bins as f64;
    let mut bin_edges: Vec<f64> = (0..n_bins).map(|k| lo + width * k as f64).collect();
    bin_edges.push(hi);

    let mut counts = vec![0u64; n_bins];
    for &x in data {
        let k = (((x - lo) / width) as usize).min(n_bins - 1);
        counts[k] += 1;
    }
    Ok(Histogram { bin_edges, counts })
}

/// Freedman–Diaconis bin count, at least [`MIN_AUTO_BINS`].
pub fn auto_bin_count(data: &[f64]) -> usize {
    if data.len() < 2 {
        return MIN_AUTO_BINS;
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let span = sorted[sorted.len() - 1] - sorted[0];
    if iqr <= 0.0 || span <= 0.0 {
        return MIN_AUTO_BINS;
    }
    let width = 2.0 * iqr / (sorted.len() as f64).cbrt();
    ((span / width).ceil() as usize).clamp(MIN_AUTO_BINS, MAX_AUTO_BINS)
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

fn min_max(data: &[f64]) -> (f64, f64) {
    data.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    MomentsOnData,
    LeastSquaresOnHistogram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistogramWeighting {
    #[default]
    Unweighted,
    /// Residuals scaled by `1/sqrt(max(count, 1))`.
    Poisson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalFit {
    pub mu: f64,
    pub sigma: f64,
    pub method: FitMethod,
    pub n: usize,
}

/// Fits a normal distribution to raw samples.
///
/// The histogram path bins the data with [`auto_bin_count`] and uses
/// unweighted least squares.
pub fn fit_normal(data: &[f64], method: FitMethod) -> Result<NormalFit> {
    let distinct = data.iter().any(|&x| x != data[0]);
    if data.len() < 2 || !distinct {
        return Err(Error::Degenerate("need at least two distinct values".into()));
    }
    match method {
        FitMethod::MomentsOnData => {
            let s = summary(data)?;
            Ok(NormalFit {
                mu: s.mean,
                sigma: s.std,
                method,
                n: data.len(),
            })
        }
        FitMethod::LeastSquaresOnHistogram => {
            let hist = build_histogram(data, auto_bin_count(data))?;
            fit_normal_histogram(&hist, HistogramWeighting::Unweighted)
        }
    }
}

/// Least-squares Gaussian `A exp(−(x−μ)²/2σ²)` through the bin counts.
pub fn fit_normal_histogram(hist: &Histogram, weighting: HistogramWeighting) -> Result<NormalFit> {
    if hist.counts.iter().filter(|&&c| c > 0).count() < 3 {
        return Err(Error::Degenerate("need at least three nonzero bins".into()));
    }
    let x = hist.bin_centers();
    let y: Vec<f64> = hist.counts.iter().map(|&c| c as f64).collect();
    let n = hist.total();

    // start from the binned moments
    let mu0 = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() / n as f64;
    let var0 = x.iter().zip(&y).map(|(a, b)| b * (a - mu0).powi(2)).sum::<f64>() / n as f64;
    let sigma0 = var0.sqrt().max(hist.bin_width());
    let amp0 = y.iter().cloned().fold(0.0, f64::max);

    // work in units of the starting σ so the parameters are of order one
    let scale = sigma0;
    let weights = y
        .iter()
        .map(|&c| match weighting {
            HistogramWeighting::Unweighted => 1.0,
            HistogramWeighting::Poisson => 1.0 / c.max(1.0).sqrt(),
        })
        .collect();
    let problem = GaussianProblem {
        p: Vector3::new(amp0, 0.0, 1.0),
        x: DVector::from_iterator(x.len(), x.iter().map(|v| (v - mu0) / scale)),
        y: DVector::from_vec(y),
        w: DVector::from_vec(weights),
    };
    let (solved, report) = LevenbergMarquardt::new().minimize(problem);
    let [_, m, s] = [solved.p[0], solved.p[1], solved.p[2]];
    if !report.termination.was_successful() || !(m.is_finite() && s.is_finite()) || s == 0.0 {
        return Err(Error::Degenerate(format!(
            "histogram fit did not converge ({:?})",
            report.termination
        )));
    }
    Ok(NormalFit {
        mu: mu0 + m * scale,
        sigma: s.abs() * scale,
        method: FitMethod::LeastSquaresOnHistogram,
        n: n as usize,
    })
}

struct GaussianProblem {
    /// amplitude, centre, width
    p: Vector3<f64>,
    x: DVector<f64>,
    y: DVector<f64>,
    w: DVector<f64>,
}

impl LeastSquaresProblem<f64, Dyn, U3> for GaussianProblem {
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, U3>;
    type ParameterStorage = Owned<f64, U3>;

    fn set_params(&mut self, p: &Vector3<f64>) {
        self.p = *p;
    }

    fn params(&self) -> Vector3<f64> {
        self.p
    }

    fn residuals(&self) -> Option<DVector<f64>> {
        let (a, m, s) = (self.p[0], self.p[1], self.p[2]);
        Some(DVector::from_fn(self.x.len(), |i, _| {
            let z = (self.x[i] - m) / s;
            self.w[i] * (a * (-0.5 * z * z).exp() - self.y[i])
        }))
    }

    fn jacobian(&self) -> Option<OMatrix<f64, Dyn, U3>> {
        let (a, m, s) = (self.p[0], self.p[1], self.p[2]);
        let mut j = OMatrix::<f64, Dyn, U3>::zeros(self.x.len());
        for i in 0..self.x.len() {
            let z = (self.x[i] - m) / s;
            let g = (-0.5 * z * z).exp();
            j[(i, 0)] = self.w[i] * g;
            j[(i, 1)] = self.w[i] * a * g * z / s;
            j[(i, 2)] = self.w[i] * a * g * z * z / s;
        }
        Some(j)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Corrected sample standard deviation.
    pub std: f64,
    pub stderr: f64,
    pub n: usize,
}

pub fn summary(data: &[f64]) -> Result<Summary> {
    if data.len() < 2 {
        return Err(Error::Domain(format!("summary needs >= 2 values, got {}", data.len())));
    }
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let std = (data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    Ok(Summary {
        mean,
        std,
        stderr: std / n.sqrt(),
        n: data.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    fn gaussian(n: usize, mu: f64, sigma: f64, seed: u64) -> Vec<f64> {
        let mut gen = rng::from_seed(seed);
        let d = Normal::new(mu, sigma).unwrap();
        (0..n).map(|_| d.sample(&mut gen)).collect()
    }

    #[test]
    fn histogram_examples() {
        let h = build_histogram(&[3.0], 1).unwrap();
        assert_eq!(h.counts, vec![1]);
        let h = build_histogram(&[0.0, 0.5, 1.0], 2).unwrap();
        assert_eq!(h.counts, vec![1, 2]);
        assert_eq!(h.bin_edges, vec![0.0, 0.5, 1.0]);
        assert!(build_histogram(&[], 3).is_err());
        assert!(build_histogram(&[1.0], 0).is_err());
    }

    #[test]
    fn histogram_uniform_binomial() {
        let mut gen = rng::from_seed(8);
        let data: Vec<f64> = (0..100_000).map(|_| gen.random::<f64>()).collect();
        let h = build_histogram(&data, 10).unwrap();
        let sigma = (1e5f64 * 0.1 * 0.9).sqrt();
        for c in h.counts {
            assert!((c as f64 - 1e4).abs() < 3.0 * sigma, "{c}");
        }
    }

    #[test]
    fn auto_bins() {
        assert_eq!(auto_bin_count(&[1.0; 50]), MIN_AUTO_BINS);
        let data = gaussian(5000, 0.0, 1.0, 1);
        let n = auto_bin_count(&data);
        assert!((20..100).contains(&n), "{n}");
    }

    #[test]
    fn fit_degenerate() {
        assert!(fit_normal(&[2.0; 5], FitMethod::MomentsOnData).is_err());
        assert!(fit_normal(&[2.0; 5], FitMethod::LeastSquaresOnHistogram).is_err());
        let h = Histogram {
            bin_edges: vec![0.0, 1.0, 2.0, 3.0],
            counts: vec![0, 5, 3],
        };
        assert!(fit_normal_histogram(&h, HistogramWeighting::Unweighted).is_err());
    }

    #[test]
    fn symmetric_two_point() {
        let data: Vec<f64> = (0..20).map(|i| if i % 2 == 0 { -1.0 } else { 1.0 }).collect();
        assert_eq!(fit_normal(&data, FitMethod::MomentsOnData).unwrap().mu, 0.0);
    }

    #[test]
    fn recovers_gaussian_parameters() {
        let (mu, sigma) = (3.96e-4, 5.23e-4);
        let data = gaussian(5000, mu, sigma, 21);
        for method in [FitMethod::MomentsOnData, FitMethod::LeastSquaresOnHistogram] {
            let f = fit_normal(&data, method).unwrap();
            assert!((f.mu - mu).abs() < 3.0 * sigma / 5000f64.sqrt(), "{method:?} {f:?}");
            assert!((f.sigma / sigma - 1.0).abs() < 0.05, "{method:?} {f:?}");
        }
        let h = build_histogram(&data, auto_bin_count(&data)).unwrap();
        let f = fit_normal_histogram(&h, HistogramWeighting::Poisson).unwrap();
        assert!((f.sigma / sigma - 1.0).abs() < 0.05);
    }

    #[test]
    fn methods_agree() {
        let data = gaussian(20_000, -2.0, 0.7, 4);
        let a = fit_normal(&data, FitMethod::MomentsOnData).unwrap();
        let b = fit_normal(&data, FitMethod::LeastSquaresOnHistogram).unwrap();
        assert!((a.mu - b.mu).abs() < 0.02 * a.sigma);
        assert!((a.sigma / b.sigma - 1.0).abs() < 0.02);
    }

    #[test]
    fn summary_examples() {
        let s = summary(&[1.0, 1.0, 1.0, 3.0]).unwrap();
        assert_eq!(s.mean, 1.5);
        assert_eq!(s.std, 1.0);
        assert_eq!(s.stderr, 0.5);
        assert_eq!(summary(&[-4.0, 4.0]).unwrap().mean, 0.0);
        assert!(summary(&[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn histogram_conserves_counts(data in proptest::collection::vec(-1e3..1e3f64, 1..300), bins in 1usize..50) {
            let h = build_histogram(&data, bins).unwrap();
            prop_assert_eq!(h.total(), data.len() as u64);
            prop_assert_eq!(h.counts.len() + 1, h.bin_edges.len());
            prop_assert!(h.bin_edges.windows(2).all(|w| w[0] < w[1]));
        }

        #[test]
        fn fit_equivariance(a in 0.01..100.0f64, b in -10.0..10.0f64, seed in 0u64..50) {
            let data = gaussian(2000, 0.3, 1.2, seed);
            let moved: Vec<f64> = data.iter().map(|x| a * x + b).collect();
            for method in [FitMethod::MomentsOnData, FitMethod::LeastSquaresOnHistogram] {
                let f = fit_normal(&data, method).unwrap();
                let g = fit_normal(&moved, method).unwrap();
                prop_assert!((g.mu - (a * f.mu + b)).abs() < 1e-6 * (a + b.abs()));
                prop_assert!((g.sigma / (a * f.sigma) - 1.0).abs() < 1e-6);
            }
        }
    }
}
