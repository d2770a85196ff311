//! Transfer-matrix treatment of two- and three-path interferometers.
//!
//! Matrices act on column vectors of field amplitudes, one entry per port.
//! Beamsplitters use the symmetric convention
//!
//! ```text
//! BS(R) = [ sqrt(1-R)   i sqrt(R)  ]
//!         [ i sqrt(R)   sqrt(1-R)  ]
//! ```
//!
//! and phase shifts are applied as `exp(+i phi)` on the named path. Global
//! phases are never observable; only output intensities are reported.

use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt};
use nalgebra::storage::Owned;
use nalgebra::{DMatrix, Matrix3x2, Vector2, Vector3, U2, U3};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Square complex amplitude transfer matrix of a 2- or 3-port element.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTransferMatrix {
    m: DMatrix<Complex64>,
}

impl ComplexTransferMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_row_slice(dim: usize, entries: &[Complex64]) -> Result<Self> {
        check_dim(dim)?;
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        Ok(Self {
            m: DMatrix::from_row_slice(dim, dim, entries),
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            m: DMatrix::identity(dim, dim),
        })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.m[(row, col)]
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn adjoint(&self) -> Self {
        Self { m: self.m.adjoint() }
    }

    /// `self × rhs`.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: rhs.dim(),
            });
        }
        Ok(Self { m: &self.m * &rhs.m })
    }

    /// Output amplitudes for the given input amplitudes.
    pub fn apply(&self, input: &[Complex64]) -> Result<Vec<Complex64>> {
        if input.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: input.len(),
            });
        }
        let out = &self.m * nalgebra::DVector::from_column_slice(input);
        Ok(out.iter().copied().collect())
    }

    /// Largest absolute entry of `M†M − I`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        let g = self.m.adjoint() * &self.m - DMatrix::<Complex64>::identity(n, n);
        g.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(Error::Domain(format!("matrix dimension must be 2 or 3, got {dim}")))
    }
}

fn check_unit_interval(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must lie in [0, 1], got {x}")))
    }
}

/// Loss and phase of one interferometer arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    /// Amplitude transmission of the arm, in [0, 1].
    pub loss_amplitude: f64,
    /// Phase in radians.
    pub phase: f64,
}

impl PathSpec {
    pub fn new(loss_amplitude: f64, phase: f64) -> Result<Self> {
        check_unit_interval("loss amplitude", loss_amplitude)?;
        if !phase.is_finite() {
            return Err(Error::Domain(format!("phase must be finite, got {phase}")));
        }
        Ok(Self {
            loss_amplitude,
            phase,
        })
    }

    pub fn lossless(phase: f64) -> Result<Self> {
        Self::new(1.0, phase)
    }

    fn amplitude(&self) -> Complex64 {
        Complex64::from_polar(self.loss_amplitude, self.phase)
    }
}

impl Default for PathSpec {
    fn default() -> Self {
        Self {
            loss_amplitude: 1.0,
            phase: 0.0,
        }
    }
}

/// Per-order intensity efficiencies of a 1×3 grating splitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitterSpec {
    pub minus_one: f64,
    pub zero: f64,
    pub plus_one: f64,
}

impl SplitterSpec {
    pub fn new(minus_one: f64, zero: f64, plus_one: f64) -> Result<Self> {
        for (name, t) in [("t-1", minus_one), ("t0", zero), ("t+1", plus_one)] {
            check_unit_interval(name, t)?;
        }
        let total = minus_one + zero + plus_one;
        if total > 1.0 + 1e-12 {
            return Err(Error::Domain(format!(
                "splitter efficiencies sum to {total} > 1"
            )));
        }
        Ok(Self {
            minus_one,
            zero,
            plus_one,
        })
    }

    pub fn orders(&self) -> [f64; 3] {
        [self.minus_one, self.zero, self.plus_one]
    }

    pub fn total(&self) -> f64 {
        self.orders().iter().sum()
    }

    /// Efficiencies rescaled to sum to one.
    pub fn normalized(&self) -> [f64; 3] {
        let total = self.total();
        self.orders().map(|t| t / total)
    }
}

/// Two-port beamsplitter with intensity reflectivity `reflectivity`.
pub fn beamsplitter(reflectivity: f64) -> Result<ComplexTransferMatrix> {
    check_unit_interval("reflectivity", reflectivity)?;
    let t = re((1.0 - reflectivity).sqrt());
    let r = I * reflectivity.sqrt();
    ComplexTransferMatrix::from_row_slice(2, &[t, r, r, t])
}

/// Diagonal propagation matrix `diag(L1 e^{i phi1}, L2 e^{i phi2})`.
pub fn path_matrix(path1: PathSpec, path2: PathSpec) -> Result<ComplexTransferMatrix> {
    let zero = Complex64::new(0.0, 0.0);
    ComplexTransferMatrix::from_row_slice(2, &[path1.amplitude(), zero, zero, path2.amplitude()])
}

/// Composes elements listed in propagation order: the first element acts
/// first, so `[BS, P, BS]` gives `BS × P × BS`.
pub fn compose(elements: &[ComplexTransferMatrix]) -> Result<ComplexTransferMatrix> {
    let (first, rest) = elements
        .split_first()
        .ok_or_else(|| Error::Domain("cannot compose an empty element list".into()))?;
    rest.iter().try_fold(first.clone(), |acc, next| next.mul(&acc))
}

/// Mach–Zehnder interferometer `BS(r_out) × P × BS(r_in)`.
pub fn mach_zehnder(
    r_in: f64,
    path1: PathSpec,
    path2: PathSpec,
    r_out: f64,
) -> Result<ComplexTransferMatrix> {
    compose(&[
        beamsplitter(r_in)?,
        path_matrix(path1, path2)?,
        beamsplitter(r_out)?,
    ])
}

/// Michelson-type interferometer: the same splitter is used on the way in
/// and out and each arm is traversed twice, doubling its phase and loss.
pub fn michelson(reflectivity: f64, path1: PathSpec, path2: PathSpec) -> Result<ComplexTransferMatrix> {
    let bs = beamsplitter(reflectivity)?;
    let p = path_matrix(path1, path2)?;
    compose(&[bs.clone(), p.clone(), p, bs])
}

/// Output-port intensities for unit amplitude injected at `input_port`.
pub fn output_intensities(network: &ComplexTransferMatrix, input_port: usize) -> Result<Vec<f64>> {
    let dim = network.dim();
    if input_port >= dim {
        return Err(Error::BadPort {
            port: input_port,
            dim,
        });
    }
    Ok((0..dim)
        .map(|row| network.entry(row, input_port).norm_sqr())
        .collect())
}

/// Three-port splitter built from three embedded beamsplitters, multiplied
/// as `B12(r1) × B13(r2) × B23(r3)`.
pub fn tritter(r1: f64, r2: f64, r3: f64) -> Result<ComplexTransferMatrix> {
    check_unit_interval("r1", r1)?;
    check_unit_interval("r2", r2)?;
    check_unit_interval("r3", r3)?;
    let b12 = embedded_beamsplitter(r1, 0, 1);
    let b13 = embedded_beamsplitter(r2, 0, 2);
    let b23 = embedded_beamsplitter(r3, 1, 2);
    b12.mul(&b13)?.mul(&b23)
}

fn embedded_beamsplitter(r: f64, a: usize, b: usize) -> ComplexTransferMatrix {
    let mut m = DMatrix::<Complex64>::identity(3, 3);
    let t = re((1.0 - r).sqrt());
    let x = I * r.sqrt();
    m[(a, a)] = t;
    m[(b, b)] = t;
    m[(a, b)] = x;
    m[(b, a)] = x;
    ComplexTransferMatrix { m }
}

/// Internal reflection coefficients reproducing a requested three-way split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TritterSolution {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    /// Sum of the requested intensities. Values below one are treated as
    /// loss outside the (lossless) tritter.
    pub throughput: f64,
    /// Max absolute deviation between forward evaluation and the target.
    pub residual: f64,
}

const SOLVER_TOL: f64 = 1e-9;
const SOLVER_MAX_ITER: usize = 10_000;
const SOLVER_SEED: u64 = 0x7217_7e12;
const SOLVER_STARTS: usize = 16;

/// Finds `(r1, r2, r3)` such that light entering port 0 of
/// [`tritter`] leaves with the given intensity split.
///
/// Port-0 output does not depend on `r3`; it is fixed to 0. Targets summing
/// to less than one are matched up to a common throughput factor. Targets
/// summing to more than one have no solution and report the best residual
/// of a direct fit.
pub fn solve_tritter_ratios(targets: [f64; 3]) -> Result<TritterSolution> {
    if targets.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::Domain(format!(
            "targets must be finite and nonnegative, got {targets:?}"
        )));
    }
    let total: f64 = targets.iter().sum();
    if total <= 0.0 {
        return Err(Error::Domain("targets are all zero".into()));
    }
    if total > 1.0 + SOLVER_TOL {
        let (_, residual) = fit_split(targets);
        return Err(Error::NoSolution { residual });
    }

    let ratios = targets.map(|t| t / total);
    let ((r1, r2), _) = fit_split(ratios);
    let forward = port0_split(r1, r2).map(|x| x * total);
    let residual = max_abs_diff(&forward, &targets);
    if residual > SOLVER_TOL {
        return Err(Error::NoSolution { residual });
    }
    Ok(TritterSolution {
        r1,
        r2,
        r3: 0.0,
        throughput: total,
        residual,
    })
}

fn port0_split(r1: f64, r2: f64) -> [f64; 3] {
    [(1.0 - r1) * (1.0 - r2), r1 * (1.0 - r2), r2]
}

fn max_abs_diff(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Multi-start Levenberg–Marquardt on `r = sin²θ`, which keeps every
/// coefficient inside [0, 1] without explicit bounds.
fn fit_split(target: [f64; 3]) -> ((f64, f64), f64) {
    let mut starts: Vec<[f64; 2]> = vec![[0.0, 0.0], [0.5, 0.5], [1.0, 1.0]];
    let mut gen = rng::from_seed(SOLVER_SEED);
    while starts.len() < SOLVER_STARTS {
        starts.push([
            gen.random_range(0.0..std::f64::consts::FRAC_PI_2),
            gen.random_range(0.0..std::f64::consts::FRAC_PI_2),
        ]);
    }

    let budget = SOLVER_MAX_ITER / SOLVER_STARTS / 3;
    let mut best = ((0.0, 0.0), f64::INFINITY);
    for start in starts {
        let (theta, _) = levenberg_marquardt(start, target, budget);
        let (r1, r2) = (theta[0].sin().powi(2), theta[1].sin().powi(2));
        let residual = max_abs_diff(&port0_split(r1, r2), &target);
        if residual < best.1 {
            best = ((r1, r2), residual);
        }
        if best.1 <= 1e-14 {
            break;
        }
    }
    best
}

/// Port-0 split as a least-squares problem in the angles `θ`.
struct SplitProblem {
    theta: Vector2<f64>,
    target: [f64; 3],
}

impl LeastSquaresProblem<f64, U3, U2> for SplitProblem {
    type ResidualStorage = Owned<f64, U3>;
    type JacobianStorage = Owned<f64, U3, U2>;
    type ParameterStorage = Owned<f64, U2>;

    fn set_params(&mut self, x: &Vector2<f64>) {
        self.theta = *x;
    }

    fn params(&self) -> Vector2<f64> {
        self.theta
    }

    fn residuals(&self) -> Option<Vector3<f64>> {
        let (r1, r2) = (self.theta[0].sin().powi(2), self.theta[1].sin().powi(2));
        let out = port0_split(r1, r2);
        Some(Vector3::from_fn(|k, _| out[k] - self.target[k]))
    }

    fn jacobian(&self) -> Option<Matrix3x2<f64>> {
        let (r1, r2) = (self.theta[0].sin().powi(2), self.theta[1].sin().powi(2));
        let (d1, d2) = ((2.0 * self.theta[0]).sin(), (2.0 * self.theta[1]).sin());
        Some(Matrix3x2::new(
            -(1.0 - r2) * d1,
            -(1.0 - r1) * d2,
            (1.0 - r2) * d1,
            -r1 * d2,
            0.0,
            d2,
        ))
    }
}

fn levenberg_marquardt(theta: [f64; 2], target: [f64; 3], patience: usize) -> ([f64; 2], f64) {
    let problem = SplitProblem {
        theta: Vector2::new(theta[0], theta[1]),
        target,
    };
    let (solved, report) = LevenbergMarquardt::new()
        .with_tol(1e-15)
        .with_patience(patience.max(1))
        .minimize(problem);
    ([solved.theta[0], solved.theta[1]], report.objective_function)
}

/// Theoretical fringe visibility of a double-pass two-path interferometer
/// whose arms carry single-pass intensity efficiencies `t_i`, `t_j`.
///
/// Each arm crosses the splitter twice, so its recombined field amplitude is
/// proportional to the single-pass intensity efficiency.
pub fn two_path_visibility(t_i: f64, t_j: f64) -> Result<f64> {
    for t in [t_i, t_j] {
        if !t.is_finite() || !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("efficiency must lie in (0, 1], got {t}")));
        }
    }
    let denom = t_i * t_i + t_j * t_j;
    if denom == 0.0 {
        return Err(Error::UndefinedVisibility("both efficiencies are zero".into()));
    }
    Ok(2.0 * t_i * t_j / denom)
}

/// Detected intensity of a double-pass multi-path interferometer.
///
/// Arm `k` is entered and left through the splitter with intensity efficiency
/// `efficiencies[k]` on each pass and picks up `phases[k]` on each pass
/// through its phase plate.
pub fn double_pass_intensity(efficiencies: &[f64], phases: &[f64]) -> Result<f64> {
    if efficiencies.len() != phases.len() {
        return Err(Error::DimensionMismatch {
            expected: efficiencies.len(),
            got: phases.len(),
        });
    }
    let mut field = Complex64::new(0.0, 0.0);
    for (&t, &phi) in efficiencies.iter().zip(phases) {
        check_unit_interval("efficiency", t)?;
        let one_pass = Complex64::from_polar(t.sqrt(), phi);
        field += one_pass * one_pass;
    }
    Ok(field.norm_sqr())
}

/// `(Imax − Imin) / (Imax + Imin)` over sampled intensities.
pub fn fringe_visibility(intensity_samples: &[f64]) -> Result<f64> {
    if intensity_samples.is_empty() {
        return Err(Error::UndefinedVisibility("no samples".into()));
    }
    if let Some(bad) = intensity_samples.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::Domain(format!("intensity samples must be nonnegative, got {bad}")));
    }
    let max = intensity_samples.iter().copied().fold(f64::MIN, f64::max);
    let min = intensity_samples.iter().copied().fold(f64::MAX, f64::min);
    if max == 0.0 {
        return Err(Error::UndefinedVisibility("all samples are zero".into()));
    }
    Ok((max - min) / (max + min))
}

/// Quantum bit error ratio of phase encoding limited by visibility `v`.
pub fn qber_from_visibility(v: f64) -> Result<f64> {
    check_unit_interval("visibility", v)?;
    Ok((1.0 - v) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_matrix_eq(a: &ComplexTransferMatrix, b: &ComplexTransferMatrix, tol: f64) {
        assert_eq!(a.dim(), b.dim());
        for r in 0..a.dim() {
            for col in 0..a.dim() {
                let d = (a.entry(r, col) - b.entry(r, col)).norm();
                assert!(d <= tol, "entry ({r},{col}) differs by {d}");
            }
        }
    }

    #[test]
    fn beamsplitter_limits() {
        let id = ComplexTransferMatrix::identity(2).unwrap();
        assert_matrix_eq(&beamsplitter(0.0).unwrap(), &id, 0.0);

        let mirror = ComplexTransferMatrix::from_row_slice(
            2,
            &[c(0.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(0.0, 0.0)],
        )
        .unwrap();
        assert_matrix_eq(&beamsplitter(1.0).unwrap(), &mirror, 0.0);

        let half = beamsplitter(0.5).unwrap();
        for r in 0..2 {
            for col in 0..2 {
                assert_abs_diff_eq!(half.entry(r, col).norm(), FRAC_1_SQRT_2, epsilon = 1e-15);
            }
        }
        assert!(matches!(beamsplitter(1.2), Err(Error::Domain(_))));
        assert!(matches!(beamsplitter(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn path_matrix_examples() {
        let id = ComplexTransferMatrix::identity(2).unwrap();
        let p = path_matrix(PathSpec::default(), PathSpec::default()).unwrap();
        assert_matrix_eq(&p, &id, 0.0);

        let p = path_matrix(PathSpec::new(0.5, PI).unwrap(), PathSpec::default()).unwrap();
        assert_abs_diff_eq!(p.entry(0, 0).re, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.entry(0, 0).im, 0.0, epsilon = 1e-15);
        assert_eq!(p.entry(1, 1), c(1.0, 0.0));

        let p = path_matrix(PathSpec::lossless(PI / 2.0).unwrap(), PathSpec::default()).unwrap();
        assert_abs_diff_eq!(p.entry(0, 0).re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.entry(0, 0).im, 1.0, epsilon = 1e-15);

        assert!(PathSpec::new(1.5, 0.0).is_err());
        assert!(PathSpec::new(0.5, f64::NAN).is_err());
    }

    #[test]
    fn compose_examples() {
        let id = ComplexTransferMatrix::identity(2).unwrap();
        assert_matrix_eq(&compose(&[id.clone(), id.clone()]).unwrap(), &id, 0.0);

        let bs = beamsplitter(0.5).unwrap();
        let mzi = compose(&[bs.clone(), id.clone(), bs.clone()]).unwrap();
        let cross = ComplexTransferMatrix::from_row_slice(
            2,
            &[c(0.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(0.0, 0.0)],
        )
        .unwrap();
        assert_matrix_eq(&mzi, &cross, 1e-15);
        assert_eq!(output_intensities(&mzi, 0).unwrap()[0], 0.0);

        assert!(compose(&[]).is_err());
        let tri = tritter(0.0, 0.0, 0.0).unwrap();
        assert!(matches!(
            compose(&[id, tri]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn compose_applies_in_propagation_order() {
        // A non-symmetric pair exposes the multiplication order.
        let bs = beamsplitter(0.3).unwrap();
        let p = path_matrix(PathSpec::new(0.7, 0.4).unwrap(), PathSpec::default()).unwrap();
        let composed = compose(&[bs.clone(), p.clone()]).unwrap();
        assert_matrix_eq(&composed, &p.mul(&bs).unwrap(), 1e-15);
    }

    #[test]
    fn mzi_gives_sin_squared_fringe() {
        for k in 0..=400 {
            let phi = 2.0 * PI * k as f64 / 400.0;
            let mzi = mach_zehnder(0.5, PathSpec::lossless(phi).unwrap(), PathSpec::default(), 0.5)
                .unwrap();
            let out = output_intensities(&mzi, 0).unwrap();
            // port 0 carries the constructive sum for phi = pi
            assert_abs_diff_eq!(out[0], (phi / 2.0).sin().powi(2), epsilon = 1e-12);
            assert_abs_diff_eq!(out[0] + out[1], 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn michelson_fringe_is_sin_squared_of_plate_phase() {
        for k in 0..=400 {
            let phi = 2.0 * PI * k as f64 / 400.0;
            let m = michelson(0.5, PathSpec::lossless(phi).unwrap(), PathSpec::default()).unwrap();
            let out = output_intensities(&m, 0).unwrap();
            assert_abs_diff_eq!(out[0], phi.sin().powi(2), epsilon = 1e-12);
        }
    }

    #[test]
    fn output_intensities_examples() {
        let id = ComplexTransferMatrix::identity(2).unwrap();
        assert_eq!(output_intensities(&id, 0).unwrap(), vec![1.0, 0.0]);
        let out = output_intensities(&beamsplitter(0.5).unwrap(), 0).unwrap();
        assert_abs_diff_eq!(out[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(out[1], 0.5, epsilon = 1e-15);
        assert!(matches!(
            output_intensities(&id, 2),
            Err(Error::BadPort { port: 2, dim: 2 })
        ));

        let samples: Vec<f64> = (0..=360)
            .map(|k| {
                let phi = 2.0 * PI * k as f64 / 360.0;
                let mzi =
                    mach_zehnder(0.5, PathSpec::lossless(phi).unwrap(), PathSpec::default(), 0.5)
                        .unwrap();
                output_intensities(&mzi, 0).unwrap()[1]
            })
            .collect();
        let max = samples.iter().copied().fold(0.0, f64::max);
        let min = samples.iter().copied().fold(1.0, f64::min);
        assert_abs_diff_eq!(max, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(min, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn lossy_mzi_visibility() {
        let samples: Vec<f64> = (0..720)
            .map(|k| {
                let phi = 2.0 * PI * k as f64 / 720.0;
                let mzi =
                    mach_zehnder(0.5, PathSpec::new(0.5, phi).unwrap(), PathSpec::default(), 0.5)
                        .unwrap();
                let out = output_intensities(&mzi, 0).unwrap();
                assert!(out[0] + out[1] < 1.0);
                out[0]
            })
            .collect();
        assert_abs_diff_eq!(fringe_visibility(&samples).unwrap(), 0.8, epsilon = 1e-9);
    }

    #[test]
    fn tritter_examples() {
        let id = ComplexTransferMatrix::identity(3).unwrap();
        assert_matrix_eq(&tritter(0.0, 0.0, 0.0).unwrap(), &id, 0.0);

        let t = tritter(1.0, 0.0, 0.0).unwrap();
        assert_eq!(t.entry(2, 2), c(1.0, 0.0));
        for k in 0..2 {
            assert_eq!(t.entry(2, k), c(0.0, 0.0));
            assert_eq!(t.entry(k, 2), c(0.0, 0.0));
        }
        assert!(t.is_unitary(1e-12));
        assert!(tritter(0.2, 1.1, 0.0).is_err());
    }

    /// Brute-force grid over (r1, r2, r3) for the equal split.
    #[test]
    fn equal_split_matches_grid_search() {
        let n = 120;
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in 0..=n {
            for j in 0..=n {
                for k in [0, n / 2, n] {
                    let (r1, r2, r3) = (i as f64 / n as f64, j as f64 / n as f64, k as f64 / n as f64);
                    let out = output_intensities(&tritter(r1, r2, r3).unwrap(), 0).unwrap();
                    let dev: f64 = out.iter().map(|x| (x - 1.0 / 3.0).powi(2)).sum();
                    if dev < best.0 {
                        best = (dev, r1, r2);
                    }
                }
            }
        }
        // grid spacing 1/120 brackets r1 = 1/2 and r2 = 1/3 exactly
        assert_abs_diff_eq!(best.1, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(best.2, 1.0 / 3.0, epsilon = 1e-12);

        let sol = solve_tritter_ratios([1.0 / 3.0; 3]).unwrap();
        assert_abs_diff_eq!(sol.r1, 0.5, epsilon = 1e-8);
        assert_abs_diff_eq!(sol.r2, 1.0 / 3.0, epsilon = 1e-8);
        let out = output_intensities(&tritter(sol.r1, sol.r2, sol.r3).unwrap(), 0).unwrap();
        for x in out {
            assert_abs_diff_eq!(x, 1.0 / 3.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn solve_identity_split() {
        let sol = solve_tritter_ratios([1.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(sol.r1, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.r2, 0.0, epsilon = 1e-9);
        assert_eq!(sol.r3, 0.0);
    }

    #[test]
    fn solve_measured_grating_split() {
        let measured = [0.2828, 0.2926, 0.2930];
        let total: f64 = measured.iter().sum();
        let sol = solve_tritter_ratios(measured).unwrap();
        assert_abs_diff_eq!(sol.throughput, total, epsilon = 1e-15);
        let out = output_intensities(&tritter(sol.r1, sol.r2, sol.r3).unwrap(), 0).unwrap();
        for (o, t) in out.iter().zip(measured) {
            assert_abs_diff_eq!(o * total, t, epsilon = 1e-9);
        }
    }

    #[test]
    fn solve_rejects_infeasible_targets() {
        match solve_tritter_ratios([0.6, 0.6, 0.2]) {
            Err(Error::NoSolution { residual }) => assert!(residual > 0.1),
            other => panic!("expected NoSolution, got {other:?}"),
        }
        assert!(matches!(solve_tritter_ratios([0.0; 3]), Err(Error::Domain(_))));
        assert!(matches!(solve_tritter_ratios([-0.1, 0.5, 0.5]), Err(Error::Domain(_))));
    }

    #[test]
    fn two_path_visibility_examples() {
        assert_eq!(two_path_visibility(0.3, 0.3).unwrap(), 1.0);
        let ab = two_path_visibility(0.2828, 0.2926).unwrap();
        assert!((ab - 0.999429).abs() < 2e-5, "{ab}");
        let bc = two_path_visibility(0.2926, 0.2930).unwrap();
        assert!((bc - 0.999998).abs() < 2e-6, "{bc}");
        assert!(matches!(
            two_path_visibility(0.0, 0.0),
            Err(Error::UndefinedVisibility(_))
        ));
        assert!(two_path_visibility(1.2, 0.3).is_err());
    }

    /// The closed-form visibility agrees with a phase sweep of the
    /// double-pass field model.
    #[test]
    fn two_path_visibility_matches_phase_sweep() {
        for (ti, tj) in [(0.2828, 0.2926), (0.2828, 0.2930), (0.1, 0.4), (0.5, 0.5)] {
            let samples: Vec<f64> = (0..=1000)
                .map(|k| {
                    let phi = PI * k as f64 / 1000.0;
                    double_pass_intensity(&[ti, tj], &[phi, 0.0]).unwrap()
                })
                .collect();
            let swept = fringe_visibility(&samples).unwrap();
            assert_abs_diff_eq!(swept, two_path_visibility(ti, tj).unwrap(), epsilon = 1e-12);
        }
    }

    #[test]
    fn fringe_visibility_examples() {
        assert_eq!(fringe_visibility(&[2.0, 2.0, 2.0]).unwrap(), 0.0);
        let s: Vec<f64> = (0..=100).map(|k| (PI * k as f64 / 100.0).sin().powi(2)).collect();
        assert_abs_diff_eq!(fringe_visibility(&s).unwrap(), 1.0, epsilon = 1e-12);
        assert!(matches!(
            fringe_visibility(&[0.0, 0.0]),
            Err(Error::UndefinedVisibility(_))
        ));
        assert!(fringe_visibility(&[]).is_err());
        assert!(fringe_visibility(&[-1.0, 1.0]).is_err());
    }

    #[test]
    fn qber_examples() {
        assert_eq!(qber_from_visibility(1.0).unwrap(), 0.0);
        assert_eq!(qber_from_visibility(0.0).unwrap(), 0.5);
        assert_abs_diff_eq!(qber_from_visibility(0.9858).unwrap(), 0.0071, epsilon = 1e-12);
        assert!(qber_from_visibility(1.01).is_err());
    }

    proptest! {
        #[test]
        fn tritter_is_unitary(r1 in 0.0..=1.0f64, r2 in 0.0..=1.0f64, r3 in 0.0..=1.0f64) {
            prop_assert!(tritter(r1, r2, r3).unwrap().unitarity_defect() <= 1e-12);
        }

        #[test]
        fn beamsplitter_is_unitary(r in 0.0..=1.0f64) {
            prop_assert!(beamsplitter(r).unwrap().unitarity_defect() <= 1e-12);
        }

        #[test]
        fn lossy_paths_lose_energy(l1 in 0.0..1.0f64, phi in 0.0..6.3f64, r in 0.0..=1.0f64) {
            let lossless = mach_zehnder(r, PathSpec::lossless(phi).unwrap(), PathSpec::default(), r).unwrap();
            let sum: f64 = output_intensities(&lossless, 0).unwrap().iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            let lossy = mach_zehnder(r, PathSpec::new(l1, phi).unwrap(), PathSpec::new(l1, 0.0).unwrap(), r).unwrap();
            let sum: f64 = output_intensities(&lossy, 0).unwrap().iter().sum();
            prop_assert!(sum < 1.0);
        }

        #[test]
        fn visibility_is_scale_invariant(ti in 0.01..1.0f64, tj in 0.01..1.0f64, scale in 0.01..1.0f64) {
            let v = two_path_visibility(ti, tj).unwrap();
            let scaled = two_path_visibility(ti * scale, tj * scale).unwrap();
            prop_assert!((v - scaled).abs() < 1e-12);
        }

        #[test]
        fn solver_round_trip(a in 0.0..1.0f64, b in 0.0..1.0f64, c in 0.0..1.0f64) {
            prop_assume!(a + b + c > 1e-3);
            let total = a + b + c;
            let target = [a / total, b / total, c / total];
            let sol = solve_tritter_ratios(target).unwrap();
            let out = output_intensities(&tritter(sol.r1, sol.r2, sol.r3).unwrap(), 0).unwrap();
            for (o, t) in out.iter().zip(target) {
                prop_assert!((o - t).abs() <= 1e-9);
            }
        }
    }
}
