//! Sampling on circles, boundary spectra and the holomorphic-extension defect.
//!
//! A continuous function on `b∆(a, ρ)` extends holomorphically into `∆(a, ρ)`
//! exactly when the Fourier coefficients `c_n`, `n < 0`, of
//! `θ ↦ f(a + ρ e^{iθ})` all vanish. The *defect* is the relative `L²` mass of
//! those coefficients,
//!
//! ```text
//! defect = sqrt( Σ_{n<0} |c_n|² / Σ_n |c_n|² ),
//! ```
//!
//! computed from an `N`-point DFT. Because the same quantity at `2N` is also
//! computed, a report carries an estimate of how much of the defect could be
//! aliasing rather than genuine negative-frequency energy.

mod rational;

use rustfft::FftPlanner;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{ComplexFunction, EvalError};
use crate::C64;
pub use rational::{rational_extension_eval, rational_pole_scan, ClearedExtension, NearPole};

/// Samples closer than this to the origin are refused for functions that are
/// only defined on the punctured plane.
pub const ORIGIN_EXCLUSION: f64 = 1e-9;
pub const DEFAULT_N: usize = 4096;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
/// Below this total energy the sampled function is treated as zero.
pub const ENERGY_FLOOR: f64 = 1e-30;
/// Samples whose RMS is within this factor of their rounding-error bound count
/// as the zero function.
pub const NOISE_FACTOR: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircleError {
    #[error("radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("sample count {0} must be a power of two, at least 8")]
    BadSampleCount(usize),
    #[error("sample {k} lies within {ORIGIN_EXCLUSION:e} of the origin")]
    NearOrigin { k: usize },
    #[error("evaluation failed at sample {k}: {source}")]
    Eval { k: usize, source: EvalError },
    #[error("point lies outside the open disc (|p - a| / rho = {ratio})")]
    OutsideDisc { ratio: f64 },
    #[error("function has no P/Q form")]
    NotRational,
    #[error("the substitution w = conj(a) + rho^2/(z - a) is singular at z = a")]
    AtCenter,
    #[error("extension has a pole at the point (|Q| = {modulus:e})")]
    PoleAtPoint { modulus: f64 },
    #[error("denominator vanishes identically on the circle")]
    DegenerateDenominator,
}

/// The circle `b∆(center, radius)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Circle {
    pub center: C64,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: C64, radius: f64) -> Result<Self, CircleError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(CircleError::InvalidRadius(radius));
        }
        Ok(Self { center, radius })
    }

    pub fn surrounds_origin(&self) -> bool {
        self.center.norm() < self.radius
    }

    pub fn passes_through_origin(&self, tol: f64) -> bool {
        (self.center.norm() - self.radius).abs() <= tol
    }

    pub fn point(&self, theta: f64) -> C64 {
        self.center + C64::from_polar(self.radius, theta)
    }
}

/// Values at `a + ρ e^{2πi(k + offset)/N}`, `k = 0..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleSamples {
    pub circle: Circle,
    /// Shift of the grid in units of one step (0 or ½).
    pub offset: f64,
    pub values: Vec<C64>,
    /// Root-mean-square rounding-error bound of the values, when known.
    pub noise: Option<f64>,
}

fn check_n(n: usize) -> Result<(), CircleError> {
    if n < 8 || !n.is_power_of_two() {
        return Err(CircleError::BadSampleCount(n));
    }
    Ok(())
}

fn grid_points(c: &Circle, n: usize, offset: f64) -> Vec<C64> {
    (0..n)
        .map(|k| c.point(std::f64::consts::TAU * (k as f64 + offset) / n as f64))
        .collect()
}

/// Evaluates `f` on `N` equispaced points of the circle.
///
/// When a grid point falls within [`ORIGIN_EXCLUSION`] of the origin the grid
/// is shifted by half a step if `f` is continuous at 0, and an error naming
/// the sample is returned otherwise.
pub fn sample_on_circle<F>(f: &F, c: &Circle, n: usize) -> Result<CircleSamples, CircleError>
where
    F: ComplexFunction + ?Sized,
{
    check_n(n)?;
    let near = |pts: &[C64]| pts.iter().position(|p| p.norm() < ORIGIN_EXCLUSION);
    let mut offset = 0.0;
    let mut points = grid_points(c, n, offset);
    if let Some(k) = near(&points) {
        if f.origin_value().is_none() {
            return Err(CircleError::NearOrigin { k });
        }
        offset = 0.5;
        points = grid_points(c, n, offset);
        if let Some(k) = near(&points) {
            return Err(CircleError::NearOrigin { k });
        }
    }
    let values = points
        .iter()
        .enumerate()
        .map(|(k, &p)| f.eval(p).map_err(|source| CircleError::Eval { k, source }))
        .collect::<Result<Vec<_>, _>>()?;
    let noise = points
        .iter()
        .map(|&p| f.rounding_bound(p).map(|e| e * e))
        .sum::<Option<f64>>()
        .map(|s| (s / n as f64).sqrt());
    Ok(CircleSamples { circle: *c, offset, values, noise })
}

/// DFT coefficients of a circle-sampled function.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySpectrum {
    pub circle: Circle,
    pub n: usize,
    offset: f64,
    noise: Option<f64>,
    /// `c_n` in FFT order: index `k` holds `n = k` for `k ≤ N/2` and `n = k − N` above.
    coeffs: Vec<C64>,
    pub total_energy: f64,
    pub negative_energy: f64,
}

fn index_to_freq(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// `c_n = (1/N) Σ_k f_k e^{−2πikn/N}` for `n ∈ (−N/2, N/2]`, with the phase of
/// a shifted grid removed.
pub fn spectrum(samples: &CircleSamples) -> BoundarySpectrum {
    let n = samples.values.len();
    let mut buf = samples.values.clone();
    if n > 0 {
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    }
    let scale = 1.0 / n as f64;
    for (k, c) in buf.iter_mut().enumerate() {
        *c *= scale;
        if samples.offset != 0.0 {
            let freq = index_to_freq(k, n) as f64;
            *c *= C64::from_polar(1.0, -std::f64::consts::TAU * samples.offset * freq / n as f64);
        }
    }
    let mut total = 0.0;
    let mut negative = 0.0;
    for (k, c) in buf.iter().enumerate() {
        let e = c.norm_sqr();
        total += e;
        if index_to_freq(k, n) < 0 {
            negative += e;
        }
    }
    BoundarySpectrum {
        circle: samples.circle,
        n,
        offset: samples.offset,
        noise: samples.noise,
        coeffs: buf,
        total_energy: total,
        negative_energy: negative,
    }
}

impl BoundarySpectrum {
    /// `c_n`; zero outside `(−N/2, N/2]`.
    pub fn coefficient(&self, freq: i64) -> C64 {
        let n = self.n as i64;
        if freq <= -n / 2 || freq > n / 2 {
            return C64::new(0.0, 0.0);
        }
        self.coeffs[freq.rem_euclid(n) as usize]
    }

    /// `(n, c_n)` in FFT order.
    pub fn coefficients(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        self.coeffs.iter().enumerate().map(|(k, &c)| (index_to_freq(k, self.n), c))
    }

    /// Whether the samples are indistinguishable from zero: total energy
    /// below [`ENERGY_FLOOR`], or RMS size within [`NOISE_FACTOR`] times the
    /// rounding-error bound of the evaluation.
    pub fn is_zero(&self) -> bool {
        self.total_energy <= ENERGY_FLOOR
            || self.noise.is_some_and(|e| self.total_energy.sqrt() <= NOISE_FACTOR * e)
    }

    /// Relative `L²` mass of the negative frequencies; 0 for a zero function.
    pub fn defect(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            (self.negative_energy / self.total_energy).sqrt().min(1.0)
        }
    }

    /// Relative `L²` mass of the odd frequencies.
    pub fn odd_defect(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let odd: f64 = self.coefficients().filter(|(f, _)| f % 2 != 0).map(|(_, c)| c.norm_sqr()).sum();
        (odd / self.total_energy).sqrt().min(1.0)
    }

    /// Relative energy with `N/4 < |n| ≤ N/2`.
    pub fn top_octave_energy(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let quarter = (self.n / 4) as i64;
        let tail: f64 = self
            .coefficients()
            .filter(|(f, _)| f.abs() > quarter)
            .map(|(_, c)| c.norm_sqr())
            .sum();
        tail / self.total_energy
    }

    /// Samples reconstructed by the inverse DFT.
    pub fn inverse(&self) -> Vec<C64> {
        let n = self.n;
        let mut buf: Vec<C64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let freq = index_to_freq(k, n) as f64;
                c * C64::from_polar(1.0, std::f64::consts::TAU * self.offset * freq / n as f64)
            })
            .collect();
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        buf
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Extends,
    DoesNotExtend,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Extends => "extends",
            Verdict::DoesNotExtend => "does_not_extend",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    /// `extends` below the tolerance; otherwise `does_not_extend` once the
    /// defect clears ten times the aliasing floor, `inconclusive` if not.
    pub fn classify(defect: f64, aliasing_floor: f64, tolerance: f64) -> Verdict {
        if defect < tolerance {
            Verdict::Extends
        } else if defect > 10.0 * aliasing_floor {
            Verdict::DoesNotExtend
        } else {
            Verdict::Inconclusive
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectReport {
    pub circle: Circle,
    pub n_used: usize,
    pub defect: f64,
    pub aliasing_floor: f64,
    pub verdict: Verdict,
}

/// Defect of `f` on `c` at `N` samples, with the aliasing floor
/// `|defect(N) − defect(2N)| + sqrt(top-octave energy)`.
pub fn extension_defect<F>(f: &F, c: &Circle, n: usize, tolerance: f64) -> Result<DefectReport, CircleError>
where
    F: ComplexFunction + ?Sized,
{
    let coarse = spectrum(&sample_on_circle(f, c, n)?);
    let fine = spectrum(&sample_on_circle(f, c, 2 * n)?);
    let defect = coarse.defect();
    let aliasing_floor = (defect - fine.defect()).abs() + coarse.top_octave_energy().sqrt();
    Ok(DefectReport {
        circle: *c,
        n_used: n,
        defect,
        aliasing_floor,
        verdict: Verdict::classify(defect, aliasing_floor, tolerance),
    })
}

/// Value of the holomorphic part of a boundary spectrum inside the disc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralValue {
    pub value: C64,
    /// `|c_{N/2}| r^{N/2} / (1 − r)` with `r = |p − a| / ρ`.
    pub tail_bound: f64,
}

/// `Σ_{n=0}^{N/2} c_n ((p − a)/ρ)^n`.
pub fn spectral_extension_eval(s: &BoundarySpectrum, p: C64) -> Result<SpectralValue, CircleError> {
    let x = (p - s.circle.center) / s.circle.radius;
    let r = x.norm();
    if r >= 1.0 {
        return Err(CircleError::OutsideDisc { ratio: r });
    }
    let top = (s.n / 2) as i64;
    // Horner from the top frequency down.
    let mut acc = C64::new(0.0, 0.0);
    for freq in (0..=top).rev() {
        acc = acc * x + s.coefficient(freq);
    }
    let tail_bound = s.coefficient(top).norm() * r.powi(top as i32) / (1.0 - r);
    Ok(SpectralValue { value: acc, tail_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Pure};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn unit() -> Circle {
        Circle::new(c(0.0, 0.0), 1.0).unwrap()
    }

    #[test]
    fn samples_of_z_and_conj() {
        let z = parse("z").unwrap();
        let s = sample_on_circle(&z, &unit(), 8).unwrap();
        let want = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        for (k, w) in want.iter().enumerate() {
            assert!((s.values[2 * k] - w).norm() < 1e-15);
        }
        let zb = parse("conj(z)").unwrap();
        let s = sample_on_circle(&zb, &unit(), 8).unwrap();
        for (k, w) in want.iter().enumerate() {
            assert!((s.values[2 * k] - w.conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn counterexample_samples_match_direct_evaluation() {
        let f = parse("z^2/conj(z)").unwrap();
        let circle = Circle::new(c(0.3, 0.0), 1.0).unwrap();
        let s = sample_on_circle(&f, &circle, 8).unwrap();
        for (k, v) in s.values.iter().enumerate() {
            let t = std::f64::consts::TAU * k as f64 / 8.0;
            let z = c(0.3 + t.cos(), t.sin());
            let direct = z * z / z.conj();
            assert!((v - direct).norm() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn sample_count_and_radius_validation() {
        let z = parse("z").unwrap();
        assert_eq!(sample_on_circle(&z, &unit(), 4), Err(CircleError::BadSampleCount(4)));
        assert_eq!(sample_on_circle(&z, &unit(), 24), Err(CircleError::BadSampleCount(24)));
        assert!(matches!(Circle::new(c(0.0, 0.0), 0.0), Err(CircleError::InvalidRadius(_))));
        assert!(matches!(Circle::new(c(0.0, 0.0), f64::NAN), Err(CircleError::InvalidRadius(_))));
    }

    #[test]
    fn near_origin_handling() {
        // b∆(1, 1) hits the origin at k = N/2.
        let through = Circle::new(c(1.0, 0.0), 1.0).unwrap();
        let f = parse("z^2/conj(z)").unwrap();
        assert_eq!(sample_on_circle(&f, &through, 16), Err(CircleError::NearOrigin { k: 8 }));
        let g = f.with_origin_value(c(0.0, 0.0));
        let s = sample_on_circle(&g, &through, 16).unwrap();
        assert_eq!(s.offset, 0.5);
    }

    #[test]
    fn pure_spectra() {
        let spec = |text: &str| spectrum(&sample_on_circle(&parse(text).unwrap(), &unit(), 64).unwrap());
        let s = spec("z");
        assert!((s.coefficient(1) - 1.0).norm() < 1e-15);
        assert!(s.coefficients().filter(|(f, _)| *f != 1).all(|(_, c)| c.norm() < 1e-15));
        let s = spec("conj(z)");
        assert!((s.coefficient(-1) - 1.0).norm() < 1e-15);
        assert!(s.coefficients().filter(|(f, _)| *f != -1).all(|(_, c)| c.norm() < 1e-15));
        let s = spectrum(&sample_on_circle(&Pure(|_| c(5.0, 0.0)), &unit(), 64).unwrap());
        assert!((s.coefficient(0) - 5.0).norm() < 1e-15);
        assert_eq!(s.defect(), 0.0);
    }

    #[test]
    fn shifted_grid_recovers_unshifted_coefficients() {
        let f = parse("z^3 + 2*conj(z)^2").unwrap();
        let circle = Circle::new(c(0.0, 0.0), 1.0).unwrap();
        let plain = spectrum(&sample_on_circle(&f, &circle, 64).unwrap());
        let pts = grid_points(&circle, 64, 0.5);
        let shifted = CircleSamples {
            circle,
            offset: 0.5,
            values: pts.iter().map(|&p| f.evaluate(p).unwrap()).collect(),
            noise: None,
        };
        let s = spectrum(&shifted);
        for freq in -31..=32 {
            assert!((s.coefficient(freq) - plain.coefficient(freq)).norm() < 1e-14, "n={freq}");
        }
        let back = s.inverse();
        for (a, b) in back.iter().zip(&shifted.values) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn rounding_noise_of_a_vanishing_function_counts_as_zero() {
        // vanishes on b∆(2, 1) up to rounding in a term of size ~100
        let f = parse("(z^2/conj(z))^2 * ((z-2)*(conj(z)-2) - 1) * ((z+3)*(conj(z)+3) - 1)").unwrap();
        let c = Circle::new(c(2.0, 0.0), 1.0).unwrap();
        let s = spectrum(&sample_on_circle(&f, &c, 1024).unwrap());
        assert!(s.total_energy > ENERGY_FLOOR);
        assert!(s.is_zero());
        assert_eq!(s.defect(), 0.0);
        // a small but genuine value is not mistaken for noise
        let g = parse("1e-12*conj(z)").unwrap();
        let s = spectrum(&sample_on_circle(&g, &unit(), 64).unwrap());
        assert!(!s.is_zero());
        assert!((s.defect() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn defect_of_conj_is_one() {
        let r = extension_defect(&parse("conj(z)").unwrap(), &unit(), 64, DEFAULT_TOLERANCE).unwrap();
        assert!((r.defect - 1.0).abs() < 1e-15);
        assert_eq!(r.verdict, Verdict::DoesNotExtend);
    }

    #[test]
    fn zero_function_extends() {
        let r = extension_defect(&Pure(|_| c(0.0, 0.0)), &unit(), 64, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(r.defect, 0.0);
        assert_eq!(r.verdict, Verdict::Extends);
    }

    #[test]
    fn counterexample_verdicts() {
        let f = parse("z^2/conj(z)").unwrap();
        let inside = Circle::new(c(0.3, 0.0), 1.0).unwrap();
        let r = extension_defect(&f, &inside, DEFAULT_N, DEFAULT_TOLERANCE).unwrap();
        assert!(r.defect < 1e-12, "{}", r.defect);
        assert_eq!(r.verdict, Verdict::Extends);
        let outside = Circle::new(c(2.0, 0.0), 1.0).unwrap();
        let r = extension_defect(&f, &outside, DEFAULT_N, DEFAULT_TOLERANCE).unwrap();
        assert!(r.defect > 0.01, "{}", r.defect);
        assert_eq!(r.verdict, Verdict::DoesNotExtend);
    }

    #[test]
    fn classify_band() {
        assert_eq!(Verdict::classify(1e-9, 1.0, 1e-8), Verdict::Extends);
        assert_eq!(Verdict::classify(1e-3, 1e-3, 1e-8), Verdict::Inconclusive);
        assert_eq!(Verdict::classify(1e-3, 1e-6, 1e-8), Verdict::DoesNotExtend);
    }

    #[test]
    fn spectral_extension_values() {
        let eval = |text: &str, circle: Circle, p: C64| {
            let s = spectrum(&sample_on_circle(&parse(text).unwrap(), &circle, 256).unwrap());
            spectral_extension_eval(&s, p).unwrap()
        };
        assert!((eval("z", unit(), c(0.5, 0.0)).value - 0.5).norm() < 1e-15);
        let v = eval("z^2/conj(z)", unit(), c(0.5, 0.0));
        assert!((v.value - 0.125).norm() < 1e-15);
        assert!(v.tail_bound < 1e-30);
        let other = Circle::new(c(-1.0, 2.0), 0.7).unwrap();
        assert!((eval("7", other, c(-0.8, 2.3)).value - 7.0).norm() < 1e-14);
        let s = spectrum(&sample_on_circle(&parse("z").unwrap(), &unit(), 64).unwrap());
        assert!(matches!(spectral_extension_eval(&s, c(1.0, 0.0)), Err(CircleError::OutsideDisc { .. })));
    }
}
