//! Spectral calculus for functions on the half-period grid `t_k = k*pi/N`.
//!
//! Periodic functions (`f(t + pi) = f(t)`) expand in `e^{2imt}`; antiperiodic
//! ones (`f(t + pi) = -f(t)`) in `e^{i(2m+1)t}`. Both live on the same grid:
//! an antiperiodic function is multiplied by `e^{-it}` to make it periodic
//! before transforming, so its odd harmonics `-(N-1), .., N-1` never collide
//! with a Nyquist mode.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Residual tolerance used for unit-scale assertions.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Default number of grid points.
pub const DEFAULT_N: usize = 256;

/// Multiplier distance from 1 below which [`solve_linear_periodic`] refuses.
pub const RESONANCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Periodic,
    Antiperiodic,
}

impl Parity {
    pub fn name(self) -> &'static str {
        match self {
            Parity::Periodic => "periodic",
            Parity::Antiperiodic => "antiperiodic",
        }
    }

    /// Parity of a pointwise product.
    pub fn product(self, other: Parity) -> Parity {
        if self == other {
            Parity::Periodic
        } else {
            Parity::Antiperiodic
        }
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Uniform grid `t_k = k*pi/n`.
pub fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64 * PI / n as f64).collect()
}

fn check_grid(n: usize) -> Result<()> {
    if n < 16 || !n.is_multiple_of(2) {
        return Err(Error::InvalidGrid(n));
    }
    Ok(())
}

/// Signed mode index for FFT slot `j` of an `n`-point transform.
fn mode(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// A real function sampled on the uniform half-period grid.
#[derive(Clone, PartialEq)]
pub struct PeriodicFn {
    samples: Vec<f64>,
    parity: Parity,
}

impl fmt::Debug for PeriodicFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicFn")
            .field("n", &self.samples.len())
            .field("parity", &self.parity)
            .finish()
    }
}

impl PeriodicFn {
    pub fn new(samples: Vec<f64>, parity: Parity) -> Result<Self> {
        check_grid(samples.len())?;
        Ok(Self { samples, parity })
    }

    pub fn from_fn(n: usize, parity: Parity, f: impl Fn(f64) -> f64) -> Result<Self> {
        check_grid(n)?;
        let samples = grid(n).into_iter().map(f).collect();
        Ok(Self { samples, parity })
    }

    pub fn constant(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n], Parity::Periodic)
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            samples: vec![0.0; self.len()],
            parity: self.parity,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn grid(&self) -> Vec<f64> {
        grid(self.len())
    }

    pub fn expect_parity(&self, parity: Parity) -> Result<()> {
        if self.parity != parity {
            return Err(Error::ParityMismatch {
                expected: parity.name(),
                got: self.parity.name(),
            });
        }
        Ok(())
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.len() as f64
    }

    /// Maximum absolute sample difference; grids must agree.
    pub fn sup_distance(&self, other: &PeriodicFn) -> f64 {
        assert_eq!(self.len(), other.len(), "grid mismatch");
        self.samples
            .iter()
            .zip(&other.samples)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Coefficients `c_m` (already divided by `N`) in FFT slot order.
    ///
    /// Slot `j` carries frequency `2m` (periodic) or `2m+1` (antiperiodic),
    /// with `m` the signed index of `j`.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let n = self.len();
        let mut buf: Vec<Complex64> = match self.parity {
            Parity::Periodic => self
                .samples
                .iter()
                .map(|&v| Complex64::new(v, 0.0))
                .collect(),
            Parity::Antiperiodic => self
                .samples
                .iter()
                .enumerate()
                .map(|(k, &v)| v * Complex64::from_polar(1.0, -(k as f64) * PI / n as f64))
                .collect(),
        };
        plan(n, false).process(&mut buf);
        let scale = 1.0 / n as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        buf
    }

    /// Inverse of [`PeriodicFn::spectrum`]; the imaginary residue is dropped.
    pub fn from_spectrum(mut coeffs: Vec<Complex64>, parity: Parity) -> Result<Self> {
        let n = coeffs.len();
        check_grid(n)?;
        plan(n, true).process(&mut coeffs);
        let samples = match parity {
            Parity::Periodic => coeffs.iter().map(|c| c.re).collect(),
            Parity::Antiperiodic => coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| (c * Complex64::from_polar(1.0, k as f64 * PI / n as f64)).re)
                .collect(),
        };
        Ok(Self { samples, parity })
    }

    /// Angular frequency carried by slot `j`.
    fn frequency(&self, j: usize) -> f64 {
        let m = mode(j, self.len());
        match self.parity {
            Parity::Periodic => 2.0 * m as f64,
            Parity::Antiperiodic => (2 * m + 1) as f64,
        }
    }

    /// Derivative of the trigonometric interpolant.
    pub fn differentiate(&self, order: u32) -> Result<Self> {
        if !(1..=3).contains(&order) {
            return Err(Error::InvalidOrder(order));
        }
        let n = self.len();
        let mut coeffs = self.spectrum();
        for (j, c) in coeffs.iter_mut().enumerate() {
            if self.parity == Parity::Periodic && j == n / 2 {
                // cos(N t) only survives even-order differentiation
                if order % 2 == 1 {
                    *c = Complex64::new(0.0, 0.0);
                } else {
                    let w = n as f64;
                    *c *= if order == 2 { -w * w } else { w.powi(4) };
                }
                continue;
            }
            let factor = Complex64::new(0.0, self.frequency(j)).powu(order);
            *c *= factor;
        }
        Self::from_spectrum(coeffs, self.parity)
    }

    /// First derivative.
    pub fn derivative(&self) -> Self {
        self.differentiate(1).expect("order 1 is always valid")
    }

    /// Exact quadrature of the interpolant over `[0, pi)`.
    pub fn integrate_period(&self) -> f64 {
        match self.parity {
            // the trapezoid rule is exact on the trigonometric interpolant
            Parity::Periodic => PI * self.mean(),
            Parity::Antiperiodic => {
                let coeffs = self.spectrum();
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(j, c)| (c * Complex64::new(0.0, 2.0 / self.frequency(j))).re)
                    .sum()
            }
        }
    }

    /// Value of the trigonometric interpolant at an arbitrary `t`.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.len();
        let coeffs = self.spectrum();
        coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| {
                if self.parity == Parity::Periodic && j == n / 2 {
                    c.re * (n as f64 * t).cos()
                } else {
                    (c * Complex64::from_polar(1.0, self.frequency(j) * t)).re
                }
            })
            .sum()
    }

    /// Interpolant values on the finer grid `t = k*pi/(N*factor)`.
    pub fn refine(&self, factor: usize) -> Vec<f64> {
        assert!(factor >= 1);
        let n = self.len();
        let m = n * factor;
        let coeffs = self.spectrum();
        let mut fine = vec![Complex64::new(0.0, 0.0); m];
        for (j, c) in coeffs.iter().enumerate() {
            let k = mode(j, n);
            if self.parity == Parity::Periodic && j == n / 2 {
                if factor == 1 {
                    fine[j] = *c;
                } else {
                    fine[n / 2] += c * 0.5;
                    fine[m - n / 2] += c * 0.5;
                }
                continue;
            }
            let slot = if k >= 0 {
                k as usize
            } else {
                (m as i64 + k) as usize
            };
            fine[slot] = *c;
        }
        plan(m, true).process(&mut fine);
        match self.parity {
            Parity::Periodic => fine.iter().map(|c| c.re).collect(),
            Parity::Antiperiodic => fine
                .iter()
                .enumerate()
                .map(|(k, c)| (c * Complex64::from_polar(1.0, k as f64 * PI / m as f64)).re)
                .collect(),
        }
    }

    /// Same interpolant sampled on an `m`-point grid (truncating if `m < N`).
    pub fn resample(&self, m: usize) -> Result<Self> {
        check_grid(m)?;
        let n = self.len();
        if m.is_multiple_of(n) {
            return Self::new(self.refine(m / n), self.parity);
        }
        let coeffs = self.spectrum();
        let mut out = vec![Complex64::new(0.0, 0.0); m];
        for (j, c) in coeffs.iter().enumerate() {
            let k = mode(j, n);
            if k.unsigned_abs() as usize >= m / 2 {
                continue;
            }
            let slot = if k >= 0 {
                k as usize
            } else {
                (m as i64 + k) as usize
            };
            out[slot] = *c;
        }
        Self::from_spectrum(out, self.parity)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            samples: self.samples.iter().map(|&v| f(v)).collect(),
            parity: self.parity,
        }
    }

    /// Pointwise combination of two functions on the same grid.
    pub fn zip_with(
        &self,
        other: &PeriodicFn,
        parity: Parity,
        f: impl Fn(f64, f64) -> f64,
    ) -> Self {
        assert_eq!(self.len(), other.len(), "grid mismatch");
        Self {
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            parity,
        }
    }

    pub fn mul(&self, other: &PeriodicFn) -> Self {
        self.zip_with(other, self.parity.product(other.parity), |a, b| a * b)
    }

    pub fn add(&self, other: &PeriodicFn) -> Self {
        assert_eq!(self.parity, other.parity, "parity mismatch");
        self.zip_with(other, self.parity, |a, b| a + b)
    }

    pub fn sub(&self, other: &PeriodicFn) -> Self {
        assert_eq!(self.parity, other.parity, "parity mismatch");
        self.zip_with(other, self.parity, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    pub fn shift(&self, s: f64) -> Self {
        assert_eq!(
            self.parity,
            Parity::Periodic,
            "constant shift of an antiperiodic function"
        );
        self.map(|v| v + s)
    }

    /// Zero-mean antiderivative of a periodic function with zero mean part dropped.
    fn antiderivative_fluctuation(&self) -> Result<Self> {
        self.expect_parity(Parity::Periodic)?;
        let n = self.len();
        let mut coeffs = self.spectrum();
        for (j, c) in coeffs.iter_mut().enumerate() {
            if j == 0 || j == n / 2 {
                *c = Complex64::new(0.0, 0.0);
            } else {
                *c /= Complex64::new(0.0, self.frequency(j));
            }
        }
        Self::from_spectrum(coeffs, Parity::Periodic)
    }
}

/// Unique periodic `g` with `g' - kappa*g = rhs`.
///
/// Writing `kappa = k0 + k'(t)` with `k0` its mean, the integrating factor
/// `e^{P}`, `P' = k'`, reduces the problem to a constant-coefficient one
/// that is diagonal in the Fourier basis.
pub fn solve_linear_periodic(kappa: &PeriodicFn, rhs: &PeriodicFn) -> Result<PeriodicFn> {
    kappa.expect_parity(Parity::Periodic)?;
    rhs.expect_parity(Parity::Periodic)?;
    if kappa.len() != rhs.len() {
        return Err(Error::GridMismatch(kappa.len(), rhs.len()));
    }
    let n = kappa.len();
    let k0 = kappa.mean();
    let multiplier = (PI * k0).exp();
    if (multiplier - 1.0).abs() < RESONANCE_TOL {
        return Err(Error::Resonant(multiplier));
    }
    let p = kappa.shift(-k0).antiderivative_fluctuation()?;
    let forcing = rhs.zip_with(&p, Parity::Periodic, |r, pv| r * (-pv).exp());
    let mut coeffs = forcing.spectrum();
    for (j, c) in coeffs.iter_mut().enumerate() {
        if j == n / 2 {
            *c = Complex64::new(0.0, 0.0);
        } else {
            *c /= Complex64::new(-k0, 2.0 * mode(j, n) as f64);
        }
    }
    let h = PeriodicFn::from_spectrum(coeffs, Parity::Periodic)?;
    Ok(h.zip_with(&p, Parity::Periodic, |hv, pv| hv * pv.exp()))
}
