//! Projective curves in the angle chart, their unit-Wronskian lifts, Hill
//! potentials and tangent fields.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::periodic::{Parity, PeriodicFn};

/// Closed curve `gamma = tan(phi)` in RP^1 with `phi(t) = t + psi(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveCurve {
    psi: PeriodicFn,
}

/// Wrap an angle difference into `(-pi/2, pi/2]`.
pub fn wrap_half_turn(x: f64) -> f64 {
    x - PI * (x / PI).round()
}

impl ProjectiveCurve {
    pub fn new(psi: PeriodicFn) -> Result<Self> {
        psi.expect_parity(Parity::Periodic)?;
        let min_speed = psi
            .derivative()
            .samples()
            .iter()
            .fold(f64::INFINITY, |m, v| m.min(1.0 + v));
        if min_speed <= 0.0 {
            return Err(Error::NonMonotone(min_speed));
        }
        Ok(Self { psi })
    }

    /// `phi(t) = t`, i.e. `gamma = tan t`.
    pub fn circle(n: usize) -> Result<Self> {
        Self::new(PeriodicFn::constant(n, 0.0)?)
    }

    /// `phi(t) = t + sum_k (alpha_k sin 2kt + beta_k cos 2kt)`, `k` from 1.
    pub fn trig(n: usize, coeffs: &[(f64, f64)]) -> Result<Self> {
        let psi = PeriodicFn::from_fn(n, Parity::Periodic, |t| {
            coeffs
                .iter()
                .enumerate()
                .map(|(i, &(a, b))| {
                    let w = 2.0 * (i + 1) as f64 * t;
                    a * w.sin() + b * w.cos()
                })
                .sum()
        })?;
        Self::new(psi)
    }

    /// Random trigonometric coefficients with `sum 2k(|alpha_k| + |beta_k|)`
    /// equal to `amplitude`; `amplitude < 1` keeps `phi' > 0`.
    pub fn random_trig_coeffs<R: Rng>(
        rng: &mut R,
        modes: usize,
        amplitude: f64,
    ) -> Vec<(f64, f64)> {
        let raw: Vec<(f64, f64)> = (0..modes)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let weight: f64 = raw
            .iter()
            .enumerate()
            .map(|(i, (a, b))| 2.0 * (i + 1) as f64 * (a.abs() + b.abs()))
            .sum();
        let s = if weight > 0.0 {
            amplitude / weight
        } else {
            0.0
        };
        raw.into_iter().map(|(a, b)| (a * s, b * s)).collect()
    }

    pub fn psi(&self) -> &PeriodicFn {
        &self.psi
    }

    pub fn n(&self) -> usize {
        self.psi.len()
    }

    /// `phi` at the grid nodes.
    pub fn angles(&self) -> Vec<f64> {
        self.psi
            .samples()
            .iter()
            .zip(self.psi.grid())
            .map(|(p, t)| t + p)
            .collect()
    }

    pub fn angle_at(&self, t: f64) -> f64 {
        t + self.psi.eval(t)
    }

    /// `phi'` (periodic).
    pub fn speed(&self) -> PeriodicFn {
        self.psi.derivative().shift(1.0)
    }

    /// Affine value `tan(phi(t))`; infinite where `cos phi = 0`.
    pub fn value_at(&self, t: f64) -> f64 {
        self.angle_at(t).tan()
    }

    /// Sup over the grid of the RP^1 angle distance.
    pub fn distance(&self, other: &ProjectiveCurve) -> f64 {
        self.angles()
            .iter()
            .zip(other.angles())
            .fold(0.0, |m, (a, b)| m.max(wrap_half_turn(a - b).abs()))
    }

    /// Rotation of RP^1 by angle `theta` (an element of PSL(2,R)).
    pub fn rotated(&self, theta: f64) -> Self {
        Self {
            psi: self.psi.map(|v| v + theta),
        }
    }

    /// Reparametrization `t -> t + s`.
    pub fn shifted(&self, s: f64) -> Result<Self> {
        let n = self.n();
        let psi = PeriodicFn::from_fn(n, Parity::Periodic, |t| self.psi.eval(t + s) + s)?;
        Self::new(psi)
    }

    /// Same curve resampled on an `m`-point grid.
    pub fn resample(&self, m: usize) -> Result<Self> {
        Self::new(self.psi.resample(m)?)
    }

    /// Schwarzian derivative of `gamma = tan(phi)` in an affine chart.
    pub fn schwarzian(&self) -> PeriodicFn {
        let d1 = self.speed();
        let d2 = self.psi.differentiate(2).unwrap();
        let d3 = self.psi.differentiate(3).unwrap();
        let n = self.n();
        let s = (0..n)
            .map(|k| {
                let (a, b, c) = (d1.samples()[k], d2.samples()[k], d3.samples()[k]);
                c / a - 1.5 * (b / a).powi(2) + 2.0 * a * a
            })
            .collect();
        PeriodicFn::new(s, Parity::Periodic).unwrap()
    }
}

/// Plane curve `Gamma = (Gamma_1, Gamma_2)` with antiperiodic components.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroAffineCurve {
    gamma1: PeriodicFn,
    gamma2: PeriodicFn,
}

/// Hill potential `p` with `Gamma'' = p Gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct HillPotential(pub PeriodicFn);

impl HillPotential {
    pub fn as_fn(&self) -> &PeriodicFn {
        &self.0
    }
}

/// Vector field `U_f = -f'/2 Gamma + f Gamma'` along a curve.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub u1: PeriodicFn,
    pub u2: PeriodicFn,
}

impl TangentVector {
    pub fn sup_distance(&self, other: &TangentVector) -> f64 {
        self.u1
            .sup_distance(&other.u1)
            .max(self.u2.sup_distance(&other.u2))
    }
}

impl CentroAffineCurve {
    pub fn new(gamma1: PeriodicFn, gamma2: PeriodicFn) -> Result<Self> {
        gamma1.expect_parity(Parity::Antiperiodic)?;
        gamma2.expect_parity(Parity::Antiperiodic)?;
        if gamma1.len() != gamma2.len() {
            return Err(Error::GridMismatch(gamma1.len(), gamma2.len()));
        }
        Ok(Self { gamma1, gamma2 })
    }

    /// `(cos t, sin t)`.
    pub fn circle(n: usize) -> Result<Self> {
        Self::new(
            PeriodicFn::from_fn(n, Parity::Antiperiodic, f64::cos)?,
            PeriodicFn::from_fn(n, Parity::Antiperiodic, f64::sin)?,
        )
    }

    pub fn gamma1(&self) -> &PeriodicFn {
        &self.gamma1
    }

    pub fn gamma2(&self) -> &PeriodicFn {
        &self.gamma2
    }

    pub fn n(&self) -> usize {
        self.gamma1.len()
    }

    pub fn derivative(&self) -> Self {
        Self {
            gamma1: self.gamma1.derivative(),
            gamma2: self.gamma2.derivative(),
        }
    }

    pub fn second_derivative(&self) -> Self {
        Self {
            gamma1: self.gamma1.differentiate(2).unwrap(),
            gamma2: self.gamma2.differentiate(2).unwrap(),
        }
    }

    /// Pointwise determinant `[self, other]`.
    pub fn bracket(&self, other: &CentroAffineCurve) -> PeriodicFn {
        self.gamma1
            .mul(&other.gamma2)
            .sub(&self.gamma2.mul(&other.gamma1))
    }

    /// `[Gamma, Gamma']`, identically 1 for a normalized curve.
    pub fn wronskian(&self) -> PeriodicFn {
        self.bracket(&self.derivative())
    }

    pub fn wronskian_defect(&self) -> f64 {
        self.wronskian().shift(-1.0).sup_norm()
    }

    /// Sup of the componentwise difference.
    pub fn sup_distance(&self, other: &CentroAffineCurve) -> f64 {
        self.gamma1
            .sup_distance(&other.gamma1)
            .max(self.gamma2.sup_distance(&other.gamma2))
    }

    pub fn neg(&self) -> Self {
        Self {
            gamma1: self.gamma1.scale(-1.0),
            gamma2: self.gamma2.scale(-1.0),
        }
    }

    /// Linear image `A Gamma`.
    pub fn transform(&self, a: &Mat2) -> Self {
        let g1 = self.gamma1.scale(a[0][0]).add(&self.gamma2.scale(a[0][1]));
        let g2 = self.gamma1.scale(a[1][0]).add(&self.gamma2.scale(a[1][1]));
        Self {
            gamma1: g1,
            gamma2: g2,
        }
    }

    /// `h Gamma + f Gamma'` for periodic `h`, `f`.
    pub fn combine(&self, h: &PeriodicFn, f: &PeriodicFn) -> Self {
        let d = self.derivative();
        Self {
            gamma1: h.mul(&self.gamma1).add(&f.mul(&d.gamma1)),
            gamma2: h.mul(&self.gamma2).add(&f.mul(&d.gamma2)),
        }
    }

    /// `Gamma + eps U`.
    pub fn deformed(&self, u: &TangentVector, eps: f64) -> Self {
        Self {
            gamma1: self.gamma1.add(&u.u1.scale(eps)),
            gamma2: self.gamma2.add(&u.u2.scale(eps)),
        }
    }

    /// Same curve resampled on an `m`-point grid.
    pub fn resample(&self, m: usize) -> Result<Self> {
        Self::new(self.gamma1.resample(m)?, self.gamma2.resample(m)?)
    }

    pub fn as_tangent(&self) -> TangentVector {
        TangentVector {
            u1: self.gamma1.clone(),
            u2: self.gamma2.clone(),
        }
    }
}

/// Unit-Wronskian lift `(cos phi, sin phi) / sqrt(phi')`, with `Gamma_1(0) > 0`.
pub fn lift(gamma: &ProjectiveCurve) -> Result<CentroAffineCurve> {
    let speed = gamma.speed();
    let min_speed = speed.samples().iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if min_speed <= 0.0 {
        return Err(Error::NonMonotone(min_speed));
    }
    let phi = gamma.angles();
    let n = gamma.n();
    let mut g1 = Vec::with_capacity(n);
    let mut g2 = Vec::with_capacity(n);
    for (angle, s) in phi.iter().zip(speed.samples()) {
        let r = 1.0 / s.sqrt();
        g1.push(r * angle.cos());
        g2.push(r * angle.sin());
    }
    // sign convention; Gamma_2(0) > 0 breaks the tie when Gamma_1(0) = 0
    let flip = g1[0] < 0.0 || (g1[0] == 0.0 && g2[0] < 0.0);
    if flip {
        g1.iter_mut().for_each(|v| *v = -*v);
        g2.iter_mut().for_each(|v| *v = -*v);
    }
    CentroAffineCurve::new(
        PeriodicFn::new(g1, Parity::Antiperiodic)?,
        PeriodicFn::new(g2, Parity::Antiperiodic)?,
    )
}

/// Angle function of `gamma = Gamma_2 / Gamma_1`, continued through the grid.
pub fn project(curve: &CentroAffineCurve) -> Result<ProjectiveCurve> {
    let n = curve.n();
    let t = crate::periodic::grid(n);
    let mut phi = Vec::with_capacity(n);
    let mut prev = 0.0;
    for k in 0..n {
        let raw = curve.gamma2.samples()[k].atan2(curve.gamma1.samples()[k]);
        let angle = if k == 0 {
            // representative closest to t = 0 keeps psi small
            wrap_half_turn(raw)
        } else {
            // projective angles live mod pi
            raw + PI * ((prev - raw) / PI).round()
        };
        phi.push(angle);
        prev = angle;
    }
    let psi: Vec<f64> = phi.iter().zip(&t).map(|(a, t)| a - t).collect();
    ProjectiveCurve::new(PeriodicFn::new(psi, Parity::Periodic)?)
}

/// Hill potential `p = [Gamma'', Gamma']`.
pub fn curvature(curve: &CentroAffineCurve) -> HillPotential {
    HillPotential(curve.second_derivative().bracket(&curve.derivative()))
}

/// Sup of `Gamma'' - p Gamma` over both components.
pub fn hill_residual(curve: &CentroAffineCurve, p: &HillPotential) -> f64 {
    let d2 = curve.second_derivative();
    let r1 = d2.gamma1.sub(&p.0.mul(&curve.gamma1)).sup_norm();
    let r2 = d2.gamma2.sub(&p.0.mul(&curve.gamma2)).sup_norm();
    r1.max(r2)
}

/// `U_f = -f'/2 Gamma + f Gamma'`.
pub fn tangent_field(curve: &CentroAffineCurve, f: &PeriodicFn) -> Result<TangentVector> {
    f.expect_parity(Parity::Periodic)?;
    if f.len() != curve.n() {
        return Err(Error::GridMismatch(f.len(), curve.n()));
    }
    let h = f.derivative().scale(-0.5);
    let u = curve.combine(&h, f);
    Ok(TangentVector {
        u1: u.gamma1,
        u2: u.gamma2,
    })
}
