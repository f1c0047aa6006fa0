//! Period maps of Hill equations and of the projective fields `lambda xi_gamma`,
//! periodic Riccati branches, spectral scans and the conjugating matrix.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{HillPotential, ProjectiveCurve};
use crate::error::{Error, Result};
use crate::linalg::{self, Eigenpair, Mat2, STEPS_PER_NODE};
use crate::periodic::{Parity, PeriodicFn};

/// Which periodic solution of a hyperbolic period map to follow.
///
/// `Plus` is the eigen-direction whose multiplier has modulus above 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn opposite(self) -> Branch {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }

    fn index(self) -> usize {
        match self {
            Branch::Plus => 0,
            Branch::Minus => 1,
        }
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" => Ok(Branch::Plus),
            "minus" => Ok(Branch::Minus),
            other => Err(Error::InvalidArgument(format!("unknown branch {other:?}"))),
        }
    }
}

/// Time-pi map of a traceless linear system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonodromyMatrix {
    pub m: Mat2,
    /// Spectral parameter or effective shift it was computed for.
    pub param: f64,
}

impl MonodromyMatrix {
    pub fn trace(&self) -> f64 {
        linalg::trace(&self.m)
    }

    pub fn det(&self) -> f64 {
        linalg::det(&self.m)
    }

    /// `Tr^2 / det`, a conjugacy invariant in PSL(2,R).
    pub fn tr2(&self) -> f64 {
        self.trace().powi(2) / self.det()
    }

    pub fn is_hyperbolic(&self) -> bool {
        linalg::hyperbolic_eigen(&self.m).is_some()
    }

    /// Eigenpairs ordered `[Plus, Minus]`.
    pub fn eigen(&self) -> Result<[Eigenpair; 2]> {
        linalg::hyperbolic_eigen(&self.m).ok_or(Error::NoRealFixedPoints(self.trace()))
    }

    /// Fixed points of the Moebius action as RP^1 angles, ordered `[Plus, Minus]`.
    ///
    /// The affine point `x = X_1 / X_2` is `tan(theta)`.
    pub fn fixed_point_angles(&self) -> Result<[f64; 2]> {
        let [p, m] = self.eigen()?;
        Ok([
            p.vector[0].atan2(p.vector[1]),
            m.vector[0].atan2(m.vector[1]),
        ])
    }
}

/// Moebius action of `m` on the RP^1 point with angle `theta`.
pub fn moebius_apply_angle(m: &Mat2, theta: f64) -> f64 {
    let v = linalg::mat_vec(m, [theta.sin(), theta.cos()]);
    v[0].atan2(v[1])
}

/// Values of a periodic function at `t = j*h/2`, `j = 0..=2*S*N`, for the
/// RK4 step `h = pi/(S*N)`.
fn half_step_values(f: &PeriodicFn, steps_per_node: usize) -> Vec<f64> {
    let mut v = f.refine(2 * steps_per_node);
    v.push(v[0]);
    v
}

fn step_size(n: usize, steps_per_node: usize) -> f64 {
    PI / (steps_per_node * n) as f64
}

fn hill_coefficients(p_eff: &PeriodicFn, steps_per_node: usize) -> Vec<Mat2> {
    half_step_values(p_eff, steps_per_node)
        .into_iter()
        .map(|p| [[0.0, 1.0], [p, 0.0]])
        .collect()
}

/// Period map of `u'' = p_eff u` acting on `(u, u')`.
pub fn hill_fundamental(p_eff: &PeriodicFn) -> MonodromyMatrix {
    hill_fundamental_steps(p_eff, STEPS_PER_NODE)
}

/// [`hill_fundamental`] with an explicit number of RK4 steps per grid interval.
pub fn hill_fundamental_steps(p_eff: &PeriodicFn, steps_per_node: usize) -> MonodromyMatrix {
    let coeff = hill_coefficients(p_eff, steps_per_node);
    MonodromyMatrix {
        m: linalg::rk4_fundamental(&coeff, step_size(p_eff.len(), steps_per_node)),
        param: 0.0,
    }
}

/// Periodic solution `a` of `a' = (a^2 - 1)/c - c p`.
#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiBranch {
    pub a: PeriodicFn,
    pub branch: Branch,
    /// Multiplier of the linearized solution `u` over one period.
    pub multiplier: f64,
    pub c: f64,
}

impl RiccatiBranch {
    /// Sup of the Riccati residual against potential `p`.
    pub fn residual(&self, p: &HillPotential) -> f64 {
        riccati_residual(&self.a, p, self.c)
    }
}

pub fn riccati_residual(a: &PeriodicFn, p: &HillPotential, c: f64) -> f64 {
    let da = a.derivative();
    (0..a.len())
        .map(|k| {
            let av = a.samples()[k];
            (da.samples()[k] - (av * av - 1.0) / c + c * p.0.samples()[k]).abs()
        })
        .fold(0.0, f64::max)
}

/// One periodic Riccati solution, via `a = -c u'/u` with `u'' = (p + 1/c^2) u`.
pub fn riccati_branch(p: &HillPotential, c: f64, branch: Branch) -> Result<RiccatiBranch> {
    if c == 0.0 {
        return Err(Error::ZeroParam);
    }
    p.0.expect_parity(Parity::Periodic)?;
    let n = p.0.len();
    let p_eff = p.0.shift(1.0 / (c * c));
    let coeff = hill_coefficients(&p_eff, STEPS_PER_NODE);
    let h = step_size(n, STEPS_PER_NODE);
    let m = MonodromyMatrix {
        m: linalg::rk4_fundamental(&coeff, h),
        param: 1.0 / (c * c),
    };
    let pair = m.eigen()?[branch.index()];
    if pair.value < 0.0 {
        return Err(Error::BranchSingular(format!(
            "multiplier {:.6e} is negative, u changes sign",
            pair.value
        )));
    }
    // decaying solutions are integrated backwards from t = pi
    let path = linalg::rk4_linear(&coeff, h, pair.vector, branch == Branch::Minus);
    let scale = path.iter().fold(0.0f64, |s, x| s.max(x[0].abs()));
    for (j, w) in path.windows(2).enumerate() {
        if w[0][0].signum() != w[1][0].signum() || w[1][0].abs() <= 1e-12 * scale {
            let t = (j + 1) as f64 * h;
            return Err(Error::BranchSingular(format!("u vanishes near t = {t:.6}")));
        }
    }
    let a: Vec<f64> = (0..n)
        .map(|k| {
            let x = path[k * STEPS_PER_NODE];
            -c * x[1] / x[0]
        })
        .collect();
    Ok(RiccatiBranch {
        a: PeriodicFn::new(a, Parity::Periodic)?,
        branch,
        multiplier: pair.value,
        c,
    })
}

/// Both periodic Riccati solutions, `(plus, minus)`.
pub fn riccati_periodic_solutions(
    p: &HillPotential,
    c: f64,
) -> Result<(RiccatiBranch, RiccatiBranch)> {
    Ok((
        riccati_branch(p, c, Branch::Plus)?,
        riccati_branch(p, c, Branch::Minus)?,
    ))
}

/// Generator of `lambda xi_gamma` in the angle chart, at half steps.
fn projective_coefficients(gamma: &ProjectiveCurve, lam: f64, steps_per_node: usize) -> Vec<Mat2> {
    let n = gamma.n();
    let psi = half_step_values(gamma.psi(), steps_per_node);
    let speed = half_step_values(&gamma.speed(), steps_per_node);
    let dt = PI / (2 * steps_per_node * n) as f64;
    psi.iter()
        .zip(&speed)
        .enumerate()
        .map(|(j, (ps, sp))| {
            let phi = j as f64 * dt + ps;
            let (s, c) = phi.sin_cos();
            let k = lam / sp;
            [[-k * s * c, k * s * s], [-k * c * c, k * s * c]]
        })
        .collect()
}

/// Period map of `lambda xi_gamma` in the standard affine chart.
pub fn moebius_monodromy(gamma: &ProjectiveCurve, lam: f64) -> MonodromyMatrix {
    moebius_monodromy_steps(gamma, lam, STEPS_PER_NODE)
}

pub fn moebius_monodromy_steps(
    gamma: &ProjectiveCurve,
    lam: f64,
    steps_per_node: usize,
) -> MonodromyMatrix {
    let coeff = projective_coefficients(gamma, lam, steps_per_node);
    MonodromyMatrix {
        m: linalg::rk4_fundamental(&coeff, step_size(gamma.n(), steps_per_node)),
        param: lam,
    }
}

/// Solution of `X' = lambda B_gamma X` through the chosen eigenvector of the
/// period map, returned as RP^1 angles at the grid nodes (continuous, not
/// reduced modulo pi).
pub(crate) fn projective_branch_angles(
    gamma: &ProjectiveCurve,
    lam: f64,
    branch: Branch,
) -> Result<Vec<f64>> {
    let n = gamma.n();
    let coeff = projective_coefficients(gamma, lam, STEPS_PER_NODE);
    let h = step_size(n, STEPS_PER_NODE);
    let m = MonodromyMatrix {
        m: linalg::rk4_fundamental(&coeff, h),
        param: lam,
    };
    let pair = m.eigen()?[branch.index()];
    let path = linalg::rk4_linear(&coeff, h, pair.vector, branch == Branch::Minus);
    let mut angles = Vec::with_capacity(path.len());
    let mut prev = 0.0;
    for (j, x) in path.iter().enumerate() {
        let raw = x[0].atan2(x[1]);
        let a = if j == 0 {
            raw
        } else {
            raw + 2.0 * PI * ((prev - raw) / (2.0 * PI)).round()
        };
        angles.push(a);
        prev = a;
    }
    let turns = ((angles[angles.len() - 1] - angles[0]) / PI).round() as i64;
    if turns != 1 {
        return Err(Error::RotationNumber(turns));
    }
    Ok((0..n).map(|k| angles[k * STEPS_PER_NODE]).collect())
}

/// `Tr^2/det` of the period map over a grid of spectral parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralScan {
    pub lambdas: Vec<f64>,
    pub tr2: Vec<f64>,
}

impl SpectralScan {
    /// Largest pointwise difference against another scan on the same grid,
    /// scaled by `max(1, |tr2|)` since `Tr^2` grows like `e^{2 pi sqrt(lambda)}`.
    pub fn max_deviation(&self, other: &SpectralScan) -> f64 {
        self.tr2.iter().zip(&other.tr2).fold(0.0, |m, (a, b)| {
            m.max((a - b).abs() / a.abs().max(b.abs()).max(1.0))
        })
    }
}

pub fn spectral_scan(gamma: &ProjectiveCurve, lambda_grid: &[f64]) -> SpectralScan {
    let tr2 = lambda_grid
        .par_iter()
        .map(|&lam| moebius_monodromy(gamma, lam).tr2())
        .collect();
    SpectralScan {
        lambdas: lambda_grid.to_vec(),
        tr2,
    }
}

/// Evenly spaced grid of `steps` values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => vec![],
        1 => vec![lo],
        _ => (0..steps)
            .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
            .collect(),
    }
}

/// Matrix `A_{mu,gamma,delta}(t)`: the Moebius map fixing `gamma(t)` with
/// multiplier `mu` and `delta(t)` with multiplier `1/mu`.
///
/// Evaluated from angles, so it agrees with the affine formula
/// `(1/(g-d)) [[g - mu d, g d (mu-1)], [1 - mu, g mu - d]]` wherever both
/// points are finite and stays defined when one of them is at infinity.
pub fn conjugator(
    gamma: &ProjectiveCurve,
    delta: &ProjectiveCurve,
    mu: f64,
    t: f64,
) -> Result<Mat2> {
    conjugator_from_angles(gamma.angle_at(t), delta.angle_at(t), mu)
        .map_err(|_| Error::Degenerate(t))
}

pub fn conjugator_from_angles(theta_g: f64, theta_d: f64, mu: f64) -> Result<Mat2> {
    let (sg, cg) = theta_g.sin_cos();
    let (sd, cd) = theta_d.sin_cos();
    let denom = (theta_g - theta_d).sin();
    if denom.abs() < 1e-12 {
        return Err(Error::Degenerate(0.0));
    }
    Ok(linalg::scale(
        &[
            [sg * cd - mu * sd * cg, (mu - 1.0) * sg * sd],
            [(1.0 - mu) * cg * cd, mu * sg * cd - sd * cg],
        ],
        1.0 / denom,
    ))
}

/// Affine-chart formula for the conjugator, both points finite.
pub fn conjugator_affine(g: f64, d: f64, mu: f64) -> Result<Mat2> {
    if g == d {
        return Err(Error::Degenerate(0.0));
    }
    Ok(linalg::scale(
        &[[g - mu * d, g * d * (mu - 1.0)], [1.0 - mu, g * mu - d]],
        1.0 / (g - d),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, sub, IDENTITY};

    fn constant(n: usize, v: f64) -> PeriodicFn {
        PeriodicFn::constant(n, v).unwrap()
    }

    #[test]
    fn free_particle_and_rotation() {
        let m = hill_fundamental(&constant(32, 0.0));
        assert!(max_abs(&sub(&m.m, &[[1.0, PI], [0.0, 1.0]])) < 1e-12);
        let m = hill_fundamental(&constant(32, -1.0));
        // RK4 truncation at this coarse grid
        assert!(max_abs(&sub(&m.m, &[[-1.0, 0.0], [0.0, -1.0]])) < 1e-8);
    }

    #[test]
    fn positive_constant_potential() {
        let m = hill_fundamental(&constant(64, 1.0));
        let (c, s) = (PI.cosh(), PI.sinh());
        assert!(max_abs(&sub(&m.m, &[[c, s], [s, c]])) < 1e-9 * c);
        assert!((m.det() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn constant_riccati_branches() {
        let p = HillPotential(constant(32, -1.0));
        let (plus, minus) = riccati_periodic_solutions(&p, 0.5).unwrap();
        let r = 3f64.sqrt() / 2.0;
        assert!(plus.a.shift(r).sup_norm() < 1e-10);
        assert!(minus.a.shift(-r).sup_norm() < 1e-10);
        assert!(plus.multiplier > 1.0 && minus.multiplier < 1.0);
    }

    #[test]
    fn elliptic_riccati_has_no_real_branch() {
        let p = HillPotential(constant(32, -1.0));
        assert!(matches!(
            riccati_branch(&p, 2.0, Branch::Plus),
            Err(Error::NoRealFixedPoints(_))
        ));
        assert_eq!(
            riccati_branch(&p, 0.0, Branch::Plus).unwrap_err(),
            Error::ZeroParam
        );
    }

    #[test]
    fn moebius_monodromy_of_zero_field_is_identity() {
        let g = ProjectiveCurve::trig(32, &[(0.1, 0.05)]).unwrap();
        let m = moebius_monodromy(&g, 0.0);
        assert!(max_abs(&sub(&m.m, &IDENTITY)) < 1e-15);
    }

    #[test]
    fn circle_fixed_points_at_lambda_four() {
        let g = ProjectiveCurve::circle(64).unwrap();
        let m = moebius_monodromy(&g, 4.0);
        let want = 4.0 * (PI * 3f64.sqrt()).cosh().powi(2);
        assert!((m.tr2() - want).abs() < 1e-8 * want);
        let mut angles = m
            .fixed_point_angles()
            .unwrap()
            .map(crate::curve::wrap_half_turn);
        angles.sort_by(f64::total_cmp);
        assert!((angles[0] + PI / 6.0).abs() < 1e-9);
        assert!((angles[1] - PI / 6.0).abs() < 1e-9);
    }

    #[test]
    fn conjugator_forms_agree() {
        let (g, d, mu) = (0.3f64, -1.7f64, 0.4);
        let a = conjugator_affine(g, d, mu).unwrap();
        let b = conjugator_from_angles(g.atan(), d.atan(), mu).unwrap();
        // same Moebius map: proportional matrices
        let ratio = a[0][0] / b[0][0];
        assert!(max_abs(&sub(&a, &linalg::scale(&b, ratio))) < 1e-13);
        assert!(max_abs(&sub(&conjugator_affine(g, d, 1.0).unwrap(), &IDENTITY)) < 1e-15);
        assert!(conjugator_affine(g, g, mu).is_err());
    }

    #[test]
    fn conjugator_fixes_both_points() {
        let a = conjugator_from_angles(0.4, 1.9, 2.5).unwrap();
        assert!(crate::curve::wrap_half_turn(moebius_apply_angle(&a, 0.4) - 0.4).abs() < 1e-13);
        assert!(crate::curve::wrap_half_turn(moebius_apply_angle(&a, 1.9) - 1.9).abs() < 1e-13);
    }

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace(0.0, 1.0, 11).len(), 11);
        assert_eq!(linspace(2.0, 5.0, 1), vec![2.0]);
        assert!((linspace(0.0, 1.0, 11)[10] - 1.0).abs() < 1e-15);
    }
}
