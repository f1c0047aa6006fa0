//! The maps `T_c` on centro-affine and projective curves, their tangent
//! pushforward, and the Bianchi square.

use serde::{Deserialize, Serialize};

use crate::curve::{self, wrap_half_turn, CentroAffineCurve, HillPotential, ProjectiveCurve};
use crate::error::{Error, Result};
use crate::linalg;
use crate::monodromy::{self, Branch, RiccatiBranch};
use crate::periodic::{grid, solve_linear_periodic, Parity, PeriodicFn};

/// Angle tolerance for matching a Bianchi branch to its predicted start point.
pub const MATCH_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamKind {
    Affine,
    Projective,
}

impl std::str::FromStr for ParamKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "affine" => Ok(ParamKind::Affine),
            "projective" => Ok(ParamKind::Projective),
            other => Err(Error::InvalidArgument(format!(
                "unknown parameter kind {other:?}"
            ))),
        }
    }
}

/// The two normalizations of the same map: `[Gamma, Delta] = c_aff` on lifts
/// and `gamma' delta' / (delta - gamma)^2 = c_pr` on projective curves, tied
/// by `c_pr = 1 / c_aff^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BacklundParam {
    pub c_aff: f64,
    pub c_pr: f64,
}

pub fn param_convert(c: f64, kind: ParamKind) -> Result<BacklundParam> {
    if c == 0.0 {
        return Err(Error::ZeroParam);
    }
    match kind {
        ParamKind::Affine => Ok(BacklundParam {
            c_aff: c,
            c_pr: 1.0 / (c * c),
        }),
        ParamKind::Projective => {
            if c < 0.0 {
                return Err(Error::NegativeProjective(c));
            }
            Ok(BacklundParam {
                c_aff: 1.0 / c.sqrt(),
                c_pr: c,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacklundResult {
    pub delta: CentroAffineCurve,
    pub a: RiccatiBranch,
    /// Hill potential of `delta`, recomputed from its samples.
    pub q: HillPotential,
    pub param: BacklundParam,
}

impl BacklundResult {
    /// Sup of `[Gamma, Delta] - c`.
    pub fn pairing_defect(&self, gamma: &CentroAffineCurve) -> f64 {
        gamma
            .bracket(&self.delta)
            .shift(-self.param.c_aff)
            .sup_norm()
    }

    /// Defects of `q - p = 2a'/c` and `p + q = 2(a^2 - 1)/c^2`.
    pub fn potential_relation_defects(&self, p: &HillPotential) -> (f64, f64) {
        let c = self.param.c_aff;
        let a = &self.a.a;
        let diff = self
            .q
            .0
            .sub(&p.0)
            .sub(&a.derivative().scale(2.0 / c))
            .sup_norm();
        let sum = self
            .q
            .0
            .add(&p.0)
            .sub(&a.map(|v| 2.0 * (v * v - 1.0) / (c * c)))
            .sup_norm();
        (diff, sum)
    }

    /// Tangent vector at `Delta` paired with `U_f` at `Gamma`.
    pub fn pushforward(&self, f: &PeriodicFn) -> Result<PeriodicFn> {
        pushforward_with(&self.a.a, self.param.c_aff, f)
    }
}

/// `Delta = a Gamma + c Gamma'` for the chosen periodic Riccati branch.
pub fn apply_tc(gamma: &CentroAffineCurve, c_aff: f64, branch: Branch) -> Result<BacklundResult> {
    let param = param_convert(c_aff, ParamKind::Affine)?;
    let p = curve::curvature(gamma);
    let a = monodromy::riccati_branch(&p, c_aff, branch)?;
    let c_const = PeriodicFn::constant(gamma.n(), c_aff)?;
    let delta = gamma.combine(&a.a, &c_const);
    let q = curve::curvature(&delta);
    Ok(BacklundResult { delta, a, q, param })
}

/// Projective `T_c`: the branch's fixed point of `Phi_{c,gamma}` carried by
/// the Riccati flow `delta' = c (delta - gamma)^2 / gamma'`.
pub fn apply_tc_projective(
    gamma: &ProjectiveCurve,
    c_pr: f64,
    branch: Branch,
) -> Result<ProjectiveCurve> {
    param_convert(c_pr, ParamKind::Projective)?;
    let angles = monodromy::projective_branch_angles(gamma, c_pr, branch)?;
    let t = grid(gamma.n());
    let shift = std::f64::consts::PI * ((angles[0] - t[0]) / std::f64::consts::PI).round();
    let psi: Vec<f64> = angles.iter().zip(&t).map(|(a, t)| a - t - shift).collect();
    ProjectiveCurve::new(PeriodicFn::new(psi, Parity::Periodic)?)
}

fn pushforward_with(a: &PeriodicFn, c: f64, f: &PeriodicFn) -> Result<PeriodicFn> {
    f.expect_parity(Parity::Periodic)?;
    let kappa = a.scale(2.0 / c);
    let rhs = f.derivative().scale(-1.0).sub(&kappa.mul(f));
    solve_linear_periodic(&kappa, &rhs)
}

/// Periodic `g` with `(c/2)(f' + g') = a (g - f)`.
pub fn pushforward_tangent(
    gamma: &CentroAffineCurve,
    c_aff: f64,
    branch: Branch,
    f: &PeriodicFn,
) -> Result<PeriodicFn> {
    apply_tc(gamma, c_aff, branch)?.pushforward(f)
}

/// Sup residual of `(c/2)(f' + g') - a (g - f)`.
pub fn pushforward_residual(a: &PeriodicFn, c: f64, f: &PeriodicFn, g: &PeriodicFn) -> f64 {
    let lhs = f.derivative().add(&g.derivative()).scale(c / 2.0);
    let rhs = a.mul(&g.sub(f));
    lhs.sub(&rhs).sup_norm()
}

/// `mu` with `c1 = c2 (1 - mu)`.
pub fn bianchi_mu(c1: f64, c2: f64) -> f64 {
    1.0 - c1 / c2
}

/// Both sides of the matching identity: the unnormalized conjugators
/// `(1/mu) M_mu(gamma, gamma2) (gamma1, 1)` and
/// `(1/nu) M_nu(gamma, gamma1) (gamma2, 1)`.
pub fn matching_sides(g: f64, g1: f64, g2: f64, mu: f64, nu: f64) -> ([f64; 2], [f64; 2]) {
    let lhs = [
        ((g - mu * g2) * g1 + g * g2 * (mu - 1.0)) / mu,
        ((1.0 - mu) * g1 + g * mu - g2) / mu,
    ];
    let rhs = [
        ((g - nu * g1) * g2 + g * g1 * (nu - 1.0)) / nu,
        ((1.0 - nu) * g2 + g * nu - g1) / nu,
    ];
    (lhs, rhs)
}

/// The four curves of the Bianchi square, with both constructions of the
/// fourth vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct BianchiSquare {
    pub gamma1: ProjectiveCurve,
    pub gamma2: ProjectiveCurve,
    /// `T_{c2}(gamma1)`, branch picked by the conjugator prediction.
    pub gamma12: ProjectiveCurve,
    /// `T_{c1}(gamma2)`, branch picked likewise.
    pub gamma21: ProjectiveCurve,
    pub mu: f64,
    pub nu: f64,
    /// Sup angle distance between `gamma12` and `gamma21`.
    pub closure: f64,
    /// Angle misses of the two start-point matches.
    pub match_errors: [f64; 2],
}

fn matched_branch(base: &ProjectiveCurve, c: f64, target: f64) -> Result<(ProjectiveCurve, f64)> {
    let mut best: Option<(ProjectiveCurve, f64)> = None;
    let mut last_err = None;
    for b in [Branch::Plus, Branch::Minus] {
        match apply_tc_projective(base, c, b) {
            Ok(curve) => {
                let miss = wrap_half_turn(curve.angle_at(0.0) - target).abs();
                if best.as_ref().is_none_or(|(_, m)| miss < *m) {
                    best = Some((curve, miss));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match best {
        Some((curve, miss)) if miss <= MATCH_TOL => Ok((curve, miss)),
        Some((_, miss)) => Err(Error::MatchFailure(miss)),
        None => Err(last_err.unwrap()),
    }
}

/// Build `gamma1 = T_{c1} gamma`, `gamma2 = T_{c2} gamma` and close the
/// square from both sides (projective parameters).
pub fn permutability_square(
    gamma: &ProjectiveCurve,
    c1_pr: f64,
    c2_pr: f64,
    branches: (Branch, Branch),
) -> Result<BianchiSquare> {
    if c1_pr == c2_pr {
        return Err(Error::InvalidArgument(
            "Bianchi square needs c1 != c2".into(),
        ));
    }
    let gamma1 = apply_tc_projective(gamma, c1_pr, branches.0)?;
    let gamma2 = apply_tc_projective(gamma, c2_pr, branches.1)?;
    let mu = bianchi_mu(c1_pr, c2_pr);
    let nu = bianchi_mu(c2_pr, c1_pr);

    let (g, g1, g2) = (
        gamma.angle_at(0.0),
        gamma1.angle_at(0.0),
        gamma2.angle_at(0.0),
    );
    let a_mu = monodromy::conjugator_from_angles(g, g2, mu).map_err(|_| Error::Degenerate(0.0))?;
    let a_nu = monodromy::conjugator_from_angles(g, g1, nu).map_err(|_| Error::Degenerate(0.0))?;
    let target12 = monodromy::moebius_apply_angle(&a_mu, g1);
    let target21 = monodromy::moebius_apply_angle(&a_nu, g2);

    let (gamma12, miss12) = matched_branch(&gamma1, c2_pr, target12)?;
    let (gamma21, miss21) = matched_branch(&gamma2, c1_pr, target21)?;
    let closure = gamma12.distance(&gamma21);
    Ok(BianchiSquare {
        gamma1,
        gamma2,
        gamma12,
        gamma21,
        mu,
        nu,
        closure,
        match_errors: [miss12, miss21],
    })
}

/// Conjugacy defect `max |M_{lambda,delta} - A M_{lambda,gamma} A^{-1}|` at
/// `lambda = c (1 - mu)`, with `A = A_{mu,gamma,delta}(0)`.
pub fn conjugacy_residual(
    gamma: &ProjectiveCurve,
    delta: &ProjectiveCurve,
    c_pr: f64,
    mu: f64,
) -> Result<f64> {
    let lam = c_pr * (1.0 - mu);
    let a = monodromy::conjugator(gamma, delta, mu, 0.0)?;
    let mg = monodromy::moebius_monodromy(gamma, lam);
    let md = monodromy::moebius_monodromy(delta, lam);
    let conj = linalg::mat_mul(&linalg::mat_mul(&a, &mg.m), &linalg::inverse(&a));
    Ok(linalg::max_abs(&linalg::sub(&md.m, &conj)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn parameter_dictionary() {
        let p = param_convert(0.5, ParamKind::Affine).unwrap();
        assert_eq!(p.c_pr, 4.0);
        let p = param_convert(1.0, ParamKind::Affine).unwrap();
        assert_eq!(p.c_pr, 1.0);
        assert_eq!(
            param_convert(-1.0, ParamKind::Projective).unwrap_err(),
            Error::NegativeProjective(-1.0)
        );
        assert_eq!(
            param_convert(0.0, ParamKind::Affine).unwrap_err(),
            Error::ZeroParam
        );
        let p = param_convert(4.0, ParamKind::Projective).unwrap();
        assert!((p.c_aff - 0.5).abs() < 1e-15);
    }

    #[test]
    fn circle_rotates_by_sixth_of_pi() {
        let n = 64;
        let gamma = CentroAffineCurve::circle(n).unwrap();
        let r = apply_tc(&gamma, 0.5, Branch::Minus).unwrap();
        let want = CentroAffineCurve::new(
            PeriodicFn::from_fn(n, Parity::Antiperiodic, |t| (t + PI / 6.0).cos()).unwrap(),
            PeriodicFn::from_fn(n, Parity::Antiperiodic, |t| (t + PI / 6.0).sin()).unwrap(),
        )
        .unwrap();
        assert!(r.delta.sup_distance(&want) < 1e-9);
        assert!(r.a.a.shift(-(3f64.sqrt() / 2.0)).sup_norm() < 1e-9);
        assert!(r.q.0.shift(1.0).sup_norm() < 1e-9);
        assert!(r.pairing_defect(&gamma) < 1e-12);
    }

    #[test]
    fn circle_elliptic_parameters_fail() {
        let gamma = CentroAffineCurve::circle(32).unwrap();
        assert!(matches!(
            apply_tc(&gamma, 2.0, Branch::Plus),
            Err(Error::NoRealFixedPoints(_))
        ));
        let g = ProjectiveCurve::circle(32).unwrap();
        assert!(matches!(
            apply_tc_projective(&g, 0.5, Branch::Plus),
            Err(Error::NoRealFixedPoints(_))
        ));
    }

    #[test]
    fn circle_projective_branches_are_shifts() {
        let g = ProjectiveCurve::circle(64).unwrap();
        for (b, shift) in [(Branch::Minus, PI / 6.0), (Branch::Plus, -PI / 6.0)] {
            let d = apply_tc_projective(&g, 4.0, b).unwrap();
            let want = g.rotated(shift);
            assert!(d.distance(&want) < 1e-9, "{b:?}: {}", d.distance(&want));
        }
    }

    #[test]
    fn circle_pushforward() {
        let n = 64;
        let gamma = CentroAffineCurve::circle(n).unwrap();
        let f = PeriodicFn::from_fn(n, Parity::Periodic, |t| (2.0 * t).sin()).unwrap();
        let g = pushforward_tangent(&gamma, 0.5, Branch::Minus, &f).unwrap();
        let want =
            PeriodicFn::from_fn(n, Parity::Periodic, |t| (2.0 * t + PI / 3.0).sin()).unwrap();
        assert!(g.sup_distance(&want) < 1e-9);
        let one = PeriodicFn::constant(n, 1.0).unwrap();
        let g1 = pushforward_tangent(&gamma, 0.5, Branch::Minus, &one).unwrap();
        assert!(g1.shift(-1.0).sup_norm() < 1e-12);
    }

    #[test]
    fn bianchi_rejects_equal_parameters() {
        let g = ProjectiveCurve::circle(32).unwrap();
        assert!(permutability_square(&g, 4.0, 4.0, (Branch::Plus, Branch::Plus)).is_err());
    }

    #[test]
    fn mu_nu_reciprocal_sum() {
        for (c1, c2) in [(4.0, 2.0), (3.0, 7.5), (0.2, 11.0)] {
            let (mu, nu) = (bianchi_mu(c1, c2), bianchi_mu(c2, c1));
            assert!((1.0 / mu + 1.0 / nu - 1.0).abs() < 1e-14);
        }
    }
}
