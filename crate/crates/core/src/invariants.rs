//! Pairings on tangent profiles, KdV Hamiltonians, the sl(2) integrals
//! `I, J, K`, Killing fields and the discrete cross-ratio limit.

use serde::{Deserialize, Serialize};

use crate::curve::{self, CentroAffineCurve, HillPotential, ProjectiveCurve, TangentVector};
use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::periodic::PeriodicFn;

/// Step of the centered differences used for directional derivatives.
pub const FD_STEP: f64 = 1e-5;

/// `omega(U_f, V_g) = 1/2 int (f g' - f' g)`.
pub fn omega_pair(f: &PeriodicFn, g: &PeriodicFn) -> f64 {
    0.5 * f
        .mul(&g.derivative())
        .sub(&f.derivative().mul(g))
        .integrate_period()
}

/// `Omega(U_f, V_g) = int [1/4 (f' g'' - f'' g') + p (f g' - f' g)]`.
pub fn big_omega_pair(p: &HillPotential, f: &PeriodicFn, g: &PeriodicFn) -> f64 {
    let (df, dg) = (f.derivative(), g.derivative());
    let (d2f, d2g) = (f.differentiate(2).unwrap(), g.differentiate(2).unwrap());
    let quartic = df.mul(&d2g).sub(&d2f.mul(&dg)).scale(0.25);
    let wronsk = f.mul(&dg).sub(&df.mul(g));
    quartic.add(&p.0.mul(&wronsk)).integrate_period()
}

/// `Omega` through `int [p U - U'', V] dt` on the plane fields themselves.
pub fn big_omega_fields(
    curve: &CentroAffineCurve,
    p: &HillPotential,
    f: &PeriodicFn,
    g: &PeriodicFn,
) -> Result<f64> {
    let u = curve::tangent_field(curve, f)?;
    let v = curve::tangent_field(curve, g)?;
    let w1 = p.0.mul(&u.u1).sub(&u.u1.differentiate(2).unwrap());
    let w2 = p.0.mul(&u.u2).sub(&u.u2.differentiate(2).unwrap());
    Ok(w1.mul(&v.u2).sub(&w2.mul(&v.u1)).integrate_period())
}

/// `(omega', Omega')` for the vector fields `u = f gamma'`, `v = g gamma'`
/// along a projective curve.
///
/// `omega'` is integrated in the angle chart, where the fields read
/// `f phi'`, `g phi'`. `Omega'` uses the affine-chart Schwarzian
/// `S(gamma) = S(phi) + 2 phi'^2` after one integration by parts, which
/// removes the chart poles from the integrand.
pub fn projective_forms(gamma: &ProjectiveCurve, f: &PeriodicFn, g: &PeriodicFn) -> (f64, f64) {
    let speed = gamma.speed();
    let w = f.mul(&speed);
    let z = g.mul(&speed);
    let inv_sq = speed.map(|s| 1.0 / (s * s));
    let omega_prime = w
        .mul(&z.derivative())
        .sub(&w.derivative().mul(&z))
        .mul(&inv_sq)
        .integrate_period();

    let (df, dg) = (f.derivative(), g.derivative());
    let (d2f, d2g) = (f.differentiate(2).unwrap(), g.differentiate(2).unwrap());
    let top = d2f.mul(&dg).sub(&df.mul(&d2g));
    let wr = df.mul(g).sub(&f.mul(&dg));
    let big_omega_prime = top
        .sub(&gamma.schwarzian().mul(&wr).scale(2.0))
        .integrate_period();
    (omega_prime, big_omega_prime)
}

/// `H1 = int p`, `H2 = 1/2 int p^2`.
pub fn hamiltonians(p: &HillPotential) -> (f64, f64) {
    (
        p.0.integrate_period(),
        0.5 * p.0.mul(&p.0).integrate_period(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IjkTriple {
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub discriminant: f64,
}

pub fn ijk(curve: &CentroAffineCurve) -> IjkTriple {
    let (g1, g2) = (curve.gamma1(), curve.gamma2());
    let i = g1.mul(g1).integrate_period();
    let j = g1.mul(g2).integrate_period();
    let k = g2.mul(g2).integrate_period();
    IjkTriple {
        i,
        j,
        k,
        discriminant: i * k - j * j,
    }
}

/// Invariant report written by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    #[serde(rename = "H1")]
    pub h1: f64,
    #[serde(rename = "H2")]
    pub h2: f64,
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub discriminant: f64,
}

impl InvariantReport {
    pub fn of(curve: &CentroAffineCurve) -> Self {
        let (h1, h2) = hamiltonians(&curve::curvature(curve));
        let t = ijk(curve);
        Self {
            h1,
            h2,
            i: t.i,
            j: t.j,
            k: t.k,
            discriminant: t.discriminant,
        }
    }

    pub fn values(&self) -> [f64; 6] {
        [self.h1, self.h2, self.i, self.j, self.k, self.discriminant]
    }

    /// Largest componentwise difference.
    pub fn max_deviation(&self, other: &InvariantReport) -> f64 {
        self.values()
            .iter()
            .zip(other.values())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Basis of sl(2,R) paired with the Killing profiles below.
pub const SL2_BASIS: [Mat2; 3] = [
    [[1.0, 0.0], [0.0, -1.0]],
    [[0.0, 1.0], [1.0, 0.0]],
    [[0.0, -1.0], [1.0, 0.0]],
];

/// `f_A = [Gamma, A Gamma]` for each matrix of [`SL2_BASIS`]; `U_{f_A} = A Gamma`.
pub fn killing_fields(curve: &CentroAffineCurve) -> [PeriodicFn; 3] {
    SL2_BASIS.map(|a| killing_profile(curve, &a))
}

pub fn killing_profile(curve: &CentroAffineCurve, a: &Mat2) -> PeriodicFn {
    curve.bracket(&curve.transform(a))
}

/// Cross-ratio of `(p_i, p_{i+1}, q_i, q_{i+1})` given as RP^1 angles.
///
/// The chart factors `cos(theta)` cancel between numerator and denominator,
/// so the value equals the affine formula whenever all points are finite.
pub fn cross_ratio_angles(p0: f64, p1: f64, q0: f64, q1: f64) -> Result<f64> {
    let num = (q1 - q0).sin() * (p1 - p0).sin();
    let den = (q0 - p0).sin() * (q1 - p1).sin();
    if num == 0.0 || den.abs() < 1e-14 {
        return Err(Error::DegeneratePoints(format!(
            "angles ({p0:.6}, {p1:.6}, {q0:.6}, {q1:.6})"
        )));
    }
    Ok(num / den)
}

/// Extrapolated `lim CR(eps) / eps^2` from an eps-sweep at parameter `t`.
///
/// `CR(eps)/eps^2 = c + a2 eps^2 + a3 eps^3 + ...` (the symmetry
/// `CR(t, eps) = CR(t + eps, -eps)` kills the linear term), so the fit uses
/// powers `2, 3, 4, ..` up to the number of samples.
pub fn cross_ratio_check(
    gamma: &ProjectiveCurve,
    delta: &ProjectiveCurve,
    t: f64,
    eps_list: &[f64],
) -> Result<f64> {
    if eps_list.is_empty() {
        return Err(Error::InvalidArgument("empty eps list".into()));
    }
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        if eps == 0.0 {
            return Err(Error::DegeneratePoints("eps = 0".into()));
        }
        let cr = cross_ratio_angles(
            gamma.angle_at(t),
            gamma.angle_at(t + eps),
            delta.angle_at(t),
            delta.angle_at(t + eps),
        )?;
        rows.push((eps, cr / (eps * eps)));
    }
    Ok(extrapolate_to_zero(&rows))
}

/// Constant term of the fit `y = c + sum_{k=2}^{m} a_k x^k` through `m` points.
fn extrapolate_to_zero(rows: &[(f64, f64)]) -> f64 {
    let m = rows.len();
    let mut mat: Vec<Vec<f64>> = rows
        .iter()
        .map(|&(x, y)| {
            let mut r = vec![1.0];
            r.extend((2..=m).map(|k| x.powi(k as i32)));
            r.push(y);
            r
        })
        .collect();
    // Gaussian elimination with partial pivoting on the tiny dense system
    for col in 0..m {
        let piv = (col..m)
            .max_by(|&a, &b| mat[a][col].abs().total_cmp(&mat[b][col].abs()))
            .unwrap();
        mat.swap(col, piv);
        let pivot_row = mat[col].clone();
        for (r, row) in mat.iter_mut().enumerate() {
            if r != col {
                let factor = row[col] / pivot_row[col];
                for (x, p) in row.iter_mut().zip(&pivot_row).skip(col) {
                    *x -= factor * p;
                }
            }
        }
    }
    mat[0][m] / mat[0][0]
}

/// Centered difference of a functional along `Gamma + eps U`, with one
/// Richardson step: `(4 D(eps/2) - D(eps)) / 3`.
pub fn directional_derivative(
    curve: &CentroAffineCurve,
    u: &TangentVector,
    functional: impl Fn(&CentroAffineCurve) -> f64,
) -> f64 {
    let centered = |eps: f64| {
        (functional(&curve.deformed(u, eps)) - functional(&curve.deformed(u, -eps))) / (2.0 * eps)
    };
    (4.0 * centered(FD_STEP / 2.0) - centered(FD_STEP)) / 3.0
}

/// Residuals `|dH(U_f) - 2 omega(f, h_H)|` for `H = I, J, K`, where
/// `h_I = Gamma_1^2`, `h_J = Gamma_1 Gamma_2`, `h_K = Gamma_2^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sl2Residuals {
    pub i: f64,
    pub j: f64,
    pub k: f64,
}

impl Sl2Residuals {
    pub fn max(&self) -> f64 {
        self.i.max(self.j).max(self.k)
    }
}

pub fn sl2_hamiltonian_check(
    curve: &CentroAffineCurve,
    tests: &[PeriodicFn],
) -> Result<Sl2Residuals> {
    let (g1, g2) = (curve.gamma1(), curve.gamma2());
    let profiles = [g1.mul(g1), g1.mul(g2), g2.mul(g2)];
    let functionals: [fn(&CentroAffineCurve) -> f64; 3] =
        [|c| ijk(c).i, |c| ijk(c).j, |c| ijk(c).k];
    let mut worst = [0.0f64; 3];
    for f in tests {
        let u = curve::tangent_field(curve, f)?;
        for idx in 0..3 {
            let d = directional_derivative(curve, &u, functionals[idx]);
            let w = 2.0 * omega_pair(f, &profiles[idx]);
            worst[idx] = worst[idx].max((d - w).abs());
        }
    }
    Ok(Sl2Residuals {
        i: worst[0],
        j: worst[1],
        k: worst[2],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::periodic::Parity;
    use std::f64::consts::PI;

    fn per(n: usize, f: impl Fn(f64) -> f64) -> PeriodicFn {
        PeriodicFn::from_fn(n, Parity::Periodic, f).unwrap()
    }

    #[test]
    fn omega_anchors() {
        let s = per(32, |t| (2.0 * t).sin());
        let c = per(32, |t| (2.0 * t).cos());
        assert!((omega_pair(&s, &c) + PI).abs() < 1e-13);
        assert!(omega_pair(&s, &s).abs() < 1e-15);
        let one = PeriodicFn::constant(32, 1.0).unwrap();
        let f = per(32, |t| (2.0 * t).cos().exp());
        assert!(omega_pair(&f, &one).abs() < 1e-13);
    }

    #[test]
    fn big_omega_anchors() {
        let p = HillPotential(PeriodicFn::constant(32, -1.0).unwrap());
        let s2 = per(32, |t| (2.0 * t).sin());
        let c2 = per(32, |t| (2.0 * t).cos());
        assert!(big_omega_pair(&p, &s2, &c2).abs() < 1e-12);
        let s4 = per(32, |t| (4.0 * t).sin());
        let c4 = per(32, |t| (4.0 * t).cos());
        assert!((big_omega_pair(&p, &s4, &c4) + 12.0 * PI).abs() < 1e-11);
    }

    #[test]
    fn projective_forms_on_circle() {
        let g = ProjectiveCurve::circle(32).unwrap();
        let s2 = per(32, |t| (2.0 * t).sin());
        let c2 = per(32, |t| (2.0 * t).cos());
        let (w, big) = projective_forms(&g, &s2, &c2);
        assert!((w + 2.0 * PI).abs() < 1e-12);
        assert!(big.abs() < 1e-11);
        let (w, big) = projective_forms(&g, &s2, &s2);
        assert!(w.abs() < 1e-14 && big.abs() < 1e-14);
    }

    #[test]
    fn circle_ijk_and_killing_profiles() {
        let c = CentroAffineCurve::circle(32).unwrap();
        let t = ijk(&c);
        assert!(
            (t.i - PI / 2.0).abs() < 1e-14 && t.j.abs() < 1e-14 && (t.k - PI / 2.0).abs() < 1e-14
        );
        assert!((t.discriminant - PI * PI / 4.0).abs() < 1e-13);

        let [h, e, r] = killing_fields(&c);
        assert!(h.sup_distance(&per(32, |t| -(2.0 * t).sin())) < 1e-14);
        assert!(e.sup_distance(&per(32, |t| (2.0 * t).cos())) < 1e-14);
        assert!(r.shift(-1.0).sup_norm() < 1e-14);
        let upper = killing_profile(&c, &[[0.0, 1.0], [0.0, 0.0]]);
        assert!(upper.sup_distance(&per(32, |t| -0.5 + 0.5 * (2.0 * t).cos())) < 1e-14);
    }

    #[test]
    fn hamiltonians_of_circle() {
        let p = HillPotential(PeriodicFn::constant(16, -1.0).unwrap());
        let (h1, h2) = hamiltonians(&p);
        assert!((h1 + PI).abs() < 1e-14 && (h2 - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn cross_ratio_zero_eps_is_degenerate() {
        let g = ProjectiveCurve::circle(32).unwrap();
        let d = g.rotated(PI / 6.0);
        assert!(matches!(
            cross_ratio_check(&g, &d, 0.3, &[0.0]),
            Err(Error::DegeneratePoints(_))
        ));
        assert!(matches!(
            cross_ratio_check(&g, &g, 0.3, &[0.1]),
            Err(Error::DegeneratePoints(_))
        ));
    }

    #[test]
    fn extrapolation_recovers_polynomial_constant() {
        let rows: Vec<(f64, f64)> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&x| (x, 4.0 - 2.0 * x * x + 7.0 * x * x * x))
            .collect();
        assert!((extrapolate_to_zero(&rows) - 4.0).abs() < 1e-12);
    }
}
