//! KdV flow `p_s = -1/2 p''' + 3 p p'` on Hill potentials and the induced
//! flow of centro-affine curves.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::backlund::{self, BacklundResult};
use crate::curve::{self, CentroAffineCurve, HillPotential};
use crate::error::{Error, Result};
use crate::invariants::{self, big_omega_pair, hamiltonians, omega_pair};
use crate::monodromy::Branch;
use crate::periodic::{Parity, PeriodicFn};

/// Default flow step.
pub const DEFAULT_DS: f64 = 1e-4;

/// Right-hand side `-1/2 p''' + 3 p p'`.
pub fn kdv_rhs(p: &HillPotential) -> PeriodicFn {
    let d1 = p.0.derivative();
    let d3 = p.0.differentiate(3).unwrap();
    d3.scale(-0.5).add(&p.0.mul(&d1).scale(3.0))
}

/// Exponential RK4 (Cox-Matthews) coefficients for one step size, with the
/// phi-functions evaluated by contour averages.
struct Etdrk4 {
    e: Vec<Complex64>,
    e2: Vec<Complex64>,
    q: Vec<Complex64>,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    f3: Vec<Complex64>,
    /// `i * wavenumber` per slot, zero at the Nyquist slot.
    ik: Vec<Complex64>,
}

const CONTOUR_POINTS: usize = 32;

impl Etdrk4 {
    fn new(n: usize, h: f64) -> Self {
        let ik: Vec<Complex64> = (0..n)
            .map(|j| {
                if j == n / 2 {
                    Complex64::new(0.0, 0.0)
                } else {
                    let m = if j < n / 2 {
                        j as f64
                    } else {
                        j as f64 - n as f64
                    };
                    Complex64::new(0.0, 2.0 * m)
                }
            })
            .collect();
        let roots: Vec<Complex64> = (0..CONTOUR_POINTS)
            .map(|k| {
                Complex64::from_polar(1.0, PI * (k as f64 + 0.5) / CONTOUR_POINTS as f64 * 2.0)
            })
            .collect();
        let mut s = Self {
            e: Vec::with_capacity(n),
            e2: Vec::with_capacity(n),
            q: Vec::with_capacity(n),
            f1: Vec::with_capacity(n),
            f2: Vec::with_capacity(n),
            f3: Vec::with_capacity(n),
            ik: ik.clone(),
        };
        for k in ik {
            // L = -1/2 (ik)^3
            let l = -0.5 * k * k * k;
            let lh = l * h;
            s.e.push(lh.exp());
            s.e2.push((lh / 2.0).exp());
            let mut q = Complex64::new(0.0, 0.0);
            let mut f1 = q;
            let mut f2 = q;
            let mut f3 = q;
            for r in &roots {
                let z = lh + r;
                let ez = z.exp();
                let z3 = z * z * z;
                q += ((z / 2.0).exp() - 1.0) / z;
                f1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
                f2 += (2.0 + z + ez * (z - 2.0)) / z3;
                f3 += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
            }
            let w = h / CONTOUR_POINTS as f64;
            s.q.push(q * w);
            s.f1.push(f1 * w);
            s.f2.push(f2 * w);
            s.f3.push(f3 * w);
        }
        s
    }

    /// Spectrum of `3 p p' = 3/2 (p^2)'`.
    fn nonlinear(&self, v: &[Complex64]) -> Vec<Complex64> {
        let p = PeriodicFn::from_spectrum(v.to_vec(), Parity::Periodic).unwrap();
        let sq = p.mul(&p).spectrum();
        sq.iter().zip(&self.ik).map(|(c, k)| 1.5 * k * c).collect()
    }

    fn step(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = v.len();
        let nv = self.nonlinear(v);
        let a: Vec<Complex64> = (0..n)
            .map(|j| self.e2[j] * v[j] + self.q[j] * nv[j])
            .collect();
        let na = self.nonlinear(&a);
        let b: Vec<Complex64> = (0..n)
            .map(|j| self.e2[j] * v[j] + self.q[j] * na[j])
            .collect();
        let nb = self.nonlinear(&b);
        let c: Vec<Complex64> = (0..n)
            .map(|j| self.e2[j] * a[j] + self.q[j] * (2.0 * nb[j] - nv[j]))
            .collect();
        let nc = self.nonlinear(&c);
        (0..n)
            .map(|j| {
                self.e[j] * v[j]
                    + nv[j] * self.f1[j]
                    + 2.0 * (na[j] + nb[j]) * self.f2[j]
                    + nc[j] * self.f3[j]
            })
            .collect()
    }
}

fn step_count(s_end: f64, ds: f64) -> Result<usize> {
    if ds.is_nan() || ds <= 0.0 || s_end.is_nan() || s_end < 0.0 || !s_end.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "need s_end >= 0 and ds > 0, got {s_end}, {ds}"
        )));
    }
    Ok(((s_end / ds) - 1e-9).ceil().max(0.0) as usize)
}

/// Potentials along the flow after each of `steps` steps of size `h`.
fn potential_path(p: &HillPotential, h: f64, steps: usize) -> Result<Vec<PeriodicFn>> {
    p.0.expect_parity(Parity::Periodic)?;
    let n = p.0.len();
    let scheme = Etdrk4::new(n, h);
    let mut v = p.0.spectrum();
    v[n / 2] = Complex64::new(0.0, 0.0);
    let mut out = Vec::with_capacity(steps + 1);
    out.push(PeriodicFn::from_spectrum(v.clone(), Parity::Periodic)?);
    for s in 0..steps {
        let before = out.last().unwrap().sup_norm();
        v = scheme.step(&v);
        let next = PeriodicFn::from_spectrum(v.clone(), Parity::Periodic)?;
        let after = next.sup_norm();
        if !after.is_finite() || after > 2.0 * before.max(1e-300) {
            return Err(Error::StepUnstable((s + 1) as f64 * h));
        }
        out.push(next);
    }
    Ok(out)
}

/// `p(s_end)` under the KdV flow.
pub fn evolve_potential(p: &HillPotential, s_end: f64, ds: f64) -> Result<HillPotential> {
    let steps = step_count(s_end, ds)?;
    if steps == 0 {
        return Ok(p.clone());
    }
    let h = s_end / steps as f64;
    Ok(HillPotential(potential_path(p, h, steps)?.pop().unwrap()))
}

/// Curve together with its potential at flow time `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub curve: CentroAffineCurve,
    pub p: HillPotential,
    pub s: f64,
}

impl FlowState {
    /// `sup |curvature(curve) - p|`.
    pub fn consistency_defect(&self) -> f64 {
        curve::curvature(&self.curve).0.sup_distance(&self.p.0)
    }
}

/// Pointwise generator of `d/ds (Gamma, Gamma')` for potential `p`.
fn lax_generator(p: &PeriodicFn) -> Vec<[[f64; 2]; 2]> {
    let d1 = p.derivative();
    let d2 = p.differentiate(2).unwrap();
    (0..p.len())
        .map(|k| {
            let (pv, a, b) = (p.samples()[k], d1.samples()[k], d2.samples()[k]);
            [[-0.5 * a, pv], [-0.5 * b + pv * pv, 0.5 * a]]
        })
        .collect()
}

/// Flow `Gamma_s = -1/2 p' Gamma + p Gamma'`, sampled every `every` steps.
///
/// At each grid point `(Gamma, Gamma')` obeys a linear 2x2 system in `s`
/// whose coefficients come from `p, p', p''`; the potential is advanced by
/// the exponential integrator at half steps to feed the RK4 stages.
pub fn flow_states(
    gamma: &CentroAffineCurve,
    s_end: f64,
    ds: f64,
    every: usize,
) -> Result<Vec<FlowState>> {
    let steps = step_count(s_end, ds)?;
    let every = every.max(1);
    let p0 = curve::curvature(gamma);
    let mut states = vec![FlowState {
        curve: gamma.clone(),
        p: p0.clone(),
        s: 0.0,
    }];
    if steps == 0 {
        return Ok(states);
    }
    let h = s_end / steps as f64;
    let path = potential_path(&p0, h / 2.0, 2 * steps)?;
    let gens: Vec<_> = path.iter().map(lax_generator).collect();
    let n = gamma.n();
    let d = gamma.derivative();
    // y[c][k] = (Gamma_c, Gamma_c') at node k
    let mut y: [Vec<[f64; 2]>; 2] = [
        (0..n)
            .map(|k| [gamma.gamma1().samples()[k], d.gamma1().samples()[k]])
            .collect(),
        (0..n)
            .map(|k| [gamma.gamma2().samples()[k], d.gamma2().samples()[k]])
            .collect(),
    ];
    let mv = |m: &[[f64; 2]; 2], x: [f64; 2]| {
        [
            m[0][0] * x[0] + m[0][1] * x[1],
            m[1][0] * x[0] + m[1][1] * x[1],
        ]
    };
    for step in 0..steps {
        let (b0, b1, b2) = (&gens[2 * step], &gens[2 * step + 1], &gens[2 * step + 2]);
        for comp in y.iter_mut() {
            for (k, x) in comp.iter_mut().enumerate() {
                let k1 = mv(&b0[k], *x);
                let k2 = mv(&b1[k], [x[0] + 0.5 * h * k1[0], x[1] + 0.5 * h * k1[1]]);
                let k3 = mv(&b1[k], [x[0] + 0.5 * h * k2[0], x[1] + 0.5 * h * k2[1]]);
                let k4 = mv(&b2[k], [x[0] + h * k3[0], x[1] + h * k3[1]]);
                for i in 0..2 {
                    x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
        }
        if (step + 1) % every == 0 || step + 1 == steps {
            let curve = CentroAffineCurve::new(
                PeriodicFn::new(y[0].iter().map(|x| x[0]).collect(), Parity::Antiperiodic)?,
                PeriodicFn::new(y[1].iter().map(|x| x[0]).collect(), Parity::Antiperiodic)?,
            )?;
            states.push(FlowState {
                curve,
                p: HillPotential(path[2 * step + 2].clone()),
                s: (step + 1) as f64 * h,
            });
        }
    }
    Ok(states)
}

/// `Gamma(s_end)` under the curve flow induced by KdV.
pub fn evolve_curve(gamma: &CentroAffineCurve, s_end: f64, ds: f64) -> Result<CentroAffineCurve> {
    let steps = step_count(s_end, ds)?;
    Ok(flow_states(gamma, s_end, ds, steps.max(1))?
        .pop()
        .unwrap()
        .curve)
}

/// One row of the flow trace CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowRow {
    pub s: f64,
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
}

pub fn flow_trace(
    gamma: &CentroAffineCurve,
    s_end: f64,
    ds: f64,
    every: usize,
) -> Result<Vec<FlowRow>> {
    Ok(flow_rows(&flow_states(gamma, s_end, ds, every)?))
}

/// Trace rows with every quantity recomputed from the curve samples.
pub fn flow_rows(states: &[FlowState]) -> Vec<FlowRow> {
    states
        .iter()
        .map(|st| {
            let (h1, h2) = hamiltonians(&curve::curvature(&st.curve));
            let t = invariants::ijk(&st.curve);
            FlowRow {
                s: st.s,
                h1,
                h2,
                i: t.i,
                j: t.j,
                k: t.k,
            }
        })
        .collect()
}

/// Residuals of `Omega(X_{j-1}, .) = dH_j = omega(X_j, .)` against one test field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecursionResidual {
    /// `|Omega(X_{j-1}, V_g) - dH_j(V_g)|`.
    pub big_omega: f64,
    /// `|omega(X_j, V_g) - dH_j(V_g)|`; absent for `j = 2`.
    pub omega: Option<f64>,
}

impl RecursionResidual {
    pub fn max(&self) -> f64 {
        self.big_omega.max(self.omega.unwrap_or(0.0))
    }
}

pub fn recursion_check(
    gamma: &CentroAffineCurve,
    j: u32,
    test_fields: &[PeriodicFn],
) -> Result<Vec<RecursionResidual>> {
    let p = curve::curvature(gamma);
    let one = PeriodicFn::constant(gamma.n(), 1.0)?;
    let h_j: fn(&CentroAffineCurve) -> f64 = match j {
        1 => |c| hamiltonians(&curve::curvature(c)).0,
        2 => |c| hamiltonians(&curve::curvature(c)).1,
        _ => {
            return Err(Error::InvalidArgument(format!(
                "recursion index {j} not in 1..=2"
            )))
        }
    };
    test_fields
        .iter()
        .map(|g| {
            let v = curve::tangent_field(gamma, g)?;
            let dh = invariants::directional_derivative(gamma, &v, h_j);
            Ok(match j {
                1 => RecursionResidual {
                    big_omega: (big_omega_pair(&p, &one, g) - dh).abs(),
                    omega: Some((omega_pair(&p.0, g) - dh).abs()),
                },
                _ => RecursionResidual {
                    big_omega: (big_omega_pair(&p, &p.0, g) - dh).abs(),
                    omega: None,
                },
            })
        })
        .collect()
}

/// Maximal number of halvings while tracking a branch.
const MAX_TRACK_DEPTH: u32 = 6;

fn nearest_branch(
    gamma: &CentroAffineCurve,
    c_aff: f64,
    a0: f64,
    s: f64,
) -> Result<Option<BacklundResult>> {
    let mut found: Vec<(BacklundResult, f64)> = Vec::new();
    for b in [Branch::Plus, Branch::Minus] {
        if let Ok(r) = backlund::apply_tc(gamma, c_aff, b) {
            let d = (r.a.a.samples()[0] - a0).abs();
            found.push((r, d));
        }
    }
    found.sort_by(|x, y| x.1.total_cmp(&y.1));
    match found.len() {
        0 => Err(Error::BranchJump(s)),
        1 => Ok(Some(found.pop().unwrap().0)),
        _ => {
            // accept only a decisive match
            if found[0].1 < 0.25 * found[1].1 {
                Ok(Some(found.swap_remove(0).0))
            } else {
                Ok(None)
            }
        }
    }
}

/// Apply `T_c` along the flow, choosing the branch continuous in `a(0)`.
fn tracked_tc(
    gamma: &CentroAffineCurve,
    c_aff: f64,
    a0: f64,
    s: f64,
    ds: f64,
    depth: u32,
) -> Result<BacklundResult> {
    let evolved = evolve_curve(gamma, s, ds)?;
    if let Some(r) = nearest_branch(&evolved, c_aff, a0, s)? {
        return Ok(r);
    }
    if depth >= MAX_TRACK_DEPTH {
        return Err(Error::BranchJump(s));
    }
    let half = tracked_tc(gamma, c_aff, a0, s / 2.0, ds, depth + 1)?;
    let mid = evolve_curve(gamma, s / 2.0, ds)?;
    tracked_tc(&mid, c_aff, half.a.a.samples()[0], s / 2.0, ds, depth + 1)
}

/// Sup distance between `flow(T_c Gamma)` and `T_c(flow Gamma)` at time `s`.
pub fn commutation_check(
    gamma: &CentroAffineCurve,
    c_aff: f64,
    branch: Branch,
    s: f64,
    ds: f64,
) -> Result<f64> {
    let start = backlund::apply_tc(gamma, c_aff, branch)?;
    let left = evolve_curve(&start.delta, s, ds)?;
    let right = tracked_tc(gamma, c_aff, start.a.a.samples()[0], s, ds, 0)?;
    Ok(left.sup_distance(&right.delta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn per(n: usize, f: impl Fn(f64) -> f64) -> PeriodicFn {
        PeriodicFn::from_fn(n, Parity::Periodic, f).unwrap()
    }

    #[test]
    fn rhs_examples() {
        let c = HillPotential(PeriodicFn::constant(32, -0.7).unwrap());
        assert!(kdv_rhs(&c).sup_norm() < 1e-15);
        let p = HillPotential(per(32, |t| -1.0 + 0.1 * (2.0 * t).cos()));
        let want = per(32, |t| 0.2 * (2.0 * t).sin() - 0.03 * (4.0 * t).sin());
        assert!(kdv_rhs(&p).sup_distance(&want) < 1e-11);
        assert!(kdv_rhs(&p).integrate_period().abs() < 1e-14);
    }

    #[test]
    fn constant_potential_is_stationary() {
        let p = HillPotential(PeriodicFn::constant(32, -1.0).unwrap());
        let q = evolve_potential(&p, 0.03, 1e-3).unwrap();
        assert!(q.0.shift(1.0).sup_norm() < 1e-14);
    }

    #[test]
    fn circle_flows_by_translation() {
        let n = 32;
        let g = CentroAffineCurve::circle(n).unwrap();
        let s = 0.04;
        let out = evolve_curve(&g, s, 1e-3).unwrap();
        let want = CentroAffineCurve::new(
            PeriodicFn::from_fn(n, Parity::Antiperiodic, |t| (t - s).cos()).unwrap(),
            PeriodicFn::from_fn(n, Parity::Antiperiodic, |t| (t - s).sin()).unwrap(),
        )
        .unwrap();
        assert!(out.sup_distance(&want) < 1e-12);
    }

    #[test]
    fn recursion_rejects_bad_index() {
        let g = CentroAffineCurve::circle(16).unwrap();
        assert!(recursion_check(&g, 3, &[]).is_err());
    }

    #[test]
    fn bad_step_is_rejected() {
        let p = HillPotential(PeriodicFn::constant(16, -1.0).unwrap());
        assert!(evolve_potential(&p, 0.1, 0.0).is_err());
    }
}
