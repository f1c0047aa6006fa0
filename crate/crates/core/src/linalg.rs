//! 2x2 matrix helpers and the fixed-step linear integrator.

/// Row-major real 2x2 matrix.
pub type Mat2 = [[f64; 2]; 2];

pub const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

/// Tolerance on `|Tr| - 2` inside which a monodromy counts as parabolic.
pub const PARABOLIC_TOL: f64 = 1e-9;

/// RK4 steps per grid interval: `h = pi / (STEPS_PER_NODE * N)`.
pub const STEPS_PER_NODE: usize = 8;

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

pub fn mat_vec(a: &Mat2, v: [f64; 2]) -> [f64; 2] {
    [
        a[0][0] * v[0] + a[0][1] * v[1],
        a[1][0] * v[0] + a[1][1] * v[1],
    ]
}

pub fn det(a: &Mat2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

pub fn trace(a: &Mat2) -> f64 {
    a[0][0] + a[1][1]
}

pub fn inverse(a: &Mat2) -> Mat2 {
    let d = det(a);
    [[a[1][1] / d, -a[0][1] / d], [-a[1][0] / d, a[0][0] / d]]
}

pub fn sub(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [a[0][0] - b[0][0], a[0][1] - b[0][1]],
        [a[1][0] - b[1][0], a[1][1] - b[1][1]],
    ]
}

pub fn scale(a: &Mat2, s: f64) -> Mat2 {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

/// Max-entry norm.
pub fn max_abs(a: &Mat2) -> f64 {
    a.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

/// Real eigenpair of a 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: [f64; 2],
}

/// Real eigenpairs of a unimodular matrix, larger modulus first.
///
/// Returns `None` unless the matrix is strictly hyperbolic: `|Tr| - 2` must
/// exceed [`PARABOLIC_TOL`] relative to `det`.
pub fn hyperbolic_eigen(a: &Mat2) -> Option<[Eigenpair; 2]> {
    let tr = trace(a);
    let d = det(a);
    let disc = tr * tr - 4.0 * d;
    if tr.abs() - 2.0 * d.abs().sqrt() <= PARABOLIC_TOL || disc <= 0.0 {
        return None;
    }
    let root = disc.sqrt();
    // avoid cancellation: the large root first, the small one from det
    let big = 0.5 * (tr + tr.signum() * root);
    let small = d / big;
    let pair = |value: f64| {
        let r1 = [a[0][1], value - a[0][0]];
        let r2 = [value - a[1][1], a[1][0]];
        let n1 = r1[0].hypot(r1[1]);
        let n2 = r2[0].hypot(r2[1]);
        let (v, n) = if n1 >= n2 { (r1, n1) } else { (r2, n2) };
        Eigenpair {
            value,
            vector: [v[0] / n, v[1] / n],
        }
    };
    Some([pair(big), pair(small)])
}

/// Classical RK4 for `x' = B(t) x` with `B` tabulated at half steps.
///
/// `coeff[j]` is `B` at `t0 + j*h/2`, so `coeff.len() == 2*steps + 1`.
/// Returns the `steps + 1` states. With `backward`, integration starts
/// at the last time and the returned states are still in forward time
/// order.
pub fn rk4_linear(coeff: &[Mat2], h: f64, x0: [f64; 2], backward: bool) -> Vec<[f64; 2]> {
    assert!(coeff.len() % 2 == 1 && coeff.len() >= 3);
    let steps = (coeff.len() - 1) / 2;
    let mut out = Vec::with_capacity(steps + 1);
    let mut x = x0;
    out.push(x);
    let (dt, idx): (f64, Box<dyn Fn(usize) -> usize>) = if backward {
        (-h, Box::new(move |j| 2 * steps - j))
    } else {
        (h, Box::new(|j| j))
    };
    let axpy = |x: [f64; 2], k: [f64; 2], s: f64| [x[0] + s * k[0], x[1] + s * k[1]];
    for n in 0..steps {
        let b0 = &coeff[idx(2 * n)];
        let b1 = &coeff[idx(2 * n + 1)];
        let b2 = &coeff[idx(2 * n + 2)];
        let k1 = mat_vec(b0, x);
        let k2 = mat_vec(b1, axpy(x, k1, 0.5 * dt));
        let k3 = mat_vec(b1, axpy(x, k2, 0.5 * dt));
        let k4 = mat_vec(b2, axpy(x, k3, dt));
        for i in 0..2 {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out.push(x);
    }
    if backward {
        out.reverse();
    }
    out
}

/// Fundamental matrix at the final time, built column by column.
pub fn rk4_fundamental(coeff: &[Mat2], h: f64) -> Mat2 {
    let c0 = *rk4_linear(coeff, h, [1.0, 0.0], false).last().unwrap();
    let c1 = *rk4_linear(coeff, h, [0.0, 1.0], false).last().unwrap();
    [[c0[0], c1[0]], [c0[1], c1[1]]]
}
