#![allow(dead_code, clippy::excessive_precision)]
//! Independent reference computations shared by the integration tests.

use num_complex::Complex64;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn kronrod<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = half * XGK[j];
        let pair = f(center - x) + f(center + x);
        kron += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    ((kron * half), ((kron - gauss) * half).norm())
}

/// Adaptive 15-point Gauss–Kronrod quadrature of a complex integrand.
pub fn integrate<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, b: f64, tol: f64) -> Complex64 {
    if a == b {
        return Complex64::new(0.0, 0.0);
    }
    let mut pending = vec![(a, b)];
    let mut total = Complex64::new(0.0, 0.0);
    let width = b - a;
    while let Some((lo, hi)) = pending.pop() {
        let (value, err) = kronrod(&mut f, lo, hi);
        if err <= tol * (hi - lo) / width || hi - lo < 1e-12 * width {
            total += value;
        } else {
            let mid = 0.5 * (lo + hi);
            pending.push((lo, mid));
            pending.push((mid, hi));
        }
    }
    total
}

/// `∫_0^t ∫_0^t exp(i a t1 + i b t2 - κ|t1 - t2|)` by nested quadrature, the
/// inner integral split at the kink `t2 = t1`.
pub fn double_integral(a: f64, b: f64, kappa: f64, t: f64) -> Complex64 {
    let tol = 1e-12 * (1.0 + t * t);
    integrate(
        |t1| {
            let inner = |t2: f64| Complex64::new(-kappa * (t1 - t2).abs(), b * t2).exp();
            let below = integrate(inner, 0.0, t1, tol);
            let above = integrate(inner, t1, t, tol);
            Complex64::new(0.0, a * t1).exp() * (below + above)
        },
        0.0,
        t,
        tol,
    )
}

/// The grid of `(ω_α, ω_β, t)` points the closed form is checked on, all at
/// `κ = 1`: a 5×5×3 block plus near-cancelling pairs `ω_β = -ω_α + 10^{-k}`.
pub fn integral_check_points() -> Vec<(f64, f64, f64)> {
    let mut points = Vec::new();
    let times = [0.5, 3.0, 10.0];
    for a in [-3.0, -1.3, 0.0, 0.7, 2.5] {
        for b in [-2.0, -0.7, 0.0, 1.3, 3.0] {
            for t in times {
                points.push((a, b, t));
            }
        }
    }
    for a in [0.5, 1.0, 5.0] {
        for k in 2..=8 {
            for t in times {
                points.push((a, -a + 10f64.powi(-k), t));
            }
        }
    }
    points
}
