//! Integer-order Bessel functions of the first kind, zeros of `J0`, and the
//! Jacobi–Anger sideband weights of a sinusoidal phase modulation.
//!
//! `J_n(x)` is evaluated from its power series for `|x| <= 12` and by Miller's
//! backward recurrence, normalised with `J0 + 2 (J2 + J4 + ...) = 1`, above
//! that. The validated range is `|n| <= 200`, `|x| <= 500`, with absolute
//! error below `1e-12`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest order accepted by [`bessel_j`].
pub const MAX_ORDER: i32 = 200;
/// Largest argument magnitude accepted by [`bessel_j`].
pub const MAX_ARGUMENT: f64 = 500.0;
/// Largest zero index accepted by [`j0_zero`].
pub const MAX_ZERO_INDEX: u32 = 50;
/// `|J0(m)|` below this marks a modulation index as suppression tuned.
pub const SUPPRESSION_TOLERANCE: f64 = 1e-10;

const SERIES_LIMIT: f64 = 12.0;
const RESCALE_ABOVE: f64 = 1e200;

/// Sign in front of the phase in the modulated coupling `g exp(∓ i Φ(t))`.
///
/// Moduli of amplitudes do not depend on this choice because
/// `J_{-l} = (-1)^l J_l`; both conventions are accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseSign {
    /// `g exp(-i Φ(t))`.
    #[default]
    Negative,
    /// `g exp(+i Φ(t))`.
    Positive,
}

impl PhaseSign {
    pub fn factor(self) -> f64 {
        match self {
            PhaseSign::Negative => -1.0,
            PhaseSign::Positive => 1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            PhaseSign::Negative => PhaseSign::Positive,
            PhaseSign::Positive => PhaseSign::Negative,
        }
    }
}

/// Phase modulation `Φ(t) = m sin(ν t)` applied to a system–bath coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulationParams {
    /// Dimensionless modulation index.
    pub m: f64,
    /// Modulation angular frequency.
    pub nu: f64,
    pub sign: PhaseSign,
}

impl ModulationParams {
    pub fn new(m: f64, nu: f64) -> Result<Self> {
        if !m.is_finite() || m < 0.0 {
            return Err(Error::Precondition(format!(
                "modulation index must be finite and >= 0, got {m}"
            )));
        }
        if !nu.is_finite() || nu < 0.0 {
            return Err(Error::Precondition(format!(
                "modulation frequency must be finite and >= 0, got {nu}"
            )));
        }
        if m > 0.0 && nu == 0.0 {
            return Err(Error::Precondition(
                "modulation frequency must be > 0 when the index is nonzero".into(),
            ));
        }
        Ok(Self {
            m,
            nu,
            sign: PhaseSign::Negative,
        })
    }

    /// No modulation at all (`m = 0`).
    pub fn none() -> Self {
        Self {
            m: 0.0,
            nu: 0.0,
            sign: PhaseSign::Negative,
        }
    }

    /// Modulation whose index is the `k`-th zero of `J0`.
    pub fn tuned(k: u32, nu: f64) -> Result<Self> {
        Self::new(j0_zero(k)?, nu)
    }

    pub fn with_sign(mut self, sign: PhaseSign) -> Self {
        self.sign = sign;
        self
    }

    pub fn is_active(&self) -> bool {
        self.m > 0.0
    }

    /// True iff `|J0(m)| < 1e-10`, i.e. the carrier component is removed.
    pub fn is_suppression_tuned(&self) -> bool {
        bessel_j_table(0, self.m)[0].abs() < SUPPRESSION_TOLERANCE
    }

    /// `Φ(t) = m sin(ν t)`.
    pub fn phase(&self, t: f64) -> f64 {
        phase(self, t)
    }

    /// The phase entering the coupling, `∓Φ(t)` according to [`PhaseSign`].
    pub fn signed_phase(&self, t: f64) -> f64 {
        self.sign.factor() * self.phase(t)
    }

    /// One modulation period `2π/ν`, or `None` when unmodulated.
    pub fn period(&self) -> Option<f64> {
        (self.is_active() && self.nu > 0.0).then(|| 2.0 * PI / self.nu)
    }
}

/// `Φ(t) = m sin(ν t)`.
pub fn phase(modulation: &ModulationParams, t: f64) -> f64 {
    modulation.m * (modulation.nu * t).sin()
}

/// Bessel function of the first kind `J_n(x)` for integer order.
///
/// Accepts `|n| <= 200` and `|x| <= 500`; outside that range an
/// [`Error::Range`] is returned.
pub fn bessel_j(n: i32, x: f64) -> Result<f64> {
    if n.abs() > MAX_ORDER {
        return Err(Error::Range {
            what: "Bessel order",
            value: n as f64,
            range: "|n| <= 200",
        });
    }
    if !x.is_finite() || x.abs() > MAX_ARGUMENT {
        return Err(Error::Range {
            what: "Bessel argument",
            value: x,
            range: "|x| <= 500",
        });
    }
    let order = n.unsigned_abs() as usize;
    let value = bessel_j_table(order, x)[order];
    // J_{-n} = (-1)^n J_n
    Ok(if n < 0 && order % 2 == 1 { -value } else { value })
}

/// `[J_0(x), J_1(x), ..., J_nmax(x)]` in one pass.
///
/// No range validation is done beyond finiteness of `x`; accuracy is only
/// guaranteed on the range documented for [`bessel_j`].
pub fn bessel_j_table(nmax: usize, x: f64) -> Vec<f64> {
    assert!(x.is_finite(), "Bessel argument must be finite");
    let ax = x.abs();
    let mut table = if ax == 0.0 {
        let mut t = vec![0.0; nmax + 1];
        t[0] = 1.0;
        t
    } else if ax <= SERIES_LIMIT {
        (0..=nmax).map(|n| series(n, ax)).collect()
    } else {
        miller(nmax, ax)
    };
    if x < 0.0 {
        for (n, v) in table.iter_mut().enumerate() {
            if n % 2 == 1 {
                *v = -*v;
            }
        }
    }
    table
}

/// `J_n(x) = Σ_k (-1)^k (x/2)^(2k+n) / (k! (k+n)!)` for `x > 0`.
fn series(n: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for j in 1..=n {
        term *= half / j as f64;
        if term == 0.0 {
            return 0.0;
        }
    }
    let q = half * half;
    let mut sum = term;
    let mut largest = term.abs();
    let mut k = 0usize;
    loop {
        k += 1;
        term *= -q / (k as f64 * (k + n) as f64);
        sum += term;
        largest = largest.max(term.abs());
        if (k as f64) > half && term.abs() <= 1e-18 * largest {
            break;
        }
    }
    sum
}

/// Miller's backward recurrence normalised by the even-order sum rule.
fn miller(nmax: usize, x: f64) -> Vec<f64> {
    let top = (nmax as f64).max(x.ceil());
    let mut start = (top + 20.0 + 10.0 * top.cbrt()).ceil() as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let mut table = vec![0.0; nmax + 1];
    let mut above = 0.0; // j_{k+1}
    let mut current = 1e-30; // j_k
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        if k <= nmax {
            table[k] = current;
        }
        if k % 2 == 0 {
            norm += 2.0 * current;
        }
        let below = (2.0 * k as f64 / x) * current - above;
        above = current;
        current = below;
        if current.abs() > RESCALE_ABOVE {
            let s = 1.0 / RESCALE_ABOVE;
            current *= s;
            above *= s;
            norm *= s;
            for v in table.iter_mut() {
                *v *= s;
            }
        }
    }
    table[0] = current;
    norm += current;
    for v in table.iter_mut() {
        *v /= norm;
    }
    table
}

/// The `k`-th positive zero of `J0`, `1 <= k <= 50`.
///
/// The root is bracketed in `((k-1)π + 2, kπ + 2)`, narrowed by bisection
/// and polished with Newton steps using `J0' = -J1`.
pub fn j0_zero(k: u32) -> Result<f64> {
    if k == 0 || k > MAX_ZERO_INDEX {
        return Err(Error::Range {
            what: "J0 zero index",
            value: k as f64,
            range: "1 <= k <= 50",
        });
    }
    let j0 = |x: f64| bessel_j_table(0, x)[0];
    let mut lo = (k - 1) as f64 * PI + 2.0;
    let mut hi = k as f64 * PI + 2.0;
    let mut f_lo = j0(lo);
    debug_assert!(f_lo * j0(hi) < 0.0, "J0 zero not bracketed for k = {k}");
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        let f_mid = j0(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..8 {
        let t = bessel_j_table(1, x);
        let step = t[0] / t[1];
        let next = x + step;
        if !(lo..=hi).contains(&next) {
            break;
        }
        x = next;
        if step.abs() <= 1e-16 * x {
            break;
        }
    }
    Ok(x)
}

/// Tail weight `Σ_{|l|>n} J_l(m)^2` for every `n` in `0..=table.len()-1`.
fn tail_weights(table: &[f64]) -> Vec<f64> {
    let mut tails = vec![0.0; table.len()];
    let mut acc = 0.0;
    for n in (0..table.len()).rev() {
        tails[n] = acc;
        acc += 2.0 * table[n] * table[n];
    }
    tails
}

fn sideband_table_len(m: f64) -> usize {
    (m + 30.0 + 12.0 * (m + 1.0).cbrt()).ceil() as usize
}

/// Smallest `N` with `Σ_{|l|>N} J_l(m)^2 < tol^2`.
///
/// Because the Bessel weights decay super-exponentially once `l > m`, the
/// truncated Jacobi–Anger sum then approximates `exp(-i m sin νt)` in sup
/// norm to roughly `tol`.
pub fn jacobi_anger_order(m: f64, tol: f64) -> Result<usize> {
    if !m.is_finite() || m < 0.0 {
        return Err(Error::Precondition(format!(
            "modulation index must be finite and >= 0, got {m}"
        )));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Precondition(format!(
            "truncation tolerance must lie in (0, 1), got {tol}"
        )));
    }
    if m == 0.0 {
        return Ok(0);
    }
    let table = bessel_j_table(sideband_table_len(m), m);
    let tails = tail_weights(&table);
    let target = tol * tol;
    Ok(tails
        .iter()
        .position(|&t| t < target)
        .unwrap_or(tails.len() - 1))
}

/// The sideband weights `J_l(m)` for `-N <= l <= N` of a Jacobi–Anger
/// expansion `exp(-i m sin θ) = Σ_l J_l(m) exp(-i l θ)` truncated at the
/// order chosen by [`jacobi_anger_order`].
#[derive(Debug, Clone, PartialEq)]
pub struct Sidebands {
    order: usize,
    weights: Vec<f64>,
}

impl Sidebands {
    pub fn new(m: f64, tol: f64) -> Result<Self> {
        let order = jacobi_anger_order(m, tol)?;
        Ok(Self::with_order(m, order))
    }

    /// Sidebands truncated at an explicit order.
    pub fn with_order(m: f64, order: usize) -> Self {
        let table = bessel_j_table(order, m);
        let mut weights = Vec::with_capacity(2 * order + 1);
        for l in (1..=order).rev() {
            let sign = if l % 2 == 1 { -1.0 } else { 1.0 };
            weights.push(sign * table[l]);
        }
        weights.extend_from_slice(&table);
        Self { order, weights }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `J_l(m)`, zero outside the truncation.
    pub fn weight(&self, l: i64) -> f64 {
        let n = self.order as i64;
        if l.abs() > n {
            0.0
        } else {
            self.weights[(l + n) as usize]
        }
    }

    /// `(l, J_l(m))` for `l = -N..=N`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let n = self.order as i64;
        self.weights.iter().enumerate().map(move |(i, &w)| (i as i64 - n, w))
    }

    /// `Σ_{|l|<=N} J_l(m)^2`, which tends to one.
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }
}
