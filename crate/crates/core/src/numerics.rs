//! Fixed-step integration of linear ODE systems `dx/dt = A(t) x` with complex
//! coefficients, plus the decay-rate fit and period averaging used to reduce
//! simulated populations to rates.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Minimum number of steps per period of the fastest resolved frequency.
pub const MIN_POINTS_PER_PERIOD: f64 = 20.0;

/// Uniform time grid `t_k = k dt`, `k = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_max: f64,
    dt: f64,
    n_steps: usize,
}

impl TimeGrid {
    /// Grid with step `dt` up to `t_max`, checked against the fastest angular
    /// frequency the caller needs resolved: `dt <= (2π/omega_fast)/20`.
    pub fn new(t_max: f64, dt: f64, omega_fast: f64) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::Precondition(format!("t_max must be > 0, got {t_max}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Precondition(format!("dt must be > 0, got {dt}")));
        }
        let n_steps = (t_max / dt).round() as usize;
        if n_steps < 2 {
            return Err(Error::Resolution(format!(
                "grid with t_max = {t_max}, dt = {dt} has fewer than 2 steps"
            )));
        }
        let grid = Self { t_max, dt, n_steps };
        grid.check_resolves(omega_fast)?;
        Ok(grid)
    }

    /// The coarsest grid of equal steps ending exactly at `t_max` that still
    /// places `points_per_period` (at least 20) steps in one period of
    /// `omega_fast`.
    pub fn resolving(t_max: f64, omega_fast: f64, points_per_period: f64) -> Result<Self> {
        let ppp = points_per_period.max(MIN_POINTS_PER_PERIOD);
        let dt_max = if omega_fast > 0.0 {
            2.0 * PI / (omega_fast * ppp)
        } else {
            t_max / 2.0
        };
        let n = ((t_max / dt_max).ceil() as usize).max(2);
        Self::new(t_max, t_max / n as f64, omega_fast)
    }

    /// Fails unless `dt <= (2π/omega_fast)/20`.
    pub fn check_resolves(&self, omega_fast: f64) -> Result<()> {
        if !omega_fast.is_finite() || omega_fast < 0.0 {
            return Err(Error::Precondition(format!(
                "fastest frequency must be finite and >= 0, got {omega_fast}"
            )));
        }
        if omega_fast == 0.0 {
            return Ok(());
        }
        let limit = 2.0 * PI / omega_fast / MIN_POINTS_PER_PERIOD;
        if self.dt > limit * (1.0 + 1e-12) {
            return Err(Error::Resolution(format!(
                "dt = {} exceeds {limit:.6e} needed to resolve angular frequency {omega_fast}",
                self.dt
            )));
        }
        Ok(())
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_steps).map(move |k| self.time(k))
    }
}

/// Sampled solution of a linear system.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<Complex64>>,
}

impl ComplexTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &DVector<Complex64>)> {
        self.times.last().copied().zip(self.states.last())
    }
}

/// One-step scheme used by [`integrate_linear_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Two-stage Gauss–Legendre collocation (implicit, order 4). Preserves
    /// the norm exactly when `A(t)` is anti-Hermitian.
    #[default]
    GaussLegendre4,
    /// The explicit classic Runge–Kutta method (order 4).
    ClassicRk4,
}

/// Integrates `dx/dt = A(t) x` with a fourth-order one-step scheme
/// ([`Scheme::GaussLegendre4`]), recording every step including `t = 0`.
///
/// `generator(t, a)` must overwrite `a` with `A(t)`.
pub fn integrate_linear<F>(
    generator: F,
    initial: &DVector<Complex64>,
    grid: &TimeGrid,
) -> Result<ComplexTrajectory>
where
    F: FnMut(f64, &mut DMatrix<Complex64>),
{
    integrate_linear_with(Scheme::default(), generator, initial, grid, 1)
}

/// Like [`integrate_linear`] but records only every `stride`-th step (and
/// always the first and last states).
pub fn integrate_linear_strided<F>(
    generator: F,
    initial: &DVector<Complex64>,
    grid: &TimeGrid,
    stride: usize,
) -> Result<ComplexTrajectory>
where
    F: FnMut(f64, &mut DMatrix<Complex64>),
{
    integrate_linear_with(Scheme::default(), generator, initial, grid, stride)
}

/// Integration with an explicit choice of [`Scheme`].
pub fn integrate_linear_with<F>(
    scheme: Scheme,
    mut generator: F,
    initial: &DVector<Complex64>,
    grid: &TimeGrid,
    stride: usize,
) -> Result<ComplexTrajectory>
where
    F: FnMut(f64, &mut DMatrix<Complex64>),
{
    let stride = stride.max(1);
    let dim = initial.len();
    let mut eval = |t: f64, a: &mut DMatrix<Complex64>| -> Result<()> {
        generator(t, a);
        if a.nrows() != dim || a.ncols() != dim {
            return Err(Error::Precondition(format!(
                "generator is {}x{} but the state has dimension {dim}",
                a.nrows(),
                a.ncols()
            )));
        }
        if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numeric {
                time: t,
                message: "non-finite generator entry".into(),
            });
        }
        Ok(())
    };
    let mut stepper: Box<dyn Stepper> = match scheme {
        Scheme::GaussLegendre4 => Box::new(GaussLegendre::new(dim)),
        Scheme::ClassicRk4 => Box::new(ClassicRk4::new(dim)),
    };

    let mut x = initial.clone();
    let capacity = grid.n_steps() / stride + 2;
    let mut times = Vec::with_capacity(capacity);
    let mut states = Vec::with_capacity(capacity);
    times.push(0.0);
    states.push(x.clone());

    for step in 0..grid.n_steps() {
        stepper.step(&mut eval, grid.time(step), grid.dt(), &mut x)?;
        let done = step + 1;
        if done % stride == 0 || done == grid.n_steps() {
            if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Numeric {
                    time: grid.time(done),
                    message: "state became non-finite".into(),
                });
            }
            times.push(grid.time(done));
            states.push(x.clone());
        }
    }
    Ok(ComplexTrajectory { times, states })
}

type Eval<'a> = dyn FnMut(f64, &mut DMatrix<Complex64>) -> Result<()> + 'a;

trait Stepper {
    fn step(&mut self, eval: &mut Eval<'_>, t: f64, h: f64, x: &mut DVector<Complex64>)
        -> Result<()>;
}

struct ClassicRk4 {
    a_start: DMatrix<Complex64>,
    a_mid: DMatrix<Complex64>,
    a_end: DMatrix<Complex64>,
    k: [DVector<Complex64>; 4],
    tmp: DVector<Complex64>,
}

impl ClassicRk4 {
    fn new(dim: usize) -> Self {
        Self {
            a_start: DMatrix::zeros(dim, dim),
            a_mid: DMatrix::zeros(dim, dim),
            a_end: DMatrix::zeros(dim, dim),
            k: std::array::from_fn(|_| DVector::zeros(dim)),
            tmp: DVector::zeros(dim),
        }
    }
}

impl Stepper for ClassicRk4 {
    fn step(
        &mut self,
        eval: &mut Eval<'_>,
        t: f64,
        h: f64,
        x: &mut DVector<Complex64>,
    ) -> Result<()> {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let half = Complex64::new(0.5 * h, 0.0);
        eval(t, &mut self.a_start)?;
        eval(t + 0.5 * h, &mut self.a_mid)?;
        eval(t + h, &mut self.a_end)?;
        let [k1, k2, k3, k4] = &mut self.k;
        let tmp = &mut self.tmp;
        k1.gemv(one, &self.a_start, x, zero);
        tmp.copy_from(x);
        tmp.axpy(half, k1, one);
        k2.gemv(one, &self.a_mid, tmp, zero);
        tmp.copy_from(x);
        tmp.axpy(half, k2, one);
        k3.gemv(one, &self.a_mid, tmp, zero);
        tmp.copy_from(x);
        tmp.axpy(Complex64::new(h, 0.0), k3, one);
        k4.gemv(one, &self.a_end, tmp, zero);
        let w = Complex64::new(h / 6.0, 0.0);
        x.axpy(w, k1, one);
        x.axpy(w * 2.0, k2, one);
        x.axpy(w * 2.0, k3, one);
        x.axpy(w, k4, one);
        Ok(())
    }
}

/// Two-stage Gauss–Legendre collocation. For a linear system the stage
/// equations form one `2d x 2d` linear system per step:
///
/// ```text
/// [I - h a11 A1   -h a12 A1 ] [K1]   [A1 x]
/// [ -h a21 A2   I - h a22 A2] [K2] = [A2 x]
/// ```
///
/// with `A_i = A(t + c_i h)` and `x_next = x + h (K1 + K2)/2`.
struct GaussLegendre {
    dim: usize,
    a1: DMatrix<Complex64>,
    a2: DMatrix<Complex64>,
    system: Vec<Complex64>,
    rhs: Vec<Complex64>,
}

const SQRT3_6: f64 = 0.288_675_134_594_812_9; // √3/6

impl GaussLegendre {
    fn new(dim: usize) -> Self {
        Self {
            dim,
            a1: DMatrix::zeros(dim, dim),
            a2: DMatrix::zeros(dim, dim),
            system: vec![Complex64::new(0.0, 0.0); 4 * dim * dim],
            rhs: vec![Complex64::new(0.0, 0.0); 2 * dim],
        }
    }
}

impl Stepper for GaussLegendre {
    fn step(
        &mut self,
        eval: &mut Eval<'_>,
        t: f64,
        h: f64,
        x: &mut DVector<Complex64>,
    ) -> Result<()> {
        let d = self.dim;
        let n = 2 * d;
        eval(t + (0.5 - SQRT3_6) * h, &mut self.a1)?;
        eval(t + (0.5 + SQRT3_6) * h, &mut self.a2)?;
        let coef = [[0.25, 0.25 - SQRT3_6], [0.25 + SQRT3_6, 0.25]];
        for (bi, a) in [&self.a1, &self.a2].into_iter().enumerate() {
            for i in 0..d {
                let row = bi * d + i;
                let mut ax = Complex64::new(0.0, 0.0);
                for j in 0..d {
                    ax += a[(i, j)] * x[j];
                    for (bj, c) in coef[bi].iter().enumerate() {
                        let col = bj * d + j;
                        let mut v = -a[(i, j)] * (h * c);
                        if row == col {
                            v += 1.0;
                        }
                        self.system[row * n + col] = v;
                    }
                }
                self.rhs[row] = ax;
            }
        }
        solve_in_place(&mut self.system, &mut self.rhs, n).ok_or_else(|| Error::Numeric {
            time: t,
            message: "singular collocation system".into(),
        })?;
        for i in 0..d {
            x[i] += (self.rhs[i] + self.rhs[d + i]) * (0.5 * h);
        }
        Ok(())
    }
}

/// Gaussian elimination with partial pivoting on a row-major `n x n`
/// matrix; the solution overwrites `rhs`.
fn solve_in_place(a: &mut [Complex64], rhs: &mut [Complex64], n: usize) -> Option<()> {
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].norm_sqr().total_cmp(&a[j * n + col].norm_sqr()))?;
        if a[pivot * n + col].norm_sqr() == 0.0 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            rhs.swap(pivot, col);
        }
        let inv = 1.0 / a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] * inv;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in col..n {
                let v = a[col * n + k];
                a[row * n + k] -= f * v;
            }
            let r = rhs[col];
            rhs[row] -= f * r;
        }
    }
    for row in (0..n).rev() {
        let mut s = rhs[row];
        for k in row + 1..n {
            s -= a[row * n + k] * rhs[k];
        }
        rhs[row] = s / a[row * n + row];
    }
    Some(())
}

/// Result of a log-linear decay fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    /// `-slope` of `ln y` versus `t`.
    pub rate: f64,
    /// RMS residual of the fit in `ln y`.
    pub residual: f64,
    /// Number of points inside the window.
    pub points: usize,
}

/// Least-squares fit of `ln y = c - rate t` over the samples with `t` in
/// `[t_lo, t_hi]`.
pub fn fit_decay_rate(series: &[(f64, f64)], window: (f64, f64)) -> Result<RateFit> {
    let (lo, hi) = window;
    let pts: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|&(t, _)| t >= lo && t <= hi)
        .collect();
    if pts.len() < 10 {
        return Err(Error::Fit(format!(
            "window [{lo}, {hi}] holds {} points, need at least 10",
            pts.len()
        )));
    }
    if let Some(&(t, y)) = pts.iter().find(|&&(_, y)| !(y > 0.0) || !y.is_finite()) {
        return Err(Error::Fit(format!("nonpositive sample y = {y} at t = {t}")));
    }
    let n = pts.len() as f64;
    let t_mean = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let l_mean = pts.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut stt, mut stl) = (0.0, 0.0);
    for &(t, y) in &pts {
        let dt = t - t_mean;
        stt += dt * dt;
        stl += dt * (y.ln() - l_mean);
    }
    if stt == 0.0 {
        return Err(Error::Fit("all samples share the same time".into()));
    }
    let slope = stl / stt;
    let intercept = l_mean - slope * t_mean;
    let ss: f64 = pts
        .iter()
        .map(|&(t, y)| {
            let r = y.ln() - (intercept + slope * t);
            r * r
        })
        .sum();
    Ok(RateFit {
        rate: -slope,
        residual: (ss / n).sqrt(),
        points: pts.len(),
    })
}

/// Non-overlapping boxcar average over consecutive windows of one `period`.
///
/// The series must be uniformly sampled; each window holds
/// `round(period/dt)` samples and is reported at its midpoint. A trailing
/// partial window is dropped.
pub fn period_average(series: &[(f64, f64)], period: f64) -> Result<Vec<(f64, f64)>> {
    if series.len() < 2 {
        return Err(Error::Precondition("series needs at least two samples".into()));
    }
    if !(period > 0.0) {
        return Err(Error::Precondition(format!("period must be > 0, got {period}")));
    }
    let dt = series[1].0 - series[0].0;
    let span = series[series.len() - 1].0 - series[0].0;
    if period < 4.0 * dt {
        return Err(Error::Resolution(format!(
            "period {period} is shorter than four samples (dt = {dt})"
        )));
    }
    if period > span {
        return Err(Error::Precondition(format!(
            "period {period} exceeds the series span {span}"
        )));
    }
    let width = (period / dt).round() as usize;
    Ok(series
        .chunks_exact(width)
        .map(|w| {
            let t_mid = 0.5 * (w[0].0 + w[width - 1].0);
            let mean = w.iter().map(|p| p.1).sum::<f64>() / width as f64;
            (t_mid, mean)
        })
        .collect())
}
