//! Heating of a trapped ion out of its motional ground state by a coloured
//! Gaussian field, with the field coupling phase modulated.
//!
//! The drive enters through
//!
//! ```text
//! v(t) = i ∫_0^t w(t') exp(i ω0 t' - i Φ(t')) dt',   <w(t) w(t')> = (Ω²/2) e^{-κ|t-t'|}
//! ```
//!
//! and the ground-state fidelity is `F = [1 + 2<|v|²> + <|v|²>² - |<v²>|²]^{-1/2}`.
//! Moments are available in closed form (Bessel double sums over the integral
//! [`integral_i`]) and by Monte Carlo over Ornstein–Uhlenbeck paths.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::TimeGrid;
use crate::specfun::{ModulationParams, Sidebands};

/// Default Bessel-sum truncation tolerance.
pub const DEFAULT_TRUNC_TOL: f64 = 1e-12;
/// Largest accepted truncation tolerance.
pub const MAX_TRUNC_TOL: f64 = 1e-4;
/// Below `|ω_α + ω_β| · max(t, 1/κ)` this, [`integral_i`] uses the limit form.
pub const LIMIT_THRESHOLD: f64 = 1e-6;
/// Smallest number of Monte Carlo trajectories accepted.
pub const MIN_TRAJECTORIES: usize = 100;

const MC_BATCH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatingParams {
    /// Trap frequency `ω0`.
    pub omega0: f64,
    /// Decay rate of the field correlations.
    pub kappa: f64,
    /// Field strength `Ω`.
    pub omega_field: f64,
    pub modulation: ModulationParams,
    pub trunc_tol: f64,
}

impl HeatingParams {
    pub fn new(omega0: f64, kappa: f64, omega_field: f64, modulation: ModulationParams) -> Result<Self> {
        Self {
            omega0,
            kappa,
            omega_field,
            modulation,
            trunc_tol: DEFAULT_TRUNC_TOL,
        }
        .validated()
    }

    pub fn with_trunc_tol(mut self, tol: f64) -> Result<Self> {
        self.trunc_tol = tol;
        self.validated()
    }

    fn validated(self) -> Result<Self> {
        if !(self.omega0 > 0.0 && self.omega0.is_finite()) {
            return Err(Error::Precondition(format!("omega0 must be > 0, got {}", self.omega0)));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::Precondition(format!("kappa must be > 0, got {}", self.kappa)));
        }
        if !(self.omega_field >= 0.0 && self.omega_field.is_finite()) {
            return Err(Error::Precondition(format!(
                "field strength must be >= 0, got {}",
                self.omega_field
            )));
        }
        if !(self.trunc_tol > 0.0 && self.trunc_tol <= MAX_TRUNC_TOL) {
            return Err(Error::Precondition(format!(
                "trunc_tol must lie in (0, {MAX_TRUNC_TOL}], got {}",
                self.trunc_tol
            )));
        }
        Ok(self)
    }

    /// Same field and trap without modulation.
    pub fn unmodulated(&self) -> Self {
        Self {
            modulation: ModulationParams::none(),
            ..*self
        }
    }

    /// Fastest angular frequency in `v(t)`'s integrand, `ω0 + (m + 2) ν`.
    pub fn omega_fast(&self) -> f64 {
        self.omega0 + (self.modulation.m + 2.0) * self.modulation.nu
    }

    /// Variance `Ω²/2` of the stationary field.
    pub fn field_variance(&self) -> f64 {
        0.5 * self.omega_field * self.omega_field
    }
}

/// `<|v|²>` and `<v²>`, with standard errors for sampled estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatingMoments {
    pub mean_abs_v2: f64,
    pub mean_v2: Complex64,
    pub stderr_abs: f64,
    pub stderr_v2: f64,
}

impl HeatingMoments {
    pub fn zero() -> Self {
        Self {
            mean_abs_v2: 0.0,
            mean_v2: Complex64::new(0.0, 0.0),
            stderr_abs: 0.0,
            stderr_v2: 0.0,
        }
    }

    fn check(&self) -> Result<()> {
        let bound = self.mean_abs_v2 * (1.0 + 1e-10) + 3.0 * (self.stderr_abs + self.stderr_v2) + 1e-300;
        if !(self.mean_abs_v2 >= 0.0) || !(self.mean_v2.norm() <= bound) {
            return Err(Error::Invariant(format!(
                "moments violate |<v²>| <= <|v|²>: <|v|²> = {}, |<v²>| = {}",
                self.mean_abs_v2,
                self.mean_v2.norm()
            )));
        }
        Ok(())
    }
}

/// `ψ(z, t) = (e^{zt} - 1)/z - t`, accurate for small `zt`.
fn psi(z: Complex64, t: f64) -> Complex64 {
    let zt = z * t;
    if zt.norm() < 0.5 {
        // z t² Σ (zt)^k/(k+2)!
        let mut term = Complex64::new(0.5, 0.0);
        let mut sum = term;
        for k in 1..40 {
            term *= zt / (k as f64 + 2.0);
            sum += term;
            if term.norm() < 1e-17 * sum.norm() {
                break;
            }
        }
        z * t * t * sum
    } else {
        (zt.exp() - 1.0) / z - t
    }
}

/// `dψ/dz`.
fn psi_prime(z: Complex64, t: f64) -> Complex64 {
    let zt = z * t;
    if zt.norm() < 0.5 {
        // t² Σ (k+1)(zt)^k/(k+2)!
        let mut power = Complex64::new(0.5, 0.0);
        let mut sum = power;
        for k in 1..40 {
            power *= zt / (k as f64 + 2.0);
            let term = power * (k as f64 + 1.0);
            sum += term;
            if term.norm() < 1e-17 * sum.norm() {
                break;
            }
        }
        t * t * sum
    } else {
        (t * zt.exp() - (zt.exp() - 1.0) / z) / z
    }
}

/// The double integral
///
/// ```text
/// I(ω_α, ω_β) = ∫_0^t ∫_0^t exp(i ω_α t1 + i ω_β t2 - κ|t1 - t2|) dt1 dt2
/// ```
///
/// in closed form. The closed form is
///
/// ```text
/// (i ω_α + i ω_β)^{-1} [(κ + i ω_β)^{-1} e^{i(ω_α+ω_β)t} - (κ - i ω_α)^{-1}]
///   + (i ω_α - κ)^{-1} (-i ω_β - κ)^{-1} e^{i ω_α t - κ t}  + (α ⇔ β)
/// ```
///
/// evaluated after subtracting the parts linear in `t`, which cancel exactly
/// and would otherwise lose precision for short times. Near `ω_α + ω_β = 0`
/// the limit `I(ω, -ω) = t/(κ - iω) + (e^{iωt-κt} - 1)/(iω - κ)² + c.c.` plus
/// its first-order correction is used.
pub fn integral_i(omega_alpha: f64, omega_beta: f64, kappa: f64, t: f64) -> Complex64 {
    assert!(kappa > 0.0, "kappa must be > 0");
    assert!(t >= 0.0, "t must be >= 0");
    if t == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let s = omega_alpha + omega_beta;
    if s.abs() * t.max(1.0 / kappa) < LIMIT_THRESHOLD {
        return integral_i_near_limit(omega_alpha, s, kappa, t);
    }
    let i = Complex64::i();
    let (a, b) = (omega_alpha, omega_beta);
    let ka = Complex64::new(kappa, a);
    let kb = Complex64::new(kappa, b);
    let za = Complex64::new(-kappa, a);
    let zb = Complex64::new(-kappa, b);
    (1.0 / kb + 1.0 / ka) * psi(i * s, t) - psi(za, t) / kb - psi(zb, t) / ka
}

/// `I(a, -a + s)` to first order in `s`.
fn integral_i_near_limit(a: f64, s: f64, kappa: f64, t: f64) -> Complex64 {
    let i = Complex64::i();
    let z = Complex64::new(-kappa, a);
    let base = psi(z, t) / z;
    let limit = base + base.conj();
    let minus = Complex64::new(kappa, -a);
    let plus = Complex64::new(kappa, a);
    let slope = i * 0.5 * t * t * (1.0 / minus + 1.0 / plus) + i * psi(z, t) / (minus * minus)
        - i * psi_prime(Complex64::new(-kappa, -a), t) / plus;
    limit + s * slope
}

/// Sideband frequencies `ω0 ± nν` of the modulated field, paired with `J_n`.
fn carrier_bands(params: &HeatingParams) -> Result<Vec<(f64, f64)>> {
    let modulation = &params.modulation;
    let bands = Sidebands::new(modulation.m, params.trunc_tol)?;
    let sign = modulation.sign.factor();
    Ok(bands
        .iter()
        .map(|(n, j)| (params.omega0 + sign * n as f64 * modulation.nu, j))
        .collect())
}

/// Closed-form moments at time `t`.
pub fn heating_moments_analytic(params: &HeatingParams, t: f64) -> Result<HeatingMoments> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Precondition(format!("t must be >= 0, got {t}")));
    }
    if t == 0.0 || params.omega_field == 0.0 {
        return Ok(HeatingMoments::zero());
    }
    let bands = carrier_bands(params)?;
    let kappa = params.kappa;
    let mut abs_sum = Complex64::new(0.0, 0.0);
    let mut abs_scale = 0.0;
    let mut sq_sum = Complex64::new(0.0, 0.0);
    for &(wa, ja) in &bands {
        for &(wb, jb) in &bands {
            let w = ja * jb;
            let term = w * integral_i(wa, -wb, kappa, t);
            abs_sum += term;
            abs_scale += term.norm();
            sq_sum += w * integral_i(wa, wb, kappa, t);
        }
    }
    let var = params.field_variance();
    if abs_sum.im.abs() > 1e-12 * abs_scale.max(abs_sum.re.abs()) {
        return Err(Error::Invariant(format!(
            "<|v|²> has imaginary residue {:e} against {:e}",
            abs_sum.im, abs_sum.re
        )));
    }
    let moments = HeatingMoments {
        mean_abs_v2: var * abs_sum.re,
        mean_v2: -var * sq_sum,
        stderr_abs: 0.0,
        stderr_v2: 0.0,
    };
    moments.check()?;
    Ok(moments)
}

/// Ground-state fidelity from the moments.
pub fn fidelity(moments: &HeatingMoments) -> Result<f64> {
    moments.check()?;
    let a = moments.mean_abs_v2;
    let radicand = 1.0 + 2.0 * a + a * a - moments.mean_v2.norm_sqr();
    if !(radicand >= 1.0 - 1e-9) {
        return Err(Error::Invariant(format!(
            "fidelity radicand {radicand} is below 1"
        )));
    }
    Ok(radicand.max(1.0).powf(-0.5))
}

/// One-σ half-width of the fidelity propagated from the moment errors.
pub fn fidelity_sigma(moments: &HeatingMoments) -> f64 {
    let a = moments.mean_abs_v2;
    let b = moments.mean_v2.norm();
    let radicand = (1.0 + 2.0 * a + a * a - b * b).max(1.0);
    let scale = radicand.powf(-1.5);
    let d_a = scale * (1.0 + a);
    let d_b = scale * b;
    ((d_a * moments.stderr_abs).powi(2) + (d_b * moments.stderr_v2).powi(2)).sqrt()
}

/// Exact discretisation of a stationary Ornstein–Uhlenbeck process with
/// autocorrelation `variance · e^{-κ|τ|}` on steps of `dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuSampler {
    decay: f64,
    kick: f64,
    sd: f64,
}

impl OuSampler {
    pub fn new(kappa: f64, variance: f64, dt: f64) -> Self {
        let decay = (-kappa * dt).exp();
        Self {
            decay,
            kick: (variance * -(-2.0 * kappa * dt).exp_m1()).sqrt(),
            sd: variance.sqrt(),
        }
    }

    /// A draw from the stationary distribution.
    pub fn initial<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let xi: f64 = rng.sample(StandardNormal);
        self.sd * xi
    }

    pub fn step<R: Rng + ?Sized>(&self, w: f64, rng: &mut R) -> f64 {
        let xi: f64 = rng.sample(StandardNormal);
        w * self.decay + self.kick * xi
    }
}

/// Random stream of trajectory `index` under `seed`. Streams of different
/// indices are independent, so results do not depend on scheduling.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Clone)]
struct Accumulator {
    abs: Vec<f64>,
    abs_sq: Vec<f64>,
    sq: Vec<Complex64>,
}

impl Accumulator {
    fn new(n: usize) -> Self {
        Self {
            abs: vec![0.0; n],
            abs_sq: vec![0.0; n],
            sq: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    fn add(&mut self, other: &Accumulator) {
        for k in 0..self.abs.len() {
            self.abs[k] += other.abs[k];
            self.abs_sq[k] += other.abs_sq[k];
            self.sq[k] += other.sq[k];
        }
    }
}

/// Sample one path of `v` on the grid, writing into `v`.
fn sample_v(
    grid: &TimeGrid,
    sampler: &OuSampler,
    phases: &[Complex64],
    rng: &mut ChaCha8Rng,
    v: &mut [Complex64],
) {
    let half_dt = 0.5 * grid.dt();
    let mut w = sampler.initial(rng);
    let mut prev = phases[0] * w;
    let mut integral = Complex64::new(0.0, 0.0);
    v[0] = integral;
    for k in 1..phases.len() {
        w = sampler.step(w, rng);
        let next = phases[k] * w;
        integral += half_dt * (prev + next);
        prev = next;
        v[k] = Complex64::i() * integral;
    }
}

/// Monte Carlo moments at every grid time from `n_traj` independent field
/// paths. Deterministic for a given `seed` regardless of thread count.
pub fn heating_moments_mc(
    params: &HeatingParams,
    grid: &TimeGrid,
    n_traj: usize,
    seed: u64,
) -> Result<Vec<HeatingMoments>> {
    if n_traj < MIN_TRAJECTORIES {
        return Err(Error::Precondition(format!(
            "need at least {MIN_TRAJECTORIES} trajectories, got {n_traj}"
        )));
    }
    grid.check_resolves(params.omega_fast().max(params.kappa))?;
    let n = grid.n_steps() + 1;
    let modulation = params.modulation;
    let phases: Vec<Complex64> = grid
        .times()
        .map(|t| Complex64::from_polar(1.0, params.omega0 * t + modulation.signed_phase(t)))
        .collect();
    let sampler = OuSampler::new(params.kappa, params.field_variance(), grid.dt());

    let n_batches = n_traj.div_ceil(MC_BATCH);
    let batches: Vec<Result<Accumulator>> = (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let mut acc = Accumulator::new(n);
            let mut v = vec![Complex64::new(0.0, 0.0); n];
            for index in b * MC_BATCH..((b + 1) * MC_BATCH).min(n_traj) {
                let mut rng = trajectory_rng(seed, index as u64);
                sample_v(grid, &sampler, &phases, &mut rng, &mut v);
                for (k, vk) in v.iter().enumerate() {
                    let abs = vk.norm_sqr();
                    if !abs.is_finite() {
                        return Err(Error::Numeric {
                            time: grid.time(k),
                            message: format!("non-finite sample in trajectory {index}"),
                        });
                    }
                    acc.abs[k] += abs;
                    acc.abs_sq[k] += abs * abs;
                    acc.sq[k] += vk * vk;
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = Accumulator::new(n);
    for batch in batches {
        total.add(&batch?);
    }

    let count = n_traj as f64;
    Ok((0..n)
        .map(|k| {
            let mean_abs = total.abs[k] / count;
            let mean_sq = total.sq[k] / count;
            let second = total.abs_sq[k] / count;
            let var_abs = (second - mean_abs * mean_abs).max(0.0) * count / (count - 1.0);
            let var_sq = (second - mean_sq.norm_sqr()).max(0.0) * count / (count - 1.0);
            HeatingMoments {
                mean_abs_v2: mean_abs,
                mean_v2: mean_sq,
                stderr_abs: (var_abs / count).sqrt(),
                stderr_v2: (var_sq / count).sqrt(),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FidelityMethod {
    Analytic,
    MonteCarlo { n_traj: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityCurve {
    pub times: Vec<f64>,
    pub fidelity: Vec<f64>,
    /// `(F - σ, F + σ)` per time, Monte Carlo only.
    pub band: Option<Vec<(f64, f64)>>,
}

/// Fidelity at every grid time.
pub fn fidelity_curve(
    params: &HeatingParams,
    grid: &TimeGrid,
    method: FidelityMethod,
) -> Result<FidelityCurve> {
    let times: Vec<f64> = grid.times().collect();
    match method {
        FidelityMethod::Analytic => {
            let fidelity = times
                .par_iter()
                .map(|&t| fidelity(&heating_moments_analytic(params, t)?))
                .collect::<Result<Vec<_>>>()?;
            Ok(FidelityCurve {
                times,
                fidelity,
                band: None,
            })
        }
        FidelityMethod::MonteCarlo { n_traj, seed } => {
            let moments = heating_moments_mc(params, grid, n_traj, seed)?;
            let mut fid = Vec::with_capacity(moments.len());
            let mut band = Vec::with_capacity(moments.len());
            for m in &moments {
                let f = fidelity(m)?;
                let sigma = fidelity_sigma(m);
                fid.push(f);
                band.push(((f - sigma).max(0.0), (f + sigma).min(1.0)));
            }
            Ok(FidelityCurve {
                times,
                fidelity: fid,
                band: Some(band),
            })
        }
    }
}
