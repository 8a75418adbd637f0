//! A level `|a>` coupled with strength `g` to a level `|b>` that decays at
//! rate `2κ`, with the coupling phase modulated as `g exp(-i m sin νt)`:
//!
//! ```text
//! dC_a/dt = -i g e^{-iΦ(t)} C_b
//! dC_b/dt = -κ C_b - i g e^{+iΦ(t)} C_a
//! ```
//!
//! The module integrates these amplitude equations exactly (up to
//! integrator error) and separately provides the time-averaged rate theory, so the two
//! can be compared rather than substituted for one another.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{self, RateFit, TimeGrid};
use crate::specfun::{self, ModulationParams, Sidebands};

/// Truncation tolerance of the sideband sum in [`effective_rate_sum`].
pub const RATE_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelParams {
    /// Real coupling strength `g > 0`.
    pub g: f64,
    /// Half-width `κ >= 0` of the decaying level.
    pub kappa: f64,
    pub modulation: ModulationParams,
}

impl TwoLevelParams {
    pub fn new(g: f64, kappa: f64, modulation: ModulationParams) -> Result<Self> {
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::Precondition(format!("g must be > 0, got {g}")));
        }
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(Error::Precondition(format!("kappa must be >= 0, got {kappa}")));
        }
        Ok(Self {
            g,
            kappa,
            modulation,
        })
    }

    /// Fastest angular frequency the integration grid has to resolve,
    /// `(m + 2) ν + κ + 4 g`.
    pub fn omega_fast(&self) -> f64 {
        (self.modulation.m + 2.0) * self.modulation.nu + self.kappa + 4.0 * self.g
    }

    pub fn unmodulated(&self) -> Self {
        Self {
            modulation: ModulationParams::none(),
            ..*self
        }
    }
}

/// Probability amplitudes of `|a>` and `|b>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudePair {
    pub c_a: Complex64,
    pub c_b: Complex64,
}

impl AmplitudePair {
    pub fn excited() -> Self {
        Self {
            c_a: Complex64::new(1.0, 0.0),
            c_b: Complex64::new(0.0, 0.0),
        }
    }

    pub fn population_a(&self) -> f64 {
        self.c_a.norm_sqr()
    }

    pub fn total_population(&self) -> f64 {
        self.c_a.norm_sqr() + self.c_b.norm_sqr()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<AmplitudePair>,
}

impl AmplitudeTrajectory {
    /// `(t, |C_a(t)|^2)` samples.
    pub fn populations(&self) -> Vec<(f64, f64)> {
        self.times
            .iter()
            .zip(&self.states)
            .map(|(&t, s)| (t, s.population_a()))
            .collect()
    }
}

/// Integrates the modulated amplitude equations from `(C_a, C_b) = (1, 0)`,
/// recording every grid step.
pub fn evolve(params: &TwoLevelParams, grid: &TimeGrid) -> Result<AmplitudeTrajectory> {
    evolve_strided(params, grid, 1)
}

/// Same as [`evolve`], recording every `stride`-th step.
pub fn evolve_strided(
    params: &TwoLevelParams,
    grid: &TimeGrid,
    stride: usize,
) -> Result<AmplitudeTrajectory> {
    grid.check_resolves(params.omega_fast())?;
    let g = params.g;
    let kappa = params.kappa;
    let modulation = params.modulation;
    let initial = DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
    let traj = numerics::integrate_linear_strided(
        |t, a| {
            // the coupling carries exp(∓iΦ) on the |a><b| element
            let coupling = Complex64::from_polar(g, modulation.signed_phase(t));
            let minus_i = Complex64::new(0.0, -1.0);
            a[(0, 0)] = Complex64::new(0.0, 0.0);
            a[(0, 1)] = minus_i * coupling;
            a[(1, 0)] = minus_i * coupling.conj();
            a[(1, 1)] = Complex64::new(-kappa, 0.0);
        },
        &initial,
        grid,
        stride,
    )?;
    Ok(AmplitudeTrajectory {
        times: traj.times,
        states: traj
            .states
            .iter()
            .map(|x| AmplitudePair { c_a: x[0], c_b: x[1] })
            .collect(),
    })
}

/// Golden-rule amplitude decay rate together with its validity flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenRule {
    /// `Γ = g^2/κ`; the population decays as `exp(-2Γt)`.
    pub rate: f64,
    /// Whether `κ >= 10 g`, the regime in which the rate is meaningful.
    pub valid: bool,
}

pub fn golden_rule_rate(params: &TwoLevelParams) -> Result<GoldenRule> {
    if params.kappa == 0.0 {
        return Err(Error::Domain("golden-rule rate needs kappa > 0".into()));
    }
    Ok(GoldenRule {
        rate: params.g * params.g / params.kappa,
        valid: params.kappa >= 10.0 * params.g,
    })
}

/// Time-averaged decay coefficient `|g|^2 Σ_p J_p(m)^2 / (κ + i p ν)`.
///
/// The real part is the amplitude decay rate `Γ_eff` (population decays at
/// `2 Γ_eff`), the imaginary part a level shift.
pub fn effective_rate_sum(params: &TwoLevelParams) -> Result<Complex64> {
    if !(params.kappa > 0.0) {
        return Err(Error::Precondition("effective rate needs kappa > 0".into()));
    }
    let g2 = params.g * params.g;
    let m = params.modulation.m;
    if m == 0.0 {
        return Ok(Complex64::new(g2 / params.kappa, 0.0));
    }
    let nu = params.modulation.nu;
    let bands = Sidebands::new(m, RATE_SUM_TOL)?;
    let sum: Complex64 = bands
        .iter()
        .map(|(p, j)| j * j / Complex64::new(params.kappa, p as f64 * nu))
        .sum();
    Ok(g2 * sum)
}

/// `Γ̃/Γ = J_1(m)^2 · 2κ^2/(κ^2 + ν^2)`, valid only when `J0(m) = 0`.
pub fn suppression_ratio(params: &TwoLevelParams) -> Result<f64> {
    let modulation = &params.modulation;
    if !modulation.is_suppression_tuned() {
        return Err(Error::Precondition(format!(
            "modulation index {} is not a zero of J0",
            modulation.m
        )));
    }
    if !(modulation.nu > 0.0) {
        return Err(Error::Precondition("suppression ratio needs nu > 0".into()));
    }
    let j1 = specfun::bessel_j_table(1, modulation.m)[1];
    let k2 = params.kappa * params.kappa;
    Ok(j1 * j1 * 2.0 * k2 / (k2 + modulation.nu * modulation.nu))
}

/// Settings of a simulated decay measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRunOptions {
    /// Integration end time; `None` picks `5/(2Γ)` without modulation and
    /// `3/(2 Re Γ_eff)` with it.
    pub t_max: Option<f64>,
    /// Upper bound on the automatic `t_max`, in units of `1/g`.
    pub t_cap: f64,
    /// Integration steps per period of the fastest frequency (at least 20).
    pub points_per_period: f64,
    /// Recorded samples per modulation period.
    pub samples_per_period: usize,
    /// Approximate number of recorded samples when no averaging is done.
    pub target_samples: usize,
}

impl Default for DecayRunOptions {
    fn default() -> Self {
        Self {
            t_max: None,
            t_cap: 1e4,
            points_per_period: 20.0,
            samples_per_period: 16,
            target_samples: 4000,
        }
    }
}

/// A simulated decay curve reduced to a fitted population decay rate.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayRun {
    pub params: TwoLevelParams,
    pub grid: TimeGrid,
    /// Recorded `(t, |C_a|^2)`.
    pub populations: Vec<(f64, f64)>,
    /// Period-averaged populations, when the modulation period is short
    /// enough compared with the run to be averaged out.
    pub smoothed: Option<Vec<(f64, f64)>>,
    /// Modulation period used for averaging.
    pub period: Option<f64>,
    pub window: (f64, f64),
    /// Fit of the population; `fit.rate` estimates `2 Γ_eff`.
    pub fit: RateFit,
    /// `2 Re` of [`effective_rate_sum`].
    pub predicted_rate: f64,
}

/// Integrates the amplitude equations long enough to observe the decay and
/// fits the population decay rate.
///
/// The population is period averaged first when the modulation period is at
/// most `t_max/20`; the fit window is `[0.1 t_max, 0.9 t_max]`, moved to
/// start no earlier than one modulation period.
pub fn run_decay(params: &TwoLevelParams, options: &DecayRunOptions) -> Result<DecayRun> {
    let predicted_rate = 2.0 * effective_rate_sum(params)?.re;
    let t_max = match options.t_max {
        Some(t) => t,
        None => {
            let factor = if params.modulation.is_active() { 3.0 } else { 5.0 };
            (factor / predicted_rate).min(options.t_cap / params.g)
        }
    };
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::Precondition(format!("t_max must be > 0, got {t_max}")));
    }
    let omega_fast = params.omega_fast();
    let ppp = options.points_per_period.max(numerics::MIN_POINTS_PER_PERIOD);
    let dt_max = 2.0 * PI / (omega_fast * ppp);
    let spp = options.samples_per_period.max(4);

    let period = params.modulation.period().filter(|&p| p <= t_max / 20.0);
    let (dt, stride) = match period {
        Some(p) => {
            let per_sample = ((p / dt_max) / spp as f64).ceil().max(1.0) as usize;
            (p / (per_sample * spp) as f64, per_sample)
        }
        None => {
            let n = (t_max / dt_max).ceil();
            let dt = t_max / n;
            let stride = ((n as usize) / options.target_samples.max(1)).max(1);
            (dt, stride)
        }
    };
    let n_steps = ((t_max / dt / stride as f64).ceil() as usize).max(2) * stride;
    let grid = TimeGrid::new(n_steps as f64 * dt, dt, omega_fast)?;
    let t_end = grid.time(grid.n_steps());

    let traj = evolve_strided(params, &grid, stride)?;
    let populations = traj.populations();
    let smoothed = period
        .map(|p| numerics::period_average(&populations, p))
        .transpose()?;

    let mut lo = 0.1 * t_end;
    if let Some(p) = period {
        lo = lo.max(p);
    }
    let window = (lo, 0.9 * t_end);
    let fit = numerics::fit_decay_rate(smoothed.as_deref().unwrap_or(&populations), window)?;
    Ok(DecayRun {
        params: *params,
        grid,
        populations,
        smoothed,
        period,
        window,
        fit,
        predicted_rate,
    })
}
