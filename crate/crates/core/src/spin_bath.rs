//! A spin-1/2 coupled to a heat bath through `S^+ e^{iω0 t - iΦ(t)} R^-(t) + h.c.`,
//! with exponentially decaying bath correlations
//! `C(τ) = C0 exp(-κ_b τ - iωτ)`.
//!
//! Under `J0(m) = 0` the master equation keeps the form
//!
//! ```text
//! dρ/dt = -γ_down (S+S- ρ - S- ρ S+) - γ_up (ρ S-S+ - S+ ρ S-) + h.c.
//! ```
//!
//! with both coefficients rescaled by `2 J1(m)^2 (κ_b - iΔ)/((κ_b - iΔ)^2 + ν^2)`.
//! Written out in the basis `{|e>, |g>}` this gives
//!
//! ```text
//! dρ_ee/dt = -2 Re(γ_down) ρ_ee + 2 Re(γ_up) ρ_gg
//! dρ_eg/dt = -(γ_down + γ_up) ρ_eg
//! ```
//!
//! and `ρ_gg = 1 - ρ_ee`. The state is integrated as the vector
//! `(1, ρ_ee, ρ_eg)` so the affine population equation stays linear and the
//! trace is exact.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{self, TimeGrid};
use crate::specfun::{self, ModulationParams, Sidebands};

/// Sideband truncation used by [`relaxation_coefficient_full_sum`].
pub const FULL_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathParams {
    /// Correlation decay rate `κ_b > 0`.
    pub kappa_b: f64,
    /// Center frequency `ω` of the bath correlations.
    pub omega: f64,
    /// Zero-lag strength of `C^{-+}`, driving downward transitions.
    pub c0_minus_plus: f64,
    /// Zero-lag strength of `C^{+-}`, driving upward transitions.
    pub c0_plus_minus: f64,
}

impl BathParams {
    pub fn new(kappa_b: f64, omega: f64, c0_minus_plus: f64, c0_plus_minus: f64) -> Result<Self> {
        if !(kappa_b > 0.0 && kappa_b.is_finite()) {
            return Err(Error::Precondition(format!("kappa_b must be > 0, got {kappa_b}")));
        }
        if !omega.is_finite() {
            return Err(Error::Precondition("omega must be finite".into()));
        }
        for (name, v) in [("c0_minus_plus", c0_minus_plus), ("c0_plus_minus", c0_plus_minus)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Precondition(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(Self {
            kappa_b,
            omega,
            c0_minus_plus,
            c0_plus_minus,
        })
    }

    fn amplitude(&self, channel: Channel) -> f64 {
        match channel {
            Channel::Down => self.c0_minus_plus,
            Channel::Up => self.c0_plus_minus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinParams {
    /// Spin transition frequency `ω0`.
    pub omega0: f64,
    pub modulation: ModulationParams,
    /// Also include the channel evaluated at `ω0 -> -ω0`, i.e. at detuning
    /// `-(ω0 + ω)`. Off by default.
    pub counter_rotating: bool,
}

impl SpinParams {
    pub fn new(omega0: f64, modulation: ModulationParams) -> Result<Self> {
        if !omega0.is_finite() {
            return Err(Error::Precondition("omega0 must be finite".into()));
        }
        Ok(Self {
            omega0,
            modulation,
            counter_rotating: false,
        })
    }

    /// `Δ = ω0 - ω`.
    pub fn detuning(&self, bath: &BathParams) -> f64 {
        self.omega0 - bath.omega
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    /// `|e> -> |g>`, weighted by `C0^{-+}`.
    Down,
    /// `|g> -> |e>`, weighted by `C0^{+-}`.
    Up,
}

/// Spectral kernel `∫_0^∞ e^{-(κ - iΔ)τ} · (modulation average) dτ`.
fn kernel(kappa: f64, detuning: f64, modulation: &ModulationParams) -> Complex64 {
    let z = Complex64::new(kappa, -detuning);
    if modulation.m == 0.0 {
        return 1.0 / z;
    }
    let j1 = specfun::bessel_j_table(1, modulation.m)[1];
    let nu = modulation.nu;
    2.0 * j1 * j1 * z / (z * z + nu * nu)
}

/// Relaxation coefficient of one channel.
///
/// With modulation (`m > 0`, which must satisfy `J0(m) = 0`) this is
/// `C0 · 2 J1(m)^2 (κ_b - iΔ)/((κ_b - iΔ)^2 + ν^2)`; without it the plain
/// `C0/(κ_b - iΔ)`.
pub fn relaxation_coefficient(
    bath: &BathParams,
    spin: &SpinParams,
    channel: Channel,
) -> Result<Complex64> {
    let modulation = &spin.modulation;
    if modulation.m > 0.0 && !modulation.is_suppression_tuned() {
        return Err(Error::Precondition(format!(
            "modulation index {} is not a zero of J0; the reduced master equation does not apply",
            modulation.m
        )));
    }
    let c0 = bath.amplitude(channel);
    let mut gamma = c0 * kernel(bath.kappa_b, spin.detuning(bath), modulation);
    if spin.counter_rotating {
        gamma += c0 * kernel(bath.kappa_b, -(spin.omega0 + bath.omega), modulation);
    }
    Ok(gamma)
}

/// The coefficient before the first-sideband reduction:
/// `C0 Σ_l J_l(m)^2 / (κ_b - iΔ + i l ν)`, for any modulation index.
pub fn relaxation_coefficient_full_sum(
    bath: &BathParams,
    spin: &SpinParams,
    channel: Channel,
) -> Result<Complex64> {
    let c0 = bath.amplitude(channel);
    let z = Complex64::new(bath.kappa_b, -spin.detuning(bath));
    let modulation = &spin.modulation;
    if modulation.m == 0.0 {
        return Ok(c0 / z);
    }
    let bands = Sidebands::new(modulation.m, FULL_SUM_TOL)?;
    let sum: Complex64 = bands
        .iter()
        .map(|(l, j)| j * j / (z + Complex64::new(0.0, l as f64 * modulation.nu)))
        .sum();
    Ok(c0 * sum)
}

/// Reduced spin density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix2 {
    pub rho_ee: f64,
    pub rho_gg: f64,
    pub rho_eg: Complex64,
}

impl DensityMatrix2 {
    /// Validates trace, nonnegative populations and `|ρ_eg|^2 <= ρ_ee ρ_gg`
    /// (all to `1e-12`).
    pub fn new(rho_ee: f64, rho_gg: f64, rho_eg: Complex64) -> Result<Self> {
        let rho = Self {
            rho_ee,
            rho_gg,
            rho_eg,
        };
        const TOL: f64 = 1e-12;
        if (rho.trace() - 1.0).abs() > TOL {
            return Err(Error::Precondition(format!("trace is {}, not 1", rho.trace())));
        }
        if rho_ee < -TOL || rho_gg < -TOL {
            return Err(Error::Precondition("populations must be nonnegative".into()));
        }
        if rho.positivity_margin() < -TOL {
            return Err(Error::Precondition(
                "coherence exceeds the positivity bound |ρ_eg|^2 <= ρ_ee ρ_gg".into(),
            ));
        }
        Ok(rho)
    }

    pub fn excited() -> Self {
        Self {
            rho_ee: 1.0,
            rho_gg: 0.0,
            rho_eg: Complex64::new(0.0, 0.0),
        }
    }

    /// `(|e> + |g>)/√2`.
    pub fn superposition() -> Self {
        Self {
            rho_ee: 0.5,
            rho_gg: 0.5,
            rho_eg: Complex64::new(0.5, 0.0),
        }
    }

    pub fn trace(&self) -> f64 {
        self.rho_ee + self.rho_gg
    }

    /// `ρ_ee ρ_gg - |ρ_eg|^2`, nonnegative for a physical state.
    pub fn positivity_margin(&self) -> f64 {
        self.rho_ee * self.rho_gg - self.rho_eg.norm_sqr()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RhoTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix2>,
}

/// Integrates the reduced master equation for fixed coefficients, recording
/// every grid step.
pub fn evolve_rho(
    gamma_down: Complex64,
    gamma_up: Complex64,
    rho0: &DensityMatrix2,
    grid: &TimeGrid,
) -> Result<RhoTrajectory> {
    evolve_rho_strided(gamma_down, gamma_up, rho0, grid, 1)
}

/// Same as [`evolve_rho`], recording every `stride`-th step.
pub fn evolve_rho_strided(
    gamma_down: Complex64,
    gamma_up: Complex64,
    rho0: &DensityMatrix2,
    grid: &TimeGrid,
    stride: usize,
) -> Result<RhoTrajectory> {
    let rho0 = DensityMatrix2::new(rho0.rho_ee, rho0.rho_gg, rho0.rho_eg)?;
    grid.check_resolves(generator_scale(gamma_down, gamma_up))?;
    let down = gamma_down.re;
    let up = gamma_up.re;
    let coherence = -(gamma_down + gamma_up);
    let zero = Complex64::new(0.0, 0.0);
    let initial = DVector::from_vec(vec![
        Complex64::new(1.0, 0.0),
        Complex64::new(rho0.rho_ee, 0.0),
        rho0.rho_eg,
    ]);
    let traj = numerics::integrate_linear_strided(
        |_, a| {
            a.fill(zero);
            a[(1, 0)] = Complex64::new(2.0 * up, 0.0);
            a[(1, 1)] = Complex64::new(-2.0 * (down + up), 0.0);
            a[(2, 2)] = coherence;
        },
        &initial,
        grid,
        stride,
    )?;
    Ok(RhoTrajectory {
        times: traj.times,
        states: traj
            .states
            .iter()
            .map(|x| {
                let rho_ee = x[1].re;
                DensityMatrix2 {
                    rho_ee,
                    rho_gg: 1.0 - rho_ee,
                    rho_eg: x[2],
                }
            })
            .collect(),
    })
}

/// Largest rate in the reduced generator, used as the frequency the grid
/// must resolve.
pub fn generator_scale(gamma_down: Complex64, gamma_up: Complex64) -> f64 {
    (2.0 * (gamma_down.re + gamma_up.re)).abs().max((gamma_down + gamma_up).norm())
}

/// Stationary excited population `Re γ_up / (Re γ_down + Re γ_up)`.
pub fn steady_state_population(gamma_down: Complex64, gamma_up: Complex64) -> Result<f64> {
    let total = gamma_down.re + gamma_up.re;
    if !(total > 0.0) {
        return Err(Error::Domain(
            "no relaxation: Re(γ_down + γ_up) must be > 0 for a unique steady state".into(),
        ));
    }
    Ok(gamma_up.re / total)
}

/// 1/e time of `|ρ_eg|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoherenceLifetime {
    Finite(f64),
    /// The coherence does not decay at all.
    Unbounded,
}

impl CoherenceLifetime {
    pub fn time(&self) -> f64 {
        match *self {
            CoherenceLifetime::Finite(t) => t,
            CoherenceLifetime::Unbounded => f64::INFINITY,
        }
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, CoherenceLifetime::Finite(_))
    }
}

/// `1/Re(γ_down + γ_up)`.
pub fn coherence_lifetime(gamma_down: Complex64, gamma_up: Complex64) -> Result<CoherenceLifetime> {
    let rate = gamma_down.re + gamma_up.re;
    if rate == 0.0 {
        Ok(CoherenceLifetime::Unbounded)
    } else if rate > 0.0 {
        Ok(CoherenceLifetime::Finite(1.0 / rate))
    } else {
        Err(Error::Precondition(format!(
            "Re(γ_down + γ_up) = {rate} is negative"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::j0_zero;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bath(kappa_b: f64, omega: f64, down: f64, up: f64) -> BathParams {
        BathParams::new(kappa_b, omega, down, up).unwrap()
    }

    fn spin(omega0: f64, m: f64, nu: f64) -> SpinParams {
        SpinParams::new(omega0, ModulationParams::new(m, nu).unwrap()).unwrap()
    }

    #[test]
    fn coefficient_examples() {
        let g = relaxation_coefficient(&bath(2.0, 0.0, 1.0, 0.0), &spin(0.0, 0.0, 0.0), Channel::Down)
            .unwrap();
        assert_eq!(g, c(0.5, 0.0));

        let z1 = j0_zero(1).unwrap();
        let j1 = specfun::bessel_j(1, z1).unwrap();
        assert!((j1 * j1 - 0.269515).abs() < 1e-5);
        for kappa in [0.5, 1.0, 3.0] {
            let g = relaxation_coefficient(
                &bath(kappa, 0.0, 1.0, 0.0),
                &spin(0.0, z1, 10.0 * kappa),
                Channel::Down,
            )
            .unwrap();
            assert!((g.re * kappa / 5.337e-3 - 1.0).abs() < 1e-3, "{}", g.re * kappa);
            assert!(g.im.abs() < 1e-15);
        }

        let far = relaxation_coefficient(&bath(1.0, 0.0, 1.0, 0.0), &spin(0.0, z1, 1e8), Channel::Down)
            .unwrap();
        assert!(far.norm() < 1e-15);
    }

    #[test]
    fn channels_and_limit() {
        let b = bath(1.5, 0.3, 0.8, 0.2);
        let s = spin(1.1, 0.0, 0.0);
        let z = c(1.5, -0.8);
        let down = relaxation_coefficient(&b, &s, Channel::Down).unwrap();
        let up = relaxation_coefficient(&b, &s, Channel::Up).unwrap();
        assert!((down - 0.8 / z).norm() < 1e-15);
        assert!((up - 0.2 / z).norm() < 1e-15);
        let full = relaxation_coefficient_full_sum(&b, &s, Channel::Down).unwrap();
        assert!((full - down).norm() < 1e-15);
    }

    #[test]
    fn untuned_modulation_is_rejected() {
        let r = relaxation_coefficient(&bath(1.0, 0.0, 1.0, 0.0), &spin(0.0, 2.0, 5.0), Channel::Up);
        assert!(matches!(r, Err(Error::Precondition(_))));
        // the unreduced sum has no such restriction
        assert!(relaxation_coefficient_full_sum(&bath(1.0, 0.0, 1.0, 0.0), &spin(0.0, 2.0, 5.0), Channel::Up).is_ok());
    }

    #[test]
    fn first_sideband_reduction_of_full_sum() {
        // With only l = ±1 kept the full sum is the reduced coefficient.
        let z1 = j0_zero(1).unwrap();
        let b = bath(1.0, 0.2, 1.0, 0.0);
        let s = spin(0.7, z1, 6.0);
        let zc = c(1.0, -0.5);
        let j1 = specfun::bessel_j(1, z1).unwrap();
        let pair = j1 * j1 * (1.0 / (zc + c(0.0, 6.0)) + 1.0 / (zc - c(0.0, 6.0)));
        let reduced = relaxation_coefficient(&b, &s, Channel::Down).unwrap();
        assert!((pair - reduced).norm() < 1e-15);
    }

    #[test]
    fn counter_rotating_flag_adds_channel() {
        let b = bath(1.0, 0.5, 1.0, 0.0);
        let mut s = spin(2.0, 0.0, 0.0);
        let base = relaxation_coefficient(&b, &s, Channel::Down).unwrap();
        s.counter_rotating = true;
        let with = relaxation_coefficient(&b, &s, Channel::Down).unwrap();
        assert!((with - base - 1.0 / c(1.0, 2.5)).norm() < 1e-15);
    }

    fn grid(t_max: f64, gd: Complex64, gu: Complex64) -> TimeGrid {
        TimeGrid::resolving(t_max, generator_scale(gd, gu), 400.0).unwrap()
    }

    #[test]
    fn single_channel_decay() {
        let gd = c(0.35, 0.2);
        let g = grid(10.0, gd, c(0.0, 0.0));
        let traj = evolve_rho(gd, c(0.0, 0.0), &DensityMatrix2::excited(), &g).unwrap();
        for (t, rho) in traj.times.iter().zip(&traj.states) {
            assert!((rho.rho_ee - (-0.7 * t).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn detailed_balance_and_generic_steady_state() {
        let gd = c(0.4, -0.1);
        let traj = evolve_rho(gd, gd, &DensityMatrix2::excited(), &grid(60.0, gd, gd)).unwrap();
        assert!((traj.states.last().unwrap().rho_ee - 0.5).abs() < 1e-12);

        let (gd, gu) = (c(0.3, 0.05), c(0.1, -0.2));
        let traj = evolve_rho(gd, gu, &DensityMatrix2::superposition(), &grid(100.0, gd, gu)).unwrap();
        let expected = steady_state_population(gd, gu).unwrap();
        assert!((expected - 0.25).abs() < 1e-15);
        assert!((traj.states.last().unwrap().rho_ee - expected).abs() < 1e-12);
    }

    #[test]
    fn invalid_initial_state_is_rejected() {
        let bad = DensityMatrix2 {
            rho_ee: 0.5,
            rho_gg: 0.5,
            rho_eg: c(0.6, 0.0),
        };
        let g = grid(1.0, c(1.0, 0.0), c(0.0, 0.0));
        assert!(evolve_rho(c(1.0, 0.0), c(0.0, 0.0), &bad, &g).is_err());
        assert!(DensityMatrix2::new(0.7, 0.7, c(0.0, 0.0)).is_err());
        assert!(DensityMatrix2::new(1.2, -0.2, c(0.0, 0.0)).is_err());
    }

    /// Brute-force oracle: the generator applied to the full 2x2 matrix as
    /// printed (operator products and hermitian conjugate), vectorised and
    /// exponentiated.
    fn superoperator(gd: Complex64, gu: Complex64) -> DMatrix<Complex64> {
        // basis order: e = 0, g = 1
        let sp = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let sm = sp.adjoint();
        let mut l = DMatrix::zeros(4, 4);
        for col in 0..4 {
            let mut rho = DMatrix::zeros(2, 2);
            rho[(col / 2, col % 2)] = c(1.0, 0.0);
            let first = (&sp * &sm * &rho - &sm * &rho * &sp) * (-gd);
            let second = (&rho * &sm * &sp - &sp * &rho * &sm) * (-gu);
            // h.c. of a superoperator term X(ρ) is X(ρ†)†
            let rho_dag = rho.adjoint();
            let first_hc = ((&sp * &sm * &rho_dag - &sm * &rho_dag * &sp) * (-gd)).adjoint();
            let second_hc = ((&rho_dag * &sm * &sp - &sp * &rho_dag * &sm) * (-gu)).adjoint();
            let out = first + second + first_hc + second_hc;
            for row in 0..4 {
                l[(row, col)] = out[(row / 2, row % 2)];
            }
        }
        l
    }

    #[test]
    fn reduction_matches_superoperator_oracle() {
        let (gd, gu) = (c(0.3, 0.4), c(0.12, -0.25));
        let rho0 = DensityMatrix2::new(0.6, 0.4, c(0.3, 0.35)).unwrap();
        let g = grid(8.0, gd, gu);
        let traj = evolve_rho(gd, gu, &rho0, &g).unwrap();
        let l = superoperator(gd, gu);
        let v0 = DVector::from_vec(vec![
            c(rho0.rho_ee, 0.0),
            rho0.rho_eg,
            rho0.rho_eg.conj(),
            c(rho0.rho_gg, 0.0),
        ]);
        for k in [0usize, 17, 200, g.n_steps()] {
            let t = traj.times[k];
            let v = (&l * c(t, 0.0)).exp() * &v0;
            let rho = traj.states[k];
            assert!((v[0].re - rho.rho_ee).abs() < 1e-9, "t={t}");
            assert!((v[3].re - rho.rho_gg).abs() < 1e-9);
            assert!((v[1] - rho.rho_eg).norm() < 1e-9, "t={t}: {} vs {}", v[1], rho.rho_eg);
            assert!((v[2] - rho.rho_eg.conj()).norm() < 1e-9);
        }
    }

    #[test]
    fn lifetime_examples() {
        assert_eq!(coherence_lifetime(c(0.5, 0.0), c(0.0, 0.0)).unwrap().time(), 2.0);
        let zero = coherence_lifetime(c(0.0, 1.0), c(0.0, -0.3)).unwrap();
        assert!(!zero.is_bounded());
        assert_eq!(zero.time(), f64::INFINITY);
        assert!(coherence_lifetime(c(-1.0, 0.0), c(0.0, 0.0)).is_err());

        let z1 = j0_zero(1).unwrap();
        let b = bath(1.0, 0.0, 1.0, 0.3);
        let lifetime = |s: &SpinParams| {
            let gd = relaxation_coefficient(&b, s, Channel::Down).unwrap();
            let gu = relaxation_coefficient(&b, s, Channel::Up).unwrap();
            coherence_lifetime(gd, gu).unwrap().time()
        };
        let ratio = lifetime(&spin(0.0, z1, 10.0)) / lifetime(&spin(0.0, 0.0, 0.0));
        let j1 = specfun::bessel_j(1, z1).unwrap();
        let expected = 101.0 / (2.0 * j1 * j1);
        assert!((ratio / expected - 1.0).abs() < 1e-12);
        assert!((ratio - 187.4).abs() < 0.5, "{ratio}");
    }

    #[test]
    fn coherence_decay_matches_lifetime() {
        let (gd, gu) = (c(0.2, 0.3), c(0.05, 0.1));
        let lifetime = coherence_lifetime(gd, gu).unwrap().time();
        let g = grid(3.0 * lifetime, gd, gu);
        let traj = evolve_rho(gd, gu, &DensityMatrix2::superposition(), &g).unwrap();
        let series: Vec<_> = traj.times.iter().zip(&traj.states).map(|(&t, r)| (t, r.rho_eg.norm())).collect();
        let fit = numerics::fit_decay_rate(&series, (0.0, 3.0 * lifetime)).unwrap();
        assert!((fit.rate * lifetime - 1.0).abs() < 0.01);
    }

    #[test]
    fn markovian_bath_ignores_modulation() {
        let z1 = j0_zero(1).unwrap();
        let j1sq = specfun::bessel_j(1, z1).unwrap().powi(2);
        for (nu, detuning) in [(1.0, 0.0), (0.5, 1.0), (1.0, -0.7)] {
            let kappa_b = 100.0 * f64::max(nu, f64::abs(detuning));
            let b = bath(kappa_b, 0.0, 1.0, 0.0);
            let plain = relaxation_coefficient(&b, &spin(detuning, 0.0, 0.0), Channel::Down).unwrap();
            let modulated = relaxation_coefficient(&b, &spin(detuning, z1, nu), Channel::Down).unwrap();
            let normalized = modulated.re / (2.0 * j1sq);
            assert!((normalized / plain.re - 1.0).abs() < 0.05);
            // the unreduced sum is insensitive without any normalisation
            let full = relaxation_coefficient_full_sum(&b, &spin(detuning, z1, nu), Channel::Down).unwrap();
            assert!((full.re / plain.re - 1.0).abs() < 1e-3);
        }
    }

    proptest! {
        #[test]
        fn trace_and_positivity_hold(
            dr in 0.0f64..1.0, di in -1.0f64..1.0, ur in 0.0f64..1.0, ui in -1.0f64..1.0,
            pe in 0.0f64..1.0, frac in 0.0f64..1.0, angle in 0.0f64..6.3,
        ) {
            let (gd, gu) = (c(dr + 1e-3, di), c(ur, ui));
            let amp = frac * (pe * (1.0 - pe)).sqrt();
            let rho0 = DensityMatrix2::new(pe, 1.0 - pe, Complex64::from_polar(amp, angle)).unwrap();
            let g = grid(10.0, gd, gu);
            let traj = evolve_rho_strided(gd, gu, &rho0, &g, 5).unwrap();
            for rho in &traj.states {
                prop_assert!((rho.trace() - 1.0).abs() < 1e-12);
                prop_assert!(rho.rho_ee >= -1e-10 && rho.rho_gg >= -1e-10);
                prop_assert!(rho.positivity_margin() >= -1e-10);
            }
        }
    }
}
