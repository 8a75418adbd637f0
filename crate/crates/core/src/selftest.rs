//! Fast invariant checks over every module, for use from the command line
//! on a fresh build.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::Result;
use crate::ion_heating::{self, HeatingParams};
use crate::numerics::{self, TimeGrid};
use crate::specfun::{self, ModulationParams, Sidebands};
use crate::spin_bath::{self, BathParams, Channel, DensityMatrix2, SpinParams};
use crate::two_level::{self, TwoLevelParams};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, outcome: Result<(bool, String)>) -> Check {
    match outcome {
        Ok((passed, detail)) => Check {
            name,
            passed,
            detail,
        },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

/// Runs every check; none takes more than a fraction of a second.
pub fn run_all() -> Vec<Check> {
    vec![
        check("specfun.sum_rule", sum_rule()),
        check("specfun.reflection", reflection()),
        check("specfun.recurrence", recurrence()),
        check("specfun.j0_zeros", zeros()),
        check("specfun.jacobi_anger", jacobi_anger()),
        check("numerics.norm_preservation", norm_preservation()),
        check("two_level.unitarity", unitarity()),
        check("two_level.golden_rule_fit", golden_rule_fit()),
        check("spin_bath.trace_positivity", trace_positivity()),
        check("spin_bath.steady_state_invariance", steady_state_invariance()),
        check("ion_heating.limit_continuity", limit_continuity()),
        check("ion_heating.fidelity_bounds", fidelity_bounds()),
    ]
}

fn sum_rule() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for x in [0.5, 7.3, 14.93, 60.0, 250.0, 480.0] {
        let table = specfun::bessel_j_table(x as usize + 80, x);
        let sum = table[0] + 2.0 * table.iter().skip(2).step_by(2).sum::<f64>();
        worst = worst.max((sum - 1.0).abs());
    }
    Ok((worst < 1e-12, format!("max |J0 + 2ΣJ2k - 1| = {worst:.2e}")))
}

fn reflection() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for n in [1, 2, 7, 40, 150] {
        for x in [0.3, 11.0, 13.0, 99.0] {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            worst = worst.max((specfun::bessel_j(-n, x)? - sign * specfun::bessel_j(n, x)?).abs());
        }
    }
    Ok((worst < 1e-13, format!("max reflection defect = {worst:.2e}")))
}

fn recurrence() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for x in [2.0, 12.5, 77.0, 300.0] {
        let t = specfun::bessel_j_table(120, x);
        for n in 1..119 {
            let r = t[n - 1] + t[n + 1] - 2.0 * n as f64 / x * t[n];
            worst = worst.max(r.abs());
        }
    }
    Ok((worst < 1e-11, format!("max three-term residual = {worst:.2e}")))
}

fn zeros() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for k in 1..=20 {
        worst = worst.max(specfun::bessel_j(0, specfun::j0_zero(k)?)?.abs());
    }
    Ok((worst < 1e-10, format!("max |J0(z_k)|, k <= 20: {worst:.2e}")))
}

fn jacobi_anger() -> Result<(bool, String)> {
    let m = specfun::j0_zero(5)?;
    let bands = Sidebands::new(m, 1e-9)?;
    let mut worst = 0.0f64;
    for k in 0..1000 {
        let theta = 2.0 * PI * k as f64 / 1000.0;
        let exact = Complex64::from_polar(1.0, -m * theta.sin());
        let series: Complex64 = bands
            .iter()
            .map(|(l, j)| j * Complex64::from_polar(1.0, -(l as f64) * theta))
            .sum();
        worst = worst.max((exact - series).norm());
    }
    Ok((worst < 1e-8, format!("sup-norm error = {worst:.2e} (N = {})", bands.order())))
}

fn norm_preservation() -> Result<(bool, String)> {
    let omega = 3.0;
    let grid = TimeGrid::resolving(10_000.0 * 2.0 * PI / omega / 20.0, omega, 20.0)?;
    let i = Complex64::i();
    let x0 = DVector::from_vec(vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]);
    let traj = numerics::integrate_linear_strided(
        |_, a| {
            a[(0, 0)] = Complex64::new(0.0, 0.0);
            a[(1, 1)] = Complex64::new(0.0, 0.0);
            a[(0, 1)] = -i * omega;
            a[(1, 0)] = -i * omega;
        },
        &x0,
        &grid,
        100,
    )?;
    let worst = traj
        .states
        .iter()
        .map(|x| (x.norm() - 1.0).abs())
        .fold(0.0f64, f64::max);
    Ok((worst < 1e-9, format!("norm drift over {} steps = {worst:.2e}", grid.n_steps())))
}

fn unitarity() -> Result<(bool, String)> {
    let params = TwoLevelParams::new(1.0, 0.0, ModulationParams::tuned(2, 3.0)?)?;
    let grid = TimeGrid::resolving(100.0, params.omega_fast(), 20.0)?;
    let traj = two_level::evolve(&params, &grid)?;
    let worst = traj
        .states
        .iter()
        .map(|s| (s.total_population() - 1.0).abs())
        .fold(0.0f64, f64::max);
    Ok((worst < 1e-8, format!("max population drift at κ = 0: {worst:.2e}")))
}

fn golden_rule_fit() -> Result<(bool, String)> {
    let params = TwoLevelParams::new(1.0, 10.0, ModulationParams::none())?;
    let grid = TimeGrid::resolving(30.0, params.omega_fast(), 20.0)?;
    let pops = two_level::evolve(&params, &grid)?.populations();
    let fit = numerics::fit_decay_rate(&pops, (3.0, 27.0))?;
    let rel = (fit.rate / 0.2 - 1.0).abs();
    Ok((rel < 0.05, format!("fitted rate {:.5} vs 0.2 ({:.2}%)", fit.rate, 100.0 * rel)))
}

fn trace_positivity() -> Result<(bool, String)> {
    let (gd, gu) = (Complex64::new(0.3, 0.2), Complex64::new(0.1, -0.4));
    let rho0 = DensityMatrix2::new(0.3, 0.7, Complex64::new(0.2, 0.35))?;
    let grid = TimeGrid::resolving(20.0, spin_bath::generator_scale(gd, gu), 50.0)?;
    let traj = spin_bath::evolve_rho(gd, gu, &rho0, &grid)?;
    let trace = traj.states.iter().map(|r| (r.trace() - 1.0).abs()).fold(0.0f64, f64::max);
    let margin = traj.states.iter().map(|r| r.positivity_margin()).fold(f64::INFINITY, f64::min);
    Ok((
        trace < 1e-12 && margin >= -1e-10,
        format!("trace drift {trace:.2e}, min positivity margin {margin:.2e}"),
    ))
}

fn steady_state_invariance() -> Result<(bool, String)> {
    let bath = BathParams::new(1.0, 0.0, 1.0, 0.25)?;
    let mut values = Vec::new();
    for (k, nu) in [(0, 0.0), (1, 4.0), (2, 10.0)] {
        let modulation = if k == 0 {
            ModulationParams::none()
        } else {
            ModulationParams::tuned(k, nu)?
        };
        let spin = SpinParams::new(0.5, modulation)?;
        let gd = spin_bath::relaxation_coefficient(&bath, &spin, Channel::Down)?;
        let gu = spin_bath::relaxation_coefficient(&bath, &spin, Channel::Up)?;
        values.push(spin_bath::steady_state_population(gd, gu)?);
    }
    let spread = values.iter().fold(0.0f64, |acc, v| acc.max((v - values[0]).abs()));
    Ok((spread < 1e-10, format!("steady ρ_ee = {:.12}, spread {spread:.2e}", values[0])))
}

fn limit_continuity() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for omega in [0.5, 1.0, 5.0] {
        for t in [1.0, 10.0] {
            let exact = ion_heating::integral_i(omega, -omega, 1.0, t);
            let near = ion_heating::integral_i(omega, -omega + 1e-6 * omega, 1.0, t);
            worst = worst.max((near - exact).norm() / exact.norm());
        }
    }
    Ok((worst < 1e-4, format!("max relative jump = {worst:.2e}")))
}

fn fidelity_bounds() -> Result<(bool, String)> {
    let params = HeatingParams::new(
        1.0,
        1.0,
        2f64.sqrt(),
        ModulationParams::tuned(1, 5.0)?,
    )?;
    let mut ok = true;
    let mut lowest = 1.0f64;
    for k in 0..=20 {
        let t = 0.5 * k as f64;
        let f = ion_heating::fidelity(&ion_heating::heating_moments_analytic(&params, t)?)?;
        ok &= f > 0.0 && f <= 1.0 && (k != 0 || f == 1.0);
        lowest = lowest.min(f);
    }
    Ok((ok, format!("F in ({lowest:.4}, 1] on t in [0, 10]")))
}
