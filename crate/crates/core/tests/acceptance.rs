//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

mod common;

use std::f64::consts::{PI, SQRT_2};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use modbath_core::ion_heating::{self, FidelityMethod, HeatingParams};
use modbath_core::numerics::{self, TimeGrid};
use modbath_core::specfun::{self, j0_zero, ModulationParams, Sidebands};
use modbath_core::spin_bath::{self, BathParams, Channel, DensityMatrix2, SpinParams};
use modbath_core::two_level::{self, DecayRunOptions, TwoLevelParams};
use num_complex::Complex64;
use rayon::prelude::*;

type Outcome = Result<(bool, String), modbath_core::Error>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "fig2 suppressed rate vs modified-rate formula", budget: Some(Duration::from_secs(60)), run: fig2_rate },
        Criterion { id: 2, name: "fig2 ordering", budget: Some(Duration::from_secs(120)), run: fig2_ordering },
        Criterion { id: 3, name: "golden-rule baseline", budget: None, run: golden_rule },
        Criterion { id: 4, name: "effective-rate theory on 3x3 grid", budget: None, run: effective_rate_grid },
        Criterion { id: 5, name: "markovian insensitivity", budget: None, run: markovian },
        Criterion { id: 6, name: "master-equation properties", budget: Some(Duration::from_secs(10)), run: master_equation },
        Criterion { id: 7, name: "integral I vs quadrature", budget: Some(Duration::from_secs(60)), run: integral_oracle },
        Criterion { id: 8, name: "heating moments MC vs analytic", budget: Some(Duration::from_secs(300)), run: heating_mc },
        Criterion { id: 9, name: "fig3 fidelity improvement", budget: None, run: fig3_improvement },
        Criterion { id: 10, name: "special functions", budget: Some(Duration::from_secs(10)), run: special_functions },
    ];
    let only: Vec<u32> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect())
        .unwrap_or_default();

    let mut failures = 0;
    for c in &criteria {
        if !only.is_empty() && !only.contains(&c.id) {
            continue;
        }
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (mut passed, mut detail) = match outcome {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        if let Some(budget) = c.budget {
            if elapsed > budget {
                passed = false;
                detail.push_str(&format!("; over time budget {budget:?}"));
            }
        }
        if !passed {
            failures += 1;
        }
        println!(
            "criterion {:>2} {}: {} ({detail}) [{:.1}s]",
            c.id,
            if passed { "PASS" } else { "FAIL" },
            c.name,
            elapsed.as_secs_f64()
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criterion(s) failed");
        ExitCode::FAILURE
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn fig2_params(nu_over_pi: f64) -> Result<TwoLevelParams, modbath_core::Error> {
    TwoLevelParams::new(1.0, 10.0, ModulationParams::new(j0_zero(5)?, nu_over_pi * PI)?)
}

fn fig2_rate() -> Outcome {
    let params = fig2_params(20.0)?;
    let run = two_level::run_decay(&params, &DecayRunOptions::default())?;
    let gamma = two_level::golden_rule_rate(&params)?.rate;
    let modified = 2.0 * gamma * two_level::suppression_ratio(&params)?;
    let dev = rel(run.fit.rate, modified);
    Ok((
        dev < 0.10,
        format!(
            "fitted {:.4e}, 2Γ̃ {:.4e}, deviation {:.1}%; full sideband sum predicts {:.4e}",
            run.fit.rate,
            modified,
            100.0 * dev,
            run.predicted_rate
        ),
    ))
}

fn fig2_ordering() -> Outcome {
    let nus = [20.0, 5.0, 0.5, 0.05];
    let rates = nus
        .par_iter()
        .map(|&n| Ok(two_level::run_decay(&fig2_params(n)?, &DecayRunOptions::default())?.fit.rate))
        .collect::<Result<Vec<f64>, modbath_core::Error>>()?;
    let ordered = rates[0] < rates[1] && rates[1] < rates[2];
    let close = rel(rates[3], 0.2) < 0.10;
    Ok((
        ordered && close,
        format!(
            "rates for ν/π = 20, 5, 0.5, 0.05: {:.3e}, {:.3e}, {:.3e}, {:.4}",
            rates[0], rates[1], rates[2], rates[3]
        ),
    ))
}

fn golden_rule() -> Outcome {
    let params = TwoLevelParams::new(1.0, 10.0, ModulationParams::none())?;
    let options = DecayRunOptions {
        t_max: Some(30.0),
        ..DecayRunOptions::default()
    };
    let run = two_level::run_decay(&params, &options)?;
    let dev = rel(run.fit.rate, 0.2);
    Ok((dev < 0.05, format!("fitted {:.5}, deviation {:.2}%", run.fit.rate, 100.0 * dev)))
}

fn effective_rate_grid() -> Outcome {
    let kappa = 10.0;
    let points: Vec<(u32, f64)> = (1..=3)
        .flat_map(|k| [10.0, 15.0, 20.0].map(|r| (k, r * kappa)))
        .collect();
    let results = points
        .par_iter()
        .map(|&(k, nu)| {
            let params = TwoLevelParams::new(1.0, kappa, ModulationParams::tuned(k, nu)?)?;
            let run = two_level::run_decay(&params, &DecayRunOptions::default())?;
            Ok(rel(run.fit.rate, run.predicted_rate))
        })
        .collect::<Result<Vec<f64>, modbath_core::Error>>()?;
    let worst = results.iter().cloned().fold(0.0, f64::max);
    Ok((worst < 0.10, format!("max deviation {:.2}% over 9 points", 100.0 * worst)))
}

fn markovian() -> Outcome {
    let (g, kappa) = (1.0, 1000.0);
    let two_gamma = 2.0 * g * g / kappa;
    let cases = [0.0, j0_zero(1)?];
    let results = cases
        .par_iter()
        .map(|&m| {
            let params = TwoLevelParams::new(g, kappa, ModulationParams::new(m, 10.0)?)?;
            let run = two_level::run_decay(&params, &DecayRunOptions::default())?;
            Ok((run.fit.rate, run.predicted_rate))
        })
        .collect::<Result<Vec<(f64, f64)>, modbath_core::Error>>()?;
    let mut ok = true;
    let mut detail = Vec::new();
    for (&m, &(fit, predicted)) in cases.iter().zip(&results) {
        ok &= rel(fit, two_gamma) < 0.03 && rel(fit, predicted) < 0.03;
        detail.push(format!(
            "m={m:.4}: fitted {fit:.5e} vs 2Γ {two_gamma:.1e} ({:.2}%), vs sum {predicted:.5e} ({:.2}%)",
            100.0 * rel(fit, two_gamma),
            100.0 * rel(fit, predicted)
        ));
    }
    Ok((ok, detail.join("; ")))
}

fn master_equation() -> Outcome {
    let bath = BathParams::new(1.0, 0.2, 1.0, 0.4)?;
    let grid_points = [(1, 2.0), (1, 10.0), (2, 2.0), (2, 10.0)];
    let mut trace = 0.0f64;
    let mut margin = f64::INFINITY;
    let mut steady = Vec::new();
    let mut lifetime_dev = 0.0f64;
    let initial = [
        DensityMatrix2::excited(),
        DensityMatrix2::superposition(),
        DensityMatrix2::new(0.2, 0.8, Complex64::from_polar(0.39, 1.1))?,
    ];
    for (k, nu) in grid_points {
        let spin = SpinParams::new(0.5, ModulationParams::tuned(k, nu)?)?;
        let gd = spin_bath::relaxation_coefficient(&bath, &spin, Channel::Down)?;
        let gu = spin_bath::relaxation_coefficient(&bath, &spin, Channel::Up)?;
        let population_rate = 2.0 * (gd.re + gu.re);
        let t_end = 30.0 / population_rate;
        let grid = TimeGrid::resolving(t_end, spin_bath::generator_scale(gd, gu), 20.0)?;
        for rho0 in &initial {
            let traj = spin_bath::evolve_rho(gd, gu, rho0, &grid)?;
            for r in &traj.states {
                trace = trace.max((r.trace() - 1.0).abs());
                margin = margin.min(r.rho_ee.min(r.rho_gg)).min(r.positivity_margin());
            }
            steady.push(traj.states.last().unwrap().rho_ee);
        }

        let lifetime = spin_bath::coherence_lifetime(gd, gu)?.time();
        let grid = TimeGrid::resolving(3.0 * lifetime, spin_bath::generator_scale(gd, gu), 20.0)?;
        let traj = spin_bath::evolve_rho(gd, gu, &DensityMatrix2::superposition(), &grid)?;
        let series: Vec<(f64, f64)> = traj
            .times
            .iter()
            .zip(&traj.states)
            .map(|(&t, r)| (t, r.rho_eg.norm()))
            .collect();
        let fit = numerics::fit_decay_rate(&series, (0.1 * lifetime, 2.9 * lifetime))?;
        lifetime_dev = lifetime_dev.max((fit.rate * lifetime - 1.0).abs());
    }
    let spread = steady.iter().fold(0.0f64, |a, v| a.max((v - steady[0]).abs()));
    let ok = trace < 1e-12 && margin >= -1e-10 && spread < 1e-10 && lifetime_dev < 0.01;
    Ok((
        ok,
        format!(
            "trace drift {trace:.1e}, min positivity margin {margin:.1e}, steady ρ_ee {:.10} spread {spread:.1e}, lifetime deviation {:.3}%",
            steady[0],
            100.0 * lifetime_dev
        ),
    ))
}

fn integral_oracle() -> Outcome {
    let points = common::integral_check_points();
    let errors: Vec<f64> = points
        .par_iter()
        .map(|&(a, b, t)| {
            let q = common::double_integral(a, b, 1.0, t);
            (ion_heating::integral_i(a, b, 1.0, t) - q).norm() / (1.0 + q.norm())
        })
        .collect();
    let worst = errors.iter().cloned().fold(0.0, f64::max);
    Ok((worst < 1e-6, format!("max relative error {worst:.2e} over {} points", points.len())))
}

fn heating_mc() -> Outcome {
    let z1 = j0_zero(1)?;
    let cases = [(0.0, 0.0), (z1, 3.0), (z1, 5.0)];
    let times = [2.0, 4.0, 6.0, 8.0, 10.0];
    let dt = 0.005;
    let mut worst = 0.0f64;
    let mut ok = true;
    for (case, &(m, nu)) in cases.iter().enumerate() {
        let params = HeatingParams::new(1.0, 1.0, SQRT_2, ModulationParams::new(m, nu)?)?;
        let grid = TimeGrid::new(10.0, dt, params.omega_fast().max(params.kappa))?;
        let mc = ion_heating::heating_moments_mc(&params, &grid, 4000, 2024 + case as u64)?;
        for t in times {
            let k = (t / dt).round() as usize;
            let sampled = &mc[k];
            let exact = ion_heating::heating_moments_analytic(&params, t)?;
            let z_abs = (sampled.mean_abs_v2 - exact.mean_abs_v2).abs() / sampled.stderr_abs;
            let z_sq = (sampled.mean_v2 - exact.mean_v2).norm() / sampled.stderr_v2;
            worst = worst.max(z_abs).max(z_sq);
            ok &= z_abs < 3.0 && z_sq < 3.0;
        }
    }
    Ok((ok, format!("largest deviation {worst:.2} standard errors over 30 comparisons")))
}

fn fig3_improvement() -> Outcome {
    let z1 = j0_zero(1)?;
    let base = HeatingParams::new(1.0, 1.0, SQRT_2, ModulationParams::none())?;
    let f = |p: &HeatingParams, t: f64| ion_heating::fidelity(&ion_heating::heating_moments_analytic(p, t)?);
    let mut ok = true;
    let mut gains = Vec::new();
    let mut checked = 0;
    for nu in [5.0, 3.0] {
        let p = HeatingParams::new(1.0, 1.0, SQRT_2, ModulationParams::new(z1, nu)?)?;
        let period = 2.0 * PI / nu;
        let mut k = 1;
        while k as f64 * period <= 10.0 {
            let t = k as f64 * period;
            ok &= f(&p, t)? > f(&base, t)?;
            checked += 1;
            k += 1;
        }
        gains.push(f(&p, 10.0)? - f(&base, 10.0)?);
    }
    ok &= gains[0] > gains[1];
    // the regenerated curve itself must be well formed
    let grid = TimeGrid::new(10.0, 0.01, 0.0)?;
    let curve = ion_heating::fidelity_curve(&base, &grid, FidelityMethod::Analytic)?;
    ok &= curve.fidelity[0] == 1.0 && curve.fidelity.iter().all(|&x| x > 0.0 && x <= 1.0);
    Ok((
        ok,
        format!(
            "{checked} stroboscopic points; gain at t=10: ν=5 {:.4}, ν=3 {:.4}; unmodulated F(10) = {:.4}",
            gains[0],
            gains[1],
            curve.fidelity.last().unwrap()
        ),
    ))
}

fn special_functions() -> Outcome {
    let mut sum_rule = 0.0f64;
    for i in 0..=40 {
        let m = 0.5 * i as f64;
        let bands = Sidebands::new(m, 1e-6)?;
        sum_rule = sum_rule.max((bands.total_weight() - 1.0).abs());
    }

    let mut anger = 0.0f64;
    for m in [0.7, j0_zero(1)?, 8.0, j0_zero(5)?, 19.5] {
        let bands = Sidebands::new(m, 1e-9)?;
        let modulation = ModulationParams::new(m, 2.0)?;
        let period = 2.0 * PI / 2.0;
        for k in 0..1000 {
            let t = period * k as f64 / 1000.0;
            let exact = Complex64::from_polar(1.0, -modulation.phase(t));
            let series: Complex64 = bands
                .iter()
                .map(|(l, j)| j * Complex64::from_polar(1.0, -(l as f64) * 2.0 * t))
                .sum();
            anger = anger.max((exact - series).norm());
        }
    }

    let mut recurrence = 0.0f64;
    for i in 0..=199 {
        let x = 0.5 + 99.5 * i as f64 / 199.0;
        let t = specfun::bessel_j_table(51, x);
        for n in 1..=50 {
            recurrence = recurrence.max((t[n - 1] + t[n + 1] - 2.0 * n as f64 / x * t[n]).abs());
        }
    }

    let mut reflection = 0.0f64;
    for n in [1, 2, 3, 10, 51, 120, 200] {
        for x in [-480.0, -33.3, 0.25, 7.0, 12.0, 12.5, 250.0, 500.0] {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            reflection = reflection.max((specfun::bessel_j(-n, x)? - sign * specfun::bessel_j(n, x)?).abs());
        }
    }

    let mut zeros = 0.0f64;
    for k in 1..=50 {
        zeros = zeros.max(specfun::bessel_j(0, j0_zero(k)?)?.abs());
    }

    // J_n(x) = (1/π) ∫_0^π cos(nτ - x sin τ) dτ by the periodic trapezoid rule
    let mut accuracy = 0.0f64;
    for n in [0, 1, 5, 30, 120, 200] {
        for x in [0.1, 3.3, 11.9, 12.1, 47.0, 160.0, 499.0] {
            let samples = 4096;
            let mut acc = 0.0;
            for j in 0..samples {
                let tau = 2.0 * PI * j as f64 / samples as f64;
                acc += (n as f64 * tau - x * tau.sin()).cos();
            }
            let reference = acc / samples as f64;
            accuracy = accuracy.max((specfun::bessel_j(n, x)? - reference).abs());
        }
    }

    let ok = sum_rule < 1e-10
        && anger < 1e-8
        && recurrence < 1e-10
        && reflection < 1e-13
        && zeros < 1e-10
        && accuracy < 1e-12;
    Ok((
        ok,
        format!(
            "sum rule {sum_rule:.1e}, Jacobi–Anger {anger:.1e}, recurrence {recurrence:.1e}, reflection {reflection:.1e}, J0 zeros {zeros:.1e}, vs integral {accuracy:.1e}"
        ),
    ))
}
