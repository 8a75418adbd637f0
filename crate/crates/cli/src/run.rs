//! Scenario execution.

use std::f64::consts::PI;
use std::path::PathBuf;

use modbath_core::ion_heating::{self, FidelityMethod, HeatingParams};
use modbath_core::selftest;
use modbath_core::specfun::{j0_zero, ModulationParams, PhaseSign};
use modbath_core::spin_bath::{self, BathParams, Channel, CoherenceLifetime, DensityMatrix2, SpinParams};
use modbath_core::two_level::{self, DecayRun, DecayRunOptions, TwoLevelParams};
use modbath_core::TimeGrid;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::{Scenario, ScenarioConfig};
use crate::error::CliError;
use crate::output::{decimate, write_csv};

/// What a run produced.
#[derive(Debug, Default)]
pub struct RunReport {
    /// Human-readable summary lines.
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
    /// Failed self-test checks.
    pub failures: usize,
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<RunReport, CliError> {
    match config.scenario {
        Scenario::TwoLevel => two_level_run(config),
        Scenario::SpinBath => spin_bath_run(config),
        Scenario::IonHeating => ion_heating_run(config),
        Scenario::Fig2 => fig2(config),
        Scenario::Fig3 => fig3(config),
        Scenario::Selftest => Ok(selftest_run()),
    }
}

fn sign(config: &ScenarioConfig) -> PhaseSign {
    match config.text("sign") {
        "positive" => PhaseSign::Positive,
        _ => PhaseSign::Negative,
    }
}

/// `m` if given, else the `m_zero`-th zero of `J0` (0 meaning no modulation).
fn modulation_index(config: &ScenarioConfig) -> Result<f64, CliError> {
    if let Some(m) = config.optional_number("m") {
        return Ok(m);
    }
    match config.integer("m_zero") {
        0 => Ok(0.0),
        k => {
            let k = u32::try_from(k).map_err(|_| CliError::Parse("key \"m_zero\": too large".into()))?;
            Ok(j0_zero(k)?)
        }
    }
}

fn modulation(config: &ScenarioConfig, m: f64, nu: f64) -> Result<ModulationParams, CliError> {
    let nu = if m == 0.0 { 0.0 } else { nu };
    Ok(ModulationParams::new(m, nu)?.with_sign(sign(config)))
}

fn decay_options(config: &ScenarioConfig) -> DecayRunOptions {
    DecayRunOptions {
        t_max: config.params.get("t_max").and_then(|v| v.as_f64()),
        t_cap: config.number("t_cap"),
        points_per_period: config.number("points_per_period"),
        ..DecayRunOptions::default()
    }
}

/// `t, pop_a, pop_a_smoothed` rows; each sample carries the average of the
/// modulation period it falls in (NaN in a trailing partial period, and the
/// raw population when no averaging was done).
fn decay_rows(run: &DecayRun, max_rows: usize) -> Vec<Vec<f64>> {
    let pops = &run.populations;
    let width = match (run.period, pops.len() > 1) {
        (Some(p), true) => Some(((p / (pops[1].0 - pops[0].0)).round() as usize).max(1)),
        _ => None,
    };
    let rows: Vec<Vec<f64>> = pops
        .iter()
        .enumerate()
        .map(|(i, &(t, y))| {
            let smooth = match (&run.smoothed, width) {
                (Some(s), Some(w)) => s.get(i / w).map_or(f64::NAN, |p| p.1),
                _ => y,
            };
            vec![t, y, smooth]
        })
        .collect();
    decimate(&rows, max_rows)
}

fn decay_extras(run: &DecayRun) -> Vec<(String, String)> {
    vec![
        ("t_end".into(), format!("{}", run.grid.t_max())),
        ("dt".into(), format!("{:e}", run.grid.dt())),
        ("fit_window".into(), format!("[{}, {}]", run.window.0, run.window.1)),
        ("fitted_rate".into(), format!("{:e}", run.fit.rate)),
        ("predicted_rate".into(), format!("{:e}", run.predicted_rate)),
    ]
}

fn two_level_run(config: &ScenarioConfig) -> Result<RunReport, CliError> {
    let m = modulation_index(config)?;
    let params = TwoLevelParams::new(
        config.number("g"),
        config.number("kappa"),
        modulation(config, m, config.number("nu"))?,
    )?;
    let run = two_level::run_decay(&params, &decay_options(config))?;
    let rows = decay_rows(&run, config.integer("max_rows") as usize);
    let path = write_csv(
        &config.out_dir,
        "two-level.csv",
        config,
        &decay_extras(&run),
        &["t", "pop_a", "pop_a_smoothed"],
        &rows,
    )?;
    Ok(RunReport {
        lines: vec![format!(
            "two-level: fitted decay rate {:.6e} (sideband sum predicts {:.6e}) -> {}",
            run.fit.rate,
            run.predicted_rate,
            path.display()
        )],
        files: vec![path],
        failures: 0,
    })
}

fn fig2(config: &ScenarioConfig) -> Result<RunReport, CliError> {
    let m = modulation_index(config)?;
    let (g, kappa) = (config.number("g"), config.number("kappa"));
    let mut cases: Vec<(Option<f64>, TwoLevelParams)> = Vec::new();
    for x in config.numbers("nu_over_pi") {
        cases.push((Some(x), TwoLevelParams::new(g, kappa, modulation(config, m, x * PI * g)?)?));
    }
    if config.flag("baseline") {
        cases.push((None, TwoLevelParams::new(g, kappa, ModulationParams::none())?));
    }
    let options = decay_options(config);
    let runs = cases
        .par_iter()
        .map(|(_, p)| two_level::run_decay(p, &options))
        .collect::<Result<Vec<_>, _>>()?;

    let max_rows = config.integer("max_rows") as usize;
    let mut report = RunReport::default();
    for ((x, params), run) in cases.iter().zip(&runs) {
        let (name, label) = match x {
            Some(x) => (format!("fig2_nu_over_pi_{x}.csv"), format!("ν/πg = {x}")),
            None => ("fig2_unmodulated.csv".to_string(), "m = 0".to_string()),
        };
        let mut extras = decay_extras(run);
        let mut line = format!(
            "fig2 {label}: fitted decay rate {:.4e}, sideband sum {:.4e}",
            run.fit.rate, run.predicted_rate
        );
        if let Some(x) = x {
            extras.insert(0, ("nu".into(), format!("{}", x * PI * g)));
            if params.modulation.is_suppression_tuned() {
                let modified =
                    2.0 * two_level::golden_rule_rate(params)?.rate * two_level::suppression_ratio(params)?;
                extras.push(("modified_rate_formula".into(), format!("{modified:e}")));
                line.push_str(&format!(", first-sideband formula {modified:.4e}"));
            }
        }
        let path = write_csv(
            &config.out_dir,
            &name,
            config,
            &extras,
            &["t", "pop_a", "pop_a_smoothed"],
            &decay_rows(run, max_rows),
        )?;
        report.lines.push(format!("{line} -> {}", path.display()));
        report.files.push(path);
    }
    Ok(report)
}

fn spin_bath_run(config: &ScenarioConfig) -> Result<RunReport, CliError> {
    let m = modulation_index(config)?;
    let bath = BathParams::new(
        config.number("kappa_b"),
        config.number("omega"),
        config.number("c0_minus_plus"),
        config.number("c0_plus_minus"),
    )?;
    let mut spin = SpinParams::new(config.number("omega0"), modulation(config, m, config.number("nu"))?)?;
    spin.counter_rotating = config.flag("counter_rotating");
    let gd = spin_bath::relaxation_coefficient(&bath, &spin, Channel::Down)?;
    let gu = spin_bath::relaxation_coefficient(&bath, &spin, Channel::Up)?;
    let rho_ee = config.number("rho_ee");
    let rho0 = DensityMatrix2::new(
        rho_ee,
        1.0 - rho_ee,
        Complex64::new(config.number("rho_eg_re"), config.number("rho_eg_im")),
    )?;
    let lifetime = spin_bath::coherence_lifetime(gd, gu)?;
    let t_max = match (config.optional_number("t_max"), lifetime) {
        (Some(t), _) => t,
        (None, CoherenceLifetime::Finite(tau)) => 5.0 * tau,
        (None, CoherenceLifetime::Unbounded) => {
            return Err(CliError::Parse(
                "key \"t_max\": required when the relaxation rates vanish".into(),
            ))
        }
    };
    let grid = TimeGrid::resolving(
        t_max,
        spin_bath::generator_scale(gd, gu),
        config.number("points_per_period"),
    )?;
    let stride = (grid.n_steps() / config.integer("max_rows") as usize).max(1);
    let traj = spin_bath::evolve_rho_strided(gd, gu, &rho0, &grid, stride)?;
    let rows: Vec<Vec<f64>> = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, r)| vec![t, r.rho_ee, r.rho_gg, r.rho_eg.re, r.rho_eg.im])
        .collect();
    let steady = spin_bath::steady_state_population(gd, gu).ok();
    let extras = vec![
        ("gamma_down".to_string(), format!("{:e} {:+e}i", gd.re, gd.im)),
        ("gamma_up".to_string(), format!("{:e} {:+e}i", gu.re, gu.im)),
        ("coherence_lifetime".to_string(), format!("{:e}", lifetime.time())),
        (
            "steady_state_rho_ee".to_string(),
            steady.map_or("undefined".into(), |s| format!("{s:e}")),
        ),
        ("dt".to_string(), format!("{:e}", grid.dt())),
    ];
    let path = write_csv(
        &config.out_dir,
        "spin-bath.csv",
        config,
        &extras,
        &["t", "rho_ee", "rho_gg", "rho_eg_re", "rho_eg_im"],
        &rows,
    )?;
    Ok(RunReport {
        lines: vec![format!(
            "spin-bath: γ_down = {:.6e}{:+.6e}i, γ_up = {:.6e}{:+.6e}i, coherence lifetime {:.6e}, steady ρ_ee {} -> {}",
            gd.re,
            gd.im,
            gu.re,
            gu.im,
            lifetime.time(),
            steady.map_or("undefined".into(), |s| format!("{s:.6}")),
            path.display()
        )],
        files: vec![path],
        failures: 0,
    })
}

fn heating_params(config: &ScenarioConfig, m: f64, nu: f64) -> Result<HeatingParams, CliError> {
    Ok(HeatingParams::new(
        config.number("omega0"),
        config.number("kappa"),
        config.number("omega_field"),
        modulation(config, m, nu)?,
    )?
    .with_trunc_tol(config.number("trunc_tol"))?)
}

fn method(config: &ScenarioConfig) -> FidelityMethod {
    match config.text("method") {
        "mc" => FidelityMethod::MonteCarlo {
            n_traj: config.integer("n_traj") as usize,
            seed: config.seed,
        },
        _ => FidelityMethod::Analytic,
    }
}

fn output_grid(config: &ScenarioConfig) -> Result<TimeGrid, CliError> {
    Ok(TimeGrid::new(config.number("t_max"), config.number("dt"), 0.0)?)
}

fn ion_heating_run(config: &ScenarioConfig) -> Result<RunReport, CliError> {
    let m = modulation_index(config)?;
    let params = heating_params(config, m, config.number("nu"))?;
    let grid = output_grid(config)?;
    let times: Vec<f64> = grid.times().collect();
    let method = method(config);
    let moments = match method {
        FidelityMethod::Analytic => times
            .par_iter()
            .map(|&t| ion_heating::heating_moments_analytic(&params, t))
            .collect::<Result<Vec<_>, _>>()?,
        FidelityMethod::MonteCarlo { n_traj, seed } => {
            ion_heating::heating_moments_mc(&params, &grid, n_traj, seed)?
        }
    };
    let mc = matches!(method, FidelityMethod::MonteCarlo { .. });
    let mut rows = Vec::with_capacity(times.len());
    for (&t, mo) in times.iter().zip(&moments) {
        let f = ion_heating::fidelity(mo)?;
        let mut row = vec![t, f, mo.mean_abs_v2, mo.mean_v2.re, mo.mean_v2.im];
        if mc {
            row.extend([mo.stderr_abs, mo.stderr_v2, ion_heating::fidelity_sigma(mo)]);
        }
        rows.push(row);
    }
    let mut columns = vec!["t", "F", "abs_v2", "v2_re", "v2_im"];
    if mc {
        columns.extend(["abs_v2_stderr", "v2_stderr", "F_sigma"]);
    }
    let final_f = rows.last().map_or(1.0, |r| r[1]);
    let path = write_csv(&config.out_dir, "ion-heating.csv", config, &[], &columns, &rows)?;
    Ok(RunReport {
        lines: vec![format!(
            "ion-heating: F({}) = {final_f:.6} -> {}",
            grid.t_max(),
            path.display()
        )],
        files: vec![path],
        failures: 0,
    })
}

fn fig3(config: &ScenarioConfig) -> Result<RunReport, CliError> {
    let m = modulation_index(config)?;
    let grid = output_grid(config)?;
    let method = method(config);
    let baseline = heating_params(config, 0.0, 0.0)?;
    let mut cases: Vec<(Option<f64>, HeatingParams)> = Vec::new();
    for nu in config.numbers("nu") {
        cases.push((Some(nu), heating_params(config, m, nu)?));
    }
    cases.push((None, baseline));

    let mut report = RunReport::default();
    let base_curve = ion_heating::fidelity_curve(&baseline, &grid, method)?;
    let base_final = *base_curve.fidelity.last().unwrap();
    for (nu, params) in &cases {
        let curve = match nu {
            Some(_) => ion_heating::fidelity_curve(params, &grid, method)?,
            None => base_curve.clone(),
        };
        let mut columns = vec!["t", "F"];
        if curve.band.is_some() {
            columns.extend(["F_lo", "F_hi"]);
        }
        let rows: Vec<Vec<f64>> = curve
            .times
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let mut row = vec![t, curve.fidelity[i]];
                if let Some(band) = &curve.band {
                    row.extend([band[i].0, band[i].1]);
                }
                row
            })
            .collect();
        let final_f = *curve.fidelity.last().unwrap();
        let (name, mut line, extras) = match nu {
            Some(nu) => {
                let (above, total) = stroboscopic_improvement(params, &baseline, *nu, grid.t_max())?;
                (
                    format!("fig3_nu_{nu}.csv"),
                    format!(
                        "fig3 ν = {nu}: F({}) = {final_f:.6} (unmodulated {base_final:.6}), above unmodulated at {above}/{total} stroboscopic times",
                        grid.t_max()
                    ),
                    vec![("nu_case".to_string(), format!("{nu}"))],
                )
            }
            None => (
                "fig3_unmodulated.csv".to_string(),
                format!("fig3 unmodulated: F({}) = {final_f:.6}", grid.t_max()),
                vec![("nu_case".to_string(), "unmodulated".to_string())],
            ),
        };
        let path = write_csv(&config.out_dir, &name, config, &extras, &columns, &rows)?;
        line.push_str(&format!(" -> {}", path.display()));
        report.lines.push(line);
        report.files.push(path);
    }
    Ok(report)
}

/// Counts stroboscopic times `k 2π/ν <= t_max` where the modulated analytic
/// fidelity exceeds the unmodulated one.
fn stroboscopic_improvement(
    params: &HeatingParams,
    baseline: &HeatingParams,
    nu: f64,
    t_max: f64,
) -> Result<(usize, usize), CliError> {
    let period = 2.0 * PI / nu;
    let mut above = 0;
    let mut total = 0;
    let mut k = 1;
    while k as f64 * period <= t_max * (1.0 + 1e-12) {
        let t = k as f64 * period;
        let f = ion_heating::fidelity(&ion_heating::heating_moments_analytic(params, t)?)?;
        let f0 = ion_heating::fidelity(&ion_heating::heating_moments_analytic(baseline, t)?)?;
        total += 1;
        if f > f0 {
            above += 1;
        }
        k += 1;
    }
    Ok((above, total))
}

fn selftest_run() -> RunReport {
    let checks = selftest::run_all();
    let mut report = RunReport::default();
    for c in &checks {
        report.lines.push(format!(
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        ));
    }
    report.failures = checks.iter().filter(|c| !c.passed).count();
    report.lines.push(format!(
        "selftest: {}/{} checks passed",
        checks.len() - report.failures,
        checks.len()
    ));
    report
}
