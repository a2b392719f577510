use std::fs;
use std::io::Write;
use std::path::Path;

use qpcircle::birkhoff::{classify_orbit, default_checkpoints, Classification};
use qpcircle::continuation::{continue_family, ContinuationConfig, ContinuationRecord, StopReason};
use qpcircle::projection::project_points;
use qpcircle::recipe::{default_centers, run_recipe, RecipeConfig};
use qpcircle::solver::unfolding_diagnostics;
use qpcircle::{iterate_orbit, CircleSystem, MapSpec};
use serde_json::json;

use crate::args::{CircleArgs, ClassifyArgs, ContinueArgs, VerifyArgs};
use crate::files::{is_family_file, stop_reason_name, CircleFile, FamilyFile, Provenance};
use crate::CliError;

/// Checkpoints printed by `classify`, cut at the orbit length.
pub const TABLE_CHECKPOINTS: [usize; 11] = [100, 500, 1000, 5000, 10_000, 50_000, 100_000, 110_000, 120_000, 150_000, 200_000];

/// Monitored Sobolev orders echoed during continuation.
const ECHO_ORDERS: [f64; 3] = [1.0, 5.0, 10.0];

pub fn checkpoints_for(m: usize) -> Vec<usize> {
    let mut v: Vec<usize> = TABLE_CHECKPOINTS.iter().copied().filter(|&c| c < m).collect();
    v.push(m);
    if v.len() < 3 {
        default_checkpoints(m)
    } else {
        v
    }
}

fn write_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::io(path, e)
}

fn stdout_err(e: std::io::Error) -> CliError {
    CliError::Io { path: "<output>".into(), source: e }
}

pub fn classify(args: &ClassifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = args.map.spec()?;
    if args.period == 0 || args.m < 8 {
        return Err(CliError::Usage("need --period >= 1 and --m >= 8".into()));
    }
    let orbit = iterate_orbit(&spec, args.seed, args.m, args.period)?;
    let center = match args.center {
        Some(c) => c,
        None => default_centers(&orbit, args.period)?[0],
    };
    let angles = project_points(&orbit.points, center)?;
    let class = classify_orbit(&angles, &checkpoints_for(args.m), args.tol)?;
    let (label, est) = match &class {
        Classification::Quasiperiodic(e) => ("quasiperiodic", e),
        Classification::NonConvergent(e) => ("non-convergent", e),
    };

    writeln!(out, "map {} alpha {} seed {},{} period {}", spec.family, spec.alpha, args.seed.x, args.seed.y, args.period)
        .map_err(stdout_err)?;
    writeln!(out, "{:>10}  rho_M", "M").map_err(stdout_err)?;
    for (m, rho) in &est.history {
        writeln!(out, "{m:>10}  {rho:.15}").map_err(stdout_err)?;
    }
    writeln!(out, "spread {:.3e}", est.spread).map_err(stdout_err)?;
    writeln!(out, "classification {label} rho {:.15}", est.rho).map_err(stdout_err)?;

    if let Some(path) = &args.json {
        let report = json!({
            "map": spec.family.name(),
            "alpha": spec.alpha,
            "seed": [args.seed.x, args.seed.y],
            "center": [center.x, center.y],
            "period": args.period,
            "classification": label,
            "rho": est.rho,
            "spread": est.spread,
            "history": est.history,
        });
        fs::write(path, format!("{report}\n")).map_err(write_err(path))?;
    }
    match class {
        Classification::Quasiperiodic(_) => Ok(()),
        Classification::NonConvergent(e) => Err(CliError::NotQuasiperiodic(format!("checkpoint spread {:e}", e.spread))),
    }
}

pub fn recipe_config(args: &CircleArgs) -> Result<RecipeConfig<f64>, CliError> {
    let spec = args.map.spec()?;
    let mut cfg = RecipeConfig::new(spec, args.seed, args.period);
    cfg.n_modes = args.n_modes;
    if let Some(v) = args.max_modes {
        cfg.max_modes = v;
    }
    if let Some(v) = args.m_classify {
        cfg.m_classify = v;
    }
    if let Some(v) = args.m_rho {
        cfg.m_rho = v;
    }
    if let Some(v) = args.m_coeff {
        cfg.m_coeff = v;
    }
    cfg.newton.form = args.form.into();
    Ok(cfg)
}

pub fn circle(args: &CircleArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = recipe_config(args)?;
    let result = run_recipe(&cfg)?;
    let provenance = Provenance {
        seed: Some([args.seed.x, args.seed.y]),
        m_classify: Some(cfg.m_classify),
        m_rho: Some(cfg.m_rho),
        m_coeff: Some(cfg.m_coeff),
        ..Provenance::now()
    };
    let file = CircleFile::from_system(&cfg.spec, &result.system, &result.report.unfolding, result.report.final_defect, provenance);
    file.write(&args.out)?;

    writeln!(out, "rho {:.15} (period map {:.15})", result.system.rho, result.rho.rho).map_err(stdout_err)?;
    writeln!(out, "d {} N {} N0 {} initial defect {:.3e}", result.system.d(), result.n, result.n0, result.initial_defect)
        .map_err(stdout_err)?;
    for (i, e) in result.report.defect_history.iter().enumerate() {
        writeln!(out, "newton {i:>2}  defect {e:.3e}").map_err(stdout_err)?;
    }
    writeln!(out, "beta {:.3e} final defect {:.3e}", result.report.unfolding.beta, result.report.final_defect).map_err(stdout_err)?;
    if result.report.condition_warning {
        writeln!(out, "warning: small pivots in the linear solves").map_err(stdout_err)?;
    }
    if let Some(path) = &args.plot {
        write_plot(path, &result.system, args.samples, args.mod_2pi)?;
    }
    Ok(())
}

/// Writes `samples` points per component as `theta,x,y,component_index`.
pub fn write_plot(path: &Path, system: &CircleSystem<f64>, samples: usize, mod_2pi: bool) -> Result<(), CliError> {
    if samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    let mut text = String::from("theta,x,y,component_index\n");
    for (j, k) in system.circles.iter().enumerate() {
        for i in 0..samples {
            let theta = i as f64 / samples as f64;
            let p = k.eval(theta)?;
            let x = if mod_2pi { p.x.rem_euclid(std::f64::consts::TAU) } else { p.x };
            text.push_str(&format!("{theta},{x},{},{j}\n", p.y));
        }
    }
    fs::write(path, text).map_err(write_err(path))
}

pub fn continuation_config(args: &ContinueArgs) -> ContinuationConfig<f64> {
    ContinuationConfig {
        initial_step: args.step,
        min_step: args.min_step,
        max_steps: args.max_steps,
        n_max: args.n_max,
        record_tol: args.record_tol,
        blowup_factor: args.blowup_factor,
        ..ContinuationConfig::default()
    }
}

pub fn continue_cmd(args: &ContinueArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.direction == 0 {
        return Err(CliError::Usage("--direction must be +1 or -1".into()));
    }
    let input = CircleFile::read(&args.input)?;
    let spec = input.spec()?;
    let system = input.system()?;
    let cfg = continuation_config(args);
    let start = ContinuationRecord::new(&spec, system.clone(), &cfg.sobolev_orders, system.order());
    if !(start.defect <= cfg.record_tol) {
        return Err(CliError::Verify(format!("start circle defect {:e} exceeds {:e}", start.defect, cfg.record_tol)));
    }
    let family = continue_family(&spec, &start, &cfg, args.direction)?;
    let provenance = Provenance { created_unix: Provenance::now().created_unix, ..input.provenance.clone() };
    let file = FamilyFile::from_family(&spec, &family, args.direction.signum(), &provenance);
    file.write(&args.out)?;

    writeln!(out, "{:>5}  {:>18}  {:>9}  {:>4}  {:>10}  {:>10}  {:>10}", "step", "rho", "defect", "N", "H1", "H5", "H10")
        .map_err(stdout_err)?;
    for (i, r) in family.records.iter().enumerate() {
        let pick = |d: f64| r.sobolev.iter().find(|(o, _)| *o == d).map_or(f64::NAN, |&(_, v)| v);
        let [s1, s5, s10] = ECHO_ORDERS.map(pick);
        writeln!(out, "{i:>5}  {:>18.15}  {:>9.2e}  {:>4}  {s1:>10.3e}  {s5:>10.3e}  {s10:>10.3e}", r.rho, r.defect, r.system.order())
            .map_err(stdout_err)?;
    }
    writeln!(out, "stop {} after {} solves", stop_reason_name(family.stop_reason), family.attempts).map_err(stdout_err)?;
    if family.stop_reason == StopReason::SolverHardFailure {
        return Err(CliError::Verify("continuation ended with a solver failure".into()));
    }
    Ok(())
}

/// Outcome of one verification check.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub limit: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value <= self.limit
    }
}

/// Recomputes defect, symmetry, unfolding and area checks for one stored circle system.
pub fn check_circle(file: &CircleFile, args: &VerifyArgs) -> Result<Vec<Check>, CliError> {
    let spec: MapSpec<f64> = file.spec()?;
    let system = file.system()?;
    let sigma = system.closing_rotation();
    let area = system
        .circles
        .iter()
        .map(|k| {
            let (a1, _, a3) = unfolding_diagnostics(k, &spec, sigma);
            if a1 == 0.0 {
                f64::INFINITY
            } else {
                ((a1 - a3) / a1).abs()
            }
        })
        .fold(0.0, f64::max);
    Ok(vec![
        Check { name: "defect", value: system.defect(&spec), limit: args.defect_tol },
        Check { name: "symmetry", value: system.symmetry_residual(), limit: args.symmetry_tol },
        Check { name: "unfolding", value: file.unfolding().max_abs(), limit: args.unfolding_tol },
        Check { name: "area", value: area, limit: args.area_tol },
    ])
}

fn report(checks: &[Check], label: &str, out: &mut dyn Write) -> Result<Vec<String>, CliError> {
    let mut failed = Vec::new();
    for c in checks {
        let verdict = if c.passed() { "PASS" } else { "FAIL" };
        writeln!(out, "{verdict} {label}{} {:.3e} (limit {:.1e})", c.name, c.value, c.limit).map_err(stdout_err)?;
        if !c.passed() {
            failed.push(format!("{label}{}", c.name));
        }
    }
    Ok(failed)
}

pub fn verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut failed = Vec::new();
    if is_family_file(&args.input)? {
        let family = FamilyFile::read(&args.input)?;
        let mut last_rho: Option<f64> = None;
        let sign = family.header.direction.signum() as f64;
        for (i, r) in family.records.iter().enumerate() {
            failed.extend(report(&check_circle(&r.circle, args)?, &format!("record {i} "), out)?);
            if let Some(prev) = last_rho {
                if !((r.circle.rho - prev) * sign > 0.0) {
                    writeln!(out, "FAIL record {i} rho not monotone").map_err(stdout_err)?;
                    failed.push(format!("record {i} monotone"));
                }
            }
            last_rho = Some(r.circle.rho);
        }
    } else {
        let file = CircleFile::read(&args.input)?;
        failed.extend(report(&check_circle(&file, args)?, "", out)?);
    }
    if failed.is_empty() {
        writeln!(out, "PASS").map_err(stdout_err)?;
        Ok(())
    } else {
        writeln!(out, "FAIL").map_err(stdout_err)?;
        Err(CliError::Verify(failed.join(", ")))
    }
}
