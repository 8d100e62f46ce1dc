//! Subcommand bodies. Each writes its outputs, then reports check failures.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use mnls_core::analysis::{
    fit_decay_2d, fit_decay_exponential, gaussian_bound_profile, kato_bound_ratio, second_moment,
    sweep_energy, Verdict, GAUSSIAN_BOUND_MARGIN,
};
use mnls_core::grid::{ComplexField, Grid};
use mnls_core::io::{read_dump, write_dump, write_report};
use mnls_core::magnetics::MagneticData;
use mnls_core::solver::{minimize_groundstate, solve_decoupled, solve_radial, GroundstateResult};
use mnls_core::spectrum::{
    spectrum_convergence_sweep, top_eigenvalues_with, unit_eigenspace_angle, EigenOptions,
    SpectrumRow, SpectrumTable,
};
use mnls_core::variational::FunctionalParams;
use mnls_core::verify::{run_invariant_suite, VerifyOptions};
use serde::Serialize;

use crate::config::{
    DecayConfig, RadialConfig, SolveConfig, SpectrumConfig, SweepConfig, VerifyConfig,
};
use crate::error::{CliError, CliResult};

/// Nondegeneracy tolerances at zero field.
const TOP_EIGENVALUE_TOL: f64 = 1e-2;
const UNIT_EIGENVALUE_TOL: f64 = 2e-2;
const UNIT_ANGLE_DEG: f64 = 5.0;
/// Eigenvalue deviations below this multiple of the eigen tolerance are noise.
const NOISE_FLOOR_FACTOR: f64 = 10.0;
/// Eigenvalues compared across the convergence sweep.
const SWEEP_EIGENVALUES: usize = 4;
const CURVATURE_TOL: f64 = 0.05;
const CONVEXITY_TOL: f64 = 1e-4;
const FLATNESS_TOL: f64 = 0.05;
const CONTROL_RATIO: f64 = 5.0;
const KATO_ETA: f64 = 0.1;

#[derive(Serialize)]
struct Report<'a, C, R> {
    command: &'a str,
    config: &'a C,
    result: R,
    verdicts: &'a [Verdict],
    elapsed_seconds: f64,
}

fn echo<C: Serialize>(command: &str, cfg: &C) {
    eprintln!(
        "mnls {command} config: {}",
        serde_json::to_string(cfg).unwrap_or_default()
    );
}

fn report_path(report: &Option<PathBuf>, out: &Path) -> PathBuf {
    report.clone().unwrap_or_else(|| out.with_extension("json"))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Writes the report, prints the verdicts, and fails when any verdict did.
fn finish<C: Serialize, R: Serialize>(
    command: &str,
    cfg: &C,
    result: R,
    verdicts: &[Verdict],
    path: &Path,
    started: Instant,
) -> CliResult<()> {
    let report = Report {
        command,
        config: cfg,
        result,
        verdicts,
        elapsed_seconds: started.elapsed().as_secs_f64(),
    };
    write_report(path, &report)?;
    for v in verdicts {
        println!(
            "{} {} statistic={:.6e} tolerance={:.6e}",
            if v.pass { "PASS" } else { "FAIL" },
            v.name,
            v.statistic,
            v.tolerance
        );
    }
    let failed: Vec<&str> = verdicts
        .iter()
        .filter(|v| !v.pass)
        .map(|v| v.name.as_str())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::CheckFailed(failed.join(", ")))
    }
}

fn flag_bool(pass: bool) -> f64 {
    if pass {
        1.0
    } else {
        0.0
    }
}

pub fn radial(cfg: RadialConfig) -> CliResult<()> {
    echo("radial", &cfg);
    let started = Instant::now();
    let p = cfg
        .p
        .ok_or_else(|| CliError::Usage("--p is required".into()))?;
    let fp = FunctionalParams::new(p, cfg.dim)?;
    if !(cfg.rmax.is_finite() && cfg.rmax > 0.0) {
        return Err(CliError::Usage(format!(
            "--rmax {} must be positive",
            cfg.rmax
        )));
    }
    let mesh = cfg.mesh.unwrap_or((cfg.rmax / 0.01).round() as usize);
    let prof = solve_radial(cfg.dim, &fp, cfg.rmax, mesh)?;
    let mut csv = String::from("r,u,du\n");
    for ((r, u), du) in prof.r.iter().zip(&prof.u).zip(&prof.du) {
        csv.push_str(&format!("{r},{u:.15e},{du:.15e}\n"));
    }
    write_text(&cfg.out, &csv)?;
    println!(
        "u0(0) = {:.12} mass = {:.10} second_moment = {:.10} E(0) = {:.10}",
        prof.center_value, prof.mass, prof.second_moment, prof.energy
    );
    #[derive(Serialize)]
    struct Out<'a> {
        profile: &'a mnls_core::solver::RadialProfile,
        ode_residual: f64,
    }
    let result = Out {
        profile: &prof,
        ode_residual: prof.ode_residual(),
    };
    finish(
        "radial",
        &cfg,
        result,
        &[],
        &report_path(&cfg.report, &cfg.out),
        started,
    )
}

#[derive(Serialize)]
struct SolveOut {
    #[serde(flatten)]
    summary: mnls_core::solver::GroundstateSummary,
    mass: f64,
    second_moment: f64,
}

fn solve_out(gs: &GroundstateResult) -> SolveOut {
    SolveOut {
        summary: gs.summary(),
        mass: gs.field.norm_sq(),
        second_moment: second_moment(gs),
    }
}

pub fn solve(cfg: SolveConfig) -> CliResult<()> {
    echo("solve", &cfg);
    let started = Instant::now();
    let fp = FunctionalParams::new(cfg.p, cfg.dim)?;
    let grid = Grid::new(cfg.dim, cfg.half_extent, cfg.n)?;
    let m = MagneticData::uniform(cfg.dim, cfg.b)?;
    let gs = if cfg.decoupled {
        solve_decoupled(&m, &fp, &grid, &cfg.solver)?
    } else {
        minimize_groundstate(&m, &fp, &grid, &cfg.solver)?
    };
    write_dump(&cfg.out, &gs.field, &m, cfg.p)?;
    println!(
        "energy = {:.12} quotient = {:.12} residual = {:.3e} iterations = {}",
        gs.energy, gs.quotient, gs.residual, gs.iterations
    );
    finish(
        "solve",
        &cfg,
        solve_out(&gs),
        &[],
        &report_path(&cfg.report, &cfg.out),
        started,
    )
}

pub fn sweep(cfg: SweepConfig) -> CliResult<()> {
    echo("sweep", &cfg);
    let started = Instant::now();
    let fp = FunctionalParams::new(cfg.p, cfg.dim)?;
    let grid = Grid::new(cfg.dim, cfg.half_extent, cfg.n)?;
    let curve = sweep_energy(&cfg.b, &fp, &grid, &cfg.solver)?;
    write_text(&cfg.out, &curve.to_csv())?;
    let e0 = curve.energy_at_zero();
    let verdicts = vec![
        Verdict::at_least("minimum-at-zero", flag_bool(curve.minimum_at_zero), 1.0),
        Verdict::at_least(
            "convexity-margin",
            curve.convexity_margin,
            -CONVEXITY_TOL * e0,
        ),
        Verdict::at_least("nondecreasing", flag_bool(curve.nondecreasing), 1.0),
        Verdict::at_most("curvature-mismatch", curve.c2_mismatch(), CURVATURE_TOL),
    ];
    finish(
        "sweep",
        &cfg,
        &curve,
        &verdicts,
        &report_path(&cfg.report, &cfg.out),
        started,
    )
}

pub fn spectrum(cfg: SpectrumConfig) -> CliResult<()> {
    echo("spectrum", &cfg);
    let started = Instant::now();
    let fp = FunctionalParams::new(cfg.p, cfg.dim)?;
    let grid = Grid::new(cfg.dim, cfg.half_extent, cfg.n)?;
    let path = report_path(&cfg.report, &cfg.out);
    match cfg.b.as_slice() {
        [] => Err(CliError::Usage("--b needs at least one value".into())),
        [b] => {
            let m = MagneticData::uniform(cfg.dim, *b)?;
            let gs = minimize_groundstate(&m, &fp, &grid, &cfg.solver)?;
            let opts = EigenOptions {
                seed: cfg.solver.seed,
                ..EigenOptions::new(cfg.tol)
            };
            let spec = top_eigenvalues_with(&gs.field, &m, &fp, cfg.k, &opts)?;
            let table = SpectrumTable {
                rows: vec![SpectrumRow {
                    b: *b,
                    eigenvalues: spec.eigenvalues.clone(),
                    residuals: spec.rayleigh_residuals.clone(),
                    energy: gs.energy,
                }],
                tol: cfg.tol,
            };
            write_text(&cfg.out, &table.to_csv())?;
            let mut verdicts = Vec::new();
            let units = cfg.dim + 1;
            if *b == 0.0 && spec.eigenvalues.len() > units {
                verdicts.push(Verdict::at_most(
                    "top-eigenvalue",
                    (spec.eigenvalues[0] - (cfg.p - 1.0)).abs(),
                    TOP_EIGENVALUE_TOL,
                ));
                let unit = spec.eigenvalues[1..=units]
                    .iter()
                    .map(|l| (l - 1.0).abs())
                    .fold(0.0, f64::max);
                verdicts.push(Verdict::at_most(
                    "unit-eigenvalues",
                    unit,
                    UNIT_EIGENVALUE_TOL,
                ));
                let angle = unit_eigenspace_angle(&spec, &gs.field, &m)?;
                verdicts.push(Verdict::at_most(
                    "unit-eigenspace-angle-deg",
                    angle,
                    UNIT_ANGLE_DEG,
                ));
            }
            finish("spectrum", &cfg, &spec, &verdicts, &path, started)
        }
        list => {
            let table = spectrum_convergence_sweep(list, &fp, &grid, &cfg.solver, cfg.tol)?;
            write_text(&cfg.out, &table.to_csv())?;
            let violation =
                table.monotonicity_violation(SWEEP_EIGENVALUES, NOISE_FLOOR_FACTOR * cfg.tol)?;
            let verdicts = vec![Verdict::at_most(
                "deviation-shrinks-with-b",
                violation.max(0.0),
                0.0,
            )];
            finish("spectrum", &cfg, &table, &verdicts, &path, started)
        }
    }
}

pub fn decay(cfg: DecayConfig) -> CliResult<()> {
    echo("decay", &cfg);
    let started = Instant::now();
    let (field, m): (ComplexField, MagneticData) = match &cfg.input {
        Some(path) => {
            let dump = read_dump(path)?;
            (dump.field, dump.magnetic)
        }
        None => {
            let fp = FunctionalParams::new(cfg.p, cfg.dim)?;
            let grid = Grid::new(cfg.dim, cfg.half_extent, cfg.n)?;
            let m = MagneticData::uniform(cfg.dim, cfg.b)?;
            (minimize_groundstate(&m, &fp, &grid, &cfg.solver)?.field, m)
        }
    };
    let path = report_path(&cfg.report, &cfg.out);
    let b = m.strength();
    if field.grid().dim() == 2 {
        let law = fit_decay_2d(&field, b, cfg.window)?;
        let control = fit_decay_exponential(&field, cfg.window)?;
        let kato = kato_bound_ratio(&field, cfg.window, KATO_ETA)?;
        write_text(&cfg.out, &law.to_csv())?;
        let verdicts = vec![
            Verdict::at_most("law-flatness", law.residual, FLATNESS_TOL),
            Verdict::at_least(
                "control-ratio",
                control.residual / law.residual,
                CONTROL_RATIO,
            ),
            Verdict::at_most("kato-bound", kato, 1.0),
        ];
        #[derive(Serialize)]
        struct Out<'a> {
            b: f64,
            law: &'a mnls_core::analysis::DecayFit,
            control: &'a mnls_core::analysis::DecayFit,
            kato_ratio: f64,
        }
        finish(
            "decay",
            &cfg,
            Out {
                b,
                law: &law,
                control: &control,
                kato_ratio: kato,
            },
            &verdicts,
            &path,
            started,
        )
    } else {
        let axis = m
            .axis()
            .ok_or_else(|| CliError::Usage("3d field without an axis".into()))?;
        let bound = gaussian_bound_profile(&field, axis)?;
        let mut csv = String::from("r_perp,compensated_max\n");
        for (r, v) in &bound.shells {
            csv.push_str(&format!("{r},{v:.10e}\n"));
        }
        write_text(&cfg.out, &csv)?;
        let verdicts = vec![Verdict::at_most(
            "gaussian-bound",
            bound.statistic,
            GAUSSIAN_BOUND_MARGIN * bound.axis_value,
        )];
        finish("decay", &cfg, &bound, &verdicts, &path, started)
    }
}

pub fn verify(cfg: VerifyConfig) -> CliResult<()> {
    echo("verify", &cfg);
    let started = Instant::now();
    let opts = VerifyOptions {
        quick: cfg.quick,
        seed: cfg.seed,
        ..VerifyOptions::default()
    };
    let verdicts = run_invariant_suite(&opts)?;
    let path = cfg
        .report
        .clone()
        .unwrap_or_else(|| PathBuf::from("verify.json"));
    #[derive(Serialize)]
    struct Out {
        checks: usize,
        failed: usize,
    }
    let out = Out {
        checks: verdicts.len(),
        failed: verdicts.iter().filter(|v| !v.pass).count(),
    };
    finish("verify", &cfg, out, &verdicts, &path, started)
}
