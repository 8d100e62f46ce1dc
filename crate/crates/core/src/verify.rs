//! Invariant suite run by `mnls verify`.
//!
//! Every check returns one or more [`Verdict`]s; the suite passes when all do.
//! The quick preset uses 65² and 49³ grids, the full preset 129² and 65³.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{
    fit_decay_2d, fit_decay_exponential, gaussian_bound_3d, kato_bound_ratio, monotonicity_defect,
    sweep_energy, symmetry_defect, Verdict,
};
use crate::error::Result;
use crate::grid::{
    gradient_fd, inner_product, integrate, laplacian_fd, ComplexField, Grid, ScalarField,
};
use crate::magnetics::{
    covariant_gradient, covariant_gradient_linear, gauge_transform, magnetic_translate,
    potential_apply, Hamiltonian, LinearPotential, MagneticData,
};
use crate::solver::{minimize_groundstate, GroundstateResult, SolverConfig};
use crate::spectrum::{linearized_operator_apply, top_eigenvalues};
use crate::variational::{
    diamagnetic_gap, energy, euler_gradient, ground_energy_from_quotient, nehari_scale,
    quadratic_form, rayleigh_quotient, FunctionalParams,
};

pub const GRADIENT_TOL: f64 = 1e-4;
pub const NEHARI_TOL: f64 = 1e-12;
pub const PHASE_TOL: f64 = 1e-12;
/// Quotient change under a lattice magnetic translation of a few nodes.
pub const TRANSLATION_TOL: f64 = 1e-2;
/// Observed refinement order accepted as second order.
pub const MIN_ORDER: f64 = 1.8;
/// Refinement-corrected diamagnetic gap, relative to ‖D_A u‖².
pub const DIAMAGNETIC_TOL: f64 = 1e-3;
/// Symmetry defects carry the O(h²) error of multilinear interpolation; the
/// tolerance is this constant times h².
pub const SYMMETRY_CONSTANT: f64 = 0.25;
/// Largest increase of |u| along a lattice ray, relative to max |u|.
pub const MONOTONICITY_TOL: f64 = 1e-8;
pub const EIGEN_TOL: f64 = 1e-8;
pub const SYNTHETIC_FIT_TOL: f64 = 1e-2;
pub const DECAY_RATIO: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyOptions {
    /// 65²/49³ grids when set, 129²/65³ otherwise.
    pub quick: bool,
    pub seed: u64,
    /// Fields drawn for the diamagnetic check.
    pub random_fields: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            quick: true,
            seed: 0,
            random_fields: 100,
        }
    }
}

impl VerifyOptions {
    pub fn points_2d(&self) -> usize {
        if self.quick {
            65
        } else {
            129
        }
    }

    pub fn points_3d(&self) -> usize {
        if self.quick {
            49
        } else {
            65
        }
    }
}

/// Sum of four Gaussian bumps with random centres, widths, amplitudes and
/// plane-wave phases.
pub fn smooth_random_field(g: &Grid, seed: u64) -> ComplexField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bumps: Vec<([f64; 3], f64, Complex64, [f64; 3])> = (0..4)
        .map(|_| {
            let c = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ];
            let w = rng.gen_range(0.6..1.2);
            let a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let k = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ];
            (c, w, a, k)
        })
        .collect();
    let dim = g.dim();
    ComplexField::from_fn(g, |x| {
        bumps
            .iter()
            .map(|(c, w, a, k)| {
                let r2: f64 = (0..dim).map(|j| (x[j] - c[j]).powi(2)).sum();
                let phase: f64 = (0..dim).map(|j| k[j] * x[j]).sum();
                a * Complex64::from_polar((-r2 / (w * w)).exp(), phase)
            })
            .sum()
    })
}

fn order(coarse: f64, fine: f64) -> f64 {
    if fine == 0.0 {
        return f64::INFINITY;
    }
    (coarse / fine).log2()
}

fn refined(n: usize) -> usize {
    2 * n - 1
}

struct Context {
    opts: VerifyOptions,
    fp2: FunctionalParams,
    fp3: FunctionalParams,
    m2: MagneticData,
    m3: MagneticData,
    g2: Grid,
    g3: Grid,
}

impl Context {
    fn new(opts: VerifyOptions) -> Result<Self> {
        Ok(Context {
            opts,
            fp2: FunctionalParams::new(4.0, 2)?,
            fp3: FunctionalParams::new(3.0, 3)?,
            m2: MagneticData::planar(0.3),
            m3: MagneticData::axial([0.0, 0.0, 0.3]),
            g2: Grid::new(2, 8.0, opts.points_2d())?,
            g3: Grid::new(3, 6.0, opts.points_3d())?,
        })
    }

    fn groundstate_2d(&self) -> Result<GroundstateResult> {
        minimize_groundstate(&self.m2, &self.fp2, &self.g2, &SolverConfig::default())
    }

    fn groundstate_3d(&self) -> Result<GroundstateResult> {
        minimize_groundstate(&self.m3, &self.fp3, &self.g3, &SolverConfig::default())
    }
}

type Check = fn(&Context) -> Result<Vec<Verdict>>;

/// Runs every check, concurrently on the current rayon pool, and returns the
/// verdicts in a fixed order.
pub fn run_invariant_suite(opts: &VerifyOptions) -> Result<Vec<Verdict>> {
    let ctx = Context::new(*opts)?;
    let checks: [Check; 12] = [
        grid_checks,
        grid_refinement,
        antisymmetry,
        diamagnetic,
        translation_and_gauge,
        functional_checks,
        solver_2d,
        solver_3d,
        spectrum_checks,
        decay_checks,
        energy_curve,
        synthetic_laws,
    ];
    let groups: Result<Vec<Vec<Verdict>>> = checks.par_iter().map(|check| check(&ctx)).collect();
    Ok(groups?.into_iter().flatten().collect())
}

fn grid_checks(ctx: &Context) -> Result<Vec<Verdict>> {
    let g = ctx.g2;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.opts.seed);
    let f = ScalarField::from_fn(&g, |_| rng.gen_range(-1.0..1.0));
    let extra = ScalarField::from_fn(&g, |_| rng.gen_range(0.0..1.0));
    let sum = ScalarField::from_values(
        &g,
        f.values()
            .iter()
            .zip(extra.values())
            .map(|(a, b)| a + b)
            .collect(),
    )?;
    let monotone = (integrate(&f)? - integrate(&sum)?).max(0.0);
    let linear = (integrate(&sum)? - integrate(&f)? - integrate(&extra)?).abs();

    let u = smooth_random_field(&g, ctx.opts.seed + 1);
    let v = smooth_random_field(&g, ctx.opts.seed + 2);
    let (uv, vu) = (inner_product(&u, &v)?, inner_product(&v, &u)?);
    let uu = inner_product(&u, &u)?;
    let scaled = inner_product(&u.scaled(Complex64::new(2.5, 0.0)), &v)?;
    let product = ((uv - vu).abs() + (scaled - 2.5 * uv).abs()) / uu;

    let quad = ComplexField::from_fn(&g, |x| {
        Complex64::new(x[0] * x[0] - 2.0 * x[0] * x[1] + 3.0, 0.5 * x[1] * x[1])
    });
    let affine = ComplexField::from_fn(&g, |x| Complex64::new(2.0 * x[0] - x[1] + 1.0, 0.5 * x[1]));
    let lap = laplacian_fd(&quad);
    let grad = gradient_fd(&affine);
    let mut exact = 0.0f64;
    for idx in (0..g.len()).filter(|&i| g.boundary_distance(i) >= 1) {
        exact = exact.max((lap.values()[idx] - Complex64::new(2.0, 1.0)).norm());
        exact = exact.max((grad.component(0)[idx] - Complex64::new(2.0, 0.0)).norm());
        exact = exact.max((grad.component(1)[idx] - Complex64::new(-1.0, 0.5)).norm());
    }
    Ok(vec![
        Verdict::at_most("grid.integrate-monotone-linear", monotone + linear, 1e-10),
        Verdict::at_most("grid.inner-product-symmetric-bilinear", product, 1e-12),
        Verdict::at_least("grid.inner-product-positive", uu, f64::MIN_POSITIVE),
        Verdict::at_most("grid.stencil-exactness", exact, 1e-9),
    ])
}

fn grid_refinement(ctx: &Context) -> Result<Vec<Verdict>> {
    let error = |n: usize| -> Result<f64> {
        let g = Grid::new(2, 6.0, n)?;
        let u = ComplexField::from_fn(&g, |x| {
            Complex64::new((-(x[0] * x[0] + x[1] * x[1])).exp(), 0.0)
        });
        let lap = laplacian_fd(&u);
        Ok((0..g.len())
            .filter(|&i| g.boundary_distance(i) >= 1)
            .map(|i| {
                let x = g.position(i);
                let r2 = x[0] * x[0] + x[1] * x[1];
                (lap.values()[i].re - (4.0 * r2 - 4.0) * (-r2).exp()).abs()
            })
            .fold(0.0, f64::max))
    };
    let n = ctx.opts.points_2d();
    Ok(vec![Verdict::at_least(
        "grid.laplacian-order",
        order(error(n)?, error(refined(n))?),
        MIN_ORDER,
    )])
}

fn antisymmetry(ctx: &Context) -> Result<Vec<Verdict>> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.opts.seed + 3);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let e: Vec<f64> = (0..3).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let m = MagneticData::axial([e[0], e[1], e[2]]);
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-50.0..50.0)).collect();
        worst = worst.max(potential_apply(&m, &x, &x)?.abs());
        worst = worst.max(potential_apply(&ctx.m2, &x[..2], &x[..2])?.abs());
    }
    Ok(vec![Verdict::at_most("magnetics.antisymmetry", worst, 0.0)])
}

/// Richardson-corrected ‖D_A u‖² − ‖∇|u|‖² over random smooth fields and
/// field strengths; the discrete gap itself may dip below zero by O(h²).
fn diamagnetic(ctx: &Context) -> Result<Vec<Verdict>> {
    let n = ctx.opts.points_2d();
    let (coarse, fine) = (Grid::new(2, 6.0, n)?, Grid::new(2, 6.0, refined(n))?);
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.opts.seed + 4);
    let draws: Vec<(u64, f64)> = (0..ctx.opts.random_fields)
        .map(|i| (ctx.opts.seed + 1000 + i as u64, rng.gen_range(0.0..2.0)))
        .collect();
    let worst: Result<Vec<f64>> = draws
        .par_iter()
        .map(|&(seed, b)| {
            let m = MagneticData::planar(b);
            let gap_c = diamagnetic_gap(&smooth_random_field(&coarse, seed), &m);
            let u = smooth_random_field(&fine, seed);
            let gap_f = diamagnetic_gap(&u, &m);
            let corrected = (4.0 * gap_f - gap_c) / 3.0;
            Ok(-corrected / covariant_gradient(&u, &m).norm_sq())
        })
        .collect();
    let worst = worst?.into_iter().fold(f64::NEG_INFINITY, f64::max);
    Ok(vec![Verdict::at_most(
        "magnetics.diamagnetic-gap",
        worst.max(0.0),
        DIAMAGNETIC_TOL,
    )])
}

fn translation_and_gauge(ctx: &Context) -> Result<Vec<Verdict>> {
    let g = ctx.g2;
    let h = g.spacing()[0];
    let u = smooth_random_field(&g, ctx.opts.seed + 5);
    let steps = [3i64, -2];
    let moved = magnetic_translate(&u, &ctx.m2, &[steps[0] as f64 * h, steps[1] as f64 * h])?;
    // Mass of the source nodes pushed out of the box.
    let pts = g.points();
    let dropped: f64 = u
        .values()
        .iter()
        .enumerate()
        .filter(|(idx, _)| {
            let k = g.multi_index(*idx);
            (0..2).any(|ax| {
                let t = k[ax] as i64 + steps[ax];
                t < 0 || t >= pts[ax] as i64
            })
        })
        .map(|(_, z)| z.norm_sqr())
        .sum::<f64>()
        * g.cell_volume();
    let norm_defect = (u.norm_sq() - dropped - moved.norm_sq()).abs() / u.norm_sq();

    // |D_{A+dψ}(e^{−iψ}v)|² = |D_A v|² in the continuum, for ψ = ½ xᵀSx.
    let s = [[0.3, 0.1, 0.0], [0.1, -0.2, 0.0], [0.0; 3]];
    let defect = |n: usize| -> Result<f64> {
        let g = Grid::new(2, 6.0, n)?;
        let v = smooth_random_field(&g, ctx.opts.seed + 6);
        let psi = ScalarField::from_fn(&g, |x| {
            0.5 * (s[0][0] * x[0] * x[0] + 2.0 * s[0][1] * x[0] * x[1] + s[1][1] * x[1] * x[1])
        });
        let twisted = gauge_transform(&v, &psi)?;
        let potential = LinearPotential::symmetric(&ctx.m2).plus_quadratic_gradient(s);
        let a = covariant_gradient_linear(&twisted, &potential).norm_sq();
        let b = covariant_gradient(&v, &ctx.m2).norm_sq();
        Ok((a - b).abs())
    };
    let n = ctx.opts.points_2d();
    Ok(vec![
        Verdict::at_most("magnetics.translation-norm", norm_defect, 1e-12),
        Verdict::at_least(
            "magnetics.gauge-defect-order",
            order(defect(n)?, defect(refined(n))?),
            MIN_ORDER,
        ),
    ])
}

fn functional_checks(ctx: &Context) -> Result<Vec<Verdict>> {
    let g = ctx.g2;
    let m = ctx.m2;
    let mut gradient = 0.0f64;
    for (p, seed) in [(4.0, 11u64), (3.0, 12), (3.7, 13)] {
        let fp = FunctionalParams::new(p, 2)?;
        let u = smooth_random_field(&g, ctx.opts.seed + seed);
        let v = smooth_random_field(&g, ctx.opts.seed + seed + 100);
        let eps = 1e-5;
        let plus = energy(&u.add_scaled(eps, &v)?, &m, &fp);
        let minus = energy(&u.add_scaled(-eps, &v)?, &m, &fp);
        let fd = (plus - minus) / (2.0 * eps);
        let pairing = inner_product(&euler_gradient(&u, &m, &fp), &v)?;
        gradient = gradient.max((fd - pairing).abs() / pairing.abs());
    }

    let mut nehari = 0.0f64;
    for (p, seed) in [(4.0, 21u64), (3.0, 22), (5.5, 23)] {
        let fp = FunctionalParams::new(p, 2)?;
        let (_, s) = nehari_scale(&smooth_random_field(&g, ctx.opts.seed + seed), &m, &fp)?;
        let pairing = inner_product(&euler_gradient(&s, &m, &fp), &s)?;
        nehari = nehari.max(pairing.abs() / quadratic_form(&s, &m));
    }

    let fp = ctx.fp2;
    let u = smooth_random_field(&g, ctx.opts.seed + 30);
    let q = rayleigh_quotient(&u, &m, &fp)?;
    let e = energy(&u, &m, &fp);
    let rotated = u.scaled(Complex64::from_polar(1.0, 1.234));
    let phase = ((rayleigh_quotient(&rotated, &m, &fp)? - q).abs() / q)
        .max((energy(&rotated, &m, &fp) - e).abs() / e.abs());
    let h = g.spacing()[0];
    let moved = magnetic_translate(&u, &m, &[2.0 * h, -3.0 * h])?;
    let translation = (rayleigh_quotient(&moved, &m, &fp)? - q).abs() / q;
    Ok(vec![
        Verdict::at_most("variational.gradient-consistency", gradient, GRADIENT_TOL),
        Verdict::at_most("variational.nehari-identity", nehari, NEHARI_TOL),
        Verdict::at_most("variational.phase-invariance", phase, PHASE_TOL),
        Verdict::at_most(
            "variational.translation-invariance",
            translation,
            TRANSLATION_TOL,
        ),
    ])
}

fn groundstate_verdicts(
    prefix: &str,
    gs: &GroundstateResult,
    m: &MagneticData,
    fp: &FunctionalParams,
) -> Result<Vec<Verdict>> {
    let cfg = SolverConfig::default();
    let formula = (ground_energy_from_quotient(gs.quotient, fp)? - gs.energy).abs() / gs.energy;
    let climb = gs
        .energy_history
        .windows(2)
        .map(|w| (w[1] - w[0]) / w[0].abs())
        .fold(0.0, f64::max);
    let grid = gs.field.grid();
    let centre = grid
        .nearest_node(&gs.center_of_mass)
        .unwrap_or(grid.center_index());
    let z = gs.field.values()[centre];
    let phase = if z.re > 0.0 {
        z.im.abs() / z.norm()
    } else {
        f64::INFINITY
    };
    let pde = euler_gradient(&gs.field, m, fp).norm();
    let max = gs.field.max_modulus();
    let symmetry = symmetry_defect(&gs.field, m, 8)?;
    let h = grid.max_spacing();
    let monotone = monotonicity_defect(&gs.field, &gs.center_of_mass)? / max;
    Ok(vec![
        Verdict::at_most(format!("{prefix}.pde-residual"), pde, cfg.residual_tol),
        Verdict::at_most(format!("{prefix}.energy-nonincreasing"), climb, 1e-10),
        Verdict::at_most(format!("{prefix}.phase-normalised"), phase, PHASE_TOL),
        Verdict::at_most(format!("{prefix}.energy-formula"), formula, 1e-8),
        Verdict::at_most(
            format!("{prefix}.symmetry-defect"),
            symmetry,
            SYMMETRY_CONSTANT * h * h,
        ),
        Verdict::at_most(
            format!("{prefix}.monotonicity-defect"),
            monotone,
            MONOTONICITY_TOL,
        ),
    ])
}

fn solver_2d(ctx: &Context) -> Result<Vec<Verdict>> {
    let gs = ctx.groundstate_2d()?;
    let mut out = groundstate_verdicts("solver-2d", &gs, &ctx.m2, &ctx.fp2)?;
    // Landau gauge twin: the kinetic energy is reproduced to O(h²).
    let b = ctx.m2.strength();
    let landau = LinearPotential::landau(b);
    let psi = ScalarField::from_fn(gs.field.grid(), |x| landau.self_pairing(x) / 2.0);
    let twin = gauge_transform(&gs.field, &psi)?;
    let k_sym = covariant_gradient(&gs.field, &ctx.m2).norm_sq();
    let k_landau = covariant_gradient_linear(&twin, &landau).norm_sq();
    let h = ctx.g2.max_spacing();
    out.push(Verdict::at_most(
        "solver-2d.gauge-consistency",
        (k_sym - k_landau).abs() / gs.energy,
        h * h,
    ));
    Ok(out)
}

fn solver_3d(ctx: &Context) -> Result<Vec<Verdict>> {
    let gs = ctx.groundstate_3d()?;
    let mut out = groundstate_verdicts("solver-3d", &gs, &ctx.m3, &ctx.fp3)?;
    let bound = gaussian_bound_3d(&gs.field, [0.0, 0.0, 0.3])?;
    out.push(Verdict::at_least(
        "analysis.gaussian-bound-finite",
        if bound.is_finite() { 1.0 } else { 0.0 },
        1.0,
    ));
    Ok(out)
}

fn spectrum_checks(ctx: &Context) -> Result<Vec<Verdict>> {
    let gs = ctx.groundstate_2d()?;
    let (u, m, fp) = (&gs.field, &ctx.m2, &ctx.fp2);
    let g = ctx.g2;
    let a = smooth_random_field(&g, ctx.opts.seed + 40);
    let b = smooth_random_field(&g, ctx.opts.seed + 41);
    let k = Hamiltonian::magnetic(&g, m, 1.0);
    let h_pair = |x: &ComplexField, y: &ComplexField| inner_product(&k.apply(x), y);
    let (la, lb) = (
        linearized_operator_apply(u, m, fp, &a)?,
        linearized_operator_apply(u, m, fp, &b)?,
    );
    let (lab, alb) = (h_pair(&la, &b)?, h_pair(&a, &lb)?);
    let adjoint = (lab - alb).abs() / lab.abs().max(alb.abs());
    let positivity = (-h_pair(&la, &a)?).max(0.0);

    let spec = top_eigenvalues(u, m, fp, 4, EIGEN_TOL)?;
    let mut gram = 0.0f64;
    for (i, vi) in spec.vectors.iter().enumerate() {
        for (j, vj) in spec.vectors.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            gram = gram.max((h_pair(vi, vj)? - target).abs());
        }
    }
    let rotated = top_eigenvalues(
        &u.scaled(Complex64::from_polar(1.0, 0.7)),
        m,
        fp,
        4,
        EIGEN_TOL,
    )?;
    let phase = spec
        .eigenvalues
        .iter()
        .zip(&rotated.eigenvalues)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    Ok(vec![
        Verdict::at_most("spectrum.self-adjoint", adjoint, 1e-8),
        Verdict::at_most("spectrum.positive", positivity, 0.0),
        Verdict::at_most("spectrum.h-orthonormal", gram, 1e-8),
        Verdict::at_most("spectrum.phase-invariance", phase, 10.0 * EIGEN_TOL),
    ])
}

/// Decay diagnostics on a converged groundstate at a field strong enough for
/// the 2d law to be asymptotic inside the quick box.
fn decay_checks(ctx: &Context) -> Result<Vec<Verdict>> {
    let b = 1.0;
    let m = MagneticData::planar(b);
    let g = Grid::new(2, 8.0, ctx.opts.points_2d())?;
    let gs = minimize_groundstate(&m, &ctx.fp2, &g, &SolverConfig::default())?;
    let window = [3.0, 6.0];
    let law = fit_decay_2d(&gs.field, b, window)?.residual;
    let control = fit_decay_exponential(&gs.field, window)?.residual;
    let kato = kato_bound_ratio(&gs.field, [2.0, 6.0], 0.1)?;
    Ok(vec![
        Verdict::at_least("analysis.decay-law-vs-control", control / law, DECAY_RATIO),
        Verdict::at_most("analysis.kato-bound", kato, 1.0),
    ])
}

fn energy_curve(ctx: &Context) -> Result<Vec<Verdict>> {
    let curve = sweep_energy(
        &[0.0, 0.05, 0.1, 0.15, 0.2],
        &ctx.fp2,
        &ctx.g2,
        &SolverConfig::default(),
    )?;
    let e0 = curve.energy_at_zero();
    Ok(vec![
        Verdict::at_least(
            "analysis.energy-minimum-at-zero",
            if curve.minimum_at_zero { 1.0 } else { 0.0 },
            1.0,
        ),
        Verdict::at_least(
            "analysis.energy-convexity",
            curve.convexity_margin,
            -1e-4 * e0,
        ),
        Verdict::at_least(
            "analysis.energy-nondecreasing",
            if curve.nondecreasing { 1.0 } else { 0.0 },
            1.0,
        ),
    ])
}

/// Defect statistics on the inputs that generate them exactly.
fn synthetic_laws(ctx: &Context) -> Result<Vec<Verdict>> {
    let b = 0.5;
    let g = Grid::new(2, 12.0, ctx.opts.points_2d())?;
    let law = ComplexField::from_fn(&g, |x| {
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt().max(1e-3);
        let log = -b * r * r / 4.0 - 0.5 * r.ln() - (0.5 + 1.0 / b) * (b * r).ln_1p();
        Complex64::new(log.exp(), 0.0)
    });
    let fit = fit_decay_2d(&law, b, [4.0, 9.0])?.residual;
    let radial = ComplexField::from_fn(&ctx.g2, |x| {
        Complex64::new((-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp(), 0.0)
    });
    let symmetry = symmetry_defect(&radial, &ctx.m2, 8)?;
    let monotone = monotonicity_defect(&radial, &[0.0, 0.0])?;
    Ok(vec![
        Verdict::at_most("analysis.synthetic-law-fit", fit, SYNTHETIC_FIT_TOL),
        Verdict::at_most(
            "analysis.synthetic-symmetry",
            symmetry,
            SYMMETRY_CONSTANT * ctx.g2.max_spacing().powi(2),
        ),
        Verdict::at_most("analysis.synthetic-monotonicity", monotone, 0.0),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_fields_are_reproducible() {
        let g = Grid::new(2, 4.0, 33).unwrap();
        assert_eq!(smooth_random_field(&g, 3), smooth_random_field(&g, 3));
        assert_ne!(smooth_random_field(&g, 3), smooth_random_field(&g, 4));
    }

    #[test]
    fn quick_suite_passes() {
        let verdicts = run_invariant_suite(&VerifyOptions::default()).unwrap();
        let failed: Vec<&Verdict> = verdicts.iter().filter(|v| !v.pass).collect();
        assert!(failed.is_empty(), "{failed:#?}");
        assert!(verdicts.len() > 30);
    }
}
