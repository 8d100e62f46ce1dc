//! Preconditioned descent on the Nehari manifold.
//!
//! Each step moves against the Sobolev gradient (−Δ_A + 1)^{-1} I′(u) and
//! rescales onto the Nehari manifold. With unit step this is the
//! Petviashvili iteration; the adaptive rule picks a two-point
//! (Barzilai–Borwein) step in the energy norm and backtracks on any
//! energy increase.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::radial::solve_radial;
use super::resolvent::{conjugate_gradient, default_cg_cap};
use crate::analysis::center_of_mass;
use crate::error::{Error, Result};
use crate::grid::{dot, ComplexField, Grid};
use crate::io::read_dump;
use crate::magnetics::{magnetic_translate, MagneticData};
use crate::variational::{Functional, FunctionalParams};

const MIN_STEP: f64 = 1.0 / 64.0;
const STEP_CLIP: (f64, f64) = (0.25, 2.0);
const ENERGY_SLACK: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepRule {
    /// Unit step (Petviashvili).
    Fixed,
    /// Two-point step in the energy norm with backtracking.
    AdaptiveTwoPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Init {
    /// Centred Gaussian with seeded width and phase.
    Gaussian,
    /// Zero-field radial profile from the shooting solver.
    RadialOracle,
    /// Field read from a binary dump on the same grid.
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Target for ‖I′(u)‖ in L².
    pub residual_tol: f64,
    pub step_rule: StepRule,
    pub init: Init,
    /// Recentre by a lattice magnetic translation every this many iterations (0 disables).
    pub recentre_every: usize,
    pub seed: u64,
    /// Relative tolerance of the inner resolvent solves.
    pub cg_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 500,
            residual_tol: 1e-8,
            step_rule: StepRule::AdaptiveTwoPoint,
            init: Init::RadialOracle,
            recentre_every: 10,
            seed: 0,
            cg_tol: 1e-10,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be positive".into()));
        }
        if !(self.residual_tol > 0.0 && self.residual_tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "residual_tol = {}",
                self.residual_tol
            )));
        }
        if !(self.cg_tol > 0.0 && self.cg_tol < 1.0) {
            return Err(Error::InvalidArgument(format!("cg_tol = {}", self.cg_tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GroundstateResult {
    pub field: ComplexField,
    pub energy: f64,
    pub quotient: f64,
    /// ‖I′(u)‖ at the returned field.
    pub residual: f64,
    pub iterations: usize,
    pub center_of_mass: Vec<f64>,
    pub magnetic: MagneticData,
    pub p: f64,
    pub decoupled: bool,
    pub energy_history: Vec<f64>,
    pub cg_iterations: usize,
    pub elapsed_seconds: f64,
}

/// Serializable digest of a [`GroundstateResult`].
#[derive(Debug, Clone, Serialize)]
pub struct GroundstateSummary {
    pub dim: usize,
    pub points: Vec<usize>,
    pub half_extent: Vec<f64>,
    pub b_matrix: Vec<f64>,
    pub field_strength: f64,
    pub p: f64,
    pub decoupled: bool,
    pub energy: f64,
    pub quotient: f64,
    pub residual: f64,
    pub iterations: usize,
    pub cg_iterations: usize,
    pub center_of_mass: Vec<f64>,
    pub max_modulus: f64,
    pub elapsed_seconds: f64,
    pub energy_history: Vec<f64>,
}

impl GroundstateResult {
    pub fn summary(&self) -> GroundstateSummary {
        let g = self.field.grid();
        GroundstateSummary {
            dim: g.dim(),
            points: g.points().to_vec(),
            half_extent: g.half_extent().to_vec(),
            b_matrix: self.magnetic.entries(),
            field_strength: self.magnetic.strength(),
            p: self.p,
            decoupled: self.decoupled,
            energy: self.energy,
            quotient: self.quotient,
            residual: self.residual,
            iterations: self.iterations,
            cg_iterations: self.cg_iterations,
            center_of_mass: self.center_of_mass.clone(),
            max_modulus: self.field.max_modulus(),
            elapsed_seconds: self.elapsed_seconds,
            energy_history: self.energy_history.clone(),
        }
    }
}

fn check_inputs(
    m: &MagneticData,
    fp: &FunctionalParams,
    grid: &Grid,
    cfg: &SolverConfig,
) -> Result<()> {
    if m.dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            found: m.dim(),
        });
    }
    FunctionalParams::new(fp.p(), grid.dim())?;
    cfg.validate()
}

/// Builds the initial field; `real` drops the random phases.
pub fn initial_field(
    grid: &Grid,
    fp: &FunctionalParams,
    init: &Init,
    seed: u64,
    real: bool,
) -> Result<ComplexField> {
    let dim = grid.dim();
    match init {
        Init::Gaussian => {
            // Seeded width and global phase only: a start symmetric about a
            // node avoids the very slow lattice-pinning drift of the centre.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let width = 1.0 + 0.05 * rng.gen_range(-1.0..1.0);
            let phase = if real { 0.0 } else { rng.gen_range(-PI..PI) };
            Ok(ComplexField::from_fn(grid, |x| {
                let r2: f64 = x[..dim].iter().map(|v| v * v).sum();
                Complex64::from_polar((-0.5 * r2 / (width * width)).exp(), phase)
            }))
        }
        Init::RadialOracle => {
            let r_max =
                (2.0 * grid.half_extent().iter().map(|l| l * l).sum::<f64>().sqrt()).max(30.0);
            let mesh = (r_max / 0.01).ceil() as usize;
            let prof = solve_radial(dim, fp, r_max, mesh)?;
            Ok(prof.to_field(grid, &[0.0; 3]))
        }
        Init::File { path } => {
            let dump = read_dump(path)?;
            if dump.field.grid() != grid {
                return Err(Error::GridMismatch);
            }
            let mut f = dump.field;
            if real {
                f.values_mut()
                    .iter_mut()
                    .for_each(|z| *z = Complex64::new(z.norm(), 0.0));
            }
            Ok(f)
        }
    }
}

/// Magnetic groundstate on `grid`.
pub fn minimize_groundstate(
    m: &MagneticData,
    fp: &FunctionalParams,
    grid: &Grid,
    cfg: &SolverConfig,
) -> Result<GroundstateResult> {
    check_inputs(m, fp, grid, cfg)?;
    let init = initial_field(grid, fp, &cfg.init, cfg.seed, false)?;
    minimize_from(m, fp, init, cfg)
}

/// Magnetic groundstate started from a given field (the `init` entry of `cfg` is ignored).
pub fn minimize_from(
    m: &MagneticData,
    fp: &FunctionalParams,
    init: ComplexField,
    cfg: &SolverConfig,
) -> Result<GroundstateResult> {
    let grid = *init.grid();
    check_inputs(m, fp, &grid, cfg)?;
    let functional = Functional::magnetic(&grid, m, *fp);
    iterate(&functional, m, init, cfg, false)
}

/// Groundstate of the decoupled problem −Δu + |A|²u + u = |u|^{p−2}u, real and positive.
pub fn solve_decoupled(
    m: &MagneticData,
    fp: &FunctionalParams,
    grid: &Grid,
    cfg: &SolverConfig,
) -> Result<GroundstateResult> {
    check_inputs(m, fp, grid, cfg)?;
    let init = initial_field(grid, fp, &cfg.init, cfg.seed, true)?;
    let functional = Functional::decoupled(grid, m, *fp);
    iterate(&functional, m, init, cfg, true)
}

fn l2_norm(v: &[Complex64], vol: f64) -> f64 {
    (dot(v, v) * vol).sqrt()
}

fn scale(v: &mut [Complex64], t: f64) {
    v.iter_mut().for_each(|z| *z *= t);
}

/// Lattice magnetic translation bringing the centre of mass to the nearest
/// node of the origin; `false` if no shift was needed.
fn recentre(u: &mut ComplexField, m: &MagneticData) -> Result<bool> {
    let grid = *u.grid();
    let com = center_of_mass(u)?;
    let shift: Vec<f64> = com
        .iter()
        .zip(grid.spacing())
        .map(|(c, h)| -(c / h).round() * h)
        .collect();
    if shift.iter().all(|s| *s == 0.0) {
        return Ok(false);
    }
    *u = magnetic_translate(u, m, &shift)?;
    Ok(true)
}

/// Multiplies by a unimodular constant so the value at the node nearest the
/// centre of mass is real and positive.
fn normalise_phase(u: &mut ComplexField) -> Result<()> {
    let com = center_of_mass(u)?;
    let idx = u
        .grid()
        .nearest_node(&com)
        .unwrap_or_else(|| u.grid().center_index());
    let v = u.values()[idx];
    if v.norm() == 0.0 {
        return Ok(());
    }
    let rot = v.conj() / v.norm();
    u.values_mut().iter_mut().for_each(|z| *z *= rot);
    let z = &mut u.values_mut()[idx];
    z.im = 0.0;
    Ok(())
}

fn iterate(
    f: &Functional,
    m: &MagneticData,
    init: ComplexField,
    cfg: &SolverConfig,
    decoupled: bool,
) -> Result<GroundstateResult> {
    let start = Instant::now();
    let grid = *f.grid();
    let vol = grid.cell_volume();
    let n = grid.len();
    let op = f.operator();
    let cap = default_cg_cap(op);
    if init
        .values()
        .iter()
        .any(|z| !(z.re.is_finite() && z.im.is_finite()))
    {
        return Err(Error::NonFinite("initial field"));
    }

    let mut u = init;
    if u.is_zero() {
        return Err(Error::ZeroField);
    }
    // The discretised covariant derivative is only approximately covariant,
    // so the lattice favours centred states; start from one when allowed.
    if !decoupled && cfg.recentre_every > 0 {
        recentre(&mut u, m)?;
    }
    let t = f.nehari_factor(u.values()).ok_or(Error::ZeroField)?;
    scale(u.values_mut(), t);
    let mut energy = f.energy(u.values());
    let mut history = vec![energy];
    let mut g = f.gradient(u.values());
    let mut residual = l2_norm(&g, vol);
    let mut cg_total = 0usize;

    let mut dir = vec![Complex64::new(0.0, 0.0); n];
    let mut trial = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];
    let mut previous: Option<(Vec<Complex64>, Vec<Complex64>)> = None;
    let mut iterations = 0;

    while residual > cfg.residual_tol {
        if iterations >= cfg.max_iters {
            return Err(Error::MaxItersExceeded {
                iterations,
                residual,
            });
        }
        iterations += 1;

        dir.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        cg_total += conjugate_gradient(op, &g, &mut dir, cfg.cg_tol, cap)?.iterations;

        let mut alpha = match (cfg.step_rule, &previous) {
            (StepRule::AdaptiveTwoPoint, Some((u_prev, g_prev))) => {
                let s: Vec<Complex64> = u.values().iter().zip(u_prev).map(|(a, b)| a - b).collect();
                let y: Vec<Complex64> = g.iter().zip(g_prev).map(|(a, b)| a - b).collect();
                op.apply_into(&s, &mut scratch);
                let (num, den) = (dot(&s, &scratch), dot(&s, &y));
                if den > 0.0 && num > 0.0 {
                    (num / den).clamp(STEP_CLIP.0, STEP_CLIP.1)
                } else {
                    1.0
                }
            }
            _ => 1.0,
        };

        let accepted = loop {
            for i in 0..n {
                trial[i] = u.values()[i] - alpha * dir[i];
            }
            if let Some(t) = f.nehari_factor(&trial) {
                scale(&mut trial, t);
                let e = f.energy(&trial);
                if e.is_finite() && e <= energy + ENERGY_SLACK * energy.abs() {
                    break e;
                }
                if alpha / 2.0 < MIN_STEP {
                    return Err(Error::EnergyIncrease {
                        iteration: iterations,
                        before: energy,
                        after: e,
                    });
                }
            } else if alpha / 2.0 < MIN_STEP {
                return Err(Error::ZeroField);
            }
            alpha /= 2.0;
        };

        // After the swap `trial` holds the previous iterate.
        u.values_mut().swap_with_slice(&mut trial);
        previous = Some((trial.clone(), g.clone()));
        energy = accepted;

        if !decoupled
            && cfg.recentre_every > 0
            && iterations % cfg.recentre_every == 0
            && recentre(&mut u, m)?
        {
            let t = f.nehari_factor(u.values()).ok_or(Error::ZeroField)?;
            scale(u.values_mut(), t);
            normalise_phase(&mut u)?;
            energy = f.energy(u.values());
            previous = None;
        }
        history.push(energy);
        f.gradient_into(u.values(), &mut g);
        residual = l2_norm(&g, vol);
        if !residual.is_finite() {
            return Err(Error::NonFinite("groundstate iterate"));
        }
    }

    if !decoupled {
        normalise_phase(&mut u)?;
        f.gradient_into(u.values(), &mut g);
        residual = l2_norm(&g, vol);
    }
    let quotient = f.quotient(u.values()).ok_or(Error::ZeroField)?;
    let com = center_of_mass(&u)?;
    Ok(GroundstateResult {
        energy: f.energy(u.values()),
        quotient,
        residual,
        iterations,
        center_of_mass: com,
        magnetic: *m,
        p: f.params().p(),
        decoupled,
        energy_history: history,
        cg_iterations: cg_total,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        field: u,
    })
}
