//! Ground-energy curve, its derivative and the decoupled comparison.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::magnetics::{decoupling_defect, MagneticData};
use crate::solver::{
    minimize_groundstate, solve_decoupled, solve_radial, GroundstateResult, SolverConfig,
};
use crate::variational::FunctionalParams;

/// ∫|x − a|²|u|² about the origin.
pub fn second_moment(gs: &GroundstateResult) -> f64 {
    let grid = gs.field.grid();
    let dim = grid.dim();
    gs.field
        .values()
        .iter()
        .enumerate()
        .map(|(idx, z)| {
            let x = grid.position(idx);
            (0..dim).map(|i| x[i] * x[i]).sum::<f64>() * z.norm_sqr()
        })
        .sum::<f64>()
        * grid.cell_volume()
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyRow {
    pub b: f64,
    pub energy: f64,
    pub second_moment: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyCurve {
    pub dim: usize,
    pub p: f64,
    pub rows: Vec<EnergyRow>,
    /// Least-squares c₂ in E(b) − E(0) ≈ c₂ b² over the four smallest b.
    pub c2_fit: f64,
    /// RMS misfit of that fit.
    pub c2_residual: f64,
    /// (1/(4N))∫|x|²u₀² from the radial oracle.
    pub c2_expected: f64,
    /// Smallest second difference, scaled to the mean neighbouring spacing.
    pub convexity_margin: f64,
    pub minimum_at_zero: bool,
    pub nondecreasing: bool,
}

impl EnergyCurve {
    fn from_rows(dim: usize, p: f64, mut rows: Vec<EnergyRow>, c2_expected: f64) -> Result<Self> {
        rows.sort_by(|a, b| a.b.total_cmp(&b.b));
        let e0 = rows
            .iter()
            .find(|r| r.b == 0.0)
            .ok_or_else(|| Error::InvalidArgument("energy sweep lacks b = 0".into()))?
            .energy;
        let small: Vec<&EnergyRow> = rows.iter().take(4).collect();
        let (num, den) = small.iter().fold((0.0, 0.0), |(n, d), r| {
            let b2 = r.b * r.b;
            (n + (r.energy - e0) * b2, d + b2 * b2)
        });
        if den == 0.0 {
            return Err(Error::InvalidArgument(
                "need nonzero field strengths".into(),
            ));
        }
        let c2_fit = num / den;
        let c2_residual = (small
            .iter()
            .map(|r| (r.energy - e0 - c2_fit * r.b * r.b).powi(2))
            .sum::<f64>()
            / small.len() as f64)
            .sqrt();
        let mut convexity_margin = f64::INFINITY;
        for w in rows.windows(3) {
            let (h0, h1) = (w[1].b - w[0].b, w[2].b - w[1].b);
            let slope = |a: &EnergyRow, c: &EnergyRow, h: f64| (c.energy - a.energy) / h;
            let second = (slope(&w[1], &w[2], h1) - slope(&w[0], &w[1], h0)) * 0.5 * (h0 + h1);
            convexity_margin = convexity_margin.min(second);
        }
        let min = rows.iter().map(|r| r.energy).fold(f64::INFINITY, f64::min);
        let minimum_at_zero = e0 <= min;
        let nondecreasing = rows.windows(2).all(|w| w[1].energy >= w[0].energy);
        Ok(EnergyCurve {
            dim,
            p,
            rows,
            c2_fit,
            c2_residual,
            c2_expected,
            convexity_margin,
            minimum_at_zero,
            nondecreasing,
        })
    }

    pub fn energy_at_zero(&self) -> f64 {
        self.rows
            .iter()
            .find(|r| r.b == 0.0)
            .map(|r| r.energy)
            .unwrap_or(f64::NAN)
    }

    /// |c₂ − expected| / expected.
    pub fn c2_mismatch(&self) -> f64 {
        (self.c2_fit - self.c2_expected).abs() / self.c2_expected
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("b,energy,moment,c2_fit,convexity_margin\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{:.15e},{:.15e},{:.15e},{:.6e}\n",
                r.b, r.energy, r.second_moment, self.c2_fit, self.convexity_margin
            ));
        }
        s
    }
}

/// (1/(4N))∫|x|²u₀², the predicted curvature of E at zero field.
pub fn expected_curvature(dim: usize, fp: &FunctionalParams) -> Result<f64> {
    let prof = solve_radial(dim, fp, 30.0, 3000)?;
    Ok(prof.second_moment / (4.0 * dim as f64))
}

/// Solves each b (canonical field direction) concurrently and tabulates E(b).
pub fn sweep_energy(
    b_list: &[f64],
    fp: &FunctionalParams,
    grid: &Grid,
    cfg: &SolverConfig,
) -> Result<EnergyCurve> {
    if !b_list.contains(&0.0) {
        return Err(Error::InvalidArgument("b list must include 0".into()));
    }
    if b_list.len() < 5 {
        return Err(Error::InvalidArgument(
            "energy sweep needs at least 5 values".into(),
        ));
    }
    if b_list.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
        return Err(Error::InvalidArgument(
            "field strengths must be finite and nonnegative".into(),
        ));
    }
    let dim = grid.dim();
    let rows: Result<Vec<EnergyRow>> = b_list
        .par_iter()
        .map(|&b| {
            let m = MagneticData::uniform(dim, b)?;
            let gs = minimize_groundstate(&m, fp, grid, cfg)?;
            Ok(EnergyRow {
                b,
                energy: gs.energy,
                second_moment: second_moment(&gs),
            })
        })
        .collect();
    EnergyCurve::from_rows(dim, fp.p(), rows?, expected_curvature(dim, fp)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct DerivativeReport {
    pub b_star: f64,
    pub delta: f64,
    pub energy_plus: f64,
    pub energy_minus: f64,
    pub finite_difference: f64,
    /// ¼∫B*(x)·Ḃ(x)|u*|².
    pub predicted: f64,
    pub mismatch: f64,
}

/// ¼∫B(x)·Ḃ(x)|u|² for the field `m` at u and the variation `dm`.
pub fn energy_derivative_formula(gs: &GroundstateResult, dm: &MagneticData) -> f64 {
    let grid = gs.field.grid();
    let dim = grid.dim();
    let m = gs.magnetic;
    gs.field
        .values()
        .iter()
        .enumerate()
        .map(|(idx, z)| {
            let x = grid.position(idx);
            let (bx, dbx) = (m.field_at(&x[..dim]), dm.field_at(&x[..dim]));
            (0..dim).map(|i| bx[i] * dbx[i]).sum::<f64>() * z.norm_sqr()
        })
        .sum::<f64>()
        * grid.cell_volume()
        / 4.0
}

/// Central difference of E along the canonical ray against the derivative formula.
pub fn energy_derivative_check(
    b_star: f64,
    delta: f64,
    fp: &FunctionalParams,
    grid: &Grid,
    cfg: &SolverConfig,
) -> Result<DerivativeReport> {
    if !(b_star > 0.0 && delta > 0.0 && delta <= b_star / 4.0) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < delta ≤ b_star/4 (b_star {b_star}, delta {delta})"
        )));
    }
    let dim = grid.dim();
    let solve = |b: f64| -> Result<GroundstateResult> {
        minimize_groundstate(&MagneticData::uniform(dim, b)?, fp, grid, cfg)
    };
    let results: Result<Vec<GroundstateResult>> = [b_star - delta, b_star, b_star + delta]
        .par_iter()
        .map(|&b| solve(b))
        .collect();
    let results = results?;
    let (minus, centre, plus) = (&results[0], &results[1], &results[2]);
    let finite_difference = (plus.energy - minus.energy) / (2.0 * delta);
    let predicted = energy_derivative_formula(centre, &MagneticData::uniform(dim, 1.0)?);
    Ok(DerivativeReport {
        b_star,
        delta,
        energy_plus: plus.energy,
        energy_minus: minus.energy,
        finite_difference,
        predicted,
        mismatch: (finite_difference - predicted).abs() / predicted.abs().max(f64::MIN_POSITIVE),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DecoupledReport {
    pub b: f64,
    pub energy_magnetic: f64,
    pub energy_decoupled: f64,
    /// |E_mag − E_dec| / E_dec.
    pub energy_gap: f64,
    /// ‖|u_mag| − u_dec‖ / ‖u_dec‖.
    pub field_gap: f64,
    pub decoupling_defect: f64,
}

pub fn decoupled_equivalence(
    b: f64,
    fp: &FunctionalParams,
    grid: &Grid,
    cfg: &SolverConfig,
) -> Result<DecoupledReport> {
    let m = MagneticData::uniform(grid.dim(), b)?;
    let mag = minimize_groundstate(&m, fp, grid, cfg)?;
    let dec = solve_decoupled(&m, fp, grid, cfg)?;
    let mut diff = 0.0;
    let mut norm = 0.0;
    for (a, d) in mag.field.values().iter().zip(dec.field.values()) {
        diff += (a.norm() - d.re).powi(2);
        norm += d.re * d.re;
    }
    Ok(DecoupledReport {
        b,
        energy_magnetic: mag.energy,
        energy_decoupled: dec.energy,
        energy_gap: (mag.energy - dec.energy).abs() / dec.energy,
        field_gap: (diff / norm).sqrt(),
        decoupling_defect: decoupling_defect(&mag.field, &m),
    })
}
