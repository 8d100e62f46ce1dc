//! Diagnostics on computed groundstates.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::ComplexField;

mod decay;
mod energy;
mod symmetry;

pub use decay::{
    fit_decay_2d, fit_decay_exponential, gaussian_bound_3d, gaussian_bound_profile,
    kato_bound_ratio, DecayFit, DecayLaw, GaussianBound, GAUSSIAN_BOUND_MARGIN, MIN_LAW_FIELD,
    RELIABLE_FLOOR,
};
pub use energy::{
    decoupled_equivalence, energy_derivative_check, energy_derivative_formula, expected_curvature,
    second_moment, sweep_energy, DecoupledReport, DerivativeReport, EnergyCurve, EnergyRow,
};
pub use symmetry::{monotonicity_defect, symmetry_defect};

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub statistic: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Verdict {
    /// Passes when `statistic ≤ tolerance`.
    pub fn at_most(name: impl Into<String>, statistic: f64, tolerance: f64) -> Self {
        Verdict {
            name: name.into(),
            statistic,
            tolerance,
            pass: statistic <= tolerance,
        }
    }

    /// Passes when `statistic ≥ tolerance`.
    pub fn at_least(name: impl Into<String>, statistic: f64, tolerance: f64) -> Self {
        Verdict {
            name: name.into(),
            statistic,
            tolerance,
            pass: statistic >= tolerance,
        }
    }
}

/// ∫x|u|² / ∫|u|².
pub fn center_of_mass(u: &ComplexField) -> Result<Vec<f64>> {
    let grid = u.grid();
    let dim = grid.dim();
    let mut mass = 0.0;
    let mut first = [0.0; 3];
    for (idx, z) in u.values().iter().enumerate() {
        let w = z.norm_sqr();
        if w == 0.0 {
            continue;
        }
        let x = grid.position(idx);
        mass += w;
        for j in 0..dim {
            first[j] += w * x[j];
        }
    }
    if mass == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(first[..dim].iter().map(|v| v / mass).collect())
}
