//! Decay-law fits and tail bounds.

use std::f64::consts::PI;

use serde::Serialize;

use super::center_of_mass;
use crate::error::{Error, Result};
use crate::grid::{ComplexField, ScalarField};

/// Smallest |u| treated as resolved.
pub const RELIABLE_FLOOR: f64 = 1e-250;
/// The 2d law is refused below this field strength.
pub const MIN_LAW_FIELD: f64 = 0.02;
/// Growth of the compensated 3d statistic beyond its near-axis maximum that
/// still counts as bounded, relative to that maximum.
pub const GAUSSIAN_BOUND_MARGIN: f64 = 0.01;
const ANGLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayLaw {
    TwoDimExact,
    ThreeDimGaussianBound,
    Exponential,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    pub law: DecayLaw,
    pub window: [f64; 2],
    /// Mean of the compensated profile g over the window.
    pub log_amplitude: f64,
    /// max |g(r) − log c| over the window.
    pub residual: f64,
    pub radii: Vec<f64>,
    pub compensated: Vec<f64>,
    /// Angle-averaged |u| at each radius.
    pub mean_modulus: Vec<f64>,
}

/// Angle-averaged samples of log|u| on a circle, via interpolation of log|u|.
struct LogSampler {
    log_modulus: ScalarField,
    centre: [f64; 2],
    outer: f64,
}

impl LogSampler {
    fn new(u: &ComplexField) -> Result<Self> {
        let grid = *u.grid();
        if grid.dim() != 2 {
            return Err(Error::InvalidDimension(grid.dim()));
        }
        let c = center_of_mass(u)?;
        // Unresolved nodes poison any interpolation that touches them.
        let values = u
            .values()
            .iter()
            .map(|z| {
                let r = z.norm();
                if r >= RELIABLE_FLOOR {
                    r.ln()
                } else {
                    f64::NAN
                }
            })
            .collect();
        let log_modulus = ScalarField::from_values(&grid, values)?;
        let outer = grid.min_half_extent() - 2.0 * grid.max_spacing();
        Ok(LogSampler {
            log_modulus,
            centre: [c[0], c[1]],
            outer: outer - c[0].abs().max(c[1].abs()),
        })
    }

    /// (mean log|u|, mean |u|) over the circle of radius r.
    fn ring(&self, r: f64) -> Option<(f64, f64)> {
        let mut log_sum = 0.0;
        let mut mod_sum = 0.0;
        for k in 0..ANGLES {
            let t = 2.0 * PI * k as f64 / ANGLES as f64;
            let x = [self.centre[0] + r * t.cos(), self.centre[1] + r * t.sin()];
            let v = self.log_modulus.sample(&x);
            if !v.is_finite() {
                return None;
            }
            log_sum += v;
            mod_sum += v.exp();
        }
        Some((log_sum / ANGLES as f64, mod_sum / ANGLES as f64))
    }
}

fn window_radii(lo: f64, hi: f64, h: f64) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidArgument(format!("window [{lo}, {hi}]")));
    }
    let count = (((hi - lo) / h).ceil() as usize + 1).max(20);
    Ok((0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect())
}

fn fit_with(
    u: &ComplexField,
    window: [f64; 2],
    law: DecayLaw,
    correction: impl Fn(f64) -> f64,
) -> Result<DecayFit> {
    let sampler = LogSampler::new(u)?;
    let [lo, hi] = window;
    if hi > sampler.outer {
        return Err(Error::WindowOutsideReliableRegion { lo, hi });
    }
    let radii = window_radii(lo, hi, u.grid().max_spacing())?;
    let mut compensated = Vec::with_capacity(radii.len());
    let mut mean_modulus = Vec::with_capacity(radii.len());
    for &r in &radii {
        let (log_mean, mod_mean) = sampler
            .ring(r)
            .ok_or(Error::WindowOutsideReliableRegion { lo, hi })?;
        compensated.push(log_mean + correction(r));
        mean_modulus.push(mod_mean);
    }
    let log_amplitude = compensated.iter().sum::<f64>() / compensated.len() as f64;
    let residual = compensated
        .iter()
        .map(|g| (g - log_amplitude).abs())
        .fold(0.0, f64::max);
    Ok(DecayFit {
        law,
        window,
        log_amplitude,
        residual,
        radii,
        compensated,
        mean_modulus,
    })
}

/// g(r) = log|u| + b r²/4 + ½ log r + (½ + 1/b) log(1 + b r), angle averaged.
pub fn fit_decay_2d(u: &ComplexField, b: f64, window: [f64; 2]) -> Result<DecayFit> {
    if !(b >= MIN_LAW_FIELD) {
        return Err(Error::FieldTooWeak(b));
    }
    fit_with(u, window, DecayLaw::TwoDimExact, |r| {
        b * r * r / 4.0 + 0.5 * r.ln() + (0.5 + 1.0 / b) * (b * r).ln_1p()
    })
}

/// Control law g(r) = log|u| + r.
pub fn fit_decay_exponential(u: &ComplexField, window: [f64; 2]) -> Result<DecayFit> {
    fit_with(u, window, DecayLaw::Exponential, |r| r)
}

impl DecayFit {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,mean_modulus,compensated\n");
        for ((r, m), g) in self
            .radii
            .iter()
            .zip(&self.mean_modulus)
            .zip(&self.compensated)
        {
            s.push_str(&format!("{r},{m:.10e},{g:.10e}\n"));
        }
        s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GaussianBound {
    /// max of |u| e^{b r⊥²/4} over reliable nodes minus its max near the axis.
    pub statistic: f64,
    pub axis_value: f64,
    pub global_value: f64,
    /// (outer radius of the shell, max of the compensated modulus in the shell).
    pub shells: Vec<(f64, f64)>,
}

/// |u(x)| e^{|B×(x−a)|²/(4|B|)} over nodes at least two nodes inside the box.
pub fn gaussian_bound_profile(u: &ComplexField, b_axis: [f64; 3]) -> Result<GaussianBound> {
    let grid = *u.grid();
    if grid.dim() != 3 {
        return Err(Error::InvalidDimension(grid.dim()));
    }
    let b = b_axis.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(b > 0.0) {
        return Err(Error::InvalidArgument("field axis must be nonzero".into()));
    }
    let a = center_of_mass(u)?;
    let n = b_axis.map(|v| v / b);
    let h = grid.max_spacing();
    let shell_width = 1.0;
    let mut shells: Vec<f64> = Vec::new();
    let (mut axis_value, mut global_value) = (0.0f64, 0.0f64);
    for (idx, z) in u.values().iter().enumerate() {
        let m = z.norm();
        if grid.boundary_distance(idx) < 2 || m < RELIABLE_FLOOR {
            continue;
        }
        let x = grid.position(idx);
        let d = [x[0] - a[0], x[1] - a[1], x[2] - a[2]];
        let along: f64 = (0..3).map(|i| d[i] * n[i]).sum();
        let perp2 = (d.iter().map(|v| v * v).sum::<f64>() - along * along).max(0.0);
        let stat = m * (b * perp2 / 4.0).exp();
        global_value = global_value.max(stat);
        let perp = perp2.sqrt();
        if perp <= 1.0 + h {
            axis_value = axis_value.max(stat);
        }
        let s = (perp / shell_width) as usize;
        if shells.len() <= s {
            shells.resize(s + 1, 0.0);
        }
        shells[s] = shells[s].max(stat);
    }
    if global_value == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(GaussianBound {
        statistic: global_value - axis_value,
        axis_value,
        global_value,
        shells: shells
            .into_iter()
            .enumerate()
            .map(|(i, v)| ((i + 1) as f64 * shell_width, v))
            .collect(),
    })
}

pub fn gaussian_bound_3d(u: &ComplexField, b_axis: [f64; 3]) -> Result<f64> {
    Ok(gaussian_bound_profile(u, b_axis)?.statistic)
}

/// Largest ratio of |u(x)| e^{(1−η)|x−a|} over the window to its value at the
/// inner edge; at most one when |u| ≤ C e^{−(1−η)r} holds with C fixed at r_lo.
pub fn kato_bound_ratio(u: &ComplexField, window: [f64; 2], eta: f64) -> Result<f64> {
    let grid = *u.grid();
    let a = center_of_mass(u)?;
    let dim = grid.dim();
    let h = grid.max_spacing();
    let [lo, hi] = window;
    if hi > grid.min_half_extent() - 2.0 * h || !(lo < hi) {
        return Err(Error::WindowOutsideReliableRegion { lo, hi });
    }
    let rate = 1.0 - eta;
    let (mut inner, mut worst) = (0.0f64, 0.0f64);
    for (idx, z) in u.values().iter().enumerate() {
        let x = grid.position(idx);
        let r = (0..dim).map(|i| (x[i] - a[i]).powi(2)).sum::<f64>().sqrt();
        if r < lo || r > hi {
            continue;
        }
        let v = z.norm() * (rate * r).exp();
        if r <= lo + h {
            inner = inner.max(v);
        }
        worst = worst.max(v);
    }
    if inner == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(worst / inner)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use num_complex::Complex64;

    fn law(b: f64, r: f64) -> f64 {
        (-b * r * r / 4.0).exp() / (r.sqrt() * (1.0 + b * r).powf(0.5 + 1.0 / b))
    }

    #[test]
    fn synthetic_law_is_flat() {
        let g = Grid::new(2, 14.0, 257).unwrap();
        let b = 0.2;
        let u = ComplexField::from_fn(&g, |x| {
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt().max(1e-3);
            Complex64::new(law(b, r), 0.0)
        });
        let fit = fit_decay_2d(&u, b, [6.0, 10.0]).unwrap();
        assert!(
            fit.log_amplitude.abs() < 1e-3 && fit.residual < 1e-3,
            "{} {}",
            fit.log_amplitude,
            fit.residual
        );
        let control = fit_decay_exponential(&u, [6.0, 10.0]).unwrap();
        assert!(control.residual > 10.0 * fit.residual);
        assert!(fit.radii.len() >= 20);
        assert!(fit.to_csv().starts_with("r,mean_modulus,compensated\n"));
    }

    #[test]
    fn synthetic_law_exact_on_fine_grid() {
        // Interpolation error of log|u| is O(h²), though aliasing against the
        // lattice makes the ratio irregular.
        let b = 0.5;
        let mut res = Vec::new();
        for n in [129, 257] {
            let g = Grid::new(2, 10.0, n).unwrap();
            let u = ComplexField::from_fn(&g, |x| {
                let r = (x[0] * x[0] + x[1] * x[1]).sqrt().max(1e-3);
                Complex64::new(law(b, r), 0.0)
            });
            res.push(fit_decay_2d(&u, b, [4.0, 8.0]).unwrap().residual);
        }
        assert!(res[1] < 1e-4 && res[0] / res[1] > 2.0, "{res:?}");
    }

    #[test]
    fn refusals() {
        let g = Grid::new(2, 6.0, 65).unwrap();
        let u = ComplexField::from_fn(&g, |x| {
            Complex64::new((-(x[0] * x[0] + x[1] * x[1]).sqrt()).exp(), 0.0)
        });
        assert!(matches!(
            fit_decay_2d(&u, 0.01, [1.0, 3.0]),
            Err(Error::FieldTooWeak(_))
        ));
        assert!(matches!(
            fit_decay_2d(&u, 0.2, [1.0, 5.9]),
            Err(Error::WindowOutsideReliableRegion { .. })
        ));
        let tiny = ComplexField::from_fn(&g, |x| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            Complex64::new(if r2 > 9.0 { 0.0 } else { (-r2).exp() }, 0.0)
        });
        assert!(matches!(
            fit_decay_exponential(&tiny, [1.0, 5.0]),
            Err(Error::WindowOutsideReliableRegion { .. })
        ));
    }

    #[test]
    fn gaussian_bound_synthetic_and_control() {
        let b = 0.2;
        let landau = |g: &Grid| {
            ComplexField::from_fn(g, |x| {
                Complex64::new(
                    (-b * (x[0] * x[0] + x[1] * x[1]) / 4.0 - x[2].abs()).exp(),
                    0.0,
                )
            })
        };
        let slow = |g: &Grid| {
            ComplexField::from_fn(g, |x| {
                Complex64::new(
                    (-(x[0] * x[0] + x[1] * x[1]).sqrt() - x[2].abs()).exp(),
                    0.0,
                )
            })
        };
        let small = Grid::new(3, 10.0, 41).unwrap();
        let large = Grid::new(3, 16.0, 65).unwrap();
        let axis = [0.0, 0.0, b];
        let s1 = gaussian_bound_3d(&landau(&small), axis).unwrap();
        let s2 = gaussian_bound_3d(&landau(&large), axis).unwrap();
        assert!(s1.abs() < 1e-12 && s2.abs() < 1e-12, "{s1} {s2}");
        let c1 = gaussian_bound_3d(&slow(&small), axis).unwrap();
        let c2 = gaussian_bound_3d(&slow(&large), axis).unwrap();
        assert!(c2 > 10.0 * c1.max(1e-3), "{c1} {c2}");
    }

    #[test]
    fn kato_bound_holds_for_fast_decay() {
        let g = Grid::new(2, 10.0, 129).unwrap();
        let fast = ComplexField::from_fn(&g, |x| {
            Complex64::new((-1.2 * (x[0] * x[0] + x[1] * x[1]).sqrt()).exp(), 0.0)
        });
        assert!(kato_bound_ratio(&fast, [3.0, 8.0], 0.1).unwrap() <= 1.0 + 1e-9);
        let slow = ComplexField::from_fn(&g, |x| {
            Complex64::new((-0.5 * (x[0] * x[0] + x[1] * x[1]).sqrt()).exp(), 0.0)
        });
        assert!(kato_bound_ratio(&slow, [3.0, 8.0], 0.1).unwrap() > 2.0);
    }
}
