//! Shooting solver for the radial groundstate at zero field.
//!
//! The profile solves u″ + (N−1)u′/r − u + u^{p−1} = 0 with u′(0) = 0 and
//! u → 0. The central value is found by bisection: overshooting solutions
//! cross zero, undershooting ones turn back up. Past the radius where the
//! two bracketing solutions separate, the profile is continued by the
//! decaying branch, integrated inward from the asymptotics
//! u ~ C r^{−ν} K_ν(r), ν = (N−2)/2.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{ComplexField, Grid};
use crate::variational::FunctionalParams;

const RTOL: f64 = 1e-12;
const ATOL: f64 = 1e-30;
const SEPARATION: f64 = 1e-7;
const MIN_FIT_RADIUS: f64 = 6.0;

#[derive(Debug, Clone, Serialize)]
pub struct RadialProfile {
    pub dim: usize,
    pub p: f64,
    pub r_max: f64,
    /// u₀(0).
    pub center_value: f64,
    /// Radius beyond which the asymptotic continuation is used.
    pub fit_radius: f64,
    /// ∫|u₀|².
    pub mass: f64,
    /// ∫|u₀|^p.
    pub power_integral: f64,
    /// ∫|x|²|u₀|².
    pub second_moment: f64,
    /// E(0) = (½ − 1/p)∫|u₀|^p.
    pub energy: f64,
    #[serde(skip)]
    pub r: Vec<f64>,
    #[serde(skip)]
    pub u: Vec<f64>,
    #[serde(skip)]
    pub du: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Outcome {
    /// Crossed zero: central value too large.
    Crossed,
    /// u′ became positive: central value too small.
    Rising,
    /// Reached the end of the mesh without deciding.
    Reached,
}

struct Ode {
    dim: f64,
    fp: FunctionalParams,
}

impl Ode {
    #[inline]
    fn rhs(&self, r: f64, y: [f64; 2]) -> [f64; 2] {
        let [u, v] = y;
        let nl = self.fp.weight(u.abs()) * u;
        [v, -(self.dim - 1.0) * v / r + u - nl]
    }

    fn rk4(&self, r: f64, y: [f64; 2], h: f64) -> [f64; 2] {
        let add = |y: [f64; 2], k: [f64; 2], s: f64| [y[0] + s * k[0], y[1] + s * k[1]];
        let k1 = self.rhs(r, y);
        let k2 = self.rhs(r + 0.5 * h, add(y, k1, 0.5 * h));
        let k3 = self.rhs(r + 0.5 * h, add(y, k2, 0.5 * h));
        let k4 = self.rhs(r + h, add(y, k3, h));
        [
            y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ]
    }

    /// One step-doubling trial: the extrapolated state and the scaled error.
    fn trial(&self, r: f64, y: [f64; 2], step: f64) -> ([f64; 2], f64) {
        let full = self.rk4(r, y, step);
        let half = self.rk4(r, y, 0.5 * step);
        let two = self.rk4(r + 0.5 * step, half, 0.5 * step);
        let mut err = 0.0f64;
        for i in 0..2 {
            let scale = ATOL + RTOL * two[i].abs().max(y[i].abs());
            err = err.max((two[i] - full[i]).abs() / 15.0 / scale);
        }
        let next = [
            two[0] + (two[0] - full[0]) / 15.0,
            two[1] + (two[1] - full[1]) / 15.0,
        ];
        (next, err)
    }

    /// Adaptive integration from `r0` to exactly `r1` (either direction).
    /// With `events`, stops early on a zero crossing or a rising slope.
    fn integrate(
        &self,
        r0: f64,
        y0: [f64; 2],
        r1: f64,
        h: &mut f64,
        events: bool,
    ) -> ([f64; 2], Option<Outcome>) {
        let mut r = r0;
        let mut y = y0;
        let dir = (r1 - r0).signum();
        while (r1 - r) * dir > 0.0 {
            let step = if h.abs() < (r1 - r).abs() {
                h.abs() * dir
            } else {
                r1 - r
            };
            let (next, err) = self.trial(r, y, step);
            if err <= 1.0 {
                r = if step == r1 - r { r1 } else { r + step };
                y = next;
                if events && y[0] < 0.0 {
                    return (y, Some(Outcome::Crossed));
                }
                if events && y[1] > 0.0 {
                    return (y, Some(Outcome::Rising));
                }
            }
            let factor = if err == 0.0 {
                4.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 4.0)
            };
            *h = step.abs() * factor;
        }
        (y, None)
    }

    /// Series start u(r) = u₀ + c r² + d r⁴ near the singular point.
    fn series(&self, u0: f64, r: f64) -> [f64; 2] {
        let n = self.dim;
        let p = self.fp.p();
        let f0 = u0 - self.fp.weight(u0) * u0;
        let df0 = 1.0 - (p - 1.0) * self.fp.weight(u0);
        let c = f0 / (2.0 * n);
        let d = df0 * c / (4.0 * (n + 2.0));
        [
            u0 + c * r * r + d * r.powi(4),
            2.0 * c * r + 4.0 * d * r.powi(3),
        ]
    }

    /// Integrates on the mesh; returns the samples up to the first event.
    fn shoot(&self, u0: f64, mesh: &[f64]) -> (Outcome, Vec<[f64; 2]>) {
        let mut samples = vec![[u0, 0.0]];
        let r_start = (mesh[1] * 1e-2).min(1e-4);
        let mut y = self.series(u0, r_start);
        let mut r = r_start;
        let mut h = mesh[1] * 0.1;
        for &target in &mesh[1..] {
            let (next, event) = self.integrate(r, y, target, &mut h, true);
            if let Some(outcome) = event {
                return (outcome, samples);
            }
            y = next;
            r = target;
            samples.push(y);
        }
        (Outcome::Reached, samples)
    }
}

/// Coefficients of the large-argument expansion of K_ν.
fn bessel_k_scaled(nu: f64, r: f64) -> f64 {
    // K_ν(r) e^{r} sqrt(2r/π) = Σ a_k(ν) / r^k.
    let mu = 4.0 * nu * nu;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 1..60 {
        let j = (2 * k - 1) as f64;
        let next = term * (mu - j * j) / (k as f64 * 8.0 * r);
        if next == 0.0 || next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Decaying solution r^{−ν}K_ν(r) of u″ + (N−1)u′/r − u = 0 and its
/// derivative −r^{−ν}K_{ν+1}(r), both without the common factor
/// sqrt(π/2) e^{−r} r^{−1/2}.
fn linear_tail(dim: usize, r: f64) -> (f64, f64) {
    let nu = (dim as f64 - 2.0) / 2.0;
    let pre = r.powf(-nu);
    (
        pre * bessel_k_scaled(nu, r),
        -pre * bessel_k_scaled(nu + 1.0, r),
    )
}

fn sphere_area(dim: usize) -> f64 {
    match dim {
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => unreachable!("dimension validated"),
    }
}

/// Composite Simpson rule on a uniform mesh (trapezoid on a trailing odd interval).
fn simpson(dr: f64, f: &[f64]) -> f64 {
    let n = f.len() - 1;
    let even = n - n % 2;
    let mut s = f[0] + f[even];
    for (i, v) in f.iter().enumerate().take(even).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    let mut total = s * dr / 3.0;
    if even < n {
        total += 0.5 * dr * (f[n - 1] + f[n]);
    }
    total
}

/// Shooting solution for the zero-field groundstate on `mesh` uniform intervals of [0, r_max].
pub fn solve_radial(
    dim: usize,
    fp: &FunctionalParams,
    r_max: f64,
    mesh: usize,
) -> Result<RadialProfile> {
    if !(2..=3).contains(&dim) {
        return Err(Error::InvalidDimension(dim));
    }
    FunctionalParams::new(fp.p(), dim)?;
    if !(r_max >= 20.0 && r_max.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "r_max = {r_max} must be at least 20"
        )));
    }
    if mesh < 200 {
        return Err(Error::InvalidArgument(format!(
            "mesh = {mesh} is too coarse"
        )));
    }
    let ode = Ode {
        dim: dim as f64,
        fp: *fp,
    };
    let dr = r_max / mesh as f64;
    let grid: Vec<f64> = (0..=mesh).map(|i| i as f64 * dr).collect();

    let mut lo = 0.5;
    if ode.shoot(lo, &grid).0 != Outcome::Rising {
        return Err(Error::BracketNotFound);
    }
    let mut hi = 2.0;
    while ode.shoot(hi, &grid).0 != Outcome::Crossed {
        lo = hi;
        hi *= 2.0;
        if hi > 1e4 {
            return Err(Error::BracketNotFound);
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match ode.shoot(mid, &grid).0 {
            Outcome::Crossed => hi = mid,
            _ => lo = mid,
        }
    }

    let (_, below) = ode.shoot(lo, &grid);
    let (_, above) = ode.shoot(hi, &grid);
    let common = below.len().min(above.len());
    let mut fit = 0;
    for i in 0..common {
        let (a, b) = (below[i][0], above[i][0]);
        if (a - b).abs() > SEPARATION * a.abs() {
            break;
        }
        fit = i;
    }
    // Keep away from the last few reliable samples.
    fit = fit.saturating_sub(8);
    let fit_radius = grid[fit];
    if fit_radius < MIN_FIT_RADIUS {
        return Err(Error::BracketNotFound);
    }

    let mut u = Vec::with_capacity(mesh + 1);
    let mut du = Vec::with_capacity(mesh + 1);
    for s in &below[..=fit] {
        u.push(0.5 * s[0] + 0.5 * above[u.len()][0]);
        du.push(0.5 * s[1] + 0.5 * above[du.len()][1]);
    }
    // Continue with the decaying solution, integrated inward from r_max
    // (stable for it) starting from the linear asymptotics. The amplitude is
    // matched to the shooting value at the fit radius.
    let target = u[fit];
    let tail_from = |amplitude: f64| -> Vec<[f64; 2]> {
        let r_end = grid[mesh];
        let (t, dt) = linear_tail(dim, r_end);
        let env = (-r_end).exp() * r_end.powf(-0.5);
        let mut y = [amplitude * t * env, amplitude * dt * env];
        let mut h = -0.1 * dr;
        let mut out = vec![y; mesh - fit + 1];
        for i in (fit..mesh).rev() {
            y = ode.integrate(grid[i + 1], y, grid[i], &mut h, false).0;
            out[i - fit] = y;
        }
        out
    };
    let r_fit = grid[fit];
    let (t_fit, _) = linear_tail(dim, r_fit);
    let mut amplitude = target / (t_fit * (-r_fit).exp() * r_fit.powf(-0.5));
    let mut tail = tail_from(amplitude);
    for _ in 0..6 {
        let ratio = target / tail[0][0];
        if (ratio - 1.0).abs() < 1e-15 {
            break;
        }
        amplitude *= ratio;
        tail = tail_from(amplitude);
    }
    for y in &tail[1..] {
        u.push(y[0]);
        du.push(y[1]);
    }

    for i in 1..u.len() {
        if !(u[i] < u[i - 1] && u[i] > 0.0) {
            return Err(Error::NonMonotoneProfile(grid[i]));
        }
    }

    let omega = sphere_area(dim);
    let radial = |f: &dyn Fn(usize) -> f64| -> f64 {
        let vals: Vec<f64> = (0..=mesh)
            .map(|i| f(i) * grid[i].powi(dim as i32 - 1))
            .collect();
        omega * simpson(dr, &vals)
    };
    let p = fp.p();
    let mass = radial(&|i| u[i] * u[i]);
    let power_integral = radial(&|i| u[i].powf(p));
    let second_moment = radial(&|i| grid[i] * grid[i] * u[i] * u[i]);
    let energy = fp.nehari_factor() * power_integral;

    Ok(RadialProfile {
        dim,
        p,
        r_max,
        center_value: u[0],
        fit_radius,
        mass,
        power_integral,
        second_moment,
        energy,
        r: grid,
        u,
        du,
    })
}

impl RadialProfile {
    pub fn spacing(&self) -> f64 {
        self.r[1] - self.r[0]
    }

    /// Cubic Hermite interpolation of u₀; zero beyond r_max.
    pub fn value(&self, r: f64) -> f64 {
        let dr = self.spacing();
        let t = r / dr;
        let n = self.r.len() - 1;
        if t >= n as f64 {
            return 0.0;
        }
        let i = t.floor() as usize;
        let s = t - i as f64;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s),
            s * (1.0 - s) * (1.0 - s),
            s * s * (3.0 - 2.0 * s),
            s * s * (s - 1.0),
        );
        h00 * self.u[i] + h10 * dr * self.du[i] + h01 * self.u[i + 1] + h11 * dr * self.du[i + 1]
    }

    /// Samples u₀(|x − centre|) on a grid.
    pub fn to_field(&self, grid: &Grid, centre: &[f64]) -> ComplexField {
        let dim = grid.dim();
        ComplexField::from_fn(grid, |x| {
            let r2: f64 = (0..dim)
                .map(|j| (x[j] - centre.get(j).copied().unwrap_or(0.0)).powi(2))
                .sum();
            Complex64::new(self.value(r2.sqrt()), 0.0)
        })
    }

    /// Max over the mesh of |u″ + (N−1)u′/r − u + u^{p−1}|, with u″ from a
    /// sixth-order difference of the stored derivative.
    pub fn ode_residual(&self) -> f64 {
        let dr = self.spacing();
        let c = [
            -1.0 / 60.0,
            3.0 / 20.0,
            -3.0 / 4.0,
            0.0,
            3.0 / 4.0,
            -3.0 / 20.0,
            1.0 / 60.0,
        ];
        let n = self.r.len();
        let mut worst = 0.0f64;
        for i in 3..n - 3 {
            let d2: f64 = (0..7).map(|k| c[k] * self.du[i + k - 3]).sum::<f64>() / dr;
            let u = self.u[i];
            let res =
                d2 + (self.dim as f64 - 1.0) * self.du[i] / self.r[i] - u + u.powf(self.p - 1.0);
            worst = worst.max(res.abs());
        }
        worst
    }
}
