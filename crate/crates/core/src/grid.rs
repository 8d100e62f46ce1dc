//! Uniform box grids centred at the origin and the discrete calculus on them.
//!
//! Fields are stored row-major with the last axis fastest. Values outside the
//! box are implicitly zero, so every stencil treats missing neighbours as 0.
//! A 2d grid is stored with a padded third axis of length one, which lets the
//! stencil drivers run the same triple loop in both dimensions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 33;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    points: [usize; 3],
    half_extent: [f64; 3],
    spacing: [f64; 3],
}

impl Grid {
    /// Isotropic grid with the same extent and point count on every axis.
    pub fn new(dim: usize, half_extent: f64, points: usize) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidDimension(dim));
        }
        Self::with_axes(&vec![half_extent; dim], &vec![points; dim])
    }

    pub fn with_axes(half_extents: &[f64], points: &[usize]) -> Result<Self> {
        let dim = half_extents.len();
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidDimension(dim));
        }
        if points.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: points.len(),
            });
        }
        let mut grid = Grid {
            dim,
            points: [1; 3],
            half_extent: [0.0; 3],
            spacing: [1.0; 3],
        };
        for axis in 0..dim {
            let (l, n) = (half_extents[axis], points[axis]);
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::NonpositiveExtent(l));
            }
            if n % 2 == 0 {
                return Err(Error::EvenPointCount(n));
            }
            if n < MIN_POINTS {
                return Err(Error::TooFewPoints(n));
            }
            grid.points[axis] = n;
            grid.half_extent[axis] = l;
            grid.spacing[axis] = 2.0 * l / (n - 1) as f64;
        }
        Ok(grid)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[usize] {
        &self.points[..self.dim]
    }

    pub fn half_extent(&self) -> &[f64] {
        &self.half_extent[..self.dim]
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing[..self.dim]
    }

    /// Largest spacing over the axes.
    pub fn max_spacing(&self) -> f64 {
        self.spacing().iter().cloned().fold(0.0, f64::max)
    }

    /// Smallest half extent over the axes.
    pub fn min_half_extent(&self) -> f64 {
        self.half_extent()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weight h^dim of a single node.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().iter().product()
    }

    pub(crate) fn padded_points(&self) -> [usize; 3] {
        self.points
    }

    pub(crate) fn strides(&self) -> [usize; 3] {
        [self.points[1] * self.points[2], self.points[2], 1]
    }

    pub fn coordinate(&self, axis: usize, k: usize) -> f64 {
        if axis >= self.dim {
            return 0.0;
        }
        -self.half_extent[axis] + k as f64 * self.spacing[axis]
    }

    pub fn multi_index(&self, idx: usize) -> [usize; 3] {
        let s = self.strides();
        [
            idx / s[0],
            (idx / s[1]) % self.points[1],
            idx % self.points[2],
        ]
    }

    pub fn index(&self, k: [usize; 3]) -> usize {
        let s = self.strides();
        k[0] * s[0] + k[1] * s[1] + k[2] * s[2]
    }

    /// Position of a node; unused axes read as zero.
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let k = self.multi_index(idx);
        [
            self.coordinate(0, k[0]),
            self.coordinate(1, k[1]),
            self.coordinate(2, k[2]),
        ]
    }

    pub fn center_index(&self) -> usize {
        self.index(self.points.map(|n| n / 2))
    }

    /// Node closest to `x`, or `None` when `x` lies outside the box.
    pub fn nearest_node(&self, x: &[f64]) -> Option<usize> {
        let mut k = [0usize; 3];
        for axis in 0..self.dim {
            let t = ((x[axis] + self.half_extent[axis]) / self.spacing[axis]).round();
            if t < 0.0 || t > (self.points[axis] - 1) as f64 {
                return None;
            }
            k[axis] = t as usize;
        }
        Some(self.index(k))
    }

    /// Distance in nodes from `idx` to the nearest box face.
    pub fn boundary_distance(&self, idx: usize) -> usize {
        let k = self.multi_index(idx);
        (0..self.dim)
            .map(|a| k[a].min(self.points[a] - 1 - k[a]))
            .min()
            .unwrap_or(0)
    }

    /// Positions of all nodes in storage order.
    pub fn positions(&self) -> Vec<[f64; 3]> {
        let mut out = Vec::with_capacity(self.len());
        let [n0, n1, n2] = self.points;
        for i0 in 0..n0 {
            let x0 = self.coordinate(0, i0);
            for i1 in 0..n1 {
                let x1 = self.coordinate(1, i1);
                for i2 in 0..n2 {
                    out.push([x0, x1, self.coordinate(2, i2)]);
                }
            }
        }
        out
    }
}

/// Complex amplitude per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: Grid,
    values: Vec<Complex64>,
}

/// Real samples per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

/// One complex component per spatial axis per node.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    components: Vec<Vec<Complex64>>,
}

impl ComplexField {
    pub fn zeros(grid: &Grid) -> Self {
        ComplexField {
            grid: *grid,
            values: vec![ZERO; grid.len()],
        }
    }

    pub fn from_values(grid: &Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if values
            .iter()
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::NonFinite("field values"));
        }
        Ok(ComplexField {
            grid: *grid,
            values,
        })
    }

    pub(crate) fn from_values_unchecked(grid: &Grid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ComplexField {
            grid: *grid,
            values,
        }
    }

    pub fn from_fn(grid: &Grid, mut f: impl FnMut(&[f64; 3]) -> Complex64) -> Self {
        let values = grid.positions().iter().map(|x| f(x)).collect();
        ComplexField {
            grid: *grid,
            values,
        }
    }

    pub fn from_real(field: &ScalarField) -> Self {
        ComplexField {
            grid: field.grid,
            values: field
                .values
                .iter()
                .map(|&v| Complex64::new(v, 0.0))
                .collect(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn modulus(&self) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|z| z.norm()).collect(),
        }
    }

    pub fn scaled(&self, t: Complex64) -> ComplexField {
        ComplexField {
            grid: self.grid,
            values: self.values.iter().map(|&z| z * t).collect(),
        }
    }

    /// `self + t * other`.
    pub fn add_scaled(&self, t: f64, other: &ComplexField) -> Result<ComplexField> {
        check_same(&self.grid, &other.grid)?;
        Ok(ComplexField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| a + b * t)
                .collect(),
        })
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.values, &self.values) * self.grid.cell_volume()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// Multilinear interpolation at an arbitrary point, zero outside the box.
    pub fn sample(&self, x: &[f64]) -> Complex64 {
        interpolate(&self.grid, x, |i| self.values[i], ZERO)
    }
}

impl ScalarField {
    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        Ok(ScalarField {
            grid: *grid,
            values,
        })
    }

    pub fn from_fn(grid: &Grid, mut f: impl FnMut(&[f64; 3]) -> f64) -> Self {
        let values = grid.positions().iter().map(|x| f(x)).collect();
        ScalarField {
            grid: *grid,
            values,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sample(&self, x: &[f64]) -> f64 {
        interpolate(&self.grid, x, |i| self.values[i], 0.0)
    }
}

impl VectorField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.components
    }

    pub fn component(&self, axis: usize) -> &[Complex64] {
        &self.components[axis]
    }

    /// ∫ Σ_j |v_j|².
    pub fn norm_sq(&self) -> f64 {
        self.components.iter().map(|c| dot(c, c)).sum::<f64>() * self.grid.cell_volume()
    }
}

pub(crate) fn vector_field_unchecked(grid: Grid, components: Vec<Vec<Complex64>>) -> VectorField {
    debug_assert_eq!(components.len(), grid.dim());
    VectorField { grid, components }
}

pub(crate) fn check_same(a: &Grid, b: &Grid) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Real pairing Σ Re(a) Re(b) + Im(a) Im(b) without the quadrature weight.
#[inline]
pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.re * y.re + x.im * y.im)
        .sum()
}

/// Drives a nearest-neighbour stencil over every node. The callback gets the
/// node index and the lower/upper neighbours along each axis (zero outside).
#[inline]
pub(crate) fn for_each_stencil<F>(grid: &Grid, u: &[Complex64], mut f: F)
where
    F: FnMut(usize, &[Complex64; 3], &[Complex64; 3]),
{
    let [n0, n1, n2] = grid.padded_points();
    let [s0, s1, _] = grid.strides();
    let mut lo = [ZERO; 3];
    let mut hi = [ZERO; 3];
    let mut idx = 0;
    for i0 in 0..n0 {
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                lo[0] = if i0 > 0 { u[idx - s0] } else { ZERO };
                hi[0] = if i0 + 1 < n0 { u[idx + s0] } else { ZERO };
                lo[1] = if i1 > 0 { u[idx - s1] } else { ZERO };
                hi[1] = if i1 + 1 < n1 { u[idx + s1] } else { ZERO };
                lo[2] = if i2 > 0 { u[idx - 1] } else { ZERO };
                hi[2] = if i2 + 1 < n2 { u[idx + 1] } else { ZERO };
                f(idx, &lo, &hi);
                idx += 1;
            }
        }
    }
}

fn interpolate<T, F>(grid: &Grid, x: &[f64], value: F, zero: T) -> T
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    F: Fn(usize) -> T,
{
    let dim = grid.dim();
    let mut base = [0usize; 3];
    let mut frac = [0.0f64; 3];
    let mut upper_ok = [false; 3];
    for axis in 0..dim {
        let t = (x[axis] + grid.half_extent[axis]) / grid.spacing[axis];
        let n = grid.points[axis];
        if !(t >= 0.0 && t <= (n - 1) as f64) {
            return zero;
        }
        let k = (t.floor() as usize).min(n - 1);
        base[axis] = k;
        frac[axis] = t - k as f64;
        upper_ok[axis] = k + 1 < n;
    }
    let mut acc = zero;
    for corner in 0..(1usize << dim) {
        let mut k = base;
        let mut w = 1.0;
        for axis in 0..dim {
            if corner & (1 << axis) != 0 {
                if !upper_ok[axis] {
                    w = 0.0;
                    break;
                }
                k[axis] += 1;
                w *= frac[axis];
            } else {
                w *= 1.0 - frac[axis];
            }
        }
        if w != 0.0 {
            acc = acc + value(grid.index(k)) * w;
        }
    }
    acc
}

/// Rectangle-rule quadrature Σ f(x_i) h^dim.
pub fn integrate(f: &ScalarField) -> Result<f64> {
    if f.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("integrand"));
    }
    Ok(f.values.iter().sum::<f64>() * f.grid.cell_volume())
}

/// Central differences with zero exterior values.
pub fn gradient_fd(u: &ComplexField) -> VectorField {
    let grid = u.grid;
    let dim = grid.dim();
    let inv2h: Vec<f64> = grid.spacing().iter().map(|h| 0.5 / h).collect();
    let mut components = vec![vec![ZERO; grid.len()]; dim];
    for_each_stencil(&grid, &u.values, |idx, lo, hi| {
        for axis in 0..dim {
            components[axis][idx] = (hi[axis] - lo[axis]) * inv2h[axis];
        }
    });
    VectorField { grid, components }
}

/// Standard (2·dim+1)-point Laplacian with zero exterior values.
pub fn laplacian_fd(u: &ComplexField) -> ComplexField {
    let grid = u.grid;
    let mut out = vec![ZERO; grid.len()];
    laplacian_into(&grid, &u.values, &mut out);
    ComplexField { grid, values: out }
}

pub(crate) fn laplacian_into(grid: &Grid, u: &[Complex64], out: &mut [Complex64]) {
    let dim = grid.dim();
    let mut inv_h2 = [0.0; 3];
    for axis in 0..dim {
        inv_h2[axis] = 1.0 / (grid.spacing[axis] * grid.spacing[axis]);
    }
    let diag: f64 = -2.0 * inv_h2.iter().sum::<f64>();
    for_each_stencil(grid, u, |idx, lo, hi| {
        let mut acc = u[idx] * diag;
        for axis in 0..dim {
            acc += (lo[axis] + hi[axis]) * inv_h2[axis];
        }
        out[idx] = acc;
    });
}

/// Real L² pairing ∫ ⟨u, v⟩ = Σ (Re u Re v + Im u Im v) h^dim.
pub fn inner_product(u: &ComplexField, v: &ComplexField) -> Result<f64> {
    check_same(&u.grid, &v.grid)?;
    Ok(dot(&u.values, &v.values) * u.grid.cell_volume())
}
