//! Constant magnetic fields in the symmetric gauge.
//!
//! A field is an antisymmetric matrix `b` with `B[x, v] = xᵀ b v`. The
//! symmetric gauge potential is `A(x)[v] = ½ B[x, v]`, i.e. the covector with
//! components `A_j(x) = ½ Σ_i x_i b_ij`. It is divergence free, satisfies
//! `A(x)[x] = 0`, and `A_j` never depends on `x_j`, which makes the central
//! difference part of the discrete magnetic Laplacian exactly Hermitian.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{
    check_same, for_each_stencil, gradient_fd, vector_field_unchecked, ComplexField, Grid,
    ScalarField, VectorField,
};

const ANTISYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagneticData {
    dim: usize,
    b: [[f64; 3]; 3],
}

impl MagneticData {
    pub fn zero(dim: usize) -> Self {
        MagneticData {
            dim,
            b: [[0.0; 3]; 3],
        }
    }

    /// Planar field of strength `b`: `B = b dx₁∧dx₂`.
    pub fn planar(b: f64) -> Self {
        let mut m = Self::zero(2);
        m.b[0][1] = b;
        m.b[1][0] = -b;
        m
    }

    /// Three-dimensional field given by its axial vector β, so that
    /// `B[x, v] = β · (x × v)` and `A(x) = ½ β × x`.
    pub fn axial(beta: [f64; 3]) -> Self {
        let mut m = Self::zero(3);
        m.b[0][1] = beta[2];
        m.b[1][0] = -beta[2];
        m.b[1][2] = beta[0];
        m.b[2][1] = -beta[0];
        m.b[2][0] = beta[1];
        m.b[0][2] = -beta[1];
        m
    }

    /// Field of strength `b` in the canonical orientation: planar in 2d, along
    /// the last axis in 3d.
    pub fn uniform(dim: usize, b: f64) -> Result<Self> {
        match dim {
            2 => Ok(Self::planar(b)),
            3 => Ok(Self::axial([0.0, 0.0, b])),
            _ => Err(Error::InvalidDimension(dim)),
        }
    }

    /// Builds from `dim²` row-major entries.
    pub fn from_matrix(dim: usize, entries: &[f64]) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidDimension(dim));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("magnetic matrix"));
        }
        let mut m = Self::zero(dim);
        let scale = entries.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        let mut defect = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                // Exactly antisymmetric even when the input is only nearly so.
                m.b[i][j] = 0.5 * (entries[i * dim + j] - entries[j * dim + i]);
                defect = defect.max((entries[i * dim + j] + entries[j * dim + i]).abs());
            }
        }
        if defect > ANTISYMMETRY_TOL * scale {
            return Err(Error::NotAntisymmetric(defect));
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.b[i][j]
    }

    /// Row-major `dim²` entries.
    pub fn entries(&self) -> Vec<f64> {
        let d = self.dim;
        (0..d * d).map(|k| self.b[k / d][k % d]).collect()
    }

    /// |B| = (Σ_{i<j} b_ij²)^{1/2}; equals `b` for `planar(b)` and |β| for `axial(β)`.
    pub fn strength(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                s += self.b[i][j] * self.b[i][j];
            }
        }
        s.sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.strength() == 0.0
    }

    pub fn scaled(&self, t: f64) -> Self {
        let mut m = *self;
        for row in m.b.iter_mut() {
            for v in row.iter_mut() {
                *v *= t;
            }
        }
        m
    }

    /// Axial vector β of a 3d field.
    pub fn axis(&self) -> Option<[f64; 3]> {
        (self.dim == 3).then(|| [self.b[1][2], self.b[2][0], self.b[0][1]])
    }

    /// Potential covector A(x), components A_j(x) = ½ Σ_i x_i b_ij.
    pub fn potential(&self, x: &[f64]) -> [f64; 3] {
        let mut a = [0.0; 3];
        for (j, aj) in a.iter_mut().enumerate().take(self.dim) {
            *aj = 0.5 * (0..self.dim).map(|i| x[i] * self.b[i][j]).sum::<f64>();
        }
        a
    }

    /// The vector B(x) with B(x)[v] = B[x, v], i.e. twice the potential.
    pub fn field_at(&self, x: &[f64]) -> [f64; 3] {
        self.potential(x).map(|v| 2.0 * v)
    }

    /// |A(x)|² = ¼ |bᵀ x|².
    pub fn potential_sq(&self, x: &[f64]) -> f64 {
        self.potential(x).iter().map(|v| v * v).sum()
    }
}

/// A(x)[v] = ½ xᵀ b v.
pub fn potential_apply(m: &MagneticData, x: &[f64], v: &[f64]) -> Result<f64> {
    for len in [x.len(), v.len()] {
        if len != m.dim {
            return Err(Error::DimensionMismatch {
                expected: m.dim,
                found: len,
            });
        }
    }
    // Pairing the (i, j) and (j, i) terms makes A(x)[x] vanish exactly.
    let mut s = 0.0;
    for i in 0..m.dim {
        for j in i + 1..m.dim {
            s += m.b[i][j] * (x[i] * v[j] - x[j] * v[i]);
        }
    }
    Ok(0.5 * s)
}

/// General linear potential A(x)[v] = xᵀ M v, used to compare gauges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearPotential {
    dim: usize,
    matrix: [[f64; 3]; 3],
}

impl LinearPotential {
    pub fn symmetric(m: &MagneticData) -> Self {
        let mut matrix = m.b;
        for row in matrix.iter_mut() {
            for v in row.iter_mut() {
                *v *= 0.5;
            }
        }
        LinearPotential { dim: m.dim, matrix }
    }

    /// Landau gauge A(x) = (0, b x₁) for a planar field of strength `b`.
    pub fn landau(b: f64) -> Self {
        let mut matrix = [[0.0; 3]; 3];
        matrix[0][1] = b;
        LinearPotential { dim: 2, matrix }
    }

    /// A + dψ for ψ(x) = ½ xᵀ S x with `s` symmetric.
    pub fn plus_quadratic_gradient(&self, s: [[f64; 3]; 3]) -> Self {
        let mut out = *self;
        for i in 0..3 {
            for j in 0..3 {
                out.matrix[i][j] += s[i][j];
            }
        }
        out
    }

    pub fn covector(&self, x: &[f64]) -> [f64; 3] {
        let mut a = [0.0; 3];
        for (j, aj) in a.iter_mut().enumerate().take(self.dim) {
            *aj = (0..self.dim).map(|i| x[i] * self.matrix[i][j]).sum::<f64>();
        }
        a
    }

    /// A(x)[x].
    pub fn self_pairing(&self, x: &[f64]) -> f64 {
        let a = self.covector(x);
        (0..self.dim).map(|j| a[j] * x[j]).sum()
    }
}

/// D_A u = Du + iAu for an arbitrary linear potential.
pub fn covariant_gradient_linear(u: &ComplexField, a: &LinearPotential) -> VectorField {
    covariant_with(u, |x| a.covector(x))
}

/// D_A u = Du + iAu in the symmetric gauge.
pub fn covariant_gradient(u: &ComplexField, m: &MagneticData) -> VectorField {
    covariant_with(u, |x| m.potential(x))
}

fn covariant_with(u: &ComplexField, potential: impl Fn(&[f64]) -> [f64; 3]) -> VectorField {
    let grid = *u.grid();
    let du = gradient_fd(u);
    let mut comps: Vec<Vec<Complex64>> = du.components().to_vec();
    for (idx, x) in grid.positions().iter().enumerate() {
        let a = potential(x);
        let ui = u.values()[idx];
        for (axis, comp) in comps.iter_mut().enumerate() {
            comp[idx] += Complex64::i() * a[axis] * ui;
        }
    }
    vector_field_unchecked(grid, comps)
}

/// The discrete operator −Δ_A + V + shift on a fixed grid.
///
/// With `coupled = true` this is −Δ_h − 2iA·∇_c + |A|² + shift (the magnetic
/// Laplacian); otherwise the first-order term is dropped and only the scalar
/// potential |A|² remains, which is the operator of the decoupled problem.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    grid: Grid,
    potential: Vec<[f64; 3]>,
    potential_sq: Vec<f64>,
    coupled: bool,
    shift: f64,
    inv_h: [f64; 3],
    inv_h2: [f64; 3],
}

impl Hamiltonian {
    pub fn magnetic(grid: &Grid, m: &MagneticData, shift: f64) -> Self {
        Self::build(grid, m, shift, true)
    }

    pub fn decoupled(grid: &Grid, m: &MagneticData, shift: f64) -> Self {
        Self::build(grid, m, shift, false)
    }

    fn build(grid: &Grid, m: &MagneticData, shift: f64, coupled: bool) -> Self {
        let potential: Vec<[f64; 3]> = grid.positions().iter().map(|x| m.potential(x)).collect();
        let potential_sq = potential
            .iter()
            .map(|a| a.iter().map(|v| v * v).sum())
            .collect();
        let mut inv_h = [0.0; 3];
        let mut inv_h2 = [0.0; 3];
        for (axis, h) in grid.spacing().iter().enumerate() {
            inv_h[axis] = 1.0 / h;
            inv_h2[axis] = 1.0 / (h * h);
        }
        Hamiltonian {
            grid: *grid,
            potential,
            potential_sq,
            coupled: coupled && !m.is_zero(),
            shift,
            inv_h,
            inv_h2,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn is_coupled(&self) -> bool {
        self.coupled
    }

    pub fn potential_sq(&self) -> &[f64] {
        &self.potential_sq
    }

    pub fn apply_into(&self, u: &[Complex64], out: &mut [Complex64]) {
        let dim = self.grid.dim();
        let diag0 = 2.0 * self.inv_h2.iter().sum::<f64>() + self.shift;
        let (inv_h, inv_h2) = (self.inv_h, self.inv_h2);
        let minus_i = Complex64::new(0.0, -1.0);
        if self.coupled {
            for_each_stencil(&self.grid, u, |idx, lo, hi| {
                let a = &self.potential[idx];
                let mut acc = u[idx] * (diag0 + self.potential_sq[idx]);
                let mut drift = Complex64::new(0.0, 0.0);
                for axis in 0..dim {
                    acc -= (lo[axis] + hi[axis]) * inv_h2[axis];
                    drift += (hi[axis] - lo[axis]) * (a[axis] * inv_h[axis]);
                }
                out[idx] = acc + minus_i * drift;
            });
        } else {
            for_each_stencil(&self.grid, u, |idx, lo, hi| {
                let mut acc = u[idx] * (diag0 + self.potential_sq[idx]);
                for axis in 0..dim {
                    acc -= (lo[axis] + hi[axis]) * inv_h2[axis];
                }
                out[idx] = acc;
            });
        }
    }

    pub fn apply(&self, u: &ComplexField) -> ComplexField {
        let mut out = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        self.apply_into(u.values(), &mut out);
        ComplexField::from_values_unchecked(&self.grid, out)
    }
}

/// −Δ_A u = −Δu − 2iA·∇u + |A|²u (div A = 0 in the symmetric gauge).
pub fn magnetic_laplacian(u: &ComplexField, m: &MagneticData) -> ComplexField {
    Hamiltonian::magnetic(u.grid(), m, 0.0).apply(u)
}

/// τ_a u(x) = e^{−iA(a)[x]} u(x − a) for a lattice vector `a`.
pub fn magnetic_translate(u: &ComplexField, m: &MagneticData, a: &[f64]) -> Result<ComplexField> {
    let grid = *u.grid();
    let dim = grid.dim();
    if a.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: a.len(),
        });
    }
    let mut steps = [0i64; 3];
    for axis in 0..dim {
        let t = a[axis] / grid.spacing()[axis];
        let r = t.round();
        if (t - r).abs() > 1e-9 * r.abs().max(1.0) {
            return Err(Error::OffLatticeShift(a[axis]));
        }
        steps[axis] = r as i64;
    }
    let mut shift = [0.0; 3];
    for axis in 0..dim {
        shift[axis] = steps[axis] as f64 * grid.spacing()[axis];
    }
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    let pts = grid.points();
    for (idx, slot) in out.iter_mut().enumerate() {
        let k = grid.multi_index(idx);
        let mut src = [0usize; 3];
        let mut inside = true;
        for axis in 0..dim {
            let s = k[axis] as i64 - steps[axis];
            if s < 0 || s >= pts[axis] as i64 {
                inside = false;
                break;
            }
            src[axis] = s as usize;
        }
        if !inside {
            continue;
        }
        let x = grid.position(idx);
        let phase = potential_apply(m, &shift[..dim], &x[..dim])?;
        *slot = Complex64::from_polar(1.0, -phase) * u.values()[grid.index(src)];
    }
    Ok(ComplexField::from_values_unchecked(&grid, out))
}

/// ũ = e^{−iψ} u.
pub fn gauge_transform(u: &ComplexField, psi: &ScalarField) -> Result<ComplexField> {
    check_same(u.grid(), psi.grid())?;
    let values = u
        .values()
        .iter()
        .zip(psi.values())
        .map(|(&z, &p)| z * Complex64::from_polar(1.0, -p))
        .collect();
    Ok(ComplexField::from_values_unchecked(u.grid(), values))
}

/// Max over interior nodes of |⟨iA(x)u(x), Du(x)⟩|, summed over components.
pub fn decoupling_defect(u: &ComplexField, m: &MagneticData) -> f64 {
    let grid = *u.grid();
    let du = gradient_fd(u);
    let mut worst = 0.0f64;
    for (idx, x) in grid.positions().iter().enumerate() {
        if grid.boundary_distance(idx) < 1 {
            continue;
        }
        let a = m.potential(x);
        let ui = u.values()[idx];
        let mut s = 0.0;
        for axis in 0..grid.dim() {
            let lhs = Complex64::i() * a[axis] * ui;
            let d = du.component(axis)[idx];
            s += lhs.re * d.re + lhs.im * d.im;
        }
        worst = worst.max(s.abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::inner_product;

    fn interior(g: &Grid, idx: usize) -> bool {
        g.boundary_distance(idx) >= 1
    }

    #[test]
    fn potential_values() {
        let m = MagneticData::planar(1.0);
        assert_eq!(potential_apply(&m, &[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.5);
        let x = [0.3, -1.7];
        assert_eq!(potential_apply(&m, &x, &x).unwrap(), 0.0);
        assert!(matches!(
            potential_apply(&m, &[1.0, 0.0, 0.0], &[0.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!((m.potential_sq(&[2.0, 1.0]) - 5.0 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn axial_field_matches_cross_product() {
        let beta = [0.3, -0.2, 0.7];
        let m = MagneticData::axial(beta);
        let cross = |a: [f64; 3], b: [f64; 3]| {
            [
                a[1] * b[2] - a[2] * b[1],
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0],
            ]
        };
        let dot3 = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        for (x, v) in [
            ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
            ([0.4, -1.1, 2.0], [1.5, 0.2, -0.3]),
        ] {
            let expected = 0.5 * dot3(beta, cross(x, v));
            assert!((potential_apply(&m, &x, &v).unwrap() - expected).abs() < 1e-14);
            let a = m.potential(&x);
            let half = cross(beta, x).map(|c| 0.5 * c);
            for j in 0..3 {
                assert!((a[j] - half[j]).abs() < 1e-14);
            }
        }
        assert!((m.strength() - dot3(beta, beta).sqrt()).abs() < 1e-15);
        assert_eq!(m.axis().unwrap(), beta);
    }

    #[test]
    fn matrix_validation() {
        assert!(MagneticData::from_matrix(2, &[0.0, 1.0, -1.0, 0.0]).is_ok());
        assert!(matches!(
            MagneticData::from_matrix(2, &[0.0, 1.0, 1.0, 0.0]),
            Err(Error::NotAntisymmetric(_))
        ));
        assert!(MagneticData::from_matrix(2, &[0.0, 1.0]).is_err());
    }

    fn blob(g: &Grid) -> ComplexField {
        ComplexField::from_fn(g, |x| {
            let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
            Complex64::new((-r2).exp() * (1.0 + 0.3 * x[0]), 0.5 * x[1] * (-r2).exp())
        })
    }

    #[test]
    fn zero_field_reduces_to_plain_calculus() {
        let g = Grid::new(2, 4.0, 65).unwrap();
        let u = blob(&g);
        let m = MagneticData::zero(2);
        assert_eq!(covariant_gradient(&u, &m), gradient_fd(&u));
        let lap = crate::grid::laplacian_fd(&u);
        let ml = magnetic_laplacian(&u, &m);
        for (a, b) in ml.values().iter().zip(lap.values()) {
            assert!((a + b).norm() < 1e-9);
        }
    }

    #[test]
    fn covariant_gradient_of_real_field() {
        let g = Grid::new(2, 4.0, 65).unwrap();
        let m = MagneticData::planar(0.7);
        let u = ComplexField::from_fn(&g, |x| {
            Complex64::new((-(x[0] * x[0] + x[1] * x[1])).exp(), 0.0)
        });
        let d = covariant_gradient(&u, &m);
        for idx in 0..g.len() {
            let a = m.potential(&g.position(idx));
            for axis in 0..2 {
                let expected = a[axis] * u.values()[idx].re;
                assert!((d.component(axis)[idx].im - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn magnetic_laplacian_is_hermitian() {
        let g = Grid::new(3, 3.0, 33).unwrap();
        let m = MagneticData::axial([0.2, 0.5, -0.4]);
        let u = blob(&g);
        let v = ComplexField::from_fn(&g, |x| {
            Complex64::new(x[2].cos() * (-x[0] * x[0]).exp(), x[0] * 0.1)
        });
        let lu = magnetic_laplacian(&u, &m);
        let lv = magnetic_laplacian(&v, &m);
        let a = inner_product(&lu, &v).unwrap();
        let b = inner_product(&u, &lv).unwrap();
        assert!((a - b).abs() < 1e-11 * a.abs().max(1.0));
    }

    fn ibp_gap(n: usize) -> f64 {
        let g = Grid::new(2, 6.0, n).unwrap();
        let m = MagneticData::planar(0.5);
        let u = ComplexField::from_fn(&g, |x| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            Complex64::from_polar((-r2).exp(), 0.7 * x[0] - 0.2 * x[1] * x[1])
        });
        let q = inner_product(&magnetic_laplacian(&u, &m), &u).unwrap();
        let k = covariant_gradient(&u, &m).norm_sq();
        (q - k).abs()
    }

    #[test]
    fn integration_by_parts_to_second_order() {
        let coarse = ibp_gap(65);
        let fine = ibp_gap(129);
        let order = (coarse / fine).log2();
        assert!(order > 1.8, "order {order}");
    }

    fn landau_error(n: usize, b: f64) -> f64 {
        let g = Grid::new(2, 8.0, n).unwrap();
        let m = MagneticData::planar(b);
        let u = ComplexField::from_fn(&g, |x| {
            Complex64::new((-b * (x[0] * x[0] + x[1] * x[1]) / 4.0).exp(), 0.0)
        });
        let lu = magnetic_laplacian(&u, &m);
        (0..g.len())
            .filter(|&i| g.boundary_distance(i) >= 1)
            .map(|i| (lu.values()[i] - u.values()[i] * b).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn lowest_landau_level() {
        let b = 2.0;
        let coarse = landau_error(65, b);
        let fine = landau_error(129, b);
        assert!(fine < 2e-2, "{fine}");
        assert!((coarse / fine).log2() > 1.8);
    }

    #[test]
    fn translation_identity_and_composition() {
        let g = Grid::new(2, 4.0, 65).unwrap();
        let m = MagneticData::planar(0.8);
        let u = blob(&g);
        assert_eq!(magnetic_translate(&u, &m, &[0.0, 0.0]).unwrap(), u);
        let h = g.spacing()[0];
        let a = [3.0 * h, -2.0 * h];
        let b = [-1.0 * h, 5.0 * h];
        let ab = [a[0] + b[0], a[1] + b[1]];
        let lhs = magnetic_translate(&magnetic_translate(&u, &m, &a).unwrap(), &m, &b).unwrap();
        let rhs = magnetic_translate(&u, &m, &ab).unwrap();
        let phase = Complex64::from_polar(1.0, potential_apply(&m, &a, &b).unwrap());
        for idx in 0..g.len() {
            let k = g.multi_index(idx);
            // Nodes whose intermediate source left the box were dropped on the left side only.
            let defined = (0..2).all(|ax| {
                let s1 = k[ax] as i64 - (b[ax] / h).round() as i64;
                let s2 = s1 - (a[ax] / h).round() as i64;
                (0..65).contains(&s1) && (0..65).contains(&s2)
            });
            if defined {
                assert!((lhs.values()[idx] - phase * rhs.values()[idx]).norm() < 1e-13);
            }
        }
        assert!(matches!(
            magnetic_translate(&u, &m, &[0.5 * h, 0.0]),
            Err(Error::OffLatticeShift(_))
        ));
    }

    #[test]
    fn translation_commutes_with_covariant_magnitude() {
        // |D_A τ_a u| at x equals |D_A u| at x − a (interior, up to rounding of stencils).
        let g = Grid::new(2, 6.0, 97).unwrap();
        let m = MagneticData::planar(0.6);
        let u = blob(&g);
        let h = g.spacing()[0];
        let a = [4.0 * h, -3.0 * h];
        let t = magnetic_translate(&u, &m, &a).unwrap();
        let dt = covariant_gradient(&t, &m);
        let du = covariant_gradient(&u, &m);
        for idx in 0..g.len() {
            let k = g.multi_index(idx);
            if !(10..87).contains(&k[0]) || !(10..87).contains(&k[1]) {
                continue;
            }
            let src = g.index([k[0] - 4, k[1] + 3, 0]);
            let lhs: f64 = (0..2).map(|ax| dt.component(ax)[idx].norm_sqr()).sum();
            let rhs: f64 = (0..2).map(|ax| du.component(ax)[src].norm_sqr()).sum();
            assert!((lhs - rhs).abs() < 5e-3 * (1.0 + rhs), "{lhs} {rhs} {k:?}");
        }
    }

    #[test]
    fn gauge_transform_is_unimodular() {
        let g = Grid::new(2, 4.0, 65).unwrap();
        let u = blob(&g);
        let zero = ScalarField::from_fn(&g, |_| 0.0);
        assert_eq!(gauge_transform(&u, &zero).unwrap(), u);
        let psi = ScalarField::from_fn(&g, |x| 3.0 * x[0] * x[1] + x[0]);
        let t = gauge_transform(&u, &psi).unwrap();
        for (a, b) in t.values().iter().zip(u.values()) {
            assert!((a.norm() - b.norm()).abs() < 1e-15);
        }
        let other = Grid::new(2, 4.0, 67).unwrap();
        assert!(gauge_transform(&u, &ScalarField::from_fn(&other, |_| 0.0)).is_err());
    }

    fn gauge_covariance_error(n: usize) -> f64 {
        // |D_{A+dψ}(e^{−iψ} v)| = |D_A v| for ψ = ½ xᵀ S x.
        let g = Grid::new(2, 5.0, n).unwrap();
        let m = MagneticData::planar(0.4);
        let s = [[0.3, 0.1, 0.0], [0.1, -0.2, 0.0], [0.0; 3]];
        let v = blob(&g);
        let psi = ScalarField::from_fn(&g, |x| {
            0.5 * (s[0][0] * x[0] * x[0] + 2.0 * s[0][1] * x[0] * x[1] + s[1][1] * x[1] * x[1])
        });
        let u = gauge_transform(&v, &psi).unwrap();
        let shifted = LinearPotential::symmetric(&m).plus_quadratic_gradient(s);
        let du = covariant_gradient_linear(&u, &shifted);
        let dv = covariant_gradient(&v, &m);
        (0..g.len())
            .filter(|&i| interior(&g, i))
            .map(|i| {
                let a: f64 = (0..2).map(|ax| du.component(ax)[i].norm_sqr()).sum();
                let b: f64 = (0..2).map(|ax| dv.component(ax)[i].norm_sqr()).sum();
                (a.sqrt() - b.sqrt()).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn gauge_covariance_refines_at_second_order() {
        let coarse = gauge_covariance_error(65);
        let fine = gauge_covariance_error(129);
        assert!((coarse / fine).log2() > 1.8, "{coarse} {fine}");
    }

    fn landau_to_symmetric_gap(n: usize) -> f64 {
        let b = 0.5;
        let g = Grid::new(2, 6.0, n).unwrap();
        let landau = LinearPotential::landau(b);
        let v = ComplexField::from_fn(&g, |x| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            Complex64::from_polar((-0.5 * r2).exp(), 0.3 * x[0])
        });
        let psi = ScalarField::from_fn(&g, |x| -landau.self_pairing(x) / 2.0);
        let u = gauge_transform(&v, &psi).unwrap();
        let k_landau = covariant_gradient_linear(&v, &landau).norm_sq();
        let k_sym = covariant_gradient(&u, &MagneticData::planar(b)).norm_sq();
        (k_landau - k_sym).abs()
    }

    #[test]
    fn landau_gauge_maps_to_symmetric_gauge() {
        let coarse = landau_to_symmetric_gap(65);
        let fine = landau_to_symmetric_gap(129);
        assert!(fine < 1e-2);
        assert!((coarse / fine).log2() > 1.8, "{coarse} {fine}");
    }

    fn radial_defect(n: usize) -> f64 {
        let g = Grid::new(2, 6.0, n).unwrap();
        let m = MagneticData::planar(0.5);
        let u = ComplexField::from_fn(&g, |x| {
            Complex64::new((-(x[0] * x[0] + x[1] * x[1])).exp(), 0.0)
        });
        decoupling_defect(&u, &m)
    }

    #[test]
    fn decoupling_defect_cases() {
        // Real fields have ⟨iAu, Du⟩ = 0 pointwise, whatever their symmetry.
        assert!(radial_defect(65) < 1e-14);
        let g = Grid::new(2, 6.0, 65).unwrap();
        let m = MagneticData::planar(0.5);
        let c = ComplexField::from_fn(&g, |_| Complex64::new(1.0, 1.0));
        assert_eq!(decoupling_defect(&c, &m), 0.0);
        // A complex, off-centre bump is a negative control.
        let off = ComplexField::from_fn(&g, |x| {
            let r2 = (x[0] - 1.0).powi(2) + x[1] * x[1];
            Complex64::from_polar((-r2).exp(), 0.8 * x[0])
        });
        assert!(decoupling_defect(&off, &m) > 0.05);
    }
}
