//! The action functional, its L² gradient, the Rayleigh quotient and the
//! Nehari scaling.
//!
//! The quadratic part of the action is the form of the discrete operator
//! −Δ_A + 1 itself, `⟨(−Δ_A + 1)u, u⟩`, rather than `‖D_A u‖² + ‖u‖²` built
//! from central differences. Both agree to O(h²), but only the former makes
//! the discrete gradient, the Nehari identity and the energy formula exact.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{dot, gradient_fd, ComplexField, Grid};
use crate::magnetics::{covariant_gradient, Hamiltonian, MagneticData};

/// Exponents closer to 2 than this are refused: the Nehari exponent
/// 1/(p−2) blows up.
pub const MIN_EXPONENT: f64 = 2.05;

const MODULUS_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalParams {
    p: f64,
}

impl FunctionalParams {
    /// Checks `p` against the floor and the Sobolev exponent 2N/(N−2).
    pub fn new(p: f64, dim: usize) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidDimension(dim));
        }
        let subcritical = match critical_exponent(dim) {
            Some(c) => p < c,
            None => true,
        };
        if !(p.is_finite() && p >= MIN_EXPONENT && subcritical) {
            return Err(Error::InvalidExponent { p, dim });
        }
        Ok(FunctionalParams { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// |u|^{p−2}, continuously extended by 0 at u = 0.
    #[inline]
    pub fn weight(&self, modulus: f64) -> f64 {
        if modulus == 0.0 {
            return 0.0;
        }
        if self.p == 4.0 {
            modulus * modulus
        } else if self.p == 3.0 {
            modulus
        } else {
            ((self.p - 2.0) * modulus.max(MODULUS_FLOOR).ln()).exp()
        }
    }

    /// (½ − 1/p), the factor between the Nehari energy and ∫|u|^p.
    pub fn nehari_factor(&self) -> f64 {
        0.5 - 1.0 / self.p
    }
}

/// 2N/(N−2), or `None` when every p > 2 is subcritical.
pub fn critical_exponent(dim: usize) -> Option<f64> {
    (dim > 2).then(|| 2.0 * dim as f64 / (dim as f64 - 2.0))
}

/// The action on a fixed grid, for either the magnetic or the decoupled
/// operator. Pieces are exposed separately so that the solver can reuse them
/// without rebuilding the potential tables.
#[derive(Debug, Clone)]
pub struct Functional {
    ham: Hamiltonian,
    fp: FunctionalParams,
}

impl Functional {
    pub fn magnetic(grid: &Grid, m: &MagneticData, fp: FunctionalParams) -> Self {
        Functional {
            ham: Hamiltonian::magnetic(grid, m, 1.0),
            fp,
        }
    }

    pub fn decoupled(grid: &Grid, m: &MagneticData, fp: FunctionalParams) -> Self {
        Functional {
            ham: Hamiltonian::decoupled(grid, m, 1.0),
            fp,
        }
    }

    /// The operator −Δ_A + 1 (or −Δ + 1 + |A|²).
    pub fn operator(&self) -> &Hamiltonian {
        &self.ham
    }

    pub fn params(&self) -> &FunctionalParams {
        &self.fp
    }

    pub fn grid(&self) -> &Grid {
        self.ham.grid()
    }

    /// ⟨(−Δ_A + 1)u, u⟩.
    pub fn quadratic(&self, u: &[Complex64]) -> f64 {
        let mut hu = vec![Complex64::new(0.0, 0.0); u.len()];
        self.ham.apply_into(u, &mut hu);
        dot(&hu, u) * self.grid().cell_volume()
    }

    /// ∫|u|^p.
    pub fn power_integral(&self, u: &[Complex64]) -> f64 {
        u.iter()
            .map(|z| {
                let r2 = z.norm_sqr();
                self.fp.weight(r2.sqrt()) * r2
            })
            .sum::<f64>()
            * self.grid().cell_volume()
    }

    pub fn energy(&self, u: &[Complex64]) -> f64 {
        0.5 * self.quadratic(u) - self.power_integral(u) / self.fp.p
    }

    /// I′(u) = (−Δ_A + 1)u − |u|^{p−2}u.
    pub fn gradient_into(&self, u: &[Complex64], out: &mut [Complex64]) {
        self.ham.apply_into(u, out);
        for (g, z) in out.iter_mut().zip(u) {
            *g -= z * self.fp.weight(z.norm());
        }
    }

    pub fn gradient(&self, u: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); u.len()];
        self.gradient_into(u, &mut out);
        out
    }

    /// Scaling factor onto the Nehari manifold, or `None` for the zero field.
    pub fn nehari_factor(&self, u: &[Complex64]) -> Option<f64> {
        let pi = self.power_integral(u);
        if pi <= 0.0 {
            return None;
        }
        Some((self.quadratic(u) / pi).powf(1.0 / (self.fp.p - 2.0)))
    }

    pub fn quotient(&self, u: &[Complex64]) -> Option<f64> {
        let pi = self.power_integral(u);
        if pi <= 0.0 {
            return None;
        }
        Some(self.quadratic(u) / pi.powf(2.0 / self.fp.p))
    }
}

/// I_A(u) = ½∫(|D_A u|² + |u|²) − (1/p)∫|u|^p.
pub fn energy(u: &ComplexField, m: &MagneticData, fp: &FunctionalParams) -> f64 {
    Functional::magnetic(u.grid(), m, *fp).energy(u.values())
}

/// L² representative of I′_A(u).
pub fn euler_gradient(u: &ComplexField, m: &MagneticData, fp: &FunctionalParams) -> ComplexField {
    let g = Functional::magnetic(u.grid(), m, *fp).gradient(u.values());
    ComplexField::from_values_unchecked(u.grid(), g)
}

/// ∫(|D_A u|² + |u|²), the squared magnetic Sobolev norm.
pub fn quadratic_form(u: &ComplexField, m: &MagneticData) -> f64 {
    Hamiltonian::magnetic(u.grid(), m, 1.0)
        .apply(u)
        .values()
        .iter()
        .zip(u.values())
        .map(|(a, b)| a.re * b.re + a.im * b.im)
        .sum::<f64>()
        * u.grid().cell_volume()
}

/// Q_A(u) = ∫(|D_A u|² + |u|²) / (∫|u|^p)^{2/p}.
pub fn rayleigh_quotient(u: &ComplexField, m: &MagneticData, fp: &FunctionalParams) -> Result<f64> {
    Functional::magnetic(u.grid(), m, *fp)
        .quotient(u.values())
        .ok_or(Error::ZeroField)
}

/// Returns `(t*, t*·u)` with `t*·u` on the Nehari manifold.
pub fn nehari_scale(
    u: &ComplexField,
    m: &MagneticData,
    fp: &FunctionalParams,
) -> Result<(f64, ComplexField)> {
    let t = Functional::magnetic(u.grid(), m, *fp)
        .nehari_factor(u.values())
        .ok_or(Error::ZeroField)?;
    Ok((t, u.scaled(Complex64::new(t, 0.0))))
}

/// E = (½ − 1/p) q^{p/(p−2)}.
pub fn ground_energy_from_quotient(q: f64, fp: &FunctionalParams) -> Result<f64> {
    if !(q > 0.0) {
        return Err(Error::NonpositiveQuotient(q));
    }
    Ok(fp.nehari_factor() * q.powf(fp.p / (fp.p - 2.0)))
}

/// ‖D_A u‖² − ‖∇|u|‖², nonnegative in the continuum.
pub fn diamagnetic_gap(u: &ComplexField, m: &MagneticData) -> f64 {
    let covariant = covariant_gradient(u, m).norm_sq();
    let modulus = ComplexField::from_real(&u.modulus());
    covariant - gradient_fd(&modulus).norm_sq()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::grid::inner_product;
    use crate::magnetics::magnetic_translate;

    pub(crate) fn smooth_random(g: &Grid, seed: u64) -> ComplexField {
        crate::verify::smooth_random_field(g, seed)
    }

    fn setup() -> (Grid, MagneticData, FunctionalParams) {
        (
            Grid::new(2, 6.0, 65).unwrap(),
            MagneticData::planar(0.3),
            FunctionalParams::new(4.0, 2).unwrap(),
        )
    }

    #[test]
    fn exponent_validation() {
        assert!(FunctionalParams::new(4.0, 2).is_ok());
        assert!(FunctionalParams::new(100.0, 2).is_ok());
        assert!(FunctionalParams::new(5.9, 3).is_ok());
        assert!(FunctionalParams::new(6.0, 3).is_err());
        assert!(FunctionalParams::new(2.0, 2).is_err());
        assert!(FunctionalParams::new(2.04, 2).is_err());
        assert!(FunctionalParams::new(f64::NAN, 2).is_err());
    }

    #[test]
    fn weight_paths_agree() {
        let fp4 = FunctionalParams::new(4.0, 2).unwrap();
        let fp3 = FunctionalParams::new(3.0, 2).unwrap();
        let fpx = FunctionalParams::new(3.5, 2).unwrap();
        for r in [1e-8, 0.3, 1.0, 2.7] {
            assert!((fp4.weight(r) - r * r).abs() <= 1e-15 * r * r);
            assert!((fp3.weight(r) - r).abs() <= 1e-15 * r);
            assert!((fpx.weight(r) - r.powf(1.5)).abs() <= 1e-13 * r.powf(1.5));
        }
        assert_eq!(fpx.weight(0.0), 0.0);
    }

    #[test]
    fn energy_of_zero_and_phase_invariance() {
        let (g, m, fp) = setup();
        assert_eq!(energy(&ComplexField::zeros(&g), &m, &fp), 0.0);
        let u = smooth_random(&g, 3);
        let e = energy(&u, &m, &fp);
        let rotated = u.scaled(Complex64::from_polar(1.0, 0.83));
        assert!((energy(&rotated, &m, &fp) - e).abs() < 1e-12 * e.abs().max(1.0));
        assert!(euler_gradient(&ComplexField::zeros(&g), &m, &fp).is_zero());
    }

    #[test]
    fn gradient_matches_central_differences() {
        let (g, m, _) = setup();
        for (p, seed) in [(4.0, 11u64), (3.0, 12), (3.7, 13)] {
            let fp = FunctionalParams::new(p, 2).unwrap();
            let u = smooth_random(&g, seed);
            let v = smooth_random(&g, seed + 100);
            let eps = 1e-5;
            let plus = energy(&u.add_scaled(eps, &v).unwrap(), &m, &fp);
            let minus = energy(&u.add_scaled(-eps, &v).unwrap(), &m, &fp);
            let fd = (plus - minus) / (2.0 * eps);
            let pairing = inner_product(&euler_gradient(&u, &m, &fp), &v).unwrap();
            assert!(
                (fd - pairing).abs() <= 1e-4 * pairing.abs(),
                "p={p}: {fd} vs {pairing}"
            );
        }
    }

    #[test]
    fn quotient_homogeneity_and_invariances() {
        let (g, m, fp) = setup();
        let u = smooth_random(&g, 5);
        let q = rayleigh_quotient(&u, &m, &fp).unwrap();
        for t in [0.01, 0.5, 3.0, 1e3] {
            let qt = rayleigh_quotient(&u.scaled(Complex64::new(t, 0.0)), &m, &fp).unwrap();
            assert!((qt - q).abs() < 1e-12 * q);
        }
        let h = g.spacing()[0];
        let moved = magnetic_translate(&u, &m, &[2.0 * h, -3.0 * h])
            .unwrap()
            .scaled(Complex64::from_polar(1.0, 2.1));
        let qm = rayleigh_quotient(&moved, &m, &fp).unwrap();
        assert!((qm - q).abs() < 1e-2 * q, "{qm} vs {q}");
        assert!(matches!(
            rayleigh_quotient(&ComplexField::zeros(&g), &m, &fp),
            Err(Error::ZeroField)
        ));
    }

    #[test]
    fn nehari_scaling_identities() {
        let (g, m, fp) = setup();
        let u = smooth_random(&g, 9);
        let (t, s) = nehari_scale(&u, &m, &fp).unwrap();
        assert!(t > 0.0);
        let pairing = inner_product(&euler_gradient(&s, &m, &fp), &s).unwrap();
        assert!(pairing.abs() <= 1e-12 * quadratic_form(&s, &m));
        let (t1, _) = nehari_scale(&s, &m, &fp).unwrap();
        assert!((t1 - 1.0).abs() < 1e-12);
        let q = rayleigh_quotient(&u, &m, &fp).unwrap();
        let e = energy(&s, &m, &fp);
        assert!((e - 0.25 * q.powf(2.0)).abs() < 1e-12 * e);
        assert!((e - ground_energy_from_quotient(q, &fp).unwrap()).abs() < 1e-12 * e);
        let (t2, _) = nehari_scale(&u.scaled(Complex64::new(2.0, 0.0)), &m, &fp).unwrap();
        assert!((t2 - t / 2.0).abs() < 1e-12 * t);
        assert!(nehari_scale(&ComplexField::zeros(&g), &m, &fp).is_err());
    }

    #[test]
    fn energy_formula_values() {
        let fp = FunctionalParams::new(4.0, 2).unwrap();
        assert!((ground_energy_from_quotient(1.0, &fp).unwrap() - 0.25).abs() < 1e-15);
        assert!(
            ground_energy_from_quotient(1.0, &fp).unwrap()
                < ground_energy_from_quotient(1.1, &fp).unwrap()
        );
        assert!(matches!(
            ground_energy_from_quotient(0.0, &fp),
            Err(Error::NonpositiveQuotient(_))
        ));
        assert!(ground_energy_from_quotient(-2.0, &fp).is_err());
    }

    #[test]
    fn diamagnetic_equality_case() {
        let g = Grid::new(2, 6.0, 65).unwrap();
        let u = ComplexField::from_real(&smooth_random(&g, 1).modulus());
        assert!(diamagnetic_gap(&u, &MagneticData::zero(2)).abs() < 1e-12);
    }

    #[test]
    fn diamagnetic_twist_is_strict() {
        let g = Grid::new(2, 6.0, 97).unwrap();
        let m = MagneticData::planar(0.8);
        let x0 = [1.5, -0.5];
        let u = ComplexField::from_fn(&g, |x| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            let phase = potential_phase(&m, x, &x0);
            Complex64::from_polar((-0.5 * r2).exp(), phase)
        });
        assert!(diamagnetic_gap(&u, &m) > 0.05);
    }

    fn potential_phase(m: &MagneticData, x: &[f64; 3], x0: &[f64; 2]) -> f64 {
        crate::magnetics::potential_apply(m, &x[..2], x0).unwrap()
    }
}
