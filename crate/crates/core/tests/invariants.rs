//! Property tests of the structural invariants on small grids.

use mnls_core::analysis::{monotonicity_defect, symmetry_defect};
use mnls_core::grid::{ComplexField, Grid};
use mnls_core::magnetics::{covariant_gradient, decoupling_defect, potential_apply, MagneticData};
use mnls_core::variational::{
    diamagnetic_gap, nehari_scale, rayleigh_quotient, Functional, FunctionalParams,
};
use mnls_core::verify::{smooth_random_field, DIAMAGNETIC_TOL, NEHARI_TOL, PHASE_TOL};
use num_complex::Complex64;
use proptest::prelude::*;

/// Antisymmetric matrix with the given upper-triangle entries.
fn field_matrix(dim: usize, upper: &[f64]) -> MagneticData {
    let mut e = vec![0.0; dim * dim];
    let mut k = 0;
    for i in 0..dim {
        for j in i + 1..dim {
            e[i * dim + j] = upper[k];
            e[j * dim + i] = -upper[k];
            k += 1;
        }
    }
    MagneticData::from_matrix(dim, &e).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn potential_is_antisymmetric(
        dim in 2usize..=3,
        upper in prop::array::uniform3(-3.0f64..3.0),
        x in prop::array::uniform3(-10.0f64..10.0),
        v in prop::array::uniform3(-10.0f64..10.0),
    ) {
        let m = field_matrix(dim, &upper);
        let (x, v) = (&x[..dim], &v[..dim]);
        prop_assert_eq!(potential_apply(&m, x, x).unwrap(), 0.0);
        let (xv, vx) = (potential_apply(&m, x, v).unwrap(), potential_apply(&m, v, x).unwrap());
        prop_assert!((xv + vx).abs() <= 1e-12 * (1.0 + xv.abs()));
    }

    #[test]
    fn quotient_is_phase_invariant(seed in 0u64..10_000, b in 0.0f64..2.0, theta in 0.0f64..std::f64::consts::TAU) {
        let g = Grid::new(2, 5.0, 33).unwrap();
        let fp = FunctionalParams::new(4.0, 2).unwrap();
        let m = MagneticData::planar(b);
        let u = smooth_random_field(&g, seed);
        let q = rayleigh_quotient(&u, &m, &fp).unwrap();
        let turned = rayleigh_quotient(&u.scaled(Complex64::from_polar(1.0, theta)), &m, &fp).unwrap();
        prop_assert!((q - turned).abs() <= PHASE_TOL * q);
    }

    #[test]
    fn nehari_scaling_lands_on_the_manifold(seed in 0u64..10_000, b in 0.0f64..2.0, p in 2.5f64..6.0, t in 0.1f64..10.0) {
        let g = Grid::new(2, 5.0, 33).unwrap();
        let fp = FunctionalParams::new(p, 2).unwrap();
        let m = MagneticData::planar(b);
        let u = smooth_random_field(&g, seed).scaled(Complex64::new(t, 0.0));
        let (_, v) = nehari_scale(&u, &m, &fp).unwrap();
        let f = Functional::magnetic(&g, &m, fp);
        let (quad, power) = (f.quadratic(v.values()), f.power_integral(v.values()));
        prop_assert!((quad - power).abs() <= NEHARI_TOL * quad);
        prop_assert!((f.nehari_factor(v.values()).unwrap() - 1.0).abs() <= NEHARI_TOL);
    }

    #[test]
    fn defects_are_nonnegative(seed in 0u64..10_000, b in 0.0f64..2.0) {
        let g = Grid::new(2, 5.0, 33).unwrap();
        let m = MagneticData::planar(b);
        let u = smooth_random_field(&g, seed);
        prop_assert!(symmetry_defect(&u, &m, 64).unwrap() >= 0.0);
        prop_assert!(monotonicity_defect(&u, &[0.0, 0.0]).unwrap() >= 0.0);
        prop_assert!(decoupling_defect(&u, &m) >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn diamagnetic_gap_is_nonnegative_after_refinement(seed in 0u64..10_000, b in 0.0f64..2.0) {
        let m = MagneticData::planar(b);
        let (coarse, fine) = (Grid::new(2, 6.0, 65).unwrap(), Grid::new(2, 6.0, 129).unwrap());
        let gap_c = diamagnetic_gap(&smooth_random_field(&coarse, seed), &m);
        let u: ComplexField = smooth_random_field(&fine, seed);
        let corrected = (4.0 * diamagnetic_gap(&u, &m) - gap_c) / 3.0;
        prop_assert!(corrected >= -DIAMAGNETIC_TOL * covariant_gradient(&u, &m).norm_sq());
    }
}
