//! Symmetry and monotonicity diagnostics.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::ComplexField;
use crate::magnetics::MagneticData;

/// Orthonormal frame (e₁, e₂, n) with n along the field axis.
fn frame(axis: [f64; 3]) -> [[f64; 3]; 3] {
    let norm = axis.iter().map(|v| v * v).sum::<f64>().sqrt();
    let n = if norm > 0.0 {
        axis.map(|v| v / norm)
    } else {
        [0.0, 0.0, 1.0]
    };
    // Pick the coordinate axis least aligned with n.
    let mut seed = [0.0; 3];
    let k = (0..3)
        .min_by(|&a, &b| n[a].abs().total_cmp(&n[b].abs()))
        .unwrap_or(0);
    seed[k] = 1.0;
    let d: f64 = (0..3).map(|i| seed[i] * n[i]).sum();
    let mut e1 = [seed[0] - d * n[0], seed[1] - d * n[1], seed[2] - d * n[2]];
    let l = e1.iter().map(|v| v * v).sum::<f64>().sqrt();
    e1 = e1.map(|v| v / l);
    let e2 = [
        n[1] * e1[2] - n[2] * e1[1],
        n[2] * e1[0] - n[0] * e1[2],
        n[0] * e1[1] - n[1] * e1[0],
    ];
    [e1, e2, n]
}

/// Linear maps preserving |A|²: rotations about the origin in 2d; rotations
/// about the field axis and the reflection across the transversal plane in 3d.
fn symmetry_maps(m: &MagneticData, dim: usize, samples: usize) -> Vec<[[f64; 3]; 3]> {
    let angles: Vec<f64> = (1..=samples)
        .map(|j| 2.0 * PI * j as f64 / (samples + 1) as f64)
        .collect();
    let mut maps = Vec::new();
    if dim == 2 {
        for t in angles {
            let (s, c) = t.sin_cos();
            maps.push([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]);
        }
        return maps;
    }
    let [e1, e2, n] = frame(m.axis().unwrap_or([0.0, 0.0, 1.0]));
    let outer = |a: [f64; 3], b: [f64; 3]| -> [[f64; 3]; 3] {
        let mut r = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                r[i][j] = a[i] * b[j];
            }
        }
        r
    };
    let add = |a: [[f64; 3]; 3], b: [[f64; 3]; 3], s: f64| -> [[f64; 3]; 3] {
        let mut r = a;
        for i in 0..3 {
            for j in 0..3 {
                r[i][j] += s * b[i][j];
            }
        }
        r
    };
    let nn = outer(n, n);
    let plane = add(outer(e1, e1), outer(e2, e2), 1.0);
    let twist = add(outer(e2, e1), outer(e1, e2), -1.0);
    for t in angles {
        let (s, c) = t.sin_cos();
        maps.push(add(add(nn, plane, c), twist, s));
    }
    let mut reflection = [[0.0; 3]; 3];
    for i in 0..3 {
        reflection[i][i] = 1.0;
    }
    maps.push(add(reflection, nn, -2.0));
    maps
}

/// max over symmetry maps R of ‖u∘R − u‖ / ‖u‖, sampling u∘R by multilinear
/// interpolation.
pub fn symmetry_defect(u: &ComplexField, m: &MagneticData, samples: usize) -> Result<f64> {
    let grid = *u.grid();
    let dim = grid.dim();
    if m.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: m.dim(),
        });
    }
    let norm = u.norm();
    if norm == 0.0 {
        return Err(Error::ZeroField);
    }
    let mut worst = 0.0f64;
    for r in symmetry_maps(m, dim, samples.max(1)) {
        let mut diff = 0.0;
        for (idx, z) in u.values().iter().enumerate() {
            let x = grid.position(idx);
            let mut y = [0.0; 3];
            for i in 0..dim {
                y[i] = (0..dim).map(|j| r[i][j] * x[j]).sum();
            }
            diff += (u.sample(&y[..dim]) - z).norm_sqr();
        }
        worst = worst.max((diff * grid.cell_volume()).sqrt() / norm);
    }
    Ok(worst)
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Primitive integer directions with components in [−3, 3].
fn lattice_directions(dim: usize) -> Vec<[i64; 3]> {
    let mut out = Vec::new();
    let range = -3i64..=3;
    for a in range.clone() {
        for b in range.clone() {
            let cs: Vec<i64> = if dim == 3 {
                range.clone().collect()
            } else {
                vec![0]
            };
            for c in cs {
                if a == 0 && b == 0 && c == 0 {
                    continue;
                }
                if gcd(gcd(a, b), c) == 1 {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

/// Largest increase of |u| between successive nodes along lattice rays
/// leaving the node nearest `a`. Zero for a profile nonincreasing along every ray.
pub fn monotonicity_defect(u: &ComplexField, a: &[f64]) -> Result<f64> {
    let grid = *u.grid();
    let dim = grid.dim();
    if a.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: a.len(),
        });
    }
    let start = grid
        .nearest_node(a)
        .ok_or_else(|| Error::InvalidArgument("centre outside the box".into()))?;
    let k0 = grid.multi_index(start);
    let pts = grid.points();
    let mut worst = 0.0f64;
    for d in lattice_directions(dim) {
        let mut prev = u.values()[start].norm();
        let mut step = 1i64;
        loop {
            let mut k = [0usize; 3];
            let mut inside = true;
            for axis in 0..dim {
                let v = k0[axis] as i64 + step * d[axis];
                if v < 0 || v >= pts[axis] as i64 {
                    inside = false;
                    break;
                }
                k[axis] = v as usize;
            }
            if !inside {
                break;
            }
            let cur = u.values()[grid.index(k)].norm();
            worst = worst.max(cur - prev);
            prev = cur;
            step += 1;
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use num_complex::Complex64;

    #[test]
    fn radial_field_is_symmetric() {
        let mut defects = Vec::new();
        for n in [65, 129] {
            let g = Grid::new(2, 8.0, n).unwrap();
            let u = ComplexField::from_fn(&g, |x| {
                Complex64::new((-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp(), 0.0)
            });
            defects.push(symmetry_defect(&u, &MagneticData::planar(0.3), 8).unwrap());
        }
        assert!(defects[0] < 1e-2, "{defects:?}");
        assert!(defects[0] / defects[1] > 3.0, "{defects:?}");
    }

    #[test]
    fn dented_field_is_not() {
        let g = Grid::new(2, 8.0, 65).unwrap();
        let u = ComplexField::from_fn(&g, |x| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            let dent = 1.0 - 0.8 * (-((x[0] - 1.0).powi(2) + x[1] * x[1]) * 4.0).exp();
            Complex64::new((-r2 / 2.0).exp() * dent, 0.0)
        });
        assert!(symmetry_defect(&u, &MagneticData::planar(0.3), 8).unwrap() > 0.1);
    }

    #[test]
    fn axial_symmetry_in_3d() {
        let g = Grid::new(3, 5.0, 41).unwrap();
        let m = MagneticData::axial([0.0, 0.0, 0.5]);
        let cyl = ComplexField::from_fn(&g, |x| {
            Complex64::new(
                (-(x[0] * x[0] + x[1] * x[1]) / 2.0 - x[2] * x[2]).exp(),
                0.0,
            )
        });
        assert!(symmetry_defect(&cyl, &m, 6).unwrap() < 1e-2);
        // Odd along the axis: the reflection detects it.
        let tilted = ComplexField::from_fn(&g, |x| {
            Complex64::new(
                (-(x[0] * x[0] + x[1] * x[1]) / 2.0 - (x[2] - 0.7).powi(2)).exp(),
                0.0,
            )
        });
        assert!(symmetry_defect(&tilted, &m, 6).unwrap() > 0.1);
    }

    #[test]
    fn frame_is_orthonormal() {
        for axis in [[0.0, 0.0, 1.0], [1.0, 2.0, -0.5], [0.0, 1.0, 0.0]] {
            let f = frame(axis);
            for i in 0..3 {
                for j in 0..3 {
                    let d: f64 = (0..3).map(|k| f[i][k] * f[j][k]).sum();
                    assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn monotone_and_ring_profiles() {
        let g = Grid::new(2, 6.0, 49).unwrap();
        let gauss = ComplexField::from_fn(&g, |x| {
            Complex64::new((-(x[0] * x[0] + x[1] * x[1])).exp(), 0.0)
        });
        assert_eq!(monotonicity_defect(&gauss, &[0.0, 0.0]).unwrap(), 0.0);
        let ring = ComplexField::from_fn(&g, |x| {
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            Complex64::new((-(r - 2.0).powi(2)).exp(), 0.0)
        });
        assert!(monotonicity_defect(&ring, &[0.0, 0.0]).unwrap() > 0.1);
        let g3 = Grid::new(3, 4.0, 33).unwrap();
        let ball = ComplexField::from_fn(&g3, |x| {
            Complex64::new((-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp(), 0.0)
        });
        assert_eq!(monotonicity_defect(&ball, &[0.0, 0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn direction_sets() {
        assert_eq!(lattice_directions(2).len(), 32);
        assert!(lattice_directions(3)
            .iter()
            .all(|d| gcd(gcd(d[0], d[1]), d[2]) == 1));
    }
}
