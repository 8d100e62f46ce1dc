//! The linearised operator L_u = (−Δ_A + 1)^{-1} W at a groundstate and its
//! leading eigenvalues.
//!
//! L_u is only real-linear, so every pairing here is the real one. It is
//! self-adjoint in ⟨a, b⟩_H = Re⟨a, (−Δ_A + 1)b⟩, and the Rayleigh–Ritz
//! matrix in that inner product is ⟨v_i, W v_j⟩, which needs no resolvent.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{check_same, dot, gradient_fd, ComplexField, Grid};
use crate::magnetics::{Hamiltonian, MagneticData};
use crate::solver::{conjugate_gradient, default_cg_cap, minimize_groundstate, SolverConfig};
use crate::variational::FunctionalParams;

/// Largest number of eigenvalues `top_eigenvalues` will compute.
pub const MAX_EIGENVALUES: usize = 12;
/// Floor below which |u| is treated as zero in W.
const MODULUS_FLOOR: f64 = 1e-30;
/// Inner resolvent tolerance for the stand-alone operator apply.
const APPLY_TOL: f64 = 1e-12;

fn zeros(n: usize) -> Vec<Complex64> {
    vec![Complex64::new(0.0, 0.0); n]
}

/// Pointwise data of W at a fixed field u.
#[derive(Debug, Clone)]
struct Potential {
    weight: Vec<f64>,
    hat: Vec<Complex64>,
    p: f64,
}

impl Potential {
    fn new(u: &ComplexField, fp: &FunctionalParams) -> Self {
        let mut weight = Vec::with_capacity(u.values().len());
        let mut hat = Vec::with_capacity(u.values().len());
        for z in u.values() {
            let r = z.norm();
            if r > MODULUS_FLOOR {
                weight.push(fp.weight(r));
                hat.push(z / r);
            } else {
                weight.push(0.0);
                hat.push(Complex64::new(0.0, 0.0));
            }
        }
        Potential {
            weight,
            hat,
            p: fp.p(),
        }
    }

    /// W[w] = |u|^{p−2}(w + (p−2)⟨û, w⟩û).
    fn apply_into(&self, w: &[Complex64], out: &mut [Complex64]) {
        let c = self.p - 2.0;
        for i in 0..w.len() {
            let h = self.hat[i];
            let pair = h.re * w[i].re + h.im * w[i].im;
            out[i] = self.weight[i] * (w[i] + c * pair * h);
        }
    }
}

/// W[w] = |u|^{p−2}w + (p−2)|u|^{p−4}⟨u, w⟩u.
pub fn linearized_potential_apply(
    u: &ComplexField,
    fp: &FunctionalParams,
    w: &ComplexField,
) -> Result<ComplexField> {
    check_same(u.grid(), w.grid())?;
    let mut out = zeros(w.values().len());
    Potential::new(u, fp).apply_into(w.values(), &mut out);
    Ok(ComplexField::from_values_unchecked(w.grid(), out))
}

/// L_u w = (−Δ_A + 1)^{-1} W[w].
pub fn linearized_operator_apply(
    u: &ComplexField,
    m: &MagneticData,
    fp: &FunctionalParams,
    w: &ComplexField,
) -> Result<ComplexField> {
    check_same(u.grid(), w.grid())?;
    let lin = Linearization::new(u, m, fp)?;
    let mut out = zeros(w.values().len());
    lin.apply_l(w.values(), &mut out, APPLY_TOL)?;
    Ok(ComplexField::from_values_unchecked(w.grid(), out))
}

struct Linearization {
    grid: Grid,
    potential: Potential,
    shifted: Hamiltonian,
    cap: usize,
}

impl Linearization {
    fn new(u: &ComplexField, m: &MagneticData, fp: &FunctionalParams) -> Result<Self> {
        let grid = *u.grid();
        if m.dim() != grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.dim(),
                found: m.dim(),
            });
        }
        let shifted = Hamiltonian::magnetic(&grid, m, 1.0);
        let cap = default_cg_cap(&shifted);
        Ok(Linearization {
            grid,
            potential: Potential::new(u, fp),
            shifted,
            cap,
        })
    }

    fn apply_w(&self, w: &[Complex64], out: &mut [Complex64]) {
        self.potential.apply_into(w, out);
    }

    fn apply_k(&self, w: &[Complex64], out: &mut [Complex64]) {
        self.shifted.apply_into(w, out);
    }

    fn apply_l(&self, w: &[Complex64], out: &mut [Complex64], tol: f64) -> Result<usize> {
        let mut rhs = zeros(w.len());
        self.apply_w(w, &mut rhs);
        out.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        Ok(conjugate_gradient(&self.shifted, &rhs, out, tol, self.cap)?.iterations)
    }
}

/// Eigenpairs of L_u, largest first.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    /// ‖L w − λ w‖_H / ‖w‖_H per pair.
    pub rayleigh_residuals: Vec<f64>,
    /// Name of the inner product the eigenvectors are orthonormal in.
    pub inner_product: String,
    pub basis_size: usize,
    pub resolvent_iterations: usize,
    /// Ritz vectors, orthonormal in ∫⟨a, (−Δ_A + 1)b⟩.
    #[serde(skip)]
    pub vectors: Vec<ComplexField>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenOptions {
    pub tol: f64,
    /// Largest Krylov basis before giving up.
    pub max_basis: usize,
    pub seed: u64,
}

impl EigenOptions {
    pub fn new(tol: f64) -> Self {
        EigenOptions {
            tol,
            max_basis: 240,
            seed: 0,
        }
    }
}

/// The `k` largest eigenvalues of L_u with H-residual at most `tol`.
pub fn top_eigenvalues(
    u: &ComplexField,
    m: &MagneticData,
    fp: &FunctionalParams,
    k: usize,
    tol: f64,
) -> Result<SpectrumResult> {
    top_eigenvalues_with(u, m, fp, k, &EigenOptions::new(tol))
}

struct Basis {
    v: Vec<Vec<Complex64>>,
    kv: Vec<Vec<Complex64>>,
    wv: Vec<Vec<Complex64>>,
    lv: Vec<Vec<Complex64>>,
}

impl Basis {
    /// Orthonormalises `x` against the basis in the H inner product (two
    /// passes of classical Gram–Schmidt) and appends it. Returns `false` if
    /// nothing independent is left.
    fn push(&mut self, lin: &Linearization, mut x: Vec<Complex64>) -> bool {
        let n = x.len();
        let mut kx = zeros(n);
        lin.apply_k(&x, &mut kx);
        let initial = dot(&x, &kx).max(0.0).sqrt();
        if !(initial > 0.0) {
            return false;
        }
        for _ in 0..2 {
            let coeffs: Vec<f64> = self.kv.iter().map(|kv| dot(kv, &x)).collect();
            for (j, c) in coeffs.iter().enumerate() {
                for i in 0..n {
                    x[i] -= c * self.v[j][i];
                    kx[i] -= c * self.kv[j][i];
                }
            }
        }
        let norm = dot(&x, &kx).max(0.0).sqrt();
        if norm <= 1e-10 * initial {
            return false;
        }
        let inv = 1.0 / norm;
        x.iter_mut().for_each(|z| *z *= inv);
        kx.iter_mut().for_each(|z| *z *= inv);
        let mut wx = zeros(n);
        lin.apply_w(&x, &mut wx);
        self.v.push(x);
        self.kv.push(kx);
        self.wv.push(wx);
        true
    }

    fn len(&self) -> usize {
        self.v.len()
    }
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

fn combine(vs: &[Vec<Complex64>], coeffs: &[f64], n: usize) -> Vec<Complex64> {
    let mut out = zeros(n);
    for (v, c) in vs.iter().zip(coeffs) {
        for i in 0..n {
            out[i] += c * v[i];
        }
    }
    out
}

/// Block Krylov iteration with full reorthogonalisation in the H inner
/// product and Rayleigh–Ritz extraction.
pub fn top_eigenvalues_with(
    u: &ComplexField,
    m: &MagneticData,
    fp: &FunctionalParams,
    k: usize,
    opts: &EigenOptions,
) -> Result<SpectrumResult> {
    if k == 0 || k > MAX_EIGENVALUES {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must lie in 1..={MAX_EIGENVALUES}"
        )));
    }
    if !(opts.tol > 0.0 && opts.tol < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "eigen tolerance {}",
            opts.tol
        )));
    }
    if u.is_zero() {
        return Err(Error::ZeroField);
    }
    let lin = Linearization::new(u, m, fp)?;
    let n = lin.grid.len();
    let block = k + 2;
    let cg_tol = 1e-2 * opts.tol;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut basis = Basis {
        v: Vec::new(),
        kv: Vec::new(),
        wv: Vec::new(),
        lv: Vec::new(),
    };
    let mut resolvent_iterations = 0;

    let mut fresh = 0;
    while basis.len() < block {
        if !basis.push(&lin, random_vector(&mut rng, n)) {
            fresh += 1;
            if fresh > 4 {
                return Err(Error::Breakdown);
            }
        }
    }

    loop {
        // Apply L to the newest block.
        let start = basis.lv.len();
        for j in start..basis.len() {
            let mut out = zeros(n);
            resolvent_iterations += lin.apply_l(&basis.v[j], &mut out, cg_tol)?;
            basis.lv.push(out);
        }

        let dim = basis.len();
        let t = DMatrix::from_fn(dim, dim, |i, j| {
            0.5 * (dot(&basis.v[i], &basis.wv[j]) + dot(&basis.v[j], &basis.wv[i]))
        });
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

        let mut values = Vec::with_capacity(k);
        let mut residuals = Vec::with_capacity(k);
        let mut vectors = Vec::with_capacity(k);
        for &idx in order.iter().take(k) {
            let theta = eig.eigenvalues[idx];
            let s: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
            let y = combine(&basis.v, &s, n);
            let ly = combine(&basis.lv, &s, n);
            let ky = combine(&basis.kv, &s, n);
            let wy = combine(&basis.wv, &s, n);
            let r: Vec<Complex64> = ly.iter().zip(&y).map(|(a, b)| a - theta * b).collect();
            let kr: Vec<Complex64> = wy.iter().zip(&ky).map(|(a, b)| a - theta * b).collect();
            let norm_y = dot(&y, &ky).max(0.0).sqrt();
            residuals.push(dot(&r, &kr).abs().sqrt() / norm_y);
            values.push(theta);
            vectors.push(y);
        }
        if residuals.iter().all(|r| *r <= opts.tol) {
            // The basis is orthonormal in the unweighted sum; rescale to ∫.
            let scale = Complex64::new(lin.grid.cell_volume().sqrt().recip(), 0.0);
            let vectors = vectors
                .into_iter()
                .map(|y| ComplexField::from_values_unchecked(&lin.grid, y).scaled(scale))
                .collect();
            return Ok(SpectrumResult {
                eigenvalues: values,
                rayleigh_residuals: residuals,
                inner_product: "H_A".into(),
                basis_size: dim,
                resolvent_iterations,
                vectors,
            });
        }
        if dim + block > opts.max_basis.min(n) {
            let worst = residuals.iter().fold(0.0f64, |a, r| a.max(*r));
            return Err(Error::NoConvergence {
                what: "block Krylov eigensolver",
                iterations: dim,
                residual: worst,
            });
        }

        let mut added = 0;
        for j in start..dim {
            if basis.push(&lin, basis.lv[j].clone()) {
                added += 1;
            }
        }
        // Breakdown: the Krylov space is (nearly) invariant. Continue with
        // fresh random directions.
        let mut attempts = 0;
        while added < block {
            if basis.push(&lin, random_vector(&mut rng, n)) {
                added += 1;
            } else {
                attempts += 1;
                if attempts > 4 {
                    return Err(Error::Breakdown);
                }
            }
        }
    }
}

/// Infinitesimal magnetic translations −iA(e_j)[x]u − ∂_j u and the phase
/// mode iu: the expected kernel directions of L_u − 1.
pub fn symmetry_generators(u: &ComplexField, m: &MagneticData) -> Vec<ComplexField> {
    let grid = *u.grid();
    let dim = grid.dim();
    let grad = gradient_fd(u);
    let mut out = Vec::with_capacity(dim + 1);
    for j in 0..dim {
        let comp = grad.component(j);
        let values = u
            .values()
            .iter()
            .enumerate()
            .map(|(idx, z)| {
                let x = grid.position(idx);
                // A(e_j)[x] = ½ Σ_i b_ji x_i.
                let a: f64 = 0.5 * (0..dim).map(|i| m.entry(j, i) * x[i]).sum::<f64>();
                -Complex64::new(0.0, a) * z - comp[idx]
            })
            .collect();
        out.push(ComplexField::from_values_unchecked(&grid, values));
    }
    out.push(u.scaled(Complex64::new(0.0, 1.0)));
    out
}

/// Largest principal angle (degrees) between span(a) and span(b) in the H
/// inner product.
pub fn subspace_angle(a: &[ComplexField], b: &[ComplexField], m: &MagneticData) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("empty subspace".into()));
    }
    let grid = *a[0].grid();
    for f in a.iter().chain(b) {
        check_same(&grid, f.grid())?;
    }
    let op = Hamiltonian::magnetic(&grid, m, 1.0);
    let orthonormal = |set: &[ComplexField]| -> Result<DMatrix<f64>> {
        // Returns C with columns giving an H-orthonormal basis as combinations of `set`.
        let k: Vec<ComplexField> = set.iter().map(|f| op.apply(f)).collect();
        let g = DMatrix::from_fn(set.len(), set.len(), |i, j| {
            dot(set[i].values(), k[j].values())
        });
        let chol = g
            .cholesky()
            .ok_or_else(|| Error::InvalidArgument("dependent subspace vectors".into()))?;
        let l = chol.l();
        let inv = l
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("singular Gram matrix".into()))?;
        Ok(inv.transpose())
    };
    let ca = orthonormal(a)?;
    let cb = orthonormal(b)?;
    let kb: Vec<ComplexField> = b.iter().map(|f| op.apply(f)).collect();
    let cross = DMatrix::from_fn(a.len(), b.len(), |i, j| dot(a[i].values(), kb[j].values()));
    let mixed = ca.transpose() * cross * cb;
    let sv = mixed.svd(false, false).singular_values;
    let smallest = sv
        .iter()
        .take(a.len().min(b.len()))
        .fold(f64::INFINITY, |acc, s| acc.min(*s));
    Ok(smallest.clamp(-1.0, 1.0).acos().to_degrees())
}

/// Angle between the Ritz vectors 2..N+2 and the symmetry generators.
pub fn unit_eigenspace_angle(
    spec: &SpectrumResult,
    u: &ComplexField,
    m: &MagneticData,
) -> Result<f64> {
    let dim = u.grid().dim();
    if spec.vectors.len() < dim + 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least {} eigenvectors",
            dim + 2
        )));
    }
    subspace_angle(&spec.vectors[1..dim + 2], &symmetry_generators(u, m), m)
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumRow {
    pub b: f64,
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub energy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumTable {
    pub rows: Vec<SpectrumRow>,
    pub tol: f64,
}

impl SpectrumTable {
    fn reference(&self) -> Option<&SpectrumRow> {
        self.rows.iter().find(|r| r.b == 0.0)
    }

    /// |λ_k(b) − λ_k(0)| for each nonzero b (sorted ascending) and k.
    pub fn deviations(&self) -> Result<Vec<(f64, Vec<f64>)>> {
        let zero = self
            .reference()
            .ok_or_else(|| Error::InvalidArgument("sweep lacks b = 0".into()))?;
        let mut out: Vec<(f64, Vec<f64>)> = self
            .rows
            .iter()
            .filter(|r| r.b != 0.0)
            .map(|r| {
                let d = r
                    .eigenvalues
                    .iter()
                    .zip(&zero.eigenvalues)
                    .map(|(a, b)| (a - b).abs())
                    .collect();
                (r.b, d)
            })
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(out)
    }

    /// Worst violation of "deviation shrinks as b decreases" over k ≤ `k_max`,
    /// ignoring pairs where both deviations sit below `floor`. Nonpositive
    /// means the check passes.
    pub fn monotonicity_violation(&self, k_max: usize, floor: f64) -> Result<f64> {
        let dev = self.deviations()?;
        let mut worst = f64::NEG_INFINITY;
        for w in dev.windows(2) {
            for k in 0..k_max.min(w[0].1.len()) {
                let (small, large) = (w[0].1[k], w[1].1[k]);
                if small <= floor && large <= floor {
                    continue;
                }
                worst = worst.max(small - large);
            }
        }
        Ok(worst)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("b,k,lambda_k,residual_k\n");
        for row in &self.rows {
            for (k, (l, r)) in row.eigenvalues.iter().zip(&row.residuals).enumerate() {
                s.push_str(&format!("{},{},{:.15e},{:.6e}\n", row.b, k + 1, l, r));
            }
        }
        s
    }
}

/// Solves the groundstate and its leading N+3 eigenvalues for each b (the
/// field points along the canonical direction). Entries run concurrently on
/// the current rayon pool.
pub fn spectrum_convergence_sweep(
    b_list: &[f64],
    fp: &FunctionalParams,
    grid: &Grid,
    cfg: &SolverConfig,
    tol: f64,
) -> Result<SpectrumTable> {
    if !b_list.contains(&0.0) {
        return Err(Error::InvalidArgument("b list must include 0".into()));
    }
    let k = grid.dim() + 3;
    let rows: Result<Vec<SpectrumRow>> = b_list
        .par_iter()
        .map(|&b| {
            let m = MagneticData::uniform(grid.dim(), b)?;
            let gs = minimize_groundstate(&m, fp, grid, cfg)?;
            let spec = top_eigenvalues_with(
                &gs.field,
                &m,
                fp,
                k,
                &EigenOptions {
                    seed: cfg.seed,
                    ..EigenOptions::new(tol)
                },
            )?;
            Ok(SpectrumRow {
                b,
                eigenvalues: spec.eigenvalues,
                residuals: spec.rayleigh_residuals,
                energy: gs.energy,
            })
        })
        .collect();
    let mut rows = rows?;
    rows.sort_by(|a, b| a.b.total_cmp(&b.b));
    Ok(SpectrumTable { rows, tol })
}
