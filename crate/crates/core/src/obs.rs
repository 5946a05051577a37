//! Mass matrices of control regions, observability Gramians and constants,
//! resolvent constants and HUM control synthesis.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{ModeBasis, ModeVector};
use crate::error::{Error, Result};
use crate::fields::{FourierField2D, VectorPotential};
use crate::geometry::Region;
use crate::linalg::{self, CMat, CVec};
use crate::spectral::{self, EigenDecomposition, ProjectorSpec};
use crate::{C64, TWO_PI};

/// `∫_a^b e^{inx} dx`, exact zero for full periods.
fn interval_integral(n: i32, a: f64, b: f64) -> C64 {
    if n == 0 {
        return C64::new(b - a, 0.0);
    }
    if (b - a - TWO_PI).abs() < 1e-14 {
        return C64::new(0.0, 0.0);
    }
    let n = n as f64;
    let half = 0.5 * (b - a);
    C64::from_polar(2.0 * (n * half).sin() / n, n * 0.5 * (a + b))
}

/// Galerkin restriction of `1_ω`: `M[k, k'] = (2π)^{-2} ∫_ω e^{i(k'−k)·z} dz`.
#[derive(Clone, Debug, PartialEq)]
pub struct MassMatrix {
    pub basis: ModeBasis,
    pub matrix: CMat,
}

impl MassMatrix {
    /// `∫_ω |u|²` in the truncated model.
    pub fn mass(&self, u: &ModeVector) -> f64 {
        linalg::inner(&self.matrix.dot(&u.coeffs), &u.coeffs).re
    }

    pub fn identity(basis: ModeBasis) -> Self {
        MassMatrix { basis, matrix: CMat::eye(basis.len()) }
    }
}

pub fn region_mass_matrix(region: &Region, basis: &ModeBasis) -> MassMatrix {
    let n = basis.len();
    let (xl, xh) = basis.x_range();
    let (yl, yh) = basis.y_range();
    let dx = xh - xl;
    let dy = yh - yl;
    let tables: Vec<(Vec<C64>, Vec<C64>)> = region
        .rects()
        .iter()
        .map(|r| {
            let tx = (-dx..=dx).map(|d| interval_integral(d, r[0], r[1])).collect();
            let ty = (-dy..=dy).map(|d| interval_integral(d, r[2], r[3])).collect();
            (tx, ty)
        })
        .collect();
    let norm = 1.0 / (TWO_PI * TWO_PI);
    let mut m = CMat::zeros((n, n));
    for i in 0..n {
        let k = basis.mode(i);
        for j in 0..n {
            let kp = basis.mode(j);
            let ix = (kp.k1 - k.k1 + dx) as usize;
            let iy = (kp.k2 - k.k2 + dy) as usize;
            let z: C64 = tables.iter().map(|(tx, ty)| tx[ix] * ty[iy]).sum();
            m[[i, j]] = z * norm;
        }
    }
    MassMatrix { basis: *basis, matrix: m }
}

/// `∫_0^T e^{iΔt} dt`, written as `T e^{iΔT/2} sinc(ΔT/2)`.
fn phase_integral(delta: f64, t: f64, degenerate: f64) -> C64 {
    if delta.abs() < degenerate {
        return C64::new(t, 0.0);
    }
    let x = 0.5 * delta * t;
    C64::from_polar(t * x.sin() / x, x)
}

/// Mass matrix expressed in (a subset of) the eigenbasis, reusable across
/// time windows.
#[derive(Clone, Debug)]
pub struct EigenMass {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    pub m: CMat,
    degenerate: f64,
}

impl EigenMass {
    pub fn new(eig: &EigenDecomposition, mass: &MassMatrix, indices: Option<&[usize]>) -> Self {
        let indices: Vec<usize> = indices.map(|s| s.to_vec()).unwrap_or_else(|| (0..eig.dim()).collect());
        let m = linalg::compress(&eig.vectors, &mass.matrix, &indices);
        let values = indices.iter().map(|&i| eig.values[i]).collect();
        EigenMass { indices, values, m, degenerate: DEGENERATE_REL * eig.max_abs_eigenvalue().max(1.0) }
    }

    /// Gramian `∫_{t0}^{t1} e^{itH} M e^{−itH} dt` in eigen coordinates.
    /// With `sign = -1` the conjugation is reversed (`e^{−itH} M e^{itH}`).
    pub fn gramian(&self, t0: f64, t1: f64, sign: f64) -> CMat {
        let n = self.values.len();
        let len = t1 - t0;
        CMat::from_shape_fn((n, n), |(a, b)| {
            let d = sign * (self.values[a] - self.values[b]);
            self.m[[a, b]] * C64::from_polar(1.0, d * t0) * phase_integral(d, len, self.degenerate)
        })
    }
}

/// Eigenvalue pairs closer than this fraction of `max|λ|` use the diagonal
/// limit `T·M̃`.
pub const DEGENERATE_REL: f64 = 1e-12;

/// Observability Gramian `G = ∫_0^T e^{itH} M e^{−itH} dt` in mode
/// coordinates.
pub fn gramian(eig: &EigenDecomposition, mass: &MassMatrix, t: f64) -> Result<CMat> {
    if !(t > 0.0) {
        return Err(Error::invalid("observation time must be positive"));
    }
    let em = EigenMass::new(eig, mass, None);
    let g = em.gramian(0.0, t, 1.0);
    Ok(eig.vectors.dot(&g).dot(&linalg::adjoint(&eig.vectors)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObsReport {
    pub t: f64,
    pub h: Option<f64>,
    pub rho: Option<f64>,
    pub lambda_min: f64,
    pub c_obs: f64,
    pub dim: usize,
    pub geometry: String,
}

impl ObsReport {
    /// `λ_min / T`, the normalised observability rate.
    pub fn rate(&self) -> f64 {
        self.lambda_min / self.t
    }
}

/// Orthonormal basis of the range of a Hermitian projector-like matrix.
pub fn range_basis(p: &CMat) -> Result<CMat> {
    let (w, q) = linalg::eigh(p)?;
    let cols: Vec<usize> = w.iter().enumerate().filter(|(_, &x)| x > 1e-10).map(|(i, _)| i).collect();
    if cols.is_empty() {
        return Err(Error::EmptyRange);
    }
    Ok(linalg::select_columns(&q, &cols))
}

/// `λ_min` of `G` restricted to the span of the orthonormal columns of
/// `range`, and `C_obs = 1/λ_min`.
pub fn observability_constant(g: &CMat, range: &CMat, t: f64, geometry: &str) -> Result<ObsReport> {
    if range.ncols() == 0 {
        return Err(Error::EmptyRange);
    }
    let r = linalg::adjoint(range).dot(&g.dot(range));
    let lambda_min = linalg::min_eigenvalue(&r)?;
    Ok(ObsReport {
        t,
        h: None,
        rho: None,
        lambda_min,
        c_obs: constant_from(lambda_min),
        dim: range.ncols(),
        geometry: geometry.to_string(),
    })
}

fn constant_from(lambda_min: f64) -> f64 {
    if lambda_min > 0.0 {
        1.0 / lambda_min
    } else {
        f64::INFINITY
    }
}

/// Inputs of the scaled observability experiment.
#[derive(Clone, Debug)]
pub struct SharpObsSetup<'a> {
    pub a: &'a VectorPotential,
    pub v: &'a FourierField2D,
    pub region: &'a Region,
    pub basis: ModeBasis,
    pub t: f64,
    pub rho: f64,
    pub geometry: &'a str,
}

/// Result of a scaled observability scan; `skipped` lists `h` whose window
/// is empty at this truncation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpObsScan {
    pub reports: Vec<ObsReport>,
    pub skipped: Vec<f64>,
}

/// For each `h`: Gramian over `[0, T h^{1/2}]` restricted to the hard
/// window `|h²λ − 1| ≤ ρ`.
pub fn sharp_obs_experiment(setup: &SharpObsSetup, h_list: &[f64]) -> Result<SharpObsScan> {
    let op = spectral::assemble(setup.a, setup.v, &setup.basis)?;
    let eig = spectral::eigendecompose(&op)?;
    let mass = region_mass_matrix(setup.region, &setup.basis);
    sharp_obs_with(&eig, &mass, setup, h_list)
}

pub fn sharp_obs_with(
    eig: &EigenDecomposition,
    mass: &MassMatrix,
    setup: &SharpObsSetup,
    h_list: &[f64],
) -> Result<SharpObsScan> {
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    for &h in h_list {
        let spec = ProjectorSpec::hard(h, setup.rho)?;
        let idx: Vec<usize> = (0..eig.dim()).filter(|&i| spec.weight(eig.values[i]) > 0.0).collect();
        if idx.is_empty() {
            skipped.push(h);
            continue;
        }
        let em = EigenMass::new(eig, mass, Some(&idx));
        let t_eff = setup.t * h.sqrt();
        let g = em.gramian(0.0, t_eff, 1.0);
        let lambda_min = linalg::min_eigenvalue(&g)?;
        reports.push(ObsReport {
            t: t_eff,
            h: Some(h),
            rho: Some(setup.rho),
            lambda_min,
            c_obs: constant_from(lambda_min),
            dim: idx.len(),
            geometry: setup.geometry.to_string(),
        });
    }
    Ok(SharpObsScan { reports, skipped })
}

/// CSV with columns `h,T_eff,lambda_min,C_obs,dim`.
pub fn write_obs_csv<W: Write>(reports: &[ObsReport], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["h", "T_eff", "lambda_min", "C_obs", "dim"])?;
    for r in reports {
        wr.write_record([
            r.h.map(|h| format!("{h:.12}")).unwrap_or_default(),
            format!("{:.12}", r.t),
            format!("{:.12e}", r.lambda_min),
            format!("{:.12e}", r.c_obs),
            r.dim.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

/// `C(λ) = λ_min(K(λ))^{−1/2}` with
/// `K(λ) = (1 + |λ|^{1/4})^{−2} (H + λ)^H (H + λ) + M`, evaluated in the
/// eigenbasis of `H`.
pub fn resolvent_constant(eig: &EigenDecomposition, mass_eigen: &CMat, lambda: f64) -> Result<f64> {
    let w = (1.0 + lambda.abs().powf(0.25)).powi(-2);
    let mut k = mass_eigen.clone();
    for (i, &l) in eig.values.iter().enumerate() {
        k[[i, i]] += w * (l + lambda).powi(2);
    }
    let lo = linalg::min_eigenvalue(&k)?;
    Ok(if lo > 0.0 { lo.powf(-0.5) } else { f64::INFINITY })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventScan {
    pub lambdas: Vec<f64>,
    pub constants: Vec<f64>,
}

impl ResolventScan {
    pub fn max(&self) -> f64 {
        self.constants.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_in(&self, lo: f64, hi: f64) -> f64 {
        self.lambdas
            .iter()
            .zip(&self.constants)
            .filter(|(l, _)| **l >= lo && **l <= hi)
            .map(|(_, c)| *c)
            .fold(0.0, f64::max)
    }

    /// CSV with columns `lambda,C`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["lambda", "C"])?;
        for (l, c) in self.lambdas.iter().zip(&self.constants) {
            wr.write_record([format!("{l:.6}"), format!("{c:.12e}")])?;
        }
        wr.flush()?;
        Ok(())
    }
}

pub fn resolvent_scan(eig: &EigenDecomposition, mass: &MassMatrix, lambdas: &[f64]) -> Result<ResolventScan> {
    let em = EigenMass::new(eig, mass, None);
    let constants = lambdas.par_iter().map(|&l| resolvent_constant(eig, &em.m, l)).collect::<Result<Vec<_>>>()?;
    Ok(ResolventScan { lambdas: lambdas.to_vec(), constants })
}

/// HUM control steering `ψ₀` to `ψ₁` in time `T`.
#[derive(Clone, Debug, PartialEq)]
pub struct HumResult {
    /// Sample times and the control `h(t) = i M e^{i(T−t)H} φ` at each.
    pub samples: Vec<(f64, CVec)>,
    pub final_state: CVec,
    /// `‖ψ(T) − ψ₁‖`.
    pub error: f64,
    pub relative_error: f64,
    /// Smallest eigenvalue of the reversed Gramian.
    pub gramian_min: f64,
}

impl HumResult {
    /// CSV with columns `t,mode_index,re,im`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["t", "mode_index", "re", "im"])?;
        for (t, c) in &self.samples {
            for (i, z) in c.iter().enumerate() {
                wr.write_record([
                    format!("{t:.9}"),
                    i.to_string(),
                    format!("{:.15e}", z.re),
                    format!("{:.15e}", z.im),
                ])?;
            }
        }
        wr.flush()?;
        Ok(())
    }
}

/// Hilbert uniqueness synthesis with Tikhonov shift `reg`.
///
/// With `d = ψ₁ − e^{−iTH}ψ₀` and `G' = ∫_0^T e^{−isH} M e^{isH} ds`, sets
/// `φ = (G' + reg)^{−1} d`; the final state is `e^{−iTH}ψ₀ + G'φ`.
pub fn hum_control(
    eig: &EigenDecomposition,
    mass: &MassMatrix,
    t: f64,
    psi0: &CVec,
    psi1: &CVec,
    reg: f64,
    n_samples: usize,
) -> Result<HumResult> {
    if !(t > 0.0) || reg < 0.0 {
        return Err(Error::invalid("control time must be positive and reg non-negative"));
    }
    let em = EigenMass::new(eig, mass, None);
    let gp = em.gramian(0.0, t, -1.0);
    let phase = |s: f64| -> Vec<C64> { eig.values.iter().map(|&l| C64::from_polar(1.0, -l * s)).collect() };
    let c0 = eig.to_eigen(psi0);
    let c1 = eig.to_eigen(psi1);
    let free: CVec = c0.iter().zip(phase(t)).map(|(c, p)| c * p).collect();
    let d = &c1 - &free;
    let mut shifted = gp.clone();
    for i in 0..shifted.nrows() {
        shifted[[i, i]] += reg;
    }
    let phi = linalg::solve(&shifted, &d)?;
    let fin = &free + &gp.dot(&phi);
    let error = linalg::vec_norm(&(&fin - &c1));
    let scale = linalg::vec_norm(&c1).max(linalg::vec_norm(&c0)).max(f64::MIN_POSITIVE);
    let gramian_min = linalg::min_eigenvalue(&(&gp + &linalg::adjoint(&gp)).mapv(|z| z * 0.5))?;

    let samples = (0..n_samples)
        .map(|j| {
            let s = if n_samples > 1 { t * j as f64 / (n_samples - 1) as f64 } else { 0.0 };
            let back: CVec = phi.iter().zip(phase(-(t - s))).map(|(c, p)| c * p).collect();
            let u = eig.from_eigen(&back);
            (s, mass.matrix.dot(&u).mapv(|z| z * C64::new(0.0, 1.0)))
        })
        .collect();
    Ok(HumResult { samples, final_state: eig.from_eigen(&fin), error, relative_error: error / scale, gramian_min })
}
