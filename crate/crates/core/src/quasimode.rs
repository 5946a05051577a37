//! Hermite-function algebra, WKB quasimodes concentrated at a non-degenerate
//! critical point of `A₁`, and the separable non-observability witness.
//!
//! The model operator on the circle is
//!
//! ```text
//! P = −ħ²∂² − 2A₁(y) + iħ²(A₂∂ + ∂A₂) + ħ²W(y)
//! ```
//!
//! and the quasimode `v = v₀ + v₁ + v₂` satisfies
//! `P v = (βħ − 2A₁(0) + Λ₀ħ²) v + O(ħ^{5/2})` with `β = √(−A₁''(0))`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::ModeBasis;
use crate::error::{Error, Result};
use crate::fields::{CircleFunction, FourierField2D, VectorPotential, DEGENERACY_TOL};
use crate::geometry::{region_meets_strip, Region};
use crate::grid;
use crate::linalg::{self, CVec};
use crate::obs::{region_mass_matrix, EigenMass, MassMatrix};
use crate::smooth::{quasimode_cutoff, quasimode_cutoff_derivatives};
use crate::spectral::{self, EigenDecomposition};
use crate::stats::loglog_slope;
use crate::{C64, TWO_PI};

const CZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Coefficient vector over the normalised oscillator eigenfunctions
/// `φ_j(y) = (β/ħ)^{1/4} ψ_j(√(β/ħ) y)`, where `ψ_j` are the Hermite
/// functions. `φ_j` has eigenvalue `2jβħ` for `L = −ħ²∂² + β²y² − βħ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HermiteVector {
    pub beta: f64,
    pub hbar: f64,
    pub coeffs: Vec<C64>,
}

impl HermiteVector {
    pub fn new(beta: f64, hbar: f64, coeffs: Vec<C64>) -> Self {
        HermiteVector { beta, hbar, coeffs }
    }

    pub fn zero(beta: f64, hbar: f64) -> Self {
        Self::new(beta, hbar, Vec::new())
    }

    /// `φ_j`.
    pub fn level(beta: f64, hbar: f64, j: usize) -> Self {
        let mut c = vec![CZERO; j + 1];
        c[j] = C64::new(1.0, 0.0);
        Self::new(beta, hbar, c)
    }

    pub fn coeff(&self, j: usize) -> C64 {
        self.coeffs.get(j).copied().unwrap_or(CZERO)
    }

    /// Highest level with a stored coefficient.
    pub fn top_level(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    fn like(&self, coeffs: Vec<C64>) -> Self {
        Self::new(self.beta, self.hbar, coeffs)
    }

    pub fn scale(&self, s: C64) -> Self {
        self.like(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        self.like((0..n).map(|j| self.coeff(j) + other.coeff(j)).collect())
    }

    fn ladder(&self, factor: f64, sign: f64) -> Self {
        let n = self.coeffs.len();
        let mut out = vec![CZERO; n + 1];
        for (j, c) in self.coeffs.iter().enumerate() {
            if j > 0 {
                out[j - 1] += c * (factor * (j as f64).sqrt());
            }
            out[j + 1] += c * (sign * factor * ((j + 1) as f64).sqrt());
        }
        self.like(out)
    }

    /// `y·φ_j = √(ħ/2β) (√j φ_{j−1} + √(j+1) φ_{j+1})`.
    pub fn mul_y(&self) -> Self {
        self.ladder((self.hbar / (2.0 * self.beta)).sqrt(), 1.0)
    }

    /// `∂φ_j = √(β/2ħ) (√j φ_{j−1} − √(j+1) φ_{j+1})`.
    pub fn d_dy(&self) -> Self {
        self.ladder((self.beta / (2.0 * self.hbar)).sqrt(), -1.0)
    }

    pub fn project_e0(&self) -> C64 {
        self.coeff(0)
    }

    /// `L v`, scaling level `j` by `2jβħ`.
    pub fn apply_l(&self) -> Self {
        let e = 2.0 * self.beta * self.hbar;
        self.like(self.coeffs.iter().enumerate().map(|(j, c)| c * (e * j as f64)).collect())
    }

    /// `L⁻¹ v` for `v` with no `φ₀` component.
    pub fn apply_l_inverse(&self) -> Result<Self> {
        let scale = self.norm().max(1.0);
        if self.coeff(0).norm() > 1e-13 * scale {
            return Err(Error::invalid("L⁻¹ applied to a vector with a ground-state component"));
        }
        let e = 2.0 * self.beta * self.hbar;
        Ok(self.like(
            self.coeffs.iter().enumerate().map(|(j, c)| if j == 0 { CZERO } else { c / (e * j as f64) }).collect(),
        ))
    }

    pub fn eval(&self, y: f64) -> C64 {
        let vals = hermite_functions(self.top_level(), (self.beta / self.hbar).sqrt() * y);
        let s = (self.beta / self.hbar).powf(0.25);
        self.coeffs.iter().zip(vals).map(|(c, v)| c * (v * s)).sum()
    }

    pub fn eval_many(&self, ys: &[f64]) -> Vec<C64> {
        ys.iter().map(|&y| self.eval(y)).collect()
    }
}

/// Normalised Hermite functions `ψ_0..ψ_n` at `u`, by the three-term
/// recurrence.
pub fn hermite_functions(n: usize, u: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(std::f64::consts::PI.powf(-0.25) * (-0.5 * u * u).exp());
    if n >= 1 {
        out.push(std::f64::consts::SQRT_2 * u * out[0]);
    }
    for j in 1..n {
        let jf = j as f64;
        let next = (2.0 / (jf + 1.0)).sqrt() * u * out[j] - (jf / (jf + 1.0)).sqrt() * out[j - 1];
        out.push(next);
    }
    out
}

/// A real coefficient function of the model, in the translated coordinate
/// where the critical point sits at `y = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelCoefficient {
    Circle(CircleFunction),
    /// `Σ c_n yⁿ`.
    Polynomial {
        coeffs: Vec<f64>,
    },
}

impl ModelCoefficient {
    pub fn eval(&self, y: f64) -> f64 {
        match self {
            ModelCoefficient::Circle(f) => f.eval(y).re,
            ModelCoefficient::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * y + c),
        }
    }

    pub fn eval_derivative(&self, y: f64) -> f64 {
        match self {
            ModelCoefficient::Circle(f) => f.eval_derivative(y, 1).re,
            ModelCoefficient::Polynomial { coeffs } => {
                coeffs.iter().enumerate().skip(1).rev().fold(0.0, |acc, (n, c)| acc * y + n as f64 * c)
            }
        }
    }

    /// Taylor coefficients `f⁽ⁿ⁾(0)/n!` for `n ≤ 4`.
    pub fn taylor(&self) -> [f64; 5] {
        let mut t = [0.0; 5];
        match self {
            ModelCoefficient::Circle(f) => {
                let mut fact = 1.0;
                for (n, slot) in t.iter_mut().enumerate() {
                    if n > 0 {
                        fact *= n as f64;
                    }
                    *slot = f.eval_derivative(0.0, n as u32).re / fact;
                }
            }
            ModelCoefficient::Polynomial { coeffs } => {
                for (slot, c) in t.iter_mut().zip(coeffs) {
                    *slot = *c;
                }
            }
        }
        t
    }

    fn negate(&self) -> Self {
        match self {
            ModelCoefficient::Circle(f) => ModelCoefficient::Circle(f.scale(C64::new(-1.0, 0.0))),
            ModelCoefficient::Polynomial { coeffs } => {
                ModelCoefficient::Polynomial { coeffs: coeffs.iter().map(|c| -c).collect() }
            }
        }
    }
}

/// Local data of the model at a non-degenerate maximum of `A₁`.
///
/// `a1_taylor[n]` and `a2_taylor[n]` are the Taylor coefficients of order
/// `n` at the critical point, so `a1_taylor[2] = −β²/2`, and `r₃¹`, `r₄¹` are
/// `a1_taylor[3]`, `a1_taylor[4]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasimodeParams {
    pub beta: f64,
    pub a1_taylor: [f64; 5],
    pub a2_taylor: [f64; 5],
    pub w0: f64,
    pub b: f64,
    pub y_star: f64,
    /// `−1` when the critical point is a minimum of the original `A₁` and the
    /// x-frequency is flipped.
    pub x_sign: i32,
    pub a1: ModelCoefficient,
    pub a2: ModelCoefficient,
    pub w: ModelCoefficient,
}

impl QuasimodeParams {
    pub fn a1_0(&self) -> f64 {
        self.a1_taylor[0]
    }

    /// Builds parameters from coefficient functions already centred at the
    /// critical point.
    pub fn from_model(a1: ModelCoefficient, a2: ModelCoefficient, w: ModelCoefficient, b: f64) -> Result<Self> {
        if !(b > 0.0 && b < std::f64::consts::PI) {
            return Err(Error::invalid("cutoff half-width must lie in (0, π)"));
        }
        let mut a1 = a1;
        let mut t1 = a1.taylor();
        if t1[1].abs() > 1e-10 {
            return Err(Error::invalid(format!("A₁'(0) = {:e} is not a critical point", t1[1])));
        }
        if (2.0 * t1[2]).abs() < DEGENERACY_TOL {
            return Err(Error::invalid("degenerate critical point"));
        }
        let mut x_sign = 1;
        if t1[2] > 0.0 {
            a1 = a1.negate();
            t1 = a1.taylor();
            x_sign = -1;
        }
        Ok(QuasimodeParams {
            beta: (-2.0 * t1[2]).sqrt(),
            a1_taylor: t1,
            a2_taylor: a2.taylor(),
            w0: w.eval(0.0),
            b,
            y_star: 0.0,
            x_sign,
            a1,
            a2,
            w,
        })
    }

    /// Pure oscillator: `A₁ = −β²y²/2`, `A₂ = W = 0`.
    pub fn harmonic(beta: f64, b: f64) -> Result<Self> {
        let poly = |c: Vec<f64>| ModelCoefficient::Polynomial { coeffs: c };
        Self::from_model(poly(vec![0.0, 0.0, -0.5 * beta * beta]), poly(vec![]), poly(vec![]), b)
    }
}

/// Translates the circle functions to put `y*` at the origin and extracts
/// the local Taylor data. A minimum is turned into a maximum by negating
/// `A₁` and recording `x_sign = −1`.
pub fn extract_params(
    a1: &CircleFunction,
    a2: &CircleFunction,
    w: &CircleFunction,
    y_star: f64,
    b: f64,
) -> Result<QuasimodeParams> {
    if !a1.is_real() || !a2.is_real() || !w.is_real() {
        return Err(Error::invalid("model coefficients must be real"));
    }
    let mut p = QuasimodeParams::from_model(
        ModelCoefficient::Circle(a1.translate(y_star)),
        ModelCoefficient::Circle(a2.translate(y_star)),
        ModelCoefficient::Circle(w.translate(y_star)),
        b,
    )?;
    p.y_star = y_star;
    Ok(p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualRecord {
    pub hbar: f64,
    pub residual_l2: f64,
    pub exterior_mass: f64,
    /// `‖v‖` from the Hermite coefficients.
    pub norm: f64,
    /// `‖ħ∂v‖ / ħ^{1/2}`.
    pub localization: f64,
    /// `‖∂v‖ħ^{1/2}`, `‖yv‖ħ^{−1/2}`, `‖∂(yv)‖`.
    pub mixed: [f64; 3],
    pub lambda0: C64,
}

/// Quasimode `v₀ + v₁ + v₂` at one `ħ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WkbSolution {
    pub hbar: f64,
    pub beta: f64,
    pub v0: HermiteVector,
    pub v1: HermiteVector,
    pub v2: HermiteVector,
    /// `v₁ = ħ^{1/2} Σ_{j=1}^{3} β¹_j φ_j`.
    pub beta1: Vec<C64>,
    /// `v₂ = ħ Σ_{j=1}^{6} β²_j φ_j`.
    pub beta2: Vec<C64>,
    pub c0: C64,
    pub lambda0: C64,
    pub residuals: Vec<ResidualRecord>,
}

impl WkbSolution {
    pub fn v(&self) -> HermiteVector {
        self.v0.add(&self.v1).add(&self.v2)
    }

    /// `βħ − 2A₁(0) + Λ₀ħ²`.
    pub fn energy(&self, params: &QuasimodeParams) -> C64 {
        let h = self.hbar;
        C64::new(self.beta * h - 2.0 * params.a1_0(), 0.0) + self.lambda0 * (h * h)
    }
}

fn levels(v: &HermiteVector, from: usize, to: usize, scale: f64) -> Vec<C64> {
    (from..=to).map(|j| v.coeff(j) / scale).collect()
}

pub fn build_wkb(params: &QuasimodeParams, hbar: f64) -> Result<WkbSolution> {
    if !(hbar > 0.0 && hbar < 0.5) {
        return Err(Error::invalid("ħ must lie in (0, 0.5)"));
    }
    let beta = params.beta;
    let h2 = hbar * hbar;
    let [_, _, _, r3, r4] = params.a1_taylor;
    let [s0, s1, ..] = params.a2_taylor;
    let i = C64::new(0.0, 1.0);
    let re = |x: f64| C64::new(x, 0.0);

    let v0 = HermiteVector::level(beta, hbar, 0);
    let y2v0 = v0.mul_y().mul_y();
    let f1 = y2v0.mul_y().scale(re(2.0 * r3)).add(&v0.d_dy().scale(i * (-2.0 * s0 * h2)));
    let v1 = f1.apply_l_inverse()?;

    let f2 = v1
        .mul_y()
        .mul_y()
        .mul_y()
        .scale(re(2.0 * r3))
        .add(&v1.d_dy().scale(i * (-2.0 * s0 * h2)))
        .add(&y2v0.mul_y().mul_y().scale(re(2.0 * r4)))
        .add(&v0.d_dy().mul_y().scale(i * (-2.0 * s1 * h2)))
        .add(&v0.scale(i * (-s1 * h2) - params.w0 * h2));
    let c0 = f2.project_e0() / h2;
    let mut rhs = f2.clone();
    rhs.coeffs[0] = CZERO;
    let v2 = rhs.apply_l_inverse()?;

    Ok(WkbSolution {
        hbar,
        beta,
        beta1: levels(&v1, 1, 3, hbar.sqrt()),
        beta2: levels(&v2, 1, 6, hbar),
        v0,
        v1,
        v2,
        c0,
        lambda0: -c0,
        residuals: Vec::new(),
    })
}

/// Default residual grid on `[−π, π)`.
pub const RESIDUAL_GRID: usize = 4096;
/// Minimum grid points per oscillator width `√(ħ/β)`.
pub const POINTS_PER_WIDTH: f64 = 16.0;

fn residual_grid(r: usize) -> Vec<f64> {
    (0..r).map(|i| -std::f64::consts::PI + TWO_PI * i as f64 / r as f64).collect()
}

fn l2(vals: impl Iterator<Item = C64>, dy: f64) -> f64 {
    (vals.map(|z| z.norm_sqr()).sum::<f64>() * dy).sqrt()
}

/// Residual and localisation diagnostics of the quasimode at one `ħ`.
pub fn residual_record(params: &QuasimodeParams, sol: &WkbSolution, r: usize) -> Result<ResidualRecord> {
    let hbar = sol.hbar;
    let dy = TWO_PI / r as f64;
    if (hbar / params.beta).sqrt() / dy < POINTS_PER_WIDTH {
        return Err(Error::invalid(format!("grid of {r} points too coarse for ħ = {hbar}")));
    }
    let ys = residual_grid(r);
    let v = sol.v();
    let dv = v.d_dy();
    let raw = v.eval_many(&ys);
    let draw = dv.eval_many(&ys);
    let d2raw = dv.d_dy().eval_many(&ys);
    let h2 = hbar * hbar;
    let i = C64::new(0.0, 1.0);
    let e = sol.energy(params);
    let res = (0..r).map(|n| {
        let y = ys[n];
        let (a1, a2, da2, w) = (params.a1.eval(y), params.a2.eval(y), params.a2.eval_derivative(y), params.w.eval(y));
        let [c, dc, d2c] = quasimode_cutoff_derivatives(y, params.b);
        let u = raw[n] * c;
        let du = raw[n] * dc + draw[n] * c;
        let d2u = raw[n] * d2c + draw[n] * (2.0 * dc) + d2raw[n] * c;
        let pu = -d2u * h2 - u * (2.0 * a1) + i * h2 * (du * (2.0 * a2) + u * da2) + u * (h2 * w);
        pu - e * u
    });
    let residual_l2 = l2(res, dy);
    let exterior_mass = l2(raw.iter().zip(&ys).filter(|(_, y)| y.abs() > params.b).map(|(z, _)| *z), dy);

    let yv = v.mul_y();
    Ok(ResidualRecord {
        hbar,
        residual_l2,
        exterior_mass,
        norm: v.norm(),
        localization: dv.norm() * hbar / hbar.sqrt(),
        mixed: [dv.norm() * hbar.sqrt(), yv.norm() / hbar.sqrt(), yv.d_dy().norm()],
        lambda0: sol.lambda0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualScan {
    pub records: Vec<ResidualRecord>,
    /// Fitted exponent of `residual_l2 ∝ ħ^slope`.
    pub slope: f64,
    /// Largest `|Λ₀(ħ) − Λ₀(ħ')|` over the scan.
    pub lambda0_spread: f64,
}

impl ResidualScan {
    /// CSV with columns `hbar,residual_l2,exterior_mass`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["hbar", "residual_l2", "exterior_mass"])?;
        for r in &self.records {
            wr.write_record([
                format!("{}", r.hbar),
                format!("{:.12e}", r.residual_l2),
                format!("{:.12e}", r.exterior_mass),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

pub fn residual_scan(params: &QuasimodeParams, hbars: &[f64], r: usize) -> Result<ResidualScan> {
    if hbars.len() < 4 {
        return Err(Error::invalid("residual scan needs at least four ħ values"));
    }
    if hbars.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("ħ values must be strictly decreasing"));
    }
    let records =
        hbars.par_iter().map(|&h| residual_record(params, &build_wkb(params, h)?, r)).collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = records.iter().map(|r| r.hbar).collect();
    let ys: Vec<f64> = records.iter().map(|r| r.residual_l2).collect();
    let mut spread: f64 = 0.0;
    for a in &records {
        for b in &records {
            spread = spread.max((a.lambda0 - b.lambda0).norm());
        }
    }
    Ok(ResidualScan { slope: loglog_slope(&xs, &ys), records, lambda0_spread: spread })
}

/// Inputs of the separable witness experiment.
#[derive(Clone, Debug)]
pub struct WitnessSetup<'a> {
    pub a: &'a VectorPotential,
    pub v: &'a FourierField2D,
    pub region: &'a Region,
    pub y_star: f64,
    pub b: f64,
    pub t: f64,
    /// y-modes `|n| ≤ m` of each block.
    pub m: u32,
    /// Samples used to take the quasimode to Fourier space.
    pub grid: usize,
    /// Times sampled for the exterior-concentration diagnostic.
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub k: i32,
    pub hbar: f64,
    /// `∫_0^T ⟨1_ω u(t), u(t)⟩ dt / ‖u(0)‖²`.
    pub mass_ratio: f64,
    /// Relative mass of the initial datum outside the y-modes kept.
    pub truncation_loss: f64,
    /// Largest `‖u(t)‖_{|y−y*|>b} / ‖u(t)‖` over the sampled times.
    pub exterior_fraction: f64,
}

/// Cutoff quasimode `φ(y − y*) v(y − y*)` as coefficients on the strip basis.
/// Returns the vector and the relative mass lost to truncation.
pub fn witness_state(params: &QuasimodeParams, sol: &WkbSolution, basis: &ModeBasis, r: usize) -> Result<(CVec, f64)> {
    let (_, m_hi) = basis.y_range();
    if r <= 2 * m_hi.unsigned_abs() as usize {
        return Err(Error::invalid("sampling grid too small for the basis"));
    }
    let v = sol.v();
    let vals: Vec<C64> = (0..r)
        .map(|i| {
            let y = TWO_PI * i as f64 / r as f64;
            let s = (y - params.y_star + std::f64::consts::PI).rem_euclid(TWO_PI) - std::f64::consts::PI;
            v.eval(s) * quasimode_cutoff(s, params.b)
        })
        .collect();
    let spec = grid::analyze_1d(&vals);
    let total: f64 = spec.iter().map(|z| z.norm_sqr()).sum();
    let c = CVec::from_shape_fn(basis.len(), |i| {
        let n = basis.mode(i).k2;
        spec[n.rem_euclid(r as i32) as usize] * TWO_PI
    });
    let kept = linalg::vec_norm(&c).powi(2) / (TWO_PI * TWO_PI);
    Ok((c, (1.0 - kept / total).max(0.0)))
}

/// `∫_0^T ⟨M u(t), u(t)⟩ dt / ‖u(0)‖²` for `u(t) = e^{−itH}u₀`.
pub fn mass_ratio(eig: &EigenDecomposition, mass: &MassMatrix, u0: &CVec, t: f64) -> f64 {
    let c = eig.to_eigen(u0);
    let g = EigenMass::new(eig, mass, None).gramian(0.0, t, 1.0);
    linalg::inner(&g.dot(&c), &c).re / linalg::vec_norm(&c).powi(2)
}

pub fn witness_experiment(setup: &WitnessSetup, k_list: &[i32]) -> Result<Vec<WitnessRecord>> {
    if k_list.is_empty() || k_list.windows(2).any(|w| w[1] <= w[0]) || k_list[0] < 1 {
        return Err(Error::invalid("k values must be positive and increasing"));
    }
    if !(setup.t > 0.0) {
        return Err(Error::invalid("observation time must be positive"));
    }
    if region_meets_strip(setup.region, setup.y_star, 0.0) {
        return Err(Error::invalid("control region meets the concentration geodesic"));
    }
    let a1 = setup.a.a1.y_profile()?;
    let a2 = setup.a.a2.y_profile()?;
    let w = setup.a.norm_sqr().add(setup.v).y_profile()?;
    let params = extract_params(&a1, &a2, &w, setup.y_star, setup.b)?;
    let exterior = Region::horizontal_strips(&[(setup.y_star + setup.b, setup.y_star + TWO_PI - setup.b)])?;

    k_list
        .par_iter()
        .map(|&k| {
            let hbar = (k as f64).powf(-0.5);
            let sol = build_wkb(&params, hbar)?;
            let kx = params.x_sign * k;
            let block = spectral::separable_blocks(setup.a, setup.v, &[kx], setup.m)?.remove(0);
            let basis = block.op.basis;
            let eig = spectral::eigendecompose(&block.op)?;
            let (u0, truncation_loss) = witness_state(&params, &sol, &basis, setup.grid)?;
            let mass = region_mass_matrix(setup.region, &basis);
            let ext = region_mass_matrix(&exterior, &basis);
            let c = eig.to_eigen(&u0);
            let n = setup.samples.max(2);
            let exterior_fraction = (0..n)
                .map(|j| {
                    let t = setup.t * j as f64 / (n - 1) as f64;
                    let ct: CVec = c.iter().zip(&eig.values).map(|(z, l)| z * C64::from_polar(1.0, -l * t)).collect();
                    let ut = eig.from_eigen(&ct);
                    (linalg::inner(&ext.matrix.dot(&ut), &ut).re.max(0.0) / linalg::vec_norm(&ut).powi(2)).sqrt()
                })
                .fold(0.0, f64::max);
            Ok(WitnessRecord {
                k,
                hbar,
                mass_ratio: mass_ratio(&eig, &mass, &u0, setup.t),
                truncation_loss,
                exterior_fraction,
            })
        })
        .collect()
}

/// CSV with columns `k,mass_ratio`.
pub fn write_witness_csv<W: Write>(records: &[WitnessRecord], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["k", "mass_ratio"])?;
    for r in records {
        wr.write_record([r.k.to_string(), format!("{:.12e}", r.mass_ratio)])?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cos_model() -> QuasimodeParams {
        let a1 = CircleFunction::from_trig(TWO_PI, 0.0, &[(1, 1.0)], &[]);
        let a2 = CircleFunction::from_trig(TWO_PI, 0.3, &[], &[(1, 0.2)]);
        let w = a1.mul(&a1).unwrap().add(&a2.mul(&a2).unwrap()).unwrap();
        extract_params(&a1, &a2, &w, 0.0, 1.0).unwrap()
    }

    #[test]
    fn ladder_base_cases() {
        let p0 = HermiteVector::level(1.5, 0.1, 0);
        let y = p0.mul_y();
        assert!((y.coeff(1).re - (0.1f64 / 3.0).sqrt()).abs() < 1e-15);
        let d = p0.d_dy();
        assert!((d.coeff(1).re + (1.5f64 / 0.2).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn l_inverse_rejects_ground_state() {
        assert!(HermiteVector::level(1.0, 0.1, 0).apply_l_inverse().is_err());
        let v = HermiteVector::level(1.0, 0.1, 2);
        let back = v.apply_l_inverse().unwrap().apply_l();
        assert!((back.coeff(2).re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn taylor_of_cos_model() {
        let p = cos_model();
        assert!((p.beta - 1.0).abs() < 1e-14);
        assert!(p.a1_taylor[3].abs() < 1e-14);
        assert!((p.a1_taylor[4] - 1.0 / 24.0).abs() < 1e-14);
        assert!((p.a2_taylor[0] - 0.3).abs() < 1e-14);
        assert!((p.a2_taylor[1] - 0.2).abs() < 1e-14);
        assert!(p.a2_taylor[2].abs() < 1e-14);
        assert!((p.a2_taylor[3] + 0.2 / 6.0).abs() < 1e-14);
        assert_eq!(p.x_sign, 1);
    }

    #[test]
    fn cos_two_y_and_minimum() {
        let a = CircleFunction::from_trig(TWO_PI, 0.0, &[(2, 1.0)], &[]);
        let z = CircleFunction::zero(TWO_PI);
        assert!((extract_params(&a, &z, &z, 0.0, 1.0).unwrap().beta - 2.0).abs() < 1e-13);
        let p = extract_params(&a, &z, &z, std::f64::consts::FRAC_PI_2, 0.5).unwrap();
        assert_eq!(p.x_sign, -1);
        assert!((p.beta - 2.0).abs() < 1e-13);
        assert!(extract_params(&a, &z, &z, 0.3, 0.5).is_err());
    }

    #[test]
    fn first_order_vanishes_without_odd_terms() {
        let p = QuasimodeParams::harmonic(2.0, 1.0).unwrap();
        let s = build_wkb(&p, 0.1).unwrap();
        assert!(s.v1.norm() == 0.0 && s.v2.norm() == 0.0);
        assert_eq!(s.lambda0, CZERO);
    }

    #[test]
    fn parity_of_first_correction() {
        let s = build_wkb(&cos_model(), 0.1).unwrap();
        assert!(s.beta1[1].norm() < 1e-15);
        assert!(s.v2.top_level() <= 6);
    }
}
