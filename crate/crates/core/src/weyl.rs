//! Semiclassical Weyl quantization on T², commutators, exact conjugation,
//! Wigner samples and the second averaging normal form.
//!
//! A symbol `a(z, ζ) = Σ_m â_m(ζ) e^{im·z}` is quantized as
//!
//! ```text
//! Op_h(a)[k' + m, k'] = â_m(h (k' + m/2))
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{Mode, ModeBasis, ModeVector};
use crate::error::{Error, Result};
use crate::fields::{FourierField2D, VectorPotential};
use crate::linalg::{self, CMat, CVec};
use crate::smooth::{psi, vartheta};
use crate::{spectral, stats, C64};

type ProfileFn = dyn Fn(f64, f64) -> C64 + Send + Sync;

/// A function of the frequency variable `ζ = (ξ, η)`.
#[derive(Clone)]
pub struct Profile {
    f: Arc<ProfileFn>,
    /// True when the profile vanishes outside a compact set.
    pub compact: bool,
}

impl Profile {
    pub fn new(f: impl Fn(f64, f64) -> C64 + Send + Sync + 'static, compact: bool) -> Self {
        Profile { f: Arc::new(f), compact }
    }

    pub fn constant(c: C64) -> Self {
        Profile::new(move |_, _| c, false)
    }

    pub fn eval(&self, xi: f64, eta: f64) -> C64 {
        (self.f)(xi, eta)
    }
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Profile {{ compact: {} }}", self.compact)
    }
}

/// Polynomial `Σ c_{ab} ξ^a η^b` in the frequency variable.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ZetaPoly {
    pub terms: Vec<ZetaMonomial>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaMonomial {
    pub a: u32,
    pub b: u32,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl ZetaPoly {
    pub fn new(terms: &[(u32, u32, f64)]) -> Self {
        ZetaPoly { terms: terms.iter().map(|&(a, b, re)| ZetaMonomial { a, b, re, im: 0.0 }).collect() }
    }

    pub fn xi_sq() -> Self {
        Self::new(&[(2, 0, 1.0)])
    }

    pub fn eta_sq() -> Self {
        Self::new(&[(0, 2, 1.0)])
    }

    pub fn zeta_sq() -> Self {
        Self::new(&[(2, 0, 1.0), (0, 2, 1.0)])
    }

    pub fn xi() -> Self {
        Self::new(&[(1, 0, 1.0)])
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.a + t.b).max().unwrap_or(0)
    }

    pub fn eval(&self, xi: f64, eta: f64) -> C64 {
        self.terms.iter().map(|t| C64::new(t.re, t.im) * xi.powi(t.a as i32) * eta.powi(t.b as i32)).sum()
    }

    /// `(∂_ξ P, ∂_η P)`.
    pub fn gradient(&self, xi: f64, eta: f64) -> [C64; 2] {
        let mut g = [C64::new(0.0, 0.0); 2];
        for t in &self.terms {
            let c = C64::new(t.re, t.im);
            if t.a > 0 {
                g[0] += c * t.a as f64 * xi.powi(t.a as i32 - 1) * eta.powi(t.b as i32);
            }
            if t.b > 0 {
                g[1] += c * t.b as f64 * xi.powi(t.a as i32) * eta.powi(t.b as i32 - 1);
            }
        }
        g
    }
}

/// Symbol on `T² × R²` with finitely many z-modes.
#[derive(Clone, Debug, Default)]
pub struct Symbol {
    modes: BTreeMap<Mode, Profile>,
}

impl Symbol {
    pub fn from_profiles(it: impl IntoIterator<Item = (Mode, Profile)>) -> Self {
        Symbol { modes: it.into_iter().collect() }
    }

    /// `f(z) · P(ζ)`.
    pub fn product(f: &FourierField2D, poly: &ZetaPoly) -> Self {
        Self::from_profiles(f.iter().map(|(k, c)| {
            let p = poly.clone();
            (k, Profile::new(move |x, y| c * p.eval(x, y), false))
        }))
    }

    /// ζ-independent multiplier `f(z)`.
    pub fn multiplier(f: &FourierField2D) -> Self {
        Self::from_profiles(f.iter().map(|(k, c)| (k, Profile::constant(c))))
    }

    /// z-independent Fourier multiplier `a(ζ)`.
    pub fn fourier(p: Profile) -> Self {
        Self::from_profiles([(Mode::ZERO, p)])
    }

    pub fn polynomial(poly: &ZetaPoly) -> Self {
        Self::product(&FourierField2D::constant(1.0), poly)
    }

    /// Symbol of `h² H_{A,V}`: `|ζ|² − 2h A·ζ + h²(|A|² + V)`.
    pub fn magnetic(a: &VectorPotential, v: &FourierField2D, h: f64) -> Self {
        let w = a.norm_sqr().add(v).scale(C64::new(h * h, 0.0));
        Self::polynomial(&ZetaPoly::zeta_sq())
            .add(&Self::product(&a.a1.scale(C64::new(-2.0 * h, 0.0)), &ZetaPoly::xi()))
            .add(&Self::product(&a.a2.scale(C64::new(-2.0 * h, 0.0)), &ZetaPoly::new(&[(0, 1, 1.0)])))
            .add(&Self::multiplier(&w))
    }

    pub fn add(&self, other: &Symbol) -> Symbol {
        let mut modes = self.modes.clone();
        for (k, p) in &other.modes {
            let merged = match modes.remove(k) {
                Some(q) => {
                    let (p, q) = (p.clone(), q.clone());
                    let compact = p.compact && q.compact;
                    Profile::new(move |x, y| p.eval(x, y) + q.eval(x, y), compact)
                }
                None => p.clone(),
            };
            modes.insert(*k, merged);
        }
        Symbol { modes }
    }

    pub fn scale(&self, s: C64) -> Symbol {
        Self::from_profiles(self.modes.iter().map(|(k, p)| {
            let (p, compact) = (p.clone(), p.compact);
            (*k, Profile::new(move |x, y| s * p.eval(x, y), compact))
        }))
    }

    pub fn modes(&self) -> impl Iterator<Item = (&Mode, &Profile)> {
        self.modes.iter()
    }

    pub fn z_bandwidth(&self) -> i32 {
        self.modes.keys().map(|k| k.linf()).max().unwrap_or(0)
    }

    pub fn eval(&self, x: f64, y: f64, xi: f64, eta: f64) -> C64 {
        self.modes.iter().map(|(k, p)| p.eval(xi, eta) * C64::from_polar(1.0, k.k1 as f64 * x + k.k2 as f64 * y)).sum()
    }

    /// `∇_ζ P · ∇_z a` for a polynomial `P`.
    pub fn transport(&self, poly: &ZetaPoly) -> Symbol {
        Self::from_profiles(self.modes.iter().map(|(k, p)| {
            let (p, poly, k) = (p.clone(), poly.clone(), *k);
            let compact = p.compact;
            (
                k,
                Profile::new(
                    move |x, y| {
                        let g = poly.gradient(x, y);
                        C64::new(0.0, 1.0) * (g[0] * k.k1 as f64 + g[1] * k.k2 as f64) * p.eval(x, y)
                    },
                    compact,
                ),
            )
        }))
    }
}

/// Weyl quantization on a truncated basis; output modes outside the basis
/// are dropped.
pub fn quantize(a: &Symbol, h: f64, basis: &ModeBasis) -> Result<CMat> {
    if !(h > 0.0) {
        return Err(Error::invalid(format!("semiclassical parameter must be positive, got {h}")));
    }
    let n = basis.len();
    let modes: Vec<(Mode, Profile)> = a.modes.iter().map(|(k, p)| (*k, p.clone())).collect();
    let cols: Vec<Vec<(usize, C64)>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let kp = basis.mode(j);
            modes
                .iter()
                .filter_map(|(m, p)| {
                    let row = basis.index(kp + *m)?;
                    let xi = h * (kp.k1 as f64 + 0.5 * m.k1 as f64);
                    let eta = h * (kp.k2 as f64 + 0.5 * m.k2 as f64);
                    Some((row, p.eval(xi, eta)))
                })
                .collect()
        })
        .collect();
    let mut out = CMat::zeros((n, n));
    for (j, col) in cols.into_iter().enumerate() {
        for (i, v) in col {
            out[[i, j]] += v;
        }
    }
    Ok(out)
}

pub use crate::linalg::commutator;

/// `e^{G} H e^{−G}`.
pub fn conjugate_exp(g: &CMat, h: &CMat) -> Result<CMat> {
    linalg::check_square(g)?;
    linalg::check_square(h)?;
    if g.nrows() != h.nrows() {
        return Err(Error::DimensionMismatch { expected: h.nrows(), found: g.nrows() });
    }
    let e = linalg::expm(g)?;
    let einv = linalg::expm(&g.mapv(|z| -z))?;
    Ok(e.dot(h).dot(&einv))
}

/// `⟨Op_h(a) u, u⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WignerSample {
    pub label: String,
    pub h: f64,
    pub value: C64,
}

pub fn wigner_eval(state: &ModeVector, a: &Symbol, h: f64, label: &str) -> Result<WignerSample> {
    let op = quantize(a, h, &state.basis)?;
    let value = linalg::inner(&op.dot(&state.coeffs), &state.coeffs);
    Ok(WignerSample { label: label.to_string(), h, value })
}

/// Parameters of the second averaging step: semiclassical scale `h` and
/// transverse localisation exponent `α ∈ (1/4, 1/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalFormSpec {
    pub h: f64,
    pub alpha: f64,
}

impl NormalFormSpec {
    pub fn new(h: f64, alpha: f64) -> Result<Self> {
        if !(h > 0.0 && h <= 1.0) {
            return Err(Error::invalid("h must lie in (0, 1]"));
        }
        if !(alpha > 0.25 && alpha < 0.5) {
            return Err(Error::invalid("alpha must lie in (1/4, 1/2)"));
        }
        Ok(NormalFormSpec { h, alpha })
    }
}

/// Symbol `g₂(z, ξ) ϑ(η) η` with
/// `g₂ = ψ(ξ)/(iξ) · ∂_x^{-1}(A₂ − ⟨A₂⟩_x)`, which removes the x-oscillating
/// part of `−2h A₂ η` from `h² H` at first order.
pub fn g2_symbol(a: &VectorPotential) -> Result<Symbol> {
    if !a.a1.is_x_independent() {
        return Err(Error::invalid("A₁ depends on x; apply the first gauge transform first"));
    }
    Ok(Symbol::from_profiles(a.a2.iter().filter(|(k, _)| k.k1 != 0).map(|(k, c)| {
        let anti = c / C64::new(0.0, k.k1 as f64);
        (
            k,
            Profile::new(
                move |xi, eta| {
                    let p = psi(xi);
                    if p == 0.0 {
                        return C64::new(0.0, 0.0);
                    }
                    anti * p / C64::new(0.0, xi) * vartheta(eta) * eta
                },
                true,
            ),
        )
    })))
}

/// Symbol of the averaged operator:
/// `|ζ|² − 2h⟨A₁⟩ξ − 2h⟨A₂⟩_x η`.
pub fn averaged_symbol(a: &VectorPotential, h: f64) -> Symbol {
    let avg2 = FourierField2D::from_coeffs(a.a2.iter().filter(|(k, _)| k.k1 == 0));
    let avg1 = FourierField2D::from_coeffs(a.a1.iter().filter(|(k, _)| k.k1 == 0));
    Symbol::polynomial(&ZetaPoly::zeta_sq())
        .add(&Symbol::product(&avg1.scale(C64::new(-2.0 * h, 0.0)), &ZetaPoly::xi()))
        .add(&Symbol::product(&avg2.scale(C64::new(-2.0 * h, 0.0)), &ZetaPoly::new(&[(0, 1, 1.0)])))
}

/// Normalised test state: x-frequency `1/h`, Gaussian profile of width
/// `h^{α−1}/3` in the y-frequency, centred at `η = 0`.
pub fn localized_state(spec: &NormalFormSpec, basis: &ModeBasis) -> Result<ModeVector> {
    let k1 = (1.0 / spec.h).round() as i32;
    let sigma = spec.h.powf(spec.alpha - 1.0) / 3.0;
    let v = ModeVector::from_fn(*basis, |k| {
        if k.k1 == k1 {
            C64::new((-(k.k2 as f64).powi(2) / (2.0 * sigma * sigma)).exp(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    if v.norm() == 0.0 {
        return Err(Error::invalid("test state lies outside the basis"));
    }
    Ok(v.normalized())
}

/// Basis suited to the normal-form experiment: half-width `n` around
/// `(1/h, 0)`.
pub fn normal_form_basis(h: f64, n: u32) -> ModeBasis {
    ModeBasis::centered(n, Mode::new((1.0 / h).round() as i32, 0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalFormRecord {
    pub h: f64,
    pub alpha: f64,
    pub remainder_norm: f64,
    pub g2_norm: f64,
    /// Relative mass of the conjugated state in the outer two layers of the
    /// basis.
    pub edge_mass: f64,
}

/// Build `G₂ = Op_h(g₂ ϑ(η) η)` and measure `‖(e^{G₂}(P₁+Q₁)e^{−G₂} − P₂) v‖`
/// on the localised test state, where `P₁ + Q₁ = h² H_{A,0}` and `P₂` is
/// the averaged operator.
pub fn normal_form_g2(
    a: &VectorPotential,
    spec: &NormalFormSpec,
    basis: &ModeBasis,
) -> Result<(CMat, NormalFormRecord)> {
    let h = spec.h;
    let g = quantize(&g2_symbol(a)?, h, basis)?;
    let hh = spectral::assemble_unchecked(a, &FourierField2D::zero(), basis).mapv(|z| z * h * h);
    let p2 = quantize(&averaged_symbol(a, h), h, basis)?;
    let v = localized_state(spec, basis)?;

    let gm = g.mapv(|z| -z);
    let w = linalg::expm_apply(&gm, &v.coeffs);
    let edge_mass = edge_fraction(basis, &w);
    let hw: CVec = hh.dot(&w);
    let ev = linalg::expm_apply(&g, &hw);
    let r = &ev - &p2.dot(&v.coeffs);
    let remainder_norm = linalg::vec_norm(&r) / v.norm();
    let g2_norm = linalg::op_norm(&g)?;
    Ok((g, NormalFormRecord { h, alpha: spec.alpha, remainder_norm, g2_norm, edge_mass }))
}

fn edge_fraction(basis: &ModeBasis, w: &CVec) -> f64 {
    let total = linalg::vec_norm(w).powi(2);
    let edge: f64 =
        basis.modes().zip(w.iter()).filter(|(k, _)| basis.interior_depth(*k) < 2).map(|(_, z)| z.norm_sqr()).sum();
    edge / total
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalFormScan {
    pub records: Vec<NormalFormRecord>,
    /// Log-log slope of the remainder against `h`.
    pub slope: f64,
}

/// Remainder scan over several `h`, each on a basis of half-width `n`
/// centred at `(1/h, 0)`.
pub fn normal_form_scan(a: &VectorPotential, alpha: f64, hs: &[f64], n: u32) -> Result<NormalFormScan> {
    let records = hs
        .iter()
        .map(|&h| {
            let spec = NormalFormSpec::new(h, alpha)?;
            normal_form_g2(a, &spec, &normal_form_basis(h, n)).map(|r| r.1)
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = records.iter().map(|r| r.h).collect();
    let ys: Vec<f64> = records.iter().map(|r| r.remainder_norm).collect();
    Ok(NormalFormScan { slope: stats::loglog_slope(&xs, &ys), records })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_matrix() {
        let b = ModeBasis::square(3);
        let a = Symbol::multiplier(&FourierField2D::from_coeffs([(Mode::new(1, 0), C64::new(1.0, 0.0))]));
        let m = quantize(&a, 0.5, &b).unwrap();
        for j in 0..b.len() {
            let k = b.mode(j);
            for i in 0..b.len() {
                let expect = if b.mode(i) == k + Mode::new(1, 0) { 1.0 } else { 0.0 };
                assert_eq!(m[[i, j]], C64::new(expect, 0.0));
            }
        }
    }

    #[test]
    fn laplacian_symbol_is_diagonal() {
        let b = ModeBasis::square(4);
        let h = 0.3;
        let m = quantize(&Symbol::polynomial(&ZetaPoly::zeta_sq()), h, &b).unwrap();
        for i in 0..b.len() {
            let k = b.mode(i);
            assert!((m[[i, i]].re - h * h * k.norm_sqr() as f64).abs() < 1e-13);
        }
    }

    #[test]
    fn midpoint_entry() {
        let b = ModeBasis::square(6);
        let a = Symbol::product(&FourierField2D::from_coeffs([(Mode::new(1, 0), C64::new(1.0, 0.0))]), &ZetaPoly::xi());
        let m = quantize(&a, 0.25, &b).unwrap();
        let i = b.index(Mode::new(5, 0)).unwrap();
        let j = b.index(Mode::new(4, 0)).unwrap();
        assert!((m[[i, j]] - C64::new(1.125, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive_h() {
        assert!(quantize(&Symbol::polynomial(&ZetaPoly::xi()), 0.0, &ModeBasis::square(1)).is_err());
    }

    #[test]
    fn magnetic_symbol_matches_assembly() {
        let a =
            VectorPotential::new(FourierField2D::cos(Mode::new(0, 1), 1.0), FourierField2D::sin(Mode::new(1, 1), 0.4))
                .unwrap();
        let v = FourierField2D::cos(Mode::new(1, 0), 0.3);
        let b = ModeBasis::square(6);
        let h = 0.2;
        let q = quantize(&Symbol::magnetic(&a, &v, h), h, &b).unwrap();
        let hh = spectral::assemble_unchecked(&a, &v, &b).mapv(|z| z * h * h);
        assert!(linalg::max_abs(&(&q - &hh)) < 1e-13);
    }

    #[test]
    fn g2_vanishes_for_x_independent_a2() {
        let a =
            VectorPotential::new(FourierField2D::cos(Mode::new(0, 1), 1.0), FourierField2D::cos(Mode::new(0, 2), 0.5))
                .unwrap();
        let b = normal_form_basis(1.0 / 16.0, 6);
        let g = quantize(&g2_symbol(&a).unwrap(), 1.0 / 16.0, &b).unwrap();
        assert_eq!(linalg::max_abs(&g), 0.0);
    }

    #[test]
    fn g2_requires_gauged_a1() {
        let a = VectorPotential::new(FourierField2D::cos(Mode::new(1, 0), 1.0), FourierField2D::zero()).unwrap();
        assert!(g2_symbol(&a).is_err());
    }
}
