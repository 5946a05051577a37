//! Band-limited functions on T² and on closed geodesic circles.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{Mode, ModeVector};
use crate::error::{Error, Result};
use crate::geometry::Direction;
use crate::linalg::{eigvals_general, CMat, CVec};
use crate::{grid, C64, TWO_PI};

const CZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Truncated Fourier series `f(z) = Σ f̂(k) e^{ik·z}`. Absent modes are zero.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<ModeRecord>", into = "Vec<ModeRecord>")]
pub struct FourierField2D {
    coeffs: BTreeMap<Mode, C64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModeRecord {
    k1: i32,
    k2: i32,
    re: f64,
    #[serde(default)]
    im: f64,
}

impl From<Vec<ModeRecord>> for FourierField2D {
    fn from(v: Vec<ModeRecord>) -> Self {
        FourierField2D::from_coeffs(v.into_iter().map(|r| (Mode::new(r.k1, r.k2), C64::new(r.re, r.im))))
    }
}

impl From<FourierField2D> for Vec<ModeRecord> {
    fn from(f: FourierField2D) -> Self {
        f.coeffs.into_iter().map(|(k, c)| ModeRecord { k1: k.k1, k2: k.k2, re: c.re, im: c.im }).collect()
    }
}

impl FourierField2D {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Sums duplicate modes and drops exact zeros.
    pub fn from_coeffs(it: impl IntoIterator<Item = (Mode, C64)>) -> Self {
        let mut coeffs = BTreeMap::new();
        for (k, c) in it {
            *coeffs.entry(k).or_insert(CZERO) += c;
        }
        coeffs.retain(|_, c| *c != CZERO);
        FourierField2D { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_coeffs([(Mode::ZERO, C64::new(c, 0.0))])
    }

    /// `amp · cos(k·z)`.
    pub fn cos(k: Mode, amp: f64) -> Self {
        if k == Mode::ZERO {
            return Self::constant(amp);
        }
        Self::from_coeffs([(k, C64::new(amp / 2.0, 0.0)), (-k, C64::new(amp / 2.0, 0.0))])
    }

    /// `amp · sin(k·z)`.
    pub fn sin(k: Mode, amp: f64) -> Self {
        Self::from_coeffs([(k, C64::new(0.0, -amp / 2.0)), (-k, C64::new(0.0, amp / 2.0))])
    }

    /// Random real trigonometric polynomial with `|k|_∞ ≤ bandwidth` and
    /// coefficients uniform in the unit square scaled by `amp`.
    pub fn random_real<R: Rng + ?Sized>(bandwidth: i32, amp: f64, rng: &mut R) -> Self {
        let mut coeffs = Vec::new();
        for k1 in -bandwidth..=bandwidth {
            for k2 in -bandwidth..=bandwidth {
                let k = Mode::new(k1, k2);
                if k < -k {
                    continue;
                }
                if k == Mode::ZERO {
                    coeffs.push((k, C64::new(amp * rng.random_range(-1.0..1.0), 0.0)));
                    continue;
                }
                let c = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * amp;
                coeffs.push((k, c));
                coeffs.push((-k, c.conj()));
            }
        }
        Self::from_coeffs(coeffs)
    }

    pub fn coeff(&self, k: Mode) -> C64 {
        self.coeffs.get(&k).copied().unwrap_or(CZERO)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Mode, C64)> + '_ {
        self.coeffs.iter().map(|(k, c)| (*k, *c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Smallest `K` with every stored mode in `|k|_∞ ≤ K`.
    pub fn bandwidth(&self) -> i32 {
        self.coeffs.keys().map(|k| k.linf()).max().unwrap_or(0)
    }

    /// Hermitian symmetry `f̂(-k) = conj f̂(k)` up to round-off.
    pub fn is_real(&self) -> bool {
        let scale = self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max);
        self.coeffs.iter().all(|(k, c)| (self.coeff(-*k).conj() - c).norm() <= 1e-13 * scale.max(1.0))
    }

    pub fn mean(&self) -> C64 {
        self.coeff(Mode::ZERO)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_coeffs(self.iter().chain(other.iter()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_coeffs(self.iter().map(|(k, c)| (k, c * s)))
    }

    /// Pointwise product, by coefficient convolution.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.coeffs.len() * other.coeffs.len());
        for (k, a) in self.iter() {
            for (l, b) in other.iter() {
                out.push((k + l, a * b));
            }
        }
        Self::from_coeffs(out)
    }

    pub fn dx(&self) -> Self {
        Self::from_coeffs(self.iter().map(|(k, c)| (k, c * C64::new(0.0, k.k1 as f64))))
    }

    pub fn dy(&self) -> Self {
        Self::from_coeffs(self.iter().map(|(k, c)| (k, c * C64::new(0.0, k.k2 as f64))))
    }

    /// `z ↦ f(z + t)`.
    pub fn translate(&self, tx: f64, ty: f64) -> Self {
        Self::from_coeffs(self.iter().map(|(k, c)| (k, c * C64::from_polar(1.0, k.k1 as f64 * tx + k.k2 as f64 * ty))))
    }

    pub fn eval(&self, x: f64, y: f64) -> C64 {
        self.iter().map(|(k, c)| c * C64::from_polar(1.0, k.k1 as f64 * x + k.k2 as f64 * y)).sum()
    }

    /// Values on the `r × r` grid of [`crate::grid`].
    pub fn eval_grid(&self, r: usize) -> ndarray::Array2<C64> {
        grid::synthesize(r, self.iter())
    }

    pub fn is_x_independent(&self) -> bool {
        self.coeffs.keys().all(|k| k.k1 == 0)
    }

    /// The `y`-profile of an x-independent field as a function on the circle
    /// of circumference 2π.
    pub fn y_profile(&self) -> Result<CircleFunction> {
        if !self.is_x_independent() {
            return Err(Error::invalid("field depends on x"));
        }
        Ok(CircleFunction::from_coeffs(TWO_PI, self.iter().map(|(k, c)| (k.k2, c))))
    }

    /// Lift a 2π-periodic function of `y` to T².
    pub fn from_y_profile(f: &CircleFunction) -> Result<Self> {
        if (f.ell() - TWO_PI).abs() > 1e-12 {
            return Err(Error::invalid("profile circumference must be 2π"));
        }
        Ok(Self::from_coeffs(f.iter().map(|(m, c)| (Mode::new(0, m), c))))
    }
}

impl fmt::Display for FourierField2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "field[{} modes, K={}]", self.coeffs.len(), self.bandwidth())
    }
}

/// Real vector potential `A = (A₁, A₂)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorPotential {
    pub a1: FourierField2D,
    pub a2: FourierField2D,
}

impl VectorPotential {
    pub fn new(a1: FourierField2D, a2: FourierField2D) -> Result<Self> {
        if !a1.is_real() || !a2.is_real() {
            return Err(Error::invalid("vector potential components must be real"));
        }
        Ok(VectorPotential { a1, a2 })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(t1: f64, t2: f64) -> Self {
        VectorPotential { a1: FourierField2D::constant(t1), a2: FourierField2D::constant(t2) }
    }

    pub fn random<R: Rng + ?Sized>(bandwidth: i32, amp: f64, rng: &mut R) -> Self {
        VectorPotential {
            a1: FourierField2D::random_real(bandwidth, amp, rng),
            a2: FourierField2D::random_real(bandwidth, amp, rng),
        }
    }

    /// `A + ∇g`.
    pub fn add_gradient(&self, g: &FourierField2D) -> Self {
        VectorPotential { a1: self.a1.add(&g.dx()), a2: self.a2.add(&g.dy()) }
    }

    pub fn bandwidth(&self) -> i32 {
        self.a1.bandwidth().max(self.a2.bandwidth())
    }

    pub fn is_x_independent(&self) -> bool {
        self.a1.is_x_independent() && self.a2.is_x_independent()
    }

    /// `|A|² = A₁² + A₂²`.
    pub fn norm_sqr(&self) -> FourierField2D {
        self.a1.mul(&self.a1).add(&self.a2.mul(&self.a2))
    }
}

/// Function on a circle of circumference `ℓ`:
/// `f(s) = Σ_m c_m e^{i m (2π/ℓ) s}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "CircleRecord", into = "CircleRecord")]
pub struct CircleFunction {
    ell: f64,
    coeffs: BTreeMap<i32, C64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircleRecord {
    ell: f64,
    modes: Vec<CircleMode>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircleMode {
    m: i32,
    re: f64,
    #[serde(default)]
    im: f64,
}

impl From<CircleRecord> for CircleFunction {
    fn from(r: CircleRecord) -> Self {
        CircleFunction::from_coeffs(r.ell, r.modes.into_iter().map(|m| (m.m, C64::new(m.re, m.im))))
    }
}

impl From<CircleFunction> for CircleRecord {
    fn from(f: CircleFunction) -> Self {
        CircleRecord {
            ell: f.ell,
            modes: f.coeffs.into_iter().map(|(m, c)| CircleMode { m, re: c.re, im: c.im }).collect(),
        }
    }
}

/// Coefficients below this size (for `m ≠ 0`) make a circle function constant.
pub const CONSTANT_THRESHOLD: f64 = 1e-12;

impl CircleFunction {
    pub fn from_coeffs(ell: f64, it: impl IntoIterator<Item = (i32, C64)>) -> Self {
        let mut coeffs = BTreeMap::new();
        for (m, c) in it {
            *coeffs.entry(m).or_insert(CZERO) += c;
        }
        coeffs.retain(|_, c| *c != CZERO);
        CircleFunction { ell, coeffs }
    }

    pub fn zero(ell: f64) -> Self {
        Self::from_coeffs(ell, [])
    }

    /// Real trigonometric polynomial `a₀ + Σ a_m cos(mωs) + b_m sin(mωs)`.
    pub fn from_trig(ell: f64, a0: f64, cos: &[(i32, f64)], sin: &[(i32, f64)]) -> Self {
        let mut v = vec![(0, C64::new(a0, 0.0))];
        for &(m, a) in cos {
            v.push((m, C64::new(a / 2.0, 0.0)));
            v.push((-m, C64::new(a / 2.0, 0.0)));
        }
        for &(m, b) in sin {
            v.push((m, C64::new(0.0, -b / 2.0)));
            v.push((-m, C64::new(0.0, b / 2.0)));
        }
        Self::from_coeffs(ell, v)
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    /// Angular frequency `2π/ℓ` of the first mode.
    pub fn omega(&self) -> f64 {
        TWO_PI / self.ell
    }

    pub fn coeff(&self, m: i32) -> C64 {
        self.coeffs.get(&m).copied().unwrap_or(CZERO)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, C64)> + '_ {
        self.coeffs.iter().map(|(m, c)| (*m, *c))
    }

    pub fn max_mode(&self) -> i32 {
        self.coeffs.keys().map(|m| m.abs()).max().unwrap_or(0)
    }

    pub fn is_real(&self) -> bool {
        let scale = self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max);
        self.coeffs.iter().all(|(m, c)| (self.coeff(-m).conj() - c).norm() <= 1e-13 * scale.max(1.0))
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().all(|(m, c)| *m == 0 || c.norm() < CONSTANT_THRESHOLD)
    }

    pub fn eval(&self, s: f64) -> C64 {
        let w = self.omega();
        self.iter().map(|(m, c)| c * C64::from_polar(1.0, m as f64 * w * s)).sum()
    }

    pub fn derivative(&self) -> Self {
        let w = self.omega();
        Self::from_coeffs(self.ell, self.iter().map(|(m, c)| (m, c * C64::new(0.0, m as f64 * w))))
    }

    /// `order`-th derivative at `s`.
    pub fn eval_derivative(&self, s: f64, order: u32) -> C64 {
        let w = self.omega();
        self.iter()
            .map(|(m, c)| c * C64::new(0.0, m as f64 * w).powu(order) * C64::from_polar(1.0, m as f64 * w * s))
            .sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_coeffs(self.ell, self.iter().map(|(m, c)| (m, c * s)))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if (self.ell - other.ell).abs() > 1e-12 * self.ell {
            return Err(Error::invalid("circumference mismatch"));
        }
        Ok(Self::from_coeffs(self.ell, self.iter().chain(other.iter())))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if (self.ell - other.ell).abs() > 1e-12 * self.ell {
            return Err(Error::invalid("circumference mismatch"));
        }
        let mut v = Vec::new();
        for (m, a) in self.iter() {
            for (n, b) in other.iter() {
                v.push((m + n, a * b));
            }
        }
        Ok(Self::from_coeffs(self.ell, v))
    }

    /// `s ↦ f(s + t)`.
    pub fn translate(&self, t: f64) -> Self {
        let w = self.omega();
        Self::from_coeffs(self.ell, self.iter().map(|(m, c)| (m, c * C64::from_polar(1.0, m as f64 * w * t))))
    }

    /// Largest coefficient deviation from `other`.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        self.iter().chain(other.iter()).map(|(m, _)| (self.coeff(m) - other.coeff(m)).norm()).fold(0.0, f64::max)
    }
}

/// Projection onto modes orthogonal to `dir`: the long-time average of `f`
/// along lines of direction `(p, q)`.
pub fn directional_average(f: &FourierField2D, dir: Direction) -> FourierField2D {
    let d = Mode::new(dir.p(), dir.q());
    FourierField2D::from_coeffs(f.iter().filter(|(k, _)| k.dot(d) == 0))
}

/// Generator `m ↦ m(-q, p)` of the modes orthogonal to `dir`.
fn transverse_mode(dir: Direction, m: i32) -> Mode {
    Mode::new(-dir.q(), dir.p()).scale(m)
}

fn transverse_range(f: &FourierField2D, dir: Direction) -> i32 {
    let step = dir.p().abs().max(dir.q().abs()).max(1);
    f.bandwidth() / step
}

/// `A_γ = ⟨A⟩_γ · γ` as a function of `s = z·γ⊥`.
pub fn a_gamma(a: &VectorPotential, dir: Direction) -> CircleFunction {
    let (p, q) = (dir.p() as f64, dir.q() as f64);
    let norm = dir.norm();
    let mmax = transverse_range(&a.a1, dir).max(transverse_range(&a.a2, dir));
    let coeffs = (-mmax..=mmax).map(|m| {
        let k = transverse_mode(dir, m);
        (m, (a.a1.coeff(k) * p + a.a2.coeff(k) * q) / norm)
    });
    CircleFunction::from_coeffs(dir.circumference(), coeffs)
}

/// `B = ∂_x A₂ − ∂_y A₁`.
pub fn magnetic_field(a: &VectorPotential) -> FourierField2D {
    a.a2.dx().sub(&a.a1.dy())
}

/// Directional average of the magnetic field, as a function of `s = z·γ⊥`.
pub fn b_gamma_average(a: &VectorPotential, dir: Direction) -> CircleFunction {
    let b = magnetic_field(a);
    let mmax = transverse_range(&b, dir);
    CircleFunction::from_coeffs(dir.circumference(), (-mmax..=mmax).map(|m| (m, b.coeff(transverse_mode(dir, m)))))
}

/// Gauge function `g₁(x, y) = ∫_{-π}^{x} (⟨A₁⟩(y) − A₁(s, y)) ds`, so that
/// `A₁ + ∂_x g₁ = ⟨A₁⟩`.
pub fn gauge_g1(a: &VectorPotential) -> FourierField2D {
    let mut out = Vec::new();
    for (k, c) in a.a1.iter() {
        if k.k1 == 0 {
            continue;
        }
        let ik = C64::new(0.0, k.k1 as f64);
        out.push((k, -c / ik));
        let sign = if k.k1 % 2 == 0 { 1.0 } else { -1.0 };
        out.push((Mode::new(0, k.k2), c * sign / ik));
    }
    FourierField2D::from_coeffs(out)
}

/// Relative mass outside the basis tolerated by [`apply_gauge`].
pub const GAUGE_TRUNCATION_TOL: f64 = 1e-8;

/// Coefficients of `e^{±ig} u` on the basis of `u`.
pub fn apply_gauge(state: &ModeVector, g: &FourierField2D, sign: i32) -> Result<ModeVector> {
    if sign != 1 && sign != -1 {
        return Err(Error::invalid("gauge sign must be ±1"));
    }
    let basis = state.basis;
    let kg = g.bandwidth();
    let (xl, xh) = basis.x_range();
    let (yl, yh) = basis.y_range();
    let extent = [xl, xh, yl, yh].iter().map(|v| v.abs()).max().unwrap_or(0);
    let r = (4 * (extent + kg + 1) as usize).next_power_of_two();

    let state_vals = grid::synthesize(r, state.basis.modes().zip(state.coeffs.iter().copied()));
    let g_vals = g.eval_grid(r);
    let s = sign as f64;
    let prod =
        ndarray::Zip::from(&state_vals).and(&g_vals).map_collect(|u, gv| u * C64::new(-s * gv.im, s * gv.re).exp());
    let spec = grid::analyze(&prod);
    let coeffs = CVec::from_shape_fn(basis.len(), |i| grid::coeff(&spec, basis.mode(i)));
    let out = ModeVector::new(basis, coeffs)?;

    let total: f64 = prod.iter().map(|z| z.norm_sqr()).sum::<f64>() / (r * r) as f64;
    let kept = out.norm().powi(2);
    let lost = (total - kept).max(0.0);
    if total > 0.0 && lost > GAUGE_TRUNCATION_TOL * total {
        return Err(Error::TruncationRisk {
            context: format!("gauge multiplication leaves basis (bandwidth {kg})"),
            lost_mass: lost / total,
        });
    }
    Ok(out)
}

/// A critical point of a real circle function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub s: f64,
    pub second_derivative: f64,
    pub degenerate: bool,
}

/// Result of [`critical_points`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "points")]
pub enum CriticalSet {
    /// The function is constant: every point is critical.
    AllCritical,
    Points(Vec<CriticalPoint>),
}

impl CriticalSet {
    pub fn points(&self) -> &[CriticalPoint] {
        match self {
            CriticalSet::AllCritical => &[],
            CriticalSet::Points(p) => p,
        }
    }
}

/// Default tolerance below which `|f''|` marks a critical point degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;
const UNIT_CIRCLE_TOL: f64 = 1e-6;
const ROOT_TOL: f64 = 1e-10;

/// All critical points of a real circle function, from the unit-circle roots
/// of `w^M f'(s)`, `w = e^{iωs}`, polished by Newton's method.
pub fn critical_points(f: &CircleFunction, tol: f64) -> Result<CriticalSet> {
    if !f.is_real() {
        return Err(Error::invalid("critical points need a real function"));
    }
    if f.is_constant() {
        return Ok(CriticalSet::AllCritical);
    }
    let df = f.derivative();
    let mmax = df.max_mode();
    // Polynomial coefficients d_j of w^j, j = m + M.
    let mut poly: Vec<C64> = (-mmax..=mmax).map(|m| df.coeff(m)).collect();
    let scale = poly.iter().map(|c| c.norm()).fold(0.0, f64::max);
    while poly.last().is_some_and(|c| c.norm() <= 1e-14 * scale) {
        poly.pop();
    }
    let low = poly.iter().take_while(|c| c.norm() <= 1e-14 * scale).count();
    let poly = &poly[low..];
    let n = poly.len() - 1;
    let roots = if n == 0 {
        Vec::new()
    } else {
        let lead = poly[n];
        let mut comp = CMat::zeros((n, n));
        for i in 1..n {
            comp[[i, i - 1]] = C64::new(1.0, 0.0);
        }
        for i in 0..n {
            comp[[i, n - 1]] = -poly[i] / lead;
        }
        eigvals_general(&comp)?
    };

    let ell = f.ell();
    let w = f.omega();
    let d1 = |s: f64| f.eval_derivative(s, 1).re;
    let d2 = |s: f64| f.eval_derivative(s, 2).re;
    let mut found: Vec<f64> = Vec::new();
    for z in roots {
        if (z.norm() - 1.0).abs() >= UNIT_CIRCLE_TOL {
            continue;
        }
        let mut s = (z.arg() / w).rem_euclid(ell);
        for _ in 0..20 {
            let (g, h) = (d1(s), d2(s));
            if g == 0.0 || h.abs() < 1e-14 {
                break;
            }
            let step = g / h;
            if step.abs() > ell / 4.0 {
                break;
            }
            s -= step;
        }
        // Newton on a degenerate root converges linearly; finish by bisection
        // on the sign change of f' if needed.
        let scale_f: f64 = f.iter().map(|(m, c)| c.norm() * (m as f64 * w).abs()).sum::<f64>().max(1.0);
        if d1(s).abs() >= ROOT_TOL * scale_f {
            s = refine_by_bisection(&d1, s, ell);
        }
        if d1(s).abs() < ROOT_TOL * scale_f {
            found.push(s.rem_euclid(ell));
        }
    }
    found.sort_by(|a, b| a.total_cmp(b));
    let mut merged: Vec<f64> = Vec::new();
    for s in found {
        let dup = merged.iter().any(|&t| {
            let d = (s - t).abs();
            d.min(ell - d) < 1e-7 * ell
        });
        if !dup {
            merged.push(s);
        }
    }
    Ok(CriticalSet::Points(
        merged
            .into_iter()
            .map(|s| {
                let h = d2(s);
                CriticalPoint { s, second_derivative: h, degenerate: h.abs() < tol }
            })
            .collect(),
    ))
}

fn refine_by_bisection(d1: &impl Fn(f64) -> f64, s: f64, ell: f64) -> f64 {
    let mut width = 1e-6 * ell;
    for _ in 0..12 {
        let (mut a, mut b) = (s - width, s + width);
        let (mut fa, fb) = (d1(a), d1(b));
        if fa * fb < 0.0 {
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let fm = d1(m);
                if fm == 0.0 || (b - a) < 1e-15 * ell {
                    return m;
                }
                if fa * fm < 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            return 0.5 * (a + b);
        }
        width *= 4.0;
    }
    s
}
