//! Fourier mode lattice, truncated Galerkin bases and state vectors.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inner, vec_norm, CVec};
use crate::{C64, TWO_PI};

/// Integer Fourier mode `k = (k1, k2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Mode {
    pub k1: i32,
    pub k2: i32,
}

impl Mode {
    pub const ZERO: Mode = Mode { k1: 0, k2: 0 };

    pub const fn new(k1: i32, k2: i32) -> Self {
        Mode { k1, k2 }
    }

    pub fn linf(self) -> i32 {
        self.k1.abs().max(self.k2.abs())
    }

    pub fn norm_sqr(self) -> i64 {
        let (a, b) = (self.k1 as i64, self.k2 as i64);
        a * a + b * b
    }

    pub fn dot(self, other: Mode) -> i64 {
        self.k1 as i64 * other.k1 as i64 + self.k2 as i64 * other.k2 as i64
    }

    pub fn scale(self, m: i32) -> Mode {
        Mode::new(self.k1 * m, self.k2 * m)
    }

    pub fn as_f64(self) -> [f64; 2] {
        [self.k1 as f64, self.k2 as f64]
    }
}

impl Add for Mode {
    type Output = Mode;
    fn add(self, o: Mode) -> Mode {
        Mode::new(self.k1 + o.k1, self.k2 + o.k2)
    }
}

impl Sub for Mode {
    type Output = Mode;
    fn sub(self, o: Mode) -> Mode {
        Mode::new(self.k1 - o.k1, self.k2 - o.k2)
    }
}

impl Neg for Mode {
    type Output = Mode;
    fn neg(self) -> Mode {
        Mode::new(-self.k1, -self.k2)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.k1, self.k2)
    }
}

/// Rectangular block of modes `[x_lo, x_hi] × [y_lo, y_hi]`, ordered
/// lexicographically (k1 major, k2 minor).
///
/// The usual Galerkin basis is [`ModeBasis::square`] with `|k|_∞ ≤ N`; a
/// basis may also be re-centred (semiclassical packets at `k1 ≈ 1/h`) or be
/// a single x-mode strip (separable one-dimensional blocks).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeBasis {
    x_lo: i32,
    x_hi: i32,
    y_lo: i32,
    y_hi: i32,
}

impl ModeBasis {
    pub fn square(n: u32) -> Self {
        Self::centered(n, Mode::ZERO)
    }

    pub fn centered(n: u32, center: Mode) -> Self {
        let n = n as i32;
        ModeBasis { x_lo: center.k1 - n, x_hi: center.k1 + n, y_lo: center.k2 - n, y_hi: center.k2 + n }
    }

    /// Modes `(k1, n)` with `|n| ≤ m`.
    pub fn strip(k1: i32, m: u32) -> Self {
        let m = m as i32;
        ModeBasis { x_lo: k1, x_hi: k1, y_lo: -m, y_hi: m }
    }

    pub fn len(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn nx(&self) -> usize {
        (self.x_hi - self.x_lo + 1) as usize
    }

    fn ny(&self) -> usize {
        (self.y_hi - self.y_lo + 1) as usize
    }

    pub fn x_range(&self) -> (i32, i32) {
        (self.x_lo, self.x_hi)
    }

    pub fn y_range(&self) -> (i32, i32) {
        (self.y_lo, self.y_hi)
    }

    /// Half-width of the basis in its narrowest non-trivial direction; for a
    /// square basis this is `N`.
    pub fn half_width(&self) -> i32 {
        let hx = (self.x_hi - self.x_lo) / 2;
        let hy = (self.y_hi - self.y_lo) / 2;
        match (hx, hy) {
            (0, y) => y,
            (x, 0) => x,
            (x, y) => x.min(y),
        }
    }

    /// Largest difference `|k - k'|_∞` between two basis modes.
    pub fn max_difference(&self) -> i32 {
        (self.x_hi - self.x_lo).max(self.y_hi - self.y_lo)
    }

    pub fn mode(&self, i: usize) -> Mode {
        let ny = self.ny();
        Mode::new(self.x_lo + (i / ny) as i32, self.y_lo + (i % ny) as i32)
    }

    pub fn index(&self, k: Mode) -> Option<usize> {
        if k.k1 < self.x_lo || k.k1 > self.x_hi || k.k2 < self.y_lo || k.k2 > self.y_hi {
            return None;
        }
        Some((k.k1 - self.x_lo) as usize * self.ny() + (k.k2 - self.y_lo) as usize)
    }

    pub fn contains(&self, k: Mode) -> bool {
        self.index(k).is_some()
    }

    pub fn modes(&self) -> impl Iterator<Item = Mode> + '_ {
        (0..self.len()).map(move |i| self.mode(i))
    }

    /// Lattice distance from `k` to the basis boundary, measured only along
    /// directions in which the basis has extent.
    pub fn interior_depth(&self, k: Mode) -> i32 {
        let mut d = i32::MAX;
        if self.x_hi > self.x_lo {
            d = d.min(k.k1 - self.x_lo).min(self.x_hi - k.k1);
        }
        if self.y_hi > self.y_lo {
            d = d.min(k.k2 - self.y_lo).min(self.y_hi - k.k2);
        }
        d
    }
}

/// Coefficient vector over a [`ModeBasis`]. The coefficient `u_k` multiplies
/// the orthonormal mode `e^{ik·z}/(2π)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeVector {
    pub basis: ModeBasis,
    pub coeffs: CVec,
}

impl ModeVector {
    pub fn zeros(basis: ModeBasis) -> Self {
        ModeVector { basis, coeffs: CVec::zeros(basis.len()) }
    }

    pub fn new(basis: ModeBasis, coeffs: CVec) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), found: coeffs.len() });
        }
        Ok(ModeVector { basis, coeffs })
    }

    pub fn single(basis: ModeBasis, k: Mode) -> Result<Self> {
        let i = basis.index(k).ok_or_else(|| Error::invalid(format!("mode {k} outside basis")))?;
        let mut v = Self::zeros(basis);
        v.coeffs[i] = C64::new(1.0, 0.0);
        Ok(v)
    }

    pub fn from_fn(basis: ModeBasis, mut f: impl FnMut(Mode) -> C64) -> Self {
        let coeffs = CVec::from_shape_fn(basis.len(), |i| f(basis.mode(i)));
        ModeVector { basis, coeffs }
    }

    pub fn norm(&self) -> f64 {
        vec_norm(&self.coeffs)
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        ModeVector { basis: self.basis, coeffs: self.coeffs.mapv(|z| z / n) }
    }

    pub fn inner(&self, other: &ModeVector) -> Result<C64> {
        self.same_basis(other)?;
        Ok(inner(&self.coeffs, &other.coeffs))
    }

    pub fn coeff(&self, k: Mode) -> C64 {
        self.basis.index(k).map(|i| self.coeffs[i]).unwrap_or(C64::new(0.0, 0.0))
    }

    pub(crate) fn same_basis(&self, other: &ModeVector) -> Result<()> {
        if self.basis != other.basis {
            return Err(Error::invalid("basis mismatch"));
        }
        Ok(())
    }

    /// Pointwise value `u(z)`.
    pub fn eval(&self, x: f64, y: f64) -> C64 {
        self.basis
            .modes()
            .zip(self.coeffs.iter())
            .map(|(k, c)| c * C64::from_polar(1.0, k.k1 as f64 * x + k.k2 as f64 * y))
            .sum::<C64>()
            / TWO_PI
    }
}
