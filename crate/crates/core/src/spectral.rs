//! Galerkin assembly of `H_{A,V} = (D − A)² + V`, its eigendecomposition,
//! exact propagation, spectral projectors, separable blocks and the damped
//! operator.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{Mode, ModeBasis, ModeVector};
use crate::error::{Error, Result};
use crate::fields::{FourierField2D, VectorPotential};
use crate::linalg::{self, CMat, CVec};
use crate::smooth::chi;
use crate::C64;

/// Dense Hermitian matrix over a mode basis.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    pub basis: ModeBasis,
    pub entries: CMat,
}

impl HermitianOperator {
    pub fn new(basis: ModeBasis, entries: CMat) -> Result<Self> {
        if entries.nrows() != basis.len() || entries.ncols() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), found: entries.nrows() });
        }
        Ok(HermitianOperator { basis, entries })
    }

    pub fn hermitian_defect(&self) -> f64 {
        linalg::hermitian_defect(&self.entries)
    }

    pub fn apply(&self, v: &ModeVector) -> Result<ModeVector> {
        if v.basis != self.basis {
            return Err(Error::invalid("basis mismatch"));
        }
        ModeVector::new(self.basis, self.entries.dot(&v.coeffs))
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Binary dump: one JSON header line `{N, ordering, hermitian_defect}`
    /// followed by the row-major entries as little-endian `f64` pairs.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let header = serde_json::json!({
            "N": self.dim(),
            "ordering": "lexicographic (k1 major, k2 minor)",
            "x_range": self.basis.x_range(),
            "y_range": self.basis.y_range(),
            "hermitian_defect": self.hermitian_defect(),
        });
        writeln!(w, "{header}")?;
        for z in self.entries.iter() {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }
}

/// Union of the mode supports of `A` and `W = |A|² + V` with the
/// corresponding coupling coefficients.
fn couplings(a: &VectorPotential, v: &FourierField2D) -> Vec<(Mode, C64, C64, C64)> {
    let w = a.norm_sqr().add(v);
    let mut modes: Vec<Mode> = a.a1.iter().chain(a.a2.iter()).chain(w.iter()).map(|(k, _)| k).collect();
    modes.sort();
    modes.dedup();
    modes.into_iter().map(|m| (m, a.a1.coeff(m), a.a2.coeff(m), w.coeff(m))).collect()
}

/// Matrix of `H_{A,V}` without the bandwidth check:
/// `H[k, k'] = |k'|² δ − (k + k')·Â(k − k') + Ŵ(k − k')`.
pub fn assemble_unchecked(a: &VectorPotential, v: &FourierField2D, basis: &ModeBasis) -> CMat {
    let cpl = couplings(a, v);
    let n = basis.len();
    let cols: Vec<Vec<(usize, C64)>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let kp = basis.mode(j);
            let mut col: Vec<(usize, C64)> = cpl
                .iter()
                .filter_map(|&(m, a1, a2, w)| {
                    let k = kp + m;
                    let i = basis.index(k)?;
                    let s1 = (k.k1 + kp.k1) as f64;
                    let s2 = (k.k2 + kp.k2) as f64;
                    Some((i, w - a1 * s1 - a2 * s2))
                })
                .collect();
            col.push((j, C64::new(kp.norm_sqr() as f64, 0.0)));
            col
        })
        .collect();
    let mut out = CMat::zeros((n, n));
    for (j, col) in cols.into_iter().enumerate() {
        for (i, z) in col {
            out[[i, j]] += z;
        }
    }
    out
}

/// Galerkin matrix of `H_{A,V}` on `basis`. The basis half-width must be at
/// least twice the bandwidth of `A` and `V`.
pub fn assemble(a: &VectorPotential, v: &FourierField2D, basis: &ModeBasis) -> Result<HermitianOperator> {
    if !v.is_real() {
        return Err(Error::invalid("potential must be real"));
    }
    let kmax = a.bandwidth().max(v.bandwidth());
    let n = basis.half_width();
    if n < 2 * kmax {
        let w = a.norm_sqr().add(v);
        let total: f64 = a.a1.iter().chain(a.a2.iter()).chain(w.iter()).map(|(_, c)| c.norm_sqr()).sum();
        let dropped: f64 =
            a.a1.iter()
                .chain(a.a2.iter())
                .chain(w.iter())
                .filter(|(k, _)| 2 * k.linf() > n)
                .map(|(_, c)| c.norm_sqr())
                .sum();
        return Err(Error::TruncationRisk {
            context: format!("basis half-width {n} below twice the field bandwidth {kmax}"),
            lost_mass: if total > 0.0 { dropped / total } else { 0.0 },
        });
    }
    HermitianOperator::new(*basis, assemble_unchecked(a, v, basis))
}

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns).
#[derive(Clone, Debug, PartialEq)]
pub struct EigenDecomposition {
    pub basis: ModeBasis,
    pub values: Vec<f64>,
    pub vectors: CMat,
}

pub const HERMITIAN_TOL: f64 = 1e-10;

pub fn eigendecompose(h: &HermitianOperator) -> Result<EigenDecomposition> {
    let defect = h.hermitian_defect();
    let scale = linalg::max_abs(&h.entries).max(1.0);
    if defect > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian { defect });
    }
    let (values, vectors) = linalg::eigh(&h.entries)?;
    Ok(EigenDecomposition { basis: h.basis, values, vectors })
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Coordinates `Q^H u` in the eigenbasis.
    pub fn to_eigen(&self, u: &CVec) -> CVec {
        linalg::adjoint(&self.vectors).dot(u)
    }

    pub fn from_eigen(&self, c: &CVec) -> CVec {
        self.vectors.dot(c)
    }

    /// `Q f(Λ) Q^H`.
    pub fn function(&self, f: impl Fn(f64) -> C64) -> CMat {
        let d: Vec<C64> = self.values.iter().map(|&l| f(l)).collect();
        linalg::reconstruct(&self.vectors, &d)
    }

    pub fn eigenvector(&self, i: usize) -> ModeVector {
        ModeVector { basis: self.basis, coeffs: self.vectors.column(i).to_owned() }
    }
}

/// `e^{−itH} u = Q e^{−iΛt} Q^H u`.
pub fn propagate(eig: &EigenDecomposition, state: &ModeVector, t: f64) -> Result<ModeVector> {
    if state.basis != eig.basis {
        return Err(Error::invalid("basis mismatch"));
    }
    let mut c = eig.to_eigen(&state.coeffs);
    for (z, &l) in c.iter_mut().zip(&eig.values) {
        *z *= C64::from_polar(1.0, -l * t);
    }
    ModeVector::new(eig.basis, eig.from_eigen(&c))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowProfile {
    Hard,
    Smooth,
}

/// Energy window `|h²λ − 1| ≲ ρ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectorSpec {
    pub h: f64,
    pub rho: f64,
    pub profile: WindowProfile,
}

impl ProjectorSpec {
    pub fn new(h: f64, rho: f64, profile: WindowProfile) -> Result<Self> {
        if !(h > 0.0 && h <= 1.0) || !(rho > 0.0 && rho < 1.0) {
            return Err(Error::invalid(format!("invalid window h={h}, rho={rho}")));
        }
        Ok(ProjectorSpec { h, rho, profile })
    }

    pub fn hard(h: f64, rho: f64) -> Result<Self> {
        Self::new(h, rho, WindowProfile::Hard)
    }

    pub fn weight(&self, lambda: f64) -> f64 {
        let t = (self.h * self.h * lambda - 1.0) / self.rho;
        match self.profile {
            WindowProfile::Hard => {
                if t.abs() <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            WindowProfile::Smooth => chi(t),
        }
    }
}

/// `Π = Q χ((h²Λ − 1)/ρ) Q^H` together with the selected eigen-indices.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralProjector {
    pub matrix: CMat,
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
}

impl SpectralProjector {
    pub fn rank(&self) -> usize {
        self.indices.len()
    }
}

pub fn spectral_projector(eig: &EigenDecomposition, spec: &ProjectorSpec) -> Result<SpectralProjector> {
    let (indices, weights): (Vec<usize>, Vec<f64>) =
        eig.values.iter().enumerate().map(|(i, &l)| (i, spec.weight(l))).filter(|(_, w)| *w > 0.0).unzip();
    if indices.is_empty() {
        return Err(Error::EmptyRange);
    }
    let q = linalg::select_columns(&eig.vectors, &indices);
    let mut qw = q.clone();
    for (j, w) in weights.iter().enumerate() {
        qw.column_mut(j).mapv_inplace(|z| z * *w);
    }
    let matrix = qw.dot(&linalg::adjoint(&q));
    Ok(SpectralProjector { matrix, indices, weights })
}

/// One-dimensional operator `(k − A₁(y))² + (D_y − A₂(y))² + V(y)` on the
/// y-modes `|n| ≤ M` of the x-frequency `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparableBlock {
    pub k: i32,
    pub op: HermitianOperator,
}

pub fn separable_blocks(
    a: &VectorPotential,
    v: &FourierField2D,
    k_list: &[i32],
    m: u32,
) -> Result<Vec<SeparableBlock>> {
    if !a.is_x_independent() || !v.is_x_independent() {
        return Err(Error::invalid("separable blocks need fields depending on y only"));
    }
    let a1 = a.a1.y_profile()?;
    let a2 = a.a2.y_profile()?;
    let w = a.norm_sqr().add(v).y_profile()?;
    k_list
        .par_iter()
        .map(|&k| {
            let basis = ModeBasis::strip(k, m);
            let dim = basis.len();
            let mut h = CMat::zeros((dim, dim));
            for j in 0..dim {
                let np = basis.mode(j).k2;
                for i in 0..dim {
                    let n = basis.mode(i).k2;
                    let d = n - np;
                    let mut z = w.coeff(d) - a1.coeff(d) * (2.0 * k as f64) - a2.coeff(d) * (n + np) as f64;
                    if d == 0 {
                        z += (k as f64).powi(2) + (np as f64).powi(2);
                    }
                    h[[i, j]] = z;
                }
            }
            Ok(SeparableBlock { k, op: HermitianOperator::new(basis, h)? })
        })
        .collect()
}

/// Multiplication by `f` as a mode-convolution matrix, `M[k, k'] = f̂(k − k')`.
pub fn multiplication_matrix(f: &FourierField2D, basis: &ModeBasis) -> CMat {
    let n = basis.len();
    let mut out = CMat::zeros((n, n));
    for j in 0..n {
        let kp = basis.mode(j);
        for (m, c) in f.iter() {
            if let Some(i) = basis.index(kp + m) {
                out[[i, j]] = c;
            }
        }
    }
    out
}

/// `H − i a` for a damping `a ≥ 0`, not identically zero.
pub fn damped_operator(h: &HermitianOperator, a: &FourierField2D) -> Result<CMat> {
    if !a.is_real() {
        return Err(Error::invalid("damping must be real"));
    }
    if a.is_zero() {
        return Err(Error::invalid("damping vanishes identically"));
    }
    let r = (4 * (a.bandwidth() as usize + 1)).max(64);
    let min = a.eval_grid(r).iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let scale = a.iter().map(|(_, c)| c.norm()).sum::<f64>();
    if min < -1e-12 * scale {
        return Err(Error::invalid(format!("damping takes negative values (min {min:.3e})")));
    }
    let m = multiplication_matrix(a, &h.basis);
    Ok(&h.entries - &m.mapv(|z| z * C64::new(0.0, 1.0)))
}

/// `min_λ (−Im λ)` over the spectrum of the damped operator.
pub fn spectral_abscissa(m: &CMat) -> Result<f64> {
    Ok(linalg::eigvals_general(m)?.iter().map(|l| -l.im).fold(f64::INFINITY, f64::min))
}

/// Norms `‖e^{−itH_eff} ψ₀‖` at `t = j·dt`, `j = 0..=steps`.
pub fn damped_norm_trace(m: &CMat, psi0: &CVec, dt: f64, steps: usize) -> Result<Vec<(f64, f64)>> {
    let step = linalg::expm(&m.mapv(|z| z * C64::new(0.0, -dt)))?;
    let mut psi = psi0.clone();
    let mut out = vec![(0.0, linalg::vec_norm(&psi))];
    for j in 1..=steps {
        psi = step.dot(&psi);
        out.push((j as f64 * dt, linalg::vec_norm(&psi)));
    }
    Ok(out)
}

/// Energy below which eigenpairs are trusted after a gauge transform of
/// bandwidth `kg` on a square basis of half-width `n`.
pub fn resolved_threshold(n: i32, kg: i32) -> f64 {
    let r = (n - 4 * kg).max(0) as f64;
    r * r / 4.0
}

/// CSV with columns `index,eigenvalue`.
pub fn write_spectrum_csv<W: Write>(values: &[f64], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["index", "eigenvalue"])?;
    for (i, v) in values.iter().enumerate() {
        wr.write_record([i.to_string(), format!("{v:.15e}")])?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_operator_is_diagonal() {
        let b = ModeBasis::square(3);
        let h = assemble(&VectorPotential::zero(), &FourierField2D::zero(), &b).unwrap();
        for i in 0..b.len() {
            for j in 0..b.len() {
                let e = if i == j { b.mode(i).norm_sqr() as f64 } else { 0.0 };
                assert_eq!(h.entries[[i, j]], C64::new(e, 0.0));
            }
        }
    }

    #[test]
    fn cos_y_couplings() {
        let a = VectorPotential::new(FourierField2D::cos(Mode::new(0, 1), 1.0), FourierField2D::zero()).unwrap();
        let b = ModeBasis::square(4);
        let h = assemble(&a, &FourierField2D::zero(), &b).unwrap();
        let i = b.index(Mode::new(3, 1)).unwrap();
        let j = b.index(Mode::new(3, 0)).unwrap();
        assert!((h.entries[[i, j]] - C64::new(-3.0, 0.0)).norm() < 1e-15);
        let d = b.index(Mode::new(3, 0)).unwrap();
        assert!((h.entries[[d, d]].re - 9.5).abs() < 1e-15);
        assert_eq!(h.hermitian_defect(), 0.0);
    }

    #[test]
    fn insufficient_bandwidth_is_reported() {
        let a = VectorPotential::new(FourierField2D::cos(Mode::new(0, 3), 1.0), FourierField2D::zero()).unwrap();
        let r = assemble(&a, &FourierField2D::zero(), &ModeBasis::square(4));
        assert!(matches!(r, Err(Error::TruncationRisk { .. })));
    }

    #[test]
    fn two_by_two() {
        let m = CMat::from_shape_vec(
            (2, 2),
            vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        )
        .unwrap();
        let (w, _) = linalg::eigh(&m).unwrap();
        assert!((w[0] + 1.0).abs() < 1e-14 && (w[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn hard_window_selects_lattice_shell() {
        let b = ModeBasis::square(6);
        let h = assemble(&VectorPotential::zero(), &FourierField2D::zero(), &b).unwrap();
        let eig = eigendecompose(&h).unwrap();
        let p = spectral_projector(&eig, &ProjectorSpec::hard(0.25, 0.3).unwrap()).unwrap();
        let mut norms: Vec<i64> = p.indices.iter().map(|&i| eig.values[i].round() as i64).collect();
        norms.sort();
        norms.dedup();
        assert_eq!(norms, vec![13, 16, 17, 18, 20]);
        let pp = p.matrix.dot(&p.matrix);
        assert!(linalg::max_abs(&(&pp - &p.matrix)) < 1e-12);
        assert!(matches!(spectral_projector(&eig, &ProjectorSpec::hard(0.3, 0.001).unwrap()), Err(Error::EmptyRange)));
    }

    #[test]
    fn constant_damping() {
        let b = ModeBasis::square(3);
        let h = assemble(&VectorPotential::zero(), &FourierField2D::zero(), &b).unwrap();
        let m = damped_operator(&h, &FourierField2D::constant(0.4)).unwrap();
        assert!((spectral_abscissa(&m).unwrap() - 0.4).abs() < 1e-12);
        assert!(damped_operator(&h, &FourierField2D::zero()).is_err());
        assert!(damped_operator(&h, &FourierField2D::cos(Mode::new(1, 0), 1.0)).is_err());
    }
}
