//! Dense complex linear algebra helpers shared by the operator modules.
//!
//! Hermitian eigenproblems go through LAPACK `zheevr`. Matrices whose
//! sparsity graph splits into several connected components (separable
//! operators, strip regions) are diagonalised block by block.

use ndarray::{Array1, Array2, ArrayView2, ShapeBuilder};
use ndarray_linalg::{Eigh, Solve, UPLO};

use crate::error::{Error, Result};
use crate::C64;

pub type CMat = Array2<C64>;
pub type CVec = Array1<C64>;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Conjugate transpose.
pub fn adjoint(m: &CMat) -> CMat {
    m.t().mapv(|z| z.conj())
}

/// `max |M - M^H|` over all entries.
pub fn hermitian_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    worst
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_norm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `⟨a, b⟩ = Σ conj(a_i) b_i`.
pub fn inner(a: &CVec, b: &CVec) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn commutator(a: &CMat, b: &CMat) -> Result<CMat> {
    check_square(a)?;
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: b.nrows() });
    }
    Ok(a.dot(b) - b.dot(a))
}

pub(crate) fn check_square(a: &CMat) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: a.ncols() });
    }
    Ok(())
}

/// Connected components of the sparsity graph of the given matrices
/// (entries that are exactly zero do not couple). Components are returned
/// sorted by their smallest index, each sorted ascending.
pub fn coupling_components(mats: &[&CMat]) -> Vec<Vec<usize>> {
    let n = mats.first().map(|m| m.nrows()).unwrap_or(0);
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for m in mats {
        for ((i, j), z) in m.indexed_iter() {
            if i < j && (*z != ZERO || m[[j, i]] != ZERO) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

fn submatrix(m: &CMat, idx: &[usize]) -> CMat {
    Array2::from_shape_fn((idx.len(), idx.len()), |(a, b)| m[[idx[a], idx[b]]])
}

/// LAPACK `zheevr` on a dense Hermitian matrix (lower triangle is read).
fn zheevr(m: ArrayView2<C64>, vectors: bool) -> Result<(Vec<f64>, Option<CMat>)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((vec![], vectors.then(|| Array2::zeros((0, 0)))));
    }
    let mut a: Vec<C64> = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            a.push(m[[i, j]]);
        }
    }
    let ni = n as i32;
    let jobz = if vectors { b'V' } else { b'N' } as std::os::raw::c_char;
    let range = b'A' as std::os::raw::c_char;
    let uplo = b'L' as std::os::raw::c_char;
    let (vl, vu, il, iu, abstol) = (0.0f64, 0.0f64, 0i32, 0i32, 0.0f64);
    let mut found = 0i32;
    let mut w = vec![0.0f64; n];
    let mut z = vec![ZERO; if vectors { n * n } else { 1 }];
    let mut isuppz = vec![0i32; 2 * n];
    let mut info = 0i32;
    let mut call = |work: &mut [C64],
                    lwork: i32,
                    rwork: &mut [f64],
                    lrwork: i32,
                    iwork: &mut [i32],
                    liwork: i32,
                    info: &mut i32| {
        // SAFETY: every buffer is at least as large as LAPACK requires for
        // `n`, and `work` sizes come from the workspace query.
        unsafe {
            lapack_sys::zheevr_(
                &jobz,
                &range,
                &uplo,
                &ni,
                a.as_mut_ptr() as *mut _,
                &ni,
                &vl,
                &vu,
                &il,
                &iu,
                &abstol,
                &mut found,
                w.as_mut_ptr(),
                z.as_mut_ptr() as *mut _,
                &ni,
                isuppz.as_mut_ptr(),
                work.as_mut_ptr() as *mut _,
                &lwork,
                rwork.as_mut_ptr(),
                &lrwork,
                iwork.as_mut_ptr(),
                &liwork,
                info,
            );
        }
    };
    let (mut wq, mut rq, mut iq) = ([ZERO], [0.0f64], [0i32]);
    call(&mut wq, -1, &mut rq, -1, &mut iq, -1, &mut info);
    if info != 0 {
        return Err(Error::Linalg(format!("zheevr workspace query failed: {info}")));
    }
    let lwork = (wq[0].re as usize).max(2 * n);
    let lrwork = (rq[0] as usize).max(24 * n);
    let liwork = (iq[0].max(0) as usize).max(10 * n);
    let mut work = vec![ZERO; lwork];
    let mut rwork = vec![0.0f64; lrwork];
    let mut iwork = vec![0i32; liwork];
    call(&mut work, lwork as i32, &mut rwork, lrwork as i32, &mut iwork, liwork as i32, &mut info);
    if info != 0 || found as usize != n {
        return Err(Error::Linalg(format!("zheevr failed: info {info}, {found} of {n} eigenvalues")));
    }
    let q = if vectors {
        Some(Array2::from_shape_vec((n, n).f(), z).map_err(|e| Error::Linalg(e.to_string()))?)
    } else {
        None
    };
    Ok((w, q))
}

/// Hermitian eigendecomposition with ascending eigenvalues; exploits block
/// structure of the sparsity graph.
pub fn eigh(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    check_square(m)?;
    let n = m.nrows();
    let comps = coupling_components(&[m]);
    if comps.len() <= 1 {
        let (w, q) = zheevr(m.view(), true)?;
        return Ok((w, q.expect("vectors requested")));
    }
    let mut pairs: Vec<(f64, usize, usize, CVec)> = Vec::with_capacity(n);
    for (ci, idx) in comps.iter().enumerate() {
        let sub = submatrix(m, idx);
        let (w, q) = zheevr(sub.view(), true)?;
        let q = q.expect("vectors requested");
        for (k, lam) in w.into_iter().enumerate() {
            let mut v = CVec::zeros(n);
            for (a, &gi) in idx.iter().enumerate() {
                v[gi] = q[[a, k]];
            }
            pairs.push((lam, ci, k, v));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut q = CMat::zeros((n, n));
    let mut w = Vec::with_capacity(n);
    for (col, (lam, _, _, v)) in pairs.into_iter().enumerate() {
        w.push(lam);
        q.column_mut(col).assign(&v);
    }
    Ok((w, q))
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn eigvalsh(m: &CMat) -> Result<Vec<f64>> {
    check_square(m)?;
    let comps = coupling_components(&[m]);
    let mut all = Vec::with_capacity(m.nrows());
    if comps.len() <= 1 {
        all = zheevr(m.view(), false)?.0;
    } else {
        for idx in comps {
            all.extend(zheevr(submatrix(m, &idx).view(), false)?.0);
        }
    }
    all.sort_by(f64::total_cmp);
    Ok(all)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMat) -> Result<f64> {
    let comps = coupling_components(&[m]);
    let mut best = f64::INFINITY;
    for idx in comps {
        let w = if idx.len() == m.nrows() {
            zheevr(m.view(), false)?.0
        } else {
            zheevr(submatrix(m, &idx).view(), false)?.0
        };
        if let Some(&lo) = w.first() {
            best = best.min(lo);
        }
    }
    Ok(best)
}

/// Small dense Hermitian eigendecomposition through ndarray-linalg; used for
/// cross-checks in tests and tiny problems.
pub fn eigh_reference(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    let (w, q) = m.eigh(UPLO::Lower)?;
    Ok((w.to_vec(), q))
}

/// Eigenvalues of a general complex matrix (LAPACK `zgeev`).
pub fn eigvals_general(m: &CMat) -> Result<Vec<C64>> {
    use ndarray_linalg::EigVals;
    check_square(m)?;
    Ok(m.eigvals()?.to_vec())
}

/// Spectral norm, `sqrt(λ_max(M^H M))`.
pub fn op_norm(m: &CMat) -> Result<f64> {
    let g = adjoint(m).dot(m);
    let w = eigvalsh(&g)?;
    Ok(w.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}

pub fn solve(a: &CMat, b: &CVec) -> Result<CVec> {
    Ok(a.solve(b)?)
}

fn one_norm(m: &CMat) -> f64 {
    (0..m.ncols()).map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with a fixed degree-13 Padé
/// approximant.
pub fn expm(a: &CMat) -> Result<CMat> {
    check_square(a)?;
    let n = a.nrows();
    if n == 0 {
        return Ok(a.clone());
    }
    let norm = one_norm(a);
    let squarings = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let scaled = a.mapv(|z| z / 2f64.powi(squarings));
    let eye = CMat::eye(n);
    let a2 = scaled.dot(&scaled);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let b = PADE13;
    let lin = |c6: f64, c4: f64, c2: f64, c0: f64| -> CMat {
        a6.mapv(|z| z * c6) + a4.mapv(|z| z * c4) + a2.mapv(|z| z * c2) + eye.mapv(|z| z * c0)
    };
    let u_inner = a6.dot(&lin(b[13], b[11], b[9], 0.0)) + lin(b[7], b[5], b[3], b[1]);
    let u = scaled.dot(&u_inner);
    let v = a6.dot(&lin(b[12], b[10], b[8], 0.0)) + lin(b[6], b[4], b[2], b[0]);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = solve_matrix(&q, &p)?;
    for _ in 0..squarings {
        r = r.dot(&r);
    }
    Ok(r)
}

/// Solve `A X = B` column by column via a single LU factorisation.
pub fn solve_matrix(a: &CMat, b: &CMat) -> Result<CMat> {
    use ndarray_linalg::{Factorize, Solve as _};
    let lu = a.factorize()?;
    let mut x = CMat::zeros(b.dim());
    for j in 0..b.ncols() {
        let col = b.column(j).to_owned();
        let sol = lu.solve(&col)?;
        x.column_mut(j).assign(&sol);
    }
    Ok(x)
}

/// `e^{G} v` for a small-norm generator by a truncated Taylor series with
/// scaling; used where only the action on a few vectors is needed.
pub fn expm_apply(g: &CMat, v: &CVec) -> CVec {
    let norm = one_norm(g);
    let steps = (norm.ceil() as usize).max(1);
    let scale = 1.0 / steps as f64;
    let mut out = v.clone();
    for _ in 0..steps {
        let mut term = out.clone();
        let mut acc = out.clone();
        for k in 1..60 {
            term = g.dot(&term).mapv(|z| z * (scale / k as f64));
            let t = vec_norm(&term);
            acc += &term;
            if t <= 1e-17 * vec_norm(&acc) {
                break;
            }
        }
        out = acc;
    }
    out
}

/// `Q diag(d) Q^H`.
pub fn reconstruct(q: &CMat, d: &[C64]) -> CMat {
    let mut qd = q.clone();
    for (j, dj) in d.iter().enumerate() {
        qd.column_mut(j).mapv_inplace(|z| z * dj);
    }
    qd.dot(&adjoint(q))
}

/// Restrict `Q^H M Q` to a subset of columns of `Q`.
pub fn compress(q: &CMat, m: &CMat, cols: &[usize]) -> CMat {
    let qs = select_columns(q, cols);
    adjoint(&qs).dot(&m.dot(&qs))
}

pub fn select_columns(q: &CMat, cols: &[usize]) -> CMat {
    let mut out = CMat::zeros((q.nrows(), cols.len()));
    for (a, &c) in cols.iter().enumerate() {
        out.column_mut(a).assign(&q.column(c));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rand_herm(n: usize, seed: u64) -> CMat {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let a = CMat::from_shape_fn((n, n), |_| C64::new(next(), next()));
        &a + &adjoint(&a)
    }

    #[test]
    fn eigh_reconstructs() {
        let h = rand_herm(40, 3);
        let (w, q) = eigh(&h).unwrap();
        let d: Vec<C64> = w.iter().map(|&x| C64::new(x, 0.0)).collect();
        let r = reconstruct(&q, &d);
        assert!(max_abs(&(&r - &h)) < 1e-12);
        assert!(w.windows(2).all(|p| p[0] <= p[1]));
    }

    #[test]
    fn eigenvectors_unitary_with_clustered_spectrum() {
        let b = crate::basis::ModeBasis::square(10);
        let mut h = CMat::zeros((b.len(), b.len()));
        for i in 0..b.len() {
            let k = b.mode(i);
            h[[i, i]] = C64::new(k.norm_sqr() as f64, 0.0);
            for d in [crate::basis::Mode::new(0, 1), crate::basis::Mode::new(1, 1)] {
                if let Some(j) = b.index(k + d) {
                    h[[i, j]] = C64::new(0.25, 0.0);
                    h[[j, i]] = C64::new(0.25, 0.0);
                }
            }
        }
        let (_, q) = eigh(&h).unwrap();
        let d = adjoint(&q).dot(&q) - CMat::eye(b.len());
        assert!(max_abs(&d) < 1e-11);
    }

    #[test]
    fn block_path_matches_dense_path() {
        let mut h = CMat::zeros((6, 6));
        let a = rand_herm(3, 9);
        let b = rand_herm(3, 10);
        for i in 0..3 {
            for j in 0..3 {
                h[[2 * i, 2 * j]] = a[[i, j]];
                h[[2 * i + 1, 2 * j + 1]] = b[[i, j]];
            }
        }
        assert_eq!(coupling_components(&[&h]).len(), 2);
        let (w, _) = eigh(&h).unwrap();
        let (wr, _) = eigh_reference(&h).unwrap();
        for (x, y) in w.iter().zip(wr.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn expm_of_anti_hermitian_is_unitary() {
        let h = rand_herm(20, 5);
        let g = h.mapv(|z| z * C64::new(0.0, 3.0));
        let u = expm(&g).unwrap();
        let err = max_abs(&(adjoint(&u).dot(&u) - CMat::eye(20)));
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn expm_matches_eigen_route() {
        let h = rand_herm(12, 8);
        let (w, q) = eigh(&h).unwrap();
        let d: Vec<C64> = w.iter().map(|&x| C64::new(0.0, -x).exp()).collect();
        let want = reconstruct(&q, &d);
        let got = expm(&h.mapv(|z| z * C64::new(0.0, -1.0))).unwrap();
        assert!(max_abs(&(&got - &want)) < 1e-12);
    }

    #[test]
    fn expm_apply_matches_expm() {
        let h = rand_herm(10, 2);
        let g = h.mapv(|z| z * C64::new(0.0, 0.7));
        let v = CVec::from_shape_fn(10, |i| C64::new(i as f64, 1.0));
        let a = expm(&g).unwrap().dot(&v);
        let b = expm_apply(&g, &v);
        assert!(vec_norm(&(&a - &b)) < 1e-11);
    }
}
