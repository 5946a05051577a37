use std::f64::consts::PI;

use magobs::fields::{a_gamma, critical_points, directional_average, magnetic_field, DEGENERACY_TOL};
use magobs::geometry::{directions_in_band, mgcc_check, project_region, Verdict};
use magobs::linalg::{self, CMat};
use magobs::obs::{self, region_mass_matrix, resolvent_scan, MassMatrix};
use magobs::quasimode::mass_ratio;
use magobs::spectral::{self, propagate, resolved_threshold};
use magobs::weyl::{self, Symbol, ZetaPoly};
use magobs::{
    CircleFunction, CriticalSet, Direction, FourierField2D, ModeBasis, ModeVector, Region, VectorPotential, C64,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn potential(seed: u64, k: i32, amp: f64) -> VectorPotential {
    VectorPotential::random(k, amp, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn field(seed: u64, k: i32, amp: f64) -> FourierField2D {
    FourierField2D::random_real(k, amp, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn state(seed: u64, basis: ModeBasis) -> ModeVector {
    let f = FourierField2D::random_real(basis.half_width(), 1.0, &mut ChaCha8Rng::seed_from_u64(seed));
    ModeVector::from_fn(basis, |k| f.coeff(k)).normalized()
}

fn rect() -> impl Strategy<Value = [f64; 4]> {
    (0.0f64..6.0, 0.1f64..3.0, 0.0f64..6.0, 0.1f64..3.0)
        .prop_map(|(x, w, y, h)| [x, (x + w).min(2.0 * PI), y, (y + h).min(2.0 * PI)])
}

fn min_eig(m: &CMat) -> f64 {
    linalg::min_eigenvalue(m).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn real_fields_are_hermitian_symmetric(seed in any::<u64>(), k in 1i32..4) {
        let f = field(seed, k, 1.0);
        for (m, c) in f.iter() {
            prop_assert_eq!(f.coeff(-m), c.conj());
        }
        prop_assert!(f.bandwidth() <= k);
    }

    #[test]
    fn directional_average_keeps_transverse_modes(seed in any::<u64>(), p in 0i64..4, q in -3i64..4) {
        prop_assume!(Direction::new(p, q).is_ok());
        let d = Direction::new(p, q).unwrap();
        let f = field(seed, 4, 1.0);
        let avg = directional_average(&f, d);
        for (k, c) in avg.iter() {
            prop_assert_eq!(k.k1 as i64 * p + k.k2 as i64 * q, 0);
            prop_assert_eq!(c, f.coeff(k));
        }
        prop_assert_eq!(directional_average(&avg, d), avg.clone());
        // Constant along the direction.
        let (x, y) = (0.37, 1.21);
        let n = d.norm();
        for t in [0.5, 1.7, 4.0] {
            let shifted = avg.eval(x + t * p as f64 / n, y + t * q as f64 / n);
            prop_assert!((shifted - avg.eval(x, y)).norm() < 1e-12);
        }
    }

    #[test]
    fn a_gamma_is_gauge_invariant(seed in any::<u64>(), p in 0i64..4, q in -3i64..4) {
        prop_assume!(Direction::new(p, q).is_ok());
        let d = Direction::new(p, q).unwrap();
        let a = potential(seed, 3, 1.0);
        let g = field(seed ^ 1, 3, 1.0);
        let diff = a_gamma(&a, d).max_coeff_diff(&a_gamma(&a.add_gradient(&g), d));
        prop_assert!(diff < 1e-14);
        prop_assert!(magnetic_field(&a.add_gradient(&g)).sub(&magnetic_field(&a)).iter().all(|(_, c)| c.norm() < 1e-14));
    }

    #[test]
    fn critical_points_have_vanishing_derivative(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cos: Vec<(i32, f64)> = (1..=4).map(|m| (m, rng.random_range(-1.0..1.0))).collect();
        let sin: Vec<(i32, f64)> = (1..=4).map(|m| (m, rng.random_range(-1.0..1.0))).collect();
        let c = CircleFunction::from_trig(2.0 * PI, 0.0, &cos, &sin);
        let scale: f64 = c.iter().map(|(m, z)| (m as f64).abs() * z.norm()).sum();
        match critical_points(&c, DEGENERACY_TOL).unwrap() {
            CriticalSet::AllCritical => prop_assert!(c.is_constant()),
            CriticalSet::Points(pts) => {
                prop_assert!(pts.len() >= 2);
                for pt in pts {
                    prop_assert!(pt.s >= 0.0 && pt.s < c.ell());
                    prop_assert!(c.eval_derivative(pt.s, 1).norm() < 1e-10 * scale.max(1.0));
                }
            }
        }
    }

    #[test]
    fn projections_are_normalised(rects in prop::collection::vec(rect(), 1..4), p in 0i64..4, q in -3i64..4) {
        prop_assume!(Direction::new(p, q).is_ok());
        let region = Region::new(rects).unwrap();
        let arcs = project_region(&region, Direction::new(p, q).unwrap());
        prop_assert!(arcs.total_length() <= arcs.ell() + 1e-12);
        for w in arcs.arcs().windows(2) {
            prop_assert!(w[0].1 < w[1].0);
        }
        prop_assert!(region.area() > 0.0 && region.area() <= 4.0 * PI * PI + 1e-12);
    }

    #[test]
    fn mgcc_overall_is_conjunction(seed in any::<u64>(), rects in prop::collection::vec(rect(), 1..3)) {
        let region = Region::new(rects).unwrap();
        let report = mgcc_check(&potential(seed, 2, 1.0), &region, 1e-8, false).unwrap();
        let all = report.directions.iter().all(|r| r.covered());
        prop_assert_eq!(report.overall == Verdict::Satisfied, all);
    }

    #[test]
    fn mass_matrix_is_a_contraction(rects in prop::collection::vec(rect(), 1..4)) {
        let region = Region::new(rects).unwrap();
        let basis = ModeBasis::square(4);
        let m = region_mass_matrix(&region, &basis).matrix;
        prop_assert!(linalg::hermitian_defect(&m) < 1e-14);
        let ev = linalg::eigvalsh(&m).unwrap();
        prop_assert!(ev[0] > -1e-10 && ev[ev.len() - 1] < 1.0 + 1e-10);
        let frac = region.area() / (4.0 * PI * PI);
        for i in 0..basis.len() {
            prop_assert!((m[[i, i]].re - frac).abs() < 1e-12);
        }
    }

    #[test]
    fn operator_is_hermitian(seed in any::<u64>(), n in 4u32..8) {
        let basis = ModeBasis::square(n);
        let h = spectral::assemble(&potential(seed, 1, 1.0), &field(seed ^ 7, 1, 1.0), &basis).unwrap();
        prop_assert!(h.hermitian_defect() < 1e-12);
        for i in 0..basis.len() {
            prop_assert_eq!(h.entries[[i, i]].im, 0.0);
        }
    }

    #[test]
    fn eigendecomposition_invariants(seed in any::<u64>()) {
        let basis = ModeBasis::square(6);
        let h = spectral::assemble(&potential(seed, 1, 1.0), &field(seed ^ 3, 1, 0.5), &basis).unwrap();
        let eig = spectral::eigendecompose(&h).unwrap();
        let q = &eig.vectors;
        let lam = CMat::from_diag(&eig.values.iter().map(|&l| C64::new(l, 0.0)).collect::<ndarray::Array1<_>>());
        let res = linalg::frobenius(&(h.entries.dot(q) - q.dot(&lam)));
        prop_assert!(res < 1e-9 * linalg::frobenius(&h.entries));
        let id = linalg::adjoint(q).dot(q) - CMat::eye(basis.len());
        prop_assert!(linalg::max_abs(&id) < 1e-10);
        prop_assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn propagation_is_unitary(seed in any::<u64>(), t in -3.0f64..3.0) {
        let basis = ModeBasis::square(5);
        let eig = spectral::eigendecompose(&spectral::assemble(&potential(seed, 1, 1.0), &FourierField2D::zero(), &basis).unwrap()).unwrap();
        let u = state(seed, basis);
        let v = propagate(&eig, &u, t).unwrap();
        prop_assert!((v.norm() - 1.0).abs() < 1e-12);
        let back = propagate(&eig, &v, -t).unwrap();
        prop_assert!(linalg::vec_norm(&(&back.coeffs - &u.coeffs)) < 1e-12);
    }

    #[test]
    fn gramian_monotone_in_time_and_region(seed in any::<u64>(), t1 in 0.1f64..1.0, dt in 0.1f64..1.0) {
        let basis = ModeBasis::square(4);
        let eig = spectral::eigendecompose(&spectral::assemble(&potential(seed, 1, 1.0), &FourierField2D::zero(), &basis).unwrap()).unwrap();
        let small = Region::horizontal_strips(&[(0.5, 1.5)]).unwrap();
        let big = Region::horizontal_strips(&[(0.2, 2.0)]).unwrap();
        let ms = region_mass_matrix(&small, &basis);
        let mb = region_mass_matrix(&big, &basis);
        let g1 = obs::gramian(&eig, &ms, t1).unwrap();
        let g2 = obs::gramian(&eig, &ms, t1 + dt).unwrap();
        let gb = obs::gramian(&eig, &mb, t1).unwrap();
        prop_assert!(min_eig(&g1) > -1e-10);
        prop_assert!(min_eig(&(&g2 - &g1)) > -1e-10);
        prop_assert!(min_eig(&(&gb - &g1)) > -1e-10);
    }

    #[test]
    fn gramian_is_additive_over_time(seed in any::<u64>(), t1 in 0.1f64..1.0, t2 in 0.1f64..1.0) {
        let basis = ModeBasis::square(4);
        let eig = spectral::eigendecompose(&spectral::assemble(&potential(seed, 1, 1.0), &FourierField2D::zero(), &basis).unwrap()).unwrap();
        let m = region_mass_matrix(&Region::horizontal_strips(&[(0.5, 1.5)]).unwrap(), &basis);
        let whole = obs::gramian(&eig, &m, t1 + t2).unwrap();
        let first = obs::gramian(&eig, &m, t1).unwrap();
        let second = obs::gramian(&eig, &m, t2).unwrap();
        let u = eig.function(|l| C64::from_polar(1.0, l * t1));
        let shifted = u.dot(&second).dot(&linalg::adjoint(&u));
        prop_assert!(linalg::max_abs(&(&whole - &(&first + &shifted))) < 1e-10);
    }

    #[test]
    fn full_torus_witness_ratio_is_t(seed in any::<u64>(), t in 0.2f64..3.0) {
        let basis = ModeBasis::square(4);
        let eig = spectral::eigendecompose(&spectral::assemble(&potential(seed, 1, 1.0), &FourierField2D::zero(), &basis).unwrap()).unwrap();
        let u = state(seed, basis).coeffs.mapv(|z| z * 3.0);
        let full = region_mass_matrix(&Region::full(), &basis);
        prop_assert!((mass_ratio(&eig, &full, &u, t) - t).abs() < 1e-12 * t);
    }

    #[test]
    fn weyl_transport_identity(seed in any::<u64>(), h in 0.01f64..0.5, which in 0usize..4) {
        let basis = ModeBasis::square(6);
        let p = [ZetaPoly::xi_sq(), ZetaPoly::eta_sq(), ZetaPoly::zeta_sq(), ZetaPoly::xi()][which].clone();
        let a = Symbol::product(&field(seed, 2, 1.0), &ZetaPoly::new(&[(0, 0, 0.5), (1, 0, -0.3), (0, 2, 0.2)]));
        let op_a = weyl::quantize(&a, h, &basis).unwrap();
        let op_p = weyl::quantize(&Symbol::polynomial(&p), h, &basis).unwrap();
        let lhs = weyl::commutator(&op_a, &op_p).unwrap();
        let rhs = weyl::quantize(&a.transport(&p), h, &basis).unwrap().mapv(|z| z * C64::new(0.0, h));
        prop_assert!(linalg::max_abs(&(lhs - rhs)) < 1e-12);
    }

    #[test]
    fn real_symbols_quantize_to_hermitian(seed in any::<u64>(), h in 0.01f64..0.5) {
        let basis = ModeBasis::square(5);
        let a = Symbol::product(&field(seed, 2, 1.0), &ZetaPoly::zeta_sq());
        let m = weyl::quantize(&a, h, &basis).unwrap();
        prop_assert!(linalg::hermitian_defect(&m) < 1e-12 * linalg::max_abs(&m).max(1.0));
        let w = weyl::wigner_eval(&state(seed ^ 5, basis), &a, h, "a").unwrap();
        prop_assert!(w.value.im.abs() < 1e-12 * w.value.norm().max(1.0));
    }
}

#[test]
fn gauge_invariance_of_low_spectrum() {
    let basis = ModeBasis::square(14);
    let a = potential(21, 1, 0.8);
    let v = field(22, 1, 0.3);
    let g = field(23, 1, 0.2);
    let e0 = spectral::eigendecompose(&spectral::assemble(&a, &v, &basis).unwrap()).unwrap();
    let e1 = spectral::eigendecompose(&spectral::assemble(&a.add_gradient(&g), &v, &basis).unwrap()).unwrap();
    let cut = resolved_threshold(14, 2);
    for (x, y) in e0.values.iter().zip(&e1.values).take_while(|(x, _)| **x < cut) {
        assert!((x - y).abs() < 1e-6, "{x} vs {y}");
    }
}

#[test]
fn oblique_directions_of_y_only_potential() {
    let a = VectorPotential::new(FourierField2D::cos(magobs::Mode::new(0, 1), 1.0), FourierField2D::zero()).unwrap();
    for d in directions_in_band(0, 5).into_iter().filter(|d| d.q() != 0) {
        assert!(a_gamma(&a, d).iter().all(|(_, c)| c == C64::new(0.0, 0.0)));
    }
}

#[test]
fn full_torus_resolvent_constant_at_most_one() {
    let basis = ModeBasis::square(6);
    let eig =
        spectral::eigendecompose(&spectral::assemble(&potential(4, 1, 1.0), &FourierField2D::zero(), &basis).unwrap())
            .unwrap();
    let lambdas: Vec<f64> = (-20..=20).map(|i| 5.0 * i as f64).collect();
    let scan = resolvent_scan(&eig, &MassMatrix::identity(basis), &lambdas).unwrap();
    assert!(scan.constants.iter().all(|&c| c > 0.0 && c <= 1.0 + 1e-12));
}

#[test]
fn resolvent_constant_at_negated_eigenvalue() {
    let basis = ModeBasis::square(6);
    let eig =
        spectral::eigendecompose(&spectral::assemble(&potential(9, 1, 1.0), &FourierField2D::zero(), &basis).unwrap())
            .unwrap();
    let mass = region_mass_matrix(&Region::horizontal_strips(&[(0.3, 1.6)]).unwrap(), &basis);
    for j in [0, 5, 20] {
        let u = eig.eigenvector(j);
        let c = resolvent_scan(&eig, &mass, &[-eig.values[j]]).unwrap().constants[0];
        assert!(c >= 1.0 / mass.mass(&u).sqrt() - 1e-9);
    }
}

#[test]
fn hum_on_full_torus_is_exact() {
    let basis = ModeBasis::square(4);
    let eig =
        spectral::eigendecompose(&spectral::assemble(&potential(2, 1, 1.0), &FourierField2D::zero(), &basis).unwrap())
            .unwrap();
    let psi0 = state(1, basis).coeffs;
    let psi1 = state(2, basis).coeffs;
    let hum = obs::hum_control(&eig, &MassMatrix::identity(basis), 1.0, &psi0, &psi1, 0.0, 5).unwrap();
    assert!(hum.error < 1e-10);
    // Free evolution already reaching the target needs no control.
    let target = propagate(&eig, &state(1, basis), 1.0).unwrap().coeffs;
    let free = obs::hum_control(&eig, &MassMatrix::identity(basis), 1.0, &psi0, &target, 0.0, 5).unwrap();
    assert!(free.error < 1e-12);
    assert!(free.samples.iter().all(|(_, c)| linalg::vec_norm(c) < 1e-12));
}
