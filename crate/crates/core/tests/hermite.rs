use magobs::quasimode::{build_wkb, residual_scan, HermiteVector, ModelCoefficient, QuasimodeParams};
use magobs::C64;
use proptest::prelude::*;

/// Physicists' Hermite polynomials H_0..H_n at u.
fn hermite_polys(n: usize, u: f64) -> Vec<f64> {
    let mut h = vec![1.0, 2.0 * u];
    for j in 1..n {
        h.push(2.0 * u * h[j] - 2.0 * j as f64 * h[j - 1]);
    }
    h.truncate(n + 1);
    h
}

fn norm_const(beta: f64, hbar: f64, j: usize) -> f64 {
    let fact: f64 = (1..=j).map(|i| i as f64).product();
    (beta / (std::f64::consts::PI * hbar)).powf(0.25) / (2f64.powi(j as i32) * fact).sqrt()
}

/// `φ_j(y)` and `φ_j'(y)` from the closed form `c_j H_j(u) e^{−u²/2}`, `u = √(β/ħ) y`.
fn oracle(beta: f64, hbar: f64, j: usize, y: f64) -> (f64, f64) {
    let s = (beta / hbar).sqrt();
    let u = s * y;
    let h = hermite_polys(j.max(1), u);
    let g = (-0.5 * u * u).exp();
    let c = norm_const(beta, hbar, j);
    let dh = if j == 0 { 0.0 } else { 2.0 * j as f64 * h[j - 1] };
    (c * h[j] * g, c * s * (dh - u * h[j]) * g)
}

fn oracle_eval(v: &HermiteVector, y: f64) -> (C64, C64) {
    let mut f = C64::new(0.0, 0.0);
    let mut df = C64::new(0.0, 0.0);
    for (j, c) in v.coeffs.iter().enumerate() {
        let (p, dp) = oracle(v.beta, v.hbar, j, y);
        f += c * p;
        df += c * dp;
    }
    (f, df)
}

fn sample_points(beta: f64, hbar: f64) -> Vec<f64> {
    let w = (hbar / beta).sqrt();
    (-40..=40).map(|i| 0.15 * i as f64 * w).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ladder_rules_match_closed_form(j in 0usize..=8, beta in 0.5f64..4.0, hi in 0usize..2) {
        let hbar = [0.1, 0.05][hi];
        let phi = HermiteVector::level(beta, hbar, j);
        let scale = (beta / hbar).powf(0.25);
        let ys = sample_points(beta, hbar);
        let y_phi = phi.mul_y();
        let d_phi = phi.d_dy();
        for &y in &ys {
            let (p, dp) = oracle(beta, hbar, j, y);
            prop_assert!((phi.eval(y) - p).norm() < 1e-9 * scale);
            prop_assert!((y_phi.eval(y) - y * p).norm() < 1e-9 * scale);
            prop_assert!((d_phi.eval(y) - dp).norm() < 1e-9 * scale * (beta / hbar).sqrt());
        }
    }

    #[test]
    fn l_inverse_undoes_l(c in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..10), beta in 0.5f64..3.0) {
        let mut coeffs: Vec<C64> = c.iter().map(|&(a, b)| C64::new(a, b)).collect();
        coeffs[0] = C64::new(0.0, 0.0);
        let v = HermiteVector::new(beta, 0.07, coeffs);
        let back = v.apply_l().apply_l_inverse().unwrap();
        for j in 0..v.coeffs.len() {
            prop_assert!((back.coeff(j) - v.coeff(j)).norm() < 1e-12);
        }
    }

    #[test]
    fn first_correction_has_no_even_levels(r3 in -1.0f64..1.0, s0 in -1.0f64..1.0, beta in 0.5f64..3.0) {
        let params = params_from(beta, [r3, 0.3], [s0, 0.2], 0.4);
        let sol = build_wkb(&params, 0.08).unwrap();
        prop_assert!(sol.v1.coeff(0).norm() == 0.0);
        prop_assert!(sol.v1.coeff(2).norm() < 1e-15);
        prop_assert!(sol.v1.top_level() <= 3);
        prop_assert!(sol.v2.top_level() <= 6);
        prop_assert!(sol.lambda0.im.abs() < 1e-12 * sol.lambda0.norm().max(1.0));
    }

    #[test]
    fn c0_matches_grid_projection(
        r3 in -1.0f64..1.0, r4 in -1.0f64..1.0, s0 in -1.0f64..1.0, s1 in -1.0f64..1.0,
        w0 in -1.0f64..1.0, beta in 0.5f64..3.0, hi in 0usize..2,
    ) {
        let hbar = [0.1, 0.05][hi];
        let params = params_from(beta, [r3, r4], [s0, s1], w0);
        let sol = build_wkb(&params, hbar).unwrap();
        let h2 = hbar * hbar;
        let i = C64::new(0.0, 1.0);
        // Second-order source assembled pointwise from closed-form values.
        let w = (hbar / beta).sqrt();
        let n = 4000;
        let (lo, hi_y) = (-14.0 * w, 14.0 * w);
        let dy = (hi_y - lo) / n as f64;
        let mut proj = C64::new(0.0, 0.0);
        for k in 0..=n {
            let y = lo + k as f64 * dy;
            let (v0, dv0) = oracle(beta, hbar, 0, y);
            let (v1, dv1) = oracle_eval(&sol.v1, y);
            let f2 = v1 * (2.0 * r3 * y.powi(3)) - i * (2.0 * s0 * h2) * dv1
                + C64::new(2.0 * r4 * y.powi(4) * v0, 0.0)
                - i * (2.0 * s1 * h2 * y * dv0)
                - i * (s1 * h2 * v0)
                - C64::new(w0 * h2 * v0, 0.0);
            let wt = if k == 0 || k == n { 0.5 } else { 1.0 };
            proj += f2 * (v0 * wt * dy);
        }
        let c0 = proj / h2;
        prop_assert!((c0 - sol.c0).norm() < 1e-9 * c0.norm().max(1.0), "{} vs {}", c0, sol.c0);
    }
}

fn params_from(beta: f64, a1: [f64; 2], a2: [f64; 2], w0: f64) -> QuasimodeParams {
    let poly = |coeffs: Vec<f64>| ModelCoefficient::Polynomial { coeffs };
    QuasimodeParams::from_model(
        poly(vec![0.0, 0.0, -0.5 * beta * beta, a1[0], a1[1]]),
        poly(vec![a2[0], a2[1]]),
        poly(vec![w0]),
        1.0,
    )
    .unwrap()
}

#[test]
fn pure_oscillator_is_exact() {
    let params = QuasimodeParams::harmonic(4.0, 1.5).unwrap();
    let scan = residual_scan(&params, &[0.1, 0.08, 0.06, 0.05], 4096).unwrap();
    for r in &scan.records {
        assert!(r.residual_l2 < 1e-12, "hbar {}: residual {:e}", r.hbar, r.residual_l2);
        assert!(r.lambda0.norm() < 1e-15);
    }
}

#[test]
fn cos_model_constants() {
    // A1 = cos y at y = 0: beta = 1, r3 = 0, r4 = 1/24; A2 = W = 0.
    // c0 = 2 r4 <y^4 phi0, phi0> / hbar^2 = 2 (1/24) (3/4) = 1/16.
    let poly = |coeffs: Vec<f64>| ModelCoefficient::Polynomial { coeffs };
    let params =
        QuasimodeParams::from_model(poly(vec![1.0, 0.0, -0.5, 0.0, 1.0 / 24.0]), poly(vec![]), poly(vec![]), 1.0)
            .unwrap();
    let sol = build_wkb(&params, 0.1).unwrap();
    assert!((sol.c0 - C64::new(1.0 / 16.0, 0.0)).norm() < 1e-14);
    assert!((sol.lambda0 + C64::new(1.0 / 16.0, 0.0)).norm() < 1e-14);
}
