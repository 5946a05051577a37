//! Smooth compactly supported cutoff profiles.

/// `exp(-1/t)` for `t > 0`, zero otherwise.
fn flat(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// C^∞ step rising from 0 at `t ≤ 0` to 1 at `t ≥ 1`.
pub fn smooth_step(t: f64) -> f64 {
    let a = flat(t);
    let b = flat(1.0 - t);
    if a + b == 0.0 {
        return if t >= 1.0 { 1.0 } else { 0.0 };
    }
    a / (a + b)
}

/// `exp(-1/t)` and its first two derivatives.
fn flat3(t: f64) -> [f64; 3] {
    let f = flat(t);
    if f == 0.0 {
        return [0.0; 3];
    }
    let (t2, t3) = (t * t, t * t * t);
    [f, f / t2, f * (1.0 / (t2 * t2) - 2.0 / t3)]
}

/// [`smooth_step`] with its first and second derivatives.
pub fn smooth_step_derivatives(t: f64) -> [f64; 3] {
    let [f, df, d2f] = flat3(t);
    let [g, mg1, g2] = flat3(1.0 - t);
    let dg = -mg1;
    let d = f + g;
    if d == 0.0 {
        return [smooth_step(t), 0.0, 0.0];
    }
    let n = df * g - f * dg;
    let dn = d2f * g - f * g2;
    let dd = df + dg;
    [f / d, n / (d * d), (dn * d - 2.0 * n * dd) / (d * d * d)]
}

/// Even C^∞ cutoff equal to 1 on `|t| ≤ inner` and 0 on `|t| ≥ outer`.
pub fn plateau(t: f64, inner: f64, outer: f64) -> f64 {
    debug_assert!(outer > inner && inner >= 0.0);
    1.0 - smooth_step((t.abs() - inner) / (outer - inner))
}

/// `ψ(ξ)`: supported on `|ξ ± 1| ≤ 1/8`, identically 1 on `|ξ ± 1| ≤ 1/16`.
pub fn psi(xi: f64) -> f64 {
    let d = (xi - 1.0).abs().min((xi + 1.0).abs());
    plateau(d, 1.0 / 16.0, 1.0 / 8.0)
}

/// `ϑ(η)`: supported on `|η| ≤ 2`, identically 1 on `|η| ≤ 1`.
pub fn vartheta(eta: f64) -> f64 {
    plateau(eta, 1.0, 2.0)
}

/// Spectral window profile `χ`: supported in `(-1, 1)`, identically 1 on
/// `|t| ≤ 1/2`.
pub fn chi(t: f64) -> f64 {
    plateau(t, 0.5, 1.0)
}

/// Quasimode cutoff: 1 on `|y| ≤ b`, supported in `|y| < min(2b, π - 0.1)`.
pub fn quasimode_cutoff(y: f64, b: f64) -> f64 {
    let outer = (2.0 * b).min(std::f64::consts::PI - 0.1);
    plateau(y, b.min(outer * 0.999), outer)
}

/// [`quasimode_cutoff`] with its first and second derivatives in `y`.
pub fn quasimode_cutoff_derivatives(y: f64, b: f64) -> [f64; 3] {
    let outer = (2.0 * b).min(std::f64::consts::PI - 0.1);
    let inner = b.min(outer * 0.999);
    let w = outer - inner;
    let [s, ds, d2s] = smooth_step_derivatives((y.abs() - inner) / w);
    [1.0 - s, -ds * y.signum() / w, -d2s / (w * w)]
}
