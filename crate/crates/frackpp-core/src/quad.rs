//! Gauss-Legendre quadrature helpers shared by the kernel and operator modules.

use std::sync::OnceLock;

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
///
/// Computed by Newton iteration on the Legendre recurrence, so there are no
/// transcribed constants to get wrong.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n.div_ceil(2) {
        // Tricomi initial guess for the k-th positive root.
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[k] = -x;
        nodes[n - 1 - k] = x;
        weights[k] = w;
        weights[n - 1 - k] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_with_derivative(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    // derivative from P_n and P_{n-1}
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

fn gl4() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(4))
}

/// 16-point Gauss-Legendre integral of `f` over [a, b].
pub fn integrate_gl16<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = gl16();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// 4-point Gauss-Legendre integral of `f` over [a, b].
pub fn integrate_gl4<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = gl4();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Integral of `f` over [a, b] on geometrically growing panels.
///
/// Panel widths start at `first_width` and grow by `growth` up to `max_width`.
/// Suited to smooth integrands that decay over many orders of magnitude.
pub fn integrate_geometric<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    first_width: f64,
    growth: f64,
    max_width: f64,
) -> f64 {
    assert!(b >= a && first_width > 0.0 && growth >= 1.0);
    let mut acc = 0.0;
    let mut lo = a;
    let mut w = first_width;
    while lo < b {
        let hi = (lo + w).min(b);
        acc += integrate_gl16(&mut f, lo, hi);
        lo = hi;
        w = (w * growth).min(max_width);
    }
    acc
}
