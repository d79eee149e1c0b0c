//! Gauss-Legendre quadrature: fixed rules plus adaptive 1D/2D drivers.
//!
//! All integrands handled here are smooth on their panels, so a two-level
//! Gauss comparison is a reliable error estimate.

use std::sync::OnceLock;

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
///
/// Newton iteration on the Legendre recurrence; standard construction.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
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
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn cached_rule(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static RULES: OnceLock<Vec<(Vec<f64>, Vec<f64>)>> = OnceLock::new();
    let rules = RULES.get_or_init(|| {
        // index by log2(n / 8): 8, 16, 32, 64
        vec![
            gauss_legendre(8),
            gauss_legendre(16),
            gauss_legendre(32),
            gauss_legendre(64),
        ]
    });
    match n {
        8 => &rules[0],
        16 => &rules[1],
        32 => &rules[2],
        64 => &rules[3],
        _ => panic!("no cached rule of size {n}"),
    }
}

/// The cached 32-point rule, exposed for composite single-pass convolutions.
pub fn gauss_legendre_cached_32() -> (&'static [f64], &'static [f64]) {
    let (n, w) = cached_rule(32);
    (n, w)
}

/// Fixed n-point Gauss-Legendre integral over [a, b], n in {8, 16, 32, 64}.
pub fn fixed_gauss<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> f64 {
    let (nodes, weights) = cached_rule(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Adaptive 1D integral: bisects panels until the 16- vs 32-point estimates agree.
pub fn adaptive_1d<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, abs_tol: f64) -> f64 {
    fn recurse<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
        let coarse = fixed_gauss(&mut *f, a, b, 16);
        let fine = fixed_gauss(&mut *f, a, b, 32);
        if (fine - coarse).abs() <= tol || depth >= 48 {
            fine
        } else {
            let mid = 0.5 * (a + b);
            recurse(f, a, mid, 0.5 * tol, depth + 1) + recurse(f, mid, b, 0.5 * tol, depth + 1)
        }
    }
    if a == b {
        return 0.0;
    }
    recurse(f, a, b, abs_tol, 0)
}

/// Adaptive 1D integral split at the given interior breakpoints.
pub fn adaptive_1d_with_breaks<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    breaks: &[f64],
    abs_tol: f64,
) -> f64 {
    let mut pts: Vec<f64> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|&t| t > a && t < b))
        .chain(std::iter::once(b))
        .collect();
    pts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let panels = pts.len() - 1;
    let mut acc = 0.0;
    for w in pts.windows(2) {
        acc += adaptive_1d(f, w[0], w[1], abs_tol / panels as f64);
    }
    acc
}

/// Adaptive tensor-product integral over a rectangle.
///
/// Each cell is accepted when the 8x8 and 16x16 tensor estimates agree to the
/// cell's share of the tolerance; otherwise it is split in four.
pub fn adaptive_2d<F: Fn(f64, f64) -> f64>(
    f: &F,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    abs_tol: f64,
) -> f64 {
    fn tensor<F: Fn(f64, f64) -> f64>(f: &F, x0: f64, x1: f64, y0: f64, y1: f64, n: usize) -> f64 {
        let (nodes, weights) = cached_rule(n);
        let (mx, hx) = (0.5 * (x0 + x1), 0.5 * (x1 - x0));
        let (my, hy) = (0.5 * (y0 + y1), 0.5 * (y1 - y0));
        let mut acc = 0.0;
        for (xi, wx) in nodes.iter().zip(weights) {
            let x = mx + hx * xi;
            let mut row = 0.0;
            for (yi, wy) in nodes.iter().zip(weights) {
                row += wy * f(x, my + hy * yi);
            }
            acc += wx * row;
        }
        acc * hx * hy
    }
    fn recurse<F: Fn(f64, f64) -> f64>(
        f: &F,
        x0: f64,
        x1: f64,
        y0: f64,
        y1: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let coarse = tensor(f, x0, x1, y0, y1, 8);
        let fine = tensor(f, x0, x1, y0, y1, 16);
        if (fine - coarse).abs() <= tol || depth >= 24 {
            fine
        } else {
            let mx = 0.5 * (x0 + x1);
            let my = 0.5 * (y0 + y1);
            let t = 0.25 * tol;
            recurse(f, x0, mx, y0, my, t, depth + 1)
                + recurse(f, mx, x1, y0, my, t, depth + 1)
                + recurse(f, x0, mx, my, y1, t, depth + 1)
                + recurse(f, mx, x1, my, y1, t, depth + 1)
        }
    }
    if x0 == x1 || y0 == y1 {
        return 0.0;
    }
    recurse(f, x0, x1, y0, y1, abs_tol, 0)
}

/// Trapezoid rule for a 2*pi-periodic integrand (spectrally accurate).
pub fn periodic_trapezoid<F: FnMut(f64) -> f64>(mut f: F, n: usize) -> f64 {
    let h = 2.0 * std::f64::consts::PI / n as f64;
    (0..n).map(|k| f(k as f64 * h)).sum::<f64>() * h
}

/// Evenly spaced sample points including both endpoints.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gauss_nodes_integrate_polynomials_exactly() {
        // 16-point rule is exact through degree 31
        let int = fixed_gauss(|x| x.powi(10), 0.0, 1.0, 16);
        assert_abs_diff_eq!(int, 1.0 / 11.0, epsilon = 1e-14);
        let int = fixed_gauss(|x| 3.0 * x * x - x, -1.0, 2.0, 8);
        assert_abs_diff_eq!(int, (8.0 + 1.0) - (2.0 - 0.5), epsilon = 1e-13);
    }

    #[test]
    fn adaptive_1d_smooth() {
        let v = adaptive_1d(&mut |x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12);
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-11);
    }

    #[test]
    fn adaptive_2d_separable() {
        let v = adaptive_2d(&|x, y| x * y * y, 0.0, 1.0, 0.0, 2.0, 1e-12);
        assert_abs_diff_eq!(v, 0.5 * 8.0 / 3.0, epsilon = 1e-10);
    }

    #[test]
    fn trapezoid_periodic_exact_for_harmonics() {
        let v = periodic_trapezoid(|t| (3.0 * t).cos().powi(2), 64);
        assert_abs_diff_eq!(v, std::f64::consts::PI, epsilon = 1e-12);
    }
}
