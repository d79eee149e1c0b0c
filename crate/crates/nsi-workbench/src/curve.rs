//! One-dimensional smooth profiles as closed-form expression objects.
//!
//! Every curve carries analytic derivatives up to order 3 (a [`Jet1`]).
//! Finite differences are used only as a cross-check oracle in tests, never
//! as the primary evaluator: the inequality certifications need exact-form
//! derivatives near support edges where differencing degrades.

use crate::error::{Error, Result};
use crate::quad;
use std::sync::{Arc, OnceLock};

/// Value and first three derivatives of a scalar function at a point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet1 {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl Jet1 {
    pub const ZERO: Jet1 = Jet1 { v: 0.0, d1: 0.0, d2: 0.0, d3: 0.0 };

    pub fn constant(v: f64) -> Jet1 {
        Jet1 { v, ..Jet1::ZERO }
    }

    /// Jet of the identity x at the point x.
    pub fn variable(x: f64) -> Jet1 {
        Jet1 { v: x, d1: 1.0, d2: 0.0, d3: 0.0 }
    }

    pub fn add(self, o: Jet1) -> Jet1 {
        Jet1 { v: self.v + o.v, d1: self.d1 + o.d1, d2: self.d2 + o.d2, d3: self.d3 + o.d3 }
    }

    pub fn sub(self, o: Jet1) -> Jet1 {
        Jet1 { v: self.v - o.v, d1: self.d1 - o.d1, d2: self.d2 - o.d2, d3: self.d3 - o.d3 }
    }

    pub fn scale(self, c: f64) -> Jet1 {
        Jet1 { v: c * self.v, d1: c * self.d1, d2: c * self.d2, d3: c * self.d3 }
    }

    pub fn mul(self, o: Jet1) -> Jet1 {
        Jet1 {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
            d3: self.d3 * o.v + 3.0 * self.d2 * o.d1 + 3.0 * self.d1 * o.d2 + self.v * o.d3,
        }
    }

    pub fn recip(self) -> Jet1 {
        let g = self.v;
        let (g1, g2, g3) = (self.d1, self.d2, self.d3);
        let inv = 1.0 / g;
        Jet1 {
            v: inv,
            d1: -g1 * inv * inv,
            d2: (2.0 * g1 * g1 - g * g2) * inv.powi(3),
            d3: (6.0 * g * g1 * g2 - g * g * g3 - 6.0 * g1.powi(3)) * inv.powi(4),
        }
    }

    pub fn div(self, o: Jet1) -> Jet1 {
        self.mul(o.recip())
    }

    pub fn exp(self) -> Jet1 {
        let e = self.v.exp();
        let (f1, f2, f3) = (self.d1, self.d2, self.d3);
        Jet1 {
            v: e,
            d1: e * f1,
            d2: e * (f2 + f1 * f1),
            d3: e * (f3 + 3.0 * f1 * f2 + f1.powi(3)),
        }
    }

    /// f^p for f > 0.
    pub fn powf(self, p: f64) -> Jet1 {
        let f = self.v;
        let (f1, f2, f3) = (self.d1, self.d2, self.d3);
        let vp = f.powf(p);
        let vp1 = p * f.powf(p - 1.0);
        let vp2 = p * (p - 1.0) * f.powf(p - 2.0);
        let vp3 = p * (p - 1.0) * (p - 2.0) * f.powf(p - 3.0);
        Jet1 {
            v: vp,
            d1: vp1 * f1,
            d2: vp2 * f1 * f1 + vp1 * f2,
            d3: vp3 * f1.powi(3) + 3.0 * vp2 * f1 * f2 + vp1 * f3,
        }
    }

    pub fn sqrt(self) -> Jet1 {
        self.powf(0.5)
    }

    /// Faa di Bruno to order 3: jet of outer(inner(x)) given outer's jet at inner.v.
    pub fn compose(outer: Jet1, inner: Jet1) -> Jet1 {
        Jet1 {
            v: outer.v,
            d1: outer.d1 * inner.d1,
            d2: outer.d2 * inner.d1 * inner.d1 + outer.d1 * inner.d2,
            d3: outer.d3 * inner.d1.powi(3)
                + 3.0 * outer.d2 * inner.d1 * inner.d2
                + outer.d1 * inner.d3,
        }
    }
}

/// Logarithmic jet: ln g together with the ratios g'/g, g''/g, g'''/g.
///
/// Stable representation of the cutoff profile deep in its tail, where the
/// plain value underflows f64 but sign questions about L f remain well-posed.
#[derive(Clone, Copy, Debug)]
pub struct LogJet {
    pub ln_v: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

impl LogJet {
    pub const ONE: LogJet = LogJet { ln_v: 0.0, r1: 0.0, r2: 0.0, r3: 0.0 };

    /// Log jet of g(c*x + b) from the log jet of g at the mapped point.
    pub fn affine_arg(self, c: f64) -> LogJet {
        LogJet { ln_v: self.ln_v, r1: self.r1 * c, r2: self.r2 * c * c, r3: self.r3 * c * c * c }
    }

    /// Log jet of a product u*v from the factors' log jets.
    pub fn product(self, o: LogJet) -> LogJet {
        LogJet {
            ln_v: self.ln_v + o.ln_v,
            r1: self.r1 + o.r1,
            r2: self.r2 + 2.0 * self.r1 * o.r1 + o.r2,
            r3: self.r3 + 3.0 * self.r2 * o.r1 + 3.0 * self.r1 * o.r2 + o.r3,
        }
    }

    pub fn from_jet(j: Jet1) -> LogJet {
        LogJet { ln_v: j.v.ln(), r1: j.d1 / j.v, r2: j.d2 / j.v, r3: j.d3 / j.v }
    }
}

// ---------------------------------------------------------------------------
// The bump profile h.
// ---------------------------------------------------------------------------

/// Shape exponent of the blend on [1/2, 1]; see `bump_h_jet`. The cubic
/// argument delays the blend's inflection to ~0.91, which widens the band
/// where the cutoff's edge terms stay convex.
const BLEND_POW: i32 = 3;

fn smooth_step_s(t: Jet1) -> Jet1 {
    // S(t) = exp(-1/t) for t > 0, else 0.
    if t.v <= 0.0 {
        Jet1::ZERO
    } else {
        t.recip().scale(-1.0).exp()
    }
}

/// The partition step psi(t) = S(t)/(S(t)+S(1-t)); 0 at 0 and 1 at 1, flat to
/// all orders at both ends.
fn partition_step(t: Jet1) -> Jet1 {
    if t.v <= 0.0 {
        return Jet1::ZERO;
    }
    if t.v >= 1.0 {
        return Jet1::constant(1.0);
    }
    let s = smooth_step_s(t);
    let s_mirror = smooth_step_s(Jet1::constant(1.0).sub(t));
    s.div(s.add(s_mirror))
}

fn exp_inv_sq(x: Jet1) -> Jet1 {
    // exp(-1/x^2) for x > 0
    let x2 = x.mul(x);
    x2.recip().scale(-1.0).exp()
}

/// Jet of the bump profile h:
/// 0 for x <= 0, exp(-1/x^2) on (0, 1/2), a monotone blend on [1/2, 1), and 1
/// for x >= 1. The blend is e + (1 - e) * psi(((x - 1/2) * 2)^BLEND_POW) with
/// e = exp(-1/x^2); both summands are nondecreasing, and the junctions match
/// to all orders.
pub fn bump_h_jet(x: f64) -> Jet1 {
    if x <= 0.0 {
        Jet1::ZERO
    } else if x < 0.5 {
        exp_inv_sq(Jet1::variable(x))
    } else if x < 1.0 {
        let xv = Jet1::variable(x);
        let e = exp_inv_sq(xv);
        let t = Jet1 { v: (x - 0.5) * 2.0, d1: 2.0, d2: 0.0, d3: 0.0 };
        let mut tp = t;
        for _ in 1..BLEND_POW {
            tp = tp.mul(t);
        }
        let psi = partition_step(tp);
        e.add(Jet1::constant(1.0).sub(e).mul(psi))
    } else {
        Jet1::constant(1.0)
    }
}

pub fn bump_h(x: f64) -> f64 {
    bump_h_jet(x).v
}

/// Log jet of h. In the pure tail branch the ratios are explicit rationals,
/// exact regardless of how far the value has underflowed.
pub fn bump_h_log_jet(x: f64) -> LogJet {
    if x <= 0.0 {
        LogJet { ln_v: f64::NEG_INFINITY, r1: 0.0, r2: 0.0, r3: 0.0 }
    } else if x < 0.5 {
        let x2 = x * x;
        LogJet {
            ln_v: -1.0 / x2,
            r1: 2.0 / (x2 * x),
            r2: (4.0 - 6.0 * x2) / x2.powi(3),
            r3: (24.0 * x2 * x2 - 36.0 * x2 + 8.0) / (x2.powi(4) * x),
        }
    } else if x < 1.0 {
        LogJet::from_jet(bump_h_jet(x))
    } else {
        LogJet::ONE
    }
}

// ---------------------------------------------------------------------------
// Mollification kernel.
// ---------------------------------------------------------------------------

/// Jet of the normalized 1D mollifier kernel N*exp(-1/(1-u^2)) on (-1, 1).
pub fn mollifier_kernel_jet(u: f64) -> Jet1 {
    if u.abs() >= 1.0 - 1e-12 {
        return Jet1::ZERO;
    }
    let uu = Jet1::variable(u);
    let z = Jet1::constant(1.0).sub(uu.mul(uu));
    z.recip().scale(-1.0).exp().scale(mollifier_norm())
}

/// 1 / integral of exp(-1/(1-u^2)) over (-1, 1).
pub fn mollifier_norm() -> f64 {
    static NORM: OnceLock<f64> = OnceLock::new();
    *NORM.get_or_init(|| {
        let mass = quad::adaptive_1d(
            &mut |u: f64| {
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    (-1.0 / (1.0 - u * u)).exp()
                }
            },
            -1.0,
            1.0,
            1e-15,
        );
        1.0 / mass
    })
}

// ---------------------------------------------------------------------------
// Piecewise polynomials.
// ---------------------------------------------------------------------------

/// Piecewise polynomial on [breaks[0], breaks[last]], extended by its end
/// values outside. Segment i applies on [breaks[i], breaks[i+1]).
#[derive(Clone, Debug)]
pub struct PiecewisePoly {
    pub breaks: Vec<f64>,
    pub segs: Vec<Vec<f64>>,
}

impl PiecewisePoly {
    pub fn new(breaks: Vec<f64>, segs: Vec<Vec<f64>>) -> Result<Self> {
        if breaks.len() != segs.len() + 1 || segs.is_empty() {
            return Err(Error::DegenerateInput(
                "piecewise polynomial needs n+1 breakpoints for n segments".into(),
            ));
        }
        if breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::DegenerateInput("breakpoints must increase strictly".into()));
        }
        Ok(PiecewisePoly { breaks, segs })
    }

    pub fn constant(lo: f64, hi: f64, c: f64) -> Self {
        PiecewisePoly { breaks: vec![lo, hi], segs: vec![vec![c]] }
    }

    /// Piecewise-linear interpolant of the given (t, value) samples.
    pub fn linear_interpolant(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::DegenerateInput("need at least two samples".into()));
        }
        let mut breaks = Vec::with_capacity(points.len());
        let mut segs = Vec::with_capacity(points.len() - 1);
        for w in points.windows(2) {
            let (t0, v0) = w[0];
            let (t1, v1) = w[1];
            if t1 <= t0 {
                return Err(Error::DegenerateInput("sample times must increase".into()));
            }
            let slope = (v1 - v0) / (t1 - t0);
            breaks.push(t0);
            segs.push(vec![v0 - slope * t0, slope]);
        }
        breaks.push(points.last().unwrap().0);
        PiecewisePoly::new(breaks, segs)
    }

    fn segment_index(&self, x: f64) -> usize {
        if x < self.breaks[0] {
            return 0;
        }
        match self.breaks.windows(2).position(|w| x >= w[0] && x < w[1]) {
            Some(i) => i,
            None => self.segs.len() - 1,
        }
    }

    /// Value with clamped extension beyond the ends.
    pub fn eval(&self, x: f64) -> f64 {
        let lo = self.breaks[0];
        let hi = *self.breaks.last().unwrap();
        let xc = x.clamp(lo, hi);
        let seg = &self.segs[self.segment_index(xc)];
        horner(seg, xc)
    }

    /// Jet at an interior point of a segment (one-sided at breakpoints).
    /// Outside the domain the extension is constant, so derivatives vanish.
    pub fn jet3(&self, x: f64) -> Jet1 {
        let lo = self.breaks[0];
        let hi = *self.breaks.last().unwrap();
        if x < lo || x > hi {
            return Jet1::constant(self.eval(x));
        }
        let seg = &self.segs[self.segment_index(x)];
        poly_jet(seg, x)
    }

    /// Max jump of the value across interior breakpoints.
    pub fn max_discontinuity(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 1..self.segs.len() {
            let b = self.breaks[i];
            let left = horner(&self.segs[i - 1], b);
            let right = horner(&self.segs[i], b);
            worst = worst.max((left - right).abs());
        }
        worst
    }

    /// Pointwise square, segment by segment.
    pub fn square(&self) -> PiecewisePoly {
        let segs = self.segs.iter().map(|s| poly_mul(s, s)).collect();
        PiecewisePoly { breaks: self.breaks.clone(), segs }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.breaks[0], *self.breaks.last().unwrap())
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn poly_jet(coeffs: &[f64], x: f64) -> Jet1 {
    let mut j = Jet1::ZERO;
    // evaluate value and derivatives by repeated Horner on derivative coefficients
    j.v = horner(coeffs, x);
    let d1: Vec<f64> = coeffs.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect();
    j.d1 = horner(&d1, x);
    let d2: Vec<f64> = d1.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect();
    j.d2 = horner(&d2, x);
    let d3: Vec<f64> = d2.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect();
    j.d3 = horner(&d3, x);
    j
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Curve expressions.
// ---------------------------------------------------------------------------

/// A smooth 1D profile as a closed-form expression with analytic jets.
#[derive(Clone, Debug)]
pub enum Curve {
    Const(f64),
    /// Polynomial with coefficients c0 + c1 x + c2 x^2 + ...
    Poly(Vec<f64>),
    /// The Appendix bump profile h.
    BumpH,
    /// inner(mul * x + add)
    Affine { mul: f64, add: f64, inner: Arc<Curve> },
    Sum(Vec<Curve>),
    Prod(Arc<Curve>, Arc<Curve>),
    Scale(f64, Arc<Curve>),
    Ratio(Arc<Curve>, Arc<Curve>),
    Piecewise(Arc<PiecewisePoly>),
    /// Mollification of a piecewise polynomial with the standard bump kernel.
    Mollified { pw: Arc<PiecewisePoly>, radius: f64 },
}

impl Curve {
    pub fn poly(coeffs: &[f64]) -> Curve {
        Curve::Poly(coeffs.to_vec())
    }

    /// h((x - shift) / width): rises 0 -> 1 over [shift, shift + width].
    pub fn bump_rise(shift: f64, width: f64) -> Curve {
        Curve::Affine { mul: 1.0 / width, add: -shift / width, inner: Arc::new(Curve::BumpH) }
    }

    /// h((shift - x) / width): falls 1 -> 0 over [shift - width, shift].
    pub fn bump_fall(shift: f64, width: f64) -> Curve {
        Curve::Affine { mul: -1.0 / width, add: shift / width, inner: Arc::new(Curve::BumpH) }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.jet3(x).v
    }

    pub fn jet3(&self, x: f64) -> Jet1 {
        match self {
            Curve::Const(c) => Jet1::constant(*c),
            Curve::Poly(c) => poly_jet(c, x),
            Curve::BumpH => bump_h_jet(x),
            Curve::Affine { mul, add, inner } => {
                let u = mul * x + add;
                let outer = inner.jet3(u);
                Jet1::compose(outer, Jet1 { v: u, d1: *mul, d2: 0.0, d3: 0.0 })
            }
            Curve::Sum(parts) => parts.iter().fold(Jet1::ZERO, |acc, p| acc.add(p.jet3(x))),
            Curve::Prod(a, b) => a.jet3(x).mul(b.jet3(x)),
            Curve::Scale(c, a) => a.jet3(x).scale(*c),
            Curve::Ratio(a, b) => a.jet3(x).div(b.jet3(x)),
            Curve::Piecewise(pw) => pw.jet3(x),
            Curve::Mollified { pw, radius } => mollified_jet(pw, *radius, x),
        }
    }

    /// Logarithmic jet where the expression structure supports it (positive
    /// products of bump profiles, constants and scalings). Lets sign
    /// questions about ratios like f''/f be settled far below f64 underflow.
    pub fn log_jet(&self, x: f64) -> Option<LogJet> {
        match self {
            Curve::Const(c) if *c > 0.0 => {
                Some(LogJet { ln_v: c.ln(), r1: 0.0, r2: 0.0, r3: 0.0 })
            }
            Curve::BumpH => Some(bump_h_log_jet(x)),
            Curve::Affine { mul, add, inner } => {
                inner.log_jet(mul * x + add).map(|l| l.affine_arg(*mul))
            }
            Curve::Prod(a, b) => match (a.log_jet(x), b.log_jet(x)) {
                (Some(la), Some(lb)) => Some(la.product(lb)),
                _ => None,
            },
            Curve::Scale(c, a) if *c > 0.0 => a.log_jet(x).map(|mut l| {
                l.ln_v += c.ln();
                l
            }),
            _ => None,
        }
    }

    /// Breakpoints of any piecewise pieces (used to split quadratures).
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Curve::Const(_) | Curve::Poly(_) => vec![],
            Curve::BumpH => vec![0.0, 0.5, 1.0],
            Curve::Affine { mul, add, inner } => inner
                .breakpoints()
                .iter()
                .map(|b| (b - add) / mul)
                .collect(),
            Curve::Sum(parts) => parts.iter().flat_map(|p| p.breakpoints()).collect(),
            Curve::Prod(a, b) | Curve::Ratio(a, b) => {
                let mut v = a.breakpoints();
                v.extend(b.breakpoints());
                v
            }
            Curve::Scale(_, a) => a.breakpoints(),
            Curve::Piecewise(pw) => pw.breaks.clone(),
            Curve::Mollified { .. } => vec![],
        }
    }
}

/// Jet of J_radius(pw) at x: convolution against the scaled bump kernel,
/// with the s-integral split at the piecewise breakpoints. Derivatives fall
/// on the kernel, so they are exact integral formulas, not differences.
/// All four components share one composite Gauss pass over the panels.
fn mollified_jet(pw: &PiecewisePoly, radius: f64, x: f64) -> Jet1 {
    let r = radius;
    let lo = x - r;
    let hi = x + r;
    // split at piecewise breakpoints and at the clamp boundaries
    let mut pts: Vec<f64> = vec![lo];
    let (dlo, dhi) = pw.domain();
    for &b in pw.breaks.iter().chain([dlo, dhi].iter()) {
        if b > lo && b < hi {
            pts.push(b);
        }
    }
    pts.push(hi);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (nodes, weights) = quad::gauss_legendre_cached_32();
    let mut acc = [0.0f64; 4];
    for w in pts.windows(2) {
        let (pa, pb) = (w[0], w[1]);
        // subdivide wide panels so each is at most half a kernel radius
        let subs = ((pb - pa) / (0.5 * r)).ceil().max(1.0) as usize;
        for k in 0..subs {
            let a = pa + (pb - pa) * k as f64 / subs as f64;
            let b = pa + (pb - pa) * (k + 1) as f64 / subs as f64;
            let mid = 0.5 * (a + b);
            let half = 0.5 * (b - a);
            for (node, wt) in nodes.iter().zip(weights) {
                let s = mid + half * node;
                let u = (x - s) / r;
                let kj = mollifier_kernel_jet(u);
                let g = wt * half * pw.eval(s);
                acc[0] += kj.v * g;
                acc[1] += kj.d1 * g;
                acc[2] += kj.d2 * g;
                acc[3] += kj.d3 * g;
            }
        }
    }
    Jet1 {
        v: acc[0] / r,
        d1: acc[1] / (r * r),
        d2: acc[2] / (r * r * r),
        d3: acc[3] / (r * r * r * r),
    }
}

/// First-order divided difference (g(a) - g(b)) / (a - b).
pub fn divided_difference(g: impl Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    if a == b {
        return Err(Error::DegenerateInput("divided difference needs distinct points".into()));
    }
    Ok((g(a) - g(b)) / (a - b))
}

/// Second-order divided difference g[a,b,c] = (g[a,b] - g[c,b]) / (a - c).
pub fn divided_difference2(g: impl Fn(f64) -> f64, a: f64, b: f64, c: f64) -> Result<f64> {
    if a == b || b == c || a == c {
        return Err(Error::DegenerateInput("divided difference needs distinct points".into()));
    }
    let gab = (g(a) - g(b)) / (a - b);
    let gcb = (g(c) - g(b)) / (c - b);
    Ok((gab - gcb) / (a - c))
}

/// Mollify a 1D piecewise polynomial; the result is a smooth curve.
pub fn mollify_piecewise(pw: &PiecewisePoly, radius: f64) -> Result<Curve> {
    if radius <= 0.0 {
        return Err(Error::precondition("mollification radius must be positive"));
    }
    Ok(Curve::Mollified { pw: Arc::new(pw.clone()), radius })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn fd3(f: impl Fn(f64) -> f64, x: f64, h: f64) -> (f64, f64, f64) {
        let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
        let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        let d3 = (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h))
            / (2.0 * h * h * h);
        (d1, d2, d3)
    }

    #[test]
    fn bump_values() {
        assert_eq!(bump_h(-1.0), 0.0);
        assert_eq!(bump_h(0.0), 0.0);
        assert_abs_diff_eq!(bump_h(0.4), (-6.25f64).exp(), epsilon = 1e-15);
        assert_eq!(bump_h(1.0), 1.0);
        assert_eq!(bump_h(7.3), 1.0);
    }

    #[test]
    fn bump_monotone_and_in_unit_range() {
        let mut prev = -1.0;
        for i in 0..=4000 {
            let x = -0.5 + 2.0 * i as f64 / 4000.0;
            let v = bump_h(x);
            assert!((0.0..=1.0).contains(&v));
            assert!(v >= prev - 1e-14, "h not monotone at {x}: {v} < {prev}");
            prev = v;
        }
    }

    #[test]
    fn bump_third_derivative_positive_on_inner_branch() {
        for i in 1..100 {
            let x = 0.5 * i as f64 / 100.0;
            // ratio form holds everywhere on (0, 1/2), even below underflow
            assert!(bump_h_log_jet(x).r3 > 0.0, "h'''/h <= 0 at {x}");
            if bump_h(x) > 0.0 {
                assert!(bump_h_jet(x).d3 >= 0.0, "h''' < 0 at {x}");
            }
        }
    }

    #[test]
    fn bump_jets_match_finite_differences() {
        for &x in &[0.12, 0.3, 0.45, 0.55, 0.7, 0.85, 0.97] {
            let j = bump_h_jet(x);
            let (d1, d2, d3) = fd3(bump_h, x, 1e-4);
            assert_abs_diff_eq!(j.d1, d1, epsilon = 1e-5 * (1.0 + d1.abs()));
            assert_abs_diff_eq!(j.d2, d2, epsilon = 1e-4 * (1.0 + d2.abs()));
            assert_abs_diff_eq!(j.d3, d3, epsilon = 2e-3 * (1.0 + d3.abs()));
        }
    }

    #[test]
    fn log_jet_consistent_with_plain_jet() {
        for &x in &[0.2, 0.35, 0.48, 0.6, 0.8] {
            let j = bump_h_jet(x);
            let l = bump_h_log_jet(x);
            assert_abs_diff_eq!(l.ln_v, j.v.ln(), epsilon = 1e-10);
            assert_abs_diff_eq!(l.r1, j.d1 / j.v, epsilon = 1e-8 * (1.0 + l.r1.abs()));
            assert_abs_diff_eq!(l.r2, j.d2 / j.v, epsilon = 1e-7 * (1.0 + l.r2.abs()));
        }
    }

    #[test]
    fn log_jet_survives_underflow() {
        // h(0.01) underflows to 0.0 but the ratio jet stays finite and exact.
        assert_eq!(bump_h(0.01), 0.0);
        let l = bump_h_log_jet(0.01);
        assert_eq!(l.ln_v, -1e4);
        assert_abs_diff_eq!(l.r1, 2.0 / 1e-6, epsilon = 1.0);
    }

    #[test]
    fn divided_differences_spec_cases() {
        let sq = |x: f64| x * x;
        let cube = |x: f64| x * x * x;
        assert_abs_diff_eq!(divided_difference2(sq, 0.0, 1.0, 2.0).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(divided_difference2(cube, 0.0, 1.0, 2.0).unwrap(), 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(divided_difference(cube, 1.0, 2.0).unwrap(), 7.0, epsilon = 1e-14);
        assert!(divided_difference(sq, 1.0, 1.0).is_err());
    }

    #[test]
    fn mollified_constant_stays_constant() {
        let pw = PiecewisePoly::constant(0.0, 1.0, 3.25);
        let m = mollify_piecewise(&pw, 0.05).unwrap();
        for &t in &[0.0, 0.2, 0.5, 0.9, 1.0] {
            assert_abs_diff_eq!(m.eval(t), 3.25, epsilon = 1e-10);
        }
    }

    #[test]
    fn mollified_linear_matches_at_interior_point() {
        // symmetric kernel reproduces affine functions away from the ends
        let pw = PiecewisePoly::linear_interpolant(&[(0.0, 1.0), (1.0, 0.0)]).unwrap();
        let m = mollify_piecewise(&pw, 0.01).unwrap();
        assert_abs_diff_eq!(m.eval(0.5), 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(m.jet3(0.5).d1, -1.0, epsilon = 1e-8);
    }

    #[test]
    fn mollified_step_stays_monotone() {
        let pw = PiecewisePoly::new(vec![0.0, 0.5, 1.0], vec![vec![1.0], vec![0.0]]).unwrap();
        let m = mollify_piecewise(&pw, 0.08).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..=200 {
            let t = i as f64 / 200.0;
            let v = m.eval(t);
            assert!(v <= prev + 1e-11, "mollified step not monotone at {t}");
            prev = v;
        }
    }

    #[test]
    fn curve_composition_jets() {
        // f(x) = h((x-1)/0.3) * (2 + x^2)
        let c = Curve::Prod(
            Arc::new(Curve::bump_rise(1.0, 0.3)),
            Arc::new(Curve::poly(&[2.0, 0.0, 1.0])),
        );
        for &x in &[1.05, 1.1, 1.2, 1.31] {
            let j = c.jet3(x);
            let (d1, d2, _) = fd3(|y| c.eval(y), x, 1e-5);
            assert_abs_diff_eq!(j.d1, d1, epsilon = 1e-4 * (1.0 + d1.abs()));
            assert_abs_diff_eq!(j.d2, d2, epsilon = 1e-3 * (1.0 + d2.abs()));
        }
    }

    proptest! {
        // Lemma A.1 shape: g[a,b,c] lies between min and max of g''/2 for smooth g.
        #[test]
        fn divided_difference_is_half_second_derivative_somewhere(
            a in -1.0f64..0.0, b in 0.01f64..0.99, c in 1.0f64..2.0, k in 0.1f64..3.0,
        ) {
            let g = |x: f64| (k * x).sin();
            let dd = divided_difference2(g, a, a + (c - a) * b, c).unwrap();
            // g''/2 = -k^2 sin(kx)/2, bounded by k^2/2
            prop_assert!(dd.abs() <= k * k / 2.0 + 1e-9);
        }

        #[test]
        fn piecewise_linear_interpolates(v0 in -5.0f64..5.0, v1 in -5.0f64..5.0) {
            let pw = PiecewisePoly::linear_interpolant(&[(0.0, v0), (2.0, v1)]).unwrap();
            prop_assert!((pw.eval(0.0) - v0).abs() < 1e-12);
            prop_assert!((pw.eval(1.0) - 0.5 * (v0 + v1)).abs() < 1e-12);
            // clamped extension
            prop_assert!((pw.eval(-1.0) - v0).abs() < 1e-12);
            prop_assert!((pw.eval(3.0) - v1).abs() < 1e-12);
        }
    }
}
