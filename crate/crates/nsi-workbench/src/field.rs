//! Planar geometry and smooth scalar/vector fields on the half-plane.
//!
//! Fields are closed-form expression objects (tensor products of 1D curves,
//! radial profiles, sums, products, mollifications) with analytic partials
//! up to order 2.

use crate::curve::{mollifier_norm, Curve, Jet1};
use crate::error::{Error, Result};
use crate::quad;
use serde::{Deserialize, Serialize};
use std::sync::{Arc, OnceLock};

/// Open rectangle (a1, b1) x (a2, b2) strictly above the x1-axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
}

impl Rect {
    pub fn new(a1: f64, b1: f64, a2: f64, b2: f64) -> Result<Rect> {
        if !(b1 > a1 && b2 > a2 && a2 > 0.0) {
            return Err(Error::precondition(format!(
                "rectangle ({a1},{b1})x({a2},{b2}) must satisfy b1 > a1, b2 > a2 > 0"
            )));
        }
        Ok(Rect { a1, b1, a2, b2 })
    }

    pub fn side1(&self) -> f64 {
        self.b1 - self.a1
    }

    pub fn side2(&self) -> f64 {
        self.b2 - self.a2
    }

    pub fn min_side(&self) -> f64 {
        self.side1().min(self.side2())
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.a1 + self.b1), 0.5 * (self.a2 + self.b2))
    }

    /// Distance from the rectangle to the x1-axis.
    pub fn axis_distance(&self) -> f64 {
        self.a2
    }

    pub fn contains(&self, x1: f64, x2: f64) -> bool {
        x1 > self.a1 && x1 < self.b1 && x2 > self.a2 && x2 < self.b2
    }

    pub fn contains_closed(&self, x1: f64, x2: f64) -> bool {
        x1 >= self.a1 && x1 <= self.b1 && x2 >= self.a2 && x2 <= self.b2
    }

    /// Distance of an interior point to the boundary.
    pub fn boundary_distance(&self, x1: f64, x2: f64) -> f64 {
        (x1 - self.a1).min(self.b1 - x1).min(x2 - self.a2).min(self.b2 - x2)
    }

    /// The eta-subset: points at distance more than `margin` from the boundary.
    pub fn eta_subset(&self, margin: f64) -> Result<Rect> {
        if margin < 0.0 {
            return Err(Error::precondition("margin must be non-negative"));
        }
        if margin == 0.0 {
            return Ok(*self);
        }
        if 2.0 * margin >= self.min_side() {
            return Err(Error::EmptySubset {
                margin,
                side1: self.side1(),
                side2: self.side2(),
            });
        }
        Ok(Rect {
            a1: self.a1 + margin,
            b1: self.b1 - margin,
            a2: self.a2 + margin,
            b2: self.b2 - margin,
        })
    }

    pub fn expand(&self, pad: f64) -> Rect {
        Rect { a1: self.a1 - pad, b1: self.b1 + pad, a2: self.a2 - pad, b2: self.b2 + pad }
    }

    pub fn disjoint(&self, other: &Rect) -> bool {
        self.b1 <= other.a1 || other.b1 <= self.a1 || self.b2 <= other.a2 || other.b2 <= self.a2
    }

    pub fn union_box(&self, other: &Rect) -> Rect {
        Rect {
            a1: self.a1.min(other.a1),
            b1: self.b1.max(other.b1),
            a2: self.a2.min(other.a2),
            b2: self.b2.max(other.b2),
        }
    }
}

/// Value and partial derivatives up to order 2 at a planar point.
#[derive(Clone, Copy, Debug, Default)]
pub struct Jet2 {
    pub v: f64,
    pub dx: f64,
    pub dy: f64,
    pub dxx: f64,
    pub dxy: f64,
    pub dyy: f64,
}

impl Jet2 {
    pub const ZERO: Jet2 = Jet2 { v: 0.0, dx: 0.0, dy: 0.0, dxx: 0.0, dxy: 0.0, dyy: 0.0 };

    pub fn constant(v: f64) -> Jet2 {
        Jet2 { v, ..Jet2::ZERO }
    }

    pub fn tensor(jx: Jet1, jy: Jet1) -> Jet2 {
        Jet2 {
            v: jx.v * jy.v,
            dx: jx.d1 * jy.v,
            dy: jx.v * jy.d1,
            dxx: jx.d2 * jy.v,
            dxy: jx.d1 * jy.d1,
            dyy: jx.v * jy.d2,
        }
    }

    pub fn add(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v + o.v,
            dx: self.dx + o.dx,
            dy: self.dy + o.dy,
            dxx: self.dxx + o.dxx,
            dxy: self.dxy + o.dxy,
            dyy: self.dyy + o.dyy,
        }
    }

    pub fn sub(self, o: Jet2) -> Jet2 {
        self.add(o.scale(-1.0))
    }

    pub fn scale(self, c: f64) -> Jet2 {
        Jet2 {
            v: c * self.v,
            dx: c * self.dx,
            dy: c * self.dy,
            dxx: c * self.dxx,
            dxy: c * self.dxy,
            dyy: c * self.dyy,
        }
    }

    pub fn mul(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v * o.v,
            dx: self.dx * o.v + self.v * o.dx,
            dy: self.dy * o.v + self.v * o.dy,
            dxx: self.dxx * o.v + 2.0 * self.dx * o.dx + self.v * o.dxx,
            dxy: self.dxy * o.v + self.dx * o.dy + self.dy * o.dx + self.v * o.dxy,
            dyy: self.dyy * o.v + 2.0 * self.dy * o.dy + self.v * o.dyy,
        }
    }

    /// Chain rule: outer 1D jet (at self.v) composed with this 2D jet.
    pub fn compose(outer: Jet1, g: Jet2) -> Jet2 {
        Jet2 {
            v: outer.v,
            dx: outer.d1 * g.dx,
            dy: outer.d1 * g.dy,
            dxx: outer.d2 * g.dx * g.dx + outer.d1 * g.dxx,
            dxy: outer.d2 * g.dx * g.dy + outer.d1 * g.dxy,
            dyy: outer.d2 * g.dy * g.dy + outer.d1 * g.dyy,
        }
    }

    /// self^p for positive values.
    pub fn powf(self, p: f64) -> Jet2 {
        let f = self.v;
        let outer = Jet1 {
            v: f.powf(p),
            d1: p * f.powf(p - 1.0),
            d2: p * (p - 1.0) * f.powf(p - 2.0),
            d3: 0.0,
        };
        Jet2::compose(outer, self)
    }

    pub fn sqrt(self) -> Jet2 {
        self.powf(0.5)
    }

    pub fn laplacian(&self) -> f64 {
        self.dxx + self.dyy
    }
}

/// Closed-form 2D field expression.
#[derive(Clone, Debug)]
pub enum FieldExpr {
    /// fx(x1) * fy(x2)
    Tensor { fx: Curve, fy: Curve },
    /// profile(|x - c| / scale)
    Radial { cx: f64, cy: f64, scale: f64, profile: Curve },
    Sum(Vec<Arc<FieldExpr>>),
    Prod(Arc<FieldExpr>, Arc<FieldExpr>),
    Scale(f64, Arc<FieldExpr>),
    /// Mollification by the normalized radial bump kernel of the given radius.
    Mollified { inner: Arc<FieldExpr>, radius: f64 },
}

impl FieldExpr {
    pub fn jet(&self, x1: f64, x2: f64) -> Jet2 {
        match self {
            FieldExpr::Tensor { fx, fy } => Jet2::tensor(fx.jet3(x1), fy.jet3(x2)),
            FieldExpr::Radial { cx, cy, scale, profile } => {
                let rx = x1 - cx;
                let ry = x2 - cy;
                let r = (rx * rx + ry * ry).sqrt();
                if r < 1e-300 {
                    // radial profiles used here vanish identically near the center
                    return Jet2::constant(profile.eval(0.0));
                }
                let rj = Jet2 {
                    v: r / scale,
                    dx: rx / (r * scale),
                    dy: ry / (r * scale),
                    dxx: ry * ry / (r.powi(3) * scale),
                    dxy: -rx * ry / (r.powi(3) * scale),
                    dyy: rx * rx / (r.powi(3) * scale),
                };
                Jet2::compose(profile.jet3(rj.v), rj)
            }
            FieldExpr::Sum(parts) => parts.iter().fold(Jet2::ZERO, |acc, p| acc.add(p.jet(x1, x2))),
            FieldExpr::Prod(a, b) => a.jet(x1, x2).mul(b.jet(x1, x2)),
            FieldExpr::Scale(c, a) => a.jet(x1, x2).scale(*c),
            FieldExpr::Mollified { inner, radius } => {
                let (nodes, weights) = disc_kernel_rule();
                let mut acc = Jet2::ZERO;
                for ((u, v), w) in nodes.iter().zip(weights) {
                    acc = acc.add(inner.jet(x1 - radius * u, x2 - radius * v).scale(*w));
                }
                acc
            }
        }
    }
}

/// Fixed tensor rule for the normalized 2D bump kernel on the unit disc.
/// Nodes are frozen, so differentiating under the sum is exact.
fn disc_kernel_rule() -> &'static (Vec<(f64, f64)>, Vec<f64>) {
    static RULE: OnceLock<(Vec<(f64, f64)>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let (nodes1, weights1) = quad::gauss_legendre(40);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut mass = 0.0;
        for (u, wu) in nodes1.iter().zip(&weights1) {
            for (v, wv) in nodes1.iter().zip(&weights1) {
                let rr = u * u + v * v;
                if rr < 1.0 {
                    let k = (-1.0 / (1.0 - rr)).exp();
                    let w = wu * wv * k;
                    nodes.push((*u, *v));
                    weights.push(w);
                    mass += w;
                }
            }
        }
        for w in &mut weights {
            *w /= mass;
        }
        (nodes, weights)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Support {
    HalfPlane,
    Rect(Rect),
}

/// Scalar field on the half-plane. Smooth fields carry analytic jets;
/// indicator fields are admitted for norm computations only.
#[derive(Clone, Debug)]
pub struct ScalarField2D {
    kind: FieldKind,
    support: Support,
}

#[derive(Clone, Debug)]
pub enum FieldKind {
    Smooth(Arc<FieldExpr>),
    Indicator(Rect),
}

impl ScalarField2D {
    pub fn smooth(expr: FieldExpr, support: Support) -> ScalarField2D {
        ScalarField2D { kind: FieldKind::Smooth(Arc::new(expr)), support }
    }

    pub fn zero() -> ScalarField2D {
        ScalarField2D::smooth(
            FieldExpr::Tensor { fx: Curve::Const(0.0), fy: Curve::Const(0.0) },
            Support::HalfPlane,
        )
    }

    pub fn tensor_on(rect: Rect, fx: Curve, fy: Curve) -> ScalarField2D {
        ScalarField2D::smooth(FieldExpr::Tensor { fx, fy }, Support::Rect(rect))
    }

    pub fn indicator(rect: Rect) -> ScalarField2D {
        ScalarField2D { kind: FieldKind::Indicator(rect), support: Support::Rect(rect) }
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn support_rect(&self) -> Option<Rect> {
        match self.support {
            Support::Rect(r) => Some(r),
            Support::HalfPlane => None,
        }
    }

    pub fn is_indicator(&self) -> bool {
        matches!(self.kind, FieldKind::Indicator(_))
    }

    pub fn indicator_rect(&self) -> Option<Rect> {
        match self.kind {
            FieldKind::Indicator(r) => Some(r),
            _ => None,
        }
    }

    pub fn expr(&self) -> Option<&Arc<FieldExpr>> {
        match &self.kind {
            FieldKind::Smooth(e) => Some(e),
            FieldKind::Indicator(_) => None,
        }
    }

    fn check_halfplane(x1: f64, x2: f64) -> Result<()> {
        if x2 <= 0.0 {
            return Err(Error::OutsideHalfPlane { x1, x2 });
        }
        Ok(())
    }

    /// Value at a point of the open half-plane.
    pub fn value(&self, x1: f64, x2: f64) -> Result<f64> {
        Self::check_halfplane(x1, x2)?;
        match &self.kind {
            FieldKind::Indicator(r) => Ok(if r.contains(x1, x2) { 1.0 } else { 0.0 }),
            FieldKind::Smooth(e) => {
                if let Support::Rect(r) = self.support {
                    if !r.contains_closed(x1, x2) {
                        return Ok(0.0);
                    }
                }
                Ok(e.jet(x1, x2).v)
            }
        }
    }

    /// Analytic jet (value and partials through order 2).
    pub fn jet(&self, x1: f64, x2: f64) -> Result<Jet2> {
        Self::check_halfplane(x1, x2)?;
        match &self.kind {
            FieldKind::Indicator(_) => Err(Error::Invariant(
                "indicator fields admit norm computations only, not derivatives".into(),
            )),
            FieldKind::Smooth(e) => {
                if let Support::Rect(r) = self.support {
                    if !r.contains_closed(x1, x2) {
                        return Ok(Jet2::ZERO);
                    }
                }
                Ok(e.jet(x1, x2))
            }
        }
    }

    pub fn scaled(&self, c: f64) -> Result<ScalarField2D> {
        match &self.kind {
            FieldKind::Indicator(_) => {
                Err(Error::Invariant("cannot scale an indicator field".into()))
            }
            FieldKind::Smooth(e) => Ok(ScalarField2D {
                kind: FieldKind::Smooth(Arc::new(FieldExpr::Scale(c, e.clone()))),
                support: self.support,
            }),
        }
    }

    /// Pointwise sum; the support becomes the bounding box.
    pub fn sum(&self, other: &ScalarField2D) -> Result<ScalarField2D> {
        let (ea, eb) = match (&self.kind, &other.kind) {
            (FieldKind::Smooth(a), FieldKind::Smooth(b)) => (a.clone(), b.clone()),
            _ => return Err(Error::Invariant("cannot sum indicator fields".into())),
        };
        let support = match (self.support, other.support) {
            (Support::Rect(a), Support::Rect(b)) => Support::Rect(a.union_box(&b)),
            _ => Support::HalfPlane,
        };
        Ok(ScalarField2D {
            kind: FieldKind::Smooth(Arc::new(FieldExpr::Sum(vec![ea, eb]))),
            support,
        })
    }
}

/// Planar vector field with two smooth components sharing a support.
#[derive(Clone, Debug)]
pub struct PlanarVectorField {
    pub v1: ScalarField2D,
    pub v2: ScalarField2D,
    support: Rect,
}

impl PlanarVectorField {
    pub fn new(v1: ScalarField2D, v2: ScalarField2D, support: Rect) -> PlanarVectorField {
        PlanarVectorField { v1, v2, support }
    }

    pub fn zero_on(rect: Rect) -> PlanarVectorField {
        PlanarVectorField { v1: ScalarField2D::zero(), v2: ScalarField2D::zero(), support: rect }
    }

    pub fn support(&self) -> Rect {
        self.support
    }

    pub fn value(&self, x1: f64, x2: f64) -> Result<(f64, f64)> {
        Ok((self.v1.value(x1, x2)?, self.v2.value(x1, x2)?))
    }

    pub fn magnitude(&self, x1: f64, x2: f64) -> Result<f64> {
        let (a, b) = self.value(x1, x2)?;
        Ok((a * a + b * b).sqrt())
    }

    /// div(x2 * v) = v2 + x2 (d1 v1 + d2 v2), from analytic jets.
    pub fn weighted_divergence(&self, x1: f64, x2: f64) -> Result<f64> {
        let j1 = self.v1.jet(x1, x2)?;
        let j2 = self.v2.jet(x1, x2)?;
        Ok(j2.v + x2 * (j1.dx + j2.dy))
    }
}

/// Spec operation: value and partials up to the requested order (0, 1 or 2).
pub fn eval_with_partials(field: &ScalarField2D, x1: f64, x2: f64, order: u8) -> Result<Jet2> {
    if order > 2 {
        return Err(Error::precondition("partials available up to order 2"));
    }
    let mut j = field.jet(x1, x2)?;
    if order < 2 {
        j.dxx = 0.0;
        j.dxy = 0.0;
        j.dyy = 0.0;
    }
    if order < 1 {
        j.dx = 0.0;
        j.dy = 0.0;
    }
    Ok(j)
}

/// Mollify a smooth 2D field (indicators are rejected; they are admitted for
/// norm computations only).
pub fn mollify_field(field: &ScalarField2D, radius: f64) -> Result<ScalarField2D> {
    if radius <= 0.0 {
        return Err(Error::precondition("mollification radius must be positive"));
    }
    match &field.kind {
        FieldKind::Indicator(_) => Err(Error::Invariant(
            "indicator fields admit norm computations only, not mollification".into(),
        )),
        FieldKind::Smooth(e) => {
            let support = match field.support {
                Support::Rect(r) => Support::Rect(r.expand(radius)),
                Support::HalfPlane => Support::HalfPlane,
            };
            Ok(ScalarField2D {
                kind: FieldKind::Smooth(Arc::new(FieldExpr::Mollified {
                    inner: e.clone(),
                    radius,
                })),
                support,
            })
        }
    }
}

/// Mollify a 1D profile. Constants are exact fixed points of mollification;
/// piecewise polynomials go through the splitting convolution.
pub fn mollify_curve(curve: &Curve, radius: f64) -> Result<Curve> {
    if radius <= 0.0 {
        return Err(Error::precondition("mollification radius must be positive"));
    }
    match curve {
        Curve::Const(c) => Ok(Curve::Const(*c)),
        Curve::Piecewise(pw) => crate::curve::mollify_piecewise(pw, radius),
        _ => Err(Error::precondition(
            "1D mollification operates on piecewise-polynomial or constant profiles",
        )),
    }
}

// keep the kernel normalization referenced from this module for the 1D case
pub use crate::curve::mollifier_norm as mollifier_normalization;

#[allow(dead_code)]
fn _touch(_: f64) {
    let _ = mollifier_norm();
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn x2_squared() -> ScalarField2D {
        ScalarField2D::smooth(
            FieldExpr::Tensor { fx: Curve::Const(1.0), fy: Curve::poly(&[0.0, 0.0, 1.0]) },
            Support::HalfPlane,
        )
    }

    #[test]
    fn polynomial_partials() {
        let f = x2_squared();
        let j = eval_with_partials(&f, 0.5, 1.5, 2).unwrap();
        assert_abs_diff_eq!(j.v, 2.25, epsilon = 1e-15);
        assert_abs_diff_eq!(j.dy, 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(j.dyy, 2.0, epsilon = 1e-15);
        assert_eq!(j.dx, 0.0);
    }

    #[test]
    fn zero_field_all_zero() {
        let f = ScalarField2D::zero();
        let j = eval_with_partials(&f, 0.3, 0.7, 2).unwrap();
        assert_eq!(j.v, 0.0);
        assert_eq!(j.dyy, 0.0);
    }

    #[test]
    fn rejects_lower_halfplane() {
        let f = x2_squared();
        assert!(matches!(f.value(0.0, -1.0), Err(Error::OutsideHalfPlane { .. })));
        assert!(matches!(f.value(0.0, 0.0), Err(Error::OutsideHalfPlane { .. })));
    }

    #[test]
    fn eta_subset_cases() {
        let r = Rect::new(0.0, 1.0, 1.0, 2.0).unwrap();
        let s = r.eta_subset(0.1).unwrap();
        assert_eq!(s, Rect { a1: 0.1, b1: 0.9, a2: 1.1, b2: 1.9 });
        assert_eq!(r.eta_subset(0.0).unwrap(), r);
        assert!(matches!(r.eta_subset(0.6), Err(Error::EmptySubset { .. })));
    }

    #[test]
    fn indicator_rejects_derivatives() {
        let r = Rect::new(0.0, 1.0, 1.0, 2.0).unwrap();
        let chi = ScalarField2D::indicator(r);
        assert_eq!(chi.value(0.5, 1.5).unwrap(), 1.0);
        assert_eq!(chi.value(2.0, 1.5).unwrap(), 0.0);
        assert!(chi.jet(0.5, 1.5).is_err());
    }

    #[test]
    fn analytic_partials_match_finite_differences() {
        // tensor bump field and a radial field, 100 random interior points each
        let rect = Rect::new(0.0, 1.0, 1.0, 2.0).unwrap();
        let f = ScalarField2D::tensor_on(
            rect,
            Curve::Prod(
                Arc::new(Curve::bump_rise(0.0, 0.3)),
                Arc::new(Curve::bump_fall(1.0, 0.3)),
            ),
            Curve::Prod(
                Arc::new(Curve::bump_rise(1.0, 0.3)),
                Arc::new(Curve::bump_fall(2.0, 0.3)),
            ),
        );
        let swirl = ScalarField2D::smooth(
            FieldExpr::Radial {
                cx: 0.5,
                cy: 1.5,
                scale: 0.15,
                profile: Curve::Prod(
                    Arc::new(Curve::bump_rise(1.0, 0.2)),
                    Arc::new(Curve::bump_fall(2.0, 0.2)),
                ),
            },
            Support::Rect(rect),
        );
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let h = 1e-5;
        for field in [&f, &swirl] {
            for _ in 0..100 {
                let x = rng.gen_range(0.05..0.95);
                let y = rng.gen_range(1.05..1.95);
                let j = field.jet(x, y).unwrap();
                let fd_x = (field.value(x + h, y).unwrap() - field.value(x - h, y).unwrap())
                    / (2.0 * h);
                let fd_y = (field.value(x, y + h).unwrap() - field.value(x, y - h).unwrap())
                    / (2.0 * h);
                let scale = 1.0 + j.dx.abs().max(j.dy.abs());
                assert!((j.dx - fd_x).abs() <= 1e-5 * scale, "dx mismatch at ({x},{y})");
                assert!((j.dy - fd_y).abs() <= 1e-5 * scale, "dy mismatch at ({x},{y})");
            }
        }
    }

    #[test]
    fn mollified_2d_constant_is_constant() {
        let rect = Rect::new(0.0, 1.0, 1.0, 2.0).unwrap();
        let c = ScalarField2D::smooth(
            FieldExpr::Tensor { fx: Curve::Const(1.0), fy: Curve::Const(2.5) },
            Support::HalfPlane,
        );
        let m = mollify_field(&c, 0.05).unwrap();
        assert_abs_diff_eq!(m.value(0.5, 1.5).unwrap(), 2.5, epsilon = 1e-12);
        let _ = rect;
    }

    #[test]
    fn mollify_curve_cases() {
        use crate::curve::PiecewisePoly;
        assert!(mollify_curve(&Curve::Const(4.0), 0.1).is_ok());
        let pw = PiecewisePoly::constant(0.0, 1.0, 1.0);
        assert!(mollify_curve(&Curve::Piecewise(Arc::new(pw)), 0.1).is_ok());
        assert!(mollify_curve(&Curve::Const(1.0), -0.1).is_err());
    }
}
