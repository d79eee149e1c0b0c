//! The axisymmetric lift `u[v, f]` and its cylindrical calculus.
//!
//! A planar pair (v, f) with f >= |v| lifts to the 3D axisymmetric field
//! whose planar components are v and whose azimuthal component is
//! sqrt(f^2 - |v|^2), so that |u[v, f]| = f pointwise.

use crate::error::{Error, Result};
use crate::field::{PlanarVectorField, Rect, ScalarField2D};
use crate::quad;

/// Exponent of an L^p norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Lp {
    P(f64),
    Infinity,
}

/// Axisymmetric vector field determined by a planar profile pair.
#[derive(Clone, Debug)]
pub struct AxisymField {
    v: Option<PlanarVectorField>,
    f: ScalarField2D,
    support: Rect,
}

/// Radicand guard: tolerated negative slack before an invariant error.
const RADICAND_SLACK: f64 = 1e-12;

impl AxisymField {
    pub fn new(v: Option<PlanarVectorField>, f: ScalarField2D, support: Rect) -> AxisymField {
        AxisymField { v, f, support }
    }

    /// Lift with vanishing planar components: u[f] = u[0, f].
    pub fn from_profile(f: ScalarField2D, support: Rect) -> AxisymField {
        AxisymField { v: None, f, support }
    }

    /// Lift of an indicator profile (norm computations only).
    pub fn indicator(rect: Rect) -> AxisymField {
        AxisymField { v: None, f: ScalarField2D::indicator(rect), support: rect }
    }

    pub fn profile(&self) -> &ScalarField2D {
        &self.f
    }

    pub fn planar_components(&self) -> Option<&PlanarVectorField> {
        self.v.as_ref()
    }

    pub fn support(&self) -> Rect {
        self.support
    }

    fn planar_coords(x: [f64; 3]) -> (f64, f64) {
        (x[0], (x[1] * x[1] + x[2] * x[2]).sqrt())
    }

    /// Whether the 3D point lies in the rotation of the closed support.
    pub fn in_support(&self, x: [f64; 3]) -> bool {
        let (x1, rho) = Self::planar_coords(x);
        self.support.contains_closed(x1, rho)
    }

    /// The lifted vector at a 3D point: v1 x1_hat + v2 rho_hat + g phi_hat.
    pub fn eval(&self, x: [f64; 3]) -> Result<[f64; 3]> {
        let (x1, rho) = Self::planar_coords(x);
        if !self.support.contains_closed(x1, rho) || rho == 0.0 {
            return Ok([0.0, 0.0, 0.0]);
        }
        let f = self.f.value(x1, rho)?;
        let (v1, v2) = match &self.v {
            None => (0.0, 0.0),
            Some(v) => v.value(x1, rho)?,
        };
        let rad = f * f - v1 * v1 - v2 * v2;
        if rad < -RADICAND_SLACK * f.abs().max(1.0) {
            return Err(Error::Invariant(format!(
                "radicand f^2 - |v|^2 = {rad} < 0 at ({x1}, {rho})"
            )));
        }
        let g = rad.max(0.0).sqrt();
        let cos = x[1] / rho;
        let sin = x[2] / rho;
        Ok([v1, v2 * cos - g * sin, v2 * sin + g * cos])
    }

    /// |u| at a 3D point (equals the planar profile f).
    pub fn magnitude(&self, x: [f64; 3]) -> Result<f64> {
        let (x1, rho) = Self::planar_coords(x);
        if !self.support.contains_closed(x1, rho) {
            return Ok(0.0);
        }
        self.f.value(x1, rho)
    }

    /// Analytic Jacobian J[i][j] = d_i u_j at a 3D point off the axis.
    pub fn jacobian(&self, x: [f64; 3]) -> Result<[[f64; 3]; 3]> {
        let (x1, rho) = Self::planar_coords(x);
        if rho == 0.0 || !self.support.contains_closed(x1, rho) {
            return Ok([[0.0; 3]; 3]);
        }
        let fj = self.f.jet(x1, rho)?;
        let (v1j, v2j) = match &self.v {
            None => (crate::field::Jet2::ZERO, crate::field::Jet2::ZERO),
            Some(v) => (v.v1.jet(x1, rho)?, v.v2.jet(x1, rho)?),
        };
        // partials of the azimuthal magnitude g = sqrt(f^2 - v1^2 - v2^2);
        // outside supp v this is exactly f, also where the radicand underflows
        let vmag2 = v1j.v * v1j.v + v2j.v * v2j.v;
        let v_flat = vmag2 == 0.0
            && v1j.dx == 0.0
            && v1j.dy == 0.0
            && v2j.dx == 0.0
            && v2j.dy == 0.0;
        let (g, g_x1, g_rho) = if v_flat {
            (fj.v, fj.dx, fj.dy)
        } else {
            let rad = fj.v * fj.v - vmag2;
            if rad < -RADICAND_SLACK * fj.v.abs().max(1.0) {
                return Err(Error::Invariant(format!(
                    "radicand f^2 - |v|^2 = {rad} < 0 at ({x1}, {rho})"
                )));
            }
            let g = rad.max(0.0).sqrt();
            if g == 0.0 {
                return Err(Error::Invariant(format!(
                    "azimuthal magnitude vanishes inside supp v at ({x1}, {rho})"
                )));
            }
            (
                g,
                (fj.v * fj.dx - v1j.v * v1j.dx - v2j.v * v2j.dx) / g,
                (fj.v * fj.dy - v1j.v * v1j.dy - v2j.v * v2j.dy) / g,
            )
        };
        let c = x[1] / rho;
        let s = x[2] / rho;
        let v2 = v2j.v;
        let (dv2_1, dv2_r) = (v2j.dx, v2j.dy);
        let mut jac = [[0.0; 3]; 3];
        // d_i u_1, with u_1 = v1(x1, rho)
        jac[0][0] = v1j.dx;
        jac[1][0] = v1j.dy * c;
        jac[2][0] = v1j.dy * s;
        // d_i u_2, with u_2 = v2 c - g s
        jac[0][1] = dv2_1 * c - g_x1 * s;
        jac[1][1] = c * c * dv2_r + v2 * s * s / rho - c * s * g_rho + g * c * s / rho;
        jac[2][1] = c * s * dv2_r - v2 * c * s / rho - s * s * g_rho - g * c * c / rho;
        // d_i u_3, with u_3 = v2 s + g c
        jac[0][2] = dv2_1 * s + g_x1 * c;
        jac[1][2] = c * s * dv2_r - v2 * c * s / rho + c * c * g_rho + g * s * s / rho;
        jac[2][2] = s * s * dv2_r + v2 * c * c / rho + c * s * g_rho - g * c * s / rho;
        Ok(jac)
    }

    /// Frobenius norm squared of the Jacobian, |grad u|^2.
    pub fn grad_norm_sq(&self, x: [f64; 3]) -> Result<f64> {
        let j = self.jacobian(x)?;
        Ok(j.iter().flatten().map(|a| a * a).sum())
    }
}

/// L f = Delta f + (1/x2) d2 f - f / x2^2, the azimuthal Laplacian factor.
pub fn lf(f: &ScalarField2D, x1: f64, x2: f64) -> Result<f64> {
    let j = f.jet(x1, x2)?;
    Ok(j.laplacian() + j.dy / x2 - j.v / (x2 * x2))
}

/// L^p norm of the lift, reduced to the plane: (2 pi ∬ f^p rho)^{1/p}.
///
/// Indicator lifts use the closed-form cylindrical integral; smooth profiles
/// go through adaptive quadrature to relative tolerance 1e-8.
pub fn lp_norm(u: &AxisymField, p: Lp) -> Result<f64> {
    match p {
        Lp::Infinity => {
            if u.f.is_indicator() {
                return Ok(1.0);
            }
            let r = u.support;
            let mut sup: f64 = 0.0;
            for x1 in quad::linspace(r.a1, r.b1, 400) {
                for x2 in quad::linspace(r.a2, r.b2, 400) {
                    sup = sup.max(u.f.value(x1, x2)?.abs());
                }
            }
            Ok(sup)
        }
        Lp::P(q) => {
            if q < 1.0 {
                return Err(Error::precondition("L^p norms require p >= 1"));
            }
            Ok(lp_norm_pow(u, q)?.powf(1.0 / q))
        }
    }
}

/// The p-th power of the L^p norm: 2 pi ∬ f^p rho d rho dx1.
pub fn lp_norm_pow(u: &AxisymField, q: f64) -> Result<f64> {
    if let Some(rect) = u.f.indicator_rect() {
        return Ok(indicator_mass(rect));
    }
    let r = u.support;
    let f = &u.f;
    let integrand = |x1: f64, x2: f64| {
        let v = f.value(x1, x2).unwrap_or(0.0).max(0.0);
        2.0 * std::f64::consts::PI * v.powf(q) * x2
    };
    let est = quad::adaptive_2d(&integrand, r.a1, r.b1, r.a2, r.b2, 1e-6);
    let tol = (1e-8 * est.abs()).max(1e-13);
    Ok(quad::adaptive_2d(&integrand, r.a1, r.b1, r.a2, r.b2, tol))
}

/// Closed-form ∬_rect 2 pi rho = pi (b1 - a1)(b2^2 - a2^2); the p-th power of
/// every L^p norm of an indicator lift.
pub fn indicator_mass(rect: Rect) -> f64 {
    std::f64::consts::PI * rect.side1() * (rect.b2 * rect.b2 - rect.a2 * rect.a2)
}

/// Closed-form p-th norm power of u[chi_{outer \ U_margin}].
pub fn frame_mass(outer: Rect, margin: f64) -> Result<f64> {
    let inner = outer.eta_subset(margin)?;
    Ok(indicator_mass(outer) - indicator_mass(inner))
}

/// Residuals of the lift identities at a 3D point, by central differences.
#[derive(Clone, Copy, Debug)]
pub struct IdentityResiduals {
    /// |div u| (finite differences, step 1e-5).
    pub divergence: f64,
    /// |Delta u - (0, 0, Lf)| at a planar point; only meaningful for v = 0.
    pub laplacian_vs_lf: Option<f64>,
    /// |d/dx3 of |u|| across the plane x3 = 0.
    pub d3_magnitude: f64,
}

pub fn identity_residuals(u: &AxisymField, x: [f64; 3]) -> Result<IdentityResiduals> {
    let h = 1e-5;
    let mut divergence = 0.0;
    for i in 0..3 {
        let mut xp = x;
        let mut xm = x;
        xp[i] += h;
        xm[i] -= h;
        divergence += (u.eval(xp)?[i] - u.eval(xm)?[i]) / (2.0 * h);
    }
    let laplacian_vs_lf = if u.v.is_none() && x[2] == 0.0 {
        let mut lap = [0.0; 3];
        let center = u.eval(x)?;
        for i in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            let (up, um) = (u.eval(xp)?, u.eval(xm)?);
            for (k, l) in lap.iter_mut().enumerate() {
                *l += (up[k] - 2.0 * center[k] + um[k]) / (h * h);
            }
        }
        let lf_val = lf(&u.f, x[0], x[1])?;
        Some((lap[0].powi(2) + lap[1].powi(2) + (lap[2] - lf_val).powi(2)).sqrt())
    } else {
        None
    };
    let d3 = {
        let delta = 1e-5;
        let (mut xp, mut xm) = (x, x);
        xp[2] += delta;
        xm[2] -= delta;
        (u.magnitude(xp)? - u.magnitude(xm)?).abs() / (2.0 * delta)
    };
    Ok(IdentityResiduals { divergence: divergence.abs(), laplacian_vs_lf, d3_magnitude: d3 })
}

/// Grid supremum of |f * Lf| over the support closure (400 x 400), with the
/// 1.05 safety factor applied in `inflated`.
#[derive(Clone, Copy, Debug)]
pub struct SupFLf {
    pub grid_max: f64,
    pub inflated: f64,
}

pub fn sup_f_lf(f: &ScalarField2D, support: Rect) -> Result<SupFLf> {
    let mut worst: f64 = 0.0;
    for x1 in quad::linspace(support.a1, support.b1, 400) {
        for x2 in quad::linspace(support.a2, support.b2, 400) {
            let j = f.jet(x1, x2)?;
            let val = j.v * (j.laplacian() + j.dy / x2 - j.v / (x2 * x2));
            if val.abs() > worst {
                worst = val.abs();
            }
        }
    }
    Ok(SupFLf { grid_max: worst, inflated: 1.05 * worst })
}

/// Rotation by theta around the x1-axis.
pub fn rotate(theta: f64, x: [f64; 3]) -> [f64; 3] {
    let (s, c) = theta.sin_cos();
    [x[0], x[1] * c - x[2] * s, x[1] * s + x[2] * c]
}
