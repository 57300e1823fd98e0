//! Hyperbolic 3-space: ball and upper half-space models, distances,
//! the half-space translation isometry, and charts.
//!
//! Conversions go through the hyperboloid model `X0² − |X|² = 1`. The
//! basepoint convention is ball origin ↔ half-space `(0, 0, 1)`, and the
//! half-space vertical axis corresponds to the hyperboloid's third spatial
//! coordinate.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    Ball,
    HalfSpace,
}

impl Model {
    fn name(self) -> &'static str {
        match self {
            Model::Ball => "ball",
            Model::HalfSpace => "half-space",
        }
    }
}

/// A point of hyperbolic 3-space tagged with its coordinate model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    pub coords: [f64; 3],
    pub model: Model,
}

impl HPoint {
    pub fn new(coords: [f64; 3], model: Model) -> Result<Self> {
        let p = HPoint { coords, model };
        p.validate()?;
        Ok(p)
    }

    pub fn ball(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::new([x, y, z], Model::Ball)
    }

    pub fn half_space(x1: f64, x2: f64, y: f64) -> Result<Self> {
        Self::new([x1, x2, y], Model::HalfSpace)
    }

    /// The basepoint `o`: ball origin, half-space `(0, 0, 1)`.
    pub fn origin(model: Model) -> Self {
        match model {
            Model::Ball => HPoint { coords: [0.0; 3], model },
            Model::HalfSpace => HPoint { coords: [0.0, 0.0, 1.0], model },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.coords.iter().all(|c| c.is_finite())
            && match self.model {
                Model::Ball => norm2(&self.coords) < 1.0,
                Model::HalfSpace => self.coords[2] > 0.0,
            };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain { coords: self.coords, model: self.model.name() })
        }
    }

    pub fn to_hyperboloid(&self) -> [f64; 4] {
        let c = &self.coords;
        match self.model {
            Model::Ball => {
                let n2 = norm2(c);
                let d = 1.0 - n2;
                [(1.0 + n2) / d, 2.0 * c[0] / d, 2.0 * c[1] / d, 2.0 * c[2] / d]
            }
            Model::HalfSpace => {
                let y = c[2];
                let s = c[0] * c[0] + c[1] * c[1] + y * y;
                [(s + 1.0) / (2.0 * y), c[0] / y, c[1] / y, (s - 1.0) / (2.0 * y)]
            }
        }
    }

    pub fn from_hyperboloid(x: [f64; 4], model: Model) -> Self {
        match model {
            Model::Ball => {
                let d = 1.0 + x[0];
                HPoint { coords: [x[1] / d, x[2] / d, x[3] / d], model }
            }
            Model::HalfSpace => {
                // X0 − X3 = 1/y; written via the spatial norm to avoid
                // cancellation when X3 ≈ X0.
                let s2 = x[1] * x[1] + x[2] * x[2];
                let inv_y = if x[3] > 0.0 { (1.0 + s2) / (x[0] + x[3]) } else { x[0] - x[3] };
                let y = 1.0 / inv_y;
                HPoint { coords: [x[1] * y, x[2] * y, y], model }
            }
        }
    }
}

fn norm2(c: &[f64; 3]) -> f64 {
    c[0] * c[0] + c[1] * c[1] + c[2] * c[2]
}

fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

pub fn convert(a: &HPoint, target: Model) -> Result<HPoint> {
    a.validate()?;
    if a.model == target {
        return Ok(*a);
    }
    let out = HPoint::from_hyperboloid(a.to_hyperboloid(), target);
    out.validate()?;
    Ok(out)
}

/// Hyperbolic distance. Uses `2 asinh(...)` forms of the closed-form
/// `arccosh` identities, which stay accurate for nearby points.
pub fn dist(a: &HPoint, b: &HPoint) -> Result<f64> {
    a.validate()?;
    let b = convert(b, a.model)?;
    let e2 = dist2(&a.coords, &b.coords);
    let d = match a.model {
        Model::HalfSpace => 2.0 * (e2.sqrt() / (2.0 * (a.coords[2] * b.coords[2]).sqrt())).asinh(),
        Model::Ball => {
            let den = ((1.0 - norm2(&a.coords)) * (1.0 - norm2(&b.coords))).sqrt();
            2.0 * (e2.sqrt() / den).asinh()
        }
    };
    Ok(d)
}

/// Isometries needed by the construction: identity and the half-space map
/// `(x, y) ↦ (x_p + y_p x, y_p y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Isometry {
    Identity,
    HalfSpaceTranslation { x_p: [f64; 2], y_p: f64 },
}

impl Isometry {
    /// Image of `a`, returned in the half-space model.
    pub fn apply(&self, a: &HPoint) -> Result<HPoint> {
        let h = convert(a, Model::HalfSpace)?;
        Ok(match *self {
            Isometry::Identity => h,
            Isometry::HalfSpaceTranslation { x_p, y_p } => HPoint {
                coords: [x_p[0] + y_p * h.coords[0], x_p[1] + y_p * h.coords[1], y_p * h.coords[2]],
                model: Model::HalfSpace,
            },
        })
    }

    pub fn inverse(&self) -> Isometry {
        match *self {
            Isometry::Identity => Isometry::Identity,
            Isometry::HalfSpaceTranslation { x_p, y_p } => Isometry::HalfSpaceTranslation {
                x_p: [-x_p[0] / y_p, -x_p[1] / y_p],
                y_p: 1.0 / y_p,
            },
        }
    }
}

/// The translation `F` with `F(o) = p`.
pub fn translate_to(p: &HPoint) -> Result<Isometry> {
    let h = convert(p, Model::HalfSpace)?;
    let [x1, x2, y] = h.coords;
    if x1 == 0.0 && x2 == 0.0 && y == 1.0 {
        return Ok(Isometry::Identity);
    }
    Ok(Isometry::HalfSpaceTranslation { x_p: [x1, x2], y_p: y })
}

/// Lorentz boost taking the hyperboloid origin to `x`, applied to `v`.
fn boost(x: &[f64; 4], v: &[f64; 4], inverse: bool) -> [f64; 4] {
    let s = (x[1] * x[1] + x[2] * x[2] + x[3] * x[3]).sqrt();
    if s == 0.0 {
        return *v;
    }
    let u = [x[1] / s, x[2] / s, x[3] / s];
    let (ch, sh) = (x[0], if inverse { -s } else { s });
    let par = u[0] * v[1] + u[1] * v[2] + u[2] * v[3];
    let t = ch * v[0] + sh * par;
    let par_new = sh * v[0] + ch * par;
    let dpar = par_new - par;
    [t, v[1] + dpar * u[0], v[2] + dpar * u[1], v[3] + dpar * u[2]]
}

/// Geodesic polar chart about `center`. `axis` is a unit vector in the
/// tangent frame at the hyperboloid origin, carried to `center` by the pure
/// boost; θ is measured from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarChart {
    pub center: HPoint,
    pub axis: [f64; 3],
}

impl PolarChart {
    pub fn new(center: HPoint, axis: [f64; 3]) -> Result<Self> {
        center.validate()?;
        let n = norm2(&axis).sqrt();
        if !(n > 0.0) {
            return Err(Error::Parse("polar chart axis must be nonzero".into()));
        }
        Ok(PolarChart { center, axis: [axis[0] / n, axis[1] / n, axis[2] / n] })
    }

    fn perp(&self) -> [f64; 3] {
        let a = self.axis;
        let r = if a[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let d = a[0] * r[0] + a[1] * r[1] + a[2] * r[2];
        let p = [r[0] - d * a[0], r[1] - d * a[1], r[2] - d * a[2]];
        let n = norm2(&p).sqrt();
        [p[0] / n, p[1] / n, p[2] / n]
    }

    pub fn polar_to_point(&self, rho: f64, theta: f64) -> HPoint {
        let e = self.perp();
        let (st, ct) = theta.sin_cos();
        let (sh, ch) = (rho.sinh(), rho.cosh());
        let n = [ct * self.axis[0] + st * e[0], ct * self.axis[1] + st * e[1], ct * self.axis[2] + st * e[2]];
        let v = [ch, sh * n[0], sh * n[1], sh * n[2]];
        let x = boost(&self.center.to_hyperboloid(), &v, false);
        HPoint::from_hyperboloid(x, self.center.model)
    }

    pub fn point_to_polar(&self, q: &HPoint) -> Result<(f64, f64)> {
        let q = convert(q, self.center.model)?;
        let rho = dist(&self.center, &q)?;
        let y = boost(&self.center.to_hyperboloid(), &q.to_hyperboloid(), true);
        let s = [y[1], y[2], y[3]];
        let a = self.axis;
        let along = s[0] * a[0] + s[1] * a[1] + s[2] * a[2];
        let cross = [s[1] * a[2] - s[2] * a[1], s[2] * a[0] - s[0] * a[2], s[0] * a[1] - s[1] * a[0]];
        let theta = norm2(&cross).sqrt().atan2(along);
        Ok((rho, theta))
    }
}

/// Fermi (cylindrical) coordinates about the half-space vertical geodesic,
/// with `z = 0` at height `e^{z0}`: `z` is arclength along the axis
/// (increasing with height), `r` the distance to the axis.
///
/// Metric: `cosh²r dz² + dr² + sinh²r dφ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxialFrame {
    pub z0: f64,
}

impl AxialFrame {
    pub fn to_point(&self, z: f64, r: f64, phi: f64) -> HPoint {
        let y = [r.cosh() * z.cosh(), r.sinh() * phi.cos(), r.sinh() * phi.sin(), r.cosh() * z.sinh()];
        let (c, s) = (self.z0.cosh(), self.z0.sinh());
        let x = [c * y[0] + s * y[3], y[1], y[2], s * y[0] + c * y[3]];
        HPoint::from_hyperboloid(x, Model::HalfSpace)
    }

    /// `(z, r)` of a point (azimuth dropped).
    pub fn from_point(&self, q: &HPoint) -> Result<(f64, f64)> {
        let h = convert(q, Model::HalfSpace)?;
        let [x1, x2, y] = h.coords;
        // distance to the vertical axis and position along it
        let rr = (x1 * x1 + x2 * x2).sqrt();
        let r = (rr / y).asinh();
        let z = 0.5 * (x1 * x1 + x2 * x2 + y * y).ln() - self.z0;
        Ok((z, r))
    }

    /// Point on the axis at arclength `z`.
    pub fn axis_point(&self, z: f64) -> HPoint {
        HPoint { coords: [0.0, 0.0, (self.z0 + z).exp()], model: Model::HalfSpace }
    }
}

/// `cosh d − 1` between `(z, r)` and the axis point at `zc`, written as a
/// sum of nonnegative terms.
pub fn axial_cosh_minus_one(z: f64, r: f64, zc: f64) -> f64 {
    let dz = z - zc;
    2.0 * (0.5 * r).sinh().powi(2) * dz.cosh() + 2.0 * (0.5 * dz).sinh().powi(2)
}

pub fn axial_distance(z: f64, r: f64, zc: f64) -> f64 {
    let q = axial_cosh_minus_one(z, r, zc);
    2.0 * (0.5 * q).sqrt().asinh()
}

/// Polar coordinates `(ρ, θ)` of `(z, r)` about the axis point `zc`, with θ
/// measured from the `+z` direction.
pub fn axial_to_polar(z: f64, r: f64, zc: f64) -> (f64, f64) {
    let dz = z - zc;
    let rho = axial_distance(z, r, zc);
    let theta = r.sinh().atan2(r.cosh() * dz.sinh());
    (rho, theta)
}

/// Inverse of [`axial_to_polar`].
pub fn polar_to_axial(rho: f64, theta: f64, zc: f64) -> (f64, f64) {
    let (st, ct) = theta.sin_cos();
    let r = (rho.sinh() * st).asinh();
    // tanh(dz) = tanh(ρ) cos θ, written so 1 ± tanh(dz) never cancels
    let e = 2.0 / ((2.0 * rho).exp() + 1.0);
    let (hs, hc) = (0.5 * theta).sin_cos();
    let one_minus = if ct >= 0.0 { 2.0 * hs * hs + ct * e } else { 1.0 - rho.tanh() * ct };
    let one_plus = if ct <= 0.0 { 2.0 * hc * hc - ct * e } else { 1.0 + rho.tanh() * ct };
    let dz = 0.5 * (one_plus / one_minus).ln();
    (zc + dz, r)
}
