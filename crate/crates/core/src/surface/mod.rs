//! Closed surface models with distances, tangent frames and Green's functions.
//!
//! Every point is stored as a `Vector3<f64>`:
//! - sphere and projective plane: a unit vector (for the projective plane, either lift);
//! - torus: `(x, y, 0)` with `x + iy` in the fundamental parallelogram.
//!
//! Green's functions are normalized to have zero mean over the surface, so the
//! regular part `H(x, p) = G(x, p) + log d(x, p) / (2 pi)` is reproducible.

mod stereo;
pub mod torus;

use std::f64::consts::PI;

use nalgebra::Vector3;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

pub use stereo::{from_stereo, stereo_distance, to_stereo, ExtComplex};
pub use torus::Torus;

pub type Point = Vector3<f64>;
pub type Tangent = Vector3<f64>;

/// Pairs closer than this are treated as colliding.
pub const COLLISION_TOL: f64 = 1e-9;

/// Accepted deviation from unit norm for sphere and projective-plane inputs.
pub const UNIT_NORM_TOL: f64 = 1e-8;

const INV_2PI: f64 = 1.0 / (2.0 * PI);
const INV_4PI: f64 = 1.0 / (4.0 * PI);

/// The three supported closed surfaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Surface {
    /// Round unit sphere, area `4 pi`, curvature `1`.
    Sphere,
    /// Flat torus `C / (Z + tau Z)`, area `Im tau`, curvature `0`.
    Torus(Torus),
    /// Quotient of the unit sphere by the antipodal map, area `2 pi`, curvature `1`.
    Projective,
}

impl Surface {
    pub fn torus(tau: Complex64) -> Result<Self> {
        Ok(Surface::Torus(Torus::new(tau)?))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Surface::Sphere => "sphere",
            Surface::Torus(_) => "torus",
            Surface::Projective => "projective",
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Surface::Sphere => 4.0 * PI,
            Surface::Torus(t) => t.area(),
            Surface::Projective => 2.0 * PI,
        }
    }

    pub fn gaussian_curvature(&self, _x: &Point) -> f64 {
        match self {
            Surface::Sphere | Surface::Projective => 1.0,
            Surface::Torus(_) => 0.0,
        }
    }

    pub fn euler_characteristic(&self) -> i32 {
        match self {
            Surface::Sphere => 2,
            Surface::Torus(_) => 0,
            Surface::Projective => 1,
        }
    }

    /// Whether the model lives on the unit sphere (directly or as a double cover).
    pub fn is_spherical(&self) -> bool {
        !matches!(self, Surface::Torus(_))
    }

    /// Checks a point and returns its normalized representative.
    pub fn validate(&self, x: &Point) -> Result<Point> {
        if !x.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidPoint(format!("non-finite coordinates {x:?}")));
        }
        match self {
            Surface::Sphere | Surface::Projective => {
                let n = x.norm();
                if (n - 1.0).abs() > UNIT_NORM_TOL {
                    return Err(Error::InvalidPoint(format!(
                        "expected a unit vector, got norm {n}"
                    )));
                }
                Ok(x / n)
            }
            Surface::Torus(t) => {
                if x.z != 0.0 {
                    return Err(Error::InvalidPoint(format!(
                        "torus points must have zero third coordinate, got {}",
                        x.z
                    )));
                }
                let z = t.reduce(Complex64::new(x.x, x.y));
                Ok(Vector3::new(z.re, z.im, 0.0))
            }
        }
    }

    /// Canonical representative: first nonzero coordinate positive on the
    /// projective plane, fundamental-domain reduction on the torus.
    pub fn canonical(&self, x: &Point) -> Point {
        match self {
            Surface::Sphere => *x,
            Surface::Projective => projective_canonical(x),
            Surface::Torus(t) => {
                let z = t.reduce(Complex64::new(x.x, x.y));
                Vector3::new(z.re, z.im, 0.0)
            }
        }
    }

    pub fn geodesic_distance(&self, x: &Point, y: &Point) -> Result<f64> {
        let x = self.validate(x)?;
        let y = self.validate(y)?;
        Ok(self.dist(&x, &y))
    }

    /// Distance without input validation.
    pub fn dist(&self, x: &Point, y: &Point) -> f64 {
        match self {
            Surface::Sphere => sphere_angle(x, y),
            Surface::Projective => {
                let a = sphere_angle(x, y);
                a.min(PI - a)
            }
            Surface::Torus(t) => t.distance(Complex64::new(x.x, x.y), Complex64::new(y.x, y.y)),
        }
    }

    pub fn greens(&self, x: &Point, p: &Point) -> Result<f64> {
        let d = self.dist(x, p);
        if d < COLLISION_TOL {
            return Err(Error::singular("Green's function evaluated on its pole", d));
        }
        Ok(self.greens_unchecked(x, p))
    }

    pub(crate) fn greens_unchecked(&self, x: &Point, p: &Point) -> f64 {
        match self {
            Surface::Sphere => sphere_greens(x, p),
            Surface::Projective => sphere_greens(x, p) + sphere_greens(x, &-p),
            Surface::Torus(t) => t.greens(Complex64::new(x.x - p.x, x.y - p.y)),
        }
    }

    /// Regular part `H(x, p)`, defined also on the diagonal.
    pub fn greens_regular(&self, x: &Point, p: &Point) -> f64 {
        match self {
            Surface::Sphere => sphere_regular(x, p),
            Surface::Projective => {
                let lift = if x.dot(p) >= 0.0 { *p } else { -p };
                sphere_regular(x, &lift) + sphere_greens(x, &-lift)
            }
            Surface::Torus(t) => t.regular(Complex64::new(x.x - p.x, x.y - p.y)),
        }
    }

    /// Constant value of `H(x, x)`.
    pub fn diagonal_regular(&self) -> f64 {
        match self {
            Surface::Sphere => (2.0 * std::f64::consts::LN_2 - 1.0) * INV_4PI,
            Surface::Projective => (std::f64::consts::LN_2 - 1.0) * INV_2PI,
            Surface::Torus(t) => t.diagonal_regular(),
        }
    }

    /// Gradient of `G(., p)` at `x`, as a tangent vector at `x`.
    pub fn grad_greens(&self, x: &Point, p: &Point) -> Result<Tangent> {
        let d = self.dist(x, p);
        if d < COLLISION_TOL {
            return Err(Error::singular("Green's gradient evaluated on its pole", d));
        }
        Ok(self.grad_greens_unchecked(x, p))
    }

    pub(crate) fn grad_greens_unchecked(&self, x: &Point, p: &Point) -> Tangent {
        match self {
            Surface::Sphere => sphere_grad(x, p),
            Surface::Projective => sphere_grad(x, p) + sphere_grad(x, &-p),
            Surface::Torus(t) => {
                let g = t.grad_greens(Complex64::new(x.x - p.x, x.y - p.y));
                Vector3::new(g.re, g.im, 0.0)
            }
        }
    }

    /// Orthonormal tangent frame at `x`.
    pub fn frame(&self, x: &Point) -> [Tangent; 2] {
        match self {
            Surface::Torus(_) => [Vector3::x(), Vector3::y()],
            _ => {
                let a = x.iamin();
                let mut axis = Vector3::zeros();
                axis[a] = 1.0;
                let e1 = (axis - x * x.dot(&axis)).normalize();
                let e2 = x.cross(&e1);
                [e1, e2]
            }
        }
    }

    /// Orthogonal projection of an ambient vector onto the tangent plane at `x`.
    pub fn project_tangent(&self, x: &Point, v: &Tangent) -> Tangent {
        match self {
            Surface::Torus(_) => Vector3::new(v.x, v.y, 0.0),
            _ => v - x * x.dot(v),
        }
    }

    /// Exponential map: follows the geodesic from `x` with initial velocity `v`.
    pub fn exp(&self, x: &Point, v: &Tangent) -> Point {
        match self {
            Surface::Torus(t) => {
                let z = t.reduce(Complex64::new(x.x + v.x, x.y + v.y));
                Vector3::new(z.re, z.im, 0.0)
            }
            _ => {
                let n = v.norm();
                if n < 1e-300 {
                    return *x;
                }
                (x * n.cos() + v * (n.sin() / n)).normalize()
            }
        }
    }

    /// Retraction back onto the surface after an ambient update.
    pub fn retract(&self, x: &Point) -> Point {
        match self {
            Surface::Torus(t) => {
                let z = t.reduce(Complex64::new(x.x, x.y));
                Vector3::new(z.re, z.im, 0.0)
            }
            _ => x.normalize(),
        }
    }

    /// Rotation of a tangent vector by `+pi/2`.
    pub fn rotate(&self, x: &Point, v: &Tangent) -> Tangent {
        match self {
            Surface::Torus(_) => Vector3::new(-v.y, v.x, 0.0),
            _ => x.cross(v),
        }
    }

    /// Uniformly distributed point with respect to the area measure.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match self {
            Surface::Torus(t) => {
                let s: f64 = rng.random();
                let u: f64 = rng.random();
                let z = t.reduce(Complex64::new(s, 0.0) + t.tau() * u);
                Vector3::new(z.re, z.im, 0.0)
            }
            _ => {
                let z: f64 = rng.random_range(-1.0..1.0);
                let phi: f64 = rng.random_range(0.0..2.0 * PI);
                let r = (1.0 - z * z).max(0.0).sqrt();
                let p = Vector3::new(r * phi.cos(), r * phi.sin(), z);
                if matches!(self, Surface::Projective) {
                    projective_canonical(&p)
                } else {
                    p
                }
            }
        }
    }
}

/// Lexicographic sign rule: the first nonzero coordinate is made positive.
pub fn projective_canonical(x: &Point) -> Point {
    for c in x.iter() {
        if *c > 0.0 {
            return *x;
        }
        if *c < 0.0 {
            return -x;
        }
    }
    *x
}

fn sphere_angle(x: &Point, y: &Point) -> f64 {
    x.cross(y).norm().atan2(x.dot(y))
}

/// `-(1/4pi) log((1 - x.p)/2) - 1/(4pi)`, written through the chord for accuracy.
fn sphere_greens(x: &Point, p: &Point) -> f64 {
    let chord = (x - p).norm();
    -INV_2PI * (0.5 * chord).ln() - INV_4PI
}

fn sphere_regular(x: &Point, p: &Point) -> f64 {
    let theta = sphere_angle(x, p);
    let half = 0.5 * theta;
    let ratio = if half < 1e-8 { 1.0 + half * half / 6.0 } else { half / half.sin() };
    INV_2PI * ratio.ln() + (2.0 * std::f64::consts::LN_2 - 1.0) * INV_4PI
}

fn sphere_grad(x: &Point, p: &Point) -> Tangent {
    let tangential = p - x * x.dot(p);
    let denom = 0.5 * (x - p).norm_squared();
    tangential * (INV_4PI / denom)
}
