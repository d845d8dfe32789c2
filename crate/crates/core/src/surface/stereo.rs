//! Stereographic chart from the north pole and the induced spherical distance on the extended plane.

use nalgebra::Vector3;
use num_complex::Complex64;

use super::Point;

/// A point of the extended complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtComplex {
    Finite(Complex64),
    Infinity,
}

impl From<Complex64> for ExtComplex {
    fn from(z: Complex64) -> Self {
        ExtComplex::Finite(z)
    }
}

/// Projects a unit vector from the north pole; the pole itself maps to infinity.
pub fn to_stereo(x: &Point) -> ExtComplex {
    let denom = 1.0 - x.z;
    if denom <= 0.0 {
        return ExtComplex::Infinity;
    }
    ExtComplex::Finite(Complex64::new(x.x / denom, x.y / denom))
}

pub fn from_stereo(z: ExtComplex) -> Point {
    match z {
        ExtComplex::Infinity => Vector3::new(0.0, 0.0, 1.0),
        ExtComplex::Finite(z) => {
            let r2 = z.norm_sqr();
            Vector3::new(2.0 * z.re, 2.0 * z.im, r2 - 1.0) / (1.0 + r2)
        }
    }
}

/// Geodesic distance of the round metric `4 |dz|^2 / (1 + |z|^2)^2`.
pub fn stereo_distance(z: ExtComplex, w: ExtComplex) -> f64 {
    let half_chord = match (z, w) {
        (ExtComplex::Infinity, ExtComplex::Infinity) => 0.0,
        (ExtComplex::Finite(a), ExtComplex::Infinity) | (ExtComplex::Infinity, ExtComplex::Finite(a)) => {
            1.0 / (1.0 + a.norm_sqr()).sqrt()
        }
        (ExtComplex::Finite(a), ExtComplex::Finite(b)) => {
            (a - b).norm() / ((1.0 + a.norm_sqr()) * (1.0 + b.norm_sqr())).sqrt()
        }
    };
    2.0 * half_chord.min(1.0).asin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn reference_distances() {
        let zero = ExtComplex::Finite(Complex64::new(0.0, 0.0));
        assert!((stereo_distance(zero, ExtComplex::Infinity) - PI).abs() < 1e-15);
        let one = ExtComplex::Finite(Complex64::new(1.0, 0.0));
        let minus = ExtComplex::Finite(Complex64::new(-1.0, 0.0));
        assert!((stereo_distance(one, minus) - PI).abs() < 1e-15);
        assert_eq!(stereo_distance(one, one), 0.0);
    }

    #[test]
    fn chart_round_trip() {
        let x = Vector3::new(0.3, -0.4, 0.5).normalize();
        let y = from_stereo(to_stereo(&x));
        assert!((x - y).norm() < 1e-15);
    }
}
