//! Smooth background fields: the potential `h` and the weight `kappa = exp(log_kappa)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::surface::{Point, Surface, Tangent};

/// Step used by the finite-difference fallbacks.
pub const FD_STEP: f64 = 1e-5;

/// A smooth real function on a surface.
///
/// Only `value` is required; gradients and Laplacians fall back to central
/// differences along geodesics of an orthonormal frame.
pub trait ScalarField: Send + Sync {
    fn value(&self, surface: &Surface, x: &Point) -> f64;

    fn gradient(&self, _surface: &Surface, _x: &Point) -> Option<Tangent> {
        None
    }

    fn laplacian(&self, _surface: &Surface, _x: &Point) -> Option<f64> {
        None
    }
}

/// Built-in fields with closed-form derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum FieldSpec {
    Zero,
    Constant { value: f64 },
    /// `coeff * (axis . x)` on the sphere.
    Linear { axis: [f64; 3], coeff: f64 },
    /// `coeff * (axis . x)^2` on the sphere or projective plane.
    Quadratic { axis: [f64; 3], coeff: f64 },
    /// `amp * cos(2 pi (kx s + ky t))` on the torus, where `z = s + t tau`.
    Cosine { amp: f64, kx: i32, ky: i32 },
}

impl FieldSpec {
    pub fn check(&self, surface: &Surface) -> Result<()> {
        match (self, surface) {
            (FieldSpec::Linear { .. }, Surface::Sphere) => Ok(()),
            (FieldSpec::Linear { .. }, _) => Err(Error::validation(
                "linear fields are only defined on the sphere",
            )),
            (FieldSpec::Quadratic { .. }, Surface::Torus(_)) => Err(Error::validation(
                "quadratic fields are not defined on the torus",
            )),
            (FieldSpec::Cosine { .. }, Surface::Torus(_)) => Ok(()),
            (FieldSpec::Cosine { .. }, _) => Err(Error::validation(
                "cosine fields are only defined on the torus",
            )),
            _ => Ok(()),
        }
    }

    fn torus_wavevector(&self, surface: &Surface) -> Vector3<f64> {
        match (self, surface) {
            (FieldSpec::Cosine { kx, ky, .. }, Surface::Torus(t)) => {
                let tau = t.tau();
                let kx = *kx as f64;
                let ky = *ky as f64;
                Vector3::new(2.0 * PI * kx, 2.0 * PI * (ky - kx * tau.re) / tau.im, 0.0)
            }
            _ => Vector3::zeros(),
        }
    }
}

impl ScalarField for FieldSpec {
    fn value(&self, surface: &Surface, x: &Point) -> f64 {
        match self {
            FieldSpec::Zero => 0.0,
            FieldSpec::Constant { value } => *value,
            FieldSpec::Linear { axis, coeff } => coeff * Vector3::from(*axis).dot(x),
            FieldSpec::Quadratic { axis, coeff } => coeff * Vector3::from(*axis).dot(x).powi(2),
            FieldSpec::Cosine { amp, .. } => {
                let k = self.torus_wavevector(surface);
                amp * k.dot(x).cos()
            }
        }
    }

    fn gradient(&self, surface: &Surface, x: &Point) -> Option<Tangent> {
        let g = match self {
            FieldSpec::Zero | FieldSpec::Constant { .. } => Vector3::zeros(),
            FieldSpec::Linear { axis, coeff } => {
                let a = Vector3::from(*axis);
                (a - x * a.dot(x)) * *coeff
            }
            FieldSpec::Quadratic { axis, coeff } => {
                let a = Vector3::from(*axis);
                (a - x * a.dot(x)) * (2.0 * coeff * a.dot(x))
            }
            FieldSpec::Cosine { amp, .. } => {
                let k = self.torus_wavevector(surface);
                k * (-amp * k.dot(x).sin())
            }
        };
        Some(g)
    }

    fn laplacian(&self, surface: &Surface, x: &Point) -> Option<f64> {
        let l = match self {
            FieldSpec::Zero | FieldSpec::Constant { .. } => 0.0,
            FieldSpec::Linear { axis, coeff } => -2.0 * coeff * Vector3::from(*axis).dot(x),
            FieldSpec::Quadratic { axis, coeff } => {
                let a = Vector3::from(*axis);
                coeff * (2.0 * a.norm_squared() - 6.0 * a.dot(x).powi(2))
            }
            FieldSpec::Cosine { .. } => {
                let k = self.torus_wavevector(surface);
                -k.norm_squared() * self.value(surface, x)
            }
        };
        Some(l)
    }
}

/// Background data: the potential `h` and optionally `log kappa`.
#[derive(Clone)]
pub struct Background {
    h: Arc<dyn ScalarField>,
    log_kappa: Option<Arc<dyn ScalarField>>,
}

impl fmt::Debug for Background {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Background")
            .field("has_log_kappa", &self.log_kappa.is_some())
            .finish()
    }
}

impl Default for Background {
    fn default() -> Self {
        Self::zero()
    }
}

impl Background {
    pub fn zero() -> Self {
        Self {
            h: Arc::new(FieldSpec::Zero),
            log_kappa: None,
        }
    }

    pub fn new(h: Arc<dyn ScalarField>) -> Self {
        Self { h, log_kappa: None }
    }

    pub fn from_spec(surface: &Surface, h: &FieldSpec, log_kappa: Option<&FieldSpec>) -> Result<Self> {
        h.check(surface)?;
        if let Some(k) = log_kappa {
            k.check(surface)?;
        }
        Ok(Self {
            h: Arc::new(h.clone()),
            log_kappa: log_kappa.map(|k| Arc::new(k.clone()) as Arc<dyn ScalarField>),
        })
    }

    pub fn with_log_kappa(mut self, log_kappa: Arc<dyn ScalarField>) -> Self {
        self.log_kappa = Some(log_kappa);
        self
    }

    pub fn h(&self, surface: &Surface, x: &Point) -> f64 {
        self.h.value(surface, x)
    }

    pub fn grad_h(&self, surface: &Surface, x: &Point) -> Tangent {
        self.h
            .gradient(surface, x)
            .map(|g| surface.project_tangent(x, &g))
            .unwrap_or_else(|| fd_gradient(self.h.as_ref(), surface, x))
    }

    pub fn kappa(&self, surface: &Surface, x: &Point) -> f64 {
        self.log_kappa
            .as_ref()
            .map_or(1.0, |k| k.value(surface, x).exp())
    }

    pub fn laplacian_log_kappa(&self, surface: &Surface, x: &Point) -> f64 {
        match &self.log_kappa {
            None => 0.0,
            Some(k) => k
                .laplacian(surface, x)
                .unwrap_or_else(|| fd_laplacian(k.as_ref(), surface, x)),
        }
    }
}

/// Central-difference gradient along geodesics of the tangent frame.
pub fn fd_gradient(f: &dyn ScalarField, surface: &Surface, x: &Point) -> Tangent {
    let mut g = Vector3::zeros();
    for e in surface.frame(x) {
        let plus = f.value(surface, &surface.exp(x, &(e * FD_STEP)));
        let minus = f.value(surface, &surface.exp(x, &(e * -FD_STEP)));
        g += e * ((plus - minus) / (2.0 * FD_STEP));
    }
    g
}

/// Laplace-Beltrami operator via second differences along two orthogonal geodesics.
pub fn fd_laplacian(f: &dyn ScalarField, surface: &Surface, x: &Point) -> f64 {
    let h = 1e-4;
    let f0 = f.value(surface, x);
    surface
        .frame(x)
        .iter()
        .map(|e| {
            let plus = f.value(surface, &surface.exp(x, &(e * h)));
            let minus = f.value(surface, &surface.exp(x, &(e * -h)));
            (plus - 2.0 * f0 + minus) / (h * h)
        })
        .sum()
}
