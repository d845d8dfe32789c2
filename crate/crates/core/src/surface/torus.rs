//! Flat torus `C / (Z + tau Z)`.
//!
//! The Green's function is evaluated through the Jacobi theta product in a
//! Gauss-reduced basis, which keeps the nome small for every admissible modulus.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative size at which theta-product factors are dropped.
pub const PRODUCT_CUTOFF: f64 = 1e-17;

/// Lattice data for the flat torus with unit lattice spacing along the real axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Torus {
    tau: Complex64,
    omega1: Complex64,
    omega2: Complex64,
    tau_red: Complex64,
}

impl Torus {
    pub fn new(tau: Complex64) -> Result<Self> {
        if !(tau.im > 0.0) || !tau.re.is_finite() || !tau.im.is_finite() {
            return Err(Error::validation(format!(
                "torus modulus must have positive imaginary part, got {tau}"
            )));
        }
        let (omega1, omega2) = gauss_reduce(Complex64::new(1.0, 0.0), tau);
        let tau_red = omega2 / omega1;
        if tau_red.im > 150.0 {
            return Err(Error::validation(format!(
                "torus modulus {tau} is too elongated (reduced Im tau = {})",
                tau_red.im
            )));
        }
        Ok(Self {
            tau,
            omega1,
            omega2,
            tau_red,
        })
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    pub fn area(&self) -> f64 {
        self.tau.im
    }

    /// Reduced basis `(omega1, omega2)` with `|omega1| <= |omega2|` and `Im(omega2/omega1) > 0`.
    pub fn reduced_basis(&self) -> (Complex64, Complex64) {
        (self.omega1, self.omega2)
    }

    /// Representative in the half-open parallelogram spanned by `1` and `tau`.
    pub fn reduce(&self, z: Complex64) -> Complex64 {
        let mut t = z.im / self.tau.im;
        let mut s = z.re - t * self.tau.re;
        t -= t.floor();
        s -= s.floor();
        if t >= 1.0 {
            t = 0.0;
        }
        if s >= 1.0 {
            s = 0.0;
        }
        Complex64::new(s, 0.0) + self.tau * t
    }

    /// Whether `z` lies in the half-open fundamental parallelogram.
    pub fn in_fundamental_domain(&self, z: Complex64) -> bool {
        let t = z.im / self.tau.im;
        let s = z.re - t * self.tau.re;
        (0.0..1.0).contains(&t) && (0.0..1.0).contains(&s)
    }

    /// Lattice translate of `z` closest to the origin.
    pub fn nearest_image(&self, z: Complex64) -> Complex64 {
        let w = z / self.omega1;
        let n0 = (w.im / self.tau_red.im).round();
        let m0 = (w.re - n0 * self.tau_red.re).round();
        let mut best = z;
        let mut best_norm = f64::INFINITY;
        for dn in -2..=2 {
            for dm in -2..=2 {
                let cand = z - self.omega1 * (m0 + dm as f64) - self.omega2 * (n0 + dn as f64);
                let nrm = cand.norm_sqr();
                if nrm < best_norm {
                    best_norm = nrm;
                    best = cand;
                }
            }
        }
        best
    }

    pub fn distance(&self, z: Complex64, w: Complex64) -> f64 {
        self.nearest_image(z - w).norm()
    }

    /// Regular part `H(z) = G(z) + log|z|/(2 pi)` at a displacement `z`, continuous at zero.
    pub fn regular(&self, z: Complex64) -> f64 {
        let zn = self.nearest_image(z);
        let w = zn / self.omega1;
        let t = self.tau_red.im;
        -log_theta_ratio_minus_log(w, self.tau_red) / (2.0 * PI)
            + w.im * w.im / (2.0 * t)
            + self.omega1.norm().ln() / (2.0 * PI)
    }

    /// Green's function of `-Laplacian` with zero mean at a nonzero displacement `z`.
    pub fn greens(&self, z: Complex64) -> f64 {
        let d = self.nearest_image(z).norm();
        self.regular(z) - d.ln() / (2.0 * PI)
    }

    /// Gradient of the Green's function with respect to the displacement, as `gx + i gy`.
    pub fn grad_greens(&self, z: Complex64) -> Complex64 {
        let zn = self.nearest_image(z);
        let w = zn / self.omega1;
        let t = self.tau_red.im;
        let grad_w = -log_derivative(w, self.tau_red).conj() / (2.0 * PI) + I * (w.im / t);
        grad_w / self.omega1.conj()
    }

    /// Constant value of the regular part on the diagonal.
    pub fn diagonal_regular(&self) -> f64 {
        self.regular(Complex64::new(0.0, 0.0))
    }
}

/// Gauss-reduces a lattice basis.
pub fn gauss_reduce(mut a: Complex64, mut b: Complex64) -> (Complex64, Complex64) {
    for _ in 0..1000 {
        if b.norm_sqr() < a.norm_sqr() {
            std::mem::swap(&mut a, &mut b);
            continue;
        }
        let m = (b / a).re.round();
        if m == 0.0 {
            break;
        }
        b -= a * m;
    }
    if (b / a).im < 0.0 {
        b = -b;
    }
    (a, b)
}

/// `log|theta_1(pi w | tau) / eta(tau)| - log|w|` for `|Im w| <~ Im tau / 2`.
fn log_theta_ratio_minus_log(w: Complex64, tau: Complex64) -> f64 {
    let y = w.im;
    let lead = std::f64::consts::LN_2 - PI * tau.im / 6.0;
    let sine_part = if w.norm() < 1e-3 {
        // log|sin(pi w)/w| via its Taylor series.
        let pw2 = (w * PI) * (w * PI);
        let ratio = (Complex64::new(1.0, 0.0) - pw2 / 6.0 + pw2 * pw2 / 120.0 - pw2 * pw2 * pw2 / 5040.0) * PI;
        ratio.norm().ln()
    } else {
        let ws = Complex64::new(w.re, y.abs());
        let u = (I * 2.0 * PI * ws).exp();
        PI * y.abs() - std::f64::consts::LN_2 + (Complex64::new(1.0, 0.0) - u).norm().ln() - w.norm().ln()
    };
    lead + sine_part + product_sum(w, tau)
}

fn product_sum(w: Complex64, tau: Complex64) -> f64 {
    let q2 = (I * 2.0 * PI * tau).exp();
    let ep = (I * 2.0 * PI * w).exp();
    let em = (-I * 2.0 * PI * w).exp();
    let one = Complex64::new(1.0, 0.0);
    let mut qn = q2;
    let mut acc = 0.0;
    for _ in 0..200 {
        let a = qn * ep;
        let b = qn * em;
        acc += (one - a).norm().ln() + (one - b).norm().ln();
        if a.norm().max(b.norm()) < PRODUCT_CUTOFF {
            break;
        }
        qn *= q2;
    }
    acc
}

/// `d/dw log(theta_1(pi w | tau))`.
fn log_derivative(w: Complex64, tau: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let cot = if w.im >= 0.0 {
        let u = (I * 2.0 * PI * w).exp();
        -I * (one + u) / (one - u)
    } else {
        let u = (-I * 2.0 * PI * w).exp();
        I * (one + u) / (one - u)
    };
    let mut acc = cot * PI;
    let q2 = (I * 2.0 * PI * tau).exp();
    let ep = (I * 2.0 * PI * w).exp();
    let em = (-I * 2.0 * PI * w).exp();
    let mut qn = q2;
    for _ in 0..200 {
        let a = qn * ep;
        let b = qn * em;
        acc += -I * 2.0 * PI * a / (one - a) + I * 2.0 * PI * b / (one - b);
        if a.norm().max(b.norm()) < PRODUCT_CUTOFF {
            break;
        }
        qn *= q2;
    }
    acc
}
