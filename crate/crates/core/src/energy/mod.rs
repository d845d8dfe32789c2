//! Vortex Hamiltonians, their gradients and the hypothesis checkers.

mod background;
mod conditions;

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::surface::{Point, Surface, Tangent, COLLISION_TOL};

pub use background::{fd_gradient, fd_laplacian, Background, FieldSpec, ScalarField, FD_STEP};
pub use conditions::{
    check_compactness, check_theorem_conditions, CompactnessCheck, ConditionOutcome, ConditionReport,
    ProblemSpec, MAX_COMPACTNESS_N,
};

const INV_2PI: f64 = 1.0 / (2.0 * PI);

/// Fixed singular sources `p_i` with strengths `alpha_i > 0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SourceSet {
    positions: Vec<Point>,
    strengths: Vec<f64>,
}

impl SourceSet {
    pub fn new(surface: &Surface, positions: Vec<Point>, strengths: Vec<f64>) -> Result<Self> {
        if positions.len() != strengths.len() {
            return Err(Error::validation(format!(
                "{} source positions but {} strengths",
                positions.len(),
                strengths.len()
            )));
        }
        if let Some(i) = strengths.iter().position(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::validation(format!(
                "source strength alpha[{i}] = {} must be positive",
                strengths[i]
            )));
        }
        let positions = positions
            .iter()
            .map(|p| surface.validate(p))
            .collect::<Result<Vec<_>>>()?;
        for i in 0..positions.len() {
            for k in 0..i {
                let d = surface.dist(&positions[i], &positions[k]);
                if d < COLLISION_TOL {
                    return Err(Error::singular(format!("sources {k} and {i} coincide"), d));
                }
            }
        }
        Ok(Self {
            positions,
            strengths,
        })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn strengths(&self) -> &[f64] {
        &self.strengths
    }

    /// `Lambda = sum_i alpha_i`.
    pub fn total_strength(&self) -> f64 {
        self.strengths.iter().sum()
    }
}

/// Moving vortices `xi_j` with strengths `Gamma_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct VortexConfig {
    pub positions: Vec<Point>,
    pub strengths: Vec<f64>,
}

impl VortexConfig {
    /// Validates points on `surface` and requires nonzero strengths.
    pub fn new(surface: &Surface, positions: Vec<Point>, strengths: Vec<f64>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::validation("at least one vortex is required"));
        }
        if positions.len() != strengths.len() {
            return Err(Error::validation(format!(
                "{} vortex positions but {} strengths",
                positions.len(),
                strengths.len()
            )));
        }
        if let Some(j) = strengths.iter().position(|g| *g == 0.0 || !g.is_finite()) {
            return Err(Error::validation(format!(
                "vortex strength gamma[{j}] = {} must be finite and nonzero",
                strengths[j]
            )));
        }
        let positions = positions
            .iter()
            .map(|p| surface.validate(p))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            positions,
            strengths,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn with_positions(&self, positions: Vec<Point>) -> Self {
        Self {
            positions,
            strengths: self.strengths.clone(),
        }
    }

    /// `sum_j Gamma_j xi_j` in the ambient space.
    pub fn moment(&self) -> Vector3<f64> {
        self.positions
            .iter()
            .zip(&self.strengths)
            .map(|(x, g)| x * *g)
            .sum()
    }
}

/// Sign selector for the singular part `Psi_+` / `Psi_-`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PsiSign {
    Plus,
    Minus,
}

/// Per-vortex contributions to the quantity `A`.
#[derive(Debug, Clone, Serialize)]
pub struct QuantityA {
    pub value: f64,
    pub weights: Vec<f64>,
    pub brackets: Vec<f64>,
}

/// A surface with sources and background, against which vortex configurations are evaluated.
#[derive(Debug, Clone)]
pub struct System {
    pub surface: Surface,
    pub sources: SourceSet,
    pub background: Background,
}

impl System {
    pub fn new(surface: Surface, sources: SourceSet, background: Background) -> Self {
        Self {
            surface,
            sources,
            background,
        }
    }

    /// Vortices only: no sources, zero background.
    pub fn free(surface: Surface) -> Self {
        Self::new(surface, SourceSet::empty(), Background::zero())
    }

    /// Fails with the first colliding pair if the configuration is outside the admissible set.
    pub fn check_admissible(&self, cfg: &VortexConfig) -> Result<()> {
        let xs = &cfg.positions;
        for j in 0..xs.len() {
            for k in 0..j {
                let d = self.surface.dist(&xs[j], &xs[k]);
                if d < COLLISION_TOL {
                    return Err(Error::singular(format!("vortices {k} and {j} collide"), d));
                }
            }
            for (i, p) in self.sources.positions().iter().enumerate() {
                let d = self.surface.dist(&xs[j], p);
                if d < COLLISION_TOL {
                    return Err(Error::singular(format!("vortex {j} hits source {i}"), d));
                }
            }
        }
        Ok(())
    }

    fn check_reduced(&self, cfg: &VortexConfig) -> Result<()> {
        if let Some(j) = cfg.strengths.iter().position(|g| !(*g > 0.0)) {
            return Err(Error::validation(format!(
                "reduced model requires positive strengths, gamma[{j}] = {}",
                cfg.strengths[j]
            )));
        }
        self.check_admissible(cfg)
    }

    /// Whether all vortices are distinct from each other and from the sources.
    pub fn is_admissible(&self, cfg: &VortexConfig) -> bool {
        self.check_admissible(cfg).is_ok()
    }

    fn pair_sum(&self, cfg: &VortexConfig) -> f64 {
        let xs = &cfg.positions;
        let gs = &cfg.strengths;
        let mut acc = 0.0;
        for j in 0..xs.len() {
            for k in 0..j {
                acc += 2.0 * gs[j] * gs[k] * self.surface.greens_unchecked(&xs[j], &xs[k]);
            }
        }
        acc
    }

    fn source_sum(&self, cfg: &VortexConfig) -> f64 {
        let mut acc = 0.0;
        for (p, a) in self.sources.positions().iter().zip(self.sources.strengths()) {
            for (x, g) in cfg.positions.iter().zip(&cfg.strengths) {
                acc += a * g * self.surface.greens_unchecked(x, p);
            }
        }
        acc
    }

    fn background_sum(&self, cfg: &VortexConfig) -> f64 {
        cfg.positions
            .iter()
            .map(|x| self.background.h(&self.surface, x))
            .sum()
    }

    /// `sum_j Gamma_j^2 H(xi_j, xi_j) + sum_{j != k} Gamma_j Gamma_k G(xi_j, xi_k)`.
    ///
    /// Strengths may have either sign; sources and background are ignored.
    pub fn hamiltonian_free(&self, cfg: &VortexConfig) -> Result<f64> {
        let xs = &cfg.positions;
        for j in 0..xs.len() {
            for k in 0..j {
                let d = self.surface.dist(&xs[j], &xs[k]);
                if d < COLLISION_TOL {
                    return Err(Error::singular(format!("vortices {k} and {j} collide"), d));
                }
            }
        }
        let diag: f64 = xs
            .iter()
            .zip(&cfg.strengths)
            .map(|(x, g)| g * g * self.surface.greens_regular(x, x))
            .sum();
        Ok(diag + self.pair_sum(cfg))
    }

    /// Reduced Hamiltonian `sum_{j != k} G - sum_i alpha_i sum_j Gamma_j G(xi_j, p_i) + sum_j h(xi_j)`.
    pub fn hamiltonian_reduced(&self, cfg: &VortexConfig) -> Result<f64> {
        self.check_reduced(cfg)?;
        Ok(self.pair_sum(cfg) - self.source_sum(cfg) + self.background_sum(cfg))
    }

    /// Same as the reduced Hamiltonian with the source term added instead of subtracted.
    pub fn phi(&self, cfg: &VortexConfig) -> Result<f64> {
        self.check_reduced(cfg)?;
        Ok(self.pair_sum(cfg) + self.source_sum(cfg) + self.background_sum(cfg))
    }

    /// Logarithmic part of the reduced Hamiltonian.
    pub fn psi_pm(&self, cfg: &VortexConfig, sign: PsiSign) -> Result<f64> {
        self.check_reduced(cfg)?;
        let xs = &cfg.positions;
        let gs = &cfg.strengths;
        let mut pairs = 0.0;
        for j in 0..xs.len() {
            for k in 0..j {
                pairs += 2.0 * gs[j] * gs[k] * self.surface.dist(&xs[j], &xs[k]).ln();
            }
        }
        let mut src = 0.0;
        for (p, a) in self.sources.positions().iter().zip(self.sources.strengths()) {
            for (x, g) in xs.iter().zip(gs) {
                src += a * g * self.surface.dist(x, p).ln();
            }
        }
        let s = match sign {
            PsiSign::Plus => 1.0,
            PsiSign::Minus => -1.0,
        };
        Ok(-INV_2PI * pairs + s * INV_2PI * src)
    }

    /// Smooth remainder `reduced Hamiltonian - Psi_+`, assembled from regular parts.
    pub fn regular_sum(&self, cfg: &VortexConfig) -> Result<f64> {
        self.check_reduced(cfg)?;
        let xs = &cfg.positions;
        let gs = &cfg.strengths;
        let mut acc = 0.0;
        for j in 0..xs.len() {
            for k in 0..j {
                acc += 2.0 * gs[j] * gs[k] * self.surface.greens_regular(&xs[j], &xs[k]);
            }
        }
        for (p, a) in self.sources.positions().iter().zip(self.sources.strengths()) {
            for (x, g) in xs.iter().zip(gs) {
                acc -= a * g * self.surface.greens_regular(x, p);
            }
        }
        Ok(acc + self.background_sum(cfg))
    }

    /// Riemannian gradient of the reduced Hamiltonian with respect to each vortex.
    pub fn grad_hamiltonian(&self, cfg: &VortexConfig) -> Result<Vec<Tangent>> {
        self.check_reduced(cfg)?;
        Ok(self.grad_unchecked(cfg))
    }

    pub(crate) fn grad_unchecked(&self, cfg: &VortexConfig) -> Vec<Tangent> {
        let xs = &cfg.positions;
        let gs = &cfg.strengths;
        let s = &self.surface;
        (0..xs.len())
            .map(|j| {
                let mut g = Vector3::zeros();
                for k in 0..xs.len() {
                    if k != j {
                        g += s.grad_greens_unchecked(&xs[j], &xs[k]) * (2.0 * gs[j] * gs[k]);
                    }
                }
                for (p, a) in self.sources.positions().iter().zip(self.sources.strengths()) {
                    g -= s.grad_greens_unchecked(&xs[j], p) * (a * gs[j]);
                }
                g + self.background.grad_h(s, &xs[j])
            })
            .collect()
    }

    /// Reduced Hamiltonian without admissibility checks.
    pub(crate) fn energy_unchecked(&self, cfg: &VortexConfig) -> f64 {
        self.pair_sum(cfg) - self.source_sum(cfg) + self.background_sum(cfg)
    }

    /// The weighted curvature sum `A`, with the self term taken as `H(xi_j, xi_j)`.
    pub fn quantity_a(&self, cfg: &VortexConfig) -> Result<QuantityA> {
        self.check_reduced(cfg)?;
        let s = &self.surface;
        let xs = &cfg.positions;
        let n = xs.len() as f64;
        let lambda = self.sources.total_strength();
        let mut weights = Vec::with_capacity(xs.len());
        let mut brackets = Vec::with_capacity(xs.len());
        for (j, x) in xs.iter().enumerate() {
            let mut exponent = 8.0 * PI * s.greens_regular(x, x);
            for (p, a) in self.sources.positions().iter().zip(self.sources.strengths()) {
                exponent -= 4.0 * PI * a * s.greens_unchecked(x, p);
            }
            for (k, y) in xs.iter().enumerate() {
                if k != j {
                    exponent += 8.0 * PI * s.greens_unchecked(x, y);
                }
            }
            let w = self.background.kappa(s, x) * exponent.exp();
            if !w.is_finite() {
                return Err(Error::Numerical(format!("weight of vortex {j} overflows")));
            }
            weights.push(w);
            brackets.push(
                self.background.laplacian_log_kappa(s, x) + 4.0 * PI * (2.0 * n - lambda) / s.area()
                    - 2.0 * s.gaussian_curvature(x),
            );
        }
        let value = weights.iter().zip(&brackets).map(|(w, b)| w * b).sum();
        Ok(QuantityA {
            value,
            weights,
            brackets,
        })
    }
}
