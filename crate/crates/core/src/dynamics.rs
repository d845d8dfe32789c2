//! Hamiltonian point-vortex flow `Gamma_i d/dt xi_i = J grad_i H` with conservation diagnostics.
//!
//! On the projective plane the flow is integrated on the sphere, i.e. on the double cover.

use std::fmt::Write as _;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::energy::{System, VortexConfig};
use crate::error::{Error, Result};
use crate::surface::{Point, Tangent, COLLISION_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    Rk4,
    Midpoint,
}

/// Velocities `v_i = (1/Gamma_i) J grad_i H`.
pub fn velocity(system: &System, cfg: &VortexConfig) -> Result<Vec<Tangent>> {
    system.check_admissible(cfg)?;
    Ok(velocity_unchecked(system, cfg))
}

fn velocity_unchecked(system: &System, cfg: &VortexConfig) -> Vec<Tangent> {
    let s = &system.surface;
    system
        .grad_unchecked(cfg)
        .iter()
        .zip(&cfg.positions)
        .zip(&cfg.strengths)
        .map(|((g, x), gamma)| s.rotate(x, g) / *gamma)
        .collect()
}

/// Step size, scheme and output options.
#[derive(Debug, Clone, PartialEq)]
pub struct Integrator {
    pub method: Method,
    pub step: f64,
    /// Store one snapshot every this many steps (the final state is always stored).
    pub record_every: usize,
    /// Integrate `-v` instead of `v`.
    pub reverse: bool,
    pub collision_tol: f64,
}

impl Integrator {
    pub fn new(method: Method, step: f64) -> Self {
        Self {
            method,
            step,
            record_every: 1,
            reverse: false,
            collision_tol: COLLISION_TOL,
        }
    }

    pub fn record_every(mut self, n: usize) -> Self {
        self.record_every = n.max(1);
        self
    }

    pub fn reversed(mut self) -> Self {
        self.reverse = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Status {
    Completed,
    /// Halted because two points came closer than the collision tolerance.
    Collision { time: f64, what: String, distance: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<Point>>,
    pub strengths: Vec<f64>,
    pub energies: Vec<f64>,
    /// `sum_j Gamma_j xi_j` in the ambient space.
    pub moments: Vec<Vector3<f64>>,
    pub status: Status,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_config(&self) -> VortexConfig {
        VortexConfig {
            positions: self.states.last().cloned().unwrap_or_default(),
            strengths: self.strengths.clone(),
        }
    }

    /// Largest `|H(t) - H(0)| / (1 + |H(0)|)`.
    pub fn relative_energy_drift(&self) -> f64 {
        let e0 = self.energies[0];
        self.energies
            .iter()
            .map(|e| (e - e0).abs() / (1.0 + e0.abs()))
            .fold(0.0, f64::max)
    }

    /// Largest `|m(t) - m(0)|`.
    pub fn moment_drift(&self) -> f64 {
        let m0 = self.moments[0];
        self.moments.iter().map(|m| (m - m0).norm()).fold(0.0, f64::max)
    }

    /// Header `t,x0,y0,z0,...,energy,mx,my,mz` followed by one row per snapshot.
    pub fn to_csv(&self) -> String {
        let n = self.strengths.len();
        let mut out = String::from("t");
        for j in 0..n {
            let _ = write!(out, ",x{j},y{j},z{j}");
        }
        out.push_str(",energy,mx,my,mz\n");
        for k in 0..self.len() {
            let _ = write!(out, "{:.16e}", self.times[k]);
            for p in &self.states[k] {
                let _ = write!(out, ",{:.16e},{:.16e},{:.16e}", p.x, p.y, p.z);
            }
            let m = self.moments[k];
            let _ = writeln!(
                out,
                ",{:.16e},{:.16e},{:.16e},{:.16e}",
                self.energies[k], m.x, m.y, m.z
            );
        }
        out
    }
}

/// Integrates up to `t_end` with a fixed step.
pub fn integrate(system: &System, cfg: &VortexConfig, t_end: f64, step: f64, method: Method) -> Result<Trajectory> {
    integrate_with(system, cfg, t_end, &Integrator::new(method, step))
}

pub fn integrate_with(system: &System, cfg: &VortexConfig, t_end: f64, opts: &Integrator) -> Result<Trajectory> {
    if !(opts.step > 0.0) || !opts.step.is_finite() {
        return Err(Error::validation(format!("step must be positive, got {}", opts.step)));
    }
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::validation(format!("t_end must be positive, got {t_end}")));
    }
    system.check_admissible(cfg)?;
    let steps = ((t_end / opts.step) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let h = t_end / steps as f64;
    let sign = if opts.reverse { -1.0 } else { 1.0 };
    let s = &system.surface;
    let mut cfg = cfg.clone();

    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        strengths: cfg.strengths.clone(),
        energies: Vec::new(),
        moments: Vec::new(),
        status: Status::Completed,
    };
    let record = |traj: &mut Trajectory, t: f64, cfg: &VortexConfig| {
        traj.times.push(t);
        traj.states.push(cfg.positions.clone());
        traj.energies.push(system.energy_unchecked(cfg));
        traj.moments.push(cfg.moment());
    };
    record(&mut traj, 0.0, &cfg);

    let advance = |base: &VortexConfig, v: &[Tangent], dt: f64| -> VortexConfig {
        base.with_positions(
            base.positions
                .iter()
                .zip(v)
                .map(|(x, v)| s.retract(&(x + v * (sign * dt))))
                .collect(),
        )
    };

    for k in 1..=steps {
        let v1 = velocity_unchecked(system, &cfg);
        let next = match opts.method {
            Method::Midpoint => {
                let mid = advance(&cfg, &v1, 0.5 * h);
                let v2 = velocity_unchecked(system, &mid);
                advance(&cfg, &v2, h)
            }
            Method::Rk4 => {
                let c2 = advance(&cfg, &v1, 0.5 * h);
                let v2 = velocity_unchecked(system, &c2);
                let c3 = advance(&cfg, &v2, 0.5 * h);
                let v3 = velocity_unchecked(system, &c3);
                let c4 = advance(&cfg, &v3, h);
                let v4 = velocity_unchecked(system, &c4);
                let v: Vec<Tangent> = (0..cfg.len())
                    .map(|j| (v1[j] + v2[j] * 2.0 + v3[j] * 2.0 + v4[j]) / 6.0)
                    .collect();
                advance(&cfg, &v, h)
            }
        };
        if next.positions.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::Numerical(format!("non-finite state at step {k}")));
        }
        cfg = next;
        let t = k as f64 * h;
        if let Some((what, distance)) = closest_encounter(system, &cfg, opts.collision_tol) {
            record(&mut traj, t, &cfg);
            traj.status = Status::Collision { time: t, what, distance };
            return Ok(traj);
        }
        if k % opts.record_every == 0 || k == steps {
            record(&mut traj, t, &cfg);
        }
    }
    Ok(traj)
}

fn closest_encounter(system: &System, cfg: &VortexConfig, tol: f64) -> Option<(String, f64)> {
    let s = &system.surface;
    let xs = &cfg.positions;
    for j in 0..xs.len() {
        for k in 0..j {
            let d = s.dist(&xs[j], &xs[k]);
            if d < tol {
                return Some((format!("vortices {k} and {j}"), d));
            }
        }
        for (i, p) in system.sources.positions().iter().enumerate() {
            let d = s.dist(&xs[j], p);
            if d < tol {
                return Some((format!("vortex {j} and source {i}"), d));
            }
        }
    }
    None
}
