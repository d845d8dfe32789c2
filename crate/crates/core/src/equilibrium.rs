//! Multi-start search for critical points of the reduced Hamiltonian inside `{Phi < M}`,
//! with finite-difference Hessian inertia.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::energy::{check_compactness, System, VortexConfig};
use crate::error::{Error, Result};
use crate::surface::{Point, Tangent};

/// Relative eigenvalue threshold below which a Hessian direction counts as degenerate.
pub const ZERO_EIGEN_REL: f64 = 1e-6;
/// Reports closer than this (largest per-vortex distance) are merged.
pub const DEDUP_DIST: f64 = 1e-4;
/// Finite-difference step for Jacobians and Hessians.
pub const FD_HESSIAN_STEP: f64 = 1e-6;
const MAX_SEED_TRIES: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOptions {
    /// Upper level `M` of the domain `{Phi < M}`.
    pub m_level: f64,
    pub starts: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            m_level: 10.0,
            starts: 50,
            seed: 0,
            tol: 1e-8,
            max_iter: 200,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub inertia: Inertia,
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPointReport {
    pub positions: Vec<[f64; 3]>,
    pub gamma: Vec<f64>,
    pub energy: f64,
    pub phi_value: f64,
    pub grad_norm: f64,
    /// Gradient norm recomputed from central differences of the energy.
    pub fd_grad_norm: f64,
    pub inertia: Inertia,
    pub eigenvalues: Vec<f64>,
    pub seed: u64,
    /// Index of the start that produced this point.
    pub start: usize,
}

impl CriticalPointReport {
    pub fn config(&self) -> VortexConfig {
        VortexConfig {
            positions: self.positions.iter().map(|p| Point::new(p[0], p[1], p[2])).collect(),
            strengths: self.gamma.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchStats {
    pub starts: usize,
    pub converged: usize,
    pub duplicates: usize,
    pub failed_seeds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub points: Vec<CriticalPointReport>,
    pub stats: SearchStats,
}

/// Whether `cfg` is admissible and `Phi(cfg) < M`.
pub fn in_domain(system: &System, cfg: &VortexConfig, m_level: f64) -> bool {
    system.phi(cfg).is_ok_and(|phi| phi < m_level)
}

/// Finds critical points of the reduced Hamiltonian for vortices of strengths `gammas`.
pub fn find_critical_points(system: &System, gammas: &[f64], opts: &SearchOptions) -> Result<SearchResult> {
    if gammas.is_empty() || gammas.iter().any(|g| !(*g > 0.0)) {
        return Err(Error::validation("strengths must be positive and nonempty"));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::validation("tolerance must be positive"));
    }
    for (i, a) in system.sources.strengths().iter().enumerate() {
        let c = check_compactness(gammas, *a, 1e-9)?;
        if !c.holds {
            return Err(Error::validation(format!(
                "alpha[{i}] = {a} matches the strength ratio of vortex subset {:?}",
                c.closest_subset
            )));
        }
    }
    let run = || -> Vec<Outcome> {
        (0..opts.starts)
            .into_par_iter()
            .map(|start| search_one(system, gammas, opts, start))
            .collect()
    };
    let outcomes = match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };

    let mut stats = SearchStats {
        starts: opts.starts,
        converged: 0,
        duplicates: 0,
        failed_seeds: 0,
    };
    let mut kept: Vec<CriticalPointReport> = Vec::new();
    for outcome in outcomes {
        match outcome {
            Outcome::NoSeed => stats.failed_seeds += 1,
            Outcome::Diverged => {}
            Outcome::Converged(report) => {
                stats.converged += 1;
                let cfg = report.config();
                if kept
                    .iter()
                    .any(|k| config_distance(system, &k.config(), &cfg) < DEDUP_DIST)
                {
                    stats.duplicates += 1;
                } else {
                    kept.push(*report);
                }
            }
        }
    }
    kept.sort_by(|a, b| {
        a.energy
            .total_cmp(&b.energy)
            .then_with(|| lex_cmp(&a.positions, &b.positions))
    });
    Ok(SearchResult { points: kept, stats })
}

fn lex_cmp(a: &[[f64; 3]], b: &[[f64; 3]]) -> Ordering {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Largest per-vortex distance after greedily matching vortices of equal strength.
pub fn config_distance(system: &System, a: &VortexConfig, b: &VortexConfig) -> f64 {
    let s = &system.surface;
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for (x, g) in a.positions.iter().zip(&a.strengths) {
        let best = (0..b.len())
            .filter(|k| !used[*k] && b.strengths[*k] == *g)
            .map(|k| (k, s.dist(x, &b.positions[k])))
            .min_by(|p, q| p.1.total_cmp(&q.1));
        match best {
            Some((k, d)) => {
                used[k] = true;
                worst = worst.max(d);
            }
            None => return f64::INFINITY,
        }
    }
    worst
}

enum Outcome {
    NoSeed,
    Diverged,
    Converged(Box<CriticalPointReport>),
}

fn start_rng(seed: u64, start: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(start as u64);
    rng
}

fn search_one(system: &System, gammas: &[f64], opts: &SearchOptions, start: usize) -> Outcome {
    let mut rng = start_rng(opts.seed, start);
    let s = &system.surface;
    let mut initial = None;
    for _ in 0..MAX_SEED_TRIES {
        let cfg = VortexConfig {
            positions: gammas.iter().map(|_| s.random_point(&mut rng)).collect(),
            strengths: gammas.to_vec(),
        };
        if in_domain(system, &cfg, opts.m_level) {
            initial = Some(cfg);
            break;
        }
    }
    let Some(cfg) = initial else {
        return Outcome::NoSeed;
    };
    match polish(system, &cfg, opts.tol, opts.max_iter) {
        Some(cfg) => match report(system, cfg, opts, start) {
            Some(r) if r.grad_norm < opts.tol && r.phi_value < opts.m_level => Outcome::Converged(Box::new(r)),
            _ => Outcome::Diverged,
        },
        None => Outcome::Diverged,
    }
}

fn report(system: &System, cfg: VortexConfig, opts: &SearchOptions, start: usize) -> Option<CriticalPointReport> {
    let s = &system.surface;
    let cfg = cfg.with_positions(cfg.positions.iter().map(|p| s.canonical(p)).collect());
    let grad_norm = grad_norm(system, &cfg);
    let classification = classify(system, &cfg, FD_HESSIAN_STEP).ok()?;
    Some(CriticalPointReport {
        positions: cfg.positions.iter().map(|p| [p.x, p.y, p.z]).collect(),
        gamma: cfg.strengths.clone(),
        energy: system.hamiltonian_reduced(&cfg).ok()?,
        phi_value: system.phi(&cfg).ok()?,
        grad_norm,
        fd_grad_norm: fd_grad_norm(system, &cfg, 1e-6),
        inertia: classification.inertia,
        eigenvalues: classification.eigenvalues,
        seed: opts.seed,
        start,
    })
}

fn grad_norm(system: &System, cfg: &VortexConfig) -> f64 {
    system
        .grad_unchecked(cfg)
        .iter()
        .map(|g| g.norm_squared())
        .sum::<f64>()
        .sqrt()
}

fn fd_grad_norm(system: &System, cfg: &VortexConfig, h: f64) -> f64 {
    let frames = local_frames(system, cfg);
    let n = 2 * cfg.len();
    let mut acc = 0.0;
    for a in 0..n {
        let mut u = DVector::zeros(n);
        u[a] = h;
        let plus = system.energy_unchecked(&displace(system, cfg, &frames, &u));
        let minus = system.energy_unchecked(&displace(system, cfg, &frames, &(-u)));
        acc += ((plus - minus) / (2.0 * h)).powi(2);
    }
    acc.sqrt()
}

fn local_frames(system: &System, cfg: &VortexConfig) -> Vec<[Tangent; 2]> {
    cfg.positions.iter().map(|x| system.surface.frame(x)).collect()
}

fn displace(system: &System, cfg: &VortexConfig, frames: &[[Tangent; 2]], u: &DVector<f64>) -> VortexConfig {
    cfg.with_positions(
        cfg.positions
            .iter()
            .enumerate()
            .map(|(j, x)| {
                let v = frames[j][0] * u[2 * j] + frames[j][1] * u[2 * j + 1];
                system.surface.exp(x, &v)
            })
            .collect(),
    )
}

/// Gradient components in the fixed frames of the base configuration.
fn residual(system: &System, cfg: &VortexConfig, frames: &[[Tangent; 2]]) -> DVector<f64> {
    let g = system.grad_unchecked(cfg);
    DVector::from_iterator(
        2 * cfg.len(),
        g.iter()
            .zip(frames)
            .flat_map(|(g, f)| [g.dot(&f[0]), g.dot(&f[1])]),
    )
}

fn jacobian(system: &System, cfg: &VortexConfig, frames: &[[Tangent; 2]], h: f64) -> Option<DMatrix<f64>> {
    let n = 2 * cfg.len();
    let mut jac = DMatrix::zeros(n, n);
    for b in 0..n {
        let mut u = DVector::zeros(n);
        u[b] = h;
        let plus = displace(system, cfg, frames, &u);
        let minus = displace(system, cfg, frames, &(-u));
        if !system.is_admissible(&plus) || !system.is_admissible(&minus) {
            return None;
        }
        let col = (residual(system, &plus, frames) - residual(system, &minus, frames)) / (2.0 * h);
        jac.set_column(b, &col);
    }
    Some(jac)
}

/// Levenberg-Marquardt on the gradient residual, continuing past `tol` while it still improves.
fn polish(system: &System, cfg: &VortexConfig, tol: f64, max_iter: usize) -> Option<VortexConfig> {
    let mut cfg = cfg.clone();
    let mut mu = 1e-3;
    let max_step = 0.5;
    for _ in 0..max_iter {
        let frames = local_frames(system, &cfg);
        let f = residual(system, &cfg, &frames);
        let norm = f.norm();
        if !norm.is_finite() {
            return None;
        }
        if norm < 1e-3 * tol {
            return Some(cfg);
        }
        let jac = jacobian(system, &cfg, &frames, FD_HESSIAN_STEP)?;
        let jtj = jac.transpose() * &jac;
        let rhs = -(jac.transpose() * &f);
        let scale = jtj.diagonal().max().max(1e-300);
        let mut accepted = false;
        while mu < 1e12 {
            let mut lhs = jtj.clone();
            for d in 0..lhs.nrows() {
                lhs[(d, d)] += mu * scale;
            }
            let Some(mut delta) = lhs.cholesky().map(|c| c.solve(&rhs)) else {
                mu *= 4.0;
                continue;
            };
            let biggest = (0..cfg.len())
                .map(|j| (delta[2 * j].powi(2) + delta[2 * j + 1].powi(2)).sqrt())
                .fold(0.0, f64::max);
            if biggest > max_step {
                delta *= max_step / biggest;
            }
            let trial = displace(system, &cfg, &frames, &delta);
            if system.is_admissible(&trial) {
                let trial_norm = residual(system, &trial, &local_frames(system, &trial)).norm();
                if trial_norm < norm {
                    cfg = trial;
                    mu = (mu / 3.0).max(1e-12);
                    accepted = true;
                    break;
                }
            }
            mu *= 4.0;
        }
        if !accepted {
            return (norm < tol).then_some(cfg);
        }
    }
    (grad_norm(system, &cfg) < tol).then_some(cfg)
}

/// Finite-difference Hessian in local orthonormal frames and its eigenvalue signs.
pub fn classify(system: &System, cfg: &VortexConfig, fd_step: f64) -> Result<Classification> {
    system.check_admissible(cfg)?;
    let frames = local_frames(system, cfg);
    let jac = jacobian(system, cfg, &frames, fd_step)
        .ok_or_else(|| Error::Numerical("finite-difference stencil leaves the admissible set".into()))?;
    let sym = (&jac + jac.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    let largest = eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
    let threshold = ZERO_EIGEN_REL * largest;
    let mut inertia = Inertia {
        negative: 0,
        zero: 0,
        positive: 0,
    };
    for l in &eigenvalues {
        if l.abs() <= threshold {
            inertia.zero += 1;
        } else if *l < 0.0 {
            inertia.negative += 1;
        } else {
            inertia.positive += 1;
        }
    }
    Ok(Classification { inertia, eigenvalues })
}
