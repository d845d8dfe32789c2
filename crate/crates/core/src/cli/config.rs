//! TOML problem configuration and its conversion into module inputs.

use std::path::Path;

use nalgebra::Vector3;
use num_complex::Complex64;
use rand::Rng;
use serde::Deserialize;

use crate::combinatorics::{capacity, CouplingSpec};
use crate::dynamics::Method;
use crate::energy::{Background, FieldSpec, SourceSet, System, VortexConfig};
use crate::error::{Error, Result};
use crate::surface::{Point, Surface};

/// Schema version understood by this build.
pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub version: u32,
    #[serde(default)]
    pub seed: u64,
    pub surface: SurfaceConfig,
    #[serde(default)]
    pub sources: Vec<SourceConfig>,
    pub vortices: Option<VortexSection>,
    #[serde(default)]
    pub background: BackgroundConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub domain: DomainConfig,
    pub simulate: Option<SimulateConfig>,
    #[serde(default)]
    pub search: SearchConfig,
    pub fibers: Option<FiberConfig>,
    pub combinatorics: Option<CombinatoricsConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceKind {
    Sphere,
    Projective,
    Torus,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    pub kind: SurfaceKind,
    /// Lattice parameter `[re, im]` for the torus.
    pub tau: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub position: Vec<f64>,
    pub alpha: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VortexSection {
    /// One strength per vortex, or a single strength repeated `count` times.
    pub gamma: Vec<f64>,
    pub count: Option<usize>,
    pub positions: Option<Vec<Vec<f64>>>,
    /// 1-based source label of each vortex.
    pub groups: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundConfig {
    #[serde(default = "zero_field")]
    pub h: FieldSpec,
    pub log_kappa: Option<FieldSpec>,
}

fn zero_field() -> FieldSpec {
    FieldSpec::Zero
}

impl Default for BackgroundConfig {
    fn default() -> Self {
        Self {
            h: FieldSpec::Zero,
            log_kappa: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub grad: f64,
    pub compactness: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            grad: 1e-8,
            compactness: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainConfig {
    pub m_level: f64,
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self { m_level: 10.0 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub t_end: f64,
    pub step: f64,
    #[serde(default)]
    pub method: Method,
    #[serde(default = "one")]
    pub record_every: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchConfig {
    pub starts: usize,
    pub max_iter: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            starts: 50,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberConfig {
    pub alphas: Vec<f64>,
    /// 1-based sets `J_i`; consecutive when absent.
    pub coupling: Option<Vec<Vec<usize>>>,
    /// 1-based anchor label of each vortex.
    pub groups: Vec<usize>,
    pub strengths: Option<Vec<f64>>,
    pub angles: Option<Vec<f64>>,
    /// Anchor the collapse scan moves towards.
    pub anchor: usize,
    #[serde(default = "default_rho_min")]
    pub rho_min: f64,
    #[serde(default = "default_rho_max")]
    pub rho_max: f64,
    #[serde(default = "default_scan_samples")]
    pub samples: usize,
    #[serde(default = "default_delta_samples")]
    pub delta_samples: usize,
    #[serde(default = "default_delta_rho_min")]
    pub delta_rho_min: f64,
}

fn default_rho_min() -> f64 {
    1e-6
}
fn default_rho_max() -> f64 {
    1e-3
}
fn default_scan_samples() -> usize {
    31
}
fn default_delta_samples() -> usize {
    10_000
}
fn default_delta_rho_min() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CombinatoricsConfig {
    pub alphas: Option<Vec<f64>>,
    pub capacities: Option<Vec<i64>>,
    /// 1-based sets `J_i`.
    pub coupling: Option<Vec<Vec<usize>>>,
    pub counts: Option<Vec<usize>>,
}

impl ProblemConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::validation(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::validation(format!("config: {e}")))?;
        if cfg.version != CONFIG_VERSION {
            return Err(Error::validation(format!(
                "version: expected {CONFIG_VERSION}, got {}",
                cfg.version
            )));
        }
        Ok(cfg)
    }

    pub fn surface(&self) -> Result<Surface> {
        match (self.surface.kind, self.surface.tau) {
            (SurfaceKind::Sphere, None) => Ok(Surface::Sphere),
            (SurfaceKind::Projective, None) => Ok(Surface::Projective),
            (SurfaceKind::Torus, Some([re, im])) => {
                Surface::torus(Complex64::new(re, im)).map_err(|e| at("surface.tau", e))
            }
            (SurfaceKind::Torus, None) => Err(Error::validation("surface.tau: required for the torus")),
            (_, Some(_)) => Err(Error::validation("surface.tau: only allowed for the torus")),
        }
    }

    pub fn system(&self) -> Result<System> {
        let surface = self.surface()?;
        let positions = self
            .sources
            .iter()
            .enumerate()
            .map(|(i, s)| point(&surface, &s.position).map_err(|e| at(&format!("sources[{i}].position"), e)))
            .collect::<Result<Vec<_>>>()?;
        let alphas = self.sources.iter().map(|s| s.alpha).collect();
        let sources = SourceSet::new(&surface, positions, alphas).map_err(|e| at("sources", e))?;
        let background = Background::from_spec(&surface, &self.background.h, self.background.log_kappa.as_ref())
            .map_err(|e| at("background", e))?;
        Ok(System::new(surface, sources, background))
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.sources.iter().map(|s| s.alpha).collect()
    }

    fn vortex_section(&self) -> Result<&VortexSection> {
        self.vortices
            .as_ref()
            .ok_or_else(|| Error::validation("vortices: section required"))
    }

    pub fn gammas(&self) -> Result<Vec<f64>> {
        let v = self.vortex_section()?;
        match (v.gamma.len(), v.count) {
            (0, _) => Err(Error::validation("vortices.gamma: empty")),
            (1, Some(n)) => Ok(vec![v.gamma[0]; n]),
            (len, Some(n)) if len != n => Err(Error::validation(format!(
                "vortices.count: {n} but {len} strengths given"
            ))),
            _ => Ok(v.gamma.clone()),
        }
    }

    /// Configured positions, or positions drawn from `rng` that avoid collisions.
    pub fn vortex_config<R: Rng + ?Sized>(&self, system: &System, rng: &mut R) -> Result<(VortexConfig, bool)> {
        let gammas = self.gammas()?;
        let v = self.vortex_section()?;
        match &v.positions {
            Some(list) => {
                if list.len() != gammas.len() {
                    return Err(Error::validation(format!(
                        "vortices.positions: {} entries for {} vortices",
                        list.len(),
                        gammas.len()
                    )));
                }
                let pts = list
                    .iter()
                    .enumerate()
                    .map(|(j, p)| point(&system.surface, p).map_err(|e| at(&format!("vortices.positions[{j}]"), e)))
                    .collect::<Result<Vec<_>>>()?;
                let cfg = VortexConfig::new(&system.surface, pts, gammas).map_err(|e| at("vortices", e))?;
                Ok((cfg, false))
            }
            None => {
                for _ in 0..10_000 {
                    let pts = gammas.iter().map(|_| system.surface.random_point(rng)).collect();
                    let cfg = VortexConfig::new(&system.surface, pts, gammas.clone())?;
                    if system.is_admissible(&cfg) {
                        return Ok((cfg, true));
                    }
                }
                Err(Error::Numerical("could not sample an admissible configuration".into()))
            }
        }
    }

    /// Per-source vortex counts from `vortices.groups` or `combinatorics.counts`.
    pub fn counts(&self) -> Result<Option<Vec<usize>>> {
        let l = self.sources.len();
        if let Some(groups) = self.vortices.as_ref().and_then(|v| v.groups.as_ref()) {
            let mut c = vec![0; l];
            for (j, g) in groups.iter().enumerate() {
                if *g == 0 || *g > l {
                    return Err(Error::validation(format!(
                        "vortices.groups[{j}]: {g} outside 1..={l}"
                    )));
                }
                c[g - 1] += 1;
            }
            return Ok(Some(c));
        }
        Ok(self.combinatorics.as_ref().and_then(|c| c.counts.clone()))
    }

    pub fn combinatorics(&self) -> Result<&CombinatoricsConfig> {
        self.combinatorics
            .as_ref()
            .ok_or_else(|| Error::validation("combinatorics: section required"))
    }

    /// Capacities from `combinatorics.capacities`, `combinatorics.alphas` or the sources.
    pub fn capacities(&self) -> Result<Vec<i64>> {
        let c = self.combinatorics.as_ref();
        if let Some(a) = c.and_then(|c| c.capacities.clone()) {
            if let Some(i) = a.iter().position(|x| *x < 1) {
                return Err(Error::validation(format!("combinatorics.capacities[{i}]: must be >= 1")));
            }
            return Ok(a);
        }
        let alphas = c.and_then(|c| c.alphas.clone()).unwrap_or_else(|| self.alphas());
        if alphas.is_empty() {
            return Err(Error::validation("combinatorics: give capacities, alphas or sources"));
        }
        capacity(&alphas).map_err(|e| at("combinatorics.alphas", e))
    }

    /// Strengths for the combinatorial commands.
    pub fn combinatoric_alphas(&self) -> Vec<f64> {
        self.combinatorics
            .as_ref()
            .and_then(|c| c.alphas.clone())
            .unwrap_or_else(|| self.alphas())
    }

    pub fn coupling(&self, l: usize) -> Result<Option<CouplingSpec>> {
        match self.combinatorics.as_ref().and_then(|c| c.coupling.as_ref()) {
            Some(sets) => coupling_from_sets(sets, l, "combinatorics.coupling").map(Some),
            None => Ok(None),
        }
    }
}

/// Converts 1-based sets into a coupling over `l` indices.
pub fn coupling_from_sets(sets: &[Vec<usize>], l: usize, path: &str) -> Result<CouplingSpec> {
    if sets.len() != l {
        return Err(Error::validation(format!("{path}: {} sets for {l} sources", sets.len())));
    }
    let mut zero_based = Vec::with_capacity(l);
    for (i, s) in sets.iter().enumerate() {
        let mut set = Vec::with_capacity(s.len());
        for x in s {
            if *x == 0 || *x > l {
                return Err(Error::validation(format!("{path}[{i}]: label {x} outside 1..={l}")));
            }
            set.push(x - 1);
        }
        zero_based.push(set);
    }
    CouplingSpec::new(zero_based).map_err(|e| at(path, e))
}

fn point(surface: &Surface, coords: &[f64]) -> Result<Point> {
    let p = match (surface, coords.len()) {
        (Surface::Torus(_), 2) => Vector3::new(coords[0], coords[1], 0.0),
        (_, 3) => Vector3::new(coords[0], coords[1], coords[2]),
        (_, n) => return Err(Error::validation(format!("expected 3 coordinates (2 on the torus), got {n}"))),
    };
    surface.validate(&p)
}

/// Prefixes validation messages with a config path.
pub fn at(path: &str, e: Error) -> Error {
    match e {
        Error::Validation(m) => Error::Validation(format!("{path}: {m}")),
        Error::InvalidPoint(m) => Error::InvalidPoint(format!("{path}: {m}")),
        other => other,
    }
}
