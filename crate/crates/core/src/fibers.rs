//! Planar fiber geometry around anchors `q_i = i` (with `q_l` at infinity), the planar
//! singular energy and the collapse and separation estimates along fibers.
//!
//! Anchor and group labels are 1-based here, matching `q_i = i`; vortex indices are 0-based.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::combinatorics::CouplingSpec;
use crate::error::{Error, Result};
use crate::surface::{stereo_distance, ExtComplex, COLLISION_TOL};

const INV_2PI: f64 = 1.0 / (2.0 * PI);
/// Geometric tolerance for intersection tests.
const GEOM_TOL: f64 = 1e-9;

/// Anchor `q_i`: the real number `i`, or infinity for `i = l`.
pub fn anchor(l: usize, i: usize) -> ExtComplex {
    if i == l {
        ExtComplex::Infinity
    } else {
        ExtComplex::Finite(Complex64::new(i as f64, 0.0))
    }
}

fn check_pair(l: usize, i: usize, r: usize) -> Result<()> {
    if l < 2 || i == 0 || r == 0 || i > l || r > l || i == r {
        return Err(Error::validation(format!(
            "anchor pair ({i}, {r}) invalid for l = {l}"
        )));
    }
    Ok(())
}

fn unit(w: Complex64) -> Complex64 {
    w / w.norm()
}

/// The map `Upsilon_{i,r}` into the unit circle.
pub fn upsilon(l: usize, i: usize, r: usize, z: Complex64) -> Result<Complex64> {
    check_pair(l, i, r)?;
    for a in [i, r] {
        if let ExtComplex::Finite(q) = anchor(l, a) {
            let d = (z - q).norm();
            if d < COLLISION_TOL {
                return Err(Error::singular(format!("point at anchor q_{a}"), d));
            }
        }
    }
    if r < i {
        return Ok(upsilon(l, r, i, z)?.conj());
    }
    let qi = Complex64::new(i as f64, 0.0);
    if r == l {
        return Ok(unit(z - qi));
    }
    let qr = Complex64::new(r as f64, 0.0);
    if z.re <= 0.5 * (i + r) as f64 {
        Ok(unit(z - qi))
    } else {
        Ok(-unit(z - qr).conj())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    /// Edge leaving the smaller anchor.
    Left,
    /// Edge leaving the larger anchor.
    Right,
}

/// The fiber `L_{i,r}(theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiberSpec {
    pub l: usize,
    pub i: usize,
    pub r: usize,
    pub theta: f64,
}

impl FiberSpec {
    pub fn new(l: usize, i: usize, r: usize, theta: f64) -> Result<Self> {
        check_pair(l, i, r)?;
        if !(theta.abs() < FRAC_PI_2) {
            return Err(Error::validation(format!("fiber angle {theta} outside (-pi/2, pi/2)")));
        }
        Ok(Self { l, i, r, theta })
    }

    /// `(lo, hi, angle)` with `L_{i,r}(theta) = L_{lo,hi}(angle)` and `lo < hi`.
    pub fn normalized(&self) -> (usize, usize, f64) {
        if self.i < self.r {
            (self.i, self.r, self.theta)
        } else {
            (self.r, self.i, -self.theta)
        }
    }

    /// Whether the fiber is a ray towards infinity.
    pub fn is_ray(&self) -> bool {
        self.normalized().1 == self.l
    }

    /// Largest edge parameter; infinite for rays.
    pub fn rho_max(&self) -> f64 {
        let (lo, hi, phi) = self.normalized();
        if hi == self.l {
            f64::INFINITY
        } else {
            (hi - lo) as f64 / (2.0 * phi.cos())
        }
    }

    /// Anchor labels at the ends of the fiber.
    pub fn endpoints(&self) -> [usize; 2] {
        let (lo, hi, _) = self.normalized();
        [lo, hi]
    }

    fn apex(&self) -> Complex64 {
        let (lo, _, phi) = self.normalized();
        Complex64::new(lo as f64, 0.0) + Complex64::from_polar(self.rho_max(), phi)
    }

    /// Point on the fiber at distance `t` from `anchor` along its edge, or at distance `1/t`
    /// from the finite end when `anchor` is infinity.
    pub fn point_near(&self, anchor_label: usize, t: f64) -> Result<Complex64> {
        let (lo, hi, _) = self.normalized();
        if anchor_label == lo {
            fiber_point(self, t, Side::Left)
        } else if anchor_label == hi && hi == self.l {
            fiber_point(self, 1.0 / t, Side::Left)
        } else if anchor_label == hi {
            fiber_point(self, t, Side::Right)
        } else {
            Err(Error::validation(format!(
                "anchor {anchor_label} is not an end of L_{{{},{}}}",
                self.i, self.r
            )))
        }
    }
}

/// `q_lo + rho e^{i theta}` (left) or `q_hi - rho e^{-i theta}` (right) in normalized form.
pub fn fiber_point(spec: &FiberSpec, rho: f64, side: Side) -> Result<Complex64> {
    let (lo, hi, phi) = spec.normalized();
    let max = spec.rho_max();
    if !(rho > 0.0) || rho > max * (1.0 + 1e-12) {
        return Err(Error::OutOfRange(format!("rho = {rho} outside (0, {max}]")));
    }
    match side {
        Side::Right if hi != spec.l => {
            Ok(Complex64::new(hi as f64, 0.0) - Complex64::from_polar(rho, -phi))
        }
        _ => Ok(Complex64::new(lo as f64, 0.0) + Complex64::from_polar(rho, phi)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMode {
    /// Round metric of the stereographic plane, `q_l` at infinity.
    #[default]
    Spherical,
    /// Euclidean distance with every anchor finite, `q_i = i` for all `i`.
    Euclidean,
}

/// Points in the plane with group labels, strengths and anchor strengths.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarConfig {
    pub l: usize,
    pub alphas: Vec<f64>,
    pub points: Vec<ExtComplex>,
    pub strengths: Vec<f64>,
    /// 1-based anchor label of each vortex.
    pub groups: Vec<usize>,
    pub mode: DistanceMode,
}

impl PlanarConfig {
    fn anchor(&self, i: usize) -> ExtComplex {
        match self.mode {
            DistanceMode::Spherical => anchor(self.l, i),
            DistanceMode::Euclidean => ExtComplex::Finite(Complex64::new(i as f64, 0.0)),
        }
    }

    fn dist(&self, a: ExtComplex, b: ExtComplex) -> Result<f64> {
        match self.mode {
            DistanceMode::Spherical => Ok(stereo_distance(a, b)),
            DistanceMode::Euclidean => match (a, b) {
                (ExtComplex::Finite(a), ExtComplex::Finite(b)) => Ok((a - b).norm()),
                _ => Err(Error::validation("euclidean mode needs finite points")),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.points.len();
        if self.alphas.len() != self.l {
            return Err(Error::validation(format!(
                "{} anchor strengths for l = {}",
                self.alphas.len(),
                self.l
            )));
        }
        if self.strengths.len() != n || self.groups.len() != n {
            return Err(Error::validation(format!(
                "{n} points, {} strengths, {} group labels",
                self.strengths.len(),
                self.groups.len()
            )));
        }
        if let Some(g) = self.groups.iter().find(|g| **g == 0 || **g > self.l) {
            return Err(Error::validation(format!("group label {g} outside 1..={}", self.l)));
        }
        for j in 0..n {
            for i in 1..=self.l {
                let d = self.dist(self.points[j], self.anchor(i))?;
                if d < COLLISION_TOL {
                    return Err(Error::singular(format!("point {j} at anchor q_{i}"), d));
                }
            }
            for k in 0..j {
                let d = self.dist(self.points[j], self.points[k])?;
                if d < COLLISION_TOL {
                    return Err(Error::singular(format!("points {k} and {j} collide"), d));
                }
            }
        }
        Ok(())
    }
}

/// `-(1/2pi) sum_{j != k} G_j G_k log d(z_j, z_k) + sum_i (alpha_i/2pi) sum_j G_j log d(z_j, q_i)`.
pub fn psi_planar(cfg: &PlanarConfig) -> Result<f64> {
    cfg.validate()?;
    let n = cfg.points.len();
    let mut pairs = 0.0;
    for j in 0..n {
        for k in 0..j {
            pairs += 2.0 * cfg.strengths[j] * cfg.strengths[k] * cfg.dist(cfg.points[j], cfg.points[k])?.ln();
        }
    }
    let mut anchors = 0.0;
    for i in 1..=cfg.l {
        let q = cfg.anchor(i);
        for j in 0..n {
            anchors += cfg.alphas[i - 1] * cfg.strengths[j] * cfg.dist(cfg.points[j], q)?.ln();
        }
    }
    Ok(INV_2PI * (anchors - pairs))
}

/// Both sides of `2 sum_{j != k} G_j G_k <z_j - z_k, z_j - z> / |z_j - z_k|^2 = sum_{j != k} G_j G_k`.
pub fn inner_product_identity(points: &[Complex64], strengths: &[f64], z: Complex64) -> (f64, f64) {
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for j in 0..points.len() {
        for k in 0..points.len() {
            if j == k {
                continue;
            }
            let w = strengths[j] * strengths[k];
            let d = points[j] - points[k];
            let e = points[j] - z;
            lhs += 2.0 * w * (d.re * e.re + d.im * e.im) / d.norm_sqr();
            rhs += w;
        }
    }
    (lhs, rhs)
}

/// Vortices constrained to fibers `L_{g, r(g)}(theta_j)` of a coupling.
#[derive(Debug, Clone)]
pub struct FiberLayout {
    pub coupling: CouplingSpec,
    /// 1-based anchor label of each vortex.
    pub groups: Vec<usize>,
    pub angles: Vec<f64>,
    pub strengths: Vec<f64>,
    pub alphas: Vec<f64>,
    fibers: Vec<FiberSpec>,
}

impl FiberLayout {
    pub fn new(
        coupling: CouplingSpec,
        groups: Vec<usize>,
        angles: Vec<f64>,
        strengths: Vec<f64>,
        alphas: Vec<f64>,
    ) -> Result<Self> {
        let l = coupling.len();
        let n = groups.len();
        if angles.len() != n || strengths.len() != n {
            return Err(Error::validation(format!(
                "{n} group labels, {} angles, {} strengths",
                angles.len(),
                strengths.len()
            )));
        }
        if alphas.len() != l {
            return Err(Error::validation(format!("{} anchor strengths for l = {l}", alphas.len())));
        }
        let mut fibers = Vec::with_capacity(n);
        for (j, (&g, &theta)) in groups.iter().zip(&angles).enumerate() {
            if g == 0 || g > l {
                return Err(Error::validation(format!("vortex {j}: group {g} outside 1..={l}")));
            }
            if !(theta > 0.0 && theta < FRAC_PI_2) {
                return Err(Error::validation(format!("vortex {j}: angle {theta} outside (0, pi/2)")));
            }
            fibers.push(FiberSpec::new(l, g, coupling.r()[g - 1] + 1, theta)?);
        }
        for j in 0..n {
            for k in 0..j {
                if angles[j] == angles[k] {
                    return Err(Error::validation(format!("vortices {k} and {j} share angle {}", angles[j])));
                }
            }
        }
        Ok(Self {
            coupling,
            groups,
            angles,
            strengths,
            alphas,
            fibers,
        })
    }

    pub fn l(&self) -> usize {
        self.coupling.len()
    }

    pub fn fibers(&self) -> &[FiberSpec] {
        &self.fibers
    }

    /// Vortices whose fiber ends at `q_i`: group `i` and the groups coupled into `i`.
    pub fn collapsing_group(&self, i: usize) -> Vec<usize> {
        (0..self.groups.len())
            .filter(|j| self.fibers[*j].endpoints().contains(&i))
            .collect()
    }

    pub fn config(&self, points: Vec<Complex64>) -> PlanarConfig {
        PlanarConfig {
            l: self.l(),
            alphas: self.alphas.clone(),
            points: points.into_iter().map(ExtComplex::Finite).collect(),
            strengths: self.strengths.clone(),
            groups: self.groups.clone(),
            mode: DistanceMode::Spherical,
        }
    }

    /// Random configuration with every edge parameter log-uniform down to `rho_min`
    /// (and up to `1/rho_min` on rays).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, rho_min: f64) -> Result<PlanarConfig> {
        let points = self
            .fibers
            .iter()
            .map(|f| sample_on_fiber(f, rng, rho_min))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.config(points))
    }
}

fn sample_on_fiber<R: Rng + ?Sized>(f: &FiberSpec, rng: &mut R, rho_min: f64) -> Result<Complex64> {
    let hi = if f.is_ray() { 1.0 / rho_min } else { f.rho_max() };
    let rho = (rng.random_range(rho_min.ln()..=hi.ln())).exp().min(f.rho_max());
    let side = if rng.random::<bool>() { Side::Left } else { Side::Right };
    fiber_point(f, rho, side)
}

/// Angles in `(0, pi/2)` decreasing with `(group, vortex index)`, so outer fibers are steeper.
pub fn nesting_angles(groups: &[usize]) -> Vec<f64> {
    let n = groups.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|j| (groups[*j], *j));
    let mut angles = vec![0.0; n];
    for (rank, j) in order.into_iter().enumerate() {
        angles[j] = FRAC_PI_2 * (n - rank) as f64 / (n + 1) as f64;
    }
    angles
}

/// Least-squares slope of `Psi` against `-log rho` together with its predicted value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollapseSlope {
    pub anchor: usize,
    pub movers: Vec<usize>,
    pub measured: f64,
    /// `(1/2pi) [sum_{j != k} G_j G_k - alpha_i sum_j G_j]` over the collapsing vortices.
    pub predicted: f64,
    pub samples: Vec<(f64, f64)>,
}

impl CollapseSlope {
    pub fn relative_error(&self) -> f64 {
        ((self.measured - self.predicted) / self.predicted).abs()
    }

    /// Header `rho,psi` and one row per sample.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rho,psi\n");
        for (rho, psi) in &self.samples {
            let _ = writeln!(out, "{rho:.16e},{psi:.16e}");
        }
        out
    }
}

/// Collapses every vortex of the group attached to `q_anchor` along its fiber with a common
/// parameter `rho`, the others sitting at the apex of their fiber (or at unit distance on rays).
pub fn collapse_slope(layout: &FiberLayout, anchor_label: usize, rhos: &[f64]) -> Result<CollapseSlope> {
    if rhos.len() < 4 {
        return Err(Error::validation(format!("need at least 4 samples, got {}", rhos.len())));
    }
    if anchor_label == 0 || anchor_label > layout.l() {
        return Err(Error::validation(format!("anchor {anchor_label} outside 1..={}", layout.l())));
    }
    let movers = layout.collapsing_group(anchor_label);
    if movers.is_empty() {
        return Err(Error::validation(format!("no fiber ends at q_{anchor_label}")));
    }
    let parked: Vec<Complex64> = layout
        .fibers()
        .iter()
        .map(|f| if f.is_ray() { fiber_point(f, 1.0, Side::Left) } else { Ok(f.apex()) })
        .collect::<Result<_>>()?;
    let mut samples = Vec::with_capacity(rhos.len());
    for &rho in rhos {
        let mut points = parked.clone();
        for &j in &movers {
            points[j] = layout.fibers()[j].point_near(anchor_label, rho)?;
        }
        samples.push((rho, psi_planar(&layout.config(points))?));
    }
    let xs: Vec<f64> = samples.iter().map(|(r, _)| -r.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|(_, p)| *p).collect();
    let measured = ls_slope(&xs, &ys);
    let g = &layout.strengths;
    let total: f64 = movers.iter().map(|j| g[*j]).sum();
    let squares: f64 = movers.iter().map(|j| g[*j] * g[*j]).sum();
    let predicted = INV_2PI * ((total * total - squares) - layout.alphas[anchor_label - 1] * total);
    Ok(CollapseSlope {
        anchor: anchor_label,
        movers,
        measured,
        predicted,
        samples,
    })
}

/// `n` values log-spaced from `lo` to `hi`.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n.max(2) - 1) as f64).exp())
        .collect()
}

fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeparationKind {
    /// Both ends shared: `d(z_j, z_k) / (d(z_j, q_a) d(z_j, q_b))`.
    BothEnds,
    /// One end `q` shared: `d(z_j, z_k) / max(d(z_j, q), d(z_k, q))`.
    OneEnd,
    /// No shared end: `d(z_j, z_k)`.
    Disjoint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationEstimate {
    pub kind: SeparationKind,
    pub delta: f64,
    pub samples: usize,
}

/// Empirical lower bound of the normalized distance between points of two fibers.
pub fn separation_delta(a: &FiberSpec, b: &FiberSpec, samples: usize, rho_min: f64, seed: u64) -> Result<SeparationEstimate> {
    if a.l != b.l {
        return Err(Error::validation("fibers live over different anchor sets"));
    }
    if a.normalized() == b.normalized() {
        return Err(Error::validation("identical fibers have no separation"));
    }
    if !(rho_min > 0.0) || samples == 0 {
        return Err(Error::validation("need rho_min > 0 and at least one sample"));
    }
    let ea = a.endpoints();
    let eb = b.endpoints();
    let shared: Vec<usize> = ea.iter().copied().filter(|x| eb.contains(x)).collect();
    let kind = match shared.len() {
        2 => SeparationKind::BothEnds,
        1 => SeparationKind::OneEnd,
        _ => SeparationKind::Disjoint,
    };
    let l = a.l;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut delta = f64::INFINITY;
    for _ in 0..samples {
        let zj = ExtComplex::Finite(sample_on_fiber(a, &mut rng, rho_min)?);
        let zk = ExtComplex::Finite(sample_on_fiber(b, &mut rng, rho_min)?);
        let d = stereo_distance(zj, zk);
        let ratio = match kind {
            SeparationKind::BothEnds => {
                d / (stereo_distance(zj, anchor(l, shared[0])) * stereo_distance(zj, anchor(l, shared[1])))
            }
            SeparationKind::OneEnd => {
                let q = anchor(l, shared[0]);
                d / stereo_distance(zj, q).max(stereo_distance(zk, q))
            }
            SeparationKind::Disjoint => d,
        };
        delta = delta.min(ratio);
    }
    Ok(SeparationEstimate { kind, delta, samples })
}

/// Pieces `p + t d` with `t` in `[0, 1]`, or `[0, inf)` for the ray.
fn pieces(f: &FiberSpec) -> Vec<(Complex64, Complex64, bool)> {
    let (lo, hi, phi) = f.normalized();
    let qlo = Complex64::new(lo as f64, 0.0);
    if f.is_ray() {
        return vec![(qlo, Complex64::from_polar(1.0, phi), true)];
    }
    let apex = f.apex();
    let qhi = Complex64::new(hi as f64, 0.0);
    vec![(qlo, apex - qlo, false), (apex, qhi - apex, false)]
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn in_range(t: f64, unbounded: bool) -> bool {
    t >= -GEOM_TOL && (unbounded || t <= 1.0 + GEOM_TOL)
}

fn piece_intersections(p: (Complex64, Complex64, bool), q: (Complex64, Complex64, bool)) -> Vec<Complex64> {
    let (p0, d1, u1) = p;
    let (q0, d2, u2) = q;
    let den = cross(d1, d2);
    let w = q0 - p0;
    if den.abs() <= GEOM_TOL * d1.norm() * d2.norm() {
        if cross(w, d1).abs() > GEOM_TOL * d1.norm() * (1.0 + w.norm()) {
            return Vec::new();
        }
        // Collinear: report the ends of the overlap.
        let len2 = d1.norm_sqr();
        let s0 = (w.re * d1.re + w.im * d1.im) / len2;
        let s1 = s0 + (d2.re * d1.re + d2.im * d1.im) / len2;
        let (mut a, mut b) = (s0.min(s1), s0.max(s1));
        if u2 {
            if s1 > s0 {
                b = f64::INFINITY;
            } else {
                a = f64::NEG_INFINITY;
            }
        }
        let lo = a.max(0.0);
        let hi = if u1 { b } else { b.min(1.0) };
        if lo > hi + GEOM_TOL {
            return Vec::new();
        }
        let mut out = vec![p0 + d1 * lo];
        if hi.is_finite() {
            out.push(p0 + d1 * hi);
        }
        return out;
    }
    let t = cross(w, d2) / den;
    let s = cross(w, d1) / den;
    if in_range(t, u1) && in_range(s, u2) {
        vec![p0 + d1 * t]
    } else {
        Vec::new()
    }
}

/// Closure intersection of two fibers: anchor labels (with `l` for infinity) and other points.
pub fn fiber_intersection(a: &FiberSpec, b: &FiberSpec) -> (Vec<usize>, Vec<Complex64>) {
    let l = a.l;
    let mut points = Vec::new();
    for p in pieces(a) {
        for q in pieces(b) {
            for z in piece_intersections(p, q) {
                if !points.iter().any(|w: &Complex64| (w - z).norm() < GEOM_TOL) {
                    points.push(z);
                }
            }
        }
    }
    let mut anchors = Vec::new();
    for m in 1..l {
        let q = Complex64::new(m as f64, 0.0);
        if let Some(pos) = points.iter().position(|z| (z - q).norm() < 1e3 * GEOM_TOL) {
            if a.endpoints().contains(&m) && b.endpoints().contains(&m) {
                anchors.push(m);
                points.remove(pos);
            }
        }
    }
    if a.is_ray() && b.is_ray() {
        anchors.push(l);
    }
    (anchors, points)
}

/// Expected closure intersection for the fibers of groups `i` and `s` (1-based), read off the
/// block structure of a coupling relabeled into nested order.
pub fn predicted_intersection(coupling: &CouplingSpec, i: usize, s: usize) -> Vec<usize> {
    let r = |x: usize| coupling.r()[x - 1] + 1;
    let block_of = |x: usize| coupling.blocks().iter().position(|b| b.contains(&(x - 1)));
    let mut out = if i == s {
        vec![i, r(i)]
    } else if r(i) == r(s) {
        vec![r(i)]
    } else if block_of(i) != block_of(s) {
        Vec::new()
    } else {
        let (i, s) = if r(i) < r(s) { (i, s) } else { (s, i) };
        let block = &coupling.blocks()[block_of(i).expect("labels are in range")];
        let top = block.iter().max().expect("nonempty block") + 1;
        if i == top {
            match (r(i) == s, r(s) == top) {
                (true, true) => vec![s, i],
                (false, true) => vec![i],
                (true, false) => vec![s],
                (false, false) => Vec::new(),
            }
        } else if s == top {
            Vec::new()
        } else if r(i) == s {
            vec![s]
        } else {
            Vec::new()
        }
    };
    out.sort_unstable();
    out.dedup();
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntersectionRow {
    pub j: usize,
    pub k: usize,
    pub fiber_j: [usize; 2],
    pub fiber_k: [usize; 2],
    pub predicted: Vec<usize>,
    pub anchors: Vec<usize>,
    pub crossings: Vec<[f64; 2]>,
    pub matches: bool,
}

/// Pairwise closure intersections of all vortex fibers in a layout.
pub fn intersection_table(layout: &FiberLayout) -> Vec<IntersectionRow> {
    let f = layout.fibers();
    let mut rows = Vec::new();
    for j in 0..f.len() {
        for k in j + 1..f.len() {
            let (mut anchors, crossings) = fiber_intersection(&f[j], &f[k]);
            anchors.sort_unstable();
            let predicted = predicted_intersection(&layout.coupling, layout.groups[j], layout.groups[k]);
            rows.push(IntersectionRow {
                j,
                k,
                fiber_j: [f[j].i, f[j].r],
                fiber_k: [f[k].i, f[k].r],
                matches: crossings.is_empty() && anchors == predicted,
                predicted,
                anchors,
                crossings: crossings.iter().map(|z| [z.re, z.im]).collect(),
            });
        }
    }
    rows
}

/// Header `j,k,fiber_j,fiber_k,predicted,anchors,crossings,matches`; sets are `;`-separated.
pub fn intersection_csv(rows: &[IntersectionRow]) -> String {
    let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
    let mut out = String::from("j,k,fiber_j,fiber_k,predicted,anchors,crossings,matches\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{}-{},{}-{},{},{},{},{}",
            r.j,
            r.k,
            r.fiber_j[0],
            r.fiber_j[1],
            r.fiber_k[0],
            r.fiber_k[1],
            join(&r.predicted),
            join(&r.anchors),
            r.crossings.len(),
            r.matches
        );
    }
    out
}
