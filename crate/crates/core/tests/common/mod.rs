//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::Vector3;
use num_complex::Complex64;
use rand::Rng;
use vortex_core::energy::{System, VortexConfig};
use vortex_core::surface::{Point, Surface};

/// Legendre polynomial by the three-term recurrence.
pub fn legendre(n: usize, t: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, t);
    if n == 0 {
        return p0;
    }
    for k in 1..n {
        let p2 = ((2 * k + 1) as f64 * t * p1 - k as f64 * p0) / (k + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Eigenfunction expansion of the mean-zero sphere Green's function at `cos(angle) = t`,
/// truncated at `degree`. The even-degree partial sums are averaged repeatedly, which
/// accelerates the alternating tail at `t = 0`.
pub fn sphere_spectral(t: f64, degree: usize, averaging: usize) -> f64 {
    let mut partial = Vec::with_capacity(degree);
    let mut s = 0.0;
    for n in 1..=degree {
        s += (2 * n + 1) as f64 / (4.0 * PI * (n * (n + 1)) as f64) * legendre(n, t);
        if n % 2 == 0 {
            partial.push(s);
        }
    }
    for _ in 0..averaging {
        if partial.len() < 2 {
            break;
        }
        partial = partial.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    *partial.last().expect("degree >= 2")
}

/// Orthonormal pair spanning the plane orthogonal to a unit vector.
pub fn orthonormal_pair(p: &Point) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if p.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let e1 = (helper - p * p.dot(&helper)).normalize();
    (e1, p.cross(&e1))
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, p_prev) = (legendre(n, x), legendre(n - 1, x));
                dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
                let step = p / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            (0.5 * (1.0 - x), 0.5 * w)
        })
        .collect()
}

/// Mean of `f` over the unit sphere on a polar mesh centred at `pole`.
///
/// The polar variable is `1 - 2 s^5` with Gauss-Legendre nodes in `s`, which flattens a
/// logarithmic singularity at the pole; the azimuth uses the midpoint rule.
pub fn sphere_mean(f: impl Fn(&Point) -> f64, pole: &Point, n_s: usize, n_phi: usize) -> f64 {
    let (e1, e2) = orthonormal_pair(pole);
    let dphi = 2.0 * PI / n_phi as f64;
    let mut acc = 0.0;
    for (s, ws) in gauss_legendre(n_s) {
        let t = 1.0 - 2.0 * s.powi(5);
        let w = 10.0 * s.powi(4) * ws * dphi;
        let r = (1.0 - t * t).max(0.0).sqrt();
        for k in 0..n_phi {
            let phi = (k as f64 + 0.5) * dphi;
            let x = pole * t + (e1 * phi.cos() + e2 * phi.sin()) * r;
            acc += w * f(&x);
        }
    }
    acc / (4.0 * PI)
}

/// Mean of an even function (`f(x) = f(-x)`) over the unit sphere, integrating the hemisphere
/// around `pole` with the same flattening as [`sphere_mean`].
pub fn sphere_mean_even(f: impl Fn(&Point) -> f64, pole: &Point, n_s: usize, n_phi: usize) -> f64 {
    let (e1, e2) = orthonormal_pair(pole);
    let dphi = 2.0 * PI / n_phi as f64;
    let mut acc = 0.0;
    for (s, ws) in gauss_legendre(n_s) {
        let t = 1.0 - s.powi(5);
        let w = 5.0 * s.powi(4) * ws * dphi;
        let r = (1.0 - t * t).max(0.0).sqrt();
        for k in 0..n_phi {
            let phi = (k as f64 + 0.5) * dphi;
            let x = pole * t + (e1 * phi.cos() + e2 * phi.sin()) * r;
            acc += w * f(&x);
        }
    }
    2.0 * acc / (4.0 * PI)
}

/// Exponential integral `E1(x)` for `x > 0`.
pub fn e1(x: f64) -> f64 {
    const EULER: f64 = 0.577_215_664_901_532_9;
    if x <= 1.0 {
        let mut sum = -x.ln() - EULER;
        let mut fact = 1.0;
        for i in 1..200 {
            fact *= -x / i as f64;
            let term = -fact / i as f64;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..1000 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// Mean-zero Green's function of the flat torus `C / (Z + tau Z)` by Ewald summation.
pub fn ewald_greens(tau: Complex64, z: Complex64) -> f64 {
    let area = tau.im;
    let cut = 8i32;
    let mut real = 0.0;
    for m in -cut..=cut {
        for n in -cut..=cut {
            let w = z + Complex64::new(m as f64, 0.0) + tau * n as f64;
            real += e1(PI * w.norm_sqr() / area);
        }
    }
    let b1 = Complex64::new(2.0 * PI, -2.0 * PI * tau.re / tau.im);
    let b2 = Complex64::new(0.0, 2.0 * PI / tau.im);
    let mut recip = 0.0;
    for m in -cut..=cut {
        for n in -cut..=cut {
            if m == 0 && n == 0 {
                continue;
            }
            let k = b1 * m as f64 + b2 * n as f64;
            let k2 = k.norm_sqr();
            let phase = k.re * z.re + k.im * z.im;
            recip += phase.cos() * (-area * k2 / (4.0 * PI)).exp() / k2;
        }
    }
    real / (4.0 * PI) - 1.0 / (4.0 * PI) + recip / area
}

/// Gradient of the Ewald Green's function by central differences.
pub fn ewald_grad(tau: Complex64, z: Complex64, h: f64) -> Complex64 {
    let gx = (ewald_greens(tau, z + h) - ewald_greens(tau, z - h)) / (2.0 * h);
    let hi = Complex64::new(0.0, h);
    let gy = (ewald_greens(tau, z + hi) - ewald_greens(tau, z - hi)) / (2.0 * h);
    Complex64::new(gx, gy)
}

/// Local minima of `|grad G(., 0)|` on the `n x n` grid `z = (a + b tau) / n`, away from the pole.
pub fn torus_grid_critical_points(tau: Complex64, n: usize) -> Vec<Complex64> {
    let point = |a: usize, b: usize| (Complex64::new(a as f64, 0.0) + tau * b as f64) / n as f64;
    let mut norms = vec![f64::INFINITY; n * n];
    for a in 0..n {
        for b in 0..n {
            let z = point(a, b);
            let pole_dist = [0.0, 1.0]
                .iter()
                .flat_map(|s| [0.0, 1.0].map(|t| (z - Complex64::new(*s, 0.0) - tau * t).norm()))
                .fold(f64::INFINITY, f64::min);
            if pole_dist > 0.05 {
                norms[a * n + b] = ewald_grad(tau, z, 1e-5).norm();
            }
        }
    }
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let v = norms[a * n + b];
            if !v.is_finite() {
                continue;
            }
            let mut is_min = true;
            for da in [n - 1, 0, 1] {
                for db in [n - 1, 0, 1] {
                    if da == 0 && db == 0 {
                        continue;
                    }
                    if norms[((a + da) % n) * n + (b + db) % n] < v {
                        is_min = false;
                    }
                }
            }
            if is_min {
                out.push(point(a, b));
            }
        }
    }
    out
}

/// `f(t) = min(alpha, beta - t) + t + min(gamma - t, delta)` maximized over the clipped breakpoints.
pub fn lemma_f_breakpoints(alpha: f64, beta: f64, gamma: f64, delta: f64, t_max: f64) -> f64 {
    let f = |t: f64| alpha.min(beta - t) + t + (gamma - t).min(delta);
    [0.0, t_max, beta - alpha, gamma - delta]
        .iter()
        .map(|t| t.clamp(0.0, t_max))
        .map(f)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Central-difference Riemannian gradient of the reduced Hamiltonian, one vortex at a time.
pub fn fd_gradient(system: &System, cfg: &VortexConfig, h: f64) -> Vec<Vector3<f64>> {
    let s = &system.surface;
    (0..cfg.len())
        .map(|j| {
            let x = cfg.positions[j];
            let mut g = Vector3::zeros();
            for e in s.frame(&x) {
                let mut plus = cfg.positions.clone();
                let mut minus = cfg.positions.clone();
                plus[j] = s.exp(&x, &(e * h));
                minus[j] = s.exp(&x, &(e * -h));
                let fp = system.hamiltonian_reduced(&cfg.with_positions(plus)).unwrap();
                let fm = system.hamiltonian_reduced(&cfg.with_positions(minus)).unwrap();
                g += e * ((fp - fm) / (2.0 * h));
            }
            g
        })
        .collect()
}

/// Random points with pairwise distances (and distances to `avoid`) at least `min_sep`.
pub fn separated_points<R: Rng>(surface: &Surface, rng: &mut R, n: usize, avoid: &[Point], min_sep: f64) -> Vec<Point> {
    loop {
        let pts: Vec<Point> = (0..n).map(|_| surface.random_point(rng)).collect();
        let ok = (0..n).all(|j| {
            (0..j).all(|k| surface.dist(&pts[j], &pts[k]) > min_sep)
                && avoid.iter().all(|p| surface.dist(&pts[j], p) > min_sep)
        });
        if ok {
            return pts;
        }
    }
}

/// Uniformly random rotation matrix.
pub fn random_rotation<R: Rng>(rng: &mut R) -> nalgebra::Rotation3<f64> {
    let axis = Surface::Sphere.random_point(rng);
    let angle: f64 = rng.random_range(0.0..2.0 * PI);
    nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle)
}

/// Direct check of the strict block-order predicate on the current labels of a coupling:
/// for `i < j` in one block, with `J*` the set minus the block maximum, either
/// `J*_i < i <= J*_j < j` or `J*_j < J*_i < i`, comparing every pair of elements.
pub fn strict_block_order(coupling: &vortex_core::combinatorics::CouplingSpec) -> bool {
    let sets = coupling.sets();
    coupling.blocks().iter().all(|block| {
        let top = *block.iter().max().expect("nonempty block");
        let star = |x: usize| -> Vec<usize> { sets[x].iter().copied().filter(|v| *v != top).collect() };
        block.iter().all(|&i| {
            block.iter().filter(|&&j| j > i).all(|&j| {
                let (si, sj) = (star(i), star(j));
                let interleaved = si.iter().all(|a| *a < i) && sj.iter().all(|b| i <= *b && *b < j);
                let nested = si.iter().all(|a| *a < i) && sj.iter().all(|b| si.iter().all(|a| b < a));
                interleaved || nested
            })
        })
    })
}

/// Every map `r` with `r(i) != i` on `l` indices.
pub fn all_maps(l: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut digits = vec![0usize; l];
    loop {
        out.push(
            digits
                .iter()
                .enumerate()
                .map(|(i, d)| if *d >= i { d + 1 } else { *d })
                .collect(),
        );
        let mut k = l;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < l - 1 {
                break;
            }
            digits[k] = 0;
        }
    }
}

/// Brute-force maximum of `sum N_i` subject to `N_i + sum_{x in J_i} N_x <= a_i`.
pub fn brute_max_coupling(a: &[i64], sets: &[Vec<usize>]) -> i64 {
    let l = a.len();
    let top = *a.iter().max().unwrap();
    let mut n = vec![0i64; l];
    let mut best = 0;
    loop {
        let ok = (0..l).all(|i| n[i] + sets[i].iter().map(|x| n[*x]).sum::<i64>() <= a[i]);
        if ok {
            best = best.max(n.iter().sum());
        }
        let mut k = 0;
        loop {
            if k == l {
                return best;
            }
            n[k] += 1;
            if n[k] <= top {
                break;
            }
            n[k] = 0;
            k += 1;
        }
    }
}

/// Whether counts satisfy `N_i + N_{i+1} <= a_{i+1}` cyclically.
pub fn consecutive_ok(a: &[i64], n: &[i64]) -> bool {
    let l = a.len();
    (0..l).all(|i| n[i] >= 0 && n[i] + n[(i + 1) % l] <= a[(i + 1) % l])
}

/// All capacity vectors of length `l` with entries in `values`.
pub fn capacity_grid(l: usize, values: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..l {
        out = out
            .into_iter()
            .flat_map(|v| {
                values.iter().map(move |x| {
                    let mut w = v.clone();
                    w.push(*x);
                    w
                })
            })
            .collect();
    }
    out
}
