//! Maximal total count under the cyclic pairwise constraints `N_i + N_{i+1} <= a_{i+1}`.
//!
//! Three routes are provided:
//! - [`max_n_enumerate`] and [`max_n_dp`]: exact integer maxima (two independent algorithms);
//! - [`max_n_formula`]: the real-valued closed form built from the `c, d, f, g` sequences;
//! - [`max_n_reduced`]: the integer maximum over the first count only, once the rest
//!   of the chain is folded into `c, d, f, g`.

use serde::Serialize;

use super::{cyc, Mode};
use crate::error::{Error, Result};

/// Stand-in for `+infinity` in the integer sequences.
pub const UNBOUNDED: i64 = i64::MAX / 4;

/// Largest search box explored by plain enumeration.
pub const ENUMERATION_LIMIT: f64 = 1e8;

/// `max_{0 <= t <= T} min(alpha, beta - t) + t + min(gamma - t, delta)` in closed form.
pub fn lemma_f_max(alpha: f64, beta: f64, gamma: f64, delta: f64, t_max: f64) -> Result<f64> {
    if !(t_max >= 0.0) {
        return Err(Error::validation(format!("interval length {t_max} must be nonnegative")));
    }
    Ok((alpha + gamma)
        .min(beta + gamma)
        .min(alpha + delta + t_max)
        .min(beta + delta))
}

fn check_len(a: &[i64]) -> Result<()> {
    if a.len() < 2 {
        return Err(Error::validation("at least two capacities are required"));
    }
    if let Some(i) = a.iter().position(|x| *x < 1) {
        return Err(Error::validation(format!("capacity a[{i}] = {} must be >= 1", a[i])));
    }
    Ok(())
}

fn consecutive_feasible(a: &[i64], n: &[i64]) -> bool {
    let l = a.len();
    (0..l).all(|i| n[i] + n[(i + 1) % l] <= a[(i + 1) % l])
}

fn upper_bounds(a: &[i64]) -> Vec<i64> {
    let l = a.len();
    (0..l).map(|i| a[i].min(a[(i + 1) % l])).collect()
}

/// Exhaustive search; returns the maximum and the lexicographically smallest maximizer.
pub fn max_n_enumerate(a: &[i64]) -> Result<(i64, Vec<i64>)> {
    check_len(a)?;
    let ub = upper_bounds(a);
    let size: f64 = ub.iter().map(|u| (*u + 1) as f64).product();
    if size > ENUMERATION_LIMIT {
        return Err(Error::Capacity(format!("enumeration box of {size:e} points")));
    }
    let l = a.len();
    let mut n = vec![0i64; l];
    let mut best = -1;
    let mut witness = n.clone();
    loop {
        if consecutive_feasible(a, &n) {
            let s: i64 = n.iter().sum();
            if s > best {
                best = s;
                witness = n.clone();
            }
        }
        // Odometer with the last coordinate fastest, giving lexicographic order.
        let mut k = l;
        loop {
            if k == 0 {
                return Ok((best, witness));
            }
            k -= 1;
            if n[k] < ub[k] {
                n[k] += 1;
                for v in n.iter_mut().skip(k + 1) {
                    *v = 0;
                }
                break;
            }
        }
    }
}

/// Chain dynamic program over fixings of the first count; exact at any length.
pub fn max_n_dp(a: &[i64]) -> Result<(i64, Vec<i64>)> {
    check_len(a)?;
    let l = a.len();
    let ub = upper_bounds(a);
    let mut best = -1;
    let mut witness = Vec::new();
    for n0 in 0..=ub[0] {
        // tail[i][v]: best sum of N_i..N_{l-1} given N_i = v, honoring the closing constraint.
        let mut tail: Vec<Vec<i64>> = vec![Vec::new(); l];
        for i in (1..l).rev() {
            let mut row = vec![i64::MIN; (ub[i] + 1) as usize];
            for v in 0..=ub[i] {
                if i == 1 && n0 + v > a[1] {
                    continue;
                }
                let val = if i == l - 1 {
                    if v + n0 <= a[0] {
                        v
                    } else {
                        i64::MIN
                    }
                } else {
                    let next = &tail[i + 1];
                    let cap = a[i + 1] - v;
                    let mut m = i64::MIN;
                    for (w, t) in next.iter().enumerate() {
                        if (w as i64) <= cap && *t > m {
                            m = *t;
                        }
                    }
                    if m == i64::MIN {
                        i64::MIN
                    } else {
                        v + m
                    }
                };
                row[v as usize] = val;
            }
            tail[i] = row;
        }
        let Some(&rest) = tail[1].iter().max() else {
            continue;
        };
        if rest == i64::MIN || n0 + rest <= best {
            continue;
        }
        best = n0 + rest;
        let mut w = vec![n0];
        let mut target = rest;
        let mut prev = n0;
        for i in 1..l {
            let cap = a[i] - prev;
            let v = tail[i]
                .iter()
                .enumerate()
                .position(|(v, t)| (v as i64) <= cap && *t == target)
                .expect("reconstruction follows the table") as i64;
            w.push(v);
            target -= v;
            prev = v;
        }
        witness = w;
    }
    Ok((best, witness))
}

/// The four sequences at one index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Cdfg {
    pub c: i64,
    pub d: i64,
    pub f: i64,
    pub g: i64,
}

impl Cdfg {
    fn seeds(a: &[i64]) -> Self {
        Cdfg {
            c: cyc(a, 2),
            d: UNBOUNDED,
            f: UNBOUNDED,
            g: cyc(a, 3),
        }
    }
}

fn s_k(a: &[i64], k: usize, mask: u64) -> i64 {
    let chi = |j: usize| -> i64 { ((mask >> (j - 1)) & 1) as i64 };
    (2..=k)
        .map(|j| {
            chi(j) * cyc(a, 2 * j)
                + (1 - chi(j)) * (cyc(a, 2 * j + 1) + chi(j - 1) * cyc(a, 2 * j - 1).min(cyc(a, 2 * j)))
        })
        .sum()
}

/// Direct minimization over subsets `J` of `{1, ..., k}`.
pub fn cdfg_definition(a: &[i64], k: usize) -> Result<Cdfg> {
    check_k(a, k)?;
    let mut out = Cdfg {
        c: UNBOUNDED,
        d: UNBOUNDED,
        f: UNBOUNDED,
        g: UNBOUNDED,
    };
    for mask in 0u64..(1u64 << k) {
        let s = s_k(a, k, mask);
        let has_first = mask & 1 == 1;
        let has_last = (mask >> (k - 1)) & 1 == 1;
        match (has_first, has_last) {
            (true, true) => out.c = out.c.min(cyc(a, 2) + s),
            (false, true) => out.d = out.d.min(cyc(a, 3) + s),
            (true, false) => out.f = out.f.min(cyc(a, 2) + s),
            (false, false) => out.g = out.g.min(cyc(a, 3) + s),
        }
    }
    Ok(out)
}

/// Forward recursion from the `k = 1` seeds `c = a_2, d = f = inf, g = a_3`.
pub fn cdfg_recursion(a: &[i64], k: usize) -> Result<Cdfg> {
    check_k(a, k)?;
    let mut s = Cdfg::seeds(a);
    for m in 1..k {
        let a_even = cyc(a, 2 * m + 2);
        let a_next = cyc(a, 2 * m + 3);
        let low = cyc(a, 2 * m + 1).min(a_even);
        s = Cdfg {
            c: (s.c + a_even).min(s.f.saturating_add(a_even)),
            d: s.d.saturating_add(a_even).min(s.g + a_even),
            f: (s.c + low + a_next).min(s.f.saturating_add(a_next)),
            g: s.d.saturating_add(low + a_next).min(s.g + a_next),
        };
    }
    Ok(clamp_unbounded(s))
}

fn clamp_unbounded(s: Cdfg) -> Cdfg {
    let c = |x: i64| x.min(UNBOUNDED);
    Cdfg {
        c: c(s.c),
        d: c(s.d),
        f: c(s.f),
        g: c(s.g),
    }
}

fn check_k(a: &[i64], k: usize) -> Result<()> {
    check_len(a)?;
    if k == 0 || 2 * k > a.len() || k > 62 {
        return Err(Error::OutOfRange(format!(
            "sequence index {k} outside 1..={} for l = {}",
            a.len() / 2,
            a.len()
        )));
    }
    Ok(())
}

/// Both routes to the sequences, side by side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CdfgComparison {
    pub definition: Cdfg,
    pub recursion: Cdfg,
    pub agree: bool,
}

pub fn cdfg_sequences(a: &[i64], k: usize) -> Result<CdfgComparison> {
    let definition = cdfg_definition(a, k)?;
    let recursion = cdfg_recursion(a, k)?;
    Ok(CdfgComparison {
        definition,
        recursion,
        agree: definition == recursion,
    })
}

/// Closed forms of the sequences when `b` is sorted increasingly.
pub fn increasing_closed_forms(b: &[i64], k: usize) -> Result<Cdfg> {
    check_k(b, k)?;
    let even: i64 = (1..=k).map(|j| cyc(b, 2 * j)).sum();
    let odd: i64 = (1..=k).map(|j| cyc(b, 2 * j + 1)).sum();
    if k == 1 {
        return Ok(Cdfg::seeds(b));
    }
    Ok(Cdfg {
        c: even,
        d: cyc(b, 3) + even - cyc(b, 2),
        f: cyc(b, 2) + odd,
        g: odd,
    })
}

fn hat_a1(a: &[i64]) -> i64 {
    let l = a.len();
    a[0].min(a[0].min(a[1]) + a[0].min(a[l - 1]))
}

/// Real-valued closed form for the maximal total count.
pub fn max_n_formula(a: &[i64]) -> Result<f64> {
    check_len(a)?;
    let l = a.len();
    if l == 2 {
        return Ok(a[0].min(a[1]) as f64);
    }
    if l.is_multiple_of(2) {
        let s = cdfg_recursion(a, l / 2)?;
        return Ok(s.c.min(s.g) as f64);
    }
    let s = cdfg_recursion(a, (l - 1) / 2)?;
    let ah = hat_a1(a);
    let lo = (ah - a[0].min(a[l - 1])) as f64;
    let hi = a[0].min(a[1]) as f64;
    let dec = (s.c + ah) as f64;
    let inc = s.g as f64;
    let flat = (s.d.saturating_add(ah)).min(s.f) as f64;
    let t = (0.5 * (dec - inc)).clamp(lo, hi.max(lo));
    Ok((dec - t).min(inc + t).min(flat))
}

/// Integer maximum over the first (and, for odd `l`, last) count of the folded chain.
pub fn max_n_reduced(a: &[i64]) -> Result<i64> {
    check_len(a)?;
    let l = a.len();
    let k = l / 2;
    let s = cdfg_recursion(a, k)?;
    let mut best = i64::MIN;
    if l.is_multiple_of(2) {
        for n1 in 0..=a[0].min(a[1]) {
            let v = s.c.min(s.d.saturating_add(n1)).min(s.f.saturating_sub(n1)).min(s.g);
            best = best.max(v);
        }
    } else {
        for n1 in 0..=a[0].min(a[1]) {
            for nl in 0..=a[l - 1].min(a[0]) {
                if n1 + nl > a[0] {
                    continue;
                }
                let v = (s.c + nl)
                    .min(s.d.saturating_add(n1 + nl))
                    .min(s.f)
                    .min(s.g + n1);
                best = best.max(v);
            }
        }
    }
    Ok(best.min(UNBOUNDED))
}

/// Closed form when the capacities are sorted increasingly.
pub fn max_n_increasing(b: &[i64]) -> Result<f64> {
    check_len(b)?;
    if b.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::validation("capacities must be sorted increasingly"));
    }
    let l = b.len();
    if l.is_multiple_of(2) {
        Ok((0..l / 2).map(|j| b[2 * j] as f64).sum())
    } else {
        let alternating: i64 = b[0] + (1..=(l - 1) / 2).map(|j| b[2 * j - 1]).sum::<i64>();
        let half = 0.5 * b.iter().sum::<i64>() as f64;
        Ok((alternating as f64).min(half))
    }
}

/// Exact maximum with witness next to the closed-form values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxNResult {
    pub ell: usize,
    pub a: Vec<i64>,
    pub mode: Mode,
    pub n_exact: i64,
    pub witness: Vec<i64>,
    /// Real-valued closed form (consecutive mode only).
    pub n_formula: Option<f64>,
    /// Integer maximum of the folded chain (consecutive mode only).
    pub n_reduced: Option<i64>,
    /// `n_exact == floor(n_formula)`.
    pub agreement: Option<bool>,
    /// Which exact algorithm produced the witness.
    pub method: String,
}

/// Exact consecutive maximum; enumeration when the box is small, chain DP otherwise.
pub fn max_n_exact(a: &[i64]) -> Result<MaxNResult> {
    check_len(a)?;
    let size: f64 = upper_bounds(a).iter().map(|u| (*u + 1) as f64).product();
    let (n_exact, witness, method) = if size <= ENUMERATION_LIMIT {
        let (n, w) = max_n_enumerate(a)?;
        (n, w, "enumeration")
    } else {
        let (n, w) = max_n_dp(a)?;
        (n, w, "chain-dp")
    };
    let n_formula = max_n_formula(a)?;
    Ok(MaxNResult {
        ell: a.len(),
        a: a.to_vec(),
        mode: Mode::Consecutive,
        n_exact,
        witness,
        n_formula: Some(n_formula),
        n_reduced: Some(max_n_reduced(a)?),
        agreement: Some(n_formula.floor() as i64 == n_exact),
        method: method.into(),
    })
}
