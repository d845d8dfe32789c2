//! Checkers for the strength conditions under which critical points are expected.

use serde::Serialize;

use crate::combinatorics::{capacity, CouplingSpec};
use crate::error::{Error, Result};

/// Largest vortex count accepted by the subset enumeration.
pub const MAX_COMPACTNESS_N: usize = 24;

/// Outcome of the compactness test for one source strength.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompactnessCheck {
    pub holds: bool,
    /// Subset (0-based) whose interaction ratio is closest to `alpha`.
    pub closest_subset: Vec<usize>,
    pub closest_ratio: f64,
    /// Present only when the condition fails.
    pub witness: Option<Vec<usize>>,
}

/// Tests that `alpha` stays away from every ratio `sum_{j != k in J} G_j G_k / sum_{j in J} G_j`.
pub fn check_compactness(gammas: &[f64], alpha: f64, tol: f64) -> Result<CompactnessCheck> {
    let n = gammas.len();
    if n == 0 {
        return Err(Error::validation("compactness check needs at least one strength"));
    }
    if n > MAX_COMPACTNESS_N {
        return Err(Error::Capacity(format!(
            "subset enumeration limited to {MAX_COMPACTNESS_N} strengths, got {n}"
        )));
    }
    let mut best_gap = f64::INFINITY;
    let mut best_mask = 1u32;
    let mut best_ratio = 0.0;
    for mask in 1u32..(1u32 << n) {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for (j, g) in gammas.iter().enumerate() {
            if mask >> j & 1 == 1 {
                sum += g;
                sum_sq += g * g;
            }
        }
        if sum == 0.0 {
            continue;
        }
        let ratio = (sum * sum - sum_sq) / sum;
        let gap = (alpha - ratio).abs();
        if gap < best_gap {
            best_gap = gap;
            best_mask = mask;
            best_ratio = ratio;
        }
    }
    let subset: Vec<usize> = (0..n).filter(|j| best_mask >> j & 1 == 1).collect();
    let holds = best_gap > tol;
    Ok(CompactnessCheck {
        holds,
        witness: (!holds).then(|| subset.clone()),
        closest_subset: subset,
        closest_ratio: best_ratio,
    })
}

/// Strength and coupling data for the condition report.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub gammas: Vec<f64>,
    pub alphas: Vec<f64>,
    /// Source index attached to each vortex.
    pub groups: Option<Vec<usize>>,
    /// Number of vortices attached to each source.
    pub counts: Option<Vec<usize>>,
    pub coupling: Option<CouplingSpec>,
    pub tol: f64,
}

impl ProblemSpec {
    pub fn new(gammas: Vec<f64>, alphas: Vec<f64>) -> Self {
        Self {
            gammas,
            alphas,
            groups: None,
            counts: None,
            coupling: None,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionOutcome {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub outcomes: Vec<ConditionOutcome>,
}

impl ConditionReport {
    pub fn get(&self, name: &str) -> Option<&ConditionOutcome> {
        self.outcomes.iter().find(|o| o.name == name)
    }

    fn push(&mut self, name: &str, holds: bool, detail: String) {
        self.outcomes.push(ConditionOutcome {
            name: name.to_string(),
            holds,
            detail,
        });
    }
}

fn pair_and_total(gammas: &[f64], members: impl Iterator<Item = usize>) -> (f64, f64) {
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for j in members {
        sum += gammas[j];
        sum_sq += gammas[j] * gammas[j];
    }
    (sum * sum - sum_sq, sum)
}

/// Evaluates every condition whose inputs are present.
///
/// Condition names: `compactness`, `unit-compactness` (all strengths one),
/// `projective-dominance`, `projective-ratio`, `projective-count`,
/// `group-dominance`, `coupling-capacity`, `consecutive-capacity`.
pub fn check_theorem_conditions(spec: &ProblemSpec) -> Result<ConditionReport> {
    let gammas = &spec.gammas;
    let alphas = &spec.alphas;
    let n = gammas.len();
    let l = alphas.len();
    if n == 0 {
        return Err(Error::validation("no vortex strengths given"));
    }
    if let Some(j) = gammas.iter().position(|g| !(*g > 0.0)) {
        return Err(Error::validation(format!("gamma[{j}] must be positive")));
    }
    let caps = capacity(alphas)?;
    let mut report = ConditionReport { outcomes: Vec::new() };

    if l > 0 {
        let mut holds = true;
        let mut detail = Vec::new();
        for (i, a) in alphas.iter().enumerate() {
            let c = check_compactness(gammas, *a, spec.tol)?;
            if !c.holds {
                holds = false;
                detail.push(format!(
                    "alpha[{i}] = {a} equals the ratio of subset {:?}",
                    c.witness.unwrap_or_default()
                ));
            }
        }
        if detail.is_empty() {
            detail.push("no source strength matches a subset ratio".into());
        }
        report.push("compactness", holds, detail.join("; "));

        if gammas.iter().all(|g| *g == 1.0) {
            let bad: Vec<String> = alphas
                .iter()
                .enumerate()
                .filter(|(_, a)| a.fract() == 0.0 && **a >= 1.0 && **a <= (n as f64 - 1.0))
                .map(|(i, a)| format!("alpha[{i}] = {a}"))
                .collect();
            let detail = if bad.is_empty() {
                format!("no alpha in {{1, ..., {}}}", n.saturating_sub(1))
            } else {
                format!("integer strengths below N: {}", bad.join(", "))
            };
            report.push("unit-compactness", bad.is_empty(), detail);
        }

        let (pairs, total) = pair_and_total(gammas, 0..n);
        let (imax, amax) = alphas
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, a)| if *a > acc.1 { (i, *a) } else { acc });
        report.push(
            "projective-dominance",
            pairs < amax * total,
            format!("{pairs} < alpha[{imax}] * {total} = {}", amax * total),
        );
        report.push(
            "projective-ratio",
            pairs / total < amax,
            format!("{} < max alpha = {amax}", pairs / total),
        );
        let cap_max = caps.iter().copied().max().unwrap_or(0);
        report.push(
            "projective-count",
            (n as i64) <= cap_max,
            format!("N = {n} <= max capacity {cap_max}"),
        );
    }

    let counts = match (&spec.groups, &spec.counts) {
        (Some(groups), counts) => {
            if groups.len() != n {
                return Err(Error::validation(format!(
                    "{} group labels for {n} vortices",
                    groups.len()
                )));
            }
            if let Some(g) = groups.iter().find(|g| **g >= l) {
                return Err(Error::validation(format!("group label {g} out of range for {l} sources")));
            }
            let mut c = vec![0usize; l];
            for g in groups {
                c[*g] += 1;
            }
            if let Some(given) = counts {
                if *given != c {
                    return Err(Error::validation(format!(
                        "counts {given:?} disagree with group labels {c:?}"
                    )));
                }
            }
            Some(c)
        }
        (None, Some(c)) => {
            if c.len() != l {
                return Err(Error::validation(format!("{} counts for {l} sources", c.len())));
            }
            Some(c.clone())
        }
        (None, None) => None,
    };

    if let Some(coupling) = &spec.coupling {
        if coupling.len() != l {
            return Err(Error::validation(format!(
                "coupling has {} indices but there are {l} sources",
                coupling.len()
            )));
        }
        if let Some(groups) = &spec.groups {
            let mut holds = true;
            let mut parts = Vec::new();
            for i in 0..l {
                let members: Vec<usize> = (0..n)
                    .filter(|j| groups[*j] == i || coupling.sets()[i].contains(&groups[*j]))
                    .collect();
                if members.is_empty() {
                    continue;
                }
                let (pairs, total) = pair_and_total(gammas, members.iter().copied());
                let ok = pairs < alphas[i] * total;
                holds &= ok;
                parts.push(format!("i={i}: {pairs} < {}", alphas[i] * total));
            }
            report.push("group-dominance", holds, parts.join("; "));
        }
        if let Some(counts) = &counts {
            let slack = coupling.slack(&caps, counts);
            let holds = slack.iter().all(|s| *s >= 0);
            report.push(
                "coupling-capacity",
                holds,
                format!("slack per source {slack:?}"),
            );
            if coupling.is_consecutive() {
                let mut consecutive = true;
                let parts: Vec<String> = (0..l)
                    .map(|i| {
                        let next = (i + 1) % l;
                        let load = (counts[i] + counts[next]) as i64;
                        consecutive &= load <= caps[next];
                        format!("N{i}+N{next}={load} <= {}", caps[next])
                    })
                    .collect();
                report.push("consecutive-capacity", consecutive, parts.join(", "));
            }
        }
    }
    Ok(report)
}
