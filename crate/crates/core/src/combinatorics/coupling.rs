//! General couplings `{J_i}` between sources and the counts they admit.

use serde::Serialize;

use super::{capacity, MaxNResult, Mode};
use crate::error::{Error, Result};

/// Largest number of sources for the exhaustive coupling search.
pub const MAX_SEARCH_L: usize = 6;

/// Partition `{J_i}` of `{0, ..., l-1}` with `i` not in `J_i`.
///
/// `r(i)` is the unique index whose set contains `i`; blocks are the connected
/// components of the graph with edges `i -- r(i)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CouplingSpec {
    sets: Vec<Vec<usize>>,
    r: Vec<usize>,
    blocks: Vec<Vec<usize>>,
}

impl CouplingSpec {
    pub fn new(mut sets: Vec<Vec<usize>>) -> Result<Self> {
        let l = sets.len();
        if l < 2 {
            return Err(Error::validation("a coupling needs at least two indices"));
        }
        let mut r = vec![usize::MAX; l];
        for (i, set) in sets.iter_mut().enumerate() {
            set.sort_unstable();
            for &x in set.iter() {
                if x >= l {
                    return Err(Error::validation(format!("J[{i}] contains {x}, out of range")));
                }
                if x == i {
                    return Err(Error::validation(format!("J[{i}] contains its own index")));
                }
                if r[x] != usize::MAX {
                    return Err(Error::validation(format!(
                        "index {x} appears in both J[{}] and J[{i}]",
                        r[x]
                    )));
                }
                r[x] = i;
            }
        }
        if let Some(x) = r.iter().position(|v| *v == usize::MAX) {
            return Err(Error::validation(format!("index {x} is not covered by any J")));
        }
        let blocks = components(&r);
        Ok(Self { sets, r, blocks })
    }

    /// Builds the coupling from the map `i -> r(i)`.
    pub fn from_r(r: &[usize]) -> Result<Self> {
        let l = r.len();
        let mut sets = vec![Vec::new(); l];
        for (i, &target) in r.iter().enumerate() {
            if target >= l {
                return Err(Error::validation(format!("r({i}) = {target} out of range")));
            }
            sets[target].push(i);
        }
        Self::new(sets)
    }

    /// `J_{i+1} = {i}` cyclically, i.e. `r(i) = i + 1`.
    pub fn consecutive(l: usize) -> Result<Self> {
        Self::from_r(&(0..l).map(|i| (i + 1) % l).collect::<Vec<_>>())
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn r(&self) -> &[usize] {
        &self.r
    }

    /// Blocks, each sorted, ordered by smallest member.
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Whether `r(i) = i + 1` cyclically.
    pub fn is_consecutive(&self) -> bool {
        let l = self.len();
        (0..l).all(|i| self.r[i] == (i + 1) % l)
    }

    /// Whether `r` is a single cycle through all indices (consecutive up to relabeling).
    pub fn is_single_cycle(&self) -> bool {
        if self.sets.iter().any(|s| s.len() != 1) {
            return false;
        }
        let mut x = 0;
        for step in 1..=self.len() {
            x = self.r[x];
            if x == 0 {
                return step == self.len();
            }
        }
        false
    }

    /// `a_i - N_i - sum_{r in J_i} N_r` per index.
    pub fn slack(&self, caps: &[i64], counts: &[usize]) -> Vec<i64> {
        (0..self.len())
            .map(|i| {
                let load = counts[i] + self.sets[i].iter().map(|x| counts[*x]).sum::<usize>();
                caps[i] - load as i64
            })
            .collect()
    }

    /// Applies a relabeling `new_index = position of old index in order`.
    pub fn relabel(&self, order: &[usize]) -> Result<Self> {
        let l = self.len();
        let mut pos = vec![usize::MAX; l];
        for (p, &old) in order.iter().enumerate() {
            pos[old] = p;
        }
        let r: Vec<usize> = order.iter().map(|&old| pos[self.r[old]]).collect();
        Self::from_r(&r)
    }
}

fn components(r: &[usize]) -> Vec<Vec<usize>> {
    let l = r.len();
    let mut parent: Vec<usize> = (0..l).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut x = x;
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..l {
        let a = find(&mut parent, i);
        let b = find(&mut parent, r[i]);
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut index = vec![usize::MAX; l];
    for i in 0..l {
        let root = find(&mut parent, i);
        if index[root] == usize::MAX {
            index[root] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[index[root]].push(i);
    }
    blocks
}

/// Feasibility of counts under a coupling, with per-index slack.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Feasibility {
    pub feasible: bool,
    pub slack: Vec<i64>,
}

pub fn coupling_feasible(alphas: &[f64], counts: &[usize], coupling: &CouplingSpec) -> Result<Feasibility> {
    if alphas.len() != coupling.len() || counts.len() != coupling.len() {
        return Err(Error::validation(format!(
            "coupling over {} indices, {} strengths, {} counts",
            coupling.len(),
            alphas.len(),
            counts.len()
        )));
    }
    let caps = capacity(alphas)?;
    let slack = coupling.slack(&caps, counts);
    Ok(Feasibility {
        feasible: slack.iter().all(|s| *s >= 0),
        slack,
    })
}

/// Exact maximum of `sum N_i` under a general coupling, with the lexicographically smallest witness.
pub fn max_n_coupling(caps: &[i64], coupling: &CouplingSpec) -> Result<(i64, Vec<i64>)> {
    let l = coupling.len();
    if caps.len() != l {
        return Err(Error::validation(format!("{} capacities for {l} indices", caps.len())));
    }
    let ub: Vec<i64> = (0..l).map(|i| caps[i].min(caps[coupling.r()[i]])).collect();
    let size: f64 = ub.iter().map(|u| (*u + 1) as f64).product();
    if size > super::ENUMERATION_LIMIT {
        return Err(Error::Capacity(format!("coupling search box of {size:e} points")));
    }
    let mut state = Dfs {
        caps,
        coupling,
        ub: &ub,
        load: vec![0; l],
        n: vec![0; l],
        best: -1,
        witness: vec![0; l],
        suffix: (0..=l).map(|k| ub[k..].iter().sum()).collect(),
    };
    state.go(0, 0);
    Ok((state.best, state.witness))
}

/// Exact maximum under a general coupling, in the same shape as the consecutive result.
pub fn max_n_general(caps: &[i64], coupling: &CouplingSpec) -> Result<MaxNResult> {
    let (n_exact, witness) = max_n_coupling(caps, coupling)?;
    Ok(MaxNResult {
        ell: caps.len(),
        a: caps.to_vec(),
        mode: Mode::General,
        n_exact,
        witness,
        n_formula: None,
        n_reduced: None,
        agreement: None,
        method: "branch-and-bound".into(),
    })
}

struct Dfs<'a> {
    caps: &'a [i64],
    coupling: &'a CouplingSpec,
    ub: &'a [i64],
    load: Vec<i64>,
    n: Vec<i64>,
    best: i64,
    witness: Vec<i64>,
    suffix: Vec<i64>,
}

impl Dfs<'_> {
    fn go(&mut self, k: usize, sum: i64) {
        if sum + self.suffix[k] <= self.best {
            return;
        }
        if k == self.n.len() {
            self.best = sum;
            self.witness = self.n.clone();
            return;
        }
        let rk = self.coupling.r()[k];
        for v in 0..=self.ub[k] {
            // N_k loads its own constraint and that of r(k).
            if self.load[k] + v > self.caps[k] || self.load[rk] + v > self.caps[rk] {
                break;
            }
            self.load[k] += v;
            self.load[rk] += v;
            self.n[k] = v;
            self.go(k + 1, sum + v);
            self.load[k] -= v;
            self.load[rk] -= v;
        }
        self.n[k] = 0;
    }
}

/// Result of the exhaustive search over all couplings of `l` sources.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingSearch {
    pub best_n: i64,
    pub best_r: Vec<usize>,
    pub best_counts: Vec<i64>,
    /// Best value among single-cycle couplings.
    pub best_cycle_n: i64,
    pub best_cycle_r: Vec<usize>,
    /// Whether some non-cycle coupling beats every single-cycle one.
    pub non_cycle_strictly_better: bool,
    pub couplings_examined: usize,
}

/// Tries every map `r` with `r(i) != i`.
pub fn best_coupling_search(alphas: &[f64]) -> Result<CouplingSearch> {
    let l = alphas.len();
    if !(2..=MAX_SEARCH_L).contains(&l) {
        return Err(Error::Capacity(format!(
            "exhaustive coupling search supports 2..={MAX_SEARCH_L} sources, got {l}"
        )));
    }
    let caps = capacity(alphas)?;
    let mut digits = vec![0usize; l];
    let mut best: Option<(i64, Vec<usize>, Vec<i64>)> = None;
    let mut best_cycle: Option<(i64, Vec<usize>)> = None;
    let mut best_other = -1;
    let mut examined = 0;
    loop {
        let r: Vec<usize> = digits
            .iter()
            .enumerate()
            .map(|(i, d)| if *d >= i { d + 1 } else { *d })
            .collect();
        let coupling = CouplingSpec::from_r(&r)?;
        let (n, w) = max_n_coupling(&caps, &coupling)?;
        examined += 1;
        if best.as_ref().is_none_or(|b| n > b.0) {
            best = Some((n, r.clone(), w));
        }
        if coupling.is_single_cycle() {
            if best_cycle.as_ref().is_none_or(|b| n > b.0) {
                best_cycle = Some((n, r.clone()));
            }
        } else {
            best_other = best_other.max(n);
        }
        let mut k = l;
        loop {
            if k == 0 {
                let (best_n, best_r, best_counts) = best.expect("at least one coupling");
                let (best_cycle_n, best_cycle_r) = best_cycle.expect("a cycle coupling exists");
                return Ok(CouplingSearch {
                    best_n,
                    best_r,
                    best_counts,
                    best_cycle_n,
                    best_cycle_r,
                    non_cycle_strictly_better: best_other > best_cycle_n,
                    couplings_examined: examined,
                });
            }
            k -= 1;
            if digits[k] + 2 < l {
                digits[k] += 1;
                for d in digits.iter_mut().skip(k + 1) {
                    *d = 0;
                }
                break;
            }
        }
    }
}
