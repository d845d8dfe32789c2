//! Subcommand bodies. Each returns the files to write and a one-line summary.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{coupling_from_sets, FiberConfig, ProblemConfig};
use super::Command;
use crate::combinatorics::{
    best_coupling_search, coupling_feasible, max_n_coupling, max_n_exact, max_n_general, max_n_increasing, order_blocks,
    CouplingSpec, MAX_SEARCH_L,
};
use crate::dynamics::{integrate_with, Integrator, Status};
use crate::energy::{check_theorem_conditions, ProblemSpec, PsiSign, System, VortexConfig};
use crate::equilibrium::{find_critical_points, SearchOptions};
use crate::error::{Error, Result};
use crate::fibers::{
    collapse_slope, intersection_csv, intersection_table, log_space, nesting_angles, separation_delta, FiberLayout,
};

/// Flags shared by all subcommands.
#[derive(Debug, Clone)]
pub struct Context {
    pub seed: u64,
    pub threads: Option<usize>,
    pub dry_run: bool,
}

/// Files to write, in order, and a summary for stdout.
#[derive(Debug, Clone, Default)]
pub struct Outputs {
    pub files: Vec<(String, String)>,
    pub summary: String,
}

impl Outputs {
    fn validated(command: Command) -> Self {
        Self {
            files: Vec::new(),
            summary: format!("{}: configuration valid\n", command.name()),
        }
    }

    fn json(mut self, name: &str, value: &impl Serialize) -> Result<Self> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Numerical(e.to_string()))?;
        text.push('\n');
        self.files.push((name.to_string(), text));
        Ok(self)
    }

    fn text(mut self, name: &str, contents: String) -> Self {
        self.files.push((name.to_string(), contents));
        self
    }

    fn summary(mut self, line: String) -> Result<Self> {
        self.summary = line + "\n";
        Ok(self)
    }
}

pub fn execute(command: Command, cfg: &ProblemConfig, ctx: &Context) -> Result<Outputs> {
    match command {
        Command::Energy => energy(cfg, ctx),
        Command::Grad => grad(cfg, ctx),
        Command::Simulate => simulate(cfg, ctx),
        Command::FindEq => find_eq(cfg, ctx),
        Command::FiberScan => fiber_scan(cfg, ctx),
        Command::Maxn => maxn(cfg, ctx),
        Command::Coupling => coupling(cfg, ctx),
        Command::Check => check(cfg, ctx),
    }
}

fn rng(ctx: &Context) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(ctx.seed)
}

fn positions_json(cfg: &VortexConfig) -> Vec<[f64; 3]> {
    cfg.positions.iter().map(|p| [p.x, p.y, p.z]).collect()
}

fn load(cfg: &ProblemConfig, ctx: &Context) -> Result<(System, VortexConfig, bool)> {
    let system = cfg.system()?;
    let (vortices, sampled) = cfg.vortex_config(&system, &mut rng(ctx))?;
    system.check_admissible(&vortices)?;
    Ok((system, vortices, sampled))
}

fn energy(cfg: &ProblemConfig, ctx: &Context) -> Result<Outputs> {
    let (system, v, sampled) = load(cfg, ctx)?;
    if ctx.dry_run {
        return Ok(Outputs::validated(Command::Energy));
    }
    let h = system.hamiltonian_reduced(&v)?;
    let out = json!({
        "seed": ctx.seed,
        "positions_sampled": sampled,
        "positions": positions_json(&v),
        "gamma": v.strengths,
        "hamiltonian": h,
        "hamiltonian_free": system.hamiltonian_free(&v)?,
        "phi": system.phi(&v)?,
        "psi_plus": system.psi_pm(&v, PsiSign::Plus)?,
        "psi_minus": system.psi_pm(&v, PsiSign::Minus)?,
        "regular_sum": system.regular_sum(&v)?,
    });
    Outputs::default()
        .json("energy.json", &out)?
        .summary(format!("energy: H = {h:.12e}"))
}

fn grad(cfg: &ProblemConfig, ctx: &Context) -> Result<Outputs> {
    let (system, v, sampled) = load(cfg, ctx)?;
    if ctx.dry_run {
        return Ok(Outputs::validated(Command::Grad));
    }
    let g = system.grad_hamiltonian(&v)?;
    let norm = g.iter().map(|t| t.norm_squared()).sum::<f64>().sqrt();
    let out = json!({
        "seed": ctx.seed,
        "positions_sampled": sampled,
        "positions": positions_json(&v),
        "gamma": v.strengths,
        "gradient": g.iter().map(|t| [t.x, t.y, t.z]).collect::<Vec<_>>(),
        "grad_norm": norm,
    });
    Outputs::default()
        .json("grad.json", &out)?
        .summary(format!("grad: |grad H| = {norm:.6e}"))
}

fn simulate(cfg: &ProblemConfig, ctx: &Context) -> Result<Outputs> {
    let sim = cfg
        .simulate
        .as_ref()
        .ok_or_else(|| Error::validation("simulate: section required"))?;
    if !(sim.step > 0.0 && sim.step.is_finite()) {
        return Err(Error::validation(format!("simulate.step: must be positive, got {}", sim.step)));
    }
    if !(sim.t_end > 0.0 && sim.t_end.is_finite()) {
        return Err(Error::validation(format!("simulate.t_end: must be positive, got {}", sim.t_end)));
    }
    let (system, v, sampled) = load(cfg, ctx)?;
    if ctx.dry_run {
        return Ok(Outputs::validated(Command::Simulate));
    }
    let opts = Integrator::new(sim.method, sim.step).record_every(sim.record_every);
    let traj = integrate_with(&system, &v, sim.t_end, &opts)?;
    let status = match &traj.status {
        Status::Completed => "completed".to_string(),
        Status::Collision { time, what, .. } => format!("collision of {what} at t = {time}"),
    };
    let out = json!({
        "seed": ctx.seed,
        "positions_sampled": sampled,
        "method": sim.method,
        "step": sim.step,
        "t_end": sim.t_end,
        "rows": traj.len(),
        "status": traj.status,
        "relative_energy_drift": traj.relative_energy_drift(),
        "moment_drift": traj.moment_drift(),
    });
    Outputs::default()
        .text("trajectory.csv", traj.to_csv())
        .json("simulate.json", &out)?
        .summary(format!("simulate: {} rows, {status}", traj.len()))
}

fn find_eq(cfg: &ProblemConfig, ctx: &Context) -> Result<Outputs> {
    let system = cfg.system()?;
    let gammas = cfg.gammas()?;
    if let Some(j) = gammas.iter().position(|g| !(*g > 0.0)) {
        return Err(Error::validation(format!("vortices.gamma[{j}]: must be positive")));
    }
    if cfg.search.starts == 0 {
        return Err(Error::validation("search.starts: must be at least 1"));
    }
    if ctx.dry_run {
        return Ok(Outputs::validated(Command::FindEq));
    }
    let opts = SearchOptions {
        m_level: cfg.domain.m_level,
        starts: cfg.search.starts,
        seed: ctx.seed,
        tol: cfg.tolerances.grad,
        max_iter: cfg.search.max_iter,
        threads: ctx.threads,
    };
    let result = find_critical_points(&system, &gammas, &opts)?;
    let stats = json!({
        "seed": ctx.seed,
        "stats": result.stats,
        "found": result.points.len(),
    });
    Outputs::default()
        .json("equilibria.json", &result.points)?
        .json("find-eq.json", &stats)?
        .summary(format!(
            "find-eq: {} distinct critical points from {} starts",
            result.points.len(),
            result.stats.starts
        ))
}

fn fiber_layout(f: &FiberConfig) -> Result<FiberLayout> {
    let l = f.alphas.len();
    let coupling = match &f.coupling {
        Some(sets) => coupling_from_sets(sets, l, "fibers.coupling")?,
        None => CouplingSpec::consecutive(l).map_err(|e| super::config::at("fibers.alphas", e))?,
    };
    let n = f.groups.len();
    let strengths = f.strengths.clone().unwrap_or_else(|| vec![1.0; n]);
    let angles = f.angles.clone().unwrap_or_else(|| nesting_angles(&f.groups));
    FiberLayout::new(coupling, f.groups.clone(), angles, strengths, f.alphas.clone())
        .map_err(|e| super::config::at("fibers", e))
}

fn fiber_scan(cfg: &ProblemConfig, ctx: &Context) -> Result<Outputs> {
    let f = cfg
        .fibers
        .as_ref()
        .ok_or_else(|| Error::validation("fibers: section required"))?;
    let layout = fiber_layout(f)?;
    if !(f.rho_min > 0.0 && f.rho_min < f.rho_max) {
        return Err(Error::validation("fibers: need 0 < rho_min < rho_max"));
    }
    if !(f.delta_rho_min > 0.0) {
        return Err(Error::validation("fibers.delta_rho_min: must be positive"));
    }
    if ctx.dry_run {
        return Ok(Outputs::validated(Command::FiberScan));
    }
    let slope = collapse_slope(&layout, f.anchor, &log_space(f.rho_min, f.rho_max, f.samples))?;
    let rows = intersection_table(&layout);
    let fibers = layout.fibers();
    let mut separations = Vec::new();
    for j in 0..fibers.len() {
        for k in j + 1..fibers.len() {
            let pair_seed = ctx.seed ^ ((j as u64) << 32 | k as u64);
            let est = separation_delta(&fibers[j], &fibers[k], f.delta_samples, f.delta_rho_min, pair_seed)?;
            separations.push(json!({ "j": j, "k": k, "estimate": est }));
        }
    }
    let out = json!({
        "seed": ctx.seed,
        "anchor": slope.anchor,
        "movers": slope.movers,
        "measured_slope": slope.measured,
        "predicted_slope": slope.predicted,
        "relative_error": slope.relative_error(),
        "separations": separations,
        "intersections_match": rows.iter().all(|r| r.matches),
    });
    Outputs::default()
        .text("collapse.csv", slope.to_csv())
        .text("intersections.csv", intersection_csv(&rows))
        .json("fiber-scan.json", &out)?
        .summary(format!(
            "fiber-scan: slope {:.6e} (predicted {:.6e})",
            slope.measured, slope.predicted
        ))
}

fn maxn(cfg: &ProblemConfig, ctx: &Context) -> Result<Outputs> {
    let caps = cfg.capacities()?;
    let coupling = cfg.coupling(caps.len())?;
    if ctx.dry_run {
        return Ok(Outputs::validated(Command::Maxn));
    }
    let result = match &coupling {
        Some(c) if !c.is_consecutive() => max_n_general(&caps, c)?,
        _ => max_n_exact(&caps)?,
    };
    let increasing = if caps.windows(2).all(|w| w[0] <= w[1]) && coupling.is_none() {
        Some(max_n_increasing(&caps)?)
    } else {
        None
    };
    let mut out = serde_json::to_value(&result).map_err(|e| Error::Numerical(e.to_string()))?;
    if let Value::Object(map) = &mut out {
        map.insert("increasing_formula".into(), json!(increasing));
        map.insert("seed".into(), json!(ctx.seed));
    }
    Outputs::default()
        .json("maxn.json", &out)?
        .summary(format!("maxn: N = {} with witness {:?}", result.n_exact, result.witness))
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|x| x + 1).collect()
}

fn coupling(cfg: &ProblemConfig, ctx: &Context) -> Result<Outputs> {
    let alphas = cfg.combinatoric_alphas();
    let caps = cfg.capacities()?;
    let l = caps.len();
    let spec = match cfg.coupling(l)? {
        Some(c) => c,
        None => CouplingSpec::consecutive(l).map_err(|e| super::config::at("combinatorics", e))?,
    };
    let counts = cfg.counts()?;
    if let Some(c) = &counts {
        if c.len() != l {
            return Err(Error::validation(format!("combinatorics.counts: {} entries for {l} sources", c.len())));
        }
    }
    if ctx.dry_run {
        return Ok(Outputs::validated(Command::Coupling));
    }
    let feasibility = match (&counts, alphas.len() == l) {
        (Some(c), true) => Some(coupling_feasible(&alphas, c, &spec)?),
        _ => None,
    };
    let (best, witness) = max_n_coupling(&caps, &spec)?;
    let ordering = order_blocks(&spec)?;
    let blocks: Vec<Value> = ordering
        .blocks
        .iter()
        .map(|b| {
            json!({
                "members": one_based(&b.members),
                "start": b.start + 1,
                "source": b.source,
                "strict": b.strict,
                "nested": b.nested,
            })
        })
        .collect();
    let relabeled: Vec<Vec<usize>> = ordering.relabeled.sets().iter().map(|s| one_based(s)).collect();
    let search = if (2..=MAX_SEARCH_L).contains(&l) && alphas.len() == l {
        Some(best_coupling_search(&alphas)?)
    } else {
        None
    };
    let out = json!({
        "seed": ctx.seed,
        "capacities": caps,
        "coupling": spec.sets().iter().map(|s| one_based(s)).collect::<Vec<_>>(),
        "feasibility": feasibility,
        "max_n": best,
        "witness": witness,
        "ordering": {
            "permutation": one_based(&ordering.permutation),
            "blocks": blocks,
            "relabeled": relabeled,
            "all_strict": ordering.all_strict(),
        },
        "search": search,
    });
    Outputs::default()
        .json("coupling.json", &out)?
        .summary(format!("coupling: max N = {best}, strict ordering {}", ordering.all_strict()))
}

fn check(cfg: &ProblemConfig, ctx: &Context) -> Result<Outputs> {
    let gammas = cfg.gammas()?;
    let alphas = if cfg.sources.is_empty() {
        cfg.combinatoric_alphas()
    } else {
        cfg.alphas()
    };
    let l = alphas.len();
    let mut spec = ProblemSpec::new(gammas, alphas);
    spec.tol = cfg.tolerances.compactness;
    spec.groups = cfg
        .vortices
        .as_ref()
        .and_then(|v| v.groups.as_ref())
        .map(|g| g.iter().map(|x| x.wrapping_sub(1)).collect());
    spec.counts = cfg.combinatorics.as_ref().and_then(|c| c.counts.clone());
    spec.coupling = cfg.coupling(l)?;
    let report = check_theorem_conditions(&spec)?;
    let quantity = if cfg.sources.is_empty() {
        None
    } else {
        let (system, v, sampled) = load(cfg, ctx)?;
        Some((system, v, sampled))
    };
    if ctx.dry_run {
        return Ok(Outputs::validated(Command::Check));
    }
    let a = match &quantity {
        Some((system, v, sampled)) => {
            let a = system.quantity_a(v)?;
            let sign = if a.value < 0.0 {
                "negative"
            } else if a.value > 0.0 {
                "positive"
            } else {
                "zero"
            };
            Some(json!({
                "value": a.value,
                "sign": sign,
                "weights": a.weights,
                "brackets": a.brackets,
                "positions": positions_json(v),
                "positions_sampled": sampled,
            }))
        }
        None => None,
    };
    let all_hold = report.outcomes.iter().all(|o| o.holds);
    let mut line: Vec<String> = report
        .outcomes
        .iter()
        .map(|o| format!("{} {}", o.name, if o.holds { "pass" } else { "fail" }))
        .collect();
    if let Some(a) = &a {
        line.push(format!("A {}", a["sign"].as_str().unwrap_or("?")));
    }
    let out = json!({
        "seed": ctx.seed,
        "conditions": report.outcomes,
        "all_hold": all_hold,
        "quantity_a": a,
    });
    Outputs::default()
        .json("check.json", &out)?
        .summary(format!("check: {}", line.join(", ")))
}
