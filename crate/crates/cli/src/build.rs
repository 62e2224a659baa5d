//! Chains, limits and solver options from parsed flags.

use std::fs;
use std::path::Path;

use lamplighter::graph::{
    build_complete, build_hypercube, build_torus, build_tree, build_two_point, load_graph,
};
use lamplighter::lamps::load_lamp_system;
use lamplighter::logsob::ClsOptions;
use lamplighter::spectral::{GapOptions, SubsetOptions};
use lamplighter::{BaseGraph, FlipRateModel, LampMeasure, LampSystem, Limits};

use crate::args::{GraphArgs, LampArgs, RunArgs};
use crate::Failure;

fn positive<T: PartialOrd + Default + Copy + std::fmt::Display>(
    name: &str,
    v: Option<T>,
) -> Result<Option<T>, Failure> {
    match v {
        Some(x) if !(x > T::default()) => Err(Failure::Input(format!(
            "--{name} must be positive, got {x}"
        ))),
        other => Ok(other),
    }
}

/// Checked view of the run flags.
#[derive(Debug, Clone, Copy)]
pub struct Settings {
    pub seed: u64,
    pub restarts: Option<usize>,
    pub max_iters: Option<usize>,
    pub tol: Option<f64>,
    pub workers: Option<usize>,
    pub slack: f64,
    pub limits: Limits,
}

impl Settings {
    pub fn from_args(run: &RunArgs) -> Result<Self, Failure> {
        let mut limits = Limits::default();
        let caps = [
            ("max-states", run.max_states, &mut limits.max_states),
            (
                "dense-threshold",
                run.dense_threshold,
                &mut limits.dense_threshold,
            ),
            (
                "max-optimizer-states",
                run.max_optimizer_states,
                &mut limits.max_optimizer_states,
            ),
            (
                "max-h-vertices",
                run.max_h_vertices,
                &mut limits.max_h_vertices,
            ),
            (
                "max-profile-vertices",
                run.max_profile_vertices,
                &mut limits.max_profile_vertices,
            ),
        ];
        for (name, value, slot) in caps {
            if let Some(v) = positive(name, value)? {
                *slot = v;
            }
        }
        if let Some(t) = run.tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(Failure::Input(format!("--tol must be positive, got {t}")));
            }
        }
        if !(run.slack.is_finite() && run.slack >= 0.0) {
            return Err(Failure::Input(format!(
                "--slack must be nonnegative, got {}",
                run.slack
            )));
        }
        Ok(Self {
            seed: run.seed,
            restarts: positive("restarts", run.restarts)?,
            max_iters: positive("max-iters", run.max_iters)?,
            tol: run.tol,
            workers: positive("workers", run.workers)?,
            slack: run.slack,
            limits,
        })
    }

    pub fn gap(&self) -> GapOptions {
        let d = GapOptions::default();
        GapOptions {
            dense_threshold: self.limits.dense_threshold,
            tol: self.tol.unwrap_or(d.tol),
            seed: self.seed,
            ..d
        }
    }

    pub fn cls(&self) -> ClsOptions {
        let d = ClsOptions::default();
        ClsOptions {
            restarts: self.restarts.unwrap_or(d.restarts),
            seed: self.seed,
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            tol: self.tol.unwrap_or(d.tol),
            max_states: self.limits.max_optimizer_states,
            gap: self.gap(),
        }
    }

    pub fn subset(&self) -> SubsetOptions {
        let d = SubsetOptions::default();
        SubsetOptions {
            restarts: self.restarts.unwrap_or(d.restarts),
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            seed: self.seed,
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

pub fn base_graph(g: &GraphArgs, limits: &Limits) -> Result<BaseGraph, Failure> {
    let cap = limits.max_vertices;
    let graph = if let Some(n) = g.torus {
        build_torus(n, g.dim, cap)?
    } else if let Some(n) = g.complete {
        build_complete(n)?
    } else if let (Some(b), Some(depth)) = (g.tree, g.depth) {
        build_tree(b, depth, cap)?
    } else if let Some(n) = g.hypercube {
        build_hypercube(n, cap)?
    } else if g.two_point {
        build_two_point()
    } else if let Some(path) = &g.graph {
        load_graph(&read(path)?)?
    } else {
        return Err(Failure::Input("no graph source given".into()));
    };
    Ok(graph)
}

/// Splits `kind:value` into its parts.
fn spec(s: &str) -> Result<(&str, Option<f64>), Failure> {
    match s.split_once(':') {
        None => Ok((s, None)),
        Some((kind, v)) => v
            .parse::<f64>()
            .map(|x| (kind, Some(x)))
            .map_err(|_| Failure::Input(format!("cannot parse number in '{s}'"))),
    }
}

fn need(s: &str, v: Option<f64>) -> Result<f64, Failure> {
    v.ok_or_else(|| Failure::Input(format!("'{s}' needs a value, as in {s}:0.5")))
}

pub fn lamp_system(l: &LampArgs, base: &BaseGraph, limits: &Limits) -> Result<LampSystem, Failure> {
    let n = base.vertex_count();
    let cap = limits.max_lamp_configs;
    if let Some(path) = &l.lamp_file {
        return Ok(load_lamp_system(&read(path)?, base, cap)?);
    }
    let (kind, value) = spec(&l.lamps)?;
    let measure = match kind {
        "uniform" => LampMeasure::uniform(n)?,
        "bernoulli" => LampMeasure::bernoulli(n, need(kind, value)?)?,
        "gibbs" => LampMeasure::gibbs(base, need(kind, value)?, cap)?,
        other => return Err(Failure::Input(format!("unknown lamp measure '{other}'"))),
    };
    let rates = match l.rates.as_deref().map(spec).transpose()? {
        None => match &measure {
            LampMeasure::Uniform { .. } => FlipRateModel::Constant(0.5),
            LampMeasure::Bernoulli { p, .. } => FlipRateModel::Bernoulli(*p),
            LampMeasure::Gibbs { .. } => FlipRateModel::HeatBath,
        },
        Some(("constant", v)) => FlipRateModel::Constant(need("constant", v)?),
        Some(("bernoulli", v)) => FlipRateModel::Bernoulli(need("bernoulli", v)?),
        Some(("heatbath", _)) => FlipRateModel::HeatBath,
        Some((other, _)) => return Err(Failure::Input(format!("unknown rate model '{other}'"))),
    };
    Ok(LampSystem::new(measure, rates)?)
}
