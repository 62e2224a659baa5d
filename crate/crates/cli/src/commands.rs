//! Single-chain subcommands.

use lamplighter::bounds::{
    best_epsilon_h, hypercube_certificate, prop_low_lower, verify_all, ChainConstants, Verdict,
    VerifyOptions,
};
use lamplighter::lamps::LampChain;
use lamplighter::logsob::{estimate_cls, lamp_cls_closed_form};
use lamplighter::spectral::{check_goel, spectral_gap, spectral_profile};
use lamplighter::{Error, LampSystem, ReversibleChain, WreathChain};
use serde_json::{json, Value};

use crate::args::{CertArgs, ChainArgs, Format, Target};
use crate::build::{base_graph, lamp_system, Settings};
use crate::output::{Report, FORMAT_VERSION};
use crate::{Failure, EXIT_OK, EXIT_VIOLATION};

fn report(command: &str, mut body: Value) -> Report {
    let map = body.as_object_mut().expect("report bodies are objects");
    map.insert("version".into(), json!(FORMAT_VERSION));
    map.insert("command".into(), json!(command));
    Report {
        body,
        code: EXIT_OK,
        default_format: Format::Json,
        notes: Vec::new(),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("library types serialize")
}

fn target_name(t: Target) -> &'static str {
    match t {
        Target::Base => "base",
        Target::Lamps => "lamps",
        Target::Wreath => "wreath",
    }
}

enum Built {
    Base(lamplighter::BaseGraph),
    Lamps(LampChain, LampSystem),
    Wreath(Box<WreathChain>),
}

impl Built {
    fn chain(&self) -> &dyn ReversibleChain {
        match self {
            Built::Base(g) => g,
            Built::Lamps(c, _) => c,
            Built::Wreath(w) => w.as_ref(),
        }
    }
}

fn build(a: &ChainArgs, s: &Settings, target: Target) -> Result<Built, Failure> {
    let base = base_graph(&a.graph, &s.limits)?;
    if target == Target::Base {
        return Ok(Built::Base(base));
    }
    let lamps = lamp_system(&a.lamps, &base, &s.limits)?;
    Ok(match target {
        Target::Lamps => Built::Lamps(
            LampChain::new(lamps.clone(), s.limits.max_lamp_configs)?,
            lamps,
        ),
        _ => Built::Wreath(Box::new(WreathChain::new(base, lamps, &s.limits)?)),
    })
}

pub fn gap(a: &ChainArgs, s: &Settings) -> Result<Report, Failure> {
    let target = a.target.unwrap_or(Target::Base);
    let built = build(a, s, target)?;
    let chain = built.chain();
    let g = spectral_gap(chain, &s.gap())?;
    let mut r = report(
        "gap",
        json!({
            "target": target_name(target),
            "states": chain.state_count(),
            "gap": g.gap,
            "inverse_gap": if g.connected { json!(1.0 / g.gap) } else { Value::Null },
            "method": to_value(&g.method),
            "residual": g.residual,
            "iterations": g.iterations,
            "connected": g.connected,
        }),
    );
    if !g.connected {
        r.notes
            .push("chain is not connected; gap reported as 0".into());
    }
    Ok(r)
}

pub fn cls(a: &ChainArgs, s: &Settings) -> Result<Report, Failure> {
    let target = a.target.unwrap_or(Target::Wreath);
    let built = build(a, s, target)?;
    let chain = built.chain();
    let est = estimate_cls(chain, &s.cls(), &[])?;
    let closed_form = match &built {
        Built::Lamps(_, sys) => lamp_cls_closed_form(sys),
        _ => None,
    };
    Ok(report(
        "cls",
        json!({
            "target": target_name(target),
            "states": chain.state_count(),
            "seed": s.seed,
            "estimate": to_value(&est),
            "closed_form": closed_form,
        }),
    ))
}

pub fn verify(a: &ChainArgs, s: &Settings) -> Result<Report, Failure> {
    let base = base_graph(&a.graph, &s.limits)?;
    let lamps = lamp_system(&a.lamps, &base, &s.limits)?;
    let chain = WreathChain::new(base, lamps, &s.limits)?;
    let opts = VerifyOptions {
        cls: s.cls(),
        h_cap: s.limits.max_h_vertices,
        slack: s.slack,
    };
    let rep = verify_all(&chain, &opts)?;
    let mut body = to_value(&rep);
    body.as_object_mut()
        .expect("object")
        .insert("seed".into(), json!(s.seed));
    let mut out = report("verify", body);
    if rep.verdict == Verdict::Fail {
        out.code = EXIT_VIOLATION;
        for v in &rep.violations {
            out.notes.push(format!(
                "{} = {} exceeds {} = {}",
                v.lower, v.lower_value, v.upper, v.upper_value
            ));
        }
    }
    Ok(out)
}

pub fn profile(a: &ChainArgs, s: &Settings) -> Result<Report, Failure> {
    let base = base_graph(&a.graph, &s.limits)?;
    let cap = s.limits.max_profile_vertices;
    let opts = s.subset();
    let goel = check_goel(&base, cap, &s.gap(), &opts)?;
    let point = if a.r == 0.5 {
        goel.profile.clone()
    } else {
        spectral_profile(&base, a.r, cap, &opts)?
    };
    Ok(report(
        "profile",
        json!({
            "vertices": base.vertex_count(),
            "seed": s.seed,
            "gap": goel.gap,
            "profile": to_value(&point),
            "goel": {
                "half": goel.profile.value,
                "literal": to_value(&goel.literal),
                "reciprocal": to_value(&goel.reciprocal),
                "linear": to_value(&goel.linear),
            },
        }),
    ))
}

pub fn epsilon_h(a: &ChainArgs, s: &Settings) -> Result<Report, Failure> {
    let base = base_graph(&a.graph, &s.limits)?;
    let h = best_epsilon_h(&base, s.limits.max_h_vertices)?;
    let lamps = LampSystem::uniform_half(base.vertex_count())?;
    let consts = ChainConstants::of(&base, &lamps, &s.gap())?;
    let lower = match prop_low_lower(&consts, h.best_epsilon, &h) {
        Ok(v) => Some(v),
        Err(Error::HypothesisViolated(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let stated = a
        .graph
        .torus
        .map(|_| 1.0 / (2.0 * (2 * a.graph.dim + 1) as f64));
    Ok(report(
        "epsilon-h",
        json!({
            "vertices": base.vertex_count(),
            "h": to_value(&h),
            "gap": consts.gap_nu,
            "lower_bound": lower,
            "torus_epsilon": stated,
        }),
    ))
}

pub fn hypercube_cert(a: &CertArgs) -> Result<Report, Failure> {
    let cert = hypercube_certificate(a.n)?;
    Ok(report(
        "hypercube-cert",
        json!({
            "certificate": to_value(&cert),
        }),
    ))
}
