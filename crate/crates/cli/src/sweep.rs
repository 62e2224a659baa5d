//! Parameter sweeps over graph families, one table row per instance.

use lamplighter::bounds::{
    best_epsilon_h, complete_testfn_lower, hypercube_certificate, prop_low_lower, thm1_upper,
    ChainConstants,
};
use lamplighter::graph::{build_complete, build_torus};
use lamplighter::logsob::estimate_cls;
use lamplighter::spectral::spectral_gap;
use lamplighter::{BaseGraph, Error, LampSystem, WreathChain};
use serde_json::{json, Map, Value};

use crate::args::{Family, Format, SweepArgs};
use crate::build::Settings;
use crate::output::{Report, FORMAT_VERSION};
use crate::{Failure, EXIT_OK};

/// Parses `A:B:STEP`, `A:B` or `A,B,C` into the listed sizes.
pub fn parse_range(s: &str) -> Result<Vec<usize>, Failure> {
    let bad = || Failure::Input(format!("cannot parse range '{s}'"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let (a, b, step) = match parts.as_slice() {
            [a, b] => (num(a)?, num(b)?, 1),
            [a, b, c] => (num(a)?, num(b)?, num(c)?),
            _ => return Err(bad()),
        };
        if step == 0 || a > b {
            return Err(bad());
        }
        Ok((a..=b).step_by(step).collect())
    } else {
        s.split(',').map(num).collect()
    }
}

const CYCLE: &[&str] = &[
    "gap",
    "inv_gap",
    "inv_nu_star",
    "thm1_upper",
    "epsilon_h",
    "prop_low_lower",
];
const CYCLE_EXTRA: &[&str] = &["linearization_lower", "estimate"];
const COMPLETE: &[&str] = &["gap", "inv_nu_star", "lower", "upper"];
const COMPLETE_EXTRA: &[&str] = &["linearization_lower", "estimate"];
const CERT: &[&str] = &["delta", "lower_bound", "normalized", "upper_bound"];

fn columns(family: Family) -> (&'static [&'static str], &'static [&'static str]) {
    match family {
        Family::Cycle => (CYCLE, CYCLE_EXTRA),
        Family::Complete => (COMPLETE, COMPLETE_EXTRA),
        Family::HypercubeCert => (CERT, &[]),
    }
}

fn family_name(f: Family) -> &'static str {
    match f {
        Family::Cycle => "cycle",
        Family::Complete => "complete",
        Family::HypercubeCert => "hypercube-cert",
    }
}

/// Cells of one row; errors are collected rather than aborting the sweep.
struct Row<'a> {
    wanted: &'a [String],
    cells: Map<String, Value>,
    errors: Vec<String>,
    worst: i32,
}

impl Row<'_> {
    fn wants(&self, c: &str) -> bool {
        self.wanted.iter().any(|w| w == c)
    }

    fn put<T: Into<Value>>(&mut self, c: &str, v: Result<T, Error>) {
        if !self.wants(c) {
            return;
        }
        match v {
            Ok(x) => {
                self.cells.insert(c.into(), x.into());
            }
            // The bound does not apply to this instance.
            Err(Error::HypothesisViolated(_)) => {}
            Err(e) => self.fail(c, e.into()),
        }
    }

    fn fail(&mut self, c: &str, f: Failure) {
        self.worst = self.worst.max(f.code());
        self.errors.push(format!("{c}: {}", f.message()));
    }
}

fn chain_rows(row: &mut Row, base: BaseGraph, s: &Settings) -> Result<(), Failure> {
    let n = base.vertex_count();
    let lamps = LampSystem::uniform_half(n)?;
    let consts = ChainConstants::of(&base, &lamps, &s.gap())?;
    row.put("gap", Ok(consts.gap_nu));
    row.put("inv_gap", Ok(1.0 / consts.gap_nu));
    row.put("inv_nu_star", Ok(1.0 / consts.nu_star));
    row.put("thm1_upper", thm1_upper(&consts));
    row.put("upper", thm1_upper(&consts));
    row.put("lower", complete_testfn_lower(n));
    if (row.wants("epsilon_h") || row.wants("prop_low_lower")) && n <= s.limits.max_h_vertices {
        let h = best_epsilon_h(&base, s.limits.max_h_vertices)?;
        row.put("epsilon_h", Ok(h.best_epsilon));
        row.put(
            "prop_low_lower",
            prop_low_lower(&consts, h.best_epsilon, &h),
        );
    }
    if row.wants("linearization_lower") || row.wants("estimate") {
        let chain = WreathChain::new(base, lamps, &s.limits)?;
        if row.wants("estimate") {
            let est = estimate_cls(&chain, &s.cls(), &[]);
            row.put(
                "linearization_lower",
                est.as_ref().map(|e| e.analytic_lower).map_err(clone_err),
            );
            row.put("estimate", est.map(|e| e.best_quotient));
        } else {
            let g = spectral_gap(&chain, &s.gap()).map(|g| 2.0 / g.gap);
            row.put("linearization_lower", g);
        }
    }
    Ok(())
}

fn clone_err(e: &Error) -> Error {
    Error::Domain(e.to_string())
}

fn fill(row: &mut Row, family: Family, n: usize, s: &Settings) -> Result<(), Failure> {
    match family {
        Family::Cycle => chain_rows(row, build_torus(n, 1, s.limits.max_vertices)?, s),
        Family::Complete => chain_rows(row, build_complete(n)?, s),
        Family::HypercubeCert => {
            let c = hypercube_certificate(n)?;
            row.put("delta", Ok(c.delta));
            row.put("lower_bound", Ok(c.lower_bound));
            row.put("normalized", Ok(c.normalized));
            row.put("upper_bound", Ok(c.upper_bound));
            Ok(())
        }
    }
}

pub fn sweep(a: &SweepArgs, s: &Settings) -> Result<Report, Failure> {
    let sizes = parse_range(&a.n)?;
    let (defaults, extra) = columns(a.family);
    let wanted: Vec<String> = match &a.emit {
        None => defaults.iter().map(|c| c.to_string()).collect(),
        Some(list) => {
            let cols: Vec<String> = list.split(',').map(|c| c.trim().to_string()).collect();
            if let Some(bad) = cols
                .iter()
                .find(|c| !defaults.contains(&c.as_str()) && !extra.contains(&c.as_str()))
            {
                return Err(Failure::Input(format!(
                    "unknown column '{bad}' for family {}; available: {}",
                    family_name(a.family),
                    [defaults, extra].concat().join(", ")
                )));
            }
            cols
        }
    };
    let mut rows = Vec::with_capacity(sizes.len());
    let mut code = EXIT_OK;
    for n in sizes {
        let mut row = Row {
            wanted: &wanted,
            cells: Map::new(),
            errors: Vec::new(),
            worst: EXIT_OK,
        };
        row.cells.insert("n".into(), json!(n));
        if let Err(f) = fill(&mut row, a.family, n, s) {
            row.fail("row", f);
        }
        code = code.max(row.worst);
        let error = (!row.errors.is_empty()).then(|| row.errors.join("; "));
        row.cells.insert("error".into(), json!(error));
        rows.push(Value::Object(row.cells));
    }
    let mut names = vec!["n".to_string()];
    names.extend(wanted.iter().cloned());
    names.push("error".into());
    Ok(Report {
        body: json!({
            "version": FORMAT_VERSION,
            "command": "sweep",
            "family": family_name(a.family),
            "seed": s.seed,
            "columns": names,
            "rows": rows,
        }),
        code,
        default_format: Format::Csv,
        notes: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_syntaxes() {
        assert_eq!(parse_range("4:16:4").unwrap(), vec![4, 8, 12, 16]);
        assert_eq!(parse_range("3:6").unwrap(), vec![3, 4, 5, 6]);
        assert_eq!(parse_range("36,64,100").unwrap(), vec![36, 64, 100]);
        assert!(parse_range("5:3").is_err());
        assert!(parse_range("1:4:0").is_err());
        assert!(parse_range("x").is_err());
    }
}
