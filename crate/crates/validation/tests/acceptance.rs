//! End-to-end acceptance suite. Each criterion prints one PASS/FAIL line; the
//! test fails if any criterion fails.

use std::f64::consts::{LN_2, PI};
use std::time::{Duration, Instant};

use lamplighter::bounds::{
    best_epsilon_h, complete_testfn_recompute, hypercube_certificate, thm1_upper, verify_all,
    BoundReport, ChainConstants, Verdict, VerifyOptions,
};
use lamplighter::graph::{
    build_complete, build_random_reversible, build_torus, build_two_point, validate_reversibility,
};
use lamplighter::lamps::LampChain;
use lamplighter::logsob::{bernoulli_closed_form, estimate_cls, ClsOptions};
use lamplighter::seeding::rng_for;
use lamplighter::spectral::{
    lambda_subset, spectral_gap, spectral_profile, GapOptions, SubsetOptions,
};
use lamplighter::{
    entropy_of_square, BaseGraph, Error, FlipRateModel, LampMeasure, LampSystem, Limits,
    ReversibleChain, SubsetMask, WreathChain,
};
use rand::Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, secs: f64) -> bool {
    elapsed.as_secs_f64() < secs
}

fn verify(base: BaseGraph, lamps: LampSystem) -> BoundReport {
    let chain = WreathChain::new(base, lamps, &Limits::default()).unwrap();
    verify_all(&chain, &VerifyOptions::default()).unwrap()
}

fn violations(r: &BoundReport) -> String {
    r.violations
        .iter()
        .map(|v| {
            format!(
                "{}={:.4}>{}={:.4}",
                v.lower, v.lower_value, v.upper, v.upper_value
            )
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn complete_graph_bracket() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut notes = Vec::new();
    for n in 3..=5 {
        let r = verify(
            build_complete(n).unwrap(),
            LampSystem::uniform_half(n).unwrap(),
        );
        let (lo, hi) = (4.0 * LN_2 * n as f64, 6.0 * n as f64);
        let inside = r.estimate >= lo - 1e-9 && r.estimate <= hi + 1e-9;
        let witness = complete_testfn_recompute(n, &Limits::default()).unwrap();
        let witness_ok = (witness - lo).abs() <= 1e-12 * lo;
        let ok = r.verdict == Verdict::Pass && inside && witness_ok;
        pass &= ok;
        notes.push(format!(
            "K_{n}: estimate {:.4} in [{lo:.4}, {hi}]? {inside}, witness ok {witness_ok}, verdict {:?}",
            r.estimate, r.verdict
        ));
    }
    let t = start.elapsed();
    check(
        pass && within(t, 30.0),
        format!("{} ({t:.1?})", notes.join("; ")),
    )
}

fn two_point_bracket() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut notes = Vec::new();
    for p in [0.5, 0.3, 0.1] {
        let r = verify(build_two_point(), LampSystem::bernoulli(2, p).unwrap());
        pass &= r.verdict == Verdict::Pass;
        notes.push(format!(
            "p={p}: estimate {:.4}, verdict {:?} {}",
            r.estimate,
            r.verdict,
            violations(&r)
        ));
    }
    let t = start.elapsed();
    check(
        pass && within(t, 5.0),
        format!("{} ({t:.1?})", notes.join("; ")),
    )
}

fn closed_form_recovery() -> Outcome {
    let start = Instant::now();
    let opts = ClsOptions::default();
    let mut pass = true;
    let mut notes = Vec::new();
    let mut cases: Vec<(String, LampSystem, f64)> = [0.1, 0.25, 0.4]
        .iter()
        .map(|&p| {
            (
                format!("bernoulli {p}"),
                LampSystem::bernoulli(2, p).unwrap(),
                bernoulli_closed_form(p).unwrap(),
            )
        })
        .collect();
    cases.push(("uniform".into(), LampSystem::uniform_half(2).unwrap(), 2.0));
    for (name, sys, expected) in cases {
        let chain = LampChain::new(sys, 1 << 20).unwrap();
        let est = estimate_cls(&chain, &opts, &[]).unwrap().best_quotient;
        let ok = (est - expected).abs() <= 0.01 * expected;
        pass &= ok;
        notes.push(format!("{name}: {est:.6} vs {expected:.6}"));
    }
    let t = start.elapsed();
    check(
        pass && within(t, 10.0),
        format!("{} ({t:.1?})", notes.join("; ")),
    )
}

fn theorem_consistency() -> Outcome {
    let cap = 1 << 20;
    let bases: Vec<(&str, BaseGraph)> = vec![
        ("two-point", build_two_point()),
        ("K_3", build_complete(3).unwrap()),
        ("K_4", build_complete(4).unwrap()),
        ("K_5", build_complete(5).unwrap()),
        ("Z_4", build_torus(4, 1, cap).unwrap()),
        ("Z_6", build_torus(6, 1, cap).unwrap()),
        ("Z_8", build_torus(8, 1, cap).unwrap()),
    ];
    let mut pass = true;
    let mut notes = Vec::new();
    for (name, base) in bases {
        let n = base.vertex_count();
        let r = verify(base, LampSystem::uniform_half(n).unwrap());
        let value = |b: &str| r.bound(b).map(|x| x.value);
        let (Some(t1), Some(t2), Some(low)) = (
            value("uniform_lamps_upper"),
            value("general_upper"),
            value("component_lower"),
        ) else {
            pass = false;
            notes.push(format!("{name}: bound missing"));
            continue;
        };
        let s = r.slack;
        let ordered = t1 + s >= t2 && t2 + s >= low;
        let inside = low <= r.estimate + s && r.estimate <= t1.min(t2) + s;
        let ok = ordered && inside && r.violations.is_empty();
        pass &= ok;
        notes.push(format!(
            "{name}: thm1 {t1:.3} thm2 {t2:.3} lower {low:.3} estimate {:.3} {}",
            r.estimate,
            if ok { "ok".to_string() } else { violations(&r) }
        ));
    }
    check(pass, notes.join("; "))
}

fn hypothesis_h() -> Outcome {
    let start = Instant::now();
    let cap = 1 << 20;
    let z8 = best_epsilon_h(&build_torus(8, 1, cap).unwrap(), 24).unwrap();
    let mut pass = z8.exact && z8.best_epsilon == 0.25 && z8.witness.len() == 2;
    let mut notes = vec![format!(
        "Z_8: eps {} witness {:?}",
        z8.best_epsilon, z8.witness
    )];
    for (side, d) in [(4, 1), (8, 1), (4, 2)] {
        let h = best_epsilon_h(&build_torus(side, d, cap).unwrap(), 24).unwrap();
        let stated = 1.0 / (2.0 * (2 * d + 1) as f64);
        pass &= h.exact && h.best_epsilon >= stated;
        notes.push(format!("Z_{side}^{d}: {} >= {stated:.4}", h.best_epsilon));
    }
    let t = start.elapsed();
    check(
        pass && within(t, 60.0),
        format!("{} ({t:.1?})", notes.join("; ")),
    )
}

fn spectral_scaling() -> Outcome {
    let sizes = [8usize, 12, 16, 20, 24, 28, 32];
    let mut pts = Vec::new();
    let mut worst: f64 = 0.0;
    for &n in &sizes {
        let g = build_torus(n, 1, 1 << 20).unwrap();
        let gap = spectral_gap(&g, &GapOptions::default()).unwrap().gap;
        let exact = 1.0 - (2.0 * PI / n as f64).cos();
        worst = worst.max((gap - exact).abs() / exact);
        pts.push(((n as f64).ln(), (1.0 / gap).ln()));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    check(
        (slope - 2.0).abs() <= 0.2 && worst <= 1e-8,
        format!("slope {slope:.4}, worst relative gap error {worst:.2e}"),
    )
}

fn hypercube() -> Outcome {
    let start = Instant::now();
    let gate = matches!(
        hypercube_certificate(16),
        Err(Error::InsufficientRadius { .. })
    );
    let mut pass = gate;
    let mut norm = Vec::new();
    for n in [36usize, 64, 100] {
        let c = hypercube_certificate(n).unwrap();
        let consts = ChainConstants {
            sites: n,
            nu_star: 0.5f64.powi(n as i32),
            nu_max: 0.5f64.powi(n as i32),
            gap_nu: 2.0 / n as f64,
            max_rate: 0.5,
            lamps_uniform: true,
            nu_uniform: true,
            half_rates: true,
        };
        let upper = thm1_upper(&consts).unwrap();
        pass &= c.lower_bound <= upper;
        norm.push(c.normalized);
    }
    let spread =
        norm.iter().cloned().fold(0.0, f64::max) / norm.iter().cloned().fold(f64::MAX, f64::min);
    let t = start.elapsed();
    pass &= spread <= 4.0 && within(t, 2.0);
    check(
        pass,
        format!("N=16 gated {gate}; L/(N 2^N) = {norm:.4?}; spread {spread:.3} ({t:.1?})"),
    )
}

fn lamp_system(base: &BaseGraph, kind: u32, param: f64) -> LampSystem {
    let n = base.vertex_count();
    match kind % 3 {
        0 => LampSystem::new(
            LampMeasure::uniform(n).unwrap(),
            FlipRateModel::Constant(param),
        )
        .unwrap(),
        1 => LampSystem::bernoulli(n, param).unwrap(),
        _ => LampSystem::ising(base, 2.0 * param - 1.0, 1 << 22).unwrap(),
    }
}

/// Checks one random instance and returns the first failed property.
fn structural_instance(i: u64) -> Result<(), String> {
    let mut rng = rng_for(2024, 8, i);
    let n = 2 + (i as usize % 9);
    let g = build_random_reversible(n, rng.gen_range(0.0..0.8), rng.gen())
        .map_err(|e| e.to_string())?;
    let nu = g.nu().weights();
    for x in 0..n {
        let s: f64 = g.neighbors(x).iter().map(|&(_, p)| p).sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(format!("row {x} sums to {s}"));
        }
    }
    if (nu.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err("nu does not sum to 1".into());
    }
    let rev = validate_reversibility(&g).max_violation;
    if rev > 1e-12 {
        return Err(format!("detailed balance off by {rev:e}"));
    }

    let lamps = lamp_system(&g, rng.gen(), rng.gen_range(0.05..0.95));
    let chain =
        WreathChain::new(g.clone(), lamps, &Limits::default()).map_err(|e| e.to_string())?;
    let pi = chain.measure().weights();
    let out_rates: Vec<Vec<(usize, f64)>> = (0..chain.state_count())
        .map(|s| {
            let mut row = Vec::new();
            chain.for_each_rate(s, &mut |t, r| row.push((t, r)));
            row
        })
        .collect();
    for (s, row) in out_rates.iter().enumerate() {
        for &(t, r) in row {
            let back: f64 = out_rates[t].iter().filter(|e| e.0 == s).map(|e| e.1).sum();
            let fwd: f64 = row.iter().filter(|e| e.0 == t).map(|e| e.1).sum();
            if (pi[s] * fwd - pi[t] * back).abs() > 1e-14 {
                return Err(format!(
                    "pi-reversibility fails at ({s}, {t}) with rate {r}"
                ));
            }
        }
    }
    let f: Vec<f64> = (0..chain.state_count())
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    let energy = chain.dirichlet(&f);
    let lf = chain.apply_generator(&f);
    let form = -chain.measure().inner(&f, &lf);
    if energy < 0.0 || (form - energy).abs() > 1e-11 * energy.abs().max(1e-300) {
        return Err(format!("-pi(f L f) = {form} but E = {energy}"));
    }
    let ent = entropy_of_square(chain.measure(), &f).map_err(|e| e.to_string())?;
    if ent < 0.0 {
        return Err(format!("negative entropy {ent}"));
    }

    let opts = SubsetOptions {
        restarts: 4,
        seed: i,
        ..SubsetOptions::default()
    };
    let full = (1u64 << n) - 1;
    let bits = rng.gen_range(1..full);
    let lam =
        lambda_subset(&g, &SubsetMask::from_bits(n, bits), &opts).map_err(|e| e.to_string())?;
    let slack = 1e-9 * lam.upper.max(1.0);
    if !(lam.lower <= lam.value + slack && lam.value <= lam.upper + slack) {
        return Err(format!(
            "lambda(S) = {} outside [{}, {}]",
            lam.value, lam.lower, lam.upper
        ));
    }
    let gap = spectral_gap(&g, &GapOptions::default())
        .map_err(|e| e.to_string())?
        .gap;
    let mut prev = f64::INFINITY;
    for r in [0.25, 0.5] {
        match spectral_profile(&g, r, 20, &opts) {
            Ok(p) => {
                if p.value > prev * (1.0 + 1e-9) || p.value < gap * (1.0 - 1e-9) {
                    return Err(format!(
                        "profile {} at r = {r} after {prev}, gap {gap}",
                        p.value
                    ));
                }
                prev = p.value;
            }
            Err(Error::Domain(_)) => {}
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok(())
}

fn structural_suite() -> Outcome {
    let start = Instant::now();
    let failures: Vec<String> = (0..200)
        .filter_map(|i| structural_instance(i).err().map(|e| format!("#{i}: {e}")))
        .collect();
    let t = start.elapsed();
    check(
        failures.is_empty(),
        format!(
            "200 instances, {} failed {} ({t:.1?})",
            failures.len(),
            failures.join("; ")
        ),
    )
}

fn determinism() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for cmd in [
        "cls --complete 3 --target wreath --seed 5",
        "cls --torus 4 --target base --seed 5",
        "verify --two-point --lamps bernoulli:0.3 --seed 5",
        "verify --torus 4 --seed 5",
    ] {
        let go = |workers: &str| {
            let args = format!("lamplighter {cmd} --workers {workers}");
            lamplighter_cli::run(args.split_whitespace())
        };
        let (a, b, c) = (go("1"), go("1"), go("4"));
        let ok = !a.stdout.is_empty()
            && a.stdout == b.stdout
            && a.stdout == c.stdout
            && a.code == c.code;
        pass &= ok;
        notes.push(format!(
            "{cmd}: {}",
            if ok { "identical" } else { "differs" }
        ));
    }
    check(pass, notes.join("; "))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 9] = [
        ("complete-graph bracket", complete_graph_bracket),
        ("two-point bracket", two_point_bracket),
        ("closed-form recovery", closed_form_recovery),
        ("theorem consistency", theorem_consistency),
        ("Hypothesis (H)", hypothesis_h),
        ("spectral scaling", spectral_scaling),
        ("hypercube certificate", hypercube),
        ("structural properties", structural_suite),
        ("determinism", determinism),
    ];
    println!();
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let out = run();
        let tag = if out.pass { "PASS" } else { "FAIL" };
        println!("criterion {} [{tag}] {name}: {}", i + 1, out.detail);
        if !out.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
