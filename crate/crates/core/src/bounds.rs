//! Upper and lower bounds on the log-Sobolev constant of lamplighter chains,
//! Hypothesis (H) enumeration and the hypercube test-function certificate.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{build_complete, BaseGraph, SubsetMask, VertexId};
use crate::lamps::{FlipRateModel, LampChain, LampConfig, LampMeasure, LampSystem};
use crate::limits::Limits;
use crate::logsob::{
    cls_lower_from_witness, estimate_cls, lamp_cls_closed_form, ClsEstimate, ClsOptions,
};
use crate::spectral::{dirichlet_eigenpair, spectral_gap, GapOptions};
use crate::wreath::WreathChain;

pub const REPORT_VERSION: u32 = 1;

/// Scalars of a lamplighter chain that the bounds are expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainConstants {
    pub sites: usize,
    pub nu_star: f64,
    pub nu_max: f64,
    pub gap_nu: f64,
    /// `a = sup c_x(sigma)`.
    pub max_rate: f64,
    pub lamps_uniform: bool,
    pub nu_uniform: bool,
    /// `c_x(sigma) = 1/2` everywhere.
    pub half_rates: bool,
}

impl ChainConstants {
    pub fn of(base: &BaseGraph, lamps: &LampSystem, gap: &GapOptions) -> Result<Self> {
        let g = spectral_gap(base, gap)?;
        if !g.connected {
            return Err(Error::Domain("base graph is not connected".into()));
        }
        let w = base.nu().weights();
        Ok(Self {
            sites: base.vertex_count(),
            nu_star: base.nu_star(),
            nu_max: w.iter().copied().fold(0.0, f64::max),
            gap_nu: g.gap,
            max_rate: lamps.max_rate(),
            lamps_uniform: lamps.measure().is_uniform(),
            nu_uniform: base.nu().is_uniform(),
            half_rates: lamps.has_constant_rate(0.5),
        })
    }
}

/// `6 / (nu_* gap(nu))` for uniform lamps flipped at rate 1/2.
///
/// The derivation substitutes `C_LS(mu) = 2` and `gap(nu) <= 1`; the first
/// holds for uniform lamps only when every rate is exactly 1/2, so slower
/// constant rates are rejected along with the stated hypotheses.
pub fn thm1_upper(c: &ChainConstants) -> Result<f64> {
    if !c.lamps_uniform {
        return Err(Error::HypothesisViolated(
            "lamp measure is not uniform".into(),
        ));
    }
    if c.max_rate > 0.5 + 1e-12 {
        return Err(Error::HypothesisViolated(format!(
            "flip rates reach {} > 1/2",
            c.max_rate
        )));
    }
    if !c.half_rates {
        return Err(Error::HypothesisViolated(
            "the bound uses C_LS(mu) = 2, which needs every flip rate equal to 1/2".into(),
        ));
    }
    if c.gap_nu > 1.0 + 1e-12 {
        return Err(Error::HypothesisViolated(format!(
            "the bound uses gap(nu) <= 1, but gap(nu) = {}",
            c.gap_nu
        )));
    }
    Ok(6.0 / (c.nu_star * c.gap_nu))
}

/// `(1 / (2 nu_*)) max((1 + 12 a) / gap(nu), 6 C_LS(mu))`.
pub fn thm2_upper(c: &ChainConstants, cls_mu: f64) -> f64 {
    ((1.0 + 12.0 * c.max_rate) / c.gap_nu).max(6.0 * cls_mu) / (2.0 * c.nu_star)
}

/// `2 max(C_LS(mu), C_LS(nu))`.
pub fn remark1_lower(cls_mu: f64, cls_nu: f64) -> f64 {
    2.0 * cls_mu.max(cls_nu)
}

/// `max(C_LS(mu), C_LS(nu))`.
pub fn remark1_lower_undoubled(cls_mu: f64, cls_nu: f64) -> f64 {
    cls_mu.max(cls_nu)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HResult {
    /// `min { |B| / |G| : |closure(B)| >= |G| / 2 }` when `exact`.
    pub best_epsilon: f64,
    pub witness: Vec<VertexId>,
    pub closure_size: usize,
    /// False when the graph exceeded the enumeration cap and `witness` comes
    /// from a greedy search; `best_epsilon` is then only an upper estimate.
    pub exact: bool,
}

fn k_subsets(n: usize, k: usize) -> Vec<u64> {
    let mut out = Vec::new();
    let limit = 1u64 << n;
    let mut c = (1u64 << k) - 1;
    while c < limit {
        out.push(c);
        let u = c & c.wrapping_neg();
        let v = c + u;
        c = v + (((v ^ c) / u) >> 2);
    }
    out
}

/// Exact Hypothesis (H) optimum by enumeration in increasing cardinality.
///
/// Above `cap` vertices a greedy cover is returned with `exact = false`.
pub fn best_epsilon_h(g: &BaseGraph, cap: usize) -> Result<HResult> {
    let n = g.vertex_count();
    if n <= cap.min(40) {
        let masks = g.neighbor_masks();
        for k in 1..=n {
            let subsets = k_subsets(n, k);
            let hit = subsets.par_iter().find_first(|&&b| {
                let mut cl = 0u64;
                let mut rest = b;
                while rest != 0 {
                    cl |= masks[rest.trailing_zeros() as usize];
                    rest &= rest - 1;
                }
                2 * cl.count_ones() as usize >= n
            });
            if let Some(&b) = hit {
                let witness: Vec<VertexId> = (0..n).filter(|i| b >> i & 1 == 1).collect();
                let closure_size = closure_len(g, &witness);
                return Ok(HResult {
                    best_epsilon: k as f64 / n as f64,
                    witness,
                    closure_size,
                    exact: true,
                });
            }
        }
        unreachable!("the full vertex set covers at least half of the graph");
    }
    let mut covered = vec![false; n];
    let mut witness = Vec::new();
    let mut count = 0;
    while 2 * count < n {
        let (best, _) = (0..n)
            .filter(|v| !witness.contains(v))
            .map(|v| {
                let gain = g.neighbors(v).iter().filter(|&&(x, _)| !covered[x]).count();
                (v, gain)
            })
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .expect("uncovered graph has a free vertex");
        witness.push(best);
        for &(x, _) in g.neighbors(best) {
            if !covered[x] {
                covered[x] = true;
                count += 1;
            }
        }
    }
    witness.sort_unstable();
    Ok(HResult {
        best_epsilon: witness.len() as f64 / n as f64,
        closure_size: count,
        witness,
        exact: false,
    })
}

fn closure_len(g: &BaseGraph, b: &[VertexId]) -> usize {
    let mut seen = vec![false; g.vertex_count()];
    for &y in b {
        for &(x, _) in g.neighbors(y) {
            seen[x] = true;
        }
    }
    seen.iter().filter(|&&s| s).count()
}

/// `eps |G| / gap(nu)` for uniform `mu` and `nu` and a certified Hypothesis (H)
/// parameter `eps`.
pub fn prop_low_lower(c: &ChainConstants, eps: f64, h: &HResult) -> Result<f64> {
    if !(c.lamps_uniform && c.nu_uniform) {
        return Err(Error::HypothesisViolated(
            "the bound needs uniform lamp and base measures".into(),
        ));
    }
    if !h.exact {
        return Err(Error::HypothesisViolated(
            "Hypothesis (H) optimum is not certified (greedy estimate)".into(),
        ));
    }
    if !(eps > 0.0 && eps <= h.best_epsilon * (1.0 + 1e-12)) {
        return Err(Error::HypothesisViolated(format!(
            "epsilon {eps} exceeds the Hypothesis (H) optimum {}",
            h.best_epsilon
        )));
    }
    Ok(eps * c.sites as f64 / c.gap_nu)
}

/// The test function `g(x) 1{sigma_A = 1}` with `A` the Hypothesis (H)
/// witness and `g` the principal Dirichlet eigenfunction of the vertices
/// outside `A` and its closure. `None` when that region is empty.
pub fn prop_low_witness(chain: &WreathChain, h: &HResult) -> Result<Option<Vec<f64>>> {
    let base = chain.base();
    let n = base.vertex_count();
    let mut blocked = vec![false; n];
    for &y in &h.witness {
        blocked[y] = true;
        for &(x, _) in base.neighbors(y) {
            blocked[x] = true;
        }
    }
    let region = SubsetMask::from_indices(n, (0..n).filter(|&x| !blocked[x]));
    if region.is_empty() {
        return Ok(None);
    }
    let (_, g) = dirichlet_eigenpair(base, &region)?;
    let a_mask = h.witness.iter().fold(0u64, |m, &x| m | 1 << x);
    let index = chain.index();
    Ok(Some(
        (0..index.state_count())
            .map(|s| {
                let (sigma, x) = index.split(s);
                if sigma.bits() & a_mask == a_mask {
                    g[x]
                } else {
                    0.0
                }
            })
            .collect(),
    ))
}

/// `4 ln(2) n`, the value of the all-lamps-on test function on `K_n`.
pub fn complete_testfn_lower(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain(
            "complete graph needs at least one vertex".into(),
        ));
    }
    Ok(4.0 * std::f64::consts::LN_2 * n as f64)
}

/// `f(sigma, x) = 1{sigma = all on}`.
pub fn all_on_witness(chain: &WreathChain) -> Vec<f64> {
    let index = chain.index();
    let on = LampConfig::all_on(index.sites()).bits();
    (0..index.state_count())
        .map(|s| {
            if index.split(s).0.bits() == on {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}

/// The `K_n` test-function quotient recomputed from the raw entropy and
/// Dirichlet form on the enumerated chain.
pub fn complete_testfn_recompute(n: usize, limits: &Limits) -> Result<f64> {
    let chain = WreathChain::new(build_complete(n)?, LampSystem::uniform_half(n)?, limits)?;
    cls_lower_from_witness(&chain, &all_on_witness(&chain))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypercubeCertificate {
    pub n: usize,
    /// Largest `delta` with `|A_k| >= 2^N / 4` for every `k <= delta`.
    pub delta: usize,
    /// `|A_k|` for `k = 0..=delta`, exact decimal.
    pub shell_sizes: Vec<String>,
    /// `-|A_delta| ln 2`.
    pub log_mu: f64,
    pub nu_g2: f64,
    pub energy: f64,
    /// `nu(g^2) |A_delta| ln 2`.
    pub ent_lower: f64,
    /// `2 ent_lower / E_nu(g)`.
    pub lower_bound: f64,
    /// `lower_bound / (N 2^N)`.
    pub normalized: f64,
    /// `6 / (nu_* gap) = 3 N 2^N`.
    pub upper_bound: f64,
}

fn big_to_f64(x: &BigUint) -> Result<f64> {
    x.to_f64()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Domain("value overflows f64".into()))
}

/// Test-function lower bound for the lamplighter over the hypercube `{0,1}^N`,
/// computed on the Hamming-weight profile with exact binomial sums.
pub fn hypercube_certificate(n: usize) -> Result<HypercubeCertificate> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::Domain(format!(
            "hypercube dimension {n} must be even and >= 2"
        )));
    }
    if n > 1000 {
        return Err(Error::Domain(format!(
            "hypercube dimension {n} too large for f64 output"
        )));
    }
    let half = n / 2;
    let mut binom = Vec::with_capacity(n + 1);
    let mut c = BigUint::one();
    for i in 0..=n {
        binom.push(c.clone());
        c = c * (n - i) / (i + 1);
    }
    let total = BigUint::one() << n;
    let quarter = &total >> 2;
    // |A_k| = sum_{i <= N/2 - k} C(N, i)
    let shell = |k: usize| -> BigUint { binom[..=half - k].iter().sum() };
    let mut delta = 0;
    while delta < half && shell(delta + 1) >= quarter {
        delta += 1;
    }
    if delta < 2 {
        return Err(Error::InsufficientRadius {
            n,
            admissible: delta,
        });
    }
    let g = |w: usize| (0..=delta - 2).filter(|&k| w + k > half).count();
    let nu_num: BigUint = (0..=n)
        .map(|w| &binom[w] * BigUint::from(g(w) * g(w)))
        .sum();
    let energy_num: BigUint = (0..n)
        .map(|w| {
            let d = g(w + 1).abs_diff(g(w));
            &binom[w] * BigUint::from((n - w) * d * d)
        })
        .sum();
    if energy_num.is_zero() {
        return Err(Error::DegenerateDirichlet { energy: 0.0 });
    }
    let total_f = big_to_f64(&total)?;
    let nu_g2 = big_to_f64(&nu_num)? / total_f;
    let energy = big_to_f64(&energy_num)? / (n as f64 * total_f);
    let a_delta = shell(delta);
    let a_delta_f = big_to_f64(&a_delta)?;
    let ent_lower = nu_g2 * a_delta_f * std::f64::consts::LN_2;
    let lower_bound = 2.0 * ent_lower / energy;
    Ok(HypercubeCertificate {
        n,
        delta,
        shell_sizes: (0..=delta).map(|k| shell(k).to_string()).collect(),
        log_mu: -a_delta_f * std::f64::consts::LN_2,
        nu_g2,
        energy,
        ent_lower,
        lower_bound,
        normalized: lower_bound / (n as f64 * total_f),
        upper_bound: 3.0 * n as f64 * total_f,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Upper,
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bound {
    pub name: String,
    pub kind: BoundKind,
    pub value: f64,
    pub anchor: String,
    /// False when the value depends on a numerical estimate rather than a
    /// closed form or an exact witness.
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Skipped {
    pub name: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Component {
    pub value: f64,
    /// "closed form" or "estimate".
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainSummary {
    pub vertices: usize,
    pub states: usize,
    pub lamp_measure: String,
    pub rates: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub lower: String,
    pub lower_value: f64,
    pub upper: String,
    pub upper_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub version: u32,
    pub chain: ChainSummary,
    pub constants: ChainConstants,
    pub cls_mu: Component,
    pub cls_nu: Component,
    pub estimate: f64,
    pub estimate_detail: ClsEstimate,
    pub bounds: Vec<Bound>,
    pub skipped: Vec<Skipped>,
    pub verdict: Verdict,
    pub violations: Vec<Violation>,
    pub slack: f64,
}

impl BoundReport {
    /// Recomputes `violations` and `verdict` from the current values.
    pub fn recompute_verdict(&mut self) {
        let est = ("estimate".to_string(), self.estimate);
        let lowers: Vec<(String, f64)> = self
            .bounds
            .iter()
            .filter(|b| b.kind == BoundKind::Lower)
            .map(|b| (b.name.clone(), b.value))
            .chain(std::iter::once(est.clone()))
            .collect();
        let uppers: Vec<(String, f64)> = self
            .bounds
            .iter()
            .filter(|b| b.kind == BoundKind::Upper)
            .map(|b| (b.name.clone(), b.value))
            .chain(std::iter::once(est))
            .collect();
        self.violations = lowers
            .iter()
            .flat_map(|l| uppers.iter().map(move |u| (l, u)))
            .filter(|(l, u)| l.0 != u.0 && !(l.1 <= u.1 + self.slack))
            .map(|(l, u)| Violation {
                lower: l.0.clone(),
                lower_value: l.1,
                upper: u.0.clone(),
                upper_value: u.1,
            })
            .collect();
        self.verdict = if self.violations.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
    }

    pub fn bound(&self, name: &str) -> Option<&Bound> {
        self.bounds.iter().find(|b| b.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub cls: ClsOptions,
    pub h_cap: usize,
    pub slack: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            cls: ClsOptions::default(),
            h_cap: 24,
            slack: 1e-9,
        }
    }
}

fn describe_measure(m: &LampMeasure) -> String {
    match m {
        LampMeasure::Uniform { .. } => "uniform".into(),
        LampMeasure::Bernoulli { p, .. } => format!("bernoulli({p})"),
        LampMeasure::Gibbs { beta, .. } => format!("gibbs({beta})"),
    }
}

fn describe_rates(r: FlipRateModel) -> String {
    match r {
        FlipRateModel::Constant(c) => format!("constant({c})"),
        FlipRateModel::Bernoulli(p) => format!("bernoulli({p})"),
        FlipRateModel::HeatBath => "heat-bath".into(),
    }
}

/// Evaluates every applicable bound on `chain`, estimates `C_LS(pi)` and checks
/// that every lower bound sits below the estimate and every upper bound.
///
/// The estimator is seeded with the witnesses behind the lower bounds (lifted
/// base and lamp optimizers, the all-on indicator, the Hypothesis (H) test
/// function), so each witness value is below the estimate by construction.
pub fn verify_all(chain: &WreathChain, opts: &VerifyOptions) -> Result<BoundReport> {
    let base = chain.base();
    let lamps = chain.lamps();
    let consts = ChainConstants::of(base, lamps, &opts.cls.gap)?;
    let mut bounds = Vec::new();
    let mut skipped = Vec::new();
    let mut seeds = Vec::new();
    let mut push = |name: &str, kind, value, anchor: &str, certified| {
        bounds.push(Bound {
            name: name.into(),
            kind,
            value,
            anchor: anchor.into(),
            certified,
        })
    };

    let lamp_chain = LampChain::new(lamps.clone(), opts.cls.max_states)?;
    let lamp_est = estimate_cls(&lamp_chain, &opts.cls, &[])?;
    let cls_mu = match lamp_cls_closed_form(lamps) {
        Some(v) => Component {
            value: v,
            source: "closed form".into(),
        },
        None => Component {
            value: lamp_est.best_quotient,
            source: "estimate".into(),
        },
    };
    let base_est = estimate_cls(base, &opts.cls, &[])?;
    let cls_nu = Component {
        value: base_est.best_quotient,
        source: "estimate".into(),
    };
    seeds.push(chain.lift_lamps(&lamp_est.witness));
    seeds.push(chain.lift_base(&base_est.witness));

    match thm1_upper(&consts) {
        Ok(v) => push(
            "uniform_lamps_upper",
            BoundKind::Upper,
            v,
            "6 / (nu_* gap(nu))",
            true,
        ),
        Err(e) => skipped.push(Skipped {
            name: "uniform_lamps_upper".into(),
            reason: e.to_string(),
        }),
    }
    push(
        "general_upper",
        BoundKind::Upper,
        thm2_upper(&consts, cls_mu.value),
        "(1 / (2 nu_*)) max((1 + 12a) / gap(nu), 6 C_LS(mu))",
        cls_mu.source == "closed form",
    );
    if consts.sites == 2 && consts.nu_uniform && (consts.gap_nu - 1.0).abs() <= 1e-12 {
        push(
            "two_point_upper",
            BoundKind::Upper,
            12.0 * cls_mu.value,
            "12 C_LS(mu) on the symmetric two-point base",
            cls_mu.source == "closed form",
        );
    }

    push(
        "component_lower",
        BoundKind::Lower,
        remark1_lower(cls_mu.value, cls_nu.value),
        "2 max(C_LS(mu), C_LS(nu))",
        false,
    );
    push(
        "component_lower_undoubled",
        BoundKind::Lower,
        remark1_lower_undoubled(cls_mu.value, cls_nu.value),
        "max(C_LS(mu), C_LS(nu))",
        false,
    );
    let all_on = all_on_witness(chain);
    match cls_lower_from_witness(chain, &all_on) {
        Ok(v) => push(
            "all_on_witness",
            BoundKind::Lower,
            v,
            "Ent/E of 1{sigma = all on}",
            true,
        ),
        Err(e) => skipped.push(Skipped {
            name: "all_on_witness".into(),
            reason: e.to_string(),
        }),
    }
    seeds.push(all_on);
    if base.is_complete_uniform() && consts.lamps_uniform && consts.half_rates {
        push(
            "complete_graph_lower",
            BoundKind::Lower,
            complete_testfn_lower(consts.sites)?,
            "4 ln(2) |G|",
            true,
        );
    }
    for (name, f) in [
        ("lamp_functions_witness", &seeds[0]),
        ("base_functions_witness", &seeds[1]),
    ] {
        if let Ok(v) = cls_lower_from_witness(chain, f) {
            push(
                name,
                BoundKind::Lower,
                v,
                "Ent/E of a lifted component optimizer",
                true,
            );
        }
    }

    if consts.lamps_uniform && consts.nu_uniform {
        match best_epsilon_h(base, opts.h_cap) {
            Ok(h) => {
                match prop_low_lower(&consts, h.best_epsilon, &h) {
                    Ok(v) => push(
                        "hypothesis_h_lower",
                        BoundKind::Lower,
                        v,
                        "eps |G| / gap(nu)",
                        true,
                    ),
                    Err(e) => skipped.push(Skipped {
                        name: "hypothesis_h_lower".into(),
                        reason: e.to_string(),
                    }),
                }
                if let Some(f) = prop_low_witness(chain, &h)? {
                    if let Ok(v) = cls_lower_from_witness(chain, &f) {
                        push(
                            "hypothesis_h_witness",
                            BoundKind::Lower,
                            v,
                            "Ent/E of g(x) 1{sigma_A = 1}",
                            true,
                        );
                    }
                    seeds.push(f);
                }
            }
            Err(e) => skipped.push(Skipped {
                name: "hypothesis_h_lower".into(),
                reason: e.to_string(),
            }),
        }
    } else {
        skipped.push(Skipped {
            name: "hypothesis_h_lower".into(),
            reason: "needs uniform lamp and base measures".into(),
        });
    }

    let estimate = estimate_cls(chain, &opts.cls, &seeds)?;
    bounds.push(Bound {
        name: "linearization_lower".into(),
        kind: BoundKind::Lower,
        value: estimate.analytic_lower,
        anchor: "2 / gap(pi)".into(),
        certified: true,
    });
    let mut report = BoundReport {
        version: REPORT_VERSION,
        chain: ChainSummary {
            vertices: consts.sites,
            states: chain.index().state_count(),
            lamp_measure: describe_measure(lamps.measure()),
            rates: describe_rates(lamps.rates()),
        },
        constants: consts,
        cls_mu,
        cls_nu,
        estimate: estimate.best_quotient,
        estimate_detail: estimate,
        bounds,
        skipped,
        verdict: Verdict::Pass,
        violations: Vec::new(),
        slack: opts.slack,
    };
    report.recompute_verdict();
    Ok(report)
}
