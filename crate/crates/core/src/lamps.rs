//! Lamp configurations, lamp equilibrium measures and single-site flip rates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{log_sum_exp, ReversibleChain, WeightedSpace};
use crate::graph::{BaseGraph, VertexId};

/// A lamp configuration `sigma in {0,1}^G`; bit `x` is `sigma(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LampConfig {
    bits: u64,
    width: usize,
}

impl LampConfig {
    pub fn new(bits: u64, width: usize) -> Self {
        assert!(width <= 64, "at most 64 lamps are representable");
        let mask = if width == 64 {
            u64::MAX
        } else {
            (1u64 << width) - 1
        };
        assert_eq!(bits & !mask, 0, "bits beyond width {width}");
        Self { bits, width }
    }

    pub fn all_on(width: usize) -> Self {
        let bits = if width == 64 {
            u64::MAX
        } else {
            (1u64 << width) - 1
        };
        Self::new(bits, width)
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn width(self) -> usize {
        self.width
    }

    #[inline]
    pub fn get(self, x: VertexId) -> bool {
        self.bits >> x & 1 == 1
    }

    /// `sigma^x`: the configuration flipped at `x`.
    #[inline]
    pub fn flip(self, x: VertexId) -> Self {
        debug_assert!(x < self.width);
        Self {
            bits: self.bits ^ (1 << x),
            width: self.width,
        }
    }

    pub fn count_on(self) -> usize {
        self.bits.count_ones() as usize
    }
}

/// Equilibrium measure of the lamps.
#[derive(Debug, Clone, PartialEq)]
pub enum LampMeasure {
    Uniform {
        sites: usize,
    },
    /// Independent lamps, each on with probability `p`.
    Bernoulli {
        sites: usize,
        p: f64,
    },
    /// Ising measure `exp(beta sum_{x~y} s(x) s(y)) / Z` with spins `s = 2 sigma - 1`,
    /// free boundary, unit coupling, edges taken from the base graph.
    Gibbs {
        sites: usize,
        beta: f64,
        edges: Vec<(VertexId, VertexId)>,
        site_neighbors: Vec<Vec<VertexId>>,
        log_partition: f64,
    },
}

fn check_width(sites: usize) -> Result<()> {
    if sites == 0 || sites > 64 {
        return Err(Error::Domain(format!(
            "lamp count {sites} must be in 1..=64"
        )));
    }
    Ok(())
}

impl LampMeasure {
    pub fn uniform(sites: usize) -> Result<Self> {
        check_width(sites)?;
        Ok(Self::Uniform { sites })
    }

    pub fn bernoulli(sites: usize, p: f64) -> Result<Self> {
        check_width(sites)?;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!(
                "Bernoulli parameter {p} not in (0, 1)"
            )));
        }
        Ok(Self::Bernoulli { sites, p })
    }

    /// Ising measure on the edges of `base`; the partition function is an
    /// exhaustive sum over `2^|G|` configurations, so `2^|G| <= cap`.
    pub fn gibbs(base: &BaseGraph, beta: f64, cap: usize) -> Result<Self> {
        let sites = base.vertex_count();
        check_width(sites)?;
        if !beta.is_finite() {
            return Err(Error::Domain(format!(
                "inverse temperature {beta} not finite"
            )));
        }
        let configs = config_count(sites, cap, "Gibbs partition sum")?;
        let edges = base.edges();
        let mut site_neighbors = vec![Vec::new(); sites];
        for &(x, y) in &edges {
            site_neighbors[x].push(y);
            site_neighbors[y].push(x);
        }
        let energies: Vec<f64> = (0..configs as u64)
            .map(|bits| beta * ising_energy(&edges, bits))
            .collect();
        let log_partition = log_sum_exp(&energies);
        Ok(Self::Gibbs {
            sites,
            beta,
            edges,
            site_neighbors,
            log_partition,
        })
    }

    pub fn sites(&self) -> usize {
        match self {
            Self::Uniform { sites } | Self::Bernoulli { sites, .. } | Self::Gibbs { sites, .. } => {
                *sites
            }
        }
    }

    /// Uniform, including `Bernoulli(1/2)`.
    pub fn is_uniform(&self) -> bool {
        match self {
            Self::Uniform { .. } => true,
            Self::Bernoulli { p, .. } => *p == 0.5,
            Self::Gibbs { beta, .. } => *beta == 0.0,
        }
    }

    /// Exact `log mu(sigma)`.
    pub fn log_weight(&self, sigma: LampConfig) -> f64 {
        debug_assert_eq!(sigma.width(), self.sites());
        match self {
            Self::Uniform { sites } => -(*sites as f64) * std::f64::consts::LN_2,
            Self::Bernoulli { sites, p } => {
                let on = sigma.count_on() as f64;
                on * p.ln() + (*sites as f64 - on) * (-p).ln_1p()
            }
            Self::Gibbs {
                beta,
                edges,
                log_partition,
                ..
            } => beta * ising_energy(edges, sigma.bits()) - log_partition,
        }
    }

    pub fn weight(&self, sigma: LampConfig) -> f64 {
        self.log_weight(sigma).exp()
    }

    /// `log mu(sigma^x) - log mu(sigma)`, computed locally.
    pub fn log_flip_ratio(&self, sigma: LampConfig, x: VertexId) -> f64 {
        match self {
            Self::Uniform { .. } => 0.0,
            Self::Bernoulli { p, .. } => {
                let r = (-p).ln_1p() - p.ln();
                if sigma.get(x) {
                    r
                } else {
                    -r
                }
            }
            Self::Gibbs {
                beta,
                site_neighbors,
                ..
            } => {
                let sx = spin(sigma, x);
                let field: f64 = site_neighbors[x].iter().map(|&y| spin(sigma, y)).sum();
                -2.0 * beta * sx * field
            }
        }
    }
}

#[inline]
fn spin(sigma: LampConfig, x: VertexId) -> f64 {
    if sigma.get(x) {
        1.0
    } else {
        -1.0
    }
}

/// `sum_{(x,y) in E} s(x) s(y)` for the configuration `bits`.
fn ising_energy(edges: &[(VertexId, VertexId)], bits: u64) -> f64 {
    edges
        .iter()
        .map(|&(x, y)| {
            if (bits >> x ^ bits >> y) & 1 == 0 {
                1.0
            } else {
                -1.0
            }
        })
        .sum()
}

pub(crate) fn config_count(sites: usize, cap: usize, what: &'static str) -> Result<usize> {
    if sites >= 63 || (1usize << sites) > cap {
        return Err(Error::cap(what, 1u128 << sites.min(127), cap as u128));
    }
    Ok(1usize << sites)
}

/// Flip-rate model `c_x(sigma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FlipRateModel {
    /// `c_x(sigma) = c`; requires a uniform lamp measure.
    Constant(f64),
    /// `1 - p` to switch a lamp off, `p` to switch it on.
    Bernoulli(f64),
    /// `mu(sigma^x) / (mu(sigma) + mu(sigma^x))`.
    HeatBath,
}

/// `c_x(sigma)` without checking that the model suits `mu`.
pub fn rate_unchecked(
    model: FlipRateModel,
    mu: &LampMeasure,
    sigma: LampConfig,
    x: VertexId,
) -> f64 {
    match model {
        FlipRateModel::Constant(c) => c,
        FlipRateModel::Bernoulli(p) => {
            if sigma.get(x) {
                1.0 - p
            } else {
                p
            }
        }
        FlipRateModel::HeatBath => logistic(mu.log_flip_ratio(sigma, x)),
    }
}

/// `1 / (1 + exp(-t))` without overflow.
fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Rejects rate models that are not reversible for `mu`.
pub fn check_compatible(model: FlipRateModel, mu: &LampMeasure) -> Result<()> {
    match model {
        FlipRateModel::Constant(c) => {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::Domain(format!("constant rate {c} must be positive")));
            }
            if !mu.is_uniform() {
                return Err(Error::IncompatibleModel(
                    "constant flip rates need the uniform lamp measure".into(),
                ));
            }
        }
        FlipRateModel::Bernoulli(p) => {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::Domain(format!(
                    "Bernoulli rate parameter {p} not in (0, 1)"
                )));
            }
            let matches = match mu {
                LampMeasure::Bernoulli { p: q, .. } => (p - q).abs() <= 1e-12,
                LampMeasure::Uniform { .. } => p == 0.5,
                LampMeasure::Gibbs { .. } => false,
            };
            if !matches {
                return Err(Error::IncompatibleModel(format!(
                    "Bernoulli({p}) rates need the Bernoulli({p}) lamp measure"
                )));
            }
        }
        FlipRateModel::HeatBath => {}
    }
    Ok(())
}

/// `c_x(sigma)` for a model that is compatible with `mu`.
pub fn flip_rate(
    model: FlipRateModel,
    mu: &LampMeasure,
    sigma: LampConfig,
    x: VertexId,
) -> Result<f64> {
    check_compatible(model, mu)?;
    Ok(rate_unchecked(model, mu, sigma, x))
}

/// Exact `a = sup_{x, sigma} c_x(sigma)`.
pub fn max_rate(model: FlipRateModel, mu: &LampMeasure) -> f64 {
    match model {
        FlipRateModel::Constant(c) => c,
        FlipRateModel::Bernoulli(p) => p.max(1.0 - p),
        FlipRateModel::HeatBath => match mu {
            LampMeasure::Uniform { .. } => 0.5,
            LampMeasure::Bernoulli { p, .. } => p.max(1.0 - p),
            // Every neighborhood pattern is reachable, so the supremum is
            // attained with all neighbors opposing the flipped spin.
            LampMeasure::Gibbs {
                beta,
                site_neighbors,
                ..
            } => site_neighbors
                .iter()
                .map(|nb| logistic(2.0 * beta.abs() * nb.len() as f64))
                .fold(0.0, f64::max),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LampBalanceReport {
    pub max_violation: f64,
    pub worst: Option<(u64, VertexId)>,
}

/// Exhaustive `max |mu(sigma) c_x(sigma) - mu(sigma^x) c_x(sigma^x)|`.
pub fn validate_lamp_detailed_balance(
    model: FlipRateModel,
    mu: &LampMeasure,
    cap: usize,
) -> Result<LampBalanceReport> {
    let sites = mu.sites();
    let configs = config_count(sites, cap, "lamp configurations")?;
    let mut report = LampBalanceReport {
        max_violation: 0.0,
        worst: None,
    };
    for bits in 0..configs as u64 {
        let sigma = LampConfig::new(bits, sites);
        for x in 0..sites {
            let tau = sigma.flip(x);
            let lhs = mu.weight(sigma) * rate_unchecked(model, mu, sigma, x);
            let rhs = mu.weight(tau) * rate_unchecked(model, mu, tau, x);
            let v = (lhs - rhs).abs();
            if v > report.max_violation {
                report.max_violation = v;
                report.worst = Some((bits, x));
            }
        }
    }
    Ok(report)
}

/// A lamp measure paired with a compatible flip-rate model.
#[derive(Debug, Clone, PartialEq)]
pub struct LampSystem {
    measure: LampMeasure,
    rates: FlipRateModel,
    max_rate: f64,
}

impl LampSystem {
    pub fn new(measure: LampMeasure, rates: FlipRateModel) -> Result<Self> {
        check_compatible(rates, &measure)?;
        let max_rate = max_rate(rates, &measure);
        Ok(Self {
            measure,
            rates,
            max_rate,
        })
    }

    /// Uniform lamps with constant rate 1/2.
    pub fn uniform_half(sites: usize) -> Result<Self> {
        Self::new(LampMeasure::uniform(sites)?, FlipRateModel::Constant(0.5))
    }

    /// Bernoulli(p) lamps with the matching Bernoulli rates.
    pub fn bernoulli(sites: usize, p: f64) -> Result<Self> {
        Self::new(
            LampMeasure::bernoulli(sites, p)?,
            FlipRateModel::Bernoulli(p),
        )
    }

    /// Ising lamps on the base edges with heat-bath rates.
    pub fn ising(base: &BaseGraph, beta: f64, cap: usize) -> Result<Self> {
        Self::new(
            LampMeasure::gibbs(base, beta, cap)?,
            FlipRateModel::HeatBath,
        )
    }

    pub fn measure(&self) -> &LampMeasure {
        &self.measure
    }

    pub fn rates(&self) -> FlipRateModel {
        self.rates
    }

    pub fn sites(&self) -> usize {
        self.measure.sites()
    }

    /// `a = sup c_x(sigma)`.
    pub fn max_rate(&self) -> f64 {
        self.max_rate
    }

    #[inline]
    pub fn rate(&self, sigma: LampConfig, x: VertexId) -> f64 {
        rate_unchecked(self.rates, &self.measure, sigma, x)
    }

    /// True when `c_x(sigma)` is the same number for every `x` and `sigma`.
    pub fn has_constant_rate(&self, value: f64) -> bool {
        match self.rates {
            FlipRateModel::Constant(c) => c == value,
            FlipRateModel::Bernoulli(p) => p == 0.5 && value == 0.5,
            FlipRateModel::HeatBath => self.measure.is_uniform() && value == 0.5,
        }
    }
}

/// JSON lamp-system document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LampSystemDocument {
    pub measure: MeasureSpec,
    pub rates: RateSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MeasureSpec {
    Uniform,
    Bernoulli { p: f64 },
    Gibbs { beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RateSpec {
    Constant { c: f64 },
    Bernoulli { p: f64 },
    Heatbath,
}

impl LampSystemDocument {
    pub fn into_system(self, base: &BaseGraph, cap: usize) -> Result<LampSystem> {
        let sites = base.vertex_count();
        let measure = match self.measure {
            MeasureSpec::Uniform => LampMeasure::uniform(sites)?,
            MeasureSpec::Bernoulli { p } => LampMeasure::bernoulli(sites, p)?,
            MeasureSpec::Gibbs { beta } => LampMeasure::gibbs(base, beta, cap)?,
        };
        let rates = match self.rates {
            RateSpec::Constant { c } => FlipRateModel::Constant(c),
            RateSpec::Bernoulli { p } => FlipRateModel::Bernoulli(p),
            RateSpec::Heatbath => FlipRateModel::HeatBath,
        };
        LampSystem::new(measure, rates)
    }
}

/// Parses a lamp-system document against `base`.
pub fn load_lamp_system(document: &str, base: &BaseGraph, cap: usize) -> Result<LampSystem> {
    let doc: LampSystemDocument =
        serde_json::from_str(document).map_err(|e| Error::Schema(e.to_string()))?;
    doc.into_system(base, cap)
}

/// The lamp dynamics alone: a chain on `{0,1}^G` flipping site `x` at rate
/// `c_x(sigma)`.
#[derive(Debug, Clone)]
pub struct LampChain {
    system: LampSystem,
    mu: WeightedSpace,
    rates: Vec<f64>,
}

impl LampChain {
    pub fn new(system: LampSystem, cap: usize) -> Result<Self> {
        let sites = system.sites();
        let configs = config_count(sites, cap, "lamp configurations")?;
        let logw = (0..configs as u64)
            .map(|b| system.measure.log_weight(LampConfig::new(b, sites)))
            .collect();
        let mu = WeightedSpace::from_log_weights(logw)?;
        let mut rates = Vec::with_capacity(configs * sites);
        for b in 0..configs as u64 {
            let sigma = LampConfig::new(b, sites);
            rates.extend((0..sites).map(|x| system.rate(sigma, x)));
        }
        Ok(Self { system, mu, rates })
    }

    pub fn system(&self) -> &LampSystem {
        &self.system
    }
}

impl ReversibleChain for LampChain {
    fn measure(&self) -> &WeightedSpace {
        &self.mu
    }

    fn for_each_rate(&self, s: usize, visit: &mut dyn FnMut(usize, f64)) {
        let sites = self.system.sites();
        for x in 0..sites {
            visit(s ^ (1 << x), self.rates[s * sites + x]);
        }
    }
}

/// `E_mu(h) = 1/2 sum_sigma sum_x mu(sigma) c_x(sigma) (h(sigma^x) - h(sigma))^2`.
pub fn lamp_dirichlet(chain: &LampChain, h: &[f64]) -> f64 {
    chain.dirichlet(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_torus, build_two_point};
    use approx::assert_relative_eq;

    const CAP: usize = 1 << 22;

    #[test]
    fn flip_is_involution() {
        let s = LampConfig::new(0b1011, 4);
        for x in 0..4 {
            assert_eq!(s.flip(x).flip(x), s);
            assert_eq!((s.flip(x).bits() ^ s.bits()).count_ones(), 1);
        }
    }

    #[test]
    fn uniform_log_weight() {
        let mu = LampMeasure::uniform(3).unwrap();
        for b in 0..8 {
            assert_relative_eq!(mu.log_weight(LampConfig::new(b, 3)), -3.0 * 2f64.ln());
        }
    }

    #[test]
    fn bernoulli_log_weight() {
        let mu = LampMeasure::bernoulli(3, 0.1).unwrap();
        let lw = mu.log_weight(LampConfig::new(0b101, 3));
        assert_relative_eq!(lw, 2.0 * 0.1f64.ln() + 0.9f64.ln(), max_relative = 1e-14);
    }

    #[test]
    fn gibbs_log_weight_matches_brute_partition() {
        let base = build_torus(4, 1, 1 << 20).unwrap();
        let beta = 0.2;
        let mu = LampMeasure::gibbs(&base, beta, CAP).unwrap();
        // brute force: spins on the 4-cycle, edges (0,1),(1,2),(2,3),(3,0)
        let mut z = 0.0;
        for b in 0u32..16 {
            let s = |i: u32| if b >> (i % 4) & 1 == 1 { 1.0 } else { -1.0 };
            let e: f64 = (0..4).map(|i| s(i) * s(i + 1)).sum();
            z += (beta * e).exp();
        }
        let lw = mu.log_weight(LampConfig::all_on(4));
        assert_relative_eq!(lw, 4.0 * beta - z.ln(), max_relative = 1e-14);
        let total: f64 = (0..16).map(|b| mu.weight(LampConfig::new(b, 4))).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn gibbs_cap() {
        let base = build_torus(5, 2, 1 << 20).unwrap();
        assert!(matches!(
            LampMeasure::gibbs(&base, 0.1, 1 << 20),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn rate_examples() {
        let uni = LampMeasure::uniform(3).unwrap();
        let s = LampConfig::new(0b010, 3);
        assert_eq!(
            flip_rate(FlipRateModel::Constant(0.5), &uni, s, 0).unwrap(),
            0.5
        );
        let bern = LampMeasure::bernoulli(3, 0.1).unwrap();
        let r = flip_rate(FlipRateModel::Bernoulli(0.1), &bern, s, 1).unwrap();
        assert_relative_eq!(r, 0.9);
        assert_relative_eq!(
            flip_rate(FlipRateModel::Bernoulli(0.1), &bern, s, 0).unwrap(),
            0.1
        );
        for b in 0..8 {
            for x in 0..3 {
                let c = flip_rate(FlipRateModel::HeatBath, &uni, LampConfig::new(b, 3), x).unwrap();
                assert_eq!(c, 0.5);
            }
        }
    }

    #[test]
    fn incompatible_models_are_rejected() {
        let bern = LampMeasure::bernoulli(2, 0.1).unwrap();
        let s = LampConfig::new(0, 2);
        assert!(matches!(
            flip_rate(FlipRateModel::Constant(0.5), &bern, s, 0),
            Err(Error::IncompatibleModel(_))
        ));
        assert!(matches!(
            flip_rate(FlipRateModel::Bernoulli(0.3), &bern, s, 0),
            Err(Error::IncompatibleModel(_))
        ));
        let uni = LampMeasure::uniform(2).unwrap();
        assert!(flip_rate(FlipRateModel::Bernoulli(0.5), &uni, s, 0).is_ok());
    }

    #[test]
    fn detailed_balance_reports() {
        let uni = LampMeasure::uniform(4).unwrap();
        let r = validate_lamp_detailed_balance(FlipRateModel::Constant(0.5), &uni, CAP).unwrap();
        assert_eq!(r.max_violation, 0.0);

        let bern = LampMeasure::bernoulli(4, 0.1).unwrap();
        let r = validate_lamp_detailed_balance(FlipRateModel::Bernoulli(0.1), &bern, CAP).unwrap();
        assert!(r.max_violation <= 1e-15);

        let r = validate_lamp_detailed_balance(FlipRateModel::Constant(0.5), &bern, CAP).unwrap();
        // worst pair: sigma all off vs one lamp on; mu ratio 0.9 : 0.1
        let expected = 0.5 * (0.9f64.powi(4) - 0.1 * 0.9f64.powi(3));
        assert_relative_eq!(r.max_violation, expected, max_relative = 1e-12);
    }

    #[test]
    fn heat_bath_gibbs_balance_and_max_rate() {
        let base = build_torus(4, 1, 1 << 20).unwrap();
        let mu = LampMeasure::gibbs(&base, 0.2, CAP).unwrap();
        let r = validate_lamp_detailed_balance(FlipRateModel::HeatBath, &mu, CAP).unwrap();
        assert!(r.max_violation <= 1e-14);

        let mut brute: f64 = 0.0;
        for b in 0..16 {
            for x in 0..4 {
                let s = LampConfig::new(b, 4);
                let (a, t) = (mu.weight(s), mu.weight(s.flip(x)));
                brute = brute.max(t / (a + t));
            }
        }
        let a = max_rate(FlipRateModel::HeatBath, &mu);
        assert_relative_eq!(a, brute, max_relative = 1e-13);
        assert!(a > 0.5 && a < 1.0);
    }

    #[test]
    fn max_rate_examples() {
        let uni = LampMeasure::uniform(2).unwrap();
        assert_eq!(max_rate(FlipRateModel::Constant(0.5), &uni), 0.5);
        let bern = LampMeasure::bernoulli(2, 0.1).unwrap();
        assert_eq!(max_rate(FlipRateModel::Bernoulli(0.1), &bern), 0.9);
        assert_eq!(max_rate(FlipRateModel::HeatBath, &uni), 0.5);
    }

    #[test]
    fn lamp_dirichlet_examples() {
        let one = LampChain::new(LampSystem::uniform_half(1).unwrap(), CAP).unwrap();
        assert_eq!(lamp_dirichlet(&one, &[3.0, 3.0]), 0.0);
        assert_relative_eq!(lamp_dirichlet(&one, &[1.0, 0.0]), 0.25);

        let bern = LampChain::new(LampSystem::bernoulli(1, 0.1).unwrap(), CAP).unwrap();
        assert_relative_eq!(
            lamp_dirichlet(&bern, &[0.0, 1.0]),
            0.09,
            max_relative = 1e-14
        );
    }

    #[test]
    fn lamp_document() {
        let base = build_two_point();
        let sys = load_lamp_system(
            r#"{"measure": {"kind": "bernoulli", "p": 0.1}, "rates": {"kind": "bernoulli", "p": 0.1}}"#,
            &base,
            CAP,
        )
        .unwrap();
        assert_eq!(sys.max_rate(), 0.9);
        let sys = load_lamp_system(
            r#"{"measure": {"kind": "gibbs", "beta": 0.3}, "rates": {"kind": "heatbath"}}"#,
            &base,
            CAP,
        )
        .unwrap();
        assert!(matches!(sys.measure(), LampMeasure::Gibbs { .. }));
        assert!(load_lamp_system(
            r#"{"measure": {"kind": "bernoulli", "p": 0.1}, "rates": {"kind": "constant", "c": 0.5}}"#,
            &base,
            CAP
        )
        .is_err());
        assert!(matches!(
            load_lamp_system(r#"{"measure": {"kind": "uniform"}}"#, &base, CAP),
            Err(Error::Schema(_))
        ));
    }
}
