//! The lamplighter chain on `{0,1}^G x G`.
//!
//! From `(sigma, x)` the walker moves to `(sigma, y)` at rate `p(x, y) / 2`
//! and the lamp under it flips, giving `(sigma^x, x)`, at rate
//! `c_x(sigma) / 2`. The chain is reversible for `pi = mu x nu`.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::functionals::{ReversibleChain, WeightedSpace};
use crate::graph::{BaseGraph, VertexId};
use crate::lamps::{config_count, LampConfig, LampSystem};
use crate::limits::Limits;
use crate::operator::SparseOperator;

/// Bijection `(sigma, x) <-> sigma.bits * |G| + x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WreathIndex {
    sites: usize,
    configs: usize,
}

impl WreathIndex {
    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn configs(&self) -> usize {
        self.configs
    }

    pub fn state_count(&self) -> usize {
        self.sites * self.configs
    }

    #[inline]
    pub fn index(&self, sigma: LampConfig, x: VertexId) -> usize {
        debug_assert!(x < self.sites && sigma.width() == self.sites);
        sigma.bits() as usize * self.sites + x
    }

    #[inline]
    pub fn split(&self, s: usize) -> (LampConfig, VertexId) {
        (
            LampConfig::new((s / self.sites) as u64, self.sites),
            s % self.sites,
        )
    }
}

/// Index maps for a base of `sites` vertices, refusing more than `cap` states.
pub fn enumerate(sites: usize, cap: usize) -> Result<WreathIndex> {
    let configs = config_count(sites, usize::MAX >> 1, "lamp configurations")
        .map_err(|_| Error::cap("wreath states", u128::MAX, cap as u128))?;
    match configs.checked_mul(sites) {
        Some(states) if states <= cap => Ok(WreathIndex { sites, configs }),
        Some(states) => Err(Error::cap("wreath states", states as u128, cap as u128)),
        None => Err(Error::cap("wreath states", u128::MAX, cap as u128)),
    }
}

#[derive(Debug)]
pub struct WreathChain {
    base: BaseGraph,
    lamps: LampSystem,
    index: WreathIndex,
    pi: WeightedSpace,
    /// `c_x(sigma)` at every state `(sigma, x)`.
    flip_rates: Vec<f64>,
    max_nonzeros: usize,
    assembled: OnceLock<SparseOperator>,
}

impl WreathChain {
    pub fn new(base: BaseGraph, lamps: LampSystem, limits: &Limits) -> Result<Self> {
        let sites = base.vertex_count();
        if lamps.sites() != sites {
            return Err(Error::Schema(format!(
                "lamp system has {} sites but the base has {sites} vertices",
                lamps.sites()
            )));
        }
        let index = enumerate(sites, limits.max_states)?;
        let n = index.state_count();
        let mut log_pi = Vec::with_capacity(n);
        let mut flip_rates = Vec::with_capacity(n);
        for bits in 0..index.configs() as u64 {
            let sigma = LampConfig::new(bits, sites);
            let lm = lamps.measure().log_weight(sigma);
            for x in 0..sites {
                log_pi.push(lm + base.nu().log_weights()[x]);
                flip_rates.push(lamps.rate(sigma, x));
            }
        }
        let pi = WeightedSpace::from_log_weights(log_pi)?;
        Ok(Self {
            base,
            lamps,
            index,
            pi,
            flip_rates,
            max_nonzeros: limits.max_nonzeros,
            assembled: OnceLock::new(),
        })
    }

    pub fn base(&self) -> &BaseGraph {
        &self.base
    }

    pub fn lamps(&self) -> &LampSystem {
        &self.lamps
    }

    pub fn index(&self) -> WreathIndex {
        self.index
    }

    /// `pi(sigma, x) = mu(sigma) nu(x)`.
    pub fn stationary_pi(&self, sigma: LampConfig, x: VertexId) -> f64 {
        self.pi.weight(self.index.index(sigma, x))
    }

    pub fn log_stationary_pi(&self, sigma: LampConfig, x: VertexId) -> f64 {
        self.pi.log_weights()[self.index.index(sigma, x)]
    }

    /// The rate `c_x(sigma)` stored for state `s = (sigma, x)`.
    pub fn flip_rate_at(&self, s: usize) -> f64 {
        self.flip_rates[s]
    }

    /// `f(sigma, x) = g(x)`.
    pub fn lift_base(&self, g: &[f64]) -> Vec<f64> {
        assert_eq!(g.len(), self.index.sites());
        (0..self.index.state_count())
            .map(|s| g[s % self.index.sites()])
            .collect()
    }

    /// `f(sigma, x) = h(sigma)`.
    pub fn lift_lamps(&self, h: &[f64]) -> Vec<f64> {
        assert_eq!(h.len(), self.index.configs());
        (0..self.index.state_count())
            .map(|s| h[s / self.index.sites()])
            .collect()
    }

    /// The row-compressed generator, assembled once.
    pub fn assemble_generator(&self) -> Result<&SparseOperator> {
        if let Some(op) = self.assembled.get() {
            return Ok(op);
        }
        let op = SparseOperator::assemble(self, self.max_nonzeros)?;
        Ok(self.assembled.get_or_init(|| op))
    }

    /// `E_pi(f, g)`; the bilinear form `-pi(f Lg)`.
    pub fn dirichlet_form(&self, f: &[f64], g: Option<&[f64]>) -> f64 {
        match g {
            Some(g) => self.dirichlet_pair(f, g),
            None => self.dirichlet(f),
        }
    }
}

impl ReversibleChain for WreathChain {
    fn measure(&self) -> &WeightedSpace {
        &self.pi
    }

    fn for_each_rate(&self, s: usize, visit: &mut dyn FnMut(usize, f64)) {
        let sites = self.index.sites();
        let x = s % sites;
        let row = s - x;
        for &(y, p) in self.base.neighbors(x) {
            if y != x {
                visit(row + y, 0.5 * p);
            }
        }
        let step = (1usize << x) * sites;
        let flipped = if (s / sites) >> x & 1 == 1 {
            s - step
        } else {
            s + step
        };
        visit(flipped, 0.5 * self.flip_rates[s]);
    }
}
