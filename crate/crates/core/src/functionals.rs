//! Measures, Dirichlet forms and the entropy/variance functionals built on them.
//!
//! Every chain in this crate (base walk, lamp dynamics, lamplighter) is a
//! continuous-time reversible Markov chain described by its off-diagonal
//! jump rates `L(s, t)` and its reversible measure `m`. Its Dirichlet form is
//!
//! ```text
//! E(f, g) = 1/2 sum_s m(s) sum_t L(s, t) (f(t) - f(s)) (g(t) - g(s)) = -m(f Lg)
//! ```

use crate::error::{Error, Result};

/// Products of probabilities below this are treated as zero mass.
const TINY: f64 = 1e-300;

/// Neumaier compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Sum with compensation.
pub fn stable_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// A probability measure on `0..len`, stored both linearly and in log-domain.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSpace {
    weights: Vec<f64>,
    log_weights: Vec<f64>,
}

impl WeightedSpace {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Schema("measure has no points".into()));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::Schema(format!(
                "weight {w} at point {i} is not positive"
            )));
        }
        let total = stable_sum(weights.iter().copied());
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Schema(format!("weights sum to {total}, expected 1")));
        }
        let log_weights = weights.iter().map(|w| w.ln()).collect();
        Ok(Self {
            weights,
            log_weights,
        })
    }

    /// Builds a measure from log-weights; normalization is checked with log-sum-exp.
    pub fn from_log_weights(log_weights: Vec<f64>) -> Result<Self> {
        if log_weights.is_empty() {
            return Err(Error::Schema("measure has no points".into()));
        }
        let lse = log_sum_exp(&log_weights);
        if !lse.is_finite() || lse.abs() > 1e-10 {
            return Err(Error::Schema(format!(
                "log-weights normalize to log-mass {lse}, expected 0"
            )));
        }
        let weights = log_weights.iter().map(|l| l.exp()).collect();
        Ok(Self {
            weights,
            log_weights,
        })
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform measure on an empty set");
        let w = 1.0 / n as f64;
        Self {
            weights: vec![w; n],
            log_weights: vec![-(n as f64).ln(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `m(f)`.
    pub fn mean(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.len());
        stable_sum(self.weights.iter().zip(f).map(|(w, v)| w * v))
    }

    /// `m(f g)`, the L2(m) inner product.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        stable_sum(
            self.weights
                .iter()
                .zip(f.iter().zip(g))
                .map(|(w, (a, b))| w * a * b),
        )
    }

    /// Total mass of a set of points.
    pub fn mass_of<I: IntoIterator<Item = usize>>(&self, points: I) -> f64 {
        stable_sum(points.into_iter().map(|i| self.weights[i]))
    }

    pub fn is_uniform(&self) -> bool {
        let u = 1.0 / self.len() as f64;
        self.weights.iter().all(|w| (w - u).abs() <= 1e-12)
    }
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + stable_sum(xs.iter().map(|x| (x - max).exp())).ln()
}

/// A finite reversible continuous-time Markov chain.
///
/// Implementors list the off-diagonal jump rates out of each state; the
/// generator, the Dirichlet form and the dense symmetric matrix used by the
/// eigensolvers are all derived from that list.
pub trait ReversibleChain: Sync {
    /// The reversible (stationary) measure.
    fn measure(&self) -> &WeightedSpace;

    /// Calls `visit(t, L(s, t))` for every `t != s` with a positive rate.
    fn for_each_rate(&self, s: usize, visit: &mut dyn FnMut(usize, f64));

    fn state_count(&self) -> usize {
        self.measure().len()
    }

    /// `(Lf)(s) = sum_t L(s, t) (f(t) - f(s))`, matrix free.
    fn apply_generator(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.state_count()];
        self.apply_generator_into(f, &mut out);
        out
    }

    fn apply_generator_into(&self, f: &[f64], out: &mut [f64]) {
        assert_eq!(
            f.len(),
            self.state_count(),
            "function table has wrong length"
        );
        for (s, o) in out.iter_mut().enumerate() {
            let fs = f[s];
            let mut acc = 0.0;
            self.for_each_rate(s, &mut |t, rate| acc += rate * (f[t] - fs));
            *o = acc;
        }
    }

    /// Bilinear Dirichlet form `E(f, g)`.
    fn dirichlet_pair(&self, f: &[f64], g: &[f64]) -> f64 {
        let n = self.state_count();
        assert_eq!(f.len(), n, "function table has wrong length");
        assert_eq!(g.len(), n, "function table has wrong length");
        let m = self.measure();
        let mut acc = CompensatedSum::default();
        for s in 0..n {
            let ws = m.weight(s);
            self.for_each_rate(s, &mut |t, rate| {
                acc.add(ws * rate * (f[t] - f[s]) * (g[t] - g[s]));
            });
        }
        0.5 * acc.value()
    }

    /// Quadratic Dirichlet form `E(f) = E(f, f)`; never negative.
    fn dirichlet(&self, f: &[f64]) -> f64 {
        self.dirichlet_pair(f, f).max(0.0)
    }
}

/// `(1 + d) ln(1 + d) - d`, accurate for small `d`; equals 1 at `d = -1`.
pub fn entropy_excess(d: f64) -> f64 {
    if d.abs() < 1e-3 {
        // sum_{k >= 2} (-d)^k / (k (k - 1))
        d * d * (0.5 - d / 6.0 + d * d / 12.0 - d * d * d / 20.0 + d * d * d * d / 30.0)
    } else if d <= -1.0 {
        1.0
    } else {
        (1.0 + d) * d.ln_1p() - d
    }
}

/// `Ent_m(f^2) = m(f^2 log(f^2 / m(f^2)))`, with `0 log 0 = 0`.
///
/// Evaluated as `M sum m phi(f^2 / M - 1)` with `M = m(f^2)` and
/// `phi = entropy_excess`; every term is nonnegative, so nearly constant
/// functions keep full relative accuracy.
pub fn entropy_of_square(m: &WeightedSpace, f: &[f64]) -> Result<f64> {
    assert_eq!(f.len(), m.len(), "function table has wrong length");
    let second = stable_sum(m.weights().iter().zip(f).map(|(w, v)| w * v * v));
    if second <= TINY {
        return Err(Error::ZeroFunction);
    }
    Ok(entropy_given_second(m.weights(), f, second))
}

pub(crate) fn entropy_given_second(weights: &[f64], f: &[f64], second: f64) -> f64 {
    second
        * stable_sum(
            weights
                .iter()
                .zip(f)
                .map(|(w, v)| w * entropy_excess(v * v / second - 1.0)),
        )
}

/// `Var_m(f) = m(f^2) - m(f)^2`, evaluated as the centered second moment.
pub fn variance(m: &WeightedSpace, f: &[f64]) -> f64 {
    let mean = m.mean(f);
    stable_sum(
        m.weights()
            .iter()
            .zip(f)
            .map(|(w, v)| w * (v - mean) * (v - mean)),
    )
}

/// The log-Sobolev quotient `Ent(f^2) / E(f)`; any admissible `f` is a lower
/// bound on the log-Sobolev constant of `chain`.
pub fn logsob_quotient<C: ReversibleChain + ?Sized>(chain: &C, f: &[f64]) -> Result<f64> {
    let ent = entropy_of_square(chain.measure(), f)?;
    let energy = chain.dirichlet(f);
    let second = chain.measure().inner(f, f);
    if energy <= 1e-14 * second {
        return Err(Error::DegenerateDirichlet { energy });
    }
    Ok(ent / energy)
}

/// The Poincare quotient `E(f) / Var(f)`.
pub fn poincare_quotient<C: ReversibleChain + ?Sized>(chain: &C, f: &[f64]) -> Result<f64> {
    let var = variance(chain.measure(), f);
    if var <= TINY {
        return Err(Error::ZeroFunction);
    }
    Ok(chain.dirichlet(f) / var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn entropy_of_constant_is_zero() {
        let m = WeightedSpace::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert_eq!(entropy_of_square(&m, &[-3.0, 3.0, 3.0]).unwrap(), 0.0);
    }

    #[test]
    fn entropy_two_point_indicator() {
        let m = WeightedSpace::uniform(2);
        let e = entropy_of_square(&m, &[1.0, 0.0]).unwrap();
        assert_relative_eq!(e, 0.5 * 2f64.ln(), max_relative = 1e-15);
    }

    #[test]
    fn entropy_of_indicator_is_mass_log_inverse_mass() {
        let m = WeightedSpace::new(vec![0.1, 0.25, 0.4, 0.25]).unwrap();
        let f = [0.0, 1.0, 0.0, 1.0];
        let ma: f64 = 0.5;
        assert_relative_eq!(
            entropy_of_square(&m, &f).unwrap(),
            ma * (1.0 / ma).ln(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn entropy_rejects_zero() {
        let m = WeightedSpace::uniform(3);
        assert!(matches!(
            entropy_of_square(&m, &[0.0; 3]),
            Err(Error::ZeroFunction)
        ));
    }

    #[test]
    fn variance_examples() {
        let m = WeightedSpace::uniform(2);
        assert_eq!(variance(&m, &[4.0, 4.0]), 0.0);
        assert_relative_eq!(variance(&m, &[0.0, 1.0]), 0.25);
    }

    #[test]
    fn measure_validation() {
        assert!(WeightedSpace::new(vec![0.5, 0.6]).is_err());
        assert!(WeightedSpace::new(vec![1.0, 0.0]).is_err());
        let lw = vec![(0.25f64).ln(); 4];
        let m = WeightedSpace::from_log_weights(lw).unwrap();
        assert!(m.is_uniform());
        assert!(WeightedSpace::from_log_weights(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(stable_sum(xs), 2.0);
    }
}
