//! Assembled generator matrices (sparse and dense symmetric forms).

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::functionals::ReversibleChain;

/// Row-compressed generator `L`, diagonal included.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseOperator {
    /// Number of stored entries `chain` would need.
    pub fn nonzeros_of<C: ReversibleChain + ?Sized>(chain: &C) -> usize {
        let mut nnz = 0;
        for s in 0..chain.state_count() {
            nnz += 1;
            chain.for_each_rate(s, &mut |_, _| nnz += 1);
        }
        nnz
    }

    pub fn assemble<C: ReversibleChain + ?Sized>(chain: &C, max_nonzeros: usize) -> Result<Self> {
        let nnz = Self::nonzeros_of(chain);
        if nnz > max_nonzeros {
            return Err(Error::cap(
                "generator nonzeros",
                nnz as u128,
                max_nonzeros as u128,
            ));
        }
        let n = chain.state_count();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        row_ptr.push(0);
        let mut row: Vec<(usize, f64)> = Vec::new();
        for s in 0..n {
            row.clear();
            let mut out = 0.0;
            chain.for_each_rate(s, &mut |t, r| {
                row.push((t, r));
                out += r;
            });
            row.push((s, -out));
            row.sort_by_key(|&(t, _)| t);
            for &(t, v) in &row {
                match cols.last() {
                    Some(&c) if cols.len() > row_ptr[s] && c == t => {
                        *vals.last_mut().expect("nonempty") += v;
                    }
                    _ => {
                        cols.push(t);
                        vals.push(v);
                    }
                }
            }
            row_ptr.push(cols.len());
        }
        Ok(Self {
            row_ptr,
            cols,
            vals,
        })
    }

    pub fn dim(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nonzeros(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, s: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[s]..self.row_ptr[s + 1];
        self.cols[r.clone()]
            .iter()
            .copied()
            .zip(self.vals[r].iter().copied())
    }

    pub fn matvec(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.dim());
        (0..self.dim())
            .map(|s| self.row(s).map(|(t, v)| v * f[t]).sum())
            .collect()
    }

    pub fn matvec_into(&self, f: &[f64], out: &mut [f64]) {
        assert_eq!(f.len(), self.dim());
        for (s, o) in out.iter_mut().enumerate() {
            *o = self.row(s).map(|(t, v)| v * f[t]).sum();
        }
    }

    /// Largest `|sum_t L(s, t)|` over rows.
    pub fn max_row_sum(&self) -> f64 {
        (0..self.dim())
            .map(|s| self.row(s).map(|(_, v)| v).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }
}

/// The symmetrized operator `D^{1/2} (-L) D^{-1/2}` with `D = diag(m)`; it has
/// the spectrum of `-L` on L2(m) and `sqrt(m)` spans its kernel.
pub fn dense_symmetric<C: ReversibleChain + ?Sized>(chain: &C) -> DMatrix<f64> {
    let n = chain.state_count();
    let m = chain.measure();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for s in 0..n {
        let mut out = 0.0;
        let ws = m.weight(s);
        chain.for_each_rate(s, &mut |t, r| {
            out += r;
            // symmetric by detailed balance: m(s) L(s,t) = m(t) L(t,s)
            a[(s, t)] -= ws * r / (ws * m.weight(t)).sqrt();
        });
        a[(s, s)] += out;
    }
    // average the two triangles to remove rounding asymmetry
    for s in 0..n {
        for t in (s + 1)..n {
            let v = 0.5 * (a[(s, t)] + a[(t, s)]);
            a[(s, t)] = v;
            a[(t, s)] = v;
        }
    }
    a
}

/// `out = D^{1/2} (-L) D^{-1/2} v`, matrix free; `sqrt_m` holds `sqrt(m)`.
pub fn apply_symmetric<C: ReversibleChain + ?Sized>(
    chain: &C,
    sqrt_m: &[f64],
    v: &[f64],
    scratch: &mut [f64],
    out: &mut [f64],
) {
    for ((f, a), s) in scratch.iter_mut().zip(v).zip(sqrt_m) {
        *f = a / s;
    }
    chain.apply_generator_into(scratch, out);
    for (o, s) in out.iter_mut().zip(sqrt_m) {
        *o = -*o * s;
    }
}
