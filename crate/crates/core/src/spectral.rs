//! Spectral gaps, Dirichlet eigenvalues on subsets and the spectral profile.

use std::collections::VecDeque;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::{stable_sum, ReversibleChain};
use crate::graph::{BaseGraph, SubsetMask, VertexId};
use crate::operator::{apply_symmetric, dense_symmetric};
use crate::seeding::{derive_seed, rng_for};

const STREAM_LANCZOS: u64 = 0x4c41_4e43;
const STREAM_SUBSET: u64 = 0x5355_4253;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GapMethod {
    Dense,
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapResult {
    pub gap: f64,
    pub method: GapMethod,
    pub residual: f64,
    pub iterations: usize,
    /// False when zero is a repeated eigenvalue; `gap` is then reported as 0.
    pub connected: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapOptions {
    pub dense_threshold: usize,
    /// Residual tolerance `||A v - theta v||` for the iterative solver.
    pub tol: f64,
    pub krylov_dim: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for GapOptions {
    fn default() -> Self {
        Self {
            dense_threshold: 512,
            tol: 1e-10,
            krylov_dim: 120,
            max_restarts: 500,
            seed: 0,
        }
    }
}

/// Smallest nonzero eigenvalue of `-L` on L2(m).
pub fn spectral_gap<C: ReversibleChain + ?Sized>(
    chain: &C,
    opts: &GapOptions,
) -> Result<GapResult> {
    let n = chain.state_count();
    if n < 2 {
        return Err(Error::Domain(
            "spectral gap needs at least two states".into(),
        ));
    }
    if n <= opts.dense_threshold {
        Ok(dense_gap(chain))
    } else {
        lanczos_gap(chain, opts)
    }
}

pub fn dense_gap<C: ReversibleChain + ?Sized>(chain: &C) -> GapResult {
    let a = dense_symmetric(chain);
    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..a.nrows()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let top = eig.eigenvalues[order[order.len() - 1]].abs().max(1.0);
    let lambda = eig.eigenvalues[order[1]];
    let v = eig.eigenvectors.column(order[1]);
    let residual = (&a * v - v * lambda).norm();
    let connected = lambda > 1e-10 * top;
    GapResult {
        gap: if connected { lambda } else { 0.0 },
        method: GapMethod::Dense,
        residual,
        iterations: 0,
        connected,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn project_out(w: &mut [f64], unit: &[f64]) {
    let c = dot(w, unit);
    for (x, u) in w.iter_mut().zip(unit) {
        *x -= c * u;
    }
}

/// Restarted Lanczos with full reorthogonalization on the complement of the
/// stationary direction `sqrt(m)`.
pub fn lanczos_gap<C: ReversibleChain + ?Sized>(chain: &C, opts: &GapOptions) -> Result<GapResult> {
    let n = chain.state_count();
    let sq: Vec<f64> = chain.measure().weights().iter().map(|w| w.sqrt()).collect();
    let sq_norm = norm(&sq);
    let sq: Vec<f64> = sq.iter().map(|v| v / sq_norm).collect();
    let k = opts
        .krylov_dim
        .min(n - 1)
        .min(((1usize << 26) / n).max(8))
        .max(1);

    let mut rng = rng_for(opts.seed, STREAM_LANCZOS, n as u64);
    let mut start: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut scratch = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut iterations = 0;
    let mut residual = f64::INFINITY;

    for _ in 0..opts.max_restarts.max(1) {
        project_out(&mut start, &sq);
        let s_norm = norm(&start);
        if s_norm == 0.0 {
            return Err(Error::Domain("chain has no non-constant directions".into()));
        }
        start.iter_mut().for_each(|v| *v /= s_norm);

        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha = Vec::with_capacity(k);
        let mut beta = Vec::with_capacity(k);
        loop {
            let j = basis.len() - 1;
            apply_symmetric(chain, &sq, &basis[j], &mut scratch, &mut w);
            iterations += 1;
            let a = dot(&w, &basis[j]);
            alpha.push(a);
            for _ in 0..2 {
                project_out(&mut w, &sq);
                for b in &basis {
                    project_out(&mut w, b);
                }
            }
            let b = norm(&w);
            if basis.len() == k || b <= 1e-13 * a.abs().max(1.0) {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|v| v / b).collect());
        }

        let m = alpha.len();
        let mut t = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let (imin, theta) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty tridiagonal");
        let y = eig.eigenvectors.column(imin);
        let mut ritz = vec![0.0; n];
        for (coef, b) in y.iter().zip(&basis) {
            for (r, v) in ritz.iter_mut().zip(b) {
                *r += coef * v;
            }
        }
        project_out(&mut ritz, &sq);
        let r_norm = norm(&ritz);
        ritz.iter_mut().for_each(|v| *v /= r_norm);
        apply_symmetric(chain, &sq, &ritz, &mut scratch, &mut w);
        let _ = theta;
        let theta = dot(&w, &ritz);
        residual = w
            .iter()
            .zip(&ritz)
            .map(|(a, v)| (a - theta * v).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= opts.tol * theta.abs().max(1.0) {
            let connected = theta > 1e-10;
            return Ok(GapResult {
                gap: if connected { theta } else { 0.0 },
                method: GapMethod::Iterative,
                residual,
                iterations,
                connected,
            });
        }
        start = ritz;
    }
    Err(Error::ConvergenceFailure {
        residual,
        iterations,
    })
}

/// Local data for functions supported in a subset `S` of the base.
///
/// `rows` holds the restricted energy matrix `K = diag(nu) (I - P)` in local
/// coordinates, so `E_nu(f) = f' K f` for `f` vanishing outside `S`.
#[derive(Debug, Clone)]
struct Restricted {
    members: Vec<VertexId>,
    nu: Vec<f64>,
    rows: Vec<Vec<(usize, f64)>>,
}

impl Restricted {
    fn new(g: &BaseGraph, members: Vec<VertexId>) -> Self {
        let mut local = vec![usize::MAX; g.vertex_count()];
        for (i, &s) in members.iter().enumerate() {
            local[s] = i;
        }
        let nu: Vec<f64> = members.iter().map(|&s| g.nu().weight(s)).collect();
        let rows = members
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let mut row = vec![(i, nu[i] * (1.0 - g.p(s, s)))];
                for &(t, p) in g.neighbors(s) {
                    if t != s && local[t] != usize::MAX {
                        row.push((local[t], -nu[i] * p));
                    }
                }
                row
            })
            .collect();
        Self { members, nu, rows }
    }

    fn mass(&self) -> f64 {
        stable_sum(self.nu.iter().copied())
    }

    /// Symmetric form `diag(nu)^{-1/2} K diag(nu)^{-1/2}`.
    fn symmetric_matrix(&self) -> DMatrix<f64> {
        let k = self.members.len();
        let mut a = DMatrix::<f64>::zeros(k, k);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                a[(i, j)] += v / (self.nu[i] * self.nu[j]).sqrt();
            }
        }
        for i in 0..k {
            for j in (i + 1)..k {
                let v = 0.5 * (a[(i, j)] + a[(j, i)]);
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        a
    }

    fn dirichlet_eigenvalue(&self) -> f64 {
        self.symmetric_matrix()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest Dirichlet eigenvalue with a nonnegative eigenfunction.
    fn dirichlet_pair(&self) -> (f64, Vec<f64>) {
        let eig = SymmetricEigen::new(self.symmetric_matrix());
        let (i, lambda) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty subset");
        let f = eig
            .eigenvectors
            .column(i)
            .iter()
            .zip(&self.nu)
            .map(|(v, w)| (v / w.sqrt()).abs())
            .collect();
        (lambda, f)
    }

    fn energy(&self, f: &[f64]) -> f64 {
        stable_sum(
            self.rows
                .iter()
                .zip(f)
                .map(|(row, fi)| fi * row.iter().map(|&(j, v)| v * f[j]).sum::<f64>()),
        )
    }

    fn variance(&self, f: &[f64]) -> f64 {
        let mean = stable_sum(self.nu.iter().zip(f).map(|(w, v)| w * v));
        let second = stable_sum(self.nu.iter().zip(f).map(|(w, v)| w * v * v));
        second - mean * mean
    }

    fn quotient(&self, f: &[f64]) -> f64 {
        let var = self.variance(f);
        if var <= 0.0 {
            return f64::INFINITY;
        }
        self.energy(f) / var
    }

    fn quotient_and_gradient(&self, f: &[f64]) -> (f64, Vec<f64>) {
        let kf: Vec<f64> = self
            .rows
            .iter()
            .map(|row| row.iter().map(|&(j, v)| v * f[j]).sum())
            .collect();
        let energy = dot(f, &kf);
        let mean = dot(&self.nu, f);
        let var = self.variance(f);
        let q = energy / var;
        let grad = kf
            .iter()
            .zip(f.iter().zip(&self.nu))
            .map(|(k, (fi, w))| 2.0 * (k - q * (w * fi - w * mean)) / var)
            .collect();
        (q, grad)
    }

    /// Projected gradient descent with Barzilai-Borwein steps and Armijo
    /// backtracking over `f >= 0`.
    fn minimize(&self, start: Vec<f64>, max_iters: usize) -> (f64, Vec<f64>) {
        let mut f: Vec<f64> = start.into_iter().map(|v| v.max(0.0)).collect();
        let scale = dot(&self.nu, &f.iter().map(|v| v * v).collect::<Vec<_>>()).sqrt();
        if !(scale > 0.0) {
            return (f64::INFINITY, f);
        }
        f.iter_mut().for_each(|v| *v /= scale);
        let (mut q, mut g) = self.quotient_and_gradient(&f);
        if !q.is_finite() {
            return (f64::INFINITY, f);
        }
        let mut step = 1.0 / norm(&g).max(1e-300);
        let mut history: VecDeque<f64> = VecDeque::with_capacity(52);
        history.push_back(q);
        for _ in 0..max_iters {
            let mut accepted = None;
            for _ in 0..60 {
                let cand: Vec<f64> = f
                    .iter()
                    .zip(&g)
                    .map(|(x, d)| (x - step * d).max(0.0))
                    .collect();
                let qc = self.quotient(&cand);
                let decrease: f64 = g
                    .iter()
                    .zip(f.iter().zip(&cand))
                    .map(|(d, (a, b))| d * (a - b))
                    .sum();
                if qc.is_finite() && qc <= q - 1e-4 * decrease {
                    accepted = Some(cand);
                    break;
                }
                step *= 0.5;
            }
            let Some(mut cand) = accepted else { break };
            let norm2 = dot(&self.nu, &cand.iter().map(|v| v * v).collect::<Vec<_>>()).sqrt();
            let rescaled = !(1e-3..=1e3).contains(&norm2);
            if rescaled {
                cand.iter_mut().for_each(|v| *v /= norm2);
            }
            let (qn, gn) = self.quotient_and_gradient(&cand);
            if rescaled {
                step = 1.0 / norm(&gn).max(1e-300);
            } else {
                let s: Vec<f64> = cand.iter().zip(&f).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
                let sy = dot(&s, &y);
                step = if sy > 0.0 {
                    (dot(&s, &s) / sy).clamp(1e-12, 1e12)
                } else {
                    (step * 2.0).min(1e12)
                };
            }
            f = cand;
            q = qn;
            g = gn;
            history.push_back(q);
            if history.len() > 51 {
                history.pop_front();
                let old = history[0];
                if (old - q).abs() <= 1e-10 * q.abs().max(1e-300) {
                    break;
                }
            }
        }
        (q, f)
    }

    fn lift(&self, n: usize, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (&s, v) in self.members.iter().zip(f) {
            out[s] = *v;
        }
        out
    }
}

fn check_subset(g: &BaseGraph, s: &SubsetMask) -> Result<Vec<VertexId>> {
    assert_eq!(s.universe(), g.vertex_count(), "subset universe mismatch");
    if s.is_empty() {
        return Err(Error::EmptySubset);
    }
    if s.is_full() {
        return Err(Error::FullSubset);
    }
    Ok(s.iter().collect())
}

/// Smallest eigenvalue of `-L` on functions vanishing outside `S`.
pub fn dirichlet_eigenvalue(g: &BaseGraph, s: &SubsetMask) -> Result<f64> {
    let members = check_subset(g, s)?;
    Ok(Restricted::new(g, members).dirichlet_eigenvalue())
}

/// `lambda_D(S)` with a nonnegative eigenfunction, extended by zero to all of `G`.
pub fn dirichlet_eigenpair(g: &BaseGraph, s: &SubsetMask) -> Result<(f64, Vec<f64>)> {
    let members = check_subset(g, s)?;
    let r = Restricted::new(g, members);
    let (lambda, f) = r.dirichlet_pair();
    Ok((lambda, r.lift(g.vertex_count(), &f)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsetOptions {
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for SubsetOptions {
    fn default() -> Self {
        Self {
            restarts: 16,
            max_iters: 20_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetLambda {
    /// Best value of `E_nu(f) / Var_nu(f)` found over `f >= 0` supported in `S`.
    pub value: f64,
    /// `lambda_D(S)`, a lower bound on `lambda(S)`.
    pub lower: f64,
    /// `lambda_D(S) / (1 - nu(S))`, an upper bound on `lambda(S)`.
    pub upper: f64,
    pub mass: f64,
    #[serde(skip)]
    pub minimizer: Vec<f64>,
}

/// `lambda(S) = inf { E_nu(f) / Var_nu(f) : f >= 0, supp f in S }` with its
/// certificate bracket.
pub fn lambda_subset(g: &BaseGraph, s: &SubsetMask, opts: &SubsetOptions) -> Result<SubsetLambda> {
    let members = check_subset(g, s)?;
    let subset_id = members
        .iter()
        .fold(0u64, |h, &v| h.rotate_left(7) ^ (v as u64 + 1));
    lambda_restricted(g, Restricted::new(g, members), subset_id, opts)
}

fn lambda_restricted(
    g: &BaseGraph,
    r: Restricted,
    subset_id: u64,
    opts: &SubsetOptions,
) -> Result<SubsetLambda> {
    let mass = r.mass();
    let (lower, phi) = r.dirichlet_pair();
    let upper = lower / (1.0 - mass);
    let k = r.members.len();
    let mut runs: Vec<(f64, Vec<f64>)> = (0..opts.restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(opts.seed, STREAM_SUBSET ^ subset_id, i as u64);
            let start: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..1.0)).collect();
            r.minimize(start, opts.max_iters)
        })
        .collect();
    runs.push(r.minimize(phi, opts.max_iters));
    let (value, best) = runs
        .into_iter()
        .fold((f64::INFINITY, Vec::new()), |acc, run| {
            if run.0 < acc.0 {
                run
            } else {
                acc
            }
        });
    let slack = 1e-9 * upper.abs().max(1.0);
    if !(value >= lower - slack && value <= upper + slack) {
        return Err(Error::BracketViolation {
            lower,
            value,
            upper,
        });
    }
    Ok(SubsetLambda {
        value,
        lower,
        upper,
        mass,
        minimizer: r.lift(g.vertex_count(), &best),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub r: f64,
    /// `Lambda(r) = inf { lambda(S) : nu(S) <= r }`.
    pub value: f64,
    pub subset: Vec<VertexId>,
    pub bracket: [f64; 2],
    /// Subsets with `nu(S) <= r`.
    pub candidates: usize,
    /// Subsets whose `lambda(S)` was optimized; the rest were pruned by `lambda_D`.
    pub evaluated: usize,
}

/// Exact spectral profile by enumeration of every subset with `nu(S) <= r`.
///
/// Candidates are ranked by their Dirichlet eigenvalue; since
/// `lambda_D(S) <= lambda(S)`, enumeration stops at the first candidate whose
/// `lambda_D` reaches the best value found.
pub fn spectral_profile(
    g: &BaseGraph,
    r: f64,
    max_vertices: usize,
    opts: &SubsetOptions,
) -> Result<ProfilePoint> {
    let n = g.vertex_count();
    if n > max_vertices.min(30) {
        return Err(Error::cap(
            "profile enumeration vertices",
            n as u128,
            max_vertices.min(30) as u128,
        ));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("profile radius {r} not in (0, 1)")));
    }
    if n < 2 {
        return Err(Error::Domain("profile needs at least two vertices".into()));
    }
    let nu = g.nu().weights();
    let full: u32 = (1u32 << n) - 1;
    let mut ranked: Vec<(f64, u32)> = (1..full)
        .into_par_iter()
        .filter_map(|bits| {
            let mass = stable_sum((0..n).filter(|i| bits >> i & 1 == 1).map(|i| nu[i]));
            (mass <= r + 1e-12).then(|| {
                let members = (0..n).filter(|i| bits >> i & 1 == 1).collect();
                (Restricted::new(g, members).dirichlet_eigenvalue(), bits)
            })
        })
        .collect();
    if ranked.is_empty() {
        return Err(Error::Domain(format!("no subset has mass at most {r}")));
    }
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut best: Option<(SubsetLambda, u32)> = None;
    let mut evaluated = 0;
    for &(lower, bits) in &ranked {
        if let Some((b, _)) = &best {
            if lower >= b.value * (1.0 - 1e-12) {
                break;
            }
        }
        let members: Vec<VertexId> = (0..n).filter(|i| bits >> i & 1 == 1).collect();
        let lam = lambda_restricted(g, Restricted::new(g, members), bits as u64, opts)?;
        evaluated += 1;
        if best.as_ref().is_none_or(|(b, _)| lam.value < b.value) {
            best = Some((lam, bits));
        }
    }
    let (lam, bits) = best.expect("at least one candidate evaluated");
    Ok(ProfilePoint {
        r,
        value: lam.value,
        subset: (0..n).filter(|i| bits >> i & 1 == 1).collect(),
        bracket: [lam.lower, lam.upper],
        candidates: ranked.len(),
        evaluated,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GoelReading {
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
    pub holds: bool,
}

impl GoelReading {
    fn new(lower: f64, value: f64, upper: f64) -> Self {
        let tol = 1e-9 * value.abs().max(1.0);
        Self {
            lower,
            value,
            upper,
            holds: lower <= value + tol && value <= upper + tol,
        }
    }
}

/// Diagnostic comparison of `Lambda(1/2)` with the base gap under three readings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoelReport {
    pub gap: f64,
    pub profile: ProfilePoint,
    /// `1/gap <= Lambda(1/2) <= 2/gap`.
    pub literal: GoelReading,
    /// `1/gap <= 1/Lambda(1/2) <= 2/gap`.
    pub reciprocal: GoelReading,
    /// `gap <= Lambda(1/2) <= 2 gap`.
    pub linear: GoelReading,
}

pub fn check_goel(
    g: &BaseGraph,
    max_vertices: usize,
    gap_opts: &GapOptions,
    opts: &SubsetOptions,
) -> Result<GoelReport> {
    let gap = spectral_gap(g, gap_opts)?.gap;
    let profile = spectral_profile(g, 0.5, max_vertices, opts)?;
    let lam = profile.value;
    Ok(GoelReport {
        gap,
        literal: GoelReading::new(1.0 / gap, lam, 2.0 / gap),
        reciprocal: GoelReading::new(1.0 / gap, 1.0 / lam, 2.0 / gap),
        linear: GoelReading::new(gap, lam, 2.0 * gap),
        profile,
    })
}

/// Seed used by the subset optimizer for a given subset and restart.
pub fn subset_seed(global: u64, subset_id: u64, restart: u64) -> u64 {
    derive_seed(global, STREAM_SUBSET ^ subset_id, restart)
}
