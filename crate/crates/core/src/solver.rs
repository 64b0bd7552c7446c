//! The block best-response system `a = 1 + lambda B a` and its solvers.
//!
//! Rows and columns of `B` are indexed by `player * gamma + code`. Entry
//! `((i, t_i), (j, t_j))` is `g_ij(t_i) * p(t_j | t_i)`; rows of types with
//! zero marginal are zero, so those types keep the value 1.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::belief::{Beliefs, Prior, TypeId};
use crate::error::{Error, Result};
use crate::graph::{DecayBound, Graph};

/// Largest `n` for which `B` is stored densely (`n * 2^(n-1)` = 448 rows).
pub const MAX_DENSE_VERTICES: usize = 7;
/// Default sup-norm tolerance of the fixed-point iteration.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Extra iterations allowed beyond the contraction estimate.
const ITERATION_MARGIN: usize = 64;

#[derive(Debug, Clone)]
enum Storage {
    /// Row-major `dim x dim`.
    Dense(Vec<f64>),
    /// Link-factored prior: per ordered pair `(i, j)` the weights of `t_j`
    /// excluding the `(j, i)` link, already restricted to `t_j` linked to
    /// `i`.
    Factored { weights: Vec<f64> },
    /// Nonzero entries per row, sorted by column.
    Sparse(Vec<Vec<(u32, f64)>>),
}

/// The block matrix `B` together with `lambda`.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    n: usize,
    gamma: usize,
    lambda: f64,
    on_support: Vec<bool>,
    storage: Storage,
}

/// Checks `0 <= lambda < 1/(n-1)`.
pub fn check_lambda(n: usize, lambda: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::VertexCount { n, min: 2, max: usize::MAX });
    }
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::LambdaBound {
            lambda,
            bound: "lambda >= 0".into(),
        });
    }
    let nm1 = (n - 1) as f64;
    if lambda * nm1 >= 1.0 {
        return Err(Error::LambdaBound {
            lambda,
            bound: format!("lambda < 1/(n-1) = {}", 1.0 / nm1),
        });
    }
    Ok(())
}

/// Dense `B` for a prior, limited to `n <= 7`.
pub fn build_block_system(prior: &Prior, lambda: f64) -> Result<BlockSystem> {
    BlockSystem::dense(&Beliefs::new(prior)?, lambda)
}

impl BlockSystem {
    pub fn dense(beliefs: &Beliefs, lambda: f64) -> Result<Self> {
        let n = beliefs.n();
        check_lambda(n, lambda)?;
        if n > MAX_DENSE_VERTICES {
            return Err(Error::SizeLimit {
                what: "vertex count for a dense block matrix",
                got: n,
                limit: MAX_DENSE_VERTICES,
                hint: "; use the matrix-free operator instead",
            });
        }
        let gamma = beliefs.gamma();
        let dim = n * gamma;
        let mut b = vec![0.0; dim * dim];
        let on_support = support_flags(beliefs);
        for (r, row) in b.chunks_mut(dim).enumerate() {
            let obs = beliefs.type_at(r);
            for j in (0..n).filter(|&j| obs.links_to(j)) {
                beliefs.for_each_posterior(obs, j, |c, p| row[j * gamma + c as usize] = p);
            }
        }
        Ok(BlockSystem {
            n,
            gamma,
            lambda,
            on_support,
            storage: Storage::Dense(b),
        })
    }

    /// Operator form that never materialises `B`.
    pub fn matrix_free(beliefs: &Beliefs, lambda: f64) -> Result<Self> {
        let n = beliefs.n();
        check_lambda(n, lambda)?;
        let gamma = beliefs.gamma();
        let on_support = support_flags(beliefs);
        let storage = match beliefs.factored_weights() {
            Some(w) => {
                let mut weights = w.to_vec();
                for i in 0..n {
                    for j in (0..n).filter(|&j| j != i) {
                        let bit = if i < j { i } else { i - 1 };
                        let base = (i * n + j) * gamma;
                        for t in 0..gamma {
                            if t >> bit & 1 == 0 {
                                weights[base + t] = 0.0;
                            }
                        }
                    }
                }
                Storage::Factored { weights }
            }
            None => Storage::Sparse(
                (0..n * gamma)
                    .map(|r| {
                        let obs = beliefs.type_at(r);
                        let mut row = Vec::new();
                        for j in (0..n).filter(|&j| obs.links_to(j)) {
                            beliefs.for_each_posterior(obs, j, |c, p| {
                                row.push(((j * gamma) as u32 + c, p))
                            });
                        }
                        row
                    })
                    .collect(),
            ),
        };
        Ok(BlockSystem {
            n,
            gamma,
            lambda,
            on_support,
            storage,
        })
    }

    /// Dense storage when `n <= 7`, matrix-free otherwise.
    pub fn auto(beliefs: &Beliefs, lambda: f64) -> Result<Self> {
        if beliefs.n() <= MAX_DENSE_VERTICES {
            Self::dense(beliefs, lambda)
        } else {
            Self::matrix_free(beliefs, lambda)
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> usize {
        self.gamma
    }

    pub fn dim(&self) -> usize {
        self.n * self.gamma
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    pub fn on_support(&self) -> &[bool] {
        &self.on_support
    }

    /// Contraction modulus `lambda * (n - 1)` of the best-response map.
    pub fn modulus(&self) -> f64 {
        self.lambda * (self.n - 1) as f64
    }

    fn type_at(&self, r: usize) -> TypeId {
        TypeId::new(r / self.gamma, (r % self.gamma) as u32)
    }

    /// Entry `B[r, c]`.
    pub fn entry(&self, r: usize, c: usize) -> f64 {
        match &self.storage {
            Storage::Dense(b) => b[r * self.dim() + c],
            Storage::Sparse(rows) => rows[r]
                .binary_search_by_key(&(c as u32), |&(k, _)| k)
                .map_or(0.0, |k| rows[r][k].1),
            Storage::Factored { weights } => {
                let (obs, tgt) = (self.type_at(r), self.type_at(c));
                if !self.on_support[r] || !obs.links_to(tgt.player) {
                    return 0.0;
                }
                weights[(obs.player * self.n + tgt.player) * self.gamma + tgt.code as usize]
            }
        }
    }

    /// `out = B x`. Rows are independent, so each is computed in a fixed
    /// order and the result does not depend on the thread count.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let dim = self.dim();
        assert_eq!(x.len(), dim);
        assert_eq!(out.len(), dim);
        match &self.storage {
            Storage::Dense(b) => {
                out.par_iter_mut()
                    .zip(b.par_chunks(dim))
                    .for_each(|(o, row)| *o = row.iter().zip(x).map(|(a, b)| a * b).sum());
            }
            Storage::Sparse(rows) => {
                out.par_iter_mut().zip(rows.par_iter()).for_each(|(o, row)| {
                    *o = row.iter().map(|&(c, p)| p * x[c as usize]).sum();
                });
            }
            Storage::Factored { weights } => {
                let (n, gamma) = (self.n, self.gamma);
                // pair[i * n + j] = sum over t_j linked to i of w * x_j(t_j)
                let pair: Vec<f64> = (0..n * n)
                    .into_par_iter()
                    .map(|k| {
                        let (i, j) = (k / n, k % n);
                        if i == j {
                            return 0.0;
                        }
                        let w = &weights[k * gamma..(k + 1) * gamma];
                        let xs = &x[j * gamma..(j + 1) * gamma];
                        w.iter().zip(xs).map(|(a, b)| a * b).sum()
                    })
                    .collect();
                out.par_iter_mut().enumerate().for_each(|(r, o)| {
                    *o = if self.on_support[r] {
                        let t = self.type_at(r);
                        (0..n)
                            .filter(|&j| t.links_to(j))
                            .map(|j| pair[t.player * n + j])
                            .sum()
                    } else {
                        0.0
                    };
                });
            }
        }
    }

    /// Row sums `B 1`.
    pub fn row_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.apply(&vec![1.0; self.dim()], &mut out);
        out
    }

    /// `B` as a dense matrix; only for dense storage.
    pub fn to_matrix(&self) -> Result<DMatrix<f64>> {
        match &self.storage {
            Storage::Dense(b) => Ok(DMatrix::from_row_slice(self.dim(), self.dim(), b)),
            _ => Err(Error::SizeLimit {
                what: "vertex count for a dense block matrix",
                got: self.n,
                limit: MAX_DENSE_VERTICES,
                hint: "",
            }),
        }
    }
}

fn support_flags(beliefs: &Beliefs) -> Vec<bool> {
    (0..beliefs.n() * beliefs.gamma())
        .map(|r| beliefs.on_support(beliefs.type_at(r)))
        .collect()
}

/// One action per type, with on-support flags.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionProfile {
    n: usize,
    gamma: usize,
    pub values: Vec<f64>,
    pub on_support: Vec<bool>,
}

impl ActionProfile {
    pub fn new(n: usize, values: Vec<f64>, on_support: Vec<bool>) -> Self {
        let gamma = crate::belief::gamma(n);
        assert_eq!(values.len(), n * gamma);
        assert_eq!(on_support.len(), n * gamma);
        ActionProfile {
            n,
            gamma,
            values,
            on_support,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn action(&self, t: TypeId) -> f64 {
        self.values[t.player * self.gamma + t.code as usize]
    }

    pub fn is_on_support(&self, t: TypeId) -> bool {
        self.on_support[t.player * self.gamma + t.code as usize]
    }

    /// `(type, on_support, action)` by player then code.
    pub fn iter(&self) -> impl Iterator<Item = (TypeId, bool, f64)> + '_ {
        self.values.iter().enumerate().map(move |(r, &v)| {
            (
                TypeId::new(r / self.gamma, (r % self.gamma) as u32),
                self.on_support[r],
                v,
            )
        })
    }

    /// Actions the players take in the realised graph `g`.
    pub fn realized(&self, g: &Graph) -> Vec<f64> {
        (0..self.n).map(|i| self.action(TypeId::of(g, i))).collect()
    }

    /// Largest on-support absolute difference to another profile.
    pub fn max_abs_diff_on_support(&self, other: &ActionProfile) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .zip(&self.on_support)
            .filter(|(_, &s)| s)
            .map(|((a, b), _)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct FixedPointReport {
    pub profile: ActionProfile,
    pub iterations: usize,
    /// Sup-norm of `a^(k+1) - a^(k)` for every iteration.
    pub steps: Vec<f64>,
    pub residual: f64,
}

impl FixedPointReport {
    /// Largest ratio of consecutive steps, ignoring steps already at
    /// rounding level.
    pub fn max_step_ratio(&self) -> f64 {
        self.steps
            .windows(2)
            .filter(|w| w[0] > 1e-13)
            .map(|w| w[1] / w[0])
            .fold(0.0, f64::max)
    }
}

/// Iteration cap `ceil(ln tol / ln r) + margin` for modulus `r`.
pub fn iteration_cap(tol: f64, modulus: f64) -> usize {
    if modulus <= 0.0 {
        return 2 + ITERATION_MARGIN;
    }
    let k = (tol.ln() / modulus.ln()).ceil();
    k.max(0.0) as usize + ITERATION_MARGIN
}

/// Iterates `a <- 1 + lambda B a` from `a = 1` until the sup-norm step
/// drops below `tol`.
pub fn solve_fixed_point(sys: &BlockSystem, tol: f64) -> Result<FixedPointReport> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance {tol}")));
    }
    let dim = sys.dim();
    let cap = iteration_cap(tol, sys.modulus());
    let mut a = vec![1.0; dim];
    let mut ba = vec![0.0; dim];
    let mut steps = Vec::new();
    loop {
        sys.apply(&a, &mut ba);
        let next: Vec<f64> = ba.par_iter().map(|v| 1.0 + sys.lambda * v).collect();
        let step = next
            .iter()
            .zip(&a)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        steps.push(step);
        a = next;
        if step < tol {
            break;
        }
        if steps.len() >= cap {
            return Err(Error::NoConvergence {
                iterations: steps.len(),
                last_step: step,
                modulus: sys.modulus(),
            });
        }
    }
    sys.apply(&a, &mut ba);
    let residual = a
        .iter()
        .zip(&ba)
        .map(|(x, b)| (x - 1.0 - sys.lambda * b).abs())
        .fold(0.0, f64::max);
    Ok(FixedPointReport {
        profile: ActionProfile::new(sys.n, a, sys.on_support.clone()),
        iterations: steps.len(),
        steps,
        residual,
    })
}

/// Solves `(I - lambda B) a = 1` by LU factorisation.
pub fn solve_direct(sys: &BlockSystem) -> Result<ActionProfile> {
    let dim = sys.dim();
    let m = DMatrix::<f64>::identity(dim, dim) - sys.to_matrix()? * sys.lambda;
    let a = m
        .lu()
        .solve(&DVector::from_element(dim, 1.0))
        .ok_or_else(|| Error::Singular(format!("I - {} B, dim {dim}", sys.lambda)))?;
    Ok(ActionProfile::new(
        sys.n,
        a.iter().copied().collect(),
        sys.on_support.clone(),
    ))
}

/// `beta^(s) = B^s 1` for `s = 0..=max_order`, one vector per order.
pub fn beta_coefficients(sys: &BlockSystem, max_order: usize) -> Vec<Vec<f64>> {
    let dim = sys.dim();
    let mut out = vec![vec![1.0; dim]];
    for _ in 0..max_order {
        let mut next = vec![0.0; dim];
        sys.apply(out.last().expect("nonempty"), &mut next);
        out.push(next);
    }
    out
}

/// Expected measure of length-`s` walks from `observer`.
pub fn beta_coefficient(sys: &BlockSystem, observer: TypeId, s: usize) -> Result<f64> {
    let r = type_index(sys, observer)?;
    if !sys.on_support[r] {
        return Err(Error::NullObserver);
    }
    Ok(beta_coefficients(sys, s)[s][r])
}

fn type_index(sys: &BlockSystem, t: TypeId) -> Result<usize> {
    if t.player >= sys.n {
        return Err(Error::VertexIndex {
            index: t.player,
            n: sys.n,
        });
    }
    if t.code as usize >= sys.gamma {
        return Err(Error::TypeCode { code: t.code, n: sys.n });
    }
    Ok(t.player * sys.gamma + t.code as usize)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesEstimate {
    pub partial_sum: f64,
    /// Certified bound on the omitted tail, from `beta^(s) <= (n-1)^s`.
    pub tail_bound: f64,
}

/// Partial sum `sum_{s <= order} lambda^s beta^(s)` for every type.
pub fn actions_by_series(sys: &BlockSystem, order: usize) -> (Vec<f64>, f64) {
    let betas = beta_coefficients(sys, order);
    let dim = sys.dim();
    let mut sum = vec![0.0; dim];
    let mut weight = 1.0;
    for beta in &betas {
        for (acc, b) in sum.iter_mut().zip(beta) {
            *acc += weight * b;
        }
        weight *= sys.lambda;
    }
    (sum, series_tail_bound(sys, order))
}

/// `(lambda (n-1))^(S+1) / (1 - lambda (n-1))`.
pub fn series_tail_bound(sys: &BlockSystem, order: usize) -> f64 {
    let r = sys.modulus();
    r.powi(order as i32 + 1) / (1.0 - r)
}

pub fn action_by_series(sys: &BlockSystem, observer: TypeId, order: usize) -> Result<SeriesEstimate> {
    let r = type_index(sys, observer)?;
    let (sums, tail) = actions_by_series(sys, order);
    Ok(SeriesEstimate {
        partial_sum: sums[r],
        tail_bound: tail,
    })
}

/// Nash actions when the graph is common knowledge, `b(g, lambda)`.
pub fn complete_info_nash(g: &Graph, lambda: f64) -> Result<Vec<f64>> {
    g.katz_bonacich(lambda, DecayBound::Uniform)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationGap {
    pub beta: f64,
    /// `sum_g p(g) d_i^(s)(g)`.
    pub ex_ante: f64,
    /// `sum_g p(g | g_i) d_i^(s)(g)`.
    pub interim: f64,
}

/// Compares `beta^(s)` with the ex-ante and interim expected walk counts.
pub fn expectation_gap_report(prior: &Prior, observer: TypeId, s: usize) -> Result<ExpectationGap> {
    let support = prior.support()?;
    let beliefs = Beliefs::new(prior)?;
    beliefs.check_type(observer)?;
    let marginal = beliefs.marginal(observer)?;
    if marginal <= crate::belief::SUPPORT_TOL {
        return Err(Error::NullObserver);
    }
    let sys = BlockSystem::matrix_free(&beliefs, 0.0)?;
    let beta = beta_coefficient(&sys, observer, s)?;
    let mut ex_ante = 0.0;
    let mut interim = 0.0;
    for (g, mass) in &support {
        let w = g.walk_count(observer.player, s).as_f64();
        ex_ante += mass * w;
        if TypeId::of(g, observer.player) == observer {
            interim += mass * w;
        }
    }
    Ok(ExpectationGap {
        beta,
        ex_ante,
        interim: interim / marginal,
    })
}

/// Solves on the on-support types only.
///
/// `B` is assembled directly from the posteriors of on-support observers
/// over on-support targets and `(I - lambda B') a' = 1` is solved on that
/// subspace. Off-support entries of the returned profile hold 1.
pub fn solve_reduced(beliefs: &Beliefs, lambda: f64) -> Result<ActionProfile> {
    let n = beliefs.n();
    check_lambda(n, lambda)?;
    let gamma = beliefs.gamma();
    let types: Vec<TypeId> = (0..n)
        .flat_map(|i| {
            beliefs
                .reduced_type_set(i)
                .expect("player in range")
                .into_iter()
                .map(move |c| TypeId::new(i, c))
        })
        .collect();
    let mut position = vec![usize::MAX; n * gamma];
    for (k, t) in types.iter().enumerate() {
        position[beliefs.index(*t)] = k;
    }
    let dim = types.len();
    if dim > REDUCED_DENSE_LIMIT {
        return Err(Error::SizeLimit {
            what: "reduced type count",
            got: dim,
            limit: REDUCED_DENSE_LIMIT,
            hint: "; use the matrix-free operator instead",
        });
    }
    let mut m = DMatrix::<f64>::identity(dim, dim);
    for (k, obs) in types.iter().enumerate() {
        for j in (0..n).filter(|&j| obs.links_to(j)) {
            beliefs.for_each_posterior(*obs, j, |c, p| {
                let col = position[j * gamma + c as usize];
                debug_assert!(col != usize::MAX, "posterior mass on a null type");
                if col != usize::MAX {
                    m[(k, col)] -= lambda * p;
                }
            });
        }
    }
    let a = m
        .lu()
        .solve(&DVector::from_element(dim, 1.0))
        .ok_or_else(|| Error::Singular(format!("reduced system, dim {dim}")))?;
    let mut values = vec![1.0; n * gamma];
    let mut on_support = vec![false; n * gamma];
    for (k, t) in types.iter().enumerate() {
        values[beliefs.index(*t)] = a[k];
        on_support[beliefs.index(*t)] = true;
    }
    Ok(ActionProfile::new(n, values, on_support))
}

/// Largest reduced system solved by dense LU.
pub const REDUCED_DENSE_LIMIT: usize = 4096;
