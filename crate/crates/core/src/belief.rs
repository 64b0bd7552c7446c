//! Types, priors over graphs and Bayes-rule posteriors over neighbour types.
//!
//! A type of player `i` is its adjacency row with the diagonal removed,
//! packed into `n - 1` bits: bit `b` is `g_ij` for the `b`-th `j != i` in
//! ascending order. Types are indexed globally as `i * gamma + code`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::{check_vertex_count, enumerate_graphs, pair_count, Graph, GraphClass};

/// Probabilities at or below this are treated as zero when classifying
/// support.
pub const SUPPORT_TOL: f64 = 1e-12;
/// Largest `n` the posterior engine accepts for factored priors. Priors
/// with an explicit support list may go up to the graph limit of 16.
pub const MAX_FACTORED_VERTICES: usize = 12;
/// Largest `n` for which a factored prior may be expanded into a table.
pub const MAX_EXPAND_VERTICES: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeId {
    pub player: usize,
    pub code: u32,
}

impl TypeId {
    pub fn new(player: usize, code: u32) -> Self {
        TypeId { player, code }
    }

    /// The type player `i` has in graph `g`.
    pub fn of(g: &Graph, i: usize) -> Self {
        TypeId {
            player: i,
            code: row_to_type(i, g.row(i)),
        }
    }

    pub fn degree(&self) -> usize {
        self.code.count_ones() as usize
    }

    /// Whether the type links `player` to `j`.
    pub fn links_to(&self, j: usize) -> bool {
        j != self.player && type_row(self.player, self.code) >> j & 1 == 1
    }

    /// Bits of the full row `g_i1 .. g_in`, e.g. `100` for player 1 of 3
    /// linked only to player 0.
    pub fn bits(&self, n: usize) -> String {
        let row = type_row(self.player, self.code);
        (0..n).map(|j| if row >> j & 1 == 1 { '1' } else { '0' }).collect()
    }
}

/// Types per player, `2^(n-1)`.
pub fn gamma(n: usize) -> usize {
    1 << (n - 1)
}

/// Expands a type code into an n-bit adjacency row (bit `i` stays zero).
#[inline]
pub fn type_row(i: usize, code: u32) -> u16 {
    let low = code & ((1 << i) - 1);
    let high = code >> i;
    (low | high << (i + 1)) as u16
}

/// Packs row `i` of an adjacency matrix into a type code.
#[inline]
pub fn row_to_type(i: usize, row: u16) -> u32 {
    let row = u32::from(row);
    let low = row & ((1 << i) - 1);
    let high = row >> (i + 1);
    low | high << i
}

/// A common-knowledge distribution over graphs on `n` vertices.
#[derive(Debug, Clone, PartialEq)]
pub enum Prior {
    /// Explicit support: `(graph code, mass)` pairs with distinct codes.
    DenseTable { n: usize, masses: Vec<(u128, f64)> },
    Uniform(usize),
    CorePeripheryUniform(usize),
    PointMass(Graph),
    /// Independent links, `pi[i * n + j]` is the probability of `(i, j)`.
    IndependentLinks { n: usize, pi: Vec<f64> },
    /// Contiguous groups with within-group probabilities `p` and
    /// across-group probability `eps`.
    StochasticBlock {
        sizes: Vec<usize>,
        p: Vec<f64>,
        eps: f64,
    },
}

impl Prior {
    pub fn table(n: usize, masses: Vec<(u128, f64)>) -> Result<Self> {
        let prior = Prior::DenseTable { n, masses };
        prior.validate()?;
        Ok(prior)
    }

    pub fn table_from_graphs(graphs: &[(Graph, f64)]) -> Result<Self> {
        let n = graphs
            .first()
            .map(|(g, _)| g.n())
            .ok_or_else(|| Error::InvalidPrior("empty support".into()))?;
        if graphs.iter().any(|(g, _)| g.n() != n) {
            return Err(Error::InvalidPrior("graphs of different sizes".into()));
        }
        Self::table(n, graphs.iter().map(|(g, m)| (g.code(), *m)).collect())
    }

    pub fn independent(n: usize, pi: Vec<f64>) -> Result<Self> {
        let prior = Prior::IndependentLinks { n, pi };
        prior.validate()?;
        Ok(prior)
    }

    pub fn stochastic_block(sizes: Vec<usize>, p: Vec<f64>, eps: f64) -> Result<Self> {
        let prior = Prior::StochasticBlock { sizes, p, eps };
        prior.validate()?;
        Ok(prior)
    }

    pub fn n(&self) -> usize {
        match self {
            Prior::DenseTable { n, .. } | Prior::IndependentLinks { n, .. } => *n,
            Prior::Uniform(n) | Prior::CorePeripheryUniform(n) => *n,
            Prior::PointMass(g) => g.n(),
            Prior::StochasticBlock { sizes, .. } => sizes.iter().sum(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_vertex_count(self.n())?;
        match self {
            Prior::DenseTable { n, masses } => {
                let m = pair_count(*n);
                let mut total = 0.0;
                let mut seen = std::collections::HashSet::new();
                for &(code, mass) in masses {
                    if m < 128 && code >> m != 0 {
                        return Err(Error::InvalidPrior(format!(
                            "graph code {code} out of range for n = {n}"
                        )));
                    }
                    if !(mass >= 0.0 && mass.is_finite()) {
                        return Err(Error::InvalidPrior(format!("mass {mass} for code {code}")));
                    }
                    if !seen.insert(code) {
                        return Err(Error::InvalidPrior(format!("duplicate code {code}")));
                    }
                    total += mass;
                }
                if (total - 1.0).abs() > SUPPORT_TOL {
                    return Err(Error::InvalidPrior(format!("masses sum to {total}, not 1")));
                }
            }
            Prior::IndependentLinks { n, pi } => {
                if pi.len() != n * n {
                    return Err(Error::InvalidPrior(format!(
                        "link matrix has {} entries, expected {}",
                        pi.len(),
                        n * n
                    )));
                }
                for i in 0..*n {
                    if pi[i * n + i] != 0.0 {
                        return Err(Error::InvalidPrior(format!("nonzero diagonal at {i}")));
                    }
                    for j in 0..*n {
                        let v = pi[i * n + j];
                        if !(0.0..=1.0).contains(&v) {
                            return Err(Error::InvalidPrior(format!("pi[{i}][{j}] = {v}")));
                        }
                        if v != pi[j * n + i] {
                            return Err(Error::InvalidPrior(format!("pi not symmetric at ({i}, {j})")));
                        }
                    }
                }
            }
            Prior::StochasticBlock { sizes, p, eps } => {
                if sizes.len() != p.len() || sizes.is_empty() {
                    return Err(Error::InvalidPrior(
                        "need one within-group probability per group".into(),
                    ));
                }
                if sizes.contains(&0) {
                    return Err(Error::InvalidPrior("empty group".into()));
                }
                if !(0.0..=1.0).contains(eps) {
                    return Err(Error::InvalidPrior(format!("eps = {eps}")));
                }
                for (k, &pk) in p.iter().enumerate() {
                    if !(0.0..=1.0).contains(&pk) {
                        return Err(Error::InvalidPrior(format!("p[{k}] = {pk}")));
                    }
                    if pk < *eps {
                        return Err(Error::InvalidPrior(format!(
                            "p[{k}] = {pk} is below eps = {eps}"
                        )));
                    }
                }
            }
            Prior::Uniform(_) | Prior::CorePeripheryUniform(_) | Prior::PointMass(_) => {}
        }
        Ok(())
    }

    /// Link probability matrix for priors that factor over links.
    pub fn link_probabilities(&self) -> Option<Vec<f64>> {
        match self {
            Prior::Uniform(n) => {
                let n = *n;
                Some(
                    (0..n * n)
                        .map(|k| if k / n == k % n { 0.0 } else { 0.5 })
                        .collect(),
                )
            }
            Prior::IndependentLinks { pi, .. } => Some(pi.clone()),
            Prior::StochasticBlock { sizes, p, eps } => {
                let group = group_of(sizes);
                let n = group.len();
                let mut pi = vec![0.0; n * n];
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            pi[i * n + j] = if group[i] == group[j] { p[group[i]] } else { *eps };
                        }
                    }
                }
                Some(pi)
            }
            _ => None,
        }
    }

    /// Explicit support list `(graph, mass)` with positive masses, in code
    /// order. Factored priors are expanded, which is limited to small `n`.
    pub fn support(&self) -> Result<Vec<(Graph, f64)>> {
        let n = self.n();
        let mut out = match self {
            Prior::DenseTable { n, masses } => masses
                .iter()
                .filter(|(_, m)| *m > 0.0)
                .map(|&(c, m)| Ok((Graph::from_code(*n, c)?, m)))
                .collect::<Result<Vec<_>>>()?,
            Prior::PointMass(g) => vec![(*g, 1.0)],
            Prior::CorePeripheryUniform(n) => {
                let graphs: Vec<Graph> = enumerate_graphs(&GraphClass::CorePeriphery(*n))?.collect();
                let m = 1.0 / graphs.len() as f64;
                graphs.into_iter().map(|g| (g, m)).collect()
            }
            _ => {
                if n > MAX_EXPAND_VERTICES {
                    return Err(Error::SizeLimit {
                        what: "vertex count for prior expansion",
                        got: n,
                        limit: MAX_EXPAND_VERTICES,
                        hint: "",
                    });
                }
                let pi = self.link_probabilities().expect("factored prior");
                enumerate_graphs(&GraphClass::AllGraphs(n))?
                    .filter_map(|g| {
                        let mut mass = 1.0;
                        for i in 0..n {
                            for j in (i + 1)..n {
                                let q = pi[i * n + j];
                                mass *= if g.has_edge(i, j) { q } else { 1.0 - q };
                            }
                        }
                        (mass > 0.0).then_some((g, mass))
                    })
                    .collect()
            }
        };
        out.sort_by_key(|(g, _)| g.code());
        Ok(out)
    }

    /// The same distribution written as an explicit table.
    pub fn expand(&self) -> Result<Prior> {
        Prior::table(
            self.n(),
            self.support()?.iter().map(|(g, m)| (g.code(), *m)).collect(),
        )
        .or_else(|e| match e {
            // products of link probabilities may miss 1 by a few ulps
            Error::InvalidPrior(_) => {
                let support = self.support()?;
                let total: f64 = support.iter().map(|(_, m)| m).sum();
                Ok(Prior::DenseTable {
                    n: self.n(),
                    masses: support.iter().map(|(g, m)| (g.code(), m / total)).collect(),
                })
            }
            other => Err(other),
        })
    }
}

/// Group index of every player for contiguous group sizes.
pub fn group_of(sizes: &[usize]) -> Vec<usize> {
    sizes
        .iter()
        .enumerate()
        .flat_map(|(k, &s)| std::iter::repeat_n(k, s))
        .collect()
}

#[derive(Debug, Clone)]
enum Posteriors {
    /// Sparse posterior rows for on-support observers, keyed by observer
    /// index. Entries are `(target index, probability)` sorted by index.
    Table(HashMap<u32, Vec<(u32, f64)>>),
    /// `weights[(i * n + j) * gamma + t_j]` is the probability of the part
    /// of `t_j` not involving `i`, i.e. `prod_{k != i, j}` of link factors.
    Factored { weights: Vec<f64> },
}

/// Marginals and posteriors of a prior, computed once up front.
#[derive(Debug, Clone)]
pub struct Beliefs {
    n: usize,
    gamma: usize,
    marginals: Vec<f64>,
    posteriors: Posteriors,
    factored: bool,
}

impl Beliefs {
    pub fn new(prior: &Prior) -> Result<Self> {
        prior.validate()?;
        let n = prior.n();
        match prior.link_probabilities() {
            Some(_) if n > MAX_FACTORED_VERTICES => Err(Error::SizeLimit {
                what: "vertex count for factored posteriors",
                got: n,
                limit: MAX_FACTORED_VERTICES,
                hint: "",
            }),
            Some(pi) => Ok(Self::factored(n, &pi)),
            None => Ok(Self::from_support(n, &prior.support()?)),
        }
    }

    fn factored(n: usize, pi: &[f64]) -> Self {
        let gamma = gamma(n);
        let factor = |i: usize, j: usize, linked: bool| {
            let q = pi[i * n + j];
            if linked {
                q
            } else {
                1.0 - q
            }
        };
        let mut marginals = vec![0.0; n * gamma];
        for i in 0..n {
            for t in 0..gamma {
                let row = type_row(i, t as u32);
                marginals[i * gamma + t] = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| factor(i, j, row >> j & 1 == 1))
                    .product();
            }
        }
        let mut weights = vec![0.0; n * n * gamma];
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                let base = (i * n + j) * gamma;
                for t in 0..gamma {
                    let row = type_row(j, t as u32);
                    weights[base + t] = (0..n)
                        .filter(|&k| k != i && k != j)
                        .map(|k| factor(j, k, row >> k & 1 == 1))
                        .product();
                }
            }
        }
        Beliefs {
            n,
            gamma,
            marginals,
            posteriors: Posteriors::Factored { weights },
            factored: true,
        }
    }

    fn from_support(n: usize, support: &[(Graph, f64)]) -> Self {
        let gamma = gamma(n);
        let mut marginals = vec![0.0; n * gamma];
        let mut joint: HashMap<(u32, u32), f64> = HashMap::new();
        for (g, mass) in support {
            let idx: Vec<u32> = (0..n)
                .map(|i| (i * gamma) as u32 + row_to_type(i, g.row(i)))
                .collect();
            for i in 0..n {
                marginals[idx[i] as usize] += mass;
                for j in (0..n).filter(|&j| j != i) {
                    *joint.entry((idx[i], idx[j])).or_insert(0.0) += mass;
                }
            }
        }
        let mut rows: HashMap<u32, Vec<(u32, f64)>> = HashMap::new();
        for ((obs, tgt), mass) in joint {
            let m = marginals[obs as usize];
            if m > SUPPORT_TOL {
                rows.entry(obs).or_default().push((tgt, mass / m));
            }
        }
        for row in rows.values_mut() {
            row.sort_by_key(|&(t, _)| t);
        }
        Beliefs {
            n,
            gamma,
            marginals,
            posteriors: Posteriors::Table(rows),
            factored: false,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> usize {
        self.gamma
    }

    /// Whether posteriors come from the product-of-links formula.
    pub fn is_factored(&self) -> bool {
        self.factored
    }

    pub(crate) fn factored_weights(&self) -> Option<&[f64]> {
        match &self.posteriors {
            Posteriors::Factored { weights } => Some(weights),
            Posteriors::Table(_) => None,
        }
    }

    pub(crate) fn table_row(&self, index: usize) -> &[(u32, f64)] {
        match &self.posteriors {
            Posteriors::Table(rows) => rows.get(&(index as u32)).map_or(&[], Vec::as_slice),
            Posteriors::Factored { .. } => &[],
        }
    }

    pub fn index(&self, t: TypeId) -> usize {
        t.player * self.gamma + t.code as usize
    }

    pub fn type_at(&self, index: usize) -> TypeId {
        TypeId::new(index / self.gamma, (index % self.gamma) as u32)
    }

    pub fn check_type(&self, t: TypeId) -> Result<()> {
        if t.player >= self.n {
            return Err(Error::VertexIndex {
                index: t.player,
                n: self.n,
            });
        }
        if t.code as usize >= self.gamma {
            return Err(Error::TypeCode { code: t.code, n: self.n });
        }
        Ok(())
    }

    pub fn marginal(&self, t: TypeId) -> Result<f64> {
        self.check_type(t)?;
        Ok(self.marginals[self.index(t)])
    }

    pub fn marginals(&self) -> &[f64] {
        &self.marginals
    }

    pub fn on_support(&self, t: TypeId) -> bool {
        self.marginals[self.index(t)] > SUPPORT_TOL
    }

    /// `p(t_j | t_i)` with the zero-marginal and consistency conventions.
    pub fn posterior(&self, observer: TypeId, target: TypeId) -> Result<f64> {
        self.check_type(observer)?;
        self.check_type(target)?;
        if observer.player == target.player {
            return Err(Error::SamePlayer(observer.player));
        }
        if !self.on_support(observer) {
            return Ok(0.0);
        }
        if observer.links_to(target.player) != target.links_to(observer.player) {
            return Ok(0.0);
        }
        let (obs, tgt) = (self.index(observer), self.index(target));
        Ok(match &self.posteriors {
            Posteriors::Factored { weights } => {
                weights[(observer.player * self.n + target.player) * self.gamma + target.code as usize]
            }
            Posteriors::Table(_) => {
                let row = self.table_row(obs);
                row.binary_search_by_key(&(tgt as u32), |&(t, _)| t)
                    .map_or(0.0, |k| row[k].1)
            }
        })
    }

    /// Calls `f(code, p)` for every type of player `j` with positive
    /// posterior given `observer`.
    pub fn for_each_posterior(&self, observer: TypeId, j: usize, mut f: impl FnMut(u32, f64)) {
        if j == observer.player || !self.on_support(observer) {
            return;
        }
        match &self.posteriors {
            Posteriors::Factored { weights } => {
                let linked = observer.links_to(j);
                let bit = if observer.player < j { observer.player } else { observer.player - 1 };
                let base = (observer.player * self.n + j) * self.gamma;
                for t in 0..self.gamma {
                    if (t >> bit & 1 == 1) == linked {
                        let w = weights[base + t];
                        if w > 0.0 {
                            f(t as u32, w);
                        }
                    }
                }
            }
            Posteriors::Table(_) => {
                let lo = (j * self.gamma) as u32;
                let hi = lo + self.gamma as u32;
                let row = self.table_row(self.index(observer));
                let start = row.partition_point(|&(t, _)| t < lo);
                for &(t, p) in row[start..].iter().take_while(|&&(t, _)| t < hi) {
                    f(t - lo, p);
                }
            }
        }
    }

    /// All positive posteriors given `observer`, ordered by target player
    /// then code.
    pub fn posterior_row(&self, observer: TypeId) -> Result<Vec<(TypeId, f64)>> {
        self.check_type(observer)?;
        let mut out = Vec::new();
        for j in 0..self.n {
            self.for_each_posterior(observer, j, |c, p| out.push((TypeId::new(j, c), p)));
        }
        Ok(out)
    }

    /// Codes of player `i` with positive marginal.
    pub fn reduced_type_set(&self, i: usize) -> Result<Vec<u32>> {
        if i >= self.n {
            return Err(Error::VertexIndex { index: i, n: self.n });
        }
        Ok((0..self.gamma as u32)
            .filter(|&c| self.on_support(TypeId::new(i, c)))
            .collect())
    }

    /// Interim expected degree of a hop-`hop` contact of `observer`.
    ///
    /// Hop 1 averages over the observer's neighbours `j` and their
    /// posterior types. Each further hop moves from a contact `(j, t_j)` to
    /// a uniformly chosen neighbour `k` of `t_j`, whose type is drawn from
    /// `p(t_k | t_j)`.
    pub fn expected_neighbor_degree(&self, observer: TypeId, hop: usize) -> Result<f64> {
        self.check_type(observer)?;
        if hop == 0 {
            return Err(Error::InvalidParameter("hop must be at least 1".into()));
        }
        if !self.on_support(observer) {
            return Err(Error::NullObserver);
        }
        if observer.degree() == 0 {
            return Err(Error::InvalidParameter(
                "observer has no neighbours to average over".into(),
            ));
        }
        let mut dist: Vec<f64> = vec![0.0; self.n * self.gamma];
        dist[self.index(observer)] = 1.0;
        for _ in 0..hop {
            let mut next = vec![0.0; dist.len()];
            for (idx, &w) in dist.iter().enumerate().filter(|(_, &w)| w > 0.0) {
                let from = self.type_at(idx);
                let d = from.degree() as f64;
                if d == 0.0 {
                    continue;
                }
                for j in (0..self.n).filter(|&j| from.links_to(j)) {
                    self.for_each_posterior(from, j, |c, p| {
                        next[j * self.gamma + c as usize] += w * p / d;
                    });
                }
            }
            dist = next;
        }
        let total: f64 = dist.iter().sum();
        let mean: f64 = dist
            .iter()
            .enumerate()
            .map(|(idx, &w)| w * self.type_at(idx).degree() as f64)
            .sum();
        Ok(mean / total)
    }

    /// Ex-ante mean degree `(1/n) sum_i E[d_i]`.
    pub fn ex_ante_mean_degree(&self) -> f64 {
        let total: f64 = self
            .marginals
            .iter()
            .enumerate()
            .map(|(idx, &m)| m * self.type_at(idx).degree() as f64)
            .sum();
        total / self.n as f64
    }
}
