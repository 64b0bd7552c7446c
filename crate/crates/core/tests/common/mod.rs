//! Exact reference computations used as oracles.
//!
//! Everything here is written against plain adjacency matrices and exact
//! rationals, without going through the library's graph codes, posterior
//! tables or solvers.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;

pub type Q = Ratio<i128>;

pub fn q(a: i128, b: i128) -> Q {
    Ratio::new(a, b)
}

/// Adjacency matrix as nested vectors of 0/1.
pub type Adj = Vec<Vec<u8>>;

/// Every simple graph on `n` vertices; edge subsets enumerated in the
/// order of the pairs `(i, j)`, `i < j`, row by row.
pub fn all_graphs(n: usize) -> Vec<Adj> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    (0u64..1 << pairs.len())
        .map(|mask| {
            let mut a = vec![vec![0u8; n]; n];
            for (b, &(i, j)) in pairs.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    a[i][j] = 1;
                    a[j][i] = 1;
                }
            }
            a
        })
        .collect()
}

/// Distinct core-periphery graphs: a clique core joined to every
/// periphery vertex, with an independent periphery.
pub fn core_periphery_graphs(n: usize) -> Vec<Adj> {
    let mut set = BTreeSet::new();
    for core in 0u32..1 << n {
        let is_core = |v: usize| core >> v & 1 == 1;
        let mut a = vec![vec![0u8; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j && (is_core(i) || is_core(j)) {
                    a[i][j] = 1;
                }
            }
        }
        set.insert(a);
    }
    set.into_iter().collect()
}

pub fn degree(a: &Adj, i: usize) -> usize {
    a[i].iter().map(|&x| x as usize).sum()
}

/// Row of `i` with the diagonal dropped.
pub fn type_of(a: &Adj, i: usize) -> Vec<u8> {
    (0..a.len()).filter(|&j| j != i).map(|j| a[i][j]).collect()
}

/// Exact interim beliefs of a finite prior.
pub struct ExactBeliefs {
    pub n: usize,
    marginal: BTreeMap<(usize, Vec<u8>), Q>,
    joint: BTreeMap<(usize, Vec<u8>, usize, Vec<u8>), Q>,
}

impl ExactBeliefs {
    pub fn new(support: &[(Adj, Q)]) -> Self {
        let n = support[0].0.len();
        let mut marginal = BTreeMap::new();
        let mut joint = BTreeMap::new();
        for (a, m) in support {
            let types: Vec<Vec<u8>> = (0..n).map(|i| type_of(a, i)).collect();
            for i in 0..n {
                *marginal.entry((i, types[i].clone())).or_insert(q(0, 1)) += *m;
                for j in (0..n).filter(|&j| j != i) {
                    *joint
                        .entry((i, types[i].clone(), j, types[j].clone()))
                        .or_insert(q(0, 1)) += *m;
                }
            }
        }
        ExactBeliefs { n, marginal, joint }
    }

    pub fn marginal(&self, i: usize, t: &[u8]) -> Q {
        self.marginal.get(&(i, t.to_vec())).copied().unwrap_or(q(0, 1))
    }

    pub fn posterior(&self, i: usize, ti: &[u8], j: usize, tj: &[u8]) -> Q {
        let m = self.marginal(i, ti);
        if m == q(0, 1) {
            return m;
        }
        self.joint
            .get(&(i, ti.to_vec(), j, tj.to_vec()))
            .map_or(q(0, 1), |p| p / m)
    }

    /// `(type, probability)` of player `j` given `(i, ti)`, positive only.
    pub fn posterior_row(&self, i: usize, ti: &[u8], j: usize) -> Vec<(Vec<u8>, Q)> {
        let m = self.marginal(i, ti);
        self.joint
            .iter()
            .filter(|((a, ta, b, _), _)| *a == i && ta.as_slice() == ti && *b == j)
            .map(|((_, _, _, tj), p)| (tj.clone(), p / m))
            .collect()
    }

    /// Vertex indices `t` links to, for a type of player `i`.
    fn neighbours(&self, i: usize, t: &[u8]) -> Vec<usize> {
        (0..self.n)
            .filter(|&j| j != i)
            .zip(t)
            .filter(|(_, &b)| b == 1)
            .map(|(j, _)| j)
            .collect()
    }

    /// Expected degree of a hop-`hop` contact: hop 1 averages over the
    /// observer's neighbours under its posterior, each further hop moves
    /// to a uniform neighbour of the current contact's type under that
    /// contact's posterior.
    pub fn neighbour_degree(&self, i: usize, ti: &[u8], hop: usize) -> Q {
        let mut dist: BTreeMap<(usize, Vec<u8>), Q> = BTreeMap::new();
        dist.insert((i, ti.to_vec()), q(1, 1));
        for _ in 0..hop {
            let mut next: BTreeMap<(usize, Vec<u8>), Q> = BTreeMap::new();
            for ((a, ta), w) in &dist {
                let nb = self.neighbours(*a, ta);
                if nb.is_empty() {
                    continue;
                }
                let share = w / q(nb.len() as i128, 1);
                for j in nb {
                    for (tj, p) in self.posterior_row(*a, ta, j) {
                        *next.entry((j, tj)).or_insert(q(0, 1)) += share * p;
                    }
                }
            }
            dist = next;
        }
        let total: Q = dist.values().copied().sum();
        let mean: Q = dist
            .iter()
            .map(|((_, t), w)| w * q(t.iter().map(|&b| b as i128).sum(), 1))
            .sum();
        mean / total
    }
}

pub fn uniform_support(n: usize) -> Vec<(Adj, Q)> {
    let graphs = all_graphs(n);
    let m = q(1, graphs.len() as i128);
    graphs.into_iter().map(|a| (a, m)).collect()
}

pub fn cp_support(n: usize) -> Vec<(Adj, Q)> {
    let graphs = core_periphery_graphs(n);
    let m = q(1, graphs.len() as i128);
    graphs.into_iter().map(|a| (a, m)).collect()
}

/// `(E[n_p], E[n_p n_co], E[n_co - 1])` for vertex 0 conditioned on being
/// a core vertex of a uniformly drawn core-periphery graph.
pub fn cp_core_expectations(n: usize) -> (Q, Q, Q) {
    let graphs: Vec<Adj> = core_periphery_graphs(n)
        .into_iter()
        .filter(|a| degree(a, 0) == n - 1)
        .collect();
    let count = q(graphs.len() as i128, 1);
    let (mut x, mut y, mut z) = (q(0, 1), q(0, 1), q(0, 1));
    for a in &graphs {
        let n_co = (0..n).filter(|&v| degree(a, v) == n - 1).count() as i128;
        let n_p = n as i128 - n_co;
        x += q(n_p, 1);
        y += q(n_p * n_co, 1);
        z += q(n_co - 1, 1);
    }
    (x / count, y / count, z / count)
}

/// Gaussian elimination over the rationals.
pub fn solve_exact(mut a: Vec<Vec<Q>>, mut b: Vec<Q>) -> Vec<Q> {
    let k = b.len();
    for col in 0..k {
        let piv = (col..k).find(|&r| a[r][col] != q(0, 1)).expect("nonsingular");
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..k {
            if r != col && a[r][col] != q(0, 1) {
                let f = a[r][col] / a[col][col];
                for c in col..k {
                    let v = a[col][c];
                    a[r][c] -= f * v;
                }
                let v = b[col];
                b[r] -= f * v;
            }
        }
    }
    (0..k).map(|r| b[r] / a[r][r]).collect()
}

/// Two-group weights `(g11, g12, g21, g22)` with equal within-group
/// probability `p`, solved exactly.
pub fn two_group_gamma(n1: i128, n2: i128, p: Q, eps: Q, lambda: Q) -> [Q; 4] {
    let one = q(1, 1);
    let zero = q(0, 1);
    let l = lambda;
    // unknowns: g11, g12, g21, g22
    let a = vec![
        vec![one - l * ((q(n1, 1) - 2) * p + 1), l * -(q(n2, 1) * eps), zero, zero],
        vec![zero, one, -(l * ((q(n1, 1) - 1) * eps + 1)), -(l * (q(n2, 1) - 1) * p)],
        vec![-(l * (q(n1, 1) - 1) * p), -(l * ((q(n2, 1) - 1) * eps + 1)), one, zero],
        vec![zero, zero, -(l * q(n1, 1) * eps), one - l * ((q(n2, 1) - 2) * p + 1)],
    ];
    let s = solve_exact(a, vec![one; 4]);
    [s[0], s[1], s[2], s[3]]
}

pub fn to_f64(x: Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}
