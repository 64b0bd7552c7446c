//! Labeled undirected simple graphs on at most 16 vertices.
//!
//! A [`Graph`] stores one `u16` bit row per vertex. Graphs are also
//! identified by their upper-triangle code: bit 0 is the edge (0,1), then
//! (0,2), ..., (0,n-1), (1,2), ... in row-major order. Enumeration of a
//! [`GraphClass`] emits members in ascending code order.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest vertex count a [`Graph`] can hold.
pub const MAX_VERTICES: usize = 16;
/// Largest `n` for which `AllGraphs(n)` may be enumerated (2^21 graphs).
pub const MAX_ENUMERATION_VERTICES: usize = 7;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Graph {
    n: u8,
    rows: [u16; MAX_VERTICES],
}

/// Which bound a decay parameter is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecayBound {
    /// `lambda * (n - 1) < 1`, valid for every graph on `n` vertices.
    #[default]
    Uniform,
    /// `lambda * rho(g) < 1` for the specific graph.
    Spectral,
}

/// Number of walks of a given length; exact while it fits in 64 bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WalkCount {
    Exact(u64),
    Approx(f64),
}

impl WalkCount {
    pub fn as_f64(self) -> f64 {
        match self {
            WalkCount::Exact(v) => v as f64,
            WalkCount::Approx(v) => v,
        }
    }

    pub fn exact(self) -> Option<u64> {
        match self {
            WalkCount::Exact(v) => Some(v),
            WalkCount::Approx(_) => None,
        }
    }
}

pub(crate) fn check_vertex_count(n: usize) -> Result<()> {
    if !(2..=MAX_VERTICES).contains(&n) {
        return Err(Error::VertexCount {
            n,
            min: 2,
            max: MAX_VERTICES,
        });
    }
    Ok(())
}

/// Number of unordered vertex pairs, i.e. the bit length of a graph code.
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Bit position of the pair `(i, j)`, `i < j`, in the upper-triangle code.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

impl Graph {
    pub fn empty(n: usize) -> Result<Self> {
        check_vertex_count(n)?;
        Ok(Graph {
            n: n as u8,
            rows: [0; MAX_VERTICES],
        })
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut g = Self::empty(n)?;
        let all = full_mask(n);
        for i in 0..n {
            g.rows[i] = all & !(1 << i);
        }
        Ok(g)
    }

    pub fn star(n: usize, center: usize) -> Result<Self> {
        let mut g = Self::empty(n)?;
        g.check_vertex(center)?;
        for j in (0..n).filter(|&j| j != center) {
            g.insert_edge(center, j);
        }
        Ok(g)
    }

    /// Core-periphery graph whose core is the vertex set in `core_mask`:
    /// the core is a clique, every core vertex is linked to every periphery
    /// vertex and the periphery is independent.
    pub fn core_periphery(n: usize, core_mask: u16) -> Result<Self> {
        let mut g = Self::empty(n)?;
        if u32::from(core_mask) >> n != 0 {
            return Err(Error::InvalidParameter(format!(
                "core mask {core_mask:#b} has vertices outside 0..{n}"
            )));
        }
        let all = full_mask(n);
        for i in 0..n {
            g.rows[i] = if core_mask & (1 << i) != 0 {
                all & !(1 << i)
            } else {
                core_mask
            };
        }
        Ok(g)
    }

    /// Builds the symmetric closure of an edge list. Repeated edges are
    /// idempotent.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n)?;
        for &(i, j) in edges {
            g.check_vertex(i)?;
            g.check_vertex(j)?;
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            g.insert_edge(i, j);
        }
        Ok(g)
    }

    /// Builds a graph from adjacency bit rows, validating symmetry and the
    /// zero diagonal.
    pub fn from_rows(n: usize, rows: &[u16]) -> Result<Self> {
        let mut g = Self::empty(n)?;
        if rows.len() != n {
            return Err(Error::InvalidParameter(format!(
                "expected {n} rows, got {}",
                rows.len()
            )));
        }
        let all = full_mask(n);
        for (i, &r) in rows.iter().enumerate() {
            if r & !all != 0 {
                return Err(Error::VertexIndex {
                    index: 15 - r.leading_zeros() as usize,
                    n,
                });
            }
            if r & (1 << i) != 0 {
                return Err(Error::SelfLoop(i));
            }
            g.rows[i] = r;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if g.has_edge(i, j) != g.has_edge(j, i) {
                    return Err(Error::Asymmetric(i, j));
                }
            }
        }
        Ok(g)
    }

    /// Decodes an upper-triangle graph code.
    pub fn from_code(n: usize, code: u128) -> Result<Self> {
        let mut g = Self::empty(n)?;
        let m = pair_count(n);
        if m < 128 && code >> m != 0 {
            return Err(Error::InvalidParameter(format!(
                "graph code {code} has more than {m} bits for n = {n}"
            )));
        }
        let mut bit = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                if code >> bit & 1 == 1 {
                    g.insert_edge(i, j);
                }
                bit += 1;
            }
        }
        Ok(g)
    }

    pub fn code(&self) -> u128 {
        let n = self.n();
        let mut code = 0u128;
        let mut bit = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                if self.has_edge(i, j) {
                    code |= 1 << bit;
                }
                bit += 1;
            }
        }
        code
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n as usize
    }

    /// Adjacency row of `i` as an n-bit mask (bit `j` is `g_ij`).
    #[inline]
    pub fn row(&self, i: usize) -> u16 {
        self.rows[i]
    }

    pub fn rows(&self) -> &[u16] {
        &self.rows[..self.n()]
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.rows[i] >> j & 1 == 1
    }

    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        self.rows[i].count_ones() as usize
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n()).map(|i| self.degree(i)).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.rows().iter().map(|r| r.count_ones() as usize).sum::<usize>() / 2
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let row = self.rows[i];
        (0..self.n()).filter(move |&j| row >> j & 1 == 1)
    }

    /// Edges `(i, j)` with `i < j`, in code order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n();
        (0..n).flat_map(move |i| ((i + 1)..n).filter(move |&j| self.has_edge(i, j)).map(move |j| (i, j)))
    }

    /// Relabels vertices: vertex `v` of `self` becomes `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        if perm.len() != n {
            return Err(Error::InvalidParameter("permutation length".into()));
        }
        let mut seen = 0u32;
        for &p in perm {
            if p >= n || seen >> p & 1 == 1 {
                return Err(Error::InvalidParameter("not a permutation".into()));
            }
            seen |= 1 << p;
        }
        let mut g = Self::empty(n)?;
        for (i, j) in self.edges() {
            g.insert_edge(perm[i], perm[j]);
        }
        Ok(g)
    }

    fn insert_edge(&mut self, i: usize, j: usize) {
        self.rows[i] |= 1 << j;
        self.rows[j] |= 1 << i;
    }

    fn check_vertex(&self, i: usize) -> Result<()> {
        if i >= self.n() {
            return Err(Error::VertexIndex {
                index: i,
                n: self.n(),
            });
        }
        Ok(())
    }

    /// Number of walks of length `s` starting at `i`, i.e. `sum_j (g^s)_ij`.
    ///
    /// Counts are exact while every intermediate value fits in a `u64`;
    /// after the first overflow the remaining products run in `f64` and
    /// the result is [`WalkCount::Approx`].
    pub fn walk_count(&self, i: usize, s: usize) -> WalkCount {
        self.walk_counts(s)[i]
    }

    /// [`Graph::walk_count`] for every vertex at once.
    pub fn walk_counts(&self, s: usize) -> Vec<WalkCount> {
        let n = self.n();
        let mut exact: Option<Vec<u64>> = Some(vec![1; n]);
        let mut approx: Vec<f64> = vec![1.0; n];
        for _ in 0..s {
            if let Some(v) = &exact {
                let next: Option<Vec<u64>> = (0..n)
                    .map(|i| {
                        self.neighbors(i)
                            .try_fold(0u64, |acc, j| acc.checked_add(v[j]))
                    })
                    .collect();
                match next {
                    Some(next) => exact = Some(next),
                    None => {
                        approx = v.iter().map(|&x| x as f64).collect();
                        approx = self.step_f64(&approx);
                        exact = None;
                    }
                }
            } else {
                approx = self.step_f64(&approx);
            }
        }
        match exact {
            Some(v) => v.into_iter().map(WalkCount::Exact).collect(),
            None => approx.into_iter().map(WalkCount::Approx).collect(),
        }
    }

    fn step_f64(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n())
            .map(|i| self.neighbors(i).map(|j| v[j]).sum())
            .collect()
    }

    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| if self.has_edge(i, j) { 1.0 } else { 0.0 })
    }

    /// Largest adjacency eigenvalue.
    pub fn spectral_radius(&self) -> f64 {
        let eig = self.adjacency_matrix().symmetric_eigenvalues();
        eig.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
    }

    /// Validates `lambda` against the chosen bound for this graph.
    pub fn check_decay(&self, lambda: f64, bound: DecayBound) -> Result<()> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::LambdaBound {
                lambda,
                bound: "lambda >= 0".into(),
            });
        }
        match bound {
            DecayBound::Uniform => {
                let nm1 = (self.n() - 1) as f64;
                if lambda * nm1 >= 1.0 {
                    return Err(Error::LambdaBound {
                        lambda,
                        bound: format!("lambda < 1/(n-1) = {}", 1.0 / nm1),
                    });
                }
            }
            DecayBound::Spectral => {
                let rho = self.spectral_radius();
                if lambda * rho >= 1.0 - 1e-12 {
                    return Err(Error::LambdaBound {
                        lambda,
                        bound: format!("lambda * rho(g) < 1 with rho(g) = {rho}"),
                    });
                }
            }
        }
        Ok(())
    }

    /// Katz-Bonacich centrality `b = (I - lambda g)^{-1} 1`.
    pub fn katz_bonacich(&self, lambda: f64, bound: DecayBound) -> Result<Vec<f64>> {
        self.check_decay(lambda, bound)?;
        let n = self.n();
        let m = DMatrix::<f64>::identity(n, n) - self.adjacency_matrix() * lambda;
        let b = m
            .lu()
            .solve(&DVector::from_element(n, 1.0))
            .ok_or_else(|| Error::Singular(format!("I - {lambda} g")))?;
        Ok(b.iter().copied().collect())
    }

    /// Plain-text form: `n <N>` followed by one `i j` line per edge.
    pub fn to_text(&self) -> String {
        let mut s = format!("n {}\n", self.n());
        for (i, j) in self.edges() {
            s.push_str(&format!("{i} {j}\n"));
        }
        s
    }
}

fn full_mask(n: usize) -> u16 {
    ((1u32 << n) - 1) as u16
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges=[", self.n())?;
        for (k, (i, j)) in self.edges().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{i}-{j}")?;
        }
        write!(f, "])")
    }
}

impl FromStr for Graph {
    type Err = Error;

    /// Parses the text format: first non-comment line `n <N>`, then one
    /// `<i> <j>` edge per line. `#` starts a comment.
    fn from_str(text: &str) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |msg: String| Error::Parse {
                line: lineno + 1,
                msg,
            };
            let mut fields = line.split_whitespace();
            let a = fields.next().unwrap_or_default();
            let b = fields
                .next()
                .ok_or_else(|| parse_err(format!("expected two fields, got `{line}`")))?;
            if fields.next().is_some() {
                return Err(parse_err(format!("trailing fields in `{line}`")));
            }
            match n {
                None => {
                    if a != "n" {
                        return Err(parse_err(format!("expected `n <N>` header, got `{line}`")));
                    }
                    n = Some(b.parse().map_err(|_| parse_err(format!("bad vertex count `{b}`")))?);
                }
                Some(_) => {
                    let i = a.parse().map_err(|_| parse_err(format!("bad vertex `{a}`")))?;
                    let j = b.parse().map_err(|_| parse_err(format!("bad vertex `{b}`")))?;
                    edges.push((i, j));
                }
            }
        }
        let n = n.ok_or(Error::Parse {
            line: 0,
            msg: "missing `n <N>` header".into(),
        })?;
        Graph::from_edges(n, &edges)
    }
}

/// An enumerable family of labeled graphs.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphClass {
    AllGraphs(usize),
    CorePeriphery(usize),
    Single(Graph),
}

/// Core sizes that define distinct core-periphery graphs: `0..=n-2` and `n`.
/// A core of size `n-1` would coincide with the complete graph.
pub fn core_sizes(n: usize) -> impl Iterator<Item = usize> {
    (0..n.saturating_sub(1)).chain(std::iter::once(n))
}

/// Streams the members of `class` in ascending code order.
pub fn enumerate_graphs(class: &GraphClass) -> Result<Box<dyn Iterator<Item = Graph> + Send>> {
    match *class {
        GraphClass::AllGraphs(n) => {
            check_vertex_count(n)?;
            if n > MAX_ENUMERATION_VERTICES {
                return Err(Error::SizeLimit {
                    what: "AllGraphs vertex count",
                    got: n,
                    limit: MAX_ENUMERATION_VERTICES,
                    hint: "",
                });
            }
            let total = 1u128 << pair_count(n);
            Ok(Box::new((0..total).map(move |c| {
                Graph::from_code(n, c).expect("code within range")
            })))
        }
        GraphClass::CorePeriphery(n) => {
            check_vertex_count(n)?;
            let mut graphs: Vec<Graph> = Vec::new();
            for mask in 0u32..(1 << n) {
                let size = mask.count_ones() as usize;
                if size + 1 == n {
                    continue;
                }
                graphs.push(Graph::core_periphery(n, mask as u16)?);
            }
            graphs.sort_by_key(Graph::code);
            graphs.dedup();
            Ok(Box::new(graphs.into_iter()))
        }
        GraphClass::Single(g) => Ok(Box::new(std::iter::once(g))),
    }
}

/// Whether `g` is a core-periphery graph (including empty and complete).
pub fn is_core_periphery(g: &Graph) -> bool {
    let n = g.n();
    let core: u16 = (0..n)
        .filter(|&i| g.degree(i) == n - 1)
        .fold(0, |m, i| m | 1 << i);
    if core.count_ones() as usize + 1 == n {
        return false;
    }
    Graph::core_periphery(n, core).map(|cp| cp == *g).unwrap_or(false)
}
