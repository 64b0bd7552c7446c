//! Line-oriented `key=value` configuration and prior loading.
//!
//! ```text
//! # a three-player uniform prior
//! n = 3
//! prior.kind = uniform
//! ```
//!
//! Paths in the config are resolved against the config file's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::belief::Prior;
use crate::error::{Error, Result};
use crate::graph::{pair_index, Graph};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
    base_dir: PathBuf,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = KeyValues::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: lineno + 1,
                msg: format!("expected key=value, got `{line}`"),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: "empty key".into(),
                });
            }
            if kv.entries.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(kv)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut kv = Self::parse(&text)?;
        kv.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(kv)
    }

    /// Sets or replaces a key, e.g. from a command-line override.
    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::InvalidParameter(format!("missing config key `{key}`")))
    }

    pub fn parse_value<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad value `{v}` for `{key}`")))
            })
            .transpose()
    }

    pub fn require_value<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.parse_value(key)?
            .ok_or_else(|| Error::InvalidParameter(format!("missing config key `{key}`")))
    }

    pub fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|s| {
                        s.trim().parse().map_err(|_| {
                            Error::InvalidParameter(format!("bad list entry `{s}` for `{key}`"))
                        })
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn path(&self, key: &str) -> Result<PathBuf> {
        let p = Path::new(self.require(key)?);
        Ok(if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        })
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Parses a probability written as a decimal or as `a/b`.
fn parse_prob(s: &str) -> Option<f64> {
    match s.split_once('/') {
        Some((a, b)) => Some(a.trim().parse::<f64>().ok()? / b.trim().parse::<f64>().ok()?),
        None => s.parse().ok(),
    }
}

/// Parses `<graph-code> <mass>` lines.
pub fn parse_table(n: usize, text: &str) -> Result<Prior> {
    let mut masses = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: lineno + 1, msg };
        let mut f = line.split_whitespace();
        let (Some(code), Some(mass), None) = (f.next(), f.next(), f.next()) else {
            return Err(err(format!("expected `<graph-code> <mass>`, got `{line}`")));
        };
        let code: u128 = code.parse().map_err(|_| err(format!("bad graph code `{code}`")))?;
        let mass = parse_prob(mass).ok_or_else(|| err(format!("bad mass `{mass}`")))?;
        masses.push((code, mass));
    }
    Prior::table(n, masses)
}

/// Parses `<i> <j> <prob>` lines into a symmetric link matrix; pairs not
/// listed have probability 0.
pub fn parse_link_probabilities(n: usize, text: &str) -> Result<Prior> {
    let mut pi = vec![0.0; n * n];
    let mut seen = vec![false; n * n];
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: lineno + 1, msg };
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(err(format!("expected `<i> <j> <prob>`, got `{line}`")));
        }
        let i: usize = f[0].parse().map_err(|_| err(format!("bad vertex `{}`", f[0])))?;
        let j: usize = f[1].parse().map_err(|_| err(format!("bad vertex `{}`", f[1])))?;
        let q = parse_prob(f[2]).ok_or_else(|| err(format!("bad probability `{}`", f[2])))?;
        if i >= n || j >= n || i == j {
            return Err(err(format!("invalid pair ({i}, {j}) for n = {n}")));
        }
        let (a, b) = (i.min(j), i.max(j));
        if seen[a * n + b] && pi[a * n + b] != q {
            return Err(err(format!("conflicting probabilities for ({a}, {b})")));
        }
        seen[a * n + b] = true;
        pi[a * n + b] = q;
        pi[b * n + a] = q;
    }
    Prior::independent(n, pi)
}

/// Builds the prior described by the `prior.*` keys.
pub fn load_prior(kv: &KeyValues) -> Result<Prior> {
    let n: usize = kv.require_value("n")?;
    let kind = kv.require("prior.kind")?;
    let prior = match kind {
        "uniform" => Prior::Uniform(n),
        "cp_uniform" => Prior::CorePeripheryUniform(n),
        "point_mass" => {
            let g: Graph = read(&kv.path("point_mass.graph")?)?.parse()?;
            if g.n() != n {
                return Err(Error::InvalidPrior(format!(
                    "graph file has n = {}, config has n = {n}",
                    g.n()
                )));
            }
            Prior::PointMass(g)
        }
        "table" => parse_table(n, &read(&kv.path("table.path")?)?)?,
        "independent" => parse_link_probabilities(n, &read(&kv.path("independent.pi")?)?)?,
        "stochastic_block" => {
            let sizes: Vec<usize> = kv
                .list("stochastic_block.sizes")?
                .ok_or_else(|| Error::InvalidParameter("missing `stochastic_block.sizes`".into()))?;
            let p: Vec<f64> = kv
                .list("stochastic_block.p")?
                .ok_or_else(|| Error::InvalidParameter("missing `stochastic_block.p`".into()))?;
            let eps: f64 = kv.require_value("stochastic_block.eps")?;
            let prior = Prior::stochastic_block(sizes, p, eps)?;
            if prior.n() != n {
                return Err(Error::InvalidPrior(format!(
                    "group sizes sum to {}, config has n = {n}",
                    prior.n()
                )));
            }
            prior
        }
        other => {
            return Err(Error::InvalidPrior(format!(
                "unknown prior.kind `{other}` (expected uniform, cp_uniform, point_mass, table, independent or stochastic_block)"
            )))
        }
    };
    prior.validate()?;
    Ok(prior)
}

/// Upper-triangle code of the edge `(i, j)` alone; handy for writing
/// table files by hand.
pub fn edge_code(n: usize, i: usize, j: usize) -> u128 {
    1 << pair_index(n, i.min(j), i.max(j))
}
