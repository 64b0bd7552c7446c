//! Welfare of realised action profiles and the core-size sweep.

use rayon::prelude::*;

use crate::closed_form::{cp_bne, cp_complete_info, CpActions};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// `sum_i [a_i - a_i^2 / 2 + lambda a_i sum_j g_ij a_j]`.
pub fn welfare(g: &Graph, actions: &[f64], lambda: f64) -> Result<f64> {
    if actions.len() != g.n() {
        return Err(Error::InvalidParameter(format!(
            "{} actions for {} players",
            actions.len(),
            g.n()
        )));
    }
    Ok(actions
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let spill: f64 = g.neighbors(i).map(|j| actions[j]).sum();
            a - a * a / 2.0 + lambda * a * spill
        })
        .sum())
}

/// Welfare on the core-periphery graph when every core vertex plays
/// `core` and every periphery vertex plays `periphery`.
pub fn cp_welfare(n: usize, n_co: usize, actions: CpActions, lambda: f64) -> f64 {
    let n_p = n - n_co;
    let (c, p) = (actions.core.unwrap_or(0.0), actions.periphery.unwrap_or(0.0));
    let (nc, np) = (n_co as f64, n_p as f64);
    let core = nc * (c - c * c / 2.0 + lambda * c * ((nc - 1.0) * c + np * p));
    let periphery = np * (p - p * p / 2.0 + lambda * p * nc * c);
    core + periphery
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelfareTriple {
    pub w_incomplete: f64,
    pub w_complete: f64,
    pub w_efficient: f64,
}

/// Welfare under the incomplete-information equilibrium, the
/// complete-information equilibrium and the efficient profile, on the
/// core-periphery graph with `n_co` core vertices.
pub fn cp_welfare_triple(n: usize, n_co: usize, lambda: f64) -> Result<WelfareTriple> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!("welfare comparison needs n >= 4, got {n}")));
    }
    if n_co > n {
        return Err(Error::InvalidParameter(format!("core size {n_co} exceeds n = {n}")));
    }
    if !(lambda >= 0.0 && 2.0 * lambda * ((n - 1) as f64) < 1.0) {
        return Err(Error::LambdaBound {
            lambda,
            bound: format!("lambda < 1/(2(n-1)) = {}", 0.5 / (n - 1) as f64),
        });
    }
    let n_p = n - n_co;
    let incomplete = cp_bne(n, lambda, n_co)?;
    let complete = cp_complete_info(n_co, n_p, lambda)?;
    let efficient = cp_complete_info(n_co, n_p, 2.0 * lambda)?;
    Ok(WelfareTriple {
        w_incomplete: cp_welfare(n, n_co, incomplete, lambda),
        w_complete: cp_welfare(n, n_co, complete, lambda),
        w_efficient: cp_welfare(n, n_co, efficient, lambda),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub n_co: usize,
    pub welfare: WelfareTriple,
}

/// Default core sizes `1..=n/2`.
pub fn default_core_range(n: usize) -> Vec<usize> {
    (1..=n / 2).collect()
}

/// Every nonempty core size giving a distinct graph: `1..=n-2` and `n`.
pub fn full_core_range(n: usize) -> Vec<usize> {
    (1..n.saturating_sub(1)).chain(std::iter::once(n)).collect()
}

/// One row per core size, in the given order.
pub fn welfare_sweep(n: usize, lambda: f64, core_sizes: &[usize]) -> Result<Vec<SweepRow>> {
    core_sizes
        .par_iter()
        .map(|&n_co| {
            Ok(SweepRow {
                n_co,
                welfare: cp_welfare_triple(n, n_co, lambda)?,
            })
        })
        .collect()
}
