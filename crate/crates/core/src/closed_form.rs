//! Closed-form equilibria for structured priors.

use nalgebra::{DMatrix, DVector};
use num_rational::Ratio;

use crate::belief::Prior;
use crate::error::{Error, Result};
use crate::graph::{DecayBound, Graph};
use crate::solver::check_lambda;

/// Largest `n` for the core-periphery expectations (binomial sums stay
/// inside `i128`).
pub const MAX_CP_VERTICES: usize = 120;

/// Core and periphery actions of a core-periphery graph. A side is `None`
/// when the graph has no vertex of that role.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpActions {
    pub core: Option<f64>,
    pub periphery: Option<f64>,
}

impl CpActions {
    /// Per-vertex actions on `Graph::core_periphery(n, core_mask)`.
    pub fn profile(&self, n: usize, n_co: usize) -> Vec<f64> {
        (0..n)
            .map(|i| {
                if i < n_co {
                    self.core.expect("core action")
                } else {
                    self.periphery.expect("periphery action")
                }
            })
            .collect()
    }
}

fn check_nonnegative(lambda: f64) -> Result<()> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::LambdaBound {
            lambda,
            bound: "lambda >= 0".into(),
        });
    }
    Ok(())
}

/// Complete-information actions on the core-periphery graph with `n_co`
/// core and `n_p` periphery vertices.
///
/// The only requirement is a positive denominator, which is exactly
/// `lambda * rho(g) < 1` for this graph; callers needing the uniform bound
/// check it themselves.
pub fn cp_complete_info(n_co: usize, n_p: usize, lambda: f64) -> Result<CpActions> {
    check_nonnegative(lambda)?;
    if n_co + n_p < 2 {
        return Err(Error::InvalidParameter(format!(
            "core-periphery graph needs at least 2 vertices, got {}",
            n_co + n_p
        )));
    }
    if n_co == 0 {
        return Ok(CpActions {
            core: None,
            periphery: Some(1.0),
        });
    }
    let (c, p) = (n_co as f64, n_p as f64);
    let denom = 1.0 - lambda * (c - 1.0) - lambda * lambda * p * c;
    if denom <= 0.0 {
        return Err(Error::LambdaBound {
            lambda,
            bound: format!("lambda * rho(g) < 1 for the core-periphery graph ({n_co} core, {n_p} periphery)"),
        });
    }
    let core = (1.0 + lambda * p) / denom;
    Ok(CpActions {
        core: Some(core),
        periphery: (n_p > 0).then_some(1.0 + lambda * c * core),
    })
}

/// Interim expectations of a core player under the uniform core-periphery
/// prior: `x = E[n_p]`, `y = E[n_p n_co]`, `z = E[n_co - 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpExpectations {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CpExpectationsExact {
    pub x: Ratio<i128>,
    pub y: Ratio<i128>,
    pub z: Ratio<i128>,
}

impl CpExpectationsExact {
    pub fn to_f64(&self) -> CpExpectations {
        let f = |r: Ratio<i128>| *r.numer() as f64 / *r.denom() as f64;
        CpExpectations {
            x: f(self.x),
            y: f(self.y),
            z: f(self.z),
        }
    }
}

/// `C(n, k)` in exact integer arithmetic.
pub fn binomial(n: usize, k: usize) -> i128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1i128, |acc, t| acc * (n - t) as i128 / (t + 1) as i128)
}

pub fn cp_expectations_exact(n: usize) -> Result<CpExpectationsExact> {
    if n <= 3 || n > MAX_CP_VERTICES {
        return Err(Error::InvalidParameter(format!(
            "core-periphery expectations need 3 < n <= {MAX_CP_VERTICES}, got {n}"
        )));
    }
    let m = n - 2;
    // number of core-periphery graphs in which a given vertex is core
    let delta = (1i128 << (n - 1)) - (n as i128 - 1);
    let sx: i128 = (1..=n - 2).map(|k| binomial(m, k - 1)).sum();
    let sy: i128 = (1..=n - 2).map(|k| k as i128 * binomial(m, k - 1)).sum();
    let sz: i128 = (2..=n).map(|k| binomial(m, k - 2)).sum::<i128>() - binomial(m, n - 3);
    let scale = |s: i128| Ratio::new((n as i128 - 1) * s, delta);
    Ok(CpExpectationsExact {
        x: scale(sx),
        y: scale(sy),
        z: scale(sz),
    })
}

pub fn cp_expectations(n: usize) -> Result<CpExpectations> {
    Ok(cp_expectations_exact(n)?.to_f64())
}

/// Equilibrium core and periphery actions under the uniform
/// core-periphery prior when the realised core has `n_co` members.
pub fn cp_bne(n: usize, lambda: f64, n_co: usize) -> Result<CpActions> {
    check_lambda(n, lambda)?;
    if n_co > n {
        return Err(Error::InvalidParameter(format!("core size {n_co} exceeds n = {n}")));
    }
    let e = cp_expectations(n)?;
    let denom = 1.0 - lambda * e.z - lambda * lambda * e.y;
    if denom <= 0.0 {
        return Err(Error::LambdaBound {
            lambda,
            bound: "a positive core-periphery equilibrium denominator".into(),
        });
    }
    let core = (1.0 + lambda * e.x) / denom;
    Ok(CpActions {
        core: (n_co > 0).then_some(core),
        periphery: (n_co < n).then_some(1.0 + lambda * n_co as f64 * core),
    })
}

/// Equilibrium action of a degree-`d` type under the uniform prior.
pub fn uniform_bne(n: usize, lambda: f64, d: usize) -> Result<f64> {
    check_lambda(n, lambda)?;
    if n as f64 * lambda >= 2.0 {
        return Err(Error::LambdaBound {
            lambda,
            bound: "n * lambda < 2".into(),
        });
    }
    check_degree(n, d)?;
    Ok(1.0 + lambda * d as f64 / (1.0 - n as f64 * lambda / 2.0))
}

fn check_degree(n: usize, d: usize) -> Result<()> {
    if d >= n {
        return Err(Error::InvalidParameter(format!("degree {d} exceeds n - 1 = {}", n - 1)));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErAction {
    pub action: f64,
    /// `p` is 0 or 1, so some conditioning events have prior probability 0.
    pub degenerate_prior: bool,
}

/// Equilibrium action of a degree-`d` type when links form independently
/// with probability `p`.
pub fn er_bne(n: usize, lambda: f64, p: f64, d: usize) -> Result<ErAction> {
    check_nonnegative(lambda)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("link probability {p}")));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n = {n}")));
    }
    check_degree(n, d)?;
    let denom = 1.0 - lambda * ((n as f64 - 2.0) * p + 1.0);
    if denom <= 0.0 {
        return Err(Error::LambdaBound {
            lambda,
            bound: "lambda [(n-2) p + 1] < 1".into(),
        });
    }
    Ok(ErAction {
        action: 1.0 + lambda * d as f64 / denom,
        degenerate_prior: p == 0.0 || p == 1.0,
    })
}

/// Stochastic block parameters: contiguous groups of the given sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct SbParams {
    pub sizes: Vec<usize>,
    pub p: Vec<f64>,
    pub eps: f64,
}

impl SbParams {
    pub fn new(sizes: Vec<usize>, p: Vec<f64>, eps: f64) -> Result<Self> {
        let params = SbParams { sizes, p, eps };
        params.prior().validate()?;
        Ok(params)
    }

    pub fn n(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn groups(&self) -> usize {
        self.sizes.len()
    }

    pub fn prior(&self) -> Prior {
        Prior::StochasticBlock {
            sizes: self.sizes.clone(),
            p: self.p.clone(),
            eps: self.eps,
        }
    }
}

/// `gamma[k][l]`: weight of a group-`l` neighbour for a group-`k` player.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaMatrix {
    pub m: usize,
    pub values: Vec<f64>,
}

impl GammaMatrix {
    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.values[k * self.m + l]
    }
}

/// Solves the `m^2` linear equations for the stochastic block weights.
///
/// For a player in group `k` with a neighbour in group `l`, the neighbour
/// expects `(n_k - 1) eps + 1` links into group `k` (one of them back to
/// the player), `(n_l - 1) p_l` inside `l` and `n_s eps` into every other
/// group `s`; for `k = l` the inside count is `(n_k - 2) p_k + 1`.
pub fn sb_gamma(params: &SbParams, lambda: f64) -> Result<GammaMatrix> {
    params.prior().validate()?;
    check_lambda(params.n(), lambda)?;
    let m = params.groups();
    let (sizes, p, eps) = (&params.sizes, &params.p, params.eps);
    let var = |k: usize, l: usize| k * m + l;
    let mut a = DMatrix::<f64>::identity(m * m, m * m);
    for k in 0..m {
        for l in 0..m {
            let row = var(k, l);
            let nk = sizes[k] as f64;
            let nl = sizes[l] as f64;
            if k == l {
                a[(row, var(k, k))] -= lambda * ((nk - 2.0) * p[k] + 1.0);
                for s in (0..m).filter(|&s| s != k) {
                    a[(row, var(k, s))] -= lambda * sizes[s] as f64 * eps;
                }
            } else {
                a[(row, var(l, k))] -= lambda * ((nk - 1.0) * eps + 1.0);
                a[(row, var(l, l))] -= lambda * (nl - 1.0) * p[l];
                for s in (0..m).filter(|&s| s != k && s != l) {
                    a[(row, var(l, s))] -= lambda * sizes[s] as f64 * eps;
                }
            }
        }
    }
    let sol = a
        .lu()
        .solve(&DVector::from_element(m * m, 1.0))
        .ok_or_else(|| {
            Error::Singular(format!(
                "stochastic block system for sizes {sizes:?}, p {p:?}, eps {eps}, lambda {lambda}"
            ))
        })?;
    Ok(GammaMatrix {
        m,
        values: sol.iter().copied().collect(),
    })
}

/// `1 + lambda sum_l gamma_kl d_l` for a group-`k` player with `d_l`
/// neighbours in group `l`.
pub fn sb_action(params: &SbParams, lambda: f64, k: usize, d: &[usize]) -> Result<f64> {
    let m = params.groups();
    if k >= m {
        return Err(Error::InvalidParameter(format!("group {k} out of range 0..{m}")));
    }
    if d.len() != m {
        return Err(Error::InvalidParameter(format!(
            "degree vector has {} entries, expected {m}",
            d.len()
        )));
    }
    for (l, &dl) in d.iter().enumerate() {
        let cap = if l == k { params.sizes[l] - 1 } else { params.sizes[l] };
        if dl > cap {
            return Err(Error::InvalidParameter(format!(
                "degree {dl} into group {l} exceeds {cap}"
            )));
        }
    }
    let gamma = sb_gamma(params, lambda)?;
    Ok(1.0 + lambda * d.iter().enumerate().map(|(l, &dl)| gamma.get(k, l) * dl as f64).sum::<f64>())
}

/// Welfare-maximising actions `b(g, 2 lambda)`.
pub fn efficient_actions(g: &Graph, lambda: f64) -> Result<Vec<f64>> {
    efficient_actions_with(g, lambda, DecayBound::Uniform)
}

pub fn efficient_actions_with(g: &Graph, lambda: f64, bound: DecayBound) -> Result<Vec<f64>> {
    g.katz_bonacich(2.0 * lambda, bound)
}

/// Which ordering of the core actions holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoreOrdering {
    /// complete < incomplete < efficient
    CompleteIncompleteEfficient,
    /// incomplete < complete < efficient
    IncompleteCompleteEfficient,
    /// any other arrangement, or the efficient action does not exist
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderingVerdict {
    pub complete: f64,
    pub incomplete: f64,
    /// `None` when `2 lambda rho(g) >= 1`.
    pub efficient: Option<f64>,
    pub ordering: CoreOrdering,
}

/// Evaluates the three core actions of a core-periphery graph.
pub fn ordering_check(n: usize, n_co: usize, lambda: f64) -> Result<OrderingVerdict> {
    if n_co == 0 || n_co > n {
        return Err(Error::InvalidParameter(format!("core size {n_co} for n = {n}")));
    }
    let incomplete = cp_bne(n, lambda, n_co)?.core.expect("nonempty core");
    let complete = cp_complete_info(n_co, n - n_co, lambda)?
        .core
        .expect("nonempty core");
    let efficient = cp_complete_info(n_co, n - n_co, 2.0 * lambda)
        .ok()
        .and_then(|a| a.core);
    let ordering = match efficient {
        Some(e) if complete < incomplete && incomplete < e => CoreOrdering::CompleteIncompleteEfficient,
        Some(e) if incomplete < complete && complete < e => CoreOrdering::IncompleteCompleteEfficient,
        _ => CoreOrdering::Other,
    };
    Ok(OrderingVerdict {
        complete,
        incomplete,
        efficient,
        ordering,
    })
}

/// The two ratios of the two-group model with equal within-group
/// probabilities, and whether their signs match the group-size pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockRatioVerdict {
    /// `gamma_11 / gamma_12`
    pub ratio1: f64,
    /// `gamma_22 / gamma_21`
    pub ratio2: f64,
    pub consistent: bool,
}

pub fn block_ratio_check(n1: usize, n2: usize, p: f64, eps: f64, lambda: f64) -> Result<BlockRatioVerdict> {
    let params = SbParams::new(vec![n1, n2], vec![p, p], eps)?;
    let g = sb_gamma(&params, lambda)?;
    let ratio1 = g.get(0, 0) / g.get(0, 1);
    let ratio2 = g.get(1, 1) / g.get(1, 0);
    let mut consistent = true;
    if n1 >= n2 + 2 {
        consistent &= ratio1 > 1.0;
    }
    if n2 >= n1 {
        consistent &= ratio1 < 1.0;
    }
    if n2 >= n1 + 2 {
        consistent &= ratio2 > 1.0;
    }
    if n1 >= n2 {
        consistent &= ratio2 < 1.0;
    }
    Ok(BlockRatioVerdict {
        ratio1,
        ratio2,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn complete_info_examples() {
        let empty = cp_complete_info(0, 5, 0.2).unwrap();
        assert_eq!(empty, CpActions { core: None, periphery: Some(1.0) });
        let star = cp_complete_info(1, 4, 0.2).unwrap();
        assert!(close(star.core.unwrap(), 1.8 / 0.84));
        assert!(close(star.periphery.unwrap(), 1.0 + 0.2 * 1.8 / 0.84));
        let kb = Graph::star(5, 0).unwrap().katz_bonacich(0.2, DecayBound::Spectral).unwrap();
        assert!(close(star.core.unwrap(), kb[0]));
        assert!(close(star.periphery.unwrap(), kb[1]));
        let k6 = cp_complete_info(6, 0, 0.1).unwrap();
        assert!(close(k6.core.unwrap(), 1.0 / 0.5));
        assert_eq!(k6.periphery, None);
        assert!(cp_complete_info(3, 5, 0.2).is_err());
    }

    #[test]
    fn expectations_at_five() {
        let e = cp_expectations_exact(5).unwrap();
        assert_eq!(e.x, Ratio::new(7, 3));
        assert_eq!(e.z, Ratio::new(5, 3));
        assert_eq!(e.y, Ratio::new(16, 3));
        assert_eq!(e.x + e.z, Ratio::from_integer(4));
        let s: i128 = (1..=3).map(|k| k as i128 * binomial(3, k - 1)).sum();
        assert_eq!(s, 5 * 4 - 5 + 1);
        assert!(cp_expectations(3).is_err());
    }

    #[test]
    fn claim_one_and_two() {
        for n in 4..=20 {
            let e = cp_expectations_exact(n).unwrap();
            assert_eq!(e.x + e.z, Ratio::from_integer(n as i128 - 1));
            if n >= 7 {
                for n_co in (1..n).filter(|&c| 2 * c < n) {
                    assert!(e.y - e.x * Ratio::from_integer(n_co as i128) > Ratio::from_integer(0));
                }
            }
        }
    }

    #[test]
    fn cp_bne_examples() {
        let a = cp_bne(5, 0.2, 2).unwrap();
        let core = (1.0 + 0.2 * 7.0 / 3.0) / (1.0 - 0.2 * 5.0 / 3.0 - 0.04 * 16.0 / 3.0);
        assert!(close(a.core.unwrap(), core));
        assert!((core - 3.235294117647058).abs() < 1e-12);
        assert_eq!(cp_bne(5, 0.0, 2).unwrap(), CpActions { core: Some(1.0), periphery: Some(1.0) });
        let p1 = cp_bne(5, 0.2, 1).unwrap().periphery.unwrap();
        assert!(close(a.periphery.unwrap() - p1, 0.2 * core));
        assert!(cp_bne(5, 0.25, 1).is_err());
    }

    #[test]
    fn uniform_and_er() {
        assert!(close(uniform_bne(3, 0.4, 2).unwrap(), 3.0));
        assert_eq!(uniform_bne(4, 0.2, 0).unwrap(), 1.0);
        for n in 3..=8 {
            let lambda = 0.4 / (n - 1) as f64;
            for d in 0..n {
                let u = uniform_bne(n, lambda, d).unwrap();
                let e = er_bne(n, lambda, 0.5, d).unwrap();
                assert!(close(u, e.action));
                assert!(!e.degenerate_prior);
            }
        }
        let e = er_bne(5, 0.1, 0.0, 3).unwrap();
        assert!(close(e.action, 1.0 + 0.1 * 3.0 / 0.9));
        assert!(e.degenerate_prior);
        assert_eq!(er_bne(5, 0.0, 0.3, 2).unwrap().action, 1.0);
        assert!(er_bne(5, 0.3, 1.0, 2).is_err());
    }

    #[test]
    fn sb_one_group_is_er() {
        let params = SbParams::new(vec![6], vec![0.3], 0.1).unwrap();
        let g = sb_gamma(&params, 0.1).unwrap();
        assert!(close(g.get(0, 0), 1.0 / (1.0 - 0.1 * (4.0 * 0.3 + 1.0))));
        let a = sb_action(&params, 0.1, 0, &[3]).unwrap();
        assert!(close(a, er_bne(6, 0.1, 0.3, 3).unwrap().action));
    }

    #[test]
    fn sb_equal_probabilities_collapse() {
        let params = SbParams::new(vec![3, 2, 2], vec![0.4; 3], 0.4).unwrap();
        let g = sb_gamma(&params, 0.1).unwrap();
        let er = 1.0 / (1.0 - 0.1 * (5.0 * 0.4 + 1.0));
        assert!(g.values.iter().all(|&v| (v - er).abs() < 1e-12));
    }

    #[test]
    fn sb_symmetric_ratio() {
        let (p, eps, lambda) = (0.7, 0.2, 0.05);
        let params = SbParams::new(vec![4, 4], vec![p, p], eps).unwrap();
        let g = sb_gamma(&params, lambda).unwrap();
        let expect = (1.0 - lambda * (1.0 - eps)) / (1.0 - lambda * (1.0 - p));
        assert!(close(g.get(0, 0) / g.get(0, 1), expect));
        assert!(close(g.get(1, 1) / g.get(1, 0), expect));
    }

    #[test]
    fn sb_action_caps() {
        let params = SbParams::new(vec![3, 2], vec![0.8, 0.8], 0.2).unwrap();
        assert_eq!(sb_action(&params, 0.1, 0, &[0, 0]).unwrap(), 1.0);
        assert!(sb_action(&params, 0.1, 0, &[3, 0]).is_err());
        assert!(sb_action(&params, 0.1, 1, &[3, 1]).is_ok());
        assert!(sb_action(&params, 0.1, 1, &[3, 2]).is_err());
    }

    #[test]
    fn efficient_examples() {
        let e = Graph::empty(4).unwrap();
        assert_eq!(efficient_actions(&e, 0.1).unwrap(), vec![1.0; 4]);
        let dyad = Graph::complete(2).unwrap();
        assert!(efficient_actions(&dyad, 0.2).unwrap().iter().all(|&v| close(v, 1.0 / 0.6)));
        let k4 = Graph::complete(4).unwrap();
        let eff = efficient_actions(&k4, 0.1).unwrap();
        let nash = k4.katz_bonacich(0.1, DecayBound::Uniform).unwrap();
        assert!(eff.iter().zip(&nash).all(|(e, c)| e > c));
    }

    #[test]
    fn ordering_examples_at_n8() {
        // 2 lambda (n - 1) = 1.4, so the efficient action only exists for
        // core-periphery graphs with 2 lambda rho(g) < 1
        let small = ordering_check(8, 3, 0.1).unwrap();
        assert!(small.complete < small.incomplete);
        let large = ordering_check(8, 6, 0.1).unwrap();
        assert!(large.incomplete < large.complete);
        assert_eq!(large.efficient, None);

        let lambda = 0.5 / 7.0;
        let v = ordering_check(8, 3, lambda).unwrap();
        assert_eq!(v.ordering, CoreOrdering::CompleteIncompleteEfficient);
        let v = ordering_check(8, 6, 0.25 / 7.0).unwrap();
        assert_eq!(v.ordering, CoreOrdering::IncompleteCompleteEfficient);
    }

    #[test]
    fn block_ratio_grid() {
        for n1 in 3..=7 {
            for n2 in 3..=7 {
                let lambda = 0.5 / (n1 + n2 - 1) as f64;
                let v = block_ratio_check(n1, n2, 0.7, 0.2, lambda).unwrap();
                assert!(v.consistent, "({n1}, {n2}): {v:?}");
            }
        }
    }
}
