//! Browser bindings: each export takes plain numbers and returns a JSON
//! string, so the page needs no glue beyond `JSON.parse`.

use netgame::belief::{Beliefs, Prior};
use netgame::closed_form::{er_bne, uniform_bne};
use netgame::solver::{solve_direct, BlockSystem};
use netgame::welfare::{default_core_range, full_core_range, welfare_sweep};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest `n` the in-browser full solve accepts.
pub const MAX_DEMO_SOLVE: usize = 6;

#[derive(Debug, Serialize)]
pub struct SweepPoint {
    pub n_co: usize,
    pub incomplete: f64,
    pub complete: f64,
    pub efficient: f64,
}

#[derive(Debug, Serialize)]
pub struct ActionCurve {
    pub degree: usize,
    pub lambda: Vec<f64>,
    pub action: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct TypeAction {
    pub player: usize,
    pub bits: String,
    pub degree: usize,
    pub on_support: bool,
    pub action: f64,
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

/// Welfare of the three action profiles across core sizes.
pub fn welfare_curves_json(n: usize, lambda: f64, full_range: bool) -> Result<String, String> {
    let cores = if full_range { full_core_range(n) } else { default_core_range(n) };
    let rows = welfare_sweep(n, lambda, &cores).map_err(|e| e.to_string())?;
    let points: Vec<SweepPoint> = rows
        .into_iter()
        .map(|r| SweepPoint {
            n_co: r.n_co,
            incomplete: r.welfare.w_incomplete,
            complete: r.welfare.w_complete,
            efficient: r.welfare.w_efficient,
        })
        .collect();
    to_json(&points)
}

/// Equilibrium action per degree as the decay grows from 0 to just
/// under its admissible bound. `p = 0.5` gives the uniform prior.
pub fn action_curves_json(n: usize, p: f64, samples: usize) -> Result<String, String> {
    if !(2..=1000).contains(&n) {
        return Err(format!("n = {n} outside 2..=1000"));
    }
    if samples < 2 {
        return Err("need at least two samples".into());
    }
    let bound = 1.0 / (n - 1) as f64;
    let er_bound = 1.0 / ((n as f64 - 2.0) * p + 1.0);
    let top = 0.98 * bound.min(er_bound);
    let lambdas: Vec<f64> = (0..samples).map(|k| top * k as f64 / (samples - 1) as f64).collect();
    let curves = (0..n)
        .map(|d| {
            let action = lambdas
                .iter()
                .map(|&l| {
                    if p == 0.5 {
                        uniform_bne(n, l, d)
                    } else {
                        er_bne(n, l, p, d).map(|a| a.action)
                    }
                })
                .collect::<netgame::Result<Vec<f64>>>()
                .map_err(|e| e.to_string())?;
            Ok(ActionCurve {
                degree: d,
                lambda: lambdas.clone(),
                action,
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    to_json(&curves)
}

/// Full type-space solve under a small prior: `uniform` or `cp_uniform`.
pub fn solve_json(kind: &str, n: usize, lambda: f64) -> Result<String, String> {
    if n > MAX_DEMO_SOLVE {
        return Err(format!("the browser solve is limited to n <= {MAX_DEMO_SOLVE}"));
    }
    let prior = match kind {
        "uniform" => Prior::Uniform(n),
        "cp_uniform" => Prior::CorePeripheryUniform(n),
        other => return Err(format!("unknown prior `{other}`")),
    };
    let run = || -> netgame::Result<Vec<TypeAction>> {
        let beliefs = Beliefs::new(&prior)?;
        let profile = solve_direct(&BlockSystem::dense(&beliefs, lambda)?)?;
        Ok(profile
            .iter()
            .map(|(t, on, a)| TypeAction {
                player: t.player,
                bits: t.bits(n),
                degree: t.degree(),
                on_support: on,
                action: a,
            })
            .collect())
    };
    to_json(&run().map_err(|e| e.to_string())?)
}

#[wasm_bindgen]
pub fn welfare_curves(n: usize, lambda: f64, full_range: bool) -> Result<String, JsError> {
    welfare_curves_json(n, lambda, full_range).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn action_curves(n: usize, p: f64, samples: usize) -> Result<String, JsError> {
    action_curves_json(n, p, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn solve(kind: &str, n: usize, lambda: f64) -> Result<String, JsError> {
    solve_json(kind, n, lambda).map_err(|e| JsError::new(&e))
}
