use std::io::Write;

use anyhow::{anyhow, bail, Context, Result};
use netgame::belief::{group_of, row_to_type, Beliefs, Prior, TypeId};
use netgame::closed_form::{cp_bne, er_bne, sb_action, uniform_bne, SbParams};
use netgame::config::load_prior;
use netgame::graph::{enumerate_graphs, DecayBound, GraphClass};
use netgame::report::{
    fmt_g, write_closed_form, write_compare, write_equilibrium, write_posteriors, write_sweep,
    write_walks, ClosedFormRow, CompareRow,
};
use netgame::solver::{
    beta_coefficients, solve_direct, solve_fixed_point, solve_reduced, ActionProfile, BlockSystem,
};
use netgame::welfare::{default_core_range, full_core_range, welfare_sweep};

use crate::{Command, RunConfig};

pub fn dispatch(cfg: &RunConfig, w: &mut Vec<u8>) -> Result<()> {
    match cfg.command {
        Command::Solve => solve(cfg, w),
        Command::ClosedForm => closed_form(cfg, w),
        Command::SweepWelfare => sweep(cfg, w),
        Command::Posterior => posterior(cfg, w),
        Command::Walks => walks(cfg, w),
        Command::Compare => compare(cfg, w),
        Command::Enumerate => enumerate(cfg, w),
    }
}

fn prior(cfg: &RunConfig) -> Result<Prior> {
    Ok(load_prior(&cfg.kv)?)
}

fn full_solve(cfg: &RunConfig, beliefs: &Beliefs) -> Result<ActionProfile> {
    let lambda = cfg.lambda();
    let method = cfg.kv.get("solve.method").unwrap_or("auto");
    let profile = match method {
        "auto" => {
            let sys = BlockSystem::auto(beliefs, lambda)?;
            if sys.is_dense() {
                solve_direct(&sys)?
            } else {
                solve_fixed_point(&sys, cfg.tol)?.profile
            }
        }
        "iterate" => solve_fixed_point(&BlockSystem::auto(beliefs, lambda)?, cfg.tol)?.profile,
        "direct" => solve_direct(&BlockSystem::dense(beliefs, lambda)?)?,
        "reduced" => solve_reduced(beliefs, lambda)?,
        other => bail!("unknown solve.method `{other}` (expected auto, iterate, direct or reduced)"),
    };
    Ok(profile)
}

fn solve(cfg: &RunConfig, w: &mut Vec<u8>) -> Result<()> {
    let beliefs = Beliefs::new(&prior(cfg)?)?;
    let profile = full_solve(cfg, &beliefs)?;
    write_equilibrium(w, &profile)?;
    Ok(())
}

/// Closed-form family named by `family`, or implied by `prior.kind`.
fn family(cfg: &RunConfig) -> Result<&str> {
    if let Some(f) = cfg.kv.get("family") {
        return Ok(f);
    }
    match cfg.kv.get("prior.kind") {
        Some("uniform") => Ok("uniform"),
        Some("cp_uniform") => Ok("cp"),
        Some("stochastic_block") => Ok("sb"),
        Some("independent") => Ok("er"),
        _ => bail!("missing config key `family` (uniform, er, cp or sb)"),
    }
}

fn sb_params(cfg: &RunConfig) -> Result<SbParams> {
    match prior(cfg)? {
        Prior::StochasticBlock { sizes, p, eps } => Ok(SbParams::new(sizes, p, eps)?),
        _ => bail!("family sb needs prior.kind = stochastic_block"),
    }
}

fn sb_label(p: &SbParams) -> String {
    let join = |v: Vec<String>| v.join(";");
    format!(
        "sizes={}|p={}|eps={}",
        join(p.sizes.iter().map(|s| s.to_string()).collect()),
        join(p.p.iter().map(|&x| fmt_g(x)).collect()),
        fmt_g(p.eps)
    )
}

/// Every neighbour-count vector available to a member of group `k`.
fn degree_vectors(sizes: &[usize], k: usize) -> Vec<Vec<usize>> {
    let caps: Vec<usize> = sizes
        .iter()
        .enumerate()
        .map(|(l, &s)| if l == k { s - 1 } else { s })
        .collect();
    let mut out = vec![vec![]];
    for &cap in &caps {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..=cap).map(move |d| {
                    let mut v = v.clone();
                    v.push(d);
                    v
                })
            })
            .collect();
    }
    out
}

fn closed_form(cfg: &RunConfig, w: &mut Vec<u8>) -> Result<()> {
    let (n, lambda) = (cfg.n, cfg.lambda());
    let row = |family, params: String, role: String, degree: String, action| ClosedFormRow {
        family,
        n,
        lambda,
        params,
        group_or_role: role,
        degree,
        action,
    };
    let mut rows = Vec::new();
    match family(cfg)? {
        "uniform" => {
            for d in 0..n {
                rows.push(row("uniform", "-".into(), "all".into(), d.to_string(), uniform_bne(n, lambda, d)?));
            }
        }
        "er" => {
            let p: f64 = cfg.kv.require_value("er.p").context("family er")?;
            for d in 0..n {
                let a = er_bne(n, lambda, p, d)?;
                let params = if a.degenerate_prior {
                    format!("p={}|degenerate", fmt_g(p))
                } else {
                    format!("p={}", fmt_g(p))
                };
                rows.push(row("er", params, "all".into(), d.to_string(), a.action));
            }
        }
        "cp" => {
            let core = cp_bne(n, lambda, n)?.core.expect("non-empty core");
            rows.push(row("cp", "-".into(), "core".into(), (n - 1).to_string(), core));
            for d in 1..n.saturating_sub(1) {
                let a = cp_bne(n, lambda, d)?.periphery.expect("periphery exists");
                rows.push(row("cp", "-".into(), "periphery".into(), d.to_string(), a));
            }
        }
        "sb" => {
            let params = sb_params(cfg)?;
            let label = sb_label(&params);
            for k in 0..params.groups() {
                for d in degree_vectors(&params.sizes, k) {
                    let a = sb_action(&params, lambda, k, &d)?;
                    let dv = d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
                    rows.push(row("sb", label.clone(), format!("group={k}"), dv, a));
                }
            }
        }
        other => bail!("unknown family `{other}` (expected uniform, er, cp or sb)"),
    }
    write_closed_form(w, &rows)?;
    Ok(())
}

fn sweep(cfg: &RunConfig, w: &mut Vec<u8>) -> Result<()> {
    let (n, lambda) = (cfg.n, cfg.lambda());
    let cores = match cfg.kv.list::<usize>("sweep.cores")? {
        Some(c) => c,
        None if cfg.kv.parse_value::<bool>("sweep.full")?.unwrap_or(false) => full_core_range(n),
        None => default_core_range(n),
    };
    let rows = welfare_sweep(n, lambda, &cores)?;
    write_sweep(w, n, lambda, &rows)?;
    Ok(())
}

/// `<player>:<row bits>`, the bits listing links to players `0..n` in order
/// with a `0` in the player's own slot.
fn parse_type(n: usize, s: &str) -> Result<TypeId> {
    let (p, bits) = s
        .trim()
        .split_once(':')
        .ok_or_else(|| anyhow!("type `{s}` should look like <player>:<bits>"))?;
    let player: usize = p.trim().parse().with_context(|| format!("player in `{s}`"))?;
    if player >= n {
        bail!("player {player} out of range for n = {n}");
    }
    let bits = bits.trim();
    if bits.len() != n || !bits.bytes().all(|b| b == b'0' || b == b'1') {
        bail!("type `{s}` needs exactly {n} bits of 0/1");
    }
    let row = bits
        .bytes()
        .enumerate()
        .filter(|&(_, b)| b == b'1')
        .fold(0u16, |r, (j, _)| r | 1 << j);
    if row >> player & 1 == 1 {
        bail!("type `{s}` links player {player} to itself");
    }
    Ok(TypeId::new(player, row_to_type(player, row)))
}

fn posterior(cfg: &RunConfig, w: &mut Vec<u8>) -> Result<()> {
    let beliefs = Beliefs::new(&prior(cfg)?)?;
    let n = cfg.n;
    let observers: Vec<TypeId> = match cfg.kv.get("observer") {
        None | Some("all") => (0..n * beliefs.gamma())
            .map(|r| beliefs.type_at(r))
            .filter(|&t| beliefs.on_support(t))
            .collect(),
        Some(list) => list.split(',').map(|s| parse_type(n, s)).collect::<Result<_>>()?,
    };
    let target: Option<usize> = cfg.kv.parse_value("target")?;
    if let Some(t) = target {
        if t >= n {
            bail!("target player {t} out of range for n = {n}");
        }
    }
    write_posteriors(w, &beliefs, &observers, target)?;
    Ok(())
}

fn walks(cfg: &RunConfig, w: &mut Vec<u8>) -> Result<()> {
    let beliefs = Beliefs::new(&prior(cfg)?)?;
    let sys = BlockSystem::auto(&beliefs, cfg.lambda())?;
    let betas = beta_coefficients(&sys, cfg.max_order);
    write_walks(w, cfg.n, sys.on_support(), &betas)?;
    Ok(())
}

fn compare(cfg: &RunConfig, w: &mut Vec<u8>) -> Result<()> {
    let prior = prior(cfg)?;
    let beliefs = Beliefs::new(&prior)?;
    let (n, lambda) = (cfg.n, cfg.lambda());
    let full = full_solve(cfg, &beliefs)?;
    let mut rows = Vec::new();
    let mut push = |label: &str, t: TypeId, reference: f64, candidate: f64| {
        rows.push(CompareRow {
            label: label.into(),
            player: t.player,
            type_code: t.code,
            degree: t.degree(),
            reference,
            candidate,
        })
    };
    let on_support = || full.iter().filter(|&(_, on, _)| on);
    match &prior {
        Prior::Uniform(_) => {
            for (t, _, a) in on_support() {
                push("uniform", t, uniform_bne(n, lambda, t.degree())?, a);
            }
        }
        Prior::CorePeripheryUniform(_) => {
            for (t, _, a) in on_support() {
                let d = t.degree();
                let cp = cp_bne(n, lambda, d)?;
                let reference = if d == n - 1 { cp.core } else { cp.periphery };
                push("cp", t, reference.expect("role exists"), a);
            }
        }
        Prior::StochasticBlock { sizes, p, eps } => {
            let params = SbParams::new(sizes.clone(), p.clone(), *eps)?;
            let group = group_of(sizes);
            for (t, _, a) in on_support() {
                let mut d = vec![0; params.groups()];
                for j in (0..n).filter(|&j| t.links_to(j)) {
                    d[group[j]] += 1;
                }
                push("sb", t, sb_action(&params, lambda, group[t.player], &d)?, a);
            }
        }
        Prior::IndependentLinks { pi, .. } => {
            let p = pi[1];
            let constant = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .all(|(i, j)| pi[i * n + j] == p);
            if !constant {
                bail!("compare needs a constant link probability for independent priors");
            }
            for (t, _, a) in on_support() {
                push("er", t, er_bne(n, lambda, p, t.degree())?.action, a);
            }
        }
        Prior::PointMass(g) => {
            let kb = g.katz_bonacich(lambda, DecayBound::Spectral)?;
            for (i, &k) in kb.iter().enumerate() {
                let t = TypeId::of(g, i);
                push("complete_info", t, k, full.action(t));
            }
        }
        Prior::DenseTable { .. } => {
            let reduced = solve_reduced(&beliefs, lambda)?;
            for (t, _, a) in on_support() {
                push("reduced", t, reduced.action(t), a);
            }
        }
    }
    write_compare(w, &rows)?;
    Ok(())
}

fn enumerate(cfg: &RunConfig, w: &mut Vec<u8>) -> Result<()> {
    let n = cfg.n;
    let class = match cfg.kv.get("enumerate.class").unwrap_or("all") {
        "all" => GraphClass::AllGraphs(n),
        "cp" => GraphClass::CorePeriphery(n),
        other => bail!("unknown enumerate.class `{other}` (expected all or cp)"),
    };
    writeln!(w, "code,edge_count,degrees")?;
    for g in enumerate_graphs(&class)? {
        let degrees = g.degrees().iter().map(|d| d.to_string()).collect::<Vec<_>>().join(";");
        writeln!(w, "{},{},{}", g.code(), g.edge_count(), degrees)?;
    }
    Ok(())
}
