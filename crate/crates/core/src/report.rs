//! CSV output with fixed headers and `%.12g` number formatting.

use std::io::{self, Write};

use crate::belief::{Beliefs, TypeId};
use crate::solver::ActionProfile;
use crate::welfare::SweepRow;

/// Formats like C's `%.12g`: 12 significant digits, trailing zeros
/// dropped, scientific notation outside `1e-4 <= |x| < 1e12`.
pub fn fmt_g(x: f64) -> String {
    const PREC: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (PREC - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..PREC).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (PREC - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub const EQUILIBRIUM_HEADER: &str = "player,type_code,type_bits,degree,on_support,action";
pub const CLOSED_FORM_HEADER: &str = "family,n,lambda,params,group_or_role,degree_or_d_vector,action";
pub const SWEEP_HEADER: &str = "n,lambda,n_co,w_incomplete,w_complete,w_efficient";
pub const POSTERIOR_HEADER: &str =
    "observer_player,observer_code,observer_bits,target_player,target_code,target_bits,probability";
pub const WALKS_HEADER: &str = "player,type_code,type_bits,degree,on_support,s,beta";
pub const COMPARE_HEADER: &str = "label,player,type_code,degree,reference,candidate,abs_diff";

/// One row per type, by player then code.
pub fn write_equilibrium<W: Write>(w: &mut W, profile: &ActionProfile) -> io::Result<()> {
    writeln!(w, "{EQUILIBRIUM_HEADER}")?;
    let n = profile.n();
    for (t, on, a) in profile.iter() {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            t.player,
            t.code,
            t.bits(n),
            t.degree(),
            on,
            fmt_g(a)
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormRow {
    pub family: &'static str,
    pub n: usize,
    pub lambda: f64,
    pub params: String,
    pub group_or_role: String,
    pub degree: String,
    pub action: f64,
}

pub fn write_closed_form<W: Write>(w: &mut W, rows: &[ClosedFormRow]) -> io::Result<()> {
    writeln!(w, "{CLOSED_FORM_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.family,
            r.n,
            fmt_g(r.lambda),
            r.params,
            r.group_or_role,
            r.degree,
            fmt_g(r.action)
        )?;
    }
    Ok(())
}

pub fn write_sweep<W: Write>(w: &mut W, n: usize, lambda: f64, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            n,
            fmt_g(lambda),
            r.n_co,
            fmt_g(r.welfare.w_incomplete),
            fmt_g(r.welfare.w_complete),
            fmt_g(r.welfare.w_efficient)
        )?;
    }
    Ok(())
}

/// Positive posteriors of every listed observer, optionally restricted to
/// one target player.
pub fn write_posteriors<W: Write>(
    w: &mut W,
    beliefs: &Beliefs,
    observers: &[TypeId],
    target: Option<usize>,
) -> crate::Result<()> {
    let n = beliefs.n();
    writeln!(w, "{POSTERIOR_HEADER}")?;
    for &obs in observers {
        for (t, p) in beliefs.posterior_row(obs)? {
            if target.is_some_and(|j| j != t.player) {
                continue;
            }
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                obs.player,
                obs.code,
                obs.bits(n),
                t.player,
                t.code,
                t.bits(n),
                fmt_g(p)
            )?;
        }
    }
    Ok(())
}

/// Long format: one row per type and walk length.
pub fn write_walks<W: Write>(
    w: &mut W,
    n: usize,
    on_support: &[bool],
    betas: &[Vec<f64>],
) -> io::Result<()> {
    writeln!(w, "{WALKS_HEADER}")?;
    let gamma = crate::belief::gamma(n);
    for (r, &on) in on_support.iter().enumerate() {
        let t = TypeId::new(r / gamma, (r % gamma) as u32);
        for (s, beta) in betas.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                t.player,
                t.code,
                t.bits(n),
                t.degree(),
                on,
                s,
                fmt_g(beta[r])
            )?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub label: String,
    pub player: usize,
    pub type_code: u32,
    pub degree: usize,
    pub reference: f64,
    pub candidate: f64,
}

/// Rows followed by one `# max_abs_diff` line per label.
pub fn write_compare<W: Write>(w: &mut W, rows: &[CompareRow]) -> io::Result<()> {
    writeln!(w, "{COMPARE_HEADER}")?;
    let mut labels: Vec<(&str, f64)> = Vec::new();
    for r in rows {
        let diff = (r.reference - r.candidate).abs();
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.label,
            r.player,
            r.type_code,
            r.degree,
            fmt_g(r.reference),
            fmt_g(r.candidate),
            fmt_g(diff)
        )?;
        match labels.iter_mut().find(|(l, _)| *l == r.label) {
            Some((_, m)) => *m = m.max(diff),
            None => labels.push((&r.label, diff)),
        }
    }
    for (label, m) in labels {
        writeln!(w, "# max_abs_diff,{label},{}", fmt_g(m))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_format_matches_c() {
        let cases = [
            (1.0, "1"),
            (0.5, "0.5"),
            (1.0 / 3.0, "0.333333333333"),
            (3.235294117647058, "3.23529411765"),
            (2.5, "2.5"),
            (100.0, "100"),
            (1e-5, "1e-05"),
            (0.0001, "0.0001"),
            (123456789012.0, "123456789012"),
            (1234567890123.0, "1.23456789012e+12"),
            (-4.0 / 3.0, "-1.33333333333"),
            (0.0, "0"),
            (6.5e-17, "6.5e-17"),
            (9.9999999999999e-5, "0.0001"),
        ];
        for (x, s) in cases {
            assert_eq!(fmt_g(x), s, "{x}");
        }
    }

    #[test]
    fn equilibrium_layout() {
        let p = ActionProfile::new(2, vec![1.0, 1.5, 1.0, 1.5], vec![true; 4]);
        let mut out = Vec::new();
        write_equilibrium(&mut out, &p).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], EQUILIBRIUM_HEADER);
        assert_eq!(lines[2], "0,1,01,1,true,1.5");
        assert_eq!(lines[3], "1,0,00,0,true,1");
    }

    #[test]
    fn compare_summary() {
        let row = |label: &str, c: f64| CompareRow {
            label: label.into(),
            player: 0,
            type_code: 0,
            degree: 0,
            reference: 1.0,
            candidate: c,
        };
        let mut out = Vec::new();
        write_compare(&mut out, &[row("a", 1.5), row("a", 1.25), row("b", 1.0)]).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("# max_abs_diff,a,0.5\n"));
        assert!(text.ends_with("# max_abs_diff,b,0\n"));
    }
}
