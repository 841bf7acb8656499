//! Comma-separated and JSON renderings of harness results.

use std::fmt::Write as _;

use serde::Serialize;

use super::{CircuitRow, MarginalEntry, OutputFormat, RunReport, ValidationSummary};
use crate::error::{Error, Result};
use crate::lsw::SweepRow;

const EXACT_DIGITS: usize = 6;
const SAMPLED_DIGITS: usize = 4;

/// Formats `x` with `digits` significant digits in fixed notation.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Rounding can carry into a new leading digit (0.99999 -> 1.00000).
    let rounded: f64 = s.parse().unwrap_or(x);
    if decimals > 0 && rounded.abs().log10().floor() as i64 > magnitude {
        format!("{x:.prec$}", prec = decimals - 1)
    } else {
        s
    }
}

fn exact(x: f64) -> String {
    fmt_sig(x, EXACT_DIGITS)
}

fn sampled(x: f64) -> String {
    fmt_sig(x, SAMPLED_DIGITS)
}

fn pair(p: (u8, u8)) -> String {
    format!("{}{}", p.0, p.1)
}

fn object<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Error::Config(e.to_string()))
}

fn circuits_csv(rows: &[CircuitRow]) -> String {
    let mut s = String::from("pair,stage,outcome,q1_deg,h_deg,q2_deg,t_v,chi\n");
    for r in rows {
        writeln!(
            s,
            "{},{},{},{:.4},{:.4},{:.4},{:.4},{}",
            pair(r.pair),
            r.stage,
            r.outcome,
            r.q1_deg,
            r.h_deg,
            r.q2_deg,
            r.t_v,
            exact(r.chi)
        )
        .unwrap();
    }
    s
}

fn marginals_csv(entries: &[MarginalEntry]) -> String {
    let mut s = String::from("effect,state,route_a,value_a,route_b,value_b,theory\n");
    for e in entries {
        writeln!(
            s,
            "{},{},{},{},{},{},{}",
            e.effect,
            e.state,
            e.route_a,
            exact(e.value_a),
            e.route_b,
            exact(e.value_b),
            exact(e.theory)
        )
        .unwrap();
    }
    s
}

fn validation_csv(v: &ValidationSummary) -> String {
    format!(
        "effects_valid,completeness_max,marginal_max,rank1_max,cascade_max,channel_max\n{},{:.3e},{:.3e},{:.3e},{:.3e},{:.3e}\n",
        v.effects_valid, v.completeness_max, v.marginal_max, v.rank1_max, v.cascade_max, v.channel_max
    )
}

pub fn render_circuits(rows: &[CircuitRow], format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Table => Ok(circuits_csv(rows)),
        OutputFormat::Object => object(&rows),
    }
}

pub fn render_marginals(entries: &[MarginalEntry], format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Table => Ok(marginals_csv(entries)),
        OutputFormat::Object => object(&entries),
    }
}

pub fn render_validation(v: &ValidationSummary, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Table => Ok(validation_csv(v)),
        OutputFormat::Object => object(v),
    }
}

pub fn render_sweep(rows: &[SweepRow], format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Object => object(&rows),
        OutputFormat::Table => {
            let mut s = String::from("eta,alpha,a_norm,r3,bound,margin\n");
            for r in rows {
                writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    exact(r.eta),
                    exact(r.alpha),
                    exact(r.a_norm),
                    exact(r.r3),
                    exact(r.bound),
                    exact(r.margin)
                )
                .unwrap();
            }
            Ok(s)
        }
    }
}

pub fn render_report(rep: &RunReport, format: OutputFormat) -> Result<String> {
    if format == OutputFormat::Object {
        return object(rep);
    }
    let mut s = String::new();
    writeln!(s, "# run\neta,state,shots,seed\n{},{},{},{}", rep.eta, rep.state, rep.shots, rep.seed).unwrap();

    s.push_str("\n# validation\n");
    s.push_str(&validation_csv(&rep.validation));

    s.push_str("\n# circuits\n");
    s.push_str(&circuits_csv(&rep.circuits));

    s.push_str("\n# pair_rows\npair,outcome,detector,exact,sampled,stderr,counts\n");
    for r in &rep.pair_rows {
        writeln!(
            s,
            "{},{},{},{},{},{},{}",
            pair(r.pair),
            r.outcome,
            r.detector,
            exact(r.exact),
            sampled(r.sampled),
            sampled(r.stderr),
            r.counts
        )
        .unwrap();
    }

    s.push_str("\n# pairs\npair,anticorr_exact,anticorr_sampled,anticorr_stderr\n");
    for p in &rep.pairs {
        writeln!(
            s,
            "{},{},{},{}",
            pair(p.pair),
            exact(p.anticorr_exact),
            sampled(p.anticorr_sampled),
            sampled(p.anticorr_stderr)
        )
        .unwrap();
    }

    s.push_str("\n# marginals\n");
    s.push_str(&marginals_csv(&rep.marginals));

    let l = &rep.lsw;
    writeln!(
        s,
        "\n# lsw\neta,r3,lsw_bound,ks_bound,margin,violated\n{},{},{},{},{},{}",
        l.eta,
        exact(l.r3),
        exact(l.lsw_bound),
        exact(l.ks_bound),
        exact(l.margin),
        l.violated()
    )
    .unwrap();

    let n = &rep.necessary_condition;
    writeln!(
        s,
        "\n# necessary_condition\nlhs,rhs,satisfied\n{},{},{}",
        exact(n.lhs),
        exact(n.rhs),
        n.satisfied
    )
    .unwrap();

    writeln!(
        s,
        "\n# sampled\nsampled_r3,sampled_r3_stderr\n{},{}",
        sampled(rep.sampled_r3),
        sampled(rep.sampled_r3_stderr)
    )
    .unwrap();

    let sig = &rep.significance;
    writeln!(
        s,
        "\n# significance\nmeasured,sigma,bound,n_sigma\n{},{},{},{}",
        sampled(sig.measured),
        sampled(sig.sigma),
        exact(sig.bound),
        fmt_sig(sig.n_sigma, 3)
    )
    .unwrap();
    Ok(s)
}
