//! Average anticorrelation `R₃` against the generalized-noncontextual bound
//! `1 − η/3` and the Kochen–Specker bound `2/3`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::povm::{common_eta, joint_params, trine_axes, trine_eta_max, trine_joint_povms, JointPovm};
use crate::qubit::{trace_re, NamedState, QubitState};

/// Bound obeyed by outcome-deterministic noncontextual models.
pub const KS_BOUND: f64 = 2.0 / 3.0;

/// Default number of rows in an η sweep.
pub const DEFAULT_SWEEP_STEPS: usize = 256;

/// Offset used to evaluate the `η → 2/3⁺` optimal-violation limit.
pub const LIMIT_OFFSET: f64 = 1e-9;

/// Bound obeyed by generalized (stochastic, outcome-indeterministic)
/// noncontextual models of sharpness-`η` observables.
pub fn lsw_bound(eta: f64) -> f64 {
    1.0 - eta / 3.0
}

/// `Pr(Xᵢ ≠ Xⱼ) = Tr[(G+- + G-+) ρ]`
pub fn anticorr_probability(g: &JointPovm, rho: &QubitState) -> f64 {
    trace_re(&(g.elements[1] + g.elements[2]), rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairAnticorrelation {
    pub pair: (u8, u8),
    pub probability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LswReport {
    pub eta: f64,
    pub pairs: [PairAnticorrelation; 3],
    pub r3: f64,
    pub lsw_bound: f64,
    pub ks_bound: f64,
    pub margin: f64,
}

impl LswReport {
    pub fn violated(&self) -> bool {
        self.margin > 0.0
    }
}

pub fn r3(gs: &[JointPovm; 3], rho: &QubitState) -> Result<LswReport> {
    let eta = common_eta(gs)?;
    let pairs = gs.map(|g| PairAnticorrelation {
        pair: g.pair,
        probability: anticorr_probability(&g, rho),
    });
    let r3 = pairs.iter().map(|p| p.probability).sum::<f64>() / 3.0;
    let bound = lsw_bound(eta);
    Ok(LswReport {
        eta,
        pairs,
        r3,
        lsw_bound: bound,
        ks_bound: KS_BOUND,
        margin: r3 - bound,
    })
}

/// `(|0⟩ + i|1⟩)/√2`, Bloch vector `ŷ`.
pub fn optimal_state() -> QubitState {
    NamedState::Phi0.state()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eta: f64,
    pub alpha: f64,
    pub a_norm: f64,
    pub r3: f64,
    pub bound: f64,
    pub margin: f64,
}

/// Trine configuration on the optimal state at a single η.
pub fn trine_row(eta: f64) -> Result<SweepRow> {
    let gs = trine_joint_povms(eta)?;
    let rep = r3(&gs, &optimal_state())?;
    let n = trine_axes();
    let p = joint_params(eta, n[0], n[1])?;
    Ok(SweepRow {
        eta,
        alpha: p.alpha,
        a_norm: p.a_norm(),
        r3: rep.r3,
        bound: rep.lsw_bound,
        margin: rep.margin,
    })
}

/// Evenly spaced grid of `steps` points from `eta_min` to `eta_max` inclusive.
pub fn sweep_eta(eta_min: f64, eta_max: f64, steps: usize) -> Result<Vec<SweepRow>> {
    let edge = trine_eta_max();
    if !(eta_min >= 0.0 && eta_min < eta_max && eta_max <= edge + 1e-12) {
        return Err(Error::InvalidSweep(format!(
            "need 0 <= eta_min < eta_max <= sqrt(3)-1, got [{eta_min}, {eta_max}]"
        )));
    }
    if steps < 2 {
        return Err(Error::InvalidSweep(format!("need at least 2 steps, got {steps}")));
    }
    let eta_max = eta_max.min(edge);
    let h = (eta_max - eta_min) / (steps - 1) as f64;
    (0..steps)
        .into_par_iter()
        .map(|k| {
            let eta = if k + 1 == steps { eta_max } else { eta_min + h * k as f64 };
            trine_row(eta)
        })
        .collect()
}

/// Default sweep over the violation window `(2/3, √3 − 1]`.
pub fn default_sweep() -> Result<Vec<SweepRow>> {
    sweep_eta(2.0 / 3.0 + LIMIT_OFFSET, trine_eta_max(), DEFAULT_SWEEP_STEPS)
}

/// First sign change of the margin along a sweep, refined by bisection.
pub fn violation_edge(rows: &[SweepRow]) -> Result<Option<f64>> {
    let Some(w) = rows.windows(2).find(|w| (w[0].margin > 0.0) != (w[1].margin > 0.0)) else {
        return Ok(None);
    };
    let (mut lo, mut hi) = (w[0].eta, w[1].eta);
    let lo_positive = w[0].margin > 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if (trine_row(mid)?.margin > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignificanceReport {
    pub measured: f64,
    pub sigma: f64,
    pub bound: f64,
    pub n_sigma: f64,
}

/// Plain z-score of a measurement above a bound.
pub fn significance(measured: f64, sigma: f64, bound: f64) -> Result<SignificanceReport> {
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::NonPositiveSigma(sigma));
    }
    Ok(SignificanceReport {
        measured,
        sigma,
        bound,
        n_sigma: (measured - bound) / sigma,
    })
}
