//! Polarization-optics realization of a compiled cascade.
//!
//! Each stage is a QWP-HWP-QWP sandwich realizing `Uₜ` followed by a
//! partially polarizing beam splitter that transmits `|H⟩` fully and `|V⟩`
//! with intensity `t_v = 1 − χₜ`. The reflected port of every stage and the
//! transmitted port of the last one are the four detectors.
//!
//! Jones convention: a plate with fast axis at `θ` from horizontal is
//! `R(θ)·diag(1, e^{iδ})·R(−θ)`, `δ = π/2` (QWP) or `π` (HWP), with
//! `|H⟩ = (1, 0)` and `|V⟩ = (0, 1)`.

mod sampling;
mod waveplate;

pub use sampling::{monte_carlo, monte_carlo_sharded, CountRecord};
pub use waveplate::{hwp, qwp, retarder, solve_sandwich, WavePlateTriple, SANDWICH_TOL};

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cascade::Cascade;
use crate::error::Result;
use crate::povm::Outcome;
use crate::qubit::{trace_re, Operator2, QubitState};

/// Partially polarizing beam splitter with `T_H = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PpbsSpec {
    pub t_h: f64,
    pub t_v: f64,
}

impl PpbsSpec {
    pub fn new(t_v: f64) -> Self {
        PpbsSpec { t_h: 1.0, t_v: t_v.clamp(0.0, 1.0) }
    }

    pub fn transmit(&self) -> Operator2 {
        Operator2::real_diag(self.t_h.sqrt(), self.t_v.sqrt())
    }

    pub fn reflect(&self) -> Operator2 {
        Operator2::real_diag((1.0 - self.t_h).sqrt(), (1.0 - self.t_v).sqrt())
    }
}

/// Output port of the circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Detector {
    /// Reflected port of stage 1, 2 or 3.
    Reflected(u8),
    /// Transmitted port of the last stage.
    Transmitted,
}

impl Detector {
    /// Detector order used by [`circuit_probabilities`] and [`CountRecord`].
    pub const ORDER: [Detector; 4] = [
        Detector::Reflected(1),
        Detector::Reflected(2),
        Detector::Reflected(3),
        Detector::Transmitted,
    ];

    pub fn label(&self) -> String {
        match self {
            Detector::Reflected(k) => format!("reflected{k}"),
            Detector::Transmitted => "transmitted3".to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalStage {
    pub plates: WavePlateTriple,
    pub ppbs: PpbsSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalCircuit {
    pub stages: [OpticalStage; 3],
    /// Joint-POVM outcome registered by each detector in [`Detector::ORDER`].
    pub detector_map: [Outcome; 4],
}

impl OpticalCircuit {
    /// Outcome probabilities reordered into [`Outcome::ALL`] order.
    pub fn outcome_probabilities(&self, rho: &QubitState) -> [f64; 4] {
        let by_detector = circuit_probabilities(self, rho);
        let mut out = [0.0; 4];
        for (p, o) in by_detector.iter().zip(self.detector_map) {
            out[o.index()] = *p;
        }
        out
    }

    /// Stage settings as comma-separated text: angles in degrees and `t_v`,
    /// four decimals each.
    pub fn to_text(&self) -> String {
        let mut s = String::from("stage,outcome,q1_deg,h_deg,q2_deg,t_v\n");
        for (t, stage) in self.stages.iter().enumerate() {
            let p = &stage.plates;
            writeln!(
                s,
                "{},{},{:.4},{:.4},{:.4},{:.4}",
                t + 1,
                self.detector_map[t],
                p.q1_deg,
                p.h_deg,
                p.q2_deg,
                stage.ppbs.t_v
            )
            .unwrap();
        }
        s
    }
}

pub fn build_circuit(c: &Cascade) -> Result<OpticalCircuit> {
    let mut stages = Vec::with_capacity(3);
    for s in &c.stages {
        stages.push(OpticalStage {
            plates: solve_sandwich(&s.unitary)?,
            ppbs: PpbsSpec::new(1.0 - s.chi),
        });
    }
    Ok(OpticalCircuit {
        stages: [stages[0], stages[1], stages[2]],
        detector_map: [
            c.stages[0].outcome,
            c.stages[1].outcome,
            c.stages[2].outcome,
            c.remainder,
        ],
    })
}

/// Exact detector probabilities in [`Detector::ORDER`], by propagating the
/// (unnormalized) density operator through every element.
pub fn circuit_probabilities(circ: &OpticalCircuit, rho: &QubitState) -> [f64; 4] {
    let mut out = [0.0; 4];
    let mut state = *rho.density();
    for (t, stage) in circ.stages.iter().enumerate() {
        let u = stage.plates.matrix();
        let rotated = u * state * u.adjoint();
        let r = stage.ppbs.reflect();
        out[t] = (r * rotated * r.adjoint()).trace().re;
        let k = stage.ppbs.transmit();
        state = k * rotated * k.adjoint();
    }
    out[3] = state.trace().re;
    out
}

/// Largest gap between circuit and POVM probabilities on `rho`.
pub fn channel_deviation(circ: &OpticalCircuit, elements: &[Operator2; 4], rho: &QubitState) -> f64 {
    let got = circ.outcome_probabilities(rho);
    elements
        .iter()
        .zip(got)
        .map(|(g, p)| (trace_re(g, rho) - p).abs())
        .fold(0.0, f64::max)
}
