//! Sequential realization of a rank-1 four-outcome POVM.
//!
//! Three stages each apply a unitary `Uₜ` followed by a two-outcome partial
//! projector `{P⁰ₜ = |0⟩⟨0| + (1−χₜ)|1⟩⟨1|, P¹ₜ = χₜ|1⟩⟨1|}`. A click on `P¹ₜ`
//! realizes one target element; `P⁰ₜ` passes the qubit on to the next stage.
//! Whatever survives all three stages is the fourth element.
//!
//! With `Cₜ` the product of the earlier pass operators `Bₛ = √P⁰ₛ·Uₛ`, the
//! click effect at stage `t` is `Cₜ†Uₜ†P¹ₜUₜCₜ`. Choosing `Uₜ` to rotate
//! `uₜ ∝ (Cₜ†)⁻¹|ξₜ⟩` onto `|1⟩` and `χₜ = λₜ‖(Cₜ†)⁻¹|ξₜ⟩‖²` makes that
//! effect exactly `λₜ|ξₜ⟩⟨ξₜ|`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::povm::{JointPovm, Outcome, TAU_RANK};
use crate::qubit::{eigen_hermitian, trace_re, Ket, Operator2, QubitState, C64, TAU_PSD};

/// Tolerance on `χ > 1` before an ordering is declared infeasible.
pub const CHI_TOL: f64 = 1e-9;
/// Largest admissible entry of `Cₜ⁻¹`.
pub const MAX_INVERSE_NORM: f64 = 1e8;
/// Reconstruction tolerance for compiled cascades.
pub const RECONSTRUCTION_TOL: f64 = 1e-10;

/// Stage order: `+-`, `-+`, `++`, with `--` as the pass-through remainder.
pub const STAGE_ORDER: [Outcome; 3] = [Outcome::PlusMinus, Outcome::MinusPlus, Outcome::PlusPlus];

/// An effect written as `λ|ξ⟩⟨ξ|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rank1Effect {
    pub lambda: f64,
    pub xi: Ket,
}

impl Rank1Effect {
    pub fn operator(&self) -> Operator2 {
        self.xi.projector().scaled_re(self.lambda)
    }
}

pub fn rank1_decompose(e: &Operator2) -> Result<Rank1Effect> {
    let eig = eigen_hermitian(e)?;
    let [large, small] = eig.values;
    if small < -TAU_PSD || large > 1.0 + TAU_PSD {
        return Err(Error::EffectInvalid {
            label: "rank-1 source".into(),
            min: small,
            max: large,
        });
    }
    if small > TAU_RANK {
        return Err(Error::NotRank1 { smaller: small });
    }
    if large <= TAU_RANK {
        return Err(Error::ZeroEffect);
    }
    Ok(Rank1Effect { lambda: large, xi: eig.vectors[0] })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeStage {
    pub unitary: Operator2,
    pub chi: f64,
    pub outcome: Outcome,
}

impl CascadeStage {
    /// `√P⁰·U`
    pub fn pass_kraus(&self) -> Operator2 {
        Operator2::real_diag(1.0, (1.0 - self.chi).max(0.0).sqrt()) * self.unitary
    }

    /// `√P¹·U`
    pub fn click_kraus(&self) -> Operator2 {
        Operator2::real_diag(0.0, self.chi.sqrt()) * self.unitary
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cascade {
    pub stages: [CascadeStage; 3],
    pub remainder: Outcome,
}

impl Cascade {
    /// Effects realized by the cascade, in [`Outcome::ALL`] order.
    pub fn effects(&self) -> [Operator2; 4] {
        let mut out = [Operator2::zero(); 4];
        let mut before = Operator2::identity();
        for stage in &self.stages {
            out[stage.outcome.index()] = Operator2::real_diag(0.0, stage.chi)
                .conjugate_by(&(stage.unitary * before));
            before = stage.pass_kraus() * before;
        }
        out[self.remainder.index()] = before.adjoint() * before;
        out
    }

    /// Outcome probabilities in [`Outcome::ALL`] order.
    pub fn outcome_probabilities(&self, rho: &QubitState) -> [f64; 4] {
        self.effects().map(|e| trace_re(&e, rho))
    }

    /// Largest elementwise deviation between the realized effects and `g`.
    pub fn reconstruction_error(&self, g: &JointPovm) -> f64 {
        self.effects()
            .iter()
            .zip(g.elements.iter())
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    pub fn chis(&self) -> [f64; 3] {
        self.stages.map(|s| s.chi)
    }
}

/// Fixes the global phase of `u` so the first non-negligible entry of the
/// first row is real and non-negative.
fn canonical_unitary(u: Operator2) -> Operator2 {
    let row = [u.entry(0, 0), u.entry(0, 1)];
    match row.iter().find(|z| z.norm() > 1e-14) {
        Some(z) => u.scaled(C64::from_polar(1.0, -z.arg())),
        None => u,
    }
}

/// `U = |0⟩⟨u⊥| + |1⟩⟨u|`, so `U|u⟩ = |1⟩` and `U|u⊥⟩ = |0⟩`.
fn rotation_onto_one(u: &Ket) -> Operator2 {
    let perp = u.perp();
    canonical_unitary(Ket::zero().outer(&perp) + Ket::one().outer(u))
}

/// Compiles `g` with the standard stage order.
pub fn compile_cascade(g: &JointPovm) -> Result<Cascade> {
    compile_cascade_with_order(g, STAGE_ORDER)
}

/// Compiles `g`, realizing `order[0..3]` as stage clicks and the remaining
/// outcome as pass-through.
pub fn compile_cascade_with_order(g: &JointPovm, order: [Outcome; 3]) -> Result<Cascade> {
    let remainder = Outcome::ALL
        .into_iter()
        .find(|o| !order.contains(o))
        .ok_or_else(|| Error::Config("stage order must name three distinct outcomes".into()))?;
    if order[0] == order[1] || order[1] == order[2] || order[0] == order[2] {
        return Err(Error::Config("stage order must name three distinct outcomes".into()));
    }

    let mut before = Operator2::identity();
    let mut stages = Vec::with_capacity(3);
    for (t, &outcome) in order.iter().enumerate() {
        let target = rank1_decompose(g.element(outcome))?;
        let inv = before.inverse().ok_or(Error::IllConditioned {
            stage: t + 1,
            norm: f64::INFINITY,
        })?;
        let inv_norm = inv.max_abs();
        if inv_norm > MAX_INVERSE_NORM {
            return Err(Error::IllConditioned { stage: t + 1, norm: inv_norm });
        }
        let w = inv.adjoint().apply(&target.xi);
        let mut chi = target.lambda * w.norm_sqr();
        if chi > 1.0 + CHI_TOL {
            return Err(Error::ChiOutOfRange { stage: t + 1, chi });
        }
        chi = chi.min(1.0);
        let stage = CascadeStage {
            unitary: rotation_onto_one(&w.normalized()),
            chi,
            outcome,
        };
        before = stage.pass_kraus() * before;
        stages.push(stage);
    }
    Ok(Cascade {
        stages: [stages[0], stages[1], stages[2]],
        remainder,
    })
}
