//! Noisy spin observables and their pairwise joint POVMs.
//!
//! A noisy observable along `n̂` with sharpness `η` has effects
//! `E± = ½𝟙 ± (η/2) σ⃗·n̂`. For two such observables the joint POVM is
//!
//! ```text
//! G++ = ½{ (α/2) 𝟙     + σ⃗·½[ η(n̂ᵢ+n̂ⱼ) − a⃗] }
//! G+- = ½{ (1 − α/2) 𝟙 + σ⃗·½[ η(n̂ᵢ−n̂ⱼ) + a⃗] }
//! G-+ = ½{ (1 − α/2) 𝟙 + σ⃗·½[ η(n̂ⱼ−n̂ᵢ) + a⃗] }
//! G-- = ½{ (α/2) 𝟙     + σ⃗·½[−η(n̂ᵢ+n̂ⱼ) − a⃗] }
//! ```
//!
//! with `α = 1 + η² n̂ᵢ·n̂ⱼ` and `a⃗ = (0, √(1 + η⁴(n̂ᵢ·n̂ⱼ)² − 2η²), 0)` for
//! axes in the z–x plane. Every element is then rank-1.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubit::{
    add3, bloch_compose, dot, eigen_hermitian, norm, scale, sub3, trace_re, BlochDecomp,
    Operator2, QubitState, Vec3, TAU_PSD,
};

/// Rank-1 certification threshold on `det G`.
pub const TAU_RANK: f64 = 1e-10;
/// Radicands within this distance of zero are treated as exactly zero.
pub const RADICAND_CLAMP: f64 = -1e-12;
/// Marginal residual below which the marginal condition passes.
pub const MARGINAL_TOL: f64 = 1e-12;

const AXIS_TOL: f64 = 1e-9;
const PLANE_TOL: f64 = 1e-12;

/// Outcome pair `(Xᵢ, Xⱼ)` of a joint POVM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    #[serde(rename = "++")]
    PlusPlus,
    #[serde(rename = "+-")]
    PlusMinus,
    #[serde(rename = "-+")]
    MinusPlus,
    #[serde(rename = "--")]
    MinusMinus,
}

impl Outcome {
    /// Canonical element order used for every four-element array in the crate.
    pub const ALL: [Outcome; 4] = [
        Outcome::PlusPlus,
        Outcome::PlusMinus,
        Outcome::MinusPlus,
        Outcome::MinusMinus,
    ];

    pub fn index(self) -> usize {
        match self {
            Outcome::PlusPlus => 0,
            Outcome::PlusMinus => 1,
            Outcome::MinusPlus => 2,
            Outcome::MinusMinus => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Outcome::PlusPlus => "++",
            Outcome::PlusMinus => "+-",
            Outcome::MinusPlus => "-+",
            Outcome::MinusMinus => "--",
        }
    }

    /// Signs `(Xᵢ, Xⱼ)` as ±1.
    pub fn signs(self) -> (i8, i8) {
        match self {
            Outcome::PlusPlus => (1, 1),
            Outcome::PlusMinus => (1, -1),
            Outcome::MinusPlus => (-1, 1),
            Outcome::MinusMinus => (-1, -1),
        }
    }

    pub fn is_anticorrelated(self) -> bool {
        let (a, b) = self.signs();
        a != b
    }

    /// The outcome with the roles of the two observables exchanged.
    pub fn swapped(self) -> Outcome {
        match self {
            Outcome::PlusMinus => Outcome::MinusPlus,
            Outcome::MinusPlus => Outcome::PlusMinus,
            o => o,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Unsharp binary measurement `{E₊, E₋}` along an axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisyObservable {
    pub eta: f64,
    pub axis: Vec3,
    pub plus: Operator2,
    pub minus: Operator2,
}

impl NoisyObservable {
    pub fn effect(&self, sign: i8) -> &Operator2 {
        if sign >= 0 {
            &self.plus
        } else {
            &self.minus
        }
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eta) {
        Ok(())
    } else {
        Err(Error::EtaOutOfRange(eta))
    }
}

fn check_axis(axis: Vec3) -> Result<()> {
    let n = norm(axis);
    if (n - 1.0).abs() <= AXIS_TOL {
        Ok(())
    } else {
        Err(Error::NonUnitAxis { norm: n })
    }
}

pub fn noisy_observable(eta: f64, axis: Vec3) -> Result<NoisyObservable> {
    check_eta(eta)?;
    check_axis(axis)?;
    let plus = bloch_compose(&BlochDecomp { c0: 0.5, c: scale(eta / 2.0, axis) });
    // E₋ is formed as the complement so that E₊ + E₋ = 𝟙 holds bit-exactly.
    let minus = Operator2::identity() - plus;
    Ok(NoisyObservable { eta, axis, plus, minus })
}

/// The three coplanar trine axes in the z–x plane.
pub fn trine_axes() -> [Vec3; 3] {
    let s = 3f64.sqrt() / 2.0;
    [[0.0, 0.0, 1.0], [s, 0.0, -0.5], [-s, 0.0, -0.5]]
}

/// Upper edge of the trine compatibility window, `√3 − 1`.
pub fn trine_eta_max() -> f64 {
    3f64.sqrt() - 1.0
}

/// Scalar and vector parameters `(α, a⃗)` of a joint POVM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointParams {
    pub alpha: f64,
    pub a: Vec3,
}

impl JointParams {
    pub fn a_norm(&self) -> f64 {
        norm(self.a)
    }
}

/// `1 + η⁴(n̂ᵢ·n̂ⱼ)² − 2η²`
pub fn radicand(eta: f64, ni: Vec3, nj: Vec3) -> f64 {
    let d = dot(ni, nj);
    let e2 = eta * eta;
    1.0 + e2 * e2 * d * d - 2.0 * e2
}

/// Parameter choice that makes every joint element rank-1.
pub fn joint_params(eta: f64, ni: Vec3, nj: Vec3) -> Result<JointParams> {
    check_eta(eta)?;
    check_axis(ni)?;
    check_axis(nj)?;
    for axis in [ni, nj] {
        if axis[1].abs() > PLANE_TOL {
            return Err(Error::AxisOutOfPlane { y: axis[1] });
        }
    }
    let rad = radicand(eta, ni, nj);
    if rad < RADICAND_CLAMP {
        return Err(Error::NegativeRadicand { eta, radicand: rad });
    }
    Ok(JointParams {
        alpha: 1.0 + eta * eta * dot(ni, nj),
        a: [0.0, if rad.abs() <= -RADICAND_CLAMP { 0.0 } else { rad.sqrt() }, 0.0],
    })
}

/// Four-outcome joint measurement for a pair of noisy observables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointPovm {
    pub eta: f64,
    pub ni: Vec3,
    pub nj: Vec3,
    pub params: JointParams,
    /// One-based observable labels `(i, j)`, `(0, 0)` when unlabeled.
    pub pair: (u8, u8),
    /// Elements in [`Outcome::ALL`] order.
    pub elements: [Operator2; 4],
}

impl JointPovm {
    /// General joint-POVM form with caller-supplied `(α, a⃗)`. Elements are
    /// validated as effects.
    pub fn from_params(eta: f64, ni: Vec3, nj: Vec3, params: JointParams) -> Result<Self> {
        check_eta(eta)?;
        check_axis(ni)?;
        check_axis(nj)?;
        let JointParams { alpha, a } = params;
        let sum = scale(eta, add3(ni, nj));
        let diff = scale(eta, sub3(ni, nj));
        let build = |c0: f64, v: Vec3| {
            bloch_compose(&BlochDecomp { c0: c0 / 2.0, c: scale(0.25, v) })
        };
        let elements = [
            build(alpha / 2.0, sub3(sum, a)),
            build(1.0 - alpha / 2.0, add3(diff, a)),
            build(1.0 - alpha / 2.0, add3(scale(-1.0, diff), a)),
            build(alpha / 2.0, sub3(scale(-1.0, sum), a)),
        ];
        for (g, o) in elements.iter().zip(Outcome::ALL) {
            let e = eigen_hermitian(g)?;
            if e.values[1] < -TAU_PSD || e.values[0] > 1.0 + TAU_PSD {
                return Err(Error::EffectInvalid {
                    label: format!("G{o}"),
                    min: e.values[1],
                    max: e.values[0],
                });
            }
        }
        Ok(JointPovm { eta, ni, nj, params, pair: (0, 0), elements })
    }

    pub fn with_pair(mut self, i: u8, j: u8) -> Self {
        self.pair = (i, j);
        self
    }

    pub fn element(&self, o: Outcome) -> &Operator2 {
        &self.elements[o.index()]
    }

    pub fn total(&self) -> Operator2 {
        self.elements.iter().copied().sum()
    }

    pub fn completeness_residual(&self) -> f64 {
        self.total().max_abs_diff(&Operator2::identity())
    }

    /// `Σ_{Xⱼ} G_{s,Xⱼ}` for `which = 0`, `Σ_{Xᵢ} G_{Xᵢ,s}` for `which = 1`.
    pub fn marginal(&self, which: usize, sign: i8) -> Operator2 {
        Outcome::ALL
            .iter()
            .filter(|o| {
                let (a, b) = o.signs();
                if which == 0 {
                    a == sign
                } else {
                    b == sign
                }
            })
            .map(|&o| *self.element(o))
            .sum()
    }

    /// Largest `|det G|` over the four elements; zero for exactly rank-1 elements.
    pub fn max_rank_residual(&self) -> f64 {
        self.elements
            .iter()
            .map(|g| g.det().norm())
            .fold(0.0, f64::max)
    }

    pub fn is_rank1(&self) -> bool {
        self.max_rank_residual() <= TAU_RANK
    }

    pub fn probabilities(&self, rho: &QubitState) -> [f64; 4] {
        self.elements.map(|g| trace_re(&g, rho))
    }

    /// The same measurement with the two observables exchanged.
    pub fn swapped(&self) -> JointPovm {
        let mut elements = self.elements;
        elements.swap(1, 2);
        JointPovm {
            ni: self.nj,
            nj: self.ni,
            pair: (self.pair.1, self.pair.0),
            elements,
            ..*self
        }
    }
}

pub fn joint_povm(eta: f64, ni: Vec3, nj: Vec3) -> Result<JointPovm> {
    let params = joint_params(eta, ni, nj)?;
    JointPovm::from_params(eta, ni, nj, params)
}

/// Pair labels in the order `(12), (23), (13)`.
pub const TRINE_PAIRS: [(u8, u8); 3] = [(1, 2), (2, 3), (1, 3)];

/// The three pairwise joint POVMs over the given axes, labeled `(12), (23), (13)`.
pub fn joint_povms(eta: f64, axes: &[Vec3; 3]) -> Result<[JointPovm; 3]> {
    let mut out = Vec::with_capacity(3);
    for (i, j) in TRINE_PAIRS {
        let g = joint_povm(eta, axes[i as usize - 1], axes[j as usize - 1])?;
        out.push(g.with_pair(i, j));
    }
    Ok([out[0], out[1], out[2]])
}

pub fn trine_joint_povms(eta: f64) -> Result<[JointPovm; 3]> {
    joint_povms(eta, &trine_axes())
}

/// Residuals `‖ΣG − E‖_max` for `E₊ⁱ, E₋ⁱ, E₊ʲ, E₋ʲ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginalReport {
    pub residuals: [f64; 4],
    pub pass: bool,
}

impl MarginalReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

pub fn check_marginals(g: &JointPovm) -> Result<MarginalReport> {
    let oi = noisy_observable(g.eta, g.ni)?;
    let oj = noisy_observable(g.eta, g.nj)?;
    let residuals = [
        g.marginal(0, 1).max_abs_diff(&oi.plus),
        g.marginal(0, -1).max_abs_diff(&oi.minus),
        g.marginal(1, 1).max_abs_diff(&oj.plus),
        g.marginal(1, -1).max_abs_diff(&oj.minus),
    ];
    Ok(MarginalReport {
        residuals,
        pass: residuals.iter().all(|&r| r <= MARGINAL_TOL),
    })
}

pub(crate) fn common_eta(gs: &[JointPovm]) -> Result<f64> {
    let eta = gs[0].eta;
    if gs.iter().all(|g| (g.eta - eta).abs() <= 1e-15) {
        Ok(eta)
    } else {
        Err(Error::EtaMismatch(gs.iter().map(|g| g.eta).collect()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NecessaryCondition {
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

/// `Tr[Σ (α𝟙 − σ⃗·a⃗) ρ] < 2η`, required for any state-dependent violation.
pub fn necessary_condition(gs: &[JointPovm; 3], rho: &QubitState) -> Result<NecessaryCondition> {
    let eta = common_eta(gs)?;
    let op: Operator2 = gs
        .iter()
        .map(|g| Operator2::identity().scaled_re(g.params.alpha) - Operator2::sigma_dot(g.params.a))
        .sum();
    let lhs = trace_re(&op, rho);
    let rhs = 2.0 * eta;
    Ok(NecessaryCondition { lhs, rhs, satisfied: lhs < rhs })
}
