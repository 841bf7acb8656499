//! Closed-form 2×2 complex linear algebra for a single qubit.
//!
//! Every operator in the crate is an [`Operator2`]. Hermitian operators are
//! handled through their Pauli expansion `M = c0·𝟙 + σ⃗·c⃗`, which gives the
//! eigensystem without any iteration: the eigenvalues are `c0 ± |c⃗|` and the
//! eigenvectors are the Bloch-sphere kets along `±ĉ`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Vec3 = [f64; 3];

/// Tolerance for the Hermitian predicate.
pub const TAU_HERM: f64 = 1e-10;
/// Tolerance for the unitary predicate.
pub const TAU_UNIT: f64 = 1e-10;
/// Tolerance for positivity and purity checks.
pub const TAU_PSD: f64 = 1e-9;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

pub(crate) fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn scale(s: f64, a: Vec3) -> Vec3 {
    [s * a[0], s * a[1], s * a[2]]
}

pub(crate) fn add3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub(crate) fn sub3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// A (not necessarily normalized) column vector in ℂ².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ket(pub [C64; 2]);

impl Ket {
    pub fn new(a0: C64, a1: C64) -> Self {
        Ket([a0, a1])
    }

    pub fn zero() -> Self {
        Ket([ONE, ZERO])
    }

    pub fn one() -> Self {
        Ket([ZERO, ONE])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0[0].norm_sqr() + self.0[1].norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scaled(&self, s: C64) -> Ket {
        Ket([self.0[0] * s, self.0[1] * s])
    }

    pub fn normalized(&self) -> Ket {
        self.scaled(C64::from(1.0 / self.norm()))
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &Ket) -> C64 {
        self.0[0].conj() * other.0[0] + self.0[1].conj() * other.0[1]
    }

    /// The orthogonal ket `(−ā₁, ā₀)`.
    pub fn perp(&self) -> Ket {
        Ket([-self.0[1].conj(), self.0[0].conj()])
    }

    /// Rotates the global phase so the first non-negligible amplitude is
    /// real and non-negative.
    pub fn canonical_phase(&self) -> Ket {
        let scale = self.norm().max(f64::MIN_POSITIVE);
        for a in self.0 {
            if a.norm() > 1e-14 * scale {
                return self.scaled(C64::from_polar(1.0, -a.arg()));
            }
        }
        *self
    }

    /// `|self⟩⟨other|`
    pub fn outer(&self, other: &Ket) -> Operator2 {
        let mut m = [[ZERO; 2]; 2];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, e) in row.iter_mut().enumerate() {
                *e = self.0[r] * other.0[c].conj();
            }
        }
        Operator2(m)
    }

    pub fn projector(&self) -> Operator2 {
        self.outer(self)
    }

    /// Bloch vector of the normalized ket.
    pub fn bloch(&self) -> Vec3 {
        let k = self.normalized();
        let z = k.0[0].conj() * k.0[1];
        [2.0 * z.re, 2.0 * z.im, k.0[0].norm_sqr() - k.0[1].norm_sqr()]
    }

    /// Unit ket with Bloch vector along `dir` (which need not be normalized),
    /// in canonical phase.
    pub fn from_bloch(dir: Vec3) -> Ket {
        let n = norm(dir);
        let [x, y, z] = scale(1.0 / n, dir);
        let k = if z >= 0.0 {
            Ket([C64::from(1.0 + z), C64::new(x, y)])
        } else {
            Ket([C64::new(x, -y), C64::from(1.0 - z)])
        };
        k.normalized().canonical_phase()
    }
}

/// A 2×2 complex matrix, stored row-major.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Operator2(pub [[C64; 2]; 2]);

impl fmt::Debug for Operator2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.0;
        write!(
            f,
            "[[{:.6}, {:.6}], [{:.6}, {:.6}]]",
            m[0][0], m[0][1], m[1][0], m[1][1]
        )
    }
}

impl Operator2 {
    pub fn new(m00: C64, m01: C64, m10: C64, m11: C64) -> Self {
        Operator2([[m00, m01], [m10, m11]])
    }

    pub fn zero() -> Self {
        Operator2([[ZERO; 2]; 2])
    }

    pub fn identity() -> Self {
        Self::diag(ONE, ONE)
    }

    pub fn diag(d0: C64, d1: C64) -> Self {
        Operator2([[d0, ZERO], [ZERO, d1]])
    }

    pub fn real_diag(d0: f64, d1: f64) -> Self {
        Self::diag(C64::from(d0), C64::from(d1))
    }

    pub fn pauli_x() -> Self {
        Self::new(ZERO, ONE, ONE, ZERO)
    }

    pub fn pauli_y() -> Self {
        Self::new(ZERO, -I, I, ZERO)
    }

    pub fn pauli_z() -> Self {
        Self::real_diag(1.0, -1.0)
    }

    pub fn paulis() -> [Operator2; 3] {
        [Self::pauli_x(), Self::pauli_y(), Self::pauli_z()]
    }

    /// `σ⃗·v`
    pub fn sigma_dot(v: Vec3) -> Self {
        Self::new(
            C64::from(v[2]),
            C64::new(v[0], -v[1]),
            C64::new(v[0], v[1]),
            C64::from(-v[2]),
        )
    }

    pub fn entry(&self, r: usize, c: usize) -> C64 {
        self.0[r][c]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Self::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn scaled(&self, s: C64) -> Self {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|e| *e *= s);
        out
    }

    pub fn scaled_re(&self, s: f64) -> Self {
        self.scaled(C64::from(s))
    }

    /// Matrix inverse, or `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d.norm() == 0.0 || !d.is_finite() {
            return None;
        }
        let m = &self.0;
        Some(Self::new(m[1][1], -m[0][1], -m[1][0], m[0][0]).scaled(d.inv()))
    }

    pub fn apply(&self, k: &Ket) -> Ket {
        let m = &self.0;
        Ket([
            m[0][0] * k.0[0] + m[0][1] * k.0[1],
            m[1][0] * k.0[0] + m[1][1] * k.0[1],
        ])
    }

    /// `A† · self · A`
    pub fn conjugate_by(&self, a: &Operator2) -> Operator2 {
        a.adjoint() * *self * *a
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|e| e.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Operator2) -> f64 {
        (*self - *other).max_abs()
    }

    /// Entrywise distance after removing the best global phase between the two.
    pub fn phase_distance(&self, other: &Operator2) -> f64 {
        let overlap = (self.adjoint() * *other).trace();
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            ONE
        };
        self.scaled(phase).max_abs_diff(other)
    }

    pub fn hermiticity_residual(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_residual() <= TAU_HERM
    }

    pub fn unitarity_residual(&self) -> f64 {
        (self.adjoint() * *self).max_abs_diff(&Operator2::identity())
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_residual() <= TAU_UNIT
    }

    /// `0 ≤ M ≤ 𝟙` up to [`TAU_PSD`].
    pub fn is_effect(&self) -> bool {
        match eigen_hermitian(self) {
            Ok(e) => e.values[1] >= -TAU_PSD && e.values[0] <= 1.0 + TAU_PSD,
            Err(_) => false,
        }
    }

    pub(crate) fn require_hermitian(&self) -> Result<()> {
        let residual = self.hermiticity_residual();
        if residual <= TAU_HERM {
            Ok(())
        } else {
            Err(Error::NotHermitian { residual })
        }
    }

    pub(crate) fn require_unitary(&self) -> Result<()> {
        let residual = self.unitarity_residual();
        if residual <= TAU_UNIT {
            Ok(())
        } else {
            Err(Error::NotUnitary { residual })
        }
    }
}

impl Add for Operator2 {
    type Output = Operator2;
    fn add(self, rhs: Operator2) -> Operator2 {
        let mut out = self;
        for r in 0..2 {
            for c in 0..2 {
                out.0[r][c] += rhs.0[r][c];
            }
        }
        out
    }
}

impl Sub for Operator2 {
    type Output = Operator2;
    fn sub(self, rhs: Operator2) -> Operator2 {
        self + (-rhs)
    }
}

impl Neg for Operator2 {
    type Output = Operator2;
    fn neg(self) -> Operator2 {
        self.scaled_re(-1.0)
    }
}

impl Mul for Operator2 {
    type Output = Operator2;
    fn mul(self, rhs: Operator2) -> Operator2 {
        let (a, b) = (&self.0, &rhs.0);
        let mut m = [[ZERO; 2]; 2];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, e) in row.iter_mut().enumerate() {
                *e = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Operator2(m)
    }
}

impl std::iter::Sum for Operator2 {
    fn sum<It: Iterator<Item = Operator2>>(iter: It) -> Operator2 {
        iter.fold(Operator2::zero(), |acc, x| acc + x)
    }
}

/// Pauli expansion `M = c0·𝟙 + σ⃗·c⃗` of a Hermitian operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochDecomp {
    pub c0: f64,
    pub c: Vec3,
}

impl BlochDecomp {
    pub fn eigenvalues(&self) -> (f64, f64) {
        let r = norm(self.c);
        (self.c0 + r, self.c0 - r)
    }
}

pub fn bloch_decompose(m: &Operator2) -> Result<BlochDecomp> {
    m.require_hermitian()?;
    let half_trace = |op: Operator2| (op * *m).trace().re / 2.0;
    let [sx, sy, sz] = Operator2::paulis();
    Ok(BlochDecomp {
        c0: m.trace().re / 2.0,
        c: [half_trace(sx), half_trace(sy), half_trace(sz)],
    })
}

pub fn bloch_compose(d: &BlochDecomp) -> Operator2 {
    Operator2::identity().scaled_re(d.c0) + Operator2::sigma_dot(d.c)
}

/// Eigensystem of a Hermitian operator, largest eigenvalue first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigensystem {
    pub values: [f64; 2],
    pub vectors: [Ket; 2],
}

/// Closed-form eigendecomposition of a Hermitian 2×2 operator.
///
/// Eigenvectors carry canonical phase (first non-zero amplitude real and
/// non-negative). A degenerate spectrum returns the computational basis.
pub fn eigen_hermitian(m: &Operator2) -> Result<Eigensystem> {
    let d = bloch_decompose(m)?;
    let r = norm(d.c);
    let scale = d.c0.abs().max(1.0);
    if r <= f64::EPSILON * scale {
        return Ok(Eigensystem {
            values: [d.c0, d.c0],
            vectors: [Ket::zero(), Ket::one()],
        });
    }
    Ok(Eigensystem {
        values: [d.c0 + r, d.c0 - r],
        vectors: [Ket::from_bloch(d.c), Ket::from_bloch(scale3_neg(d.c))],
    })
}

fn scale3_neg(v: Vec3) -> Vec3 {
    scale(-1.0, v)
}

/// A valid single-qubit density operator, optionally remembering the pure
/// amplitudes it was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitState {
    rho: Operator2,
    amplitudes: Option<Ket>,
}

impl QubitState {
    pub fn from_ket(k: Ket) -> Result<Self> {
        let n = k.norm();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::InvalidState("zero or non-finite amplitudes".into()));
        }
        let k = k.normalized();
        Ok(QubitState {
            rho: k.projector(),
            amplitudes: Some(k),
        })
    }

    pub fn from_amplitudes(a0: C64, a1: C64) -> Result<Self> {
        Self::from_ket(Ket::new(a0, a1))
    }

    pub fn from_bloch(r: Vec3) -> Result<Self> {
        let len = norm(r);
        if !len.is_finite() || len > 1.0 + TAU_PSD {
            return Err(Error::InvalidState(format!("Bloch vector length {len} exceeds 1")));
        }
        let rho = bloch_compose(&BlochDecomp { c0: 0.5, c: scale(0.5, r) });
        Ok(QubitState { rho, amplitudes: None })
    }

    pub fn from_density(rho: Operator2) -> Result<Self> {
        rho.require_hermitian()
            .map_err(|e| Error::InvalidState(e.to_string()))?;
        let tr = rho.trace().re;
        if (tr - 1.0).abs() > TAU_PSD {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let eig = eigen_hermitian(&rho)?;
        if eig.values[1] < -TAU_PSD {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {}",
                eig.values[1]
            )));
        }
        Ok(QubitState { rho, amplitudes: None })
    }

    pub fn maximally_mixed() -> Self {
        QubitState {
            rho: Operator2::identity().scaled_re(0.5),
            amplitudes: None,
        }
    }

    pub fn density(&self) -> &Operator2 {
        &self.rho
    }

    pub fn amplitudes(&self) -> Option<Ket> {
        self.amplitudes
    }

    pub fn bloch(&self) -> Vec3 {
        let [sx, sy, sz] = Operator2::paulis();
        [
            (sx * self.rho).trace().re,
            (sy * self.rho).trace().re,
            (sz * self.rho).trace().re,
        ]
    }

    pub fn is_pure(&self) -> bool {
        (norm(self.bloch()) - 1.0).abs() <= TAU_PSD
    }
}

/// Named polarization states, with |H⟩ = |0⟩ and |V⟩ = |1⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NamedState {
    /// (|H⟩ + i|V⟩)/√2, the state that maximizes the trine violation.
    Phi0,
    H,
    V,
    /// (|H⟩ + |V⟩)/√2
    D,
    /// (|H⟩ + i|V⟩)/√2
    R,
}

impl NamedState {
    pub const PROBES: [NamedState; 4] = [NamedState::H, NamedState::V, NamedState::R, NamedState::D];

    pub fn ket(self) -> Ket {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            NamedState::H => Ket::zero(),
            NamedState::V => Ket::one(),
            NamedState::D => Ket::new(C64::from(h), C64::from(h)),
            NamedState::Phi0 | NamedState::R => Ket::new(C64::from(h), C64::new(0.0, h)),
        }
    }

    pub fn state(self) -> QubitState {
        let k = self.ket();
        QubitState {
            rho: k.projector(),
            amplitudes: Some(k),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NamedState::Phi0 => "phi0",
            NamedState::H => "H",
            NamedState::V => "V",
            NamedState::D => "D",
            NamedState::R => "R",
        }
    }
}

impl std::str::FromStr for NamedState {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phi0" | "Phi0" => Ok(NamedState::Phi0),
            "H" | "h" => Ok(NamedState::H),
            "V" | "v" => Ok(NamedState::V),
            "D" | "d" => Ok(NamedState::D),
            "R" | "r" => Ok(NamedState::R),
            other => Err(Error::InvalidState(format!("unknown state name {other:?}"))),
        }
    }
}

/// `Tr(M ρ)`, real for Hermitian `M`.
pub fn expectation(m: &Operator2, rho: &QubitState) -> Result<f64> {
    m.require_hermitian()?;
    Ok((*m * rho.rho).trace().re)
}

/// [`expectation`] without the Hermitian check, for hot loops over operators
/// already known to be effects.
pub(crate) fn trace_re(m: &Operator2, rho: &QubitState) -> f64 {
    (*m * rho.rho).trace().re
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn hermitian_from(a: f64, b: f64, re: f64, im: f64) -> Operator2 {
        Operator2::new(c(a, 0.0), c(re, -im), c(re, im), c(b, 0.0))
    }

    #[test]
    fn identity_eigensystem_is_computational_basis() {
        let e = eigen_hermitian(&Operator2::identity()).unwrap();
        assert_eq!(e.values, [1.0, 1.0]);
        assert_eq!(e.vectors, [Ket::zero(), Ket::one()]);
    }

    #[test]
    fn pauli_z_eigensystem() {
        let e = eigen_hermitian(&Operator2::pauli_z()).unwrap();
        assert_eq!(e.values, [1.0, -1.0]);
        assert!(e.vectors[0].inner(&Ket::zero()).norm() > 1.0 - 1e-15);
        assert!(e.vectors[1].inner(&Ket::one()).norm() > 1.0 - 1e-15);
        // canonical phase
        assert_eq!(e.vectors[1].0[1], c(1.0, 0.0));
    }

    #[test]
    fn noisy_z_effect_eigenvalues() {
        let e_plus = bloch_compose(&BlochDecomp { c0: 0.5, c: [0.0, 0.0, 0.335] });
        let e = eigen_hermitian(&e_plus).unwrap();
        assert!((e.values[0] - 0.835).abs() < 1e-15);
        assert!((e.values[1] - 0.165).abs() < 1e-15);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = Operator2::new(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        assert!(matches!(eigen_hermitian(&m), Err(Error::NotHermitian { .. })));
        assert!(matches!(bloch_decompose(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn decompose_examples() {
        let d = bloch_decompose(&Operator2::identity()).unwrap();
        assert_eq!((d.c0, d.c), (1.0, [0.0, 0.0, 0.0]));

        let d = bloch_decompose(&Ket::zero().projector()).unwrap();
        assert_eq!((d.c0, d.c), (0.5, [0.0, 0.0, 0.5]));

        // E₊ along the second trine axis at η = 0.67, built entrywise.
        let (s, h) = (3f64.sqrt() / 2.0, 0.335);
        let m = Operator2::new(
            c(0.5 - 0.5 * h, 0.0),
            c(s * h, 0.0),
            c(s * h, 0.0),
            c(0.5 + 0.5 * h, 0.0),
        );
        let d = bloch_decompose(&m).unwrap();
        assert!((d.c0 - 0.5).abs() < 1e-15);
        assert!((d.c[0] - 0.290_118_510_267_787).abs() < 1e-12);
        assert_eq!(d.c[1], 0.0);
        assert!((d.c[2] + 0.1675).abs() < 1e-15);
    }

    #[test]
    fn expectation_examples() {
        let e1 = bloch_compose(&BlochDecomp { c0: 0.5, c: [0.0, 0.0, 0.335] });
        let h = NamedState::H.state();
        assert!((expectation(&e1, &h).unwrap() - 0.8350).abs() < 1e-12);

        let s = 3f64.sqrt() / 2.0;
        let e2 = bloch_compose(&BlochDecomp { c0: 0.5, c: [0.335 * s, 0.0, -0.1675] });
        let d = NamedState::D.state();
        assert!((expectation(&e2, &d).unwrap() - 0.7901).abs() < 5e-5);

        assert!((expectation(&Operator2::identity(), &d).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(expectation(&(Operator2::pauli_x() + Operator2::pauli_x()), &h).unwrap(), 0.0);
    }

    #[test]
    fn named_states_have_expected_bloch_vectors() {
        let close = |a: Vec3, b: Vec3| norm(sub3(a, b)) < 1e-15;
        assert!(close(NamedState::H.state().bloch(), [0.0, 0.0, 1.0]));
        assert!(close(NamedState::V.state().bloch(), [0.0, 0.0, -1.0]));
        assert!(close(NamedState::D.state().bloch(), [1.0, 0.0, 0.0]));
        assert!(close(NamedState::R.state().bloch(), [0.0, 1.0, 0.0]));
    }

    #[test]
    fn state_constructors_validate() {
        assert!(QubitState::from_bloch([0.0, 0.0, 1.1]).is_err());
        assert!(QubitState::from_amplitudes(c(0.0, 0.0), c(0.0, 0.0)).is_err());
        let bad = Operator2::real_diag(1.5, -0.5);
        assert!(QubitState::from_density(bad).is_err());
        let mixed = QubitState::from_bloch([0.1, 0.2, 0.3]).unwrap();
        assert!(!mixed.is_pure());
        assert!(QubitState::from_density(*mixed.density()).is_ok());
        let pure = QubitState::from_amplitudes(c(2.0, 0.0), c(0.0, 2.0)).unwrap();
        assert!(pure.is_pure());
    }

    #[test]
    fn inverse_and_conjugation() {
        let m = hermitian_from(2.0, 1.0, 0.3, -0.7);
        let inv = m.inverse().unwrap();
        assert!((m * inv).max_abs_diff(&Operator2::identity()) < 1e-15);
        assert!(Operator2::zero().inverse().is_none());
    }

    fn hermitian_strategy() -> impl Strategy<Value = Operator2> {
        (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64)
            .prop_map(|(a, b, re, im)| hermitian_from(a, b, re, im))
    }

    fn unit_bloch() -> impl Strategy<Value = Vec3> {
        (-1.0..1.0f64, 0.0..std::f64::consts::TAU).prop_map(|(z, phi)| {
            let s = (1.0 - z * z).sqrt();
            [s * phi.cos(), s * phi.sin(), z]
        })
    }

    proptest! {
        #[test]
        fn eigen_reconstructs(m in hermitian_strategy()) {
            let e = eigen_hermitian(&m).unwrap();
            prop_assert!(e.values[0] >= e.values[1]);
            let rebuilt = e.vectors[0].projector().scaled_re(e.values[0])
                + e.vectors[1].projector().scaled_re(e.values[1]);
            prop_assert!(rebuilt.max_abs_diff(&m) < 1e-12);
            for k in 0..2 {
                let mv = m.apply(&e.vectors[k]);
                let lv = e.vectors[k].scaled(C64::from(e.values[k]));
                prop_assert!((mv.0[0] - lv.0[0]).norm() < 1e-12);
                prop_assert!((mv.0[1] - lv.0[1]).norm() < 1e-12);
            }
            prop_assert!(e.vectors[0].inner(&e.vectors[1]).norm() < 1e-12);
        }

        #[test]
        fn decompose_round_trip(m in hermitian_strategy()) {
            let d = bloch_decompose(&m).unwrap();
            prop_assert!(bloch_compose(&d).max_abs_diff(&m) < 1e-15);
        }

        #[test]
        fn expectation_is_linear(a in hermitian_strategy(), b in hermitian_strategy(),
                                 s in -3.0..3.0f64, r in unit_bloch(), len in 0.0..1.0f64) {
            let rho = QubitState::from_bloch(scale(len, r)).unwrap();
            let lhs = expectation(&(a.scaled_re(s) + b), &rho).unwrap();
            let rhs = s * expectation(&a, &rho).unwrap() + expectation(&b, &rho).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12);
            let mixed = expectation(&a, &QubitState::maximally_mixed()).unwrap();
            prop_assert!((mixed - a.trace().re / 2.0).abs() < 1e-15);
            let d = bloch_decompose(&a).unwrap();
            let via_bloch = d.c0 + dot(d.c, rho.bloch());
            prop_assert!((expectation(&a, &rho).unwrap() - via_bloch).abs() < 1e-12);
        }

        #[test]
        fn pure_projector_spectrum(r in unit_bloch()) {
            let p = bloch_compose(&BlochDecomp { c0: 0.5, c: scale(0.5, r) });
            let e = eigen_hermitian(&p).unwrap();
            prop_assert!((e.values[0] - 1.0).abs() < 1e-15);
            prop_assert!(e.values[1].abs() < 1e-15);
            let k = Ket::from_bloch(r);
            prop_assert!(norm(sub3(k.bloch(), r)) < 1e-12);
        }
    }
}
