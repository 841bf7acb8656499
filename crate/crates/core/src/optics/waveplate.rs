use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubit::{Operator2, C64};

/// Phase-invariant reconstruction tolerance for solved sandwiches.
pub const SANDWICH_TOL: f64 = 1e-8;

const GRID_STEPS: usize = 12;
const STARTS: usize = 8;
const CONVERGED: f64 = 1e-13;

fn rotation(theta: f64) -> Operator2 {
    let (s, c) = theta.sin_cos();
    Operator2::new(C64::from(c), C64::from(-s), C64::from(s), C64::from(c))
}

fn rotation_derivative(theta: f64) -> Operator2 {
    let (s, c) = theta.sin_cos();
    Operator2::new(C64::from(-s), C64::from(-c), C64::from(c), C64::from(-s))
}

/// Linear retarder with fast axis at `theta` radians and retardance `delta`.
pub fn retarder(theta: f64, delta: f64) -> Operator2 {
    let d = Operator2::diag(C64::from(1.0), C64::from_polar(1.0, delta));
    rotation(theta) * d * rotation(-theta)
}

fn retarder_derivative(theta: f64, delta: f64) -> Operator2 {
    let d = Operator2::diag(C64::from(1.0), C64::from_polar(1.0, delta));
    // d/dθ R(−θ) = −R'(−θ)
    rotation_derivative(theta) * d * rotation(-theta)
        - rotation(theta) * d * rotation_derivative(-theta)
}

/// Quarter-wave plate with fast axis at `deg` degrees.
pub fn qwp(deg: f64) -> Operator2 {
    retarder(deg.to_radians(), FRAC_PI_2)
}

/// Half-wave plate with fast axis at `deg` degrees.
pub fn hwp(deg: f64) -> Operator2 {
    retarder(deg.to_radians(), PI)
}

/// QWP-HWP-QWP sandwich; light meets `q1` first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavePlateTriple {
    pub q1_deg: f64,
    pub h_deg: f64,
    pub q2_deg: f64,
}

impl WavePlateTriple {
    pub fn matrix(&self) -> Operator2 {
        qwp(self.q2_deg) * hwp(self.h_deg) * qwp(self.q1_deg)
    }
}

/// Wraps an angle in degrees to `(−90°, 90°]`; plates are π-periodic.
fn wrap_deg(d: f64) -> f64 {
    let w = (d + 90.0).rem_euclid(180.0) - 90.0;
    if w <= -90.0 {
        w + 180.0
    } else {
        w
    }
}

fn model(x: &[f64; 4]) -> Operator2 {
    let v = retarder(x[2], FRAC_PI_2) * retarder(x[1], PI) * retarder(x[0], FRAC_PI_2);
    v.scaled(C64::from_polar(1.0, x[3]))
}

fn residual(x: &[f64; 4], target: &Operator2) -> [f64; 8] {
    let d = model(x) - *target;
    let mut r = [0.0; 8];
    for (k, z) in d.0.iter().flatten().enumerate() {
        r[2 * k] = z.re;
        r[2 * k + 1] = z.im;
    }
    r
}

fn cost(r: &[f64; 8]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

fn jacobian(x: &[f64; 4]) -> [[f64; 4]; 8] {
    let phase = C64::from_polar(1.0, x[3]);
    let (q1, h, q2) = (
        retarder(x[0], FRAC_PI_2),
        retarder(x[1], PI),
        retarder(x[2], FRAC_PI_2),
    );
    let cols = [
        q2 * h * retarder_derivative(x[0], FRAC_PI_2),
        q2 * retarder_derivative(x[1], PI) * q1,
        retarder_derivative(x[2], FRAC_PI_2) * h * q1,
        (q2 * h * q1).scaled(C64::new(0.0, 1.0)),
    ]
    .map(|m| m.scaled(phase));
    let mut j = [[0.0; 4]; 8];
    for (c, m) in cols.iter().enumerate() {
        for (k, z) in m.0.iter().flatten().enumerate() {
            j[2 * k][c] = z.re;
            j[2 * k + 1][c] = z.im;
        }
    }
    j
}

/// Solves the 4×4 system `a·x = b` by Gaussian elimination with partial pivoting.
fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let piv = (col..4).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..4 {
            let f = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let s: f64 = (row + 1..4).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Levenberg–Marquardt on the phase-augmented residual `e^{iφ}V(θ) − U`.
fn refine(mut x: [f64; 4], target: &Operator2) -> ([f64; 4], f64) {
    let mut r = residual(&x, target);
    let mut c = cost(&r);
    let mut mu = 1e-3;
    for _ in 0..200 {
        if c < CONVERGED * CONVERGED {
            break;
        }
        let j = jacobian(&x);
        let mut jtj = [[0.0; 4]; 4];
        let mut jtr = [0.0; 4];
        for row in 0..8 {
            for a in 0..4 {
                jtr[a] -= j[row][a] * r[row];
                for b in 0..4 {
                    jtj[a][b] += j[row][a] * j[row][b];
                }
            }
        }
        let mut improved = false;
        for _ in 0..20 {
            let mut damped = jtj;
            for (k, row) in damped.iter_mut().enumerate() {
                row[k] += mu * (1.0 + jtj[k][k]);
            }
            let Some(step) = solve4(damped, jtr) else {
                mu *= 10.0;
                continue;
            };
            let trial = [x[0] + step[0], x[1] + step[1], x[2] + step[2], x[3] + step[3]];
            let tr = residual(&trial, target);
            let tc = cost(&tr);
            if tc < c {
                x = trial;
                r = tr;
                c = tc;
                mu = (mu * 0.3).max(1e-15);
                improved = true;
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (x, c.sqrt())
}

/// Finds QWP-HWP-QWP angles whose composed Jones matrix equals `u` up to a
/// global phase: a coarse grid over the three angles seeds a
/// Levenberg–Marquardt refinement.
pub fn solve_sandwich(u: &Operator2) -> Result<WavePlateTriple> {
    u.require_unitary()?;
    let step = PI / GRID_STEPS as f64;
    let mut seeds: Vec<(f64, [f64; 4])> = Vec::with_capacity(GRID_STEPS.pow(3));
    for a in 0..GRID_STEPS {
        for b in 0..GRID_STEPS {
            for c in 0..GRID_STEPS {
                let angles = [a as f64 * step, b as f64 * step, c as f64 * step];
                let v = model(&[angles[0], angles[1], angles[2], 0.0]);
                let overlap = (v.adjoint() * *u).trace();
                let distance = 1.0 - overlap.norm() / 2.0;
                seeds.push((distance, [angles[0], angles[1], angles[2], overlap.arg()]));
            }
        }
    }
    seeds.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut best = (f64::INFINITY, [0.0; 4]);
    for &(_, x0) in seeds.iter().take(STARTS) {
        let (x, res) = refine(x0, u);
        if res < best.0 {
            best = (res, x);
        }
        if res < CONVERGED {
            break;
        }
    }
    let x = best.1;
    let triple = WavePlateTriple {
        q1_deg: wrap_deg(x[0].to_degrees()),
        h_deg: wrap_deg(x[1].to_degrees()),
        q2_deg: wrap_deg(x[2].to_degrees()),
    };
    let residual = triple.matrix().phase_distance(u);
    if residual > SANDWICH_TOL {
        return Err(Error::SolverFailed { residual });
    }
    Ok(triple)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::Ket;
    use proptest::prelude::*;

    fn close_up_to_phase(a: &Operator2, b: &Operator2, tol: f64) -> bool {
        a.phase_distance(b) <= tol
    }

    #[test]
    fn plate_conventions() {
        assert!(close_up_to_phase(&hwp(0.0), &Operator2::real_diag(1.0, -1.0), 1e-15));
        let v = hwp(45.0).apply(&Ket::zero());
        assert!((v.inner(&Ket::one()).norm() - 1.0).abs() < 1e-15);
        for theta in [-73.0, 0.0, 12.5, 45.0, 90.0, 133.3] {
            let q = qwp(theta);
            assert!(q.is_unitary());
            assert!(hwp(theta).is_unitary());
            assert!(close_up_to_phase(&(q * q * q * q), &Operator2::identity(), 1e-14));
            assert!(close_up_to_phase(&(q * q), &hwp(theta), 1e-14));
        }
    }

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_deg(-90.0), 90.0);
        assert_eq!(wrap_deg(90.0), 90.0);
        assert_eq!(wrap_deg(190.0), 10.0);
        assert!((wrap_deg(-112.4) - 67.6).abs() < 1e-12);
    }

    #[test]
    fn identity_target() {
        let t = solve_sandwich(&Operator2::identity()).unwrap();
        assert!(close_up_to_phase(&t.matrix(), &Operator2::identity(), SANDWICH_TOL));
    }

    #[test]
    fn non_unitary_rejected() {
        assert!(matches!(
            solve_sandwich(&Operator2::real_diag(1.0, 0.5)),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let h = 1e-6;
        for theta in [0.1, 0.7, 2.0] {
            let fd = (retarder(theta + h, FRAC_PI_2) - retarder(theta - h, FRAC_PI_2)).scaled_re(0.5 / h);
            assert!(fd.max_abs_diff(&retarder_derivative(theta, FRAC_PI_2)) < 1e-8);
        }
    }

    fn unitary_strategy() -> impl Strategy<Value = Operator2> {
        (0.0..PI, 0.0..std::f64::consts::TAU, 0.0..std::f64::consts::TAU, 0.0..std::f64::consts::TAU)
            .prop_map(|(t, a, b, g)| {
                let (s, c) = (t / 2.0).sin_cos();
                Operator2::new(
                    C64::from_polar(c, a),
                    -C64::from_polar(s, -b),
                    C64::from_polar(s, b),
                    C64::from_polar(c, -a),
                )
                .scaled(C64::from_polar(1.0, g))
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn reconstructs_random_unitaries(u in unitary_strategy()) {
            let t = solve_sandwich(&u).unwrap();
            prop_assert!(close_up_to_phase(&t.matrix(), &u, SANDWICH_TOL));
            for a in [t.q1_deg, t.h_deg, t.q2_deg] {
                prop_assert!(a > -90.0 && a <= 90.0);
            }
        }
    }
}
