//! Seeded photon-counting simulation over the exact detector probabilities.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{circuit_probabilities, OpticalCircuit};
use crate::error::{Error, Result};
use crate::povm::Outcome;
use crate::qubit::QubitState;

/// Detector counts for one run, in [`Detector::ORDER`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub shots: u64,
    pub seed: u64,
    pub shards: u32,
    pub outcomes: [Outcome; 4],
    pub counts: [u64; 4],
    pub probabilities: [f64; 4],
    pub stderr: [f64; 4],
}

impl CountRecord {
    fn from_counts(shots: u64, seed: u64, shards: u32, outcomes: [Outcome; 4], counts: [u64; 4]) -> Self {
        let n = shots as f64;
        let probabilities = counts.map(|c| c as f64 / n);
        let stderr = probabilities.map(|p| (p * (1.0 - p) / n).sqrt());
        CountRecord { shots, seed, shards, outcomes, counts, probabilities, stderr }
    }

    /// Sampled probability of `o`.
    pub fn probability(&self, o: Outcome) -> f64 {
        self.index_of(o).map_or(0.0, |k| self.probabilities[k])
    }

    pub fn count(&self, o: Outcome) -> u64 {
        self.index_of(o).map_or(0, |k| self.counts[k])
    }

    fn index_of(&self, o: Outcome) -> Option<usize> {
        self.outcomes.iter().position(|&x| x == o)
    }

    /// Sampled anticorrelation frequency and its binomial standard error.
    pub fn anticorrelation(&self) -> (f64, f64) {
        let hits: u64 = Outcome::ALL
            .iter()
            .filter(|o| o.is_anticorrelated())
            .map(|&o| self.count(o))
            .sum();
        let n = self.shots as f64;
        let p = hits as f64 / n;
        (p, (p * (1.0 - p) / n).sqrt())
    }

    /// Rows of `outcome,counts,probability,stderr`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("outcome,counts,probability,stderr\n");
        for k in 0..4 {
            writeln!(
                s,
                "{},{},{:.6},{:.6}",
                self.outcomes[k], self.counts[k], self.probabilities[k], self.stderr[k]
            )
            .unwrap();
        }
        s
    }
}

/// Multinomial draw by successive conditional binomials.
fn draw(probs: &[f64; 4], shots: u64, rng: &mut ChaCha8Rng) -> [u64; 4] {
    let mut counts = [0u64; 4];
    let mut remaining = shots;
    let mut mass = 1.0;
    for k in 0..3 {
        if remaining == 0 {
            break;
        }
        let p = if mass > 0.0 { (probs[k] / mass).clamp(0.0, 1.0) } else { 0.0 };
        // p is in [0, 1], so construction cannot fail.
        let c = Binomial::new(remaining, p).unwrap().sample(rng);
        counts[k] = c;
        remaining -= c;
        mass -= probs[k];
    }
    counts[3] = remaining;
    counts
}

pub fn monte_carlo(circ: &OpticalCircuit, rho: &QubitState, shots: u64, seed: u64) -> Result<CountRecord> {
    monte_carlo_sharded(circ, rho, shots, seed, 1)
}

/// Splits `shots` over `shards` independent streams seeded with
/// `seed ^ shard_index`; counts are summed in shard order.
pub fn monte_carlo_sharded(
    circ: &OpticalCircuit,
    rho: &QubitState,
    shots: u64,
    seed: u64,
    shards: u32,
) -> Result<CountRecord> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let shards = shards.max(1);
    let probs = circuit_probabilities(circ, rho).map(|p| p.clamp(0.0, 1.0));
    let base = shots / shards as u64;
    let extra = shots % shards as u64;
    let parts: Vec<[u64; 4]> = (0..shards)
        .into_par_iter()
        .map(|k| {
            let n = base + u64::from((k as u64) < extra);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ k as u64);
            draw(&probs, n, &mut rng)
        })
        .collect();
    let mut counts = [0u64; 4];
    for part in parts {
        for k in 0..4 {
            counts[k] += part[k];
        }
    }
    Ok(CountRecord::from_counts(shots, seed, shards, circ.detector_map, counts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::compile_cascade;
    use crate::optics::build_circuit;
    use crate::povm::trine_joint_povms;
    use crate::qubit::NamedState;

    fn circuit(pair: usize) -> OpticalCircuit {
        let g = trine_joint_povms(0.67).unwrap()[pair];
        build_circuit(&compile_cascade(&g).unwrap()).unwrap()
    }

    #[test]
    fn large_run_tracks_exact() {
        let circ = circuit(0);
        let rho = NamedState::Phi0.state();
        let exact = circuit_probabilities(&circ, &rho);
        let rec = monte_carlo(&circ, &rho, 100_000, 0x5eed).unwrap();
        assert_eq!(rec.counts.iter().sum::<u64>(), 100_000);
        for k in 0..4 {
            let se = (exact[k] * (1.0 - exact[k]) / 1e5).sqrt();
            assert!((rec.probabilities[k] - exact[k]).abs() < 5.0 * se);
        }
    }

    #[test]
    fn single_shot_is_one_hot() {
        let circ = circuit(1);
        for seed in 0..20 {
            let rec = monte_carlo(&circ, &NamedState::Phi0.state(), 1, seed).unwrap();
            assert_eq!(rec.counts.iter().sum::<u64>(), 1);
            assert_eq!(rec.counts.iter().filter(|&&c| c == 1).count(), 1);
        }
    }

    #[test]
    fn zero_shots_rejected() {
        assert_eq!(
            monte_carlo(&circuit(0), &NamedState::H.state(), 0, 1),
            Err(Error::ZeroShots)
        );
    }

    #[test]
    fn deterministic_per_seed_and_shards() {
        let circ = circuit(2);
        let rho = NamedState::D.state();
        let a = monte_carlo_sharded(&circ, &rho, 12_345, 99, 4).unwrap();
        let b = monte_carlo_sharded(&circ, &rho, 12_345, 99, 4).unwrap();
        assert_eq!(a, b);
        let c = monte_carlo_sharded(&circ, &rho, 12_345, 100, 4).unwrap();
        assert_ne!(a.counts, c.counts);
        assert_eq!(a.counts.iter().sum::<u64>(), 12_345);
    }

    #[test]
    fn stderr_scales_with_shots() {
        let circ = circuit(0);
        let rec = CountRecord::from_counts(1000, 0, 1, circ.detector_map, [400, 400, 100, 100]);
        let rec4 = CountRecord::from_counts(4000, 0, 1, circ.detector_map, [1600, 1600, 400, 400]);
        for k in 0..4 {
            assert!((rec4.stderr[k] - rec.stderr[k] / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn error_shrinks_at_root_n_rate() {
        let circ = circuit(0);
        let rho = NamedState::Phi0.state();
        let exact = circuit_probabilities(&circ, &rho);
        let rms = |shots: u64| {
            let mut acc = 0.0;
            for seed in 0..40u64 {
                let rec = monte_carlo(&circ, &rho, shots, seed).unwrap();
                acc += (rec.probabilities[0] - exact[0]).powi(2);
            }
            (acc / 40.0).sqrt()
        };
        let (small, large) = (rms(1_000), rms(100_000));
        let ratio = small / large;
        // Expected ratio is √100 = 10.
        assert!(ratio > 5.0 && ratio < 20.0, "{ratio}");
        let se = (exact[0] * (1.0 - exact[0]) / 1e3).sqrt();
        assert!(small > 0.5 * se && small < 2.0 * se);
    }

    #[test]
    fn csv_layout() {
        let rec = monte_carlo(&circuit(0), &NamedState::Phi0.state(), 1000, 7).unwrap();
        let csv = rec.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "outcome,counts,probability,stderr");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("+-,"));
        assert!(lines[4].starts_with("--,"));
    }
}
