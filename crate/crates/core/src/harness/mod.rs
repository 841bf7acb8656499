//! End-to-end pipeline: construct, validate, compile, simulate, report.

mod config;
mod render;

pub use config::{
    AxesSpec, ExperimentConfig, OutputFormat, Overrides, StateSpec, DEFAULT_ETA, DEFAULT_SEED,
    DEFAULT_SHOTS,
};
pub use render::{fmt_sig, render_circuits, render_marginals, render_report, render_sweep, render_validation};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cascade::{compile_cascade, Cascade, RECONSTRUCTION_TOL};
use crate::error::{Error, Result};
use crate::lsw::{self, LswReport, SignificanceReport};
use crate::optics::{build_circuit, channel_deviation, monte_carlo_sharded, Detector, OpticalCircuit};
use crate::povm::{check_marginals, joint_povms, necessary_condition, noisy_observable, JointPovm, NecessaryCondition, Outcome, TAU_RANK};
use crate::qubit::{trace_re, NamedState, QubitState};

/// Channel-equivalence tolerance between circuit and POVM probabilities.
pub const CHANNEL_TOL: f64 = 1e-9;
/// Agreement required between the two joint-POVM routes of a marginal.
pub const ROUTE_TOL: f64 = 1e-12;
const CHANNEL_PROBES: usize = 16;
const PROBE_SEED: u64 = 0x0C4A_77E1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationSummary {
    pub effects_valid: bool,
    pub completeness_max: f64,
    pub marginal_max: f64,
    pub rank1_max: f64,
    pub cascade_max: f64,
    pub channel_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitRow {
    pub pair: (u8, u8),
    pub stage: usize,
    pub outcome: Outcome,
    pub q1_deg: f64,
    pub h_deg: f64,
    pub q2_deg: f64,
    pub t_v: f64,
    pub chi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub pair: (u8, u8),
    pub outcome: Outcome,
    pub detector: String,
    pub exact: f64,
    pub sampled: f64,
    pub stderr: f64,
    pub counts: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub pair: (u8, u8),
    pub anticorr_exact: f64,
    pub anticorr_sampled: f64,
    pub anticorr_stderr: f64,
}

/// One marginal probability `Tr(E ρ)` obtained from two joint POVMs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalEntry {
    pub effect: String,
    pub state: String,
    pub route_a: String,
    pub value_a: f64,
    pub route_b: String,
    pub value_b: f64,
    pub theory: f64,
}

impl MarginalEntry {
    pub fn route_disagreement(&self) -> f64 {
        (self.value_a - self.value_b).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub eta: f64,
    pub state: String,
    pub shots: u64,
    pub seed: u64,
    pub validation: ValidationSummary,
    pub circuits: Vec<CircuitRow>,
    pub pair_rows: Vec<PairRow>,
    pub pairs: Vec<PairSummary>,
    pub marginals: Vec<MarginalEntry>,
    pub lsw: LswReport,
    pub necessary_condition: NecessaryCondition,
    pub sampled_r3: f64,
    pub sampled_r3_stderr: f64,
    pub significance: SignificanceReport,
}

impl RunReport {
    pub fn violated(&self) -> bool {
        self.lsw.violated()
    }
}

/// Everything derived from a configuration before any sampling happens.
struct Compiled {
    povms: [JointPovm; 3],
    cascades: [Cascade; 3],
    circuits: [OpticalCircuit; 3],
    validation: ValidationSummary,
}

fn fail(contract: &'static str, detail: String) -> Error {
    Error::ContractFailed { contract, detail }
}

fn probe_states(extra: &QubitState) -> Vec<QubitState> {
    let mut states = vec![*extra];
    states.extend(NamedState::PROBES.iter().map(|s| s.state()));
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    for _ in 0..CHANNEL_PROBES {
        let z: f64 = rng.random_range(-1.0..=1.0);
        let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let s = (1.0 - z * z).sqrt();
        states.push(QubitState::from_bloch([s * phi.cos(), s * phi.sin(), z]).expect("unit Bloch vector"));
    }
    states
}

fn compile(cfg: &ExperimentConfig) -> Result<Compiled> {
    let rho = cfg.state.state()?;
    let povms = joint_povms(cfg.eta, &cfg.axes.vectors())?;

    let completeness_max = povms.iter().map(|g| g.completeness_residual()).fold(0.0, f64::max);
    if completeness_max > 1e-12 {
        return Err(fail("completeness", format!("max residual {completeness_max:.3e}")));
    }
    let mut marginal_max: f64 = 0.0;
    for g in &povms {
        let rep = check_marginals(g)?;
        if !rep.pass {
            return Err(fail("marginals", format!("pair {:?}: {:?}", g.pair, rep.residuals)));
        }
        marginal_max = marginal_max.max(rep.max_residual());
    }
    let rank1_max = povms.iter().map(|g| g.max_rank_residual()).fold(0.0, f64::max);
    if rank1_max > TAU_RANK {
        return Err(fail("rank-1", format!("max |det G| {rank1_max:.3e}")));
    }

    let mut cascades = Vec::with_capacity(3);
    let mut circuits = Vec::with_capacity(3);
    let mut cascade_max: f64 = 0.0;
    let mut channel_max: f64 = 0.0;
    let probes = probe_states(&rho);
    for g in &povms {
        let c = compile_cascade(g)?;
        let err = c.reconstruction_error(g);
        if err > RECONSTRUCTION_TOL {
            return Err(fail("cascade soundness", format!("pair {:?}: error {err:.3e}", g.pair)));
        }
        cascade_max = cascade_max.max(err);
        let circ = build_circuit(&c)?;
        for s in &probes {
            let dev = channel_deviation(&circ, &g.elements, s);
            if dev > CHANNEL_TOL {
                return Err(fail("channel equivalence", format!("pair {:?}: deviation {dev:.3e}", g.pair)));
            }
            channel_max = channel_max.max(dev);
        }
        cascades.push(c);
        circuits.push(circ);
    }

    Ok(Compiled {
        povms,
        cascades: [cascades[0], cascades[1], cascades[2]],
        circuits: [circuits[0], circuits[1], circuits[2]],
        validation: ValidationSummary {
            // Element effect-validity is enforced during construction.
            effects_valid: true,
            completeness_max,
            marginal_max,
            rank1_max,
            cascade_max,
            channel_max,
        },
    })
}

/// Runs every validation without sampling.
pub fn check(cfg: &ExperimentConfig) -> Result<ValidationSummary> {
    compile(cfg).map(|c| c.validation)
}

fn circuit_rows(compiled: &Compiled) -> Vec<CircuitRow> {
    let mut rows = Vec::new();
    for ((g, c), circ) in compiled.povms.iter().zip(&compiled.cascades).zip(&compiled.circuits) {
        for (t, (stage, opt)) in c.stages.iter().zip(&circ.stages).enumerate() {
            rows.push(CircuitRow {
                pair: g.pair,
                stage: t + 1,
                outcome: stage.outcome,
                q1_deg: opt.plates.q1_deg,
                h_deg: opt.plates.h_deg,
                q2_deg: opt.plates.q2_deg,
                t_v: opt.ppbs.t_v,
                chi: stage.chi,
            });
        }
    }
    rows
}

/// Wave-plate angles and transmissions for every stage.
pub fn compile_circuits(cfg: &ExperimentConfig) -> Result<Vec<CircuitRow>> {
    compile(cfg).map(|c| circuit_rows(&c))
}

fn marginal_entries(povms: &[JointPovm; 3], eta: f64, axes: &[crate::qubit::Vec3; 3]) -> Result<Vec<MarginalEntry>> {
    let mut out = Vec::with_capacity(24);
    for k in 1..=3u8 {
        let obs = noisy_observable(eta, axes[k as usize - 1])?;
        let routes: Vec<(&JointPovm, usize)> = povms
            .iter()
            .filter_map(|g| {
                if g.pair.0 == k {
                    Some((g, 0))
                } else if g.pair.1 == k {
                    Some((g, 1))
                } else {
                    None
                }
            })
            .collect();
        let [(ga, wa), (gb, wb)] = routes[..] else {
            return Err(fail("marginals", format!("observable {k} does not appear in exactly two pairs")));
        };
        for sign in [1i8, -1] {
            let effect = format!("E{}{k}", if sign > 0 { '+' } else { '-' });
            for s in NamedState::PROBES {
                let rho = s.state();
                out.push(MarginalEntry {
                    effect: effect.clone(),
                    state: s.name().to_string(),
                    route_a: route_label(ga, wa, sign),
                    value_a: trace_re(&ga.marginal(wa, sign), &rho),
                    route_b: route_label(gb, wb, sign),
                    value_b: trace_re(&gb.marginal(wb, sign), &rho),
                    theory: trace_re(obs.effect(sign), &rho),
                });
            }
        }
    }
    Ok(out)
}

fn route_label(g: &JointPovm, which: usize, sign: i8) -> String {
    let terms: Vec<String> = Outcome::ALL
        .iter()
        .filter(|o| {
            let (a, b) = o.signs();
            (if which == 0 { a } else { b }) == sign
        })
        .map(|o| format!("G{}{}{}", g.pair.0, g.pair.1, o))
        .collect();
    terms.join(" + ")
}

/// Marginal check over `{H, V, R, D}` for all six noisy effects.
pub fn marginal_table(cfg: &ExperimentConfig) -> Result<Vec<MarginalEntry>> {
    let axes = cfg.axes.vectors();
    let povms = joint_povms(cfg.eta, &axes)?;
    let entries = marginal_entries(&povms, cfg.eta, &axes)?;
    if let Some(e) = entries.iter().find(|e| e.route_disagreement() > ROUTE_TOL) {
        return Err(fail("marginal routes", format!("{} on {}: {:.3e}", e.effect, e.state, e.route_disagreement())));
    }
    Ok(entries)
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunReport> {
    let rho = cfg.state.state()?;
    let compiled = compile(cfg)?;
    let marginals = marginal_table(cfg)?;
    let lsw = lsw::r3(&compiled.povms, &rho)?;
    let nc = necessary_condition(&compiled.povms, &rho)?;

    let mut pair_rows = Vec::with_capacity(12);
    let mut pairs = Vec::with_capacity(3);
    let mut var_sum = 0.0;
    let mut sampled_sum = 0.0;
    for (k, (g, circ)) in compiled.povms.iter().zip(&compiled.circuits).enumerate() {
        // Pair streams live in the high bits; shard indices XOR into the low bits.
        let pair_seed = cfg.seed ^ ((k as u64 + 1) << 32);
        let rec = monte_carlo_sharded(circ, &rho, cfg.shots, pair_seed, cfg.shards)?;
        let exact = g.probabilities(&rho);
        for (d, det) in Detector::ORDER.iter().enumerate() {
            let o = circ.detector_map[d];
            pair_rows.push(PairRow {
                pair: g.pair,
                outcome: o,
                detector: det.label(),
                exact: exact[o.index()],
                sampled: rec.probabilities[d],
                stderr: rec.stderr[d],
                counts: rec.counts[d],
            });
        }
        let (p, se) = rec.anticorrelation();
        var_sum += se * se;
        sampled_sum += p;
        pairs.push(PairSummary {
            pair: g.pair,
            anticorr_exact: lsw.pairs[k].probability,
            anticorr_sampled: p,
            anticorr_stderr: se,
        });
    }
    let sampled_r3 = sampled_sum / 3.0;
    let sampled_r3_stderr = var_sum.sqrt() / 3.0;
    // A zero stderr only occurs for degenerate counts; fall back to one count.
    let sigma = if sampled_r3_stderr > 0.0 { sampled_r3_stderr } else { 1.0 / cfg.shots as f64 };
    let significance = lsw::significance(sampled_r3, sigma, lsw.lsw_bound)?;

    Ok(RunReport {
        eta: cfg.eta,
        state: cfg.state.label(),
        shots: cfg.shots,
        seed: cfg.seed,
        validation: compiled.validation,
        circuits: circuit_rows(&compiled),
        pair_rows,
        pairs,
        marginals,
        lsw,
        necessary_condition: nc,
        sampled_r3,
        sampled_r3_stderr,
        significance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_run_violates() {
        let rep = run(&ExperimentConfig::default()).unwrap();
        assert!((rep.lsw.r3 - 0.8075).abs() < 5e-5);
        assert!((rep.lsw.lsw_bound - 0.7767).abs() < 5e-5);
        assert!(rep.violated());
        assert!((rep.sampled_r3 - rep.lsw.r3).abs() < 5.0 * rep.sampled_r3_stderr);
        assert!(rep.significance.n_sigma > 6.4);
        assert_eq!(rep.pair_rows.len(), 12);
        assert_eq!(rep.circuits.len(), 9);
        assert_eq!(rep.marginals.len(), 24);
    }

    #[test]
    fn above_window_edge_is_not_violated() {
        let cfg = ExperimentConfig { eta: 0.71, shots: 1000, ..Default::default() };
        let rep = run(&cfg).unwrap();
        assert!(!rep.violated());
    }

    #[test]
    fn beyond_compatibility_window_is_a_contract_error() {
        let cfg = ExperimentConfig { eta: 0.8, ..Default::default() };
        assert!(matches!(run(&cfg), Err(Error::NegativeRadicand { .. })));
    }

    #[test]
    fn marginal_routes() {
        let entries = marginal_table(&ExperimentConfig::default()).unwrap();
        let find = |eff: &str, st: &str| entries.iter().find(|e| e.effect == eff && e.state == st).unwrap();
        assert!((find("E+1", "H").value_a - 0.8350).abs() < 5e-5);
        assert!((find("E-3", "D").value_b - 0.7901).abs() < 5e-5);
        assert_eq!(find("E+1", "H").route_a, "G12++ + G12+-");
        assert_eq!(find("E+2", "H").route_a, "G12++ + G12-+");
        for e in entries.iter().filter(|e| e.state == "R") {
            assert!((e.value_a - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_columns_ignore_seed_and_shots() {
        let a = run(&ExperimentConfig { shots: 500, seed: 1, ..Default::default() }).unwrap();
        let b = run(&ExperimentConfig { shots: 2000, seed: 2, ..Default::default() }).unwrap();
        for (x, y) in a.pair_rows.iter().zip(&b.pair_rows) {
            assert_eq!(x.exact, y.exact);
        }
        assert_eq!(a.lsw, b.lsw);
        assert_eq!(a.marginals, b.marginals);
    }
}
