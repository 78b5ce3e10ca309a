use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Mode, ObservableSpec};
use super::stats::{mean_and_stderr, plugin_entropy, z_score, Estimate};
use super::HarnessError;
use crate::oracle::{
    joint_expectation, marginal_expectation, random_tbo, tsirelson_embed, PureBipartiteState, Side,
    TracelessBinaryObservable,
};
use crate::protocol::{
    derive_seed, run_postselected, Codec, PostselectedOutcome, Protocol, SharedRandomness, Sign,
};
use crate::sphere::{
    acceptance_bounds, acceptance_probability, geometric_entropy, uniform_sample, UnitVector,
};

const INSTANCE_LABEL: u64 = 1;
const TRIAL_LABEL: u64 = 2;

/// Point-estimate windows are ±3 standard errors.
pub const Z_LIMIT: f64 = 3.0;
/// Fraction of instances that must fall inside the window.
pub const REQUIRED_PASS_FRACTION: f64 = 0.95;

/// One (state, observable pair) instance, already embedded.
#[derive(Debug, Clone)]
pub struct Instance {
    pub index: usize,
    pub state: Option<PureBipartiteState<f64>>,
    pub alice: Option<TracelessBinaryObservable<f64>>,
    pub bob: Option<TracelessBinaryObservable<f64>>,
    pub a: UnitVector<f64>,
    pub b: UnitVector<f64>,
    pub oracle_correlation: f64,
    pub oracle_marginal_a: f64,
    pub oracle_marginal_b: f64,
    /// Seed from which this instance's trial seeds are derived.
    pub seed: u64,
}

/// Builds instance `index` of `cfg`.
pub fn build_instance(cfg: &ExperimentConfig, index: usize) -> Result<Instance, HarnessError> {
    let seed = derive_seed(cfg.seed, &[INSTANCE_LABEL, index as u64]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    if cfg.mode == Mode::AbstractVectors {
        let n = cfg.sphere_dim();
        let a = uniform_sample(n, &mut rng)?;
        let b = uniform_sample(n, &mut rng)?;
        let c = a.dot(&b);
        return Ok(Instance {
            index,
            state: None,
            alice: None,
            bob: None,
            a,
            b,
            oracle_correlation: c,
            oracle_marginal_a: 0.0,
            oracle_marginal_b: 0.0,
            seed,
        });
    }

    let state = cfg.state.build(cfg.d, &mut rng)?;
    let (alice, bob) = match &cfg.observables {
        ObservableSpec::Random { .. } => {
            (random_tbo(cfg.d, &mut rng)?, random_tbo(cfg.d, &mut rng)?)
        }
        ObservableSpec::Explicit(pairs) => {
            let p = &pairs[index];
            (p.alice.clone(), p.bob.clone())
        }
    };
    let a = tsirelson_embed(&state, &alice, Side::Alice)?;
    let b = tsirelson_embed(&state, &bob, Side::Bob)?;
    Ok(Instance {
        index,
        oracle_correlation: joint_expectation(&state, &alice, &bob)?,
        oracle_marginal_a: marginal_expectation(&state, &alice, Side::Alice)?,
        oracle_marginal_b: marginal_expectation(&state, &bob, Side::Bob)?,
        state: Some(state),
        alice: Some(alice),
        bob: Some(bob),
        a,
        b,
        seed,
    })
}

/// What one trial contributes to the aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    /// `None` when a post-selected trial aborted.
    pub outputs: Option<(Sign, Sign)>,
    pub iteration: u64,
    pub message_bits: u32,
}

/// Post-selection success statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostselectionStats {
    pub attempts: u64,
    pub accepted: u64,
    pub success_rate: f64,
    pub success_stderr: f64,
    pub expected_success_rate: f64,
    pub success_lower_bound: f64,
    pub success_z_score: f64,
}

/// Aggregated Monte-Carlo estimates for one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialStatistics {
    /// Runs contributing outputs (accepted runs in post-selected mode).
    pub trials: u64,
    pub correlation_hat: f64,
    pub correlation_stderr: f64,
    pub marginal_a_hat: f64,
    pub marginal_a_stderr: f64,
    pub marginal_b_hat: f64,
    pub marginal_b_stderr: f64,
    pub oracle_correlation: f64,
    pub oracle_marginal_a: f64,
    pub oracle_marginal_b: f64,
    /// Marginals are only reproduced for maximally entangled states.
    pub marginals_simulated: bool,
    pub z_score: f64,
    pub mean_iterations: f64,
    pub iterations_stderr: f64,
    pub mean_message_bits: f64,
    pub message_bits_stderr: f64,
    pub empirical_entropy: f64,
    pub analytic_entropy: f64,
    pub acceptance_probability: f64,
    /// `[[(+,+), (+,−)], [(−,+), (−,−)]]`.
    pub outcome_counts: [[u64; 2]; 2],
    pub iteration_histogram: Vec<(u64, u64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub postselection: Option<PostselectionStats>,
}

impl TrialStatistics {
    pub fn histogram(&self) -> BTreeMap<u64, u64> {
        self.iteration_histogram.iter().copied().collect()
    }

    pub fn marginal_z_scores(&self) -> (f64, f64) {
        (
            z_score(self.marginal_a_hat, 0.0, self.marginal_a_stderr),
            z_score(self.marginal_b_hat, 0.0, self.marginal_b_stderr),
        )
    }
}

/// Runs `trials` protocol instances for `inst`, one derived seed per trial.
pub fn run_trials(
    inst: &Instance,
    mode: Mode,
    codec: Codec,
    trials: u64,
) -> Result<Vec<TrialOutcome>, HarnessError> {
    let protocol = Protocol::new(codec);
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let shared = SharedRandomness::new(derive_seed(inst.seed, &[TRIAL_LABEL, t]));
            match mode {
                Mode::Postselected => Ok(match run_postselected(&inst.a, &inst.b, &shared)? {
                    PostselectedOutcome::Accepted(tr) => TrialOutcome {
                        outputs: Some((tr.output_a, tr.output_b)),
                        iteration: 1,
                        message_bits: 0,
                    },
                    PostselectedOutcome::Aborted => TrialOutcome {
                        outputs: None,
                        iteration: 1,
                        message_bits: 0,
                    },
                }),
                Mode::Protocol | Mode::AbstractVectors => {
                    let tr = protocol.run(&inst.a, &inst.b, &shared)?;
                    Ok(TrialOutcome {
                        outputs: Some((tr.output_a, tr.output_b)),
                        iteration: tr.iteration,
                        message_bits: tr.message_bits.len() as u32,
                    })
                }
            }
        })
        .collect()
}

/// Sample stderr, or the model value `√((1 − C²)/N)` when every product
/// agreed and the sample spread is zero.
fn correlation_se(est: Estimate, oracle: f64, trials: usize) -> f64 {
    if est.stderr > 0.0 || trials == 0 {
        est.stderr
    } else {
        ((1.0 - oracle * oracle).max(0.0) / trials as f64).sqrt()
    }
}

/// Reduces trial outcomes in their index order.
pub fn aggregate(
    inst: &Instance,
    outcomes: &[TrialOutcome],
    n: usize,
    mode: Mode,
    marginals_simulated: bool,
) -> Result<TrialStatistics, HarnessError> {
    let p = acceptance_probability::<f64>(n)?;
    let accepted: Vec<&TrialOutcome> = outcomes.iter().filter(|o| o.outputs.is_some()).collect();

    let mut prod = Vec::with_capacity(accepted.len());
    let mut out_a = Vec::with_capacity(accepted.len());
    let mut out_b = Vec::with_capacity(accepted.len());
    let mut iters = Vec::with_capacity(accepted.len());
    let mut bits = Vec::with_capacity(accepted.len());
    let mut counts = [[0u64; 2]; 2];
    let mut histogram = BTreeMap::new();
    for o in &accepted {
        let (sa, sb) = o.outputs.expect("filtered");
        let (x, y) = (f64::from(sa.value()), f64::from(sb.value()));
        prod.push(x * y);
        out_a.push(x);
        out_b.push(y);
        iters.push(o.iteration as f64);
        bits.push(f64::from(o.message_bits));
        counts[usize::from(sa == Sign::Minus)][usize::from(sb == Sign::Minus)] += 1;
        *histogram.entry(o.iteration).or_insert(0u64) += 1;
    }
    let corr = mean_and_stderr(&prod);
    let ma = mean_and_stderr(&out_a);
    let mb = mean_and_stderr(&out_b);
    let it = mean_and_stderr(&iters);
    let bt = mean_and_stderr(&bits);

    let postselection = (mode == Mode::Postselected).then(|| {
        let attempts = outcomes.len() as u64;
        let k = accepted.len() as u64;
        let rate = k as f64 / attempts as f64;
        // Binomial stderr at the hypothesised rate.
        let se = (p * (1.0 - p) / attempts as f64).sqrt();
        PostselectionStats {
            attempts,
            accepted: k,
            success_rate: rate,
            success_stderr: (rate * (1.0 - rate) / attempts as f64).sqrt(),
            expected_success_rate: p,
            success_lower_bound: acceptance_bounds::<f64>(n).map(|b| b.0).unwrap_or(0.0),
            success_z_score: z_score(rate, p, se),
        }
    });

    Ok(TrialStatistics {
        trials: accepted.len() as u64,
        correlation_hat: corr.mean,
        correlation_stderr: corr.stderr,
        marginal_a_hat: ma.mean,
        marginal_a_stderr: ma.stderr,
        marginal_b_hat: mb.mean,
        marginal_b_stderr: mb.stderr,
        oracle_correlation: inst.oracle_correlation,
        oracle_marginal_a: inst.oracle_marginal_a,
        oracle_marginal_b: inst.oracle_marginal_b,
        marginals_simulated,
        z_score: z_score(
            corr.mean,
            inst.oracle_correlation,
            correlation_se(corr, inst.oracle_correlation, accepted.len()),
        ),
        mean_iterations: it.mean,
        iterations_stderr: it.stderr,
        mean_message_bits: bt.mean,
        message_bits_stderr: bt.stderr,
        empirical_entropy: plugin_entropy(&histogram),
        analytic_entropy: geometric_entropy(p)?,
        acceptance_probability: p,
        outcome_counts: counts,
        iteration_histogram: histogram.into_iter().collect(),
        postselection,
    })
}

/// Per-instance entry of an experiment report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceReport {
    pub index: usize,
    pub stats: TrialStatistics,
    pub pass: bool,
}

/// Full result of [`estimate_joint_correlation`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub n: usize,
    pub codec: String,
    pub instances: Vec<InstanceReport>,
    pub pass_count: usize,
    pub required_pass_fraction: f64,
    pub pass: bool,
}

impl ExperimentReport {
    pub fn pass_fraction(&self) -> f64 {
        self.pass_count as f64 / self.instances.len() as f64
    }
}

fn instance_passes(stats: &TrialStatistics) -> bool {
    let corr_ok = stats.z_score.abs() <= Z_LIMIT;
    match &stats.postselection {
        None => corr_ok,
        Some(ps) => {
            corr_ok
                && ps.success_z_score.abs() <= Z_LIMIT
                && ps.success_rate >= ps.success_lower_bound
        }
    }
}

/// Runs the configured experiment: per instance, embeds the observables,
/// runs the protocol `trials` times and compares the estimate with the
/// exact correlation.
pub fn estimate_joint_correlation(
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport, HarnessError> {
    cfg.validate()?;
    let n = cfg.sphere_dim();
    let codec = cfg.codec.resolve(n);
    let marginals_simulated =
        cfg.mode == Mode::AbstractVectors || cfg.state.is_maximally_entangled();

    let mut instances = Vec::with_capacity(cfg.observables.pair_count());
    for index in 0..cfg.observables.pair_count() {
        let inst = build_instance(cfg, index)?;
        let outcomes = run_trials(&inst, cfg.mode, codec, cfg.trials)?;
        let stats = aggregate(&inst, &outcomes, n, cfg.mode, marginals_simulated)?;
        instances.push(InstanceReport {
            index,
            pass: instance_passes(&stats),
            stats,
        });
    }
    let pass_count = instances.iter().filter(|r| r.pass).count();
    let required = if instances.len() == 1 {
        1.0
    } else {
        REQUIRED_PASS_FRACTION
    };
    Ok(ExperimentReport {
        config: cfg.clone(),
        n,
        codec: codec.id(),
        pass: pass_count as f64 >= required * instances.len() as f64,
        pass_count,
        required_pass_fraction: required,
        instances,
    })
}

/// Convenience: correlation estimate with its standard error.
pub fn correlation_estimate(stats: &TrialStatistics) -> Estimate {
    Estimate {
        mean: stats.correlation_hat,
        stderr: stats.correlation_stderr,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{ObservablePair, StateSpec};
    use crate::protocol::CodecChoice;

    #[test]
    fn singlet_zz_is_exactly_anticorrelated() {
        let mut cfg = ExperimentConfig::new(2);
        cfg.state = StateSpec::Singlet;
        cfg.observables = ObservableSpec::Explicit(vec![ObservablePair {
            alice: TracelessBinaryObservable::pauli_z(),
            bob: TracelessBinaryObservable::pauli_z(),
        }]);
        cfg.trials = 20_000;
        let rep = estimate_joint_correlation(&cfg).unwrap();
        let s = &rep.instances[0].stats;
        assert_eq!(s.correlation_hat, -1.0);
        assert_eq!(s.correlation_stderr, 0.0);
        assert_eq!(s.z_score, 0.0);
        assert!(rep.pass);
    }

    #[test]
    fn report_is_reproducible_across_thread_counts() {
        let mut cfg = ExperimentConfig::new(2);
        cfg.observables = ObservableSpec::Random { pairs: 2 };
        cfg.trials = 3_000;
        cfg.seed = 11;
        let one = crate::harness::with_jobs(Some(1), || estimate_joint_correlation(&cfg)).unwrap();
        let many = crate::harness::with_jobs(Some(4), || estimate_joint_correlation(&cfg)).unwrap();
        assert_eq!(
            serde_json::to_string(&one).unwrap(),
            serde_json::to_string(&many).unwrap()
        );
    }

    #[test]
    fn non_maximal_state_flags_marginals() {
        let mut cfg = ExperimentConfig::new(2);
        cfg.state = StateSpec::Schmidt(vec![0.9, 0.19f64.sqrt()]);
        cfg.trials = 100;
        let rep = estimate_joint_correlation(&cfg).unwrap();
        assert!(!rep.instances[0].stats.marginals_simulated);
        cfg.state = StateSpec::Bell;
        let rep = estimate_joint_correlation(&cfg).unwrap();
        assert!(rep.instances[0].stats.marginals_simulated);
    }

    #[test]
    fn postselected_mode_reports_success_rate() {
        let mut cfg = ExperimentConfig::new(2);
        cfg.mode = Mode::Postselected;
        cfg.trials = 20_000;
        cfg.codec = CodecChoice::GolombTuned;
        let rep = estimate_joint_correlation(&cfg).unwrap();
        let ps = rep.instances[0].stats.postselection.clone().unwrap();
        assert_eq!(ps.attempts, 20_000);
        assert!((ps.success_rate - 0.2910).abs() < 0.015);
        assert_eq!(rep.instances[0].stats.mean_message_bits, 0.0);
    }
}
