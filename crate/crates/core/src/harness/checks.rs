use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Mode, ObservablePair, ObservableSpec, StateSpec};
use super::experiment::{aggregate, build_instance, run_trials, Instance, Z_LIMIT};
use super::stats::{
    geometric_fit, mean_and_stderr, outcome_table_fit, z_score, ChiSquareTest, Estimate,
};
use super::HarnessError;
use crate::oracle::{
    joint_expectation, joint_expectation_raw, maximally_entangled, random_pure_state, random_tbo,
    tsirelson_embed, PureBipartiteState, Side, TracelessBinaryObservable,
};
use crate::protocol::{derive_seed, CodecChoice};
use crate::sphere::{
    acceptance_bounds, acceptance_probability, geometric_entropy, half_gamma_ratio,
    normalization_r, surface_area, uniform_sample, UnitVector,
};

/// Relative tolerance for Monte-Carlo integrals of `|a·λ|`.
pub const INTEGRAL_REL_TOL: f64 = 0.01;
/// Significance level of every χ² test.
pub const CHI_SQUARE_ALPHA: f64 = 0.01;
/// Allowed gap between plug-in and analytic message entropy, in bits.
pub const ENTROPY_GAP_BITS: f64 = 0.1;
/// Maximum spread of `mean bits − log₂ d` across a dimension sweep.
pub const EXCESS_SPREAD_BITS: f64 = 1.5;
/// Additive slack over `½ log₂ n` allowed for the mean encoded length.
pub const MESSAGE_LENGTH_SLACK_BITS: f64 = 4.0;
/// Additive slack over `½ log₂ n` for the analytic message entropy.
pub const ENTROPY_SLACK_BITS: f64 = 2.5;
/// Tolerance of the embedding identity.
pub const EMBEDDING_TOL: f64 = 1e-10;

const CHUNK: u64 = 8_192;

/// Monte-Carlo mean of `|a·λ|` over uniform `λ` on `S_n`, with `a` drawn
/// from the seed. Parallel over fixed-size chunks with derived seeds.
pub fn mean_abs_projection(n: usize, samples: u64, seed: u64) -> Result<Estimate, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0]));
    let a: UnitVector<f64> = uniform_sample(n, &mut rng)?;
    let chunks = samples.div_ceil(CHUNK);
    let values: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[1, c]));
            let len = CHUNK.min(samples - c * CHUNK);
            (0..len)
                .map(|_| uniform_sample(n, &mut rng).map(|l| a.dot(&l).abs()))
                .collect::<Result<Vec<f64>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let flat: Vec<f64> = values.into_iter().flatten().collect();
    Ok(mean_and_stderr(&flat))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationCheck {
    pub n: usize,
    pub samples: u64,
    pub seed: u64,
    pub analytic: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub relative_error: f64,
    pub tolerance: f64,
    /// `[√(1/(2πn)) S_n, √(2/(πn)) S_n]`.
    pub bracket: (f64, f64),
    pub within_bracket: bool,
    pub pass: bool,
}

/// Compares `S_n · mean|a·λ|` with `R_n = (2/n) S_{n−1}`.
pub fn verify_normalization_lemma(
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<NormalizationCheck, HarnessError> {
    let analytic = normalization_r::<f64>(n)?;
    let area = surface_area::<f64>(n);
    let mc = mean_abs_projection(n, samples, seed)?;
    let estimate = area * mc.mean;
    let (lo, hi) = acceptance_bounds::<f64>(n)?;
    let bracket = (lo * area, hi * area);
    let relative_error = (estimate - analytic).abs() / analytic;
    let within_bracket = bracket.0 <= estimate && estimate <= bracket.1;
    Ok(NormalizationCheck {
        n,
        samples,
        seed,
        analytic,
        estimate,
        stderr: area * mc.stderr,
        relative_error,
        tolerance: INTEGRAL_REL_TOL,
        bracket,
        within_bracket,
        pass: relative_error <= INTEGRAL_REL_TOL && within_bracket,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceCheck {
    pub n: usize,
    pub analytic: f64,
    pub monte_carlo: f64,
    pub stderr: f64,
    pub relative_error: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub pass: bool,
}

/// Gamma-ratio acceptance probability against the Monte-Carlo mean of `|a·λ|`.
pub fn verify_acceptance_probability(
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<AcceptanceCheck, HarnessError> {
    let analytic = acceptance_probability::<f64>(n)?;
    let mc = mean_abs_projection(n, samples, seed)?;
    let (lower_bound, upper_bound) = acceptance_bounds::<f64>(n)?;
    let relative_error = (mc.mean - analytic).abs() / analytic;
    Ok(AcceptanceCheck {
        n,
        analytic,
        monte_carlo: mc.mean,
        stderr: mc.stderr,
        relative_error,
        lower_bound,
        upper_bound,
        pass: relative_error <= INTEGRAL_REL_TOL
            && lower_bound <= analytic
            && analytic <= upper_bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub n: usize,
    pub acceptance_probability: f64,
    pub lower: f64,
    pub upper: f64,
    pub gamma_ratio: f64,
    pub gamma_ratio_lower: f64,
    pub gamma_ratio_upper: f64,
    pub entropy_bits: f64,
    pub entropy_bound: f64,
    pub holds: bool,
}

/// For each `n`: `√(1/(2πn)) ≤ p ≤ √(2/(πn))`, `½√(n/2) ≤ Γ((n+1)/2)/Γ(n/2) ≤ √(n/2)`
/// and `H(p) ≤ ½ log₂ n + 2.5` (the entropy clause only from `n = 7`, the
/// smallest protocol dimension).
pub fn acceptance_bound_sweep(
    ns: impl IntoIterator<Item = usize>,
) -> Result<Vec<BoundRow>, HarnessError> {
    ns.into_iter()
        .map(|n| {
            let p = acceptance_probability::<f64>(n)?;
            let (lower, upper) = acceptance_bounds::<f64>(n)?;
            let ratio = half_gamma_ratio::<f64>(n)?;
            let half_n = (n as f64 / 2.0).sqrt();
            let entropy_bits = geometric_entropy(p)?;
            let entropy_bound = 0.5 * (n as f64).log2() + ENTROPY_SLACK_BITS;
            let holds = lower <= p
                && p <= upper
                && 0.5 * half_n <= ratio
                && ratio <= half_n
                && (n < 7 || entropy_bits <= entropy_bound);
            Ok(BoundRow {
                n,
                acceptance_probability: p,
                lower,
                upper,
                gamma_ratio: ratio,
                gamma_ratio_lower: 0.5 * half_n,
                gamma_ratio_upper: half_n,
                entropy_bits,
                entropy_bound,
                holds,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageLawCheck {
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub acceptance_probability: f64,
    pub expected_mean_iterations: f64,
    pub mean_iterations: f64,
    pub iterations_stderr: f64,
    pub iterations_z_score: f64,
    pub chi_square: ChiSquareTest,
    pub empirical_entropy: f64,
    pub analytic_entropy: f64,
    pub entropy_gap: f64,
    pub pass: bool,
}

/// Runs the protocol on random inputs on `S_n` and fits the accepted-index
/// histogram to the geometric law.
pub fn verify_message_distribution(
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<MessageLawCheck, HarnessError> {
    let mut cfg = ExperimentConfig::new(2);
    cfg.mode = Mode::AbstractVectors;
    cfg.n = Some(n);
    cfg.seed = seed;
    cfg.trials = trials;
    cfg.codec = CodecChoice::GolombTuned;
    let inst = build_instance(&cfg, 0)?;
    let outcomes = run_trials(&inst, Mode::AbstractVectors, cfg.codec.resolve(n), trials)?;
    let stats = aggregate(&inst, &outcomes, n, Mode::AbstractVectors, true)?;
    let p = stats.acceptance_probability;
    let chi = geometric_fit(&stats.histogram(), p, CHI_SQUARE_ALPHA);
    let z = z_score(stats.mean_iterations, 1.0 / p, stats.iterations_stderr);
    let gap = (stats.empirical_entropy - stats.analytic_entropy).abs();
    Ok(MessageLawCheck {
        n,
        trials,
        seed,
        acceptance_probability: p,
        expected_mean_iterations: 1.0 / p,
        mean_iterations: stats.mean_iterations,
        iterations_stderr: stats.iterations_stderr,
        iterations_z_score: z,
        pass: chi.pass && gap <= ENTROPY_GAP_BITS,
        chi_square: chi,
        empirical_entropy: stats.empirical_entropy,
        analytic_entropy: stats.analytic_entropy,
        entropy_gap: gap,
    })
}

/// One row of the dimension-scaling table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub d: usize,
    pub n: usize,
    pub codec: String,
    pub trials: u64,
    pub acceptance_probability: f64,
    pub expected_iterations: f64,
    pub mean_iterations: f64,
    pub iterations_stderr: f64,
    pub mean_message_bits: f64,
    pub message_bits_stderr: f64,
    pub empirical_entropy: f64,
    pub analytic_entropy: f64,
    /// `mean_message_bits − log₂ d`.
    pub excess_bits: f64,
    /// `½ log₂ n + 4`.
    pub length_bound: f64,
    pub within_length_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub seed: u64,
    pub trials_per_d: u64,
    pub codec: String,
    pub rows: Vec<ScanRow>,
    pub excess_spread: f64,
    pub spread_limit: f64,
    pub pass: bool,
}

/// Message cost as a function of `d`, using a maximally entangled state and
/// one random observable pair per dimension.
pub fn scan_dimension(
    d_list: &[usize],
    trials_per_d: u64,
    seed: u64,
    codec: CodecChoice,
) -> Result<ScanReport, HarnessError> {
    if d_list.is_empty() {
        return Err(HarnessError::ConfigInvalid("empty dimension list".into()));
    }
    let mut rows = Vec::with_capacity(d_list.len());
    for &d in d_list {
        let mut cfg = ExperimentConfig::new(d);
        cfg.seed = derive_seed(seed, &[d as u64]);
        cfg.trials = trials_per_d;
        cfg.codec = codec;
        cfg.validate()?;
        let n = cfg.sphere_dim();
        let resolved = codec.resolve(n);
        let inst = build_instance(&cfg, 0)?;
        let outcomes = run_trials(&inst, Mode::Protocol, resolved, trials_per_d)?;
        let s = aggregate(&inst, &outcomes, n, Mode::Protocol, true)?;
        let length_bound = 0.5 * (n as f64).log2() + MESSAGE_LENGTH_SLACK_BITS;
        rows.push(ScanRow {
            d,
            n,
            codec: resolved.id(),
            trials: trials_per_d,
            acceptance_probability: s.acceptance_probability,
            expected_iterations: 1.0 / s.acceptance_probability,
            mean_iterations: s.mean_iterations,
            iterations_stderr: s.iterations_stderr,
            mean_message_bits: s.mean_message_bits,
            message_bits_stderr: s.message_bits_stderr,
            empirical_entropy: s.empirical_entropy,
            analytic_entropy: s.analytic_entropy,
            excess_bits: s.mean_message_bits - (d as f64).log2(),
            length_bound,
            within_length_bound: s.mean_message_bits <= length_bound,
        });
    }
    let (lo, hi) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.excess_bits), hi.max(r.excess_bits))
        });
    let excess_spread = hi - lo;
    Ok(ScanReport {
        seed,
        trials_per_d,
        codec: codec.to_string(),
        pass: excess_spread <= EXCESS_SPREAD_BITS && rows.iter().all(|r| r.within_length_bound),
        rows,
        excess_spread,
        spread_limit: EXCESS_SPREAD_BITS,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionCheck {
    pub d: usize,
    pub trials: u64,
    pub seed: u64,
    pub correlation: f64,
    /// `[[(+,+), (+,−)], [(−,+), (−,−)]]`.
    pub counts: [[u64; 2]; 2],
    pub expected_probabilities: [[f64; 2]; 2],
    pub chi_square: ChiSquareTest,
    pub pass: bool,
}

/// Compares the 2×2 outcome table with `(1 + αβ c)/4`, `c = ⟨A⊗B⟩`.
/// Only meaningful for maximally entangled states, where both marginals
/// vanish.
pub fn full_distribution_check(
    state: &PureBipartiteState<f64>,
    alice: &TracelessBinaryObservable<f64>,
    bob: &TracelessBinaryObservable<f64>,
    trials: u64,
    seed: u64,
) -> Result<DistributionCheck, HarnessError> {
    if !state.is_maximally_entangled(1e-9) {
        return Err(HarnessError::NotMaximallyEntangled);
    }
    let correlation = joint_expectation(state, alice, bob)?;
    let inst = Instance {
        index: 0,
        state: Some(state.clone()),
        alice: Some(alice.clone()),
        bob: Some(bob.clone()),
        a: tsirelson_embed(state, alice, Side::Alice)?,
        b: tsirelson_embed(state, bob, Side::Bob)?,
        oracle_correlation: correlation,
        oracle_marginal_a: 0.0,
        oracle_marginal_b: 0.0,
        seed,
    };
    let n = inst.a.sphere_dim();
    let outcomes = run_trials(
        &inst,
        Mode::Protocol,
        CodecChoice::GolombTuned.resolve(n),
        trials,
    )?;
    let stats = aggregate(&inst, &outcomes, n, Mode::Protocol, true)?;
    let chi = outcome_table_fit(&stats.outcome_counts, correlation, CHI_SQUARE_ALPHA);
    let cell = |same: bool| (1.0 + if same { correlation } else { -correlation }) / 4.0;
    Ok(DistributionCheck {
        d: state.dim(),
        trials,
        seed,
        correlation,
        counts: stats.outcome_counts,
        expected_probabilities: [[cell(true), cell(false)], [cell(false), cell(true)]],
        pass: chi.pass,
        chi_square: chi,
    })
}

/// [`full_distribution_check`] on `pairs` random observable pairs measured
/// on the maximally entangled state of dimension `d`.
pub fn full_distribution_sweep(
    d: usize,
    pairs: usize,
    trials: u64,
    seed: u64,
) -> Result<Vec<DistributionCheck>, HarnessError> {
    let state = maximally_entangled::<f64>(d)?;
    (0..pairs)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[d as u64, k as u64]));
            let alice = random_tbo(d, &mut rng)?;
            let bob = random_tbo(d, &mut rng)?;
            full_distribution_check(
                &state,
                &alice,
                &bob,
                trials,
                derive_seed(seed, &[d as u64, k as u64, 1]),
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingCheck {
    pub d: usize,
    pub triples: usize,
    pub seed: u64,
    pub max_dot_error: f64,
    pub max_norm_error: f64,
    pub max_imaginary_residue: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// `|ν_A(A)·ν_B(B) − ⟨ψ|A⊗B|ψ⟩|` over random (state, A, B) triples.
pub fn verify_embedding(
    d: usize,
    triples: usize,
    seed: u64,
) -> Result<EmbeddingCheck, HarnessError> {
    let results: Vec<(f64, f64, f64)> = (0..triples)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[d as u64, k as u64]));
            let state = random_pure_state::<f64, _>(d, &mut rng)?;
            let alice = random_tbo(d, &mut rng)?;
            let bob = random_tbo(d, &mut rng)?;
            let a = tsirelson_embed(&state, &alice, Side::Alice)?;
            let b = tsirelson_embed(&state, &bob, Side::Bob)?;
            let raw = joint_expectation_raw(&state, &alice, &bob)?;
            let dot_err = (a.dot(&b) - raw.re).abs();
            let norm_err = (a.norm() - 1.0).abs().max((b.norm() - 1.0).abs());
            Ok((dot_err, norm_err, raw.im.abs()))
        })
        .collect::<Result<_, HarnessError>>()?;
    let max = |f: fn(&(f64, f64, f64)) -> f64| results.iter().map(f).fold(0.0, f64::max);
    let (dot, norm, imag) = (max(|r| r.0), max(|r| r.1), max(|r| r.2));
    Ok(EmbeddingCheck {
        d,
        triples,
        seed,
        max_dot_error: dot,
        max_norm_error: norm,
        max_imaginary_residue: imag,
        tolerance: EMBEDDING_TOL,
        pass: dot <= EMBEDDING_TOL && norm <= EMBEDDING_TOL && imag <= EMBEDDING_TOL,
    })
}

/// Verification suites exposed by the command-line front end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// Normalization integral of `|a·λ|` and the acceptance probability.
    #[serde(rename = "lemma1", alias = "normalization")]
    Normalization,
    Bounds,
    Distribution,
    Embedding,
    All,
}

impl FromStr for Suite {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lemma1" | "normalization" => Ok(Suite::Normalization),
            "bounds" => Ok(Suite::Bounds),
            "distribution" => Ok(Suite::Distribution),
            "embedding" => Ok(Suite::Embedding),
            "all" => Ok(Suite::All),
            other => Err(HarnessError::ConfigInvalid(format!(
                "unknown suite `{other}`"
            ))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Normalization => "lemma1",
            Suite::Bounds => "bounds",
            Suite::Distribution => "distribution",
            Suite::Embedding => "embedding",
            Suite::All => "all",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Sphere dimensions for the normalization suite.
    pub ns: Vec<usize>,
    /// Monte-Carlo samples per normalization integral.
    pub samples: u64,
    /// Largest `n` in the bounds sweep.
    pub max_n: usize,
    pub d: usize,
    /// Observable pairs (distribution) or random triples (embedding).
    pub pairs: usize,
    /// Protocol runs per pair in the distribution suite.
    pub trials: u64,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            ns: vec![1, 2, 3, 7, 17, 31],
            samples: 1_000_000,
            max_n: 512,
            d: 2,
            pairs: 20,
            trials: 100_000,
            seed: 0,
        }
    }
}

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckLine {
    pub check: String,
    /// Stable identifier of the property checked.
    pub claim: String,
    pub computed: f64,
    pub expected: f64,
    pub tolerance: String,
    pub pass: bool,
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<34} [{}] computed {} vs expected {} ({}) {}",
            self.check,
            self.claim,
            Num(self.computed),
            Num(self.expected),
            self.tolerance,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

struct Num(f64);

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 != 0.0 && self.0.abs() < 1e-3 {
            write!(f, "{:.3e}", self.0)
        } else {
            write!(f, "{:.6}", self.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub options: VerifyOptions,
    pub lines: Vec<CheckLine>,
    pub pass: bool,
}

fn lemma_lines(opts: &VerifyOptions) -> Result<Vec<CheckLine>, HarnessError> {
    let mut lines = Vec::new();
    for &n in &opts.ns {
        let c =
            verify_normalization_lemma(n, opts.samples, derive_seed(opts.seed, &[10, n as u64]))?;
        lines.push(CheckLine {
            check: format!("normalization R_{n}"),
            claim: "normalization-integral".into(),
            computed: c.estimate,
            expected: c.analytic,
            tolerance: format!("MC rel.err {:.3}% <= 1%", 100.0 * c.relative_error),
            pass: c.pass,
        });
        let a = verify_acceptance_probability(
            n,
            opts.samples,
            derive_seed(opts.seed, &[11, n as u64]),
        )?;
        lines.push(CheckLine {
            check: format!("acceptance p(ok) n={n}"),
            claim: "acceptance-probability".into(),
            computed: a.monte_carlo,
            expected: a.analytic,
            tolerance: format!("MC rel.err {:.3}% <= 1%", 100.0 * a.relative_error),
            pass: a.pass,
        });
    }
    Ok(lines)
}

fn bounds_lines(opts: &VerifyOptions) -> Result<Vec<CheckLine>, HarnessError> {
    let rows = acceptance_bound_sweep(1..=opts.max_n)?;
    let failures = rows.iter().filter(|r| !r.holds).count();
    let worst_upper = rows
        .iter()
        .map(|r| r.acceptance_probability / r.upper)
        .fold(0.0, f64::max);
    let worst_entropy = rows
        .iter()
        .filter(|r| r.n >= 7)
        .map(|r| r.entropy_bits - (r.entropy_bound - ENTROPY_SLACK_BITS))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(vec![
        CheckLine {
            check: format!("acceptance bounds n=1..{}", opts.max_n),
            claim: "acceptance-bounds".into(),
            computed: failures as f64,
            expected: 0.0,
            tolerance: format!("violations; max p/upper = {worst_upper:.6}"),
            pass: failures == 0,
        },
        CheckLine {
            check: "entropy excess over log2(n)/2".into(),
            claim: "message-entropy".into(),
            computed: worst_entropy,
            expected: ENTROPY_SLACK_BITS,
            tolerance: "computed <= expected".into(),
            pass: worst_entropy <= ENTROPY_SLACK_BITS,
        },
    ])
}

fn distribution_lines(opts: &VerifyOptions) -> Result<Vec<CheckLine>, HarnessError> {
    let checks = full_distribution_sweep(
        opts.d,
        opts.pairs,
        opts.trials,
        derive_seed(opts.seed, &[12]),
    )?;
    let mut lines: Vec<CheckLine> = checks
        .iter()
        .enumerate()
        .map(|(k, c)| CheckLine {
            check: format!("outcome table d={} pair {k}", c.d),
            claim: "full-distribution".into(),
            computed: c.chi_square.statistic,
            expected: c.chi_square.critical,
            tolerance: format!("chi2 dof {} at 1%", c.chi_square.dof),
            pass: c.pass,
        })
        .collect();
    let law = verify_message_distribution(
        2 * opts.d * opts.d - 1,
        opts.trials,
        derive_seed(opts.seed, &[13]),
    )?;
    lines.push(CheckLine {
        check: format!("geometric message law n={}", law.n),
        claim: "geometric-message-law".into(),
        computed: law.chi_square.statistic,
        expected: law.chi_square.critical,
        tolerance: format!("chi2 dof {} at 1%", law.chi_square.dof),
        pass: law.chi_square.pass,
    });
    lines.push(CheckLine {
        check: format!("plug-in message entropy n={}", law.n),
        claim: "message-entropy".into(),
        computed: law.empirical_entropy,
        expected: law.analytic_entropy,
        tolerance: format!("|gap| {:.4} <= {ENTROPY_GAP_BITS} bit", law.entropy_gap),
        pass: law.entropy_gap <= ENTROPY_GAP_BITS,
    });
    lines.push(CheckLine {
        check: format!("mean iterations n={}", law.n),
        claim: "acceptance-probability".into(),
        computed: law.mean_iterations,
        expected: law.expected_mean_iterations,
        tolerance: format!("|z| {:.2} <= {Z_LIMIT}", law.iterations_z_score.abs()),
        pass: law.iterations_z_score.abs() <= Z_LIMIT,
    });
    Ok(lines)
}

fn embedding_lines(opts: &VerifyOptions) -> Result<Vec<CheckLine>, HarnessError> {
    let c = verify_embedding(opts.d, opts.pairs, derive_seed(opts.seed, &[14]))?;
    Ok(vec![
        CheckLine {
            check: format!("embedding dot product d={}", c.d),
            claim: "embedding".into(),
            computed: c.max_dot_error,
            expected: 0.0,
            tolerance: format!("max error <= {EMBEDDING_TOL:e} over {} triples", c.triples),
            pass: c.max_dot_error <= EMBEDDING_TOL && c.max_imaginary_residue <= EMBEDDING_TOL,
        },
        CheckLine {
            check: format!("embedding unit norm d={}", c.d),
            claim: "embedding".into(),
            computed: c.max_norm_error,
            expected: 0.0,
            tolerance: format!("max error <= {EMBEDDING_TOL:e}"),
            pass: c.max_norm_error <= EMBEDDING_TOL,
        },
    ])
}

pub fn run_verify_suite(suite: Suite, opts: &VerifyOptions) -> Result<VerifyReport, HarnessError> {
    if opts.d < 2 || opts.d % 2 == 1 {
        return Err(HarnessError::ConfigInvalid(format!(
            "d = {} must be even and at least 2",
            opts.d
        )));
    }
    if opts.ns.contains(&0) || opts.max_n == 0 {
        return Err(HarnessError::ConfigInvalid(
            "sphere dimensions must be at least 1".into(),
        ));
    }
    let mut lines = Vec::new();
    if matches!(suite, Suite::Normalization | Suite::All) {
        lines.extend(lemma_lines(opts)?);
    }
    if matches!(suite, Suite::Bounds | Suite::All) {
        lines.extend(bounds_lines(opts)?);
    }
    if matches!(suite, Suite::Embedding | Suite::All) {
        lines.extend(embedding_lines(opts)?);
    }
    if matches!(suite, Suite::Distribution | Suite::All) {
        lines.extend(distribution_lines(opts)?);
    }
    Ok(VerifyReport {
        suite,
        options: opts.clone(),
        pass: lines.iter().all(|l| l.pass),
        lines,
    })
}

/// Runs a post-selected experiment with the given observables and reports
/// the per-instance statistics; shared by tests and the CLI.
pub fn postselection_experiment(
    d: usize,
    pair: Option<ObservablePair>,
    trials: u64,
    seed: u64,
) -> Result<super::experiment::ExperimentReport, HarnessError> {
    let mut cfg = ExperimentConfig::new(d);
    cfg.mode = Mode::Postselected;
    cfg.trials = trials;
    cfg.seed = seed;
    cfg.state = StateSpec::Random;
    if let Some(p) = pair {
        cfg.observables = ObservableSpec::Explicit(vec![p]);
        cfg.state = StateSpec::Bell;
    }
    super::experiment::estimate_joint_correlation(&cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_low_dimensions() {
        let c = verify_normalization_lemma(1, 200_000, 1).unwrap();
        assert!((c.analytic - 4.0).abs() < 1e-12);
        assert!(c.relative_error < 0.01, "{c:?}");
        let c = verify_normalization_lemma(2, 200_000, 2).unwrap();
        assert!((c.analytic - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!(c.pass);
    }

    #[test]
    fn normalization_bracket_at_n31() {
        let c = verify_normalization_lemma(31, 100_000, 3).unwrap();
        assert!(c.within_bracket, "{c:?}");
        assert!(c.bracket.0 < c.analytic && c.analytic < c.bracket.1);
    }

    #[test]
    fn bounds_hold_on_small_sweep() {
        let rows = acceptance_bound_sweep(1..=64).unwrap();
        assert!(rows.iter().all(|r| r.holds));
    }

    #[test]
    fn embedding_check_small() {
        let c = verify_embedding(2, 50, 5).unwrap();
        assert!(c.pass, "{c:?}");
    }

    #[test]
    fn distribution_guard() {
        let st = crate::oracle::schmidt_state(&[0.9f64, 0.1]).unwrap();
        let z = TracelessBinaryObservable::pauli_z();
        assert!(matches!(
            full_distribution_check(&st, &z, &z, 10, 0),
            Err(HarnessError::NotMaximallyEntangled)
        ));
    }

    #[test]
    fn perfectly_correlated_table() {
        let st = maximally_entangled::<f64>(2).unwrap();
        let z = TracelessBinaryObservable::pauli_z();
        let c = full_distribution_check(&st, &z, &z, 5_000, 3).unwrap();
        assert_eq!(c.counts[0][1] + c.counts[1][0], 0);
        for (row, want) in c
            .expected_probabilities
            .iter()
            .zip([[0.5, 0.0], [0.0, 0.5]])
        {
            for (got, want) in row.iter().zip(want) {
                assert!((got - want).abs() < 1e-12);
            }
        }
        assert!(c.pass);
    }

    #[test]
    fn orthogonal_table_is_uniform() {
        let st = maximally_entangled::<f64>(2).unwrap();
        let c = full_distribution_check(
            &st,
            &TracelessBinaryObservable::pauli_z(),
            &TracelessBinaryObservable::pauli_x(),
            40_000,
            4,
        )
        .unwrap();
        assert!(c.correlation.abs() < 1e-15);
        let n = 40_000.0;
        let se = (0.25f64 * 0.75 / n).sqrt();
        for cell in c.counts.iter().flatten() {
            assert!((*cell as f64 / n - 0.25).abs() < 3.0 * se);
        }
    }

    #[test]
    fn suite_names() {
        assert_eq!("lemma1".parse::<Suite>().unwrap(), Suite::Normalization);
        assert!("nope".parse::<Suite>().is_err());
    }
}
