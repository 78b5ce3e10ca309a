use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use proptest::prelude::*;
use qudit_sim::oracle::{
    joint_expectation, joint_expectation_raw, marginal_expectation, maximally_entangled,
    random_pure_state, random_tbo, tsirelson_embed, validate_tbo, Side, Tolerances,
    TracelessBinaryObservable,
};
use qudit_sim::protocol::{
    bob_output, derive_seed, run_protocol, Codec, SharedRandomness, Transcript,
};
use qudit_sim::sphere::{acceptance_probability, uniform_sample, RejectionSampler, UnitVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn to_nalgebra(t: &TracelessBinaryObservable<f64>) -> DMatrix<Complex<f64>> {
    let d = t.dim();
    DMatrix::from_fn(d, d, |r, c| t.matrix().get(r, c))
}

#[test]
fn random_tbo_valid_for_a_thousand_seeds() {
    let tol = Tolerances::standard();
    for d in [2usize, 4, 6] {
        for seed in 0..1000u64 {
            let t = random_tbo::<f64, _>(d, &mut rng(derive_seed(seed, &[d as u64]))).unwrap();
            validate_tbo(t.matrix().clone(), &tol).unwrap();
        }
    }
}

#[test]
fn random_tbo_spectrum_is_balanced_plus_minus_one() {
    for d in [2usize, 4, 6] {
        for seed in 0..50u64 {
            let t = random_tbo::<f64, _>(d, &mut rng(seed)).unwrap();
            let mut ev: Vec<f64> = to_nalgebra(&t)
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .collect();
            ev.sort_by(f64::total_cmp);
            for (k, e) in ev.iter().enumerate() {
                let want = if k < d / 2 { -1.0 } else { 1.0 };
                assert!(
                    (e - want).abs() < 1e-9,
                    "d={d} seed={seed} eigenvalues {ev:?}"
                );
            }
        }
    }
}

#[test]
fn random_tbo_is_centred() {
    // Haar conjugation of a traceless diagonal averages to zero entrywise.
    let d = 4;
    let draws = 4000;
    let mut sum = DMatrix::<Complex<f64>>::zeros(d, d);
    let mut r = rng(99);
    for _ in 0..draws {
        sum += to_nalgebra(&random_tbo::<f64, _>(d, &mut r).unwrap());
    }
    let mean = sum / Complex::new(draws as f64, 0.0);
    // Each entry has variance at most 1/d per draw.
    let bound = 5.0 / ((d * draws) as f64).sqrt();
    assert!(mean.iter().all(|z| z.norm() < bound), "{mean}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn embedding_reproduces_correlation(seed in any::<u64>(), k in 1usize..=3) {
        let d = 2 * k;
        let mut r = rng(seed);
        let psi = random_pure_state::<f64, _>(d, &mut r).unwrap();
        let a = random_tbo(d, &mut r).unwrap();
        let b = random_tbo(d, &mut r).unwrap();
        let raw = joint_expectation_raw(&psi, &a, &b).unwrap();
        let c = joint_expectation(&psi, &a, &b).unwrap();
        let va = tsirelson_embed(&psi, &a, Side::Alice).unwrap();
        let vb = tsirelson_embed(&psi, &b, Side::Bob).unwrap();
        prop_assert_eq!(va.sphere_dim(), 2 * d * d - 1);
        prop_assert!((va.dot(&vb) - c).abs() <= 1e-10);
        prop_assert!((-1.0..=1.0).contains(&c));
        prop_assert!(raw.im.abs() <= 1e-10);
        prop_assert!((va.norm() - 1.0).abs() <= 1e-10 && (vb.norm() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn maximally_entangled_marginals_vanish(seed in any::<u64>(), k in 1usize..=3) {
        let d = 2 * k;
        let psi = maximally_entangled::<f64>(d).unwrap();
        let t = random_tbo(d, &mut rng(seed)).unwrap();
        prop_assert!(marginal_expectation(&psi, &t, Side::Alice).unwrap().abs() <= 1e-10);
        prop_assert!(marginal_expectation(&psi, &t, Side::Bob).unwrap().abs() <= 1e-10);
    }

    #[test]
    fn rejection_sampling_is_rotation_covariant(seed in any::<u64>(), n in 1usize..12) {
        let mut r = rng(seed);
        let dim = n + 1;
        let q = DMatrix::<f64>::from_fn(dim, dim, |_, _| StandardNormal.sample(&mut r)).qr().q();
        let a = uniform_sample::<f64, _>(n, &mut r).unwrap();
        let qa = UnitVector::new((&q * DVector::from_column_slice(a.coords())).iter().copied().collect()).unwrap();
        let gaussians: Vec<DVector<f64>> =
            (0..2000).map(|_| DVector::from_fn(dim, |_, _| StandardNormal.sample(&mut r))).collect();
        let coins: Vec<f64> = (0..2000).map(|_| rand::Rng::random(&mut r)).collect();
        let run = |input: &UnitVector<f64>, rotate: bool| {
            let mut c = coins.iter().copied();
            RejectionSampler::default().sample_with(
                input,
                |k| {
                    let g = &gaussians[(k - 1) as usize];
                    let g = if rotate { &q * g } else { g.clone() };
                    UnitVector::from_unnormalized(g.iter().copied().collect())
                },
                || c.next().expect("enough coins"),
            )
        };
        let plain = run(&a, false).unwrap();
        let rotated = run(&qa, true).unwrap();
        prop_assert_eq!(plain.iterations, rotated.iterations);
        let expected = &q * DVector::from_column_slice(plain.sample.coords());
        for (x, y) in expected.iter().zip(rotated.sample.coords()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn transcripts_are_deterministic(seed in any::<u64>(), n in 1usize..40) {
        let mut r = rng(seed ^ 0xabc);
        let a = uniform_sample::<f64, _>(n, &mut r).unwrap();
        let b = uniform_sample::<f64, _>(n, &mut r).unwrap();
        let codec = Codec::golomb_for_dimension(n);
        let t1 = run_protocol(&a, &b, &SharedRandomness::new(seed), codec).unwrap();
        let t2 = run_protocol(&a, &b, &SharedRandomness::new(seed), codec).unwrap();
        prop_assert_eq!(t1.to_json_line(), t2.to_json_line());
        prop_assert_eq!(&t1, &t2);
    }

    #[test]
    fn bob_needs_only_seed_and_wire_bits(seed in any::<u64>(), n in 1usize..40) {
        let mut r = rng(seed ^ 0x5eed);
        let a = uniform_sample::<f64, _>(n, &mut r).unwrap();
        let b = uniform_sample::<f64, _>(n, &mut r).unwrap();
        let line = run_protocol(&a, &b, &SharedRandomness::new(seed), Codec::EliasGamma)
            .unwrap()
            .to_json_line();
        let wire = Transcript::from_json_line(&line).unwrap();
        let out = bob_output(&b, wire.seed, &wire.message_bits, Codec::EliasGamma).unwrap();
        prop_assert_eq!(out, wire.output_b);
    }
}

#[test]
fn iteration_mean_matches_inverse_acceptance() {
    for n in [7usize, 31] {
        let p: f64 = acceptance_probability(n).unwrap();
        let a = uniform_sample::<f64, _>(n, &mut rng(n as u64)).unwrap();
        let sampler = RejectionSampler::default();
        let mut r = rng(1000 + n as u64);
        let iters: Vec<f64> = (0..100_000)
            .map(|_| sampler.sample(&a, &mut r).unwrap().iterations as f64)
            .collect();
        let mean = iters.iter().sum::<f64>() / iters.len() as f64;
        let var = iters.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (iters.len() - 1) as f64;
        let se = (var / iters.len() as f64).sqrt();
        assert!(
            (mean - 1.0 / p).abs() <= 3.0 * se,
            "n={n}: {mean} vs {}",
            1.0 / p
        );
    }
}

#[test]
fn biased_samples_follow_abs_projection_density() {
    // Under ρ_a the projection t = a·λ has density ∝ |t| (1 − t²)^{(n−2)/2};
    // at n = 2 that is |t| on [−1, 1], so |t|² is uniform on [0, 1].
    let n = 2;
    let a = uniform_sample::<f64, _>(n, &mut rng(5)).unwrap();
    let mut r = rng(6);
    let bins = 10usize;
    let draws = 50_000;
    let mut counts = vec![0f64; bins];
    for _ in 0..draws {
        let s = RejectionSampler::default()
            .sample(&a, &mut r)
            .unwrap()
            .sample;
        let t = a.dot(&s);
        counts[((t * t * bins as f64) as usize).min(bins - 1)] += 1.0;
    }
    let e = draws as f64 / bins as f64;
    let chi2: f64 = counts.iter().map(|o| (o - e).powi(2) / e).sum();
    // 1% critical value of χ² with 9 degrees of freedom.
    assert!(chi2 < 21.666, "chi2 = {chi2}");
}

#[test]
fn mean_message_length_is_logarithmic() {
    for d in 2usize..=8 {
        let n = 2 * d * d - 1;
        let codec = Codec::golomb_for_dimension(n);
        let mut r = rng(d as u64);
        let a = uniform_sample::<f64, _>(n, &mut r).unwrap();
        let b = uniform_sample::<f64, _>(n, &mut r).unwrap();
        let trials = 100_000u64;
        let total: usize = (0..trials)
            .map(|t| {
                run_protocol(
                    &a,
                    &b,
                    &SharedRandomness::new(derive_seed(d as u64, &[t])),
                    codec,
                )
                .unwrap()
                .message_bits
                .len()
            })
            .sum();
        let mean = total as f64 / trials as f64;
        assert!(
            mean <= 0.5 * (n as f64).log2() + 4.0,
            "d={d}: {mean} bits with {}",
            codec.id()
        );
    }
}

#[test]
fn alice_marginal_is_free_of_bobs_input() {
    // Alice's output never looks at b, so with shared seeds her outputs are
    // identical for every b and their mean stays at zero.
    let n = 7;
    let a = uniform_sample::<f64, _>(n, &mut rng(1)).unwrap();
    let trials = 2_000u64;
    let codec = Codec::golomb_for_dimension(n);
    let outputs_for = |b: &UnitVector<f64>| -> Vec<i8> {
        (0..trials)
            .map(|t| {
                run_protocol(&a, b, &SharedRandomness::new(t), codec)
                    .unwrap()
                    .output_a
                    .value()
            })
            .collect()
    };
    let mut r = rng(2);
    let reference = outputs_for(&uniform_sample(n, &mut r).unwrap());
    for _ in 0..100 {
        let b = uniform_sample(n, &mut r).unwrap();
        assert_eq!(outputs_for(&b), reference);
    }
    let mean = reference.iter().map(|&x| f64::from(x)).sum::<f64>() / trials as f64;
    assert!(mean.abs() <= 3.0 / (trials as f64).sqrt(), "{mean}");
}
