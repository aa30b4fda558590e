use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use passive_glrt::channel::{
    draw_scaled_coeffs, simulate_observation, Hypothesis, Observations, ScenarioConfig,
    TransmitterObservation,
};
use passive_glrt::detectors::{
    gram_lambda, pmr_glrt, pmr_rglrt_k, pmr_rglrt_uk, psl_glrt, psl_rglrt_k,
};
use passive_glrt::linalg::{gen_eig_max, hermitian_eig_max, rayleigh_quotient, ComplexMatrix};
use passive_glrt::montecarlo::{detection_rate, threshold_from_statistics};
use passive_glrt::waveform::{
    synthesize_u, Constellation, FormatModel, LinearModFormat, OfdmFormat, SignalFormat,
};

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), rows * cols).prop_map(move |v| {
        ComplexMatrix::from_row_major(
            rows,
            cols,
            v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect(),
        )
        .unwrap()
    })
}

fn vector(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n)
        .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
}

/// PSD `A`, PD `B` and a probe vector, all of size `n`.
fn pencil() -> impl Strategy<Value = (ComplexMatrix, ComplexMatrix, Vec<Complex64>)> {
    (2usize..=8).prop_flat_map(|n| {
        (matrix(n, n), matrix(n, n), vector(n)).prop_map(move |(x, y, w)| {
            let b = y
                .outer()
                .add(&ComplexMatrix::identity(n).scale(0.1))
                .unwrap();
            (x.outer(), b, w)
        })
    })
}

fn observations(n: usize, nr: usize, nt: usize) -> impl Strategy<Value = Observations> {
    prop::collection::vec((matrix(n, nr), matrix(n, nr)), nt).prop_map(|v| Observations {
        transmitters: v
            .into_iter()
            .map(|(s, r)| TransmitterObservation {
                phi_s: s,
                phi_r: Some(r),
                u: None,
            })
            .collect(),
    })
}

fn linear_model() -> FormatModel {
    FormatModel::new(SignalFormat::Linear(
        LinearModFormat::raised_cosine(0.22, 4, 3, 4, Constellation::bpsk()).unwrap(),
    ))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rayleigh_quotient_bounded_by_top_eigenvalue((a, b, w) in pencil()) {
        prop_assume!(w.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-6);
        let top = gen_eig_max(&a, &b).unwrap().lambda;
        prop_assert!(rayleigh_quotient(&a, &b, &w).unwrap() <= top + 1e-9);
    }

    #[test]
    fn generalized_eigenvalue_is_homogeneous((a, b, _) in pencil(), c in 0.01f64..100.0) {
        let base = gen_eig_max(&a, &b).unwrap().lambda;
        let scaled = gen_eig_max(&a.scale(c), &b).unwrap().lambda;
        prop_assert!((scaled - c * base).abs() <= 1e-10 * (c * base).max(1e-300));
    }

    #[test]
    fn identity_pencil_is_standard_problem((a, _, _) in pencil()) {
        let n = a.rows();
        let g = gen_eig_max(&a, &ComplexMatrix::identity(n)).unwrap().lambda;
        let h = hermitian_eig_max(&a).unwrap().lambda;
        prop_assert!((g - h).abs() <= 1e-10 * h.max(1.0));
    }

    #[test]
    fn eigenpair_residual_is_small((a, b, _) in pencil()) {
        let r = gen_eig_max(&a, &b).unwrap();
        let aw = a.matvec(&r.vector).unwrap();
        let bw = b.matvec(&r.vector).unwrap();
        let res = aw.iter().zip(&bw).map(|(x, y)| (x - y * r.lambda).norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(res <= 1e-10 * (a.norm() + r.lambda * b.norm()));
        // unit B-norm
        let bnorm: f64 = r.vector.iter().zip(&bw).map(|(x, y)| (x.conj() * y).re).sum();
        prop_assert!((bnorm - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gram_side_matches_outer_side(phi in (1usize..=6, 1usize..=4).prop_flat_map(|(n, m)| matrix(n, m))) {
        let small = gram_lambda(&phi).unwrap();
        let big = hermitian_eig_max(&phi.outer()).unwrap().lambda;
        prop_assert!((small - big).abs() <= 1e-10 * big.max(1.0));
    }

    #[test]
    fn synthesized_signal_has_energy_n(b in vector(7), c in 0.1f64..10.0) {
        let model = linear_model();
        prop_assume!(b.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3);
        let u = synthesize_u(model.g(), &b).unwrap().u;
        let n = model.sample_count() as f64;
        let energy: f64 = u.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((energy - n).abs() <= 1e-12 * n);
        // direction invariant to positive scaling of b
        let scaled: Vec<_> = b.iter().map(|z| z * c).collect();
        let v = synthesize_u(model.g(), &scaled).unwrap().u;
        for (x, y) in u.iter().zip(&v) {
            prop_assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn coefficient_scaling_is_exact(nr in 1usize..6, db in -30.0f64..30.0, sigma2 in 0.1f64..10.0, seed: u64) {
        let mu = draw_scaled_coeffs(nr, db, sigma2, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let ratio = mu.iter().map(|z| z.norm_sqr()).sum::<f64>() / (nr as f64 * sigma2);
        let target = 10f64.powf(db / 10.0);
        prop_assert!((ratio - target).abs() <= 1e-12 * target);
    }

    #[test]
    fn detector_bounds_and_scaling(obs in observations(12, 2, 2), c in 0.1f64..10.0) {
        let models = vec![linear_model(); 2];
        let ksf = pmr_rglrt_k(&models, &obs, 1.0).unwrap();
        let psk = psl_rglrt_k(&models, &obs, 1.0).unwrap();
        let uk = pmr_rglrt_uk(&models, &obs).unwrap();
        prop_assert!(ksf >= -1e-9);
        prop_assert!(psk >= -1e-9);
        prop_assert!(uk >= 1.0 - 1e-9);
        prop_assert!(pmr_glrt(&obs, 1.0).unwrap() >= -1e-9);
        prop_assert!(psk <= psl_glrt(&obs, 1.0).unwrap() * (1.0 + 1e-10) + 1e-12);

        let scaled = obs.scaled(c);
        let ksf_c = pmr_rglrt_k(&models, &scaled, 1.0).unwrap();
        prop_assert!((ksf_c - c * c * ksf).abs() <= 1e-9 * (c * c * ksf).abs().max(1.0));
        let uk_c = pmr_rglrt_uk(&models, &scaled).unwrap();
        prop_assert!((uk_c - uk).abs() <= 1e-10 * uk);
    }

    #[test]
    fn esr_is_sum_of_channel_energies(obs in observations(5, 3, 1)) {
        let t = &obs.transmitters[0];
        let expected = t.phi_s.norm_sqr() + t.phi_r.as_ref().unwrap().norm_sqr();
        prop_assert!((t.esr() - expected).abs() <= 1e-12 * expected.max(1.0));
    }

    #[test]
    fn threshold_rank_property(stats in prop::collection::vec(-1e3f64..1e3, 10..500), pf in 0.01f64..0.99) {
        prop_assume!((pf * stats.len() as f64).floor() >= 1.0);
        let t = threshold_from_statistics(&stats, pf).unwrap();
        let k = (pf * stats.len() as f64 * (1.0 + 1e-12)).floor() as usize;
        let at_or_above = stats.iter().filter(|&&x| x >= t).count();
        let above = stats.iter().filter(|&&x| x > t).count();
        prop_assert!(above < k && at_or_above >= k);
        let (pd, _) = detection_rate(&stats, t);
        prop_assert!(pd <= pf + 1e-12);
    }

    #[test]
    fn simulated_relaxed_k_matches_glrt_for_unitary_ofdm(seed: u64, snr in -20.0f64..10.0) {
        let f = OfdmFormat::with_guard_fraction(8, 1, 0.0, 1, Constellation::bpsk()).unwrap();
        let models = vec![FormatModel::new(SignalFormat::Ofdm(f)); 2];
        let scenario = ScenarioConfig { snr_db: snr, hypothesis: Hypothesis::H1, ..Default::default() };
        let obs = simulate_observation(&scenario, &models, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let a = pmr_rglrt_k(&models, &obs, 1.0).unwrap();
        let b = pmr_glrt(&obs, 1.0).unwrap();
        prop_assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0));
    }
}
