mod common;

use bernlab::exact::rank_over_rationals;
use bernlab::harness::{
    bernoulli_source, csv_string, run_classify_survey, run_norm_tail, run_rowcol_only, run_singularity_mc,
    run_singularity_mc_with, run_smin_quantiles, run_udeg_survey, run_udeg_survey_with, summary_json, Attribution,
    ExperimentMode, ExperimentSpec,
};
use bernlab::matrix::{generate, trial_rng, BernoulliParams, GEOMETRIC_SKIP_MAX_P};
use common::singular_probability_2x2;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn spec(n: usize, p: f64, trials: u64, seed: u64, mode: ExperimentMode) -> ExperimentSpec {
    ExperimentSpec::new(n, p, trials, seed, mode)
}

fn outputs(s: &ExperimentSpec) -> (String, String) {
    match s.mode {
        ExperimentMode::Singularity => {
            let r = run_singularity_mc(s).unwrap();
            (csv_string(s, &r.records), summary_json(s, &r.summary))
        }
        ExperimentMode::RowcolOnly => {
            let r = run_rowcol_only(s).unwrap();
            (csv_string(s, &r.records), summary_json(s, &r.summary))
        }
        ExperimentMode::SminQuantiles => {
            let r = run_smin_quantiles(s).unwrap();
            (csv_string(s, &r.records), summary_json(s, &r.summary))
        }
        ExperimentMode::NormTail => {
            let r = run_norm_tail(s).unwrap();
            (csv_string(s, &r.records), summary_json(s, &r.summary))
        }
        ExperimentMode::UdegSurvey => {
            let r = run_udeg_survey(s).unwrap();
            (csv_string(s, &r.records), summary_json(s, &r.summary))
        }
        ExperimentMode::ClassifySurvey => {
            let r = run_classify_survey(s).unwrap();
            (csv_string(s, &r.records), summary_json(s, &r.summary))
        }
    }
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let cases = [
        spec(30, 0.1, 200, 1, ExperimentMode::Singularity),
        spec(30, 0.1, 200, 2, ExperimentMode::RowcolOnly),
        spec(25, 0.2, 60, 3, ExperimentMode::SminQuantiles),
        spec(500, 0.05, 8, 4, ExperimentMode::NormTail),
        spec(32, 0.3, 6, 5, ExperimentMode::UdegSurvey),
        spec(400, 0.1, 40, 6, ExperimentMode::ClassifySurvey),
    ];
    for base in cases {
        let reference = outputs(&base);
        for workers in [4, 8] {
            let s = ExperimentSpec {
                workers,
                ..base.clone()
            };
            assert_eq!(outputs(&s), reference, "{:?} with {workers} workers", base.mode);
        }
    }
}

#[test]
fn spec_hash_ignores_workers() {
    let a = spec(10, 0.2, 5, 9, ExperimentMode::Singularity);
    let b = ExperimentSpec {
        workers: 7,
        ..a.clone()
    };
    assert_eq!(a.hash(), b.hash());
    assert_ne!(a.hash(), ExperimentSpec { seed: 10, ..a.clone() }.hash());
    let csv = csv_string(&a, &run_singularity_mc(&a).unwrap().records);
    assert!(csv.starts_with("# schema=BSL-1\n"));
    assert!(csv.contains(&format!("# spec_hash={}\n", a.hash())));
}

#[test]
fn witnesses_imply_singularity() {
    let s = spec(12, 0.2, 2000, 7, ExperimentMode::Singularity);
    let run = run_singularity_mc(&s).unwrap();
    let mut others = 0;
    for r in &run.records {
        let m = generate(&BernoulliParams::new(s.n, s.p, s.seed, r.trial_index).unwrap()).unwrap();
        let rank = rank_over_rationals(&m);
        assert_eq!(r.singular, rank < s.n, "trial {}", r.trial_index);
        assert_eq!(r.singular, r.witness != Attribution::None);
        if r.witness == Attribution::Other {
            others += 1;
            assert!(!m.structural_scan().has_structural_witness);
        }
    }
    assert!(others > 0, "no trial exercised the elimination path");
    let total: u64 = run.summary.witness_histogram.values().sum();
    assert_eq!(total, s.trials);
}

#[test]
fn wilson_interval_coverage_at_n2() {
    let p = 0.3;
    let exact = singular_probability_2x2(p);
    let covered = (0..100u64)
        .filter(|&seed| {
            let s = spec(2, p, 2000, 1000 + seed, ExperimentMode::Singularity);
            run_singularity_mc(&s).unwrap().summary.ci_95.contains(exact)
        })
        .count();
    assert!(covered >= 90, "covered {covered}/100");
}

#[test]
fn entry_counts_match_binomial_mean() {
    for p in [0.01, GEOMETRIC_SKIP_MAX_P, 0.2, 0.6] {
        let n = 60;
        let reps = 400;
        let total: usize = (0..reps)
            .map(|i| generate(&BernoulliParams::new(n, p, 77, i).unwrap()).unwrap().nnz())
            .sum();
        let cells = (n * n) as f64 * reps as f64;
        let mean = total as f64 / cells;
        let se = (p * (1.0 - p) / cells).sqrt();
        assert!((mean - p).abs() <= 5.0 * se, "p={p}: {mean}");
    }
}

#[test]
fn cells_are_uniform() {
    // Chi-square over the n² cells pooled across reps, for both samplers.
    for p in [0.02, 0.3] {
        let n = 10;
        let reps = 4000u64;
        let mut counts = vec![0u64; n * n];
        for i in 0..reps {
            let m = generate(&BernoulliParams::new(n, p, 88, i).unwrap()).unwrap();
            for &(r, c) in m.ones() {
                counts[r * n + c] += 1;
            }
        }
        let expected = reps as f64 * p;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / (expected * (1.0 - p)))
            .sum();
        let dist = ChiSquared::new((n * n - 1) as f64).unwrap();
        assert!(dist.sf(chi2) > 1e-4, "p={p}: chi2 {chi2}");
    }
}

#[test]
fn udeg_of_constant_vectors_is_half_k1() {
    let s = spec(32, 0.3, 4, 12, ExperimentMode::UdegSurvey);
    let ones = |spec: &ExperimentSpec, _: &mut rand_chacha::ChaCha20Rng| Ok(vec![1.0; spec.n]);
    let run = run_udeg_survey_with(&s, &bernoulli_source, &ones).unwrap();
    let half = s.options.udeg.k1 / 2.0;
    for r in &run.records {
        assert!((r.sphere_ud - half).abs() <= 0.005 * half, "{}", r.sphere_ud);
        assert!(!r.sphere_censored);
    }
}

#[test]
fn custom_sources_are_used() {
    let s = spec(6, 0.5, 50, 13, ExperimentMode::Singularity);
    let zero_row = |spec: &ExperimentSpec, rng: &mut rand_chacha::ChaCha20Rng| {
        let m = bernlab::matrix::generate_with_rng(spec.n, spec.p, rng)?;
        let ones = m.ones().iter().copied().filter(|&(i, _)| i != 0).collect();
        bernlab::matrix::SparseBinaryMatrix::from_ones(spec.n, ones)
    };
    let run = run_singularity_mc_with(&s, &zero_row).unwrap();
    assert_eq!(run.summary.singular, 50);
    assert!(run.records.iter().all(|r| r.witness == Attribution::ZeroRow));
}

#[test]
fn classify_histogram_sums_to_trials() {
    let s = spec(400, 0.1, 60, 14, ExperimentMode::ClassifySurvey);
    let run = run_classify_survey(&s).unwrap();
    assert_eq!(run.summary.upsilon_histogram.values().sum::<u64>(), 60);
    let normals: u64 = run.summary.normal_histogram.values().sum();
    assert_eq!(normals + run.summary.skipped_degenerate, 60);
    assert_eq!(run.summary.witness_failures, 0);
}

#[test]
fn norm_tail_is_in_range() {
    let s = spec(500, 0.05, 10, 15, ExperimentMode::NormTail);
    let run = run_norm_tail(&s).unwrap();
    let m = run.summary.mean_normalized;
    assert!((1.0..=60.0).contains(&m), "{m}");
    assert!(run.summary.tails.iter().all(|t| t.1 == 0));
    assert_eq!(run.summary.unconverged, 0);
}

#[test]
fn rowcol_only_agrees_with_structural_scan() {
    let s = spec(40, 0.05, 300, 16, ExperimentMode::RowcolOnly);
    let run = run_rowcol_only(&s).unwrap();
    for r in &run.records {
        let mut rng = trial_rng(s.seed, r.trial_index);
        let m = bernoulli_source(&s, &mut rng).unwrap();
        assert_eq!(r.singular, m.has_zero_line());
    }
}

#[test]
fn invalid_specs_are_rejected() {
    assert!(run_singularity_mc(&spec(10, 0.2, 0, 1, ExperimentMode::Singularity)).is_err());
    assert!(run_singularity_mc(&spec(10, 1.5, 5, 1, ExperimentMode::Singularity)).is_err());
    let s = ExperimentSpec {
        workers: 0,
        ..spec(10, 0.2, 5, 1, ExperimentMode::Singularity)
    };
    assert!(run_singularity_mc(&s).is_err());
}

#[test]
fn identity_stream_has_unit_smin() {
    let s = spec(16, 0.3, 20, 17, ExperimentMode::SminQuantiles);
    let identity = |spec: &ExperimentSpec, _: &mut rand_chacha::ChaCha20Rng| {
        Ok(bernlab::matrix::SparseBinaryMatrix::identity(spec.n))
    };
    let run = bernlab::harness::run_smin_quantiles_with(&s, &identity).unwrap();
    assert!(run.summary.quantiles.iter().all(|&(_, v)| (v - 1.0).abs() < 1e-12));
    assert_eq!(run.summary.singular, 0);
}

#[test]
fn empty_matrices_have_zero_rows() {
    let s = spec(50, 1e-9, 100, 18, ExperimentMode::Singularity);
    let run = run_singularity_mc(&s).unwrap();
    assert_eq!(run.summary.singular, 100);
    assert!(run.records.iter().all(|r| r.witness == Attribution::ZeroRow));
}
