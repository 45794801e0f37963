//! Cross-checks the scoring implementation against the naive oracle on
//! seeded synthetic populations, and checks the generator's consensus
//! expectation against an exact binomial oracle.

use sensus_core::metrics;
use sensus_core::rng::StreamRng;
use sensus_core::synth::{self, oracle, Assignment, PopulationSpec};

const TOL: f64 = 1e-12;

fn assert_close(a: f64, b: f64, what: &str) {
    assert!((a - b).abs() <= TOL, "{what}: {a} vs {b}");
}

/// Generates a random population spec from a meta-stream.
fn random_spec(seed: u64) -> PopulationSpec {
    let meta = StreamRng::new(seed);
    let mut s = meta.stream(u64::MAX);
    let n_statements = 2 + s.index_below(63);
    let n_respondents = 2 + s.index_below(63);
    let ratings_per = 1 + s.index_below(n_statements);
    let q_agree: Vec<f64> = (0..n_statements).map(|_| s.unit_f64()).collect();
    let q_predict: Vec<f64> = (0..n_statements).map(|_| s.unit_f64()).collect();
    PopulationSpec {
        n_statements,
        n_respondents,
        q_agree,
        q_predict,
        ratings_per_respondent: ratings_per,
        seed,
        assignment: if seed % 2 == 0 {
            Assignment::Uniform
        } else {
            Assignment::Balanced
        },
    }
}

fn check_population(seed: u64) {
    let spec = random_spec(seed);
    let (corpus, matrix) = synth::generate(&spec).unwrap();
    // Two fully valid model tables and one with invalid rows mixed in.
    let clean = synth::generate_model_ratings(&corpus, 2, 0.0, seed ^ 0x5eed);
    let flaky = synth::generate_model_ratings(&corpus, 1, 0.15, seed ^ 0xf1a2);

    let report = oracle::oracle_scores(&matrix, Some(&clean));
    let majorities = metrics::human_majorities(&matrix);

    for (&i, want) in &report.statements {
        let agg = metrics::statement_aggregate(&matrix, i as u32).unwrap();
        assert_close(agg.d_a, want.d_a, "d_a");
        assert_close(agg.d_b, want.d_b, "d_b");
        assert_eq!(agg.majority, want.majority, "majority of statement {i}");
        let scores = metrics::statement_scores(&matrix, i as u32).unwrap();
        assert_close(scores.consensus, want.consensus, "statement consensus");
        assert_close(scores.awareness, want.awareness, "statement awareness");
        assert_close(
            scores.commonsensicality,
            want.commonsensicality,
            "statement m",
        );
    }

    for (&j, want) in &report.persons {
        let got = metrics::person_scores(&matrix, j as u32, &majorities).unwrap();
        assert_close(got.consensus, want.consensus, "person consensus");
        assert_close(got.awareness, want.awareness, "person awareness");
        assert_close(got.commonsensicality, want.commonsensicality, "person m");
        assert_eq!(got.n_items, want.n_items);
    }

    for (name, want) in &report.models {
        let m = clean.model_index_of(name).unwrap();
        match (metrics::model_scores(&clean, m, &majorities), &want.scores) {
            (Ok(got), Some(w)) => {
                assert_close(got.consensus, w.consensus, "model consensus");
                assert_close(got.awareness, w.awareness, "model awareness");
                assert_close(got.commonsensicality, w.commonsensicality, "model m");
                assert_eq!(got.n_items, w.n_items);
            }
            (Err(_), None) => {}
            (got, want) => panic!("model score disagreement: {got:?} vs {want:?}"),
        }

        match (
            metrics::model_scores_with_model_vote(&clean, m, &matrix),
            &want.scores_with_vote,
        ) {
            (Ok(got), Some(w)) => {
                assert_close(got.consensus, w.consensus, "vote consensus");
                assert_close(got.awareness, w.awareness, "vote awareness");
                assert_close(got.commonsensicality, w.commonsensicality, "vote m");
            }
            (Err(_), None) => {}
            (got, want) => panic!("model-vote disagreement: {got:?} vs {want:?}"),
        }

        for (&i, &(c, a, mm)) in &want.silicon {
            let rating = clean.get(m, i as u32).unwrap();
            let got = metrics::silicon_statement_scores(rating.p_yes_a, rating.p_yes_b);
            assert_close(got.consensus, c, "silicon consensus");
            assert_close(got.awareness, a, "silicon awareness");
            assert_close(got.commonsensicality, mm, "silicon m");
        }

        match (
            metrics::pairwise_win_rate(&clean, m, &matrix, &majorities),
            &want.pairwise,
        ) {
            (Ok(got), Some((frac, entries))) => {
                assert_close(got.win_fraction, *frac, "win fraction");
                assert_eq!(got.entries.len(), entries.len());
                for e in &got.entries {
                    let (wm, wh, wwin) = entries[&(e.respondent as usize)];
                    assert_close(e.m_model, wm, "pairwise m_model");
                    assert_close(e.m_human, wh, "pairwise m_human");
                    assert_eq!(e.win, wwin);
                }
            }
            (Err(_), None) => {}
            (got, want) => panic!("pairwise disagreement: {got:?} vs {want:?}"),
        }
    }

    // The flaky table exercises the invalid-row paths the same way.
    let report = oracle::oracle_scores(&matrix, Some(&flaky));
    for (name, want) in &report.models {
        let m = flaky.model_index_of(name).unwrap();
        match (metrics::model_scores(&flaky, m, &majorities), &want.scores) {
            (Ok(got), Some(w)) => {
                assert_close(got.consensus, w.consensus, "flaky model consensus");
                assert_eq!(got.n_items, w.n_items);
            }
            (Err(_), None) => {}
            (got, want) => panic!("flaky model disagreement: {got:?} vs {want:?}"),
        }
        match (
            metrics::pairwise_win_rate(&flaky, m, &matrix, &majorities),
            &want.pairwise,
        ) {
            (Ok(got), Some((frac, _))) => assert_close(got.win_fraction, *frac, "flaky win"),
            (Err(_), None) => {}
            (got, want) => panic!("flaky pairwise disagreement: {got:?} vs {want:?}"),
        }
    }
}

#[test]
fn oracle_equivalence_on_seeded_populations() {
    for seed in 0..60 {
        check_population(seed);
    }
}

/// Exact binomial expectation of the consensus score:
/// E | 2 Bin(n, q)/n - 1 | = sum_k C(n,k) q^k (1-q)^(n-k) |2k/n - 1|.
fn expected_consensus(n: usize, q: f64) -> f64 {
    let ln_gamma = |z: f64| -> f64 {
        // Lanczos, same coefficients as everywhere.
        const C: [f64; 6] = [
            76.18009172947146,
            -86.50532032941677,
            24.01409824083091,
            -1.231739572450155,
            0.1208650973866179e-2,
            -0.5395239384953e-5,
        ];
        let mut sum = 1.000000000190015;
        for (i, &c) in C.iter().enumerate() {
            sum += c / (z + i as f64 + 1.0);
        }
        let tmp = z + 5.5;
        (z + 0.5) * tmp.ln() - tmp + (2.5066282746310005 * sum / z).ln()
    };
    let nf = n as f64;
    (0..=n)
        .map(|k| {
            let kf = k as f64;
            let ln_pmf = ln_gamma(nf + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(nf - kf + 1.0)
                + kf * q.ln()
                + (nf - kf) * (1.0 - q).ln();
            ln_pmf.exp() * (2.0 * kf / nf - 1.0).abs()
        })
        .sum()
}

#[test]
fn generated_consensus_matches_binomial_expectation() {
    // Every statement rated by all 1,000 respondents at q = 0.5.
    let n_statements = 200;
    let n_resp = 1000;
    let spec = PopulationSpec::constant(n_statements, n_resp, 0.5, 0.5, n_statements, 97);
    let (_c, matrix) = synth::generate(&spec).unwrap();
    let mean: f64 = (0..n_statements as u32)
        .map(|i| {
            let agg = metrics::statement_aggregate(&matrix, i).unwrap();
            metrics::statement_consensus(agg.d_a)
        })
        .sum::<f64>()
        / n_statements as f64;
    let expected = expected_consensus(n_resp, 0.5);
    assert!(
        (mean - expected).abs() < 0.005,
        "mean consensus {mean} vs expectation {expected}"
    );
}

#[test]
fn consensus_expectation_increases_away_from_half() {
    let n_statements = 50;
    let n_resp = 1000;
    let mut means = Vec::new();
    for (k, q) in [0.5, 0.6, 0.75].into_iter().enumerate() {
        let spec = PopulationSpec::constant(n_statements, n_resp, q, 0.5, n_statements, 31 + k as u64);
        let (_c, matrix) = synth::generate(&spec).unwrap();
        let mean: f64 = (0..n_statements as u32)
            .map(|i| {
                let agg = metrics::statement_aggregate(&matrix, i).unwrap();
                metrics::statement_consensus(agg.d_a)
            })
            .sum::<f64>()
            / n_statements as f64;
        means.push(mean);
    }
    assert!(
        means[0] < means[1] && means[1] < means[2],
        "means not strictly increasing: {means:?}"
    );
}
