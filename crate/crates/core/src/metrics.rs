//! Consensus, awareness, and commonsensicality scores at statement, person,
//! model, and silicon-population level.
//!
//! All scores live in [0, 1]. The majority rating of a statement is "agree"
//! iff at least half of its raters agreed; ties resolve to agree everywhere,
//! including the silicon and human-plus-model variants. Majority tests are
//! evaluated on integer counts, so the tie rule is exact.

use alloc::vec::Vec;
use core::fmt;

use crate::corpus::{ModelRatings, RatingMatrix};
use crate::math;

/// A (consensus, awareness, commonsensicality) triple with the number of
/// items it was computed over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreRecord {
    pub consensus: f64,
    pub awareness: f64,
    /// Geometric mean of consensus and awareness.
    pub commonsensicality: f64,
    pub n_items: usize,
}

impl ScoreRecord {
    pub fn new(consensus: f64, awareness: f64, n_items: usize) -> Self {
        ScoreRecord {
            consensus,
            awareness,
            commonsensicality: commonsensicality(consensus, awareness),
            n_items,
        }
    }
}

/// Per-statement rating distribution and majority.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatementAggregate {
    /// Share answering yes to question (a).
    pub d_a: f64,
    /// Share answering yes to question (b).
    pub d_b: f64,
    /// Agree iff `d_a >= 0.5` (tie resolves to agree).
    pub majority: bool,
    pub n_raters: usize,
}

/// Statement scores derived from integer answer counts: `yes_a` of `n` raters
/// agreed, `yes_b` of `n` predicted most people would agree.
pub fn aggregate_scores(yes_a: usize, yes_b: usize, n: usize) -> (StatementAggregate, ScoreRecord) {
    debug_assert!(n > 0 && yes_a <= n && yes_b <= n);
    let d_a = yes_a as f64 / n as f64;
    let d_b = yes_b as f64 / n as f64;
    let majority = 2 * yes_a >= n;
    let aggregate = StatementAggregate {
        d_a,
        d_b,
        majority,
        n_raters: n,
    };
    let consensus = statement_consensus(d_a);
    let correct_b = if majority { yes_b } else { n - yes_b };
    let awareness = correct_b as f64 / n as f64;
    (aggregate, ScoreRecord::new(consensus, awareness, n))
}

/// Rating distribution and majority for statement `i`.
pub fn statement_aggregate(
    matrix: &RatingMatrix,
    i: u32,
) -> Result<StatementAggregate, MetricsError> {
    let raters = matrix.raters_of(i);
    if raters.is_empty() {
        return Err(MetricsError::NoRaters { statement: i });
    }
    let yes_a = raters.iter().filter(|(_, r)| r.agree).count();
    let yes_b = raters.iter().filter(|(_, r)| r.predict_agree).count();
    Ok(aggregate_scores(yes_a, yes_b, raters.len()).0)
}

/// Distance of the agreement share from a 50/50 split: `2 * |d_a - 0.5|`.
pub fn statement_consensus(d_a: f64) -> f64 {
    2.0 * math::abs(d_a - 0.5)
}

/// Share of raters whose question-(b) answer matches the majority rating.
pub fn statement_awareness(
    matrix: &RatingMatrix,
    i: u32,
    majority: bool,
) -> Result<f64, MetricsError> {
    let raters = matrix.raters_of(i);
    if raters.is_empty() {
        return Err(MetricsError::NoRaters { statement: i });
    }
    let correct = raters
        .iter()
        .filter(|(_, r)| r.predict_agree == majority)
        .count();
    Ok(correct as f64 / raters.len() as f64)
}

/// Geometric mean of consensus and awareness.
pub fn commonsensicality(consensus: f64, awareness: f64) -> f64 {
    math::sqrt(consensus * awareness)
}

/// Consensus, awareness, and commonsensicality of statement `i`.
pub fn statement_scores(matrix: &RatingMatrix, i: u32) -> Result<ScoreRecord, MetricsError> {
    let raters = matrix.raters_of(i);
    if raters.is_empty() {
        return Err(MetricsError::NoRaters { statement: i });
    }
    let yes_a = raters.iter().filter(|(_, r)| r.agree).count();
    let yes_b = raters.iter().filter(|(_, r)| r.predict_agree).count();
    Ok(aggregate_scores(yes_a, yes_b, raters.len()).1)
}

/// Majority ratings for every statement; `None` where no one rated it.
/// Indexed by corpus statement index.
pub fn human_majorities(matrix: &RatingMatrix) -> Vec<Option<bool>> {
    (0..matrix.n_statements() as u32)
        .map(|i| {
            let raters = matrix.raters_of(i);
            if raters.is_empty() {
                None
            } else {
                let yes = raters.iter().filter(|(_, r)| r.agree).count();
                Some(2 * yes >= raters.len())
            }
        })
        .collect()
}

/// Consensus/awareness/commonsensicality of respondent `j` against the given
/// majority ratings.
pub fn person_scores(
    matrix: &RatingMatrix,
    j: u32,
    majorities: &[Option<bool>],
) -> Result<ScoreRecord, MetricsError> {
    person_scores_subset(matrix, j, majorities, None)
}

/// Like [`person_scores`] but restricted to statements where
/// `subset[statement]` is true.
pub fn person_scores_subset(
    matrix: &RatingMatrix,
    j: u32,
    majorities: &[Option<bool>],
    subset: Option<&[bool]>,
) -> Result<ScoreRecord, MetricsError> {
    let mut n = 0usize;
    let mut consensus_hits = 0usize;
    let mut awareness_hits = 0usize;
    for &(i, answers) in matrix.ratings_by(j) {
        if let Some(mask) = subset {
            if !mask[i as usize] {
                continue;
            }
        }
        let majority = majorities[i as usize].ok_or(MetricsError::NoRaters { statement: i })?;
        n += 1;
        if answers.agree == majority {
            consensus_hits += 1;
        }
        if answers.predict_agree == majority {
            awareness_hits += 1;
        }
    }
    if n == 0 {
        return Err(MetricsError::NoItems);
    }
    Ok(ScoreRecord::new(
        consensus_hits as f64 / n as f64,
        awareness_hits as f64 / n as f64,
        n,
    ))
}

/// Binarizes an answer probability: agree iff `p >= 0.5`.
pub fn model_binarize(p_yes: f64) -> bool {
    p_yes >= 0.5
}

/// Scores one model as an individual survey respondent against the human
/// majority ratings, over all statements with a valid model rating and a
/// defined majority.
pub fn model_scores(
    ratings: &ModelRatings,
    model: u32,
    majorities: &[Option<bool>],
) -> Result<ScoreRecord, MetricsError> {
    model_scores_subset(ratings, model, majorities, None)
}

/// Like [`model_scores`] but restricted to statements where
/// `subset[statement]` is true.
pub fn model_scores_subset(
    ratings: &ModelRatings,
    model: u32,
    majorities: &[Option<bool>],
    subset: Option<&[bool]>,
) -> Result<ScoreRecord, MetricsError> {
    let mut n = 0usize;
    let mut consensus_hits = 0usize;
    let mut awareness_hits = 0usize;
    for (i, rating) in ratings.valid_ratings_of(model) {
        if let Some(mask) = subset {
            if !mask[i as usize] {
                continue;
            }
        }
        let Some(majority) = majorities[i as usize] else {
            continue;
        };
        n += 1;
        if model_binarize(rating.p_yes_a) == majority {
            consensus_hits += 1;
        }
        if model_binarize(rating.p_yes_b) == majority {
            awareness_hits += 1;
        }
    }
    if n == 0 {
        return Err(MetricsError::NoItems);
    }
    Ok(ScoreRecord::new(
        consensus_hits as f64 / n as f64,
        awareness_hits as f64 / n as f64,
        n,
    ))
}

/// Variant scoring where the model's own binary rating joins the majority
/// vote: majority is agree iff `(α + Σ_j A_ij) / (|Ω_i| + 1) >= 0.5`.
pub fn model_scores_with_model_vote(
    ratings: &ModelRatings,
    model: u32,
    matrix: &RatingMatrix,
) -> Result<ScoreRecord, MetricsError> {
    let mut n = 0usize;
    let mut consensus_hits = 0usize;
    let mut awareness_hits = 0usize;
    for (i, rating) in ratings.valid_ratings_of(model) {
        let raters = matrix.raters_of(i);
        if raters.is_empty() {
            continue;
        }
        let alpha = model_binarize(rating.p_yes_a);
        let beta = model_binarize(rating.p_yes_b);
        let yes = raters.iter().filter(|(_, r)| r.agree).count() + alpha as usize;
        let majority = 2 * yes >= raters.len() + 1;
        n += 1;
        if alpha == majority {
            consensus_hits += 1;
        }
        if beta == majority {
            awareness_hits += 1;
        }
    }
    if n == 0 {
        return Err(MetricsError::NoItems);
    }
    Ok(ScoreRecord::new(
        consensus_hits as f64 / n as f64,
        awareness_hits as f64 / n as f64,
        n,
    ))
}

/// Number of statements where a model's binarized answers to questions (a)
/// and (b) diverge, over its valid ratings. Returns (diverging, total).
pub fn divergence_count(ratings: &ModelRatings, model: u32) -> (usize, usize) {
    let mut diverging = 0usize;
    let mut total = 0usize;
    for (_, r) in ratings.valid_ratings_of(model) {
        total += 1;
        if model_binarize(r.p_yes_a) != model_binarize(r.p_yes_b) {
            diverging += 1;
        }
    }
    (diverging, total)
}

/// One model-vs-person comparison on the person's own statement set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairwiseEntry {
    pub respondent: u32,
    pub m_model: f64,
    pub m_human: f64,
    /// `m_model - m_human`; positive means the model scored higher.
    pub diff: f64,
    /// Strict exceedance: equality is not a win.
    pub win: bool,
}

/// Pairwise comparison of one model against every respondent.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseComparison {
    pub win_fraction: f64,
    pub entries: Vec<PairwiseEntry>,
}

/// Compares a model with every respondent, restricting the model's scores to
/// each respondent's own statement set Φ(j). The model must have a valid
/// rating for every statement in every Φ(j).
pub fn pairwise_win_rate(
    ratings: &ModelRatings,
    model: u32,
    matrix: &RatingMatrix,
    majorities: &[Option<bool>],
) -> Result<PairwiseComparison, MetricsError> {
    let mut entries = Vec::with_capacity(matrix.n_respondents());
    let mut wins = 0usize;
    for j in 0..matrix.n_respondents() as u32 {
        let phi = matrix.ratings_by(j);
        if phi.is_empty() {
            continue;
        }
        let mut consensus_hits = 0usize;
        let mut awareness_hits = 0usize;
        for &(i, _) in phi {
            let rating = ratings
                .get(model, i)
                .filter(|r| r.valid)
                .ok_or(MetricsError::MissingModelCoverage {
                    respondent: j,
                    statement: i,
                })?;
            let majority = majorities[i as usize].ok_or(MetricsError::NoRaters { statement: i })?;
            if model_binarize(rating.p_yes_a) == majority {
                consensus_hits += 1;
            }
            if model_binarize(rating.p_yes_b) == majority {
                awareness_hits += 1;
            }
        }
        let n = phi.len();
        let m_model = commonsensicality(
            consensus_hits as f64 / n as f64,
            awareness_hits as f64 / n as f64,
        );
        let m_human = person_scores(matrix, j, majorities)?.commonsensicality;
        let win = m_model > m_human;
        if win {
            wins += 1;
        }
        entries.push(PairwiseEntry {
            respondent: j,
            m_model,
            m_human,
            diff: m_model - m_human,
            win,
        });
    }
    if entries.is_empty() {
        return Err(MetricsError::NoItems);
    }
    let win_fraction = wins as f64 / entries.len() as f64;
    Ok(PairwiseComparison {
        win_fraction,
        entries,
    })
}

/// Statement scores within an infinite population whose agreement share on
/// question (a) is `p_yes_a` and on question (b) is `p_yes_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiliconScores {
    pub consensus: f64,
    pub awareness: f64,
    pub commonsensicality: f64,
    pub majority: bool,
}

/// Silicon-population statement scores: consensus `2|p_a - 0.5|`, majority
/// `p_a >= 0.5`, awareness `p_b` under an agree majority and `1 - p_b`
/// otherwise.
pub fn silicon_statement_scores(p_yes_a: f64, p_yes_b: f64) -> SiliconScores {
    let consensus = statement_consensus(p_yes_a);
    let majority = p_yes_a >= 0.5;
    let awareness = if majority { p_yes_b } else { 1.0 - p_yes_b };
    SiliconScores {
        consensus,
        awareness,
        commonsensicality: commonsensicality(consensus, awareness),
        majority,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricsError {
    /// Statement has an empty rater set.
    NoRaters { statement: u32 },
    /// No statements contribute to the requested score.
    NoItems,
    /// A respondent's statement set contains a statement the model did not
    /// rate (or rated invalidly).
    MissingModelCoverage { respondent: u32, statement: u32 },
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::NoRaters { statement } => {
                write!(f, "statement index {statement} has no raters")
            }
            MetricsError::NoItems => write!(f, "no statements contribute to this score"),
            MetricsError::MissingModelCoverage {
                respondent,
                statement,
            } => write!(
                f,
                "model lacks a valid rating for statement index {statement} rated by respondent index {respondent}"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for MetricsError {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AnswerPair, Corpus, ModelRating, ModelRatings, RatingMatrix, Statement};
    use alloc::format;
    use alloc::vec;
    use proptest::prelude::*;

    fn corpus(n: usize) -> Corpus {
        Corpus::new(
            (0..n)
                .map(|i| Statement {
                    id: format!("s{i}"),
                    text: format!("t{i}"),
                    source: crate::corpus::Source::Atomic,
                    features: None,
                })
                .collect(),
        )
        .unwrap()
    }

    /// One statement, `yes_a` of `n` agreeing, `yes_b` of `n` predicting
    /// agreement.
    fn one_statement(yes_a: usize, yes_b: usize, n: usize) -> (Corpus, RatingMatrix) {
        let c = corpus(1);
        let mut b = RatingMatrix::builder(&c);
        for j in 0..n {
            b.add(
                "s0",
                &format!("r{j}"),
                AnswerPair {
                    agree: j < yes_a,
                    predict_agree: j < yes_b,
                },
                j as u64 + 1,
            )
            .unwrap();
        }
        let m = b.finish();
        (c, m)
    }

    #[test]
    fn worked_example_19_of_22() {
        // 19/22 agree, 21/22 predict agreement.
        let (_c, m) = one_statement(19, 21, 22);
        let agg = statement_aggregate(&m, 0).unwrap();
        assert!((agg.d_a - 19.0 / 22.0).abs() < 1e-15);
        assert!(agg.majority);
        let scores = statement_scores(&m, 0).unwrap();
        assert!((scores.consensus - 0.7273).abs() < 5e-5);
        assert!((scores.awareness - 0.9545).abs() < 5e-5);
        let expected_m = math::sqrt((2.0 * (19.0 / 22.0 - 0.5)) * (21.0 / 22.0));
        assert!((scores.commonsensicality - expected_m).abs() < 1e-15);
        // Displays as 0.73 / 0.95 / 0.83 at two decimals.
        let round2 = |x: f64| (x * 100.0).round() / 100.0;
        assert_eq!(round2(scores.consensus), 0.73);
        assert_eq!(round2(scores.awareness), 0.95);
        assert_eq!(round2(scores.commonsensicality), 0.83);
    }

    #[test]
    fn tie_resolves_to_agree() {
        let (_c, m) = one_statement(3, 0, 6);
        let agg = statement_aggregate(&m, 0).unwrap();
        assert!(agg.majority);
        assert_eq!(statement_consensus(agg.d_a), 0.0);
    }

    #[test]
    fn nobody_agrees() {
        let (_c, m) = one_statement(0, 0, 5);
        let agg = statement_aggregate(&m, 0).unwrap();
        assert_eq!(agg.d_a, 0.0);
        assert!(!agg.majority);
        // Everyone predicted disagreement, which is the majority: awareness 1.
        assert_eq!(statement_awareness(&m, 0, agg.majority).unwrap(), 1.0);
    }

    #[test]
    fn no_raters_is_an_error() {
        let c = corpus(2);
        let mut b = RatingMatrix::builder(&c);
        b.add(
            "s0",
            "r0",
            AnswerPair {
                agree: true,
                predict_agree: true,
            },
            1,
        )
        .unwrap();
        let m = b.finish();
        assert!(matches!(
            statement_aggregate(&m, 1),
            Err(MetricsError::NoRaters { statement: 1 })
        ));
    }

    #[test]
    fn consensus_endpoints() {
        assert_eq!(statement_consensus(0.5), 0.0);
        assert_eq!(statement_consensus(1.0), 1.0);
        assert_eq!(statement_consensus(0.0), 1.0);
    }

    #[test]
    fn commonsensicality_values() {
        assert!((commonsensicality(0.73, 0.95) - 0.8327).abs() < 1e-4);
        assert_eq!(commonsensicality(0.0, 0.77), 0.0);
        assert!((commonsensicality(0.807, 0.840) - 0.8233).abs() < 5e-5);
    }

    #[test]
    fn awareness_matches_exhaustive_count() {
        // Independent brute-force count over a fixed 6-rater instance.
        let answers_b = [true, false, true, true, false, true];
        let c = corpus(1);
        let mut b = RatingMatrix::builder(&c);
        for (j, &pb) in answers_b.iter().enumerate() {
            b.add(
                "s0",
                &format!("r{j}"),
                AnswerPair {
                    agree: j % 3 == 0,
                    predict_agree: pb,
                },
                j as u64 + 1,
            )
            .unwrap();
        }
        let m = b.finish();
        let agg = statement_aggregate(&m, 0).unwrap();
        // 2 of 6 agree -> majority false.
        assert!(!agg.majority);
        let mut count = 0;
        for &pb in &answers_b {
            if pb == agg.majority {
                count += 1;
            }
        }
        let a = statement_awareness(&m, 0, agg.majority).unwrap();
        assert_eq!(a, count as f64 / 6.0);
    }

    /// Two statements, two respondents, hand-checkable person scores.
    #[test]
    fn person_scores_hand_case() {
        let c = corpus(2);
        let mut b = RatingMatrix::builder(&c);
        // s0: both agree -> majority agree. s1: r0 agrees, r1 disagrees ->
        // tie among 2 raters -> majority agree.
        b.add(
            "s0",
            "r0",
            AnswerPair {
                agree: true,
                predict_agree: true,
            },
            1,
        )
        .unwrap();
        b.add(
            "s0",
            "r1",
            AnswerPair {
                agree: true,
                predict_agree: false,
            },
            2,
        )
        .unwrap();
        b.add(
            "s1",
            "r0",
            AnswerPair {
                agree: true,
                predict_agree: true,
            },
            3,
        )
        .unwrap();
        b.add(
            "s1",
            "r1",
            AnswerPair {
                agree: false,
                predict_agree: true,
            },
            4,
        )
        .unwrap();
        let m = b.finish();
        let majorities = human_majorities(&m);
        let r0 = person_scores(&m, 0, &majorities).unwrap();
        assert_eq!((r0.consensus, r0.awareness), (1.0, 1.0));
        assert_eq!(r0.commonsensicality, 1.0);
        let r1 = person_scores(&m, 1, &majorities).unwrap();
        assert_eq!(r1.consensus, 0.5);
        assert_eq!(r1.awareness, 0.5);
    }

    #[test]
    fn person_scores_forced_arithmetic() {
        // Matching the majority on 40/50 (a) and 45/50 (b).
        let sr = ScoreRecord::new(40.0 / 50.0, 45.0 / 50.0, 50);
        assert!((sr.commonsensicality - 0.8485).abs() < 5e-5);
    }

    #[test]
    fn binarize_boundary() {
        assert!(model_binarize(0.5));
        assert!(!model_binarize(0.4999));
        assert!(model_binarize(0.95));
    }

    fn model_fixture(
        p: &[(f64, f64)],
        humans_agree: &[bool],
    ) -> (Corpus, RatingMatrix, ModelRatings) {
        let c = corpus(p.len());
        let mut b = RatingMatrix::builder(&c);
        for (i, &agree) in humans_agree.iter().enumerate() {
            b.add(
                &format!("s{i}"),
                "r0",
                AnswerPair {
                    agree,
                    predict_agree: agree,
                },
                i as u64 + 1,
            )
            .unwrap();
        }
        let m = b.finish();
        let mut rb = ModelRatings::builder(&c);
        for (i, &(pa, pb)) in p.iter().enumerate() {
            rb.add(
                "model",
                &format!("s{i}"),
                ModelRating {
                    p_yes_a: pa,
                    p_yes_b: pb,
                    n_samples_a: None,
                    n_samples_b: None,
                    valid: true,
                },
                i as u64 + 1,
            )
            .unwrap();
        }
        let r = rb.finish();
        (c, m, r)
    }

    #[test]
    fn model_always_matching_majority_scores_one() {
        let (_c, m, r) = model_fixture(
            &[(0.9, 0.8), (0.1, 0.2), (0.7, 0.9)],
            &[true, false, true],
        );
        let majorities = human_majorities(&m);
        let s = model_scores(&r, 0, &majorities).unwrap();
        assert_eq!(
            (s.consensus, s.awareness, s.commonsensicality),
            (1.0, 1.0, 1.0)
        );
        assert_eq!(s.n_items, 3);
    }

    #[test]
    fn model_scores_skip_invalid_and_unrated() {
        let c = corpus(3);
        let mut b = RatingMatrix::builder(&c);
        // Only s0 gets a human rating.
        b.add(
            "s0",
            "r0",
            AnswerPair {
                agree: true,
                predict_agree: true,
            },
            1,
        )
        .unwrap();
        let m = b.finish();
        let mut rb = ModelRatings::builder(&c);
        for (i, valid) in [(0usize, true), (1, true), (2, false)] {
            rb.add(
                "model",
                &format!("s{i}"),
                ModelRating {
                    p_yes_a: 1.0,
                    p_yes_b: 1.0,
                    n_samples_a: None,
                    n_samples_b: None,
                    valid,
                },
                i as u64 + 1,
            )
            .unwrap();
        }
        let r = rb.finish();
        let majorities = human_majorities(&m);
        let s = model_scores(&r, 0, &majorities).unwrap();
        // s1 has no majority; s2 is invalid; only s0 counts.
        assert_eq!(s.n_items, 1);
        assert_eq!(s.consensus, 1.0);
    }

    #[test]
    fn model_vote_flips_planted_tie() {
        // One human disagrees; model agrees. Human-only majority is
        // disagree; adding the model's vote gives d = 0.5 -> majority agree.
        let (_c, m, r) = model_fixture(&[(1.0, 1.0)], &[false]);
        let majorities = human_majorities(&m);
        assert_eq!(majorities[0], Some(false));
        let variant1 = model_scores(&r, 0, &majorities).unwrap();
        assert_eq!(variant1.consensus, 0.0);
        let variant2 = model_scores_with_model_vote(&r, 0, &m).unwrap();
        assert_eq!(variant2.consensus, 1.0);
        assert_eq!(variant2.awareness, 1.0);
    }

    #[test]
    fn divergence_counts_alpha_neq_beta() {
        let (_c, _m, r) = model_fixture(
            &[(0.9, 0.2), (0.1, 0.2), (0.7, 0.9), (0.49, 0.51)],
            &[true, false, true, true],
        );
        assert_eq!(divergence_count(&r, 0), (2, 4));
    }

    #[test]
    fn silicon_worked_example() {
        let s = silicon_statement_scores(0.95, 0.40);
        assert!((s.consensus - 0.90).abs() < 1e-12);
        assert!((s.awareness - 0.40).abs() < 1e-12);
        assert!((s.commonsensicality - 0.60).abs() < 1e-12);
    }

    #[test]
    fn silicon_tie_kills_commonsensicality() {
        let s = silicon_statement_scores(0.5, 0.87);
        assert_eq!(s.consensus, 0.0);
        assert_eq!(s.commonsensicality, 0.0);
    }

    #[test]
    fn silicon_hand_evaluation() {
        let s = silicon_statement_scores(0.2, 0.1);
        assert!((s.consensus - 0.6).abs() < 1e-12);
        assert!((s.awareness - 0.9).abs() < 1e-12);
        assert!((s.commonsensicality - 0.7348469228349535).abs() < 1e-12);
    }

    #[test]
    fn pairwise_identical_model_never_wins() {
        // Model rates exactly like the lone respondent: diff 0, no win.
        let c = corpus(2);
        let mut b = RatingMatrix::builder(&c);
        for i in 0..2 {
            b.add(
                &format!("s{i}"),
                "r0",
                AnswerPair {
                    agree: true,
                    predict_agree: true,
                },
                i as u64 + 1,
            )
            .unwrap();
        }
        let m = b.finish();
        let mut rb = ModelRatings::builder(&c);
        for i in 0..2 {
            rb.add(
                "model",
                &format!("s{i}"),
                ModelRating {
                    p_yes_a: 1.0,
                    p_yes_b: 1.0,
                    n_samples_a: None,
                    n_samples_b: None,
                    valid: true,
                },
                i as u64 + 1,
            )
            .unwrap();
        }
        let r = rb.finish();
        let majorities = human_majorities(&m);
        let cmp = pairwise_win_rate(&r, 0, &m, &majorities).unwrap();
        assert_eq!(cmp.entries.len(), 1);
        assert_eq!(cmp.entries[0].diff, 0.0);
        assert!(!cmp.entries[0].win);
        assert_eq!(cmp.win_fraction, 0.0);
    }

    #[test]
    fn pairwise_missing_coverage_errors() {
        let c = corpus(2);
        let mut b = RatingMatrix::builder(&c);
        for i in 0..2 {
            b.add(
                &format!("s{i}"),
                "r0",
                AnswerPair {
                    agree: true,
                    predict_agree: true,
                },
                i as u64 + 1,
            )
            .unwrap();
        }
        let m = b.finish();
        let mut rb = ModelRatings::builder(&c);
        rb.add(
            "model",
            "s0",
            ModelRating {
                p_yes_a: 1.0,
                p_yes_b: 1.0,
                n_samples_a: None,
                n_samples_b: None,
                valid: true,
            },
            1,
        )
        .unwrap();
        let r = rb.finish();
        let majorities = human_majorities(&m);
        assert!(matches!(
            pairwise_win_rate(&r, 0, &m, &majorities),
            Err(MetricsError::MissingModelCoverage { .. })
        ));
    }

    #[test]
    fn subset_partition_sums_to_full() {
        let (_c, m, r) = model_fixture(
            &[(0.9, 0.8), (0.1, 0.2), (0.7, 0.9), (0.2, 0.6)],
            &[true, false, true, false],
        );
        let majorities = human_majorities(&m);
        let full = model_scores(&r, 0, &majorities).unwrap();
        let mask_a = vec![true, false, true, false];
        let mask_b: Vec<bool> = mask_a.iter().map(|b| !b).collect();
        let sa = model_scores_subset(&r, 0, &majorities, Some(&mask_a)).unwrap();
        let sb = model_scores_subset(&r, 0, &majorities, Some(&mask_b)).unwrap();
        assert_eq!(sa.n_items + sb.n_items, full.n_items);
        // Full corpus subset equals the unrestricted score.
        let all = vec![true; 4];
        let sf = model_scores_subset(&r, 0, &majorities, Some(&all)).unwrap();
        assert_eq!(sf, full);
    }

    proptest! {
        #[test]
        fn consensus_symmetric(d in 0.0f64..=1.0) {
            let a = statement_consensus(d);
            let b = statement_consensus(1.0 - d);
            prop_assert!((a - b).abs() <= 1e-15);
        }

        #[test]
        fn silicon_flip_invariant(p_a in 0.0f64..=1.0, p_b in 0.0f64..=1.0) {
            // Flipping both probabilities relabels yes and no; scores are
            // unchanged. At p_a exactly 0.5 the tie rule keys on the label,
            // so the awareness component is only defined up to that choice.
            prop_assume!(p_a != 0.5);
            let s1 = silicon_statement_scores(p_a, p_b);
            let s2 = silicon_statement_scores(1.0 - p_a, 1.0 - p_b);
            prop_assert!((s1.consensus - s2.consensus).abs() <= 1e-15);
            prop_assert!((s1.awareness - s2.awareness).abs() <= 1e-15);
            // The square root amplifies a one-ulp consensus difference near
            // the tie point, so compare the squared scores.
            let m1 = s1.commonsensicality;
            let m2 = s2.commonsensicality;
            prop_assert!((m1 * m1 - m2 * m2).abs() <= 2e-15);
            prop_assert!((m1 - m2).abs() <= 1e-7);
        }

        #[test]
        fn binarize_idempotent(p in 0.0f64..=1.0) {
            let bit = model_binarize(p);
            let as_prob = if bit { 1.0 } else { 0.0 };
            prop_assert_eq!(model_binarize(as_prob), bit);
        }

        #[test]
        fn score_record_holds_geometric_mean(c in 0.0f64..=1.0, a in 0.0f64..=1.0) {
            let sr = ScoreRecord::new(c, a, 1);
            prop_assert!((sr.commonsensicality - math::sqrt(c * a)).abs() <= 1e-12);
            prop_assert!((0.0..=1.0).contains(&sr.commonsensicality));
        }

        #[test]
        fn monotone_map_fixing_threshold_side_preserves_model_scores(
            ps in proptest::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..20),
            agree in proptest::collection::vec(proptest::bool::ANY, 20),
        ) {
            // p -> (p + side)/2 maps [0,0.5) into [0,0.5) and [0.5,1] into
            // [0.5,1]: a monotone map fixing the threshold side.
            let remap = |p: f64| if p >= 0.5 { (p + 1.0) / 2.0 } else { p / 2.0 };
            let n = ps.len();
            let (_c, m, r1) = model_fixture(&ps, &agree[..n]);
            let mapped: Vec<(f64, f64)> = ps.iter().map(|&(a, b)| (remap(a), remap(b))).collect();
            let (_c2, _m2, r2) = model_fixture(&mapped, &agree[..n]);
            let majorities = human_majorities(&m);
            let s1 = model_scores(&r1, 0, &majorities).unwrap();
            let s2 = model_scores(&r2, 0, &majorities).unwrap();
            prop_assert_eq!(s1, s2);
        }
    }
}
