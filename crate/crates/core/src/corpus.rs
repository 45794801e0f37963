//! Statement corpus, sparse rating matrices, model rating tables, and model
//! metadata.
//!
//! Loaders in the companion crate parse files and feed rows into the builders
//! here; every malformed row maps to a typed [`CorpusError`] rather than a
//! panic. Built structures are immutable and safe to share across threads.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// Where a statement was sourced from. Seven fixed origins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Source {
    News,
    Campaign,
    ConceptNet,
    Atomic,
    Aphorism,
    Situational,
    Categorical,
}

impl Source {
    pub const ALL: [Source; 7] = [
        Source::News,
        Source::Campaign,
        Source::ConceptNet,
        Source::Atomic,
        Source::Aphorism,
        Source::Situational,
        Source::Categorical,
    ];

    pub fn parse(s: &str) -> Result<Self, CorpusError> {
        match s {
            "news" => Ok(Source::News),
            "campaign" => Ok(Source::Campaign),
            "conceptnet" => Ok(Source::ConceptNet),
            "atomic" => Ok(Source::Atomic),
            "aphorism" => Ok(Source::Aphorism),
            "situational" => Ok(Source::Situational),
            "categorical" => Ok(Source::Categorical),
            other => Err(CorpusError::UnknownSource {
                value: other.to_string(),
            }),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Source::News => "news",
            Source::Campaign => "campaign",
            Source::ConceptNet => "conceptnet",
            Source::Atomic => "atomic",
            Source::Aphorism => "aphorism",
            Source::Situational => "situational",
            Source::Categorical => "categorical",
        }
    }
}

/// One of the six binary feature axes every statement is labeled with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    Behavior,
    Everyday,
    Speech,
    Judgment,
    Opinion,
    Reasoning,
}

impl Axis {
    pub const ALL: [Axis; 6] = [
        Axis::Behavior,
        Axis::Everyday,
        Axis::Speech,
        Axis::Judgment,
        Axis::Opinion,
        Axis::Reasoning,
    ];

    pub fn parse(s: &str) -> Result<Self, CorpusError> {
        match s {
            "behavior" => Ok(Axis::Behavior),
            "everyday" => Ok(Axis::Everyday),
            "speech" => Ok(Axis::Speech),
            "judgment" => Ok(Axis::Judgment),
            "opinion" => Ok(Axis::Opinion),
            "reasoning" => Ok(Axis::Reasoning),
            other => Err(CorpusError::UnknownAxis {
                value: other.to_string(),
            }),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Axis::Behavior => "behavior",
            Axis::Everyday => "everyday",
            Axis::Speech => "speech",
            Axis::Judgment => "judgment",
            Axis::Opinion => "opinion",
            Axis::Reasoning => "reasoning",
        }
    }

    fn index(&self) -> usize {
        *self as usize
    }

    /// The two poles of this axis, in canonical order.
    pub fn poles(&self) -> [Pole; 2] {
        match self {
            Axis::Behavior => [Pole::Social, Pole::Physical],
            Axis::Everyday => [Pole::Everyday, Pole::Abstract],
            Axis::Speech => [Pole::Literal, Pole::Figurative],
            Axis::Judgment => [Pole::Normative, Pole::Positive],
            Axis::Opinion => [Pole::Opinion, Pole::Fact],
            Axis::Reasoning => [Pole::Knowledge, Pole::Reasoning],
        }
    }
}

/// A pole of one feature axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pole {
    Social,
    Physical,
    Everyday,
    Abstract,
    Literal,
    Figurative,
    Normative,
    Positive,
    Opinion,
    Fact,
    Knowledge,
    Reasoning,
}

impl Pole {
    pub const ALL: [Pole; 12] = [
        Pole::Social,
        Pole::Physical,
        Pole::Everyday,
        Pole::Abstract,
        Pole::Literal,
        Pole::Figurative,
        Pole::Normative,
        Pole::Positive,
        Pole::Opinion,
        Pole::Fact,
        Pole::Knowledge,
        Pole::Reasoning,
    ];

    pub fn parse(s: &str) -> Result<Self, CorpusError> {
        match s {
            "social" => Ok(Pole::Social),
            "physical" => Ok(Pole::Physical),
            "everyday" => Ok(Pole::Everyday),
            "abstract" => Ok(Pole::Abstract),
            "literal" => Ok(Pole::Literal),
            "figurative" => Ok(Pole::Figurative),
            "normative" => Ok(Pole::Normative),
            "positive" => Ok(Pole::Positive),
            "opinion" => Ok(Pole::Opinion),
            "fact" => Ok(Pole::Fact),
            "knowledge" => Ok(Pole::Knowledge),
            "reasoning" => Ok(Pole::Reasoning),
            other => Err(CorpusError::UnknownPole {
                value: other.to_string(),
            }),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Pole::Social => "social",
            Pole::Physical => "physical",
            Pole::Everyday => "everyday",
            Pole::Abstract => "abstract",
            Pole::Literal => "literal",
            Pole::Figurative => "figurative",
            Pole::Normative => "normative",
            Pole::Positive => "positive",
            Pole::Opinion => "opinion",
            Pole::Fact => "fact",
            Pole::Knowledge => "knowledge",
            Pole::Reasoning => "reasoning",
        }
    }

    /// The axis this pole belongs to.
    pub fn axis(&self) -> Axis {
        match self {
            Pole::Social | Pole::Physical => Axis::Behavior,
            Pole::Everyday | Pole::Abstract => Axis::Everyday,
            Pole::Literal | Pole::Figurative => Axis::Speech,
            Pole::Normative | Pole::Positive => Axis::Judgment,
            Pole::Opinion | Pole::Fact => Axis::Opinion,
            Pole::Knowledge | Pole::Reasoning => Axis::Reasoning,
        }
    }

    /// The opposite pole on the same axis.
    pub fn complement(&self) -> Pole {
        let [a, b] = self.axis().poles();
        if *self == a {
            b
        } else {
            a
        }
    }
}

/// Full feature labeling: exactly one pole per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Features {
    poles: [Pole; 6],
}

impl Features {
    /// Builds from (axis, pole) string pairs; every axis must appear exactly
    /// once with a pole that belongs to it.
    pub fn from_pairs<'a, I>(pairs: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut slots: [Option<Pole>; 6] = [None; 6];
        for (axis_s, pole_s) in pairs {
            let axis = Axis::parse(axis_s)?;
            let pole = Pole::parse(pole_s)?;
            if pole.axis() != axis {
                return Err(CorpusError::MismatchedPole { axis, pole });
            }
            if slots[axis.index()].is_some() {
                return Err(CorpusError::DuplicateAxis { axis });
            }
            slots[axis.index()] = Some(pole);
        }
        let mut poles = [Pole::Social; 6];
        for axis in Axis::ALL {
            match slots[axis.index()] {
                Some(p) => poles[axis.index()] = p,
                None => return Err(CorpusError::MissingAxis { axis }),
            }
        }
        Ok(Features { poles })
    }

    pub fn from_poles(poles: [Pole; 6]) -> Result<Self, CorpusError> {
        for (axis, pole) in Axis::ALL.iter().zip(poles.iter()) {
            if pole.axis() != *axis {
                return Err(CorpusError::MismatchedPole {
                    axis: *axis,
                    pole: *pole,
                });
            }
        }
        Ok(Features { poles })
    }

    pub fn pole(&self, axis: Axis) -> Pole {
        self.poles[axis.index()]
    }

    pub fn has(&self, pole: Pole) -> bool {
        self.poles[pole.axis().index()] == pole
    }

    pub fn iter(&self) -> impl Iterator<Item = (Axis, Pole)> + '_ {
        Axis::ALL.into_iter().map(|a| (a, self.pole(a)))
    }
}

/// One corpus item.
#[derive(Debug, Clone, PartialEq)]
pub struct Statement {
    pub id: String,
    pub text: String,
    pub source: Source,
    /// `None` only when loading ran with missing features downgraded to
    /// warnings; dichotomy analyses then reject the corpus.
    pub features: Option<Features>,
}

/// Validated, indexed statement collection.
#[derive(Debug, Clone)]
pub struct Corpus {
    statements: Vec<Statement>,
    index: BTreeMap<String, u32>,
}

impl Corpus {
    pub fn new(statements: Vec<Statement>) -> Result<Self, CorpusError> {
        let mut index = BTreeMap::new();
        for (i, s) in statements.iter().enumerate() {
            if index.insert(s.id.clone(), i as u32).is_some() {
                return Err(CorpusError::DuplicateStatementId { id: s.id.clone() });
            }
        }
        Ok(Corpus { statements, index })
    }

    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    pub fn statements(&self) -> &[Statement] {
        &self.statements
    }

    pub fn get(&self, idx: u32) -> &Statement {
        &self.statements[idx as usize]
    }

    pub fn index_of(&self, id: &str) -> Option<u32> {
        self.index.get(id).copied()
    }

    pub fn missing_feature_count(&self) -> usize {
        self.statements
            .iter()
            .filter(|s| s.features.is_none())
            .count()
    }

    /// Mask of statements carrying `pole`. Errors if the subset is empty or
    /// any statement lacks feature labels.
    pub fn pole_subset(&self, pole: Pole) -> Result<Vec<bool>, CorpusError> {
        let mut mask = Vec::with_capacity(self.len());
        for s in &self.statements {
            match s.features {
                Some(f) => mask.push(f.has(pole)),
                None => {
                    return Err(CorpusError::FeaturesMissing {
                        n_missing: self.missing_feature_count(),
                    })
                }
            }
        }
        if !mask.iter().any(|&b| b) {
            return Err(CorpusError::EmptySubset { pole });
        }
        Ok(mask)
    }

    /// Counts per source and per feature pole, for validation summaries.
    pub fn summary(&self) -> CorpusSummary {
        let mut by_source = [0usize; 7];
        let mut by_pole = [0usize; 12];
        for s in &self.statements {
            by_source[s.source as usize] += 1;
            if let Some(f) = s.features {
                for (_, pole) in f.iter() {
                    by_pole[pole as usize] += 1;
                }
            }
        }
        CorpusSummary {
            n_statements: self.len(),
            by_source,
            by_pole,
            missing_features: self.missing_feature_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusSummary {
    pub n_statements: usize,
    pub by_source: [usize; 7],
    pub by_pole: [usize; 12],
    pub missing_features: usize,
}

impl CorpusSummary {
    pub fn source_count(&self, s: Source) -> usize {
        self.by_source[s as usize]
    }

    pub fn pole_count(&self, p: Pole) -> usize {
        self.by_pole[p as usize]
    }
}

/// One rater's pair of binary answers to a statement: question (a) "do you
/// agree" and question (b) "would most people agree".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnswerPair {
    pub agree: bool,
    pub predict_agree: bool,
}

/// Sparse respondent × statement answers, indexed both ways.
///
/// Statement indices coincide with the [`Corpus`] the matrix was built
/// against; respondent indices are assigned in order of first appearance.
#[derive(Debug, Clone)]
pub struct RatingMatrix {
    n_statements: usize,
    respondent_ids: Vec<String>,
    respondent_index: BTreeMap<String, u32>,
    /// Ω(i): per statement, (respondent, answers) sorted by respondent index.
    by_statement: Vec<Vec<(u32, AnswerPair)>>,
    /// Φ(j): per respondent, (statement, answers) sorted by statement index.
    by_respondent: Vec<Vec<(u32, AnswerPair)>>,
    n_rows: usize,
}

impl RatingMatrix {
    pub fn builder(corpus: &Corpus) -> RatingMatrixBuilder<'_> {
        RatingMatrixBuilder {
            corpus,
            respondent_ids: Vec::new(),
            respondent_index: BTreeMap::new(),
            rows: BTreeMap::new(),
        }
    }

    pub fn n_statements(&self) -> usize {
        self.n_statements
    }

    pub fn n_respondents(&self) -> usize {
        self.respondent_ids.len()
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn respondent_ids(&self) -> &[String] {
        &self.respondent_ids
    }

    pub fn respondent_id(&self, j: u32) -> &str {
        &self.respondent_ids[j as usize]
    }

    pub fn respondent_index_of(&self, id: &str) -> Option<u32> {
        self.respondent_index.get(id).copied()
    }

    /// Ω(i): raters of statement `i` with their answers.
    pub fn raters_of(&self, i: u32) -> &[(u32, AnswerPair)] {
        &self.by_statement[i as usize]
    }

    /// Φ(j): statements rated by respondent `j` with the answers given.
    pub fn ratings_by(&self, j: u32) -> &[(u32, AnswerPair)] {
        &self.by_respondent[j as usize]
    }

    /// Statement indices with at least one rater.
    pub fn rated_statements(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.n_statements as u32).filter(|&i| !self.by_statement[i as usize].is_empty())
    }
}

/// Accumulates rating rows with duplicate detection.
pub struct RatingMatrixBuilder<'a> {
    corpus: &'a Corpus,
    respondent_ids: Vec<String>,
    respondent_index: BTreeMap<String, u32>,
    /// (statement, respondent) -> (answers, source line of first occurrence).
    rows: BTreeMap<(u32, u32), (AnswerPair, u64)>,
}

impl<'a> RatingMatrixBuilder<'a> {
    /// Adds one rating row. `line` is the 1-based source location used in
    /// duplicate diagnostics (pass the row ordinal for non-file sources).
    pub fn add(
        &mut self,
        statement_id: &str,
        respondent_id: &str,
        answers: AnswerPair,
        line: u64,
    ) -> Result<(), CorpusError> {
        let stmt = self
            .corpus
            .index_of(statement_id)
            .ok_or_else(|| CorpusError::UnknownStatement {
                id: statement_id.to_string(),
            })?;
        let resp = match self.respondent_index.get(respondent_id) {
            Some(&j) => j,
            None => {
                let j = self.respondent_ids.len() as u32;
                self.respondent_ids.push(respondent_id.to_string());
                self.respondent_index.insert(respondent_id.to_string(), j);
                j
            }
        };
        if let Some(&(_, first_line)) = self.rows.get(&(stmt, resp)) {
            return Err(CorpusError::DuplicatePair {
                statement: statement_id.to_string(),
                respondent: respondent_id.to_string(),
                first_line,
                second_line: line,
            });
        }
        self.rows.insert((stmt, resp), (answers, line));
        Ok(())
    }

    pub fn finish(self) -> RatingMatrix {
        let n_statements = self.corpus.len();
        let mut by_statement = alloc::vec![Vec::new(); n_statements];
        let mut by_respondent = alloc::vec![Vec::new(); self.respondent_ids.len()];
        let n_rows = self.rows.len();
        for (&(i, j), &(answers, _)) in &self.rows {
            by_statement[i as usize].push((j, answers));
            by_respondent[j as usize].push((i, answers));
        }
        for v in &mut by_statement {
            v.sort_unstable_by_key(|&(j, _)| j);
        }
        // BTreeMap iteration already yields statements in order per respondent.
        RatingMatrix {
            n_statements,
            respondent_ids: self.respondent_ids,
            respondent_index: self.respondent_index,
            by_statement,
            by_respondent,
            n_rows,
        }
    }
}

/// One model's answer probabilities for one statement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelRating {
    /// p(answer "yes") to question (a), after yes/no rescaling.
    pub p_yes_a: f64,
    /// p(answer "yes") to question (b), after yes/no rescaling.
    pub p_yes_b: f64,
    pub n_samples_a: Option<u32>,
    pub n_samples_b: Option<u32>,
    /// Rows flagged invalid are kept for accounting but excluded from every
    /// score.
    pub valid: bool,
}

/// Per-model, per-statement rating table.
#[derive(Debug, Clone)]
pub struct ModelRatings {
    models: Vec<String>,
    model_index: BTreeMap<String, u32>,
    /// Per model: statement index -> rating.
    ratings: Vec<BTreeMap<u32, ModelRating>>,
    invalid_counts: Vec<usize>,
}

impl ModelRatings {
    pub fn builder(corpus: &Corpus) -> ModelRatingsBuilder<'_> {
        ModelRatingsBuilder {
            corpus,
            inner: ModelRatings {
                models: Vec::new(),
                model_index: BTreeMap::new(),
                ratings: Vec::new(),
                invalid_counts: Vec::new(),
            },
            seen: BTreeMap::new(),
        }
    }

    pub fn models(&self) -> &[String] {
        &self.models
    }

    pub fn model_index_of(&self, model: &str) -> Option<u32> {
        self.model_index.get(model).copied()
    }

    /// All ratings of one model, valid and invalid, keyed by statement index.
    pub fn ratings_of(&self, model: u32) -> &BTreeMap<u32, ModelRating> {
        &self.ratings[model as usize]
    }

    /// Valid ratings of one model.
    pub fn valid_ratings_of(&self, model: u32) -> impl Iterator<Item = (u32, &ModelRating)> + '_ {
        self.ratings[model as usize]
            .iter()
            .filter(|(_, r)| r.valid)
            .map(|(&i, r)| (i, r))
    }

    pub fn get(&self, model: u32, statement: u32) -> Option<&ModelRating> {
        self.ratings[model as usize].get(&statement)
    }

    pub fn invalid_count(&self, model: u32) -> usize {
        self.invalid_counts[model as usize]
    }
}

pub struct ModelRatingsBuilder<'a> {
    corpus: &'a Corpus,
    inner: ModelRatings,
    seen: BTreeMap<(u32, u32), u64>,
}

impl<'a> ModelRatingsBuilder<'a> {
    pub fn add(
        &mut self,
        model: &str,
        statement_id: &str,
        rating: ModelRating,
        line: u64,
    ) -> Result<(), CorpusError> {
        for (field, p) in [("p_yes_a", rating.p_yes_a), ("p_yes_b", rating.p_yes_b)] {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(CorpusError::ProbabilityOutOfRange {
                    field,
                    value: p,
                });
            }
        }
        let stmt = self
            .corpus
            .index_of(statement_id)
            .ok_or_else(|| CorpusError::UnknownStatement {
                id: statement_id.to_string(),
            })?;
        let m = match self.inner.model_index.get(model) {
            Some(&m) => m,
            None => {
                let m = self.inner.models.len() as u32;
                self.inner.models.push(model.to_string());
                self.inner.model_index.insert(model.to_string(), m);
                self.inner.ratings.push(BTreeMap::new());
                self.inner.invalid_counts.push(0);
                m
            }
        };
        if let Some(&first_line) = self.seen.get(&(m, stmt)) {
            return Err(CorpusError::DuplicateModelRating {
                model: model.to_string(),
                statement: statement_id.to_string(),
                first_line,
                second_line: line,
            });
        }
        self.seen.insert((m, stmt), line);
        if !rating.valid {
            self.inner.invalid_counts[m as usize] += 1;
        }
        self.inner.ratings[m as usize].insert(stmt, rating);
        Ok(())
    }

    pub fn finish(self) -> ModelRatings {
        self.inner
    }
}

/// Model metadata row: family, size, and external benchmark scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelMeta {
    pub model: String,
    pub family: String,
    /// Parameter count in billions.
    pub size_b: Option<f64>,
    pub elo: Option<f64>,
    pub openbookqa: Option<f64>,
}

impl ModelMeta {
    pub fn validate(&self) -> Result<(), CorpusError> {
        if let Some(s) = self.size_b {
            if !(s > 0.0) || !s.is_finite() {
                return Err(CorpusError::InvalidModelSize {
                    model: self.model.clone(),
                    value: s,
                });
            }
        }
        if let Some(e) = self.elo {
            if !e.is_finite() {
                return Err(CorpusError::InvalidElo {
                    model: self.model.clone(),
                    value: e,
                });
            }
        }
        Ok(())
    }
}

/// Validation failure in corpus, rating, or metadata construction.
#[derive(Debug, Clone, PartialEq)]
pub enum CorpusError {
    DuplicateStatementId {
        id: String,
    },
    UnknownSource {
        value: String,
    },
    UnknownAxis {
        value: String,
    },
    UnknownPole {
        value: String,
    },
    MismatchedPole {
        axis: Axis,
        pole: Pole,
    },
    DuplicateAxis {
        axis: Axis,
    },
    MissingAxis {
        axis: Axis,
    },
    UnknownStatement {
        id: String,
    },
    DuplicatePair {
        statement: String,
        respondent: String,
        first_line: u64,
        second_line: u64,
    },
    DuplicateModelRating {
        model: String,
        statement: String,
        first_line: u64,
        second_line: u64,
    },
    ProbabilityOutOfRange {
        field: &'static str,
        value: f64,
    },
    InvalidModelSize {
        model: String,
        value: f64,
    },
    InvalidElo {
        model: String,
        value: f64,
    },
    FeaturesMissing {
        n_missing: usize,
    },
    EmptySubset {
        pole: Pole,
    },
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusError::DuplicateStatementId { id } => {
                write!(f, "duplicate statement id {id:?}")
            }
            CorpusError::UnknownSource { value } => {
                write!(f, "unknown source {value:?} (expected one of news, campaign, conceptnet, atomic, aphorism, situational, categorical)")
            }
            CorpusError::UnknownAxis { value } => write!(f, "unknown feature axis {value:?}"),
            CorpusError::UnknownPole { value } => write!(f, "unknown feature pole {value:?}"),
            CorpusError::MismatchedPole { axis, pole } => write!(
                f,
                "pole {:?} does not belong to axis {:?}",
                pole.as_str(),
                axis.as_str()
            ),
            CorpusError::DuplicateAxis { axis } => {
                write!(f, "feature axis {:?} given twice", axis.as_str())
            }
            CorpusError::MissingAxis { axis } => {
                write!(f, "feature axis {:?} missing", axis.as_str())
            }
            CorpusError::UnknownStatement { id } => {
                write!(f, "statement id {id:?} not in corpus")
            }
            CorpusError::DuplicatePair {
                statement,
                respondent,
                first_line,
                second_line,
            } => write!(
                f,
                "duplicate rating for (statement {statement:?}, respondent {respondent:?}): lines {first_line} and {second_line}"
            ),
            CorpusError::DuplicateModelRating {
                model,
                statement,
                first_line,
                second_line,
            } => write!(
                f,
                "duplicate rating for (model {model:?}, statement {statement:?}): lines {first_line} and {second_line}"
            ),
            CorpusError::ProbabilityOutOfRange { field, value } => {
                write!(f, "{field} = {value} outside [0, 1]")
            }
            CorpusError::InvalidModelSize { model, value } => {
                write!(f, "model {model:?} has non-positive size {value}")
            }
            CorpusError::InvalidElo { model, value } => {
                write!(f, "model {model:?} has non-finite elo {value}")
            }
            CorpusError::FeaturesMissing { n_missing } => write!(
                f,
                "{n_missing} statements lack feature labels; dichotomy analyses need a fully labeled corpus"
            ),
            CorpusError::EmptySubset { pole } => {
                write!(f, "no statement carries pole {:?}", pole.as_str())
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CorpusError {}
