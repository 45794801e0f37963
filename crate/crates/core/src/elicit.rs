//! Prompt construction and yes/no answer aggregation.
//!
//! Rendering is byte-stable: the same (statement, question, variant) always
//! produces the same messages, which also keys the response cache in the
//! companion crate. Token-probability aggregation and repeated-sampling
//! estimation both land in an [`AnswerDistribution`], whose rescaled yes
//! probability is what enters model rating files.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

/// Which survey question a prompt asks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Question {
    /// (a) Does the rater agree with the statement?
    Agree,
    /// (b) Does the rater think most people would agree?
    OthersAgree,
}

impl Question {
    pub fn as_str(&self) -> &'static str {
        match self {
            Question::Agree => "a",
            Question::OthersAgree => "b",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "a" => Some(Question::Agree),
            "b" => Some(Question::OthersAgree),
            _ => None,
        }
    }
}

/// Full specification of one prompt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSpec {
    pub statement: String,
    pub question: Question,
    /// Optional system message prepended verbatim (role-clarification runs).
    pub system_prompt: Option<String>,
    /// Appends the no-explanation sentence used for reasoning models.
    pub suppress_reasoning: bool,
    /// Question (b) asks about "most other people" instead of "most people".
    pub most_other_people: bool,
}

impl PromptSpec {
    pub fn new(statement: impl Into<String>, question: Question) -> Self {
        PromptSpec {
            statement: statement.into(),
            question,
            system_prompt: None,
            suppress_reasoning: false,
            most_other_people: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    System,
    User,
}

impl Role {
    pub fn as_str(&self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
        }
    }
}

/// One chat message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

const SUPPRESS_REASONING_SENTENCE: &str =
    " Do not include anything else, such as an explanation or reasoning.";

/// Renders the message list for one question. Each question belongs in a
/// fresh chat session, so the list is a full conversation prefix.
pub fn build_prompt(spec: &PromptSpec) -> Vec<Message> {
    let question_clause = match (spec.question, spec.most_other_people) {
        (Question::Agree, _) => "Do you agree with this statement?",
        (Question::OthersAgree, false) => "Do you think most people would agree with this statement?",
        (Question::OthersAgree, true) => {
            "Do you think most other people would agree with this statement?"
        }
    };
    let mut content = alloc::format!(
        "Consider the following statement, \"{}\" {} Start your answer with a \"yes\" or \"no\".",
        spec.statement,
        question_clause
    );
    if spec.suppress_reasoning {
        content.push_str(SUPPRESS_REASONING_SENTENCE);
    }
    let mut messages = Vec::with_capacity(2);
    if let Some(system) = &spec.system_prompt {
        messages.push(Message {
            role: Role::System,
            content: system.clone(),
        });
    }
    messages.push(Message {
        role: Role::User,
        content,
    });
    messages
}

/// How an answer distribution was estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimationMethod {
    TokenProbs,
    RepeatedSampling,
}

impl EstimationMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimationMethod::TokenProbs => "token_probs",
            EstimationMethod::RepeatedSampling => "repeated_sampling",
        }
    }
}

/// Yes/no answer mass before and after rescaling.
///
/// Pre-rescale, `p_yes + p_no + p_other = 1`. Rescaling divides the yes and
/// no masses by their sum; when that sum is zero the record is invalid and
/// excluded from scoring (but counted).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnswerDistribution {
    pub p_yes: f64,
    pub p_no: f64,
    pub p_other: f64,
    /// `p_yes / (p_yes + p_no)`; 0 when invalid.
    pub p_yes_rescaled: f64,
    pub valid: bool,
    pub n_samples: Option<u32>,
    pub method: EstimationMethod,
}

fn finish_distribution(
    p_yes: f64,
    p_no: f64,
    p_other: f64,
    n_samples: Option<u32>,
    method: EstimationMethod,
) -> AnswerDistribution {
    let denom = p_yes + p_no;
    if denom > 0.0 {
        AnswerDistribution {
            p_yes,
            p_no,
            p_other,
            p_yes_rescaled: p_yes / denom,
            valid: true,
            n_samples,
            method,
        }
    } else {
        AnswerDistribution {
            p_yes,
            p_no,
            p_other,
            p_yes_rescaled: 0.0,
            valid: false,
            n_samples,
            method,
        }
    }
}

/// Surface forms that count as yes / no answers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    yes: Vec<String>,
    no: Vec<String>,
}

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon {
            yes: alloc::vec!["yes".to_string()],
            no: alloc::vec!["no".to_string()],
        }
    }
}

impl Lexicon {
    pub fn new(yes: Vec<String>, no: Vec<String>) -> Self {
        Lexicon {
            yes: yes.iter().map(|s| normalize_token(s)).collect(),
            no: no.iter().map(|s| normalize_token(s)).collect(),
        }
    }

    /// Classifies one surface token.
    pub fn classify(&self, token: &str) -> TokenClass {
        let norm = normalize_token(token);
        if self.yes.iter().any(|y| *y == norm) {
            TokenClass::Yes
        } else if self.no.iter().any(|n| *n == norm) {
            TokenClass::No
        } else {
            TokenClass::Other
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenClass {
    Yes,
    No,
    Other,
}

/// Strips leading whitespace and quote characters, then lowercases.
/// Tokenizers emit variants like `Yes`, ` yes`, and `"Yes` for the same
/// answer; this folds them to one surface form.
pub fn normalize_token(token: &str) -> String {
    let stripped =
        token.trim_start_matches(|c: char| c.is_whitespace() || matches!(c, '"' | '\'' | '\u{201c}' | '\u{201d}' | '\u{2018}' | '\u{2019}' | '`'));
    stripped.to_lowercase()
}

/// Sums next-token probabilities over the yes and no lexicons and rescales.
/// Everything unmatched lands in `p_other`; a record with zero yes+no mass is
/// invalid.
pub fn aggregate_token_probs<'a, I>(token_probs: I, lexicon: &Lexicon) -> AnswerDistribution
where
    I: IntoIterator<Item = (&'a str, f64)>,
{
    let mut p_yes = 0.0;
    let mut p_no = 0.0;
    let mut matched = 0.0;
    for (token, p) in token_probs {
        debug_assert!(p >= 0.0);
        match lexicon.classify(token) {
            TokenClass::Yes => {
                p_yes += p;
                matched += p;
            }
            TokenClass::No => {
                p_no += p;
                matched += p;
            }
            TokenClass::Other => {}
        }
    }
    let p_other = (1.0 - matched).max(0.0);
    finish_distribution(p_yes, p_no, p_other, None, EstimationMethod::TokenProbs)
}

/// Estimates the answer distribution from repeated samples' first tokens.
/// Unclassifiable responses count into `p_other`; zero classifiable
/// responses make the record invalid.
pub fn repeated_sampling_estimate<'a, I>(first_tokens: I, lexicon: &Lexicon) -> AnswerDistribution
where
    I: IntoIterator<Item = &'a str>,
{
    let mut yes = 0usize;
    let mut no = 0usize;
    let mut other = 0usize;
    for token in first_tokens {
        match lexicon.classify(token) {
            TokenClass::Yes => yes += 1,
            TokenClass::No => no += 1,
            TokenClass::Other => other += 1,
        }
    }
    let n = yes + no + other;
    if n == 0 {
        return AnswerDistribution {
            p_yes: 0.0,
            p_no: 0.0,
            p_other: 0.0,
            p_yes_rescaled: 0.0,
            valid: false,
            n_samples: Some(0),
            method: EstimationMethod::RepeatedSampling,
        };
    }
    let nf = n as f64;
    finish_distribution(
        yes as f64 / nf,
        no as f64 / nf,
        other as f64 / nf,
        Some(n as u32),
        EstimationMethod::RepeatedSampling,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn question_a_template_is_exact() {
        let spec = PromptSpec::new("A ball is round.", Question::Agree);
        let msgs = build_prompt(&spec);
        assert_eq!(msgs.len(), 1);
        assert_eq!(msgs[0].role, Role::User);
        assert_eq!(
            msgs[0].content,
            "Consider the following statement, \"A ball is round.\" Do you agree with this statement? Start your answer with a \"yes\" or \"no\"."
        );
    }

    #[test]
    fn question_b_differs_only_in_question_clause() {
        let a = build_prompt(&PromptSpec::new("S", Question::Agree));
        let b = build_prompt(&PromptSpec::new("S", Question::OthersAgree));
        assert_eq!(
            b[0].content,
            a[0].content.replace(
                "Do you agree with this statement?",
                "Do you think most people would agree with this statement?"
            )
        );
    }

    #[test]
    fn most_other_people_variant() {
        let mut spec = PromptSpec::new("S", Question::OthersAgree);
        spec.most_other_people = true;
        let msgs = build_prompt(&spec);
        assert!(msgs[0]
            .content
            .contains("Do you think most other people would agree with this statement?"));
    }

    #[test]
    fn system_prompt_prepended_verbatim() {
        let mut spec = PromptSpec::new("S", Question::Agree);
        spec.system_prompt = Some("You are an independent participant in a survey administered by academic researchers, who study commonsense beliefs. You will be presented with a statement, and asked a question about that statement. Answer the question independently, and please do not take into account what you think the researchers might want you to say.".to_string());
        let msgs = build_prompt(&spec);
        assert_eq!(msgs.len(), 2);
        assert_eq!(msgs[0].role, Role::System);
        assert!(msgs[0].content.starts_with("You are an independent participant"));
        assert_eq!(msgs[1].role, Role::User);
    }

    #[test]
    fn suppress_reasoning_appends_sentence() {
        let mut spec = PromptSpec::new("S", Question::Agree);
        spec.suppress_reasoning = true;
        let msgs = build_prompt(&spec);
        assert!(msgs[0].content.ends_with(
            "Start your answer with a \"yes\" or \"no\". Do not include anything else, such as an explanation or reasoning."
        ));
    }

    #[test]
    fn rendering_is_injective_across_variants() {
        let mut seen = alloc::collections::BTreeSet::new();
        for (q, other, suppress) in [
            (Question::Agree, false, false),
            (Question::OthersAgree, false, false),
            (Question::OthersAgree, true, false),
            (Question::Agree, false, true),
        ] {
            let mut spec = PromptSpec::new("S", q);
            spec.most_other_people = other;
            spec.suppress_reasoning = suppress;
            let rendered = build_prompt(&spec)
                .into_iter()
                .map(|m| m.content)
                .collect::<Vec<_>>()
                .join("\u{0}");
            assert!(seen.insert(rendered), "collision for {q:?}/{other}/{suppress}");
        }
    }

    #[test]
    fn aggregate_forced_example() {
        let lex = Lexicon::default();
        let dist = aggregate_token_probs(
            [("Yes", 0.6), (" yes", 0.1), ("No", 0.2), ("As", 0.1)],
            &lex,
        );
        assert!(dist.valid);
        assert!((dist.p_yes - 0.7).abs() < 1e-12);
        assert!((dist.p_no - 0.2).abs() < 1e-12);
        assert!((dist.p_other - 0.1).abs() < 1e-12);
        assert!((dist.p_yes_rescaled - 0.7 / 0.9).abs() < 1e-12);
    }

    #[test]
    fn aggregate_all_no() {
        let dist = aggregate_token_probs([("no", 1.0)], &Lexicon::default());
        assert_eq!(dist.p_yes_rescaled, 0.0);
        assert!(dist.valid);
    }

    #[test]
    fn aggregate_no_answer_mass_is_invalid() {
        let dist = aggregate_token_probs([("As", 0.9), ("I", 0.1)], &Lexicon::default());
        assert!(!dist.valid);
        assert!((dist.p_other - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quoted_and_curly_tokens_normalize() {
        let lex = Lexicon::default();
        assert_eq!(lex.classify("\"Yes"), TokenClass::Yes);
        assert_eq!(lex.classify("\u{201c}No"), TokenClass::No);
        assert_eq!(lex.classify("  YES"), TokenClass::Yes);
        // Trailing punctuation is not stripped.
        assert_eq!(lex.classify("yes,"), TokenClass::Other);
    }

    #[test]
    fn repeated_sampling_counts() {
        let lex = Lexicon::default();
        let answers: Vec<&str> = core::iter::repeat_n("yes", 14)
            .chain(core::iter::repeat_n("no", 9))
            .collect();
        let dist = repeated_sampling_estimate(answers.iter().copied(), &lex);
        assert_eq!(dist.n_samples, Some(23));
        assert!((dist.p_yes_rescaled - 14.0 / 23.0).abs() < 1e-12);
        assert!(dist.valid);
    }

    #[test]
    fn repeated_sampling_all_yes_and_empty() {
        let lex = Lexicon::default();
        let dist = repeated_sampling_estimate(["yes", "Yes", " yes"], &lex);
        assert_eq!(dist.p_yes_rescaled, 1.0);
        let dist = repeated_sampling_estimate(["As", "I"], &lex);
        assert!(!dist.valid);
        let dist = repeated_sampling_estimate([], &lex);
        assert!(!dist.valid);
    }

    proptest! {
        #[test]
        fn rescaled_in_unit_interval_when_valid(
            tokens in proptest::collection::vec(("(yes|no|Yes|No|As|Maybe| yes)", 0.0f64..1.0), 1..12)
        ) {
            let lex = Lexicon::default();
            let pairs: Vec<(&str, f64)> = tokens.iter().map(|(s, p)| (s.as_str(), *p)).collect();
            let dist = aggregate_token_probs(pairs.iter().map(|(s, p)| (*s, *p)), &lex);
            if dist.valid {
                prop_assert!((0.0..=1.0).contains(&dist.p_yes_rescaled));
            } else {
                prop_assert_eq!(dist.p_yes_rescaled, 0.0);
            }
        }

        #[test]
        fn sampling_estimator_unbiased(p in 0.05f64..0.95, seed in 0u64..500) {
            // Mean estimate over simulated batches stays within
            // 3*sqrt(p(1-p)/n) of the true p, n being one batch's size.
            let lex = Lexicon::default();
            let n = 60usize;
            let batches = 64usize;
            let rng = crate::rng::StreamRng::new(seed);
            let mut total = 0.0;
            for b in 0..batches {
                let mut stream = rng.stream(b as u64);
                let answers: Vec<&str> = (0..n)
                    .map(|_| if stream.bernoulli(p) { "yes" } else { "no" })
                    .collect();
                let dist = repeated_sampling_estimate(answers.iter().copied(), &lex);
                total += dist.p_yes_rescaled;
            }
            let mean = total / batches as f64;
            let bound = 3.0 * (p * (1.0 - p) / n as f64).sqrt();
            prop_assert!((mean - p).abs() < bound, "mean {mean} vs p {p}");
        }
    }
}
