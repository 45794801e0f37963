//! Subcommand definitions and drivers.
//!
//! Every run hashes its inputs, stages its outputs, and writes a manifest
//! next to them; a failed run removes whatever it had written. Exit codes:
//! 0 success, 1 validation, 2 runtime.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use sensus_core::corpus::{Axis, Corpus, ModelMeta, ModelRatings, Pole, RatingMatrix};
use sensus_core::elicit::Question;
use sensus_core::metrics;
use sensus_core::regress::{self, DesignMatrix, SsTotMode};
use sensus_core::rng::StreamRng;
use sensus_core::stats;
use sensus_core::synth;

use crate::collect::{self, CollectConfig, CollectMode};
use crate::error::{Result, RunError};
use crate::figures;
use crate::formats::{self, fmt_f64, fmt_pct, CsvOutput};
use crate::manifest::RunContext;

#[derive(Debug, Parser)]
#[command(
    name = "sensus",
    version,
    about = "Population-agreement evaluation of statements, survey respondents, and language models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Seed for every randomized routine in the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Directory for outputs and the manifest.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,

    /// Manifest path override (default: <out-dir>/manifest.json).
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// statements.jsonl
    #[arg(long)]
    pub statements: PathBuf,

    /// Downgrade missing feature labels to warnings.
    #[arg(long)]
    pub allow_missing_features: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate input files and report corpus/ratings summaries.
    Ingest {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// human_ratings.csv
        #[arg(long)]
        human: Option<PathBuf>,
        /// model_ratings.jsonl
        #[arg(long)]
        models: Option<PathBuf>,
        /// model_meta.csv
        #[arg(long)]
        meta: Option<PathBuf>,
    },
    /// Score statements, respondents, and models.
    Score {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        human: PathBuf,
        #[arg(long)]
        models: Option<PathBuf>,
        /// Let each model's own rating join the majority vote.
        #[arg(long)]
        with_model_vote: bool,
        /// Restrict scoring to statements carrying this feature pole.
        #[arg(long)]
        features: Option<String>,
    },
    /// Compare each model against every respondent on the respondent's own
    /// statement set.
    Compare {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        human: PathBuf,
        #[arg(long)]
        models: PathBuf,
    },
    /// Statement-level silicon-population scores and their gap to humans.
    Silicon {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        human: PathBuf,
        #[arg(long)]
        models: PathBuf,
    },
    /// Correlate silicon and human statement scores; split-half reliability.
    Correlate {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        human: PathBuf,
        #[arg(long)]
        models: PathBuf,
        /// Split-half repeats.
        #[arg(long, default_value_t = 1000)]
        splits: usize,
    },
    /// Bootstrap feature-dichotomy contrasts per population.
    Contrast {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        human: PathBuf,
        #[arg(long)]
        models: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        bootstrap_n: usize,
    },
    /// Mixed-effects size regression, benchmark correlations, and
    /// cross-validated out-of-sample R².
    Regress {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        human: PathBuf,
        #[arg(long)]
        models: PathBuf,
        #[arg(long)]
        meta: PathBuf,
        #[arg(long, default_value_t = 50)]
        folds: usize,
        /// Convergence tolerance for the REML profile search.
        #[arg(long, default_value_t = 1e-8)]
        lmm_tol: f64,
        /// Compute held-out R² about the training mean instead of the
        /// held-out fold's own mean.
        #[arg(long)]
        r2_training_mean: bool,
    },
    /// Calibration of model probabilities against human frequencies.
    Calibrate {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        human: PathBuf,
        #[arg(long)]
        models: PathBuf,
        #[arg(long, default_value_t = 10)]
        bins: usize,
    },
    /// Query an OpenAI-compatible endpoint and assemble model ratings.
    Collect {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Endpoint base URL or full chat-completions URL.
        #[arg(long)]
        endpoint: String,
        #[arg(long)]
        model: String,
        /// token (next-token probabilities) or sampling (repeated
        /// completions).
        #[arg(long, default_value = "token")]
        mode: String,
        /// Completions per question in sampling mode.
        #[arg(long, default_value_t = 23)]
        samples: usize,
        #[arg(long, default_value_t = 4)]
        concurrency: usize,
        /// Token-bucket rate limit on request starts.
        #[arg(long)]
        rps: Option<f64>,
        /// Response cache (JSONL, appended; reruns skip cached keys).
        #[arg(long)]
        cache: Option<PathBuf>,
        /// File whose contents become the system message.
        #[arg(long)]
        system_prompt_file: Option<PathBuf>,
        /// Append the no-explanation sentence for reasoning models.
        #[arg(long)]
        suppress_reasoning: bool,
        /// Ask about "most other people" instead of "most people".
        #[arg(long)]
        most_other_people: bool,
        #[arg(long, default_value_t = 4)]
        max_retries: u32,
        /// Backoff base in milliseconds.
        #[arg(long, default_value_t = 250)]
        retry_base_ms: u64,
        #[arg(long, default_value_t = 60)]
        timeout_secs: u64,
    },
    /// Generate a synthetic population through the same file formats.
    Synth {
        #[arg(long, default_value_t = 100)]
        n_statements: usize,
        #[arg(long, default_value_t = 50)]
        n_respondents: usize,
        #[arg(long, default_value_t = 50)]
        ratings_per_respondent: usize,
        /// uniform: per-statement probabilities drawn uniformly; fixed: use
        /// --q-agree/--q-predict everywhere.
        #[arg(long, default_value = "uniform")]
        q_mode: String,
        #[arg(long, default_value_t = 0.7)]
        q_agree: f64,
        #[arg(long, default_value_t = 0.7)]
        q_predict: f64,
        /// Round-robin assignment that equalizes raters per statement.
        #[arg(long)]
        balanced: bool,
        /// Also emit this many synthetic model rating tables.
        #[arg(long, default_value_t = 0)]
        models: usize,
    },
    /// Emit figure-ready CSVs and static SVGs from prior run outputs.
    Export {
        /// Directory holding the upstream outputs (scores.csv, ...).
        #[arg(long)]
        from: PathBuf,
        /// model_meta.csv for the size/benchmark panels.
        #[arg(long)]
        meta: Option<PathBuf>,
    },
}

pub fn run(cli: Cli, raw_args: Vec<String>) -> Result<()> {
    let mut ctx = RunContext::new(&cli.out_dir, cli.seed, cli.manifest.as_deref(), raw_args)?;
    let outcome = dispatch(&cli, &mut ctx);
    match outcome {
        Ok(()) => {
            ctx.finish()?;
            Ok(())
        }
        Err(e) => {
            ctx.discard();
            Err(e)
        }
    }
}

fn dispatch(cli: &Cli, ctx: &mut RunContext) -> Result<()> {
    match &cli.command {
        Command::Ingest {
            corpus,
            human,
            models,
            meta,
        } => cmd_ingest(ctx, corpus, human.as_deref(), models.as_deref(), meta.as_deref()),
        Command::Score {
            corpus,
            human,
            models,
            with_model_vote,
            features,
        } => cmd_score(
            ctx,
            corpus,
            human,
            models.as_deref(),
            *with_model_vote,
            features.as_deref(),
        ),
        Command::Compare {
            corpus,
            human,
            models,
        } => cmd_compare(ctx, corpus, human, models),
        Command::Silicon {
            corpus,
            human,
            models,
        } => cmd_silicon(ctx, corpus, human, models),
        Command::Correlate {
            corpus,
            human,
            models,
            splits,
        } => cmd_correlate(ctx, corpus, human, models, *splits),
        Command::Contrast {
            corpus,
            human,
            models,
            bootstrap_n,
        } => cmd_contrast(ctx, corpus, human, models.as_deref(), *bootstrap_n),
        Command::Regress {
            corpus,
            human,
            models,
            meta,
            folds,
            lmm_tol,
            r2_training_mean,
        } => cmd_regress(
            ctx,
            corpus,
            human,
            models,
            meta,
            *folds,
            *lmm_tol,
            *r2_training_mean,
        ),
        Command::Calibrate {
            corpus,
            human,
            models,
            bins,
        } => cmd_calibrate(ctx, corpus, human, models, *bins),
        Command::Collect {
            corpus,
            endpoint,
            model,
            mode,
            samples,
            concurrency,
            rps,
            cache,
            system_prompt_file,
            suppress_reasoning,
            most_other_people,
            max_retries,
            retry_base_ms,
            timeout_secs,
        } => cmd_collect(
            ctx,
            corpus,
            endpoint,
            model,
            mode,
            *samples,
            *concurrency,
            *rps,
            cache.as_deref(),
            system_prompt_file.as_deref(),
            *suppress_reasoning,
            *most_other_people,
            *max_retries,
            *retry_base_ms,
            *timeout_secs,
        ),
        Command::Synth {
            n_statements,
            n_respondents,
            ratings_per_respondent,
            q_mode,
            q_agree,
            q_predict,
            balanced,
            models,
        } => cmd_synth(
            ctx,
            *n_statements,
            *n_respondents,
            *ratings_per_respondent,
            q_mode,
            *q_agree,
            *q_predict,
            *balanced,
            *models,
        ),
        Command::Export { from, meta } => cmd_export(ctx, from, meta.as_deref()),
    }
}

fn load_corpus(ctx: &mut RunContext, args: &CorpusArgs) -> Result<(Corpus, usize)> {
    ctx.record_input(&args.statements)?;
    let (corpus, missing) =
        formats::load_statements(&args.statements, args.allow_missing_features)?;
    if missing > 0 {
        ctx.note(format!("{missing} statements lack feature labels"));
        eprintln!("warning: {missing} statements lack feature labels");
    }
    Ok((corpus, missing))
}

fn load_matrix(ctx: &mut RunContext, path: &Path, corpus: &Corpus) -> Result<RatingMatrix> {
    ctx.record_input(path)?;
    formats::load_human_ratings(path, corpus)
}

fn load_ratings(ctx: &mut RunContext, path: &Path, corpus: &Corpus) -> Result<ModelRatings> {
    ctx.record_input(path)?;
    formats::load_model_ratings(path, corpus)
}

fn cmd_ingest(
    ctx: &mut RunContext,
    corpus_args: &CorpusArgs,
    human: Option<&Path>,
    models: Option<&Path>,
    meta: Option<&Path>,
) -> Result<()> {
    let (corpus, _) = load_corpus(ctx, corpus_args)?;
    let summary = corpus.summary();

    let mut report = serde_json::json!({
        "statements": {
            "n": summary.n_statements,
            "by_source": sensus_core::corpus::Source::ALL
                .iter()
                .map(|s| (s.as_str().to_string(), summary.source_count(*s)))
                .collect::<BTreeMap<_, _>>(),
            "by_pole": Pole::ALL
                .iter()
                .map(|p| (p.as_str().to_string(), summary.pole_count(*p)))
                .collect::<BTreeMap<_, _>>(),
            "missing_features": summary.missing_features,
        }
    });
    println!("statements: {}", summary.n_statements);
    for s in sensus_core::corpus::Source::ALL {
        println!("  source {}: {}", s.as_str(), summary.source_count(s));
    }
    for p in Pole::ALL {
        println!("  pole {}: {}", p.as_str(), summary.pole_count(p));
    }

    if let Some(path) = human {
        let matrix = load_matrix(ctx, path, &corpus)?;
        let rated = matrix.rated_statements().count();
        println!(
            "ratings: {} rows, {} respondents, {} rated statements",
            matrix.n_rows(),
            matrix.n_respondents(),
            rated
        );
        report["ratings"] = serde_json::json!({
            "rows": matrix.n_rows(),
            "respondents": matrix.n_respondents(),
            "rated_statements": rated,
        });
    }
    if let Some(path) = models {
        let ratings = load_ratings(ctx, path, &corpus)?;
        let invalid: BTreeMap<String, usize> = ratings
            .models()
            .iter()
            .enumerate()
            .map(|(m, name)| (name.clone(), ratings.invalid_count(m as u32)))
            .collect();
        println!("models: {}", ratings.models().len());
        for (name, count) in &invalid {
            println!("  {name}: {} invalid rows", count);
        }
        report["models"] = serde_json::json!({
            "n_models": ratings.models().len(),
            "invalid": invalid,
        });
    }
    if let Some(path) = meta {
        ctx.record_input(path)?;
        let metas = formats::load_model_meta(path)?;
        println!("meta: {} rows", metas.len());
        report["meta"] = serde_json::json!({ "rows": metas.len() });
    }

    let out = ctx.output("ingest.json");
    std::fs::write(
        &out,
        serde_json::to_string_pretty(&report).map_err(|e| RunError::runtime(e.to_string()))? + "\n",
    )?;
    Ok(())
}

struct ScoreRow {
    kind: &'static str,
    id: String,
    record: metrics::ScoreRecord,
}

fn push_score_row(out: &mut CsvOutput, row: &ScoreRow) {
    out.row(&[
        row.kind.to_string(),
        row.id.clone(),
        fmt_f64(row.record.consensus),
        fmt_f64(row.record.awareness),
        fmt_f64(row.record.commonsensicality),
        row.record.n_items.to_string(),
        fmt_pct(row.record.consensus),
        fmt_pct(row.record.awareness),
        fmt_pct(row.record.commonsensicality),
    ]);
}

fn cmd_score(
    ctx: &mut RunContext,
    corpus_args: &CorpusArgs,
    human: &Path,
    models: Option<&Path>,
    with_model_vote: bool,
    features: Option<&str>,
) -> Result<()> {
    if with_model_vote && features.is_some() {
        return Err(RunError::validation(
            "--with-model-vote and --features cannot be combined",
        ));
    }
    let (corpus, _) = load_corpus(ctx, corpus_args)?;
    let matrix = load_matrix(ctx, human, &corpus)?;
    let ratings = models.map(|p| load_ratings(ctx, p, &corpus)).transpose()?;

    let subset: Option<Vec<bool>> = match features {
        Some(name) => {
            let pole = Pole::parse(name)?;
            ctx.setting("features", pole.as_str());
            Some(corpus.pole_subset(pole)?)
        }
        None => None,
    };
    ctx.setting("with_model_vote", with_model_vote);
    let majorities = metrics::human_majorities(&matrix);

    let mut out = CsvOutput::new(
        "sensus.scores.v1",
        "entity_kind,id,consensus,awareness,commonsensicality,n_items,consensus_pct,awareness_pct,commonsensicality_pct",
    );
    let mut rows: Vec<ScoreRow> = Vec::new();

    for i in matrix.rated_statements() {
        if let Some(mask) = &subset {
            if !mask[i as usize] {
                continue;
            }
        }
        rows.push(ScoreRow {
            kind: "statement",
            id: corpus.get(i).id.clone(),
            record: metrics::statement_scores(&matrix, i)?,
        });
    }

    let mut skipped_persons = 0usize;
    for j in 0..matrix.n_respondents() as u32 {
        match metrics::person_scores_subset(&matrix, j, &majorities, subset.as_deref()) {
            Ok(record) => rows.push(ScoreRow {
                kind: "person",
                id: matrix.respondent_id(j).to_string(),
                record,
            }),
            Err(metrics::MetricsError::NoItems) => skipped_persons += 1,
            Err(e) => return Err(e.into()),
        }
    }
    if skipped_persons > 0 {
        ctx.note(format!(
            "{skipped_persons} respondents have no statements in the requested subset"
        ));
    }

    if let Some(ratings) = &ratings {
        for (m, name) in ratings.models().iter().enumerate() {
            let record = if with_model_vote {
                metrics::model_scores_with_model_vote(ratings, m as u32, &matrix)?
            } else {
                metrics::model_scores_subset(ratings, m as u32, &majorities, subset.as_deref())?
            };
            rows.push(ScoreRow {
                kind: "model",
                id: name.clone(),
                record,
            });
        }
    }

    rows.sort_by(|a, b| (a.kind, &a.id).cmp(&(b.kind, &b.id)));
    for row in &rows {
        push_score_row(&mut out, row);
    }
    out.write_to(&ctx.output("scores.csv"))?;
    println!("scored {} entities", rows.len());
    Ok(())
}

fn cmd_compare(
    ctx: &mut RunContext,
    corpus_args: &CorpusArgs,
    human: &Path,
    models: &Path,
) -> Result<()> {
    let (corpus, _) = load_corpus(ctx, corpus_args)?;
    let matrix = load_matrix(ctx, human, &corpus)?;
    let ratings = load_ratings(ctx, models, &corpus)?;
    let majorities = metrics::human_majorities(&matrix);

    let mut pairwise = CsvOutput::new(
        "sensus.pairwise.v1",
        "model,respondent,m_model,m_human,diff,m_model_pct,m_human_pct,diff_pp,win",
    );
    let mut summary = CsvOutput::new(
        "sensus.compare.v1",
        "model,n_respondents,wins,win_fraction,win_pct",
    );
    for (m, name) in ratings.models().iter().enumerate() {
        let cmp = metrics::pairwise_win_rate(&ratings, m as u32, &matrix, &majorities)?;
        let wins = cmp.entries.iter().filter(|e| e.win).count();
        for e in &cmp.entries {
            pairwise.row(&[
                name.clone(),
                matrix.respondent_id(e.respondent).to_string(),
                fmt_f64(e.m_model),
                fmt_f64(e.m_human),
                fmt_f64(e.diff),
                fmt_pct(e.m_model),
                fmt_pct(e.m_human),
                fmt_pct(e.diff),
                (e.win as u8).to_string(),
            ]);
        }
        summary.row(&[
            name.clone(),
            cmp.entries.len().to_string(),
            wins.to_string(),
            fmt_f64(cmp.win_fraction),
            fmt_pct(cmp.win_fraction),
        ]);
        println!(
            "{name}: wins {:.1}% of {} comparisons",
            cmp.win_fraction * 100.0,
            cmp.entries.len()
        );
    }
    pairwise.write_to(&ctx.output("pairwise.csv"))?;
    summary.write_to(&ctx.output("compare_summary.csv"))?;
    Ok(())
}

/// Statement-level silicon scores joined with human scores where available.
fn silicon_rows(
    corpus: &Corpus,
    matrix: &RatingMatrix,
    ratings: &ModelRatings,
) -> Result<Vec<(String, String, metrics::SiliconScores, Option<f64>)>> {
    let mut human_m: BTreeMap<u32, f64> = BTreeMap::new();
    for i in matrix.rated_statements() {
        human_m.insert(i, metrics::statement_scores(matrix, i)?.commonsensicality);
    }
    let mut rows = Vec::new();
    for (m, name) in ratings.models().iter().enumerate() {
        for (i, rating) in ratings.valid_ratings_of(m as u32) {
            let silicon = metrics::silicon_statement_scores(rating.p_yes_a, rating.p_yes_b);
            rows.push((
                name.clone(),
                corpus.get(i).id.clone(),
                silicon,
                human_m.get(&i).copied(),
            ));
        }
    }
    rows.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
    Ok(rows)
}

fn cmd_silicon(
    ctx: &mut RunContext,
    corpus_args: &CorpusArgs,
    human: &Path,
    models: &Path,
) -> Result<()> {
    let (corpus, _) = load_corpus(ctx, corpus_args)?;
    let matrix = load_matrix(ctx, human, &corpus)?;
    let ratings = load_ratings(ctx, models, &corpus)?;

    let rows = silicon_rows(&corpus, &matrix, &ratings)?;
    let mut out = CsvOutput::new(
        "sensus.silicon.v1",
        "model,statement_id,consensus,awareness,commonsensicality,m_human,commonsensicality_pct,m_human_pct",
    );
    let mut gaps: BTreeMap<&str, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (model, stmt, silicon, human_m) in &rows {
        out.row(&[
            model.clone(),
            stmt.clone(),
            fmt_f64(silicon.consensus),
            fmt_f64(silicon.awareness),
            fmt_f64(silicon.commonsensicality),
            human_m.map(fmt_f64).unwrap_or_default(),
            fmt_pct(silicon.commonsensicality),
            human_m.map(fmt_pct).unwrap_or_default(),
        ]);
        if let Some(h) = human_m {
            let entry = gaps.entry(model.as_str()).or_default();
            entry.0.push(silicon.commonsensicality);
            entry.1.push(*h);
        }
    }
    out.write_to(&ctx.output("silicon.csv"))?;

    let mut summary = CsvOutput::new(
        "sensus.silicon-summary.v1",
        "model,n_statements,mae,rmse,mae_pp,rmse_pp",
    );
    for (model, (m_model, m_human)) in &gaps {
        let (mae, rmse) = stats::mae_rmse(m_model, m_human)?;
        summary.row(&[
            model.to_string(),
            m_model.len().to_string(),
            fmt_f64(mae),
            fmt_f64(rmse),
            fmt_pct(mae),
            fmt_pct(rmse),
        ]);
        println!(
            "{model}: MAE {:.2} pp, RMSE {:.2} pp over {} statements",
            mae * 100.0,
            rmse * 100.0,
            m_model.len()
        );
    }
    summary.write_to(&ctx.output("silicon_summary.csv"))?;
    Ok(())
}

fn cmd_correlate(
    ctx: &mut RunContext,
    corpus_args: &CorpusArgs,
    human: &Path,
    models: &Path,
    splits: usize,
) -> Result<()> {
    let (corpus, _) = load_corpus(ctx, corpus_args)?;
    let matrix = load_matrix(ctx, human, &corpus)?;
    let ratings = load_ratings(ctx, models, &corpus)?;
    ctx.setting("splits", splits);

    let rows = silicon_rows(&corpus, &matrix, &ratings)?;
    let mut per_model: BTreeMap<&str, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (model, _stmt, silicon, human_m) in &rows {
        if let Some(h) = human_m {
            let entry = per_model.entry(model.as_str()).or_default();
            entry.0.push(*h);
            entry.1.push(silicon.commonsensicality);
        }
    }

    let mut names = Vec::new();
    let mut results = Vec::new();
    for (model, (h, m)) in &per_model {
        names.push(model.to_string());
        results.push(stats::pearson(h, m)?);
    }
    let adjusted = stats::bonferroni(
        &results
            .iter()
            .map(|c| c.p_two_sided)
            .collect::<Vec<f64>>(),
    );

    let mut out = CsvOutput::new(
        "sensus.correlations.v1",
        "kind,id,n,r,p_two_sided,p_bonferroni,ci_lo,ci_hi",
    );
    for ((name, c), adj) in names.iter().zip(results.iter()).zip(adjusted.iter()) {
        out.row(&[
            "model_vs_human".into(),
            name.clone(),
            c.n.to_string(),
            fmt_f64(c.r),
            fmt_f64(c.p_two_sided),
            fmt_f64(*adj),
            String::new(),
            String::new(),
        ]);
        println!("{name}: r = {:.3}, p = {:.3e} (bonferroni {:.3e})", c.r, c.p_two_sided, adj);
    }

    let rng = StreamRng::new(ctx.seed);
    let split = stats::split_half_reliability(&matrix, splits, &rng)?;
    if split.n_repeats_dropped > 0 {
        ctx.note(format!(
            "{} split-half repeats dropped as degenerate",
            split.n_repeats_dropped
        ));
    }
    out.row(&[
        "split_half".into(),
        "human".into(),
        split.n_repeats_used.to_string(),
        fmt_f64(split.mean_r),
        String::new(),
        String::new(),
        fmt_f64(split.ci95.0),
        fmt_f64(split.ci95.1),
    ]);
    println!(
        "split-half: mean r = {:.3}, 95% CI [{:.3}, {:.3}] over {} repeats",
        split.mean_r, split.ci95.0, split.ci95.1, split.n_repeats_used
    );
    out.write_to(&ctx.output("correlations.csv"))?;
    Ok(())
}

fn cmd_contrast(
    ctx: &mut RunContext,
    corpus_args: &CorpusArgs,
    human: &Path,
    models: Option<&Path>,
    bootstrap_n: usize,
) -> Result<()> {
    let (corpus, _) = load_corpus(ctx, corpus_args)?;
    let matrix = load_matrix(ctx, human, &corpus)?;
    let ratings = models.map(|p| load_ratings(ctx, p, &corpus)).transpose()?;
    ctx.setting("bootstrap_n", bootstrap_n);

    // Population name -> per-statement (index, m).
    let mut populations: Vec<(String, Vec<(u32, f64)>)> = Vec::new();
    let mut human_scores = Vec::new();
    for i in matrix.rated_statements() {
        human_scores.push((i, metrics::statement_scores(&matrix, i)?.commonsensicality));
    }
    populations.push(("human".into(), human_scores));
    if let Some(ratings) = &ratings {
        for (m, name) in ratings.models().iter().enumerate() {
            let scores: Vec<(u32, f64)> = ratings
                .valid_ratings_of(m as u32)
                .map(|(i, r)| {
                    (
                        i,
                        metrics::silicon_statement_scores(r.p_yes_a, r.p_yes_b).commonsensicality,
                    )
                })
                .collect();
            populations.push((name.clone(), scores));
        }
    }

    let rng = StreamRng::new(ctx.seed);
    let mut out = CsvOutput::new(
        "sensus.contrasts.v1",
        "population,axis,pole_a,pole_b,n_statements,mean_diff,ci50_lo,ci50_hi,ci95_lo,ci95_hi,mean_diff_pp,ci95_lo_pp,ci95_hi_pp,n_replicates,n_redrawn",
    );
    let mut total_redrawn = 0usize;
    for (population, scores) in &populations {
        for axis in Axis::ALL {
            let (pole_a, pole_b) = contrast_poles(axis);
            let mask = corpus.pole_subset(pole_a)?;
            let values: Vec<f64> = scores.iter().map(|&(_, m)| m).collect();
            let groups: Vec<bool> = scores.iter().map(|&(i, _)| mask[i as usize]).collect();
            let contrast =
                stats::bootstrap_mean_difference(&values, &groups, bootstrap_n, &rng)?;
            total_redrawn += contrast.n_redrawn;
            out.row(&[
                population.clone(),
                axis.as_str().to_string(),
                pole_a.as_str().to_string(),
                pole_b.as_str().to_string(),
                values.len().to_string(),
                fmt_f64(contrast.mean_diff),
                fmt_f64(contrast.ci50.0),
                fmt_f64(contrast.ci50.1),
                fmt_f64(contrast.ci95.0),
                fmt_f64(contrast.ci95.1),
                fmt_pct(contrast.mean_diff),
                fmt_pct(contrast.ci95.0),
                fmt_pct(contrast.ci95.1),
                contrast.n_replicates.to_string(),
                contrast.n_redrawn.to_string(),
            ]);
        }
    }
    if total_redrawn > 0 {
        ctx.note(format!("{total_redrawn} bootstrap replicates redrawn"));
    }
    out.write_to(&ctx.output("contrasts.csv"))?;
    Ok(())
}

/// Focal-minus-complement orientation per axis.
fn contrast_poles(axis: Axis) -> (Pole, Pole) {
    match axis {
        Axis::Behavior => (Pole::Physical, Pole::Social),
        Axis::Everyday => (Pole::Everyday, Pole::Abstract),
        Axis::Speech => (Pole::Literal, Pole::Figurative),
        Axis::Judgment => (Pole::Positive, Pole::Normative),
        Axis::Opinion => (Pole::Fact, Pole::Opinion),
        Axis::Reasoning => (Pole::Knowledge, Pole::Reasoning),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_regress(
    ctx: &mut RunContext,
    corpus_args: &CorpusArgs,
    human: &Path,
    models: &Path,
    meta: &Path,
    folds: usize,
    lmm_tol: f64,
    r2_training_mean: bool,
) -> Result<()> {
    let (corpus, _) = load_corpus(ctx, corpus_args)?;
    let matrix = load_matrix(ctx, human, &corpus)?;
    let ratings = load_ratings(ctx, models, &corpus)?;
    ctx.record_input(meta)?;
    let metas = formats::load_model_meta(meta)?;
    ctx.setting("folds", folds);
    ctx.setting("lmm_tol", lmm_tol);
    ctx.setting(
        "ss_tot",
        if r2_training_mean {
            "training-mean"
        } else {
            "holdout-mean"
        },
    );
    let ss_tot = if r2_training_mean {
        SsTotMode::TrainingMean
    } else {
        SsTotMode::HoldoutMean
    };

    let majorities = metrics::human_majorities(&matrix);
    let mut model_m: BTreeMap<String, f64> = BTreeMap::new();
    for (m, name) in ratings.models().iter().enumerate() {
        match metrics::model_scores(&ratings, m as u32, &majorities) {
            Ok(record) => {
                model_m.insert(name.clone(), record.commonsensicality);
            }
            Err(metrics::MetricsError::NoItems) => {
                ctx.note(format!("model {name} has no scorable statements"));
            }
            Err(e) => return Err(e.into()),
        }
    }
    let meta_by_model: BTreeMap<&str, &ModelMeta> =
        metas.iter().map(|m| (m.model.as_str(), m)).collect();

    let mut out = CsvOutput::new(
        "sensus.regress.v1",
        "term,estimate,se,p,ci_lo,ci_hi,method,n",
    );

    // Mixed model: commonsensicality (pp) on log10 size with a family
    // intercept; families need at least two sized models.
    {
        let mut rows: Vec<(f64, f64, String)> = Vec::new();
        for (name, &m) in &model_m {
            if let Some(meta) = meta_by_model.get(name.as_str()) {
                if let Some(size) = meta.size_b {
                    rows.push((size.log10(), m * 100.0, meta.family.clone()));
                }
            }
        }
        let mut family_counts: BTreeMap<&str, usize> = BTreeMap::new();
        for (_, _, f) in &rows {
            *family_counts.entry(f.as_str()).or_default() += 1;
        }
        let eligible: Vec<&(f64, f64, String)> = rows
            .iter()
            .filter(|(_, _, f)| family_counts[f.as_str()] >= 2)
            .collect();
        if eligible.len() >= 3 {
            let mut families: Vec<&str> = eligible.iter().map(|r| r.2.as_str()).collect();
            families.sort();
            families.dedup();
            let x: Vec<f64> = eligible.iter().map(|r| r.0).collect();
            let y: Vec<f64> = eligible.iter().map(|r| r.1).collect();
            let groups: Vec<usize> = eligible
                .iter()
                .map(|r| families.iter().position(|f| *f == r.2).unwrap())
                .collect();
            let fit = regress::lmm_random_intercept(&y, &x, &groups, lmm_tol)?;
            ctx.setting("lmm_n_models", eligible.len());
            ctx.setting("lmm_n_families", families.len());
            ctx.setting("lmm_converged", fit.converged);
            out.row(&[
                "lmm_log10_size".into(),
                fmt_f64(fit.beta),
                fmt_f64(fit.se_beta),
                fmt_f64(fit.p_two_sided),
                fmt_f64(fit.ci95.0),
                fmt_f64(fit.ci95.1),
                "lmm_reml_wald".into(),
                eligible.len().to_string(),
            ]);
            out.row(&[
                "lmm_intercept".into(),
                fmt_f64(fit.intercept),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                "lmm_reml_wald".into(),
                eligible.len().to_string(),
            ]);
            out.row(&[
                "lmm_sigma2_group".into(),
                fmt_f64(fit.sigma2_group),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                "lmm_reml".into(),
                families.len().to_string(),
            ]);
            out.row(&[
                "lmm_sigma2_resid".into(),
                fmt_f64(fit.sigma2_resid),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                "lmm_reml".into(),
                eligible.len().to_string(),
            ]);
            println!(
                "size effect: {:.2} pp per tenfold size increase, 95% CI [{:.2}, {:.2}], p = {:.4}",
                fit.beta, fit.ci95.0, fit.ci95.1, fit.p_two_sided
            );
        } else {
            ctx.note("mixed model skipped: fewer than 3 models in families with 2+ sized models");
        }
    }

    // Benchmark correlations (and a bootstrap slope for the Elo fit).
    for (field, label) in [("elo", "elo"), ("openbookqa", "openbookqa")] {
        let mut pairs: Vec<(f64, f64)> = Vec::new();
        for (name, &m) in &model_m {
            if let Some(meta) = meta_by_model.get(name.as_str()) {
                let value = match field {
                    "elo" => meta.elo,
                    _ => meta.openbookqa,
                };
                if let Some(v) = value {
                    pairs.push((v, m * 100.0));
                }
            }
        }
        if pairs.len() < 3 {
            ctx.note(format!("{label} correlation skipped: {} models", pairs.len()));
            continue;
        }
        let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let c = stats::pearson(&xs, &ys)?;
        out.row(&[
            format!("{label}_pearson_r"),
            fmt_f64(c.r),
            String::new(),
            fmt_f64(c.p_two_sided),
            String::new(),
            String::new(),
            "pearson_t".into(),
            c.n.to_string(),
        ]);
        println!("{label}: r = {:.3}, p = {:.3} over {} models", c.r, c.p_two_sided, c.n);

        if field == "elo" {
            let design = DesignMatrix::with_intercept(vec![xs.clone()])?;
            let fit = regress::ols_fit(&design, &ys)?;
            let (slope_ci, band) = bootstrap_slope_band(&xs, &ys, 1000, &StreamRng::new(ctx.seed))?;
            out.row(&[
                "elo_ols_slope".into(),
                fmt_f64(fit.coefficients[1]),
                fmt_f64(fit.se[1]),
                String::new(),
                fmt_f64(slope_ci.0),
                fmt_f64(slope_ci.1),
                "ols_bootstrap_ci".into(),
                xs.len().to_string(),
            ]);
            let mut band_out = CsvOutput::new("sensus.regress-band.v1", "x,fit,lo,hi");
            for (x, fit_y, lo, hi) in band {
                band_out.row(&[fmt_f64(x), fmt_f64(fit_y), fmt_f64(lo), fmt_f64(hi)]);
            }
            band_out.write_to(&ctx.output("regress_band.csv"))?;
        }
    }

    // Predicting human statement scores from silicon scores: one model at a
    // time, then the all-model ensemble.
    {
        let rows = silicon_rows(&corpus, &matrix, &ratings)?;
        let mut per_model: BTreeMap<&str, BTreeMap<&str, (f64, f64)>> = BTreeMap::new();
        for (model, stmt, silicon, human_m) in &rows {
            if let Some(h) = human_m {
                per_model
                    .entry(model.as_str())
                    .or_default()
                    .insert(stmt.as_str(), (silicon.commonsensicality, *h));
            }
        }
        let rng = StreamRng::new(ctx.seed);
        for (model, pairs) in &per_model {
            if pairs.len() <= folds.max(2) {
                ctx.note(format!(
                    "cv_r2:{model} skipped: {} statements for {folds} folds",
                    pairs.len()
                ));
                continue;
            }
            let xs: Vec<f64> = pairs.values().map(|p| p.0).collect();
            let ys: Vec<f64> = pairs.values().map(|p| p.1).collect();
            let design = DesignMatrix::with_intercept(vec![xs])?;
            let cv = regress::kfold_r2(&design, &ys, folds, &rng, ss_tot)?;
            out.row(&[
                format!("cv_r2:{model}"),
                fmt_f64(cv.mean_r2),
                fmt_f64(cv.sd_r2),
                String::new(),
                String::new(),
                String::new(),
                "ols_kfold".into(),
                ys.len().to_string(),
            ]);
        }

        // Ensemble over complete-case statements.
        let model_names: Vec<&str> = per_model.keys().copied().collect();
        if model_names.len() >= 2 {
            let mut complete: Vec<&str> = Vec::new();
            if let Some(first) = per_model.get(model_names[0]) {
                'stmt: for stmt in first.keys() {
                    for name in &model_names[1..] {
                        if !per_model[name].contains_key(stmt) {
                            continue 'stmt;
                        }
                    }
                    complete.push(stmt);
                }
            }
            if complete.len() > folds.max(model_names.len() + 1) {
                let ys: Vec<f64> = complete
                    .iter()
                    .map(|s| per_model[model_names[0]][s].1)
                    .collect();
                let cols: Vec<Vec<f64>> = model_names
                    .iter()
                    .map(|name| complete.iter().map(|s| per_model[name][s].0).collect())
                    .collect();
                let design = DesignMatrix::with_intercept(cols)?;
                match regress::kfold_r2(&design, &ys, folds, &rng, ss_tot) {
                    Ok(cv) => {
                        out.row(&[
                            "cv_r2:ensemble".into(),
                            fmt_f64(cv.mean_r2),
                            fmt_f64(cv.sd_r2),
                            String::new(),
                            String::new(),
                            String::new(),
                            "ols_kfold".into(),
                            ys.len().to_string(),
                        ]);
                        println!(
                            "ensemble ({} predictors): mean out-of-sample R^2 = {:.3} (sd {:.3})",
                            model_names.len(),
                            cv.mean_r2,
                            cv.sd_r2
                        );
                    }
                    Err(e) => ctx.note(format!("ensemble cv_r2 skipped: {e}")),
                }
            } else {
                ctx.note(format!(
                    "ensemble cv_r2 skipped: {} complete-case statements",
                    complete.len()
                ));
            }
        }
    }

    out.write_to(&ctx.output("regress.csv"))?;
    Ok(())
}

/// Percentile bootstrap of the OLS slope plus a mean-prediction band on a
/// 20-point grid.
#[allow(clippy::type_complexity)]
fn bootstrap_slope_band(
    xs: &[f64],
    ys: &[f64],
    replicates: usize,
    rng: &StreamRng,
) -> Result<((f64, f64), Vec<(f64, f64, f64, f64)>)> {
    let n = xs.len();
    let (xlo, xhi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| {
            (l.min(x), h.max(x))
        });
    let grid: Vec<f64> = (0..20)
        .map(|i| xlo + (xhi - xlo) * i as f64 / 19.0)
        .collect();
    let design = DesignMatrix::with_intercept(vec![xs.to_vec()])?;
    let base = regress::ols_fit(&design, ys)?;

    let mut slopes = Vec::with_capacity(replicates);
    let mut preds: Vec<Vec<f64>> = vec![Vec::with_capacity(replicates); grid.len()];
    for k in 0..replicates {
        let mut stream = rng.stream(k as u64);
        loop {
            let idx: Vec<usize> = (0..n).map(|_| stream.index_below(n)).collect();
            let bx: Vec<f64> = idx.iter().map(|&i| xs[i]).collect();
            let by: Vec<f64> = idx.iter().map(|&i| ys[i]).collect();
            let Ok(design) = DesignMatrix::with_intercept(vec![bx]) else {
                continue;
            };
            match regress::ols_fit(&design, &by) {
                Ok(fit) => {
                    slopes.push(fit.coefficients[1]);
                    for (g, &x) in grid.iter().enumerate() {
                        preds[g].push(fit.coefficients[0] + fit.coefficients[1] * x);
                    }
                    break;
                }
                Err(_) => continue,
            }
        }
    }
    slopes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let slope_ci = (
        stats::percentile_sorted(&slopes, 0.025),
        stats::percentile_sorted(&slopes, 0.975),
    );
    let band = grid
        .iter()
        .enumerate()
        .map(|(g, &x)| {
            let mut p = std::mem::take(&mut preds[g]);
            p.sort_by(|a, b| a.partial_cmp(b).unwrap());
            (
                x,
                base.coefficients[0] + base.coefficients[1] * x,
                stats::percentile_sorted(&p, 0.025),
                stats::percentile_sorted(&p, 0.975),
            )
        })
        .collect();
    Ok((slope_ci, band))
}

fn cmd_calibrate(
    ctx: &mut RunContext,
    corpus_args: &CorpusArgs,
    human: &Path,
    models: &Path,
    bins: usize,
) -> Result<()> {
    let (corpus, _) = load_corpus(ctx, corpus_args)?;
    let matrix = load_matrix(ctx, human, &corpus)?;
    let ratings = load_ratings(ctx, models, &corpus)?;
    ctx.setting("bins", bins);

    let mut human_freqs: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
    for i in matrix.rated_statements() {
        let agg = metrics::statement_aggregate(&matrix, i)?;
        human_freqs.insert(i, (agg.d_a, agg.d_b));
    }

    let mut out = CsvOutput::new(
        "sensus.calibration.v1",
        "model,question,bin_lo,bin_hi,count,q25,q50,q75,mean_model",
    );
    let mut summary = CsvOutput::new(
        "sensus.calibration-summary.v1",
        "model,question,n,rmse,r",
    );
    for (m, name) in ratings.models().iter().enumerate() {
        for question in [Question::Agree, Question::OthersAgree] {
            let mut humans = Vec::new();
            let mut model_probs = Vec::new();
            for (i, rating) in ratings.valid_ratings_of(m as u32) {
                if let Some(&(d_a, d_b)) = human_freqs.get(&i) {
                    match question {
                        Question::Agree => {
                            humans.push(d_a);
                            model_probs.push(rating.p_yes_a);
                        }
                        Question::OthersAgree => {
                            humans.push(d_b);
                            model_probs.push(rating.p_yes_b);
                        }
                    }
                }
            }
            let cal = stats::calibration_bins(&humans, &model_probs, bins)?;
            for bin in &cal.bins {
                out.row(&[
                    name.clone(),
                    question.as_str().to_string(),
                    fmt_f64(bin.lo),
                    fmt_f64(bin.hi),
                    bin.count.to_string(),
                    bin.q25.map(fmt_f64).unwrap_or_default(),
                    bin.q50.map(fmt_f64).unwrap_or_default(),
                    bin.q75.map(fmt_f64).unwrap_or_default(),
                    bin.mean_model.map(fmt_f64).unwrap_or_default(),
                ]);
            }
            summary.row(&[
                name.clone(),
                question.as_str().to_string(),
                humans.len().to_string(),
                fmt_f64(cal.rmse),
                cal.r.map(fmt_f64).unwrap_or_default(),
            ]);
            println!(
                "{name} question ({}): RMSE {:.4}, r {}",
                question.as_str(),
                cal.rmse,
                cal.r.map(|r| format!("{r:.3}")).unwrap_or_else(|| "n/a".into()),
            );
        }
    }
    out.write_to(&ctx.output("calibration.csv"))?;
    summary.write_to(&ctx.output("calibration_summary.csv"))?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_collect(
    ctx: &mut RunContext,
    corpus_args: &CorpusArgs,
    endpoint: &str,
    model: &str,
    mode: &str,
    samples: usize,
    concurrency: usize,
    rps: Option<f64>,
    cache: Option<&Path>,
    system_prompt_file: Option<&Path>,
    suppress_reasoning: bool,
    most_other_people: bool,
    max_retries: u32,
    retry_base_ms: u64,
    timeout_secs: u64,
) -> Result<()> {
    let (corpus, _) = load_corpus(ctx, corpus_args)?;
    let mode = match mode {
        "token" => CollectMode::TokenProbs,
        "sampling" => CollectMode::Sampling,
        other => {
            return Err(RunError::validation(format!(
                "--mode must be token or sampling, got {other:?}"
            )))
        }
    };
    let system_prompt = match system_prompt_file {
        Some(path) => {
            ctx.record_input(path)?;
            Some(
                std::fs::read_to_string(path)
                    .map_err(|e| {
                        RunError::validation(format!("cannot read {}: {e}", path.display()))
                    })?
                    .trim_end()
                    .to_string(),
            )
        }
        None => None,
    };
    let api_key = std::env::var(collect::API_KEY_ENV)
        .or_else(|_| std::env::var(collect::API_KEY_ENV_FALLBACK))
        .ok();

    let mut config = CollectConfig::new(endpoint, model);
    config.mode = mode;
    config.samples = samples;
    config.concurrency = concurrency;
    config.requests_per_second = rps;
    config.system_prompt = system_prompt;
    config.suppress_reasoning = suppress_reasoning;
    config.most_other_people = most_other_people;
    config.api_key = api_key;
    config.max_retries = max_retries;
    config.retry_base_ms = retry_base_ms;
    config.timeout_secs = timeout_secs;

    ctx.setting("mode", mode.as_str());
    ctx.setting("samples", samples);
    ctx.setting("concurrency", concurrency);
    ctx.setting("temperature", 1.0);
    ctx.setting("suppress_reasoning", suppress_reasoning);
    ctx.setting("most_other_people", most_other_people);
    ctx.setting("model", model);

    let cache_path = cache
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| ctx.out_dir.join("cache.jsonl"));
    let out_path = ctx.output("model_ratings.jsonl");
    let (report, _ratings) = collect::collect(&corpus, &config, &cache_path, &out_path)?;
    ctx.setting("cache", cache_path.display().to_string());
    ctx.note(format!(
        "collect: {} statements complete, {} requests, {} from cache, {} pending, {} invalid",
        report.n_statements,
        report.n_requests_made,
        report.n_from_cache,
        report.n_pending,
        report.n_invalid_rows
    ));
    println!(
        "collected {} statements ({} requests, {} cached, {} pending, {} invalid rows)",
        report.n_statements,
        report.n_requests_made,
        report.n_from_cache,
        report.n_pending,
        report.n_invalid_rows
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_synth(
    ctx: &mut RunContext,
    n_statements: usize,
    n_respondents: usize,
    ratings_per_respondent: usize,
    q_mode: &str,
    q_agree: f64,
    q_predict: f64,
    balanced: bool,
    models: usize,
) -> Result<()> {
    let (profile_a, profile_b) = match q_mode {
        // Profile draws come from the dedicated top substream: all q_agree
        // values first, then all q_predict values.
        "uniform" => {
            let rng = StreamRng::new(ctx.seed);
            let mut stream = rng.stream(u64::MAX);
            let a: Vec<f64> = (0..n_statements).map(|_| stream.unit_f64()).collect();
            let b: Vec<f64> = (0..n_statements).map(|_| stream.unit_f64()).collect();
            (a, b)
        }
        "fixed" => (
            vec![q_agree; n_statements],
            vec![q_predict; n_statements],
        ),
        other => {
            return Err(RunError::validation(format!(
                "--q-mode must be uniform or fixed, got {other:?}"
            )))
        }
    };
    let spec = synth::PopulationSpec {
        n_statements,
        n_respondents,
        q_agree: profile_a,
        q_predict: profile_b,
        ratings_per_respondent,
        seed: ctx.seed,
        assignment: if balanced {
            synth::Assignment::Balanced
        } else {
            synth::Assignment::Uniform
        },
    };
    ctx.setting("q_mode", q_mode);
    ctx.setting("balanced", balanced);
    ctx.setting("n_statements", n_statements);
    ctx.setting("n_respondents", n_respondents);
    ctx.setting("ratings_per_respondent", ratings_per_respondent);

    let (corpus, matrix) = synth::generate(&spec)?;
    formats::write_statements(&ctx.output("statements.jsonl"), &corpus)?;
    formats::write_human_ratings(&ctx.output("human_ratings.csv"), &corpus, &matrix)?;
    if models > 0 {
        let ratings = synth::generate_model_ratings(&corpus, models, 0.0, ctx.seed ^ 0x6d6f64);
        formats::write_model_ratings(&ctx.output("model_ratings.jsonl"), &corpus, &ratings)?;
    }
    println!(
        "generated {} statements, {} respondents, {} rating rows",
        corpus.len(),
        matrix.n_respondents(),
        matrix.n_rows()
    );
    Ok(())
}

fn cmd_export(ctx: &mut RunContext, from: &Path, meta: Option<&Path>) -> Result<()> {
    let mut exported = Vec::new();
    if from.join("scores.csv").exists() {
        figures::export_fig2b(ctx, from)?;
        exported.push("fig2b");
        if let Some(meta) = meta {
            ctx.record_input(meta)?;
            figures::export_fig2c(ctx, from, meta)?;
            figures::export_fig2d(ctx, from, meta)?;
            exported.push("fig2c");
            exported.push("fig2d");
        }
    }
    if from.join("pairwise.csv").exists() {
        figures::export_fig2e(ctx, from)?;
        exported.push("fig2e");
    }
    if from.join("contrasts.csv").exists() {
        figures::export_fig3c(ctx, from)?;
        exported.push("fig3c");
    }
    if from.join("correlations.csv").exists() {
        figures::export_fig4a(ctx, from)?;
        exported.push("fig4a");
    }
    if from.join("silicon.csv").exists() {
        figures::export_fig4b(ctx, from)?;
        exported.push("fig4b");
    }
    if from.join("regress.csv").exists() {
        figures::export_fig4c(ctx, from)?;
        exported.push("fig4c");
    }
    if exported.is_empty() {
        return Err(RunError::validation(format!(
            "no upstream outputs found in {}",
            from.display()
        )));
    }
    println!("exported panels: {}", exported.join(", "));
    Ok(())
}
