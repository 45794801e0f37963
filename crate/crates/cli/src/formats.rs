//! File formats: statements.jsonl, human_ratings.csv, model_ratings.jsonl,
//! model_meta.csv, and the CSV outputs.
//!
//! Inputs are UTF-8 with LF line endings. Every loader reports the offending
//! line on failure. Writers emit a canonical form: rows sorted by their
//! natural keys, floats in shortest round-trip notation, so loading a
//! canonical file and re-serializing it reproduces the bytes.
//!
//! Every CSV output starts with a `#schema:` version line.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use sensus_core::corpus::{
    AnswerPair, Corpus, Features, ModelMeta, ModelRating, ModelRatings, RatingMatrix, Source,
    Statement,
};

use crate::error::{Result, RunError};

fn open_lines(path: &Path) -> Result<impl Iterator<Item = std::io::Result<String>>> {
    let file = fs::File::open(path)
        .map_err(|e| RunError::validation(format!("cannot open {}: {e}", path.display())))?;
    Ok(BufReader::new(file).lines())
}

#[derive(Debug, Serialize, Deserialize)]
struct StatementRow {
    id: String,
    text: String,
    source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    features: Option<BTreeMap<String, String>>,
}

/// Loads and validates statements.jsonl. With `allow_missing_features`,
/// statements lacking the features object load with a warning count instead
/// of an error; malformed features stay fatal either way.
pub fn load_statements(path: &Path, allow_missing_features: bool) -> Result<(Corpus, usize)> {
    let mut statements = Vec::new();
    let mut missing = 0usize;
    for (idx, line) in open_lines(path)?.enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: StatementRow = serde_json::from_str(&line).map_err(|e| {
            RunError::validation(format!("{}:{line_no}: bad JSON: {e}", path.display()))
        })?;
        let source = Source::parse(&row.source)
            .map_err(|e| RunError::validation(format!("{}:{line_no}: {e}", path.display())))?;
        let features = match row.features {
            Some(map) => Some(
                Features::from_pairs(map.iter().map(|(k, v)| (k.as_str(), v.as_str()))).map_err(
                    |e| RunError::validation(format!("{}:{line_no}: {e}", path.display())),
                )?,
            ),
            None if allow_missing_features => {
                missing += 1;
                None
            }
            None => {
                return Err(RunError::validation(format!(
                    "{}:{line_no}: statement {:?} has no features (pass --allow-missing-features to downgrade)",
                    path.display(),
                    row.id
                )))
            }
        };
        statements.push(Statement {
            id: row.id,
            text: row.text,
            source,
            features,
        });
    }
    let corpus = Corpus::new(statements).map_err(|e| RunError::validation(e.to_string()))?;
    Ok((corpus, missing))
}

/// Canonical statements.jsonl: sorted by id, feature keys sorted.
pub fn write_statements(path: &Path, corpus: &Corpus) -> Result<()> {
    let mut rows: Vec<&Statement> = corpus.statements().iter().collect();
    rows.sort_by(|a, b| a.id.cmp(&b.id));
    let mut out = String::new();
    for s in rows {
        let row = StatementRow {
            id: s.id.clone(),
            text: s.text.clone(),
            source: s.source.as_str().to_string(),
            features: s.features.map(|f| {
                f.iter()
                    .map(|(a, p)| (a.as_str().to_string(), p.as_str().to_string()))
                    .collect()
            }),
        };
        out.push_str(&serde_json::to_string(&row).map_err(|e| RunError::runtime(e.to_string()))?);
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Loads human_ratings.csv (columns statement_id, respondent_id, q_agree,
/// q_others; cells strictly 0/1).
pub fn load_human_ratings(path: &Path, corpus: &Corpus) -> Result<RatingMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| RunError::validation(format!("cannot open {}: {e}", path.display())))?;
    {
        let headers = reader
            .headers()
            .map_err(|e| RunError::validation(format!("{}: {e}", path.display())))?;
        let expected = ["statement_id", "respondent_id", "q_agree", "q_others"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(RunError::validation(format!(
                "{}: header must be {}",
                path.display(),
                expected.join(",")
            )));
        }
    }
    let mut builder = RatingMatrix::builder(corpus);
    for record in reader.records() {
        let record = record.map_err(|e| RunError::validation(format!("{}: {e}", path.display())))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 4 {
            return Err(RunError::validation(format!(
                "{}:{line}: expected 4 fields, got {}",
                path.display(),
                record.len()
            )));
        }
        let bit = |field: usize, name: &str| -> Result<bool> {
            match &record[field] {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(RunError::validation(format!(
                    "{}:{line}: {name} must be 0 or 1, got {other:?}",
                    path.display()
                ))),
            }
        };
        let answers = AnswerPair {
            agree: bit(2, "q_agree")?,
            predict_agree: bit(3, "q_others")?,
        };
        builder
            .add(&record[0], &record[1], answers, line)
            .map_err(|e| RunError::validation(format!("{}:{line}: {e}", path.display())))?;
    }
    Ok(builder.finish())
}

/// Canonical human_ratings.csv: sorted by (statement_id, respondent_id).
pub fn write_human_ratings(path: &Path, corpus: &Corpus, matrix: &RatingMatrix) -> Result<()> {
    let mut rows: Vec<(String, String, bool, bool)> = Vec::with_capacity(matrix.n_rows());
    for j in 0..matrix.n_respondents() as u32 {
        for &(i, ans) in matrix.ratings_by(j) {
            rows.push((
                corpus.get(i).id.clone(),
                matrix.respondent_id(j).to_string(),
                ans.agree,
                ans.predict_agree,
            ));
        }
    }
    rows.sort();
    let mut out = String::from("statement_id,respondent_id,q_agree,q_others\n");
    for (s, r, a, b) in rows {
        out.push_str(&format!("{s},{r},{},{}\n", a as u8, b as u8));
    }
    fs::write(path, out)?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelRatingRow {
    model: String,
    statement_id: String,
    p_yes_a: f64,
    p_yes_b: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_samples_a: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_samples_b: Option<u32>,
    valid: bool,
}

/// Loads model_ratings.jsonl.
pub fn load_model_ratings(path: &Path, corpus: &Corpus) -> Result<ModelRatings> {
    let mut builder = ModelRatings::builder(corpus);
    for (idx, line) in open_lines(path)?.enumerate() {
        let line_no = idx as u64 + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: ModelRatingRow = serde_json::from_str(&line).map_err(|e| {
            RunError::validation(format!("{}:{line_no}: bad JSON: {e}", path.display()))
        })?;
        builder
            .add(
                &row.model,
                &row.statement_id,
                ModelRating {
                    p_yes_a: row.p_yes_a,
                    p_yes_b: row.p_yes_b,
                    n_samples_a: row.n_samples_a,
                    n_samples_b: row.n_samples_b,
                    valid: row.valid,
                },
                line_no,
            )
            .map_err(|e| RunError::validation(format!("{}:{line_no}: {e}", path.display())))?;
    }
    Ok(builder.finish())
}

/// Canonical model_ratings.jsonl: sorted by (model, statement_id).
pub fn write_model_ratings(path: &Path, corpus: &Corpus, ratings: &ModelRatings) -> Result<()> {
    let mut rows: Vec<ModelRatingRow> = Vec::new();
    for (m, model) in ratings.models().iter().enumerate() {
        for (&i, r) in ratings.ratings_of(m as u32) {
            rows.push(ModelRatingRow {
                model: model.clone(),
                statement_id: corpus.get(i).id.clone(),
                p_yes_a: r.p_yes_a,
                p_yes_b: r.p_yes_b,
                n_samples_a: r.n_samples_a,
                n_samples_b: r.n_samples_b,
                valid: r.valid,
            });
        }
    }
    rows.sort_by(|a, b| (&a.model, &a.statement_id).cmp(&(&b.model, &b.statement_id)));
    let mut out = String::new();
    for row in rows {
        out.push_str(&serde_json::to_string(&row).map_err(|e| RunError::runtime(e.to_string()))?);
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Loads model_meta.csv (columns model, family, size_b, elo, openbookqa;
/// empty cells for unknowns).
pub fn load_model_meta(path: &Path) -> Result<Vec<ModelMeta>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| RunError::validation(format!("cannot open {}: {e}", path.display())))?;
    {
        let headers = reader
            .headers()
            .map_err(|e| RunError::validation(format!("{}: {e}", path.display())))?;
        let expected = ["model", "family", "size_b", "elo", "openbookqa"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(RunError::validation(format!(
                "{}: header must be {}",
                path.display(),
                expected.join(",")
            )));
        }
    }
    let mut out = Vec::new();
    let mut seen = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| RunError::validation(format!("{}: {e}", path.display())))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let opt = |field: usize, name: &str| -> Result<Option<f64>> {
            let cell = record[field].trim();
            if cell.is_empty() {
                return Ok(None);
            }
            cell.parse::<f64>().map(Some).map_err(|_| {
                RunError::validation(format!(
                    "{}:{line}: {name} must be numeric or empty, got {cell:?}",
                    path.display()
                ))
            })
        };
        let meta = ModelMeta {
            model: record[0].to_string(),
            family: record[1].to_string(),
            size_b: opt(2, "size_b")?,
            elo: opt(3, "elo")?,
            openbookqa: opt(4, "openbookqa")?,
        };
        meta.validate()
            .map_err(|e| RunError::validation(format!("{}:{line}: {e}", path.display())))?;
        if let Some(first) = seen.insert(meta.model.clone(), line) {
            return Err(RunError::validation(format!(
                "{}:{line}: duplicate model {:?} (first at line {first})",
                path.display(),
                meta.model
            )));
        }
        out.push(meta);
    }
    Ok(out)
}

/// A CSV output under construction: schema line, header, rows.
pub struct CsvOutput {
    buf: String,
}

impl CsvOutput {
    pub fn new(schema: &str, header: &str) -> Self {
        CsvOutput {
            buf: format!("#schema: {schema}\n{header}\n"),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(self.buf.as_bytes())?;
        Ok(())
    }
}

/// Shortest round-trip float format.
pub fn fmt_f64(v: f64) -> String {
    let mut buf = ryu_like(v);
    if buf.is_empty() {
        buf = v.to_string();
    }
    buf
}

fn ryu_like(v: f64) -> String {
    // `{}` on f64 already prints the shortest representation that parses
    // back exactly.
    format!("{v}")
}

/// Percent with one decimal, the display convention for score tables.
pub fn fmt_pct(fraction: f64) -> String {
    format!("{:.1}", fraction * 100.0)
}

/// Reads a CSV produced by [`CsvOutput`]: returns (schema, header, records).
pub fn read_csv_output(path: &Path) -> Result<(String, Vec<String>, Vec<Vec<String>>)> {
    let text = fs::read_to_string(path)
        .map_err(|e| RunError::validation(format!("cannot open {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let schema = lines
        .next()
        .and_then(|l| l.strip_prefix("#schema: "))
        .ok_or_else(|| {
            RunError::validation(format!("{}: missing #schema line", path.display()))
        })?
        .to_string();
    let header: Vec<String> = lines
        .next()
        .unwrap_or_default()
        .split(',')
        .map(|s| s.to_string())
        .collect();
    let records = lines
        .map(|l| l.split(',').map(|s| s.to_string()).collect())
        .collect();
    Ok((schema, header, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn tmpfile(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    const FEATURES: &str = r#"{"behavior":"social","everyday":"everyday","speech":"literal","judgment":"normative","opinion":"fact","reasoning":"knowledge"}"#;

    fn statement_line(id: &str, source: &str) -> String {
        format!(r#"{{"id":"{id}","text":"t {id}","source":"{source}","features":{FEATURES}}}"#)
    }

    #[test]
    fn load_three_statements() {
        let content = format!(
            "{}\n{}\n{}\n",
            statement_line("a", "news"),
            statement_line("b", "aphorism"),
            statement_line("c", "atomic"),
        );
        let f = tmpfile(&content);
        let (corpus, missing) = load_statements(f.path(), false).unwrap();
        assert_eq!(corpus.len(), 3);
        assert_eq!(missing, 0);
    }

    #[test]
    fn unknown_source_names_line() {
        let content = format!(
            "{}\n{}\n",
            statement_line("a", "news"),
            statement_line("b", "blog"),
        );
        let f = tmpfile(&content);
        let err = load_statements(f.path(), false).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains(":2:"), "{msg}");
        assert!(msg.contains("blog"), "{msg}");
    }

    #[test]
    fn missing_features_require_flag() {
        let content = r#"{"id":"a","text":"t","source":"news"}"#.to_string() + "\n";
        let f = tmpfile(&content);
        assert!(load_statements(f.path(), false).is_err());
        let (corpus, missing) = load_statements(f.path(), true).unwrap();
        assert_eq!(missing, 1);
        assert_eq!(corpus.missing_feature_count(), 1);
    }

    #[test]
    fn statements_round_trip_byte_identical() {
        let content = format!(
            "{}\n{}\n",
            statement_line("a", "news"),
            statement_line("b", "conceptnet"),
        );
        let f = tmpfile(&content);
        let (corpus, _) = load_statements(f.path(), false).unwrap();
        let out1 = tempfile::NamedTempFile::new().unwrap();
        write_statements(out1.path(), &corpus).unwrap();
        let (corpus2, _) = load_statements(out1.path(), false).unwrap();
        let out2 = tempfile::NamedTempFile::new().unwrap();
        write_statements(out2.path(), &corpus2).unwrap();
        assert_eq!(
            fs::read(out1.path()).unwrap(),
            fs::read(out2.path()).unwrap()
        );
    }

    fn tiny_corpus() -> Corpus {
        let content = format!(
            "{}\n{}\n",
            statement_line("s1", "news"),
            statement_line("s2", "news"),
        );
        let f = tmpfile(&content);
        load_statements(f.path(), false).unwrap().0
    }

    #[test]
    fn ratings_duplicate_reports_both_lines() {
        let corpus = tiny_corpus();
        let f = tmpfile(
            "statement_id,respondent_id,q_agree,q_others\ns1,r1,1,0\ns2,r1,0,0\ns1,r1,1,1\n",
        );
        let err = load_human_ratings(f.path(), &corpus).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("lines 2 and 4"), "{msg}");
    }

    #[test]
    fn ratings_reject_non_binary() {
        let corpus = tiny_corpus();
        let f = tmpfile("statement_id,respondent_id,q_agree,q_others\ns1,r1,2,0\n");
        let msg = load_human_ratings(f.path(), &corpus).unwrap_err().to_string();
        assert!(msg.contains("q_agree"), "{msg}");
    }

    #[test]
    fn ratings_reject_unknown_statement() {
        let corpus = tiny_corpus();
        let f = tmpfile("statement_id,respondent_id,q_agree,q_others\nzzz,r1,1,0\n");
        let msg = load_human_ratings(f.path(), &corpus).unwrap_err().to_string();
        assert!(msg.contains("zzz"), "{msg}");
    }

    #[test]
    fn ratings_round_trip() {
        let corpus = tiny_corpus();
        let f = tmpfile(
            "statement_id,respondent_id,q_agree,q_others\ns1,r1,1,0\ns1,r2,0,1\ns2,r1,1,1\n",
        );
        let m = load_human_ratings(f.path(), &corpus).unwrap();
        let out1 = tempfile::NamedTempFile::new().unwrap();
        write_human_ratings(out1.path(), &corpus, &m).unwrap();
        let m2 = load_human_ratings(out1.path(), &corpus).unwrap();
        let out2 = tempfile::NamedTempFile::new().unwrap();
        write_human_ratings(out2.path(), &corpus, &m2).unwrap();
        assert_eq!(
            fs::read(out1.path()).unwrap(),
            fs::read(out2.path()).unwrap()
        );
    }

    #[test]
    fn model_ratings_load_and_range_check() {
        let corpus = tiny_corpus();
        let good = r#"{"model":"m1","statement_id":"s1","p_yes_a":0.95,"p_yes_b":0.4,"valid":true}"#;
        let f = tmpfile(&format!("{good}\n"));
        let r = load_model_ratings(f.path(), &corpus).unwrap();
        let m = r.model_index_of("m1").unwrap();
        assert_eq!(r.get(m, 0).unwrap().p_yes_a, 0.95);

        let bad = r#"{"model":"m1","statement_id":"s1","p_yes_a":1.3,"p_yes_b":0.4,"valid":true}"#;
        let f = tmpfile(&format!("{bad}\n"));
        let msg = load_model_ratings(f.path(), &corpus).unwrap_err().to_string();
        assert!(msg.contains("outside"), "{msg}");
    }

    #[test]
    fn meta_parse_and_validate() {
        let f = tmpfile("model,family,size_b,elo,openbookqa\nm1,fam,7,1100,85.4\nm2,fam,,,\n");
        let metas = load_model_meta(f.path()).unwrap();
        assert_eq!(metas.len(), 2);
        assert_eq!(metas[0].size_b, Some(7.0));
        assert_eq!(metas[1].elo, None);

        let f = tmpfile("model,family,size_b,elo,openbookqa\nm1,fam,0,,\n");
        assert!(load_model_meta(f.path()).is_err());
    }

    #[test]
    fn csv_output_schema_line_round_trips() {
        let mut out = CsvOutput::new("sensus.test.v1", "a,b");
        out.row(&["1".into(), "2".into()]);
        let f = tempfile::NamedTempFile::new().unwrap();
        out.write_to(f.path()).unwrap();
        let (schema, header, rows) = read_csv_output(f.path()).unwrap();
        assert_eq!(schema, "sensus.test.v1");
        assert_eq!(header, vec!["a", "b"]);
        assert_eq!(rows, vec![vec!["1".to_string(), "2".to_string()]]);
    }
}
