//! Figure-ready data files and static SVG renderings, derived from the CSV
//! outputs of earlier runs.
//!
//! Each panel gets one CSV with documented columns; the SVGs are plain
//! scatter/ECDF renderings with no styling knobs.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Result, RunError};
use crate::formats::{fmt_f64, read_csv_output, CsvOutput};
use crate::manifest::RunContext;

/// Minimal scatter plot; `lines` are polylines in data coordinates.
fn svg_scatter(
    points: &[(f64, f64, &str)],
    lines: &[Vec<(f64, f64)>],
    x_label: &str,
    y_label: &str,
    x_range: (f64, f64),
    y_range: (f64, f64),
) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const M: f64 = 56.0;
    let sx = |x: f64| M + (x - x_range.0) / (x_range.1 - x_range.0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y_range.0) / (y_range.1 - y_range.0) * (H - 2.0 * M);
    let mut svg = format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">
<rect width="{W}" height="{H}" fill="white"/>
<line x1="{m}" y1="{hb}" x2="{wr}" y2="{hb}" stroke="black"/>
<line x1="{m}" y1="{m}" x2="{m}" y2="{hb}" stroke="black"/>
<text x="{xc}" y="{yl}" text-anchor="middle" font-size="13">{x_label}</text>
<text x="14" y="{yc}" text-anchor="middle" font-size="13" transform="rotate(-90 14 {yc})">{y_label}</text>
"#,
        m = M,
        hb = H - M,
        wr = W - M,
        xc = W / 2.0,
        yl = H - 16.0,
        yc = H / 2.0,
    );
    for line in lines {
        let pts: Vec<String> = line
            .iter()
            .map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y)))
            .collect();
        svg.push_str(&format!(
            r##"<polyline points="{}" fill="none" stroke="#888888" stroke-width="1"/>"##,
            pts.join(" ")
        ));
        svg.push('\n');
    }
    for &(x, y, label) in points {
        svg.push_str(&format!(
            r##"<circle cx="{:.1}" cy="{:.1}" r="3.5" fill="#1f5fa8" fill-opacity="0.75"><title>{}</title></circle>"##,
            sx(x),
            sy(y),
            label
        ));
        svg.push('\n');
    }
    svg.push_str("</svg>\n");
    svg
}

fn parse_field(row: &[String], idx: usize) -> Result<f64> {
    row.get(idx)
        .and_then(|s| s.parse::<f64>().ok())
        .ok_or_else(|| RunError::validation(format!("bad numeric field in upstream CSV: {row:?}")))
}

fn col(header: &[String], name: &str, path: &Path) -> Result<usize> {
    header.iter().position(|h| h == name).ok_or_else(|| {
        RunError::validation(format!("{}: missing column {name:?}", path.display()))
    })
}

fn require(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(RunError::validation(format!(
            "missing upstream output {}",
            path.display()
        )))
    }
}

/// Model consensus/awareness scatter with commonsensicality level curves at
/// 25/50/75%.
pub fn export_fig2b(ctx: &mut RunContext, from: &Path) -> Result<()> {
    let scores_path = from.join("scores.csv");
    require(&scores_path)?;
    let (_, header, rows) = read_csv_output(&scores_path)?;
    let kind = col(&header, "entity_kind", &scores_path)?;
    let id = col(&header, "id", &scores_path)?;
    let c_idx = col(&header, "consensus", &scores_path)?;
    let a_idx = col(&header, "awareness", &scores_path)?;
    let m_idx = col(&header, "commonsensicality", &scores_path)?;

    let mut out = CsvOutput::new(
        "sensus.fig2b.v1",
        "kind,id,consensus,awareness,commonsensicality",
    );
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for row in &rows {
        if row[kind] != "model" {
            continue;
        }
        let (c, a, m) = (
            parse_field(row, c_idx)?,
            parse_field(row, a_idx)?,
            parse_field(row, m_idx)?,
        );
        out.row(&[
            "model".into(),
            row[id].clone(),
            fmt_f64(c),
            fmt_f64(a),
            fmt_f64(m),
        ]);
        labels.push(row[id].clone());
        points.push((c, a));
    }
    let mut curves = Vec::new();
    for level in [0.25, 0.50, 0.75] {
        let m2 = level * level;
        let mut curve = Vec::new();
        for step in 0..=60 {
            let c = m2 + (1.0 - m2) * step as f64 / 60.0;
            let a = m2 / c;
            curve.push((c, a));
            out.row(&[
                "level_curve".into(),
                format!("m{}", (level * 100.0) as u32),
                fmt_f64(c),
                fmt_f64(a),
                fmt_f64(level),
            ]);
        }
        curves.push(curve);
    }
    out.write_to(&ctx.output("fig2b.csv"))?;
    let pts: Vec<(f64, f64, &str)> = points
        .iter()
        .zip(labels.iter())
        .map(|(&(c, a), l)| (c, a, l.as_str()))
        .collect();
    let svg = svg_scatter(
        &pts,
        &curves,
        "consensus",
        "awareness",
        (0.0, 1.0),
        (0.0, 1.0),
    );
    std::fs::write(ctx.output("fig2b.svg"), svg)?;
    Ok(())
}

/// Model size against commonsensicality, grouped by family.
pub fn export_fig2c(ctx: &mut RunContext, from: &Path, meta_path: &Path) -> Result<()> {
    let scores_path = from.join("scores.csv");
    require(&scores_path)?;
    let scores = model_scores_map(&scores_path)?;
    let metas = crate::formats::load_model_meta(meta_path)?;
    let mut out = CsvOutput::new(
        "sensus.fig2c.v1",
        "model,family,size_b,log10_size,commonsensicality",
    );
    for meta in &metas {
        let (Some(size), Some(&m)) = (meta.size_b, scores.get(&meta.model)) else {
            continue;
        };
        out.row(&[
            meta.model.clone(),
            meta.family.clone(),
            fmt_f64(size),
            fmt_f64(size.log10()),
            fmt_f64(m),
        ]);
    }
    out.write_to(&ctx.output("fig2c.csv"))?;
    Ok(())
}

/// Elo rating against commonsensicality, with a least-squares line.
pub fn export_fig2d(ctx: &mut RunContext, from: &Path, meta_path: &Path) -> Result<()> {
    let scores_path = from.join("scores.csv");
    require(&scores_path)?;
    let scores = model_scores_map(&scores_path)?;
    let metas = crate::formats::load_model_meta(meta_path)?;
    let mut out = CsvOutput::new("sensus.fig2d.v1", "model,elo,commonsensicality");
    let mut pts = Vec::new();
    let mut labels = Vec::new();
    for meta in &metas {
        let (Some(elo), Some(&m)) = (meta.elo, scores.get(&meta.model)) else {
            continue;
        };
        out.row(&[meta.model.clone(), fmt_f64(elo), fmt_f64(m)]);
        pts.push((elo, m));
        labels.push(meta.model.clone());
    }
    out.write_to(&ctx.output("fig2d.csv"))?;

    let mut lines = Vec::new();
    if pts.len() >= 3 {
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let design =
            sensus_core::regress::DesignMatrix::with_intercept(vec![xs.clone()]).map_err(|e| {
                RunError::validation(format!("fig2d fit: {e}"))
            })?;
        if let Ok(fit) = sensus_core::regress::ols_fit(&design, &ys) {
            let (lo, hi) = xs
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| {
                    (l.min(x), h.max(x))
                });
            lines.push(vec![
                (lo, fit.coefficients[0] + fit.coefficients[1] * lo),
                (hi, fit.coefficients[0] + fit.coefficients[1] * hi),
            ]);
        }
    }
    if !pts.is_empty() {
        let (xlo, xhi) = pts
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| {
                (l.min(p.0), h.max(p.0))
            });
        let span = (xhi - xlo).max(1.0);
        let labeled: Vec<(f64, f64, &str)> = pts
            .iter()
            .zip(labels.iter())
            .map(|(&(x, y), l)| (x, y, l.as_str()))
            .collect();
        let svg = svg_scatter(
            &labeled,
            &lines,
            "elo",
            "commonsensicality",
            (xlo - 0.05 * span, xhi + 0.05 * span),
            (0.0, 1.0),
        );
        std::fs::write(ctx.output("fig2d.svg"), svg)?;
    }
    Ok(())
}

/// Per-respondent model-minus-human differences with win flags, plus ECDF
/// curves.
pub fn export_fig2e(ctx: &mut RunContext, from: &Path) -> Result<()> {
    let pairwise_path = from.join("pairwise.csv");
    require(&pairwise_path)?;
    let (_, header, rows) = read_csv_output(&pairwise_path)?;
    let model = col(&header, "model", &pairwise_path)?;
    let resp = col(&header, "respondent", &pairwise_path)?;
    let diff = col(&header, "diff", &pairwise_path)?;
    let win = col(&header, "win", &pairwise_path)?;

    let mut out = CsvOutput::new("sensus.fig2e.v1", "model,respondent,diff,win");
    let mut by_model: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for row in &rows {
        let d = parse_field(row, diff)?;
        out.row(&[
            row[model].clone(),
            row[resp].clone(),
            fmt_f64(d),
            row[win].clone(),
        ]);
        by_model.entry(row[model].clone()).or_default().push(d);
    }
    out.write_to(&ctx.output("fig2e.csv"))?;

    let mut curves = Vec::new();
    for diffs in by_model.values_mut() {
        diffs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = diffs.len() as f64;
        let curve: Vec<(f64, f64)> = diffs
            .iter()
            .enumerate()
            .map(|(i, &d)| (d, (i + 1) as f64 / n))
            .collect();
        curves.push(curve);
    }
    let svg = svg_scatter(
        &[],
        &curves,
        "commonsensicality difference (model - human)",
        "ECDF",
        (-1.0, 1.0),
        (0.0, 1.0),
    );
    std::fs::write(ctx.output("fig2e.svg"), svg)?;
    Ok(())
}

/// Feature-dichotomy contrasts per population.
pub fn export_fig3c(ctx: &mut RunContext, from: &Path) -> Result<()> {
    let contrasts_path = from.join("contrasts.csv");
    require(&contrasts_path)?;
    let (_, header, rows) = read_csv_output(&contrasts_path)?;
    let cols = [
        "population",
        "axis",
        "pole_a",
        "pole_b",
        "mean_diff_pp",
        "ci50_lo",
        "ci50_hi",
        "ci95_lo",
        "ci95_hi",
    ];
    let idx: Vec<usize> = cols
        .iter()
        .map(|c| col(&header, c, &contrasts_path))
        .collect::<Result<_>>()?;
    let mut out = CsvOutput::new("sensus.fig3c.v1", &cols.join(","));
    for row in &rows {
        out.row(&idx.iter().map(|&i| row[i].clone()).collect::<Vec<_>>());
    }
    out.write_to(&ctx.output("fig3c.csv"))?;
    Ok(())
}

/// Human-silicon correlation per model with the split-half baseline.
pub fn export_fig4a(ctx: &mut RunContext, from: &Path) -> Result<()> {
    let corr_path = from.join("correlations.csv");
    require(&corr_path)?;
    let (_, header, rows) = read_csv_output(&corr_path)?;
    let cols = ["kind", "id", "n", "r", "p_two_sided", "p_bonferroni", "ci_lo", "ci_hi"];
    let idx: Vec<usize> = cols
        .iter()
        .map(|c| col(&header, c, &corr_path))
        .collect::<Result<_>>()?;
    let mut out = CsvOutput::new("sensus.fig4a.v1", &cols.join(","));
    for row in &rows {
        out.row(&idx.iter().map(|&i| row[i].clone()).collect::<Vec<_>>());
    }
    out.write_to(&ctx.output("fig4a.csv"))?;
    Ok(())
}

/// Statement-level human/silicon score pairs for the scatter panels.
pub fn export_fig4b(ctx: &mut RunContext, from: &Path) -> Result<()> {
    let silicon_path = from.join("silicon.csv");
    require(&silicon_path)?;
    let (_, header, rows) = read_csv_output(&silicon_path)?;
    let model = col(&header, "model", &silicon_path)?;
    let stmt = col(&header, "statement_id", &silicon_path)?;
    let m_m = col(&header, "commonsensicality", &silicon_path)?;
    let m_h = col(&header, "m_human", &silicon_path)?;
    let mut out = CsvOutput::new("sensus.fig4b.v1", "model,statement_id,m_model,m_human");
    let mut pts = Vec::new();
    for row in &rows {
        if row[m_h].is_empty() {
            continue;
        }
        out.row(&[
            row[model].clone(),
            row[stmt].clone(),
            row[m_m].clone(),
            row[m_h].clone(),
        ]);
        if pts.len() < 4000 {
            pts.push((parse_field(row, m_m)?, parse_field(row, m_h)?));
        }
    }
    out.write_to(&ctx.output("fig4b.csv"))?;
    let labeled: Vec<(f64, f64, &str)> = pts.iter().map(|&(x, y)| (x, y, "")).collect();
    let svg = svg_scatter(
        &labeled,
        &[vec![(0.0, 0.0), (1.0, 1.0)]],
        "silicon commonsensicality",
        "human commonsensicality",
        (0.0, 1.0),
        (0.0, 1.0),
    );
    std::fs::write(ctx.output("fig4b.svg"), svg)?;
    Ok(())
}

/// Cross-validated R-squared rows (per model and ensemble).
pub fn export_fig4c(ctx: &mut RunContext, from: &Path) -> Result<()> {
    let regress_path = from.join("regress.csv");
    require(&regress_path)?;
    let (_, header, rows) = read_csv_output(&regress_path)?;
    let term = col(&header, "term", &regress_path)?;
    let estimate = col(&header, "estimate", &regress_path)?;
    let se = col(&header, "se", &regress_path)?;
    let mut out = CsvOutput::new("sensus.fig4c.v1", "term,mean_r2,sd_r2");
    for row in &rows {
        if row[term].starts_with("cv_r2:") {
            out.row(&[row[term].clone(), row[estimate].clone(), row[se].clone()]);
        }
    }
    out.write_to(&ctx.output("fig4c.csv"))?;
    Ok(())
}

fn model_scores_map(scores_path: &Path) -> Result<BTreeMap<String, f64>> {
    let (_, header, rows) = read_csv_output(scores_path)?;
    let kind = col(&header, "entity_kind", scores_path)?;
    let id = col(&header, "id", scores_path)?;
    let m_idx = col(&header, "commonsensicality", scores_path)?;
    let mut map = BTreeMap::new();
    for row in &rows {
        if row[kind] == "model" {
            map.insert(row[id].clone(), parse_field(row, m_idx)?);
        }
    }
    Ok(map)
}
