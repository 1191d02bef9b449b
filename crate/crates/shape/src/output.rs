//! Report serialization: structured JSON, flat CSV and a printable table.

use std::io::{self, Write};

use serde::Serialize;
use shape_core::ScoreReport;

pub fn report_json(report: &ScoreReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn parse_report_json(text: &str) -> serde_json::Result<ScoreReport> {
    serde_json::from_str(text)
}

/// One CSV line. Floats use the shortest representation that parses back exactly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvRow {
    pub model: String,
    pub metric: String,
    pub modality_or_coalition: String,
    pub mean: String,
    pub std: String,
}

fn num(x: f64) -> String {
    format!("{x}")
}

pub fn csv_rows(report: &ScoreReport) -> Vec<CsvRow> {
    let row = |metric: &str, target: &str, mean: f64, std: Option<f64>| CsvRow {
        model: report.model.clone(),
        metric: metric.into(),
        modality_or_coalition: target.into(),
        mean: num(mean),
        std: std.map(num).unwrap_or_default(),
    };
    let mut rows = vec![
        row("accuracy_full", "", report.accuracy_full, None),
        row("empty_utility", "", report.empty_utility, None),
    ];
    rows.extend(report.utilities.iter().map(|(k, v)| row("utility", k, *v, None)));
    for id in &report.modalities {
        if let Some(v) = report.shapley.get(id) {
            rows.push(row("shapley", id, *v, None));
        }
    }
    for id in &report.modalities {
        if let Some(v) = report.shape_marginal.get(id) {
            rows.push(row("shape_marginal", id, *v, None));
        }
    }
    for (key, c) in &report.cooperation {
        rows.push(row("cooperation_raw", key, c.raw, None));
        rows.push(row("cooperation", key, c.points, None));
        if let Some(n) = c.normalized_points {
            rows.push(row("cooperation_normalized", key, n, None));
        }
    }
    for id in &report.modalities {
        let Some(cells) = report.perceptual.get(id) else {
            continue;
        };
        for mode in ["uniform", "in", "out"] {
            if let Some(c) = cells.get(mode) {
                rows.push(row(&format!("perceptual_{mode}"), id, c.mean, Some(c.std)));
            }
        }
    }
    rows
}

pub fn write_csv(report: &ScoreReport, writer: impl Write) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in csv_rows(report) {
        w.serialize(r).map_err(io::Error::other)?;
    }
    w.flush()
}

/// Table in the layout Acc., 𝒮_*, 𝒞_*, then P, P^in, P^out per modality.
/// Scores in points at two decimals; perceptual cells carry `± std`.
pub fn render_table(report: &ScoreReport, normalize_cooperation: bool) -> String {
    let mut header = vec!["Model".to_string(), "Acc.".to_string()];
    let mut cells = vec![report.model.clone(), format!("{:.2}", 100.0 * report.accuracy_full)];
    let missing = || "-".to_string();
    for id in &report.modalities {
        header.push(format!("𝒮_{id}"));
        cells.push(
            report
                .shape_marginal
                .get(id)
                .map(|v| format!("{v:.2}"))
                .unwrap_or_else(missing),
        );
    }
    for (key, c) in &report.cooperation {
        header.push(format!("𝒞_{key}"));
        let v = if normalize_cooperation {
            c.normalized_points
        } else {
            Some(c.points)
        };
        cells.push(v.map(|v| format!("{v:.2}")).unwrap_or_else(missing));
    }
    for id in &report.modalities {
        for (mode, label) in [("uniform", ""), ("in", "^in"), ("out", "^out")] {
            header.push(format!("P_{id}{label}"));
            let cell = report.perceptual.get(id).and_then(|m| m.get(mode));
            cells.push(
                cell.map(|c| format!("{:.2} ± {:.2}", c.mean, c.std))
                    .unwrap_or_else(missing),
            );
        }
    }
    let widths: Vec<usize> = header
        .iter()
        .zip(&cells)
        .map(|(h, c)| h.chars().count().max(c.chars().count()))
        .collect();
    let line = |items: &[String]| {
        items
            .iter()
            .zip(&widths)
            .map(|(s, w)| format!("{s}{}", " ".repeat(w - s.chars().count())))
            .collect::<Vec<_>>()
            .join(" | ")
            .trim_end()
            .to_string()
    };
    let rule = widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-+-");
    let mut out = format!("{}\n{rule}\n{}\n", line(&header), line(&cells));
    if report.partial {
        out.push_str("PARTIAL report:\n");
        for e in &report.errors {
            out.push_str(&format!("  {e}\n"));
        }
    }
    out
}
