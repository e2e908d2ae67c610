use std::io::{self, Write};

use clap::ValueEnum;
use pathshap::game::{PlayerValue, ShapleyReport};
use pathshap::graph::VertexId;
use pathshap::query::VarName;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Serialize)]
pub struct ReportJson {
    pub method: String,
    pub players: Vec<PlayerJson>,
    pub flags: Vec<String>,
}

/// One report row. Exact values are `num/den` strings, sampled values
/// numbers with their sampling parameters.
#[derive(Debug, Serialize)]
pub struct PlayerJson {
    pub id: String,
    pub value: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl From<&ShapleyReport> for ReportJson {
    fn from(report: &ShapleyReport) -> Self {
        let players = report
            .players
            .iter()
            .map(|p| match &p.value {
                PlayerValue::Exact(r) => PlayerJson {
                    id: p.id.to_string(),
                    value: serde_json::Value::String(r.to_string()),
                    eps: None,
                    delta: None,
                    samples: None,
                    seed: None,
                },
                PlayerValue::Sampled(e) => PlayerJson {
                    id: p.id.to_string(),
                    value: serde_json::json!(e.value),
                    eps: Some(e.eps),
                    delta: Some(e.delta),
                    samples: Some(e.samples),
                    seed: Some(e.seed),
                },
            })
            .collect();
        ReportJson {
            method: report.method.to_string(),
            players,
            flags: report.flags.clone(),
        }
    }
}

fn sampling_columns(value: &PlayerValue) -> [String; 4] {
    match value {
        PlayerValue::Exact(_) => Default::default(),
        PlayerValue::Sampled(e) => [
            e.eps.to_string(),
            e.delta.to_string(),
            e.samples.to_string(),
            e.seed.to_string(),
        ],
    }
}

fn write_table(out: &mut dyn Write, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c:<w$}"))
            .collect();
        padded.join("  ").trim_end().to_string()
    };
    writeln!(out, "{}", line(header.to_vec()))?;
    for row in rows {
        writeln!(out, "{}", line(row.iter().map(String::as_str).collect()))?;
    }
    Ok(())
}

fn csv_error(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

pub fn write_report(out: &mut dyn Write, format: Format, report: &ShapleyReport) -> io::Result<()> {
    let sampled = !report.method.is_exact();
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &ReportJson::from(report))?;
            writeln!(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["id", "value", "method", "eps", "delta", "samples", "seed"])
                .map_err(csv_error)?;
            for p in &report.players {
                let [eps, delta, samples, seed] = sampling_columns(&p.value);
                w.write_record([
                    p.id.as_str(),
                    &p.value.to_string(),
                    report.method.as_str(),
                    &eps,
                    &delta,
                    &samples,
                    &seed,
                ])
                .map_err(csv_error)?;
            }
            w.flush()
        }
        Format::Table => {
            writeln!(out, "method: {}", report.method)?;
            for flag in &report.flags {
                writeln!(out, "flag: {flag}")?;
            }
            let rows: Vec<Vec<String>> = report
                .players
                .iter()
                .map(|p| {
                    let mut row = vec![p.id.to_string(), p.value.to_string()];
                    if sampled {
                        row.extend(sampling_columns(&p.value));
                    }
                    row
                })
                .collect();
            let header: &[&str] = if sampled {
                &["player", "value", "eps", "delta", "samples", "seed"]
            } else {
                &["player", "value"]
            };
            write_table(out, header, &rows)
        }
    }
}

pub fn write_answers(
    out: &mut dyn Write,
    format: Format,
    variables: &[VarName],
    answers: &[Vec<VertexId>],
) -> io::Result<()> {
    let header: Vec<&str> = variables.iter().map(VarName::as_str).collect();
    let rows: Vec<Vec<String>> = answers
        .iter()
        .map(|a| a.iter().map(ToString::to_string).collect())
        .collect();
    match format {
        Format::Json => {
            let value = serde_json::json!({ "variables": header, "answers": rows });
            serde_json::to_writer_pretty(&mut *out, &value)?;
            writeln!(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&header).map_err(csv_error)?;
            for row in &rows {
                w.write_record(row).map_err(csv_error)?;
            }
            w.flush()
        }
        Format::Table => write_table(out, &header, &rows),
    }
}
