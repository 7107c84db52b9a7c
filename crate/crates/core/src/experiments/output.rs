//! Results CSV and summary JSON.
//!
//! A results file opens with `# key=value` lines echoing the resolved
//! configuration, followed by a header row and one row per trial record.
//! Floats are written with 17 significant digits. Wall time is left blank
//! unless timing is requested, so reruns are byte-identical.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::TrialRecord;
use crate::error::{Error, Result};
use crate::instances::fmt17;

pub const CSV_COLUMNS: [&str; 10] = [
    "experiment_id",
    "functional",
    "d",
    "p",
    "n",
    "trial",
    "seed",
    "value",
    "normalized_value",
    "wall_ms",
];

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::input(format!("csv: {other:?}")),
    }
}

/// Renders the results file.
pub fn render_csv(
    config: &[(String, String)],
    records: &[TrialRecord],
    timing: bool,
) -> Result<String> {
    let mut out = Vec::new();
    for (k, v) in config {
        writeln!(out, "# {k}={v}")?;
    }
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(CSV_COLUMNS).map_err(csv_error)?;
        for r in records {
            let wall = if timing {
                format!("{:.3}", r.wall_ms)
            } else {
                String::new()
            };
            w.write_record([
                r.experiment.to_string(),
                r.functional.clone(),
                r.d.to_string(),
                r.p.to_string(),
                r.n.to_string(),
                r.trial.to_string(),
                r.seed.to_string(),
                fmt17(r.value),
                fmt17(r.normalized),
                wall,
            ])
            .map_err(csv_error)?;
        }
        w.flush()?;
    }
    Ok(String::from_utf8(out).expect("csv output is utf-8"))
}

/// Data rows of a rendered results file, without comments or header.
pub fn csv_body(text: &str) -> Vec<&str> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect()
}

/// Pretty JSON of `{"config": .., "summary": ..}`.
pub fn render_summary<C: Serialize, S: Serialize>(config: &C, summary: &S) -> Result<String> {
    #[derive(Serialize)]
    struct Doc<'a, C, S> {
        config: &'a C,
        summary: &'a S,
    }
    let mut s = serde_json::to_string_pretty(&Doc { config, summary })
        .map_err(|e| Error::input(format!("cannot serialize summary: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn write_file(path: impl AsRef<Path>, contents: &str) -> Result<()> {
    std::fs::write(path, contents)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(trial: u64, value: f64) -> TrialRecord {
        TrialRecord {
            experiment: "gamma",
            functional: "MST".into(),
            d: 2,
            p: 1.0,
            n: 10,
            trial,
            seed: 77,
            value,
            normalized: value / 10f64.sqrt(),
            wall_ms: 1.25,
        }
    }

    #[test]
    fn layout_and_round_trip() {
        let cfg = vec![("seed".to_string(), "42".to_string())];
        let text = render_csv(&cfg, &[rec(0, 0.1), rec(1, 2.0 / 3.0)], false).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# seed=42"));
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        let body = csv_body(&text);
        assert_eq!(body.len(), 2);
        assert!(body[0].ends_with(','));
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows[1][7].parse::<f64>().unwrap(), 2.0 / 3.0);
    }

    #[test]
    fn timing_fills_the_last_column() {
        let text = render_csv(&[], &[rec(0, 1.0)], true).unwrap();
        assert!(csv_body(&text)[0].ends_with(",1.250"));
    }

    #[test]
    fn summary_wraps_config_and_stats() {
        let s = render_summary(&serde_json::json!({"d": 2}), &vec![1.5]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["config"]["d"], 2);
        assert_eq!(v["summary"][0], 1.5);
    }
}
