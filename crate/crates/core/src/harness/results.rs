//! Tabular sweep results and their CSV form.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::numfmt::sig9;
use crate::{Error, Result};

pub const CSV_HEADER: &str = "experiment,sweep_name,sweep_value,metric,value,ci_half_width,seed";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub sweep_name: String,
    pub sweep_value: f64,
    pub metric: String,
    pub value: f64,
    pub ci_half_width: f64,
    pub seed: u64,
    pub fingerprint: String,
}

/// Rows of one experiment run, all tagged with the config fingerprint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultSet {
    pub experiment: String,
    pub fingerprint: String,
    pub seed: u64,
    pub rows: Vec<ResultRow>,
}

impl ResultSet {
    pub fn new(experiment: &str, fingerprint: &str, seed: u64) -> Self {
        Self {
            experiment: experiment.to_string(),
            fingerprint: fingerprint.to_string(),
            seed,
            rows: Vec::new(),
        }
    }

    /// Appends a row; metric values must be finite.
    pub fn push(&mut self, sweep_name: &str, sweep_value: f64, metric: &str, value: f64) -> Result<()> {
        self.push_ci(sweep_name, sweep_value, metric, value, 0.0)
    }

    pub fn push_ci(
        &mut self,
        sweep_name: &str,
        sweep_value: f64,
        metric: &str,
        value: f64,
        ci_half_width: f64,
    ) -> Result<()> {
        if !value.is_finite() || !ci_half_width.is_finite() || !sweep_value.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "non-finite result for metric `{metric}` at {sweep_name} = {sweep_value}: {value}"
            )));
        }
        for field in [sweep_name, metric] {
            if field.contains([',', '\n', '\r', '"']) {
                return Err(Error::InvalidParameter(format!("`{field}` is not a plain CSV field")));
            }
        }
        self.rows.push(ResultRow {
            experiment: self.experiment.clone(),
            sweep_name: sweep_name.to_string(),
            sweep_value,
            metric: metric.to_string(),
            value,
            ci_half_width,
            seed: self.seed,
            fingerprint: self.fingerprint.clone(),
        });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// First row matching `metric` and `sweep_value`.
    pub fn value(&self, metric: &str, sweep_value: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.metric == metric && r.sweep_value == sweep_value)
            .map(|r| r.value)
    }

    pub fn rows_for<'a>(&'a self, metric: &'a str) -> impl Iterator<Item = &'a ResultRow> + 'a {
        self.rows.iter().filter(move |r| r.metric == metric)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(CSV_HEADER.as_bytes())?;
        out.write_all(b"\n")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.experiment,
                r.sweep_name,
                sig9(r.sweep_value),
                r.metric,
                sig9(r.value),
                sig9(r.ci_half_width),
                r.seed
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }

    /// Prints metric rows as an aligned table.
    pub fn summary_table(&self) -> String {
        let mut s = format!("{:<14} {:>12}  {:<36} {:>14} {:>10}\n", "sweep", "value", "metric", "result", "ci95");
        for r in &self.rows {
            s.push_str(&format!(
                "{:<14} {:>12}  {:<36} {:>14} {:>10}\n",
                r.sweep_name,
                sig9(r.sweep_value),
                r.metric,
                sig9(r.value),
                sig9(r.ci_half_width)
            ));
        }
        s
    }
}

/// Writes the CSV, refusing empty result sets.
pub fn emit_csv(results: &ResultSet, path: &Path) -> Result<()> {
    if results.is_empty() {
        return Err(Error::InvalidParameter("refusing to write an empty result set".into()));
    }
    std::fs::write(path, results.to_csv_string())?;
    Ok(())
}

/// Sidecar provenance written next to `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub experiment: String,
    pub fingerprint: String,
    pub seed: u64,
    pub snr_normalization: String,
    pub rows: usize,
    pub files: Vec<String>,
    pub config: serde_json::Value,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_row_two_lines() {
        let mut rs = ResultSet::new("demo", "abc", 7);
        rs.push("snr_db", 10.0, "mi_bits", 1.0 / 3.0).unwrap();
        let text = rs.to_csv_string();
        assert_eq!(text, format!("{CSV_HEADER}\ndemo,snr_db,10,mi_bits,0.333333333,0,7\n"));
        assert_eq!(rs, rs.clone());
        assert_eq!(rs.rows[0].fingerprint, "abc");
    }

    #[test]
    fn rejects_non_finite_and_unsafe_names() {
        let mut rs = ResultSet::new("demo", "abc", 7);
        assert!(rs.push("snr_db", 0.0, "mi", f64::NAN).is_err());
        assert!(rs.push("snr_db", 0.0, "a,b", 1.0).is_err());
        assert!(rs.is_empty());
    }

    #[test]
    fn empty_set_is_not_written() {
        let dir = tempfile::tempdir().unwrap();
        let rs = ResultSet::new("demo", "abc", 7);
        assert!(emit_csv(&rs, &dir.path().join("r.csv")).is_err());
    }
}
