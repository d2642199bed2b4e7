use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const CSV_HEADER: [&str; 6] = ["command", "quantity", "value", "prediction", "tolerance", "note"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub command: String,
    pub quantity: String,
    pub value: Option<f64>,
    pub prediction: Option<f64>,
    pub tolerance: Option<f64>,
    pub note: String,
}

/// Formats with 12 significant digits, like C's `%.12g`.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// Rounds through the 12-digit text so JSON and CSV agree.
fn round12(v: Option<f64>) -> Option<f64> {
    v.filter(|x| x.is_finite()).map(|x| fmt_sig(x).parse().expect("round trip"))
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub seed: u64,
    pub mode: String,
    pub config: BTreeMap<String, String>,
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn new(command: &str, seed: u64, mode: &str) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            seed,
            mode: mode.to_string(),
            config: BTreeMap::new(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, quantity: impl Into<String>, value: f64) -> &mut ReportRow {
        self.rows.push(ReportRow {
            command: self.command.clone(),
            quantity: quantity.into(),
            value: Some(value),
            prediction: None,
            tolerance: None,
            note: String::new(),
        });
        self.rows.last_mut().expect("just pushed")
    }

    pub fn push_note(&mut self, quantity: impl Into<String>, note: impl Into<String>) {
        let row = self.push(quantity, f64::NAN);
        row.value = None;
        row.note = note.into();
    }

    fn header_rows(&self) -> Vec<ReportRow> {
        let row = |q: String, value: Option<f64>, note: String| ReportRow {
            command: self.command.clone(),
            quantity: q,
            value,
            prediction: None,
            tolerance: None,
            note,
        };
        let mut out = vec![
            row("schema_version".into(), Some(SCHEMA_VERSION as f64), String::new()),
            row("seed".into(), None, self.seed.to_string()),
            row("mode".into(), None, self.mode.clone()),
        ];
        out.extend(self.config.iter().map(|(k, v)| row(format!("config.{k}"), None, v.clone())));
        out
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER)?;
        let cell = |v: Option<f64>| v.map(fmt_sig).unwrap_or_default();
        for r in self.header_rows().iter().chain(&self.rows) {
            w.write_record([
                r.command.as_str(),
                r.quantity.as_str(),
                &cell(r.value),
                &cell(r.prediction),
                &cell(r.tolerance),
                r.note.as_str(),
            ])?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.into_error()))
    }

    pub fn to_json(&self) -> Result<Vec<u8>, CliError> {
        let mut mirror = self.clone();
        for r in &mut mirror.rows {
            if r.value.is_some_and(|v| !v.is_finite()) && r.note.is_empty() {
                r.note = fmt_sig(r.value.unwrap_or(f64::NAN));
            }
            r.value = round12(r.value);
            r.prediction = round12(r.prediction);
            r.tolerance = round12(r.tolerance);
        }
        let mut out = serde_json::to_vec_pretty(&mirror)?;
        out.push(b'\n');
        Ok(out)
    }

    /// Writes `<command>.csv` and `<command>.json`; timing goes to `<command>.meta.json`.
    pub fn write(&self, dir: &Path, meta: &serde_json::Value) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(dir)?;
        let csv = dir.join(format!("{}.csv", self.command));
        let json = dir.join(format!("{}.json", self.command));
        let meta_path = dir.join(format!("{}.meta.json", self.command));
        std::fs::write(&csv, self.to_csv()?)?;
        std::fs::write(&json, self.to_json()?)?;
        std::fs::write(&meta_path, serde_json::to_vec_pretty(meta)?)?;
        Ok(vec![csv, json, meta_path])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt_sig(0.4), "0.4");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(2.0 / 3.0), "0.666666666667");
        assert_eq!(fmt_sig(90575.0), "90575");
        assert_eq!(fmt_sig(-1.5e-7), "-1.5e-7");
        assert_eq!(fmt_sig(6.02214076e23), "6.02214076e23");
        assert_eq!(fmt_sig(123456789012.4), "123456789012");
        assert_eq!(fmt_sig(f64::NAN), "nan");
        assert_eq!(fmt_sig(2.05123842693e-5), "2.05123842693e-5");
        assert_eq!(fmt_sig(0.000123), "0.000123");
    }

    #[test]
    fn csv_has_fixed_header() {
        let mut r = Report::new("localfactor", 7, "exact");
        r.config.insert("p".into(), "5".into());
        r.push("c_p", 0.4).note = "2/5".into();
        let text = String::from_utf8(r.to_csv().unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("command,quantity,value,prediction,tolerance,note"));
        assert_eq!(lines.next(), Some("localfactor,schema_version,1,,,"));
        assert!(text.contains("localfactor,config.p,,,,5\n"));
        assert!(text.ends_with("localfactor,c_p,0.4,,,2/5\n"));
        let json: serde_json::Value = serde_json::from_slice(&r.to_json().unwrap()).unwrap();
        assert_eq!(json["rows"][0]["value"], 0.4);
    }
}
