//! Run reports as flat `key = value` text plus verification records.
//!
//! A record line reads `record.<name> = <value> <threshold> <pass|fail>`.
//! Numbers are written in the shortest form that parses back to the same bits.

use lnl_core::verify::VerificationRecord;

use crate::error::CliError;

/// Shortest round-trip decimal form of `x`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub entries: Vec<(String, String)>,
    pub records: Vec<VerificationRecord>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn text(&mut self, key: &str, value: impl Into<String>) {
        self.entries.push((key.to_string(), value.into()));
    }

    pub fn number(&mut self, key: &str, value: f64) {
        self.text(key, fmt_f64(value));
    }

    pub fn count(&mut self, key: &str, value: usize) {
        self.text(key, value.to_string());
    }

    pub fn flag(&mut self, key: &str, value: bool) {
        self.text(key, value.to_string());
    }

    pub fn record(&mut self, r: VerificationRecord) {
        self.records.push(r);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key).and_then(|v| v.parse().ok())
    }

    pub fn find_record(&self, name: &str) -> Option<&VerificationRecord> {
        self.records.iter().find(|r| r.name == name)
    }

    /// Whether every verification record passed.
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.records
            .iter()
            .filter(|r| !r.pass)
            .map(|r| r.name.as_str())
            .collect()
    }

    pub fn write(&self) -> String {
        let mut out = String::from("# lnl report\n");
        for (k, v) in &self.entries {
            out.push_str(&format!("{k} = {v}\n"));
        }
        for r in &self.records {
            out.push_str(&format!(
                "record.{} = {} {} {}\n",
                r.name,
                fmt_f64(r.value),
                fmt_f64(r.threshold),
                if r.pass { "pass" } else { "fail" }
            ));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Report, CliError> {
        let bad = |n: usize, m: &str| CliError::Config(format!("report line {}: {m}", n + 1));
        let mut report = Report::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once(" = ").ok_or_else(|| bad(n, "expected key = value"))?;
            if let Some(name) = k.strip_prefix("record.") {
                let parts: Vec<&str> = v.split_whitespace().collect();
                let [value, threshold, status] = parts[..] else {
                    return Err(bad(n, "expected value threshold status"));
                };
                let num = |s: &str| s.parse::<f64>().map_err(|_| bad(n, "bad number"));
                report.records.push(VerificationRecord {
                    name: name.to_string(),
                    value: num(value)?,
                    threshold: num(threshold)?,
                    pass: match status {
                        "pass" => true,
                        "fail" => false,
                        _ => return Err(bad(n, "status must be pass or fail")),
                    },
                });
            } else {
                report.text(k, v);
            }
        }
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut r = Report::new();
        r.text("model.kind", "scalar_flux");
        r.number("solve.energy", -0.1 - 0.2);
        r.number("tiny", 1e-300);
        r.count("solve.iterations", 17);
        r.flag("admissibility.p1", true);
        r.record(VerificationRecord::at_most("weak_residual", 3.3e-11, 1e-10));
        r.record(VerificationRecord::at_least("lambda_min", 0.0, 1e-12));
        let back = Report::parse(&r.write()).unwrap();
        assert_eq!(back, r);
        assert_eq!(
            back.get_f64("solve.energy").unwrap().to_bits(),
            (-0.1f64 - 0.2).to_bits()
        );
        assert!(!back.all_pass());
        assert_eq!(back.failures(), vec!["lambda_min"]);
    }
}
