//! Report assembly and output.

use crate::checks::CheckOutcome;
use crate::config::RunConfig;
use serde::Serialize;
use serde_json::Value;
use std::path::Path;

/// Conventions that change numerical results, recorded with every report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Conventions {
    pub exponent_resolution: &'static str,
    pub laplacian: &'static str,
    pub m_term_normalisation: &'static str,
    pub slice_anchor: &'static str,
    pub teodorescu_sign: &'static str,
    pub multiplication: &'static str,
    pub values: &'static str,
}

impl Default for Conventions {
    fn default() -> Self {
        Conventions {
            exponent_resolution: "I^(1-alpha_j)",
            laplacian: "R4",
            m_term_normalisation: "Gamma(alpha_j)",
            slice_anchor: "evaluation point x for P and the fractional kernel",
            teodorescu_sign: "T[f](x) = int K(x - y) f(y) dy",
            multiplication: "Hamilton: ij = k, jk = i, ki = j",
            values: "real quaternions",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: RunConfig,
    pub conventions: Conventions,
    pub checks: Vec<CheckOutcome>,
    pub pass: bool,
    pub workers: usize,
    pub wall_time_s: f64,
}

/// Keys that describe how a run was executed rather than what it computed.
const VOLATILE_KEYS: [&str; 2] = ["wall_time_s", "workers"];

fn strip(v: &mut Value) {
    match v {
        Value::Object(map) => {
            for k in VOLATILE_KEYS {
                map.remove(k);
            }
            map.values_mut().for_each(strip);
        }
        Value::Array(items) => items.iter_mut().for_each(strip),
        _ => {}
    }
}

impl Report {
    pub fn new(config: RunConfig, checks: Vec<CheckOutcome>, workers: usize, wall_time_s: f64) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Report {
            tool: "fracfueter",
            version: env!("CARGO_PKG_VERSION"),
            config,
            conventions: Conventions::default(),
            checks,
            pass,
            workers,
            wall_time_s,
        }
    }

    /// The report without timing and worker count; identical across runs
    /// of the same config.
    pub fn payload(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("report serialises");
        strip(&mut v);
        v
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W, prefix: Option<&str>) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["check", "case", "metric", "value", "tolerance", "pass", "note"];
        if prefix.is_some() {
            header.insert(0, "sweep_value");
        }
        w.write_record(&header)?;
        write_rows(&mut w, &self.checks, prefix)?;
        w.flush()?;
        Ok(())
    }

    /// Writes `report.json` and `report.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), self.to_json() + "\n")?;
        let file = std::fs::File::create(dir.join("report.csv"))?;
        self.write_csv(file, None).map_err(std::io::Error::other)
    }
}

fn write_rows<W: std::io::Write>(w: &mut csv::Writer<W>, checks: &[CheckOutcome], prefix: Option<&str>) -> csv::Result<()> {
    for c in checks {
        let mut rows: Vec<Vec<String>> = c
            .residuals
            .iter()
            .map(|r| {
                vec![
                    c.name.to_string(),
                    r.case.clone(),
                    r.metric.clone(),
                    format!("{:e}", r.value),
                    format!("{:e}", r.tolerance),
                    r.pass.to_string(),
                    String::new(),
                ]
            })
            .collect();
        if let Some(e) = &c.error {
            rows.push(vec![
                c.name.to_string(),
                "-".into(),
                "error".into(),
                String::new(),
                String::new(),
                "false".into(),
                e.clone(),
            ]);
        }
        for mut row in rows {
            if let Some(p) = prefix {
                row.insert(0, p.to_string());
            }
            w.write_record(&row)?;
        }
    }
    Ok(())
}

/// Trend of one check's score across a sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trend {
    pub check: String,
    /// Largest `residual / tolerance` at each sweep value.
    pub scores: Vec<f64>,
    pub verdict: &'static str,
}

/// Scores below this are treated as converged; changes between two such
/// values are noise and do not count as inversions.
pub const CONVERGED_SCORE: f64 = 1e-3;

/// `"decreasing"` if the scores never rise, or rise once by at most 10%;
/// `"not-decreasing"` otherwise.
pub fn trend_verdict(scores: &[f64]) -> &'static str {
    let mut inversions = 0;
    let mut large = false;
    for w in scores.windows(2) {
        let (prev, next) = (w[0], w[1]);
        if prev <= CONVERGED_SCORE && next <= CONVERGED_SCORE {
            continue;
        }
        // negated so that NaN counts as an inversion
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(next <= prev) {
            inversions += 1;
            large |= !(next <= 1.1 * prev);
        }
    }
    if inversions == 0 || (inversions == 1 && !large) {
        "decreasing"
    } else {
        "not-decreasing"
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub param: String,
    pub values: Vec<String>,
    pub runs: Vec<Report>,
    pub trends: Vec<Trend>,
    pub pass: bool,
}

impl SweepReport {
    pub fn new(param: String, values: Vec<String>, runs: Vec<Report>) -> Self {
        let names: Vec<_> = runs.first().map(|r| r.checks.iter().map(|c| c.name).collect()).unwrap_or_default();
        let trends: Vec<Trend> = names
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let scores: Vec<f64> = runs.iter().map(|r| r.checks[i].score()).collect();
                Trend {
                    check: name.to_string(),
                    verdict: trend_verdict(&scores),
                    scores,
                }
            })
            .collect();
        let pass = runs.iter().all(|r| r.pass) && trends.iter().all(|t| t.verdict == "decreasing");
        SweepReport {
            param,
            values,
            runs,
            trends,
            pass,
        }
    }

    /// Writes `sweep.json` and `sweep.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(self).expect("sweep serialises");
        std::fs::write(dir.join("sweep.json"), json + "\n")?;
        let file = std::fs::File::create(dir.join("sweep.csv"))?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(["sweep_value", "check", "case", "metric", "value", "tolerance", "pass", "note"])
            .map_err(std::io::Error::other)?;
        for (value, run) in self.values.iter().zip(&self.runs) {
            write_rows(&mut w, &run.checks, Some(value)).map_err(std::io::Error::other)?;
        }
        w.flush()
    }
}
