use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::stats::SlopeFit;

pub const CSV_HEADER: &str = "experiment,n,rep,statistic,value";

/// One CSV row. `n` is empty for rows that span the whole grid; `rep` is the
/// replication index or an aggregate label such as `median`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub n: Option<usize>,
    pub rep: String,
    pub statistic: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeEntry {
    pub statistic: String,
    pub fit: SlopeFit,
    pub expected: f64,
    pub tolerance: f64,
}

impl SlopeEntry {
    pub fn within(&self) -> bool {
        (self.fit.slope - self.expected).abs() <= self.tolerance
    }
}

/// Named pass/fail acceptance window.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub experiment: String,
    /// The result the experiment probes.
    pub probe: String,
    pub params: Vec<(String, String)>,
    pub rows: Vec<Row>,
    pub slopes: Vec<SlopeEntry>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub runtime_secs: f64,
}

fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

impl ExperimentReport {
    pub fn new(experiment: &str, probe: &str, params: Vec<(String, String)>) -> Self {
        ExperimentReport {
            experiment: experiment.to_string(),
            probe: probe.to_string(),
            params,
            rows: Vec::new(),
            slopes: Vec::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            runtime_secs: 0.0,
        }
    }

    pub fn push_rep(&mut self, n: usize, rep: usize, statistic: &str, value: f64) {
        self.rows.push(Row {
            n: Some(n),
            rep: rep.to_string(),
            statistic: statistic.into(),
            value,
        });
    }

    pub fn push_agg(&mut self, n: Option<usize>, label: &str, statistic: &str, value: f64) {
        self.rows.push(Row {
            n,
            rep: label.into(),
            statistic: statistic.into(),
            value,
        });
    }

    pub fn push_slope(&mut self, statistic: &str, fit: SlopeFit, expected: f64, tolerance: f64) {
        self.push_agg(None, "slope", statistic, fit.slope);
        self.push_agg(None, "slope_se", statistic, fit.bootstrap_se);
        self.slopes.push(SlopeEntry {
            statistic: statistic.into(),
            fit,
            expected,
            tolerance,
        });
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Per-replication values of `statistic` at `n`, in replication order.
    pub fn rep_values(&self, statistic: &str, n: usize) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| {
                r.n == Some(n) && r.statistic == statistic && r.rep.parse::<usize>().is_ok()
            })
            .map(|r| r.value)
            .collect()
    }

    /// First aggregate value labelled `label` for `statistic` at `n`.
    pub fn aggregate(&self, statistic: &str, n: Option<usize>, label: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.n == n && r.statistic == statistic && r.rep == label)
            .map(|r| r.value)
    }

    pub fn slope(&self, statistic: &str) -> Option<&SlopeEntry> {
        self.slopes.iter().find(|s| s.statistic == statistic)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn params_line(&self) -> String {
        let mut line = format!("# experiment={}", self.experiment);
        for (k, v) in &self.params {
            let _ = write!(line, " {k}={v}");
        }
        line
    }

    /// Header and data rows, without the parameter comment.
    pub fn csv_body(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let n = r.n.map(|n| n.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{n},{},{},{}",
                self.experiment,
                r.rep,
                r.statistic,
                fmt_value(r.value)
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}", self.params_line(), self.csv_body())
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment: {}", self.experiment);
        let _ = writeln!(s, "probes: {}", self.probe);
        let _ = writeln!(s, "version: lrdq {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "{}", self.params_line());
        let medians: Vec<&Row> = self
            .rows
            .iter()
            .filter(|r| r.rep == "median" || r.rep == "value")
            .collect();
        if !medians.is_empty() {
            let _ = writeln!(s, "\naggregates:");
            for r in medians {
                let n = r.n.map(|n| n.to_string()).unwrap_or_else(|| "-".into());
                let _ = writeln!(
                    s,
                    "  n={n:<10} {:<24} {} = {:.6}",
                    r.statistic, r.rep, r.value
                );
            }
        }
        if !self.slopes.is_empty() {
            let _ = writeln!(
                s,
                "\nlog-log slopes of medians (log log factors not removed):"
            );
            for e in &self.slopes {
                let _ = writeln!(
                    s,
                    "  {:<24} slope {:+.4} (bootstrap se {:.4}, ols se {:.4}); expected {:+.4} +/- {:.3}",
                    e.statistic, e.fit.slope, e.fit.bootstrap_se, e.fit.ols_se, e.expected, e.tolerance
                );
            }
        }
        if !self.checks.is_empty() {
            let _ = writeln!(s, "\nchecks:");
            for c in &self.checks {
                let _ = writeln!(
                    s,
                    "  [{}] {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        let _ = writeln!(s, "runtime: {:.2} s", self.runtime_secs);
        s
    }

    /// Writes `<experiment>.csv` and `<experiment>_summary.txt` into `dir`.
    pub fn write(&self, dir: &Path, csv: bool, summary: bool) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        if csv {
            let p = dir.join(format!("{}.csv", self.experiment));
            std::fs::write(&p, self.to_csv())?;
            written.push(p);
        }
        if summary {
            let p = dir.join(format!("{}_summary.txt", self.experiment));
            std::fs::write(&p, self.summary())?;
            written.push(p);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout_and_round_trip() {
        let mut r = ExperimentReport::new("demo", "nothing", vec![("seed".into(), "1".into())]);
        r.push_rep(8, 0, "stat", 0.1);
        r.push_agg(Some(8), "median", "stat", 1.0 / 3.0);
        r.check("window", true, "ok");
        let csv = r.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "# experiment=demo seed=1");
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        assert_eq!(lines.next().unwrap(), "demo,8,0,stat,1.0000000000000001e-1");
        let last = lines.next().unwrap();
        let v: f64 = last.rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(v, 1.0 / 3.0);
        assert_eq!(r.rep_values("stat", 8), vec![0.1]);
        assert!(r.passed());
        assert!(r.summary().contains("[PASS] window"));
    }
}
