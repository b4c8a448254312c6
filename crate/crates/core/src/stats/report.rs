//! Test reports: one row per tested quantity, Bonferroni-adjusted verdicts,
//! a key-value text form and a JSON record form.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        }
    }
}

/// One tested quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestRow {
    /// Grouping label such as `n=2` or `r=0.5`.
    pub group: String,
    pub name: String,
    pub statistic: f64,
    pub p_value: f64,
    pub adjusted_p_value: f64,
    /// Critical value of the statistic at the adjusted level.
    pub threshold: f64,
    pub verdict: Verdict,
    /// Number of samples entering the row.
    pub n: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test: String,
    pub level: f64,
    pub seed: u64,
    pub sample_sizes: Vec<usize>,
    pub rows: Vec<TestRow>,
    pub verdict: Verdict,
    pub summary: String,
    #[serde(default)]
    pub notes: Vec<String>,
}

/// Per-row record with the fixed machine-readable field names.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestRecord {
    pub name: String,
    pub statistic: f64,
    pub p_value: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    pub n: usize,
    pub seed: u64,
}

impl TestReport {
    /// Assemble a report; the verdict passes iff every row passes.
    pub fn new(test: &str, level: f64, seed: u64, sample_sizes: Vec<usize>, rows: Vec<TestRow>, pass_text: &str) -> Self {
        let verdict = Verdict::from_pass(rows.iter().all(|r| r.verdict.is_pass()));
        let summary = match verdict {
            Verdict::Pass => pass_text.to_string(),
            Verdict::Fail => {
                let failed: Vec<String> = rows
                    .iter()
                    .filter(|r| !r.verdict.is_pass())
                    .map(|r| format!("{}:{}", r.group, r.name))
                    .collect();
                format!("rejected at level {level} ({})", failed.join(", "))
            }
        };
        TestReport {
            test: test.to_string(),
            level,
            seed,
            sample_sizes,
            rows,
            verdict,
            summary,
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict.is_pass()
    }

    pub fn min_adjusted_p(&self) -> f64 {
        self.rows.iter().map(|r| r.adjusted_p_value).fold(1.0, f64::min)
    }

    pub fn records(&self) -> Vec<TestRecord> {
        self.rows
            .iter()
            .map(|r| TestRecord {
                name: format!("{}:{}", r.group, r.name),
                statistic: r.statistic,
                p_value: r.adjusted_p_value,
                threshold: r.threshold,
                verdict: r.verdict,
                n: r.n,
                seed: r.seed,
            })
            .collect()
    }

    /// `key = value` lines, one block per row.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("test = {}\n", self.test));
        out.push_str(&format!("verdict = {}\n", self.verdict.as_str()));
        out.push_str(&format!("summary = {}\n", self.summary));
        out.push_str(&format!("level = {}\n", self.level));
        out.push_str(&format!("seed = {}\n", self.seed));
        let sizes: Vec<String> = self.sample_sizes.iter().map(usize::to_string).collect();
        out.push_str(&format!("sample_sizes = {}\n", sizes.join(",")));
        for r in &self.rows {
            let key = format!("{}.{}", r.group, r.name);
            out.push_str(&format!("{key}.statistic = {}\n", r.statistic));
            out.push_str(&format!("{key}.p_value = {}\n", r.p_value));
            out.push_str(&format!("{key}.adjusted_p_value = {}\n", r.adjusted_p_value));
            out.push_str(&format!("{key}.threshold = {}\n", r.threshold));
            out.push_str(&format!("{key}.verdict = {}\n", r.verdict.as_str()));
            out.push_str(&format!("{key}.n = {}\n", r.n));
        }
        for (i, note) in self.notes.iter().enumerate() {
            out.push_str(&format!("note.{i} = {note}\n"));
        }
        out
    }
}
