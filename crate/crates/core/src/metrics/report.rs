use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{accuracy, bucket_share, frequency, render_percent, MistakeBreakdown, OutcomeMatrix, Percent};
use crate::prompts::Language;
use crate::transforms::TaskKind;
use crate::validator::MistakeKind;

/// Schema version of metrics reports.
pub const REPORT_VERSION: u32 = 1;

/// Provenance of the run a report describes. Contains nothing that varies
/// between replays of the same log.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMeta {
    pub backend: String,
    pub model: String,
    pub seed: u64,
    pub max_attempts: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub correct_samples: usize,
    pub success_rate: String,
    pub inputs: usize,
    pub share: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub version: u32,
    pub task: TaskKind,
    pub language: Language,
    pub inputs: usize,
    pub samples_per_input: usize,
    /// Two-decimal rendering of the exact value.
    pub accuracy: String,
    /// Exact value as `numerator/denominator`.
    pub accuracy_exact: String,
    pub histogram: Vec<HistogramRow>,
    /// Per kind: samples of zero-success inputs showing it, divided by the
    /// samples per input.
    pub mistake_frequencies: BTreeMap<MistakeKind, String>,
    pub parse_failures: String,
    pub endpoint_errors: String,
    pub run: RunMeta,
}

fn exact(p: Percent) -> String {
    format!("{}/{}", p.numer(), p.denom())
}

impl MetricsReport {
    pub fn new(matrix: &OutcomeMatrix, breakdown: &MistakeBreakdown, run: RunMeta) -> Self {
        let acc = accuracy(matrix);
        let histogram = frequency(matrix)
            .iter()
            .map(|b| HistogramRow {
                correct_samples: b.correct,
                success_rate: render_percent(b.success_rate),
                inputs: b.inputs,
                share: render_percent(bucket_share(b, matrix.len())),
            })
            .collect();
        Self {
            version: REPORT_VERSION,
            task: matrix.task,
            language: matrix.language,
            inputs: matrix.len(),
            samples_per_input: matrix.samples_per_input(),
            accuracy: render_percent(acc),
            accuracy_exact: exact(acc),
            histogram,
            mistake_frequencies: breakdown.kinds.iter().map(|(k, v)| (*k, render_percent(*v))).collect(),
            parse_failures: render_percent(breakdown.parse_failures),
            endpoint_errors: render_percent(breakdown.errors),
            run,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    /// Plain-text rendering: the accuracy row, then the success-rate
    /// histogram and the mistake frequencies.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<16} {:<8} {:>7} {:>8} {:>9}", "Task", "Language", "Inputs", "Samples", "Accuracy");
        let _ = writeln!(
            out,
            "{:<16} {:<8} {:>7} {:>8} {:>8}%",
            self.task.as_str(),
            self.language.as_str(),
            self.inputs,
            self.samples_per_input,
            self.accuracy
        );
        let _ = writeln!(out, "\nSuccess rate   Inputs    Share");
        for row in &self.histogram {
            let _ = writeln!(out, "{:>11}% {:>8} {:>7}%", row.success_rate, row.inputs, row.share);
        }
        let _ = writeln!(out, "\nMistakes on inputs with 0% success (occurrences / samples per input)");
        if self.mistake_frequencies.is_empty() {
            let _ = writeln!(out, "  none");
        }
        for (kind, v) in &self.mistake_frequencies {
            let _ = writeln!(out, "  {:<24} {:>8}", kind.label(), v);
        }
        let _ = writeln!(out, "  {:<24} {:>8}", "Parse failures", self.parse_failures);
        let _ = writeln!(out, "  {:<24} {:>8}", "Endpoint errors", self.endpoint_errors);
        out
    }

    /// CSV export of the histogram.
    pub fn histogram_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["success_rate", "correct_samples", "inputs", "share"]).expect("in-memory csv");
        for row in &self.histogram {
            w.write_record([
                row.success_rate.clone(),
                row.correct_samples.to_string(),
                row.inputs.to_string(),
                row.share.clone(),
            ])
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
    }
}

/// Two runs of one task in different languages, paired by input id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageComparison {
    pub task: TaskKind,
    pub languages: (Language, Language),
    pub common_inputs: usize,
    pub accuracy: (String, String),
    pub accuracy_delta: String,
    pub full_success_share: (String, String),
    pub full_success_delta: String,
}

fn signed(a: Percent, b: Percent) -> String {
    if b >= a {
        format!("+{}", render_percent(b - a))
    } else {
        format!("-{}", render_percent(a - b))
    }
}

/// Restricts both matrices to their shared inputs and compares accuracy and
/// the share of inputs with 100% success. Deltas are second minus first.
pub fn compare_languages(a: &OutcomeMatrix, b: &OutcomeMatrix) -> Option<LanguageComparison> {
    if a.task != b.task {
        return None;
    }
    let b_rows: HashMap<&str, &Vec<bool>> = b.input_ids.iter().map(String::as_str).zip(&b.rows).collect();
    let mut ids = Vec::new();
    let (mut rows_a, mut rows_b) = (Vec::new(), Vec::new());
    for (id, row) in a.input_ids.iter().zip(&a.rows) {
        if let Some(rb) = b_rows.get(id.as_str()) {
            ids.push(id.clone());
            rows_a.push(row.clone());
            rows_b.push((*rb).clone());
        }
    }
    let ma = OutcomeMatrix::new(a.task, a.language, ids.clone(), rows_a).ok()?;
    let mb = OutcomeMatrix::new(b.task, b.language, ids, rows_b).ok()?;
    let full = |m: &OutcomeMatrix| {
        let buckets = frequency(m);
        buckets.last().map_or(Percent::from_integer(0), |bk| bucket_share(bk, m.len()))
    };
    let (acc_a, acc_b, full_a, full_b) = (accuracy(&ma), accuracy(&mb), full(&ma), full(&mb));
    Some(LanguageComparison {
        task: a.task,
        languages: (a.language, b.language),
        common_inputs: ma.len(),
        accuracy: (render_percent(acc_a), render_percent(acc_b)),
        accuracy_delta: signed(acc_a, acc_b),
        full_success_share: (render_percent(full_a), render_percent(full_b)),
        full_success_delta: signed(full_a, full_b),
    })
}

impl LanguageComparison {
    pub fn render_text(&self) -> String {
        let (la, lb) = self.languages;
        format!(
            "{:<16} {:>7} {:>9} {:>9} {:>8}\n{:<16} {:>7} {:>8}% {:>8}% {:>7}%\n{:<16} {:>7} {:>8}% {:>8}% {:>7}%\n",
            self.task.as_str(),
            "Inputs",
            la.as_str().to_uppercase(),
            lb.as_str().to_uppercase(),
            "Delta",
            "Accuracy",
            self.common_inputs,
            self.accuracy.0,
            self.accuracy.1,
            self.accuracy_delta,
            "100% success",
            self.common_inputs,
            self.full_success_share.0,
            self.full_success_share.1,
            self.full_success_delta,
        )
    }
}
