//! SuccessRate, Frequency and Accuracy over an outcome matrix, mistake
//! breakdowns for inputs that never succeeded, and report rendering.
//!
//! All percentages are exact rationals; rounding to two decimals happens
//! only when rendering.

mod report;

pub use report::{compare_languages, LanguageComparison, MetricsReport, RunMeta, REPORT_VERSION};

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::inference::GenerationRecord;
use crate::prompts::Language;
use crate::transforms::TaskKind;
use crate::validator::MistakeKind;

/// Exact percentage.
pub type Percent = Ratio<u64>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("success rate of an empty row is undefined")]
    EmptyRow,
    #[error("outcome matrix rows must all have {expected} samples, row {row} has {found}")]
    Ragged { expected: usize, row: usize, found: usize },
    #[error("run is incomplete: input `{input_id}` has no record for sample {sample_index}")]
    IncompleteRun { input_id: String, sample_index: usize },
    #[error("record for unknown input `{0}`")]
    UnknownInput(String),
    #[error("sample index {sample_index} of `{input_id}` exceeds samples_per_input")]
    SampleOutOfRange { input_id: String, sample_index: usize },
}

/// Per-input sample correctness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeMatrix {
    pub task: TaskKind,
    pub language: Language,
    pub input_ids: Vec<String>,
    pub rows: Vec<Vec<bool>>,
}

impl OutcomeMatrix {
    pub fn new(
        task: TaskKind,
        language: Language,
        input_ids: Vec<String>,
        rows: Vec<Vec<bool>>,
    ) -> Result<Self, MetricsError> {
        let expected = rows.first().map_or(0, Vec::len);
        if let Some((row, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != expected) {
            return Err(MetricsError::Ragged { expected, row, found: r.len() });
        }
        if expected == 0 && !rows.is_empty() {
            return Err(MetricsError::EmptyRow);
        }
        assert_eq!(input_ids.len(), rows.len(), "one id per row");
        Ok(Self { task, language, input_ids, rows })
    }

    /// Builds the matrix from run records. A sample slot is correct when any
    /// of its attempts is correct.
    pub fn from_records(
        task: TaskKind,
        language: Language,
        input_ids: &[String],
        samples_per_input: usize,
        records: &[GenerationRecord],
    ) -> Result<Self, MetricsError> {
        let index: HashMap<&str, usize> = input_ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let mut seen = vec![vec![false; samples_per_input]; input_ids.len()];
        let mut rows = vec![vec![false; samples_per_input]; input_ids.len()];
        for r in records {
            let &i = index.get(r.input_id.as_str()).ok_or_else(|| MetricsError::UnknownInput(r.input_id.clone()))?;
            if r.sample_index >= samples_per_input {
                return Err(MetricsError::SampleOutOfRange {
                    input_id: r.input_id.clone(),
                    sample_index: r.sample_index,
                });
            }
            seen[i][r.sample_index] = true;
            rows[i][r.sample_index] |= r.correct;
        }
        for (i, row) in seen.iter().enumerate() {
            if let Some(s) = row.iter().position(|x| !x) {
                return Err(MetricsError::IncompleteRun { input_id: input_ids[i].clone(), sample_index: s });
            }
        }
        Self::new(task, language, input_ids.to_vec(), rows)
    }

    /// Matrix whose histogram is `counts`: `counts[k]` inputs with exactly
    /// `k` correct samples out of `counts.len() - 1`. Input ids are `in-<n>`.
    pub fn from_bucket_counts(task: TaskKind, language: Language, counts: &[usize]) -> Result<Self, MetricsError> {
        let samples = counts.len().checked_sub(1).filter(|s| *s > 0).ok_or(MetricsError::EmptyRow)?;
        let mut rows = Vec::new();
        for (k, &n) in counts.iter().enumerate() {
            for _ in 0..n {
                rows.push((0..samples).map(|s| s < k).collect());
            }
        }
        let ids = (0..rows.len()).map(|i| format!("in-{i:05}")).collect();
        Self::new(task, language, ids, rows)
    }

    pub fn samples_per_input(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Ids of inputs without any correct sample.
    pub fn zero_success_inputs(&self) -> BTreeSet<&str> {
        self.input_ids
            .iter()
            .zip(&self.rows)
            .filter(|(_, row)| !row.iter().any(|&b| b))
            .map(|(id, _)| id.as_str())
            .collect()
    }
}

/// Eq. 1: percentage of correct samples of one input.
pub fn success_rate(row: &[bool]) -> Result<Percent, MetricsError> {
    if row.is_empty() {
        return Err(MetricsError::EmptyRow);
    }
    let correct = row.iter().filter(|&&b| b).count() as u64;
    Ok(Ratio::new(100 * correct, row.len() as u64))
}

/// One bucket of the Eq. 2 histogram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bucket {
    /// Correct samples per input in this bucket.
    pub correct: usize,
    pub success_rate: Percent,
    pub inputs: usize,
}

/// Eq. 2: number of inputs at each achievable success rate, from 0% to
/// 100%. Buckets partition the inputs.
pub fn frequency(matrix: &OutcomeMatrix) -> Vec<Bucket> {
    let samples = matrix.samples_per_input();
    let mut counts = vec![0usize; samples + 1];
    for row in &matrix.rows {
        counts[row.iter().filter(|&&b| b).count()] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(correct, inputs)| Bucket {
            correct,
            success_rate: Ratio::new(100 * correct as u64, samples.max(1) as u64),
            inputs,
        })
        .collect()
}

/// Eq. 3: percentage of inputs with at least one correct sample.
pub fn accuracy(matrix: &OutcomeMatrix) -> Percent {
    if matrix.is_empty() {
        return Ratio::from_integer(0);
    }
    let ok = matrix.rows.iter().filter(|row| row.iter().any(|&b| b)).count() as u64;
    Ratio::new(100 * ok, matrix.len() as u64)
}

/// Share of inputs in a bucket, as a percentage.
pub fn bucket_share(bucket: &Bucket, total_inputs: usize) -> Percent {
    if total_inputs == 0 {
        return Ratio::from_integer(0);
    }
    Ratio::new(100 * bucket.inputs as u64, total_inputs as u64)
}

/// Renders with two decimals, rounding half away from zero.
pub fn render_percent(p: Percent) -> String {
    let num = u128::from(*p.numer()) * 100;
    let den = u128::from(*p.denom());
    let hundredths = (2 * num + den) / (2 * den);
    format!("{}.{:02}", hundredths / 100, hundredths % 100)
}

/// Breakdown of mistakes over inputs whose success rate is zero.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MistakeBreakdown {
    /// Samples showing each kind, divided by samples per input.
    pub kinds: BTreeMap<MistakeKind, Ratio<u64>>,
    /// Samples that could not be parsed, divided by samples per input.
    pub parse_failures: Ratio<u64>,
    /// Samples lost to endpoint errors, divided by samples per input.
    pub errors: Ratio<u64>,
}

/// Counts each mistake kind once per sample record of a zero-success
/// input and divides by the number of samples per input.
pub fn mistake_breakdown(
    matrix: &OutcomeMatrix,
    records: &[GenerationRecord],
) -> Result<MistakeBreakdown, MetricsError> {
    let samples = matrix.samples_per_input();
    if samples == 0 {
        return Ok(MistakeBreakdown::default());
    }
    let known: BTreeSet<&str> = matrix.input_ids.iter().map(String::as_str).collect();
    for r in records {
        if !known.contains(r.input_id.as_str()) {
            return Err(MetricsError::UnknownInput(r.input_id.clone()));
        }
    }
    let zero = matrix.zero_success_inputs();
    let mut kinds: BTreeMap<MistakeKind, u64> = BTreeMap::new();
    let (mut parse_failures, mut errors) = (0u64, 0u64);
    for r in records.iter().filter(|r| zero.contains(r.input_id.as_str())) {
        if r.error.is_some() {
            errors += 1;
        } else if r.parse_failure.is_some() {
            parse_failures += 1;
        }
        if let Some(report) = &r.report {
            let distinct: BTreeSet<MistakeKind> = report.kinds().into_iter().collect();
            for k in distinct {
                *kinds.entry(k).or_default() += 1;
            }
        }
    }
    let per = |n: u64| Ratio::new(n, samples as u64);
    Ok(MistakeBreakdown {
        kinds: kinds.into_iter().map(|(k, n)| (k, per(n))).collect(),
        parse_failures: per(parse_failures),
        errors: per(errors),
    })
}
