use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::CorpusEntry;
use crate::syntax::TargetExpr;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SplitError {
    #[error("cannot take {requested} prompt examples from {available} entries")]
    InsufficientEntries { requested: usize, available: usize },
}

/// Variant features a prompt set should cover: every instruction kind, HOME
/// departure and return, and offset targets.
pub fn coverage_features(entry: &CorpusEntry) -> BTreeSet<String> {
    let mut features: BTreeSet<String> = entry.routine.instructions.iter().map(|i| i.kind.to_string()).collect();
    let home = |c: &Option<String>| c.as_deref().is_some_and(|c| c.eq_ignore_ascii_case("HOME"));
    if home(&entry.routine.from_comment) {
        features.insert("home_departure".into());
    }
    if home(&entry.routine.to_comment) {
        features.insert("home_return".into());
    }
    if entry.routine.instructions.iter().any(|i| matches!(i.target, TargetExpr::OffsetCall { .. })) {
        features.insert("offset_target".into());
    }
    features
}

/// Splits into a prompt-example set and a test set. The prompt set is
/// chosen greedily to cover as many variant features as possible, with
/// ties broken by a seeded shuffle; the test set keeps the input order.
pub fn split_corpus(
    entries: &[CorpusEntry],
    n_prompt_examples: usize,
    seed: u64,
) -> Result<(Vec<CorpusEntry>, Vec<CorpusEntry>), SplitError> {
    if n_prompt_examples >= entries.len() && n_prompt_examples > 0 {
        return Err(SplitError::InsufficientEntries { requested: n_prompt_examples, available: entries.len() });
    }
    let mut order: Vec<usize> = (0..entries.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let features: Vec<BTreeSet<String>> = entries.iter().map(coverage_features).collect();

    let mut chosen: Vec<usize> = Vec::with_capacity(n_prompt_examples);
    let mut covered = BTreeSet::new();
    while chosen.len() < n_prompt_examples {
        let best = order
            .iter()
            .filter(|i| !chosen.contains(i))
            .map(|&i| (features[i].difference(&covered).count(), i))
            .fold(None, |best: Option<(usize, usize)>, cand| match best {
                Some(b) if b.0 >= cand.0 => Some(b),
                _ => Some(cand),
            });
        let Some((_, i)) = best else { break };
        covered.extend(features[i].iter().cloned());
        chosen.push(i);
    }
    let prompt = chosen.iter().map(|&i| entries[i].clone()).collect();
    let chosen: BTreeSet<usize> = chosen.into_iter().collect();
    let test = (0..entries.len()).filter(|i| !chosen.contains(i)).map(|i| entries[i].clone()).collect();
    Ok((prompt, test))
}
