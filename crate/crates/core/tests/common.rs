#![allow(dead_code)]

use rapidkit_core::corpus::{synthesize_corpus, CorpusEntry, NamingConvention, SynthOptions};
use rapidkit_core::transforms::TransformPolicy;

pub fn site() -> (NamingConvention, TransformPolicy) {
    (NamingConvention::new(Default::default()).expect("default convention"), TransformPolicy::default())
}

pub fn corpus(seed: u64, n: usize) -> Vec<CorpusEntry> {
    let (c, p) = site();
    synthesize_corpus(seed, n, &c, &p, &SynthOptions::default()).expect("synthesis")
}

pub fn departs_home(entry: &CorpusEntry, policy: &TransformPolicy, convention: &NamingConvention) -> bool {
    entry.routine.instructions.first().is_some_and(|i| policy.targets_home(i, convention))
}

pub fn returns_home(entry: &CorpusEntry, policy: &TransformPolicy, convention: &NamingConvention) -> bool {
    entry.routine.instructions.last().is_some_and(|i| policy.targets_home(i, convention))
}
