//! Shared fixtures for the benchmarks.

use temport_core::multit::{train, TrainConfig};
use temport_core::normalizer::{train_normalizer, NormalizerConfig};
use temport_core::features::FeatureGroups;
use temport_core::pipeline::label_bags;
use temport_core::synth::generate;
use temport_core::{Bag, NormalizerModel, RecognizerModel, SynthConfig, Tweet};

pub struct Fixture {
    pub corpus: Vec<Tweet>,
    pub bags: Vec<Bag>,
    pub recognizer: RecognizerModel,
    pub normalizer: NormalizerModel,
}

/// A small synthetic corpus with quickly trained models.
pub fn fixture(n_tweets: usize) -> Fixture {
    let cfg = SynthConfig { n_tweets, n_events: n_tweets / 100, n_entities: 8, seed: 3, ..Default::default() };
    let out = generate(&cfg).expect("valid synth config");
    let bags = label_bags(&out.corpus, &out.events, 7, 1.0, 3);
    let tcfg = TrainConfig { epochs: 3, ..Default::default() };
    let recognizer = train(&bags, &tcfg).expect("bags").0;
    let normalizer = train_normalizer(&bags, &recognizer, &FeatureGroups::all(), &NormalizerConfig::default()).expect("bags");
    Fixture { corpus: out.corpus, bags, recognizer, normalizer }
}
