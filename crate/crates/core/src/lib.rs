pub mod calendar;
pub mod corpus;
pub mod distant_labels;
pub mod error;
pub mod evaluate;
pub mod events;
pub mod features;
pub mod midat;
pub mod model_file;
pub mod multit;
pub mod normalizer;
pub mod pipeline;
pub mod synth;
pub mod tagset;

pub use error::{Error, Result};
pub use corpus::{Token, Tweet};
pub use distant_labels::Bag;
pub use events::EventRecord;
pub use multit::{RecognizerModel, TagSequence};
pub use normalizer::{NormalizerModel, Resolution};
pub use synth::SynthConfig;
pub use tagset::{SentenceLabel, Tag};
