//! Bundled datasets, addressable as `builtin:<name>`.

pub const TBS_SENTENCES: &str = include_str!("../data/tbs_sentences.csv");
pub const TBS_ENDED: &str = include_str!("../data/tbs_ended.csv");

pub const NAMES: [&str; 2] = ["tbs-sentences", "tbs-ended"];

pub fn builtin(name: &str) -> Option<&'static str> {
    match name {
        "tbs-sentences" => Some(TBS_SENTENCES),
        "tbs-ended" => Some(TBS_ENDED),
        _ => None,
    }
}
