use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Honorifics dropped during preprocessing.
pub const DEFAULT_HONORIFICS: [&str; 10] = ["mr", "mrs", "ms", "dr", "shri", "smt", "sri", "prof", "sir", "ji"];

/// Minimum length a token must keep after its `ji` suffix is stemmed.
const JI_STEM_MIN_REMAINDER: usize = 4;

/// A surface name and its normalized token sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NormalizedName {
    pub raw: String,
    pub tokens: Vec<String>,
}

impl NormalizedName {
    pub fn first(&self) -> &str {
        &self.tokens[0]
    }

    pub fn last(&self) -> &str {
        self.tokens.last().expect("normalized names have at least one token")
    }

    /// Tokens joined without separators, the input to phonetic coding.
    pub fn concatenated(&self) -> String {
        self.tokens.concat()
    }

    pub fn joined(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Lowercases, strips possessives, punctuation and honorifics, and stems
/// the honorific `ji` suffix.
pub fn preprocess_name(raw: &str) -> Result<NormalizedName> {
    preprocess_with(raw, &DEFAULT_HONORIFICS)
}

pub fn preprocess_with(raw: &str, honorifics: &[&str]) -> Result<NormalizedName> {
    let lowered = raw.to_lowercase().replace(['\u{2019}', '\u{2018}', '`'], "'");
    let mut cleaned = String::with_capacity(lowered.len());
    for word in lowered.split_whitespace() {
        let word = word
            .strip_suffix("'s")
            .or_else(|| word.strip_suffix("'s.").or_else(|| word.strip_suffix("'s,")))
            .unwrap_or(word);
        for c in word.chars() {
            if c.is_alphanumeric() {
                cleaned.push(c);
            } else if matches!(c, '-' | '_' | '/') {
                cleaned.push(' ');
            }
        }
        cleaned.push(' ');
    }

    let tokens: Vec<String> = cleaned
        .split_whitespace()
        .filter(|t| !honorifics.contains(t))
        .map(|t| match t.strip_suffix("ji") {
            Some(stem) if stem.chars().count() >= JI_STEM_MIN_REMAINDER => stem.to_string(),
            _ => t.to_string(),
        })
        .collect();

    if tokens.is_empty() {
        return Err(Error::EmptyName(raw.to_string()));
    }
    Ok(NormalizedName {
        raw: raw.to_string(),
        tokens,
    })
}

/// Sorted set of the first characters of each token.
pub fn initials(name: &NormalizedName) -> BTreeSet<char> {
    name.tokens.iter().filter_map(|t| t.chars().next()).collect()
}
