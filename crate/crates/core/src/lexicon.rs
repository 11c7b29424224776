//! Closed-class word lists and synonym sets used for reiteration detection
//! and by the demo annotator.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use thiserror::Error;

/// Immutable lexicon: synonym sets plus the closed-class word lists.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    /// Disjoint sets of lowercase lemmas; every lemma belongs to at most one.
    pub synsets: Vec<BTreeSet<String>>,
    pub prompts: Vec<String>,
    pub personal_pronouns: BTreeSet<String>,
    pub demonstrative_pronouns: BTreeSet<String>,
    pub definite_markers: BTreeSet<String>,
    pub indefinite_markers: BTreeSet<String>,
    pub possessive_markers: BTreeSet<String>,
}

fn word_set(words: &[&str]) -> BTreeSet<String> {
    words.iter().map(|w| w.to_string()).collect()
}

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon {
            synsets: Vec::new(),
            prompts: vec![
                "as for".to_string(),
                "concerning".to_string(),
                "with regard to".to_string(),
            ],
            personal_pronouns: word_set(&["i", "you", "it", "he", "she", "we", "they"]),
            demonstrative_pronouns: word_set(&["this", "that", "these", "those"]),
            definite_markers: word_set(&["the", "such", "this", "that", "these", "those"]),
            indefinite_markers: word_set(&["a", "an", "another", "other"]),
            possessive_markers: word_set(&["its", "his", "her", "our", "your", "their"]),
        }
    }
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read lexicon file '{path}': {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("lexicon line {line}: {message}")]
    Malformed { line: usize, message: String },
}

impl Lexicon {
    /// Adds one synset, unioning it with any existing sets it overlaps so
    /// that each lemma stays in exactly one set.
    pub fn add_synset(&mut self, lemmas: impl IntoIterator<Item = String>) {
        let mut merged: BTreeSet<String> = lemmas.into_iter().map(|l| l.to_lowercase()).collect();
        if merged.is_empty() {
            return;
        }
        let mut remaining = Vec::with_capacity(self.synsets.len());
        for set in self.synsets.drain(..) {
            if set.intersection(&merged).next().is_some() {
                merged.extend(set);
            } else {
                remaining.push(set);
            }
        }
        remaining.push(merged);
        self.synsets = remaining;
    }

    /// Synset containing the lemma, if any.
    pub fn synset_of(&self, lemma: &str) -> Option<&BTreeSet<String>> {
        let needle = lemma.to_lowercase();
        self.synsets.iter().find(|s| s.contains(&needle))
    }

    /// All lemmas synonymous with `lemma`, including itself when registered.
    pub fn synonyms(&self, lemma: &str) -> BTreeSet<String> {
        self.synset_of(lemma).cloned().unwrap_or_default()
    }
}

/// Loads the built-in defaults merged with synsets from the given file.
/// The file is plain UTF-8 text: one synset per line, lemmas separated by
/// commas, `#` starting a comment line, blank lines ignored.
pub fn load_lexicon(path: Option<&Path>) -> Result<Lexicon, LexiconError> {
    let mut lexicon = Lexicon::default();
    let Some(path) = path else {
        return Ok(lexicon);
    };
    let raw = fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.display().to_string(),
        source,
    })?;
    for (i, line) in raw.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut lemmas = Vec::new();
        for piece in trimmed.split(',') {
            let lemma = piece.trim();
            if lemma.is_empty() {
                return Err(LexiconError::Malformed {
                    line: line_no,
                    message: "empty lemma".into(),
                });
            }
            if lemma.contains(char::is_whitespace) {
                return Err(LexiconError::Malformed {
                    line: line_no,
                    message: format!("lemma '{lemma}' contains whitespace"),
                });
            }
            lemmas.push(lemma.to_lowercase());
        }
        lexicon.add_synset(lemmas);
    }
    Ok(lexicon)
}

/// True when the two lemmas are the same word (case-insensitive) or share a
/// synset. Reflexive and symmetric; transitive within one synset.
pub fn same_lexeme(a: &str, b: &str, lexicon: &Lexicon) -> bool {
    if a.eq_ignore_ascii_case(b) {
        return true;
    }
    let (a, b) = (a.to_lowercase(), b.to_lowercase());
    if a == b {
        return true;
    }
    lexicon.synset_of(&a).is_some_and(|set| set.contains(&b))
}
