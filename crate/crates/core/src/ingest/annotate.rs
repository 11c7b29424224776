//! Best-effort annotator for a restricted English fragment, so simple
//! clause-per-line text can be turned into an annotated document for demos
//! and fixtures. Hand annotation always overrides its output.
//!
//! Covered: simple clauses with one finite verb group, noun phrases built
//! from closed-class determiners and nouns, possessives, `'s` genitives,
//! the cleft frame (`It was ... who ...`), fronting before a comma, prompt
//! phrases, and the pronoun lists. Words are whitespace tokens; hyphenated
//! or multiword proper names are not recognized.

use thiserror::Error;

use crate::lexicon::Lexicon;
use crate::model::{
    Construction, Determiner, Document, EntityId, GenitiveParts, NounPhrase, PronounClass, Role,
    Utterance,
};

#[derive(Debug, Error, PartialEq)]
pub enum AnnotateError {
    #[error("line {line}: no detectable verb group in '{text}'")]
    NoVerbGroup { line: usize, text: String },
}

const AUXILIARIES: &[&str] = &[
    "am", "is", "are", "was", "were", "be", "been", "being", "do", "does", "did", "has", "have",
    "had", "will", "would", "shall", "should", "can", "could", "may", "might", "must",
];

const COMMON_VERBS: &[&str] = &[
    "come", "comes", "came", "like", "likes", "liked", "know", "knows", "knew", "see", "sees",
    "saw", "go", "goes", "went", "eat", "eats", "ate", "give", "gives", "gave", "take", "takes",
    "took", "run", "runs", "ran", "sleep", "sleeps", "slept",
];

const QUANTIFIERS: &[&str] = &[
    "many", "some", "few", "several", "all", "most", "both", "each", "every", "no",
];

const PREPOSITIONS: &[&str] = &[
    "by", "in", "on", "at", "with", "for", "to", "of", "from", "about", "into", "through",
];

/// Single-word predicative complements the demo fragment treats as
/// phrase-less adjuncts rather than objects.
const PREDICATIVE_ADJECTIVES: &[&str] = &[
    "thorough",
    "convincing",
    "impressed",
    "good",
    "bad",
    "happy",
    "sad",
    "tall",
    "short",
    "ready",
    "sound",
];

fn lower(token: &str) -> String {
    token.to_lowercase()
}

fn is_aux(token: &str) -> bool {
    let t = lower(token);
    AUXILIARIES.contains(&t.as_str()) || t.ends_with("n't")
}

fn is_verbish(token: &str, position: usize) -> bool {
    let t = lower(token);
    if is_aux(&t) || COMMON_VERBS.contains(&t.as_str()) {
        return true;
    }
    position > 0 && t.len() > 3 && t.ends_with("ed")
}

struct NpBuilder<'a> {
    lexicon: &'a Lexicon,
    utterance: usize,
    position: usize,
}

impl NpBuilder<'_> {
    fn id(&self) -> String {
        format!("u{}.{}", self.utterance, self.position)
    }

    fn head_lemma(word: &str) -> String {
        let mut lemma = lower(word);
        for suffix in ["'s", "\u{2019}s", "'", "\u{2019}"] {
            if let Some(stripped) = lemma.strip_suffix(suffix) {
                lemma = stripped.to_string();
                break;
            }
        }
        lemma
    }

    fn pronoun_number(word: &str) -> crate::model::Number {
        match word {
            "we" | "they" | "you" | "these" | "those" => crate::model::Number::Plural,
            _ => crate::model::Number::Singular,
        }
    }

    fn build(&self, words: &[String], construction: Construction) -> NounPhrase {
        let first = lower(&words[0]);
        let single = words.len() == 1;

        let pronoun = if single && self.lexicon.personal_pronouns.contains(&first) {
            PronounClass::Personal
        } else if single && self.lexicon.demonstrative_pronouns.contains(&first) {
            PronounClass::Demonstrative
        } else {
            PronounClass::None
        };

        let determiner = if pronoun != PronounClass::None {
            Determiner::Bare
        } else if self.lexicon.indefinite_markers.contains(&first) {
            Determiner::Indefinite
        } else if self.lexicon.possessive_markers.contains(&first) {
            Determiner::Possessive
        } else if self.lexicon.demonstrative_pronouns.contains(&first) && !single {
            Determiner::Demonstrative
        } else if self.lexicon.definite_markers.contains(&first) {
            Determiner::Definite
        } else if QUANTIFIERS.contains(&first.as_str()) {
            Determiner::Quantifier
        } else {
            Determiner::Bare
        };

        // A genitive splits at the possessive-marked token, provided a head
        // remains on each side.
        let genitive_split = (pronoun == PronounClass::None)
            .then(|| {
                words.iter().position(|w| {
                    let t = lower(w);
                    t.ends_with("'s")
                        || t.ends_with('\'')
                        || t.ends_with("\u{2019}s")
                        || t.ends_with('\u{2019}')
                })
            })
            .flatten()
            .filter(|&i| i + 1 < words.len());

        let head_word = words.last().unwrap();
        let head_lemma = if pronoun != PronounClass::None {
            first.clone()
        } else {
            Self::head_lemma(head_word)
        };
        let number = if pronoun != PronounClass::None {
            Self::pronoun_number(&first)
        } else if head_lemma.ends_with('s') && !head_lemma.ends_with("ss") {
            crate::model::Number::Plural
        } else {
            crate::model::Number::Singular
        };

        let id = self.id();
        let genitive = genitive_split.map(|split| {
            let possessor_words: Vec<String> = words[..=split].to_vec();
            let possessed_words: Vec<String> = words[split + 1..].to_vec();
            let possessor_lemma =
                Self::head_lemma(&possessor_words[split.min(possessor_words.len() - 1)]);
            let possessed_lemma = Self::head_lemma(possessed_words.last().unwrap());
            Box::new(GenitiveParts {
                possessor: NounPhrase {
                    id: EntityId::new(format!("{id}.possessor")),
                    head_lemma: possessor_lemma.clone(),
                    number: if possessor_lemma.ends_with('s') {
                        crate::model::Number::Plural
                    } else {
                        crate::model::Number::Singular
                    },
                    words: possessor_words,
                    determiner: Determiner::Bare,
                    pronoun: PronounClass::None,
                    construction: Construction::None,
                    genitive: None,
                    antecedent: None,
                },
                possessed: NounPhrase {
                    id: EntityId::new(format!("{id}.possessed")),
                    head_lemma: possessed_lemma.clone(),
                    number: if possessed_lemma.ends_with('s') {
                        crate::model::Number::Plural
                    } else {
                        crate::model::Number::Singular
                    },
                    words: possessed_words,
                    determiner: Determiner::Bare,
                    pronoun: PronounClass::None,
                    construction: Construction::None,
                    genitive: None,
                    antecedent: None,
                },
            })
        });

        NounPhrase {
            id: EntityId::new(id),
            words: words.to_vec(),
            head_lemma,
            number,
            determiner,
            pronoun,
            construction,
            genitive,
            antecedent: None,
        }
    }
}

struct PendingConstituent {
    role: Role,
    words: Vec<String>,
    construction: Construction,
    nominal: bool,
}

fn strip_token(token: &str) -> String {
    token.trim_end_matches(['.', '!', '?', ',']).to_string()
}

/// Splits post-verbal tokens into chunks: everything before the first
/// preposition is the object slot, each preposition opens a fresh adjunct
/// chunk (the preposition itself is a marker, not part of the phrase).
fn chunk_postverbal(tokens: &[String]) -> Vec<(Role, Vec<String>)> {
    let mut chunks: Vec<(Role, Vec<String>)> = Vec::new();
    let mut current: Vec<String> = Vec::new();
    let mut current_role = Role::O;
    for token in tokens {
        if PREPOSITIONS.contains(&lower(token).as_str()) {
            if !current.is_empty() {
                chunks.push((current_role, std::mem::take(&mut current)));
            }
            current_role = Role::X;
        } else {
            current.push(token.clone());
        }
    }
    if !current.is_empty() {
        chunks.push((current_role, current));
    }
    chunks
}

/// Annotates clause-per-line plain text. Output is advisory: roles are
/// assigned positionally (preverbal phrase is the subject, the first
/// postverbal phrase the object, the rest adjuncts).
pub fn annotate_demo(text: &str, lexicon: &Lexicon) -> Result<Document, AnnotateError> {
    let mut utterances = Vec::new();
    for raw_line in text.lines() {
        let line_no = utterances.len() + 1;
        let trimmed = raw_line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let utterance_index = utterances.len();
        let mut pending: Vec<PendingConstituent> = Vec::new();

        let lower_line = trimmed.to_lowercase();
        let mut rest = trimmed.to_string();

        // Prompt phrases introduce the center before a comma.
        let mut prompted: Option<Vec<String>> = None;
        for prompt in &lexicon.prompts {
            let prefix = format!("{prompt} ");
            if lower_line.starts_with(&prefix) {
                if let Some(comma) = rest.find(',') {
                    let phrase = rest[prompt.len()..comma].trim().to_string();
                    prompted = Some(phrase.split_whitespace().map(strip_token).collect());
                    rest = rest[comma + 1..].trim().to_string();
                }
                break;
            }
        }
        if let Some(words) = prompted {
            pending.push(PendingConstituent {
                role: Role::X,
                words,
                construction: Construction::Prompted,
                nominal: true,
            });
        }

        let tokens: Vec<String> = rest.split_whitespace().map(strip_token).collect();

        // Cleft frame: a formal subject slot with the center after the
        // copula.
        let cleft = pending.is_empty()
            && tokens.len() >= 4
            && lower(&tokens[0]) == "it"
            && matches!(lower(&tokens[1]).as_str(), "was" | "is")
            && tokens
                .iter()
                .skip(3)
                .any(|t| matches!(lower(t).as_str(), "that" | "who"));
        let (mut subject_chunk, clause_tokens): (Option<PendingConstituent>, Vec<String>) = if cleft
        {
            let marker = tokens
                .iter()
                .position(|t| matches!(lower(t).as_str(), "that" | "who"))
                .unwrap();
            let focus: Vec<String> = tokens[2..marker].to_vec();
            (
                Some(PendingConstituent {
                    role: Role::S,
                    words: focus,
                    construction: Construction::Cleft,
                    nominal: true,
                }),
                tokens[marker + 1..].to_vec(),
            )
        } else if pending.is_empty() && rest.contains(',') {
            // Fronting: a verbless phrase before the comma is a fronted
            // object.
            let comma_at = rest.find(',').unwrap();
            let before: Vec<String> = rest[..comma_at]
                .split_whitespace()
                .map(strip_token)
                .collect();
            if !before.is_empty() && !before.iter().enumerate().any(|(i, t)| is_verbish(t, i + 1)) {
                pending.push(PendingConstituent {
                    role: Role::O,
                    words: before,
                    construction: Construction::Fronted,
                    nominal: true,
                });
                (
                    None,
                    rest[comma_at + 1..]
                        .split_whitespace()
                        .map(strip_token)
                        .collect(),
                )
            } else {
                (None, tokens)
            }
        } else {
            (None, tokens)
        };

        // Locate the finite verb group.
        let verb_start = clause_tokens
            .iter()
            .enumerate()
            .position(|(i, t)| is_verbish(t, i));
        let Some(verb_start) = verb_start else {
            return Err(AnnotateError::NoVerbGroup {
                line: line_no,
                text: trimmed.to_string(),
            });
        };
        let mut verb_end = verb_start + 1;
        if is_aux(&clause_tokens[verb_start]) {
            while verb_end < clause_tokens.len() {
                let t = lower(&clause_tokens[verb_end]);
                let participle = t.len() > 3 && (t.ends_with("ed") || t.ends_with("en"));
                if t == "not" || participle || COMMON_VERBS.contains(&t.as_str()) {
                    verb_end += 1;
                } else {
                    break;
                }
            }
        }

        if subject_chunk.is_none() && verb_start > 0 {
            subject_chunk = Some(PendingConstituent {
                role: Role::S,
                words: clause_tokens[..verb_start].to_vec(),
                construction: Construction::None,
                nominal: true,
            });
        }
        if let Some(subject) = subject_chunk {
            pending.push(subject);
        }
        pending.push(PendingConstituent {
            role: Role::V,
            words: clause_tokens[verb_start..verb_end].to_vec(),
            construction: Construction::None,
            nominal: false,
        });

        let has_object_already = pending.iter().any(|p| p.role == Role::O);
        for (role, words) in chunk_postverbal(&clause_tokens[verb_end..]) {
            let adjective =
                words.len() == 1 && PREDICATIVE_ADJECTIVES.contains(&lower(&words[0]).as_str());
            let role = if adjective || (role == Role::O && has_object_already) {
                Role::X
            } else {
                role
            };
            pending.push(PendingConstituent {
                role,
                words,
                construction: Construction::None,
                nominal: !adjective,
            });
        }

        let constituents = pending
            .into_iter()
            .enumerate()
            .map(|(position, p)| {
                let builder = NpBuilder {
                    lexicon,
                    utterance: utterance_index,
                    position,
                };
                let np = (p.nominal && p.role != Role::V)
                    .then(|| builder.build(&p.words, p.construction));
                crate::model::Constituent {
                    role: p.role,
                    source_role: p.role,
                    np,
                    source_position: position,
                    target_length: None,
                    omitted: false,
                }
            })
            .collect();

        utterances.push(Utterance {
            index: utterance_index,
            text: trimmed.to_string(),
            constituents,
        });
    }

    Ok(Document {
        id: "annotated".to_string(),
        utterances,
    })
}
