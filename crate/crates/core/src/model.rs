//! Shared data model: documents, utterances, constituents and noun phrase
//! annotations consumed by the scorer, the ordering engine and the readers.

use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// Grammatical function of a clause constituent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    S,
    V,
    O,
    X,
}

impl Role {
    pub fn letter(self) -> char {
        match self {
            Role::S => 'S',
            Role::V => 'V',
            Role::O => 'O',
            Role::X => 'X',
        }
    }

    pub fn from_letter(c: char) -> Option<Role> {
        match c {
            'S' => Some(Role::S),
            'V' => Some(Role::V),
            'O' => Some(Role::O),
            'X' => Some(Role::X),
            _ => None,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Renders a role sequence as compact letters, e.g. `SVO`.
pub fn render_order(order: &[Role]) -> String {
    order.iter().map(|r| r.letter()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Number {
    Singular,
    Plural,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Determiner {
    Definite,
    Indefinite,
    Demonstrative,
    Possessive,
    Quantifier,
    Bare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PronounClass {
    Personal,
    Demonstrative,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Construction {
    Cleft,
    Fronted,
    Prompted,
    None,
}

/// Identity token for a discourse entity. Two noun phrases denote the same
/// entity when their ids resolve to the same canonical id via antecedent
/// annotation, pronoun resolution or reiteration.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityId(pub String);

impl EntityId {
    pub fn new(id: impl Into<String>) -> Self {
        EntityId(id.into())
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Possessor/possessed pair of a genitive phrase. Single nesting level:
/// neither part may itself carry a genitive.
#[derive(Debug, Clone, PartialEq)]
pub struct GenitiveParts {
    pub possessor: NounPhrase,
    pub possessed: NounPhrase,
}

/// Annotated noun phrase.
#[derive(Debug, Clone, PartialEq)]
pub struct NounPhrase {
    pub id: EntityId,
    pub words: Vec<String>,
    pub head_lemma: String,
    pub number: Number,
    pub determiner: Determiner,
    pub pronoun: PronounClass,
    pub construction: Construction,
    pub genitive: Option<Box<GenitiveParts>>,
    pub antecedent: Option<EntityId>,
}

impl NounPhrase {
    pub fn word_count(&self) -> u32 {
        self.words.len() as u32
    }

    pub fn is_pronoun(&self) -> bool {
        self.pronoun != PronounClass::None
    }
}

/// One clause-level unit: a role, an optional noun phrase, and housekeeping
/// for ordering. `role` is the target-clause function used by the ordering
/// engine; `source_role` is the original function used for Cf ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct Constituent {
    pub role: Role,
    pub source_role: Role,
    pub np: Option<NounPhrase>,
    pub source_position: usize,
    pub target_length: Option<u32>,
    pub omitted: bool,
}

impl Constituent {
    /// Word length used by the ordering tables: the supplied target length
    /// when present, otherwise the English word count (verbs and other
    /// phrase-less constituents count as one word).
    pub fn length(&self) -> u32 {
        self.target_length
            .or_else(|| self.np.as_ref().map(NounPhrase::word_count))
            .unwrap_or(1)
    }

    pub fn is_pronominal(&self) -> bool {
        self.np.as_ref().is_some_and(NounPhrase::is_pronoun)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Utterance {
    pub index: usize,
    pub text: String,
    pub constituents: Vec<Constituent>,
}

impl Utterance {
    /// First non-omitted constituent carrying the given target role.
    pub fn target(&self, role: Role) -> Option<&Constituent> {
        self.constituents
            .iter()
            .find(|c| c.role == role && !c.omitted)
    }

    /// First constituent carrying the given target role, omitted or not.
    pub fn target_any(&self, role: Role) -> Option<&Constituent> {
        self.constituents.iter().find(|c| c.role == role)
    }

    /// The source-side subject, regardless of target role assignment.
    pub fn source_subject(&self) -> Option<&Constituent> {
        self.constituents.iter().find(|c| c.source_role == Role::S)
    }

    /// Target roles of non-omitted constituents in source order.
    pub fn realized_arrangement(&self) -> Vec<Role> {
        let mut cs: Vec<&Constituent> = self.constituents.iter().filter(|c| !c.omitted).collect();
        cs.sort_by_key(|c| c.source_position);
        cs.iter().map(|c| c.role).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub utterances: Vec<Utterance>,
}

/// Analysis configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    /// Linear factor relating referring-expression length to the maximal
    /// referential distance in clauses. 1 and 2 are the sensible settings;
    /// any positive value is accepted.
    pub distance_factor: u32,
    /// Measure referential distance with supplied target lengths instead of
    /// English word counts.
    pub use_target_lengths: bool,
    pub lexicon_path: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            distance_factor: 2,
            use_target_lengths: false,
            lexicon_path: None,
        }
    }
}

/// A broken invariant, reported as data rather than an error.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub utterance: Option<usize>,
    pub constituent: Option<usize>,
    pub invariant: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.utterance, self.constituent) {
            (Some(u), Some(c)) => write!(f, "utterance {u}, constituent {c}: {}", self.invariant),
            (Some(u), None) => write!(f, "utterance {u}: {}", self.invariant),
            _ => write!(f, "document: {}", self.invariant),
        }
    }
}

fn check_np(
    np: &NounPhrase,
    utt: usize,
    cons: usize,
    nested: bool,
    out: &mut Vec<Violation>,
    seen_ids: &mut Vec<EntityId>,
) {
    let mut push = |invariant: String| {
        out.push(Violation {
            utterance: Some(utt),
            constituent: Some(cons),
            invariant,
        })
    };
    if np.words.is_empty() {
        push(format!("noun phrase '{}' has no words", np.id));
    }
    if seen_ids.contains(&np.id) {
        push(format!("duplicate noun phrase id '{}'", np.id));
    }
    seen_ids.push(np.id.clone());
    if np.is_pronoun() {
        if np.determiner != Determiner::Bare {
            push(format!("pronoun '{}' carries a determiner class", np.id));
        }
        if np.genitive.is_some() {
            push(format!("pronoun '{}' carries genitive parts", np.id));
        }
    }
    if let Some(gen) = &np.genitive {
        if nested {
            push(format!("nested genitive inside '{}'", np.id));
        }
        if gen.possessor.genitive.is_some() || gen.possessed.genitive.is_some() {
            push(format!("genitive part of '{}' is itself genitive", np.id));
        }
        check_np(&gen.possessor, utt, cons, true, out, seen_ids);
        check_np(&gen.possessed, utt, cons, true, out, seen_ids);
    }
}

/// Walks every type invariant and returns the violations found. An empty
/// list means the document is well formed. Pure: the same document always
/// produces the same list.
pub fn validate_document(doc: &Document) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen_ids: Vec<EntityId> = Vec::new();

    for (u, utt) in doc.utterances.iter().enumerate() {
        if utt.index != u {
            out.push(Violation {
                utterance: Some(u),
                constituent: None,
                invariant: format!("utterance index {} out of sequence", utt.index),
            });
        }
        for side in [false, true] {
            for unique in [Role::S, Role::V, Role::O] {
                let n = utt
                    .constituents
                    .iter()
                    .filter(|c| if side { c.role } else { c.source_role } == unique)
                    .count();
                if n > 1 {
                    out.push(Violation {
                        utterance: Some(u),
                        constituent: None,
                        invariant: format!(
                            "duplicate role {unique} on the {} side",
                            if side { "target" } else { "source" }
                        ),
                    });
                }
            }
        }
        let mut positions: Vec<usize> =
            utt.constituents.iter().map(|c| c.source_position).collect();
        positions.sort_unstable();
        if positions != (0..utt.constituents.len()).collect::<Vec<_>>() {
            out.push(Violation {
                utterance: Some(u),
                constituent: None,
                invariant: "source positions are not distinct and contiguous from 0".into(),
            });
        }
        for (c, cons) in utt.constituents.iter().enumerate() {
            if cons.role == Role::V && cons.np.is_some() {
                out.push(Violation {
                    utterance: Some(u),
                    constituent: Some(c),
                    invariant: "verb constituent carries a noun phrase".into(),
                });
            }
            if cons.omitted {
                out.push(Violation {
                    utterance: Some(u),
                    constituent: Some(c),
                    invariant: "constituent marked omitted on ingest".into(),
                });
            }
            if cons.target_length == Some(0) {
                out.push(Violation {
                    utterance: Some(u),
                    constituent: Some(c),
                    invariant: "target length must be positive".into(),
                });
            }
            if let Some(np) = &cons.np {
                check_np(np, u, c, false, &mut out, &mut seen_ids);
            }
        }
    }

    // Antecedent references must point at an id declared in an earlier
    // utterance.
    let mut declared: Vec<EntityId> = Vec::new();
    for (u, utt) in doc.utterances.iter().enumerate() {
        for (c, cons) in utt.constituents.iter().enumerate() {
            let Some(np) = &cons.np else { continue };
            let mut check_antecedent = |np: &NounPhrase| {
                if let Some(ant) = &np.antecedent {
                    if !declared.contains(ant) {
                        out.push(Violation {
                            utterance: Some(u),
                            constituent: Some(c),
                            invariant: format!(
                                "antecedent '{ant}' not declared in an earlier utterance"
                            ),
                        });
                    }
                }
            };
            check_antecedent(np);
            if let Some(gen) = &np.genitive {
                check_antecedent(&gen.possessor);
                check_antecedent(&gen.possessed);
            }
        }
        for cons in &utt.constituents {
            if let Some(np) = &cons.np {
                declared.push(np.id.clone());
                if let Some(gen) = &np.genitive {
                    declared.push(gen.possessor.id.clone());
                    declared.push(gen.possessed.id.clone());
                }
            }
        }
    }

    out
}

/// Ranking key for a forward-looking center list. Lower keys rank higher:
/// subjects before objects before adjuncts, ties broken by source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct CfKey {
    pub class: u8,
    pub position: usize,
}

#[derive(Debug, Error, PartialEq)]
pub enum RankError {
    #[error("constituent at source position {0} has no noun phrase; rank undefined")]
    NoNounPhrase(usize),
}

/// Cf ranking over a noun-phrase-bearing constituent, based on its source
/// grammatical function.
pub fn cf_rank(constituent: &Constituent) -> Result<CfKey, RankError> {
    if constituent.np.is_none() {
        return Err(RankError::NoNounPhrase(constituent.source_position));
    }
    let class = match constituent.source_role {
        Role::S => 0,
        Role::O => 1,
        Role::X => 2,
        Role::V => return Err(RankError::NoNounPhrase(constituent.source_position)),
    };
    Ok(CfKey {
        class,
        position: constituent.source_position,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn np(id: &str, words: &[&str], lemma: &str) -> NounPhrase {
        NounPhrase {
            id: EntityId::new(id),
            words: words.iter().map(|w| w.to_string()).collect(),
            head_lemma: lemma.to_string(),
            number: Number::Plural,
            determiner: Determiner::Bare,
            pronoun: PronounClass::None,
            construction: Construction::None,
            genitive: None,
            antecedent: None,
        }
    }

    fn cons(role: Role, position: usize, np: Option<NounPhrase>) -> Constituent {
        Constituent {
            role,
            source_role: role,
            np,
            source_position: position,
            target_length: None,
            omitted: false,
        }
    }

    #[test]
    fn subject_outranks_object_regardless_of_position() {
        let s = cons(Role::S, 0, Some(np("a", &["the", "cats"], "cats")));
        let o = cons(Role::O, 2, Some(np("b", &["mice"], "mice")));
        assert!(cf_rank(&s).unwrap() < cf_rank(&o).unwrap());

        let o_first = cons(Role::O, 0, Some(np("c", &["mice"], "mice")));
        let s_later = cons(Role::S, 2, Some(np("d", &["cats"], "cats")));
        assert!(cf_rank(&s_later).unwrap() < cf_rank(&o_first).unwrap());
    }

    #[test]
    fn adjuncts_tie_break_on_position() {
        let x1 = cons(Role::X, 1, Some(np("a", &["here"], "here")));
        let x3 = cons(Role::X, 3, Some(np("b", &["there"], "there")));
        assert!(cf_rank(&x1).unwrap() < cf_rank(&x3).unwrap());
    }

    #[test]
    fn rank_undefined_without_noun_phrase() {
        let v = cons(Role::V, 1, None);
        assert_eq!(cf_rank(&v), Err(RankError::NoNounPhrase(1)));
    }

    #[test]
    fn cf_rank_is_a_strict_total_order_within_an_utterance() {
        let cs = [
            cons(Role::O, 0, Some(np("a", &["x"], "x"))),
            cons(Role::S, 1, Some(np("b", &["y"], "y"))),
            cons(Role::X, 2, Some(np("c", &["z"], "z"))),
            cons(Role::X, 3, Some(np("d", &["w"], "w"))),
        ];
        let keys: Vec<CfKey> = cs.iter().map(|c| cf_rank(c).unwrap()).collect();
        for (i, a) in keys.iter().enumerate() {
            for (j, b) in keys.iter().enumerate() {
                if i != j {
                    assert_ne!(a, b, "no ties allowed");
                    assert_eq!(a < b, !(b < a), "antisymmetry");
                }
            }
        }
        for a in &keys {
            for b in &keys {
                for c in &keys {
                    if a < b && b < c {
                        assert!(a < c, "transitivity");
                    }
                }
            }
        }
    }

    #[test]
    fn empty_document_is_valid() {
        let doc = Document {
            id: "empty".into(),
            utterances: vec![],
        };
        assert!(validate_document(&doc).is_empty());
    }

    #[test]
    fn duplicate_subject_is_reported() {
        let doc = Document {
            id: "dup".into(),
            utterances: vec![Utterance {
                index: 0,
                text: "bad".into(),
                constituents: vec![
                    cons(Role::S, 0, Some(np("a", &["cats"], "cats"))),
                    cons(Role::S, 1, Some(np("b", &["dogs"], "dogs"))),
                ],
            }],
        };
        let violations = validate_document(&doc);
        // Independent walk: count S roles directly and expect exactly the
        // duplicate-role findings (one per side, roles copied).
        let s_count = doc.utterances[0]
            .constituents
            .iter()
            .filter(|c| c.role == Role::S)
            .count();
        assert_eq!(s_count, 2);
        assert_eq!(violations.len(), 2);
        assert!(violations.iter().all(|v| v.utterance == Some(0)));
        assert!(violations[0].invariant.contains("duplicate role S"));
    }

    #[test]
    fn pronoun_with_determiner_is_reported() {
        let mut pron = np("p", &["they"], "they");
        pron.pronoun = PronounClass::Personal;
        pron.determiner = Determiner::Definite;
        let doc = Document {
            id: "d".into(),
            utterances: vec![Utterance {
                index: 0,
                text: "t".into(),
                constituents: vec![cons(Role::S, 0, Some(pron))],
            }],
        };
        let violations = validate_document(&doc);
        assert_eq!(violations.len(), 1);
        assert!(violations[0].invariant.contains("determiner"));
    }

    #[test]
    fn validation_is_deterministic() {
        let doc = Document {
            id: "dup".into(),
            utterances: vec![Utterance {
                index: 3,
                text: "bad".into(),
                constituents: vec![cons(Role::V, 0, Some(np("a", &[], "x")))],
            }],
        };
        let a = validate_document(&doc);
        let b = validate_document(&doc);
        assert_eq!(a, b);
        assert_eq!(
            a.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            b.iter().map(|v| v.to_string()).collect::<Vec<_>>()
        );
    }
}
