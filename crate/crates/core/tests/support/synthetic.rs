//! Seeded random clause fixtures: scored utterances with arbitrary center
//! and anchored values, lengths, pronoun flags and arrangements, built
//! directly so the ordering stages can be cross-checked against the oracle.

use rand::prelude::*;

use discourse_planner::model::{
    cf_rank, Constituent, Construction, Determiner, EntityId, NounPhrase, Number, PronounClass,
    Role, Utterance,
};
use discourse_planner::scorer::{
    Contribution, ScoredDocument, ScoredNp, ScoredUtterance, Transition, ValueRule,
};

fn noun_phrase(id: String, words: Vec<String>, pronoun: bool) -> NounPhrase {
    let head_lemma = words.last().unwrap().to_lowercase();
    NounPhrase {
        id: EntityId::new(id),
        head_lemma,
        number: Number::Plural,
        determiner: Determiner::Bare,
        pronoun: if pronoun {
            PronounClass::Personal
        } else {
            PronounClass::None
        },
        construction: Construction::None,
        genitive: None,
        antecedent: None,
        words,
    }
}

fn synthetic_utterance(rng: &mut StdRng, doc: usize, index: usize) -> ScoredUtterance {
    let mut roles = vec![Role::V];
    if rng.gen_bool(0.85) {
        roles.push(Role::S);
    }
    if rng.gen_bool(0.7) {
        roles.push(Role::O);
    }
    for _ in 0..*[0usize, 1, 1, 2].choose(rng).unwrap() {
        roles.push(Role::X);
    }
    roles.shuffle(rng);

    let vocabulary = ["cats", "mice", "stones", "rooks", "maps", "tunes"];
    let mut constituents = Vec::new();
    for (position, &role) in roles.iter().enumerate() {
        let np = if role == Role::V {
            None
        } else if rng.gen_bool(0.85) {
            let id = format!("d{doc}.u{index}.{position}");
            let pronoun = role != Role::X && rng.gen_bool(0.3);
            let words: Vec<String> = if pronoun {
                if role == Role::S && rng.gen_bool(0.15) {
                    vec!["we".to_string()]
                } else if role == Role::S && rng.gen_bool(0.15) {
                    vec!["only".to_string(), "they".to_string()]
                } else {
                    vec!["they".to_string()]
                }
            } else {
                vec![vocabulary.choose(rng).unwrap().to_string()]
            };
            Some(noun_phrase(id, words, pronoun))
        } else {
            None
        };
        constituents.push(Constituent {
            role,
            source_role: role,
            np,
            source_position: position,
            target_length: Some(rng.gen_range(1..=4)),
            omitted: false,
        });
    }

    let utterance = Utterance {
        index,
        text: format!("synthetic d{doc} u{index}"),
        constituents,
    };

    let scored: Vec<ScoredNp> = utterance
        .constituents
        .iter()
        .filter(|c| c.np.is_some())
        .map(|c| {
            let value = rng.gen_range(-1..=3);
            ScoredNp {
                position: c.source_position,
                value,
                anchored_value: rng.gen_range(0..=3),
                derivation: vec![Contribution {
                    rule: ValueRule::Non2,
                    amount: value,
                }],
                resolved_antecedent: None,
                entity: c.np.as_ref().unwrap().id.clone(),
                component_entities: Vec::new(),
            }
        })
        .collect();

    let mut cf: Vec<usize> = (0..scored.len()).collect();
    cf.sort_by_key(|&i| {
        let c = utterance
            .constituents
            .iter()
            .find(|c| c.source_position == scored[i].position)
            .unwrap();
        cf_rank(c).unwrap()
    });

    let transition = *[
        Transition::Initial,
        Transition::Continuing,
        Transition::Shifting,
    ]
    .choose(rng)
    .unwrap();

    ScoredUtterance {
        utterance,
        scored,
        cf,
        cb: None,
        discrete_center: None,
        transition,
    }
}

/// A document of one to three synthetic utterances. Consecutive subjects
/// sometimes share an entity so the coreference-driven preprocessing row
/// gets exercised.
pub fn synthetic_document(rng: &mut StdRng, doc: usize) -> ScoredDocument {
    let n = rng.gen_range(1..=3);
    let mut utterances: Vec<ScoredUtterance> =
        (0..n).map(|i| synthetic_utterance(rng, doc, i)).collect();

    for i in 1..utterances.len() {
        if rng.gen_bool(0.3) {
            let prev_entity = utterances[i - 1].utterance.source_subject().and_then(|c| {
                let p = c.source_position;
                utterances[i - 1].scored_at(p).map(|s| s.entity.clone())
            });
            if let Some(entity) = prev_entity {
                let position = utterances[i]
                    .utterance
                    .source_subject()
                    .map(|c| c.source_position);
                if let Some(position) = position {
                    for s in &mut utterances[i].scored {
                        if s.position == position {
                            s.entity = entity.clone();
                        }
                    }
                }
            }
        }
    }

    ScoredDocument {
        id: format!("synthetic-{doc}"),
        utterances,
    }
}
