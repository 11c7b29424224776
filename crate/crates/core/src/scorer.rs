//! Graded center values for noun phrases, pronoun resolution, reiteration
//! with referential-distance limits, Cf/Cb computation and transition
//! classification.
//!
//! Every noun phrase receives an integer center value between -1 and 3. The
//! highest derivable value wins: center-pointing constructions and resolved
//! personal pronouns score 3, resolved demonstratives 2, and ordinary
//! nominals compose a base value (-1 for indefinites, 0 otherwise) with
//! increments for reiteration (+1), definite or demonstrative determiners
//! (+1) and possessive determiners (+2). Genitive phrases sum their parts;
//! each part earns its own reiteration credit while the determiner credit is
//! counted once for the whole phrase.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::lexicon::{same_lexeme, Lexicon};
use crate::model::{
    cf_rank, Config, Constituent, Determiner, Document, EntityId, NounPhrase, PronounClass, Role,
    Utterance,
};

/// Rules of the center-value table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ValueRule {
    Point1,
    Point2,
    Point3,
    Pron1,
    Pron2,
    Non1,
    Non2,
    Comp1,
    Comp2,
    Comp3,
    Comp4,
}

impl fmt::Display for ValueRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ValueRule::Point1 => "Point.1",
            ValueRule::Point2 => "Point.2",
            ValueRule::Point3 => "Point.3",
            ValueRule::Pron1 => "Pron.1",
            ValueRule::Pron2 => "Pron.2",
            ValueRule::Non1 => "Non.1",
            ValueRule::Non2 => "Non.2",
            ValueRule::Comp1 => "Comp.1",
            ValueRule::Comp2 => "Comp.2",
            ValueRule::Comp3 => "Comp.3",
            ValueRule::Comp4 => "Comp.4",
        };
        f.write_str(s)
    }
}

/// One rule application inside a value derivation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Contribution {
    pub rule: ValueRule,
    pub amount: i32,
}

/// Scored noun phrase of one constituent.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredNp {
    /// Source position of the constituent carrying this phrase.
    pub position: usize,
    pub value: i32,
    /// Portion of the value contributed by backward-linking evidence:
    /// constructions, resolved pronouns, reiteration and definiteness.
    pub anchored_value: i32,
    /// Winning derivation; contributions sum to `value`.
    pub derivation: Vec<Contribution>,
    /// Explicit or resolved coreference target, with its utterance index.
    pub resolved_antecedent: Option<(EntityId, usize)>,
    /// Canonical entity this phrase realizes.
    pub entity: EntityId,
    /// Canonical entities realized by genitive parts, possessor first.
    pub component_entities: Vec<EntityId>,
}

impl ScoredNp {
    /// Every canonical entity this phrase makes available to later
    /// utterances.
    pub fn realized_entities(&self) -> impl Iterator<Item = &EntityId> {
        std::iter::once(&self.entity).chain(self.component_entities.iter())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transition {
    Initial,
    Continuing,
    Shifting,
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Transition::Initial => "Initial",
            Transition::Continuing => "Continuing",
            Transition::Shifting => "Shifting",
        })
    }
}

/// Per-utterance analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredUtterance {
    pub utterance: Utterance,
    /// One entry per noun-phrase-bearing constituent, in source order.
    pub scored: Vec<ScoredNp>,
    /// Indices into `scored`, ordered by Cf rank (highest first).
    pub cf: Vec<usize>,
    /// Backward-looking center: highest-Cf-ranked entity realized both here
    /// and in the previous utterance.
    pub cb: Option<EntityId>,
    /// Index into `scored` of the discrete center: the maximal value, ties
    /// broken by Cf rank.
    pub discrete_center: Option<usize>,
    pub transition: Transition,
}

impl ScoredUtterance {
    pub fn scored_at(&self, position: usize) -> Option<&ScoredNp> {
        self.scored.iter().find(|s| s.position == position)
    }

    /// Scored entry for the first constituent with the given target role.
    pub fn scored_for_target(&self, role: Role) -> Option<&ScoredNp> {
        let c = self.utterance.target_any(role)?;
        self.scored_at(c.source_position)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredDocument {
    pub id: String,
    pub utterances: Vec<ScoredUtterance>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ScoreError {
    #[error("utterance {index} scored out of sequence: history covers {have} utterances")]
    Sequencing { index: usize, have: usize },
}

/// Maximal referential distance, in clauses, for a referring expression:
/// the distance factor times the expression's word length (or its supplied
/// target length when the configuration says to use those).
pub fn referential_limit(np: &NounPhrase, cfg: &Config, constituent: &Constituent) -> u32 {
    let base = if cfg.use_target_lengths {
        constituent.target_length.unwrap_or_else(|| np.word_count())
    } else {
        np.word_count()
    };
    cfg.distance_factor * base.max(1)
}

fn limit_for(np: &NounPhrase, cfg: &Config, constituent: Option<&Constituent>) -> u32 {
    match constituent {
        Some(c) => referential_limit(np, cfg, c),
        None => cfg.distance_factor * np.word_count().max(1),
    }
}

/// Lemma pool entry available as a reiteration antecedent.
struct PoolEntry<'a> {
    lemma: &'a str,
    canonical: &'a EntityId,
    cf_class: u8,
    position: usize,
}

fn utterance_pool<'a>(scored: &'a ScoredUtterance) -> Vec<PoolEntry<'a>> {
    let mut pool = Vec::new();
    for c in &scored.utterance.constituents {
        let Some(np) = &c.np else { continue };
        let Some(entry) = scored.scored_at(c.source_position) else {
            continue;
        };
        let class = cf_rank(c).map(|k| k.class).unwrap_or(3);
        // Pronouns are not nominal antecedents for reiteration; their
        // entities still circulate through resolution.
        if !np.is_pronoun() {
            if let Some(gen) = &np.genitive {
                // Genitive parts are searchable on their own.
                if entry.component_entities.len() == 2 {
                    pool.push(PoolEntry {
                        lemma: &gen.possessor.head_lemma,
                        canonical: &entry.component_entities[0],
                        cf_class: class,
                        position: c.source_position,
                    });
                    pool.push(PoolEntry {
                        lemma: &gen.possessed.head_lemma,
                        canonical: &entry.component_entities[1],
                        cf_class: class,
                        position: c.source_position,
                    });
                }
            } else {
                pool.push(PoolEntry {
                    lemma: &np.head_lemma,
                    canonical: &entry.entity,
                    cf_class: class,
                    position: c.source_position,
                });
            }
        }
    }
    pool.sort_by_key(|e| (e.cf_class, e.position));
    pool
}

fn find_reiteration_inner(
    np: &NounPhrase,
    utt_index: usize,
    history: &[ScoredUtterance],
    lexicon: &Lexicon,
    cfg: &Config,
    constituent: Option<&Constituent>,
) -> Option<(EntityId, u32)> {
    let limit = limit_for(np, cfg, constituent);
    for distance in 1..=limit {
        let Some(back) = utt_index.checked_sub(distance as usize) else {
            break;
        };
        let prior = &history[back];
        for entry in utterance_pool(prior) {
            if same_lexeme(&np.head_lemma, entry.lemma, lexicon) {
                return Some((entry.canonical.clone(), distance));
            }
        }
    }
    None
}

/// Nearest prior noun phrase whose head lemma matches under the lexicon,
/// provided its clause distance stays within the referential limit of the
/// expression. Returns the canonical entity and the distance in clauses.
pub fn find_reiteration(
    np: &NounPhrase,
    utt_index: usize,
    history: &[ScoredUtterance],
    lexicon: &Lexicon,
    cfg: &Config,
    constituent: &Constituent,
) -> Option<(EntityId, u32)> {
    find_reiteration_inner(np, utt_index, history, lexicon, cfg, Some(constituent))
}

/// Resolves a pronoun. An annotated antecedent wins outright; otherwise the
/// highest-Cf-ranked phrase of the immediately preceding utterance with
/// matching number is chosen, scanning further back (within the referential
/// limit) only when nothing there matches.
pub fn resolve_pronoun(
    np: &NounPhrase,
    utt_index: usize,
    history: &[ScoredUtterance],
    cfg: &Config,
    constituent: &Constituent,
) -> Option<(EntityId, usize)> {
    debug_assert!(np.is_pronoun());
    if let Some(ant) = &np.antecedent {
        return resolve_annotated(ant, history);
    }
    let limit = referential_limit(np, cfg, constituent);
    for distance in 1..=limit {
        let Some(back) = utt_index.checked_sub(distance as usize) else {
            break;
        };
        let prior = &history[back];
        for &idx in &prior.cf {
            let scored = &prior.scored[idx];
            let Some(c) = prior
                .utterance
                .constituents
                .iter()
                .find(|c| c.source_position == scored.position)
            else {
                continue;
            };
            let Some(candidate) = &c.np else { continue };
            if candidate.number == np.number {
                return Some((scored.entity.clone(), back));
            }
        }
    }
    None
}

fn resolve_annotated(ant: &EntityId, history: &[ScoredUtterance]) -> Option<(EntityId, usize)> {
    for prior in history.iter().rev() {
        for c in &prior.utterance.constituents {
            let Some(np) = &c.np else { continue };
            let scored = prior.scored_at(c.source_position);
            if np.id == *ant {
                return scored.map(|s| (s.entity.clone(), prior.utterance.index));
            }
            if let Some(gen) = &np.genitive {
                let scored = scored?;
                if gen.possessor.id == *ant && !scored.component_entities.is_empty() {
                    return Some((scored.component_entities[0].clone(), prior.utterance.index));
                }
                if gen.possessed.id == *ant && scored.component_entities.len() > 1 {
                    return Some((scored.component_entities[1].clone(), prior.utterance.index));
                }
            }
        }
    }
    None
}

/// One candidate derivation of a center value.
struct Derivation {
    contributions: Vec<Contribution>,
    resolved: Option<(EntityId, usize)>,
}

impl Derivation {
    fn total(&self) -> i32 {
        self.contributions.iter().map(|c| c.amount).sum()
    }
}

fn determiner_credit(det: Determiner) -> Option<Contribution> {
    match det {
        Determiner::Definite | Determiner::Demonstrative => Some(Contribution {
            rule: ValueRule::Comp2,
            amount: 1,
        }),
        Determiner::Possessive => Some(Contribution {
            rule: ValueRule::Comp3,
            amount: 2,
        }),
        _ => None,
    }
}

fn base_rule(det: Determiner) -> Contribution {
    if det == Determiner::Indefinite {
        Contribution {
            rule: ValueRule::Non1,
            amount: -1,
        }
    } else {
        Contribution {
            rule: ValueRule::Non2,
            amount: 0,
        }
    }
}

/// Base plus reiteration for one phrase (used directly for genitive parts,
/// which carry no determiner credit of their own).
fn part_score(
    np: &NounPhrase,
    utt_index: usize,
    history: &[ScoredUtterance],
    lexicon: &Lexicon,
    cfg: &Config,
) -> (Vec<Contribution>, Option<EntityId>) {
    let mut reit = Vec::new();
    let mut canonical = None;
    if let Some((entity, _)) = find_reiteration_inner(np, utt_index, history, lexicon, cfg, None) {
        reit.push(Contribution {
            rule: ValueRule::Comp1,
            amount: 1,
        });
        canonical = Some(entity);
    }
    (reit, canonical)
}

/// Computes the center value of one noun phrase: the maximum over all legal
/// derivations, with the full winning derivation recorded.
pub fn center_value(
    np: &NounPhrase,
    utt_index: usize,
    history: &[ScoredUtterance],
    lexicon: &Lexicon,
    cfg: &Config,
    constituent: &Constituent,
) -> ScoredNp {
    let canonical_of = |id: &EntityId| -> EntityId {
        canonical_map(history)
            .get(id)
            .cloned()
            .unwrap_or_else(|| id.clone())
    };

    let mut candidates: Vec<Derivation> = Vec::new();
    let mut entity = np
        .antecedent
        .as_ref()
        .map(canonical_of)
        .unwrap_or_else(|| np.id.clone());
    let mut components: Vec<EntityId> = Vec::new();
    let annotated = np
        .antecedent
        .as_ref()
        .and_then(|a| resolve_annotated(a, history));

    // Center-pointing constructions make further analysis unnecessary.
    if np.construction != crate::model::Construction::None {
        let rule = match np.construction {
            crate::model::Construction::Cleft => ValueRule::Point1,
            crate::model::Construction::Fronted => ValueRule::Point2,
            crate::model::Construction::Prompted => ValueRule::Point3,
            crate::model::Construction::None => unreachable!(),
        };
        candidates.push(Derivation {
            contributions: vec![Contribution { rule, amount: 3 }],
            resolved: annotated.clone(),
        });
    }

    if np.is_pronoun() {
        let resolution = resolve_pronoun(np, utt_index, history, cfg, constituent);
        let derivation = match (&resolution, np.pronoun) {
            (Some(_), PronounClass::Personal) => Derivation {
                contributions: vec![Contribution {
                    rule: ValueRule::Pron1,
                    amount: 3,
                }],
                resolved: resolution.clone(),
            },
            (Some(_), PronounClass::Demonstrative) => Derivation {
                contributions: vec![Contribution {
                    rule: ValueRule::Pron2,
                    amount: 2,
                }],
                resolved: resolution.clone(),
            },
            // Unresolved pronouns fall back to the neutral default.
            _ => Derivation {
                contributions: vec![Contribution {
                    rule: ValueRule::Non2,
                    amount: 0,
                }],
                resolved: None,
            },
        };
        if let Some((target, _)) = &derivation.resolved {
            entity = target.clone();
        }
        candidates.push(derivation);
    } else if let Some(gen) = &np.genitive {
        // Genitive phrases: part values plus one determiner credit for the
        // whole phrase.
        let mut contributions = Vec::new();
        if let Some(credit) = determiner_credit(np.determiner) {
            contributions.push(credit);
        }
        let (possessor_reit, possessor_entity) =
            part_score(&gen.possessor, utt_index, history, lexicon, cfg);
        let (possessed_reit, possessed_entity) =
            part_score(&gen.possessed, utt_index, history, lexicon, cfg);
        contributions.extend(possessor_reit);
        contributions.extend(possessed_reit);
        contributions.push(base_rule(gen.possessor.determiner));
        contributions.push(base_rule(gen.possessed.determiner));
        contributions.push(Contribution {
            rule: ValueRule::Comp4,
            amount: 0,
        });
        components = vec![
            possessor_entity.unwrap_or_else(|| gen.possessor.id.clone()),
            possessed_entity.unwrap_or_else(|| gen.possessed.id.clone()),
        ];
        candidates.push(Derivation {
            contributions,
            resolved: annotated.clone(),
        });
    } else {
        let mut contributions = Vec::new();
        if let Some(credit) = determiner_credit(np.determiner) {
            contributions.push(credit);
        }
        let reiteration = find_reiteration(np, utt_index, history, lexicon, cfg, constituent);
        if let Some((target, _)) = &reiteration {
            contributions.push(Contribution {
                rule: ValueRule::Comp1,
                amount: 1,
            });
            if np.antecedent.is_none() {
                entity = target.clone();
            }
        }
        contributions.push(base_rule(np.determiner));
        candidates.push(Derivation {
            contributions,
            resolved: annotated.clone(),
        });
    }

    // Highest possible value wins; earlier candidates (constructions, then
    // pronouns) win ties.
    let best = candidates
        .into_iter()
        .enumerate()
        .max_by(|(i, a), (j, b)| a.total().cmp(&b.total()).then(j.cmp(i)))
        .map(|(_, d)| d)
        .expect("at least one derivation");

    let anchored_value = best
        .contributions
        .iter()
        .filter(|c| {
            matches!(
                c.rule,
                ValueRule::Point1
                    | ValueRule::Point2
                    | ValueRule::Point3
                    | ValueRule::Pron1
                    | ValueRule::Pron2
                    | ValueRule::Comp1
                    | ValueRule::Comp2
            )
        })
        .map(|c| c.amount)
        .sum::<i32>()
        .max(0);

    ScoredNp {
        position: constituent.source_position,
        value: best.total(),
        anchored_value,
        resolved_antecedent: best.resolved,
        derivation: best.contributions,
        entity,
        component_entities: components,
    }
}

/// Maps every noun phrase id seen in the history to its canonical entity.
fn canonical_map(history: &[ScoredUtterance]) -> BTreeMap<EntityId, EntityId> {
    let mut map = BTreeMap::new();
    for scored in history {
        for c in &scored.utterance.constituents {
            let Some(np) = &c.np else { continue };
            let Some(entry) = scored.scored_at(c.source_position) else {
                continue;
            };
            map.insert(np.id.clone(), entry.entity.clone());
            if let Some(gen) = &np.genitive {
                if entry.component_entities.len() == 2 {
                    map.insert(
                        gen.possessor.id.clone(),
                        entry.component_entities[0].clone(),
                    );
                    map.insert(
                        gen.possessed.id.clone(),
                        entry.component_entities[1].clone(),
                    );
                }
            }
        }
    }
    map
}

/// Scores every noun phrase of an utterance and derives the Cf list, the
/// backward-looking center, the discrete center and the transition.
pub fn score_utterance(
    utterance: &Utterance,
    history: &[ScoredUtterance],
    lexicon: &Lexicon,
    cfg: &Config,
) -> Result<ScoredUtterance, ScoreError> {
    if history.len() != utterance.index {
        return Err(ScoreError::Sequencing {
            index: utterance.index,
            have: history.len(),
        });
    }

    let mut scored = Vec::new();
    for c in &utterance.constituents {
        if let Some(np) = &c.np {
            scored.push(center_value(np, utterance.index, history, lexicon, cfg, c));
        }
    }

    // Cf list: indices into `scored` ordered by Cf rank.
    let mut cf: Vec<usize> = (0..scored.len()).collect();
    cf.sort_by_key(|&i| {
        let c = utterance
            .constituents
            .iter()
            .find(|c| c.source_position == scored[i].position)
            .expect("scored entry has a constituent");
        cf_rank(c).expect("scored constituents carry noun phrases")
    });

    // Discrete center: maximal value, ties broken by Cf rank.
    let discrete_center = if cf.is_empty() {
        None
    } else {
        let best = scored.iter().map(|s| s.value).max().unwrap();
        cf.iter().copied().find(|&i| scored[i].value == best)
    };

    // Backward-looking center: highest-Cf-ranked entity realized in the
    // previous utterance as well.
    let cb = history.last().and_then(|prev| {
        let realized: BTreeSet<&EntityId> = prev
            .scored
            .iter()
            .flat_map(|s| s.realized_entities())
            .collect();
        cf.iter().find_map(|&i| {
            scored[i]
                .realized_entities()
                .find(|e| realized.contains(e))
                .cloned()
        })
    });

    let transition = if utterance.index == 0 {
        Transition::Initial
    } else {
        let prev_cb = history.last().and_then(|p| p.cb.as_ref());
        match (&cb, prev_cb) {
            (Some(now), Some(before)) if now == before => Transition::Continuing,
            (None, _) if history.iter().all(|p| p.cb.is_none()) => Transition::Initial,
            _ => Transition::Shifting,
        }
    };

    Ok(ScoredUtterance {
        utterance: utterance.clone(),
        scored,
        cf,
        cb,
        discrete_center,
        transition,
    })
}

/// Scores a whole document in utterance order.
pub fn score_document(
    doc: &Document,
    lexicon: &Lexicon,
    cfg: &Config,
) -> Result<ScoredDocument, ScoreError> {
    let mut utterances: Vec<ScoredUtterance> = Vec::with_capacity(doc.utterances.len());
    for utt in &doc.utterances {
        let scored = score_utterance(utt, &utterances, lexicon, cfg)?;
        utterances.push(scored);
    }
    Ok(ScoredDocument {
        id: doc.id.clone(),
        utterances,
    })
}
