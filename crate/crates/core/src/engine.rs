//! Three-stage constituent-order planner: the preprocessing table applies
//! once per utterance (subject omission, special constructions), the
//! preference table builds candidate orders, and the discrimination table
//! filters them. A permissive fallback guarantees at least one final order.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::model::{render_order, Role, Utterance};
use crate::patterns::{parse_pattern, satisfying_orders, unique_permutations, OrderPattern};
use crate::scorer::{ScoredDocument, ScoredUtterance, Transition};

/// Preference table rule identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PrefRule {
    I,
    Ii,
    Iii,
    Iiib,
    Iv,
    V,
    Vi,
    Vii,
    Viii,
    Ix,
    X,
    Xi,
    Xii,
    Xiii,
}

impl fmt::Display for PrefRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PrefRule::I => "Pref.i",
            PrefRule::Ii => "Pref.ii",
            PrefRule::Iii => "Pref.iii",
            PrefRule::Iiib => "Pref.iiib",
            PrefRule::Iv => "Pref.iv",
            PrefRule::V => "Pref.v",
            PrefRule::Vi => "Pref.vi",
            PrefRule::Vii => "Pref.vii",
            PrefRule::Viii => "Pref.viii",
            PrefRule::Ix => "Pref.ix",
            PrefRule::X => "Pref.x",
            PrefRule::Xi => "Pref.xi",
            PrefRule::Xii => "Pref.xii",
            PrefRule::Xiii => "Pref.xiii",
        };
        f.write_str(s)
    }
}

/// Discrimination table rule identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DiscrRule {
    I,
    Ii,
    Iii,
    Iv,
    V,
    Vi,
    Vii,
    Viii,
    Ix,
    X,
}

impl fmt::Display for DiscrRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DiscrRule::I => "Discr.i",
            DiscrRule::Ii => "Discr.ii",
            DiscrRule::Iii => "Discr.iii",
            DiscrRule::Iv => "Discr.iv",
            DiscrRule::V => "Discr.v",
            DiscrRule::Vi => "Discr.vi",
            DiscrRule::Vii => "Discr.vii",
            DiscrRule::Viii => "Discr.viii",
            DiscrRule::Ix => "Discr.ix",
            DiscrRule::X => "Discr.x",
        };
        f.write_str(s)
    }
}

/// Preprocessing table rule identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PreRule {
    I,
    Ii,
    Iii,
    Iv,
    V,
    Vi,
}

impl fmt::Display for PreRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PreRule::I => "Pre.i",
            PreRule::Ii => "Pre.ii",
            PreRule::Iii => "Pre.iii",
            PreRule::Iv => "Pre.iv",
            PreRule::V => "Pre.v",
            PreRule::Vi => "Pre.vi",
        };
        f.write_str(s)
    }
}

/// Effect of a preprocessing rule.
#[derive(Debug, Clone, PartialEq)]
pub enum PreEffect {
    /// 0-anaphora: suppress the surface subject.
    OmitSubject,
    /// Focus-binding particle placed immediately before the subject, with
    /// the subject kept right before the verb.
    FocusBinding { marker: String },
    /// Force the exact subject-object-verb order.
    ForceOrder,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessingEffect {
    pub rule: PreRule,
    pub effect: PreEffect,
}

impl fmt::Display for PreprocessingEffect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.effect {
            PreEffect::OmitSubject => write!(f, "{} S=[]", self.rule),
            PreEffect::FocusBinding { marker } => write!(f, "{} - '{marker}' SV-", self.rule),
            PreEffect::ForceOrder => write!(f, "{} SOV", self.rule),
        }
    }
}

/// A preference rule that fired, with its order constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct FiredPreference {
    pub rule: PrefRule,
    pub constraint: OrderPattern,
    pub prim: Option<Role>,
    /// Default rules are recorded but suppressed when any stronger rule
    /// fired; suppressed constraints do not restrict candidates.
    pub suppressed: bool,
}

/// Full derivation record for one utterance.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderPlan {
    pub utterance: usize,
    pub preprocessing: Vec<PreprocessingEffect>,
    pub preferences: Vec<FiredPreference>,
    /// Orders submitted to discrimination (all permutations when the
    /// constraint conjunction came up empty).
    pub candidates: Vec<Vec<Role>>,
    /// Excluded orders with the first discrimination rule that failed.
    pub exclusions: Vec<(Vec<Role>, DiscrRule)>,
    /// Discrimination rows that matched a surviving order and held.
    pub checked: Vec<(Vec<Role>, DiscrRule)>,
    pub final_orders: Vec<Vec<Role>>,
    pub fallback_used: bool,
}

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("utterance {0} already preprocessed; the preprocessing table applies once")]
    AlreadyPreprocessed(usize),
    #[error("utterance {index} out of sequence in scored document (position {position})")]
    Sequencing { index: usize, position: usize },
    #[error("pattern error in rule {rule}: {source}")]
    Pattern {
        rule: String,
        source: crate::patterns::PatternError,
    },
}

fn pattern(text: &str) -> OrderPattern {
    parse_pattern(text).expect("table patterns are well formed")
}

fn pron_target(utt: &Utterance, role: Role) -> bool {
    utt.target_any(role).is_some_and(|c| c.is_pronominal())
}

/// Center value of the first constituent with the given target role, when
/// it carries a noun phrase.
fn center_of_target(scored: &ScoredUtterance, role: Role) -> Option<i32> {
    scored.scored_for_target(role).map(|s| s.value)
}

/// Evaluates the preprocessing table. The 0-anaphora rows are tried top
/// down and at most the first holding row applies; the special-construction
/// rows likewise. Must run exactly once per utterance, before the other
/// tables.
pub fn preprocess(
    scored: &ScoredUtterance,
    prev: Option<&ScoredUtterance>,
) -> Result<Vec<PreprocessingEffect>, EngineError> {
    let utt = &scored.utterance;
    if utt.constituents.iter().any(|c| c.omitted) {
        return Err(EngineError::AlreadyPreprocessed(utt.index));
    }
    let mut effects = Vec::new();

    let subject = utt.target_any(Role::S);
    let pron_s = pron_target(utt, Role::S);
    let pron_o = pron_target(utt, Role::O);

    // 0-anaphora rows.
    let omit = if subject.is_none() {
        None
    } else if subject
        .and_then(|c| c.np.as_ref())
        .is_some_and(|np| np.head_lemma.eq_ignore_ascii_case("we"))
    {
        Some(PreRule::I)
    } else if pron_o && pron_s {
        Some(PreRule::Ii)
    } else if pron_s && subjects_corefer(scored, prev) {
        Some(PreRule::Iii)
    } else if scored.transition == Transition::Continuing {
        Some(PreRule::Iv)
    } else {
        None
    };
    if let Some(rule) = omit {
        effects.push(PreprocessingEffect {
            rule,
            effect: PreEffect::OmitSubject,
        });
    }

    // Special-construction rows.
    let focus_bound = pron_s
        && subject.and_then(|c| c.np.as_ref()).is_some_and(|np| {
            np.words
                .first()
                .is_some_and(|w| w.eq_ignore_ascii_case("only"))
        });
    if focus_bound {
        effects.push(PreprocessingEffect {
            rule: PreRule::V,
            effect: PreEffect::FocusBinding {
                marker: "tylko".to_string(),
            },
        });
    } else if utt.target_any(Role::X).is_none() && pron_o {
        effects.push(PreprocessingEffect {
            rule: PreRule::Vi,
            effect: PreEffect::ForceOrder,
        });
    }

    Ok(effects)
}

/// Source-side subjects of this and the previous utterance denote the same
/// entity (after pronoun resolution and reiteration chaining).
fn subjects_corefer(scored: &ScoredUtterance, prev: Option<&ScoredUtterance>) -> bool {
    let Some(prev) = prev else { return false };
    let this_subject = scored
        .utterance
        .source_subject()
        .and_then(|c| scored.scored_at(c.source_position));
    let prev_subject = prev
        .utterance
        .source_subject()
        .and_then(|c| prev.scored_at(c.source_position));
    match (this_subject, prev_subject) {
        (Some(a), Some(b)) => a.entity == b.entity,
        _ => false,
    }
}

/// Statistical positioning rows: condition patterns over the realized
/// source arrangement, and the preferred placement.
const STATISTICAL_ROWS: &[(PrefRule, &[&str], &str)] = &[
    (PrefRule::Iv, &["-V-S-O-", "-X-"], "XV-S-O-"),
    (PrefRule::V, &["-O-S-", "X-"], "XV-O-S-"),
    (PrefRule::Vi, &["-V-O-S-", "-X-"], "XV-O-S-"),
    (PrefRule::Vii, &["-S-V-O-", "-X-"], "XS-V-O-"),
    (PrefRule::Viii, &["-S-V-O-", "-X-"], "S-V-OX"),
    (PrefRule::Ix, &["-O-V-S-", "-X-"], "O-V-SX"),
    (PrefRule::X, &["-O-V-S-", "-X-"], "O-VXS"),
];

/// Roles carried by any constituent of the clause, omitted or not. A rule
/// whose preference pattern names a role the clause does not have at all
/// cannot fire.
fn clause_roles(utt: &Utterance) -> BTreeSet<Role> {
    utt.constituents.iter().map(|c| c.role).collect()
}

fn names_present(pattern: &OrderPattern, prim: Option<Role>, present: &BTreeSet<Role>) -> bool {
    pattern.required_roles(prim).is_subset(present)
}

/// The primary constituent fronted by the discrete-center preference: in a
/// non-initial utterance with both primaries realized, the one whose
/// anchored value is the unique maximum of at least 1.
fn discrete_primary(scored: &ScoredUtterance) -> Option<Role> {
    if scored.utterance.index == 0 {
        return None;
    }
    let s = scored.utterance.target(Role::S)?;
    let o = scored.utterance.target(Role::O)?;
    let s_anchor = scored.scored_at(s.source_position)?.anchored_value;
    let o_anchor = scored.scored_at(o.source_position)?.anchored_value;
    if s_anchor > o_anchor && s_anchor >= 1 {
        Some(Role::S)
    } else if o_anchor > s_anchor && o_anchor >= 1 {
        Some(Role::O)
    } else {
        None
    }
}

/// Evaluates the preference table in row order over the (already
/// preprocessed) utterance. Defaults xii and xiii constrain only when no
/// other rule fired; otherwise they are recorded as suppressed.
pub fn fire_preferences(
    scored: &ScoredUtterance,
    _next: Option<&ScoredUtterance>,
) -> Vec<FiredPreference> {
    let utt = &scored.utterance;
    let present = clause_roles(utt);
    let arrangement = utt.realized_arrangement();
    let mut fired = Vec::new();

    let mut push = |rule: PrefRule, constraint: OrderPattern, prim: Option<Role>| {
        fired.push(FiredPreference {
            rule,
            constraint,
            prim,
            suppressed: false,
        });
    };

    // Noun-phrase-bearing constituents in source order, with their values.
    let mut valued: Vec<(Role, i32)> = Vec::new();
    for c in &utt.constituents {
        if c.np.is_some() {
            if let Some(s) = scored.scored_at(c.source_position) {
                valued.push((c.role, s.value));
            }
        }
    }

    // Pref.i: new information goes last.
    for &(role, value) in &valued {
        if value < 0 {
            let p = parse_pattern(&format!("-{}", role.letter())).unwrap();
            if names_present(&p, None, &present) {
                push(PrefRule::I, p, None);
            }
        }
    }

    // Pref.ii: clearly more given precedes clearly less given (difference
    // of at least 2).
    for &(ra, va) in &valued {
        for &(rb, vb) in &valued {
            if (ra, va) == (rb, vb) {
                continue;
            }
            if va - vb >= 2 {
                let p = parse_pattern(&format!("-{}-{}-", ra.letter(), rb.letter())).unwrap();
                if names_present(&p, None, &present) {
                    push(PrefRule::Ii, p, None);
                }
            }
        }
    }

    // Pref.iii: topical adjunct fronted.
    for &(role, value) in &valued {
        if role == Role::X && value > 1 {
            let p = pattern("X-");
            if names_present(&p, None, &present) {
                push(PrefRule::Iii, p, None);
            }
        }
    }

    // Pref.iiib: discrete primary fronted.
    if let Some(prim) = discrete_primary(scored) {
        push(PrefRule::Iiib, pattern("(X-)(V-)Prim-"), Some(prim));
    }

    // Statistical rows iv-x.
    for (rule, conditions, preference) in STATISTICAL_ROWS {
        let cond_ok = conditions.iter().all(|c| {
            pattern(c)
                .matches(&arrangement, None)
                .expect("condition patterns carry no placeholder")
        });
        if cond_ok {
            let p = pattern(preference);
            if names_present(&p, None, &present) {
                push(*rule, p, None);
            }
        }
    }

    // Pref.xi: pronominal subjects go postverbal.
    if pron_target(utt, Role::S) {
        let p = pattern("-VS-");
        if names_present(&p, None, &present) {
            push(PrefRule::Xi, p, None);
        }
    }

    // Defaults, weaker than any other rule.
    let any_fired = !fired.is_empty();
    for (rule, text) in [(PrefRule::Xii, "-V-O-"), (PrefRule::Xiii, "-S-O-")] {
        let p = pattern(text);
        if names_present(&p, None, &present) {
            fired.push(FiredPreference {
                rule,
                constraint: p,
                prim: None,
                suppressed: any_fired,
            });
        }
    }

    fired
}

/// Outcome of running one order through the discrimination table.
#[derive(Debug, Clone, PartialEq)]
pub struct Discrimination {
    /// Every row whose order pattern matched, with whether its condition
    /// held.
    pub evaluations: Vec<(DiscrRule, bool)>,
}

impl Discrimination {
    pub fn passed(&self) -> bool {
        self.evaluations.iter().all(|&(_, held)| held)
    }

    pub fn failures(&self) -> Vec<DiscrRule> {
        self.evaluations
            .iter()
            .filter(|&&(_, held)| !held)
            .map(|&(rule, _)| rule)
            .collect()
    }

    /// First failing rule in table order.
    pub fn first_failure(&self) -> Option<DiscrRule> {
        self.evaluations
            .iter()
            .find(|&&(_, held)| !held)
            .map(|&(rule, _)| rule)
    }
}

fn length_of_target(utt: &Utterance, role: Role) -> u32 {
    utt.target_any(role).map(|c| c.length()).unwrap_or(1)
}

/// Runs one candidate order through every discrimination row whose order
/// pattern matches it. Length comparisons are non-strict as tabulated; the
/// lookahead condition is false when no next utterance exists.
pub fn discriminate(
    order: &[Role],
    scored: &ScoredUtterance,
    next: Option<&ScoredUtterance>,
) -> Discrimination {
    let utt = &scored.utterance;
    let len_s = length_of_target(utt, Role::S);
    let len_o = length_of_target(utt, Role::O);
    let next_subject_center = next.and_then(|n| center_of_target(n, Role::S)).unwrap_or(0);

    let matches = |text: &str| pattern(text).matches(order, None).unwrap();

    type Condition<'a> = Box<dyn Fn() -> bool + 'a>;
    let rows: [(DiscrRule, &str, Condition); 10] = [
        (DiscrRule::I, "-V-S-O-", Box::new(|| len_s <= len_o)),
        (DiscrRule::Ii, "-V-S-O-", Box::new(|| matches("-V-S-O"))),
        (
            DiscrRule::Iii,
            "-V-S-O-",
            Box::new(|| pron_target(utt, Role::S)),
        ),
        (DiscrRule::Iv, "-V-O-S-", Box::new(|| len_o <= len_s)),
        (DiscrRule::V, "-V-O-S-", Box::new(|| matches("-X-"))),
        (DiscrRule::Vi, "-S-O-V-", Box::new(|| matches("SOV"))),
        (
            DiscrRule::Vii,
            "-S-O-V-",
            Box::new(|| next_subject_center > 0),
        ),
        (DiscrRule::Viii, "-O-S-V-", Box::new(|| matches("OSVX"))),
        (DiscrRule::Ix, "-O-S-V-", Box::new(|| len_o >= len_s)),
        (DiscrRule::X, "-O-V-S", Box::new(|| len_o >= len_s)),
    ];

    let mut evaluations = Vec::new();
    for (rule, order_pattern, condition) in rows {
        if matches(order_pattern) {
            evaluations.push((rule, condition()));
        }
    }
    Discrimination { evaluations }
}

/// Plans one (already scored and preprocessed) utterance.
fn plan_utterance(
    scored: &ScoredUtterance,
    preprocessing: Vec<PreprocessingEffect>,
    next: Option<&ScoredUtterance>,
) -> OrderPlan {
    let utt = &scored.utterance;
    let arrangement = utt.realized_arrangement();
    let realized: Vec<Role> = {
        let mut r = arrangement.clone();
        r.sort();
        r
    };

    let preferences = fire_preferences(scored, next);

    // Constraint conjunction: non-suppressed preferences plus any
    // preprocessing order constraints.
    let mut extra_patterns: Vec<OrderPattern> = Vec::new();
    for effect in &preprocessing {
        match &effect.effect {
            PreEffect::FocusBinding { .. } => extra_patterns.push(pattern("-SV-")),
            PreEffect::ForceOrder => extra_patterns.push(pattern("SOV")),
            PreEffect::OmitSubject => {}
        }
    }
    let mut constraints: Vec<(&OrderPattern, Option<Role>)> = Vec::new();
    for fp in preferences.iter().filter(|fp| !fp.suppressed) {
        constraints.push((&fp.constraint, fp.prim));
    }
    for p in &extra_patterns {
        constraints.push((p, None));
    }

    // A constraint whose pattern names a role not realized in this clause
    // is vacuous here; when nothing effective remains, the source
    // arrangement stands.
    let realized_set: BTreeSet<Role> = realized.iter().copied().collect();
    let effective: Vec<(&OrderPattern, Option<Role>)> = constraints
        .iter()
        .filter(|(p, prim)| p.required_roles(*prim).is_subset(&realized_set))
        .copied()
        .collect();

    let mut fallback_used = false;
    let candidate_set: BTreeSet<Vec<Role>> = if effective.is_empty() {
        std::iter::once(arrangement.clone()).collect()
    } else {
        let satisfied =
            satisfying_orders(&effective, &realized).expect("prim bindings supplied with prim");
        if satisfied.is_empty() {
            // Building stage produced nothing: allow any order and keep
            // those that pass discrimination.
            fallback_used = true;
            unique_permutations(&realized).into_iter().collect()
        } else {
            satisfied
        }
    };
    let candidates: Vec<Vec<Role>> = candidate_set.into_iter().collect();

    let mut exclusions = Vec::new();
    let mut checked = Vec::new();
    let mut survivors: Vec<(bool, Vec<Role>)> = Vec::new();
    for order in &candidates {
        let outcome = discriminate(order, scored, next);
        if let Some(rule) = outcome.first_failure() {
            exclusions.push((order.clone(), rule));
        } else {
            for (rule, _) in &outcome.evaluations {
                checked.push((order.clone(), *rule));
            }
            survivors.push((!outcome.evaluations.is_empty(), order.clone()));
        }
    }

    // Orders untouched by any discrimination row come first, then
    // alphabetically by rendering.
    survivors.sort_by_key(|(matched_any, order)| (*matched_any, render_order(order)));
    let final_orders: Vec<Vec<Role>> = if survivors.is_empty() {
        fallback_used = true;
        vec![arrangement]
    } else {
        survivors.into_iter().map(|(_, o)| o).collect()
    };

    OrderPlan {
        utterance: utt.index,
        preprocessing,
        preferences,
        candidates,
        exclusions,
        checked,
        final_orders,
        fallback_used,
    }
}

/// Plans every utterance of a scored document: preprocessing, preference
/// firing, candidate generation, discrimination and fallbacks.
pub fn plan_orders(doc: &ScoredDocument) -> Result<Vec<OrderPlan>, EngineError> {
    let mut plans = Vec::with_capacity(doc.utterances.len());
    for (position, scored) in doc.utterances.iter().enumerate() {
        if scored.utterance.index != position {
            return Err(EngineError::Sequencing {
                index: scored.utterance.index,
                position,
            });
        }
        let prev = position.checked_sub(1).map(|p| &doc.utterances[p]);
        let next = doc.utterances.get(position + 1);

        let effects = preprocess(scored, prev)?;
        let working = apply_effects(scored, &effects);
        plans.push(plan_utterance(&working, effects, next));
    }
    Ok(plans)
}

/// Clone of the scored utterance with omission effects applied.
fn apply_effects(scored: &ScoredUtterance, effects: &[PreprocessingEffect]) -> ScoredUtterance {
    let mut working = scored.clone();
    for effect in effects {
        if effect.effect == PreEffect::OmitSubject {
            for c in &mut working.utterance.constituents {
                if c.role == Role::S {
                    c.omitted = true;
                }
            }
        }
    }
    working
}

impl OrderPlan {
    /// Final orders rendered with omitted constituents bracketed, e.g.
    /// `V[S]X`. An omitted role is placed at the position satisfying the
    /// fired constraints that name it; with no constraint to honor it sits
    /// right after the verb (the inflection carries the dropped subject) or,
    /// verbless, at its source position.
    pub fn rendered_final(&self, utt: &Utterance) -> Vec<String> {
        let omitted: Vec<&crate::model::Constituent> = {
            let mut cs: Vec<_> = utt.constituents.iter().filter(|c| c.omitted).collect();
            cs.sort_by_key(|c| c.source_position);
            cs
        };
        self.final_orders
            .iter()
            .map(|order| self.render_with_omitted(order, &omitted))
            .collect()
    }

    fn render_with_omitted(
        &self,
        order: &[Role],
        omitted: &[&crate::model::Constituent],
    ) -> String {
        let mut placed: Vec<(Role, bool)> = order.iter().map(|&r| (r, false)).collect();
        for c in omitted {
            let relevant: Vec<(&OrderPattern, Option<Role>)> = self
                .preferences
                .iter()
                .filter(|fp| !fp.suppressed)
                .filter(|fp| fp.constraint.required_roles(fp.prim).contains(&c.role))
                .map(|fp| (&fp.constraint, fp.prim))
                .collect();
            let positions: Vec<usize> = (0..=placed.len())
                .filter(|&at| {
                    let mut trial: Vec<Role> = placed.iter().map(|&(r, _)| r).collect();
                    trial.insert(at, c.role);
                    relevant
                        .iter()
                        .all(|(p, prim)| p.matches(&trial, *prim).unwrap_or(false))
                })
                .collect();
            let at = match positions.as_slice() {
                [unique] => *unique,
                _ => {
                    if c.role == Role::S {
                        placed
                            .iter()
                            .position(|&(r, _)| r == Role::V)
                            .map(|v| v + 1)
                            .unwrap_or_else(|| c.source_position.min(placed.len()))
                    } else {
                        c.source_position.min(placed.len())
                    }
                }
            };
            placed.insert(at, (c.role, true));
        }
        placed
            .iter()
            .map(|&(r, bracketed)| {
                if bracketed {
                    format!("[{}]", r.letter())
                } else {
                    r.letter().to_string()
                }
            })
            .collect()
    }
}
