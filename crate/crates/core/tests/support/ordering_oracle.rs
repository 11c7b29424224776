//! Independent re-coding of the three ordering tables, used to cross-check
//! the engine on randomized clauses. Every order test and rule condition is
//! written as a direct positional predicate over role sequences; none of the
//! pattern machinery is involved.

use std::collections::BTreeSet;

use discourse_planner::engine::{DiscrRule, PreRule, PrefRule};
use discourse_planner::model::{Role, Utterance};
use discourse_planner::scorer::{ScoredUtterance, Transition};

#[derive(Debug, Clone, PartialEq)]
pub struct OraclePlan {
    pub preprocessing: Vec<PreRule>,
    /// Non-suppressed firings: (rule, prim binding, bound role parameters).
    pub fired: Vec<(PrefRule, Option<Role>, Vec<Role>)>,
    pub defaults: Vec<(PrefRule, bool)>,
    pub candidates: BTreeSet<Vec<Role>>,
    pub exclusions: Vec<(Vec<Role>, DiscrRule)>,
    pub final_orders: Vec<Vec<Role>>,
    pub fallback_used: bool,
}

fn pos_of(order: &[Role], role: Role) -> Option<usize> {
    order.iter().position(|&r| r == role)
}

/// Existential: some occurrence of `a` precedes some occurrence of `b` at a
/// different position (a repeated role may supply both).
fn before(order: &[Role], a: Role, b: Role) -> bool {
    order
        .iter()
        .enumerate()
        .any(|(i, &ra)| ra == a && order.iter().enumerate().any(|(j, &rb)| rb == b && i < j))
}

fn chain3(order: &[Role], a: Role, b: Role, c: Role) -> bool {
    order.iter().enumerate().any(|(i, &ra)| {
        ra == a
            && order.iter().enumerate().any(|(j, &rb)| {
                rb == b && i < j && order.iter().enumerate().any(|(k, &rc)| rc == c && j < k)
            })
    })
}

fn np_value(su: &ScoredUtterance, position: usize) -> Option<i32> {
    su.scored_at(position).map(|s| s.value)
}

fn target_cons(utt: &Utterance, role: Role) -> Option<&discourse_planner::model::Constituent> {
    utt.constituents.iter().find(|c| c.role == role)
}

fn pron(utt: &Utterance, role: Role) -> bool {
    target_cons(utt, role).is_some_and(|c| c.is_pronominal())
}

fn length(utt: &Utterance, role: Role) -> u32 {
    target_cons(utt, role)
        .map(|c| {
            c.target_length
                .unwrap_or_else(|| c.np.as_ref().map(|np| np.words.len() as u32).unwrap_or(1))
        })
        .unwrap_or(1)
}

/// All distinct sequences over the realized multiset, by direct recursion.
fn permutations(roles: &[Role]) -> BTreeSet<Vec<Role>> {
    fn go(remaining: &mut Vec<Role>, current: &mut Vec<Role>, out: &mut BTreeSet<Vec<Role>>) {
        if remaining.is_empty() {
            out.insert(current.clone());
            return;
        }
        for i in 0..remaining.len() {
            let role = remaining.remove(i);
            current.push(role);
            go(remaining, current, out);
            current.pop();
            remaining.insert(i, role);
        }
    }
    let mut out = BTreeSet::new();
    go(&mut roles.to_vec(), &mut Vec::new(), &mut out);
    out
}

type OrderTest = Box<dyn Fn(&[Role]) -> bool>;

/// Order constraint of one fired preference, as a membership predicate.
fn constraint_test(rule: PrefRule, prim: Option<Role>, params: &[Role]) -> OrderTest {
    let params = params.to_vec();
    match rule {
        // New information last: the bound role takes final position.
        PrefRule::I => {
            let r = params[0];
            Box::new(move |ord| ord.last() == Some(&r))
        }
        // Clearly more given before clearly less given.
        PrefRule::Ii => {
            let (a, b) = (params[0], params[1]);
            Box::new(move |ord| before(ord, a, b))
        }
        // Topical adjunct fronted.
        PrefRule::Iii => Box::new(|ord| ord.first() == Some(&Role::X)),
        // Discrete primary fronted behind an optional adjunct and verb: the
        // prefix before the primary may hold only X then V, in that order.
        PrefRule::Iiib => {
            let prim = prim.expect("binding");
            Box::new(move |ord| {
                let mut i = 0;
                if ord.get(i) == Some(&Role::X) {
                    i += 1;
                }
                if ord.get(i) == Some(&Role::V) {
                    i += 1;
                }
                ord.get(i) == Some(&prim)
            })
        }
        PrefRule::Iv => Box::new(|ord| {
            ord.first() == Some(&Role::X)
                && ord.get(1) == Some(&Role::V)
                && before(ord, Role::S, Role::O)
                && pos_of(ord, Role::S).is_some_and(|s| s >= 2)
        }),
        PrefRule::V | PrefRule::Vi => Box::new(|ord| {
            ord.first() == Some(&Role::X)
                && ord.get(1) == Some(&Role::V)
                && before(ord, Role::O, Role::S)
                && pos_of(ord, Role::O).is_some_and(|o| o >= 2)
        }),
        PrefRule::Vii => Box::new(|ord| {
            ord.first() == Some(&Role::X)
                && ord.get(1) == Some(&Role::S)
                && pos_of(ord, Role::V).is_some_and(|v| v >= 2)
                && before(ord, Role::V, Role::O)
        }),
        PrefRule::Viii => Box::new(|ord| {
            let n = ord.len();
            n >= 4
                && ord.first() == Some(&Role::S)
                && ord.last() == Some(&Role::X)
                && ord.get(n - 2) == Some(&Role::O)
                && pos_of(ord, Role::V).is_some_and(|v| v > 0 && v < n - 2)
        }),
        PrefRule::Ix => Box::new(|ord| {
            let n = ord.len();
            n >= 4
                && ord.first() == Some(&Role::O)
                && ord.last() == Some(&Role::X)
                && ord.get(n - 2) == Some(&Role::S)
                && pos_of(ord, Role::V).is_some_and(|v| v > 0 && v < n - 2)
        }),
        PrefRule::X => Box::new(|ord| {
            let n = ord.len();
            n >= 4
                && ord.first() == Some(&Role::O)
                && ord.get(n - 3) == Some(&Role::V)
                && ord.get(n - 2) == Some(&Role::X)
                && ord.last() == Some(&Role::S)
        }),
        // Pronominal subject goes right after the verb.
        PrefRule::Xi => Box::new(|ord| ord.windows(2).any(|w| w[0] == Role::V && w[1] == Role::S)),
        PrefRule::Xii => Box::new(|ord| before(ord, Role::V, Role::O)),
        PrefRule::Xiii => Box::new(|ord| before(ord, Role::S, Role::O)),
    }
}

/// Roles a constraint requires the clause to offer.
fn constraint_roles(rule: PrefRule, prim: Option<Role>, params: &[Role]) -> Vec<Role> {
    match rule {
        PrefRule::I => vec![params[0]],
        PrefRule::Ii => vec![params[0], params[1]],
        PrefRule::Iii => vec![Role::X],
        PrefRule::Iiib => vec![prim.expect("binding")],
        PrefRule::Iv
        | PrefRule::V
        | PrefRule::Vi
        | PrefRule::Vii
        | PrefRule::Viii
        | PrefRule::Ix
        | PrefRule::X => vec![Role::X, Role::V, Role::S, Role::O],
        PrefRule::Xi => vec![Role::V, Role::S],
        PrefRule::Xii => vec![Role::V, Role::O],
        PrefRule::Xiii => vec![Role::S, Role::O],
    }
}

fn realized_arrangement(utt: &Utterance) -> Vec<Role> {
    let mut cs: Vec<&discourse_planner::model::Constituent> =
        utt.constituents.iter().filter(|c| !c.omitted).collect();
    cs.sort_by_key(|c| c.source_position);
    cs.iter().map(|c| c.role).collect()
}

/// Full oracle pipeline for the utterance at `index`.
pub fn oracle_plan(all: &[ScoredUtterance], index: usize) -> OraclePlan {
    let su = &all[index];
    let prev = index.checked_sub(1).map(|i| &all[i]);
    let next = all.get(index + 1);
    let utt = &su.utterance;

    // --- preprocessing table, re-read from scratch ---
    let mut preprocessing = Vec::new();
    let s_cons = target_cons(utt, Role::S);
    let pron_s = pron(utt, Role::S);
    let pron_o = pron(utt, Role::O);
    let subject_is_we = s_cons
        .and_then(|c| c.np.as_ref())
        .is_some_and(|np| np.head_lemma.eq_ignore_ascii_case("we"));
    let subjects_same = match prev {
        Some(p) => {
            let here = utt
                .constituents
                .iter()
                .find(|c| c.source_role == Role::S)
                .and_then(|c| su.scored_at(c.source_position))
                .map(|s| s.entity.clone());
            let there = p
                .utterance
                .constituents
                .iter()
                .find(|c| c.source_role == Role::S)
                .and_then(|c| p.scored_at(c.source_position))
                .map(|s| s.entity.clone());
            matches!((here, there), (Some(a), Some(b)) if a == b)
        }
        None => false,
    };
    let mut omit = false;
    if s_cons.is_some() {
        if subject_is_we {
            preprocessing.push(PreRule::I);
            omit = true;
        } else if pron_o && pron_s {
            preprocessing.push(PreRule::Ii);
            omit = true;
        } else if pron_s && subjects_same {
            preprocessing.push(PreRule::Iii);
            omit = true;
        } else if su.transition == Transition::Continuing {
            preprocessing.push(PreRule::Iv);
            omit = true;
        }
    }
    let only_subject = pron_s
        && s_cons.and_then(|c| c.np.as_ref()).is_some_and(|np| {
            np.words
                .first()
                .is_some_and(|w| w.eq_ignore_ascii_case("only"))
        });
    let mut focus_bound = false;
    let mut forced_sov = false;
    if only_subject {
        preprocessing.push(PreRule::V);
        focus_bound = true;
    } else if target_cons(utt, Role::X).is_none() && pron_o {
        preprocessing.push(PreRule::Vi);
        forced_sov = true;
    }

    // Apply omission to a working view.
    let mut working = utt.clone();
    if omit {
        for c in &mut working.constituents {
            if c.role == Role::S {
                c.omitted = true;
            }
        }
    }
    let arrangement = realized_arrangement(&working);
    let clause_roles: BTreeSet<Role> = working.constituents.iter().map(|c| c.role).collect();

    // --- preference table, re-read from scratch ---
    let mut fired: Vec<(PrefRule, Option<Role>, Vec<Role>)> = Vec::new();
    let mut push = |rule: PrefRule, prim: Option<Role>, params: Vec<Role>| {
        if constraint_roles(rule, prim, &params)
            .iter()
            .all(|r| clause_roles.contains(r))
        {
            fired.push((rule, prim, params));
        }
    };

    let valued: Vec<(Role, i32)> = working
        .constituents
        .iter()
        .filter(|c| c.np.is_some())
        .filter_map(|c| np_value(su, c.source_position).map(|v| (c.role, v)))
        .collect();

    for &(role, value) in &valued {
        if value < 0 {
            push(PrefRule::I, None, vec![role]);
        }
    }
    for &(ra, va) in &valued {
        for &(rb, vb) in &valued {
            if (ra, va) != (rb, vb) && va - vb >= 2 {
                push(PrefRule::Ii, None, vec![ra, rb]);
            }
        }
    }
    for &(role, value) in &valued {
        if role == Role::X && value > 1 {
            push(PrefRule::Iii, None, vec![]);
        }
    }
    // Discrete primary: non-initial clause, both primaries realized, unique
    // anchored maximum of at least one.
    if utt.index > 0 {
        let anchored = |role: Role| {
            working
                .constituents
                .iter()
                .find(|c| c.role == role && !c.omitted)
                .and_then(|c| su.scored_at(c.source_position))
                .map(|s| s.anchored_value)
        };
        if let (Some(a_s), Some(a_o)) = (anchored(Role::S), anchored(Role::O)) {
            if a_s > a_o && a_s >= 1 {
                push(PrefRule::Iiib, Some(Role::S), vec![]);
            } else if a_o > a_s && a_o >= 1 {
                push(PrefRule::Iiib, Some(Role::O), vec![]);
            }
        }
    }
    let x_present = arrangement.contains(&Role::X);
    if chain3(&arrangement, Role::V, Role::S, Role::O) && x_present {
        push(PrefRule::Iv, None, vec![]);
    }
    if before(&arrangement, Role::O, Role::S) && arrangement.first() == Some(&Role::X) {
        push(PrefRule::V, None, vec![]);
    }
    if chain3(&arrangement, Role::V, Role::O, Role::S) && x_present {
        push(PrefRule::Vi, None, vec![]);
    }
    if chain3(&arrangement, Role::S, Role::V, Role::O) && x_present {
        push(PrefRule::Vii, None, vec![]);
        push(PrefRule::Viii, None, vec![]);
    }
    if chain3(&arrangement, Role::O, Role::V, Role::S) && x_present {
        push(PrefRule::Ix, None, vec![]);
        push(PrefRule::X, None, vec![]);
    }
    if pron(&working, Role::S) {
        push(PrefRule::Xi, None, vec![]);
    }

    let any_fired = !fired.is_empty();
    let mut defaults = Vec::new();
    for (rule, roles) in [
        (PrefRule::Xii, [Role::V, Role::O]),
        (PrefRule::Xiii, [Role::S, Role::O]),
    ] {
        if roles.iter().all(|r| clause_roles.contains(r)) {
            defaults.push((rule, any_fired));
        }
    }

    // --- candidate generation ---
    let realized_set: BTreeSet<Role> = arrangement.iter().copied().collect();
    let mut constraints: Vec<OrderTest> = Vec::new();
    for (rule, prim, params) in &fired {
        if constraint_roles(*rule, *prim, params)
            .iter()
            .all(|r| realized_set.contains(r))
        {
            constraints.push(constraint_test(*rule, *prim, params));
        }
    }
    if !any_fired {
        for (rule, _) in &defaults {
            let params = vec![];
            if constraint_roles(*rule, None, &params)
                .iter()
                .all(|r| realized_set.contains(r))
            {
                constraints.push(constraint_test(*rule, None, &params));
            }
        }
    }
    if focus_bound && [Role::S, Role::V].iter().all(|r| realized_set.contains(r)) {
        constraints.push(Box::new(|ord| {
            ord.windows(2).any(|w| w[0] == Role::S && w[1] == Role::V)
        }));
    }
    if forced_sov
        && [Role::S, Role::O, Role::V]
            .iter()
            .all(|r| realized_set.contains(r))
    {
        constraints.push(Box::new(|ord| ord == [Role::S, Role::O, Role::V]));
    }

    let mut fallback_used = false;
    let candidates: BTreeSet<Vec<Role>> = if constraints.is_empty() {
        std::iter::once(arrangement.clone()).collect()
    } else {
        let satisfied: BTreeSet<Vec<Role>> = permutations(&arrangement)
            .into_iter()
            .filter(|ord| constraints.iter().all(|c| c(ord)))
            .collect();
        if satisfied.is_empty() {
            fallback_used = true;
            permutations(&arrangement)
        } else {
            satisfied
        }
    };

    // --- discrimination table, re-read from scratch ---
    let len_s = length(&working, Role::S);
    let len_o = length(&working, Role::O);
    let next_s_center = next
        .and_then(|n| {
            n.utterance
                .constituents
                .iter()
                .find(|c| c.role == Role::S)
                .and_then(|c| n.scored_at(c.source_position))
                .map(|s| s.value)
        })
        .unwrap_or(0);

    let discriminate = |ord: &[Role]| -> (Vec<DiscrRule>, bool) {
        let n = ord.len();
        let mut failures = Vec::new();
        let mut matched_any = false;
        let vso = chain3(ord, Role::V, Role::S, Role::O);
        let vos = chain3(ord, Role::V, Role::O, Role::S);
        let sov = chain3(ord, Role::S, Role::O, Role::V);
        let osv = chain3(ord, Role::O, Role::S, Role::V);
        let ovs_final =
            chain3(ord, Role::O, Role::V, Role::S) && pos_of(ord, Role::S) == Some(n - 1);
        let rows: [(DiscrRule, bool, bool); 10] = [
            (DiscrRule::I, vso, len_s <= len_o),
            (
                DiscrRule::Ii,
                vso,
                vso && pos_of(ord, Role::O) == Some(n - 1),
            ),
            (DiscrRule::Iii, vso, pron(&working, Role::S)),
            (DiscrRule::Iv, vos, len_o <= len_s),
            (DiscrRule::V, vos, ord.contains(&Role::X)),
            (DiscrRule::Vi, sov, ord == [Role::S, Role::O, Role::V]),
            (DiscrRule::Vii, sov, next_s_center > 0),
            (
                DiscrRule::Viii,
                osv,
                ord == [Role::O, Role::S, Role::V, Role::X],
            ),
            (DiscrRule::Ix, osv, len_o >= len_s),
            (DiscrRule::X, ovs_final, len_o >= len_s),
        ];
        for (rule, matched, condition) in rows {
            if matched {
                matched_any = true;
                if !condition {
                    failures.push(rule);
                }
            }
        }
        (failures, matched_any)
    };

    let mut exclusions = Vec::new();
    let mut survivors: Vec<(bool, Vec<Role>)> = Vec::new();
    for ord in &candidates {
        let (failures, matched_any) = discriminate(ord);
        if let Some(first) = failures.first() {
            exclusions.push((ord.clone(), *first));
        } else {
            survivors.push((matched_any, ord.clone()));
        }
    }
    survivors.sort_by_key(|(matched, ord)| {
        (*matched, ord.iter().map(|r| r.letter()).collect::<String>())
    });
    let final_orders: Vec<Vec<Role>> = if survivors.is_empty() {
        fallback_used = true;
        vec![arrangement]
    } else {
        survivors.into_iter().map(|(_, o)| o).collect()
    };

    OraclePlan {
        preprocessing,
        fired,
        defaults,
        candidates,
        exclusions,
        final_orders,
        fallback_used,
    }
}
