//! Run reports: per-utterance center-value tables and order-plan
//! derivations, renderable as aligned text tables or as machine-readable
//! records that round-trip without loss.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::OrderPlan;
use crate::model::{render_order, Document, EntityId};
use crate::scorer::{Contribution, ScoredDocument, ScoredNp, ValueRule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub document: String,
    pub utterances: Vec<UtteranceRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtteranceRecord {
    pub index: usize,
    pub text: String,
    pub nps: Vec<NpRecord>,
    pub center: Option<String>,
    pub cb: Option<String>,
    pub transition: String,
    pub plan: PlanRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NpRecord {
    pub position: usize,
    pub phrase: String,
    pub rules: String,
    pub values: String,
    pub value: i32,
    pub anchored: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceRecord {
    pub rule: String,
    pub pattern: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prim: Option<String>,
    pub suppressed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleOnOrder {
    pub order: String,
    pub rule: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub preprocessing: Vec<String>,
    pub preferences: Vec<PreferenceRecord>,
    pub candidates: Vec<String>,
    pub exclusions: Vec<RuleOnOrder>,
    pub checked: Vec<RuleOnOrder>,
    pub final_orders: Vec<String>,
    pub fallback: bool,
}

/// Collapses the rules of a derivation into the compact citation form:
/// composite families are listed with their rule numbers (`Comp.1,2,4`), the
/// neutral base rules only when nothing else applied.
fn rules_label(derivation: &[Contribution]) -> String {
    let mut families: BTreeMap<&'static str, Vec<u8>> = BTreeMap::new();
    for c in derivation {
        let (family, number) = match c.rule {
            ValueRule::Point1 => ("Point", 1),
            ValueRule::Point2 => ("Point", 2),
            ValueRule::Point3 => ("Point", 3),
            ValueRule::Pron1 => ("Pron", 1),
            ValueRule::Pron2 => ("Pron", 2),
            ValueRule::Non1 => ("Non", 1),
            ValueRule::Non2 => ("Non", 2),
            ValueRule::Comp1 => ("Comp", 1),
            ValueRule::Comp2 => ("Comp", 2),
            ValueRule::Comp3 => ("Comp", 3),
            ValueRule::Comp4 => ("Comp", 4),
        };
        let numbers = families.entry(family).or_default();
        if !numbers.contains(&number) {
            numbers.push(number);
        }
    }
    let cited: Vec<(&str, Vec<u8>)> = {
        let non_base: Vec<(&str, Vec<u8>)> = ["Point", "Pron", "Comp"]
            .iter()
            .filter_map(|f| families.get(*f).map(|ns| (*f, ns.clone())))
            .collect();
        if non_base.is_empty() {
            families
                .get("Non")
                .map(|ns| vec![("Non", ns.clone())])
                .unwrap_or_default()
        } else {
            non_base
        }
    };
    cited
        .into_iter()
        .map(|(family, mut numbers)| {
            numbers.sort_unstable();
            let joined: Vec<String> = numbers.iter().map(|n| n.to_string()).collect();
            format!("{family}.{}", joined.join(","))
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Renders `2 = 1+1+0` style value decompositions. The structural genitive
/// marker contributes no term of its own.
fn values_label(scored: &ScoredNp) -> String {
    let terms: Vec<i32> = scored
        .derivation
        .iter()
        .filter(|c| c.rule != ValueRule::Comp4)
        .map(|c| c.amount)
        .collect();
    if terms.len() <= 1 {
        return scored.value.to_string();
    }
    let mut sum = String::new();
    for (i, t) in terms.iter().enumerate() {
        if i == 0 {
            sum.push_str(&t.to_string());
        } else if *t < 0 {
            sum.push_str(&format!("-{}", -t));
        } else {
            sum.push_str(&format!("+{t}"));
        }
    }
    format!("{} = {}", scored.value, sum)
}

fn lemma_index(doc: &Document) -> BTreeMap<EntityId, String> {
    let mut map = BTreeMap::new();
    for utt in &doc.utterances {
        for c in &utt.constituents {
            let Some(np) = &c.np else { continue };
            map.insert(np.id.clone(), np.head_lemma.clone());
            if let Some(gen) = &np.genitive {
                map.insert(gen.possessor.id.clone(), gen.possessor.head_lemma.clone());
                map.insert(gen.possessed.id.clone(), gen.possessed.head_lemma.clone());
            }
        }
    }
    map
}

/// Builds the full report for a scored and planned document.
pub fn build_report(scored: &ScoredDocument, plans: &[OrderPlan]) -> RunReport {
    let document = Document {
        id: scored.id.clone(),
        utterances: scored
            .utterances
            .iter()
            .map(|s| s.utterance.clone())
            .collect(),
    };
    let lemmas = lemma_index(&document);
    let lemma_of = |entity: &EntityId| -> String {
        lemmas
            .get(entity)
            .cloned()
            .unwrap_or_else(|| entity.to_string())
    };

    let mut utterances = Vec::new();
    for (i, su) in scored.utterances.iter().enumerate() {
        let utt = &su.utterance;
        let nps: Vec<NpRecord> = su
            .scored
            .iter()
            .map(|s| {
                let phrase = utt
                    .constituents
                    .iter()
                    .find(|c| c.source_position == s.position)
                    .and_then(|c| c.np.as_ref())
                    .map(|np| np.words.join(" "))
                    .unwrap_or_default();
                NpRecord {
                    position: s.position,
                    phrase,
                    rules: rules_label(&s.derivation),
                    values: values_label(s),
                    value: s.value,
                    anchored: s.anchored_value,
                }
            })
            .collect();

        let center = su.discrete_center.map(|idx| {
            let s = &su.scored[idx];
            let np = utt
                .constituents
                .iter()
                .find(|c| c.source_position == s.position)
                .and_then(|c| c.np.as_ref());
            match (&s.resolved_antecedent, np) {
                (Some((entity, _)), Some(np)) if np.is_pronoun() => {
                    format!("{} = {}", np.head_lemma, lemma_of(entity))
                }
                (_, Some(np)) => np.head_lemma.clone(),
                _ => s.entity.to_string(),
            }
        });

        let plan = &plans[i];
        // The planner applies omission effects to a working copy; rendering
        // needs the same view.
        let mut working = utt.clone();
        if plan
            .preprocessing
            .iter()
            .any(|e| e.effect == crate::engine::PreEffect::OmitSubject)
        {
            for c in &mut working.constituents {
                if c.role == crate::model::Role::S {
                    c.omitted = true;
                }
            }
        }
        let plan_record = PlanRecord {
            preprocessing: plan.preprocessing.iter().map(|e| e.to_string()).collect(),
            preferences: plan
                .preferences
                .iter()
                .map(|p| PreferenceRecord {
                    rule: p.rule.to_string(),
                    pattern: p.constraint.render(),
                    prim: p.prim.map(|r| r.letter().to_string()),
                    suppressed: p.suppressed,
                })
                .collect(),
            candidates: plan.candidates.iter().map(|o| render_order(o)).collect(),
            exclusions: plan
                .exclusions
                .iter()
                .map(|(order, rule)| RuleOnOrder {
                    order: render_order(order),
                    rule: rule.to_string(),
                })
                .collect(),
            checked: plan
                .checked
                .iter()
                .map(|(order, rule)| RuleOnOrder {
                    order: render_order(order),
                    rule: rule.to_string(),
                })
                .collect(),
            final_orders: plan.rendered_final(&working),
            fallback: plan.fallback_used,
        };

        utterances.push(UtteranceRecord {
            index: utt.index,
            text: utt.text.clone(),
            nps,
            center,
            cb: su.cb.as_ref().map(&lemma_of),
            transition: su.transition.to_string(),
            plan: plan_record,
        });
    }

    RunReport {
        document: scored.id.clone(),
        utterances,
    }
}

fn pad(s: &str, width: usize) -> String {
    format!("{s:<width$}")
}

/// Aligned center-value table, one row per utterance.
pub fn render_table(report: &RunReport) -> String {
    let headers = ["NO", "UTTERANCE", "RULES", "VALUES", "CENTER", "TRANSITION"];
    let rows: Vec<[String; 6]> = report
        .utterances
        .iter()
        .map(|u| {
            [
                (u.index + 1).to_string(),
                u.text.clone(),
                u.nps
                    .iter()
                    .map(|n| n.rules.clone())
                    .collect::<Vec<_>>()
                    .join(" | "),
                u.nps
                    .iter()
                    .map(|n| n.values.clone())
                    .collect::<Vec<_>>()
                    .join(" | "),
                u.center.clone().unwrap_or_else(|| "-".into()),
                u.transition.clone(),
            ]
        })
        .collect();
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in &rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    let render_row = |cells: &[String]| -> String {
        cells
            .iter()
            .enumerate()
            .map(|(i, c)| pad(c, widths[i]))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    out.push_str(&render_row(
        &headers.iter().map(|h| h.to_string()).collect::<Vec<_>>(),
    ));
    out.push('\n');
    for row in &rows {
        out.push_str(&render_row(row));
        out.push('\n');
    }
    out
}

/// Final orders only, one line per utterance.
pub fn render_orders(report: &RunReport) -> String {
    let mut out = String::new();
    for u in &report.utterances {
        out.push_str(&u.plan.final_orders.join(" "));
        out.push('\n');
    }
    out
}

/// Full derivation trace: center values, preprocessing effects, fired and
/// suppressed preferences, candidates, discrimination outcomes and final
/// orders. Suppressed preferences and failing discrimination rules appear
/// in parentheses.
pub fn render_trace(report: &RunReport) -> String {
    let mut out = String::new();
    for u in &report.utterances {
        out.push_str(&format!("U{}: {}\n", u.index + 1, u.text));
        for np in &u.nps {
            out.push_str(&format!(
                "  value {phrase}: {rules} [{values}] anchored {anchored}\n",
                phrase = np.phrase,
                rules = np.rules,
                values = np.values,
                anchored = np.anchored,
            ));
        }
        out.push_str(&format!(
            "  center: {}  cb: {}  transition: {}\n",
            u.center.as_deref().unwrap_or("(none)"),
            u.cb.as_deref().unwrap_or("(none)"),
            u.transition
        ));
        let preprocessing = if u.plan.preprocessing.is_empty() {
            "(none)".to_string()
        } else {
            u.plan.preprocessing.join("; ")
        };
        out.push_str(&format!("  preprocessing: {preprocessing}\n"));
        let preferences = if u.plan.preferences.is_empty() {
            "(none)".to_string()
        } else {
            u.plan
                .preferences
                .iter()
                .map(|p| {
                    let prim = p
                        .prim
                        .as_ref()
                        .map(|r| format!(" [Prim={r}]"))
                        .unwrap_or_default();
                    if p.suppressed {
                        format!("({} {}{})", p.rule, p.pattern, prim)
                    } else {
                        format!("{} {}{}", p.rule, p.pattern, prim)
                    }
                })
                .collect::<Vec<_>>()
                .join("; ")
        };
        out.push_str(&format!("  preferences: {preferences}\n"));
        out.push_str(&format!(
            "  candidates: {}\n",
            if u.plan.candidates.is_empty() {
                "(none)".to_string()
            } else {
                u.plan.candidates.join(" ")
            }
        ));
        let mut discrimination: Vec<String> = u
            .plan
            .checked
            .iter()
            .map(|c| format!("{} {}", c.rule, c.order))
            .collect();
        discrimination.extend(
            u.plan
                .exclusions
                .iter()
                .map(|e| format!("({} {})", e.rule, e.order)),
        );
        out.push_str(&format!(
            "  discrimination: {}\n",
            if discrimination.is_empty() {
                "(none)".to_string()
            } else {
                discrimination.join(" ")
            }
        ));
        let fallback = if u.plan.fallback { " (fallback)" } else { "" };
        out.push_str(&format!(
            "  final: {}{}\n",
            u.plan.final_orders.join(" "),
            fallback,
        ));
    }
    out
}

#[derive(Debug, Error)]
pub enum RecordsError {
    #[error("line {line}: invalid report record: {message}")]
    Parse { line: usize, message: String },
}

/// One JSON object per document, on a single line.
pub fn render_records(report: &RunReport) -> String {
    let mut out = serde_json::to_string(report).expect("report serializes");
    out.push('\n');
    out
}

/// Reads reports back from the records format.
pub fn parse_records(text: &str) -> Result<Vec<RunReport>, RecordsError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let report = serde_json::from_str(line).map_err(|e| RecordsError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(report);
    }
    Ok(out)
}
