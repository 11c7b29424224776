//! Reading, writing and validating annotated documents.
//!
//! The interchange format is line-delimited JSON: one utterance per line,
//! each an object with `text` and `constituents`. A constituent carries
//! `role` (source side), optional noun phrase fields (`id`, `words`,
//! `head_lemma`, `number`, `determiner`, `pronoun`, `construction`,
//! `genitive`, `antecedent_id`) and the ordering fields
//! (`target_role_override`, `target_length`). Ids are optional on input and
//! generated as `u<utterance>.<position>` when absent.

mod annotate;

pub use annotate::{annotate_demo, AnnotateError};

use std::io::BufRead;

use serde_json::Value;
use thiserror::Error;

use crate::model::{
    validate_document, Constituent, Construction, Determiner, Document, EntityId, GenitiveParts,
    NounPhrase, Number, PronounClass, Role, Utterance,
};

#[derive(Debug, Error)]
pub enum ReadError {
    #[error("line {line}: {message}")]
    Record { line: usize, message: String },
    #[error("line {line}, {field}: {message}")]
    Field {
        line: usize,
        field: String,
        message: String,
    },
    #[error("line {line}, {field}: antecedent '{id}' does not name an earlier noun phrase")]
    DanglingAntecedent {
        line: usize,
        field: String,
        id: String,
    },
    #[error("document invalid: {0}")]
    Invalid(String),
    #[error("cannot read input: {0}")]
    Io(#[from] std::io::Error),
}

/// How to treat fields outside the schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strictness {
    /// Unknown fields are rejected.
    Strict,
    /// Unknown fields are reported as warnings and skipped.
    #[default]
    Lenient,
}

#[derive(Debug)]
pub struct ReadOutcome {
    pub document: Document,
    pub warnings: Vec<String>,
}

struct FieldCx<'a> {
    line: usize,
    path: &'a str,
}

impl FieldCx<'_> {
    fn err(&self, field: &str, message: impl Into<String>) -> ReadError {
        let field = if self.path.is_empty() {
            field.to_string()
        } else if field.is_empty() {
            self.path.to_string()
        } else {
            format!("{}.{}", self.path, field)
        };
        ReadError::Field {
            line: self.line,
            field,
            message: message.into(),
        }
    }
}

fn expect_object<'v>(
    value: &'v Value,
    cx: &FieldCx,
    what: &str,
) -> Result<&'v serde_json::Map<String, Value>, ReadError> {
    value
        .as_object()
        .ok_or_else(|| cx.err("", format!("{what} must be an object")))
}

fn check_keys(
    map: &serde_json::Map<String, Value>,
    allowed: &[&str],
    cx: &FieldCx,
    strictness: Strictness,
    warnings: &mut Vec<String>,
) -> Result<(), ReadError> {
    for key in map.keys() {
        if !allowed.contains(&key.as_str()) {
            match strictness {
                Strictness::Strict => {
                    return Err(cx.err(key, "unknown field"));
                }
                Strictness::Lenient => warnings.push(format!(
                    "line {}, {}: unknown field '{}' ignored",
                    cx.line,
                    if cx.path.is_empty() {
                        "record"
                    } else {
                        cx.path
                    },
                    key
                )),
            }
        }
    }
    Ok(())
}

fn string_field(
    map: &serde_json::Map<String, Value>,
    key: &str,
    cx: &FieldCx,
) -> Result<Option<String>, ReadError> {
    match map.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(_) => Err(cx.err(key, "expected a string")),
    }
}

fn words_field(
    map: &serde_json::Map<String, Value>,
    cx: &FieldCx,
) -> Result<Option<Vec<String>>, ReadError> {
    match map.get("words") {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Array(items)) => {
            let mut words = Vec::with_capacity(items.len());
            for item in items {
                match item {
                    Value::String(s) => words.push(s.clone()),
                    _ => return Err(cx.err("words", "expected an array of strings")),
                }
            }
            Ok(Some(words))
        }
        Some(_) => Err(cx.err("words", "expected an array of strings")),
    }
}

fn vocab<T: Copy>(
    raw: Option<String>,
    table: &[(&str, T)],
    default: T,
    key: &str,
    cx: &FieldCx,
) -> Result<T, ReadError> {
    match raw {
        None => Ok(default),
        Some(s) => table
            .iter()
            .find(|(name, _)| *name == s)
            .map(|&(_, v)| v)
            .ok_or_else(|| {
                let options: Vec<&str> = table.iter().map(|&(n, _)| n).collect();
                cx.err(
                    key,
                    format!(
                        "unknown {key} '{s}' (expected one of: {})",
                        options.join(", ")
                    ),
                )
            }),
    }
}

const NUMBERS: &[(&str, Number)] = &[("singular", Number::Singular), ("plural", Number::Plural)];
const DETERMINERS: &[(&str, Determiner)] = &[
    ("definite", Determiner::Definite),
    ("indefinite", Determiner::Indefinite),
    ("demonstrative", Determiner::Demonstrative),
    ("possessive", Determiner::Possessive),
    ("quantifier", Determiner::Quantifier),
    ("bare", Determiner::Bare),
];
const PRONOUNS: &[(&str, PronounClass)] = &[
    ("personal", PronounClass::Personal),
    ("demonstrative", PronounClass::Demonstrative),
    ("none", PronounClass::None),
];
const CONSTRUCTIONS: &[(&str, Construction)] = &[
    ("cleft", Construction::Cleft),
    ("fronted", Construction::Fronted),
    ("prompted", Construction::Prompted),
    ("none", Construction::None),
];
const ROLES: &[(&str, Role)] = &[
    ("S", Role::S),
    ("V", Role::V),
    ("O", Role::O),
    ("X", Role::X),
];

/// Plural by default exactly when the annotated head lemma looks plural.
fn default_number(head_lemma: &str) -> Number {
    if head_lemma.ends_with('s') && !head_lemma.ends_with("ss") {
        Number::Plural
    } else {
        Number::Singular
    }
}

const PART_FIELDS: &[&str] = &[
    "id",
    "words",
    "head_lemma",
    "number",
    "determiner",
    "antecedent_id",
];

fn read_part(
    value: &Value,
    line: usize,
    path: &str,
    default_id: String,
    strictness: Strictness,
    warnings: &mut Vec<String>,
) -> Result<NounPhrase, ReadError> {
    let cx = FieldCx { line, path };
    let map = expect_object(value, &cx, "genitive part")?;
    check_keys(map, PART_FIELDS, &cx, strictness, warnings)?;
    let words =
        words_field(map, &cx)?.ok_or_else(|| cx.err("words", "genitive part needs words"))?;
    if words.is_empty() {
        return Err(cx.err("words", "genitive part needs at least one word"));
    }
    let head_lemma = string_field(map, "head_lemma", &cx)?
        .ok_or_else(|| cx.err("head_lemma", "genitive part needs a head lemma"))?;
    let number = vocab(
        string_field(map, "number", &cx)?,
        NUMBERS,
        default_number(&head_lemma),
        "number",
        &cx,
    )?;
    let determiner = vocab(
        string_field(map, "determiner", &cx)?,
        DETERMINERS,
        Determiner::Bare,
        "determiner",
        &cx,
    )?;
    let id = string_field(map, "id", &cx)?.unwrap_or(default_id);
    let antecedent = string_field(map, "antecedent_id", &cx)?.map(EntityId::new);
    Ok(NounPhrase {
        id: EntityId::new(id),
        words,
        head_lemma,
        number,
        determiner,
        pronoun: PronounClass::None,
        construction: Construction::None,
        genitive: None,
        antecedent,
    })
}

const CONSTITUENT_FIELDS: &[&str] = &[
    "role",
    "id",
    "words",
    "head_lemma",
    "number",
    "determiner",
    "pronoun",
    "construction",
    "genitive",
    "antecedent_id",
    "target_role_override",
    "target_length",
];

fn read_constituent(
    value: &Value,
    line: usize,
    utterance: usize,
    position: usize,
    strictness: Strictness,
    warnings: &mut Vec<String>,
) -> Result<Constituent, ReadError> {
    let path = format!("constituents[{position}]");
    let cx = FieldCx { line, path: &path };
    let map = expect_object(value, &cx, "constituent")?;
    check_keys(map, CONSTITUENT_FIELDS, &cx, strictness, warnings)?;

    let source_role = vocab(
        Some(
            string_field(map, "role", &cx)?
                .ok_or_else(|| cx.err("role", "constituent needs a role"))?,
        ),
        ROLES,
        Role::X,
        "role",
        &cx,
    )?;
    let role = match string_field(map, "target_role_override", &cx)? {
        Some(raw) => vocab(Some(raw), ROLES, source_role, "target_role_override", &cx)?,
        None => source_role,
    };
    let target_length = match map.get("target_length") {
        None | Some(Value::Null) => None,
        Some(Value::Number(n)) => {
            let v = n
                .as_u64()
                .filter(|&v| v >= 1)
                .ok_or_else(|| cx.err("target_length", "expected a positive integer"))?;
            Some(v as u32)
        }
        Some(_) => return Err(cx.err("target_length", "expected a positive integer")),
    };

    let words = words_field(map, &cx)?;
    let head_lemma = string_field(map, "head_lemma", &cx)?;
    let nominal = words.is_some() || head_lemma.is_some() || map.contains_key("genitive");
    let np = if nominal {
        if source_role == Role::V {
            return Err(cx.err("role", "verb constituents carry no noun phrase fields"));
        }
        let words = words.ok_or_else(|| cx.err("words", "nominal constituent needs words"))?;
        if words.is_empty() {
            return Err(cx.err("words", "nominal constituent needs at least one word"));
        }
        let head_lemma = head_lemma
            .ok_or_else(|| cx.err("head_lemma", "nominal constituent needs a head lemma"))?;
        let id =
            string_field(map, "id", &cx)?.unwrap_or_else(|| format!("u{utterance}.{position}"));
        let number = vocab(
            string_field(map, "number", &cx)?,
            NUMBERS,
            default_number(&head_lemma),
            "number",
            &cx,
        )?;
        let determiner = vocab(
            string_field(map, "determiner", &cx)?,
            DETERMINERS,
            Determiner::Bare,
            "determiner",
            &cx,
        )?;
        let pronoun = vocab(
            string_field(map, "pronoun", &cx)?,
            PRONOUNS,
            PronounClass::None,
            "pronoun",
            &cx,
        )?;
        let construction = vocab(
            string_field(map, "construction", &cx)?,
            CONSTRUCTIONS,
            Construction::None,
            "construction",
            &cx,
        )?;
        let genitive = match map.get("genitive") {
            None | Some(Value::Null) => None,
            Some(g) => {
                let gpath = format!("{path}.genitive");
                let gcx = FieldCx { line, path: &gpath };
                let gmap = expect_object(g, &gcx, "genitive")?;
                check_keys(
                    gmap,
                    &["possessor", "possessed"],
                    &gcx,
                    strictness,
                    warnings,
                )?;
                let possessor = gmap
                    .get("possessor")
                    .ok_or_else(|| gcx.err("possessor", "missing"))?;
                let possessed = gmap
                    .get("possessed")
                    .ok_or_else(|| gcx.err("possessed", "missing"))?;
                Some(Box::new(GenitiveParts {
                    possessor: read_part(
                        possessor,
                        line,
                        &format!("{gpath}.possessor"),
                        format!("{id}.possessor"),
                        strictness,
                        warnings,
                    )?,
                    possessed: read_part(
                        possessed,
                        line,
                        &format!("{gpath}.possessed"),
                        format!("{id}.possessed"),
                        strictness,
                        warnings,
                    )?,
                }))
            }
        };
        let antecedent = string_field(map, "antecedent_id", &cx)?.map(EntityId::new);
        Some(NounPhrase {
            id: EntityId::new(id),
            words,
            head_lemma,
            number,
            determiner,
            pronoun,
            construction,
            genitive,
            antecedent,
        })
    } else {
        None
    };

    Ok(Constituent {
        role,
        source_role,
        np,
        source_position: position,
        target_length,
        omitted: false,
    })
}

/// Reads a line-delimited document from any buffered source. Blank lines
/// are skipped; every other line must hold one utterance record.
pub fn read_document(
    input: impl BufRead,
    source: &str,
    strictness: Strictness,
) -> Result<ReadOutcome, ReadError> {
    let mut warnings = Vec::new();
    let mut utterances = Vec::new();
    let mut declared: Vec<EntityId> = Vec::new();

    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let raw = line?;
        if raw.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&raw).map_err(|e| ReadError::Record {
            line: line_no,
            message: format!("invalid record: {e}"),
        })?;
        let cx = FieldCx {
            line: line_no,
            path: "",
        };
        let map = expect_object(&value, &cx, "utterance record")?;
        check_keys(
            map,
            &["text", "constituents"],
            &cx,
            strictness,
            &mut warnings,
        )?;
        let text = string_field(map, "text", &cx)?
            .ok_or_else(|| cx.err("text", "utterance record needs text"))?;
        let index = utterances.len();
        let mut constituents = Vec::new();
        if let Some(raw_constituents) = map.get("constituents") {
            let items = raw_constituents
                .as_array()
                .ok_or_else(|| cx.err("constituents", "expected an array"))?;
            for (position, item) in items.iter().enumerate() {
                constituents.push(read_constituent(
                    item,
                    line_no,
                    index,
                    position,
                    strictness,
                    &mut warnings,
                )?);
            }
        }

        // Antecedents must name an id already declared on an earlier line.
        for (position, c) in constituents.iter().enumerate() {
            let Some(np) = &c.np else { continue };
            let mut refs = vec![(&np.antecedent, String::new())];
            if let Some(gen) = &np.genitive {
                refs.push((&gen.possessor.antecedent, ".genitive.possessor".into()));
                refs.push((&gen.possessed.antecedent, ".genitive.possessed".into()));
            }
            for (antecedent, suffix) in refs {
                if let Some(ant) = antecedent {
                    if !declared.contains(ant) {
                        return Err(ReadError::DanglingAntecedent {
                            line: line_no,
                            field: format!("constituents[{position}]{suffix}.antecedent_id"),
                            id: ant.0.clone(),
                        });
                    }
                }
            }
        }
        for c in &constituents {
            if let Some(np) = &c.np {
                declared.push(np.id.clone());
                if let Some(gen) = &np.genitive {
                    declared.push(gen.possessor.id.clone());
                    declared.push(gen.possessed.id.clone());
                }
            }
        }

        utterances.push(Utterance {
            index,
            text,
            constituents,
        });
    }

    let document = Document {
        id: source.to_string(),
        utterances,
    };
    let violations = validate_document(&document);
    if !violations.is_empty() {
        let rendered: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(ReadError::Invalid(rendered.join("; ")));
    }
    Ok(ReadOutcome { document, warnings })
}

fn part_value(np: &NounPhrase) -> Value {
    let mut map = serde_json::Map::new();
    map.insert("id".into(), Value::String(np.id.0.clone()));
    map.insert(
        "words".into(),
        Value::Array(np.words.iter().map(|w| Value::String(w.clone())).collect()),
    );
    map.insert("head_lemma".into(), Value::String(np.head_lemma.clone()));
    map.insert(
        "number".into(),
        Value::String(vocab_name(NUMBERS, np.number).into()),
    );
    map.insert(
        "determiner".into(),
        Value::String(vocab_name(DETERMINERS, np.determiner).into()),
    );
    if let Some(ant) = &np.antecedent {
        map.insert("antecedent_id".into(), Value::String(ant.0.clone()));
    }
    Value::Object(map)
}

fn vocab_name<T: Copy + PartialEq>(table: &[(&'static str, T)], value: T) -> &'static str {
    table
        .iter()
        .find(|&&(_, v)| v == value)
        .map(|&(name, _)| name)
        .expect("value covered by vocabulary")
}

/// Serializes a document back into the line-delimited format. Reading the
/// output reproduces the document exactly.
pub fn write_document(doc: &Document) -> String {
    let mut out = String::new();
    for utt in &doc.utterances {
        let mut record = serde_json::Map::new();
        record.insert("text".into(), Value::String(utt.text.clone()));
        let mut constituents = Vec::new();
        let mut ordered: Vec<&Constituent> = utt.constituents.iter().collect();
        ordered.sort_by_key(|c| c.source_position);
        for c in ordered {
            let mut map = serde_json::Map::new();
            map.insert(
                "role".into(),
                Value::String(c.source_role.letter().to_string()),
            );
            if c.role != c.source_role {
                map.insert(
                    "target_role_override".into(),
                    Value::String(c.role.letter().to_string()),
                );
            }
            if let Some(len) = c.target_length {
                map.insert("target_length".into(), Value::Number(len.into()));
            }
            if let Some(np) = &c.np {
                map.insert("id".into(), Value::String(np.id.0.clone()));
                map.insert(
                    "words".into(),
                    Value::Array(np.words.iter().map(|w| Value::String(w.clone())).collect()),
                );
                map.insert("head_lemma".into(), Value::String(np.head_lemma.clone()));
                map.insert(
                    "number".into(),
                    Value::String(vocab_name(NUMBERS, np.number).into()),
                );
                map.insert(
                    "determiner".into(),
                    Value::String(vocab_name(DETERMINERS, np.determiner).into()),
                );
                map.insert(
                    "pronoun".into(),
                    Value::String(vocab_name(PRONOUNS, np.pronoun).into()),
                );
                map.insert(
                    "construction".into(),
                    Value::String(vocab_name(CONSTRUCTIONS, np.construction).into()),
                );
                if let Some(gen) = &np.genitive {
                    let mut gmap = serde_json::Map::new();
                    gmap.insert("possessor".into(), part_value(&gen.possessor));
                    gmap.insert("possessed".into(), part_value(&gen.possessed));
                    map.insert("genitive".into(), Value::Object(gmap));
                }
                if let Some(ant) = &np.antecedent {
                    map.insert("antecedent_id".into(), Value::String(ant.0.clone()));
                }
            }
            constituents.push(Value::Object(map));
        }
        record.insert("constituents".into(), Value::Array(constituents));
        out.push_str(&Value::Object(record).to_string());
        out.push('\n');
    }
    out
}
