//! Constituent-order pattern language shared by the preference,
//! discrimination and preprocessing tables.
//!
//! A pattern is a sequence of role letters (`S`, `V`, `O`, `X`), the `Prim`
//! placeholder, the gap marker `-` (zero or more constituents of any role)
//! and optional groups in parentheses. Adjacent letters with no gap between
//! them must match adjacent constituents; a missing leading or trailing gap
//! anchors the pattern to the start or end of the clause. An optional group
//! such as `(X-)` contributes its body or nothing; the dash closing a group
//! is the separator to the next element, so `(X-)(V-)Prim-` admits exactly
//! an optional clause-initial adjunct, an optional verb, then the primary,
//! then anything.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::model::Role;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternToken {
    Role(Role),
    Prim,
}

impl PatternToken {
    fn resolve(self, prim: Option<Role>) -> Option<Role> {
        match self {
            PatternToken::Role(r) => Some(r),
            PatternToken::Prim => prim,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternAtom {
    Literal(PatternToken),
    Wildcard,
    Optional(Vec<PatternAtom>),
}

/// A parsed constituent-order pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderPattern {
    atoms: Vec<PatternAtom>,
}

#[derive(Debug, Error, PartialEq)]
pub enum PatternError {
    #[error("column {column}: {message}")]
    Parse { column: usize, message: String },
    #[error("pattern contains the Prim placeholder but no binding was supplied")]
    MissingPrimBinding,
}

fn parse_atoms(
    chars: &[(usize, char)],
    pos: &mut usize,
    in_group: bool,
) -> Result<Vec<PatternAtom>, PatternError> {
    let mut atoms = Vec::new();
    while *pos < chars.len() {
        let (col, c) = chars[*pos];
        match c {
            '-' => {
                if matches!(atoms.last(), Some(PatternAtom::Wildcard)) {
                    return Err(PatternError::Parse {
                        column: col,
                        message: "consecutive gap markers".into(),
                    });
                }
                atoms.push(PatternAtom::Wildcard);
                *pos += 1;
            }
            'S' | 'V' | 'O' | 'X' => {
                atoms.push(PatternAtom::Literal(PatternToken::Role(
                    Role::from_letter(c).unwrap(),
                )));
                *pos += 1;
            }
            'P' => {
                let rest: String = chars[*pos..].iter().take(4).map(|&(_, ch)| ch).collect();
                if rest == "Prim" {
                    atoms.push(PatternAtom::Literal(PatternToken::Prim));
                    *pos += 4;
                } else {
                    return Err(PatternError::Parse {
                        column: col,
                        message: format!("unknown symbol '{c}'"),
                    });
                }
            }
            '(' => {
                if in_group {
                    return Err(PatternError::Parse {
                        column: col,
                        message: "optional groups cannot nest".into(),
                    });
                }
                *pos += 1;
                let mut body = parse_atoms(chars, pos, true)?;
                if *pos >= chars.len() || chars[*pos].1 != ')' {
                    return Err(PatternError::Parse {
                        column: col,
                        message: "unbalanced parenthesis".into(),
                    });
                }
                *pos += 1;
                // The dash closing a group body is the separator to the next
                // element, not a gap inside the group.
                if matches!(body.last(), Some(PatternAtom::Wildcard)) {
                    body.pop();
                }
                if body.is_empty() {
                    return Err(PatternError::Parse {
                        column: col,
                        message: "empty optional group".into(),
                    });
                }
                atoms.push(PatternAtom::Optional(body));
            }
            ')' => {
                if in_group {
                    return Ok(atoms);
                }
                return Err(PatternError::Parse {
                    column: col,
                    message: "unbalanced parenthesis".into(),
                });
            }
            other => {
                return Err(PatternError::Parse {
                    column: col,
                    message: format!("unknown symbol '{other}'"),
                });
            }
        }
    }
    if in_group {
        return Err(PatternError::Parse {
            column: chars.last().map(|&(c, _)| c + 1).unwrap_or(0),
            message: "unbalanced parenthesis".into(),
        });
    }
    Ok(atoms)
}

/// Parses a pattern string such as `-V-S-O-`, `OSVX` or `(X-)(V-)Prim-`.
pub fn parse_pattern(text: &str) -> Result<OrderPattern, PatternError> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    if chars.is_empty() {
        return Err(PatternError::Parse {
            column: 0,
            message: "empty pattern".into(),
        });
    }
    let mut pos = 0;
    let atoms = parse_atoms(&chars, &mut pos, false)?;
    Ok(OrderPattern { atoms })
}

fn render_atoms(atoms: &[PatternAtom], out: &mut String) {
    for atom in atoms {
        match atom {
            PatternAtom::Wildcard => out.push('-'),
            PatternAtom::Literal(PatternToken::Role(r)) => out.push(r.letter()),
            PatternAtom::Literal(PatternToken::Prim) => out.push_str("Prim"),
            PatternAtom::Optional(body) => {
                out.push('(');
                render_atoms(body, out);
                out.push_str("-)");
            }
        }
    }
}

impl OrderPattern {
    pub fn atoms(&self) -> &[PatternAtom] {
        &self.atoms
    }

    /// No leading gap: the first element must sit clause-initially.
    pub fn anchored_start(&self) -> bool {
        !matches!(self.atoms.first(), Some(PatternAtom::Wildcard))
    }

    /// No trailing gap: the last element must sit clause-finally.
    pub fn anchored_end(&self) -> bool {
        !matches!(self.atoms.last(), Some(PatternAtom::Wildcard))
    }

    pub fn contains_prim(&self) -> bool {
        fn walk(atoms: &[PatternAtom]) -> bool {
            atoms.iter().any(|a| match a {
                PatternAtom::Literal(PatternToken::Prim) => true,
                PatternAtom::Optional(body) => walk(body),
                _ => false,
            })
        }
        walk(&self.atoms)
    }

    /// Roles named by literals outside optional groups, with the placeholder
    /// resolved through `prim`. These are the roles a clause must offer for
    /// the pattern to be satisfiable at all.
    pub fn required_roles(&self, prim: Option<Role>) -> BTreeSet<Role> {
        self.atoms
            .iter()
            .filter_map(|a| match a {
                PatternAtom::Literal(tok) => tok.resolve(prim),
                _ => None,
            })
            .collect()
    }

    /// True when `order` is generated by this pattern.
    pub fn matches(&self, order: &[Role], prim: Option<Role>) -> Result<bool, PatternError> {
        if self.contains_prim() && prim.is_none() {
            return Err(PatternError::MissingPrimBinding);
        }
        let atoms: Vec<&PatternAtom> = self.atoms.iter().collect();
        Ok(match_seq(&atoms, order, prim))
    }

    /// Canonical string form; `parse_pattern(render())` reproduces the
    /// pattern.
    pub fn render(&self) -> String {
        let mut out = String::new();
        render_atoms(&self.atoms, &mut out);
        out
    }
}

impl fmt::Display for OrderPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

fn match_seq(atoms: &[&PatternAtom], seq: &[Role], prim: Option<Role>) -> bool {
    let Some((first, rest)) = atoms.split_first() else {
        return seq.is_empty();
    };
    match first {
        PatternAtom::Literal(tok) => {
            let Some(role) = tok.resolve(prim) else {
                return false;
            };
            !seq.is_empty() && seq[0] == role && match_seq(rest, &seq[1..], prim)
        }
        PatternAtom::Wildcard => (0..=seq.len()).any(|k| match_seq(rest, &seq[k..], prim)),
        PatternAtom::Optional(body) => {
            if match_seq(rest, seq, prim) {
                return true;
            }
            let mut expanded: Vec<&PatternAtom> = body.iter().collect();
            expanded.extend_from_slice(rest);
            match_seq(&expanded, seq, prim)
        }
    }
}

/// All distinct arrangements of a role multiset.
pub fn unique_permutations(roles: &[Role]) -> Vec<Vec<Role>> {
    let mut pool = roles.to_vec();
    pool.sort();
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(pool.len());
    let mut used = vec![false; pool.len()];
    permute(&pool, &mut used, &mut current, &mut out);
    out
}

fn permute(pool: &[Role], used: &mut [bool], current: &mut Vec<Role>, out: &mut Vec<Vec<Role>>) {
    if current.len() == pool.len() {
        out.push(current.clone());
        return;
    }
    let mut last: Option<Role> = None;
    for i in 0..pool.len() {
        if used[i] || last == Some(pool[i]) {
            continue;
        }
        last = Some(pool[i]);
        used[i] = true;
        current.push(pool[i]);
        permute(pool, used, current, out);
        current.pop();
        used[i] = false;
    }
}

/// Every arrangement of `roles` satisfying all applicable constraints. A
/// constraint naming a role absent from the multiset is skipped as vacuous.
pub fn satisfying_orders(
    constraints: &[(&OrderPattern, Option<Role>)],
    roles: &[Role],
) -> Result<BTreeSet<Vec<Role>>, PatternError> {
    let present: BTreeSet<Role> = roles.iter().copied().collect();
    let mut applicable = Vec::new();
    for (pattern, prim) in constraints {
        if pattern.contains_prim() && prim.is_none() {
            return Err(PatternError::MissingPrimBinding);
        }
        if pattern.required_roles(*prim).is_subset(&present) {
            applicable.push((*pattern, *prim));
        }
    }
    let mut out = BTreeSet::new();
    for order in unique_permutations(roles) {
        let mut ok = true;
        for (pattern, prim) in &applicable {
            if !pattern.matches(&order, *prim)? {
                ok = false;
                break;
            }
        }
        if ok {
            out.insert(order);
        }
    }
    Ok(out)
}
