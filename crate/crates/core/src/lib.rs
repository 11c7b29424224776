//! Discourse salience analysis and constituent-order planning.
//!
//! The library scores every noun phrase of an English clause with a graded
//! center value, tracks reiteration and pronoun resolution across clauses,
//! and plans communicatively adequate constituent orders for the rendered
//! (free word-order) target clause through preference, discrimination and
//! preprocessing rule tables with full derivation traces.

pub mod engine;
pub mod ingest;
pub mod lexicon;
pub mod model;
pub mod patterns;
pub mod report;
pub mod scorer;
