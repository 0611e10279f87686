//! Provenance-annotated ontology-based data access over DL-Lite.
//!
//! Annotated ontologies, GAV mappings and data produce provenance-annotated
//! virtual assertions. Entailment of annotated Boolean conjunctive queries is
//! decided by a provenance-aware PerfectRef rewriting over a marked instance,
//! and the provenance polynomial of a query is computed under fully
//! idempotent semirings. A canonical-model chase serves as an independent
//! oracle for both.

pub mod cli;
pub mod entail;
pub mod error;
pub mod kb;
pub mod oracle;
pub mod parse;
pub mod provcalc;
pub mod query;
pub mod rewrite;
pub mod semiring;

pub use error::{Error, ParseError, Result};
