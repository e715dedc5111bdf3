//! Validation levels: how many key dimensions a rule needs more than one
//! value of.
//!
//! A key is the quartet (unit type, occasion, unit, variable). For each
//! dimension a rule is `s` (single value) or `m` (multiple values); the
//! level is the number of `m`s. Because a unit has exactly one type and a
//! type fixes its variables, a rule spanning several types always spans
//! several units and several variables, which leaves ten admissible
//! signatures out of sixteen.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::lang::{referenced_signature, Rule, SpanReport, VarRef};
use crate::schema::Schema;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Span {
    Single,
    Multiple,
}

impl Span {
    fn from_multiple(multiple: bool) -> Self {
        if multiple {
            Span::Multiple
        } else {
            Span::Single
        }
    }

    fn letter(self) -> char {
        match self {
            Span::Single => 's',
            Span::Multiple => 'm',
        }
    }
}

/// Signature over (type, time, unit, variable), in that order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RuleSignature {
    table: Span,
    time: Span,
    unit: Span,
    variable: Span,
}

impl RuleSignature {
    /// Returns `None` for the six excluded combinations (multiple types with
    /// a single unit or a single variable).
    pub fn new(table: Span, time: Span, unit: Span, variable: Span) -> Option<Self> {
        if table == Span::Multiple && (unit == Span::Single || variable == Span::Single) {
            return None;
        }
        Some(RuleSignature {
            table,
            time,
            unit,
            variable,
        })
    }

    pub fn table(&self) -> Span {
        self.table
    }

    pub fn time(&self) -> Span {
        self.time
    }

    pub fn unit(&self) -> Span {
        self.unit
    }

    pub fn variable(&self) -> Span {
        self.variable
    }

    pub fn level(&self) -> u8 {
        level_of(self)
    }

    /// The ten admissible signatures, by level then lexically.
    pub fn all() -> Vec<RuleSignature> {
        let spans = [Span::Single, Span::Multiple];
        let mut all = Vec::new();
        for &table in &spans {
            for &time in &spans {
                for &unit in &spans {
                    for &variable in &spans {
                        all.extend(RuleSignature::new(table, time, unit, variable));
                    }
                }
            }
        }
        all.sort_by_key(|s| (s.level(), s.to_string()));
        all
    }
}

pub fn level_of(signature: &RuleSignature) -> u8 {
    [signature.table, signature.time, signature.unit, signature.variable]
        .iter()
        .filter(|s| **s == Span::Multiple)
        .count() as u8
}

impl fmt::Display for RuleSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for span in [self.table, self.time, self.unit, self.variable] {
            write!(f, "{}", span.letter())?;
        }
        Ok(())
    }
}

impl FromStr for RuleSignature {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, String> {
        let spans: Vec<Span> = text
            .chars()
            .map(|c| match c {
                's' => Ok(Span::Single),
                'm' => Ok(Span::Multiple),
                other => Err(format!("unexpected `{other}` in signature")),
            })
            .collect::<Result<_, _>>()?;
        if spans.len() != 4 {
            return Err(format!("signature `{text}` must have four letters"));
        }
        RuleSignature::new(spans[0], spans[1], spans[2], spans[3])
            .ok_or_else(|| format!("`{text}` is not an admissible signature"))
    }
}

impl Serialize for RuleSignature {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

pub fn signature_from_span(span: &SpanReport) -> RuleSignature {
    let multi_table = span.tables.len() > 1;
    RuleSignature::new(
        Span::from_multiple(multi_table),
        Span::from_multiple(span.max_lag > 0 || span.time_aggregate),
        Span::from_multiple(span.unit_aggregate || multi_table),
        Span::from_multiple(span.variables.len() > 1),
    )
    .expect("references to two tables always name two distinct variables")
}

/// Classifies a rule from its syntax alone.
pub fn classify_rule(rule: &Rule) -> RuleSignature {
    signature_from_span(&referenced_signature(rule))
}

/// Classifies a rule after resolving unqualified references against the
/// schema. Without a time column every rule is single-occasion.
pub fn classify_in(rule: &Rule, schema: &Schema) -> RuleSignature {
    let mut resolved = rule.clone();
    resolved.body.map_vars(&mut |var: &mut VarRef| {
        if var.table.is_none() {
            if let [only] = schema.tables_with(&var.variable)[..] {
                var.table = Some(only.to_string());
            }
        }
    });
    let mut span = referenced_signature(&resolved);
    if schema.time_column.is_none() {
        span.max_lag = 0;
        span.time_aggregate = false;
    }
    signature_from_span(&span)
}
