//! Table and variable declarations: the finite universes for validation
//! and analysis.
//!
//! The schema file is line oriented:
//!
//! ```text
//! # comment
//! @unit id
//! @time year
//! person.age : integer [0, 150]
//! person.income : numeric nullable
//! person.job : categorical {employed, unemployed}
//! ```
//!
//! `@unit` and `@time` name the key columns of the data files (defaults
//! `id` and `time`; `@time none` disables the time dimension). A declaration
//! without a table prefix goes into the table `default`.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::logic::TriBool;
use crate::model::Value;
use crate::scalar::{format_rational, parse_rational};
use crate::Rational;

pub const DEFAULT_TABLE: &str = "default";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    Numeric,
    Integer,
    Categorical,
}

impl fmt::Display for VarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VarKind::Numeric => "numeric",
            VarKind::Integer => "integer",
            VarKind::Categorical => "categorical",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableDecl {
    pub name: String,
    pub kind: VarKind,
    /// Inclusive bounds for numeric and integer variables.
    pub bounds: Option<(Rational, Rational)>,
    /// Levels of a categorical variable, in declaration order.
    pub levels: Vec<String>,
    pub nullable: bool,
}

impl VariableDecl {
    pub fn numeric(name: impl Into<String>) -> Self {
        VariableDecl {
            name: name.into(),
            kind: VarKind::Numeric,
            bounds: None,
            levels: Vec::new(),
            nullable: false,
        }
    }

    pub fn integer(name: impl Into<String>) -> Self {
        VariableDecl {
            kind: VarKind::Integer,
            ..VariableDecl::numeric(name)
        }
    }

    pub fn categorical<I, S>(name: impl Into<String>, levels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        VariableDecl {
            kind: VarKind::Categorical,
            levels: levels.into_iter().map(Into::into).collect(),
            ..VariableDecl::numeric(name)
        }
    }

    pub fn with_bounds(mut self, low: Rational, high: Rational) -> Self {
        self.bounds = Some((low, high));
        self
    }

    pub fn nullable(mut self) -> Self {
        self.nullable = true;
        self
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.kind, VarKind::Numeric | VarKind::Integer)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    pub tables: BTreeMap<String, Vec<VariableDecl>>,
    pub unit_column: String,
    pub time_column: Option<String>,
}

impl Default for Schema {
    fn default() -> Self {
        Schema {
            tables: BTreeMap::new(),
            unit_column: "id".to_string(),
            time_column: Some("time".to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("schema line {line}: {message}")]
    SchemaSyntax { line: usize, message: String },
    #[error("variable {table}.{name} declared more than once")]
    DuplicateVariable { table: String, name: String },
}

impl Schema {
    /// Adds a declaration, rejecting duplicates within the table.
    pub fn declare(&mut self, table: &str, decl: VariableDecl) -> Result<(), SchemaError> {
        let vars = self.tables.entry(table.to_string()).or_default();
        if vars.iter().any(|v| v.name == decl.name) {
            return Err(SchemaError::DuplicateVariable {
                table: table.to_string(),
                name: decl.name,
            });
        }
        vars.push(decl);
        Ok(())
    }

    pub fn variable(&self, table: &str, name: &str) -> Option<&VariableDecl> {
        self.tables.get(table)?.iter().find(|v| v.name == name)
    }

    /// Tables declaring a variable called `name`.
    pub fn tables_with(&self, name: &str) -> Vec<&str> {
        self.tables
            .iter()
            .filter(|(_, vars)| vars.iter().any(|v| v.name == name))
            .map(|(t, _)| t.as_str())
            .collect()
    }

    pub fn has_table(&self, table: &str) -> bool {
        self.tables.contains_key(table)
    }
}

pub fn parse_schema(text: &str) -> Result<Schema, SchemaError> {
    let mut schema = Schema::default();
    for (index, raw) in text.lines().enumerate() {
        let line_no = index + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |message: String| SchemaError::SchemaSyntax { line: line_no, message };
        if let Some(rest) = line.strip_prefix('@') {
            let mut parts = rest.split_whitespace();
            let directive = parts.next().unwrap_or("");
            let argument = parts
                .next()
                .ok_or_else(|| syntax(format!("@{directive} needs a column name")))?;
            if parts.next().is_some() {
                return Err(syntax(format!("trailing input after @{directive}")));
            }
            match directive {
                "unit" => schema.unit_column = argument.to_string(),
                "time" if argument == "none" => schema.time_column = None,
                "time" => schema.time_column = Some(argument.to_string()),
                other => return Err(syntax(format!("unknown directive @{other}"))),
            }
            continue;
        }
        let (target, spec) = line
            .split_once(':')
            .ok_or_else(|| syntax("expected `table.variable : kind`".to_string()))?;
        let (table, name) = match target.trim().split_once('.') {
            Some((t, v)) => (t.trim(), v.trim()),
            None => (DEFAULT_TABLE, target.trim()),
        };
        if !is_identifier(table) || !is_identifier(name) {
            return Err(syntax(format!("invalid variable name `{}`", target.trim())));
        }
        let decl = parse_decl(name, spec.trim()).map_err(syntax)?;
        schema.declare(table, decl)?;
    }
    Ok(schema)
}

fn parse_decl(name: &str, spec: &str) -> Result<VariableDecl, String> {
    let kind_end = spec.find(|c: char| !c.is_ascii_alphabetic()).unwrap_or(spec.len());
    let (kind_word, mut rest) = spec.split_at(kind_end);
    let mut decl = match kind_word {
        "numeric" => VariableDecl::numeric(name),
        "integer" => VariableDecl::integer(name),
        "categorical" => VariableDecl::categorical(name, Vec::<String>::new()),
        "" => return Err("missing variable kind".to_string()),
        other => return Err(format!("unknown variable kind `{other}`")),
    };
    rest = rest.trim_start();
    if decl.kind == VarKind::Categorical {
        let body = rest
            .strip_prefix('{')
            .ok_or("categorical variables need a level set `{a, b}`")?;
        let close = body.find('}').ok_or("unterminated level set")?;
        let mut levels: Vec<String> = Vec::new();
        for level in body[..close].split(',') {
            let level = level.trim();
            let level = level
                .strip_prefix('"')
                .and_then(|l| l.strip_suffix('"'))
                .unwrap_or(level);
            if level.is_empty() {
                continue;
            }
            if levels.iter().any(|l| l == level) {
                return Err(format!("level `{level}` listed twice"));
            }
            levels.push(level.to_string());
        }
        if levels.is_empty() {
            return Err("categorical level set is empty".to_string());
        }
        decl.levels = levels;
        rest = body[close + 1..].trim_start();
    } else if let Some(body) = rest.strip_prefix('[') {
        let close = body.find(']').ok_or("unterminated bounds")?;
        let (low, high) = body[..close]
            .split_once(',')
            .ok_or("bounds need the form [low, high]")?;
        let low = parse_rational(low).ok_or_else(|| format!("invalid bound `{}`", low.trim()))?;
        let high = parse_rational(high).ok_or_else(|| format!("invalid bound `{}`", high.trim()))?;
        if low > high {
            return Err(format!(
                "empty bounds [{}, {}]",
                format_rational(&low),
                format_rational(&high)
            ));
        }
        decl.bounds = Some((low, high));
        rest = body[close + 1..].trim_start();
    }
    match rest.trim() {
        "" => {}
        "nullable" => decl.nullable = true,
        other => return Err(format!("unexpected `{other}`")),
    }
    Ok(decl)
}

fn is_identifier(text: &str) -> bool {
    let mut chars = text.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Tests a single value against its declared domain.
///
/// Never returns NA: a present value is always decidably in or out of the
/// domain, and a missing one is allowed exactly when the variable is
/// nullable.
pub fn check_domain(value: &Value, decl: &VariableDecl) -> TriBool {
    let inside = match value {
        Value::Na => decl.nullable,
        Value::Number(n) => match decl.kind {
            VarKind::Categorical => false,
            VarKind::Integer if !n.is_integer() => false,
            _ => decl.bounds.as_ref().is_none_or(|(low, high)| low <= n && n <= high),
        },
        Value::Text(t) => decl.kind == VarKind::Categorical && decl.levels.iter().any(|l| l == t),
    };
    TriBool::from_bool(inside)
}
