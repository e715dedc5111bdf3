//! Datasets as total maps from composite keys to values.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::scalar::{format_rational, parse_rational};
use crate::Rational;

/// A single observed value. Integers are rationals with unit denominator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Number(Rational),
    Text(String),
    Na,
}

impl Value {
    pub fn number(value: impl Into<Rational>) -> Self {
        Value::Number(value.into())
    }

    pub fn int(value: i64) -> Self {
        Value::Number(Rational::from_integer(value.into()))
    }

    pub fn text(value: impl Into<String>) -> Self {
        Value::Text(value.into())
    }

    pub fn is_na(&self) -> bool {
        matches!(self, Value::Na)
    }

    pub fn as_number(&self) -> Option<&Rational> {
        match self {
            Value::Number(n) => Some(n),
            _ => None,
        }
    }

    /// Interprets a raw cell: empty or `NA` is missing, a decimal or `p/q`
    /// literal is a number, anything else is text.
    pub fn parse_cell(cell: &str) -> Value {
        let trimmed = cell.trim();
        if trimmed.is_empty() || trimmed == "NA" {
            return Value::Na;
        }
        match parse_rational(trimmed) {
            Some(n) => Value::Number(n),
            None => Value::Text(cell.to_string()),
        }
    }

    /// Inverse of [`Value::parse_cell`] for values that came from it.
    pub fn to_cell(&self) -> String {
        match self {
            Value::Number(n) => format_rational(n),
            Value::Text(t) => t.clone(),
            Value::Na => "NA".to_string(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(n) => f.write_str(&format_rational(n)),
            Value::Text(t) => write!(f, "{t:?}"),
            Value::Na => f.write_str("NA"),
        }
    }
}

/// A measurement occasion. `None` is the single occasion of data without a
/// time dimension.
pub type Occasion = Option<String>;

/// The key of a data point: unit type (table), occasion, unit and attribute.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Key {
    pub table: String,
    pub time: Occasion,
    pub unit: String,
    pub variable: String,
}

impl Key {
    pub fn new(
        table: impl Into<String>,
        time: Option<&str>,
        unit: impl Into<String>,
        variable: impl Into<String>,
    ) -> Self {
        Key {
            table: table.into(),
            time: time.map(str::to_string),
            unit: unit.into(),
            variable: variable.into(),
        }
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.time {
            Some(t) => write!(f, "({}, {}, {}, {})", self.table, t, self.unit, self.variable),
            None => write!(f, "({}, {}, {})", self.table, self.unit, self.variable),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataPoint {
    pub key: Key,
    pub value: Value,
}

impl DataPoint {
    pub fn new(key: Key, value: Value) -> Self {
        DataPoint { key, value }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("key {0} occurs more than once")]
    DuplicateKey(Key),
    #[error("key {0} is not in the declared key set")]
    UnknownKey(Key),
    #[error("key {0} is not in the dataset")]
    MissingKey(Key),
}

/// A total assignment of values to a finite key set.
///
/// Every key of the key set maps to exactly one value; absent declared keys
/// are bound to [`Value::Na`] at construction.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dataset {
    points: BTreeMap<Key, Value>,
}

impl Dataset {
    pub fn new(points: Vec<DataPoint>, declared_keys: Option<&BTreeSet<Key>>) -> Result<Self, ModelError> {
        build_dataset(points, declared_keys)
    }

    pub fn get(&self, key: &Key) -> Result<&Value, ModelError> {
        self.points.get(key).ok_or_else(|| ModelError::MissingKey(key.clone()))
    }

    pub fn contains_key(&self, key: &Key) -> bool {
        self.points.contains_key(key)
    }

    pub fn key_set(&self) -> impl Iterator<Item = &Key> {
        self.points.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Key, &Value)> {
        self.points.iter()
    }

    pub fn points(&self) -> Vec<DataPoint> {
        self.points
            .iter()
            .map(|(k, v)| DataPoint::new(k.clone(), v.clone()))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn tables(&self) -> BTreeSet<&str> {
        self.points.keys().map(|k| k.table.as_str()).collect()
    }

    /// Returns a copy with one value replaced. The key must already exist.
    pub fn with_value(&self, key: &Key, value: Value) -> Result<Self, ModelError> {
        if !self.points.contains_key(key) {
            return Err(ModelError::MissingKey(key.clone()));
        }
        let mut points = self.points.clone();
        points.insert(key.clone(), value);
        Ok(Dataset { points })
    }
}

/// Builds a dataset, enforcing that every key occurs exactly once.
///
/// With `declared_keys`, the key set is exactly the declared set: points
/// outside it are rejected and declared keys without a point map to NA.
pub fn build_dataset(points: Vec<DataPoint>, declared_keys: Option<&BTreeSet<Key>>) -> Result<Dataset, ModelError> {
    let mut map = BTreeMap::new();
    for point in points {
        if let Some(declared) = declared_keys {
            if !declared.contains(&point.key) {
                return Err(ModelError::UnknownKey(point.key));
            }
        }
        if map.contains_key(&point.key) {
            return Err(ModelError::DuplicateKey(point.key));
        }
        map.insert(point.key, point.value);
    }
    if let Some(declared) = declared_keys {
        for key in declared {
            map.entry(key.clone()).or_insert(Value::Na);
        }
    }
    Ok(Dataset { points: map })
}

pub fn get_value<'a>(dataset: &'a Dataset, key: &Key) -> Result<&'a Value, ModelError> {
    dataset.get(key)
}

/// Orders identifiers numerically when both parse as numbers, otherwise
/// lexically, with numbers first. Used for units and occasions.
pub fn compare_identifiers(a: &str, b: &str) -> Ordering {
    match (parse_rational(a), parse_rational(b)) {
        (Some(x), Some(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => a.cmp(b),
    }
}

pub fn compare_occasions(a: &Occasion, b: &Occasion) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some(x), Some(y)) => compare_identifiers(x, y),
    }
}
