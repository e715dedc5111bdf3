//! Data validation over key-value datasets.
//!
//! * [`model`]: datasets as total maps from (table, time, unit, variable)
//!   keys to values, with `NA` for missing data.
//! * [`schema`]: variable domains.
//! * [`lang`]: the rule language.
//! * [`eval`]: three-valued evaluation of rules against a dataset.
//! * [`classify`]: validation levels 0 to 4.
//! * [`analyzer`]: exact feasibility analysis and simplification of rule sets.
//! * [`cli`]: the batch front end used by the `validus` binary.

pub mod analyzer;
pub mod classify;
pub mod cli;
pub mod eval;
pub mod lang;
pub mod logic;
pub mod model;
pub mod scalar;
pub mod schema;

pub use num_rational::BigRational;

/// Exact number type of the data model.
pub type Rational = BigRational;

/// `i64`-backed rationals, for small analyzer workloads.
pub type SmallRational = num_rational::Rational64;

pub type ConstraintSystem = analyzer::ConstraintSystem<Rational>;
pub type Atom = analyzer::Atom<Rational>;
pub type Clause = analyzer::Clause<Rational>;
pub type Finding = analyzer::Finding<Rational>;
pub type Interval = analyzer::Interval<Rational>;
pub type Assignment = analyzer::Assignment<Rational>;

pub use classify::{classify_rule, RuleSignature};
pub use lang::{parse_rules, Rule, RuleSet};
pub use logic::TriBool;
pub use model::{Dataset, Key, Value};
pub use scalar::Scalar;
pub use schema::{parse_schema, Schema};
