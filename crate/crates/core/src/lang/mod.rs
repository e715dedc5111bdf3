//! The rule language: syntax tree, parser, canonical formatter, negation
//! and the span report consumed by the classifier.
//!
//! ```text
//! r1: age >= 0
//! r2: if (job == "employed") age >= 15
//! r3: mean(age) >= 5
//! r4: abs(price - price@1) <= 0.1 * price@1
//! ```

mod ast;
mod format;
mod negate;
mod parser;
mod span;

pub use ast::*;
pub use format::{format_expr, format_rule, format_ruleset};
pub use negate::{negate_expr, negate_rule};
pub use parser::{check_rule, parse_expr, parse_rules, LangError};
pub use span::{expr_span, referenced_signature, SpanReport};
