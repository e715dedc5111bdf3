use std::collections::BTreeSet;

use super::ast::*;

/// Which parts of the key a rule touches, as far as its syntax shows.
///
/// Unqualified references belong to the rule's home table. When the rule
/// names exactly one table explicitly, that table is the home table;
/// otherwise unqualified references are attributed to an unnamed default
/// table (`None`).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SpanReport {
    pub tables: BTreeSet<Option<String>>,
    /// Distinct `(table, variable)` pairs.
    pub variables: BTreeSet<(Option<String>, String)>,
    pub unit_aggregate: bool,
    pub time_aggregate: bool,
    pub max_lag: u32,
}

pub fn referenced_signature(rule: &Rule) -> SpanReport {
    expr_span(&rule.body)
}

pub fn expr_span(expr: &Expr) -> SpanReport {
    let mut refs: Vec<&VarRef> = Vec::new();
    let mut report = SpanReport::default();
    expr.walk(&mut |node| match node {
        Expr::Var(v) => refs.push(v),
        Expr::Aggregate { axis, .. } => {
            report.unit_aggregate |= axis.spans_units();
            report.time_aggregate |= axis.spans_times();
        }
        _ => {}
    });
    let named: BTreeSet<&String> = refs.iter().filter_map(|v| v.table.as_ref()).collect();
    let home: Option<String> = if named.len() == 1 {
        named.iter().next().map(|t| (*t).clone())
    } else {
        None
    };
    for var in refs {
        let table = var.table.clone().or_else(|| home.clone());
        report.tables.insert(table.clone());
        report.variables.insert((table, var.variable.clone()));
        report.max_lag = report.max_lag.max(var.lag);
    }
    if report.tables.is_empty() {
        report.tables.insert(home);
    }
    report
}
