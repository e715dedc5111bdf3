//! Three-valued evaluation of rules against a dataset.
//!
//! Rules are evaluated per scope. A reference outside any aggregate needs a
//! concrete record, so such rules get one entry per (unit, occasion) of
//! their table. Aggregates collapse a dimension: `mean(x)` ranges over the
//! units of the current occasion, `mean(x, times)` over the occasions of the
//! current unit, `mean(x, all)` over the whole table. A rule whose every
//! reference sits inside unit aggregates therefore gets one entry per
//! occasion with unit `ALL`, and so on.
//!
//! Missing data, type mismatches, division by zero and lags reaching before
//! the first occasion all evaluate to NA. The last three also leave a
//! [`Diagnostic`].

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::lang::{AggAxis, AggFn, BinaryOp, BuiltinFn, Expr, RuleSet, UnaryOp, VarRef};
pub use crate::logic::{kleene_apply, LogicalOp, TriBool};
use crate::model::{compare_identifiers, compare_occasions, Dataset, Key, Occasion, Value};
use crate::schema::Schema;
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NaPolicy {
    /// Any NA in an aggregate's group makes the aggregate NA.
    #[default]
    Propagate,
    /// NAs are dropped; a group left empty is NA.
    Ignore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalOptions {
    pub na_policy: NaPolicy,
    pub diagnostics: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            na_policy: NaPolicy::Propagate,
            diagnostics: true,
        }
    }
}

/// Either one specific value or all of them.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Slot<T> {
    All,
    One(T),
}

impl<T> Slot<T> {
    pub fn as_one(&self) -> Option<&T> {
        match self {
            Slot::All => None,
            Slot::One(v) => Some(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scope {
    pub table: String,
    pub unit: Slot<String>,
    pub time: Slot<Occasion>,
}

impl Scope {
    pub fn record(table: &str, unit: &str, time: Option<&str>) -> Self {
        Scope {
            table: table.to_string(),
            unit: Slot::One(unit.to_string()),
            time: Slot::One(time.map(str::to_string)),
        }
    }

    fn sort_cmp(&self, other: &Scope) -> Ordering {
        self.table
            .cmp(&other.table)
            .then_with(|| match (&self.unit, &other.unit) {
                (Slot::All, Slot::All) => Ordering::Equal,
                (Slot::All, _) => Ordering::Less,
                (_, Slot::All) => Ordering::Greater,
                (Slot::One(a), Slot::One(b)) => compare_identifiers(a, b),
            })
            .then_with(|| match (&self.time, &other.time) {
                (Slot::All, Slot::All) => Ordering::Equal,
                (Slot::All, _) => Ordering::Less,
                (_, Slot::All) => Ordering::Greater,
                (Slot::One(a), Slot::One(b)) => compare_occasions(a, b),
            })
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let unit = match &self.unit {
            Slot::All => "ALL",
            Slot::One(u) => u,
        };
        match &self.time {
            Slot::All => write!(f, "{}[{unit}, ALL]", self.table),
            Slot::One(None) => write!(f, "{}[{unit}]", self.table),
            Slot::One(Some(t)) => write!(f, "{}[{unit}, {t}]", self.table),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticKind {
    TypeMismatch,
    DivisionByZero,
    UnresolvedReference,
}

impl DiagnosticKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticKind::TypeMismatch => "TypeMismatch",
            DiagnosticKind::DivisionByZero => "DivisionByZero",
            DiagnosticKind::UnresolvedReference => "UnresolvedReference",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub rule: String,
    pub scope: Scope,
    pub kind: DiagnosticKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub rule: String,
    pub scope: Scope,
    pub result: TriBool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RuleSummary {
    pub rule: String,
    pub passed: usize,
    pub failed: usize,
    pub na: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub entries: Vec<Entry>,
    pub summary: Vec<RuleSummary>,
    pub diagnostics: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn count(&self, result: TriBool) -> usize {
        self.entries.iter().filter(|e| e.result == result).count()
    }

    pub fn result(&self, rule: &str, scope: &Scope) -> Option<TriBool> {
        self.entries
            .iter()
            .find(|e| e.rule == rule && &e.scope == scope)
            .map(|e| e.result)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("rule {rule}: unknown variable `{name}`")]
    UnknownVariable { rule: String, name: String },
    #[error("rule {rule}: variable `{name}` is declared in several tables; qualify it")]
    AmbiguousVariable { rule: String, name: String },
    #[error("rule {rule}: cannot schedule evaluation: {reason}")]
    IncompatibleScope { rule: String, reason: String },
}

/// Result of evaluating a subexpression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Value(Value),
    Bool(TriBool),
}

impl Outcome {
    pub fn truth(&self) -> TriBool {
        match self {
            Outcome::Bool(b) => *b,
            Outcome::Value(Value::Na) => TriBool::Na,
            Outcome::Value(_) => panic!("value used as a condition; rules are type-checked"),
        }
    }

    fn into_value(self) -> Value {
        match self {
            Outcome::Value(v) => v,
            Outcome::Bool(_) => panic!("condition used as a value; rules are type-checked"),
        }
    }
}

/// Per-table view of which records exist and in what occasion order.
#[derive(Debug, Default)]
struct TableIndex {
    occasions: Vec<Occasion>,
    /// Records sorted by unit then occasion.
    records: Vec<(String, Occasion)>,
}

impl TableIndex {
    fn occasion_position(&self, occasion: &Occasion) -> Option<usize> {
        self.occasions
            .binary_search_by(|probe| compare_occasions(probe, occasion))
            .ok()
    }

    fn units(&self) -> Vec<&String> {
        let mut units: Vec<&String> = Vec::new();
        for (unit, _) in &self.records {
            if units.last() != Some(&unit) {
                units.push(unit);
            }
        }
        units
    }
}

#[derive(Debug, Default)]
struct DataIndex {
    tables: BTreeMap<String, TableIndex>,
}

impl DataIndex {
    fn build(dataset: &Dataset) -> Self {
        let mut seen: BTreeMap<String, BTreeSet<(String, Occasion)>> = BTreeMap::new();
        for key in dataset.key_set() {
            seen.entry(key.table.clone())
                .or_default()
                .insert((key.unit.clone(), key.time.clone()));
        }
        let mut tables = BTreeMap::new();
        for (table, records) in seen {
            let mut records: Vec<(String, Occasion)> = records.into_iter().collect();
            records.sort_by(|a, b| compare_identifiers(&a.0, &b.0).then_with(|| compare_occasions(&a.1, &b.1)));
            let mut occasions: Vec<Occasion> = records.iter().map(|(_, t)| t.clone()).collect();
            occasions.sort_by(compare_occasions);
            occasions.dedup();
            tables.insert(table, TableIndex { occasions, records });
        }
        DataIndex { tables }
    }

    fn table(&self, name: &str) -> Option<&TableIndex> {
        self.tables.get(name)
    }
}

/// What a subexpression is evaluated against: a table and, where the scope
/// fixes them, a unit and an occasion.
#[derive(Debug, Clone, Copy)]
pub struct Frame<'a> {
    pub table: &'a str,
    pub unit: Option<&'a str>,
    pub time: Option<&'a Occasion>,
}

/// Evaluation context for one dataset.
pub struct Binding<'a> {
    dataset: &'a Dataset,
    index: DataIndex,
}

impl<'a> Binding<'a> {
    pub fn new(dataset: &'a Dataset) -> Self {
        Binding {
            dataset,
            index: DataIndex::build(dataset),
        }
    }
}

struct Evaluator<'a, 'b> {
    binding: &'b Binding<'a>,
    options: EvalOptions,
    rule: &'b str,
    scope: &'b Scope,
    diagnostics: Vec<Diagnostic>,
}

/// Evaluates one expression in a frame. Diagnostics are returned alongside
/// the outcome (empty when `options.diagnostics` is off).
pub fn eval_expr(
    expr: &Expr,
    binding: &Binding<'_>,
    frame: Frame<'_>,
    options: EvalOptions,
) -> (Outcome, Vec<Diagnostic>) {
    let scope = Scope {
        table: frame.table.to_string(),
        unit: frame.unit.map_or(Slot::All, |u| Slot::One(u.to_string())),
        time: frame.time.map_or(Slot::All, |t| Slot::One(t.clone())),
    };
    let mut evaluator = Evaluator {
        binding,
        options,
        rule: "",
        scope: &scope,
        diagnostics: Vec::new(),
    };
    let outcome = evaluator.eval(expr, frame);
    (outcome, evaluator.diagnostics)
}

impl Evaluator<'_, '_> {
    fn diagnose(&mut self, kind: DiagnosticKind, message: String) {
        if self.options.diagnostics {
            self.diagnostics.push(Diagnostic {
                rule: self.rule.to_string(),
                scope: self.scope.clone(),
                kind,
                message,
            });
        }
    }

    fn eval(&mut self, expr: &Expr, frame: Frame<'_>) -> Outcome {
        match expr {
            Expr::Number(n) => Outcome::Value(Value::Number(n.clone())),
            Expr::Text(t) => Outcome::Value(Value::Text(t.clone())),
            Expr::Na => Outcome::Value(Value::Na),
            Expr::Var(var) => Outcome::Value(self.lookup(var, frame)),
            Expr::Aggregate { func, axis, arg } => Outcome::Value(self.aggregate(*func, *axis, arg, frame)),
            Expr::Unary { op, arg } => {
                let inner = self.eval(arg, frame);
                match op {
                    UnaryOp::Not => Outcome::Bool(!inner.truth()),
                    UnaryOp::Neg => Outcome::Value(self.numeric(inner.into_value(), "-", |n| -n)),
                    UnaryOp::Abs => Outcome::Value(self.numeric(inner.into_value(), "abs", |n| n.abs())),
                }
            }
            Expr::Binary { op, lhs, rhs } => {
                let left = self.eval(lhs, frame);
                let right = self.eval(rhs, frame);
                match op {
                    BinaryOp::And => Outcome::Bool(left.truth() & right.truth()),
                    BinaryOp::Or => Outcome::Bool(left.truth() | right.truth()),
                    op if op.is_comparison() => Outcome::Bool(self.compare(*op, left.into_value(), right.into_value())),
                    op => Outcome::Value(self.arithmetic(*op, left.into_value(), right.into_value())),
                }
            }
            Expr::If { cond, then } => {
                let c = self.eval(cond, frame).truth();
                let q = self.eval(then, frame).truth();
                Outcome::Bool(c.implies(q))
            }
            Expr::Builtin { func, args } => {
                let value = self.eval(&args[0], frame).into_value();
                let result = match func {
                    BuiltinFn::IsNa => TriBool::from_bool(value.is_na()),
                    _ if value.is_na() => TriBool::Na,
                    BuiltinFn::IsNumber => TriBool::from_bool(matches!(value, Value::Number(_))),
                    BuiltinFn::IsInteger => TriBool::from_bool(value.as_number().is_some_and(|n| n.is_integer())),
                    BuiltinFn::IsText => TriBool::from_bool(matches!(value, Value::Text(_))),
                    BuiltinFn::InSet => {
                        let found = args[1..].iter().any(|member| match member {
                            Expr::Number(n) => value.as_number() == Some(n),
                            Expr::Text(t) => matches!(&value, Value::Text(v) if v == t),
                            _ => false,
                        });
                        TriBool::from_bool(found)
                    }
                };
                Outcome::Bool(result)
            }
        }
    }

    fn lookup(&mut self, var: &VarRef, frame: Frame<'_>) -> Value {
        let table = var.table.as_deref().unwrap_or(frame.table);
        let (Some(unit), Some(time)) = (frame.unit, frame.time) else {
            self.diagnose(
                DiagnosticKind::UnresolvedReference,
                format!("`{}` needs a single record in this scope", var.variable),
            );
            return Value::Na;
        };
        let Some(index) = self.binding.index.table(table) else {
            return Value::Na;
        };
        let occasion = if var.lag == 0 {
            time.clone()
        } else {
            let Some(position) = index.occasion_position(time) else {
                return Value::Na;
            };
            match position.checked_sub(var.lag as usize) {
                Some(earlier) => index.occasions[earlier].clone(),
                None => {
                    self.diagnose(
                        DiagnosticKind::UnresolvedReference,
                        format!("`{}@{}` reaches before the first occasion", var.variable, var.lag),
                    );
                    return Value::Na;
                }
            }
        };
        let key = Key {
            table: table.to_string(),
            time: occasion,
            unit: unit.to_string(),
            variable: var.variable.clone(),
        };
        self.binding.dataset.get(&key).ok().cloned().unwrap_or(Value::Na)
    }

    fn aggregate(&mut self, func: AggFn, axis: AggAxis, arg: &Expr, frame: Frame<'_>) -> Value {
        let table = aggregate_table(arg).unwrap_or(frame.table).to_string();
        let Some(index) = self.binding.index.table(&table) else {
            return Value::Na;
        };
        let members: Vec<(String, Occasion)> = index
            .records
            .iter()
            .filter(|(unit, time)| match axis {
                AggAxis::Units => frame.time.is_some_and(|t| t == time),
                AggAxis::Times => frame.unit.is_some_and(|u| u == unit),
                AggAxis::All => true,
            })
            .cloned()
            .collect();
        let mut numbers = Vec::with_capacity(members.len());
        let mut saw_na = false;
        let mut present = 0usize;
        for (unit, time) in &members {
            let member = Frame {
                table: &table,
                unit: Some(unit),
                time: Some(time),
            };
            match self.eval(arg, member).into_value() {
                Value::Na => saw_na = true,
                Value::Number(n) => {
                    present += 1;
                    numbers.push(n);
                }
                Value::Text(t) => {
                    present += 1;
                    if func != AggFn::Count {
                        self.diagnose(
                            DiagnosticKind::TypeMismatch,
                            format!("{}() over text value {t:?}", func.name()),
                        );
                        return Value::Na;
                    }
                }
            }
        }
        if saw_na && self.options.na_policy == NaPolicy::Propagate {
            return Value::Na;
        }
        if present == 0 {
            return Value::Na;
        }
        let count = Rational::from_integer(present.into());
        let result = match func {
            AggFn::Count => count,
            AggFn::Sum => numbers.into_iter().sum(),
            AggFn::Mean => numbers.into_iter().sum::<Rational>() / count,
            AggFn::Min => numbers.into_iter().min().expect("nonempty"),
            AggFn::Max => numbers.into_iter().max().expect("nonempty"),
        };
        Value::Number(result)
    }

    fn numeric(&mut self, value: Value, op: &str, f: impl Fn(&Rational) -> Rational) -> Value {
        match value {
            Value::Number(n) => Value::Number(f(&n)),
            Value::Na => Value::Na,
            Value::Text(t) => {
                self.diagnose(DiagnosticKind::TypeMismatch, format!("{op} applied to text {t:?}"));
                Value::Na
            }
        }
    }

    fn arithmetic(&mut self, op: BinaryOp, lhs: Value, rhs: Value) -> Value {
        let (a, b) = match (lhs, rhs) {
            (Value::Na, _) | (_, Value::Na) => return Value::Na,
            (Value::Number(a), Value::Number(b)) => (a, b),
            (a, b) => {
                self.diagnose(
                    DiagnosticKind::TypeMismatch,
                    format!("{a} {} {b} mixes text into arithmetic", op.symbol()),
                );
                return Value::Na;
            }
        };
        Value::Number(match op {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => {
                if b.is_zero() {
                    self.diagnose(DiagnosticKind::DivisionByZero, format!("{a} / 0"));
                    return Value::Na;
                }
                a / b
            }
            _ => unreachable!("not an arithmetic operator"),
        })
    }

    fn compare(&mut self, op: BinaryOp, lhs: Value, rhs: Value) -> TriBool {
        let ordering = match (&lhs, &rhs) {
            (Value::Na, _) | (_, Value::Na) => return TriBool::Na,
            (Value::Number(a), Value::Number(b)) => a.cmp(b),
            (Value::Text(a), Value::Text(b)) => match op {
                BinaryOp::Eq => return TriBool::from_bool(a == b),
                BinaryOp::Ne => return TriBool::from_bool(a != b),
                _ => {
                    self.diagnose(
                        DiagnosticKind::TypeMismatch,
                        format!("ordering comparison {lhs} {} {rhs} on text", op.symbol()),
                    );
                    return TriBool::Na;
                }
            },
            _ => {
                self.diagnose(
                    DiagnosticKind::TypeMismatch,
                    format!("{lhs} {} {rhs} compares text with a number", op.symbol()),
                );
                return TriBool::Na;
            }
        };
        TriBool::from_bool(match op {
            BinaryOp::Lt => ordering == Ordering::Less,
            BinaryOp::Le => ordering != Ordering::Greater,
            BinaryOp::Eq => ordering == Ordering::Equal,
            BinaryOp::Ne => ordering != Ordering::Equal,
            BinaryOp::Ge => ordering != Ordering::Less,
            BinaryOp::Gt => ordering == Ordering::Greater,
            _ => unreachable!("not a comparison"),
        })
    }
}

fn aggregate_table(arg: &Expr) -> Option<&str> {
    let mut table = None;
    arg.walk(&mut |e| {
        if let (Expr::Var(v), None) = (e, table) {
            table = v.table.as_deref();
        }
    });
    table
}

/// How a rule is scheduled: its home table and which key dimensions stay
/// free (one entry per value) after aggregates.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Plan {
    table: String,
    unit_free: bool,
    time_free: bool,
}

fn resolve(body: &mut Expr, rule: &str, schema: &Schema) -> Result<(), EvalError> {
    let mut error = None;
    body.map_vars(&mut |var| {
        if error.is_some() {
            return;
        }
        match &var.table {
            Some(table) => {
                if schema.variable(table, &var.variable).is_none() {
                    error = Some(EvalError::UnknownVariable {
                        rule: rule.to_string(),
                        name: format!("{table}.{}", var.variable),
                    });
                }
            }
            None => match schema.tables_with(&var.variable)[..] {
                [] => {
                    error = Some(EvalError::UnknownVariable {
                        rule: rule.to_string(),
                        name: var.variable.clone(),
                    })
                }
                [only] => var.table = Some(only.to_string()),
                _ => {
                    error = Some(EvalError::AmbiguousVariable {
                        rule: rule.to_string(),
                        name: var.variable.clone(),
                    })
                }
            },
        }
    });
    error.map_or(Ok(()), Err)
}

fn plan(body: &Expr, rule: &str, default_table: &str) -> Result<Plan, EvalError> {
    let incompatible = |reason: String| EvalError::IncompatibleScope {
        rule: rule.to_string(),
        reason,
    };
    let mut record_tables: BTreeSet<String> = BTreeSet::new();
    let mut first_table: Option<String> = None;
    let mut problem: Option<String> = None;
    fn visit(
        expr: &Expr,
        record_tables: &mut BTreeSet<String>,
        first_table: &mut Option<String>,
        free: &mut (bool, bool),
        problem: &mut Option<String>,
    ) {
        match expr {
            Expr::Var(v) => {
                let table = v.table.clone().expect("references are resolved");
                first_table.get_or_insert_with(|| table.clone());
                record_tables.insert(table);
                *free = (true, true);
            }
            Expr::Aggregate { axis, arg, .. } => {
                let mut tables = BTreeSet::new();
                arg.walk(&mut |e| {
                    if let Expr::Var(v) = e {
                        tables.insert(v.table.clone().expect("references are resolved"));
                    }
                });
                if tables.len() > 1 {
                    *problem = Some(format!(
                        "aggregate over several tables ({})",
                        tables.into_iter().collect::<Vec<_>>().join(", ")
                    ));
                    return;
                }
                if let Some(t) = tables.into_iter().next() {
                    first_table.get_or_insert(t);
                }
                free.0 |= !axis.spans_units();
                free.1 |= !axis.spans_times();
            }
            other => {
                for child in other.children() {
                    visit(child, record_tables, first_table, free, problem);
                }
            }
        }
    }
    let mut free = (false, false);
    visit(body, &mut record_tables, &mut first_table, &mut free, &mut problem);
    if let Some(reason) = problem {
        return Err(incompatible(reason));
    }
    if record_tables.len() > 1 {
        return Err(incompatible(format!(
            "record-level references to several tables ({}); cross-table references must be aggregated",
            record_tables.into_iter().collect::<Vec<_>>().join(", ")
        )));
    }
    let (unit_free, time_free) = free;
    let table = record_tables
        .into_iter()
        .next()
        .or(first_table)
        .unwrap_or_else(|| default_table.to_string());
    Ok(Plan {
        table,
        unit_free,
        time_free,
    })
}

fn scopes(plan: &Plan, index: &DataIndex) -> Vec<Scope> {
    let all = |table: &str| Scope {
        table: table.to_string(),
        unit: Slot::All,
        time: Slot::All,
    };
    let Some(table) = index.table(&plan.table) else {
        return if plan.unit_free || plan.time_free {
            Vec::new()
        } else {
            vec![all(&plan.table)]
        };
    };
    match (plan.unit_free, plan.time_free) {
        (true, true) => table
            .records
            .iter()
            .map(|(u, t)| Scope {
                table: plan.table.clone(),
                unit: Slot::One(u.clone()),
                time: Slot::One(t.clone()),
            })
            .collect(),
        (true, false) => table
            .units()
            .into_iter()
            .map(|u| Scope {
                table: plan.table.clone(),
                unit: Slot::One(u.clone()),
                time: Slot::All,
            })
            .collect(),
        (false, true) => table
            .occasions
            .iter()
            .map(|t| Scope {
                table: plan.table.clone(),
                unit: Slot::All,
                time: Slot::One(t.clone()),
            })
            .collect(),
        (false, false) => vec![all(&plan.table)],
    }
}

/// Evaluates every rule on every applicable scope of the dataset.
pub fn evaluate_ruleset(
    rules: &RuleSet,
    dataset: &Dataset,
    schema: &Schema,
    options: EvalOptions,
) -> Result<ValidationReport, EvalError> {
    let default_table = schema
        .tables
        .keys()
        .next()
        .cloned()
        .unwrap_or_else(|| crate::schema::DEFAULT_TABLE.to_string());
    let mut planned = Vec::with_capacity(rules.len());
    for rule in rules {
        let mut body = rule.body.clone();
        resolve(&mut body, &rule.name, schema)?;
        let plan = plan(&body, &rule.name, &default_table)?;
        planned.push((rule.name.as_str(), body, plan));
    }
    let binding = Binding::new(dataset);
    let mut report = ValidationReport::default();
    for (name, body, plan) in &planned {
        let mut scopes = scopes(plan, &binding.index);
        scopes.sort_by(Scope::sort_cmp);
        let mut summary = RuleSummary {
            rule: name.to_string(),
            ..RuleSummary::default()
        };
        for scope in scopes {
            let frame = Frame {
                table: &scope.table,
                unit: scope.unit.as_one().map(String::as_str),
                time: scope.time.as_one(),
            };
            let mut evaluator = Evaluator {
                binding: &binding,
                options,
                rule: name,
                scope: &scope,
                diagnostics: Vec::new(),
            };
            let result = evaluator.eval(body, frame).truth();
            let diagnostics = evaluator.diagnostics;
            report.diagnostics.extend(diagnostics);
            match result {
                TriBool::True => summary.passed += 1,
                TriBool::False => summary.failed += 1,
                TriBool::Na => summary.na += 1,
            }
            report.entries.push(Entry {
                rule: name.to_string(),
                scope,
                result,
            });
        }
        report.summary.push(summary);
    }
    Ok(report)
}
