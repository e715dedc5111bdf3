use std::fmt;

use crate::Rational;

/// A variable reference `[table.]variable[@lag]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarRef {
    pub table: Option<String>,
    pub variable: String,
    /// Occasions back from the current one; 0 is the current occasion.
    pub lag: u32,
}

impl VarRef {
    pub fn new(variable: impl Into<String>) -> Self {
        VarRef {
            table: None,
            variable: variable.into(),
            lag: 0,
        }
    }

    pub fn qualified(table: impl Into<String>, variable: impl Into<String>) -> Self {
        VarRef {
            table: Some(table.into()),
            ..VarRef::new(variable)
        }
    }

    pub fn lagged(mut self, lag: u32) -> Self {
        self.lag = lag;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AggFn {
    Mean,
    Sum,
    Min,
    Max,
    Count,
}

impl AggFn {
    pub fn name(self) -> &'static str {
        match self {
            AggFn::Mean => "mean",
            AggFn::Sum => "sum",
            AggFn::Min => "min",
            AggFn::Max => "max",
            AggFn::Count => "count",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "mean" => AggFn::Mean,
            "sum" => AggFn::Sum,
            "min" => AggFn::Min,
            "max" => AggFn::Max,
            "count" => AggFn::Count,
            _ => return None,
        })
    }
}

/// The key dimension an aggregate collapses.
///
/// `Units` (the default, `mean(x)`) ranges over all units at the current
/// occasion; `Times` (`mean(x, times)`) over all occasions of the current
/// unit; `All` (`mean(x, all)`) over every record of the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum AggAxis {
    #[default]
    Units,
    Times,
    All,
}

impl AggAxis {
    pub fn keyword(self) -> &'static str {
        match self {
            AggAxis::Units => "units",
            AggAxis::Times => "times",
            AggAxis::All => "all",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        Some(match word {
            "units" => AggAxis::Units,
            "times" => AggAxis::Times,
            "all" => AggAxis::All,
            _ => return None,
        })
    }

    pub fn spans_units(self) -> bool {
        matches!(self, AggAxis::Units | AggAxis::All)
    }

    pub fn spans_times(self) -> bool {
        matches!(self, AggAxis::Times | AggAxis::All)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Not,
    Abs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
    And,
    Or,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::Ge => ">=",
            BinaryOp::Gt => ">",
            BinaryOp::And => "and",
            BinaryOp::Or => "or",
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Eq | BinaryOp::Ne | BinaryOp::Ge | BinaryOp::Gt
        )
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(self, BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul | BinaryOp::Div)
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinaryOp::And | BinaryOp::Or)
    }

    /// The comparison that holds exactly when `self` fails.
    pub fn negated_comparison(self) -> Option<BinaryOp> {
        Some(match self {
            BinaryOp::Lt => BinaryOp::Ge,
            BinaryOp::Le => BinaryOp::Gt,
            BinaryOp::Eq => BinaryOp::Ne,
            BinaryOp::Ne => BinaryOp::Eq,
            BinaryOp::Ge => BinaryOp::Lt,
            BinaryOp::Gt => BinaryOp::Le,
            _ => return None,
        })
    }

    /// The comparison with operands swapped (`a < b` is `b > a`).
    pub fn mirrored_comparison(self) -> Option<BinaryOp> {
        Some(match self {
            BinaryOp::Lt => BinaryOp::Gt,
            BinaryOp::Le => BinaryOp::Ge,
            BinaryOp::Eq => BinaryOp::Eq,
            BinaryOp::Ne => BinaryOp::Ne,
            BinaryOp::Ge => BinaryOp::Le,
            BinaryOp::Gt => BinaryOp::Lt,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BuiltinFn {
    IsNumber,
    IsInteger,
    IsText,
    IsNa,
    InSet,
}

impl BuiltinFn {
    pub fn name(self) -> &'static str {
        match self {
            BuiltinFn::IsNumber => "is_number",
            BuiltinFn::IsInteger => "is_integer",
            BuiltinFn::IsText => "is_text",
            BuiltinFn::IsNa => "is_na",
            BuiltinFn::InSet => "in_set",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "is_number" => BuiltinFn::IsNumber,
            "is_integer" => BuiltinFn::IsInteger,
            "is_text" => BuiltinFn::IsText,
            "is_na" => BuiltinFn::IsNa,
            "in_set" => BuiltinFn::InSet,
            _ => return None,
        })
    }
}

/// Rule expression tree.
///
/// `Builtin(InSet, args)` holds the tested expression first and the set
/// members (literals) after it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Number(Rational),
    Text(String),
    Na,
    Var(VarRef),
    Aggregate {
        func: AggFn,
        axis: AggAxis,
        arg: Box<Expr>,
    },
    Unary {
        op: UnaryOp,
        arg: Box<Expr>,
    },
    Binary {
        op: BinaryOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    /// Implication: `cond` implies `then`.
    If {
        cond: Box<Expr>,
        then: Box<Expr>,
    },
    Builtin {
        func: BuiltinFn,
        args: Vec<Expr>,
    },
}

impl Expr {
    pub fn int(value: i64) -> Expr {
        Expr::Number(Rational::from_integer(value.into()))
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(VarRef::new(name))
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn unary(op: UnaryOp, arg: Expr) -> Expr {
        Expr::Unary { op, arg: Box::new(arg) }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(arg: Expr) -> Expr {
        Expr::unary(UnaryOp::Not, arg)
    }

    pub fn and(lhs: Expr, rhs: Expr) -> Expr {
        Expr::binary(BinaryOp::And, lhs, rhs)
    }

    pub fn or(lhs: Expr, rhs: Expr) -> Expr {
        Expr::binary(BinaryOp::Or, lhs, rhs)
    }

    pub fn implies(cond: Expr, then: Expr) -> Expr {
        Expr::If {
            cond: Box::new(cond),
            then: Box::new(then),
        }
    }

    pub fn aggregate(func: AggFn, axis: AggAxis, arg: Expr) -> Expr {
        Expr::Aggregate {
            func,
            axis,
            arg: Box::new(arg),
        }
    }

    /// Direct subexpressions, left to right.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Number(_) | Expr::Text(_) | Expr::Na | Expr::Var(_) => Vec::new(),
            Expr::Aggregate { arg, .. } | Expr::Unary { arg, .. } => vec![arg],
            Expr::Binary { lhs, rhs, .. } => vec![lhs, rhs],
            Expr::If { cond, then } => vec![cond, then],
            Expr::Builtin { args, .. } => args.iter().collect(),
        }
    }

    /// Visits every node in pre-order.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Expr)) {
        visit(self);
        for child in self.children() {
            child.walk(visit);
        }
    }

    pub fn contains_aggregate(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= matches!(e, Expr::Aggregate { .. }));
        found
    }

    /// Rewrites every variable reference in place.
    pub fn map_vars(&mut self, f: &mut impl FnMut(&mut VarRef)) {
        match self {
            Expr::Var(v) => f(v),
            Expr::Number(_) | Expr::Text(_) | Expr::Na => {}
            Expr::Aggregate { arg, .. } | Expr::Unary { arg, .. } => arg.map_vars(f),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.map_vars(f);
                rhs.map_vars(f);
            }
            Expr::If { cond, then } => {
                cond.map_vars(f);
                then.map_vars(f);
            }
            Expr::Builtin { args, .. } => args.iter_mut().for_each(|a| a.map_vars(f)),
        }
    }
}

/// Location of a rule in its source file (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
}

/// A named validation rule.
///
/// Equality ignores the source span so that reparsed rules compare equal.
#[derive(Debug, Clone, Eq)]
pub struct Rule {
    pub name: String,
    pub body: Expr,
    pub span: SourceSpan,
}

impl PartialEq for Rule {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.body == other.body
    }
}

impl Rule {
    pub fn new(name: impl Into<String>, body: Expr) -> Self {
        Rule {
            name: name.into(),
            body,
            span: SourceSpan::default(),
        }
    }
}

/// Rules in source order with unique names.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RuleSet {
    rules: Vec<Rule>,
}

impl RuleSet {
    /// Fails with the first repeated name.
    pub fn new(rules: Vec<Rule>) -> Result<Self, String> {
        let mut seen = std::collections::BTreeSet::new();
        for rule in &rules {
            if !seen.insert(rule.name.as_str()) {
                return Err(rule.name.clone());
            }
        }
        Ok(RuleSet { rules })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn get(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name == name)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rule> {
        self.rules.iter()
    }

    pub fn into_rules(self) -> Vec<Rule> {
        self.rules
    }
}

impl<'a> IntoIterator for &'a RuleSet {
    type Item = &'a Rule;
    type IntoIter = std::slice::Iter<'a, Rule>;

    fn into_iter(self) -> Self::IntoIter {
        self.rules.iter()
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::format::format_rule(self))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::format::format_expr(self))
    }
}
