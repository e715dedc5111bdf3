//! Exact analysis of rule sets.
//!
//! Record-scoped rules built from linear comparisons and categorical tests
//! compile to a [`ConstraintSystem`]: a conjunction of clauses, each a
//! disjunction of atoms. Satisfiability is decided by case-splitting over
//! clause disjuncts and running Fourier–Motzkin elimination over exact
//! scalars at each conjunction. Integer variables are relaxed to rationals.
//!
//! Every detection is a satisfiability probe, and every [`Finding`] carries
//! the probes that prove it, so a finding can be re-checked with
//! [`verify_probe`].
//!
//! ```
//! use validus_core::analyzer::{analyze_ruleset, FindingKind};
//! use validus_core::{parse_rules, parse_schema, Rational};
//!
//! let schema = parse_schema("x : numeric\n").unwrap();
//! let rules = parse_rules("a: x >= 0\nb: x >= 1\n").unwrap();
//! let report = analyze_ruleset::<Rational>(&rules, &schema);
//! assert!(matches!(&report.findings[0].kind, FindingKind::Redundant { rule } if rule == "a"));
//! ```

mod compile;
mod findings;
mod fm;
mod simplify;
mod solver;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;

pub use compile::{compile_expr, compile_rule, compile_rules, CompiledRule};
pub use findings::{
    analyze_ruleset, detect_nonconstraining, detect_nonrelaxing, detect_partial_infeasibility, detect_redundant,
    implied_bounds, lint_rule, verify_probe, AnalysisReport, Finding, FindingKind, Probe,
};
pub use simplify::{simplify_ruleset, SimplifyError, Step, StepKind};
pub use solver::{is_satisfiable, solve};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("rule {rule} cannot be analyzed: {reason}")]
    UnsupportedForAnalysis { rule: String, reason: String },
    #[error("rule {rule}: unknown variable `{name}`")]
    UnknownVariable { rule: String, name: String },
}

impl AnalysisError {
    pub fn rule(&self) -> &str {
        match self {
            AnalysisError::UnsupportedForAnalysis { rule, .. } | AnalysisError::UnknownVariable { rule, .. } => rule,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Eq => "==",
            Relation::Ne => "!=",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        }
    }

    pub fn negated(self) -> Relation {
        match self {
            Relation::Lt => Relation::Ge,
            Relation::Le => Relation::Gt,
            Relation::Eq => Relation::Ne,
            Relation::Ne => Relation::Eq,
            Relation::Ge => Relation::Lt,
            Relation::Gt => Relation::Le,
        }
    }

    fn mirrored(self) -> Relation {
        match self {
            Relation::Lt => Relation::Gt,
            Relation::Le => Relation::Ge,
            Relation::Ge => Relation::Le,
            Relation::Gt => Relation::Lt,
            other => other,
        }
    }

    pub fn holds<S: Ord>(self, lhs: &S, rhs: &S) -> bool {
        match self {
            Relation::Lt => lhs < rhs,
            Relation::Le => lhs <= rhs,
            Relation::Eq => lhs == rhs,
            Relation::Ne => lhs != rhs,
            Relation::Ge => lhs >= rhs,
            Relation::Gt => lhs > rhs,
        }
    }
}

/// An atomic constraint.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom<S> {
    /// `sum(coefficients[v] * v) relation constant`.
    Linear {
        coefficients: BTreeMap<String, S>,
        relation: Relation,
        constant: S,
    },
    /// The variable takes one of the `allowed` levels.
    Categorical {
        variable: String,
        allowed: BTreeSet<String>,
    },
}

impl<S: Scalar> Atom<S> {
    /// Builds a linear atom in normal form: relations `<`, `<=`, `==`, `!=`
    /// only, and the first coefficient scaled to magnitude one (to plus one
    /// for `==` and `!=`). Returns `Err(truth)` when no coefficient is
    /// nonzero, with the truth of the constant comparison.
    pub fn linear(coefficients: BTreeMap<String, S>, relation: Relation, constant: S) -> Result<Self, bool> {
        let mut coefficients: BTreeMap<String, S> = coefficients.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        let Some(first) = coefficients.values().next().cloned() else {
            return Err(relation.holds(&S::zero(), &constant));
        };
        let (mut relation, mut constant) = (relation, constant);
        let mut scale = first.abs();
        if matches!(relation, Relation::Ge | Relation::Gt) {
            relation = relation.mirrored();
            scale = -scale;
        } else if matches!(relation, Relation::Eq | Relation::Ne) && first.is_negative() {
            scale = -scale;
        }
        for c in coefficients.values_mut() {
            *c = c.clone() / scale.clone();
        }
        constant = constant / scale;
        Ok(Atom::Linear {
            coefficients,
            relation,
            constant,
        })
    }

    pub fn negated(&self, levels: &[String]) -> Atom<S> {
        match self {
            Atom::Linear {
                coefficients,
                relation,
                constant,
            } => Atom::linear(coefficients.clone(), relation.negated(), constant.clone())
                .expect("normal form keeps a nonzero coefficient"),
            Atom::Categorical { variable, allowed } => Atom::Categorical {
                variable: variable.clone(),
                allowed: levels.iter().filter(|l| !allowed.contains(*l)).cloned().collect(),
            },
        }
    }

    pub fn holds(&self, assignment: &Assignment<S>) -> bool {
        match self {
            Atom::Linear {
                coefficients,
                relation,
                constant,
            } => {
                let mut total = S::zero();
                for (var, c) in coefficients {
                    let value = assignment.numeric.get(var).cloned().unwrap_or_else(S::zero);
                    total = total + c.clone() * value;
                }
                relation.holds(&total, constant)
            }
            Atom::Categorical { variable, allowed } => assignment
                .categorical
                .get(variable)
                .is_some_and(|level| allowed.contains(level)),
        }
    }
}

impl<S: Scalar> fmt::Display for Atom<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Linear {
                coefficients,
                relation,
                constant,
            } => {
                for (i, (var, c)) in coefficients.iter().enumerate() {
                    let magnitude = c.abs();
                    let sign = if c.is_negative() { "-" } else { "+" };
                    match (i, c.is_negative()) {
                        (0, false) => {}
                        (0, true) => f.write_str("-")?,
                        _ => write!(f, " {sign} ")?,
                    }
                    if magnitude.is_one() {
                        write!(f, "{var}")?;
                    } else {
                        write!(f, "{magnitude}*{var}")?;
                    }
                }
                write!(f, " {} {constant}", relation.symbol())
            }
            Atom::Categorical { variable, allowed } => {
                let levels: Vec<String> = allowed.iter().map(|l| format!("{l:?}")).collect();
                write!(f, "{variable} in {{{}}}", levels.join(", "))
            }
        }
    }
}

/// A disjunction of atoms. No disjuncts means false.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause<S> {
    pub disjuncts: Vec<Atom<S>>,
    /// Name of the rule the clause came from, or `schema` for domain bounds.
    pub origin: String,
}

impl<S: Scalar> Clause<S> {
    pub fn holds(&self, assignment: &Assignment<S>) -> bool {
        self.disjuncts.iter().any(|a| a.holds(assignment))
    }
}

/// Declared bounds of a numeric analysis variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NumericVar<S> {
    pub bounds: Option<(S, S)>,
    pub integer: bool,
}

/// A conjunction of clauses over declared variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSystem<S> {
    pub clauses: Vec<Clause<S>>,
    pub numeric_vars: BTreeMap<String, NumericVar<S>>,
    /// Level sets in declaration order.
    pub categorical_vars: BTreeMap<String, Vec<String>>,
}

impl<S> Default for ConstraintSystem<S> {
    fn default() -> Self {
        ConstraintSystem {
            clauses: Vec::new(),
            numeric_vars: BTreeMap::new(),
            categorical_vars: BTreeMap::new(),
        }
    }
}

impl<S: Scalar> ConstraintSystem<S> {
    /// True iff the assignment satisfies every clause.
    pub fn holds(&self, assignment: &Assignment<S>) -> bool {
        self.clauses.iter().all(|c| c.holds(assignment))
    }

    /// Conjoins another system, merging declarations.
    pub fn conjoin(&mut self, other: ConstraintSystem<S>) {
        for clause in other.clauses {
            if !self.clauses.contains(&clause) {
                self.clauses.push(clause);
            }
        }
        self.numeric_vars.extend(other.numeric_vars);
        self.categorical_vars.extend(other.categorical_vars);
    }
}

/// Values for the variables of a system.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Assignment<S> {
    pub numeric: BTreeMap<String, S>,
    pub categorical: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bound<S> {
    pub value: S,
    pub closed: bool,
}

/// A set of reals between two optional endpoints. `None` endpoints are
/// infinite.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval<S> {
    pub low: Option<Bound<S>>,
    pub high: Option<Bound<S>>,
}

impl<S: Scalar> Interval<S> {
    pub fn unbounded() -> Self {
        Interval { low: None, high: None }
    }

    pub fn closed(low: S, high: S) -> Self {
        Interval {
            low: Some(Bound {
                value: low,
                closed: true,
            }),
            high: Some(Bound {
                value: high,
                closed: true,
            }),
        }
    }

    pub fn is_empty(&self) -> bool {
        match (&self.low, &self.high) {
            (Some(l), Some(h)) => l.value > h.value || (l.value == h.value && !(l.closed && h.closed)),
            _ => false,
        }
    }

    pub fn point(&self) -> Option<&S> {
        match (&self.low, &self.high) {
            (Some(l), Some(h)) if l.value == h.value && l.closed && h.closed => Some(&l.value),
            _ => None,
        }
    }

    pub fn contains(&self, value: &S) -> bool {
        let above = self
            .low
            .as_ref()
            .is_none_or(|l| if l.closed { *value >= l.value } else { *value > l.value });
        let below = self
            .high
            .as_ref()
            .is_none_or(|h| if h.closed { *value <= h.value } else { *value < h.value });
        above && below
    }

    /// True iff `self` is a subset of `other`. Both must be nonempty.
    pub fn is_subset_of(&self, other: &Interval<S>) -> bool {
        let low_ok = match (&self.low, &other.low) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(a), Some(b)) => a.value > b.value || (a.value == b.value && (b.closed || !a.closed)),
        };
        let high_ok = match (&self.high, &other.high) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(a), Some(b)) => a.value < b.value || (a.value == b.value && (b.closed || !a.closed)),
        };
        low_ok && high_ok
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &Interval<S>) -> Interval<S> {
        let low = match (&self.low, &other.low) {
            (Some(a), Some(b)) => Some(match a.value.cmp(&b.value) {
                std::cmp::Ordering::Less => a.clone(),
                std::cmp::Ordering::Greater => b.clone(),
                std::cmp::Ordering::Equal => Bound {
                    value: a.value.clone(),
                    closed: a.closed || b.closed,
                },
            }),
            _ => None,
        };
        let high = match (&self.high, &other.high) {
            (Some(a), Some(b)) => Some(match a.value.cmp(&b.value) {
                std::cmp::Ordering::Greater => a.clone(),
                std::cmp::Ordering::Less => b.clone(),
                std::cmp::Ordering::Equal => Bound {
                    value: a.value.clone(),
                    closed: a.closed || b.closed,
                },
            }),
            _ => None,
        };
        Interval { low, high }
    }

    /// Intersection of both.
    pub fn meet(&self, other: &Interval<S>) -> Interval<S> {
        let low = match (&self.low, &other.low) {
            (Some(a), Some(b)) => Some(match a.value.cmp(&b.value) {
                std::cmp::Ordering::Greater => a.clone(),
                std::cmp::Ordering::Less => b.clone(),
                std::cmp::Ordering::Equal => Bound {
                    value: a.value.clone(),
                    closed: a.closed && b.closed,
                },
            }),
            (a, b) => a.clone().or_else(|| b.clone()),
        };
        let high = match (&self.high, &other.high) {
            (Some(a), Some(b)) => Some(match a.value.cmp(&b.value) {
                std::cmp::Ordering::Less => a.clone(),
                std::cmp::Ordering::Greater => b.clone(),
                std::cmp::Ordering::Equal => Bound {
                    value: a.value.clone(),
                    closed: a.closed && b.closed,
                },
            }),
            (a, b) => a.clone().or_else(|| b.clone()),
        };
        Interval { low, high }
    }
}

impl<S: Scalar> fmt::Display for Interval<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.low {
            None => f.write_str("(-inf")?,
            Some(b) => write!(f, "{}{}", if b.closed { "[" } else { "(" }, b.value)?,
        }
        f.write_str(", ")?;
        match &self.high {
            None => f.write_str("inf)"),
            Some(b) => write!(f, "{}{}", b.value, if b.closed { "]" } else { ")" }),
        }
    }
}
