use std::fmt;

use thiserror::Error;

use super::compile::{compile_expr, compile_rule, CompiledRule};
use super::findings::{conditional, Finding, FindingKind, Probe};
use super::solver::is_satisfiable;
use super::{AnalysisError, ConstraintSystem};
use crate::lang::{format_expr, Expr, Rule, RuleSet};
use crate::scalar::Scalar;
use crate::schema::Schema;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    /// `if (C) Q` replaced by `Q` because the set forces `C`.
    Nonrelaxing,
    /// `if (C) Q` replaced by `Q` because the set forces `Q`.
    Nonconstraining,
    /// Rule dropped because the others imply it.
    Redundant,
}

impl StepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StepKind::Nonrelaxing => "nonrelaxing",
            StepKind::Nonconstraining => "nonconstraining",
            StepKind::Redundant => "redundant",
        }
    }
}

/// One applied transformation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub kind: StepKind,
    pub rule: String,
    pub before: Expr,
    /// The replacement, or `None` when the rule was dropped.
    pub after: Option<Expr>,
    pub probe: Probe,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", self.kind.as_str(), self.rule, format_expr(&self.before))?;
        match &self.after {
            Some(after) => write!(f, " => {}", format_expr(after))?,
            None => f.write_str(" => (removed)")?,
        }
        write!(f, "; {}", self.probe)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimplifyError<S: Scalar> {
    #[error("the rule set is infeasible")]
    Infeasible(Finding<S>),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

fn conjunction<S: Scalar>(compiled: &[CompiledRule<S>], skip: Option<usize>) -> ConstraintSystem<S> {
    let mut system = ConstraintSystem::default();
    for (i, rule) in compiled.iter().enumerate() {
        if Some(i) != skip {
            system.conjoin(rule.system.clone());
        }
    }
    system
}

fn names(rules: &[Rule], skip: Option<usize>) -> Vec<String> {
    rules
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != skip)
        .map(|(_, r)| r.name.clone())
        .collect()
}

/// The first applicable transformation, scanning rules in order and trying
/// nonrelaxing, nonconstraining, then redundancy on each.
fn next_step<S: Scalar>(rules: &[Rule], schema: &Schema) -> Result<Option<(usize, Step)>, AnalysisError> {
    let compiled: Vec<CompiledRule<S>> = rules
        .iter()
        .map(|r| compile_rule(r, schema))
        .collect::<Result<_, _>>()?;
    let whole = conjunction(&compiled, None);
    let forced = |part: &Expr, origin: &str| -> Result<bool, AnalysisError> {
        let mut probe = whole.clone();
        probe.conjoin(compile_expr(part, false, origin, schema)?);
        Ok(!is_satisfiable(&probe))
    };
    for (i, rule) in rules.iter().enumerate() {
        if let Some((cond, then)) = conditional(rule) {
            for (kind, part) in [(StepKind::Nonrelaxing, cond), (StepKind::Nonconstraining, then)] {
                if forced(part, &rule.name)? {
                    return Ok(Some((
                        i,
                        Step {
                            kind,
                            rule: rule.name.clone(),
                            before: rule.body.clone(),
                            after: Some(then.clone()),
                            probe: Probe {
                                rules: names(rules, None),
                                extra: Some(Expr::not(part.clone())),
                            },
                        },
                    )));
                }
            }
        }
        let mut probe = conjunction(&compiled, Some(i));
        probe.conjoin(compiled[i].negation.clone());
        if !is_satisfiable(&probe) {
            return Ok(Some((
                i,
                Step {
                    kind: StepKind::Redundant,
                    rule: rule.name.clone(),
                    before: rule.body.clone(),
                    after: None,
                    probe: Probe {
                        rules: names(rules, Some(i)),
                        extra: Some(Expr::not(rule.body.clone())),
                    },
                },
            )));
        }
    }
    Ok(None)
}

/// Rewrites a rule set to a fixpoint without changing its solution set.
///
/// Each round applies the first transformation found: a conditional whose
/// condition is forced, or whose consequent is forced, becomes its
/// consequent (keeping its name and position); a rule implied by the rest
/// is dropped. Redundancy is judged against the current, partly simplified
/// set, so of two duplicate rules only the first is dropped.
pub fn simplify_ruleset<S: Scalar>(rules: &RuleSet, schema: &Schema) -> Result<(RuleSet, Vec<Step>), SimplifyError<S>> {
    let system = super::compile_rules::<S>(rules, schema)?;
    if !is_satisfiable(&system) {
        return Err(SimplifyError::Infeasible(Finding {
            kind: FindingKind::Infeasible,
            evidence: vec![Probe {
                rules: names(rules.rules(), None),
                extra: None,
            }],
        }));
    }
    let mut current: Vec<Rule> = rules.rules().to_vec();
    let mut log = Vec::new();
    while let Some((i, step)) = next_step::<S>(&current, schema)? {
        match &step.after {
            Some(after) => current[i].body = after.clone(),
            None => {
                current.remove(i);
            }
        }
        log.push(step);
    }
    let simplified = RuleSet::new(current).expect("names stay unique");
    Ok((simplified, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{format_ruleset, parse_rules};
    use crate::schema::parse_schema;
    use crate::Rational;

    fn simplify(text: &str) -> (String, Vec<StepKind>) {
        let schema = parse_schema("x : numeric\ny : numeric\n").unwrap();
        let (rules, log) = simplify_ruleset::<Rational>(&parse_rules(text).unwrap(), &schema).unwrap();
        (format_ruleset(&rules), log.iter().map(|s| s.kind).collect())
    }

    #[test]
    fn worked_examples() {
        assert_eq!(
            simplify("a: if (x >= 0) y >= 0\nb: x >= 0\n"),
            ("a: y >= 0\nb: x >= 0\n".to_string(), vec![StepKind::Nonrelaxing])
        );
        assert_eq!(
            simplify("a: if (x > 0) y > 0\nb: if (x < 1) y > 1\n"),
            (
                "a: y > 0\nb: if (x < 1) y > 1\n".to_string(),
                vec![StepKind::Nonconstraining]
            )
        );
        assert_eq!(
            simplify("a: x >= 0\nb: x >= 1\n"),
            ("b: x >= 1\n".to_string(), vec![StepKind::Redundant])
        );
        assert_eq!(simplify("a: x >= 0\n"), ("a: x >= 0\n".to_string(), vec![]));
        assert_eq!(
            simplify("a: x >= 0\nb: x >= 0\n"),
            ("b: x >= 0\n".to_string(), vec![StepKind::Redundant])
        );
    }

    #[test]
    fn infeasible_input() {
        let schema = parse_schema("x : numeric\n").unwrap();
        let result = simplify_ruleset::<Rational>(&parse_rules("a: x >= 0\nb: x <= -1").unwrap(), &schema);
        assert!(matches!(result, Err(SimplifyError::Infeasible(_))));
    }
}
