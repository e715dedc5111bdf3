use std::fmt;

use super::compile::{compile_expr, compile_rule, CompiledRule};
use super::solver::{is_satisfiable, variable_range};
use super::{AnalysisError, Bound, ConstraintSystem, Interval};
use crate::lang::{format_expr, BinaryOp, Expr, Rule, RuleSet, VarRef};
use crate::scalar::Scalar;
use crate::schema::Schema;

/// A satisfiability check claimed to fail: the conjunction of the named
/// rules (over the schema domains) and `extra` has no solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Probe {
    pub rules: Vec<String>,
    pub extra: Option<Expr>,
}

impl fmt::Display for Probe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.rules.clone();
        if let Some(extra) = &self.extra {
            parts.push(format!("`{}`", format_expr(extra)));
        }
        if parts.is_empty() {
            f.write_str("the schema domains are unsatisfiable")
        } else {
            write!(f, "{} is unsatisfiable", parts.join(" and "))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FindingKind<S> {
    Infeasible,
    PartialInfeasibility {
        variable: String,
        level: String,
    },
    FixedValue {
        variable: String,
        value: S,
    },
    RangeRestriction {
        variable: String,
        implied: Interval<S>,
        declared: Interval<S>,
    },
    Redundant {
        rule: String,
    },
    Tautology {
        rule: String,
    },
    Contradiction {
        rule: String,
    },
    NonrelaxingClause {
        rule: String,
    },
    NonconstrainingClause {
        rule: String,
    },
}

impl<S: Scalar> FindingKind<S> {
    pub fn name(&self) -> &'static str {
        match self {
            FindingKind::Infeasible => "Infeasible",
            FindingKind::PartialInfeasibility { .. } => "PartialInfeasibility",
            FindingKind::FixedValue { .. } => "FixedValue",
            FindingKind::RangeRestriction { .. } => "RangeRestriction",
            FindingKind::Redundant { .. } => "Redundant",
            FindingKind::Tautology { .. } => "Tautology",
            FindingKind::Contradiction { .. } => "Contradiction",
            FindingKind::NonrelaxingClause { .. } => "NonrelaxingClause",
            FindingKind::NonconstrainingClause { .. } => "NonconstrainingClause",
        }
    }

    /// The rule or variable the finding is about.
    pub fn subject(&self) -> Option<&str> {
        match self {
            FindingKind::Infeasible => None,
            FindingKind::PartialInfeasibility { variable, .. }
            | FindingKind::FixedValue { variable, .. }
            | FindingKind::RangeRestriction { variable, .. } => Some(variable),
            FindingKind::Redundant { rule }
            | FindingKind::Tautology { rule }
            | FindingKind::Contradiction { rule }
            | FindingKind::NonrelaxingClause { rule }
            | FindingKind::NonconstrainingClause { rule } => Some(rule),
        }
    }
}

impl<S: Scalar> fmt::Display for FindingKind<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FindingKind::Infeasible => f.write_str("the rule set is infeasible"),
            FindingKind::PartialInfeasibility { variable, level } => {
                write!(f, "{variable} can never be {level:?}")
            }
            FindingKind::FixedValue { variable, value } => write!(f, "{variable} is fixed to {value}"),
            FindingKind::RangeRestriction {
                variable,
                implied,
                declared,
            } => write!(f, "{variable} is restricted to {implied} (declared {declared})"),
            FindingKind::Redundant { rule } => write!(f, "{rule} is implied by the other rules"),
            FindingKind::Tautology { rule } => write!(f, "{rule} is always true"),
            FindingKind::Contradiction { rule } => write!(f, "{rule} is always false"),
            FindingKind::NonrelaxingClause { rule } => {
                write!(f, "the condition of {rule} always holds")
            }
            FindingKind::NonconstrainingClause { rule } => {
                write!(f, "the consequent of {rule} always holds")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding<S> {
    pub kind: FindingKind<S>,
    /// Unsatisfiable probes that together prove the finding.
    pub evidence: Vec<Probe>,
}

/// Re-runs a probe; true iff it is indeed unsatisfiable.
pub fn verify_probe<S: Scalar>(rules: &RuleSet, schema: &Schema, probe: &Probe) -> Result<bool, AnalysisError> {
    let mut system: ConstraintSystem<S> = ConstraintSystem::default();
    for name in &probe.rules {
        let rule = rules.get(name).ok_or_else(|| AnalysisError::UnknownVariable {
            rule: name.clone(),
            name: "(rule not in set)".to_string(),
        })?;
        system.conjoin(compile_expr(&rule.body, true, &rule.name, schema)?);
    }
    if let Some(extra) = &probe.extra {
        system.conjoin(compile_expr(extra, true, "probe", schema)?);
    }
    Ok(!is_satisfiable(&system))
}

fn conjunction<S: Scalar>(rules: &[CompiledRule<S>], skip: Option<usize>) -> ConstraintSystem<S> {
    let mut system = ConstraintSystem::default();
    for (i, rule) in rules.iter().enumerate() {
        if Some(i) != skip {
            system.conjoin(rule.system.clone());
        }
    }
    system
}

fn names<S>(rules: &[CompiledRule<S>], skip: Option<usize>) -> Vec<String> {
    rules
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != skip)
        .map(|(_, r)| r.name.clone())
        .collect()
}

fn compile_all<S: Scalar>(rules: &RuleSet, schema: &Schema) -> Result<Vec<CompiledRule<S>>, AnalysisError> {
    rules.iter().map(|r| compile_rule(r, schema)).collect()
}

/// Flags a rule that no value assignment can falsify (tautology) or satisfy
/// (contradiction), over the schema domains.
pub fn lint_rule<S: Scalar>(rule: &Rule, schema: &Schema) -> Result<Option<Finding<S>>, AnalysisError> {
    let compiled: CompiledRule<S> = compile_rule(rule, schema)?;
    Ok(lint_compiled(rule, &compiled))
}

fn lint_compiled<S: Scalar>(rule: &Rule, compiled: &CompiledRule<S>) -> Option<Finding<S>> {
    if !is_satisfiable(&compiled.negation) {
        return Some(Finding {
            kind: FindingKind::Tautology {
                rule: rule.name.clone(),
            },
            evidence: vec![Probe {
                rules: Vec::new(),
                extra: Some(Expr::not(rule.body.clone())),
            }],
        });
    }
    if !is_satisfiable(&compiled.system) {
        return Some(Finding {
            kind: FindingKind::Contradiction {
                rule: rule.name.clone(),
            },
            evidence: vec![Probe {
                rules: Vec::new(),
                extra: Some(rule.body.clone()),
            }],
        });
    }
    None
}

/// The hull of values the variable takes over all solutions, or `None` when
/// the system is unsatisfiable.
pub fn implied_bounds<S: Scalar>(system: &ConstraintSystem<S>, variable: &str) -> Option<Interval<S>> {
    variable_range(system, variable)
}

fn variable_expr(name: &str) -> Expr {
    match name.split_once('.') {
        Some((table, var)) => Expr::Var(VarRef::qualified(table, var)),
        None => Expr::Var(VarRef::new(name)),
    }
}

fn origins<S>(system: &ConstraintSystem<S>) -> Vec<String> {
    let mut rules: Vec<String> = Vec::new();
    for clause in &system.clauses {
        if clause.origin != "schema" && !rules.contains(&clause.origin) {
            rules.push(clause.origin.clone());
        }
    }
    rules
}

/// Categorical levels the system rules out entirely.
pub fn detect_partial_infeasibility<S: Scalar>(system: &ConstraintSystem<S>) -> Vec<Finding<S>> {
    let mut findings = Vec::new();
    for (variable, levels) in &system.categorical_vars {
        for level in levels {
            let mut probe = system.clone();
            probe.clauses.push(super::Clause {
                disjuncts: vec![super::Atom::Categorical {
                    variable: variable.clone(),
                    allowed: [level.clone()].into(),
                }],
                origin: "probe".to_string(),
            });
            if !is_satisfiable(&probe) {
                findings.push(Finding {
                    kind: FindingKind::PartialInfeasibility {
                        variable: variable.clone(),
                        level: level.clone(),
                    },
                    evidence: vec![Probe {
                        rules: origins(system),
                        extra: Some(Expr::binary(
                            BinaryOp::Eq,
                            variable_expr(variable),
                            Expr::Text(level.clone()),
                        )),
                    }],
                });
            }
        }
    }
    findings
}

/// Rules implied by all the other rules together.
pub fn detect_redundant<S: Scalar>(rules: &RuleSet, schema: &Schema) -> Result<Vec<Finding<S>>, AnalysisError> {
    Ok(redundant(rules.rules(), &compile_all(rules, schema)?))
}

fn redundant<S: Scalar>(rules: &[Rule], compiled: &[CompiledRule<S>]) -> Vec<Finding<S>> {
    let mut findings = Vec::new();
    for (i, rule) in rules.iter().enumerate() {
        let mut probe = conjunction(compiled, Some(i));
        probe.conjoin(compiled[i].negation.clone());
        if !is_satisfiable(&probe) {
            findings.push(Finding {
                kind: FindingKind::Redundant {
                    rule: rule.name.clone(),
                },
                evidence: vec![Probe {
                    rules: names(compiled, Some(i)),
                    extra: Some(Expr::not(rule.body.clone())),
                }],
            });
        }
    }
    findings
}

/// Whether `part` (the condition or consequent of a conditional rule) can
/// fail while the whole set holds.
fn can_fail<S: Scalar>(
    whole: &ConstraintSystem<S>,
    part: &Expr,
    origin: &str,
    schema: &Schema,
) -> Result<bool, AnalysisError> {
    let mut probe = whole.clone();
    probe.conjoin(compile_expr(part, false, origin, schema)?);
    Ok(is_satisfiable(&probe))
}

pub(crate) fn conditional(rule: &Rule) -> Option<(&Expr, &Expr)> {
    match &rule.body {
        Expr::If { cond, then } => Some((cond, then)),
        _ => None,
    }
}

/// Conditional rules whose condition the set forces to hold.
pub fn detect_nonrelaxing<S: Scalar>(rules: &RuleSet, schema: &Schema) -> Result<Vec<Finding<S>>, AnalysisError> {
    let compiled = compile_all(rules, schema)?;
    nonrelaxing(rules.rules(), &compiled, schema)
}

fn nonrelaxing<S: Scalar>(
    rules: &[Rule],
    compiled: &[CompiledRule<S>],
    schema: &Schema,
) -> Result<Vec<Finding<S>>, AnalysisError> {
    let whole = conjunction(compiled, None);
    let mut findings = Vec::new();
    for rule in rules {
        if let Some((cond, _)) = conditional(rule) {
            if !can_fail(&whole, cond, &rule.name, schema)? {
                findings.push(Finding {
                    kind: FindingKind::NonrelaxingClause {
                        rule: rule.name.clone(),
                    },
                    evidence: vec![Probe {
                        rules: names(compiled, None),
                        extra: Some(Expr::not(cond.clone())),
                    }],
                });
            }
        }
    }
    Ok(findings)
}

/// Conditional rules whose consequent the set forces to hold regardless of
/// the condition. Rules that are already nonrelaxing are not repeated here.
pub fn detect_nonconstraining<S: Scalar>(rules: &RuleSet, schema: &Schema) -> Result<Vec<Finding<S>>, AnalysisError> {
    let compiled = compile_all(rules, schema)?;
    nonconstraining(rules.rules(), &compiled, schema)
}

fn nonconstraining<S: Scalar>(
    rules: &[Rule],
    compiled: &[CompiledRule<S>],
    schema: &Schema,
) -> Result<Vec<Finding<S>>, AnalysisError> {
    let whole = conjunction(compiled, None);
    let mut findings = Vec::new();
    for rule in rules {
        if let Some((cond, then)) = conditional(rule) {
            if !can_fail(&whole, then, &rule.name, schema)? && can_fail(&whole, cond, &rule.name, schema)? {
                findings.push(Finding {
                    kind: FindingKind::NonconstrainingClause {
                        rule: rule.name.clone(),
                    },
                    evidence: vec![Probe {
                        rules: names(compiled, None),
                        extra: Some(Expr::not(then.clone())),
                    }],
                });
            }
        }
    }
    Ok(findings)
}

fn number<S: Scalar>(value: &S) -> Expr {
    Expr::Number(value.to_rational())
}

/// Probes showing that no solution lies outside `interval`.
fn interval_evidence<S: Scalar>(rules: Vec<String>, variable: &str, interval: &Interval<S>) -> Vec<Probe> {
    let mut evidence = Vec::new();
    let var = variable_expr(variable);
    if let Some(Bound { value, closed }) = &interval.low {
        let op = if *closed { BinaryOp::Lt } else { BinaryOp::Le };
        evidence.push(Probe {
            rules: rules.clone(),
            extra: Some(Expr::binary(op, var.clone(), number(value))),
        });
    }
    if let Some(Bound { value, closed }) = &interval.high {
        let op = if *closed { BinaryOp::Gt } else { BinaryOp::Ge };
        evidence.push(Probe {
            rules,
            extra: Some(Expr::binary(op, var, number(value))),
        });
    }
    evidence
}

/// Fixed values, and ranges that the rules only impose in combination.
fn bound_findings<S: Scalar>(whole: &ConstraintSystem<S>, compiled: &[CompiledRule<S>]) -> Vec<Finding<S>> {
    let rules = names(compiled, None);
    let mut findings = Vec::new();
    for (variable, declaration) in &whole.numeric_vars {
        let Some(implied) = implied_bounds(whole, variable) else {
            continue;
        };
        let declared = match &declaration.bounds {
            Some((low, high)) => Interval::closed(low.clone(), high.clone()),
            None => Interval::unbounded(),
        };
        if let Some(value) = implied.point() {
            findings.push(Finding {
                kind: FindingKind::FixedValue {
                    variable: variable.clone(),
                    value: value.clone(),
                },
                evidence: interval_evidence(rules.clone(), variable, &implied),
            });
            continue;
        }
        if implied == declared {
            continue;
        }
        let mut separately = declared.clone();
        for rule in compiled {
            if rule.system.numeric_vars.contains_key(variable) {
                if let Some(range) = implied_bounds(&rule.system, variable) {
                    separately = separately.meet(&range);
                }
            }
        }
        if implied != separately {
            findings.push(Finding {
                kind: FindingKind::RangeRestriction {
                    variable: variable.clone(),
                    implied: implied.clone(),
                    declared,
                },
                evidence: interval_evidence(rules.clone(), variable, &implied),
            });
        }
    }
    findings
}

/// Everything the analyzer reports about a rule set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisReport<S> {
    pub findings: Vec<Finding<S>>,
    /// Rules left out of the analysis, with the reason.
    pub unsupported: Vec<AnalysisError>,
    pub feasible: bool,
}

/// Runs every detection on the analyzable rules: per-rule lint, then
/// infeasibility, partial infeasibility, implied bounds, redundancy,
/// nonrelaxing and nonconstraining clauses. Rules outside the analyzable
/// fragment are listed in `unsupported` and otherwise ignored.
pub fn analyze_ruleset<S: Scalar>(rules: &RuleSet, schema: &Schema) -> AnalysisReport<S> {
    let mut supported = Vec::new();
    let mut compiled = Vec::new();
    let mut unsupported = Vec::new();
    for rule in rules {
        match compile_rule::<S>(rule, schema) {
            Ok(c) => {
                supported.push(rule.clone());
                compiled.push(c);
            }
            Err(e) => unsupported.push(e),
        }
    }
    let mut findings: Vec<Finding<S>> = supported
        .iter()
        .zip(&compiled)
        .filter_map(|(rule, c)| lint_compiled(rule, c))
        .collect();
    let whole = conjunction(&compiled, None);
    if !is_satisfiable(&whole) {
        findings.push(Finding {
            kind: FindingKind::Infeasible,
            evidence: vec![Probe {
                rules: names(&compiled, None),
                extra: None,
            }],
        });
        return AnalysisReport {
            findings,
            unsupported,
            feasible: false,
        };
    }
    findings.extend(detect_partial_infeasibility(&whole));
    findings.extend(bound_findings(&whole, &compiled));
    findings.extend(redundant(&supported, &compiled));
    let conditionals = || -> Result<Vec<Finding<S>>, AnalysisError> {
        let mut found = nonrelaxing(&supported, &compiled, schema)?;
        found.extend(nonconstraining(&supported, &compiled, schema)?);
        Ok(found)
    };
    findings.extend(conditionals().expect("parts of compiled rules compile"));
    AnalysisReport {
        findings,
        unsupported,
        feasible: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_rules;
    use crate::schema::parse_schema;
    use crate::Rational;

    fn schema() -> Schema {
        parse_schema(
            "gender : categorical {male, female}\nincome : numeric\nx : numeric\ny : numeric\njob : categorical {employed, unemployed}\n",
        )
        .unwrap()
    }

    fn kinds(rules: &str) -> Vec<String> {
        let rules = parse_rules(rules).unwrap();
        let report = analyze_ruleset::<Rational>(&rules, &schema());
        for finding in &report.findings {
            for probe in &finding.evidence {
                assert!(verify_probe::<Rational>(&rules, &schema(), probe).unwrap(), "{probe}");
            }
        }
        report
            .findings
            .iter()
            .map(|f| match f.kind.subject() {
                Some(s) => format!("{}({s})", f.kind.name()),
                None => f.kind.name().to_string(),
            })
            .collect()
    }

    #[test]
    fn lint() {
        let lint = |text: &str| {
            let rules = parse_rules(&format!("r: {text}")).unwrap();
            lint_rule::<Rational>(&rules.rules()[0], &schema())
                .unwrap()
                .map(|f| f.kind.name())
        };
        assert_eq!(lint("x >= 0 or x <= 1"), Some("Tautology"));
        assert_eq!(lint("x >= 0 and x <= -1"), Some("Contradiction"));
        assert_eq!(lint("x >= 0"), None);
        assert_eq!(lint(r#"job == "employed" or job == "unemployed""#), Some("Tautology"));
    }

    #[test]
    fn partial_infeasibility() {
        assert_eq!(
            kinds("a: if (gender == \"male\") income > 2000\nb: if (gender == \"male\") income < 1000"),
            vec!["PartialInfeasibility(gender)"]
        );
        assert!(kinds("a: if (gender == \"male\") income > 2000").is_empty());
    }

    #[test]
    fn redundancy() {
        assert_eq!(kinds("a: x >= 0\nb: x >= 1"), vec!["Redundant(a)"]);
        assert!(kinds("a: x >= 0\nb: y >= 0").is_empty());
        assert_eq!(kinds("a: x >= 0\nb: x >= 0"), vec!["Redundant(a)", "Redundant(b)"]);
    }

    #[test]
    fn conditionals() {
        assert_eq!(
            kinds("a: if (x >= 0) y >= 0\nb: x >= 0"),
            vec!["RangeRestriction(y)", "NonrelaxingClause(a)"]
        );
        assert_eq!(
            kinds("a: if (x > 0) y > 0\nb: if (x < 1) y > 1"),
            vec!["RangeRestriction(y)", "NonconstrainingClause(a)"]
        );
    }

    #[test]
    fn fixed_values_and_infeasibility() {
        assert_eq!(kinds("a: x >= 0\nb: x <= 0"), vec!["FixedValue(x)"]);
        assert_eq!(kinds("a: x >= 0\nb: x <= -1"), vec!["Infeasible"]);
        let rules = parse_rules("a: x >= 0\nb: x <= 0").unwrap();
        let system = super::super::compile_rules::<Rational>(&rules, &schema()).unwrap();
        assert_eq!(
            implied_bounds(&system, "x").unwrap(),
            Interval::closed(Rational::from_i64(0), Rational::from_i64(0))
        );
    }
}
