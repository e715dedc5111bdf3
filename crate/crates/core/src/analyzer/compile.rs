use std::collections::{BTreeMap, BTreeSet};

use super::{AnalysisError, Atom, Clause, ConstraintSystem, NumericVar, Relation};
use crate::lang::{BinaryOp, BuiltinFn, Expr, Rule, RuleSet, UnaryOp, VarRef};
use crate::scalar::Scalar;
use crate::schema::{Schema, VarKind, VariableDecl};

/// A rule compiled both ways, for probes that need its negation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledRule<S> {
    pub name: String,
    pub system: ConstraintSystem<S>,
    pub negation: ConstraintSystem<S>,
}

/// Negation normal form over atoms.
#[derive(Debug, Clone)]
enum Formula<S> {
    Const(bool),
    Atom(Atom<S>),
    And(Vec<Formula<S>>),
    Or(Vec<Formula<S>>),
}

impl<S: Scalar> Formula<S> {
    fn and(parts: Vec<Formula<S>>) -> Formula<S> {
        let mut kept = Vec::new();
        for part in parts {
            match part {
                Formula::Const(true) => {}
                Formula::Const(false) => return Formula::Const(false),
                Formula::And(inner) => kept.extend(inner),
                other => kept.push(other),
            }
        }
        match kept.len() {
            0 => Formula::Const(true),
            1 => kept.pop().expect("one part"),
            _ => Formula::And(kept),
        }
    }

    fn or(parts: Vec<Formula<S>>) -> Formula<S> {
        let mut kept = Vec::new();
        for part in parts {
            match part {
                Formula::Const(false) => {}
                Formula::Const(true) => return Formula::Const(true),
                Formula::Or(inner) => kept.extend(inner),
                other => kept.push(other),
            }
        }
        match kept.len() {
            0 => Formula::Const(false),
            1 => kept.pop().expect("one part"),
            _ => Formula::Or(kept),
        }
    }

    /// Conjunctive normal form by distribution.
    fn cnf(self) -> Vec<Vec<Atom<S>>> {
        match self {
            Formula::Const(true) => Vec::new(),
            Formula::Const(false) => vec![Vec::new()],
            Formula::Atom(atom) => vec![vec![atom]],
            Formula::And(parts) => parts.into_iter().flat_map(Formula::cnf).collect(),
            Formula::Or(parts) => {
                let mut product: Vec<Vec<Atom<S>>> = vec![Vec::new()];
                for part in parts {
                    let clauses = part.cnf();
                    let mut next = Vec::with_capacity(product.len() * clauses.len());
                    for left in &product {
                        for right in &clauses {
                            let mut merged = left.clone();
                            for atom in right {
                                if !merged.contains(atom) {
                                    merged.push(atom.clone());
                                }
                            }
                            next.push(merged);
                        }
                    }
                    product = next;
                }
                product
            }
        }
    }
}

type Linear<S> = (BTreeMap<String, S>, S);

struct Compiler<'a, S> {
    schema: &'a Schema,
    rule: &'a str,
    qualify: bool,
    numeric: BTreeMap<String, NumericVar<S>>,
    categorical: BTreeMap<String, Vec<String>>,
}

enum Kind {
    Text,
    Number,
}

impl<'a, S: Scalar> Compiler<'a, S> {
    fn new(schema: &'a Schema, rule: &'a str) -> Self {
        Compiler {
            schema,
            rule,
            qualify: schema.tables.len() > 1,
            numeric: BTreeMap::new(),
            categorical: BTreeMap::new(),
        }
    }

    fn unsupported(&self, reason: impl Into<String>) -> AnalysisError {
        AnalysisError::UnsupportedForAnalysis {
            rule: self.rule.to_string(),
            reason: reason.into(),
        }
    }

    /// Rejects aggregates, lags and references spanning several tables.
    fn check_scope(&self, expr: &Expr) -> Result<(), AnalysisError> {
        let mut tables = BTreeSet::new();
        let mut problem = None;
        expr.walk(&mut |e| match e {
            Expr::Aggregate { .. } => {
                problem.get_or_insert("aggregates are outside the analyzable fragment");
            }
            Expr::Var(v) if v.lag > 0 => {
                problem.get_or_insert("lagged references are outside the analyzable fragment");
            }
            Expr::Var(v) => {
                if let Ok((table, _)) = self.resolve(v) {
                    tables.insert(table);
                }
            }
            Expr::Na => {
                problem.get_or_insert("NA literals are outside the analyzable fragment");
            }
            _ => {}
        });
        if let Some(reason) = problem {
            return Err(self.unsupported(reason));
        }
        if tables.len() > 1 {
            return Err(self.unsupported("cross-table references are outside the analyzable fragment"));
        }
        Ok(())
    }

    fn resolve(&self, var: &VarRef) -> Result<(String, &'a VariableDecl), AnalysisError> {
        let unknown = |name: String| AnalysisError::UnknownVariable {
            rule: self.rule.to_string(),
            name,
        };
        let table = match &var.table {
            Some(t) => t.clone(),
            None => match self.schema.tables_with(&var.variable)[..] {
                [only] => only.to_string(),
                [] => return Err(unknown(var.variable.clone())),
                _ => {
                    return Err(
                        self.unsupported(format!("`{}` is declared in several tables; qualify it", var.variable))
                    )
                }
            },
        };
        match self.schema.variable(&table, &var.variable) {
            Some(decl) => Ok((table, decl)),
            None => Err(unknown(format!("{table}.{}", var.variable))),
        }
    }

    /// Analysis name of a variable, registering its domain.
    fn declare(&mut self, var: &VarRef) -> Result<(String, &'a VariableDecl), AnalysisError> {
        let (table, decl) = self.resolve(var)?;
        let name = if self.qualify {
            format!("{table}.{}", decl.name)
        } else {
            decl.name.clone()
        };
        match decl.kind {
            VarKind::Categorical => {
                self.categorical.insert(name.clone(), decl.levels.clone());
            }
            VarKind::Numeric | VarKind::Integer => {
                let bounds = match &decl.bounds {
                    Some((low, high)) => Some((self.scalar(low)?, self.scalar(high)?)),
                    None => None,
                };
                self.numeric.insert(
                    name.clone(),
                    NumericVar {
                        bounds,
                        integer: decl.kind == VarKind::Integer,
                    },
                );
            }
        }
        Ok((name, decl))
    }

    fn scalar(&self, value: &crate::Rational) -> Result<S, AnalysisError> {
        S::from_rational(value)
            .ok_or_else(|| self.unsupported(format!("constant {value} is out of range for the scalar type")))
    }

    fn formula(&mut self, expr: &Expr, positive: bool) -> Result<Formula<S>, AnalysisError> {
        match expr {
            Expr::Unary { op: UnaryOp::Not, arg } => self.formula(arg, !positive),
            Expr::Binary { op, lhs, rhs } if op.is_logical() => {
                let l = self.formula(lhs, positive)?;
                let r = self.formula(rhs, positive)?;
                let conjunction = (*op == BinaryOp::And) == positive;
                Ok(if conjunction {
                    Formula::and(vec![l, r])
                } else {
                    Formula::or(vec![l, r])
                })
            }
            Expr::Binary { op, lhs, rhs } if op.is_comparison() => {
                self.comparison(relation_of(*op), lhs, rhs, positive)
            }
            Expr::If { cond, then } => {
                if positive {
                    Ok(Formula::or(vec![self.formula(cond, false)?, self.formula(then, true)?]))
                } else {
                    Ok(Formula::and(vec![
                        self.formula(cond, true)?,
                        self.formula(then, false)?,
                    ]))
                }
            }
            Expr::Builtin { func, args } => self.builtin(*func, args, positive),
            other => Err(self.unsupported(format!("`{other}` is not a condition"))),
        }
    }

    fn builtin(&mut self, func: BuiltinFn, args: &[Expr], positive: bool) -> Result<Formula<S>, AnalysisError> {
        let arg = &args[0];
        let truth = match func {
            BuiltinFn::IsNa => {
                return Err(self.unsupported("is_na depends on missing values, which analysis does not model"))
            }
            BuiltinFn::InSet => return self.in_set(arg, &args[1..], positive),
            BuiltinFn::IsNumber => matches!(self.kind_of(arg)?, Kind::Number),
            BuiltinFn::IsText => matches!(self.kind_of(arg)?, Kind::Text),
            BuiltinFn::IsInteger => match (arg, self.kind_of(arg)?) {
                (_, Kind::Text) => false,
                (Expr::Number(n), _) => n.is_integer(),
                (Expr::Var(v), _) if self.declare(v)?.1.kind == VarKind::Integer => true,
                _ => {
                    return Err(
                        self.unsupported("is_integer of an expression not declared integer (integrality is relaxed)")
                    )
                }
            },
        };
        Ok(Formula::Const(truth == positive))
    }

    fn kind_of(&mut self, expr: &Expr) -> Result<Kind, AnalysisError> {
        match expr {
            Expr::Text(_) => Ok(Kind::Text),
            Expr::Var(v) => Ok(if self.declare(v)?.1.kind == VarKind::Categorical {
                Kind::Text
            } else {
                Kind::Number
            }),
            other => {
                self.linear(other)?;
                Ok(Kind::Number)
            }
        }
    }

    fn is_categorical(&mut self, expr: &Expr) -> Result<bool, AnalysisError> {
        Ok(match expr {
            Expr::Text(_) => true,
            Expr::Var(v) => self.declare(v)?.1.kind == VarKind::Categorical,
            _ => false,
        })
    }

    fn in_set(&mut self, arg: &Expr, members: &[Expr], positive: bool) -> Result<Formula<S>, AnalysisError> {
        if self.is_categorical(arg)? {
            let texts: BTreeSet<String> = members
                .iter()
                .filter_map(|m| match m {
                    Expr::Text(t) => Some(t.clone()),
                    _ => None,
                })
                .collect();
            return match arg {
                Expr::Text(t) => Ok(Formula::Const(texts.contains(t) == positive)),
                Expr::Var(v) => {
                    let (name, decl) = self.declare(v)?;
                    Ok(self.level_test(&name, &decl.levels, |l| texts.contains(l), positive))
                }
                _ => unreachable!("categorical operands are variables or text"),
            };
        }
        let mut parts = Vec::new();
        for member in members {
            if let Expr::Number(_) = member {
                parts.push(self.comparison(Relation::Eq, arg, member, positive)?);
            }
        }
        if parts.is_empty() {
            self.linear(arg)?;
        }
        Ok(if positive {
            Formula::or(parts)
        } else {
            Formula::and(parts)
        })
    }

    /// `variable` takes a level satisfying `test` (or, negated, one that
    /// does not).
    fn level_test(
        &self,
        variable: &str,
        levels: &[String],
        test: impl Fn(&String) -> bool,
        positive: bool,
    ) -> Formula<S> {
        let allowed: BTreeSet<String> = levels.iter().filter(|l| test(l) == positive).cloned().collect();
        if allowed.is_empty() {
            Formula::Const(false)
        } else if allowed.len() == levels.len() {
            Formula::Const(true)
        } else {
            Formula::Atom(Atom::Categorical {
                variable: variable.to_string(),
                allowed,
            })
        }
    }

    fn comparison(
        &mut self,
        op: Relation,
        lhs: &Expr,
        rhs: &Expr,
        positive: bool,
    ) -> Result<Formula<S>, AnalysisError> {
        if let Some(inner) = first_abs(lhs).or_else(|| first_abs(rhs)).cloned() {
            let zero = Expr::int(0);
            let nonnegative = self.comparison(Relation::Ge, &inner, &zero, true)?;
            let negative = self.comparison(Relation::Lt, &inner, &zero, true)?;
            let flipped = Expr::unary(UnaryOp::Neg, inner.clone());
            let when_nonnegative = self.comparison(
                op,
                &replace_abs(lhs, &inner, &inner),
                &replace_abs(rhs, &inner, &inner),
                positive,
            )?;
            let when_negative = self.comparison(
                op,
                &replace_abs(lhs, &inner, &flipped),
                &replace_abs(rhs, &inner, &flipped),
                positive,
            )?;
            return Ok(Formula::or(vec![
                Formula::and(vec![nonnegative, when_nonnegative]),
                Formula::and(vec![negative, when_negative]),
            ]));
        }
        let relation = if positive { op } else { op.negated() };
        if self.is_categorical(lhs)? || self.is_categorical(rhs)? {
            return self.categorical_comparison(relation, lhs, rhs);
        }
        let (mut coefficients, left_constant) = self.linear(lhs)?;
        let (right, right_constant) = self.linear(rhs)?;
        for (var, c) in right {
            let entry = coefficients.entry(var).or_insert_with(S::zero);
            *entry = entry.clone() - c;
        }
        let constant = right_constant - left_constant;
        let atom = |relation| Atom::linear(coefficients.clone(), relation, constant.clone());
        if relation == Relation::Ne {
            return Ok(Formula::or(vec![lift(atom(Relation::Lt)), lift(atom(Relation::Gt))]));
        }
        Ok(lift(atom(relation)))
    }

    fn categorical_comparison(
        &mut self,
        relation: Relation,
        lhs: &Expr,
        rhs: &Expr,
    ) -> Result<Formula<S>, AnalysisError> {
        let equal = match relation {
            Relation::Eq => true,
            Relation::Ne => false,
            _ => return Err(self.unsupported("ordering comparisons on text are outside the analyzable fragment")),
        };
        match (lhs, rhs) {
            (Expr::Text(a), Expr::Text(b)) => Ok(Formula::Const((a == b) == equal)),
            (Expr::Var(v), Expr::Text(t)) | (Expr::Text(t), Expr::Var(v)) => {
                let (name, decl) = self.declare(v)?;
                if decl.kind != VarKind::Categorical {
                    return Err(self.unsupported("comparison of a number with text"));
                }
                Ok(self.level_test(&name, &decl.levels, |l| l == t, equal))
            }
            (Expr::Var(a), Expr::Var(b)) => {
                let (a_name, a_decl) = self.declare(a)?;
                let (b_name, b_decl) = self.declare(b)?;
                if a_decl.kind != VarKind::Categorical || b_decl.kind != VarKind::Categorical {
                    return Err(self.unsupported("comparison of a number with text"));
                }
                let mut parts = Vec::new();
                for level in &a_decl.levels {
                    let left = self.level_test(&a_name, &a_decl.levels, |l| l == level, true);
                    let right = self.level_test(&b_name, &b_decl.levels, |l| l == level, equal);
                    parts.push(Formula::and(vec![left, right]));
                }
                Ok(Formula::or(parts))
            }
            _ => Err(self.unsupported("comparison of a number with text")),
        }
    }

    fn linear(&mut self, expr: &Expr) -> Result<Linear<S>, AnalysisError> {
        match expr {
            Expr::Number(n) => Ok((BTreeMap::new(), self.scalar(n)?)),
            Expr::Var(v) => {
                let (name, decl) = self.declare(v)?;
                if !decl.is_numeric() {
                    return Err(self.unsupported(format!("categorical variable `{name}` in arithmetic")));
                }
                Ok((BTreeMap::from([(name, S::one())]), S::zero()))
            }
            Expr::Unary { op: UnaryOp::Neg, arg } => {
                let (coefficients, constant) = self.linear(arg)?;
                Ok((coefficients.into_iter().map(|(v, c)| (v, -c)).collect(), -constant))
            }
            Expr::Binary { op, lhs, rhs } if op.is_arithmetic() => {
                let (mut l, lc) = self.linear(lhs)?;
                let (r, rc) = self.linear(rhs)?;
                match op {
                    BinaryOp::Add | BinaryOp::Sub => {
                        let sign = if *op == BinaryOp::Add { S::one() } else { -S::one() };
                        for (var, c) in r {
                            let entry = l.entry(var).or_insert_with(S::zero);
                            *entry = entry.clone() + sign.clone() * c;
                        }
                        Ok((l, lc + sign * rc))
                    }
                    BinaryOp::Mul => {
                        if is_constant(&l) {
                            Ok((scale(r, &lc), rc * lc))
                        } else if is_constant(&r) {
                            Ok((scale(l, &rc), lc * rc))
                        } else {
                            Err(self.unsupported("product of variables is nonlinear"))
                        }
                    }
                    BinaryOp::Div => {
                        if !is_constant(&r) {
                            Err(self.unsupported("variable in a divisor is nonlinear"))
                        } else if rc.is_zero() {
                            Err(self.unsupported("division by zero"))
                        } else {
                            let inverse = S::one() / rc;
                            Ok((scale(l, &inverse), lc * inverse))
                        }
                    }
                    _ => unreachable!("arithmetic operator"),
                }
            }
            Expr::Text(_) => Err(self.unsupported("text in arithmetic")),
            other => Err(self.unsupported(format!("`{other}` is not a linear term"))),
        }
    }

    fn finish(self, formula: Formula<S>) -> ConstraintSystem<S> {
        let mut clauses: Vec<Clause<S>> = formula
            .cnf()
            .into_iter()
            .map(|disjuncts| Clause {
                disjuncts,
                origin: self.rule.to_string(),
            })
            .collect();
        for (name, var) in &self.numeric {
            if let Some((low, high)) = &var.bounds {
                for (relation, constant) in [(Relation::Ge, low), (Relation::Le, high)] {
                    let atom = Atom::linear(BTreeMap::from([(name.clone(), S::one())]), relation, constant.clone())
                        .expect("unit coefficient");
                    clauses.push(Clause {
                        disjuncts: vec![atom],
                        origin: "schema".to_string(),
                    });
                }
            }
        }
        ConstraintSystem {
            clauses,
            numeric_vars: self.numeric,
            categorical_vars: self.categorical,
        }
    }
}

fn lift<S>(atom: Result<Atom<S>, bool>) -> Formula<S> {
    match atom {
        Ok(atom) => Formula::Atom(atom),
        Err(truth) => Formula::Const(truth),
    }
}

fn is_constant<S: Scalar>(coefficients: &BTreeMap<String, S>) -> bool {
    coefficients.values().all(|c| c.is_zero())
}

fn scale<S: Scalar>(coefficients: BTreeMap<String, S>, factor: &S) -> BTreeMap<String, S> {
    coefficients.into_iter().map(|(v, c)| (v, c * factor.clone())).collect()
}

fn relation_of(op: BinaryOp) -> Relation {
    match op {
        BinaryOp::Lt => Relation::Lt,
        BinaryOp::Le => Relation::Le,
        BinaryOp::Eq => Relation::Eq,
        BinaryOp::Ne => Relation::Ne,
        BinaryOp::Ge => Relation::Ge,
        BinaryOp::Gt => Relation::Gt,
        other => unreachable!("{other:?} is not a comparison"),
    }
}

fn first_abs(expr: &Expr) -> Option<&Expr> {
    let mut found = None;
    expr.walk(&mut |e| {
        if let (Expr::Unary { op: UnaryOp::Abs, arg }, None) = (e, &found) {
            found = Some(&**arg);
        }
    });
    found
}

/// Replaces every `abs(inner)` in `expr` with `with`.
fn replace_abs(expr: &Expr, inner: &Expr, with: &Expr) -> Expr {
    match expr {
        Expr::Unary { op: UnaryOp::Abs, arg } if **arg == *inner => with.clone(),
        Expr::Unary { op, arg } => Expr::unary(*op, replace_abs(arg, inner, with)),
        Expr::Binary { op, lhs, rhs } => {
            Expr::binary(*op, replace_abs(lhs, inner, with), replace_abs(rhs, inner, with))
        }
        other => other.clone(),
    }
}

/// Compiles a condition (or its negation) into a system, including domain
/// bounds of the variables it mentions.
pub fn compile_expr<S: Scalar>(
    expr: &Expr,
    positive: bool,
    origin: &str,
    schema: &Schema,
) -> Result<ConstraintSystem<S>, AnalysisError> {
    let mut compiler = Compiler::new(schema, origin);
    compiler.check_scope(expr)?;
    let formula = compiler.formula(expr, positive)?;
    Ok(compiler.finish(formula))
}

pub fn compile_rule<S: Scalar>(rule: &Rule, schema: &Schema) -> Result<CompiledRule<S>, AnalysisError> {
    Ok(CompiledRule {
        name: rule.name.clone(),
        system: compile_expr(&rule.body, true, &rule.name, schema)?,
        negation: compile_expr(&rule.body, false, &rule.name, schema)?,
    })
}

/// The conjunction of all rules.
pub fn compile_rules<S: Scalar>(rules: &RuleSet, schema: &Schema) -> Result<ConstraintSystem<S>, AnalysisError> {
    let mut system = ConstraintSystem::default();
    for rule in rules {
        system.conjoin(compile_expr(&rule.body, true, &rule.name, schema)?);
    }
    Ok(system)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_expr, parse_rules};
    use crate::schema::parse_schema;
    use crate::Rational;

    fn schema() -> Schema {
        parse_schema(
            "gender : categorical {male, female}\nincome : numeric\nx : numeric\ny : numeric\nage : integer [0, 150]\n",
        )
        .unwrap()
    }

    fn clauses(text: &str) -> Vec<String> {
        let system: ConstraintSystem<Rational> =
            compile_expr(&parse_expr(text).unwrap(), true, "r", &schema()).unwrap();
        system
            .clauses
            .iter()
            .map(|c| {
                c.disjuncts
                    .iter()
                    .map(|a| a.to_string())
                    .collect::<Vec<_>>()
                    .join(" | ")
            })
            .collect()
    }

    #[test]
    fn conditional_becomes_one_clause() {
        assert_eq!(
            clauses(r#"if (gender == "male") income > 2000"#),
            vec![r#"gender in {"female"} | -income < -2000"#]
        );
    }

    #[test]
    fn unit_clause_and_bounds() {
        assert_eq!(clauses("x >= 0"), vec!["-x <= 0"]);
        assert_eq!(clauses("age >= 18"), vec!["-age <= -18", "-age <= 0", "age <= 150"]);
    }

    #[test]
    fn not_equal_splits() {
        assert_eq!(clauses("x != 1"), vec!["x < 1 | -x < -1"]);
        assert_eq!(clauses(r#"gender != "male""#), vec![r#"gender in {"female"}"#]);
    }

    #[test]
    fn distribution() {
        assert_eq!(clauses("(x > 0 and y > 0) or x < -1").len(), 2);
        assert_eq!(clauses("x >= 0 or x <= 1").len(), 1);
    }

    #[test]
    fn abs_case_split() {
        assert_eq!(clauses("abs(x) <= 1").len(), 4);
    }

    #[test]
    fn constant_comparisons_fold() {
        assert!(clauses("1 < 2").is_empty());
        assert_eq!(clauses("1 > 2"), vec![""]);
        assert!(clauses("is_number(x)").is_empty());
    }

    #[test]
    fn unsupported_constructs() {
        for text in [
            "mean(x) >= 5",
            "x > x@1",
            "x * y > 0",
            "1 / x > 0",
            "is_na(x)",
            "is_integer(x)",
            r#"x == "a""#,
            r#"gender < "b""#,
        ] {
            let rules = parse_rules(&format!("r: {text}")).unwrap();
            let result = compile_rule::<Rational>(&rules.rules()[0], &schema());
            assert!(
                matches!(result, Err(AnalysisError::UnsupportedForAnalysis { .. })),
                "{text}"
            );
        }
        let rules = parse_rules("r: z > 0").unwrap();
        assert!(matches!(
            compile_rule::<Rational>(&rules.rules()[0], &schema()),
            Err(AnalysisError::UnknownVariable { .. })
        ));
    }

    #[test]
    fn qualified_names_with_several_tables() {
        let schema = parse_schema("a.x : numeric\nb.y : numeric\n").unwrap();
        let system: ConstraintSystem<Rational> =
            compile_expr(&parse_expr("x > 0").unwrap(), true, "r", &schema).unwrap();
        assert!(system.numeric_vars.contains_key("a.x"));
        let cross = compile_expr::<Rational>(&parse_expr("x > y").unwrap(), true, "r", &schema);
        assert!(cross.is_err());
    }
}
