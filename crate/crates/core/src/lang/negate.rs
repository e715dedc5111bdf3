use super::ast::*;

/// Negates a rule, pushing the negation down to comparisons.
///
/// Comparisons flip (`a >= b` becomes `a < b`), De Morgan applies to
/// `and`/`or`, `if (C) Q` becomes `C and not Q`, and a double negation
/// cancels. Builtins keep an explicit `not`. Every step is an equivalence
/// under three-valued evaluation.
pub fn negate_rule(rule: &Rule) -> Rule {
    Rule {
        name: rule.name.clone(),
        body: negate_expr(&rule.body),
        span: rule.span,
    }
}

pub fn negate_expr(expr: &Expr) -> Expr {
    match expr {
        Expr::Unary { op: UnaryOp::Not, arg } => (**arg).clone(),
        Expr::Binary { op, lhs, rhs } => match op {
            BinaryOp::And => Expr::or(negate_expr(lhs), negate_expr(rhs)),
            BinaryOp::Or => Expr::and(negate_expr(lhs), negate_expr(rhs)),
            _ => match op.negated_comparison() {
                Some(flipped) => Expr::binary(flipped, (**lhs).clone(), (**rhs).clone()),
                None => Expr::not(expr.clone()),
            },
        },
        Expr::If { cond, then } => Expr::and((**cond).clone(), negate_expr(then)),
        other => Expr::not(other.clone()),
    }
}
