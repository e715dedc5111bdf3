//! Canonical rule text. `parse_rules(format_rule(r))` reproduces `r`.

use super::ast::*;
use crate::scalar::format_rational;
use crate::Rational;

const PREC_IF: u8 = 0;
const PREC_OR: u8 = 1;
const PREC_AND: u8 = 2;
const PREC_NOT: u8 = 3;
const PREC_CMP: u8 = 4;
const PREC_SUM: u8 = 5;
const PREC_TERM: u8 = 6;
const PREC_UNARY: u8 = 7;
const PREC_ATOM: u8 = 8;

pub fn format_rule(rule: &Rule) -> String {
    format!("{}: {}", rule.name, format_expr(&rule.body))
}

pub fn format_ruleset(rules: &RuleSet) -> String {
    rules.iter().map(|r| format_rule(r) + "\n").collect()
}

pub fn format_expr(expr: &Expr) -> String {
    let mut out = String::new();
    write_expr(expr, PREC_IF, &mut out);
    out
}

fn precedence(expr: &Expr) -> u8 {
    match expr {
        Expr::If { .. } => PREC_IF,
        Expr::Binary { op, .. } => match op {
            BinaryOp::Or => PREC_OR,
            BinaryOp::And => PREC_AND,
            BinaryOp::Add | BinaryOp::Sub => PREC_SUM,
            BinaryOp::Mul | BinaryOp::Div => PREC_TERM,
            _ => PREC_CMP,
        },
        Expr::Unary { op: UnaryOp::Not, .. } => PREC_NOT,
        Expr::Unary { op: UnaryOp::Neg, .. } => PREC_UNARY,
        Expr::Number(n) if !is_plain_literal(n) => PREC_UNARY,
        _ => PREC_ATOM,
    }
}

/// Literals written as decimals parse back to themselves; other rationals
/// are written as a parenthesised division.
fn is_plain_literal(n: &Rational) -> bool {
    !format_rational(n).contains('/')
}

fn write_expr(expr: &Expr, min_prec: u8, out: &mut String) {
    let prec = precedence(expr);
    let parens = prec < min_prec;
    if parens {
        out.push('(');
    }
    match expr {
        Expr::Number(n) => {
            if is_plain_literal(n) {
                out.push_str(&format_rational(n));
            } else {
                out.push_str(&format!("({} / {})", format_big(n.numer()), format_big(n.denom())));
            }
        }
        Expr::Text(t) => write_string(t, out),
        Expr::Na => out.push_str("NA"),
        Expr::Var(v) => write_var(v, out),
        Expr::Aggregate { func, axis, arg } => {
            out.push_str(func.name());
            out.push('(');
            write_expr(arg, PREC_IF, out);
            if *axis != AggAxis::Units {
                out.push_str(", ");
                out.push_str(axis.keyword());
            }
            out.push(')');
        }
        Expr::Unary { op, arg } => match op {
            UnaryOp::Not => {
                out.push_str("not ");
                write_expr(arg, PREC_NOT, out);
            }
            UnaryOp::Neg => {
                out.push('-');
                // `-3` would reparse as a literal, so keep the negation visible.
                if matches!(**arg, Expr::Number(_)) {
                    out.push('(');
                    write_expr(arg, PREC_IF, out);
                    out.push(')');
                } else {
                    write_expr(arg, PREC_UNARY, out);
                }
            }
            UnaryOp::Abs => {
                out.push_str("abs(");
                write_expr(arg, PREC_IF, out);
                out.push(')');
            }
        },
        Expr::Binary { op, lhs, rhs } => {
            let (left, right) = match op {
                BinaryOp::Or => (PREC_OR, PREC_AND),
                BinaryOp::And => (PREC_AND, PREC_NOT),
                BinaryOp::Add | BinaryOp::Sub => (PREC_SUM, PREC_TERM),
                BinaryOp::Mul | BinaryOp::Div => (PREC_TERM, PREC_UNARY),
                _ => (PREC_SUM, PREC_SUM),
            };
            write_expr(lhs, left, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_expr(rhs, right, out);
        }
        Expr::If { cond, then } => {
            out.push_str("if (");
            write_expr(cond, PREC_IF, out);
            out.push_str(") ");
            write_expr(then, PREC_IF, out);
        }
        Expr::Builtin { func, args } => {
            out.push_str(func.name());
            out.push('(');
            match func {
                BuiltinFn::InSet => {
                    write_expr(&args[0], PREC_IF, out);
                    out.push_str(", {");
                    for (i, member) in args[1..].iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        write_expr(member, PREC_IF, out);
                    }
                    out.push('}');
                }
                _ => {
                    for (i, arg) in args.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        write_expr(arg, PREC_IF, out);
                    }
                }
            }
            out.push(')');
        }
    }
    if parens {
        out.push(')');
    }
}

fn format_big(n: &num_bigint::BigInt) -> String {
    n.to_string()
}

fn write_var(var: &VarRef, out: &mut String) {
    if let Some(table) = &var.table {
        out.push_str(table);
        out.push('.');
    }
    out.push_str(&var.variable);
    if var.lag > 0 {
        out.push('@');
        out.push_str(&var.lag.to_string());
    }
}

fn write_string(text: &str, out: &mut String) {
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            other => out.push(other),
        }
    }
    out.push('"');
}
