//! Recursive-descent parser for rule files.

use thiserror::Error;

use super::ast::*;
use crate::scalar::parse_rational;
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LangError {
    #[error("line {line}, column {column}: expected {expected}")]
    ParseError {
        line: usize,
        column: usize,
        expected: String,
    },
    #[error("rule {rule}: type error in `{node}`: {message}")]
    TypeError {
        rule: String,
        node: String,
        message: String,
    },
    #[error("rule name `{0}` used more than once")]
    DuplicateRuleName(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(Rational),
    Str(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Dot,
    At,
    Plus,
    Minus,
    Star,
    Slash,
    Lt,
    Le,
    EqEq,
    Ne,
    Ge,
    Gt,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(name) => format!("`{name}`"),
            Tok::Number(_) => "number".to_string(),
            Tok::Str(_) => "string".to_string(),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::Dot => ".",
            Tok::At => "@",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::EqEq => "==",
            Tok::Ne => "!=",
            Tok::Ge => ">=",
            Tok::Gt => ">",
            _ => "",
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, LangError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let (mut i, mut line, mut column) = (0usize, 1usize, 1usize);
    // Where end of input is reported: just past the last token.
    let mut end = (1usize, 1usize);
    let error = |line, column, expected: &str| LangError::ParseError {
        line,
        column,
        expected: expected.to_string(),
    };
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, column);
        if c == '\n' {
            i += 1;
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            column += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let next = chars.get(i + 1).copied();
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            column += i - start;
            Tok::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            column += i - start;
            let literal: String = chars[start..i].iter().collect();
            Tok::Number(parse_rational(&literal).expect("lexer only accepts decimal digits"))
        } else if c == '"' {
            let mut value = String::new();
            i += 1;
            column += 1;
            loop {
                match chars.get(i) {
                    None | Some('\n') => {
                        return Err(error(start_line, start_col, "closing `\"`"));
                    }
                    Some('"') => {
                        i += 1;
                        column += 1;
                        break;
                    }
                    Some('\\') => match chars.get(i + 1) {
                        Some(&esc @ ('"' | '\\')) => {
                            value.push(esc);
                            i += 2;
                            column += 2;
                        }
                        Some('n') => {
                            value.push('\n');
                            i += 2;
                            column += 2;
                        }
                        _ => return Err(error(line, column, "escape `\\\"`, `\\\\` or `\\n`")),
                    },
                    Some(&ch) => {
                        value.push(ch);
                        i += 1;
                        column += 1;
                    }
                }
            }
            Tok::Str(value)
        } else {
            let (tok, width) = match (c, next) {
                ('<', Some('=')) => (Tok::Le, 2),
                ('>', Some('=')) => (Tok::Ge, 2),
                ('=', Some('=')) => (Tok::EqEq, 2),
                ('!', Some('=')) => (Tok::Ne, 2),
                ('<', _) => (Tok::Lt, 1),
                ('>', _) => (Tok::Gt, 1),
                ('=', _) => (Tok::EqEq, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                ('{', _) => (Tok::LBrace, 1),
                ('}', _) => (Tok::RBrace, 1),
                (',', _) => (Tok::Comma, 1),
                (':', _) => (Tok::Colon, 1),
                ('.', _) => (Tok::Dot, 1),
                ('@', _) => (Tok::At, 1),
                ('+', _) => (Tok::Plus, 1),
                ('-', _) => (Tok::Minus, 1),
                ('*', _) => (Tok::Star, 1),
                ('/', _) => (Tok::Slash, 1),
                _ => return Err(error(line, column, "a token")),
            };
            i += width;
            column += width;
            tok
        };
        tokens.push(Token {
            tok,
            line: start_line,
            column: start_col,
        });
        end = (line, column);
    }
    tokens.push(Token {
        tok: Tok::Eof,
        line: end.0,
        column: end.1,
    });
    Ok(tokens)
}

const KEYWORDS: [&str; 5] = ["if", "and", "or", "not", "NA"];

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let index = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[index].tok
    }

    fn bump(&mut self) -> Tok {
        let tok = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, expected: &str) -> LangError {
        let token = &self.tokens[self.pos];
        LangError::ParseError {
            line: token.line,
            column: token.column,
            expected: format!("{expected}, found {}", token.tok.describe()),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), LangError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&format!("`{}`", tok.symbol())))
        }
    }

    fn is_keyword(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(name) if name == word)
    }

    fn ident(&mut self, what: &str) -> Result<String, LangError> {
        match self.peek() {
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                let name = name.clone();
                self.bump();
                Ok(name)
            }
            _ => Err(self.error(what)),
        }
    }

    fn ruleset(&mut self) -> Result<Vec<Rule>, LangError> {
        let mut rules = Vec::new();
        while *self.peek() != Tok::Eof {
            let token = &self.tokens[self.pos];
            let span = SourceSpan {
                line: token.line,
                column: token.column,
            };
            let name = self.ident("rule name")?;
            self.expect(Tok::Colon)?;
            let body = self.expr()?;
            rules.push(Rule { name, body, span });
        }
        Ok(rules)
    }

    fn expr(&mut self) -> Result<Expr, LangError> {
        if self.is_keyword("if") {
            self.bump();
            self.expect(Tok::LParen)?;
            let cond = self.expr()?;
            self.expect(Tok::RParen)?;
            let then = self.expr()?;
            return Ok(Expr::implies(cond, then));
        }
        self.or_expr()
    }

    fn or_expr(&mut self) -> Result<Expr, LangError> {
        let mut lhs = self.and_expr()?;
        while self.is_keyword("or") {
            self.bump();
            let rhs = self.and_expr()?;
            lhs = Expr::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, LangError> {
        let mut lhs = self.not_expr()?;
        while self.is_keyword("and") {
            self.bump();
            let rhs = self.not_expr()?;
            lhs = Expr::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> Result<Expr, LangError> {
        if self.is_keyword("not") {
            self.bump();
            return Ok(Expr::not(self.not_expr()?));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Expr, LangError> {
        let lhs = self.sum()?;
        let op = match self.peek() {
            Tok::Lt => BinaryOp::Lt,
            Tok::Le => BinaryOp::Le,
            Tok::EqEq => BinaryOp::Eq,
            Tok::Ne => BinaryOp::Ne,
            Tok::Ge => BinaryOp::Ge,
            Tok::Gt => BinaryOp::Gt,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.sum()?;
        Ok(Expr::binary(op, lhs, rhs))
    }

    fn sum(&mut self) -> Result<Expr, LangError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, LangError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> Result<Expr, LangError> {
        match self.peek().clone() {
            Tok::Number(value) => {
                self.bump();
                Ok(Expr::Number(value))
            }
            Tok::Str(value) => {
                self.bump();
                Ok(Expr::Text(value))
            }
            Tok::Minus => {
                self.bump();
                // A minus sign directly before a literal is part of the literal.
                if let Tok::Number(value) = self.peek().clone() {
                    self.bump();
                    return Ok(Expr::Number(-value));
                }
                Ok(Expr::unary(UnaryOp::Neg, self.factor()?))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) if name == "NA" => {
                self.bump();
                Ok(Expr::Na)
            }
            Tok::Ident(name) if *self.peek_at(1) == Tok::LParen && is_function(&name) => {
                self.bump();
                self.call(&name)
            }
            Tok::Ident(_) => self.varref().map(Expr::Var),
            _ => Err(self.error("an operand")),
        }
    }

    fn call(&mut self, name: &str) -> Result<Expr, LangError> {
        self.expect(Tok::LParen)?;
        let expr = if let Some(func) = AggFn::from_name(name) {
            let arg = self.expr()?;
            let mut axis = AggAxis::Units;
            if *self.peek() == Tok::Comma {
                self.bump();
                axis = match self.peek() {
                    Tok::Ident(word) => AggAxis::from_keyword(word),
                    _ => None,
                }
                .ok_or_else(|| self.error("aggregation axis `units`, `times` or `all`"))?;
                self.bump();
            }
            Expr::aggregate(func, axis, arg)
        } else if name == "abs" {
            let arg = self.expr()?;
            Expr::unary(UnaryOp::Abs, arg)
        } else if name == "in_set" {
            let mut args = vec![self.expr()?];
            self.expect(Tok::Comma)?;
            self.expect(Tok::LBrace)?;
            loop {
                args.push(self.set_member()?);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
            self.expect(Tok::RBrace)?;
            Expr::Builtin {
                func: BuiltinFn::InSet,
                args,
            }
        } else {
            let func = BuiltinFn::from_name(name).expect("is_function checked the name");
            let mut args = vec![self.expr()?];
            while *self.peek() == Tok::Comma {
                self.bump();
                args.push(self.expr()?);
            }
            Expr::Builtin { func, args }
        };
        self.expect(Tok::RParen)?;
        Ok(expr)
    }

    fn set_member(&mut self) -> Result<Expr, LangError> {
        match self.peek().clone() {
            Tok::Str(value) => {
                self.bump();
                Ok(Expr::Text(value))
            }
            Tok::Number(value) => {
                self.bump();
                Ok(Expr::Number(value))
            }
            Tok::Minus => {
                self.bump();
                match self.bump() {
                    Tok::Number(value) => Ok(Expr::Number(-value)),
                    _ => {
                        self.pos -= 1;
                        Err(self.error("number literal"))
                    }
                }
            }
            _ => Err(self.error("string or number literal")),
        }
    }

    fn varref(&mut self) -> Result<VarRef, LangError> {
        let first = self.ident("variable name")?;
        let mut var = if *self.peek() == Tok::Dot {
            self.bump();
            let variable = self.ident("variable name after `.`")?;
            VarRef::qualified(first, variable)
        } else {
            VarRef::new(first)
        };
        if *self.peek() == Tok::At {
            self.bump();
            match self.peek().clone() {
                Tok::Number(n) if n.is_integer() => {
                    self.bump();
                    var.lag = u32::try_from(n.to_integer()).map_err(|_| self.error("a small non-negative lag"))?;
                }
                _ => return Err(self.error("integer lag after `@`")),
            }
        }
        Ok(var)
    }
}

fn is_function(name: &str) -> bool {
    AggFn::from_name(name).is_some() || BuiltinFn::from_name(name).is_some() || name == "abs"
}

/// Parses a rule file into a type-checked rule set.
pub fn parse_rules(text: &str) -> Result<RuleSet, LangError> {
    let mut parser = Parser {
        tokens: lex(text)?,
        pos: 0,
    };
    let rules = parser.ruleset()?;
    for rule in &rules {
        check_rule(rule)?;
    }
    RuleSet::new(rules).map_err(LangError::DuplicateRuleName)
}

/// Parses a single expression (no rule name).
pub fn parse_expr(text: &str) -> Result<Expr, LangError> {
    let mut parser = Parser {
        tokens: lex(text)?,
        pos: 0,
    };
    let expr = parser.expr()?;
    if *parser.peek() != Tok::Eof {
        return Err(parser.error("end of expression"));
    }
    Ok(expr)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ty {
    Logical,
    /// A data value: number, text or NA, known only at evaluation time.
    Value,
}

/// Checks that the rule body is logical and every operator receives
/// operands of the right kind.
pub fn check_rule(rule: &Rule) -> Result<(), LangError> {
    let fail = |node: &Expr, message: &str| LangError::TypeError {
        rule: rule.name.clone(),
        node: node.to_string(),
        message: message.to_string(),
    };
    match type_of(&rule.body, false).map_err(|(node, msg)| fail(node, msg))? {
        Ty::Logical => Ok(()),
        Ty::Value => Err(fail(&rule.body, "rule body must be a condition")),
    }
}

type TyResult<'a> = Result<Ty, (&'a Expr, &'static str)>;

fn type_of(expr: &Expr, in_aggregate: bool) -> TyResult<'_> {
    match expr {
        Expr::Number(_) | Expr::Text(_) | Expr::Na | Expr::Var(_) => Ok(Ty::Value),
        Expr::Aggregate { arg, .. } => {
            if in_aggregate {
                return Err((expr, "aggregates cannot be nested"));
            }
            expect_value(arg, true)?;
            Ok(Ty::Value)
        }
        Expr::Unary { op, arg } => match op {
            UnaryOp::Not => {
                expect_logical(arg, in_aggregate)?;
                Ok(Ty::Logical)
            }
            UnaryOp::Neg | UnaryOp::Abs => {
                expect_arithmetic(arg, in_aggregate)?;
                Ok(Ty::Value)
            }
        },
        Expr::Binary { op, lhs, rhs } => {
            if op.is_logical() {
                expect_logical(lhs, in_aggregate)?;
                expect_logical(rhs, in_aggregate)?;
                Ok(Ty::Logical)
            } else if op.is_comparison() {
                expect_value(lhs, in_aggregate)?;
                expect_value(rhs, in_aggregate)?;
                Ok(Ty::Logical)
            } else {
                expect_arithmetic(lhs, in_aggregate)?;
                expect_arithmetic(rhs, in_aggregate)?;
                Ok(Ty::Value)
            }
        }
        Expr::If { cond, then } => {
            expect_logical(cond, in_aggregate)?;
            expect_logical(then, in_aggregate)?;
            Ok(Ty::Logical)
        }
        Expr::Builtin { func, args } => {
            match func {
                BuiltinFn::InSet => {
                    if args.len() < 2 {
                        return Err((expr, "in_set needs a value and at least one member"));
                    }
                    expect_value(&args[0], in_aggregate)?;
                    if let Some(bad) = args[1..].iter().find(|a| !matches!(a, Expr::Number(_) | Expr::Text(_))) {
                        return Err((bad, "set members must be literals"));
                    }
                }
                _ => {
                    if args.len() != 1 {
                        return Err((expr, "takes exactly one argument"));
                    }
                    expect_value(&args[0], in_aggregate)?;
                }
            }
            Ok(Ty::Logical)
        }
    }
}

fn expect_value(expr: &Expr, in_aggregate: bool) -> Result<(), (&Expr, &'static str)> {
    match type_of(expr, in_aggregate)? {
        Ty::Value => Ok(()),
        Ty::Logical => Err((expr, "condition used where a value is expected")),
    }
}

fn expect_arithmetic(expr: &Expr, in_aggregate: bool) -> Result<(), (&Expr, &'static str)> {
    if matches!(expr, Expr::Text(_)) {
        return Err((expr, "text literal used in arithmetic"));
    }
    match type_of(expr, in_aggregate)? {
        Ty::Value => Ok(()),
        Ty::Logical => Err((expr, "condition used as arithmetic operand")),
    }
}

fn expect_logical(expr: &Expr, in_aggregate: bool) -> Result<(), (&Expr, &'static str)> {
    match type_of(expr, in_aggregate)? {
        Ty::Logical => Ok(()),
        Ty::Value => Err((expr, "value used where a condition is expected")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn body(text: &str) -> Expr {
        parse_rules(text).unwrap().rules()[0].body.clone()
    }

    #[test]
    fn range_check() {
        assert_eq!(
            body("r1: age >= 0"),
            Expr::binary(BinaryOp::Ge, Expr::var("age"), Expr::int(0))
        );
    }

    #[test]
    fn implication() {
        let expected = Expr::implies(
            Expr::binary(BinaryOp::Eq, Expr::var("job"), Expr::Text("employed".into())),
            Expr::binary(BinaryOp::Ge, Expr::var("age"), Expr::int(15)),
        );
        assert_eq!(body(r#"r2: if (job == "employed") age >= 15"#), expected);
    }

    #[test]
    fn aggregate_and_axis() {
        assert_eq!(
            body("r3: mean(age) >= 5"),
            Expr::binary(
                BinaryOp::Ge,
                Expr::aggregate(AggFn::Mean, AggAxis::Units, Expr::var("age")),
                Expr::int(5)
            )
        );
        let e = body("r: sum(price@1, times) > 0");
        assert_eq!(
            e,
            Expr::binary(
                BinaryOp::Gt,
                Expr::aggregate(AggFn::Sum, AggAxis::Times, Expr::Var(VarRef::new("price").lagged(1))),
                Expr::int(0)
            )
        );
    }

    #[test]
    fn logical_in_arithmetic_is_a_type_error() {
        let err = parse_rules(r#"r4: age + ("a" < 3)"#).unwrap_err();
        assert!(
            matches!(err, LangError::TypeError { ref rule, .. } if rule == "r4"),
            "{err:?}"
        );
    }

    #[test]
    fn non_logical_body_is_a_type_error() {
        assert!(matches!(parse_rules("r: age + 1"), Err(LangError::TypeError { .. })));
        assert!(matches!(
            parse_rules("r: mean(mean(x)) > 1"),
            Err(LangError::TypeError { .. })
        ));
        assert!(matches!(
            parse_rules("r: x + \"a\" > 1"),
            Err(LangError::TypeError { .. })
        ));
        assert!(matches!(
            parse_rules("r: is_na(x, y)"),
            Err(LangError::TypeError { .. })
        ));
    }

    #[test]
    fn duplicate_names() {
        assert_eq!(
            parse_rules("a: x > 0\na: x < 1"),
            Err(LangError::DuplicateRuleName("a".into()))
        );
    }

    #[test]
    fn parse_errors_carry_location() {
        match parse_rules("r1: x >= 0\nr2: (x > 1") {
            Err(LangError::ParseError { line, column, .. }) => {
                assert_eq!((line, column), (2, 11));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_rules("r1 x"), Err(LangError::ParseError { .. })));
        assert!(matches!(parse_rules("r: \"open"), Err(LangError::ParseError { .. })));
        assert!(matches!(parse_rules("r: x ? 1"), Err(LangError::ParseError { .. })));
        assert!(matches!(parse_rules("if: x > 1"), Err(LangError::ParseError { .. })));
    }

    #[test]
    fn precedence() {
        let e = body("r: a > 0 or b > 0 and c > 0");
        match e {
            Expr::Binary {
                op: BinaryOp::Or, rhs, ..
            } => assert!(matches!(*rhs, Expr::Binary { op: BinaryOp::And, .. })),
            other => panic!("{other:?}"),
        }
        let e = body("r: 1 + 2 * x - 3 > 0");
        assert_eq!(e.to_string(), "1 + 2 * x - 3 > 0");
    }

    #[test]
    fn literals_and_misc_syntax() {
        let e = body(r#"r: in_set(job, {"employed", "other"}) and not is_na(t.x@2) and x != -1.5"#);
        let mut vars = Vec::new();
        e.walk(&mut |n| {
            if let Expr::Var(v) = n {
                vars.push(v.clone());
            }
        });
        assert_eq!(
            vars,
            vec![
                VarRef::new("job"),
                VarRef::qualified("t", "x").lagged(2),
                VarRef::new("x")
            ]
        );
        assert!(parse_rules("r: x = 1").is_ok());
        assert_eq!(body("r: -x < -(2)").to_string(), "-x < -(2)");
    }

    #[test]
    fn comments_and_multiple_rules() {
        let rules = parse_rules("# header\nr1: x >= 0 # trailing\n\nr2: y >= 0 r3: z > 1\n").unwrap();
        assert_eq!(rules.len(), 3);
        assert_eq!(rules.rules()[1].span, SourceSpan { line: 4, column: 1 });
    }
}
