//! Strong-Kleene three-valued truth values.

use std::fmt;
use std::ops::{BitAnd, BitOr, Not};

use serde::{Serialize, Serializer};

/// Outcome of evaluating a rule: `Na` when the data needed to decide is missing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TriBool {
    False,
    True,
    Na,
}

/// The logical connectives of the rule language.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogicalOp {
    Not,
    And,
    Or,
    /// Material implication `if (C) Q`.
    Implies,
}

impl TriBool {
    pub const ALL: [TriBool; 3] = [TriBool::True, TriBool::False, TriBool::Na];

    pub fn from_bool(value: bool) -> Self {
        if value {
            TriBool::True
        } else {
            TriBool::False
        }
    }

    pub fn to_bool(self) -> Option<bool> {
        match self {
            TriBool::True => Some(true),
            TriBool::False => Some(false),
            TriBool::Na => None,
        }
    }

    pub fn is_na(self) -> bool {
        self == TriBool::Na
    }

    pub fn implies(self, consequent: TriBool) -> TriBool {
        !self | consequent
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TriBool::True => "TRUE",
            TriBool::False => "FALSE",
            TriBool::Na => "NA",
        }
    }
}

impl Not for TriBool {
    type Output = TriBool;

    fn not(self) -> TriBool {
        match self {
            TriBool::True => TriBool::False,
            TriBool::False => TriBool::True,
            TriBool::Na => TriBool::Na,
        }
    }
}

impl BitAnd for TriBool {
    type Output = TriBool;

    fn bitand(self, rhs: TriBool) -> TriBool {
        match (self, rhs) {
            (TriBool::False, _) | (_, TriBool::False) => TriBool::False,
            (TriBool::Na, _) | (_, TriBool::Na) => TriBool::Na,
            _ => TriBool::True,
        }
    }
}

impl BitOr for TriBool {
    type Output = TriBool;

    fn bitor(self, rhs: TriBool) -> TriBool {
        match (self, rhs) {
            (TriBool::True, _) | (_, TriBool::True) => TriBool::True,
            (TriBool::Na, _) | (_, TriBool::Na) => TriBool::Na,
            _ => TriBool::False,
        }
    }
}

impl fmt::Display for TriBool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for TriBool {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

/// Applies a connective to its arguments.
///
/// `And`/`Or` accept any number of arguments (the empty conjunction is
/// `True`, the empty disjunction `False`); `Not` takes one and `Implies` two.
///
/// # Panics
/// Panics when the arity does not match `op`.
pub fn kleene_apply(op: LogicalOp, args: &[TriBool]) -> TriBool {
    match op {
        LogicalOp::Not => {
            assert_eq!(args.len(), 1, "not takes one argument");
            !args[0]
        }
        LogicalOp::And => args.iter().fold(TriBool::True, |acc, &v| acc & v),
        LogicalOp::Or => args.iter().fold(TriBool::False, |acc, &v| acc | v),
        LogicalOp::Implies => {
            assert_eq!(args.len(), 2, "implication takes two arguments");
            args[0].implies(args[1])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::TriBool::{False as F, Na as N, True as T};
    use super::*;

    #[test]
    fn spot_values() {
        assert_eq!(kleene_apply(LogicalOp::And, &[T, N]), N);
        assert_eq!(kleene_apply(LogicalOp::Or, &[T, N]), T);
        assert_eq!(kleene_apply(LogicalOp::Implies, &[F, N]), T);
        assert_eq!(kleene_apply(LogicalOp::Implies, &[N, F]), N);
        assert_eq!(kleene_apply(LogicalOp::Not, &[N]), N);
    }

    #[test]
    fn nary_folds() {
        assert_eq!(kleene_apply(LogicalOp::And, &[]), T);
        assert_eq!(kleene_apply(LogicalOp::Or, &[]), F);
        assert_eq!(kleene_apply(LogicalOp::And, &[T, N, F]), F);
        assert_eq!(kleene_apply(LogicalOp::Or, &[F, N, F]), N);
    }

    #[test]
    #[should_panic]
    fn not_arity_checked() {
        kleene_apply(LogicalOp::Not, &[T, F]);
    }
}
