//! Fourier–Motzkin elimination over exact scalars.

use std::collections::BTreeMap;

use super::{Bound, Interval};
use crate::scalar::Scalar;

/// `coefficients . x <= bound`, or `<` when strict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Constraint<S> {
    pub coefficients: Vec<S>,
    pub bound: S,
    pub strict: bool,
}

/// Keeps the tightest constraint per normalized coefficient vector. Returns
/// `None` if a constant constraint is violated.
fn tidy<S: Scalar>(constraints: impl IntoIterator<Item = Constraint<S>>) -> Option<Vec<Constraint<S>>> {
    let mut best: BTreeMap<Vec<S>, (S, bool)> = BTreeMap::new();
    for c in constraints {
        let Some(lead) = c.coefficients.iter().find(|a| !a.is_zero()).map(|a| a.abs()) else {
            let ok = if c.strict {
                c.bound > S::zero()
            } else {
                c.bound >= S::zero()
            };
            if !ok {
                return None;
            }
            continue;
        };
        let coefficients: Vec<S> = c.coefficients.iter().map(|a| a.clone() / lead.clone()).collect();
        let bound = c.bound / lead;
        best.entry(coefficients)
            .and_modify(|(b, strict)| {
                if bound < *b || (bound == *b && c.strict) {
                    *b = bound.clone();
                    *strict = c.strict;
                }
            })
            .or_insert((bound, c.strict));
    }
    Some(
        best.into_iter()
            .map(|(coefficients, (bound, strict))| Constraint {
                coefficients,
                bound,
                strict,
            })
            .collect(),
    )
}

/// Removes variable `var` from the constraints.
fn eliminate<S: Scalar>(constraints: &[Constraint<S>], var: usize) -> Option<Vec<Constraint<S>>> {
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    let mut kept = Vec::new();
    for c in constraints {
        let a = &c.coefficients[var];
        if a.is_zero() {
            kept.push(c.clone());
        } else {
            // Scale so the coefficient of `var` is +1 or -1.
            let scale = a.abs();
            let scaled = Constraint {
                coefficients: c.coefficients.iter().map(|x| x.clone() / scale.clone()).collect(),
                bound: c.bound.clone() / scale,
                strict: c.strict,
            };
            if a.is_positive() {
                upper.push(scaled);
            } else {
                lower.push(scaled);
            }
        }
    }
    for u in &upper {
        for l in &lower {
            let coefficients = u
                .coefficients
                .iter()
                .zip(&l.coefficients)
                .map(|(a, b)| a.clone() + b.clone())
                .collect();
            kept.push(Constraint {
                coefficients,
                bound: u.bound.clone() + l.bound.clone(),
                strict: u.strict || l.strict,
            });
        }
    }
    tidy(kept)
}

/// Constraint sets after eliminating variables `n-1` down to `stop`;
/// `stages[k]` mentions only variables below `k` (with `stages[n]` the
/// input).
fn stages<S: Scalar>(constraints: &[Constraint<S>], n: usize, stop: usize) -> Option<Vec<Vec<Constraint<S>>>> {
    let mut stages = vec![Vec::new(); n + 1];
    stages[n] = tidy(constraints.iter().cloned())?;
    for var in (stop..n).rev() {
        stages[var] = eliminate(&stages[var + 1], var)?;
    }
    Some(stages)
}

/// Bounds on `x[var]` from constraints over `x[0..=var]`, given values for
/// the earlier variables.
fn bounds_on<S: Scalar>(constraints: &[Constraint<S>], var: usize, earlier: &[S]) -> Interval<S> {
    let mut interval = Interval::unbounded();
    for c in constraints {
        let a = &c.coefficients[var];
        if a.is_zero() {
            continue;
        }
        let mut rest = c.bound.clone();
        for (k, value) in earlier.iter().enumerate() {
            rest = rest - c.coefficients[k].clone() * value.clone();
        }
        let limit = Bound {
            value: rest / a.clone(),
            closed: !c.strict,
        };
        let side = if a.is_positive() {
            Interval {
                low: None,
                high: Some(limit),
            }
        } else {
            Interval {
                low: Some(limit),
                high: None,
            }
        };
        interval = interval.meet(&side);
    }
    interval
}

/// A simple member of a nonempty interval: zero if possible, else an
/// integer, else the midpoint.
pub(crate) fn pick<S: Scalar>(interval: &Interval<S>) -> S {
    if interval.contains(&S::zero()) {
        return S::zero();
    }
    let one = S::one();
    match (&interval.low, &interval.high) {
        (Some(l), high) => {
            let mut candidate = l.value.ceil();
            if candidate == l.value && !l.closed {
                candidate = candidate + one.clone();
            }
            if interval.contains(&candidate) {
                candidate
            } else {
                let h = high
                    .as_ref()
                    .expect("a bounded-below interval without an integer is bounded above");
                (l.value.clone() + h.value.clone()) / (one.clone() + one)
            }
        }
        (None, Some(h)) => {
            let mut candidate = h.value.floor();
            if candidate == h.value && !h.closed {
                candidate = candidate - one.clone();
            }
            candidate
        }
        (None, None) => S::zero(),
    }
}

/// A point satisfying all constraints over `n` variables, if one exists.
pub(crate) fn witness<S: Scalar>(constraints: &[Constraint<S>], n: usize) -> Option<Vec<S>> {
    let stages = stages(constraints, n, 0)?;
    let mut values: Vec<S> = Vec::with_capacity(n);
    for var in 0..n {
        let interval = bounds_on(&stages[var + 1], var, &values);
        debug_assert!(!interval.is_empty());
        values.push(pick(&interval));
    }
    Some(values)
}

pub(crate) fn feasible<S: Scalar>(constraints: &[Constraint<S>], n: usize) -> bool {
    stages(constraints, n, 0).is_some()
}

/// The exact set of values `x[var]` takes over the solutions, or `None`
/// when there are none.
pub(crate) fn project<S: Scalar>(constraints: &[Constraint<S>], n: usize, var: usize) -> Option<Interval<S>> {
    let swapped: Vec<Constraint<S>> = constraints
        .iter()
        .map(|c| {
            let mut coefficients = c.coefficients.clone();
            coefficients.swap(0, var);
            Constraint {
                coefficients,
                bound: c.bound.clone(),
                strict: c.strict,
            }
        })
        .collect();
    let stages = stages(&swapped, n, 1)?;
    let interval = bounds_on(&stages[1], 0, &[]);
    if interval.is_empty() {
        None
    } else {
        Some(interval)
    }
}
