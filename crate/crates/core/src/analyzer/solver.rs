//! Case-splitting search over clause disjuncts with Fourier–Motzkin checks
//! at every step.

use std::collections::{BTreeMap, BTreeSet};

use super::fm::{self, Constraint};
use super::{Assignment, Atom, ConstraintSystem, Interval, Relation};
use crate::scalar::Scalar;

/// One consistent branch of the search: a conjunction of linear atoms and
/// the remaining level sets of the categorical variables. Every solution of
/// a leaf satisfies the whole system, and the leaves together cover all
/// solutions.
pub(crate) struct Leaf<'a, S> {
    pub constraints: &'a [Constraint<S>],
    pub domains: &'a BTreeMap<String, BTreeSet<String>>,
}

struct Search<'a, S> {
    system: &'a ConstraintSystem<S>,
    index: BTreeMap<String, usize>,
    constraints: Vec<Constraint<S>>,
    chosen: Vec<Atom<S>>,
    domains: BTreeMap<String, BTreeSet<String>>,
}

impl<'a, S: Scalar> Search<'a, S> {
    fn new(system: &'a ConstraintSystem<S>) -> Self {
        let mut names: BTreeSet<String> = system.numeric_vars.keys().cloned().collect();
        let mut domains: BTreeMap<String, BTreeSet<String>> = system
            .categorical_vars
            .iter()
            .map(|(v, levels)| (v.clone(), levels.iter().cloned().collect()))
            .collect();
        for clause in &system.clauses {
            for atom in &clause.disjuncts {
                match atom {
                    Atom::Linear { coefficients, .. } => names.extend(coefficients.keys().cloned()),
                    Atom::Categorical { variable, allowed } => {
                        if !system.categorical_vars.contains_key(variable) {
                            domains
                                .entry(variable.clone())
                                .or_default()
                                .extend(allowed.iter().cloned());
                        }
                    }
                }
            }
        }
        Search {
            system,
            index: names.into_iter().enumerate().map(|(i, v)| (v, i)).collect(),
            constraints: Vec::new(),
            chosen: Vec::new(),
            domains,
        }
    }

    fn n(&self) -> usize {
        self.index.len()
    }

    fn constraints_of(
        &self,
        coefficients: &BTreeMap<String, S>,
        relation: Relation,
        constant: &S,
    ) -> Vec<Constraint<S>> {
        let mut row = vec![S::zero(); self.n()];
        for (var, c) in coefficients {
            row[self.index[var]] = c.clone();
        }
        let negated: Vec<S> = row.iter().map(|c| -c.clone()).collect();
        let upper = |strict| Constraint {
            coefficients: row.clone(),
            bound: constant.clone(),
            strict,
        };
        let lower = |strict| Constraint {
            coefficients: negated.clone(),
            bound: -constant.clone(),
            strict,
        };
        match relation {
            Relation::Lt => vec![upper(true)],
            Relation::Le => vec![upper(false)],
            Relation::Eq => vec![upper(false), lower(false)],
            Relation::Ge => vec![lower(false)],
            Relation::Gt => vec![lower(true)],
            Relation::Ne => unreachable!("`!=` is split before it reaches the constraint store"),
        }
    }

    fn satisfied(&self, atom: &Atom<S>) -> bool {
        match atom {
            Atom::Linear { .. } => self.chosen.contains(atom),
            Atom::Categorical { variable, allowed } => self.domains.get(variable).is_some_and(|d| d.is_subset(allowed)),
        }
    }

    fn viable(&self, atom: &Atom<S>) -> bool {
        match atom {
            Atom::Linear { .. } => true,
            Atom::Categorical { variable, allowed } => {
                self.domains.get(variable).is_some_and(|d| !d.is_disjoint(allowed))
            }
        }
    }

    /// Depth-first search; `visit` returns false to stop. Returns false if
    /// stopped.
    fn run(&mut self, visit: &mut dyn FnMut(&Leaf<'_, S>) -> bool) -> bool {
        let mut best: Option<(usize, Vec<usize>)> = None;
        for (ci, clause) in self.system.clauses.iter().enumerate() {
            if clause.disjuncts.iter().any(|a| self.satisfied(a)) {
                continue;
            }
            let viable: Vec<usize> = (0..clause.disjuncts.len())
                .filter(|&i| self.viable(&clause.disjuncts[i]))
                .collect();
            if viable.is_empty() {
                return true;
            }
            if best.as_ref().is_none_or(|(_, b)| viable.len() < b.len()) {
                best = Some((ci, viable));
            }
        }
        let Some((ci, viable)) = best else {
            return visit(&Leaf {
                constraints: &self.constraints,
                domains: &self.domains,
            });
        };
        let system = self.system;
        let clause = &system.clauses[ci];
        for i in viable {
            let atom = &clause.disjuncts[i];
            let keep_going = match atom {
                Atom::Linear {
                    coefficients,
                    relation: Relation::Ne,
                    constant,
                } => {
                    let mut keep_going = true;
                    for relation in [Relation::Lt, Relation::Gt] {
                        let added = self.constraints_of(coefficients, relation, constant);
                        if !self.with_linear(atom, added, visit) {
                            keep_going = false;
                            break;
                        }
                    }
                    keep_going
                }
                Atom::Linear {
                    coefficients,
                    relation,
                    constant,
                } => {
                    let added = self.constraints_of(coefficients, *relation, constant);
                    self.with_linear(atom, added, visit)
                }
                Atom::Categorical { variable, allowed } => {
                    let previous = self.domains[variable].clone();
                    let narrowed = previous.intersection(allowed).cloned().collect();
                    self.domains.insert(variable.clone(), narrowed);
                    let keep_going = self.run(visit);
                    self.domains.insert(variable.clone(), previous);
                    keep_going
                }
            };
            if !keep_going {
                return false;
            }
        }
        true
    }

    fn with_linear(
        &mut self,
        atom: &Atom<S>,
        added: Vec<Constraint<S>>,
        visit: &mut dyn FnMut(&Leaf<'_, S>) -> bool,
    ) -> bool {
        let before = self.constraints.len();
        self.constraints.extend(added);
        let mut keep_going = true;
        if fm::feasible(&self.constraints, self.n()) {
            self.chosen.push(atom.clone());
            keep_going = self.run(visit);
            self.chosen.pop();
        }
        self.constraints.truncate(before);
        keep_going
    }
}

/// Visits every leaf of the search until `visit` returns false.
pub(crate) fn enumerate_leaves<S: Scalar>(
    system: &ConstraintSystem<S>,
    mut visit: impl FnMut(&Leaf<'_, S>, &BTreeMap<String, usize>) -> bool,
) {
    let mut search = Search::new(system);
    let index = search.index.clone();
    search.run(&mut |leaf| visit(leaf, &index));
}

/// A satisfying assignment, if any.
pub fn solve<S: Scalar>(system: &ConstraintSystem<S>) -> Option<Assignment<S>> {
    let mut witness = None;
    enumerate_leaves(system, |leaf, index| {
        let values = fm::witness(leaf.constraints, index.len()).expect("leaves are feasible");
        let numeric = index.iter().map(|(v, &i)| (v.clone(), values[i].clone())).collect();
        let categorical = leaf
            .domains
            .iter()
            .map(|(var, domain)| {
                let declared = system.categorical_vars.get(var);
                let level = declared
                    .and_then(|levels| levels.iter().find(|l| domain.contains(*l)))
                    .or_else(|| domain.iter().next())
                    .cloned()
                    .expect("leaf domains are nonempty");
                (var.clone(), level)
            })
            .collect();
        witness = Some(Assignment { numeric, categorical });
        false
    });
    debug_assert!(witness.as_ref().is_none_or(|w| system.holds(w)));
    witness
}

pub fn is_satisfiable<S: Scalar>(system: &ConstraintSystem<S>) -> bool {
    solve(system).is_some()
}

/// Hull of the values `variable` takes over all solutions; `None` when
/// unsatisfiable.
pub(crate) fn variable_range<S: Scalar>(system: &ConstraintSystem<S>, variable: &str) -> Option<Interval<S>> {
    let mut hull: Option<Interval<S>> = None;
    enumerate_leaves(system, |leaf, index| {
        let range = match index.get(variable) {
            Some(&i) => fm::project(leaf.constraints, index.len(), i).expect("leaves are feasible"),
            None => Interval::unbounded(),
        };
        hull = Some(match hull.take() {
            Some(h) => h.hull(&range),
            None => range,
        });
        hull.as_ref().is_none_or(|h| h.low.is_some() || h.high.is_some())
    });
    hull
}
