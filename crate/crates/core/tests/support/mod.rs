//! Generators and a brute-force feasibility oracle shared by the
//! integration tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use validus_core::analyzer::{Atom, Clause, ConstraintSystem, NumericVar, Relation};
use validus_core::model::{build_dataset, DataPoint};
use validus_core::{Dataset, Key, Rational, Value};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

/// Every example rule used in the fixtures and golden tests.
pub fn rule_corpus() -> Vec<String> {
    let mut corpus: Vec<String> = [
        "age >= 0",
        "is_integer(age)",
        "if (job == \"employed\") age >= 15",
        "mean(age) >= 5",
        "abs(price - price@1) <= 0.1 * price@1",
        "abs(mean(price) - mean(price@1)) <= 0.1 * mean(price@1)",
        "mean(trade.exports) == mean(partner.imports)",
        "if (gender == \"male\") income > 2000",
        "x >= 0 or x <= 1",
        "x >= 0 and x <= -1",
        "not (x > 0) or -y / 2 != 3.25",
        "in_set(job, {\"employed\", \"unemployed\", 42})",
        "is_na(age) or count(age, all) >= 1",
        "sum(turnover, times) - max(cost@2, times) > min(cost)",
        "-(x) * -2 >= NA",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for file in [
        "person.rules",
        "income.rules",
        "redundant.rules",
        "nonrelaxing.rules",
        "nonconstraining.rules",
    ] {
        for line in read_fixture(file).lines() {
            if let Some((_, body)) = line.split_once(": ") {
                if !line.starts_with('#') {
                    corpus.push(body.to_string());
                }
            }
        }
    }
    corpus
}

// ---------------------------------------------------------------------------
// Analyzable record rules over x, y, z and a categorical g.

pub const XYZG_SCHEMA: &str = "x : numeric\ny : numeric\nz : numeric\ng : categorical {a, b, c}\n";

fn linear_term(rng: &mut ChaCha8Rng) -> String {
    let vars = ["x", "y", "z"];
    let count = rng.gen_range(1..=2);
    let chosen: Vec<&&str> = vars.choose_multiple(rng, count).collect();
    let mut text = String::new();
    for (i, var) in chosen.into_iter().enumerate() {
        let mut c: i64 = 0;
        while c == 0 {
            c = rng.gen_range(-3..=3);
        }
        let magnitude = if c.abs() == 1 {
            String::new()
        } else {
            format!("{} * ", c.abs())
        };
        match (i, c < 0) {
            (0, false) => text.push_str(&format!("{magnitude}{var}")),
            (0, true) => text.push_str(&format!("-{magnitude}{var}")),
            (_, false) => text.push_str(&format!(" + {magnitude}{var}")),
            (_, true) => text.push_str(&format!(" - {magnitude}{var}")),
        }
    }
    text
}

pub fn record_atom(rng: &mut ChaCha8Rng) -> String {
    if rng.gen_bool(0.25) {
        let levels = ["a", "b", "c"];
        match rng.gen_range(0..3) {
            0 => format!("g == \"{}\"", levels.choose(rng).unwrap()),
            1 => format!("g != \"{}\"", levels.choose(rng).unwrap()),
            _ => {
                let size = rng.gen_range(1..=2);
                let set: Vec<String> = levels.choose_multiple(rng, size).map(|l| format!("\"{l}\"")).collect();
                format!("in_set(g, {{{}}})", set.join(", "))
            }
        }
    } else {
        let op = ["<", "<=", ">", ">=", "==", "!="].choose(rng).unwrap();
        format!("{} {op} {}", linear_term(rng), rng.gen_range(-4..=4))
    }
}

fn record_formula(rng: &mut ChaCha8Rng, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.45) {
        return record_atom(rng);
    }
    match rng.gen_range(0..4) {
        0 => format!("not ({})", record_formula(rng, depth - 1)),
        1 => format!(
            "({}) and ({})",
            record_formula(rng, depth - 1),
            record_formula(rng, depth - 1)
        ),
        2 => format!(
            "({}) or ({})",
            record_formula(rng, depth - 1),
            record_formula(rng, depth - 1)
        ),
        _ => format!("if ({}) {}", record_formula(rng, depth - 1), record_atom(rng)),
    }
}

/// A rule body in the analyzable fragment.
pub fn record_rule(rng: &mut ChaCha8Rng) -> String {
    if rng.gen_bool(0.4) {
        format!("if ({}) {}", record_atom(rng), record_atom(rng))
    } else {
        record_formula(rng, 2)
    }
}

pub fn record_ruleset(rng: &mut ChaCha8Rng, size: usize) -> String {
    (0..size).map(|i| format!("r{i}: {}\n", record_rule(rng))).collect()
}

/// One record per sample point of a small grid.
pub fn sample_records(rng: &mut ChaCha8Rng, count: usize) -> Dataset {
    let numbers: Vec<Rational> = (-6..=6).map(|k| Rational::new(k.into(), 2.into())).collect();
    let mut points = Vec::new();
    for unit in 0..count {
        let unit = unit.to_string();
        for var in ["x", "y", "z"] {
            let value = numbers.choose(rng).unwrap().clone();
            points.push(DataPoint::new(
                Key::new("default", None, &unit, var),
                Value::Number(value),
            ));
        }
        let level = *["a", "b", "c"].choose(rng).unwrap();
        points.push(DataPoint::new(
            Key::new("default", None, &unit, "g"),
            Value::text(level),
        ));
    }
    build_dataset(points, None).unwrap()
}

// ---------------------------------------------------------------------------
// Rules for the classifier: references spread over tables, occasions and
// units, with the signature they should get.

pub struct SpanCase {
    pub text: String,
    pub expected: String,
}

pub fn span_rule(rng: &mut ChaCha8Rng) -> SpanCase {
    let tables = ["t1", "t2", "t3"];
    let vars = ["a", "b", "c"];
    let funcs = ["mean", "sum", "min", "max", "count"];
    let mut refs = Vec::new();
    let mut names = BTreeSet::new();
    let mut used_tables = BTreeSet::new();
    let (mut units_m, mut time_m) = (false, false);
    for _ in 0..rng.gen_range(1..=3) {
        let table = if rng.gen_bool(0.7) {
            "t1"
        } else {
            tables.choose(rng).unwrap()
        };
        let var = *vars.choose(rng).unwrap();
        let lag: u32 = if rng.gen_bool(0.7) { 0 } else { rng.gen_range(1..=2) };
        names.insert((table, var));
        used_tables.insert(table);
        time_m |= lag > 0;
        let mut text = format!("{table}.{var}");
        if lag > 0 {
            text.push_str(&format!("@{lag}"));
        }
        if rng.gen_bool(0.4) {
            let func = funcs.choose(rng).unwrap();
            let axis = *["", "units", "times", "all"].choose(rng).unwrap();
            units_m |= matches!(axis, "" | "units" | "all");
            time_m |= matches!(axis, "times" | "all");
            text = if axis.is_empty() {
                format!("{func}({text})")
            } else {
                format!("{func}({text}, {axis})")
            };
        }
        refs.push(text);
    }
    let multi_table = used_tables.len() > 1;
    let sig = |m: bool| if m { 'm' } else { 's' };
    let expected: String = [multi_table, time_m, units_m || multi_table, names.len() > 1]
        .into_iter()
        .map(sig)
        .collect();
    let pick = |rng: &mut ChaCha8Rng, refs: &[String]| refs.choose(rng).unwrap().clone();
    let mut terms: Vec<String> = refs.clone();
    terms.shuffle(rng);
    let sum = terms.join(" + ");
    let text = match rng.gen_range(0..6) {
        0 => format!("{sum} >= {}", rng.gen_range(-5..5)),
        1 => format!("abs({sum}) <= 2 * {}", pick(rng, &refs)),
        2 => format!("if ({} > 0) {sum} != 1", pick(rng, &refs)),
        3 => format!("not ({sum} < 0) and is_number({})", pick(rng, &refs)),
        4 => format!("is_na({}) or {sum} / 3 == 1", pick(rng, &refs)),
        _ => format!("in_set({}, {{1, 2, \"z\"}}) or {sum} > 0", pick(rng, &refs)),
    };
    SpanCase { text, expected }
}

// ---------------------------------------------------------------------------
// Rules and data for the three-valued evaluator.

pub const PANEL_SCHEMA: &str = "@time year\nt.x : numeric\nt.y : numeric\nt.g : categorical {a, b}\n";

fn panel_term(rng: &mut ChaCha8Rng, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.4) {
        return match rng.gen_range(0..6) {
            0 => rng.gen_range(-3..=3).to_string(),
            1 => format!("{}@1", ["x", "y"].choose(rng).unwrap()),
            2 => format!(
                "{}({}{})",
                ["mean", "sum", "min", "max", "count"].choose(rng).unwrap(),
                ["x", "y"].choose(rng).unwrap(),
                ["", ", times", ", all", ", units"].choose(rng).unwrap()
            ),
            _ => ["x", "y"].choose(rng).unwrap().to_string(),
        };
    }
    let op = ["+", "-", "*", "/"].choose(rng).unwrap();
    let lhs = panel_term(rng, depth - 1);
    let rhs = panel_term(rng, depth - 1);
    if rng.gen_bool(0.2) {
        format!("abs({lhs} {op} {rhs})")
    } else {
        format!("({lhs} {op} {rhs})")
    }
}

fn panel_atom(rng: &mut ChaCha8Rng) -> String {
    match rng.gen_range(0..8) {
        0 => format!("g == \"{}\"", ["a", "b"].choose(rng).unwrap()),
        1 => format!("is_number({})", ["x", "y", "g"].choose(rng).unwrap()),
        2 => format!("is_integer({})", panel_term(rng, 1)),
        3 => format!("in_set({}, {{1, 2, \"a\"}})", ["x", "y", "g"].choose(rng).unwrap()),
        _ => {
            let op = ["<", "<=", ">", ">=", "==", "!="].choose(rng).unwrap();
            format!("{} {op} {}", panel_term(rng, 2), panel_term(rng, 1))
        }
    }
}

/// A rule for the panel schema; never uses `is_na`.
pub fn panel_rule(rng: &mut ChaCha8Rng, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.4) {
        return panel_atom(rng);
    }
    match rng.gen_range(0..4) {
        0 => format!("not ({})", panel_rule(rng, depth - 1)),
        1 => format!("({}) and ({})", panel_rule(rng, depth - 1), panel_rule(rng, depth - 1)),
        2 => format!("({}) or ({})", panel_rule(rng, depth - 1), panel_rule(rng, depth - 1)),
        _ => format!("if ({}) {}", panel_rule(rng, depth - 1), panel_rule(rng, depth - 1)),
    }
}

/// Units 1..=3 over two or three years, with the odd text or NA cell.
pub fn panel_dataset(rng: &mut ChaCha8Rng) -> Dataset {
    let years = rng.gen_range(2..=3);
    let mut points = Vec::new();
    for unit in 1..=3 {
        for year in 0..years {
            let unit = unit.to_string();
            let year = (2019 + year).to_string();
            for var in ["x", "y"] {
                let value = match rng.gen_range(0..20) {
                    0 => Value::Na,
                    1 => Value::text("a"),
                    _ => Value::int(rng.gen_range(-3..=3)),
                };
                points.push(DataPoint::new(Key::new("t", Some(&year), &unit, var), value));
            }
            let g = if rng.gen_bool(0.9) {
                Value::text(*["a", "b"].choose(rng).unwrap())
            } else {
                Value::Na
            };
            points.push(DataPoint::new(Key::new("t", Some(&year), &unit, "g"), g));
        }
    }
    build_dataset(points, None).unwrap()
}

// ---------------------------------------------------------------------------
// Random constraint systems and the brute-force oracle.

pub fn random_system(rng: &mut ChaCha8Rng) -> ConstraintSystem<Rational> {
    let n = rng.gen_range(1..=4);
    let numeric: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let cats: Vec<(String, Vec<String>)> = (0..rng.gen_range(0..=2))
        .map(|i| {
            let levels = (0..rng.gen_range(1..=3)).map(|l| format!("l{l}")).collect();
            (format!("c{i}"), levels)
        })
        .collect();
    let mut system = ConstraintSystem::default();
    for name in &numeric {
        system.numeric_vars.insert(
            name.clone(),
            NumericVar {
                bounds: None,
                integer: false,
            },
        );
    }
    for (name, levels) in &cats {
        system.categorical_vars.insert(name.clone(), levels.clone());
    }
    let relations = [
        Relation::Lt,
        Relation::Le,
        Relation::Eq,
        Relation::Ne,
        Relation::Ge,
        Relation::Gt,
    ];
    for k in 0..rng.gen_range(1..=6) {
        let mut disjuncts = Vec::new();
        for _ in 0..rng.gen_range(1..=2) {
            if !cats.is_empty() && rng.gen_bool(0.25) {
                let (name, levels) = cats.choose(rng).unwrap();
                let allowed = levels.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
                disjuncts.push(Atom::Categorical {
                    variable: name.clone(),
                    allowed,
                });
                continue;
            }
            loop {
                let mut coefficients = BTreeMap::new();
                for v in &numeric {
                    if rng.gen_bool(0.6) {
                        coefficients.insert(v.clone(), Rational::from_integer(rng.gen_range(-3..=3).into()));
                    }
                }
                let relation = *relations.choose(rng).unwrap();
                let constant = Rational::from_integer(rng.gen_range(-6..=6).into());
                if let Ok(atom) = Atom::linear(coefficients, relation, constant) {
                    disjuncts.push(atom);
                    break;
                }
            }
        }
        system.clauses.push(Clause {
            disjuncts,
            origin: format!("c{k}"),
        });
    }
    system
}

type Q = Ratio<i128>;

/// `a . x <= b`, or `<` when strict.
#[derive(Clone, PartialEq)]
struct Half {
    a: Vec<Q>,
    b: Q,
    strict: bool,
}

impl Half {
    fn value(&self, x: &[Q]) -> Q {
        self.a.iter().zip(x).map(|(a, x)| a * x).sum()
    }

    fn closure_holds(&self, x: &[Q]) -> bool {
        self.value(x) <= self.b
    }

    fn holds(&self, x: &[Q]) -> bool {
        if self.strict {
            self.value(x) < self.b
        } else {
            self.value(x) <= self.b
        }
    }
}

fn q(r: &Rational) -> Q {
    Q::new(r.numer().to_i128().unwrap(), r.denom().to_i128().unwrap())
}

/// Each alternative is a conjunction of half-spaces.
fn alternatives(atom: &Atom<Rational>, vars: &[String]) -> Vec<Vec<Half>> {
    let Atom::Linear {
        coefficients,
        relation,
        constant,
    } = atom
    else {
        unreachable!("categorical atoms are resolved first");
    };
    let a: Vec<Q> = vars
        .iter()
        .map(|v| coefficients.get(v).map(q).unwrap_or_else(Q::zero))
        .collect();
    let neg: Vec<Q> = a.iter().map(|c| -c).collect();
    let b = q(constant);
    let le = |strict| Half {
        a: a.clone(),
        b,
        strict,
    };
    let ge = |strict| Half {
        a: neg.clone(),
        b: -b,
        strict,
    };
    match relation {
        Relation::Lt => vec![vec![le(true)]],
        Relation::Le => vec![vec![le(false)]],
        Relation::Gt => vec![vec![ge(true)]],
        Relation::Ge => vec![vec![ge(false)]],
        Relation::Eq => vec![vec![le(false), ge(false)]],
        Relation::Ne => vec![vec![le(true)], vec![ge(true)]],
    }
}

fn solve_square(rows: &[(Vec<Q>, Q)], n: usize) -> Option<Vec<Q>> {
    let mut m: Vec<Vec<Q>> = rows
        .iter()
        .map(|(a, b)| {
            let mut row = a.clone();
            row.push(*b);
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let p = m[col][col];
        m[col].iter_mut().for_each(|x| *x /= p);
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let f = row[col];
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * y;
                }
            }
        }
    }
    Some(m.iter().map(|row| row[n]).collect())
}

fn combinations(k: usize, n: usize, start: usize, current: &mut Vec<usize>, out: &mut dyn FnMut(&[usize])) {
    if current.len() == k {
        out(current);
        return;
    }
    for i in start..n {
        current.push(i);
        combinations(k, n, i + 1, current, out);
        current.pop();
    }
}

/// Vertices of the arrangement of the given hyperplanes and a large box.
fn arrangement_vertices(mut planes: Vec<(Vec<Q>, Q)>, n: usize) -> Vec<Vec<Q>> {
    let big = Q::from_integer(100_000);
    for i in 0..n {
        let mut e = vec![Q::zero(); n];
        e[i] = Q::one();
        planes.push((e.clone(), big));
        planes.push((e, -big));
    }
    let mut unique: Vec<(Vec<Q>, Q)> = Vec::new();
    for (a, b) in planes {
        let lead = *a.iter().find(|c| !c.is_zero()).unwrap();
        let a: Vec<Q> = a.iter().map(|c| c / lead).collect();
        let b = b / lead;
        if !unique.contains(&(a.clone(), b)) {
            unique.push((a, b));
        }
    }
    let mut vertices: BTreeSet<Vec<Q>> = BTreeSet::new();
    combinations(n, unique.len(), 0, &mut Vec::new(), &mut |picked| {
        let rows: Vec<(Vec<Q>, Q)> = picked.iter().map(|&i| unique[i].clone()).collect();
        if let Some(x) = solve_square(&rows, n) {
            if x.iter().all(|v| v.abs() <= big) {
                vertices.insert(x);
            }
        }
    });
    vertices.into_iter().collect()
}

/// Feasibility of a conjunction of half-spaces: the closure is nonempty iff
/// some arrangement vertex lies in it, and then the centroid of those
/// vertices lies in its relative interior, where every strict constraint
/// that can hold does.
fn search(clauses: &[Vec<Vec<Half>>], chosen: &mut Vec<Half>, vertices: &[&Vec<Q>], n: usize) -> bool {
    let Some((first, rest)) = clauses.split_first() else {
        let count = Q::from_integer(vertices.len() as i128);
        let centroid: Vec<Q> = (0..n)
            .map(|i| vertices.iter().map(|v| v[i]).sum::<Q>() / count)
            .collect();
        return chosen.iter().all(|h| h.holds(&centroid));
    };
    for alternative in first {
        let kept: Vec<&Vec<Q>> = vertices
            .iter()
            .copied()
            .filter(|v| alternative.iter().all(|h| h.closure_holds(v)))
            .collect();
        if kept.is_empty() {
            continue;
        }
        let before = chosen.len();
        chosen.extend(alternative.iter().cloned());
        let found = search(rest, chosen, &kept, n);
        chosen.truncate(before);
        if found {
            return true;
        }
    }
    false
}

pub fn oracle_satisfiable(system: &ConstraintSystem<Rational>) -> bool {
    let vars: Vec<String> = system.numeric_vars.keys().cloned().collect();
    let n = vars.len();
    let mut planes = Vec::new();
    for clause in &system.clauses {
        for atom in &clause.disjuncts {
            if matches!(atom, Atom::Linear { .. }) {
                for alt in alternatives(atom, &vars) {
                    for h in alt {
                        planes.push((h.a, h.b));
                    }
                }
            }
        }
    }
    let vertices = arrangement_vertices(planes, n);
    let cats: Vec<(&String, &Vec<String>)> = system.categorical_vars.iter().collect();
    let mut choice = vec![0usize; cats.len()];
    loop {
        let levels: BTreeMap<&String, &String> = cats
            .iter()
            .zip(&choice)
            .map(|((name, levels), &i)| (*name, &levels[i]))
            .collect();
        let mut reduced = Vec::new();
        let mut dead = false;
        for clause in &system.clauses {
            let mut options = Vec::new();
            let mut satisfied = false;
            for atom in &clause.disjuncts {
                match atom {
                    Atom::Categorical { variable, allowed } => {
                        satisfied |= allowed.contains(levels[variable]);
                    }
                    Atom::Linear { .. } => options.extend(alternatives(atom, &vars)),
                }
            }
            if satisfied {
                continue;
            }
            dead |= options.is_empty();
            reduced.push(options);
        }
        let all: Vec<&Vec<Q>> = vertices.iter().collect();
        if !dead && search(&reduced, &mut Vec::new(), &all, n) {
            return true;
        }
        // Next categorical assignment, odometer style.
        let mut i = 0;
        loop {
            if i == cats.len() {
                return false;
            }
            choice[i] += 1;
            if choice[i] < cats[i].1.len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}
