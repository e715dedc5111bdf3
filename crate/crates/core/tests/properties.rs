mod support;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use support::*;
use validus_core::analyzer::{
    analyze_ruleset, compile_rules, implied_bounds, is_satisfiable, simplify_ruleset, solve, verify_probe,
};
use validus_core::classify::{level_of, Span};
use validus_core::cli::{read_table_csv, write_table_csv};
use validus_core::eval::{evaluate_ruleset, EvalOptions, NaPolicy};
use validus_core::lang::{format_expr, format_ruleset, negate_expr, parse_expr, parse_rules, Rule};
use validus_core::logic::{kleene_apply, LogicalOp};
use validus_core::model::build_dataset;
use validus_core::{classify_rule, parse_schema, Rational, RuleSet, SmallRational, TriBool};

fn tri() -> impl Strategy<Value = TriBool> {
    prop_oneof![Just(TriBool::True), Just(TriBool::False), Just(TriBool::Na)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn kleene_laws(a in tri(), b in tri(), c in tri()) {
        prop_assert_eq!(!(a & b), !a | !b);
        prop_assert_eq!(!(a | b), !a & !b);
        prop_assert_eq!(a & b, b & a);
        prop_assert_eq!(a | (b & c), (a | b) & (a | c));
        prop_assert_eq!(kleene_apply(LogicalOp::Implies, &[a, b]), !a | b);
        prop_assert_eq!(!!a, a);
    }

    #[test]
    fn format_then_parse_is_identity(seed in any::<u64>()) {
        let mut rng = rng(seed);
        for text in [record_rule(&mut rng), panel_rule(&mut rng, 3), span_rule(&mut rng).text] {
            let expr = parse_expr(&text).unwrap();
            let printed = format_expr(&expr);
            prop_assert_eq!(parse_expr(&printed).unwrap(), expr.clone(), "{} -> {}", text, printed);
            // The canonical form is a fixpoint.
            prop_assert_eq!(format_expr(&parse_expr(&printed).unwrap()), printed);
        }
    }

    #[test]
    fn negation_flips_every_entry(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let schema = parse_schema(PANEL_SCHEMA).unwrap();
        let data = panel_dataset(&mut rng);
        let body = parse_expr(&panel_rule(&mut rng, 3)).unwrap();
        let rules = RuleSet::new(vec![Rule::new("r", body.clone())]).unwrap();
        let negated = RuleSet::new(vec![Rule::new("r", negate_expr(&body))]).unwrap();
        let before = evaluate_ruleset(&rules, &data, &schema, EvalOptions::default()).unwrap();
        let after = evaluate_ruleset(&negated, &data, &schema, EvalOptions::default()).unwrap();
        prop_assert_eq!(before.entries.len(), after.entries.len());
        for (x, y) in before.entries.iter().zip(&after.entries) {
            prop_assert_eq!(&x.scope, &y.scope);
            prop_assert_eq!(x.result, !y.result, "{}", format_expr(&body));
        }
    }

    #[test]
    fn classification_ignores_names_and_constants(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let case = span_rule(&mut rng);
        let renamed = case.text.replace("t1.", "first.").replace(".a", ".alpha").replace('5', "7");
        let sig = classify_rule(&Rule::new("r", parse_expr(&case.text).unwrap()));
        prop_assert_eq!(sig, classify_rule(&Rule::new("other", parse_expr(&renamed).unwrap())));
        let ms = [sig.table(), sig.time(), sig.unit(), sig.variable()]
            .iter()
            .filter(|s| **s == Span::Multiple)
            .count();
        prop_assert_eq!(level_of(&sig) as usize, ms);
    }

    #[test]
    fn dataset_ignores_point_order_and_survives_csv(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let schema = parse_schema(PANEL_SCHEMA).unwrap();
        let data = panel_dataset(&mut rng);
        let mut points = data.points();
        points.shuffle(&mut rng);
        prop_assert_eq!(&build_dataset(points, None).unwrap(), &data);
        let text = write_table_csv(&data, "t", &schema);
        prop_assert_eq!(build_dataset(read_table_csv("t", &text, &schema).unwrap(), None).unwrap(), data);
    }

    #[test]
    fn na_policies_agree_on_complete_data(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let schema = parse_schema(PANEL_SCHEMA).unwrap();
        let mut data = panel_dataset(&mut rng);
        let keys: Vec<_> = data.key_set().cloned().collect();
        for key in keys {
            if data.get(&key).unwrap().is_na() {
                data = data.with_value(&key, validus_core::Value::int(1)).unwrap();
            }
        }
        let text: String = (0..3).map(|i| format!("r{i}: {}\n", panel_rule(&mut rng, 2))).collect();
        let rules = parse_rules(&text).unwrap();
        let propagate = evaluate_ruleset(&rules, &data, &schema, EvalOptions::default()).unwrap();
        let ignore = EvalOptions { na_policy: NaPolicy::Ignore, ..EvalOptions::default() };
        prop_assert_eq!(propagate, evaluate_ruleset(&rules, &data, &schema, ignore).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn witnesses_satisfy_the_rules(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let schema = parse_schema(XYZG_SCHEMA).unwrap();
        let size = rng.gen_range(1..=4);
        let rules = parse_rules(&record_ruleset(&mut rng, size)).unwrap();
        let system = compile_rules::<Rational>(&rules, &schema).unwrap();
        match solve(&system) {
            Some(witness) => {
                prop_assert!(system.holds(&witness));
                for (var, value) in &witness.numeric {
                    let range = implied_bounds(&system, var).unwrap();
                    prop_assert!(range.contains(value), "{} = {} outside {}", var, value, range);
                }
            }
            None => prop_assert!(!is_satisfiable(&system)),
        }
    }

    #[test]
    fn exact_scalars_agree(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let schema = parse_schema(XYZG_SCHEMA).unwrap();
        let size = rng.gen_range(1..=4);
        let rules = parse_rules(&record_ruleset(&mut rng, size)).unwrap();
        let big = analyze_ruleset::<Rational>(&rules, &schema);
        let small = analyze_ruleset::<SmallRational>(&rules, &schema);
        prop_assert_eq!(big.feasible, small.feasible);
        let big: Vec<String> = big.findings.iter().map(|f| f.kind.to_string()).collect();
        let small: Vec<String> = small.findings.iter().map(|f| f.kind.to_string()).collect();
        prop_assert_eq!(big, small);
    }

    #[test]
    fn every_finding_carries_checkable_evidence(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let schema = parse_schema(XYZG_SCHEMA).unwrap();
        let size = rng.gen_range(1..=4);
        let rules = parse_rules(&record_ruleset(&mut rng, size)).unwrap();
        for finding in analyze_ruleset::<Rational>(&rules, &schema).findings {
            prop_assert!(!finding.evidence.is_empty());
            for probe in &finding.evidence {
                prop_assert_eq!(verify_probe::<Rational>(&rules, &schema, probe), Ok(true), "{}", probe);
            }
        }
    }

    #[test]
    fn simplification_is_idempotent(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let schema = parse_schema(XYZG_SCHEMA).unwrap();
        let size = rng.gen_range(1..=4);
        let rules = parse_rules(&record_ruleset(&mut rng, size)).unwrap();
        if let Ok((once, _)) = simplify_ruleset::<Rational>(&rules, &schema) {
            let reparsed = parse_rules(&format_ruleset(&once)).unwrap();
            let (twice, log) = simplify_ruleset::<Rational>(&reparsed, &schema).unwrap();
            prop_assert!(log.is_empty());
            prop_assert_eq!(twice, once);
        }
    }
}
