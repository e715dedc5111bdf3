//! Batch front end: file ingestion, the five commands, and report output.
//!
//! Each `cmd_*` function reads its inputs, runs, and returns a
//! [`CommandOutput`] holding the exit code and the text to emit. Writing to
//! files or standard streams is left to the caller.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analyzer::{
    analyze_ruleset, compile_rule, lint_rule, simplify_ruleset, AnalysisError, Finding, SimplifyError,
};
use crate::classify::{classify_in, classify_rule, RuleSignature};
use crate::eval::{evaluate_ruleset, EvalOptions, NaPolicy, Slot, ValidationReport};
use crate::lang::{format_expr, format_ruleset, parse_rules, RuleSet};
use crate::logic::TriBool;
use crate::model::{build_dataset, compare_identifiers, compare_occasions, DataPoint, Dataset, Key, Value};
use crate::schema::{parse_schema, Schema};
use crate::Rational;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURES: i32 = 1;
pub const EXIT_INPUT_ERROR: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunConfig {
    pub rules_path: Option<PathBuf>,
    pub schema_path: Option<PathBuf>,
    /// One CSV file per table.
    pub data_paths: Vec<(String, PathBuf)>,
    pub na_policy: NaPolicy,
    /// Count NA entries as failures.
    pub strict_na: bool,
    pub output_format: OutputFormat,
    pub output_path: Option<PathBuf>,
    pub log_path: Option<PathBuf>,
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutput {
    pub exit_code: i32,
    /// The report (or rewritten rule file).
    pub output: String,
    /// Warnings, errors and transformation logs.
    pub messages: String,
}

impl CommandOutput {
    fn input_error(error: InputError) -> Self {
        CommandOutput {
            exit_code: EXIT_INPUT_ERROR,
            output: String::new(),
            messages: format!("error: {error}\n"),
        }
    }
}

/// An input file that could not be read or parsed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputError {
    pub path: Option<PathBuf>,
    pub message: String,
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.path {
            Some(path) => write!(f, "{}: {}", path.display(), self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for InputError {}

fn input_error(path: Option<&Path>, message: impl fmt::Display) -> InputError {
    InputError {
        path: path.map(Path::to_path_buf),
        message: message.to_string(),
    }
}

/// Parses a `table=path` argument.
pub fn parse_data_arg(arg: &str) -> Result<(String, PathBuf), String> {
    match arg.split_once('=') {
        Some((table, path)) if !table.is_empty() && !path.is_empty() => Ok((table.to_string(), PathBuf::from(path))),
        _ => Err(format!("expected TABLE=FILE, got `{arg}`")),
    }
}

fn read(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|e| input_error(Some(path), format!("cannot read: {e}")))
}

fn required<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, InputError> {
    path.as_deref()
        .ok_or_else(|| input_error(None, format!("missing required option {flag}")))
}

fn load_rules(config: &RunConfig) -> Result<RuleSet, InputError> {
    let path = required(&config.rules_path, "--rules")?;
    parse_rules(&read(path)?).map_err(|e| input_error(Some(path), e))
}

fn load_schema(config: &RunConfig) -> Result<Schema, InputError> {
    let path = required(&config.schema_path, "--schema")?;
    parse_schema(&read(path)?).map_err(|e| input_error(Some(path), e))
}

/// Reads one table from CSV text. The unit column is required; the time
/// column is used when the schema names one and the header has it. Every
/// other column is a variable, and every cell becomes one data point.
pub fn read_table_csv(table: &str, text: &str, schema: &Schema) -> Result<Vec<DataPoint>, String> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| e.to_string())?
        .iter()
        .map(str::to_string)
        .collect();
    let unit_col = header
        .iter()
        .position(|h| *h == schema.unit_column)
        .ok_or_else(|| format!("line 1: missing unit column `{}`", schema.unit_column))?;
    let time_col = schema
        .time_column
        .as_ref()
        .and_then(|t| header.iter().position(|h| h == t));
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| e.to_string())?;
        let line = record.position().map_or(0, |p| p.line());
        let unit = &record[unit_col];
        if unit.is_empty() {
            return Err(format!("line {line}: empty unit identifier"));
        }
        let time = time_col.map(|c| &record[c]);
        if time == Some("") {
            return Err(format!("line {line}: empty time identifier"));
        }
        for (i, name) in header.iter().enumerate() {
            if i == unit_col || Some(i) == time_col {
                continue;
            }
            points.push(DataPoint::new(
                Key::new(table, time, unit, name.as_str()),
                Value::parse_cell(&record[i]),
            ));
        }
    }
    Ok(points)
}

/// Writes one table of a dataset as CSV: unit column, time column when any
/// record has an occasion, then the variables in name order.
pub fn write_table_csv(dataset: &Dataset, table: &str, schema: &Schema) -> String {
    let mut records: Vec<(&str, &Option<String>)> = Vec::new();
    let mut variables: Vec<&str> = Vec::new();
    for key in dataset.key_set().filter(|k| k.table == table) {
        records.push((&key.unit, &key.time));
        variables.push(&key.variable);
    }
    records.sort_by(|a, b| compare_identifiers(a.0, b.0).then_with(|| compare_occasions(a.1, b.1)));
    records.dedup();
    variables.sort();
    variables.dedup();
    let timed = records.iter().any(|(_, t)| t.is_some());
    let time_column = schema.time_column.as_deref().unwrap_or("time");
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec![schema.unit_column.as_str()];
    if timed {
        header.push(time_column);
    }
    header.extend(&variables);
    writer.write_record(&header).expect("writing to memory");
    for (unit, time) in records {
        let mut row = vec![unit.to_string()];
        if timed {
            row.push(time.clone().unwrap_or_default());
        }
        for var in &variables {
            let key = Key {
                table: table.to_string(),
                time: time.clone(),
                unit: unit.to_string(),
                variable: var.to_string(),
            };
            row.push(dataset.get(&key).map(Value::to_cell).unwrap_or_default());
        }
        writer.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(writer.into_inner().expect("writing to memory")).expect("CSV output is UTF-8")
}

fn load_dataset(config: &RunConfig, schema: &Schema) -> Result<Dataset, InputError> {
    let mut points = Vec::new();
    for (table, path) in &config.data_paths {
        if !schema.has_table(table) {
            return Err(input_error(
                Some(path),
                format!("table `{table}` is not declared in the schema"),
            ));
        }
        let text = read(path)?;
        points.extend(read_table_csv(table, &text, schema).map_err(|e| input_error(Some(path), e))?);
    }
    build_dataset(points, None).map_err(|e| input_error(None, e))
}

#[derive(Serialize)]
struct RuleRow {
    name: String,
    text: String,
    signature: RuleSignature,
    level: u8,
}

#[derive(Serialize)]
struct EntryRow {
    rule: String,
    table: String,
    unit: String,
    time: Option<String>,
    result: TriBool,
}

#[derive(Serialize)]
struct FindingRow {
    kind: String,
    subject: Option<String>,
    detail: String,
    evidence: Vec<String>,
}

#[derive(Serialize)]
struct RuleCount {
    rule: String,
    passed: usize,
    failed: usize,
    na: usize,
}

#[derive(Serialize)]
struct DiagnosticRow {
    rule: String,
    scope: String,
    kind: &'static str,
    message: String,
}

#[derive(Serialize, Default)]
struct Summary {
    command: &'static str,
    exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    entries: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    passed: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    failed: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    na: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    per_rule: Vec<RuleCount>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    diagnostics: Vec<DiagnosticRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    feasible: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    findings: Option<usize>,
}

#[derive(Serialize)]
struct Report {
    rules: Vec<RuleRow>,
    entries: Vec<EntryRow>,
    findings: Vec<FindingRow>,
    summary: Summary,
}

fn rule_rows(rules: &RuleSet, schema: Option<&Schema>) -> Vec<RuleRow> {
    rules
        .iter()
        .map(|rule| {
            let signature = match schema {
                Some(s) => classify_in(rule, s),
                None => classify_rule(rule),
            };
            RuleRow {
                name: rule.name.clone(),
                text: format_expr(&rule.body),
                signature,
                level: signature.level(),
            }
        })
        .collect()
}

fn entry_rows(report: &ValidationReport) -> Vec<EntryRow> {
    report
        .entries
        .iter()
        .map(|e| EntryRow {
            rule: e.rule.clone(),
            table: e.scope.table.clone(),
            unit: match &e.scope.unit {
                Slot::All => "ALL".to_string(),
                Slot::One(u) => u.clone(),
            },
            time: match &e.scope.time {
                Slot::All => Some("ALL".to_string()),
                Slot::One(t) => t.clone(),
            },
            result: e.result,
        })
        .collect()
}

fn finding_row(finding: &Finding<Rational>) -> FindingRow {
    FindingRow {
        kind: finding.kind.name().to_string(),
        subject: finding.kind.subject().map(str::to_string),
        detail: finding.kind.to_string(),
        evidence: finding.evidence.iter().map(|p| p.to_string()).collect(),
    }
}

fn unsupported_row(error: &AnalysisError) -> FindingRow {
    FindingRow {
        kind: "UnsupportedForAnalysis".to_string(),
        subject: Some(error.rule().to_string()),
        detail: error.to_string(),
        evidence: Vec::new(),
    }
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header).expect("writing to memory");
    for row in rows {
        writer.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(writer.into_inner().expect("writing to memory")).expect("CSV output is UTF-8")
}

fn render(report: &Report, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let mut text = serde_json::to_string_pretty(report).expect("reports serialize");
            text.push('\n');
            text
        }
        OutputFormat::Csv => match report.summary.command {
            "validate" => csv_text(
                &["rule", "table", "unit", "time", "result"],
                report.entries.iter().map(|e| {
                    vec![
                        e.rule.clone(),
                        e.table.clone(),
                        e.unit.clone(),
                        e.time.clone().unwrap_or_default(),
                        e.result.as_str().to_string(),
                    ]
                }),
            ),
            "classify" => csv_text(
                &["rule", "signature", "level"],
                report
                    .rules
                    .iter()
                    .map(|r| vec![r.name.clone(), r.signature.to_string(), r.level.to_string()]),
            ),
            _ => csv_text(
                &["kind", "subject", "detail", "evidence"],
                report.findings.iter().map(|f| {
                    vec![
                        f.kind.clone(),
                        f.subject.clone().unwrap_or_default(),
                        f.detail.clone(),
                        f.evidence.join("; "),
                    ]
                }),
            ),
        },
    }
}

/// Evaluates the rules on the data.
///
/// Exit code 1 when any entry is False (or NA under `strict_na`), else 0.
pub fn cmd_validate(config: &RunConfig) -> CommandOutput {
    let loaded = (|| {
        let schema = load_schema(config)?;
        let rules = load_rules(config)?;
        let dataset = load_dataset(config, &schema)?;
        Ok::<_, InputError>((schema, rules, dataset))
    })();
    let (schema, rules, dataset) = match loaded {
        Ok(v) => v,
        Err(e) => return CommandOutput::input_error(e),
    };
    let options = EvalOptions {
        na_policy: config.na_policy,
        diagnostics: true,
    };
    let report = match evaluate_ruleset(&rules, &dataset, &schema, options) {
        Ok(r) => r,
        Err(e) => return CommandOutput::input_error(input_error(config.rules_path.as_deref(), e)),
    };
    let passed = report.count(TriBool::True);
    let failed = report.count(TriBool::False);
    let na = report.count(TriBool::Na);
    let exit_code = if failed > 0 || (config.strict_na && na > 0) {
        EXIT_FAILURES
    } else {
        EXIT_OK
    };
    let mut messages = String::new();
    if na > 0 && !config.strict_na {
        messages.push_str(&format!("warning: {na} entries evaluated to NA\n"));
    }
    let summary = Summary {
        command: "validate",
        exit_code,
        entries: Some(report.entries.len()),
        passed: Some(passed),
        failed: Some(failed),
        na: Some(na),
        per_rule: report
            .summary
            .iter()
            .map(|s| RuleCount {
                rule: s.rule.clone(),
                passed: s.passed,
                failed: s.failed,
                na: s.na,
            })
            .collect(),
        diagnostics: report
            .diagnostics
            .iter()
            .map(|d| DiagnosticRow {
                rule: d.rule.clone(),
                scope: d.scope.to_string(),
                kind: d.kind.as_str(),
                message: d.message.clone(),
            })
            .collect(),
        ..Summary::default()
    };
    let out = Report {
        rules: rule_rows(&rules, Some(&schema)),
        entries: entry_rows(&report),
        findings: Vec::new(),
        summary,
    };
    CommandOutput {
        exit_code,
        output: render(&out, config.output_format),
        messages,
    }
}

/// Lists each rule's signature and level. The schema is optional; with it,
/// unqualified references resolve to their tables.
pub fn cmd_classify(config: &RunConfig) -> CommandOutput {
    let rules = match load_rules(config) {
        Ok(r) => r,
        Err(e) => return CommandOutput::input_error(e),
    };
    let schema = match &config.schema_path {
        Some(_) => match load_schema(config) {
            Ok(s) => Some(s),
            Err(e) => return CommandOutput::input_error(e),
        },
        None => None,
    };
    let out = Report {
        rules: rule_rows(&rules, schema.as_ref()),
        entries: Vec::new(),
        findings: Vec::new(),
        summary: Summary {
            command: "classify",
            exit_code: EXIT_OK,
            ..Summary::default()
        },
    };
    CommandOutput {
        exit_code: EXIT_OK,
        output: render(&out, config.output_format),
        messages: String::new(),
    }
}

fn load_rules_and_schema(config: &RunConfig) -> Result<(RuleSet, Schema), InputError> {
    let schema = load_schema(config)?;
    let rules = load_rules(config)?;
    Ok((rules, schema))
}

fn unknown_variables(rules: &RuleSet, schema: &Schema, config: &RunConfig) -> Result<(), InputError> {
    for rule in rules {
        if let Err(e @ AnalysisError::UnknownVariable { .. }) = compile_rule::<Rational>(rule, schema) {
            return Err(input_error(config.rules_path.as_deref(), e));
        }
    }
    Ok(())
}

/// Flags tautologies and contradictions rule by rule. Findings are
/// advisory; the exit code is 0.
pub fn cmd_lint(config: &RunConfig) -> CommandOutput {
    let (rules, schema) = match load_rules_and_schema(config) {
        Ok(v) => v,
        Err(e) => return CommandOutput::input_error(e),
    };
    if let Err(e) = unknown_variables(&rules, &schema, config) {
        return CommandOutput::input_error(e);
    }
    let mut findings = Vec::new();
    for rule in &rules {
        match lint_rule::<Rational>(rule, &schema) {
            Ok(Some(f)) => findings.push(finding_row(&f)),
            Ok(None) => {}
            Err(e) => findings.push(unsupported_row(&e)),
        }
    }
    let out = Report {
        rules: rule_rows(&rules, Some(&schema)),
        entries: Vec::new(),
        summary: Summary {
            command: "lint",
            exit_code: EXIT_OK,
            findings: Some(findings.len()),
            ..Summary::default()
        },
        findings,
    };
    CommandOutput {
        exit_code: EXIT_OK,
        output: render(&out, config.output_format),
        messages: String::new(),
    }
}

/// Runs every rule-set detection. Exit code 3 when the set is infeasible,
/// else 0.
pub fn cmd_analyze(config: &RunConfig) -> CommandOutput {
    let (rules, schema) = match load_rules_and_schema(config) {
        Ok(v) => v,
        Err(e) => return CommandOutput::input_error(e),
    };
    if let Err(e) = unknown_variables(&rules, &schema, config) {
        return CommandOutput::input_error(e);
    }
    let analysis = analyze_ruleset::<Rational>(&rules, &schema);
    let mut findings: Vec<FindingRow> = analysis.unsupported.iter().map(unsupported_row).collect();
    findings.extend(analysis.findings.iter().map(finding_row));
    let exit_code = if analysis.feasible { EXIT_OK } else { EXIT_INFEASIBLE };
    let mut messages = String::new();
    for e in &analysis.unsupported {
        messages.push_str(&format!("note: {e}\n"));
    }
    let out = Report {
        rules: rule_rows(&rules, Some(&schema)),
        entries: Vec::new(),
        summary: Summary {
            command: "analyze",
            exit_code,
            feasible: Some(analysis.feasible),
            findings: Some(findings.len()),
            ..Summary::default()
        },
        findings,
    };
    CommandOutput {
        exit_code,
        output: render(&out, config.output_format),
        messages,
    }
}

/// Rewrites the rule file. Rules outside the analyzable fragment are kept
/// unchanged and do not take part in the rewriting. The output is the
/// canonical rule file; `messages` is the transformation log.
pub fn cmd_simplify(config: &RunConfig) -> CommandOutput {
    let (rules, schema) = match load_rules_and_schema(config) {
        Ok(v) => v,
        Err(e) => return CommandOutput::input_error(e),
    };
    if let Err(e) = unknown_variables(&rules, &schema, config) {
        return CommandOutput::input_error(e);
    }
    let mut messages = String::new();
    let mut analyzable = Vec::new();
    for rule in &rules {
        match compile_rule::<Rational>(rule, &schema) {
            Ok(_) => analyzable.push(rule.clone()),
            Err(e) => messages.push_str(&format!("kept {}: {e}\n", rule.name)),
        }
    }
    let subset = RuleSet::new(analyzable).expect("names are unique");
    let (simplified, log) = match simplify_ruleset::<Rational>(&subset, &schema) {
        Ok(v) => v,
        Err(SimplifyError::Infeasible(finding)) => {
            let evidence: Vec<String> = finding.evidence.iter().map(|p| p.to_string()).collect();
            return CommandOutput {
                exit_code: EXIT_INFEASIBLE,
                output: String::new(),
                messages: format!("error: the rule set is infeasible ({})\n", evidence.join("; ")),
            };
        }
        Err(SimplifyError::Analysis(e)) => {
            return CommandOutput::input_error(input_error(config.rules_path.as_deref(), e))
        }
    };
    for step in &log {
        messages.push_str(&format!("{step}\n"));
    }
    let merged: Vec<_> = rules
        .iter()
        .filter_map(|rule| {
            if subset.get(&rule.name).is_none() {
                Some(rule.clone())
            } else {
                simplified.get(&rule.name).cloned()
            }
        })
        .collect();
    let merged = RuleSet::new(merged).expect("names are unique");
    CommandOutput {
        exit_code: EXIT_OK,
        output: format_ruleset(&merged),
        messages,
    }
}
