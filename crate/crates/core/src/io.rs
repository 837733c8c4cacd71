//! Instance files, sweep tables and the command layer behind the CLI.
//!
//! Instances are JSON:
//!
//! ```json
//! {
//!   "label": "and-majority",
//!   "p": 2,
//!   "truth_table": [0, 0, 0, 1],
//!   "thresholds": ["1/2", "1/2", "1/2"],
//!   "breakings": [1, 1, 0],
//!   "distributions": [["1/4", "1/4", "1/4", "1/4"], ["1/25", "8/25", "8/25", "8/25"]]
//! }
//! ```
//!
//! Rationals are `"num/den"` strings; decimal strings such as `"0.04"` are
//! converted exactly. Judgement `k` of a truth table or distribution is the
//! premise vector whose binary value is `k`, first premise most significant.
//! The conclusion's threshold and breaking may instead be given as
//! `q_conclusion` and `d_conclusion`, with premise-only arrays; one-premise
//! instances are emitted that way.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::conditions::{kappa_tuple, DistributionSet, KappaTuple};
use crate::error::{Error, Result};
use crate::likelihood::{
    fit_curve, smoothed_extremes, Assignment, Classification, CurveFit, Extremes, ExtremesConfig, Family,
};
use crate::model::{Agenda, FractionalVote, QuotaRule, MAX_PREMISES};
use crate::polyhedra::ParadoxRegion;
use crate::scalar::{format_rational, parse_rational, Rational};

/// A complete problem: agenda, rule and the adversary's distributions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub label: String,
    pub agenda: Agenda,
    pub rule: QuotaRule,
    pub distributions: DistributionSet,
}

/// A parsed instance plus non-fatal findings.
#[derive(Clone, Debug)]
pub struct Parsed {
    pub instance: Instance,
    pub warnings: Vec<String>,
}

impl Instance {
    pub fn new(label: impl Into<String>, agenda: Agenda, rule: QuotaRule, distributions: DistributionSet) -> Result<Self> {
        rule.check_agenda(&agenda)?;
        if distributions.judgements() != agenda.judgements() {
            return Err(Error::dimension("distribution", agenda.judgements(), distributions.judgements()));
        }
        Ok(Instance {
            label: label.into(),
            agenda,
            rule,
            distributions,
        })
    }

    /// Zero-weight members, as warning text.
    pub fn positivity_warnings(&self) -> Vec<String> {
        self.distributions
            .members()
            .iter()
            .enumerate()
            .filter(|(_, pi)| pi.weights().iter().any(|w| *w <= Rational::from_integer(0.into())))
            .map(|(k, _)| format!("$.distributions[{k}]: not strictly positive"))
            .collect()
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| Error::validation(format!("$.{key}"), "missing field"))
}

fn rational_at(v: &Value, path: &str) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s).map_err(|e| Error::validation(path, e.to_string())),
        Value::Number(n) if n.is_i64() || n.is_u64() => parse_rational(&n.to_string()).map_err(|e| Error::validation(path, e.to_string())),
        Value::Number(_) => Err(Error::validation(path, "write fractional values as strings such as \"1/4\" or \"0.25\"")),
        _ => Err(Error::validation(path, "expected a rational string")),
    }
}

fn bit_at(v: &Value, path: &str) -> Result<bool> {
    match v {
        Value::Bool(b) => Ok(*b),
        Value::Number(n) if n.as_u64() == Some(0) => Ok(false),
        Value::Number(n) if n.as_u64() == Some(1) => Ok(true),
        _ => Err(Error::validation(path, "expected 0 or 1")),
    }
}

fn array_at<'a>(v: &'a Value, path: &str, len: Option<usize>) -> Result<&'a Vec<Value>> {
    let arr = v.as_array().ok_or_else(|| Error::validation(path, "expected an array"))?;
    if let Some(len) = len {
        if arr.len() != len {
            return Err(Error::validation(path, format!("expected {len} entries, found {}", arr.len())));
        }
    }
    Ok(arr)
}

fn unit_interval(q: &Rational, path: &str) -> Result<()> {
    if *q < Rational::from_integer(0.into()) || *q > Rational::from_integer(1.into()) {
        return Err(Error::validation(path, format!("{} is outside [0, 1]", format_rational(q))));
    }
    Ok(())
}

/// Parses and validates instance JSON text.
pub fn parse_instance_str(text: &str) -> Result<Parsed> {
    let root: Value = serde_json::from_str(text).map_err(|e| Error::validation("$", e.to_string()))?;
    let obj = root.as_object().ok_or_else(|| Error::validation("$", "expected an object"))?;
    const KNOWN: [&str; 9] = [
        "label",
        "p",
        "truth_table",
        "thresholds",
        "breakings",
        "distributions",
        "q_conclusion",
        "d_conclusion",
        "comment",
    ];
    if let Some(k) = obj.keys().find(|k| !KNOWN.contains(&k.as_str())) {
        return Err(Error::validation(format!("$.{k}"), "unknown field"));
    }

    let label = match obj.get("label") {
        None => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(Error::validation("$.label", "expected a string")),
    };
    let p = field(obj, "p")?
        .as_u64()
        .filter(|&p| (1..=MAX_PREMISES as u64).contains(&p))
        .ok_or_else(|| Error::validation("$.p", format!("expected an integer in [1, {MAX_PREMISES}]")))? as usize;
    let m = 1usize << p;

    let table = array_at(field(obj, "truth_table")?, "$.truth_table", Some(m))?
        .iter()
        .enumerate()
        .map(|(k, v)| bit_at(v, &format!("$.truth_table[{k}]")))
        .collect::<Result<Vec<_>>>()?;
    let agenda = Agenda::new(p, table).map_err(|e| Error::validation("$.truth_table", e.to_string()))?;

    let split = obj.contains_key("q_conclusion") || obj.contains_key("d_conclusion");
    if split && !(obj.contains_key("q_conclusion") && obj.contains_key("d_conclusion")) {
        return Err(Error::validation("$.q_conclusion", "q_conclusion and d_conclusion must be given together"));
    }
    let expected = if split { p } else { p + 1 };
    let mut thresholds = array_at(field(obj, "thresholds")?, "$.thresholds", Some(expected))?
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let path = format!("$.thresholds[{k}]");
            let q = rational_at(v, &path)?;
            unit_interval(&q, &path)?;
            Ok(q)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut breakings = array_at(field(obj, "breakings")?, "$.breakings", Some(expected))?
        .iter()
        .enumerate()
        .map(|(k, v)| bit_at(v, &format!("$.breakings[{k}]")))
        .collect::<Result<Vec<_>>>()?;
    if split {
        let q = rational_at(field(obj, "q_conclusion")?, "$.q_conclusion")?;
        unit_interval(&q, "$.q_conclusion")?;
        thresholds.push(q);
        breakings.push(bit_at(field(obj, "d_conclusion")?, "$.d_conclusion")?);
    }
    let rule = QuotaRule::new(thresholds, breakings).map_err(|e| Error::validation("$.thresholds", e.to_string()))?;

    let rows = array_at(field(obj, "distributions")?, "$.distributions", None)?;
    if rows.is_empty() {
        return Err(Error::validation("$.distributions", "at least one distribution is required"));
    }
    let mut members: Vec<FractionalVote> = Vec::with_capacity(rows.len());
    for (k, row) in rows.iter().enumerate() {
        let path = format!("$.distributions[{k}]");
        let weights = array_at(row, &path, Some(m))?
            .iter()
            .enumerate()
            .map(|(w, v)| {
                let path = format!("{path}[{w}]");
                let x = rational_at(v, &path)?;
                unit_interval(&x, &path)?;
                Ok(x)
            })
            .collect::<Result<Vec<_>>>()?;
        let total: Rational = weights.iter().sum();
        if total != Rational::from_integer(1.into()) {
            return Err(Error::validation(&path, format!("weights sum to {}, not 1", format_rational(&total))));
        }
        let pi = FractionalVote::new(weights).map_err(|e| Error::validation(&path, e.to_string()))?;
        if let Some(j) = members.iter().position(|other| *other == pi) {
            return Err(Error::validation(&path, format!("duplicates $.distributions[{j}]")));
        }
        members.push(pi);
    }
    let distributions = DistributionSet::new(members).map_err(|e| Error::validation("$.distributions", e.to_string()))?;
    let instance = Instance::new(label, agenda, rule, distributions)?;
    let warnings = instance.positivity_warnings();
    Ok(Parsed { instance, warnings })
}

pub fn parse_instance(path: impl AsRef<Path>) -> Result<Parsed> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_instance_str(&text)
}

/// Canonical JSON for an instance; `parse_instance_str(&emit_instance(x))` gives back `x`.
pub fn emit_instance(instance: &Instance) -> String {
    let p = instance.agenda.premises();
    let bit = |b: bool| json!(u8::from(b));
    let rat = |r: &Rational| json!(format_rational(r));
    let mut obj = Map::new();
    obj.insert("label".into(), json!(instance.label));
    obj.insert("p".into(), json!(p));
    obj.insert("truth_table".into(), Value::Array(instance.agenda.truth_table().iter().map(|&b| bit(b)).collect()));
    let thresholds = instance.rule.thresholds();
    let breakings = instance.rule.breakings();
    let cut = if p == 1 { p } else { p + 1 };
    obj.insert("thresholds".into(), Value::Array(thresholds[..cut].iter().map(rat).collect()));
    obj.insert("breakings".into(), Value::Array(breakings[..cut].iter().map(|&b| bit(b)).collect()));
    if p == 1 {
        obj.insert("q_conclusion".into(), rat(&thresholds[p]));
        obj.insert("d_conclusion".into(), bit(breakings[p]));
    }
    obj.insert(
        "distributions".into(),
        Value::Array(
            instance
                .distributions
                .members()
                .iter()
                .map(|pi| Value::Array(pi.weights().iter().map(rat).collect()))
                .collect(),
        ),
    );
    let mut text = serde_json::to_string_pretty(&Value::Object(obj)).expect("json values serialize");
    text.push('\n');
    text
}

/// One line of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: u64,
    pub max_est: f64,
    pub max_se: f64,
    pub min_est: f64,
    pub min_se: f64,
    pub max_witness: String,
    pub min_witness: String,
    pub mode: String,
}

pub const CSV_HEADER: &str = "n,max_est,max_se,min_est,min_se,max_witness,min_witness,mode";

impl From<&Extremes> for SweepRow {
    fn from(e: &Extremes) -> Self {
        SweepRow {
            n: e.n,
            max_est: e.max.value,
            max_se: e.max.stderr,
            min_est: e.min.value,
            min_se: e.min.stderr,
            max_witness: e.max_witness.to_string(),
            min_witness: e.min_witness.to_string(),
            mode: e.mode.label().to_string(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
    All,
}

impl Parity {
    pub fn admits(self, n: u64) -> bool {
        match self {
            Parity::Odd => !n.is_multiple_of(2),
            Parity::Even => n.is_multiple_of(2),
            Parity::All => true,
        }
    }
}

/// Agent counts `from, from + step, ..., <= to` that match `parity`.
pub fn sweep_points(from: u64, to: u64, step: u64, parity: Parity) -> Result<Vec<u64>> {
    if from == 0 || step == 0 || from > to {
        return Err(Error::invalid("sweep range", format!("need 1 <= from <= to and step >= 1, got {from}..{to} step {step}")));
    }
    Ok((from..=to).step_by(step as usize).filter(|&n| parity.admits(n)).collect())
}

pub fn sweep(instance: &Instance, ns: &[u64], config: &ExtremesConfig) -> Result<SweepResult> {
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let rows = ns
        .iter()
        .map(|&n| {
            let e = smoothed_extremes(&instance.distributions, n, &instance.rule, &instance.agenda, config)?;
            Ok(SweepRow::from(&e))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { rows })
}

impl SweepResult {
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        w.write_record(CSV_HEADER.split(',')).map_err(csv_error)?;
        for row in &self.rows {
            w.serialize(row).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    /// Reads a sweep table; columns are matched by header name.
    pub fn read_csv(input: impl Read) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let rows = r.deserialize().collect::<std::result::Result<Vec<SweepRow>, _>>().map_err(csv_error)?;
        Ok(SweepResult { rows })
    }

    pub fn series(&self, column: Column) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .map(|r| {
                let v = match column {
                    Column::Max => r.max_est,
                    Column::Min => r.min_est,
                };
                (r.n as f64, v)
            })
            .collect()
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::validation("csv", e.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Column {
    Max,
    Min,
}

impl Column {
    pub fn name(self) -> &'static str {
        match self {
            Column::Max => "max",
            Column::Min => "min",
        }
    }
}

/// Subcommands of the command layer.
#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Check { n: u64 },
    Exact { n: u64 },
    MonteCarlo { n: u64, trials: u64, seed: u64 },
    Sweep { ns: Vec<u64> },
    Fit { family: Family, input: SweepResult, columns: Vec<Column> },
    Polyhedra,
}

/// Conditions and rate classes at one `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub n: u64,
    pub kappa: KappaTuple,
    pub classification: Option<Classification>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Report {
    Check(CheckReport),
    Extremes(Box<Extremes>),
    Sweep(SweepResult),
    Fit(Vec<(Column, CurveFit<f64>)>),
    Polyhedra(ParadoxRegion),
}

fn need(instance: Option<&Instance>) -> Result<&Instance> {
    instance.ok_or_else(|| Error::invalid("command", "an instance file is required"))
}

/// Runs one command; `config` supplies the mode, budgets and worker count.
pub fn run_command(command: &Command, instance: Option<&Instance>, config: &ExtremesConfig) -> Result<Report> {
    Ok(match command {
        Command::Check { n } => {
            let inst = need(instance)?;
            inst.distributions.require_strictly_positive()?;
            let kappa = kappa_tuple(&inst.distributions, &inst.rule, &inst.agenda, *n)?;
            Report::Check(CheckReport {
                n: *n,
                kappa,
                classification: Some(Classification::from_kappa(kappa)),
            })
        }
        Command::Exact { n } => {
            let inst = need(instance)?;
            let mut config = config.clone();
            if !matches!(config.mode, crate::likelihood::Mode::Exact(_)) {
                config.mode = crate::likelihood::Mode::Exact(Default::default());
            }
            Report::Extremes(Box::new(smoothed_extremes(&inst.distributions, *n, &inst.rule, &inst.agenda, &config)?))
        }
        Command::MonteCarlo { n, trials, seed } => {
            let inst = need(instance)?;
            let mut config = config.clone();
            config.mode = crate::likelihood::Mode::MonteCarlo {
                trials: *trials,
                seed: *seed,
            };
            Report::Extremes(Box::new(smoothed_extremes(&inst.distributions, *n, &inst.rule, &inst.agenda, &config)?))
        }
        Command::Sweep { ns } => Report::Sweep(sweep(need(instance)?, ns, config)?),
        Command::Fit { family, input, columns } => {
            let fits = columns
                .iter()
                .map(|&c| Ok((c, fit_curve(&input.series(c), *family)?)))
                .collect::<Result<Vec<_>>>()?;
            Report::Fit(fits)
        }
        Command::Polyhedra => {
            let inst = need(instance)?;
            Report::Polyhedra(ParadoxRegion::new(&inst.rule, &inst.agenda)?)
        }
    })
}

fn fmt_witness(a: &Assignment) -> String {
    a.to_string()
}

impl Report {
    /// Human-readable text; sweeps render as CSV.
    pub fn render(&self) -> String {
        let mut s = String::new();
        match self {
            Report::Check(c) => {
                let k = c.kappa;
                let _ = writeln!(s, "n = {}", c.n);
                let _ = writeln!(s, "kappa1 = {}", k.kappa1);
                let _ = writeln!(s, "kappa2 = {}", k.kappa2);
                let _ = writeln!(s, "kappa3 = {}", k.kappa3);
                let _ = writeln!(s, "kappa4 = {}", k.kappa4);
                if let Some(cl) = &c.classification {
                    let _ = writeln!(s, "max rate = {}", cl.max_rate);
                    let _ = writeln!(s, "min rate = {}", cl.min_rate);
                }
            }
            Report::Extremes(e) => {
                let _ = writeln!(s, "n = {} ({} assignments, mode {})", e.n, e.assignments, e.mode.label());
                for (name, est, w) in [("max", &e.max, &e.max_witness), ("min", &e.min, &e.min_witness)] {
                    let exact = est.exact.as_ref().map(|r| format!(" = {}", format_rational(r))).unwrap_or_default();
                    if est.stderr > 0.0 || matches!(e.mode, crate::likelihood::Mode::MonteCarlo { .. }) {
                        let _ = writeln!(s, "{name} = {:.6e} (se {:.3e}) at {}", est.value, est.stderr, fmt_witness(w));
                    } else {
                        let _ = writeln!(s, "{name} = {:.12e}{exact} at {}", est.value, fmt_witness(w));
                    }
                }
            }
            Report::Sweep(r) => s = r.to_csv(),
            Report::Fit(fits) => {
                for (col, fit) in fits {
                    let params: Vec<String> = fit
                        .family
                        .parameter_names()
                        .iter()
                        .zip(&fit.params)
                        .map(|(n, v)| format!("{n}={v:.6}"))
                        .collect();
                    let _ = writeln!(
                        s,
                        "{} {}: {} rmse={:.4e} r2={:.8}",
                        col.name(),
                        fit.family,
                        params.join(" "),
                        fit.rmse,
                        fit.r_squared
                    );
                }
            }
            Report::Polyhedra(region) => {
                let _ = writeln!(s, "{} paradox polyhedra", region.len());
                for poly in region.polyhedra() {
                    s.push_str(&poly.to_string());
                }
            }
        }
        s
    }
}
