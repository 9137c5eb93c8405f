//! Command-line front end: `generate`, `metrics`, `compare`, `verify`.
//!
//! Every output file carries its full run configuration (a `# meta: {json}`
//! line at the top of CSV, the `"meta"` member of JSON), and equal
//! configurations produce byte-identical files.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classical::{kronecker, uniform_stream, van_der_corput, Generator, KroneckerConfig, SeededUniformConfig, GOLDEN_RATIO};
use crate::greedy::{GreedyError, GreedyOptions, Origin, SequenceState, TieRule};
use crate::metrics::{report_series, star_over_log, star_series, MetricsError};
use crate::numeric::{Backend, Rational, Scalar, DEFAULT_TIE_TOLERANCE, INV_E, INV_PI, INV_SQRT2};
use crate::oracle::ARGMIN_RESOLUTION;
use crate::verify::{run_suite, Suite, VerifyOptions};

const TOOL: &str = "kritzinger";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        2
    }
}

impl From<GreedyError> for CliError {
    fn from(e: GreedyError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::Config(e.to_string())
    }
}

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SequenceKind {
    Kritzinger,
    Vdc,
    Kronecker,
    Uniform,
}

impl SequenceKind {
    pub fn id(&self) -> &'static str {
        match self {
            SequenceKind::Kritzinger => "kritzinger",
            SequenceKind::Vdc => "vdc",
            SequenceKind::Kronecker => "kronecker",
            SequenceKind::Uniform => "uniform",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Scale of the reported star discrepancy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum StarScale {
    /// `sup |f_n(x) - n x|`.
    #[default]
    Count,
    /// The classical `D*_n`, the count scale divided by `n`.
    Normalized,
}

/// A parsed seed.
#[derive(Debug, Clone, PartialEq)]
pub enum SeedValue {
    /// Known exactly: `j/q`, a decimal, or `half`.
    Exact(Rational),
    /// Irrational constant rounded to `f64`.
    Irrational(f64),
}

/// Parses `inv_pi`, `inv_e`, `inv_sqrt2`, `half`, `j/q` or a decimal.
pub fn parse_seed(text: &str) -> Result<SeedValue, CliError> {
    let t = text.trim();
    Ok(match t {
        "inv_pi" => SeedValue::Irrational(INV_PI),
        "inv_e" => SeedValue::Irrational(INV_E),
        "inv_sqrt2" => SeedValue::Irrational(INV_SQRT2),
        "half" => SeedValue::Exact(Rational::from_parts(1, 2).expect("nonzero")),
        _ if t.contains('/') => SeedValue::Exact(t.parse().map_err(|e| config(format!("seed `{t}`: {e}")))?),
        _ => SeedValue::Exact(Rational::from_decimal_str(t).map_err(|e| config(format!("seed `{t}`: {e}")))?),
    })
}

/// Everything needed to reproduce one sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub sequence: SequenceKind,
    pub seeds: Vec<String>,
    /// Total number of points, seeds included.
    pub count: usize,
    pub backend: Backend,
    pub tie_rule: TieRule,
    pub tolerance: f64,
    pub alpha: f64,
    pub rng_seed: u64,
    pub generator: String,
}

impl RunConfig {
    pub fn new(sequence: SequenceKind, count: usize) -> Self {
        Self {
            sequence,
            seeds: Vec::new(),
            count,
            backend: Backend::Float,
            tie_rule: TieRule::Smallest,
            tolerance: DEFAULT_TIE_TOLERANCE,
            alpha: GOLDEN_RATIO,
            rng_seed: 0,
            generator: Generator::default().id().to_string(),
        }
    }

    pub fn with_seeds(mut self, seeds: &[&str]) -> Self {
        self.seeds = seeds.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    fn greedy_options(&self) -> GreedyOptions {
        GreedyOptions {
            tie_rule: self.tie_rule,
            tolerance: self.tolerance,
        }
    }

    pub fn validate(&self) -> Result<Vec<SeedValue>, CliError> {
        if self.count == 0 {
            return Err(config("count must be positive"));
        }
        if !(self.tolerance >= 0.0 && self.tolerance.is_finite()) {
            return Err(config(format!("tolerance must be finite and nonnegative, got {}", self.tolerance)));
        }
        let seeds = self.seeds.iter().map(|s| parse_seed(s)).collect::<Result<Vec<_>, _>>()?;
        if self.backend == Backend::Rational {
            if matches!(self.sequence, SequenceKind::Kronecker | SequenceKind::Uniform) {
                return Err(config(format!("the rational backend cannot represent the {} sequence", self.sequence.id())));
            }
            if let Some(i) = seeds.iter().position(|s| matches!(s, SeedValue::Irrational(_))) {
                return Err(config(format!("seed `{}` is irrational; use --backend float", self.seeds[i])));
            }
        }
        if !seeds.is_empty() && self.sequence != SequenceKind::Kritzinger {
            return Err(config(format!("--seeds only applies to kritzinger, not {}", self.sequence.id())));
        }
        if seeds.len() > self.count {
            return Err(config(format!("{} seeds exceed count {}", seeds.len(), self.count)));
        }
        match self.sequence {
            SequenceKind::Kronecker => {
                KroneckerConfig::new(self.alpha).map_err(|e| config(e.to_string()))?;
            }
            SequenceKind::Uniform => {
                self.generator.parse::<Generator>().map_err(|e| config(e.to_string()))?;
            }
            _ => {}
        }
        Ok(seeds)
    }
}

/// One point of a sequence dump. `raw_*` hold the unreduced `(2k+1)/(2n)`
/// form for greedy points and the dyadic form for van der Corput; `reduced`
/// is present whenever the exact value is known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpRow {
    pub step: usize,
    pub raw_numerator: Option<u64>,
    pub raw_denominator: Option<u64>,
    pub reduced: Option<String>,
    pub float_value: f64,
}

const DUMP_COLUMNS: [&str; 5] = ["step", "raw_numerator", "raw_denominator", "reduced", "float_value"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
}

impl Meta {
    fn new(command: &str, config: &impl Serialize) -> Self {
        Self {
            tool: TOOL.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config: serde_json::to_value(config).expect("configs serialize"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceDump {
    pub meta: Meta,
    pub rows: Vec<DumpRow>,
}

/// Point values of a generated sequence in append order.
#[derive(Debug, Clone, PartialEq)]
pub enum Values {
    Exact(Vec<Rational>),
    Float(Vec<f64>),
}

impl Values {
    pub fn len(&self) -> usize {
        match self {
            Values::Exact(v) => v.len(),
            Values::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Values::Exact(v) => v.iter().map(Rational::to_f64).collect(),
            Values::Float(v) => v.clone(),
        }
    }
}

fn greedy_rows<S: Scalar>(state: &SequenceState<S>) -> Vec<DumpRow> {
    state
        .history()
        .iter()
        .map(|e| {
            let (raw_numerator, raw_denominator) = match &e.origin {
                Origin::Greedy {
                    raw_numerator,
                    raw_denominator,
                } => (Some(*raw_numerator), Some(*raw_denominator)),
                Origin::Seed { .. } => (None, None),
            };
            DumpRow {
                step: e.step,
                raw_numerator,
                raw_denominator,
                reduced: e.exact().map(|r| r.to_string()),
                float_value: e.value.to_f64(),
            }
        })
        .collect()
}

fn run_greedy<S: Scalar>(
    seeds: &[SeedValue],
    cfg: &RunConfig,
    lift: impl Fn(&SeedValue) -> S,
) -> Result<(SequenceState<S>, Vec<S>), CliError> {
    let mut state = SequenceState::new();
    for s in seeds {
        let exact = match s {
            SeedValue::Exact(r) => Some(r.clone()),
            SeedValue::Irrational(_) => None,
        };
        state.push_seed_with_exact(lift(s), exact)?;
    }
    state.extend(cfg.count - seeds.len(), &cfg.greedy_options())?;
    let values = state.history().iter().map(|e| e.value.clone()).collect();
    Ok((state, values))
}

/// Builds the sequence described by `cfg`.
pub fn generate(cfg: &RunConfig) -> Result<(SequenceDump, Values), CliError> {
    let seeds = cfg.validate()?;
    let (rows, values) = match (cfg.sequence, cfg.backend) {
        (SequenceKind::Kritzinger, Backend::Rational) => {
            let (state, v) = run_greedy(&seeds, cfg, |s| match s {
                SeedValue::Exact(r) => r.clone(),
                SeedValue::Irrational(_) => unreachable!("rejected by validate"),
            })?;
            (greedy_rows(&state), Values::Exact(v))
        }
        (SequenceKind::Kritzinger, Backend::Float) => {
            let (state, v) = run_greedy(&seeds, cfg, |s| match s {
                SeedValue::Exact(r) => r.to_f64(),
                SeedValue::Irrational(x) => *x,
            })?;
            (greedy_rows(&state), Values::Float(v))
        }
        (SequenceKind::Vdc, backend) => {
            let pts: Vec<Rational> = (1..=cfg.count as u64)
                .map(|k| van_der_corput(k).map_err(|e| config(e.to_string())))
                .collect::<Result<_, _>>()?;
            let rows = pts
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    use num_traits::ToPrimitive;
                    DumpRow {
                        step: i + 1,
                        raw_numerator: r.numer().to_u64(),
                        raw_denominator: r.denom().to_u64(),
                        reduced: Some(r.to_string()),
                        float_value: r.to_f64(),
                    }
                })
                .collect();
            let values = match backend {
                Backend::Rational => Values::Exact(pts),
                Backend::Float => Values::Float(pts.iter().map(Rational::to_f64).collect()),
            };
            (rows, values)
        }
        (SequenceKind::Kronecker, _) => {
            let k = KroneckerConfig::new(cfg.alpha).map_err(|e| config(e.to_string()))?;
            float_rows((1..=cfg.count as u64).map(|i| kronecker(i, &k)).collect())
        }
        (SequenceKind::Uniform, _) => {
            let u = SeededUniformConfig {
                seed: cfg.rng_seed,
                generator: cfg.generator.clone(),
            };
            float_rows(uniform_stream(cfg.count, &u).map_err(|e| config(e.to_string()))?)
        }
    };
    Ok((
        SequenceDump {
            meta: Meta::new("generate", cfg),
            rows,
        },
        values,
    ))
}

fn float_rows(values: Vec<f64>) -> (Vec<DumpRow>, Values) {
    let rows = values
        .iter()
        .enumerate()
        .map(|(i, x)| DumpRow {
            step: i + 1,
            raw_numerator: None,
            raw_denominator: None,
            reduced: None,
            float_value: *x,
        })
        .collect();
    (rows, Values::Float(values))
}

// ---------------------------------------------------------------------------
// writing

fn write_csv<T: Serialize>(out: &mut dyn Write, meta: &Meta, rows: &[T], header: &[&str]) -> Result<(), CliError> {
    writeln!(out, "# meta: {}", serde_json::to_string(meta).expect("meta serializes"))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header).map_err(csv_io)?;
    for r in rows {
        w.serialize(r).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> CliError {
    CliError::Io(io::Error::other(e.to_string()))
}

fn write_json<T: Serialize>(out: &mut dyn Write, meta: &Meta, rows: &[T]) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct Doc<'a, T> {
        meta: &'a Meta,
        rows: &'a [T],
    }
    serde_json::to_writer_pretty(&mut *out, &Doc { meta, rows }).map_err(|e| CliError::Io(e.into()))?;
    writeln!(out)?;
    Ok(())
}

fn write_table<T: Serialize>(
    out: &mut dyn Write,
    format: OutputFormat,
    meta: &Meta,
    rows: &[T],
    header: &[&str],
) -> Result<(), CliError> {
    match format {
        OutputFormat::Csv => write_csv(out, meta, rows, header),
        OutputFormat::Json => write_json(out, meta, rows),
    }
}

pub fn write_dump(out: &mut dyn Write, format: OutputFormat, dump: &SequenceDump) -> Result<(), CliError> {
    write_table(out, format, &dump.meta, &dump.rows, &DUMP_COLUMNS)
}

// ---------------------------------------------------------------------------
// reading

/// Parses a CSV or JSON sequence dump; JSON is recognized by a leading `{`.
pub fn read_dump(text: &str) -> Result<SequenceDump, CliError> {
    let dump = if text.trim_start().starts_with('{') {
        serde_json::from_str::<SequenceDump>(text).map_err(|e| CliError::Parse {
            line: e.line() as u64,
            message: e.to_string(),
        })?
    } else {
        read_csv_dump(text)?
    };
    validate_rows(&dump.rows, &dump.line_numbers(text))?;
    if dump.rows.is_empty() {
        return Err(config("the dump has no rows"));
    }
    Ok(dump)
}

impl SequenceDump {
    /// Source line of each row, for error messages. JSON dumps report the
    /// row index instead.
    fn line_numbers(&self, text: &str) -> Vec<u64> {
        if text.trim_start().starts_with('{') {
            return (1..=self.rows.len() as u64).collect();
        }
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty())
            .skip(1)
            .map(|(i, _)| i as u64 + 1)
            .collect()
    }
}

fn read_csv_dump(text: &str) -> Result<SequenceDump, CliError> {
    let mut meta = None;
    for (i, line) in text.lines().enumerate() {
        if let Some(json) = line.strip_prefix("# meta: ") {
            meta = Some(serde_json::from_str::<Meta>(json).map_err(|e| CliError::Parse {
                line: i as u64 + 1,
                message: format!("metadata: {e}"),
            })?);
        }
    }
    let meta = meta.unwrap_or_else(|| Meta::new("unknown", &serde_json::Value::Null));
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header_line = text.lines().position(|l| !l.starts_with('#')).unwrap_or(0) as u64 + 1;
    let header = rdr.headers().map_err(|e| csv_parse(e, header_line))?.clone();
    if header.iter().collect::<Vec<_>>() != DUMP_COLUMNS {
        return Err(CliError::Parse {
            line: header_line,
            message: format!("expected header `{}`", DUMP_COLUMNS.join(",")),
        });
    }
    let lines = (SequenceDump {
        meta: meta.clone(),
        rows: Vec::new(),
    })
    .line_numbers(text);
    let mut rows = Vec::new();
    for (i, rec) in rdr.deserialize::<DumpRow>().enumerate() {
        let line = lines.get(i).copied().unwrap_or(header_line + i as u64 + 1);
        rows.push(rec.map_err(|e| csv_parse(e, line))?);
    }
    Ok(SequenceDump { meta, rows })
}

fn csv_parse(e: csv::Error, line: u64) -> CliError {
    CliError::Parse {
        line,
        message: e.to_string(),
    }
}

fn validate_rows(rows: &[DumpRow], lines: &[u64]) -> Result<(), CliError> {
    for (i, r) in rows.iter().enumerate() {
        let line = lines.get(i).copied().unwrap_or(i as u64 + 1);
        let fail = |message: String| CliError::Parse { line, message };
        if r.step != i + 1 {
            return Err(fail(format!("expected step {}, found {}", i + 1, r.step)));
        }
        if !(0.0..=1.0).contains(&r.float_value) {
            return Err(fail(format!("value {} outside [0, 1]", r.float_value)));
        }
        if r.raw_denominator == Some(0) || r.raw_numerator.is_some() != r.raw_denominator.is_some() {
            return Err(fail("malformed raw fraction".into()));
        }
        if let Some(text) = &r.reduced {
            let q: Rational = text.parse().map_err(|e| fail(format!("reduced value `{text}`: {e}")))?;
            if !q.in_unit_interval() {
                return Err(fail(format!("reduced value {q} outside [0, 1]")));
            }
        }
    }
    Ok(())
}

/// Values of a dump on the requested backend; exact values need `reduced`.
pub fn dump_values(dump: &SequenceDump, backend: Backend) -> Result<Values, CliError> {
    Ok(match backend {
        Backend::Float => Values::Float(dump.rows.iter().map(|r| r.float_value).collect()),
        Backend::Rational => Values::Exact(
            dump.rows
                .iter()
                .map(|r| {
                    r.reduced
                        .as_deref()
                        .ok_or_else(|| config(format!("step {} has no exact value; use --backend float", r.step)))?
                        .parse::<Rational>()
                        .map_err(|e| config(e.to_string()))
                })
                .collect::<Result<_, _>>()?,
        ),
    })
}

// ---------------------------------------------------------------------------
// metrics

/// A number in an output table: exact text or a float.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Num {
    Exact(String),
    Float(f64),
}

impl Num {
    fn of<S: Scalar>(x: &S) -> Self {
        match S::BACKEND {
            Backend::Rational => Num::Exact(x.to_string()),
            Backend::Float => Num::Float(x.to_f64()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub n: usize,
    pub w2_squared: Num,
    pub l2_disc_squared: Num,
    pub star_disc: Num,
    #[serde(rename = "max_abs_H")]
    pub max_abs_h: Num,
    pub star_over_log: Option<f64>,
}

const REPORT_COLUMNS: [&str; 6] = ["n", "w2_squared", "l2_disc_squared", "star_disc", "max_abs_H", "star_over_log"];

fn scaled_star<S: Scalar>(star: S, n: usize, scale: StarScale) -> S {
    match scale {
        StarScale::Count => star,
        StarScale::Normalized => star / S::from_int(n as i64),
    }
}

fn report_rows_for<S: Scalar>(values: &[S], every: usize, scale: StarScale) -> Result<Vec<ReportRow>, CliError> {
    Ok(report_series(values, every)?
        .into_iter()
        .map(|r| {
            let star = scaled_star(r.star_disc.clone(), r.n, scale);
            ReportRow {
                n: r.n,
                w2_squared: Num::of(&r.w2_squared),
                l2_disc_squared: Num::of(&r.l2_disc_squared),
                max_abs_h: Num::of(&r.max_abs_h),
                star_over_log: star_over_log(star.to_f64(), r.n),
                star_disc: Num::of(&star),
            }
        })
        .collect())
}

/// Metric rows for every `every`-th prefix (and the full sequence).
pub fn metrics_rows(values: &Values, every: usize, scale: StarScale) -> Result<Vec<ReportRow>, CliError> {
    if values.is_empty() {
        return Err(config("no points to report on"));
    }
    match values {
        Values::Exact(v) => report_rows_for(v, every, scale),
        Values::Float(v) => report_rows_for(v, every, scale),
    }
}

#[derive(Debug, Clone, Serialize)]
struct MetricsMeta<'a> {
    source: &'a serde_json::Value,
    backend: Backend,
    every: usize,
    star_scale: StarScale,
}

// ---------------------------------------------------------------------------
// compare

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub sequence: String,
    pub n: usize,
    pub star_disc: Num,
    pub star_over_log: Option<f64>,
}

const COMPARE_COLUMNS: [&str; 4] = ["sequence", "n", "star_disc", "star_over_log"];

fn labels(cfgs: &[RunConfig]) -> Vec<String> {
    cfgs.iter()
        .enumerate()
        .map(|(i, c)| {
            let id = c.sequence.id();
            let repeats = cfgs.iter().filter(|d| d.sequence == c.sequence).count() > 1;
            if repeats {
                format!("{id}-{}", i + 1)
            } else {
                id.to_string()
            }
        })
        .collect()
}

fn star_rows<S: Scalar>(label: &str, values: &[S], every: usize, scale: StarScale) -> Result<Vec<CompareRow>, CliError> {
    let every = every.max(1);
    let len = values.len();
    Ok(star_series(values)?
        .into_iter()
        .enumerate()
        .filter(|(i, _)| (i + 1) % every == 0 || i + 1 == len)
        .map(|(i, s)| {
            let star = scaled_star(s, i + 1, scale);
            CompareRow {
                sequence: label.to_string(),
                n: i + 1,
                star_over_log: star_over_log(star.to_f64(), i + 1),
                star_disc: Num::of(&star),
            }
        })
        .collect())
}

/// Star-discrepancy series of several sequences, in long format.
pub fn compare(cfgs: &[RunConfig], count: usize, every: usize, scale: StarScale) -> Result<Vec<CompareRow>, CliError> {
    if cfgs.len() < 2 {
        return Err(config("compare needs at least two sequences"));
    }
    if let Some(c) = cfgs.iter().find(|c| c.count != count) {
        return Err(config(format!("{} has count {}, expected {count}", c.sequence.id(), c.count)));
    }
    let mut rows = Vec::new();
    for (cfg, label) in cfgs.iter().zip(labels(cfgs)) {
        let (_, values) = generate(cfg)?;
        rows.extend(match &values {
            Values::Exact(v) => star_rows(&label, v, every, scale)?,
            Values::Float(v) => star_rows(&label, v, every, scale)?,
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// argument parsing

const SEED_HELP: &str = "Comma-separated seeds: j/q, a decimal (taken exactly), or one of \
half = 1/2, inv_pi = 0.3183098861837907, inv_e = 0.36787944117144233, \
inv_sqrt2 = 0.7071067811865476 (nearest f64 values)";

#[derive(Debug, Parser)]
#[command(name = "kritzinger", version, about = "Greedy Wasserstein-minimizing sequences on [0, 1]")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a sequence dump.
    Generate(GenerateArgs),
    /// Report W2, L2 and star discrepancy and max |H_n| along a sequence.
    Metrics(MetricsArgs),
    /// Star discrepancy series of several sequences side by side.
    Compare(CompareArgs),
    /// Run a verification suite; exits 1 if any check fails.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SharedArgs {
    #[arg(long, value_delimiter = ',', help = SEED_HELP)]
    pub seeds: Vec<String>,
    #[arg(long, value_enum, default_value_t = Backend::Float)]
    pub backend: Backend,
    #[arg(long, value_enum, default_value_t = TieRule::Smallest)]
    pub tie_rule: TieRule,
    /// Absolute tie tolerance for the float backend.
    #[arg(long, default_value_t = DEFAULT_TIE_TOLERANCE)]
    pub tolerance: f64,
    /// Rotation number of the Kronecker sequence.
    #[arg(long, default_value_t = GOLDEN_RATIO)]
    pub alpha: f64,
    /// Seed of the uniform stream.
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
    /// Generator of the uniform stream: chacha8, chacha12 or chacha20.
    #[arg(long, default_value = "chacha8")]
    pub generator: String,
}

impl SharedArgs {
    fn config(&self, sequence: SequenceKind, count: usize, seeds: Vec<String>) -> RunConfig {
        RunConfig {
            sequence,
            seeds,
            count,
            backend: self.backend,
            tie_rule: self.tie_rule,
            tolerance: self.tolerance,
            alpha: self.alpha,
            rng_seed: self.rng_seed,
            generator: self.generator.clone(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum, default_value_t = SequenceKind::Kritzinger)]
    pub sequence: SequenceKind,
    /// Total number of points, seeds included.
    #[arg(long)]
    pub count: usize,
    #[command(flatten)]
    pub shared: SharedArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct MetricsArgs {
    /// Sequence dump to read (`-` for standard input). Without it the
    /// sequence is generated from the other flags.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SequenceKind::Kritzinger)]
    pub sequence: SequenceKind,
    #[arg(long, required_unless_present = "input")]
    pub count: Option<usize>,
    /// Report every k-th prefix; the full sequence is always included.
    #[arg(long, default_value_t = 1)]
    pub every: usize,
    #[arg(long, value_enum, default_value_t = StarScale::Count)]
    pub star_scale: StarScale,
    #[command(flatten)]
    pub shared: SharedArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// Sequences to compare; kritzinger uses --seeds (default half).
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [SequenceKind::Kritzinger, SequenceKind::Vdc, SequenceKind::Kronecker])]
    pub sequence: Vec<SequenceKind>,
    #[arg(long, default_value_t = 5000)]
    pub count: usize,
    #[arg(long, default_value_t = 1)]
    pub every: usize,
    #[arg(long, value_enum, default_value_t = StarScale::Count)]
    pub star_scale: StarScale,
    #[command(flatten)]
    pub shared: SharedArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    /// Steps, trials or horizon, depending on the suite.
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
    #[arg(long, value_enum, default_value_t = TieRule::Smallest)]
    pub tie_rule: TieRule,
    #[arg(long, default_value_t = DEFAULT_TIE_TOLERANCE)]
    pub tolerance: f64,
    /// Grid cells for argmin and maximization oracles.
    #[arg(long, default_value_t = ARGMIN_RESOLUTION)]
    pub grid_resolution: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// dispatch

/// Outcome of a successful command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    VerificationFailed,
}

fn with_output(out: &Option<PathBuf>, stdout: &mut dyn Write, body: impl FnOnce(&mut dyn Write) -> Result<(), CliError>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let mut buf = Vec::new();
            body(&mut buf)?;
            fs::write(path, buf)?;
            Ok(())
        }
        None => body(stdout),
    }
}

fn read_input(path: &PathBuf) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        Ok(fs::read_to_string(path)?)
    }
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Generate(a) => {
            let cfg = a.shared.config(a.sequence, a.count, a.shared.seeds.clone());
            let (dump, _) = generate(&cfg)?;
            with_output(&a.output.out, stdout, |w| write_dump(w, a.output.format, &dump))?;
        }
        Command::Metrics(a) => {
            let (source, values) = match &a.input {
                Some(path) => {
                    let dump = read_dump(&read_input(path)?)?;
                    let values = dump_values(&dump, a.shared.backend)?;
                    (serde_json::to_value(&dump.meta).expect("meta serializes"), values)
                }
                None => {
                    let count = a.count.ok_or_else(|| config("--count or --input is required"))?;
                    let cfg = a.shared.config(a.sequence, count, a.shared.seeds.clone());
                    let (_, values) = generate(&cfg)?;
                    (serde_json::to_value(&cfg).expect("config serializes"), values)
                }
            };
            let rows = metrics_rows(&values, a.every, a.star_scale)?;
            let meta = Meta::new(
                "metrics",
                &MetricsMeta {
                    source: &source,
                    backend: a.shared.backend,
                    every: a.every,
                    star_scale: a.star_scale,
                },
            );
            with_output(&a.output.out, stdout, |w| write_table(w, a.output.format, &meta, &rows, &REPORT_COLUMNS))?;
        }
        Command::Compare(a) => {
            let cfgs: Vec<RunConfig> = a
                .sequence
                .iter()
                .map(|s| {
                    let seeds = match s {
                        SequenceKind::Kritzinger if a.shared.seeds.is_empty() => vec!["half".to_string()],
                        SequenceKind::Kritzinger => a.shared.seeds.clone(),
                        _ => Vec::new(),
                    };
                    a.shared.config(*s, a.count, seeds)
                })
                .collect();
            let rows = compare(&cfgs, a.count, a.every, a.star_scale)?;
            #[derive(Serialize)]
            struct CompareMeta<'a> {
                configs: &'a [RunConfig],
                count: usize,
                every: usize,
                star_scale: StarScale,
            }
            let meta = Meta::new(
                "compare",
                &CompareMeta {
                    configs: &cfgs,
                    count: a.count,
                    every: a.every,
                    star_scale: a.star_scale,
                },
            );
            with_output(&a.output.out, stdout, |w| write_table(w, a.output.format, &meta, &rows, &COMPARE_COLUMNS))?;
        }
        Command::Verify(a) => {
            if !(a.tolerance >= 0.0 && a.tolerance.is_finite()) {
                return Err(config(format!("tolerance must be finite and nonnegative, got {}", a.tolerance)));
            }
            let opts = VerifyOptions {
                budget: a.budget,
                rng_seed: a.rng_seed,
                greedy: GreedyOptions {
                    tie_rule: a.tie_rule,
                    tolerance: a.tolerance,
                },
                grid_resolution: a.grid_resolution,
            };
            let report = run_suite(a.suite, &opts)?;
            with_output(&a.out, stdout, |w| match a.format {
                OutputFormat::Json => {
                    serde_json::to_writer_pretty(&mut *w, &report).map_err(|e| CliError::Io(e.into()))?;
                    writeln!(w)?;
                    Ok(())
                }
                OutputFormat::Csv => {
                    let meta = Meta::new("verify", &serde_json::json!({"suite": report.suite, "budget": report.budget, "rng_seed": report.rng_seed, "passed": report.passed}));
                    write_csv(w, &meta, &report.checks, &["name", "passed", "margin", "detail"])
                }
            })?;
            if !report.passed {
                return Ok(Outcome::VerificationFailed);
            }
        }
    }
    Ok(Outcome::Pass)
}

/// Parses the process arguments, runs, and maps the result to an exit code:
/// 0 pass, 1 verification failure, 2 configuration or parse error.
pub fn main_entry() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    match run(cli, &mut lock) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (Result<Outcome, CliError>, String) {
        let cli = Cli::try_parse_from(std::iter::once("kritzinger").chain(args.iter().copied())).unwrap();
        let mut buf = Vec::new();
        let r = run(cli, &mut buf);
        (r, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn seed_parsing() {
        assert_eq!(parse_seed("inv_pi").unwrap(), SeedValue::Irrational(std::f64::consts::FRAC_1_PI));
        assert_eq!(parse_seed("half").unwrap(), SeedValue::Exact("1/2".parse().unwrap()));
        assert_eq!(parse_seed("3/6").unwrap(), SeedValue::Exact("1/2".parse().unwrap()));
        assert_eq!(parse_seed("0.1").unwrap(), SeedValue::Exact("1/10".parse().unwrap()));
        assert!(parse_seed("pi").is_err());
        assert!(parse_seed("1/0").is_err());
    }

    #[test]
    fn rational_backend_rejections() {
        let bad = RunConfig::new(SequenceKind::Kritzinger, 5)
            .with_seeds(&["inv_e"])
            .with_backend(Backend::Rational);
        assert!(matches!(generate(&bad), Err(CliError::Config(_))));
        let bad = RunConfig::new(SequenceKind::Kronecker, 5).with_backend(Backend::Rational);
        assert!(matches!(generate(&bad), Err(CliError::Config(_))));
        let bad = RunConfig::new(SequenceKind::Uniform, 5).with_backend(Backend::Rational);
        assert!(matches!(generate(&bad), Err(CliError::Config(_))));
        assert!(generate(&RunConfig::new(SequenceKind::Kritzinger, 0)).is_err());
        assert!(generate(&RunConfig::new(SequenceKind::Kritzinger, 1).with_seeds(&["0.1", "0.2"])).is_err());
        assert!(generate(&RunConfig::new(SequenceKind::Kritzinger, 3).with_seeds(&["1.5"])).is_err());
    }

    #[test]
    fn generate_examples() {
        let cfg = RunConfig::new(SequenceKind::Kritzinger, 9).with_seeds(&["inv_pi", "inv_e", "inv_sqrt2"]);
        let (dump, _) = generate(&cfg).unwrap();
        let raw: Vec<String> = dump.rows[3..]
            .iter()
            .map(|r| format!("{}/{}", r.raw_numerator.unwrap(), r.raw_denominator.unwrap()))
            .collect();
        assert_eq!(raw, ["7/8", "1/10", "7/12", "7/14", "13/16", "3/18"]);
        assert_eq!(dump.rows[6].reduced.as_deref(), Some("1/2"));
        assert!(dump.rows[0].reduced.is_none());

        let (dump, _) = generate(&RunConfig::new(SequenceKind::Vdc, 3)).unwrap();
        let red: Vec<_> = dump.rows.iter().map(|r| r.reduced.clone().unwrap()).collect();
        assert_eq!(red, ["1/2", "1/4", "3/4"]);

        let (dump, values) = generate(&RunConfig::new(SequenceKind::Kritzinger, 1).with_backend(Backend::Rational)).unwrap();
        assert_eq!(dump.rows[0].reduced.as_deref(), Some("1/2"));
        assert_eq!(values, Values::Exact(vec!["1/2".parse().unwrap()]));
    }

    #[test]
    fn dump_round_trip() {
        let cfg = RunConfig::new(SequenceKind::Kritzinger, 12).with_seeds(&["1/3", "inv_e"]);
        let (dump, _) = generate(&cfg).unwrap();
        for format in [OutputFormat::Csv, OutputFormat::Json] {
            let mut buf = Vec::new();
            write_dump(&mut buf, format, &dump).unwrap();
            let back = read_dump(std::str::from_utf8(&buf).unwrap()).unwrap();
            assert_eq!(back, dump, "{format:?}");
        }
    }

    #[test]
    fn malformed_dumps_name_the_line() {
        let (dump, _) = generate(&RunConfig::new(SequenceKind::Vdc, 4)).unwrap();
        let mut buf = Vec::new();
        write_dump(&mut buf, OutputFormat::Csv, &dump).unwrap();
        let text = String::from_utf8(buf).unwrap();
        // line 1 meta, line 2 header, rows on lines 3..=6
        assert!(text.contains("\n2,1,4,1/4,0.25\n"));
        let broken = text.replace("2,1,4,1/4,0.25", "2,1,4,1/4,oops");
        match read_dump(&broken) {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        let broken = text.replace("3,3,4,3/4,0.75", "3,3,4,3/4,1.25");
        assert!(matches!(read_dump(&broken), Err(CliError::Parse { line: 5, .. })));
        let broken = text.replace("step,", "stop,");
        assert!(matches!(read_dump(&broken), Err(CliError::Parse { line: 2, .. })));
        let header_only: String = text.lines().take(2).map(|l| format!("{l}\n")).collect();
        assert!(read_dump(&header_only).is_err());
        assert!(read_dump("").is_err());
    }

    #[test]
    fn metrics_single_point() {
        let (r, out) = run_args(&["metrics", "--count", "1", "--backend", "rational"]);
        assert_eq!(r.unwrap(), Outcome::Pass);
        let last = out.lines().last().unwrap();
        assert_eq!(last, "1,1/12,1/12,1/2,1/8,");
    }

    #[test]
    fn compare_requires_two_series() {
        let (r, _) = run_args(&["compare", "--sequence", "vdc", "--count", "10"]);
        assert!(matches!(r, Err(CliError::Config(_))));
        let cfg = RunConfig::new(SequenceKind::Vdc, 10);
        let other = RunConfig::new(SequenceKind::Kronecker, 11);
        assert!(compare(&[cfg, other], 10, 1, StarScale::Count).is_err());
    }

    #[test]
    fn compare_duplicates_are_identical() {
        let (r, out) = run_args(&["compare", "--sequence", "kritzinger,kritzinger", "--count", "50"]);
        assert_eq!(r.unwrap(), Outcome::Pass);
        let a: Vec<&str> = out.lines().filter_map(|l| l.strip_prefix("kritzinger-1,")).collect();
        let b: Vec<&str> = out.lines().filter_map(|l| l.strip_prefix("kritzinger-2,")).collect();
        assert_eq!(a.len(), 50);
        assert_eq!(a, b);
    }
}
