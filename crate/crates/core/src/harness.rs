//! Regime selection, grid comparison of the estimates against exact values,
//! and CSV/JSON output.
//!
//! Every estimate column is `ln P(ℓ_r(Z) = n)`, the Poisson-model probability
//! `ν(n, r)·e^{−H_r}`. The small-`r` formula produces `ln(n!ν)` and is shifted
//! by `ln n!` and `H_r` to match.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::dickman::{corollary1_estimate, theorem3_estimate, RHO_MAX_U};
use crate::error::{Error, Result};
use crate::exactcount::{exact_count, harmonic, nu_log, DEFAULT_BIGINT_MAX_N, DEFAULT_FLOAT_MAX_N};
use crate::logvalue::{relative_error_ln, LogValue};
use crate::numeric::gamma::ln_factorial;
use crate::saddle::{theorem2_estimate_with_tol, DEFAULT_TOL};
use crate::series::theorem1_estimate;

pub const CSV_HEADER: [&str; 13] = [
    "n",
    "r",
    "u",
    "regime",
    "exact_log",
    "t1_log",
    "t2_log",
    "t3_log",
    "c1_log",
    "rel_err_t1",
    "rel_err_t2",
    "rel_err_t3",
    "rel_err_c1",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    SmallR,
    Saddle,
    Dickman,
}

impl Regime {
    /// `small_r` iff `r ≤ ⌈ln n⌉` (checked first), `dickman` iff `r ≥ √(n ln n)`,
    /// `saddle` otherwise.
    pub fn classify(n: u64, r: u64) -> Regime {
        let ln_n = (n as f64).ln();
        if r as f64 <= ln_n.ceil() {
            Regime::SmallR
        } else if r as f64 >= (n as f64 * ln_n).sqrt() {
            Regime::Dickman
        } else {
            Regime::Saddle
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::SmallR => "small_r",
            Regime::Saddle => "saddle",
            Regime::Dickman => "dickman",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "small_r" => Ok(Regime::SmallR),
            "saddle" => Ok(Regime::Saddle),
            "dickman" => Ok(Regime::Dickman),
            other => Err(Error::Parse(format!("unknown regime {other:?}"))),
        }
    }
}

/// Which exact route fills `exact_log`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactMode {
    /// Big-integer counts up to `n = 2000`, float recurrence above that.
    Bigint,
    /// Float recurrence up to `n = 10^6`.
    Float,
    Off,
}

impl FromStr for ExactMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bigint" => Ok(ExactMode::Bigint),
            "float" => Ok(ExactMode::Float),
            "off" => Ok(ExactMode::Off),
            other => Err(Error::Parse(format!("unknown exact mode {other:?}"))),
        }
    }
}

/// How the `r` values of each row are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum RRule {
    /// Fixed values; those above `n` are skipped.
    Explicit(Vec<u64>),
    /// `⌈f·n⌉` for each fraction `f ∈ (0, 1]`.
    Fractions(Vec<f64>),
    /// `1, 2, 3, ⌈ln n⌉, ⌈√n⌉, ⌈√(n ln n)⌉, ⌈n/2⌉, n`: every regime and both
    /// regime boundaries.
    Anchors,
}

impl RRule {
    pub fn values(&self, n: u64) -> Vec<u64> {
        let nf = n as f64;
        let mut out: Vec<u64> = match self {
            RRule::Explicit(list) => list.clone(),
            RRule::Fractions(fracs) => fracs.iter().map(|f| (f * nf).ceil() as u64).collect(),
            RRule::Anchors => vec![
                1,
                2,
                3,
                nf.ln().ceil() as u64,
                nf.sqrt().ceil() as u64,
                (nf * nf.ln()).sqrt().ceil() as u64,
                n.div_ceil(2),
                n,
            ],
        };
        out.retain(|&r| r >= 1 && r <= n);
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub n_values: Vec<u64>,
    pub r_rule: RRule,
    pub exact_mode: ExactMode,
    /// Saddle-point solver tolerance.
    pub tol: f64,
}

impl GridSpec {
    pub fn new(n_values: Vec<u64>, r_rule: RRule, exact_mode: ExactMode) -> Self {
        GridSpec {
            n_values,
            r_rule,
            exact_mode,
            tol: DEFAULT_TOL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() {
            return Err(Error::Config("grid needs at least one n".into()));
        }
        if self.n_values.contains(&0) {
            return Err(Error::Config("n must be positive".into()));
        }
        if !self.n_values.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config("n values must be strictly ascending".into()));
        }
        if let RRule::Fractions(f) = &self.r_rule {
            if f.iter().any(|x| !(*x > 0.0 && *x <= 1.0)) {
                return Err(Error::Config("r fractions must lie in (0, 1]".into()));
            }
        }
        if !(1e-15..=1e-6).contains(&self.tol) {
            return Err(Error::Config(format!(
                "tol must lie in [1e-15, 1e-6], got {}",
                self.tol
            )));
        }
        Ok(())
    }

    pub fn cells(&self) -> Vec<(u64, u64)> {
        self.n_values
            .iter()
            .flat_map(|&n| self.r_rule.values(n).into_iter().map(move |r| (n, r)))
            .collect()
    }
}

/// One grid cell. `failures` is not serialized.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRecord {
    pub n: u64,
    pub r: u64,
    pub u: f64,
    pub regime: Regime,
    pub exact_log: Option<f64>,
    pub t1_log: Option<f64>,
    pub t2_log: Option<f64>,
    pub t3_log: Option<f64>,
    pub c1_log: Option<f64>,
    pub rel_err_t1: Option<f64>,
    pub rel_err_t2: Option<f64>,
    pub rel_err_t3: Option<f64>,
    pub rel_err_c1: Option<f64>,
    pub failures: Vec<String>,
}

impl ComparisonRecord {
    fn reals(&self) -> [Option<f64>; 9] {
        [
            self.exact_log,
            self.t1_log,
            self.t2_log,
            self.t3_log,
            self.c1_log,
            self.rel_err_t1,
            self.rel_err_t2,
            self.rel_err_t3,
            self.rel_err_c1,
        ]
    }
}

/// `ln P(ℓ_r(Z) = n)` from the small-`r` expansion.
fn small_r_as_poisson(n: u64, r: u64) -> Result<f64> {
    let log_count = theorem1_estimate(n, r)?.value.ln();
    Ok(log_count - ln_factorial(n) - harmonic(r))
}

fn small_r_applies(n: u64, r: u64) -> bool {
    r >= 2 && r <= 2u64.max((n as f64).ln().ceil() as u64)
}

/// The estimate proven for the regime of `(n, r)`.
///
/// `r = 1` falls in the small-`r` regime but outside the expansion's range; the
/// saddle-point form, valid for every `r`, is used there, and also for the
/// Dickman regime beyond the tabulated range of ρ.
pub fn best_estimate(n: u64, r: u64) -> Result<LogValue> {
    if r == 0 || r > n {
        return Err(Error::range(
            "(n, r)",
            format!("need 1 <= r <= n, got n={n}, r={r}"),
        ));
    }
    match Regime::classify(n, r) {
        Regime::SmallR if r >= 2 => Ok(LogValue::from_ln(small_r_as_poisson(n, r)?)),
        Regime::Dickman if n as f64 / r as f64 <= RHO_MAX_U => theorem3_estimate(n, r),
        _ => theorem2_estimate_with_tol(n, r, DEFAULT_TOL),
    }
}

fn exact_poisson_log(n: u64, r: u64, mode: ExactMode) -> Option<Result<f64>> {
    let shift = harmonic(r);
    match mode {
        ExactMode::Bigint if n <= DEFAULT_BIGINT_MAX_N => {
            Some(exact_count(n, r).map(|c| c.nu_ln() - shift))
        }
        ExactMode::Bigint | ExactMode::Float if n <= DEFAULT_FLOAT_MAX_N => {
            Some(nu_log(n, r).map(|v| v.ln() - shift))
        }
        _ => None,
    }
}

/// Fills one cell; failures are recorded, never propagated.
pub fn compare_cell(n: u64, r: u64, exact_mode: ExactMode, tol: f64) -> ComparisonRecord {
    let mut failures = Vec::new();
    let mut keep = |label: &str, value: Result<f64>| match value {
        Ok(v) if v.is_finite() => Some(v),
        Ok(v) => {
            failures.push(format!("{label}: non-finite value {v}"));
            None
        }
        Err(e) => {
            failures.push(format!("{label}: {e}"));
            None
        }
    };
    let u = n as f64 / r as f64;
    let exact_log = exact_poisson_log(n, r, exact_mode).and_then(|v| keep("exact", v));
    let t1_log = small_r_applies(n, r)
        .then(|| keep("t1", small_r_as_poisson(n, r)))
        .flatten();
    let t2_log = keep("t2", theorem2_estimate_with_tol(n, r, tol).map(|v| v.ln()));
    let t3_log = (u <= RHO_MAX_U)
        .then(|| keep("t3", theorem3_estimate(n, r).map(|v| v.ln())))
        .flatten();
    let c1_log = (r >= 2 && n > r)
        .then(|| keep("c1", corollary1_estimate(n, r).map(|v| v.ln())))
        .flatten();
    let err = |est: Option<f64>| Some(relative_error_ln(est?, exact_log?));
    ComparisonRecord {
        n,
        r,
        u,
        regime: Regime::classify(n, r),
        exact_log,
        t1_log,
        t2_log,
        t3_log,
        c1_log,
        rel_err_t1: err(t1_log),
        rel_err_t2: err(t2_log),
        rel_err_t3: err(t3_log),
        rel_err_c1: err(c1_log),
        failures,
    }
}

/// Evaluates every cell in parallel; rows come back sorted by `n`, then `r`.
pub fn run_grid(spec: &GridSpec) -> Result<Vec<ComparisonRecord>> {
    spec.validate()?;
    let mut records: Vec<ComparisonRecord> = spec
        .cells()
        .into_par_iter()
        .map(|(n, r)| compare_cell(n, r, spec.exact_mode, spec.tol))
        .collect();
    records.sort_by_key(|rec| (rec.n, rec.r));
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Parse(format!("unknown format {other:?}"))),
        }
    }
}

/// 17 significant digits, enough to round-trip any double.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn cell(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => format_real(v),
        _ => String::new(),
    }
}

pub fn write_csv<W: Write>(records: &[ComparisonRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_error)?;
    for rec in records {
        let mut row = vec![
            rec.n.to_string(),
            rec.r.to_string(),
            format_real(rec.u),
            rec.regime.to_string(),
        ];
        row.extend(rec.reals().iter().map(|x| cell(*x)));
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(records: &[ComparisonRecord], mut out: W) -> Result<()> {
    writeln!(out, "[")?;
    for (i, rec) in records.iter().enumerate() {
        let mut fields = vec![
            format!("\"n\": {}", rec.n),
            format!("\"r\": {}", rec.r),
            format!("\"u\": {}", format_real(rec.u)),
            format!("\"regime\": \"{}\"", rec.regime),
        ];
        for (key, value) in CSV_HEADER[4..].iter().zip(rec.reals()) {
            let text = match value {
                Some(v) if v.is_finite() => format_real(v),
                _ => "null".to_string(),
            };
            fields.push(format!("\"{key}\": {text}"));
        }
        let sep = if i + 1 == records.len() { "" } else { "," };
        writeln!(out, "  {{{}}}{sep}", fields.join(", "))?;
    }
    writeln!(out, "]")?;
    Ok(())
}

/// Writes `records` to `path`, or to stdout when `path` is `None`.
pub fn emit(records: &[ComparisonRecord], format: Format, path: Option<&Path>) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Config("nothing to emit".into()));
    }
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    };
    match format {
        Format::Csv => write_csv(records, sink),
        Format::Json => write_json(records, sink),
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn parse_opt(field: &str) -> Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse()
        .map(Some)
        .map_err(|_| Error::Parse(format!("bad real {field:?}")))
}

fn parse_u64(field: &str) -> Result<u64> {
    field
        .parse()
        .map_err(|_| Error::Parse(format!("bad integer {field:?}")))
}

fn record_from_parts(
    n: u64,
    r: u64,
    u: f64,
    regime: Regime,
    reals: [Option<f64>; 9],
) -> ComparisonRecord {
    let [exact_log, t1_log, t2_log, t3_log, c1_log, rel_err_t1, rel_err_t2, rel_err_t3, rel_err_c1] =
        reals;
    ComparisonRecord {
        n,
        r,
        u,
        regime,
        exact_log,
        t1_log,
        t2_log,
        t3_log,
        c1_log,
        rel_err_t1,
        rel_err_t2,
        rel_err_t3,
        rel_err_c1,
        failures: Vec::new(),
    }
}

pub fn parse_csv<R: Read>(input: R) -> Result<Vec<ComparisonRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers().map_err(csv_error)?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(csv_error)?;
        let mut reals = [None; 9];
        for (slot, field) in reals.iter_mut().zip(row.iter().skip(4)) {
            *slot = parse_opt(field)?;
        }
        out.push(record_from_parts(
            parse_u64(&row[0])?,
            parse_u64(&row[1])?,
            parse_opt(&row[2])?.ok_or_else(|| Error::Parse("missing u".into()))?,
            row[3].parse()?,
            reals,
        ));
    }
    Ok(out)
}

pub fn parse_json(text: &str) -> Result<Vec<ComparisonRecord>> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let rows = value
        .as_array()
        .ok_or_else(|| Error::Parse("expected a JSON array".into()))?;
    rows.iter()
        .map(|row| {
            let get = |key: &str| {
                row.get(key)
                    .ok_or_else(|| Error::Parse(format!("missing {key}")))
            };
            let int = |key: &str| {
                get(key)?
                    .as_u64()
                    .ok_or_else(|| Error::Parse(format!("{key} is not an integer")))
            };
            let real = |key: &str| -> Result<Option<f64>> {
                let v = get(key)?;
                if v.is_null() {
                    return Ok(None);
                }
                v.as_f64()
                    .map(Some)
                    .ok_or_else(|| Error::Parse(format!("{key} is not a number")))
            };
            let mut reals = [None; 9];
            for (slot, key) in reals.iter_mut().zip(&CSV_HEADER[4..]) {
                *slot = real(key)?;
            }
            let regime = get("regime")?
                .as_str()
                .ok_or_else(|| Error::Parse("regime is not a string".into()))?
                .parse()?;
            Ok(record_from_parts(
                int("n")?,
                int("r")?,
                real("u")?.ok_or_else(|| Error::Parse("u is null".into()))?,
                regime,
                reals,
            ))
        })
        .collect()
}
