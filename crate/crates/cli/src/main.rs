//! `shortcycles`: exact counts, estimates and comparison grids for permutations
//! with bounded cycle lengths.
//!
//! Exit status: 0 on success, 1 on a numerical failure (grid rows are still
//! written), 2 on a usage or range error.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use shortcycles::dickman::{rho, rho_alladi, solve_xi};
use shortcycles::exactcount::{exact_count, harmonic, nu_log, DEFAULT_BIGINT_MAX_N};
use shortcycles::harness::{self, best_estimate, compare_cell, format_real};
use shortcycles::saddle::{solve_saddle, theorem2_estimate_with_tol, DEFAULT_TOL};
use shortcycles::series::{build_coeff_table, default_n_max};
use shortcycles::{Error, ExactMode, GridSpec, RRule};

#[derive(Parser)]
#[command(
    name = "shortcycles",
    version,
    about = "Permutations whose cycles are all short"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact n!·ν(n, r) and ln ν(n, r)
    Exact {
        #[command(flatten)]
        cell: Cell,
        #[arg(long, value_enum, default_value_t = ModeArg::Bigint)]
        exact_mode: ModeArg,
        #[command(flatten)]
        out: Output,
    },
    /// Saddle point of Σ x^j = n and the saddle-point estimate
    Saddle {
        #[command(flatten)]
        cell: Cell,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Dickman function, ξ(u) and the Alladi approximation at u
    Dickman {
        #[arg(long)]
        u: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Expansion coefficients g, b, h, Λ, d for one r
    Coeffs {
        #[arg(long)]
        r: u64,
        /// Table depth; defaults to 4r
        #[arg(long)]
        n_max: Option<u64>,
        #[command(flatten)]
        out: Output,
    },
    /// Every applicable estimate of ln P(ℓ_r(Z) = n) and the regime's choice
    Estimate {
        #[command(flatten)]
        cell: Cell,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Error table of all estimates against exact values over a grid
    Compare {
        /// Ascending n values, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<u64>,
        /// Explicit r values; r > n is skipped. Defaults to regime anchors.
        #[arg(long, value_delimiter = ',', conflicts_with = "r_fractions")]
        r_list: Option<Vec<u64>>,
        /// r = ⌈f·n⌉ for each fraction f in (0, 1]
        #[arg(long, value_delimiter = ',')]
        r_fractions: Option<Vec<f64>>,
        #[arg(long, value_enum, default_value_t = ModeArg::Bigint)]
        exact_mode: ModeArg,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args)]
struct Cell {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    r: u64,
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Write here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Bigint,
    Float,
    Off,
}

impl From<ModeArg> for ExactMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Bigint => ExactMode::Bigint,
            ModeArg::Float => ExactMode::Float,
            ModeArg::Off => ExactMode::Off,
        }
    }
}

enum Value {
    Int(u64),
    Real(f64),
    Text(String),
    Missing,
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        if v.is_finite() {
            Value::Real(v)
        } else {
            Value::Missing
        }
    }
}

impl From<Option<f64>> for Value {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Value::Missing, Value::from)
    }
}

/// A small table rendered as CSV or as a JSON array of objects.
struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn render(&self, format: FormatArg) -> String {
        let mut text = String::new();
        match format {
            FormatArg::Csv => {
                text.push_str(&self.header.join(","));
                text.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row
                        .iter()
                        .map(|v| match v {
                            Value::Int(i) => i.to_string(),
                            Value::Real(x) => format_real(*x),
                            Value::Text(s) => s.clone(),
                            Value::Missing => String::new(),
                        })
                        .collect();
                    text.push_str(&cells.join(","));
                    text.push('\n');
                }
            }
            FormatArg::Json => {
                text.push_str("[\n");
                for (i, row) in self.rows.iter().enumerate() {
                    let fields: Vec<String> = self
                        .header
                        .iter()
                        .zip(row)
                        .map(|(key, v)| {
                            let value = match v {
                                Value::Int(i) => i.to_string(),
                                Value::Real(x) => format_real(*x),
                                Value::Text(s) => format!("\"{s}\""),
                                Value::Missing => "null".to_string(),
                            };
                            format!("\"{key}\": {value}")
                        })
                        .collect();
                    let sep = if i + 1 == self.rows.len() { "" } else { "," };
                    let _ = writeln!(text, "  {{{}}}{sep}", fields.join(", "));
                }
                text.push_str("]\n");
            }
        }
        text
    }
}

fn write_output(text: &str, out: &Output) -> Result<()> {
    match &out.out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?
        }
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_table(table: &Table, out: &Output) -> Result<()> {
    write_output(&table.render(out.format), out)
}

fn run_exact(cell: &Cell, mode: ModeArg) -> Result<Table> {
    let (n, r) = (cell.n, cell.r);
    let mut table = Table::new(&["n", "r", "count", "log_nu", "log_p"]);
    let (count, log_nu) = match mode {
        ModeArg::Bigint if n <= DEFAULT_BIGINT_MAX_N => {
            let c = exact_count(n, r)?;
            (Value::Text(c.count.to_string()), c.nu_ln())
        }
        ModeArg::Bigint | ModeArg::Float => (Value::Missing, nu_log(n, r)?.ln()),
        ModeArg::Off => bail!(Error::Config(
            "exact needs --exact-mode bigint or float".into()
        )),
    };
    table.push(vec![
        n.into(),
        r.into(),
        count,
        log_nu.into(),
        (log_nu - harmonic(r)).into(),
    ]);
    Ok(table)
}

fn run_saddle(cell: &Cell, tol: f64) -> Result<Table> {
    let s = solve_saddle(cell.n, cell.r, tol)?;
    let t2 = theorem2_estimate_with_tol(cell.n, cell.r, tol)?;
    let mut table = Table::new(&[
        "n", "r", "u", "x", "log_x", "residual", "lambda1", "lambda2", "log_q", "t2_log",
    ]);
    table.push(vec![
        s.n.into(),
        s.r.into(),
        s.u.into(),
        s.x.into(),
        s.log_x.into(),
        s.residual.into(),
        s.lambda[0].into(),
        s.lambda2().into(),
        s.log_q.into(),
        t2.ln().into(),
    ]);
    Ok(table)
}

fn run_dickman(u: f64) -> Result<Table> {
    let ctx = rho(u)?;
    let mut table = Table::new(&[
        "u",
        "log_rho",
        "rho",
        "xi",
        "xi_prime",
        "i_xi",
        "log_rho_alladi",
    ]);
    let (xi, xi_prime, alladi) = if u >= 1.0 {
        let v = solve_xi(u, 1e-15)?;
        (
            v.xi.into(),
            v.xi_prime.into(),
            rho_alladi(u)?.log_rho.into(),
        )
    } else {
        (Value::Missing, Value::Missing, Value::Missing)
    };
    table.push(vec![
        u.into(),
        ctx.log_rho.into(),
        ctx.log_rho.exp().into(),
        xi,
        xi_prime,
        ctx.i_xi.into(),
        alladi,
    ]);
    Ok(table)
}

fn run_coeffs(r: u64, n_max: Option<u64>) -> Result<Table> {
    let t = build_coeff_table(r, n_max.unwrap_or_else(|| default_n_max(r)))?;
    let mut table = Table::new(&["N", "g", "b", "h", "lambda", "d"]);
    for big_n in 0..=t.n_max {
        let i = big_n as usize;
        table.push(vec![
            big_n.into(),
            t.g[i].into(),
            (big_n >= 1).then(|| t.b[i]).into(),
            t.h(big_n as i64).into(),
            t.lambda[i].into(),
            t.d.get(i).copied().into(),
        ]);
    }
    Ok(table)
}

fn run_estimate(cell: &Cell, tol: f64) -> Result<Table> {
    let (n, r) = (cell.n, cell.r);
    let best = best_estimate(n, r)?;
    let rec = compare_cell(n, r, ExactMode::Off, tol);
    let mut table = Table::new(&[
        "n", "r", "u", "regime", "best_log", "t1_log", "t2_log", "t3_log", "c1_log",
    ]);
    table.push(vec![
        n.into(),
        r.into(),
        rec.u.into(),
        Value::Text(rec.regime.to_string()),
        best.ln().into(),
        rec.t1_log.into(),
        rec.t2_log.into(),
        rec.t3_log.into(),
        rec.c1_log.into(),
    ]);
    Ok(table)
}

/// Returns whether every cell succeeded.
fn run_compare(spec: GridSpec, out: &Output) -> Result<bool> {
    let records = harness::run_grid(&spec)?;
    let format = match out.format {
        FormatArg::Csv => harness::Format::Csv,
        FormatArg::Json => harness::Format::Json,
    };
    harness::emit(&records, format, out.out.as_deref())?;
    let mut clean = true;
    for rec in &records {
        for failure in &rec.failures {
            clean = false;
            eprintln!("n={} r={}: {failure}", rec.n, rec.r);
        }
    }
    Ok(clean)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Exact {
            cell,
            exact_mode,
            out,
        } => emit_table(&run_exact(&cell, exact_mode)?, &out)?,
        Command::Saddle { cell, tol, out } => emit_table(&run_saddle(&cell, tol)?, &out)?,
        Command::Dickman { u, out } => emit_table(&run_dickman(u)?, &out)?,
        Command::Coeffs { r, n_max, out } => emit_table(&run_coeffs(r, n_max)?, &out)?,
        Command::Estimate { cell, tol, out } => emit_table(&run_estimate(&cell, tol)?, &out)?,
        Command::Compare {
            n_list,
            r_list,
            r_fractions,
            exact_mode,
            tol,
            out,
        } => {
            let rule = match (r_list, r_fractions) {
                (Some(list), _) => RRule::Explicit(list),
                (None, Some(fracs)) => RRule::Fractions(fracs),
                (None, None) => RRule::Anchors,
            };
            let mut spec = GridSpec::new(n_list, rule, exact_mode.into());
            spec.tol = tol;
            return run_compare(spec, &out).context("comparison grid");
        }
    }
    Ok(true)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Range { .. } | Error::Config(_) | Error::Parse(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
