//! `irrmeter` command dispatch. `main.rs` is a thin wrapper around
//! [`run_command`], which returns the exit code together with the rendered
//! report so that tests can drive every command in-process.

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use irrmeter_core::exactmath::{int, is_integer, kappa_n, parse_rational, rat, Regime};
use irrmeter_core::interval::{exact_decimal, format_decimal, DEFAULT_PREC};
use irrmeter_core::measure::{
    self, Conclusion, DeltaMode, HypothesisCheck, MeasureReport, Verdict, MAX_PREC,
};
use irrmeter_core::pade::{pade_general, verify_det_m2, verify_recurrence, verify_weight};
use irrmeter_core::recurrence::{
    evaluate_solution, growth_bound, pade_recurrence, poincare_threshold, ratio_estimate, QuadraticNumber,
};
use irrmeter_core::series::{rd_oracle, HypergeomParams};
use irrmeter_core::simultaneous::{
    binomial_pipeline, mu_from_pairs, verify_matrix_hypotheses, CriterionInput, CriterionMode, PairsMode,
    RowVerdict,
};
use irrmeter_core::{Error, Interval, Rational};

pub const NMAX_CAP: u64 = 2000;
pub const VERIFY_NMAX_CAP: u64 = 200;
pub const CRITERION_NMAX_CAP: u64 = 200;
pub const SWEEP_PAIRS: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Mu,
    Table,
    Verify,
    Asymptotics,
    Criterion,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Mu => "mu",
            Command::Table => "table",
            Command::Verify => "verify",
            Command::Asymptotics => "asymptotics",
            Command::Criterion => "criterion",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    Binomial,
    ShiftedLog,
    ShiftedExp,
    General,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Parser, Clone, Debug)]
#[command(name = "irrmeter", version, about = "Certified irrationality-measure reports from explicit Padé approximants")]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,
    #[arg(long, value_enum)]
    pub preset: Option<PresetArg>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    /// Rational, `a^k/b` forms allowed (e.g. `467^3/5`, `-8^3`).
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    /// Working precision in bits, at least 64.
    #[arg(long, default_value_t = DEFAULT_PREC)]
    pub prec: u32,
    #[arg(long)]
    pub nmax: Option<u64>,
    /// `simple`, `bennett` or `window:n0:n1` (binomial route only).
    #[arg(long = "delta-mode")]
    pub delta_mode: Option<String>,
    /// Defaults to csv for `table`, json otherwise.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Matrix-sequence file for `criterion`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Row conditions for `criterion`: `type1` or `type2`.
    #[arg(long, default_value = "type1")]
    pub mode: String,
}

impl RunConfig {
    pub fn from_args<I, T>(args: I) -> Result<RunConfig, clap::Error>
    where
        I: IntoIterator<Item = T>,
        T: Into<std::ffi::OsString> + Clone,
    {
        RunConfig::try_parse_from(args)
    }

    fn format(&self) -> Format {
        self.format.unwrap_or(if self.command == Command::Table { Format::Csv } else { Format::Json })
    }
}

/// Exit code and rendered streams of one run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Hypothesis(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::Hypothesis(_) => Failure::Hypothesis(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// A finished command: the JSON report, a flat table for csv output, and
/// stderr lines. `code` is 0 or 2.
struct Report {
    json: Value,
    table: Vec<Vec<String>>,
    stderr: Vec<String>,
    code: i32,
}

pub fn run_command(cfg: &RunConfig) -> Outcome {
    let res = check_config(cfg).and_then(|_| match cfg.command {
        Command::Mu => cmd_mu(cfg),
        Command::Table => cmd_table(cfg),
        Command::Verify => cmd_verify(cfg),
        Command::Asymptotics => cmd_asymptotics(cfg),
        Command::Criterion => cmd_criterion(cfg),
    });
    match res {
        Ok(rep) => {
            let stdout = render(&rep, cfg.format());
            let mut stderr = rep.stderr.join("\n");
            if !stderr.is_empty() {
                stderr.push('\n');
            }
            Outcome { code: rep.code, stdout, stderr }
        }
        Err(Failure::Usage(m)) => Outcome { code: 1, stdout: String::new(), stderr: format!("error: {m}\n") },
        Err(Failure::Hypothesis(m)) => Outcome { code: 2, stdout: String::new(), stderr: format!("{m}\n") },
    }
}

fn check_config(cfg: &RunConfig) -> CliResult<()> {
    if cfg.prec < 64 || cfg.prec > MAX_PREC {
        return Err(Failure::Usage(format!("--prec must lie in [64, {MAX_PREC}], got {}", cfg.prec)));
    }
    if let Some(n) = cfg.nmax {
        let cap = match cfg.command {
            Command::Verify => VERIFY_NMAX_CAP,
            Command::Criterion => CRITERION_NMAX_CAP,
            _ => NMAX_CAP,
        };
        if n == 0 || n > cap {
            return Err(Failure::Usage(format!("--nmax must lie in [1, {cap}] for {}", cfg.command.name())));
        }
    }
    if cfg.delta_mode.is_some() && !matches!(cfg.command, Command::Mu | Command::Table) {
        return Err(Failure::Usage("--delta-mode only applies to mu and table".into()));
    }
    Ok(())
}

fn usage(m: impl Into<String>) -> Failure {
    Failure::Usage(m.into())
}

fn parse_opt(name: &str, v: &Option<String>) -> CliResult<Option<Rational>> {
    v.as_deref()
        .map(|s| parse_rational(s).map_err(|e| usage(format!("--{name}: {e}"))))
        .transpose()
}

fn need(name: &str, v: &Option<String>) -> CliResult<Rational> {
    parse_opt(name, v)?.ok_or_else(|| usage(format!("--{name} is required here")))
}

/// The resolved parameter choice of a run.
#[derive(Clone, Debug)]
enum Selection {
    Binomial(Rational),
    ShiftedLog(Rational),
    ShiftedExp(Rational),
    General(HypergeomParams),
}

impl Selection {
    fn params(&self) -> CliResult<HypergeomParams> {
        Ok(match self {
            Selection::Binomial(w) => HypergeomParams::binomial(w.clone())?,
            Selection::ShiftedLog(x) => HypergeomParams::shifted_log(x.clone())?,
            Selection::ShiftedExp(g) => HypergeomParams::shifted_exp(g.clone())?,
            Selection::General(p) => p.clone(),
        })
    }

    fn preset_name(&self) -> &'static str {
        match self {
            Selection::Binomial(_) => "binomial",
            Selection::ShiftedLog(_) => "shifted-log",
            Selection::ShiftedExp(_) => "shifted-exp",
            Selection::General(_) => "general",
        }
    }
}

/// `None` when neither a preset nor any of alpha/gamma/delta was given.
fn selection(cfg: &RunConfig) -> CliResult<Option<Selection>> {
    let stray = |names: &[(&str, &Option<String>)]| -> CliResult<()> {
        for (n, v) in names {
            if v.is_some() {
                return Err(usage(format!("--{n} does not apply to this preset")));
            }
        }
        Ok(())
    };
    let preset = match cfg.preset {
        Some(p) => p,
        None if cfg.alpha.is_some() || cfg.gamma.is_some() || cfg.delta.is_some() => PresetArg::General,
        None if cfg.omega.is_some() => PresetArg::Binomial,
        None if cfg.x.is_some() => PresetArg::ShiftedLog,
        None => return Ok(None),
    };
    let sel = match preset {
        PresetArg::Binomial => {
            stray(&[("alpha", &cfg.alpha), ("gamma", &cfg.gamma), ("delta", &cfg.delta), ("x", &cfg.x)])?;
            Selection::Binomial(need("omega", &cfg.omega)?)
        }
        PresetArg::ShiftedLog => {
            stray(&[("alpha", &cfg.alpha), ("gamma", &cfg.gamma), ("delta", &cfg.delta), ("omega", &cfg.omega)])?;
            Selection::ShiftedLog(need("x", &cfg.x)?)
        }
        PresetArg::ShiftedExp => {
            stray(&[("alpha", &cfg.alpha), ("delta", &cfg.delta), ("omega", &cfg.omega), ("x", &cfg.x)])?;
            Selection::ShiftedExp(need("gamma", &cfg.gamma)?)
        }
        PresetArg::General => {
            stray(&[("omega", &cfg.omega), ("x", &cfg.x)])?;
            let p = HypergeomParams::general(need("alpha", &cfg.alpha)?, need("gamma", &cfg.gamma)?, need("delta", &cfg.delta)?)?;
            Selection::General(p)
        }
    };
    // validate eagerly so that bad presets are usage errors
    sel.params()?;
    Ok(Some(sel))
}

fn inputs_json(cfg: &RunConfig, sel: Option<&Selection>, beta: Option<&Rational>) -> Value {
    let mut m = Map::new();
    if let Some(s) = sel {
        m.insert("preset".into(), json!(s.preset_name()));
        if let Ok(p) = s.params() {
            m.insert("alpha".into(), json!(p.alpha.to_string()));
            m.insert("gamma".into(), json!(p.gamma.to_string()));
            m.insert("delta".into(), json!(p.delta.to_string()));
        }
        match s {
            Selection::Binomial(w) => {
                m.insert("omega".into(), json!(w.to_string()));
            }
            Selection::ShiftedLog(x) => {
                m.insert("x".into(), json!(x.to_string()));
            }
            _ => {}
        }
    }
    if let Some(b) = beta {
        m.insert("beta".into(), json!(b.to_string()));
    }
    m.insert("prec_bits".into(), json!(cfg.prec));
    if let Some(n) = cfg.nmax {
        m.insert("nmax".into(), json!(n));
    }
    if let Some(d) = &cfg.delta_mode {
        m.insert("delta_mode".into(), json!(d));
    }
    Value::Object(m)
}

// ---------------------------------------------------------------------------
// value rendering

/// `{lo, hi, prec_bits}` with `lo` rounded down and `hi` rounded up to the
/// decimal digits implied by the precision.
pub fn interval_json(iv: &Interval) -> Value {
    let d = iv.decimal_digits().max(1);
    json!({ "lo": iv.lo_decimal(d), "hi": iv.hi_decimal(d), "prec_bits": iv.prec })
}

fn opt_interval(iv: &Option<Interval>) -> Value {
    iv.as_ref().map(interval_json).unwrap_or(Value::Null)
}

/// Exact decimal when one exists, otherwise an outward enclosure.
fn rational_json(q: &Rational, prec: u32) -> Value {
    match exact_decimal(q) {
        Some(s) => json!(s),
        None => interval_json(&Interval::point(q, prec)),
    }
}

fn quadratic_json(x: &QuadraticNumber, prec: u32) -> Value {
    json!({ "exact": x.to_string(), "value": interval_json(&x.to_interval(prec)) })
}

fn hypotheses_json(h: &[HypothesisCheck]) -> Value {
    Value::Array(
        h.iter()
            .map(|c| json!({ "name": c.name, "verdict": verdict_name(c.verdict), "detail": c.detail }))
            .collect(),
    )
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Indeterminate => "indeterminate",
    }
}

fn check(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Value {
    json!({ "name": name.into(), "verdict": if ok { "pass" } else { "fail" }, "detail": detail.into() })
}

fn envelope(command: Command, inputs: Value, hypotheses: Value, result: Value, certified: bool, warnings: Vec<String>) -> Value {
    json!({
        "command": command.name(),
        "inputs": inputs,
        "hypotheses": hypotheses,
        "result": result,
        "certified": certified,
        "warnings": warnings,
    })
}

fn render(rep: &Report, fmt: Format) -> String {
    match fmt {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&rep.json).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in &rep.table {
                w.write_record(row).expect("in-memory csv write");
            }
            String::from_utf8(w.into_inner().expect("flush")).expect("utf8 csv")
        }
        Format::Text => {
            let mut out = String::new();
            if let Some((head, rows)) = rep.table.split_first() {
                let widths: Vec<usize> = (0..head.len())
                    .map(|j| rep.table.iter().map(|r| r.get(j).map_or(0, |c| c.len())).max().unwrap_or(0))
                    .collect();
                for r in std::iter::once(head).chain(rows) {
                    let cells: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
                    out.push_str(cells.join("  ").trim_end());
                    out.push('\n');
                }
            }
            out
        }
    }
}

fn short(iv: &Option<Interval>) -> String {
    match iv {
        Some(v) => {
            let d = v.decimal_digits().min(20);
            format!("[{}, {}]", v.lo_decimal(d), v.hi_decimal(d))
        }
        None => "-".into(),
    }
}

// ---------------------------------------------------------------------------
// mu

fn cmd_mu(cfg: &RunConfig) -> CliResult<Report> {
    let sel = selection(cfg)?.ok_or_else(|| usage("mu needs --preset (or --alpha/--gamma/--delta)"))?;
    let beta = need("beta", &cfg.beta)?;
    let mode = cfg.delta_mode.as_deref().map(DeltaMode::parse).transpose()?;
    if mode.is_some() && !matches!(sel, Selection::Binomial(_)) {
        return Err(usage("--delta-mode only applies to the binomial preset"));
    }
    let rep = match &sel {
        Selection::Binomial(w) => measure::mu_binomial(w, &beta, mode.unwrap_or(DeltaMode::Simple), cfg.prec)?,
        Selection::ShiftedLog(x) => measure::mu_log(x, &beta, cfg.prec)?,
        Selection::ShiftedExp(g) => measure::mu_exp(g, &beta)?,
        Selection::General(p) => measure::mu_main(p, &beta, cfg.prec)?,
    };
    let json = envelope(
        Command::Mu,
        inputs_json(cfg, Some(&sel), Some(&beta)),
        hypotheses_json(&rep.hypotheses),
        measure_result(&rep),
        rep.certified,
        rep.warnings.clone(),
    );
    let table = vec![
        vec!["route", "regime", "conclusion", "delta_lo", "delta_hi", "mu_lo", "mu_hi", "certified"]
            .into_iter()
            .map(String::from)
            .collect(),
        {
            let (dl, dh) = ends(&rep.delta);
            let (ml, mh) = ends(&rep.mu);
            vec![
                json_str(&json["result"]["route"]),
                json_str(&json["result"]["regime"]),
                json_str(&json["result"]["conclusion"]),
                dl,
                dh,
                ml,
                mh,
                rep.certified.to_string(),
            ]
        },
    ];
    let (stderr, code) = conclusion_status(&rep);
    Ok(Report { json, table, stderr, code })
}

fn json_str(v: &Value) -> String {
    v.as_str().map(String::from).unwrap_or_else(|| v.to_string())
}

fn ends(iv: &Option<Interval>) -> (String, String) {
    match iv {
        Some(v) => {
            let d = v.decimal_digits().max(1);
            (v.lo_decimal(d), v.hi_decimal(d))
        }
        None => (String::new(), String::new()),
    }
}

fn measure_result(rep: &MeasureReport) -> Value {
    let p = rep.prec;
    json!({
        "route": serde_json::to_value(rep.route).expect("route"),
        "regime": rep.regime.name(),
        "delta_mode": rep.delta_mode,
        "conclusion": serde_json::to_value(rep.conclusion).expect("conclusion"),
        "delta_form": rep.delta_parts.as_ref().map(|d| d.to_string()),
        "rho1": rep.rho1.as_ref().map(|r| quadratic_json(r, p)),
        "rho2": rep.rho2.as_ref().map(|r| quadratic_json(r, p)),
        "delta": opt_interval(&rep.delta),
        "Q": opt_interval(&rep.q),
        "E": opt_interval(&rep.e),
        "mu": opt_interval(&rep.mu),
    })
}

fn conclusion_status(rep: &MeasureReport) -> (Vec<String>, i32) {
    if rep.conclusion != Conclusion::NoConclusion {
        return (Vec::new(), 0);
    }
    let mut lines = Vec::new();
    for h in rep.failures() {
        if h.name == "E > 1" {
            lines.push("E ≤ 1: no conclusion".to_string());
        } else {
            lines.push(format!("hypothesis failed: {} ({})", h.name, h.detail));
        }
    }
    if lines.is_empty() {
        lines.push("no conclusion".to_string());
    }
    (lines, 2)
}

// ---------------------------------------------------------------------------
// table

/// Rows of the cubic-root table: label, beta, printed two-decimal exponent.
pub const CUBIC_ROWS: [(&str, &str, &str); 18] = [
    ("cbrt(3)", "9", "2.74"),
    ("cbrt(6)", "467^3/5", "2.32"),
    ("cbrt(15)", "25", "2.52"),
    ("cbrt(17)", "18^3", "2.20"),
    ("cbrt(19)", "-8^3", "2.28"),
    ("cbrt(20)", "-19^3", "2.20"),
    ("cbrt(26)", "3^3", "2.51"),
    ("cbrt(28)", "-3^3", "2.50"),
    ("cbrt(30)", "-9", "2.71"),
    ("cbrt(37)", "10^3", "2.26"),
    ("cbrt(42)", "49", "2.44"),
    ("cbrt(43)", "-7^3", "2.30"),
    ("cbrt(62)", "32", "2.49"),
    ("cbrt(63)", "4^3", "2.41"),
    ("cbrt(65)", "-4^3", "2.41"),
    ("cbrt(66)", "-32", "2.48"),
    ("cbrt(83)", "-(253)^3/19", "2.69"),
    ("cbrt(91)", "9^3", "2.27"),
];

/// One computed table row.
#[derive(Clone, Debug)]
pub struct TableRow {
    pub label: String,
    pub beta: String,
    pub printed: String,
    pub report: MeasureReport,
    /// Two-decimal truncation of the enclosure, when both ends agree.
    pub truncated: Option<String>,
}

impl TableRow {
    pub fn matches(&self) -> bool {
        self.truncated.as_deref() == Some(self.printed.as_str())
    }
}

/// Two-decimal truncation shared by both ends of `iv`, if any.
pub fn truncate2(iv: &Interval) -> Option<String> {
    let lo = format_decimal(&iv.lo, 2, false);
    let hi = format_decimal(&iv.hi, 2, false);
    (lo == hi).then_some(lo)
}

pub fn table_rows(mode: DeltaMode, prec: u32) -> irrmeter_core::Result<Vec<TableRow>> {
    let omega = rat(1, 3);
    CUBIC_ROWS
        .par_iter()
        .map(|&(label, beta, printed)| {
            let b = parse_rational(beta)?;
            let report = measure::mu_binomial(&omega, &b, mode, prec)?;
            let truncated = report.mu.as_ref().and_then(truncate2);
            Ok(TableRow { label: label.into(), beta: beta.into(), printed: printed.into(), report, truncated })
        })
        .collect()
}

fn cmd_table(cfg: &RunConfig) -> CliResult<Report> {
    let mode = match cfg.delta_mode.as_deref() {
        Some(m) => DeltaMode::parse(m)?,
        None => DeltaMode::Bennett,
    };
    let rows = table_rows(mode, cfg.prec)?;
    let mut hyps = Vec::new();
    let mut jrows = Vec::new();
    let mut table = vec![["theta", "beta", "mu_lo", "mu_hi", "mu_trunc", "printed", "match"].map(String::from).to_vec()];
    let mut stderr = Vec::new();
    for r in &rows {
        for h in &r.report.hypotheses {
            hyps.push(json!({ "name": format!("{}: {}", r.label, h.name), "verdict": verdict_name(h.verdict), "detail": h.detail }));
        }
        jrows.push(json!({
            "theta": r.label,
            "beta": r.beta,
            "mu": opt_interval(&r.report.mu),
            "mu_trunc": r.truncated,
            "printed": r.printed,
            "match": r.matches(),
        }));
        let (ml, mh) = ends(&r.report.mu);
        table.push(vec![
            r.label.clone(),
            r.beta.clone(),
            ml,
            mh,
            r.truncated.clone().unwrap_or_default(),
            r.printed.clone(),
            r.matches().to_string(),
        ]);
        if !r.matches() {
            stderr.push(format!("{}: computed {} but the table prints {}", r.label, short(&r.report.mu), r.printed));
        }
    }
    let certified = rows.iter().all(|r| r.report.certified);
    let inputs = json!({ "omega": "1/3", "delta_mode": mode.name(), "prec_bits": cfg.prec });
    let json = envelope(Command::Table, inputs, Value::Array(hyps), json!({ "rows": jrows }), certified, Vec::new());
    let code = if stderr.is_empty() { 0 } else { 2 };
    Ok(Report { json, table, stderr, code })
}

// ---------------------------------------------------------------------------
// verify

/// Parameter sets used by `verify` when no parameters are given.
pub fn default_param_grid() -> Vec<(String, HypergeomParams)> {
    let mk = |name: &str, p: irrmeter_core::Result<HypergeomParams>| (name.to_string(), p.expect("grid parameters are valid"));
    vec![
        mk("binomial omega=1/3", HypergeomParams::binomial(rat(1, 3))),
        mk("binomial omega=-2/5", HypergeomParams::binomial(rat(-2, 5))),
        mk("shifted-log x=0", HypergeomParams::shifted_log(int(0))),
        mk("shifted-log x=1/2", HypergeomParams::shifted_log(rat(1, 2))),
        mk("shifted-exp gamma=-1", HypergeomParams::shifted_exp(int(-1))),
        mk("shifted-exp gamma=1/2", HypergeomParams::shifted_exp(rat(1, 2))),
        mk("general (2,1/3,1/5)", HypergeomParams::general(int(2), rat(1, 3), rat(1, 5))),
    ]
}

/// `(regime, params, beta)` combinations for the integrality suite.
pub fn default_integrality_grid() -> Vec<(Regime, HypergeomParams, Rational)> {
    let b = |w: Rational| HypergeomParams::binomial(w).expect("valid");
    let l = |x: Rational| HypergeomParams::shifted_log(x).expect("valid");
    let g = |a, c, d| HypergeomParams::general(a, c, d).expect("valid");
    vec![
        (Regime::Binomial, b(rat(1, 3)), int(9)),
        (Regime::Binomial, b(rat(1, 3)), rat(467 * 467 * 467, 5)),
        (Regime::Binomial, b(rat(1, 2)), rat(3, 2)),
        (Regime::Binomial, b(rat(-2, 5)), int(-7)),
        (Regime::ShiftedLog, l(int(0)), int(2)),
        (Regime::ShiftedLog, l(rat(1, 2)), int(9)),
        (Regime::ShiftedLog, l(rat(1, 3)), rat(5, 2)),
        (Regime::General, g(int(2), rat(1, 3), rat(1, 5)), int(3)),
        (Regime::General, g(rat(1, 2), int(0), rat(1, 3)), int(-4)),
        (Regime::General, g(int(3), rat(-1, 2), int(2)), rat(5, 3)),
        (Regime::General, b(rat(1, 3)), int(9)),
        (Regime::AlphaZero, g(int(0), int(-1), int(-1)), int(2)),
        (Regime::AlphaZero, g(int(0), rat(1, 2), int(-1)), int(3)),
        (Regime::AlphaZero, g(int(0), int(2), rat(-1, 3)), rat(-7, 2)),
    ]
}

/// Outcome of one identity suite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteResult {
    pub suite: &'static str,
    pub label: String,
    pub checked: u64,
    /// `(n, reason)` for every failing index.
    pub failures: Vec<(u64, String)>,
}

impl SuiteResult {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn weight_suite(label: &str, p: &HypergeomParams, nmax: u64) -> SuiteResult {
    let failures = (1..=nmax)
        .into_par_iter()
        .filter_map(|n| {
            let rep = verify_weight(n, p);
            rep.first_violation().map(|v| (n, format!("{v:?}")))
        })
        .collect();
    SuiteResult { suite: "weight", label: label.into(), checked: nmax, failures }
}

pub fn recurrence_suite(label: &str, p: &HypergeomParams, nmax: u64) -> SuiteResult {
    let failures = (1..=nmax)
        .into_par_iter()
        .filter_map(|n| match verify_recurrence(n, p, n as usize + 4) {
            Ok(c) if c.ok => None,
            Ok(_) => Some((n, "nonzero residual".to_string())),
            Err(e) => Some((n, e.to_string())),
        })
        .collect();
    SuiteResult { suite: "recurrence", label: label.into(), checked: nmax, failures }
}

pub fn determinant_suite(label: &str, p: &HypergeomParams, nmax: u64) -> SuiteResult {
    let failures = (0..=nmax)
        .into_par_iter()
        .filter_map(|n| match verify_det_m2(n, p) {
            Ok(c) if c.ok => None,
            Ok(c) => Some((n, format!("expanded {} vs closed form {}", c.symbolic, c.closed_form))),
            Err(e) => Some((n, e.to_string())),
        })
        .collect();
    SuiteResult { suite: "determinant", label: label.into(), checked: nmax + 1, failures }
}

pub fn oracle_suite(label: &str, p: &HypergeomParams, nmax: u64) -> SuiteResult {
    let top = nmax.min(15);
    let failures = (0..=top)
        .into_par_iter()
        .filter_map(|n| (rd_oracle(n, p) != pade_general(n, p).p0).then(|| (n, "Rodrigues form differs".to_string())))
        .collect();
    SuiteResult { suite: "oracle", label: label.into(), checked: top + 1, failures }
}

pub fn integrality_suite(regime: Regime, p: &HypergeomParams, beta: &Rational, nmax: u64) -> SuiteResult {
    let label = format!("{} {} beta={}", regime.name(), p, beta);
    let failures = (1..=nmax)
        .into_par_iter()
        .filter_map(|n| {
            let prof = match kappa_n(p, beta, n, regime) {
                Ok(v) => v,
                Err(e) => return Some((n, e.to_string())),
            };
            let pair = pade_general(n, p);
            for (name, poly) in [("P0", &pair.p0), ("P1", &pair.p1)] {
                let v = &prof.kappa * poly.eval(beta);
                if !is_integer(&v) {
                    return Some((n, format!("kappa_n {name}(beta) = {v}")));
                }
            }
            None
        })
        .collect();
    SuiteResult { suite: "integrality", label, checked: nmax, failures }
}

fn cmd_verify(cfg: &RunConfig) -> CliResult<Report> {
    let nmax = cfg.nmax.unwrap_or(30);
    let sel = selection(cfg)?;
    let beta = parse_opt("beta", &cfg.beta)?;
    let grid: Vec<(String, HypergeomParams)> = match &sel {
        Some(s) => vec![(s.preset_name().to_string(), s.params()?)],
        None => default_param_grid(),
    };
    let igrid: Vec<(Regime, HypergeomParams, Rational)> = match (&sel, &beta) {
        (Some(s), Some(b)) => {
            let p = s.params()?;
            vec![(Regime::for_params(&p), p, b.clone())]
        }
        (Some(_), None) => Vec::new(),
        (None, _) => default_integrality_grid(),
    };
    let mut results = Vec::new();
    for (label, p) in &grid {
        results.push(weight_suite(label, p, nmax));
        results.push(recurrence_suite(label, p, nmax));
        if p.nondegenerate() {
            results.push(determinant_suite(label, p, nmax));
        }
        results.push(oracle_suite(label, p, nmax));
    }
    for (r, p, b) in &igrid {
        results.push(integrality_suite(*r, p, b, nmax));
    }
    let mut hyps = Vec::new();
    let mut table = vec![["suite", "params", "checked", "failures", "first_failure"].map(String::from).to_vec()];
    let mut stderr = Vec::new();
    let mut suites = Vec::new();
    for r in &results {
        let first = r.failures.first().map(|(n, m)| format!("n={n}: {m}")).unwrap_or_default();
        hyps.push(check(format!("{}: {}", r.suite, r.label), r.ok(), if r.ok() { format!("{} indices", r.checked) } else { first.clone() }));
        suites.push(json!({
            "suite": r.suite,
            "params": r.label,
            "checked": r.checked,
            "failures": r.failures.iter().map(|(n, m)| json!({ "n": n, "reason": m })).collect::<Vec<_>>(),
        }));
        table.push(vec![r.suite.into(), r.label.clone(), r.checked.to_string(), r.failures.len().to_string(), first.clone()]);
        if !r.ok() {
            stderr.push(format!("{} suite failed for {}: {}", r.suite, r.label, first));
        }
    }
    let ok = stderr.is_empty();
    let json = envelope(
        Command::Verify,
        inputs_json(cfg, sel.as_ref(), beta.as_ref()),
        Value::Array(hyps),
        json!({ "all_pass": ok, "suites": suites }),
        ok,
        Vec::new(),
    );
    Ok(Report { json, table, stderr, code: if ok { 0 } else { 2 } })
}

// ---------------------------------------------------------------------------
// asymptotics

/// Growth data for `X_n = P_{n,0}(beta)`.
#[derive(Clone, Debug)]
pub struct Asymptotics {
    pub nmax: u64,
    pub lambda2: QuadraticNumber,
    pub rho2: QuadraticNumber,
    pub threshold: irrmeter_core::recurrence::ThresholdReport,
    /// `|X_nmax|^(1/nmax)`.
    pub nth_root: Interval,
    pub ratio: irrmeter_core::recurrence::RatioReport,
    pub ratio_window: (u64, u64),
    pub growth: irrmeter_core::recurrence::GrowthReport,
}

pub fn denominator_trace(p: &HypergeomParams, beta: &Rational, nmax: u64) -> irrmeter_core::Result<irrmeter_core::recurrence::SolutionTrace> {
    let x0 = pade_general(0, p).p0.eval(beta);
    let x1 = pade_general(1, p).p0.eval(beta);
    evaluate_solution(p, beta, &x0, &x1, nmax)
}

pub fn asymptotics(p: &HypergeomParams, beta: &Rational, nmax: u64, prec: u32) -> irrmeter_core::Result<Asymptotics> {
    if nmax < 8 {
        return Err(Error::InvalidArgument("asymptotics needs nmax >= 8".into()));
    }
    let spec = pade_recurrence(p, beta)?;
    let roots = spec.order2_roots()?;
    let trace = denominator_trace(p, beta, nmax)?;
    let threshold = poincare_threshold(&spec, &trace)?;
    let values = trace.to_intervals(prec);
    let last = values[nmax as usize].abs();
    let nth_root = last.ln()?.scale(&Rational::new(BigInt::one(), BigInt::from(nmax))).exp();
    let lo = (nmax / 8).max(1);
    let ratio_window = (lo, nmax - 1);
    let ratio = ratio_estimate(&values, &roots.lambda2, ratio_window, prec)?;
    let growth = growth_bound(&values, &roots.rho2, prec)?;
    Ok(Asymptotics {
        nmax,
        lambda2: roots.lambda2.clone(),
        rho2: roots.rho2.clone(),
        threshold,
        nth_root,
        ratio,
        ratio_window,
        growth,
    })
}

/// Random rational initial pairs `(X_0, X_1)` with numerators in
/// `[-bound, bound]` and denominators in `[1, bound]`, never both zero.
pub fn random_pairs(seed: u64, count: usize, bound: i64) -> Vec<(Rational, Rational)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut draw = || rat(rng.gen_range(-bound..=bound), rng.gen_range(1..=bound));
        let (a, b) = (draw(), draw());
        if !(a.is_zero() && b.is_zero()) {
            out.push((a, b));
        }
    }
    out
}

/// Index-monotonicity violations on the recurrence at `beta`, per pair.
pub fn index_sweep(
    p: &HypergeomParams,
    beta: &Rational,
    pairs: &[(Rational, Rational)],
    nmax: u64,
) -> irrmeter_core::Result<Vec<(u64, Vec<u64>)>> {
    let spec = pade_recurrence(p, beta)?;
    pairs
        .par_iter()
        .map(|(a, b)| {
            let t = evaluate_solution(p, beta, a, b, nmax)?;
            let rep = poincare_threshold(&spec, &t)?;
            Ok((rep.n_threshold, rep.violations))
        })
        .collect()
}

fn cmd_asymptotics(cfg: &RunConfig) -> CliResult<Report> {
    let sel = selection(cfg)?.unwrap_or(Selection::Binomial(rat(1, 3)));
    let beta = parse_opt("beta", &cfg.beta)?.unwrap_or_else(|| int(9));
    let p = sel.params()?;
    let nmax = cfg.nmax.unwrap_or(400);
    let a = asymptotics(&p, &beta, nmax, cfg.prec)?;
    let sweep_n = nmax.min(200).max(4 * a.threshold.n_threshold + 8);
    let pairs = random_pairs(cfg.seed, SWEEP_PAIRS, 1000);
    let sweep = index_sweep(&p, &beta, &pairs, sweep_n)?;
    let sweep_bad: usize = sweep.iter().map(|(_, v)| v.len()).sum();
    let (w0, w1) = a.ratio_window;
    let mid = (w0 + w1) / 2;
    let first = a.ratio.sup_over(w0, mid).unwrap_or_default();
    let second = a.ratio.sup_over(mid + 1, w1).unwrap_or_default();
    let pr = cfg.prec;
    let rho2_iv = a.rho2.to_interval(pr);
    let rel = a.nth_root.sub(&rho2_iv).abs().div(&rho2_iv)?;
    let hyps = vec![
        check("threshold found", true, format!("N = {} verified up to {}", a.threshold.n_threshold, a.threshold.horizon)),
        check("index monotone on the trace", a.threshold.violations.is_empty(), format!("{} violations", a.threshold.violations.len())),
        check(
            "index monotone on random pairs",
            sweep_bad == 0,
            format!("{} pairs, seed {}, n <= {sweep_n}, {sweep_bad} violations", pairs.len(), cfg.seed),
        ),
    ];
    let to_iv = |q: &Rational| Interval::point(q, pr);
    let result = json!({
        "lambda2": quadratic_json(&a.lambda2, pr),
        "rho2": quadratic_json(&a.rho2, pr),
        "threshold": {
            "N": a.threshold.n_threshold,
            "horizon": a.threshold.horizon,
            "limit_index": a.threshold.limit_index,
            "N2": a.threshold.n2,
            "violations": a.threshold.violations,
        },
        "nth_root": { "n": a.nmax, "value": interval_json(&a.nth_root), "relative_gap": interval_json(&rel) },
        "ratio": {
            "window": [w0, w1],
            "sup_scaled": rational_json(&a.ratio.sup_scaled, pr),
            "sup_first_half": interval_json(&to_iv(&first)),
            "sup_second_half": interval_json(&to_iv(&second)),
        },
        "growth": {
            "c": interval_json(&a.growth.c),
            "argmax": a.growth.argmax,
            "nmax": a.growth.nmax,
            "prefix_only": a.growth.prefix_only,
        },
        "sweep": {
            "seed": cfg.seed,
            "pairs": pairs.len(),
            "nmax": sweep_n,
            "max_threshold": sweep.iter().map(|(n, _)| *n).max(),
            "violations": sweep_bad,
        },
    });
    let d = 12;
    let table = vec![
        vec!["quantity".to_string(), "value".to_string()],
        vec!["N".into(), a.threshold.n_threshold.to_string()],
        vec!["limit_index".into(), a.threshold.limit_index.to_string()],
        vec!["N2".into(), a.threshold.n2.to_string()],
        vec![format!("|X_{}|^(1/n)", a.nmax), a.nth_root.lo_decimal(d)],
        vec!["rho2".into(), rho2_iv.lo_decimal(d)],
        vec!["sup n^2 r_n (first half)".into(), format_decimal(&first, d, true)],
        vec!["sup n^2 r_n (second half)".into(), format_decimal(&second, d, true)],
        vec!["growth constant".into(), a.growth.c.hi_decimal(d)],
        vec!["sweep violations".into(), sweep_bad.to_string()],
    ];
    let ok = a.threshold.violations.is_empty() && sweep_bad == 0;
    let mut stderr = Vec::new();
    if !ok {
        stderr.push("index monotonicity violated".to_string());
    }
    let warnings = vec![format!("growth constant is certified on 1..={} only", a.growth.nmax)];
    let json = envelope(Command::Asymptotics, inputs_json(cfg, Some(&sel), Some(&beta)), Value::Array(hyps), result, false, warnings);
    Ok(Report { json, table, stderr, code: if ok { 0 } else { 2 } })
}

// ---------------------------------------------------------------------------
// criterion

fn rows_json(v: &[RowVerdict], prec: u32) -> Value {
    Value::Array(
        v.iter()
            .map(|r| {
                json!({
                    "n": r.n,
                    "row": r.row,
                    "verdict": verdict_name(r.verdict),
                    "size": rational_json(&r.size, prec),
                    "size_bound": rational_json(&r.size_bound, prec),
                    "size_verdict": verdict_name(r.size_verdict),
                    "form": interval_json(&r.form.with_prec(prec)),
                    "form_bound": rational_json(&r.form_bound, prec),
                    "form_verdict": verdict_name(r.form_verdict),
                })
            })
            .collect(),
    )
}

fn mu_json(b: &irrmeter_core::simultaneous::MuBound) -> Value {
    json!({ "mu": interval_json(&b.mu), "certified": b.certified, "argmax": b.argmax })
}

fn cmd_criterion(cfg: &RunConfig) -> CliResult<Report> {
    let mode = CriterionMode::parse(&cfg.mode)?;
    let pr = cfg.prec;
    let (input, inputs, mut result, mut warnings, certified) = match &cfg.input {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            let input = CriterionInput::parse(&text)?;
            input.validate()?;
            let mut result = Map::new();
            let mut warnings = Vec::new();
            if input.s == 1 && input.blocks.len() >= 3 {
                let pairs: Vec<(BigInt, BigInt)> = input.blocks.iter().map(|b| (-&b.matrix[0][0], b.matrix[0][1].clone())).collect();
                let qs: Vec<Rational> = input.blocks.iter().map(|b| b.q.clone()).collect();
                let es: Vec<Rational> = input.blocks.iter().map(|b| b.e.clone()).collect();
                let n0 = input.blocks[0].n;
                let consecutive = input.blocks.windows(2).all(|w| w[1].n == w[0].n + 1);
                if consecutive {
                    let w = mu_from_pairs(&pairs, n0, &qs, &es, PairsMode::Window { lo: 0, hi: u64::MAX }, None, pr)?;
                    warnings.extend(w.warnings.clone());
                    result.insert("mu_window".into(), mu_json(&w));
                }
            }
            let inputs = json!({ "input": path.display().to_string(), "mode": cfg.mode, "prec_bits": pr });
            (input, inputs, result, warnings, false)
        }
        None => {
            let omega = parse_opt("omega", &cfg.omega)?.unwrap_or_else(|| rat(1, 3));
            let beta = parse_opt("beta", &cfg.beta)?.unwrap_or_else(|| int(9));
            let nmax = cfg.nmax.unwrap_or(20);
            let pl = binomial_pipeline(&omega, &beta, nmax, pr.max(512))?;
            let al = Interval::point(&pl.geometric.alpha, pr);
            let be = Interval::point(&pl.geometric.beta, pr);
            let k = pl.pair_q.len();
            let g = mu_from_pairs(&pl.pairs[..k], pl.n0, &pl.pair_q, &pl.pair_e, PairsMode::Geometric, Some((&al, &be)), pr)?;
            let w = mu_from_pairs(&pl.pairs[..k], pl.n0, &pl.pair_q, &pl.pair_e, PairsMode::Window { lo: 0, hi: u64::MAX }, None, pr)?;
            let mut warnings = g.warnings.clone();
            warnings.extend(w.warnings.clone());
            let mut result = Map::new();
            result.insert("n0".into(), json!(pl.n0));
            result.insert(
                "geometric".into(),
                json!({
                    "a": rational_json(&pl.geometric.a, pr),
                    "b": rational_json(&pl.geometric.b, pr),
                    "Q": rational_json(&pl.geometric.alpha, pr),
                    "E": rational_json(&pl.geometric.beta, pr),
                }),
            );
            result.insert("mu_geometric".into(), mu_json(&g));
            result.insert("mu_window".into(), mu_json(&w));
            let inputs = json!({ "omega": omega.to_string(), "beta": beta.to_string(), "nmax": nmax, "mode": cfg.mode, "prec_bits": pr });
            (pl.input, inputs, result, warnings, g.certified)
        }
    };
    let verdicts = verify_matrix_hypotheses(&input, mode)?;
    let fails: Vec<&RowVerdict> = verdicts.iter().filter(|v| v.verdict != Verdict::Pass).collect();
    let hyps = vec![
        check("det M_n != 0", true, format!("{} blocks", input.blocks.len())),
        check("row conditions", fails.is_empty(), format!("{} of {} rows fail or are indeterminate", fails.len(), verdicts.len())),
    ];
    result.insert("rows".into(), rows_json(&verdicts, pr));
    let mut table = vec![["n", "row", "verdict", "size", "size_bound", "form_hi", "form_bound"].map(String::from).to_vec()];
    for v in &verdicts {
        table.push(vec![
            v.n.to_string(),
            v.row.to_string(),
            verdict_name(v.verdict).into(),
            v.size.to_string(),
            json_str(&rational_json(&v.size_bound, 64)).chars().take(40).collect(),
            v.form.hi_decimal(24),
            format_decimal(&v.form_bound, 24, true),
        ]);
    }
    let mut stderr = Vec::new();
    for f in &fails {
        stderr.push(format!("row {} of M_{}: {}", f.row, f.n, verdict_name(f.verdict)));
    }
    let ok = fails.is_empty();
    if !ok {
        warnings.push("row conditions fail; the exponent bound does not apply".into());
    }
    let json = envelope(Command::Criterion, inputs, Value::Array(hyps), Value::Object(result), certified && ok, warnings);
    Ok(Report { json, table, stderr, code: if ok { 0 } else { 2 } })
}
