//! Command-line surface: every experiment as a reproducible run with a JSON summary.

use crate::arith::{debruijn_log_estimate, is_prime, smooth_count};
use crate::averages::{
    brute_average, compare, compare_values, gowers_norm_of, gvn_trials, tk_check, GowersMethod, Verdict,
};
use crate::forms::{parse_system, BoxSpec, FormSystem};
use crate::local::{main_term, MainTermParams};
use crate::multfunc::{distance_sq, from_registry, min_distance, DirichletChar, MultFunc, C64};
use crate::output::round_json;
use crate::signpatterns::{
    bias, blank_sum, census, elltrans_check, jacobi_sum_check, t_constants, triv23_check, DFilter, SignPattern,
};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use std::ffi::OsString;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_ASSERTION: i32 = 2;

/// Moduli of the identity suite's character checks.
pub const IDENTITY_MODULI: [u64; 6] = [5, 7, 11, 13, 35, 55];
pub const TK_RATIO_LIMIT: f64 = 10.0;
pub const GVN_EXCESS_LIMIT: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config file line {line}: {reason}")]
    Config { line: usize, reason: String },
    #[error(transparent)]
    Lib(#[from] crate::Error),
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Everything a run depends on. Doubles as the flag set of every subcommand.
#[derive(clap::Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[arg(skip)]
    pub command: Option<String>,
    /// key=value file; flags given on the command line win
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// registry names, one per form or a single name for all
    #[arg(long, value_delimiter = ',')]
    pub f: Vec<String>,
    /// character moduli per form (1 = trivial); inferred from `--f` when absent
    #[arg(long, value_delimiter = ',')]
    pub chi: Vec<u64>,
    /// forms separated by `;`, e.g. "n;n+d;n+2d"
    #[arg(long)]
    pub system: Option<String>,
    #[arg(long)]
    pub x: Option<f64>,
    /// box sides, overriding the square box of side `x`
    #[arg(long, value_delimiter = ',')]
    pub sides: Vec<f64>,
    #[arg(long)]
    pub z: Option<u64>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub y: Option<u64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub t: Vec<f64>,
    #[arg(long)]
    pub q: Option<u64>,
    #[arg(long)]
    pub qmax: Option<u64>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Gowers method: fft or direct
    #[arg(long)]
    pub method: Option<String>,
    /// census differences: all, coprime or multiple (relative to `q`)
    #[arg(long)]
    pub filter: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub multiplier: Option<f64>,
    /// compare against this value instead of the assembled main term
    #[arg(long, allow_hyphen_values = true)]
    pub predicted: Option<f64>,
    /// error budget that goes with `--predicted` (default 0)
    #[arg(long)]
    pub budget: Option<f64>,
    /// the constant A of the tk-check range
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// JSON summary path (stdout when absent)
    #[arg(long)]
    pub out: Option<String>,
    /// CSV series path (census); defaults to the summary path with a .csv extension
    #[arg(long)]
    pub csv: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
}

trait KvValue: Sized {
    fn render(&self) -> Option<String>;
    fn parse_kv(s: &str) -> std::result::Result<Self, String>;
    fn or(self, other: Self) -> Self;
}

impl<T: FromStr + Display> KvValue for Option<T>
where
    T::Err: Display,
{
    fn render(&self) -> Option<String> {
        self.as_ref().map(|v| v.to_string())
    }
    fn parse_kv(s: &str) -> std::result::Result<Self, String> {
        s.parse().map(Some).map_err(|e: T::Err| e.to_string())
    }
    fn or(self, other: Self) -> Self {
        self.or(other)
    }
}

impl<T: FromStr + Display> KvValue for Vec<T>
where
    T::Err: Display,
{
    fn render(&self) -> Option<String> {
        (!self.is_empty()).then(|| self.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))
    }
    fn parse_kv(s: &str) -> std::result::Result<Self, String> {
        s.split(',').map(|p| p.trim().parse().map_err(|e: T::Err| e.to_string())).collect()
    }
    fn or(self, other: Self) -> Self {
        if self.is_empty() {
            other
        } else {
            self
        }
    }
}

macro_rules! kv_fields {
    ($($field:ident),* $(,)?) => {
        impl RunConfig {
            /// One `key=value` line per set field.
            pub fn to_kv(&self) -> String {
                let mut s = String::new();
                $(
                    if let Some(v) = KvValue::render(&self.$field) {
                        s.push_str(concat!(stringify!($field), "="));
                        s.push_str(&v);
                        s.push('\n');
                    }
                )*
                s
            }

            fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
                match key {
                    $( stringify!($field) => self.$field = KvValue::parse_kv(value)?, )*
                    _ => return Err(format!("unknown key `{key}`")),
                }
                Ok(())
            }

            /// Field-wise: values set in `self` win over `fallback`.
            pub fn or(self, fallback: RunConfig) -> RunConfig {
                RunConfig { config: self.config.or(fallback.config), $( $field: KvValue::or(self.$field, fallback.$field), )* }
            }
        }
    };
}

kv_fields!(
    command, f, chi, system, x, sides, z, m, y, t, q, qmax, k, method, filter, tol, multiplier, predicted, budget, a, trials, n,
    threads, out, csv, seed
);

impl RunConfig {
    /// Parses `key=value` lines; blank lines and `#` comments are skipped.
    pub fn parse_kv(text: &str) -> CliResult<RunConfig> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config { line: i + 1, reason: format!("expected key=value, got `{line}`") })?;
            let key = key.trim().replace('-', "_");
            cfg.set(&key, value.trim()).map_err(|reason| CliError::Config { line: i + 1, reason })?;
        }
        Ok(cfg)
    }
}

#[derive(Parser, Debug)]
#[command(name = "mfcorr", about = "Correlations of multiplicative functions along linear forms", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Brute-force average over a box
    Average(RunConfig),
    /// Assembled main term with its error budget
    MainTerm(RunConfig),
    /// Brute-force average against the main term
    Compare(RunConfig),
    /// Gowers U^k norm on [1, x]
    Gowers(RunConfig),
    /// Grid minimum of the pretentious distance
    Distance(RunConfig),
    /// Sign-pattern counts over differences d <= z
    SignsCensus(RunConfig),
    /// Elliptic bias and second-moment constants
    SignsBias(RunConfig),
    /// Exact character-sum and point-count identities
    Identities(RunConfig),
    /// Turán–Kubilius bound along one form
    TkCheck(RunConfig),
    /// 3-AP average against U^2 norms on Z/N
    GvnCheck(RunConfig),
    /// Smooth-number count against de Bruijn's estimate
    Smooth(RunConfig),
}

impl Command {
    fn split(self) -> (&'static str, RunConfig) {
        match self {
            Command::Average(c) => ("average", c),
            Command::MainTerm(c) => ("main-term", c),
            Command::Compare(c) => ("compare", c),
            Command::Gowers(c) => ("gowers", c),
            Command::Distance(c) => ("distance", c),
            Command::SignsCensus(c) => ("signs-census", c),
            Command::SignsBias(c) => ("signs-bias", c),
            Command::Identities(c) => ("identities", c),
            Command::TkCheck(c) => ("tk-check", c),
            Command::GvnCheck(c) => ("gvn-check", c),
            Command::Smooth(c) => ("smooth", c),
        }
    }
}

/// Result of one run before it is written out.
#[derive(Debug)]
pub struct Outcome {
    pub summary: Value,
    pub exit_code: i32,
}

/// Parses `argv` (program name first), runs the command and writes its artifacts.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (name, flags) = cli.command.split();
    match resolve(name, flags).and_then(|cfg| execute(&cfg).and_then(|o| write_outputs(&cfg, &o).map(|_| o))) {
        Ok(o) => o.exit_code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

/// Merges the flags over the config file and fixes the command name.
pub fn resolve(name: &str, flags: RunConfig) -> CliResult<RunConfig> {
    let file = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config file {}: {e}", path.display())))?;
            RunConfig::parse_kv(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(c) = &file.command {
        if c != name {
            return Err(usage(format!("config file is for `{c}`, not `{name}`")));
        }
    }
    let mut cfg = flags.or(file);
    cfg.command = Some(name.to_string());
    cfg.config = None;
    Ok(cfg)
}

/// Runs a resolved config on a pool capped at `threads`.
pub fn execute(cfg: &RunConfig) -> CliResult<Outcome> {
    let threads = cfg.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| usage(format!("cannot build a pool of {threads} threads: {e}")))?;
    let start = Instant::now();
    let name = cfg.command.clone().unwrap_or_default();
    let (body, exit_code) = pool.install(|| dispatch(&name, cfg))?;
    let mut summary = Map::new();
    summary.insert("command".into(), json!(name));
    summary.insert("config".into(), serde_json::to_value(cfg).expect("config serializes"));
    for (k, v) in body {
        summary.insert(k, v);
    }
    summary.insert("exit_code".into(), json!(exit_code));
    summary.insert("wall_time".into(), json!(start.elapsed().as_secs_f64()));
    Ok(Outcome { summary: round_json(Value::Object(summary)), exit_code })
}

fn write_outputs(cfg: &RunConfig, o: &Outcome) -> CliResult<()> {
    let text = serde_json::to_string_pretty(&o.summary).expect("summary serializes") + "\n";
    match &cfg.out {
        Some(path) => write_file(Path::new(path), &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|source| CliError::Write { path: path.display().to_string(), source })
}

/// A headline number with where it came from.
fn prov(empirical: Option<Value>, predicted: Option<Value>, budget: Option<Value>) -> Value {
    json!({ "empirical": empirical, "predicted": predicted, "budget": budget })
}

fn cnum(z: C64) -> Value {
    if z.im == 0.0 {
        json!(z.re)
    } else {
        json!([z.re, z.im])
    }
}

fn budget_value(b: f64) -> Value {
    if b.is_finite() {
        json!(b)
    } else {
        json!("inf")
    }
}

type Body = Vec<(String, Value)>;

fn body(verdict: &str, values: Map<String, Value>, report: Value) -> Body {
    vec![("verdict".into(), json!(verdict)), ("values".into(), Value::Object(values)), ("report".into(), report)]
}

fn req<T: Clone>(v: &Option<T>, flag: &str) -> CliResult<T> {
    v.clone().ok_or_else(|| usage(format!("missing --{flag}")))
}

fn functions(cfg: &RunConfig, k: usize) -> CliResult<Vec<MultFunc>> {
    if cfg.f.is_empty() {
        return Err(usage("missing --f"));
    }
    let fs = cfg.f.iter().map(|n| from_registry(n)).collect::<crate::Result<Vec<_>>>()?;
    match fs.len() {
        1 => Ok(vec![fs[0].clone(); k]),
        n if n == k => Ok(fs),
        n => Err(usage(format!("--f lists {n} functions for {k} forms"))),
    }
}

fn single_function(cfg: &RunConfig) -> CliResult<MultFunc> {
    Ok(functions(cfg, 1)?.remove(0))
}

fn system(cfg: &RunConfig) -> CliResult<FormSystem> {
    Ok(parse_system(&req(&cfg.system, "system")?, None)?)
}

fn box_for(cfg: &RunConfig, l: usize) -> CliResult<BoxSpec> {
    if !cfg.sides.is_empty() {
        if cfg.sides.len() != l {
            return Err(usage(format!("--sides lists {} sides for {l} variables", cfg.sides.len())));
        }
        return Ok(BoxSpec::new(cfg.sides.clone())?);
    }
    Ok(BoxSpec::cube(l, req(&cfg.x, "x")?)?)
}

fn x_int(cfg: &RunConfig) -> CliResult<u64> {
    let x = req(&cfg.x, "x")?;
    if !(x >= 1.0 && x.fract() == 0.0 && x < 1e15) {
        return Err(usage(format!("--x must be a positive integer here, got {x}")));
    }
    Ok(x as u64)
}

/// Characters from `--chi`, else the real primitive character behind each `char-*:q` name.
fn characters(cfg: &RunConfig, k: usize) -> CliResult<Vec<DirichletChar>> {
    let make = |q: u64| -> CliResult<DirichletChar> {
        Ok(if q == 1 { DirichletChar::trivial(1)? } else { DirichletChar::real_primitive(q)? })
    };
    let qs: Vec<u64> = if cfg.chi.is_empty() {
        let names = if cfg.f.len() == 1 { vec![cfg.f[0].clone(); k] } else { cfg.f.clone() };
        names
            .iter()
            .map(|n| {
                n.split_once(':')
                    .filter(|(h, _)| h.starts_with("char-"))
                    .and_then(|(_, q)| q.parse().ok())
                    .unwrap_or(1)
            })
            .collect()
    } else if cfg.chi.len() == 1 {
        vec![cfg.chi[0]; k]
    } else {
        cfg.chi.clone()
    };
    if qs.len() != k {
        return Err(usage(format!("--chi lists {} moduli for {k} forms", qs.len())));
    }
    qs.into_iter().map(make).collect()
}

fn twists(cfg: &RunConfig, k: usize) -> CliResult<Vec<f64>> {
    match cfg.t.len() {
        0 => Ok(vec![0.0; k]),
        1 => Ok(vec![cfg.t[0]; k]),
        n if n == k => Ok(cfg.t.clone()),
        n => Err(usage(format!("--t lists {n} values for {k} forms"))),
    }
}

fn main_term_params(cfg: &RunConfig) -> MainTermParams {
    let mut p = MainTermParams { y: cfg.y, ..Default::default() };
    if let Some(tol) = cfg.tol {
        p.local.tol = tol;
    }
    p
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn dispatch(name: &str, cfg: &RunConfig) -> CliResult<(Body, i32)> {
    match name {
        "average" => cmd_average(cfg),
        "main-term" => cmd_main_term(cfg),
        "compare" => cmd_compare(cfg),
        "gowers" => cmd_gowers(cfg),
        "distance" => cmd_distance(cfg),
        "signs-census" => cmd_census(cfg),
        "signs-bias" => cmd_bias(cfg),
        "identities" => cmd_identities(cfg),
        "tk-check" => cmd_tk(cfg),
        "gvn-check" => cmd_gvn(cfg),
        "smooth" => cmd_smooth(cfg),
        other => Err(usage(format!("unknown command `{other}`"))),
    }
}

fn cmd_average(cfg: &RunConfig) -> CliResult<(Body, i32)> {
    let sys = system(cfg)?;
    let fs = functions(cfg, sys.k())?;
    let r = brute_average(&fs, &sys, &box_for(cfg, sys.l())?)?;
    let mut values = Map::new();
    values.insert("average".into(), prov(Some(cnum(r.value)), None, None));
    Ok((body("computed", values, to_value(&r)), EXIT_OK))
}

fn cmd_main_term(cfg: &RunConfig) -> CliResult<(Body, i32)> {
    let sys = system(cfg)?;
    let k = sys.k();
    let r = main_term(&functions(cfg, k)?, &characters(cfg, k)?, &twists(cfg, k)?, &sys, &box_for(cfg, sys.l())?, &main_term_params(cfg))?;
    let mut values = Map::new();
    values.insert("main_term".into(), prov(None, Some(cnum(r.value)), Some(budget_value(r.budget.total))));
    Ok((body("computed", values, to_value(&r)), EXIT_OK))
}

fn cmd_compare(cfg: &RunConfig) -> CliResult<(Body, i32)> {
    let sys = system(cfg)?;
    let k = sys.k();
    let fs = functions(cfg, k)?;
    let bx = box_for(cfg, sys.l())?;
    let emp = brute_average(&fs, &sys, &bx)?;
    let multiplier = cfg.multiplier.unwrap_or(10.0);
    let (c, predicted) = match cfg.predicted {
        Some(p) => (compare_values(emp.value, C64::new(p, 0.0), cfg.budget.unwrap_or(0.0), multiplier), json!("configured")),
        None => {
            let pred = main_term(&fs, &characters(cfg, k)?, &twists(cfg, k)?, &sys, &bx, &main_term_params(cfg))?;
            (compare(&emp, &pred, multiplier)?, to_value(&pred))
        }
    };
    let mut values = Map::new();
    values.insert(
        "average".into(),
        prov(Some(cnum(c.empirical)), Some(cnum(c.predicted)), Some(budget_value(c.budget))),
    );
    let verdict = to_value(&c.verdict).as_str().unwrap_or_default().to_string();
    let report = json!({ "comparison": to_value(&c), "empirical": to_value(&emp), "predicted": predicted });
    let code = if c.verdict == Verdict::Fail { EXIT_ASSERTION } else { EXIT_OK };
    Ok((body(&verdict, values, report), code))
}

fn cmd_gowers(cfg: &RunConfig) -> CliResult<(Body, i32)> {
    let f = single_function(cfg)?;
    let k = cfg.k.unwrap_or(2);
    let method = match &cfg.method {
        Some(m) => m.parse::<GowersMethod>()?,
        None if k == 2 => GowersMethod::Fft,
        None => GowersMethod::Direct,
    };
    let r = gowers_norm_of(&f, x_int(cfg)?, k, method)?;
    let mut values = Map::new();
    values.insert("gowers_norm".into(), prov(Some(json!(r.value)), None, None));
    Ok((body("computed", values, to_value(&r)), EXIT_OK))
}

fn cmd_distance(cfg: &RunConfig) -> CliResult<(Body, i32)> {
    let f = single_function(cfg)?;
    let x = x_int(cfg)?;
    let md = min_distance(&f, x, cfg.qmax.unwrap_or(10), None)?;
    let mut values = Map::new();
    values.insert("min_distance_sq".into(), prov(Some(json!(md.value)), None, None));
    let mut report = json!({ "chi": md.chi.label(), "t": md.t, "grid_points": md.grid_points, "value": md.value });
    if let Some(q) = cfg.q {
        let chi = MultFunc::from_char(&DirichletChar::real_primitive(q)?);
        let d = distance_sq(&f, &chi, 2, x)?;
        values.insert("distance_sq_to_chi".into(), prov(Some(json!(d)), None, None));
        report["distance_sq_to_chi"] = json!({ "q": q, "value": d });
    }
    Ok((body("computed", values, report), EXIT_OK))
}

fn census_filter(cfg: &RunConfig) -> CliResult<DFilter> {
    let need_q = |what: &str| req(&cfg.q, "q").map_err(|_| usage(format!("--filter {what} needs --q")));
    match cfg.filter.as_deref().unwrap_or("all") {
        "all" => Ok(DFilter::All),
        "coprime" => Ok(DFilter::Coprime(need_q("coprime")?)),
        "multiple" => Ok(DFilter::Multiple(need_q("multiple")?)),
        other => Err(usage(format!("unknown filter `{other}`; expected all, coprime or multiple"))),
    }
}

fn cmd_census(cfg: &RunConfig) -> CliResult<(Body, i32)> {
    let f = single_function(cfg)?;
    let m = cfg.m.unwrap_or(4);
    let mut c = census(&f, x_int(cfg)?, req(&cfg.z, "z")?, m, census_filter(cfg)?)?;
    if let Some(q) = cfg.q.filter(|_| m == 4) {
        let mut params = crate::local::LocalParams::default();
        if let Some(tol) = cfg.tol {
            params.tol = tol;
        }
        c.predict(&f, q, 1000, &params)?;
    }
    let mut values = Map::new();
    for pat in SignPattern::all(m) {
        let predicted = c.prediction.as_ref().map(|p| json!(p.density[pat.index]));
        values.insert(format!("density[{}]", pat.label()), prov(Some(json!(c.mean[pat.index])), predicted, None));
    }
    let csv = cfg.csv.clone().map(PathBuf::from).or_else(|| cfg.out.as_ref().map(|o| Path::new(o).with_extension("csv")));
    if let Some(path) = &csv {
        let mut buf = Vec::new();
        c.write_csv(&mut buf)?;
        write_file(path, &String::from_utf8(buf).expect("csv is ascii"))?;
    }
    let mut report = to_value(&c);
    report["csv"] = json!(csv.map(|p| p.display().to_string()));
    Ok((body("computed", values, report), EXIT_OK))
}

fn cmd_bias(cfg: &RunConfig) -> CliResult<(Body, i32)> {
    let f = single_function(cfg)?;
    let q = req(&cfg.q, "q")?;
    let mut params = crate::local::LocalParams::default();
    if let Some(tol) = cfg.tol {
        params.tol = tol;
    }
    let b = bias(&f, q, 1000, &params)?;
    let t = t_constants(&f, q, 1000, &params)?;
    let mut values = Map::new();
    for pat in SignPattern::all(4) {
        values.insert(format!("a_eps[{}]", pat.label()), prov(None, Some(json!(b.a_eps(&pat))), None));
    }
    for (name, v) in [("t22", t.t22), ("t42", t.t42), ("t44", t.t44)] {
        values.insert(name.into(), prov(None, Some(json!(v)), None));
    }
    let report = json!({ "bias": to_value(&b), "t_constants": to_value(&t) });
    Ok((body("computed", values, report), EXIT_OK))
}

fn cmd_identities(cfg: &RunConfig) -> CliResult<(Body, i32)> {
    let qmax = cfg.qmax.unwrap_or(500);
    let primes: Vec<u64> = (5..=qmax).filter(|&p| is_prime(p)).collect();
    let mut blank_max = 0i64;
    let mut jacobi_max = 0i64;
    let mut deltas = Map::new();
    for &p in &primes {
        let b = blank_sum(p)?;
        blank_max = blank_max.max(b.residual.abs());
        jacobi_max = jacobi_max.max(jacobi_sum_check(p)?.residual.abs());
        deltas.insert(p.to_string(), json!(b.delta));
    }
    let mut elltrans = Vec::new();
    let mut triv_max = 0.0f64;
    for q in IDENTITY_MODULI.into_iter().filter(|&q| q <= qmax) {
        elltrans.push(elltrans_check(q)?);
        for (_, xi) in triv23_check(q)? {
            triv_max = triv_max.max(xi.norm());
        }
    }
    let ell_max = elltrans.iter().map(|e| e.residual.abs()).max().unwrap_or(0);
    let pass = blank_max == 0 && jacobi_max == 0 && ell_max == 0 && triv_max == 0.0;
    let mut values = Map::new();
    let exact = |r: Value| prov(Some(r), Some(json!(0)), Some(json!(0)));
    values.insert("blank_residual".into(), exact(json!(blank_max)));
    values.insert("jacobi_residual".into(), exact(json!(jacobi_max)));
    values.insert("elltrans_residual".into(), exact(json!(ell_max)));
    values.insert("triv23_max".into(), exact(json!(triv_max)));
    let report = json!({ "primes": primes.len(), "deltas": deltas, "elltrans": to_value(&elltrans) });
    Ok((body(if pass { "pass" } else { "fail" }, values, report), if pass { EXIT_OK } else { EXIT_ASSERTION }))
}

fn cmd_tk(cfg: &RunConfig) -> CliResult<(Body, i32)> {
    let sys = system(cfg)?;
    if sys.k() != 1 {
        return Err(usage(format!("tk-check takes a single form, got {}", sys.k())));
    }
    let f = single_function(cfg)?;
    let r = tk_check(&f, &sys.forms[0], &box_for(cfg, sys.l())?, cfg.a.unwrap_or(2.0))?;
    let pass = r.ratio <= TK_RATIO_LIMIT;
    let mut values = Map::new();
    values.insert("ratio".into(), prov(Some(json!(r.ratio)), None, Some(json!(TK_RATIO_LIMIT))));
    Ok((body(if pass { "pass" } else { "fail" }, values, to_value(&r)), if pass { EXIT_OK } else { EXIT_ASSERTION }))
}

fn cmd_gvn(cfg: &RunConfig) -> CliResult<(Body, i32)> {
    let n = cfg.n.unwrap_or(31);
    let r = gvn_trials(n, cfg.trials.unwrap_or(1000), cfg.seed.unwrap_or(0))?;
    let pass = r.excess <= GVN_EXCESS_LIMIT;
    let mut values = Map::new();
    values.insert("excess".into(), prov(Some(json!(r.excess)), None, Some(json!(GVN_EXCESS_LIMIT))));
    Ok((body(if pass { "pass" } else { "fail" }, values, to_value(&r)), if pass { EXIT_OK } else { EXIT_ASSERTION }))
}

fn cmd_smooth(cfg: &RunConfig) -> CliResult<(Body, i32)> {
    let x = x_int(cfg)?;
    let y = req(&cfg.y, "y")?;
    let count = smooth_count(x, y);
    let log_count = (count as f64).ln();
    let est = debruijn_log_estimate(x as f64, y as f64);
    let mut values = Map::new();
    values.insert("psi".into(), prov(Some(json!(count)), None, None));
    values.insert("log_psi".into(), prov(Some(json!(log_count)), Some(json!(est)), None));
    let report = json!({ "x": x, "y": y, "psi": count, "log_psi": log_count, "debruijn": est, "relative": (log_count - est).abs() / est });
    Ok((body("computed", values, report), EXIT_OK))
}
