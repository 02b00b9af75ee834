//! Command-line front end for the relay network bound calculator.
//!
//! Four subcommands: `diamond` (single-layer bound), `layered` (two-layer
//! bound in several variants), `sweep` (CSV stream over a parameter range),
//! and `verify` (self-check suites). Output is deterministic: identical
//! invocations produce byte-identical stdout, floats print in
//! shortest-round-trip form capped at 12 significant digits, and record
//! ordering is fixed by the input regardless of worker scheduling.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error. An optional
//! `key=value` config file mirrors every flag; explicit flags override it.
//! `RELAYBOUNDS_THREADS` caps the worker pool.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use relaybounds_core::{
    layered_bound, nd_bound, special_mu_bound, theorem2_bound, verify_eigen, verify_lemma3,
    verify_limits, verify_maxima, verify_oracle, verify_timeshare_onesided, BoundResult,
    Lemma2Variant, LogBase, OptimizerConfig, Rho12Mode, Theorem2Results, VerifyReport,
};

/// Default gain triples exercised by the `lemma3` verification suite.
const LEMMA3_GAINS: [[f64; 3]; 3] = [[1.0, 1.0, 1.0], [10.0, 1.0, 1.0], [0.1, 1.0, 10.0]];

/// Every key a config file may define; each mirrors the long flag of the
/// same name. Commands read the subset they understand.
const CONFIG_KEYS: &[&str] = &[
    "relays",
    "r1",
    "r2",
    "r3",
    "grid",
    "refine",
    "log-base",
    "format",
    "variant",
    "rho12-mode",
    "param",
    "from",
    "to",
    "steps",
    "scale",
    "suite",
    "seed",
    "samples",
    "nmax",
    "strict",
];

#[derive(Parser)]
#[command(
    name = "relaybounds",
    version,
    about = "Cut-set capacity bounds for symmetric layered Gaussian relay networks"
)]
struct Cli {
    /// Optional key=value file mirroring every flag; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single-layer (diamond) bound: sup over the intra correlation of the
    /// worst cut.
    Diamond(DiamondArgs),
    /// Two-layer bound; variants v1, v2, their minimum, or the decoupled
    /// per-pair form theorem2.
    Layered(LayeredArgs),
    /// CSV stream of layered bounds over a swept parameter.
    Sweep(SweepArgs),
    /// Self-check suites; exit 0 only when all selected suites pass.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct OptimizerFlags {
    /// Grid step for the correlation scan (default 0.001).
    #[arg(long)]
    grid: Option<f64>,
    /// Termination tolerance of the local refinement (default 0.000001).
    #[arg(long)]
    refine: Option<f64>,
    /// Logarithm base for reported values: 2 or e (default 2).
    #[arg(long, value_name = "BASE")]
    log_base: Option<String>,
}

#[derive(Args)]
struct DiamondArgs {
    /// Relay count N (at least 1).
    #[arg(long)]
    relays: Option<usize>,
    /// Source-to-relay gain (positive).
    #[arg(long)]
    r1: Option<f64>,
    /// Relay-to-destination gain (positive).
    #[arg(long)]
    r2: Option<f64>,
    #[command(flatten)]
    opt: OptimizerFlags,
    /// Output format: text, json, or csv (default text).
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct LayeredArgs {
    /// Relay count per layer N (at least 1).
    #[arg(long)]
    relays: Option<usize>,
    /// Source-to-layer-1 gain (positive).
    #[arg(long)]
    r1: Option<f64>,
    /// Layer-1-to-layer-2 gain (positive).
    #[arg(long)]
    r2: Option<f64>,
    /// Layer-2-to-destination gain (positive).
    #[arg(long)]
    r3: Option<f64>,
    /// Bound variant: v1, v2, min, or theorem2 (default min).
    #[arg(long)]
    variant: Option<String>,
    /// Cross-correlation handling: zero or joint (default zero).
    #[arg(long)]
    rho12_mode: Option<String>,
    #[command(flatten)]
    opt: OptimizerFlags,
    /// Output format: text, json, or csv (default text).
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    /// Swept parameter: r1, r2, r3, or N.
    #[arg(long)]
    param: Option<String>,
    /// Left endpoint of the sweep (must be below --to).
    #[arg(long)]
    from: Option<f64>,
    /// Right endpoint of the sweep.
    #[arg(long)]
    to: Option<f64>,
    /// Number of sweep points (at least 2).
    #[arg(long)]
    steps: Option<usize>,
    /// Point spacing: linear or log (default linear; log needs --from > 0).
    #[arg(long)]
    scale: Option<String>,
    /// Relay count per layer (ignored when sweeping N).
    #[arg(long)]
    relays: Option<usize>,
    /// Source-to-layer-1 gain (ignored when sweeping r1).
    #[arg(long)]
    r1: Option<f64>,
    /// Layer-1-to-layer-2 gain (ignored when sweeping r2).
    #[arg(long)]
    r2: Option<f64>,
    /// Layer-2-to-destination gain (ignored when sweeping r3).
    #[arg(long)]
    r3: Option<f64>,
    /// Bound variant: v1, v2, min, or theorem2 (default min).
    #[arg(long)]
    variant: Option<String>,
    /// Cross-correlation handling: zero or joint (default zero).
    #[arg(long)]
    rho12_mode: Option<String>,
    #[command(flatten)]
    opt: OptimizerFlags,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite to run: all, oracle, maxima, lemma3, limits, timeshare, eigen
    /// (default all).
    #[arg(long)]
    suite: Option<String>,
    /// Seed for the sample generators (default 42).
    #[arg(long)]
    seed: Option<u64>,
    /// Random sample count per suite (positive; default 200).
    #[arg(long)]
    samples: Option<usize>,
    /// Largest relay count exercised (default 3; some suites cap lower).
    #[arg(long)]
    nmax: Option<usize>,
    /// Treat informational findings of the timeshare suite as failures.
    #[arg(long)]
    strict: bool,
    /// Grid step for optimizer-backed suites (default 0.01).
    #[arg(long)]
    grid: Option<f64>,
    /// Refinement tolerance for optimizer-backed suites (default 0.000001).
    #[arg(long)]
    refine: Option<f64>,
}

/// Usage error carrying the message for stderr; always maps to exit 2.
struct UsageError(String);

impl UsageError {
    fn new(msg: impl Into<String>) -> Self {
        UsageError(msg.into())
    }
}

impl From<relaybounds_core::Error> for UsageError {
    fn from(e: relaybounds_core::Error) -> Self {
        UsageError(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.0);
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, UsageError> {
    init_threads()?;
    let file = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Diamond(a) => {
            print!("{}", cmd_diamond(a, &file)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Layered(a) => {
            print!("{}", cmd_layered(a, &file)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep(a) => {
            print!("{}", cmd_sweep(a, &file)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(a) => {
            let (out, pass) = cmd_verify(a, &file)?;
            print!("{out}");
            Ok(if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

/// Applies the optional `RELAYBOUNDS_THREADS` cap to the global worker pool.
fn init_threads() -> Result<(), UsageError> {
    if let Ok(s) = std::env::var("RELAYBOUNDS_THREADS") {
        let n: usize = s.parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
            UsageError::new(format!(
                "RELAYBOUNDS_THREADS must be a positive integer, got `{s}`"
            ))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| UsageError::new(format!("RELAYBOUNDS_THREADS: {e}")))?;
    }
    Ok(())
}

fn load_config(path: Option<&Path>) -> Result<BTreeMap<String, String>, UsageError> {
    let Some(path) = path else {
        return Ok(BTreeMap::new());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError::new(format!("--config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(UsageError::new(format!(
                "--config {}: line {} is not key=value",
                path.display(),
                idx + 1
            )));
        };
        let key = k.trim();
        if !CONFIG_KEYS.contains(&key) {
            return Err(UsageError::new(format!(
                "--config {}: key `{key}` does not match any flag",
                path.display()
            )));
        }
        map.insert(key.to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Flag/config/default resolution: an explicit flag wins, then the config
/// file, then the built-in default.
struct Resolve<'a> {
    file: &'a BTreeMap<String, String>,
}

impl Resolve<'_> {
    fn parse_key<T: std::str::FromStr>(&self, key: &str, s: &str) -> Result<T, UsageError> {
        s.parse()
            .map_err(|_| UsageError::new(format!("config key `{key}`: invalid value `{s}`")))
    }

    fn f64(&self, flag: Option<f64>, key: &str, default: f64) -> Result<f64, UsageError> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.file.get(key) {
            Some(s) => self.parse_key(key, s),
            None => Ok(default),
        }
    }

    fn f64_required(&self, flag: Option<f64>, key: &str) -> Result<f64, UsageError> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.file.get(key) {
            Some(s) => self.parse_key(key, s),
            None => Err(UsageError::new(format!("missing required flag --{key}"))),
        }
    }

    fn usize(&self, flag: Option<usize>, key: &str, default: usize) -> Result<usize, UsageError> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.file.get(key) {
            Some(s) => self.parse_key(key, s),
            None => Ok(default),
        }
    }

    fn usize_required(&self, flag: Option<usize>, key: &str) -> Result<usize, UsageError> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.file.get(key) {
            Some(s) => self.parse_key(key, s),
            None => Err(UsageError::new(format!("missing required flag --{key}"))),
        }
    }

    fn u64(&self, flag: Option<u64>, key: &str, default: u64) -> Result<u64, UsageError> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.file.get(key) {
            Some(s) => self.parse_key(key, s),
            None => Ok(default),
        }
    }

    fn string(&self, flag: Option<String>, key: &str, default: &str) -> String {
        flag.or_else(|| self.file.get(key).cloned())
            .unwrap_or_else(|| default.to_string())
    }

    fn bool(&self, flag: bool, key: &str) -> Result<bool, UsageError> {
        if flag {
            return Ok(true);
        }
        match self.file.get(key).map(String::as_str) {
            None => Ok(false),
            Some("true" | "1") => Ok(true),
            Some("false" | "0") => Ok(false),
            Some(other) => Err(UsageError::new(format!(
                "config key `{key}`: expected true or false, got `{other}`"
            ))),
        }
    }
}

fn ensure_gain(value: f64, flag: &str) -> Result<f64, UsageError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(UsageError::new(format!(
            "--{flag} must be positive, got {value}"
        )))
    }
}

fn ensure_relays(value: usize) -> Result<usize, UsageError> {
    if value >= 1 {
        Ok(value)
    } else {
        Err(UsageError::new("--relays must be at least 1"))
    }
}

fn parse_log_base(s: &str) -> Result<LogBase, UsageError> {
    match s {
        "2" => Ok(LogBase::Two),
        "e" => Ok(LogBase::E),
        other => Err(UsageError::new(format!(
            "--log-base must be 2 or e, got `{other}`"
        ))),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Format {
    Text,
    Json,
    Csv,
}

fn parse_format(s: &str) -> Result<Format, UsageError> {
    match s {
        "text" => Ok(Format::Text),
        "json" => Ok(Format::Json),
        "csv" => Ok(Format::Csv),
        other => Err(UsageError::new(format!(
            "--format must be text, json, or csv, got `{other}`"
        ))),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum VariantSel {
    V1,
    V2,
    Min,
    Theorem2,
}

fn parse_variant(s: &str) -> Result<VariantSel, UsageError> {
    match s {
        "v1" => Ok(VariantSel::V1),
        "v2" => Ok(VariantSel::V2),
        "min" => Ok(VariantSel::Min),
        "theorem2" => Ok(VariantSel::Theorem2),
        other => Err(UsageError::new(format!(
            "--variant must be v1, v2, min, or theorem2, got `{other}`"
        ))),
    }
}

fn parse_mode(s: &str) -> Result<Rho12Mode, UsageError> {
    match s {
        "zero" => Ok(Rho12Mode::Zero),
        "joint" => Ok(Rho12Mode::Joint),
        other => Err(UsageError::new(format!(
            "--rho12-mode must be zero or joint, got `{other}`"
        ))),
    }
}

fn build_optimizer(
    r: &Resolve,
    opt: &OptimizerFlags,
    grid_default: f64,
    mode: Rho12Mode,
) -> Result<OptimizerConfig, UsageError> {
    let grid = r.f64(opt.grid, "grid", grid_default)?;
    let refine = r.f64(opt.refine, "refine", 1e-6)?;
    let base = parse_log_base(&r.string(opt.log_base.clone(), "log-base", "2"))?;
    if !(grid.is_finite() && grid > 0.0 && grid <= 0.5) {
        return Err(UsageError::new(format!(
            "--grid must lie in (0, 0.5], got {grid}"
        )));
    }
    if !(refine.is_finite() && refine > 0.0 && refine <= grid) {
        return Err(UsageError::new(format!(
            "--refine must lie in (0, --grid], got {refine}"
        )));
    }
    Ok(OptimizerConfig::new(grid, refine, base, mode)?)
}

/// Shortest-round-trip decimal capped at 12 significant digits.
fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let capped: f64 = format!("{x:.11e}")
        .parse()
        .expect("formatted float reparses");
    format!("{capped}")
}

fn unit_suffix(base: LogBase) -> &'static str {
    match base {
        LogBase::Two => "bits",
        LogBase::E => "nats",
    }
}

fn value_key(base: LogBase) -> &'static str {
    match base {
        LogBase::Two => "value_bits",
        LogBase::E => "value_nats",
    }
}

fn pairs_field(r: &BoundResult) -> String {
    r.minimizer_pairs
        .iter()
        .map(|c| format!("{},{}", c.n, c.m))
        .collect::<Vec<_>>()
        .join(";")
}

fn pairs_json(r: &BoundResult) -> String {
    let inner = r
        .minimizer_pairs
        .iter()
        .map(|c| format!("[{},{}]", c.n, c.m))
        .collect::<Vec<_>>()
        .join(",");
    format!("[{inner}]")
}

fn push_result_text(out: &mut String, r: &BoundResult, base: LogBase) {
    let _ = writeln!(out, "variant: {}", r.variant.name());
    let _ = writeln!(out, "{}: {}", value_key(base), fmt_f64(r.value));
    let _ = writeln!(out, "minimizer_pairs: {}", pairs_field(r));
    let _ = writeln!(out, "rho1: {}", fmt_f64(r.argmax_corr.rho1));
    let _ = writeln!(out, "rho2: {}", fmt_f64(r.argmax_corr.rho2));
    let _ = writeln!(out, "rho12: {}", fmt_f64(r.argmax_corr.rho12));
    let _ = writeln!(out, "grid_step: {}", fmt_f64(r.solver_meta.grid_step));
    let _ = writeln!(out, "refine_tol: {}", fmt_f64(r.solver_meta.refine_tol));
    let _ = writeln!(out, "evaluations: {}", r.solver_meta.evaluations);
}

/// JSON object for one result; `extra` is spliced in before the closing
/// brace as additional `"key":value` members.
fn result_json(r: &BoundResult, base: LogBase, extra: Option<&str>) -> String {
    let mut s = format!(
        "{{\"{}\":{},\"variant\":\"{}\",\"minimizer_pairs\":{},\"rho\":{{\"rho1\":{},\"rho2\":{},\"rho12\":{}}},\"solver_meta\":{{\"grid_step\":{},\"refine_tol\":{},\"evaluations\":{}}}",
        value_key(base),
        fmt_f64(r.value),
        r.variant.name(),
        pairs_json(r),
        fmt_f64(r.argmax_corr.rho1),
        fmt_f64(r.argmax_corr.rho2),
        fmt_f64(r.argmax_corr.rho12),
        fmt_f64(r.solver_meta.grid_step),
        fmt_f64(r.solver_meta.refine_tol),
        r.solver_meta.evaluations,
    );
    if let Some(extra) = extra {
        s.push(',');
        s.push_str(extra);
    }
    s.push('}');
    s
}

const RESULT_CSV_COLUMNS: [&str; 9] = [
    "variant",
    "value",
    "minimizer_pairs",
    "rho1",
    "rho2",
    "rho12",
    "grid_step",
    "refine_tol",
    "evaluations",
];

fn result_csv_record(r: &BoundResult) -> Vec<String> {
    vec![
        r.variant.name().to_string(),
        fmt_f64(r.value),
        pairs_field(r),
        fmt_f64(r.argmax_corr.rho1),
        fmt_f64(r.argmax_corr.rho2),
        fmt_f64(r.argmax_corr.rho12),
        fmt_f64(r.solver_meta.grid_step),
        fmt_f64(r.solver_meta.refine_tol),
        r.solver_meta.evaluations.to_string(),
    ]
}

fn not_applicable_csv_record(variant: &str) -> Vec<String> {
    let mut rec = vec![variant.to_string(), "n/a".to_string()];
    rec.extend(std::iter::repeat(String::new()).take(7));
    rec
}

fn csv_table(header: &[&str], rows: Vec<Vec<String>>) -> Result<String, UsageError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)
        .and_then(|_| rows.iter().try_for_each(|row| w.write_record(row)))
        .map_err(|e| UsageError::new(format!("csv: {e}")))?;
    let bytes = w
        .into_inner()
        .map_err(|e| UsageError::new(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| UsageError::new(format!("csv: {e}")))
}

fn render_single(r: &BoundResult, base: LogBase, format: Format) -> Result<String, UsageError> {
    match format {
        Format::Text => {
            let mut out = String::new();
            push_result_text(&mut out, r, base);
            Ok(out)
        }
        Format::Json => Ok(result_json(r, base, None) + "\n"),
        Format::Csv => {
            let mut header = RESULT_CSV_COLUMNS;
            header[1] = value_key(base);
            csv_table(&header, vec![result_csv_record(r)])
        }
    }
}

fn cmd_diamond(a: DiamondArgs, file: &BTreeMap<String, String>) -> Result<String, UsageError> {
    let r = Resolve { file };
    let relays = ensure_relays(r.usize_required(a.relays, "relays")?)?;
    let r1 = ensure_gain(r.f64_required(a.r1, "r1")?, "r1")?;
    let r2 = ensure_gain(r.f64_required(a.r2, "r2")?, "r2")?;
    let format = parse_format(&r.string(a.format, "format", "text"))?;
    let cfg = build_optimizer(&r, &a.opt, 1e-3, Rho12Mode::Zero)?;
    let res = nd_bound(relays, r1, r2, &cfg)?;
    render_single(&res, cfg.log_base, format)
}

struct LayeredInputs {
    relays: usize,
    r1: f64,
    r2: f64,
    r3: f64,
    variant: VariantSel,
    cfg: OptimizerConfig,
}

/// All bound expressions entering the `min` variant, plus the reported
/// minimum itself.
struct MinParts {
    v1: BoundResult,
    v2: BoundResult,
    mu: BoundResult,
    min: BoundResult,
}

fn compute_min_parts(inp: &LayeredInputs) -> Result<MinParts, UsageError> {
    let (relays, r1, r2, r3) = (inp.relays, inp.r1, inp.r2, inp.r3);
    Ok(MinParts {
        v1: layered_bound(relays, r1, r2, r3, Lemma2Variant::V1, &inp.cfg)?,
        v2: layered_bound(relays, r1, r2, r3, Lemma2Variant::V2, &inp.cfg)?,
        mu: special_mu_bound(relays, r1, r2, r3, &inp.cfg)?,
        min: layered_bound(relays, r1, r2, r3, Lemma2Variant::Min, &inp.cfg)?,
    })
}

fn theorem2_pair_lines(out: &mut String, th: &Theorem2Results) {
    for p in &th.per_pair {
        let v2 = match p.v2_value {
            Some(v) => fmt_f64(v),
            // Second-variant constant needs a nonempty conditioned side.
            None => "n/a".to_string(),
        };
        let _ = writeln!(
            out,
            "pair {},{}: theorem2_v1={} theorem2_v2={}",
            p.pair.n,
            p.pair.m,
            fmt_f64(p.v1_value),
            v2
        );
    }
}

fn theorem2_pairs_json(th: &Theorem2Results) -> String {
    let rows: Vec<String> = th
        .per_pair
        .iter()
        .map(|p| {
            let v2 = match p.v2_value {
                Some(v) => fmt_f64(v),
                None => "null".to_string(),
            };
            format!(
                "{{\"pair\":[{},{}],\"theorem2_v1\":{},\"theorem2_v2\":{}}}",
                p.pair.n,
                p.pair.m,
                fmt_f64(p.v1_value),
                v2
            )
        })
        .collect();
    format!("[{}]", rows.join(","))
}

fn cmd_layered(a: LayeredArgs, file: &BTreeMap<String, String>) -> Result<String, UsageError> {
    let r = Resolve { file };
    let relays = ensure_relays(r.usize_required(a.relays, "relays")?)?;
    let r1 = ensure_gain(r.f64_required(a.r1, "r1")?, "r1")?;
    let r2 = ensure_gain(r.f64_required(a.r2, "r2")?, "r2")?;
    let r3 = ensure_gain(r.f64_required(a.r3, "r3")?, "r3")?;
    let variant = parse_variant(&r.string(a.variant, "variant", "min"))?;
    let mode = parse_mode(&r.string(a.rho12_mode, "rho12-mode", "zero"))?;
    let format = parse_format(&r.string(a.format, "format", "text"))?;
    let cfg = build_optimizer(&r, &a.opt, 1e-3, mode)?;
    let base = cfg.log_base;
    let inp = LayeredInputs {
        relays,
        r1,
        r2,
        r3,
        variant,
        cfg,
    };
    match inp.variant {
        VariantSel::V1 | VariantSel::V2 => {
            let v = if inp.variant == VariantSel::V1 {
                Lemma2Variant::V1
            } else {
                Lemma2Variant::V2
            };
            let res = layered_bound(relays, r1, r2, r3, v, &inp.cfg)?;
            render_single(&res, base, format)
        }
        VariantSel::Min => {
            let parts = compute_min_parts(&inp)?;
            match format {
                Format::Text => {
                    let mut out = String::new();
                    let unit = unit_suffix(base);
                    let _ = writeln!(out, "lemma2_v1_{unit}: {}", fmt_f64(parts.v1.value));
                    let _ = writeln!(out, "lemma2_v2_{unit}: {}", fmt_f64(parts.v2.value));
                    let _ = writeln!(out, "special_mu_{unit}: {}", fmt_f64(parts.mu.value));
                    push_result_text(&mut out, &parts.min, base);
                    Ok(out)
                }
                Format::Json => {
                    let extra = format!(
                        "\"components\":{{\"lemma2_v1\":{},\"lemma2_v2\":{},\"special_mu\":{}}}",
                        fmt_f64(parts.v1.value),
                        fmt_f64(parts.v2.value),
                        fmt_f64(parts.mu.value),
                    );
                    Ok(result_json(&parts.min, base, Some(&extra)) + "\n")
                }
                Format::Csv => {
                    let mut header = RESULT_CSV_COLUMNS;
                    header[1] = value_key(base);
                    csv_table(
                        &header,
                        vec![
                            result_csv_record(&parts.v1),
                            result_csv_record(&parts.v2),
                            result_csv_record(&parts.mu),
                            result_csv_record(&parts.min),
                        ],
                    )
                }
            }
        }
        VariantSel::Theorem2 => {
            let lay = layered_bound(relays, r1, r2, r3, Lemma2Variant::Min, &inp.cfg)?;
            let th = theorem2_bound(relays, r1, r2, r3, &inp.cfg)?;
            let ordering = if lay.value <= th.best().value {
                "lemma2_min<=theorem2_min"
            } else {
                "theorem2_min<lemma2_min"
            };
            match format {
                Format::Text => {
                    let mut out = String::new();
                    push_result_text(&mut out, &lay, base);
                    push_result_text(&mut out, &th.v1, base);
                    match &th.v2 {
                        Some(v2) => push_result_text(&mut out, v2, base),
                        None => {
                            let _ = writeln!(out, "variant: theorem2_v2");
                            let _ = writeln!(out, "{}: n/a", value_key(base));
                        }
                    }
                    theorem2_pair_lines(&mut out, &th);
                    let _ = writeln!(out, "ordering: {ordering}");
                    Ok(out)
                }
                Format::Json => {
                    let v2 = match &th.v2 {
                        Some(v2) => result_json(v2, base, None),
                        None => "null".to_string(),
                    };
                    Ok(format!(
                        "{{\"lemma2_min\":{},\"theorem2_v1\":{},\"theorem2_v2\":{},\"per_pair\":{},\"ordering\":\"{}\"}}\n",
                        result_json(&lay, base, None),
                        result_json(&th.v1, base, None),
                        v2,
                        theorem2_pairs_json(&th),
                        ordering,
                    ))
                }
                Format::Csv => {
                    let mut header = RESULT_CSV_COLUMNS;
                    header[1] = value_key(base);
                    let mut rows = vec![result_csv_record(&lay), result_csv_record(&th.v1)];
                    rows.push(match &th.v2 {
                        Some(v2) => result_csv_record(v2),
                        None => not_applicable_csv_record("theorem2_v2"),
                    });
                    csv_table(&header, rows)
                }
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum SweepParam {
    R1,
    R2,
    R3,
    Relays,
}

impl SweepParam {
    fn name(self) -> &'static str {
        match self {
            SweepParam::R1 => "r1",
            SweepParam::R2 => "r2",
            SweepParam::R3 => "r3",
            SweepParam::Relays => "N",
        }
    }
}

fn parse_param(s: &str) -> Result<SweepParam, UsageError> {
    match s {
        "r1" => Ok(SweepParam::R1),
        "r2" => Ok(SweepParam::R2),
        "r3" => Ok(SweepParam::R3),
        "N" | "n" => Ok(SweepParam::Relays),
        other => Err(UsageError::new(format!(
            "--param must be r1, r2, r3, or N, got `{other}`"
        ))),
    }
}

fn sweep_values(
    param: SweepParam,
    from: f64,
    to: f64,
    steps: usize,
    log_scale: bool,
) -> Result<Vec<f64>, UsageError> {
    if !(from.is_finite() && to.is_finite() && from < to) {
        return Err(UsageError::new(format!(
            "--from must be less than --to, got {from} and {to}"
        )));
    }
    if steps < 2 {
        return Err(UsageError::new("--steps must be at least 2"));
    }
    if log_scale && from <= 0.0 {
        return Err(UsageError::new("--scale log requires --from > 0"));
    }
    let k = (steps - 1) as f64;
    let values: Vec<f64> = (0..steps)
        .map(|i| {
            let t = i as f64 / k;
            if log_scale {
                (from.ln() + t * (to.ln() - from.ln())).exp()
            } else {
                from + t * (to - from)
            }
        })
        .collect();
    match param {
        SweepParam::Relays => {
            for &v in &values {
                if (v - v.round()).abs() > 1e-9 || v.round() < 1.0 {
                    return Err(UsageError::new(format!(
                        "--param N requires integer sweep values of at least 1, got {v}"
                    )));
                }
            }
        }
        _ => {
            if from <= 0.0 {
                return Err(UsageError::new("--from must be positive for gain sweeps"));
            }
        }
    }
    Ok(values)
}

fn cmd_sweep(a: SweepArgs, file: &BTreeMap<String, String>) -> Result<String, UsageError> {
    let r = Resolve { file };
    let param = parse_param(&r.string(a.param, "param", ""))?;
    let from = r.f64_required(a.from, "from")?;
    let to = r.f64_required(a.to, "to")?;
    let steps = r.usize_required(a.steps, "steps")?;
    let scale = r.string(a.scale, "scale", "linear");
    let log_scale = match scale.as_str() {
        "linear" => false,
        "log" => true,
        other => {
            return Err(UsageError::new(format!(
                "--scale must be linear or log, got `{other}`"
            )))
        }
    };
    let variant = parse_variant(&r.string(a.variant, "variant", "min"))?;
    let mode = parse_mode(&r.string(a.rho12_mode, "rho12-mode", "zero"))?;
    let cfg = build_optimizer(&r, &a.opt, 1e-3, mode)?;
    let base = cfg.log_base;

    let values = sweep_values(param, from, to, steps, log_scale)?;
    let relays = if param == SweepParam::Relays {
        1
    } else {
        ensure_relays(r.usize_required(a.relays, "relays")?)?
    };
    let need = |flag: Option<f64>, key: &str, swept: SweepParam| -> Result<f64, UsageError> {
        if param == swept {
            // Placeholder; replaced by the swept value per row.
            Ok(1.0)
        } else {
            ensure_gain(r.f64_required(flag, key)?, key)
        }
    };
    let r1 = need(a.r1, "r1", SweepParam::R1)?;
    let r2 = need(a.r2, "r2", SweepParam::R2)?;
    let r3 = need(a.r3, "r3", SweepParam::R3)?;

    use rayon::prelude::*;
    let rows: Result<Vec<Vec<String>>, UsageError> = values
        .par_iter()
        .map(|&x| {
            let (mut n, mut g1, mut g2, mut g3) = (relays, r1, r2, r3);
            match param {
                SweepParam::R1 => g1 = x,
                SweepParam::R2 => g2 = x,
                SweepParam::R3 => g3 = x,
                SweepParam::Relays => n = x.round() as usize,
            }
            let res = match variant {
                VariantSel::V1 => layered_bound(n, g1, g2, g3, Lemma2Variant::V1, &cfg)?,
                VariantSel::V2 => layered_bound(n, g1, g2, g3, Lemma2Variant::V2, &cfg)?,
                VariantSel::Min => layered_bound(n, g1, g2, g3, Lemma2Variant::Min, &cfg)?,
                VariantSel::Theorem2 => {
                    let th = theorem2_bound(n, g1, g2, g3, &cfg)?;
                    th.best().clone()
                }
            };
            let mut record = vec![fmt_f64(x)];
            record.extend(result_csv_record(&res).into_iter().take(6));
            Ok(record)
        })
        .collect();

    let header = [
        param.name(),
        "variant",
        value_key(base),
        "minimizer_pairs",
        "rho1",
        "rho2",
        "rho12",
    ];
    csv_table(&header, rows?)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Suite {
    All,
    Oracle,
    Maxima,
    Lemma3,
    Limits,
    Timeshare,
    Eigen,
}

fn parse_suite(s: &str) -> Result<Suite, UsageError> {
    match s {
        "all" => Ok(Suite::All),
        "oracle" => Ok(Suite::Oracle),
        "maxima" => Ok(Suite::Maxima),
        "lemma3" => Ok(Suite::Lemma3),
        "limits" => Ok(Suite::Limits),
        "timeshare" => Ok(Suite::Timeshare),
        "eigen" => Ok(Suite::Eigen),
        other => Err(UsageError::new(format!(
            "--suite must be all, oracle, maxima, lemma3, limits, timeshare, or eigen, got `{other}`"
        ))),
    }
}

fn cmd_verify(
    a: VerifyArgs,
    file: &BTreeMap<String, String>,
) -> Result<(String, bool), UsageError> {
    let r = Resolve { file };
    let suite = parse_suite(&r.string(a.suite, "suite", "all"))?;
    let seed = r.u64(a.seed, "seed", 42)?;
    let samples = r.usize(a.samples, "samples", 200)?;
    if samples == 0 {
        return Err(UsageError::new("--samples must be positive"));
    }
    let nmax = r.usize(a.nmax, "nmax", 3)?;
    if nmax == 0 {
        return Err(UsageError::new("--nmax must be at least 1"));
    }
    let strict = r.bool(a.strict, "strict")?;
    let grid = r.f64(a.grid, "grid", 1e-2)?;
    let refine = r.f64(a.refine, "refine", 1e-6)?;
    let cfg = OptimizerConfig::new(grid, refine, LogBase::Two, Rho12Mode::Joint)
        .map_err(|e| UsageError::new(format!("--grid/--refine: {e}")))?;

    let selected = |s: Suite| suite == Suite::All || suite == s;
    let mut reports: Vec<VerifyReport> = Vec::new();
    if selected(Suite::Oracle) {
        reports.push(verify_oracle(nmax, samples, seed)?);
    }
    if selected(Suite::Maxima) {
        reports.push(verify_maxima(nmax, samples, seed)?);
    }
    if selected(Suite::Lemma3) {
        // Joint scans above three relays per layer get prohibitively dense.
        reports.push(verify_lemma3(nmax.min(3), &LEMMA3_GAINS, &cfg)?);
    }
    if selected(Suite::Limits) {
        reports.push(verify_limits(nmax)?);
    }
    if selected(Suite::Timeshare) {
        reports.push(verify_timeshare_onesided(nmax.min(2), samples, seed, &cfg)?);
    }
    if selected(Suite::Eigen) {
        reports.push(verify_eigen(nmax.min(8), samples, seed)?);
    }

    let mut pass = true;
    let mut out = String::new();
    for rep in &reports {
        out.push_str(&rep.render());
        out.push('\n');
        if !rep.pass() {
            pass = false;
        }
        if strict && rep.suite == "timeshare" && !rep.findings.is_empty() {
            pass = false;
        }
    }
    let _ = writeln!(out, "overall: {}", if pass { "pass" } else { "fail" });
    Ok((out, pass))
}
