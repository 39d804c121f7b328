//! Command-line front end: `key=value` configuration, dispatch and output.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Arg, ArgAction, ArgMatches, Command};

use crate::error::{Error, Result};
use crate::experiments::{
    run_experiment, ExperimentConfig, MarginalMode, SubordinationTarget, TrimRule,
};
use crate::lrd::{CoefficientSpec, InnovationSpec, LrdPath, PathGenerator, SlowlyVarying};
use crate::rng::stream_index;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "LRDQ_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "lrdq_out";
pub const DEFAULT_SIMULATE_N: usize = 1024;

/// Every registered command.
pub const COMMANDS: [&str; 14] = [
    "simulate",
    "covcheck",
    "rates",
    "reduce",
    "reduce-p2",
    "bk-uniform",
    "bk-general",
    "weak",
    "lil",
    "trim",
    "band",
    "coverage",
    "subord",
    "cbp",
];

/// Configuration keys with their help text; each is also a `--key` flag.
pub const KEYS: [(&str, &str); 29] = [
    ("command", "command to run"),
    ("beta", "memory exponent in (1/2, 1)"),
    ("l0", "slowly varying factor: const, const(s) or logpow(a)"),
    (
        "innovations",
        "innovation law: normal, laplace, pareto(alpha) or pareto(alpha,width)",
    ),
    ("marginal", "marginal of X: exact, oracle or oracle(m)"),
    (
        "n_grid",
        "sample sizes: comma list (2^k allowed) or dyadic range 2^a..2^b",
    ),
    ("reps", "Monte Carlo replications"),
    ("seed", "run seed"),
    ("y0", "pointwise target in (0, 1)"),
    ("mu", "weight exponent offset"),
    (
        "c0",
        "constant of the trimmed range (C0 delta_n, 1 - C0 delta_n)",
    ),
    ("nu", "band exponent"),
    ("alpha", "band level"),
    (
        "trim",
        "trimming: power(e) for n^-e, fixed(l), or a number l",
    ),
    ("p", "expansion order"),
    ("eps", "relative tail-variance truncation tolerance"),
    ("lag_factor", "truncation cap K <= lag_factor * n"),
    ("grid_points", "uniform points of the evaluation grid"),
    ("tail_depth", "dyadic tail refinement depth of the grid"),
    ("bootstrap", "bootstrap resamples for median intervals"),
    ("lil_min_log2", "first LIL checkpoint exponent"),
    ("lil_max_log2", "last LIL checkpoint exponent"),
    ("lil_max_lag", "truncation cap of the LIL path"),
    (
        "target",
        "subordination target: exponential, identity or logistic",
    ),
    ("threads", "worker threads (results do not depend on it)"),
    ("n", "path length for simulate"),
    ("out", "output directory"),
    ("csv", "write the CSV file (true/false)"),
    ("summary", "write the summary file (true/false)"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: String,
    pub config: ExperimentConfig,
    /// Path length of `simulate`.
    pub n: usize,
    pub out_dir: PathBuf,
    pub csv: bool,
    pub summary: bool,
}

/// Splits `key=value` text into pairs; blank lines and `#` comments are skipped
/// and several pairs may share a line.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        for token in line.split_whitespace() {
            pairs.push(split_pair(token)?);
        }
    }
    Ok(pairs)
}

/// Pairs from the parameter echo on the first line of an emitted CSV file.
pub fn parse_echo(line: &str) -> Result<Vec<(String, String)>> {
    let body = line
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| Error::Config("parameter echo must start with '#'".into()))?;
    body.split_whitespace()
        .map(|t| {
            let (k, v) = split_pair(t)?;
            Ok(if k == "experiment" {
                ("command".to_string(), v)
            } else {
                (k, v)
            })
        })
        .collect()
}

fn split_pair(token: &str) -> Result<(String, String)> {
    let (k, v) = token
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("expected key=value, got '{token}'")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// Builds a validated [`RunConfig`]; later pairs override earlier ones, so
/// file pairs should precede flag pairs.
pub fn parse_config(pairs: &[(String, String)]) -> Result<RunConfig> {
    let mut run = RunConfig {
        command: String::new(),
        config: ExperimentConfig::default(),
        n: DEFAULT_SIMULATE_N,
        out_dir: default_out_dir(),
        csv: true,
        summary: true,
    };
    for (k, v) in pairs {
        apply(&mut run, k, v)?;
    }
    if run.command.is_empty() {
        return Err(Error::Config(format!(
            "no command given; expected one of {}",
            COMMANDS.join(", ")
        )));
    }
    if run.command == "simulate" {
        // Simulation uses only the model keys; Monte Carlo settings are irrelevant.
        let mut probe = run.config.clone();
        probe.n_grid = vec![run.n.max(2)];
        probe.validate()?;
    } else {
        run.config.validate()?;
    }
    Ok(run)
}

fn apply(run: &mut RunConfig, key: &str, v: &str) -> Result<()> {
    let cfg = &mut run.config;
    match key {
        "command" => {
            if !COMMANDS.contains(&v) {
                return Err(Error::Config(format!(
                    "unknown command '{v}'; expected one of {}",
                    COMMANDS.join(", ")
                )));
            }
            run.command = v.to_string();
        }
        "beta" => cfg.beta = real(key, v)?,
        "l0" => cfg.slowly_varying = slowly_varying(v)?,
        "innovations" => cfg.innovation = innovations(v)?,
        "marginal" => cfg.marginal_mode = marginal(v)?,
        "n_grid" => cfg.n_grid = grid(v)?,
        "reps" => cfg.replications = count(key, v)?,
        "seed" => cfg.seed = count(key, v)? as u64,
        "y0" => cfg.y0 = real(key, v)?,
        "mu" => cfg.mu = real(key, v)?,
        "c0" => cfg.c0 = real(key, v)?,
        "nu" => cfg.nu = real(key, v)?,
        "alpha" => cfg.alpha_level = real(key, v)?,
        "trim" => cfg.trim = trim(v)?,
        "p" => cfg.p = small(key, v)?,
        "eps" => cfg.truncation_eps = real(key, v)?,
        "lag_factor" => cfg.lag_factor = count(key, v)? as u64,
        "grid_points" => cfg.grid_points = count(key, v)?,
        "tail_depth" => cfg.tail_depth = small(key, v)?,
        "bootstrap" => cfg.bootstrap_resamples = count(key, v)?,
        "lil_min_log2" => cfg.lil_min_log2 = small(key, v)?,
        "lil_max_log2" => cfg.lil_max_log2 = small(key, v)?,
        "lil_max_lag" => cfg.lil_max_lag = count(key, v)? as u64,
        "target" => cfg.target = SubordinationTarget::try_from(v)?,
        "threads" => cfg.threads = Some(count(key, v)?),
        "n" => run.n = count(key, v)?,
        "out" => run.out_dir = PathBuf::from(v),
        "csv" => run.csv = flag(key, v)?,
        "summary" => run.summary = flag(key, v)?,
        other => return Err(Error::Config(format!("unknown key '{other}'"))),
    }
    Ok(())
}

fn bad(key: &str, v: &str, what: &str) -> Error {
    Error::Config(format!("{key}: cannot parse '{v}' as {what}"))
}

fn real(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v.parse().map_err(|_| bad(key, v, "a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(bad(key, v, "a finite number"))
    }
}

/// Nonnegative integer, also accepting `2^k`.
fn count(key: &str, v: &str) -> Result<usize> {
    if let Some(e) = v.strip_prefix("2^") {
        let e: u32 = e.parse().map_err(|_| bad(key, v, "a power of two"))?;
        return 1usize
            .checked_shl(e)
            .filter(|_| e < usize::BITS)
            .ok_or_else(|| bad(key, v, "a representable power of two"));
    }
    v.parse().map_err(|_| bad(key, v, "a nonnegative integer"))
}

fn small(key: &str, v: &str) -> Result<u32> {
    v.parse()
        .map_err(|_| bad(key, v, "a small nonnegative integer"))
}

fn flag(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(bad(key, v, "a boolean")),
    }
}

/// `name(arg, ...)` or a bare `name`.
fn call(v: &str) -> (&str, Vec<&str>) {
    match v.split_once('(') {
        Some((name, rest)) => {
            let inner = rest.strip_suffix(')').unwrap_or(rest);
            (
                name,
                inner
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .collect(),
            )
        }
        None => (v, Vec::new()),
    }
}

fn slowly_varying(v: &str) -> Result<SlowlyVarying> {
    match call(v) {
        ("const", a) if a.is_empty() => Ok(SlowlyVarying::Constant { scale: 1.0 }),
        ("const", a) if a.len() == 1 => Ok(SlowlyVarying::Constant {
            scale: real("l0", a[0])?,
        }),
        ("logpow", a) if a.len() == 1 => Ok(SlowlyVarying::LogPower {
            a: real("l0", a[0])?,
        }),
        _ => Err(bad("l0", v, "const, const(s) or logpow(a)")),
    }
}

fn innovations(v: &str) -> Result<InnovationSpec> {
    match call(v) {
        ("normal" | "gaussian", a) if a.is_empty() => Ok(InnovationSpec::standard_normal()),
        ("laplace", a) if a.is_empty() => Ok(InnovationSpec::double_exponential()),
        ("pareto", a) if a.len() == 1 => {
            InnovationSpec::pareto(real("innovations", a[0])?, 1.0, true)
        }
        ("pareto", a) if a.len() == 2 => {
            InnovationSpec::pareto(real("innovations", a[0])?, real("innovations", a[1])?, true)
        }
        _ => Err(bad(
            "innovations",
            v,
            "normal, laplace, pareto(alpha) or pareto(alpha,width)",
        )),
    }
}

fn marginal(v: &str) -> Result<MarginalMode> {
    match call(v) {
        ("exact", a) if a.is_empty() => Ok(MarginalMode::Exact),
        ("oracle", a) if a.is_empty() => Ok(MarginalMode::Oracle {
            sample_size: 200_000,
        }),
        ("oracle", a) if a.len() == 1 => Ok(MarginalMode::Oracle {
            sample_size: count("marginal", a[0])?,
        }),
        _ => Err(bad("marginal", v, "exact, oracle or oracle(m)")),
    }
}

fn grid(v: &str) -> Result<Vec<usize>> {
    if let Some((a, b)) = v.split_once("..") {
        let (lo, hi) = (count("n_grid", a)?, count("n_grid", b)?);
        if lo == 0 || hi < lo {
            return Err(bad("n_grid", v, "a dyadic range lo..hi with 0 < lo <= hi"));
        }
        return Ok(std::iter::successors(Some(lo), |&n| n.checked_mul(2))
            .take_while(|&n| n <= hi)
            .collect());
    }
    v.split(',').map(|t| count("n_grid", t.trim())).collect()
}

fn trim(v: &str) -> Result<TrimRule> {
    match call(v) {
        ("power", a) if a.len() == 1 => Ok(TrimRule::Power(real("trim", a[0])?)),
        ("fixed", a) if a.len() == 1 => Ok(TrimRule::Fixed(real("trim", a[0])?)),
        (x, a) if a.is_empty() => Ok(TrimRule::Fixed(real("trim", x)?)),
        _ => Err(bad("trim", v, "power(e), fixed(l) or a number")),
    }
}

/// The `clap` command: a positional command, `--config FILE`, `--replay CSV`
/// and one `--key VALUE` flag per configuration key.
pub fn command_line() -> Command {
    let mut cmd = Command::new("lrdq")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Simulation lab for quantile and Bahadur-Kiefer processes of long-range dependent linear sequences")
        .after_help(format!(
            "Commands: {}\nFlags override the config file, which overrides a replayed echo. \
             Output goes to --out, else ${OUT_DIR_ENV}, else ./{DEFAULT_OUT_DIR}.",
            COMMANDS.join(", ")
        ))
        .arg(Arg::new("positional").value_name("COMMAND").index(1))
        .arg(Arg::new("config").long("config").value_name("FILE").help("line-oriented key=value file"))
        .arg(Arg::new("replay").long("replay").value_name("CSV").help("reuse the parameter echo of an emitted file"));
    for (key, help) in KEYS {
        cmd = cmd.arg(
            Arg::new(key)
                .long(key)
                .value_name("VALUE")
                .help(help)
                .action(ArgAction::Set),
        );
    }
    cmd
}

/// Parses process arguments into a [`RunConfig`].
pub fn parse_args<I, T>(args: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let m = command_line()
        .try_get_matches_from(args)
        .map_err(|e| Error::Config(e.to_string()))?;
    parse_config(&collect_pairs(&m)?)
}

fn collect_pairs(m: &ArgMatches) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    if let Some(path) = m.get_one::<String>("replay") {
        let text = std::fs::read_to_string(path)?;
        let first = text.lines().next().unwrap_or_default();
        pairs.extend(parse_echo(first)?);
    }
    if let Some(path) = m.get_one::<String>("config") {
        pairs.extend(parse_pairs(&std::fs::read_to_string(path)?)?);
    }
    if let Some(c) = m.get_one::<String>("positional") {
        pairs.push(("command".into(), c.clone()));
    }
    for (key, _) in KEYS {
        if let Some(v) = m.get_one::<String>(key) {
            pairs.push((key.to_string(), v.clone()));
        }
    }
    Ok(pairs)
}

/// Outcome of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// Every acceptance window of the command passed.
    pub passed: bool,
    pub files: Vec<PathBuf>,
    /// Text shown on standard output.
    pub text: String,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

/// Runs the configured command and writes its outputs.
pub fn dispatch(run: &RunConfig) -> Result<Outcome> {
    if run.csv || run.summary {
        std::fs::create_dir_all(&run.out_dir)?;
    }
    if run.command == "simulate" {
        return simulate(run);
    }
    let report = run_experiment(&run.command, &run.config)?;
    let files = report.write(&run.out_dir, run.csv, run.summary)?;
    Ok(Outcome {
        passed: report.passed(),
        files,
        text: report.summary(),
    })
}

/// The path written by `simulate`: normalised coefficients, truncation capped
/// at `lag_factor * n`, stream 0 of `seed`.
pub fn simulate_path(cfg: &ExperimentConfig, n: usize) -> Result<LrdPath> {
    let spec = CoefficientSpec::new(cfg.beta)?
        .with_slowly_varying(cfg.slowly_varying)
        .normalized(true)
        .with_truncation_eps(cfg.truncation_eps)
        .with_max_lag(Some(cfg.lag_factor.saturating_mul(n as u64)));
    let generator = PathGenerator::new(spec, cfg.innovation, n)?;
    Ok(generator.generate(cfg.seed, stream_index(0, 0)))
}

/// Path CSV `i,x` preceded by the parameter echo.
pub fn simulate_csv(cfg: &ExperimentConfig, n: usize) -> Result<String> {
    let path = simulate_path(cfg, n)?;
    let mut out = String::from("# experiment=simulate");
    for (k, v) in simulate_echo(cfg, n) {
        let _ = write!(out, " {k}={v}");
    }
    out.push_str("\ni,x\n");
    for (i, x) in path.x.iter().enumerate() {
        let _ = writeln!(out, "{},{x:.16e}", i + 1);
    }
    Ok(out)
}

fn simulate_echo(cfg: &ExperimentConfig, n: usize) -> Vec<(String, String)> {
    const MODEL_KEYS: [&str; 6] = ["beta", "l0", "innovations", "seed", "eps", "lag_factor"];
    let mut echo: Vec<_> = cfg
        .echo()
        .into_iter()
        .filter(|(k, _)| MODEL_KEYS.contains(&k.as_str()))
        .collect();
    echo.push(("n".into(), n.to_string()));
    echo
}

fn simulate(run: &RunConfig) -> Result<Outcome> {
    let csv = simulate_csv(&run.config, run.n)?;
    let mut files = Vec::new();
    let text = if run.csv {
        let p = run.out_dir.join("simulate.csv");
        std::fs::write(&p, &csv)?;
        files.push(p.clone());
        format!("wrote {} ({} observations)\n", p.display(), run.n)
    } else {
        csv
    };
    Ok(Outcome {
        passed: true,
        files,
        text,
    })
}

/// Full CLI run: parse, dispatch, report. Returns the process exit code:
/// 0 when every acceptance window passed, 1 when one failed, 2 on errors.
pub fn run_cli<I, T>(args: I, stdout: &mut impl Write, stderr: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let m = match command_line().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = write!(
                if e.use_stderr() {
                    stderr as &mut dyn Write
                } else {
                    stdout as &mut dyn Write
                },
                "{}",
                e.render()
            );
            return code;
        }
    };
    let result = collect_pairs(&m)
        .and_then(|p| parse_config(&p))
        .and_then(|run| dispatch(&run));
    match result {
        Ok(outcome) => {
            let _ = write!(stdout, "{}", outcome.text);
            for f in &outcome.files {
                let _ = writeln!(stderr, "wrote {}", f.display());
            }
            outcome.exit_code()
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}

/// Default output directory, honouring [`OUT_DIR_ENV`].
pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}
