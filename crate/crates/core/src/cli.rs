//! `squeezeflux` command line. Every command assembles its full output in
//! memory and writes it only on success.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::analysis::*;
use crate::error::Error;
use crate::flux::flux_profile;
use crate::genfun::{admissible, eta_rho, validate, GeneratingFunction};
use crate::suites::{oracle_csv, oracle_rows, run_suite};
use crate::{fmt17, PI};

#[derive(Debug, Parser)]
#[command(name = "squeezeflux", version, about = "Energy flux of conformally squeezed states and the switching bound")]
pub struct Cli {
    /// Reduced Planck constant (flux configs may carry their own)
    #[arg(long, global = true)]
    pub hbar: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the main output here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the flux of a serialized generating function
    Flux {
        /// generating-function JSON
        config: PathBuf,
        /// sample grid `lo:hi:n`
        #[arg(long, default_value = "-1:1:201", allow_hyphen_values = true)]
        grid: String,
        /// delta sidecar path (default `<out>.deltas.json`)
        #[arg(long)]
        deltas: Option<PathBuf>,
    },
    /// Run an invariant suite: modes, conformal, oracle, shock, minimizer, chain
    Verify { suite: String },
    /// Switching bound with its derivation steps
    Bound {
        #[arg(long = "t-s", allow_negative_numbers = true)]
        t_s: f64,
        #[arg(long, default_value_t = 2)]
        pol: u32,
    },
    /// Least compensating energy: closed form, numeric oracle, multiplier checks
    Minimize {
        #[arg(long = "e-n", allow_negative_numbers = true)]
        e_n: f64,
        #[arg(long, allow_negative_numbers = true)]
        l: f64,
    },
    /// Repeat a computation over a list of parameter values
    Sweep {
        #[arg(long, value_enum)]
        command: SweepCommand,
        /// swept input: t_s, E_n, L, hbar or polarizations
        #[arg(long)]
        param: String,
        /// `v1,v2,...` or a log-spaced range `a:b:n`
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long = "t-s", default_value_t = 1.0)]
        t_s: f64,
        #[arg(long = "e-n", default_value_t = 0.01)]
        e_n: f64,
        #[arg(long, default_value_t = 1.0)]
        l: f64,
        #[arg(long, default_value_t = 2)]
        pol: u32,
        /// add a wall_time column (breaks byte-level reproducibility)
        #[arg(long)]
        timing: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepCommand {
    /// bound_per_pol, bound_total from (t_s, polarizations)
    Bound,
    /// substituted bound at (t_s, E_n); independent of E_n
    Substituted,
    /// compensation lower bound at (E_n, L)
    Compensation,
    /// closed form against the numeric oracle at (E_n, L)
    Minimize,
    /// largest admissible negative energy at L
    Qi,
}

/// Failure with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn config(msg: impl Into<String>) -> Failure {
    Failure { code: 2, message: msg.into() }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::QuadratureFailure { .. }
            | Error::TruncationFailure(_)
            | Error::ExtrapolationDivergence { .. }
            | Error::OptimizerStall { .. } => 1,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

/// Output of a command and its exit code (0 or 1).
struct Emit {
    main: String,
    sidecar: Option<(PathBuf, String)>,
    code: i32,
}

/// Parse `args` (program name first), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli).and_then(|emit| write_outputs(&cli, emit)) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn write_outputs(cli: &Cli, emit: Emit) -> Result<i32, Failure> {
    let write = |p: &Path, s: &str| std::fs::write(p, s).map_err(|e| config(format!("cannot write {}: {e}", p.display())));
    match &cli.out {
        Some(p) => write(p, &emit.main)?,
        None => print!("{}", emit.main),
    }
    if let Some((p, s)) = emit.sidecar {
        write(&p, &s)?;
    }
    Ok(emit.code)
}

fn hbar_of(cli: &Cli) -> Result<f64, Failure> {
    let h = cli.hbar.unwrap_or(1.0);
    check_hbar(h)
}

fn check_hbar(h: f64) -> Result<f64, Failure> {
    if h > 0.0 && h.is_finite() {
        Ok(h)
    } else {
        Err(config(format!("hbar must be positive and finite, got {h}")))
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn execute(cli: &Cli) -> Result<Emit, Failure> {
    match &cli.command {
        Command::Flux { config: path, grid, deltas } => cmd_flux(cli, path, grid, deltas.as_deref()),
        Command::Verify { suite } => cmd_verify(cli, suite),
        Command::Bound { t_s, pol } => cmd_bound(cli, *t_s, *pol),
        Command::Minimize { e_n, l } => cmd_minimize(cli, *e_n, *l),
        Command::Sweep { command, param, values, t_s, e_n, l, pol, timing } => {
            let base = Inputs { t_s: *t_s, e_n: *e_n, l: *l, hbar: hbar_of(cli)?, polarizations: *pol as f64 };
            cmd_sweep(cli, *command, param, values, base, *timing)
        }
    }
}

/// `lo:hi:n`, n >= 1 points including both ends.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || config(format!("grid must be `lo:hi:n`, got `{text}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n == 0 || !lo.is_finite() || !hi.is_finite() || hi < lo || (n == 1 && hi != lo) {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n).map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect())
}

fn cmd_flux(cli: &Cli, path: &Path, grid: &str, deltas: Option<&Path>) -> Result<Emit, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| config(format!("cannot read {}: {e}", path.display())))?;
    let (f, doc_hbar) = GeneratingFunction::from_json(&text)?;
    let hbar = check_hbar(cli.hbar.or(doc_hbar).unwrap_or(1.0))?;
    let report = validate(&f);
    if !report.passed() {
        eprintln!("{}", pretty(&report).trim_end());
        return Err(config("generating function failed validation"));
    }
    let xs = parse_grid(grid)?;
    let p = flux_profile(&f, hbar)?;
    let sidecar_path = deltas.map(Path::to_path_buf).or_else(|| {
        cli.out.as_ref().map(|o| {
            let mut s = o.as_os_str().to_owned();
            s.push(".deltas.json");
            PathBuf::from(s)
        })
    });
    match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let csv = p.to_csv(&xs)?;
            if sidecar_path.is_none() {
                eprintln!("note: no --out or --deltas given; delta sidecar not written");
            }
            Ok(Emit { main: csv, sidecar: sidecar_path.map(|s| (s, p.deltas_json() + "\n")), code: 0 })
        }
        Format::Json => {
            let samples: Vec<[f64; 2]> = p.sample(&xs)?.into_iter().map(|(x, d)| [x, d]).collect();
            let weights: Vec<[f64; 2]> = p.deltas.iter().map(|d| [d.location, d.weight]).collect();
            let main = pretty(&json!({ "hbar": hbar, "samples": samples, "deltas": weights }));
            Ok(Emit { main, sidecar: deltas.map(|d| (d.to_path_buf(), p.deltas_json() + "\n")), code: 0 })
        }
    }
}

fn cmd_verify(cli: &Cli, suite: &str) -> Result<Emit, Failure> {
    let hbar = hbar_of(cli)?;
    let report = run_suite(suite, cli.seed, hbar)?;
    for c in report.checks.iter().filter(|c| !c.passed) {
        eprintln!("FAILED {}: observed {} (tolerance {})", c.name, c.observed, c.tolerance);
    }
    let code = if report.passed { 0 } else { 1 };
    let main = match cli.format.unwrap_or(Format::Json) {
        Format::Json => pretty(&report),
        Format::Csv if suite == "oracle" => oracle_csv(&oracle_rows(cli.seed, hbar)?),
        Format::Csv => {
            let mut s = String::from("name,tolerance,observed,passed\n");
            for c in &report.checks {
                s.push_str(&format!("{},{},{},{}\n", c.name, fmt17(c.tolerance), fmt17(c.observed), c.passed));
            }
            s
        }
    };
    Ok(Emit { main, sidecar: None, code })
}

fn steps_csv(steps: &[ChainStep]) -> String {
    let mut s = String::from("name,value\n");
    for st in steps {
        s.push_str(&format!("{},{}\n", st.name, fmt17(st.value)));
    }
    s
}

fn cmd_bound(cli: &Cli, t_s: f64, pol: u32) -> Result<Emit, Failure> {
    let report = gedanken_chain(t_s, hbar_of(cli)?, pol)?;
    let code = if report.passed() { 0 } else { 1 };
    let main = match cli.format.unwrap_or(Format::Json) {
        Format::Json => pretty(&report),
        Format::Csv => steps_csv(&report.steps),
    };
    Ok(Emit { main, sidecar: None, code })
}

#[derive(Debug, Clone, Serialize)]
pub struct MinimizeReport {
    #[serde(rename = "E_n")]
    pub e_n: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub hbar: f64,
    pub seed: u64,
    pub closed_form: f64,
    pub oracle: Option<OracleResult>,
    pub oracle_error: Option<String>,
    pub steps: Vec<ChainStep>,
    pub passed: bool,
}

fn checked(name: &str, value: f64, eq: &str, observed: f64, tolerance: f64) -> ChainStep {
    ChainStep {
        name: name.into(),
        value,
        paper_eq: eq.into(),
        check: Some(StepCheck { tolerance, observed, passed: observed <= tolerance }),
    }
}

fn plain(name: &str, value: f64, eq: &str) -> ChainStep {
    ChainStep { name: name.into(), value, paper_eq: eq.into(), check: None }
}

pub fn minimize_report(e_n: f64, l: f64, hbar: f64, seed: u64) -> crate::Result<MinimizeReport> {
    let p = MinimizerProblem::new(e_n, l, hbar);
    let closed = min_compensation_energy(&p)?;
    let weight = f_eta_delta_weight(e_n, l, hbar)?;
    let rel = |a: f64, b: f64| if a == b { 0.0 } else { ((a - b) / b).abs() };
    let mut steps = vec![
        plain("closed_form", closed, "E_min = E_n/(1 - 12 pi E_n L/hbar)"),
        checked("f_eta_delta_weight", weight, "-(hbar/24 pi) [f''] / f' at x = L", rel(weight, closed), 1e-12),
    ];
    if l > 0.0 && e_n > 0.0 {
        let f = crate::genfun::make_f_eta(e_n, l, hbar)?;
        let rho = eta_rho(e_n, l, hbar);
        let eta = eta_from_f(&f, l)?;
        steps.push(checked("eta_at_L", eta.eta_at_l, "eta(L) = 1/f'(L) - 1", eta.eta_at_l.abs(), 1e-12));
        let e0 = eta_left_limit(&f, 0.0)?;
        let want = (rho * l + 1.0).powi(2) - 1.0;
        steps.push(checked("eta_left_of_zero", e0, "eta(0-) = (rho L + 1)^2 - 1", rel(e0, want), 1e-12));
        let shift = casimir_shift(&f, l, hbar)?;
        let want = -hbar / (12.0 * PI) * rho * rho * l;
        steps.push(checked("casimir_shift", shift, "-(hbar/12 pi) rho^2 L", rel(shift, want), 1e-10));
    }
    let (oracle, oracle_error) = match numeric_min_oracle(&p, seed) {
        Ok(r) => {
            steps.push(checked(
                "oracle_not_below",
                r.energy,
                "E_oracle >= E_min - 1e-6",
                closed - r.energy,
                1e-6,
            ));
            let over = if closed > 0.0 { r.energy / closed - 1.0 } else { r.energy.abs() / hbar };
            let tol = if closed > 0.0 { 0.005 } else { 1e-9 };
            steps.push(checked("oracle_within_half_percent", r.energy, "E_oracle <= 1.005 E_min", over, tol));
            (Some(r), None)
        }
        Err(e) => (None, Some(format!("{}: {e}", e.kind()))),
    };
    let passed = oracle.is_some() && steps.iter().all(|s| s.check.as_ref().map_or(true, |c| c.passed));
    Ok(MinimizeReport { e_n, l, hbar, seed, closed_form: closed, oracle, oracle_error, steps, passed })
}

fn cmd_minimize(cli: &Cli, e_n: f64, l: f64) -> Result<Emit, Failure> {
    let r = minimize_report(e_n, l, hbar_of(cli)?, cli.seed)?;
    if let Some(e) = &r.oracle_error {
        eprintln!("oracle failed: {e}");
    }
    let code = if r.passed { 0 } else { 1 };
    let main = match cli.format.unwrap_or(Format::Json) {
        Format::Json => pretty(&r),
        Format::Csv => steps_csv(&r.steps),
    };
    Ok(Emit { main, sidecar: None, code })
}

// ---------------------------------------------------------------------------
// sweeps

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inputs {
    pub t_s: f64,
    pub e_n: f64,
    pub l: f64,
    pub hbar: f64,
    pub polarizations: f64,
}

impl Inputs {
    fn set(&mut self, param: &str, v: f64) {
        match param {
            "t_s" => self.t_s = v,
            "E_n" => self.e_n = v,
            "L" => self.l = v,
            "hbar" => self.hbar = v,
            "polarizations" => self.polarizations = v,
            _ => unreachable!("parameter checked before use"),
        }
    }

    fn get(&self, name: &str) -> f64 {
        match name {
            "t_s" => self.t_s,
            "E_n" => self.e_n,
            "L" => self.l,
            "hbar" => self.hbar,
            "polarizations" => self.polarizations,
            _ => unreachable!(),
        }
    }
}

impl SweepCommand {
    /// Inputs a record carries, in column order.
    pub fn inputs(self) -> &'static [&'static str] {
        match self {
            SweepCommand::Bound => &["t_s", "polarizations", "hbar"],
            SweepCommand::Substituted => &["t_s", "E_n", "hbar"],
            SweepCommand::Compensation | SweepCommand::Minimize => &["E_n", "L", "hbar"],
            SweepCommand::Qi => &["L", "hbar"],
        }
    }

    pub fn outputs(self) -> &'static [&'static str] {
        match self {
            SweepCommand::Bound => &["bound_per_pol", "bound_total"],
            SweepCommand::Substituted => &["substituted_bound", "ratio_to_bound"],
            SweepCommand::Compensation => &["lower_bound"],
            SweepCommand::Minimize => &["closed_form", "oracle_energy", "rel_gap", "residual", "improvement_steps"],
            SweepCommand::Qi => &["qi_max"],
        }
    }

    fn name(self) -> &'static str {
        match self {
            SweepCommand::Bound => "bound",
            SweepCommand::Substituted => "substituted",
            SweepCommand::Compensation => "compensation",
            SweepCommand::Minimize => "minimize",
            SweepCommand::Qi => "qi",
        }
    }

    /// Admissibility of one input set, checked before any row runs.
    fn validate(self, i: &Inputs) -> Result<(), String> {
        let pos = |n: &str, v: f64| if v > 0.0 && v.is_finite() { Ok(()) } else { Err(format!("{n} must be positive, got {v}")) };
        let nonneg = |n: &str, v: f64| if v >= 0.0 && v.is_finite() { Ok(()) } else { Err(format!("{n} must be non-negative, got {v}")) };
        pos("hbar", i.hbar)?;
        match self {
            SweepCommand::Bound => {
                pos("t_s", i.t_s)?;
                if i.polarizations.fract() != 0.0 || !(i.polarizations >= 1.0) {
                    return Err(format!("polarizations must be a positive integer, got {}", i.polarizations));
                }
            }
            SweepCommand::Substituted => {
                pos("t_s", i.t_s)?;
                pos("E_n", i.e_n)?;
                admissible(i.e_n, i.t_s, i.hbar).map_err(|e| e.to_string())?;
            }
            SweepCommand::Compensation | SweepCommand::Minimize => {
                nonneg("E_n", i.e_n)?;
                if self == SweepCommand::Minimize {
                    pos("L", i.l)?;
                } else {
                    nonneg("L", i.l)?;
                }
                admissible(i.e_n, i.l, i.hbar).map_err(|e| e.to_string())?;
            }
            SweepCommand::Qi => pos("L", i.l)?,
        }
        Ok(())
    }

    fn evaluate(self, i: &Inputs, seed: u64) -> crate::Result<Vec<f64>> {
        Ok(match self {
            SweepCommand::Bound => {
                let c = gedanken_chain(i.t_s, i.hbar, i.polarizations as u32)?;
                if !c.passed() {
                    return Err(Error::InvalidParameter("chain self-check failed".into()));
                }
                vec![c.bound_per_pol, c.bound_total]
            }
            SweepCommand::Substituted => {
                let v = substituted_bound(i.e_n, i.t_s, i.hbar);
                vec![v, v / qi_max_negative_energy(i.t_s, i.hbar)?]
            }
            SweepCommand::Compensation => vec![compensation_lower_bound(i.e_n, i.l, i.hbar)?],
            SweepCommand::Minimize => {
                let p = MinimizerProblem::new(i.e_n, i.l, i.hbar);
                let closed = min_compensation_energy(&p)?;
                let r = numeric_min_oracle(&p, seed)?;
                let gap = if closed > 0.0 { r.energy / closed - 1.0 } else { r.energy / i.hbar };
                vec![closed, r.energy, gap, r.residual, r.improvement_steps as f64]
            }
            SweepCommand::Qi => vec![qi_max_negative_energy(i.l, i.hbar)?],
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub inputs: BTreeMap<String, f64>,
    pub outputs: BTreeMap<String, f64>,
    pub status: &'static str,
    pub error_kind: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}

/// `v1,v2,...` or log-spaced `a:b:n`.
pub fn parse_values(text: &str) -> Result<Vec<f64>, Failure> {
    let text = text.trim();
    if text.is_empty() {
        return Err(config("empty values list"));
    }
    let vals: Vec<f64> = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let bad = || config(format!("log range must be `a:b:n` with 0 < a, 0 < b, n >= 1, got `{text}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if !(a > 0.0 && b > 0.0) || n == 0 || (n == 1 && a != b) {
            return Err(bad());
        }
        let (la, lb) = (a.log10(), b.log10());
        (0..n)
            .map(|k| match k {
                0 => a,
                k if k == n - 1 => b,
                k => 10f64.powf(la + (lb - la) * k as f64 / (n - 1) as f64),
            })
            .collect()
    } else {
        text.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| config(format!("not a number: `{s}`"))))
            .collect::<Result<_, _>>()?
    };
    if let Some(v) = vals.iter().find(|v| !v.is_finite()) {
        return Err(config(format!("non-finite value {v}")));
    }
    Ok(vals)
}

fn cmd_sweep(cli: &Cli, command: SweepCommand, param: &str, values: &str, base: Inputs, timing: bool) -> Result<Emit, Failure> {
    if !command.inputs().contains(&param) {
        return Err(config(format!(
            "`{}` sweeps take one of {:?}, not `{param}`",
            command.name(),
            command.inputs()
        )));
    }
    let values = parse_values(values)?;
    let inputs: Vec<Inputs> = values
        .iter()
        .map(|&v| {
            let mut i = base;
            i.set(param, v);
            i
        })
        .collect();
    let invalid: Vec<String> = inputs
        .iter()
        .zip(&values)
        .filter_map(|(i, v)| command.validate(i).err().map(|e| format!("{param} = {v}: {e}")))
        .collect();
    if !invalid.is_empty() {
        for m in &invalid {
            eprintln!("{m}");
        }
        return Err(config(format!("{} of {} sweep values are inadmissible", invalid.len(), values.len())));
    }
    let seed = cli.seed;
    let records: Vec<RunRecord> = inputs
        .par_iter()
        .map(|i| {
            let start = Instant::now();
            let result = command.evaluate(i, seed);
            let wall = timing.then(|| start.elapsed().as_secs_f64());
            let ins = command.inputs().iter().map(|n| (n.to_string(), i.get(n))).collect();
            match result {
                Ok(out) => RunRecord {
                    inputs: ins,
                    outputs: command.outputs().iter().map(|n| n.to_string()).zip(out).collect(),
                    status: "ok",
                    error_kind: None,
                    wall_time: wall,
                },
                Err(e) => RunRecord { inputs: ins, outputs: BTreeMap::new(), status: "error", error_kind: Some(e.kind()), wall_time: wall },
            }
        })
        .collect();
    let failed = records.iter().filter(|r| r.status != "ok").count();
    if failed > 0 {
        eprintln!("{failed} of {} rows failed", records.len());
    }
    let main = match cli.format.unwrap_or(Format::Csv) {
        Format::Json => pretty(&json!({
            "command": command,
            "parameter": param,
            "seed": seed,
            "records": records,
        })),
        Format::Csv => sweep_csv(command, &records, timing),
    };
    Ok(Emit { main, sidecar: None, code: if failed > 0 { 1 } else { 0 } })
}

fn sweep_csv(command: SweepCommand, records: &[RunRecord], timing: bool) -> String {
    let mut cols: Vec<&str> = vec!["index"];
    cols.extend(command.inputs());
    cols.extend(command.outputs());
    cols.extend(["status", "error_kind"]);
    if timing {
        cols.push("wall_time");
    }
    let mut s = cols.join(",");
    s.push('\n');
    for (k, r) in records.iter().enumerate() {
        let mut row = vec![k.to_string()];
        row.extend(command.inputs().iter().map(|n| fmt17(r.inputs[*n])));
        row.extend(command.outputs().iter().map(|n| r.outputs.get(*n).map(|v| fmt17(*v)).unwrap_or_default()));
        row.push(r.status.to_string());
        row.push(r.error_kind.unwrap_or("").to_string());
        if let Some(w) = r.wall_time {
            row.push(fmt17(w));
        }
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}
