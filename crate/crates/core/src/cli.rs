//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when `oracle-check` finds a tolerance breach,
//! 2 for usage and validation errors.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::arimoto::{self, csv_err, ArimotoTrace, DEFAULT_MAX_ITER, DEFAULT_TOLERANCE};
use crate::dmc::{load_channel, Channel, Distribution};
use crate::error::{Error, Result};
use crate::exponents::{
    conditional_e0, conditional_e0_general, e0_decomposition_minimizer, gallager_e0,
    kl_divergence, mutual_information,
};
use crate::nts::{self, NtsAggregate, NtsConfig, Search};
use crate::oracle;

/// Environment variable capping the worker count of `nts`.
pub const THREADS_ENV: &str = "GALLAGER_FORGE_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "gallager-forge",
    version,
    about = "Gallager exponents, Arimoto iterations and natural type selection for discrete memoryless channels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    pub format: Format,

    /// Write results to this file instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Display exponents in bits instead of nats (files stay in nats).
    #[arg(long, global = true)]
    pub bits: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gallager function, and optionally the conditional exponent and divergence.
    E0(E0Args),
    /// Mutual information I(Q,P).
    Mi(MiArgs),
    /// Run the Arimoto iteration for a fixed rho.
    Arimoto(ArimotoArgs),
    /// Run the capacity iteration.
    Capacity(CapacityArgs),
    /// Favorite-type Monte Carlo experiment.
    Nts(NtsArgs),
    /// Cross-check closed forms against brute-force references.
    #[command(name = "oracle-check")]
    OracleCheck(OracleArgs),
    /// Per-iteration conditional and unconditional exponents.
    #[command(name = "trace-fig1")]
    TraceFig1(TraceArgs),
}

#[derive(Debug, Args)]
pub struct ChannelArg {
    /// Channel JSON file.
    #[arg(long)]
    pub channel: PathBuf,
}

#[derive(Debug, Args)]
pub struct E0Args {
    #[command(flatten)]
    pub channel: ChannelArg,
    #[arg(long, allow_hyphen_values = true)]
    pub rho: f64,
    /// Input distribution, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub q: String,
    /// Transmitted type for the conditional exponent.
    #[arg(long, allow_hyphen_values = true)]
    pub qtilde: Option<String>,
}

#[derive(Debug, Args)]
pub struct MiArgs {
    #[command(flatten)]
    pub channel: ChannelArg,
    #[arg(long, allow_hyphen_values = true)]
    pub q: String,
}

#[derive(Debug, Args)]
pub struct ArimotoArgs {
    #[command(flatten)]
    pub channel: ChannelArg,
    #[arg(long, allow_hyphen_values = true)]
    pub rho: f64,
    /// Starting distribution; uniform when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub q0: Option<String>,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct CapacityArgs {
    #[command(flatten)]
    pub channel: ChannelArg,
    #[arg(long, allow_hyphen_values = true)]
    pub q0: Option<String>,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub channel: ChannelArg,
    #[arg(long, allow_hyphen_values = true)]
    pub rho: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub q0: Option<String>,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SearchArg {
    Auto,
    Stream,
    SkipAhead,
}

#[derive(Debug, Args)]
pub struct NtsArgs {
    #[command(flatten)]
    pub channel: ChannelArg,
    #[arg(long, allow_hyphen_values = true)]
    pub rho: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub q: String,
    /// Block lengths, comma separated.
    #[arg(long = "n", allow_hyphen_values = true)]
    pub n_list: String,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = nts::DEFAULT_M_CAP)]
    pub m_cap: u64,
    /// Reference distribution; one Arimoto step from q when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub target: Option<String>,
    #[arg(long, value_enum, default_value_t = SearchArg::Auto)]
    pub search: SearchArg,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub channel: ChannelArg,
    #[arg(long, allow_hyphen_values = true)]
    pub rho: f64,
    /// Input distribution; uniform when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<String>,
    /// Longest block for the exhaustive output enumeration.
    #[arg(long = "n", default_value_t = 4)]
    pub n: u64,
}

/// Tolerance on the sum of a command-line distribution.
pub const CLI_SUM_TOLERANCE: f64 = 1e-9;

/// Parses `0.1,0.9`. Sums within 1e-9 of 1 are renormalized; anything else
/// is rejected.
pub fn parse_distribution(text: &str) -> Result<Distribution> {
    let values = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad number {s:?}: {e}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    for (index, &v) in values.iter().enumerate() {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidProbability { index, value: v });
        }
    }
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > CLI_SUM_TOLERANCE {
        return Err(Error::NotNormalized { sum });
    }
    Distribution::from_weights(&values)
}

fn parse_n_list(text: &str) -> Result<Vec<u64>> {
    text.split(',')
        .map(|s| {
            let n = s
                .trim()
                .parse::<u64>()
                .map_err(|e| Error::Parse(format!("bad block length {s:?}: {e}")))?;
            if n == 0 {
                return Err(Error::ZeroBlockLength);
            }
            Ok(n)
        })
        .collect()
}

fn input_for(ch: &Channel, text: &Option<String>) -> Result<Distribution> {
    let q = match text {
        Some(t) => parse_distribution(t)?,
        None => Distribution::uniform(ch.num_inputs()),
    };
    q.check_len(ch.num_inputs())?;
    Ok(q)
}

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
}

fn sig(v: f64) -> String {
    format!("{v:.11e}")
}

fn fmt_dist(q: &Distribution) -> String {
    q.probs()
        .iter()
        .map(|p| format!("{p:.12}"))
        .collect::<Vec<_>>()
        .join(",")
}

struct Display {
    bits: bool,
}

impl Display {
    fn unit(&self) -> &'static str {
        if self.bits {
            "bits"
        } else {
            "nats"
        }
    }

    fn val(&self, v: f64) -> String {
        if self.bits {
            sig(v / std::f64::consts::LN_2)
        } else {
            sig(v)
        }
    }
}

/// What a command produced: text for the terminal, plus the structured
/// payload for `--format json|csv`.
struct Report {
    text: String,
    json: serde_json::Value,
    csv: Option<Vec<u8>>,
    exit: i32,
}

#[derive(Serialize)]
struct E0Report {
    rho: f64,
    q: Distribution,
    e0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    qtilde: Option<Distribution>,
    #[serde(skip_serializing_if = "Option::is_none")]
    conditional_e0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    divergence: Option<f64>,
}

fn cmd_e0(a: &E0Args, disp: &Display) -> Result<Report> {
    let ch = load_channel(&a.channel.channel)?;
    let q = input_for(&ch, &Some(a.q.clone()))?;
    let e0 = gallager_e0(a.rho, &q, &ch)?;
    let mut text = format!("E0(rho,Q) = {} {}\n", disp.val(e0), disp.unit());
    let mut report = E0Report {
        rho: a.rho,
        q: q.clone(),
        e0,
        qtilde: None,
        conditional_e0: None,
        divergence: None,
    };
    if let Some(t) = &a.qtilde {
        let qt = input_for(&ch, &Some(t.clone()))?;
        let c = conditional_e0(a.rho, &q, &qt, &ch)?;
        let dv = kl_divergence(&qt, &q)?;
        let _ = writeln!(text, "E0(rho,Q,Qtilde) = {} {}", disp.val(c), disp.unit());
        let _ = writeln!(text, "D(Qtilde||Q) = {} {}", disp.val(dv), disp.unit());
        report.qtilde = Some(qt);
        report.conditional_e0 = Some(c);
        report.divergence = Some(dv);
    }
    let mut csv = b"quantity,value\n".to_vec();
    csv.extend(format!("e0,{}\n", sig(e0)).bytes());
    if let (Some(c), Some(dv)) = (report.conditional_e0, report.divergence) {
        csv.extend(format!("conditional_e0,{}\ndivergence,{}\n", sig(c), sig(dv)).bytes());
    }
    Ok(Report {
        text,
        json: serde_json::to_value(&report)?,
        csv: Some(csv),
        exit: EXIT_OK,
    })
}

fn cmd_mi(a: &MiArgs, disp: &Display) -> Result<Report> {
    let ch = load_channel(&a.channel.channel)?;
    let q = input_for(&ch, &Some(a.q.clone()))?;
    let mi = mutual_information(&q, &ch)?;
    Ok(Report {
        text: format!("I(Q,P) = {} {}\n", disp.val(mi), disp.unit()),
        json: serde_json::json!({ "q": q, "mutual_information": mi }),
        csv: Some(format!("quantity,value\nmutual_information,{}\n", sig(mi)).into_bytes()),
        exit: EXIT_OK,
    })
}

fn trace_report(trace: &ArimotoTrace, label: &str, disp: &Display) -> Result<Report> {
    let mut csv = Vec::new();
    trace.write_csv(&mut csv)?;
    let text = format!(
        "final Q = ({})\n{label} = {} {}\niterations = {}\nstop_reason = {}\n",
        fmt_dist(trace.final_input()),
        disp.val(trace.final_objective()),
        disp.unit(),
        trace.iterations(),
        trace.stop_reason
    );
    let json = serde_json::json!({
        "rho": trace.rho,
        "final_q": trace.final_input(),
        "objective": trace.final_objective(),
        "iterations": trace.iterations(),
        "converged": trace.converged,
        "stop_reason": trace.stop_reason,
        "iterates": trace.iterates.iter().map(|(q, v)| serde_json::json!({"q": q, "objective": v})).collect::<Vec<_>>(),
    });
    Ok(Report {
        text,
        json,
        csv: Some(csv),
        exit: EXIT_OK,
    })
}

fn cmd_arimoto(a: &ArimotoArgs, disp: &Display) -> Result<Report> {
    let ch = load_channel(&a.channel.channel)?;
    let q0 = input_for(&ch, &a.q0)?;
    let trace = arimoto::solve(a.rho, &q0, &ch, a.tol, a.max_iter)?;
    trace_report(&trace, "E0(rho,Q)", disp)
}

fn cmd_capacity(a: &CapacityArgs, disp: &Display) -> Result<Report> {
    let ch = load_channel(&a.channel.channel)?;
    let q0 = input_for(&ch, &a.q0)?;
    let trace = arimoto::solve_capacity(&q0, &ch, a.tol, a.max_iter)?;
    trace_report(&trace, "C", disp)
}

/// One row of the per-iteration exponent table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig1Row {
    pub iter: usize,
    pub q: Distribution,
    /// `E₀(ρ,Q_k)`.
    pub objective: f64,
    /// `E₀(ρ,Q_k,Q_{k+1})`.
    pub conditional: f64,
    /// `D(Q_{k+1}‖Q_k)`.
    pub divergence: f64,
    /// `conditional - ρ·divergence`.
    pub penalized: f64,
}

/// Rows for every update of a solve, `k = 1..=iterations`.
pub fn fig1_rows(trace: &ArimotoTrace, ch: &Channel) -> Result<Vec<Fig1Row>> {
    trace
        .iterates
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            let (q, e0) = &w[0];
            let next = &w[1].0;
            let conditional = conditional_e0(trace.rho, q, next, ch)?;
            let divergence = kl_divergence(next, q)?;
            Ok(Fig1Row {
                iter: k + 1,
                q: q.clone(),
                objective: *e0,
                conditional,
                divergence,
                penalized: conditional - trace.rho * divergence,
            })
        })
        .collect()
}

pub fn write_fig1_csv<W: Write>(rows: &[Fig1Row], k: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["iter".to_string()];
    header.extend((0..k).map(|x| format!("Q_{x}")));
    header.extend(
        ["objective", "conditional", "divergence", "penalized"]
            .iter()
            .map(|s| s.to_string()),
    );
    w.write_record(&header).map_err(csv_err)?;
    for r in rows {
        let mut row = vec![r.iter.to_string()];
        row.extend(r.q.probs().iter().map(|p| format!("{p:.17e}")));
        for v in [r.objective, r.conditional, r.divergence, r.penalized] {
            row.push(format!("{v:.17e}"));
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_trace_fig1(a: &TraceArgs, disp: &Display) -> Result<Report> {
    let ch = load_channel(&a.channel.channel)?;
    let q0 = input_for(&ch, &a.q0)?;
    let trace = arimoto::solve(a.rho, &q0, &ch, a.tol, a.max_iter)?;
    let rows = fig1_rows(&trace, &ch)?;
    let mut csv = Vec::new();
    write_fig1_csv(&rows, ch.num_inputs(), &mut csv)?;
    let mut text = format!(
        "{:>5}  {:>18}  {:>18}  {:>18}  ({})\n",
        "iter",
        "E0(rho,Q_k)",
        "E0(rho,Q_k,Q_k+1)",
        "penalized",
        disp.unit()
    );
    for r in &rows {
        let _ = writeln!(
            text,
            "{:>5}  {:>18}  {:>18}  {:>18}",
            r.iter,
            disp.val(r.objective),
            disp.val(r.conditional),
            disp.val(r.penalized)
        );
    }
    Ok(Report {
        text,
        json: serde_json::to_value(&rows)?,
        csv: Some(csv),
        exit: EXIT_OK,
    })
}

fn cmd_nts(a: &NtsArgs, _disp: &Display) -> Result<Report> {
    let ch = load_channel(&a.channel.channel)?;
    let q = input_for(&ch, &Some(a.q.clone()))?;
    let n_list = parse_n_list(&a.n_list)?;
    let target = match &a.target {
        Some(t) => input_for(&ch, &Some(t.clone()))?,
        None => arimoto::q_update(a.rho, &q, &ch)?,
    };
    let search = match a.search {
        SearchArg::Auto => Search::Auto,
        SearchArg::Stream => Search::Stream,
        SearchArg::SkipAhead => Search::SkipAhead,
    };
    let threads = threads_from_env();
    let mut runs: Vec<NtsAggregate> = Vec::with_capacity(n_list.len());
    for &n in &n_list {
        let cfg = NtsConfig::new(a.rho, q.clone(), ch.clone(), n, a.trials, a.seed)
            .with_m_cap(Some(a.m_cap))
            .with_search(search);
        let agg = match threads {
            Some(t) => nts::run_trials_with_threads(&cfg, &target, t)?,
            None => nts::run_trials(&cfg, &target)?,
        };
        runs.push(agg);
    }
    let mut text = format!("target Q' = ({})\n", fmt_dist(&target));
    let _ = writeln!(
        text,
        "{:>8}  {:>8}  {:>14}  {:>14}  {:>9}  mean type",
        "n", "trials", "median_tv", "tv(mean)", "truncated"
    );
    for r in &runs {
        let _ = writeln!(
            text,
            "{:>8}  {:>8}  {:>14.6e}  {:>14.6e}  {:>9}  ({})",
            r.config.n,
            r.config.trials,
            r.median_tv,
            r.tv_to_target,
            r.truncated_count,
            fmt_dist(&r.mean_type)
        );
    }
    let truncated: usize = runs.iter().map(|r| r.truncated_count).sum();
    if truncated > 0 {
        let _ = writeln!(
            text,
            "warning: {truncated} trial(s) reached m_cap before the stopping rule fired"
        );
    }
    let mut csv_buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut csv_buf);
        let mut header: Vec<String> = vec!["n".into(), "trial".into(), "winner_index".into()];
        header.extend((0..ch.num_inputs()).map(|x| format!("count_{x}")));
        header.extend(
            ["value", "tv", "codewords_examined", "truncated"]
                .iter()
                .map(|s| s.to_string()),
        );
        w.write_record(&header).map_err(csv_err)?;
        for r in &runs {
            r.write_csv_rows(&mut w)?;
        }
        w.flush()?;
    }
    Ok(Report {
        text,
        json: serde_json::json!({ "target": target, "runs": runs }),
        csv: Some(csv_buf),
        exit: EXIT_OK,
    })
}

/// A single oracle comparison.
#[derive(Debug, Clone, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub observed: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn check(name: impl Into<String>, observed: f64, tolerance: f64) -> CheckLine {
    CheckLine {
        name: name.into(),
        observed,
        tolerance,
        pass: observed <= tolerance,
    }
}

/// Runs the brute-force cross-checks for one channel, `ρ` and input.
pub fn oracle_suite(ch: &Channel, rho: f64, q: &Distribution, max_block: u64) -> Result<Vec<CheckLine>> {
    let k = ch.num_inputs();
    let s = 1.0 / (1.0 + rho);
    let mut lines = Vec::new();

    // block conditional bound against its single-letter form
    let need = (ch.num_outputs() as f64).powi(max_block as i32);
    if need > oracle::OUTPUT_SPACE_LIMIT as f64 {
        return Err(Error::OutputSpaceTooLarge {
            count: need,
            limit: oracle::OUTPUT_SPACE_LIMIT,
        });
    }
    for n in 1..=max_block {
        let mut worst: f64 = 0.0;
        let codebook = 1u64 << n.min(20);
        let mut err = None;
        oracle::for_each_composition(n, k, |counts| {
            if err.is_some() {
                return;
            }
            let word: Vec<usize> = counts
                .iter()
                .enumerate()
                .flat_map(|(x, &c)| std::iter::repeat_n(x, c as usize))
                .collect();
            let res = (|| -> Result<f64> {
                let brute = oracle::exhaustive_conditional_bound(s, rho, q, ch, &word, codebook)?;
                let ty = crate::dmc::type_of(&word, k)?.to_distribution();
                let e = conditional_e0_general(s, rho, q, &ty, ch)?;
                let nf = n as f64;
                let single = (-nf * (e - rho * (codebook as f64).ln() / nf)).exp();
                Ok(((brute - single) / single).abs())
            })();
            match res {
                Ok(r) => worst = worst.max(r),
                Err(e) => err = Some(e),
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        lines.push(check(format!("block bound single-letterization, n={n} (relative)"), worst, 1e-9));
    }

    if q.is_strictly_positive() {
        let e0 = gallager_e0(rho, q, ch)?;
        let (_, min) = e0_decomposition_minimizer(rho, q, ch)?;
        lines.push(check("decomposition closed form vs E0", (min - e0).abs(), 1e-9));
        if k <= oracle::GRID_ALPHABET_LIMIT {
            let (step, tol) = match k {
                2 => (1e-3, 1e-5),
                3 => (1e-3, 1e-4),
                _ => (1e-2, 1e-3),
            };
            let (_, grid) = oracle::grid_min_decomposition(rho, q, ch, step)?;
            lines.push(check(
                format!("decomposition grid (step {step}) vs E0"),
                grid - e0,
                tol,
            ));
            lines.push(check("decomposition grid never undershoots E0", (e0 - grid).max(0.0), 1e-12));
        }

        let target = arimoto::q_update(rho, q, ch)?;
        let mut n_lattice = 400u64;
        while n_lattice > 25 && oracle::type_count(n_lattice, k) > 2e6 {
            n_lattice /= 2;
        }
        let best = oracle::best_type_exact(rho, q, ch, n_lattice)?;
        let tv = best.ty.to_distribution().total_variation(&target);
        let tol = if n_lattice >= 400 { 0.01 } else { (k as f64 / n_lattice as f64).max(0.01) };
        lines.push(check(format!("lattice argmax (n={n_lattice}) TV to Arimoto step"), tv, tol));
    }
    Ok(lines)
}

fn cmd_oracle_check(a: &OracleArgs) -> Result<Report> {
    let ch = load_channel(&a.channel.channel)?;
    let q = input_for(&ch, &a.q)?;
    if a.n == 0 {
        return Err(Error::ZeroBlockLength);
    }
    let lines = oracle_suite(&ch, a.rho, &q, a.n)?;
    let all = lines.iter().all(|l| l.pass);
    let mut text = String::new();
    for l in &lines {
        let _ = writeln!(
            text,
            "[{}] {}: {:.3e} (tolerance {:.1e})",
            if l.pass { "PASS" } else { "FAIL" },
            l.name,
            l.observed,
            l.tolerance
        );
    }
    let _ = writeln!(text, "{}", if all { "all checks passed" } else { "CHECK FAILURES" });
    let mut csv = b"check,observed,tolerance,pass\n".to_vec();
    for l in &lines {
        csv.extend(format!("\"{}\",{:e},{:e},{}\n", l.name, l.observed, l.tolerance, l.pass).bytes());
    }
    Ok(Report {
        text,
        json: serde_json::json!({ "pass": all, "checks": lines }),
        csv: Some(csv),
        exit: if all { EXIT_OK } else { EXIT_CHECK_FAILED },
    })
}

fn emit(cli: &Cli, report: &Report, stdout: &mut dyn Write) -> Result<()> {
    let body: Vec<u8> = match cli.format {
        Format::Text => report.text.clone().into_bytes(),
        Format::Json => {
            let mut v = serde_json::to_vec_pretty(&report.json)?;
            v.push(b'\n');
            v
        }
        Format::Csv => report
            .csv
            .clone()
            .unwrap_or_else(|| report.text.clone().into_bytes()),
    };
    match &cli.output {
        Some(path) => {
            std::fs::write(path, &body)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            stdout.write_all(report.text.as_bytes())?;
        }
        None => stdout.write_all(&body)?,
    }
    Ok(())
}

/// Runs a parsed command line, writing to the given streams; returns the
/// process exit code.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let disp = Display { bits: cli.bits };
    let result = match &cli.command {
        Command::E0(a) => cmd_e0(a, &disp),
        Command::Mi(a) => cmd_mi(a, &disp),
        Command::Arimoto(a) => cmd_arimoto(a, &disp),
        Command::Capacity(a) => cmd_capacity(a, &disp),
        Command::Nts(a) => cmd_nts(a, &disp),
        Command::OracleCheck(a) => cmd_oracle_check(a),
        Command::TraceFig1(a) => cmd_trace_fig1(a, &disp),
    };
    match result.and_then(|r| emit(cli, &r, stdout).map(|_| r.exit)) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

/// Parses `args` (including the program name) and runs it.
pub fn run_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, stdout, stderr),
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{e}");
                EXIT_OK
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distribution_parsing() {
        assert_eq!(parse_distribution("0.5,0.5").unwrap().probs(), &[0.5, 0.5]);
        let d = parse_distribution("0.3333333333,0.3333333333,0.3333333334").unwrap();
        assert!((d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(matches!(parse_distribution("0.5,0.6"), Err(Error::NotNormalized { .. })));
        assert!(matches!(parse_distribution("0.5,x"), Err(Error::Parse(_))));
        assert!(matches!(
            parse_distribution("1.5,-0.5"),
            Err(Error::InvalidProbability { .. })
        ));
    }

    #[test]
    fn n_list_parsing() {
        assert_eq!(parse_n_list("50,100, 200").unwrap(), vec![50, 100, 200]);
        assert_eq!(parse_n_list("0"), Err(Error::ZeroBlockLength));
    }

    #[test]
    fn error_messages_match_cli_contract() {
        assert!(Error::NotNormalized { sum: 1.1 }
            .to_string()
            .contains("distribution does not sum to 1"));
        assert!(Error::InvalidRho(0.0).to_string().contains("rho must be in (0,1]"));
    }
}
