use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use lotto_scouts::analysis::{
    influence_ratio, required_ratio, value_partial_b, value_partial_u, weapons_mix, BudgetProblem,
};
use lotto_scouts::figures::{write_figure, Resolution, FIGURE_IDS};
use lotto_scouts::multistage::{bounds, Field, MultistageInstance};
use lotto_scouts::numfmt::{format_sig, round_sig};
use lotto_scouts::single_field::{classify_case, game_value, solve, GameParams};
use lotto_scouts::verification::{exploitability, monte_carlo_value, SimConfig, DEFAULT_GRID_SIZE};
use lotto_scouts::LottoError;

const SCHEMA_VERSION: &str = "1";
const THREADS_ENV: &str = "LOTTO_SCOUTS_THREADS";
const GAP_TOL: f64 = 0.01;

#[derive(Parser)]
#[command(name = "lotto-scouts", version, about = "General Lotto games with scouts")]
struct Cli {
    /// Emit a JSON envelope instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Worker threads (default: machine parallelism). LOTTO_SCOUTS_THREADS takes precedence.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Serialize)]
struct GameArgs {
    /// Blue budget B.
    #[arg(long = "blue", allow_negative_numbers = true)]
    blue: f64,
    /// Red budget R.
    #[arg(long = "red", allow_negative_numbers = true)]
    red: f64,
    /// Detection probability u.
    #[arg(long = "u", allow_negative_numbers = true)]
    u: f64,
}

impl GameArgs {
    fn params(&self) -> Result<GameParams, LottoError> {
        GameParams::new(self.blue, self.red, self.u)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form value and equilibrium strategies.
    Solve(GameArgs),
    /// Game value only.
    Value(GameArgs),
    /// Check the equilibrium by Monte Carlo and best-response oracles.
    Verify {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
        grid: usize,
        #[arg(long, default_value_t = 1_000_000)]
        plays: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Bounds for the multi-field game; fields CSV has columns w,u.
    Multistage {
        #[arg(long, allow_negative_numbers = true)]
        blue: f64,
        #[arg(long, allow_negative_numbers = true)]
        red: f64,
        #[arg(long)]
        fields: PathBuf,
    },
    /// Value derivatives and influence ratio.
    Influence(GameArgs),
    /// Resource ratio needed to reach a target value.
    Contour {
        #[arg(long = "value", allow_negative_numbers = true)]
        target: f64,
        #[arg(long, allow_negative_numbers = true)]
        u: f64,
    },
    /// Best split of a budget between resources and information.
    Budget {
        #[arg(long = "total", allow_negative_numbers = true)]
        total: f64,
        #[arg(long = "cost", allow_negative_numbers = true)]
        cost: f64,
    },
    /// Write the CSV tables behind the figures.
    FigureData {
        /// Figure id 1..9; all figures when omitted.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=9))]
        figure: Option<u8>,
        #[arg(long, default_value = "figure-data")]
        out: PathBuf,
        /// Points per continuous axis, overriding each figure's default.
        #[arg(long)]
        points: Option<usize>,
    },
}

#[derive(Serialize, Default)]
struct Provenance {
    seed: Option<u64>,
    grid: Option<usize>,
    plays: Option<u64>,
    threads: usize,
    tool_version: &'static str,
}

struct Report {
    command: &'static str,
    params: Value,
    result: Value,
    text: Vec<String>,
    provenance: Provenance,
    passed: bool,
}

impl Report {
    fn new(command: &'static str, params: Value, result: Value, text: Vec<String>) -> Self {
        Self { command, params, result, text, provenance: Provenance::default(), passed: true }
    }
}

enum Failure {
    Invalid(String),
}

impl From<LottoError> for Failure {
    fn from(e: LottoError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

/// Rounds every float to 12 significant digits. Non-finite numbers are
/// already `null` after serialization.
fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                *v = serde_json::Number::from_f64(round_sig(x)).map_or(Value::Null, Value::Number);
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable output")
}

fn resolve_threads(flag: Option<usize>) -> Result<usize, Failure> {
    let from_env = match std::env::var(THREADS_ENV) {
        Ok(s) => Some(
            s.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| Failure::Invalid(format!("{THREADS_ENV} must be a positive integer, got {s:?}")))?,
        ),
        Err(_) => None,
    };
    let n = match from_env.or(flag) {
        Some(0) => return Err(Failure::Invalid("--threads must be positive".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    Ok(n)
}

fn cmd_solve(g: &GameArgs) -> Result<Report, Failure> {
    let p = g.params()?;
    let s = solve(&p);
    let mut text = vec![
        format!("case: {}", s.case),
        format!("value: {}", format_sig(s.value)),
        format!("red: {}", s.red),
        format!("blue call: {}", s.blue.call),
        format!("blue fallback: {}", s.blue.fallback),
    ];
    for (name, v) in [("p", s.p), ("q", s.q), ("C", s.c)] {
        if let Some(v) = v {
            text.push(format!("{name}: {}", format_sig(v)));
        }
    }
    let result = json!({
        "case": s.case,
        "value": s.value,
        "red": s.red,
        "blue": s.blue,
        "p": s.p,
        "q": s.q,
        "C": s.c,
    });
    Ok(Report::new("solve", to_json(g), result, text))
}

fn cmd_value(g: &GameArgs) -> Result<Report, Failure> {
    let p = g.params()?;
    let (case, value) = (classify_case(&p), game_value(&p));
    Ok(Report::new(
        "value",
        to_json(g),
        json!({ "case": case, "value": value }),
        vec![format!("case: {case}"), format!("value: {}", format_sig(value))],
    ))
}

fn cmd_verify(g: &GameArgs, grid: usize, plays: u64, seed: u64) -> Result<Report, Failure> {
    let p = g.params()?;
    let cfg = SimConfig::new(plays, seed)?;
    let s = solve(&p);
    let ex = exploitability(&p, grid)?;
    let mc = monte_carlo_value(&s.blue, &s.red, p.detect_prob(), &cfg);
    let band = cfg.three_sigma();
    let mc_ok = (mc - s.value).abs() <= band;
    let gaps_ok = ex.blue_gap() <= GAP_TOL && ex.red_gap() <= GAP_TOL;
    let passed = mc_ok && gaps_ok;
    let text = vec![
        format!("value: {}", format_sig(s.value)),
        format!("monte_carlo: {} +/- {}", format_sig(mc), format_sig(band)),
        format!("blue_gap: {}", format_sig(ex.blue_gap())),
        format!("red_gap: {}", format_sig(ex.red_gap())),
        format!("status: {}", if passed { "pass" } else { "fail" }),
    ];
    let result = json!({
        "value": s.value,
        "monte_carlo": mc,
        "three_sigma": band,
        "blue_gap": ex.blue_gap(),
        "red_gap": ex.red_gap(),
        "gap_tolerance": GAP_TOL,
        "exploitability": ex,
        "passed": passed,
    });
    let params = json!({ "blue": g.blue, "red": g.red, "u": g.u, "grid": grid, "plays": plays, "seed": seed });
    let mut r = Report::new("verify", params, result, text);
    r.provenance.seed = Some(seed);
    r.provenance.grid = Some(grid);
    r.provenance.plays = Some(plays);
    r.passed = passed;
    Ok(r)
}

fn read_fields(path: &Path) -> Result<Vec<Field>, Failure> {
    let bad = |e: &dyn std::fmt::Display| Failure::Invalid(format!("fields file {}: {e}", path.display()));
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| bad(&e))?;
    let fields: Vec<Field> = rdr.deserialize().collect::<Result<_, _>>().map_err(|e| bad(&e))?;
    Ok(fields)
}

fn cmd_multistage(blue: f64, red: f64, path: &Path) -> Result<Report, Failure> {
    let fields = read_fields(path)?;
    let inst = MultistageInstance::new(blue, red, fields.clone())?;
    let b = bounds(&inst);
    let mut text = vec![
        format!("lower: {}", format_sig(b.lower)),
        format!("upper: {}", format_sig(b.upper)),
        format!("coincide: {}", b.coincide),
        "field,w,u,red_upper,blue_dagger,red_dagger".to_string(),
    ];
    for (i, f) in inst.fields().iter().enumerate() {
        text.push(format!(
            "{},{},{},{},{},{}",
            i,
            format_sig(f.worth),
            format_sig(f.detect_prob),
            format_sig(b.red_upper_allocation[i]),
            format_sig(b.dagger_allocation[i].0),
            format_sig(b.dagger_allocation[i].1)
        ));
    }
    let params = json!({ "blue": blue, "red": red, "fields": fields });
    Ok(Report::new("multistage", params, to_json(&b), text))
}

fn cmd_influence(g: &GameArgs) -> Result<Report, Failure> {
    let p = g.params()?;
    let (du, db, ir) = (value_partial_u(&p), value_partial_b(&p), influence_ratio(&p));
    Ok(Report::new(
        "influence",
        to_json(g),
        json!({ "value_partial_u": du, "value_partial_b": db, "influence_ratio": ir }),
        vec![
            format!("value_partial_u: {}", format_sig(du)),
            format!("value_partial_b: {}", format_sig(db)),
            format!("influence_ratio: {}", format_sig(ir)),
        ],
    ))
}

fn cmd_contour(target: f64, u: f64) -> Result<Report, Failure> {
    let ratio = required_ratio(target, u)?;
    Ok(Report::new(
        "contour",
        json!({ "value": target, "u": u }),
        json!({ "ratio": ratio }),
        vec![format!("ratio: {}", format_sig(ratio))],
    ))
}

fn cmd_budget(total: f64, cost: f64) -> Result<Report, Failure> {
    let m = weapons_mix(&BudgetProblem::new(total, cost)?);
    Ok(Report::new(
        "budget",
        json!({ "total": total, "cost": cost }),
        json!({ "value": m.value, "B_star": m.blue_budget, "u_star": m.info, "unused": m.unused }),
        vec![
            format!("value: {}", format_sig(m.value)),
            format!("B_star: {}", format_sig(m.blue_budget)),
            format!("u_star: {}", format_sig(m.info)),
            format!("unused: {}", format_sig(m.unused)),
        ],
    ))
}

fn cmd_figure_data(figure: Option<u8>, out: &Path, points: Option<usize>) -> Result<Report, Failure> {
    let ids: Vec<u8> = figure.map_or_else(|| FIGURE_IDS.collect(), |f| vec![f]);
    let res = Resolution { points };
    if points.is_some_and(|n| n < 2) {
        return Err(Failure::Invalid("--points must be at least 2".into()));
    }
    let mut files = Vec::new();
    for id in &ids {
        let written = write_figure(*id, res, out)
            .map_err(|e| Failure::Invalid(format!("cannot write figure {id} to {}: {e}", out.display())))?;
        files.extend(written.into_iter().map(|p| p.display().to_string()));
    }
    let text = files.iter().map(|f| format!("wrote {f}")).collect();
    Ok(Report::new(
        "figure-data",
        json!({ "figures": ids, "out": out.display().to_string(), "points": points }),
        json!({ "files": files }),
        text,
    ))
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    let threads = resolve_threads(cli.threads)?;
    // A second build in the same process is the only failure mode; ignore it.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    let mut report = match &cli.command {
        Command::Solve(g) => cmd_solve(g),
        Command::Value(g) => cmd_value(g),
        Command::Verify { game, grid, plays, seed } => cmd_verify(game, *grid, *plays, *seed),
        Command::Multistage { blue, red, fields } => cmd_multistage(*blue, *red, fields),
        Command::Influence(g) => cmd_influence(g),
        Command::Contour { target, u } => cmd_contour(*target, *u),
        Command::Budget { total, cost } => cmd_budget(*total, *cost),
        Command::FigureData { figure, out, points } => cmd_figure_data(*figure, out, *points),
    }?;
    report.provenance.threads = threads;
    report.provenance.tool_version = env!("CARGO_PKG_VERSION");
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            if cli.json {
                let mut envelope = json!({
                    "schema_version": SCHEMA_VERSION,
                    "command": report.command,
                    "params": report.params,
                    "result": report.result,
                    "provenance": report.provenance,
                });
                round_numbers(&mut envelope);
                println!("{}", serde_json::to_string_pretty(&envelope).expect("valid JSON"));
            } else {
                for line in &report.text {
                    println!("{line}");
                }
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
