//! `zdtool`: sweeps, stationary statistics, simulation, zero-determinant
//! detection and feasibility checks from the command line.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use zd_core::catalog::{self, enforced_relation};
use zd_core::sweep::DEFAULT_HORIZON;
use zd_core::{
    align_memory, build_kernel, correlations, detect_zd_memory_n, feasible_from_coefficients, q_grid, simulate,
    stationary_exact, sweep_point, Feasibility, GameSpec, InitialCondition, PayoffRelation, PdGame, StationaryOutcome,
    Strategy, SweepMode, SweepPoint, SweepSettings, ZdError, ZdOutcome,
};

pub const CSV_HEADER: &str = "q,avg_s1,avg_s2,corr_11,corr_12,corr_21,corr_22,relation_residual,mode_flag";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] ZdError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Parser)]
#[command(
    name = "zdtool",
    version,
    about = "Memory-n repeated games and zero-determinant strategies"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep the q opponent and print one CSV row per q.
    Scan(ScanArgs),
    /// Look for a linear payoff relation enforced by a strategy.
    Detect(DetectArgs),
    /// Build the strategy enforcing a relation, or explain why none exists.
    Feasible(FeasibleArgs),
    /// Stationary distribution against the q opponent, as JSON.
    Stationary(PlayArgs),
    /// Simulate one trajectory against the q opponent, as JSON.
    Simulate(PlayArgs),
    /// List the strategy catalog, or print one entry as a strategy file.
    Catalog(CatalogArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GameArgs {
    /// Prisoner's dilemma payoffs R,S,T,P.
    #[arg(long, default_value = "3,0,5,1", value_parser = parse_payoffs, allow_hyphen_values = true)]
    pub payoffs: PdGame,
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Catalog strategy name (see `zdtool catalog`).
    #[arg(long)]
    pub catalog: Option<String>,
    /// Strategy JSON file.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Mc,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub game: GameArgs,
    /// start:stop:steps, `steps` points inclusive of both ends.
    #[arg(long, default_value = "0:1:21", value_parser = parse_grid)]
    pub q_grid: Grid,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    #[arg(long, default_value_t = DEFAULT_HORIZON)]
    pub horizon: u64,
    /// Base seed; point `i` uses `seed ^ i`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Print a gnuplot script with the CSV inlined instead of bare CSV.
    #[arg(long)]
    pub emit_plotscript: bool,
}

#[derive(Debug, Clone, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub game: GameArgs,
    /// Memory length of the relation basis (default: the strategy's own).
    #[arg(long)]
    pub memory: Option<usize>,
}

#[derive(Debug, Clone, Args)]
#[group(id = "target", required = true, multiple = false, args = ["catalog", "file"])]
pub struct FeasibleArgs {
    /// Use the relation enforced by this catalog strategy.
    #[arg(long)]
    pub catalog: Option<String>,
    /// Relation JSON file.
    #[arg(long)]
    pub file: Option<PathBuf>,
    #[command(flatten)]
    pub game: GameArgs,
    /// Write the strategy here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PlayArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub game: GameArgs,
    /// Opponent cooperation probability after mutual cooperation.
    #[arg(long, default_value_t = 0.5)]
    pub q: f64,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    #[arg(long, default_value_t = DEFAULT_HORIZON)]
    pub horizon: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct CatalogArgs {
    /// Print this entry as a strategy file.
    #[arg(long)]
    pub show: Option<String>,
    #[command(flatten)]
    pub game: GameArgs,
    /// Opponent parameter for `opponent-q`.
    #[arg(long, default_value_t = 0.5)]
    pub q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

pub fn parse_payoffs(s: &str) -> std::result::Result<PdGame, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("bad payoff '{x}': {e}")))
        .collect::<std::result::Result<_, _>>()?;
    let [r, s, t, p] = v[..] else {
        return Err(format!("expected four payoffs R,S,T,P, got {}", v.len()));
    };
    PdGame::new(r, s, t, p).map_err(|e| e.to_string())
}

pub fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [start, stop, steps] = parts[..] else {
        return Err(format!("expected start:stop:steps, got '{s}'"));
    };
    let num = |x: &str| {
        x.trim()
            .parse::<f64>()
            .map_err(|e| format!("bad grid bound '{x}': {e}"))
    };
    Ok(Grid {
        start: num(start)?,
        stop: num(stop)?,
        steps: steps
            .trim()
            .parse()
            .map_err(|e| format!("bad step count '{steps}': {e}"))?,
    })
}

fn load_strategy(source: &Source, game: &PdGame) -> Result<Strategy> {
    match (&source.catalog, &source.file) {
        (Some(name), None) => {
            if !catalog::CATALOG.iter().any(|e| e.name == name) {
                return Err(usage(format!("unknown catalog strategy '{name}'")));
            }
            Ok(catalog::by_name(name, game, 0.5)?)
        }
        (None, Some(path)) => Ok(Strategy::from_json(&read(path)?)?),
        _ => Err(usage("give exactly one of --catalog or --file")),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

/// Runs one command, writing its normal output to `out`. Returns the exit code.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Scan(a) => scan(&a, out),
        Command::Detect(a) => detect(&a, out),
        Command::Feasible(a) => feasible(&a, out),
        Command::Stationary(a) => stationary(&a, out),
        Command::Simulate(a) => simulate_cmd(&a, out),
        Command::Catalog(a) => catalog_cmd(&a, out),
    }
}

/// The relation a strategy enforces at its own memory, if it is ZD.
fn certified_relation(strategy: &Strategy, game: &GameSpec) -> Result<Option<PayoffRelation>> {
    Ok(detect_zd_memory_n(strategy, game, strategy.memory())?
        .certificate()
        .map(|c| c.relation.gauge_fixed()))
}

pub fn scan_points(a: &ScanArgs) -> Result<Vec<SweepPoint>> {
    let game = a.game.payoffs.game();
    let strategy = load_strategy(&a.source, &a.game.payoffs)?;
    if strategy.player() != 0 {
        return Err(usage("scan sweeps a player-1 strategy"));
    }
    let grid = q_grid(a.q_grid.start, a.q_grid.stop, a.q_grid.steps).map_err(|e| match e {
        ZdError::Domain(m) => usage(m),
        other => other.into(),
    })?;
    if a.mode == Mode::Mc && a.horizon < 2 {
        return Err(usage("mc mode needs --horizon >= 2"));
    }
    let relation = certified_relation(&strategy, &game)?;
    let mode = match a.mode {
        Mode::Exact => SweepMode::Exact,
        Mode::Mc => SweepMode::Mc,
    };
    // Points run in parallel; collect keeps grid order.
    grid.par_iter()
        .enumerate()
        .map(|(i, &q)| {
            let settings = SweepSettings {
                mode,
                horizon: a.horizon,
                seed: a.seed ^ i as u64,
            };
            Ok(sweep_point(&strategy, &game, q, relation.as_ref(), settings)?)
        })
        .collect()
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv(points: &[SweepPoint]) -> String {
    let mut s = String::new();
    s.push_str(CSV_HEADER);
    s.push('\n');
    for p in points {
        let residual = p.relation_residual.map(num).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            num(p.q),
            num(p.avg[0]),
            num(p.avg[1]),
            num(p.corr[0][0]),
            num(p.corr[0][1]),
            num(p.corr[1][0]),
            num(p.corr[1][1]),
            residual,
            p.source.flag()
        );
    }
    s
}

pub fn plotscript(csv: &str) -> String {
    let mut s = String::new();
    s.push_str("$data << EOD\n");
    s.push_str(csv);
    s.push_str("EOD\n");
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str("set xlabel 'q'\n");
    s.push_str("plot for [col=2:7] $data using 1:col with linespoints\n");
    s
}

fn scan(a: &ScanArgs, out: &mut dyn Write) -> Result<i32> {
    let table = csv(&scan_points(a)?);
    if a.emit_plotscript {
        out.write_all(plotscript(&table).as_bytes())?;
    } else {
        out.write_all(table.as_bytes())?;
    }
    Ok(0)
}

fn detect(a: &DetectArgs, out: &mut dyn Write) -> Result<i32> {
    let game = a.game.payoffs.game();
    let strategy = load_strategy(&a.source, &a.game.payoffs)?;
    let n = a.memory.unwrap_or(strategy.memory());
    match detect_zd_memory_n(&strategy, &game, n)? {
        ZdOutcome::Certificate(c) => {
            writeln!(out, "ZD (memory {n})")?;
            out.write_all(c.render().as_bytes())?;
            Ok(0)
        }
        ZdOutcome::NotZd { residual } => {
            writeln!(out, "not ZD (memory {n})")?;
            writeln!(out, "residual = {residual:.16e}")?;
            Ok(1)
        }
        ZdOutcome::Vacuous => {
            writeln!(
                out,
                "not ZD (memory {n}): every combination of the Press-Dyson tensor vanishes"
            )?;
            Ok(1)
        }
    }
}

/// Relation file: `Σ coeff · Π s_{b_j}(lag j)` with `b` 0-based over
/// `0..=n_players` (0 is the constant).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationFile {
    pub n_players: usize,
    pub memory: usize,
    pub terms: Vec<Term>,
    /// 1-based player the strategy is built for (default 1).
    #[serde(default)]
    pub player: Option<usize>,
    /// Weights on the two action slices (default `[1, 0]`).
    #[serde(default)]
    pub action_coeffs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub b: Vec<usize>,
    pub coeff: f64,
}

pub fn parse_relation(text: &str) -> Result<RelationFile> {
    serde_json::from_str(text).map_err(|e| {
        CliError::Core(ZdError::Format {
            line: e.line(),
            message: e.to_string(),
        })
    })
}

fn relation_coeffs(file: &RelationFile) -> Result<Vec<f64>> {
    let base = file.n_players + 1;
    let size = base
        .checked_pow(file.memory as u32)
        .ok_or_else(|| usage("relation basis too large"))?;
    let mut coeffs = vec![0.0; size];
    for term in &file.terms {
        if term.b.len() != file.memory {
            return Err(usage(format!("term {:?} does not have {} slots", term.b, file.memory)));
        }
        if let Some(&b) = term.b.iter().find(|&&b| b > file.n_players) {
            return Err(usage(format!("basis index {b} outside 0..={}", file.n_players)));
        }
        coeffs[term.b.iter().fold(0, |acc, &b| acc * base + b)] += term.coeff;
    }
    Ok(coeffs)
}

fn feasible(a: &FeasibleArgs, out: &mut dyn Write) -> Result<i32> {
    let game = a.game.payoffs.game();
    let file = match (&a.catalog, &a.file) {
        (Some(name), None) => {
            let r = enforced_relation(name, &a.game.payoffs)
                .ok_or_else(|| usage(format!("'{name}' has no catalog relation")))?;
            relation_file(&r)
        }
        (None, Some(path)) => parse_relation(&read(path)?)?,
        _ => return Err(usage("give exactly one of --catalog or --file")),
    };
    if file.n_players != game.n_players() {
        return Err(usage("relation is not for a two-player game"));
    }
    let player = file.player.unwrap_or(1);
    if player == 0 {
        return Err(usage("player index is 1-based"));
    }
    let c = file.action_coeffs.clone().unwrap_or_else(|| vec![1.0, 0.0]);
    let coeffs = relation_coeffs(&file)?;
    let result = feasible_from_coefficients(&coeffs, file.memory, &game, player - 1, &c)?;
    let layout = zd_core::HistoryLayout::new(2, 2, file.memory)?;
    match result {
        Feasibility::Feasible(f) => {
            let json = f.strategy.to_json();
            match &a.output {
                Some(path) => {
                    std::fs::write(path, json + "\n")?;
                    writeln!(out, "{}", Feasibility::Feasible(f).describe(&layout))?;
                }
                None => writeln!(out, "{json}")?,
            }
            Ok(0)
        }
        other => {
            writeln!(out, "{}", other.describe(&layout))?;
            Ok(1)
        }
    }
}

fn relation_file(r: &PayoffRelation) -> RelationFile {
    let base = r.n_players() + 1;
    let terms = r
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0.0)
        .map(|(i, &coeff)| {
            let mut b = vec![0; r.memory()];
            let mut rest = i;
            for slot in b.iter_mut().rev() {
                *slot = rest % base;
                rest /= base;
            }
            Term { b, coeff }
        })
        .collect();
    RelationFile {
        n_players: r.n_players(),
        memory: r.memory(),
        terms,
        player: None,
        action_coeffs: None,
    }
}

#[derive(Serialize)]
struct HistoryWeight {
    history: String,
    weight: f64,
}

#[derive(Serialize)]
struct StationaryReport {
    q: f64,
    method: String,
    /// Dimension of the eigenvalue-1 eigenspace when it exceeds one.
    multiplicity: Option<usize>,
    stationarity_residual: Option<f64>,
    marginal_consistency_residual: f64,
    avg_payoffs: [f64; 2],
    correlations: [[f64; 2]; 2],
    weights: Vec<HistoryWeight>,
}

fn play_pair(a: &PlayArgs) -> Result<(Vec<Strategy>, GameSpec)> {
    let game = a.game.payoffs.game();
    let strategy = load_strategy(&a.source, &a.game.payoffs)?;
    if strategy.player() != 0 {
        return Err(usage("the strategy must belong to player 1"));
    }
    let opponent = catalog::make_opponent_q(a.q).map_err(|e| usage(e.to_string()))?;
    Ok((align_memory(&[strategy, opponent])?, game))
}

fn stationary(a: &PlayArgs, out: &mut dyn Write) -> Result<i32> {
    let (pair, game) = play_pair(a)?;
    let (dist, multiplicity) = match a.mode {
        Mode::Exact => match stationary_exact(&build_kernel(&pair, &game)?)? {
            StationaryOutcome::Unique(d) => (d, None),
            StationaryOutcome::Multiple(m) => {
                let t = simulate(&pair, &game, a.horizon, a.seed, &InitialCondition::Uniform)?;
                (t.empirical, Some(m.dimension))
            }
        },
        Mode::Mc => (
            simulate(&pair, &game, a.horizon, a.seed, &InitialCondition::Uniform)?.empirical,
            None,
        ),
    };
    let corr = correlations(&dist, &game, 2)?;
    let at = |x: usize, y: usize| corr.get(&[x, y]).unwrap_or(0.0);
    let layout = *dist.layout();
    let report = StationaryReport {
        q: a.q,
        method: format!("{:?}", dist.method()),
        multiplicity,
        stationarity_residual: dist.residual(),
        marginal_consistency_residual: dist.marginal_consistency_residual(),
        avg_payoffs: [at(1, 0), at(2, 0)],
        correlations: [[at(1, 1), at(1, 2)], [at(2, 1), at(2, 2)]],
        weights: dist
            .weights()
            .iter()
            .enumerate()
            .map(|(h, &weight)| HistoryWeight {
                history: layout.label(h),
                weight,
            })
            .collect(),
    };
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&report).expect("plain data serializes")
    )?;
    Ok(0)
}

fn simulate_cmd(a: &PlayArgs, out: &mut dyn Write) -> Result<i32> {
    let (pair, game) = play_pair(a)?;
    let t = simulate(&pair, &game, a.horizon, a.seed, &InitialCondition::Uniform)?;
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&t.stats).expect("plain data serializes")
    )?;
    Ok(0)
}

fn catalog_cmd(a: &CatalogArgs, out: &mut dyn Write) -> Result<i32> {
    match &a.show {
        None => writeln!(out, "{}", catalog::catalog_json())?,
        Some(name) => {
            if !catalog::CATALOG.iter().any(|e| e.name == name) {
                return Err(usage(format!("unknown catalog strategy '{name}'")));
            }
            writeln!(out, "{}", catalog::by_name(name, &a.game.payoffs, a.q)?.to_json())?;
        }
    }
    Ok(0)
}
