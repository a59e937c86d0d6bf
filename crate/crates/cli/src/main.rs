//! `vacq`: steady-state measures for vacation queues with impatient customers.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use vacq::compare::{compare, DEFAULT_TOL};
use vacq::engine::{Detail, EngineOptions, EngineRegistry};
use vacq::format::sig12;
use vacq::oracle::write_table_csv;
use vacq::sweep::{self, SweepParam};
use vacq::{BalanceVariant, Error, ModelParams, PerformanceReport, Policy};

const SCHEMA: u32 = 1;

const AFTER_HELP: &str = "\
Exit codes: 0 success, 1 internal error, 2 invalid input, 3 comparison failure.

CSV columns:
  analyze/oracle/simulate  measure,value,half_width (half_width only for simulate)
  compare                  measure,analytic,oracle,sim_mean,sim_half_width,sim_covers,
                           abs_diff,tol,discrepancy,status
  sweep                    index,<param>,status,p00,p_vac,p_idle,p_ser,mean_n0,mean_n1,
                           mean_n_total,sojourn_s10,sojourn_s00,sojourn_mean
  --golden-csv             phase,count,prob
  --raw-csv                replication,arrivals,served,reneged,in_system,<measures...>

JSON output carries \"schema\": 1 and full precision; tables and CSV use 12
significant digits.";

#[derive(Parser)]
#[command(name = "vacq", version, about, after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form solution (one server).
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Comma-separated z values in [-1, 1) at which to report P0(z) and P1(z).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        pgf_grid: Vec<f64>,
    },
    /// Truncated Markov-chain solve.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Write the stationary table to this file.
        #[arg(long)]
        golden_csv: Option<PathBuf>,
    },
    /// Discrete-event simulation.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sim: SimArgs,
        /// Write per-replication summaries to this file.
        #[arg(long)]
        raw_csv: Option<PathBuf>,
    },
    /// Run several engines and gate analytic against oracle.
    Compare {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sim: SimArgs,
        /// Engines to run, comma separated (analytic, oracle, simulation).
        #[arg(long, value_delimiter = ',')]
        engines: Vec<String>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// One engine over evenly spaced values of one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sim: SimArgs,
        /// lambda, mu, gamma or xi.
        #[arg(long)]
        param: String,
        #[arg(long, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        engine: Option<String>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModelKind {
    Mm1,
    Mmc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Csv,
    Table,
}

#[derive(Args)]
struct Common {
    /// key=value file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<ModelKind>,
    #[arg(long)]
    servers: Option<usize>,
    /// single or multiple.
    #[arg(long)]
    policy: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    xi: Option<f64>,
    /// corrected (default) or literal multi-server return rates.
    #[arg(long)]
    balance_variant: Option<String>,
    /// Oracle level cap.
    #[arg(long)]
    n_trunc: Option<usize>,
    #[arg(long, value_enum)]
    output: Option<Output>,
    #[arg(long)]
    output_path: Option<PathBuf>,
}

#[derive(Args)]
struct SimArgs {
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    warmup: Option<f64>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    batch_count: Option<usize>,
}

/// Values from `--config`, looked up when a flag is absent.
struct Config(HashMap<String, String>);

impl Config {
    fn load(path: Option<&PathBuf>) -> Result<Self, Error> {
        let mut map = HashMap::new();
        if let Some(path) = path {
            let text = fs::read_to_string(path)?;
            for (i, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (k, v) = line.split_once('=').ok_or_else(|| {
                    Error::InvalidConfig(format!("{}:{}: expected key=value", path.display(), i + 1))
                })?;
                let key = k.trim().replace('_', "-");
                map.insert(key, v.trim().trim_matches('"').to_string());
            }
        }
        Ok(Self(map))
    }

    fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, Error> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::InvalidConfig(format!("config key '{key}': cannot parse '{v}'"))),
        }
    }

    fn require<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<T, Error> {
        self.pick(flag, key)?
            .ok_or_else(|| Error::InvalidConfig(format!("--{key} is required (flag or config file)")))
    }
}

impl FromStr for ModelKind {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        <Self as ValueEnum>::from_str(s, true).map_err(|_| ())
    }
}

impl FromStr for Output {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        <Self as ValueEnum>::from_str(s, true).map_err(|_| ())
    }
}

struct Resolved {
    params: ModelParams,
    opts: EngineOptions,
    output: Output,
    output_path: Option<PathBuf>,
    cfg: Config,
}

fn resolve(common: &Common, sim: Option<&SimArgs>) -> Result<Resolved, Error> {
    let cfg = Config::load(common.config.as_ref())?;
    let model = cfg.pick(common.model, "model")?.unwrap_or(ModelKind::Mm1);
    let servers = cfg.pick(common.servers, "servers")?;
    let servers = match (model, servers) {
        (ModelKind::Mm1, Some(c)) if c != 1 => {
            return Err(Error::InvalidConfig(format!(
                "--model mm1 has one server, got --servers {c}"
            )))
        }
        (ModelKind::Mm1, _) => 1,
        (ModelKind::Mmc, Some(c)) => c,
        (ModelKind::Mmc, None) => {
            return Err(Error::InvalidConfig("--model mmc needs --servers".into()))
        }
    };
    let policy: Policy = cfg.pick(common.policy.clone(), "policy")?.map_or(Ok(Policy::Single), |s: String| s.parse())?;
    let variant: BalanceVariant = cfg
        .pick(common.balance_variant.clone(), "balance-variant")?
        .map_or(Ok(BalanceVariant::Corrected), |s: String| s.parse())?;
    let params = ModelParams {
        lambda: cfg.require(common.lambda, "lambda")?,
        mu: cfg.require(common.mu, "mu")?,
        gamma: cfg.require(common.gamma, "gamma")?,
        xi: cfg.require(common.xi, "xi")?,
        servers,
        policy,
        variant,
    };

    let mut opts = EngineOptions::default();
    if let Some(n) = cfg.pick(common.n_trunc, "n-trunc")? {
        opts.oracle.n_trunc = n;
    }
    let s = &mut opts.sim;
    let none = SimArgs {
        horizon: None,
        warmup: None,
        replications: None,
        seed: None,
        batch_count: None,
    };
    let sa = sim.unwrap_or(&none);
    if let Some(v) = cfg.pick(sa.horizon, "horizon")? {
        s.horizon = v;
    }
    if let Some(v) = cfg.pick(sa.warmup, "warmup")? {
        s.warmup = v;
    }
    if let Some(v) = cfg.pick(sa.replications, "replications")? {
        s.replications = v;
    }
    if let Some(v) = cfg.pick(sa.seed, "seed")? {
        s.seed = v;
    }
    if let Some(v) = cfg.pick(sa.batch_count, "batch-count")? {
        s.batch_count = v;
    }
    Ok(Resolved {
        params,
        opts,
        output: cfg.pick(common.output, "output")?.unwrap_or(Output::Table),
        output_path: cfg.pick(common.output_path.clone(), "output-path")?,
        cfg,
    })
}

fn emit(r: &Resolved, text: &str) -> Result<(), Error> {
    match &r.output_path {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn report_json(report: &PerformanceReport) -> Value {
    let mut v = serde_json::to_value(report).expect("report serialises");
    v["schema"] = json!(SCHEMA);
    v
}

/// `(name, value, half_width)` rows: headline measures, then extras.
fn report_rows(report: &PerformanceReport) -> Vec<(String, f64, Option<f64>)> {
    let mut rows = Vec::new();
    let names = PerformanceReport::HEADLINE
        .iter()
        .map(|s| s.to_string())
        .chain(report.extra.keys().cloned());
    for name in names {
        if let Some(v) = report.measure(&name) {
            rows.push((name.clone(), v, report.half_widths.get(&name).copied()));
        }
    }
    rows
}

fn report_text(report: &PerformanceReport, output: Output) -> String {
    let rows = report_rows(report);
    let with_hw = !report.half_widths.is_empty();
    let mut s = String::new();
    match output {
        Output::Json => unreachable!("handled by caller"),
        Output::Csv => {
            s.push_str(if with_hw { "measure,value,half_width\n" } else { "measure,value\n" });
            for (name, v, hw) in rows {
                s.push_str(&format!("{name},{}", sig12(v)));
                if with_hw {
                    s.push_str(&format!(",{}", hw.map(sig12).unwrap_or_default()));
                }
                s.push('\n');
            }
        }
        Output::Table => {
            let p = report.params;
            s.push_str(&format!(
                "engine {}  lambda {}  mu {}  gamma {}  xi {}  servers {}  policy {}\n",
                report.engine,
                sig12(p.lambda),
                sig12(p.mu),
                sig12(p.gamma),
                sig12(p.xi),
                p.servers,
                p.policy
            ));
            let w = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
            for (name, v, hw) in rows {
                match hw {
                    Some(h) => s.push_str(&format!("{name:<w$}  {} ± {}\n", sig12(v), sig12(h))),
                    None => s.push_str(&format!("{name:<w$}  {}\n", sig12(v))),
                }
            }
            for n in &report.notes {
                s.push_str(&format!("note: {n}\n"));
            }
        }
    }
    s
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

fn run_single(
    r: &Resolved,
    engine: &str,
    pgf_grid: Vec<f64>,
    golden: Option<&PathBuf>,
    raw: Option<&PathBuf>,
) -> Result<(), Error> {
    let registry = EngineRegistry::default();
    let mut opts = r.opts.clone();
    opts.pgf_grid = pgf_grid;
    let out = registry.get(engine)?.run(&r.params, &opts)?;
    match &out.detail {
        Detail::Oracle(table) => {
            if let Some(path) = golden {
                let mut f = fs::File::create(path)?;
                write_table_csv(table, &mut f)?;
            }
        }
        Detail::Simulation(result) => {
            if let Some(path) = raw {
                let mut f = fs::File::create(path)?;
                result.write_raw_csv(&mut f)?;
            }
        }
        Detail::Analytic { .. } => {}
    }
    let text = match r.output {
        Output::Json => {
            let mut v = report_json(&out.report);
            if let Detail::Analytic { pgf } = &out.detail {
                if !pgf.is_empty() {
                    v["pgf"] = pgf
                        .iter()
                        .map(|(p0, p1)| {
                            json!({"z": p0.z, "p0": p0.value, "p0_error": p0.abs_error_estimate,
                                   "p1": p1.value, "p1_error": p1.abs_error_estimate})
                        })
                        .collect();
                }
            }
            pretty(&v)
        }
        out_kind => {
            let mut s = report_text(&out.report, out_kind);
            if let Detail::Analytic { pgf } = &out.detail {
                if !pgf.is_empty() {
                    if out_kind == Output::Table {
                        s.push_str("\nz  P0(z)  P1(z)\n");
                    } else {
                        s.push_str("\nz,p0,p1\n");
                    }
                    let sep = if out_kind == Output::Table { "  " } else { "," };
                    for (p0, p1) in pgf {
                        s.push_str(&format!("{}{sep}{}{sep}{}\n", sig12(p0.z), sig12(p0.value), sig12(p1.value)));
                    }
                }
            }
            s
        }
    };
    emit(r, &text)
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Analyze { common, pgf_grid } => {
            let r = resolve(&common, None)?;
            run_single(&r, "analytic", pgf_grid, None, None)?;
        }
        Command::Oracle { common, golden_csv } => {
            let r = resolve(&common, None)?;
            run_single(&r, "oracle", Vec::new(), golden_csv.as_ref(), None)?;
        }
        Command::Simulate { common, sim, raw_csv } => {
            let r = resolve(&common, Some(&sim))?;
            run_single(&r, "simulation", Vec::new(), None, raw_csv.as_ref())?;
        }
        Command::Compare { common, sim, engines, tol } => {
            let r = resolve(&common, Some(&sim))?;
            let tol = r.cfg.pick(tol, "tol")?.unwrap_or(DEFAULT_TOL);
            let engines: Vec<String> = if engines.is_empty() {
                match r.cfg.0.get("engines") {
                    Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
                    None => vec!["analytic".into(), "oracle".into()],
                }
            } else {
                engines
            };
            let names: Vec<&str> = engines.iter().map(String::as_str).collect();
            let c = compare(&r.params, &names, &EngineRegistry::default(), &r.opts, tol)?;
            let text = match r.output {
                Output::Json => {
                    let mut v = serde_json::to_value(&c).expect("comparison serialises");
                    v["schema"] = json!(SCHEMA);
                    v["passed"] = json!(c.passed());
                    pretty(&v)
                }
                Output::Csv => c.to_csv(),
                Output::Table => c.to_table(),
            };
            emit(&r, &text)?;
            if !c.passed() {
                return Ok(ExitCode::from(3));
            }
        }
        Command::Sweep { common, sim, param, from, to, steps, engine } => {
            let r = resolve(&common, Some(&sim))?;
            let param: SweepParam = param.parse()?;
            let engine = r.cfg.pick(engine, "engine")?.unwrap_or_else(|| "analytic".into());
            let registry = EngineRegistry::default();
            let rows = sweep::sweep(&r.params, param, from, to, steps, registry.get(&engine)?, &r.opts)?;
            let text = match r.output {
                Output::Json => {
                    let trends: serde_json::Map<String, Value> = PerformanceReport::HEADLINE
                        .iter()
                        .map(|m| (m.to_string(), json!(sweep::trend(&rows, m))))
                        .collect();
                    pretty(&json!({
                        "schema": SCHEMA,
                        "param": param,
                        "engine": engine,
                        "rows": rows,
                        "trends": trends,
                    }))
                }
                Output::Csv => sweep::to_csv(&rows, param),
                Output::Table => {
                    let mut s: String = sweep::to_csv(&rows, param)
                        .lines()
                        .map(|l| format!("{}\n", l.replace(',', "  ").trim_end()))
                        .collect();
                    for m in ["mean_n0", "mean_n1", "p_vac"] {
                        s.push_str(&format!("trend {m}: {:?}\n", sweep::trend(&rows, m)));
                    }
                    for row in rows.iter().filter(|r| r.skipped.is_some()) {
                        s.push_str(&format!(
                            "skipped {}: {}\n",
                            sig12(row.value),
                            row.skipped.as_deref().unwrap_or("")
                        ));
                    }
                    s
                }
            };
            emit(&r, &text)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Validation(_) | Error::InvalidConfig(_) | Error::UnknownName { .. } | Error::InvalidState { .. } => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            match &e {
                Error::Validation(list) => {
                    eprintln!("error: invalid parameters");
                    for v in list {
                        eprintln!("  - {v}");
                    }
                }
                other => eprintln!("error: {other}"),
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
