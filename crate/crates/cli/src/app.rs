//! Argument parsing and dispatch.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use relaynet::network::Topology;
use relaynet::sim::SimConfig;
use relaynet::{Error, Modulation, RelayKind};

use crate::commands::{self, EvalMethod, Family, NetworkRun};
use crate::experiment::{ExperimentSpec, PowerGrid, PowerUnit};
use crate::table::{write_json, Table};
use crate::verify::{self, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "relaynet", version, about = "Generalized SNR of memoryless relay networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Relay maps f_AF, f_DF and f_EF over a range of observations.
    RelayFn(RelayFnArgs),
    /// Uncorrelated-error power of each strategy against source power.
    MsueeSweep(SweepArgs),
    /// L relays in parallel.
    Parallel(NetArgs),
    /// L relays in series.
    Serial(NetArgs),
    /// Mixed parallel and serial network (default or from a file).
    Hybrid(HybridArgs),
    /// Error correlation between parallel relays.
    Correlation(CorrelationArgs),
    /// Runs invariant suites; exits 1 when any check fails.
    Verify(VerifyArgs),
    /// Data series of a named figure or table.
    Reproduce(ReproduceArgs),
    /// Limits of the uncorrelated-error powers (same as `reproduce table1`).
    Table1(OutputArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Shorthand for --format json.
    #[arg(long)]
    pub json: bool,
    /// Write to this file instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

impl OutputArgs {
    fn format(&self) -> Format {
        if self.json {
            Format::Json
        } else {
            self.format
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PowerArgs {
    /// Single source power P.
    #[arg(long, conflicts_with = "sweep")]
    pub power: Option<f64>,
    /// Power grid start:stop:points, evenly spaced in the chosen unit.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Read --power and --sweep values in dB.
    #[arg(long)]
    pub db: bool,
}

impl PowerArgs {
    fn grid(&self, default: PowerGrid) -> Result<PowerGrid, Error> {
        let unit = if self.db { PowerUnit::Db } else { PowerUnit::Linear };
        match (&self.power, &self.sweep) {
            (Some(p), _) => {
                let g = PowerGrid { start: *p, stop: *p, points: 1, unit };
                g.validate()?;
                Ok(g)
            }
            (None, Some(s)) => PowerGrid::parse(s, unit),
            (None, None) => Ok(default),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    /// Monte Carlo samples per run.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    /// Root seed of all random streams.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Batches for standard errors (at least 30).
    #[arg(long, default_value_t = 32)]
    pub batches: usize,
    /// Samples used to tabulate relay maps without a quadrature form.
    #[arg(long, default_value_t = 1_000_000)]
    pub pilot_samples: u64,
}

impl SimArgs {
    fn config(&self) -> SimConfig {
        SimConfig { samples: self.samples, seed: self.seed, batches: self.batches, pilot_samples: self.pilot_samples }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    Af,
    Df,
    Ef,
}

impl From<Strategy> for RelayKind {
    fn from(s: Strategy) -> Self {
        match s {
            Strategy::Af => RelayKind::Af,
            Strategy::Df => RelayKind::Df,
            Strategy::Ef => RelayKind::Ef,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Closed,
    Quad,
    Mc,
}

impl From<MethodArg> for EvalMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Closed => EvalMethod::Closed,
            MethodArg::Quad => EvalMethod::Quad,
            MethodArg::Mc => EvalMethod::Mc,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RelayFnArgs {
    /// Real modulation: psk:2, pam:M or gauss.
    #[arg(long = "mod", default_value = "psk:2")]
    pub modulation: String,
    #[arg(long, default_value_t = 1.0)]
    pub power: f64,
    /// Relay power P_R (defaults to P).
    #[arg(long)]
    pub relay_power: Option<f64>,
    #[arg(long, default_value_t = -4.0, allow_negative_numbers = true)]
    pub r_min: f64,
    #[arg(long, default_value_t = 4.0, allow_negative_numbers = true)]
    pub r_max: f64,
    #[arg(long, default_value_t = 161)]
    pub points: usize,
    /// Also write the per-symbol input densities to this CSV file.
    #[arg(long)]
    pub density_csv: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long = "mod", default_value = "psk:2")]
    pub modulation: String,
    #[command(flatten)]
    pub power: PowerArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct NetArgs {
    /// Number of relays L.
    #[arg(long, default_value_t = 2)]
    pub relays: usize,
    #[command(flatten)]
    pub power: PowerArgs,
    /// Relay power P_R (defaults to P at every grid point).
    #[arg(long)]
    pub relay_power: Option<f64>,
    /// psk:M, pam:M, qam:M or gauss.
    #[arg(long = "mod", default_value = "psk:2")]
    pub modulation: String,
    /// Strategies to evaluate (comma separated).
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Strategy::Af, Strategy::Df, Strategy::Ef])]
    pub strategy: Vec<Strategy>,
    #[arg(long, value_enum, default_value = "quad")]
    pub method: MethodArg,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct HybridArgs {
    #[command(flatten)]
    pub net: NetArgs,
    /// Topology file; replaces the default hybrid network.
    #[arg(long)]
    pub topology: Option<PathBuf>,
    /// Keep the strategies written in the topology file.
    #[arg(long, requires = "topology")]
    pub keep_strategies: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CorrelationArgs {
    #[arg(long = "mod", default_value = "psk:4")]
    pub modulation: String,
    #[arg(long, value_enum, default_value = "ef")]
    pub strategy: Strategy,
    /// Source-to-relay gains, e.g. "1,1.5" or "1,0.5+0.5j".
    #[arg(long, default_value = "1,1.5")]
    pub gains: String,
    #[arg(long, default_value_t = 1.0)]
    pub power: f64,
    #[arg(long)]
    pub relay_power: Option<f64>,
    #[arg(long, value_enum, default_value = "quad")]
    pub method: MethodArg,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    All,
    Theorems,
    Appendices,
    Networks,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: SuiteArg,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig2,
    Fig5,
    Fig6,
    Fig8,
    Fig9,
    Fig10,
    Fig11,
    Table1,
}

#[derive(Debug, Clone, Args)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub figure: Figure,
    #[command(flatten)]
    pub power: PowerArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// Failure of a command, mapped to an exit code.
#[derive(Debug)]
pub enum Failure {
    Numerical(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(m) => Failure::Usage(m),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Numerical(format!("i/o error: {e}"))
    }
}

fn parse_mod(s: &str) -> Result<Modulation, Failure> {
    s.parse::<Modulation>().map_err(|e| Failure::Usage(e.to_string()))
}

fn strategies(list: &[Strategy]) -> Vec<Option<RelayKind>> {
    list.iter().map(|s| Some((*s).into())).collect()
}

fn base_spec(command: &str, out: &OutputArgs) -> ExperimentSpec {
    let mut spec = ExperimentSpec::new(command);
    spec.format = match out.format() {
        Format::Csv => "csv".into(),
        Format::Json => "json".into(),
    };
    spec.output = out.output.as_ref().map(|p| p.display().to_string());
    spec
}

fn with_sim(mut spec: ExperimentSpec, sim: &SimArgs, method: EvalMethod) -> ExperimentSpec {
    spec.method = Some(method.name().into());
    if method == EvalMethod::Mc {
        spec.samples = Some(sim.samples);
        spec.seed = Some(sim.seed);
        spec.batches = Some(sim.batches);
    }
    spec
}

fn emit(table: &Table, spec: &ExperimentSpec, out: &OutputArgs) -> Result<(), Failure> {
    let mut buf = Vec::new();
    match out.format() {
        Format::Csv => table.write_csv(&mut buf)?,
        Format::Json => write_json(&table.to_json(spec), &mut buf)?,
    }
    match &out.output {
        Some(path) => fs::write(path, buf)?,
        None => io::stdout().lock().write_all(&buf)?,
    }
    Ok(())
}

fn default_grid() -> PowerGrid {
    PowerGrid::single(1.0)
}

fn run_network(
    command: &str,
    family: Family,
    net: &NetArgs,
    keep: bool,
    topology_text: Option<String>,
) -> Result<(), Failure> {
    let grid = net.power.grid(default_grid())?;
    let method: EvalMethod = net.method.into();
    let modulation = parse_mod(&net.modulation)?;
    let strategies = if keep { vec![None] } else { strategies(&net.strategy) };
    let mut spec = with_sim(base_spec(command, &net.out), &net.sim, method);
    spec.modulation = Some(modulation.to_string());
    spec.powers = Some(grid);
    spec.relay_power = net.relay_power;
    spec.relays = match family {
        Family::Hybrid(_) => None,
        _ => Some(net.relays),
    };
    spec.strategies = strategies.iter().map(|k| k.map_or("file".into(), |k| k.to_string())).collect();
    spec.topology = topology_text;
    let run = NetworkRun {
        family,
        modulation,
        powers: grid.powers(),
        relay_power: net.relay_power,
        strategies,
        method,
        sim: net.sim.config(),
    };
    emit(&commands::network(&run)?, &spec, &net.out)
}

fn reproduce(args: &ReproduceArgs) -> Result<i32, Failure> {
    let sim = &args.sim;
    let name =
        format!("reproduce {}", args.figure.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default());
    let all = vec![Some(RelayKind::Af), Some(RelayKind::Df), Some(RelayKind::Ef)];
    let (family, method, default) = match args.figure {
        Figure::Table1 => {
            let spec = base_spec(&name, &args.out);
            emit(&commands::table1()?, &spec, &args.out)?;
            return Ok(EXIT_OK);
        }
        Figure::Fig2 => {
            let grid = args.power.grid(PowerGrid::log(0.01, 30.0, 50))?;
            let mut spec = base_spec(&name, &args.out);
            spec.modulation = Some("psk:2".into());
            spec.powers = Some(grid);
            spec.strategies = vec!["af".into(), "df".into(), "ef".into()];
            emit(&commands::msuee_sweep(Modulation::Psk(2), &grid.powers())?, &spec, &args.out)?;
            return Ok(EXIT_OK);
        }
        Figure::Fig5 => (Family::Parallel(2), EvalMethod::Quad, PowerGrid::log(0.1, 30.0, 20)),
        Figure::Fig6 => (Family::Parallel(2), EvalMethod::Mc, PowerGrid::log(0.1, 10.0, 8)),
        Figure::Fig8 => (Family::Serial(2), EvalMethod::Quad, PowerGrid::log(0.1, 30.0, 20)),
        Figure::Fig9 => (Family::Serial(2), EvalMethod::Mc, PowerGrid::log(0.1, 10.0, 8)),
        Figure::Fig10 => (Family::Hybrid(None), EvalMethod::Quad, PowerGrid::log(0.1, 30.0, 20)),
        Figure::Fig11 => (Family::Hybrid(None), EvalMethod::Mc, PowerGrid::log(0.1, 10.0, 8)),
    };
    let grid = args.power.grid(default)?;
    let mut spec = with_sim(base_spec(&name, &args.out), sim, method);
    spec.modulation = Some("psk:2".into());
    spec.powers = Some(grid);
    spec.relays = match family {
        Family::Parallel(l) | Family::Serial(l) => Some(l),
        Family::Hybrid(_) => None,
    };
    spec.strategies = vec!["af".into(), "df".into(), "ef".into()];
    let run = NetworkRun {
        family,
        modulation: Modulation::Psk(2),
        powers: grid.powers(),
        relay_power: None,
        strategies: all,
        method,
        sim: sim.config(),
    };
    emit(&commands::network(&run)?, &spec, &args.out)?;
    Ok(EXIT_OK)
}

fn dispatch(cli: Cli) -> Result<i32, Failure> {
    match cli.command {
        Command::RelayFn(a) => {
            let modulation = parse_mod(&a.modulation)?;
            let pr = a.relay_power.unwrap_or(a.power);
            let t =
                commands::relay_fn(modulation, a.power, pr, (a.r_min, a.r_max, a.points), a.density_csv.as_deref())?;
            let mut spec = base_spec("relay-fn", &a.out);
            spec.modulation = Some(modulation.to_string());
            spec.powers = Some(PowerGrid::single(a.power));
            spec.relay_power = Some(pr);
            spec.strategies = vec!["af".into(), "df".into(), "ef".into()];
            emit(&t, &spec, &a.out)?;
        }
        Command::MsueeSweep(a) => {
            let modulation = parse_mod(&a.modulation)?;
            let grid = a.power.grid(PowerGrid::log(0.01, 30.0, 50))?;
            let mut spec = base_spec("msuee-sweep", &a.out);
            spec.modulation = Some(modulation.to_string());
            spec.powers = Some(grid);
            spec.strategies = vec!["af".into(), "df".into(), "ef".into()];
            emit(&commands::msuee_sweep(modulation, &grid.powers())?, &spec, &a.out)?;
        }
        Command::Parallel(a) => {
            if a.relays == 0 {
                return Err(Failure::Usage("--relays must be at least 1".into()));
            }
            run_network("parallel", Family::Parallel(a.relays), &a, false, None)?
        }
        Command::Serial(a) => run_network("serial", Family::Serial(a.relays), &a, false, None)?,
        Command::Hybrid(a) => {
            let (family, text) = match &a.topology {
                Some(path) => {
                    let text =
                        fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                    let t: Topology = text.parse()?;
                    (Family::Hybrid(Some(t.clone())), Some(t.to_text()))
                }
                None => (Family::Hybrid(None), None),
            };
            run_network("hybrid", family, &a.net, a.keep_strategies, text)?
        }
        Command::Correlation(a) => {
            let modulation = parse_mod(&a.modulation)?;
            let gains = commands::parse_gains(&a.gains)?;
            let pr = a.relay_power.unwrap_or(a.power);
            let method: EvalMethod = a.method.into();
            let t = commands::correlation(modulation, a.strategy.into(), &gains, a.power, pr, method, &a.sim.config())?;
            let mut spec = with_sim(base_spec("correlation", &a.out), &a.sim, method);
            spec.modulation = Some(modulation.to_string());
            spec.powers = Some(PowerGrid::single(a.power));
            spec.relay_power = Some(pr);
            spec.relays = Some(gains.len());
            spec.strategies = vec![RelayKind::from(a.strategy).to_string()];
            emit(&t, &spec, &a.out)?;
        }
        Command::Verify(a) => {
            let suite = match a.suite {
                SuiteArg::All => Suite::All,
                SuiteArg::Theorems => Suite::Theorems,
                SuiteArg::Appendices => Suite::Appendices,
                SuiteArg::Networks => Suite::Networks,
            };
            let checks = verify::run(suite, &a.sim.config())?;
            let mut spec = with_sim(base_spec("verify", &a.out), &a.sim, EvalMethod::Mc);
            spec.strategies = vec![suite.name().into()];
            emit(&verify::to_table(&checks), &spec, &a.out)?;
            return Ok(if checks.iter().all(|c| c.pass) { EXIT_OK } else { EXIT_VERIFY_FAILED });
        }
        Command::Reproduce(a) => return reproduce(&a),
        Command::Table1(out) => emit(&commands::table1()?, &base_spec("table1", &out), &out)?,
    }
    Ok(EXIT_OK)
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("error: {m}");
            EXIT_NUMERICAL
        }
    }
}
