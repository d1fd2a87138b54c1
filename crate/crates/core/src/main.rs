use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use xorcount::driver::{
    calibrate, AbortReason, Generator, PlantedGenerator, RandomCnfGenerator, ReportFormat, RunConfig,
    Status,
};
use xorcount::estimator::PriorKind;
use xorcount::smt::{SmtBackend, SmtProblem, SolverProcessConfig};
use xorcount::{parse_dimacs_str, run_search, CnfBackend};

const EXIT_ABORTED: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_SOLVER: u8 = 4;

#[derive(Parser)]
#[command(name = "xorcount", version, about = "Approximate projected model counting")]
struct Cli {
    /// More log output (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Estimate the number of distinct projected solutions of a formula.
    Count(CountArgs),
    /// Run many seeded searches on generated formulas and score them.
    Calibrate(CalibrateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Cnf,
    Smt,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Structured,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Text => ReportFormat::Text,
            Format::Structured => ReportFormat::Structured,
        }
    }
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, default_value_t = xorcount::driver::DEFAULT_CL)]
    cl: f64,
    #[arg(long, default_value_t = xorcount::driver::DEFAULT_ALPHA)]
    alpha: f64,
    /// Stop once the interval is at most this many bits long.
    #[arg(long, default_value_t = xorcount::driver::DEFAULT_THRES)]
    thres: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = xorcount::estimator::DEFAULT_PARTICLES)]
    particles: usize,
    /// uniform-64, uniform-width or uniform:<lo>:<hi>.
    #[arg(long, default_value = "uniform-64")]
    prior: PriorKind,
    #[arg(long, default_value_t = xorcount::driver::DEFAULT_MAX_ITERATIONS)]
    max_iterations: u32,
    /// Most solutions enumerated by any one query.
    #[arg(long, default_value_t = xorcount::driver::DEFAULT_EXHAUST_CAP)]
    exhaust_cap: u64,
    /// Time limit per query, in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

impl SearchArgs {
    fn config(&self, sound: bool) -> RunConfig {
        RunConfig {
            cl: self.cl,
            alpha: self.alpha,
            thres: self.thres,
            sound,
            seed: self.seed,
            n_particles: self.particles,
            prior: self.prior,
            max_iterations: self.max_iterations,
            exhaust_cap: self.exhaust_cap,
            initial_plan: None,
            timeout: self.timeout.map(Duration::from_secs_f64),
        }
    }
}

#[derive(Args)]
struct CountArgs {
    /// DIMACS CNF or SMT-LIB2 file; `-` reads standard input.
    input: PathBuf,
    #[arg(long, value_enum, default_value = "cnf")]
    mode: Mode,
    /// Output term to count (SMT mode).
    #[arg(long)]
    output_name: Option<String>,
    /// Width of the output term in bits (SMT mode).
    #[arg(long)]
    output_width: Option<usize>,
    /// Solver command line (SMT mode); defaults to $XORCOUNT_SMT_SOLVER or `z3 -in`.
    #[arg(long)]
    solver_cmd: Option<String>,
    /// Also report probabilistically sound bounds and require them to be narrow.
    #[arg(long)]
    sound: bool,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args)]
struct CalibrateArgs {
    /// planted:<free>:<width> or random.
    #[arg(long, default_value = "planted:10:16")]
    generator: String,
    #[arg(long, default_value_t = 100)]
    runs: usize,
    #[command(flatten)]
    search: SearchArgs,
}

fn read_input(path: &PathBuf) -> std::io::Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path)
    }
}

fn input_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_INPUT)
}

fn count(args: CountArgs) -> ExitCode {
    let text = match read_input(&args.input) {
        Ok(t) => t,
        Err(e) => return input_error(format!("{}: {e}", args.input.display())),
    };
    let config = args.search.config(args.sound);
    let result = match args.mode {
        Mode::Cnf => {
            let f = match parse_dimacs_str(&text) {
                Ok(f) => f,
                Err(e) => return input_error(e),
            };
            let mut backend = CnfBackend::new(f).with_timeout(config.timeout);
            run_search(&mut backend, &config)
        }
        Mode::Smt => {
            let (Some(name), Some(width)) = (&args.output_name, args.output_width) else {
                return input_error("SMT mode needs --output-name and --output-width");
            };
            let problem = match SmtProblem::parse(&text, name, width) {
                Ok(p) => p,
                Err(e) => return input_error(e),
            };
            let solver = match &args.solver_cmd {
                Some(cmd) => SolverProcessConfig::from_command_line(cmd),
                None => SolverProcessConfig::from_env(),
            };
            let Some(mut solver) = solver else {
                eprintln!("error: no SMT solver found; pass --solver-cmd");
                return ExitCode::from(EXIT_SOLVER);
            };
            solver.query_timeout = config.timeout;
            run_search(&mut SmtBackend::new(problem, solver), &config)
        }
    };
    let report = match result {
        Ok(r) => r,
        Err(e) => return input_error(e),
    };
    print!("{}", report.render(args.search.format.into()));
    match (report.status, &report.abort_reason) {
        (Status::Aborted, Some(AbortReason::Solver { .. })) => ExitCode::from(EXIT_SOLVER),
        (Status::Aborted, _) => ExitCode::from(EXIT_ABORTED),
        _ => ExitCode::SUCCESS,
    }
}

fn parse_generator(spec: &str) -> Result<Box<dyn Generator>, String> {
    if spec == "random" {
        return Ok(Box::new(RandomCnfGenerator::default()));
    }
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        ["planted", free, width] => {
            let free: u32 = free.parse().map_err(|_| format!("bad free-bit count in `{spec}`"))?;
            let width: u32 = width.parse().map_err(|_| format!("bad width in `{spec}`"))?;
            if width == 0 || free > width || width > 20 {
                return Err(format!("need 0 <= free <= width <= 20 in `{spec}`"));
            }
            Ok(Box::new(PlantedGenerator::new(free, width)))
        }
        _ => Err(format!("unknown generator `{spec}` (planted:<free>:<width> or random)")),
    }
}

struct Dyn<'a>(&'a dyn Generator);

impl Generator for Dyn<'_> {
    fn generate(&self, seed: u64) -> xorcount::CnfFormula {
        self.0.generate(seed)
    }
    fn describe(&self) -> String {
        self.0.describe()
    }
}

fn run_calibration(args: CalibrateArgs) -> ExitCode {
    let generator = match parse_generator(&args.generator) {
        Ok(g) => g,
        Err(e) => return input_error(e),
    };
    let config = args.search.config(false);
    match calibrate(&Dyn(generator.as_ref()), args.runs, &config) {
        Ok(table) => {
            match args.search.format {
                Format::Text => print!("{}", table.to_text()),
                Format::Structured => {
                    println!("{}", serde_json::to_string_pretty(&table).expect("table serializes"))
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => input_error(e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match cli.command {
        Cmd::Count(args) => count(args),
        Cmd::Calibrate(args) => run_calibration(args),
    }
}
