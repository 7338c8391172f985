use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use iap_core::domains::{gen_drinking_water, gen_elevator, gen_from_ilp, ElevatorSpec};
use iap_core::encoder::{default_cap, encode, EncodingConfig, Mode, ObjectiveKind};
use iap_core::io::{format_plan, parse_plan, parse_problem, problem_to_json};
use iap_core::oracle::{brute_force_shortest, validate, OracleResult, DEFAULT_FRONTIER_CAP};
use iap_core::search::{solve_iap, solve_k01, Phi, SearchConfig, SearchStatus};
use iap_core::{IapError, MultiSet, ProblemInstance};
use serde::Deserialize;

const EXIT_UNSOLVED: u8 = 10;
const EXIT_INCONCLUSIVE: u8 = 11;
const EXIT_INVALID: u8 = 12;
const EXIT_INPUT: u8 = 2;

#[derive(Parser)]
#[command(name = "iap", version, about = "Integer addition planner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a plan and print it, one action per line.
    Solve(SolveArgs),
    /// Simulate a plan and report the first failing step.
    Validate { problem: PathBuf, plan: PathBuf },
    /// Print the length of the longest violation cycle and the violation edges.
    Classify { problem: PathBuf },
    /// Print the integer program for one multi-set in LP format.
    Encode(EncodeArgs),
    /// Write a generated problem as JSON.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Breadth-first search for a shortest plan.
    Oracle {
        problem: PathBuf,
        /// Maximum plan length, the goal included.
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = DEFAULT_FRONTIER_CAP)]
        frontier_cap: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PhiArg {
    Bfs,
    Violation,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Length,
    Cost,
    Defaults,
}

impl From<ObjectiveArg> for ObjectiveKind {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Length => ObjectiveKind::MinLength,
            ObjectiveArg::Cost => ObjectiveKind::Cost,
            ObjectiveArg::Defaults => ObjectiveKind::Defaults,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Problem JSON, or `-` for stdin.
    problem: PathBuf,
    #[arg(long, value_enum, default_value = "violation")]
    phi: PhiArg,
    #[arg(long, value_enum, default_value = "length")]
    objective: ObjectiveArg,
    /// Occurrence cap per ordered copy; derived from the problem by default.
    #[arg(long, value_parser = clap::value_parser!(i64).range(1..))]
    cap: Option<i64>,
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    max_iters: u64,
    /// Use the decision procedure for problems whose violation cycles have
    /// length at most one.
    #[arg(long)]
    k01: bool,
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Args)]
struct EncodeArgs {
    problem: PathBuf,
    #[arg(long)]
    relaxed: bool,
    /// Ordered copies per action, e.g. `u=2,d=1`; unlisted actions get one.
    #[arg(long, value_delimiter = ',')]
    mu: Vec<String>,
    #[arg(long, value_parser = clap::value_parser!(i64).range(1..))]
    cap: Option<i64>,
    #[arg(long, value_enum)]
    objective: Option<ObjectiveArg>,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Offline elevator with the car starting at floor 0.
    Elevator {
        #[arg(long, allow_hyphen_values = true)]
        min: i64,
        #[arg(long, allow_hyphen_values = true)]
        max: i64,
        /// A passenger as `from:to`; repeatable.
        #[arg(long = "passenger", value_parser = parse_passenger)]
        passengers: Vec<(i64, i64)>,
    },
    /// Feasibility of `M x <= rhs` over the naturals, from
    /// `{"matrix": [[..]], "rhs": [..]}`.
    Ilp { system: PathBuf },
    /// Fill a glass and drink `i` times.
    Water {
        #[arg(long)]
        i: i64,
    },
}

fn parse_passenger(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected from:to, got `{s}`"))?;
    let floor = |t: &str| {
        t.trim()
            .parse::<i64>()
            .map_err(|e| format!("bad floor `{t}`: {e}"))
    };
    Ok((floor(a)?, floor(b)?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFile {
    matrix: Vec<Vec<i64>>,
    rhs: Vec<i64>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<IapError> for Failure {
    fn from(e: IapError) -> Self {
        let code = match e {
            IapError::Soundness(_) | IapError::Ilp(_) | IapError::Encoding(_) => 1,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn input_error(message: String) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message,
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| input_error(format!("stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<ProblemInstance, Failure> {
    let text = read_input(path)?;
    parse_problem(&text).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn write_output(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure {
        code: 1,
        message: format!("{}: {e}", path.display()),
    })
}

fn solve(args: SolveArgs) -> Result<u8, Failure> {
    let pi = load(&args.problem)?;
    let cfg = SearchConfig {
        phi: match args.phi {
            PhiArg::Bfs => Phi::Bfs,
            PhiArg::Violation => Phi::ViolationGuided,
        },
        objective: args.objective.into(),
        max_iterations: args.max_iters as usize,
        cap: args.cap,
        ..SearchConfig::default()
    };
    let result = if args.k01 {
        solve_k01(&pi, &cfg)?
    } else {
        solve_iap(&pi, &cfg)?
    };
    if let Some(path) = &args.trace {
        write_output(path, &(result.trace_json() + "\n"))?;
    }
    let status = match result.status {
        SearchStatus::Solved => "solved",
        SearchStatus::ProvenUnsolvable => "proven-unsolvable",
        SearchStatus::NoSolutionFound => "no-solution-found",
        SearchStatus::Inconclusive => "inconclusive",
    };
    if let Some(plan) = &result.plan {
        print!("{}", format_plan(&pi, plan));
        println!(
            "# status: {status}, length: {}, iterations: {}",
            plan.len(),
            result.iterations()
        );
    } else {
        println!("# status: {status}, iterations: {}", result.iterations());
    }
    if let Some(path) = &args.dot {
        match &result.mvpop {
            Some(p) => write_output(path, &p.to_dot(&pi))?,
            None => eprintln!("no MvPOP to draw; {} not written", path.display()),
        }
    }
    Ok(match result.status {
        SearchStatus::Solved => 0,
        SearchStatus::ProvenUnsolvable | SearchStatus::NoSolutionFound => EXIT_UNSOLVED,
        SearchStatus::Inconclusive => EXIT_INCONCLUSIVE,
    })
}

fn validate_cmd(problem: &Path, plan: &Path) -> Result<u8, Failure> {
    let pi = load(problem)?;
    let plan = parse_plan(&pi, &read_input(plan)?)?;
    let v = validate(&plan, &pi)?;
    println!("{}", v.describe(&pi));
    Ok(if v.is_valid() { 0 } else { EXIT_INVALID })
}

fn classify(problem: &Path) -> Result<u8, Failure> {
    let pi = load(problem)?;
    println!("k = {}", pi.iad.classify_k());
    let rel = pi.iad.violation_relation();
    let regs = pi.iad.registers();
    for (set, op) in [(&rel.lower, ">="), (&rel.upper, "<=")] {
        for &(a, b, x) in set {
            println!("{} ~{op}{} {}", pi.name(a), regs[x], pi.name(b));
        }
    }
    Ok(0)
}

fn encode_cmd(args: EncodeArgs) -> Result<u8, Failure> {
    let pi = load(&args.problem)?;
    let mut ms = MultiSet::ones(&pi);
    for item in &args.mu {
        let (name, n) = item
            .split_once('=')
            .ok_or_else(|| input_error(format!("expected action=count, got `{item}`")))?;
        let n: usize = n
            .trim()
            .parse()
            .map_err(|e| input_error(format!("bad count in `{item}`: {e}")))?;
        let a = pi.action_id(name.trim())?;
        if a == pi.goal && n != 1 {
            return Err(input_error("the goal has exactly one copy".into()));
        }
        ms.set(a, n);
    }
    let mode = if args.relaxed {
        Mode::Relaxed
    } else {
        Mode::Full
    };
    let cap = args.cap.unwrap_or_else(|| default_cap(&pi, &ms));
    let objective = args.objective.map_or(ObjectiveKind::None, Into::into);
    let enc = encode(&pi, &ms, &EncodingConfig::new(cap, mode, objective))?;
    print!("{}", iap_ilp::to_lp_format(&enc.model));
    Ok(0)
}

fn gen(cmd: GenCommand) -> Result<u8, Failure> {
    let pi = match cmd {
        GenCommand::Elevator {
            min,
            max,
            passengers,
        } => gen_elevator(&ElevatorSpec::new(min, max, passengers))?,
        GenCommand::Ilp { system } => {
            let text = read_input(&system)?;
            let s: SystemFile = serde_json::from_str(&text).map_err(|e| {
                input_error(format!(
                    "{}:{}:{}: {e}",
                    system.display(),
                    e.line(),
                    e.column()
                ))
            })?;
            gen_from_ilp(&s.matrix, &s.rhs)?
        }
        GenCommand::Water { i } => gen_drinking_water(i)?,
    };
    print!("{}", problem_to_json(&pi));
    Ok(0)
}

fn oracle(problem: &Path, depth: usize, frontier_cap: usize) -> Result<u8, Failure> {
    let pi = load(problem)?;
    Ok(match brute_force_shortest(&pi, depth, frontier_cap)? {
        OracleResult::Found(plan) => {
            print!("{}", format_plan(&pi, &plan));
            println!("# shortest, length: {}", plan.len());
            0
        }
        OracleResult::NoneWithinDepth => {
            println!("# no plan within depth {depth}");
            EXIT_UNSOLVED
        }
        OracleResult::Inconclusive => {
            println!("# frontier exceeded {frontier_cap} situations");
            EXIT_INCONCLUSIVE
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(args) => solve(args),
        Command::Validate { problem, plan } => validate_cmd(&problem, &plan),
        Command::Classify { problem } => classify(&problem),
        Command::Encode(args) => encode_cmd(args),
        Command::Gen(cmd) => gen(cmd),
        Command::Oracle {
            problem,
            depth,
            frontier_cap,
        } => oracle(&problem, depth, frontier_cap),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
