use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use apxsym::detsys::Mode;
use apxsym::numeval::{write_csv, write_svg, GridTable};
use apxsym::parse::{parse_problem, ProblemSpec};
use apxsym::verify::{
    check_determining, check_isc, check_symmetry, derive_determining, epsilon_convergence,
    prepare_solution, solution_grid, solution_table, verify_solution, VerificationReport,
    VerifyOptions,
};

#[derive(Parser)]
#[command(name = "apxsym", version, about = "Approximate symmetries of perturbed PDEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the determining equations of a generator ansatz, or check them
    /// against a concrete generator with --check.
    DeriveDetermining {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        set: String,
        #[arg(long, default_value = "lie")]
        mode: Mode,
        /// Concrete generator whose components replace the ansatz seeds.
        #[arg(long)]
        check: Option<String>,
        #[command(flatten)]
        verify: VerifyArgs,
    },
    /// Restricted invariance condition of a fixture generator.
    CheckSymmetry {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        set: String,
        #[arg(long, default_value = "q-conditional")]
        mode: Mode,
        #[command(flatten)]
        verify: VerifyArgs,
    },
    /// Invariant surface conditions on a representation with opaque profiles.
    CheckIsc {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        rep: String,
        #[command(flatten)]
        verify: VerifyArgs,
    },
    /// Graded residual of a closed-form solution.
    VerifySolution {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        solution: String,
        #[command(flatten)]
        verify: VerifyArgs,
    },
    /// Grid residual of the untruncated equation for a list of ε values.
    Convergence {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        solution: String,
        #[arg(long)]
        values: String,
        #[arg(long, value_delimiter = ',', default_value = "0.03,0.015")]
        eps: Vec<f64>,
        #[command(flatten)]
        grid: GridArgs,
        /// Accepted range for consecutive residual ratios.
        #[arg(long, default_value_t = 3.0)]
        min_ratio: f64,
        #[arg(long, default_value_t = 5.3)]
        max_ratio: f64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Solution values on the (t, x) grid as CSV, optionally an SVG heatmap.
    Grid {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        solution: String,
        #[arg(long)]
        values: String,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Input {
    /// Problem file in the apx language.
    file: PathBuf,
    /// Override the expansion order declared by `small`.
    #[arg(long)]
    order: Option<u32>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Include elapsed time in the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 61)]
    t_steps: usize,
    #[arg(long, default_value_t = 101)]
    x_steps: usize,
}

/// Failure classes with their exit codes.
enum Failure {
    Verification,
    Config(String),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

fn config<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Config(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("APXSYM_THREADS") else { return Ok(()) };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("APXSYM_THREADS must be a positive integer, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn load(input: &Input) -> Result<ProblemSpec, Failure> {
    let text = fs::read_to_string(&input.file)
        .map_err(|e| Failure::Config(format!("{}: {e}", input.file.display())))?;
    let mut spec = parse_problem(&text)
        .map_err(|e| Failure::Config(format!("{}:{e}", input.file.display())))?;
    if let Some(p) = input.order {
        spec.order = p;
    }
    Ok(spec)
}

impl VerifyArgs {
    fn options(&self) -> Result<VerifyOptions, Failure> {
        if !(self.tol > 0.0) {
            return Err(Failure::Config("--tol must be positive".into()));
        }
        if self.samples == 0 {
            return Err(Failure::Config("--samples must be positive".into()));
        }
        Ok(VerifyOptions {
            samples: self.samples,
            tol: self.tol,
            seed: self.seed,
            timing: self.timing,
        })
    }
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::DeriveDetermining { input, set, mode, check, verify } => {
            let spec = load(&input)?;
            let ansatz = generator(&spec, &set)?;
            match check {
                Some(name) => {
                    let concrete = generator(&spec, &name)?;
                    let r = check_determining(&spec, ansatz, concrete, mode, &verify.options()?)
                        .map_err(config)?;
                    report(&r, verify.json.as_deref())
                }
                None => {
                    let sys = derive_determining(&spec, ansatz, mode).map_err(config)?;
                    match &verify.json {
                        Some(p) => write_json(&sys.to_json(), Some(p)),
                        None => {
                            io::stdout().write_all(sys.to_dsl().as_bytes())?;
                            Ok(())
                        }
                    }
                }
            }
        }
        Command::CheckSymmetry { input, set, mode, verify } => {
            let spec = load(&input)?;
            let def = generator(&spec, &set)?;
            let r = check_symmetry(&spec, def, mode, &verify.options()?).map_err(config)?;
            report(&r, verify.json.as_deref())
        }
        Command::CheckIsc { input, rep, verify } => {
            let spec = load(&input)?;
            let r = check_isc(&spec, &rep, &verify.options()?).map_err(config)?;
            report(&r, verify.json.as_deref())
        }
        Command::VerifySolution { input, solution, verify } => {
            let spec = load(&input)?;
            let r = verify_solution(&spec, &solution, &verify.options()?).map_err(config)?;
            report(&r, verify.json.as_deref())
        }
        Command::Convergence { input, solution, values, eps, grid, min_ratio, max_ratio, json } => {
            let spec = load(&input)?;
            if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0)) {
                return Err(Failure::Config("--eps needs positive values".into()));
            }
            let sol = prepare_solution(&spec, &solution).map_err(config)?;
            let g = solution_grid(&spec, &sol, grid.t_steps, grid.x_steps).map_err(config)?;
            let table = epsilon_convergence(&spec, &solution, &values, &g, &eps).map_err(config)?;
            let passed = table.rows.iter().all(|r| r.max_residual.is_finite())
                && table.ratios.iter().all(|r| (min_ratio..=max_ratio).contains(r));
            let mut v = serde_json::to_value(&table).expect("table serializes");
            v["passed"] = passed.into();
            for (row, c) in table.rows.iter().zip(&table.constants) {
                eprintln!("eps {:e}: max residual {:e}, constant {:e}", row.eps, row.max_residual, c);
            }
            eprintln!("ratios {:?}: {}", table.ratios, verdict_word(passed));
            write_json(&v, json.as_deref())?;
            if passed { Ok(()) } else { Err(Failure::Verification) }
        }
        Command::Grid { input, solution, values, grid, csv, svg } => {
            let spec = load(&input)?;
            let table = solution_table(&spec, &solution, &values, grid.t_steps, grid.x_steps)
                .map_err(config)?;
            emit_grid(&table, csv.as_deref(), svg.as_deref())
        }
    }
}

fn generator<'a>(spec: &'a ProblemSpec, name: &str) -> Result<&'a apxsym::parse::GeneratorDef, Failure> {
    spec.generator(name)
        .ok_or_else(|| Failure::Config(format!("unknown generator `{name}`")))
}

fn verdict_word(passed: bool) -> &'static str {
    if passed { "pass" } else { "FAIL" }
}

/// Writes the report and maps its outcome to the exit status.
fn report(r: &VerificationReport, json: Option<&Path>) -> Result<(), Failure> {
    for c in &r.checks {
        if !c.verdict.is_zero() {
            eprintln!("equation {} {}: {:?}", c.equation, c.label, c.verdict);
        }
    }
    eprintln!("{} {}: {}", r.command, r.target, verdict_word(r.passed));
    write_json(&r.to_json(), json)?;
    if r.passed { Ok(()) } else { Err(Failure::Verification) }
}

fn write_json(v: &serde_json::Value, path: Option<&Path>) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(v).expect("json serializes");
    text.push('\n');
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Config(format!("{}: {e}", p.display()))),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn emit_grid(table: &GridTable, csv: Option<&Path>, svg: Option<&Path>) -> Result<(), Failure> {
    let mut buf = Vec::new();
    write_csv(&mut buf, table)?;
    match csv {
        Some(p) => fs::write(p, &buf).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?,
        None => io::stdout().write_all(&buf)?,
    }
    if let Some(p) = svg {
        let mut out = Vec::new();
        write_svg(&mut out, table, 0)?;
        fs::write(p, out).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}
