use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_traits::Num;

use crtsat::crt::{self, CrtPlan, PRESET_LENGTHS};
use crtsat::pipeline::{self, GenerateConfig, Mode, OutputFormat, PipelineError, Verdict};
use crtsat::{numgen, reducer};

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(
    name = "crtsat",
    version,
    about = "Factoring-to-SAT instance generator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Crt,
    Naive,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Dimacs,
    Ext,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a formula for a random or given target.
    Generate {
        /// Bit length of each prime factor.
        #[arg(long)]
        l: usize,
        #[arg(long, value_enum, default_value = "crt")]
        mode: ModeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "dimacs")]
        format: FormatArg,
        /// Block the known solutions so the formula is unsatisfiable.
        #[arg(long)]
        negate: bool,
        /// Also write a satisfying assignment next to the formula.
        #[arg(long)]
        witness: bool,
        /// Target product in hexadecimal instead of a generated one.
        #[arg(long = "x", value_name = "HEX")]
        x: Option<String>,
        /// Plan override, e.g. "l=50 e0=27 e=5,7,8,9,11".
        #[arg(long)]
        plan: Option<String>,
        /// Output file; defaults to a name derived from the parameters inside
        /// $CRTSAT_OUT_DIR (or the current directory).
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(long, env = "CRTSAT_OUT_DIR", hide_env_values = true)]
        out_dir: Option<PathBuf>,
    },
    /// Print formula sizes per bit length next to the closed-form estimates.
    Report {
        #[arg(long, value_delimiter = ',', default_values_t = PRESET_LENGTHS.to_vec())]
        l: Vec<usize>,
        /// Seed of the instance built for the measured columns.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check a witness file against a formula file.
    Verify { formula: PathBuf, witness: PathBuf },
    /// Print and validate the plan used for a bit length.
    Plan {
        #[arg(long)]
        l: usize,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl ToString) -> Self {
        Failure {
            code: EXIT_CONFIG,
            message: message.to_string(),
        }
    }

    fn io(message: impl ToString) -> Self {
        Failure {
            code: EXIT_IO,
            message: message.to_string(),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn witness_path(formula: &Path) -> PathBuf {
    let mut name = formula.as_os_str().to_owned();
    name.push(".witness");
    PathBuf::from(name)
}

#[allow(clippy::too_many_arguments)]
fn generate(
    l: usize,
    mode: ModeArg,
    seed: u64,
    format: FormatArg,
    negate: bool,
    witness: bool,
    x: Option<String>,
    plan: Option<String>,
    out: Option<PathBuf>,
    out_dir: Option<PathBuf>,
) -> Result<(), Failure> {
    let mut config = GenerateConfig::new(
        l,
        match mode {
            ModeArg::Crt => Mode::Crt,
            ModeArg::Naive => Mode::Naive,
        },
        seed,
    );
    config.format = match format {
        FormatArg::Dimacs => OutputFormat::Dimacs,
        FormatArg::Ext => OutputFormat::Extended,
    };
    config.negate = negate;
    config.witness = witness;
    if let Some(hex) = &x {
        let digits = hex.trim_start_matches("0x");
        let value = BigUint::from_str_radix(digits, 16)
            .map_err(|_| Failure::config(format!("--x: `{hex}` is not a hexadecimal number")))?;
        config.x_override = Some(value);
    }
    if let Some(text) = &plan {
        let parsed: CrtPlan = text.parse().map_err(Failure::config)?;
        config.plan_override = Some(parsed);
    }

    let generated = pipeline::generate(&config).map_err(|e| match e {
        PipelineError::Numgen(numgen::NumgenError::Unsatisfied(_)) => Failure {
            code: EXIT_VERIFY_FAILED,
            message: e.to_string(),
        },
        other => Failure::config(other),
    })?;

    let extension = match config.format {
        OutputFormat::Dimacs => "cnf",
        OutputFormat::Extended => "ext",
    };
    let path = out.unwrap_or_else(|| {
        let name = format!("crtsat-l{l}-{}-s{seed}.{extension}", config.mode);
        out_dir.unwrap_or_default().join(name)
    });
    write(&path, &generated.text)?;
    println!("{}", generated.summary);
    println!("formula: {}", path.display());

    if let Some(w) = &generated.witness {
        let wpath = witness_path(&path);
        write(&wpath, &w.to_text())?;
        println!("witness: {}", wpath.display());
        verify(&path, &wpath)?;
    }
    Ok(())
}

fn report(lengths: &[usize], seed: u64) -> Result<(), Failure> {
    println!(
        "{:>5} | {:>9} {:>11} | {:>9} {:>11} {:>9} {:>11} | e0,e1,...",
        "l", "naive var", "naive cls", "est var", "est cls", "var", "cls"
    );
    for &l in lengths {
        let naive = reducer::estimate_naive_size(l);
        let mut config = GenerateConfig::new(l, Mode::Crt, seed);
        config.format = OutputFormat::Dimacs;
        let g = pipeline::generate(&config).map_err(Failure::config)?;
        let plan = g.reduction.plan().expect("crt mode").clone();
        let est = reducer::estimate_crt_size(&plan);
        let row: Vec<String> = std::iter::once(plan.e0)
            .chain(plan.exponents.iter().copied())
            .map(|e| e.to_string())
            .collect();
        println!(
            "{:>5} | {:>9} {:>11} | {:>9} {:>11} {:>9} {:>11} | {}",
            l,
            naive.variables,
            naive.cnf_clauses,
            est.variables,
            est.cnf_clauses,
            g.summary.variables,
            g.summary.clauses,
            row.join(", ")
        );
    }
    Ok(())
}

fn verify(formula: &Path, witness: &Path) -> Result<(), Failure> {
    let (f, w) = (read(formula)?, read(witness)?);
    match pipeline::verify(&f, &w).map_err(Failure::io)? {
        Verdict::Satisfied => {
            println!("satisfied");
            Ok(())
        }
        Verdict::Violated(i, clause) => Err(Failure {
            code: EXIT_VERIFY_FAILED,
            message: format!("violated clause {}: {clause}", i + 1),
        }),
        Verdict::LengthMismatch { formula, witness } => Err(Failure {
            code: EXIT_VERIFY_FAILED,
            message: format!("formula has {formula} variables, witness assigns {witness}"),
        }),
    }
}

fn plan(l: usize) -> Result<(), Failure> {
    let plan = crt::preset_or_plan(l).map_err(Failure::config)?;
    let source = if PRESET_LENGTHS.contains(&l) {
        "preset"
    } else {
        "greedy"
    };
    println!("{plan}");
    println!("source: {source}");
    println!("lcm bits: {} (need > {})", plan.capacity_bits(), 2 * l);
    match crt::validate_plan(&plan) {
        Ok(()) => {
            println!("valid: yes");
            Ok(())
        }
        Err(violations) => {
            for v in &violations {
                println!("violation: {v}");
            }
            Err(Failure {
                code: EXIT_VERIFY_FAILED,
                message: "plan failed validation".into(),
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate {
            l,
            mode,
            seed,
            format,
            negate,
            witness,
            x,
            plan,
            out,
            out_dir,
        } => generate(
            l, mode, seed, format, negate, witness, x, plan, out, out_dir,
        ),
        Command::Report { l, seed } => report(&l, seed),
        Command::Verify { formula, witness } => verify(&formula, &witness),
        Command::Plan { l } => plan(l),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
