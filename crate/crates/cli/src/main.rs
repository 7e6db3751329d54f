use clap::{Parser, Subcommand, ValueEnum};
use quadembed::commands::{self, MethodArg, SweepParam};
use quadembed::format::FileFormat;
use quadembed::problem::load_problem_or_example;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "quadembed",
    version,
    about = "Structure-preserving eigenvalue embedding for quadratic matrix polynomials"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Mm,
    Native,
}

impl From<FormatArg> for FileFormat {
    fn from(f: FormatArg) -> FileFormat {
        match f {
            FormatArg::Mm => FileFormat::MatrixMarket,
            FormatArg::Native => FileFormat::Native,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodOpt {
    Auto,
    Thm36,
    Thm37,
    Chu,
    Maodai,
    PsdAlgo,
}

impl From<MethodOpt> for MethodArg {
    fn from(m: MethodOpt) -> MethodArg {
        match m {
            MethodOpt::Auto => MethodArg::Auto,
            MethodOpt::Thm36 => MethodArg::Thm36,
            MethodOpt::Thm37 => MethodArg::Thm37,
            MethodOpt::Chu => MethodArg::Chu,
            MethodOpt::Maodai => MethodArg::MaoDai,
            MethodOpt::PsdAlgo => MethodArg::PsdAlgo,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the (star, eps1, eps2)-structure and regularity of a polynomial
    Verify {
        #[arg(long)]
        m: PathBuf,
        #[arg(long)]
        d: PathBuf,
        #[arg(long)]
        k: PathBuf,
        /// Class name: symmetric, hermitian, t-odd, *-odd, t-even, *-even
        #[arg(long)]
        class: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// All 2n eigenpairs via the companion linearization
    Eig {
        #[arg(long)]
        m: PathBuf,
        #[arg(long)]
        d: PathBuf,
        #[arg(long)]
        k: PathBuf,
    },
    /// Run the eigenvalue embedding and write perturbations plus a report
    Embed {
        /// Problem file (JSON)
        #[arg(long, conflicts_with = "example")]
        problem: Option<PathBuf>,
        /// Built-in example name (see `examples`)
        #[arg(long)]
        example: Option<String>,
        #[arg(long, value_enum, default_value = "auto")]
        method: MethodOpt,
        /// Output directory for dM/dD/dK, updated coefficients, and reports
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "mm")]
        format: FormatArg,
        /// Recompute the full spectrum and report RR_f and the fixed drift
        #[arg(long)]
        check_spillover: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate the embedding over a parameter grid, CSV to stdout or file
    Sweep {
        #[arg(long, conflicts_with = "example")]
        problem: Option<PathBuf>,
        #[arg(long)]
        example: Option<String>,
        /// Swept parameter, e.g. a2=-0.04:0.05:10 (repeatable)
        #[arg(long = "param")]
        params: Vec<String>,
        #[arg(long, value_enum, default_value = "auto")]
        method: MethodOpt,
        /// CSV output path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List built-in example problems or emit one as files
    Examples {
        /// Name of the example to write out
        #[arg(long)]
        emit: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "mm")]
        format: FormatArg,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("QUADEMBED_LOG")).init();
    let cli = Cli::parse();
    let mut stdout = std::io::stdout();
    let code = match run(cli, &mut stdout) {
        Ok(code) => code,
        Err(e) => {
            let code = e.exit_code();
            eprintln!("error: {e}");
            eprintln!("{}", serde_json::json!({ "error": format!("{e}"), "exit_code": code }));
            code
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli, out: &mut impl std::io::Write) -> quadembed_core::Result<i32> {
    match cli.cmd {
        Cmd::Verify { m, d, k, class, tol } => commands::cmd_verify(&m, &d, &k, &class, tol, out),
        Cmd::Eig { m, d, k } => commands::cmd_eig(&m, &d, &k, out),
        Cmd::Embed { problem, example, method, out: out_dir, format, check_spillover, seed } => {
            let problem = load_problem_or_example(problem.as_deref(), example.as_deref())?;
            commands::cmd_embed(
                &problem,
                method.into(),
                out_dir.as_deref(),
                format.into(),
                check_spillover,
                seed,
                out,
            )
        }
        Cmd::Sweep { problem, example, params, method, out: out_path, seed } => {
            let problem = load_problem_or_example(problem.as_deref(), example.as_deref())?;
            let parsed: Vec<SweepParam> = params
                .iter()
                .map(|p| commands::parse_sweep_param(p))
                .collect::<quadembed_core::Result<_>>()?;
            match out_path {
                Some(path) => {
                    let mut file = std::fs::File::create(&path).map_err(|e| {
                        quadembed_core::Error::Parse(format!("cannot create {}: {e}", path.display()))
                    })?;
                    commands::cmd_sweep(&problem, &parsed, method.into(), seed, &mut file)
                }
                None => commands::cmd_sweep(&problem, &parsed, method.into(), seed, out),
            }
        }
        Cmd::Examples { emit, out: out_dir, format } => {
            commands::cmd_examples(emit.as_deref(), out_dir.as_deref(), format.into(), out)
        }
    }
}
