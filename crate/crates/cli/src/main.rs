use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use genlambda_cli::{
    cmd_certify_integrality, cmd_certify_remark34, cmd_cm, cmd_eseries, cmd_lambda, cmd_psi, cmd_suite, exit_code,
    write_file, FileConfig, Outcome, Settings, SuiteName, EXIT_FAIL, EXIT_PASS, EXIT_USAGE,
};

#[derive(Parser)]
#[command(
    name = "genlambda",
    version,
    about = "Generalized lambda functions: q-expansions, Ψ polynomials and CM values"
)]
struct Cli {
    /// Level N ≥ 2.
    #[arg(long, global = true)]
    level: Option<u32>,
    /// Absolute q-precision (start precision for `psi`).
    #[arg(long, global = true)]
    prec: Option<i64>,
    /// Decimal digits for numerical certification.
    #[arg(long, global = true)]
    digits: Option<u32>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for randomized checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file or directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON file with default settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// q-expansion of E(τ; r, s).
    Eseries {
        #[arg(long)]
        pair: String,
        #[arg(long)]
        json: bool,
    },
    /// q-expansion of Λ_k, Λ_k∘A, or the lambda function of a basis.
    Lambda {
        #[arg(long)]
        k: Option<i64>,
        /// a,b,c,d
        #[arg(long, allow_hyphen_values = true)]
        matrix: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        q1: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        q2: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Integrality certificates or the level-6 coincidence.
    Certify {
        #[command(subcommand)]
        what: CertifyCmd,
    },
    /// The polynomial Ψ_k over Z[ζ][j].
    Psi {
        #[arg(long)]
        k: i64,
    },
    /// Certify Ψ_k(Λ_k(θ), j(θ)) = 0 at an imaginary quadratic point.
    Cm {
        #[arg(long)]
        k: i64,
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        disc: Option<i64>,
        /// Ψ table written by `psi`.
        #[arg(long)]
        psi: Option<PathBuf>,
    },
    /// Run a verification suite and write one JSON report per level.
    Suite {
        name: SuiteName,
        #[arg(long, value_delimiter = ',')]
        levels: Vec<u32>,
    },
}

#[derive(Subcommand)]
enum CertifyCmd {
    Integrality,
    Remark34,
}

fn run(cli: Cli) -> genlambda::Result<(Outcome, bool)> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let levels = match &cli.cmd {
        Cmd::Suite { levels, .. } => Some(levels.clone()),
        _ => None,
    };
    let flags = FileConfig {
        level: cli.level,
        levels,
        prec: cli.prec,
        digits: cli.digits,
        jobs: cli.jobs,
        seed: cli.seed,
        out: cli.out.clone(),
    };
    let st = Settings::merge(flags, file);
    if let Some(j) = st.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| genlambda::Error::Precondition(e.to_string()))?;
    }
    let mut writes_out = true;
    let outcome = match &cli.cmd {
        Cmd::Eseries { pair, json } => {
            let mut o = cmd_eseries(&st, pair)?;
            if *json {
                o.text = serde_json::to_string_pretty(&o.json).unwrap_or_default();
            }
            o
        }
        Cmd::Lambda {
            k,
            matrix,
            q1,
            q2,
            json,
        } => {
            let mut o = cmd_lambda(&st, *k, matrix.as_deref(), q1.as_deref(), q2.as_deref())?;
            if *json {
                o.text = serde_json::to_string_pretty(&o.json).unwrap_or_default();
            }
            o
        }
        Cmd::Certify {
            what: CertifyCmd::Integrality,
        } => cmd_certify_integrality(&st)?,
        Cmd::Certify {
            what: CertifyCmd::Remark34,
        } => cmd_certify_remark34(&st)?,
        Cmd::Psi { k } => {
            writes_out = false;
            cmd_psi(&st, *k)?
        }
        Cmd::Cm { k, theta, disc, psi } => cmd_cm(&st, *k, theta.as_deref(), *disc, psi.as_deref())?,
        Cmd::Suite { name, .. } => {
            writes_out = false;
            cmd_suite(&st, *name)?
        }
    };
    if writes_out {
        if let Some(out) = &st.out {
            write_file(out, &outcome.json)?;
        }
    }
    let passed = outcome.passed;
    Ok((outcome, passed))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok((o, passed)) => {
            println!("{}", o.text);
            ExitCode::from(if passed { EXIT_PASS } else { EXIT_FAIL } as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
