//! `xi-s3`: construct harmonic bases, apply the averaging operator, solve
//! `□u = c` and run the verification suite.
//!
//! Exit codes: 0 when everything passes, 1 on a failed verification, 2 on
//! usage or input errors.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use xis3::harmonics::harmonic_basis;
use xis3::operators::{
    box_apply, solve_box, xi_spectral_with, xi_symbolic_with_cap, xi_zonal_kernel_general, TransformTable,
};
use xis3::poly::{MultiPoly, DEFAULT_DEGREE_CAP};
use xis3::product::{analyze, synthesize, BiPoly, SpectralCoeffs};
use xis3::quaternion::haar_sample;
use xis3::scalar::Rational;
use xis3::verify::{verify, ModeSelection, VerifyOptions, EXACT_DEGREE_CAP};

const BASIS_DEGREE_CAP: usize = 12;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Input(#[from] xis3::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            _ => 2,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "xi-s3", version, about = "Averaging operator and ultrahyperbolic operator on S3 x S3")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Symbolic,
    Spectral,
    Kernel,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Exact,
    Float,
    Both,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the harmonic basis of H_k with its Gram data.
    Basis {
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Largest admissible k.
        #[arg(long, default_value_t = BASIS_DEGREE_CAP)]
        degree_cap: usize,
    },
    /// Apply T to a polynomial or spectral JSON document.
    Xi {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "symbolic")]
        method: Method,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Seed for the sample points of the kernel method.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of sample point pairs for the kernel method.
        #[arg(long, default_value_t = 8)]
        points: usize,
        /// Degree cap: total degree of f(xg, gy) for the symbolic method,
        /// truncation for the spectral method.
        #[arg(long)]
        degree_cap: Option<usize>,
    },
    /// Solve Box u = c for spectral data c with vanishing diagonal blocks.
    SolveBox {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the verification suite and emit a report.
    Verify {
        #[arg(long, default_value_t = 2)]
        max_degree: usize,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ModeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Raise the exact and float truncation caps.
        #[arg(long)]
        degree_cap: Option<usize>,
    },
}

fn read_json(path: &Path) -> CliResult<Value> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(xis3::Error::Json(e)))
}

fn emit(output: Option<&Path>, text: &str) -> CliResult<()> {
    match output {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source }),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

enum Input {
    Poly(BiPoly),
    Spectral(SpectralCoeffs<Rational>),
}

/// Polynomial documents carry `nvars`, spectral documents carry `N`.
fn parse_input(v: &Value) -> CliResult<Input> {
    if v.get("nvars").is_some() {
        let p: MultiPoly = serde_json::from_value(v.clone()).map_err(xis3::Error::Json)?;
        let p = match p.nvars() {
            8 => p,
            4 => p.embed(8, 0)?,
            n => return Err(CliError::Usage(format!("polynomial input must have 4 or 8 variables, got {n}"))),
        };
        Ok(Input::Poly(BiPoly::new(p)?))
    } else if v.get("N").is_some() {
        Ok(Input::Spectral(SpectralCoeffs::from_json(v)?))
    } else {
        Err(CliError::Usage("input is neither a polynomial ({\"nvars\", \"terms\"}) nor spectral ({\"N\", \"blocks\"}) JSON".into()))
    }
}

fn exact_table(n: usize, cap: Option<usize>) -> CliResult<TransformTable<Rational>> {
    let cap = cap.unwrap_or(EXACT_DEGREE_CAP);
    if n > cap {
        return Err(CliError::Usage(format!("truncation {n} exceeds the exact cap {cap}; raise it with --degree-cap")));
    }
    if n > EXACT_DEGREE_CAP {
        eprintln!("warning: exact transforms above degree {EXACT_DEGREE_CAP} are slow");
        return Ok(TransformTable::exact_uncapped(n)?);
    }
    Ok(TransformTable::exact(n)?)
}

fn cmd_basis(k: usize, format: Format, output: Option<&Path>, cap: usize) -> CliResult<()> {
    if k > cap {
        return Err(CliError::Usage(format!("k = {k} exceeds the degree cap {cap}")));
    }
    let basis = harmonic_basis(k as u32);
    let text = match format {
        Format::Json => pretty(&basis.to_json()),
        Format::Text => {
            let mut s = format!("H_{k}: dimension {}\n", basis.dimension());
            for (i, (y, g)) in basis.elements().iter().zip(basis.gram_diag()).enumerate() {
                s.push_str(&format!("Y_{i} = {y}    |Y_{i}|^2 = {g}\n"));
            }
            s
        }
    };
    emit(output, &text)
}

fn cmd_xi(input: &Path, method: Method, output: Option<&Path>, seed: u64, points: usize, cap: Option<usize>) -> CliResult<()> {
    let parsed = parse_input(&read_json(input)?)?;
    let result = match (method, parsed) {
        (Method::Symbolic, Input::Poly(f)) => {
            let cap = cap.map(|c| c as u32).unwrap_or(DEFAULT_DEGREE_CAP);
            serde_json::to_value(xi_symbolic_with_cap(&f, cap)?.poly()).map_err(xis3::Error::Json)?
        }
        (Method::Symbolic, Input::Spectral(_)) => {
            return Err(CliError::Usage("the symbolic method needs a polynomial input; use --method spectral".into()))
        }
        (Method::Spectral, input) => {
            let c = match input {
                Input::Spectral(c) => c,
                Input::Poly(f) => analyze(&f, f.x_degree().max(f.y_degree()) as usize)?,
            };
            let table = exact_table(c.truncation(), cap)?;
            xi_spectral_with(&c, &table)?.to_json()
        }
        (Method::Kernel, input) => {
            let f = match input {
                Input::Poly(f) => f,
                Input::Spectral(c) => synthesize(&c),
            };
            let pairs: Vec<_> = haar_sample(seed, 2 * points).chunks(2).map(|c| (c[0], c[1])).collect();
            let values = xi_zonal_kernel_general(&f, &pairs)?;
            let samples: Vec<Value> = pairs
                .iter()
                .zip(values)
                .map(|((x, y), v)| json!({ "x": x.to_array(), "y": y.to_array(), "value": v }))
                .collect();
            json!({ "method": "kernel", "seed": seed, "samples": samples })
        }
    };
    emit(output, &pretty(&result))
}

fn cmd_solve_box(input: &Path, output: Option<&Path>) -> CliResult<()> {
    let c = match parse_input(&read_json(input)?)? {
        Input::Spectral(c) => c,
        Input::Poly(_) => return Err(CliError::Usage("solve-box needs spectral JSON input".into())),
    };
    let u = solve_box(&c)?;
    if box_apply(&u) != c {
        return Err(CliError::Verification("Box(solve_box(c)) differs from c".into()));
    }
    emit(output, &pretty(&u.to_json()))
}

fn cmd_verify(opts: VerifyOptions, format: Format, output: Option<&Path>) -> CliResult<()> {
    let doc = verify(&opts)?;
    for w in &doc.warnings {
        eprintln!("warning: {w}");
    }
    let text = match format {
        Format::Json => pretty(&doc.to_json(true)),
        Format::Text => doc.to_text(),
    };
    emit(output, &text)?;
    if doc.passed {
        Ok(())
    } else {
        let names: Vec<String> = doc.failures().map(|v| format!("{} [{}]", v.name, v.mode.as_str())).collect();
        Err(CliError::Verification(names.join(", ")))
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("XI_S3_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0) {
        // a second initialization only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Basis { k, format, output, degree_cap } => cmd_basis(k, format, output.as_deref(), degree_cap),
        Command::Xi { input, method, output, seed, points, degree_cap } => {
            cmd_xi(&input, method, output.as_deref(), seed, points, degree_cap)
        }
        Command::SolveBox { input, output } => cmd_solve_box(&input, output.as_deref()),
        Command::Verify { max_degree, mode, seed, format, output, degree_cap } => {
            let mode = match mode {
                ModeArg::Exact => ModeSelection::Exact,
                ModeArg::Float => ModeSelection::Float,
                ModeArg::Both => ModeSelection::Both,
            };
            cmd_verify(VerifyOptions { max_degree, mode, seed, degree_cap }, format, output.as_deref())
        }
    }
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
