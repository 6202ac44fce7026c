use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spectral_coeffs_cli::config::{Case, SchemeKind, SweepParam};
use spectral_coeffs_cli::{run_eigs, run_oracle, run_single, run_sweep, CliError, RunConfig};

/// Drift and diffusion coefficients of kinetic Fokker-Planck equations.
///
/// Exit codes: 0 ok, 2 bad parameter, 3 tunnelling collapse, 4 no convergence,
/// 5 I/O failure.
#[derive(Parser)]
#[command(name = "spectral-coeffs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline on one parameter point.
    Single(Overrides),
    /// Full pipeline over a list of values of one parameter.
    Sweep(Overrides),
    /// Drift coefficient from the one-dimensional formula.
    Oracle(Overrides),
    /// Eigenpairs and diagnostics only.
    Eigs {
        #[command(flatten)]
        overrides: Overrides,
        /// Also write A and B as sparse triplets to operator.txt.
        #[arg(long)]
        dump_matrices: bool,
    },
}

/// Flags mirror the config keys and take precedence over `--config`.
#[derive(Args)]
struct Overrides {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse::<Case>)]
    case: Option<Case>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    sigma: Option<u8>,
    #[arg(long)]
    vartheta: Option<f64>,
    #[arg(long, value_parser = parse::<SweepParam>)]
    sweep_param: Option<SweepParam>,
    /// Comma-separated.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    sweep_values: Option<Vec<f64>>,
    #[arg(long = "R", alias = "r")]
    r: Option<f64>,
    #[arg(long)]
    n_elements: Option<usize>,
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long)]
    quad_degree: Option<usize>,
    #[arg(long)]
    quad_points: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    rule: Option<String>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Comma-separated subset of csv, svg.
    #[arg(long, value_delimiter = ',')]
    formats: Option<Vec<String>>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    tol_zero: Option<f64>,
    #[arg(long)]
    s_tol: Option<f64>,
    #[arg(long)]
    oracle_tol: Option<f64>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long, value_parser = parse_scheme)]
    scheme: Option<SchemeKind>,
    #[arg(long)]
    fd_points: Option<usize>,
}

fn parse<T: std::str::FromStr<Err = CliError>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: CliError| e.to_string())
}

fn parse_scheme(s: &str) -> Result<SchemeKind, String> {
    match s {
        "fem" => Ok(SchemeKind::Fem),
        "fd" => Ok(SchemeKind::Fd),
        _ => Err(format!("unknown scheme {s:?}")),
    }
}

macro_rules! apply {
    ($cfg:ident, $o:ident; $($field:ident),*) => {
        $(if let Some(v) = $o.$field.clone() { $cfg.$field = v; })*
    };
}

impl Overrides {
    fn config(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let o = self;
        apply!(c, o; case, gamma, theta, vartheta, r, n_elements, degree, quad_degree,
               quad_points, n_max, rel_tol, rule, output_dir, formats, tol, tol_zero,
               s_tol, oracle_tol, method, scheme, fd_points);
        if o.delta.is_some() {
            c.delta = o.delta;
        }
        if o.sigma.is_some() {
            c.sigma = o.sigma;
        }
        if o.sweep_param.is_some() {
            c.sweep_param = o.sweep_param;
        }
        if o.sweep_values.is_some() {
            c.sweep_values = o.sweep_values.clone();
        }
        Ok(c)
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Single(o) => {
            let r = run_single(&o.config()?)?;
            let c = &r.coefficients;
            println!("D={:.16e}", c.d);
            println!("K={:.16e}", c.k);
            println!("K_star={:.16e}", c.oracle.k_star);
            println!("rel_err={:.3e}", c.rel_err);
            println!("n_auto={}", c.n_auto);
            println!("flags={}", r.flags.join(";"));
            for f in &r.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Sweep(o) => {
            let r = run_sweep(&o.config()?)?;
            for row in &r.rows {
                println!("{}={} status={}", r.param.name(), row.value, row.status);
                if let Some(m) = &row.message {
                    eprintln!("  {m}");
                }
            }
            for f in &r.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Oracle(o) => {
            let r = run_oracle(&o.config()?)?;
            println!("K_star,error_estimate,K_rectangle,V");
            println!(
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                r.k_star, r.quad_error_estimate, r.k_rectangle, r.mean_velocity
            );
        }
        Command::Eigs {
            overrides,
            dump_matrices,
        } => {
            let r = run_eigs(&overrides.config()?, dump_matrices)?;
            for (i, l) in r.decomposition.eigenvalues.iter().enumerate().take(6) {
                println!("lambda_{i}={l:.16e}");
            }
            match &r.zero {
                Ok(z) => println!("zero_mode={} gap={:.16e}", z.index, z.gap),
                Err(m) => println!("zero_mode=none ({m})"),
            }
            for (i, s) in r.symmetry.iter().enumerate() {
                println!("symmetry_score_{i}={:.3e} broken={}", s.score, s.broken);
            }
            for f in &r.files {
                println!("wrote {}", f.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
