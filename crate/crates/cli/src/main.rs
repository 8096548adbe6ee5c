//! `afm`: command-line front end for ARFIMA estimation, diagnostics,
//! simulation, forecasting and forecast comparison.

mod commands;
mod io;

use arfima::ArfimaError;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "afm", version, about = "ARFIMA(p,d,q) modelling toolkit")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value = "json", global = true)]
    format: io::Format,
    /// Write output to this file (atomically) instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// Series file: single-column CSV (optional header) or JSON lines.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Column to read when the file has several.
    #[arg(long)]
    pub column: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Fractional differencing exponent, in (-1, 0.5).
    #[arg(long, allow_negative_numbers = true)]
    pub d: f64,
    /// AR coefficients φ_1,...,φ_p (comma separated).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub ar: Vec<f64>,
    /// MA coefficients θ_1,...,θ_q (comma separated).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub ma: Vec<f64>,
    /// Innovation variance.
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
}

#[derive(Args, Debug, Clone)]
pub struct OrderArgs {
    /// AR order.
    #[arg(long, default_value_t = 0)]
    pub p: usize,
    /// MA order.
    #[arg(long, default_value_t = 0)]
    pub q: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Whittle fit with Hessian and exact standard errors.
    Fit {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        order: OrderArgs,
        /// Hold a parameter fixed, as INDEX=VALUE in the order (d, φ, θ); repeatable.
        #[arg(long = "fix", value_parser = commands::parse_fix)]
        fix: Vec<(usize, f64)>,
    },
    /// Fit every (p, q) up to the given orders and rank by AIC.
    Select {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 2)]
        p_max: usize,
        #[arg(long, default_value_t = 2)]
        q_max: usize,
    },
    /// Autocovariances, exact or with the power-law tail beyond a switch lag.
    Acvf {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 50)]
        h_max: usize,
        /// Use the power-law tail beyond --switch-lag.
        #[arg(long)]
        hybrid: bool,
        #[arg(long, default_value_t = arfima::acvf::DEFAULT_SWITCH_LAG)]
        switch_lag: usize,
    },
    /// Model spectral density on a grid, or against the periodogram of --input.
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        /// Series whose periodogram is listed alongside the density.
        #[arg(long, short)]
        input: Option<PathBuf>,
        #[arg(long)]
        column: Option<String>,
        /// Grid size on (0, π] when no input is given.
        #[arg(long, default_value_t = 512)]
        points: usize,
    },
    /// Exact and power-law impulse responses.
    Irf {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 150)]
        h_max: usize,
    },
    /// Exact Gaussian sample path.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, env = "AFM_SEED", default_value_t = 1)]
        seed: u64,
    },
    /// Fit and forecast ahead, or run the rolling out-of-sample exercise.
    Forecast {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        order: OrderArgs,
        /// Steps ahead (ignored with --t0).
        #[arg(long, default_value_t = 1)]
        ahead: usize,
        /// Rolling mode: predict observations t0+1..t0+count.
        #[arg(long)]
        t0: Option<usize>,
        #[arg(long, default_value_t = 1)]
        tau: usize,
        #[arg(long, default_value_t = 0)]
        count: usize,
        /// Fit once on the first window instead of refitting every window.
        #[arg(long)]
        fit_once: bool,
    },
    /// Giacomini-White test of equal absolute-error predictive ability.
    Gwtest {
        /// Predictions of the first model (or a table with --table).
        #[arg(long, required_unless_present = "table")]
        x: Option<PathBuf>,
        /// Predictions of the second model.
        #[arg(long, required_unless_present = "table")]
        z: Option<PathBuf>,
        /// Realised values.
        #[arg(long, required_unless_present = "table")]
        y: Option<PathBuf>,
        /// Rolling-forecast table holding prediction, benchmark and target columns.
        #[arg(long, conflicts_with_all = ["x", "z", "y"])]
        table: Option<PathBuf>,
        #[arg(long, default_value = "prediction")]
        x_col: String,
        #[arg(long, default_value = "benchmark")]
        z_col: String,
        #[arg(long, default_value = "target")]
        y_col: String,
        #[arg(long, default_value_t = 1)]
        tau: usize,
        /// simple_regression, hac, newey_west, andrews_kernel or lumley_heagerty.
        #[arg(long, default_value = "newey_west")]
        method: String,
        /// two_sided, greater or less.
        #[arg(long, default_value = "two_sided")]
        alternative: String,
        #[arg(long)]
        bandwidth: Option<usize>,
    },
    /// Residual diagnostics of a fit: standardized residuals, ACF, Ljung-Box, root check.
    Diag {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        order: OrderArgs,
        #[arg(long, default_value_t = 10)]
        max_lag: usize,
        /// Significance level for the Ljung-Box flags and ACF bands.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Exact and asymptotic variance of the sample mean.
    Smv {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        n: usize,
    },
}

pub enum Failure {
    Usage(String),
    Numerical(String, &'static str),
}

impl From<io::InputError> for Failure {
    fn from(e: io::InputError) -> Self {
        Failure::Usage(e.0)
    }
}

impl From<ArfimaError> for Failure {
    fn from(e: ArfimaError) -> Self {
        use ArfimaError::*;
        let kind = match &e {
            NotPositiveDefinite(_) => "not_positive_definite",
            SeriesDiverged(_) => "series_diverged",
            Numerical(_) => "numerical",
            _ => return Failure::Usage(e.to_string()),
        };
        Failure::Numerical(e.to_string(), kind)
    }
}

fn error_record(kind: &str, message: &str, code: u8) -> String {
    serde_json::json!({ "error": kind, "message": message, "exit_code": code }).to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = commands::run(cli.command);
    let (blocks, failure) = match outcome {
        Ok(r) => (r.blocks, r.warning),
        Err(f) => (Vec::new(), Some(f)),
    };
    if !blocks.is_empty() {
        if let Err(e) = io::write_output(cli.output.as_deref(), &io::render(&blocks, cli.format)) {
            eprintln!("{}", error_record("io", &e.to_string(), 1));
            return ExitCode::from(1);
        }
    }
    match failure {
        None => ExitCode::SUCCESS,
        Some(Failure::Usage(m)) => {
            eprintln!("{}", error_record("usage", &m, 1));
            ExitCode::from(1)
        }
        Some(Failure::Numerical(m, kind)) => {
            eprintln!("{}", error_record(kind, &m, 2));
            ExitCode::from(2)
        }
    }
}
