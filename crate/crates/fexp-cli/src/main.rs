//! `fexp`: simulate one-bit transmission over a Gaussian channel with an
//! active noisy Gaussian feedback link, evaluate the error-exponent bounds of
//! that setting, and verify the inequality machinery behind them.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage or configuration error,
//! 3 numerical failure, 4 verification checks failed.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{parse_tilt, FileConfig, OutputFormat, Resolved};
use fexp_core::exponents::FbBudgetConvention;
use fexp_core::schemes::SchemeKind;
use fexp_core::ChannelParams;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Numerical(String),
    ChecksFailed(String),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::ChecksFailed(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m)
            | CliError::Io(m)
            | CliError::Numerical(m)
            | CliError::ChecksFailed(m) => m,
        }
    }
}

impl From<fexp_core::Error> for CliError {
    fn from(e: fexp_core::Error) -> Self {
        match e {
            fexp_core::Error::Numerical(m) => CliError::Numerical(m),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "fexp",
    version,
    about = "Error-exponent laboratory for the Gaussian channel with active noisy feedback"
)]
struct Cli {
    /// JSON configuration file; explicit flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Evaluate every analytic exponent bound for the given channel.
    Exponents(ExponentsArgs),
    /// Estimate one scheme's error probability and audit its power use.
    Simulate(SimulateArgs),
    /// Sweep blocklengths and fit the empirical exponent slope.
    Sweep(SweepArgs),
    /// Run the inequality verification suite and oracle-vs-MC checks.
    Verify(VerifyArgs),
    /// Evaluate the binary-symmetric-channel comparison bounds.
    Bsc(BscArgs),
}

#[derive(Args, Debug, Clone, Default)]
struct ChannelArgs {
    /// Forward-link power P.
    #[arg(long)]
    p: Option<f64>,
    /// Forward-link noise variance.
    #[arg(long)]
    sigma2: Option<f64>,
    /// Feedback-link power.
    #[arg(long)]
    p_fb: Option<f64>,
    /// Feedback-link noise variance.
    #[arg(long)]
    sigma2_fb: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
struct SchemeArgs {
    /// Transmission scheme.
    #[arg(long, value_enum)]
    scheme: Option<SchemeKindArg>,
    /// Blocklength.
    #[arg(long)]
    n: Option<usize>,
    /// Decision margin in (0,1).
    #[arg(long)]
    delta: Option<f64>,
    /// Feedback power sliver for the ACK/NACK symbol.
    #[arg(long)]
    delta_fb_power: Option<f64>,
    /// Decision threshold coefficient (threshold = coeff * n).
    #[arg(long)]
    threshold_coeff: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
struct OutArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<String>,
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum SchemeKindArg {
    NoFeedback,
    AsScheme,
    BuildingBlock,
    ThreePhase,
}

impl From<SchemeKindArg> for SchemeKind {
    fn from(a: SchemeKindArg) -> SchemeKind {
        match a {
            SchemeKindArg::NoFeedback => SchemeKind::NoFeedback,
            SchemeKindArg::AsScheme => SchemeKind::AsScheme,
            SchemeKindArg::BuildingBlock => SchemeKind::BuildingBlock,
            SchemeKindArg::ThreePhase => SchemeKind::ThreePhase,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum FbBudgetArg {
    Pooled,
    Mirrored,
}

impl From<FbBudgetArg> for FbBudgetConvention {
    fn from(a: FbBudgetArg) -> FbBudgetConvention {
        match a {
            FbBudgetArg::Pooled => FbBudgetConvention::Pooled,
            FbBudgetArg::Mirrored => FbBudgetConvention::Mirrored,
        }
    }
}

#[derive(Args, Debug, Clone, Default)]
struct ExponentsArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// Margin for the finite-margin achievable bound.
    #[arg(long)]
    delta: Option<f64>,
    /// Power sliver for the finite-sliver achievable bound.
    #[arg(long)]
    delta_fb_power: Option<f64>,
    /// No-feedback reliability at the rate of interest (enables the
    /// rate converse).
    #[arg(long)]
    e_nofb: Option<f64>,
    /// Feedback-budget convention of the optimized converse.
    #[arg(long, value_enum)]
    fb_budget: Option<FbBudgetArg>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug, Clone, Default)]
struct SimulateArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Monte Carlo trials.
    #[arg(long)]
    trials: Option<u64>,
    /// Base seed; trial i uses stream (seed, i).
    #[arg(long)]
    seed: Option<u64>,
    /// Forward-noise mean shifts, e.g. "0:-2.5,3:0.4".
    #[arg(long)]
    tilt: Option<String>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug, Clone, Default)]
struct SweepArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Comma-separated strictly increasing blocklengths.
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    /// Trials per blocklength; 0 evaluates the closed-form oracle instead.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug, Clone, Default)]
struct VerifyArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Run the reduced smoke-size suite.
    #[arg(long)]
    quick: bool,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug, Clone, Default)]
struct BscArgs {
    /// Forward crossover probability in (0, 1/2].
    #[arg(long)]
    eps: Option<f64>,
    /// Feedback crossover probability in (0, 1/2].
    #[arg(long)]
    eps_fb: Option<f64>,
    /// No-feedback reliability of the forward BSC at the rate of interest.
    #[arg(long)]
    e_nofb: Option<f64>,
    #[command(flatten)]
    out: OutArgs,
}

fn init_threads() {
    if let Ok(threads) = std::env::var("FEXP_THREADS") {
        if let Ok(k) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build_global();
        } else {
            eprintln!("warning: ignoring unparseable FEXP_THREADS={threads}");
        }
    }
}

fn resolve(file: &FileConfig, cli_command: Option<&Command>) -> Result<Resolved, CliError> {
    // Field-by-field merge: explicit flags beat the config file, which
    // beats the defaults.
    let mut channel = ChannelArgs::default();
    let mut scheme = SchemeArgs::default();
    let mut out = OutArgs::default();
    let mut trials = None;
    let mut seed = None;
    let mut tilt_text = None;
    let mut n_list = None;
    let mut delta = None;
    let mut delta_fb_power = None;
    let mut e_nofb = None;
    let mut eps = None;
    let mut eps_fb = None;
    let mut fb_budget = None;
    let mut quick = false;

    match cli_command {
        Some(Command::Exponents(a)) => {
            channel = a.channel.clone();
            delta = a.delta;
            delta_fb_power = a.delta_fb_power;
            e_nofb = a.e_nofb;
            fb_budget = a.fb_budget.map(FbBudgetConvention::from);
            out = a.out.clone();
        }
        Some(Command::Simulate(a)) => {
            channel = a.channel.clone();
            scheme = a.scheme.clone();
            trials = a.trials;
            seed = a.seed;
            tilt_text = a.tilt.clone();
            out = a.out.clone();
        }
        Some(Command::Sweep(a)) => {
            channel = a.channel.clone();
            scheme = a.scheme.clone();
            n_list = a.n_list.clone();
            trials = a.trials;
            seed = a.seed;
            out = a.out.clone();
        }
        Some(Command::Verify(a)) => {
            seed = a.seed;
            quick = a.quick;
            out = a.out.clone();
        }
        Some(Command::Bsc(a)) => {
            eps = a.eps;
            eps_fb = a.eps_fb;
            e_nofb = a.e_nofb;
            out = a.out.clone();
        }
        None => {}
    }

    let params = ChannelParams::new(
        channel.p.or(file.p).unwrap_or(1.0),
        channel.sigma2.or(file.sigma2).unwrap_or(1.0),
        channel.p_fb.or(file.p_fb).unwrap_or(1.0),
        channel.sigma2_fb.or(file.sigma2_fb).unwrap_or(1.0),
    )?;
    let tilt = match tilt_text.or_else(|| file.tilt.clone()) {
        Some(text) => Some(parse_tilt(&text)?),
        None => None,
    };
    Ok(Resolved {
        params,
        scheme_kind: scheme.scheme.map(SchemeKind::from).or(file.scheme),
        n: scheme.n.or(file.n),
        delta: scheme.delta.or(delta).or(file.delta),
        delta_fb_power: scheme
            .delta_fb_power
            .or(delta_fb_power)
            .or(file.delta_fb_power),
        threshold_coeff: scheme
            .threshold_coeff
            .or(file.threshold_coeff)
            .unwrap_or(1.0),
        n_list: n_list.or_else(|| file.n_list.clone()).unwrap_or_default(),
        trials: trials.or(file.trials),
        seed: seed.or(file.seed).unwrap_or(1),
        tilt,
        e_nofb: e_nofb.or(file.e_nofb),
        eps: eps.or(file.eps),
        eps_fb: eps_fb.or(file.eps_fb),
        fb_budget: fb_budget.or(file.fb_budget).unwrap_or_default(),
        out: out.out.or_else(|| file.out.clone()),
        format: out.format.or(file.format).unwrap_or(OutputFormat::Csv),
        quick: quick || file.quick.unwrap_or(false),
    })
}

fn run() -> Result<(), CliError> {
    init_threads();
    let cli = Cli::parse();
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let command_name = match (&cli.command, &file.command) {
        (Some(c), _) => match c {
            Command::Exponents(_) => "exponents",
            Command::Simulate(_) => "simulate",
            Command::Sweep(_) => "sweep",
            Command::Verify(_) => "verify",
            Command::Bsc(_) => "bsc",
        }
        .to_string(),
        (None, Some(name)) => name.clone(),
        (None, None) => {
            return Err(CliError::usage(
                "no command given on the command line or in the config file",
            ))
        }
    };
    let resolved = resolve(&file, cli.command.as_ref())?;
    match command_name.as_str() {
        "exponents" => commands::exponents(&resolved),
        "simulate" => commands::simulate(&resolved),
        "sweep" => commands::sweep(&resolved),
        "verify" => commands::verify(&resolved),
        "bsc" => commands::bsc(&resolved),
        other => Err(CliError::usage(format!("unknown command '{other}'"))),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fexp: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
