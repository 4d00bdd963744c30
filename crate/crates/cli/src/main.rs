use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ringlab::config::{parse_config_for, ModelTag};
use ringlab::diagnostics::EigenConstants;
use ringlab::export::{run_and_export, RunStatus};

/// Spectral lab for scalar reductions of Navier-Stokes.
#[derive(Parser)]
#[command(name = "ringlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// 1D model problem, explicit Euler in time.
    Toy1d(RunArgs),
    /// Stationary 1D problem: pseudo-transient march and Newton.
    Stationary1d(RunArgs),
    /// Full 3D reduction on the pyramid.
    Full3d(RunArgs),
    /// 2D polar comparison model.
    Polar2d(RunArgs),
    /// Simplified cone model.
    Cone(RunArgs),
    /// Print sigma, z, gamma, lambda(alpha) and r_hat.
    Constants(ConstArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (0 = all cores).
    #[arg(long, env = "RINGLAB_THREADS")]
    threads: Option<usize>,
}

#[derive(Args)]
struct ConstArgs {
    #[arg(long, default_value_t = 4.0)]
    omega: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long = "r-max", default_value_t = 1.0)]
    r_max: f64,
    /// Also write constants.json here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(model: ModelTag, args: RunArgs) -> Result<RunStatus, String> {
    let text =
        std::fs::read_to_string(&args.config).map_err(|e| format!("cannot read {}: {e}", args.config.display()))?;
    let cfg = parse_config_for(&text, Some(model)).map_err(|e| e.to_string())?;
    let meta = run_and_export(&cfg, &args.out, args.threads).map_err(|e| e.to_string())?;
    match (&meta.error, meta.onset.t_onset) {
        (Some(e), _) => eprintln!("error: {e}"),
        (None, Some(t)) => eprintln!("onset ({:?}) at t = {t}", meta.onset.kind),
        (None, None) => eprintln!("completed {} steps, t = {}", meta.steps, meta.t_end),
    }
    Ok(meta.status)
}

fn constants(args: ConstArgs) -> Result<RunStatus, String> {
    let c = EigenConstants::new(args.omega, args.alpha, args.r_max).map_err(|e| e.to_string())?;
    println!("omega        {}", c.omega);
    println!("alpha        {}", c.alpha);
    println!("r_max        {}", c.r_max);
    println!("sigma        {}", c.sigma);
    println!("z            {}", c.z);
    println!("gamma        {}", c.gamma);
    println!("r_hat/r_max  {}", c.ratio);
    println!("r_hat        {}", c.r_hat);
    println!("lambda       {}", c.lambda_alpha);
    if let Some(dir) = args.out {
        std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
        let json = serde_json::to_string_pretty(&c).map_err(|e| e.to_string())?;
        std::fs::write(dir.join("constants.json"), json + "\n").map_err(|e| e.to_string())?;
    }
    Ok(RunStatus::Completed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Toy1d(a) => run(ModelTag::Toy1d, a),
        Command::Stationary1d(a) => run(ModelTag::Stationary1d, a),
        Command::Full3d(a) => run(ModelTag::Full3d, a),
        Command::Polar2d(a) => run(ModelTag::Polar2d, a),
        Command::Cone(a) => run(ModelTag::Cone, a),
        Command::Constants(a) => constants(a),
    };
    match result {
        Ok(status) => ExitCode::from(status.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(RunStatus::Error.exit_code() as u8)
        }
    }
}
