use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use infogeo_cli::commands::{self, Outcome, VerifyArgs};
use infogeo_cli::config::{parse_list, ModelKind, Overrides, RunConfig};
use infogeo_cli::CliError;

#[derive(Parser)]
#[command(name = "infogeo", version, about = "Information-geometric diagnostics of entropic dynamical models")]
struct Cli {
    /// Worker threads for parallel sections.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scalar curvature and Riemann residuals at points.
    Curvature(Common),
    /// Integrate a geodesic and compare with the closed form.
    Geodesic(Common),
    /// Propagate a Jacobi field and classify the growth of its norm.
    Jacobi(Common),
    /// Region and average volumes against their closed forms.
    Volume(Common),
    /// Monte-Carlo Fisher matrix against the analytic metric.
    McFisher(Common),
    /// Run the acceptance checks.
    Verify(VerifyCli),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_kind)]
    model: Option<ModelKind>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    /// Comma-separated coordinates; repeatable.
    #[arg(long = "point", value_parser = parse_list, allow_hyphen_values = true)]
    points: Vec<Vec<f64>>,
    #[arg(long)]
    tau_max: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Gaussian geodesic constant Cx.
    #[arg(long, allow_hyphen_values = true)]
    cx: Option<f64>,
    /// Gaussian geodesic constant Cy.
    #[arg(long, allow_hyphen_values = true)]
    cy: Option<f64>,
    /// M4 geodesic constants A1..A4, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    coef_a: Option<String>,
    /// M4 geodesic constants B1..B4, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    coef_b: Option<String>,
}

#[derive(Args)]
struct VerifyCli {
    /// Seed for the random points and parameter sets.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte-Carlo sample size.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, hide = true)]
    inject_christoffel_fault: bool,
}

fn parse_kind(s: &str) -> Result<ModelKind, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown model {s:?} (expected m4, m1, gauss or product)"))
}

impl Common {
    fn resolve(self) -> Result<RunConfig, CliError> {
        let base = self.config.as_deref().map(RunConfig::load).transpose()?;
        let list = |s: Option<String>| s.map(|s| parse_list(&s).map_err(CliError::Config)).transpose();
        Overrides {
            model: self.model,
            a: self.a,
            b: self.b,
            rho: self.rho,
            r: self.r,
            points: self.points,
            tau_max: self.tau_max,
            step: self.step,
            seed: self.seed,
            n: self.n,
            out_dir: self.out_dir,
            cx: self.cx,
            cy: self.cy,
            coef_a: list(self.coef_a)?,
            coef_b: list(self.coef_b)?,
        }
        .apply(base)
    }
}

fn print(o: &Outcome) {
    for v in &o.verdicts {
        println!("{v}");
    }
    println!("report: {}", o.report.display());
}

fn run(cli: Cli) -> Result<(), CliError> {
    let run_with = |c: Common, f: fn(&RunConfig) -> Result<Outcome, CliError>| -> Result<(), CliError> {
        let cfg = c.resolve()?;
        print(&f(&cfg)?);
        Ok(())
    };
    match cli.command {
        Command::Curvature(c) => run_with(c, commands::cmd_curvature),
        Command::Geodesic(c) => run_with(c, commands::cmd_geodesic),
        Command::Jacobi(c) => run_with(c, commands::cmd_jacobi),
        Command::Volume(c) => run_with(c, commands::cmd_volume),
        Command::McFisher(c) => run_with(c, commands::cmd_mc_fisher),
        Command::Verify(v) => {
            let (outcome, report) = commands::cmd_verify(&VerifyArgs {
                seed: v.seed,
                mc_n: v.n,
                out_dir: v.out_dir,
                inject_christoffel_fault: v.inject_christoffel_fault,
            })?;
            print(&outcome);
            let failed: Vec<u32> = report.criteria.iter().filter(|c| !c.passed).map(|c| c.id).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Verification(failed))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs == 0 {
        eprintln!("config error: --jobs must be at least 1");
        return ExitCode::from(2);
    }
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
        eprintln!("warning: {e}");
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
