use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use polarvos::labels::write_file;
use polarvos::{
    evaluate, generate_labels, ingest, sweep, CliError, EvalOptions, Layout, SweepParam, SweepSpec,
};
use polarvos_core::metrics::ApeMode;

#[derive(Parser)]
#[command(
    name = "polarvos",
    version,
    about = "Polar mask labels, upper-bound sweeps and VOS metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Dataset layout: davis or flat.
    #[arg(long, default_value_t = Layout::Davis)]
    layout: Layout,
}

#[derive(Subcommand)]
enum Command {
    /// Index a dataset and write index.json.
    Ingest {
        /// Dataset root.
        root: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Write polar labels (JSON lines per instance) and summary.json.
    Labels {
        /// Dataset root.
        root: PathBuf,
        #[arg(long, default_value_t = 36)]
        rays: usize,
        #[arg(long, default_value_t = 0.5)]
        mu: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Encode-decode IoU per video across merge ratios or ray counts; writes sweep.csv.
    Sweep {
        /// Dataset root.
        root: PathBuf,
        /// Swept parameter: mu or rays.
        #[arg(long)]
        param: SweepParam,
        #[arg(long, num_args = 1.., required = true)]
        values: Vec<f64>,
        /// Ray count while sweeping mu.
        #[arg(long, default_value_t = 36)]
        rays: usize,
        /// Merge ratio while sweeping rays.
        #[arg(long, default_value_t = 0.5)]
        mu: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Score predicted masks against ground truth; writes eval.json and eval.csv.
    Eval {
        /// Predictions as <seq>/<frame>.png.
        #[arg(long)]
        pred: PathBuf,
        /// Ground-truth dataset root.
        #[arg(long)]
        gt: PathBuf,
        /// Contour matching tolerance in pixels.
        #[arg(long, default_value_t = polarvos_core::metrics::DEFAULT_CONTOUR_TOL)]
        tol: f64,
        /// Count pixels in either mask but not both, instead of predicted-only.
        #[arg(long)]
        symmetric_ape: bool,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Ingest { common, .. }
            | Command::Labels { common, .. }
            | Command::Sweep { common, .. }
            | Command::Eval { common, .. } => common,
        }
    }
}

fn run(cmd: &Command) -> polarvos::Result<()> {
    let common = cmd.common();
    match cmd {
        Command::Ingest { root, .. } => {
            let index = ingest(root, common.layout)?;
            write_file(&common.out.join("index.json"), index.to_json().as_bytes())?;
            println!("{} sequences", index.sequences.len());
        }
        Command::Labels { root, rays, mu, .. } => {
            let index = ingest(root, common.layout)?;
            let s = generate_labels(&index, *rays, *mu, &common.out)?;
            println!("{} frames encoded, {} skipped", s.encoded, s.skipped);
        }
        Command::Sweep {
            root,
            param,
            values,
            rays,
            mu,
            ..
        } => {
            let spec = SweepSpec::new(*param, values.clone(), *rays, *mu)?;
            let index = ingest(root, common.layout)?;
            let report = sweep(&index, &spec, &common.out)?;
            print!("{}", report.to_csv());
        }
        Command::Eval {
            pred,
            gt,
            tol,
            symmetric_ape,
            ..
        } => {
            if !(*tol >= 0.0 && tol.is_finite()) {
                return Err(CliError::Validation(format!(
                    "tolerance must be non-negative, got {tol}"
                )));
            }
            let opts = EvalOptions {
                contour_tol: *tol,
                ape_mode: if *symmetric_ape {
                    ApeMode::Symmetric
                } else {
                    ApeMode::OneSided
                },
            };
            let index = ingest(gt, common.layout)?;
            let r = evaluate(pred, &index, &common.out, &opts)?;
            println!(
                "J mean {:.6} recall {:.6} decay {:.6}",
                r.j.mean, r.j.recall, r.j.decay
            );
            println!(
                "F mean {:.6} recall {:.6} decay {:.6}",
                r.f.mean, r.f.recall, r.f.decay
            );
            println!("APE {:.6}", r.ape);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // Usage errors are validation errors (exit 1), not clap's default 2.
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.command.common().jobs)
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match pool.install(|| run(&cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
