use std::process::ExitCode;

use bv1d_cli::config::RunConfig;
use bv1d_cli::pipeline::{self, PipelineError};

const USAGE: &str = "\
bv1d <command> [flags]

commands:
  solve     run the vanishing-viscosity sequence, dump per-k CSV/JSON
  oracle    closed-form minimizer: M0, branch, energy, minimizer CSV
  verify    check the growth/ellipticity/Hoelder hypotheses
  probe     sequence + regularity diagnostics (L^p sweep, Nikolskii, jump)
  figure1   full pinned pipeline: mu=1.4 alpha=0.25 M=20, grid 2^14, k<=512
  sweep     oracle over a (mu, alpha, M) grid, concurrent

flags:
  --mu X --alpha X --M X --grid-exp N --k-max N --out DIR --seed N
  --jobs N --config FILE   (file holds key=value lines; flags override)
";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() || args[0] == "--help" || args[0] == "-h" {
        eprint!("{USAGE}");
        return ExitCode::from(2);
    }
    let cfg = match RunConfig::from_args(&args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    match pipeline::run(&cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ PipelineError::Domain(_)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}
