mod config;
mod failure;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{FieldmapSection, Order, RouteChoice, RunConfig};
use failure::Failure;
use run::Context;

#[derive(Parser)]
#[command(name = "cylgrating", version, about = "Scattering by an infinite grating of dielectric cylinders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum)]
    route: Option<RouteChoice>,
    /// Truncation order, or `auto`.
    #[arg(long = "N")]
    n: Option<Order>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the scattering coefficients.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Also write the assembled system matrix.
        #[arg(long)]
        dump_matrix: bool,
    },
    /// Solve for a list of truncation orders and tabulate differences.
    Converge {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
    },
    /// Tabulate lattice sums.
    Schlomilch {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Evaluate Ez and Hz on a rectangular grid.
    Fieldmap {
        #[command(flatten)]
        common: Common,
        /// `x0,x1,y0,y1`
        #[arg(long, allow_hyphen_values = true, value_parser = run::parse_region)]
        region: Option<[f64; 4]>,
        /// `n` or `nx,ny`
        #[arg(long, value_parser = run::parse_resolution)]
        resolution: Option<(usize, usize)>,
    },
    /// Compare a solve with lattice sums forced to zero against the single-cylinder solution.
    IsolatedCheck {
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common) -> Result<RunConfig, Failure> {
    let mut config = RunConfig::load(&common.config)?;
    if let Some(r) = common.route {
        config.output.route = r;
    }
    if let Some(n) = common.n {
        config.truncation.n = n;
    }
    Ok(run::with_out(config, common.out.clone()))
}

fn init_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("GRATING_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Config(format!("GRATING_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(format!("thread pool: {e}")))
}

fn execute(cli: Cli) -> Result<String, Failure> {
    init_threads()?;
    match cli.command {
        Command::Solve { common, dump_matrix } => {
            let mut config = load(&common)?;
            config.output.dump_matrix |= dump_matrix;
            run::solve_cmd(&Context::new(config)?)
        }
        Command::Converge { common, n_list } => run::converge_cmd(&Context::new(load(&common)?)?, n_list),
        Command::Schlomilch { common, n_max } => run::schlomilch_cmd(&Context::new(load(&common)?)?, n_max),
        Command::Fieldmap {
            common,
            region,
            resolution,
        } => {
            let mut config = load(&common)?;
            let mut section = config.fieldmap.clone();
            if let Some([x0, x1, y0, y1]) = region {
                let s = section.get_or_insert(FieldmapSection {
                    x0,
                    x1,
                    y0,
                    y1,
                    z: 0.0,
                    nx: 21,
                    ny: 21,
                });
                (s.x0, s.x1, s.y0, s.y1) = (x0, x1, y0, y1);
            }
            if let (Some((nx, ny)), Some(s)) = (resolution, section.as_mut()) {
                (s.nx, s.ny) = (nx, ny);
            }
            let section =
                section.ok_or_else(|| Failure::Config("no field region: pass --region or add a [fieldmap] section".into()))?;
            let grid = section.grid();
            config.fieldmap = Some(section);
            run::fieldmap_cmd(&Context::new(config)?, grid)
        }
        Command::IsolatedCheck { common } => run::isolated_check_cmd(&Context::new(load(&common)?)?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
