use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pairplan::commands::{self, emit, to_json};
use pairplan::config::{RunConfig, Strategy};
use pairplan::images::list_views;
use pairplan::{CliError, Result};
use pairplan_core::view_graph::DirectionMode;

#[derive(Parser)]
#[command(version, about = "Pair planning, fixture rendering and wavelet loss reports")]
struct Args {
    /// JSON run configuration; missing keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Both,
    Forward,
}

impl From<Mode> for DirectionMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Both => DirectionMode::Both,
            Mode::Forward => DirectionMode::Forward,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PlanFormat {
    Json,
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Select image pairs for a sequence of views.
    Plan {
        #[arg(long, value_enum)]
        strategy: Option<Strategy>,
        /// Number of views; ignored when --views-dir is given.
        #[arg(long)]
        n: Option<usize>,
        /// Directory of images, taken in file-name order.
        #[arg(long)]
        views_dir: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long, value_enum, default_value = "json")]
        format: PlanFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate pair counts and estimated cost per strategy and view count.
    Compare {
        /// Strategies to include (comma separated); all image-free ones by default.
        #[arg(long, value_enum, value_delimiter = ',')]
        strategy: Vec<Strategy>,
        /// View counts (comma separated).
        #[arg(long, value_delimiter = ',', default_value = "3,6,9,12")]
        n: Vec<usize>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long, value_enum, default_value = "csv")]
        format: TableFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a synthetic fixture scene to PNG and depth dumps.
    Render {
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Photometric and wavelet loss between two images.
    Loss {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        rendered: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump the wavelet pyramid of an image.
    Dwt {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the effective configuration.
    Config {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(args: Args) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    match args.command {
        Command::Plan {
            strategy,
            n,
            views_dir,
            mode,
            format,
            out,
        } => {
            config.strategy = strategy.unwrap_or(config.strategy);
            config.mode = mode.map_or(config.mode, Into::into);
            let views_dir = views_dir.or(config.views_dir.clone());
            let out = out.or(config.out.clone());
            let views = views_dir.as_deref().map(list_views).transpose()?;
            let n = match (&views, n) {
                (Some(v), _) => v.len(),
                (None, Some(n)) => n,
                (None, None) => return Err(CliError::Invalid("pass --n or --views-dir".into())),
            };
            let report = commands::plan(&config, n, views.as_deref())?;
            let text = match format {
                PlanFormat::Json => to_json(&report),
                PlanFormat::Dot => commands::plan_dot(&report),
            };
            emit(out.as_deref(), &text)
        }
        Command::Compare {
            strategy,
            n,
            mode,
            format,
            out,
        } => {
            config.mode = mode.map_or(config.mode, Into::into);
            let strategies = if strategy.is_empty() {
                vec![Strategy::Gaps, Strategy::Complete, Strategy::Oneref, Strategy::Window]
            } else {
                strategy
            };
            let rows = commands::compare(&config, &strategies, &n)?;
            let text = match format {
                TableFormat::Csv => commands::compare_csv(&rows),
                TableFormat::Json => to_json(&rows),
            };
            emit(out.or(config.out).as_deref(), &text)
        }
        Command::Render { preset, seed, out } => {
            let preset = preset.unwrap_or(config.render.preset);
            let seed = seed.unwrap_or(config.render.seed);
            let Some(out) = out.or(config.out) else {
                return Err(CliError::Invalid("render needs an output directory; pass --out".into()));
            };
            commands::render(&preset, seed, &out)?;
            Ok(())
        }
        Command::Loss { gt, rendered, out } => {
            let report = commands::loss(&config, &gt, &rendered)?;
            emit(out.or(config.out).as_deref(), &to_json(&report))
        }
        Command::Dwt { input, out } => commands::dwt(&config, &input, &out),
        Command::Config { out } => emit(out.as_deref(), &to_json(&config)),
    }
}

fn init_logging() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PAIRPLAN_LOG", "warn")).init();
}

fn main() -> ExitCode {
    init_logging();
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
