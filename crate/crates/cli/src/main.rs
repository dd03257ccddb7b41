mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "planlift", version, about = "Floor-plan images to XML models and 3D meshes")]
struct Cli {
    #[command(flatten)]
    opts: Tunables,
    #[command(subcommand)]
    cmd: Cmd,
}

/// Overrides applied on top of the config file.
#[derive(Args, Clone, Debug, Default)]
pub struct Tunables {
    /// Flat key=value config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Binarization threshold: 0-255 or "otsu".
    #[arg(long, global = true)]
    pub threshold: Option<String>,
    #[arg(long, global = true)]
    pub cluster_margin: Option<u32>,
    #[arg(long, global = true)]
    pub hough_min_len: Option<u32>,
    #[arg(long, global = true)]
    pub hough_max_gap: Option<u32>,
    #[arg(long, global = true)]
    pub wall_height: Option<f64>,
    /// Directory of sample door images (.pgm/.png). Falls back to PLANLIFT_ASSETS.
    #[arg(long, global = true)]
    pub door_assets: Option<PathBuf>,
    /// Images processed concurrently by `pipeline`.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Detect walls, windows and doors; write the model XML.
    Recognize {
        image: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Extrude a model XML into an OBJ mesh.
    Extrude {
        xml: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Recognize and extrude each image, with a report per image.
    Pipeline {
        #[arg(required = true)]
        images: Vec<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
        /// Ground truth for a single input image. Without it, a sidecar
        /// `<stem>.truth.xml` next to each image is used when present.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Write seeded synthetic plans with ground truth.
    Synth {
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long, default_value_t = 2)]
        rows: u32,
        #[arg(long, default_value_t = 2)]
        cols: u32,
        #[arg(long, default_value_t = 1024)]
        width: u32,
        #[arg(long, default_value_t = 768)]
        height: u32,
        /// Exact door count per plan (default: 1-3).
        #[arg(long)]
        doors: Option<u32>,
        /// Exact window count per plan (default: 2-4).
        #[arg(long)]
        windows: Option<u32>,
    },
    /// Score a predicted model against ground truth.
    Eval {
        predicted: PathBuf,
        truth: PathBuf,
        /// Also write the report as key=value lines.
        #[arg(long)]
        kv: Option<PathBuf>,
    },
    /// Write the built-in door sample images.
    Assets {
        #[arg(short, long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = commands::resolve_config(&cli.opts).and_then(|cfg| match cli.cmd {
        Cmd::Recognize { image, out } => commands::recognize(&image, &out, cfg),
        Cmd::Extrude { xml, out } => commands::extrude(&xml, &out, cfg),
        Cmd::Pipeline { images, out, truth } => {
            commands::pipeline(&images, &out, truth.as_deref(), cfg, cli.opts.jobs)
        }
        Cmd::Synth {
            out,
            count,
            rows,
            cols,
            width,
            height,
            doors,
            windows,
        } => {
            let layout = commands::Layout {
                rows,
                cols,
                width,
                height,
                doors,
                windows,
            };
            commands::synth(&out, count, layout, cfg)
        }
        Cmd::Eval { predicted, truth, kv } => commands::eval(&predicted, &truth, kv.as_deref(), cfg),
        Cmd::Assets { out } => commands::assets(&out),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
