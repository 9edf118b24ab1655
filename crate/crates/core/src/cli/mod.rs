//! Command-line harness. `run` parses arguments, merges an optional
//! `key=value` config file (command-line flags win), dispatches the
//! subcommand and maps errors to exit codes: 0 success, 2 usage or
//! validation, 3 numerical failure.

mod config;
mod experiments;
mod images;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::similarity::Variant;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "manifoldwalk",
    version,
    about = "Random-walk manifold similarity, gated transfer learning and image comparison",
    args_override_self = true
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Master seed; every output is a deterministic function of it.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Worker threads (default: all logical cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Neighbour count for graphs and votes (default 10, 8 for images).
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Walk parameter, or `auto` for 0.9 / spectral radius.
    #[arg(long, global = true, default_value = "auto")]
    pub t: WalkParam,
    /// Transfer gate: a distance, `inf`, or `calibrate` (largest noise-level-2
    /// distance of the dataset).
    #[arg(long, global = true, default_value = "calibrate")]
    pub dt: GateSetting,
    /// Node embedding: rows, columns or both.
    #[arg(long, global = true, default_value = "rows")]
    pub variant: Variant,
    /// Make k-NN graphs undirected.
    #[arg(long, global = true)]
    pub symmetrize: bool,
    /// Scale source and target with one shared range.
    #[arg(long, global = true)]
    pub joint_scale: bool,
    /// Small sizes for smoke runs (n=300, 5 iterations).
    #[arg(long, global = true)]
    pub quick: bool,
    /// Output file (default: standard output).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// `key=value` file mirroring the long flags; flags given on the command
    /// line take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory holding the UCI files for `tables --suite real`.
    #[arg(long, global = true, env = "MANIFOLDWALK_DATA_DIR")]
    pub data_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkParam(pub Option<f64>);

impl FromStr for WalkParam {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(WalkParam(None));
        }
        match s.parse::<f64>() {
            Ok(t) if t.is_finite() && t >= 0.0 => Ok(WalkParam(Some(t))),
            _ => Err(format!("expected `auto` or a finite t >= 0, got {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateSetting {
    Fixed(f64),
    Calibrate,
}

impl FromStr for GateSetting {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("calibrate") {
            return Ok(GateSetting::Calibrate);
        }
        match s.parse::<f64>() {
            Ok(d) if d >= 0.0 => Ok(GateSetting::Fixed(d)),
            _ => Err(format!("expected `calibrate`, `inf` or a distance >= 0, got {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Synthetic,
    Real,
    All,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Manifold distance between two datasets or two images.
    ///
    /// Inputs ending in .png/.ppm/.pnm are images; anything else is read as
    /// delimited text with a label column. Output CSV columns:
    /// distance,t,variant,n,score
    Similarity(SimilarityArgs),
    /// Distance of a Swiss roll to noisy copies, for every measure.
    ///
    /// Output CSV columns: noise_level,sigma,measure,mean_distance,std
    Figure1(Figure1Args),
    /// Accuracy with and without transfer over labels-per-class and noise.
    ///
    /// Output CSV columns: dataset,per_class,noise_level,sigma,mean_acc_no_tl,mean_acc_tl,measured_distance,gated_fraction,iterations,seed
    Tables(TablesArgs),
    /// Write the superpixel-centroid version of an image (needs --out).
    Superpixel(SuperpixelArgs),
    /// Distance between two images at several superpixel counts.
    ///
    /// Output CSV columns: grid_size,distance (first row `original`)
    SuperpixelStudy(StudyArgs),
    /// Rank gallery images by distance to a reference image.
    ///
    /// Output CSV columns: path,distance (or class,mean_distance,count with
    /// --class-average)
    Rank(RankArgs),
}

#[derive(Args, Debug)]
pub struct ImageArgs {
    /// Downscale images so the longer side is at most this many pixels.
    #[arg(long, default_value_t = 48)]
    pub max_side: usize,
    /// Leave pixel coordinates out of the image point cloud.
    #[arg(long)]
    pub no_xy: bool,
}

#[derive(Args, Debug)]
pub struct SimilarityArgs {
    pub first: PathBuf,
    pub second: PathBuf,
    /// Label column of tabular inputs: 0-based index, header name or `last`.
    #[arg(long, default_value = "last")]
    pub label_col: String,
    /// Write both dense adjacency matrices to PREFIX.a.txt and PREFIX.b.txt.
    #[arg(long, value_name = "PREFIX")]
    pub export_adjacency: Option<PathBuf>,
    #[command(flatten)]
    pub image: ImageArgs,
}

#[derive(Args, Debug)]
pub struct Figure1Args {
    /// Points per Swiss roll (default 1000, quick 300).
    #[arg(long)]
    pub n: Option<usize>,
    /// Seeds per noise level (default 20, quick 5).
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long, default_value_t = 4)]
    pub classes: usize,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4")]
    pub levels: Vec<u8>,
}

#[derive(Args, Debug)]
pub struct TablesArgs {
    /// Rows per iteration (default 1000, quick 300).
    #[arg(long)]
    pub n: Option<usize>,
    /// Iterations per cell (default 20, quick 5).
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "10,20,30,40")]
    pub per_class: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
    pub levels: Vec<u8>,
    /// Classes of the Swiss roll and S-curve.
    #[arg(long, default_value_t = 4)]
    pub classes: usize,
    #[arg(long, value_enum, default_value = "synthetic")]
    pub suite: Suite,
    /// Also write the report as Markdown tables.
    #[arg(long)]
    pub markdown: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SuperpixelArgs {
    pub input: PathBuf,
    /// Superpixel count.
    #[arg(long, default_value_t = 100)]
    pub segments: usize,
    /// Downscale first so the longer side is at most this many pixels.
    #[arg(long)]
    pub max_side: Option<usize>,
    /// Write the segment map as text.
    #[arg(long)]
    pub segments_out: Option<PathBuf>,
    /// Write the LAB palette as text.
    #[arg(long)]
    pub palette_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct StudyArgs {
    pub first: PathBuf,
    pub second: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "100,400")]
    pub sizes: Vec<usize>,
    #[command(flatten)]
    pub image: ImageArgs,
}

#[derive(Args, Debug)]
pub struct RankArgs {
    pub reference: PathBuf,
    /// Directory searched recursively for .png/.ppm/.pnm files.
    pub gallery: PathBuf,
    /// Superpixel-preprocess every image with this many segments.
    #[arg(long)]
    pub superpixel: Option<usize>,
    /// Average distances per immediate subdirectory of the gallery.
    #[arg(long)]
    pub class_average: bool,
    #[command(flatten)]
    pub image: ImageArgs,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match parse(args) {
        Ok(cli) => cli,
        Err(ParseFailure::Clap(e)) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
        Err(ParseFailure::Config(e)) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Some(n) = cli.global.threads {
        // only the first pool configuration in a process takes effect
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match dispatch(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_USAGE
            }
        }
    }
}

enum ParseFailure {
    Clap(clap::Error),
    Config(Error),
}

fn parse(mut args: Vec<OsString>) -> std::result::Result<Cli, ParseFailure> {
    let first = Cli::command()
        .try_get_matches_from(&args)
        .map_err(ParseFailure::Clap)?;
    let cli = Cli::from_arg_matches(&first).map_err(ParseFailure::Clap)?;
    let Some(path) = cli.global.config.clone() else {
        return Ok(cli);
    };
    let entries = config::read(&path).map_err(ParseFailure::Config)?;
    args.extend(config::missing_flags(&first, &entries));
    let merged = Cli::command()
        .try_get_matches_from(&args)
        .map_err(ParseFailure::Clap)?;
    Cli::from_arg_matches(&merged).map_err(ParseFailure::Clap)
}

fn dispatch(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Similarity(a) => emit(g, &images::similarity(g, a)?),
        Command::Figure1(a) => emit(g, &experiments::figure1(g, a)?),
        Command::Tables(a) => {
            let report = experiments::tables(g, a)?;
            if let Some(md) = &a.markdown {
                write_file(md, &report.to_markdown())?;
            }
            emit(g, &report.to_csv())
        }
        Command::Superpixel(a) => images::superpixel(g, a),
        Command::SuperpixelStudy(a) => emit(g, &images::study(g, a)?),
        Command::Rank(a) => emit(g, &images::rank(g, a)?),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(g: &GlobalArgs, text: &str) -> Result<()> {
    match &g.out {
        Some(path) => write_file(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}
