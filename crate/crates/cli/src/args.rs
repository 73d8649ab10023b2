use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use saliencut::SaliencyMode;

#[derive(Debug, Parser)]
#[command(name = "saliencut", version, about = "Saliency maps, SaliencyCut segmentation and cached augmentation")]
pub struct Cli {
    /// Seed for every random choice (GMM initialization, colormaps, augmentation).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for batch subcommands.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub jobs: u64,

    /// Log level written to stderr (error, warn, info, debug, trace).
    #[arg(long, global = true, default_value = "info")]
    pub log_level: log::LevelFilter,

    #[command(subcommand)]
    pub command: Command,
}

/// Overrides applied on top of `--params` (or the defaults).
#[derive(Clone, Debug, Default, Args)]
pub struct CutArgs {
    /// Parameter file (`version = 1` plus a `[cut]` table).
    #[arg(long)]
    pub params: Option<PathBuf>,

    /// Saliency map used to seed the cut (hc or rc).
    #[arg(long)]
    pub mode: Option<SaliencyMode>,

    /// Saliency threshold for the initial mask.
    #[arg(long)]
    pub threshold: Option<u8>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write an HC or RC saliency map as a grayscale PNG.
    Saliency {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        cut: CutArgs,
    },
    /// Run SaliencyCut and write the foreground mask.
    Cut {
        input: PathBuf,
        /// Mask PNG (255 = foreground).
        #[arg(long)]
        mask: PathBuf,
        /// Colored segmentation map PNG.
        #[arg(long)]
        colormap: Option<PathBuf>,
        /// Per-iteration text log.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        cut: CutArgs,
    },
    /// Build, check or summarize a segmentation cache.
    #[command(subcommand)]
    Cache(CacheCommand),
    /// Apply an augmentation policy to every image in a directory.
    Augment {
        input_dir: PathBuf,
        output_dir: PathBuf,
        /// Preset name or policy file path.
        #[arg(long)]
        policy: String,
        /// Serve segmentations from this cache instead of computing them.
        #[arg(long)]
        cache: Option<PathBuf>,
        /// Fail on images missing from the cache.
        #[arg(long, requires = "cache")]
        strict_cache: bool,
        /// Load every cached map into memory first.
        #[arg(long, requires = "cache")]
        preload: bool,
        /// Training epoch mixed into each image's seed.
        #[arg(long, default_value_t = 0)]
        epoch: u64,
        #[command(flatten)]
        cut: CutArgs,
    },
    /// Time SaliencyCut at several sizes and a warm cache fetch.
    Bench {
        /// Source image, resized to each size; a synthetic scene when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Comma-separated `WxH` list.
        #[arg(long, value_delimiter = ',', default_value = "60x45,600x450")]
        sizes: Vec<Size>,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
        reps: u64,
        #[command(flatten)]
        cut: CutArgs,
    },
}

#[derive(Debug, Subcommand)]
pub enum CacheCommand {
    Build {
        image_dir: PathBuf,
        cache_dir: PathBuf,
        #[command(flatten)]
        cut: CutArgs,
    },
    /// Check map files, source images and parameters; exits 4 on findings.
    Verify {
        cache_dir: PathBuf,
        /// Source images to check for manifest coverage.
        #[arg(long)]
        images: Option<PathBuf>,
        /// Recompute sampled maps and compare bytes (needs --images).
        #[arg(long, requires = "images")]
        recompute: bool,
        /// Fraction of entries and images to check.
        #[arg(long, default_value_t = 1.0)]
        sample: f64,
        /// Expected parameter file.
        #[arg(long)]
        params: Option<PathBuf>,
    },
    Stats {
        cache_dir: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Size {
    pub width: usize,
    pub height: usize,
}

impl std::str::FromStr for Size {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (w, h) = s.split_once('x').ok_or_else(|| format!("expected WxH, got {s:?}"))?;
        let parse = |v: &str| v.trim().parse::<usize>().ok().filter(|&n| n > 0);
        match (parse(w), parse(h)) {
            (Some(width), Some(height)) => Ok(Self { width, height }),
            _ => Err(format!("expected positive WxH, got {s:?}")),
        }
    }
}

impl std::fmt::Display for Size {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

/// Where an augmentation policy comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolicySource {
    Preset(String),
    File(PathBuf),
}

impl PolicySource {
    /// Paths that exist or end in `.toml` are files, anything else a preset.
    pub fn parse(arg: &str) -> Self {
        let path = Path::new(arg);
        if path.exists() || path.extension().is_some_and(|e| e == "toml") {
            Self::File(path.to_path_buf())
        } else {
            Self::Preset(arg.to_string())
        }
    }
}
