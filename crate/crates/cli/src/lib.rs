//! Command implementations behind the `saliencut` binary.
//!
//! Data goes to stdout and output files; logs go to stderr. Exit codes:
//! 0 success, 2 I/O or decode failure, 3 usage or parameter error, 4 cache
//! inconsistency, 1 anything else.

pub mod args;
mod bench;

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use rayon::prelude::*;
use saliencut::augment::{apply_policy, image_seed, preset_policies, preset_policy, AugPolicy, InlineSegmentation, SegmentationSource};
use saliencut::cache::{
    build_cache, hash_image, list_images, stats, verify, CacheStore, MissPolicy, OpenOptions, VerifyOptions,
};
use saliencut::imagecore::{read_image, write_png};
use saliencut::saliencycut::{compute_saliency, saliency_cut, saliency_cut_colormap, CutStatus};
use saliencut::{CutParams, Error};

pub use args::{CacheCommand, Cli, Command, CutArgs, PolicySource, Size};
pub use bench::{bench_table, BenchRow};

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_IO: u8 = 2;
pub const EXIT_USAGE: u8 = 3;
pub const EXIT_CACHE: u8 = 4;

/// Raised when `cache verify` reports findings.
#[derive(Debug)]
pub struct CacheInconsistent(pub usize);

impl std::fmt::Display for CacheInconsistent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "cache verification found {} problem(s)", self.0)
    }
}

impl std::error::Error for CacheInconsistent {}

/// Exit status for an error, from the first recognized cause in its chain.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<CacheInconsistent>() {
            return EXIT_CACHE;
        }
        if cause.is::<std::io::Error>() {
            return EXIT_IO;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::CorruptStream(_)
                | Error::UnsupportedFormat
                | Error::WrongChannelCount { .. }
                | Error::InvalidBuffer(_)
                | Error::Io(_) => EXIT_IO,
                Error::InvalidParameter(_)
                | Error::InvalidPolicy(_)
                | Error::Parse { .. }
                | Error::Config(_)
                | Error::VersionMismatch(_) => EXIT_USAGE,
                Error::MissingEntry(_)
                | Error::StaleEntry { .. }
                | Error::ManifestMissing(_)
                | Error::ParamsMismatch { .. } => EXIT_CACHE,
                _ => EXIT_FAILURE,
            };
        }
    }
    EXIT_FAILURE
}

/// `--params` file (or defaults) with the command-line overrides applied.
pub fn resolve_params(cut: &CutArgs, seed: Option<u64>) -> Result<CutParams> {
    let mut params = match &cut.params {
        Some(path) => CutParams::load(path).with_context(|| format!("loading {}", path.display()))?,
        None => CutParams::default(),
    };
    if let Some(mode) = cut.mode {
        params.saliency_mode = mode;
    }
    if let Some(t) = cut.threshold {
        params.threshold = t;
    }
    if let Some(s) = seed {
        params.seed = s;
    }
    params.validate()?;
    Ok(params)
}

pub fn resolve_policy(arg: &str) -> Result<AugPolicy> {
    let policy = match PolicySource::parse(arg) {
        PolicySource::File(path) => AugPolicy::load(&path).with_context(|| format!("loading {}", path.display()))?,
        PolicySource::Preset(name) => preset_policy(&name).ok_or_else(|| {
            let known: Vec<String> = preset_policies().into_iter().map(|p| p.name).collect();
            Error::InvalidPolicy(format!("unknown preset {name:?}; known: {}", known.join(", ")))
        })?,
    };
    policy.validate()?;
    Ok(policy)
}

fn thread_pool(jobs: u64) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(jobs as usize).build()?)
}

fn read_rgb(path: &Path) -> Result<saliencut::ImageBuffer> {
    Ok(read_image(path).with_context(|| format!("reading {}", path.display()))?.to_rgb())
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Saliency { input, output, cut } => {
            let params = resolve_params(&cut, cli.seed)?;
            let img = read_rgb(&input)?;
            let start = Instant::now();
            let map = compute_saliency(&img, &params)?;
            log::info!(
                "{} saliency for {}x{} in {:.3}s",
                params.saliency_mode,
                img.width(),
                img.height(),
                start.elapsed().as_secs_f64()
            );
            write_png(&output, &map.to_image())?;
        }
        Command::Cut {
            input,
            mask,
            colormap,
            report,
            cut,
        } => {
            let params = resolve_params(&cut, cli.seed)?;
            let img = read_rgb(&input)?;
            let start = Instant::now();
            let (outcome, map) = match colormap {
                Some(_) => {
                    let (o, m) = saliency_cut_colormap(&img, &params)?;
                    (o, Some(m))
                }
                None => (saliency_cut(&img, &params)?, None),
            };
            log::info!(
                "cut {}x{} in {:.3}s",
                img.width(),
                img.height(),
                start.elapsed().as_secs_f64()
            );
            if outcome.status() == CutStatus::NoSalientObject {
                log::warn!("{}: no salient object found", input.display());
            }
            write_png(&mask, &outcome.mask.to_image())?;
            if let (Some(path), Some(map)) = (colormap, map) {
                write_png(&path, &map)?;
            }
            if let Some(path) = report {
                std::fs::write(&path, outcome.report.to_text())?;
            }
            writeln!(
                out,
                "{}\t{}\t{}\t{}",
                input.display(),
                outcome.status(),
                outcome.mask.count(),
                outcome.report.iterations.len()
            )?;
        }
        Command::Cache(cmd) => run_cache(cmd, cli.seed, cli.jobs, out)?,
        Command::Augment {
            input_dir,
            output_dir,
            policy,
            cache,
            strict_cache,
            preload,
            epoch,
            cut,
        } => {
            let policy = resolve_policy(&policy)?;
            let seed = cli.seed.unwrap_or(0);
            let source: Box<dyn SegmentationSource> = match &cache {
                Some(dir) => Box::new(CacheStore::open(
                    dir,
                    OpenOptions {
                        miss: if strict_cache { MissPolicy::Strict } else { MissPolicy::Lenient },
                        preload,
                    },
                )?),
                None => Box::new(InlineSegmentation {
                    params: resolve_params(&cut, cli.seed)?,
                }),
            };
            std::fs::create_dir_all(&output_dir)?;
            let inputs = list_images(&input_dir)?;
            let pool = thread_pool(cli.jobs)?;
            let rows: Vec<Result<String>> = pool.install(|| {
                inputs
                    .par_iter()
                    .map(|path| {
                        let img = read_rgb(path)?;
                        let key = hash_image(&img);
                        let augmented = apply_policy(&img, &policy, image_seed(seed, &key, epoch), source.as_ref())
                            .with_context(|| format!("augmenting {}", path.display()))?;
                        let stem = path.file_stem().map_or_else(|| "image".into(), |s| s.to_string_lossy());
                        let target = output_dir.join(format!("{stem}.png"));
                        write_png(&target, &augmented)?;
                        Ok(format!("{}\t{key}\t{}", path.display(), target.display()))
                    })
                    .collect()
            });
            for row in rows {
                writeln!(out, "{}", row?)?;
            }
        }
        Command::Bench {
            input,
            sizes,
            reps,
            cut,
        } => {
            let params = resolve_params(&cut, cli.seed)?;
            let source = input.as_deref().map(read_rgb).transpose()?;
            let rows = bench_table(source.as_ref(), &sizes, reps as usize, &params)?;
            bench::write_table(out, &rows)?;
        }
    }
    Ok(())
}

fn run_cache(cmd: CacheCommand, seed: Option<u64>, jobs: u64, out: &mut dyn Write) -> Result<()> {
    match cmd {
        CacheCommand::Build {
            image_dir,
            cache_dir,
            cut,
        } => {
            let params = resolve_params(&cut, seed)?;
            let start = Instant::now();
            let report = build_cache(&image_dir, &cache_dir, &params, jobs as usize)?;
            log::info!("cache build took {:.2}s", start.elapsed().as_secs_f64());
            writeln!(out, "{report}")?;
        }
        CacheCommand::Verify {
            cache_dir,
            images,
            recompute,
            sample,
            params,
        } => {
            if !(sample > 0.0 && sample <= 1.0) {
                return Err(Error::InvalidParameter(format!("--sample {sample} must be in (0, 1]")).into());
            }
            let expected_params = params
                .map(|p| CutParams::load(&p).with_context(|| format!("loading {}", p.display())))
                .transpose()?;
            let store = CacheStore::open(&cache_dir, OpenOptions::default())?;
            let pool = thread_pool(jobs)?;
            let report = pool.install(|| {
                verify(
                    &store,
                    &VerifyOptions {
                        sample_fraction: sample,
                        seed: seed.unwrap_or(0),
                        image_dir: images,
                        recompute,
                        expected_params,
                    },
                )
            })?;
            for f in &report.findings {
                writeln!(out, "{f}")?;
            }
            writeln!(
                out,
                "{} entries checked, {} images checked, {} findings",
                report.entries_checked,
                report.images_checked,
                report.findings.len()
            )?;
            if !report.is_clean() {
                return Err(CacheInconsistent(report.findings.len()).into());
            }
        }
        CacheCommand::Stats { cache_dir } => writeln!(out, "{}", stats(&cache_dir)?)?,
    }
    Ok(())
}
