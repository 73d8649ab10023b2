use std::fmt::Write as _;

use crate::graphcut::{build_mrf_graph, default_beta};
use crate::imagecore::{rgb_to_lab, BinaryMask, ImageBuffer, TrimapLabel};
use crate::saliency::{hc_saliency_with, rc_saliency, segment_regions, HcParams, RegionParams, SaliencyMap};
use crate::{Error, Result};

use super::colormap::{segmentation_palette, segmentation_to_colormap, LabelImage};
use super::{fit_gmm, mask_to_trimap, CutParams, SaliencyMode};

const BG_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutStatus {
    Converged,
    MaxIterations,
    /// The thresholded saliency (or a later cut) left nothing in the foreground.
    NoSalientObject,
    /// One side had no samples to fit a color model to.
    DegenerateModel,
}

impl std::fmt::Display for CutStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Converged => "converged",
            Self::MaxIterations => "max_iterations",
            Self::NoSalientObject => "no_salient_object",
            Self::DegenerateModel => "degenerate_model",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub definite_fg: usize,
    pub definite_bg: usize,
    pub unknown: usize,
    pub fg_samples: usize,
    pub bg_samples: usize,
    /// Energy of the incoming mask under this iteration's models.
    pub energy_before: f64,
    /// Energy of the cut returned by this iteration.
    pub energy: f64,
    pub changed: usize,
    pub change_fraction: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationReport {
    pub status: CutStatus,
    pub initial_fg: usize,
    pub morph_radius: usize,
    pub beta: f64,
    pub iterations: Vec<IterationRecord>,
}

impl IterationReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "status={} initial_fg={} morph_radius={} beta={:.6e}",
            self.status, self.initial_fg, self.morph_radius, self.beta
        );
        for r in &self.iterations {
            let _ = writeln!(
                s,
                "iter={} fg={} bg={} unknown={} fg_samples={} bg_samples={} energy_before={:.6} energy={:.6} changed={} change_fraction={:.6}",
                r.iteration,
                r.definite_fg,
                r.definite_bg,
                r.unknown,
                r.fg_samples,
                r.bg_samples,
                r.energy_before,
                r.energy,
                r.changed,
                r.change_fraction
            );
        }
        s
    }
}

#[derive(Clone, Debug)]
pub struct CutOutcome {
    pub mask: BinaryMask,
    pub saliency: SaliencyMap,
    pub report: IterationReport,
}

impl CutOutcome {
    pub fn status(&self) -> CutStatus {
        self.report.status
    }
}

/// Foreground where the saliency value is at least `threshold`. A threshold
/// of 256 yields an empty mask.
pub fn binarize(map: &SaliencyMap, threshold: u16) -> BinaryMask {
    let data = map.values.iter().map(|&v| u16::from(v) >= threshold).collect();
    BinaryMask::from_vec(map.width, map.height, data).expect("map dimensions")
}

pub fn compute_saliency(img: &ImageBuffer, params: &CutParams) -> Result<SaliencyMap> {
    let rgb = img.to_rgb();
    match params.saliency_mode {
        SaliencyMode::Hc => hc_saliency_with(
            &rgb,
            &HcParams {
                coverage: params.coverage,
                smoothing: params.hc_smoothing,
            },
        ),
        SaliencyMode::Rc => {
            let regions = segment_regions(
                &rgb,
                &RegionParams {
                    scale_k: params.scale_k,
                    min_size: params.min_size,
                    coverage: params.coverage,
                },
            )?;
            rc_saliency(&rgb, &regions, params.sigma_s)
        }
    }
}

/// Saliency, threshold, then up to `max_iters` rounds of trimap, color
/// models and graph cut.
pub fn saliency_cut(img: &ImageBuffer, params: &CutParams) -> Result<CutOutcome> {
    params.validate()?;
    let rgb = img.to_rgb();
    let (w, h) = rgb.dims();
    let n = w * h;
    let saliency = compute_saliency(&rgb, params)?;
    let mut mask = binarize(&saliency, u16::from(params.threshold));
    let lab = rgb_to_lab(&rgb)?;
    let beta = params.beta.unwrap_or_else(|| default_beta(&lab));
    let radius = params.morph_radius_for(w, h);
    let mut report = IterationReport {
        status: CutStatus::MaxIterations,
        initial_fg: mask.count(),
        morph_radius: radius,
        beta,
        iterations: Vec::new(),
    };

    for iteration in 0..params.max_iters {
        let trimap = match mask_to_trimap(&mask, radius) {
            Ok(t) => t,
            Err(Error::DegenerateMask) => {
                report.status = CutStatus::NoSalientObject;
                break;
            }
            Err(e) => return Err(e),
        };
        let mut fg_samples = Vec::new();
        let mut bg_samples = Vec::new();
        for (p, (&label, &m)) in trimap.labels.iter().zip(mask.data()).enumerate() {
            let fg = match label {
                TrimapLabel::Fg => true,
                TrimapLabel::Bg => false,
                TrimapLabel::Unknown => m,
            };
            if fg {
                fg_samples.push(lab.data[p]);
            } else {
                bg_samples.push(lab.data[p]);
            }
        }
        if fg_samples.is_empty() || bg_samples.is_empty() {
            report.status = CutStatus::DegenerateModel;
            break;
        }
        let fg_model = fit_gmm(&fg_samples, params.gmm_k, params.seed)?;
        let bg_model = fit_gmm(&bg_samples, params.gmm_k, params.seed ^ BG_SEED_SALT)?;
        let graph = build_mrf_graph(&lab, &fg_model, &bg_model, &trimap, params.lambda, beta)?;
        let energy_before = graph.energy(&mask);
        let (next, cut) = graph.solve();
        let changed = next.hamming(&mask);
        let change_fraction = changed as f64 / n as f64;
        report.iterations.push(IterationRecord {
            iteration,
            definite_fg: trimap.count(TrimapLabel::Fg),
            definite_bg: trimap.count(TrimapLabel::Bg),
            unknown: trimap.count(TrimapLabel::Unknown),
            fg_samples: fg_samples.len(),
            bg_samples: bg_samples.len(),
            energy_before,
            energy: cut.flow_value + graph.offset,
            changed,
            change_fraction,
        });
        mask = next;
        if change_fraction < params.convergence_eps {
            report.status = CutStatus::Converged;
            break;
        }
    }
    if mask.is_empty() {
        report.status = CutStatus::NoSalientObject;
    }
    log::debug!("saliency cut {}x{}: {} after {} iterations", w, h, report.status, report.iterations.len());
    Ok(CutOutcome { mask, saliency, report })
}

/// Runs [`saliency_cut`] and renders the mask with the image's own palette.
pub fn saliency_cut_colormap(img: &ImageBuffer, params: &CutParams) -> Result<(CutOutcome, ImageBuffer)> {
    let outcome = saliency_cut(img, params)?;
    let colors = segmentation_palette(img, params.coverage)?;
    let map = segmentation_to_colormap(&LabelImage::from(&outcome.mask), &colors, params.seed);
    Ok((outcome, map))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(size: usize) -> (ImageBuffer, BinaryMask) {
        let c = size as f64 / 2.0;
        let r = size as f64 / 4.0;
        let inside = |x: usize, y: usize| {
            let dx = x as f64 + 0.5 - c;
            let dy = y as f64 + 0.5 - c;
            dx * dx + dy * dy <= r * r
        };
        let img = ImageBuffer::from_fn_rgb(size, size, |x, y| if inside(x, y) { [220, 40, 30] } else { [40, 90, 160] });
        (img, BinaryMask::from_fn(size, size, inside))
    }

    #[test]
    fn binarize_thresholds() {
        let map = SaliencyMap::from_raw(2, 1, vec![0.0, 1.0]);
        assert_eq!(binarize(&map, 0).count(), 2);
        assert_eq!(binarize(&map, 70).data(), &[false, true]);
        assert_eq!(binarize(&map, 256).count(), 0);
    }

    #[test]
    fn uniform_image_has_no_salient_object() {
        let img = ImageBuffer::filled(32, 24, [90, 90, 90]);
        let out = saliency_cut(&img, &CutParams::default()).unwrap();
        assert_eq!(out.status(), CutStatus::NoSalientObject);
        assert!(out.mask.is_empty());
        assert!(out.report.iterations.is_empty());
    }

    #[test]
    fn disk_is_recovered() {
        let (img, truth) = disk(64);
        for mode in [SaliencyMode::Rc, SaliencyMode::Hc] {
            let params = CutParams {
                saliency_mode: mode,
                ..CutParams::default()
            };
            let out = saliency_cut(&img, &params).unwrap();
            assert!(out.mask.iou(&truth) >= 0.95, "{mode}: iou {}", out.mask.iou(&truth));
        }
    }

    #[test]
    fn each_cut_does_not_raise_energy() {
        let (img, _) = disk(48);
        let img = ImageBuffer::from_fn_rgb(48, 48, |x, y| {
            let p = img.pixel(x, y);
            let n = ((x * 31 + y * 17) % 23) as u8;
            [p[0].saturating_add(n), p[1].saturating_sub(n / 2), p[2].saturating_add(n / 3)]
        });
        let params = CutParams {
            convergence_eps: 0.0,
            ..CutParams::default()
        };
        let out = saliency_cut(&img, &params).unwrap();
        assert!(!out.report.iterations.is_empty());
        for r in &out.report.iterations {
            assert!(r.energy <= r.energy_before + 1e-6, "{r:?}");
        }
    }

    #[test]
    fn deterministic_and_reported() {
        let (img, _) = disk(40);
        let params = CutParams::default();
        let a = saliency_cut(&img, &params).unwrap();
        let b = saliency_cut(&img, &params).unwrap();
        assert_eq!(a.mask, b.mask);
        assert_eq!(a.report, b.report);
        let text = a.report.to_text();
        assert!(text.starts_with("status="));
        assert_eq!(text.lines().count(), 1 + a.report.iterations.len());
        if a.status() == CutStatus::Converged {
            assert!(a.report.iterations.last().unwrap().change_fraction < params.convergence_eps);
        }
    }

    #[test]
    fn higher_threshold_never_grows_initial_mask() {
        let (img, _) = disk(32);
        let map = compute_saliency(&img, &CutParams::default()).unwrap();
        let mut prev = binarize(&map, 0);
        for t in 1..=256u16 {
            let m = binarize(&map, t);
            assert!(m.is_subset_of(&prev));
            prev = m;
        }
    }

    #[test]
    fn colormap_matches_mask_partition() {
        let (img, _) = disk(40);
        let (out, map) = saliency_cut_colormap(&img, &CutParams::default()).unwrap();
        let fg_color = (0..out.mask.data().len()).find(|&i| out.mask.data()[i]).map(|i| map.rgb_at(i));
        for (i, &m) in out.mask.data().iter().enumerate() {
            assert_eq!(Some(map.rgb_at(i)) == fg_color, m);
        }
    }
}
