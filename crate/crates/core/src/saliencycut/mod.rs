//! Saliency-initialized iterative GrabCut.

mod colormap;
pub mod gmm;
mod params;
mod pipeline;
mod trimap;

pub use colormap::{segmentation_palette, segmentation_to_colormap, LabelImage};
pub use gmm::{fit_gmm, fit_gmm_traced, GaussianComponent, GmmFit, GmmModel, Mat3};
pub use params::{CutParams, SaliencyMode};
pub use pipeline::{
    binarize, compute_saliency, saliency_cut, saliency_cut_colormap, CutOutcome, CutStatus, IterationRecord,
    IterationReport,
};
pub use trimap::mask_to_trimap;
