//! Binary min-cut machinery: a Boykov-Kolmogorov max-flow solver and the
//! pixel-graph construction for the GrabCut MRF energy.

mod maxflow;
mod mrf;

pub use maxflow::{CutResult, FlowGraph, Side, RESIDUAL_EPS};
pub use mrf::{build_mrf_graph, default_beta, MrfGraph, NEIGHBOR_OFFSETS};
