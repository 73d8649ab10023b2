//! GrabCut energy on an 8-connected pixel grid.
//!
//! Source side means foreground. An uncertain pixel pays `-ln p_bg(z)` when
//! cut from the source and `-ln p_fg(z)` when cut from the sink. Trimap-fixed
//! pixels get a single terminal link of capacity `K`, larger than any
//! pixel's total smoothness weight, so no minimum cut can flip them.

use crate::imagecore::{lab_distance_sq, BinaryMask, LabImage, Trimap, TrimapLabel};
use crate::saliencycut::GmmModel;
use crate::{Error, Result};

use super::{CutResult, FlowGraph, Side};

/// Forward half of the 8-neighborhood: right, down, down-right, down-left.
pub const NEIGHBOR_OFFSETS: [(isize, isize); 4] = [(1, 0), (0, 1), (1, 1), (-1, 1)];

fn for_each_pair(width: usize, height: usize, mut f: impl FnMut(usize, usize, f64)) {
    for y in 0..height {
        for x in 0..width {
            let p = y * width + x;
            for &(dx, dy) in &NEIGHBOR_OFFSETS {
                let nx = x as isize + dx;
                let ny = y + dy as usize;
                if nx < 0 || nx as usize >= width || ny >= height {
                    continue;
                }
                let dist = if dx != 0 && dy != 0 { std::f64::consts::SQRT_2 } else { 1.0 };
                f(p, ny * width + nx as usize, dist);
            }
        }
    }
}

/// `1 / (2 * mean squared Lab difference)` over 8-neighbor pairs; 0 for a
/// flat image.
pub fn default_beta(lab: &LabImage) -> f64 {
    let (mut sum, mut count) = (0.0, 0usize);
    for_each_pair(lab.width, lab.height, |p, q, _| {
        sum += lab_distance_sq(&lab.data[p], &lab.data[q]);
        count += 1;
    });
    if count == 0 || sum == 0.0 {
        0.0
    } else {
        count as f64 / (2.0 * sum)
    }
}

/// A built cut problem plus what is needed to report energies.
#[derive(Clone, Debug)]
pub struct MrfGraph {
    pub width: usize,
    pub height: usize,
    pub graph: FlowGraph,
    /// Constant removed from the unary terms to keep capacities non-negative.
    pub offset: f64,
    /// Hard-constraint capacity.
    pub hard: f64,
}

impl MrfGraph {
    pub fn solve(&self) -> (BinaryMask, CutResult) {
        let cut = self.graph.max_flow();
        let mask = self.mask_from_sides(&cut.sides);
        (mask, cut)
    }

    pub fn mask_from_sides(&self, sides: &[Side]) -> BinaryMask {
        let data = sides.iter().map(|&s| s == Side::Source).collect();
        BinaryMask::from_vec(self.width, self.height, data).expect("one side per pixel")
    }

    /// Energy of a labeling (foreground = source side).
    pub fn energy(&self, mask: &BinaryMask) -> f64 {
        let sides: Vec<Side> = mask
            .data()
            .iter()
            .map(|&b| if b { Side::Source } else { Side::Sink })
            .collect();
        self.graph.cut_capacity(&sides) + self.offset
    }
}

pub fn build_mrf_graph(
    lab: &LabImage,
    fg: &GmmModel,
    bg: &GmmModel,
    trimap: &Trimap,
    lambda: f64,
    beta: f64,
) -> Result<MrfGraph> {
    if lab.dims() != trimap.dims() {
        return Err(Error::DimensionMismatch {
            expected: lab.dims(),
            actual: trimap.dims(),
        });
    }
    if fg.k() == 0 || bg.k() == 0 {
        return Err(Error::UnfittedModel);
    }
    if !(lambda >= 0.0) || !(beta >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda {lambda} and beta {beta} must be >= 0")));
    }
    let (w, h) = lab.dims();
    let n = w * h;
    let mut graph = FlowGraph::with_edge_capacity(n, n * 4);
    let mut incident = vec![0.0f64; n];
    if lambda > 0.0 {
        for_each_pair(w, h, |p, q, dist| {
            let d2 = lab_distance_sq(&lab.data[p], &lab.data[q]);
            let wt = lambda * (-beta * d2).exp() / dist;
            graph.add_edge(p, q, wt, wt);
            incident[p] += wt;
            incident[q] += wt;
        });
    }
    let hard = 1.0 + incident.iter().copied().fold(0.0, f64::max);
    let mut offset = 0.0;
    for (p, label) in trimap.labels.iter().enumerate() {
        match label {
            TrimapLabel::Fg => graph.add_terminal_weights(p, hard, 0.0),
            TrimapLabel::Bg => graph.add_terminal_weights(p, 0.0, hard),
            TrimapLabel::Unknown => {
                let z = &lab.data[p];
                let cost_fg = -fg.log_likelihood(z);
                let cost_bg = -bg.log_likelihood(z);
                let base = cost_fg.min(cost_bg);
                if !base.is_finite() {
                    return Err(Error::InvalidParameter(format!("non-finite likelihood at pixel {p}")));
                }
                offset += base;
                graph.add_terminal_weights(p, cost_bg - base, cost_fg - base);
            }
        }
    }
    Ok(MrfGraph {
        width: w,
        height: h,
        graph,
        offset,
        hard,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagecore::{rgb_to_lab, ImageBuffer};

    fn two_models() -> (GmmModel, GmmModel) {
        let cov = [[30.0, 0.0, 0.0], [0.0, 30.0, 0.0], [0.0, 0.0, 30.0]];
        let fg = GmmModel::from_parts(&[(0.6, [80.0, 10.0, 10.0], cov), (0.4, [70.0, 20.0, 0.0], cov)]).unwrap();
        let bg = GmmModel::from_parts(&[(0.5, [20.0, -5.0, -5.0], cov), (0.5, [30.0, 0.0, -10.0], cov)]).unwrap();
        (fg, bg)
    }

    #[test]
    fn definite_trimap_is_reproduced() {
        let img = ImageBuffer::from_fn_rgb(6, 6, |x, y| [(x * 40) as u8, (y * 40) as u8, 100]);
        let lab = rgb_to_lab(&img).unwrap();
        let (fg, bg) = two_models();
        let mut trimap = Trimap::filled(6, 6, TrimapLabel::Bg);
        for p in [0, 7, 14, 20, 35] {
            trimap.labels[p] = TrimapLabel::Fg;
        }
        let g = build_mrf_graph(&lab, &fg, &bg, &trimap, 50.0, default_beta(&lab)).unwrap();
        let (mask, _) = g.solve();
        for (p, l) in trimap.labels.iter().enumerate() {
            assert_eq!(mask.data()[p], *l == TrimapLabel::Fg);
        }
    }

    #[test]
    fn zero_lambda_labels_independently() {
        let img = ImageBuffer::from_fn_rgb(8, 4, |x, y| [(x * 30) as u8, (y * 60) as u8, (x * y * 9) as u8]);
        let lab = rgb_to_lab(&img).unwrap();
        let (fg, bg) = two_models();
        let trimap = Trimap::filled(8, 4, TrimapLabel::Unknown);
        let g = build_mrf_graph(&lab, &fg, &bg, &trimap, 0.0, 1.0).unwrap();
        let (mask, _) = g.solve();
        for (p, z) in lab.data.iter().enumerate() {
            let want = fg.log_likelihood(z) > bg.log_likelihood(z);
            assert_eq!(mask.data()[p], want, "pixel {p}");
        }
    }

    #[test]
    fn errors() {
        let img = ImageBuffer::filled(3, 3, [0, 0, 0]);
        let lab = rgb_to_lab(&img).unwrap();
        let (fg, bg) = two_models();
        let bad = Trimap::filled(3, 4, TrimapLabel::Unknown);
        assert!(matches!(
            build_mrf_graph(&lab, &fg, &bg, &bad, 1.0, 1.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn beta_of_flat_image_is_zero() {
        let lab = rgb_to_lab(&ImageBuffer::filled(4, 4, [9, 9, 9])).unwrap();
        assert_eq!(default_beta(&lab), 0.0);
    }
}
