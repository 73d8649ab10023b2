mod common;

use common::oracles::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use saliencut::graphcut::{build_mrf_graph, FlowGraph, Side};
use saliencut::imagecore::{srgb_to_lab, LabImage};
use saliencut::saliency::{hc_saliency, rc_region_saliency, RegionMap};
use saliencut::saliencycut::{fit_gmm_traced, GmmModel};
use saliencut::{BinaryMask, ImageBuffer, Trimap, TrimapLabel};

fn to_image(pixels: &[[u8; 3]], w: usize, h: usize) -> ImageBuffer {
    ImageBuffer::from_fn_rgb(w, h, |x, y| pixels[y * w + x])
}

#[test]
fn lab_matches_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..2000 {
        let p: [u8; 3] = [rng.random(), rng.random(), rng.random()];
        let got = srgb_to_lab(p);
        let want = lab_ref(p.map(f64::from));
        for c in 0..3 {
            assert!((got[c] - want[c]).abs() < 1e-9, "{p:?}: {got:?} vs {want:?}");
        }
    }
    assert!((lab_ref([255.0; 3])[0] - 100.0).abs() < 1e-9);
}

#[test]
fn hc_matches_direct_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let w = rng.random_range(1..=24);
        let h = rng.random_range(1..=24);
        let pixels = random_palette_image(&mut rng, w, h, 40);
        let map = hc_saliency(&to_image(&pixels, w, h), 1.0).unwrap();
        let want = hc_oracle(&pixels);
        for (a, b) in map.raw.iter().zip(&want) {
            assert!(rel_close(*a, *b, 1e-9), "{a} vs {b}");
        }
    }
}

#[test]
fn rc_matches_direct_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let w = rng.random_range(8..=32);
        let h = rng.random_range(8..=32);
        let regions = rng.random_range(3..=6);
        let (pixels, labels) = random_region_image(&mut rng, w, h, regions);
        let img = to_image(&pixels, w, h);
        let map = RegionMap::from_labels(&img, labels.clone(), 1.0).unwrap();
        let got = rc_region_saliency(&map, 0.4);
        let want = rc_oracle(&pixels, &labels, w, h, 0.4);
        assert_eq!(got.len(), want.len());
        for (a, b) in got.iter().zip(&want) {
            assert!(rel_close(*a, *b, 1e-9), "{a} vs {b}");
        }
    }
}

#[test]
fn max_flow_equals_brute_force_cut() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..500 {
        let g = random_small_graph(&mut rng);
        let mut fg = FlowGraph::new(g.n);
        for i in 0..g.n {
            fg.add_terminal_weights(i, g.source[i], g.sink[i]);
        }
        for &(u, v, c) in &g.edges {
            fg.add_edge(u, v, c, 0.0);
        }
        let cut = fg.max_flow();
        let brute = brute_min_cut(&g);
        assert!((cut.flow_value - brute).abs() < 1e-9, "{} vs {brute}", cut.flow_value);
        assert!((fg.cut_capacity(&cut.sides) - brute).abs() < 1e-9);
    }
}

fn model(parts: &[Part]) -> GmmModel {
    GmmModel::from_parts(parts).unwrap()
}

#[test]
fn gmm_density_matches_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let mrf = random_tiny_mrf(&mut rng);
        let m = model(&mrf.fg);
        for z in &mrf.lab {
            let a = m.log_likelihood(z);
            let b = gmm_log_lik_ref(&mrf.fg, z);
            assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "{a} vs {b}");
        }
    }
}

#[test]
fn graph_cut_reaches_exhaustive_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..40 {
        let mrf = random_tiny_mrf(&mut rng);
        let lab = LabImage {
            width: 4,
            height: 4,
            data: mrf.lab.clone(),
        };
        let trimap = Trimap {
            width: 4,
            height: 4,
            labels: mrf
                .trimap
                .iter()
                .map(|&t| match t {
                    0 => TrimapLabel::Bg,
                    1 => TrimapLabel::Fg,
                    _ => TrimapLabel::Unknown,
                })
                .collect(),
        };
        let g = build_mrf_graph(&lab, &model(&mrf.fg), &model(&mrf.bg), &trimap, mrf.lambda, mrf.beta).unwrap();
        let (mask, cut) = g.solve();
        let best = mrf.brute_min_energy();
        let labels: Vec<bool> = mask.data().to_vec();
        let got = mrf.energy(&labels);
        let tol = 1e-9 * best.abs().max(1.0);
        assert!((got - best).abs() < tol, "{got} vs {best}");
        assert!((g.energy(&mask) - best).abs() < tol);
        assert!((cut.flow_value + g.offset - best).abs() < tol);
        assert!(cut.sides.iter().zip(&labels).all(|(s, &l)| (*s == Side::Source) == l));
    }
}

#[test]
fn mrf_energy_matches_reference_for_any_labeling() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mrf = random_tiny_mrf(&mut rng);
    let lab = LabImage {
        width: 4,
        height: 4,
        data: mrf.lab.clone(),
    };
    let trimap = Trimap::filled(4, 4, TrimapLabel::Unknown);
    let all_unknown = TinyMrf {
        trimap: vec![2; 16],
        ..mrf
    };
    let g = build_mrf_graph(&lab, &model(&all_unknown.fg), &model(&all_unknown.bg), &trimap, all_unknown.lambda, all_unknown.beta)
        .unwrap();
    for _ in 0..200 {
        let labels: Vec<bool> = (0..16).map(|_| rng.random()).collect();
        let mask = BinaryMask::from_vec(4, 4, labels.clone()).unwrap();
        let a = g.energy(&mask);
        let b = all_unknown.energy(&labels);
        assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "{a} vs {b}");
    }
}

#[test]
fn em_log_likelihood_is_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for seed in 0..30 {
        let centers: Vec<[f64; 3]> = (0..3)
            .map(|_| [rng.random_range(0.0..100.0), rng.random_range(-80.0..80.0), rng.random_range(-80.0..80.0)])
            .collect();
        let samples: Vec<[f64; 3]> = (0..300)
            .map(|i| {
                let c = centers[i % 3];
                [
                    c[0] + rng.random_range(-6.0..6.0),
                    c[1] + rng.random_range(-6.0..6.0),
                    c[2] + rng.random_range(-6.0..6.0),
                ]
            })
            .collect();
        let fit = fit_gmm_traced(&samples, 5, seed).unwrap();
        for w in fit.log_likelihoods.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "{:?}", fit.log_likelihoods);
        }
        let wsum: f64 = fit.model.components().iter().map(|c| c.weight).sum();
        assert!((wsum - 1.0).abs() < 1e-9);
        let mean_ll = samples.iter().map(|z| fit.model.log_likelihood(z)).sum::<f64>() / samples.len() as f64;
        let parts: Vec<Part> = fit
            .model
            .components()
            .iter()
            .map(|c| (c.weight, c.mean, c.cov))
            .collect();
        let reference = samples.iter().map(|z| gmm_log_lik_ref(&parts, z)).sum::<f64>() / samples.len() as f64;
        assert!((mean_ll - reference).abs() < 1e-6 * reference.abs().max(1.0));
    }
}
