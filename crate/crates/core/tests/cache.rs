use std::fs;
use std::path::Path;

use saliencut::augment::{color_labels, connected_components};
use saliencut::cache::{
    build_cache, hash_image, stats, verify, CacheManifest, CacheStore, Finding, MissPolicy, OpenOptions, VerifyOptions,
};
use saliencut::imagecore::{write_png, BinaryMask};
use saliencut::saliencycut::{saliency_cut, saliency_cut_colormap};
use saliencut::{CutParams, Error, ImageBuffer};

fn blob(seed: usize) -> ImageBuffer {
    let cx = 12.0 + (seed % 5) as f64 * 3.0;
    let cy = 14.0 + (seed % 3) as f64 * 4.0;
    ImageBuffer::from_fn_rgb(40, 36, |x, y| {
        let d = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
        if d < 64.0 {
            [220, (seed * 20 % 200) as u8, 40]
        } else {
            [30, 70, 150]
        }
    })
}

fn write_set(dir: &Path, n: usize) -> Vec<ImageBuffer> {
    (0..n)
        .map(|i| {
            let img = blob(i);
            write_png(dir.join(format!("img{i:02}.png")), &img).unwrap();
            img
        })
        .collect()
}

#[test]
fn duplicates_share_one_entry() {
    let images = tempfile::tempdir().unwrap();
    let root = tempfile::tempdir().unwrap();
    let img = blob(0);
    for name in ["a.png", "b.png", "c.png"] {
        write_png(images.path().join(name), &img).unwrap();
    }
    let report = build_cache(images.path(), root.path(), &CutParams::default(), 1).unwrap();
    assert_eq!((report.images, report.distinct, report.duplicates, report.computed), (3, 1, 2, 1));
    let maps: Vec<_> = walk(&root.path().join("maps"));
    assert_eq!(maps.len(), 1);
    let key = hash_image(&img);
    assert!(maps[0].ends_with(format!("maps/{}/{key}.png", &key.to_hex()[..2])));
    assert!(report.files.iter().all(|(_, k)| *k == Some(key)));
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

#[test]
fn rebuild_is_a_fixed_point() {
    let images = tempfile::tempdir().unwrap();
    let root = tempfile::tempdir().unwrap();
    write_set(images.path(), 6);
    let params = CutParams::default();
    let first = build_cache(images.path(), root.path(), &params, 2).unwrap();
    assert_eq!(first.computed, 6);
    let manifest = fs::read_to_string(root.path().join("manifest.v1.tsv")).unwrap();
    let second = build_cache(images.path(), root.path(), &params, 2).unwrap();
    assert_eq!((second.computed, second.skipped), (0, 6));
    assert_eq!(fs::read_to_string(root.path().join("manifest.v1.tsv")).unwrap(), manifest);

    let other = CutParams {
        threshold: 90,
        ..CutParams::default()
    };
    assert!(matches!(build_cache(images.path(), root.path(), &other, 1), Err(Error::ParamsMismatch { .. })));
}

#[test]
fn fetch_is_transparent() {
    let images = tempfile::tempdir().unwrap();
    let root = tempfile::tempdir().unwrap();
    let set = write_set(images.path(), 4);
    let params = CutParams::default();
    build_cache(images.path(), root.path(), &params, 1).unwrap();
    for preload in [false, true] {
        let store = CacheStore::open(
            root.path(),
            OpenOptions {
                miss: MissPolicy::Strict,
                preload,
            },
        )
        .unwrap();
        assert_eq!(store.len(), 4);
        assert_eq!(store.is_preloaded(), preload);
        for img in &set {
            let cached = store.fetch(img, 0, false).unwrap();
            let (out, inline) = saliency_cut_colormap(img, &params).unwrap();
            assert_eq!(cached, inline);
            let mask = saliency_cut(img, &params).unwrap().mask;
            assert_eq!(mask, out.mask);
            assert_eq!(color_labels(&cached), color_labels(&BinaryMask::to_image(&mask)));

            let a = store.fetch(img, 1, true).unwrap();
            let b = store.fetch(img, 2, true).unwrap();
            assert_ne!(a, b);
            assert_eq!(connected_components(&a), connected_components(&b));
            assert_eq!(connected_components(&a), connected_components(&cached));
        }
    }
}

#[test]
fn misses_follow_policy() {
    let images = tempfile::tempdir().unwrap();
    let root = tempfile::tempdir().unwrap();
    write_set(images.path(), 1);
    build_cache(images.path(), root.path(), &CutParams::default(), 1).unwrap();
    let unseen = blob(7);
    let strict = CacheStore::open(
        root.path(),
        OpenOptions {
            miss: MissPolicy::Strict,
            preload: false,
        },
    )
    .unwrap();
    assert!(matches!(strict.fetch(&unseen, 0, false), Err(Error::MissingEntry(_))));
    let lenient = CacheStore::open(root.path(), OpenOptions::default()).unwrap();
    let (_, inline) = saliency_cut_colormap(&unseen, &CutParams::default()).unwrap();
    assert_eq!(lenient.fetch(&unseen, 0, false).unwrap(), inline);
}

#[test]
fn stale_map_is_reported() {
    let images = tempfile::tempdir().unwrap();
    let root = tempfile::tempdir().unwrap();
    let set = write_set(images.path(), 1);
    build_cache(images.path(), root.path(), &CutParams::default(), 1).unwrap();
    let manifest = CacheManifest::load(root.path()).unwrap();
    let entry = manifest.entries.values().next().unwrap();
    write_png(root.path().join(&entry.path), &ImageBuffer::filled(3, 3, [0, 0, 0])).unwrap();
    let store = CacheStore::open(root.path(), OpenOptions::default()).unwrap();
    assert!(matches!(store.fetch(&set[0], 0, false), Err(Error::StaleEntry { .. })));
}

#[test]
fn open_without_manifest() {
    let root = tempfile::tempdir().unwrap();
    assert!(matches!(
        CacheStore::open(root.path(), OpenOptions::default()),
        Err(Error::ManifestMissing(_))
    ));
}

#[test]
fn verify_findings() {
    let images = tempfile::tempdir().unwrap();
    let root = tempfile::tempdir().unwrap();
    write_set(images.path(), 5);
    let params = CutParams::default();
    build_cache(images.path(), root.path(), &params, 1).unwrap();

    let opts = VerifyOptions {
        image_dir: Some(images.path().to_path_buf()),
        recompute: true,
        expected_params: Some(params.clone()),
        ..VerifyOptions::default()
    };
    let store = CacheStore::open(root.path(), OpenOptions::default()).unwrap();
    let clean = verify(&store, &opts).unwrap();
    assert!(clean.is_clean(), "{:?}", clean.findings);
    assert_eq!((clean.entries_checked, clean.images_checked), (5, 5));

    let drift = VerifyOptions {
        expected_params: Some(CutParams {
            lambda: 10.0,
            ..params.clone()
        }),
        ..VerifyOptions::default()
    };
    let r = verify(&store, &drift).unwrap();
    assert!(matches!(r.findings.as_slice(), [Finding::ParamsDrift { .. }]));

    let victim = store.manifest().entries.values().next().unwrap().path.clone();
    fs::remove_file(root.path().join(&victim)).unwrap();
    write_png(images.path().join("new.png"), &blob(11)).unwrap();
    let r = verify(&store, &opts).unwrap();
    let missing_files = r.findings.iter().filter(|f| matches!(f, Finding::MissingFile { .. })).count();
    let missing_entries = r.findings.iter().filter(|f| matches!(f, Finding::MissingEntry { .. })).count();
    assert_eq!((missing_files, missing_entries, r.findings.len()), (1, 1, 2));

    let s = stats(root.path()).unwrap();
    assert_eq!(s.entries, 5);
    assert_eq!(s.params_fingerprint, params.fingerprint());
    assert!(s.total_bytes > 0);
}

#[test]
fn undecodable_files_do_not_abort() {
    let images = tempfile::tempdir().unwrap();
    let root = tempfile::tempdir().unwrap();
    write_set(images.path(), 2);
    fs::write(images.path().join("broken.png"), b"\x89PNG\r\n\x1a\nnope").unwrap();
    write_png(images.path().join("flat.png"), &ImageBuffer::filled(20, 20, [5, 5, 5])).unwrap();
    let r = build_cache(images.path(), root.path(), &CutParams::default(), 1).unwrap();
    assert_eq!((r.images, r.failed, r.computed, r.no_salient), (4, 1, 3, 1));
}
