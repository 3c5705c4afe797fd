mod common;

use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use radar_gt::error::Error;
use radar_gt::geometry::Pose;
use radar_gt::image::{pgm, GrayImage};
use radar_gt::metrics::{evaluate_pairs, format_table, psnr, rmi, rmi_default, ssim, MetricReport};
use radar_gt::pairing::{PairManifest, PairRecord, Split};
use radar_gt::projection::BevGridSpec;

#[test]
fn psnr_fixed_points_and_oracle() {
    let zeros = GrayImage::new(32, 32);
    assert_eq!(psnr(&zeros, &GrayImage::filled(32, 32, 255)).unwrap(), 0.0);
    assert_eq!(psnr(&zeros, &zeros).unwrap(), f64::INFINITY);
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    for _ in 0..20 {
        let a = common::random_image(&mut rng, 64, 64);
        let b = common::random_image(&mut rng, 64, 64);
        assert!((psnr(&a, &b).unwrap() - common::psnr_oracle(&a, &b)).abs() < 1e-9);
    }
    assert!(psnr(&zeros, &GrayImage::new(32, 31)).is_err());
}

#[test]
fn ssim_fixed_points_and_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let a = common::random_image(&mut rng, 64, 64);
    assert!((ssim(&a, &a).unwrap() - 1.0).abs() < 1e-12);

    let c1 = (0.01f64 * 255.0).powi(2);
    let s = ssim(&GrayImage::new(32, 32), &GrayImage::filled(32, 32, 255)).unwrap();
    assert!((s - c1 / (255.0 * 255.0 + c1)).abs() < 1e-15);

    for _ in 0..20 {
        let a = common::random_image(&mut rng, 64, 64);
        // Correlated partner so the structure term is not trivially near 0.
        let b = GrayImage::from_fn(64, 64, |r, c| a.get(r, c).saturating_add(rng.random_range(0..60)));
        assert!((ssim(&a, &b).unwrap() - common::ssim_oracle(&a, &b)).abs() < 1e-6);
    }
    assert!(matches!(ssim(&GrayImage::new(10, 10), &GrayImage::new(10, 10)), Err(Error::TooSmall(_))));
}

/// Two-level 16x16 images whose joint histogram is fixed by construction:
/// balanced marginals and `flips` disagreements per level.
fn two_level_pair(flips: usize, seed: u64) -> (GrayImage, GrayImage) {
    let mut cells: Vec<(u8, u8)> = Vec::with_capacity(256);
    for (v, other) in [(0u8, 255u8), (255, 0)] {
        for i in 0..128 {
            cells.push((v, if i < flips { other } else { v }));
        }
    }
    cells.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let a = GrayImage::from_fn(16, 16, |r, c| cells[r * 16 + c].0);
    let b = GrayImage::from_fn(16, 16, |r, c| cells[r * 16 + c].1);
    (a, b)
}

#[test]
fn rmi_radius_zero_tracks_histogram_mi() {
    let (a, b) = two_level_pair(45, 32);
    let got = rmi(&a, &b, 0, 1e-8).unwrap();
    let want = common::histogram_mi(&a, &b);
    assert!((got - want).abs() / want < 0.05, "rmi {got} vs histogram {want}");
}

#[test]
fn rmi_degenerate_and_ordering() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let noise = common::random_image(&mut rng, 32, 32);
    assert!(rmi_default(&GrayImage::filled(32, 32, 90), &noise).unwrap() <= 1e-6);
    let a = common::random_image(&mut rng, 24, 24);
    let self_info = rmi(&a, &a, 1, 1e-8).unwrap();
    for _ in 0..5 {
        let b = common::random_image(&mut rng, 24, 24);
        assert!(self_info >= rmi(&a, &b, 1, 1e-8).unwrap());
    }
}

fn write_manifest(dir: &std::path::Path, gts: &[GrayImage]) -> PairManifest {
    std::fs::create_dir_all(dir.join("gt")).unwrap();
    let mut m = PairManifest::new(BevGridSpec::new(gts[0].width(), 50.0).unwrap());
    for (i, g) in gts.iter().enumerate() {
        std::fs::write(dir.join(format!("gt/{i}.pgm")), pgm::encode(g)).unwrap();
        m.records.push(PairRecord {
            radar_path: format!("radar/{i}.pgm"),
            gt_path: format!("gt/{i}.pgm"),
            timestamp_ns: i as i64,
            pose: Pose::identity(i as i64),
            split: if i < 3 { Split::Train } else { Split::Test },
            gt_empty: false,
        });
    }
    m
}

#[test]
fn evaluation_is_arithmetic_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let dir = tempfile::tempdir().unwrap();
    let gts: Vec<GrayImage> = (0..5).map(|_| common::random_image(&mut rng, 32, 32)).collect();
    let m = write_manifest(dir.path(), &gts);
    let cand_dir = dir.path().join("cand");
    std::fs::create_dir_all(&cand_dir).unwrap();
    let mut cands = Vec::new();
    for (i, g) in gts.iter().enumerate() {
        let c = GrayImage::from_fn(32, 32, |r, col| g.get(r, col).saturating_sub(rng.random_range(0..80)));
        std::fs::write(cand_dir.join(format!("{i}.pgm")), pgm::encode(&c)).unwrap();
        cands.push(c);
    }
    let ev = evaluate_pairs(&m, dir.path(), &cand_dir, None).unwrap();
    let n = 5.0;
    let want_psnr: f64 = gts.iter().zip(&cands).map(|(g, c)| common::psnr_oracle(c, g)).sum::<f64>() / n;
    let want_ssim: f64 = gts.iter().zip(&cands).map(|(g, c)| common::ssim_oracle(c, g)).sum::<f64>() / n;
    let want_rmi: f64 = gts.iter().zip(&cands).map(|(g, c)| rmi_default(c, g).unwrap()).sum::<f64>() / n;
    assert!((ev.report.psnr_db - want_psnr).abs() < 1e-9);
    assert!((ev.report.ssim - want_ssim).abs() < 1e-6);
    assert!((ev.report.rmi - want_rmi).abs() < 1e-12);
    assert_eq!(ev.report.n_images, 5);

    let test_only = evaluate_pairs(&m, dir.path(), &cand_dir, Some(Split::Test)).unwrap();
    assert_eq!(test_only.report.n_images, 2);
}

#[test]
fn ground_truth_as_candidate() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let dir = tempfile::tempdir().unwrap();
    let gts: Vec<GrayImage> = (0..4).map(|_| common::random_image(&mut rng, 24, 24)).collect();
    let m = write_manifest(dir.path(), &gts);
    let ev = evaluate_pairs(&m, dir.path(), &dir.path().join("gt"), None).unwrap();
    assert!((ev.report.ssim - 1.0).abs() < 1e-12);
    assert_eq!(ev.report.psnr_infinite, 4);
    assert!(ev.report.psnr_db.is_infinite());
    let json = serde_json::to_string(&ev.report).unwrap();
    assert!(json.contains("\"psnr_db\":\"inf\""));
    let back: MetricReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, ev.report);
    assert!(format_table(&[("Ground Truth", &ev.report)]).contains("Ground Truth"));
}

#[test]
fn missing_candidates_are_listed() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(dir.path(), &[GrayImage::new(16, 16), GrayImage::new(16, 16)]);
    let empty = dir.path().join("none");
    std::fs::create_dir_all(&empty).unwrap();
    match evaluate_pairs(&m, dir.path(), &empty, None) {
        Err(Error::MissingCandidates(list)) => assert_eq!(list.len(), 2),
        other => panic!("unexpected {other:?}"),
    }
}
