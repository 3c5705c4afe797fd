mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use radar_gt::geometry::{compose, inverse, pose_to_matrix, AffineMatrix, Pose};
use radar_gt::pointcloud::{
    accumulate_map, crop_box, voxel_filter, CropSpec, Point, PointCloud, VoxelSpec, MAP_FRAME,
};

#[test]
fn compose_matches_naive_matmul() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let a = pose_to_matrix(&common::random_pose(&mut rng, 0)).unwrap();
        let b = pose_to_matrix(&common::random_pose(&mut rng, 0)).unwrap();
        let want = common::matmul(a.rows(), b.rows());
        let got = compose(&a, &b);
        for i in 0..4 {
            for j in 0..4 {
                assert!((got.rows()[i][j] - want[i][j]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn compose_identity_and_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let m = pose_to_matrix(&common::random_pose(&mut rng, 0)).unwrap();
    assert_eq!(compose(&AffineMatrix::IDENTITY, &m), m);
    assert!(compose(&m, &inverse(&m)).max_abs_diff(&AffineMatrix::IDENTITY) < 1e-9);
    assert_eq!(inverse(&AffineMatrix::IDENTITY), AffineMatrix::IDENTITY);
    let t = AffineMatrix::translation_only([5.0, 0.0, 0.0]);
    assert_eq!(inverse(&t).translation(), [-5.0, 0.0, 0.0]);
}

#[test]
fn inverse_round_trips_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let m = pose_to_matrix(&common::random_pose(&mut rng, 0)).unwrap();
        let p = [rng.random_range(-100.0..100.0), rng.random_range(-100.0..100.0), rng.random_range(-10.0..10.0)];
        let back = common::apply(&inverse(&m), common::apply(&m, p));
        for k in 0..3 {
            assert!((back[k] - p[k]).abs() < 1e-9);
        }
    }
}

#[test]
fn pose_matrix_special_cases() {
    assert_eq!(pose_to_matrix(&Pose::identity(0)).unwrap(), AffineMatrix::IDENTITY);
    let m = pose_to_matrix(&Pose::new(0, [1.0, 2.0, 3.0], [0.0; 3])).unwrap();
    assert_eq!(m.rotation(), AffineMatrix::IDENTITY.rotation());
    assert_eq!(m.translation(), [1.0, 2.0, 3.0]);
}

#[test]
fn voxel_filter_hand_placed_points() {
    // Five points, two voxels at leaf 0.8.
    let pts = vec![
        Point::new(0.1, 0.1, 0.1, 0.2),
        Point::new(0.5, 0.7, 0.3, 0.4),
        Point::new(0.79, 0.0, 0.0, 0.6),
        Point::new(0.9, 0.1, 0.1, 1.0),
        Point::new(1.5, 0.5, 0.7, 0.0),
    ];
    let cloud = PointCloud::new("lidar", pts.clone()).unwrap();
    let out = voxel_filter(&cloud, &VoxelSpec::cube(0.8).unwrap());
    assert_eq!(out.len(), 2);
    common::voxel_matches(&out, &pts, [0.8; 3], 1e-12).unwrap();
    let first = out.points()[0];
    assert!((first.x - (0.1 + 0.5 + 0.79) / 3.0).abs() < 1e-12);
    assert!((first.intensity - 0.4).abs() < 1e-12);
}

#[test]
fn voxel_filter_singleton_and_occupancy() {
    let p = Point::new(3.3, -1.2, 0.4, 0.9);
    let cloud = PointCloud::new("lidar", vec![p]).unwrap();
    assert_eq!(voxel_filter(&cloud, &VoxelSpec::default()).points(), &[p]);

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let spec = VoxelSpec::default();
    let out = voxel_filter(&common::random_cloud(&mut rng, "lidar", 3000, 5.0), &spec);
    let mut seen = std::collections::HashSet::new();
    for q in out.points() {
        assert!(seen.insert(spec.voxel_index(q)), "voxel occupied twice");
    }
}

#[test]
fn voxel_filter_matches_binning_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..30 {
        let n = rng.random_range(1..800);
        let leaf = [rng.random_range(0.2..2.0), rng.random_range(0.2..2.0), rng.random_range(0.2..2.0)];
        let cloud = common::random_cloud(&mut rng, "lidar", n, 10.0);
        let out = voxel_filter(&cloud, &VoxelSpec::new(leaf[0], leaf[1], leaf[2]).unwrap());
        common::voxel_matches(&out, cloud.points(), leaf, 1e-9).unwrap();
    }
}

#[test]
fn accumulate_identity_and_translation() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let scan = common::random_cloud(&mut rng, "lidar", 300, 4.0);
    let spec = VoxelSpec::default();
    let map = accumulate_map(&[(scan.clone(), Pose::identity(0))], &spec).unwrap();
    assert_eq!(map.frame_id(), MAP_FRAME);
    assert_eq!(map.points(), voxel_filter(&scan, &spec).points());

    let one = |x| PointCloud::new("lidar", vec![Point::new(x, 0.2, 0.2, 0.5)]).unwrap();
    let map = accumulate_map(
        &[(one(0.0), Pose::identity(0)), (one(0.0), Pose::new(1, [10.0, 0.0, 0.0], [0.0; 3]))],
        &spec,
    )
    .unwrap();
    assert_eq!(map.points(), &[Point::new(0.0, 0.2, 0.2, 0.5), Point::new(10.0, 0.2, 0.2, 0.5)]);
}

#[test]
fn accumulate_matches_per_point_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let spec = VoxelSpec::default();
    let scans: Vec<(PointCloud, Pose)> = (0..10)
        .map(|i| (common::random_cloud(&mut rng, "lidar", 200, 6.0), common::random_pose(&mut rng, i)))
        .collect();
    let map = accumulate_map(&scans, &spec).unwrap();
    let mut want = Vec::new();
    for (scan, pose) in &scans {
        let m = pose_to_matrix(pose).unwrap();
        for p in voxel_filter(scan, &spec).points() {
            want.push((common::apply(&m, p.xyz()), p.intensity));
        }
    }
    assert_eq!(map.len(), want.len());
    for (got, (xyz, i)) in map.points().iter().zip(want) {
        for k in 0..3 {
            assert!((got.xyz()[k] - xyz[k]).abs() < 1e-9);
        }
        assert_eq!(got.intensity, i);
    }
}

#[test]
fn accumulate_rejects_mixed_frames() {
    let a = PointCloud::empty("lidar");
    let b = PointCloud::empty("other");
    assert!(accumulate_map(&[(a, Pose::identity(0)), (b, Pose::identity(1))], &VoxelSpec::default()).is_err());
    assert!(accumulate_map(&[], &VoxelSpec::default()).is_err());
}

#[test]
fn crop_boundaries() {
    let c = [3.0, -2.0, 0.0];
    let at = |dx: f64| Point::new(c[0] + dx, c[1], 0.0, 0.5);
    let spec = CropSpec::around(c);
    assert!(spec.contains(&at(0.0)));
    assert!(!spec.contains(&at(100.1)));
    assert!(!spec.contains(&at(-100.1)));
    assert!(spec.contains(&at(100.0)));
    assert!(!spec.contains(&at(-100.0)));
}

#[test]
fn crop_matches_predicate_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let map = common::random_cloud(&mut rng, MAP_FRAME, 5000, 150.0);
    let center = [rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0), 0.0];
    let spec = CropSpec::new(center, 60.0, 90.0).unwrap();
    let want: Vec<Point> = map
        .points()
        .iter()
        .copied()
        .filter(|p| {
            p.x > center[0] - 60.0 && p.x <= center[0] + 60.0 && p.y > center[1] - 90.0 && p.y <= center[1] + 90.0
        })
        .collect();
    assert_eq!(crop_box(&map, &spec).points(), want.as_slice());
}
