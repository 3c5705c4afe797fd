//! Sampling-free BEV rendering of box worlds.

use super::World;
use crate::error::Result;
use crate::geometry::{inverse, pose_to_matrix, AffineMatrix, Pose};
use crate::projection::{intensity_to_gray, BevGridSpec, BevImage};

type P2 = [f64; 2];

fn cross(o: P2, a: P2, b: P2) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain; collinear points dropped, counter-clockwise.
pub(crate) fn convex_hull(mut pts: Vec<P2>) -> Vec<P2> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<P2> = Vec::with_capacity(pts.len() * 2);
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &P2>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

fn project(poly: &[P2], axis: P2) -> (f64, f64) {
    poly.iter()
        .map(|p| p[0] * axis[0] + p[1] * axis[1])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// True when two convex polygons share positive area (touching is not enough).
pub(crate) fn convex_overlap(a: &[P2], b: &[P2]) -> bool {
    for poly in [a, b] {
        for i in 0..poly.len() {
            let p = poly[i];
            let q = poly[(i + 1) % poly.len()];
            let axis = [-(q[1] - p[1]), q[0] - p[0]];
            let (amin, amax) = project(a, axis);
            let (bmin, bmax) = project(b, axis);
            if amax.min(bmax) <= amin.max(bmin) {
                return false;
            }
        }
    }
    true
}

/// Renders `world` as seen from a radar whose frame maps to the world by
/// `radar_to_world`. A pixel takes the reflectivity of the tallest box whose
/// x-y footprint overlaps it with positive area; ties go to higher
/// reflectivity, then to the earlier box.
pub fn analytic_bev_in_frame(world: &World, radar_to_world: &AffineMatrix, grid: &BevGridSpec) -> Result<BevImage> {
    grid.validate()?;
    let to_radar = inverse(radar_to_world);
    let res = grid.resolution();
    let half = grid.half_span();
    let mut best: Vec<Option<(f64, f64)>> = vec![None; grid.width_px * grid.height_px];
    for b in &world.boxes {
        let corners: Vec<[f64; 3]> = b.corners().iter().map(|c| to_radar.transform_point(*c)).collect();
        let top = corners.iter().map(|c| c[2]).fold(f64::NEG_INFINITY, f64::max);
        let hull = convex_hull(corners.iter().map(|c| [c[0], c[1]]).collect());
        if hull.len() < 3 {
            continue;
        }
        let (xmin, xmax) = project(&hull, [1.0, 0.0]);
        let (ymin, ymax) = project(&hull, [0.0, 1.0]);
        let index_range = |lo: f64, hi: f64, n: usize| -> Option<(usize, usize)> {
            // Pixel k spans (half - (k+1) res, half - k res].
            let first = ((half - hi) / res).floor().max(0.0);
            let last = ((half - lo) / res).floor().min(n as f64 - 1.0);
            (first <= last).then_some((first as usize, last as usize))
        };
        let (Some((r0, r1)), Some((c0, c1))) =
            (index_range(xmin, xmax, grid.height_px), index_range(ymin, ymax, grid.width_px))
        else {
            continue;
        };
        for row in r0..=r1 {
            for col in c0..=c1 {
                let (x0, x1, y0, y1) = grid.pixel_footprint(row, col);
                let square = [[x0, y0], [x1, y0], [x1, y1], [x0, y1]];
                if !convex_overlap(&square, &hull) {
                    continue;
                }
                let slot = &mut best[row * grid.width_px + col];
                let wins = match slot {
                    None => true,
                    Some((z, r)) => top > *z || (top == *z && b.reflectivity > *r),
                };
                if wins {
                    *slot = Some((top, b.reflectivity));
                }
            }
        }
    }
    let mut img = grid.blank();
    for (px, v) in img.image.pixels_mut().iter_mut().zip(best) {
        *px = v.map_or(0, |(_, r)| intensity_to_gray(r));
    }
    Ok(img)
}

/// [`analytic_bev_in_frame`] for a radar located at `pose`.
pub fn analytic_bev(world: &World, pose: &Pose, grid: &BevGridSpec) -> Result<BevImage> {
    analytic_bev_in_frame(world, &pose_to_matrix(pose)?, grid)
}
