//! World descriptions, then a cheap render so degenerate boxes that slip
//! through validation show up as panics.
#![no_main]
use libfuzzer_sys::fuzz_target;
use radar_gt::geometry::Pose;
use radar_gt::projection::BevGridSpec;
use radar_gt::synth::{analytic_bev, World};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(world) = World::from_json(text) else { return };
    if world.boxes.len() > 64 {
        return;
    }
    let grid = BevGridSpec::new(32, 200.0).unwrap();
    let _ = analytic_bev(&world, &Pose::identity(0), &grid);
});
