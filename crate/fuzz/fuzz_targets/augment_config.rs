//! Augmentation configs from JSON, applied to a small fixed pair.
#![no_main]
use libfuzzer_sys::fuzz_target;
use radar_gt::augment::{augment_pair, AugmentConfig};
use radar_gt::image::GrayImage;

fuzz_target!(|data: &[u8]| {
    let Ok(cfg) = serde_json::from_slice::<AugmentConfig>(data) else { return };
    if cfg.validate().is_err() {
        return;
    }
    let a = GrayImage::from_fn(16, 12, |r, c| (r * 16 + c) as u8);
    let pair = augment_pair(&a, &a, &cfg, 0).expect("validated config augments");
    assert_eq!((pair.input.width(), pair.input.height()), (16, 12));
});
