//! PGM and PNG decoding through the magic-sniffing entry point.
#![no_main]
use libfuzzer_sys::fuzz_target;
use radar_gt::image::{decode_image, pgm};

fuzz_target!(|data: &[u8]| {
    let Ok(img) = decode_image(data) else { return };
    assert_eq!(img.pixels().len(), img.width() * img.height());
    let round = pgm::decode(&pgm::encode(&img)).expect("re-encoded PGM decodes");
    assert_eq!(round, img);
});
