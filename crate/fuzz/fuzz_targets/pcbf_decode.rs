//! PCBF point-cloud decoding. Anything that decodes must re-encode to a file
//! that decodes to the same cloud.
#![no_main]
use libfuzzer_sys::fuzz_target;
use radar_gt::pairing::pcbf;

fuzz_target!(|data: &[u8]| {
    let Ok(cloud) = pcbf::decode(data, "lidar") else { return };
    for p in cloud.points() {
        assert!((0.0..=1.0).contains(&p.intensity));
        assert!(p.x.is_finite() && p.y.is_finite() && p.z.is_finite());
    }
    let again = pcbf::decode(&pcbf::encode(&cloud), "lidar").expect("re-encoded cloud decodes");
    assert_eq!(again.len(), cloud.len());
});
