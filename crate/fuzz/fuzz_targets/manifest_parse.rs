#![no_main]
use libfuzzer_sys::fuzz_target;
use radar_gt::pairing::PairManifest;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(m) = PairManifest::parse(text) else { return };
    assert_eq!(PairManifest::parse(&m.to_jsonl()).expect("round trip parses"), m);
});
