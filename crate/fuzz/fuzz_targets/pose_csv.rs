#![no_main]
use libfuzzer_sys::fuzz_target;
use radar_gt::pairing::poses;

fuzz_target!(|data: &[u8]| {
    let Ok(list) = poses::parse(data) else { return };
    let mut buf = Vec::new();
    poses::write(&mut buf, &list).expect("write to memory");
    assert_eq!(poses::parse(buf.as_slice()).expect("round trip parses"), list);
});
