#![no_main]
use libfuzzer_sys::fuzz_target;
use voigt_core::snapshot;

fuzz_target!(|data: &[u8]| {
    // Accepted snapshots must re-encode to the same field.
    if let Ok(decoded) = snapshot::decode(data) {
        let bytes = match &decoded {
            snapshot::Snapshot::Vector(v) => snapshot::encode_vector(v),
            snapshot::Snapshot::Scalar(s) => snapshot::encode_scalar(s),
        };
        assert_eq!(snapshot::decode(&bytes).unwrap(), decoded);
    }
});
