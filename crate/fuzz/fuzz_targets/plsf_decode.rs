#![no_main]

use libfuzzer_sys::fuzz_target;
use paleyscope_core::spectral::plsf;

fuzz_target!(|data: &[u8]| {
    if let Ok(field) = plsf::decode(data) {
        // anything that decodes must survive a second trip unchanged
        let bytes = plsf::encode(&field);
        let again = plsf::decode(&bytes).expect("re-encoded field decodes");
        assert_eq!(plsf::encode(&again), bytes);
    }
});
