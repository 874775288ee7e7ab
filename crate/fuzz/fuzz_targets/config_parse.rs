#![no_main]

use libfuzzer_sys::fuzz_target;
use paleyscope_cli::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = ExperimentConfig::from_json(text) {
        let canonical = config.canonical_json();
        let reparsed = ExperimentConfig::from_json(&canonical).expect("canonical form parses");
        assert_eq!(reparsed.canonical_json(), canonical);
        for sym in config.symbol_configs() {
            let _ = sym.build();
        }
    }
});
