#![no_main]
use advres::config::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(c) = ExperimentConfig::from_json(s) {
            let _ = c.validate();
        }
    }
});
