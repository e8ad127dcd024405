#![no_main]
use advres::simcore::parse_trace_records;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(records) = parse_trace_records(s) {
            assert!(records.iter().all(|r| r.size_bits > 0.0 && r.arrival_s >= 0.0));
        }
    }
});
