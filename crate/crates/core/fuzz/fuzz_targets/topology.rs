#![no_main]
use advres::netgraph::parse_topology;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(net) = parse_topology(s) {
            // Canonical output must parse back to the same network.
            let text = net.to_topology_string();
            let again = parse_topology(&text).expect("canonical form reparses");
            assert_eq!(again.to_topology_string(), text);
        }
    }
});
