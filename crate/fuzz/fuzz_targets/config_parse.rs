#![no_main]

use libfuzzer_sys::fuzz_target;
use sqglab::io::ExperimentSpec;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        // A base directory that does not exist: custom tables must fail cleanly.
        let base = std::path::Path::new("/nonexistent/sqglab-fuzz");
        if let Ok(spec) = ExperimentSpec::parse(text, base) {
            let echo = spec.to_text();
            let back = ExperimentSpec::parse(&echo, base).expect("config echo parses");
            assert_eq!(echo, back.to_text());
        }
    }
});
