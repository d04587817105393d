#![no_main]

use libfuzzer_sys::fuzz_target;
use sqglab::io::parse_param;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok((key, _)) = parse_param(s) {
            assert!(!key.is_empty());
        }
    }
});
