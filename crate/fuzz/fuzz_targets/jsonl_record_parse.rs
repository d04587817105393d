#![no_main]

use libfuzzer_sys::fuzz_target;
use sqglab::io::Record;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        for line in text.lines() {
            if let Ok(rec) = Record::parse_line(line) {
                let out = rec.to_json_line();
                let back = Record::parse_line(&out).expect("record echo parses");
                assert_eq!(out, back.to_json_line());
            }
        }
    }
});
