#![no_main]

use libfuzzer_sys::fuzz_target;
use sqglab::spectral::MultiplierTable;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(table) = MultiplierTable::parse(text) {
            let back = MultiplierTable::parse(&table.to_text()).expect("table echo parses");
            assert_eq!(table.len(), back.len());
        }
    }
});
