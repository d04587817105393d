#![no_main]

use libfuzzer_sys::fuzz_target;
use sqglab::io::ExtensionDump;

fuzz_target!(|data: &[u8]| {
    if let Ok(dump) = ExtensionDump::decode(data) {
        let again = ExtensionDump::decode(&dump.encode()).expect("re-encoded dump decodes");
        assert_eq!(dump.layers.len(), again.layers.len());
        assert_eq!(dump.z().len(), dump.layers.len());
    }
});
