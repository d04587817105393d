#![no_main]

use libfuzzer_sys::fuzz_target;
use sqglab::io::{decode_snapshot, encode_snapshot};

fuzz_target!(|data: &[u8]| {
    if let Ok((header, theta)) = decode_snapshot(data) {
        // Whatever decodes must survive a re-encode bit for bit.
        let bytes = encode_snapshot(&header, &theta).expect("decoded snapshot re-encodes");
        let (h2, t2) = decode_snapshot(&bytes).expect("re-encoded snapshot decodes");
        assert_eq!(header.n, h2.n);
        assert_eq!(header.time.to_bits(), h2.time.to_bits());
        assert!(theta.values().iter().zip(t2.values()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
});
