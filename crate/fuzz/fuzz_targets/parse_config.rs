//! Fuzzes the flat key-value config parser: must never panic on arbitrary
//! input, and every accepted config must round-trip through the canonical
//! emission with an identical fingerprint.

#![no_main]

use libfuzzer_sys::fuzz_target;
use rdpp_cli::config::{emit_config, fingerprint, parse_config};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(parsed) = parse_config(text) else {
        return;
    };
    let canonical = emit_config(&parsed);
    let reparsed = parse_config(&canonical).expect("canonical emission must parse");
    assert_eq!(parsed, reparsed, "round trip must be lossless");
    assert_eq!(
        fingerprint(&canonical),
        fingerprint(&emit_config(&reparsed)),
        "fingerprint must be reproducible"
    );
});
