//! Fuzzes the 17-significant-digit formatter: parsing the output must
//! reproduce the input double exactly for every finite value.

#![no_main]

use libfuzzer_sys::fuzz_target;
use rdpp_cli::fmt::fmt_f64;

fuzz_target!(|data: [u8; 8]| {
    let v = f64::from_le_bytes(data);
    let s = fmt_f64(v);
    if v.is_finite() {
        let parsed: f64 = s.parse().expect("formatted float must parse");
        assert!(
            parsed == v || (parsed == 0.0 && v == 0.0),
            "{v:?} -> {s} -> {parsed:?}"
        );
    }
});
