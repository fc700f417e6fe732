#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(q) = text.parse::<illusion_core::Fraction>() {
        // Display/parse round trip is exact.
        let again: illusion_core::Fraction = q.to_string().parse().expect("round trip");
        assert_eq!(q, again);
    }
});
