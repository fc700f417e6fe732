#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // Parsing must never panic; when it succeeds the formula must survive
    // a serialize/parse round trip.
    if let Ok(formula) = illusion_core::cnf::parse_dimacs(text) {
        let again = illusion_core::cnf::serialize_dimacs(&formula);
        let reparsed = illusion_core::cnf::parse_dimacs(&again).expect("round trip parses");
        assert_eq!(reparsed, formula);
        let _ = illusion_core::cnf::is_3cnf(&formula);
        let _ = illusion_core::cnf::is_2p2n(&formula);
    }
});
