#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(plan) = illusion_core::io::parse_edit_plan(text) {
        // Validation and application must reject, not panic, on anything
        // inconsistent with the base network.
        let base = illusion_core::SocialNetwork::new(8);
        if plan.validate(&base).is_ok() {
            let applied = illusion_core::network::apply_edit_plan(&base, &plan).unwrap();
            let back =
                illusion_core::network::apply_edit_plan(&applied, &plan.inverse()).unwrap();
            assert_eq!(back, base);
        }
    }
});
