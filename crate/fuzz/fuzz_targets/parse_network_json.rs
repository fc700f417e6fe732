#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(doc) = illusion_core::io::parse_network_json(text) {
        if let Ok(ln) = doc.labelled() {
            let _ = ln.illusion_report();
        } else if let Ok((sn, ml)) = doc.multi_labelled() {
            let _ = illusion_core::plurality::plurality_illusion_report(&sn, &ml);
        }
    }
});
