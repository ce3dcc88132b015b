#![no_main]

use cantor_k::exact::SupernaturalNumber;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(s) = text.parse::<SupernaturalNumber>() {
        let again: SupernaturalNumber = s.to_string().parse().expect("display output parses");
        assert_eq!(s, again);
    }
});
