#![no_main]

use cantor_k::cantor::{parse_growth, OdometerSystem};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(k) = parse_growth(text) {
        assert!(k >= 2);
        if let Ok(sys) = OdometerSystem::new(vec![k], Some(k)) {
            let _ = sys.try_m(8);
        }
    }
});
