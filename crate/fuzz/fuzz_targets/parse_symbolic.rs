#![no_main]

use cantor_k::exact::{GeneratorTable, Rational, SymbolicReal};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let table = GeneratorTable::new();
    table.golden("phi").unwrap();
    table.sqrt("r2", Rational::from_integer(2.into())).unwrap();
    if let Ok(x) = SymbolicReal::parse(text, Some(&table)) {
        // whatever parses prints back to the same value
        let again = SymbolicReal::parse(&x.to_string(), Some(&table)).expect("display output parses");
        assert_eq!(x, again);
    }
});
