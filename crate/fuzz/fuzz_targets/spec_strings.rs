#![no_main]
use avgmdp::bounds::Family;
use avgmdp::certify::CertKind;
use avgmdp::generate::RandomKind;
use avgmdp::iterate::Algorithm;
use avgmdp::schedule::{NormalizationFn, Schedule};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // file: specs would read from disk
    if !text.starts_with("file:") {
        if let Ok(s) = Schedule::from_spec(text) {
            assert_eq!(Schedule::from_spec(&s.to_string()).expect("re-parse"), s);
            let _ = s.lambda(1_000);
        }
    }
    if let Ok(s) = Schedule::from_values_text(text) {
        s.validate().expect("parsed schedules are valid");
    }
    if let Ok(f) = NormalizationFn::from_spec(text) {
        assert_eq!(NormalizationFn::from_spec(&f.to_string()).expect("re-parse"), f);
    }
    let _ = text.parse::<Algorithm>();
    let _ = text.parse::<CertKind>();
    let _ = text.parse::<RandomKind>();
    let _ = text.parse::<Family>();
});
