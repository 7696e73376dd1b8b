#![no_main]
use avgmdp::trace_io::{parse_iterates_csv, parse_metrics_csv, write_metrics_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(rows) = parse_metrics_csv(text) {
        let written = write_metrics_csv(&rows);
        let again = parse_metrics_csv(&written).expect("re-parse");
        assert_eq!(write_metrics_csv(&again), written);
    }
    if let Ok(iterates) = parse_iterates_csv(text) {
        let n = iterates[0].len();
        assert!(iterates.iter().all(|v| v.len() == n));
    }
});
