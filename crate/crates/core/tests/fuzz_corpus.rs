//! Replays the fuzz corpus seeds through the parsers and their round-trip
//! invariants.

use std::fs;
use std::path::PathBuf;

use avgmdp::schedule::{NormalizationFn, Schedule};
use avgmdp::trace_io::{parse_iterates_csv, parse_metrics_csv, write_metrics_csv};
use avgmdp::{Mdp, MdpFile};

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<(PathBuf, String)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            let text = fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty());
    out
}

#[test]
fn mdp_json_seeds() {
    let mut valid = 0;
    for (path, text) in seeds("mdp_json") {
        if let Ok(file) = MdpFile::from_json(&text) {
            let _ = file.validate();
        }
        if let Ok(m) = Mdp::from_json(&text) {
            valid += 1;
            let again = Mdp::from_json(&m.to_file().to_json()).unwrap();
            assert_eq!(again, m, "{}", path.display());
        }
    }
    assert!(valid >= 2);
}

#[test]
fn spec_string_seeds() {
    let mut parsed = 0;
    for (_, text) in seeds("spec_strings") {
        if let Ok(s) = Schedule::from_spec(&text) {
            parsed += 1;
            assert_eq!(Schedule::from_spec(&s.to_string()).unwrap(), s);
        }
        if let Ok(f) = NormalizationFn::from_spec(&text) {
            parsed += 1;
            assert_eq!(NormalizationFn::from_spec(&f.to_string()).unwrap(), f);
        }
        if let Ok(s) = Schedule::from_values_text(&text) {
            s.validate().unwrap();
        }
    }
    assert!(parsed >= 9);
}

#[test]
fn trace_csv_seeds() {
    let mut parsed = 0;
    for (_, text) in seeds("trace_csv") {
        if let Ok(rows) = parse_metrics_csv(&text) {
            parsed += 1;
            let written = write_metrics_csv(&rows);
            let again = parse_metrics_csv(&written).unwrap();
            assert_eq!(write_metrics_csv(&again), written);
        }
        if let Ok(iterates) = parse_iterates_csv(&text) {
            parsed += 1;
            let n = iterates[0].len();
            assert!(iterates.iter().all(|v| v.len() == n));
        }
    }
    assert_eq!(parsed, 3);
}

proptest::proptest! {
    #[test]
    fn parsers_never_panic(text in "\\PC{0,200}") {
        let _ = Mdp::from_json(&text);
        let _ = parse_metrics_csv(&text);
        let _ = parse_iterates_csv(&text);
        let _ = NormalizationFn::from_spec(&text);
        let _ = Schedule::from_values_text(&text);
        if !text.starts_with("file:") {
            let _ = Schedule::from_spec(&text);
        }
    }

    #[test]
    fn csv_like_inputs_never_panic(
        cells in proptest::collection::vec("(|-?[0-9]{1,3}(\\.[0-9]{1,3})?(e-?[0-9])?|x|NaN|inf)", 0..30),
    ) {
        let header = "k,lambda,f_value,bellman_sup_err,bellman_span,normalized_err,policy_err,upper_bound,lower_bound";
        let body: Vec<String> = cells.chunks(9).map(|c| c.join(",")).collect();
        let text = format!("{header}\n{}\n", body.join("\n"));
        let _ = parse_metrics_csv(&text);
        let text = format!("k,v_0,v_1\n{}\n", body.join("\n"));
        let _ = parse_iterates_csv(&text);
    }
}
