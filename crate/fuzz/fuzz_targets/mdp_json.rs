#![no_main]
use avgmdp::{Mdp, MdpFile};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(file) = MdpFile::from_json(text) {
        let _ = file.validate();
    }
    if let Ok(m) = Mdp::from_json(text) {
        let again = Mdp::from_json(&m.to_file().to_json()).expect("re-parse");
        assert_eq!(again, m);
    }
});
