#![no_main]

use betaprufer_cli::manifest::RunManifest;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(m) = RunManifest::from_json(text) {
        let again = RunManifest::from_json(&m.to_json()).expect("re-serialized manifest parses");
        assert_eq!(again.outputs, m.outputs);
        assert_eq!(again.config, m.config);
    }
});
