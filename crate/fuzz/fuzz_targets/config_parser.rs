#![no_main]

use betaprufer_cli::config::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(c) = ExperimentConfig::parse(text) {
        // anything accepted must survive its own echo unchanged
        let again = ExperimentConfig::parse(&c.to_text()).expect("echo parses");
        assert_eq!(again, c);
    }
});
