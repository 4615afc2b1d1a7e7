//! Frozen fake-diamond positions of N(7,7) up to degree 100. Set
//! `THINLIE_BLESS=1` to rewrite the file after an intended change.

use thinlie::{detect, nottingham_nqr, DiamondPattern, DiamondType, GUARD};

const GOLDEN: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/n77_pattern.json");

#[test]
fn n77_pattern_matches_golden_file() {
    let alg = nottingham_nqr(7, 7, 7, 100 + 7 + GUARD).unwrap().with_nominal(100).unwrap();
    let got = detect(&alg).unwrap().pattern;
    let text = serde_json::to_string_pretty(&got).unwrap() + "\n";
    if std::env::var_os("THINLIE_BLESS").is_some() {
        std::fs::write(GOLDEN, &text).unwrap();
    }
    let want_text = std::fs::read_to_string(GOLDEN).unwrap();
    let want: DiamondPattern = serde_json::from_str(&want_text).unwrap();
    assert_eq!(got, want);
    assert_eq!(text, want_text, "golden file is not byte-stable");

    let fakes = got.degrees_of(DiamondType::Fake1);
    assert_eq!(fakes, [13, 20, 27, 34, 41, 48, 61, 68, 75, 82, 89, 96]);
    assert!(got.degrees_of(DiamondType::Fake0).is_empty());
}
