//! Acceptance suite: runs every criterion at its pinned tolerance and
//! prints one pass/fail line per criterion.

use majscale::repro::run_all;

#[test]
fn acceptance_criteria() {
    let reports = run_all(None);
    assert_eq!(reports.len(), 9, "all nine criteria must report");
    let mut all_ok = true;
    for r in &reports {
        println!("{} {:<24} {}", if r.passed { "PASS" } else { "FAIL" }, r.id, r.detail);
        all_ok &= r.passed;
    }
    assert!(all_ok, "acceptance criteria failed");
}
