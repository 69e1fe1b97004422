//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! `LOOPFORGE_ACCEPTANCE=1,3,7` restricts the run to the listed criteria.

use loopforge::checks::run_selected;

#[test]
fn acceptance() {
    let only: Vec<u32> = std::env::var("LOOPFORGE_ACCEPTANCE")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect())
        .unwrap_or_default();
    let outcomes = run_selected(&only);
    println!();
    for o in &outcomes {
        println!("{}", o.line());
        for f in o.failures.iter().take(5) {
            println!("    {f}");
        }
    }
    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
