use dpsm_core::theory_checks::run_suite;

#[test]
fn every_check_passes() {
    let reports = run_suite(None);
    for r in &reports {
        println!(
            "{:<24} trials={:<8} worst_slack={:+.3e} pass={} {}",
            r.name,
            r.trials,
            r.worst_slack,
            r.pass,
            r.note.as_deref().unwrap_or("")
        );
    }
    assert!(reports.iter().all(|r| r.pass));
}
