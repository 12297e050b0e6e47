//! The fast verification tier on the default seed must come back all green,
//! and its reports must be reproducible from (name, seed, tier).

use pkpart::verify::{exit_status, run_all, run_selected, CheckStatus, Tier};

#[test]
fn fast_tier_all_pass_on_default_seed() {
    let reports = run_all(0, Tier::Fast);
    assert!(reports.len() >= 40, "suite shrank to {}", reports.len());
    for r in &reports {
        assert_eq!(
            r.status,
            CheckStatus::Pass,
            "{}: {:?} ({})",
            r.name,
            r.status,
            r.grid
        );
    }
    assert_eq!(exit_status(&reports), 0);
}

#[test]
fn reports_are_reproducible() {
    let a = run_selected(7, Tier::Fast, Some("mc-crp"));
    let b = run_selected(7, Tier::Fast, Some("mc-crp"));
    assert_eq!(a.len(), b.len());
    assert!(!a.is_empty());
    for (x, y) in a.iter().zip(b.iter()) {
        assert_eq!(x.name, y.name);
        assert_eq!(x.status, y.status);
        assert_eq!(x.max_abs_residual, y.max_abs_residual);
        assert_eq!(x.max_rel_residual, y.max_rel_residual);
    }
}

#[test]
fn filtering_selects_named_checks() {
    let reports = run_selected(0, Tier::Fast, Some("hfiden"));
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0].name, "hfiden");
}
