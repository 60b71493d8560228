//! The full acceptance matrix at its pinned resolution. Prints one line per
//! criterion, then fails if any criterion failed.

use capflow::acceptance::{acceptance_suite, AcceptanceOptions};

#[test]
fn acceptance() {
    let rows = acceptance_suite(AcceptanceOptions::default());
    for row in &rows {
        println!("{}", row.line());
    }
    assert_eq!(rows.len(), 8);
    let failed: Vec<u8> = rows.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert!(failed.is_empty(), "criteria failed: {failed:?}");
}

/// Doubling the polar spacing recomputes the order estimates; they must
/// still come out second order.
#[test]
fn order_rows_survive_degraded_resolution() {
    use capflow::acceptance::{minkowski, static_caps, unit_cap_af};
    let opts = AcceptanceOptions::default().degraded();
    assert_eq!(opts.m_beta, 199);
    for row in [static_caps(opts), minkowski(opts)] {
        println!("{}", row.line());
        assert!(row.passed, "{}", row.detail);
    }
    let (_, order) = unit_cap_af(opts).unwrap();
    assert!((order - 2.0).abs() <= 0.3, "{order}");
}
