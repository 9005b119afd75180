use contract_demo::native::{capped_demand_curve, cost_sweep, solve_random};

#[test]
fn solve_reports_exact_for_small_instances() {
    let v = solve_random(5, 2, "xos", "low", 7).unwrap();
    assert_eq!(v.allocation.len(), 5);
    let exact = v.exact_revenue.unwrap();
    assert!(v.total_revenue >= 0.0 && v.total_revenue <= exact + 1e-9);
    assert!(solve_random(12, 1, "additive", "zero", 1).unwrap().exact_revenue.is_none());
}

#[test]
fn bad_names_are_reported() {
    assert!(solve_random(3, 1, "cubic", "low", 0).unwrap_err().contains("cubic"));
    assert!(solve_random(3, 1, "xos", "free", 0).is_err());
}

#[test]
fn sweep_starts_at_zero_cost() {
    let pts = cost_sweep(4, 2, "coverage", 3, 5, 2.0).unwrap();
    assert_eq!(pts.len(), 5);
    assert_eq!(pts[0].factor, 0.0);
    assert_eq!(pts[4].factor, 2.0);
    // Revenue can only fall as every cost grows.
    for w in pts.windows(2) {
        assert!(w[1].exact <= w[0].exact + 1e-12);
    }
    assert!(cost_sweep(10, 1, "xos", 0, 3, 1.0).is_err());
}

#[test]
fn curve_stays_above_bound() {
    let pts = capped_demand_curve(12, 5, 0.25, 0.3, 8).unwrap();
    assert_eq!(pts.len(), 8);
    for p in pts {
        assert!(p.approx >= p.bound - 1e-9);
        assert!(p.approx <= p.exact + 1e-9);
    }
}
