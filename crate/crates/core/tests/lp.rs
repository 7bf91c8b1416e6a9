use corefair::fractional::{fractional_agent_optimum, solve_lp, LinearProgram, RowKind, Sense};
use corefair::{ConstraintSpec, CoreError, Instance};
use proptest::prelude::*;

/// Greedy optimum of a fractional knapsack with unit upper bounds.
fn greedy_knapsack(values: &[f64], sizes: &[f64], capacity: f64) -> f64 {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| (values[b] / sizes[b]).total_cmp(&(values[a] / sizes[a])));
    let (mut room, mut total) = (capacity, 0.0);
    for j in order {
        let take = (room / sizes[j]).min(1.0);
        if take <= 0.0 {
            break;
        }
        total += take * values[j];
        room -= take * sizes[j];
    }
    total
}

/// Best vertex of a two-variable program with `x >= 0` and rows `a x <= b`.
fn vertex_optimum(c: [f64; 2], rows: &[([f64; 2], f64)]) -> f64 {
    let mut lines: Vec<([f64; 2], f64)> = rows.to_vec();
    lines.push(([1.0, 0.0], 0.0));
    lines.push(([0.0, 1.0], 0.0));
    let feasible = |x: [f64; 2]| x[0] >= -1e-9 && x[1] >= -1e-9 && rows.iter().all(|(a, b)| a[0] * x[0] + a[1] * x[1] <= b + 1e-9);
    let mut best = f64::NEG_INFINITY;
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let ((a, p), (b, q)) = (lines[i], lines[j]);
            let det = a[0] * b[1] - a[1] * b[0];
            if det.abs() < 1e-12 {
                continue;
            }
            let x = [(p * b[1] - a[1] * q) / det, (a[0] * q - p * b[0]) / det];
            if feasible(x) {
                best = best.max(c[0] * x[0] + c[1] * x[1]);
            }
        }
    }
    best
}

proptest! {
    #[test]
    fn knapsack_lp_matches_greedy(
        items in prop::collection::vec((0.0f64..5.0, 0.1f64..1.0), 1..8),
        capacity in 0.2f64..4.0,
    ) {
        let (values, sizes): (Vec<f64>, Vec<f64>) = items.into_iter().unzip();
        let inst = Instance::new(vec![values.clone()], ConstraintSpec::Packing { a: vec![sizes.clone()], b: vec![capacity] }).unwrap();
        let lp = fractional_agent_optimum(&inst, 0).unwrap();
        prop_assert!((lp - greedy_knapsack(&values, &sizes, capacity)).abs() < 1e-7);
    }

    #[test]
    fn two_variable_lp_matches_vertices(
        c in (0.0f64..3.0, 0.0f64..3.0),
        rows in prop::collection::vec(((0.05f64..2.0, 0.05f64..2.0), 0.1f64..5.0), 1..5),
    ) {
        let c = [c.0, c.1];
        let rows: Vec<([f64; 2], f64)> = rows.into_iter().map(|((a, b), r)| ([a, b], r)).collect();
        let mut lp = LinearProgram::new(Sense::Maximize, c.to_vec());
        for (a, b) in &rows {
            lp.add_row(a.to_vec(), RowKind::Le, *b);
        }
        let sol = solve_lp(&lp).unwrap();
        prop_assert!((sol.value - vertex_optimum(c, &rows)).abs() < 1e-7);
        prop_assert!((lp.evaluate(&sol.x) - sol.value).abs() < 1e-9);
    }
}

#[test]
fn infeasible_and_unbounded_programs_are_reported() {
    let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0f64, 0.0]);
    lp.add_row(vec![1.0, 1.0], RowKind::Le, 1.0).add_row(vec![1.0, 1.0], RowKind::Ge, 2.0);
    assert_eq!(solve_lp(&lp).unwrap_err(), CoreError::LpInfeasible);
    let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0f64, 1.0]);
    lp.add_row(vec![1.0, -1.0], RowKind::Le, 1.0);
    assert_eq!(solve_lp(&lp).unwrap_err(), CoreError::LpUnbounded);
}

#[test]
fn equality_rows_and_bounds() {
    let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0f64, 2.0, 3.0]);
    lp.add_row(vec![1.0, 1.0, 1.0], RowKind::Eq, 2.0).set_bounds(0, 0.0, Some(0.5));
    let sol = solve_lp(&lp).unwrap();
    assert!((sol.value - 3.5).abs() < 1e-9);
    assert!((sol.x[0] - 0.5).abs() < 1e-9 && (sol.x[1] - 1.5).abs() < 1e-9);
}
