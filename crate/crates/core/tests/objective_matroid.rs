use corefair::harness::generators::random_matroid;
use corefair::matroid::{exchange_bijection, local_search_matroid, MatroidOracle};
use corefair::objective::{delta_swap, smooth_nash, SmoothNashParams};
use corefair::instance::{enumerate_outcomes, OutcomeSpace};
use corefair::{ConstraintSpec, Instance, IntegralOutcome};
use proptest::prelude::*;

fn bases(inst: &Instance<f64>) -> Vec<IntegralOutcome> {
    enumerate_outcomes(inst, OutcomeSpace::Feasible, 1 << 16).unwrap()
}

#[test]
fn swap_delta_matches_recomputation() {
    for seed in 0..60u64 {
        let inst = random_matroid(None, None, None, seed).unwrap();
        let oracle = MatroidOracle::from_instance(&inst).unwrap();
        let params = SmoothNashParams::new(1.0).unwrap();
        for basis in bases(&inst).iter().take(5) {
            let before = smooth_nash(&inst, basis, &params).unwrap();
            for &out in basis.elements() {
                for add in (0..inst.n_elements()).filter(|j| !basis.contains(*j)) {
                    let next = basis.swapped(out, add);
                    let fast = delta_swap(&inst, basis, out, add, &params).unwrap();
                    let slow = smooth_nash(&inst, &next, &params).unwrap() - before;
                    assert!((fast - slow).abs() < 1e-9, "seed {seed}: {fast} vs {slow}");
                    assert_eq!(oracle.swap_keeps_basis(basis.elements(), out, add), oracle.is_basis(next.elements()));
                }
            }
        }
    }
}

#[test]
fn exchange_bijection_between_all_basis_pairs() {
    for seed in 0..40u64 {
        let inst = random_matroid(None, None, None, seed).unwrap();
        let oracle = MatroidOracle::from_instance(&inst).unwrap();
        let all = bases(&inst);
        for a in all.iter().take(6) {
            for b in all.iter().rev().take(6) {
                let pairs = exchange_bijection(&oracle, a.elements(), b.elements()).unwrap();
                assert_eq!(pairs.len(), a.len());
                let mut images: Vec<usize> = pairs.iter().map(|p| p.1).collect();
                images.sort_unstable();
                assert_eq!(images, b.elements());
                for &(j, fj) in &pairs {
                    let set = if j == fj { a.clone() } else { a.swapped(j, fj) };
                    assert!(oracle.is_basis(set.elements()), "seed {seed}: {j} -> {fj}");
                    if b.contains(j) {
                        assert_eq!(j, fj);
                    }
                }
            }
        }
    }
}

#[test]
fn local_search_output_is_a_local_optimum() {
    for seed in 0..50u64 {
        let inst = random_matroid(None, None, None, seed).unwrap();
        let oracle = MatroidOracle::from_instance(&inst).unwrap();
        let report = local_search_matroid(&inst, &oracle, 0.1).unwrap();
        let out = report.integral();
        assert!(oracle.is_basis(out.elements()));
        let trace = &report.objective_trace;
        assert!(trace.windows(2).all(|w| w[1] > w[0]), "objective must increase");
        let params = SmoothNashParams::new(1.0).unwrap();
        let threshold = report.diagnostics.threshold.unwrap();
        for &j in out.elements() {
            for add in (0..inst.n_elements()).filter(|a| !out.contains(*a)) {
                if oracle.swap_keeps_basis(out.elements(), j, add) {
                    assert!(delta_swap(&inst, out, j, add, &params).unwrap() < threshold + 1e-12);
                }
            }
        }
    }
}

#[test]
fn bad_parameters_are_rejected() {
    let inst = Instance::new(vec![vec![1.0, 0.0]], ConstraintSpec::UniformMatroid { rank: 1 }).unwrap();
    let oracle = MatroidOracle::from_instance(&inst).unwrap();
    assert!(local_search_matroid(&inst, &oracle, 0.0).is_err());
    assert!(local_search_matroid(&inst, &oracle, f64::NAN).is_err());
    assert!(SmoothNashParams::new(-1.0f64).is_err());
    let matching = Instance::new(vec![vec![1.0]], ConstraintSpec::Matching { vertices: 2, edges: vec![(0, 1)] }).unwrap();
    assert!(MatroidOracle::from_instance(&matching).is_err());
}

proptest! {
    #[test]
    fn uniform_swaps_agree(utils in prop::collection::vec(prop::collection::vec(0.0f64..5.0, 6), 1..5), ell in 0.1f64..3.0) {
        let inst = Instance::new(utils, ConstraintSpec::UniformMatroid { rank: 3 }).unwrap();
        let params = SmoothNashParams::new(ell).unwrap();
        let basis = IntegralOutcome::new([0, 2, 4]);
        let base = smooth_nash(&inst, &basis, &params).unwrap();
        for out in [0, 2, 4] {
            for add in [1, 3, 5] {
                let fast = delta_swap(&inst, &basis, out, add, &params).unwrap();
                let slow = smooth_nash(&inst, &basis.swapped(out, add), &params).unwrap() - base;
                prop_assert!((fast - slow).abs() < 1e-9);
            }
        }
    }
}
