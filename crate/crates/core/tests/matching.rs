use corefair::harness::generators::{k22, random_matching};
use corefair::matching::{augmentation_weights, enumerate_augmentations, local_search_matching, MatchSearchConfig};
use corefair::objective::{smooth_nash, SmoothNashParams};
use corefair::{ConstraintSpec, IntegralOutcome};

#[test]
fn augmentations_keep_matchings_valid() {
    for seed in 0..60u64 {
        let inst = random_matching(None, None, None, seed).unwrap();
        let ConstraintSpec::Matching { vertices, edges } = inst.constraint() else { unreachable!() };
        let report = local_search_matching(&inst, 1.0).unwrap();
        let current = report.integral().clone();
        for aug in enumerate_augmentations(*vertices, edges, &current, 3) {
            assert!(aug.edges.len() <= 3 && !aug.edges.is_empty());
            assert!(aug.edges.iter().all(|e| !current.contains(*e)));
            assert!(inst.is_feasible(&aug.apply(&current)), "seed {seed}: {aug:?}");
        }
    }
}

#[test]
fn local_search_stops_below_threshold() {
    for seed in 0..60u64 {
        let inst = random_matching(None, None, None, seed).unwrap();
        let ConstraintSpec::Matching { vertices, edges } = inst.constraint() else { unreachable!() };
        let config = MatchSearchConfig::new(1.0, inst.n_agents(), *vertices, inst.n_elements()).unwrap();
        let report = local_search_matching(&inst, 1.0).unwrap();
        let out = report.integral().clone();
        assert!(inst.is_feasible(&out));
        let params = SmoothNashParams::new(config.ell).unwrap();
        let base = smooth_nash(&inst, &out, &params).unwrap();
        let threshold = report.diagnostics.threshold.unwrap();
        for aug in enumerate_augmentations(*vertices, edges, &out, config.kappa) {
            let gain = smooth_nash(&inst, &aug.apply(&out), &params).unwrap() - base;
            assert!(gain < threshold + 1e-12, "seed {seed}: improving augmentation left");
        }
        assert!(report.objective_trace.windows(2).all(|w| w[1] > w[0]));
    }
}

#[test]
fn weights_follow_the_gradient() {
    let inst = k22();
    let current = IntegralOutcome::new([0]);
    let (w, w_prime) = augmentation_weights(&inst, &current, 2);
    assert_eq!(w.len(), 4);
    for j in 0..4 {
        assert!(w_prime[j] <= w[j] + 1e-12);
    }
}

#[test]
fn delta_must_be_positive() {
    assert!(local_search_matching(&k22(), 0.0).is_err());
    assert!(local_search_matching(&k22(), -1.0).is_err());
}
