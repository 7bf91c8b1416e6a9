use corefair::harness::generators::{cyclic_pb, example1, example1_firsts, k22, random_knapsack, random_matroid};
use corefair::instance::{enumerate_outcomes, OutcomeSpace};
use corefair::verifier::{is_pareto_optimal, is_proportional, Deviation, DeviationMode, Verdict, Verifier};
use corefair::{ConstraintSpec, FractionalOutcome, Instance, IntegralOutcome, OptimumMode, SizeCaps};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verifier() -> Verifier {
    Verifier::new(SizeCaps::default())
}

/// Direct evaluation of the blocking condition.
fn blocks(inst: &Instance<f64>, outcome: &IntegralOutcome, coalition: &[usize], dev: &IntegralOutcome, delta: f64, alpha: f64) -> bool {
    let n = inst.n_agents() as f64;
    let slacks: Vec<f64> = coalition
        .iter()
        .map(|&i| {
            let now: f64 = outcome.elements().iter().map(|&j| inst.row(i)[j]).sum();
            let then: f64 = dev.elements().iter().map(|&j| inst.row(i)[j]).sum();
            coalition.len() as f64 / n * then - (1.0 + delta) * now - alpha
        })
        .collect();
    slacks.iter().all(|&s| s >= -1e-9) && slacks.iter().any(|&s| s > 1e-9)
}

fn brute_force_blocked(inst: &Instance<f64>, outcome: &IntegralOutcome, delta: f64, alpha: f64) -> bool {
    let devs = enumerate_outcomes(inst, OutcomeSpace::Deviations { relax_matroid: false }, 1 << 16).unwrap();
    let n = inst.n_agents();
    (1u32..1 << n).any(|mask| {
        let coalition: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        devs.iter().any(|d| blocks(inst, outcome, &coalition, d, delta, alpha))
    })
}

#[test]
fn two_group_instance_is_blocked_by_the_second_group() {
    let inst = example1(4).unwrap();
    let firsts = example1_firsts(4);
    let cert = verifier().find_blocking_coalition(&inst, &firsts, 0.0, 0.9, DeviationMode::Integral).unwrap();
    let w = cert.witness.unwrap();
    assert_eq!(w.coalition, vec![4, 5, 6, 7]);
    assert!(w.slacks.iter().all(|s| (s - 0.1).abs() < 1e-9));
}

#[test]
fn verdicts_agree_with_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seed in 0..80u64 {
        let inst = random_matroid(Some(rng.gen_range(2..=4)), Some(rng.gen_range(3..=6)), None, seed).unwrap();
        let all = enumerate_outcomes(&inst, OutcomeSpace::Feasible, 1 << 16).unwrap();
        let outcome = &all[rng.gen_range(0..all.len())];
        let (delta, alpha) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.5));
        let cert = verifier().find_blocking_coalition(&inst, outcome, delta, alpha, DeviationMode::Integral).unwrap();
        assert_eq!(cert.is_blocked(), brute_force_blocked(&inst, outcome, delta, alpha), "seed {seed}");
        if let Some(w) = cert.witness {
            let Deviation::Integral(dev) = &w.deviation else { panic!("integral witness expected") };
            assert!(inst.is_feasible_deviation(dev, false));
            assert!(blocks(&inst, outcome, &w.coalition, dev, delta, alpha));
            let again = verifier().check_coalition(&inst, outcome, &w.coalition, delta, alpha).unwrap();
            assert!(again.is_blocked());
        }
    }
}

#[test]
fn blocking_is_monotone_in_alpha() {
    for seed in 0..30u64 {
        let inst = random_matroid(Some(4), Some(6), None, seed).unwrap();
        let all = enumerate_outcomes(&inst, OutcomeSpace::Feasible, 1 << 16).unwrap();
        let outcome = &all[0];
        let deficit = verifier().core_deficit(&inst, outcome, 0.0).unwrap();
        assert!(deficit >= 0.0);
        let above = verifier().find_blocking_coalition(&inst, outcome, 0.0, deficit + 1e-6, DeviationMode::Integral).unwrap();
        assert!(!above.is_blocked(), "seed {seed}");
        if deficit > 1e-6 {
            let below = verifier().find_blocking_coalition(&inst, outcome, 0.0, deficit - 1e-6, DeviationMode::Integral).unwrap();
            assert!(below.is_blocked(), "seed {seed}");
        }
    }
}

#[test]
fn fractional_mode_dominates_integral_mode() {
    for seed in 0..40u64 {
        let inst = random_knapsack(Some(3), Some(5), 1, None, seed).unwrap();
        let all = enumerate_outcomes(&inst, OutcomeSpace::Feasible, 1 << 16).unwrap();
        for outcome in all.iter().take(4) {
            let int = verifier().find_blocking_coalition(&inst, outcome, 0.0, 0.05, DeviationMode::Integral).unwrap();
            let frac = verifier().find_blocking_coalition(&inst, outcome, 0.0, 0.05, DeviationMode::Fractional).unwrap();
            if int.is_blocked() {
                assert!(frac.is_blocked(), "seed {seed}: integral block missed by fractional search");
            }
        }
    }
}

#[test]
fn fractional_outcomes_are_accepted() {
    let inst = k22().with_constraint(k22().packing_relaxation().unwrap()).unwrap();
    let half = FractionalOutcome::new(vec![0.5; 4]);
    let cert = verifier().find_blocking_coalition(&inst, &half, 0.0, 0.0, DeviationMode::Fractional).unwrap();
    assert_eq!(cert.verdict, Verdict::Clean);
}

#[test]
fn proportionality_and_pareto_reports() {
    let inst = Instance::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], ConstraintSpec::UniformMatroid { rank: 1 }).unwrap();
    let first = IntegralOutcome::new([0]);
    let report = is_proportional(&inst, &first, 0.0).unwrap();
    assert!(report.proportional);
    let strict = verifier().is_proportional(&inst, &first, 0.5, OptimumMode::Integral).unwrap();
    assert!(!strict.proportional);
    assert!(is_pareto_optimal(&inst, &first).unwrap().optimal);
    let empty = IntegralOutcome::empty();
    let report = verifier().is_pareto_optimal(&inst, &empty).unwrap();
    assert!(!report.optimal);
}

#[test]
fn invalid_inputs_are_rejected() {
    let inst = cyclic_pb();
    let outcome = IntegralOutcome::new([0]);
    assert!(verifier().find_blocking_coalition(&inst, &outcome, -0.1, 0.0, DeviationMode::Integral).is_err());
    assert!(verifier().find_blocking_coalition(&inst, &outcome, 0.0, f64::NAN, DeviationMode::Integral).is_err());
    assert!(verifier().find_blocking_coalition(&inst, &IntegralOutcome::new([7]), 0.0, 0.0, DeviationMode::Integral).is_err());
    let tight = Verifier::new(SizeCaps { verifier_agents: 2, ..SizeCaps::default() });
    let err = tight.find_blocking_coalition(&inst, &outcome, 0.0, 0.0, DeviationMode::Integral).unwrap_err();
    assert_eq!(err.exit_code(), 3);
}
