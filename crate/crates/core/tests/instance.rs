use corefair::harness::generators::{generate, random_knapsack, random_matching, random_matroid, random_private_goods};
use corefair::harness::{GeneratorSpec, GENERATOR_NAMES};
use corefair::instance::normalize_utilities;
use corefair::{ConstraintSpec, Instance, Instance64};
use proptest::prelude::*;

fn fixed_specs() -> Vec<GeneratorSpec> {
    GENERATOR_NAMES
        .iter()
        .map(|&name| {
            let spec = GeneratorSpec::new(name);
            match name {
                "example1" => spec.with("m", 4),
                "lemma4" => spec.with("n", 4),
                "bipartite_is" => spec.with("m", 4),
                "knapsack_smoothing" => spec.with("budget", 16),
                n if n.starts_with("random") => spec.with("seed", 3),
                _ => spec,
            }
        })
        .collect()
}

#[test]
fn generated_instances_round_trip() {
    for spec in fixed_specs() {
        let inst = generate(&spec).unwrap();
        let text = inst.to_json();
        let back = Instance64::from_json(&text).unwrap();
        assert_eq!(back, inst, "{spec}");
        assert_eq!(back.to_json(), text, "{spec}");
        let pretty = Instance64::from_json(&inst.to_json_pretty()).unwrap();
        assert_eq!(pretty, inst, "{spec}");
    }
}

#[test]
fn random_instances_round_trip() {
    for seed in 0..500u64 {
        let inst = match seed % 4 {
            0 => random_matroid(None, None, None, seed),
            1 => random_matching(None, None, None, seed),
            2 => random_knapsack(None, None, 1 + (seed % 3) as usize, None, seed),
            _ => random_private_goods(2 + (seed % 3) as usize, 1 + (seed % 5) as usize, seed),
        }
        .unwrap();
        let back = Instance64::from_json(&inst.to_json()).unwrap();
        assert_eq!(back, inst, "seed {seed}");
    }
}

#[test]
fn malformed_input_is_rejected() {
    assert!(Instance64::from_json("{").is_err());
    assert!(Instance64::from_json(r#"{"utilities": [[1]]}"#).is_err());
    let bad_group = ConstraintSpec::PartitionMatroid { groups: vec![vec![0], vec![0]] };
    assert!(Instance::new(vec![vec![1.0, 1.0]], bad_group).is_err());
    let bad_size = ConstraintSpec::Packing { a: vec![vec![1.5]], b: vec![1.0] };
    assert!(Instance::new(vec![vec![1.0]], bad_size).is_err());
    assert!(Instance::new(vec![vec![-1.0]], ConstraintSpec::UniformMatroid { rank: 1 }).is_err());
}

#[test]
fn single_precision_instances_work() {
    let inst = Instance::<f32>::new(vec![vec![2.0, 1.0], vec![0.0, 4.0]], ConstraintSpec::UniformMatroid { rank: 1 }).unwrap();
    let norm = inst.normalized();
    assert!(norm.is_normalized());
    assert_eq!(norm.row(1), &[0.0, 1.0]);
}

fn utility_matrix() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..5, 1usize..6).prop_flat_map(|(n, m)| prop::collection::vec(prop::collection::vec(0.0f64..10.0, m), n))
}

proptest! {
    #[test]
    fn normalization_is_idempotent(utils in utility_matrix()) {
        let m = utils[0].len();
        let inst = Instance::new(utils, ConstraintSpec::UniformMatroid { rank: m.min(2) }).unwrap();
        let once = normalize_utilities(&inst);
        prop_assert!(once.is_normalized());
        prop_assert_eq!(normalize_utilities(&once), once.clone());
        for (i, row) in once.utilities().iter().enumerate() {
            let top = row.iter().copied().fold(0.0, f64::max);
            if inst.is_zero_agent(i) {
                prop_assert_eq!(top, 0.0);
            } else {
                prop_assert!((top - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn json_round_trip_preserves_values(utils in utility_matrix()) {
        let m = utils[0].len();
        let inst = Instance::new(utils, ConstraintSpec::UniformMatroid { rank: m }).unwrap();
        prop_assert_eq!(Instance64::from_json(&inst.to_json()).unwrap(), inst);
    }
}
