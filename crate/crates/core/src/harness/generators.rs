//! Named instance families: the finite constructions used as lower bounds
//! and counterexamples, plus seeded random pools.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};
use crate::instance::{ConstraintSpec, Instance, IntegralOutcome};

pub const GENERATOR_NAMES: [&str; 9] = [
    "example1",
    "lemma4",
    "k22",
    "bipartite_is",
    "knapsack_smoothing",
    "cyclic_pb",
    "random_matroid",
    "random_matching",
    "random_knapsack",
];

/// A generator name with `key=value` parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub name: String,
    pub params: BTreeMap<String, String>,
}

impl GeneratorSpec {
    pub fn new(name: &str) -> Self {
        GeneratorSpec {
            name: name.to_string(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    /// Parses `name key=val key=val ...` split into words.
    pub fn parse<'a>(name: &str, pairs: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let mut spec = GeneratorSpec::new(name);
        for pair in pairs {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| CoreError::Validation(format!("generator parameter {pair:?} is not key=value")))?;
            spec.params.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(spec)
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.params.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CoreError::Validation(format!("{}: bad value {v:?} for {key}", self.name))),
        }
    }

    fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn seed(&self) -> Result<u64> {
        self.get("seed")?
            .ok_or_else(|| CoreError::Validation(format!("{} needs seed=<u64>", self.name)))
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(CoreError::Validation(format!("{} does not take parameter {k:?}", self.name))),
            None => Ok(()),
        }
    }

    /// Stable identifier, e.g. `random_matroid(n=4,seed=7)`.
    pub fn id(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "{}({})", self.name, params.join(","))
    }
}

pub fn generate(spec: &GeneratorSpec) -> Result<Instance<f64>> {
    match spec.name.as_str() {
        "example1" => {
            spec.check_keys(&["m"])?;
            example1(spec.get_or("m", 4)?)
        }
        "lemma4" => {
            spec.check_keys(&["n"])?;
            lemma4(spec.get_or("n", 4)?)
        }
        "k22" => {
            spec.check_keys(&[])?;
            Ok(k22())
        }
        "bipartite_is" => {
            spec.check_keys(&["m"])?;
            bipartite_is(spec.get_or("m", 8)?)
        }
        "knapsack_smoothing" => {
            spec.check_keys(&["budget", "n"])?;
            knapsack_smoothing(spec.get_or("budget", 4096)?, spec.get("n")?)
        }
        "cyclic_pb" => {
            spec.check_keys(&[])?;
            Ok(cyclic_pb())
        }
        "random_matroid" => {
            spec.check_keys(&["n", "m", "kind", "seed"])?;
            random_matroid(spec.get("n")?, spec.get("m")?, spec.get("kind")?, spec.seed()?)
        }
        "random_matching" => {
            spec.check_keys(&["n", "vertices", "edges", "seed"])?;
            random_matching(spec.get("n")?, spec.get("vertices")?, spec.get("edges")?, spec.seed()?)
        }
        "random_knapsack" => {
            spec.check_keys(&["n", "m", "rows", "capacity", "seed"])?;
            random_knapsack(
                spec.get("n")?,
                spec.get("m")?,
                spec.get_or("rows", 1)?,
                spec.get("capacity")?,
                spec.seed()?,
            )
        }
        other => Err(CoreError::Validation(format!(
            "unknown generator {other:?}; expected one of {}",
            GENERATOR_NAMES.join(", ")
        ))),
    }
}

fn invalid<T>(msg: String) -> Result<T> {
    Err(CoreError::Validation(msg))
}

/// `m` issues with two alternatives each (elements `2t` and `2t + 1`).
/// Agent `t < m` likes only the first alternative of issue `t`; agents
/// `m..2m` value every first alternative at `1/m` and every second at 1.
pub fn example1(m: usize) -> Result<Instance<f64>> {
    if m < 2 {
        return invalid(format!("example1 needs m >= 2, got {m}"));
    }
    let mut utilities = Vec::with_capacity(2 * m);
    for t in 0..m {
        let mut row = vec![0.0; 2 * m];
        row[2 * t] = 1.0;
        utilities.push(row);
    }
    for _ in 0..m {
        utilities.push((0..2 * m).map(|j| if j % 2 == 0 { 1.0 / m as f64 } else { 1.0 }).collect());
    }
    let groups = (0..m).map(|t| vec![2 * t, 2 * t + 1]).collect();
    Instance::new(utilities, ConstraintSpec::PartitionMatroid { groups })
}

/// Every issue's first alternative in [`example1`].
pub fn example1_firsts(m: usize) -> IntegralOutcome {
    IntegralOutcome::new((0..m).map(|t| 2 * t))
}

/// Every issue's second alternative in [`example1`].
pub fn example1_seconds(m: usize) -> IntegralOutcome {
    IntegralOutcome::new((0..m).map(|t| 2 * t + 1))
}

/// `n - 2` private-good issues with one alternative per agent, then `n / 2`
/// pair issues with one alternative per pair of agents (pairs in
/// lexicographic order).
pub fn lemma4(n: usize) -> Result<Instance<f64>> {
    if n < 4 || n % 2 != 0 {
        return invalid(format!("lemma4 needs an even n >= 4, got {n}"));
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let m = (n - 2) * n + (n / 2) * pairs.len();
    let mut utilities = vec![vec![0.0; m]; n];
    let mut groups = Vec::new();
    let mut next = 0;
    for _ in 0..n - 2 {
        let group: Vec<usize> = (next..next + n).collect();
        for (i, &j) in group.iter().enumerate() {
            utilities[i][j] = 1.0;
        }
        next += n;
        groups.push(group);
    }
    for _ in 0..n / 2 {
        let group: Vec<usize> = (next..next + pairs.len()).collect();
        for (&(a, b), &j) in pairs.iter().zip(&group) {
            utilities[a][j] = 1.0;
            utilities[b][j] = 1.0;
        }
        next += pairs.len();
        groups.push(group);
    }
    Instance::new(utilities, ConstraintSpec::PartitionMatroid { groups })
}

/// `K_{2,2}` with left vertices 0, 1 and right vertices 2, 3. Edges 0 and
/// 1 form one perfect matching, edges 2 and 3 the other; each agent values
/// one of them.
pub fn k22() -> Instance<f64> {
    Instance::new(
        vec![vec![1.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 1.0]],
        ConstraintSpec::Matching {
            vertices: 4,
            edges: vec![(0, 2), (1, 3), (0, 3), (1, 2)],
        },
    )
    .expect("static instance")
}

/// Independent sets of `K_{m/2, m/2}` as packing rows `x_u + x_v <= 1`;
/// agent 0 values the left side, agent 1 the right side.
pub fn bipartite_is(m: usize) -> Result<Instance<f64>> {
    if m < 2 || m % 2 != 0 {
        return invalid(format!("bipartite_is needs an even m >= 2, got {m}"));
    }
    let h = m / 2;
    let mut a = Vec::with_capacity(h * h);
    for u in 0..h {
        for v in h..m {
            let mut row = vec![0.0; m];
            row[u] = 1.0;
            row[v] = 1.0;
            a.push(row);
        }
    }
    let b = vec![1.0; a.len()];
    let utilities = vec![
        (0..m).map(|j| if j < h { 1.0 } else { 0.0 }).collect(),
        (0..m).map(|j| if j < h { 0.0 } else { 1.0 }).collect(),
    ];
    Instance::new(utilities, ConstraintSpec::Packing { a, b })
}

/// Knapsack where every fixed smoothing picks the large items.
///
/// Budget `B = k^4`: `k` large items of size `B^{3/4}` valued by everyone
/// and `B` unit items valued only by the special agents. There are
/// `n >= 4 k ln(2B)` agents, the first `max(1, floor(n / (4 k ln 2B)))` of
/// them special. Sizes are divided by `B^{3/4}` so the capacity is `k`.
pub fn knapsack_smoothing(budget: u64, n: Option<usize>) -> Result<Instance<f64>> {
    let k = (budget as f64).powf(0.25).round() as u64;
    if k < 2 || k.pow(4) != budget {
        return invalid(format!("knapsack_smoothing needs a budget k^4 with k >= 2, got {budget}"));
    }
    let b = budget as f64;
    let min_agents = (4.0 * k as f64 * (2.0 * b).ln()).ceil() as usize;
    let n = n.unwrap_or(min_agents);
    if n < min_agents {
        return invalid(format!("knapsack_smoothing needs n >= {min_agents}, got {n}"));
    }
    let special = smoothing_special_agents(budget, n);
    let large = k as usize;
    let m = large + budget as usize;
    let small_size = 1.0 / (k * k * k) as f64;
    let mut row = vec![1.0; large];
    row.extend(std::iter::repeat(small_size).take(budget as usize));
    let utilities = (0..n)
        .map(|i| {
            let small = if i < special { 1.0 } else { 0.0 };
            (0..m).map(|j| if j < large { 1.0 } else { small }).collect()
        })
        .collect();
    Instance::new(
        utilities,
        ConstraintSpec::Packing {
            a: vec![row],
            b: vec![k as f64],
        },
    )
}

/// Number of special agents in [`knapsack_smoothing`].
pub fn smoothing_special_agents(budget: u64, n: usize) -> usize {
    let k = (budget as f64).powf(0.25).round();
    let share = 1.0 / (4.0 * k * (2.0 * budget as f64).ln());
    ((share * n as f64).floor() as usize).max(1)
}

/// Three items of size 2 under budget 3 (scaled to 2/3 and 1) with cyclic
/// preferences.
pub fn cyclic_pb() -> Instance<f64> {
    Instance::new(
        vec![vec![1.0, 0.5, 0.0], vec![0.0, 1.0, 0.5], vec![0.5, 0.0, 1.0]],
        ConstraintSpec::Packing {
            a: vec![vec![2.0 / 3.0; 3]],
            b: vec![1.0],
        },
    )
    .expect("static instance")
}

/// Integer utilities in `0..=4`, row-normalized; rows of zeros are allowed.
fn random_utilities(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..m).map(|_| rng.gen_range(0..=4) as f64).collect()).collect()
}

fn normalized(utilities: Vec<Vec<f64>>, constraint: ConstraintSpec<f64>) -> Result<Instance<f64>> {
    Ok(Instance::new(utilities, constraint)?.normalized())
}

/// Partition, uniform or graphic matroid with `n <= 8` agents and `m <= 10`
/// elements.
pub fn random_matroid(n: Option<usize>, m: Option<usize>, kind: Option<String>, seed: u64) -> Result<Instance<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n.unwrap_or_else(|| rng.gen_range(2..=8));
    let m = m.unwrap_or_else(|| rng.gen_range(3..=10));
    if n == 0 || m == 0 {
        return invalid("random_matroid needs n, m >= 1".into());
    }
    let kind = kind.unwrap_or_else(|| ["partition", "uniform", "graphic"][rng.gen_range(0..3)].to_string());
    let constraint = match kind.as_str() {
        "partition" => {
            let parts = rng.gen_range(1..=m.min(5));
            let mut order: Vec<usize> = (0..m).collect();
            order.shuffle(&mut rng);
            let mut groups = vec![Vec::new(); parts];
            for (k, &j) in order.iter().enumerate() {
                let g = if k < parts { k } else { rng.gen_range(0..parts) };
                groups[g].push(j);
            }
            for g in &mut groups {
                g.sort_unstable();
            }
            groups.sort();
            ConstraintSpec::PartitionMatroid { groups }
        }
        "uniform" => ConstraintSpec::UniformMatroid {
            rank: rng.gen_range(1..=m),
        },
        "graphic" => {
            let vertices = rng.gen_range(2..=(m + 1).min(6));
            let edges = (0..m)
                .map(|_| {
                    let u = rng.gen_range(0..vertices);
                    let mut v = rng.gen_range(0..vertices - 1);
                    if v >= u {
                        v += 1;
                    }
                    (u.min(v), u.max(v))
                })
                .collect();
            ConstraintSpec::GraphicMatroid { vertices, edges }
        }
        other => return invalid(format!("random_matroid kind must be partition, uniform or graphic, got {other:?}")),
    };
    let utilities = random_utilities(&mut rng, n, m);
    normalized(utilities, constraint)
}

/// Random simple graph with up to 10 edges and `n <= 6` agents.
pub fn random_matching(n: Option<usize>, vertices: Option<usize>, edges: Option<usize>, seed: u64) -> Result<Instance<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n.unwrap_or_else(|| rng.gen_range(2..=6));
    let vertices = vertices.unwrap_or_else(|| rng.gen_range(3..=6));
    if n == 0 || vertices < 2 {
        return invalid("random_matching needs n >= 1 and vertices >= 2".into());
    }
    let mut all: Vec<(usize, usize)> = (0..vertices).flat_map(|u| (u + 1..vertices).map(move |v| (u, v))).collect();
    let count = edges.unwrap_or_else(|| rng.gen_range(1..=all.len().min(10)));
    if count == 0 || count > all.len() {
        return invalid(format!("random_matching: {count} edges on {vertices} vertices"));
    }
    all.shuffle(&mut rng);
    let mut chosen: Vec<(usize, usize)> = all[..count].to_vec();
    chosen.sort_unstable();
    let utilities = random_utilities(&mut rng, n, count);
    normalized(utilities, ConstraintSpec::Matching { vertices, edges: chosen })
}

/// Knapsack rows with sizes in `{0.50, 0.55, ..., 1}` and capacity at least
/// `m / 2` by default.
pub fn random_knapsack(
    n: Option<usize>,
    m: Option<usize>,
    rows: usize,
    capacity: Option<f64>,
    seed: u64,
) -> Result<Instance<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n.unwrap_or_else(|| rng.gen_range(2..=8));
    let m = m.unwrap_or_else(|| rng.gen_range(4..=14));
    if n == 0 || m == 0 || rows == 0 {
        return invalid("random_knapsack needs n, m, rows >= 1".into());
    }
    let capacity = capacity.unwrap_or((m as f64 / 2.0).ceil());
    let a = (0..rows)
        .map(|_| (0..m).map(|_| rng.gen_range(10..=20) as f64 / 20.0).collect())
        .collect();
    let utilities = random_utilities(&mut rng, n, m);
    normalized(utilities, ConstraintSpec::Packing { a, b: vec![capacity; rows] })
}

/// Private goods with `n` agents and `goods` goods, integer values `0..=4`
/// per agent, normalized.
pub fn random_private_goods(n: usize, goods: usize, seed: u64) -> Result<Instance<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = random_utilities(&mut rng, n, goods);
    Ok(Instance::private_goods(values)?.normalized())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example1_table() {
        let inst = example1(3).unwrap();
        assert_eq!(inst.n_agents(), 6);
        assert_eq!(inst.row(1), &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(inst.row(4), &[1.0 / 3.0, 1.0, 1.0 / 3.0, 1.0, 1.0 / 3.0, 1.0]);
    }

    #[test]
    fn lemma4_issue_counts() {
        let inst = lemma4(4).unwrap();
        let ConstraintSpec::PartitionMatroid { groups } = inst.constraint() else { panic!() };
        let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![4, 4, 6, 6]);
        assert!(lemma4(5).is_err());
    }

    #[test]
    fn smoothing_sizes() {
        let inst = knapsack_smoothing(4096, None).unwrap();
        assert_eq!(inst.n_agents(), 289);
        assert_eq!(inst.n_elements(), 8 + 4096);
        assert_eq!(smoothing_special_agents(4096, 289), 1);
        assert!(knapsack_smoothing(4000, None).is_err());
    }

    #[test]
    fn unknown_parameter_is_rejected() {
        let spec = GeneratorSpec::parse("k22", ["m=3"]).unwrap();
        assert!(generate(&spec).is_err());
    }

    #[test]
    fn random_families_need_seed() {
        assert!(generate(&GeneratorSpec::new("random_matroid")).is_err());
        let spec = GeneratorSpec::new("random_matroid").with("seed", 3);
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
    }
}
