//! Matroid oracles and the swap local search on smooth Nash welfare.

use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::instance::{ConstraintSpec, Instance, IntegralOutcome};
use crate::objective::{delta_change, smooth_nash, SmoothNashParams};
use crate::report::SolverReport;
use crate::scalar::{count, lit, Scalar};

/// Independence oracle for the matroid families an instance can declare.
#[derive(Debug, Clone, PartialEq)]
pub enum MatroidOracle {
    /// At most one element per group.
    Partition { group_of: Vec<usize>, groups: usize },
    /// At most `rank` elements.
    Uniform { m: usize, rank: usize },
    /// Edge sets without cycles.
    Graphic {
        vertices: usize,
        edges: Vec<(usize, usize)>,
    },
}

impl MatroidOracle {
    pub fn from_instance<S: Scalar>(inst: &Instance<S>) -> Result<Self> {
        Self::from_spec(inst.constraint(), inst.n_agents(), inst.n_elements())
    }

    pub fn from_spec<S: Scalar>(spec: &ConstraintSpec<S>, n: usize, m: usize) -> Result<Self> {
        match spec {
            ConstraintSpec::PartitionMatroid { groups } => {
                let mut group_of = vec![0; m];
                for (g, group) in groups.iter().enumerate() {
                    for &j in group {
                        group_of[j] = g;
                    }
                }
                Ok(MatroidOracle::Partition {
                    group_of,
                    groups: groups.len(),
                })
            }
            ConstraintSpec::PrivateGoods { goods } => Ok(MatroidOracle::Partition {
                group_of: (0..m).map(|e| e / n).collect(),
                groups: *goods,
            }),
            ConstraintSpec::UniformMatroid { rank } => Ok(MatroidOracle::Uniform { m, rank: *rank }),
            ConstraintSpec::GraphicMatroid { vertices, edges } => Ok(MatroidOracle::Graphic {
                vertices: *vertices,
                edges: edges.clone(),
            }),
            other => Err(CoreError::Unsupported(format!("{} is not a matroid constraint", other.type_name()))),
        }
    }

    pub fn ground_size(&self) -> usize {
        match self {
            MatroidOracle::Partition { group_of, .. } => group_of.len(),
            MatroidOracle::Uniform { m, .. } => *m,
            MatroidOracle::Graphic { edges, .. } => edges.len(),
        }
    }

    /// Size of every basis.
    pub fn rank(&self) -> usize {
        match self {
            MatroidOracle::Partition { groups, .. } => *groups,
            MatroidOracle::Uniform { rank, .. } => *rank,
            MatroidOracle::Graphic { vertices, edges } => {
                let mut uf = UnionFind::new(*vertices);
                edges.iter().filter(|&&(u, v)| uf.union(u, v)).count()
            }
        }
    }

    /// Independence test; `set` may be unsorted but must not repeat elements.
    pub fn is_independent(&self, set: &[usize]) -> bool {
        match self {
            MatroidOracle::Partition { group_of, groups } => {
                let mut used = vec![false; *groups];
                set.iter().all(|&j| !std::mem::replace(&mut used[group_of[j]], true))
            }
            MatroidOracle::Uniform { rank, .. } => set.len() <= *rank,
            MatroidOracle::Graphic { vertices, edges } => {
                let mut uf = UnionFind::new(*vertices);
                set.iter().all(|&e| uf.union(edges[e].0, edges[e].1))
            }
        }
    }

    pub fn is_basis(&self, set: &[usize]) -> bool {
        set.len() == self.rank() && self.is_independent(set)
    }

    /// Whether `basis - remove + add` is again a basis.
    pub fn swap_keeps_basis(&self, basis: &[usize], remove: usize, add: usize) -> bool {
        match self {
            MatroidOracle::Partition { group_of, .. } => group_of[remove] == group_of[add],
            MatroidOracle::Uniform { .. } => true,
            MatroidOracle::Graphic { .. } => {
                let swapped: Vec<usize> = basis
                    .iter()
                    .copied()
                    .filter(|&j| j != remove)
                    .chain(std::iter::once(add))
                    .collect();
                self.is_independent(&swapped)
            }
        }
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the classes of `a` and `b`; false if they were already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Greedy basis by descending `weights`, ties broken by lower index.
pub fn max_weight_basis<S: Scalar>(oracle: &MatroidOracle, weights: &[S]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..oracle.ground_size()).collect();
    order.sort_by(|&a, &b| weights[b].partial_cmp(&weights[a]).unwrap().then(a.cmp(&b)));
    let rank = oracle.rank();
    let mut basis = Vec::with_capacity(rank);
    for j in order {
        basis.push(j);
        if !oracle.is_independent(&basis) {
            basis.pop();
        }
        if basis.len() == rank {
            break;
        }
    }
    basis.sort_unstable();
    basis
}

/// Greedy basis by descending total utility over all agents.
pub fn initial_basis<S: Scalar>(oracle: &MatroidOracle, inst: &Instance<S>) -> IntegralOutcome {
    let totals: Vec<S> = (0..inst.n_elements())
        .map(|j| inst.utilities().iter().map(|row| row[j]).sum())
        .collect();
    IntegralOutcome::new(max_weight_basis(oracle, &totals))
}

/// Parameters of the swap search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwapSearchConfig<S> {
    pub epsilon: S,
    /// `epsilon / (4 m)`.
    pub gamma: S,
    /// `n gamma / m`.
    pub threshold: S,
    pub max_iterations: usize,
}

impl<S: Scalar> SwapSearchConfig<S> {
    pub fn new(epsilon: S, n: usize, m: usize) -> Result<Self> {
        if !(epsilon > S::zero()) || !epsilon.is_finite() {
            return Err(CoreError::Domain(format!("epsilon {epsilon} must be positive")));
        }
        let gamma = epsilon / (lit::<S>(4.0) * count(m));
        let threshold = count::<S>(n) * gamma / count(m);
        let bound = 4.0 * (m * m) as f64 * (1.0 + m as f64).ln() / epsilon.to_f64().unwrap();
        Ok(SwapSearchConfig {
            epsilon,
            gamma,
            threshold,
            max_iterations: bound.ceil() as usize + 1,
        })
    }
}

/// An accepted exchange and its objective gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Swap<S> {
    pub remove: usize,
    pub add: usize,
    pub delta: S,
}

fn scan_swaps<S: Scalar>(
    inst: &Instance<S>,
    outcome: &IntegralOutcome,
    utils: &[S],
    oracle: &MatroidOracle,
    threshold: S,
) -> Option<Swap<S>> {
    let ell = S::one();
    for &remove in outcome.elements() {
        for add in 0..inst.n_elements() {
            if outcome.contains(add) || !oracle.swap_keeps_basis(outcome.elements(), remove, add) {
                continue;
            }
            let delta = delta_change(inst, utils, &[remove], &[add], ell);
            if delta >= threshold {
                return Some(Swap { remove, add, delta });
            }
        }
    }
    None
}

/// First basis-preserving swap (remove ascending, then add ascending) that
/// raises `F` with `ell = 1` by at least the threshold.
pub fn find_improving_swap<S: Scalar>(
    inst: &Instance<S>,
    outcome: &IntegralOutcome,
    oracle: &MatroidOracle,
    config: &SwapSearchConfig<S>,
) -> Option<Swap<S>> {
    let utils = inst.utility_vector(outcome);
    scan_swaps(inst, outcome, &utils, oracle, config.threshold)
}

/// Swap local search from the greedy basis until no swap gains
/// `n gamma / m`. The outcome lies in the `(0, 2 + epsilon)`-core.
pub fn local_search_matroid<S: Scalar>(inst: &Instance<S>, oracle: &MatroidOracle, epsilon: S) -> Result<SolverReport<S>> {
    let config = SwapSearchConfig::new(epsilon, inst.n_agents(), inst.n_elements())?;
    local_search_matroid_with(inst, oracle, &config)
}

pub fn local_search_matroid_with<S: Scalar>(
    inst: &Instance<S>,
    oracle: &MatroidOracle,
    config: &SwapSearchConfig<S>,
) -> Result<SolverReport<S>> {
    if oracle.ground_size() != inst.n_elements() {
        return Err(CoreError::Validation(format!(
            "oracle ground set has {} elements, instance has {}",
            oracle.ground_size(),
            inst.n_elements()
        )));
    }
    let params = SmoothNashParams::new(S::one())?;
    let mut outcome = initial_basis(oracle, inst);
    let mut utils = inst.utility_vector(&outcome);
    let mut value = smooth_nash(inst, &outcome, &params)?;
    let mut trace = vec![value];
    let mut iterations = 0;
    while let Some(swap) = scan_swaps(inst, &outcome, &utils, oracle, config.threshold) {
        iterations += 1;
        if iterations > config.max_iterations {
            return Err(CoreError::IterationCap { cap: config.max_iterations });
        }
        outcome = outcome.swapped(swap.remove, swap.add);
        for (u, row) in utils.iter_mut().zip(inst.utilities()) {
            *u += row[swap.add] - row[swap.remove];
        }
        value += swap.delta;
        trace.push(value);
    }
    let mut report = SolverReport::new("matroid_local_search");
    report.outcome = Some(outcome);
    report.objective_trace = trace;
    report.iterations = iterations;
    report.diagnostics.epsilon = Some(config.epsilon);
    report.diagnostics.gamma = Some(config.gamma);
    report.diagnostics.smoothing = Some(S::one());
    report.diagnostics.threshold = Some(config.threshold);
    report.diagnostics.iteration_cap = Some(config.max_iterations);
    Ok(report)
}

/// Bijection `f: A -> B` with `A - j + f(j)` a basis for every `j in A`,
/// found as a perfect matching in the exchange graph. Pairs are returned in
/// ascending order of `j`.
pub fn exchange_bijection(oracle: &MatroidOracle, basis_a: &[usize], basis_b: &[usize]) -> Result<Vec<(usize, usize)>> {
    if !oracle.is_basis(basis_a) || !oracle.is_basis(basis_b) {
        return Err(CoreError::Validation("exchange_bijection needs two bases".into()));
    }
    let mut a = basis_a.to_vec();
    a.sort_unstable();
    let b = {
        let mut b = basis_b.to_vec();
        b.sort_unstable();
        b
    };
    let k = a.len();
    let adjacent: Vec<Vec<usize>> = a
        .iter()
        .map(|&j| {
            (0..k)
                .filter(|&t| {
                    let add = b[t];
                    add == j || (!a.contains(&add) && oracle.swap_keeps_basis(&a, j, add))
                })
                .collect()
        })
        .collect();
    let mut match_of_b: Vec<Option<usize>> = vec![None; k];
    for i in 0..k {
        let mut seen = vec![false; k];
        if !augment(i, &adjacent, &mut seen, &mut match_of_b) {
            return Err(CoreError::ExchangeAxiom(format!(
                "no exchange partner set covers element {} of the first basis",
                a[i]
            )));
        }
    }
    let mut pairs: Vec<(usize, usize)> = match_of_b
        .iter()
        .enumerate()
        .map(|(t, i)| (a[i.expect("perfect matching")], b[t]))
        .collect();
    pairs.sort_unstable();
    Ok(pairs)
}

fn augment(i: usize, adjacent: &[Vec<usize>], seen: &mut [bool], match_of_b: &mut [Option<usize>]) -> bool {
    for &t in &adjacent[i] {
        if seen[t] {
            continue;
        }
        seen[t] = true;
        if match_of_b[t].is_none() || augment(match_of_b[t].unwrap(), adjacent, seen, match_of_b) {
            match_of_b[t] = Some(i);
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec_inst(rows: Vec<Vec<f64>>, spec: ConstraintSpec<f64>) -> Instance {
        Instance::new(rows, spec).unwrap()
    }

    #[test]
    fn uniform_full_rank_takes_everything() {
        let inst = spec_inst(vec![vec![0.2, 1.0, 0.5]], ConstraintSpec::UniformMatroid { rank: 3 });
        let oracle = MatroidOracle::from_instance(&inst).unwrap();
        assert_eq!(initial_basis(&oracle, &inst).elements(), &[0, 1, 2]);
    }

    #[test]
    fn partition_picks_one_per_group() {
        let inst = spec_inst(
            vec![vec![0.2, 1.0, 0.5, 0.1]],
            ConstraintSpec::PartitionMatroid {
                groups: vec![vec![0, 1], vec![2, 3]],
            },
        );
        let oracle = MatroidOracle::from_instance(&inst).unwrap();
        assert_eq!(initial_basis(&oracle, &inst).elements(), &[1, 2]);
    }

    #[test]
    fn tree_basis_is_all_edges() {
        let inst = spec_inst(
            vec![vec![0.0, 1.0, 0.5]],
            ConstraintSpec::GraphicMatroid {
                vertices: 4,
                edges: vec![(0, 1), (1, 2), (1, 3)],
            },
        );
        let oracle = MatroidOracle::from_instance(&inst).unwrap();
        assert_eq!(oracle.rank(), 3);
        assert_eq!(initial_basis(&oracle, &inst).elements(), &[0, 1, 2]);
    }

    #[test]
    fn graphic_rank_counts_components() {
        let oracle = MatroidOracle::Graphic {
            vertices: 5,
            edges: vec![(0, 1), (1, 2), (0, 2), (3, 4)],
        };
        assert_eq!(oracle.rank(), 3);
        assert!(!oracle.is_independent(&[0, 1, 2]));
        assert!(oracle.is_basis(&[0, 2, 3]));
    }

    #[test]
    fn identical_bases_map_to_themselves() {
        let oracle = MatroidOracle::Uniform { m: 4, rank: 2 };
        assert_eq!(exchange_bijection(&oracle, &[1, 3], &[3, 1]).unwrap(), vec![(1, 1), (3, 3)]);
    }

    #[test]
    fn partition_bijection_follows_groups() {
        let oracle = MatroidOracle::Partition {
            group_of: vec![0, 0, 1, 1, 2, 2],
            groups: 3,
        };
        let pairs = exchange_bijection(&oracle, &[0, 2, 4], &[0, 3, 4]).unwrap();
        assert_eq!(pairs, vec![(0, 0), (2, 3), (4, 4)]);
    }

    #[test]
    fn iteration_cap_formula() {
        let cfg = SwapSearchConfig::<f64>::new(0.1, 3, 4).unwrap();
        assert!((cfg.gamma - 0.1 / 16.0).abs() < 1e-15);
        assert!((cfg.threshold - 3.0 * cfg.gamma / 4.0).abs() < 1e-15);
        assert_eq!(cfg.max_iterations, (640.0 * 5f64.ln()).ceil() as usize + 1);
    }
}
