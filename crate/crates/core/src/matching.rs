//! Local search over matchings by bounded-size augmentations.

use std::ops::ControlFlow;

use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::instance::{is_matching, ConstraintSpec, Instance, IntegralOutcome};
use crate::objective::{delta_change, smooth_nash, SmoothNashParams};
use crate::report::SolverReport;
use crate::scalar::{count, Scalar};

/// A matching `T` disjoint from the current outcome together with `M(T)`,
/// the current edges sharing a vertex with `T`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Augmentation {
    pub edges: Vec<usize>,
    pub removed: Vec<usize>,
}

impl Augmentation {
    /// `(current - M(T)) + T`.
    pub fn apply(&self, current: &IntegralOutcome) -> IntegralOutcome {
        IntegralOutcome::new(
            current
                .elements()
                .iter()
                .copied()
                .filter(|j| !self.removed.contains(j))
                .chain(self.edges.iter().copied()),
        )
    }

    /// `sum_{j in T} w'_j - sum_{j in M(T)} w_j`.
    pub fn gain<S: Scalar>(&self, w: &[S], w_prime: &[S]) -> S {
        self.edges.iter().map(|&j| w_prime[j]).sum::<S>() - self.removed.iter().map(|&j| w[j]).sum::<S>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchSearchConfig<S> {
    pub delta: S,
    /// `ceil(2 / delta)`.
    pub kappa: usize,
    /// `1 + 2 kappa`.
    pub ell: S,
    /// `n / (kappa r)` with `r` the vertex count.
    pub threshold: S,
    pub max_iterations: usize,
}

impl<S: Scalar> MatchSearchConfig<S> {
    pub fn new(delta: S, n: usize, vertices: usize, m: usize) -> Result<Self> {
        if !(delta > S::zero() && delta <= S::one()) {
            return Err(CoreError::Domain(format!("delta {delta} must lie in (0, 1]")));
        }
        let ratio = (S::one() + S::one()) / delta;
        // Values like 2 / (2/3) land a hair above the integer.
        let kappa = (ratio - S::tolerance()).ceil().to_usize().unwrap().max(2);
        let ell = count::<S>(1 + 2 * kappa);
        let vertices = vertices.max(1);
        let threshold = count::<S>(n) / count::<S>(kappa * vertices);
        let span = (kappa * vertices) as f64 * (1.0 + m as f64 / (1 + 2 * kappa) as f64).ln();
        Ok(MatchSearchConfig {
            delta,
            kappa,
            ell,
            threshold,
            max_iterations: span.ceil() as usize + 1,
        })
    }
}

fn vertex_owner(vertices: usize, edges: &[(usize, usize)], current: &IntegralOutcome) -> Vec<Option<usize>> {
    let mut owner = vec![None; vertices];
    for &e in current.elements() {
        owner[edges[e].0] = Some(e);
        owner[edges[e].1] = Some(e);
    }
    owner
}

fn conflicts(edges: &[(usize, usize)], owner: &[Option<usize>], t: &[usize]) -> Vec<usize> {
    let mut removed: Vec<usize> = t
        .iter()
        .flat_map(|&e| [owner[edges[e].0], owner[edges[e].1]])
        .flatten()
        .collect();
    removed.sort_unstable();
    removed.dedup();
    removed
}

/// Visits every augmentation of size `1..=kappa` in lexicographic order of
/// the sorted edge lists until `visit` breaks.
pub fn for_each_augmentation<B>(
    vertices: usize,
    edges: &[(usize, usize)],
    current: &IntegralOutcome,
    kappa: usize,
    mut visit: impl FnMut(&Augmentation) -> ControlFlow<B>,
) -> Option<B> {
    let owner = vertex_owner(vertices, edges, current);
    let mut used = vec![false; vertices];
    let mut chosen = Vec::with_capacity(kappa);

    #[allow(clippy::too_many_arguments)]
    fn dfs<B>(
        edges: &[(usize, usize)],
        current: &IntegralOutcome,
        owner: &[Option<usize>],
        kappa: usize,
        next: usize,
        used: &mut [bool],
        chosen: &mut Vec<usize>,
        visit: &mut impl FnMut(&Augmentation) -> ControlFlow<B>,
    ) -> ControlFlow<B> {
        for e in next..edges.len() {
            let (u, v) = edges[e];
            if current.contains(e) || used[u] || used[v] {
                continue;
            }
            used[u] = true;
            used[v] = true;
            chosen.push(e);
            let aug = Augmentation {
                edges: chosen.clone(),
                removed: conflicts(edges, owner, chosen),
            };
            let mut flow = visit(&aug);
            if flow.is_continue() && chosen.len() < kappa {
                flow = dfs(edges, current, owner, kappa, e + 1, used, chosen, visit);
            }
            chosen.pop();
            used[u] = false;
            used[v] = false;
            flow?;
        }
        ControlFlow::Continue(())
    }

    match dfs(edges, current, &owner, kappa, 0, &mut used, &mut chosen, &mut visit) {
        ControlFlow::Break(b) => Some(b),
        ControlFlow::Continue(()) => None,
    }
}

/// All augmentations of size `1..=kappa`, lexicographic.
pub fn enumerate_augmentations(
    vertices: usize,
    edges: &[(usize, usize)],
    current: &IntegralOutcome,
    kappa: usize,
) -> Vec<Augmentation> {
    let mut all = Vec::new();
    for_each_augmentation::<()>(vertices, edges, current, kappa, |aug| {
        all.push(aug.clone());
        ControlFlow::Continue(())
    });
    all
}

fn graph_of<S: Scalar>(inst: &Instance<S>) -> Result<(usize, &[(usize, usize)])> {
    match inst.constraint() {
        ConstraintSpec::Matching { vertices, edges } => Ok((*vertices, edges)),
        other => Err(CoreError::Unsupported(format!(
            "matching local search needs a matching constraint, got {}",
            other.type_name()
        ))),
    }
}

/// Augmentation local search from the empty matching with
/// `F = sum_i ln(1 + 2 kappa + u_i)`. The outcome lies in the
/// `(delta, 8 + 6 / delta)`-core.
pub fn local_search_matching<S: Scalar>(inst: &Instance<S>, delta: S) -> Result<SolverReport<S>> {
    let (vertices, _) = graph_of(inst)?;
    let config = MatchSearchConfig::new(delta, inst.n_agents(), vertices, inst.n_elements())?;
    local_search_matching_with(inst, &config)
}

pub fn local_search_matching_with<S: Scalar>(inst: &Instance<S>, config: &MatchSearchConfig<S>) -> Result<SolverReport<S>> {
    let (vertices, edges) = graph_of(inst)?;
    let params = SmoothNashParams::new(config.ell)?;
    let mut outcome = IntegralOutcome::empty();
    let mut utils = inst.utility_vector(&outcome);
    let mut value = smooth_nash(inst, &outcome, &params)?;
    let mut trace = vec![value];
    let mut iterations = 0;
    loop {
        let found = for_each_augmentation(vertices, edges, &outcome, config.kappa, |aug| {
            let gain = delta_change(inst, &utils, &aug.removed, &aug.edges, config.ell);
            if gain >= config.threshold {
                ControlFlow::Break((aug.clone(), gain))
            } else {
                ControlFlow::Continue(())
            }
        });
        let Some((aug, gain)) = found else { break };
        iterations += 1;
        if iterations > config.max_iterations {
            return Err(CoreError::IterationCap { cap: config.max_iterations });
        }
        outcome = aug.apply(&outcome);
        utils = inst.utility_vector(&outcome);
        value += gain;
        trace.push(value);
    }
    let mut report = SolverReport::new("matching_local_search");
    report.outcome = Some(outcome);
    report.objective_trace = trace;
    report.iterations = iterations;
    report.diagnostics.delta = Some(config.delta);
    report.diagnostics.kappa = Some(config.kappa);
    report.diagnostics.smoothing = Some(config.ell);
    report.diagnostics.threshold = Some(config.threshold);
    report.diagnostics.iteration_cap = Some(config.max_iterations);
    Ok(report)
}

/// Edge weights `w_j = sum_i u_ij / (u_i(c) + 1)` and
/// `w'_j = sum_i u_ij / (u_i(c) + 3 kappa + 1)` for the current outcome.
pub fn augmentation_weights<S: Scalar>(inst: &Instance<S>, current: &IntegralOutcome, kappa: usize) -> (Vec<S>, Vec<S>) {
    let utils = inst.utility_vector(current);
    let shift = count::<S>(3 * kappa + 1);
    let m = inst.n_elements();
    let mut w = vec![S::zero(); m];
    let mut w_prime = vec![S::zero(); m];
    for (row, &u) in inst.utilities().iter().zip(&utils) {
        for j in 0..m {
            w[j] += row[j] / (u + S::one());
            w_prime[j] += row[j] / (u + shift);
        }
    }
    (w, w_prime)
}

/// Multiset of augmentations drawn from `target` whose total gain is at least
/// `kappa W' - (kappa + 1) W`.
///
/// The symmetric difference of the two matchings splits into alternating
/// paths and cycles. Each component's target edges `T_d`, in traversal
/// order, are added `kappa` times when `|T_d| <= kappa`; longer ones
/// contribute their `|T_d|` cyclic windows of `kappa` consecutive edges.
pub fn build_opt_multiset<S: Scalar>(
    vertices: usize,
    edges: &[(usize, usize)],
    current: &IntegralOutcome,
    target: &IntegralOutcome,
    kappa: usize,
    w: &[S],
    w_prime: &[S],
) -> Result<Vec<Augmentation>> {
    let m = edges.len();
    if kappa == 0 {
        return Err(CoreError::Domain("kappa must be at least 1".into()));
    }
    if w.len() != m || w_prime.len() != m {
        return Err(CoreError::Validation("weight vectors must have one entry per edge".into()));
    }
    if let Some(j) = (0..m).find(|&j| w[j] < w_prime[j]) {
        return Err(CoreError::Validation(format!("weight precondition fails at edge {j}: w < w'")));
    }
    for c in [current, target] {
        if c.elements().iter().any(|&e| e >= m) || !is_matching(c, edges, vertices) {
            return Err(CoreError::Validation("both outcomes must be matchings".into()));
        }
    }

    // Adjacency restricted to the symmetric difference.
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); vertices];
    for e in 0..m {
        if current.contains(e) != target.contains(e) {
            incident[edges[e].0].push(e);
            incident[edges[e].1].push(e);
        }
    }
    let mut edge_done = vec![false; m];
    let mut components: Vec<Vec<usize>> = Vec::new();
    let walk = |start: usize, edge_done: &mut Vec<bool>| {
        let mut sequence = Vec::new();
        let mut at = start;
        while let Some(&e) = incident[at].iter().find(|&&e| !edge_done[e]) {
            edge_done[e] = true;
            sequence.push(e);
            let (u, v) = edges[e];
            at = if u == at { v } else { u };
        }
        sequence
    };
    for v in 0..vertices {
        if incident[v].len() == 1 && !edge_done[incident[v][0]] {
            components.push(walk(v, &mut edge_done));
        }
    }
    for v in 0..vertices {
        if incident[v].iter().any(|&e| !edge_done[e]) {
            components.push(walk(v, &mut edge_done));
        }
    }

    let owner = vertex_owner(vertices, edges, current);
    let make = |t: Vec<usize>| {
        let removed = conflicts(edges, &owner, &t);
        let mut t = t;
        t.sort_unstable();
        Augmentation { edges: t, removed }
    };
    let mut opt = Vec::new();
    for sequence in components {
        let t_d: Vec<usize> = sequence.into_iter().filter(|&e| target.contains(e)).collect();
        if t_d.len() <= kappa {
            for _ in 0..kappa {
                opt.push(make(t_d.clone()));
            }
        } else {
            for s in 0..t_d.len() {
                opt.push(make((0..kappa).map(|t| t_d[(s + t) % t_d.len()]).collect()));
            }
        }
    }
    Ok(opt)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k22_edges() -> Vec<(usize, usize)> {
        vec![(0, 2), (1, 3), (0, 3), (1, 2)]
    }

    #[test]
    fn kappa_rounds_up() {
        assert_eq!(MatchSearchConfig::<f64>::new(1.0, 2, 4, 4).unwrap().kappa, 2);
        assert_eq!(MatchSearchConfig::<f64>::new(0.3, 2, 4, 4).unwrap().kappa, 7);
        assert_eq!(MatchSearchConfig::<f64>::new(2.0 / 3.0, 2, 4, 4).unwrap().kappa, 3);
        assert!(MatchSearchConfig::<f64>::new(1.5, 2, 4, 4).is_err());
    }

    #[test]
    fn opposite_perfect_matching_is_an_augmentation() {
        let current = IntegralOutcome::new([0, 1]);
        let all = enumerate_augmentations(4, &k22_edges(), &current, 2);
        let opposite = all.iter().find(|a| a.edges == vec![2, 3]).unwrap();
        assert_eq!(opposite.removed, vec![0, 1]);
        assert_eq!(all.len(), 3);
    }

    #[test]
    fn kappa_one_lists_single_edges() {
        let edges = vec![(0, 1), (1, 2), (2, 3)];
        let all = enumerate_augmentations(4, &edges, &IntegralOutcome::empty(), 1);
        let singles: Vec<Vec<usize>> = all.into_iter().map(|a| a.edges).collect();
        assert_eq!(singles, vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn path_of_three_picks_end_edges() {
        let edges = vec![(0, 1), (1, 2), (2, 3)];
        let inst = Instance::new(vec![vec![1.0, 1.0, 1.0]], ConstraintSpec::Matching { vertices: 4, edges }).unwrap();
        let report = local_search_matching(&inst, 1.0).unwrap();
        assert_eq!(report.integral().elements(), &[0, 2]);
    }

    #[test]
    fn identical_matchings_give_empty_multiset() {
        let c = IntegralOutcome::new([0, 1]);
        let w = vec![1.0; 4];
        let opt = build_opt_multiset(4, &k22_edges(), &c, &c, 2, &w, &w).unwrap();
        assert!(opt.is_empty());
    }

    #[test]
    fn weight_precondition_is_checked() {
        let c = IntegralOutcome::new([0]);
        let err = build_opt_multiset(4, &k22_edges(), &c, &c, 2, &[0.0; 4], &[1.0; 4]).unwrap_err();
        assert!(matches!(err, CoreError::Validation(_)));
    }

    #[test]
    fn k22_cycle_bullets() {
        let current = IntegralOutcome::new([0, 1]);
        let target = IntegralOutcome::new([2, 3]);
        let w = vec![1.0, 0.5, 0.25, 0.25];
        let wp = vec![0.5, 0.25, 0.25, 0.125];
        let opt = build_opt_multiset(4, &k22_edges(), &current, &target, 2, &w, &wp).unwrap();
        assert_eq!(opt.len(), 2);
        assert!(opt.iter().all(|t| t.edges == vec![2, 3] && t.removed == vec![0, 1]));
        let total: f64 = opt.iter().map(|t| t.gain(&w, &wp)).sum();
        let big_w = 1.5;
        let big_wp = 0.375;
        assert!(total >= 2.0 * big_wp - 3.0 * big_w - 1e-12);
    }
}
