//! Problem data: agents, elements, additive utilities and one feasibility
//! constraint family.

mod enumerate;
mod io;

pub use enumerate::{enumerate_outcomes, OutcomeSpace};
pub(crate) use enumerate::next_combination;
pub use io::InstanceFile;

use serde::{Deserialize, Serialize};

use crate::caps::SizeCaps;
use crate::error::{CoreError, Result};
use crate::matroid::{self, MatroidOracle};
use crate::scalar::Scalar;

/// Feasibility constraint over the element set.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "S: Scalar")]
pub enum ConstraintSpec<S> {
    /// Exactly one element from each group; groups partition the elements.
    PartitionMatroid { groups: Vec<Vec<usize>> },
    /// Solver outcomes have exactly `rank` elements; deviations at most `rank`.
    UniformMatroid { rank: usize },
    /// Elements are edges; bases are spanning forests.
    GraphicMatroid {
        vertices: usize,
        edges: Vec<(usize, usize)>,
    },
    /// Elements are edges; outcomes are matchings.
    Matching {
        vertices: usize,
        edges: Vec<(usize, usize)>,
    },
    /// `A x <= b` with `A` of shape `K x m`, entries in `[0, 1]`.
    Packing { a: Vec<Vec<S>>, b: Vec<S> },
    /// Each of `goods` private goods is assigned to exactly one agent.
    /// Element `g * n + i` means "good `g` goes to agent `i`".
    PrivateGoods { goods: usize },
}

impl<S: Scalar> ConstraintSpec<S> {
    pub fn type_name(&self) -> &'static str {
        match self {
            ConstraintSpec::PartitionMatroid { .. } => "partition_matroid",
            ConstraintSpec::UniformMatroid { .. } => "uniform_matroid",
            ConstraintSpec::GraphicMatroid { .. } => "graphic_matroid",
            ConstraintSpec::Matching { .. } => "matching",
            ConstraintSpec::Packing { .. } => "packing",
            ConstraintSpec::PrivateGoods { .. } => "private_goods",
        }
    }

    /// True for the families whose feasible outcomes are matroid bases.
    pub fn is_matroid(&self) -> bool {
        matches!(
            self,
            ConstraintSpec::PartitionMatroid { .. }
                | ConstraintSpec::UniformMatroid { .. }
                | ConstraintSpec::GraphicMatroid { .. }
                | ConstraintSpec::PrivateGoods { .. }
        )
    }
}

/// Chosen element subset, kept sorted and free of duplicates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct IntegralOutcome {
    chosen: Vec<usize>,
}

impl IntegralOutcome {
    pub fn new(elements: impl IntoIterator<Item = usize>) -> Self {
        let mut chosen: Vec<usize> = elements.into_iter().collect();
        chosen.sort_unstable();
        chosen.dedup();
        IntegralOutcome { chosen }
    }

    pub fn empty() -> Self {
        IntegralOutcome { chosen: Vec::new() }
    }

    pub fn elements(&self) -> &[usize] {
        &self.chosen
    }

    pub fn len(&self) -> usize {
        self.chosen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chosen.is_empty()
    }

    pub fn contains(&self, element: usize) -> bool {
        self.chosen.binary_search(&element).is_ok()
    }

    /// `self - remove + add`.
    pub fn swapped(&self, remove: usize, add: usize) -> Self {
        IntegralOutcome::new(
            self.chosen
                .iter()
                .copied()
                .filter(|&j| j != remove)
                .chain(std::iter::once(add)),
        )
    }

    pub fn without(&self, remove: usize) -> Self {
        IntegralOutcome {
            chosen: self.chosen.iter().copied().filter(|&j| j != remove).collect(),
        }
    }

    /// Indicator vector of length `m`.
    pub fn indicator<S: Scalar>(&self, m: usize) -> Vec<S> {
        let mut x = vec![S::zero(); m];
        for &j in &self.chosen {
            x[j] = S::one();
        }
        x
    }
}

/// Per-element weights in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct FractionalOutcome<S> {
    pub weights: Vec<S>,
}

impl<S: Scalar> FractionalOutcome<S> {
    pub fn new(weights: Vec<S>) -> Self {
        FractionalOutcome { weights }
    }

    pub fn zeros(m: usize) -> Self {
        FractionalOutcome {
            weights: vec![S::zero(); m],
        }
    }

    pub fn from_integral(outcome: &IntegralOutcome, m: usize) -> Self {
        FractionalOutcome {
            weights: outcome.indicator(m),
        }
    }
}

/// Anything agents can derive additive utility from.
pub trait Outcome<S: Scalar> {
    /// Additive utility for one agent's utility row.
    fn utility_for(&self, row: &[S]) -> S;

    /// Validates indices / length against `m` elements.
    fn check_elements(&self, m: usize) -> Result<()>;
}

impl<S: Scalar> Outcome<S> for IntegralOutcome {
    fn utility_for(&self, row: &[S]) -> S {
        self.chosen.iter().map(|&j| row[j]).sum()
    }

    fn check_elements(&self, m: usize) -> Result<()> {
        match self.chosen.last() {
            Some(&j) if j >= m => Err(CoreError::IndexOutOfRange {
                what: "element",
                index: j,
                len: m,
            }),
            _ => Ok(()),
        }
    }
}

impl<S: Scalar> Outcome<S> for FractionalOutcome<S> {
    fn utility_for(&self, row: &[S]) -> S {
        row.iter().zip(&self.weights).map(|(&u, &w)| u * w).sum()
    }

    fn check_elements(&self, m: usize) -> Result<()> {
        if self.weights.len() != m {
            return Err(CoreError::Validation(format!(
                "fractional outcome has {} weights, expected {m}",
                self.weights.len()
            )));
        }
        Ok(())
    }
}

/// Whether an agent optimum is taken over integral or fractional outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimumMode {
    Integral,
    Fractional,
}

/// Agents, elements, a dense utility matrix and a constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance<S = f64> {
    utilities: Vec<Vec<S>>,
    constraint: ConstraintSpec<S>,
    zero_agents: Vec<usize>,
}

impl<S: Scalar> Instance<S> {
    /// Validates shapes, signs and constraint consistency.
    pub fn new(utilities: Vec<Vec<S>>, constraint: ConstraintSpec<S>) -> Result<Self> {
        let n = utilities.len();
        if n == 0 {
            return Err(CoreError::Validation("instance has no agents".into()));
        }
        let m = utilities[0].len();
        if m == 0 {
            return Err(CoreError::Validation("instance has no elements".into()));
        }
        for (i, row) in utilities.iter().enumerate() {
            if row.len() != m {
                return Err(CoreError::Validation(format!(
                    "utility row {i} has {} entries, expected {m}",
                    row.len()
                )));
            }
            for (j, &u) in row.iter().enumerate() {
                if !u.is_finite() || u < S::zero() {
                    return Err(CoreError::Validation(format!(
                        "utility u[{i}][{j}] = {u} must be a finite nonnegative number"
                    )));
                }
            }
        }
        validate_constraint(&constraint, n, m, &utilities)?;
        let zero_agents = zero_rows(&utilities);
        Ok(Instance {
            utilities,
            constraint,
            zero_agents,
        })
    }

    /// Builds a private-goods instance from an `n x goods` value table by
    /// expanding every good into one element per agent.
    pub fn private_goods(values: Vec<Vec<S>>) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(CoreError::Validation("instance has no agents".into()));
        }
        let goods = values[0].len();
        if values.iter().any(|r| r.len() != goods) {
            return Err(CoreError::Validation("ragged private-goods table".into()));
        }
        let utilities = (0..n)
            .map(|i| {
                let mut row = vec![S::zero(); goods * n];
                for g in 0..goods {
                    row[g * n + i] = values[i][g];
                }
                row
            })
            .collect();
        Instance::new(utilities, ConstraintSpec::PrivateGoods { goods })
    }

    pub fn n_agents(&self) -> usize {
        self.utilities.len()
    }

    pub fn n_elements(&self) -> usize {
        self.utilities[0].len()
    }

    pub fn utilities(&self) -> &[Vec<S>] {
        &self.utilities
    }

    pub fn row(&self, agent: usize) -> &[S] {
        &self.utilities[agent]
    }

    pub fn constraint(&self) -> &ConstraintSpec<S> {
        &self.constraint
    }

    /// Agents whose utility row is identically zero.
    pub fn zero_agents(&self) -> &[usize] {
        &self.zero_agents
    }

    pub fn is_zero_agent(&self, agent: usize) -> bool {
        self.zero_agents.binary_search(&agent).is_ok()
    }

    /// True when every nonzero row has maximum exactly one.
    pub fn is_normalized(&self) -> bool {
        self.utilities.iter().all(|row| {
            let max = row_max(row);
            max == S::zero() || max == S::one()
        })
    }

    /// Divides every nonzero row by its maximum entry.
    pub fn normalized(&self) -> Self {
        let utilities = self
            .utilities
            .iter()
            .map(|row| {
                let max = row_max(row);
                if max > S::zero() {
                    row.iter().map(|&u| if u == max { S::one() } else { u / max }).collect()
                } else {
                    row.clone()
                }
            })
            .collect();
        Instance {
            utilities,
            constraint: self.constraint.clone(),
            zero_agents: self.zero_agents.clone(),
        }
    }

    /// Same utilities under a different constraint.
    pub fn with_constraint(&self, constraint: ConstraintSpec<S>) -> Result<Self> {
        Instance::new(self.utilities.clone(), constraint)
    }

    fn check_agent(&self, agent: usize) -> Result<()> {
        if agent >= self.n_agents() {
            return Err(CoreError::IndexOutOfRange {
                what: "agent",
                index: agent,
                len: self.n_agents(),
            });
        }
        Ok(())
    }

    /// Additive utility of `agent` for `outcome`.
    pub fn utility<O: Outcome<S>>(&self, agent: usize, outcome: &O) -> Result<S> {
        self.check_agent(agent)?;
        outcome.check_elements(self.n_elements())?;
        Ok(outcome.utility_for(&self.utilities[agent]))
    }

    /// Utilities of all agents; indices must already be valid.
    pub fn utility_vector<O: Outcome<S>>(&self, outcome: &O) -> Vec<S> {
        self.utilities.iter().map(|row| outcome.utility_for(row)).collect()
    }

    /// Whether `outcome` is a valid solver output: a basis for matroid
    /// families, a matching, a packing-feasible set, or a full assignment of
    /// private goods.
    pub fn is_feasible(&self, outcome: &IntegralOutcome) -> bool {
        if Outcome::<S>::check_elements(outcome, self.n_elements()).is_err() {
            return false;
        }
        match &self.constraint {
            ConstraintSpec::Matching { edges, vertices } => is_matching(outcome, edges, *vertices),
            ConstraintSpec::Packing { a, b } => packing_feasible(outcome, a, b, S::one()),
            _ => {
                let oracle = MatroidOracle::from_instance(self).expect("matroid family");
                oracle.is_basis(outcome.elements())
            }
        }
    }

    /// Whether `outcome` is an admissible coalition deviation. Uniform-matroid
    /// deviations may use at most `rank` elements; other matroid families
    /// require bases unless `relax_matroid` admits all independent sets.
    pub fn is_feasible_deviation(&self, outcome: &IntegralOutcome, relax_matroid: bool) -> bool {
        if Outcome::<S>::check_elements(outcome, self.n_elements()).is_err() {
            return false;
        }
        match &self.constraint {
            ConstraintSpec::UniformMatroid { rank } => outcome.len() <= *rank,
            c if c.is_matroid() && relax_matroid => {
                let oracle = MatroidOracle::from_instance(self).expect("matroid family");
                oracle.is_independent(outcome.elements())
            }
            _ => self.is_feasible(outcome),
        }
    }

    /// Width of a packing constraint: `max_k (sum_j a_kj) / b_k`.
    pub fn width(&self) -> Result<S> {
        width(&self.constraint)
    }

    /// Best utility `agent` can get from one feasible outcome.
    pub fn max_agent_utility(&self, agent: usize, mode: OptimumMode) -> Result<S> {
        self.max_agent_utility_with(agent, mode, &SizeCaps::default())
    }

    pub fn max_agent_utility_with(&self, agent: usize, mode: OptimumMode, caps: &SizeCaps) -> Result<S> {
        self.check_agent(agent)?;
        let row = &self.utilities[agent];
        match (&self.constraint, mode) {
            (c, _) if c.is_matroid() => {
                let oracle = MatroidOracle::from_instance(self)?;
                let basis = matroid::max_weight_basis(&oracle, row);
                Ok(basis.iter().map(|&j| row[j]).sum())
            }
            (ConstraintSpec::Packing { .. }, OptimumMode::Fractional) => {
                crate::fractional::fractional_agent_optimum(self, agent)
            }
            (ConstraintSpec::Matching { .. } | ConstraintSpec::Packing { .. }, OptimumMode::Integral) => {
                if self.n_elements() > caps.brute_force_elements {
                    return Err(CoreError::SizeCap {
                        what: "elements for brute-force agent optimum",
                        cap: caps.brute_force_elements,
                        actual: self.n_elements(),
                    });
                }
                let outcomes = enumerate_outcomes(self, OutcomeSpace::Feasible, usize::MAX)?;
                Ok(outcomes
                    .iter()
                    .map(|c| c.utility_for(row))
                    .fold(S::zero(), S::max))
            }
            (ConstraintSpec::Matching { .. }, OptimumMode::Fractional) => Err(CoreError::Unsupported(
                "fractional optimum needs a packing relaxation; see packing_relaxation()".into(),
            )),
            _ => unreachable!("all constraint families handled"),
        }
    }

    /// `V_i` for every agent.
    pub fn agent_optima(&self, mode: OptimumMode) -> Result<Vec<S>> {
        self.agent_optima_with(mode, &SizeCaps::default())
    }

    pub fn agent_optima_with(&self, mode: OptimumMode, caps: &SizeCaps) -> Result<Vec<S>> {
        if let (ConstraintSpec::Packing { .. }, OptimumMode::Fractional) = (&self.constraint, mode) {
            return crate::fractional::fractional_agent_optima(self);
        }
        if let (ConstraintSpec::Matching { .. } | ConstraintSpec::Packing { .. }, OptimumMode::Integral) =
            (&self.constraint, mode)
        {
            if self.n_elements() > caps.brute_force_elements {
                return Err(CoreError::SizeCap {
                    what: "elements for brute-force agent optimum",
                    cap: caps.brute_force_elements,
                    actual: self.n_elements(),
                });
            }
            let outcomes = enumerate_outcomes(self, OutcomeSpace::Feasible, usize::MAX)?;
            return Ok(self
                .utilities
                .iter()
                .map(|row| outcomes.iter().map(|c| c.utility_for(row)).fold(S::zero(), S::max))
                .collect());
        }
        (0..self.n_agents())
            .map(|i| self.max_agent_utility_with(i, mode, caps))
            .collect()
    }

    /// Packing relaxation of the constraint: degree rows for matchings,
    /// cardinality rows for uniform/partition matroids and private goods.
    /// Packing specs are returned unchanged.
    pub fn packing_relaxation(&self) -> Result<ConstraintSpec<S>> {
        let m = self.n_elements();
        let n = self.n_agents();
        let (a, b) = match &self.constraint {
            ConstraintSpec::Packing { a, b } => (a.clone(), b.clone()),
            ConstraintSpec::UniformMatroid { rank } => (vec![vec![S::one(); m]], vec![S::from_usize(*rank).unwrap()]),
            ConstraintSpec::PartitionMatroid { groups } => group_rows(groups, m),
            ConstraintSpec::PrivateGoods { goods } => {
                let groups: Vec<Vec<usize>> = (0..*goods).map(|g| (g * n..(g + 1) * n).collect()).collect();
                group_rows(&groups, m)
            }
            ConstraintSpec::Matching { vertices, edges } => {
                let mut a = vec![vec![S::zero(); m]; *vertices];
                for (e, &(u, v)) in edges.iter().enumerate() {
                    a[u][e] = S::one();
                    a[v][e] = S::one();
                }
                let keep: Vec<Vec<S>> = a.into_iter().filter(|r| r.iter().any(|&x| x > S::zero())).collect();
                let b = vec![S::one(); keep.len()];
                (keep, b)
            }
            ConstraintSpec::GraphicMatroid { .. } => {
                return Err(CoreError::Unsupported(
                    "graphic matroid polytope has exponentially many rows".into(),
                ))
            }
        };
        Ok(ConstraintSpec::Packing { a, b })
    }

    /// Element classes: maximal sets of elements with identical utility
    /// columns and identical packing columns, each sorted ascending.
    /// Only packing instances are compressed; other families return
    /// singletons because feasibility depends on element identity.
    pub fn element_classes(&self) -> Vec<Vec<usize>> {
        let m = self.n_elements();
        let ConstraintSpec::Packing { a, .. } = &self.constraint else {
            return (0..m).map(|j| vec![j]).collect();
        };
        let mut classes: Vec<Vec<usize>> = Vec::new();
        'next: for j in 0..m {
            for class in classes.iter_mut() {
                let r = class[0];
                if self.utilities.iter().all(|row| row[r] == row[j]) && a.iter().all(|ak| ak[r] == ak[j]) {
                    class.push(j);
                    continue 'next;
                }
            }
            classes.push(vec![j]);
        }
        classes
    }
}

/// Free-function form of [`Instance::normalized`].
pub fn normalize_utilities<S: Scalar>(inst: &Instance<S>) -> Instance<S> {
    inst.normalized()
}

/// Width `max_k (sum_j a_kj) / b_k` of a packing constraint.
pub fn width<S: Scalar>(spec: &ConstraintSpec<S>) -> Result<S> {
    match spec {
        ConstraintSpec::Packing { a, b } => Ok(a
            .iter()
            .zip(b)
            .map(|(row, &bk)| row.iter().copied().sum::<S>() / bk)
            .fold(S::zero(), S::max)),
        other => Err(CoreError::Unsupported(format!(
            "width is defined for packing constraints, got {}",
            other.type_name()
        ))),
    }
}

fn row_max<S: Scalar>(row: &[S]) -> S {
    row.iter().copied().fold(S::zero(), S::max)
}

fn zero_rows<S: Scalar>(utilities: &[Vec<S>]) -> Vec<usize> {
    utilities
        .iter()
        .enumerate()
        .filter(|(_, row)| row.iter().all(|&u| u == S::zero()))
        .map(|(i, _)| i)
        .collect()
}

fn group_rows<S: Scalar>(groups: &[Vec<usize>], m: usize) -> (Vec<Vec<S>>, Vec<S>) {
    let a = groups
        .iter()
        .map(|g| {
            let mut row = vec![S::zero(); m];
            for &j in g {
                row[j] = S::one();
            }
            row
        })
        .collect::<Vec<_>>();
    let b = vec![S::one(); a.len()];
    (a, b)
}

pub(crate) fn is_matching(outcome: &IntegralOutcome, edges: &[(usize, usize)], vertices: usize) -> bool {
    let mut used = vec![false; vertices];
    for &e in outcome.elements() {
        let (u, v) = edges[e];
        if used[u] || used[v] {
            return false;
        }
        used[u] = true;
        used[v] = true;
    }
    true
}

/// `A x <= scale * b` up to tolerance.
pub(crate) fn packing_feasible<S: Scalar>(outcome: &IntegralOutcome, a: &[Vec<S>], b: &[S], scale: S) -> bool {
    a.iter().zip(b).all(|(row, &bk)| {
        let load: S = outcome.elements().iter().map(|&j| row[j]).sum();
        load <= scale * bk + S::tolerance()
    })
}

fn validate_constraint<S: Scalar>(spec: &ConstraintSpec<S>, n: usize, m: usize, utilities: &[Vec<S>]) -> Result<()> {
    let bad = |msg: String| Err(CoreError::Validation(msg));
    match spec {
        ConstraintSpec::PartitionMatroid { groups } => {
            let mut seen = vec![false; m];
            for (g, group) in groups.iter().enumerate() {
                if group.is_empty() {
                    return bad(format!("partition group {g} is empty"));
                }
                for &j in group {
                    if j >= m {
                        return bad(format!("partition group {g} names element {j} >= {m}"));
                    }
                    if seen[j] {
                        return bad(format!("element {j} appears in more than one partition group"));
                    }
                    seen[j] = true;
                }
            }
            if let Some(j) = seen.iter().position(|&s| !s) {
                return bad(format!("element {j} is not covered by any partition group"));
            }
        }
        ConstraintSpec::UniformMatroid { rank } => {
            if *rank == 0 || *rank > m {
                return bad(format!("uniform matroid rank {rank} must lie in 1..={m}"));
            }
        }
        ConstraintSpec::GraphicMatroid { vertices, edges } | ConstraintSpec::Matching { vertices, edges } => {
            if edges.len() != m {
                return bad(format!("graph has {} edges but instance has {m} elements", edges.len()));
            }
            for &(u, v) in edges {
                if u >= *vertices || v >= *vertices {
                    return bad(format!("edge ({u}, {v}) names a vertex >= {vertices}"));
                }
                if u == v && matches!(spec, ConstraintSpec::Matching { .. }) {
                    return bad(format!("self-loop ({u}, {v}) cannot be part of a matching"));
                }
            }
        }
        ConstraintSpec::Packing { a, b } => {
            if a.is_empty() || a.len() != b.len() {
                return bad(format!("packing has {} rows but {} capacities", a.len(), b.len()));
            }
            for (k, row) in a.iter().enumerate() {
                if row.len() != m {
                    return bad(format!("packing row {k} has {} entries, expected {m}", row.len()));
                }
                if row.iter().any(|&x| !(x >= S::zero() && x <= S::one())) {
                    return bad(format!("packing row {k} has an entry outside [0, 1]"));
                }
                if !(b[k] > S::zero()) || !b[k].is_finite() {
                    return bad(format!("packing capacity b[{k}] must be positive"));
                }
            }
        }
        ConstraintSpec::PrivateGoods { goods } => {
            if *goods == 0 || goods * n != m {
                return bad(format!("private goods: {goods} goods x {n} agents != {m} elements"));
            }
            for (i, row) in utilities.iter().enumerate() {
                for (e, &u) in row.iter().enumerate() {
                    if e % n != i && u != S::zero() {
                        return bad(format!("agent {i} values element {e}, which assigns a good to another agent"));
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(rows: Vec<Vec<f64>>, k: usize) -> Instance {
        Instance::new(rows, ConstraintSpec::UniformMatroid { rank: k }).unwrap()
    }

    #[test]
    fn normalize_divides_by_row_max() {
        let inst = uniform(vec![vec![2.0, 4.0, 1.0], vec![0.0, 0.0, 0.0]], 1);
        let norm = normalize_utilities(&inst);
        assert_eq!(norm.row(0), &[0.5, 1.0, 0.25]);
        assert_eq!(norm.row(1), &[0.0, 0.0, 0.0]);
        assert_eq!(norm.zero_agents(), &[1]);
        assert!(norm.is_normalized());
        assert_eq!(norm.normalized(), norm);
    }

    #[test]
    fn negative_utility_is_rejected() {
        let err = Instance::new(vec![vec![1.0, -0.5]], ConstraintSpec::UniformMatroid { rank: 1 }).unwrap_err();
        assert!(matches!(err, CoreError::Validation(_)));
    }

    #[test]
    fn utility_of_empty_and_out_of_range() {
        let inst = uniform(vec![vec![1.0, 0.5]], 1);
        assert_eq!(inst.utility(0, &IntegralOutcome::empty()).unwrap(), 0.0);
        assert_eq!(inst.utility(0, &IntegralOutcome::new([0, 1])).unwrap(), 1.5);
        assert!(matches!(
            inst.utility(3, &IntegralOutcome::empty()),
            Err(CoreError::IndexOutOfRange { what: "agent", .. })
        ));
        assert!(matches!(
            inst.utility(0, &IntegralOutcome::new([2])),
            Err(CoreError::IndexOutOfRange { what: "element", .. })
        ));
        let w = FractionalOutcome::new(vec![0.5, 0.5]);
        assert_eq!(inst.utility(0, &w).unwrap(), 0.75);
    }

    #[test]
    fn matching_feasibility() {
        let edges = vec![(0, 2), (1, 3), (0, 3), (1, 2)];
        let inst = Instance::new(vec![vec![1.0; 4]], ConstraintSpec::Matching { vertices: 4, edges }).unwrap();
        assert!(inst.is_feasible(&IntegralOutcome::new([0, 1])));
        assert!(inst.is_feasible(&IntegralOutcome::new([2, 3])));
        assert!(!inst.is_feasible(&IntegralOutcome::new([0, 2])));
    }

    #[test]
    fn width_formula() {
        let knap = ConstraintSpec::Packing {
            a: vec![vec![1.0; 6]],
            b: vec![3.0],
        };
        assert_eq!(width(&knap).unwrap(), 2.0);
        let loose = ConstraintSpec::Packing {
            a: vec![vec![1.0; 6]],
            b: vec![6.0],
        };
        assert_eq!(width(&loose).unwrap(), 1.0);
        assert!(matches!(
            width::<f64>(&ConstraintSpec::UniformMatroid { rank: 1 }),
            Err(CoreError::Unsupported(_))
        ));
    }

    #[test]
    fn partition_groups_must_cover_disjointly() {
        let rows = vec![vec![1.0, 1.0, 1.0]];
        let overlap = ConstraintSpec::PartitionMatroid {
            groups: vec![vec![0, 1], vec![1, 2]],
        };
        assert!(Instance::new(rows.clone(), overlap).is_err());
        let gap = ConstraintSpec::PartitionMatroid { groups: vec![vec![0, 1]] };
        assert!(Instance::new(rows, gap).is_err());
    }

    #[test]
    fn packing_entries_must_be_scaled() {
        let rows = vec![vec![1.0, 1.0]];
        let spec = ConstraintSpec::Packing {
            a: vec![vec![2.0, 1.0]],
            b: vec![3.0],
        };
        assert!(Instance::new(rows, spec).is_err());
    }

    #[test]
    fn single_element_optimum() {
        let inst = Instance::new(
            vec![vec![1.0f64]],
            ConstraintSpec::Packing {
                a: vec![vec![1.0f64]],
                b: vec![1.0],
            },
        )
        .unwrap();
        assert_eq!(inst.max_agent_utility(0, OptimumMode::Integral).unwrap(), 1.0);
        let v = inst.max_agent_utility(0, OptimumMode::Fractional).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn brute_force_cap_is_enforced() {
        let m = 21;
        let inst = Instance::new(
            vec![vec![1.0; m]],
            ConstraintSpec::Packing {
                a: vec![vec![1.0; m]],
                b: vec![5.0],
            },
        )
        .unwrap();
        assert!(matches!(
            inst.max_agent_utility(0, OptimumMode::Integral),
            Err(CoreError::SizeCap { cap: 20, .. })
        ));
    }

    #[test]
    fn private_goods_expansion() {
        let inst = Instance::private_goods(vec![vec![1.0, 0.5], vec![0.25, 1.0]]).unwrap();
        assert_eq!(inst.n_elements(), 4);
        assert_eq!(inst.row(0), &[1.0, 0.0, 0.5, 0.0]);
        assert_eq!(inst.row(1), &[0.0, 0.25, 0.0, 1.0]);
        assert!(inst.is_feasible(&IntegralOutcome::new([0, 3])));
        assert!(!inst.is_feasible(&IntegralOutcome::new([0, 1])));
        assert!(!inst.is_feasible(&IntegralOutcome::new([0])));
    }

    #[test]
    fn element_classes_merge_identical_packing_columns() {
        let inst = Instance::new(
            vec![vec![1.0, 1.0, 0.5, 1.0]],
            ConstraintSpec::Packing {
                a: vec![vec![0.5, 0.5, 0.5, 1.0]],
                b: vec![2.0],
            },
        )
        .unwrap();
        assert_eq!(inst.element_classes(), vec![vec![0, 1], vec![2], vec![3]]);
    }

    #[test]
    fn generic_over_f32() {
        let inst: Instance<f32> = Instance::new(
            vec![vec![2.0, 4.0]],
            ConstraintSpec::UniformMatroid { rank: 1 },
        )
        .unwrap();
        assert_eq!(inst.normalized().row(0), &[0.5f32, 1.0]);
    }
}
