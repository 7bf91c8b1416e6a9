//! Exhaustive `(delta, alpha)`-core, proportionality and Pareto checks.
//!
//! A coalition `S` blocks outcome `c` with deviation `c'` when every member
//! has slack `(|S|/n) u_i(c') - (1 + delta) u_i(c) - alpha >= -1e-9` and at
//! least one member has slack above `1e-9`.

use std::cmp::Ordering;

use serde::Serialize;

use crate::caps::SizeCaps;
use crate::error::{CoreError, Result};
use crate::fractional::{solve_lp, LinearProgram, PackingModel, RowKind, Sense};
use crate::instance::{
    enumerate_outcomes, ConstraintSpec, FractionalOutcome, Instance, IntegralOutcome, OptimumMode, Outcome, OutcomeSpace,
};
use crate::objective::nash_value_of;
use crate::scalar::{count, lit, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Blocked,
    Clean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationMode {
    Integral,
    Fractional,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", bound = "S: Scalar")]
pub enum Deviation<S> {
    Integral(IntegralOutcome),
    Fractional(FractionalOutcome<S>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct Witness<S> {
    pub coalition: Vec<usize>,
    pub deviation: Deviation<S>,
    /// `(|S|/n) u_i(c') - (1 + delta) u_i(c) - alpha` per coalition member.
    pub slacks: Vec<S>,
}

/// What the search covered.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchBounds {
    pub mode: DeviationMode,
    pub agents: usize,
    /// Deviations enumerated (integral mode).
    pub deviations: usize,
    /// Deviations left after removing Pareto-dominated utility vectors.
    pub frontier: usize,
    /// Coalition programs solved (fractional mode).
    pub programs: usize,
    pub max_coalition_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct CoreCertificate<S> {
    pub verdict: Verdict,
    pub delta: S,
    pub alpha: S,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness<S>>,
    pub bounds: SearchBounds,
}

impl<S: Scalar> CoreCertificate<S> {
    pub fn is_blocked(&self) -> bool {
        self.verdict == Verdict::Blocked
    }
}

/// Exhaustive verifier with configurable caps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verifier {
    pub caps: SizeCaps,
    /// Let matroid deviations be any independent set instead of a basis.
    pub relax_matroid: bool,
}

impl Default for Verifier {
    fn default() -> Self {
        Verifier {
            caps: SizeCaps::from_env(),
            relax_matroid: false,
        }
    }
}

/// Enumerated deviations with their utility vectors.
struct DeviationTable<S> {
    outcomes: Vec<IntegralOutcome>,
    utils: Vec<Vec<S>>,
    enumerated: usize,
}

fn strict_tol<S: Scalar>() -> S {
    S::tolerance()
}

/// Utility vectors of many outcomes; packing instances go through element
/// classes so large symmetric instances stay cheap.
pub(crate) fn outcome_utilities<S: Scalar>(inst: &Instance<S>, outcomes: &[IntegralOutcome]) -> Vec<Vec<S>> {
    if !matches!(inst.constraint(), ConstraintSpec::Packing { .. }) {
        return outcomes.iter().map(|c| inst.utility_vector(c)).collect();
    }
    let classes = inst.element_classes();
    let mut class_of = vec![0; inst.n_elements()];
    for (k, class) in classes.iter().enumerate() {
        for &j in class {
            class_of[j] = k;
        }
    }
    outcomes
        .iter()
        .map(|c| {
            let mut counts = vec![0usize; classes.len()];
            for &j in c.elements() {
                counts[class_of[j]] += 1;
            }
            inst.utilities()
                .iter()
                .map(|row| {
                    counts
                        .iter()
                        .zip(&classes)
                        .filter(|(&k, _)| k > 0)
                        .map(|(&k, class)| count::<S>(k) * row[class[0]])
                        .sum()
                })
                .collect()
        })
        .collect()
}

impl Verifier {
    pub fn new(caps: SizeCaps) -> Self {
        Verifier {
            caps,
            relax_matroid: false,
        }
    }

    pub fn relaxed(mut self, relax: bool) -> Self {
        self.relax_matroid = relax;
        self
    }

    fn space(&self) -> OutcomeSpace {
        OutcomeSpace::Deviations {
            relax_matroid: self.relax_matroid,
        }
    }

    fn deviations<S: Scalar>(&self, inst: &Instance<S>) -> Result<DeviationTable<S>> {
        let outcomes = enumerate_outcomes(inst, self.space(), self.caps.enumerated_outcomes)?;
        let utils = outcome_utilities(inst, &outcomes);
        Ok(DeviationTable {
            enumerated: outcomes.len(),
            outcomes,
            utils,
        })
    }

    fn check_agents<S: Scalar>(&self, inst: &Instance<S>) -> Result<()> {
        if inst.n_agents() > self.caps.verifier_agents {
            return Err(CoreError::SizeCap {
                what: "agents for coalition enumeration",
                cap: self.caps.verifier_agents,
                actual: inst.n_agents(),
            });
        }
        Ok(())
    }

    /// Searches every nonempty coalition, smallest first and
    /// lexicographically within a size, for a deviation that blocks
    /// `outcome`. The first blocking pair in that order is the witness.
    pub fn find_blocking_coalition<S: Scalar, O: Outcome<S>>(
        &self,
        inst: &Instance<S>,
        outcome: &O,
        delta: S,
        alpha: S,
        mode: DeviationMode,
    ) -> Result<CoreCertificate<S>> {
        check_parameters(delta, alpha)?;
        outcome.check_elements(inst.n_elements())?;
        self.check_agents(inst)?;
        let current = inst.utility_vector(outcome);
        match mode {
            DeviationMode::Integral => self.integral_search(inst, &current, delta, alpha, None),
            DeviationMode::Fractional => self.fractional_search(inst, &current, delta, alpha),
        }
    }

    /// Integral-mode check of a single coalition; no agent cap applies.
    pub fn check_coalition<S: Scalar, O: Outcome<S>>(
        &self,
        inst: &Instance<S>,
        outcome: &O,
        coalition: &[usize],
        delta: S,
        alpha: S,
    ) -> Result<CoreCertificate<S>> {
        check_parameters(delta, alpha)?;
        outcome.check_elements(inst.n_elements())?;
        let mut members = coalition.to_vec();
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return Err(CoreError::Validation("coalition is empty".into()));
        }
        if let Some(&i) = members.iter().find(|&&i| i >= inst.n_agents()) {
            return Err(CoreError::IndexOutOfRange {
                what: "agent",
                index: i,
                len: inst.n_agents(),
            });
        }
        let current = inst.utility_vector(outcome);
        self.integral_search(inst, &current, delta, alpha, Some(&members))
    }

    fn integral_search<S: Scalar>(
        &self,
        inst: &Instance<S>,
        current: &[S],
        delta: S,
        alpha: S,
        only: Option<&[usize]>,
    ) -> Result<CoreCertificate<S>> {
        let n = inst.n_agents();
        let table = self.deviations(inst)?;
        let frontier = pareto_frontier(&table.utils);
        let base: Vec<S> = current.iter().map(|&u| (S::one() + delta) * u + alpha).collect();
        let tol = strict_tol::<S>();
        let mut bounds = SearchBounds {
            mode: DeviationMode::Integral,
            agents: n,
            deviations: table.enumerated,
            frontier: frontier.len(),
            programs: 0,
            max_coalition_size: 0,
        };
        let sizes: Vec<usize> = match only {
            Some(members) => vec![members.len()],
            None => (1..=n).collect(),
        };
        for k in sizes {
            bounds.max_coalition_size = k;
            let scale = count::<S>(k) / count::<S>(n);
            let mut best: Option<(Vec<usize>, usize)> = None;
            for &d in &frontier {
                let slack = |i: usize| scale * table.utils[d][i] - base[i];
                let candidate = match only {
                    Some(members) => {
                        let ok = members.iter().all(|&i| slack(i) >= -tol) && members.iter().any(|&i| slack(i) > tol);
                        ok.then(|| members.to_vec())
                    }
                    None => first_blocking_subset(n, k, &slack, tol),
                };
                if let Some(coalition) = candidate {
                    let better = match &best {
                        None => true,
                        Some((c, _)) => coalition < *c,
                    };
                    if better {
                        best = Some((coalition, d));
                    }
                }
            }
            if let Some((coalition, d)) = best {
                let slacks = coalition.iter().map(|&i| scale * table.utils[d][i] - base[i]).collect();
                return Ok(CoreCertificate {
                    verdict: Verdict::Blocked,
                    delta,
                    alpha,
                    witness: Some(Witness {
                        coalition,
                        deviation: Deviation::Integral(table.outcomes[d].clone()),
                        slacks,
                    }),
                    bounds,
                });
            }
        }
        Ok(CoreCertificate {
            verdict: Verdict::Clean,
            delta,
            alpha,
            witness: None,
            bounds,
        })
    }

    fn fractional_search<S: Scalar>(&self, inst: &Instance<S>, current: &[S], delta: S, alpha: S) -> Result<CoreCertificate<S>> {
        let model = PackingModel::new(inst)?;
        let n = inst.n_agents();
        let c = model.n_classes();
        let base: Vec<S> = current.iter().map(|&u| (S::one() + delta) * u + alpha).collect();
        let verdict_tol = S::verdict_tolerance();
        let mut bounds = SearchBounds {
            mode: DeviationMode::Fractional,
            agents: n,
            deviations: 0,
            frontier: 0,
            programs: 0,
            max_coalition_size: 0,
        };
        for k in 1..=n {
            bounds.max_coalition_size = k;
            let scale = count::<S>(k) / count::<S>(n);
            let mut coalition: Vec<usize> = (0..k).collect();
            loop {
                // Stage 1: push every member strictly above its target.
                let mut objective = vec![S::zero(); c + 1];
                objective[c] = S::one();
                let mut lp = LinearProgram::new(Sense::Maximize, objective);
                model.constrain(&mut lp);
                lp.set_bounds(c, S::neg_infinity(), None);
                for &i in &coalition {
                    let mut row: Vec<S> = model.u[i].iter().map(|&x| scale * x).collect();
                    row.push(-S::one());
                    lp.add_row(row, RowKind::Ge, base[i]);
                }
                bounds.programs += 1;
                let stage1 = solve_lp(&lp)?;
                let t = stage1.x[c];
                let mut witness_w = None;
                if t > verdict_tol {
                    witness_w = Some(stage1.x[..c].to_vec());
                } else if t >= -strict_tol::<S>() {
                    // Stage 2: everyone weakly above target, total slack maximized.
                    let mut objective = vec![S::zero(); c];
                    for &i in &coalition {
                        for (o, &x) in objective.iter_mut().zip(&model.u[i]) {
                            *o += scale * x;
                        }
                    }
                    let mut lp = LinearProgram::new(Sense::Maximize, objective);
                    model.constrain(&mut lp);
                    for &i in &coalition {
                        let row = model.u[i].iter().map(|&x| scale * x).collect();
                        lp.add_row(row, RowKind::Ge, base[i] - strict_tol::<S>());
                    }
                    bounds.programs += 1;
                    if let Ok(stage2) = solve_lp(&lp) {
                        let total: S = coalition.iter().map(|&i| base[i]).sum();
                        if stage2.value - total > verdict_tol {
                            witness_w = Some(stage2.x);
                        }
                    }
                }
                if let Some(w) = witness_w {
                    let deviation = model.expand(&w);
                    let utils = inst.utility_vector(&deviation);
                    let slacks = coalition.iter().map(|&i| scale * utils[i] - base[i]).collect();
                    return Ok(CoreCertificate {
                        verdict: Verdict::Blocked,
                        delta,
                        alpha,
                        witness: Some(Witness {
                            coalition,
                            deviation: Deviation::Fractional(deviation),
                            slacks,
                        }),
                        bounds,
                    });
                }
                if !crate::instance::next_combination(&mut coalition, n) {
                    break;
                }
            }
        }
        Ok(CoreCertificate {
            verdict: Verdict::Clean,
            delta,
            alpha,
            witness: None,
            bounds,
        })
    }

    /// Largest `min_{i in S} [(|S|/n) u_i(c') - (1 + delta) u_i(c)]` over
    /// coalitions and integral deviations, floored at zero: the outcome is in
    /// the `(delta, alpha)`-core for every larger `alpha`.
    pub fn core_deficit<S: Scalar, O: Outcome<S>>(&self, inst: &Instance<S>, outcome: &O, delta: S) -> Result<S> {
        check_parameters(delta, S::zero())?;
        outcome.check_elements(inst.n_elements())?;
        self.check_agents(inst)?;
        let n = inst.n_agents();
        let current = inst.utility_vector(outcome);
        let table = self.deviations(inst)?;
        let frontier = pareto_frontier(&table.utils);
        let mut deficit = S::zero();
        let mut gaps = vec![S::zero(); n];
        for &d in &frontier {
            for k in 1..=n {
                let scale = count::<S>(k) / count::<S>(n);
                for i in 0..n {
                    gaps[i] = scale * table.utils[d][i] - (S::one() + delta) * current[i];
                }
                gaps.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
                deficit = deficit.max(gaps[k - 1]);
            }
        }
        Ok(deficit)
    }

    /// `u_i(c) >= beta V_i / n - 1e-9` for every agent.
    pub fn is_proportional<S: Scalar, O: Outcome<S>>(
        &self,
        inst: &Instance<S>,
        outcome: &O,
        beta: S,
        mode: OptimumMode,
    ) -> Result<ProportionalityReport<S>> {
        outcome.check_elements(inst.n_elements())?;
        let optima = inst.agent_optima_with(mode, &self.caps)?;
        let n = count::<S>(inst.n_agents());
        let margins: Vec<S> = inst
            .utility_vector(outcome)
            .iter()
            .zip(&optima)
            .map(|(&u, &v)| u - beta * v / n)
            .collect();
        Ok(ProportionalityReport {
            proportional: margins.iter().all(|&m| m >= -strict_tol::<S>()),
            margins,
        })
    }

    /// No deviation leaves every agent weakly better and one strictly.
    pub fn is_pareto_optimal<S: Scalar, O: Outcome<S>>(&self, inst: &Instance<S>, outcome: &O) -> Result<ParetoReport> {
        outcome.check_elements(inst.n_elements())?;
        let all: Vec<usize> = (0..inst.n_agents()).collect();
        let cert = self.check_coalition(inst, outcome, &all, S::zero(), S::zero())?;
        Ok(ParetoReport {
            optimal: !cert.is_blocked(),
            dominating: cert.witness.map(|w| match w.deviation {
                Deviation::Integral(c) => c,
                Deviation::Fractional(_) => unreachable!("integral search"),
            }),
        })
    }

    /// Global maximizer of `sum_i ln(ell + u_i)` over feasible outcomes;
    /// `ell = 0` uses the two-tier order (positive agents, then product).
    /// Ties go to the lexicographically smallest element list.
    pub fn exact_smooth_mnw<S: Scalar>(&self, inst: &Instance<S>, ell: S) -> Result<IntegralOutcome> {
        if !(ell >= S::zero()) {
            return Err(CoreError::Domain(format!("smoothing constant {ell} must be >= 0")));
        }
        let outcomes = enumerate_outcomes(inst, OutcomeSpace::Feasible, self.caps.enumerated_outcomes)?;
        let utils = outcome_utilities(inst, &outcomes);
        let tol = lit::<S>(1e-12);
        let mut best: Option<usize> = None;
        let mut best_value = None;
        for (k, u) in utils.iter().enumerate() {
            let value = nash_value_of(inst, u, ell);
            let take = match best_value {
                None => true,
                Some(bv) => match value.compare(&bv, tol) {
                    Ordering::Greater => true,
                    Ordering::Equal => outcomes[k] < outcomes[best.unwrap()],
                    Ordering::Less => false,
                },
            };
            if take {
                best = Some(k);
                best_value = Some(value);
            }
        }
        best.map(|k| outcomes[k].clone())
            .ok_or_else(|| CoreError::Validation("no feasible outcome".into()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct ProportionalityReport<S> {
    pub proportional: bool,
    /// `u_i(c) - beta V_i / n`.
    pub margins: Vec<S>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParetoReport {
    pub optimal: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dominating: Option<IntegralOutcome>,
}

pub(crate) fn check_parameters<S: Scalar>(delta: S, alpha: S) -> Result<()> {
    if !(delta >= S::zero()) || !(alpha >= S::zero()) || !delta.is_finite() || !alpha.is_finite() {
        return Err(CoreError::Domain(format!("delta {delta} and alpha {alpha} must be finite and >= 0")));
    }
    Ok(())
}

/// Lexicographically first `k`-subset of agents with every slack `>= -tol`
/// and some slack `> tol`.
pub(crate) fn first_blocking_subset<S: Scalar>(n: usize, k: usize, slack: &impl Fn(usize) -> S, tol: S) -> Option<Vec<usize>> {
    let eligible: Vec<usize> = (0..n).filter(|&i| slack(i) >= -tol).collect();
    if eligible.len() < k {
        return None;
    }
    let mut chosen = eligible[..k].to_vec();
    if chosen.iter().any(|&i| slack(i) > tol) {
        return Some(chosen);
    }
    let strict = eligible[k..].iter().copied().find(|&i| slack(i) > tol)?;
    chosen[k - 1] = strict;
    Some(chosen)
}

/// Indices of utility vectors not weakly dominated by an earlier kept
/// vector, scanning in descending order of total utility. Among identical
/// vectors the first enumerated is kept.
pub(crate) fn pareto_frontier<S: Scalar>(utils: &[Vec<S>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..utils.len()).collect();
    let totals: Vec<S> = utils.iter().map(|u| u.iter().copied().sum()).collect();
    order.sort_by(|&a, &b| totals[b].partial_cmp(&totals[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for d in order {
        let dominated = kept
            .iter()
            .any(|&k| utils[k].iter().zip(&utils[d]).all(|(&x, &y)| x >= y));
        if !dominated {
            kept.push(d);
        }
    }
    kept.sort_unstable();
    kept
}

/// [`Verifier::find_blocking_coalition`] with default caps.
pub fn find_blocking_coalition<S: Scalar, O: Outcome<S>>(
    inst: &Instance<S>,
    outcome: &O,
    delta: S,
    alpha: S,
    mode: DeviationMode,
) -> Result<CoreCertificate<S>> {
    Verifier::default().find_blocking_coalition(inst, outcome, delta, alpha, mode)
}

pub fn is_proportional<S: Scalar, O: Outcome<S>>(
    inst: &Instance<S>,
    outcome: &O,
    beta: S,
) -> Result<ProportionalityReport<S>> {
    Verifier::default().is_proportional(inst, outcome, beta, OptimumMode::Integral)
}

pub fn is_pareto_optimal<S: Scalar, O: Outcome<S>>(inst: &Instance<S>, outcome: &O) -> Result<ParetoReport> {
    Verifier::default().is_pareto_optimal(inst, outcome)
}

pub fn exact_smooth_mnw<S: Scalar>(inst: &Instance<S>, ell: S) -> Result<IntegralOutcome> {
    Verifier::default().exact_smooth_mnw(inst, ell)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexicographic_blocking_subset() {
        let slacks = [0.0, -1.0, 0.0, 0.0, 0.5];
        let f = |i: usize| slacks[i];
        assert_eq!(first_blocking_subset(5, 2, &f, 1e-9), Some(vec![0, 4]));
        assert_eq!(first_blocking_subset(5, 4, &f, 1e-9), Some(vec![0, 2, 3, 4]));
        assert_eq!(first_blocking_subset(5, 5, &f, 1e-9), None);
    }

    #[test]
    fn frontier_drops_dominated_vectors() {
        let utils = vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 2.0], vec![1.0, 1.0]];
        assert_eq!(pareto_frontier(&utils), vec![1, 2]);
    }

    #[test]
    fn free_element_breaks_pareto_optimality() {
        let inst = Instance::new(vec![vec![1.0, 0.5, 0.0]], ConstraintSpec::UniformMatroid { rank: 2 }).unwrap();
        let report = is_pareto_optimal(&inst, &IntegralOutcome::new([0])).unwrap();
        assert!(!report.optimal);
        assert_eq!(report.dominating.unwrap().elements(), &[0, 1]);
    }

    #[test]
    fn single_feasible_outcome_is_pareto_optimal() {
        let inst = Instance::new(vec![vec![1.0, 0.5]], ConstraintSpec::UniformMatroid { rank: 2 }).unwrap();
        assert!(is_pareto_optimal(&inst, &IntegralOutcome::new([0, 1])).unwrap().optimal);
    }
}
