//! Endowment-based core: a deviating coalition gets a share of the budget
//! instead of a share of utility.

use rand::Rng;
use serde::Serialize;

use crate::caps::SizeCaps;
use crate::error::{CoreError, Result};
use crate::instance::{enumerate_outcomes, ConstraintSpec, FractionalOutcome, Instance, IntegralOutcome, Outcome, OutcomeSpace};
use crate::rounding::substream;
use crate::scalar::{count, lit, Scalar};
use crate::verifier::{
    check_parameters, first_blocking_subset, outcome_utilities, pareto_frontier, CoreCertificate, Deviation, DeviationMode,
    SearchBounds, Verdict, Witness,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EndowmentParams<S> {
    pub delta: S,
    pub alpha: S,
    pub budget: S,
}

impl<S: Scalar> EndowmentParams<S> {
    pub fn new(delta: S, alpha: S, budget: S) -> Result<Self> {
        check_parameters(delta, alpha)?;
        if !(budget > S::zero()) || !budget.is_finite() {
            return Err(CoreError::Domain(format!("budget {budget} must be positive")));
        }
        Ok(EndowmentParams { delta, alpha, budget })
    }

    /// `B (1 - delta) |S| / n`.
    pub fn coalition_budget(&self, size: usize, n: usize) -> S {
        self.budget * (S::one() - self.delta) * count::<S>(size) / count::<S>(n)
    }
}

/// Approval instance: 0/1 utilities, unit sizes, at most `budget` elements.
pub fn approval_instance<S: Scalar>(approvals: Vec<Vec<S>>, budget: S) -> Result<Instance<S>> {
    let m = approvals.first().map_or(0, Vec::len);
    if approvals.iter().flatten().any(|&u| u != S::zero() && u != S::one()) {
        return Err(CoreError::Validation("approval utilities must be 0 or 1".into()));
    }
    Instance::new(
        approvals,
        ConstraintSpec::Packing {
            a: vec![vec![S::one(); m]],
            b: vec![budget],
        },
    )
}

/// Rounds `x` to a 0/1 vector with the same marginals, the sum kept at
/// `floor` or `ceil` of `sum x`, and negatively correlated coordinates.
///
/// Repeatedly takes the two lowest-indexed fractional coordinates and moves
/// mass between them until one becomes integral; a last lone fractional
/// coordinate is rounded on its own.
pub fn dependent_round<S: Scalar, R: Rng>(x: &FractionalOutcome<S>, budget: S, rng: &mut R) -> Result<IntegralOutcome> {
    let tol = S::tolerance();
    if x.weights.iter().any(|&w| !(w >= -tol && w <= S::one() + tol)) {
        return Err(CoreError::Validation("weights must lie in [0, 1]".into()));
    }
    let total: S = x.weights.iter().copied().sum();
    if total > budget + tol {
        return Err(CoreError::Validation(format!("weights sum to {total}, above the budget {budget}")));
    }
    let snap = |w: S| {
        if w <= tol {
            S::zero()
        } else if w >= S::one() - tol {
            S::one()
        } else {
            w
        }
    };
    let mut v: Vec<S> = x.weights.iter().map(|&w| snap(w)).collect();
    let is_fractional = |w: S| w > S::zero() && w < S::one();
    loop {
        let mut open = (0..v.len()).filter(|&j| is_fractional(v[j]));
        let Some(i) = open.next() else { break };
        match open.next() {
            Some(j) => {
                let up = (S::one() - v[i]).min(v[j]);
                let down = v[i].min(S::one() - v[j]);
                let p = down / (up + down);
                if lit::<S>(rng.gen::<f64>()) < p {
                    v[i] += up;
                    v[j] -= up;
                } else {
                    v[i] -= down;
                    v[j] += down;
                }
                v[i] = snap(v[i]);
                v[j] = snap(v[j]);
            }
            None => {
                v[i] = if lit::<S>(rng.gen::<f64>()) < v[i] { S::one() } else { S::zero() };
            }
        }
    }
    Ok(IntegralOutcome::new((0..v.len()).filter(|&j| v[j] == S::one())))
}

/// [`dependent_round`] on draw `index` of the stream seeded with `seed`.
pub fn dependent_round_seeded<S: Scalar>(x: &FractionalOutcome<S>, budget: S, seed: u64, index: u64) -> Result<IntegralOutcome> {
    dependent_round(x, budget, &mut substream(seed, index))
}

/// Searches coalitions by size, then lexicographically, for a deviation
/// `c'` with `A c' <= (1 - delta)(|S| / n) b` and
/// `u_i(c') >= (1 + delta) u_i(c) + alpha` for all `i` in `S`, one strictly.
pub fn endowment_core_check<S: Scalar, O: Outcome<S>>(
    inst: &Instance<S>,
    outcome: &O,
    delta: S,
    alpha: S,
) -> Result<CoreCertificate<S>> {
    endowment_core_check_with(inst, outcome, delta, alpha, &SizeCaps::from_env())
}

pub fn endowment_core_check_with<S: Scalar, O: Outcome<S>>(
    inst: &Instance<S>,
    outcome: &O,
    delta: S,
    alpha: S,
    caps: &SizeCaps,
) -> Result<CoreCertificate<S>> {
    check_parameters(delta, alpha)?;
    outcome.check_elements(inst.n_elements())?;
    let ConstraintSpec::Packing { a, b } = inst.constraint() else {
        return Err(CoreError::Unsupported("endowment core needs a packing instance".into()));
    };
    let n = inst.n_agents();
    if n > caps.verifier_agents {
        return Err(CoreError::SizeCap {
            what: "agents for coalition enumeration",
            cap: caps.verifier_agents,
            actual: n,
        });
    }
    let current = inst.utility_vector(outcome);
    let base: Vec<S> = current.iter().map(|&u| (S::one() + delta) * u + alpha).collect();
    let tol = S::tolerance();
    let mut bounds = SearchBounds {
        mode: DeviationMode::Integral,
        agents: n,
        deviations: 0,
        frontier: 0,
        programs: 0,
        max_coalition_size: 0,
    };
    for k in 1..=n {
        bounds.max_coalition_size = k;
        let share = (S::one() - delta) * count::<S>(k) / count::<S>(n);
        let outcomes = if share <= S::zero() {
            vec![IntegralOutcome::empty()]
        } else {
            let scaled = inst.with_constraint(ConstraintSpec::Packing {
                a: a.clone(),
                b: b.iter().map(|&x| x * share).collect(),
            })?;
            enumerate_outcomes(&scaled, OutcomeSpace::Deviations { relax_matroid: false }, caps.enumerated_outcomes)?
        };
        let utils = outcome_utilities(inst, &outcomes);
        let frontier = pareto_frontier(&utils);
        bounds.deviations += outcomes.len();
        bounds.frontier += frontier.len();
        let mut best: Option<(Vec<usize>, usize)> = None;
        for &d in &frontier {
            let slack = |i: usize| utils[d][i] - base[i];
            if let Some(coalition) = first_blocking_subset(n, k, &slack, tol) {
                if best.as_ref().map_or(true, |(c, _)| coalition < *c) {
                    best = Some((coalition, d));
                }
            }
        }
        if let Some((coalition, d)) = best {
            let slacks = coalition.iter().map(|&i| utils[d][i] - base[i]).collect();
            return Ok(CoreCertificate {
                verdict: Verdict::Blocked,
                delta,
                alpha,
                witness: Some(Witness {
                    coalition,
                    deviation: Deviation::Integral(outcomes[d].clone()),
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

/// `(2 / gamma^4) ln(4B / gamma) + 1` with `gamma = delta / 5`.
pub fn approval_alpha<S: Scalar>(delta: S, budget: S) -> S {
    let gamma = delta / lit(5.0);
    lit::<S>(2.0) / gamma.powi(4) * (lit::<S>(4.0) * budget / gamma).ln() + S::one()
}
