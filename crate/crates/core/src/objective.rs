//! Smooth Nash welfare `F(c) = sum_i ln(ell + u_i(c))` and its incremental
//! forms.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::instance::{Instance, IntegralOutcome, Outcome};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothNashParams<S> {
    pub ell: S,
    /// With `ell = 0`, compare outcomes by the number of agents with positive
    /// utility first and the product of those utilities second.
    pub leximin: bool,
}

impl<S: Scalar> SmoothNashParams<S> {
    pub fn new(ell: S) -> Result<Self> {
        if !(ell >= S::zero()) || !ell.is_finite() {
            return Err(CoreError::Domain(format!("smoothing constant {ell} must be finite and >= 0")));
        }
        Ok(SmoothNashParams { ell, leximin: true })
    }

    pub fn strict(ell: S) -> Result<Self> {
        Ok(SmoothNashParams {
            leximin: false,
            ..Self::new(ell)?
        })
    }
}

/// Nash welfare value under the two-tier convention: agents counted, then
/// the log-sum over counted agents.
///
/// For `ell > 0` every agent counts. For `ell = 0` only agents with positive
/// utility count, and all-zero agents are left out entirely.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NashValue<S> {
    pub positive: usize,
    pub log_sum: S,
}

impl<S: Scalar> NashValue<S> {
    /// Total order with `tol` slack on the log-sum tier.
    pub fn compare(&self, other: &Self, tol: S) -> Ordering {
        match self.positive.cmp(&other.positive) {
            Ordering::Equal => {
                if self.log_sum > other.log_sum + tol {
                    Ordering::Greater
                } else if other.log_sum > self.log_sum + tol {
                    Ordering::Less
                } else {
                    Ordering::Equal
                }
            }
            ord => ord,
        }
    }
}

/// Two-tier Nash value of a utility vector.
pub fn nash_value_of<S: Scalar>(inst: &Instance<S>, utils: &[S], ell: S) -> NashValue<S> {
    if ell > S::zero() {
        return NashValue {
            positive: utils.len(),
            log_sum: utils.iter().map(|&u| (ell + u).ln()).sum(),
        };
    }
    let mut positive = 0;
    let mut log_sum = S::zero();
    for (i, &u) in utils.iter().enumerate() {
        if !inst.is_zero_agent(i) && u > S::zero() {
            positive += 1;
            log_sum += u.ln();
        }
    }
    NashValue { positive, log_sum }
}

pub fn nash_value<S: Scalar, O: Outcome<S>>(inst: &Instance<S>, outcome: &O, ell: S) -> Result<NashValue<S>> {
    outcome.check_elements(inst.n_elements())?;
    Ok(nash_value_of(inst, &inst.utility_vector(outcome), ell))
}

/// `F(c)`. With `ell = 0`, all-zero agents are excluded; if some other agent
/// has zero utility the result is the log-sum over positive agents when
/// `leximin` is on (use [`nash_value`] to compare such outcomes) and a domain
/// error otherwise.
pub fn smooth_nash<S: Scalar, O: Outcome<S>>(inst: &Instance<S>, outcome: &O, params: &SmoothNashParams<S>) -> Result<S> {
    let value = nash_value(inst, outcome, params.ell)?;
    if params.ell == S::zero() && value.positive + inst.zero_agents().len() < inst.n_agents() && !params.leximin {
        return Err(CoreError::Domain(
            "ell = 0 with an agent at zero utility; enable the leximin convention".into(),
        ));
    }
    Ok(value.log_sum)
}

/// `F(c - removed + added) - F(c)` from the current utility vector, in
/// `O(n (|removed| + |added|))`. Requires `ell > 0`.
pub fn delta_change<S: Scalar>(inst: &Instance<S>, utils: &[S], removed: &[usize], added: &[usize], ell: S) -> S {
    inst.utilities()
        .iter()
        .zip(utils)
        .map(|(row, &u)| {
            let gain: S = added.iter().map(|&j| row[j]).sum::<S>() - removed.iter().map(|&j| row[j]).sum::<S>();
            if gain == S::zero() {
                S::zero()
            } else {
                (gain / (ell + u)).ln_1p()
            }
        })
        .sum()
}

/// `F(c - remove + add) - F(c)`.
pub fn delta_swap<S: Scalar>(
    inst: &Instance<S>,
    outcome: &IntegralOutcome,
    remove: usize,
    add: usize,
    params: &SmoothNashParams<S>,
) -> Result<S> {
    Outcome::<S>::check_elements(outcome, inst.n_elements())?;
    let m = inst.n_elements();
    for j in [remove, add] {
        if j >= m {
            return Err(CoreError::IndexOutOfRange { what: "element", index: j, len: m });
        }
    }
    if !outcome.contains(remove) {
        return Err(CoreError::Validation(format!("swap removes element {remove}, which is not in the outcome")));
    }
    if outcome.contains(add) {
        return Err(CoreError::Validation(format!("swap adds element {add}, which is already in the outcome")));
    }
    if !(params.ell > S::zero()) {
        return Err(CoreError::Domain("incremental evaluation needs ell > 0".into()));
    }
    let utils = inst.utility_vector(outcome);
    Ok(delta_change(inst, &utils, &[remove], &[add], params.ell))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::ConstraintSpec;

    fn inst(rows: Vec<Vec<f64>>) -> Instance {
        let m = rows[0].len();
        Instance::new(rows, ConstraintSpec::UniformMatroid { rank: m }).unwrap()
    }

    #[test]
    fn ell_one_zero_utilities_give_zero() {
        let inst = inst(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let p = SmoothNashParams::new(1.0).unwrap();
        assert_eq!(smooth_nash(&inst, &IntegralOutcome::empty(), &p).unwrap(), 0.0);
    }

    #[test]
    fn single_agent_utility_three() {
        let inst = inst(vec![vec![1.0, 1.0, 1.0]]);
        let p = SmoothNashParams::new(1.0).unwrap();
        let f = smooth_nash(&inst, &IntegralOutcome::new([0, 1, 2]), &p).unwrap();
        assert!((f - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn ell_zero_strict_rejects_zero_agent() {
        let inst = inst(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let p = SmoothNashParams::strict(0.0).unwrap();
        assert!(matches!(
            smooth_nash(&inst, &IntegralOutcome::new([0]), &p),
            Err(CoreError::Domain(_))
        ));
        let lex = SmoothNashParams::new(0.0).unwrap();
        assert_eq!(smooth_nash(&inst, &IntegralOutcome::new([0]), &lex).unwrap(), 0.0);
    }

    #[test]
    fn two_tier_order_prefers_more_positive_agents() {
        let inst = inst(vec![vec![5.0, 0.0], vec![0.0, 1.0]]);
        let a = nash_value(&inst, &IntegralOutcome::new([0]), 0.0).unwrap();
        let b = nash_value(&inst, &IntegralOutcome::new([0, 1]), 0.0).unwrap();
        assert_eq!(b.compare(&a, 1e-9), Ordering::Greater);
    }

    #[test]
    fn delta_swap_membership_errors() {
        let inst = inst(vec![vec![1.0, 0.5, 0.25]]);
        let p = SmoothNashParams::new(1.0).unwrap();
        let c = IntegralOutcome::new([0]);
        assert!(delta_swap(&inst, &c, 1, 2, &p).is_err());
        assert!(delta_swap(&inst, &c, 0, 0, &p).is_err());
        let d = delta_swap(&inst, &c, 0, 1, &p).unwrap();
        assert!((d - (1.5f64.ln() - 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn identical_columns_swap_to_zero() {
        let inst = inst(vec![vec![0.3, 0.3, 1.0], vec![0.7, 0.7, 0.0]]);
        let p = SmoothNashParams::new(1.0).unwrap();
        assert_eq!(delta_swap(&inst, &IntegralOutcome::new([0, 2]), 0, 1, &p).unwrap(), 0.0);
    }
}
