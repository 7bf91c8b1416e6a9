use serde::Serialize;

use crate::error::Result;
use crate::instance::{FractionalOutcome, Instance};
use crate::scalar::Scalar;

use super::lp::{solve_lp, LinearProgram, RowKind, Sense};
use super::model::PackingModel;
use super::type_optima;

/// Smallest `R` such that some fractional outcome gives every agent at
/// least `V_i / R - 1`, with that outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct MpfResult<S> {
    pub r_value: S,
    pub outcome: FractionalOutcome<S>,
    /// `u_i(w) - (V_i / R - 1)` per agent.
    pub slacks: Vec<S>,
    pub agent_optima: Vec<S>,
    /// Every agent has `V_i = 0`; `R` is then reported as `V_max = 0`.
    pub all_zero: bool,
}

/// Solves `max r s.t. u_i . w >= V_i r - 1, w in P` and returns `R = 1 / r`.
pub fn mpf<S: Scalar>(inst: &Instance<S>) -> Result<MpfResult<S>> {
    let model = PackingModel::new(inst)?;
    let v_type = type_optima(&model)?;
    let agent_optima: Vec<S> = model.agent_type.iter().map(|&t| v_type[t]).collect();
    if v_type.iter().all(|&v| v <= S::zero()) {
        let outcome = FractionalOutcome::zeros(inst.n_elements());
        return Ok(MpfResult {
            r_value: S::zero(),
            slacks: vec![S::zero(); inst.n_agents()],
            outcome,
            agent_optima,
            all_zero: true,
        });
    }
    let c = model.n_classes();
    let mut objective = vec![S::zero(); c + 1];
    objective[c] = S::one();
    let mut lp = LinearProgram::new(Sense::Maximize, objective);
    model.constrain(&mut lp);
    for (row, &v) in model.type_rows.iter().zip(&v_type) {
        if v > S::zero() {
            let mut coefficients = row.clone();
            coefficients.push(-v);
            lp.add_row(coefficients, RowKind::Ge, -S::one());
        }
    }
    let sol = solve_lp(&lp)?;
    let r_hat = sol.x[c];
    let r_value = S::one() / r_hat;
    let outcome = model.expand(&sol.x[..c]);
    let utilities = inst.utility_vector(&outcome);
    let slacks = utilities
        .iter()
        .zip(&agent_optima)
        .map(|(&u, &v)| u - (v / r_value - S::one()))
        .collect();
    Ok(MpfResult {
        r_value,
        outcome,
        slacks,
        agent_optima,
        all_zero: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::ConstraintSpec;

    #[test]
    fn single_agent_single_element() {
        let inst = Instance::new(
            vec![vec![1.0f64]],
            ConstraintSpec::Packing {
                a: vec![vec![1.0f64]],
                b: vec![1.0],
            },
        )
        .unwrap();
        let res = mpf(&inst).unwrap();
        assert!((res.r_value - 0.5).abs() < 1e-9);
        assert!((res.outcome.weights[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn all_zero_instance_is_flagged() {
        let inst = Instance::new(
            vec![vec![0.0, 0.0]],
            ConstraintSpec::Packing {
                a: vec![vec![1.0, 1.0]],
                b: vec![1.0],
            },
        )
        .unwrap();
        let res = mpf(&inst).unwrap();
        assert!(res.all_zero);
        assert_eq!(res.r_value, 0.0);
    }
}
