//! Fractional benchmarks over packing polytopes: the smooth-MNW fractional
//! core with its certificate, and the MPF value.

pub mod lp;
mod mnw;
mod model;
mod mpf;

pub use lp::{solve_lp, LinearProgram, LpSolution, Row, RowKind, Sense};
pub use mnw::{certificate_q, fractional_mnw, fractional_mnw_report, FractionalMnwConfig, MnwCertificate};
pub use model::PackingModel;
pub use mpf::{mpf, MpfResult};

use crate::error::{CoreError, Result};
use crate::instance::Instance;
use crate::scalar::Scalar;

/// `V_i` over the packing polytope.
pub fn fractional_agent_optimum<S: Scalar>(inst: &Instance<S>, agent: usize) -> Result<S> {
    if agent >= inst.n_agents() {
        return Err(CoreError::IndexOutOfRange {
            what: "agent",
            index: agent,
            len: inst.n_agents(),
        });
    }
    let model = PackingModel::new(inst)?;
    let t = model.agent_type[agent];
    Ok(model.maximize_linear(&model.type_rows[t])?.0.max(S::zero()))
}

/// `V_i` over the packing polytope for every agent, one LP per agent type.
pub fn fractional_agent_optima<S: Scalar>(inst: &Instance<S>) -> Result<Vec<S>> {
    let model = PackingModel::new(inst)?;
    let per_type = type_optima(&model)?;
    Ok(model.agent_type.iter().map(|&t| per_type[t]).collect())
}

pub(crate) fn type_optima<S: Scalar>(model: &PackingModel<S>) -> Result<Vec<S>> {
    model
        .type_rows
        .iter()
        .map(|row| {
            if row.iter().all(|&u| u == S::zero()) {
                Ok(S::zero())
            } else {
                Ok(model.maximize_linear(row)?.0.max(S::zero()))
            }
        })
        .collect()
}
