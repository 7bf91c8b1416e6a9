use crate::error::{CoreError, Result};
use crate::instance::{ConstraintSpec, FractionalOutcome, Instance};
use crate::scalar::{count, Scalar};

use super::lp::{solve_lp, LinearProgram, RowKind, Sense};

/// Packing polytope `{w : A w <= b, 0 <= w <= 1}` with interchangeable
/// elements merged into classes and identical agents merged into types.
///
/// A class variable `W_c` is the total weight on class `c`, bounded by the
/// class size. Spreading it evenly over the members gives an element vector
/// with the same utilities and loads, so every linear program over the
/// element polytope has the same optimum over the class polytope.
#[derive(Debug, Clone)]
pub struct PackingModel<S> {
    pub classes: Vec<Vec<usize>>,
    pub class_size: Vec<S>,
    /// `K x C` loads per unit of class weight.
    pub a: Vec<Vec<S>>,
    pub b: Vec<S>,
    /// `n x C` per-unit utilities.
    pub u: Vec<Vec<S>>,
    /// Agent type of every agent.
    pub agent_type: Vec<usize>,
    /// Representative utility row and multiplicity of each type.
    pub type_rows: Vec<Vec<S>>,
    pub type_count: Vec<usize>,
    pub m: usize,
}

impl<S: Scalar> PackingModel<S> {
    pub fn new(inst: &Instance<S>) -> Result<Self> {
        let ConstraintSpec::Packing { a, b } = inst.constraint() else {
            return Err(CoreError::Unsupported(format!(
                "fractional solvers need a packing constraint, got {}; pass a packing relaxation",
                inst.constraint().type_name()
            )));
        };
        let classes = inst.element_classes();
        let reps: Vec<usize> = classes.iter().map(|c| c[0]).collect();
        let u: Vec<Vec<S>> = inst.utilities().iter().map(|row| reps.iter().map(|&j| row[j]).collect()).collect();
        let mut type_rows: Vec<Vec<S>> = Vec::new();
        let mut type_count = Vec::new();
        let mut agent_type = Vec::with_capacity(u.len());
        for row in &u {
            match type_rows.iter().position(|t| t == row) {
                Some(t) => {
                    type_count[t] += 1;
                    agent_type.push(t);
                }
                None => {
                    agent_type.push(type_rows.len());
                    type_rows.push(row.clone());
                    type_count.push(1);
                }
            }
        }
        Ok(PackingModel {
            class_size: classes.iter().map(|c| count(c.len())).collect(),
            a: a.iter().map(|row| reps.iter().map(|&j| row[j]).collect()).collect(),
            b: b.clone(),
            u,
            agent_type,
            type_rows,
            type_count,
            m: inst.n_elements(),
            classes,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn n_types(&self) -> usize {
        self.type_rows.len()
    }

    /// Adds `A W <= b` and `0 <= W_c <= |c|` for class variables `0..C`
    /// of `lp`, which may carry extra variables after them.
    pub fn constrain(&self, lp: &mut LinearProgram<S>) {
        let vars = lp.vars();
        for (row, &bk) in self.a.iter().zip(&self.b) {
            let mut coefficients = vec![S::zero(); vars];
            coefficients[..self.n_classes()].copy_from_slice(row);
            lp.add_row(coefficients, RowKind::Le, bk);
        }
        for c in 0..self.n_classes() {
            lp.set_bounds(c, S::zero(), Some(self.class_size[c]));
        }
    }

    /// Maximizes `sum_c weights_c W_c` over the class polytope.
    pub fn maximize_linear(&self, weights: &[S]) -> Result<(S, Vec<S>)> {
        let mut lp = LinearProgram::new(Sense::Maximize, weights.to_vec());
        self.constrain(&mut lp);
        let sol = solve_lp(&lp)?;
        Ok((sol.value, sol.x))
    }

    pub fn type_utility(&self, t: usize, w: &[S]) -> S {
        self.type_rows[t].iter().zip(w).map(|(&u, &x)| u * x).sum()
    }

    /// Per-element weights from class totals.
    pub fn expand(&self, w: &[S]) -> FractionalOutcome<S> {
        let mut weights = vec![S::zero(); self.m];
        for (c, class) in self.classes.iter().enumerate() {
            let each = (w[c] / self.class_size[c]).max(S::zero()).min(S::one());
            for &j in class {
                weights[j] = each;
            }
        }
        FractionalOutcome::new(weights)
    }

    /// Class totals of an element vector.
    pub fn aggregate(&self, x: &FractionalOutcome<S>) -> Vec<S> {
        self.classes
            .iter()
            .map(|class| class.iter().map(|&j| x.weights[j]).sum())
            .collect()
    }
}
