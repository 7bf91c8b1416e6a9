//! Dense two-phase tableau simplex.

use crate::error::{CoreError, Result};
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row<S> {
    pub coefficients: Vec<S>,
    pub kind: RowKind,
    pub rhs: S,
}

/// `optimize c.x` subject to rows and `lower <= x <= upper`.
///
/// Lower bounds may be `-inf`; upper bounds are optional.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<S> {
    pub sense: Sense,
    pub objective: Vec<S>,
    pub rows: Vec<Row<S>>,
    pub lower: Vec<S>,
    pub upper: Vec<Option<S>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<S> {
    pub value: S,
    pub x: Vec<S>,
}

impl<S: Scalar> LinearProgram<S> {
    /// Program over `vars` nonnegative variables with no rows.
    pub fn new(sense: Sense, objective: Vec<S>) -> Self {
        let vars = objective.len();
        LinearProgram {
            sense,
            objective,
            rows: Vec::new(),
            lower: vec![S::zero(); vars],
            upper: vec![None; vars],
        }
    }

    pub fn vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, coefficients: Vec<S>, kind: RowKind, rhs: S) -> &mut Self {
        debug_assert_eq!(coefficients.len(), self.vars());
        self.rows.push(Row { coefficients, kind, rhs });
        self
    }

    pub fn set_bounds(&mut self, var: usize, lower: S, upper: Option<S>) -> &mut Self {
        self.lower[var] = lower;
        self.upper[var] = upper;
        self
    }

    /// Objective value at `x`.
    pub fn evaluate(&self, x: &[S]) -> S {
        self.objective.iter().zip(x).map(|(&c, &v)| c * v).sum()
    }
}

/// Column of the standard-form program and how it maps back.
#[derive(Clone, Copy)]
enum Column {
    /// `x_j = lower_j + column`.
    Shifted(usize),
    /// `x_j = column - twin`, for free variables; the twin follows.
    FreePositive(usize),
    FreeNegative(usize),
}

struct Tableau<S> {
    rows: Vec<Vec<S>>,
    obj: Vec<S>,
    basis: Vec<usize>,
    width: usize,
    blocked: Vec<bool>,
}

impl<S: Scalar> Tableau<S> {
    fn rhs(&self, r: usize) -> S {
        self.rows[r][self.width]
    }

    fn price_out(&mut self, costs: &[S]) {
        self.obj = costs.to_vec();
        self.obj.push(S::zero());
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = costs[b];
            if cb != S::zero() {
                for (o, &x) in self.obj.iter_mut().zip(&self.rows[r]) {
                    *o -= cb * x;
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col];
        for x in self.rows[r].iter_mut() {
            *x /= p;
        }
        self.rows[r][col] = S::one();
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[col];
            if f != S::zero() {
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * y;
                }
                row[col] = S::zero();
            }
        }
        let f = self.obj[col];
        if f != S::zero() {
            for (x, &y) in self.obj.iter_mut().zip(&pivot_row) {
                *x -= f * y;
            }
            self.obj[col] = S::zero();
        }
        self.basis[r] = col;
    }

    /// Maximizes the priced-out objective with Bland's rule.
    fn optimize(&mut self) -> Result<()> {
        let tol = S::lp_tolerance();
        let pivot_tol = tol * lit(10.0);
        let limit = 50_000 + 200 * (self.rows.len() + self.width);
        for _ in 0..limit {
            let Some(col) = (0..self.width).find(|&j| !self.blocked[j] && self.obj[j] > tol) else {
                return Ok(());
            };
            let mut best: Option<(usize, S)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][col];
                if a > pivot_tol {
                    let ratio = self.rhs(r) / a;
                    best = match best {
                        None => Some((r, ratio)),
                        Some((br, bv)) => {
                            if ratio < bv - tol || (ratio <= bv + tol && self.basis[r] < self.basis[br]) {
                                Some((r, ratio))
                            } else {
                                Some((br, bv))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = best else {
                return Err(CoreError::LpUnbounded);
            };
            self.pivot(r, col);
        }
        Err(CoreError::Convergence {
            iterations: limit,
            detail: "simplex pivot limit reached".into(),
        })
    }
}

/// Solves `lp`, reporting infeasible and unbounded programs distinctly.
pub fn solve_lp<S: Scalar>(lp: &LinearProgram<S>) -> Result<LpSolution<S>> {
    let n = lp.vars();
    if lp.lower.len() != n || lp.upper.len() != n || lp.rows.iter().any(|r| r.coefficients.len() != n) {
        return Err(CoreError::Validation("linear program dimensions disagree".into()));
    }
    for j in 0..n {
        if let Some(u) = lp.upper[j] {
            if u < lp.lower[j] {
                return Err(CoreError::LpInfeasible);
            }
        }
    }

    // Standard form columns.
    let mut columns = Vec::new();
    for j in 0..n {
        if lp.lower[j].is_finite() {
            columns.push(Column::Shifted(j));
        } else {
            columns.push(Column::FreePositive(j));
            columns.push(Column::FreeNegative(j));
        }
    }
    let coef = |row: &[S], c: &Column| match *c {
        Column::Shifted(j) | Column::FreePositive(j) => row[j],
        Column::FreeNegative(j) => -row[j],
    };
    let shift = |row: &[S]| -> S {
        (0..n)
            .filter(|&j| lp.lower[j].is_finite())
            .map(|j| row[j] * lp.lower[j])
            .sum()
    };

    let mut std_rows: Vec<(Vec<S>, RowKind, S)> = lp
        .rows
        .iter()
        .map(|r| {
            (
                columns.iter().map(|c| coef(&r.coefficients, c)).collect(),
                r.kind,
                r.rhs - shift(&r.coefficients),
            )
        })
        .collect();
    for j in 0..n {
        if let Some(u) = lp.upper[j] {
            let mut row = vec![S::zero(); n];
            row[j] = S::one();
            let coefficients = columns.iter().map(|c| coef(&row, c)).collect();
            let rhs = if lp.lower[j].is_finite() { u - lp.lower[j] } else { u };
            std_rows.push((coefficients, RowKind::Le, rhs));
        }
    }
    for (coefficients, kind, rhs) in std_rows.iter_mut() {
        if *rhs < S::zero() {
            for x in coefficients.iter_mut() {
                *x = -*x;
            }
            *rhs = -*rhs;
            *kind = match *kind {
                RowKind::Le => RowKind::Ge,
                RowKind::Ge => RowKind::Le,
                RowKind::Eq => RowKind::Eq,
            };
        }
    }

    let n_struct = columns.len();
    let n_slack = std_rows.iter().filter(|r| r.1 != RowKind::Eq).count();
    let n_art = std_rows.iter().filter(|r| r.1 != RowKind::Le).count();
    let width = n_struct + n_slack + n_art;
    let mut rows = Vec::with_capacity(std_rows.len());
    let mut basis = Vec::with_capacity(std_rows.len());
    let (mut slack, mut art) = (n_struct, n_struct + n_slack);
    for (coefficients, kind, rhs) in &std_rows {
        let mut row = vec![S::zero(); width + 1];
        row[..n_struct].copy_from_slice(coefficients);
        row[width] = *rhs;
        match kind {
            RowKind::Le => {
                row[slack] = S::one();
                basis.push(slack);
                slack += 1;
            }
            RowKind::Ge => {
                row[slack] = -S::one();
                slack += 1;
                row[art] = S::one();
                basis.push(art);
                art += 1;
            }
            RowKind::Eq => {
                row[art] = S::one();
                basis.push(art);
                art += 1;
            }
        }
        rows.push(row);
    }
    let mut tab = Tableau {
        rows,
        obj: Vec::new(),
        basis,
        width,
        blocked: vec![false; width],
    };

    let art_start = n_struct + n_slack;
    if n_art > 0 {
        let mut phase1 = vec![S::zero(); width];
        for c in phase1[art_start..].iter_mut() {
            *c = -S::one();
        }
        tab.price_out(&phase1);
        tab.optimize()?;
        let infeasibility = tab.obj[width];
        let scale = std_rows.iter().map(|r| r.2.abs()).fold(S::one(), S::max);
        if infeasibility > lit::<S>(1e-7) * scale.max(S::one()) {
            return Err(CoreError::LpInfeasible);
        }
        // Drive artificials out of the basis where possible.
        for r in 0..tab.rows.len() {
            if tab.basis[r] >= art_start {
                if let Some(col) = (0..art_start).find(|&j| tab.rows[r][j].abs() > S::lp_tolerance() * lit(100.0)) {
                    tab.pivot(r, col);
                }
            }
        }
        for b in tab.blocked[art_start..].iter_mut() {
            *b = true;
        }
    }

    let sign = match lp.sense {
        Sense::Maximize => S::one(),
        Sense::Minimize => -S::one(),
    };
    let mut costs = vec![S::zero(); width];
    for (k, c) in columns.iter().enumerate() {
        costs[k] = sign * coef(&lp.objective, c);
    }
    tab.price_out(&costs);
    tab.optimize()?;

    let mut std_x = vec![S::zero(); width];
    for (r, &b) in tab.basis.iter().enumerate() {
        std_x[b] = tab.rhs(r).max(S::zero());
    }
    let mut x = vec![S::zero(); n];
    for (k, c) in columns.iter().enumerate() {
        match *c {
            Column::Shifted(j) => x[j] = lp.lower[j] + std_x[k],
            Column::FreePositive(j) => x[j] += std_x[k],
            Column::FreeNegative(j) => x[j] -= std_x[k],
        }
    }
    for j in 0..n {
        if let Some(u) = lp.upper[j] {
            x[j] = x[j].min(u);
        }
        if lp.lower[j].is_finite() {
            x[j] = x[j].max(lp.lower[j]);
        }
    }
    Ok(LpSolution { value: lp.evaluate(&x), x })
}
