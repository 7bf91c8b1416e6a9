use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::instance::{FractionalOutcome, Instance};
use crate::report::SolverReport;
use crate::scalar::{count, lit, Scalar};

use super::model::PackingModel;

/// Certificate that `U-hat` is a fractional `(delta, epsilon)`-core point:
/// `Q = max_{U' in P} sum_i (U'_i + eps') / (U-hat_i + eps') <= n + delta`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct MnwCertificate<S> {
    pub utilities: Vec<S>,
    pub q_value: S,
    /// Maximizer of the certificate program.
    pub worst_deviation: FractionalOutcome<S>,
    pub epsilon_prime: S,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalMnwConfig<S> {
    pub delta: S,
    pub epsilon: S,
    /// Certificate rounds before giving up.
    pub max_rounds: usize,
    /// Pairwise steps between certificate rounds.
    pub inner_steps: usize,
}

impl<S: Scalar> FractionalMnwConfig<S> {
    pub fn new(delta: S, epsilon: S) -> Result<Self> {
        if !(delta > S::zero()) || !(epsilon > S::zero()) {
            return Err(CoreError::Domain(format!("delta {delta} and epsilon {epsilon} must be positive")));
        }
        Ok(FractionalMnwConfig {
            delta,
            epsilon,
            max_rounds: 2000,
            inner_steps: 200,
        })
    }

    /// `epsilon / (1 + delta)`, floored at `1e-9`.
    pub fn epsilon_prime(&self) -> S {
        (self.epsilon / (S::one() + self.delta)).max(lit(1e-9))
    }
}

/// `sum_i (U'_i + eps') / (U_i + eps')`.
pub fn certificate_q<S: Scalar>(utilities: &[S], deviation: &[S], epsilon_prime: S) -> S {
    utilities
        .iter()
        .zip(deviation)
        .map(|(&u, &d)| (d + epsilon_prime) / (u + epsilon_prime))
        .sum()
}

struct Vertex<S> {
    w: Vec<S>,
    /// Utility per agent type.
    utils: Vec<S>,
    lambda: S,
}

struct Solver<'a, S> {
    model: &'a PackingModel<S>,
    eps: S,
    counts: Vec<S>,
}

impl<S: Scalar> Solver<'_, S> {
    fn vertex(&self, w: Vec<S>, lambda: S) -> Vertex<S> {
        let utils = (0..self.model.n_types()).map(|t| self.model.type_utility(t, &w)).collect();
        Vertex { w, utils, lambda }
    }

    fn mixed(&self, active: &[Vertex<S>]) -> Vec<S> {
        let mut u = vec![S::zero(); self.model.n_types()];
        for v in active {
            for (x, &y) in u.iter_mut().zip(&v.utils) {
                *x += v.lambda * y;
            }
        }
        u
    }

    fn objective(&self, u: &[S]) -> S {
        u.iter().zip(&self.counts).map(|(&x, &c)| c * (x + self.eps).ln()).sum()
    }

    fn gradient(&self, u: &[S]) -> Vec<S> {
        u.iter().zip(&self.counts).map(|(&x, &c)| c / (x + self.eps)).collect()
    }

    /// Certificate program at type utilities `u`: returns `(Q, maximizer)`.
    fn certificate(&self, u: &[S]) -> Result<(S, Vec<S>)> {
        let g = self.gradient(u);
        let weights: Vec<S> = (0..self.model.n_classes())
            .map(|c| (0..self.model.n_types()).map(|t| g[t] * self.model.type_rows[t][c]).sum())
            .collect();
        let (value, s) = self.model.maximize_linear(&weights)?;
        let constant: S = g.iter().map(|&x| x * self.eps).sum();
        Ok((value + constant, s))
    }

    /// Pairwise Frank-Wolfe steps with exact line search over the active set.
    fn pairwise(&self, active: &mut Vec<Vertex<S>>, steps: usize, stop_gap: S) {
        for _ in 0..steps {
            let u = self.mixed(active);
            let g = self.gradient(&u);
            let score = |v: &Vertex<S>| -> S { v.utils.iter().zip(&g).map(|(&x, &y)| x * y).sum() };
            let scores: Vec<S> = active.iter().map(score).collect();
            let toward = (0..active.len())
                .max_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap().then(b.cmp(&a)))
                .unwrap();
            let away = (0..active.len())
                .filter(|&k| active[k].lambda > S::zero())
                .min_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap().then(a.cmp(&b)))
                .unwrap();
            if toward == away || scores[toward] - scores[away] <= stop_gap {
                return;
            }
            let d: Vec<S> = active[toward]
                .utils
                .iter()
                .zip(&active[away].utils)
                .map(|(&x, &y)| x - y)
                .collect();
            let slope = |tau: S| -> S {
                d.iter()
                    .zip(&u)
                    .zip(&self.counts)
                    .map(|((&dt, &ut), &c)| c * dt / (ut + tau * dt + self.eps))
                    .sum()
            };
            let max_step = active[away].lambda;
            let tau = if slope(max_step) >= S::zero() {
                max_step
            } else {
                let (mut lo, mut hi) = (S::zero(), max_step);
                for _ in 0..60 {
                    let mid = (lo + hi) / (S::one() + S::one());
                    if slope(mid) >= S::zero() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            };
            if tau <= S::zero() {
                return;
            }
            active[toward].lambda += tau;
            if tau >= max_step {
                active.remove(away);
            } else {
                active[away].lambda -= tau;
            }
        }
    }

    fn weights(&self, active: &[Vertex<S>]) -> Vec<S> {
        let mut w = vec![S::zero(); self.model.n_classes()];
        for v in active {
            for (x, &y) in w.iter_mut().zip(&v.w) {
                *x += v.lambda * y;
            }
        }
        w
    }
}

struct MnwRun<S> {
    outcome: FractionalOutcome<S>,
    certificate: MnwCertificate<S>,
    trace: Vec<S>,
    rounds: usize,
}

fn run<S: Scalar>(inst: &Instance<S>, config: &FractionalMnwConfig<S>) -> Result<MnwRun<S>> {
    let model = PackingModel::new(inst)?;
    let eps = config.epsilon_prime();
    let n = count::<S>(inst.n_agents());
    let target = n + config.delta;
    let solver = Solver {
        model: &model,
        eps,
        counts: model.type_count.iter().map(|&c| count(c)).collect(),
    };

    // Start from the average of every agent type's favourite vertex.
    let mut starts: Vec<Vec<S>> = Vec::new();
    for row in &model.type_rows {
        if row.iter().all(|&u| u == S::zero()) {
            continue;
        }
        let (_, w) = model.maximize_linear(row)?;
        if !starts.iter().any(|s| same_point(s, &w)) {
            starts.push(w);
        }
    }
    if starts.is_empty() {
        starts.push(vec![S::zero(); model.n_classes()]);
    }
    let share = S::one() / count(starts.len());
    let mut active: Vec<Vertex<S>> = starts.into_iter().map(|w| solver.vertex(w, share)).collect();

    let mut trace = Vec::new();
    let mut last_q = S::infinity();
    for round in 1..=config.max_rounds {
        let u = solver.mixed(&active);
        trace.push(solver.objective(&u));
        let (q, s) = solver.certificate(&u)?;
        last_q = q;
        if q <= target {
            let w = solver.weights(&active);
            let outcome = model.expand(&w);
            let utilities = inst.utility_vector(&outcome);
            // Recheck on the element-level utilities the caller will see.
            let grad: Vec<S> = utilities.iter().map(|&x| S::one() / (x + eps)).collect();
            let weights: Vec<S> = (0..model.n_classes())
                .map(|c| model.u.iter().zip(&grad).map(|(row, &g)| g * row[c]).sum())
                .collect();
            let (_, worst) = model.maximize_linear(&weights)?;
            let worst_deviation = model.expand(&worst);
            let deviation = inst.utility_vector(&worst_deviation);
            let q_value = certificate_q(&utilities, &deviation, eps);
            if q_value <= target {
                return Ok(MnwRun {
                    outcome,
                    certificate: MnwCertificate {
                        utilities,
                        q_value,
                        worst_deviation,
                        epsilon_prime: eps,
                    },
                    trace,
                    rounds: round,
                });
            }
        }
        match active.iter_mut().find(|v| same_point(&v.w, &s)) {
            Some(_) => {}
            None => active.push(solver.vertex(s, S::zero())),
        }
        let stop_gap = config.delta / lit(8.0);
        solver.pairwise(&mut active, config.inner_steps, stop_gap);
    }
    Err(CoreError::Convergence {
        iterations: config.max_rounds,
        detail: format!("certificate Q = {last_q} still above n + delta = {target}"),
    })
}

fn same_point<S: Scalar>(a: &[S], b: &[S]) -> bool {
    a.iter().zip(b).all(|(&x, &y)| (x - y).abs() <= S::tolerance())
}

/// Fractional outcome whose utilities carry a certificate `Q <= n + delta`,
/// making it a fractional `(delta, epsilon)`-core outcome.
///
/// Maximizes `sum_i ln(U_i + eps')` by fully corrective Frank-Wolfe: each
/// round solves the certificate LP, whose maximizer is also the
/// Frank-Wolfe vertex, then re-optimizes over the active vertices with
/// pairwise steps. `Q - n` is the Frank-Wolfe gap, so the loop stops
/// exactly when the certificate holds.
pub fn fractional_mnw<S: Scalar>(inst: &Instance<S>, delta: S, epsilon: S) -> Result<(FractionalOutcome<S>, MnwCertificate<S>)> {
    let config = FractionalMnwConfig::new(delta, epsilon)?;
    let run = run(inst, &config)?;
    Ok((run.outcome, run.certificate))
}

/// [`fractional_mnw`] with the log-welfare trace, one entry per round.
pub fn fractional_mnw_report<S: Scalar>(inst: &Instance<S>, config: &FractionalMnwConfig<S>) -> Result<SolverReport<S>> {
    let run = run(inst, config)?;
    let mut report = SolverReport::new("fractional_mnw");
    report.fractional = Some(run.outcome);
    report.objective_trace = run.trace;
    report.iterations = run.rounds;
    report.diagnostics.delta = Some(config.delta);
    report.diagnostics.epsilon = Some(config.epsilon);
    report.diagnostics.iteration_cap = Some(config.max_rounds);
    report.diagnostics.certificate = Some(run.certificate);
    Ok(report)
}
