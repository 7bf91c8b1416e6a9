//! Randomized rounding of a fractional core outcome mixed with an MPF
//! outcome, with the grouping and violation diagnostics of its analysis.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::fractional::{fractional_mnw, mpf, FractionalMnwConfig, MpfResult};
use crate::instance::{packing_feasible, ConstraintSpec, FractionalOutcome, Instance, IntegralOutcome};
use crate::report::SolverReport;
use crate::scalar::{count, lit, to_f64, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundingConfig<S> {
    pub delta: S,
    /// `delta / 8`.
    pub gamma: S,
    pub retries: usize,
    pub seed: u64,
    /// Replaces the level floor `max(2, ln(R max(1, log* V_max) / gamma^3))`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level_floor: Option<S>,
}

impl<S: Scalar> RoundingConfig<S> {
    pub fn new(delta: S, seed: u64) -> Result<Self> {
        if !(delta > S::zero() && delta < S::one()) {
            return Err(CoreError::Domain(format!("delta {delta} must lie in (0, 1)")));
        }
        Ok(RoundingConfig {
            delta,
            gamma: delta / lit(8.0),
            retries: 200,
            seed,
            level_floor: None,
        })
    }

    pub fn with_retries(mut self, retries: usize) -> Self {
        self.retries = retries.max(1);
        self
    }
}

/// Generator for draw `index` of a run seeded with `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `z = (1 - gamma) x + gamma y`.
pub fn mix<S: Scalar>(x: &[S], y: &[S], gamma: S) -> Vec<S> {
    x.iter().zip(y).map(|(&a, &b)| (S::one() - gamma) * a + gamma * b).collect()
}

/// Keeps each element `j` independently with probability `p_j`.
pub fn sample_independent<S: Scalar, R: Rng>(probabilities: &[S], rng: &mut R) -> IntegralOutcome {
    IntegralOutcome::new(
        probabilities
            .iter()
            .enumerate()
            .filter(|&(_, &p)| rng.gen::<f64>() < to_f64(p))
            .map(|(j, _)| j),
    )
}

/// Agent groups by `ln V_i` and the violation sets of one rounded outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct GroupingDiagnostics<S> {
    /// `Q_0 = ln V_max`, `Q_{l+1} = 2 ln Q_l`, kept while at or above the floor.
    pub q_levels: Vec<S>,
    pub level_floor: S,
    /// Index `L` of the light group.
    pub light_index: usize,
    /// Threshold used for the light group: `max(Q_L, level_floor)`.
    pub q_light: S,
    pub v_max: S,
    pub r_value: S,
    pub log_star: usize,
    /// Group index per agent; `light_index` marks the light group.
    pub assignment: Vec<usize>,
    pub group_sizes: Vec<usize>,
    /// `V_max <= 1`: every agent is placed in the light group.
    pub degenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violations: Option<Vec<Vec<usize>>>,
    /// Allowed `|F_l|` per group.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation_limits: Option<Vec<S>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation_fractions: Option<Vec<S>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds_hold: Option<bool>,
}

impl<S: Scalar> GroupingDiagnostics<S> {
    /// Additive slack `5 Q_L / gamma^4`.
    pub fn alpha_target(&self, gamma: S) -> S {
        lit::<S>(5.0) * self.q_light / gamma.powi(4)
    }
}

/// Number of times `ln` must be applied before the value is at most 1.
pub fn log_star<S: Scalar>(x: S) -> usize {
    let mut x = x;
    let mut k = 0;
    while x > S::one() {
        x = x.ln();
        k += 1;
    }
    k
}

/// Assigns agents to heavy groups `Q_l >= ln V_i >= Q_{l+1}` (first match)
/// and the light group `ln V_i <= Q_L`.
pub fn grouping<S: Scalar>(agent_optima: &[S], r_value: S, gamma: S, level_floor: Option<S>) -> GroupingDiagnostics<S> {
    let v_max = agent_optima.iter().copied().fold(S::zero(), S::max);
    let stars = log_star(v_max);
    let two = lit::<S>(2.0);
    let floor = level_floor.unwrap_or_else(|| {
        let inner = r_value.max(S::tolerance()) * count::<S>(stars.max(1)) / gamma.powi(3);
        two.max(inner.ln())
    });
    let n = agent_optima.len();
    if v_max <= S::one() {
        return GroupingDiagnostics {
            q_levels: vec![v_max.ln()],
            level_floor: floor,
            light_index: 0,
            q_light: floor,
            v_max,
            r_value,
            log_star: stars,
            assignment: vec![0; n],
            group_sizes: vec![n],
            degenerate: true,
            violations: None,
            violation_limits: None,
            violation_fractions: None,
            bounds_hold: None,
        };
    }
    let mut q_levels = vec![v_max.ln()];
    loop {
        let last = *q_levels.last().unwrap();
        if last <= S::one() {
            break;
        }
        let next = two * last.ln();
        if next < floor || next >= last {
            break;
        }
        q_levels.push(next);
    }
    let light = q_levels.len() - 1;
    let q_light = q_levels[light].max(floor);
    let assignment: Vec<usize> = agent_optima
        .iter()
        .map(|&v| {
            let lv = if v > S::zero() { v.ln() } else { S::neg_infinity() };
            (0..light)
                .find(|&l| q_levels[l] >= lv && lv >= q_levels[l + 1])
                .unwrap_or(light)
        })
        .collect();
    let mut group_sizes = vec![0; light + 1];
    for &g in &assignment {
        group_sizes[g] += 1;
    }
    GroupingDiagnostics {
        q_levels,
        level_floor: floor,
        light_index: light,
        q_light,
        v_max,
        r_value,
        log_star: stars,
        assignment,
        group_sizes,
        degenerate: false,
        violations: None,
        violation_limits: None,
        violation_fractions: None,
        bounds_hold: None,
    }
}

/// Fills in `F_l` from fractional utilities `U*` and rounded utilities
/// `U-hat`, with the limits `|G_l| / (2 L e^{Q_l})` (heavy) and
/// `|G_L| / (2 e^{Q_L})` (light).
pub fn violation_sets<S: Scalar>(diag: &mut GroupingDiagnostics<S>, fractional: &[S], rounded: &[S], gamma: S) {
    let light = diag.light_index;
    let three_gamma = lit::<S>(3.0) * gamma;
    let additive = lit::<S>(4.0) * diag.q_light / gamma.powi(4);
    let mut violations = vec![Vec::new(); light + 1];
    for (i, &g) in diag.assignment.iter().enumerate() {
        let star = fractional[i];
        let hat = rounded[i];
        let multiplicative = hat < (S::one() - three_gamma) * star;
        let violated = if g < light {
            multiplicative
        } else {
            multiplicative && hat < star - additive
        };
        if violated {
            violations[g].push(i);
        }
    }
    let two = lit::<S>(2.0);
    let limits: Vec<S> = (0..=light)
        .map(|l| {
            let size = count::<S>(diag.group_sizes[l]);
            if l < light {
                size / (two * count::<S>(light) * diag.q_levels[l].exp())
            } else {
                size / (two * diag.q_light.exp())
            }
        })
        .collect();
    let fractions = (0..=light)
        .map(|l| {
            if diag.group_sizes[l] == 0 {
                S::zero()
            } else {
                count::<S>(violations[l].len()) / count::<S>(diag.group_sizes[l])
            }
        })
        .collect();
    diag.bounds_hold = Some(violations.iter().zip(&limits).all(|(f, &lim)| count::<S>(f.len()) <= lim));
    diag.violations = Some(violations);
    diag.violation_limits = Some(limits);
    diag.violation_fractions = Some(fractions);
}

fn packing_of<S: Scalar>(inst: &Instance<S>) -> Result<(&[Vec<S>], &[S])> {
    match inst.constraint() {
        ConstraintSpec::Packing { a, b } => Ok((a, b)),
        other => Err(CoreError::Unsupported(format!(
            "rounding needs a packing constraint, got {}",
            other.type_name()
        ))),
    }
}

/// Samples each element with probability `(1 - gamma) z_j`, redrawing until
/// the packing constraints hold. Draw `k` uses substream `k` of the seed.
///
/// `context` supplies `(V_i, R)` for the grouping diagnostics; without it
/// they are computed from the instance.
pub fn round_outcome<S: Scalar>(
    inst: &Instance<S>,
    x: &FractionalOutcome<S>,
    y: &FractionalOutcome<S>,
    config: &RoundingConfig<S>,
    context: Option<(&[S], S)>,
) -> Result<SolverReport<S>> {
    let (a, b) = packing_of(inst)?;
    let m = inst.n_elements();
    if x.weights.len() != m || y.weights.len() != m {
        return Err(CoreError::Validation(format!("fractional outcomes must have {m} weights")));
    }
    let z = mix(&x.weights, &y.weights, config.gamma);
    let probabilities: Vec<S> = z.iter().map(|&zj| (S::one() - config.gamma) * zj).collect();
    let mut accepted = None;
    let mut draws = 0;
    for attempt in 0..config.retries {
        draws += 1;
        let mut rng = substream(config.seed, attempt as u64);
        let c = sample_independent(&probabilities, &mut rng);
        if packing_feasible(&c, a, b, S::one()) {
            accepted = Some(c);
            break;
        }
    }
    let Some(outcome) = accepted else {
        return Err(CoreError::RetriesExhausted {
            attempts: draws,
            failures: draws,
        });
    };

    let owned;
    let (optima, r_value) = match context {
        Some((v, r)) => (v, r),
        None => {
            let res = mpf(inst)?;
            owned = res.agent_optima;
            (owned.as_slice(), res.r_value)
        }
    };
    let mut diag = grouping(optima, r_value, config.gamma, config.level_floor);
    let fractional = inst.utility_vector(x);
    let rounded = inst.utility_vector(&outcome);
    violation_sets(&mut diag, &fractional, &rounded, config.gamma);

    let mut report = SolverReport::new("packing_rounding");
    report.outcome = Some(outcome);
    report.iterations = draws;
    report.seed = Some(config.seed);
    report.diagnostics.delta = Some(config.delta);
    report.diagnostics.gamma = Some(config.gamma);
    report.diagnostics.draws = Some(draws);
    report.diagnostics.retries = Some(draws - 1);
    report.diagnostics.alpha_target = Some(diag.alpha_target(config.gamma));
    report.diagnostics.grouping = Some(diag);
    Ok(report)
}

/// Fractional core, MPF outcome, then rounding of their mixture.
///
/// The fractional stage runs with `epsilon = 1`; the rounding analysis only
/// needs an additive error that is constant.
pub fn solve_packing<S: Scalar>(inst: &Instance<S>, delta: S, seed: u64) -> Result<SolverReport<S>> {
    let config = RoundingConfig::new(delta, seed)?;
    solve_packing_with(inst, &config, S::one())
}

pub fn solve_packing_with<S: Scalar>(inst: &Instance<S>, config: &RoundingConfig<S>, epsilon: S) -> Result<SolverReport<S>> {
    packing_of(inst)?;
    let mnw_config = FractionalMnwConfig::new(config.delta, epsilon)?;
    let (x, certificate) = fractional_mnw(inst, mnw_config.delta, mnw_config.epsilon)?;
    let mpf_result: MpfResult<S> = mpf(inst)?;
    let mut report = round_outcome(
        inst,
        &x,
        &mpf_result.outcome,
        config,
        Some((&mpf_result.agent_optima, mpf_result.r_value)),
    )?;
    report.solver = "packing_pipeline";
    report.fractional = Some(x);
    report.diagnostics.epsilon = Some(epsilon);
    report.diagnostics.certificate = Some(certificate);
    report.diagnostics.mpf = Some(mpf_result);
    Ok(report)
}

/// `exp(-(gamma^3 / 2) max(B, A / 2))`, an upper bound on
/// `P[X < (1 - 2 gamma) A]` when `E[X] = (1 - gamma) A + gamma B`.
pub fn chernoff_variant_bound<S: Scalar>(a: S, b: S, gamma: S) -> Result<S> {
    if !(gamma > S::zero() && gamma < lit(0.5)) {
        return Err(CoreError::Domain(format!("gamma {gamma} must lie in (0, 1/2)")));
    }
    if !(a >= S::zero() && b >= S::zero()) {
        return Err(CoreError::Domain("A and B must be nonnegative".into()));
    }
    Ok((-(gamma.powi(3) / lit(2.0)) * b.max(a / lit(2.0))).exp())
}

/// Outcome of a Monte-Carlo check of [`chernoff_variant_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEstimate {
    pub bound: f64,
    pub empirical: f64,
    /// Binomial standard error of the empirical rate at the bound.
    pub sigma: f64,
    pub trials: usize,
}

impl TailEstimate {
    pub fn within_three_sigma(&self) -> bool {
        self.empirical <= self.bound + 3.0 * self.sigma
    }
}

/// Draws `X = sum_j X_j` with `X_j ~ Bernoulli(p_j)`, where the `p_j` sum to
/// `(1 - gamma) A + gamma B`, and measures `P[X < (1 - 2 gamma) A]`.
pub fn chernoff_tail_estimate(probabilities: &[f64], a: f64, b: f64, gamma: f64, trials: usize, seed: u64) -> Result<TailEstimate> {
    let bound = chernoff_variant_bound(a, b, gamma)?;
    let mean: f64 = probabilities.iter().sum();
    let expected = (1.0 - gamma) * a + gamma * b;
    if (mean - expected).abs() > 1e-6 * expected.max(1.0) {
        return Err(CoreError::Validation(format!(
            "Bernoulli means sum to {mean}, expected {expected}"
        )));
    }
    let cut = (1.0 - 2.0 * gamma) * a;
    let mut rng = substream(seed, 0);
    let mut hits = 0usize;
    for _ in 0..trials {
        let x = probabilities.iter().filter(|&&p| rng.gen::<f64>() < p).count() as f64;
        if x < cut {
            hits += 1;
        }
    }
    let t = trials.max(1) as f64;
    Ok(TailEstimate {
        bound,
        empirical: hits as f64 / t,
        sigma: (bound * (1.0 - bound) / t).sqrt(),
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recurrence_from_e16() {
        let v = 16f64.exp();
        let diag = grouping(&[v], 1.0, 0.5, Some(2.0));
        let q1 = 2.0 * 16f64.ln();
        let q2 = 2.0 * q1.ln();
        assert!((diag.q_levels[0] - 16.0).abs() < 1e-12);
        assert!((diag.q_levels[1] - q1).abs() < 1e-12);
        assert!((diag.q_levels[2] - q2).abs() < 1e-12);
        assert!(diag.q_levels.iter().all(|&q| q >= 2.0));
    }

    #[test]
    fn log_star_values() {
        assert_eq!(log_star(1.0), 0);
        assert_eq!(log_star(2.0), 1);
        assert_eq!(log_star(15.0), 2);
        assert_eq!(log_star(16f64.exp()), 4);
    }

    #[test]
    fn small_v_max_is_degenerate() {
        let diag = grouping(&[0.5, 1.0, 0.0], 1.0, 0.1, None);
        assert!(diag.degenerate);
        assert_eq!(diag.assignment, vec![0, 0, 0]);
    }

    #[test]
    fn bound_tends_to_one_for_tiny_gamma() {
        let b = chernoff_variant_bound(10.0, 10.0, 1e-6).unwrap();
        assert!(b > 1.0 - 1e-12);
        assert!(chernoff_variant_bound(1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn substreams_differ() {
        let a: u64 = substream(7, 0).gen();
        let b: u64 = substream(7, 1).gen();
        let c: u64 = substream(7, 0).gen();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }
}
