use crate::error::{CoreError, Result};
use crate::matroid::MatroidOracle;
use crate::scalar::Scalar;

use super::{ConstraintSpec, Instance, IntegralOutcome};

/// Which outcome set an enumeration covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeSpace {
    /// Solver output space: bases, matchings, packing-feasible sets,
    /// complete private-goods assignments.
    Feasible,
    /// Coalition deviations: uniform-matroid sets of size at most `rank`,
    /// independent sets of other matroids when `relax_matroid` is set,
    /// otherwise the feasible space.
    Deviations { relax_matroid: bool },
}

/// Lists every outcome in `space`, failing once more than `cap` outcomes
/// have been produced.
///
/// Packing instances are enumerated per element class (see
/// [`Instance::element_classes`]): one representative subset per vector of
/// class counts, taking the lowest-indexed members of each class. Every
/// subset is utility-equivalent to exactly one representative, so searches
/// over utilities lose nothing.
pub fn enumerate_outcomes<S: Scalar>(inst: &Instance<S>, space: OutcomeSpace, cap: usize) -> Result<Vec<IntegralOutcome>> {
    let m = inst.n_elements();
    let mut out = Vec::new();
    let overflow = |out: &Vec<IntegralOutcome>| {
        if out.len() > cap {
            Err(CoreError::SizeCap {
                what: "enumerated outcomes",
                cap,
                actual: out.len(),
            })
        } else {
            Ok(())
        }
    };
    match inst.constraint() {
        ConstraintSpec::UniformMatroid { rank } => {
            let sizes: Vec<usize> = match space {
                OutcomeSpace::Feasible => vec![*rank],
                OutcomeSpace::Deviations { .. } => (0..=*rank).collect(),
            };
            for k in sizes {
                let mut combo: Vec<usize> = (0..k).collect();
                loop {
                    out.push(IntegralOutcome { chosen: combo.clone() });
                    overflow(&out)?;
                    if !next_combination(&mut combo, m) {
                        break;
                    }
                }
            }
        }
        ConstraintSpec::Packing { a, b } => {
            let classes = inst.element_classes();
            let mut counts = vec![0usize; classes.len()];
            let mut load = vec![S::zero(); b.len()];
            packing_dfs(&classes, a, b, 0, &mut counts, &mut load, &mut out, cap)?;
        }
        ConstraintSpec::Matching { vertices, edges } => {
            let mut used = vec![false; *vertices];
            let mut chosen = Vec::new();
            matching_dfs(edges, 0, &mut used, &mut chosen, &mut out, cap)?;
        }
        _ => {
            let oracle = MatroidOracle::from_instance(inst)?;
            let relax = matches!(space, OutcomeSpace::Deviations { relax_matroid: true });
            let rank = oracle.rank();
            let mut chosen = Vec::new();
            matroid_dfs(&oracle, 0, rank, relax, &mut chosen, &mut out, cap)?;
        }
    }
    Ok(out)
}

/// Advances `combo` to the next k-subset of `0..m` in lexicographic order.
pub(crate) fn next_combination(combo: &mut [usize], m: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < m - k + i {
            combo[i] += 1;
            for t in i + 1..k {
                combo[t] = combo[t - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[allow(clippy::too_many_arguments)]
fn packing_dfs<S: Scalar>(
    classes: &[Vec<usize>],
    a: &[Vec<S>],
    b: &[S],
    depth: usize,
    counts: &mut Vec<usize>,
    load: &mut Vec<S>,
    out: &mut Vec<IntegralOutcome>,
    cap: usize,
) -> Result<()> {
    if depth == classes.len() {
        let chosen = classes
            .iter()
            .zip(counts.iter())
            .flat_map(|(class, &k)| class[..k].iter().copied());
        out.push(IntegralOutcome::new(chosen));
        if out.len() > cap {
            return Err(CoreError::SizeCap {
                what: "enumerated outcomes",
                cap,
                actual: out.len(),
            });
        }
        return Ok(());
    }
    let rep = classes[depth][0];
    let saved = load.clone();
    for k in 0..=classes[depth].len() {
        if k > 0 {
            let mut fits = true;
            for (r, row) in a.iter().enumerate() {
                load[r] += row[rep];
                if load[r] > b[r] + S::tolerance() {
                    fits = false;
                }
            }
            if !fits {
                break;
            }
        }
        counts[depth] = k;
        packing_dfs(classes, a, b, depth + 1, counts, load, out, cap)?;
    }
    counts[depth] = 0;
    *load = saved;
    Ok(())
}

fn matching_dfs(
    edges: &[(usize, usize)],
    next: usize,
    used: &mut Vec<bool>,
    chosen: &mut Vec<usize>,
    out: &mut Vec<IntegralOutcome>,
    cap: usize,
) -> Result<()> {
    out.push(IntegralOutcome { chosen: chosen.clone() });
    if out.len() > cap {
        return Err(CoreError::SizeCap {
            what: "enumerated outcomes",
            cap,
            actual: out.len(),
        });
    }
    for e in next..edges.len() {
        let (u, v) = edges[e];
        if used[u] || used[v] {
            continue;
        }
        used[u] = true;
        used[v] = true;
        chosen.push(e);
        matching_dfs(edges, e + 1, used, chosen, out, cap)?;
        chosen.pop();
        used[u] = false;
        used[v] = false;
    }
    Ok(())
}

fn matroid_dfs(
    oracle: &MatroidOracle,
    next: usize,
    rank: usize,
    relax: bool,
    chosen: &mut Vec<usize>,
    out: &mut Vec<IntegralOutcome>,
    cap: usize,
) -> Result<()> {
    if relax || chosen.len() == rank {
        out.push(IntegralOutcome { chosen: chosen.clone() });
        if out.len() > cap {
            return Err(CoreError::SizeCap {
                what: "enumerated outcomes",
                cap,
                actual: out.len(),
            });
        }
    }
    if chosen.len() == rank {
        return Ok(());
    }
    let m = oracle.ground_size();
    for j in next..m {
        if m - j < rank - chosen.len() && !relax {
            break;
        }
        chosen.push(j);
        if oracle.is_independent(chosen) {
            matroid_dfs(oracle, j + 1, rank, relax, chosen, out, cap)?;
        }
        chosen.pop();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_counts() {
        let inst = Instance::new(vec![vec![1.0; 5]], ConstraintSpec::UniformMatroid { rank: 2 }).unwrap();
        assert_eq!(enumerate_outcomes(&inst, OutcomeSpace::Feasible, 1000).unwrap().len(), 10);
        let dev = enumerate_outcomes(&inst, OutcomeSpace::Deviations { relax_matroid: false }, 1000).unwrap();
        assert_eq!(dev.len(), 1 + 5 + 10);
    }

    #[test]
    fn partition_is_product() {
        let inst = Instance::new(
            vec![vec![1.0; 5]],
            ConstraintSpec::PartitionMatroid {
                groups: vec![vec![0, 1], vec![2, 3, 4]],
            },
        )
        .unwrap();
        let all = enumerate_outcomes(&inst, OutcomeSpace::Feasible, 1000).unwrap();
        assert_eq!(all.len(), 6);
        assert!(all.iter().all(|c| inst.is_feasible(c)));
    }

    #[test]
    fn cap_is_reported() {
        let inst = Instance::new(vec![vec![1.0; 10]], ConstraintSpec::UniformMatroid { rank: 5 }).unwrap();
        let err = enumerate_outcomes(&inst, OutcomeSpace::Feasible, 100).unwrap_err();
        assert!(matches!(err, CoreError::SizeCap { cap: 100, .. }));
    }

    #[test]
    fn k22_matchings() {
        let edges = vec![(0, 2), (1, 3), (0, 3), (1, 2)];
        let inst = Instance::new(vec![vec![1.0; 4]], ConstraintSpec::Matching { vertices: 4, edges }).unwrap();
        let all = enumerate_outcomes(&inst, OutcomeSpace::Feasible, 1000).unwrap();
        // empty, four singletons, two perfect matchings
        assert_eq!(all.len(), 7);
    }

    #[test]
    fn packing_classes_collapse_symmetric_items() {
        let inst = Instance::new(
            vec![vec![1.0; 6]],
            ConstraintSpec::Packing {
                a: vec![vec![1.0; 6]],
                b: vec![3.0],
            },
        )
        .unwrap();
        let all = enumerate_outcomes(&inst, OutcomeSpace::Feasible, 1000).unwrap();
        assert_eq!(all.len(), 4);
        assert_eq!(all[3].elements(), &[0, 1, 2]);
    }

    #[test]
    fn graphic_triangle_has_three_spanning_trees() {
        let inst = Instance::new(
            vec![vec![1.0; 3]],
            ConstraintSpec::GraphicMatroid {
                vertices: 3,
                edges: vec![(0, 1), (1, 2), (0, 2)],
            },
        )
        .unwrap();
        assert_eq!(enumerate_outcomes(&inst, OutcomeSpace::Feasible, 100).unwrap().len(), 3);
        let relaxed = enumerate_outcomes(&inst, OutcomeSpace::Deviations { relax_matroid: true }, 100).unwrap();
        assert_eq!(relaxed.len(), 1 + 3 + 3);
    }
}
