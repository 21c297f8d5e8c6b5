//! Ensemble transformations and the two top-level reductions: a posterior
//! game collapses to one discrimination instance on tuple outcomes, a prior
//! game to a convex sum of per-message discrimination instances.

use crate::discr;
use crate::error::{Error, Result};
use crate::games::{Measurement, OutcomeSpace, PartialInfoMap, ScoreFunction, StateEnsemble};
use crate::linalg::Hermitian;
use crate::policy::SolverPolicy;

/// Δ(E,f) = Σ_{x,y} f(x,y) p(x).
pub fn delta(e: &StateEnsemble, f: &ScoreFunction) -> Result<f64> {
    if e.labels() != f.x_labels() {
        return Err(Error::LabelMismatch("ensemble/score input label sets differ".into()));
    }
    let prior = e.prior();
    let mut acc = 0.0;
    for x in 0..e.len() {
        for y in 0..f.y_labels().len() {
            acc += f.value(x, y) * prior[x];
        }
    }
    Ok(acc)
}

/// Ensemble rescaled so that a plain discrimination optimum, multiplied back
/// by `scale`, equals the original game's optimum. Degenerate instances
/// (Δ = 0) fall back to the uniform maximally mixed ensemble.
#[derive(Clone, Debug)]
pub struct AuxiliaryEnsemble {
    pub ensemble: StateEnsemble,
    pub delta: f64,
    pub degenerate: bool,
    /// Δ for plain labels, |Y|^{|T|-1}·Δ for tuple labels.
    pub scale: f64,
}

fn uniform_fallback(labels: Vec<String>, dim: usize) -> Result<StateEnsemble> {
    let n = labels.len();
    let op = Hermitian::identity(dim).scaled(1.0 / (dim * n) as f64);
    StateEnsemble::new(labels, vec![op; n])
}

/// E_f(y) = Δ^{-1} Σ_x f(x,y) E(x) over the guess labels.
pub fn aux_plain(e: &StateEnsemble, f: &ScoreFunction) -> Result<AuxiliaryEnsemble> {
    let d = delta(e, f)?;
    if d == 0.0 {
        return Ok(AuxiliaryEnsemble {
            ensemble: uniform_fallback(f.y_labels().to_vec(), e.dim())?,
            delta: 0.0,
            degenerate: true,
            scale: 0.0,
        });
    }
    let inv = 1.0 / d;
    let ops: Vec<Hermitian> = (0..f.y_labels().len())
        .map(|y| {
            let mut acc = Hermitian::zeros(e.dim());
            for x in 0..e.len() {
                let w = f.value(x, y);
                if w != 0.0 {
                    acc.axpy(inv * w, e.operator(x));
                }
            }
            acc
        })
        .collect();
    Ok(AuxiliaryEnsemble {
        ensemble: StateEnsemble::new(f.y_labels().to_vec(), ops)?,
        delta: d,
        degenerate: false,
        scale: d,
    })
}

/// E_{f,α}(φ) = (|Y|^{|T|-1}Δ)^{-1} Σ_{x,t} f(x,φ(t)) α(t|x) E(x) over Y^T.
pub fn aux_posterior(
    e: &StateEnsemble,
    f: &ScoreFunction,
    alpha: &PartialInfoMap,
    cap: usize,
) -> Result<(AuxiliaryEnsemble, OutcomeSpace)> {
    if e.labels() != alpha.x_labels() {
        return Err(Error::LabelMismatch("ensemble/alpha input label sets differ".into()));
    }
    let space = OutcomeSpace::new(f.y_labels().to_vec(), alpha.t_labels().to_vec(), cap)?;
    let d = delta(e, f)?;
    let ny = space.ny() as f64;
    let m = space.messages();
    let scale = ny.powi(m as i32 - 1) * d;
    if d == 0.0 {
        return Ok((
            AuxiliaryEnsemble {
                ensemble: uniform_fallback(space.all_labels(), e.dim())?,
                delta: 0.0,
                degenerate: true,
                scale: 0.0,
            },
            space,
        ));
    }
    let inv = 1.0 / scale;
    let ops: Vec<Hermitian> = (0..space.len())
        .map(|phi| {
            let mut acc = Hermitian::zeros(e.dim());
            for x in 0..e.len() {
                let mut coeff = 0.0;
                for t in 0..m {
                    let a = alpha.value(t, x);
                    if a != 0.0 {
                        coeff += a * f.value(x, space.component(phi, t));
                    }
                }
                if coeff != 0.0 {
                    acc.axpy(inv * coeff, e.operator(x));
                }
            }
            acc
        })
        .collect();
    Ok((
        AuxiliaryEnsemble {
            ensemble: StateEnsemble::new(space.all_labels(), ops)?,
            delta: d,
            degenerate: false,
            scale,
        },
        space,
    ))
}

/// Sub-ensemble seen after message t: E_t(x) = q(t)^{-1} α(t|x) E(x).
#[derive(Clone, Debug)]
pub struct ConditionalEnsemble {
    pub t: usize,
    pub label: String,
    pub qt: f64,
    pub ensemble: StateEnsemble,
}

/// Conditional ensembles for every message with q(t) > 0, in message order.
pub fn conditionals(e: &StateEnsemble, alpha: &PartialInfoMap) -> Result<Vec<ConditionalEnsemble>> {
    if e.labels() != alpha.x_labels() {
        return Err(Error::LabelMismatch("ensemble/alpha input label sets differ".into()));
    }
    let prior = e.prior();
    let mut out = Vec::new();
    for t in 0..alpha.t_labels().len() {
        let qt: f64 = (0..e.len()).map(|x| alpha.value(t, x) * prior[x]).sum();
        if qt == 0.0 {
            continue;
        }
        let ops: Vec<Hermitian> = (0..e.len())
            .map(|x| e.operator(x).scaled(alpha.value(t, x) / qt))
            .collect();
        out.push(ConditionalEnsemble {
            t,
            label: alpha.t_labels()[t].clone(),
            qt,
            ensemble: StateEnsemble::new(e.labels().to_vec(), ops)?,
        });
    }
    Ok(out)
}

/// Certified optimum of a score-rescaled discrimination instance.
#[derive(Clone, Debug)]
pub struct ScoreOptimum {
    pub value: f64,
    pub measurement: Measurement,
    pub iterations: usize,
    /// Width of the certified bracket, in score units.
    pub bracket: f64,
}

/// Certified optimum of a posterior game, with the tuple outcome space.
#[derive(Clone, Debug)]
pub struct PosteriorOptimum {
    pub value: f64,
    pub measurement: Measurement,
    pub space: OutcomeSpace,
    pub iterations: usize,
    pub bracket: f64,
}

/// Certified optimum of a prior game: one measurement per message.
#[derive(Clone, Debug)]
pub struct PriorOptimum {
    pub value: f64,
    pub collection: Vec<Measurement>,
    pub iterations: usize,
    pub bracket: f64,
}

fn inner_policy(policy: &SolverPolicy, scale: f64) -> SolverPolicy {
    policy
        .clone()
        .with_cert_tol((policy.cert_tol / scale).clamp(1e-12, 1e-2))
}

fn certify(value_low: f64, value_high: f64, tol: f64) -> Result<()> {
    if value_high - value_low > tol {
        return Err(Error::NotCertified {
            lower: value_low,
            upper: value_high,
            bracket: value_high - value_low,
            tol,
        });
    }
    Ok(())
}

/// Maximal average score without side information: Δ·Pg(E_f).
pub fn ef_max(e: &StateEnsemble, f: &ScoreFunction, policy: &SolverPolicy) -> Result<ScoreOptimum> {
    let aux = aux_plain(e, f)?;
    if aux.degenerate {
        return Ok(ScoreOptimum {
            value: 0.0,
            measurement: Measurement::trivial(f.y_labels().to_vec(), e.dim())?,
            iterations: 0,
            bracket: 0.0,
        });
    }
    let r = discr::solve(&aux.ensemble, &inner_policy(policy, aux.scale))?;
    certify(aux.scale * r.lower, aux.scale * r.upper, policy.cert_tol)?;
    Ok(ScoreOptimum {
        value: aux.scale * r.lower,
        measurement: r.measurement,
        iterations: r.iterations,
        bracket: aux.scale * (r.upper - r.lower),
    })
}

/// Maximal average score with posterior information:
/// |Y|^{|T|-1}·Δ·Pg(E_{f,α}), solved on the tuple outcome space.
pub fn epost_max(
    e: &StateEnsemble,
    f: &ScoreFunction,
    alpha: &PartialInfoMap,
    policy: &SolverPolicy,
) -> Result<PosteriorOptimum> {
    let (aux, space) = aux_posterior(e, f, alpha, policy.enumeration_cap)?;
    if aux.degenerate {
        return Ok(PosteriorOptimum {
            value: 0.0,
            measurement: Measurement::trivial(space.all_labels(), e.dim())?,
            space,
            iterations: 0,
            bracket: 0.0,
        });
    }

    if let Some(restricted) = restricted_labels(f, alpha, &space) {
        return restricted_epost(e, &aux, space, &restricted, policy);
    }

    let r = discr::solve(&aux.ensemble, &inner_policy(policy, aux.scale))?;
    certify(aux.scale * r.lower, aux.scale * r.upper, policy.cert_tol)?;
    Ok(PosteriorOptimum {
        value: aux.scale * r.lower,
        measurement: r.measurement,
        space,
        iterations: r.iterations,
        bracket: aux.scale * (r.upper - r.lower),
    })
}

/// For plain discrimination with a deterministic message map the optimum may
/// be searched over the tuples X_1×…×X_m only: any other tuple's operator is
/// dominated by a repaired tuple's operator, so re-routing effect mass onto
/// the repaired tuple never lowers the score. Applied when it shrinks the
/// label set at least fourfold.
fn restricted_labels(
    f: &ScoreFunction,
    alpha: &PartialInfoMap,
    space: &OutcomeSpace,
) -> Option<Vec<usize>> {
    if f.x_labels() != f.y_labels() {
        return None;
    }
    let n = f.x_labels().len();
    for x in 0..n {
        for y in 0..n {
            if f.value(x, y) != if x == y { 1.0 } else { 0.0 } {
                return None;
            }
        }
    }
    let m = alpha.t_labels().len();
    let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); m];
    for t in 0..m {
        for x in 0..n {
            match alpha.value(t, x) {
                0.0 => {}
                1.0 => blocks[t].push(x),
                _ => return None,
            }
        }
        if blocks[t].is_empty() {
            return None;
        }
    }
    let restricted_size: usize = blocks.iter().map(Vec::len).product();
    if space.len() < 4 * restricted_size {
        return None;
    }
    let mut tuples = Vec::with_capacity(restricted_size);
    let mut odo = vec![0usize; m];
    loop {
        let components: Vec<usize> = (0..m).map(|t| blocks[t][odo[t]]).collect();
        tuples.push(space.index(&components));
        let mut t = m;
        loop {
            if t == 0 {
                return Some(tuples);
            }
            t -= 1;
            odo[t] += 1;
            if odo[t] < blocks[t].len() {
                break;
            }
            odo[t] = 0;
        }
    }
}

fn restricted_epost(
    e: &StateEnsemble,
    aux: &AuxiliaryEnsemble,
    space: OutcomeSpace,
    restricted: &[usize],
    policy: &SolverPolicy,
) -> Result<PosteriorOptimum> {
    let sub_trace: f64 = restricted
        .iter()
        .map(|&i| aux.ensemble.operator(i).trace())
        .sum();
    let labels: Vec<String> = restricted.iter().map(|&i| space.label(i)).collect();
    let ops: Vec<Hermitian> = restricted
        .iter()
        .map(|&i| aux.ensemble.operator(i).scaled(1.0 / sub_trace))
        .collect();
    let sub = StateEnsemble::new(labels, ops)?;
    let outer = aux.scale * sub_trace;
    let r = discr::solve(&sub, &inner_policy(policy, outer))?;
    certify(outer * r.lower, outer * r.upper, policy.cert_tol)?;

    let mut effects = vec![Hermitian::zeros(e.dim()); space.len()];
    for (k, &i) in restricted.iter().enumerate() {
        effects[i] = r.measurement.effect(k).clone();
    }
    let measurement = Measurement::new(space.all_labels(), effects)?;
    Ok(PosteriorOptimum {
        value: outer * r.lower,
        measurement,
        space,
        iterations: r.iterations,
        bracket: outer * (r.upper - r.lower),
    })
}

/// Maximal average score with prior information: Σ_t q(t)·Δ_t·Pg((E_t)_f),
/// one certified discrimination instance per message.
pub fn epre_max(
    e: &StateEnsemble,
    f: &ScoreFunction,
    alpha: &PartialInfoMap,
    policy: &SolverPolicy,
) -> Result<PriorOptimum> {
    let total_delta = delta(e, f)?;
    let conds = conditionals(e, alpha)?;
    let mut by_message: Vec<Option<Measurement>> = vec![None; alpha.t_labels().len()];
    let mut value = 0.0;
    let mut low = 0.0;
    let mut high = 0.0;
    let mut iterations = 0;
    let inner = if total_delta > 0.0 {
        inner_policy(policy, total_delta)
    } else {
        policy.clone()
    };
    for cond in &conds {
        let aux = aux_plain(&cond.ensemble, f)?;
        if aux.degenerate {
            by_message[cond.t] = Some(Measurement::trivial(f.y_labels().to_vec(), e.dim())?);
            continue;
        }
        let r = discr::solve(&aux.ensemble, &inner)?;
        value += cond.qt * aux.scale * r.lower;
        low += cond.qt * aux.scale * r.lower;
        high += cond.qt * aux.scale * r.upper;
        iterations += r.iterations;
        by_message[cond.t] = Some(r.measurement);
    }
    certify(low, high, policy.cert_tol)?;
    let collection = by_message
        .into_iter()
        .map(|m| match m {
            Some(m) => Ok(m),
            None => Measurement::trivial(f.y_labels().to_vec(), e.dim()),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PriorOptimum {
        value,
        collection,
        iterations,
        bracket: high - low,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{posterior_score, PostProcessing};
    use crate::linalg::ComplexMatrix;
    use crate::random;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    fn bloch_op(scale: f64, v: [f64; 3]) -> Hermitian {
        Hermitian::new(
            ComplexMatrix::from_re_im(
                &[
                    vec![scale * (1.0 + v[2]), scale * v[0]],
                    vec![scale * v[0], scale * (1.0 - v[2])],
                ],
                &[vec![0.0, -scale * v[1]], vec![scale * v[1], 0.0]],
            )
            .unwrap(),
        )
    }

    fn directions(theta: f64) -> [[f64; 3]; 4] {
        let (c, d) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        [[c, d, 0.0], [-c, -d, 0.0], [c, -d, 0.0], [-c, d, 0.0]]
    }

    fn four_state_ensemble(theta: f64) -> StateEnsemble {
        StateEnsemble::new(
            s(&["+a", "-a", "+b", "-b"]),
            directions(theta).iter().map(|&v| bloch_op(0.125, v)).collect(),
        )
        .unwrap()
    }

    fn side_alpha(labels: &[String]) -> PartialInfoMap {
        PartialInfoMap::deterministic(s(&["a", "b"]), labels.to_vec(), &[0, 0, 1, 1]).unwrap()
    }

    fn direction_score(labels: &[String]) -> ScoreFunction {
        ScoreFunction::partition(labels.to_vec(), s(&["a", "b"]), &[0, 0, 1, 1]).unwrap()
    }

    #[test]
    fn delta_examples() {
        let e = four_state_ensemble(0.8);
        let fd = ScoreFunction::discrimination(e.labels());
        assert!((delta(&e, &fd).unwrap() - 1.0).abs() <= 1e-12);
        assert!((delta(&e, &fd.complement()).unwrap() - 3.0).abs() <= 1e-12);
        assert!((delta(&e, &direction_score(e.labels())).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn aux_plain_with_identity_score_is_the_ensemble() {
        let e = four_state_ensemble(1.2);
        let aux = aux_plain(&e, &ScoreFunction::discrimination(e.labels())).unwrap();
        assert!(!aux.degenerate);
        for x in 0..4 {
            assert!(aux
                .ensemble
                .operator(x)
                .matrix()
                .approx_eq(e.operator(x).matrix(), 1e-12));
        }
    }

    #[test]
    fn aux_plain_direction_game_is_two_mixed_states() {
        let e = four_state_ensemble(0.6);
        let aux = aux_plain(&e, &direction_score(e.labels())).unwrap();
        let quarter = ComplexMatrix::identity(2).scaled(0.25);
        for y in 0..2 {
            assert!(aux.ensemble.operator(y).matrix().approx_eq(&quarter, 1e-12));
        }
    }

    #[test]
    fn aux_posterior_single_message_matches_plain() {
        let mut r = random::rng(11);
        let e = random::random_ensemble(&mut r, 2, 3).unwrap();
        let f = random::random_score(&mut r, 3, 4).unwrap();
        let alpha =
            PartialInfoMap::constant(s(&["t0"]), e.labels().to_vec(), &[1.0]).unwrap();
        let plain = aux_plain(&e, &f).unwrap();
        let (post, _) = aux_posterior(&e, &f, &alpha, 10_000).unwrap();
        assert!((post.scale - plain.scale).abs() <= 1e-12);
        for y in 0..4 {
            assert!(post
                .ensemble
                .operator(y)
                .matrix()
                .approx_eq(plain.ensemble.operator(y).matrix(), 1e-12));
        }
    }

    #[test]
    fn aux_posterior_block_formula_for_deterministic_messages() {
        let theta = std::f64::consts::FRAC_PI_2;
        let e = four_state_ensemble(theta);
        let f = ScoreFunction::discrimination(e.labels());
        let alpha = side_alpha(e.labels());
        let (aux, space) = aux_posterior(&e, &f, &alpha, 10_000).unwrap();
        assert_eq!(space.len(), 16);
        // Tuple (+a, +b): both components match their blocks.
        let both = space.index(&[0, 2]);
        let mut want = e.operator(0).scaled(0.25);
        want.axpy(0.25, e.operator(2));
        assert!(aux.ensemble.operator(both).matrix().approx_eq(want.matrix(), 1e-12));
        // Tuple (+b, +a): neither component matches, zero operator.
        let neither = space.index(&[2, 0]);
        assert!(aux.ensemble.operator(neither).fro_norm() <= 1e-15);
        // Tuple (+a, -a): only the first component matches.
        let first_only = space.index(&[0, 1]);
        assert!(aux
            .ensemble
            .operator(first_only)
            .matrix()
            .approx_eq(e.operator(0).scaled(0.25).matrix(), 1e-12));
    }

    #[test]
    fn aux_posterior_is_normalized_on_random_games() {
        let mut r = random::rng(5);
        for _ in 0..5 {
            let e = random::random_ensemble(&mut r, 2, 3).unwrap();
            let f = random::random_score(&mut r, 3, 3).unwrap();
            let alpha = random::random_alpha(&mut r, 2, 3).unwrap();
            let (aux, _) = aux_posterior(&e, &f, &alpha, 10_000).unwrap();
            let total: f64 = aux.ensemble.prior().iter().sum();
            assert!((total - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn conditionals_for_deterministic_messages() {
        let e = four_state_ensemble(1.0);
        let conds = conditionals(&e, &side_alpha(e.labels())).unwrap();
        assert_eq!(conds.len(), 2);
        for cond in &conds {
            assert!((cond.qt - 0.5).abs() <= 1e-12);
        }
        // Message "a" keeps the first pair at weight 1/4 each.
        let dirs = directions(1.0);
        for x in 0..2 {
            assert!(conds[0]
                .ensemble
                .operator(x)
                .matrix()
                .approx_eq(bloch_op(0.25, dirs[x]).matrix(), 1e-12));
        }
        assert!(conds[0].ensemble.operator(2).fro_norm() <= 1e-15);
    }

    #[test]
    fn conditionals_for_exclusion() {
        let e = four_state_ensemble(0.9);
        let alpha = PartialInfoMap::exclude_one(e.labels()).unwrap();
        let conds = conditionals(&e, &alpha).unwrap();
        assert_eq!(conds.len(), 4);
        let dirs = directions(0.9);
        for cond in &conds {
            assert!((cond.qt - 0.25).abs() <= 1e-12);
            for x in 0..4 {
                if x == cond.t {
                    assert!(cond.ensemble.operator(x).fro_norm() <= 1e-15);
                } else {
                    assert!(cond
                        .ensemble
                        .operator(x)
                        .matrix()
                        .approx_eq(bloch_op(1.0 / 6.0, dirs[x]).matrix(), 1e-12));
                }
            }
        }
    }

    #[test]
    fn constant_alpha_conditionals_reproduce_the_ensemble() {
        let e = four_state_ensemble(0.5);
        let alpha =
            PartialInfoMap::constant(s(&["t0", "t1"]), e.labels().to_vec(), &[0.3, 0.7]).unwrap();
        let conds = conditionals(&e, &alpha).unwrap();
        assert_eq!(conds.len(), 2);
        assert!((conds[0].qt - 0.3).abs() <= 1e-12);
        for x in 0..4 {
            assert!(conds[1]
                .ensemble
                .operator(x)
                .matrix()
                .approx_eq(e.operator(x).matrix(), 1e-12));
        }
    }

    fn deterministic_post_closed_form(theta: f64) -> f64 {
        0.5 * (1.0 + ((1.0 + theta.cos()) / 2.0).sqrt())
    }

    fn exclusion_post_closed_form(theta: f64) -> f64 {
        (4.0 + (10.0 + 6.0 * theta.cos()).sqrt()) / 12.0
    }

    #[test]
    fn posterior_optimum_with_deterministic_messages() {
        let policy = SolverPolicy::default();
        for theta in [std::f64::consts::FRAC_PI_3, std::f64::consts::FRAC_PI_2] {
            let e = four_state_ensemble(theta);
            let f = ScoreFunction::discrimination(e.labels());
            let alpha = side_alpha(e.labels());
            let opt = epost_max(&e, &f, &alpha, &policy).unwrap();
            let want = deterministic_post_closed_form(theta);
            assert!(
                (opt.value - want).abs() <= 1e-6,
                "theta {theta}: {} vs {want}",
                opt.value
            );
            // The optimal effects live on the block tuples only.
            for phi in 0..opt.space.len() {
                let in_blocks = opt.space.component(phi, 0) < 2 && opt.space.component(phi, 1) >= 2;
                if !in_blocks {
                    assert!(opt.measurement.effect(phi).fro_norm() <= 1e-12);
                }
            }
            // The value is actually attained by the returned strategy.
            let pi = PostProcessing::canonical(opt.space.clone());
            let replay = posterior_score(&e, &f, &alpha, &opt.measurement, &pi).unwrap();
            assert!((replay - opt.value).abs() <= 1e-9);
        }
    }

    #[test]
    fn posterior_optimum_with_exclusion() {
        let policy = SolverPolicy::default();
        let theta = std::f64::consts::FRAC_PI_2;
        let e = four_state_ensemble(theta);
        let f = ScoreFunction::discrimination(e.labels());
        let alpha = PartialInfoMap::exclude_one(e.labels()).unwrap();
        let opt = epost_max(&e, &f, &alpha, &policy).unwrap();
        let want = exclusion_post_closed_form(theta);
        assert!((opt.value - want).abs() <= 1e-6, "{} vs {want}", opt.value);
        assert_eq!(opt.space.len(), 256);
    }

    #[test]
    fn prior_optimum_examples() {
        let policy = SolverPolicy::default();
        let e = four_state_ensemble(std::f64::consts::FRAC_PI_2);
        let f = ScoreFunction::discrimination(e.labels());

        let det = epre_max(&e, &f, &side_alpha(e.labels()), &policy).unwrap();
        assert!((det.value - 1.0).abs() <= 1e-8, "{}", det.value);

        let exc = epre_max(&e, &f, &PartialInfoMap::exclude_one(e.labels()).unwrap(), &policy)
            .unwrap();
        assert!((exc.value - 2.0 / 3.0).abs() <= 1e-8, "{}", exc.value);
    }

    #[test]
    fn direction_game_scores() {
        let policy = SolverPolicy::default();
        let e = four_state_ensemble(1.3);
        let f = direction_score(e.labels());
        let alpha = PartialInfoMap::exclude_one(e.labels()).unwrap();

        let ef = ef_max(&e, &f, &policy).unwrap();
        assert!((ef.value - 0.5).abs() <= 1e-8, "{}", ef.value);

        let pre = epre_max(&e, &f, &alpha, &policy).unwrap();
        assert!((pre.value - 2.0 / 3.0).abs() <= 1e-8, "{}", pre.value);

        let post = epost_max(&e, &f, &alpha, &policy).unwrap();
        assert!((post.value - 2.0 / 3.0).abs() <= 1e-6, "{}", post.value);
    }

    #[test]
    fn degenerate_score_short_circuits() {
        let e = four_state_ensemble(0.7);
        let f = ScoreFunction::new(
            e.labels().to_vec(),
            s(&["y"]),
            vec![vec![0.0]; 4],
        )
        .unwrap();
        let alpha = side_alpha(e.labels());
        let opt = epost_max(&e, &f, &alpha, &SolverPolicy::default()).unwrap();
        assert_eq!(opt.value, 0.0);
        assert_eq!(opt.iterations, 0);
    }

    #[test]
    fn side_information_orderings_hold_on_a_random_game() {
        let policy = SolverPolicy::default();
        let mut r = random::rng(23);
        let e = random::random_ensemble(&mut r, 2, 3).unwrap();
        let f = random::random_score(&mut r, 3, 2).unwrap();
        let alpha = random::random_alpha(&mut r, 2, 3).unwrap();
        let ef = ef_max(&e, &f, &policy).unwrap().value;
        let post = epost_max(&e, &f, &alpha, &policy).unwrap().value;
        let pre = epre_max(&e, &f, &alpha, &policy).unwrap().value;
        assert!(pre >= post - 1e-6, "pre {pre} post {post}");
        assert!(post >= ef - 1e-6, "post {post} ef {ef}");
    }

    #[test]
    fn card_game_posterior_optimum_is_one() {
        let h = 1.0 / 2f64.sqrt();
        let vecs = [
            [h, h, 0.0],
            [h, -h, 0.0],
            [h, 0.0, h],
            [h, 0.0, -h],
        ];
        let labels = s(&["clubs", "spades", "diamonds", "hearts"]);
        let ops: Vec<Hermitian> = vecs
            .iter()
            .map(|v| {
                Hermitian::new(ComplexMatrix::from_fn(3, |i, j| {
                    num_complex::Complex64::new(0.25 * v[i] * v[j], 0.0)
                }))
            })
            .collect();
        let e = StateEnsemble::new(labels.clone(), ops).unwrap();
        let f = ScoreFunction::discrimination(&labels);
        let alpha =
            PartialInfoMap::deterministic(s(&["black", "red"]), labels, &[0, 0, 1, 1]).unwrap();
        let opt = epost_max(&e, &f, &alpha, &SolverPolicy::default()).unwrap();
        assert!((opt.value - 1.0).abs() <= 1e-6, "{}", opt.value);

        let (bound, _, _) = discr::eigenvalue_bound(&e).unwrap();
        assert!((bound - 0.75).abs() <= 1e-12);
    }
}
