//! Certified minimum-error state discrimination.
//!
//! The guessing probability is bracketed from below by a concrete measurement
//! (fixed-point primal ascent from the pretty-good measurement) and from above
//! by a dual-feasible operator. When the eigenvalue bound d·Λ is attained by
//! an explicit measurement the solver short-circuits to the exact value.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::games::{Measurement, StateEnsemble};
use crate::linalg::{trace_inner, Hermitian};
use crate::policy::{NumericPolicy, SolverPolicy, EIGEN_MERGE_REL};
use crate::random;

/// Certified bracket for the guessing probability of one ensemble.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiscriminationResult {
    pub lower: f64,
    pub upper: f64,
    pub certified: bool,
    pub iterations: usize,
    pub measurement: Measurement,
    pub dual: Hermitian,
}

/// Σ_x tr[E(x)M(x)], the success probability of guessing by index.
pub fn guessing_score(e: &StateEnsemble, m: &Measurement) -> Result<f64> {
    if e.len() != m.len() {
        return Err(Error::LabelMismatch(
            "measurement must have one outcome per ensemble label".into(),
        ));
    }
    let mut acc = 0.0;
    for x in 0..e.len() {
        acc += trace_inner(e.operator(x), m.effect(x))?;
    }
    Ok(acc)
}

/// Largest eigenvalue over all ensemble operators.
pub fn lambda_max(e: &StateEnsemble) -> Result<f64> {
    let mut top = f64::NEG_INFINITY;
    for x in 0..e.len() {
        let (l, _) = e.operator(x).max_eigenvalue()?;
        top = top.max(l);
    }
    Ok(top)
}

/// The bound Pg ≤ d·Λ(E), with a tightness search.
///
/// The bound is attained exactly when some measurement satisfies
/// E(x)M(x) = Λ M(x) for every x. The search places each candidate effect
/// inside the Λ-eigenspace of its operator, M(x) = c_x Π_x, and solves the
/// completion Σ_x c_x Π_x = I in least squares with nonnegative weights.
pub fn eigenvalue_bound(e: &StateEnsemble) -> Result<(f64, bool, Option<Measurement>)> {
    let d = e.dim();
    let tol = NumericPolicy::default().abs;
    let mut tops = Vec::with_capacity(e.len());
    let mut lambda = f64::NEG_INFINITY;
    for x in 0..e.len() {
        let pair = e.operator(x).max_eigenvalue()?;
        lambda = lambda.max(pair.0);
        tops.push(pair);
    }
    let bound = d as f64 * lambda;

    let merge = EIGEN_MERGE_REL * lambda.abs().max(1.0);
    let maximal: Vec<usize> = (0..e.len())
        .filter(|&x| lambda - tops[x].0 <= merge)
        .collect();
    let projectors: Vec<&Hermitian> = maximal.iter().map(|&x| &tops[x].1).collect();

    match complete_to_identity(&projectors, d, tol)? {
        None => Ok((bound, false, None)),
        Some(coeffs) => {
            let mut effects = vec![Hermitian::zeros(d); e.len()];
            for (k, &x) in maximal.iter().enumerate() {
                effects[x] = projectors[k].scaled(coeffs[k]);
            }
            let m = Measurement::new(e.labels().to_vec(), effects)?;
            Ok((bound, true, Some(m)))
        }
    }
}

/// Nonnegative least squares for Σ_k c_k P_k = I, accepted only when the
/// residual is below `tol` in Frobenius norm.
fn complete_to_identity(
    projectors: &[&Hermitian],
    dim: usize,
    tol: f64,
) -> Result<Option<Vec<f64>>> {
    if projectors.is_empty() {
        return Ok(None);
    }
    let n = projectors.len();
    let mut active: Vec<usize> = (0..n).collect();
    loop {
        if active.is_empty() {
            return Ok(None);
        }
        let k = active.len();
        // Normal equations on the active set: G c = b with the trace pairing.
        let mut g = crate::linalg::ComplexMatrix::zeros(k);
        let mut b = vec![0.0; k];
        for i in 0..k {
            b[i] = projectors[active[i]].trace();
            for j in 0..k {
                let v = trace_inner(projectors[active[i]], projectors[active[j]])?;
                g.set(i, j, num_complex::Complex64::new(v, 0.0));
            }
        }
        let eig = Hermitian::new(g).eig()?;
        let cut = 1e-12 * eig.eigenvalues.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        // Min-norm solution c = G^+ b.
        let mut c = vec![0.0; k];
        for vcol in 0..k {
            let lam = eig.eigenvalues[vcol];
            if lam <= cut {
                continue;
            }
            let mut proj = num_complex::Complex64::new(0.0, 0.0);
            for row in 0..k {
                proj += eig.vectors.get(row, vcol).conj() * b[row];
            }
            for row in 0..k {
                let contrib = eig.vectors.get(row, vcol) * proj / lam;
                c[row] += contrib.re;
            }
        }
        if let Some(worst) = (0..k)
            .filter(|&i| c[i] < -1e-9)
            .min_by(|&i, &j| c[i].partial_cmp(&c[j]).expect("finite"))
        {
            active.remove(worst);
            continue;
        }
        for v in &mut c {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let mut sum = Hermitian::zeros(dim);
        for (i, &idx) in active.iter().enumerate() {
            sum.axpy(c[i], projectors[idx]);
        }
        let residual = sum.sub(&Hermitian::identity(dim)).fro_norm();
        if residual > tol {
            return Ok(None);
        }
        let mut full = vec![0.0; n];
        for (i, &idx) in active.iter().enumerate() {
            full[idx] = c[i];
        }
        return Ok(Some(full));
    }
}

/// Closed-form optimum for a two-label ensemble:
/// Pg = (1/2)(tr[E(1)+E(2)] + ‖E(1)−E(2)‖₁), measurement from the sign
/// decomposition of the difference, zero eigenvalues assigned to outcome 1.
pub fn helstrom_binary(e: &StateEnsemble) -> Result<(f64, Measurement)> {
    if e.len() != 2 {
        return Err(Error::Invalid(format!(
            "binary oracle needs exactly two labels, got {}",
            e.len()
        )));
    }
    let diff = e.operator(0).sub(e.operator(1));
    let eig = diff.eig()?;
    let trace_norm: f64 = eig.eigenvalues.iter().map(|l| l.abs()).sum();
    let value = 0.5 * (e.operator(0).trace() + e.operator(1).trace() + trace_norm);
    let first: Vec<usize> = (0..eig.dim()).filter(|&i| eig.eigenvalues[i] >= 0.0).collect();
    let p = eig.projector(&first);
    let q = Hermitian::identity(e.dim()).sub(&p);
    let m = Measurement::new(e.labels().to_vec(), vec![p, q])?;
    Ok((value, m))
}

/// Pretty-good measurement M(x) = S^{-1/2} E(x) S^{-1/2}, with the identity
/// completion off the support of S = Σ_x E(x) assigned to the first label.
pub fn pretty_good(e: &StateEnsemble, pinv_cutoff: f64) -> Result<Measurement> {
    let mut s = Hermitian::zeros(e.dim());
    for x in 0..e.len() {
        s.axpy(1.0, e.operator(x));
    }
    let (inv, support) = s.eig()?.pseudo_inv_sqrt(pinv_cutoff);
    let mut effects: Vec<Hermitian> = (0..e.len())
        .map(|x| Hermitian::new(&(inv.matrix() * e.operator(x).matrix()) * inv.matrix()))
        .collect();
    let off = Hermitian::identity(e.dim()).sub(&support);
    effects[0].axpy(1.0, &off);
    Measurement::new(e.labels().to_vec(), effects)
}

fn ascent_step_unchecked(
    e: &StateEnsemble,
    effects: &[Hermitian],
    pinv_cutoff: f64,
) -> Result<Vec<Hermitian>> {
    let dim = e.dim();
    let mut r = Hermitian::zeros(dim);
    for x in 0..e.len() {
        let em = e.operator(x).matrix() * effects[x].matrix();
        r = r.add(&Hermitian::new(&em * e.operator(x).matrix()));
    }
    let (inv, support) = r.eig()?.pseudo_inv_sqrt(pinv_cutoff);
    let mut next: Vec<Hermitian> = (0..e.len())
        .map(|x| {
            let core = &(e.operator(x).matrix() * effects[x].matrix()) * e.operator(x).matrix();
            Hermitian::new(&(inv.matrix() * &core) * inv.matrix())
        })
        .collect();
    let off = Hermitian::identity(dim).sub(&support);
    next[0].axpy(1.0, &off);
    Ok(next)
}

/// One fixed-point update M(x) ← R^{-1/2} E(x) M(x) E(x) R^{-1/2} with
/// R = Σ_y E(y)M(y)E(y); the guessing score never decreases.
pub fn ascent_step(e: &StateEnsemble, m: &Measurement, policy: &SolverPolicy) -> Result<Measurement> {
    if e.len() != m.len() {
        return Err(Error::LabelMismatch(
            "measurement must have one outcome per ensemble label".into(),
        ));
    }
    let next = ascent_step_unchecked(e, m.effects(), policy.pinv_cutoff)?;
    Measurement::new(m.labels().to_vec(), next)
}

/// Fixed-point ascent from `m0` (pretty-good measurement when absent).
/// Returns the achieved value, the measurement, and the iteration count.
pub fn primal_ascent(
    e: &StateEnsemble,
    m0: Option<Measurement>,
    policy: &SolverPolicy,
) -> Result<(f64, Measurement, usize)> {
    let m0 = match m0 {
        Some(m) => m,
        None => pretty_good(e, policy.pinv_cutoff)?,
    };
    let (value, effects, iterations) = ascent_loop(e, m0.effects().to_vec(), policy, None)?;
    let m = Measurement::new(e.labels().to_vec(), effects)?;
    Ok((value, m, iterations))
}

/// Core ascent loop on raw effects. `watch` is called every 25 iterations
/// with the current effects and may signal early exit by returning true.
fn ascent_loop(
    e: &StateEnsemble,
    mut effects: Vec<Hermitian>,
    policy: &SolverPolicy,
    mut watch: Option<&mut dyn FnMut(&[Hermitian]) -> Result<bool>>,
) -> Result<(f64, Vec<Hermitian>, usize)> {
    let mut value = raw_score(e, &effects)?;
    let mut iterations = 0;
    while iterations < policy.max_iterations {
        let next = ascent_step_unchecked(e, &effects, policy.pinv_cutoff)?;
        let next_value = raw_score(e, &next)?;
        iterations += 1;
        if next_value < value - policy.ascent_stop {
            // Numerical regression; keep the better iterate.
            break;
        }
        let gain = next_value - value;
        effects = next;
        value = next_value;
        if gain < policy.ascent_stop {
            break;
        }
        if iterations % 25 == 0 {
            if let Some(cb) = watch.as_deref_mut() {
                if cb(&effects)? {
                    break;
                }
            }
        }
    }
    Ok((value, effects, iterations))
}

fn raw_score(e: &StateEnsemble, effects: &[Hermitian]) -> Result<f64> {
    let mut acc = 0.0;
    for x in 0..e.len() {
        acc += trace_inner(e.operator(x), &effects[x])?;
    }
    Ok(acc)
}

/// Dual feasibility certificate from a measurement: K the Hermitian part of
/// Σ_x E(x)M(x), lifted by ε = max_x λ_max(E(x) − K) so that Y = K + εI
/// dominates every E(x); then Pg ≤ tr Y.
pub fn dual_certificate(e: &StateEnsemble, m: &Measurement) -> Result<(f64, Hermitian)> {
    if e.len() != m.len() {
        return Err(Error::LabelMismatch(
            "measurement must have one outcome per ensemble label".into(),
        ));
    }
    let (upper, y) = dual_from_effects(e, m.effects())?;
    Ok((upper, y))
}

fn dual_from_effects(e: &StateEnsemble, effects: &[Hermitian]) -> Result<(f64, Hermitian)> {
    let dim = e.dim();
    let mut k = Hermitian::zeros(dim);
    for x in 0..e.len() {
        k = k.add(&Hermitian::new(e.operator(x).matrix() * effects[x].matrix()));
    }
    let mut eps = 0.0f64;
    for x in 0..e.len() {
        let (top, _) = e.operator(x).sub(&k).max_eigenvalue()?;
        eps = eps.max(top);
    }
    let mut y = k.clone();
    y.axpy(eps, &Hermitian::identity(dim));
    Ok((k.trace() + dim as f64 * eps, y))
}

/// Certified bracket for Pg(E).
///
/// Fast path: when the eigenvalue bound is attained by an explicit
/// measurement, the bracket closes at machine precision with zero iterations.
/// Otherwise primal ascent interleaved with dual certificates, restarting
/// from perturbed initial measurements while the bracket stays open.
pub fn solve(e: &StateEnsemble, policy: &SolverPolicy) -> Result<DiscriminationResult> {
    let d = e.dim();
    let (bound, tight, witness) = eigenvalue_bound(e)?;
    let lambda = bound / d as f64;
    if let (true, Some(m)) = (tight, witness) {
        let lower = guessing_score(e, &m)?;
        let upper = bound.max(lower);
        return Ok(DiscriminationResult {
            lower,
            upper,
            certified: upper - lower <= policy.cert_tol,
            iterations: 0,
            measurement: m,
            dual: Hermitian::identity(d).scaled(lambda),
        });
    }

    let mut rng = random::rng(policy.seed);
    let mut best_lower = f64::NEG_INFINITY;
    let mut best_effects: Option<Vec<Hermitian>> = None;
    let mut best_upper = bound;
    let mut best_dual = Hermitian::identity(d).scaled(lambda);
    let mut total_iterations = 0;

    let m0 = pretty_good(e, policy.pinv_cutoff)?;
    let mut start = m0.effects().to_vec();
    for _attempt in 0..=policy.restarts {
        let mut watch_upper = best_upper;
        let mut watch_dual: Option<Hermitian> = None;
        let mut certified_early = false;
        let outcome = {
            let mut watch = |effects: &[Hermitian]| -> Result<bool> {
                let (up, dual) = dual_from_effects(e, effects)?;
                if up < watch_upper {
                    watch_upper = up;
                    watch_dual = Some(dual);
                }
                let low = raw_score(e, effects)?;
                certified_early = watch_upper - low <= policy.cert_tol;
                Ok(certified_early)
            };
            ascent_loop(e, start.clone(), policy, Some(&mut watch))?
        };
        let (value, effects, iterations) = outcome;
        total_iterations += iterations;
        let (up, dual) = dual_from_effects(e, &effects)?;
        if up < watch_upper {
            watch_upper = up;
            watch_dual = Some(dual);
        }
        if watch_upper < best_upper {
            best_upper = watch_upper;
            if let Some(dl) = watch_dual {
                best_dual = dl;
            }
        }
        if value > best_lower {
            best_lower = value;
            best_effects = Some(effects.clone());
        }
        if best_upper - best_lower <= policy.cert_tol {
            break;
        }
        // Restart from a convex mixture with a fresh random POVM.
        let fresh = random::random_measurement_labeled(&mut rng, d, e.labels().to_vec())?;
        start = effects
            .iter()
            .zip(fresh.effects())
            .map(|(a, b)| {
                let mut mix = a.scaled(0.7);
                mix.axpy(0.3, b);
                mix
            })
            .collect();
    }

    let effects = best_effects.expect("at least one ascent ran");
    let measurement = Measurement::new(e.labels().to_vec(), effects)?;
    let lower = guessing_score(e, &measurement)?;
    let upper = best_upper.max(lower);
    Ok(DiscriminationResult {
        lower,
        upper,
        certified: upper - lower <= policy.cert_tol,
        iterations: total_iterations,
        measurement,
        dual: best_dual,
    })
}
