//! Seeded random instances of the game objects, for property tests, solver
//! restarts, and sampled compatibility experiments. All generators are
//! deterministic functions of the supplied RNG.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::games::{
    marginal, standard_lift, Measurement, OutcomeSpace, PartialInfoMap, PostProcessing,
    ScoreFunction, StateEnsemble,
};
use crate::linalg::{ComplexMatrix, Hermitian};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit(v: &mut impl Rng) -> f64 {
    2.0 * v.random::<f64>() - 1.0
}

pub fn random_matrix(r: &mut impl Rng, dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| Complex64::new(unit(r), unit(r)))
}

pub fn random_hermitian(r: &mut impl Rng, dim: usize) -> Hermitian {
    Hermitian::new(random_matrix(r, dim))
}

/// G G†: positive semidefinite, almost surely full rank.
pub fn random_psd(r: &mut impl Rng, dim: usize) -> Hermitian {
    let g = random_matrix(r, dim);
    Hermitian::new(&g * &g.adjoint())
}

/// Normalized rank-one projector.
pub fn random_pure_state(r: &mut impl Rng, dim: usize) -> Hermitian {
    let v: Vec<Complex64> = (0..dim).map(|_| Complex64::new(unit(r), unit(r))).collect();
    let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let m = ComplexMatrix::from_fn(dim, |i, j| v[i] * v[j].conj() / (norm * norm));
    Hermitian::new(m)
}

fn seq_labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

pub fn random_ensemble(r: &mut impl Rng, dim: usize, n: usize) -> Result<StateEnsemble> {
    let ops: Vec<Hermitian> = (0..n).map(|_| random_psd(r, dim)).collect();
    let total: f64 = ops.iter().map(|o| o.trace()).sum();
    StateEnsemble::new(
        seq_labels("x", n),
        ops.into_iter().map(|o| o.scaled(1.0 / total)).collect(),
    )
}

/// Equal-prior ensemble of pure states.
pub fn random_pure_ensemble(r: &mut impl Rng, dim: usize, n: usize) -> Result<StateEnsemble> {
    let w = 1.0 / n as f64;
    StateEnsemble::new(
        seq_labels("x", n),
        (0..n).map(|_| random_pure_state(r, dim).scaled(w)).collect(),
    )
}

/// Diagonal (classical) ensemble.
pub fn random_diagonal_ensemble(r: &mut impl Rng, dim: usize, n: usize) -> Result<StateEnsemble> {
    let raw: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| r.random::<f64>()).collect())
        .collect();
    let total: f64 = raw.iter().flatten().sum();
    let ops = raw
        .into_iter()
        .map(|d| {
            Hermitian::new(ComplexMatrix::from_fn(dim, |i, j| {
                if i == j {
                    Complex64::new(d[i] / total, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }))
        })
        .collect();
    StateEnsemble::new(seq_labels("x", n), ops)
}

/// POVM obtained by sandwiching random positive operators with S^{-1/2}.
pub fn random_measurement(r: &mut impl Rng, dim: usize, n: usize) -> Result<Measurement> {
    random_measurement_labeled(r, dim, seq_labels("y", n))
}

pub fn random_measurement_labeled(
    r: &mut impl Rng,
    dim: usize,
    labels: Vec<String>,
) -> Result<Measurement> {
    let n = labels.len();
    let raw: Vec<Hermitian> = (0..n)
        .map(|_| {
            let mut a = random_psd(r, dim);
            a.axpy(0.05, &Hermitian::identity(dim));
            a
        })
        .collect();
    let mut s = Hermitian::zeros(dim);
    for a in &raw {
        s.axpy(1.0, a);
    }
    let (inv, _) = s.eig()?.pseudo_inv_sqrt(1e-12);
    let effects = raw
        .into_iter()
        .map(|a| Hermitian::new(&(inv.matrix() * a.matrix()) * inv.matrix()))
        .collect();
    Measurement::new(labels, effects)
}

/// Sharp qubit measurement along a Bloch axis: effects (1/2)(I ± u·σ).
pub fn sharp_qubit_measurement(u: [f64; 3], labels: Vec<String>) -> Result<Measurement> {
    let eff = |sign: f64| {
        Hermitian::new(
            ComplexMatrix::from_re_im(
                &[
                    vec![0.5 * (1.0 + sign * u[2]), 0.5 * sign * u[0]],
                    vec![0.5 * sign * u[0], 0.5 * (1.0 - sign * u[2])],
                ],
                &[
                    vec![0.0, -0.5 * sign * u[1]],
                    vec![0.5 * sign * u[1], 0.0],
                ],
            )
            .expect("finite entries"),
        )
    };
    Measurement::new(labels, vec![eff(1.0), eff(-1.0)])
}

pub fn random_unit_bloch(r: &mut impl Rng) -> [f64; 3] {
    loop {
        let v = [unit(r), unit(r), unit(r)];
        let n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        if n2 > 1e-4 && n2 <= 1.0 {
            let n = n2.sqrt();
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// Two sharp qubit measurements along clearly non-parallel random axes.
pub fn random_sharp_qubit_pair(r: &mut impl Rng) -> Result<Vec<Measurement>> {
    let labels = seq_labels("y", 2);
    let u = random_unit_bloch(r);
    let v = loop {
        let w = random_unit_bloch(r);
        let dot: f64 = u.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
        if dot.abs() < 0.9 {
            break w;
        }
    };
    Ok(vec![
        sharp_qubit_measurement(u, labels.clone())?,
        sharp_qubit_measurement(v, labels)?,
    ])
}

pub fn random_score(r: &mut impl Rng, nx: usize, ny: usize) -> Result<ScoreFunction> {
    let table = (0..nx)
        .map(|_| (0..ny).map(|_| r.random::<f64>()).collect())
        .collect();
    ScoreFunction::new(seq_labels("x", nx), seq_labels("y", ny), table)
}

pub fn random_alpha(r: &mut impl Rng, nt: usize, nx: usize) -> Result<PartialInfoMap> {
    let mut table = vec![vec![0.0; nx]; nt];
    for x in 0..nx {
        let col: Vec<f64> = (0..nt).map(|_| r.random::<f64>() + 1e-3).collect();
        let sum: f64 = col.iter().sum();
        for t in 0..nt {
            table[t][x] = col[t] / sum;
        }
    }
    PartialInfoMap::new(seq_labels("t", nt), seq_labels("x", nx), table)
}

pub fn random_post_processing(
    r: &mut impl Rng,
    nt: usize,
    nz: usize,
    ny: usize,
) -> Result<PostProcessing> {
    let mut nu = vec![vec![vec![0.0; nz]; ny]; nt];
    for t in 0..nt {
        for z in 0..nz {
            let col: Vec<f64> = (0..ny).map(|_| r.random::<f64>() + 1e-3).collect();
            let sum: f64 = col.iter().sum();
            for y in 0..ny {
                nu[t][y][z] = col[y] / sum;
            }
        }
    }
    PostProcessing::table(
        seq_labels("t", nt),
        seq_labels("z", nz),
        seq_labels("y", ny),
        nu,
    )
}

/// A collection compatible by construction: marginals of a random lift.
pub fn random_compatible_collection(
    r: &mut impl Rng,
    dim: usize,
    nz: usize,
    ny: usize,
    nt: usize,
    cap: usize,
) -> Result<Vec<Measurement>> {
    let m = random_measurement_labeled(r, dim, seq_labels("z", nz))?;
    let nu = random_post_processing(r, nt, nz, ny)?;
    let lifted = standard_lift(&m, &nu, cap)?;
    let space = OutcomeSpace::new(seq_labels("y", ny), seq_labels("t", nt), cap)?;
    (0..nt).map(|t| marginal(&lifted, &space, t)).collect()
}
