//! Dense complex Hermitian linear algebra at small dimension.
//!
//! Everything downstream works with operators on spaces of dimension a few
//! units (qubits and qutrits, with room up to 64 for commutant computations),
//! so matrices are plain row-major buffers and the eigensolver is a cyclic
//! Jacobi iteration. No external solver is involved anywhere.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::policy::{EIGEN_MERGE_REL, HERMITIAN_SYMMETRY_TOL};

/// Dense complex square matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix(dim={})", self.dim)?;
        for r in 0..self.dim {
            for c in 0..self.dim {
                let v = self.get(r, c);
                write!(f, " {:+.4}{:+.4}i", v.re, v.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                m.set(r, c, f(r, c));
            }
        }
        m
    }

    /// Builds a matrix from real and imaginary parts given as rows.
    pub fn from_re_im(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        let dim = re.len();
        if dim == 0 || im.len() != dim {
            return Err(Error::Invalid("re/im must be square and non-empty".into()));
        }
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            if re[r].len() != dim || im[r].len() != dim {
                return Err(Error::Invalid("re/im rows must all have the matrix dimension".into()));
            }
            for c in 0..dim {
                let v = Complex64::new(re[r][c], im[r][c]);
                if !v.re.is_finite() || !v.im.is_finite() {
                    return Err(Error::NonFinite);
                }
                m.set(r, c, v);
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self.get(c, r).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self.get(c, r))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from the own adjoint.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for c in 0..self.dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= s;
        }
        out
    }

    pub fn scaled_complex(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= s;
        }
        out
    }

    /// In-place `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &Self) {
        assert_eq!(self.dim, other.dim, "axpy dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += s * b;
        }
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (da, db) = (self.dim, other.dim);
        let mut out = Self::zeros(da * db);
        for i in 0..da {
            for j in 0..da {
                let s = self.get(i, j);
                for k in 0..db {
                    for l in 0..db {
                        out.set(i * db + k, j * db + l, s * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim == other.dim && (self.clone() - other.clone()).fro_norm() <= tol
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(mut self, rhs: ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "add dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(rhs.data.iter()) {
            *a += b;
        }
        self
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(mut self, rhs: ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "sub dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(rhs.data.iter()) {
            *a -= b;
        }
        self
    }
}

impl Neg for ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(mut self) -> ComplexMatrix {
        for a in &mut self.data {
            *a = -*a;
        }
        self
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "mul dimension mismatch");
        let d = self.dim;
        let mut out = ComplexMatrix::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let aik = self.get(i, k);
                if aik == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..d {
                    let v = out.get(i, j) + aik * rhs.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }
}

/// JSON shape: `{"dim": d, "re": [[...]], "im": [[...]]}`.
///
/// Floats are written in the shortest decimal form that round-trips, so
/// serialization followed by deserialization is bit-exact.
impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            dim: usize,
            re: &'a Vec<Vec<f64>>,
            im: &'a Vec<Vec<f64>>,
        }
        let re: Vec<Vec<f64>> = (0..self.dim)
            .map(|r| (0..self.dim).map(|c| self.get(r, c).re).collect())
            .collect();
        let im: Vec<Vec<f64>> = (0..self.dim)
            .map(|r| (0..self.dim).map(|c| self.get(r, c).im).collect())
            .collect();
        Wire {
            dim: self.dim,
            re: &re,
            im: &im,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            dim: usize,
            re: Vec<Vec<f64>>,
            im: Vec<Vec<f64>>,
        }
        let w = Wire::deserialize(deserializer)?;
        if w.re.len() != w.dim || w.im.len() != w.dim {
            return Err(D::Error::custom("re/im row count must equal dim"));
        }
        ComplexMatrix::from_re_im(&w.re, &w.im).map_err(D::Error::custom)
    }
}

/// Hermitian operator; construction symmetrizes, so the symmetry defect is
/// exactly zero afterwards (well under [`HERMITIAN_SYMMETRY_TOL`]).
#[derive(Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Hermitian {
    m: ComplexMatrix,
}

impl fmt::Debug for Hermitian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hermitian{:?}", self.m)
    }
}

impl<'de> Deserialize<'de> for Hermitian {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let m = ComplexMatrix::deserialize(deserializer)?;
        Ok(Hermitian::new(m))
    }
}

impl Hermitian {
    /// Replaces the argument with its Hermitian part `(A + A†)/2`.
    pub fn new(m: ComplexMatrix) -> Self {
        let d = m.dim();
        let mut out = ComplexMatrix::zeros(d);
        for r in 0..d {
            out.set(r, r, Complex64::new(m.get(r, r).re, 0.0));
            for c in (r + 1)..d {
                let v = (m.get(r, c) + m.get(c, r).conj()) * 0.5;
                out.set(r, c, v);
                out.set(c, r, v.conj());
            }
        }
        debug_assert!(out.hermitian_defect() <= HERMITIAN_SYMMETRY_TOL);
        Self { m: out }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            m: ComplexMatrix::zeros(dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: ComplexMatrix::identity(dim),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    pub fn fro_norm(&self) -> f64 {
        self.m.fro_norm()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            m: self.m.scaled(s),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            m: self.m.clone() + other.m.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            m: self.m.clone() - other.m.clone(),
        }
    }

    /// In-place `self += s * other`; sums of Hermitian matrices stay Hermitian bitwise.
    pub fn axpy(&mut self, s: f64, other: &Self) {
        self.m.axpy(s, &other.m);
    }

    /// `U A U†`, re-symmetrized.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        let prod = &(u * &self.m) * &u.adjoint();
        Hermitian::new(prod)
    }

    pub fn eig(&self) -> Result<EigenDecomposition> {
        jacobi_eig(self)
    }

    /// True iff the smallest eigenvalue is at least `-tol`.
    pub fn psd_check(&self, tol: f64) -> Result<bool> {
        let e = self.eig()?;
        Ok(e.eigenvalues[0] >= -tol)
    }

    /// Largest eigenvalue together with the orthogonal projection onto its
    /// eigenspace; eigenvalues within a relative gap of [`EIGEN_MERGE_REL`]
    /// of the maximum are merged into the eigenspace.
    pub fn max_eigenvalue(&self) -> Result<(f64, Hermitian)> {
        let e = self.eig()?;
        let top = *e.eigenvalues.last().expect("dim >= 1");
        let merge = EIGEN_MERGE_REL * top.abs().max(1.0);
        let idx: Vec<usize> = (0..e.eigenvalues.len())
            .filter(|&i| top - e.eigenvalues[i] <= merge)
            .collect();
        Ok((top, e.projector(&idx)))
    }
}

/// Real inner product `Re tr[AB]` of two Hermitian operators.
///
/// The summation is over entrywise products, which makes the call exactly
/// symmetric in its arguments at the floating-point level.
pub fn trace_inner(a: &Hermitian, b: &Hermitian) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let d = a.dim();
    let mut acc = 0.0;
    for r in 0..d {
        for c in 0..d {
            let x = a.matrix().get(r, c);
            let y = b.matrix().get(r, c);
            acc += x.re * y.re + x.im * y.im;
        }
    }
    Ok(acc)
}

/// Eigendecomposition of a Hermitian operator, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose columns are the eigenvectors, in eigenvalue order.
    pub vectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V diag(λ) V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.rebuild_with(|x| x).into_matrix()
    }

    /// `V diag(f(λ)) V†` as a Hermitian operator.
    pub fn rebuild_with(&self, f: impl Fn(f64) -> f64) -> Hermitian {
        let d = self.dim();
        let vals: Vec<f64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        let mut out = ComplexMatrix::zeros(d);
        for i in 0..d {
            for j in i..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..d {
                    if vals[k] != 0.0 {
                        acc += vals[k] * self.vectors.get(i, k) * self.vectors.get(j, k).conj();
                    }
                }
                out.set(i, j, acc);
                out.set(j, i, acc.conj());
            }
        }
        for i in 0..d {
            let v = out.get(i, i);
            out.set(i, i, Complex64::new(v.re, 0.0));
        }
        Hermitian { m: out }
    }

    /// Orthogonal projection onto the span of the selected eigenvectors.
    pub fn projector(&self, indices: &[usize]) -> Hermitian {
        let d = self.dim();
        let mut out = ComplexMatrix::zeros(d);
        for i in 0..d {
            for j in i..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for &k in indices {
                    acc += self.vectors.get(i, k) * self.vectors.get(j, k).conj();
                }
                out.set(i, j, acc);
                out.set(j, i, acc.conj());
            }
        }
        for i in 0..d {
            let v = out.get(i, i);
            out.set(i, i, Complex64::new(v.re, 0.0));
        }
        Hermitian { m: out }
    }

    /// `V diag(g(λ)) V†` with `g = 1/sqrt(λ)` on eigenvalues above the relative
    /// cutoff and `0` below, plus the projector onto the retained support.
    pub fn pseudo_inv_sqrt(&self, rel_cutoff: f64) -> (Hermitian, Hermitian) {
        let top = self
            .eigenvalues
            .iter()
            .fold(0.0f64, |m, &x| m.max(x.abs()));
        let cut = rel_cutoff * top;
        let inv = self.rebuild_with(|x| if x > cut && x > 0.0 { 1.0 / x.sqrt() } else { 0.0 });
        let support: Vec<usize> = (0..self.dim())
            .filter(|&i| self.eigenvalues[i] > cut && self.eigenvalues[i] > 0.0)
            .collect();
        (inv, self.projector(&support))
    }

    /// Frobenius defect of `V†V - I`.
    pub fn unitarity_defect(&self) -> f64 {
        let vtv = &self.vectors.adjoint() * &self.vectors;
        (vtv - ComplexMatrix::identity(self.dim())).fro_norm()
    }
}

const JACOBI_MAX_SWEEPS: usize = 100;

fn offdiag_fro(m: &ComplexMatrix) -> f64 {
    let d = m.dim();
    let mut acc = 0.0;
    for r in 0..d {
        for c in 0..d {
            if r != c {
                acc += m.get(r, c).norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Cyclic Jacobi iteration for complex Hermitian matrices.
fn jacobi_eig(a: &Hermitian) -> Result<EigenDecomposition> {
    let d = a.dim();
    if d == 1 {
        return Ok(EigenDecomposition {
            eigenvalues: vec![a.matrix().get(0, 0).re],
            vectors: ComplexMatrix::identity(1),
        });
    }
    let mut m = a.matrix().clone();
    let mut v = ComplexMatrix::identity(d);
    let scale = m.fro_norm().max(1.0);
    let target = 1e-13 * scale;
    let skip = 1e-18 * scale;

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if offdiag_fro(&m) <= target {
            converged = true;
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = m.get(p, q);
                let napq = apq.norm();
                if napq <= skip {
                    continue;
                }
                let alpha = m.get(p, p).re;
                let beta = m.get(q, q).re;
                let phase = apq / napq;
                let theta = (beta - alpha) / (2.0 * napq);
                // Small root of t^2 - 2 theta t - 1 = 0.
                let t = if theta >= 0.0 {
                    -1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let sphc = s * phase.conj();
                let sph = s * phase;

                // Right multiplication by the rotation: columns p and q.
                for k in 0..d {
                    let akp = m.get(k, p);
                    let akq = m.get(k, q);
                    m.set(k, p, akp * c + akq * sphc);
                    m.set(k, q, akq * c - akp * sph);
                }
                // Left multiplication by the adjoint rotation: rows p and q.
                for k in 0..d {
                    let apk = m.get(p, k);
                    let aqk = m.get(q, k);
                    m.set(p, k, apk * c + aqk * sph);
                    m.set(q, k, aqk * c - apk * sphc);
                }
                m.set(p, q, Complex64::new(0.0, 0.0));
                m.set(q, p, Complex64::new(0.0, 0.0));
                let mpp = m.get(p, p);
                m.set(p, p, Complex64::new(mpp.re, 0.0));
                let mqq = m.get(q, q);
                m.set(q, q, Complex64::new(mqq.re, 0.0));

                // Accumulate eigenvectors.
                for k in 0..d {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, vkp * c + vkq * sphc);
                    v.set(k, q, vkq * c - vkp * sph);
                }
            }
        }
    }
    if !converged && offdiag_fro(&m) > target {
        return Err(Error::EigNoConvergence {
            sweeps: JACOBI_MAX_SWEEPS,
        });
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| {
        m.get(i, i)
            .re
            .partial_cmp(&m.get(j, j).re)
            .expect("finite eigenvalues")
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m.get(i, i).re).collect();
    let vectors = ComplexMatrix::from_fn(d, |r, c| v.get(r, order[c]));
    Ok(EigenDecomposition {
        eigenvalues,
        vectors,
    })
}
