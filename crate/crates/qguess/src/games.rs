//! Game objects: state ensembles, POVMs, score functions, partial-information
//! maps, post-processings, and the average-score evaluators including the
//! standard-form lift onto tuple outcomes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{trace_inner, ComplexMatrix, Hermitian};
use crate::policy::{NumericPolicy, STOCHASTIC_TOL};

fn check_unique(labels: &[String], what: &str) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::Invalid(format!("{what} label set is empty")));
    }
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::LabelMismatch(format!("duplicate {what} label '{l}'")));
        }
    }
    Ok(())
}

/// Label-indexed positive operators with unit total trace.
#[derive(Clone, Debug)]
pub struct StateEnsemble {
    labels: Vec<String>,
    ops: Vec<Hermitian>,
    dim: usize,
}

impl StateEnsemble {
    pub fn new(labels: Vec<String>, ops: Vec<Hermitian>) -> Result<Self> {
        check_unique(&labels, "ensemble")?;
        if labels.len() != ops.len() {
            return Err(Error::Invalid("ensemble labels/operators length mismatch".into()));
        }
        let tol = NumericPolicy::default().abs;
        let dim = ops[0].dim();
        let mut total = 0.0;
        for (l, op) in labels.iter().zip(ops.iter()) {
            if op.dim() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    found: op.dim(),
                });
            }
            if !op.psd_check(tol)? {
                return Err(Error::NotPsd(format!("ensemble operator '{l}'")));
            }
            total += op.trace();
        }
        if (total - 1.0).abs() > tol {
            return Err(Error::NotNormalized(format!(
                "ensemble total trace {total:.12e}, expected 1"
            )));
        }
        Ok(Self { labels, ops, dim })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operator(&self, i: usize) -> &Hermitian {
        &self.ops[i]
    }

    pub fn operators(&self) -> &[Hermitian] {
        &self.ops
    }

    /// Probabilities p(x) = tr E(x). Zero-trace labels are retained.
    pub fn prior(&self) -> Vec<f64> {
        self.ops.iter().map(|o| o.trace()).collect()
    }
}

impl Serialize for StateEnsemble {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let entries: Vec<EnsembleEntry> = self
            .labels
            .iter()
            .zip(&self.ops)
            .map(|(l, op)| EnsembleEntry {
                label: l.clone(),
                matrix: op.matrix().clone(),
            })
            .collect();
        entries.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StateEnsemble {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let entries = Vec::<EnsembleEntry>::deserialize(deserializer)?;
        let (labels, ops) = entries
            .into_iter()
            .map(|e| (e.label, Hermitian::new(e.matrix)))
            .unzip();
        StateEnsemble::new(labels, ops).map_err(serde::de::Error::custom)
    }
}

/// Outcome-indexed POVM: positive effects summing to the identity.
#[derive(Clone, Debug)]
pub struct Measurement {
    labels: Vec<String>,
    effects: Vec<Hermitian>,
    dim: usize,
}

#[derive(Serialize, Deserialize)]
struct MeasurementWire {
    labels: Vec<String>,
    effects: Vec<ComplexMatrix>,
}

impl Serialize for Measurement {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MeasurementWire {
            labels: self.labels.clone(),
            effects: self.effects.iter().map(|e| e.matrix().clone()).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Measurement {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let w = MeasurementWire::deserialize(deserializer)?;
        Measurement::new(w.labels, w.effects.into_iter().map(Hermitian::new).collect())
            .map_err(serde::de::Error::custom)
    }
}

impl Measurement {
    pub fn new(labels: Vec<String>, effects: Vec<Hermitian>) -> Result<Self> {
        check_unique(&labels, "measurement")?;
        if labels.len() != effects.len() {
            return Err(Error::Invalid("measurement labels/effects length mismatch".into()));
        }
        let tol = NumericPolicy::default().abs;
        let dim = effects[0].dim();
        let mut sum = Hermitian::zeros(dim);
        for (l, eff) in labels.iter().zip(effects.iter()) {
            if eff.dim() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    found: eff.dim(),
                });
            }
            if !eff.psd_check(tol)? {
                return Err(Error::NotPsd(format!("effect '{l}'")));
            }
            sum.axpy(1.0, eff);
        }
        let defect = sum.sub(&Hermitian::identity(dim)).fro_norm();
        if defect > tol {
            return Err(Error::NotNormalized(format!(
                "effects sum to identity with Frobenius defect {defect:.3e}"
            )));
        }
        Ok(Self {
            labels,
            effects,
            dim,
        })
    }

    /// Solver-internal constructor skipping the invariant checks; callers
    /// validate the final iterate through [`Measurement::new`].
    pub(crate) fn from_effects_unchecked(labels: Vec<String>, effects: Vec<Hermitian>) -> Self {
        let dim = effects[0].dim();
        Self {
            labels,
            effects,
            dim,
        }
    }

    /// The uninformative POVM M(y) = I/|Y|.
    pub fn trivial(labels: Vec<String>, dim: usize) -> Result<Self> {
        let n = labels.len().max(1);
        let eff = Hermitian::identity(dim).scaled(1.0 / n as f64);
        Measurement::new(labels, vec![eff; n])
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn effect(&self, i: usize) -> &Hermitian {
        &self.effects[i]
    }

    pub fn effects(&self) -> &[Hermitian] {
        &self.effects
    }

    /// Classical post-processing by the ν_t column of `nu`:
    /// N_t(y) = Σ_z ν_t(y|z) M(z).
    pub fn post_processed(&self, nu: &PostProcessing, t: usize) -> Result<Measurement> {
        if nu.z_len() != self.len() {
            return Err(Error::LabelMismatch(
                "post-processing source outcomes do not match the measurement".into(),
            ));
        }
        let ny = nu.y_labels().len();
        let effects: Vec<Hermitian> = (0..ny)
            .map(|y| {
                let mut acc = Hermitian::zeros(self.dim);
                for z in 0..self.len() {
                    let w = nu.value(t, y, z);
                    if w != 0.0 {
                        acc.axpy(w, &self.effects[z]);
                    }
                }
                acc
            })
            .collect();
        Measurement::new(nu.y_labels().to_vec(), effects)
    }
}

/// Payoff table f: X×Y → [0,1].
#[derive(Clone, Debug)]
pub struct ScoreFunction {
    x_labels: Vec<String>,
    y_labels: Vec<String>,
    table: Vec<Vec<f64>>,
}

fn subset_label(labels: &[String], indices: &[usize]) -> String {
    let inner: Vec<&str> = indices.iter().map(|&i| labels[i].as_str()).collect();
    format!("{{{}}}", inner.join(","))
}

/// All k-element subsets of 0..n in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

impl ScoreFunction {
    pub fn new(x_labels: Vec<String>, y_labels: Vec<String>, table: Vec<Vec<f64>>) -> Result<Self> {
        check_unique(&x_labels, "score input")?;
        check_unique(&y_labels, "score guess")?;
        if table.len() != x_labels.len() {
            return Err(Error::Invalid("score table row count must be |X|".into()));
        }
        for row in &table {
            if row.len() != y_labels.len() {
                return Err(Error::Invalid("score table column count must be |Y|".into()));
            }
            for &v in row {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Invalid(format!("score value {v} outside [0,1]")));
                }
            }
        }
        Ok(Self {
            x_labels,
            y_labels,
            table,
        })
    }

    /// f(x,y) = 1 iff x = y.
    pub fn discrimination(labels: &[String]) -> Self {
        let n = labels.len();
        let table = (0..n)
            .map(|x| (0..n).map(|y| if x == y { 1.0 } else { 0.0 }).collect())
            .collect();
        Self {
            x_labels: labels.to_vec(),
            y_labels: labels.to_vec(),
            table,
        }
    }

    /// f(x,y) = 1 iff x ≠ y (state exclusion).
    pub fn antidiscrimination(labels: &[String]) -> Self {
        Self::discrimination(labels).complement()
    }

    /// f(x,y) = 1 iff υ(x) = y, for a total assignment υ: X → Y.
    pub fn partition(
        x_labels: Vec<String>,
        y_labels: Vec<String>,
        upsilon: &[usize],
    ) -> Result<Self> {
        if upsilon.len() != x_labels.len() {
            return Err(Error::Invalid("partition assignment must be total on X".into()));
        }
        if let Some(&bad) = upsilon.iter().find(|&&y| y >= y_labels.len()) {
            return Err(Error::Invalid(format!("partition target {bad} outside Y")));
        }
        let table = upsilon
            .iter()
            .map(|&u| {
                (0..y_labels.len())
                    .map(|y| if y == u { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        Ok(Self {
            x_labels,
            y_labels,
            table,
        })
    }

    /// f(x,y) = 1 iff (x,y) ∈ R.
    pub fn relation(
        x_labels: Vec<String>,
        y_labels: Vec<String>,
        pairs: &[(usize, usize)],
    ) -> Result<Self> {
        let mut table = vec![vec![0.0; y_labels.len()]; x_labels.len()];
        for &(x, y) in pairs {
            if x >= x_labels.len() || y >= y_labels.len() {
                return Err(Error::Invalid(format!("relation pair ({x},{y}) out of range")));
            }
            table[x][y] = 1.0;
        }
        Self::new(x_labels, y_labels, table)
    }

    /// Guessing a k-element subset containing the input: Y = k-subsets of X,
    /// f(x,S) = 1 iff x ∈ S.
    pub fn subset_membership(x_labels: &[String], k: usize) -> Result<Self> {
        let n = x_labels.len();
        if k == 0 || k > n {
            return Err(Error::Invalid(format!("subset size {k} invalid for |X|={n}")));
        }
        let subsets = combinations(n, k);
        let y_labels: Vec<String> = subsets.iter().map(|s| subset_label(x_labels, s)).collect();
        let table = (0..n)
            .map(|x| {
                subsets
                    .iter()
                    .map(|s| if s.contains(&x) { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        Self::new(x_labels.to_vec(), y_labels, table)
    }

    /// 1 − f, pointwise.
    pub fn complement(&self) -> Self {
        Self {
            x_labels: self.x_labels.clone(),
            y_labels: self.y_labels.clone(),
            table: self
                .table
                .iter()
                .map(|row| row.iter().map(|v| 1.0 - v).collect())
                .collect(),
        }
    }

    pub fn x_labels(&self) -> &[String] {
        &self.x_labels
    }

    pub fn y_labels(&self) -> &[String] {
        &self.y_labels
    }

    #[inline]
    pub fn value(&self, x: usize, y: usize) -> f64 {
        self.table[x][y]
    }

    pub fn table(&self) -> &[Vec<f64>] {
        &self.table
    }
}

/// Conditional distribution α(t|x) of the classical message given the input.
#[derive(Clone, Debug)]
pub struct PartialInfoMap {
    t_labels: Vec<String>,
    x_labels: Vec<String>,
    /// table[t][x] = α(t|x)
    table: Vec<Vec<f64>>,
}

impl PartialInfoMap {
    pub fn new(t_labels: Vec<String>, x_labels: Vec<String>, table: Vec<Vec<f64>>) -> Result<Self> {
        check_unique(&t_labels, "message")?;
        check_unique(&x_labels, "input")?;
        if table.len() != t_labels.len() || table.iter().any(|r| r.len() != x_labels.len()) {
            return Err(Error::Invalid("alpha table must be |T|×|X|".into()));
        }
        for x in 0..x_labels.len() {
            let mut sum = 0.0;
            for row in &table {
                if row[x] < 0.0 {
                    return Err(Error::NotStochastic(format!(
                        "alpha(t|{}) negative",
                        x_labels[x]
                    )));
                }
                sum += row[x];
            }
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::NotStochastic(format!(
                    "alpha sums to {sum:.15} over messages for input '{}'",
                    x_labels[x]
                )));
            }
        }
        Ok(Self {
            t_labels,
            x_labels,
            table,
        })
    }

    /// α(τ(x)|x) = 1 for a total map τ: X → T.
    pub fn deterministic(t_labels: Vec<String>, x_labels: Vec<String>, tau: &[usize]) -> Result<Self> {
        if tau.len() != x_labels.len() || tau.iter().any(|&t| t >= t_labels.len()) {
            return Err(Error::Invalid("tau must map every input into T".into()));
        }
        let table = (0..t_labels.len())
            .map(|t| {
                (0..x_labels.len())
                    .map(|x| if tau[x] == t { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        Self::new(t_labels, x_labels, table)
    }

    /// T = X and α(t|x) = (1 − δ_{x,t})/(|X|−1): a wrong option, uniformly.
    pub fn exclude_one(x_labels: &[String]) -> Result<Self> {
        let n = x_labels.len();
        if n < 2 {
            return Err(Error::Invalid("exclude_one needs at least two inputs".into()));
        }
        let w = 1.0 / (n as f64 - 1.0);
        let table = (0..n)
            .map(|t| (0..n).map(|x| if x == t { 0.0 } else { w }).collect())
            .collect();
        Self::new(x_labels.to_vec(), x_labels.to_vec(), table)
    }

    /// T = k-subsets of X and α(S|x) = 1_{x∉S} / C(|X|−1, k): k wrong options.
    pub fn exclude_k(x_labels: &[String], k: usize) -> Result<Self> {
        let n = x_labels.len();
        if k == 0 || k >= n {
            return Err(Error::Invalid(format!(
                "exclusion size must satisfy 1 <= k < |X|, got k={k}, |X|={n}"
            )));
        }
        let subsets = combinations(n, k);
        let t_labels: Vec<String> = subsets.iter().map(|s| subset_label(x_labels, s)).collect();
        // C(n-1, k) subsets avoid any fixed x.
        let mut c = 1.0;
        for i in 0..k {
            c = c * (n - 1 - i) as f64 / (i + 1) as f64;
        }
        let w = 1.0 / c;
        let table = subsets
            .iter()
            .map(|s| {
                (0..n)
                    .map(|x| if s.contains(&x) { 0.0 } else { w })
                    .collect()
            })
            .collect();
        Self::new(t_labels, x_labels.to_vec(), table)
    }

    /// α(t|x) = q(t), independent of the input.
    pub fn constant(t_labels: Vec<String>, x_labels: Vec<String>, q: &[f64]) -> Result<Self> {
        if q.len() != t_labels.len() {
            return Err(Error::Invalid("q must have one entry per message".into()));
        }
        let table = q
            .iter()
            .map(|&qt| vec![qt; x_labels.len()])
            .collect();
        Self::new(t_labels, x_labels, table)
    }

    pub fn t_labels(&self) -> &[String] {
        &self.t_labels
    }

    pub fn x_labels(&self) -> &[String] {
        &self.x_labels
    }

    #[inline]
    pub fn value(&self, t: usize, x: usize) -> f64 {
        self.table[t][x]
    }

    pub fn table(&self) -> &[Vec<f64>] {
        &self.table
    }
}

/// The outcome set Y^T of guess tuples, enumerated lexicographically with the
/// first message most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeSpace {
    y_labels: Vec<String>,
    t_labels: Vec<String>,
    size: usize,
}

impl OutcomeSpace {
    pub fn new(y_labels: Vec<String>, t_labels: Vec<String>, cap: usize) -> Result<Self> {
        check_unique(&y_labels, "guess")?;
        check_unique(&t_labels, "message")?;
        let ny = y_labels.len() as u128;
        let mut size: u128 = 1;
        for _ in 0..t_labels.len() {
            size = size.saturating_mul(ny);
            if size > cap as u128 {
                return Err(Error::EnumerationCap { size, cap });
            }
        }
        Ok(Self {
            y_labels,
            t_labels,
            size: size as usize,
        })
    }

    pub fn y_labels(&self) -> &[String] {
        &self.y_labels
    }

    pub fn t_labels(&self) -> &[String] {
        &self.t_labels
    }

    pub fn ny(&self) -> usize {
        self.y_labels.len()
    }

    pub fn messages(&self) -> usize {
        self.t_labels.len()
    }

    /// Number of tuples |Y|^|T|.
    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    /// φ(t) for the tuple with the given index.
    #[inline]
    pub fn component(&self, idx: usize, t: usize) -> usize {
        let m = self.t_labels.len();
        let ny = self.y_labels.len();
        (idx / ny.pow((m - 1 - t) as u32)) % ny
    }

    /// Index of the tuple with the given components.
    pub fn index(&self, components: &[usize]) -> usize {
        let ny = self.y_labels.len();
        components.iter().fold(0, |acc, &c| acc * ny + c)
    }

    /// Rendered "(y_{t1},…,y_{tm})".
    pub fn label(&self, idx: usize) -> String {
        let parts: Vec<&str> = (0..self.t_labels.len())
            .map(|t| self.y_labels[self.component(idx, t)].as_str())
            .collect();
        format!("({})", parts.join(","))
    }

    pub fn all_labels(&self) -> Vec<String> {
        (0..self.size).map(|i| self.label(i)).collect()
    }
}

/// Classical post-processing ν_t(y|z): for each message a column-stochastic
/// map from measurement outcomes to guesses.
///
/// The canonical variant is the projection π_t(y|φ) = δ_{y,φ(t)} on a tuple
/// outcome space; its table is never materialized.
#[derive(Clone, Debug)]
pub enum PostProcessing {
    Table {
        t_labels: Vec<String>,
        z_labels: Vec<String>,
        y_labels: Vec<String>,
        /// nu[t][y][z] = ν_t(y|z)
        nu: Vec<Vec<Vec<f64>>>,
    },
    Canonical { space: OutcomeSpace },
}

impl PostProcessing {
    pub fn table(
        t_labels: Vec<String>,
        z_labels: Vec<String>,
        y_labels: Vec<String>,
        nu: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        check_unique(&t_labels, "message")?;
        check_unique(&z_labels, "outcome")?;
        check_unique(&y_labels, "guess")?;
        if nu.len() != t_labels.len() {
            return Err(Error::Invalid("nu must have one table per message".into()));
        }
        for (t, tab) in nu.iter().enumerate() {
            if tab.len() != y_labels.len() || tab.iter().any(|r| r.len() != z_labels.len()) {
                return Err(Error::Invalid(format!("nu table {t} must be |Y|×|Z|")));
            }
            for z in 0..z_labels.len() {
                let mut sum = 0.0;
                for row in tab {
                    if row[z] < 0.0 {
                        return Err(Error::NotStochastic(format!(
                            "nu_{}(.|{}) negative",
                            t_labels[t], z_labels[z]
                        )));
                    }
                    sum += row[z];
                }
                if (sum - 1.0).abs() > STOCHASTIC_TOL {
                    return Err(Error::NotStochastic(format!(
                        "nu_{}(.|{}) sums to {sum:.15}",
                        t_labels[t], z_labels[z]
                    )));
                }
            }
        }
        Ok(PostProcessing::Table {
            t_labels,
            z_labels,
            y_labels,
            nu,
        })
    }

    /// π on a tuple space: read the t-th component of the outcome.
    pub fn canonical(space: OutcomeSpace) -> Self {
        PostProcessing::Canonical { space }
    }

    pub fn t_labels(&self) -> &[String] {
        match self {
            PostProcessing::Table { t_labels, .. } => t_labels,
            PostProcessing::Canonical { space } => space.t_labels(),
        }
    }

    pub fn y_labels(&self) -> &[String] {
        match self {
            PostProcessing::Table { y_labels, .. } => y_labels,
            PostProcessing::Canonical { space } => space.y_labels(),
        }
    }

    pub fn z_len(&self) -> usize {
        match self {
            PostProcessing::Table { z_labels, .. } => z_labels.len(),
            PostProcessing::Canonical { space } => space.len(),
        }
    }

    #[inline]
    pub fn value(&self, t: usize, y: usize, z: usize) -> f64 {
        match self {
            PostProcessing::Table { nu, .. } => nu[t][y][z],
            PostProcessing::Canonical { space } => {
                if space.component(z, t) == y {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

fn require_labels(a: &[String], b: &[String], what: &str) -> Result<()> {
    if a != b {
        return Err(Error::LabelMismatch(format!("{what} label sets differ")));
    }
    Ok(())
}

/// Σ_{x,y} f(x,y) tr[E(x)M(y)].
pub fn average_score(e: &StateEnsemble, f: &ScoreFunction, m: &Measurement) -> Result<f64> {
    require_labels(e.labels(), f.x_labels(), "ensemble/score input")?;
    require_labels(f.y_labels(), m.labels(), "score guess/measurement outcome")?;
    let mut acc = 0.0;
    for x in 0..e.len() {
        for y in 0..m.len() {
            let w = f.value(x, y);
            if w != 0.0 {
                acc += w * trace_inner(e.operator(x), m.effect(y))?;
            }
        }
    }
    Ok(acc)
}

/// Σ_{x,y,t,z} f(x,y) α(t|x) ν_t(y|z) tr[E(x)M(z)].
pub fn posterior_score(
    e: &StateEnsemble,
    f: &ScoreFunction,
    alpha: &PartialInfoMap,
    m: &Measurement,
    nu: &PostProcessing,
) -> Result<f64> {
    require_labels(e.labels(), f.x_labels(), "ensemble/score input")?;
    require_labels(e.labels(), alpha.x_labels(), "ensemble/alpha input")?;
    require_labels(f.y_labels(), nu.y_labels(), "score guess/post-processing guess")?;
    require_labels(alpha.t_labels(), nu.t_labels(), "alpha/post-processing message")?;
    if nu.z_len() != m.len() {
        return Err(Error::LabelMismatch(
            "post-processing source outcomes do not match the measurement".into(),
        ));
    }
    let nt = alpha.t_labels().len();
    let ny = f.y_labels().len();
    let mut acc = 0.0;
    for z in 0..m.len() {
        let mut weighted = Hermitian::zeros(e.dim());
        for x in 0..e.len() {
            let mut coeff = 0.0;
            for t in 0..nt {
                let a = alpha.value(t, x);
                if a == 0.0 {
                    continue;
                }
                match nu {
                    PostProcessing::Canonical { space } => {
                        coeff += a * f.value(x, space.component(z, t));
                    }
                    _ => {
                        for y in 0..ny {
                            let n = nu.value(t, y, z);
                            if n != 0.0 {
                                coeff += a * n * f.value(x, y);
                            }
                        }
                    }
                }
            }
            if coeff != 0.0 {
                weighted.axpy(coeff, e.operator(x));
            }
        }
        acc += trace_inner(&weighted, m.effect(z))?;
    }
    Ok(acc)
}

/// Σ_{x,y,t} f(x,y) α(t|x) tr[E(x)N_t(y)] for one measurement per message,
/// ordered like the alpha map's messages.
pub fn prior_score(
    e: &StateEnsemble,
    f: &ScoreFunction,
    alpha: &PartialInfoMap,
    collection: &[Measurement],
) -> Result<f64> {
    require_labels(e.labels(), f.x_labels(), "ensemble/score input")?;
    require_labels(e.labels(), alpha.x_labels(), "ensemble/alpha input")?;
    if collection.len() != alpha.t_labels().len() {
        return Err(Error::LabelMismatch(
            "collection must hold one measurement per message".into(),
        ));
    }
    let mut acc = 0.0;
    for (t, n_t) in collection.iter().enumerate() {
        require_labels(f.y_labels(), n_t.labels(), "score guess/measurement outcome")?;
        for x in 0..e.len() {
            let a = alpha.value(t, x);
            if a == 0.0 {
                continue;
            }
            for y in 0..n_t.len() {
                let w = f.value(x, y);
                if w != 0.0 {
                    acc += a * w * trace_inner(e.operator(x), n_t.effect(y))?;
                }
            }
        }
    }
    Ok(acc)
}

/// Lift of (M, ν) onto tuple outcomes: bar-M_ν(φ) = Σ_z M(z) Π_t ν_t(φ(t)|z).
pub fn standard_lift(m: &Measurement, nu: &PostProcessing, cap: usize) -> Result<Measurement> {
    if nu.z_len() != m.len() {
        return Err(Error::LabelMismatch(
            "post-processing source outcomes do not match the measurement".into(),
        ));
    }
    let space = match nu {
        PostProcessing::Canonical { space } => space.clone(),
        PostProcessing::Table {
            t_labels, y_labels, ..
        } => OutcomeSpace::new(y_labels.clone(), t_labels.clone(), cap)?,
    };
    let nt = space.messages();
    let mut effects = Vec::with_capacity(space.len());
    for phi in 0..space.len() {
        let mut acc = Hermitian::zeros(m.dim());
        for z in 0..m.len() {
            let mut w = 1.0;
            for t in 0..nt {
                w *= nu.value(t, space.component(phi, t), z);
                if w == 0.0 {
                    break;
                }
            }
            if w != 0.0 {
                acc.axpy(w, m.effect(z));
            }
        }
        effects.push(acc);
    }
    Measurement::new(space.all_labels(), effects)
}

/// Marginal on message t: N_t(y) = Σ_{φ: φ(t)=y} bar-M(φ).
pub fn marginal(bar_m: &Measurement, space: &OutcomeSpace, t: usize) -> Result<Measurement> {
    if bar_m.len() != space.len() {
        return Err(Error::LabelMismatch(
            "measurement does not live on the given tuple space".into(),
        ));
    }
    if t >= space.messages() {
        return Err(Error::Invalid(format!("message index {t} out of range")));
    }
    let mut effects = vec![Hermitian::zeros(bar_m.dim()); space.ny()];
    for phi in 0..space.len() {
        effects[space.component(phi, t)].axpy(1.0, bar_m.effect(phi));
    }
    Measurement::new(space.y_labels().to_vec(), effects)
}

/// Wire format for a full game instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GameSpec {
    #[serde(rename = "X")]
    pub x: Vec<String>,
    #[serde(rename = "Y")]
    pub y: Vec<String>,
    #[serde(rename = "T")]
    pub t: Vec<String>,
    /// f[x][y]
    pub f: Vec<Vec<f64>>,
    /// alpha[t][x]
    pub alpha: Vec<Vec<f64>>,
    pub ensemble: Vec<EnsembleEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnsembleEntry {
    pub label: String,
    pub matrix: ComplexMatrix,
}

impl GameSpec {
    pub fn from_parts(e: &StateEnsemble, f: &ScoreFunction, alpha: &PartialInfoMap) -> Self {
        GameSpec {
            x: e.labels().to_vec(),
            y: f.y_labels().to_vec(),
            t: alpha.t_labels().to_vec(),
            f: f.table().to_vec(),
            alpha: alpha.table().to_vec(),
            ensemble: e
                .labels()
                .iter()
                .zip(e.operators())
                .map(|(l, op)| EnsembleEntry {
                    label: l.clone(),
                    matrix: op.matrix().clone(),
                })
                .collect(),
        }
    }

    pub fn into_parts(self) -> Result<(StateEnsemble, ScoreFunction, PartialInfoMap)> {
        let mut labels = Vec::with_capacity(self.ensemble.len());
        let mut ops = Vec::with_capacity(self.ensemble.len());
        for entry in self.ensemble {
            labels.push(entry.label);
            ops.push(Hermitian::new(entry.matrix));
        }
        if labels != self.x {
            return Err(Error::LabelMismatch(
                "ensemble entries must match X in order".into(),
            ));
        }
        let e = StateEnsemble::new(labels, ops)?;
        let f = ScoreFunction::new(self.x.clone(), self.y, self.f)?;
        let alpha = PartialInfoMap::new(self.t, self.x, self.alpha)?;
        Ok((e, f, alpha))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    fn bloch_op(scale: f64, v: [f64; 3]) -> Hermitian {
        let m = ComplexMatrix::from_re_im(
            &[
                vec![scale * (1.0 + v[2]), scale * v[0]],
                vec![scale * v[0], scale * (1.0 - v[2])],
            ],
            &[vec![0.0, -scale * v[1]], vec![scale * v[1], 0.0]],
        )
        .unwrap();
        Hermitian::new(m)
    }

    fn four_state_ensemble(theta: f64) -> StateEnsemble {
        let (c, d) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let dirs = [[c, d, 0.0], [-c, -d, 0.0], [c, -d, 0.0], [-c, d, 0.0]];
        StateEnsemble::new(
            s(&["+a", "-a", "+b", "-b"]),
            dirs.iter().map(|&v| bloch_op(0.125, v)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn orthogonal_pair_discriminates_perfectly() {
        let e = StateEnsemble::new(
            s(&["0", "1"]),
            vec![bloch_op(0.25, [0.0, 0.0, 1.0]), bloch_op(0.25, [0.0, 0.0, -1.0])],
        )
        .unwrap();
        let m = Measurement::new(
            s(&["0", "1"]),
            vec![bloch_op(0.5, [0.0, 0.0, 1.0]), bloch_op(0.5, [0.0, 0.0, -1.0])],
        )
        .unwrap();
        let f = ScoreFunction::discrimination(&s(&["0", "1"]));
        assert!((average_score(&e, &f, &m).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn four_state_family_antidiscriminates_perfectly() {
        let e = four_state_ensemble(std::f64::consts::FRAC_PI_3);
        let theta = std::f64::consts::FRAC_PI_3;
        let (c, d) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let dirs = [[c, d, 0.0], [-c, -d, 0.0], [c, -d, 0.0], [-c, d, 0.0]];
        let m = Measurement::new(
            e.labels().to_vec(),
            dirs.iter().map(|&v| bloch_op(0.25, [-v[0], -v[1], -v[2]])).collect(),
        )
        .unwrap();
        let f = ScoreFunction::antidiscrimination(e.labels());
        assert!((average_score(&e, &f, &m).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn identity_post_processing_reduces_to_average_score() {
        let e = four_state_ensemble(1.1);
        let labels = e.labels().to_vec();
        let f = ScoreFunction::discrimination(&labels);
        let alpha = PartialInfoMap::constant(s(&["t"]), labels.clone(), &[1.0]).unwrap();
        let m = Measurement::trivial(labels.clone(), 2).unwrap();
        let id = (0..4)
            .map(|y| (0..4).map(|z| if y == z { 1.0 } else { 0.0 }).collect())
            .collect();
        let nu = PostProcessing::table(s(&["t"]), labels.clone(), labels.clone(), vec![id]).unwrap();
        let lhs = posterior_score(&e, &f, &alpha, &m, &nu).unwrap();
        let rhs = average_score(&e, &f, &m).unwrap();
        assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn outcome_space_enumeration_is_lexicographic() {
        let space = OutcomeSpace::new(s(&["u", "v"]), s(&["t1", "t2"]), 1000).unwrap();
        assert_eq!(space.len(), 4);
        let labels = space.all_labels();
        assert_eq!(labels, vec!["(u,u)", "(u,v)", "(v,u)", "(v,v)"]);
        assert_eq!(space.component(2, 0), 1);
        assert_eq!(space.component(2, 1), 0);
        assert_eq!(space.index(&[1, 0]), 2);
    }

    #[test]
    fn outcome_space_respects_cap() {
        let err = OutcomeSpace::new(s(&["a", "b", "c", "d"]), s(&["1", "2", "3", "4", "5"]), 1000)
            .unwrap_err();
        match err {
            Error::EnumerationCap { size, cap } => {
                assert_eq!(cap, 1000);
                assert!(size > 1000);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn single_message_lift_is_the_post_processed_measurement() {
        let e = four_state_ensemble(0.7);
        let m = Measurement::new(
            e.labels().to_vec(),
            e.operators().iter().map(|o| o.scaled(2.0)).collect(),
        )
        .unwrap();
        let nu = PostProcessing::table(
            s(&["t"]),
            m.labels().to_vec(),
            s(&["p", "q"]),
            vec![vec![
                vec![1.0, 0.0, 0.5, 0.25],
                vec![0.0, 1.0, 0.5, 0.75],
            ]],
        )
        .unwrap();
        let lifted = standard_lift(&m, &nu, 1000).unwrap();
        let direct = m.post_processed(&nu, 0).unwrap();
        assert_eq!(lifted.len(), 2);
        for y in 0..2 {
            assert!(lifted
                .effect(y)
                .matrix()
                .approx_eq(direct.effect(y).matrix(), 1e-12));
        }
    }

    #[test]
    fn lift_marginals_match_post_processing() {
        let m = Measurement::new(
            s(&["z0", "z1", "z2"]),
            vec![
                bloch_op(1.0 / 3.0, [1.0, 0.0, 0.0]),
                bloch_op(1.0 / 3.0, [-0.5, 0.75f64.sqrt(), 0.0]),
                bloch_op(1.0 / 3.0, [-0.5, -(0.75f64.sqrt()), 0.0]),
            ],
        )
        .unwrap();
        let nu = PostProcessing::table(
            s(&["t0", "t1"]),
            m.labels().to_vec(),
            s(&["y0", "y1"]),
            vec![
                vec![vec![0.9, 0.2, 0.4], vec![0.1, 0.8, 0.6]],
                vec![vec![0.3, 0.3, 1.0], vec![0.7, 0.7, 0.0]],
            ],
        )
        .unwrap();
        let lifted = standard_lift(&m, &nu, 1000).unwrap();
        let space = OutcomeSpace::new(s(&["y0", "y1"]), s(&["t0", "t1"]), 1000).unwrap();
        for t in 0..2 {
            let from_lift = marginal(&lifted, &space, t).unwrap();
            let direct = m.post_processed(&nu, t).unwrap();
            for y in 0..2 {
                assert!(from_lift
                    .effect(y)
                    .matrix()
                    .approx_eq(direct.effect(y).matrix(), 1e-12));
            }
        }
    }

    #[test]
    fn uniform_lift_has_uniform_marginals() {
        let space = OutcomeSpace::new(s(&["y0", "y1"]), s(&["t0", "t1"]), 1000).unwrap();
        let bar = Measurement::trivial(space.all_labels(), 2).unwrap();
        for t in 0..2 {
            let n_t = marginal(&bar, &space, t).unwrap();
            for y in 0..2 {
                assert!(n_t
                    .effect(y)
                    .matrix()
                    .approx_eq(&ComplexMatrix::identity(2).scaled(0.5), 1e-12));
            }
        }
    }

    #[test]
    fn exclude_one_weights() {
        let alpha = PartialInfoMap::exclude_one(&s(&["a", "b", "c", "d"])).unwrap();
        for t in 0..4 {
            for x in 0..4 {
                let want = if t == x { 0.0 } else { 1.0 / 3.0 };
                assert!((alpha.value(t, x) - want).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn exclude_all_but_one_tells_everything() {
        let labels = s(&["a", "b", "c"]);
        let alpha = PartialInfoMap::exclude_k(&labels, 2).unwrap();
        // Each input has exactly one admissible subset, weight 1.
        for x in 0..3 {
            let hits: Vec<f64> = (0..alpha.t_labels().len())
                .map(|t| alpha.value(t, x))
                .collect();
            assert_eq!(hits.iter().filter(|&&v| v == 1.0).count(), 1);
            assert_eq!(hits.iter().filter(|&&v| v == 0.0).count(), 2);
        }
    }

    #[test]
    fn deterministic_identity_alpha_is_identity_table() {
        let labels = s(&["a", "b", "c"]);
        let alpha = PartialInfoMap::deterministic(labels.clone(), labels, &[0, 1, 2]).unwrap();
        for t in 0..3 {
            for x in 0..3 {
                assert_eq!(alpha.value(t, x), if t == x { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn subset_membership_table() {
        let f = ScoreFunction::subset_membership(&s(&["a", "b", "c"]), 2).unwrap();
        assert_eq!(f.y_labels(), &["{a,b}", "{a,c}", "{b,c}"]);
        assert_eq!(f.value(0, 0), 1.0);
        assert_eq!(f.value(0, 2), 0.0);
        assert_eq!(f.value(2, 2), 1.0);
    }

    #[test]
    fn discrimination_is_identity_table() {
        let f = ScoreFunction::discrimination(&s(&["a", "b", "c", "d"]));
        for x in 0..4 {
            for y in 0..4 {
                assert_eq!(f.value(x, y), if x == y { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn game_spec_round_trip() {
        let e = four_state_ensemble(0.9);
        let f = ScoreFunction::discrimination(e.labels());
        let alpha = PartialInfoMap::exclude_one(e.labels()).unwrap();
        let spec = GameSpec::from_parts(&e, &f, &alpha);
        let text = serde_json::to_string(&spec).unwrap();
        let back: GameSpec = serde_json::from_str(&text).unwrap();
        let (e2, f2, a2) = back.into_parts().unwrap();
        assert_eq!(e2.labels(), e.labels());
        for i in 0..e.len() {
            assert_eq!(e2.operator(i).matrix(), e.operator(i).matrix());
        }
        assert_eq!(f2.table(), f.table());
        assert_eq!(a2.table(), alpha.table());
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(StateEnsemble::new(
            s(&["x"]),
            vec![Hermitian::identity(2)], // trace 2, not normalized
        )
        .is_err());
        assert!(Measurement::new(
            s(&["y"]),
            vec![Hermitian::identity(2).scaled(0.5)],
        )
        .is_err());
        assert!(ScoreFunction::new(s(&["x"]), s(&["y"]), vec![vec![1.5]]).is_err());
        assert!(PartialInfoMap::new(s(&["t"]), s(&["x"]), vec![vec![0.5]]).is_err());
    }
}
