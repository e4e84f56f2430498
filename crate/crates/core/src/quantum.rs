//! Dense states and density operators over labeled tensor factorizations.
//!
//! Index convention: the first factor is the most significant digit of the
//! flattened index (row-major Kronecker order).

use std::collections::HashSet;

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Eigenvalues below this magnitude are treated as exact zeros.
pub const EIGEN_ZERO: f64 = 1e-10;
/// Tolerance for the Hermitian / trace / positivity checks.
pub const VALIDATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub label: String,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Factor>", into = "Vec<Factor>")]
pub struct Factorization {
    factors: Vec<Factor>,
}

impl TryFrom<Vec<Factor>> for Factorization {
    type Error = Error;

    fn try_from(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::invalid("factorization needs at least one factor"));
        }
        let mut seen = HashSet::new();
        for f in &factors {
            if f.dim == 0 {
                return Err(Error::invalid(format!("factor `{}` has dimension 0", f.label)));
            }
            if !seen.insert(f.label.as_str()) {
                return Err(Error::invalid(format!("duplicate factor label `{}`", f.label)));
            }
        }
        Ok(Factorization { factors })
    }
}

impl From<Factorization> for Vec<Factor> {
    fn from(f: Factorization) -> Self {
        f.factors
    }
}

impl Factorization {
    pub fn new<S: Into<String>>(factors: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        factors.into_iter().map(|(label, dim)| Factor { label: label.into(), dim }).collect::<Vec<_>>().try_into()
    }

    pub fn single(label: &str, dim: usize) -> Result<Self> {
        Self::new([(label, dim)])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.label == label)
    }

    pub fn dim_of(&self, label: &str) -> Option<usize> {
        self.index_of(label).map(|i| self.factors[i].dim)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.factors.iter().map(|f| f.label.as_str())
    }

    /// Concatenate two factorizations (labels must stay unique).
    pub fn join(&self, other: &Factorization) -> Result<Self> {
        let mut all = self.factors.clone();
        all.extend(other.factors.iter().cloned());
        all.try_into()
    }

    /// Resolve `keep` into sorted factor positions, rejecting unknown labels
    /// and requiring a nonempty proper subset.
    fn split(&self, keep: &[&str]) -> Result<(Vec<usize>, Vec<usize>)> {
        let mut kept = Vec::with_capacity(keep.len());
        for label in keep {
            let idx = self.index_of(label).ok_or_else(|| Error::invalid(format!("unknown factor label `{label}`")))?;
            if !kept.contains(&idx) {
                kept.push(idx);
            }
        }
        if kept.is_empty() || kept.len() == self.factors.len() {
            return Err(Error::invalid("keep must be a nonempty proper subset of the factors"));
        }
        kept.sort_unstable();
        let traced = (0..self.factors.len()).filter(|i| !kept.contains(i)).collect();
        Ok((kept, traced))
    }

    fn subset(&self, positions: &[usize]) -> Factorization {
        Factorization { factors: positions.iter().map(|&i| self.factors[i].clone()).collect() }
    }

    /// For every flat index, its (kept, traced) flat indices.
    fn index_map(&self, kept: &[usize], traced: &[usize]) -> Vec<(usize, usize)> {
        let dims: Vec<usize> = self.factors.iter().map(|f| f.dim).collect();
        let n = self.total_dim();
        let mut digits = vec![0usize; dims.len()];
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let compose = |pos: &[usize]| pos.iter().fold(0usize, |acc, &p| acc * dims[p] + digits[p]);
            out.push((compose(kept), compose(traced)));
            for p in (0..dims.len()).rev() {
                digits[p] += 1;
                if digits[p] < dims[p] {
                    break;
                }
                digits[p] = 0;
            }
        }
        out
    }
}

/// Symmetrize and diagonalize a Hermitian matrix. Eigenvalues ascend.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).clone_owned();
        fix_phase(&mut v);
        vectors.set_column(col, &v);
    }
    (values, vectors)
}

/// Rotate a vector so its largest-magnitude entry is real and positive.
pub fn fix_phase(v: &mut CVector) {
    let pivot = v.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm()));
    if let Some(p) = pivot {
        if p.norm() > 0.0 {
            let phase = p.conj() / p.norm();
            v.iter_mut().for_each(|z| *z *= phase);
        }
    }
}

/// f(M) for Hermitian M through its spectrum.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> C64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let diag = CMatrix::from_diagonal(&CVector::from_iterator(values.len(), values.into_iter().map(f)));
    &vectors * diag * vectors.adjoint()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledState {
    factorization: Factorization,
    amplitudes: CVector,
    normalized: bool,
}

impl LabeledState {
    /// Normalized state; the norm must equal 1 within 1e-10.
    pub fn new(factorization: Factorization, amplitudes: CVector) -> Result<Self> {
        let state = Self::unnormalized(factorization, amplitudes)?;
        let norm = state.norm();
        if (norm - 1.0).abs() > VALIDATION_TOL {
            return Err(Error::invalid(format!("state norm {norm} differs from 1")));
        }
        Ok(LabeledState { normalized: true, ..state })
    }

    /// State whose normalization is carried by the amplitudes themselves.
    pub fn unnormalized(factorization: Factorization, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != factorization.total_dim() {
            return Err(Error::invalid(format!(
                "amplitude length {} does not match total dimension {}",
                amplitudes.len(),
                factorization.total_dim()
            )));
        }
        Ok(LabeledState { factorization, amplitudes, normalized: false })
    }

    /// Rescale to unit norm.
    pub fn normalize(mut self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::invalid("cannot normalize the zero vector"));
        }
        self.amplitudes /= C64::new(norm, 0.0);
        self.normalized = true;
        Ok(self)
    }

    pub fn factorization(&self) -> &Factorization {
        &self.factorization
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn density(&self) -> Result<DensityOperator> {
        let psi = if self.normalized { self.clone() } else { self.clone().normalize()? };
        let m = &psi.amplitudes * psi.amplitudes.adjoint();
        Ok(DensityOperator { factorization: self.factorization.clone(), matrix: m })
    }

    /// Reduced state on `keep`, computed as M M† without forming |ψ⟩⟨ψ|.
    pub fn reduced(&self, keep: &[&str]) -> Result<DensityOperator> {
        let (kept, traced) = self.factorization.split(keep)?;
        let sub = self.factorization.subset(&kept);
        let dk = sub.total_dim();
        let dt = self.factorization.total_dim() / dk;
        let norm2 = self.amplitudes.norm_squared();
        if norm2 == 0.0 {
            return Err(Error::invalid("zero state has no reduced density operator"));
        }
        let mut m = CMatrix::zeros(dk, dt);
        for (i, (k, t)) in self.factorization.index_map(&kept, &traced).into_iter().enumerate() {
            m[(k, t)] = self.amplitudes[i];
        }
        let rho = (&m * m.adjoint()) / C64::new(norm2, 0.0);
        Ok(DensityOperator { factorization: sub, matrix: rho })
    }

    /// Von Neumann entropy of the reduced state on `keep`, in nats.
    pub fn entanglement_entropy(&self, keep: &[&str]) -> Result<f64> {
        Ok(von_neumann_entropy(&self.reduced(keep)?))
    }
}

/// |⟨a|b⟩|² / (‖a‖²‖b‖²).
pub fn fidelity(a: &CVector, b: &CVector) -> f64 {
    let overlap = a.dotc(b).norm_sqr();
    overlap / (a.norm_squared() * b.norm_squared())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorJson", into = "OperatorJson")]
pub struct DensityOperator {
    factorization: Factorization,
    matrix: CMatrix,
}

impl DensityOperator {
    /// Validated constructor: Hermitian, unit trace, positive semidefinite (all within 1e-10).
    pub fn new(factorization: Factorization, matrix: CMatrix) -> Result<Self> {
        let n = factorization.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::invalid(format!(
                "matrix is {}x{}, factorization needs {n}x{n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let asym = max_abs(&(&matrix - matrix.adjoint()));
        if asym > VALIDATION_TOL {
            return Err(Error::invalid(format!("matrix is not Hermitian (deviation {asym:e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > VALIDATION_TOL || tr.im.abs() > VALIDATION_TOL {
            return Err(Error::invalid(format!("trace {tr} differs from 1")));
        }
        let (values, _) = hermitian_eigen(&matrix);
        if let Some(&low) = values.first() {
            if low < -VALIDATION_TOL {
                return Err(Error::invalid(format!("negative eigenvalue {low:e}")));
            }
        }
        Ok(DensityOperator { factorization, matrix })
    }

    pub fn from_diagonal(factorization: Factorization, diag: &[f64]) -> Result<Self> {
        let v = CVector::from_iterator(diag.len(), diag.iter().map(|&x| C64::new(x, 0.0)));
        Self::new(factorization, CMatrix::from_diagonal(&v))
    }

    pub fn maximally_mixed(factorization: Factorization) -> Self {
        let n = factorization.total_dim();
        let matrix = CMatrix::identity(n, n) / C64::new(n as f64, 0.0);
        DensityOperator { factorization, matrix }
    }

    pub fn factorization(&self) -> &Factorization {
        &self.factorization
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.matrix).0
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<Self> {
        Ok(DensityOperator {
            factorization: self.factorization.join(&other.factorization)?,
            matrix: kron(&self.matrix, &other.matrix),
        })
    }

    /// Largest entrywise modulus of the difference.
    pub fn max_deviation(&self, other: &DensityOperator) -> f64 {
        max_abs(&(&self.matrix - &other.matrix))
    }

    pub fn partial_trace(&self, keep: &[&str]) -> Result<DensityOperator> {
        partial_trace(self, keep)
    }
}

/// Trace out every factor not listed in `keep`. Kept factors retain their original order.
pub fn partial_trace(rho: &DensityOperator, keep: &[&str]) -> Result<DensityOperator> {
    let (kept, traced) = rho.factorization.split(keep)?;
    let sub = rho.factorization.subset(&kept);
    let dk = sub.total_dim();
    let dt = rho.dim() / dk;
    // buckets[t] lists (kept index, flat index) for traced index t.
    let mut buckets = vec![Vec::with_capacity(dk); dt];
    for (i, (k, t)) in rho.factorization.index_map(&kept, &traced).into_iter().enumerate() {
        buckets[t].push((k, i));
    }
    let mut out = CMatrix::zeros(dk, dk);
    for bucket in &buckets {
        for &(k1, i1) in bucket {
            for &(k2, i2) in bucket {
                out[(k1, k2)] += rho.matrix[(i1, i2)];
            }
        }
    }
    Ok(DensityOperator { factorization: sub, matrix: out })
}

fn entropy_of_spectrum(values: impl IntoIterator<Item = f64>) -> f64 {
    let s: f64 = values.into_iter().filter(|&l| l > EIGEN_ZERO).map(|l| -l * l.ln()).sum();
    s.max(0.0)
}

/// −Σ λ ln λ over the spectrum, with 0 ln 0 = 0.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    entropy_of_spectrum(rho.eigenvalues())
}

/// Shannon entropy (nats) of a probability vector.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    entropy_of_spectrum(p.iter().copied())
}

/// Outcome of a relative-entropy evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Divergence {
    Finite(f64),
    /// σ has weight outside the support of ρ.
    Infinite,
}

impl Divergence {
    pub fn finite(self) -> Option<f64> {
        match self {
            Divergence::Finite(x) => Some(x),
            Divergence::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Divergence::Infinite)
    }
}

/// Quantum relative entropy S(σ‖ρ) = tr σ (ln σ − ln ρ), in nats.
pub fn relative_entropy(sigma: &DensityOperator, rho: &DensityOperator) -> Result<Divergence> {
    if sigma.dim() != rho.dim() {
        return Err(Error::invalid("relative entropy needs operators of equal dimension"));
    }
    relative_entropy_matrices(&sigma.matrix, &rho.matrix)
}

/// Matrix-level relative entropy used by the optimizer hot path.
pub fn relative_entropy_matrices(sigma: &CMatrix, rho: &CMatrix) -> Result<Divergence> {
    let (sig_vals, _) = hermitian_eigen(sigma);
    let (rho_vals, rho_vecs) = hermitian_eigen(rho);
    let mut cross = 0.0;
    let mut outside = 0.0;
    for (j, &mu) in rho_vals.iter().enumerate() {
        let v = rho_vecs.column(j);
        let weight = (v.adjoint() * sigma * v)[(0, 0)].re;
        if mu > EIGEN_ZERO {
            cross += weight * mu.ln();
        } else {
            outside += weight;
        }
    }
    if outside > EIGEN_ZERO {
        return Ok(Divergence::Infinite);
    }
    let neg_entropy = -entropy_of_spectrum(sig_vals);
    let value = neg_entropy - cross;
    if !value.is_finite() {
        return Err(Error::NoConvergence(format!("relative entropy overflowed: {value}")));
    }
    Ok(Divergence::Finite(value.max(0.0)))
}

/// Canonical purification Σ √rₙ |rₙ⟩ ⊗ |n⟩ with the ancilla in its standard basis.
///
/// The ancilla dimension equals the rank of `rho`; eigenvalues are paired with
/// ancilla states in descending order.
pub fn purify(rho: &DensityOperator, ancilla_label: &str) -> Result<LabeledState> {
    let (values, vectors) = hermitian_eigen(&rho.matrix);
    let kept: Vec<usize> = (0..values.len()).rev().filter(|&i| values[i] > EIGEN_ZERO).collect();
    let rank = kept.len().max(1);
    let ancilla = Factorization::single(ancilla_label, rank)?;
    let factorization = rho.factorization.join(&ancilla)?;
    let n = rho.dim();
    let mut amps = CVector::zeros(n * rank);
    let total: f64 = kept.iter().map(|&i| values[i]).sum();
    for (slot, &i) in kept.iter().enumerate() {
        let weight = (values[i] / total).sqrt();
        for row in 0..n {
            amps[row * rank + slot] = vectors[(row, i)] * weight;
        }
    }
    LabeledState::new(factorization, amps)
}

#[derive(Serialize, Deserialize)]
struct OperatorJson {
    factors: Factorization,
    /// Row-major entries as [re, im].
    entries: Vec<[f64; 2]>,
}

impl TryFrom<OperatorJson> for DensityOperator {
    type Error = Error;

    fn try_from(j: OperatorJson) -> Result<Self> {
        let n = j.factors.total_dim();
        if j.entries.len() != n * n {
            return Err(Error::invalid(format!("expected {} entries, found {}", n * n, j.entries.len())));
        }
        let m = CMatrix::from_row_iterator(n, n, j.entries.iter().map(|&[re, im]| C64::new(re, im)));
        DensityOperator::new(j.factors, m)
    }
}

impl From<DensityOperator> for OperatorJson {
    fn from(d: DensityOperator) -> Self {
        let n = d.dim();
        let entries = (0..n)
            .flat_map(|r| (0..n).map(move |c| (r, c)))
            .map(|(r, c)| [d.matrix[(r, c)].re, d.matrix[(r, c)].im])
            .collect();
        OperatorJson { factors: d.factorization, entries }
    }
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    factors: Factorization,
    amplitudes: Vec<[f64; 2]>,
    #[serde(default = "default_true")]
    normalized: bool,
}

fn default_true() -> bool {
    true
}

impl Serialize for LabeledState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StateJson {
            factors: self.factorization.clone(),
            amplitudes: self.amplitudes.iter().map(|z| [z.re, z.im]).collect(),
            normalized: self.normalized,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LabeledState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = StateJson::deserialize(d)?;
        let amps = CVector::from_iterator(j.amplitudes.len(), j.amplitudes.iter().map(|&[re, im]| C64::new(re, im)));
        let r =
            if j.normalized { LabeledState::new(j.factors, amps) } else { LabeledState::unnormalized(j.factors, amps) };
        r.map_err(serde::de::Error::custom)
    }
}

/// Random test inputs (Ginibre ensembles, Haar-like states).
pub mod random {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    }

    pub fn state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CVector {
        let v = CVector::from_fn(dim, |_, _| gaussian(rng));
        let n = v.norm();
        v / C64::new(n, 0.0)
    }

    /// GUE-like Hermitian matrix with unit-scale entries.
    pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
        let g = CMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
        (&g + g.adjoint()) * C64::new(0.5, 0.0)
    }

    /// Haar-random unitary from the QR decomposition of a Ginibre matrix.
    pub fn unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
        let g = CMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
        let qr = g.qr();
        let (q, r) = (qr.q(), qr.r());
        // Fix the phases of R's diagonal so the distribution is Haar.
        let mut u = q;
        for j in 0..dim {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
            for i in 0..dim {
                u[(i, j)] *= phase;
            }
        }
        u
    }

    /// Full-rank random density matrix G G† / tr.
    pub fn density<R: Rng + ?Sized>(rng: &mut R, factorization: Factorization) -> DensityOperator {
        let n = factorization.total_dim();
        let g = CMatrix::from_fn(n, n, |_, _| gaussian(rng));
        let m = &g * g.adjoint();
        let tr = m.trace();
        let matrix = m / tr;
        DensityOperator { factorization, matrix: (&matrix + matrix.adjoint()) * C64::new(0.5, 0.0) }
    }
}
