//! Entropy-based entanglement witnesses for thermal states.
//!
//! A thermal state whose entropy is below the entanglement of its ground
//! state is entangled. Temperatures are in energy units (k_B = 1) except for
//! the CMB helpers, which work in kelvin and rad/s.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{
    hermitian_eigen, partial_trace, von_neumann_entropy, CMatrix, CVector, DensityOperator, Factorization,
    LabeledState, C64, VALIDATION_TOL,
};
use crate::units::constants;

pub const MAX_DIM: usize = 1 << 12;
/// Ground gaps below this fraction of the spectral width count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    pub a: Vec<String>,
    pub b: Vec<String>,
}

impl Bipartition {
    pub fn new<S: Into<String>>(a: impl IntoIterator<Item = S>, b: impl IntoIterator<Item = S>) -> Self {
        Bipartition { a: a.into_iter().map(Into::into).collect(), b: b.into_iter().map(Into::into).collect() }
    }

    /// Both sides nonempty, disjoint, and together exactly the factor labels.
    pub fn validate(&self, f: &Factorization) -> Result<()> {
        if self.a.is_empty() || self.b.is_empty() {
            return Err(Error::invalid("bipartition sides must be nonempty"));
        }
        let a: BTreeSet<&str> = self.a.iter().map(String::as_str).collect();
        let b: BTreeSet<&str> = self.b.iter().map(String::as_str).collect();
        if a.len() != self.a.len() || b.len() != self.b.len() {
            return Err(Error::invalid("bipartition repeats a label"));
        }
        if let Some(x) = a.intersection(&b).next() {
            return Err(Error::invalid(format!("label '{x}' is on both sides of the bipartition")));
        }
        let all: BTreeSet<&str> = f.labels().collect();
        let union: BTreeSet<&str> = a.union(&b).copied().collect();
        if union != all {
            return Err(Error::invalid(format!(
                "bipartition {:?} | {:?} does not cover the factors {:?}",
                self.a, self.b, all
            )));
        }
        Ok(())
    }

    fn side_a(&self) -> Vec<&str> {
        self.a.iter().map(String::as_str).collect()
    }

    fn side_b(&self) -> Vec<&str> {
        self.b.iter().map(String::as_str).collect()
    }
}

/// Hamiltonian on a labeled space with its diagonalization.
#[derive(Debug, Clone)]
pub struct ThermalSystem {
    hamiltonian: CMatrix,
    factorization: Factorization,
    bipartition: Bipartition,
    energies: Vec<f64>,
    vectors: CMatrix,
}

impl ThermalSystem {
    pub fn new(hamiltonian: CMatrix, factorization: Factorization, bipartition: Bipartition) -> Result<Self> {
        let n = factorization.total_dim();
        if hamiltonian.nrows() != n || hamiltonian.ncols() != n {
            return Err(Error::invalid(format!(
                "Hamiltonian is {}x{} but the factors give dimension {n}",
                hamiltonian.nrows(),
                hamiltonian.ncols()
            )));
        }
        if n > MAX_DIM {
            return Err(Error::invalid(format!("dimension {n} exceeds the limit {MAX_DIM}")));
        }
        let scale = hamiltonian.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let skew = (&hamiltonian - hamiltonian.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if skew > VALIDATION_TOL * scale {
            return Err(Error::invalid(format!("Hamiltonian is not Hermitian (max |H - H^dag| = {skew:e})")));
        }
        bipartition.validate(&factorization)?;
        let (energies, vectors) = hermitian_eigen(&hamiltonian);
        Ok(ThermalSystem { hamiltonian, factorization, bipartition, energies, vectors })
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn factorization(&self) -> &Factorization {
        &self.factorization
    }

    pub fn bipartition(&self) -> &Bipartition {
        &self.bipartition
    }

    /// Ascending spectrum.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn spectral_width(&self) -> f64 {
        self.energies[self.energies.len() - 1] - self.energies[0]
    }

    pub fn ground_degenerate(&self) -> bool {
        match self.energies.get(1) {
            None => false,
            Some(&e1) => {
                let width = self.spectral_width();
                width == 0.0 || e1 - self.energies[0] < DEGENERACY_TOL * width
            }
        }
    }

    /// Ground state, or None when the ground space is degenerate.
    pub fn ground_state(&self) -> Option<LabeledState> {
        if self.ground_degenerate() {
            return None;
        }
        let v: CVector = self.vectors.column(0).clone_owned();
        LabeledState::new(self.factorization.clone(), v).ok()
    }

    /// Entanglement of the ground state, None when degenerate.
    pub fn ground_entanglement(&self) -> Option<f64> {
        let psi = self.ground_state()?;
        entanglement_entropy_pure(&psi, &self.bipartition).ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GibbsEnsemble {
    pub temperature: f64,
    /// ln Z; Z itself may overflow.
    pub ln_z: f64,
    pub z: f64,
    pub u: f64,
    pub f: f64,
    /// Entropy in nats.
    pub s: f64,
    /// Boltzmann weight of the lowest level.
    pub ground_weight: f64,
}

fn check_temperature(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!("temperature must be positive and finite, got {t}")));
    }
    Ok(())
}

// Weights shifted by the ground energy, their sum, and x = (E − E₀)/T.
fn shifted_weights(energies: &[f64], t: f64) -> (Vec<f64>, f64, Vec<f64>) {
    let e0 = energies[0];
    let x: Vec<f64> = energies.iter().map(|e| (e - e0) / t).collect();
    let w: Vec<f64> = x.iter().map(|x| (-x).exp()).collect();
    let sum = w.iter().sum();
    (w, sum, x)
}

fn ensemble_from_spectrum(energies: &[f64], t: f64) -> GibbsEnsemble {
    let e0 = energies[0];
    let (w, sum, x) = shifted_weights(energies, t);
    let p: Vec<f64> = w.iter().map(|w| w / sum).collect();
    let mean_x: f64 = p.iter().zip(&x).map(|(p, x)| p * x).sum();
    let ln_z = -e0 / t + sum.ln();
    let u = e0 + t * mean_x;
    GibbsEnsemble { temperature: t, ln_z, z: ln_z.exp(), u, f: -t * ln_z, s: sum.ln() + mean_x, ground_weight: p[0] }
}

fn entropy_at(energies: &[f64], t: f64) -> f64 {
    let (w, sum, x) = shifted_weights(energies, t);
    sum.ln() + w.iter().zip(&x).map(|(w, x)| w * x).sum::<f64>() / sum
}

pub fn gibbs_ensemble(system: &ThermalSystem, t: f64) -> Result<GibbsEnsemble> {
    check_temperature(t)?;
    Ok(ensemble_from_spectrum(&system.energies, t))
}

/// e^{−H/T}/Z and its thermodynamic summary.
pub fn gibbs_state(system: &ThermalSystem, t: f64) -> Result<(DensityOperator, GibbsEnsemble)> {
    let ens = gibbs_ensemble(system, t)?;
    let (w, sum, _) = shifted_weights(&system.energies, t);
    let v = &system.vectors;
    let diag = CVector::from_iterator(w.len(), w.iter().map(|w| C64::new(w / sum, 0.0)));
    let rho = v * CMatrix::from_diagonal(&diag) * v.adjoint();
    let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    Ok((DensityOperator::new(system.factorization.clone(), rho)?, ens))
}

/// Entropy of either reduced state of a pure state.
pub fn entanglement_entropy_pure(psi: &LabeledState, bipartition: &Bipartition) -> Result<f64> {
    bipartition.validate(psi.factorization())?;
    if !psi.is_normalized() {
        return Err(Error::invalid("entanglement entropy needs a normalized pure state"));
    }
    psi.entanglement_entropy(&bipartition.side_a())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Entangled,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Entangled => "entangled",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub temperature: f64,
    pub s_thermal: f64,
    /// Ground-state entanglement; 0 when the ground space is degenerate.
    pub e_ground: f64,
    pub verdict: Verdict,
    /// e_ground − s_thermal.
    pub margin: f64,
    pub ground_degenerate: bool,
}

pub fn entropy_witness(system: &ThermalSystem, t: f64) -> Result<WitnessReport> {
    check_temperature(t)?;
    let s = entropy_at(&system.energies, t);
    let degenerate = system.ground_degenerate();
    let e = if degenerate { 0.0 } else { system.ground_entanglement().unwrap_or(0.0) };
    let verdict = if !degenerate && s < e { Verdict::Entangled } else { Verdict::Inconclusive };
    Ok(WitnessReport {
        temperature: t,
        s_thermal: s,
        e_ground: e,
        verdict,
        margin: e - s,
        ground_degenerate: degenerate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatCapacity {
    /// Var(H)/T².
    pub variance_form: f64,
    /// T ∂S/∂T by centered difference.
    pub finite_difference: f64,
}

impl HeatCapacity {
    pub fn relative_disagreement(&self) -> f64 {
        ((self.variance_form - self.finite_difference) / self.variance_form).abs()
    }
}

fn variance_capacity(energies: &[f64], t: f64) -> f64 {
    let (w, sum, x) = shifted_weights(energies, t);
    let mean: f64 = w.iter().zip(&x).map(|(w, x)| w * x).sum::<f64>() / sum;
    w.iter().zip(&x).map(|(w, x)| w * (x - mean).powi(2)).sum::<f64>() / sum
}

pub fn heat_capacity(system: &ThermalSystem, t: f64) -> Result<HeatCapacity> {
    check_temperature(t)?;
    let h = 1e-4 * t;
    let ds = entropy_at(&system.energies, t + h) - entropy_at(&system.energies, t - h);
    Ok(HeatCapacity { variance_form: variance_capacity(&system.energies, t), finite_difference: t * ds / (2.0 * h) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CriticalTemperature {
    Threshold {
        temperature: f64,
        /// |S(T*) − E|.
        residual: f64,
        bracket: (f64, f64),
        iterations: usize,
    },
    /// The witness fires at no temperature.
    NoThreshold,
}

/// Temperature below which the witness fires, by bisection in ln T.
pub fn critical_temperature(system: &ThermalSystem) -> Result<CriticalTemperature> {
    let e = match system.ground_entanglement() {
        Some(e) if e > 1e-12 && !system.ground_degenerate() => e,
        _ => return Ok(CriticalTemperature::NoThreshold),
    };
    let en = &system.energies;
    let gap = en[1] - en[0];
    let s = |t: f64| entropy_at(en, t);
    let mut lo = gap;
    let mut hi = gap;
    let mut guard = 0;
    while s(lo) >= e {
        lo *= 0.5;
        guard += 1;
        if guard > 2000 || lo == 0.0 {
            return Err(Error::NoConvergence("no temperature with entropy below the ground entanglement".into()));
        }
    }
    while s(hi) <= e {
        hi *= 2.0;
        guard += 1;
        if guard > 4000 || !hi.is_finite() {
            return Ok(CriticalTemperature::NoThreshold);
        }
    }
    let bracket = (lo, hi);
    let mut iterations = 0;
    while (hi - lo) > 1e-12 * hi && iterations < 200 {
        let mid = (lo * hi).sqrt();
        if s(mid) < e {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let t = (lo * hi).sqrt();
    Ok(CriticalTemperature::Threshold { temperature: t, residual: (s(t) - e).abs(), bracket, iterations })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub report: WitnessReport,
    pub heat_capacity: f64,
}

/// Witness and heat capacity over a temperature grid, in grid order.
pub fn witness_scan(system: &ThermalSystem, temperatures: &[f64]) -> Result<Vec<ScanRow>> {
    temperatures
        .par_iter()
        .map(|&t| {
            Ok(ScanRow { report: entropy_witness(system, t)?, heat_capacity: heat_capacity(system, t)?.variance_form })
        })
        .collect()
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::invalid(format!("{name} must be positive, got {x}")));
    }
    Ok(())
}

/// N (k_BT/ħω̃)^p with T in K and ω̃ in rad/s.
pub fn scaling_model_entropy(n: f64, t: f64, omega_char: f64, p_exponent: f64) -> Result<f64> {
    check_positive("N", n)?;
    check_positive("T", t)?;
    check_positive("omega", omega_char)?;
    if !(p_exponent >= 1.0) {
        return Err(Error::invalid("p_exponent must be >= 1"));
    }
    let k = constants();
    Ok(n * (k.k_b * t / (k.hbar * omega_char)).powf(p_exponent))
}

/// ω̃ at which (T/ΔT)² = (k_BT/ħω̃)^p.
pub fn cmb_frequency_bound(t: f64, rel_fluctuation: f64, p_exponent: f64) -> Result<f64> {
    check_positive("T", t)?;
    check_positive("dT/T", rel_fluctuation)?;
    if !(p_exponent >= 1.0) {
        return Err(Error::invalid("p_exponent must be >= 1"));
    }
    let k = constants();
    Ok(k.k_b * t / k.hbar * rel_fluctuation.powf(2.0 / p_exponent))
}

/// (k_BT/ħω̃)^p in units of k_B.
pub fn critical_heat_capacity(t: f64, omega_char: f64, p_exponent: f64) -> Result<f64> {
    check_positive("T", t)?;
    check_positive("omega", omega_char)?;
    check_positive("p", p_exponent)?;
    let k = constants();
    Ok((k.k_b * t / (k.hbar * omega_char)).powf(p_exponent))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReeBudget {
    pub restarts: usize,
    pub iterations: usize,
    /// Product states in the separable mixture (at most 16).
    pub components: usize,
    pub seed: u64,
}

impl Default for ReeBudget {
    fn default() -> Self {
        ReeBudget { restarts: 8, iterations: 1500, components: 8, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductComponent {
    pub weight: f64,
    pub bloch_a: [f64; 3],
    pub bloch_b: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReeLowerReport {
    /// max(0, S(A) − S(AB), S(B) − S(AB)); REE is never below it.
    pub lower_bound: f64,
    /// Best value of each restart, ascending.
    pub restart_values: Vec<f64>,
    /// Two best restarts agree within 1e-4.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReeResult {
    pub lower: ReeLowerReport,
    pub upper_bound: f64,
    pub closest_separable: Vec<ProductComponent>,
}

/// Relative entropy of entanglement of a two-qubit state, bounded above by
/// minimizing S(ρ‖σ) over mixtures of product states.
pub fn ree_brute_force(rho: &DensityOperator, bipartition: &Bipartition, budget: &ReeBudget) -> Result<ReeResult> {
    let f = rho.factorization();
    bipartition.validate(f)?;
    if rho.dim() != 4 || f.factors().len() != 2 || f.factors().iter().any(|x| x.dim != 2) {
        return Err(Error::invalid("brute-force REE supports two qubits only"));
    }
    if budget.components == 0 || budget.components > 16 || budget.restarts == 0 || budget.iterations == 0 {
        return Err(Error::invalid("REE budget needs 1..=16 components and nonzero restarts and iterations"));
    }
    // Product states are symmetric under relabeling, so factor order is all that matters.
    let s_ab = von_neumann_entropy(rho);
    let s_a = von_neumann_entropy(&partial_trace(rho, &bipartition.side_a())?);
    let s_b = von_neumann_entropy(&partial_trace(rho, &bipartition.side_b())?);
    let lower_bound = (s_a - s_ab).max(s_b - s_ab).max(0.0);

    let target = rho.matrix().clone();
    let mut runs: Vec<(f64, Vec<ProductComponent>)> = (0..budget.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
            rng.set_stream(r as u64);
            optimize_separable(&target, s_ab, budget, &mut rng)
        })
        .collect();
    runs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let restart_values: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let converged = restart_values.len() < 2 || (restart_values[1] - restart_values[0]).abs() <= 1e-4;
    let (upper_bound, closest_separable) = runs.swap_remove(0);
    Ok(ReeResult { lower: ReeLowerReport { lower_bound, restart_values, converged }, upper_bound, closest_separable })
}

const EIG_FLOOR: f64 = 1e-14;

struct Qubit {
    v: [C64; 2],
    d_theta: [C64; 2],
    d_phi: [C64; 2],
}

fn qubit(theta: f64, phi: f64) -> Qubit {
    let (s, c) = (0.5 * theta).sin_cos();
    let e = C64::from_polar(1.0, phi);
    Qubit {
        v: [C64::new(c, 0.0), e * s],
        d_theta: [C64::new(-0.5 * s, 0.0), e * (0.5 * c)],
        d_phi: [C64::new(0.0, 0.0), e * C64::new(0.0, s)],
    }
}

fn product(a: &[C64; 2], b: &[C64; 2]) -> CVector {
    CVector::from_vec(vec![a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]])
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|z| (z - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|e| e / s).collect()
}

// Objective S(ρ‖σ) and its gradient over [θa, φa, θb, φb, logit] per component.
fn objective(rho: &CMatrix, s_rho: f64, params: &[f64], k: usize) -> (f64, Vec<f64>) {
    let weights = softmax(&params[4 * k..]);
    let mut states = Vec::with_capacity(k);
    let mut sigma = CMatrix::zeros(4, 4);
    for c in 0..k {
        let p = &params[4 * c..4 * c + 4];
        let (qa, qb) = (qubit(p[0], p[1]), qubit(p[2], p[3]));
        let v = product(&qa.v, &qb.v);
        sigma += &v * v.adjoint() * C64::new(weights[c], 0.0);
        states.push((qa, qb, v));
    }
    let (lam, u) = hermitian_eigen(&sigma);
    let lam: Vec<f64> = lam.into_iter().map(|l| l.max(EIG_FLOOR)).collect();
    let r = u.adjoint() * rho * &u;
    let value = -s_rho - (0..4).map(|i| r[(i, i)].re * lam[i].ln()).sum::<f64>();

    // df = tr(G dσ) with G = −U (L ∘ UᴴρU) Uᴴ, L the divided differences of ln.
    let mut inner = CMatrix::zeros(4, 4);
    for i in 0..4 {
        for j in 0..4 {
            let l = if (lam[i] - lam[j]).abs() > 1e-12 * lam[i].max(lam[j]) {
                (lam[i].ln() - lam[j].ln()) / (lam[i] - lam[j])
            } else {
                1.0 / lam[i]
            };
            inner[(i, j)] = r[(i, j)] * (-l);
        }
    }
    let g = &u * inner * u.adjoint();

    let mut grad = vec![0.0; 5 * k];
    let mut dw = vec![0.0; k];
    for (c, (qa, qb, v)) in states.iter().enumerate() {
        let gv = &g * v;
        dw[c] = v.dotc(&gv).re;
        let w2 = 2.0 * weights[c];
        grad[4 * c] = w2 * product(&qa.d_theta, &qb.v).dotc(&gv).re;
        grad[4 * c + 1] = w2 * product(&qa.d_phi, &qb.v).dotc(&gv).re;
        grad[4 * c + 2] = w2 * product(&qa.v, &qb.d_theta).dotc(&gv).re;
        grad[4 * c + 3] = w2 * product(&qa.v, &qb.d_phi).dotc(&gv).re;
    }
    let mean: f64 = weights.iter().zip(&dw).map(|(w, d)| w * d).sum();
    for c in 0..k {
        grad[4 * k + c] = weights[c] * (dw[c] - mean);
    }
    (value, grad)
}

fn bloch(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

fn optimize_separable(
    rho: &CMatrix,
    s_rho: f64,
    budget: &ReeBudget,
    rng: &mut ChaCha8Rng,
) -> (f64, Vec<ProductComponent>) {
    let k = budget.components;
    let mut x = vec![0.0; 5 * k];
    for c in 0..k {
        x[4 * c] = (1.0 - 2.0 * rng.random::<f64>()).acos();
        x[4 * c + 1] = 2.0 * std::f64::consts::PI * rng.random::<f64>();
        x[4 * c + 2] = (1.0 - 2.0 * rng.random::<f64>()).acos();
        x[4 * c + 3] = 2.0 * std::f64::consts::PI * rng.random::<f64>();
    }
    let (b1, b2, eps) = (0.9, 0.999, 1e-12);
    let (lr0, lr_end): (f64, f64) = (0.05, 1e-4);
    let mut m = vec![0.0; x.len()];
    let mut v = vec![0.0; x.len()];
    let mut best = (f64::INFINITY, x.clone());
    for it in 0..budget.iterations {
        let (val, g) = objective(rho, s_rho, &x, k);
        if val < best.0 {
            best = (val, x.clone());
        }
        let lr = lr0 * (lr_end / lr0).powf(it as f64 / budget.iterations as f64);
        let t = (it + 1) as i32;
        for i in 0..x.len() {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            let mh = m[i] / (1.0 - b1.powi(t));
            let vh = v[i] / (1.0 - b2.powi(t));
            x[i] -= lr * mh / (vh.sqrt() + eps);
        }
    }
    let (val, _) = objective(rho, s_rho, &x, k);
    if val < best.0 {
        best = (val, x);
    }
    let weights = softmax(&best.1[4 * k..]);
    let comps = (0..k)
        .map(|c| {
            let p = &best.1[4 * c..4 * c + 4];
            ProductComponent { weight: weights[c], bloch_a: bloch(p[0], p[1]), bloch_b: bloch(p[2], p[3]) }
        })
        .collect();
    (best.0.max(0.0), comps)
}
