//! Relational time on a finite cyclic clock.
//!
//! The clock has ticks |τ_k⟩ (the standard basis, k = 0..d−1) and a Hamiltonian
//! whose unit-time propagator is the cyclic shift |τ_k⟩ → |τ_{k+1 mod d}⟩.
//! A history state correlates tick k with the system state e^{−iH_s k}|ψ₀⟩;
//! conditioning on a tick recovers Schrödinger evolution.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{
    fidelity, hermitian_eigen, hermitian_function, CMatrix, CVector, Factorization, LabeledState, C64,
};

pub const SYSTEM: &str = "s";
pub const CLOCK: &str = "c";

fn check_hermitian(h: &CMatrix, what: &str) -> Result<()> {
    if h.nrows() != h.ncols() {
        return Err(Error::invalid(format!("{what} must be square")));
    }
    let dev = (h - h.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if dev > 1e-10 {
        return Err(Error::invalid(format!("{what} is not Hermitian (deviation {dev:e})")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClockModel {
    d: usize,
    hamiltonian: CMatrix,
}

impl ClockModel {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    /// Eigenvalues of the clock Hamiltonian, −2πm/d for m = 0..d−1.
    pub fn spectrum(&self) -> Vec<f64> {
        (0..self.d).map(|m| -2.0 * PI * m as f64 / self.d as f64).collect()
    }

    /// exp(−iH_c) evaluated through the numerical spectrum of H_c.
    pub fn shift(&self) -> CMatrix {
        hermitian_function(&self.hamiltonian, |e| C64::new(0.0, -e).exp())
    }

    pub fn tick(&self, k: usize) -> Result<CVector> {
        if k >= self.d {
            return Err(Error::invalid(format!("tick {k} out of range for clock dimension {}", self.d)));
        }
        let mut v = CVector::zeros(self.d);
        v[k] = C64::new(1.0, 0.0);
        Ok(v)
    }
}

/// Clock of dimension `d` with eigenvalues on the branch (−2π, 0].
///
/// Eigenvectors are the Fourier states |ν_m⟩ = d^{−1/2} Σ_k e^{−2πimk/d}|τ_k⟩.
pub fn build_clock(d: usize) -> Result<ClockModel> {
    if d < 2 {
        return Err(Error::invalid(format!("clock dimension must be at least 2, got {d}")));
    }
    let df = d as f64;
    // H[j][k] = (1/d) Σ_m (−2πm/d) e^{−2πi m (j−k)/d}; depends only on (j−k) mod d.
    let column: Vec<C64> = (0..d)
        .map(|delta| {
            (0..d)
                .map(|m| {
                    let lambda = -2.0 * PI * m as f64 / df;
                    let phase = -2.0 * PI * ((m * delta) % d) as f64 / df;
                    C64::from_polar(lambda / df, phase)
                })
                .sum()
        })
        .collect();
    let hamiltonian = CMatrix::from_fn(d, d, |j, k| column[(j + d - k) % d]);
    let hamiltonian = (&hamiltonian + hamiltonian.adjoint()) * C64::new(0.5, 0.0);
    Ok(ClockModel { d, hamiltonian })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryState {
    state: LabeledState,
    system_dim: usize,
    clock: ClockModel,
}

impl HistoryState {
    pub fn state(&self) -> &LabeledState {
        &self.state
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn clock(&self) -> &ClockModel {
        &self.clock
    }

    /// The system ⊗ clock amplitudes as a (system_dim × d) matrix.
    fn as_matrix(&self) -> CMatrix {
        let d = self.clock.d;
        CMatrix::from_fn(self.system_dim, d, |i, k| self.state.amplitudes()[i * d + k])
    }

    /// Unnormalized projection ⟨τ_k|Ψ⟩.
    pub fn projection(&self, k: usize) -> Result<CVector> {
        self.clock.tick(k)?;
        let d = self.clock.d;
        Ok(CVector::from_fn(self.system_dim, |i, _| self.state.amplitudes()[i * d + k]))
    }
}

/// Ψ = d^{−1/2} Σ_k [e^{−iH_s k} ψ₀] ⊗ |τ_k⟩, built by repeated application of e^{−iH_s}.
pub fn build_history_state(h_s: &CMatrix, psi0: &CVector, clock: &ClockModel) -> Result<HistoryState> {
    check_hermitian(h_s, "system Hamiltonian")?;
    if h_s.nrows() != psi0.len() {
        return Err(Error::invalid(format!(
            "system Hamiltonian is {n}x{n} but psi0 has length {}",
            psi0.len(),
            n = h_s.nrows()
        )));
    }
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::invalid("psi0 must be normalized"));
    }
    let ds = psi0.len();
    let d = clock.d;
    let step = hermitian_function(h_s, |e| C64::new(0.0, -e).exp());
    let weight = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut amps = CVector::zeros(ds * d);
    let mut current = psi0.clone();
    for k in 0..d {
        for i in 0..ds {
            amps[i * d + k] = current[i] * weight;
        }
        current = &step * current;
    }
    let factorization = Factorization::new([(SYSTEM, ds), (CLOCK, d)])?;
    Ok(HistoryState { state: LabeledState::new(factorization, amps)?, system_dim: ds, clock: clock.clone() })
}

/// ⟨τ_k|Ψ⟩ renormalized to unit norm.
pub fn conditional_state(psi: &HistoryState, k: usize) -> Result<CVector> {
    let v = psi.projection(k)?;
    let n = v.norm();
    if n == 0.0 {
        return Err(Error::invalid(format!("history state has no weight on tick {k}")));
    }
    Ok(v / C64::new(n, 0.0))
}

/// Per-tick norms of (H_s ⊗ I + I ⊗ H_c)|Ψ⟩ restricted to each clock tick.
pub fn constraint_residual_by_tick(psi: &HistoryState, h_s: &CMatrix) -> Result<Vec<f64>> {
    if h_s.nrows() != psi.system_dim || h_s.ncols() != psi.system_dim {
        return Err(Error::invalid("system Hamiltonian does not match the history state"));
    }
    let m = psi.as_matrix();
    // (H_s ⊗ I)Ψ ↔ H_s M and (I ⊗ H_c)Ψ ↔ M H_cᵀ.
    let applied = h_s * &m + &m * psi.clock.hamiltonian.transpose();
    Ok(applied.column_iter().map(|c| c.norm()).collect())
}

/// ‖(H_s ⊗ I + I ⊗ H_c)|Ψ⟩‖.
pub fn constraint_residual(psi: &HistoryState, h_s: &CMatrix) -> Result<f64> {
    Ok(constraint_residual_by_tick(psi, h_s)?.iter().map(|x| x * x).sum::<f64>().sqrt())
}

/// e^{−iH_s k}|ψ₀⟩ from the eigendecomposition of H_s, with phases e^{−iE k} taken directly.
pub fn schrodinger_oracle(h_s: &CMatrix, psi0: &CVector, k: usize) -> Result<CVector> {
    check_hermitian(h_s, "system Hamiltonian")?;
    if h_s.nrows() != psi0.len() {
        return Err(Error::invalid("dimension mismatch between H_s and psi0"));
    }
    let (values, vectors) = hermitian_eigen(h_s);
    let coeffs = vectors.adjoint() * psi0;
    let t = k as f64;
    let evolved = CVector::from_fn(values.len(), |j, _| coeffs[j] * C64::from_polar(1.0, -values[j] * t));
    Ok(&vectors * evolved)
}

/// Hamiltonian with eigenvalues 2π·levels[j]/d in the basis given by the columns of `basis`.
pub fn lattice_hamiltonian(levels: &[usize], d: usize, basis: &CMatrix) -> CMatrix {
    let diag =
        CVector::from_iterator(levels.len(), levels.iter().map(|&m| C64::new(2.0 * PI * m as f64 / d as f64, 0.0)));
    basis * CMatrix::from_diagonal(&diag) * basis.adjoint()
}

/// Per-tick comparison of the relational and direct evolutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub tick: usize,
    pub fidelity: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClockReport {
    pub clock_dim: usize,
    pub system_dim: usize,
    pub total_residual: f64,
    pub min_fidelity: f64,
    pub ticks: Vec<TickRecord>,
}

/// Build the history state and compare every tick against the oracle.
pub fn analyze(h_s: &CMatrix, psi0: &CVector, d: usize) -> Result<ClockReport> {
    let clock = build_clock(d)?;
    let history = build_history_state(h_s, psi0, &clock)?;
    let residuals = constraint_residual_by_tick(&history, h_s)?;
    let mut ticks = Vec::with_capacity(d);
    for (k, &residual) in residuals.iter().enumerate() {
        let relational = conditional_state(&history, k)?;
        let direct = schrodinger_oracle(h_s, psi0, k)?;
        ticks.push(TickRecord { tick: k, fidelity: fidelity(&relational, &direct), residual });
    }
    Ok(ClockReport {
        clock_dim: d,
        system_dim: psi0.len(),
        total_residual: residuals.iter().map(|x| x * x).sum::<f64>().sqrt(),
        min_fidelity: ticks.iter().map(|t| t.fidelity).fold(f64::INFINITY, f64::min),
        ticks,
    })
}

/// JSON description of the system: Hermitian Hamiltonian and initial state as [re, im] pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub hamiltonian: Vec<Vec<[f64; 2]>>,
    pub psi0: Vec<[f64; 2]>,
}

impl SystemSpec {
    pub fn hamiltonian_matrix(&self) -> Result<CMatrix> {
        matrix_from_rows(&self.hamiltonian)
    }

    pub fn initial_state(&self) -> CVector {
        CVector::from_iterator(self.psi0.len(), self.psi0.iter().map(|&[re, im]| C64::new(re, im)))
    }
}

/// Square complex matrix from nested [re, im] rows.
pub fn matrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::invalid("matrix must be square and nonempty"));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::random;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag(values: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_iterator(values.len(), values.iter().map(|&v| C64::new(v, 0.0))))
    }

    fn plus() -> CVector {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CVector::from_vec(vec![C64::new(s, 0.0), C64::new(s, 0.0)])
    }

    #[test]
    fn rejects_small_clock() {
        assert!(build_clock(1).is_err());
        assert!(build_clock(0).is_err());
    }

    #[test]
    fn two_tick_spectrum() {
        let clock = build_clock(2).unwrap();
        let (values, _) = hermitian_eigen(clock.hamiltonian());
        assert!((values[0] + PI).abs() < 1e-12);
        assert!(values[1].abs() < 1e-12);
    }

    #[test]
    fn shift_moves_tick_forward() {
        let clock = build_clock(8).unwrap();
        let moved = clock.shift() * clock.tick(3).unwrap();
        assert!((moved - clock.tick(4).unwrap()).norm() < 1e-10);
        let wrapped = clock.shift() * clock.tick(7).unwrap();
        assert!((wrapped - clock.tick(0).unwrap()).norm() < 1e-10);
    }

    #[test]
    fn shift_is_cyclic() {
        for d in [2, 3, 5, 16, 33] {
            let clock = build_clock(d).unwrap();
            let s = clock.shift();
            let mut p = CMatrix::identity(d, d);
            for _ in 0..d {
                p = &s * p;
            }
            let dev = (p - CMatrix::identity(d, d)).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(dev < 1e-9, "d = {d}: {dev}");
        }
    }

    #[test]
    fn stationary_system() {
        let clock = build_clock(12).unwrap();
        let h = CMatrix::zeros(2, 2);
        let psi = build_history_state(&h, &plus(), &clock).unwrap();
        for k in 0..12 {
            assert!((conditional_state(&psi, k).unwrap() - plus()).norm() < 1e-14);
            assert!((psi.projection(k).unwrap().norm() - 1.0 / 12f64.sqrt()).abs() < 1e-12);
        }
        assert!(constraint_residual(&psi, &h).unwrap() < 1e-9);
    }

    #[test]
    fn relative_phase_per_tick() {
        let d = 10;
        let h = diag(&[0.0, 2.0 * PI / d as f64]);
        let psi = build_history_state(&h, &plus(), &build_clock(d).unwrap()).unwrap();
        for k in 0..d {
            let v = conditional_state(&psi, k).unwrap();
            let rel = v[1] / v[0];
            let want = C64::from_polar(1.0, -2.0 * PI * k as f64 / d as f64);
            assert!((rel - want).norm() < 1e-12);
        }
        assert!(constraint_residual(&psi, &h).unwrap() < 1e-9);
    }

    #[test]
    fn half_period_flips_sign() {
        let d = 16;
        let h = diag(&[0.0, 2.0 * PI / d as f64]);
        let psi = build_history_state(&h, &plus(), &build_clock(d).unwrap()).unwrap();
        let v = conditional_state(&psi, d / 2).unwrap();
        assert!((v[1] / v[0] + C64::new(1.0, 0.0)).norm() < 1e-12);
        assert_eq!(conditional_state(&psi, 0).unwrap(), plus());
    }

    #[test]
    fn out_of_range_tick() {
        let psi = build_history_state(&CMatrix::zeros(2, 2), &plus(), &build_clock(4).unwrap()).unwrap();
        assert!(conditional_state(&psi, 4).is_err());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let clock = build_clock(4).unwrap();
        assert!(build_history_state(&CMatrix::zeros(3, 3), &plus(), &clock).is_err());
        let unnormalized = plus() * C64::new(2.0, 0.0);
        assert!(build_history_state(&CMatrix::zeros(2, 2), &unnormalized, &clock).is_err());
    }

    #[test]
    fn incommensurate_spectrum_leaves_residual() {
        let h = diag(&[0.0, 1.0]);
        let psi = build_history_state(&h, &plus(), &build_clock(7).unwrap()).unwrap();
        assert!(constraint_residual(&psi, &h).unwrap() > 1e-3);
    }

    #[test]
    fn random_three_level_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = random::hermitian(&mut rng, 3);
        let psi0 = random::state(&mut rng, 3);
        let report = analyze(&h, &psi0, 40).unwrap();
        assert!(1.0 - report.min_fidelity <= 1e-12);
    }

    #[test]
    fn oracle_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let h = random::hermitian(&mut rng, 4);
        let psi0 = random::state(&mut rng, 4);
        assert!((schrodinger_oracle(&h, &psi0, 0).unwrap() - &psi0).norm() < 1e-12);
        assert!((schrodinger_oracle(&h, &psi0, 5).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]

        #[test]
        fn tick_covariance(seed in 0u64..1000, ds in 1usize..7, d in 2usize..64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = random::hermitian(&mut rng, ds);
            let psi0 = random::state(&mut rng, ds);
            let psi = build_history_state(&h, &psi0, &build_clock(d).unwrap()).unwrap();
            let step = hermitian_function(&h, |e| C64::new(0.0, -e).exp());
            for k in 0..d - 1 {
                let next = conditional_state(&psi, k + 1).unwrap();
                let pushed = &step * conditional_state(&psi, k).unwrap();
                proptest::prop_assert!((next - pushed).norm() < 1e-10);
            }
        }

        #[test]
        fn commensurability(seed in 0u64..1000, ds in 1usize..5, d in 3usize..48, shift in 1e-4f64..0.3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let basis = random::unitary(&mut rng, ds);
            let levels: Vec<usize> = (0..ds).map(|_| rng.random_range(0..d)).collect();
            let h = lattice_hamiltonian(&levels, d, &basis);
            let psi0 = random::state(&mut rng, ds);
            let clock = build_clock(d).unwrap();
            let on_lattice = build_history_state(&h, &psi0, &clock).unwrap();
            proptest::prop_assert!(constraint_residual(&on_lattice, &h).unwrap() <= 1e-9);

            // Push one level off the lattice.
            let mut perturbed = h.clone();
            let v = basis.column(0).clone_owned();
            perturbed += (&v * v.adjoint()) * C64::new(shift, 0.0);
            let off = build_history_state(&perturbed, &psi0, &clock).unwrap();
            let weight = v.dotc(&psi0).norm_sqr();
            if weight > 1e-3 {
                proptest::prop_assert!(constraint_residual(&off, &perturbed).unwrap() > 1e-9);
            }
        }
    }
}
