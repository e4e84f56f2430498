//! Emergent Gibbs weights from zero-energy system ⊗ bath states.
//!
//! A global state Σ_n |E_n⟩ ⊗ Σ_{m ≤ D(−E_n)} |ψ_{nm}⟩ with orthonormal bath
//! states reduces to ρ_s ∝ Σ_n D(−E_n)|E_n⟩⟨E_n|. When ln D is linear in the
//! bath energy the weights are exactly Boltzmann; otherwise only to first order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{von_neumann_entropy, CVector, DensityOperator, Factorization, LabeledState, C64};

pub const SYSTEM: &str = "s";
pub const REST: &str = "r";

/// Explicit construction is refused beyond this many amplitudes.
pub const MAX_EXPLICIT_DIM: u128 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathLevel {
    pub energy: f64,
    #[serde(with = "degeneracy_json")]
    pub degeneracy: u128,
}

// Tagged enums buffer their fields, and that buffer has no u128 support.
mod degeneracy_json {
    use serde::{de::Error as _, ser::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &u128, s: S) -> Result<S::Ok, S::Error> {
        let v = u64::try_from(*d).map_err(|_| S::Error::custom("degeneracy exceeds u64 range"))?;
        s.serialize_u64(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u128, D::Error> {
        let v = u64::deserialize(d).map_err(|e| D::Error::custom(format!("degeneracy: {e}")))?;
        Ok(v as u128)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BathModel {
    /// Arbitrary level table.
    SyntheticDegeneracy { levels: Vec<BathLevel> },
    /// `spins` two-level spins with splitting `spacing`. Bath energy E has
    /// `reference + E/spacing` excited spins and degeneracy C(spins, ·).
    SpinBath {
        spins: u32,
        spacing: f64,
        #[serde(default)]
        reference: Option<u32>,
    },
}

/// Exact binomial coefficient.
pub fn binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k) as u128;
    let n = n as u128;
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

impl BathModel {
    pub fn spin(spins: u32, spacing: f64) -> Self {
        BathModel::SpinBath { spins, spacing, reference: None }
    }

    /// Levels with D(E) = D_top · e^{β(E − E_top)}: energies Δ(1 − k) and
    /// degeneracies 2^{n−k} for k = 0..=n, with Δ = ln 2 / β.
    pub fn exponential(beta: f64, n: u32) -> Result<Self> {
        if !(beta > 0.0) || n == 0 || n > 100 {
            return Err(Error::invalid("exponential bath needs beta > 0 and 1 <= n <= 100"));
        }
        let delta = std::f64::consts::LN_2 / beta;
        let levels =
            (0..=n).map(|k| BathLevel { energy: delta * (1.0 - k as f64), degeneracy: 1u128 << (n - k) }).collect();
        Ok(BathModel::SyntheticDegeneracy { levels })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BathModel::SyntheticDegeneracy { levels } => {
                if levels.is_empty() {
                    return Err(Error::invalid("bath needs at least one level"));
                }
                for l in levels {
                    if l.degeneracy < 1 {
                        return Err(Error::invalid(format!("degeneracy at E = {} must be >= 1", l.energy)));
                    }
                    if !l.energy.is_finite() {
                        return Err(Error::invalid("bath energies must be finite"));
                    }
                }
                Ok(())
            }
            BathModel::SpinBath { spins, spacing, reference } => {
                if *spins == 0 || *spins > 120 {
                    return Err(Error::invalid("spin bath needs 1..=120 spins"));
                }
                if !(*spacing > 0.0) {
                    return Err(Error::invalid("spin bath spacing must be positive"));
                }
                if reference.is_some_and(|r| r > *spins) {
                    return Err(Error::invalid("spin bath reference exceeds the number of spins"));
                }
                Ok(())
            }
        }
    }

    /// Levels sorted by ascending energy.
    pub fn levels(&self) -> Vec<BathLevel> {
        let mut levels = match self {
            BathModel::SyntheticDegeneracy { levels } => levels.clone(),
            BathModel::SpinBath { spins, spacing, reference } => {
                let r = reference.unwrap_or(spins / 4) as f64;
                (0..=*spins)
                    .map(|k| BathLevel { energy: (k as f64 - r) * spacing, degeneracy: binomial(*spins, k) })
                    .collect()
            }
        };
        levels.sort_by(|a, b| a.energy.total_cmp(&b.energy));
        levels
    }

    /// Degeneracy of the level at `energy`, if one exists (relative match 1e-9).
    pub fn degeneracy_at(&self, energy: f64) -> Option<u128> {
        self.levels()
            .into_iter()
            .find(|l| (l.energy - energy).abs() <= 1e-9 * l.energy.abs().max(1.0))
            .map(|l| l.degeneracy)
    }
}

/// Block structure of the zero-energy global state: one bath block per system level.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroEnergyBranches {
    pub system_energies: Vec<f64>,
    pub degeneracies: Vec<u128>,
}

impl ZeroEnergyBranches {
    pub fn new(system_levels: &[f64], bath: &BathModel) -> Result<Self> {
        bath.validate()?;
        if system_levels.is_empty() {
            return Err(Error::invalid("need at least one system level"));
        }
        let degeneracies = system_levels
            .iter()
            .map(|&e| {
                bath.degeneracy_at(-e)
                    .ok_or_else(|| Error::invalid(format!("no bath level at energy {} to match system level {e}", -e)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ZeroEnergyBranches { system_energies: system_levels.to_vec(), degeneracies })
    }

    pub fn bath_dim(&self) -> u128 {
        self.degeneracies.iter().sum()
    }

    /// Reduced populations D(−E_n) / Σ D.
    pub fn populations(&self) -> Vec<f64> {
        // Degeneracies can exceed 2^53; divide in log space to stay accurate.
        let logs: Vec<f64> = self.degeneracies.iter().map(|&d| (d as f64).ln()).collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
        let z: f64 = weights.iter().sum();
        weights.into_iter().map(|w| w / z).collect()
    }

    /// ρ_s from the block structure (orthonormal bath blocks give a diagonal state).
    pub fn reduced_system_state(&self) -> Result<DensityOperator> {
        DensityOperator::from_diagonal(Factorization::single(SYSTEM, self.system_energies.len())?, &self.populations())
    }

    /// The explicit pure state on system ⊗ rest.
    pub fn to_state(&self) -> Result<LabeledState> {
        let bath_dim = self.bath_dim();
        let n = self.system_energies.len() as u128;
        if bath_dim * n > MAX_EXPLICIT_DIM {
            return Err(Error::invalid(format!(
                "explicit state would have {} amplitudes (limit {MAX_EXPLICIT_DIM})",
                bath_dim * n
            )));
        }
        let bd = bath_dim as usize;
        let amp = C64::new(1.0 / (bath_dim as f64).sqrt(), 0.0);
        let mut amps = CVector::zeros(self.system_energies.len() * bd);
        let mut offset = 0usize;
        for (i, &d) in self.degeneracies.iter().enumerate() {
            for m in 0..d as usize {
                amps[i * bd + offset + m] = amp;
            }
            offset += d as usize;
        }
        LabeledState::new(Factorization::new([(SYSTEM, self.system_energies.len()), (REST, bd)])?, amps)
    }

    /// Diagonal of H_s ⊗ I + I ⊗ H_r in the product basis; block n of the bath sits at −E_n.
    fn total_energy_diagonal(&self) -> Vec<f64> {
        let bath_energies: Vec<f64> = self
            .system_energies
            .iter()
            .zip(&self.degeneracies)
            .flat_map(|(&e, &d)| std::iter::repeat_n(-e, d as usize))
            .collect();
        self.system_energies.iter().flat_map(|&es| bath_energies.iter().map(move |&eb| es + eb)).collect()
    }

    /// ‖(H_s + H_r)|Ψ⟩‖ for the explicit state.
    pub fn energy_residual(&self, psi: &LabeledState) -> Result<f64> {
        let diag = self.total_energy_diagonal();
        if diag.len() != psi.amplitudes().len() {
            return Err(Error::invalid("state does not match these branches"));
        }
        Ok(psi.amplitudes().iter().zip(diag).map(|(a, e)| (a * e).norm_sqr()).sum::<f64>().sqrt())
    }
}

/// Explicit zero-energy global state |Ψ_sr⟩.
pub fn build_global_state(system_levels: &[f64], bath: &BathModel) -> Result<LabeledState> {
    ZeroEnergyBranches::new(system_levels, bath)?.to_state()
}

/// Trace the rest out of an explicit global state.
pub fn reduced_system_state(psi: &LabeledState) -> Result<DensityOperator> {
    psi.reduced(&[SYSTEM])
}

/// Log-derivative of the degeneracy, d ln D / dE, at bath energy `at_energy`.
///
/// Uses the centered difference over the neighbouring levels when `at_energy`
/// is itself a level, and the secant through the two bracketing levels otherwise.
pub fn beta_from_degeneracy(bath: &BathModel, at_energy: f64) -> Result<f64> {
    bath.validate()?;
    let levels = bath.levels();
    let tol = |e: f64| 1e-9 * e.abs().max(1.0);
    let secant = |a: &BathLevel, b: &BathLevel| {
        ((b.degeneracy as f64).ln() - (a.degeneracy as f64).ln()) / (b.energy - a.energy)
    };
    if let Some(i) = levels.iter().position(|l| (l.energy - at_energy).abs() <= tol(at_energy)) {
        if i == 0 || i + 1 >= levels.len() {
            return Err(Error::invalid(format!("level at {at_energy} has no neighbour on both sides")));
        }
        return Ok(secant(&levels[i - 1], &levels[i + 1]));
    }
    levels
        .windows(2)
        .find(|w| w[0].energy < at_energy && at_energy < w[1].energy)
        .map(|w| secant(&w[0], &w[1]))
        .ok_or_else(|| Error::invalid(format!("no pair of bath levels brackets energy {at_energy}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GibbsFit {
    pub beta: f64,
    /// Intercept of −ln p = βE + c.
    pub intercept: f64,
    /// max_n |p_n − e^{−βE_n}/Z|.
    pub max_deviation: f64,
}

/// Unweighted least-squares slope of −ln pₙ against Eₙ.
pub fn fit_beta(energies: &[f64], populations: &[f64]) -> Result<GibbsFit> {
    if energies.len() != populations.len() {
        return Err(Error::invalid("energies and populations differ in length"));
    }
    let points: Vec<(f64, f64)> =
        energies.iter().zip(populations).filter(|(_, &p)| p > 0.0).map(|(&e, &p)| (e, -p.ln())).collect();
    let n = points.len() as f64;
    let mean_e = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_e).powi(2)).sum();
    if points.len() < 2 || sxx <= 1e-24 * (1.0 + mean_e * mean_e) {
        return Err(Error::invalid("fit needs at least two distinct energies with nonzero population"));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_e) * (p.1 - mean_y)).sum();
    let beta = sxy / sxx;
    let intercept = mean_y - beta * mean_e;
    let gibbs = gibbs_weights(energies, beta);
    let max_deviation = populations.iter().zip(&gibbs).map(|(p, g)| (p - g).abs()).fold(0.0, f64::max);
    Ok(GibbsFit { beta, intercept, max_deviation })
}

/// e^{−βEₙ}/Z, evaluated with the minimum energy shifted to zero.
pub fn gibbs_weights(energies: &[f64], beta: f64) -> Vec<f64> {
    let shift = energies.iter().map(|&e| beta * e).fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = energies.iter().map(|&e| (shift - beta * e).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmergentThermalReport {
    pub beta_fit: f64,
    pub beta_theory: f64,
    /// (Eₙ, pₙ) pairs.
    pub populations: Vec<(f64, f64)>,
    pub max_gibbs_deviation: f64,
    /// Entanglement entropy across the system | rest cut, nats.
    pub entanglement_entropy: f64,
}

impl EmergentThermalReport {
    pub fn relative_beta_error(&self) -> f64 {
        ((self.beta_fit - self.beta_theory) / self.beta_theory).abs()
    }
}

/// Reduced populations, fitted β, and β from the degeneracy at the bath energy
/// matching the centre of the system spectrum.
pub fn emergent_report(system_levels: &[f64], bath: &BathModel) -> Result<EmergentThermalReport> {
    let branches = ZeroEnergyBranches::new(system_levels, bath)?;
    let pops = branches.populations();
    let fit = fit_beta(system_levels, &pops)?;
    let lo = system_levels.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = system_levels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let beta_theory = beta_from_degeneracy(bath, -0.5 * (lo + hi))?;
    let rho = branches.reduced_system_state()?;
    Ok(EmergentThermalReport {
        beta_fit: fit.beta,
        beta_theory,
        populations: system_levels.iter().copied().zip(pops).collect(),
        max_gibbs_deviation: fit.max_deviation,
        entanglement_entropy: von_neumann_entropy(&rho),
    })
}

/// Reports for spin baths of each size in `spins`, computed in parallel, in input order.
pub fn spin_bath_sweep(spins: &[u32], spacing: f64, system_levels: &[f64]) -> Result<Vec<EmergentThermalReport>> {
    spins.par_iter().map(|&n| emergent_report(system_levels, &BathModel::spin(n, spacing))).collect()
}

/// √r|1⟩_r|0⟩_t + √t|0⟩_r|1⟩_t and the entropy of either mode, in nats.
pub fn two_mode_tunneling_state(t: f64) -> Result<(LabeledState, f64)> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::invalid(format!("transmission probability {t} outside [0, 1]")));
    }
    let r = 1.0 - t;
    let mut amps = CVector::zeros(4);
    // Index = 2·n_r + n_t.
    amps[2] = C64::new(r.sqrt(), 0.0);
    amps[1] = C64::new(t.sqrt(), 0.0);
    let state = LabeledState::new(Factorization::new([("reflected", 2), ("transmitted", 2)])?, amps)?;
    let entropy = state.entanglement_entropy(&["transmitted"])?;
    Ok((state, entropy))
}
