//! Closed-form spot checks run by `--selftest`.

use std::f64::consts::{LN_2, PI};

use emergent_core::clock;
use emergent_core::cosmo::{self, CosmoParams, CosmoState, EpochLabel, OutputGrid};
use emergent_core::numerics::StepControl;
use emergent_core::quantum::{CMatrix, CVector, DensityOperator, Factorization, LabeledState, C64};
use emergent_core::thermal::{self, BathLevel, BathModel, ZeroEnergyBranches};
use emergent_core::tunneling::{self, BarrierProfile, UniverseVariant};
use emergent_core::units::{constants, UnitSystem};
use emergent_core::witness::{self, Bipartition, CriticalTemperature, ReeBudget, ThermalSystem};
use emergent_core::Result;

use crate::output::Csv;

type Check = (&'static str, Result<bool>);
type Group = (&'static str, fn() -> Vec<Check>);

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(f64::MIN_POSITIVE)
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn sample_system() -> (CMatrix, CVector) {
    let h = CMatrix::from_row_slice(
        3,
        3,
        &[c(0.3), C64::new(0.1, 0.2), c(0.0), C64::new(0.1, -0.2), c(-0.4), c(0.5), c(0.0), c(0.5), c(1.1)],
    );
    let v = CVector::from_vec(vec![c(0.6), C64::new(0.0, 0.8), c(0.0)]);
    (h, v)
}

pub fn clock_checks() -> Vec<Check> {
    let (h, psi0) = sample_system();
    let zero = CMatrix::zeros(3, 3);
    vec![
        (
            "clock shift is cyclic",
            (|| {
                for d in [2, 5, 16] {
                    let u = clock::build_clock(d)?.shift();
                    let mut p = CMatrix::identity(d, d);
                    for _ in 0..d {
                        p = &u * p;
                    }
                    if (p - CMatrix::identity(d, d)).iter().any(|z| z.norm() > 1e-9) {
                        return Ok(false);
                    }
                }
                Ok(true)
            })(),
        ),
        (
            "stationary system keeps psi0 at every tick",
            (|| {
                let hist = clock::build_history_state(&zero, &psi0, &clock::build_clock(8)?)?;
                for k in 0..8 {
                    if (clock::conditional_state(&hist, k)? - &psi0).norm() > 1e-12 {
                        return Ok(false);
                    }
                }
                Ok(true)
            })(),
        ),
        ("tick 0 is psi0", (|| Ok((clock::schrodinger_oracle(&h, &psi0, 0)? - &psi0).norm() < 1e-14))()),
        (
            "stationary constraint residual vanishes",
            (|| {
                let hist = clock::build_history_state(&zero, &psi0, &clock::build_clock(12)?)?;
                Ok(clock::constraint_residual(&hist, &zero)? <= 1e-9)
            })(),
        ),
        (
            "direct evolution is unitary",
            (|| Ok((clock::schrodinger_oracle(&h, &psi0, 5)?.norm() - 1.0).abs() <= 1e-12))(),
        ),
        ("clock dimension 1 rejected", Ok(clock::build_clock(1).is_err())),
    ]
}

pub fn thermal_checks() -> Vec<Check> {
    let flat = BathModel::SyntheticDegeneracy {
        levels: (-2..=2).map(|e| BathLevel { energy: e as f64, degeneracy: 7 }).collect(),
    };
    let levels = [0.0, 0.4, 1.3, 2.0];
    vec![
        (
            "single system level gives zero entanglement",
            (|| {
                let rho = ZeroEnergyBranches::new(&[0.0], &BathModel::spin(8, 1.0))?.reduced_system_state()?;
                Ok(emergent_core::quantum::von_neumann_entropy(&rho).abs() < 1e-12)
            })(),
        ),
        ("constant degeneracy gives beta 0", thermal::beta_from_degeneracy(&flat, 0.0).map(|b| b.abs() < 1e-15)),
        (
            "fit recovers exact Gibbs beta",
            (|| {
                let fit = thermal::fit_beta(&levels, &thermal::gibbs_weights(&levels, 1.7))?;
                Ok(close(fit.beta, 1.7, 1e-12) && fit.max_deviation <= 1e-12)
            })(),
        ),
        ("no transmission is a product state", thermal::two_mode_tunneling_state(0.0).map(|(_, s)| s.abs() < 1e-14)),
        ("half transmission gives ln 2", thermal::two_mode_tunneling_state(0.5).map(|(_, s)| close(s, LN_2, 1e-12))),
    ]
}

pub fn tunnel_checks() -> Vec<Check> {
    vec![
        (
            "no barrier transmits fully",
            (|| Ok(tunneling::wkb_rate(&BarrierProfile::rectangular(0.0, 2.0)?)?.gamma == 1.0))(),
        ),
        (
            "rectangular barrier",
            (|| {
                let r = tunneling::wkb_rate(&BarrierProfile::rectangular(0.8, 1.5)?)?;
                Ok(close(r.gamma, (-2.0f64 * 0.8 * 1.5).exp(), 1e-12))
            })(),
        ),
        (
            "vanishing emission",
            tunneling::parikh_wilczek_exponent(1.0, 1e-12).map(|e| e < 1e-10 && (-e).exp() > 1.0 - 1e-10),
        ),
        (
            "hawking temperature halves with doubled mass",
            (|| Ok(close(tunneling::hawking_temperature(2e30)?, tunneling::hawking_temperature(1e30)? / 2.0, 1e-14)))(),
        ),
        (
            "vanishing barrier probability",
            tunneling::wdw_tunneling_probability(1e-6, 1.0).map(|r| r.probability > 1.0 - 1e-10),
        ),
        (
            "literal exponent is 1/H in natural units",
            (|| {
                let r = tunneling::universe_tunneling_probability(
                    2.0,
                    UniverseVariant::PaperLiteral,
                    UnitSystem::Natural,
                    false,
                )?;
                Ok(close(r.exponent, 0.5, 1e-15))
            })(),
        ),
        (
            "dimensionful SI exponent needs override",
            Ok({
                let refused = tunneling::universe_tunneling_probability(
                    2.2e-18,
                    UniverseVariant::PaperLiteral,
                    UnitSystem::Si,
                    false,
                )
                .is_err();
                let forced = tunneling::universe_tunneling_probability(
                    2.2e-18,
                    UniverseVariant::PaperLiteral,
                    UnitSystem::Si,
                    true,
                );
                refused && matches!(forced, Ok(r) if !r.dimensionless)
            }),
        ),
        (
            "universe temperature is linear in H",
            (|| {
                Ok(close(
                    tunneling::universe_temperature(4.4e-18, UnitSystem::Si)?,
                    2.0 * tunneling::universe_temperature(2.2e-18, UnitSystem::Si)?,
                    1e-14,
                ))
            })(),
        ),
        (
            "universe mass is inverse in H",
            (|| {
                Ok(close(
                    tunneling::universe_mass(4.4e-18, UnitSystem::Si)?,
                    tunneling::universe_mass(2.2e-18, UnitSystem::Si)? / 2.0,
                    1e-14,
                ))
            })(),
        ),
        (
            "consistent-variant chain ratio is H-independent",
            (|| {
                let a = tunneling::chain_consistency_report(1.0, UnitSystem::Natural)?.entries[1].ratio_to_stated;
                let b = tunneling::chain_consistency_report(37.0, UnitSystem::Natural)?.entries[1].ratio_to_stated;
                Ok(close(a, b, 1e-12))
            })(),
        ),
        (
            "chain report at H = 1 lists both variants",
            tunneling::chain_consistency_report(1.0, UnitSystem::Natural).map(|r| {
                r.entries.len() == 2 && r.entries.iter().all(|e| e.exponent > 0.0 && e.implied_temperature > 0.0)
            }),
        ),
    ]
}

pub fn cosmo_checks() -> Vec<Check> {
    let free = CosmoParams::new(1.0 / 3.0, 0.0, 2.0, UnitSystem::Natural);
    vec![
        ("empty universe does not expand", free.clone().and_then(|p| cosmo::friedmann_H(0.0, &p)).map(|h| h == 0.0)),
        (
            "unit normalization",
            free.clone().and_then(|p| cosmo::friedmann_H(3.0 / (8.0 * PI), &p)).map(|h| close(h, 1.0, 1e-15)),
        ),
        (
            "heat term off gives D a^-4",
            free.clone()
                .and_then(|p| cosmo::closed_form_density(0.3, &p))
                .map(|r| close(r, 2.0 * 0.3f64.powi(-4), 1e-14)),
        ),
        (
            "radiation era scales as a^-4",
            (|| {
                let p = CosmoParams::new(1.0 / 3.0, 0.0, 1.0, UnitSystem::Natural)?;
                let init = CosmoState::on_solution(0.0, 1.0, &p)?;
                let traj = cosmo::integrate_universe(
                    &p,
                    init,
                    2e4 / init.h,
                    &OutputGrid::Uniform { n: 20 },
                    StepControl::default(),
                )?;
                Ok(traj.samples.last().is_some_and(|s| s.a > 100.0)
                    && traj.samples.iter().all(|s| close(s.rho, s.a.powi(-4), 1e-8)))
            })(),
        ),
        (
            "heat influx scales as H^5",
            (|| {
                Ok(close(
                    cosmo::heat_influx(2.0, UnitSystem::Natural)?,
                    32.0 * cosmo::heat_influx(1.0, UnitSystem::Natural)?,
                    1e-14,
                ))
            })(),
        ),
        (
            "no source means radiation throughout",
            (|| {
                let p = CosmoParams::new(1.0 / 3.0, 0.0, 1.0, UnitSystem::Natural)?;
                let init = CosmoState::on_solution(0.0, 1.0, &p)?;
                let traj =
                    cosmo::integrate_universe(&p, init, 5.0, &OutputGrid::Uniform { n: 10 }, StepControl::default())?;
                let e = cosmo::detect_epochs(&traj, &p, 0.5);
                Ok(e.len() == 1 && e[0].label == EpochLabel::Radiation)
            })(),
        ),
        (
            "transition time decreases with threshold",
            (|| {
                let p = CosmoParams::new(1.0 / 3.0, 1.0 / 45.0, 1.0, UnitSystem::Natural)?;
                let init = cosmo::inflation_start(&p, 1e-6)?;
                let traj =
                    cosmo::integrate_universe(&p, init, 5.0, &OutputGrid::Uniform { n: 1000 }, StepControl::default())?;
                let t: Vec<f64> =
                    [0.1, 0.5, 0.9].iter().map(|&th| cosmo::detect_epochs(&traj, &p, th)[0].t_end).collect();
                Ok(t[0] > t[1] && t[1] > t[2])
            })(),
        ),
    ]
}

fn qubits() -> Factorization {
    Factorization::new([("a", 2), ("b", 2)]).expect("valid factors")
}

fn diag_system(energies: [f64; 4]) -> Result<ThermalSystem> {
    let h = CMatrix::from_diagonal(&CVector::from_iterator(4, energies.iter().map(|&e| c(e))));
    ThermalSystem::new(h, qubits(), Bipartition::new(["a"], ["b"]))
}

fn heisenberg(j: f64) -> Result<ThermalSystem> {
    let x = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
    let y = CMatrix::from_row_slice(2, 2, &[c(0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), c(0.0)]);
    let z = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
    let h = (x.kronecker(&x) + y.kronecker(&y) + z.kronecker(&z)) * c(j);
    ThermalSystem::new(h, qubits(), Bipartition::new(["a"], ["b"]))
}

pub fn witness_checks() -> Vec<Check> {
    let k = constants();
    let t = 2.0;
    let omega = k.k_b * t / k.hbar;
    let bip = Bipartition::new(["a"], ["b"]);
    vec![
        (
            "infinite temperature gives I/d",
            (|| {
                let sys = heisenberg(1.0)?;
                let (rho, _) = witness::gibbs_state(&sys, 1e6 * sys.spectral_width())?;
                Ok(rho.max_deviation(&DensityOperator::maximally_mixed(qubits())) < 1e-5)
            })(),
        ),
        (
            "product state has zero entanglement",
            (|| {
                let psi = LabeledState::new(qubits(), CVector::from_vec(vec![c(0.0), c(1.0), c(0.0), c(0.0)]))?;
                Ok(witness::entanglement_entropy_pure(&psi, &bip)?.abs() < 1e-14)
            })(),
        ),
        (
            "separable state has zero REE bound",
            (|| {
                let rho = DensityOperator::from_diagonal(qubits(), &[0.4, 0.3, 0.2, 0.1])?;
                let budget = ReeBudget { restarts: 2, iterations: 800, ..ReeBudget::default() };
                Ok(witness::ree_brute_force(&rho, &bip, &budget)?.upper_bound <= 1e-6)
            })(),
        ),
        (
            "product ground state has no threshold",
            (|| {
                Ok(witness::critical_temperature(&diag_system([0.0, 1.0, 2.0, 3.0])?)?
                    == CriticalTemperature::NoThreshold)
            })(),
        ),
        (
            "doubling energies doubles the critical temperature",
            (|| {
                let t1 = witness::critical_temperature(&heisenberg(1.0)?)?;
                let t2 = witness::critical_temperature(&heisenberg(2.0)?)?;
                Ok(match (t1, t2) {
                    (
                        CriticalTemperature::Threshold { temperature: a, .. },
                        CriticalTemperature::Threshold { temperature: b, .. },
                    ) => close(b, 2.0 * a, 1e-12),
                    _ => false,
                })
            })(),
        ),
        (
            "heat capacity vanishes at low temperature",
            (|| Ok(witness::heat_capacity(&diag_system([0.0, 1.0, 1.5, 2.0])?, 1e-3)?.variance_form <= 1e-100))(),
        ),
        (
            "scaling entropy at unit ratio is N",
            witness::scaling_model_entropy(5.0, t, omega, 2.0).map(|s| close(s, 5.0, 1e-12)),
        ),
        (
            "scaling entropy linear case",
            witness::scaling_model_entropy(1.0, 0.5 * t, omega, 1.0).map(|s| close(s, 0.5, 1e-12)),
        ),
        (
            "scaling entropy is extensive",
            (|| {
                Ok(close(
                    witness::scaling_model_entropy(2.0, t, 0.3 * omega, 1.5)?,
                    2.0 * witness::scaling_model_entropy(1.0, t, 0.3 * omega, 1.5)?,
                    1e-14,
                ))
            })(),
        ),
        (
            "unit fluctuation gives k_B T / hbar",
            witness::cmb_frequency_bound(3.0, 1.0, 1.0).map(|w| close(w, k.k_b * 3.0 / k.hbar, 1e-14)),
        ),
        (
            "critical heat capacity at unit ratio",
            witness::critical_heat_capacity(t, omega, 1.0).map(|x| close(x, 1.0, 1e-12)),
        ),
        (
            "p = 2 squares the ratio",
            (|| {
                let r = witness::critical_heat_capacity(t, 0.2 * omega, 1.0)?;
                Ok(close(witness::critical_heat_capacity(t, 0.2 * omega, 2.0)?, r * r, 1e-12))
            })(),
        ),
    ]
}

pub fn cli_checks() -> Vec<Check> {
    let empty = Csv::new(&["t", "a", "rho", "H", "epoch"]).into_string();
    vec![
        ("empty trajectory gives a header-only CSV", Ok(empty == "t,a,rho,H,epoch\n")),
        (
            "witness grid columns",
            Ok(Csv::new(&["T", "S_thermal", "C", "verdict", "margin"]).into_string()
                == "T,S_thermal,C,verdict,margin\n"),
        ),
    ]
}

pub fn checks_for(name: Option<&str>) -> Vec<(&'static str, Vec<Check>)> {
    let all: [Group; 6] = [
        ("clock", clock_checks),
        ("thermal", thermal_checks),
        ("tunnel", tunnel_checks),
        ("cosmo", cosmo_checks),
        ("witness", witness_checks),
        ("cli", cli_checks),
    ];
    all.iter().filter(|(n, _)| name.is_none_or(|x| x == *n)).map(|(n, f)| (*n, f())).collect()
}

/// Print one line per check; true when all pass.
pub fn run(name: Option<&str>) -> bool {
    let mut ok = true;
    for (group, checks) in checks_for(name) {
        for (label, result) in checks {
            match result {
                Ok(true) => println!("PASS {group}: {label}"),
                Ok(false) => {
                    ok = false;
                    println!("FAIL {group}: {label}");
                }
                Err(e) => {
                    ok = false;
                    println!("FAIL {group}: {label} ({e})");
                }
            }
        }
    }
    ok
}

#[cfg(test)]
mod tests {
    #[test]
    fn every_selftest_passes() {
        for (group, checks) in super::checks_for(None) {
            for (label, result) in checks {
                assert!(matches!(result, Ok(true)), "{group}: {label}: {result:?}");
            }
        }
    }
}
