//! Flat Friedmann cosmology with a black-body heat-influx source.
//!
//! The continuity equation carries the source 3αρ²H, which drives an
//! inflationary plateau at ρ = (1+ω)/α before the fluid dilutes normally.
//! Integration runs in (ln a, ln ρ) and in Planck units; SI parameters are
//! converted at entry and samples converted back.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{DormandPrince, StepControl};
use crate::units::{constants, convert, Dimension, PhysicalConstants, UnitSystem};

/// ħG²/(45c⁷); 1/45 in Planck units.
pub fn default_alpha(units: UnitSystem) -> f64 {
    match units {
        UnitSystem::Natural => 1.0 / 45.0,
        UnitSystem::Si => {
            let k = constants();
            k.hbar * k.g * k.g / (45.0 * k.c.powi(7))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CosmoParams {
    pub omega_eos: f64,
    /// Inverse energy density.
    pub alpha: f64,
    /// Integration constant of the density solution (energy density).
    pub d: f64,
    /// Only 0 is supported.
    pub curvature_k: i8,
    pub units: UnitSystem,
}

impl CosmoParams {
    pub fn new(omega_eos: f64, alpha: f64, d: f64, units: UnitSystem) -> Result<Self> {
        let p = CosmoParams { omega_eos, alpha, d, curvature_k: 0, units };
        p.validate()?;
        Ok(p)
    }

    /// Parameters whose density solution passes through (a0, rho0).
    pub fn from_initial(omega_eos: f64, alpha: f64, a0: f64, rho0: f64, units: UnitSystem) -> Result<Self> {
        if !(omega_eos > -1.0) || !(alpha >= 0.0) {
            return Err(Error::invalid("need omega_eos > -1 and alpha >= 0"));
        }
        if !(a0 > 0.0) || !(rho0 > 0.0) {
            return Err(Error::invalid("need a0 > 0 and rho0 > 0"));
        }
        let inv = 1.0 / rho0 - alpha / (1.0 + omega_eos);
        if !(inv > 0.0) {
            return Err(Error::invalid(format!(
                "rho0 = {rho0:e} is at or above the plateau density {:e}",
                (1.0 + omega_eos) / alpha
            )));
        }
        let n = 3.0 * (1.0 + omega_eos);
        Self::new(omega_eos, alpha, a0.powf(n) / inv, units)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_eos > -1.0) || !self.omega_eos.is_finite() {
            return Err(Error::invalid(format!("omega_eos must exceed -1, got {}", self.omega_eos)));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::invalid(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if !(self.d > 0.0) || !self.d.is_finite() {
            return Err(Error::invalid(format!("D must be positive, got {}", self.d)));
        }
        if self.curvature_k != 0 {
            return Err(Error::invalid("only flat (k = 0) cosmologies are implemented"));
        }
        Ok(())
    }

    /// Dilution exponent 3(1+ω).
    pub fn n(&self) -> f64 {
        3.0 * (1.0 + self.omega_eos)
    }

    /// (1+ω)/α, where the source balances dilution; None when alpha = 0.
    pub fn plateau_density(&self) -> Option<f64> {
        (self.alpha > 0.0).then(|| (1.0 + self.omega_eos) / self.alpha)
    }

    fn to_natural(self) -> CosmoParams {
        match self.units {
            UnitSystem::Natural => self,
            UnitSystem::Si => CosmoParams {
                alpha: self.alpha * constants().planck_energy_density(),
                d: convert(self.d, Dimension::Density, UnitSystem::Si, UnitSystem::Natural),
                units: UnitSystem::Natural,
                ..self
            },
        }
    }
}

/// H = √(8πGρ/(3c²)).
#[allow(non_snake_case)]
pub fn friedmann_H(rho: f64, params: &CosmoParams) -> Result<f64> {
    if !(rho >= 0.0) {
        return Err(Error::invalid(format!("density must be nonnegative, got {rho}")));
    }
    Ok(match params.units {
        UnitSystem::Natural => (8.0 * PI * rho / 3.0).sqrt(),
        UnitSystem::Si => {
            let k = constants();
            (8.0 * PI * k.g * rho / (3.0 * k.c * k.c)).sqrt()
        }
    })
}

/// ρ(a) = D a^{−n} / (1 + αD a^{−n}/(1+ω)).
pub fn closed_form_density(a: f64, params: &CosmoParams) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::invalid(format!("scale factor must be positive, got {a}")));
    }
    // 1/ρ form avoids overflow of a^{−n} deep in the plateau.
    let inv = a.powf(params.n()) / params.d + params.alpha / (1.0 + params.omega_eos);
    Ok(1.0 / inv)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CosmoState {
    pub t: f64,
    pub a: f64,
    pub rho: f64,
    #[serde(rename = "H")]
    pub h: f64,
}

impl CosmoState {
    /// State on the closed-form solution at scale factor `a`.
    pub fn on_solution(t: f64, a: f64, params: &CosmoParams) -> Result<Self> {
        let rho = closed_form_density(a, params)?;
        Ok(CosmoState { t, a, rho, h: friedmann_H(rho, params)? })
    }
}

/// Start where a^n/(αD) equals `depth`, i.e. deep on the plateau for small depth.
pub fn inflation_start(params: &CosmoParams, depth: f64) -> Result<CosmoState> {
    if !(params.alpha > 0.0) || !(depth > 0.0) {
        return Err(Error::invalid("inflation start needs alpha > 0 and depth > 0"));
    }
    let a = (depth * params.alpha * params.d).powf(1.0 / params.n());
    CosmoState::on_solution(0.0, a, params)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OutputGrid {
    /// n + 1 evenly spaced times from the initial time to t_end.
    Uniform { n: usize },
    /// Explicit, strictly increasing times within (t0, t_end].
    Times { times: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpochLabel {
    Inflation,
    Radiation,
}

impl std::fmt::Display for EpochLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EpochLabel::Inflation => "inflation",
            EpochLabel::Radiation => "radiation",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Epoch {
    pub label: EpochLabel,
    pub t_start: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<CosmoState>,
    pub epochs: Vec<Epoch>,
}

impl Trajectory {
    /// Label for each sample, as used by the epoch detector.
    pub fn sample_labels(&self, params: &CosmoParams, threshold: f64) -> Vec<EpochLabel> {
        self.samples.iter().map(|s| label_for(s.rho, params, threshold)).collect()
    }
}

pub const DEFAULT_EPOCH_THRESHOLD: f64 = 0.5;

fn label_for(rho: f64, params: &CosmoParams, threshold: f64) -> EpochLabel {
    if source_excess(rho, params, threshold) > 0.0 {
        EpochLabel::Inflation
    } else {
        EpochLabel::Radiation
    }
}

// ln of source / (threshold · dilution).
fn source_excess(rho: f64, params: &CosmoParams, threshold: f64) -> f64 {
    (params.alpha * rho / (threshold * (1.0 + params.omega_eos))).ln()
}

/// Integrate from `init` to `t_end`, sampling on `grid`.
pub fn integrate_universe(
    params: &CosmoParams,
    init: CosmoState,
    t_end: f64,
    grid: &OutputGrid,
    ctl: StepControl,
) -> Result<Trajectory> {
    params.validate()?;
    if !(init.a > 0.0) || !(init.rho > 0.0) {
        return Err(Error::invalid("initial state needs a > 0 and rho > 0"));
    }
    let h_expected = friedmann_H(init.rho, params)?;
    if (init.h - h_expected).abs() > 1e-8 * h_expected {
        return Err(Error::invalid(format!(
            "initial H = {:e} violates the Friedmann constraint (expected {h_expected:e})",
            init.h
        )));
    }
    if !(t_end > init.t) {
        return Err(Error::invalid("t_end must exceed the initial time"));
    }
    let times = output_times(grid, init.t, t_end)?;

    let k = constants();
    let si = params.units == UnitSystem::Si;
    let t_scale = if si { k.planck_time() } else { 1.0 };
    let rho_scale = if si { k.planck_energy_density() } else { 1.0 };
    let nat = params.to_natural();

    // State (ln a, ln ρ, ln ε) with ε = 1 − αρ/(1+ω). Near the plateau ε is
    // tiny and ln ρ cannot resolve it, so ρ is taken from ε while ε < 1/2.
    let w1 = 1.0 + nat.omega_eos;
    let alpha = nat.alpha;
    let n = 3.0 * w1;
    let density = move |y: &[f64; 3]| {
        let eps = y[2].exp();
        if eps < 0.5 {
            w1 * (1.0 - eps) / alpha
        } else {
            y[1].exp()
        }
    };
    let rhs = move |_t: f64, y: &[f64; 3]| {
        let eps = y[2].exp();
        let h = (8.0 * PI * density(y) / 3.0).sqrt();
        [h, -n * h * eps, n * h * (1.0 - eps)]
    };
    let mut solver = DormandPrince::new(rhs, ctl);
    let mut t = init.t / t_scale;
    let rho0 = init.rho / rho_scale;
    let eps0 = if alpha > 0.0 { 1.0 - alpha * rho0 / w1 } else { 1.0 };
    if !(eps0 > 0.0) {
        return Err(Error::invalid("initial density must lie below the plateau (1+ω)/α"));
    }
    let mut y = [init.a.ln(), rho0.ln(), eps0.ln()];

    let mut samples = Vec::with_capacity(times.len());
    for &target in &times {
        let target_nat = target / t_scale;
        solver.advance(&mut t, &mut y, target_nat).map_err(|e| match e {
            Error::StepUnderflow { t, h } => Error::StepUnderflow { t: t * t_scale, h: h * t_scale },
            other => other,
        })?;
        let rho = density(&y) * rho_scale;
        samples.push(CosmoState { t: target, a: y[0].exp(), rho, h: friedmann_H(rho, params)? });
    }
    let mut traj = Trajectory { samples, epochs: Vec::new() };
    traj.epochs = detect_epochs(&traj, params, DEFAULT_EPOCH_THRESHOLD);
    Ok(traj)
}

fn output_times(grid: &OutputGrid, t0: f64, t_end: f64) -> Result<Vec<f64>> {
    match grid {
        OutputGrid::Uniform { n } => {
            if *n == 0 {
                return Err(Error::invalid("uniform grid needs n >= 1"));
            }
            Ok((0..=*n).map(|i| if i == *n { t_end } else { t0 + (t_end - t0) * i as f64 / *n as f64 }).collect())
        }
        OutputGrid::Times { times } => {
            if let Some(w) = times.windows(2).find(|w| !(w[1] > w[0])) {
                return Err(Error::invalid(format!("output times must increase strictly (at {})", w[1])));
            }
            if times.iter().any(|&t| !(t >= t0) || !(t <= t_end)) {
                return Err(Error::invalid("output times must lie within [t0, t_end]"));
            }
            Ok(times.clone())
        }
    }
}

/// Split the trajectory into inflation and radiation epochs.
///
/// A sample is inflationary while 3αρ²H exceeds `threshold` times the
/// dilution term 3(1+ω)ρH. Boundaries are interpolated in ln(αρ) between
/// the bracketing samples.
pub fn detect_epochs(traj: &Trajectory, params: &CosmoParams, threshold: f64) -> Vec<Epoch> {
    let s = &traj.samples;
    let Some(first) = s.first() else {
        return Vec::new();
    };
    let mut epochs = Vec::new();
    let mut current = Epoch { label: label_for(first.rho, params, threshold), t_start: first.t, t_end: first.t };
    for w in s.windows(2) {
        let next = label_for(w[1].rho, params, threshold);
        if next != current.label {
            let g0 = source_excess(w[0].rho, params, threshold);
            let g1 = source_excess(w[1].rho, params, threshold);
            let frac = if g0.is_finite() && g1.is_finite() && g0 != g1 { g0 / (g0 - g1) } else { 0.5 };
            let t_cross = w[0].t + frac.clamp(0.0, 1.0) * (w[1].t - w[0].t);
            current.t_end = t_cross;
            epochs.push(current);
            current = Epoch { label: next, t_start: t_cross, t_end: t_cross };
        }
        current.t_end = w[1].t;
    }
    epochs.push(current);
    epochs
}

/// Scale factor where the source falls to `threshold` times dilution, from ρ(a).
pub fn transition_scale_factor(params: &CosmoParams, threshold: f64) -> Option<f64> {
    if params.alpha == 0.0 || !(threshold > 0.0 && threshold < 1.0) {
        return None;
    }
    let an = params.alpha * params.d * (1.0 - threshold) / (threshold * (1.0 + params.omega_eos));
    Some(an.powf(1.0 / params.n()))
}

/// Heat gained per unit volume through the Hubble horizon, (A/V)σT⁴ with
/// r = c/H and the horizon temperature T = ħH/(2πk_B).
pub fn heat_influx(h: f64, units: UnitSystem) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::invalid("Hubble rate must be positive"));
    }
    Ok(match units {
        UnitSystem::Natural => {
            let sigma = PhysicalConstants::stefan_boltzmann(1.0, 1.0, 1.0);
            3.0 * h * sigma * (h / (2.0 * PI)).powi(4)
        }
        UnitSystem::Si => {
            let k = constants();
            3.0 * h / k.c * k.sigma_sb * (k.hbar * h / (2.0 * PI * k.k_b)).powi(4)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatInfluxCheck {
    pub hubble_rate: f64,
    pub density: f64,
    pub heat_influx: f64,
    /// 3αρ²H at the Friedmann density for this H.
    pub source_term: f64,
    pub ratio: f64,
}

/// Compare the black-body influx with the continuity source at the same H.
pub fn heat_influx_check(h: f64, params: &CosmoParams) -> Result<HeatInfluxCheck> {
    let q = heat_influx(h, params.units)?;
    let rho = match params.units {
        UnitSystem::Natural => 3.0 * h * h / (8.0 * PI),
        UnitSystem::Si => {
            let k = constants();
            3.0 * h * h * k.c * k.c / (8.0 * PI * k.g)
        }
    };
    let source = 3.0 * params.alpha * rho * rho * h;
    Ok(HeatInfluxCheck { hubble_rate: h, density: rho, heat_influx: q, source_term: source, ratio: q / source })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepJob {
    pub params: CosmoParams,
    pub init: CosmoState,
    pub t_end: f64,
    pub grid: OutputGrid,
}

/// Independent trajectories in parallel; results keep the job order.
pub fn integrate_sweep(jobs: &[SweepJob], ctl: StepControl) -> Vec<Result<Trajectory>> {
    jobs.par_iter().map(|j| integrate_universe(&j.params, j.init, j.t_end, &j.grid, ctl)).collect()
}
