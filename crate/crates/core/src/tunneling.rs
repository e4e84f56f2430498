//! Semiclassical tunneling rates and the temperatures they imply.
//!
//! Covers the WKB transmission factor for arbitrary barriers, black-hole
//! emission as horizon tunneling, the Wheeler–DeWitt barrier for the scale
//! factor, and the universe temperature / mass relations built on it.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{integrate, integrate_smoothed, Tolerance};
use crate::quantum::C64;
use crate::units::{constants, UnitSystem};

type KFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Imaginary wavenumber magnitude k(r) under a barrier on [r_in, r_out].
#[derive(Clone)]
pub struct BarrierProfile {
    shape: Shape,
    r_in: f64,
    r_out: f64,
}

#[derive(Clone)]
enum Shape {
    Function(KFn),
    /// Piecewise-linear interpolation of (r, k) samples with increasing r.
    Table(Vec<(f64, f64)>),
}

impl std::fmt::Debug for BarrierProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match &self.shape {
            Shape::Function(_) => "function".to_string(),
            Shape::Table(t) => format!("table[{}]", t.len()),
        };
        f.debug_struct("BarrierProfile")
            .field("shape", &kind)
            .field("r_in", &self.r_in)
            .field("r_out", &self.r_out)
            .finish()
    }
}

impl BarrierProfile {
    pub fn new(k_of_r: impl Fn(f64) -> f64 + Send + Sync + 'static, r_in: f64, r_out: f64) -> Result<Self> {
        if !(r_in.is_finite() && r_out.is_finite() && r_in < r_out) {
            return Err(Error::invalid(format!("barrier needs r_in < r_out, got [{r_in}, {r_out}]")));
        }
        Ok(BarrierProfile { shape: Shape::Function(Arc::new(k_of_r)), r_in, r_out })
    }

    /// Tabulated profile; radii must be strictly increasing and k nonnegative.
    pub fn from_table(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("barrier table needs at least two points"));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::invalid(format!("barrier radii must increase strictly (at r = {})", w[1].0)));
            }
        }
        if let Some(bad) = points.iter().find(|p| !(p.1 >= 0.0) || !p.0.is_finite()) {
            return Err(Error::invalid(format!("invalid barrier sample ({}, {})", bad.0, bad.1)));
        }
        let (r_in, r_out) = (points[0].0, points[points.len() - 1].0);
        Ok(BarrierProfile { shape: Shape::Table(points), r_in, r_out })
    }

    pub fn rectangular(k0: f64, width: f64) -> Result<Self> {
        Self::new(move |_| k0, 0.0, width)
    }

    pub fn r_in(&self) -> f64 {
        self.r_in
    }

    pub fn r_out(&self) -> f64 {
        self.r_out
    }

    /// Profile with k multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let shape = match &self.shape {
            Shape::Function(f) => {
                let f = Arc::clone(f);
                Shape::Function(Arc::new(move |r| lambda * f(r)))
            }
            Shape::Table(t) => Shape::Table(t.iter().map(|&(r, k)| (r, lambda * k)).collect()),
        };
        BarrierProfile { shape, ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TunnelingResult {
    pub gamma: f64,
    /// Dimensionless action; gamma = exp(−exponent).
    pub exponent: f64,
    /// Temperature at which a Boltzmann factor reproduces gamma, K.
    pub effective_temperature: Option<f64>,
    pub quadrature_error_estimate: f64,
}

impl TunnelingResult {
    fn from_exponent(exponent: f64, error: f64) -> Self {
        TunnelingResult {
            gamma: (-exponent).exp(),
            exponent,
            effective_temperature: None,
            quadrature_error_estimate: error,
        }
    }

    /// Attach T from exp(−E/k_B T) = gamma for an emitted energy E in joules.
    pub fn with_emitted_energy(mut self, energy_joules: f64) -> Self {
        self.effective_temperature = Some(energy_joules / (constants().k_b * self.exponent));
        self
    }
}

/// Γ = exp(−2∫ k dr) over the barrier.
pub fn wkb_rate(profile: &BarrierProfile) -> Result<TunnelingResult> {
    let tol = Tolerance { abs: 1e-12, rel: 1e-10, max_intervals: 4000 };
    let (integral, error) = match &profile.shape {
        Shape::Function(k) => {
            let q = integrate_smoothed(|r| k(r), profile.r_in, profile.r_out, tol)?;
            (q.value, q.error)
        }
        // Linear segments: each panel is integrated exactly.
        Shape::Table(points) => points.windows(2).try_fold((0.0, 0.0), |(v, e), w| {
            let (r0, k0) = w[0];
            let (r1, k1) = w[1];
            let q = integrate(|r| k0 + (k1 - k0) * (r - r0) / (r1 - r0), r0, r1, tol)?;
            Ok::<_, Error>((v + q.value, e + q.error))
        })?,
    };
    let exponent = 2.0 * integral;
    if exponent < -2.0 * error - 1e-300 {
        return Err(Error::invalid(format!("barrier integral is negative ({integral:e}); k must be nonnegative")));
    }
    Ok(TunnelingResult::from_exponent(exponent.max(0.0), 2.0 * error))
}

/// 8πω(M − ω/2) in natural units.
pub fn parikh_wilczek_exponent(mass: f64, omega: f64) -> Result<f64> {
    if !(mass > 0.0) {
        return Err(Error::invalid("black-hole mass must be positive"));
    }
    if !(omega > 0.0) {
        return Err(Error::invalid("emitted energy must be positive"));
    }
    if omega >= mass {
        return Err(Error::invalid(format!("cannot emit omega = {omega} from mass {mass}")));
    }
    Ok(8.0 * PI * omega * (mass - 0.5 * omega))
}

/// The ω² non-thermal part: exponent(M, ω) − 8πωM = −4πω².
pub fn thermality_correction(mass: f64, omega: f64) -> Result<f64> {
    Ok(parikh_wilczek_exponent(mass, omega)? - 8.0 * PI * omega * mass)
}

pub fn blackhole_rate(mass: f64, omega: f64) -> Result<TunnelingResult> {
    let exponent = parikh_wilczek_exponent(mass, omega)?;
    let mut r = TunnelingResult::from_exponent(exponent, 0.0);
    // Natural units: T = ω / exponent, reported in kelvin.
    r.effective_temperature = Some(omega / exponent * constants().planck_temperature());
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourEstimate {
    /// Richardson-extrapolated exponent.
    pub exponent: f64,
    /// Estimates at depths ε, ε/2, ε/4.
    pub by_depth: [f64; 3],
    pub depth: f64,
}

/// Numerical −2 Im ∫₀^ω dω′ ∫_{2M}^{2(M−ω)} dr / (1 − √(2(M−ω′)/r)).
///
/// The radial path is displaced to r − iε between vertical legs at the
/// endpoints, so it passes below the horizon pole; the ε → 0 limit is taken
/// by Richardson extrapolation over ε, ε/2, ε/4.
pub fn parikh_wilczek_contour(mass: f64, omega: f64, depth: f64) -> Result<ContourEstimate> {
    parikh_wilczek_exponent(mass, omega)?;
    if !(depth > 0.0) {
        return Err(Error::invalid("contour depth must be positive"));
    }
    let r_in = 2.0 * mass;
    let r_out = 2.0 * (mass - omega);
    let estimate = |eps: f64| -> Result<f64> {
        let corners = [C64::new(r_in, 0.0), C64::new(r_in, -eps), C64::new(r_out, -eps), C64::new(r_out, 0.0)];
        let inner_tol = Tolerance { abs: 1e-13, rel: 1e-11, max_intervals: 20_000 };
        let outer_tol = Tolerance { abs: 1e-12, rel: 1e-10, max_intervals: 2000 };
        let mut failure = None;
        let outer = integrate(
            |w| {
                let rs = 2.0 * (mass - w);
                let integrand = |z: C64| C64::new(1.0, 0.0) / (C64::new(1.0, 0.0) - (C64::new(rs, 0.0) / z).sqrt());
                let mut im = 0.0;
                for leg in corners.windows(2) {
                    let (z0, dz) = (leg[0], leg[1] - leg[0]);
                    match integrate(|s| (integrand(z0 + dz * s) * dz).im, 0.0, 1.0, inner_tol) {
                        Ok(q) => im += q.value,
                        Err(e) => {
                            failure.get_or_insert(e);
                            return f64::NAN;
                        }
                    }
                }
                im
            },
            0.0,
            omega,
            outer_tol,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(-2.0 * outer?.value)
    };
    let by_depth = [estimate(depth)?, estimate(depth / 2.0)?, estimate(depth / 4.0)?];
    let r1 = 2.0 * by_depth[1] - by_depth[0];
    let r2 = 2.0 * by_depth[2] - by_depth[1];
    Ok(ContourEstimate { exponent: (4.0 * r2 - r1) / 3.0, by_depth, depth })
}

/// ħc³/(8πG k_B M) in kelvin for M in kilograms.
pub fn hawking_temperature(mass_kg: f64) -> Result<f64> {
    if !(mass_kg > 0.0) {
        return Err(Error::invalid("mass must be positive"));
    }
    let k = constants();
    Ok(k.hbar * k.c.powi(3) / (8.0 * PI * k.g * k.k_b * mass_kg))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WheelerDeWittResult {
    pub integral_quadrature: f64,
    pub integral_analytic: f64,
    pub exponent: f64,
    pub probability: f64,
}

/// p = exp{−(3π/2G) ∫₀^{a₀} a √(1 − a²/a₀²) da} in natural units (c = 1).
pub fn wdw_tunneling_probability(a0: f64, g: f64) -> Result<WheelerDeWittResult> {
    if !(a0 > 0.0) || !(g > 0.0) {
        return Err(Error::invalid("a0 and G must be positive"));
    }
    let tol = Tolerance { abs: 1e-14 * a0 * a0, rel: 1e-13, max_intervals: 2000 };
    let q = integrate_smoothed(|a| a * (1.0 - (a / a0).powi(2)).max(0.0).sqrt(), 0.0, a0, tol)?;
    let exponent = 3.0 * PI / (2.0 * g) * q.value;
    Ok(WheelerDeWittResult {
        integral_quadrature: q.value,
        integral_analytic: a0 * a0 / 3.0,
        exponent,
        probability: (-exponent).exp(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UniverseVariant {
    /// c⁵/(ħG²H), as printed; reads 1/H in natural units.
    PaperLiteral,
    /// c⁵/(ħGH²), the dimensionless combination of ħ, c, G and H.
    DimensionallyConsistent,
}

impl UniverseVariant {
    pub const ALL: [UniverseVariant; 2] = [UniverseVariant::PaperLiteral, UniverseVariant::DimensionallyConsistent];

    /// Exponents of (c, ħ, G, H) in the tunneling exponent.
    fn powers(self) -> [i32; 4] {
        match self {
            UniverseVariant::PaperLiteral => [5, -1, -2, -1],
            UniverseVariant::DimensionallyConsistent => [5, -1, -1, -2],
        }
    }

    /// (mass, length, time) dimension of the SI exponent.
    pub fn si_dimension(self) -> [i32; 3] {
        const C: [i32; 3] = [0, 1, -1];
        const HBAR: [i32; 3] = [1, 2, -1];
        const G: [i32; 3] = [-1, 3, -2];
        const H: [i32; 3] = [0, 0, -1];
        let p = self.powers();
        let mut out = [0; 3];
        for (base, power) in [C, HBAR, G, H].iter().zip(p) {
            for i in 0..3 {
                out[i] += base[i] * power;
            }
        }
        out
    }

    pub fn is_dimensionless(self) -> bool {
        self.si_dimension() == [0, 0, 0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniverseTunneling {
    pub variant: UniverseVariant,
    pub exponent: f64,
    /// False when the SI exponent carries units (only returned under override).
    pub dimensionless: bool,
}

/// Tunneling exponent for the observable universe at Hubble rate `h`.
///
/// `h` is in 1/s for SI and in inverse Planck times for natural units. In SI a
/// dimensionful exponent is refused unless `allow_dimensionful` is set.
pub fn universe_tunneling_probability(
    h: f64,
    variant: UniverseVariant,
    units: UnitSystem,
    allow_dimensionful: bool,
) -> Result<UniverseTunneling> {
    if !(h > 0.0) {
        return Err(Error::invalid("Hubble rate must be positive"));
    }
    let (c, hbar, g) = match units {
        UnitSystem::Natural => (1.0, 1.0, 1.0),
        UnitSystem::Si => {
            let k = constants();
            (k.c, k.hbar, k.g)
        }
    };
    let dimensionless = units == UnitSystem::Natural || variant.is_dimensionless();
    if !dimensionless && !allow_dimensionful {
        return Err(Error::invalid(format!(
            "{variant:?} exponent has SI dimension {:?} (kg, m, s); pass the unit override to evaluate it",
            variant.si_dimension()
        )));
    }
    let [pc, ph, pg, phub] = variant.powers();
    // Accumulate in logs: the SI magnitudes span hundreds of decades.
    let log = pc as f64 * c.ln() + ph as f64 * hbar.ln() + pg as f64 * g.ln() + phub as f64 * h.ln();
    Ok(UniverseTunneling { variant, exponent: log.exp(), dimensionless })
}

/// T_u = ħH/(4πk_B).
pub fn universe_temperature(h: f64, units: UnitSystem) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::invalid("Hubble rate must be positive"));
    }
    Ok(match units {
        UnitSystem::Natural => h / (4.0 * PI),
        UnitSystem::Si => {
            let k = constants();
            k.hbar * h / (4.0 * PI * k.k_b)
        }
    })
}

/// M_u = c³/(4GH).
pub fn universe_mass(h: f64, units: UnitSystem) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::invalid("Hubble rate must be positive"));
    }
    Ok(match units {
        UnitSystem::Natural => 1.0 / (4.0 * h),
        UnitSystem::Si => {
            let k = constants();
            k.c.powi(3) / (4.0 * k.g * h)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainEntry {
    pub variant: UniverseVariant,
    pub exponent: f64,
    pub dimensionless: bool,
    /// T solving M_u c² / (k_B T) = exponent.
    pub implied_temperature: f64,
    pub ratio_to_stated: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub hubble_rate: f64,
    pub units: UnitSystem,
    pub universe_mass: f64,
    pub stated_temperature: f64,
    pub entries: Vec<ChainEntry>,
}

/// Universe temperature from the stated formula and from the Gibbs form of
/// each tunneling-exponent variant, side by side.
pub fn chain_consistency_report(h: f64, units: UnitSystem) -> Result<ChainReport> {
    let stated = universe_temperature(h, units)?;
    let mass = universe_mass(h, units)?;
    let (c2, kb) = match units {
        UnitSystem::Natural => (1.0, 1.0),
        UnitSystem::Si => {
            let k = constants();
            (k.c * k.c, k.k_b)
        }
    };
    let entries = UniverseVariant::ALL
        .iter()
        .map(|&variant| {
            let t = universe_tunneling_probability(h, variant, units, true)?;
            let implied = mass * c2 / (kb * t.exponent);
            Ok(ChainEntry {
                variant,
                exponent: t.exponent,
                dimensionless: t.dimensionless,
                implied_temperature: implied,
                ratio_to_stated: implied / stated,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ChainReport { hubble_rate: h, units, universe_mass: mass, stated_temperature: stated, entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlackHoleSweepRow {
    pub mass: f64,
    pub omega: f64,
    pub exponent: f64,
    pub gamma: f64,
    pub thermality_correction: f64,
}

/// Rates over a (mass, ω) grid in natural units; rows ordered mass-major.
pub fn blackhole_sweep(masses: &[f64], omegas: &[f64]) -> Result<Vec<BlackHoleSweepRow>> {
    let grid: Vec<(f64, f64)> = masses.iter().flat_map(|&m| omegas.iter().map(move |&w| (m, w))).collect();
    grid.par_iter()
        .map(|&(mass, omega)| {
            let exponent = parikh_wilczek_exponent(mass, omega)?;
            Ok(BlackHoleSweepRow {
                mass,
                omega,
                exponent,
                gamma: (-exponent).exp(),
                thermality_correction: thermality_correction(mass, omega)?,
            })
        })
        .collect()
}
