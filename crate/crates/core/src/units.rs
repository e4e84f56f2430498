//! Physical constants (CODATA 2018) and conversions between SI and Planck units.
//!
//! Natural units here means ħ = c = k_B = G = 1. Every dimensioned quantity
//! converts by dividing by the matching Planck scale.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light in vacuum, m/s.
pub const C: f64 = 299_792_458.0;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Newtonian constant of gravitation, m³/(kg·s²).
pub const G: f64 = 6.674_30e-11;
/// Solar mass, kg.
pub const SOLAR_MASS: f64 = 1.989e30;

/// Frozen constant set with the Stefan–Boltzmann constant derived from the others.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub c: f64,
    pub k_b: f64,
    pub g: f64,
    pub sigma_sb: f64,
}

impl PhysicalConstants {
    /// Stefan–Boltzmann constant π²k_B⁴/(60ħ³c²) for arbitrary constant values.
    pub fn stefan_boltzmann(hbar: f64, c: f64, k_b: f64) -> f64 {
        PI * PI * k_b.powi(4) / (60.0 * hbar.powi(3) * c * c)
    }

    /// Planck mass √(ħc/G), kg.
    pub fn planck_mass(&self) -> f64 {
        (self.hbar * self.c / self.g).sqrt()
    }

    /// Planck length √(ħG/c³), m.
    pub fn planck_length(&self) -> f64 {
        (self.hbar * self.g / self.c.powi(3)).sqrt()
    }

    /// Planck time √(ħG/c⁵), s.
    pub fn planck_time(&self) -> f64 {
        (self.hbar * self.g / self.c.powi(5)).sqrt()
    }

    /// Planck temperature m_P c²/k_B, K.
    pub fn planck_temperature(&self) -> f64 {
        self.planck_energy() / self.k_b
    }

    /// Planck energy m_P c², J.
    pub fn planck_energy(&self) -> f64 {
        self.planck_mass() * self.c * self.c
    }

    /// Planck energy density E_P / l_P³ = c⁷/(ħG²), J/m³.
    pub fn planck_energy_density(&self) -> f64 {
        self.planck_energy() / self.planck_length().powi(3)
    }
}

/// CODATA 2018 reference values.
pub fn constants() -> PhysicalConstants {
    PhysicalConstants { hbar: HBAR, c: C, k_b: K_B, g: G, sigma_sb: PhysicalConstants::stefan_boltzmann(HBAR, C, K_B) }
}

/// Dimension tags understood by [`convert`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    Mass,
    Length,
    Time,
    Temperature,
    Energy,
    /// Energy density (J/m³ in SI).
    Density,
}

impl Dimension {
    pub const ALL: [Dimension; 6] = [
        Dimension::Mass,
        Dimension::Length,
        Dimension::Time,
        Dimension::Temperature,
        Dimension::Energy,
        Dimension::Density,
    ];

    /// Size of one natural unit of this dimension, expressed in SI.
    pub fn planck_scale(self, k: &PhysicalConstants) -> f64 {
        match self {
            Dimension::Mass => k.planck_mass(),
            Dimension::Length => k.planck_length(),
            Dimension::Time => k.planck_time(),
            Dimension::Temperature => k.planck_temperature(),
            Dimension::Energy => k.planck_energy(),
            Dimension::Density => k.planck_energy_density(),
        }
    }
}

impl FromStr for Dimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mass" => Ok(Dimension::Mass),
            "length" => Ok(Dimension::Length),
            "time" => Ok(Dimension::Time),
            "temperature" => Ok(Dimension::Temperature),
            "energy" => Ok(Dimension::Energy),
            "density" => Ok(Dimension::Density),
            other => Err(Error::invalid(format!("unknown dimension tag `{other}`"))),
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Dimension::Mass => "mass",
            Dimension::Length => "length",
            Dimension::Time => "time",
            Dimension::Temperature => "temperature",
            Dimension::Energy => "energy",
            Dimension::Density => "density",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitSystem {
    #[default]
    Si,
    Natural,
}

impl FromStr for UnitSystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "si" => Ok(UnitSystem::Si),
            "natural" | "planck" => Ok(UnitSystem::Natural),
            other => Err(Error::invalid(format!("unknown unit system `{other}`"))),
        }
    }
}

/// Rescale `value` of the given dimension from one unit system to another.
pub fn convert(value: f64, dim: Dimension, from: UnitSystem, to: UnitSystem) -> f64 {
    convert_with(&constants(), value, dim, from, to)
}

pub fn convert_with(k: &PhysicalConstants, value: f64, dim: Dimension, from: UnitSystem, to: UnitSystem) -> f64 {
    match (from, to) {
        (UnitSystem::Si, UnitSystem::Si) | (UnitSystem::Natural, UnitSystem::Natural) => value,
        (UnitSystem::Natural, UnitSystem::Si) => value * dim.planck_scale(k),
        (UnitSystem::Si, UnitSystem::Natural) => value / dim.planck_scale(k),
    }
}

/// String-tagged variant of [`convert`]; rejects unknown tags.
pub fn convert_tagged(value: f64, tag: &str, from: UnitSystem, to: UnitSystem) -> Result<f64> {
    Ok(convert(value, tag.parse()?, from, to))
}
