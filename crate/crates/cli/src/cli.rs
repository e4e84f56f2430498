use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use emergent_core::units::UnitSystem;

#[derive(Debug, Parser)]
#[command(
    name = "emergent",
    version,
    about = "Relational time, emergent temperature, tunneling and entanglement witnesses"
)]
pub struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "EMERGENT_OUT_DIR", default_value = "out")]
    pub out: PathBuf,

    /// Seed for randomized computations.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Units::Si)]
    pub units: Units,

    /// Unit for reported entropies.
    #[arg(long, global = true, value_enum, default_value_t = EntropyUnit::Nats)]
    pub entropy_unit: EntropyUnit,

    /// Run the built-in checks for the chosen subcommand (all when none given).
    #[arg(long, global = true)]
    pub selftest: bool,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Units {
    Si,
    Natural,
}

impl From<Units> for UnitSystem {
    fn from(u: Units) -> Self {
        match u {
            Units::Si => UnitSystem::Si,
            Units::Natural => UnitSystem::Natural,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EntropyUnit {
    Nats,
    Bits,
}

impl EntropyUnit {
    pub fn scale(self) -> f64 {
        match self {
            EntropyUnit::Nats => 1.0,
            EntropyUnit::Bits => 1.0 / std::f64::consts::LN_2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EntropyUnit::Nats => "nats",
            EntropyUnit::Bits => "bits",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// History state on a cyclic clock versus direct evolution.
    Clock(ClockArgs),
    /// Emergent Gibbs populations from a zero-energy system+bath state.
    Thermal(ThermalArgs),
    /// Tunneling rates: black hole, universe, or a tabulated barrier.
    Tunnel(TunnelArgs),
    /// Friedmann integration with the heat-influx source.
    Cosmo(CosmoArgs),
    /// Entropy witness over a temperature grid.
    Witness(WitnessArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Clock(_) => "clock",
            Command::Thermal(_) => "thermal",
            Command::Tunnel(_) => "tunnel",
            Command::Cosmo(_) => "cosmo",
            Command::Witness(_) => "witness",
        }
    }
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ClockArgs {
    /// Clock dimension.
    #[arg(long, default_value_t = 16)]
    pub d: usize,
    /// JSON file with "hamiltonian" rows and "psi0", entries as [re, im].
    #[arg(long)]
    pub system: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BathKind {
    Spin,
    Exponential,
    Table,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ThermalArgs {
    #[arg(long, value_enum, default_value_t = BathKind::Spin)]
    pub bath: BathKind,
    /// Spins in a spin bath.
    #[arg(long, default_value_t = 16)]
    pub spins: u32,
    #[arg(long, default_value_t = 1.0)]
    pub spacing: f64,
    /// Excited-spin count taken as bath energy zero (default spins/4).
    #[arg(long)]
    pub reference: Option<u32>,
    /// Inverse temperature of an exponential bath.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Level count of an exponential bath.
    #[arg(long, default_value_t = 16)]
    pub levels: u32,
    /// JSON bath description for --bath table.
    #[arg(long)]
    pub bath_file: Option<PathBuf>,
    /// System energy levels.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2", allow_hyphen_values = true)]
    pub system_levels: Vec<f64>,
    /// Spin-bath sizes for a convergence sweep.
    #[arg(long, value_delimiter = ',')]
    pub sweep: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Blackhole,
    Universe,
    CustomBarrier,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct TunnelArgs {
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Black-hole mass in solar masses.
    #[arg(long, conflicts_with = "mass_kg")]
    pub mass_solar: Option<f64>,
    #[arg(long)]
    pub mass_kg: Option<f64>,
    /// Emitted energies as fractions of the mass.
    #[arg(long, value_delimiter = ',', default_value = "0.001,0.01,0.05,0.1")]
    pub omega_fractions: Vec<f64>,
    /// Also evaluate the contour-integral oracle for each emission.
    #[arg(long)]
    pub oracle: bool,
    /// Hubble rate (1/s, or inverse Planck times with --units natural).
    #[arg(long, default_value_t = 2.2e-18)]
    pub hubble: f64,
    /// Hubble rates for the universe sweep.
    #[arg(long, value_delimiter = ',')]
    pub hubble_grid: Vec<f64>,
    /// Evaluate exponents that carry SI units.
    #[arg(long)]
    pub allow_dimensionful: bool,
    /// JSON barrier table {"points": [[r, k], ...]}.
    #[arg(long)]
    pub barrier: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct CosmoArgs {
    /// JSON run configuration; a deep-inflation run when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct WitnessArgs {
    #[command(subcommand)]
    pub preset: Option<WitnessPreset>,
    /// JSON with "factors", "hamiltonian" and "bipartition".
    #[arg(long)]
    pub system: Option<PathBuf>,
    /// Temperatures (k_B = 1); overrides the config grid.
    #[arg(long, value_delimiter = ',')]
    pub temps: Vec<f64>,
    /// Bound the ground-state entanglement by brute-force optimization (two qubits).
    #[arg(long)]
    pub ree: bool,
    #[arg(long, default_value_t = 8)]
    pub ree_restarts: usize,
    #[arg(long, default_value_t = 1500)]
    pub ree_iterations: usize,
}

#[derive(Debug, Subcommand)]
pub enum WitnessPreset {
    /// Frequency bound from CMB temperature fluctuations.
    Cmb(CmbArgs),
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct CmbArgs {
    /// Temperature in kelvin.
    #[arg(long = "T", default_value_t = 3.0)]
    pub t: f64,
    /// Relative fluctuation ΔT/T.
    #[arg(long = "dTrel", default_value_t = 1e-5)]
    pub dt_rel: f64,
    /// Entropy scaling exponent.
    #[arg(long = "p", default_value_t = 1.0)]
    pub p: f64,
}
