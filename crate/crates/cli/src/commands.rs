use std::path::PathBuf;

use emergent_core::clock::{self, SystemSpec};
use emergent_core::cosmo::{self, CosmoParams, CosmoState};
use emergent_core::numerics::StepControl;
use emergent_core::thermal::{self, BathModel};
use emergent_core::tunneling::{self, BarrierProfile, UniverseVariant};
use emergent_core::units::{constants, UnitSystem, SOLAR_MASS};
use emergent_core::witness::{self, ReeBudget, ThermalSystem};
use serde_json::json;

use crate::cli::{BathKind, ClockArgs, CmbArgs, CosmoArgs, EntropyUnit, Preset, ThermalArgs, TunnelArgs, WitnessArgs};
use crate::config::{self, BarrierTable, CosmoConfig, WitnessConfig};
use crate::error::CliError;
use crate::output::{float, json_document, Csv, OutputDir};

pub struct Context {
    pub out: PathBuf,
    pub seed: u64,
    pub units: UnitSystem,
    pub entropy: EntropyUnit,
}

impl Context {
    fn output(&self) -> Result<OutputDir, CliError> {
        OutputDir::create(&self.out)
    }
}

pub fn clock(args: &ClockArgs, ctx: &Context) -> Result<(), CliError> {
    let path = args.system.as_ref().ok_or_else(|| CliError::input("clock needs --system <file>"))?;
    let spec: SystemSpec = config::load(path)?;
    let h = spec.hamiltonian_matrix()?;
    let report = clock::analyze(&h, &spec.initial_state(), args.d)?;

    let mut csv = Csv::new(&["tick", "fidelity", "residual"]);
    for t in &report.ticks {
        csv.row(vec![t.tick.into(), t.fidelity.into(), t.residual.into()]);
    }
    let summary = json!({
        "clock_dim": report.clock_dim,
        "system_dim": report.system_dim,
        "total_residual": report.total_residual,
        "min_fidelity": report.min_fidelity,
        "max_fidelity_deficit": 1.0 - report.min_fidelity,
    });
    let out = ctx.output()?;
    out.write("clock_ticks.csv", &csv.into_string())?;
    out.write("clock_report.json", &json_document("clock", summary)?)?;
    println!(
        "clock: d = {}, min fidelity = {}, total residual = {}",
        report.clock_dim,
        float(report.min_fidelity),
        float(report.total_residual)
    );
    Ok(())
}

pub fn thermal(args: &ThermalArgs, ctx: &Context) -> Result<(), CliError> {
    let bath = match args.bath {
        BathKind::Spin => BathModel::SpinBath { spins: args.spins, spacing: args.spacing, reference: args.reference },
        BathKind::Exponential => BathModel::exponential(args.beta, args.levels)?,
        BathKind::Table => {
            let path = args.bath_file.as_ref().ok_or_else(|| CliError::input("--bath table needs --bath-file"))?;
            config::load(path)?
        }
    };
    let levels = &args.system_levels;
    let report = thermal::emergent_report(levels, &bath)?;
    let fitted = thermal::gibbs_weights(levels, report.beta_fit);

    let mut csv = Csv::new(&["E_n", "p_n", "gibbs_fit"]);
    for (&(e, p), g) in report.populations.iter().zip(&fitted) {
        csv.row(vec![e.into(), p.into(), (*g).into()]);
    }
    let scale = ctx.entropy.scale();
    let mut doc = json!({
        "bath": bath,
        "system_levels": levels,
        "beta_fit": report.beta_fit,
        "beta_theory": report.beta_theory,
        "relative_beta_error": report.relative_beta_error(),
        "max_gibbs_deviation": report.max_gibbs_deviation,
        "entanglement_entropy": report.entanglement_entropy * scale,
        "entropy_unit": ctx.entropy.name(),
    });

    let out = ctx.output()?;
    if !args.sweep.is_empty() {
        let rows = thermal::spin_bath_sweep(&args.sweep, args.spacing, levels)?;
        let mut sweep = Csv::new(&["spins", "beta_fit", "beta_theory", "relative_error", "max_gibbs_deviation"]);
        for (&n, r) in args.sweep.iter().zip(&rows) {
            sweep.row(vec![
                n.into(),
                r.beta_fit.into(),
                r.beta_theory.into(),
                r.relative_beta_error().into(),
                r.max_gibbs_deviation.into(),
            ]);
        }
        doc["sweep_spins"] = json!(args.sweep);
        out.write("thermal_sweep.csv", &sweep.into_string())?;
    }
    out.write("thermal_populations.csv", &csv.into_string())?;
    out.write("thermal_report.json", &json_document("thermal", doc)?)?;
    println!("thermal: beta_fit = {}, beta_theory = {}", float(report.beta_fit), float(report.beta_theory));
    Ok(())
}

pub fn tunnel(args: &TunnelArgs, ctx: &Context) -> Result<(), CliError> {
    match args.preset {
        Some(Preset::Blackhole) => blackhole(args, ctx),
        Some(Preset::Universe) => universe(args, ctx),
        Some(Preset::CustomBarrier) => custom_barrier(args, ctx),
        None => Err(CliError::input("tunnel needs --preset {blackhole, universe, custom-barrier}")),
    }
}

fn blackhole(args: &TunnelArgs, ctx: &Context) -> Result<(), CliError> {
    let k = constants();
    let mass_kg = match (args.mass_solar, args.mass_kg) {
        (Some(m), _) => m * SOLAR_MASS,
        (None, Some(m)) => m,
        (None, None) => SOLAR_MASS,
    };
    let t_hawking = tunneling::hawking_temperature(mass_kg)?;
    let m = mass_kg / k.planck_mass();

    let mut csv = Csv::new(&[
        "omega_fraction",
        "omega",
        "exponent",
        "gamma",
        "thermality_correction",
        "effective_temperature_K",
        "unit_mass_exponent",
        "oracle_unit_mass_exponent",
    ]);
    let mut emissions = Vec::new();
    for &f in &args.omega_fractions {
        let rate = tunneling::blackhole_rate(m, f * m)?;
        let correction = tunneling::thermality_correction(m, f * m)?;
        // The exponent scales as M², so the oracle runs at unit mass.
        let unit = tunneling::parikh_wilczek_exponent(1.0, f)?;
        let oracle = if args.oracle { Some(tunneling::parikh_wilczek_contour(1.0, f, f)?) } else { None };
        csv.row(vec![
            f.into(),
            (f * m).into(),
            rate.exponent.into(),
            rate.gamma.into(),
            correction.into(),
            rate.effective_temperature.unwrap_or(f64::NAN).into(),
            unit.into(),
            oracle.map_or(f64::NAN, |o| o.exponent).into(),
        ]);
        emissions.push(json!({
            "omega_fraction": f,
            "omega": f * m,
            "result": rate,
            "thermality_correction": correction,
            "unit_mass_exponent": unit,
            "oracle": oracle,
        }));
    }
    let doc = json!({
        "preset": "blackhole",
        "mass_kg": mass_kg,
        "mass_planck": m,
        "hawking_temperature_K": t_hawking,
        "emissions": emissions,
    });
    let out = ctx.output()?;
    out.write("tunnel_blackhole_sweep.csv", &csv.into_string())?;
    out.write("tunnel_blackhole.json", &json_document("tunnel", doc)?)?;
    println!("tunnel: hawking temperature = {} K", float(t_hawking));
    Ok(())
}

fn universe(args: &TunnelArgs, ctx: &Context) -> Result<(), CliError> {
    let units = ctx.units;
    let h = args.hubble;
    let variants: Vec<serde_json::Value> = UniverseVariant::ALL
        .iter()
        .map(|&v| match tunneling::universe_tunneling_probability(h, v, units, args.allow_dimensionful) {
            Ok(r) => json!(r),
            Err(e) => json!({ "variant": v, "refused": e.to_string() }),
        })
        .collect();
    let chain = tunneling::chain_consistency_report(h, units)?;
    let temperature = tunneling::universe_temperature(h, units)?;
    let doc = json!({
        "preset": "universe",
        "units": units,
        "hubble_rate": h,
        "universe_temperature": temperature,
        "universe_mass": tunneling::universe_mass(h, units)?,
        "variants": variants,
        "chain": chain,
    });

    let grid = if args.hubble_grid.is_empty() { vec![h] } else { args.hubble_grid.clone() };
    let mut csv = Csv::new(&["H", "variant", "exponent", "dimensionless", "implied_temperature", "ratio_to_stated"]);
    for &hh in &grid {
        for e in tunneling::chain_consistency_report(hh, units)?.entries {
            let name = match e.variant {
                UniverseVariant::PaperLiteral => "paper_literal",
                UniverseVariant::DimensionallyConsistent => "dimensionally_consistent",
            };
            csv.row(vec![
                hh.into(),
                name.into(),
                e.exponent.into(),
                e.dimensionless.to_string().into(),
                e.implied_temperature.into(),
                e.ratio_to_stated.into(),
            ]);
        }
    }
    let out = ctx.output()?;
    out.write("tunnel_universe_sweep.csv", &csv.into_string())?;
    out.write("tunnel_universe.json", &json_document("tunnel", doc)?)?;
    println!(
        "tunnel: universe temperature = {}, mass = {}",
        float(temperature),
        float(tunneling::universe_mass(h, units)?)
    );
    Ok(())
}

fn custom_barrier(args: &TunnelArgs, ctx: &Context) -> Result<(), CliError> {
    let path = args.barrier.as_ref().ok_or_else(|| CliError::input("custom-barrier needs --barrier <file>"))?;
    let table: BarrierTable = config::load(path)?;
    let points: Vec<(f64, f64)> = table.points.iter().map(|p| (p[0], p[1])).collect();
    let profile = BarrierProfile::from_table(points.clone())?;
    let mut result = tunneling::wkb_rate(&profile)?;
    if let Some(e) = table.energy_joules {
        result = result.with_emitted_energy(e);
    }

    // Running exponent 2∫k dr, exact for the piecewise-linear table.
    let mut csv = Csv::new(&["r", "k", "cumulative_exponent"]);
    let mut acc = 0.0;
    for (i, &(r, k)) in points.iter().enumerate() {
        if i > 0 {
            let (r0, k0) = points[i - 1];
            acc += (r - r0) * (k + k0);
        }
        csv.row(vec![r.into(), k.into(), acc.into()]);
    }
    let doc = json!({ "preset": "custom-barrier", "result": result });
    let out = ctx.output()?;
    out.write("tunnel_barrier_profile.csv", &csv.into_string())?;
    out.write("tunnel_barrier.json", &json_document("tunnel", doc)?)?;
    println!("tunnel: gamma = {}, exponent = {}", float(result.gamma), float(result.exponent));
    Ok(())
}

pub fn cosmo(args: &CosmoArgs, ctx: &Context) -> Result<(), CliError> {
    let cfg = match &args.config {
        Some(p) => config::load::<CosmoConfig>(p)?,
        None => CosmoConfig::default_run(),
    };
    let units = cfg.units.unwrap_or(ctx.units);
    let alpha = cfg.alpha(units)?;
    let params = CosmoParams::from_initial(cfg.omega_eos, alpha, cfg.a0, cfg.rho0, units)?;
    let init = CosmoState::on_solution(0.0, cfg.a0, &params)?;
    let traj = cosmo::integrate_universe(&params, init, cfg.t_end, &cfg.grid, StepControl::default())?;
    let epochs = cosmo::detect_epochs(&traj, &params, cfg.threshold);
    let labels = traj.sample_labels(&params, cfg.threshold);

    let mut csv = Csv::new(&["t", "a", "rho", "H", "epoch"]);
    let mut max_dev: f64 = 0.0;
    for (s, l) in traj.samples.iter().zip(&labels) {
        csv.row(vec![s.t.into(), s.a.into(), s.rho.into(), s.h.into(), l.to_string().into()]);
        let closed = cosmo::closed_form_density(s.a, &params)?;
        max_dev = max_dev.max(((s.rho - closed) / closed).abs());
    }
    let plateau = params.plateau_density();
    let plateau_h = plateau.map(|r| cosmo::friedmann_H(r, &params)).transpose()?;
    let e_folds = traj.samples.last().map(|s| (s.a / cfg.a0).ln());
    let doc = json!({
        "params": params,
        "threshold": cfg.threshold,
        "epochs": epochs,
        "plateau_density": plateau,
        "plateau_hubble_rate": plateau_h,
        "transition_scale_factor": cosmo::transition_scale_factor(&params, cfg.threshold),
        "heat_influx_check": cosmo::heat_influx_check(init.h, &params)?,
        "samples": traj.samples.len(),
        "e_folds": e_folds,
        "max_closed_form_deviation": max_dev,
    });
    let out = ctx.output()?;
    out.write("cosmo_trajectory.csv", &csv.into_string())?;
    out.write("cosmo_epochs.json", &json_document("cosmo", doc)?)?;
    println!(
        "cosmo: {} samples, {} epochs, max closed-form deviation = {}",
        traj.samples.len(),
        epochs.len(),
        float(max_dev)
    );
    Ok(())
}

pub fn witness(args: &WitnessArgs, ctx: &Context) -> Result<(), CliError> {
    if let Some(crate::cli::WitnessPreset::Cmb(c)) = &args.preset {
        return cmb(c, ctx);
    }
    let path =
        args.system.as_ref().ok_or_else(|| CliError::input("witness needs --system <file> (or the cmb preset)"))?;
    let cfg: WitnessConfig = config::load(path)?;
    let h = clock::matrix_from_rows(&cfg.hamiltonian)?;
    let sys = ThermalSystem::new(h, cfg.factors.clone(), cfg.bipartition.clone())?;
    let temps = if !args.temps.is_empty() {
        args.temps.clone()
    } else if !cfg.temperatures.is_empty() {
        cfg.temperatures.clone()
    } else {
        let w = sys.spectral_width().max(f64::MIN_POSITIVE);
        (0..=24).map(|i| w * 10f64.powf(-2.0 + 4.0 * i as f64 / 24.0)).collect()
    };
    let rows = witness::witness_scan(&sys, &temps)?;
    let critical = witness::critical_temperature(&sys)?;
    let scale = ctx.entropy.scale();

    let mut csv = Csv::new(&["T", "S_thermal", "C", "verdict", "margin"]);
    for r in &rows {
        csv.row(vec![
            r.report.temperature.into(),
            (r.report.s_thermal * scale).into(),
            r.heat_capacity.into(),
            r.report.verdict.to_string().into(),
            (r.report.margin * scale).into(),
        ]);
    }
    let ree = if args.ree {
        let psi = sys.ground_state().ok_or_else(|| CliError::input("--ree needs a non-degenerate ground state"))?;
        let budget = ReeBudget {
            restarts: args.ree_restarts,
            iterations: args.ree_iterations,
            seed: ctx.seed,
            ..ReeBudget::default()
        };
        Some(witness::ree_brute_force(&psi.density()?, sys.bipartition(), &budget)?)
    } else {
        None
    };
    let doc = json!({
        "energies": sys.energies(),
        "ground_degenerate": sys.ground_degenerate(),
        "ground_entanglement": sys.ground_entanglement().map(|e| e * scale),
        "entropy_unit": ctx.entropy.name(),
        "critical_temperature": critical,
        "reports": rows.iter().map(|r| r.report).collect::<Vec<_>>(),
        "ree_brute_force": ree,
        "seed": ctx.seed,
    });
    let out = ctx.output()?;
    out.write("witness_grid.csv", &csv.into_string())?;
    out.write("witness_report.json", &json_document("witness", doc)?)?;
    let fired = rows.iter().filter(|r| r.report.verdict == witness::Verdict::Entangled).count();
    println!("witness: fired at {fired} of {} temperatures", rows.len());
    Ok(())
}

/// Gravitational-wave band quoted for the graviton background, Hz.
pub const GW_BAND: (f64, f64) = (1e-15, 1e4);

fn cmb(args: &CmbArgs, ctx: &Context) -> Result<(), CliError> {
    let omega = witness::cmb_frequency_bound(args.t, args.dt_rel, args.p)?;
    let c_crit = witness::critical_heat_capacity(args.t, omega, args.p)?;
    let doc = json!({
        "preset": "cmb",
        "temperature_K": args.t,
        "relative_fluctuation": args.dt_rel,
        "p_exponent": args.p,
        "omega_bound_hz": omega,
        "critical_heat_capacity_kB": c_crit,
        "in_gravitational_wave_band": omega >= GW_BAND.0 && omega <= GW_BAND.1,
    });
    let out = ctx.output()?;
    out.write("witness_cmb.json", &json_document("witness_cmb", doc)?)?;
    println!("omega bound = {} Hz", float(omega));
    Ok(())
}
