//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach the output.

use std::f64::consts::{LN_2, PI};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use emergent_core::clock;
use emergent_core::cosmo::{self, CosmoParams, EpochLabel, OutputGrid};
use emergent_core::numerics::StepControl;
use emergent_core::quantum::{
    hermitian_eigen, random, CMatrix, CVector, DensityOperator, Factorization, LabeledState, C64,
};
use emergent_core::thermal::{self, BathModel};
use emergent_core::tunneling::{self, UniverseVariant};
use emergent_core::units::{constants, UnitSystem, SOLAR_MASS};
use emergent_core::witness::{self, Bipartition, CriticalTemperature, ReeBudget, ThermalSystem, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria that cannot be met with the stated formula and CODATA constants.
/// They still run at full tolerance and print FAIL.
const KNOWN_UNATTAINABLE: &[u32] = &[6];

type Criterion = (u32, &'static str, Option<u64>, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn within_factor(x: f64, target: f64, factor: f64) -> bool {
    x >= target / factor && x <= target * factor
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    o.detail = format!("{}; {:.2} s", o.detail, took.as_secs_f64());
    if let Some(limit) = limit {
        if took > limit {
            o.pass = false;
            o.detail += &format!(" exceeds {} s", limit.as_secs());
        }
    }
    o
}

fn relational_time() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_deficit, mut worst_residual, mut runs) = (0.0f64, 0.0f64, 0);
    for d in [16, 64, 256] {
        for dim in 2..=6 {
            for _ in 0..4 {
                let levels: Vec<usize> = (0..dim).map(|_| rng.random_range(0..d)).collect();
                let h = clock::lattice_hamiltonian(&levels, d, &random::unitary(&mut rng, dim));
                let psi0 = random::state(&mut rng, dim);
                let r = clock::analyze(&h, &psi0, d).expect("clock analysis");
                worst_deficit = worst_deficit.max(1.0 - r.min_fidelity);
                worst_residual = worst_residual.max(r.total_residual);
                runs += 1;
            }
        }
    }
    Outcome {
        pass: worst_deficit <= 1e-10 && worst_residual <= 1e-9,
        detail: format!("{runs} systems, max fidelity deficit {worst_deficit:.2e}, max residual {worst_residual:.2e}"),
    }
}

fn emergent_gibbs() -> Outcome {
    let mut exact_ok = true;
    let mut worst = (0.0f64, 0.0f64);
    for beta in [0.5, 1.0, 2.0] {
        let bath = BathModel::exponential(beta, 40).expect("bath");
        let delta = LN_2 / beta;
        let levels: Vec<f64> = (0..5).map(|k| k as f64 * delta).collect();
        let r = thermal::emergent_report(&levels, &bath).expect("report");
        worst.0 = worst.0.max(rel(r.beta_fit, beta));
        worst.1 = worst.1.max(r.max_gibbs_deviation);
        exact_ok &=
            rel(r.beta_fit, beta) <= 1e-10 && r.max_gibbs_deviation <= 1e-12 && rel(r.beta_theory, beta) <= 1e-10;
    }
    let sizes = [8, 16, 32, 64];
    let levels = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let errors: Vec<f64> = thermal::spin_bath_sweep(&sizes, 1.0, &levels)
        .expect("sweep")
        .iter()
        .map(|r| r.relative_beta_error())
        .collect();
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    Outcome {
        pass: exact_ok && decreasing,
        detail: format!(
            "exponential bath: max beta error {:.2e}, max Gibbs deviation {:.2e}; spin bath errors {}",
            worst.0,
            worst.1,
            errors.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(" > ")
        ),
    }
}

fn parikh_wilczek() -> Outcome {
    let mut worst_oracle = 0.0f64;
    let mut worst_correction = 0.0f64;
    for f in [1e-3, 1e-2, 5e-2, 1e-1] {
        let closed = tunneling::parikh_wilczek_exponent(1.0, f).expect("closed form");
        let oracle = tunneling::parikh_wilczek_contour(1.0, f, f).expect("contour");
        worst_oracle = worst_oracle.max(rel(oracle.exponent, closed));
        let corr = tunneling::thermality_correction(1.0, f).expect("correction");
        worst_correction = worst_correction.max(rel(corr, -4.0 * PI * f * f));
    }
    Outcome {
        pass: worst_oracle <= 1e-6 && worst_correction <= 1e-6,
        detail: format!("oracle rel {worst_oracle:.2e}, correction rel {worst_correction:.2e}"),
    }
}

fn hawking() -> Outcome {
    let t = tunneling::hawking_temperature(SOLAR_MASS).expect("temperature");
    Outcome { pass: rel(t, 6.17e-8) <= 1e-3, detail: format!("T = {t:.5e} K, rel {:.2e}", rel(t, 6.17e-8)) }
}

fn wheeler_dewitt() -> Outcome {
    let mut worst = 0.0f64;
    for a0 in [0.3, 1.0, 2.5, 40.0] {
        let r = tunneling::wdw_tunneling_probability(a0, 1.0).expect("wdw");
        worst = worst.max(rel(r.integral_quadrature, a0 * a0 / 3.0));
    }
    let p = tunneling::wdw_tunneling_probability(1.0, 1.0).expect("wdw").probability;
    let target = (-PI / 2.0).exp();
    Outcome {
        pass: worst <= 1e-10 && rel(p, target) <= 1e-10,
        detail: format!("integral rel {worst:.2e}, p = {p:.12}, rel {:.2e}", rel(p, target)),
    }
}

fn universe_numbers() -> Outcome {
    let h0 = 2.2e-18;
    let m = tunneling::universe_mass(h0, UnitSystem::Si).expect("mass");
    let t = tunneling::universe_temperature(h0, UnitSystem::Si).expect("temperature");
    let mut ratios = Vec::new();
    for (h, units) in
        [(h0, UnitSystem::Si), (1e-10, UnitSystem::Si), (1.0, UnitSystem::Natural), (0.01, UnitSystem::Natural)]
    {
        let report = tunneling::chain_consistency_report(h, units).expect("chain");
        let e = report.entries.iter().find(|e| e.variant == UniverseVariant::DimensionallyConsistent).expect("entry");
        ratios.push(e.ratio_to_stated);
    }
    let ratio_err = ratios.iter().map(|&r| rel(r, PI)).fold(0.0, f64::max);
    let (m_ok, t_ok, r_ok) = (within_factor(m, 1e53, 3.0), rel(t, 2.66e-30) <= 1e-3, ratio_err <= 1e-10);
    Outcome {
        pass: m_ok && t_ok && r_ok,
        detail: format!(
            "M_u = {m:.4e} kg ({}), T_u = {t:.4e} K vs 2.66e-30 rel {:.2e} ({}), chained ratio pi rel {ratio_err:.1e} ({})",
            if m_ok { "ok" } else { "off" },
            rel(t, 2.66e-30),
            if t_ok { "ok" } else { "off" },
            if r_ok { "ok" } else { "off" }
        ),
    }
}

fn cosmology() -> Outcome {
    let alpha = cosmo::default_alpha(UnitSystem::Natural);
    let p = CosmoParams::new(1.0 / 3.0, alpha, 1.0, UnitSystem::Natural).expect("params");
    let init = cosmo::inflation_start(&p, 1e-8).expect("start");
    let plateau_h = (32.0 * PI / (9.0 * alpha)).sqrt();

    // Dense early samples resolve the plateau slope; the rest covers the transition.
    let mut times: Vec<f64> = (0..=200).map(|i| 1e-4 * i as f64).collect();
    times.extend((1..=2000).map(|i| 0.02 + 5.0 * i as f64 / 2000.0));
    let traj = cosmo::integrate_universe(
        &p,
        init,
        times[times.len() - 1],
        &OutputGrid::Times { times },
        StepControl::default(),
    )
    .expect("integration");
    let s = &traj.samples;
    let max_dev =
        s.iter().map(|x| rel(x.rho, cosmo::closed_form_density(x.a, &p).expect("closed form"))).fold(0.0, f64::max);
    let e_folds = (s[s.len() - 1].a / s[0].a).ln();
    let spans = traj.epochs.len() == 2
        && traj.epochs[0].label == EpochLabel::Inflation
        && traj.epochs[1].label == EpochLabel::Radiation;

    let plateau: Vec<(f64, f64)> = s[..=200].iter().map(|x| (x.t, x.a.ln())).collect();
    let n = plateau.len() as f64;
    let mt = plateau.iter().map(|q| q.0).sum::<f64>() / n;
    let my = plateau.iter().map(|q| q.1).sum::<f64>() / n;
    let slope = plateau.iter().map(|q| (q.0 - mt) * (q.1 - my)).sum::<f64>()
        / plateau.iter().map(|q| (q.0 - mt).powi(2)).sum::<f64>();

    let k = constants();
    let alpha_si = cosmo::default_alpha(UnitSystem::Si);
    let h_si = (32.0 * PI * k.g / (9.0 * k.c * k.c * alpha_si)).sqrt();
    let p_si = CosmoParams::new(1.0 / 3.0, alpha_si, 1.0, UnitSystem::Si).expect("params");
    let h_si_model = cosmo::friedmann_H(p_si.plateau_density().expect("plateau"), &p_si).expect("H");

    let pass = max_dev <= 1e-6
        && e_folds >= 6.0
        && spans
        && rel(slope, plateau_h) <= 1e-6
        && rel(h_si_model, h_si) <= 1e-6
        && within_factor(h_si, 1e45, 3.0);
    Outcome {
        pass,
        detail: format!(
            "closed-form rel {max_dev:.2e} over {e_folds:.2} e-folds (both epochs: {spans}), slope rel {:.2e}, SI plateau H = {h_si:.4e} 1/s",
            rel(slope, plateau_h)
        ),
    }
}

fn qubits() -> Factorization {
    Factorization::new([("a", 2), ("b", 2)]).expect("factors")
}

fn bip() -> Bipartition {
    Bipartition::new(["a"], ["b"])
}

// Smallest eigenvalue of the partial transpose; nonnegative means separable for two qubits.
fn min_pt_eigenvalue(rho: &DensityOperator) -> f64 {
    let m = rho.matrix();
    let pt = CMatrix::from_fn(4, 4, |r, s| m[((r / 2) * 2 + s % 2, (s / 2) * 2 + r % 2)]);
    hermitian_eigen(&pt).0[0]
}

fn binary_entropy(p: f64) -> f64 {
    let q = 1.0 - p;
    [p, q].iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

fn witness_criterion() -> Outcome {
    let paulis = [
        CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]),
        CMatrix::from_row_slice(2, 2, &[c(0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), c(0.0)]),
        CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]),
    ];
    let heis: CMatrix = paulis.iter().map(|s| s.kronecker(s)).fold(CMatrix::zeros(4, 4), |a, b| a + b);
    let sys = ThermalSystem::new(heis, qubits(), bip()).expect("system");
    let e = sys.ground_entanglement().expect("nondegenerate ground");
    let e_ok = (e - LN_2).abs() <= 1e-12;
    let (crit_ok, residual) = match witness::critical_temperature(&sys).expect("bisection") {
        CriticalTemperature::Threshold { residual, .. } => (residual <= 1e-6, residual),
        CriticalTemperature::NoThreshold => (false, f64::NAN),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let budget = ReeBudget::default();
    let mut ree_worst = 0.0f64;
    for _ in 0..100 {
        let theta: f64 = rng.random_range(0.0..PI / 2.0);
        let amps = CVector::from_vec(vec![c(theta.cos()), c(0.0), c(0.0), c(theta.sin())]);
        let rho = LabeledState::new(qubits(), amps).expect("state").density().expect("density");
        let r = witness::ree_brute_force(&rho, &bip(), &budget).expect("ree");
        ree_worst = ree_worst.max((r.upper_bound - binary_entropy(theta.cos().powi(2))).abs());
    }

    let (mut violations, mut ppt_states) = (0, 0);
    for _ in 0..200 {
        let sys = ThermalSystem::new(random::hermitian(&mut rng, 4), qubits(), bip()).expect("system");
        let w = sys.spectral_width();
        for i in 0..12 {
            let t = w * 10f64.powf(-2.5 + 0.25 * i as f64);
            let (rho, _) = witness::gibbs_state(&sys, t).expect("gibbs");
            if min_pt_eigenvalue(&rho) >= 0.0 {
                ppt_states += 1;
                if witness::entropy_witness(&sys, t).expect("witness").verdict == Verdict::Entangled {
                    violations += 1;
                }
            }
        }
    }
    Outcome {
        pass: e_ok && crit_ok && ree_worst <= 5e-3 && violations == 0 && ppt_states > 0,
        detail: format!(
            "E = ln 2 err {:.1e}, REE max err {ree_worst:.2e}, {violations} violations over {ppt_states} PPT states, bisection residual {residual:.1e}",
            (e - LN_2).abs()
        ),
    }
}

fn cmb() -> Outcome {
    let w = witness::cmb_frequency_bound(3.0, 1e-5, 1.0).expect("bound");
    Outcome {
        pass: rel(w, 39.3) <= 1e-3 && w <= 1e2 && (1e-15..=1e4).contains(&w),
        detail: format!("omega = {w:.4} Hz, rel {:.2e}", rel(w, 39.3)),
    }
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .expect("output dir")
        .map(|e| {
            let e = e.expect("entry");
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).expect("read"))
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let work = tempfile::tempdir().expect("tempdir");
    let sys = work.path().join("sys.json");
    std::fs::write(&sys, r#"{"hamiltonian": [[[0.5,0],[0.2,0.1]],[[0.2,-0.1],[-0.5,0]]], "psi0": [[1,0],[0,0]]}"#)
        .expect("write");
    let pair = work.path().join("pair.json");
    std::fs::write(
        &pair,
        r#"{"factors": [["a",2],["b",2]], "bipartition": {"a":["a"],"b":["b"]},
            "hamiltonian": [[[1,0],[0,0],[0,0],[0,0]],[[0,0],[-1,0],[2,0],[0,0]],[[0,0],[2,0],[-1,0],[0,0]],[[0,0],[0,0],[0,0],[1,0]]]}"#,
    )
    .expect("write");
    let (sys, pair) = (sys.to_string_lossy().into_owned(), pair.to_string_lossy().into_owned());
    let runs: Vec<Vec<&str>> = vec![
        vec!["clock", "--d", "64", "--system", &sys],
        vec!["thermal", "--sweep", "8,16,32"],
        vec!["tunnel", "--preset", "blackhole", "--mass-solar", "1", "--oracle"],
        vec!["tunnel", "--preset", "universe", "--hubble-grid", "1e-18,2.2e-18"],
        vec!["cosmo"],
        vec!["witness", "--system", &pair, "--ree", "--ree-restarts", "3", "--ree-iterations", "400", "--seed", "7"],
        vec!["witness", "cmb", "--T", "3", "--dTrel", "1e-5", "--p", "1"],
    ];
    let mut outputs = Vec::new();
    for round in 0..2 {
        let out = work.path().join(format!("run{round}"));
        for args in &runs {
            let status =
                Command::new(env!("CARGO_BIN_EXE_emergent")).args(args).arg("--out").arg(&out).output().expect("spawn");
            if !status.status.success() {
                return Outcome { pass: false, detail: format!("{args:?} exited with {}", status.status) };
            }
        }
        outputs.push(snapshot(&out));
    }
    let same = outputs[0] == outputs[1];
    Outcome {
        pass: same && !outputs[0].is_empty(),
        detail: format!("{} files compared byte for byte", outputs[0].len()),
    }
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        (1, "relational time", Some(10), relational_time),
        (2, "emergent Gibbs", Some(30), emergent_gibbs),
        (3, "Parikh-Wilczek", Some(60), parikh_wilczek),
        (4, "Hawking temperature", None, hawking),
        (5, "Wheeler-DeWitt", None, wheeler_dewitt),
        (6, "universe numbers", None, universe_numbers),
        (7, "cosmology", Some(60), cosmology),
        (8, "witness", Some(120), witness_criterion),
        (9, "CMB criterion", None, cmb),
        (10, "determinism", None, determinism),
    ];
    let mut unexpected = Vec::new();
    for (id, name, limit, f) in criteria {
        let o = timed(limit.map(Duration::from_secs), f);
        let known = KNOWN_UNATTAINABLE.contains(&id);
        let note = if known && !o.pass { " [known unattainable]" } else { "" };
        println!("{} {id:>2} {name}: {}{note}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if o.pass == known {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected acceptance results for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
