//! Acceptance run: one pass/fail line per criterion, nonzero exit on any failure.

use std::f64::consts::{PI, SQRT_2};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use agn_cli::runs::{self, McOptions};
use agn_cli::scenario::{load_scenario, Scenario};
use agn_core::ensemble::{alpha_moments, intrinsic_variance, MomentOptions, ResponseModel};
use agn_core::montecarlo::{
    covariance, estimate_variance, run_trials, validate_scaling, AtomicEnsemble, PhotonReference, ScalingValidation,
    StreamFactory, TrialConfig,
};
use agn_core::noise::{
    generalized_scaling_ratio, quantum_advantage_boundary, scaling_ratio, ConstantJ, PhotonStatistics,
};
use agn_core::spectroscopy::{full_alpha, steady_state, weak_probe_alpha, FourLevelParams};
use rand::Rng;

type Check = Result<String, String>;

fn within(name: &str, value: f64, target: f64, rel: f64) -> Check {
    let dev = (value / target - 1.0).abs();
    let msg = format!(
        "{name} = {value:.6e} (target {target:e}, deviation {:.3}%, limit {}%)",
        100.0 * dev,
        100.0 * rel
    );
    if dev <= rel {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn all(parts: Vec<Check>) -> Check {
    let ok = parts.iter().all(Result::is_ok);
    let text = parts
        .into_iter()
        .map(|p| p.unwrap_or_else(|e| format!("FAILED {e}")))
        .collect::<Vec<_>>()
        .join("; ");
    if ok {
        Ok(text)
    } else {
        Err(text)
    }
}

fn operating_point() -> Scenario {
    load_scenario("paper-operating-point").unwrap().scenario
}

fn mc_scenario() -> Scenario {
    load_scenario("mc-validation").unwrap().scenario
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

fn operating_point_numbers() -> Check {
    let start = Instant::now();
    let acc = operating_point().sensor().accounting().unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    all(vec![
        within("Phi_at", acc.phi_at, 7.1e14, 0.02),
        within("Phi_ph", acc.phi_ph, 5.1e14, 0.01),
        within("R", acc.resource_ratio_r, 0.72, 0.03),
        if elapsed < 1.0 {
            Ok(format!("{elapsed:.3} s"))
        } else {
            Err(format!("took {elapsed:.3} s"))
        },
    ])
}

fn scaling_law() -> Check {
    let start = Instant::now();
    let r = scaling_ratio(0.72, 40.0);
    let mut worst: f64 = 0.0;
    for j in [0.01, 0.5, 1.0, 3.0, 40.0, 46.025782626, 1e3, 7380.6] {
        worst = worst.max((scaling_ratio(1.0 / j, j) - SQRT_2).abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    all(vec![
        within("scaling_ratio(0.72, 40)", r, 5.4, 0.02),
        if ((r * 100.0).round() - 546.0).abs() < 0.5 {
            Ok(format!("rounds to {r:.2}"))
        } else {
            Err(format!("{r} does not round to 5.46"))
        },
        // (1/J)·J can differ from 1 by one rounding step.
        if worst <= 2.0 * f64::EPSILON * SQRT_2 {
            Ok(format!("max |ratio(1/J, J) - sqrt 2| = {worst:.1e}"))
        } else {
            Err(format!("ratio at 1/J off sqrt 2 by {worst:e}"))
        },
        if elapsed < 1.0 {
            Ok(format!("{elapsed:.4} s"))
        } else {
            Err(format!("took {elapsed:.3} s"))
        },
    ])
}

fn mc_table(threads: usize) -> (Vec<u8>, agn_core::montecarlo::ScalingReport) {
    let s = mc_scenario();
    let opts = McOptions {
        seed: None,
        trials: None,
        analytic_j_factor: 1.0,
    };
    in_pool(threads, || {
        let (t, report, _) = runs::mc_validate(&s, &opts).unwrap();
        (t.to_csv().unwrap(), report)
    })
}

fn monte_carlo_scaling(report: &agn_core::montecarlo::ScalingReport) -> Check {
    let mut parts = Vec::new();
    for p in &report.points {
        let text = format!(
            "R={:.2e}: {:.4} in [{:.4}, {:.4}] vs {:.4} ({:.2}%)",
            p.r_target,
            p.empirical_ratio,
            p.ratio_ci_low,
            p.ratio_ci_high,
            p.analytic_ratio,
            100.0 * p.relative_deviation
        );
        parts.push(if p.pass && p.relative_deviation <= 0.05 && p.analytic_in_ci {
            Ok(text)
        } else {
            Err(text)
        });
    }
    let n_ph_at_rc = report
        .points
        .iter()
        .map(|p| p.n_ph_mean)
        .min_by(|a, b| (a.log10() - 6.0).abs().total_cmp(&(b.log10() - 6.0).abs()))
        .unwrap_or(f64::NAN);
    parts.push(within("N_ph at R_c", n_ph_at_rc, 1e6, 0.01));
    parts.push(match report.agn_slope {
        Some(s) if (s - 0.5).abs() <= 0.05 => Ok(format!("AGN slope {s:.4}")),
        s => Err(format!("AGN slope {s:?}")),
    });
    parts.push(if report.points.len() == 7 {
        Ok(format!("J = {:.5e}", report.j))
    } else {
        Err(format!("{} grid points", report.points.len()))
    });
    all(parts)
}

fn variance_decomposition() -> Check {
    let s = mc_scenario();
    let a = s.sensor().optical_depth_prefactor().unwrap();
    let ens = AtomicEnsemble::new(&s.levels, &s.gas, ResponseModel::WeakProbe).unwrap();
    let m = alpha_moments(&s.levels, &s.gas, ResponseModel::WeakProbe, &MomentOptions::default()).unwrap();
    let v_i = intrinsic_variance(&s.gas, m.var_alpha_i);
    let (n_at, n_ph) = (1e4, 1e6);
    let config = TrialConfig {
        seed: 20240602,
        trials: 100_000,
        n_at_mean: n_at,
        n_ph_mean: n_ph,
        stats: PhotonStatistics::COHERENT,
        mode: ResponseModel::WeakProbe,
        reference: PhotonReference::Incident,
    };
    let samples = run_trials(&config, &ens, a, 0).unwrap();
    let sig: Vec<f64> = samples.iter().map(|x| x.s).collect();
    let atomic: Vec<f64> = samples.iter().map(|x| x.atomic_term).collect();
    let photon: Vec<f64> = samples.iter().map(|x| x.photon_term).collect();
    let var = estimate_variance(&sig).unwrap().var_s;
    let (cov, se) = covariance(&atomic, &photon).unwrap();
    all(vec![
        within("Var(S)", var, a * a * v_i / n_at + 1.0 / n_ph, 0.05),
        if cov.abs() <= 3.0 * se {
            Ok(format!("cov = {cov:.3e} (3 SE = {:.3e})", 3.0 * se))
        } else {
            Err(format!("cov = {cov:.3e} exceeds 3 SE = {:.3e}", 3.0 * se))
        },
    ])
}

fn solver_cross_validation() -> Check {
    const MHZ: f64 = 2.0 * PI * 1e6;
    let mut rng = StreamFactory::new(2025, 5).trial(0);
    let mut worst: f64 = 0.0;
    let mut unphysical = 0;
    for _ in 0..20 {
        let base = FourLevelParams::default();
        let p = FourLevelParams {
            omega_c_rabi: rng.random_range(0.2..5.0) * MHZ,
            omega_s_rabi: rng.random_range(0.0..20.0) * MHZ,
            delta_p: rng.random_range(-5.0..5.0) * MHZ,
            delta_c: rng.random_range(-5.0..5.0) * MHZ,
            delta_s: rng.random_range(-5.0..5.0) * MHZ,
            gamma3: rng.random_range(1e-3..0.1) * MHZ,
            gamma4: rng.random_range(1e-3..0.1) * MHZ,
            ..base
        };
        let p = p.with_probe_rabi(p.gamma2 / 100.0);
        let v = rng.random_range(-300.0..300.0);
        if !steady_state(&p, v).unwrap().is_physical() {
            unphysical += 1;
        }
        let full = full_alpha(&p, v).unwrap().to_complex();
        let weak = weak_probe_alpha(&p, v).unwrap().to_complex();
        worst = worst.max((full - weak).norm() / weak.norm());
    }
    all(vec![
        if worst < 0.01 {
            Ok(format!("worst relative deviation {worst:.2e}"))
        } else {
            Err(format!("worst relative deviation {worst:.2e}"))
        },
        if unphysical == 0 {
            Ok("all 20 density matrices physical".into())
        } else {
            Err(format!("{unphysical} unphysical density matrices"))
        },
    ])
}

fn quantum_boundary() -> Check {
    let mut parts = Vec::new();
    let mut worst: f64 = 0.0;
    for j in [0.01, 1.0, 40.0, 46.025782626, 7380.6] {
        let r = quantum_advantage_boundary(&ConstantJ(j), (1e-6, 1e3)).unwrap();
        worst = worst.max((r * j - 1.0).abs());
    }
    parts.push(if worst <= 1e-10 {
        Ok(format!("boundary relative error {worst:.1e}"))
    } else {
        Err(format!("boundary relative error {worst:.1e}"))
    });

    let s = mc_scenario();
    let a = s.sensor().optical_depth_prefactor().unwrap();
    let mut v = ScalingValidation::new(s.levels, s.gas, a, 1e4, Vec::new());
    v.mode = ResponseModel::WeakProbe;
    let j = v.analytic_j().unwrap();
    v.r_grid = vec![1.0 / j];
    v.stats = PhotonStatistics::FOCK;
    v.seed = 20240603;
    v.trials = 20_000;
    let report = validate_scaling(&v).unwrap();
    parts.push(within(
        "Fock MC ratio at R = 1/J",
        report.points[0].empirical_ratio,
        1.0,
        0.05,
    ));

    let mut rng = StreamFactory::new(2025, 6).trial(0);
    let exact = (0..10_000).all(|_| {
        let r = 10f64.powf(rng.random_range(-8.0..8.0));
        let j = 10f64.powf(rng.random_range(-4.0..4.0));
        generalized_scaling_ratio(r, j, PhotonStatistics::COHERENT)
            .unwrap()
            .to_shot_limit
            == scaling_ratio(r, j)
    });
    parts.push(if exact {
        Ok("Q = 0 equals the coherent law bit for bit".into())
    } else {
        Err("Q = 0 differs from the coherent law".into())
    });
    all(parts)
}

fn sensitivity_identity() -> Check {
    let s = operating_point();
    let model = s.sensor();
    let spec = s.map.as_ref().unwrap();
    let powers = spec.power.values();
    let map = agn_core::noise::sensitivity_map(&powers, &spec.waist.values(), &model).unwrap();
    let mut worst: f64 = 0.0;
    let mut missing = 0;
    for p in &map.points {
        match &p.result {
            Some(r) => worst = worst.max(r.identity_residual),
            None => missing += 1,
        }
    }
    let inset = agn_core::noise::sensitivity_map(&powers, &[spec.inset_waist], &model).unwrap();
    let e: Vec<f64> = inset
        .points
        .iter()
        .map(|p| p.result.map_or(f64::NAN, |r| r.e_s))
        .collect();
    let (imin, emin) = e
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let interior = imin > 0 && imin + 1 < e.len() && emin < e[0] && emin < e[e.len() - 1];

    let (_, notes) = runs::fluxes(&s).unwrap();
    let j = model.fluctuation_parameter().unwrap();
    println!("    provenance: {}", notes[0]);
    all(vec![
        if worst < 1e-10 && missing == 0 {
            Ok(format!(
                "{} map points, max identity residual {worst:.1e}",
                map.points.len()
            ))
        } else {
            Err(format!("max identity residual {worst:.1e}, {missing} missing points"))
        },
        if interior {
            Ok(format!(
                "inset minimum {emin:.3e} V/m/sqrt(Hz) at P_in = {:.3e} W",
                powers[imin]
            ))
        } else {
            Err(format!("inset minimum at index {imin} of {}", e.len()))
        },
        if (10.0..=160.0).contains(&j) {
            Ok(format!("J = {j:.4} in [10, 160]"))
        } else {
            Err(format!("J = {j:.4} outside [10, 160]"))
        },
    ])
}

fn determinism(mc_one_thread: &[u8], mc_four_threads: &[u8]) -> Check {
    let mut parts = vec![if mc_one_thread == mc_four_threads {
        Ok(format!("mc-validate table identical ({} bytes)", mc_one_thread.len()))
    } else {
        Err("mc-validate table differs between 1 and 4 threads".into())
    }];
    let s = operating_point();
    let sweeps = |threads| {
        in_pool(threads, || {
            let a = runs::scaling_sweep(&s).unwrap().to_csv().unwrap();
            let b = runs::quantum_sweep(&s).unwrap().0.to_csv().unwrap();
            (a, b)
        })
    };
    parts.push(if sweeps(1) == sweeps(4) {
        Ok("scaling and quantum sweeps identical".into())
    } else {
        Err("sweep tables differ between 1 and 4 threads".into())
    });

    // Same check through the command-line tool.
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for (d, threads) in dirs.iter().zip(["1", "4"]) {
        let status = Command::new(env!("CARGO_BIN_EXE_agn"))
            .args([
                "mc-validate",
                "--scenario",
                "mc-validation",
                "--trials",
                "5000",
                "--seed",
                "11",
            ])
            .args(["--threads", threads, "--out", d.path().to_str().unwrap()])
            .output()
            .unwrap()
            .status;
        if !status.success() {
            parts.push(Err(format!("agn mc-validate --threads {threads} exited with {status}")));
        }
    }
    let read = |i: usize| std::fs::read(dirs[i].path().join("mc-validate.csv")).unwrap_or_default();
    parts.push(if !read(0).is_empty() && read(0) == read(1) {
        Ok("CLI output identical".into())
    } else {
        Err("CLI output differs".into())
    });
    all(parts)
}

fn run(label: &str, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let secs = start.elapsed().as_secs_f64();
    match &result {
        Ok(m) => println!("PASS {label} ({secs:.1} s): {m}"),
        Err(m) => println!("FAIL {label} ({secs:.1} s): {m}"),
    }
    result.is_ok()
}

fn main() {
    let mut results = Vec::new();
    results.push(run("1 operating-point regression", operating_point_numbers));
    results.push(run("2 scaling-law consistency", scaling_law));
    let (one, report) = mc_table(1);
    let (four, _) = mc_table(4);
    results.push(run("3 monte carlo vs analytic", || monte_carlo_scaling(&report)));
    results.push(run("4 variance decomposition", variance_decomposition));
    results.push(run("5 solver cross-validation", solver_cross_validation));
    results.push(run("6 quantum boundary", quantum_boundary));
    results.push(run("7 sensitivity identity and shape", sensitivity_identity));
    results.push(run("8 determinism across thread counts", || determinism(&one, &four)));
    let passed = results.iter().filter(|&&r| r).count();
    println!("{passed}/{} acceptance criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
