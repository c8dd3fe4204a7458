//! End-to-end acceptance checks. Runs without the libtest harness so that
//! every criterion prints exactly one `PASS` / `FAIL` line.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use polarity_core::kinetics::{find_equilibria, primary_equilibrium, stability_value_s, EquilibriumSearch};
use polarity_core::linstab::{
    full_vs_reduced_consistency, FullSystem, InstabilityCase, ReducedSystem, SpectrumSpec, Verdict,
};
use polarity_core::rng::SplitMix64;
use polarity_core::sim::{
    measure_growth_rate, relative_variation, run_ensemble, run_simulation, spot_count, InitialCondition, Model,
    SimConfig,
};
use polarity_core::specfun::{bessel_ratio_rho, kappa, tilde_kappa, MAX_ORDER, TILDE_KAPPA_AT_ZERO};
use polarity_core::{CytoDiffusion, Equilibrium, Execution, Jacobian, KineticParams};

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn equilibrium(p: &KineticParams) -> Equilibrium {
    primary_equilibrium(&find_equilibria(p, &EquilibriumSearch::default()).expect("search runs"))
        .expect("an equilibrium exists")
}

/// `rho_l(r) = l + r^2 / (2l+3) * T_{l+1} / T_l` with
/// `T_l = sum_k (r^2/2)^k / (k! prod_{j=1..k} (2l+2j+1))`, 200 terms.
fn rho_series(l: usize, r: f64) -> f64 {
    let t = |l: usize| {
        let (x, mut term, mut sum) = (0.5 * r * r, 1.0f64, 1.0f64);
        for k in 1..200 {
            term *= x / (k as f64 * (2 * l + 2 * k + 1) as f64);
            sum += term;
        }
        sum
    };
    l as f64 + r * r / (2 * l + 3) as f64 * t(l + 1) / t(l)
}

fn criterion_1() -> Check {
    let mut worst = 0.0f64;
    for l in 0..=20 {
        for k in 1..=500 {
            // log-spaced on (0, 50]
            let r = 50.0 * 10f64.powf(-8.0 * (500 - k) as f64 / 499.0);
            let got = bessel_ratio_rho(l, r).map_err(|e| e.to_string())?.value;
            let want = rho_series(l, r);
            worst = worst.max(((got - want) / want).abs());
        }
    }
    ensure(worst <= 1e-10, format!("rho relative error {worst:.2e}"))?;
    for d in [0.1, 1.0, 37.0, 1e4] {
        for l in 0..=MAX_ORDER {
            let got = kappa(d, l, 0.0).map_err(|e| e.to_string())?;
            let want = d * l as f64;
            ensure((got - want).abs() <= 1e-12 * want.max(1.0), format!("kappa({d}, {l}, 0) = {got}"))?;
        }
    }
    ensure(tilde_kappa(0.0) == 1.0 / 3.0 && TILDE_KAPPA_AT_ZERO == 1.0 / 3.0, "tilde_kappa(0) != 1/3")?;
    let grid: Vec<f64> = (0..10_000).map(|k| 20.0 * k as f64 / 9_999.0).collect();
    let decreasing = grid.windows(2).all(|w| tilde_kappa(w[1]) < tilde_kappa(w[0]));
    ensure(decreasing, "tilde_kappa not strictly decreasing on [0, 20]")?;
    Ok(format!("max rho error {worst:.1e}, kappa(D,l,0) = Dl, tilde_kappa decreasing"))
}

fn random_stable_jacobian(rng: &mut SplitMix64) -> Jacobian {
    loop {
        let f_u = -2.0 + 4.0 * rng.next_f64();
        let f_v = 0.01 + 3.0 * rng.next_f64();
        let q_u = -3.0 * rng.next_f64();
        let q_v = q_u - 1e-3 - 3.0 * rng.next_f64();
        let q_cyto = 0.01 + 2.0 * rng.next_f64();
        let j = Jacobian { f_u, f_v, q_u, q_v, q_cyto };
        if stability_value_s(&j) > 1e-6 {
            return j;
        }
    }
}

fn criterion_2() -> Check {
    let mut samples = 0usize;
    for l in 0..=MAX_ORDER {
        for k in 0..300 {
            let r = 10f64.powf(-6.0 + 10.0 * k as f64 / 299.0);
            let rho = bessel_ratio_rho(l, r).map_err(|e| e.to_string())?.value;
            let (lo, hi) = (l as f64, l as f64 + r * r / 3.0);
            ensure(lo <= rho && rho <= hi, format!("rho_{l}({r:e}) = {rho} outside [{lo}, {hi}]"))?;
            samples += 1;
        }
    }
    let mut rng = SplitMix64::new(2024);
    let omegas: Vec<f64> = (0..200).map(|k| 10f64.powf(-4.0 + 8.0 * k as f64 / 199.0)).collect();
    for case in 0..1000 {
        let j = random_stable_jacobian(&mut rng);
        let gamma = 1.0 + 999.0 * rng.next_f64();
        let diffusion = 10f64.powf(-1.0 + 4.0 * rng.next_f64());
        let sys = FullSystem::from_jacobian(j, gamma, 1.0, diffusion);
        for l in 1..=3 {
            let g0 = sys.dispersion_g(l, 0.0).map_err(|e| e.to_string())?;
            for &w in &omegas {
                let g = sys.dispersion_g(l, w).map_err(|e| e.to_string())?;
                ensure(g >= g0 - 1e-12 * g0.abs(), format!("case {case}: G_{l}({w:e}) = {g} < G_{l}(0) = {g0}"))?;
            }
        }
    }
    Ok(format!("{samples} rho samples in [l, l + r^2/3], G_l(w) >= G_l(0) on 1000 Jacobians"))
}

fn criterion_3() -> Check {
    let p = KineticParams::default();
    let eq = equilibrium(&p);
    ensure(eq.residual_f.abs() < 1e-10 && eq.residual_q.abs() < 1e-10, "equilibrium residual too large")?;
    let s = stability_value_s(&eq.jac);
    ensure(s > 0.0, format!("S = {s}"))?;
    let sys = FullSystem::new(&eq, &p).map_err(|e| e.to_string())?;
    let l1 = sys.mode_instability(1).map_err(|e| e.to_string())?;
    ensure(l1.verdict == Verdict::Unstable, format!("l = 1 at D = 100 is {}", l1.verdict))?;
    let slow = FullSystem::new(&eq, &p.with_diffusion(CytoDiffusion::Finite(1.0))).map_err(|e| e.to_string())?;
    let sweep = slow.sweep(50, Execution::Parallel).map_err(|e| e.to_string())?;
    ensure(
        sweep.len() == 50 && sweep.iter().all(|r| r.verdict == Verdict::Stable),
        "D = 1 has a non-stable mode l <= 50",
    )?;
    let case = sys.classify_case().case;
    ensure(p.d == 1.0 && case == InstabilityCase::Case2, format!("classification {case}"))?;
    Ok(format!("S = {s:.4}, l=1 root {:.6} at D=100, D=1 stable for l<=50, case2", l1.root_omega.unwrap_or(f64::NAN)))
}

fn criterion_4() -> Check {
    let p = KineticParams::default();
    let eq = equilibrium(&p);
    let spec = SpectrumSpec::unit_sphere(MAX_ORDER);
    let hot = ReducedSystem::new(&eq, &p).verdict(&spec).map_err(|e| e.to_string())?;
    ensure(hot == Verdict::Unstable, format!("gamma = 400 is {hot}"))?;
    let cold = KineticParams { gamma: 40.0, ..p };
    let sys = ReducedSystem::new(&equilibrium(&cold), &cold);
    let modes = sys.mode_reports(&spec).map_err(|e| e.to_string())?;
    ensure(modes.iter().all(|m| m.verdict == Verdict::Stable), "gamma = 40 has an unstable mode")?;
    // past the vertex of e(mu) the coefficient only grows
    let j = sys.jac;
    let vertex = -sys.gamma * (-sys.d * j.f_u + j.f_v - j.q_v) / (2.0 * sys.d);
    let last = modes.last().expect("modes");
    ensure(last.mu > vertex && last.e_coeff > 0.0, "spectrum does not reach the vertex of e")?;
    Ok(format!("gamma=400 unstable, gamma=40 stable for all l >= 1 (checked to l={MAX_ORDER}, e increasing beyond)"))
}

fn criterion_5() -> Check {
    let p = KineticParams::default();
    let sys = ReducedSystem::new(&equilibrium(&p), &p);
    let grid: Vec<f64> = (1..=4000).map(|k| 0.005 * k as f64).collect();
    let band: Vec<_> = sys.growth_rate_curve(&grid).into_iter().filter(|g| g.omega_plus.is_some()).collect();
    ensure(band.len() > 100, format!("only {} unstable grid points", band.len()))?;
    ensure(band.last().map(|g| g.mu) < grid.last().copied(), "band not closed on the grid")?;
    let shifts: Vec<f64> = band.iter().map(|g| g.s).collect::<Option<_>>().ok_or("no shift for d = 1")?;
    let s0 = shifts[0];
    let spread = shifts.iter().map(|s| (s - s0).abs()).fold(0.0, f64::max);
    ensure(spread <= 1e-9, format!("omega+ + mu varies by {spread:e}"))?;
    let decreasing = band.windows(2).all(|w| w[1].omega_plus < w[0].omega_plus);
    ensure(decreasing, "omega+ not strictly decreasing")?;
    Ok(format!("omega+ + mu = {s0:.12} over {} band points (spread {spread:.1e})", band.len()))
}

fn criterion_6() -> Check {
    let p = KineticParams::default();
    let eq = equilibrium(&p);
    let mode = InitialCondition::Mode { l: 1, amplitude: 1e-6 };
    let reduced_cfg =
        SimConfig { n_theta: 256, dt: 1e-4, t_end: 2.0, diagnostic_stride: 100, initial: mode, ..SimConfig::default() };
    let rec = run_simulation(&reduced_cfg).map_err(|e| e.to_string())?;
    let fit_r = measure_growth_rate(&rec, 1, (0.25, 1.25)).map_err(|e| e.to_string())?;
    let root_r = ReducedSystem::new(&eq, &p).quadratic_dispersion_roots(2.0).positive_root.ok_or("no reduced root")?;
    let err_r = (fit_r - root_r).abs() / root_r;

    let full_cfg = SimConfig { model: Model::Full, n_theta: 128, n_r: 64, ..reduced_cfg };
    let rec = run_simulation(&full_cfg).map_err(|e| e.to_string())?;
    let fit_f = measure_growth_rate(&rec, 1, (0.5, 1.5)).map_err(|e| e.to_string())?;
    let sys = FullSystem::new(&eq, &p).map_err(|e| e.to_string())?;
    let root_f = sys.mode_instability(1).map_err(|e| e.to_string())?.root_omega.ok_or("no full root")?;
    let err_f = (fit_f - root_f).abs() / root_f;
    let msg = format!(
        "reduced {fit_r:.4} vs {root_r:.4} ({:.2}%), full {fit_f:.4} vs {root_f:.4} ({:.2}%)",
        100.0 * err_r,
        100.0 * err_f
    );
    ensure(err_r < 0.05 && err_f < 0.10, msg.clone())?;
    Ok(msg)
}

fn criterion_7() -> Check {
    let base = SimConfig { t_end: 5.0, seed: 11, ..SimConfig::default() };
    let reduced = run_simulation(&SimConfig { n_theta: 256, ..base.clone() }).map_err(|e| e.to_string())?;
    let full =
        run_simulation(&SimConfig { model: Model::Full, n_theta: 128, n_r: 64, ..base }).map_err(|e| e.to_string())?;
    let (dr, df) = (reduced.mass_drift(), full.mass_drift());
    let msg = format!("drift reduced {dr:.1e}, full {df:.1e}");
    ensure(dr < 1e-8 && df < 1e-6, msg.clone())?;
    Ok(msg)
}

fn criterion_8() -> Check {
    let cfg = SimConfig { t_end: 5.0, ..SimConfig::default() };
    let seeds = [1, 2, 3, 4, 5];
    let mut report = Vec::new();
    for (seed, rec) in seeds.iter().zip(run_ensemble(&cfg, &seeds, Execution::Parallel)) {
        let rec = rec.map_err(|e| e.to_string())?;
        let n = rec.u_max.len();
        let settled = (rec.u_max[n - 1] - rec.u_max[n - 2]).abs() <= 1e-9 * rec.u_max[n - 1];
        ensure(settled, format!("seed {seed} still evolving at t = 5"))?;
        let (lo, hi) = (rec.u_min[n - 1], rec.u_max[n - 1]);
        let spots = spot_count(&rec.final_u, 0.5 * (lo + hi));
        ensure(spots == 1, format!("seed {seed} ends with {spots} spots"))?;
        report.push(format!("{seed}:{spots}"));
    }
    Ok(format!("spots per seed {}", report.join(" ")))
}

fn criterion_9() -> Check {
    let cfg = SimConfig {
        model: Model::Full,
        initial: InitialCondition::Deterministic,
        ic_amplitude: 2e-4,
        t_end: 1e-4,
        ..SimConfig::default()
    };
    ensure(cfg.params.v_init == 5.1, "V_init != 5.1")?;
    let rec = run_simulation(&cfg).map_err(|e| e.to_string())?;
    let first = &rec.snapshots[0];
    ensure(first.u.iter().chain(&first.v).all(|&x| x == 1e-4), "surface fields not at 1e-4")?;
    // 5.1 - 6e-4 rounds to one ulp below the double nearest 5.0994
    let msg = format!("V0 = {:.17}", rec.v0);
    ensure((rec.v0 - 5.0994).abs() <= 1e-15, msg.clone())?;
    Ok(msg)
}

fn criterion_10() -> Check {
    let dt = 2e-5;
    let cfg = SimConfig {
        dt,
        t_end: 5.0,
        seed: 1,
        diagnostic_stride: 500,
        snapshot_stride: 50_000,
        params: KineticParams::rich_dynamics(),
        ..SimConfig::default()
    };
    let rec = run_simulation(&cfg).map_err(|e| e.to_string())?;
    let mean: Vec<f64> = rec.u_min.iter().zip(&rec.u_max).map(|(a, b)| 0.5 * (a + b)).collect();
    let spread: Vec<f64> = rec.u_min.iter().zip(&rec.u_max).map(|(a, b)| (b - a) / b.abs()).collect();
    // plateau: near-homogeneous and the mean moves < 1% over 0.1 time units
    let lag = 10;
    let plateau = (1..mean.len() - lag)
        .find(|&k| spread[k] < 0.01 && spread[k + lag] < 0.01 && ((mean[k + lag] - mean[k]) / mean[k]).abs() < 0.01)
        .ok_or("no near-homogeneous plateau")?;
    let (t_plateau, u_plateau) = (rec.times[plateau], mean[plateau]);
    let (peak, peak_at) =
        spread[plateau..]
            .iter()
            .enumerate()
            .fold((0.0f64, 0), |(m, at), (k, &s)| if s > m { (s, plateau + k) } else { (m, at) });
    ensure(peak > 0.1, format!("largest heterogeneity {peak:.3} after the plateau"))?;
    let final_variation = relative_variation(&rec.final_u);
    ensure(final_variation < 1e-3, format!("final state not homogeneous ({final_variation:.2e})"))?;
    let u_final = rec.final_u.iter().sum::<f64>() / rec.final_u.len() as f64;
    let change = (u_final - u_plateau).abs() / u_plateau;
    let msg = format!(
        "plateau u={u_plateau:.5} at t={t_plateau:.2}, transient (max-min)/max={peak:.2} at t={:.2}, final u={u_final:.5}",
        rec.times[peak_at]
    );
    ensure(change > 0.1, msg.clone())?;
    Ok(msg)
}

fn criterion_11() -> Check {
    let p = KineticParams::default();
    let rows = full_vs_reduced_consistency(&equilibrium(&p), &p, 1, &[1e2, 1e3, 1e4], Execution::Parallel)
        .map_err(|e| e.to_string())?;
    let gaps: Vec<f64> = rows.iter().map(|r| r.gap.unwrap_or(f64::NAN)).collect();
    let approaching =
        rows.windows(2).all(|w| w[0].root_full < w[1].root_full && w[1].root_full.unwrap() < w[1].root_reduced);
    let msg = format!("gaps {:.3}% {:.3}% {:.3}%", 100.0 * gaps[0], 100.0 * gaps[1], 100.0 * gaps[2]);
    ensure(gaps.windows(2).all(|w| w[1] < w[0]) && approaching && gaps[2] < 0.01, msg.clone())?;
    Ok(msg)
}

fn main() -> ExitCode {
    let criteria: [(fn() -> Check, Duration); 11] = [
        (criterion_1, Duration::from_secs(5)),
        (criterion_2, Duration::from_secs(30)),
        (criterion_3, Duration::from_secs(10)),
        (criterion_4, Duration::from_secs(5)),
        (criterion_5, Duration::from_secs(5)),
        (criterion_6, Duration::from_secs(180)),
        (criterion_7, Duration::from_secs(600)),
        (criterion_8, Duration::from_secs(120)),
        (criterion_9, Duration::from_secs(5)),
        (criterion_10, Duration::from_secs(300)),
        (criterion_11, Duration::from_secs(10)),
    ];
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (k, (check, budget)) in criteria.iter().enumerate() {
        let name = format!("criterion_{}", k + 1);
        if filter.as_deref().is_some_and(|f| !name.contains(f)) {
            continue;
        }
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if elapsed > *budget => Err(format!("{msg}; took {elapsed:.1?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("{name}: PASS ({elapsed:.1?}) {msg}"),
            Err(msg) => {
                failed += 1;
                println!("{name}: FAIL ({elapsed:.1?}) {msg}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
