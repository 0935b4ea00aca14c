//! Acceptance run: one PASS/FAIL line per criterion, INFO lines for
//! supporting figures. Exits nonzero if any criterion fails.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use vlmc::problems::{
    mvt_true_log_evidence, DiscreteEnergyModel, MultivariateTNormal, NormalExponential,
};
use vlmc::quadrature::{cumulant_quadrature_s, cumulant_quadrature_y};
use vlmc::samplers::{
    empirical_holding_frequency, energy_level_sampler, estimate_prior_monte_carlo,
    estimate_weighted_slice, nested_shrinkage_check, ordinate_law_chi_square,
    ordinate_transition_probability, wang_landau_run, EnergyMode, EnergyRun, SamplerConfig,
    SliceChain, StepSchedule,
};
use vlmc::special::{kummer_u, QuadratureSpec};
use vlmc::stats::{sample_variance, within_multinomial_bands};
use vlmc::{Point, TargetProblem, WeightFunction};
use vlmc_cli::{
    run_benchmark, BenchmarkTable, ExperimentConfig, MethodSpec, ProblemSpec, WeightSpec,
};

struct Outcome {
    failed: usize,
}

impl Outcome {
    fn report(&mut self, id: u32, passed: bool, detail: String) {
        println!(
            "{} criterion {id}: {detail}",
            if passed { "PASS" } else { "FAIL" }
        );
        if !passed {
            self.failed += 1;
        }
    }
}

fn info(msg: String) {
    println!("INFO {msg}");
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn criterion_1(out: &mut Outcome) {
    let (z, t) = timed(|| mvt_true_log_evidence(2.0, 1.0, 50).unwrap());
    let target = 1.95e-29f64.ln();
    let err = (z - target).abs();
    out.report(
        1,
        err < 1e-3 && t < Duration::from_secs(1),
        format!(
            "ln Z(mvt, nu=2, tau=1, d=50) = {z:.6} (Z = {:.6e}), |ln Z - ln 1.95e-29| = {err:.2e} (tol 1e-3), {:.3}s",
            z.exp(),
            t.as_secs_f64()
        ),
    );
}

fn mvt_bench(methods: Vec<MethodSpec>) -> BenchmarkTable {
    let cfg = ExperimentConfig {
        problem: ProblemSpec::Mvt {
            nu: 2.0,
            tau: 1.0,
            dim: 50,
        },
        methods,
        repetitions: 20,
        samples: 10_000,
        burn_in: 1_000,
        seed: 20150601,
        out_dir: PathBuf::from("unused"),
        bins: 50,
        thin: 1,
        mcmc_steps: 20,
    };
    run_benchmark(&cfg).unwrap()
}

fn criterion_2(out: &mut Outcome) {
    let (table, t) = timed(|| {
        mvt_bench(vec![
            MethodSpec::WeightedSlice {
                weight: WeightSpec::Default { eta: None },
            },
            MethodSpec::Nested {
                live_points: 50,
                iterations: 10_000,
                remainder: false,
            },
            MethodSpec::Harmonic,
        ])
    });
    let z = table.true_log_z;
    for r in &table.rows {
        info(format!(
            "table: {:<40} mean Z {:.4e}  RMSE {:.4e}  mean ln Z {:.4}  sd ln Z {:.4}  evals {:.0}",
            r.method,
            r.mean_z(),
            r.rmse(),
            r.mean_log_z,
            r.std_log_z,
            r.mean_likelihood_evals
        ));
    }
    let (ws, ns, hm) = (&table.rows[0], &table.rows[1], &table.rows[2]);
    let two = 2f64.ln();
    let ws_ok = (ws.ln_mean_z - z).abs() <= two;
    let ns_ok = (ns.ln_mean_z - z).abs() <= two;
    let hm_orders = (hm.ln_mean_z - z) / std::f64::consts::LN_10;
    let order_ok = ws.ln_rmse < ns.ln_rmse && ns.ln_rmse < hm.ln_rmse;
    let time_ok = t < Duration::from_secs(600);
    out.report(
        2,
        ws_ok && ns_ok && hm_orders >= 10.0 && order_ok && time_ok,
        format!(
            "weighted-slice mean/Z = {:.3}, nested mean/Z = {:.3} (within 2x: {ws_ok}, {ns_ok}); harmonic exceeds Z by {hm_orders:.1} orders; RMSE ws {:.3e} < nested {:.3e} < harmonic {:.3e}: {order_ok}; {:.1}s",
            (ws.ln_mean_z - z).exp(),
            (ns.ln_mean_z - z).exp(),
            ws.rmse(),
            ns.rmse(),
            hm.rmse(),
            t.as_secs_f64()
        ),
    );
    for (row, reference) in [(ws, 9.98e-30f64), (ns, 1.87e-29), (hm, 6.87e-13)] {
        let ratio = row.rmse() / reference;
        info(format!(
            "RMSE band for {}: {:.3e} vs reference {reference:.3e}, ratio {ratio:.3} (within 3x: {})",
            row.method,
            row.rmse(),
            (1.0 / 3.0..=3.0).contains(&ratio)
        ));
    }

    let wide = mvt_bench(vec![MethodSpec::WeightedSlice {
        weight: WeightSpec::Default { eta: Some(0.01) },
    }]);
    let r = &wide.rows[0];
    info(format!(
        "weighted slice with eta = 0.01: mean/Z = {:.3e}, RMSE {:.3e}, sd ln Z {:.3}",
        (r.ln_mean_z - z).exp(),
        r.rmse(),
        r.std_log_z
    ));
}

/// Sample sd of `ln Ẑ` over `reps` runs of prior Monte Carlo and of the
/// weighted slice estimator with the default weight.
fn normexp_spread(p: &NormalExponential, eta: f64, reps: u64) -> (f64, f64) {
    let arc: Arc<dyn TargetProblem> = Arc::new(p.clone());
    let w = WeightFunction::truncated_inverse_cumulant(arc, eta).unwrap();
    let ws: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| {
            estimate_weighted_slice(p, &w, &SamplerConfig::new(11_000, 1_000, 5000 + r))
                .unwrap()
                .0
                .log_z
        })
        .collect();
    let mc: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| {
            estimate_prior_monte_carlo(p, &SamplerConfig::new(10_000, 0, 6000 + r))
                .unwrap()
                .log_z
        })
        .collect();
    (sample_variance(&ws).sqrt(), sample_variance(&mc).sqrt())
}

fn criterion_3(out: &mut Outcome) {
    let ((quad, closed, sd_ws, sd_mc), t) = timed(|| {
        let p = NormalExponential::new(1.0, 5.0, 100.0).unwrap();
        let quad = cumulant_quadrature_y(&p, 100_000).unwrap().ln();
        let closed = p.true_log_evidence().unwrap();
        let (sd_ws, sd_mc) = normexp_spread(&p, 1e-4, 100);
        (quad, closed, sd_ws, sd_mc)
    });
    let quad_ok = (quad - (-4.615)).abs() <= 0.01;
    let ratio = sd_ws / sd_mc;
    out.report(
        3,
        quad_ok && ratio <= 0.2 && t < Duration::from_secs(300),
        format!(
            "normal-exponential (a=1, sigma=5, tau=100): quadrature ln Z = {quad:.4} (closed form {closed:.4}), target -4.615 +- 0.01: {quad_ok}; sd ln Z weighted slice {sd_ws:.4e} / prior MC {sd_mc:.4e} = {ratio:.3} (need <= 0.2); {:.1}s",
            t.as_secs_f64()
        ),
    );
    let sharp = NormalExponential::new(1.0, 0.01, 100.0).unwrap();
    let (a, b) = normexp_spread(&sharp, 1e-4, 100);
    info(format!(
        "sharp likelihood (sigma = 0.01): ln Z = {:.4}, sd ln Z weighted slice {a:.4e} / prior MC {b:.4e} = {:.4}",
        sharp.true_log_evidence().unwrap(),
        a / b
    ));
}

fn criterion_4(out: &mut Outcome) {
    let p = NormalExponential::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for k in [5usize, 20, 50] {
        let r = nested_shrinkage_check(&p, k, 10_000, 700 + k as u64).unwrap();
        ok &= r.within(3.0);
        parts.push(format!(
            "K={k}: {:.5} vs {:.5} ({:+.2} se)",
            r.mean,
            r.expected,
            (r.mean - r.expected) / r.std_error
        ));
    }
    out.report(
        4,
        ok,
        format!("mean Z(y1) over 1e4 first steps, {}", parts.join("; ")),
    );
}

fn criterion_5(out: &mut Outcome) {
    let p = NormalExponential::default();
    let arc: Arc<dyn TargetProblem> = Arc::new(p.clone());
    let weights = [
        WeightFunction::uniform(),
        WeightFunction::power(0.5).unwrap(),
        WeightFunction::truncated_inverse_cumulant(arc, NormalExponential::DEFAULT_ETA).unwrap(),
    ];
    let reports: Vec<_> = weights
        .par_iter()
        .enumerate()
        .map(|(i, w)| {
            let mut chain = SliceChain::new(&p, w, ChaCha8Rng::seed_from_u64(800 + i as u64));
            for _ in 0..1_000 {
                chain.step().unwrap();
            }
            let ys: Vec<f64> = (0..500_000)
                .filter_map(|j| {
                    let y = chain.step().unwrap().log_likelihood;
                    (j % 10 == 0).then_some(y)
                })
                .collect();
            (w.label(), ordinate_law_chi_square(&p, w, &ys, 50).unwrap())
        })
        .collect();
    let ok = reports.iter().all(|(_, r)| r.passed());
    let parts: Vec<String> = reports
        .iter()
        .map(|(l, r)| format!("{l}: {:.2} (crit {:.2})", r.statistic, r.critical))
        .collect();
    out.report(
        5,
        ok,
        format!(
            "ordinate chi-square, 50 bins, 5e4 thinned draws; {}",
            parts.join("; ")
        ),
    );
}

fn criterion_6(out: &mut Outcome) {
    let p = MultivariateTNormal::default();
    let arc: Arc<dyn TargetProblem> = Arc::new(p.clone());
    let w = WeightFunction::truncated_inverse_cumulant(arc, 1e-300).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(900);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let y = p
            .log_inverse_cumulant(rng.random_range(-600.0..-20.0))
            .unwrap();
        let hold = ordinate_transition_probability(&p, &w, y, y).unwrap();
        worst = worst.max((hold - 0.5).abs());
    }
    let r = p
        .radius_sq(p.log_inverse_cumulant(-60.0).unwrap())
        .unwrap()
        .sqrt();
    let mut coords = vec![0.0; p.dim()];
    coords[0] = r;
    let n = 100_000;
    let freq = empirical_holding_frequency(&p, &w, &Point::new(coords), n, &mut rng).unwrap();
    let sd = (0.25 / n as f64).sqrt();
    out.report(
        6,
        worst < 1e-8 && (freq - 0.5).abs() <= 3.0 * sd,
        format!(
            "W = 1/Z on mvt: max |P(y,y) - 1/2| over 20 ordinates = {worst:.2e} (tol 1e-8); empirical holding {freq:.5} ({:+.2} sigma over 1e5 steps)",
            (freq - 0.5) / sd
        ),
    );
}

fn criterion_7(out: &mut Outcome) {
    let m = DiscreteEnergyModel::ising_strip(2, 6, 1.0).unwrap();
    let run = EnergyRun {
        visits: 100_000,
        thin: 500,
        burn_in: 10_000,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let flat = energy_level_sampler(&m, EnergyMode::Multicanonical, run, &mut rng).unwrap();
    let uniform = vec![1.0 / m.n_levels() as f64; m.n_levels()];
    let flat_ok = within_multinomial_bands(&flat, &uniform, 3.0);

    let k = energy_level_sampler(&m, EnergyMode::OneOverK, run, &mut rng).unwrap();
    let raw: Vec<f64> = m
        .density_of_states()
        .iter()
        .zip(m.cumulative_states())
        .map(|(&n, z)| n as f64 / z as f64)
        .collect();
    let total: f64 = raw.iter().sum();
    let k_ok =
        within_multinomial_bands(&k, &raw.iter().map(|r| r / total).collect::<Vec<_>>(), 3.0);

    let theta = wang_landau_run(&m, StepSchedule::ScaledInverseTime, 5_000_000, &mut rng).unwrap();
    let wl_err = theta
        .iter()
        .zip(m.level_masses())
        .map(|(t, e)| ((t - e) / e).abs())
        .fold(0.0, f64::max);
    out.report(
        7,
        flat_ok && k_ok && wl_err < 0.05,
        format!(
            "2x6 strip ({} sites, {} levels): multicanonical within 3 sigma: {flat_ok}; 1/k ensemble within 3 sigma: {k_ok}; Wang-Landau max relative error {wl_err:.4} (tol 0.05)",
            12,
            m.n_levels()
        ),
    );
    let literal = wang_landau_run(&m, StepSchedule::InverseTime, 5_000_000, &mut rng).unwrap();
    let lit_err = literal
        .iter()
        .zip(m.level_masses())
        .map(|(t, e)| ((t - e) / e).abs())
        .fold(0.0, f64::max);
    info(format!(
        "Wang-Landau with step 1/t: max relative error {lit_err:.3}"
    ));
}

fn criterion_8(out: &mut Outcome) {
    let ne = NormalExponential::default();
    let mvt = MultivariateTNormal::default();
    let ne_y = cumulant_quadrature_y(&ne, 100_000).unwrap().ln();
    let ne_s = cumulant_quadrature_s(&ne, 100_000).unwrap().ln();
    let ne_c = ne.true_log_evidence().unwrap();
    let mv_y = cumulant_quadrature_y(&mvt, 100_000).unwrap().ln();
    let mv_s = cumulant_quadrature_s(&mvt, 100_000).unwrap().ln();
    // Z = s^a U(a, b, s) with a = (nu + d)/2 = 26, b = nu/2 + 1 = 2, s = nu/(2 tau) = 1
    let mv_k = kummer_u(26.0, 2.0, 1.0, QuadratureSpec::default())
        .unwrap()
        .ln();
    let spread = |v: &[f64]| {
        v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - v.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let (a, b) = (spread(&[ne_y, ne_s, ne_c]), spread(&[mv_y, mv_s, mv_k]));
    out.report(
        8,
        a < 1e-3 && b < 1e-3,
        format!(
            "normal-exponential y/s/closed = {ne_y:.6}/{ne_s:.6}/{ne_c:.6} (spread {a:.1e}); mvt y/s/Kummer = {mv_y:.6}/{mv_s:.6}/{mv_k:.6} (spread {b:.1e})"
        ),
    );
}

fn main() {
    let mut out = Outcome { failed: 0 };
    criterion_1(&mut out);
    criterion_2(&mut out);
    criterion_3(&mut out);
    criterion_4(&mut out);
    criterion_5(&mut out);
    criterion_6(&mut out);
    criterion_7(&mut out);
    criterion_8(&mut out);
    println!("acceptance: {} of 8 criteria failed", out.failed);
    if out.failed > 0 {
        std::process::exit(1);
    }
}
