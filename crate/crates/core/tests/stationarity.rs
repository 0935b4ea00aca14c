use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vlmc::logspace::LogAccumulator;
use vlmc::problems::NormalExponential;
use vlmc::quadrature::{weighted_cumulant_quadrature_u, weighted_evidence_quadrature};
use vlmc::samplers::SliceChain;
use vlmc::stats::{bin_index, chi_square_critical_99, chi_square_statistic};
use vlmc::{Point, TargetProblem, WeightFunction};

/// Cumulative of `p(x)W(L(x))` on a fine grid, normalized.
fn target_cdf(p: &NormalExponential, w: &WeightFunction, xs: &[f64]) -> Vec<f64> {
    let dens: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let pt = Point::scalar(x);
            p.log_prior_density(&pt) + w.log_cumulative(p.log_likelihood(&pt)).unwrap()
        })
        .collect();
    let m = dens.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut cum = vec![0.0; xs.len()];
    for i in 1..xs.len() {
        let (a, b) = ((dens[i - 1] - m).exp(), (dens[i] - m).exp());
        cum[i] = cum[i - 1] + 0.5 * (a + b) * (xs[i] - xs[i - 1]);
    }
    let total = cum[xs.len() - 1];
    cum.iter().map(|c| c / total).collect()
}

fn x_marginal_chi_square(w: &WeightFunction, seed: u64) -> (f64, f64) {
    let p = NormalExponential::default();
    // dense near the likelihood peak, coarse in the exponential tail
    let mut xs: Vec<f64> = (0..=200_000).map(|i| 40.0 * i as f64 / 200_000.0).collect();
    xs.extend((1..=50_000).map(|i| 40.0 + 3960.0 * i as f64 / 50_000.0));
    let cdf = target_cdf(&p, w, &xs);

    let bins = 50;
    let mut edges = Vec::with_capacity(bins - 1);
    let mut j = 0;
    for b in 1..bins {
        let t = b as f64 / bins as f64;
        while cdf[j + 1] < t {
            j += 1;
        }
        let f = (t - cdf[j]) / (cdf[j + 1] - cdf[j]);
        edges.push(xs[j] + f * (xs[j + 1] - xs[j]));
    }
    let probs = vec![1.0 / bins as f64; bins];

    let mut chain = SliceChain::new(&p, w, ChaCha8Rng::seed_from_u64(seed));
    for _ in 0..1000 {
        chain.step().unwrap();
    }
    let mut counts = vec![0u64; bins];
    for i in 0..1_000_000 {
        let st = chain.step().unwrap();
        if i % 10 == 0 {
            counts[bin_index(&edges, st.x.coords()[0])] += 1;
        }
    }
    (
        chi_square_statistic(&counts, &probs).unwrap(),
        chi_square_critical_99(bins - 1).unwrap(),
    )
}

#[test]
fn x_marginal_matches_weighted_target_power() {
    let (stat, crit) = x_marginal_chi_square(&WeightFunction::power(0.5).unwrap(), 101);
    assert!(stat <= crit, "{stat} > {crit}");
}

#[test]
fn x_marginal_matches_weighted_target_default() {
    let p: Arc<dyn TargetProblem> = Arc::new(NormalExponential::default());
    let w = WeightFunction::truncated_inverse_cumulant(p, 0.01).unwrap();
    let (stat, crit) = x_marginal_chi_square(&w, 102);
    assert!(stat <= crit, "{stat} > {crit}");
}

#[test]
fn weighted_normalizer_matches_prior_average() {
    let p = NormalExponential::default();
    let arc: Arc<dyn TargetProblem> = Arc::new(p.clone());
    let weights = [
        WeightFunction::power(0.5).unwrap(),
        WeightFunction::truncated_inverse_cumulant(arc.clone(), 0.01).unwrap(),
        WeightFunction::point_mass_mixture(0.2, WeightFunction::power(0.3).unwrap()).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let draws: Vec<f64> = (0..1_000_000)
        .map(|_| p.log_likelihood(&p.sample_prior(&mut rng)))
        .collect();
    for w in &weights {
        let mut acc = LogAccumulator::default();
        for &y in &draws {
            acc.push(w.log_cumulative(y).unwrap());
        }
        let mc = acc.ln() - (draws.len() as f64).ln();
        let by_s = weighted_evidence_quadrature(&p, w, 100_000).unwrap().ln();
        let by_u = weighted_cumulant_quadrature_u(&p, w, 100_000).unwrap().ln();
        assert!((mc - by_s).abs() < 0.01, "{}: mc {mc} vs {by_s}", w.label());
        assert!(
            (by_u - by_s).abs() < 1e-4,
            "{}: {by_u} vs {by_s}",
            w.label()
        );
    }
}
