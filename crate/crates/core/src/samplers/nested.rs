use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Open01, StandardNormal};

use super::SamplerConfig;
use crate::error::{usage, Result, VlmcError};
use crate::logspace::{ln_add_exp, ln_one_minus_exp, LogAccumulator};
use crate::model::{EvidenceEstimate, Method, OrdinateTrace, Point, TargetProblem};

/// Live-point count, iteration count and the optional live-point
/// remainder term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NestedOptions {
    pub live_points: usize,
    pub iterations: usize,
    pub remainder: bool,
}

impl NestedOptions {
    pub fn new(live_points: usize, iterations: usize) -> Self {
        NestedOptions {
            live_points,
            iterations,
            remainder: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.live_points < 2 {
            return usage(format!(
                "nested sampling needs K >= 2, got {}",
                self.live_points
            ));
        }
        if self.iterations < self.live_points {
            return usage(format!(
                "nested sampling needs n >= K (n={}, K={})",
                self.iterations, self.live_points
            ));
        }
        Ok(())
    }
}

const MAX_REDRAWS: usize = 100;

/// Nested sampling on the grid `s_i = e^{-i/K}` with trapezoid cells.
///
/// The first cell is `y₁(1 - e^{-1/K})`; later cells are
/// `½(y_{i-1} + y_i)(e^{-(i-1)/K} - e^{-i/K})`.
pub struct NestedSampler<'a> {
    problem: &'a dyn TargetProblem,
    k: usize,
    live: Vec<Point>,
    live_ll: Vec<f64>,
    iteration: usize,
    ln_shrink_cell: f64,
    cells: Vec<(f64, f64)>,
    evidence: LogAccumulator,
    previous: f64,
    ordinates: Vec<f64>,
    evals: usize,
    mcmc_steps: usize,
    rng: ChaCha8Rng,
}

impl<'a> NestedSampler<'a> {
    pub fn new(
        problem: &'a dyn TargetProblem,
        live_points: usize,
        config: &SamplerConfig,
    ) -> Result<Self> {
        if live_points < 2 {
            return usage(format!("nested sampling needs K >= 2, got {live_points}"));
        }
        let mut rng = config.rng();
        let live: Vec<Point> = (0..live_points)
            .map(|_| problem.sample_prior(&mut rng))
            .collect();
        let live_ll: Vec<f64> = live.iter().map(|x| problem.log_likelihood(x)).collect();
        Ok(NestedSampler {
            problem,
            k: live_points,
            live,
            live_ll,
            iteration: 0,
            ln_shrink_cell: ln_one_minus_exp(-1.0 / live_points as f64),
            cells: Vec::new(),
            evidence: LogAccumulator::default(),
            previous: f64::NEG_INFINITY,
            ordinates: Vec::new(),
            evals: live_points,
            mcmc_steps: config.mcmc_steps_per_constrained_draw,
            rng,
        })
    }

    pub fn live_log_likelihoods(&self) -> &[f64] {
        &self.live_ll
    }

    pub fn ordinates(&self) -> &[f64] {
        &self.ordinates
    }

    pub fn likelihood_evals(&self) -> usize {
        self.evals
    }

    /// Remove the lowest live point, book its cell, and replace it. Returns
    /// the removed log-likelihood `ln y_i`.
    pub fn step(&mut self) -> Result<f64> {
        let (worst, &y) = self
            .live_ll
            .iter()
            .enumerate()
            .fold(None, |best: Option<(usize, &f64)>, (i, v)| match best {
                Some((_, b)) if *b <= *v => best,
                _ => Some((i, v)),
            })
            .expect("live set is nonempty");
        self.iteration += 1;
        let i = self.iteration as f64;
        let ln_width = -(i - 1.0) / self.k as f64 + self.ln_shrink_cell;
        let ln_height = if self.iteration == 1 {
            y
        } else {
            ln_add_exp(self.previous, y) - std::f64::consts::LN_2
        };
        self.evidence.push(ln_height + ln_width);
        self.cells.push((ln_height, ln_width));
        self.previous = y;
        self.ordinates.push(y);

        let replacement = self.constrained_draw(worst, y)?;
        self.live_ll[worst] = self.problem.log_likelihood(&replacement);
        self.live[worst] = replacement;
        Ok(y)
    }

    /// Draw from the prior restricted to `{L ≥ y}`. When the exact sampler
    /// reports an empty slice (a plateau, or an ordinate that has reached
    /// the supremum in floating point) the random walk takes over.
    fn constrained_draw(&mut self, worst: usize, log_y: f64) -> Result<Point> {
        if self.problem.has_exact_constrained_sampler() {
            for _ in 0..MAX_REDRAWS {
                let x = match self.problem.constrained_prior_sample(&mut self.rng, log_y) {
                    Ok(x) => x,
                    Err(VlmcError::Domain(_)) => return self.random_walk_draw(worst, log_y),
                    Err(e) => return Err(e),
                };
                self.evals += 1;
                if self.problem.log_likelihood(&x) >= log_y {
                    return Ok(x);
                }
            }
            return Err(VlmcError::Runtime(format!(
                "no constrained draw above ln y = {log_y} after {MAX_REDRAWS} attempts"
            )));
        }
        self.random_walk_draw(worst, log_y)
    }

    /// Random-walk Metropolis on the prior within `{L > y}`, started from a
    /// uniformly chosen surviving live point, with per-coordinate step sizes
    /// from the spread of the live set.
    fn random_walk_draw(&mut self, worst: usize, log_y: f64) -> Result<Point> {
        let mut start = self.rng.random_range(0..self.k - 1);
        if start >= worst {
            start += 1;
        }
        let dim = self.live[0].dim();
        let factor = 2.38 / (dim as f64).sqrt();
        let scales: Vec<f64> = (0..dim)
            .map(|j| {
                let vals: Vec<f64> = self.live.iter().map(|p| p.coords()[j]).collect();
                let sd = crate::stats::sample_variance(&vals).sqrt();
                factor * if sd > 0.0 { sd } else { 1e-6 }
            })
            .collect();
        let mut x = self.live[start].clone();
        let mut lp = self.problem.log_prior_density(&x);
        for _ in 0..self.mcmc_steps {
            let mut prop = x.clone();
            for (c, s) in prop.coords_mut().iter_mut().zip(&scales) {
                *c += s * self.rng.sample::<f64, _>(StandardNormal);
            }
            let lp_new = self.problem.log_prior_density(&prop);
            if lp_new == f64::NEG_INFINITY {
                continue;
            }
            let ll_new = self.problem.log_likelihood(&prop);
            self.evals += 1;
            let v: f64 = self.rng.sample(Open01);
            if ll_new >= log_y && v.ln() < lp_new - lp {
                x = prop;
                lp = lp_new;
            }
        }
        Ok(x)
    }

    /// `ln Ẑ` accumulated so far, optionally with the live-point remainder
    /// `e^{-i/K}·mean(L_live)`.
    pub fn log_evidence(&self, remainder: bool) -> f64 {
        let body = self.evidence.ln();
        if !remainder {
            return body;
        }
        let mut live = LogAccumulator::default();
        for &l in &self.live_ll {
            live.push(l);
        }
        let rem = live.ln() - (self.k as f64).ln() - self.iteration as f64 / self.k as f64;
        ln_add_exp(body, rem)
    }

    /// Information `H = Σ (cᵢ/Ẑ) ln(ȳᵢ/Ẑ)`, used for the `√(H/K)` error.
    pub fn information(&self) -> f64 {
        let ln_z = self.evidence.ln();
        let h: f64 = self
            .cells
            .iter()
            .map(|&(height, width)| {
                let weight = (height + width - ln_z).exp();
                if weight > 0.0 {
                    weight * (height - ln_z)
                } else {
                    0.0
                }
            })
            .sum();
        h.max(0.0)
    }
}

/// Run `n` nested-sampling iterations with `K` live points.
pub fn nested_sampling_run(
    problem: &dyn TargetProblem,
    options: NestedOptions,
    config: &SamplerConfig,
) -> Result<(EvidenceEstimate, OrdinateTrace)> {
    options.validate()?;
    if config.mcmc_steps_per_constrained_draw == 0 {
        return usage("need at least one MCMC step per constrained draw");
    }
    let mut sampler = NestedSampler::new(problem, options.live_points, config)?;
    for _ in 0..options.iterations {
        sampler.step()?;
    }
    let log_z = sampler.log_evidence(options.remainder);
    let std_err_log = (sampler.information() / options.live_points as f64).sqrt();
    let trace = if config.record_trace {
        OrdinateTrace {
            ordinates: sampler.ordinates().to_vec(),
            burn_in: 0,
            first_coords: Vec::new(),
        }
    } else {
        OrdinateTrace::default()
    };
    Ok((
        EvidenceEstimate {
            log_z,
            std_err_log,
            n_samples: options.iterations,
            method: Method::Nested,
            likelihood_evals: sampler.likelihood_evals(),
        },
        trace,
    ))
}
