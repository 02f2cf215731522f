//! Reference simulation of the critical-window limit object: reflected
//! drifted Brownian motion with Poisson marks, sampled on a grid.

use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::Serialize;

use crate::components::ComponentStats;
use crate::degree::DegreeDistribution;
use crate::error::{Error, Result};

/// Parameters of the limit process
/// `W(s) = sqrt(alpha0) B(s) + alpha1 s - alpha2 s^2 / 2`, reflected at its
/// running minimum, with marks at rate beta * height.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LimitParams {
    pub alpha0: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta: f64,
    /// Grid step.
    pub ds: f64,
    /// Simulation horizon.
    pub s_max: f64,
}

impl LimitParams {
    /// Default grid: the horizon is pushed until the drift alpha1 - alpha2 s
    /// is strongly negative (alpha2 s_max >= |alpha1| + 6 sqrt(alpha0)), and
    /// the step is 1e-4 of the horizon.
    pub fn new(alpha0: f64, alpha1: f64, alpha2: f64, beta: f64) -> Result<Self> {
        if !(alpha0 > 0.0) || !(alpha2 > 0.0) || !(beta >= 0.0) {
            return Err(Error::InvalidLimitParams(format!(
                "need alpha0 > 0, alpha2 > 0, beta >= 0; got ({alpha0}, {alpha2}, {beta})"
            )));
        }
        let s_max = (alpha1.abs() + 6.0 * alpha0.sqrt()) / alpha2;
        Ok(Self {
            alpha0,
            alpha1,
            alpha2,
            beta,
            ds: 1e-4 * s_max,
            s_max,
        })
    }

    pub fn with_grid(mut self, ds: f64, s_max: f64) -> Result<Self> {
        if !(ds > 0.0) || !(s_max > 0.0) || ds > 1e-3 * s_max {
            return Err(Error::InvalidLimitParams(format!(
                "need 0 < ds <= 1e-3 * s_max; got ds = {ds}, s_max = {s_max}"
            )));
        }
        self.ds = ds;
        self.s_max = s_max;
        Ok(self)
    }

    /// True when excursions reaching past the horizon are negligible: drift
    /// at the horizon at most -5 sqrt(alpha0 / s_max).
    pub fn horizon_ok(&self) -> bool {
        self.alpha1 - self.alpha2 * self.s_max <= -5.0 * (self.alpha0 / self.s_max).sqrt()
    }
}

/// Sorted excursions of one simulated path.
#[derive(Debug, Clone, Serialize)]
pub struct ExcursionSample {
    /// (length, marks), sorted by length descending.
    pub excursions: Vec<(f64, u64)>,
    pub horizon: f64,
    pub rng_algorithm: &'static str,
}

impl ExcursionSample {
    pub fn largest_length(&self) -> f64 {
        self.excursions.first().map_or(0.0, |e| e.0)
    }

    pub fn largest_marks(&self) -> u64 {
        self.excursions.first().map_or(0, |e| e.1)
    }
}

/// Euler grid walk of the drifted Brownian motion with reflection at the
/// running minimum; marks are per-cell Poisson with mean beta * B * ds.
/// Excursions shorter than two grid cells are discarded as grid noise.
pub fn simulate_limit<R: Rng>(params: &LimitParams, rng: &mut R) -> ExcursionSample {
    let steps = (params.s_max / params.ds).round() as usize;
    let noise = (params.alpha0 * params.ds).sqrt();
    let mut w = 0.0f64;
    let mut min_w = 0.0f64;
    let mut excursions: Vec<(f64, u64, usize)> = Vec::new();
    let mut run_start: Option<usize> = None;
    let mut run_marks = 0u64;
    for i in 0..=steps {
        let b = w - min_w;
        if b > 0.0 {
            if run_start.is_none() {
                run_start = Some(i);
                run_marks = 0;
            }
            let mean = params.beta * b * params.ds;
            if mean > 0.0 {
                run_marks += Poisson::new(mean).unwrap().sample(rng) as u64;
            }
        } else if let Some(start) = run_start.take() {
            excursions.push(((i - start) as f64 * params.ds, run_marks, start));
        }
        // advance to grid point i + 1
        let s = i as f64 * params.ds;
        let gauss: f64 = StandardNormal.sample(rng);
        w += (params.alpha1 - params.alpha2 * s) * params.ds + noise * gauss;
        if w < min_w {
            min_w = w;
        }
    }
    if let Some(start) = run_start.take() {
        excursions.push(((steps + 1 - start) as f64 * params.ds, run_marks, start));
    }
    excursions.retain(|&(len, _, _)| len >= 2.0 * params.ds);
    excursions.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then(a.2.cmp(&b.2))
    });
    ExcursionSample {
        excursions: excursions.into_iter().map(|(l, m, _)| (l, m)).collect(),
        horizon: params.s_max,
        rng_algorithm: crate::rng::RNG_ALGORITHM,
    }
}

/// Limit parameters matching a degree distribution at size n:
/// alpha0 = mu3/mu1, alpha2 = mu3/mu1^2, beta = 1/mu1,
/// alpha1 = n^{1/3} (lambda - 1).
pub fn params_from_distribution(dist: &DegreeDistribution<f64>, n: u64) -> Result<LimitParams> {
    let mu1 = dist.mu1();
    let mu3 = dist.mu3();
    if !(mu1 > 0.0) {
        return Err(Error::NoStubs);
    }
    if !(mu3 > 0.0) {
        return Err(Error::DegenerateLimit);
    }
    let lambda = dist.branching_factor()?;
    let alpha1 = (n as f64).cbrt() * (lambda - 1.0);
    LimitParams::new(mu3 / mu1, alpha1, mu3 / (mu1 * mu1), 1.0 / mu1)
}

/// Rescales component sizes to the critical scale: (n^{-2/3} size, nullity),
/// largest first.
pub fn rescale_components(stats: &ComponentStats, n: u64) -> Vec<(f64, u64)> {
    let scale = (n as f64).powf(-2.0 / 3.0);
    stats
        .components()
        .iter()
        .map(|c| (c.size as f64 * scale, c.nullity as u64))
        .collect()
}

/// CSV emission `run,rank,length,marks` for a batch of samples.
pub fn write_excursion_csv<W: Write>(samples: &[ExcursionSample], mut w: W) -> Result<()> {
    writeln!(w, "run,rank,length,marks")?;
    for (run, sample) in samples.iter().enumerate() {
        for (rank, &(len, marks)) in sample.excursions.iter().enumerate() {
            writeln!(w, "{run},{},{len},{marks}", rank + 1)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::Multigraph;
    use crate::rng::derive_stream;

    fn critical_3_regular_params() -> LimitParams {
        LimitParams::new(0.5, 0.0, 1.0 / 3.0, 2.0 / 3.0).unwrap()
    }

    #[test]
    fn zero_beta_gives_zero_marks() {
        let params = LimitParams::new(0.5, 0.0, 1.0 / 3.0, 0.0).unwrap();
        let mut rng = derive_stream(41, 0);
        let sample = simulate_limit(&params, &mut rng);
        assert!(!sample.excursions.is_empty());
        assert!(sample.excursions.iter().all(|&(_, m)| m == 0));
    }

    #[test]
    fn strong_negative_drift_kills_excursions() {
        let params = LimitParams::new(1.0, -1000.0, 1.0, 1.0)
            .unwrap()
            .with_grid(1e-4, 1.0)
            .unwrap();
        let mut rng = derive_stream(42, 0);
        let mut small = 0;
        let runs = 200;
        for _ in 0..runs {
            if simulate_limit(&params, &mut rng).largest_length() < 0.01 {
                small += 1;
            }
        }
        assert!(small >= (runs as f64 * 0.99) as u32, "small = {small}");
    }

    #[test]
    fn lengths_positive_and_sorted() {
        let params = critical_3_regular_params();
        let mut rng = derive_stream(43, 0);
        for _ in 0..10 {
            let sample = simulate_limit(&params, &mut rng);
            let lengths: Vec<f64> = sample.excursions.iter().map(|e| e.0).collect();
            assert!(lengths.iter().all(|&l| l >= 2.0 * params.ds));
            assert!(lengths.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn params_from_critical_3_regular() {
        let dist = DegreeDistribution::<f64>::r_regular_percolated(3, 0.5).unwrap();
        let params = params_from_distribution(&dist, 100_000).unwrap();
        assert!((params.alpha0 - 0.5).abs() < 1e-12);
        assert!((params.alpha2 - 1.0 / 3.0).abs() < 1e-12);
        assert!((params.beta - 2.0 / 3.0).abs() < 1e-12);
        assert!(params.alpha1.abs() < 1e-9);
        assert!(params.horizon_ok());
    }

    #[test]
    fn params_alpha1_scales_with_offset() {
        // p1 = p3 = 1/2 thinned to criticality at p = 2/3, then nudged
        let base = DegreeDistribution::from_weights(&[0.0f64, 0.5, 0.0, 0.5]).unwrap();
        let crit = base.thinned(2.0 / 3.0).unwrap();
        assert!((crit.branching_factor().unwrap() - 1.0).abs() < 1e-12);
        let p = params_from_distribution(&crit, 1_000_000).unwrap();
        assert!(p.alpha1.abs() < 1e-9);

        let nudged = base.thinned(2.0 / 3.0 + 0.001).unwrap();
        let lambda = nudged.branching_factor().unwrap();
        let p = params_from_distribution(&nudged, 1_000_000).unwrap();
        assert!((p.alpha1 - 100.0 * (lambda - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn degenerate_third_moment_rejected() {
        let dist = DegreeDistribution::from_weights(&[0.0, 0.5, 0.5]).unwrap();
        assert!(matches!(
            params_from_distribution(&dist, 1000),
            Err(Error::DegenerateLimit)
        ));
    }

    #[test]
    fn rescaling_components() {
        let g = Multigraph {
            n: 1_000_000,
            edges: (0..999u32).map(|i| (i, i + 1)).collect(),
        };
        let stats = crate::components::component_stats(&g);
        let rescaled = rescale_components(&stats, 1_000_000);
        assert!((rescaled[0].0 - 0.1).abs() < 1e-12);
        assert_eq!(rescaled[0].1, 0);

        let empty = Multigraph { n: 0, edges: vec![] };
        let stats = crate::components::component_stats(&empty);
        assert!(rescale_components(&stats, 1).is_empty());
    }

    #[test]
    fn marks_total_is_poisson_on_a_fixed_path() {
        // regenerate marks over one frozen path; total must be Poisson with
        // mean beta * sum(B) * ds  (chi-square GOF over binned counts)
        let params = critical_3_regular_params();
        let mut rng = derive_stream(44, 0);
        let steps = (params.s_max / params.ds).round() as usize;
        let noise = (params.alpha0 * params.ds).sqrt();
        let mut w = 0.0;
        let mut min_w: f64 = 0.0;
        let mut heights = Vec::with_capacity(steps + 1);
        for i in 0..=steps {
            heights.push(w - min_w);
            let s = i as f64 * params.ds;
            let gauss: f64 = rand_distr::Distribution::sample(&StandardNormal, &mut rng);
            w += (params.alpha1 - params.alpha2 * s) * params.ds + noise * gauss;
            min_w = min_w.min(w);
        }
        let mean_total: f64 = heights.iter().map(|b| params.beta * b * params.ds).sum();
        let reps = 1500;
        let mut totals = Vec::with_capacity(reps);
        for _ in 0..reps {
            let mut total = 0u64;
            for &b in &heights {
                let m = params.beta * b * params.ds;
                if m > 0.0 {
                    total += Poisson::new(m).unwrap().sample(&mut rng) as u64;
                }
            }
            totals.push(total);
        }
        // integer bin edges roughly one Poisson sd apart around the mean
        let sd = mean_total.sqrt();
        let edges: Vec<u64> = (-3..=3)
            .map(|k| (mean_total + k as f64 * sd).max(0.0).floor() as u64)
            .collect();
        let mut observed = vec![0.0; edges.len() + 1];
        for &t in &totals {
            let mut bin = 0;
            while bin < edges.len() && t >= edges[bin] {
                bin += 1;
            }
            observed[bin] += 1.0;
        }
        use statrs::distribution::{DiscreteCDF, Poisson as PoissonCdf};
        let reference = PoissonCdf::new(mean_total).unwrap();
        let mut expected = Vec::with_capacity(observed.len());
        let mut prev = 0.0;
        for &e in &edges {
            // bin boundary is "value < e", so cdf up to e - 1
            let c = if e == 0 { 0.0 } else { reference.cdf(e - 1) };
            expected.push((c - prev) * reps as f64);
            prev = c;
        }
        expected.push((1.0 - prev) * reps as f64);
        let res = crate::stats::chi_square_gof(&observed, &expected);
        assert!(res.p_value > 0.005, "p = {}", res.p_value);
    }

    #[test]
    fn csv_format() {
        let samples = vec![ExcursionSample {
            excursions: vec![(0.5, 3), (0.25, 0)],
            horizon: 10.0,
            rng_algorithm: crate::rng::RNG_ALGORITHM,
        }];
        let mut buf = Vec::new();
        write_excursion_csv(&samples, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "run,rank,length,marks\n0,1,0.5,3\n0,2,0.25,0\n"
        );
    }
}
