//! Larger Monte Carlo checks: exploration deviations against the idealized
//! trajectory, early-stopping consistency, the limit process scaling law and
//! grid stability, and robustness of the predictions under small sequence
//! perturbations.

use rayon::prelude::*;

use cmlab_core::critical::{simulate_limit, LimitParams};
use cmlab_core::degree::{DegreeDistribution, DegreeSequence};
use cmlab_core::exploration::{
    explore, replay_on_pairing, unreached_diagnostic, ExploreOptions,
};
use cmlab_core::generator::generate_pairing;
use cmlab_core::rng::derive_stream;
use cmlab_core::stats::{ks_two_sample, median};
use cmlab_core::theory::{solve_survival, trajectory};

/// Unreached-count deviations from n_d z(t/n)^d stay O(sqrt t): the
/// normalized maximum is below 10 in at least 99% of 200 replicas.
#[test]
fn unreached_deviation_normalized_below_ten() {
    let seq = DegreeSequence::regular(3, 100_000).unwrap();
    let t = 10_000usize;
    let ok: u32 = (0..200u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = derive_stream(7101, k);
            let trace = explore(
                &seq,
                &mut rng,
                &ExploreOptions {
                    mode: Some(5 * t),
                    snapshot_times: vec![t],
                    ..Default::default()
                },
            )
            .unwrap();
            let rows = unreached_diagnostic(&trace, &seq, &[t]).unwrap();
            let max_dev = rows
                .iter()
                .map(|r| r.normalized_deviation)
                .fold(0.0f64, f64::max);
            u32::from(max_dev < 10.0)
        })
        .sum();
    assert!(ok >= 198, "only {ok}/200 replicas within the bound");
}

/// Early stopping returns exactly the components the full run completes
/// within the window; a largest component finishing inside the window is
/// already final.
#[test]
fn early_stop_is_a_prefix_of_the_full_run() {
    let seq = DegreeSequence::regular(3, 10_000).unwrap();
    let window = 6 * 464; // ~ 6 n^{2/3}
    for seed in 0..20u64 {
        let mut rng = derive_stream(7202, seed);
        let pairing = generate_pairing(&seq, &mut rng).unwrap();
        let mut rng_a = derive_stream(7303, seed);
        let full = replay_on_pairing(&pairing, &mut rng_a, &ExploreOptions::default()).unwrap();
        let mut rng_b = derive_stream(7303, seed);
        let early = replay_on_pairing(
            &pairing,
            &mut rng_b,
            &ExploreOptions {
                mode: Some(window),
                ..Default::default()
            },
        )
        .unwrap();
        let k = early.components.len();
        assert_eq!(early.components[..], full.components[..k]);
        if let Some(&(size, nullity)) = full
            .components
            .iter()
            .max_by_key(|&&(s, nu)| (s, std::cmp::Reverse(nu)))
        {
            let boundary_of_largest = full
                .components
                .iter()
                .position(|&c| c == (size, nullity))
                .map(|i| full.boundaries[i])
                .unwrap();
            if boundary_of_largest <= window {
                assert!(early.components.contains(&(size, nullity)));
            }
        }
    }
}

/// Scaling law of the reflected drifted Brownian motion: the largest
/// excursion of B_{a0,a1,a2} matches that of B_{1,a1',1} with time rescaled
/// by a0' (two-sample KS over 2000 runs each).
#[test]
fn limit_process_scaling_law() {
    let (a0, a1, a2) = (0.5f64, 0.6f64, 1.0f64 / 3.0);
    let scale_time = a2.powf(2.0 / 3.0) * a0.powf(-1.0 / 3.0);
    let a1p = a1 * a0.powf(-1.0 / 3.0) * a2.powf(-1.0 / 3.0);

    let base = LimitParams::new(a0, a1, a2, 0.0).unwrap();
    let rescaled = LimitParams::new(1.0, a1p, 1.0, 0.0)
        .unwrap()
        .with_grid(base.ds * scale_time, base.s_max * scale_time)
        .unwrap();

    let runs = 2000u64;
    let sample_a: Vec<f64> = (0..runs)
        .into_par_iter()
        .map(|j| {
            let mut rng = derive_stream(7404, j);
            simulate_limit(&base, &mut rng).largest_length()
        })
        .collect();
    let sample_b: Vec<f64> = (0..runs)
        .into_par_iter()
        .map(|j| {
            let mut rng = derive_stream(7505, j);
            simulate_limit(&rescaled, &mut rng).largest_length() / scale_time
        })
        .collect();
    let ks = ks_two_sample(&sample_a, &sample_b);
    assert!(ks.p_value > 0.01, "KS D = {}, p = {}", ks.statistic, ks.p_value);
}

/// Halving the grid step moves the largest-excursion median by under 2%.
#[test]
fn grid_refinement_stability() {
    let coarse = LimitParams::new(0.5, 0.0, 1.0 / 3.0, 0.0).unwrap();
    let fine = coarse.with_grid(coarse.ds / 2.0, coarse.s_max).unwrap();
    let runs = 15_000u64;
    let largest = |params: LimitParams, salt: u64| -> Vec<f64> {
        (0..runs)
            .into_par_iter()
            .map(|j| {
                let mut rng = derive_stream(salt, j);
                simulate_limit(&params, &mut rng).largest_length()
            })
            .collect()
    };
    let med_coarse = median(&largest(coarse, 7606));
    let med_fine = median(&largest(fine, 7707));
    let rel = (med_fine - med_coarse).abs() / med_coarse;
    assert!(rel < 0.02, "medians {med_coarse} vs {med_fine} differ by {rel}");
}

/// Mean largest-component degree profile tracks n_d (1 - z^d) in the
/// supercritical half-ones-half-threes family (z = 1/3).
#[test]
fn largest_component_profile_matches_prediction() {
    use cmlab_core::components::{component_stats, largest_component_degree_profile};
    use cmlab_core::generator::to_multigraph;

    let n = 20_000u64;
    let seq = DegreeSequence::new(
        [(1usize, n / 2), (3usize, n / 2)].into_iter().collect(),
    )
    .unwrap();
    let replicas = 48u64;
    let profiles: Vec<(u64, u64)> = (0..replicas)
        .into_par_iter()
        .map(|k| {
            let mut rng = derive_stream(7808, k);
            let g = to_multigraph(&generate_pairing(&seq, &mut rng).unwrap());
            let stats = component_stats(&g);
            let profile = largest_component_degree_profile(&g, &stats);
            (
                profile.get(&1).copied().unwrap_or(0),
                profile.get(&3).copied().unwrap_or(0),
            )
        })
        .collect();
    let z: f64 = 1.0 / 3.0;
    for (d, observed) in [
        (1u32, profiles.iter().map(|p| p.0 as f64).collect::<Vec<_>>()),
        (3u32, profiles.iter().map(|p| p.1 as f64).collect::<Vec<_>>()),
    ] {
        let predicted = (n / 2) as f64 * (1.0 - z.powi(d as i32));
        let mean = observed.iter().sum::<f64>() / observed.len() as f64;
        let se = (cmlab_core::stats::variance(&observed) / observed.len() as f64).sqrt();
        let slack = 4.0 * se + 0.005 * predicted;
        assert!(
            (mean - predicted).abs() <= slack,
            "degree {d}: mean {mean} vs predicted {predicted} (se {se})"
        );
    }
}

/// Early-trajectory growth bound: x(tau) > eps tau / 2 for small tau on
/// supercritical sequences.
#[test]
fn trajectory_early_growth_bound() {
    for dist in [
        DegreeDistribution::<f64>::r_regular_percolated(3, 0.55).unwrap(),
        DegreeDistribution::<f64>::r_regular_percolated(4, 0.4).unwrap(),
        DegreeDistribution::from_weights(&[0.0f64, 0.45, 0.0, 0.55]).unwrap(),
    ] {
        let eps = dist.epsilon().unwrap();
        assert!(eps > 0.0);
        for i in 1..=10 {
            let tau = eps / 10.0 * i as f64 / 10.0;
            let x = trajectory(&dist, tau).unwrap().x;
            assert!(x > eps * tau / 2.0, "x({tau}) = {x} vs {}", eps * tau / 2.0);
        }
    }
}

/// Robustness: moving m vertices between degree classes changes rho by
/// O(m / (eps n)) relative; the fitted constant stays modest and the
/// response is monotone in m.
#[test]
fn rho_perturbation_response_is_linear() {
    let n = 100_000u64;
    let eps = 0.1;
    let dist = DegreeDistribution::<f64>::r_regular_percolated(3, (1.0 + eps) / 2.0).unwrap();
    let seq = cmlab_core::degree::realize_counts(&dist, n).unwrap();
    let rho0 = solve_survival(&seq.distribution::<f64>()).unwrap().rho;
    let mut prev = 0.0;
    for &m in &[100u64, 1_000, 5_000] {
        let mut counts = seq.counts().clone();
        // move m vertices from degree 1 to degree 3 (even stub change)
        *counts.get_mut(&1).unwrap() -= m;
        *counts.get_mut(&3).unwrap() += m;
        let perturbed = DegreeSequence::new(counts).unwrap();
        let rho = solve_survival(&perturbed.distribution::<f64>()).unwrap().rho;
        let rel = (rho - rho0).abs() / rho0;
        let k = rel / (m as f64 / (eps * n as f64));
        assert!(k < 20.0, "m = {m}: fitted constant {k}");
        assert!(rel > prev, "response not monotone at m = {m}");
        prev = rel;
    }
}
