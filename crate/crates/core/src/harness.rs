//! Seeded Monte Carlo campaigns across the three regimes, with statistical
//! verdicts against the closed-form predictions and file emission.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::components;
use crate::critical;
use crate::degree::{DegreeDistribution, DegreeSequence};
use crate::error::{Error, Result};
use crate::exploration::{self, ExploreOptions};
use crate::generator::{self, Multigraph, Pairing};
use crate::rng::{derive_stream, RNG_ALGORITHM};
use crate::stats;
use crate::theory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Supercritical,
    Subcritical,
    Critical,
}

/// Degree input: explicit counts, or a percolated r-regular family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum SequenceSpec {
    /// `{"counts": {"0": 10, "1": 500, "3": 490}}`
    #[serde(rename = "counts")]
    Counts(BTreeMap<String, u64>),
    /// `{"rregular": {"r": 3, "p": 0.55, "n": 100000}}`: an r-regular
    /// multigraph whose edges are kept with probability p.
    #[serde(rename = "rregular")]
    RRegular { r: u32, p: f64, n: u64 },
}

impl SequenceSpec {
    fn parsed_counts(&self) -> Result<BTreeMap<usize, u64>> {
        match self {
            SequenceSpec::Counts(map) => map
                .iter()
                .map(|(k, &v)| {
                    k.parse::<usize>()
                        .map(|d| (d, v))
                        .map_err(|_| Error::InvalidConfig(format!("bad degree key {k:?}")))
                })
                .collect(),
            SequenceSpec::RRegular { .. } => unreachable!(),
        }
    }

    /// Sequence the generator materializes (pre-percolation for rregular).
    pub fn graph_sequence(&self) -> Result<DegreeSequence> {
        match self {
            SequenceSpec::Counts(_) => DegreeSequence::new(self.parsed_counts()?),
            SequenceSpec::RRegular { r, n, .. } => DegreeSequence::regular(*r as usize, *n),
        }
    }

    /// Edge-keeping probability applied after pairing, when any.
    pub fn percolation(&self) -> Option<f64> {
        match self {
            SequenceSpec::Counts(_) => None,
            SequenceSpec::RRegular { p, .. } => Some(*p),
        }
    }

    /// Distribution the predictions are computed from (idealized binomial
    /// fractions for the percolated family).
    pub fn theory_distribution(&self) -> Result<DegreeDistribution<f64>> {
        match self {
            SequenceSpec::Counts(_) => Ok(self.graph_sequence()?.distribution()),
            SequenceSpec::RRegular { r, p, .. } => {
                DegreeDistribution::r_regular_percolated(*r, *p)
            }
        }
    }

    pub fn n(&self) -> Result<u64> {
        match self {
            SequenceSpec::Counts(_) => Ok(self.graph_sequence()?.n()),
            SequenceSpec::RRegular { n, .. } => Ok(*n),
        }
    }
}

fn default_significance() -> f64 {
    0.01
}

fn default_explore_fraction() -> f64 {
    0.1
}

fn default_limit_runs() -> u32 {
    2000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub regime: Regime,
    pub sequence: SequenceSpec,
    pub replicas: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_significance")]
    pub significance: f64,
    /// Overrides the regime consistency guard.
    #[serde(default)]
    pub force: bool,
    /// Fraction of replicas re-measured by the exploration walk and compared
    /// exactly against union-find.
    #[serde(default = "default_explore_fraction")]
    pub explore_check_fraction: f64,
    /// Reference runs of the limit process (critical regime).
    #[serde(default = "default_limit_runs")]
    pub limit_runs: u32,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicas < 2 {
            return Err(Error::InvalidConfig("need at least 2 replicas".into()));
        }
        let n = self.sequence.n()?;
        if n < 1_000 {
            return Err(Error::InvalidConfig(format!(
                "n = {n} is below the minimum campaign size 1000"
            )));
        }
        if !(0.0..1.0).contains(&self.significance) {
            return Err(Error::InvalidConfig(format!(
                "significance {} outside (0, 1)",
                self.significance
            )));
        }
        if !(0.0..=1.0).contains(&self.explore_check_fraction) {
            return Err(Error::InvalidConfig(
                "explore_check_fraction outside [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// Per-replica measurements. Runtime stays out of the CSV so reruns are
/// byte-identical.
#[derive(Debug, Clone, Serialize)]
pub struct ReplicaRow {
    pub replica: u32,
    pub l1: u64,
    pub n1: u64,
    pub l2: u64,
    /// Degree profile of the largest component, indexed by degree.
    pub profile: Vec<u64>,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TestResult {
    pub name: String,
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub pass: bool,
    /// Whether this test gates the campaign verdict.
    pub gating: bool,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct EmpiricalSummary {
    pub mean_l1: f64,
    pub var_l1: f64,
    pub mean_n1: f64,
    pub var_n1: f64,
    pub cov_l1_n1: f64,
    pub corr_l1_n1: f64,
    pub median_l1: f64,
    pub mean_l2: f64,
}

/// Campaign result: replica rows, summary statistics, test verdicts and the
/// prediction snapshot.
#[derive(Debug, Clone, Serialize)]
pub struct MCReport {
    pub regime: Regime,
    pub n: u64,
    pub replicas: u32,
    pub seed: u64,
    pub significance: f64,
    pub rng_algorithm: &'static str,
    #[serde(skip)]
    pub rows: Vec<ReplicaRow>,
    pub empirical: EmpiricalSummary,
    /// Primary standardized sample (theory-standardized L1, window variate x,
    /// or rescaled L1 depending on regime).
    #[serde(skip)]
    pub standardized: Vec<f64>,
    #[serde(skip)]
    pub standardized_n1: Vec<f64>,
    /// Reference sample for two-sample tests (critical regime).
    #[serde(skip)]
    pub reference: Vec<f64>,
    #[serde(skip)]
    pub reference_marks: Vec<u64>,
    pub tests: Vec<TestResult>,
    pub prediction: serde_json::Value,
    pub explore_checked: u32,
    pub warnings: Vec<String>,
    pub wall_seconds: f64,
}

impl MCReport {
    pub fn gating_tests_pass(&self) -> bool {
        self.tests.iter().filter(|t| t.gating).all(|t| t.pass)
    }

    pub fn test(&self, name: &str) -> Option<&TestResult> {
        self.tests.iter().find(|t| t.name == name)
    }
}

struct ReplicaOutcome {
    row: ReplicaRow,
    explored: bool,
}

/// One replica: pairing, optional percolation, union-find statistics, and an
/// exact exploration cross-check on the configured fraction of replicas.
fn run_replica(
    config: &ExperimentConfig,
    graph_seq: &DegreeSequence,
    dmax: usize,
    k: u32,
) -> Result<ReplicaOutcome> {
    let start = Instant::now();
    let mut rng = derive_stream(config.seed, k as u64);
    let pairing = generator::generate_pairing(graph_seq, &mut rng)?;
    let mut graph = generator::to_multigraph(&pairing);
    if let Some(p) = config.sequence.percolation() {
        graph = generator::percolate(&graph, p, &mut rng)?;
    }
    let stats = components::component_stats(&graph);
    let check_count =
        (config.explore_check_fraction * config.replicas as f64).ceil() as u32;
    let explored = k < check_count;
    if explored {
        let trace = exploration::replay_on_pairing(
            &Pairing::from_multigraph(&graph),
            &mut rng,
            &ExploreOptions::default(),
        )?;
        if trace.size_nullity_multiset() != stats.size_nullity_multiset() {
            return Err(Error::InvalidConfig(format!(
                "exploration/union-find mismatch on replica {k}"
            )));
        }
    }
    let profile_map = components::largest_component_degree_profile(&graph, &stats);
    let mut profile = vec![0u64; dmax + 1];
    for (d, c) in profile_map {
        if d <= dmax {
            profile[d] = c;
        }
    }
    Ok(ReplicaOutcome {
        row: ReplicaRow {
            replica: k,
            l1: stats.l1() as u64,
            n1: stats.n1() as u64,
            l2: stats.l2() as u64,
            profile,
            runtime_ms: start.elapsed().as_secs_f64() * 1e3,
        },
        explored,
    })
}

fn collect_rows(config: &ExperimentConfig) -> Result<(Vec<ReplicaRow>, u32)> {
    let graph_seq = config.sequence.graph_sequence()?;
    let dmax = graph_seq.dmax();
    let outcomes: Vec<ReplicaOutcome> = (0..config.replicas)
        .into_par_iter()
        .map(|k| run_replica(config, &graph_seq, dmax, k))
        .collect::<Result<Vec<_>>>()?;
    let explored = outcomes.iter().filter(|o| o.explored).count() as u32;
    Ok((outcomes.into_iter().map(|o| o.row).collect(), explored))
}

fn empirical_summary(rows: &[ReplicaRow]) -> EmpiricalSummary {
    let l1: Vec<f64> = rows.iter().map(|r| r.l1 as f64).collect();
    let n1: Vec<f64> = rows.iter().map(|r| r.n1 as f64).collect();
    let l2: Vec<f64> = rows.iter().map(|r| r.l2 as f64).collect();
    let var_l1 = stats::variance(&l1);
    let var_n1 = stats::variance(&n1);
    let cov = stats::covariance(&l1, &n1);
    let corr = if var_l1 > 0.0 && var_n1 > 0.0 {
        cov / (var_l1 * var_n1).sqrt()
    } else {
        0.0
    };
    EmpiricalSummary {
        mean_l1: stats::mean(&l1),
        var_l1,
        mean_n1: stats::mean(&n1),
        var_n1,
        cov_l1_n1: cov,
        corr_l1_n1: corr,
        median_l1: stats::median(&l1),
        mean_l2: stats::mean(&l2),
    }
}

/// Supercritical campaign: theory-standardized normality of L1 and N1,
/// variance ratios, size/nullity correlation, and the second-component bound.
pub fn run_supercritical(config: &ExperimentConfig) -> Result<MCReport> {
    config.validate()?;
    let wall = Instant::now();
    let dist = config.sequence.theory_distribution()?;
    let n = config.sequence.n()?;
    let eps = dist.epsilon()?;
    if eps <= 0.0 && !config.force {
        return Err(Error::RegimeMismatch(format!(
            "supercritical campaign with epsilon = {eps}"
        )));
    }
    let pred = theory::supercritical_prediction(&dist, n)?;
    let (rows, explore_checked) = collect_rows(config)?;
    let empirical = empirical_summary(&rows);

    let sd_l1 = pred.var_l1.sqrt();
    let sd_n1 = pred.var_n1.sqrt();
    let standardized: Vec<f64> = rows
        .iter()
        .map(|r| (r.l1 as f64 - pred.mean_l1) / sd_l1)
        .collect();
    let standardized_n1: Vec<f64> = rows
        .iter()
        .map(|r| (r.n1 as f64 - pred.mean_n1) / sd_n1)
        .collect();

    let r = rows.len() as f64;
    let mut tests = Vec::new();
    let se_l1 = sd_l1 / r.sqrt();
    let mean_dev = (empirical.mean_l1 - pred.mean_l1).abs() / se_l1;
    tests.push(TestResult {
        name: "mean_l1_within_3se".into(),
        statistic: mean_dev,
        p_value: None,
        pass: mean_dev <= 3.0,
        gating: true,
    });
    let var_ratio = empirical.var_l1 / pred.var_l1;
    tests.push(TestResult {
        name: "var_l1_ratio".into(),
        statistic: var_ratio,
        p_value: None,
        pass: (0.75..=1.25).contains(&var_ratio),
        gating: true,
    });
    let ks = stats::ks_one_sample(&standardized, stats::normal_cdf);
    tests.push(TestResult {
        name: "ks_l1_standard_normal".into(),
        statistic: ks.statistic,
        p_value: Some(ks.p_value),
        pass: ks.p_value > config.significance,
        gating: true,
    });
    tests.push(TestResult {
        name: "corr_l1_n1_band".into(),
        statistic: empirical.corr_l1_n1,
        p_value: None,
        pass: (0.65..=0.88).contains(&empirical.corr_l1_n1),
        gating: true,
    });
    let se_n1 = sd_n1 / r.sqrt();
    let mean_n1_dev = (empirical.mean_n1 - pred.mean_n1).abs() / se_n1;
    tests.push(TestResult {
        name: "mean_n1_within_3se".into(),
        statistic: mean_n1_dev,
        p_value: None,
        pass: mean_n1_dev <= 3.0,
        gating: true,
    });
    let var_n1_ratio = empirical.var_n1 / pred.var_n1;
    tests.push(TestResult {
        name: "var_n1_ratio".into(),
        statistic: var_n1_ratio,
        p_value: None,
        pass: (0.7..=1.3).contains(&var_n1_ratio),
        gating: true,
    });
    let ks_n1 = stats::ks_one_sample(&standardized_n1, stats::normal_cdf);
    tests.push(TestResult {
        name: "ks_n1_standard_normal".into(),
        statistic: ks_n1.statistic,
        p_value: Some(ks_n1.p_value),
        pass: ks_n1.p_value > config.significance,
        gating: false,
    });
    // shape-only normality diagnostic: standardize by the sample moments, so
    // Gaussianity is tested separately from the variance formula
    let l1s: Vec<f64> = rows.iter().map(|r| r.l1 as f64).collect();
    let (m, sd) = (stats::mean(&l1s), stats::variance(&l1s).sqrt());
    let self_std: Vec<f64> = l1s.iter().map(|x| (x - m) / sd).collect();
    let ks_shape = stats::ks_one_sample(&self_std, stats::normal_cdf);
    tests.push(TestResult {
        name: "ks_l1_self_standardized".into(),
        statistic: ks_shape.statistic,
        p_value: Some(ks_shape.p_value),
        pass: ks_shape.p_value > config.significance,
        gating: false,
    });
    let l2_ratios: Vec<f64> = rows
        .iter()
        .map(|row| row.l2 as f64 / pred.l2_scale)
        .collect();
    let l2_p95 = stats::percentile(&l2_ratios, 0.95);
    tests.push(TestResult {
        name: "l2_ratio_p95_bounded".into(),
        statistic: l2_p95,
        p_value: None,
        pass: l2_p95 <= 10.0,
        gating: true,
    });

    Ok(MCReport {
        regime: Regime::Supercritical,
        n,
        replicas: config.replicas,
        seed: config.seed,
        significance: config.significance,
        rng_algorithm: RNG_ALGORITHM,
        rows,
        empirical,
        standardized,
        standardized_n1,
        reference: Vec::new(),
        reference_marks: Vec::new(),
        tests,
        prediction: serde_json::to_value(&pred)?,
        explore_checked,
        warnings: pred.warnings.clone(),
        wall_seconds: wall.elapsed().as_secs_f64(),
    })
}

/// Subcritical campaign: the largest component against the Gumbel-form
/// window, both location-pinned (estimated scale constant, non-gating) and
/// shape-only (location freed, gating).
pub fn run_subcritical(config: &ExperimentConfig) -> Result<MCReport> {
    config.validate()?;
    let wall = Instant::now();
    let dist = config.sequence.theory_distribution()?;
    let n = config.sequence.n()?;
    let eps = dist.epsilon()?;
    if eps >= 0.0 && !config.force {
        return Err(Error::RegimeMismatch(format!(
            "subcritical campaign with epsilon = {eps}"
        )));
    }
    let pred = theory::subcritical_prediction(&dist, n)?;
    let (rows, explore_checked) = collect_rows(config)?;
    let empirical = empirical_summary(&rows);

    let log_l = pred.big_lambda.ln();
    let center = log_l - 2.5 * log_l.ln();
    let xs: Vec<f64> = rows
        .iter()
        .map(|row| pred.delta_n * row.l1 as f64 - center)
        .collect();

    let mut tests = Vec::new();
    let median_x = stats::median(&xs);
    tests.push(TestResult {
        name: "median_l1_window".into(),
        statistic: median_x,
        p_value: None,
        pass: (-2.0..=2.0).contains(&median_x),
        gating: true,
    });
    let c = pred.c;
    let pinned = stats::ks_one_sample(&xs, |x| stats::gumbel_form_cdf(x, c));
    tests.push(TestResult {
        name: "ks_gumbel_pinned_c".into(),
        statistic: pinned.statistic,
        p_value: Some(pinned.p_value),
        pass: pinned.p_value > config.significance,
        gating: false,
    });
    // location freed: recenter the sample median onto the c = 1 form's median
    let shape_median = -(std::f64::consts::LN_2.ln());
    let shifted: Vec<f64> = xs.iter().map(|x| x - median_x + shape_median).collect();
    let shape = stats::ks_one_sample(&shifted, |x| stats::gumbel_form_cdf(x, 1.0));
    tests.push(TestResult {
        name: "ks_gumbel_shape_only".into(),
        statistic: shape.statistic,
        p_value: Some(shape.p_value),
        pass: shape.p_value > config.significance,
        gating: true,
    });
    // location and scale freed: at moderate eps^3 n the window still carries
    // a higher effective rate (the (5/2) log log correction's slope), so this
    // moment-matched variant isolates the distributional shape
    let euler_gamma = 0.577_215_664_901_532_9_f64;
    let (mx, sx) = (stats::mean(&xs), stats::variance(&xs).sqrt());
    let gumbel_sd = std::f64::consts::PI / 6.0f64.sqrt();
    let affine: Vec<f64> = xs
        .iter()
        .map(|x| (x - mx) / sx * gumbel_sd + euler_gamma)
        .collect();
    let affine_ks = stats::ks_one_sample(&affine, |x| stats::gumbel_form_cdf(x, 1.0));
    tests.push(TestResult {
        name: "ks_gumbel_affine".into(),
        statistic: affine_ks.statistic,
        p_value: Some(affine_ks.p_value),
        pass: affine_ks.p_value > config.significance,
        gating: false,
    });

    Ok(MCReport {
        regime: Regime::Subcritical,
        n,
        replicas: config.replicas,
        seed: config.seed,
        significance: config.significance,
        rng_algorithm: RNG_ALGORITHM,
        rows,
        empirical,
        standardized: xs,
        standardized_n1: Vec::new(),
        reference: Vec::new(),
        reference_marks: Vec::new(),
        tests,
        prediction: serde_json::to_value(&pred)?,
        explore_checked,
        warnings: pred.warnings.clone(),
        wall_seconds: wall.elapsed().as_secs_f64(),
    })
}

/// Critical campaign: rescaled largest components against the simulated
/// limit process (two-sample KS on sizes, binned chi-square on marks).
pub fn run_critical(config: &ExperimentConfig) -> Result<MCReport> {
    config.validate()?;
    let wall = Instant::now();
    let dist = config.sequence.theory_distribution()?;
    let n = config.sequence.n()?;
    let lambda = dist.branching_factor()?;
    let alpha1 = (n as f64).cbrt() * (lambda - 1.0);
    if alpha1.abs() > 10.0 && !config.force {
        return Err(Error::RegimeMismatch(format!(
            "critical campaign with n^(1/3) (lambda - 1) = {alpha1}"
        )));
    }
    let params = critical::params_from_distribution(&dist, n)?;
    let (rows, explore_checked) = collect_rows(config)?;
    let empirical = empirical_summary(&rows);

    let scale = (n as f64).powf(-2.0 / 3.0);
    let standardized: Vec<f64> = rows.iter().map(|r| r.l1 as f64 * scale).collect();
    let n1s: Vec<u64> = rows.iter().map(|r| r.n1).collect();

    // limit runs live in a disjoint stream range so growing the replica
    // count never perturbs them (and vice versa)
    const LIMIT_STREAM_BASE: u64 = 1 << 32;
    let limit: Vec<critical::ExcursionSample> = (0..config.limit_runs)
        .into_par_iter()
        .map(|j| {
            let mut rng = derive_stream(config.seed, LIMIT_STREAM_BASE + j as u64);
            critical::simulate_limit(&params, &mut rng)
        })
        .collect();
    let reference: Vec<f64> = limit.iter().map(|s| s.largest_length()).collect();
    let reference_marks: Vec<u64> = limit.iter().map(|s| s.largest_marks()).collect();

    let mut tests = Vec::new();
    let ks = stats::ks_two_sample(&standardized, &reference);
    tests.push(TestResult {
        name: "ks_l1_vs_limit_excursion".into(),
        statistic: ks.statistic,
        p_value: Some(ks.p_value),
        pass: ks.p_value > config.significance,
        gating: true,
    });
    let chi = stats::chi_square_two_sample(&n1s, &reference_marks);
    tests.push(TestResult {
        name: "chi2_n1_vs_limit_marks".into(),
        statistic: chi.statistic,
        p_value: Some(chi.p_value),
        pass: chi.p_value > config.significance,
        gating: true,
    });

    let mut warnings = Vec::new();
    if !params.horizon_ok() {
        warnings.push("limit-process horizon drift is weak; lengthen s_max".into());
    }
    Ok(MCReport {
        regime: Regime::Critical,
        n,
        replicas: config.replicas,
        seed: config.seed,
        significance: config.significance,
        rng_algorithm: RNG_ALGORITHM,
        rows,
        empirical,
        standardized,
        standardized_n1: Vec::new(),
        reference,
        reference_marks,
        tests,
        prediction: serde_json::to_value(params)?,
        explore_checked,
        warnings,
        wall_seconds: wall.elapsed().as_secs_f64(),
    })
}

/// Writes `replicas.csv`, `summary.json` and `plotdata.csv` under `dir`.
/// Replica rows carry no timing, so identical seeds give identical bytes.
pub fn emit_report(report: &MCReport, dir: &Path) -> Result<()> {
    if report.rows.is_empty() {
        return Err(Error::EmptyReport);
    }
    std::fs::create_dir_all(dir)?;
    let mut csv = Vec::new();
    let dmax = report.rows[0].profile.len();
    write!(csv, "replica,L1,N1,L2")?;
    for d in 0..dmax {
        write!(csv, ",L1d_{d}")?;
    }
    writeln!(csv)?;
    for row in &report.rows {
        write!(csv, "{},{},{},{}", row.replica, row.l1, row.n1, row.l2)?;
        for &c in &row.profile {
            write!(csv, ",{c}")?;
        }
        writeln!(csv)?;
    }
    std::fs::write(dir.join("replicas.csv"), csv)?;

    let json = serde_json::to_string_pretty(report)?;
    std::fs::write(dir.join("summary.json"), json)?;

    let mut plot = Vec::new();
    writeln!(plot, "index,sample,reference")?;
    let mut sorted = report.standardized.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut sorted_reference = report.reference.clone();
    sorted_reference.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let gumbel_c = report
        .prediction
        .get("c")
        .and_then(|v| v.as_f64())
        .unwrap_or(1.0);
    let m = sorted.len();
    for (i, &x) in sorted.iter().enumerate() {
        let q = (i as f64 + 0.5) / m as f64;
        let reference = match report.regime {
            Regime::Supercritical => stats::normal_quantile(q),
            // inverse of exp(-c e^{-x})
            Regime::Subcritical => -(-q.ln() / gumbel_c).ln(),
            Regime::Critical if sorted_reference.len() >= 2 => {
                let pos = q * (sorted_reference.len() as f64 - 1.0);
                let lo = pos.floor() as usize;
                let hi = pos.ceil() as usize;
                sorted_reference[lo] + (sorted_reference[hi] - sorted_reference[lo]) * (pos - lo as f64)
            }
            Regime::Critical => f64::NAN,
        };
        writeln!(plot, "{i},{x},{reference}")?;
    }
    std::fs::write(dir.join("plotdata.csv"), plot)?;
    Ok(())
}

/// Full theory report for a sequence spec: survival solution plus whichever
/// regime predictions apply.
pub fn theory_report(spec: &SequenceSpec, n_override: Option<u64>) -> Result<serde_json::Value> {
    let dist = spec.theory_distribution()?;
    let n = n_override.map_or_else(|| spec.n(), Ok)?;
    let eps = dist.epsilon()?;
    let survival = theory::solve_survival(&dist)?;
    let mut out = serde_json::json!({
        "n": n,
        "epsilon": eps,
        "lambda": dist.branching_factor()?,
        "mu1": dist.mu1(),
        "mu2": dist.mu2(),
        "mu3": dist.mu3(),
        "v0": dist.size_biased()?.v0,
        "simplicity_probability": dist.simplicity_probability()?,
        "z": survival.z,
        "rho": survival.rho,
        "rho_star": survival.rho_star,
        "supercritical": survival.supercritical,
    });
    let obj = out.as_object_mut().unwrap();
    let mut warnings: Vec<String> = Vec::new();
    if spec.graph_sequence().is_ok() {
        let seq = spec.graph_sequence()?;
        if seq.scaling_warning(crate::degree::DEFAULT_C0) {
            warnings.push(format!(
                "fraction of vertices with degree outside {{0,2}} is {:.4}, below {}",
                seq.non_trivial_fraction(),
                crate::degree::DEFAULT_C0
            ));
        }
    }
    if eps > 0.0 {
        let pred = theory::supercritical_prediction(&dist, n)?;
        warnings.extend(pred.warnings.clone());
        obj.insert("supercritical_prediction".into(), serde_json::to_value(&pred)?);
        let (rho_a, rho_star_a) = theory::asymptotic_rho(&dist)?;
        obj.insert(
            "asymptotic".into(),
            serde_json::json!({"rho": rho_a, "rho_star": rho_star_a}),
        );
    } else if eps < 0.0 {
        match theory::subcritical_prediction(&dist, n) {
            Ok(pred) => {
                warnings.extend(pred.warnings.clone());
                obj.insert("subcritical_prediction".into(), serde_json::to_value(&pred)?);
            }
            Err(e) => warnings.push(format!("subcritical prediction unavailable: {e}")),
        }
    }
    match critical::params_from_distribution(&dist, n) {
        Ok(params) => {
            obj.insert("critical_params".into(), serde_json::to_value(params)?);
        }
        Err(e) => warnings.push(format!("critical parameters unavailable: {e}")),
    }
    obj.insert("warnings".into(), serde_json::to_value(&warnings)?);
    Ok(out)
}

/// Generates one multigraph per the spec (with optional simplicity
/// conditioning), for the `generate` CLI verb.
pub fn generate_graph(
    spec: &SequenceSpec,
    seed: u64,
    simple: bool,
    max_attempts: u32,
) -> Result<(Multigraph, u32)> {
    let seq = spec.graph_sequence()?;
    let mut rng = derive_stream(seed, 0);
    let (mut graph, attempts) = if simple {
        let sample = generator::generate_simple(&seq, &mut rng, max_attempts)?;
        (sample.graph, sample.attempts)
    } else {
        let pairing = generator::generate_pairing(&seq, &mut rng)?;
        (generator::to_multigraph(&pairing), 1)
    };
    if let Some(p) = spec.percolation() {
        graph = generator::percolate(&graph, p, &mut rng)?;
    }
    Ok((graph, attempts))
}

/// Required summary fields; used by tests and downstream tooling to validate
/// emitted JSON.
pub const SUMMARY_SCHEMA_FIELDS: &[(&str, &str)] = &[
    ("regime", "string"),
    ("n", "number"),
    ("replicas", "number"),
    ("seed", "number"),
    ("significance", "number"),
    ("rng_algorithm", "string"),
    ("empirical", "object"),
    ("tests", "array"),
    ("prediction", "object"),
    ("explore_checked", "number"),
    ("warnings", "array"),
    ("wall_seconds", "number"),
];

/// Checks an emitted summary against [`SUMMARY_SCHEMA_FIELDS`].
pub fn validate_summary_schema(value: &serde_json::Value) -> std::result::Result<(), String> {
    let obj = value.as_object().ok_or("summary is not an object")?;
    for &(field, kind) in SUMMARY_SCHEMA_FIELDS {
        let v = obj
            .get(field)
            .ok_or_else(|| format!("missing field {field}"))?;
        let ok = match kind {
            "string" => v.is_string(),
            "number" => v.is_number(),
            "object" => v.is_object(),
            "array" => v.is_array(),
            _ => false,
        };
        if !ok {
            return Err(format!("field {field} is not a {kind}"));
        }
    }
    for t in obj["tests"].as_array().unwrap() {
        for key in ["name", "statistic", "pass", "gating"] {
            if t.get(key).is_none() {
                return Err(format!("test entry missing {key}"));
            }
        }
    }
    Ok(())
}
