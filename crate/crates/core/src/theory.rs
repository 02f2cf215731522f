//! Closed-form predictions: survival fixed point, giant-component size and
//! nullity laws, idealized exploration trajectory, subcritical extreme-value
//! window, and leading-order closed forms for percolated r-regular graphs.

use serde::Serialize;

use crate::degree::DegreeDistribution;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tilt::CrEstimate;

/// Smallest fixed point of the size-biased generating map and the derived
/// giant-component fractions.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SurvivalSolution<T> {
    /// Smallest z in [0, 1] with z = sum_d q_d z^{d-1}.
    pub z: T,
    /// Asymptotic fraction of vertices in the giant component.
    pub rho: T,
    /// Asymptotic nullity of the giant component per vertex.
    pub rho_star: T,
    /// False when the branching factor is at most 1 (degenerate solution).
    pub supercritical: bool,
}

/// Point on the idealized exploration trajectory.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrajectoryPoint<T> {
    pub tau: T,
    pub z: T,
    /// Idealized walk height per vertex: z f'(z) - f'(z)^2 / mu1.
    pub x: T,
    /// Idealized unreached-stub count per vertex: z f'(z).
    pub u: T,
    /// dx/dtau, by closed-form differentiation.
    pub xdot: T,
    /// d2x/dtau2, by analytic differentiation of the drift equation.
    pub xddot: T,
    /// Local branching term w = z f''(z) / f'(z).
    pub w: T,
}

impl<T: Scalar> TrajectoryPoint<T> {
    /// Right side of the drift ODE: -1 + w (1 - 2x/u). Equals `xdot` on the
    /// trajectory; the residual is a consistency diagnostic.
    pub fn drift_rhs(&self) -> T {
        -T::one() + self.w * (T::one() - T::of(2.0) * self.x / self.u)
    }
}

/// Limit-law prediction battery for the supercritical regime.
#[derive(Debug, Clone, Serialize)]
pub struct SupercriticalPrediction<T> {
    pub n: u64,
    pub epsilon: T,
    /// epsilon^3 n, the asymptotic strength parameter.
    pub big_lambda: T,
    pub z: T,
    pub rho: T,
    pub rho_star: T,
    pub mean_l1: T,
    pub var_l1: T,
    pub mean_n1: T,
    pub var_n1: T,
    pub cov_l1_n1: T,
    /// Always sqrt(3/5) under the asymptotic formulas.
    pub corr_l1_n1: T,
    /// a = -xdot(rho), the trajectory slope magnitude at the giant's end.
    pub slope_at_rho: T,
    /// Scale of the second component: eps^{-2} log(eps^3 n).
    pub l2_scale: T,
    /// Expected degree-d counts inside the giant: n_d (1 - z^d).
    pub l1_degree: Vec<(usize, T)>,
    pub warnings: Vec<String>,
}

/// Limit-law prediction battery for the subcritical window.
#[derive(Debug, Clone, Serialize)]
pub struct SubcriticalPrediction<T> {
    pub n: u64,
    pub epsilon: T,
    pub big_lambda: T,
    /// Tilt root of the size-biased offset law.
    pub a_n: T,
    /// Decay rate delta_n = -log sum_d q_d e^{a_n (d-2)}.
    pub delta_n: T,
    /// Leading form eps^2 / (2 v0) of delta_n.
    pub delta_asymptotic: T,
    /// Gumbel scale constant c = c_{2,Z} (2 v0)^{-3/2} mu1 / 2.
    pub c: T,
    /// Same constant built from the near-critical heuristic 2/(sigma sqrt(2 pi)).
    pub c_heuristic: T,
    /// Fit details for the c_{2,Z} tail constant.
    pub c2_estimate: CrEstimate<T>,
    pub warnings: Vec<String>,
}

impl<T: Scalar> SubcriticalPrediction<T> {
    /// Window location: delta_n^{-1} (log Lambda - (5/2) log log Lambda + x).
    pub fn window(&self, x: T) -> T {
        let log_l = self.big_lambda.ln();
        (log_l - T::of(2.5) * log_l.ln() + x) / self.delta_n
    }

    /// Predicted limit law of the centered maximum: exp(-c e^{-x}).
    pub fn limit_cdf(&self, x: T) -> T {
        (-self.c * (-x).exp()).exp()
    }
}

/// Leading-order closed forms for percolated r-regular graphs.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RRegularReport<T> {
    pub r: u32,
    pub epsilon: T,
    pub n: u64,
    /// Giant fraction: 2 eps r / (r - 2).
    pub rho0: T,
    /// Per-vertex variance scale: 2 eps^{-1} r / (r - 1).
    pub sigma_sq: T,
    /// Subcritical rate: (r - 1) eps^2 / (2 (r - 2)).
    pub delta: T,
    pub alpha0: T,
    pub alpha2: T,
    pub beta: T,
}

/// Solves z = sum_d q_d z^{d-1} for the smallest root in [0, 1], then
/// evaluates rho and rho*.
///
/// Upward fixed-point iteration from 0 converges to the smallest fixed point
/// of the monotone map; a bisection polish pins the residual below 1e-12.
/// Branching factor at most 1 yields the degenerate solution (z = 1).
pub fn solve_survival<T: Scalar>(dist: &DegreeDistribution<T>) -> Result<SurvivalSolution<T>> {
    let lambda = dist.branching_factor()?;
    if lambda <= T::one() {
        return Ok(SurvivalSolution {
            z: T::one(),
            rho: T::zero(),
            rho_star: T::zero(),
            supercritical: false,
        });
    }
    let sb = dist.size_biased()?;
    let g = |z: T| -> T {
        sb.q
            .iter()
            .map(|&(d, q)| if d == 1 { q } else { q * z.powi(d as i32 - 1) })
            .sum()
    };
    let mut z = T::zero();
    let tol = T::of(1e-15);
    let mut converged = false;
    for _ in 0..1_000_000u32 {
        let next = g(z);
        if (next - z).abs() <= tol {
            z = next;
            converged = true;
            break;
        }
        z = next;
    }
    if !converged {
        return Err(Error::FixedPointDiverged);
    }
    // polish: g(z) - z changes sign from >= 0 below the smallest root to < 0
    // just above it
    let h = |z: T| g(z) - z;
    if h(z).abs() > T::zero() {
        let mut lo = z;
        let mut hi = z + T::of(1e-12);
        let mut grew = true;
        while h(hi) >= T::zero() {
            let width = (hi - lo) * T::of(2.0);
            hi = lo + width;
            if hi >= T::one() {
                hi = T::one();
                grew = false;
                break;
            }
        }
        if grew || h(hi) < T::zero() {
            for _ in 0..200 {
                let mid = (lo + hi) / T::of(2.0);
                if h(mid) >= T::zero() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            z = lo;
        }
    }
    let mu1 = dist.mu1();
    let survival = T::one() - dist.p0() - dist.pgf(z, 0)?;
    let two = T::of(2.0);
    let rho_star = dist.p0() + dist.pgf(z, 0)? - mu1 * z * z / two - T::one() + mu1 / two;
    Ok(SurvivalSolution {
        z,
        rho: survival,
        rho_star,
        supercritical: true,
    })
}

/// Leading-order giant fraction and nullity: 2 mu1^2 eps / mu3 and
/// (2 mu1^3 / (3 mu3^2)) eps^3.
pub fn asymptotic_rho<T: Scalar>(dist: &DegreeDistribution<T>) -> Result<(T, T)> {
    let eps = dist.epsilon()?;
    if eps <= T::zero() {
        return Err(Error::NotSupercritical(eps.to_f64().unwrap_or(f64::NAN)));
    }
    let mu1 = dist.mu1();
    let mu3 = dist.mu3();
    let two = T::of(2.0);
    let rho = two * mu1 * mu1 * eps / mu3;
    let rho_star = two * mu1.powi(3) * eps.powi(3) / (T::of(3.0) * mu3 * mu3);
    Ok((rho, rho_star))
}

/// Evaluates the idealized trajectory at rescaled time `tau`.
///
/// The time change solves f(z) + tau = f(1); for sequences without isolated
/// vertices f(1) = 1 and this is the textbook parametrization. Keeping f(1)
/// on the right makes x(rho) = 0 hold verbatim when degree-0 vertices are
/// present (they are never reached by the exploration).
pub fn trajectory<T: Scalar>(dist: &DegreeDistribution<T>, tau: T) -> Result<TrajectoryPoint<T>> {
    let f_at_one = dist.pgf(T::one(), 0)?;
    let slack = T::of(1e-12);
    if tau < -slack || tau > f_at_one + slack {
        return Err(Error::TauOutOfRange(
            tau.to_f64().unwrap_or(f64::NAN),
            f_at_one.to_f64().unwrap_or(f64::NAN),
        ));
    }
    let tau = tau.max(T::zero()).min(f_at_one);
    let target = f_at_one - tau;
    // f is increasing on [0, 1]
    let mut lo = T::zero();
    let mut hi = T::one();
    for _ in 0..200 {
        let mid = (lo + hi) / T::of(2.0);
        if dist.pgf(mid, 0)? <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let z = (lo + hi) / T::of(2.0);
    let mu1 = dist.mu1();
    let f1 = dist.pgf(z, 1)?;
    let f2 = dist.pgf(z, 2)?;
    let f3 = dist.pgf(z, 3)?;
    let two = T::of(2.0);
    let u = z * f1;
    let x = z * f1 - f1 * f1 / mu1;
    let w = z * f2 / f1;
    let xdot = -T::one() - w + two * f2 / mu1;
    let xddot = -(two * f1 * f1 * f3 + mu1 * z * f2 * f2
        - mu1 * f1 * f2
        - mu1 * z * f1 * f3)
        / (f1.powi(3) * mu1);
    Ok(TrajectoryPoint {
        tau,
        z,
        x,
        u,
        xdot,
        xddot,
        w,
    })
}

/// Prediction battery for the supercritical regime at size `n`.
pub fn supercritical_prediction<T: Scalar>(
    dist: &DegreeDistribution<T>,
    n: u64,
) -> Result<SupercriticalPrediction<T>> {
    let eps = dist.epsilon()?;
    if eps <= T::zero() {
        return Err(Error::NotSupercritical(eps.to_f64().unwrap_or(f64::NAN)));
    }
    let sol = solve_survival(dist)?;
    let mu1 = dist.mu1();
    let mu3 = dist.mu3();
    let nf = T::of_u64(n);
    let two = T::of(2.0);
    let big_lambda = eps.powi(3) * nf;
    let mut warnings = Vec::new();
    if big_lambda < T::one() {
        warnings.push(format!(
            "eps^3 n = {big_lambda} is below 1; the supercritical limit laws do not apply"
        ));
    } else if big_lambda < T::of(100.0) {
        warnings.push(format!(
            "eps^3 n = {big_lambda} is small; asymptotic formulas are weak"
        ));
    }
    let var_l1 = two * mu1 * nf / eps;
    let var_n1 = T::of(10.0) * mu1.powi(3) * eps.powi(3) * nf / (T::of(3.0) * mu3 * mu3);
    let cov = two * mu1 * mu1 * eps * nf / mu3;
    let corr = cov / (var_l1 * var_n1).sqrt();
    let slope = -trajectory(dist, sol.rho)?.xdot;
    let l2_scale = big_lambda.ln() / (eps * eps);
    let l1_degree = dist
        .probs()
        .iter()
        .enumerate()
        .filter(|&(d, &p)| d > 0 && p > T::zero())
        .map(|(d, &p)| (d, p * nf * (T::one() - sol.z.powi(d as i32))))
        .collect();
    Ok(SupercriticalPrediction {
        n,
        epsilon: eps,
        big_lambda,
        z: sol.z,
        rho: sol.rho,
        rho_star: sol.rho_star,
        mean_l1: sol.rho * nf,
        var_l1,
        mean_n1: sol.rho_star * nf,
        var_n1,
        cov_l1_n1: cov,
        corr_l1_n1: corr,
        slope_at_rho: slope,
        l2_scale,
        l1_degree,
        warnings,
    })
}

/// Prediction battery for the subcritical window at size `n`.
pub fn subcritical_prediction<T: Scalar>(
    dist: &DegreeDistribution<T>,
    n: u64,
) -> Result<SubcriticalPrediction<T>> {
    let eps = -dist.epsilon()?;
    if eps <= T::zero() {
        return Err(Error::NotSubcritical(
            (-eps).to_f64().unwrap_or(f64::NAN),
        ));
    }
    let sb = dist.size_biased()?;
    let z = sb.eta_minus_two()?;
    if !z.has_positive_support() {
        return Err(Error::NoPositiveSupport);
    }
    let nf = T::of_u64(n);
    let big_lambda = eps.powi(3) * nf;
    if big_lambda < T::of(3.0) {
        return Err(Error::WindowTooSmall(big_lambda.to_f64().unwrap_or(0.0)));
    }
    let mut warnings = Vec::new();
    if big_lambda < T::of(100.0) {
        warnings.push(format!(
            "|eps|^3 n = {big_lambda} is small; window asymptotics are weak"
        ));
    }
    let tilt = z.tilt()?;
    let c2 = z.estimate_cr(2)?;
    if c2.flagged {
        warnings.push(format!(
            "c_2 tail fit residual {} exceeds 20%; scale constant is tentative",
            c2.residual
        ));
    }
    let mu1 = dist.mu1();
    let two = T::of(2.0);
    let scale = (two * sb.v0).powf(T::of(-1.5)) * mu1 / two;
    Ok(SubcriticalPrediction {
        n,
        epsilon: eps,
        big_lambda,
        a_n: tilt.a,
        delta_n: tilt.delta,
        delta_asymptotic: eps * eps / (two * sb.v0),
        c: c2.fitted * scale,
        c_heuristic: c2.heuristic * scale,
        c2_estimate: c2,
        warnings,
    })
}

/// Leading-order closed forms for a percolated r-regular graph at branching
/// offset `eps` (positive above the window, negative below; magnitudes are
/// used where only the scale matters).
pub fn rregular_closed_forms<T: Scalar>(r: u32, eps: T, n: u64) -> Result<RRegularReport<T>> {
    if r < 3 {
        return Err(Error::RegularDegreeTooSmall(r));
    }
    let rf = T::of_u64(r as u64);
    let one = T::one();
    let two = T::of(2.0);
    let eps_abs = eps.abs();
    Ok(RRegularReport {
        r,
        epsilon: eps,
        n,
        rho0: two * eps * rf / (rf - two),
        sigma_sq: two * rf / ((rf - one) * eps_abs),
        delta: (rf - one) * eps * eps / (two * (rf - two)),
        alpha0: (rf - two) / (rf - one),
        alpha2: (rf - two) / rf,
        beta: (rf - one) / rf,
    })
}
