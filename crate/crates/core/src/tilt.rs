//! Lattice-walk numerics: Bernoulli parts, exponential tilting, local limit
//! point probabilities and first-passage tails, with exact dynamic-programming
//! oracles alongside the closed forms.

use std::fmt;
use std::iter::Sum;
use std::ops::AddAssign;

use num_traits::{FromPrimitive, Num};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Numeric bound for construction and the exact (tilting-free) operations.
/// Satisfied by floats and by exact rationals.
pub trait LatticeScalar:
    Num + Clone + PartialOrd + AddAssign + Sum<Self> + FromPrimitive + fmt::Debug
{
}

impl<T> LatticeScalar for T where
    T: Num + Clone + PartialOrd + AddAssign + Sum<Self> + FromPrimitive + fmt::Debug
{
}

/// Probability distribution on a bounded range of integers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeDistribution<T> {
    min: i64,
    probs: Vec<T>,
    mean: T,
    variance: T,
}

impl<T: LatticeScalar> LatticeDistribution<T> {
    /// Builds a distribution supported on `min..min + probs.len()`.
    ///
    /// Probabilities must be non-negative and sum to 1 (within 1e-12 for
    /// inexact scalars; exactly for rationals).
    pub fn new(min: i64, probs: Vec<T>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidLattice("empty support".into()));
        }
        let zero = T::zero();
        if probs.iter().any(|p| *p < zero) {
            return Err(Error::InvalidLattice("negative probability".into()));
        }
        let total: T = probs.iter().cloned().sum();
        let tol = T::from_f64(1e-12).unwrap_or_else(T::zero);
        let dev = if total > T::one() {
            total.clone() - T::one()
        } else {
            T::one() - total.clone()
        };
        if dev > tol {
            return Err(Error::InvalidLattice(format!(
                "probabilities sum to {total:?}"
            )));
        }
        Ok(Self::from_parts(min, probs))
    }

    fn from_parts(min: i64, probs: Vec<T>) -> Self {
        let mut mean = T::zero();
        for (i, p) in probs.iter().enumerate() {
            let x = T::from_i64(min + i as i64).expect("support value");
            mean += x * p.clone();
        }
        let mut variance = T::zero();
        for (i, p) in probs.iter().enumerate() {
            let x = T::from_i64(min + i as i64).expect("support value");
            let d = x - mean.clone();
            variance += d.clone() * d * p.clone();
        }
        Self {
            min,
            probs,
            mean,
            variance,
        }
    }

    /// Convenience constructor from (value, probability) pairs.
    pub fn from_pairs(pairs: &[(i64, T)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidLattice("empty support".into()));
        }
        let min = pairs.iter().map(|&(x, _)| x).min().unwrap();
        let max = pairs.iter().map(|&(x, _)| x).max().unwrap();
        let mut probs = vec![T::zero(); (max - min + 1) as usize];
        for (x, p) in pairs {
            probs[(x - min) as usize] += p.clone();
        }
        Self::new(min, probs)
    }

    pub fn min_support(&self) -> i64 {
        self.min
    }

    pub fn max_support(&self) -> i64 {
        self.min + self.probs.len() as i64 - 1
    }

    /// Largest absolute support value.
    pub fn radius(&self) -> u64 {
        self.min_support()
            .unsigned_abs()
            .max(self.max_support().unsigned_abs())
    }

    pub fn prob(&self, x: i64) -> T {
        if x < self.min || x > self.max_support() {
            T::zero()
        } else {
            self.probs[(x - self.min) as usize].clone()
        }
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn mean(&self) -> T {
        self.mean.clone()
    }

    pub fn variance(&self) -> T {
        self.variance.clone()
    }

    pub fn has_positive_support(&self) -> bool {
        (1..=self.max_support()).any(|x| self.prob(x) > T::zero())
    }

    pub fn has_negative_support(&self) -> bool {
        (self.min_support()..0).any(|x| self.prob(x) > T::zero())
    }

    /// r-th Bernoulli part: 2 sup_i min(P(Z=i), P(Z=i+r)).
    pub fn bernoulli_part(&self, r: u32) -> T {
        let r = r as i64;
        let mut best = T::zero();
        for i in self.min_support()..=self.max_support() {
            let a = self.prob(i);
            let b = self.prob(i + r);
            let m = if a < b { a } else { b };
            if m > best {
                best = m;
            }
        }
        best.clone() + best
    }

    /// Splits `Z = Z' + r·I·B` with `I ~ Bern(p)`, `B ~ Bern(1/2)` independent
    /// of `(Z', I)`. Valid for any `p <= b_r(Z)`; exact in the scalar type.
    pub fn bernoulli_decompose(&self, r: u32, p: T) -> Result<BernoulliSplit<T>> {
        let b = self.bernoulli_part(r);
        if p > b {
            return Err(Error::InvalidLattice(format!(
                "p = {p:?} exceeds Bernoulli part {b:?}"
            )));
        }
        let r = r as i64;
        let two = T::one() + T::one();
        let half_p = p.clone() / two;
        let peak = (self.min_support()..=self.max_support())
            .find(|&i| {
                let a = self.prob(i);
                let b = self.prob(i + r);
                let m = if a < b { a } else { b };
                m >= half_p
            })
            .ok_or_else(|| Error::InvalidLattice("no peak supports p/2".into()))?;
        let keep = T::one() - p.clone();
        let mut rest = Vec::new();
        if keep > T::zero() {
            for i in self.min_support()..=self.max_support() {
                let mut q = self.prob(i);
                if i == peak || i == peak + r {
                    q = q - half_p.clone();
                }
                if q > T::zero() {
                    rest.push((i, q / keep.clone()));
                }
            }
        }
        Ok(BernoulliSplit {
            p,
            shift: r,
            peak,
            rest_given_skip: rest,
        })
    }
}

/// The pieces of a Bernoulli-part decomposition `Z = Z' + r·I·B`.
#[derive(Debug, Clone)]
pub struct BernoulliSplit<T> {
    /// P(I = 1).
    pub p: T,
    /// The lattice shift r.
    pub shift: i64,
    /// Value of Z' on the event I = 1.
    pub peak: i64,
    /// Law of Z' on the event I = 0, as (value, probability) pairs.
    pub rest_given_skip: Vec<(i64, T)>,
}

impl<T: LatticeScalar> BernoulliSplit<T> {
    /// Law of `Z' + r·I·B`; must equal the original distribution exactly.
    pub fn recombined(&self) -> Result<LatticeDistribution<T>> {
        let two = T::one() + T::one();
        let half_p = self.p.clone() / two;
        let keep = T::one() - self.p.clone();
        let mut pairs: Vec<(i64, T)> = Vec::new();
        pairs.push((self.peak, half_p.clone()));
        pairs.push((self.peak + self.shift, half_p));
        for (x, q) in &self.rest_given_skip {
            pairs.push((*x, keep.clone() * q.clone()));
        }
        LatticeDistribution::from_pairs(&pairs)
    }
}

/// Mean-zero exponential tilt of a lattice distribution.
#[derive(Debug, Clone, Serialize)]
pub struct TiltResult<T> {
    /// Tilt parameter: the unique a with E(Z e^{aZ}) = 0.
    pub a: T,
    /// Normalizer c = E(e^{aZ}).
    pub c: T,
    /// Rate delta = -log c.
    pub delta: T,
    /// The tilted distribution (mean zero).
    pub tilted: LatticeDistribution<T>,
    /// Variance of the tilted distribution.
    pub sigma_tilted_sq: T,
}

/// One row of the small-tilt asymptotics table.
#[derive(Debug, Clone, Serialize)]
pub struct SmallTiltRow<T> {
    /// Negated mean of the family member.
    pub eps: T,
    /// a / (eps / sigma^2); tends to 1.
    pub a_ratio: T,
    /// (1 - c) / (eps^2 / (2 sigma^2)); tends to 1.
    pub c_ratio: T,
    /// Var(tilted) / Var(original); tends to 1.
    pub variance_ratio: T,
}

/// Point-probability estimate together with a hypothesis-strength flag.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LltEstimate<T> {
    pub value: T,
    /// Set when t * b_1(Z) < 50: the smoothness hypothesis is numerically weak.
    pub weak_hypothesis: bool,
}

/// Fitted first-passage tail constant.
#[derive(Debug, Clone, Serialize)]
pub struct CrEstimate<T> {
    /// Least-squares fit of the tail constant c_r.
    pub fitted: T,
    /// Analytic r = 1 anchor 1 / (sigma sqrt(2 pi)).
    pub anchor_r1: T,
    /// Near-critical convolution heuristic r * anchor_r1.
    pub heuristic: T,
    /// Maximum relative deviation from the fitted constant over the window.
    pub residual: T,
    /// Set when the residual exceeds 20%.
    pub flagged: bool,
    /// Fitting window in walk steps.
    pub window: (usize, usize),
}

impl<T: Scalar> LatticeDistribution<T> {
    /// Solves E(Z e^{aZ}) = 0 and returns the tilted distribution.
    ///
    /// Newton iteration started from -mean/variance, safeguarded by a sign
    /// bracket: the objective is strictly increasing in a.
    pub fn tilt(&self) -> Result<TiltResult<T>> {
        if !self.has_positive_support() || !self.has_negative_support() {
            return Err(Error::TiltUndefined);
        }
        let values: Vec<T> = (0..self.probs.len())
            .map(|i| T::of(self.min as f64 + i as f64))
            .collect();
        let a = solve_tilt_root(&values, &self.probs)?;
        let c = exp_moment(&values, &self.probs, a, 0);
        let delta = -c.ln();
        let tilted_probs: Vec<T> = self
            .probs
            .iter()
            .zip(&values)
            .map(|(&p, &x)| p * (a * x).exp() / c)
            .collect();
        let tilted = LatticeDistribution::from_parts(self.min, tilted_probs);
        let sigma_tilted_sq = tilted.variance();
        Ok(TiltResult {
            a,
            c,
            delta,
            tilted,
            sigma_tilted_sq,
        })
    }

    /// Exact pmf of the sum of `t` independent copies, by convolution.
    pub fn exact_convolution(&self, t: u32) -> Result<LatticeDistribution<T>> {
        let guard = t as u64 * self.radius();
        if guard > 1_000_000 {
            return Err(Error::ConvolutionGuard(guard));
        }
        let mut acc_min = 0i64;
        let mut acc = vec![T::one()];
        for _ in 0..t {
            let mut next = vec![T::zero(); acc.len() + self.probs.len() - 1];
            for (i, &p) in acc.iter().enumerate() {
                if p == T::zero() {
                    continue;
                }
                for (j, &q) in self.probs.iter().enumerate() {
                    next[i + j] += p * q;
                }
            }
            acc = next;
            acc_min += self.min;
        }
        Ok(LatticeDistribution::from_parts(acc_min, acc))
    }

    /// Local point probability P(S_t = x) via the saddle tilt centered at x/t.
    ///
    /// Reduces to the mean-zero-tilt formula c^t e^{-ax} / (sigma' sqrt(2 pi t))
    /// when x = o(sqrt t), and to the classical local CLT value at x near the
    /// mean; accurate to O(1/t) between.
    pub fn llt_point_prob(&self, t: u32, x: i64) -> Result<LltEstimate<T>> {
        if self.bernoulli_part(1) == T::zero() {
            return Err(Error::LatticeSpan);
        }
        if !self.has_positive_support() || !self.has_negative_support() {
            return Err(Error::TiltUndefined);
        }
        if t == 0 {
            return Err(Error::InvalidLattice("t must be >= 1".into()));
        }
        let weak = T::of_u64(t as u64) * self.bernoulli_part(1) < T::of(50.0);
        let tf = T::of_u64(t as u64);
        let target = T::of(x as f64) / tf;
        let lo = T::of(self.min_support() as f64);
        let hi = T::of(self.max_support() as f64);
        if target <= lo || target >= hi {
            // boundary or impossible values: exact corner cases
            let value = if target == lo {
                self.prob(self.min_support()).powi(t as i32)
            } else if target == hi {
                self.prob(self.max_support()).powi(t as i32)
            } else {
                T::zero()
            };
            return Ok(LltEstimate {
                value,
                weak_hypothesis: weak,
            });
        }
        let values: Vec<T> = (0..self.probs.len())
            .map(|i| T::of(self.min as f64 + i as f64) - target)
            .collect();
        let a = solve_tilt_root(&values, &self.probs)?;
        // moments of the tilted law, expressed for the unshifted variable
        let c_shift = exp_moment(&values, &self.probs, a, 0);
        let c = c_shift * (a * target).exp();
        let var_shift = exp_moment(&values, &self.probs, a, 2) / c_shift;
        let sigma = var_shift.sqrt();
        let two_pi = T::of(std::f64::consts::TAU);
        let value = (c.ln() * tf - a * T::of(x as f64)).exp() / (sigma * (two_pi * tf).sqrt());
        Ok(LltEstimate {
            value,
            weak_hypothesis: weak,
        })
    }

    /// Exact first-passage pmf: P(tau_r = t) for t = 1..=horizon, where tau_r
    /// is the first time the walk hits -r. Requires increments >= -1.
    ///
    /// Walk states are truncated above ~10 sigma sqrt(horizon); if the
    /// truncated mass ever exceeds 1e-12 the horizon is shortened to the last
    /// safe step.
    pub fn exact_hitting(&self, r: u32, horizon: u32) -> Result<Vec<T>> {
        if self.min_support() < -1 {
            return Err(Error::HittingSupport);
        }
        if r == 0 {
            return Err(Error::InvalidLattice("r must be >= 1".into()));
        }
        let sigma = self.variance().sqrt().to_f64().unwrap_or(1.0).max(1e-9);
        let cap = (10.0 * sigma * (horizon as f64).sqrt()).ceil() as i64
            + self.max_support().max(1);
        let offset = r as i64 - 1; // state s stored at index s + offset; states >= -r+1
        let width = (cap + offset + 1) as usize;
        let mut cur = vec![T::zero(); width];
        cur[offset as usize] = T::one(); // walk starts at 0
        let mut pmf = Vec::with_capacity(horizon as usize);
        let tol = T::of(1e-12);
        let mut truncated = T::zero();
        for _ in 1..=horizon {
            let mut next = vec![T::zero(); width];
            let mut hit = T::zero();
            for (idx, &mass) in cur.iter().enumerate() {
                if mass == T::zero() {
                    continue;
                }
                let s = idx as i64 - offset;
                for (j, &q) in self.probs.iter().enumerate() {
                    if q == T::zero() {
                        continue;
                    }
                    let s2 = s + self.min + j as i64;
                    if s2 < -(r as i64) + 1 {
                        // can only be s2 == -r given increments >= -1
                        hit += mass * q;
                    } else if s2 > cap {
                        truncated += mass * q;
                    } else {
                        next[(s2 + offset) as usize] += mass * q;
                    }
                }
            }
            pmf.push(hit);
            cur = next;
            if truncated > tol {
                break;
            }
        }
        Ok(pmf)
    }

    /// Closed-form tail P(tau_r >= t) = c_r delta^{-1} t^{-3/2} e^{-delta t},
    /// with c_r fitted by [`Self::estimate_cr`].
    pub fn hitting_tail(&self, r: u32, t: u32) -> Result<T> {
        let est = self.estimate_cr(r)?;
        let delta = self.tilt()?.delta;
        let tf = T::of_u64(t as u64);
        Ok(est.fitted / delta * tf.powf(T::of(-1.5)) * (-delta * tf).exp())
    }

    /// Fits the first-passage tail constant c_r against the exact DP tail,
    /// over a window chosen so delta * t lies in [3.75, 7.5].
    ///
    /// The DP tail is divided by the exact normalizer
    /// `sum_{s >= t} s^{-3/2} e^{-delta s}` rather than its leading form
    /// `delta^{-1} t^{-3/2} e^{-delta t}`; at these delta*t the leading form
    /// is still 15-25% away from the sum, which would bias the constant.
    pub fn estimate_cr(&self, r: u32) -> Result<CrEstimate<T>> {
        if self.min_support() < -1 {
            return Err(Error::HittingSupport);
        }
        let mean = self.mean().to_f64().unwrap_or(0.0);
        if mean >= 0.0 {
            return Err(Error::HittingDrift(mean));
        }
        let tr = self.tilt()?;
        let delta = tr.delta.to_f64().unwrap_or(f64::NAN);
        let mut horizon = (7.5 / delta).ceil() as u32;
        let mut capped = false;
        if horizon > 60_000 {
            horizon = 60_000;
            capped = true;
        }
        let pmf = self.exact_hitting(r, horizon)?;
        let hi = pmf.len();
        let lo = (hi / 2).max(1);
        // exact tail normalizer by backward recursion, truncated where
        // e^{-delta s} is negligible relative to the window
        let s_end = hi + (30.0 / delta).ceil() as usize;
        let deltaf = tr.delta;
        let mut norm = vec![T::zero(); hi + 2];
        let mut acc = T::zero();
        for s in (lo..=s_end).rev() {
            let sf = T::of_usize(s);
            acc += sf.powf(T::of(-1.5)) * (-deltaf * sf).exp();
            if s <= hi + 1 {
                norm[s] = acc;
            }
        }
        let mut cum = T::zero();
        for p in pmf.iter().take(lo - 1) {
            cum += *p;
        }
        let mut sum = T::zero();
        let mut count = 0u32;
        let mut values = Vec::with_capacity(hi - lo + 1);
        for t in lo..=hi {
            let tail = T::one() - cum; // P(tau_r >= t)
            cum += pmf[t - 1];
            let v = tail / norm[t];
            values.push(v);
            sum += v;
            count += 1;
        }
        let fitted = sum / T::of_u64(count as u64);
        let mut residual = T::zero();
        for v in values {
            let dev = ((v - fitted) / fitted).abs();
            if dev > residual {
                residual = dev;
            }
        }
        let sigma = self.variance().sqrt();
        let anchor_r1 = (sigma * T::of((2.0 * std::f64::consts::PI).sqrt())).recip();
        let heuristic = anchor_r1 * T::of_u64(r as u64);
        let flagged = capped || residual > T::of(0.2);
        Ok(CrEstimate {
            fitted,
            anchor_r1,
            heuristic,
            residual,
            flagged,
            window: (lo, hi),
        })
    }
}

/// Small-tilt asymptotics table over a family with mean tending to zero.
pub fn small_tilt_check<T: Scalar>(
    family: &[LatticeDistribution<T>],
) -> Result<Vec<SmallTiltRow<T>>> {
    let mut rows = Vec::with_capacity(family.len());
    for z in family {
        let eps = -z.mean();
        let sigma_sq = z.variance();
        if eps == T::zero() {
            rows.push(SmallTiltRow {
                eps,
                a_ratio: T::one(),
                c_ratio: T::one(),
                variance_ratio: T::one(),
            });
            continue;
        }
        let t = z.tilt()?;
        let two = T::of(2.0);
        rows.push(SmallTiltRow {
            eps,
            a_ratio: t.a * sigma_sq / eps,
            c_ratio: (T::one() - t.c) / (eps * eps / (two * sigma_sq)),
            variance_ratio: t.sigma_tilted_sq / sigma_sq,
        });
    }
    Ok(rows)
}

/// E(Z^k e^{aZ}) over explicit support values.
fn exp_moment<T: Scalar>(values: &[T], probs: &[T], a: T, k: u32) -> T {
    values
        .iter()
        .zip(probs)
        .map(|(&x, &p)| p * x.powi(k as i32) * (a * x).exp())
        .sum()
}

/// Root of a -> E(Z e^{aZ}) (strictly increasing); Newton with a bisection
/// safeguard inside a sign-change bracket.
fn solve_tilt_root<T: Scalar>(values: &[T], probs: &[T]) -> Result<T> {
    let mean = values
        .iter()
        .zip(probs)
        .map(|(&x, &p)| x * p)
        .sum::<T>();
    let var = values
        .iter()
        .zip(probs)
        .map(|(&x, &p)| (x - mean) * (x - mean) * p)
        .sum::<T>();
    if !(var > T::zero()) {
        return Err(Error::TiltUndefined);
    }
    let f = |a: T| exp_moment(values, probs, a, 1);
    let fp = |a: T| exp_moment(values, probs, a, 2);

    let mut a = -mean / var;
    if f(T::zero()) == T::zero() {
        return Ok(T::zero());
    }
    // sign-change bracket around the initial guess
    let mut lo = a - T::one();
    let mut hi = a + T::one();
    let mut width = T::one();
    for _ in 0..200 {
        if f(lo) < T::zero() && f(hi) > T::zero() {
            break;
        }
        width = width + width;
        lo = a - width;
        hi = a + width;
    }
    if !(f(lo) < T::zero() && f(hi) > T::zero()) {
        return Err(Error::TiltUndefined);
    }
    let tol = T::of(1e-13).max(T::epsilon() * T::of(8.0));
    for _ in 0..200 {
        let fa = f(a);
        if fa.abs() <= tol {
            return Ok(a);
        }
        if fa > T::zero() {
            hi = a;
        } else {
            lo = a;
        }
        let step = fa / fp(a);
        let mut next = a - step;
        if !(next > lo && next < hi) {
            next = (lo + hi) / T::of(2.0);
        }
        a = next;
    }
    let fa = f(a);
    if fa.abs() <= tol * T::of(100.0) {
        Ok(a)
    } else {
        Err(Error::FixedPointDiverged)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn uniform3() -> LatticeDistribution<f64> {
        LatticeDistribution::new(-1, vec![1.0 / 3.0; 3]).unwrap()
    }

    fn two_point(p_minus: f64) -> LatticeDistribution<f64> {
        LatticeDistribution::from_pairs(&[(-1, p_minus), (1, 1.0 - p_minus)]).unwrap()
    }

    fn three_point() -> LatticeDistribution<f64> {
        LatticeDistribution::from_pairs(&[(-1, 0.5), (0, 0.3), (1, 0.2)]).unwrap()
    }

    #[test]
    fn bernoulli_part_examples() {
        assert_relative_eq!(uniform3().bernoulli_part(1), 2.0 / 3.0);
        let tp = two_point(0.6);
        assert_relative_eq!(tp.bernoulli_part(1), 0.0);
        assert_relative_eq!(tp.bernoulli_part(2), 2.0 * 0.4);
    }

    #[test]
    fn tilt_two_point_closed_form() {
        let t = two_point(0.6).tilt().unwrap();
        assert_relative_eq!(t.a, 0.5 * 1.5f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(t.c, 2.0 * 0.24f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(t.delta, -(2.0 * 0.24f64.sqrt()).ln(), epsilon = 1e-12);
        assert_relative_eq!(t.tilted.prob(-1), 0.5, epsilon = 1e-12);
        assert_relative_eq!(t.tilted.prob(1), 0.5, epsilon = 1e-12);
        assert!(t.tilted.mean().abs() <= 1e-12);
    }

    #[test]
    fn tilt_three_point_closed_form() {
        let t = three_point().tilt().unwrap();
        assert_relative_eq!(t.a, 0.5 * 2.5f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(t.c, 0.3 + 2.0 * 0.1f64.sqrt(), epsilon = 1e-12);
        assert!(t.tilted.mean().abs() <= 1e-12);
    }

    #[test]
    fn tilt_mean_zero_is_identity() {
        let z = LatticeDistribution::new(-1, vec![0.25, 0.5, 0.25]).unwrap();
        let t = z.tilt().unwrap();
        assert_eq!(t.a, 0.0);
        assert_eq!(t.c, 1.0);
        assert_eq!(t.delta, 0.0);
        assert_relative_eq!(t.tilted.prob(0), 0.5);
    }

    #[test]
    fn tilt_one_sided_rejected() {
        let z = LatticeDistribution::from_pairs(&[(0, 0.5), (1, 0.5)]).unwrap();
        assert!(matches!(z.tilt(), Err(Error::TiltUndefined)));
    }

    #[test]
    fn small_tilt_ratios() {
        let family: Vec<_> = [0.2, 0.1, 0.05, 0.02, 0.0]
            .iter()
            .map(|&eps| two_point((1.0 + eps) / 2.0))
            .collect();
        let rows = small_tilt_check(&family).unwrap();
        assert_relative_eq!(rows[0].a_ratio, 0.2027325540540822 * 0.96 / 0.2, epsilon = 1e-9);
        assert!((rows[3].a_ratio - 1.0).abs() <= 0.02);
        assert!((rows[3].c_ratio - 1.0).abs() <= 0.02);
        assert_eq!(rows[4].a_ratio, 1.0);
        assert_eq!(rows[4].c_ratio, 1.0);
        // variances converge too
        assert!((rows[3].variance_ratio - 1.0).abs() < (rows[0].variance_ratio - 1.0).abs());
    }

    #[test]
    fn convolution_examples() {
        let z = uniform3();
        let s4 = z.exact_convolution(4).unwrap();
        assert_relative_eq!(s4.prob(0), 19.0 / 81.0, epsilon = 1e-14);

        let s1 = z.exact_convolution(1).unwrap();
        assert_relative_eq!(s1.prob(-1), z.prob(-1));

        let s500 = z.exact_convolution(500).unwrap();
        let total: f64 = s500.probs().iter().sum();
        assert!((total - 1.0).abs() <= 1e-12);

        assert!(matches!(
            LatticeDistribution::new(-3, vec![0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5])
                .unwrap()
                .exact_convolution(400_000),
            Err(Error::ConvolutionGuard(_))
        ));
    }

    #[test]
    fn tilt_identity_exact() {
        // P(S'_t = x) = P(S_t = x) e^{ax} / c^t
        for z in [two_point(0.6), three_point()] {
            let t = 30u32;
            let tr = z.tilt().unwrap();
            let base = z.exact_convolution(t).unwrap();
            let tilted = tr.tilted.exact_convolution(t).unwrap();
            for x in base.min_support()..=base.max_support() {
                let lhs = tilted.prob(x);
                let rhs = base.prob(x) * (tr.a * x as f64).exp() / tr.c.powi(t as i32);
                assert!((lhs - rhs).abs() <= 1e-10, "x={x} lhs={lhs} rhs={rhs}");
            }
        }
    }

    #[test]
    fn llt_central_value_mean_zero() {
        let z = uniform3();
        let t = 400u32;
        let est = z.llt_point_prob(t, 0).unwrap();
        let sigma = z.variance().sqrt();
        assert_relative_eq!(
            est.value,
            1.0 / (sigma * (2.0 * std::f64::consts::PI * t as f64).sqrt()),
            epsilon = 1e-12
        );
        assert!(!est.weak_hypothesis);
    }

    #[test]
    fn llt_span_two_rejected() {
        let z = two_point(0.5);
        assert!(matches!(z.llt_point_prob(100, 0), Err(Error::LatticeSpan)));
    }

    #[test]
    fn llt_matches_exact_convolution_at_drifted_center() {
        let z = three_point();
        let t = 200u32;
        let exact = z.exact_convolution(t).unwrap();
        let est = z.llt_point_prob(t, -60).unwrap();
        let rel = (est.value - exact.prob(-60)).abs() / exact.prob(-60);
        assert!(rel <= 0.05, "relative error {rel}");
    }

    #[test]
    fn llt_weak_hypothesis_flag() {
        let z = three_point();
        assert!(z.llt_point_prob(10, 0).unwrap().weak_hypothesis);
        assert!(!z.llt_point_prob(200, 0).unwrap().weak_hypothesis);
    }

    #[test]
    fn hitting_first_step() {
        let z = three_point();
        let pmf = z.exact_hitting(1, 10).unwrap();
        assert_relative_eq!(pmf[0], 0.5);
    }

    #[test]
    fn hitting_spitzer_uniform() {
        let z = uniform3();
        let pmf = z.exact_hitting(1, 16).unwrap();
        assert_relative_eq!(pmf[1], 1.0 / 9.0, epsilon = 1e-14);
        for t in 1..=16u32 {
            let conv = z.exact_convolution(t).unwrap();
            assert_relative_eq!(
                pmf[t as usize - 1],
                conv.prob(-1) / t as f64,
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn hitting_rejects_deep_down_steps() {
        let z = LatticeDistribution::from_pairs(&[(-2, 0.5), (1, 0.5)]).unwrap();
        assert!(matches!(z.exact_hitting(1, 10), Err(Error::HittingSupport)));
    }

    #[test]
    fn estimate_cr_anchor_near_critical() {
        let z = two_point(0.51);
        let est = z.estimate_cr(1).unwrap();
        let rel = (est.fitted - est.anchor_r1).abs() / est.anchor_r1;
        assert!(rel <= 0.05, "fitted {} anchor {}", est.fitted, est.anchor_r1);
        assert!(!est.flagged, "residual {}", est.residual);
    }

    #[test]
    fn estimate_cr_r2_roughly_doubles() {
        let z = two_point(0.51);
        let c1 = z.estimate_cr(1).unwrap().fitted;
        let c2 = z.estimate_cr(2).unwrap().fitted;
        assert!((c2 / c1 - 2.0).abs() <= 0.2, "ratio {}", c2 / c1);
    }

    #[test]
    fn estimate_cr_mean_zero_rejected() {
        let z = uniform3();
        assert!(matches!(z.estimate_cr(1), Err(Error::HittingDrift(_))));
    }

    #[test]
    fn hitting_tail_matches_dp_two_point() {
        // The closed tail form is asymptotic in delta * t: at t = 400
        // (delta * t ~ 8) it still carries its O(1/(delta t)) correction,
        // reaching 10% only around delta * t ~ 20.
        let z = two_point(0.6);
        let pmf = z.exact_hitting(1, 1200).unwrap();
        let dp_tail = |t: usize| 1.0 - pmf[..t - 1].iter().sum::<f64>();
        let rel_400 = (z.hitting_tail(1, 400).unwrap() - dp_tail(400)).abs() / dp_tail(400);
        assert!(rel_400 <= 0.25, "relative error {rel_400}");
        let rel_1000 = (z.hitting_tail(1, 1000).unwrap() - dp_tail(1000)).abs() / dp_tail(1000);
        assert!(rel_1000 <= 0.10, "relative error {rel_1000}");
    }

    #[test]
    fn bernoulli_decomposition_recombines_exactly() {
        use num_rational::Ratio;
        type Q = Ratio<i64>;
        let z = LatticeDistribution::from_pairs(&[
            (-1, Q::new(1, 2)),
            (0, Q::new(3, 10)),
            (1, Q::new(1, 5)),
        ])
        .unwrap();
        for r in 1..=2u32 {
            let b = z.bernoulli_part(r);
            assert!(b > Q::new(0, 1));
            let split = z.bernoulli_decompose(r, b).unwrap();
            let back = split.recombined().unwrap();
            assert_eq!(back.min_support(), z.min_support());
            for x in -1..=1 {
                assert_eq!(back.prob(x), z.prob(x), "r={r} x={x}");
            }
        }
    }

    #[test]
    fn variance_of_tilted_tends_to_original() {
        let family: Vec<_> = [0.1f64, 0.05, 0.01]
            .iter()
            .map(|&eps| {
                LatticeDistribution::from_pairs(&[
                    (-1, (1.0 + eps) / 3.0),
                    (0, 1.0 / 3.0),
                    (1, (1.0 - eps) / 3.0),
                ])
                .unwrap()
            })
            .collect();
        let rows = small_tilt_check(&family).unwrap();
        let devs: Vec<f64> = rows.iter().map(|r| (r.variance_ratio - 1.0).abs()).collect();
        assert!(devs[0] >= devs[1] && devs[1] >= devs[2]);
        assert!(devs[2] < 1e-3);
    }
}
