//! Monte Carlo oracles for the closed-form results.
//!
//! Replicate `i` always draws from `rng::stream(seed, i)` and block results
//! are merged in order, so every report depends only on its arguments.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::accum::{map_blocks, Moments};
use crate::coeffs::{coefficient_set, draw_counts, float_weights, Functional, WeightScheme};
use crate::design::{push_jps_units, Observation, Ranker};
use crate::distcat::{DistributionSpec, GFunction};
use crate::error::{invalid, Error, Result};
use crate::estimators::theoretical_variance;
use crate::rng;
use crate::strata::stratum_moments;

pub const MIN_REPS: u64 = 1_000;

/// Summary of `reps` independent replicates of a scalar statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub reps: u64,
    pub mean: f64,
    pub var: f64,
    pub se_mean: f64,
    pub se_var: f64,
    pub seed: u64,
    /// Wall time; not serialized so that reports are reproducible byte for byte.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl McReport {
    fn new(m: &Moments, reps: u64, seed: u64, start: Instant) -> Self {
        McReport {
            reps,
            mean: m.mean,
            var: m.variance(),
            se_mean: m.se_mean(),
            se_var: m.se_variance(),
            seed,
            elapsed: start.elapsed(),
        }
    }
}

fn merged(blocks: &[Moments]) -> Moments {
    let mut acc = Moments::default();
    blocks.iter().for_each(|b| acc.merge(b));
    acc
}

fn check_reps(reps: u64) -> Result<()> {
    if reps < MIN_REPS {
        return Err(invalid(format!("at least {MIN_REPS} replicates required, got {reps}")));
    }
    Ok(())
}

fn check_design(n: usize, h: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    if h == 0 {
        return Err(invalid("H must be at least 1"));
    }
    Ok(())
}

/// Scratch space for one replicate of a JPS estimator.
struct Work {
    h: usize,
    buf: Vec<(f64, f64)>,
    obs: Vec<Observation>,
    counts: Vec<u64>,
    sums: Vec<f64>,
    w: Vec<f64>,
}

impl Work {
    fn new(n: usize, h: usize) -> Self {
        Work {
            h,
            buf: Vec::with_capacity(h),
            obs: Vec::with_capacity(n),
            counts: vec![0; h],
            sums: vec![0.0; h],
            w: vec![0.0; h],
        }
    }

    fn draw(&mut self, rng: &mut rng::StreamRng, dist: &DistributionSpec, n: usize, ranker: Ranker) {
        self.obs.clear();
        push_jps_units(rng, dist, n, self.h, ranker, &mut self.buf, &mut self.obs);
        self.counts.iter_mut().for_each(|c| *c = 0);
        for o in &self.obs {
            self.counts[o.rank - 1] += 1;
        }
    }

    /// `Σ C_r · mean_r f(x)` for the current draw.
    fn estimate(&mut self, scheme: WeightScheme, f: impl Fn(f64) -> f64) -> f64 {
        self.sums.iter_mut().for_each(|s| *s = 0.0);
        for o in &self.obs {
            self.sums[o.rank - 1] += f(o.x);
        }
        if scheme == WeightScheme::Srs {
            return self.sums.iter().sum::<f64>() / self.obs.len() as f64;
        }
        float_weights(scheme, &self.counts, &mut self.w);
        self.sums
            .iter()
            .zip(&self.counts)
            .zip(&self.w)
            .filter(|((_, &c), _)| c > 0)
            .map(|((s, &c), w)| w * s / c as f64)
            .sum()
    }
}

/// Replicate distribution of `Σ C_r ḡ_[r]` under the JPS design.
#[allow(clippy::too_many_arguments)]
pub fn mc_estimator_stats(
    scheme: WeightScheme,
    dist: &DistributionSpec,
    g: &GFunction,
    n: usize,
    h: usize,
    ranker: Ranker,
    reps: u64,
    seed: u64,
) -> Result<McReport> {
    check_reps(reps)?;
    check_design(n, h)?;
    ranker.validate()?;
    let start = Instant::now();
    let blocks = map_blocks(reps, |range| {
        let mut work = Work::new(n, h);
        let mut acc = Moments::default();
        for rep in range {
            let mut rng = rng::stream(seed, rep);
            work.draw(&mut rng, dist, n, ranker);
            acc.push(work.estimate(scheme, |x| g.eval(x)));
        }
        acc
    });
    Ok(McReport::new(&merged(&blocks), reps, seed, start))
}

/// Replicate distribution of the plug-in variance estimator
/// `Σ C_r mean(x²)_[r] − (Σ C_r x̄_[r])²` under perfect ranking.
pub fn mc_variance_estimator(
    scheme: WeightScheme,
    dist: &DistributionSpec,
    n: usize,
    h: usize,
    reps: u64,
    seed: u64,
) -> Result<McReport> {
    check_reps(reps)?;
    check_design(n, h)?;
    if n < 2 {
        return Err(invalid("variance estimation needs at least two observations"));
    }
    let start = Instant::now();
    let blocks = map_blocks(reps, |range| {
        let mut work = Work::new(n, h);
        let mut acc = Moments::default();
        for rep in range {
            let mut rng = rng::stream(seed, rep);
            work.draw(&mut rng, dist, n, Ranker::Perfect);
            let m1 = work.estimate(scheme, |x| x);
            let m2 = work.estimate(scheme, |x| x * x);
            acc.push(m2 - m1 * m1);
        }
        acc
    });
    Ok(McReport::new(&merged(&blocks), reps, seed, start))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityReport {
    pub reps: u64,
    pub seed: u64,
    /// Kolmogorov distance between the standardized estimates and N(0, 1).
    pub distance: f64,
    /// Asymptotic 5% critical value `1.358 / √reps`.
    pub critical_5pct: f64,
    /// `√((1/H) Σ σ²_[r])`, the limiting SD of `√n (μ̂ − μ)`.
    pub asymptotic_sd: f64,
}

fn kolmogorov_distance(mut z: Vec<f64>) -> f64 {
    z.sort_by(f64::total_cmp);
    let k = z.len() as f64;
    z.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 0.5 * libm::erfc(-x / std::f64::consts::SQRT_2);
            (f - i as f64 / k).max((i + 1) as f64 / k - f)
        })
        .fold(0.0, f64::max)
}

fn mean_estimates(
    schemes: &[WeightScheme],
    dist: &DistributionSpec,
    n: usize,
    h: usize,
    reps: u64,
    seed: u64,
) -> Vec<Vec<f64>> {
    let blocks = map_blocks(reps, |range| {
        let mut work = Work::new(n, h);
        let mut out = Vec::with_capacity((range.end - range.start) as usize);
        for rep in range {
            let mut rng = rng::stream(seed, rep);
            work.draw(&mut rng, dist, n, Ranker::Perfect);
            out.push(schemes.iter().map(|&s| work.estimate(s, |x| x)).collect::<Vec<_>>());
        }
        out
    });
    blocks.into_iter().flatten().collect()
}

/// Kolmogorov distance of `√n (μ̂ − μ) / sd∞` from the standard normal.
pub fn mc_normality(
    scheme: WeightScheme,
    dist: &DistributionSpec,
    n: usize,
    h: usize,
    reps: u64,
    seed: u64,
) -> Result<NormalityReport> {
    check_reps(reps)?;
    check_design(n, h)?;
    let sm = stratum_moments(dist, &GFunction::Identity, h)?;
    let sd = (sm.within_sum() / h as f64).sqrt();
    let scale = (n as f64).sqrt() / sd;
    let z = mean_estimates(&[scheme], dist, n, h, reps, seed)
        .into_iter()
        .map(|e| (e[0] - sm.mu_g) * scale)
        .collect();
    Ok(NormalityReport {
        reps,
        seed,
        distance: kolmogorov_distance(z),
        critical_5pct: 1.358 / (reps as f64).sqrt(),
        asymptotic_sd: sd,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub reps: u64,
    pub seed: u64,
    /// `√n · RMS(μ̃_FF − μ̂_JPS)` over replicates sharing one sample.
    pub scaled_rms: f64,
    pub asymptotic_sd: f64,
    /// `scaled_rms / asymptotic_sd`.
    pub ratio: f64,
}

/// Frey–Feeman and standard JPS means computed on the same samples.
pub fn mc_ff_equivalence(dist: &DistributionSpec, n: usize, h: usize, reps: u64, seed: u64) -> Result<EquivalenceReport> {
    check_reps(reps)?;
    check_design(n, h)?;
    let sm = stratum_moments(dist, &GFunction::Identity, h)?;
    let sd = (sm.within_sum() / h as f64).sqrt();
    let est = mean_estimates(&[WeightScheme::FreyFeeman, WeightScheme::StandardJps], dist, n, h, reps, seed);
    let ms = est.iter().map(|e| (e[0] - e[1]).powi(2)).sum::<f64>() / reps as f64;
    let scaled_rms = (ms * n as f64).sqrt();
    Ok(EquivalenceReport { reps, seed, scaled_rms, asymptotic_sd: sd, ratio: scaled_rms / sd })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEstimate {
    pub estimate: f64,
    pub se: f64,
}

/// Simulated weight functional, read off stratum 1 (and 2 for the covariance).
pub fn mc_coefficient(
    scheme: WeightScheme,
    n: u64,
    h: u64,
    functional: Functional,
    reps: u64,
    seed: u64,
) -> Result<CoefficientEstimate> {
    check_reps(reps)?;
    if n == 0 || h == 0 {
        return Err(invalid("n and H must be positive"));
    }
    if functional == Functional::CovC1C2 && h < 2 {
        return Err(invalid("covariance needs H >= 2"));
    }
    let blocks = map_blocks(reps, |range| {
        let mut counts = vec![0u64; h as usize];
        let mut w = vec![0.0; h as usize];
        let mut c1 = Moments::default();
        let mut other = Moments::default();
        for rep in range {
            let mut rng = rng::stream(seed, rep);
            draw_counts(&mut rng, n, &mut counts);
            float_weights(scheme, &counts, &mut w);
            c1.push(w[0]);
            match functional {
                Functional::EJ1C1Sq if counts[0] > 0 => other.push(w[0] * w[0] / counts[0] as f64),
                Functional::EJ1C1Sq => other.push(0.0),
                Functional::CovC1C2 => other.push(w[0] * w[1]),
                _ => {}
            }
        }
        (c1, other)
    });
    let c1 = merged(&blocks.iter().map(|b| b.0).collect::<Vec<_>>());
    let other = merged(&blocks.iter().map(|b| b.1).collect::<Vec<_>>());
    Ok(match functional {
        Functional::EC1 => CoefficientEstimate { estimate: c1.mean, se: c1.se_mean() },
        Functional::VC1 => CoefficientEstimate { estimate: c1.variance(), se: c1.se_variance() },
        Functional::EJ1C1Sq => CoefficientEstimate { estimate: other.mean, se: other.se_mean() },
        // E(C₁C₂) − E(C₁)², with the delta-method error of the product term.
        Functional::CovC1C2 => {
            let se = (other.se_mean().powi(2) + (2.0 * c1.mean * c1.se_mean()).powi(2)).sqrt();
            CoefficientEstimate { estimate: other.mean - c1.mean * c1.mean, se }
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Coeffs,
    Unbiased,
    Variance,
    Normality,
    All,
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Coeffs => "coeffs",
            Suite::Unbiased => "unbiased",
            Suite::Variance => "variance",
            Suite::Normality => "normality",
            Suite::All => "all",
        })
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "coeffs" => Suite::Coeffs,
            "unbiased" => Suite::Unbiased,
            "variance" => Suite::Variance,
            "normality" => Suite::Normality,
            "all" => Suite::All,
            other => return Err(Error::Parse(format!("unknown suite `{other}`"))),
        })
    }
}

/// One pass/fail line. `se` is absent for checks with an absolute threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub measured: f64,
    pub expected: f64,
    pub se: Option<f64>,
    /// `|measured − expected|` in SEs, or the raw gap without an SE.
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn se_band(suite: Suite, name: String, measured: f64, expected: f64, se: f64, k: f64) -> Self {
        let gap = (measured - expected).abs();
        let deviation = if se > 0.0 { gap / se } else if gap == 0.0 { 0.0 } else { f64::INFINITY };
        Check { suite, name, measured, expected, se: Some(se), deviation, tolerance: k, passed: deviation <= k }
    }

    fn below(suite: Suite, name: String, measured: f64, limit: f64) -> Self {
        Check {
            suite,
            name,
            measured,
            expected: 0.0,
            se: None,
            deviation: measured,
            tolerance: limit,
            passed: measured < limit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// Distributions of the standard verification grid.
pub fn grid_distributions() -> Vec<DistributionSpec> {
    ["uniform", "normal", "exp"].iter().map(|s| s.parse().expect("catalog name")).collect()
}

/// `g` functions of the standard grid; the indicator sits at the median.
pub fn grid_functions(dist: &DistributionSpec) -> Result<Vec<GFunction>> {
    Ok(vec![GFunction::Identity, GFunction::Power(2), GFunction::Indicator(dist.quantile(0.5)?)])
}

/// One Theorem 1 grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub dist: DistributionSpec,
    pub g: GFunction,
    pub n: usize,
    pub h: usize,
    pub scheme: WeightScheme,
}

impl GridCell {
    pub fn label(&self) -> String {
        format!("{} g={} n={} H={} {}", self.dist, self.g, self.n, self.h, self.scheme)
    }
}

/// The full grid: 3 distributions × 3 functions × n ∈ {3,5,15} × H ∈ {2,3} × 3 schemes.
pub fn theorem1_grid() -> Result<Vec<GridCell>> {
    let mut out = Vec::new();
    for dist in grid_distributions() {
        for g in grid_functions(&dist)? {
            for n in [3, 5, 15] {
                for h in [2, 3] {
                    for scheme in WeightScheme::ALL {
                        out.push(GridCell { dist: dist.clone(), g: g.clone(), n, h, scheme });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// 27 cells covering every (distribution, function, scheme) once, cycling
/// through the (n, H) pairs.
pub fn theorem1_reduced_grid() -> Result<Vec<GridCell>> {
    let nh = [(3, 2), (5, 3), (15, 2), (3, 3), (5, 2), (15, 3)];
    let mut out = Vec::new();
    let mut k = 0;
    for dist in grid_distributions() {
        for g in grid_functions(&dist)? {
            for scheme in WeightScheme::ALL {
                let (n, h) = nh[k % nh.len()];
                k += 1;
                out.push(GridCell { dist: dist.clone(), g: g.clone(), n, h, scheme });
            }
        }
    }
    Ok(out)
}

/// Mean within 4 SEs of `μ_g` and variance within 3 SEs of the exact
/// variance, for each requested cell.
pub fn theorem1_checks(cells: &[GridCell], reps: u64, seed: u64, mean: bool, var: bool) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (i, c) in cells.iter().enumerate() {
        let sm = stratum_moments(&c.dist, &c.g, c.h)?;
        let coeffs = coefficient_set(c.scheme, c.n as u64, c.h as u64)?;
        let r = mc_estimator_stats(c.scheme, &c.dist, &c.g, c.n, c.h, Ranker::Perfect, reps, seed.wrapping_add(i as u64))?;
        if mean {
            out.push(Check::se_band(Suite::Unbiased, c.label(), r.mean, sm.mu_g, r.se_mean, 4.0));
        }
        if var {
            let v = theoretical_variance(&coeffs, &sm)?;
            out.push(Check::se_band(Suite::Variance, c.label(), r.var, v, r.se_var, 3.0));
        }
    }
    Ok(out)
}

/// MC mean of the plug-in variance estimator against `σ² − V(mean estimator)`.
pub fn bias_check(scheme: WeightScheme, dist: &DistributionSpec, n: usize, h: usize, reps: u64, seed: u64) -> Result<Check> {
    let sm = stratum_moments(dist, &GFunction::Identity, h)?;
    let coeffs = coefficient_set(scheme, n as u64, h as u64)?;
    let expected = sm.sigma2_g - theoretical_variance(&coeffs, &sm)?;
    let r = mc_variance_estimator(scheme, dist, n, h, reps, seed)?;
    let name = format!("bias {dist} n={n} H={h} {scheme}");
    Ok(Check::se_band(Suite::Variance, name, r.mean, expected, r.se_mean, 3.0))
}

/// Simulated `V(C₁)` and `E(J₁C₁²)` against exact values on
/// n ∈ {2,3,5,15}, H ∈ {1,2,3,5}, all schemes.
pub fn coefficient_checks(reps: u64, seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut k = 0u64;
    for n in [2u64, 3, 5, 15] {
        for h in [1u64, 2, 3, 5] {
            for scheme in WeightScheme::ALL {
                let c = coefficient_set(scheme, n, h)?;
                for (f, exact) in [(Functional::VC1, c.v_c1), (Functional::EJ1C1Sq, c.e_j1c1sq)] {
                    let est = mc_coefficient(scheme, n, h, f, reps, seed.wrapping_add(k))?;
                    k += 1;
                    let name = format!("{f} n={n} H={h} {scheme}");
                    out.push(Check::se_band(Suite::Coeffs, name, est.estimate, exact, est.se, 3.0));
                }
            }
        }
    }
    Ok(out)
}

pub const NORMALITY_N: usize = 2000;
pub const NORMALITY_H: usize = 5;
pub const NORMALITY_REPS: u64 = 10_000;

/// Kolmogorov distance below 0.02 and FF/JPS scaled RMS gap below 5% of the
/// asymptotic SD, both at n = 2000, H = 5, normal.
pub fn normality_checks(reps: u64, seed: u64) -> Result<Vec<Check>> {
    let normal: DistributionSpec = "normal".parse()?;
    let ks = mc_normality(WeightScheme::StandardJps, &normal, NORMALITY_N, NORMALITY_H, reps, seed)?;
    let eq = mc_ff_equivalence(&normal, NORMALITY_N, NORMALITY_H, reps, seed)?;
    Ok(vec![
        Check::below(Suite::Normality, "kolmogorov distance n=2000 H=5 normal jps".into(), ks.distance, 0.02),
        Check::below(Suite::Normality, "ff vs jps scaled rms / sd n=2000 H=5 normal".into(), eq.ratio, 0.05),
    ])
}

/// Replicates used by [`run_suite`] when none are given.
pub fn default_reps(suite: Suite) -> u64 {
    match suite {
        Suite::Coeffs => 200_000,
        Suite::Unbiased | Suite::Variance => 100_000,
        Suite::Normality => NORMALITY_REPS,
        Suite::All => 100_000,
    }
}

pub fn run_suite(suite: Suite, seed: u64, reps: Option<u64>) -> Result<SuiteReport> {
    let reps_for = |s: Suite| reps.unwrap_or_else(|| default_reps(s));
    let mut checks = Vec::new();
    let has = |s: Suite| suite == s || suite == Suite::All;
    if has(Suite::Coeffs) {
        checks.extend(coefficient_checks(reps_for(Suite::Coeffs), seed)?);
    }
    if has(Suite::Unbiased) || has(Suite::Variance) {
        let grid = theorem1_grid()?;
        let r = reps_for(Suite::Unbiased);
        checks.extend(theorem1_checks(&grid, r, seed, has(Suite::Unbiased), has(Suite::Variance))?);
    }
    if has(Suite::Variance) {
        let u: DistributionSpec = "uniform".parse()?;
        for scheme in WeightScheme::ALL {
            checks.push(bias_check(scheme, &u, 5, 2, reps_for(Suite::Variance), seed)?);
        }
    }
    if has(Suite::Normality) {
        checks.extend(normality_checks(reps_for(Suite::Normality), seed)?);
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(SuiteReport { suite, seed, checks, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform() -> DistributionSpec {
        "uniform".parse().unwrap()
    }

    #[test]
    fn srs_mean_of_uniform() {
        let r = mc_estimator_stats(WeightScheme::Srs, &uniform(), &GFunction::Identity, 10, 3, Ranker::Perfect, 200_000, 3)
            .unwrap();
        assert!((r.mean - 0.5).abs() < 4.0 * r.se_mean);
        assert!((r.var - 1.0 / 120.0).abs() < 3.0 * r.se_var, "{r:?}");
        assert!((r.se_mean - (r.var / r.reps as f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn reports_depend_only_on_seed() {
        let run = |seed| {
            mc_estimator_stats(WeightScheme::FreyFeeman, &uniform(), &GFunction::Identity, 4, 2, Ranker::Perfect, 10_000, seed)
                .unwrap()
        };
        let (a, b) = (run(9), run(9));
        assert_eq!((a.mean, a.var, a.se_var), (b.mean, b.var, b.se_var));
        assert_ne!(a.mean, run(10).mean);
    }

    #[test]
    fn uninformative_ranking_gives_srs_variance() {
        let d: DistributionSpec = "exp".parse().unwrap();
        let r0 = Ranker::concomitant(0.0).unwrap();
        for scheme in [WeightScheme::Srs, WeightScheme::StandardJps] {
            let r = mc_estimator_stats(scheme, &d, &GFunction::Identity, 6, 3, r0, 200_000, 11).unwrap();
            assert!((r.mean - 1.0).abs() < 4.0 * r.se_mean);
            if scheme == WeightScheme::Srs {
                assert!((r.var - 1.0 / 6.0).abs() < 3.0 * r.se_var, "{r:?}");
            }
        }
    }

    #[test]
    fn coefficient_examples() {
        let v = mc_coefficient(WeightScheme::StandardJps, 2, 2, Functional::VC1, 1_000_000, 0).unwrap();
        assert!((v.estimate - 0.125).abs() < 3.0 * v.se, "{v:?}");
        let v = mc_coefficient(WeightScheme::Srs, 4, 2, Functional::VC1, 200_000, 0).unwrap();
        assert!((v.estimate - 1.0 / 16.0).abs() < 3.0 * v.se, "{v:?}");
        for scheme in WeightScheme::ALL {
            let v = mc_coefficient(scheme, 5, 1, Functional::VC1, 1_000, 0).unwrap();
            assert_eq!(v.estimate, 0.0);
        }
        assert!(mc_coefficient(WeightScheme::Srs, 4, 2, Functional::VC1, 10, 0).is_err());
    }

    #[test]
    fn kolmogorov_distance_of_exact_quantiles_is_small() {
        let k = 1000;
        let z = (0..k).map(|i| crate::distcat::std_normal_quantile((i as f64 + 0.5) / k as f64)).collect();
        let d = kolmogorov_distance(z);
        assert!((d - 0.5 / k as f64).abs() < 1e-12);
    }

    #[test]
    fn h1_normality_is_the_sample_mean_clt() {
        let r = mc_normality(WeightScheme::StandardJps, &uniform(), 50, 1, 4_000, 5).unwrap();
        assert!(r.distance < 2.0 * r.critical_5pct, "{r:?}");
        assert!((r.asymptotic_sd - (1.0f64 / 12.0).sqrt()).abs() < 1e-12);
    }
}
