//! Moments of `g(X)` within judgment post-strata under perfect ranking.
//!
//! Stratum `r` holds the `r`-th order statistic of `H` draws, so
//! `E g(X_(r)) = ∫ g(Q(u)) b_r(u) du` with `b_r` the Beta(r, H-r+1) density.
//! All integrals share one tanh-sinh grid per `(dist, g)`; quantiles are
//! evaluated once and reused for every `H`.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::accum::{map_blocks, Moments};
use crate::distcat::{DistributionSpec, GFunction, Monotonicity};
use crate::error::{invalid, Error, Result};
use crate::quadrature::Grid;
use crate::rng;

const REL_TOL: f64 = 1e-9;

/// Per-stratum means and variances of `g(X)` for one class size `H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumMoments {
    pub h: usize,
    pub mu_g: f64,
    pub sigma2_g: f64,
    pub mu_r: Vec<f64>,
    pub sigma2_r: Vec<f64>,
    pub delta_g: f64,
    /// Standard errors of `mu_r` when the moments were simulated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub se_mu_r: Option<Vec<f64>>,
}

impl StratumMoments {
    fn assemble(h: usize, mu_g: f64, sigma2_g: f64, mu_r: Vec<f64>, sigma2_r: Vec<f64>) -> Self {
        let between: f64 = mu_r.iter().map(|m| (m - mu_g).powi(2)).sum();
        let delta_g = if sigma2_g > 0.0 { between / (h as f64 * sigma2_g) } else { 0.0 };
        StratumMoments { h, mu_g, sigma2_g, mu_r, sigma2_r, delta_g, se_mu_r: None }
    }

    /// `Σ_r σ²_r`
    pub fn within_sum(&self) -> f64 {
        self.sigma2_r.iter().sum()
    }

    /// `Σ_r (μ_r - μ)²`
    pub fn between_sum(&self) -> f64 {
        self.mu_r.iter().map(|m| (m - self.mu_g).powi(2)).sum()
    }

    /// Residuals of the mean and variance decompositions across strata,
    /// relative to the overall scale.
    pub fn decomposition_residuals(&self) -> (f64, f64) {
        let h = self.h as f64;
        let mean = self.mu_r.iter().sum::<f64>() / h;
        let var = (self.within_sum() + self.between_sum()) / h;
        let scale = self.sigma2_g.sqrt().max(self.mu_g.abs()).max(f64::MIN_POSITIVE);
        (
            (mean - self.mu_g).abs() / scale,
            (var - self.sigma2_g).abs() / self.sigma2_g.max(f64::MIN_POSITIVE),
        )
    }
}

/// `F_(r)(x)` for `r = 1..H` given `p = F(x)`.
pub fn order_stat_cdfs(p: f64, h: usize) -> Vec<f64> {
    // Binomial upper tails, accumulated from j = H downwards.
    let q = 1.0 - p;
    let mut terms = vec![0.0; h + 1];
    for (j, t) in terms.iter_mut().enumerate() {
        *t = binomial_pmf(h, j, p, q);
    }
    let mut out = vec![0.0; h];
    let mut acc = 0.0;
    for r in (1..=h).rev() {
        acc += terms[r];
        out[r - 1] = acc.min(1.0);
    }
    out
}

fn binomial_pmf(h: usize, j: usize, p: f64, q: f64) -> f64 {
    if p == 0.0 {
        return if j == 0 { 1.0 } else { 0.0 };
    }
    if q == 0.0 {
        return if j == h { 1.0 } else { 0.0 };
    }
    (ln_binomial(h as u64, j as u64) + j as f64 * p.ln() + (h - j) as f64 * q.ln()).exp()
}

/// CDFs of the `H` order statistics of `dist` at `x`.
pub fn stratum_cdfs(dist: &DistributionSpec, h: usize, x: f64) -> Result<Vec<f64>> {
    if h == 0 {
        return Err(invalid("H must be at least 1"));
    }
    Ok(order_stat_cdfs(dist.cdf(x), h))
}

/// `g(Q(u))` tabulated on a quadrature grid, from which stratum moments for
/// any `H` follow cheaply.
#[derive(Debug, Clone)]
pub struct OrderStatProfile {
    kind: ProfileKind,
}

#[derive(Debug, Clone)]
enum ProfileKind {
    Quadrature { grid: Grid, y: Vec<f64>, mu_g: f64, sigma2_g: f64 },
    Indicator { p: f64 },
}

impl OrderStatProfile {
    pub fn new(dist: &DistributionSpec, g: &GFunction) -> Result<Self> {
        if !g.second_moment_exists(dist) {
            return Err(Error::MomentDoesNotExist(format!(
                "E[{g}(X)^2] is infinite under {dist}"
            )));
        }
        if let GFunction::Indicator(c) = g {
            return Ok(Self { kind: ProfileKind::Indicator { p: dist.cdf(*c) } });
        }
        let breaks: Vec<f64> = match g {
            GFunction::Tabulated(t) => t.knots().iter().map(|&k| dist.cdf(k)).collect(),
            _ => Vec::new(),
        };
        let grid = Grid::with_breaks(&breaks);
        let mut y = Vec::with_capacity(grid.nodes.len());
        for node in &grid.nodes {
            let v = g.eval(dist.quantile_pair(node.u, node.v));
            if !v.is_finite() {
                return Err(Error::Tolerance(format!(
                    "{g}(Q(u)) is not finite at u = {:e} for {dist}",
                    node.u
                )));
            }
            y.push(v);
        }
        let mean = grid.integrate(|i| y[i]);
        check(&mean, "mean")?;
        let mu_g = mean.value;
        let var = grid.integrate(|i| (y[i] - mu_g).powi(2));
        check(&var, "variance")?;
        Ok(Self { kind: ProfileKind::Quadrature { grid, y, mu_g, sigma2_g: var.value } })
    }

    pub fn moments(&self, h: usize) -> Result<StratumMoments> {
        if h == 0 {
            return Err(invalid("H must be at least 1"));
        }
        match &self.kind {
            ProfileKind::Indicator { p } => {
                let mu_r = order_stat_cdfs(*p, h);
                let sigma2_r = mu_r.iter().map(|m| m * (1.0 - m)).collect();
                Ok(StratumMoments::assemble(h, *p, p * (1.0 - p), mu_r, sigma2_r))
            }
            ProfileKind::Quadrature { grid, y, mu_g, sigma2_g } => {
                let mut mu_r = Vec::with_capacity(h);
                let mut sigma2_r = Vec::with_capacity(h);
                let hf = h as f64;
                for r in 1..=h {
                    let ln_c = hf.ln() + ln_binomial(h as u64 - 1, r as u64 - 1);
                    let (a, b) = ((r - 1) as f64, (h - r) as f64);
                    let w: Vec<f64> = grid
                        .nodes
                        .iter()
                        .map(|n| (ln_c + a * n.ln_u + b * n.ln_v).exp())
                        .collect();
                    let first = grid.integrate(|i| w[i] * (y[i] - mu_g));
                    check(&first, "stratum mean")?;
                    let second = grid.integrate(|i| w[i] * (y[i] - mu_g).powi(2));
                    check(&second, "stratum second moment")?;
                    mu_r.push(mu_g + first.value);
                    sigma2_r.push((second.value - first.value.powi(2)).max(0.0));
                }
                if h == 1 {
                    mu_r[0] = *mu_g;
                    sigma2_r[0] = *sigma2_g;
                }
                Ok(StratumMoments::assemble(h, *mu_g, *sigma2_g, mu_r, sigma2_r))
            }
        }
    }
}

fn check(e: &crate::quadrature::Estimate, what: &str) -> Result<()> {
    if e.value.is_finite() && e.converged(REL_TOL) {
        Ok(())
    } else {
        Err(Error::Tolerance(format!(
            "{what}: error estimate {:e} against magnitude {:e}",
            e.error, e.magnitude
        )))
    }
}

/// Stratum moments of `g(X)` when units are ranked on `X`.
pub fn stratum_moments(dist: &DistributionSpec, g: &GFunction, h: usize) -> Result<StratumMoments> {
    OrderStatProfile::new(dist, g)?.moments(h)
}

/// What the judgment ranking is based on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankBy {
    /// The measured variable `X`.
    X,
    /// The transformed variable `Y = g(X)`.
    Y,
}

/// Monte Carlo settings for moments with no usable quantile function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McSettings {
    pub reps: u64,
    pub seed: u64,
}

impl Default for McSettings {
    fn default() -> Self {
        Self { reps: 10_000_000, seed: 0 }
    }
}

/// Stratum moments of `g(X)` when ranking on `X` or on `Y = g(X)`.
///
/// For monotone `g` the `Y` ranking is the `X` ranking, reversed when `g`
/// decreases, so the quadrature result is reused. Otherwise the order
/// statistics of `Y` are simulated.
pub fn transformed_stratum_moments(
    dist: &DistributionSpec,
    g: &GFunction,
    h: usize,
    rank_by: RankBy,
    mc: McSettings,
) -> Result<StratumMoments> {
    let base = || stratum_moments(dist, g, h);
    match (rank_by, g.monotonicity(dist)) {
        (RankBy::X, _) | (RankBy::Y, Monotonicity::Increasing) => base(),
        (RankBy::Y, Monotonicity::Decreasing) => {
            let mut sm = base()?;
            sm.mu_r.reverse();
            sm.sigma2_r.reverse();
            Ok(sm)
        }
        (RankBy::Y, Monotonicity::NonMonotone) => y_ranked_mc(dist, g, h, mc),
    }
}

fn y_ranked_mc(dist: &DistributionSpec, g: &GFunction, h: usize, mc: McSettings) -> Result<StratumMoments> {
    if h == 0 {
        return Err(invalid("H must be at least 1"));
    }
    if !g.second_moment_exists(dist) {
        return Err(Error::MomentDoesNotExist(format!("E[{g}(X)^2] is infinite under {dist}")));
    }
    if mc.reps < 2 {
        return Err(invalid("need at least two replicates"));
    }
    let blocks = map_blocks(mc.reps, |range| {
        let mut acc = vec![Moments::default(); h];
        let mut ys = vec![0.0; h];
        for rep in range {
            let mut rng = rng::stream(mc.seed, rep);
            for y in ys.iter_mut() {
                *y = g.eval(dist.sample_one(&mut rng));
            }
            ys.sort_by(f64::total_cmp);
            for (a, &y) in acc.iter_mut().zip(&ys) {
                a.push(y);
            }
        }
        acc
    });
    let mut acc = vec![Moments::default(); h];
    for block in &blocks {
        for (a, b) in acc.iter_mut().zip(block) {
            a.merge(b);
        }
    }
    let mut pooled = Moments::default();
    acc.iter().for_each(|a| pooled.merge(a));
    // Pooled variance with the same divisor as the stratum variances.
    let sigma2_g = pooled.m2 / pooled.n;
    let mu_r = acc.iter().map(|a| a.mean).collect();
    let sigma2_r = acc.iter().map(|a| a.m2 / a.n).collect();
    let mut sm = StratumMoments::assemble(h, pooled.mean, sigma2_g, mu_r, sigma2_r);
    sm.se_mu_r = Some(acc.iter().map(Moments::se_mean).collect());
    Ok(sm)
}

/// Takahasi–Wakimoto upper bound on `δ` for `g = identity`.
pub fn tw_bound(h: usize) -> f64 {
    if h == 0 {
        return 0.0;
    }
    (h as f64 - 1.0) / (h as f64 + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distcat::catalog;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn uniform_pair() {
        let u = DistributionSpec::uniform(0.0, 1.0).unwrap();
        let sm = stratum_moments(&u, &GFunction::Identity, 2).unwrap();
        assert!(close(sm.mu_r[0], 1.0 / 3.0, 1e-12) && close(sm.mu_r[1], 2.0 / 3.0, 1e-12));
        assert!(sm.sigma2_r.iter().all(|&s| close(s, 1.0 / 18.0, 1e-12)), "{sm:?}");
        assert!(close(sm.delta_g, 1.0 / 3.0, 1e-12));
    }

    #[test]
    fn exponential_and_normal_pairs() {
        let e = DistributionSpec::exponential(1.0).unwrap();
        let sm = stratum_moments(&e, &GFunction::Identity, 2).unwrap();
        assert!(close(sm.mu_r[0], 0.5, 1e-11) && close(sm.mu_r[1], 1.5, 1e-11), "{sm:?}");
        // Brute force: E min = ∫ 2x e^{-2x} dx via the trapezoid rule.
        let step = 1e-4;
        let brute: f64 = (1..400_000).map(|i| i as f64 * step).map(|x| 2.0 * x * (-2.0 * x).exp() * step).sum();
        assert!(close(sm.mu_r[0], brute, 1e-7));

        let n = DistributionSpec::normal(0.0, 1.0).unwrap();
        let sm = stratum_moments(&n, &GFunction::Identity, 2).unwrap();
        let m = 1.0 / std::f64::consts::PI.sqrt();
        assert!(close(sm.mu_r[0], -m, 1e-11) && close(sm.mu_r[1], m, 1e-11), "{sm:?}");
    }

    #[test]
    fn order_statistic_cdfs() {
        let c = order_stat_cdfs(0.5, 2);
        assert!(close(c[0], 0.75, 1e-15) && close(c[1], 0.25, 1e-15));
        let c = order_stat_cdfs(0.5, 3);
        for (a, b) in c.iter().zip([0.875, 0.5, 0.125]) {
            assert!(close(*a, b, 1e-15));
        }
        let n = DistributionSpec::normal(0.0, 1.0).unwrap();
        assert_eq!(stratum_cdfs(&n, 4, f64::INFINITY).unwrap(), vec![1.0; 4]);
        for p in [0.01, 0.3, 0.77] {
            let c = order_stat_cdfs(p, 9);
            assert!(close(c.iter().sum::<f64>() / 9.0, p, 1e-14));
            assert!(c.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn indicator_moments_are_exact() {
        let n = DistributionSpec::normal(0.0, 1.0).unwrap();
        let sm = stratum_moments(&n, &GFunction::Indicator(0.0), 2).unwrap();
        assert_eq!(sm.mu_r, vec![0.75, 0.25]);
        assert_eq!(sm.sigma2_r, vec![0.1875, 0.1875]);
        assert_eq!(sm.sigma2_g, 0.25);
    }

    #[test]
    fn single_stratum() {
        let d = DistributionSpec::chi_square(5.0).unwrap();
        let sm = stratum_moments(&d, &GFunction::Identity, 1).unwrap();
        assert!(close(sm.mu_g, 5.0, 1e-10) && close(sm.sigma2_g, 10.0, 1e-9));
        assert_eq!(sm.delta_g, 0.0);
        assert_eq!(sm.mu_r, vec![sm.mu_g]);
    }

    #[test]
    fn decomposition_holds_across_catalog() {
        let gs = [GFunction::Identity, GFunction::Power(2), GFunction::Indicator(1.0)];
        for d in catalog() {
            for g in &gs {
                let profile = match OrderStatProfile::new(&d, g) {
                    Ok(p) => p,
                    Err(Error::MomentDoesNotExist(_)) => continue,
                    Err(e) => panic!("{d} {g}: {e}"),
                };
                for h in 1..=14 {
                    let sm = profile.moments(h).unwrap();
                    let (a, b) = sm.decomposition_residuals();
                    assert!(a < 1e-8 && b < 1e-8, "{d} {g} H={h}: {a:e} {b:e}");
                    assert!((0.0..1.0).contains(&sm.delta_g));
                }
            }
        }
    }

    #[test]
    fn tw_bound_is_attained_by_the_uniform_only() {
        for d in catalog() {
            let p = OrderStatProfile::new(&d, &GFunction::Identity).unwrap();
            for h in 2..=14 {
                let delta = p.moments(h).unwrap().delta_g;
                let bound = tw_bound(h);
                if d.to_string() == "uniform" {
                    assert!(close(delta, bound, 1e-9), "H={h}: {delta} vs {bound}");
                } else {
                    assert!(delta < bound - 1e-6, "{d} H={h}: {delta} vs {bound}");
                }
            }
        }
    }

    #[test]
    fn divergent_moments_are_rejected() {
        let p = DistributionSpec::pareto(2.5, 1.0).unwrap();
        assert!(matches!(
            stratum_moments(&p, &GFunction::Power(2), 3),
            Err(Error::MomentDoesNotExist(_))
        ));
        let t = DistributionSpec::student_t(3.0).unwrap();
        assert!(stratum_moments(&t, &GFunction::Identity, 3).is_ok());
        assert!(stratum_moments(&t, &GFunction::Power(2), 3).is_err());
    }

    #[test]
    fn y_ranking_reuses_quadrature_for_monotone_g() {
        let e = DistributionSpec::exponential(1.0).unwrap();
        let x = transformed_stratum_moments(&e, &GFunction::Identity, 3, RankBy::X, McSettings::default()).unwrap();
        let y = transformed_stratum_moments(&e, &GFunction::Identity, 3, RankBy::Y, McSettings::default()).unwrap();
        assert_eq!(x, y);
        let ind = GFunction::Indicator(1.0);
        let x = transformed_stratum_moments(&e, &ind, 3, RankBy::X, McSettings::default()).unwrap();
        let y = transformed_stratum_moments(&e, &ind, 3, RankBy::Y, McSettings::default()).unwrap();
        let mut rev = x.mu_r.clone();
        rev.reverse();
        assert_eq!(y.mu_r, rev);
    }

    #[test]
    fn y_ranking_of_a_square_spreads_strata() {
        let u = DistributionSpec::uniform(-1.0, 1.0).unwrap();
        let g = GFunction::Power(2);
        let mc = McSettings { reps: 200_000, seed: 11 };
        let y = transformed_stratum_moments(&u, &g, 2, RankBy::Y, mc).unwrap();
        // X² = |X|² with |X| uniform; the min and max of two |X| are Beta(1,2)
        // and Beta(2,1), whose second moments are 1/6 and 1/2.
        let se = y.se_mu_r.clone().unwrap();
        assert!(close(y.mu_r[0], 1.0 / 6.0, 4.0 * se[0]), "{y:?}");
        assert!(close(y.mu_r[1], 0.5, 4.0 * se[1]), "{y:?}");
        let x = stratum_moments(&u, &g, 2).unwrap();
        let ss = |v: &[f64]| v.iter().map(|m| m * m).sum::<f64>();
        assert!(ss(&y.mu_r) > ss(&x.mu_r));
        let again = transformed_stratum_moments(&u, &g, 2, RankBy::Y, mc).unwrap();
        assert_eq!(y, again);
    }
}
