//! Relative efficiencies, dominance thresholds and the optimal class size.

use serde::{Deserialize, Serialize};

use crate::coeffs::{coefficient_set, CoefficientSet, WeightScheme};
use crate::distcat::{DistributionSpec, GFunction};
use crate::error::{invalid, Error, Result};
use crate::estimators::{brss_variance, theoretical_variance};
use crate::strata::{transformed_stratum_moments, McSettings, OrderStatProfile, RankBy, StratumMoments};

pub use crate::strata::tw_bound;

/// Which comparison an [`REReport`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    VsSrs,
    VsBrssEqualH,
    VsBrssCrossH,
    FfVsStdJps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReComponents {
    pub m1: f64,
    pub m2: f64,
    pub delta_g: f64,
    pub h_j: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_b: Option<usize>,
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct REReport {
    pub re: f64,
    pub components: ReComponents,
    pub regime: Regime,
}

fn check_delta(delta: f64) -> Result<()> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::Domain(format!("δ must lie in [0, 1), got {delta}")));
    }
    Ok(())
}

/// `[M_1 (1 − δ) + M_2 δ]⁻¹`
pub fn re_vs_srs(coeffs: &CoefficientSet, delta_g: f64) -> Result<f64> {
    check_delta(delta_g)?;
    Ok(1.0 / (coeffs.m1 * (1.0 - delta_g) + coeffs.m2 * delta_g))
}

/// `(1 − δ)⁻¹`, the large-sample limit of [`re_vs_srs`].
pub fn are_vs_srs(delta_g: f64) -> Result<f64> {
    check_delta(delta_g)?;
    Ok(1.0 / (1.0 - delta_g))
}

/// Variance of balanced RSS with `H_B` and `n / H_B` cycles over the variance
/// of the class-𝒞 estimator with `H_J`, both at total sample size `n`.
pub fn re_vs_brss(coeffs: &CoefficientSet, sm_j: &StratumMoments, sm_b: &StratumMoments, n: u64) -> Result<f64> {
    if coeffs.n != n {
        return Err(invalid(format!("coefficients are for n = {}, not {n}", coeffs.n)));
    }
    let hb = sm_b.h as u64;
    if n % hb != 0 {
        return Err(invalid(format!("n = {n} is not a multiple of H_B = {hb}")));
    }
    Ok(brss_variance(sm_b, (n / hb) as usize)? / theoretical_variance(coeffs, sm_j)?)
}

/// `V(standard JPS) / V(Frey–Feeman)`; above 1 when the Frey–Feeman weights win.
pub fn re_ff_vs_jps(jps: &CoefficientSet, ff: &CoefficientSet, sm: &StratumMoments) -> Result<f64> {
    if jps.scheme != WeightScheme::StandardJps || ff.scheme != WeightScheme::FreyFeeman {
        return Err(invalid("expected standard JPS and Frey–Feeman coefficients"));
    }
    Ok(theoretical_variance(jps, sm)? / theoretical_variance(ff, sm)?)
}

/// Full report for the class-𝒞 estimator against SRS.
pub fn report_vs_srs(coeffs: &CoefficientSet, sm: &StratumMoments) -> Result<REReport> {
    Ok(REReport {
        re: re_vs_srs(coeffs, sm.delta_g)?,
        components: components(coeffs, sm, None),
        regime: Regime::VsSrs,
    })
}

pub fn report_vs_brss(coeffs: &CoefficientSet, sm_j: &StratumMoments, sm_b: &StratumMoments) -> Result<REReport> {
    Ok(REReport {
        re: re_vs_brss(coeffs, sm_j, sm_b, coeffs.n)?,
        components: components(coeffs, sm_j, Some(sm_b.h)),
        regime: if sm_j.h == sm_b.h { Regime::VsBrssEqualH } else { Regime::VsBrssCrossH },
    })
}

pub fn report_ff_vs_jps(jps: &CoefficientSet, ff: &CoefficientSet, sm: &StratumMoments) -> Result<REReport> {
    Ok(REReport {
        re: re_ff_vs_jps(jps, ff, sm)?,
        components: components(ff, sm, None),
        regime: Regime::FfVsStdJps,
    })
}

fn components(c: &CoefficientSet, sm: &StratumMoments, h_b: Option<usize>) -> ReComponents {
    ReComponents { m1: c.m1, m2: c.m2, delta_g: sm.delta_g, h_j: sm.h, h_b, n: c.n }
}

/// Smallest `δ` with `RE ≥ 1`: `(M_1 − 1) / (M_1 − M_2)`.
pub fn min_delta_for_dominance(coeffs: &CoefficientSet) -> Result<f64> {
    if coeffs.m1 <= coeffs.m2 {
        return Err(Error::Degenerate("scheme coincides with SRS".into()));
    }
    Ok((coeffs.m1 - 1.0) / (coeffs.m1 - coeffs.m2))
}

pub fn tw_check(delta: f64, h: usize) -> bool {
    delta <= tw_bound(h) + 1e-12
}

/// Variance change from ranking on `Y = g(X)` instead of on `X`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YRankingGap {
    pub gap: f64,
    /// Monte Carlo standard error; zero when both rankings were integrated.
    pub se: f64,
}

/// `((K_1 − K_2)/H) {Σ [E g(X)_(r)]² − Σ [E Y_(r)]²}`, which is never positive.
pub fn y_ranking_gap(
    coeffs: &CoefficientSet,
    dist: &DistributionSpec,
    g: &GFunction,
    h: usize,
    mc: McSettings,
) -> Result<YRankingGap> {
    if coeffs.h as usize != h {
        return Err(Error::SizeMismatch(coeffs.h as usize, h));
    }
    let x = transformed_stratum_moments(dist, g, h, RankBy::X, mc)?;
    let y = transformed_stratum_moments(dist, g, h, RankBy::Y, mc)?;
    let Some(se) = &y.se_mu_r else {
        // Monotone g: both rankings give the same strata up to order.
        return Ok(YRankingGap { gap: 0.0, se: 0.0 });
    };
    let ss = |v: &[f64]| v.iter().map(|m| m * m).sum::<f64>();
    let scale = (coeffs.k1 - coeffs.k2) / h as f64;
    // Delta method on Σ μ_r², treating the simulated strata as independent.
    let var: f64 = y.mu_r.iter().zip(se).map(|(m, s)| (2.0 * m * s).powi(2)).sum();
    Ok(YRankingGap { gap: scale * (ss(&x.mu_r) - ss(&y.mu_r)), se: scale.abs() * var.sqrt() })
}

/// `Σ_j (Σ_i a_i(j))² − Σ_j (Σ_i a_ij)²` where `a_i(j)` is the `j`-th
/// smallest entry of row `i`.
pub fn ordered_sumsq_gap(rows: &[Vec<f64>]) -> Result<f64> {
    let k = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != k) {
        return Err(invalid("rows must all have the same length"));
    }
    let mut raw = vec![0.0; k];
    let mut sorted = vec![0.0; k];
    for row in rows {
        let mut s = row.clone();
        s.sort_by(f64::total_cmp);
        for j in 0..k {
            raw[j] += row[j];
            sorted[j] += s[j];
        }
    }
    let ss = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    Ok(ss(&sorted) - ss(&raw))
}

/// Whether sorting every row can only increase the sum of squared column
/// totals. Holds for every rectangular input.
pub fn ordered_sumsq_dominates(rows: &[Vec<f64>]) -> Result<bool> {
    let gap = ordered_sumsq_gap(rows)?;
    let scale: f64 = rows.iter().flatten().map(|x| x * x).sum::<f64>() * rows.len() as f64;
    Ok(gap >= -1e-12 * scale.max(1.0))
}

/// Result of the class-size search for the standard JPS mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalHResult {
    pub n: u64,
    pub h_opt: usize,
    /// Efficiency at `h_opt`, rounded to two decimals.
    pub mre: f64,
    /// Unrounded efficiency at `h_opt`.
    pub mre_exact: f64,
    /// Unrounded efficiency for `H = 1..=h_max`.
    pub re_curve: Vec<f64>,
    /// Every `H` whose rounded efficiency ties the maximum.
    pub tied: Vec<usize>,
}

pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Efficiencies rounded to two decimals, maximised, ties to the smallest `H`.
pub fn argmax_rounded(n: u64, re_curve: Vec<f64>) -> OptimalHResult {
    let rounded: Vec<f64> = re_curve.iter().map(|&r| round2(r)).collect();
    let best = rounded.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = (0..rounded.len()).filter(|&i| rounded[i] == best).map(|i| i + 1).collect();
    let h_opt = tied[0];
    OptimalHResult { n, h_opt, mre: best, mre_exact: re_curve[h_opt - 1], re_curve, tied }
}

/// Efficiency curve `H = 1..=h_max` for the mean of `dist` from a prepared
/// identity profile.
pub fn re_curve(profile: &OrderStatProfile, n: u64, scheme: WeightScheme, h_max: usize) -> Result<Vec<f64>> {
    (1..=h_max)
        .map(|h| {
            let sm = profile.moments(h)?;
            let c = coefficient_set(scheme, n, h as u64)?;
            re_vs_srs(&c, sm.delta_g)
        })
        .collect()
}

/// Class size maximising the efficiency of the mean estimator over SRS.
pub fn optimal_h(n: u64, dist: &DistributionSpec, scheme: WeightScheme, h_max: usize) -> Result<OptimalHResult> {
    if h_max == 0 {
        return Err(invalid("h_max must be at least 1"));
    }
    let profile = OrderStatProfile::new(dist, &GFunction::Identity)?;
    Ok(argmax_rounded(n, re_curve(&profile, n, scheme, h_max)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strata::stratum_moments;

    fn d(s: &str) -> DistributionSpec {
        s.parse().unwrap()
    }

    #[test]
    fn srs_is_the_unit_of_efficiency() {
        let c = coefficient_set(WeightScheme::Srs, 12, 4).unwrap();
        for delta in [0.0, 0.3, 0.9] {
            assert_eq!(re_vs_srs(&c, delta).unwrap(), 1.0);
        }
        assert!(re_vs_srs(&c, 1.0).is_err());
        assert_eq!(min_delta_for_dominance(&c), Err(Error::Degenerate("scheme coincides with SRS".into())));
    }

    #[test]
    fn are_examples() {
        assert_eq!(are_vs_srs(0.0).unwrap(), 1.0);
        assert!((are_vs_srs(1.0 / 3.0).unwrap() - 1.5).abs() < 1e-15);
        let sm = stratum_moments(&d("uniform"), &GFunction::Identity, 6).unwrap();
        assert!((are_vs_srs(sm.delta_g).unwrap() - 3.5).abs() < 1e-9);
        assert!(are_vs_srs(-0.1).is_err());
    }

    #[test]
    fn homogeneous_strata_favour_srs() {
        let c = coefficient_set(WeightScheme::StandardJps, 10, 3).unwrap();
        assert!((re_vs_srs(&c, 0.0).unwrap() - 1.0 / c.m1).abs() < 1e-15);
        assert!(c.m1 > 1.0);
    }

    #[test]
    fn equal_class_sizes_reduce_to_srs_comparison() {
        let sm = stratum_moments(&d("normal"), &GFunction::Identity, 3).unwrap();
        let c = coefficient_set(WeightScheme::StandardJps, 12, 3).unwrap();
        let b = re_vs_brss(&c, &sm, &sm, 12).unwrap();
        let s = re_vs_srs(&c, sm.delta_g).unwrap();
        assert!((b - (1.0 - sm.delta_g) * s).abs() < 1e-12 * b);
        assert!(b < 1.0);
        assert!(re_vs_brss(&c, &sm, &sm, 13).is_err());
        let sm1 = stratum_moments(&d("normal"), &GFunction::Identity, 1).unwrap();
        let c1 = coefficient_set(WeightScheme::StandardJps, 12, 1).unwrap();
        assert!((re_vs_brss(&c1, &sm1, &sm1, 12).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tw_bound_values() {
        assert!((tw_bound(2) - 1.0 / 3.0).abs() < 1e-15);
        let u = stratum_moments(&d("uniform"), &GFunction::Identity, 5).unwrap();
        assert!((u.delta_g - 4.0 / 6.0).abs() < 1e-9 && tw_check(u.delta_g, 5));
        let n = stratum_moments(&d("normal"), &GFunction::Identity, 5).unwrap();
        assert!(n.delta_g < tw_bound(5) - 1e-3);
    }

    #[test]
    fn lemma8_examples() {
        let rows = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        assert_eq!(ordered_sumsq_gap(&rows).unwrap(), 2.0);
        assert!(ordered_sumsq_dominates(&rows).unwrap());
        let sorted = vec![vec![1.0, 2.0, 5.0], vec![-1.0, 0.0, 3.0]];
        assert_eq!(ordered_sumsq_gap(&sorted).unwrap(), 0.0);
        assert_eq!(ordered_sumsq_gap(&[vec![3.0, 1.0, 2.0]]).unwrap(), 0.0);
        assert!(ordered_sumsq_gap(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn y_ranking_gap_vanishes_for_monotone_g() {
        let c = coefficient_set(WeightScheme::StandardJps, 10, 3).unwrap();
        let g = y_ranking_gap(&c, &d("normal"), &GFunction::Identity, 3, McSettings::default()).unwrap();
        assert_eq!(g.gap, 0.0);
        let g = y_ranking_gap(&c, &d("normal"), &GFunction::Power(3), 3, McSettings::default()).unwrap();
        assert_eq!(g.gap, 0.0);
    }

    #[test]
    fn optimal_h_anchor() {
        let r = optimal_h(20, &d("normal"), WeightScheme::StandardJps, 25).unwrap();
        assert_eq!((r.h_opt, r.mre), (6, 2.01));
        assert_eq!(r.re_curve.len(), 25);
        assert_eq!(r.re_curve[0], 1.0);
    }
}
