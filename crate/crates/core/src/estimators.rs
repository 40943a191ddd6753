//! Class-𝒞 estimators `Σ_r C_r ḡ_[r]` and their exact variances.

use serde::{Deserialize, Serialize};

use crate::coeffs::{float_weights, CoefficientSet, WeightScheme};
use crate::design::{BrssSample, JpsSample};
use crate::distcat::GFunction;
use crate::error::{invalid, Error, Result};
use crate::strata::StratumMoments;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub value: f64,
    pub scheme: WeightScheme,
    pub weights_used: Vec<f64>,
    pub h_n: usize,
    pub full_rank: bool,
}

/// Weights for a count vector. Empty strata get weight zero.
pub fn weights(scheme: WeightScheme, counts: &[u64]) -> Result<Vec<f64>> {
    if counts.iter().sum::<u64>() == 0 {
        return Err(Error::EmptySample);
    }
    let mut w = vec![0.0; counts.len()];
    float_weights(scheme, counts, &mut w);
    Ok(w)
}

/// Per-stratum means of `f(x)`; 0 for empty strata.
pub fn stratum_means(sample: &JpsSample, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut sums = vec![0.0; sample.h()];
    for o in sample.observations() {
        sums[o.rank - 1] += f(o.x);
    }
    sums.iter()
        .zip(sample.counts())
        .map(|(s, c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect()
}

fn combine(sample: &JpsSample, scheme: WeightScheme, f: impl Fn(f64) -> f64) -> EstimateResult {
    let counts = sample.counts();
    let w = weights(scheme, &counts).expect("samples are nonempty");
    let value = if scheme == WeightScheme::Srs {
        sample.observations().iter().map(|o| f(o.x)).sum::<f64>() / sample.n() as f64
    } else {
        stratum_means(sample, &f).iter().zip(&w).map(|(m, c)| m * c).sum()
    };
    let h_n = counts.iter().filter(|&&c| c > 0).count();
    EstimateResult { value, scheme, weights_used: w, h_n, full_rank: h_n == sample.h() }
}

/// Estimate of `E g(X)`.
pub fn estimate_g_mean(sample: &JpsSample, g: &GFunction, scheme: WeightScheme) -> EstimateResult {
    combine(sample, scheme, |x| g.eval(x))
}

pub fn estimate_mean(sample: &JpsSample, scheme: WeightScheme) -> EstimateResult {
    combine(sample, scheme, |x| x)
}

/// `Σ C_r mean(x²)_[r] − (Σ C_r x̄_[r])²`, without truncation or small-sample
/// correction.
pub fn estimate_variance(sample: &JpsSample, scheme: WeightScheme) -> Result<EstimateResult> {
    if sample.n() < 2 {
        return Err(invalid("variance estimation needs at least two observations"));
    }
    let m1 = combine(sample, scheme, |x| x);
    let m2 = combine(sample, scheme, |x| x * x);
    Ok(EstimateResult { value: m2.value - m1.value * m1.value, ..m1 })
}

/// CDF estimates `Σ C_r F̂_[r](x)` at each grid point.
pub fn estimate_cdf(sample: &JpsSample, scheme: WeightScheme, grid: &[f64]) -> Vec<EstimateResult> {
    grid.iter()
        .map(|&c| estimate_g_mean(sample, &GFunction::Indicator(c), scheme))
        .collect()
}

fn check_h(coeffs: &CoefficientSet, sm: &StratumMoments) -> Result<()> {
    if coeffs.h as usize != sm.h {
        return Err(Error::SizeMismatch(coeffs.h as usize, sm.h));
    }
    Ok(())
}

/// `E(J_1 C_1²) Σ σ²_r + H/(H−1) V(C_1) Σ (μ_r − μ)²`
pub fn theoretical_variance(coeffs: &CoefficientSet, sm: &StratumMoments) -> Result<f64> {
    check_h(coeffs, sm)?;
    let h = sm.h as f64;
    let between = if sm.h > 1 { h / (h - 1.0) * coeffs.v_c1 * sm.between_sum() } else { 0.0 };
    Ok(coeffs.e_j1c1sq * sm.within_sum() + between)
}

/// The same variance written as `K_1 σ² − (K_1 − K_2) H⁻¹ Σ (μ_r − μ)²`.
pub fn theoretical_variance_alt(coeffs: &CoefficientSet, sm: &StratumMoments) -> Result<f64> {
    check_h(coeffs, sm)?;
    Ok(coeffs.k1 * sm.sigma2_g - (coeffs.k1 - coeffs.k2) * sm.between_sum() / sm.h as f64)
}

/// Variance of the balanced RSS mean with `m` cycles: `Σ σ²_r / (m H²)`.
pub fn brss_variance(sm: &StratumMoments, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(invalid("BRSS needs at least one cycle"));
    }
    let h = sm.h as f64;
    Ok(sm.within_sum() / (m as f64 * h * h))
}

/// Bias of the plug-in variance estimator: `E σ̂² − σ² = −V(Σ C_r X̄_[r])`.
pub fn variance_estimator_bias(coeffs: &CoefficientSet, sm: &StratumMoments) -> Result<f64> {
    Ok(-theoretical_variance(coeffs, sm)?)
}

/// Balanced RSS estimate of `E g(X)`: the mean of all measured values.
pub fn brss_estimate(sample: &BrssSample, g: &GFunction) -> f64 {
    let total: f64 = sample.values().iter().flatten().map(|&x| g.eval(x)).sum();
    total / (sample.m() * sample.h()) as f64
}

pub fn srs_estimate(xs: &[f64], g: &GFunction) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(xs.iter().map(|&x| g.eval(x)).sum::<f64>() / xs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::coefficient_set;
    use crate::design::Observation;
    use crate::distcat::DistributionSpec;
    use crate::strata::stratum_moments;

    fn toy() -> JpsSample {
        let obs = [(1.0, 1), (3.0, 1), (5.0, 2)].map(|(x, rank)| Observation { x, rank });
        JpsSample::new(2, obs.to_vec()).unwrap()
    }

    #[test]
    fn weight_examples() {
        assert_eq!(weights(WeightScheme::Srs, &[1, 2]).unwrap(), vec![1.0 / 3.0, 2.0 / 3.0]);
        assert_eq!(weights(WeightScheme::StandardJps, &[1, 0, 2]).unwrap(), vec![0.5, 0.0, 0.5]);
        let ff = weights(WeightScheme::FreyFeeman, &[1, 2]).unwrap();
        assert!((ff[0] - 3.0 / 7.0).abs() < 1e-15 && (ff[1] - 4.0 / 7.0).abs() < 1e-15);
        assert_eq!(weights(WeightScheme::FreyFeeman, &[0, 0]), Err(Error::EmptySample));
    }

    #[test]
    fn toy_sample_estimates() {
        let s = toy();
        let jps = estimate_mean(&s, WeightScheme::StandardJps);
        assert_eq!((jps.value, jps.h_n, jps.full_rank), (3.5, 2, true));
        assert_eq!(estimate_mean(&s, WeightScheme::Srs).value, 3.0);
        let sq = estimate_g_mean(&s, &GFunction::Power(2), WeightScheme::StandardJps);
        assert_eq!(sq.value, 15.0);
        assert_eq!(estimate_variance(&s, WeightScheme::StandardJps).unwrap().value, 2.75);
        let cdf = estimate_cdf(&s, WeightScheme::FreyFeeman, &[0.0, 2.0, 4.0, f64::INFINITY]);
        assert_eq!(cdf[3].value, 1.0);
        assert_eq!(cdf[0].value, 0.0);
        assert!(cdf.windows(2).all(|w| w[0].value <= w[1].value));
    }

    #[test]
    fn one_occupied_stratum_is_plain_statistics() {
        let obs = [2.0, 4.0, 9.0].map(|x| Observation { x, rank: 2 });
        let s = JpsSample::new(3, obs.to_vec()).unwrap();
        for scheme in WeightScheme::ALL {
            assert_eq!(estimate_mean(&s, scheme).value, 5.0);
            let v = estimate_variance(&s, scheme).unwrap().value;
            assert!((v - 26.0 / 3.0).abs() < 1e-12);
        }
        let single = JpsSample::new(2, vec![Observation { x: 1.0, rank: 1 }]).unwrap();
        assert!(estimate_variance(&single, WeightScheme::Srs).is_err());
    }

    #[test]
    fn variance_forms_agree() {
        let d = DistributionSpec::exponential(1.0).unwrap();
        for h in 1..=5 {
            let sm = stratum_moments(&d, &GFunction::Identity, h).unwrap();
            for scheme in WeightScheme::ALL {
                let c = coefficient_set(scheme, 7, h as u64).unwrap();
                let a = theoretical_variance(&c, &sm).unwrap();
                let b = theoretical_variance_alt(&c, &sm).unwrap();
                assert!((a - b).abs() <= 1e-12 * a, "{scheme} H={h}: {a} vs {b}");
            }
            let srs = coefficient_set(WeightScheme::Srs, 7, h as u64).unwrap();
            let v = theoretical_variance(&srs, &sm).unwrap();
            assert!((v - sm.sigma2_g / 7.0).abs() < 1e-12);
            assert!((variance_estimator_bias(&srs, &sm).unwrap() + sm.sigma2_g / 7.0).abs() < 1e-12);
        }
        let sm = stratum_moments(&d, &GFunction::Identity, 3).unwrap();
        let c = coefficient_set(WeightScheme::Srs, 7, 2).unwrap();
        assert_eq!(theoretical_variance(&c, &sm), Err(Error::SizeMismatch(2, 3)));
    }

    #[test]
    fn brss_variance_examples() {
        let u = DistributionSpec::uniform(0.0, 1.0).unwrap();
        let sm = stratum_moments(&u, &GFunction::Identity, 2).unwrap();
        assert!((brss_variance(&sm, 1).unwrap() - 1.0 / 36.0).abs() < 1e-14);
        let alt = sm.sigma2_g / 2.0 * (1.0 - sm.delta_g);
        assert!((brss_variance(&sm, 1).unwrap() - alt).abs() < 1e-14);
        let sm1 = stratum_moments(&u, &GFunction::Identity, 1).unwrap();
        assert!((brss_variance(&sm1, 4).unwrap() - 1.0 / 48.0).abs() < 1e-14);
    }
}
