//! Moments of the post-stratification weights `C_r` under the multinomial
//! occupancy law `N ~ Mult(n; 1/H, ..., 1/H)`.
//!
//! Closed forms (SRS and standard JPS) and the Frey–Feeman partition sum are
//! evaluated in exact rational arithmetic. [`enumerate_oracle`] is an
//! independent brute-force route over every count vector.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use statrs::function::factorial::{ln_binomial, ln_factorial};

use crate::accum::{map_blocks, Moments};
use crate::error::{invalid, Error, Result};
use crate::rng;

/// Largest number of count vectors the exhaustive routes will visit.
pub const ENUMERATION_BUDGET: u128 = 2_000_000;

/// Default replicate count for simulated coefficients.
pub const DEFAULT_MC_REPS: u64 = 10_000_000;

/// Rule turning stratum counts into estimator weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightScheme {
    /// `C_r = N_r / n`
    Srs,
    /// `C_r = I_r / h_n`
    StandardJps,
    /// `C_r = a_r / Σ a_s` with `a_r = N_r / (H N_r + 2)`
    FreyFeeman,
}

impl WeightScheme {
    pub const ALL: [WeightScheme; 3] = [WeightScheme::Srs, WeightScheme::StandardJps, WeightScheme::FreyFeeman];

    /// Exact weights for a count vector; `H` is `counts.len()`.
    pub fn exact_weights(&self, counts: &[u64]) -> Result<Vec<BigRational>> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::EmptySample);
        }
        let h = counts.len() as u64;
        let raw: Vec<BigRational> = counts
            .iter()
            .map(|&c| match self {
                WeightScheme::Srs => ratio(c, 1),
                WeightScheme::StandardJps => ratio((c > 0) as u64, 1),
                WeightScheme::FreyFeeman => ratio(c, h * c + 2),
            })
            .collect();
        let sum: BigRational = raw.iter().sum();
        Ok(raw.into_iter().map(|a| a / &sum).collect())
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightScheme::Srs => "srs",
            WeightScheme::StandardJps => "jps",
            WeightScheme::FreyFeeman => "ff",
        })
    }
}

impl FromStr for WeightScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "srs" => Ok(WeightScheme::Srs),
            "jps" | "standard" | "standard_jps" => Ok(WeightScheme::StandardJps),
            "ff" | "frey_feeman" | "freyfeeman" => Ok(WeightScheme::FreyFeeman),
            other => Err(Error::Parse(format!("unknown weight scheme `{other}` (srs|jps|ff)"))),
        }
    }
}

fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn check_nh(n: u64, h: u64) -> Result<()> {
    if n == 0 || h == 0 {
        return Err(invalid(format!("need n >= 1 and H >= 1, got n = {n}, H = {h}")));
    }
    Ok(())
}

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut c = BigUint::one();
    for i in 0..k {
        c = c * (n - i) / (i + 1);
    }
    c
}

/// Number of count vectors: compositions of `n` into `H` nonnegative parts.
pub fn composition_count(n: u64, h: u64) -> u128 {
    if h == 0 {
        return 0;
    }
    binomial(n + h - 1, h - 1).to_u128().unwrap_or(u128::MAX)
}

fn check_budget(n: u64, h: u64) -> Result<()> {
    let count = composition_count(n, h);
    if count > ENUMERATION_BUDGET {
        return Err(Error::BudgetExceeded { count, budget: ENUMERATION_BUDGET });
    }
    Ok(())
}

/// Exact weight moments for one `(scheme, n, H)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactMoments {
    pub e_c1: BigRational,
    pub v_c1: BigRational,
    pub cov_c1c2: BigRational,
    pub e_j1c1sq: BigRational,
}

impl ExactMoments {
    fn from_second_moments(h: u64, e_c1sq: BigRational, e_j1c1sq: BigRational) -> Self {
        let e_c1 = ratio(1, h);
        let v_c1 = e_c1sq - &e_c1 * &e_c1;
        let cov_c1c2 = if h > 1 { -&v_c1 / BigRational::from_integer(BigInt::from(h - 1)) } else { BigRational::zero() };
        ExactMoments { e_c1, v_c1, cov_c1c2, e_j1c1sq }
    }
}

/// Distribution of `I_1 / h_n` as `(value, probability)` pairs: the value 0
/// first, then `1/k` for `k = 1..H`.
pub fn std_inv_hn_pmf(n: u64, h: u64) -> Result<Vec<(BigRational, BigRational)>> {
    check_nh(n, h)?;
    let hn = BigInt::from(h).pow(n as u32);
    let mut out = Vec::with_capacity(h as usize + 1);
    out.push((BigRational::zero(), BigRational::new(BigInt::from(h - 1).pow(n as u32), hn.clone())));
    for k in 1..=h {
        // Stratum 1 plus k-1 others, each hit at least once.
        let ways = BigInt::from(binomial(h - 1, k - 1)) * surjections(n, k);
        out.push((ratio(1, k), BigRational::new(ways, hn.clone())));
    }
    Ok(out)
}

/// Onto maps from `m` labelled units to `k` strata, by inclusion–exclusion.
fn surjections(m: u64, k: u64) -> BigInt {
    let mut s = BigInt::zero();
    for j in 0..=k {
        let term = BigInt::from(binomial(k, j)) * BigInt::from(k - j).pow(m as u32);
        if j % 2 == 0 {
            s += term;
        } else {
            s -= term;
        }
    }
    s
}

/// `V(I_1 / h_n) = H^-2 Σ_{k=1}^{H-1} (k/H)^{n-1}`
pub fn std_v_coeff(n: u64, h: u64) -> Result<BigRational> {
    check_nh(n, h)?;
    let mut num = BigInt::zero();
    for k in 1..h {
        num += BigInt::from(k).pow(n as u32 - 1);
    }
    Ok(BigRational::new(num, BigInt::from(h).pow(n as u32 + 1)))
}

/// `E(J_1 / h_n^2)`, exactly.
///
/// Sums over `N_1 = n_1` and the number `h` of occupied strata; the other
/// `n - n_1` units fall onto exactly `h - 1` of the remaining `H - 1` strata.
/// Everything is kept over the common denominator `lcm(1..n) H^n`.
pub fn std_j_coeff(n: u64, h: u64) -> Result<BigRational> {
    check_nh(n, h)?;
    let others = (h - 1) as usize;
    let mut lcm = BigUint::one();
    for i in 2..=n {
        lcm = lcm.lcm(&BigUint::from(i));
    }
    let pascal: Vec<Vec<BigInt>> = (0..=others as u64)
        .map(|k| (0..=k).map(|j| BigInt::from(binomial(k, j))).collect())
        .collect();
    // powers[b] = b^m for the current m
    let mut powers: Vec<BigInt> = vec![BigInt::one(); others + 1];
    let mut totals = vec![BigInt::zero(); others + 1];
    let mut c_n_n1 = BigUint::one();
    for m in 0..n {
        let n1 = n - m;
        let coef = BigInt::from(&c_n_n1 * (&lcm / n1));
        for k in 0..=others.min(m as usize) {
            let mut surj = BigInt::zero();
            for (j, c) in pascal[k].iter().enumerate() {
                let term = c * &powers[k - j];
                if j % 2 == 0 {
                    surj += term;
                } else {
                    surj -= term;
                }
            }
            if !surj.is_zero() {
                totals[k] += &coef * surj;
            }
        }
        for (b, p) in powers.iter_mut().enumerate() {
            *p *= b;
        }
        c_n_n1 = c_n_n1 * n1 / (m + 1);
    }
    let mut sum = BigRational::zero();
    for (k, t) in totals.into_iter().enumerate() {
        let occupied = k as u64 + 1;
        let num = BigInt::from(binomial(h - 1, k as u64)) * t;
        sum += BigRational::new(num, BigInt::from(occupied * occupied));
    }
    Ok(sum / BigRational::from_integer(BigInt::from(lcm) * BigInt::from(h).pow(n as u32)))
}

/// Floating-point `E(J_1 / h_n^2)` in `O(nH)` without alternating sums:
/// condition on `N_1`, then track how many of the other strata are occupied
/// as the remaining units are dropped in one at a time.
pub fn std_j_coeff_f64(n: u64, h: u64) -> Result<f64> {
    check_nh(n, h)?;
    if h == 1 {
        return Ok(1.0 / n as f64);
    }
    let others = (h - 1) as usize;
    let (ln_p, ln_q) = ((1.0 / h as f64).ln(), (1.0 - 1.0 / h as f64).ln());
    let mut occ = vec![0.0; others + 1];
    occ[0] = 1.0;
    let mut sum = 0.0;
    for m in 0..n {
        let n1 = n - m;
        let p_n1 = (ln_binomial(n, n1) + n1 as f64 * ln_p + m as f64 * ln_q).exp();
        let inner: f64 = occ.iter().enumerate().map(|(k, p)| p / ((k + 1) * (k + 1)) as f64).sum();
        sum += p_n1 / n1 as f64 * inner;
        for k in (0..=others).rev() {
            let stay = occ[k] * k as f64 / others as f64;
            let arrive = if k > 0 { occ[k - 1] * (others - k + 1) as f64 / others as f64 } else { 0.0 };
            occ[k] = stay + arrive;
        }
    }
    Ok(sum)
}

/// Exact weight moments by the analytic route for each scheme: closed forms
/// for SRS and standard JPS, a sum over integer partitions of `n` for
/// Frey–Feeman (composition budget applies).
pub fn exact_moments(scheme: WeightScheme, n: u64, h: u64) -> Result<ExactMoments> {
    check_nh(n, h)?;
    match scheme {
        WeightScheme::Srs => {
            let e_c1 = ratio(1, h);
            let v_c1 = ratio(h - 1, n * h * h);
            let cov_c1c2 = if h > 1 { -ratio(1, n * h * h) } else { BigRational::zero() };
            Ok(ExactMoments { e_c1, v_c1, cov_c1c2, e_j1c1sq: ratio(1, n * h) })
        }
        WeightScheme::StandardJps => {
            let v_c1 = std_v_coeff(n, h)?;
            let e_c1sq = &v_c1 + ratio(1, h * h);
            Ok(ExactMoments::from_second_moments(h, e_c1sq, std_j_coeff(n, h)?))
        }
        WeightScheme::FreyFeeman => {
            check_budget(n, h)?;
            partition_moments(scheme, n, h)
        }
    }
}

/// `E C_1^2` and `E J_1 C_1^2` summed over partitions of `n` into at most
/// `H` parts; each partition stands for all of its distinct arrangements.
fn partition_moments(scheme: WeightScheme, n: u64, h: u64) -> Result<ExactMoments> {
    let fact: Vec<BigUint> = std::iter::once(BigUint::one())
        .chain((1..=n.max(h)).scan(BigUint::one(), |f, i| {
            *f *= i;
            Some(f.clone())
        }))
        .collect();
    let mut sq = BigRational::zero();
    let mut jsq = BigRational::zero();
    let mut parts = Vec::with_capacity(h as usize);
    let mut visit = |parts: &[u64]| -> Result<()> {
        let mut counts = parts.to_vec();
        counts.resize(h as usize, 0);
        let w = scheme.exact_weights(&counts)?;
        let mut arrangements = fact[h as usize].clone();
        let mut multinomial = fact[n as usize].clone();
        let mut run = 1usize;
        for i in 0..counts.len() {
            multinomial /= &fact[counts[i] as usize];
            if i + 1 < counts.len() && counts[i + 1] == counts[i] {
                run += 1;
            } else {
                arrangements /= &fact[run];
                run = 1;
            }
        }
        let mass = BigRational::from_integer(BigInt::from(arrangements * multinomial));
        let s1: BigRational = w.iter().map(|c| c * c).sum();
        let s2: BigRational = w
            .iter()
            .zip(&counts)
            .filter(|(_, &c)| c > 0)
            .map(|(wc, &c)| wc * wc / BigRational::from_integer(BigInt::from(c)))
            .sum();
        sq += &mass * s1;
        jsq += mass * s2;
        Ok(())
    };
    partitions(n, n, h as usize, &mut parts, &mut visit)?;
    let scale = BigRational::from_integer(BigInt::from(h) * BigInt::from(h).pow(n as u32));
    Ok(ExactMoments::from_second_moments(h, sq / &scale, jsq / scale))
}

/// Float version of [`partition_moments`] for Frey–Feeman: `(V(C_1),
/// E(J_1 C_1^2))`. The rational sums acquire enormous denominators beyond
/// n ≈ 30, while the float sum over the same partitions stays cheap.
pub fn ff_partition_moments_f64(n: u64, h: u64) -> Result<(f64, f64)> {
    check_nh(n, h)?;
    check_budget(n, h)?;
    let hf = h as f64;
    let ln_total = ln_factorial(h) + ln_factorial(n) - n as f64 * hf.ln();
    let (mut dev, mut jsq) = (0.0, 0.0);
    let mut counts = vec![0u64; h as usize];
    let mut a = vec![0.0; h as usize];
    let mut visit = |parts: &[u64]| -> Result<()> {
        counts.iter_mut().for_each(|c| *c = 0);
        counts[..parts.len()].copy_from_slice(parts);
        let mut ln_mass = ln_total;
        let mut run = 1u64;
        for i in 0..counts.len() {
            ln_mass -= ln_factorial(counts[i]);
            if i + 1 < counts.len() && counts[i + 1] == counts[i] {
                run += 1;
            } else {
                ln_mass -= ln_factorial(run);
                run = 1;
            }
        }
        let mass = ln_mass.exp();
        float_weights(WeightScheme::FreyFeeman, &counts, &mut a);
        let mut d = 0.0;
        let mut j = 0.0;
        for (c, &k) in a.iter().zip(&counts) {
            d += (c - 1.0 / hf) * (c - 1.0 / hf);
            if k > 0 {
                j += c * c / k as f64;
            }
        }
        dev += mass * d;
        jsq += mass * j;
        Ok(())
    };
    let mut parts = Vec::with_capacity(h as usize);
    partitions(n, n, h as usize, &mut parts, &mut visit)?;
    Ok((dev / hf, jsq / hf))
}

fn partitions(
    rest: u64,
    max_part: u64,
    slots: usize,
    parts: &mut Vec<u64>,
    visit: &mut impl FnMut(&[u64]) -> Result<()>,
) -> Result<()> {
    if rest == 0 {
        return visit(parts);
    }
    if slots == 0 {
        return Ok(());
    }
    for p in (1..=max_part.min(rest)).rev() {
        parts.push(p);
        partitions(rest - p, p, slots - 1, parts, visit)?;
        parts.pop();
    }
    Ok(())
}

/// Quantity computed by [`enumerate_oracle`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Functional {
    #[serde(rename = "e_c1")]
    EC1,
    #[serde(rename = "v_c1")]
    VC1,
    #[serde(rename = "e_j1c1sq")]
    EJ1C1Sq,
    #[serde(rename = "cov_c1c2")]
    CovC1C2,
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Functional::EC1 => "e_c1",
            Functional::VC1 => "v_c1",
            Functional::EJ1C1Sq => "e_j1c1sq",
            Functional::CovC1C2 => "cov_c1c2",
        })
    }
}

impl FromStr for Functional {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "e_c1" => Ok(Functional::EC1),
            "v_c1" => Ok(Functional::VC1),
            "e_j1c1sq" => Ok(Functional::EJ1C1Sq),
            "cov_c1c2" => Ok(Functional::CovC1C2),
            other => Err(Error::Parse(format!("unknown functional `{other}`"))),
        }
    }
}

/// Visits every count vector in colex order together with its multinomial
/// coefficient `n! / Π N_r!`, updated in O(1) big-integer steps.
fn for_each_composition(n: u64, h: u64, mut visit: impl FnMut(&[u64], &BigUint) -> Result<()>) -> Result<()> {
    check_budget(n, h)?;
    let h = h as usize;
    let mut c = vec![0u64; h];
    c[0] = n;
    let mut coef = BigUint::one();
    loop {
        visit(&c, &coef)?;
        let i = match c.iter().position(|&x| x > 0) {
            Some(i) if i + 1 < h => i,
            _ => return Ok(()),
        };
        let t = c[i];
        c[i] = 0;
        c[0] = t - 1;
        coef = coef * t / (c[i + 1] + 1);
        c[i + 1] += 1;
    }
}

/// Exact expectation by brute force over all `C(n+H-1, H-1)` count vectors,
/// each with probability `n!/(Π N_r!) H^-n`. Shares nothing with the analytic
/// routes beyond [`WeightScheme::exact_weights`].
pub fn enumerate_oracle(scheme: WeightScheme, n: u64, h: u64, functional: Functional) -> Result<BigRational> {
    check_nh(n, h)?;
    let mut e1 = BigRational::zero();
    let mut e2 = BigRational::zero();
    let mut ej = BigRational::zero();
    let mut e12 = BigRational::zero();
    for_each_composition(n, h, |counts, coef| {
        let w = scheme.exact_weights(counts)?;
        let p = BigRational::from_integer(BigInt::from(coef.clone()));
        e1 += &p * &w[0];
        e2 += &p * &w[0] * &w[0];
        if counts[0] > 0 {
            ej += &p * &w[0] * &w[0] / BigRational::from_integer(BigInt::from(counts[0]));
        }
        if h > 1 {
            e12 += &p * &w[0] * &w[1];
        }
        Ok(())
    })?;
    let total = BigRational::from_integer(BigInt::from(h).pow(n as u32));
    let (e1, e2, ej, e12) = (e1 / &total, e2 / &total, ej / &total, e12 / &total);
    Ok(match functional {
        Functional::EC1 => e1,
        Functional::VC1 => &e2 - &e1 * &e1,
        Functional::EJ1C1Sq => ej,
        Functional::CovC1C2 if h > 1 => e12 - &e1 * &e1,
        Functional::CovC1C2 => BigRational::zero(),
    })
}

/// Distribution of `C_1` by brute force, as sorted `(value, probability)`.
pub fn enumerate_pmf(scheme: WeightScheme, n: u64, h: u64) -> Result<Vec<(BigRational, BigRational)>> {
    check_nh(n, h)?;
    let mut table: std::collections::BTreeMap<BigRational, BigInt> = Default::default();
    for_each_composition(n, h, |counts, coef| {
        let w = scheme.exact_weights(counts)?;
        *table.entry(w[0].clone()).or_insert_with(BigInt::zero) += BigInt::from(coef.clone());
        Ok(())
    })?;
    let total = BigInt::from(h).pow(n as u32);
    Ok(table.into_iter().map(|(v, c)| (v, BigRational::new(c, total.clone()))).collect())
}

/// Simulated weight moments with standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulatedMoments {
    pub v_c1: f64,
    pub se_v_c1: f64,
    pub e_j1c1sq: f64,
    pub se_e_j1c1sq: f64,
    pub cov_c1c2: f64,
    pub se_cov_c1c2: f64,
    pub reps: u64,
}

/// Draws count vectors from the multinomial law (sequential binomials) and
/// averages `C_r^2`, `J_r C_r^2` and `C_1 C_2` over strata and replicates.
/// Replicate `i` uses stream `(seed, i)`, so the result does not depend on
/// the number of worker threads.
pub fn mc_weight_moments(scheme: WeightScheme, n: u64, h: u64, reps: u64, seed: u64) -> Result<SimulatedMoments> {
    check_nh(n, h)?;
    if reps < 2 {
        return Err(invalid("need at least two replicates"));
    }
    let hf = h as f64;
    let blocks = map_blocks(reps, |range| {
        let mut acc = [Moments::default(); 3];
        let mut counts = vec![0u64; h as usize];
        let mut w = vec![0.0; h as usize];
        for rep in range {
            let mut rng = rng::stream(seed, rep);
            draw_counts(&mut rng, n, &mut counts);
            float_weights(scheme, &counts, &mut w);
            let sq = w.iter().map(|c| c * c).sum::<f64>() / hf;
            let jsq = w
                .iter()
                .zip(&counts)
                .filter(|(_, &c)| c > 0)
                .map(|(c, &k)| c * c / k as f64)
                .sum::<f64>()
                / hf;
            let cross = if h > 1 { w[0] * w[1] } else { 0.0 };
            acc[0].push(sq);
            acc[1].push(jsq);
            acc[2].push(cross);
        }
        acc
    });
    let mut acc = [Moments::default(); 3];
    for b in &blocks {
        for (a, x) in acc.iter_mut().zip(b) {
            a.merge(x);
        }
    }
    let e_c1 = 1.0 / hf;
    Ok(SimulatedMoments {
        v_c1: acc[0].mean - e_c1 * e_c1,
        se_v_c1: acc[0].se_mean(),
        e_j1c1sq: acc[1].mean,
        se_e_j1c1sq: acc[1].se_mean(),
        cov_c1c2: if h > 1 { acc[2].mean - e_c1 * e_c1 } else { 0.0 },
        se_cov_c1c2: acc[2].se_mean(),
        reps,
    })
}

/// Equiprobable multinomial counts via sequential conditional binomials.
pub(crate) fn draw_counts<R: rand::Rng + ?Sized>(rng: &mut R, n: u64, counts: &mut [u64]) {
    let h = counts.len();
    let mut rest = n;
    for (r, c) in counts.iter_mut().enumerate() {
        let left = (h - r) as f64;
        *c = if r + 1 == h || rest == 0 {
            rest
        } else {
            Binomial::new(rest, 1.0 / left).expect("valid binomial").sample(rng)
        };
        rest -= *c;
    }
}

pub(crate) fn float_weights(scheme: WeightScheme, counts: &[u64], out: &mut [f64]) {
    let h = counts.len() as f64;
    for (w, &c) in out.iter_mut().zip(counts) {
        *w = match scheme {
            WeightScheme::Srs => c as f64,
            WeightScheme::StandardJps => (c > 0) as u64 as f64,
            WeightScheme::FreyFeeman => c as f64 / (h * c as f64 + 2.0),
        };
    }
    let s: f64 = out.iter().sum();
    out.iter_mut().for_each(|w| *w /= s);
}

/// How a coefficient set was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Exactness {
    ClosedForm,
    Enumerated,
    MonteCarlo { reps: u64, se_v_c1: f64, se_e_j1c1sq: f64 },
}

/// Weight-scheme coefficients entering the variance and efficiency formulas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub scheme: WeightScheme,
    pub n: u64,
    pub h: u64,
    pub e_c1: f64,
    pub v_c1: f64,
    pub cov_c1c2: f64,
    pub e_j1c1sq: f64,
    pub m1: f64,
    pub m2: f64,
    pub k1: f64,
    pub k2: f64,
    pub exactness: Exactness,
}

impl CoefficientSet {
    fn build(scheme: WeightScheme, n: u64, h: u64, v_c1: f64, cov_c1c2: f64, e_j1c1sq: f64, exactness: Exactness) -> Self {
        let (nf, hf) = (n as f64, h as f64);
        let k1 = hf * e_j1c1sq;
        // With one stratum the between-strata term vanishes; K2 is pinned to
        // its SRS value so that M2 = 1 for every scheme.
        let k2 = if h > 1 { hf * hf / (hf - 1.0) * v_c1 } else { 1.0 / nf };
        CoefficientSet {
            scheme,
            n,
            h,
            e_c1: 1.0 / hf,
            v_c1,
            cov_c1c2,
            e_j1c1sq,
            m1: nf * k1,
            m2: nf * k2,
            k1,
            k2,
            exactness,
        }
    }

    pub fn from_exact(scheme: WeightScheme, n: u64, h: u64, m: &ExactMoments, exactness: Exactness) -> Self {
        Self::build(scheme, n, h, to_f64(&m.v_c1), to_f64(&m.cov_c1c2), to_f64(&m.e_j1c1sq), exactness)
    }

    pub fn from_simulated(scheme: WeightScheme, n: u64, h: u64, s: &SimulatedMoments) -> Self {
        let exactness = Exactness::MonteCarlo { reps: s.reps, se_v_c1: s.se_v_c1, se_e_j1c1sq: s.se_e_j1c1sq };
        Self::build(scheme, n, h, s.v_c1, s.cov_c1c2, s.e_j1c1sq, exactness)
    }

    /// Standard errors of `(m1, m2)`, zero unless simulated.
    pub fn se_m(&self) -> (f64, f64) {
        match self.exactness {
            Exactness::MonteCarlo { se_v_c1, se_e_j1c1sq, .. } => {
                let (nf, hf) = (self.n as f64, self.h as f64);
                let m2 = if self.h > 1 { nf * hf * hf / (hf - 1.0) * se_v_c1 } else { 0.0 };
                (nf * hf * se_e_j1c1sq, m2)
            }
            _ => (0.0, 0.0),
        }
    }
}

/// How Frey–Feeman moments are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    /// Exact when the composition budget allows, simulated otherwise.
    Auto { reps: u64, seed: u64 },
    Enumerate,
    MonteCarlo { reps: u64, seed: u64 },
}

impl Default for Method {
    fn default() -> Self {
        Method::Auto { reps: DEFAULT_MC_REPS, seed: 0 }
    }
}

/// `V(A_1)` and `E(J_1 A_1^2)` for the Frey–Feeman weights.
pub fn ff_weight_moments(n: u64, h: u64, method: Method) -> Result<CoefficientSet> {
    coefficient_set_with(WeightScheme::FreyFeeman, n, h, method)
}

/// Coefficients with the default method: exact where possible.
pub fn coefficient_set(scheme: WeightScheme, n: u64, h: u64) -> Result<CoefficientSet> {
    coefficient_set_with(scheme, n, h, Method::default())
}

/// Coefficients for SRS and standard JPS are always exact; `method` only
/// affects Frey–Feeman, or forces simulation for any scheme.
pub fn coefficient_set_with(scheme: WeightScheme, n: u64, h: u64, method: Method) -> Result<CoefficientSet> {
    check_nh(n, h)?;
    let simulate = |reps, seed| -> Result<CoefficientSet> {
        let s = mc_weight_moments(scheme, n, h, reps, seed)?;
        Ok(CoefficientSet::from_simulated(scheme, n, h, &s))
    };
    let enumerated = || -> Result<CoefficientSet> {
        let (v_c1, e_j1c1sq) = ff_partition_moments_f64(n, h)?;
        let cov = if h > 1 { -v_c1 / (h - 1) as f64 } else { 0.0 };
        Ok(CoefficientSet::build(scheme, n, h, v_c1, cov, e_j1c1sq, Exactness::Enumerated))
    };
    match (scheme, method) {
        (_, Method::MonteCarlo { reps, seed }) => simulate(reps, seed),
        (WeightScheme::Srs | WeightScheme::StandardJps, _) => {
            let m = exact_moments(scheme, n, h)?;
            Ok(CoefficientSet::from_exact(scheme, n, h, &m, Exactness::ClosedForm))
        }
        (WeightScheme::FreyFeeman, Method::Enumerate) => enumerated(),
        (WeightScheme::FreyFeeman, Method::Auto { reps, seed }) => {
            if composition_count(n, h) <= ENUMERATION_BUDGET {
                enumerated()
            } else {
                simulate(reps, seed)
            }
        }
    }
}

/// Relative error of a float against an exact rational.
pub fn relative_gap(x: f64, exact: &BigRational) -> f64 {
    let e = to_f64(exact);
    if exact.is_zero() {
        x.abs()
    } else {
        ((x - e) / e).abs()
    }
}

/// `|a|` as a float, for reporting rational residuals.
pub fn abs_f64(a: &BigRational) -> f64 {
    to_f64(&a.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn pmf_examples() {
        let p = std_inv_hn_pmf(2, 2).unwrap();
        assert_eq!(p, vec![(q(0, 1), q(1, 4)), (q(1, 1), q(1, 4)), (q(1, 2), q(1, 2))]);
        let p = std_inv_hn_pmf(7, 1).unwrap();
        assert_eq!(p, vec![(q(0, 1), q(0, 1)), (q(1, 1), q(1, 1))]);
        let p = std_inv_hn_pmf(1, 3).unwrap();
        assert_eq!(p[0].1, q(2, 3));
        assert_eq!(p[1].1, q(1, 3));
        assert!(p[2..].iter().all(|(_, pr)| pr.is_zero()));
    }

    #[test]
    fn pmf_sums_to_one_with_mean_one_over_h() {
        for n in 1..=12 {
            for h in 1..=6 {
                let p = std_inv_hn_pmf(n, h).unwrap();
                let total: BigRational = p.iter().map(|(_, pr)| pr.clone()).sum();
                assert_eq!(total, q(1, 1));
                assert_eq!(p[0].1, q((h - 1).pow(n as u32) as i64, h.pow(n as u32) as i64));
                let mean: BigRational = p.iter().map(|(v, pr)| v * pr).sum();
                assert_eq!(mean, q(1, h as i64));
                let var: BigRational = p.iter().map(|(v, pr)| v * v * pr).sum::<BigRational>() - &mean * &mean;
                assert_eq!(var, std_v_coeff(n, h).unwrap());
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(std_v_coeff(2, 2).unwrap(), q(1, 8));
        assert_eq!(std_v_coeff(3, 2).unwrap(), q(1, 16));
        assert_eq!(std_v_coeff(9, 1).unwrap(), q(0, 1));
        assert_eq!(std_j_coeff(2, 2).unwrap(), q(1, 4));
        assert_eq!(std_j_coeff(5, 1).unwrap(), q(1, 5));
        assert_eq!(std_j_coeff(1, 2).unwrap(), q(1, 2));
    }

    #[test]
    fn ff_examples() {
        let m = exact_moments(WeightScheme::FreyFeeman, 2, 2).unwrap();
        assert_eq!(m.v_c1, q(1, 8));
        assert_eq!(m.e_j1c1sq, q(1, 4));
        // n = 3: A_1 ∈ {1, 4/7, 3/7, 0} with probabilities 1/8, 3/8, 3/8, 1/8.
        let e2 = q(1, 8) + q(3, 8) * q(16, 49) + q(3, 8) * q(9, 49);
        let m = exact_moments(WeightScheme::FreyFeeman, 3, 2).unwrap();
        assert_eq!(m.v_c1, e2 - q(1, 4));
        let pmf = enumerate_pmf(WeightScheme::FreyFeeman, 3, 2).unwrap();
        assert_eq!(pmf, vec![(q(0, 1), q(1, 8)), (q(3, 7), q(3, 8)), (q(4, 7), q(3, 8)), (q(1, 1), q(1, 8))]);
        let m = exact_moments(WeightScheme::FreyFeeman, 6, 1).unwrap();
        assert_eq!((m.v_c1, m.e_j1c1sq), (q(0, 1), q(1, 6)));
    }

    #[test]
    fn ff_float_partition_sum_matches_rational() {
        for n in 1..=20 {
            for h in 1..=5 {
                let exact = exact_moments(WeightScheme::FreyFeeman, n, h).unwrap();
                let (v, j) = ff_partition_moments_f64(n, h).unwrap();
                assert!(relative_gap(j, &exact.e_j1c1sq) < 1e-13, "n={n} H={h}");
                if h > 1 {
                    assert!(relative_gap(v, &exact.v_c1) < 1e-13, "n={n} H={h}");
                } else {
                    assert!(v.abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn srs_coefficients_are_one() {
        for (n, h) in [(1, 1), (4, 2), (17, 5), (60, 14)] {
            let c = coefficient_set(WeightScheme::Srs, n, h).unwrap();
            assert!((c.m1 - 1.0).abs() < 1e-15 && (c.m2 - 1.0).abs() < 1e-15, "{c:?}");
        }
    }

    #[test]
    fn jps_small_cases() {
        let c = coefficient_set(WeightScheme::StandardJps, 2, 2).unwrap();
        assert_eq!((c.m1, c.m2), (1.0, 1.0));
        let c = coefficient_set(WeightScheme::StandardJps, 3, 2).unwrap();
        assert_eq!(c.m2, 0.75);
        let m1 = 6.0 * to_f64(&enumerate_oracle(WeightScheme::StandardJps, 3, 2, Functional::EJ1C1Sq).unwrap());
        assert_eq!(c.m1, m1);
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(enumerate_oracle(WeightScheme::Srs, 4, 2, Functional::VC1).unwrap(), q(1, 16));
        assert_eq!(enumerate_oracle(WeightScheme::StandardJps, 2, 2, Functional::VC1).unwrap(), q(1, 8));
        for s in WeightScheme::ALL {
            assert_eq!(enumerate_oracle(s, 5, 1, Functional::VC1).unwrap(), q(0, 1));
        }
    }

    #[test]
    fn compositions_are_counted_and_weighted_correctly() {
        let mut seen = 0u128;
        let mut mass = BigUint::zero();
        for_each_composition(7, 4, |c, coef| {
            assert_eq!(c.iter().sum::<u64>(), 7);
            let direct = (1..=7u64).product::<u64>() / c.iter().map(|&k| (1..=k).product::<u64>()).product::<u64>();
            assert_eq!(*coef, BigUint::from(direct));
            seen += 1;
            mass += coef;
            Ok(())
        })
        .unwrap();
        assert_eq!(seen, composition_count(7, 4));
        assert_eq!(mass, BigUint::from(4u64.pow(7)));
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(
            enumerate_oracle(WeightScheme::Srs, 200, 6, Functional::VC1),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(matches!(
            coefficient_set_with(WeightScheme::FreyFeeman, 200, 6, Method::Enumerate),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn float_fast_path_agrees_with_exact() {
        for n in [1, 2, 5, 17, 40, 60] {
            for h in [1, 2, 3, 7, 14] {
                let exact = std_j_coeff(n, h).unwrap();
                let fast = std_j_coeff_f64(n, h).unwrap();
                assert!(relative_gap(fast, &exact) < 1e-12, "n={n} H={h}");
            }
        }
    }

    #[test]
    fn draw_counts_preserves_total() {
        let mut rng = rng::stream(3, 0);
        let mut c = vec![0; 5];
        for n in [0, 1, 9, 1000] {
            draw_counts(&mut rng, n, &mut c);
            assert_eq!(c.iter().sum::<u64>(), n);
        }
    }

    #[test]
    fn simulated_moments_match_exact() {
        let s = mc_weight_moments(WeightScheme::StandardJps, 2, 2, 200_000, 1).unwrap();
        assert!((s.v_c1 - 0.125).abs() < 4.0 * s.se_v_c1, "{s:?}");
        assert!((s.e_j1c1sq - 0.25).abs() <= 4.0 * s.se_e_j1c1sq, "{s:?}");
        let s = mc_weight_moments(WeightScheme::Srs, 7, 1, 1000, 1).unwrap();
        assert_eq!(s.v_c1, 0.0);
    }
}
