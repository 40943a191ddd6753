//! Population models and g-functions.
//!
//! Every distribution exposes its CDF, survival function, density and
//! quantile. Quantiles are available from both tails (`quantile` and
//! `quantile_upper`) so that order-statistic integrals can resolve the far
//! tails without losing precision to `1 - u`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use libm::erfc;
use statrs::function::{beta::beta_reg, gamma};

use crate::error::{invalid, Error, Result};
use crate::rng::open_unit;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Normal { mean: f64, sd: f64 },
    StudentT { df: f64 },
    Uniform { lo: f64, hi: f64 },
    Beta { alpha: f64, beta: f64 },
    Exponential { rate: f64 },
    ChiSquare { df: f64 },
    Weibull { shape: f64, scale: f64 },
    Pareto { shape: f64, scale: f64 },
}

/// A validated population model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Family", into = "Family")]
pub struct DistributionSpec {
    family: Family,
}

impl TryFrom<Family> for DistributionSpec {
    type Error = Error;

    fn try_from(family: Family) -> Result<Self> {
        DistributionSpec::new(family)
    }
}

impl From<DistributionSpec> for Family {
    fn from(d: DistributionSpec) -> Family {
        d.family
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite and positive, got {v}")))
    }
}

impl DistributionSpec {
    pub fn new(family: Family) -> Result<Self> {
        match family {
            Family::Normal { mean, sd } => {
                if !mean.is_finite() {
                    return Err(invalid("normal mean must be finite"));
                }
                positive("normal sd", sd)?;
            }
            Family::StudentT { df } => positive("t degrees of freedom", df)?,
            Family::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(invalid(format!("uniform needs finite lo < hi, got ({lo}, {hi})")));
                }
            }
            Family::Beta { alpha, beta } => {
                positive("beta alpha", alpha)?;
                positive("beta beta", beta)?;
            }
            Family::Exponential { rate } => positive("exponential rate", rate)?,
            Family::ChiSquare { df } => positive("chi-square degrees of freedom", df)?,
            Family::Weibull { shape, scale } => {
                positive("weibull shape", shape)?;
                positive("weibull scale", scale)?;
            }
            Family::Pareto { shape, scale } => {
                positive("pareto shape", shape)?;
                positive("pareto scale", scale)?;
            }
        }
        Ok(Self { family })
    }

    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        Self::new(Family::Normal { mean, sd })
    }

    pub fn student_t(df: f64) -> Result<Self> {
        Self::new(Family::StudentT { df })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::new(Family::Uniform { lo, hi })
    }

    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(Family::Beta { alpha, beta })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::new(Family::Exponential { rate })
    }

    pub fn chi_square(df: f64) -> Result<Self> {
        Self::new(Family::ChiSquare { df })
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        Self::new(Family::Weibull { shape, scale })
    }

    pub fn pareto(shape: f64, scale: f64) -> Result<Self> {
        Self::new(Family::Pareto { shape, scale })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Closed support interval (endpoints may be infinite).
    pub fn support(&self) -> (f64, f64) {
        match self.family {
            Family::Normal { .. } | Family::StudentT { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Family::Uniform { lo, hi } => (lo, hi),
            Family::Beta { .. } => (0.0, 1.0),
            Family::Exponential { .. } | Family::ChiSquare { .. } | Family::Weibull { .. } => {
                (0.0, f64::INFINITY)
            }
            Family::Pareto { scale, .. } => (scale, f64::INFINITY),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        let (lo, hi) = self.support();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        match self.family {
            Family::Normal { mean, sd } => 0.5 * erfc(-(x - mean) / sd * FRAC_1_SQRT_2),
            Family::StudentT { df } => {
                if x >= 0.0 {
                    1.0 - t_sf(df, x)
                } else {
                    t_sf(df, -x)
                }
            }
            Family::Uniform { lo, hi } => (x - lo) / (hi - lo),
            Family::Beta { alpha, beta } => {
                if is_arcsine(alpha, beta) {
                    2.0 / PI * x.sqrt().asin()
                } else {
                    beta_reg(alpha, beta, x)
                }
            }
            Family::Exponential { rate } => -(-rate * x).exp_m1(),
            Family::ChiSquare { df } => gamma::gamma_lr(0.5 * df, 0.5 * x),
            Family::Weibull { shape, scale } => -(-(x / scale).powf(shape)).exp_m1(),
            Family::Pareto { shape, scale } => -(shape * (scale / x).ln()).exp_m1(),
        }
    }

    /// Survival function `1 - F(x)`, evaluated without cancellation.
    pub fn sf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        let (lo, hi) = self.support();
        if x <= lo {
            return 1.0;
        }
        if x >= hi {
            return 0.0;
        }
        match self.family {
            Family::Normal { mean, sd } => 0.5 * erfc((x - mean) / sd * FRAC_1_SQRT_2),
            Family::StudentT { df } => {
                if x >= 0.0 {
                    t_sf(df, x)
                } else {
                    1.0 - t_sf(df, -x)
                }
            }
            Family::Uniform { lo, hi } => (hi - x) / (hi - lo),
            Family::Beta { alpha, beta } => {
                if is_arcsine(alpha, beta) {
                    2.0 / PI * (1.0 - x).sqrt().asin()
                } else {
                    beta_reg(beta, alpha, 1.0 - x)
                }
            }
            Family::Exponential { rate } => (-rate * x).exp(),
            Family::ChiSquare { df } => gamma::gamma_ur(0.5 * df, 0.5 * x),
            Family::Weibull { shape, scale } => (-(x / scale).powf(shape)).exp(),
            Family::Pareto { shape, scale } => (scale / x).powf(shape),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if !(x > lo && x < hi) && !(x == lo && lo.is_finite() && self.positive_at_lower()) {
            return 0.0;
        }
        match self.family {
            Family::Normal { mean, sd } => {
                let z = (x - mean) / sd;
                (-0.5 * z * z).exp() / (sd * (2.0 * PI).sqrt())
            }
            Family::StudentT { df } => {
                if df == 3.0 {
                    6.0 * 3f64.sqrt() / (PI * (3.0 + x * x).powi(2))
                } else {
                    (gamma::ln_gamma(0.5 * (df + 1.0))
                        - gamma::ln_gamma(0.5 * df)
                        - 0.5 * (df * PI).ln()
                        - 0.5 * (df + 1.0) * (x * x / df).ln_1p())
                    .exp()
                }
            }
            Family::Uniform { lo, hi } => 1.0 / (hi - lo),
            Family::Beta { alpha, beta } => ((alpha - 1.0) * x.ln() + (beta - 1.0) * (-x).ln_1p()
                - statrs::function::beta::ln_beta(alpha, beta))
            .exp(),
            Family::Exponential { rate } => rate * (-rate * x).exp(),
            Family::ChiSquare { df } => {
                let k = 0.5 * df;
                ((k - 1.0) * x.ln() - 0.5 * x - k * 2f64.ln() - gamma::ln_gamma(k)).exp()
            }
            Family::Weibull { shape, scale } => {
                let z = x / scale;
                shape / scale * z.powf(shape - 1.0) * (-z.powf(shape)).exp()
            }
            Family::Pareto { shape, scale } => shape * scale.powf(shape) / x.powf(shape + 1.0),
        }
    }

    fn positive_at_lower(&self) -> bool {
        matches!(
            self.family,
            Family::Uniform { .. } | Family::Exponential { .. } | Family::Pareto { .. }
        )
    }

    /// Lower-tail quantile: the `x` with `F(x) = u`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        check_probability(u)?;
        Ok(self.quantile_lower_unchecked(u))
    }

    /// Upper-tail quantile: the `x` with `1 - F(x) = v`.
    pub fn quantile_upper(&self, v: f64) -> Result<f64> {
        check_probability(v)?;
        Ok(self.quantile_upper_unchecked(v))
    }

    /// Quantile at a point given both `u` and `v = 1 - u`; the smaller of the
    /// two drives the computation.
    pub(crate) fn quantile_pair(&self, u: f64, v: f64) -> f64 {
        if u <= v {
            self.quantile_lower_unchecked(u)
        } else {
            self.quantile_upper_unchecked(v)
        }
    }

    pub(crate) fn quantile_lower_unchecked(&self, u: f64) -> f64 {
        match self.family {
            Family::Normal { mean, sd } => mean + sd * std_normal_quantile(u),
            Family::Uniform { lo, hi } => lo + u * (hi - lo),
            Family::Beta { alpha, beta } if is_arcsine(alpha, beta) => (0.5 * PI * u).sin().powi(2),
            Family::Exponential { rate } => -(-u).ln_1p() / rate,
            Family::Weibull { shape, scale } => scale * (-(-u).ln_1p()).powf(1.0 / shape),
            Family::Pareto { shape, scale } => scale * (-(-u).ln_1p() / shape).exp(),
            // Symmetric about zero: solve in the smaller tail.
            Family::StudentT { .. } if u > 0.5 => -self.invert(1.0 - u, false),
            _ => self.invert(u, false),
        }
    }

    pub(crate) fn quantile_upper_unchecked(&self, v: f64) -> f64 {
        match self.family {
            Family::Normal { mean, sd } => mean - sd * std_normal_quantile(v),
            Family::StudentT { .. } => -self.invert(v, false),
            Family::Uniform { lo, hi } => hi - v * (hi - lo),
            Family::Beta { alpha, beta } if is_arcsine(alpha, beta) => (0.5 * PI * v).cos().powi(2),
            Family::Exponential { rate } => -v.ln() / rate,
            Family::Weibull { shape, scale } => scale * (-v.ln()).powf(1.0 / shape),
            Family::Pareto { shape, scale } => scale * v.powf(-1.0 / shape),
            _ => self.invert(v, true),
        }
    }

    /// Solves `tail(x) = p` in log space with a safeguarded Newton iteration
    /// on a transformed coordinate. `tail` is the CDF, or the survival
    /// function when `upper` is set.
    fn invert(&self, p: f64, upper: bool) -> f64 {
        let (lo, hi) = self.support();
        let to_x = |y: f64| -> (f64, f64) {
            if lo.is_finite() && hi.is_finite() {
                let s = 1.0 / (1.0 + (-y).exp());
                (lo + (hi - lo) * s, (hi - lo) * s * (1.0 - s))
            } else if lo.is_finite() {
                let e = y.exp();
                (lo + e, e)
            } else {
                (y.sinh(), y.cosh())
            }
        };
        let target = p.ln();
        // h is increasing in y and vanishes at the root.
        let h = |x: f64| -> f64 {
            if upper {
                target - self.sf(x).ln()
            } else {
                self.cdf(x).ln() - target
            }
        };

        let mut y = 0.0;
        let mut hy = h(to_x(y).0);
        if hy == 0.0 {
            return to_x(y).0;
        }
        let (mut ylo, mut yhi);
        let mut step = 1.0;
        if hy < 0.0 {
            ylo = y;
            yhi = y + step;
            while h(to_x(yhi).0) < 0.0 && yhi < 1e4 {
                ylo = yhi;
                step *= 2.0;
                yhi += step;
            }
        } else {
            yhi = y;
            ylo = y - step;
            while h(to_x(ylo).0) > 0.0 && ylo > -1e4 {
                yhi = ylo;
                step *= 2.0;
                ylo -= step;
            }
        }
        y = 0.5 * (ylo + yhi);
        for _ in 0..400 {
            let (x, dxdy) = to_x(y);
            hy = h(x);
            if hy == 0.0 {
                return x;
            }
            if hy < 0.0 {
                ylo = y;
            } else {
                yhi = y;
            }
            let tail = if upper { self.sf(x) } else { self.cdf(x) };
            let slope = self.pdf(x) / tail * dxdy;
            let mut next = y - hy / slope;
            if !(next.is_finite() && next > ylo && next < yhi) {
                next = 0.5 * (ylo + yhi);
            }
            let done = (next - y).abs() <= 1e-14 * y.abs().max(1.0) || yhi - ylo <= 1e-14 * y.abs().max(1.0);
            y = next;
            if done {
                break;
            }
        }
        to_x(y).0
    }

    /// Whether `E|X|^p` is finite.
    pub fn moment_exists(&self, p: f64) -> bool {
        match self.family {
            Family::StudentT { df } => p < df,
            Family::Pareto { shape, .. } => p < shape,
            _ => true,
        }
    }

    pub fn mean(&self) -> Result<f64> {
        if !self.moment_exists(1.0) {
            return Err(Error::MomentDoesNotExist(format!("mean of {self}")));
        }
        Ok(match self.family {
            Family::Normal { mean, .. } => mean,
            Family::StudentT { .. } => 0.0,
            Family::Uniform { lo, hi } => 0.5 * (lo + hi),
            Family::Beta { alpha, beta } => alpha / (alpha + beta),
            Family::Exponential { rate } => 1.0 / rate,
            Family::ChiSquare { df } => df,
            Family::Weibull { shape, scale } => scale * gamma::gamma(1.0 + 1.0 / shape),
            Family::Pareto { shape, scale } => shape * scale / (shape - 1.0),
        })
    }

    pub fn variance(&self) -> Result<f64> {
        if !self.moment_exists(2.0) {
            return Err(Error::MomentDoesNotExist(format!("variance of {self}")));
        }
        Ok(match self.family {
            Family::Normal { sd, .. } => sd * sd,
            Family::StudentT { df } => df / (df - 2.0),
            Family::Uniform { lo, hi } => (hi - lo).powi(2) / 12.0,
            Family::Beta { alpha, beta } => {
                let s = alpha + beta;
                alpha * beta / (s * s * (s + 1.0))
            }
            Family::Exponential { rate } => 1.0 / (rate * rate),
            Family::ChiSquare { df } => 2.0 * df,
            Family::Weibull { shape, scale } => {
                let g1 = gamma::gamma(1.0 + 1.0 / shape);
                scale * scale * (gamma::gamma(1.0 + 2.0 / shape) - g1 * g1)
            }
            Family::Pareto { shape, scale } => {
                scale * scale * shape / ((shape - 1.0).powi(2) * (shape - 2.0))
            }
        })
    }

    /// One draw by quantile inversion.
    #[inline]
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = open_unit(rng);
        self.quantile_pair(u, 1.0 - u)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.sample_one(rng)).collect()
    }
}

fn check_probability(u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("probability {u} is outside (0, 1)")))
    }
}

fn is_arcsine(alpha: f64, beta: f64) -> bool {
    alpha == 0.5 && beta == 0.5
}

/// Upper tail of Student's t for `x >= 0`.
fn t_sf(df: f64, x: f64) -> f64 {
    if df == 3.0 {
        // Closed form: sf = (2φ - sin 2φ) / 2π with φ = atan(√3 / x).
        let phi = (3f64.sqrt() / x).atan();
        let z = 2.0 * phi;
        let diff = if z < 0.1 {
            let z2 = z * z;
            z * z2 / 6.0 * (1.0 - z2 / 20.0 * (1.0 - z2 / 42.0 * (1.0 - z2 / 72.0)))
        } else {
            z - z.sin()
        };
        diff / (2.0 * PI)
    } else {
        0.5 * beta_reg(0.5 * df, 0.5, df / (df + x * x))
    }
}

/// Standard normal quantile: Wichura's AS241 rational approximation followed
/// by one Halley step against the complementary error function.
pub fn std_normal_quantile(p: f64) -> f64 {
    if p > 0.5 {
        return -std_normal_quantile(1.0 - p);
    }
    let q = p - 0.5;
    let x = if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        q * (((((((2.509_080_928_730_122_7e3 * r + 3.343_057_558_358_813e4) * r
            + 6.726_577_092_700_87e4)
            * r
            + 4.592_195_393_154_987e4)
            * r
            + 1.373_169_376_550_946e4)
            * r
            + 1.971_590_950_306_551_3e3)
            * r
            + 1.331_416_678_917_843_8e2)
            * r
            + 3.387_132_872_796_366_5)
            / (((((((5.226_495_278_852_545e3 * r + 2.872_908_573_572_194_3e4) * r
                + 3.930_789_580_009_271e4)
                * r
                + 2.121_379_430_158_659_7e4)
                * r
                + 5.394_196_021_424_751e3)
                * r
                + 6.871_870_074_920_579e2)
                * r
                + 4.231_333_070_160_091e1)
                * r
                + 1.0)
    } else {
        let mut r = (-p.ln()).sqrt();
        let val = if r <= 5.0 {
            r -= 1.6;
            (((((((7.745_450_142_783_414e-4 * r + 2.272_384_498_926_918_4e-2) * r
                + 2.417_807_251_774_506e-1)
                * r
                + 1.270_458_252_452_368_4)
                * r
                + 3.647_848_324_763_204_5)
                * r
                + 5.769_497_221_460_691)
                * r
                + 4.630_337_846_156_546)
                * r
                + 1.423_437_110_749_683_5)
                / (((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_345e-4) * r
                    + 1.519_866_656_361_645_7e-2)
                    * r
                    + 1.481_039_764_274_800_8e-1)
                    * r
                    + 6.897_673_349_851e-1)
                    * r
                    + 1.676_384_830_183_803_8)
                    * r
                    + 2.053_191_626_637_759)
                    * r
                    + 1.0)
        } else {
            r -= 5.0;
            (((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
                + 1.242_660_947_388_078_4e-3)
                * r
                + 2.653_218_952_657_612_4e-2)
                * r
                + 2.965_605_718_285_048_7e-1)
                * r
                + 1.784_826_539_917_291_3)
                * r
                + 5.463_784_911_164_114)
                * r
                + 6.657_904_643_501_103)
                / (((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r
                    + 1.846_318_317_510_054_8e-5)
                    * r
                    + 7.868_691_311_456_133e-4)
                    * r
                    + 1.487_536_129_085_061_5e-2)
                    * r
                    + 1.369_298_809_227_358e-1)
                    * r
                    + 5.998_322_065_558_88e-1)
                    * r
                    + 1.0)
        };
        -val
    };
    // Halley refinement; x <= 0 here so the lower tail is computed directly.
    let e = 0.5 * erfc(-x / SQRT_2) - p;
    if e == 0.0 || !e.is_finite() {
        return x;
    }
    let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    if !u.is_finite() {
        return x;
    }
    x - u / (1.0 + 0.5 * x * u)
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Normal { mean, sd } if mean == 0.0 && sd == 1.0 => write!(f, "normal"),
            Family::Normal { mean, sd } => write!(f, "normal({mean},{sd})"),
            Family::StudentT { df } if df == 3.0 => write!(f, "t3"),
            Family::StudentT { df } => write!(f, "t({df})"),
            Family::Uniform { lo, hi } if lo == 0.0 && hi == 1.0 => write!(f, "uniform"),
            Family::Uniform { lo, hi } => write!(f, "uniform({lo},{hi})"),
            Family::Beta { alpha, beta } => write!(f, "beta({alpha},{beta})"),
            Family::Exponential { rate } if rate == 1.0 => write!(f, "exp"),
            Family::Exponential { rate } => write!(f, "exp({rate})"),
            Family::ChiSquare { df } => write!(f, "chisq({df})"),
            Family::Weibull { shape, scale } if scale == 1.0 => write!(f, "weibull({shape})"),
            Family::Weibull { shape, scale } => write!(f, "weibull({shape},{scale})"),
            Family::Pareto { shape, scale } if scale == 1.0 => write!(f, "pareto({shape})"),
            Family::Pareto { shape, scale } => write!(f, "pareto({shape},{scale})"),
        }
    }
}

fn parse_args(s: &str) -> Result<(String, Vec<f64>)> {
    let s = s.trim().to_ascii_lowercase();
    match s.find('(') {
        None => Ok((s, Vec::new())),
        Some(open) => {
            let close = s
                .rfind(')')
                .filter(|&c| c > open && c == s.len() - 1)
                .ok_or_else(|| Error::Parse(format!("unbalanced parentheses in '{s}'")))?;
            let args = s[open + 1..close]
                .split(',')
                .map(|a| {
                    a.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad number '{a}' in '{s}'")))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((s[..open].trim().to_string(), args))
        }
    }
}

impl FromStr for DistributionSpec {
    type Err = Error;

    /// Parses the compact names `normal`, `t3`, `uniform`, `beta(0.5,0.5)`,
    /// `exp`, `chisq(5)`, `weibull(0.5)`, `pareto(2.5)` and their
    /// parameterised forms.
    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = parse_args(s)?;
        let arity = |lo: usize, hi: usize| -> Result<()> {
            if args.len() < lo || args.len() > hi {
                Err(Error::Parse(format!("'{name}' takes {lo}..={hi} parameters, got {}", args.len())))
            } else {
                Ok(())
            }
        };
        match name.as_str() {
            "normal" | "n" => {
                arity(0, 2)?;
                Self::normal(*args.first().unwrap_or(&0.0), *args.get(1).unwrap_or(&1.0))
            }
            "t3" => {
                arity(0, 0)?;
                Self::student_t(3.0)
            }
            "t" => {
                arity(1, 1)?;
                Self::student_t(args[0])
            }
            "uniform" | "u" => {
                arity(0, 2)?;
                if args.len() == 1 {
                    return Err(Error::Parse("uniform takes 0 or 2 parameters".into()));
                }
                Self::uniform(*args.first().unwrap_or(&0.0), *args.get(1).unwrap_or(&1.0))
            }
            "beta" => {
                arity(2, 2)?;
                Self::beta(args[0], args[1])
            }
            "exp" | "exponential" => {
                arity(0, 1)?;
                Self::exponential(*args.first().unwrap_or(&1.0))
            }
            "chisq" | "chisquare" => {
                arity(1, 1)?;
                Self::chi_square(args[0])
            }
            "weibull" => {
                arity(1, 2)?;
                Self::weibull(args[0], *args.get(1).unwrap_or(&1.0))
            }
            "pareto" => {
                arity(1, 2)?;
                Self::pareto(args[0], *args.get(1).unwrap_or(&1.0))
            }
            other => Err(Error::Parse(format!("unknown distribution '{other}'"))),
        }
    }
}

/// The ten populations used throughout the efficiency tables, in table order.
pub fn catalog() -> Vec<DistributionSpec> {
    [
        "normal",
        "t3",
        "uniform",
        "beta(0.5,0.5)",
        "exp",
        "chisq(5)",
        "weibull(0.5)",
        "weibull(1.5)",
        "pareto(2.5)",
        "pareto(4)",
    ]
    .iter()
    .map(|s| s.parse().expect("catalog names parse"))
    .collect()
}

/// Whether a function is monotone over the support it is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    NonMonotone,
}

/// A piecewise-linear function through sorted knots, constant beyond the
/// first and last knot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tabulated {
    xs: Vec<f64>,
    ys: Vec<f64>,
    monotone: Monotonicity,
}

impl Tabulated {
    /// `monotone` is the caller's claim about the shape; it is checked
    /// against the knots.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, monotone: Monotonicity) -> Result<Self> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(invalid("tabulated g needs equally many (>= 1) x and y knots"));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(invalid("tabulated knots must be finite"));
        }
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("tabulated x knots must be strictly increasing"));
        }
        let ok = match monotone {
            Monotonicity::Increasing => ys.windows(2).all(|w| w[0] <= w[1]),
            Monotonicity::Decreasing => ys.windows(2).all(|w| w[0] >= w[1]),
            Monotonicity::NonMonotone => true,
        };
        if !ok {
            return Err(invalid(format!("tabulated knots are not {monotone:?}")));
        }
        Ok(Self { xs, ys, monotone })
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = self.xs.partition_point(|&k| k <= x);
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let (y0, y1) = (self.ys[i - 1], self.ys[i]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// The function whose expectation is being estimated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "arg", rename_all = "snake_case")]
pub enum GFunction {
    Identity,
    Power(u32),
    /// `1{x <= c}`
    Indicator(f64),
    Tabulated(Tabulated),
}

impl GFunction {
    pub fn power(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(invalid("power must be a positive integer"));
        }
        Ok(GFunction::Power(k))
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            GFunction::Identity => x,
            GFunction::Power(k) => x.powi(*k as i32),
            GFunction::Indicator(c) => {
                if x <= *c {
                    1.0
                } else {
                    0.0
                }
            }
            GFunction::Tabulated(t) => t.eval(x),
        }
    }

    /// Monotonicity of `g` restricted to the support of `dist`. Indicators
    /// are nonincreasing, which is all the ranking arguments need.
    pub fn monotonicity(&self, dist: &DistributionSpec) -> Monotonicity {
        match self {
            GFunction::Identity => Monotonicity::Increasing,
            GFunction::Power(k) if k % 2 == 1 => Monotonicity::Increasing,
            GFunction::Power(_) => {
                let (lo, hi) = dist.support();
                if lo >= 0.0 {
                    Monotonicity::Increasing
                } else if hi <= 0.0 {
                    Monotonicity::Decreasing
                } else {
                    Monotonicity::NonMonotone
                }
            }
            GFunction::Indicator(_) => Monotonicity::Decreasing,
            GFunction::Tabulated(t) => t.monotone,
        }
    }

    /// Whether `g(X)` has a finite second moment under `dist`.
    pub fn second_moment_exists(&self, dist: &DistributionSpec) -> bool {
        match self {
            GFunction::Identity => dist.moment_exists(2.0),
            GFunction::Power(k) => dist.moment_exists(2.0 * *k as f64),
            GFunction::Indicator(_) | GFunction::Tabulated(_) => true,
        }
    }
}

impl fmt::Display for GFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GFunction::Identity => write!(f, "identity"),
            GFunction::Power(k) => write!(f, "pow:{k}"),
            GFunction::Indicator(c) => write!(f, "ind:{c}"),
            GFunction::Tabulated(_) => write!(f, "tabulated"),
        }
    }
}

impl FromStr for GFunction {
    type Err = Error;

    /// `identity`, `pow:k` or `ind:c`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("identity") || s == "x" {
            return Ok(GFunction::Identity);
        }
        if let Some(k) = s.strip_prefix("pow:") {
            let k: u32 = k.trim().parse().map_err(|_| Error::Parse(format!("bad power in '{s}'")))?;
            return GFunction::power(k);
        }
        if let Some(c) = s.strip_prefix("ind:") {
            let c: f64 = c.trim().parse().map_err(|_| Error::Parse(format!("bad threshold in '{s}'")))?;
            return Ok(GFunction::Indicator(c));
        }
        Err(Error::Parse(format!("unknown g-function '{s}' (use identity, pow:k or ind:c)")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn d(s: &str) -> DistributionSpec {
        s.parse().unwrap()
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(d("uniform").cdf(0.3), 0.3);
        assert_eq!(d("exp").cdf(0.0), 0.0);
        assert_eq!(d("normal").cdf(0.0), 0.5);
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(d("uniform").quantile(0.25).unwrap(), 0.25);
        let e = d("exp").quantile(1.0 - (-1f64).exp()).unwrap();
        assert!((e - 1.0).abs() < 1e-14);
        let b = d("beta(0.5,0.5)").quantile(0.5).unwrap();
        assert!((b - 0.5).abs() < 1e-15);
    }

    #[test]
    fn quantile_rejects_out_of_range() {
        for u in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(d("normal").quantile(u), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(DistributionSpec::normal(0.0, 0.0).is_err());
        assert!(DistributionSpec::student_t(-1.0).is_err());
        assert!(DistributionSpec::uniform(1.0, 1.0).is_err());
        assert!(DistributionSpec::pareto(0.0, 1.0).is_err());
        assert!("weibull".parse::<DistributionSpec>().is_err());
        assert!("cauchy".parse::<DistributionSpec>().is_err());
    }

    #[test]
    fn pareto_variance_needs_shape_above_two() {
        assert!(matches!(d("pareto(2)").variance(), Err(Error::MomentDoesNotExist(_))));
        assert!(d("pareto(2.5)").variance().is_ok());
        assert!(matches!(d("t(2)").variance(), Err(Error::MomentDoesNotExist(_))));
    }

    #[test]
    fn round_trips_on_grid() {
        let mut extra = catalog();
        extra.push(d("normal(7,3)"));
        extra.push(d("beta(2,5)"));
        extra.push(d("t(5)"));
        for dist in extra {
            for i in 1..=100 {
                let u = i as f64 / 101.0;
                let x = dist.quantile(u).unwrap();
                let back = dist.cdf(x);
                assert!((back - u).abs() < 1e-10, "{dist}: cdf(q({u})) = {back}");
                let x2 = dist.quantile(dist.cdf(x)).unwrap();
                assert!((x2 - x).abs() <= 1e-8 * x.abs().max(1.0), "{dist}: q(cdf({x})) = {x2}");
            }
        }
    }

    #[test]
    fn tail_quantiles_are_accurate() {
        // Next to a nonzero finite endpoint x itself cannot resolve a tiny tail.
        let resolvable = |x: f64, end: f64| !end.is_finite() || end == 0.0 || (x - end).abs() > 1e-6 * end.abs();
        for dist in catalog() {
            let (lo, hi) = dist.support();
            for v in [1e-3, 1e-8, 1e-15, 1e-40, 1e-100] {
                let x = dist.quantile_upper(v).unwrap();
                if resolvable(x, hi) {
                    let back = dist.sf(x);
                    assert!(((back - v) / v).abs() < 1e-8, "{dist}: sf(qu({v})) = {back}");
                }
                let x = dist.quantile(v).unwrap();
                if resolvable(x, lo) && x > lo {
                    let back = dist.cdf(x);
                    assert!(((back - v) / v).abs() < 1e-8, "{dist}: cdf(q({v})) = {back}");
                }
            }
        }
    }

    #[test]
    fn cdf_is_monotone() {
        for dist in catalog() {
            let mut prev = 0.0;
            for i in -200..=400 {
                let x = i as f64 / 20.0;
                let f = dist.cdf(x);
                assert!((0.0..=1.0).contains(&f));
                assert!(f >= prev, "{dist} at {x}");
                prev = f;
            }
        }
    }

    #[test]
    fn sampling_lln_and_determinism() {
        let mut rng = stream(11, 0);
        let xs = d("uniform").sample(&mut rng, 100_000);
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((m - 0.5).abs() < 0.01);
        let mut rng = stream(11, 1);
        let xs = d("exp").sample(&mut rng, 100_000);
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((m - 1.0).abs() < 0.02);
        let a = d("t3").sample(&mut stream(5, 5), 50);
        let b = d("t3").sample(&mut stream(5, 5), 50);
        assert_eq!(a, b);
    }

    #[test]
    fn normal_quantile_symmetry_and_known_values() {
        assert_eq!(std_normal_quantile(0.5), 0.0);
        assert!((std_normal_quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-13);
        assert!((std_normal_quantile(1e-10) + 6.361_340_902_404_056).abs() < 1e-11);
    }

    #[test]
    fn g_functions() {
        assert_eq!(GFunction::Identity.eval(2.5), 2.5);
        assert_eq!(GFunction::Power(3).eval(2.0), 8.0);
        assert_eq!(GFunction::Indicator(1.0).eval(1.0), 1.0);
        assert_eq!(GFunction::Indicator(1.0).eval(1.0001), 0.0);
        assert_eq!("pow:2".parse::<GFunction>().unwrap(), GFunction::Power(2));
        assert_eq!("ind:0.5".parse::<GFunction>().unwrap(), GFunction::Indicator(0.5));
        assert!("pow:0".parse::<GFunction>().is_err());
        let sq = GFunction::Power(2);
        assert_eq!(sq.monotonicity(&d("uniform(-1,1)")), Monotonicity::NonMonotone);
        assert_eq!(sq.monotonicity(&d("exp")), Monotonicity::Increasing);
        assert!(!sq.second_moment_exists(&d("t3")));
        assert!(!sq.second_moment_exists(&d("pareto(2.5)")));
    }

    #[test]
    fn tabulated_interpolates_and_validates() {
        let t = Tabulated::new(vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 3.0], Monotonicity::Increasing).unwrap();
        assert_eq!(t.eval(-1.0), 0.0);
        assert_eq!(t.eval(0.5), 1.0);
        assert_eq!(t.eval(1.5), 2.5);
        assert_eq!(t.eval(9.0), 3.0);
        assert!(Tabulated::new(vec![0.0, 1.0], vec![1.0, 0.0], Monotonicity::Increasing).is_err());
        assert!(Tabulated::new(vec![1.0, 0.0], vec![1.0, 0.0], Monotonicity::NonMonotone).is_err());
    }

    #[test]
    fn names_round_trip() {
        for dist in catalog() {
            let again: DistributionSpec = dist.to_string().parse().unwrap();
            assert_eq!(again, dist);
        }
    }
}
