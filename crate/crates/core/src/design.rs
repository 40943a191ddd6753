//! Sample generators for SRS, judgment post-stratification and balanced
//! ranked set sampling.
//!
//! Every measured unit comes with its own ranking class of `H` units. The
//! auxiliary units are drawn only to be ranked against and are never
//! measured. Work happens on the uniform scale and only measured units are
//! mapped through the quantile function.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distcat::{std_normal_quantile, DistributionSpec};
use crate::error::{invalid, Error, Result};
use crate::rng::open_unit;

/// How judgment ranks are assigned within a ranking class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Ranker {
    Perfect,
    /// Ranks by `Z = ρ Φ⁻¹(F(X)) + √(1-ρ²) ε` with independent standard
    /// normal `ε`.
    Concomitant { rho: f64 },
}

impl Ranker {
    pub fn concomitant(rho: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(invalid(format!("concomitant correlation must lie in [0, 1], got {rho}")));
        }
        Ok(Ranker::Concomitant { rho })
    }

    pub(crate) fn validate(&self) -> Result<()> {
        match *self {
            Ranker::Perfect => Ok(()),
            Ranker::Concomitant { rho } => Ranker::concomitant(rho).map(|_| ()),
        }
    }
}

impl fmt::Display for Ranker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ranker::Perfect => write!(f, "perfect"),
            Ranker::Concomitant { rho } => write!(f, "concomitant:{rho}"),
        }
    }
}

impl FromStr for Ranker {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "perfect" {
            return Ok(Ranker::Perfect);
        }
        if let Some(rho) = s.strip_prefix("concomitant:") {
            let rho = rho.parse::<f64>().map_err(|e| Error::Parse(format!("bad correlation `{rho}`: {e}")))?;
            return Ranker::concomitant(rho);
        }
        Err(Error::Parse(format!("unknown ranker `{s}` (perfect|concomitant:RHO)")))
    }
}

/// One measured unit with its judgment rank in `1..=H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub x: f64,
    pub rank: usize,
}

/// A judgment post-stratified sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JpsSample {
    h: usize,
    obs: Vec<Observation>,
}

impl JpsSample {
    pub fn new(h: usize, obs: Vec<Observation>) -> Result<Self> {
        if h == 0 {
            return Err(invalid("H must be at least 1"));
        }
        if obs.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(o) = obs.iter().find(|o| o.rank == 0 || o.rank > h) {
            return Err(invalid(format!("rank {} outside 1..={h}", o.rank)));
        }
        Ok(Self { h, obs })
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn n(&self) -> usize {
        self.obs.len()
    }

    pub fn observations(&self) -> &[Observation] {
        &self.obs
    }

    /// `N_r` for `r = 1..H`.
    pub fn counts(&self) -> Vec<u64> {
        let mut c = vec![0u64; self.h];
        for o in &self.obs {
            c[o.rank - 1] += 1;
        }
        c
    }

    /// Number of occupied strata.
    pub fn h_n(&self) -> usize {
        self.counts().iter().filter(|&&c| c > 0).count()
    }

    pub fn full_rank(&self) -> bool {
        self.h_n() == self.h
    }
}

/// Balanced ranked set sample: `m` cycles, one measured unit per rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrssSample {
    h: usize,
    /// Row `j` holds cycle `j`; column `r-1` the unit judged rank `r`.
    values: Vec<Vec<f64>>,
}

impl BrssSample {
    pub fn new(h: usize, values: Vec<Vec<f64>>) -> Result<Self> {
        if h == 0 || values.is_empty() {
            return Err(invalid("need H >= 1 and at least one cycle"));
        }
        if values.iter().any(|row| row.len() != h) {
            return Err(invalid("every cycle must hold exactly H measured values"));
        }
        Ok(Self { h, values })
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// Measured values of rank `r` (1-based) across cycles.
    pub fn column(&self, r: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[r - 1]).collect()
    }
}

/// Fills `buf` with `(u, z)` for the `H` units of one ranking class: the
/// uniform score and the score the judge ranks by.
fn rank_class<R: Rng + ?Sized>(rng: &mut R, h: usize, ranker: Ranker, buf: &mut Vec<(f64, f64)>) {
    buf.clear();
    for _ in 0..h {
        let u = open_unit(rng);
        let z = match ranker {
            Ranker::Perfect => u,
            Ranker::Concomitant { rho } => {
                let noise = std_normal_quantile(open_unit(rng));
                rho * std_normal_quantile(u) + (1.0 - rho * rho).sqrt() * noise
            }
        };
        buf.push((u, z));
    }
}

/// Draws `n` measured units, each ranked within its own class of `H`.
pub fn draw_jps<R: Rng + ?Sized>(
    rng: &mut R,
    dist: &DistributionSpec,
    n: usize,
    h: usize,
    ranker: Ranker,
) -> Result<JpsSample> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    if h == 0 {
        return Err(invalid("H must be at least 1"));
    }
    ranker.validate()?;
    let mut buf = Vec::with_capacity(h);
    let mut obs = Vec::with_capacity(n);
    push_jps_units(rng, dist, n, h, ranker, &mut buf, &mut obs);
    Ok(JpsSample { h, obs })
}

/// Appends `n` JPS units to `obs` without validation or allocation.
pub(crate) fn push_jps_units<R: Rng + ?Sized>(
    rng: &mut R,
    dist: &DistributionSpec,
    n: usize,
    h: usize,
    ranker: Ranker,
    buf: &mut Vec<(f64, f64)>,
    obs: &mut Vec<Observation>,
) {
    for _ in 0..n {
        rank_class(rng, h, ranker, buf);
        let (u0, z0) = buf[0];
        let rank = 1 + buf[1..].iter().filter(|&&(_, z)| z < z0).count();
        obs.push(Observation { x: dist.quantile_pair(u0, 1.0 - u0), rank });
    }
}

/// Draws `m` cycles of `H` ranking classes; in class `r` of a cycle the unit
/// judged to be the `r`-th smallest is measured.
pub fn draw_brss<R: Rng + ?Sized>(
    rng: &mut R,
    dist: &DistributionSpec,
    m: usize,
    h: usize,
    ranker: Ranker,
) -> Result<BrssSample> {
    if m == 0 {
        return Err(Error::EmptySample);
    }
    if h == 0 {
        return Err(invalid("H must be at least 1"));
    }
    ranker.validate()?;
    let mut buf = Vec::with_capacity(h);
    let mut values = Vec::with_capacity(m);
    for _ in 0..m {
        let mut row = Vec::with_capacity(h);
        for r in 0..h {
            rank_class(rng, h, ranker, &mut buf);
            buf.sort_by(|a, b| a.1.total_cmp(&b.1));
            let u = buf[r].0;
            row.push(dist.quantile_pair(u, 1.0 - u));
        }
        values.push(row);
    }
    Ok(BrssSample { h, values })
}

/// Simple random sample of size `n`.
pub fn draw_srs<R: Rng + ?Sized>(rng: &mut R, dist: &DistributionSpec, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    Ok(dist.sample(rng, n))
}
