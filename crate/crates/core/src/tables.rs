//! Efficiency tables and figure curves for the identity `g`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeffs::{coefficient_set, CoefficientSet, WeightScheme};
use crate::distcat::{catalog, DistributionSpec, GFunction};
use crate::efficiency::{argmax_rounded, min_delta_for_dominance, re_ff_vs_jps, re_vs_brss, re_vs_srs};
use crate::error::Result;
use crate::strata::{OrderStatProfile, StratumMoments};

pub const TABLE12_HB: [usize; 2] = [3, 5];
pub const TABLE12_HJ: [usize; 9] = [3, 4, 5, 6, 7, 8, 10, 12, 14];
pub const TABLE3_N: [u64; 10] = [5, 10, 15, 20, 25, 30, 35, 40, 45, 50];
pub const DEFAULT_H_MAX: usize = 25;

/// Members of the catalog whose modal optimal `H` makes up the recommended row.
pub fn table4_members() -> Vec<DistributionSpec> {
    ["normal", "t3", "uniform", "beta(0.5,0.5)", "exp", "chisq(5)", "weibull(1.5)"]
        .iter()
        .map(|s| s.parse().expect("catalog name"))
        .collect()
}

/// Standard JPS coefficients for every `(n, H)` requested, computed once.
struct CoeffCache(HashMap<(u64, u64), CoefficientSet>);

impl CoeffCache {
    fn build(scheme: WeightScheme, keys: impl IntoIterator<Item = (u64, u64)>) -> Result<Self> {
        let mut keys: Vec<_> = keys.into_iter().collect();
        keys.sort_unstable();
        keys.dedup();
        let sets: Vec<_> = keys.par_iter().map(|&(n, h)| coefficient_set(scheme, n, h)).collect::<Result<_>>()?;
        Ok(Self(keys.into_iter().zip(sets).collect()))
    }

    fn get(&self, n: u64, h: usize) -> &CoefficientSet {
        &self.0[&(n, h as u64)]
    }
}

fn moments_upto(dists: &[DistributionSpec], h_max: usize) -> Result<Vec<Vec<StratumMoments>>> {
    dists
        .par_iter()
        .map(|d| {
            let p = OrderStatProfile::new(d, &GFunction::Identity)?;
            (1..=h_max).map(|h| p.moments(h)).collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table3Cell {
    pub dist: String,
    pub n: u64,
    pub h_opt: usize,
    pub mre: f64,
    pub mre_exact: f64,
    pub tied: Vec<usize>,
}

/// Optimal class size and maximal efficiency of the standard JPS mean.
pub fn table3(dists: &[DistributionSpec], ns: &[u64], h_max: usize) -> Result<Vec<Table3Cell>> {
    let moments = moments_upto(dists, h_max)?;
    let cache = CoeffCache::build(
        WeightScheme::StandardJps,
        ns.iter().flat_map(|&n| (1..=h_max as u64).map(move |h| (n, h))),
    )?;
    let mut out = Vec::new();
    for (d, sms) in dists.iter().zip(&moments) {
        for &n in ns {
            let curve = sms
                .iter()
                .map(|sm| re_vs_srs(cache.get(n, sm.h), sm.delta_g))
                .collect::<Result<Vec<_>>>()?;
            let r = argmax_rounded(n, curve);
            out.push(Table3Cell {
                dist: d.to_string(),
                n,
                h_opt: r.h_opt,
                mre: r.mre,
                mre_exact: r.mre_exact,
                tied: r.tied,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table4Cell {
    pub n: u64,
    pub h_rec: usize,
    /// Optimal `H` of each member distribution, in [`table4_members`] order.
    pub votes: Vec<usize>,
}

/// Per-`n` mode of the optimal `H` over [`table4_members`], ties to the
/// smallest `H`.
pub fn table4(ns: &[u64], h_max: usize) -> Result<Vec<Table4Cell>> {
    let members = table4_members();
    let t3 = table3(&members, ns, h_max)?;
    Ok(ns
        .iter()
        .map(|&n| {
            let votes: Vec<usize> = t3.iter().filter(|c| c.n == n).map(|c| c.h_opt).collect();
            let mut tally: Vec<(usize, usize)> = Vec::new();
            for &v in &votes {
                match tally.iter_mut().find(|(h, _)| *h == v) {
                    Some((_, k)) => *k += 1,
                    None => tally.push((v, 1)),
                }
            }
            let top = tally.iter().map(|t| t.1).max().unwrap_or(0);
            let h_rec = tally.iter().filter(|t| t.1 == top).map(|t| t.0).min().unwrap_or(1);
            Table4Cell { n, h_rec, votes }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table12Cell {
    pub dist: String,
    pub h_b: usize,
    pub h_j: usize,
    pub re: f64,
}

/// Standard JPS with class size `H_J` against balanced RSS with `H_B`, both
/// with `n` measured units.
pub fn table12(n: u64, dists: &[DistributionSpec], hbs: &[usize], hjs: &[usize]) -> Result<Vec<Table12Cell>> {
    let h_max = hbs.iter().chain(hjs).copied().max().unwrap_or(1);
    let moments = moments_upto(dists, h_max)?;
    let cache = CoeffCache::build(WeightScheme::StandardJps, hjs.iter().map(|&h| (n, h as u64)))?;
    let mut out = Vec::new();
    for (d, sms) in dists.iter().zip(&moments) {
        for &hb in hbs {
            for &hj in hjs {
                let re = re_vs_brss(cache.get(n, hj), &sms[hj - 1], &sms[hb - 1], n)?;
                out.push(Table12Cell { dist: d.to_string(), h_b: hb, h_j: hj, re });
            }
        }
    }
    Ok(out)
}

/// One point of a figure curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Empty for curves that do not depend on the distribution.
    pub dist: String,
    /// The parameter held fixed along the curve (`H` or `n`).
    pub fixed: u64,
    /// The abscissa (`n` or `H`).
    pub x: u64,
    pub y: f64,
}

/// Which figure's data to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Figure {
    /// RE vs SRS against `n` for `H ∈ {2, 5}`.
    Fig1,
    /// RE vs SRS against `H` for `n ∈ {10, 30}`.
    Fig2,
    /// Dominance threshold against `n` for `H ∈ {2, 5}`.
    Fig3,
    /// RE vs balanced RSS (same `H`) against `n` for `H ∈ {2, 5}`.
    Fig4,
    /// RE vs balanced RSS (same `H`) against `H` for `n ∈ {10, 30}`.
    Fig5,
    /// RE of Frey–Feeman over standard JPS against `n` for `H ∈ {2, 5}`.
    Fig6,
}

impl std::str::FromStr for Figure {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "fig1" => Figure::Fig1,
            "fig2" => Figure::Fig2,
            "fig3" => Figure::Fig3,
            "fig4" => Figure::Fig4,
            "fig5" => Figure::Fig5,
            "fig6" => Figure::Fig6,
            other => return Err(crate::Error::Parse(format!("unknown figure `{other}`"))),
        })
    }
}

const FIG_N_MAX: u64 = 50;
const FIG_H_MAX: usize = 20;

/// Curve data behind each figure over the full catalog.
pub fn figure(which: Figure) -> Result<Vec<CurvePoint>> {
    let dists = catalog();
    let by_n = |h: usize| (2..=FIG_N_MAX).map(move |n| (n, h as u64));
    let mut out = Vec::new();
    match which {
        Figure::Fig1 | Figure::Fig4 | Figure::Fig6 => {
            let moments = moments_upto(&dists, 5)?;
            let jps = CoeffCache::build(WeightScheme::StandardJps, by_n(2).chain(by_n(5)))?;
            let ff = match which {
                Figure::Fig6 => Some(CoeffCache::build(WeightScheme::FreyFeeman, by_n(2).chain(by_n(5)))?),
                _ => None,
            };
            for (d, sms) in dists.iter().zip(&moments) {
                for h in [2usize, 5] {
                    let sm = &sms[h - 1];
                    for n in 2..=FIG_N_MAX {
                        let c = jps.get(n, h);
                        let y = match which {
                            Figure::Fig1 => re_vs_srs(c, sm.delta_g)?,
                            Figure::Fig4 => (1.0 - sm.delta_g) * re_vs_srs(c, sm.delta_g)?,
                            _ => re_ff_vs_jps(c, ff.as_ref().expect("built").get(n, h), sm)?,
                        };
                        out.push(CurvePoint { dist: d.to_string(), fixed: h as u64, x: n, y });
                    }
                }
            }
        }
        Figure::Fig2 | Figure::Fig5 => {
            let moments = moments_upto(&dists, FIG_H_MAX)?;
            let keys = [10u64, 30].into_iter().flat_map(|n| (1..=FIG_H_MAX as u64).map(move |h| (n, h)));
            let jps = CoeffCache::build(WeightScheme::StandardJps, keys)?;
            for (d, sms) in dists.iter().zip(&moments) {
                for n in [10u64, 30] {
                    for sm in sms {
                        let re = re_vs_srs(jps.get(n, sm.h), sm.delta_g)?;
                        let y = if which == Figure::Fig2 { re } else { (1.0 - sm.delta_g) * re };
                        out.push(CurvePoint { dist: d.to_string(), fixed: n, x: sm.h as u64, y });
                    }
                }
            }
        }
        Figure::Fig3 => {
            let jps = CoeffCache::build(WeightScheme::StandardJps, by_n(2).chain(by_n(5)))?;
            for h in [2usize, 5] {
                for n in 3..=FIG_N_MAX {
                    let y = min_delta_for_dominance(jps.get(n, h))?;
                    out.push(CurvePoint { dist: String::new(), fixed: h as u64, x: n, y });
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table3_normal_anchor() {
        let t = table3(&["normal".parse().unwrap()], &[20, 50], DEFAULT_H_MAX).unwrap();
        assert_eq!((t[0].h_opt, t[0].mre), (6, 2.01));
        assert_eq!((t[1].h_opt, t[1].mre), (11, 3.48));
    }

    #[test]
    fn table12_uniform_anchor() {
        let t = table12(60, &["uniform".parse().unwrap()], &[3], &[10]).unwrap();
        assert!((t[0].re - 2.14).abs() < 0.005, "{t:?}");
    }

    #[test]
    fn fig3_threshold_shrinks_with_n() {
        let f = figure(Figure::Fig3).unwrap();
        let h2: Vec<f64> = f.iter().filter(|p| p.fixed == 2).map(|p| p.y).collect();
        assert!(h2.windows(2).all(|w| w[1] <= w[0]));
    }
}
