use std::fs::File;
use std::path::Path;

use anyhow::{bail, Context, Result};
use jps_core::coeffs::{coefficient_set_with, Method};
use jps_core::design::Observation;
use jps_core::distcat::catalog;
use jps_core::efficiency::{optimal_h, report_ff_vs_jps, report_vs_brss, report_vs_srs};
use jps_core::estimators::{estimate_cdf, estimate_g_mean, estimate_variance, EstimateResult};
use jps_core::mcverify::{mc_coefficient, run_suite};
use jps_core::strata::{transformed_stratum_moments, McSettings, RankBy};
use jps_core::tables::{self, Figure, TABLE12_HB, TABLE12_HJ, TABLE3_N};
use jps_core::{coefficient_set, draw_brss, draw_jps, draw_srs, rng, stratum_moments, JpsSample, WeightScheme};
use serde_json::{json, to_value};

use crate::cli::{CoeffMethod, Command, Design, RankByArg, Target, Vs, Which};
use crate::output::{dp2, num, Artifact};

pub fn run(cmd: &Command, seed: u64) -> Result<Artifact> {
    match cmd {
        Command::Simulate { design, dist, n, m, h, ranker } => {
            let mut rng = rng::stream(seed, 0);
            let h = *h as usize;
            match design {
                Design::Jps => {
                    let n = n.context("--n is required for JPS")? as usize;
                    let s = draw_jps(&mut rng, dist, n, h, *ranker)?;
                    let mut art = Artifact::new(vec!["x", "rank"], to_value(s.observations())?);
                    for o in s.observations() {
                        art.row(vec![num(o.x), o.rank.to_string()]);
                    }
                    Ok(art)
                }
                Design::Brss => {
                    let m = m.context("--m is required for BRSS")? as usize;
                    let s = draw_brss(&mut rng, dist, m, h, *ranker)?;
                    let mut art = Artifact::new(vec!["cycle", "rank", "x"], to_value(s.values())?);
                    for (i, row) in s.values().iter().enumerate() {
                        for (r, x) in row.iter().enumerate() {
                            art.row(vec![(i + 1).to_string(), (r + 1).to_string(), num(*x)]);
                        }
                    }
                    Ok(art)
                }
                Design::Srs => {
                    let n = n.context("--n is required for SRS")? as usize;
                    let xs = draw_srs(&mut rng, dist, n)?;
                    let mut art = Artifact::new(vec!["x"], to_value(&xs)?);
                    for x in xs {
                        art.row(vec![num(x)]);
                    }
                    Ok(art)
                }
            }
        }
        Command::Estimate { input, h, scheme, target, g, at } => {
            let sample = read_sample(input, *h as usize)?;
            let results: Vec<(f64, EstimateResult)> = match target {
                Target::Mean => vec![(f64::NAN, estimate_g_mean(&sample, g, *scheme))],
                Target::Variance => vec![(f64::NAN, estimate_variance(&sample, *scheme)?)],
                Target::Cdf => {
                    if at.is_empty() {
                        bail!("--target cdf needs --at x1,x2,...");
                    }
                    at.iter().copied().zip(estimate_cdf(&sample, *scheme, at)).collect()
                }
            };
            let mut art = Artifact::new(
                vec!["target", "at", "value", "scheme", "h_n", "full_rank"],
                to_value(results.iter().map(|r| &r.1).collect::<Vec<_>>())?,
            );
            let name = match target {
                Target::Mean => format!("mean {g}"),
                Target::Variance => "variance".into(),
                Target::Cdf => "cdf".into(),
            };
            for (x, r) in &results {
                let at = if x.is_nan() { String::new() } else { num(*x) };
                art.row(vec![
                    name.clone(),
                    at,
                    num(r.value),
                    r.scheme.to_string(),
                    r.h_n.to_string(),
                    r.full_rank.to_string(),
                ]);
            }
            Ok(art)
        }
        Command::Coeffs { scheme, n, h, method, reps, functional } => {
            if let Some(f) = functional {
                let est = mc_coefficient(*scheme, *n, *h, *f, *reps, seed)?;
                let mut art = Artifact::new(vec!["scheme", "n", "h", "functional", "estimate", "se"], to_value(est)?);
                art.row(vec![scheme.to_string(), n.to_string(), h.to_string(), f.to_string(), num(est.estimate), num(est.se)]);
                return Ok(art);
            }
            let method = match method {
                CoeffMethod::Auto => Method::Auto { reps: *reps, seed },
                CoeffMethod::Enumerate => Method::Enumerate,
                CoeffMethod::Mc => Method::MonteCarlo { reps: *reps, seed },
            };
            let c = coefficient_set_with(*scheme, *n, *h, method)?;
            let (se_m1, se_m2) = c.se_m();
            let mut art = Artifact::new(
                vec!["scheme", "n", "h", "e_c1", "v_c1", "cov_c1c2", "e_j1c1sq", "m1", "m2", "k1", "k2", "se_m1", "se_m2"],
                to_value(&c)?,
            );
            art.row(vec![
                c.scheme.to_string(),
                c.n.to_string(),
                c.h.to_string(),
                num(c.e_c1),
                num(c.v_c1),
                num(c.cov_c1c2),
                num(c.e_j1c1sq),
                num(c.m1),
                num(c.m2),
                num(c.k1),
                num(c.k2),
                num(se_m1),
                num(se_m2),
            ]);
            Ok(art)
        }
        Command::Moments { dist, g, h, rank_by, reps } => {
            let rank_by = match rank_by {
                RankByArg::X => RankBy::X,
                RankByArg::Y => RankBy::Y,
            };
            let sm = transformed_stratum_moments(dist, g, *h as usize, rank_by, McSettings { reps: *reps, seed })?;
            let mut art = Artifact::new(
                vec!["r", "mu_r", "sigma2_r", "se_mu_r", "mu_g", "sigma2_g", "delta_g"],
                to_value(&sm)?,
            );
            for r in 0..sm.h {
                let se = sm.se_mu_r.as_ref().map_or(String::new(), |s| num(s[r]));
                art.row(vec![
                    (r + 1).to_string(),
                    num(sm.mu_r[r]),
                    num(sm.sigma2_r[r]),
                    se,
                    num(sm.mu_g),
                    num(sm.sigma2_g),
                    num(sm.delta_g),
                ]);
            }
            Ok(art)
        }
        Command::Re { vs, scheme, dist, g, n, hj, hb } => {
            let hj_u = *hj as usize;
            let sm = stratum_moments(dist, g, hj_u)?;
            let ff_method = Method::Auto { reps: jps_core::coeffs::DEFAULT_MC_REPS, seed };
            let report = match vs {
                Vs::Srs => report_vs_srs(&coefficient_set_with(*scheme, *n, *hj, ff_method)?, &sm)?,
                Vs::Brss => {
                    let sm_b = stratum_moments(dist, g, hb.unwrap_or(*hj) as usize)?;
                    report_vs_brss(&coefficient_set_with(*scheme, *n, *hj, ff_method)?, &sm, &sm_b)?
                }
                Vs::Ff => {
                    let jps = coefficient_set(WeightScheme::StandardJps, *n, *hj)?;
                    let ff = coefficient_set_with(WeightScheme::FreyFeeman, *n, *hj, ff_method)?;
                    report_ff_vs_jps(&jps, &ff, &sm)?
                }
            };
            let c = &report.components;
            let mut art = Artifact::new(
                vec!["re", "re_2dp", "m1", "m2", "delta_g", "h_j", "h_b", "n", "regime"],
                to_value(&report)?,
            );
            art.row(vec![
                num(report.re),
                dp2(report.re),
                num(c.m1),
                num(c.m2),
                num(c.delta_g),
                c.h_j.to_string(),
                c.h_b.map_or(String::new(), |h| h.to_string()),
                c.n.to_string(),
                to_value(report.regime)?.as_str().unwrap_or_default().to_string(),
            ]);
            Ok(art)
        }
        Command::ReTable { which, dist, h_max } => {
            let dists = if dist.is_empty() { catalog() } else { dist.clone() };
            let h_max = *h_max as usize;
            match which {
                Which::Table1 | Which::Table2 => {
                    let n = if *which == Which::Table1 { 15 } else { 60 };
                    let cells = tables::table12(n, &dists, &TABLE12_HB, &TABLE12_HJ)?;
                    let mut art = Artifact::new(vec!["dist", "n", "h_b", "h_j", "re", "re_2dp"], to_value(&cells)?);
                    for c in &cells {
                        art.row(vec![c.dist.clone(), n.to_string(), c.h_b.to_string(), c.h_j.to_string(), num(c.re), dp2(c.re)]);
                    }
                    Ok(art)
                }
                Which::Table3 => {
                    let cells = tables::table3(&dists, &TABLE3_N, h_max)?;
                    let mut art = Artifact::new(vec!["dist", "n", "h_opt", "mre", "mre_exact", "tied"], to_value(&cells)?);
                    for c in &cells {
                        art.row(vec![
                            c.dist.clone(),
                            c.n.to_string(),
                            c.h_opt.to_string(),
                            dp2(c.mre),
                            num(c.mre_exact),
                            join(&c.tied),
                        ]);
                    }
                    Ok(art)
                }
                Which::Table4 => {
                    let cells = tables::table4(&TABLE3_N, h_max)?;
                    let members: Vec<String> = tables::table4_members().iter().map(|d| d.to_string()).collect();
                    let mut art = Artifact::new(
                        vec!["n", "h_rec", "votes"],
                        json!({ "members": members, "rows": to_value(&cells)? }),
                    );
                    for c in &cells {
                        art.row(vec![c.n.to_string(), c.h_rec.to_string(), join(&c.votes)]);
                    }
                    Ok(art)
                }
                fig => {
                    let which: Figure = format!("{fig:?}").to_lowercase().parse()?;
                    let names: Vec<String> = dists.iter().map(|d| d.to_string()).collect();
                    let pts: Vec<_> = tables::figure(which)?
                        .into_iter()
                        .filter(|p| p.dist.is_empty() || names.contains(&p.dist))
                        .collect();
                    let mut art = Artifact::new(vec!["dist", "fixed", "x", "y"], to_value(&pts)?);
                    for p in &pts {
                        art.row(vec![p.dist.clone(), p.fixed.to_string(), p.x.to_string(), num(p.y)]);
                    }
                    Ok(art)
                }
            }
        }
        Command::OptimalH { dist, n_list, h_max, scheme } => {
            let results = n_list
                .0
                .iter()
                .map(|&n| optimal_h(n, dist, *scheme, *h_max as usize))
                .collect::<jps_core::Result<Vec<_>>>()?;
            let mut art = Artifact::new(vec!["n", "h_opt", "mre", "mre_exact", "tied"], to_value(&results)?);
            for r in &results {
                art.row(vec![r.n.to_string(), r.h_opt.to_string(), dp2(r.mre), num(r.mre_exact), join(&r.tied)]);
            }
            Ok(art)
        }
        Command::Verify { suite, reps } => {
            let report = run_suite(*suite, seed, *reps)?;
            let mut art = Artifact::new(
                vec!["suite", "check", "measured", "expected", "se", "deviation", "tolerance", "passed"],
                to_value(&report)?,
            );
            for c in &report.checks {
                art.row(vec![
                    c.suite.to_string(),
                    c.name.clone(),
                    num(c.measured),
                    num(c.expected),
                    c.se.map_or(String::new(), num),
                    num(c.deviation),
                    num(c.tolerance),
                    c.passed.to_string(),
                ]);
            }
            Ok(art)
        }
    }
}

fn join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

/// Reads `x,rank` rows; `#` lines are skipped.
pub fn read_sample(path: &Path, h: usize) -> Result<JpsSample> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(file);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|c| c == name).with_context(|| format!("missing `{name}` column"));
    let (xi, ri) = (col("x")?, col("rank")?);
    let mut obs = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let x: f64 = rec[xi].parse().with_context(|| format!("row {}: bad x", line + 1))?;
        let rank: usize = rec[ri].parse().with_context(|| format!("row {}: bad rank", line + 1))?;
        obs.push(Observation { x, rank });
    }
    Ok(JpsSample::new(h, obs)?)
}
