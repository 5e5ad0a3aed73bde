//! Sweep drivers and the CSV result format.
//!
//! Every CSV starts with `#` comment lines recording the tool version, the
//! command, its full configuration and the master seed, followed by an
//! RFC-4180 table. The worker count is deliberately left out of the header
//! so that output bytes do not depend on it.

use std::io::Write;

use serde::Serialize;

use crate::analysis::{
    binary_entropy, in_critical_region, percolation_threshold, plaquette_edge_ratio, solve_entropy, tradeoff_curve,
    AnalysisError, LatticeSize, ThresholdQuery,
};
use crate::exec::Executor;
use crate::gec::{estimate_gec, GecParams, PairPolicy};
use crate::lattice::{Geometry, Network};
use crate::percolation::estimate_phi_psi;
use crate::states::{strategy_curve, PureStateParam};
use crate::{Error, Result};

const MAX_GRID_POINTS: usize = 1_000_000;

fn round12(x: f64) -> f64 {
    let r = (x * 1e12).round() / 1e12;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn grid_error(spec: &str, reason: impl Into<String>) -> Error {
    Error::Grid {
        spec: spec.to_string(),
        reason: reason.into(),
    }
}

/// Parses a value list: a single number, a comma-separated list, or an
/// inclusive `start:stop:step` range. Values are rounded to 12 decimals so
/// that ranges do not accumulate floating-point drift.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let num = |s: &str| -> Result<f64> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| grid_error(spec, format!("`{}` is not a number", s.trim())))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(grid_error(spec, "values must be finite"))
        }
    };
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [single] => single.split(',').map(|s| num(s).map(round12)).collect(),
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if step <= 0.0 {
                return Err(grid_error(spec, "step must be positive"));
            }
            if stop < start {
                return Err(grid_error(spec, "stop is below start"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            if count > MAX_GRID_POINTS {
                return Err(grid_error(spec, format!("more than {MAX_GRID_POINTS} points")));
            }
            Ok((0..count).map(|i| round12(start + step * i as f64)).collect())
        }
        _ => Err(grid_error(spec, "expected a value, a list or start:stop:step")),
    }
}

/// Like [`parse_grid`] but for positive integers such as lattice sides.
pub fn parse_sizes(spec: &str) -> Result<Vec<usize>> {
    parse_grid(spec)?
        .into_iter()
        .map(|v| {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(grid_error(spec, format!("{v} is not a positive integer")))
            }
        })
        .collect()
}

/// Comment block written above every table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsvHeader {
    pub command: String,
    pub config: Vec<(String, String)>,
    pub seed: u64,
}

impl CsvHeader {
    pub fn new(command: impl Into<String>, seed: u64) -> Self {
        Self {
            command: command.into(),
            config: Vec::new(),
            seed,
        }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.config.push((key.into(), value.to_string()));
        self
    }
}

pub fn write_csv<W: Write, T: Serialize>(mut out: W, header: &CsvHeader, rows: &[T]) -> Result<()> {
    writeln!(out, "# netgec {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(out, "# command: {}", header.command)?;
    let config: Vec<String> = header.config.iter().map(|(k, v)| format!("{k}={v}")).collect();
    writeln!(out, "# config: {}", config.join(" "))?;
    writeln!(out, "# seed: {}", header.seed)?;
    let mut table = csv::Writer::from_writer(out);
    for row in rows {
        table.serialize(row)?;
    }
    table.flush()?;
    Ok(())
}

/// Renders a table to a string, mostly for tests and comparisons.
pub fn csv_string<T: Serialize>(header: &CsvHeader, rows: &[T]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, header, rows)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Entropic-region flag for a geometry in the infinite-lattice limit.
/// `None` where no plaquette/edge ratio is known.
pub fn region_flag(geometry: Geometry, p_c: f64, p_x_prime: f64) -> Option<bool> {
    match geometry {
        Geometry::Square => Some(in_critical_region(p_c, p_x_prime)),
        Geometry::Triangular => {
            let q = ThresholdQuery::new(geometry, LatticeSize::Infinite, p_c).ok()?;
            match plaquette_edge_ratio(&q, 1.0) {
                Ok(ratio) => Some(binary_entropy(p_x_prime) < ratio),
                Err(_) => Some(false),
            }
        }
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GecRow {
    pub geometry: Geometry,
    #[serde(rename = "L")]
    pub side: usize,
    #[serde(rename = "P_c")]
    pub p_c: f64,
    pub p_x: f64,
    pub p_z: f64,
    pub trials: u64,
    pub void_trials: u64,
    pub mean_success: f64,
    pub se: f64,
    pub mean_defects: f64,
    pub mean_match_weight: f64,
    pub fidelity: f64,
    pub seed: u64,
    pub fidelity_se: f64,
    pub phi: f64,
    pub patch_probability: f64,
    pub p_same_indep: f64,
    pub pair_policy: String,
    pub warning: String,
}

pub struct GecSweep<'a> {
    pub networks: &'a [Network],
    pub p_c: &'a [f64],
    pub p_x: &'a [f64],
    pub p_z: &'a [f64],
    pub policy: PairPolicy,
    pub trials: u64,
    pub seed: u64,
}

/// One row per (network, P_c, p_x, p_z) point, in that nesting order.
pub fn gec_sweep(sweep: &GecSweep<'_>, exec: Executor) -> Result<Vec<GecRow>> {
    let mut rows = Vec::new();
    for net in sweep.networks {
        for &p_c in sweep.p_c {
            for &p_x in sweep.p_x {
                for &p_z in sweep.p_z {
                    let params = GecParams {
                        p_c,
                        p_x,
                        p_z,
                        policy: sweep.policy,
                    };
                    let est = estimate_gec(net, &params, sweep.trials, sweep.seed, exec)?;
                    rows.push(GecRow {
                        geometry: net.geometry(),
                        side: net.side(),
                        p_c,
                        p_x,
                        p_z,
                        trials: est.trials,
                        void_trials: est.void_trials,
                        mean_success: est.success.mean,
                        se: est.success.se,
                        mean_defects: est.mean_defects,
                        mean_match_weight: est.mean_match_weight,
                        fidelity: est.fidelity.mean,
                        seed: sweep.seed,
                        fidelity_se: est.fidelity.se,
                        phi: est.phi,
                        patch_probability: est.patch_probability,
                        p_same_indep: est.p_same_independent,
                        pair_policy: sweep.policy.to_string(),
                        warning: if est.void_fraction() > 0.5 {
                            "void_fraction_above_half".into()
                        } else {
                            String::new()
                        },
                    });
                }
            }
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhiRow {
    pub geometry: Geometry,
    #[serde(rename = "L")]
    pub side: usize,
    #[serde(rename = "P_c")]
    pub p_c: f64,
    pub phi: f64,
    pub phi_se: f64,
    pub psi: f64,
    pub psi_se: f64,
    pub trials: u64,
    pub seed: u64,
}

pub fn phi_sweep(networks: &[Network], p_c: &[f64], trials: u64, seed: u64, exec: Executor) -> Vec<PhiRow> {
    let mut rows = Vec::new();
    for net in networks {
        for &p in p_c {
            let est = estimate_phi_psi(net, p, trials, seed, exec);
            rows.push(PhiRow {
                geometry: net.geometry(),
                side: net.side(),
                p_c: p,
                phi: est.phi.mean,
                phi_se: est.phi.se,
                psi: est.psi.mean,
                psi_se: est.psi.se,
                trials,
                seed,
            });
        }
    }
    rows
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionRow {
    pub geometry: Geometry,
    #[serde(rename = "L")]
    pub side: usize,
    #[serde(rename = "P_c")]
    pub p_c: f64,
    pub p_x_prime: f64,
    pub phi: f64,
    #[serde(rename = "F")]
    pub fidelity: f64,
    #[serde(rename = "F_se")]
    pub fidelity_se: f64,
    pub trials: u64,
    pub void_trials: u64,
    pub seed: u64,
    pub in_critical_region: Option<bool>,
}

/// Fidelity over a (P_c, p_x') grid of binary states on one network.
pub fn region_sweep(
    net: &Network,
    p_c: &[f64],
    p_x_prime: &[f64],
    policy: PairPolicy,
    trials: u64,
    seed: u64,
    exec: Executor,
) -> Result<Vec<RegionRow>> {
    let mut rows = Vec::new();
    for &pc in p_c {
        for &px in p_x_prime {
            let params = GecParams {
                p_c: pc,
                p_x: px,
                p_z: 0.0,
                policy,
            };
            let est = estimate_gec(net, &params, trials, seed, exec)?;
            rows.push(RegionRow {
                geometry: net.geometry(),
                side: net.side(),
                p_c: pc,
                p_x_prime: px,
                phi: est.phi,
                fidelity: est.fidelity.mean,
                fidelity_se: est.fidelity.se,
                trials,
                void_trials: est.void_trials,
                seed,
                in_critical_region: region_flag(net.geometry(), pc, px),
            });
        }
    }
    Ok(rows)
}

/// Evenly spaced `alpha'` values from 1/2 to `alpha`, `steps` intervals.
pub fn alpha_prime_grid(alpha: f64, steps: usize) -> Vec<f64> {
    let steps = steps.max(1);
    (0..=steps)
        .map(|i| round12(0.5 + (alpha - 0.5) * i as f64 / steps as f64))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrategyRow {
    pub alpha: f64,
    pub alpha_prime: f64,
    #[serde(rename = "P_c")]
    pub p_c: f64,
    pub p_x_prime: f64,
    pub in_critical_region: bool,
}

pub fn strategy_rows(alphas: &[f64], steps: usize) -> Result<Vec<StrategyRow>> {
    let mut rows = Vec::new();
    for &a in alphas {
        for pt in strategy_curve(PureStateParam::new(a)?, &alpha_prime_grid(a, steps))? {
            rows.push(StrategyRow {
                alpha: a,
                alpha_prime: pt.alpha_prime,
                p_c: pt.p_c,
                p_x_prime: pt.p_x_prime,
                in_critical_region: in_critical_region(pt.p_c, pt.p_x_prime),
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TradeoffRow {
    pub alpha: f64,
    pub alpha_prime: f64,
    #[serde(rename = "P_c")]
    pub p_c: f64,
    pub p_x_prime: f64,
    pub phi: f64,
    #[serde(rename = "F")]
    pub fidelity: f64,
    #[serde(rename = "F_se")]
    pub fidelity_se: f64,
    pub fom: f64,
    pub in_critical_region: Option<bool>,
}

pub fn tradeoff_rows(
    net: &Network,
    alphas: &[f64],
    steps: usize,
    policy: PairPolicy,
    trials: u64,
    seed: u64,
    exec: Executor,
) -> Result<Vec<TradeoffRow>> {
    let mut rows = Vec::new();
    for &a in alphas {
        for pt in tradeoff_curve(a, &alpha_prime_grid(a, steps), net, trials, seed, policy, exec)? {
            rows.push(TradeoffRow {
                alpha: pt.alpha,
                alpha_prime: pt.alpha_prime,
                p_c: pt.p_c,
                p_x_prime: pt.p_x_prime,
                phi: pt.phi,
                fidelity: pt.fidelity,
                fidelity_se: pt.fidelity_se,
                fom: pt.figure_of_merit,
                in_critical_region: region_flag(net.geometry(), pt.p_c, pt.p_x_prime),
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdRow {
    pub geometry: Geometry,
    #[serde(rename = "P_c")]
    pub p_c: f64,
    /// Empty when there is no information margin.
    pub p_star: Option<f64>,
    pub in_critical_region: bool,
    pub percolation_threshold: Option<f64>,
}

/// Critical bit-flip probability per (geometry, P_c) in the infinite limit.
pub fn threshold_table(geometries: &[Geometry], p_c: &[f64]) -> Result<Vec<ThresholdRow>> {
    let mut rows = Vec::new();
    for &g in geometries {
        for &pc in p_c {
            let query = ThresholdQuery::new(g, LatticeSize::Infinite, pc)?;
            let p_star = match plaquette_edge_ratio(&query, 1.0) {
                Ok(ratio) => Some(solve_entropy(ratio)),
                Err(AnalysisError::NoInformationMargin(_)) => None,
                Err(e) => return Err(e.into()),
            };
            rows.push(ThresholdRow {
                geometry: g,
                p_c: pc,
                p_star,
                in_critical_region: p_star.is_some(),
                percolation_threshold: percolation_threshold(g),
            });
        }
    }
    Ok(rows)
}
