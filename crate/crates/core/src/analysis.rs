//! Closed-form analytics: binary entropy, the entropic threshold region,
//! percolation thresholds of the regular lattices, majority-vote encoding
//! estimates and the pure-state trade-off sweep.

use std::f64::consts::PI;

use thiserror::Error;

use crate::exec::Executor;
use crate::gec::{estimate_gec, GecError, GecParams, PairPolicy};
use crate::lattice::{Geometry, Network};
use crate::states::{strategy_curve, PureStateParam, StateError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("{name} = {value} is outside its valid range")]
    Probability { name: &'static str, value: f64 },
    #[error("plaquette/edge ratio {0} leaves no information margin")]
    NoInformationMargin(f64),
    #[error("no plaquette/edge ratio is known for {0} networks")]
    Unsupported(Geometry),
    #[error("lattice side must be at least 2, got {0}")]
    InvalidSize(u64),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Gec(#[from] GecError),
}

fn check_probability(name: &'static str, value: f64) -> Result<(), AnalysisError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(AnalysisError::Probability { name, value })
    }
}

/// `H(p) = -p log2 p - (1-p) log2 (1-p)`, with `H(0) = H(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |q: f64| if q <= 0.0 { 0.0 } else { -q * q.log2() };
    term(p) + term(1.0 - p)
}

/// The `p <= 1/2` solution of `H(p) = target`, by bisection. Targets outside
/// `[0, 1]` are clamped.
pub fn solve_entropy(target: f64) -> f64 {
    let target = target.clamp(0.0, 1.0);
    let (mut lo, mut hi) = (0.0_f64, 0.5_f64);
    if target <= 0.0 {
        return 0.0;
    }
    if target >= 1.0 {
        return 0.5;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let h = binary_entropy(mid);
        if (h - target).abs() < 1e-13 {
            return mid;
        }
        if h < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Bond-percolation thresholds of the regular lattices.
pub fn percolation_threshold(geometry: Geometry) -> Option<f64> {
    let s = 2.0 * (PI / 18.0).sin();
    match geometry {
        Geometry::Square => Some(0.5),
        Geometry::Triangular => Some(s),
        Geometry::Honeycomb => Some(1.0 - s),
        Geometry::Custom => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LatticeSize {
    Finite(u64),
    Infinite,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdQuery {
    pub geometry: Geometry,
    pub size: LatticeSize,
    pub p_c: f64,
}

impl ThresholdQuery {
    pub fn new(geometry: Geometry, size: LatticeSize, p_c: f64) -> Result<Self, AnalysisError> {
        if !(p_c > 0.0 && p_c <= 1.0) {
            return Err(AnalysisError::Probability {
                name: "P_c",
                value: p_c,
            });
        }
        if let LatticeSize::Finite(l) = size {
            if l < 2 {
                return Err(AnalysisError::InvalidSize(l));
            }
        }
        Ok(Self { geometry, size, p_c })
    }
}

/// Mean plaquettes per edge of the largest cluster, `<N_P>/<N_E>`.
///
/// Uses Euler's formula `N_P = 2 + N_E - N_N` with `<N_N> = L^2 phi` and
/// `<N_E> = B(L) P_c phi`, where `B(L)` is the bond count of the full
/// lattice. `phi` is the largest-cluster node fraction at `P_c` and is only
/// used for finite sizes.
pub fn plaquette_edge_ratio(query: &ThresholdQuery, phi: f64) -> Result<f64, AnalysisError> {
    // bonds per node in the bulk
    let degree_half = match query.geometry {
        Geometry::Square => 2.0,
        Geometry::Triangular => 3.0,
        g => return Err(AnalysisError::Unsupported(g)),
    };
    let ratio = match query.size {
        LatticeSize::Infinite => 1.0 - 1.0 / (degree_half * query.p_c),
        LatticeSize::Finite(l) => {
            if !(phi > 0.0 && phi <= 1.0) {
                return Err(AnalysisError::Probability {
                    name: "phi",
                    value: phi,
                });
            }
            let l = l as f64;
            let bonds = match query.geometry {
                Geometry::Square => 2.0 * l * (l - 1.0),
                _ => (l - 1.0) * (3.0 * l - 1.0),
            };
            1.0 + (2.0 - l * l * phi) / (bonds * query.p_c * phi)
        }
    };
    if ratio <= 0.0 {
        return Err(AnalysisError::NoInformationMargin(ratio));
    }
    Ok(ratio)
}

/// Largest bit-flip probability that still leaves information margin:
/// the solution of `H(p) = <N_P>/<N_E>`.
pub fn critical_bit_flip(query: &ThresholdQuery, phi: f64) -> Result<f64, AnalysisError> {
    plaquette_edge_ratio(query, phi).map(solve_entropy)
}

/// `(1 - H(p_x')) P_c > 1/2`: the infinite square-lattice entropic region.
pub fn in_critical_region(p_c: f64, p_x_prime: f64) -> bool {
    (1.0 - binary_entropy(p_x_prime)) * p_c > 0.5
}

/// Finite-size version of [`in_critical_region`]: `H(p_x') < <N_P>/<N_E>`.
/// A query without information margin is outside the region.
pub fn in_entropic_region(query: &ThresholdQuery, phi: f64, p_x_prime: f64) -> Result<bool, AnalysisError> {
    match plaquette_edge_ratio(query, phi) {
        Ok(ratio) => Ok(binary_entropy(p_x_prime) < ratio),
        Err(AnalysisError::NoInformationMargin(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Effective per-bond error rates under a `2t+1` edge majority-vote code.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CssEstimate {
    pub p_z_eff: f64,
    pub p_x_eff: f64,
    /// One of the estimates exceeded 1 and was clamped.
    pub clamped: bool,
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// `p_z -> C(2t+1, t+1) p_z^(t+1)` and `p_x -> (2t+1) p_x`.
pub fn css_tradeoff(t: u32, p_x: f64, p_z: f64) -> Result<CssEstimate, AnalysisError> {
    check_probability("p_x", p_x)?;
    check_probability("p_z", p_z)?;
    let n = 2 * t + 1;
    let p_z_raw = binomial(n, t + 1) * p_z.powi(t as i32 + 1);
    let p_x_raw = f64::from(n) * p_x;
    Ok(CssEstimate {
        p_z_eff: p_z_raw.min(1.0),
        p_x_eff: p_x_raw.min(1.0),
        clamped: p_z_raw > 1.0 || p_x_raw > 1.0,
    })
}

/// One point of a pure-state trade-off curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TradeoffPoint {
    pub alpha: f64,
    pub alpha_prime: f64,
    pub p_c: f64,
    pub p_x_prime: f64,
    pub phi: f64,
    pub fidelity: f64,
    pub fidelity_se: f64,
    /// `F phi^2`: fidelity weighted by the chance that two given nodes are
    /// both in the largest cluster.
    pub figure_of_merit: f64,
}

/// Simulates every strategy point of `|alpha>` on `net`: convert edges to
/// `|alpha'>`, twirl, dilute and correct.
pub fn tradeoff_curve(
    alpha: f64,
    alpha_primes: &[f64],
    net: &Network,
    trials: u64,
    seed: u64,
    policy: PairPolicy,
    exec: Executor,
) -> Result<Vec<TradeoffPoint>, AnalysisError> {
    let curve = strategy_curve(PureStateParam::new(alpha)?, alpha_primes)?;
    curve
        .into_iter()
        .map(|pt| {
            let params = GecParams {
                p_c: pt.p_c,
                p_x: pt.p_x_prime,
                p_z: 0.0,
                policy,
            };
            let est = estimate_gec(net, &params, trials, seed, exec)?;
            Ok(TradeoffPoint {
                alpha,
                alpha_prime: pt.alpha_prime,
                p_c: pt.p_c,
                p_x_prime: pt.p_x_prime,
                phi: est.phi,
                fidelity: est.fidelity.mean,
                fidelity_se: est.fidelity.se,
                figure_of_merit: est.fidelity.mean * est.phi * est.phi,
            })
        })
        .collect()
}
