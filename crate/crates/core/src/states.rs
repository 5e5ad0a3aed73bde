//! Single-edge state algebra at the level of Bell-diagonal weights.
//!
//! Nothing here touches amplitudes. An edge is either described by its
//! bit-flip/phase-flip probabilities, by the rank-three `(lambda, nu)` family
//! that PCM distillation accepts, or by the Schmidt coefficient of a pure
//! state; all conversions end in a binary state with bit-flip weight `p_x'`.

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("probability {name} = {value} is outside [0, 1]")]
    Probability { name: &'static str, value: f64 },
    #[error("rank-three parameters need lambda + nu <= 1, got {0}")]
    RankThreeSum(f64),
    #[error("state with lambda + nu = 0 cannot be distilled")]
    Undistillable,
    #[error("PCM needs at least two edges per bond, got m = {0}")]
    TooFewEdges(u32),
    #[error("Schmidt coefficient {0} is outside [1/2, 1]")]
    Schmidt(f64),
    #[error("binary-state weight {0} is outside [0, 1/2]")]
    BinaryWeight(f64),
    #[error("target alpha' = {target} is less entangled than the source alpha = {alpha}")]
    InfeasibleTarget { alpha: f64, target: f64 },
    #[error("alpha = 1 is a product state with no entanglement to concentrate")]
    ZeroEntanglement,
}

fn check_probability(name: &'static str, value: f64) -> Result<f64, StateError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(StateError::Probability { name, value })
    }
}

/// Independent bit-flip (`p_x`) and phase-flip (`p_z`) errors on a singlet.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BellDiagonalParams {
    p_x: f64,
    p_z: f64,
}

impl BellDiagonalParams {
    pub fn new(p_x: f64, p_z: f64) -> Result<Self, StateError> {
        Ok(Self {
            p_x: check_probability("p_x", p_x)?,
            p_z: check_probability("p_z", p_z)?,
        })
    }

    pub fn p_x(&self) -> f64 {
        self.p_x
    }

    pub fn p_z(&self) -> f64 {
        self.p_z
    }

    /// Bell weights `[p00, p01, p10, p11]`; index `2a + b` for `X^a Z^b`.
    pub fn weights(&self) -> [f64; 4] {
        let (x, z) = (self.p_x, self.p_z);
        [(1.0 - x) * (1.0 - z), (1.0 - x) * z, x * (1.0 - z), x * z]
    }
}

/// Bit-flip (`a`) and phase-flip (`b`) bits of one pure ensemble member.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct EdgeErrorConfig {
    pub bit_flips: Vec<bool>,
    pub phase_flips: Vec<bool>,
}

impl EdgeErrorConfig {
    pub fn zeros(edges: usize) -> Self {
        Self {
            bit_flips: vec![false; edges],
            phase_flips: vec![false; edges],
        }
    }

    pub fn len(&self) -> usize {
        self.bit_flips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bit_flips.is_empty()
    }

    /// Number of bit-flip errors.
    pub fn n_x(&self) -> usize {
        self.bit_flips.iter().filter(|&&a| a).count()
    }

    /// Number of phase-flip errors.
    pub fn n_z(&self) -> usize {
        self.phase_flips.iter().filter(|&&b| b).count()
    }
}

/// Draws `a_i ~ Bernoulli(p_x)` and `b_i ~ Bernoulli(p_z)` for every edge.
///
/// Each edge consumes exactly two uniforms (`a` then `b`) and a bit is set
/// when its uniform falls below the probability, so configurations drawn
/// from the same stream are nested in `p_x` and in `p_z`.
pub fn sample_edge_config<R: Rng + ?Sized>(params: &BellDiagonalParams, edges: usize, rng: &mut R) -> EdgeErrorConfig {
    let mut config = EdgeErrorConfig::zeros(edges);
    for i in 0..edges {
        let ua: f64 = rng.random();
        let ub: f64 = rng.random();
        config.bit_flips[i] = ua < params.p_x;
        config.phase_flips[i] = ub < params.p_z;
    }
    config
}

/// `lambda |psi00><psi00| + nu |psi01><psi01| + (1 - lambda - nu) |01><01|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankThreeParams {
    lambda: f64,
    nu: f64,
}

impl RankThreeParams {
    pub fn new(lambda: f64, nu: f64) -> Result<Self, StateError> {
        check_probability("lambda", lambda)?;
        check_probability("nu", nu)?;
        if lambda + nu > 1.0 {
            return Err(StateError::RankThreeSum(lambda + nu));
        }
        Ok(Self { lambda, nu })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }
}

/// Largest Schmidt coefficient of a pure two-qubit state.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct PureStateParam(f64);

impl PureStateParam {
    pub fn new(alpha: f64) -> Result<Self, StateError> {
        if (0.5..=1.0).contains(&alpha) {
            Ok(Self(alpha))
        } else {
            Err(StateError::Schmidt(alpha))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Bit-flip weight `p_x'` of a binary (rank-two) state.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct BinaryStateParam(f64);

impl BinaryStateParam {
    pub fn new(p_x: f64) -> Result<Self, StateError> {
        if (0.0..=0.5).contains(&p_x) {
            Ok(Self(p_x))
        } else {
            Err(StateError::BinaryWeight(p_x))
        }
    }

    fn clamped(p_x: f64) -> Self {
        Self(p_x.clamp(0.0, 0.5))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PcmOutcome {
    pub binary: BinaryStateParam,
    pub success_prob: f64,
}

/// Pure-state conversion measurement on two rank-three edges.
///
/// On success (probability `(lambda + nu)^2 / 2`) the pair becomes a binary
/// state with
/// `p_x' = 1 - ((lambda + nu)^2 + (lambda - nu)^2) / (2 (lambda + nu)^2)`.
pub fn pcm_distill(state: &RankThreeParams) -> Result<PcmOutcome, StateError> {
    let sum = state.lambda + state.nu;
    if sum <= 0.0 {
        return Err(StateError::Undistillable);
    }
    let diff = state.lambda - state.nu;
    let s2 = sum * sum;
    let p_x = 1.0 - (s2 + diff * diff) / (2.0 * s2);
    Ok(PcmOutcome {
        binary: BinaryStateParam::clamped(p_x),
        success_prob: s2 / 2.0,
    })
}

/// Probability that a bond of `m` rank-three edges yields a binary state
/// when PCM is attempted on disjoint pairs until one succeeds:
/// `1 - (1 - (lambda + nu)^2 / 2)^floor(m / 2)`.
pub fn bond_conversion_prob(state: &RankThreeParams, m: u32) -> Result<f64, StateError> {
    if m < 2 {
        return Err(StateError::TooFewEdges(m));
    }
    let sum = state.lambda + state.nu;
    let fail = 1.0 - sum * sum / 2.0;
    Ok(1.0 - fail.powi((m / 2) as i32))
}

/// Optimal probability of converting `|alpha>` into the more entangled
/// `|alpha'>` by LOCC: `(1 - alpha) / (1 - alpha')`.
pub fn pure_convert_prob(alpha: PureStateParam, target: PureStateParam) -> Result<f64, StateError> {
    let (a, t) = (alpha.value(), target.value());
    if a >= 1.0 {
        return Err(StateError::ZeroEntanglement);
    }
    if t > a {
        return Err(StateError::InfeasibleTarget { alpha: a, target: t });
    }
    Ok((1.0 - a) / (1.0 - t))
}

/// Twirls `|alpha'>` into a binary state with
/// `p_x' = (sqrt(alpha') - sqrt(1 - alpha'))^2 / 2`.
pub fn twirl_to_binary(alpha: PureStateParam) -> BinaryStateParam {
    let a = alpha.value();
    let d = a.sqrt() - (1.0 - a).sqrt();
    BinaryStateParam::clamped(d * d / 2.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrategyPoint {
    pub alpha_prime: f64,
    pub p_c: f64,
    pub p_x_prime: f64,
}

/// Binary states reachable from `|alpha>`: for each intermediate `alpha'` the
/// conversion probability and the twirled bit-flip weight.
pub fn strategy_curve(alpha: PureStateParam, grid: &[f64]) -> Result<Vec<StrategyPoint>, StateError> {
    grid.iter()
        .map(|&ap| {
            let target = PureStateParam::new(ap)?;
            Ok(StrategyPoint {
                alpha_prime: ap,
                p_c: pure_convert_prob(alpha, target)?,
                p_x_prime: twirl_to_binary(target).value(),
            })
        })
        .collect()
}
