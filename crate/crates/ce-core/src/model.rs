//! Domain types and the pure signal-model equations.
//!
//! Everything here is a direct transcription of the noise-free downlink
//! model: `N` antennas, `M` single-antenna users, an FIR channel of `L`
//! taps per antenna/user pair and a block of `T` channel uses. Angles are
//! stored unwrapped (cumulative radians); the consecutive-step constraint
//! is defined on literal increments, so wrapping happens only inside
//! `e^{jθ}` evaluation.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_traits::Euclid;

pub type Complex64 = num_complex::Complex<f64>;

/// Problem sizes: antennas `N`, users `M`, channel taps `L`, block length `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dimensions {
    num_antennas: usize,
    num_users: usize,
    channel_taps: usize,
    block_length: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    /// A dimension was zero.
    EmptyDimension(&'static str),
    /// An array had the wrong number of elements.
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    /// A value was NaN or infinite.
    NonFinite(&'static str),
    /// A scalar parameter fell outside its admissible range.
    OutOfRange(String),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::EmptyDimension(name) => write!(f, "dimension {name} must be >= 1"),
            ModelError::ShapeMismatch {
                what,
                expected,
                got,
            } => write!(f, "{what}: expected {expected} elements, got {got}"),
            ModelError::NonFinite(what) => write!(f, "{what} contains a non-finite value"),
            ModelError::OutOfRange(msg) => write!(f, "{msg}"),
        }
    }
}

impl core::error::Error for ModelError {}

impl Dimensions {
    /// All dimensions must be at least 1. `N < M` is allowed (the caller
    /// may warn); precoding quality then degrades but nothing breaks.
    pub fn new(
        num_antennas: usize,
        num_users: usize,
        channel_taps: usize,
        block_length: usize,
    ) -> Result<Self, ModelError> {
        if num_antennas == 0 {
            return Err(ModelError::EmptyDimension("num_antennas"));
        }
        if num_users == 0 {
            return Err(ModelError::EmptyDimension("num_users"));
        }
        if channel_taps == 0 {
            return Err(ModelError::EmptyDimension("channel_taps"));
        }
        if block_length == 0 {
            return Err(ModelError::EmptyDimension("block_length"));
        }
        Ok(Self {
            num_antennas,
            num_users,
            channel_taps,
            block_length,
        })
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn channel_taps(&self) -> usize {
        self.channel_taps
    }

    pub fn block_length(&self) -> usize {
        self.block_length
    }

    /// True when the array is smaller than the user count; precoding is
    /// still defined but the residual MUI will not be small.
    pub fn is_underdetermined(&self) -> bool {
        self.num_antennas < self.num_users
    }
}

/// The M×N×L complex impulse responses `h_{k,i}[l]`.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    dims: Dimensions,
    // Layout [user k][antenna i][tap l].
    taps: Vec<Complex64>,
}

impl ChannelRealization {
    pub fn from_taps(dims: Dimensions, taps: Vec<Complex64>) -> Result<Self, ModelError> {
        let expected = dims.num_users * dims.num_antennas * dims.channel_taps;
        if taps.len() != expected {
            return Err(ModelError::ShapeMismatch {
                what: "channel taps",
                expected,
                got: taps.len(),
            });
        }
        if taps.iter().any(|h| !h.re.is_finite() || !h.im.is_finite()) {
            return Err(ModelError::NonFinite("channel taps"));
        }
        Ok(Self { dims, taps })
    }

    pub fn dims(&self) -> Dimensions {
        self.dims
    }

    #[inline]
    pub fn tap(&self, user: usize, antenna: usize, lag: usize) -> Complex64 {
        debug_assert!(user < self.dims.num_users);
        debug_assert!(antenna < self.dims.num_antennas);
        debug_assert!(lag < self.dims.channel_taps);
        self.taps[(user * self.dims.num_antennas + antenna) * self.dims.channel_taps + lag]
    }
}

/// The M×T information symbols `u_k[t]` plus per-user energies `E_k`.
#[derive(Debug, Clone)]
pub struct SymbolFrame {
    dims: Dimensions,
    // Layout [user k][time t], t zero-based here.
    symbols: Vec<Complex64>,
    energies: Vec<f64>,
}

impl SymbolFrame {
    /// `symbols` laid out `[user][time]`; `energies` one nonnegative scale
    /// per user.
    pub fn new(
        dims: Dimensions,
        symbols: Vec<Complex64>,
        energies: Vec<f64>,
    ) -> Result<Self, ModelError> {
        let expected = dims.num_users * dims.block_length;
        if symbols.len() != expected {
            return Err(ModelError::ShapeMismatch {
                what: "symbols",
                expected,
                got: symbols.len(),
            });
        }
        if energies.len() != dims.num_users {
            return Err(ModelError::ShapeMismatch {
                what: "energies",
                expected: dims.num_users,
                got: energies.len(),
            });
        }
        if symbols.iter().any(|u| !u.re.is_finite() || !u.im.is_finite()) {
            return Err(ModelError::NonFinite("symbols"));
        }
        if energies.iter().any(|e| !e.is_finite() || *e < 0.0) {
            return Err(ModelError::OutOfRange(String::from(
                "energies must be finite and >= 0",
            )));
        }
        Ok(Self {
            dims,
            symbols,
            energies,
        })
    }

    pub fn dims(&self) -> Dimensions {
        self.dims
    }

    /// Symbol for user `k` at time `t`, `t` one-based in `1..=T`.
    #[inline]
    pub fn symbol(&self, user: usize, t: usize) -> Complex64 {
        debug_assert!(user < self.dims.num_users);
        debug_assert!(t >= 1 && t <= self.dims.block_length);
        self.symbols[user * self.dims.block_length + (t - 1)]
    }

    #[inline]
    pub fn energy(&self, user: usize) -> f64 {
        self.energies[user]
    }

    pub fn set_uniform_energy(&mut self, energy: f64) {
        for e in &mut self.energies {
            *e = energy;
        }
    }
}

/// The N×T transmit phase angles plus the fixed boundary angles for
/// `t <= 0` that the convolution reaches back into.
///
/// Time is one-based: `angles` covers `t = 1..=T`, `history` covers
/// `t = 2−L..=0` (so `L−1` columns). With `L = 1` there is no stored
/// history and `θ_i[0]` is taken as 0, which the consecutive-step
/// constraint at `t = 1` is measured against.
#[derive(Debug, Clone)]
pub struct PhaseSchedule {
    num_antennas: usize,
    channel_taps: usize,
    block_length: usize,
    // Layout [antenna][column], L-1 columns for t = 2-L..=0.
    history: Vec<f64>,
    // Layout [antenna][t-1] for t = 1..=T.
    angles: Vec<f64>,
}

impl PhaseSchedule {
    /// Builds a schedule from explicit history (`N×(L−1)`, time ascending
    /// per antenna) and angles (`N×T`).
    pub fn new(dims: Dimensions, history: Vec<f64>, angles: Vec<f64>) -> Result<Self, ModelError> {
        let hist_expected = dims.num_antennas * (dims.channel_taps - 1);
        if history.len() != hist_expected {
            return Err(ModelError::ShapeMismatch {
                what: "phase history",
                expected: hist_expected,
                got: history.len(),
            });
        }
        let expected = dims.num_antennas * dims.block_length;
        if angles.len() != expected {
            return Err(ModelError::ShapeMismatch {
                what: "phase angles",
                expected,
                got: angles.len(),
            });
        }
        if history.iter().chain(angles.iter()).any(|a| !a.is_finite()) {
            return Err(ModelError::NonFinite("phase angles"));
        }
        Ok(Self {
            num_antennas: dims.num_antennas,
            channel_taps: dims.channel_taps,
            block_length: dims.block_length,
            history,
            angles,
        })
    }

    /// All-zero history, all-zero angles.
    pub fn zeroed(dims: Dimensions) -> Self {
        Self {
            num_antennas: dims.num_antennas,
            channel_taps: dims.channel_taps,
            block_length: dims.block_length,
            history: vec![0.0; dims.num_antennas * (dims.channel_taps - 1)],
            angles: vec![0.0; dims.num_antennas * dims.block_length],
        }
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    pub fn block_length(&self) -> usize {
        self.block_length
    }

    pub fn channel_taps(&self) -> usize {
        self.channel_taps
    }

    /// Angle `θ_i[t]` for `t` in `2−L..=T`. Queries at `t <= 0` read the
    /// immutable history; with `L = 1` the only such query is `t = 0`,
    /// which returns the implicit boundary value 0.
    #[inline]
    pub fn angle(&self, antenna: usize, t: isize) -> f64 {
        debug_assert!(antenna < self.num_antennas);
        if t >= 1 {
            debug_assert!(t as usize <= self.block_length);
            self.angles[antenna * self.block_length + (t as usize - 1)]
        } else if self.channel_taps == 1 {
            debug_assert!(t == 0);
            0.0
        } else {
            // t in 2-L..=0 maps to column t + L - 2.
            let col = t + self.channel_taps as isize - 2;
            debug_assert!(col >= 0 && (col as usize) < self.channel_taps - 1);
            self.history[antenna * (self.channel_taps - 1) + col as usize]
        }
    }

    /// Overwrites `θ_i[t]`, `t` in `1..=T`. History is immutable.
    #[inline]
    pub fn set_angle(&mut self, antenna: usize, t: usize, value: f64) {
        debug_assert!(t >= 1 && t <= self.block_length);
        self.angles[antenna * self.block_length + (t - 1)] = value;
    }

    /// `e^{jθ_i[t]}` for `t` in `2−L..=T`.
    #[inline]
    pub fn phasor(&self, antenna: usize, t: isize) -> Complex64 {
        Complex64::from_polar(1.0, self.angle(antenna, t))
    }

    /// Largest consecutive phase increment `max_{i,t} |θ_i[t] − θ_i[t−1]|`
    /// over `t = 1..=T`; the feasibility check compares this to `απ`.
    pub fn max_consecutive_step(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.num_antennas {
            for t in 1..=self.block_length {
                let step = (self.angle(i, t as isize) - self.angle(i, t as isize - 1)).abs();
                worst = worst.max(step);
            }
        }
        worst
    }

    /// Transmit angles reduced to their principal values, `[antenna][t]`.
    pub fn wrapped_angles(&self) -> Vec<f64> {
        self.angles
            .iter()
            .map(|&a| {
                let mut w = Euclid::rem_euclid(&a, &(2.0 * PI));
                if w > PI {
                    w -= 2.0 * PI;
                }
                w
            })
            .collect()
    }
}

/// Per-coordinate update bound `α` and the solve loop controls.
#[derive(Debug, Clone, Copy)]
pub struct PrecoderConfig {
    /// Phase-variation bound in units of π, in `(0, 1]`.
    pub alpha: f64,
    pub max_iterations: usize,
    /// Early stop once the relative objective decrease over a full
    /// iteration falls below this.
    pub rel_tolerance: f64,
}

impl Default for PrecoderConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            max_iterations: 5,
            rel_tolerance: 1e-4,
        }
    }
}

impl PrecoderConfig {
    pub fn with_alpha(alpha: f64) -> Result<Self, ModelError> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(ModelError::OutOfRange(String::from(
                "alpha must lie in (0, 1]",
            )));
        }
        Ok(Self {
            alpha,
            ..Self::default()
        })
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(ModelError::OutOfRange(String::from(
                "alpha must lie in (0, 1]",
            )));
        }
        if self.max_iterations == 0 {
            return Err(ModelError::EmptyDimension("max_iterations"));
        }
        if !(self.rel_tolerance >= 0.0) {
            return Err(ModelError::OutOfRange(String::from(
                "rel_tolerance must be >= 0",
            )));
        }
        Ok(())
    }
}

/// Solver bookkeeping: the M×T residuals `S(k,t)` (equal to the MUI
/// values) and the scalar objective `f = Σ|S|²`.
#[derive(Debug, Clone)]
pub struct ResidualState {
    num_users: usize,
    block_length: usize,
    // Layout [user k][time t-1].
    residuals: Vec<Complex64>,
    objective: f64,
}

impl ResidualState {
    pub(crate) fn from_parts(
        num_users: usize,
        block_length: usize,
        residuals: Vec<Complex64>,
    ) -> Self {
        let objective = residuals.iter().map(|s| s.norm_sqr()).sum();
        Self {
            num_users,
            block_length,
            residuals,
            objective,
        }
    }

    #[inline]
    pub fn residual(&self, user: usize, t: usize) -> Complex64 {
        debug_assert!(user < self.num_users);
        debug_assert!(t >= 1 && t <= self.block_length);
        self.residuals[user * self.block_length + (t - 1)]
    }

    #[inline]
    pub(crate) fn residual_mut(&mut self, user: usize, t: usize) -> &mut Complex64 {
        &mut self.residuals[user * self.block_length + (t - 1)]
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }

    #[inline]
    pub(crate) fn add_objective(&mut self, delta: f64) {
        self.objective += delta;
    }

    /// Re-sums `Σ|S|²`, discarding incremental rounding drift.
    pub fn refresh_objective(&mut self) {
        self.objective = self.residuals.iter().map(|s| s.norm_sqr()).sum();
    }

    /// Residual row `S(k, ·)` for one user, time ascending.
    pub fn user_residuals(&self, user: usize) -> &[Complex64] {
        &self.residuals[user * self.block_length..(user + 1) * self.block_length]
    }
}

/// Noise-free received sample at user `k`, time `t` (`1..=T`), without the
/// `√P_T` scaling:
///
/// `(1/√N) Σ_i Σ_l h_{k,i}[l] e^{jθ_i[t−l]}`.
pub fn noiseless_rx(
    channel: &ChannelRealization,
    schedule: &PhaseSchedule,
    user: usize,
    t: usize,
) -> Complex64 {
    let dims = channel.dims();
    assert!(user < dims.num_users(), "user index out of range");
    assert!(
        t >= 1 && t <= dims.block_length(),
        "time index out of range"
    );
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..dims.num_antennas() {
        for l in 0..dims.channel_taps() {
            acc += channel.tap(user, i, l) * schedule.phasor(i, t as isize - l as isize);
        }
    }
    acc / (dims.num_antennas() as f64).sqrt()
}

/// Multi-user interference at `(k, t)`: the gap between the noise-free
/// received sample and the intended scaled symbol `√E_k u_k[t]`.
pub fn mui(
    channel: &ChannelRealization,
    schedule: &PhaseSchedule,
    frame: &SymbolFrame,
    user: usize,
    t: usize,
) -> Complex64 {
    noiseless_rx(channel, schedule, user, t) - frame.energy(user).sqrt() * frame.symbol(user, t)
}

/// The least-squares objective `f = Σ_{t,k} |mui(k,t)|²`.
pub fn objective(
    channel: &ChannelRealization,
    schedule: &PhaseSchedule,
    frame: &SymbolFrame,
) -> f64 {
    let dims = channel.dims();
    let mut f = 0.0;
    for k in 0..dims.num_users() {
        for t in 1..=dims.block_length() {
            f += mui(channel, schedule, frame, k, t).norm_sqr();
        }
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_instance(
        seed: u64,
        n: usize,
        m: usize,
        l: usize,
        t: usize,
    ) -> (ChannelRealization, PhaseSchedule, SymbolFrame) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = Dimensions::new(n, m, l, t).unwrap();
        let taps = (0..n * m * l)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let channel = ChannelRealization::from_taps(dims, taps).unwrap();
        let history = (0..n * (l - 1)).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let angles = (0..n * t).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let schedule = PhaseSchedule::new(dims, history, angles).unwrap();
        let symbols = (0..m * t)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let energies = (0..m).map(|_| rng.gen_range(0.1..2.0)).collect();
        let frame = SymbolFrame::new(dims, symbols, energies).unwrap();
        (channel, schedule, frame)
    }

    #[test]
    fn zero_channel_gives_zero_rx() {
        let dims = Dimensions::new(3, 2, 2, 4).unwrap();
        let channel =
            ChannelRealization::from_taps(dims, vec![Complex64::new(0.0, 0.0); 3 * 2 * 2]).unwrap();
        let (_, schedule, _) = random_instance(1, 3, 2, 2, 4);
        for k in 0..2 {
            for t in 1..=4 {
                assert_eq!(noiseless_rx(&channel, &schedule, k, t).norm(), 0.0);
            }
        }
    }

    #[test]
    fn identity_case_returns_phasor() {
        let dims = Dimensions::new(1, 1, 1, 1).unwrap();
        let channel = ChannelRealization::from_taps(dims, vec![Complex64::new(1.0, 0.0)]).unwrap();
        let phi = 0.3;
        let schedule = PhaseSchedule::new(dims, vec![], vec![phi]).unwrap();
        let rx = noiseless_rx(&channel, &schedule, 0, 1);
        assert!((rx - Complex64::from_polar(1.0, phi)).norm() < 1e-15);
    }

    // Independent naive oracle: re-derives the double sum with its own
    // index bookkeeping and trig.
    fn naive_rx(
        channel: &ChannelRealization,
        schedule: &PhaseSchedule,
        k: usize,
        t: usize,
    ) -> Complex64 {
        let dims = channel.dims();
        let mut re = 0.0;
        let mut im = 0.0;
        for i in 0..dims.num_antennas() {
            for l in 0..dims.channel_taps() {
                let theta = schedule.angle(i, t as isize - l as isize);
                let h = channel.tap(k, i, l);
                re += h.re * theta.cos() - h.im * theta.sin();
                im += h.re * theta.sin() + h.im * theta.cos();
            }
        }
        let scale = (dims.num_antennas() as f64).sqrt();
        Complex64::new(re / scale, im / scale)
    }

    #[test]
    fn rx_matches_naive_double_loop() {
        let (channel, schedule, _) = random_instance(7, 3, 2, 2, 5);
        for k in 0..2 {
            for t in 1..=5 {
                let a = noiseless_rx(&channel, &schedule, k, t);
                let b = naive_rx(&channel, &schedule, k, t);
                assert!((a - b).norm() <= 1e-12 * b.norm().max(1.0));
            }
        }
    }

    #[test]
    fn mui_zero_channel_is_negated_symbol() {
        let dims = Dimensions::new(2, 2, 1, 3).unwrap();
        let channel =
            ChannelRealization::from_taps(dims, vec![Complex64::new(0.0, 0.0); 4]).unwrap();
        let schedule = PhaseSchedule::zeroed(dims);
        let symbols: Vec<Complex64> = (0..6)
            .map(|i| Complex64::new(i as f64 * 0.1, -(i as f64) * 0.2))
            .collect();
        let frame = SymbolFrame::new(dims, symbols.clone(), vec![1.0; 2]).unwrap();
        for k in 0..2 {
            for t in 1..=3 {
                let v = mui(&channel, &schedule, &frame, k, t);
                assert!((v + frame.symbol(k, t)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn mui_of_exact_solution_is_zero() {
        // N=1, M=1, L=1, h=1: rx = e^{jθ}; pick u to match.
        let dims = Dimensions::new(1, 1, 1, 1).unwrap();
        let channel = ChannelRealization::from_taps(dims, vec![Complex64::new(1.0, 0.0)]).unwrap();
        let schedule = PhaseSchedule::new(dims, vec![], vec![0.7]).unwrap();
        let frame =
            SymbolFrame::new(dims, vec![Complex64::from_polar(1.0, 0.7)], vec![1.0]).unwrap();
        assert!(mui(&channel, &schedule, &frame, 0, 1).norm() < 1e-15);
        assert!(objective(&channel, &schedule, &frame) < 1e-30);
    }

    #[test]
    fn objective_zero_channel_reduces_to_symbol_energy() {
        let dims = Dimensions::new(3, 2, 2, 4).unwrap();
        let channel =
            ChannelRealization::from_taps(dims, vec![Complex64::new(0.0, 0.0); 12]).unwrap();
        let (_, schedule, mut frame) = random_instance(3, 3, 2, 2, 4);
        frame.set_uniform_energy(1.0);
        let expect: f64 = (0..2)
            .flat_map(|k| (1..=4).map(move |t| (k, t)))
            .map(|(k, t)| frame.symbol(k, t).norm_sqr())
            .sum();
        let f = objective(&channel, &schedule, &frame);
        assert!((f - expect).abs() <= 1e-12 * expect);
    }

    #[test]
    fn objective_matches_naive_mui_sum() {
        let (channel, schedule, frame) = random_instance(11, 4, 3, 2, 6);
        let dims = channel.dims();
        let mut expect = 0.0;
        for k in 0..dims.num_users() {
            for t in 1..=dims.block_length() {
                let e = frame.energy(k).sqrt();
                expect += (naive_rx(&channel, &schedule, k, t) - e * frame.symbol(k, t)).norm_sqr();
            }
        }
        let f = objective(&channel, &schedule, &frame);
        assert!((f - expect).abs() <= 1e-12 * expect);
    }

    #[test]
    fn shape_validation() {
        let dims = Dimensions::new(2, 2, 2, 2).unwrap();
        assert!(ChannelRealization::from_taps(dims, vec![Complex64::new(0.0, 0.0); 3]).is_err());
        assert!(SymbolFrame::new(dims, vec![Complex64::new(0.0, 0.0); 4], vec![1.0]).is_err());
        assert!(PhaseSchedule::new(dims, vec![0.0; 3], vec![0.0; 4]).is_err());
        assert!(Dimensions::new(0, 1, 1, 1).is_err());
        assert!(PrecoderConfig::with_alpha(1.5).is_err());
        assert!(PrecoderConfig::with_alpha(0.0).is_err());
    }

    proptest! {
        // rx is invariant under adding 2π·n to any stored angle.
        #[test]
        fn rx_invariant_under_two_pi_shift(seed in 0u64..1000, which in 0usize..6, turns in -3i32..=3) {
            let (channel, mut schedule, _) = random_instance(seed, 2, 2, 2, 3);
            let base = noiseless_rx(&channel, &schedule, 0, 2);
            let i = which % 2;
            let t = (which / 2) + 1;
            let old = schedule.angle(i, t as isize);
            schedule.set_angle(i, t, old + 2.0 * PI * turns as f64);
            let shifted = noiseless_rx(&channel, &schedule, 0, 2);
            prop_assert!((base - shifted).norm() <= 1e-9 * base.norm().max(1.0));
        }

        // Objective is invariant under a common phase rotation of all
        // symbols and all channel taps.
        #[test]
        fn objective_invariant_under_joint_rotation(seed in 0u64..1000, psi in -3.0f64..3.0) {
            let (channel, schedule, frame) = random_instance(seed, 3, 2, 2, 4);
            let dims = channel.dims();
            let rot = Complex64::from_polar(1.0, psi);
            let taps: Vec<Complex64> = (0..dims.num_users()).flat_map(|k| {
                (0..dims.num_antennas()).flat_map(move |i| {
                    (0..dims.channel_taps()).map(move |l| (k, i, l))
                })
            }).map(|(k, i, l)| channel.tap(k, i, l) * rot).collect();
            let channel_rot = ChannelRealization::from_taps(dims, taps).unwrap();
            let symbols: Vec<Complex64> = (0..dims.num_users()).flat_map(|k| {
                (1..=dims.block_length()).map(move |t| (k, t))
            }).map(|(k, t)| frame.symbol(k, t) * rot).collect();
            let energies: Vec<f64> = (0..dims.num_users()).map(|k| frame.energy(k)).collect();
            let frame_rot = SymbolFrame::new(dims, symbols, energies).unwrap();
            let f0 = objective(&channel, &schedule, &frame);
            let f1 = objective(&channel_rot, &schedule, &frame_rot);
            prop_assert!((f0 - f1).abs() <= 1e-9 * f0.max(1.0));
        }

        #[test]
        fn objective_nonnegative(seed in 0u64..1000) {
            let (channel, schedule, frame) = random_instance(seed, 3, 2, 2, 4);
            prop_assert!(objective(&channel, &schedule, &frame) >= 0.0);
        }
    }
}
