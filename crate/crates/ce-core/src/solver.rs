//! Cyclic coordinate-descent CE precoder.
//!
//! One iteration visits the `NT` coordinates in time-major order (time `q`
//! ascending outer, antenna `r` ascending inner). Each sub-iteration
//! minimizes the objective with respect to the single phase `θ_r[q]`
//! subject to the backward constraint `|θ_r[q] − θ_r[q−1]| ≤ απ`, using
//! the closed-form clamped update, and patches the `M×L` affected
//! residuals in place. Per sub-iteration cost is `O(ML)`, independent of
//! `α`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;


use crate::model::{
    mui, ChannelRealization, Complex64, Dimensions, ModelError, PhaseSchedule, PrecoderConfig,
    ResidualState, SymbolFrame,
};

/// Outcome of one `solve` call.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub final_objective: f64,
    /// Objective value after each completed iteration.
    pub objective_per_iteration: Vec<f64>,
    pub iterations_run: usize,
    /// True when the objective never increased (beyond rounding slack)
    /// across any single sub-iteration.
    pub sub_iteration_monotone: bool,
}

/// Principal phase in `(−π, π]`.
#[inline]
fn principal_arg(z: Complex64) -> f64 {
    let c = z.im.atan2(z.re);
    if c <= -PI {
        PI
    } else {
        c
    }
}

/// How the clamped step is computed. `Exact` is the shipping rule; the
/// corrupted variant exists only as a negative control for the selfcheck
/// monotonicity suite.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateRule {
    Exact,
    /// Negates the clamp branches; breaks descent on purpose.
    FlippedClamp,
}

/// The piecewise step of the per-coordinate minimizer: for the principal
/// phase `c` of the local linear term,
/// `ω = απ` on `[−π, −απ)`, `ω = −c` on `[−απ, απ)`, `ω = −απ` on `[απ, π]`.
#[inline]
fn clamp_step(c: f64, alpha: f64, rule: UpdateRule) -> f64 {
    let a = alpha * PI;
    let step = if c < -a {
        a
    } else if c < a {
        -c
    } else {
        -a
    };
    match rule {
        UpdateRule::Exact => step,
        UpdateRule::FlippedClamp => -step,
    }
}

/// Maximizer of `cos(ω + c)` over `ω ∈ [lo, hi]` (a subset of `[−π, π]`
/// of width < 2π). Returns an exact optimum `−c + 2πk` when one lies in
/// the interval, otherwise the better endpoint (ties to `lo`). With
/// `[lo, hi] = [−απ, απ]` this reproduces [`clamp_step`] bit-for-bit.
#[inline]
fn step_on_interval(c: f64, lo: f64, hi: f64) -> f64 {
    for k in [0.0, -1.0, 1.0] {
        let w = -c + 2.0 * PI * k;
        if w >= lo && w <= hi {
            return w;
        }
    }
    if (lo + c).cos() >= (hi + c).cos() {
        lo
    } else {
        hi
    }
}

/// `acc = Σ_{t=q..tmax} Σ_k h_{k,r}[t−q]·S*(k,t)` and `gain = Σ |h|²`
/// over the same window.
#[inline]
fn local_sums(
    channel: &ChannelRealization,
    state: &ResidualState,
    r: usize,
    q: usize,
) -> (Complex64, f64) {
    let dims = channel.dims();
    let t_max = (q + dims.channel_taps() - 1).min(dims.block_length());
    let mut acc = Complex64::new(0.0, 0.0);
    let mut gain = 0.0;
    for k in 0..dims.num_users() {
        for t in q..=t_max {
            let h = channel.tap(k, r, t - q);
            acc += h * state.residual(k, t).conj();
            gain += h.norm_sqr();
        }
    }
    (acc, gain)
}

/// Principal phase `c` of the local linear term
/// `ζ = −e^{jθ_r[q−1]}·(Σ h S* − (Σ|h|²)·e^{−jθ_r[q]}/√N)`; the residuals
/// `S(k,t)` still contain the `(r, t−q)` contribution, which the gain part
/// removes. The window objective restricted to `θ_r[q] = θ_prev + ω` is
/// `const − (2|ζ|/√N)·cos(ω + c)`. Returns `None` when `ζ = 0` (objective
/// flat in this coordinate).
#[inline]
fn local_phase(
    acc: Complex64,
    gain: f64,
    phasor_q: Complex64,
    phasor_prev: Complex64,
    inv_sqrt_n: f64,
) -> Option<f64> {
    let zeta = -phasor_prev * (acc - phasor_q.conj() * (gain * inv_sqrt_n));
    if zeta.re == 0.0 && zeta.im == 0.0 {
        None
    } else {
        Some(principal_arg(zeta))
    }
}

/// Patches the window residuals for the move `e^{jθ_old} → p_new` on
/// antenna `r` at time `q` and returns the objective change.
#[inline]
fn apply_with_phasors(
    channel: &ChannelRealization,
    state: &mut ResidualState,
    r: usize,
    q: usize,
    p_new: Complex64,
    p_old: Complex64,
) -> f64 {
    let dims = channel.dims();
    let t_max = (q + dims.channel_taps() - 1).min(dims.block_length());
    let scale = (p_new - p_old) / (dims.num_antennas() as f64).sqrt();
    let mut delta = 0.0;
    for k in 0..dims.num_users() {
        for t in q..=t_max {
            let s = state.residual(k, t);
            let s_new = s + channel.tap(k, r, t - q) * scale;
            delta += s_new.norm_sqr() - s.norm_sqr();
            *state.residual_mut(k, t) = s_new;
        }
    }
    state.add_objective(delta);
    delta
}

/// Constant extension of the boundary angles: `θ_i[t] = θ_i[0]` for all
/// `t = 1..=T`, which has zero increments and is feasible for every `α`.
pub fn init_schedule(dims: Dimensions, history: &[f64]) -> Result<PhaseSchedule, ModelError> {
    let n = dims.num_antennas();
    let cols = dims.channel_taps() - 1;
    if history.len() != n * cols {
        return Err(ModelError::ShapeMismatch {
            what: "phase history",
            expected: n * cols,
            got: history.len(),
        });
    }
    let mut angles = vec![0.0; n * dims.block_length()];
    for i in 0..n {
        // θ_i[0] is the last history column, or 0 when L = 1.
        let theta0 = if cols == 0 {
            0.0
        } else {
            history[i * cols + (cols - 1)]
        };
        for t in 0..dims.block_length() {
            angles[i * dims.block_length() + t] = theta0;
        }
    }
    PhaseSchedule::new(dims, history.to_vec(), angles)
}

/// Residual bookkeeping seeded from scratch: `S(k,t) = mui(k,t)` for all
/// `(k,t)` and `f = Σ|S|²`.
pub fn init_residuals(
    channel: &ChannelRealization,
    schedule: &PhaseSchedule,
    frame: &SymbolFrame,
) -> ResidualState {
    let dims = channel.dims();
    let n = dims.num_antennas();
    let l = dims.channel_taps();
    let t_len = dims.block_length();
    // Phasors per antenna over t = 2-L..=T, computed once.
    let width = t_len + l - 1;
    let mut phasors = vec![Complex64::new(0.0, 0.0); n * width];
    for i in 0..n {
        for (col, p) in phasors[i * width..(i + 1) * width].iter_mut().enumerate() {
            let t = col as isize - (l as isize - 2).max(0);
            // With L = 1 the window starts at t = 1.
            let t = if l == 1 { col as isize + 1 } else { t };
            *p = schedule.phasor(i, t);
        }
    }
    let col_of = |t: isize| -> usize {
        if l == 1 {
            (t - 1) as usize
        } else {
            (t + l as isize - 2) as usize
        }
    };
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();
    let mut residuals = vec![Complex64::new(0.0, 0.0); dims.num_users() * t_len];
    for k in 0..dims.num_users() {
        let root_energy = frame.energy(k).sqrt();
        for t in 1..=t_len {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..n {
                let row = &phasors[i * width..(i + 1) * width];
                for lag in 0..l {
                    acc += channel.tap(k, i, lag) * row[col_of(t as isize - lag as isize)];
                }
            }
            residuals[k * t_len + (t - 1)] = acc * inv_sqrt_n - root_energy * frame.symbol(k, t);
        }
    }
    ResidualState::from_parts(dims.num_users(), t_len, residuals)
}

/// Closed-form constrained minimizer of the objective with respect to the
/// single coordinate `θ_r[q]` (antenna `r` zero-based, time `q` in
/// `1..=T`), holding everything else fixed. Returns the new angle;
/// the schedule and residuals are untouched (see [`apply_update`]).
pub fn coordinate_update(
    r: usize,
    q: usize,
    channel: &ChannelRealization,
    schedule: &PhaseSchedule,
    state: &ResidualState,
    config: &PrecoderConfig,
) -> f64 {
    coordinate_update_with_rule(r, q, channel, schedule, state, config, UpdateRule::Exact)
}

#[doc(hidden)]
pub fn coordinate_update_with_rule(
    r: usize,
    q: usize,
    channel: &ChannelRealization,
    schedule: &PhaseSchedule,
    state: &ResidualState,
    config: &PrecoderConfig,
    rule: UpdateRule,
) -> f64 {
    let dims = channel.dims();
    assert!(r < dims.num_antennas(), "antenna index out of range");
    assert!(q >= 1 && q <= dims.block_length(), "time index out of range");
    let (acc, gain) = local_sums(channel, state, r, q);
    let theta_cur = schedule.angle(r, q as isize);
    let theta_prev = schedule.angle(r, q as isize - 1);
    match local_phase(
        acc,
        gain,
        Complex64::from_polar(1.0, theta_cur),
        Complex64::from_polar(1.0, theta_prev),
        1.0 / (dims.num_antennas() as f64).sqrt(),
    ) {
        // Objective flat over the admissible arc; keep the current angle.
        None => theta_cur,
        Some(c) => theta_prev + clamp_step(c, config.alpha, rule),
    }
}

/// Commits an updated angle: patches the `M × min(L, T−q+1)` affected
/// residuals, the objective, and the schedule entry. Cost `O(ML)`.
pub fn apply_update(
    r: usize,
    q: usize,
    new_angle: f64,
    channel: &ChannelRealization,
    schedule: &mut PhaseSchedule,
    state: &mut ResidualState,
) {
    let old = schedule.angle(r, q as isize);
    let p_old = Complex64::from_polar(1.0, old);
    let p_new = Complex64::from_polar(1.0, new_angle);
    apply_with_phasors(channel, state, r, q, p_new, p_old);
    schedule.set_angle(r, q, new_angle);
}

/// Runs the full coordinate-descent precoder from the constant extension
/// of `history` (`N×(L−1)` boundary angles, time ascending per antenna).
///
/// Each sub-iteration optimizes one `θ_r[q]` over the intersection of the
/// backward arc `|θ − θ_r[q−1]| ≤ απ` and, for `q < T`, the forward arc
/// `|θ_r[q+1] − θ| ≤ απ` around the current neighbor values. The start
/// schedule has zero increments, so the current point is feasible at every
/// sub-iteration; the objective is therefore non-increasing per
/// sub-iteration and the whole schedule satisfies `|Δθ| ≤ απ` at all
/// times, not only at pass boundaries. Whenever the forward arc is
/// inactive the step equals the single-constraint clamped update of
/// [`coordinate_update`].
///
/// Stops after `config.max_iterations` full passes, or earlier once the
/// relative objective decrease over a pass falls below
/// `config.rel_tolerance`.
pub fn solve(
    channel: &ChannelRealization,
    frame: &SymbolFrame,
    config: &PrecoderConfig,
    history: &[f64],
) -> Result<(PhaseSchedule, SolveReport), ModelError> {
    config.validate()?;
    let dims = channel.dims();
    let mut schedule = init_schedule(dims, history)?;
    let mut state = init_residuals(channel, &schedule, frame);

    let n = dims.num_antennas();
    let t_len = dims.block_length();
    let l = dims.channel_taps();
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();

    // Phasor cache for t = 1..=T (one sincos per accepted update instead
    // of several per sub-iteration). History phasors are fixed.
    let mut phasors = vec![Complex64::new(0.0, 0.0); n * t_len];
    for i in 0..n {
        for t in 1..=t_len {
            phasors[i * t_len + (t - 1)] = schedule.phasor(i, t as isize);
        }
    }
    let hist_cols = l - 1;
    let mut hist_phasors = vec![Complex64::new(1.0, 0.0); n * hist_cols.max(1)];
    for i in 0..n {
        if hist_cols == 0 {
            hist_phasors[i] = Complex64::new(1.0, 0.0); // e^{j·0}
        } else {
            for c in 0..hist_cols {
                hist_phasors[i * hist_cols + c] =
                    schedule.phasor(i, c as isize - (l as isize - 2));
            }
        }
    }

    let mut monotone = true;
    let mut objective_per_iteration = Vec::with_capacity(config.max_iterations);
    let mut prev_objective = state.objective();
    let mut iterations_run = 0;

    for _ in 0..config.max_iterations {
        for q in 1..=t_len {
            for r in 0..n {
                let pq = phasors[r * t_len + (q - 1)];
                let (theta_prev, pprev) = if q >= 2 {
                    (
                        schedule.angle(r, q as isize - 1),
                        phasors[r * t_len + (q - 2)],
                    )
                } else if hist_cols == 0 {
                    (0.0, Complex64::new(1.0, 0.0))
                } else {
                    (
                        schedule.angle(r, 0),
                        hist_phasors[r * hist_cols + (hist_cols - 1)],
                    )
                };
                let theta_cur = schedule.angle(r, q as isize);
                let (acc, gain) = local_sums(channel, &state, r, q);
                let new_angle = match local_phase(acc, gain, pq, pprev, inv_sqrt_n) {
                    None => theta_cur,
                    Some(c) => {
                        let bound = config.alpha * PI;
                        let (mut lo, mut hi) = (-bound, bound);
                        if q < t_len {
                            let d = schedule.angle(r, q as isize + 1) - theta_prev;
                            lo = lo.max(d - bound);
                            hi = hi.min(d + bound);
                        }
                        theta_prev + step_on_interval(c, lo, hi)
                    }
                };
                let p_new = Complex64::from_polar(1.0, new_angle);
                let before = state.objective();
                let delta = apply_with_phasors(channel, &mut state, r, q, p_new, pq);
                if delta > 1e-12 * before.max(1.0) {
                    monotone = false;
                }
                schedule.set_angle(r, q, new_angle);
                phasors[r * t_len + (q - 1)] = p_new;
            }
        }
        iterations_run += 1;
        state.refresh_objective();
        let cur = state.objective();
        objective_per_iteration.push(cur);
        let decrease = prev_objective - cur;
        if decrease <= config.rel_tolerance * prev_objective.max(f64::MIN_POSITIVE) {
            prev_objective = cur;
            break;
        }
        prev_objective = cur;
    }

    let report = SolveReport {
        final_objective: prev_objective,
        objective_per_iteration,
        iterations_run,
        sub_iteration_monotone: monotone,
    };
    Ok((schedule, report))
}

/// Consistency check used by tests and the selfcheck suite: maximum
/// relative gap between the maintained residuals/objective and a
/// from-scratch recomputation.
pub fn residual_drift(
    channel: &ChannelRealization,
    schedule: &PhaseSchedule,
    frame: &SymbolFrame,
    state: &ResidualState,
) -> f64 {
    let dims = channel.dims();
    let mut worst = 0.0f64;
    let mut fresh_objective = 0.0;
    for k in 0..dims.num_users() {
        for t in 1..=dims.block_length() {
            let fresh = mui(channel, schedule, frame, k, t);
            fresh_objective += fresh.norm_sqr();
            let gap = (fresh - state.residual(k, t)).norm() / fresh.norm().max(1.0);
            worst = worst.max(gap);
        }
    }
    let obj_gap = (fresh_objective - state.objective()).abs() / fresh_objective.max(1.0);
    worst.max(obj_gap)
}
