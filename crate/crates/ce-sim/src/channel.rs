//! Seeded generation of channel realizations and symbol frames.
//!
//! All randomness is counter-based: a draw is addressed by
//! `(master_seed, stream_id)` and never by execution order, so parallel
//! Monte Carlo reproduces bit-identically at any parallelism degree.

use std::f64::consts::PI;

use ce_core::{ChannelRealization, Complex64, Dimensions, SymbolFrame};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Address of one independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    /// Deterministic generator for this stream. The key is a splitmix64
    /// expansion of the master seed; the stream id selects the ChaCha
    /// stream, so streams with a common master seed are independent.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut state = self.master_seed;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream_id);
        rng
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream-id layout for the Monte-Carlo task enumeration. Tags keep
/// channel draws, per-(channel, frame) symbol draws and ad-hoc streams
/// disjoint.
pub mod streams {
    /// Channel realization `c`.
    pub fn channel(c: usize) -> u64 {
        (1u64 << 56) | c as u64
    }

    /// Symbol frame `f` under channel realization `c`.
    pub fn frame(c: usize, f: usize) -> u64 {
        (2u64 << 56) | ((c as u64) << 32) | f as u64
    }
}

/// One circularly-symmetric complex Gaussian with `E[|z|²] = 1`
/// (Box-Muller; consumes exactly two `f64` draws).
fn standard_complex_gaussian<R: RngCore>(rng: &mut R) -> Complex64 {
    let u1: f64 = rng.gen();
    let u2: f64 = rng.gen();
    // 1 - u1 lies in (0, 1], keeping the log finite.
    let radius = (-(1.0 - u1).ln()).sqrt();
    let phase = 2.0 * PI * u2;
    Complex64::from_polar(radius, phase)
}

/// i.i.d. Rayleigh-faded taps with a uniform power delay profile:
/// each `h_{k,i}[l]` is complex Gaussian with mean 0 and variance `1/L`
/// (so the total per-link energy `Σ_l E[|h_l|²]` is 1).
pub fn sample_channel(dims: Dimensions, seed: &SeedSpec) -> ChannelRealization {
    let mut rng = seed.rng();
    let scale = (1.0 / dims.channel_taps() as f64).sqrt();
    let count = dims.num_users() * dims.num_antennas() * dims.channel_taps();
    let taps = (0..count)
        .map(|_| standard_complex_gaussian(&mut rng) * scale)
        .collect();
    ChannelRealization::from_taps(dims, taps).expect("generated taps are finite and well-shaped")
}

/// i.i.d. unit-variance complex Gaussian information symbols. Energies
/// are initialized to 1; callers rescale via
/// [`SymbolFrame::set_uniform_energy`].
pub fn sample_symbols(dims: Dimensions, seed: &SeedSpec) -> SymbolFrame {
    let mut rng = seed.rng();
    let count = dims.num_users() * dims.block_length();
    let symbols = (0..count)
        .map(|_| standard_complex_gaussian(&mut rng))
        .collect();
    SymbolFrame::new(dims, symbols, vec![1.0; dims.num_users()])
        .expect("generated symbols are finite and well-shaped")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_is_bit_identical() {
        let dims = Dimensions::new(4, 3, 2, 8).unwrap();
        let seed = SeedSpec::new(42, streams::channel(7));
        let a = sample_channel(dims, &seed);
        let b = sample_channel(dims, &seed);
        for k in 0..3 {
            for i in 0..4 {
                for l in 0..2 {
                    assert_eq!(a.tap(k, i, l), b.tap(k, i, l));
                }
            }
        }
        let sa = sample_symbols(dims, &SeedSpec::new(42, streams::frame(0, 3)));
        let sb = sample_symbols(dims, &SeedSpec::new(42, streams::frame(0, 3)));
        for k in 0..3 {
            for t in 1..=8 {
                assert_eq!(sa.symbol(k, t), sb.symbol(k, t));
            }
        }
    }

    #[test]
    fn distinct_streams_differ() {
        let dims = Dimensions::new(2, 2, 1, 4).unwrap();
        let a = sample_channel(dims, &SeedSpec::new(1, streams::channel(0)));
        let b = sample_channel(dims, &SeedSpec::new(1, streams::channel(1)));
        assert_ne!(a.tap(0, 0, 0), b.tap(0, 0, 0));
    }

    fn tap_population(l: usize, draws: usize) -> Vec<Complex64> {
        let dims = Dimensions::new(1, 1, l, 1).unwrap();
        let mut out = Vec::with_capacity(draws * l);
        for c in 0..draws {
            let h = sample_channel(dims, &SeedSpec::new(7, streams::channel(c)));
            for lag in 0..l {
                out.push(h.tap(0, 0, lag));
            }
        }
        out
    }

    #[test]
    fn tap_variance_matches_power_delay_profile() {
        // L=1: per-tap variance 1. L=4: per-tap 0.25, total ~1.
        for (l, want) in [(1usize, 1.0f64), (4, 0.25)] {
            let draws = 100_000 / l;
            let taps = tap_population(l, draws);
            let mean_sq: f64 = taps.iter().map(|h| h.norm_sqr()).sum::<f64>() / taps.len() as f64;
            // |h|² is exponential with mean `want`, so SE = want/sqrt(n).
            let se = want / (taps.len() as f64).sqrt();
            assert!(
                (mean_sq - want).abs() < 3.0 * se,
                "L={l}: E|h|²={mean_sq}, want {want} ± {}",
                3.0 * se
            );
        }
        let total: f64 = {
            let taps = tap_population(4, 25_000);
            taps.iter().map(|h| h.norm_sqr()).sum::<f64>() / 25_000.0
        };
        assert!((total - 1.0).abs() < 0.02);
    }

    #[test]
    fn symbol_moments() {
        let dims = Dimensions::new(1, 1, 1, 100).unwrap();
        let mut sum = Complex64::new(0.0, 0.0);
        let mut sum_sq = 0.0;
        let n = 100_000usize;
        for c in 0..n / 100 {
            let f = sample_symbols(dims, &SeedSpec::new(3, streams::frame(c, 0)));
            for t in 1..=100 {
                sum += f.symbol(0, t);
                sum_sq += f.symbol(0, t).norm_sqr();
            }
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64;
        let se = 1.0 / (n as f64).sqrt();
        assert!(mean.norm() < 3.0 * se, "mean {mean}");
        assert!((var - 1.0).abs() < 3.0 * se, "var {var}");
    }

    #[test]
    fn tap_phase_is_uniform() {
        // Chi-square over 16 phase bins at the 1e-3 level: with 15 dof the
        // critical value is 37.70.
        let taps = tap_population(1, 100_000);
        let mut bins = [0usize; 16];
        for h in &taps {
            let mut a = h.arg();
            if a < 0.0 {
                a += 2.0 * PI;
            }
            let b = ((a / (2.0 * PI) * 16.0) as usize).min(15);
            bins[b] += 1;
        }
        let expect = taps.len() as f64 / 16.0;
        let chi2: f64 = bins
            .iter()
            .map(|&o| (o as f64 - expect).powi(2) / expect)
            .sum();
        assert!(chi2 < 37.70, "chi2 {chi2}");
    }

    #[test]
    fn cross_correlation_between_distinct_taps_is_small() {
        let draws = 100_000;
        let dims = Dimensions::new(2, 1, 2, 1).unwrap();
        let mut c01 = Complex64::new(0.0, 0.0); // distinct taps, same link
        let mut c_ant = Complex64::new(0.0, 0.0); // same tap, distinct antennas
        for c in 0..draws {
            let h = sample_channel(dims, &SeedSpec::new(11, streams::channel(c)));
            c01 += h.tap(0, 0, 0) * h.tap(0, 0, 1).conj();
            c_ant += h.tap(0, 0, 0) * h.tap(0, 1, 0).conj();
        }
        // Per-tap variance is 1/L = 1/2, so normalize by that.
        let bound = 4.0 / (draws as f64).sqrt();
        assert!((c01 / draws as f64).norm() / 0.5 < bound);
        assert!((c_ant / draws as f64).norm() / 0.5 < bound);
    }
}
