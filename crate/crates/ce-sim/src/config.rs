//! Flat `key=value` experiment configuration: one assignment per line,
//! `#` comments, comma-separated sweep lists. No structured-format
//! dependency, trivially diffable, bit-stable.

use std::collections::HashSet;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected key=value, got {text:?}")]
    Malformed { line: usize, text: String },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("duplicate key {0:?}")]
    DuplicateKey(String),
    #[error("key {key:?}: bad value {value:?} ({why})")]
    BadValue {
        key: &'static str,
        value: String,
        why: &'static str,
    },
    #[error("missing required key {0:?}")]
    MissingKey(&'static str),
    #[error("exactly one of target_rate and snr_db must be set")]
    ModeConflict,
}

/// What the sweep evaluates at each `(N, α)` point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepMode {
    /// Bisect for the minimum SNR achieving this rate (bpcu).
    MinPowerFor { target_rate: f64 },
    /// Report the energy-optimized rate at this fixed SNR (dB).
    RateAt { snr_db: f64 },
}

/// A validated experiment: sweep lists for `N` and `α`, fixed `M`, `L`,
/// `T`, the Monte-Carlo sizes, the mode, the master seed, and the output
/// path.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub antennas: Vec<usize>,
    pub alphas: Vec<f64>,
    pub num_users: usize,
    pub channel_taps: usize,
    pub block_length: usize,
    pub frames_per_channel: usize,
    pub num_channels: usize,
    pub mode: SweepMode,
    pub master_seed: u64,
    pub output: PathBuf,
}

const KEYS: &[&str] = &[
    "N", "M", "L", "T", "alpha", "target_rate", "snr_db", "frames", "channels", "seed", "out",
];

fn split_list(key: &'static str, value: &str) -> Result<Vec<String>, ConfigError> {
    let items: Vec<String> = value
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        return Err(ConfigError::BadValue {
            key,
            value: value.to_string(),
            why: "empty list",
        });
    }
    Ok(items)
}

fn parse_usize(key: &'static str, value: &str) -> Result<usize, ConfigError> {
    let n: usize = value.parse().map_err(|_| ConfigError::BadValue {
        key,
        value: value.to_string(),
        why: "not a positive integer",
    })?;
    if n == 0 {
        return Err(ConfigError::BadValue {
            key,
            value: value.to_string(),
            why: "must be >= 1",
        });
    }
    Ok(n)
}

fn parse_f64(key: &'static str, value: &str) -> Result<f64, ConfigError> {
    let x: f64 = value.parse().map_err(|_| ConfigError::BadValue {
        key,
        value: value.to_string(),
        why: "not a number",
    })?;
    if !x.is_finite() {
        return Err(ConfigError::BadValue {
            key,
            value: value.to_string(),
            why: "must be finite",
        });
    }
    Ok(x)
}

pub fn parse_config(text: &str) -> Result<ExperimentSpec, ConfigError> {
    let mut seen: HashSet<String> = HashSet::new();
    let mut antennas: Option<Vec<usize>> = None;
    let mut alphas: Option<Vec<f64>> = None;
    let mut num_users = None;
    let mut channel_taps = None;
    let mut block_length = None;
    let mut frames = None;
    let mut channels = None;
    let mut target_rate = None;
    let mut snr_db = None;
    let mut seed = None;
    let mut out = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Malformed {
            line,
            text: raw.to_string(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey(key.to_string()));
        }
        if !seen.insert(key.to_string()) {
            return Err(ConfigError::DuplicateKey(key.to_string()));
        }
        match key {
            "N" => {
                let list = split_list("N", value)?
                    .iter()
                    .map(|v| parse_usize("N", v))
                    .collect::<Result<Vec<_>, _>>()?;
                antennas = Some(list);
            }
            "alpha" => {
                let list = split_list("alpha", value)?
                    .iter()
                    .map(|v| {
                        let a = parse_f64("alpha", v)?;
                        if !(a > 0.0 && a <= 1.0) {
                            return Err(ConfigError::BadValue {
                                key: "alpha",
                                value: v.clone(),
                                why: "alpha out of (0,1]",
                            });
                        }
                        Ok(a)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                alphas = Some(list);
            }
            "M" => num_users = Some(parse_usize("M", value)?),
            "L" => channel_taps = Some(parse_usize("L", value)?),
            "T" => block_length = Some(parse_usize("T", value)?),
            "frames" => frames = Some(parse_usize("frames", value)?),
            "channels" => channels = Some(parse_usize("channels", value)?),
            "target_rate" => {
                let r = parse_f64("target_rate", value)?;
                if r <= 0.0 {
                    return Err(ConfigError::BadValue {
                        key: "target_rate",
                        value: value.to_string(),
                        why: "must be > 0",
                    });
                }
                target_rate = Some(r);
            }
            "snr_db" => snr_db = Some(parse_f64("snr_db", value)?),
            "seed" => {
                seed = Some(value.parse::<u64>().map_err(|_| ConfigError::BadValue {
                    key: "seed",
                    value: value.to_string(),
                    why: "not a 64-bit unsigned integer",
                })?);
            }
            "out" => out = Some(PathBuf::from(value)),
            _ => unreachable!("key list is closed"),
        }
    }

    let mode = match (target_rate, snr_db) {
        (Some(target_rate), None) => SweepMode::MinPowerFor { target_rate },
        (None, Some(snr_db)) => SweepMode::RateAt { snr_db },
        _ => return Err(ConfigError::ModeConflict),
    };
    let block_length = block_length.ok_or(ConfigError::MissingKey("T"))?;
    Ok(ExperimentSpec {
        antennas: antennas.ok_or(ConfigError::MissingKey("N"))?,
        alphas: alphas.ok_or(ConfigError::MissingKey("alpha"))?,
        num_users: num_users.ok_or(ConfigError::MissingKey("M"))?,
        channel_taps: channel_taps.ok_or(ConfigError::MissingKey("L"))?,
        block_length,
        frames_per_channel: frames.unwrap_or_else(|| 200.max(4 * block_length)),
        num_channels: channels.unwrap_or(50),
        mode,
        master_seed: seed.ok_or(ConfigError::MissingKey("seed"))?,
        output: out.ok_or(ConfigError::MissingKey("out"))?,
    })
}
