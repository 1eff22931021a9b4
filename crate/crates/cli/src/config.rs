//! Settings shared by all subcommands, resolved as
//! flag > environment variable > config file > built-in default.

use std::collections::hash_map::RandomState;
use std::hash::{BuildHasher, Hasher};
use std::path::Path;

use pdbs::detectors::{DEFAULT_ENUM_CAP, DEFAULT_SCAN_CAP};
use pdbs::{DetectOptions, Seed, DEFAULT_ROOT};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Optional TOML file. Every key may be omitted.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<SeedSpec>,
    pub threads: Option<usize>,
    // TOML integers are 64-bit.
    pub scan_cap: Option<u64>,
    pub enum_cap: Option<u64>,
    pub greedy_restarts: Option<usize>,
    pub trials: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    Fixed(u64),
    Named(String),
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::parse(format!("config {}: {e}", path.display())))
    }
}

/// Parses `--seed`: a decimal or `0x` hex integer, or `random`.
pub fn parse_seed(text: &str) -> Result<Seed, CliError> {
    let text = text.trim();
    if text == "random" {
        let mut h = RandomState::new().build_hasher();
        h.write_u64(std::process::id() as u64);
        return Ok(Seed::new(h.finish()));
    }
    let parsed = match text.strip_prefix("0x") {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => text.parse(),
    };
    parsed
        .map(Seed::new)
        .map_err(|_| CliError::usage(format!("invalid seed `{text}`: expected an integer or `random`")))
}

/// Fully resolved settings; echoed into every output except `threads`,
/// which cannot change results.
#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub seed: u64,
    #[serde(skip)]
    pub threads: Option<usize>,
    pub scan_cap: u128,
    pub enum_cap: u128,
    pub greedy_restarts: usize,
    #[serde(skip)]
    pub trials: Option<u64>,
}

pub struct Overrides {
    pub seed: Option<String>,
    pub threads: Option<usize>,
    pub scan_cap: Option<u128>,
    pub enum_cap: Option<u128>,
    pub greedy_restarts: Option<usize>,
}

fn env_cap(name: &str) -> Result<Option<u128>, CliError> {
    match std::env::var(name) {
        Ok(v) => {
            v.trim().parse().map(Some).map_err(|_| {
                CliError::usage(format!("environment variable {name}=`{v}` is not a non-negative integer"))
            })
        }
        Err(_) => Ok(None),
    }
}

impl Settings {
    pub fn resolve(flags: Overrides, file: FileConfig) -> Result<Settings, CliError> {
        let seed = match (flags.seed, file.seed) {
            (Some(s), _) => parse_seed(&s)?,
            (None, Some(SeedSpec::Fixed(v))) => Seed::new(v),
            (None, Some(SeedSpec::Named(s))) => parse_seed(&s)?,
            (None, None) => Seed::new(DEFAULT_ROOT),
        };
        let scan_cap = match flags.scan_cap {
            Some(v) => v,
            None => env_cap("SCAN_CAP")?.or(file.scan_cap.map(u128::from)).unwrap_or(DEFAULT_SCAN_CAP),
        };
        let enum_cap = match flags.enum_cap {
            Some(v) => v,
            None => env_cap("ENUM_CAP")?.or(file.enum_cap.map(u128::from)).unwrap_or(DEFAULT_ENUM_CAP),
        };
        let defaults = DetectOptions::default();
        Ok(Settings {
            seed: seed.root,
            threads: flags.threads.or(file.threads),
            scan_cap,
            enum_cap,
            greedy_restarts: flags.greedy_restarts.or(file.greedy_restarts).unwrap_or(defaults.greedy_restarts),
            trials: file.trials,
        })
    }

    pub fn seed(&self) -> Seed {
        Seed::new(self.seed)
    }

    pub fn detect_options(&self) -> DetectOptions {
        DetectOptions {
            scan_cap: self.scan_cap,
            enum_cap: self.enum_cap,
            greedy_restarts: self.greedy_restarts,
            greedy_seed: self.seed().derive("greedy", 0),
        }
    }
}
