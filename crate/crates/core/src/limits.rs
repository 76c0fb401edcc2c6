//! Size caps for exhaustive enumeration.

use crate::error::{Error, Result};

pub const DEFAULT_MAX_INTERVENTIONS: u128 = 10_000_000;
pub const DEFAULT_MAX_CONTEXTS: u128 = 1_000_000;
pub const DEFAULT_MAX_PARTITION_VARIABLES: usize = 10;

pub const ENV_MAX_INTERVENTIONS: &str = "CAK_MAX_INTERVENTIONS";
pub const ENV_MAX_CONTEXTS: &str = "CAK_MAX_CONTEXTS";

/// Caps applied before any exhaustive scan. `max_contexts` also bounds
/// endogenous state spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_interventions: u128,
    pub max_contexts: u128,
    pub max_partition_variables: usize,
    /// Re-derive every induced intervention by brute force over all high
    /// candidates and fail loudly on disagreement.
    pub cross_check: bool,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_interventions: DEFAULT_MAX_INTERVENTIONS,
            max_contexts: DEFAULT_MAX_CONTEXTS,
            max_partition_variables: DEFAULT_MAX_PARTITION_VARIABLES,
            cross_check: false,
        }
    }
}

impl Limits {
    /// Defaults overridden by `CAK_MAX_INTERVENTIONS` / `CAK_MAX_CONTEXTS`.
    pub fn from_env() -> Result<Self> {
        let mut limits = Limits::default();
        if let Some(v) = read_env(ENV_MAX_INTERVENTIONS)? {
            limits.max_interventions = v;
        }
        if let Some(v) = read_env(ENV_MAX_CONTEXTS)? {
            limits.max_contexts = v;
        }
        Ok(limits)
    }

    pub fn with_cross_check(mut self) -> Self {
        self.cross_check = true;
        self
    }

    pub(crate) fn check_assignments(&self, what: &str, size: Option<u128>) -> Result<usize> {
        check(what, size, self.max_contexts)
    }

    pub(crate) fn check_interventions(&self, what: &str, size: Option<u128>) -> Result<usize> {
        check(what, size, self.max_interventions)
    }
}

fn check(what: &str, size: Option<u128>, cap: u128) -> Result<usize> {
    match size {
        Some(n) if n <= cap => Ok(n as usize),
        Some(n) => Err(Error::SizeCap { what: what.to_string(), size: n, cap }),
        None => Err(Error::SizeCap { what: what.to_string(), size: u128::MAX, cap }),
    }
}

fn read_env(key: &str) -> Result<Option<u128>> {
    match std::env::var(key) {
        Ok(raw) => raw
            .trim()
            .parse::<u128>()
            .map(Some)
            .map_err(|_| Error::input(format!("{key} must be a non-negative integer, got `{raw}`"))),
        Err(_) => Ok(None),
    }
}
