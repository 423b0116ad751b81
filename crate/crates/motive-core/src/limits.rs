use crate::error::{Error, Result};

pub const DEFAULT_MAX_ENUM: u128 = 1_000_000;

/// Enumeration budget for brute-force searches, in candidate count.
///
/// Reads MOTIVECALC_MAX_ENUM from the environment; unset or unparsable values
/// fall back to the default.
pub fn max_enumeration() -> u128 {
    std::env::var("MOTIVECALC_MAX_ENUM")
        .ok()
        .and_then(|s| s.trim().parse::<u128>().ok())
        .unwrap_or(DEFAULT_MAX_ENUM)
}

pub fn check_enumeration(size: u128) -> Result<()> {
    let limit = max_enumeration();
    if size > limit {
        return Err(Error::EnumerationTooLarge { size, limit });
    }
    Ok(())
}
