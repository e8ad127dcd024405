//! Unit handling. Internally every rate is bits/second and every size is bits.

use thiserror::Error;

/// Bits in one terabyte (decimal, 8 bits per byte).
pub const BITS_PER_TB: f64 = 8.0e12;
pub const BITS_PER_GB: f64 = 8.0e9;
pub const BITS_PER_SECOND_PER_GBPS: f64 = 1.0e9;
pub const SECONDS_PER_HOUR: f64 = 3600.0;

#[derive(Debug, Error, PartialEq)]
pub enum UnitError {
    #[error("unknown unit `{0}`")]
    UnknownUnit(String),
    #[error("invalid number `{0}`")]
    BadNumber(String),
    #[error("missing unit")]
    MissingUnit,
}

/// Multiplier that converts a rate expressed in `unit` to bits/second.
pub fn rate_multiplier(unit: &str) -> Result<f64, UnitError> {
    let m = match unit.to_ascii_lowercase().as_str() {
        "bps" | "b/s" => 1.0,
        "kbps" | "kb/s" => 1.0e3,
        "mbps" | "mb/s" => 1.0e6,
        "gbps" | "gb/s" => 1.0e9,
        "tbps" | "tb/s" => 1.0e12,
        _ => return Err(UnitError::UnknownUnit(unit.to_string())),
    };
    Ok(m)
}

/// Multiplier that converts a size expressed in `unit` to bits.
///
/// Lower-case `b` suffixes are bits, upper-case `B` suffixes are bytes
/// (`Gb` is 10^9 bits, `GB` is 8×10^9 bits).
pub fn size_multiplier(unit: &str) -> Result<f64, UnitError> {
    let m = match unit {
        "bit" | "bits" | "b" => 1.0,
        "Kb" | "kb" => 1.0e3,
        "Mb" => 1.0e6,
        "Gb" => 1.0e9,
        "Tb" => 1.0e12,
        "B" => 8.0,
        "KB" | "kB" => 8.0e3,
        "MB" => 8.0e6,
        "GB" => BITS_PER_GB,
        "TB" => BITS_PER_TB,
        _ => return Err(UnitError::UnknownUnit(unit.to_string())),
    };
    Ok(m)
}

fn split_quantity(text: &str) -> Result<(f64, &str), UnitError> {
    let text = text.trim();
    // The unit is the digit-free alphabetic tail, so `8e12 bits` keeps its
    // exponent.
    let split = text
        .char_indices()
        .find(|&(i, c)| {
            c.is_ascii_alphabetic() && !text[i..].contains(|d: char| d.is_ascii_digit())
        })
        .map(|(i, _)| i)
        .ok_or(UnitError::MissingUnit)?;
    let (num, unit) = text.split_at(split);
    let num = num.trim();
    let value: f64 = num
        .parse()
        .map_err(|_| UnitError::BadNumber(num.to_string()))?;
    Ok((value, unit.trim()))
}

/// Parses strings such as `2.475TB`, `2.475 TB` or `1Gb` into bits.
pub fn parse_size(text: &str) -> Result<f64, UnitError> {
    let (value, unit) = split_quantity(text)?;
    Ok(value * size_multiplier(unit)?)
}

/// Parses strings such as `20Gbps` or `20 Gb/s` into bits/second.
pub fn parse_rate(text: &str) -> Result<f64, UnitError> {
    let (value, unit) = split_quantity(text)?;
    Ok(value * rate_multiplier(unit)?)
}
