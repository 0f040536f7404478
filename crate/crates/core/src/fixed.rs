//! Decimal fixed-point parsing and formatting shared by trust scores and
//! coefficients.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FixedError {
    #[error("empty number")]
    Empty,
    #[error("negative value `{0}`")]
    Negative(String),
    #[error("malformed number `{0}`")]
    Malformed(String),
    #[error("`{0}` has more than {1} decimal digits")]
    TooPrecise(String, u32),
    #[error("`{0}` is too large")]
    Overflow(String),
}

/// Parses a non-negative decimal string into an integer count of
/// `10^-decimals` units. Accepts `55`, `55.5`, `55.50`, `.5`, `+1`.
pub fn parse_fixed(input: &str, decimals: u32) -> Result<u64, FixedError> {
    let s = input.trim();
    if s.is_empty() {
        return Err(FixedError::Empty);
    }
    if s.starts_with('-') {
        return Err(FixedError::Negative(s.to_string()));
    }
    let s = s.strip_prefix('+').unwrap_or(s);
    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(FixedError::Malformed(input.to_string()));
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(FixedError::Malformed(input.to_string()));
    }
    let frac_trimmed = frac_part.trim_end_matches('0');
    if frac_trimmed.len() > decimals as usize {
        return Err(FixedError::TooPrecise(input.to_string(), decimals));
    }
    let scale = 10u64.pow(decimals);
    let whole: u64 = if int_part.is_empty() {
        0
    } else {
        int_part
            .parse()
            .map_err(|_| FixedError::Overflow(input.to_string()))?
    };
    let mut frac: u64 = 0;
    for (i, b) in frac_trimmed.bytes().enumerate() {
        frac += u64::from(b - b'0') * 10u64.pow(decimals - 1 - i as u32);
    }
    whole
        .checked_mul(scale)
        .and_then(|w| w.checked_add(frac))
        .ok_or_else(|| FixedError::Overflow(input.to_string()))
}

pub fn format_fixed(units: u64, decimals: u32) -> String {
    let scale = 10u64.pow(decimals);
    format!(
        "{}.{:0width$}",
        units / scale,
        units % scale,
        width = decimals as usize
    )
}

/// `num / den` rounded half-up. `den` must be nonzero.
pub fn div_round_half_up(num: u128, den: u128) -> u128 {
    let (q, r) = (num / den, num % den);
    if r >= den - r {
        q + 1
    } else {
        q
    }
}
