//! Fixed-decimal rounding used by the campaign tables.

/// `100 * num / den` rounded half-up to two decimals, computed in integer
/// arithmetic so table values like 88.445 never fall on the wrong side.
///
/// A zero denominator yields 0.0.
pub fn percent_half_up(num: u64, den: u64) -> f64 {
    ratio_half_up(num.saturating_mul(100), den, 2)
}

/// `num / den` rounded half-up to `decimals` places, exact for integer inputs.
pub fn ratio_half_up(num: u64, den: u64, decimals: u32) -> f64 {
    if den == 0 {
        return 0.0;
    }
    let scale = 10u128.pow(decimals);
    let scaled = (2 * num as u128 * scale + den as u128) / (2 * den as u128);
    scaled as f64 / scale as f64
}

/// Half-up rounding of a real value. Values within 1e-9 (relative) of a
/// half-way point round up.
pub fn round_half_up(value: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    let shifted = value * scale;
    let nudge = shifted.abs().max(1.0) * 1e-9;
    (shifted + 0.5 + nudge).floor() / scale
}

/// Formats a value with exactly `decimals` places after half-up rounding.
pub fn fmt_fixed(value: f64, decimals: u32) -> String {
    format!("{:.*}", decimals as usize, round_half_up(value, decimals))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_percentages() {
        assert_eq!(percent_half_up(29188, 33000), 88.45);
        assert_eq!(percent_half_up(528, 4274), 12.35);
        assert_eq!(percent_half_up(4274, 29188), 14.64);
        assert_eq!(percent_half_up(0, 0), 0.0);
    }

    #[test]
    fn exact_half_rounds_up() {
        assert_eq!(ratio_half_up(1, 8, 2), 0.13);
        assert_eq!(ratio_half_up(5, 13, 3), 0.385);
        assert_eq!(round_half_up(0.125, 2), 0.13);
        assert_eq!(round_half_up(2.675, 2), 2.68);
        assert_eq!(fmt_fixed(5.0 / 13.0, 3), "0.385");
    }
}
