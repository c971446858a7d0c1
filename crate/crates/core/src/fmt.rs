/// Round to `digits` significant digits, returning the shortest decimal that
/// reproduces the rounded value.
pub(crate) fn sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .expect("scientific notation round-trips");
    format!("{rounded}")
}

/// The value `sig` would print, as a float.
#[cfg(test)]
pub(crate) fn round_sig(x: f64, digits: usize) -> f64 {
    sig(x, digits).parse().unwrap_or(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_digits() {
        assert_eq!(sig(0.25, 10), "0.25");
        assert_eq!(sig(1.0 / 3.0, 10), "0.3333333333");
        assert_eq!(sig(5.991464547107979, 10), "5.991464547");
        assert_eq!(sig(0.0, 10), "0");
        assert_eq!(sig(-2.0, 10), "-2");
        assert_eq!(round_sig(1.0 / 3.0, 10), 0.3333333333);
    }
}
