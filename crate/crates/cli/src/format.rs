//! Number formatting shared by every command.

/// Fixed-point text with 9 significant digits, or scientific notation for
/// magnitudes where fixed point would be unwieldy.
pub fn sig9(x: f64) -> String {
    if !x.is_finite() {
        return "null".into();
    }
    if x == 0.0 {
        return "0.00000000".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..=9).contains(&exp) {
        return format!("{x:.8e}");
    }
    let decimals = (8 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding can carry into a new leading digit, e.g. 9.99999999995 -> 10.00000000
    let digits = s.chars().filter(char::is_ascii_digit).skip_while(|&c| c == '0').count();
    if digits > 9 && decimals > 0 {
        let d = decimals - 1;
        return format!("{x:.d$}");
    }
    s
}

pub fn json_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "null".into(), sig9)
}
