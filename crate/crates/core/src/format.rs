//! Number formatting shared by the CSV writers.

/// Rendering of `x` rounded to twelve significant digits, without trailing
/// zeros; scientific notation outside `1e-8 ..= 1e13`.
pub fn fmt_sig(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-8..=12).contains(&magnitude) {
        let s = format!("{:.*e}", (DIGITS - 1) as usize, x);
        let (mantissa, exponent) = s.split_once('e').expect("scientific format");
        return format!("{}e{exponent}", trim_zeros(mantissa));
    }
    let decimals = (DIGITS - 1 - magnitude).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
