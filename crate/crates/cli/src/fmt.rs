//! Locale-independent numeric formatting for all emitted files.
//!
//! Every float is written with 17 significant decimal digits, which
//! round-trips `f64` losslessly; plain decimal notation is used in the range
//! where it stays readable, scientific notation outside it.

/// Formats with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    // "{:.16e}" always yields <sign>d.dddddddddddddddde<exp> — 17 digits.
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponential format");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if !(-4..17).contains(&exp) {
        return sci;
    }
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => ("-", rest),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    debug_assert_eq!(digits.len(), 17);
    let mut out = String::with_capacity(24);
    out.push_str(sign);
    if exp >= 0 {
        let split = exp as usize + 1;
        out.push_str(&digits[..split]);
        if split < digits.len() {
            out.push('.');
            out.push_str(&digits[split..]);
        }
    } else {
        out.push_str("0.");
        for _ in 0..(-exp - 1) {
            out.push('0');
        }
        out.push_str(&digits);
    }
    out
}

/// Formats an integer-valued count column.
pub fn fmt_u64(v: u64) -> String {
    v.to_string()
}
