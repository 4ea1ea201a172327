//! CSV formatting helpers.
//!
//! All emitters in this crate use '.' as the decimal separator, no digit
//! grouping, and 17 significant digits so that every value round-trips
//! bit-exactly and repeated runs produce byte-identical files.

/// Formats a float with 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Quotes a field for CSV if it contains a delimiter, quote, or newline.
pub fn quote_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
