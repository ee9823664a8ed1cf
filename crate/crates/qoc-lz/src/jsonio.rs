//! JSON and CSV emission with reproducible numeric formatting.
//!
//! All floating-point output is written with 17 significant digits
//! (`{:.16e}`), enough to round-trip any f64 bit-exactly, so identical
//! inputs produce byte-identical files.

use serde::Serialize;
use std::io;

use crate::error::Result;

/// `serde_json` formatter that writes every f64 with 17 significant digits.
struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }
}

/// Serialize to a JSON string with reproducible float formatting.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

/// Format one float the way the CSV writers do.
pub fn fmt_f64(value: f64) -> String {
    format!("{value:.16e}")
}
