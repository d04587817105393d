//! Number formatting and the `key=value` token readers shared by the formats.

use crate::error::{Error, Result};

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn parse_f64(s: &str) -> Result<f64> {
    match s {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        "nan" => Ok(f64::NAN),
        _ => s
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Format(format!("not a number: '{s}'"))),
    }
}

/// Space-separated `key=value` tokens that must appear in a fixed order.
pub(crate) struct HeaderTokens<'a> {
    it: std::str::Split<'a, char>,
}

impl<'a> HeaderTokens<'a> {
    pub fn new(line: &'a str) -> Self {
        Self { it: line.split(' ') }
    }

    fn value(&mut self, key: &str) -> Result<&'a str> {
        let tok = self
            .it
            .next()
            .ok_or_else(|| Error::Format(format!("header ends before {key}")))?;
        tok.strip_prefix(key)
            .and_then(|r| r.strip_prefix('='))
            .ok_or_else(|| Error::Format(format!("expected {key}=, found '{tok}'")))
    }

    pub fn usize(&mut self, key: &str) -> Result<usize> {
        let v = self.value(key)?;
        v.parse()
            .map_err(|_| Error::Format(format!("{key}: not an integer: '{v}'")))
    }

    pub fn f64(&mut self, key: &str) -> Result<f64> {
        let v = self.value(key)?;
        v.parse()
            .map_err(|_| Error::Format(format!("{key}: not a number: '{v}'")))
    }

    pub fn finish(mut self) -> Result<()> {
        match self.it.next() {
            None => Ok(()),
            Some(t) => Err(Error::Format(format!("unexpected header token '{t}'"))),
        }
    }
}

/// `key=value` with the key trimmed and non-empty.
pub fn parse_param(s: &str) -> Result<(String, f64)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("expected key=value, got '{s}'")))?;
    let k = k.trim();
    if k.is_empty() || !k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(Error::Config(format!("bad parameter name '{k}'")));
    }
    let v = v.trim();
    let x: f64 = v
        .parse()
        .map_err(|_| Error::Config(format!("{k}: not a number: '{v}'")))?;
    if !x.is_finite() {
        return Err(Error::Config(format!("{k}: not finite")));
    }
    Ok((k.to_string(), x))
}
