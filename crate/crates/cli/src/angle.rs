//! Angle arguments: radians (`0.3`), degrees (`45deg`, `45°`) and multiples
//! of π (`pi/8`, `3pi/4`, `-pi/2`, `2*pi/3`, `π`).

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Radians,
    Degrees,
}

/// Parses `text`; bare numbers are read in `unit`.
///
/// π-multiples are evaluated as `(k · π) / d`, so `pi/8` and `3pi/4` give the
/// same bits as `FRAC_PI_8` and `3.0 * FRAC_PI_4`. Degrees go through
/// `(v / 180) · π`, exact whenever `v / 180` is a dyadic fraction (45, 22.5).
pub fn parse_angle(text: &str, unit: Unit) -> Result<f64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let s = s.to_ascii_lowercase().replace('π', "pi");
    if s.is_empty() {
        return Err("empty angle".into());
    }
    let value = if let Some(at) = s.find("pi") {
        let (head, tail) = (&s[..at], &s[at + 2..]);
        let head = head.strip_suffix('*').unwrap_or(head);
        let coeff = match head {
            "" | "+" => 1.0,
            "-" => -1.0,
            h => parse_number(h)?,
        };
        let den = match tail {
            "" => 1.0,
            t => {
                let d = t
                    .strip_prefix('/')
                    .ok_or_else(|| format!("unexpected {t:?} after pi in {text:?}"))?;
                let d = parse_number(d)?;
                if d == 0.0 {
                    return Err(format!("zero denominator in {text:?}"));
                }
                d
            }
        };
        coeff * PI / den
    } else if let Some(v) = s.strip_suffix("deg").or_else(|| s.strip_suffix('°')) {
        degrees(parse_number(v)?)
    } else if let Some(v) = s.strip_suffix("rad") {
        parse_number(v)?
    } else {
        let v = parse_number(&s)?;
        match unit {
            Unit::Radians => v,
            Unit::Degrees => degrees(v),
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("angle {text:?} is not finite"))
    }
}

fn degrees(v: f64) -> f64 {
    v / 180.0 * PI
}

fn parse_number(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("bad number {s:?} in angle"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("bad number {s:?} in angle"))
    }
}
