//! Angle parsing and formatting. Angles are read and printed in units of π
//! (`0.8pi`) unless raw radians are requested.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cap_eigen::sig15;
use crate::error::{Error, Result};

/// Parses `0.8pi`, `pi`, `pi/2`, `3pi/4` or a bare number. Bare numbers are
/// multiples of π unless `radians` is set.
pub fn parse_angle(text: &str, radians: bool) -> Result<f64> {
    let s = text.trim().to_ascii_lowercase().replace('π', "pi");
    let bad = || Error::Parse(format!("cannot read angle '{text}'"));
    let value = if let Some(pos) = s.find("pi") {
        let (coef, rest) = (&s[..pos], &s[pos + 2..]);
        let c = match coef.trim_end_matches('*') {
            "" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().map_err(|_| bad())?,
        };
        let d = match rest {
            "" => 1.0,
            r => r.strip_prefix('/').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?,
        };
        c * PI / d
    } else {
        let v = s.parse::<f64>().map_err(|_| bad())?;
        if radians {
            v
        } else {
            v * PI
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

/// `0.706608526440pi` style, or plain radians.
pub fn format_angle(x: f64, radians: bool) -> String {
    if radians {
        sig15(x)
    } else {
        format!("{}pi", sig15(x / PI))
    }
}

/// Scale dividing angles in tabular output.
pub fn angle_unit(radians: bool) -> f64 {
    if radians {
        1.0
    } else {
        PI
    }
}

/// Angle in a JSON document: a number is radians, a string follows [`parse_angle`]
/// with π units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AngleSpec {
    Radians(f64),
    Text(String),
}

impl AngleSpec {
    pub fn resolve(&self) -> Result<f64> {
        match self {
            AngleSpec::Radians(v) => Ok(*v),
            AngleSpec::Text(s) => parse_angle(s, false),
        }
    }

    /// `None` for the literal `auto`.
    pub fn resolve_or_auto(&self) -> Result<Option<f64>> {
        match self {
            AngleSpec::Text(s) if s.trim().eq_ignore_ascii_case("auto") => Ok(None),
            other => other.resolve().map(Some),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forms() {
        assert_eq!(parse_angle("0.8pi", false).unwrap(), 0.8 * PI);
        assert_eq!(parse_angle("pi/2", false).unwrap(), PI / 2.0);
        assert_eq!(parse_angle("3pi/4", true).unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_angle("0.5", false).unwrap(), 0.5 * PI);
        assert_eq!(parse_angle("0.5", true).unwrap(), 0.5);
        assert!(parse_angle("pie", false).is_err());
        assert!(parse_angle("x", false).is_err());
    }

    #[test]
    fn format_roundtrip() {
        let x = 0.706_608_526_44 * PI;
        let back = parse_angle(&format_angle(x, false), false).unwrap();
        assert!((back - x).abs() < 1e-13);
    }

    #[test]
    fn json_forms() {
        let a: AngleSpec = serde_json::from_str("\"0.8pi\"").unwrap();
        assert_eq!(a.resolve().unwrap(), 0.8 * PI);
        let b: AngleSpec = serde_json::from_str("1.5").unwrap();
        assert_eq!(b.resolve().unwrap(), 1.5);
        let c: AngleSpec = serde_json::from_str("\"auto\"").unwrap();
        assert_eq!(c.resolve_or_auto().unwrap(), None);
    }
}
