//! Numeric arguments with `pi` suffixes, windows and grids.
//!
//! `3.5`, `10pi`, `13x2pi`, `51/2xpi`, `-1.5pi` are all accepted; the value
//! is the plain number times the suffix factor.

use std::f64::consts::PI;

use anyhow::{anyhow, bail, Context, Result};

fn number(s: &str) -> Result<f64> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(1.0);
    }
    if let Some((a, b)) = s.split_once('/') {
        let (a, b): (f64, f64) = (a.trim().parse()?, b.trim().parse()?);
        if b == 0.0 {
            bail!("zero denominator");
        }
        return Ok(a / b);
    }
    Ok(s.parse()?)
}

/// Parses a scalar such as `13x2pi`.
pub fn parse_angle(s: &str) -> Result<f64> {
    let t = s.trim().to_ascii_lowercase();
    let parsed = if let Some(head) = t.strip_suffix("x2pi").or_else(|| t.strip_suffix("*2pi")) {
        number(head).map(|v| v * 2.0 * PI)
    } else if let Some(head) = t.strip_suffix("pi") {
        number(head.trim_end_matches(['x', '*'])).map(|v| v * PI)
    } else if t.is_empty() {
        Err(anyhow!("empty value"))
    } else {
        number(&t)
    };
    let v = parsed.with_context(|| format!("cannot parse '{s}' as a number"))?;
    if !v.is_finite() {
        bail!("'{s}' is not finite");
    }
    Ok(v)
}

/// `lo:hi`.
pub fn parse_window(s: &str) -> Result<(f64, f64)> {
    let (a, b) = s.split_once(':').ok_or_else(|| anyhow!("window '{s}' must look like lo:hi"))?;
    Ok((parse_angle(a)?, parse_angle(b)?))
}

/// Sample points of one grid axis.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid(pub Vec<f64>);

/// `lo:hi:count` (inclusive, evenly spaced) or a comma-separated list.
pub fn parse_grid(s: &str) -> Result<Grid> {
    parse_points(s).map(Grid)
}

fn parse_points(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [lo, hi, n] => {
            let (lo, hi) = (parse_angle(lo)?, parse_angle(hi)?);
            let n: usize = n.trim().parse().with_context(|| format!("bad point count in '{s}'"))?;
            Ok(match n {
                0 => Vec::new(),
                1 => vec![lo],
                _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
            })
        }
        [single] => single.split(',').map(parse_angle).collect(),
        _ => bail!("grid '{s}' must be lo:hi:count or a comma-separated list"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suffixes() {
        assert_eq!(parse_angle("13x2pi").unwrap(), 13.0 * 2.0 * PI);
        assert_eq!(parse_angle("10pi").unwrap(), 10.0 * PI);
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("2pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_angle("12pi").unwrap(), 12.0 * PI);
        assert_eq!(parse_angle("x2pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_angle("51/2xpi").unwrap(), 25.5 * PI);
        assert_eq!(parse_angle("0.25").unwrap(), 0.25);
        assert!(parse_angle("abc").is_err());
        assert!(parse_angle("").is_err());
    }

    #[test]
    fn windows_and_grids() {
        assert_eq!(parse_window("0:10pi").unwrap(), (0.0, 10.0 * PI));
        assert_eq!(parse_grid("0:1:3").unwrap().0, vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("1,2pi").unwrap().0, vec![1.0, 2.0 * PI]);
        assert!(parse_grid("1:2").is_err());
    }
}
