//! Parameter grid syntax.
//!
//! A grid is either a comma-separated list of numbers or `start:stop:step`.
//! The range form includes `start` and includes `stop` whenever it lies on
//! the grid to within `1e-9` steps, so `0:0.45:0.01` has 46 points. Values
//! are computed as `start + i * step` and rounded to 12 decimals.

use crate::error::{Error, Result};

/// Hard cap on grid length; guards against typos such as a zero-ish step.
pub const MAX_POINTS: usize = 1_000_000;

pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::InvalidInput("empty grid".into()));
    }
    let values = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, stop, step] = parts.as_slice() else {
            return Err(Error::InvalidInput(format!(
                "range grid must be start:stop:step, got `{text}`"
            )));
        };
        range(number(start)?, number(stop)?, number(step)?)?
    } else {
        text.split(',').map(number).collect::<Result<Vec<_>>>()?
    };
    if values.len() > MAX_POINTS {
        return Err(Error::InvalidInput(format!("grid has more than {MAX_POINTS} points")));
    }
    Ok(values)
}

pub fn range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidInput(format!("grid step must be positive, got {step}")));
    }
    if stop < start {
        return Err(Error::InvalidInput(format!("grid stop {stop} is below start {start}")));
    }
    let span = (stop - start) / step;
    if !(span < MAX_POINTS as f64) {
        return Err(Error::InvalidInput(format!("grid has more than {MAX_POINTS} points")));
    }
    let n = (span + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| round12(start + step * i as f64)).collect())
}

/// Strictly increasing check used by scans that require ordered grids.
pub fn is_strictly_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[0] < w[1])
}

fn number(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("not a number: `{}`", s.trim())))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidInput(format!("grid value must be finite, got `{}`", s.trim())))
    }
}

fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn inclusive_stop() {
        let g = parse_grid("0:0.45:0.01").unwrap();
        assert_eq!(g.len(), 46);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[45], 0.45);
        assert_eq!(parse_grid("0:1:0.3").unwrap(), vec![0.0, 0.3, 0.6, 0.9]);
    }

    #[test]
    fn lists_and_errors() {
        assert_eq!(parse_grid("1, 2.5,3").unwrap(), vec![1.0, 2.5, 3.0]);
        assert!(parse_grid("").is_err());
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("a,b").is_err());
        assert!(parse_grid("0:1e300:1e-300").is_err());
        assert!(parse_grid("nan").is_err());
    }

    proptest! {
        #[test]
        fn range_count_matches_arithmetic(start in -10.0f64..10.0, n in 0usize..500, step in 0.001f64..1.0) {
            let stop = start + step * n as f64;
            let g = range(start, stop, step).unwrap();
            prop_assert_eq!(g.len(), n + 1);
            prop_assert!(is_strictly_increasing(&g));
        }
    }
}
