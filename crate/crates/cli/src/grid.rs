use crate::error::CliError;

/// `min:max:step` grid; a bare number is a single point.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub step: f64,
    pub count: usize,
    /// Decimal places to round points to, when the input was plain decimal.
    decimals: Option<usize>,
}

fn decimals(s: &str) -> Option<usize> {
    let s = s.trim();
    if s.contains(['e', 'E']) {
        return None;
    }
    Some(s.split_once('.').map_or(0, |(_, frac)| frac.len()))
}

const MAX_POINTS: usize = 1_000_000;

impl Grid {
    pub fn parse(text: &str) -> Result<Grid, CliError> {
        let bad = |why: &str| CliError::Input(format!("grid '{text}': {why}"));
        let parts: Vec<&str> = text.split(':').collect();
        let num = |s: &str| -> Result<f64, CliError> {
            let v: f64 = s.trim().parse().map_err(|_| bad(&format!("'{s}' is not a number")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(bad("values must be finite"))
            }
        };
        match parts.as_slice() {
            [single] => Ok(Grid {
                min: num(single)?,
                step: 1.0,
                count: 1,
                decimals: None,
            }),
            [lo_s, hi_s, step_s] => {
                let (lo, hi, step) = (num(lo_s)?, num(hi_s)?, num(step_s)?);
                if !(lo < hi) {
                    return Err(bad("min must be below max"));
                }
                if !(step > 0.0) {
                    return Err(bad("step must be positive"));
                }
                let intervals = ((hi - lo) / step).round();
                if intervals + 1.0 > MAX_POINTS as f64 {
                    return Err(bad(&format!("more than {MAX_POINTS} points")));
                }
                Ok(Grid {
                    min: lo,
                    step,
                    count: intervals as usize + 1,
                    decimals: decimals(lo_s).zip(decimals(step_s)).map(|(a, b)| a.max(b)),
                })
            }
            _ => Err(bad("expected min:max:step or a single value")),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count)
            .map(|i| {
                let v = self.min + i as f64 * self.step;
                match self.decimals {
                    Some(d) if d <= 15 => format!("{v:.d$}").parse().unwrap_or(v),
                    _ => v,
                }
            })
            .collect()
    }

    /// The grid as positive integers, for copy counts.
    pub fn integers(&self) -> Result<Vec<u32>, CliError> {
        self.values()
            .into_iter()
            .map(|v| {
                let r = v.round();
                if (v - r).abs() > 1e-9 || r < 1.0 || r > u32::MAX as f64 {
                    Err(CliError::Input(format!("{v} is not a positive integer")))
                } else {
                    Ok(r as u32)
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(Grid::parse("0.0:0.3:0.01").unwrap().count, 31);
        assert_eq!(Grid::parse("10:400:10").unwrap().integers().unwrap().len(), 40);
        assert_eq!(Grid::parse("0.25").unwrap().values(), vec![0.25]);
        assert_eq!(Grid::parse("0:1:0.3").unwrap().count, 4);
        assert_eq!(Grid::parse("0.2:0.8:0.2").unwrap().values(), vec![0.2, 0.4, 0.6, 0.8]);
        assert_eq!(Grid::parse("0.0:0.3:0.01").unwrap().values()[7], 0.07);
    }

    #[test]
    fn rejects() {
        for bad in ["1:0:0.1", "0:1:0", "0:1:-1", "a:1:0.1", "0:1", "0:inf:1"] {
            assert!(Grid::parse(bad).is_err(), "{bad}");
        }
        assert!(Grid::parse("0.5:2:0.5").unwrap().integers().is_err());
    }
}
