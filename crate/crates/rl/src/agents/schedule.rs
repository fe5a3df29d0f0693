use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear interpolation up to `steps`, flat afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    Constant { value: f64 },
    Linear { start: f64, end: f64, steps: u64 },
}

impl Schedule {
    pub fn constant(value: f64) -> Self {
        Schedule::Constant { value }
    }

    pub fn linear(start: f64, end: f64, steps: u64) -> Self {
        Schedule::Linear { start, end, steps }
    }

    pub fn value(&self, step: u64) -> f64 {
        match *self {
            Schedule::Constant { value } => value,
            Schedule::Linear { start, end, steps } => {
                if steps == 0 || step >= steps {
                    end
                } else {
                    start + (end - start) * step as f64 / steps as f64
                }
            }
        }
    }

    pub fn final_value(&self) -> f64 {
        match *self {
            Schedule::Constant { value } => value,
            Schedule::Linear { end, .. } => end,
        }
    }

    pub fn validate(&self, what: &str) -> Result<()> {
        let ok = match *self {
            Schedule::Constant { value } => value.is_finite(),
            Schedule::Linear { start, end, .. } => start.is_finite() && end.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!("{what} schedule has non-finite values")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_midpoint() {
        let s = Schedule::linear(1.0, 0.01, 10_000);
        assert!((s.value(5_000) - 0.505).abs() < 1e-12);
        assert_eq!(s.value(0), 1.0);
        assert_eq!(s.value(10_000), 0.01);
        assert_eq!(s.value(50_000), 0.01);
    }

    #[test]
    fn constant_and_degenerate() {
        assert_eq!(Schedule::constant(3.0).value(99), 3.0);
        assert_eq!(Schedule::linear(1.0, 2.0, 0).value(0), 2.0);
    }

    #[test]
    fn json_shape() {
        let s: Schedule =
            serde_json::from_str(r#"{"kind":"linear","start":1.0,"end":10.0,"steps":100}"#).unwrap();
        assert_eq!(s.value(50), 5.5);
    }
}
