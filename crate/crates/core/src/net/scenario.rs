use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest requirement on a default grid. A requirement of exactly 1 is
/// never met by a finite number of purification rounds.
pub const DEFAULT_F_MAX: f64 = 0.99;

/// One realization of a request's fidelity requirement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(rename = "req")]
    pub requirement: f64,
    #[serde(rename = "prob")]
    pub probability: f64,
}

impl Scenario {
    pub fn new(requirement: f64, probability: f64) -> Self {
        Scenario {
            requirement,
            probability,
        }
    }

    /// Equally likely scenarios over `requirements`.
    pub fn uniform(requirements: &[f64]) -> Vec<Scenario> {
        let p = 1.0 / requirements.len() as f64;
        requirements.iter().map(|&r| Scenario::new(r, p)).collect()
    }

    /// A single certain requirement.
    pub fn certain(requirement: f64) -> Vec<Scenario> {
        vec![Scenario::new(requirement, 1.0)]
    }
}

/// Ascending requirement grid `{0, step, 2*step, ...}` truncated at `f_max`.
pub fn scenario_grid(step: f64, f_max: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::validation("step", format!("{step} outside (0,1]")));
    }
    if !(f_max.is_finite() && f_max <= 1.0) {
        return Err(Error::validation("f_max", format!("{f_max} above 1")));
    }
    let mut grid = Vec::new();
    for i in 0.. {
        // snap to 12 decimals so that 7 * 0.01 prints as 0.07
        let value = ((i as f64 * step) * 1e12).round() / 1e12;
        if value > f_max + 1e-12 {
            break;
        }
        grid.push(value);
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_steps() {
        assert_eq!(scenario_grid(0.25, 0.99).unwrap(), vec![0.0, 0.25, 0.5, 0.75]);
    }

    #[test]
    fn hundredth_steps() {
        // enumerate independently: i/100 for i in 0..=99
        let expected: Vec<f64> = (0..100).map(|i| i as f64 / 100.0).collect();
        let grid = scenario_grid(0.01, 0.99).unwrap();
        assert_eq!(grid.len(), 100);
        assert_eq!(grid, expected);
        assert_eq!(*grid.last().unwrap(), 0.99);
    }

    #[test]
    fn degenerate_grid() {
        assert_eq!(scenario_grid(1.0, 0.99).unwrap(), vec![0.0]);
    }

    #[test]
    fn bad_step() {
        assert!(scenario_grid(0.0, 0.99).is_err());
        assert!(scenario_grid(1.5, 0.99).is_err());
    }

    #[test]
    fn uniform_mass() {
        let s = Scenario::uniform(&[0.8, 0.85, 0.9]);
        let mass: f64 = s.iter().map(|s| s.probability).sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }
}
