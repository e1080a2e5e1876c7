//! Resolved experiment description embedded in JSON output.

use serde::Serialize;

use relaynet::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PowerUnit {
    Linear,
    Db,
}

/// Power axis: `points` values evenly spaced from `start` to `stop` in `unit`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub unit: PowerUnit,
}

impl PowerGrid {
    pub fn single(p: f64) -> Self {
        Self { start: p, stop: p, points: 1, unit: PowerUnit::Linear }
    }

    /// `start:stop:points`.
    pub fn parse(text: &str, unit: PowerUnit) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let bad = || Error::InvalidArgument(format!("power grid '{text}' must look like start:stop:points"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let points: usize = parts[2].trim().parse().map_err(|_| bad())?;
        let g = Self { start, stop, points, unit };
        g.validate()?;
        Ok(g)
    }

    /// Log-spaced linear powers.
    pub fn log(start: f64, stop: f64, points: usize) -> Self {
        Self { start: 10.0 * start.log10(), stop: 10.0 * stop.log10(), points, unit: PowerUnit::Db }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(Error::InvalidArgument("the power grid needs at least one point".into()));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::InvalidArgument("power grid bounds must be finite".into()));
        }
        if self.powers().iter().any(|p| !(*p > 0.0)) {
            return Err(Error::InvalidArgument("powers must be positive".into()));
        }
        Ok(())
    }

    /// Linear powers on the grid.
    pub fn powers(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                let v = if n == 1 {
                    self.start
                } else if i + 1 == n {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64
                };
                match self.unit {
                    PowerUnit::Linear => v,
                    PowerUnit::Db => 10f64.powf(v / 10.0),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub command: String,
    pub modulation: Option<String>,
    pub powers: Option<PowerGrid>,
    /// Fixed relay power; `None` means P_R = P.
    pub relay_power: Option<f64>,
    pub relays: Option<usize>,
    pub strategies: Vec<String>,
    pub method: Option<String>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub batches: Option<usize>,
    pub topology: Option<String>,
    pub output: Option<String>,
    pub format: String,
}

impl ExperimentSpec {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            modulation: None,
            powers: None,
            relay_power: None,
            relays: None,
            strategies: Vec::new(),
            method: None,
            samples: None,
            seed: None,
            batches: None,
            topology: None,
            output: None,
            format: "csv".into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(PowerGrid::parse("1:3:3", PowerUnit::Linear).unwrap().powers(), vec![1.0, 2.0, 3.0]);
        let db = PowerGrid::parse("0:20:3", PowerUnit::Db).unwrap().powers();
        assert!((db[1] - 10.0).abs() < 1e-12 && (db[2] - 100.0).abs() < 1e-9);
        let log = PowerGrid::log(0.01, 30.0, 50).powers();
        assert!((log[0] - 0.01).abs() < 1e-15 && (log[49] - 30.0).abs() < 1e-12);
        assert!(PowerGrid::parse("0:1:3", PowerUnit::Linear).is_err());
        assert!(PowerGrid::parse("1:2", PowerUnit::Linear).is_err());
        assert!(PowerGrid::parse("1:2:0", PowerUnit::Linear).is_err());
    }
}
