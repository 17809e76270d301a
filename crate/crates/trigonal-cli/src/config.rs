//! Run configuration: a TOML document naming one curve and its numerical
//! settings.
//!
//! ```toml
//! branch_points = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]]
//! precision = 1e-13
//! theta_radius = 12
//! ```

use serde::Deserialize;
use std::path::Path;
use trigonal::{CurveSpec, Error, C};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub branch_points: Vec<[f64; 2]>,
    /// Relative quadrature tolerance.
    pub precision: f64,
    pub theta_radius: usize,
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub curves: Vec<CurveSpec>,
    pub precision: Option<f64>,
    pub radius: Option<usize>,
}

impl RunConfig {
    /// The default corpus with the library defaults.
    pub fn default_corpus() -> Self {
        Self { curves: trigonal::curve::default_corpus(), precision: None, radius: None }
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::InvalidInput(e.message().to_string()))?;
        raw.validate()
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

impl RawConfig {
    pub fn validate(&self) -> Result<RunConfig, Error> {
        if self.branch_points.len() != 4 {
            return Err(Error::InvalidInput(format!(
                "branch_points needs 4 entries, got {}",
                self.branch_points.len()
            )));
        }
        if !(self.precision > 0.0 && self.precision < 1e-2) {
            return Err(Error::InvalidInput(format!("precision {} must lie in (0, 0.01)", self.precision)));
        }
        if self.theta_radius == 0 {
            return Err(Error::InvalidInput("theta_radius must be at least 1".into()));
        }
        let b: Vec<C> = self.branch_points.iter().map(|p| C::new(p[0], p[1])).collect();
        let curve = CurveSpec::new([b[0], b[1], b[2], b[3]])?;
        Ok(RunConfig { curves: vec![curve], precision: Some(self.precision), radius: Some(self.theta_radius) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str =
        "branch_points = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [3.0, -1.0]]\nprecision = 1e-12\ntheta_radius = 10\n";

    #[test]
    fn parses_a_full_config() {
        let cfg = RunConfig::parse(GOOD).unwrap();
        assert_eq!(cfg.curves.len(), 1);
        assert_eq!(cfg.curves[0].b[2], C::new(1.0, 1.0));
        assert_eq!(cfg.radius, Some(10));
        assert_eq!(cfg.precision, Some(1e-12));
    }

    #[test]
    fn missing_field_is_rejected() {
        let text = "branch_points = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]]\nprecision = 1e-12\n";
        let err = RunConfig::parse(text).unwrap_err();
        assert!(err.to_string().contains("theta_radius"), "{err}");
    }

    #[test]
    fn duplicate_points_are_rejected() {
        let text = GOOD.replace("[1.0, 1.0]", "[1.0, 0.0]");
        assert_eq!(RunConfig::parse(&text).unwrap_err(), Error::BranchPointsNotDistinct);
    }

    #[test]
    fn bad_values_are_rejected() {
        assert!(RunConfig::parse(&GOOD.replace("1e-12", "0.5")).is_err());
        assert!(RunConfig::parse(&GOOD.replace("= 10", "= 0")).is_err());
        assert!(RunConfig::parse(&GOOD.replace("[3.0, -1.0]]", "[3.0, -1.0], [4.0, 0.0]]")).is_err());
        assert!(RunConfig::parse(&format!("{GOOD}extra = 1\n")).is_err());
    }
}
