use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightPreset {
    Dimer,
    Mdd,
    TruncatedXy(u32),
    Custom,
}

/// Vertex weight `U(n)` for the multi-occupancy model, stored as a finite
/// table; entries beyond the table are zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightFunction {
    pub preset: WeightPreset,
    pub values: Vec<f64>,
}

impl WeightFunction {
    /// `U(n) = 1{n = 1}`.
    pub fn dimer() -> Self {
        WeightFunction { preset: WeightPreset::Dimer, values: vec![0.0, 1.0] }
    }
    /// `U(0) = U(1) = 1`.
    pub fn mdd() -> Self {
        WeightFunction { preset: WeightPreset::Mdd, values: vec![1.0, 1.0] }
    }
    /// `U(n) = 1{n <= cap}`.
    pub fn truncated_xy(cap: u32) -> Self {
        WeightFunction { preset: WeightPreset::TruncatedXy(cap), values: vec![1.0; cap as usize + 1] }
    }
    pub fn custom(values: Vec<f64>) -> Result<Self> {
        let w = WeightFunction { preset: WeightPreset::Custom, values };
        w.validate()?;
        Ok(w)
    }

    /// Parses `dimer`, `mdd`, `xy:N` / `truncated_xy(N)` or `custom:a,b,c`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "dimer" => return Ok(Self::dimer()),
            "mdd" => return Ok(Self::mdd()),
            _ => {}
        }
        let cap = s
            .strip_prefix("xy:")
            .or_else(|| s.strip_prefix("truncated_xy(").and_then(|r| r.strip_suffix(')')));
        if let Some(c) = cap {
            let n = c.parse().map_err(|_| Error::InvalidArgument(format!("bad truncation {c}")))?;
            return Ok(Self::truncated_xy(n));
        }
        if let Some(rest) = s.strip_prefix("custom:") {
            let values = rest
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::InvalidArgument(format!("bad custom weight: {e}")))?;
            return Self::custom(values);
        }
        invalid(format!("unknown weight function {s}"))
    }

    pub fn label(&self) -> String {
        match &self.preset {
            WeightPreset::Dimer => "dimer".into(),
            WeightPreset::Mdd => "mdd".into(),
            WeightPreset::TruncatedXy(n) => format!("truncated_xy({n})"),
            WeightPreset::Custom => format!("custom{:?}", self.values),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.iter().any(|&u| !(0.0..=1.0).contains(&u)) {
            return invalid("weight function values must lie in [0, 1]");
        }
        if self.values.iter().skip(1).all(|&u| u == 0.0) {
            return invalid("weight function must be non-zero for some n >= 1");
        }
        Ok(())
    }

    pub fn at(&self, n: i64) -> f64 {
        if n < 0 {
            0.0
        } else {
            self.values.get(n as usize).copied().unwrap_or(0.0)
        }
    }

    pub fn at_scalar<S: Scalar>(&self, n: i64) -> S {
        let u = self.at(n);
        if u == 0.0 {
            S::zero()
        } else if u == 1.0 {
            S::one()
        } else {
            S::from_f64(u)
        }
    }

    /// Largest `n` with `U(n) > 0`.
    pub fn support_max(&self) -> usize {
        self.values.iter().rposition(|&u| u > 0.0).unwrap_or(0)
    }

    /// `U(0) = 1` and `U` non-increasing.
    pub fn normalized_monotone(&self) -> bool {
        self.at(0) == 1.0 && self.values.windows(2).all(|w| w[1] <= w[0])
    }

    /// Decay constant `K_U`: the smallest `K >= 1` with
    /// `U(n+1) <= K U(n) / n` for all `n >= 1`. `None` if the weight is not
    /// normalized-monotone or no finite constant exists.
    pub fn decay_constant(&self) -> Option<f64> {
        if !self.normalized_monotone() {
            return None;
        }
        let mut k: f64 = 1.0;
        for n in 1..self.values.len() {
            let (un, un1) = (self.at(n as i64), self.at(n as i64 + 1));
            if un1 == 0.0 {
                continue;
            }
            if un == 0.0 {
                return None;
            }
            k = k.max(n as f64 * un1 / un);
        }
        Some(k)
    }

    pub fn fast_decaying(&self) -> bool {
        self.decay_constant().is_some()
    }
}

/// Couplings shared by the spin, path and loop models.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub beta: f64,
    pub h: f64,
    pub r: u32,
    pub rho: f64,
    pub n_colors: u32,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams { beta: 0.5, h: 0.0, r: 1, rho: 1.0, n_colors: 1 }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return invalid("beta must be finite and non-negative");
        }
        if !(self.h.is_finite() && self.h >= 0.0) {
            return invalid("h must be finite and non-negative");
        }
        if self.r == 0 {
            return invalid("r must be a positive integer");
        }
        if !(self.rho.is_finite() && self.rho >= 0.0) {
            return invalid("rho must be finite and non-negative");
        }
        if self.n_colors == 0 {
            return invalid("number of colours must be positive");
        }
        Ok(())
    }

    pub fn with_beta(self, beta: f64) -> Self {
        ModelParams { beta, ..self }
    }
    pub fn with_h(self, h: f64) -> Self {
        ModelParams { h, ..self }
    }
    pub fn with_r(self, r: u32) -> Self {
        ModelParams { r, ..self }
    }
    pub fn with_rho(self, rho: f64) -> Self {
        ModelParams { rho, ..self }
    }
    pub fn with_colors(self, n_colors: u32) -> Self {
        ModelParams { n_colors, ..self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_flags() {
        assert_eq!(WeightFunction::mdd().decay_constant(), Some(1.0));
        assert!(!WeightFunction::dimer().normalized_monotone());
        assert!(WeightFunction::dimer().decay_constant().is_none());
        assert_eq!(WeightFunction::truncated_xy(6).decay_constant(), Some(5.0));
        assert_eq!(WeightFunction::truncated_xy(6).support_max(), 6);
    }

    #[test]
    fn parsing() {
        assert_eq!(WeightFunction::parse("xy:3").unwrap(), WeightFunction::truncated_xy(3));
        assert_eq!(WeightFunction::parse("truncated_xy(3)").unwrap(), WeightFunction::truncated_xy(3));
        assert_eq!(WeightFunction::parse("custom:1,0.5").unwrap().at(1), 0.5);
        assert!(WeightFunction::parse("custom:1,2").is_err());
        assert!(WeightFunction::parse("custom:1,0").is_err());
        assert!(WeightFunction::parse("bogus").is_err());
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::default().validate().is_ok());
        assert!(ModelParams::default().with_r(0).validate().is_err());
        assert!(ModelParams::default().with_beta(-1.0).validate().is_err());
    }
}
