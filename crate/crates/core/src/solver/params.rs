use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Working precision for refinement and root extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Double,
    /// Double-double arithmetic from the start.
    Extended,
}

impl FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "double" => Ok(Precision::Double),
            "extended" => Ok(Precision::Extended),
            other => Err(Error::Parse(format!("unknown precision {other:?}"))),
        }
    }
}

/// Numerical tolerances of a solver run. Echoed verbatim in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ToleranceSet {
    pub residual_tol: f64,
    pub dedup_radius: f64,
    pub singular_tol: f64,
    pub divergence_norm: f64,
    pub step_budget: u64,
    /// Relative radius for merging roots of univariate polynomials.
    pub cluster_radius: f64,
    pub precision: Precision,
}

impl Default for ToleranceSet {
    fn default() -> Self {
        ToleranceSet {
            residual_tol: 1e-10,
            dedup_radius: 1e-6,
            singular_tol: 1e-8,
            divergence_norm: 1e8,
            step_budget: 10_000,
            cluster_radius: 1e-5,
            precision: Precision::Double,
        }
    }
}

/// Environment variables that override the defaults.
pub const ENV_OVERRIDES: [&str; 6] = [
    "EQCOVER_RESIDUAL_TOL",
    "EQCOVER_DEDUP_RADIUS",
    "EQCOVER_SINGULAR_TOL",
    "EQCOVER_DIVERGENCE_NORM",
    "EQCOVER_STEP_BUDGET",
    "EQCOVER_CLUSTER_RADIUS",
];

fn positive(name: &str, raw: &str) -> Result<f64> {
    match raw.trim().parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(Error::Parse(format!("{name}={raw:?} is not a positive number"))),
    }
}

impl ToleranceSet {
    /// Defaults with the `EQCOVER_*` overrides from the process environment.
    pub fn from_env() -> Result<Self> {
        Self::default().with_overrides(|k| std::env::var(k).ok())
    }

    pub fn with_overrides(mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<Self> {
        for name in ENV_OVERRIDES {
            let Some(raw) = lookup(name) else { continue };
            match name {
                "EQCOVER_RESIDUAL_TOL" => self.residual_tol = positive(name, &raw)?,
                "EQCOVER_DEDUP_RADIUS" => self.dedup_radius = positive(name, &raw)?,
                "EQCOVER_SINGULAR_TOL" => self.singular_tol = positive(name, &raw)?,
                "EQCOVER_DIVERGENCE_NORM" => self.divergence_norm = positive(name, &raw)?,
                "EQCOVER_CLUSTER_RADIUS" => self.cluster_radius = positive(name, &raw)?,
                _ => {
                    self.step_budget = raw
                        .trim()
                        .parse()
                        .ok()
                        .filter(|&n: &u64| n > 0)
                        .ok_or_else(|| Error::Parse(format!("{name}={raw:?} is not a positive integer")))?
                }
            }
        }
        Ok(self)
    }
}

/// How independent work items (paths) are scheduled. Never affects results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

pub(crate) fn map_indexed<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if exec == Execution::Parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_json() {
        let t = ToleranceSet::default();
        let v = serde_json::to_value(&t).unwrap();
        assert_eq!(v["residualTol"], 1e-10);
        assert_eq!(v["stepBudget"], 10_000);
        assert_eq!(v["precision"], "double");
        let back: ToleranceSet = serde_json::from_value(v).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn overrides() {
        let t = ToleranceSet::default()
            .with_overrides(|k| match k {
                "EQCOVER_SINGULAR_TOL" => Some("1e-6".into()),
                "EQCOVER_STEP_BUDGET" => Some("500".into()),
                _ => None,
            })
            .unwrap();
        assert_eq!(t.singular_tol, 1e-6);
        assert_eq!(t.step_budget, 500);
        assert_eq!(t.residual_tol, 1e-10);
        let bad = ToleranceSet::default().with_overrides(|k| (k == "EQCOVER_DEDUP_RADIUS").then(|| "-1".into()));
        assert!(matches!(bad, Err(Error::Parse(_))));
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let f = |i: usize| (i as f64).sqrt().sin();
        assert_eq!(map_indexed(Execution::Sequential, 1000, f), map_indexed(Execution::Parallel, 1000, f));
    }
}
