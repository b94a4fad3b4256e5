//! Persisted critical points.
//!
//! ```text
//! { "meta":        { "config": <resolved RunConfig>, "tool_version": "..." },
//!   "loop":        { "N", "k", "T", "M", "coefficients": [body-major] },
//!   "diagnostics": { "action", "grad_norm", "el_residual", "winding_seed_class" } }
//! ```
//!
//! Floats are written in shortest round-trip form, so load followed by
//! save reproduces the file byte for byte.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{OrbitError, Result};
use crate::loopspace::LoopConfiguration;
use crate::solver::OrbitRecord;

pub const TOOL_VERSION: &str = concat!("orbitact ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitMeta {
    pub config: RunConfig,
    pub tool_version: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Diagnostics {
    pub action: f64,
    pub grad_norm: f64,
    pub el_residual: f64,
    pub winding_seed_class: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitFile {
    pub meta: OrbitMeta,
    #[serde(rename = "loop")]
    pub orbit: LoopConfiguration,
    pub diagnostics: Diagnostics,
}

impl OrbitFile {
    pub fn from_record(config: &RunConfig, record: &OrbitRecord) -> Self {
        Self {
            meta: OrbitMeta {
                config: config.clone(),
                tool_version: TOOL_VERSION.to_string(),
            },
            orbit: record.orbit.clone(),
            diagnostics: Diagnostics {
                action: record.action_value,
                grad_norm: record.grad_norm,
                el_residual: record.el_residual,
                winding_seed_class: record.winding_seed_class,
            },
        }
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("orbit file serializes");
        s.push('\n');
        s
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: OrbitFile = serde_json::from_str(text).map_err(|e| OrbitError::OrbitFileInvalid(e.to_string()))?;
        file.meta
            .config
            .clone()
            .resolve()
            .map_err(|e| OrbitError::OrbitFileInvalid(format!("embedded config: {e}")))?;
        let c = &file.meta.config;
        let lp = &file.orbit;
        if lp.n_bodies() != c.problem.n_bodies
            || lp.dim() != c.problem.dim
            || lp.period() != c.problem.period
            || lp.harmonics() != c.discretization.harmonics
        {
            return Err(OrbitError::OrbitFileInvalid(
                "loop shape disagrees with the embedded config".into(),
            ));
        }
        Ok(file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| OrbitError::OrbitFileInvalid(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::circular_seed;
    use std::f64::consts::PI;

    fn sample() -> OrbitFile {
        let cfg = RunConfig::from_json_str(
            r#"{"problem": {"n_bodies": 2, "dim": 2, "period": 6.283185307179586}, "discretization": {"harmonics": 3}}"#,
        )
        .unwrap();
        let lp = circular_seed(2, 2, 2.0 * PI, 3, 1, 0.1 + 0.2).unwrap().shifted(0.1);
        let rec = OrbitRecord::new(lp, 2.0 * PI / 3.0, 1.234e-11, 5.6e-12, 1);
        OrbitFile::from_record(&cfg, &rec)
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let text = sample().to_json_string();
        let back = OrbitFile::from_json_str(&text).unwrap();
        assert_eq!(back, sample());
        assert_eq!(back.to_json_string(), text);
    }

    #[test]
    fn schema_keys() {
        let v: serde_json::Value = serde_json::from_str(&sample().to_json_string()).unwrap();
        for key in ["N", "k", "T", "M", "coefficients"] {
            assert!(v["loop"].get(key).is_some(), "{key}");
        }
        for key in ["action", "grad_norm", "el_residual", "winding_seed_class"] {
            assert!(v["diagnostics"].get(key).is_some(), "{key}");
        }
        assert!(v["meta"]["config"]["problem"].is_object());
        assert!(v["meta"]["tool_version"].is_string());
    }

    #[test]
    fn rejects_inconsistent_files() {
        assert!(matches!(OrbitFile::from_json_str("{}"), Err(OrbitError::OrbitFileInvalid(_))));
        let mut f = sample();
        f.meta.config.discretization.harmonics = 4;
        f.meta.config.discretization.n_t = Some(25);
        assert!(matches!(
            OrbitFile::from_json_str(&f.to_json_string()),
            Err(OrbitError::OrbitFileInvalid(_))
        ));
    }
}
