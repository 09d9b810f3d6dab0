//! JSON run configuration.

use std::path::{Path, PathBuf};

use dnls_core::augment::DirectConfig;
use dnls_core::contour::ContourConfig;
use dnls_core::potential::{Family, Potential};
use serde::{Deserialize, Serialize};

use crate::error::AppError;
use crate::io::read_potential_csv;
use crate::pde::PdeConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// `amp sech(x) exp(i sum phase[k] x^k)` on `[-half_width, half_width]`
    Sech {
        amp: f64,
        #[serde(default)]
        phase: Vec<f64>,
        #[serde(default = "default_half_width")]
        half_width: f64,
        #[serde(default = "default_h")]
        h: f64,
    },
    /// CSV with columns `x,re,im` on a symmetric uniform grid; relative
    /// paths are resolved against the config file
    File { path: PathBuf },
}

fn default_half_width() -> f64 {
    24.0
}

fn default_h() -> f64 {
    0.01
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContourSpec {
    pub n_arc: usize,
    pub n_ray: usize,
    pub ray_cutoff: f64,
    /// multiplies both node counts
    pub resolution: f64,
}

impl Default for ContourSpec {
    fn default() -> Self {
        let c = ContourConfig::default();
        ContourSpec {
            n_arc: c.n_arc,
            n_ray: c.n_ray,
            ray_cutoff: c.ray_cutoff,
            resolution: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub half_width: f64,
    pub h: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            half_width: 8.0,
            h: 0.25,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// admissible `|q(+-X)|`
    pub trunc: f64,
    /// left/right disagreement that aborts an inverse map
    pub overlap: f64,
    /// largest accepted BC residual
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            trunc: 1e-10,
            overlap: 1e-5,
            residual: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    #[serde(default)]
    pub contour: ContourSpec,
    /// zeta radius `R`; chosen from the zero count when absent
    #[serde(default)]
    pub radius: Option<f64>,
    /// cutoff point; chosen from the tail bound when absent
    #[serde(default)]
    pub x0: Option<f64>,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    #[serde(default)]
    pub x_grid: GridSpec,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// estimate `sigma_min` at every x (slower)
    #[serde(default = "yes")]
    pub sigma: bool,
    #[serde(default)]
    pub pde: PdeConfig,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_times() -> Vec<f64> {
    vec![0.0]
}

fn yes() -> bool {
    true
}

impl RunConfig {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<RunConfig, AppError> {
        let mut cfg: RunConfig = serde_json::from_str(text).map_err(|e| AppError::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig, AppError> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
        RunConfig::from_json(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<(), AppError> {
        let bad = |what: &str| Err(AppError::Config(format!("{what} must be positive and finite")));
        let pos = |v: f64| v.is_finite() && v > 0.0;
        let t = &self.tolerances;
        if !(pos(t.trunc) && pos(t.overlap) && pos(t.residual)) {
            return bad("tolerances");
        }
        if !(pos(self.x_grid.half_width) && pos(self.x_grid.h)) {
            return bad("x_grid");
        }
        let c = &self.contour;
        if c.n_arc < 4 || c.n_ray < 4 || !pos(c.ray_cutoff) || c.ray_cutoff <= 1.0 || !pos(c.resolution) {
            return Err(AppError::Config("contour: need >= 4 nodes, ray_cutoff > 1, resolution > 0".into()));
        }
        if self.radius.is_some_and(|r| !pos(r)) {
            return bad("radius");
        }
        if self.times.iter().any(|t| !t.is_finite()) {
            return Err(AppError::Config("times must be finite".into()));
        }
        if !(pos(self.pde.dt) && pos(self.pde.tail_tol)) {
            return bad("pde.dt and pde.tail_tol");
        }
        if let PotentialSpec::Sech { amp, half_width, h, phase } = &self.potential {
            if !amp.is_finite() || !pos(*half_width) || !pos(*h) || phase.iter().any(|v| !v.is_finite()) {
                return Err(AppError::Config("sech potential parameters".into()));
            }
        }
        Ok(())
    }

    pub fn contour(&self) -> ContourConfig {
        ContourConfig {
            n_arc: self.contour.n_arc,
            n_ray: self.contour.n_ray,
            ray_cutoff: self.contour.ray_cutoff,
            ..ContourConfig::default()
        }
        .scaled(self.contour.resolution)
    }

    pub fn direct(&self) -> DirectConfig {
        DirectConfig {
            contour: self.contour(),
            r: self.radius,
            x0: self.x0,
            trunc_tol: self.tolerances.trunc,
            ..DirectConfig::default()
        }
    }

    pub fn potential(&self) -> Result<Potential, AppError> {
        match &self.potential {
            PotentialSpec::Sech {
                amp,
                phase,
                half_width,
                h,
            } => Ok(Potential::from_family(
                Family::Sech {
                    amp: *amp,
                    phase: phase.clone(),
                },
                *half_width,
                *h,
            )),
            PotentialSpec::File { path } => read_potential_csv(&self.base_dir.join(path)),
        }
    }

    /// SHA-256 of the canonical JSON form (field order fixed by the types).
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let text = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = RunConfig::from_json(r#"{"potential": {"kind": "sech", "amp": 0.3}}"#, Path::new(".")).unwrap();
        assert_eq!(c.times, vec![0.0]);
        assert_eq!(c.contour(), ContourConfig::default());
        assert_eq!(c.potential().unwrap().len(), 4801);
    }

    #[test]
    fn rejects_bad_values() {
        for text in [
            r#"{"potential": {"kind": "sech", "amp": 0.3}, "tolerances": {"overlap": -1}}"#,
            r#"{"potential": {"kind": "sech", "amp": 0.3}, "x_grid": {"h": 0}}"#,
            r#"{"potential": {"kind": "sech", "amp": 0.3}, "bogus": 1}"#,
            r#"{"potential": {"kind": "gauss"}}"#,
        ] {
            assert!(matches!(RunConfig::from_json(text, Path::new(".")), Err(AppError::Config(_))), "{text}");
        }
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::from_json(r#"{"potential": {"kind": "sech", "amp": 0.3}}"#, Path::new(".")).unwrap();
        let b = RunConfig::from_json(r#"{"potential": {"kind": "sech", "amp": 0.3}, "times": [0.0]}"#, Path::new(".")).unwrap();
        let c = RunConfig::from_json(r#"{"potential": {"kind": "sech", "amp": 0.31}}"#, Path::new(".")).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
