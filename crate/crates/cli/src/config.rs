use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// Experiment configuration. Fields missing from a config file keep their
/// defaults and command-line flags override both. `n`, `n_grid` and
/// `samples` default per command (see [`Defaults`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Length of the straight segments (default 2).
    pub ell: f64,
    /// `tau`, `tau0`, `segment_bump`, `zero`, `one` or the path of a
    /// `r,theta,value` table (default `tau0`).
    pub observable: String,
    pub n: Option<u64>,
    pub n_grid: Option<Vec<u64>>,
    pub samples: Option<u64>,
    /// Products per lag for `correlations` (default 10^7).
    pub pairs: u64,
    /// Flow time for `flow` (default 10^4).
    pub horizon: f64,
    /// Gauss-Legendre nodes per flight for `flow` (default 8).
    pub quad_nodes: usize,
    /// Cascades stop after `ceil(cap_k ln n0)` steps (default 10).
    pub cap_k: f64,
    /// Order of the cascade moment bound (default 1.5).
    pub s: f64,
    pub master_seed: u64,
    /// Worker threads; 0 falls back to `STADIUM_LIMITS_THREADS`, then to
    /// all cores.
    pub workers: usize,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            ell: 2.0,
            observable: "tau0".into(),
            n: None,
            n_grid: None,
            samples: None,
            pairs: 10_000_000,
            horizon: 10_000.0,
            quad_nodes: 8,
            cap_k: 10.0,
            s: 1.5,
            master_seed: 1,
            workers: 0,
            output_dir: PathBuf::from("out"),
        }
    }
}

/// Per-command defaults for the size fields.
#[derive(Debug, Clone, Copy)]
pub struct Defaults {
    pub n: u64,
    pub n_grid: &'static [u64],
    pub samples: u64,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, String> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            if path == "." {
                format!("config: {}", e.inner())
            } else {
                format!("config field `{path}`: {}", e.inner())
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text =
            std::fs::read_to_string(path).map_err(|e| format!("config {}: {e}", path.display()))?;
        Self::from_json(&text)
    }

    pub fn n_or(&self, d: Defaults) -> u64 {
        self.n.unwrap_or(d.n)
    }

    pub fn samples_or(&self, d: Defaults) -> u64 {
        self.samples.unwrap_or(d.samples)
    }

    /// `n_grid`, else `[n]`, else the command default.
    pub fn n_list(&self, d: Defaults) -> Vec<u64> {
        match (&self.n_grid, self.n) {
            (Some(g), _) => g.clone(),
            (None, Some(n)) => vec![n],
            (None, None) => d.n_grid.to_vec(),
        }
    }

    /// Worker count after the environment fallback.
    pub fn resolved_workers(&self) -> Result<usize, String> {
        if self.workers > 0 {
            return Ok(self.workers);
        }
        match std::env::var("STADIUM_LIMITS_THREADS") {
            Ok(v) if !v.trim().is_empty() => v
                .trim()
                .parse()
                .map_err(|_| format!("STADIUM_LIMITS_THREADS: not a count: {v:?}")),
            _ => Ok(0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn save(c: &RunConfig) -> String {
        serde_json::to_string_pretty(c).unwrap()
    }

    #[test]
    fn save_then_load_is_identity() {
        let mut c = RunConfig::default();
        c.n_grid = Some(vec![1024, 2048]);
        c.samples = Some(7);
        c.observable = "segment_bump".into();
        assert_eq!(RunConfig::from_json(&save(&c)).unwrap(), c);
        let d = RunConfig::default();
        assert_eq!(RunConfig::from_json(&save(&d)).unwrap(), d);
    }

    #[test]
    fn missing_fields_take_defaults() {
        let c = RunConfig::from_json(r#"{"ell": 1.5}"#).unwrap();
        assert_eq!(c.ell, 1.5);
        assert_eq!(c.master_seed, RunConfig::default().master_seed);
    }

    #[test]
    fn errors_name_the_field() {
        let e = RunConfig::from_json(r#"{"ell": "long"}"#).unwrap_err();
        assert!(e.contains("`ell`"), "{e}");
        let e = RunConfig::from_json(r#"{"samples": -3}"#).unwrap_err();
        assert!(e.contains("`samples`"), "{e}");
        let e = RunConfig::from_json(r#"{"elll": 2}"#).unwrap_err();
        assert!(e.contains("elll"), "{e}");
    }

    #[test]
    fn size_fallbacks() {
        let d = Defaults {
            n: 5,
            n_grid: &[1, 2],
            samples: 9,
        };
        let mut c = RunConfig::default();
        assert_eq!(
            (c.n_or(d), c.samples_or(d), c.n_list(d)),
            (5, 9, vec![1, 2])
        );
        c.n = Some(40);
        assert_eq!(c.n_list(d), vec![40]);
        c.n_grid = Some(vec![3]);
        assert_eq!(c.n_list(d), vec![3]);
    }
}
