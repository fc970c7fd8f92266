//! Run configuration: defaults, then an optional `key = value` file, then
//! command-line flags (flags win).

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::TestForm;
use crate::variance::QuadratureSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    KernelProbe,
    VarianceExact,
    VarianceMc,
    NumberMc,
    Asymptotics,
    Fit,
    Verify,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Command::KernelProbe => "kernel-probe",
            Command::VarianceExact => "variance-exact",
            Command::VarianceMc => "variance-mc",
            Command::NumberMc => "number-mc",
            Command::Asymptotics => "asymptotics",
            Command::Fit => "fit",
            Command::Verify => "verify",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Specfun,
    Geometry,
    Kernels,
    Variance,
    Montecarlo,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub k_list: Vec<u32>,
    pub testform: String,
    pub n_samples: usize,
    pub seed: u64,
    pub quadrature: QuadratureSpec,
    /// Geodesic radius of the disk for `number-mc`.
    pub radius: f64,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub suite: Suite,
}

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        RunConfig {
            command,
            k_list: vec![100],
            testform: "psi1".to_string(),
            n_samples: 2000,
            seed: 42,
            quadrature: QuadratureSpec::default(),
            radius: std::f64::consts::FRAC_PI_4,
            output_path: None,
            format: Format::Json,
            suite: Suite::All,
        }
    }

    /// Positive numeric fields and a known test form.
    pub fn validate(&self) -> Result<()> {
        if self.k_list.is_empty() || self.k_list.contains(&0) {
            return Err(Error::Config("k list must be non-empty with every k ≥ 1".into()));
        }
        if self.n_samples < 2 {
            return Err(Error::Config("samples must be at least 2".into()));
        }
        if !(self.radius > 0.0 && self.radius < std::f64::consts::FRAC_PI_2) {
            return Err(Error::Config(format!("radius {} not in (0, π/2)", self.radius)));
        }
        self.quadrature.validate()?;
        TestForm::by_name(&self.testform)?;
        Ok(())
    }

    /// Applies one `key = value` setting; `origin` labels errors.
    pub fn set(&mut self, key: &str, value: &str, origin: &str) -> Result<()> {
        let bad = |what: &str| Error::Config(format!("{origin}: invalid {what} '{value}'"));
        match key.replace('-', "_").as_str() {
            "k" => self.k_list = parse_k_list(value).map_err(|_| bad("k list"))?,
            "testform" => self.testform = value.to_string(),
            "samples" => self.n_samples = value.parse().map_err(|_| bad("samples"))?,
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "outer_nodes" => self.quadrature.outer_nodes = value.parse().map_err(|_| bad("outer_nodes"))?,
            "inner_nodes" => self.quadrature.inner_radial = value.parse().map_err(|_| bad("inner_nodes"))?,
            "inner_angular" => self.quadrature.inner_angular = value.parse().map_err(|_| bad("inner_angular"))?,
            "cutoff_b" => self.quadrature.cutoff_b = value.parse().map_err(|_| bad("cutoff_b"))?,
            "rel_tol" => self.quadrature.rel_tol = value.parse().map_err(|_| bad("rel_tol"))?,
            "radius" => self.radius = value.parse().map_err(|_| bad("radius"))?,
            "out" => self.output_path = Some(PathBuf::from(value)),
            "format" => {
                self.format = match value {
                    "json" => Format::Json,
                    "csv" => Format::Csv,
                    _ => return Err(bad("format")),
                }
            }
            "suite" => {
                self.suite = <Suite as clap::ValueEnum>::from_str(value, true).map_err(|_| bad("suite"))?;
            }
            other => return Err(Error::Config(format!("{origin}: unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Reads a `key = value` file; `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let origin = format!("{}:{}", path.display(), i + 1);
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("{origin}: expected 'key = value', got '{line}'")))?;
            self.set(key.trim(), value.trim(), &origin)?;
        }
        Ok(())
    }
}

pub fn parse_k_list(s: &str) -> std::result::Result<Vec<u32>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<u32>().map_err(|e| format!("'{p}': {e}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_parsing_with_line_context() {
        let dir = std::env::temp_dir().join(format!("zerovar-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let good = dir.join("good.cfg");
        std::fs::write(&good, "# sweep\nk = 20, 40\nseed=7\nouter-nodes = 16 # coarse\n").unwrap();
        let mut cfg = RunConfig::defaults(Command::Fit);
        cfg.apply_file(&good).unwrap();
        assert_eq!(cfg.k_list, vec![20, 40]);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.quadrature.outer_nodes, 16);
        let bad = dir.join("bad.cfg");
        std::fs::write(&bad, "k = 10\nseed = banana\n").unwrap();
        let err = RunConfig::defaults(Command::Fit).apply_file(&bad).unwrap_err().to_string();
        assert!(err.contains("bad.cfg:2"), "{err}");
        std::fs::write(&bad, "nonsense\n").unwrap();
        assert!(RunConfig::defaults(Command::Fit).apply_file(&bad).is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = RunConfig::defaults(Command::VarianceExact);
        assert!(cfg.validate().is_ok());
        cfg.testform = "nope".into();
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::defaults(Command::VarianceExact);
        cfg.k_list = vec![0];
        assert!(cfg.validate().is_err());
    }
}
