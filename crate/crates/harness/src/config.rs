//! Run configuration files.

use std::path::{Path, PathBuf};

use akpz_chaos::MultiplierParams;
use akpz_core::{Mode, ModeLattice, Profile, SimConfig, TestFunction};
use akpz_mct::{FitWindow, MctConfig};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::sync::Arc;

use crate::error::{HarnessError, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Simulate,
    Diffusivity,
    Variance,
    Hierarchy,
    Mct,
    Check,
}

impl Kind {
    pub fn name(&self) -> &'static str {
        match self {
            Kind::Simulate => "simulate",
            Kind::Diffusivity => "diffusivity",
            Kind::Variance => "variance",
            Kind::Hierarchy => "hierarchy",
            Kind::Mct => "mct",
            Kind::Check => "check",
        }
    }
}

/// A test function on the lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSpec {
    /// The constant function, probing the zero mode.
    E0,
    /// A radial profile dilated by `scale`.
    Profile {
        id: String,
        profile: Profile,
        scale: f64,
        #[serde(default)]
        zero: Option<f64>,
    },
    /// `amp e_k + conj(amp) e_{-k}`.
    Mode { id: String, k: [i32; 2], re: f64, im: f64 },
}

impl PhiSpec {
    pub fn build(&self, lattice: &Arc<ModeLattice>) -> Result<TestFunction> {
        Ok(match self {
            PhiSpec::E0 => TestFunction::e0(lattice.clone()),
            PhiSpec::Profile { id, profile, scale, zero } => {
                let mut f = TestFunction::from_profile(id.clone(), lattice.clone(), *profile, *scale)?;
                if let Some(z) = zero {
                    f.zero = *z;
                }
                f
            }
            PhiSpec::Mode { id, k, re, im } => {
                TestFunction::single_mode(id.clone(), lattice.clone(), Mode(k[0], k[1]), Complex64::new(*re, *im))?
            }
        })
    }
}

fn default_e0() -> PhiSpec {
    PhiSpec::E0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffusivityConfig {
    /// Big-torus times at which `D(t)` is reported.
    pub t_grid: Vec<f64>,
    /// Laplace variables for `D(mu)`.
    #[serde(default)]
    pub mu: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarianceConfig {
    /// The profile is dilated by `eps * N`.
    #[serde(default = "one")]
    pub eps: f64,
    pub profile: Profile,
    pub t_grid: Vec<f64>,
    #[serde(default)]
    pub mu: Vec<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchyConfig {
    pub cutoff_n: u32,
    pub lambda: f64,
    pub mu: Vec<f64>,
    pub n_list: Vec<usize>,
    #[serde(default = "default_e0")]
    pub phi: PhiSpec,
    /// Largest Schur index checked for positivity; 0 skips the check.
    #[serde(default)]
    pub positivity_k_max: usize,
    #[serde(default)]
    pub probe: Option<ProbeConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub levels: Vec<usize>,
    #[serde(default = "default_vectors")]
    pub n_test_vectors: usize,
    #[serde(default = "one")]
    pub schur_k: f64,
}

fn default_vectors() -> usize {
    100
}

impl ProbeConfig {
    pub fn params(&self, h: &HierarchyConfig) -> MultiplierParams {
        let mut p = MultiplierParams::new(h.lambda, 1.0, self.levels.first().copied().unwrap_or(3), h.cutoff_n);
        p.schur_k = self.schur_k;
        p
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MctSection {
    pub closure: MctConfig,
    #[serde(default)]
    pub window: FitWindow,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    /// Criterion numbers to run; empty runs all.
    #[serde(default)]
    pub only: Vec<u32>,
}

fn default_trajectories() -> u64 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kind: Kind,
    #[serde(default = "default_trajectories")]
    pub n_trajectories: u64,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; does not affect any output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimConfig>,
    #[serde(default = "default_phis")]
    pub phi: Vec<PhiSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diffusivity: Option<DiffusivityConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance: Option<VarianceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hierarchy: Option<HierarchyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mct: Option<MctSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckConfig>,
}

fn default_phis() -> Vec<PhiSpec> {
    vec![PhiSpec::E0]
}

impl RunConfig {
    pub fn new(kind: Kind) -> Self {
        Self {
            kind,
            n_trajectories: 1,
            seed: 0,
            jobs: None,
            out: None,
            sim: None,
            phi: default_phis(),
            diffusivity: None,
            variance: None,
            hierarchy: None,
            mct: None,
            check: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let missing = |s: &str| Err(HarnessError::Config(format!("kind `{}` needs a [{s}] section", self.kind.name())));
        let needs_sim = matches!(self.kind, Kind::Simulate | Kind::Diffusivity | Kind::Variance);
        if needs_sim {
            match &self.sim {
                None => return missing("sim"),
                Some(s) => s.validate()?,
            }
            if self.n_trajectories == 0 {
                return Err(HarnessError::Config("n_trajectories must be positive".into()));
            }
        }
        match self.kind {
            Kind::Diffusivity if self.diffusivity.is_none() => return missing("diffusivity"),
            Kind::Variance if self.variance.is_none() => return missing("variance"),
            Kind::Hierarchy if self.hierarchy.is_none() => return missing("hierarchy"),
            Kind::Mct => match &self.mct {
                None => return missing("mct"),
                Some(m) => m.closure.validate()?,
            },
            _ => {}
        }
        if self.jobs == Some(0) {
            return Err(HarnessError::Config("jobs must be positive".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, ignoring `jobs` and `out`.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.jobs = None;
        c.out = None;
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// The configuration with every default filled in, as TOML.
    pub fn echo(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

/// Reads a TOML config, or the config embedded in a JSON run manifest.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let cfg = if path.extension().is_some_and(|e| e == "json") {
        let m: crate::manifest::RunManifest =
            serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        m.config
    } else {
        parse_config_str(&text).map_err(|e| match e {
            HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "kind = \"simulate\"\n[sim]\ncutoff_n = 2\nlambda = 1.0\ndt = 0.05\nt_final = 1.0\n";

    #[test]
    fn hash_ignores_jobs_and_out() {
        let a = parse_config_str(MINIMAL).unwrap();
        let mut b = a.clone();
        b.jobs = Some(7);
        b.out = Some("elsewhere".into());
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn echo_round_trips() {
        let a = parse_config_str(MINIMAL).unwrap();
        let echo = a.echo();
        assert!(echo.contains("record_stride = 1"), "{echo}");
        assert_eq!(parse_config_str(&echo).unwrap(), a);
    }

    #[test]
    fn sections_are_required_per_kind() {
        for kind in ["diffusivity", "variance", "hierarchy", "mct"] {
            let e = parse_config_str(&MINIMAL.replace("simulate", kind)).unwrap_err().to_string();
            assert!(e.contains(&format!("needs a [{kind}] section")), "{e}");
        }
        let e = parse_config_str("kind = \"simulate\"\n").unwrap_err().to_string();
        assert!(e.contains("[sim]"), "{e}");
        assert!(parse_config_str("kind = \"check\"\n").is_ok());
    }
}
