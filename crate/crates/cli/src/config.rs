//! `key = value` configuration with `[section]` headers. Every section is
//! optional and every key has a default; unknown sections and keys are
//! rejected with their line and column.

use crate::CliError;
use serde::Deserialize;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub run: RunSection,
    #[serde(default, rename = "mepacket-evolve")]
    pub mepacket_evolve: EvolveConfig,
    #[serde(default, rename = "chain-scaling")]
    pub chain_scaling: ChainConfig,
    #[serde(default, rename = "bcl-report")]
    pub bcl_report: BclConfig,
    #[serde(default, rename = "trigger-report")]
    pub trigger_report: TriggerConfig,
    #[serde(default, rename = "jointqp-convergence")]
    pub jointqp_convergence: JointConfig,
    #[serde(default, rename = "locality-check")]
    pub locality_check: LocalityConfig,
    #[serde(default, rename = "classical-limit-table")]
    pub classical_limit_table: ClassicalLimitConfig,
    #[serde(default, rename = "entanglement-demo")]
    pub entanglement_demo: EntanglementConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveConfig {
    pub q: f64,
    pub p: f64,
    pub dq: f64,
    pub dp: f64,
    pub hbar: f64,
    pub v: f64,
    pub mu: f64,
    /// Stiffness of the harmonic preset.
    pub v2: f64,
    pub t_max: f64,
    pub n_times: usize,
    pub samples: usize,
    pub fock_tol: f64,
    pub z_max: f64,
    pub spread_tol: f64,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            q: 1.0,
            p: 0.0,
            dq: 1.0,
            dp: 1.0,
            hbar: 1.0,
            v: 2.0 * PI,
            mu: 1.0,
            v2: 1.0,
            t_max: 4.0 * PI,
            n_times: 33,
            samples: 100_000,
            fock_tol: 1e-6,
            z_max: 3.0,
            spread_tol: 1e-12,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainConfig {
    pub mu: f64,
    pub kappa: f64,
    pub xi: f64,
    pub lambda: f64,
    pub hbar: f64,
    /// Chain sizes `2^k` for `k` in `[log2_n_min, log2_n_max]`.
    pub log2_n_min: u32,
    pub log2_n_max: u32,
    pub length_tol: f64,
    pub slope_tol: f64,
    pub prefactor_tol: f64,
    pub oracle_levels: usize,
    pub oracle_tol: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            mu: 1.0,
            kappa: 1.0,
            xi: 1.0,
            lambda: 1.0,
            hbar: 1.0,
            log2_n_min: 6,
            log2_n_max: 12,
            length_tol: 1e-12,
            slope_tol: 0.02,
            prefactor_tol: 0.05,
            oracle_levels: 40,
            oracle_tol: 1e-8,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BclConfig {
    /// JSON spec for the single-instance report; a random spec when absent.
    pub spec: Option<PathBuf>,
    pub trials: usize,
    pub completions: usize,
    pub tol: f64,
    pub generic_violation: f64,
    pub generic_min_fraction: f64,
}

impl Default for BclConfig {
    fn default() -> Self {
        Self { spec: None, trials: 100, completions: 5, tol: 1e-12, generic_violation: 0.1, generic_min_fraction: 0.95 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TriggerConfig {
    pub models: usize,
    pub max_dim: usize,
    pub prop22_tol: f64,
    pub prop23_trials: usize,
    pub prop23_tol: f64,
    pub control_threshold: f64,
    pub control_fraction: f64,
}

impl Default for TriggerConfig {
    fn default() -> Self {
        Self {
            models: 50,
            max_dim: 6,
            prop22_tol: 1e-12,
            prop23_trials: 100,
            prop23_tol: 1e-10,
            control_threshold: 1e-3,
            control_fraction: 0.9,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JointConfig {
    pub n: usize,
    pub dx: f64,
    pub hbar: f64,
    pub sigma: f64,
    /// System packet: position, momentum, position width.
    pub q: f64,
    pub p: f64,
    pub dq: f64,
    pub a_step: usize,
    pub b_step: usize,
    pub a_cells: usize,
    pub b_cells: usize,
    pub halvings: usize,
    pub sum_tol: f64,
    pub moment_tol: f64,
}

impl Default for JointConfig {
    fn default() -> Self {
        Self {
            n: 256,
            dx: 0.1,
            hbar: 1.0,
            sigma: 1.0,
            q: 0.7,
            p: -0.4,
            dq: 0.8,
            a_step: 16,
            b_step: 8,
            a_cells: 6,
            b_cells: 6,
            halvings: 3,
            sum_tol: 1e-8,
            moment_tol: 1e-6,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalityConfig {
    pub n: usize,
    pub extent: f64,
    pub hbar: f64,
    /// Regions `[d1_lo, d1_hi)` and `[d2_lo, d2_hi)`.
    pub d1_lo: f64,
    pub d1_hi: f64,
    pub d2_lo: f64,
    pub d2_hi: f64,
    pub q1: f64,
    pub p1: f64,
    pub dq1: f64,
    pub q2: f64,
    pub p2: f64,
    pub dq2: f64,
    /// Position cell of the effect, inside the first region.
    pub cell_lo: f64,
    pub cell_hi: f64,
    pub tol: f64,
    pub norm_tol: f64,
}

impl Default for LocalityConfig {
    fn default() -> Self {
        Self {
            n: 256,
            extent: 24.0,
            hbar: 1.0,
            d1_lo: -11.0,
            d1_hi: -1.0,
            d2_lo: 1.0,
            d2_hi: 11.0,
            q1: -6.0,
            p1: 0.4,
            dq1: 1.0,
            q2: 6.0,
            p2: -0.3,
            dq2: 1.2,
            cell_lo: -7.0,
            cell_hi: -5.5,
            tol: 1e-8,
            norm_tol: 1e-10,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassicalLimitConfig {
    pub nus: Vec<f64>,
    pub tol_nu100: f64,
    pub tol_nu3: f64,
    pub identity_tol: f64,
}

impl Default for ClassicalLimitConfig {
    fn default() -> Self {
        Self {
            nus: vec![1.5, 2.0, 3.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0],
            tol_nu100: 2e-5,
            tol_nu3: 0.021,
            identity_tol: 1e-12,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntanglementConfig {
    /// Eigenvalues `a₁, b₁` of `A₁` and `a₂, b₂` of `A₂`.
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
    pub tol: f64,
}

impl Default for EntanglementConfig {
    fn default() -> Self {
        Self { a1: 0.3, b1: 1.7, a2: -1.0, b2: 2.5, tol: 1e-12 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = ConfigFile::parse("").unwrap();
        assert_eq!(c.mepacket_evolve.n_times, 33);
        assert!(c.run.seed.is_none());
    }

    #[test]
    fn sections_and_keys() {
        let c = ConfigFile::parse("[run]\nseed = 4\n\n[chain-scaling]\nlambda = 0.5\n").unwrap();
        assert_eq!(c.run.seed, Some(4));
        assert_eq!(c.chain_scaling.lambda, 0.5);
        assert_eq!(c.chain_scaling.kappa, 1.0);
    }

    #[test]
    fn unknown_key_reports_location() {
        let err = ConfigFile::parse("[run]\nseed = 1\n\n[chain-scaling]\nlamda = 0.5\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("lamda") && msg.contains("line 5"), "{msg}");
        assert!(ConfigFile::parse("[nonsense]\nx = 1\n").is_err());
    }
}
