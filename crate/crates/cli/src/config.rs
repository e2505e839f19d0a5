use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use treeten::funcbuild::FunctionSpec;

use crate::CliError;

/// Parameters of one run, read from a TOML document and overridden by
/// command-line flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree_spec: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi_list: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweeps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Inline function description, used instead of a named target.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionSpec>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `other` replace those of `self`.
    pub fn merge(self, other: RunConfig) -> RunConfig {
        RunConfig {
            tree: other.tree.or(self.tree),
            tree_spec: other.tree_spec.or(self.tree_spec),
            target: other.target.or(self.target),
            levels: other.levels.or(self.levels),
            n: other.n.or(self.n),
            chi_list: other.chi_list.or(self.chi_list),
            tol: other.tol.or(self.tol),
            sweeps: other.sweeps.or(self.sweeps),
            iters: other.iters.or(self.iters),
            seed: other.seed.or(self.seed),
            samples: other.samples.or(self.samples),
            out: other.out.or(self.out),
            function: other.function.or(self.function),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("L", self.levels),
            ("n", self.n),
            ("sweeps", self.sweeps),
            ("iters", self.iters),
            ("samples", self.samples),
        ];
        for (name, value) in positive {
            if value == Some(0) {
                return Err(CliError::Config(format!("{name} must be positive")));
            }
        }
        if let Some(chis) = &self.chi_list {
            if chis.is_empty() || chis.contains(&0) {
                return Err(CliError::Config("chi-list entries must be positive".into()));
            }
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(CliError::Config("tol must be positive".into()));
            }
        }
        if self.target.is_some() && self.function.is_some() {
            return Err(CliError::Config("give either a target or a function, not both".into()));
        }
        if self.tree.is_some() && self.tree_spec.is_some() {
            return Err(CliError::Config("give either a tree or a tree spec, not both".into()));
        }
        Ok(())
    }

    pub fn require_seed(&self) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::Config("this command samples randomly and needs --seed".into()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    /// SHA-256 over the command, the configuration without its output path
    /// and the contents of any referenced tree spec.
    pub fn hash(&self, command: &str) -> Result<String, CliError> {
        let mut canonical = self.clone();
        canonical.out = None;
        let mut hasher = Sha256::new();
        hasher.update(command.as_bytes());
        hasher.update(b"\n");
        hasher.update(canonical.to_toml().as_bytes());
        if let Some(path) = &self.tree_spec {
            let text = std::fs::read(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            hasher.update(&text);
        }
        Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: RunConfig = toml::from_str("tree = \"comb\"\nL = 8\nseed = 1\n").unwrap();
        let flags = RunConfig {
            levels: Some(12),
            ..Default::default()
        };
        let merged = file.merge(flags);
        assert_eq!(merged.tree.as_deref(), Some("comb"));
        assert_eq!(merged.levels, Some(12));
        assert_eq!(merged.seed, Some(1));
    }

    #[test]
    fn function_table_round_trips() {
        let text = "tree = \"comb\"\n[function]\nkind = \"constant\"\nc = 1.0\n";
        let cfg: RunConfig = toml::from_str(text).unwrap();
        assert!(cfg.function.is_some());
        let again: RunConfig = toml::from_str(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn hash_ignores_output_path() {
        let a = RunConfig {
            target: Some("cosh".into()),
            out: Some("a".into()),
            ..Default::default()
        };
        let b = RunConfig {
            out: Some("b".into()),
            ..a.clone()
        };
        assert_eq!(a.hash("tci").unwrap(), b.hash("tci").unwrap());
        assert_ne!(a.hash("tci").unwrap(), a.hash("mi").unwrap());
        assert_eq!(a.hash("tci").unwrap().len(), 64);
    }

    #[test]
    fn rejects_nonpositive_values() {
        let cfg = RunConfig {
            levels: Some(0),
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = RunConfig {
            chi_list: Some(vec![2, 0]),
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        assert!(toml::from_str::<RunConfig>("bogus = 1").is_err());
    }
}
