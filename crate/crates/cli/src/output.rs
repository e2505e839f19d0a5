use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use toml::{Table, Value};

use crate::CliError;

/// A CSV table written with a leading `# config_hash=` comment line.
pub struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, config_hash: &str) -> String {
        let mut out = format!("# config_hash={config_hash}\n{}\n", self.header.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

/// Shortest round-trip representation, so reruns are byte-identical.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

/// Output directory of a run plus the files written into it.
pub struct RunOutput {
    dir: PathBuf,
    hash: String,
    files: Vec<String>,
}

impl RunOutput {
    pub fn create(dir: &Path, hash: String) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            hash,
            files: Vec::new(),
        })
    }

    pub fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    pub fn write_csv(&mut self, name: &str, table: &Csv) -> Result<(), CliError> {
        let text = table.render(&self.hash);
        let path = self.path(name);
        fs::write(&path, text).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
    }

    /// Writes `meta.toml` describing the run.
    pub fn finish(mut self, command: &str, config: &str, extra: Table) -> Result<(), CliError> {
        let mut meta = Table::new();
        meta.insert("command".into(), Value::String(command.into()));
        meta.insert("config_hash".into(), Value::String(self.hash.clone()));
        meta.insert("version".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
        let files = self.files.iter().cloned().map(Value::String).collect();
        meta.insert("outputs".into(), Value::Array(files));
        let config: Table = toml::from_str(config).expect("run config reparses");
        meta.insert("config".into(), Value::Table(config));
        for (k, v) in extra {
            meta.insert(k, v);
        }
        let text = toml::to_string(&meta).expect("metadata serializes");
        let path = self.path("meta.toml");
        fs::write(&path, text).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
    }
}
