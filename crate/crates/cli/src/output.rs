use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

/// A run directory. Files are written as they are produced; `finish` (also
/// called on drop) lists them with their hashes in `MANIFEST`.
pub struct RunDir {
    root: PathBuf,
    files: Vec<String>,
    finished: bool,
}

impl RunDir {
    /// Creates the directory and writes `config.echo.json`.
    pub fn create(root: &Path, config: &ExperimentConfig) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        let mut dir = Self { root: root.to_path_buf(), files: Vec::new(), finished: false };
        let mut echo = serde_json::to_string_pretty(config)?;
        echo.push('\n');
        dir.write("config.echo.json", &echo)?;
        Ok(dir)
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.root.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        Ok(())
    }

    pub fn finish(&mut self) -> Result<()> {
        if self.finished {
            return Ok(());
        }
        self.finished = true;
        let mut names = self.files.clone();
        names.sort();
        let mut manifest = String::new();
        for name in names {
            let bytes = fs::read(self.root.join(&name))?;
            manifest.push_str(&format!("{}  {}\n", hex::encode(Sha256::digest(&bytes)), name));
        }
        fs::write(self.root.join("MANIFEST"), manifest).context("writing MANIFEST")
    }
}

impl Drop for RunDir {
    fn drop(&mut self) {
        if let Err(e) = self.finish() {
            log::error!("could not write MANIFEST: {e:#}");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_lists_sorted_hashes() {
        let tmp = tempfile::tempdir().unwrap();
        let mut d = RunDir::create(tmp.path(), &ExperimentConfig::default()).unwrap();
        d.write("b.csv", "x\n").unwrap();
        d.write("a.csv", "").unwrap();
        d.finish().unwrap();
        let m = fs::read_to_string(tmp.path().join("MANIFEST")).unwrap();
        let names: Vec<&str> = m.lines().map(|l| l.split("  ").nth(1).unwrap()).collect();
        assert_eq!(names, ["a.csv", "b.csv", "config.echo.json"]);
        // sha256 of the empty string
        assert!(m.starts_with("e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855  a.csv"));
    }
}
