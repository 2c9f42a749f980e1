use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;

/// Marks errors caused by bad user input; `main` maps these to exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

impl From<qhop_core::Error> for ConfigError {
    fn from(e: qhop_core::Error) -> Self {
        ConfigError(e.to_string())
    }
}

pub fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

pub struct OutDir(PathBuf);

impl OutDir {
    pub fn create(path: &Path) -> Result<Self> {
        std::fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))?;
        Ok(Self(path.to_path_buf()))
    }

    pub fn root(&self) -> &Path {
        &self.0
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    pub fn write<F>(&self, name: &str, body: F) -> Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> qhop_core::Result<()>,
    {
        let path = self.path(name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        body(&mut w).with_context(|| format!("writing {}", path.display()))?;
        w.flush()?;
        Ok(())
    }

    pub fn run_json<C: Serialize>(&self, command: &str, config: &C, started: Instant) -> Result<()> {
        let meta = json!({
            "command": command,
            "version": qhop_core::VERSION,
            "config": config,
            "duration_s": started.elapsed().as_secs_f64(),
        });
        self.write("run.json", |w| {
            serde_json::to_writer_pretty(&mut *w, &meta)?;
            writeln!(w)?;
            Ok(())
        })
    }
}

pub fn summary(value: serde_json::Value) {
    println!("{value}");
}
