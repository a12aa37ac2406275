//! Output directory handling and the run manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use stackq::Result;

pub const MANIFEST: &str = "run_manifest.json";

pub struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, content: &str) -> Result<()> {
        std::fs::write(self.dir.join(name), content)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

#[derive(Serialize)]
pub struct RunManifest<'a> {
    pub command: &'a str,
    pub device: String,
    pub overrides: serde_json::Value,
    pub seed: u64,
    pub output_dir: String,
    pub version: &'static str,
    pub runtime_s: f64,
    pub outputs: &'a [String],
}

pub fn write_manifest(
    out: &Output,
    command: &str,
    device: Option<&Path>,
    overrides: serde_json::Value,
    seed: u64,
    started: Instant,
) -> Result<()> {
    let manifest = RunManifest {
        command,
        device: device
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| "paper-like (built in)".into()),
        overrides,
        seed,
        output_dir: out.dir().display().to_string(),
        version: env!("CARGO_PKG_VERSION"),
        runtime_s: started.elapsed().as_secs_f64(),
        outputs: out.files(),
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(out.dir().join(MANIFEST), text)?;
    Ok(())
}

/// CSV with a header row; numbers use Rust's shortest round-trip form.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}
