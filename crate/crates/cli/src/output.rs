use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Header row from the field names, floats in shortest round-trip form.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Explicit header, for tables whose column names are chosen at run time.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Wall-clock per phase, echoed to stderr and saved as `timing.json`.
pub struct Timer {
    phases: BTreeMap<String, f64>,
    echo: bool,
}

impl Default for Timer {
    fn default() -> Self {
        Timer { phases: BTreeMap::new(), echo: true }
    }
}

impl Timer {
    pub fn quiet() -> Self {
        Timer { phases: BTreeMap::new(), echo: false }
    }

    pub fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        let secs = start.elapsed().as_secs_f64();
        if self.echo {
            eprintln!("phase {phase}: {secs:.4} s");
        }
        *self.phases.entry(phase.to_string()).or_default() += secs;
        out
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join("timing.json"), &self.phases)
    }
}
