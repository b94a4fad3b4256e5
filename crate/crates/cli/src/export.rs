use std::path::{Path, PathBuf};

use anyhow::Context;

use orbitact_core::orbit_file::OrbitFile;

#[derive(Debug)]
pub struct ExportOutcome {
    pub path: PathBuf,
    pub rows: usize,
}

/// Writes `n_samples` uniformly spaced positions over `[0, T)` as CSV.
///
/// Columns are `t` followed by `x<i>_<d>` (body `i`, axis `d`, both from
/// zero); the header carries the units. Defaults to the orbit path with a
/// `.csv` extension.
pub fn export_trajectory(orbit_path: &Path, n_samples: usize, out: Option<&Path>) -> anyhow::Result<ExportOutcome> {
    if n_samples == 0 {
        anyhow::bail!("export needs at least one sample");
    }
    let file = OrbitFile::load(orbit_path)?;
    let lp = &file.orbit;
    let path = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| orbit_path.with_extension("csv"));
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;

    let mut header = vec!["t [time]".to_string()];
    for i in 0..lp.n_bodies() {
        for d in 0..lp.dim() {
            header.push(format!("x{i}_{d} [length]"));
        }
    }
    w.write_record(&header)?;
    for j in 0..n_samples {
        let t = j as f64 * lp.period() / n_samples as f64;
        let mut row = vec![t.to_string()];
        for i in 0..lp.n_bodies() {
            row.extend(lp.position(i, t).iter().map(f64::to_string));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(ExportOutcome { path, rows: n_samples })
}
