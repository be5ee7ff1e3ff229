//! Optional on-disk memo of propagator symbol tables, enabled by pointing
//! `DWLAB_CACHE` at a directory.

use std::fs;
use std::path::PathBuf;

use dwlab_core::harness::config_digest;
use dwlab_core::propagator::{propagator_multiplier, PropagatorKind};
use dwlab_core::spectral::{Grid, Multiplier};
use dwlab_core::Result;
use num_complex::Complex64;

fn path_for(dir: &str, grid: Grid, kind: PropagatorKind, t: f64) -> PathBuf {
    let key = config_digest(&(grid, kind, t.to_bits()));
    PathBuf::from(dir).join(format!("sym_{}.bin", &key[..32]))
}

fn decode(bytes: &[u8], len: usize) -> Option<Vec<Complex64>> {
    if bytes.len() != 16 * len {
        return None;
    }
    let f = |c: &[u8]| f64::from_le_bytes(c.try_into().expect("8 bytes"));
    Some(bytes.chunks_exact(16).map(|c| Complex64::new(f(&c[..8]), f(&c[8..]))).collect())
}

/// The symbol table of `kind(t)` on `grid`, read from or written to the cache.
/// Unreadable or mismatched entries are recomputed and overwritten.
pub fn multiplier(grid: Grid, kind: PropagatorKind, t: f64) -> Result<Multiplier> {
    let Ok(dir) = std::env::var("DWLAB_CACHE") else {
        return propagator_multiplier(grid, kind, t);
    };
    let path = path_for(&dir, grid, kind, t);
    if let Some(values) = fs::read(&path).ok().and_then(|b| decode(&b, grid.len())) {
        return Ok(Multiplier { grid, values, label: format!("{kind:?}({t})") });
    }
    let m = propagator_multiplier(grid, kind, t)?;
    let mut bytes = Vec::with_capacity(16 * m.values.len());
    for v in &m.values {
        bytes.extend_from_slice(&v.re.to_le_bytes());
        bytes.extend_from_slice(&v.im.to_le_bytes());
    }
    fs::create_dir_all(&dir)?;
    fs::write(&path, bytes)?;
    Ok(m)
}
