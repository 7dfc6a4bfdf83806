//! On-disk formats: binary snapshots, the diagnostics CSV and run
//! directories.
//!
//! Snapshot layout, all little-endian:
//!
//! ```text
//! "THPF"  u32 version = 1  u32 nx  u32 ny  f64 lx  f64 ly  f64 t
//! u1 u2 phi mu theta p     each nx*ny f64, row-major (index j*nx + i)
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::{Config, ConfigError};
use crate::grid::{Grid, ScalarField, VectorField};
use crate::sim::{State, Trajectory};
use crate::thermo_audit::{diagnostics, BoundReport, DiagRecord};

pub const MAGIC: &[u8; 4] = b"THPF";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 4 + 8 + 8 + 8;

/// File name of the canonical config copy inside a run directory.
pub const CONFIG_FILE: &str = "config.cfg";
pub const BOUNDS_FILE: &str = "bounds.csv";
const SNAPSHOT_EXT: &str = "thpf";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: not a snapshot file (bad magic)")]
    BadMagic { path: PathBuf },
    #[error("{path}: unsupported snapshot version {version}")]
    UnsupportedVersion { path: PathBuf, version: u32 },
    #[error("{path}: corrupt snapshot: {reason}")]
    Corrupt { path: PathBuf, reason: String },
    #[error("{path}:{line}: {message}")]
    Csv {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("no diagnostics records to write")]
    EmptyRecords,
    #[error("{path}: {source}")]
    Config {
        path: PathBuf,
        #[source]
        source: ConfigError,
    },
    #[error("{path}: no snapshots found")]
    NoSnapshots { path: PathBuf },
    #[error(transparent)]
    Core(#[from] crate::error::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn encode_snapshot(state: &State, g: &Grid) -> Result<Vec<u8>, IoError> {
    state.check(g)?;
    let n = g.len();
    let mut buf = Vec::with_capacity(HEADER_LEN + 6 * 8 * n);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(g.nx() as u32).to_le_bytes());
    buf.extend_from_slice(&(g.ny() as u32).to_le_bytes());
    for v in [g.lx(), g.ly(), state.t] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for f in [&state.u.x, &state.u.y, &state.phi, &state.mu, &state.theta, &state.p] {
        for v in f.values() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(buf)
}

pub fn decode_snapshot(bytes: &[u8], path: &Path) -> Result<(Grid, State), IoError> {
    let corrupt = |reason: String| IoError::Corrupt {
        path: path.to_path_buf(),
        reason,
    };
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        if bytes.len() < 4 && MAGIC.starts_with(bytes) {
            return Err(corrupt(format!("truncated header ({} bytes)", bytes.len())));
        }
        return Err(IoError::BadMagic {
            path: path.to_path_buf(),
        });
    }
    if bytes.len() < HEADER_LEN {
        return Err(corrupt(format!("truncated header ({} bytes)", bytes.len())));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
    let version = u32_at(4);
    if version != VERSION {
        return Err(IoError::UnsupportedVersion {
            path: path.to_path_buf(),
            version,
        });
    }
    let (nx, ny) = (u32_at(8) as usize, u32_at(12) as usize);
    let (lx, ly, t) = (f64_at(16), f64_at(24), f64_at(32));
    let g = Grid::new(nx, ny, lx, ly).map_err(|e| corrupt(e.to_string()))?;
    let n = nx * ny;
    let expected = HEADER_LEN + 6 * 8 * n;
    if bytes.len() != expected {
        return Err(corrupt(format!("expected {expected} bytes, found {}", bytes.len())));
    }
    if !t.is_finite() {
        return Err(corrupt("non-finite time".into()));
    }
    let mut fields = (0..6).map(|k| {
        let start = HEADER_LEN + k * 8 * n;
        let values = (0..n).map(|i| f64_at(start + 8 * i)).collect();
        ScalarField::from_values(&g, values).expect("sized from header")
    });
    let mut next = || fields.next().expect("six fields");
    let u = VectorField::new(next(), next());
    let state = State {
        t,
        u,
        phi: next(),
        mu: next(),
        theta: next(),
        p: next(),
    };
    Ok((g, state))
}

pub fn write_snapshot(state: &State, g: &Grid, path: &Path) -> Result<(), IoError> {
    let bytes = encode_snapshot(state, g)?;
    fs::write(path, bytes).map_err(io_err(path))
}

pub fn read_snapshot(path: &Path) -> Result<(Grid, State), IoError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    decode_snapshot(&bytes, path)
}

/// Seventeen significant digits, enough to round-trip any `f64`.
fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn format_diagnostics(records: &[DiagRecord]) -> Result<String, IoError> {
    if records.is_empty() {
        return Err(IoError::EmptyRecords);
    }
    let mut out = DiagRecord::HEADER.join(",");
    out.push('\n');
    for r in records {
        let row: Vec<String> = r.values().iter().map(|&v| sci(v)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_diagnostics(text: &str, path: &Path) -> Result<Vec<DiagRecord>, IoError> {
    let err = |line: usize, message: String| IoError::Csv {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    let header = lines.next().map(|(_, l)| l).unwrap_or_default();
    if header != DiagRecord::HEADER.join(",") {
        return Err(err(1, format!("unexpected header '{header}'")));
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != DiagRecord::HEADER.len() {
            return Err(err(idx + 1, format!("expected {} columns, found {}", DiagRecord::HEADER.len(), cols.len())));
        }
        let mut v = [0.0; 14];
        for (slot, c) in v.iter_mut().zip(&cols) {
            *slot = c
                .parse()
                .map_err(|_| err(idx + 1, format!("bad number '{c}'")))?;
        }
        records.push(DiagRecord::from_values(v));
    }
    Ok(records)
}

pub fn write_diagnostics(records: &[DiagRecord], path: &Path) -> Result<(), IoError> {
    let text = format_diagnostics(records)?;
    fs::write(path, text).map_err(io_err(path))
}

pub fn read_diagnostics(path: &Path) -> Result<Vec<DiagRecord>, IoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_diagnostics(&text, path)
}

pub fn format_bounds(b: &BoundReport) -> String {
    let mut out = String::from("norm,value\n");
    for (name, v) in b.entries() {
        out.push_str(&format!("{name},{}\n", sci(v)));
    }
    out
}

pub fn snapshot_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("snap_{index:06}.{SNAPSHOT_EXT}"))
}

/// Writes the canonical config, every snapshot, the diagnostics CSV and
/// the bound report into `dir`, creating it if needed.
pub fn write_run(traj: &Trajectory, cfg: &Config, dir: &Path) -> Result<(), IoError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let cfg_path = dir.join(CONFIG_FILE);
    fs::write(&cfg_path, cfg.to_text()).map_err(io_err(&cfg_path))?;
    for (k, snap) in traj.snapshots().iter().enumerate() {
        write_snapshot(&snap.state, traj.grid(), &snapshot_path(dir, k))?;
    }
    write_diagnostics(traj.diagnostics(), &dir.join(&cfg.output.diag_file))?;
    if let Some(b) = traj.bounds() {
        let path = dir.join(BOUNDS_FILE);
        let mut f = fs::File::create(&path).map_err(io_err(&path))?;
        f.write_all(format_bounds(b).as_bytes()).map_err(io_err(&path))?;
    }
    Ok(())
}

/// Rebuilds a trajectory from a run directory: the config copy supplies
/// the parameters, the snapshots are read in file-name order and their
/// diagnostics recomputed. Only snapshot rows are available, so the
/// per-step diagnostics of the original run are not reproduced.
pub fn read_run(dir: &Path) -> Result<(Config, Trajectory), IoError> {
    let cfg_path = dir.join(CONFIG_FILE);
    let text = fs::read_to_string(&cfg_path).map_err(io_err(&cfg_path))?;
    let cfg = Config::parse(&text).map_err(|source| IoError::Config {
        path: cfg_path.clone(),
        source,
    })?;
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == SNAPSHOT_EXT))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(IoError::NoSnapshots {
            path: dir.to_path_buf(),
        });
    }
    let params = cfg.params();
    let mut traj: Option<Trajectory> = None;
    let mut prev_t = None;
    for path in &files {
        let (g, state) = read_snapshot(path)?;
        let t = traj.get_or_insert_with(|| Trajectory::new(g.clone(), params, cfg.fingerprint()));
        if t.grid() != &g {
            return Err(IoError::Corrupt {
                path: path.clone(),
                reason: "grid differs from earlier snapshots".into(),
            });
        }
        let mut record = diagnostics(&state, &g, &params)?;
        // the step size itself is not stored; the configured one bounds it
        record.dt = prev_t.map_or(cfg.time.dt, |p: f64| (state.t - p).min(cfg.time.dt));
        prev_t = Some(state.t);
        t.push_record(record);
        t.push_snapshot(state, record).map_err(|_| IoError::Corrupt {
            path: path.clone(),
            reason: "snapshot times are not increasing".into(),
        })?;
    }
    let mut traj = traj.expect("at least one snapshot");
    traj.finish()?;
    Ok((cfg, traj))
}
