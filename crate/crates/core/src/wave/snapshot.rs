use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::grid::Lattice;
use crate::error::{Error, Result};

/// JSON sidecar written next to each binary snapshot.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub t: f64,
    pub h: f64,
    #[serde(rename = "L")]
    pub half_width: f64,
    pub epsilon: f64,
    pub nx: usize,
    pub ny: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
}

/// Time-ordered snapshots of one run, held in memory.
#[derive(Clone, Debug)]
pub struct SnapshotStore {
    pub lattice: Lattice,
    pub epsilon: f64,
    snaps: Vec<Snapshot>,
}

impl SnapshotStore {
    pub fn new(lattice: Lattice, epsilon: f64) -> Self {
        Self {
            lattice,
            epsilon,
            snaps: Vec::new(),
        }
    }

    /// Inserts keeping time order; a snapshot at an already stored time replaces it.
    pub fn push(&mut self, t: f64, u: Vec<f64>) {
        assert_eq!(u.len(), self.lattice.len());
        let pos = self.snaps.partition_point(|s| s.t < t);
        if pos < self.snaps.len() && (self.snaps[pos].t - t).abs() <= 1e-12 {
            self.snaps[pos] = Snapshot { t, u };
        } else {
            self.snaps.insert(pos, Snapshot { t, u });
        }
    }

    pub fn len(&self) -> usize {
        self.snaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snaps.is_empty()
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snaps
    }

    pub fn times(&self) -> Vec<f64> {
        self.snaps.iter().map(|s| s.t).collect()
    }

    pub fn t_range(&self) -> (f64, f64) {
        match (self.snaps.first(), self.snaps.last()) {
            (Some(a), Some(b)) => (a.t, b.t),
            _ => (f64::NAN, f64::NAN),
        }
    }

    /// Indices of the (up to) four snapshots used for cubic interpolation at `t`.
    pub fn stencil(&self, t: f64) -> Result<[usize; 4]> {
        let n = self.snaps.len();
        let (lo, hi) = self.t_range();
        if n < 4 || !(t >= lo - 1e-12 && t <= hi + 1e-12) {
            return Err(Error::InsufficientSnapshots { t, lo, hi });
        }
        let k = self.snaps.partition_point(|s| s.t <= t).clamp(1, n - 1) - 1;
        let start = k.saturating_sub(1).min(n - 4);
        Ok([start, start + 1, start + 2, start + 3])
    }

    fn header(&self, t: f64) -> SnapshotHeader {
        SnapshotHeader {
            t,
            h: self.lattice.h,
            half_width: self.lattice.half_width(),
            epsilon: self.epsilon,
            nx: self.lattice.nx,
            ny: self.lattice.ny,
        }
    }

    /// Writes `snap_NNNNN.bin` (little-endian f64) and `snap_NNNNN.json` per snapshot.
    pub fn save(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(Error::io(dir))?;
        let mut paths = Vec::with_capacity(self.snaps.len());
        for (n, s) in self.snaps.iter().enumerate() {
            let bin = dir.join(format!("snap_{n:05}.bin"));
            write_snapshot(&bin, &self.header(s.t), &s.u)?;
            paths.push(bin);
        }
        Ok(paths)
    }

    /// Loads every `snap_*.bin` in `dir`.
    pub fn load(dir: &Path) -> Result<Self> {
        let mut bins: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(Error::io(dir))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.extension().is_some_and(|e| e == "bin")
                    && p.file_name().is_some_and(|f| f.to_string_lossy().starts_with("snap_"))
            })
            .collect();
        bins.sort();
        let mut store: Option<SnapshotStore> = None;
        for bin in bins {
            let (header, u) = read_snapshot(&bin)?;
            let st = store.get_or_insert_with(|| {
                SnapshotStore::new(Lattice::new(header.nx, header.ny, header.h), header.epsilon)
            });
            if st.lattice.nx != header.nx || st.lattice.ny != header.ny {
                return Err(Error::Config(format!(
                    "{}: lattice differs from the run",
                    bin.display()
                )));
            }
            st.push(header.t, u);
        }
        store.ok_or_else(|| Error::Config(format!("no snapshots in {}", dir.display())))
    }
}

pub fn write_snapshot(bin: &Path, header: &SnapshotHeader, u: &[f64]) -> Result<()> {
    let mut bytes = Vec::with_capacity(u.len() * 8);
    for v in u {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    let mut f = fs::File::create(bin).map_err(Error::io(bin))?;
    f.write_all(&bytes).map_err(Error::io(bin))?;
    let json = bin.with_extension("json");
    let text = serde_json::to_string_pretty(header).map_err(Error::json(&json))?;
    fs::write(&json, text).map_err(Error::io(&json))
}

pub fn read_snapshot(bin: &Path) -> Result<(SnapshotHeader, Vec<f64>)> {
    let json = bin.with_extension("json");
    let text = fs::read_to_string(&json).map_err(Error::io(&json))?;
    let header: SnapshotHeader = serde_json::from_str(&text).map_err(Error::json(&json))?;
    let mut bytes = Vec::new();
    fs::File::open(bin)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(Error::io(bin))?;
    if bytes.len() != header.nx * header.ny * 8 {
        return Err(Error::Config(format!(
            "{}: expected {} values, found {} bytes",
            bin.display(),
            header.nx * header.ny,
            bytes.len()
        )));
    }
    let u = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok((header, u))
}
