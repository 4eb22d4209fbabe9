//! On-disk table cache.
//!
//! One text file per table, named by the SHA-256 of the key string:
//!
//! ```text
//! constancy-null-table 1
//! key=max-abs-bridge;p=1;grid=1000;reps=100000;seed=20240601;resolution=continuous
//! checksum=<sha-256 of the sample lines>
//! 3ff5b1a0c3e1f0aa
//! ...
//! ```
//!
//! Sample lines hold the IEEE-754 bits of each sorted value in hex. A file
//! whose header, checksum, length or ordering disagrees with its key is
//! deleted and rebuilt.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::{simulate_bridge_functional, NullTable, TableKey};
use crate::error::Result;

const MAGIC: &str = "constancy-null-table 1";

fn hex(bytes: &[u8]) -> String {
    bytes
        .iter()
        .fold(String::with_capacity(bytes.len() * 2), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

#[derive(Debug, Clone)]
pub struct TableCache {
    dir: PathBuf,
}

impl TableCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        TableCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &TableKey) -> PathBuf {
        let digest = Sha256::digest(key.to_string().as_bytes());
        self.dir.join(format!("{}.tbl", hex(&digest)))
    }

    /// Cached table for `key`, or `None` if absent or unusable.
    pub fn load(&self, key: &TableKey) -> Option<NullTable> {
        let path = self.path_for(key);
        let text = fs::read_to_string(&path).ok()?;
        let table = parse(&text, key);
        if table.is_none() {
            let _ = fs::remove_file(&path);
        }
        table
    }

    pub fn store(&self, table: &NullTable) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let mut body = String::with_capacity(table.len() * 17);
        for v in table.sample() {
            let _ = writeln!(body, "{:016x}", v.to_bits());
        }
        let checksum = hex(&Sha256::digest(body.as_bytes()));
        let text = format!("{MAGIC}\nkey={}\nchecksum={checksum}\n{body}", table.key());
        let path = self.path_for(table.key());
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        fs::write(&tmp, text)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    /// Loads the table for `key`, simulating and storing it on a miss.
    pub fn get_or_build(&self, key: &TableKey) -> Result<NullTable> {
        if let Some(table) = self.load(key) {
            return Ok(table);
        }
        let table = simulate_bridge_functional(key)?;
        self.store(&table)?;
        Ok(table)
    }
}

fn parse(text: &str, key: &TableKey) -> Option<NullTable> {
    let mut lines = text.splitn(4, '\n');
    if lines.next()? != MAGIC {
        return None;
    }
    if lines.next()?.strip_prefix("key=")? != key.to_string() {
        return None;
    }
    let checksum = lines.next()?.strip_prefix("checksum=")?;
    let body = lines.next()?;
    if hex(&Sha256::digest(body.as_bytes())) != checksum {
        return None;
    }
    let sample = body
        .lines()
        .map(|l| u64::from_str_radix(l, 16).ok().map(f64::from_bits))
        .collect::<Option<Vec<f64>>>()?;
    NullTable::from_sorted(key.clone(), sample).ok()
}
