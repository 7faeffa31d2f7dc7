//! Plain-text frozen-set files.
//!
//! ```text
//! N k r
//! i0 i1 i2 ...
//! ```
//!
//! Line 2 lists the frozen indices in ascending order (empty when nothing is
//! frozen). Lines starting with `#` are comments and may appear anywhere.

use std::fs;
use std::path::Path;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrozenSetFile {
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub frozen: Vec<usize>,
}

impl FrozenSetFile {
    pub fn to_text(&self) -> String {
        let idx: Vec<String> = self.frozen.iter().map(|i| i.to_string()).collect();
        format!("{} {} {}\n{}\n", self.n, self.k, self.r, idx.join(" "))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.starts_with('#'));
        let header = lines
            .next()
            .filter(|l| !l.is_empty())
            .ok_or_else(|| Error::Parse("frozen-set file: missing `N k r` line".into()))?;
        let nums = parse_usizes(header)?;
        let [n, k, r] = nums[..] else {
            return Err(Error::Parse(format!(
                "frozen-set header '{header}' needs 3 fields"
            )));
        };
        let frozen = parse_usizes(lines.next().unwrap_or(""))?;
        if lines.any(|l| !l.is_empty()) {
            return Err(Error::Parse("frozen-set file: trailing content".into()));
        }
        if !frozen.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Parse(
                "frozen indices must be strictly ascending".into(),
            ));
        }
        if frozen.last().is_some_and(|&i| i >= n) {
            return Err(Error::Parse("frozen index out of range".into()));
        }
        if frozen.len() + k + r != n {
            return Err(Error::Parse(format!(
                "{} frozen indices inconsistent with N={n}, k={k}, r={r}",
                frozen.len()
            )));
        }
        Ok(FrozenSetFile { n, k, r, frozen })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }
}

fn parse_usizes(line: &str) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| Error::Parse(format!("'{t}' is not an index")))
        })
        .collect()
}
