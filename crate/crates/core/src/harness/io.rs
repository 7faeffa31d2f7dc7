//! CSV artifacts shared by the two phases.
//!
//! Every file starts with `# key=value` metadata lines followed by a header
//! row. Floats are written in shortest round-trip form, so writing the same
//! data twice yields identical bytes.
//!
//! | file         | header                  |
//! |--------------|-------------------------|
//! | ideal trace  | `s,t_req,error_flag`    |
//! | occupancy    | `time_unit,b_occ`       |
//! | word results | `s,psi_res,e_prime`     |

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::ideal::{IdealMeta, IdealTrace};
use super::system::SimTrace;
use crate::channel::RNG_NAME;
use crate::polarcode::CRC_CONVENTION;
use crate::{Error, Result};

pub const IDEAL_TRACE_FORMAT: &str = "ideal-trace/1";
pub const IDEAL_HEADER: &str = "s,t_req,error_flag";
pub const OCCUPANCY_HEADER: &str = "time_unit,b_occ";
pub const WORDS_HEADER: &str = "s,psi_res,e_prime";

/// Writes `# key=value` lines. Newlines in values are replaced by spaces.
pub fn write_meta<W: Write>(w: &mut W, pairs: &[(String, String)]) -> Result<()> {
    for (k, v) in pairs {
        writeln!(w, "# {k}={}", v.replace(['\n', '\r'], " "))?;
    }
    Ok(())
}

fn ideal_meta_pairs(m: &IdealMeta) -> Vec<(String, String)> {
    [
        ("format", IDEAL_TRACE_FORMAT.to_string()),
        ("code.n", m.n.to_string()),
        ("code.k", m.k.to_string()),
        ("code.r", m.r.to_string()),
        ("code.crc_poly", m.crc_poly.clone()),
        ("code.crc_convention", CRC_CONVENTION.to_string()),
        ("code.construction", m.construction.clone()),
        ("code.frozen_sha256", m.frozen_hash.clone()),
        ("channel.snr_db", m.snr_db.to_string()),
        ("channel.rate_convention", m.rate_convention.to_string()),
        ("channel.rng", RNG_NAME.to_string()),
        ("decoder.t_max", m.t_max.to_string()),
        ("decoder.c", m.c.to_string()),
        ("decoder.f_kernel", m.kernel.to_string()),
        ("decoder.llr_precision", "f64".to_string()),
        ("campaign.seed", m.seed.to_string()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// Writes an ideal trace; `extra` metadata follows the built-in keys.
pub fn write_ideal_trace<W: Write>(
    w: &mut W,
    trace: &IdealTrace,
    extra: &[(String, String)],
) -> Result<()> {
    let mut pairs = ideal_meta_pairs(&trace.meta);
    pairs.push(("campaign.frames".into(), trace.len().to_string()));
    pairs.extend(extra.iter().cloned());
    write_meta(w, &pairs)?;
    writeln!(w, "{IDEAL_HEADER}")?;
    for (s, (t, e)) in trace.psi_req.iter().zip(&trace.e_flags).enumerate() {
        writeln!(w, "{s},{t},{}", u8::from(*e))?;
    }
    Ok(())
}

pub fn save_ideal_trace(path: &Path, trace: &IdealTrace, extra: &[(String, String)]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_ideal_trace(&mut w, trace, extra)?;
    w.flush()?;
    Ok(())
}

/// Parsed ideal trace plus every metadata pair found in the file.
#[derive(Debug, Clone)]
pub struct LoadedTrace {
    pub trace: IdealTrace,
    pub meta: BTreeMap<String, String>,
}

fn field<T: std::str::FromStr>(meta: &BTreeMap<String, String>, key: &str) -> Result<T> {
    let raw = meta
        .get(key)
        .ok_or_else(|| Error::Parse(format!("missing metadata key {key}")))?;
    raw.parse()
        .map_err(|_| Error::Parse(format!("bad value for {key}: {raw:?}")))
}

pub fn read_ideal_trace<R: BufRead>(r: R) -> Result<LoadedTrace> {
    let mut meta = BTreeMap::new();
    let mut psi_req = Vec::new();
    let mut e_flags = Vec::new();
    let mut header_seen = false;
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim_end();
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.trim_start().split_once('=') {
                meta.insert(k.trim().to_string(), v.to_string());
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        if !header_seen {
            if line != IDEAL_HEADER {
                return Err(Error::Parse(format!(
                    "expected header {IDEAL_HEADER:?}, got {line:?}"
                )));
            }
            header_seen = true;
            continue;
        }
        let bad = || Error::Parse(format!("line {}: malformed row {line:?}", lineno + 1));
        let mut cols = line.split(',');
        let s: usize = cols.next().and_then(|c| c.parse().ok()).ok_or_else(bad)?;
        let t: u32 = cols.next().and_then(|c| c.parse().ok()).ok_or_else(bad)?;
        let e = match cols.next() {
            Some("0") => false,
            Some("1") => true,
            _ => return Err(bad()),
        };
        if cols.next().is_some() || s != psi_req.len() {
            return Err(bad());
        }
        psi_req.push(t);
        e_flags.push(e);
    }
    if !header_seen {
        return Err(Error::Parse("missing header row".into()));
    }
    match meta.get("format") {
        Some(f) if f == IDEAL_TRACE_FORMAT => {}
        other => return Err(Error::Parse(format!("unsupported trace format {other:?}"))),
    }
    let im = IdealMeta {
        n: field(&meta, "code.n")?,
        k: field(&meta, "code.k")?,
        r: field(&meta, "code.r")?,
        crc_poly: field(&meta, "code.crc_poly")?,
        construction: field(&meta, "code.construction")?,
        frozen_hash: field(&meta, "code.frozen_sha256")?,
        snr_db: field(&meta, "channel.snr_db")?,
        rate_convention: field(&meta, "channel.rate_convention")?,
        t_max: field(&meta, "decoder.t_max")?,
        c: field(&meta, "decoder.c")?,
        kernel: field(&meta, "decoder.f_kernel")?,
        seed: field(&meta, "campaign.seed")?,
    };
    if let Some(frames) = meta.get("campaign.frames") {
        if frames.parse::<usize>().ok() != Some(psi_req.len()) {
            return Err(Error::Parse(format!(
                "metadata announces {frames} frames, found {}",
                psi_req.len()
            )));
        }
    }
    Ok(LoadedTrace {
        trace: IdealTrace::new(psi_req, e_flags, im)?,
        meta,
    })
}

pub fn load_ideal_trace(path: &Path) -> Result<LoadedTrace> {
    read_ideal_trace(BufReader::new(File::open(path)?))
}

/// Writes every `stride`-th occupancy sample (stride 1 keeps all).
pub fn write_occupancy<W: Write>(
    w: &mut W,
    trace: &SimTrace,
    stride: usize,
    meta: &[(String, String)],
) -> Result<()> {
    if stride == 0 {
        return Err(Error::Config("occupancy stride must be positive".into()));
    }
    write_meta(w, meta)?;
    writeln!(w, "{OCCUPANCY_HEADER}")?;
    for (t, b) in trace.chi_occ.iter().enumerate().step_by(stride) {
        writeln!(w, "{t},{b}")?;
    }
    Ok(())
}

pub fn write_word_results<W: Write>(
    w: &mut W,
    trace: &SimTrace,
    meta: &[(String, String)],
) -> Result<()> {
    write_meta(w, meta)?;
    writeln!(w, "{WORDS_HEADER}")?;
    for (s, (p, e)) in trace.psi_res.iter().zip(&trace.e_prime).enumerate() {
        writeln!(w, "{s},{p},{}", u8::from(*e))?;
    }
    Ok(())
}
