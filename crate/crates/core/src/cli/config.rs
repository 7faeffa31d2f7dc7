//! Run configuration: a flat `key = value` schema shared by config files,
//! `--set` overrides and the embedded metadata of every output file.
//!
//! ```text
//! # comments start with '#'
//! code.n = 1024
//! code.k = 512
//! code.r = 16
//! code.crc_poly = z^16+z^15+z^2+1
//! code.design_snr_db = 2.365
//! code.frozen_file =                 # empty: build from design SNR
//! decoder.t_max = 11
//! decoder.c = 0.3
//! decoder.f_kernel = min-sum         # or exact
//! channel.snr_db = 1.75, 2.0, 2.25   # list
//! channel.rate_convention = info     # info: R = k/N, coded: R = (k+r)/N
//! system.upsilon = 9/8, 1.2          # list of p/q or preset decimals
//! system.b_tot = 100
//! system.mechanism = multi-thr, cw-drop
//! system.b_thresholds =              # override; needs system.t_thresholds
//! system.t_thresholds =
//! system.warmup =                    # words; empty: b_tot
//! system.occupancy_stride = 1
//! system.write_traces = true         # per-point occupancy and word files
//! sweep.trace_snr_db = 2.25          # grid point whose traces a sweep keeps
//! sweep.trace_upsilon = 9/8
//! campaign.frames = 10000
//! campaign.seed = 1
//! campaign.workers =                 # empty: all cores
//! output.dir = out
//! ```

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_rational::Ratio;
use sha2::{Digest, Sha256};

use crate::bufctl::{Mechanism, ThresholdConfig};
use crate::channel::RateConvention;
use crate::harness::{format_upsilon, parse_upsilon};
use crate::polarcode::{CodeSpec, CrcPoly, FrozenSetFile};
use crate::scdec::FKernel;
use crate::scfdec::ScfConfig;
use crate::{Error, Result};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SCF_SIM_OUT_DIR";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub crc_poly: CrcPoly,
    pub design_snr_db: f64,
    pub frozen_file: Option<PathBuf>,
    pub t_max: u32,
    pub c: f64,
    pub f_kernel: FKernel,
    pub snr_db: Vec<f64>,
    pub rate_convention: RateConvention,
    pub upsilon: Vec<Ratio<u64>>,
    pub b_tot: usize,
    pub mechanisms: Vec<Mechanism>,
    pub b_thresholds: Option<Vec<usize>>,
    pub t_thresholds: Option<Vec<u32>>,
    pub warmup: Option<usize>,
    pub occupancy_stride: usize,
    pub write_traces: bool,
    pub sweep_trace_snr_db: f64,
    pub sweep_trace_upsilon: Ratio<u64>,
    pub frames: usize,
    pub seed: u64,
    pub workers: Option<usize>,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 1024,
            k: 512,
            r: 16,
            crc_poly: CrcPoly::CRC16,
            design_snr_db: 2.365,
            frozen_file: None,
            t_max: 11,
            c: 0.3,
            f_kernel: FKernel::MinSum,
            snr_db: vec![2.25],
            rate_convention: RateConvention::Info,
            upsilon: vec![Ratio::new(9, 8)],
            b_tot: 100,
            mechanisms: Mechanism::ALL.to_vec(),
            b_thresholds: None,
            t_thresholds: None,
            warmup: None,
            occupancy_stride: 1,
            write_traces: true,
            sweep_trace_snr_db: 2.25,
            sweep_trace_upsilon: Ratio::new(9, 8),
            frames: 10_000,
            seed: 1,
            workers: None,
            out_dir: PathBuf::from("out"),
        }
    }
}

/// Named presets selectable with `--preset`.
pub const PRESETS: [&str; 1] = ["paper"];

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split([',', ' '])
        .filter(|t| !t.is_empty())
        .map(|t| parse_value(key, t))
        .collect()
}

fn optional<T>(value: &str, f: impl FnOnce(&str) -> Result<T>) -> Result<Option<T>> {
    if value.is_empty() {
        Ok(None)
    } else {
        f(value).map(Some)
    }
}

fn join<T: Display>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Named settings: `paper` is the full 1024-bit reference campaign.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "paper" => Ok(RunConfig {
                snr_db: vec![1.75, 1.875, 2.0, 2.125, 2.25, 2.375, 2.5],
                upsilon: vec![
                    Ratio::new(12, 11),
                    Ratio::new(10, 9),
                    Ratio::new(9, 8),
                    Ratio::new(23, 20),
                    Ratio::new(6, 5),
                ],
                frames: 1_000_000,
                ..RunConfig::default()
            }),
            other => Err(Error::Config(format!(
                "unknown preset {other:?} (available: {})",
                PRESETS.join(", ")
            ))),
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "code.n" => self.n = parse_value(key, v)?,
            "code.k" => self.k = parse_value(key, v)?,
            "code.r" => self.r = parse_value(key, v)?,
            "code.crc_poly" => {
                self.crc_poly = if v.eq_ignore_ascii_case("none") {
                    CrcPoly::NONE
                } else {
                    v.parse()?
                }
            }
            "code.design_snr_db" => self.design_snr_db = parse_value(key, v)?,
            "code.frozen_file" => self.frozen_file = optional(v, |s| Ok(PathBuf::from(s)))?,
            "decoder.t_max" => self.t_max = parse_value(key, v)?,
            "decoder.c" => self.c = parse_value(key, v)?,
            "decoder.f_kernel" => self.f_kernel = v.parse()?,
            "channel.snr_db" => self.snr_db = parse_list(key, v)?,
            "channel.rate_convention" => self.rate_convention = v.parse()?,
            "system.upsilon" => {
                self.upsilon = v
                    .split([',', ' '])
                    .filter(|t| !t.is_empty())
                    .map(parse_upsilon)
                    .collect::<Result<_>>()?
            }
            "system.b_tot" => self.b_tot = parse_value(key, v)?,
            "system.mechanism" => {
                self.mechanisms = if v == "both" {
                    Mechanism::ALL.to_vec()
                } else {
                    parse_list(key, v)?
                }
            }
            "system.b_thresholds" => self.b_thresholds = optional(v, |s| parse_list(key, s))?,
            "system.t_thresholds" => self.t_thresholds = optional(v, |s| parse_list(key, s))?,
            "system.warmup" => self.warmup = optional(v, |s| parse_value(key, s))?,
            "system.occupancy_stride" => self.occupancy_stride = parse_value(key, v)?,
            "system.write_traces" => self.write_traces = parse_value(key, v)?,
            "sweep.trace_snr_db" => self.sweep_trace_snr_db = parse_value(key, v)?,
            "sweep.trace_upsilon" => self.sweep_trace_upsilon = parse_upsilon(v)?,
            "campaign.frames" => self.frames = parse_value(key, v)?,
            "campaign.seed" => self.seed = parse_value(key, v)?,
            "campaign.workers" => self.workers = optional(v, |s| parse_value(key, s))?,
            "output.dir" => self.out_dir = PathBuf::from(v),
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            self.set(k, v)
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.crc_poly.degree() != self.r {
            return Err(Error::Config(format!(
                "code.r = {} but code.crc_poly has degree {}",
                self.r,
                self.crc_poly.degree()
            )));
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("channel.snr_db needs finite values".into()));
        }
        if self.upsilon.is_empty() {
            return Err(Error::Config("system.upsilon is empty".into()));
        }
        if self.mechanisms.is_empty() {
            return Err(Error::Config("system.mechanism is empty".into()));
        }
        if self.frames == 0 {
            return Err(Error::Config("campaign.frames must be positive".into()));
        }
        if self.occupancy_stride == 0 {
            return Err(Error::Config(
                "system.occupancy_stride must be positive".into(),
            ));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("campaign.workers must be positive".into()));
        }
        if self.b_thresholds.is_some() != self.t_thresholds.is_some() {
            return Err(Error::Config(
                "system.b_thresholds and system.t_thresholds go together".into(),
            ));
        }
        if let Some(th) = self.threshold_override()? {
            th.validate_for(self.b_tot, self.t_max)?;
        }
        Ok(())
    }

    pub fn threshold_override(&self) -> Result<Option<ThresholdConfig>> {
        match (&self.b_thresholds, &self.t_thresholds) {
            (Some(b), Some(t)) => ThresholdConfig::new(b.clone(), t.clone()).map(Some),
            _ => Ok(None),
        }
    }

    pub fn code_spec(&self) -> Result<CodeSpec> {
        match &self.frozen_file {
            Some(path) => {
                let file = FrozenSetFile::load(path)?;
                if (file.n, file.k, file.r) != (self.n, self.k, self.r) {
                    return Err(Error::Config(format!(
                        "{} describes ({}, {}, {}), config asks for ({}, {}, {})",
                        path.display(),
                        file.n,
                        file.k,
                        file.r,
                        self.n,
                        self.k,
                        self.r
                    )));
                }
                CodeSpec::from_file(&file, self.crc_poly)
            }
            None => CodeSpec::construct(self.n, self.k, self.crc_poly, self.design_snr_db),
        }
    }

    pub fn scf_config(&self) -> ScfConfig {
        ScfConfig::new(self.t_max, self.c).with_kernel(self.f_kernel)
    }

    /// Every setting that can influence results, in schema order. The output
    /// directory and worker count are left out.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let opt = |o: Option<String>| o.unwrap_or_default();
        [
            ("code.n", self.n.to_string()),
            ("code.k", self.k.to_string()),
            ("code.r", self.r.to_string()),
            ("code.crc_poly", self.crc_poly.to_string()),
            ("code.design_snr_db", self.design_snr_db.to_string()),
            (
                "code.frozen_file",
                opt(self.frozen_file.as_ref().map(|p| p.display().to_string())),
            ),
            ("decoder.t_max", self.t_max.to_string()),
            ("decoder.c", self.c.to_string()),
            ("decoder.f_kernel", self.f_kernel.to_string()),
            ("channel.snr_db", join(&self.snr_db)),
            ("channel.rate_convention", self.rate_convention.to_string()),
            (
                "system.upsilon",
                self.upsilon
                    .iter()
                    .map(|&u| format_upsilon(u))
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("system.b_tot", self.b_tot.to_string()),
            ("system.mechanism", join(&self.mechanisms)),
            (
                "system.b_thresholds",
                opt(self.b_thresholds.as_deref().map(join)),
            ),
            (
                "system.t_thresholds",
                opt(self.t_thresholds.as_deref().map(join)),
            ),
            ("system.warmup", opt(self.warmup.map(|w| w.to_string()))),
            ("system.occupancy_stride", self.occupancy_stride.to_string()),
            ("system.write_traces", self.write_traces.to_string()),
            ("sweep.trace_snr_db", self.sweep_trace_snr_db.to_string()),
            (
                "sweep.trace_upsilon",
                format_upsilon(self.sweep_trace_upsilon),
            ),
            ("campaign.frames", self.frames.to_string()),
            ("campaign.seed", self.seed.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    /// The canonical `key = value` text of [`RunConfig::to_pairs`]; applying it
    /// to a default config reproduces `self` (up to output directory and
    /// workers).
    pub fn to_text(&self) -> String {
        self.to_pairs()
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// SHA-256 over the canonical config text and the bytes of `inputs`.
    pub fn inputs_hash(&self, inputs: &[&[u8]]) -> String {
        let mut h = Sha256::new();
        h.update(self.to_text().as_bytes());
        for bytes in inputs {
            h.update(Sha256::digest(bytes));
        }
        hex::encode(h.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut cfg = RunConfig::preset("paper").unwrap();
        cfg.set("system.b_thresholds", "99,50,10").unwrap();
        cfg.set("system.t_thresholds", "0 4 5").unwrap();
        cfg.set("system.warmup", "250").unwrap();
        cfg.set("decoder.f_kernel", "exact").unwrap();
        let mut back = RunConfig::default();
        back.apply_text(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
        back.validate().unwrap();
    }

    #[test]
    fn reference_preset() {
        let cfg = RunConfig::preset("paper").unwrap();
        assert_eq!(
            (cfg.n, cfg.k, cfg.r, cfg.t_max, cfg.b_tot),
            (1024, 512, 16, 11, 100)
        );
        assert_eq!(cfg.snr_db.len(), 7);
        assert_eq!(cfg.upsilon.len(), 5);
        assert_eq!(cfg.frames, 1_000_000);
        assert!(RunConfig::preset("nope").is_err());
    }

    #[test]
    fn file_syntax() {
        let mut cfg = RunConfig::default();
        cfg.apply_text("# header\n\ncode.n = 8  # short\ncode.k=4\ncode.r = 0\ncode.crc_poly = none\nsystem.upsilon = 1.125, 6/5\n")
            .unwrap();
        assert_eq!((cfg.n, cfg.k, cfg.r), (8, 4, 0));
        assert_eq!(cfg.upsilon, vec![Ratio::new(9, 8), Ratio::new(6, 5)]);
        cfg.validate().unwrap();
        assert!(cfg.apply_text("code.n 8").is_err());
        assert!(cfg.apply_text("code.m = 8").is_err());
        assert!(cfg.apply_text("code.n = eight").is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = RunConfig::default();
        cfg.set("code.r", "8").unwrap();
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.set("system.b_thresholds", "99").unwrap();
        assert!(cfg.validate().is_err());
        cfg.set("system.t_thresholds", "0").unwrap();
        cfg.validate().unwrap();
        cfg.set("system.b_thresholds", "100").unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn hash_tracks_inputs() {
        let cfg = RunConfig::default();
        let a = cfg.inputs_hash(&[b"x"]);
        assert_eq!(a, cfg.inputs_hash(&[b"x"]));
        assert_ne!(a, cfg.inputs_hash(&[b"y"]));
        let mut other = cfg.clone();
        other.seed += 1;
        assert_ne!(a, other.inputs_hash(&[b"x"]));
        let mut moved = cfg.clone();
        moved.out_dir = PathBuf::from("elsewhere");
        moved.workers = Some(3);
        assert_eq!(a, moved.inputs_hash(&[b"x"]));
    }
}
