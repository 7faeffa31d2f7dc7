//! Phase 1: SCF decoding in the ideal system, where `T_max` is the only
//! latency limit.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::bufctl::TrialStats;
use crate::channel::{transmit_into, ChannelParams, RateConvention, RngStream};
use crate::polarcode::{crc_encode, polar_encode, BitVector, CodeSpec, Construction};
use crate::scdec::FKernel;
use crate::scfdec::{ScfConfig, ScfDecoder};
use crate::{Error, Result};

/// Provenance of an [`IdealTrace`].
#[derive(Debug, Clone, PartialEq)]
pub struct IdealMeta {
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub crc_poly: String,
    pub construction: String,
    /// SHA-256 of the frozen-set file text of the code.
    pub frozen_hash: String,
    pub snr_db: f64,
    pub rate_convention: RateConvention,
    pub t_max: u32,
    pub c: f64,
    pub kernel: FKernel,
    pub seed: u64,
}

/// Per-word required trials and frame-error flags.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealTrace {
    pub psi_req: Vec<u32>,
    pub e_flags: Vec<bool>,
    pub meta: IdealMeta,
}

impl IdealTrace {
    pub fn new(psi_req: Vec<u32>, e_flags: Vec<bool>, meta: IdealMeta) -> Result<Self> {
        if psi_req.len() != e_flags.len() {
            return Err(Error::LengthMismatch {
                expected: psi_req.len(),
                actual: e_flags.len(),
            });
        }
        if let Some(bad) = psi_req.iter().find(|&&t| t == 0 || t > meta.t_max) {
            return Err(Error::Parse(format!(
                "required trials {bad} outside 1..={}",
                meta.t_max
            )));
        }
        Ok(IdealTrace {
            psi_req,
            e_flags,
            meta,
        })
    }

    pub fn len(&self) -> usize {
        self.psi_req.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi_req.is_empty()
    }

    /// Mean of `psi_req`.
    pub fn t_av(&self) -> f64 {
        if self.psi_req.is_empty() {
            return f64::NAN;
        }
        self.psi_req.iter().map(|&t| f64::from(t)).sum::<f64>() / self.psi_req.len() as f64
    }

    pub fn fer(&self) -> f64 {
        fraction(&self.e_flags)
    }

    /// The trace the same frames would produce with a smaller `T_max`.
    ///
    /// Trials run in a fixed order that does not depend on `T_max`, so a word
    /// that matched its CRC at trial `t <= m` behaves identically, and any other
    /// word exhausts all `m` trials and fails.
    pub fn restrict(&self, t_max: u32) -> Result<IdealTrace> {
        if t_max == 0 || t_max > self.meta.t_max {
            return Err(Error::InvalidDecoder(format!(
                "cannot restrict a T_max = {} trace to {t_max}",
                self.meta.t_max
            )));
        }
        let (psi_req, e_flags) = self
            .psi_req
            .iter()
            .zip(&self.e_flags)
            .map(|(&t, &e)| if t > t_max { (t_max, true) } else { (t, e) })
            .unzip();
        Ok(IdealTrace {
            psi_req,
            e_flags,
            meta: IdealMeta {
                t_max,
                ..self.meta.clone()
            },
        })
    }

    /// `T_av` for every `T_max` in `1..=self.meta.t_max`.
    pub fn trial_stats(&self) -> TrialStats {
        let t_av_by_tmax: BTreeMap<u32, f64> = (1..=self.meta.t_max)
            .map(|m| {
                let sum: u64 = self.psi_req.iter().map(|&t| u64::from(t.min(m))).sum();
                (m, sum as f64 / self.psi_req.len() as f64)
            })
            .collect();
        TrialStats {
            snr_db: self.meta.snr_db,
            t_av_by_tmax,
        }
    }
}

pub(crate) fn fraction(flags: &[bool]) -> f64 {
    if flags.is_empty() {
        return f64::NAN;
    }
    flags.iter().filter(|&&e| e).count() as f64 / flags.len() as f64
}

pub fn frozen_hash(spec: &CodeSpec) -> String {
    hex::encode(Sha256::digest(spec.to_frozen_file().to_text().as_bytes()))
}

/// Scratch space for one worker.
struct FrameWorker {
    dec: ScfDecoder,
    x: Vec<u8>,
    llr: Vec<f64>,
}

/// Channel point and campaign size of one ideal run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealRun {
    pub snr_db: f64,
    pub rate_convention: RateConvention,
    pub frames: usize,
    pub seed: u64,
    /// Thread count; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl IdealRun {
    pub fn new(snr_db: f64, frames: usize, seed: u64) -> Self {
        IdealRun {
            snr_db,
            rate_convention: RateConvention::default(),
            frames,
            seed,
            workers: None,
        }
    }

    pub fn with_rate_convention(mut self, rc: RateConvention) -> Self {
        self.rate_convention = rc;
        self
    }

    pub fn with_workers(mut self, workers: Option<usize>) -> Self {
        self.workers = workers;
        self
    }
}

/// Simulates frames `0..frames` (frame `s` uses RNG stream `s` of `seed`):
/// random payload, CRC, polar encoding, BPSK/AWGN, SCF decoding.
///
/// A frame is in error when decoding fails or the CRC-matching payload differs
/// from the transmitted one. Results do not depend on `workers`.
pub fn run_ideal_sim(spec: &CodeSpec, cfg: &ScfConfig, run: &IdealRun) -> Result<IdealTrace> {
    let IdealRun {
        snr_db,
        rate_convention,
        frames,
        seed,
        workers,
    } = *run;
    if frames == 0 {
        return Err(Error::Config("need at least one frame".into()));
    }
    cfg.validate(spec)?;
    let params = ChannelParams::new(snr_db, rate_convention.rate(spec.n(), spec.k(), spec.r()))?;
    let run = || -> Vec<Result<(u32, bool)>> {
        (0..frames as u64)
            .into_par_iter()
            .map_init(
                || FrameWorker {
                    dec: ScfDecoder::new(spec, *cfg).expect("validated config"),
                    x: vec![0; spec.n()],
                    llr: vec![0.0; spec.n()],
                },
                |w, s| simulate_frame(spec, &params, seed, s, w),
            )
            .collect()
    };
    let results = match workers {
        Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(run),
        _ => run(),
    };
    let mut psi_req = Vec::with_capacity(frames);
    let mut e_flags = Vec::with_capacity(frames);
    for r in results {
        let (t, e) = r?;
        psi_req.push(t);
        e_flags.push(e);
    }
    let construction = match spec.construction() {
        Construction::GaussianApproximation { design_snr_db } => format!("ga@{design_snr_db}dB"),
        Construction::External => "external".to_string(),
    };
    IdealTrace::new(
        psi_req,
        e_flags,
        IdealMeta {
            n: spec.n(),
            k: spec.k(),
            r: spec.r(),
            crc_poly: spec.crc().to_string(),
            construction,
            frozen_hash: frozen_hash(spec),
            snr_db,
            rate_convention,
            t_max: cfg.t_max,
            c: cfg.c,
            kernel: cfg.kernel,
            seed,
        },
    )
}

fn simulate_frame(
    spec: &CodeSpec,
    params: &ChannelParams,
    seed: u64,
    s: u64,
    w: &mut FrameWorker,
) -> Result<(u32, bool)> {
    let mut rng = RngStream::new(seed, s).rng();
    let info: Vec<u8> = (0..spec.k()).map(|_| rng.random_range(0..2u8)).collect();
    let payload = crc_encode(&BitVector::from_bits(info)?, spec.crc());
    let u = spec.assemble_u(&payload)?;
    w.x.copy_from_slice(polar_encode(&u)?.as_slice());
    transmit_into(&w.x, params, &mut rng, &mut w.llr);
    let out = w.dec.decode(&w.llr)?;
    let error = !out.success || w.dec.payload() != payload.as_slice();
    Ok((out.t_req, error))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polarcode::CrcPoly;

    fn small_spec() -> CodeSpec {
        CodeSpec::construct(128, 48, CrcPoly::CRC16, 2.0).unwrap()
    }

    #[test]
    fn single_trial_is_all_ones() {
        let t = run_ideal_sim(
            &small_spec(),
            &ScfConfig::new(1, 0.3),
            &IdealRun::new(0.5, 500, 1),
        )
        .unwrap();
        assert!(t.psi_req.iter().all(|&x| x == 1));
        assert_eq!(t.t_av(), 1.0);
        assert!(t.fer() > 0.0);
    }

    #[test]
    fn deterministic_and_worker_independent() {
        let spec = small_spec();
        let cfg = ScfConfig::new(8, 0.3);
        let a = run_ideal_sim(
            &spec,
            &cfg,
            &IdealRun::new(1.5, 400, 77).with_workers(Some(1)),
        )
        .unwrap();
        let b = run_ideal_sim(
            &spec,
            &cfg,
            &IdealRun::new(1.5, 400, 77).with_workers(Some(3)),
        )
        .unwrap();
        assert_eq!(a, b);
        let c = run_ideal_sim(
            &spec,
            &cfg,
            &IdealRun::new(1.5, 400, 78).with_workers(Some(1)),
        )
        .unwrap();
        assert_ne!(a.psi_req, c.psi_req);
    }

    #[test]
    fn restriction_equals_rerun() {
        let spec = small_spec();
        let full = run_ideal_sim(
            &spec,
            &ScfConfig::new(10, 0.3),
            &IdealRun::new(1.0, 1500, 5),
        )
        .unwrap();
        for m in [1, 2, 3, 5, 9, 10] {
            let direct =
                run_ideal_sim(&spec, &ScfConfig::new(m, 0.3), &IdealRun::new(1.0, 1500, 5))
                    .unwrap();
            assert_eq!(full.restrict(m).unwrap(), direct, "t_max={m}");
            assert!((full.trial_stats().t_av(m).unwrap() - direct.t_av()).abs() < 1e-12);
        }
        assert!(full.restrict(0).is_err());
        assert!(full.restrict(11).is_err());
    }

    #[test]
    fn fer_monotone_in_t_max() {
        let full = run_ideal_sim(
            &small_spec(),
            &ScfConfig::new(12, 0.3),
            &IdealRun::new(1.0, 3000, 9),
        )
        .unwrap();
        let fers: Vec<f64> = (1..=12).map(|m| full.restrict(m).unwrap().fer()).collect();
        assert!(fers.windows(2).all(|w| w[1] <= w[0]), "{fers:?}");
        let stats = full.trial_stats();
        assert_eq!(stats.t_av(1), Some(1.0));
        let tav: Vec<f64> = stats.t_av_by_tmax.values().copied().collect();
        assert!(tav.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn rejects_bad_inputs() {
        let spec = small_spec();
        assert!(run_ideal_sim(&spec, &ScfConfig::new(4, 0.3), &IdealRun::new(1.0, 0, 1)).is_err());
        assert!(run_ideal_sim(&spec, &ScfConfig::new(0, 0.3), &IdealRun::new(1.0, 10, 1)).is_err());
    }
}
