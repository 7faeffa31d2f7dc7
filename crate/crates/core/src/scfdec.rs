//! SC-flip decoding with a single flip per trial.
//!
//! After a failed initial pass, every non-frozen index `i` is scored with
//!
//! ```text
//! M_i = |a_i| + (1/c) * sum_{j in A, j <= i} ln(1 + exp(-c |a_j|))
//! ```
//!
//! where `a` are the decision LLRs of the initial pass. Candidates are tried in
//! ascending metric order (ties by ascending index), one flip per trial, and
//! the list is never rebuilt.

use crate::polarcode::{crc_check, CodeSpec};
use crate::scdec::{FKernel, FlipDirective, ScDecoder};
use crate::{Error, Result};

/// Default metric constant.
pub const DEFAULT_C: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipCandidate {
    pub index: usize,
    pub metric: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScfConfig {
    pub t_max: u32,
    pub c: f64,
    pub kernel: FKernel,
}

impl ScfConfig {
    pub fn new(t_max: u32, c: f64) -> Self {
        ScfConfig {
            t_max,
            c,
            kernel: FKernel::MinSum,
        }
    }

    pub fn with_kernel(mut self, kernel: FKernel) -> Self {
        self.kernel = kernel;
        self
    }

    /// Checks `1 <= t_max <= k + r` and `0 < c <= 1`.
    pub fn validate(&self, spec: &CodeSpec) -> Result<()> {
        if self.t_max == 0 || self.t_max as usize > spec.payload_len() {
            return Err(Error::InvalidDecoder(format!(
                "t_max = {} outside 1..={}",
                self.t_max,
                spec.payload_len()
            )));
        }
        if !(self.c > 0.0 && self.c <= 1.0) {
            return Err(Error::InvalidDecoder(format!(
                "c = {} outside (0, 1]",
                self.c
            )));
        }
        Ok(())
    }
}

/// Result of one SCF decoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodeOutcome {
    /// CRC matched within `t_max` trials.
    pub success: bool,
    /// Trials consumed: the matching trial, or `t_max` on failure.
    pub t_req: u32,
}

/// Flip candidates for every non-frozen index, most suspect first.
pub fn build_flip_list(alpha_dec: &[f64], spec: &CodeSpec, c: f64) -> Vec<FlipCandidate> {
    let mut list = Vec::with_capacity(spec.payload_len());
    fill_flip_list(alpha_dec, spec.info_positions(), c, &mut list);
    list
}

fn fill_flip_list(alpha_dec: &[f64], info: &[usize], c: f64, list: &mut Vec<FlipCandidate>) {
    list.clear();
    let mut penalty = 0.0;
    for &i in info {
        let mag = alpha_dec[i].abs();
        penalty += (-c * mag).exp().ln_1p();
        list.push(FlipCandidate {
            index: i,
            metric: mag + penalty / c,
        });
    }
    list.sort_by(|a, b| a.metric.total_cmp(&b.metric).then(a.index.cmp(&b.index)));
}

/// Reusable SCF decoder bound to one code and configuration.
#[derive(Debug, Clone)]
pub struct ScfDecoder {
    spec: CodeSpec,
    cfg: ScfConfig,
    sc: ScDecoder,
    payload: Vec<u8>,
    flips: Vec<FlipCandidate>,
}

impl ScfDecoder {
    pub fn new(spec: &CodeSpec, cfg: ScfConfig) -> Result<Self> {
        cfg.validate(spec)?;
        Ok(ScfDecoder {
            spec: spec.clone(),
            cfg,
            sc: ScDecoder::new(spec, cfg.kernel),
            payload: vec![0; spec.payload_len()],
            flips: Vec::with_capacity(spec.payload_len()),
        })
    }

    pub fn config(&self) -> &ScfConfig {
        &self.cfg
    }

    /// Payload (information then CRC bits) estimated by the last trial run.
    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    /// Flip list built by the last decode that needed it.
    pub fn flip_list(&self) -> &[FlipCandidate] {
        &self.flips
    }

    fn trial(&mut self, alpha_ch: &[f64], flip: FlipDirective) -> Result<bool> {
        self.sc.decode_in_place(alpha_ch, flip)?;
        let u = self.sc.u_hat();
        for (p, &i) in self.payload.iter_mut().zip(self.spec.info_positions()) {
            *p = u[i];
        }
        Ok(crc_check(&self.payload, self.spec.crc()))
    }

    pub fn decode(&mut self, alpha_ch: &[f64]) -> Result<DecodeOutcome> {
        self.flips.clear();
        if self.trial(alpha_ch, FlipDirective::NONE)? {
            return Ok(DecodeOutcome {
                success: true,
                t_req: 1,
            });
        }
        if self.cfg.t_max == 1 {
            return Ok(DecodeOutcome {
                success: false,
                t_req: 1,
            });
        }
        let mut flips = std::mem::take(&mut self.flips);
        fill_flip_list(
            self.sc.alpha_dec(),
            self.spec.info_positions(),
            self.cfg.c,
            &mut flips,
        );
        let mut outcome = DecodeOutcome {
            success: false,
            t_req: self.cfg.t_max,
        };
        for (t, cand) in (2..=self.cfg.t_max).zip(flips.iter()) {
            if self.trial(alpha_ch, FlipDirective::at(cand.index))? {
                outcome = DecodeOutcome {
                    success: true,
                    t_req: t,
                };
                break;
            }
        }
        self.flips = flips;
        Ok(outcome)
    }
}

/// One-shot SCF decoding; returns the outcome and the final payload estimate.
pub fn scf_decode(
    alpha_ch: &[f64],
    spec: &CodeSpec,
    cfg: &ScfConfig,
) -> Result<(DecodeOutcome, Vec<u8>)> {
    let mut dec = ScfDecoder::new(spec, *cfg)?;
    let out = dec.decode(alpha_ch)?;
    Ok((out, dec.payload().to_vec()))
}
