//! Phase 2: the buffered system replayed in integer time units.
//!
//! Every time unit runs, in order:
//!
//! 1. **channel**: every `tau_ch` units (starting at unit 0) the next word is
//!    stored; storing into a full buffer is a fatal overflow;
//! 2. **controller**: for the word in service, stop when it has completed its
//!    required trials (`t_cur == psi_req`) or when the thresholds fire for
//!    `(B_occ, t_cur)`; a stopped word records `psi_res = t_cur`;
//! 3. **decoder**: an idle decoder reads the oldest word (releasing its slot)
//!    and the word in service advances one unit; every `tau_sc` units complete
//!    one trial;
//! 4. `B_occ` is recorded.
//!
//! A cut abandons the partially run trial, so `psi_res` only counts fully
//! applied trials. An empty buffer idles the decoder for the unit.

use num_rational::Ratio;

use super::ideal::fraction;
use super::timing::resolve_timing;
use crate::bufctl::{gen_ctrl_sigs, CircularBuffer, ThresholdConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemConfig {
    pub upsilon: Ratio<u64>,
    pub tau_sc: u64,
    pub tau_ch: u64,
    pub b_tot: usize,
    pub thresholds: ThresholdConfig,
    /// Words excluded from steady-state metrics.
    pub warmup_words: usize,
}

impl SystemConfig {
    /// Uses the smallest integer timing realising `upsilon`; warm-up defaults
    /// to `b_tot` words.
    pub fn new(upsilon: Ratio<u64>, b_tot: usize, thresholds: ThresholdConfig) -> Result<Self> {
        let (tau_sc, tau_ch) = resolve_timing(upsilon)?;
        if b_tot == 0 {
            return Err(Error::Config("buffer needs at least one slot".into()));
        }
        if thresholds.b_thresholds()[0] >= b_tot {
            return Err(Error::InvalidThresholds(format!(
                "B_1 = {} must be below B_tot = {b_tot}",
                thresholds.b_thresholds()[0]
            )));
        }
        Ok(SystemConfig {
            upsilon: upsilon.reduced(),
            tau_sc,
            tau_ch,
            b_tot,
            thresholds,
            warmup_words: b_tot,
        })
    }

    pub fn with_warmup(mut self, words: usize) -> Self {
        self.warmup_words = words;
        self
    }

    /// Multiplies both intervals by `factor`; the ratio is unchanged.
    pub fn scaled(mut self, factor: u64) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidTiming("scale factor must be positive".into()));
        }
        self.tau_sc *= factor;
        self.tau_ch *= factor;
        Ok(self)
    }
}

/// Output of [`run_system_sim`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    /// `B_occ` at the end of every time unit.
    pub chi_occ: Vec<u32>,
    pub psi_res: Vec<u32>,
    pub e_prime: Vec<bool>,
    /// Words stopped before their required trials.
    pub drops: usize,
    pub tau_ch: u64,
    pub warmup_words: usize,
}

impl SimTrace {
    pub fn fer(&self) -> f64 {
        fraction(&self.e_prime)
    }

    /// FER over the words after the warm-up.
    pub fn fer_steady(&self) -> f64 {
        fraction(self.e_prime.get(self.warmup_words..).unwrap_or(&[]))
    }

    pub fn max_occ(&self) -> u32 {
        self.chi_occ.iter().copied().max().unwrap_or(0)
    }

    /// Maximum occupancy from the arrival of the first post-warm-up word.
    pub fn max_occ_steady(&self) -> u32 {
        let start = (self.warmup_words as u64).saturating_mul(self.tau_ch);
        let start = usize::try_from(start).unwrap_or(usize::MAX);
        self.chi_occ
            .get(start..)
            .and_then(|s| s.iter().copied().max())
            .unwrap_or(0)
    }

    pub fn mean_occ(&self) -> f64 {
        self.chi_occ.iter().map(|&b| f64::from(b)).sum::<f64>() / self.chi_occ.len() as f64
    }
}

/// `e'[s] = e[s] || psi_res[s] < psi_req[s]`.
pub fn calc_fer_impact(psi_res: &[u32], psi_req: &[u32], e_flags: &[bool]) -> Result<Vec<bool>> {
    if psi_res.len() != psi_req.len() || psi_req.len() != e_flags.len() {
        return Err(Error::LengthMismatch {
            expected: psi_req.len(),
            actual: if psi_res.len() != psi_req.len() {
                psi_res.len()
            } else {
                e_flags.len()
            },
        });
    }
    Ok(psi_res
        .iter()
        .zip(psi_req)
        .zip(e_flags)
        .map(|((&res, &req), &e)| e || res < req)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Service {
    word: usize,
    t_cur: u32,
    elapsed: u64,
}

/// The buffered system as an explicit state machine, one time unit per
/// [`SystemSim::step`].
#[derive(Debug, Clone)]
pub struct SystemSim<'a> {
    cfg: &'a SystemConfig,
    psi_req: &'a [u32],
    buffer: CircularBuffer<usize>,
    time: u64,
    produced: usize,
    completed: usize,
    service: Option<Service>,
    psi_res: Vec<u32>,
    chi_occ: Vec<u32>,
    drops: usize,
}

impl<'a> SystemSim<'a> {
    pub fn new(cfg: &'a SystemConfig, psi_req: &'a [u32]) -> Result<Self> {
        if psi_req.is_empty() {
            return Err(Error::Config("empty required-trials list".into()));
        }
        if psi_req.contains(&0) {
            return Err(Error::Config("required trials must be at least 1".into()));
        }
        if cfg.tau_sc == 0 || cfg.tau_ch < cfg.tau_sc {
            return Err(Error::InvalidTiming(format!(
                "need 1 <= tau_sc <= tau_ch, got {} and {}",
                cfg.tau_sc, cfg.tau_ch
            )));
        }
        let expected_units = (psi_req.len() as u64).saturating_mul(cfg.tau_ch) as usize;
        Ok(SystemSim {
            cfg,
            psi_req,
            buffer: CircularBuffer::new(cfg.b_tot),
            time: 0,
            produced: 0,
            completed: 0,
            service: None,
            psi_res: vec![0; psi_req.len()],
            chi_occ: Vec::with_capacity(expected_units + 64),
            drops: 0,
        })
    }

    pub fn done(&self) -> bool {
        self.completed == self.psi_req.len()
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn produced(&self) -> usize {
        self.produced
    }

    pub fn completed(&self) -> usize {
        self.completed
    }

    pub fn b_occ(&self) -> usize {
        self.buffer.b_occ()
    }

    /// Word currently in the decoder and its fully applied trials.
    pub fn in_service(&self) -> Option<(usize, u32)> {
        self.service.map(|s| (s.word, s.t_cur))
    }

    pub fn step(&mut self) -> Result<()> {
        if self.produced < self.psi_req.len() && self.time == self.produced as u64 * self.cfg.tau_ch
        {
            self.buffer
                .push(self.produced)
                .map_err(|word| Error::BufferOverflow {
                    time_unit: self.time,
                    word,
                })?;
            self.produced += 1;
        }

        if let Some(svc) = self.service {
            let t_req = self.psi_req[svc.word];
            let finished = svc.t_cur >= t_req;
            if finished || gen_ctrl_sigs(&self.cfg.thresholds, self.buffer.b_occ(), svc.t_cur) {
                self.psi_res[svc.word] = svc.t_cur;
                if !finished {
                    self.drops += 1;
                }
                self.completed += 1;
                self.service = None;
            }
        }

        if self.service.is_none() {
            if let Ok(word) = self.buffer.pop() {
                self.service = Some(Service {
                    word,
                    t_cur: 0,
                    elapsed: 0,
                });
            }
        }
        if let Some(svc) = self.service.as_mut() {
            svc.elapsed += 1;
            if svc.elapsed == self.cfg.tau_sc {
                svc.t_cur += 1;
                svc.elapsed = 0;
            }
        }

        self.chi_occ.push(self.buffer.b_occ() as u32);
        self.time += 1;
        Ok(())
    }

    pub fn finish(self, e_flags: &[bool]) -> Result<SimTrace> {
        let e_prime = calc_fer_impact(&self.psi_res, self.psi_req, e_flags)?;
        Ok(SimTrace {
            chi_occ: self.chi_occ,
            psi_res: self.psi_res,
            e_prime,
            drops: self.drops,
            tau_ch: self.cfg.tau_ch,
            warmup_words: self.cfg.warmup_words,
        })
    }
}

/// Replays the ideal trace through buffer, controller and decoder.
pub fn run_system_sim(cfg: &SystemConfig, psi_req: &[u32], e_flags: &[bool]) -> Result<SimTrace> {
    if psi_req.len() != e_flags.len() {
        return Err(Error::LengthMismatch {
            expected: psi_req.len(),
            actual: e_flags.len(),
        });
    }
    let mut sim = SystemSim::new(cfg, psi_req)?;
    while !sim.done() {
        sim.step()?;
    }
    sim.finish(e_flags)
}
