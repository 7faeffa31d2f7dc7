//! Input buffer, threshold controller and threshold selection.
//!
//! The controller compares the buffer occupancy `B_occ` against descending
//! buffer thresholds `B_1 > B_2 > ... > B_P` and the decoder's fully applied
//! trial count `t_cur` against ascending trial thresholds `T_1 <= ... <= T_P`.
//! It raises stop for the first pair with `B_occ > B_i` and `t_cur >= T_i`.
//! Codeword dropping is the single pair `{B_tot - 1, 0}`; the multi-threshold
//! mechanism uses three pairs.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use crate::{Error, Result};

/// FIFO of word handles with a hard capacity.
#[derive(Debug, Clone)]
pub struct CircularBuffer<T> {
    b_tot: usize,
    slots: VecDeque<T>,
}

impl<T> CircularBuffer<T> {
    pub fn new(b_tot: usize) -> Self {
        CircularBuffer {
            b_tot,
            slots: VecDeque::with_capacity(b_tot),
        }
    }

    pub fn b_tot(&self) -> usize {
        self.b_tot
    }

    pub fn b_occ(&self) -> usize {
        self.slots.len()
    }

    pub fn is_full(&self) -> bool {
        self.slots.len() == self.b_tot
    }

    /// Stores a word. A push into a full buffer is an overflow and hands the
    /// word back.
    pub fn push(&mut self, word: T) -> std::result::Result<(), T> {
        if self.is_full() {
            return Err(word);
        }
        self.slots.push_back(word);
        Ok(())
    }

    /// Reads (and releases) the oldest word.
    pub fn pop(&mut self) -> Result<T> {
        self.slots.pop_front().ok_or(Error::BufferUnderflow)
    }

    pub fn peek(&self) -> Option<&T> {
        self.slots.front()
    }
}

/// Control mechanism preset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mechanism {
    CodewordDropping,
    MultiThreshold,
}

impl Mechanism {
    pub const ALL: [Mechanism; 2] = [Mechanism::MultiThreshold, Mechanism::CodewordDropping];
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mechanism::CodewordDropping => "cw-drop",
            Mechanism::MultiThreshold => "multi-thr",
        })
    }
}

impl FromStr for Mechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cw-drop" | "drop" | "codeword-dropping" => Ok(Mechanism::CodewordDropping),
            "multi-thr" | "multi" | "multi-threshold" => Ok(Mechanism::MultiThreshold),
            other => Err(Error::Parse(format!("unknown mechanism '{other}'"))),
        }
    }
}

/// Paired buffer-size and trial thresholds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdConfig {
    b_thresholds: Vec<usize>,
    t_thresholds: Vec<u32>,
}

impl ThresholdConfig {
    /// Validates ordering: `B` strictly descending, `T` non-decreasing, equal
    /// non-zero lengths.
    pub fn new(b_thresholds: Vec<usize>, t_thresholds: Vec<u32>) -> Result<Self> {
        if b_thresholds.is_empty() || b_thresholds.len() != t_thresholds.len() {
            return Err(Error::InvalidThresholds(format!(
                "need equal, non-zero counts (got {} and {})",
                b_thresholds.len(),
                t_thresholds.len()
            )));
        }
        if !b_thresholds.windows(2).all(|w| w[0] > w[1]) {
            return Err(Error::InvalidThresholds(format!(
                "buffer thresholds {b_thresholds:?} must be strictly descending"
            )));
        }
        if !t_thresholds.windows(2).all(|w| w[0] <= w[1]) {
            return Err(Error::InvalidThresholds(format!(
                "trial thresholds {t_thresholds:?} must be ascending"
            )));
        }
        Ok(ThresholdConfig {
            b_thresholds,
            t_thresholds,
        })
    }

    /// `B = {B_tot - 1}`, `T = {0}`.
    pub fn codeword_dropping(b_tot: usize) -> Result<Self> {
        if b_tot < 1 {
            return Err(Error::InvalidThresholds(
                "buffer needs at least one slot".into(),
            ));
        }
        Self::new(vec![b_tot - 1], vec![0])
    }

    /// Three-pair preset: `B = {B_tot - 1, floor(B_tot/2), ceil(B_tot/10)}`,
    /// `T = {0, t2, t3}`; requires `B_3 < B_2 < B_1 < B_tot` and `0 < t2 <= t3`.
    pub fn multi_threshold(b_tot: usize, t2: u32, t3: u32) -> Result<Self> {
        let b = vec![b_tot.saturating_sub(1), b_tot / 2, b_tot.div_ceil(10)];
        if !(b[2] < b[1] && b[1] < b[0]) {
            return Err(Error::InvalidThresholds(format!(
                "buffer of {b_tot} slots too small for three thresholds {b:?}"
            )));
        }
        if t2 == 0 || t2 > t3 {
            return Err(Error::InvalidThresholds(format!(
                "need 0 < T_2 <= T_3, got {t2}, {t3}"
            )));
        }
        Self::new(b, vec![0, t2, t3])
    }

    pub fn p(&self) -> usize {
        self.b_thresholds.len()
    }

    pub fn b_thresholds(&self) -> &[usize] {
        &self.b_thresholds
    }

    pub fn t_thresholds(&self) -> &[u32] {
        &self.t_thresholds
    }

    /// Checks the thresholds against a concrete buffer and decoder.
    pub fn validate_for(&self, b_tot: usize, t_max: u32) -> Result<()> {
        if self.b_thresholds[0] >= b_tot {
            return Err(Error::InvalidThresholds(format!(
                "B_1 = {} must be below B_tot = {b_tot}",
                self.b_thresholds[0]
            )));
        }
        if self.t_thresholds.iter().any(|&t| t > t_max) {
            return Err(Error::InvalidThresholds(format!(
                "trial thresholds {:?} exceed T_max = {t_max}",
                self.t_thresholds
            )));
        }
        Ok(())
    }
}

/// Controller stop signal for the current buffer and decoder state.
pub fn gen_ctrl_sigs(cfg: &ThresholdConfig, b_occ: usize, t_cur: u32) -> bool {
    for (&b, &t) in cfg.b_thresholds.iter().zip(&cfg.t_thresholds) {
        if b_occ > b && t_cur >= t {
            return true;
        }
    }
    false
}

/// Average trials `T_av` per maximum trial count, measured at one SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialStats {
    pub snr_db: f64,
    pub t_av_by_tmax: BTreeMap<u32, f64>,
}

impl TrialStats {
    pub fn t_av(&self, t_max: u32) -> Option<f64> {
        self.t_av_by_tmax.get(&t_max).copied()
    }
}

/// Result of [`select_thresholds`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub thresholds: ThresholdConfig,
    /// Largest `T_max` whose `T_av` stays strictly below the production
    /// coefficient.
    pub t_bal: u32,
}

/// `T_bal = max { m : T_av(m) < upsilon }`.
pub fn balanced_trials(stats: &TrialStats, upsilon: Ratio<u64>, t_max: u32) -> Result<u32> {
    let ups = *upsilon.numer() as f64 / *upsilon.denom() as f64;
    for m in 1..=t_max {
        if stats.t_av(m).is_none() {
            return Err(Error::Config(format!("trial statistics lack T_max = {m}")));
        }
    }
    // strict inequality; T_av(1) = 1 so upsilon = 1 is infeasible
    (1..=t_max)
        .filter(|&m| stats.t_av(m).is_some_and(|t| t < ups))
        .max()
        .ok_or_else(|| Error::RateInfeasible {
            upsilon: upsilon.to_string(),
        })
}

/// Derives the controller thresholds for a mechanism from offline trial
/// statistics.
pub fn select_thresholds(
    stats: &TrialStats,
    upsilon: Ratio<u64>,
    t_max: u32,
    b_tot: usize,
    mechanism: Mechanism,
) -> Result<Selection> {
    if upsilon < Ratio::from_integer(1) {
        return Err(Error::InvalidTiming(format!(
            "production coefficient {upsilon} < 1"
        )));
    }
    let t_bal = balanced_trials(stats, upsilon, t_max)?;
    let thresholds = match mechanism {
        Mechanism::CodewordDropping => ThresholdConfig::codeword_dropping(b_tot)?,
        Mechanism::MultiThreshold if t_bal >= t_max => {
            ThresholdConfig::multi_threshold(b_tot, t_max, t_max)?
        }
        Mechanism::MultiThreshold => ThresholdConfig::multi_threshold(b_tot, t_bal, t_bal + 1)?,
    };
    thresholds.validate_for(b_tot, t_max)?;
    Ok(Selection { thresholds, t_bal })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn three_level_cfg() -> ThresholdConfig {
        ThresholdConfig::new(vec![99, 50, 10], vec![0, 4, 5]).unwrap()
    }

    /// Reference average-trial table for the 1024-bit code at 2.25 dB.
    fn reference_stats() -> TrialStats {
        let v = [
            1.0, 1.066264, 1.094729, 1.112918, 1.126692, 1.138254, 1.148492, 1.157956, 1.166872,
            1.175429, 1.183709,
        ];
        TrialStats {
            snr_db: 2.25,
            t_av_by_tmax: v
                .iter()
                .enumerate()
                .map(|(i, &t)| (i as u32 + 1, t))
                .collect(),
        }
    }

    #[test]
    fn controller_hand_traces() {
        let cfg = three_level_cfg();
        assert!(gen_ctrl_sigs(&cfg, 55, 4));
        assert!(!gen_ctrl_sigs(&cfg, 55, 3));
        for t in 0..20 {
            assert!(!gen_ctrl_sigs(&cfg, 5, t));
        }
        assert!(gen_ctrl_sigs(&cfg, 11, 5));
        assert!(!gen_ctrl_sigs(&cfg, 11, 4));
        assert!(gen_ctrl_sigs(&cfg, 100, 0));
        let drop = ThresholdConfig::new(vec![99], vec![0]).unwrap();
        assert!(gen_ctrl_sigs(&drop, 100, 0));
        assert!(!gen_ctrl_sigs(&drop, 99, 7));
    }

    #[test]
    fn threshold_ordering_enforced() {
        assert!(ThresholdConfig::new(vec![10, 50, 99], vec![0, 4, 5]).is_err());
        assert!(ThresholdConfig::new(vec![99, 50, 10], vec![5, 4, 0]).is_err());
        assert!(ThresholdConfig::new(vec![99, 50], vec![0]).is_err());
        assert!(ThresholdConfig::new(vec![], vec![]).is_err());
        assert!(ThresholdConfig::multi_threshold(3, 1, 2).is_err());
        assert!(three_level_cfg().validate_for(99, 11).is_err());
        assert!(three_level_cfg().validate_for(100, 4).is_err());
        assert!(three_level_cfg().validate_for(100, 5).is_ok());
    }

    #[test]
    fn multi_preset_matches_explicit_sets() {
        let c = ThresholdConfig::multi_threshold(100, 4, 5).unwrap();
        assert_eq!(c, three_level_cfg());
        let c = ThresholdConfig::multi_threshold(37, 2, 3).unwrap();
        assert_eq!(c.b_thresholds(), &[36, 18, 4]);
    }

    #[test]
    fn selection_worked_examples() {
        let stats = reference_stats();
        let s = select_thresholds(
            &stats,
            Ratio::new(12, 11),
            11,
            100,
            Mechanism::MultiThreshold,
        )
        .unwrap();
        assert_eq!(s.t_bal, 2);
        assert_eq!(s.thresholds.t_thresholds(), &[0, 2, 3]);
        let s = select_thresholds(&stats, Ratio::new(9, 8), 11, 100, Mechanism::MultiThreshold)
            .unwrap();
        assert_eq!(s.t_bal, 4);
        assert_eq!(s.thresholds, three_level_cfg());
        let s = select_thresholds(&stats, Ratio::new(5, 4), 11, 100, Mechanism::MultiThreshold)
            .unwrap();
        assert_eq!(s.t_bal, 11);
        assert_eq!(s.thresholds.t_thresholds(), &[0, 11, 11]);
        let s = select_thresholds(
            &stats,
            Ratio::new(9, 8),
            11,
            100,
            Mechanism::CodewordDropping,
        )
        .unwrap();
        assert_eq!(
            s.thresholds,
            ThresholdConfig::new(vec![99], vec![0]).unwrap()
        );
    }

    #[test]
    fn selection_rejects_infeasible_rates() {
        let stats = reference_stats();
        assert!(matches!(
            select_thresholds(
                &stats,
                Ratio::from_integer(1),
                11,
                100,
                Mechanism::MultiThreshold
            ),
            Err(Error::RateInfeasible { .. })
        ));
        assert!(
            select_thresholds(&stats, Ratio::new(1, 2), 11, 100, Mechanism::MultiThreshold)
                .is_err()
        );
        assert!(
            select_thresholds(&stats, Ratio::new(9, 8), 12, 100, Mechanism::MultiThreshold)
                .is_err()
        );
    }

    #[test]
    fn equality_is_not_below() {
        let mut stats = reference_stats();
        stats.t_av_by_tmax.insert(5, 1.125);
        stats.t_av_by_tmax.insert(6, 1.125);
        let s = select_thresholds(&stats, Ratio::new(9, 8), 11, 100, Mechanism::MultiThreshold)
            .unwrap();
        assert_eq!(s.t_bal, 4);
    }

    #[test]
    fn buffer_basics() {
        let mut b = CircularBuffer::new(100);
        b.push(7u32).unwrap();
        assert_eq!(b.peek(), Some(&7));
        assert_eq!(b.pop().unwrap(), 7);
        assert_eq!(b.b_occ(), 0);
        assert!(matches!(b.pop(), Err(Error::BufferUnderflow)));
        for i in 0..100 {
            b.push(i).unwrap();
        }
        assert_eq!(b.b_occ(), 100);
        assert_eq!(b.push(100), Err(100));
        assert_eq!(b.b_occ(), 100);
    }

    proptest! {
        #[test]
        fn buffer_matches_reference_queue(ops in proptest::collection::vec(any::<bool>(), 0..400), cap in 1usize..20) {
            let mut buf = CircularBuffer::new(cap);
            let mut reference = std::collections::VecDeque::new();
            let mut next = 0u32;
            for push in ops {
                if push {
                    let r = buf.push(next);
                    if reference.len() < cap {
                        reference.push_back(next);
                        prop_assert!(r.is_ok());
                    } else {
                        prop_assert_eq!(r, Err(next));
                    }
                    next += 1;
                } else {
                    prop_assert_eq!(buf.pop().ok(), reference.pop_front());
                }
                prop_assert_eq!(buf.b_occ(), reference.len());
                prop_assert_eq!(buf.peek(), reference.front());
            }
        }

        #[test]
        fn controller_monotone(
            b_tot in 4usize..300,
            t2 in 1u32..10,
            dt in 0u32..3,
            b_occ in 0usize..300,
            t_cur in 0u32..15,
        ) {
            let multi = ThresholdConfig::multi_threshold(b_tot, t2, t2 + dt).unwrap();
            let drop = ThresholdConfig::codeword_dropping(b_tot).unwrap();
            for cfg in [&multi, &drop] {
                if gen_ctrl_sigs(cfg, b_occ, t_cur) {
                    prop_assert!(gen_ctrl_sigs(cfg, b_occ + 1, t_cur));
                    prop_assert!(gen_ctrl_sigs(cfg, b_occ, t_cur + 1));
                }
            }
            prop_assert_eq!(gen_ctrl_sigs(&drop, b_occ, t_cur), b_occ > b_tot - 1);
        }

        #[test]
        fn selection_well_formed(
            incs in proptest::collection::vec(0.0f64..0.05, 10),
            ups_num in 1u64..400,
            b_tot in 4usize..400,
        ) {
            let mut t_av = BTreeMap::new();
            let mut acc = 1.0;
            t_av.insert(1, 1.0);
            for (i, d) in incs.iter().enumerate() {
                acc += d;
                t_av.insert(i as u32 + 2, acc);
            }
            let stats = TrialStats { snr_db: 0.0, t_av_by_tmax: t_av };
            let lo = Ratio::new(200 + ups_num, 200);
            let hi = Ratio::new(201 + ups_num, 200);
            for mech in Mechanism::ALL {
                let s = select_thresholds(&stats, lo, 11, b_tot, mech).unwrap();
                let t = s.thresholds.t_thresholds();
                prop_assert!(t.windows(2).all(|w| w[0] <= w[1]));
                prop_assert!(s.thresholds.b_thresholds()[0] < b_tot);
                prop_assert!(stats.t_av(s.t_bal).unwrap() < 1.0 + ups_num as f64 / 200.0);
                let s_hi = select_thresholds(&stats, hi, 11, b_tot, mech).unwrap();
                prop_assert!(s_hi.t_bal >= s.t_bal);
            }
        }
    }
}
