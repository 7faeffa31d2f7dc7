//! Reliability ordering of the synthetic bit channels by Gaussian-approximation
//! density evolution over BPSK/AWGN.
//!
//! Each synthetic channel's LLR is modelled as `N(m, 2m)`. The channel LLR mean
//! is `2/sigma^2`; a variable-node combination doubles the mean and a check-node
//! combination maps `m -> phi^-1(1 - (1 - phi(m))^2)`. `phi` uses Chung's
//! two-piece approximation evaluated in the log domain so the recursion stays
//! finite for the very reliable channels of long codes.

use crate::channel::snr_to_noise_var;
use crate::{Error, Result};

/// Output of [`build_frozen_set`].
#[derive(Debug, Clone, PartialEq)]
pub struct Reliability {
    /// All bit indices ordered from least to most reliable.
    pub ranking: Vec<usize>,
    /// Frozen indices in ascending order.
    pub frozen: Vec<usize>,
    /// Mean LLR of every synthetic channel, indexed by bit position.
    pub mean_llr: Vec<f64>,
}

const BRANCH_SWITCH: f64 = 10.0;

/// `ln phi(m)`.
fn ln_phi(m: f64) -> f64 {
    if m <= 0.0 {
        0.0
    } else if m < BRANCH_SWITCH {
        (-0.4527 * m.powf(0.86) + 0.0218).min(0.0)
    } else {
        0.5 * (std::f64::consts::PI / m).ln() - m / 4.0 + (1.0 - 10.0 / (7.0 * m)).ln()
    }
}

/// Solves `ln phi(m) = target` by bisection; deterministic to the last ulp
/// that bisection reaches in a fixed iteration count.
fn ln_phi_inv(target: f64) -> f64 {
    if target >= 0.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    while ln_phi(hi) > target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ln_phi(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn check_node_mean(m: f64) -> f64 {
    // 1 - (1 - p)^2 = p (2 - p), kept in the log domain
    let ln_p = ln_phi(m);
    let p = ln_p.exp();
    ln_phi_inv(ln_p + (2.0 - p).ln())
}

/// Mean LLR of each of the `n` synthetic channels for a channel LLR mean `m0`.
///
/// Index bit order: the most significant bit of an index selects the
/// combination at the channel-side stage (0 = check node, 1 = variable node).
pub fn ga_means(n: usize, m0: f64) -> Vec<f64> {
    let mut means = vec![m0];
    while means.len() < n {
        let mut next = Vec::with_capacity(2 * means.len());
        for &m in &means {
            next.push(check_node_mean(m));
            next.push(2.0 * m);
        }
        means = next;
    }
    means
}

/// Ranks the `n` synthetic channels and freezes the `n - num_nonfrozen` least
/// reliable ones.
///
/// `design_snr_db` is an Eb/N0 value converted with rate `num_nonfrozen / n`.
/// Equal means are ordered by ascending index (lower index = less reliable).
pub fn build_frozen_set(n: usize, num_nonfrozen: usize, design_snr_db: f64) -> Result<Reliability> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    if num_nonfrozen == 0 || num_nonfrozen > n {
        return Err(Error::InvalidCode(format!(
            "{num_nonfrozen} non-frozen bits out of range 1..={n}"
        )));
    }
    if !design_snr_db.is_finite() {
        return Err(Error::InvalidCode("design SNR must be finite".into()));
    }
    let rate = num_nonfrozen as f64 / n as f64;
    let m0 = 2.0 / snr_to_noise_var(design_snr_db, rate)?;
    let mean_llr = ga_means(n, m0);
    let mut ranking: Vec<usize> = (0..n).collect();
    ranking.sort_by(|&a, &b| mean_llr[a].total_cmp(&mean_llr[b]).then(a.cmp(&b)));
    let mut frozen = ranking[..n - num_nonfrozen].to_vec();
    frozen.sort_unstable();
    Ok(Reliability {
        ranking,
        frozen,
        mean_llr,
    })
}
