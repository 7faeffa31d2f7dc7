//! BPSK modulation over AWGN and channel LLR computation.
//!
//! Bit `b` maps to symbol `1 - 2b`; the receiver returns `2y / sigma^2`, so a
//! positive LLR favours bit 0. Noise comes from a ChaCha8 generator keyed by a
//! run seed and a per-frame stream id, which makes every frame reproducible in
//! isolation.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// Generator identity recorded in run metadata.
pub const RNG_NAME: &str = "ChaCha8Rng(seed_from_u64, stream=frame)/StandardNormal";

/// `sigma^2 = 1 / (2 R 10^(EbN0/10))`.
pub fn snr_to_noise_var(ebn0_db: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::InvalidCode(format!("rate {rate} outside (0, 1]")));
    }
    if !ebn0_db.is_finite() {
        return Err(Error::InvalidCode("Eb/N0 must be finite".into()));
    }
    Ok(1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0)))
}

/// Which code rate converts Eb/N0 into a noise variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RateConvention {
    /// `R = k / N`: the CRC counts as overhead.
    #[default]
    Info,
    /// `R = (k + r) / N`.
    Coded,
}

impl RateConvention {
    pub fn rate(self, n: usize, k: usize, r: usize) -> f64 {
        match self {
            RateConvention::Info => k as f64 / n as f64,
            RateConvention::Coded => (k + r) as f64 / n as f64,
        }
    }
}

impl fmt::Display for RateConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateConvention::Info => "info",
            RateConvention::Coded => "coded",
        })
    }
}

impl FromStr for RateConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "info" | "k/N" => Ok(RateConvention::Info),
            "coded" | "(k+r)/N" => Ok(RateConvention::Coded),
            other => Err(Error::Parse(format!("unknown rate convention {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub ebn0_db: f64,
    pub rate: f64,
    pub noise_var: f64,
}

impl ChannelParams {
    pub fn new(ebn0_db: f64, rate: f64) -> Result<Self> {
        Ok(ChannelParams {
            ebn0_db,
            rate,
            noise_var: snr_to_noise_var(ebn0_db, rate)?,
        })
    }

    /// Direct noise variance, mostly for tests.
    pub fn with_noise_var(noise_var: f64) -> Result<Self> {
        if !(noise_var > 0.0 && noise_var.is_finite()) {
            return Err(Error::InvalidCode(format!(
                "noise variance {noise_var} must be > 0"
            )));
        }
        Ok(ChannelParams {
            ebn0_db: f64::NAN,
            rate: f64::NAN,
            noise_var,
        })
    }
}

/// Identifies one reproducible random substream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Sends `x` through BPSK/AWGN and writes channel LLRs into `llr`.
pub fn transmit_into<R: Rng + ?Sized>(
    x: &[u8],
    params: &ChannelParams,
    rng: &mut R,
    llr: &mut [f64],
) {
    debug_assert_eq!(x.len(), llr.len());
    let sigma = params.noise_var.sqrt();
    let scale = 2.0 / params.noise_var;
    for (out, &b) in llr.iter_mut().zip(x) {
        let s = 1.0 - 2.0 * f64::from(b);
        let n: f64 = rng.sample(StandardNormal);
        *out = scale * (s + sigma * n);
    }
}

pub fn transmit<R: Rng + ?Sized>(x: &[u8], params: &ChannelParams, rng: &mut R) -> Vec<f64> {
    let mut llr = vec![0.0; x.len()];
    transmit_into(x, params, rng, &mut llr);
    llr
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, Normal};

    #[test]
    fn rate_conventions() {
        assert_eq!(RateConvention::Info.rate(1024, 512, 16), 0.5);
        assert_eq!(RateConvention::Coded.rate(1024, 512, 16), 0.515625);
        for rc in [RateConvention::Info, RateConvention::Coded] {
            assert_eq!(rc.to_string().parse::<RateConvention>().unwrap(), rc);
        }
        assert!("bogus".parse::<RateConvention>().is_err());
        // 2.25 dB at k/N = 1/2
        let v = snr_to_noise_var(2.25, RateConvention::Info.rate(1024, 512, 16)).unwrap();
        assert!((v - 0.5956621435290105).abs() < 1e-15, "{v}");
    }

    #[test]
    fn noise_variance_conversion() {
        assert!((snr_to_noise_var(0.0, 0.5).unwrap() - 1.0).abs() < 1e-15);
        // independent evaluation: 0.5776117755432828
        assert!(
            (snr_to_noise_var(2.25, 528.0 / 1024.0).unwrap() - 0.577_611_775_543_282_8).abs()
                < 1e-12
        );
        assert!((snr_to_noise_var(3.01, 1.0).unwrap() - 0.2500).abs() < 1e-4);
        assert!(snr_to_noise_var(1.0, 0.0).is_err());
        assert!(snr_to_noise_var(1.0, -0.5).is_err());
        assert!(snr_to_noise_var(1.0, 1.5).is_err());
    }

    #[test]
    fn noiseless_limit_keeps_polarity() {
        let params = ChannelParams::with_noise_var(1e-6).unwrap();
        let x: Vec<u8> = (0..64).map(|i| (i * 7 % 3 == 0) as u8).collect();
        let llr = transmit(&x, &params, &mut RngStream::new(1, 0).rng());
        for (l, b) in llr.iter().zip(&x) {
            assert_eq!(l.signum(), 1.0 - 2.0 * f64::from(*b));
        }
    }

    #[test]
    fn llr_moments() {
        let params = ChannelParams::with_noise_var(1.0).unwrap();
        let n = 100_000;
        let llr = transmit(&vec![0u8; n], &params, &mut RngStream::new(5, 0).rng());
        let mean = llr.iter().sum::<f64>() / n as f64;
        let var = llr.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        // LLR ~ N(2, 4): se(mean) = 2/sqrt(n), se(var) ~ 4 sqrt(2/n)
        assert!(
            (mean - 2.0).abs() < 3.0 * 2.0 / (n as f64).sqrt(),
            "mean {mean}"
        );
        assert!(
            (var - 4.0).abs() < 3.0 * 4.0 * (2.0 / n as f64).sqrt(),
            "var {var}"
        );
    }

    #[test]
    fn stream_determinism() {
        let params = ChannelParams::new(2.0, 0.5).unwrap();
        let x = vec![1u8; 256];
        let a = transmit(&x, &params, &mut RngStream::new(9, 3).rng());
        let b = transmit(&x, &params, &mut RngStream::new(9, 3).rng());
        let c = transmit(&x, &params, &mut RngStream::new(9, 4).rng());
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn complement_negates_noiseless_component() {
        let params = ChannelParams::new(1.0, 0.5).unwrap();
        let x: Vec<u8> = (0..128).map(|i| (i % 5 == 1) as u8).collect();
        let xc: Vec<u8> = x.iter().map(|b| b ^ 1).collect();
        let a = transmit(&x, &params, &mut RngStream::new(2, 2).rng());
        let b = transmit(&xc, &params, &mut RngStream::new(2, 2).rng());
        let scale = 2.0 / params.noise_var;
        for i in 0..x.len() {
            let s = 1.0 - 2.0 * f64::from(x[i]);
            // a = scale (s + n), b = scale (-s + n)
            assert!(((a[i] - b[i]) - 2.0 * scale * s).abs() < 1e-9);
        }
    }

    #[test]
    fn hard_decision_ber_matches_q_function() {
        let (ebn0, rate) = (1.0, 0.5);
        let params = ChannelParams::new(ebn0, rate).unwrap();
        let n = 1_000_000;
        let x: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
        let llr = transmit(&x, &params, &mut RngStream::new(17, 0).rng());
        let errors = llr
            .iter()
            .zip(&x)
            .filter(|(l, &b)| (**l < 0.0) as u8 != b)
            .count();
        let ber = errors as f64 / n as f64;
        let arg = (2.0 * rate * 10f64.powf(ebn0 / 10.0)).sqrt();
        let q = Normal::standard().sf(arg);
        let se = (q * (1.0 - q) / n as f64).sqrt();
        assert!((ber - q).abs() < 3.0 * se, "ber {ber} vs Q {q}");
    }
}
