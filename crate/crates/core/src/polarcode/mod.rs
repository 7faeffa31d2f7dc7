//! Polar code parameters, construction, encoding and CRC.

mod bits;
mod construct;
mod crc;
mod encode;
mod frozen_file;

pub use bits::BitVector;
pub use construct::{build_frozen_set, ga_means, Reliability};
pub use crc::{crc_check, crc_encode, CrcPoly, CRC_CONVENTION};
pub use encode::polar_encode;
pub use frozen_file::FrozenSetFile;

use crate::{Error, Result};

/// How the frozen set of a [`CodeSpec`] was obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum Construction {
    GaussianApproximation {
        design_snr_db: f64,
    },
    /// Loaded from a frozen-set file or given explicitly.
    External,
}

/// A CRC-aided polar code `P(N, k)` with `r` CRC bits.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeSpec {
    n: usize,
    k: usize,
    crc: CrcPoly,
    frozen: Vec<usize>,
    frozen_mask: Vec<bool>,
    info_positions: Vec<usize>,
    construction: Construction,
}

impl CodeSpec {
    /// Builds the code with Gaussian-approximation construction at
    /// `design_snr_db` (Eb/N0, rate `(k+r)/N`).
    pub fn construct(n: usize, k: usize, crc: CrcPoly, design_snr_db: f64) -> Result<Self> {
        let rel = build_frozen_set(n, k + crc.degree(), design_snr_db)?;
        Self::build(
            n,
            k,
            crc,
            rel.frozen,
            Construction::GaussianApproximation { design_snr_db },
        )
    }

    /// Builds the code from an explicit frozen set.
    pub fn from_frozen(n: usize, k: usize, crc: CrcPoly, frozen: Vec<usize>) -> Result<Self> {
        Self::build(n, k, crc, frozen, Construction::External)
    }

    pub fn from_file(file: &FrozenSetFile, crc: CrcPoly) -> Result<Self> {
        if file.r != crc.degree() {
            return Err(Error::InvalidCode(format!(
                "frozen-set file has r={} but CRC polynomial has degree {}",
                file.r,
                crc.degree()
            )));
        }
        Self::from_frozen(file.n, file.k, crc, file.frozen.clone())
    }

    fn build(
        n: usize,
        k: usize,
        crc: CrcPoly,
        mut frozen: Vec<usize>,
        construction: Construction,
    ) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        let payload = k + crc.degree();
        if payload == 0 || payload > n {
            return Err(Error::InvalidCode(format!(
                "k + r = {payload} must lie in 1..={n}"
            )));
        }
        frozen.sort_unstable();
        let distinct = frozen.windows(2).all(|w| w[0] < w[1]);
        if !distinct || frozen.len() != n - payload || frozen.last().is_some_and(|&i| i >= n) {
            return Err(Error::InvalidCode(format!(
                "frozen set must hold {} distinct indices below {n}",
                n - payload
            )));
        }
        let mut frozen_mask = vec![false; n];
        for &i in &frozen {
            frozen_mask[i] = true;
        }
        let info_positions = (0..n).filter(|&i| !frozen_mask[i]).collect();
        Ok(CodeSpec {
            n,
            k,
            crc,
            frozen,
            frozen_mask,
            info_positions,
            construction,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// CRC length.
    pub fn r(&self) -> usize {
        self.crc.degree()
    }

    pub fn payload_len(&self) -> usize {
        self.k + self.r()
    }

    /// `R = (k + r) / N`.
    pub fn rate(&self) -> f64 {
        self.payload_len() as f64 / self.n as f64
    }

    pub fn crc(&self) -> &CrcPoly {
        &self.crc
    }

    pub fn frozen(&self) -> &[usize] {
        &self.frozen
    }

    pub fn frozen_mask(&self) -> &[bool] {
        &self.frozen_mask
    }

    pub fn is_frozen(&self, i: usize) -> bool {
        self.frozen_mask[i]
    }

    /// Non-frozen indices, ascending.
    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    pub fn construction(&self) -> &Construction {
        &self.construction
    }

    pub fn to_frozen_file(&self) -> FrozenSetFile {
        FrozenSetFile {
            n: self.n,
            k: self.k,
            r: self.r(),
            frozen: self.frozen.clone(),
        }
    }

    /// Places `payload` (k information bits followed by r CRC bits) on the
    /// non-frozen positions; frozen positions are zero.
    pub fn assemble_u(&self, payload: &BitVector) -> Result<BitVector> {
        place_payload(payload, &self.info_positions, self.n)
    }

    /// Inverse of [`CodeSpec::assemble_u`].
    pub fn extract_payload(&self, u: &[u8]) -> Result<BitVector> {
        if u.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: u.len(),
            });
        }
        BitVector::from_bits(self.info_positions.iter().map(|&i| u[i]).collect())
    }
}

/// Writes `payload` bits onto `positions` (ascending) of an all-zero vector of
/// length `n`.
pub fn place_payload(payload: &BitVector, positions: &[usize], n: usize) -> Result<BitVector> {
    if payload.len() != positions.len() {
        return Err(Error::LengthMismatch {
            expected: positions.len(),
            actual: payload.len(),
        });
    }
    let mut u = BitVector::zeros(n);
    for (&pos, bit) in positions.iter().zip(payload.iter()) {
        u.set(pos, bit);
    }
    Ok(u)
}
