//! Bitwise CRC over GF(2).
//!
//! Register convention: initial value 0, no input or output reflection, zero
//! final XOR, message fed most-significant (first) bit first. With the default
//! polynomial `z^16 + z^15 + z^2 + 1` this is the CRC-16/UMTS (a.k.a. BUYPASS)
//! variant.

use std::fmt;
use std::str::FromStr;

use super::BitVector;
use crate::{Error, Result};

/// Human-readable register convention, stamped into output metadata.
pub const CRC_CONVENTION: &str = "init=0,refin=false,refout=false,xorout=0,msb-first";

/// Generator polynomial of degree `r`.
///
/// `taps` holds the coefficients of `z^0 .. z^(r-1)`; the leading `z^r` term is
/// implicit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrcPoly {
    degree: u32,
    taps: u64,
}

impl CrcPoly {
    /// `z^16 + z^15 + z^2 + 1`.
    pub const CRC16: CrcPoly = CrcPoly {
        degree: 16,
        taps: 0x8005,
    };

    /// The trivial polynomial `1`; codes without CRC use it (zero check bits).
    pub const NONE: CrcPoly = CrcPoly { degree: 0, taps: 0 };

    pub fn new(degree: u32, taps: u64) -> Result<Self> {
        if degree > 63 {
            return Err(Error::InvalidCode(format!(
                "CRC degree {degree} exceeds 63"
            )));
        }
        if degree == 0 {
            return Ok(Self::NONE);
        }
        if taps >> degree != 0 {
            return Err(Error::InvalidCode(format!(
                "CRC taps {taps:#x} exceed degree {degree}"
            )));
        }
        Ok(CrcPoly { degree, taps })
    }

    pub fn degree(&self) -> usize {
        self.degree as usize
    }

    pub fn taps(&self) -> u64 {
        self.taps
    }

    /// All `r+1` coefficients from `z^r` down to `z^0`.
    pub fn coefficients_high_first(&self) -> Vec<u8> {
        let mut c = vec![1u8];
        c.extend((0..self.degree).rev().map(|i| ((self.taps >> i) & 1) as u8));
        c
    }

    fn mask(&self) -> u64 {
        (1u64 << self.degree) - 1
    }

    /// Remainder of `bits(z) * z^r` modulo the generator.
    pub fn remainder(&self, bits: &[u8]) -> u64 {
        if self.degree == 0 {
            return 0;
        }
        let top = self.degree - 1;
        let mut reg = 0u64;
        for &b in bits {
            let feedback = ((reg >> top) & 1) ^ u64::from(b);
            reg = (reg << 1) & self.mask();
            if feedback == 1 {
                reg ^= self.taps;
            }
        }
        reg
    }
}

impl fmt::Display for CrcPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = vec![];
        for e in (0..=self.degree).rev() {
            let present = e == self.degree || (self.taps >> e) & 1 == 1;
            if present {
                terms.push(match e {
                    0 => "1".to_string(),
                    1 => "z".to_string(),
                    _ => format!("z^{e}"),
                });
            }
        }
        write!(f, "{}", terms.join("+"))
    }
}

impl FromStr for CrcPoly {
    type Err = Error;

    /// Accepts `z^16+z^15+z^2+1` style sums (`x` also allowed as variable) or a
    /// `degree:0xTAPS` pair such as `16:0x8005`.
    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if let Some((deg, taps)) = s.split_once(':') {
            let degree = deg
                .parse()
                .map_err(|_| Error::Parse(format!("bad CRC degree '{deg}'")))?;
            let taps = u64::from_str_radix(taps.trim_start_matches("0x"), 16)
                .map_err(|_| Error::Parse(format!("bad CRC taps '{taps}'")))?;
            return CrcPoly::new(degree, taps);
        }
        let mut exps = vec![];
        for term in s.split('+') {
            let e: u32 = match term {
                "1" => 0,
                "z" | "x" => 1,
                t if t.starts_with("z^") || t.starts_with("x^") => t[2..]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad CRC term '{t}'")))?,
                t => return Err(Error::Parse(format!("bad CRC term '{t}'"))),
            };
            exps.push(e);
        }
        let degree = *exps
            .iter()
            .max()
            .ok_or_else(|| Error::Parse("empty polynomial".into()))?;
        if degree > 63 {
            return Err(Error::InvalidCode(format!(
                "CRC degree {degree} exceeds 63"
            )));
        }
        let mut taps = 0u64;
        for e in exps.into_iter().filter(|&e| e < degree) {
            taps ^= 1 << e;
        }
        CrcPoly::new(degree, taps)
    }
}

/// Appends the `r` CRC bits to `info`, most significant remainder bit first.
pub fn crc_encode(info: &BitVector, poly: &CrcPoly) -> BitVector {
    let rem = poly.remainder(info.as_slice());
    let r = poly.degree();
    let mut out = Vec::with_capacity(info.len() + r);
    out.extend_from_slice(info.as_slice());
    out.extend((0..r).rev().map(|i| ((rem >> i) & 1) as u8));
    BitVector::from_bits(out).expect("binary by construction")
}

/// True iff `word` (information followed by `r` check bits) is divisible by the
/// generator.
pub fn crc_check(word: &[u8], poly: &CrcPoly) -> bool {
    let r = poly.degree();
    if word.len() < r {
        return false;
    }
    let (info, check) = word.split_at(word.len() - r);
    let expected = poly.remainder(info);
    check.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b)) == expected
}
