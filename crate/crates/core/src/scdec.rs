//! Successive-cancellation decoding kernel.
//!
//! The decoder walks the code tree depth first. Level `l` owns an LLR buffer of
//! `2^l` entries and a partial-sum buffer of the same size, both packed into
//! flat `2N` arrays at offset `2^l` (level `log2 N` holds the channel LLRs). The
//! recursion is only `log2 N` deep and the workspace never grows.

use std::fmt;
use std::str::FromStr;

use crate::polarcode::{BitVector, CodeSpec};
use crate::{Error, Result};

/// Check-node arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FKernel {
    /// `sign(a) sign(b) min(|a|, |b|)`.
    #[default]
    MinSum,
    /// `2 atanh(tanh(a/2) tanh(b/2))`.
    Exact,
}

impl fmt::Display for FKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FKernel::MinSum => "min-sum",
            FKernel::Exact => "exact",
        })
    }
}

impl FromStr for FKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min-sum" | "minsum" => Ok(FKernel::MinSum),
            "exact" => Ok(FKernel::Exact),
            other => Err(Error::Parse(format!("unknown f-kernel '{other}'"))),
        }
    }
}

#[inline]
fn softplus_neg(x: f64) -> f64 {
    // ln(1 + e^-x) for x >= 0
    (-x).exp().ln_1p()
}

/// Check-node update.
#[inline]
pub fn f_node(a: f64, b: f64, kernel: FKernel) -> f64 {
    let sign = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
    let m = a.abs().min(b.abs());
    match kernel {
        FKernel::MinSum => sign * m,
        FKernel::Exact => {
            if m == 0.0 {
                return 0.0;
            }
            // ln((1 + e^{a+b}) / (e^a + e^b)), rewritten to stay finite
            let (x, y) = (a.abs(), b.abs());
            let mag = m + softplus_neg(x + y) - softplus_neg((x - y).abs());
            sign * mag.max(0.0)
        }
    }
}

/// Variable-node update with partial sum `u`.
#[inline]
pub fn g_node(a: f64, b: f64, u: u8) -> f64 {
    if u == 0 {
        b + a
    } else {
        b - a
    }
}

/// Hard decision; an LLR of exactly zero decides 0.
#[inline]
pub fn hard_decision(llr: f64) -> u8 {
    (llr < 0.0) as u8
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FlipDirective {
    pub flip_index: Option<usize>,
}

impl FlipDirective {
    pub const NONE: FlipDirective = FlipDirective { flip_index: None };

    pub fn at(index: usize) -> Self {
        FlipDirective {
            flip_index: Some(index),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScResult {
    pub u_hat: BitVector,
    pub alpha_dec: Vec<f64>,
}

/// Reusable SC decoder bound to one code.
#[derive(Debug, Clone)]
pub struct ScDecoder {
    n: usize,
    levels: usize,
    frozen: Vec<bool>,
    kernel: FKernel,
    llr: Vec<f64>,
    beta: Vec<u8>,
    u_hat: Vec<u8>,
    alpha_dec: Vec<f64>,
    flip: Option<usize>,
}

impl ScDecoder {
    pub fn new(spec: &CodeSpec, kernel: FKernel) -> Self {
        let n = spec.n();
        ScDecoder {
            n,
            levels: n.trailing_zeros() as usize,
            frozen: spec.frozen_mask().to_vec(),
            kernel,
            llr: vec![0.0; 2 * n],
            beta: vec![0; 2 * n],
            u_hat: vec![0; n],
            alpha_dec: vec![0.0; n],
            flip: None,
        }
    }

    pub fn kernel(&self) -> FKernel {
        self.kernel
    }

    /// Runs one SC pass. Results are readable through [`ScDecoder::u_hat`] and
    /// [`ScDecoder::alpha_dec`] until the next call.
    pub fn decode_in_place(&mut self, alpha_ch: &[f64], flip: FlipDirective) -> Result<()> {
        if alpha_ch.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: alpha_ch.len(),
            });
        }
        if let Some(j) = flip.flip_index {
            if j >= self.n || self.frozen[j] {
                return Err(Error::InvalidFlip(j));
            }
        }
        self.flip = flip.flip_index;
        self.llr[self.n..].copy_from_slice(alpha_ch);
        self.node(self.levels, 0);
        Ok(())
    }

    pub fn decode(&mut self, alpha_ch: &[f64], flip: FlipDirective) -> Result<ScResult> {
        self.decode_in_place(alpha_ch, flip)?;
        Ok(ScResult {
            u_hat: BitVector::from_bits(self.u_hat.clone())?,
            alpha_dec: self.alpha_dec.clone(),
        })
    }

    pub fn u_hat(&self) -> &[u8] {
        &self.u_hat
    }

    pub fn alpha_dec(&self) -> &[f64] {
        &self.alpha_dec
    }

    fn node(&mut self, level: usize, first_leaf: usize) {
        if level == 0 {
            let llr = self.llr[1];
            let bit = if self.frozen[first_leaf] {
                0
            } else {
                hard_decision(llr) ^ (self.flip == Some(first_leaf)) as u8
            };
            self.alpha_dec[first_leaf] = llr;
            self.u_hat[first_leaf] = bit;
            self.beta[1] = bit;
            return;
        }
        let half = 1 << (level - 1);
        let parent = 1 << level;
        {
            let (child, rest) = self.llr.split_at_mut(parent);
            let (a, b) = rest[..parent].split_at(half);
            let out = &mut child[half..];
            match self.kernel {
                FKernel::MinSum => {
                    for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
                        let m = x.abs().min(y.abs());
                        *o = if (x < 0.0) != (y < 0.0) { -m } else { m };
                    }
                }
                FKernel::Exact => {
                    for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
                        *o = f_node(x, y, FKernel::Exact);
                    }
                }
            }
        }
        self.node(level - 1, first_leaf);
        // park the left partial sums in the first half of this level's buffer
        self.beta.copy_within(half..parent, parent);
        {
            let (child, rest) = self.llr.split_at_mut(parent);
            let (a, b) = rest[..parent].split_at(half);
            let left = &self.beta[parent..parent + half];
            for (((o, &x), &y), &u) in child[half..].iter_mut().zip(a).zip(b).zip(left) {
                *o = g_node(x, y, u);
            }
        }
        self.node(level - 1, first_leaf + half);
        let (child, rest) = self.beta.split_at_mut(parent);
        let right = &child[half..];
        let (lo, hi) = rest[..parent].split_at_mut(half);
        for ((l, h), &r) in lo.iter_mut().zip(hi.iter_mut()).zip(right) {
            *l ^= r;
            *h = r;
        }
    }
}

/// One-shot SC pass.
pub fn sc_decode(
    alpha_ch: &[f64],
    spec: &CodeSpec,
    flip: FlipDirective,
    kernel: FKernel,
) -> Result<ScResult> {
    ScDecoder::new(spec, kernel).decode(alpha_ch, flip)
}
