use super::BitVector;
use crate::{Error, Result};

/// Polar transform `x = u * F^{(x)n}` over GF(2) with `F = [[1,0],[1,1]]`.
///
/// Runs `log2 N` butterfly stages in place. The transform is its own inverse.
pub fn polar_encode(u: &BitVector) -> Result<BitVector> {
    let n = u.len();
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let mut x = u.clone();
    polar_transform_in_place(x.as_mut_slice());
    Ok(x)
}

pub(crate) fn polar_transform_in_place(x: &mut [u8]) {
    let n = x.len();
    let mut half = 1;
    while half < n {
        for block in x.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= *b;
            }
        }
        half *= 2;
    }
}
