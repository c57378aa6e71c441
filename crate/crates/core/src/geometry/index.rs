//! Row-major multi-index helpers shared by the raster routines.

/// Strides for row-major layout, last axis fastest.
pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for a in (0..dims.len().saturating_sub(1)).rev() {
        s[a] = s[a + 1] * dims[a + 1];
    }
    s
}

pub(crate) fn flat(idx: &[usize], strides: &[usize]) -> usize {
    idx.iter().zip(strides).map(|(i, s)| i * s).sum()
}

pub(crate) fn unflat(mut k: usize, dims: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; dims.len()];
    for a in (0..dims.len()).rev() {
        idx[a] = k % dims[a];
        k /= dims[a];
    }
    idx
}

/// Advances `idx` through the box `[lo, hi]` (inclusive) in row-major order;
/// returns false once exhausted.
pub(crate) fn next_in_box(idx: &mut [i64], lo: &[i64], hi: &[i64]) -> bool {
    for a in (0..idx.len()).rev() {
        if idx[a] < hi[a] {
            idx[a] += 1;
            return true;
        }
        idx[a] = lo[a];
    }
    false
}

/// All subsets of `0..n` as bit masks, `0..2^n`.
pub(crate) fn corners(n: usize) -> std::ops::Range<usize> {
    0..(1usize << n)
}
