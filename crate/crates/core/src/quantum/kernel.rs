//! Raw amplitude kernels. Position 0 is the most significant qubit.

use super::{Matrix, C64};

#[inline]
fn bit(n: usize, pos: usize) -> usize {
    1 << (n - 1 - pos)
}

/// Applies `op` (dimension `2^positions.len()`) to the qubits at `positions`
/// of an `n`-qubit amplitude vector. The first position is the operator's most
/// significant qubit. `op` need not be unitary.
pub(crate) fn apply_matrix(amps: &mut [C64], n: usize, positions: &[usize], op: &Matrix) {
    let k = positions.len();
    let sub = 1usize << k;
    debug_assert_eq!(op.nrows(), sub);
    debug_assert_eq!(amps.len(), 1 << n);
    let masks: Vec<usize> = positions.iter().map(|&p| bit(n, p)).collect();
    let full_mask: usize = masks.iter().sum();
    let offsets: Vec<usize> = (0..sub)
        .map(|s| {
            (0..k)
                .filter(|&t| s & (1 << (k - 1 - t)) != 0)
                .map(|t| masks[t])
                .sum()
        })
        .collect();
    let mut gathered = vec![C64::new(0.0, 0.0); sub];
    for base in 0..amps.len() {
        if base & full_mask != 0 {
            continue;
        }
        for (g, off) in gathered.iter_mut().zip(&offsets) {
            *g = amps[base | off];
        }
        for (r, off) in offsets.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (c, g) in gathered.iter().enumerate() {
                acc += op[(r, c)] * g;
            }
            amps[base | off] = acc;
        }
    }
}

pub(crate) fn norm_sqr(amps: &[C64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

/// Reorders the qubits: output qubit `i` is input qubit `perm[i]`.
pub(crate) fn permute(amps: &[C64], n: usize, perm: &[usize]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); amps.len()];
    for (idx, a) in amps.iter().enumerate() {
        let mut new = 0usize;
        for (i, &src) in perm.iter().enumerate() {
            if idx & bit(n, src) != 0 {
                new |= bit(n, i);
            }
        }
        out[new] = *a;
    }
    out
}

/// Splits a basis index into the value of the qubits at `positions` (first is
/// most significant) and the index over the remaining qubits.
pub(crate) fn split_index(idx: usize, n: usize, positions: &[usize]) -> (usize, usize) {
    let mut sel = 0usize;
    let mut rest = 0usize;
    for p in 0..n {
        let b = (idx >> (n - 1 - p)) & 1;
        if positions.contains(&p) {
            continue;
        }
        rest = (rest << 1) | b;
    }
    for &p in positions {
        sel = (sel << 1) | ((idx >> (n - 1 - p)) & 1);
    }
    (sel, rest)
}

/// Inverse of [`split_index`].
pub(crate) fn join_index(sel: usize, rest: usize, n: usize, positions: &[usize]) -> usize {
    let k = positions.len();
    let mut idx = 0usize;
    for (t, &p) in positions.iter().enumerate() {
        if sel & (1 << (k - 1 - t)) != 0 {
            idx |= bit(n, p);
        }
    }
    let mut r = n - k;
    for p in 0..n {
        if positions.contains(&p) {
            continue;
        }
        r -= 1;
        if rest & (1 << r) != 0 {
            idx |= bit(n, p);
        }
    }
    idx
}
