// Copyright 2026 The stmqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Product-basis layout shared by every state and operator.
//!
//! Site `k` owns bit `2k` (electron) and bit `2k + 1` (nucleus) of a basis
//! index. A set bit means the spin is in its excited Zeeman state.

#[inline]
pub fn electron_bit(k: usize) -> usize {
    1 << (2 * k)
}

#[inline]
pub fn nuclear_bit(k: usize) -> usize {
    1 << (2 * k + 1)
}

#[inline]
pub fn electron_excited(index: usize, k: usize) -> bool {
    index & electron_bit(k) != 0
}

#[inline]
pub fn nuclear_excited(index: usize, k: usize) -> bool {
    index & nuclear_bit(k) != 0
}

/// Mask of every electron bit in an `n_ions` chain.
pub fn electron_mask(n_ions: usize) -> usize {
    (0..n_ions).map(electron_bit).sum()
}

/// Mask of every nuclear bit in an `n_ions` chain.
pub fn nuclear_mask(n_ions: usize) -> usize {
    (0..n_ions).map(nuclear_bit).sum()
}

pub fn dimension(n_ions: usize) -> usize {
    1 << (2 * n_ions)
}

/// Basis index with the given nuclear excitations and electron excitations
/// (one flag per site).
pub fn index_of(nuclear: &[bool], electron: &[bool]) -> usize {
    let mut idx = 0;
    for (k, &on) in nuclear.iter().enumerate() {
        if on {
            idx |= nuclear_bit(k);
        }
    }
    for (k, &on) in electron.iter().enumerate() {
        if on {
            idx |= electron_bit(k);
        }
    }
    idx
}

/// Spin projection along the excitation axis: -1/2 ground, +1/2 excited.
#[inline]
pub fn projection(excited: bool) -> f64 {
    if excited {
        0.5
    } else {
        -0.5
    }
}
