//! Bookkeeping for the exterior algebra Λ𝔤* on a dual basis θ¹,…,θᵐ.
//!
//! A basis monomial θ^{i₁}∧…∧θ^{i_q} with i₁<…<i_q is stored as a bitmask.
//! Within each form degree the monomials are listed lexicographically in their
//! index tuples.

use std::collections::HashMap;

use num_traits::Zero;

use crate::linalg::QMatrix;
use crate::rational::Q;

pub type Mask = u32;

pub const MAX_DIM: usize = 24;

#[derive(Clone, Debug)]
pub struct ExteriorBasis {
    m: usize,
    by_degree: Vec<Vec<Mask>>,
    position: HashMap<Mask, usize>,
}

impl ExteriorBasis {
    pub fn new(m: usize) -> Self {
        assert!(m <= MAX_DIM, "exterior algebra of dimension {m} is too large");
        let by_degree: Vec<Vec<Mask>> = (0..=m).map(|q| subsets(m, q)).collect();
        let mut position = HashMap::new();
        for list in &by_degree {
            for (i, &mask) in list.iter().enumerate() {
                position.insert(mask, i);
            }
        }
        ExteriorBasis { m, by_degree, position }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn len(&self, q: usize) -> usize {
        self.by_degree.get(q).map_or(0, Vec::len)
    }

    pub fn is_empty(&self, q: usize) -> bool {
        self.len(q) == 0
    }

    pub fn basis(&self, q: usize) -> &[Mask] {
        &self.by_degree[q]
    }

    /// Position of a monomial within its form degree.
    pub fn index(&self, mask: Mask) -> usize {
        self.position[&mask]
    }

    pub fn top(&self) -> Mask {
        full_mask(self.m)
    }

    /// Matrix of exterior multiplication ε(θⁱ): Λ^q → Λ^{q+1}.
    pub fn epsilon(&self, i: usize, q: usize) -> QMatrix {
        let mut e = QMatrix::zeros(self.len(q + 1), self.len(q));
        if q >= self.m {
            return e;
        }
        let gen: Mask = 1 << i;
        for (col, &mask) in self.by_degree[q].iter().enumerate() {
            if let Some(sign) = wedge_sign(gen, mask) {
                e[(self.index(gen | mask), col)] = Q::from_integer(sign.into());
            }
        }
        e
    }

    /// Coordinates of α∧β for α ∈ Λ^p and β ∈ Λ^r.
    pub fn wedge(&self, p: usize, alpha: &[Q], r: usize, beta: &[Q]) -> Vec<Q> {
        let mut out = vec![Q::zero(); self.len(p + r)];
        if p + r > self.m {
            return out;
        }
        for (a, x) in self.by_degree[p].iter().zip(alpha) {
            if x.is_zero() {
                continue;
            }
            for (b, y) in self.by_degree[r].iter().zip(beta) {
                if y.is_zero() {
                    continue;
                }
                if let Some(s) = wedge_sign(*a, *b) {
                    let v = x * y;
                    let slot = &mut out[self.index(a | b)];
                    if s > 0 {
                        *slot += v;
                    } else {
                        *slot -= v;
                    }
                }
            }
        }
        out
    }
}

pub fn full_mask(m: usize) -> Mask {
    if m == 0 {
        0
    } else {
        Mask::MAX >> (Mask::BITS as usize - m)
    }
}

/// All q-subsets of {0,…,m−1} in lexicographic order of their sorted tuples.
pub fn subsets(m: usize, q: usize) -> Vec<Mask> {
    fn rec(start: usize, m: usize, left: usize, acc: Mask, out: &mut Vec<Mask>) {
        if left == 0 {
            out.push(acc);
            return;
        }
        for i in start..=m - left {
            rec(i + 1, m, left - 1, acc | (1 << i), out);
        }
    }
    let mut out = Vec::new();
    if q <= m {
        rec(0, m, q, 0, &mut out);
    }
    out
}

pub fn indices(mask: Mask) -> Vec<usize> {
    (0..Mask::BITS as usize).filter(|&i| mask >> i & 1 == 1).collect()
}

/// Sign s with θ^A∧θ^B = s·θ^{A∪B}, or `None` when A and B overlap.
pub fn wedge_sign(a: Mask, b: Mask) -> Option<i32> {
    if a & b != 0 {
        return None;
    }
    // Count pairs (i ∈ A, j ∈ B) with i > j.
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        inversions += (a >> j >> 1).count_ones();
    }
    Some(if inversions.is_multiple_of(2) { 1 } else { -1 })
}
