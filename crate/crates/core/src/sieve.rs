//! Necessary condition on grading dimensions for pure cohomology.
//!
//! For grading dimensions `n_p = dim 𝔤₋ₚ` the polynomial
//! `P(t) = Π_p (1 − t^p)^{n_p}` must have exactly `d+1` non-zero coefficients
//! when the cohomology is pure (`d = Σ n_p`). Equivalently
//! `c(i) = Σ_l a_l Q_l(i)` has `n − d` distinct integral zeros in `{0,…,n}`.
//!
//! Range scans expand `P` modulo the prime `2^61 − 1`, stepping `n₁` by one
//! multiplication with `(1 − t)`. A modular count above `d+1` is conclusive
//! (reduction only creates zeros); anything else is re-checked exactly.

use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::rational::exact_isqrt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SieveError {
    #[error("InvalidDimensionVector: dimension vector must be non-empty with a positive last entry")]
    InvalidDimensionVector,
    #[error("OutOfRange: i = {i} outside 0..={n}")]
    OutOfRange { i: i64, n: u64 },
    #[error("EmptyRange: the scan range contains no dimension vector")]
    EmptyRange,
    #[error("NoClosedForm: no closed form for this family")]
    NoClosedForm,
    #[error("ThreadPool: {0}")]
    ThreadPool(String),
}

/// Grading dimensions `(n₁,…,n_r)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DimensionVector(Vec<u64>);

impl DimensionVector {
    pub fn new(n: Vec<u64>) -> Result<Self, SieveError> {
        match n.last() {
            Some(&last) if last > 0 => Ok(DimensionVector(n)),
            _ => Err(SieveError::InvalidDimensionVector),
        }
    }

    /// Drops trailing zeros; `None` for the zero vector.
    pub fn trimmed(mut n: Vec<u64>) -> Option<Self> {
        while n.last() == Some(&0) {
            n.pop();
        }
        Self::new(n).ok()
    }

    pub fn entries(&self) -> &[u64] {
        &self.0
    }

    pub fn r(&self) -> usize {
        self.0.len()
    }

    pub fn d(&self) -> u64 {
        self.0.iter().sum()
    }

    /// Homogeneous dimension `n = Σ p·n_p`.
    pub fn n(&self) -> u64 {
        self.0.iter().enumerate().map(|(p, &k)| (p as u64 + 1) * k).sum()
    }
}

impl std::fmt::Display for DimensionVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Coefficients of `Π_p (1 − t^p)^{n_p}`, constant term first.
pub fn poincare_polynomial(dv: &DimensionVector) -> Vec<BigInt> {
    let n = dv.n() as usize;
    let mut c = vec![BigInt::zero(); n + 1];
    c[0] = BigInt::one();
    let mut deg = 0usize;
    for (idx, &np) in dv.entries().iter().enumerate() {
        let p = idx + 1;
        for _ in 0..np {
            deg += p;
            for i in (p..=deg).rev() {
                let prev = c[i - p].clone();
                c[i] -= prev;
            }
        }
    }
    c
}

/// Coefficients of `Π_{p≥2} (1 + t + … + t^{p−1})^{n_p}`.
pub fn a_coefficients(dv: &DimensionVector) -> Vec<BigInt> {
    let len = (dv.n() - dv.d()) as usize;
    let mut a = vec![BigInt::zero(); len + 1];
    a[0] = BigInt::one();
    let mut deg = 0usize;
    for (idx, &np) in dv.entries().iter().enumerate().skip(1) {
        let p = idx + 1;
        for _ in 0..np {
            // Multiply by 1 + t + … + t^{p−1} via prefix sums.
            let old = a.clone();
            deg += p - 1;
            let mut window = BigInt::zero();
            for i in 0..=deg {
                window += &old[i];
                if i >= p {
                    window -= &old[i - p];
                }
                a[i] = window.clone();
            }
        }
    }
    a
}

/// `Q_l(i) = Π_{j=0}^{l−1}(j−i) · Π_{j=d+l+1}^{n}(j−i)`.
fn q_l(l: u64, i: i64, d: u64, n: u64) -> BigInt {
    let mut v = BigInt::one();
    for j in 0..l {
        v *= BigInt::from(j as i64 - i);
    }
    for j in d + l + 1..=n {
        v *= BigInt::from(j as i64 - i);
    }
    v
}

fn c_with(a: &[BigInt], i: i64, d: u64, n: u64) -> BigInt {
    a.iter()
        .enumerate()
        .filter(|(_, al)| !al.is_zero())
        .map(|(l, al)| al * q_l(l as u64, i, d, n))
        .sum()
}

/// `c(i) = Σ_l a_l Q_l(i)` for `0 ≤ i ≤ n`.
pub fn c_value(dv: &DimensionVector, i: i64) -> Result<BigInt, SieveError> {
    let n = dv.n();
    if i < 0 || i as u64 > n {
        return Err(SieveError::OutOfRange { i, n });
    }
    Ok(c_with(&a_coefficients(dv), i, dv.d(), n))
}

pub fn factorial(k: u64) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, j| acc * BigInt::from(j))
}

/// The coefficient of `t^i` in `P` recovered from `c(i)`: `(−1)^i d!/(i!(n−i)!) c(i)`.
pub fn coefficient_from_c(dv: &DimensionVector, i: u64, c: &BigInt) -> BigInt {
    let num = factorial(dv.d()) * c;
    let den = factorial(i) * factorial(dv.n() - i);
    debug_assert!((&num % &den).is_zero());
    let v = num / den;
    if i % 2 == 1 {
        -v
    } else {
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SieveReport {
    pub dimension_vector: DimensionVector,
    pub d: u64,
    pub n: u64,
    pub p_coefficients: Vec<BigInt>,
    pub nonzero_count: usize,
    pub a: Vec<BigInt>,
    /// `c(0), …, c(n)`.
    pub c_values: Vec<BigInt>,
    /// Integral zeros of `c` in `{0,…,n}`.
    pub roots: Vec<u64>,
    pub pass: bool,
    /// The weight set `𝒫` (exponents of non-zero coefficients), when passing.
    pub weights: Option<Vec<u64>>,
    /// Whether `c(i₀) = 2^{n₂}⋯r^{n_r} Π_{j∈𝒫'}(j − i₀)` at a non-root `i₀`, when passing.
    pub normalization_holds: Option<bool>,
}

pub fn sieve_check(dv: &DimensionVector) -> SieveReport {
    let (d, n) = (dv.d(), dv.n());
    let p = poincare_polynomial(dv);
    let nonzero_count = p.iter().filter(|c| !c.is_zero()).count();
    let a = a_coefficients(dv);
    let c_values: Vec<BigInt> = (0..=n).map(|i| c_with(&a, i as i64, d, n)).collect();
    let roots: Vec<u64> = (0..=n).filter(|&i| c_values[i as usize].is_zero()).collect();
    let pass = nonzero_count as u64 == d + 1;
    debug_assert_eq!(pass, roots.len() as u64 == n - d);
    let (weights, normalization_holds) = if pass {
        let weights: Vec<u64> = (0..=n).filter(|&i| !c_values[i as usize].is_zero()).collect();
        let i0 = weights[0];
        let mut rhs: BigInt = dv
            .entries()
            .iter()
            .enumerate()
            .map(|(idx, &np)| num_traits::pow(BigInt::from(idx as u64 + 1), np as usize))
            .product();
        for &j in &roots {
            rhs *= BigInt::from(j as i64 - i0 as i64);
        }
        (Some(weights), Some(rhs == c_values[i0 as usize]))
    } else {
        (None, None)
    };
    SieveReport {
        dimension_vector: dv.clone(),
        d,
        n,
        p_coefficients: p,
        nonzero_count,
        a,
        c_values,
        roots,
        pass,
        weights,
        normalization_holds,
    }
}

const MODULUS: u64 = (1 << 61) - 1;

#[inline]
fn sub_mod(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + MODULUS - b
    }
}

/// `Π_{p≥2} (1 − t^p)^{n_p}` modulo the scan prime, padded to `capacity`.
fn tail_poly_mod(tail: &[u64], capacity: usize) -> Vec<u64> {
    let mut c = vec![0u64; capacity + 1];
    c[0] = 1;
    let mut deg = 0usize;
    for (idx, &np) in tail.iter().enumerate() {
        let p = idx + 2;
        for _ in 0..np {
            deg += p;
            for i in (p..=deg).rev() {
                c[i] = sub_mod(c[i], c[i - p]);
            }
        }
    }
    c
}

/// Exact pass/fail for every `n₁` in `range` with fixed `(n₂,…,n_r)`.
fn scan_line(tail: &[u64], range: RangeInclusive<u64>) -> Vec<(u64, bool)> {
    let (lo, hi) = (*range.start(), *range.end());
    let tail_n: u64 = tail.iter().enumerate().map(|(i, &k)| (i as u64 + 2) * k).sum();
    let tail_d: u64 = tail.iter().sum();
    let capacity = (tail_n + hi) as usize;
    let mut c = tail_poly_mod(tail, capacity);
    let mut deg = tail_n as usize;
    for _ in 0..lo {
        deg += 1;
        for i in (1..=deg).rev() {
            c[i] = sub_mod(c[i], c[i - 1]);
        }
    }
    let mut out = Vec::with_capacity((hi + 1 - lo) as usize);
    for n1 in lo..=hi {
        if n1 > lo {
            deg += 1;
            for i in (1..=deg).rev() {
                c[i] = sub_mod(c[i], c[i - 1]);
            }
        }
        let d = n1 + tail_d;
        if d == 0 {
            continue;
        }
        let modular = c[..=deg].iter().filter(|&&x| x != 0).count() as u64;
        let pass = if modular > d + 1 {
            false
        } else {
            let mut full = vec![n1];
            full.extend_from_slice(tail);
            let dv = DimensionVector::trimmed(full).expect("d > 0");
            let exact = poincare_polynomial(&dv).iter().filter(|x| !x.is_zero()).count() as u64;
            exact == d + 1
        };
        out.push((n1, pass));
    }
    out
}

/// Ranges for `n₁, …, n_r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shape {
    pub ranges: Vec<RangeInclusive<u64>>,
}

impl Shape {
    pub fn new(ranges: Vec<RangeInclusive<u64>>) -> Self {
        Shape { ranges }
    }

    fn tails(&self) -> Vec<Vec<u64>> {
        let mut out = vec![Vec::new()];
        for r in self.ranges.iter().skip(1) {
            let mut next = Vec::new();
            for prefix in &out {
                for v in r.clone() {
                    let mut t = prefix.clone();
                    t.push(v);
                    next.push(t);
                }
            }
            out = next;
        }
        out
    }
}

/// Runs `f` on a pool with `jobs` threads (`None`: rayon default).
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, SieveError> {
    match jobs {
        None => Ok(f()),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| SieveError::ThreadPool(e.to_string())),
    }
}

/// All passing vectors in the shape, trailing zeros dropped, in lexicographic order.
pub fn sieve_range(shape: &Shape) -> Result<Vec<DimensionVector>, SieveError> {
    if shape.ranges.is_empty() || shape.ranges.iter().any(|r| r.is_empty()) {
        return Err(SieveError::EmptyRange);
    }
    let n1 = shape.ranges[0].clone();
    let tails = shape.tails();
    let per_tail: Vec<Vec<DimensionVector>> = tails
        .par_iter()
        .map(|tail| {
            scan_line(tail, n1.clone())
                .into_iter()
                .filter(|&(_, pass)| pass)
                .filter_map(|(a, _)| {
                    let mut v = vec![a];
                    v.extend_from_slice(tail);
                    DimensionVector::trimmed(v)
                })
                .collect()
        })
        .collect();
    let scanned_any = tails.iter().any(|t| n1.clone().any(|a| a + t.iter().sum::<u64>() > 0));
    if !scanned_any {
        return Err(SieveError::EmptyRange);
    }
    let mut all: Vec<(Vec<u64>, DimensionVector)> = per_tail
        .into_iter()
        .flatten()
        .map(|dv| {
            let mut key = dv.entries().to_vec();
            key.resize(shape.ranges.len(), 0);
            (key, dv)
        })
        .collect();
    all.sort();
    Ok(all.into_iter().map(|(_, dv)| dv).collect())
}

/// `c` written as `x^ε · R(x²)` in `x = n − 2i`, with `R` of degree ≤ 2.
/// `scale·c(i) = x^ε (A y² + B y + C)` with `y = x²`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedForm {
    pub scale: BigInt,
    pub odd: bool,
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
}

impl ClosedForm {
    pub fn eval(&self, n: u64, i: i64) -> BigInt {
        let x = BigInt::from(n as i64 - 2 * i);
        let y = &x * &x;
        let r = &self.a * &y * &y + &self.b * &y + &self.c;
        if self.odd {
            x * r
        } else {
            r
        }
    }

    /// Distinct integral zeros `i ∈ {0,…,n}` coming from `R(x²) = 0`.
    pub fn radical_roots(&self, n: u64) -> Vec<u64> {
        let mut ys: Vec<BigInt> = Vec::new();
        if self.a.is_zero() {
            if !self.b.is_zero() && (&self.c % &self.b).is_zero() {
                ys.push(-&self.c / &self.b);
            }
        } else {
            let disc = &self.b * &self.b - BigInt::from(4) * &self.a * &self.c;
            if let Some(s) = exact_isqrt(&disc) {
                let two_a = BigInt::from(2) * &self.a;
                for num in [-&self.b + &s, -&self.b - &s] {
                    if (&num % &two_a).is_zero() {
                        ys.push(num / &two_a);
                    }
                }
            }
        }
        let mut roots = BTreeSet::new();
        for y in ys {
            let Some(t) = exact_isqrt(&y) else { continue };
            let Some(t) = t.to_i64() else { continue };
            for x in [t, -t] {
                let twice_i = n as i64 - x;
                if twice_i % 2 == 0 && twice_i >= 0 && twice_i / 2 <= n as i64 {
                    roots.insert((twice_i / 2) as u64);
                }
            }
        }
        roots.into_iter().collect()
    }

    /// All distinct integral zeros in `{0,…,n}`, including `i = n/2` for odd forms.
    pub fn integral_roots(&self, n: u64) -> Vec<u64> {
        let mut r: BTreeSet<u64> = self.radical_roots(n).into_iter().collect();
        if self.odd && n.is_multiple_of(2) {
            r.insert(n / 2);
        }
        r.into_iter().collect()
    }
}

/// The worked closed forms, for `(n₁, n₂)` and `(n₁, n₂, n₃)` families, at homogeneous dimension `n`.
pub fn closed_form(tail: &[u64], n: u64) -> Result<ClosedForm, SieveError> {
    let n = BigInt::from(n);
    let i = |v: i64| BigInt::from(v);
    let n2 = &n * &n;
    let form = |scale: i64, odd: bool, a: BigInt, b: BigInt, c: BigInt| ClosedForm { scale: i(scale), odd, a, b, c };
    match tail {
        [2] => Ok(form(1, false, i(0), i(1), -&n)),
        [3] => Ok(form(1, true, i(0), i(1), -(i(3) * &n - i(2)))),
        [4] => {
            let s = i(3) * &n - i(4);
            let t = i(6) * &n2 - i(18) * &n + 16;
            Ok(form(1, false, i(1), i(-2) * &s, &s * &s - t))
        }
        [5] => {
            let s = i(5) * &n - i(10);
            let t = i(10) * &n2 - i(50) * &n + 76;
            Ok(form(1, true, i(1), i(-2) * &s, &s * &s - t))
        }
        [1, 1] => Ok(form(4, true, i(0), i(3), &n2 - i(12) * &n + 8)),
        [2, 1] => {
            let b = &n2 - i(23) * &n + 30;
            let c: BigInt = -(&n * (&n2 - i(14) * &n + i(24)));
            Ok(form(4, false, i(3), b, c))
        }
        [1, 2] => {
            let b = i(6) * &n2 - i(132) * &n + 252;
            let c = &n2 * &n2 - i(28) * &n2 * &n + i(308) * &n2 - i(800) * &n + 384;
            Ok(form(16, true, i(9), b, c))
        }
        _ => Err(SieveError::NoClosedForm),
    }
}

/// One `n₁` of a closed-form family scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyRow {
    pub n1: u64,
    pub n: u64,
    pub d: u64,
    pub roots: Vec<u64>,
    pub radical_roots: Vec<u64>,
    pub pass: bool,
}

/// Scans `(n₁, tail…)` over all `n₁` with homogeneous dimension in `n_range`,
/// using the closed form of `c`.
pub fn family_scan(tail: &[u64], n_range: RangeInclusive<u64>) -> Result<Vec<FamilyRow>, SieveError> {
    closed_form(tail, 0)?;
    let tail_n: u64 = tail.iter().enumerate().map(|(i, &k)| (i as u64 + 2) * k).sum();
    let tail_d: u64 = tail.iter().sum();
    let lo = (*n_range.start()).max(tail_n);
    let hi = *n_range.end();
    if lo > hi {
        return Err(SieveError::EmptyRange);
    }
    let rows = (lo..=hi)
        .into_par_iter()
        .map(|n| {
            let n1 = n - tail_n;
            let d = n1 + tail_d;
            let form = closed_form(tail, n).expect("checked above");
            let roots = form.integral_roots(n);
            let radical_roots = form.radical_roots(n);
            let pass = roots.len() as u64 == n - d;
            FamilyRow { n1, n, d, roots, radical_roots, pass }
        })
        .collect();
    Ok(rows)
}

/// Integral roots of the worked closed form, without the `i = n/2` factor.
pub fn radical_root_count(tail: &[u64], n: u64) -> Result<usize, SieveError> {
    Ok(closed_form(tail, n)?.radical_roots(n).len())
}

/// Whether `n` is a perfect square.
pub fn is_square(n: u64) -> bool {
    exact_isqrt(&BigInt::from(n)).is_some()
}

/// Recognises the families known to pass: abelian in one degree, contact
/// `(2k, 1)`, `(n₁, 2)` with `n` square, `(n₁, 3)` with `n` even and `3n−2`
/// square, `(5,1,1)` and `(2,1,2)`, each possibly regraded by a factor `s`
/// (so that `𝔤₋ₚ` moves to `𝔤₋ₛₚ`).
pub fn is_known_family(dv: &DimensionVector) -> bool {
    let e = dv.entries();
    let support: Vec<usize> = (0..e.len()).filter(|&i| e[i] > 0).collect();
    let s = support.iter().fold(0usize, |g, &i| num_integer::gcd(g, i + 1));
    let base: Vec<u64> = (0..e.len() / s).map(|k| e[(k + 1) * s - 1]).collect();
    let base = DimensionVector::trimmed(base).expect("non-zero");
    let b = base.entries();
    let n = base.n();
    match b {
        [_] => true,
        [n1, 1] => n1 % 2 == 0,
        [_, 2] => is_square(n),
        [_, 3] => n.is_multiple_of(2) && is_square(3 * n - 2),
        [5, 1, 1] | [2, 1, 2] => true,
        _ => false,
    }
}
