//! The universal enveloping algebra U(𝔤) in its PBW basis, and matrices over it.
//!
//! A PBW monomial `X₁^{e₁}⋯X_m^{e_m}` is an exponent vector. Products are
//! normalised by repeatedly moving a generator `X_j` left across `X_i` with
//! `i < j`, using `X_j X_i = X_i X_j + [X_j, X_i]`. Elements act on functions
//! as left-invariant differential operators, and their Heisenberg order is
//! `Σ e_i |deg X_i|`.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::rc::Rc;

use num_traits::{One, Zero};

use crate::graded_lie::GradedLieAlgebra;
use crate::linalg::QMatrix;
use crate::rational::{format_rational, Q};

pub type Monomial = Vec<u32>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum UeaError {
    #[error("AlgebraMismatch: operands belong to different Lie algebras")]
    AlgebraMismatch,
    #[error("DimensionMismatch: matrix shapes {left:?} and {right:?} do not compose")]
    DimensionMismatch { left: (usize, usize), right: (usize, usize) },
}

type Terms = BTreeMap<Monomial, Q>;

fn add_into(acc: &mut Terms, m: &Monomial, c: &Q) {
    if c.is_zero() {
        return;
    }
    let remove = match acc.get_mut(m) {
        Some(v) => {
            *v += c;
            v.is_zero()
        }
        None => {
            acc.insert(m.clone(), c.clone());
            false
        }
    };
    if remove {
        acc.remove(m);
    }
}

/// An element of U(𝔤), tagged with the fingerprint of its algebra.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UeaElement {
    fingerprint: u64,
    terms: Terms,
}

impl UeaElement {
    pub fn zero(env: &Enveloping) -> Self {
        UeaElement { fingerprint: env.fingerprint, terms: Terms::new() }
    }

    pub fn scalar(env: &Enveloping, c: Q) -> Self {
        let mut terms = Terms::new();
        add_into(&mut terms, &vec![0; env.dim()], &c);
        UeaElement { fingerprint: env.fingerprint, terms }
    }

    pub fn one(env: &Enveloping) -> Self {
        Self::scalar(env, Q::one())
    }

    pub fn generator(env: &Enveloping, i: usize) -> Self {
        Self::monomial(env, env.unit(i), Q::one())
    }

    pub fn monomial(env: &Enveloping, m: Monomial, c: Q) -> Self {
        assert_eq!(m.len(), env.dim());
        let mut terms = Terms::new();
        add_into(&mut terms, &m, &c);
        UeaElement { fingerprint: env.fingerprint, terms }
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn check(&self, other: &Self) -> Result<(), UeaError> {
        if self.fingerprint == other.fingerprint {
            Ok(())
        } else {
            Err(UeaError::AlgebraMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, UeaError> {
        self.check(other)?;
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            add_into(&mut terms, m, c);
        }
        Ok(UeaElement { fingerprint: self.fingerprint, terms })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, UeaError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Q::one())
    }

    pub fn scale(&self, s: &Q) -> Self {
        if s.is_zero() {
            return UeaElement { fingerprint: self.fingerprint, terms: Terms::new() };
        }
        UeaElement {
            fingerprint: self.fingerprint,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect(),
        }
    }

    /// Constant term (coefficient of the empty monomial).
    pub fn constant_term(&self) -> Q {
        self.terms
            .iter()
            .find(|(m, _)| m.iter().all(|&e| e == 0))
            .map_or_else(Q::zero, |(_, c)| c.clone())
    }
}

/// Multiplication context for U(𝔤) with a memo table for straightening.
/// The memo is thread-confined (`RefCell`), so a context is not `Sync`.
pub struct Enveloping {
    alg: GradedLieAlgebra,
    weights: Vec<u64>,
    fingerprint: u64,
    memo: RefCell<HashMap<(usize, Monomial), Rc<Terms>>>,
}

impl fmt::Debug for Enveloping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Enveloping").field("dim", &self.dim()).field("fingerprint", &self.fingerprint).finish()
    }
}

impl Enveloping {
    pub fn new(alg: &GradedLieAlgebra) -> Self {
        Enveloping {
            alg: alg.clone(),
            weights: alg.degrees().iter().map(|d| d.unsigned_abs() as u64).collect(),
            fingerprint: alg.fingerprint(),
            memo: RefCell::new(HashMap::new()),
        }
    }

    pub fn algebra(&self) -> &GradedLieAlgebra {
        &self.alg
    }

    pub fn dim(&self) -> usize {
        self.alg.dim()
    }

    pub fn unit(&self, i: usize) -> Monomial {
        let mut m = vec![0; self.dim()];
        m[i] = 1;
        m
    }

    pub fn monomial_order(&self, m: &Monomial) -> u64 {
        m.iter().zip(&self.weights).map(|(&e, &w)| e as u64 * w).sum()
    }

    /// Largest Heisenberg order among the terms, `None` for zero.
    pub fn order(&self, u: &UeaElement) -> Option<u64> {
        u.terms.keys().map(|m| self.monomial_order(m)).max()
    }

    /// Smallest Heisenberg order among the terms, `None` for zero.
    pub fn min_order(&self, u: &UeaElement) -> Option<u64> {
        u.terms.keys().map(|m| self.monomial_order(m)).min()
    }

    /// The part of `u` of Heisenberg order exactly `k`.
    pub fn homogeneous_part(&self, u: &UeaElement, k: u64) -> UeaElement {
        UeaElement {
            fingerprint: u.fingerprint,
            terms: u.terms.iter().filter(|(m, _)| self.monomial_order(m) == k).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// `X_j · X^m` in PBW form.
    fn left_mul_generator(&self, j: usize, m: &Monomial) -> Rc<Terms> {
        let key = (j, m.clone());
        if let Some(hit) = self.memo.borrow().get(&key) {
            return Rc::clone(hit);
        }
        let mut out = Terms::new();
        match m.iter().position(|&e| e > 0) {
            Some(i) if i < j => {
                // X_j X_i X^{m'} = X_i (X_j X^{m'}) + Σ_k c^k_{ji} X_k X^{m'}
                let mut rest = m.clone();
                rest[i] -= 1;
                let inner = self.left_mul_generator(j, &rest);
                for (mono, c) in inner.iter() {
                    for (mm, cc) in self.left_mul_generator(i, mono).iter() {
                        add_into(&mut out, mm, &(c * cc));
                    }
                }
                for (k, c) in self.alg.bracket_terms(j, i) {
                    for (mm, cc) in self.left_mul_generator(k, &rest).iter() {
                        add_into(&mut out, mm, &(&c * cc));
                    }
                }
            }
            _ => {
                let mut mm = m.clone();
                mm[j] += 1;
                out.insert(mm, Q::one());
            }
        }
        let out = Rc::new(out);
        self.memo.borrow_mut().insert(key, Rc::clone(&out));
        out
    }

    fn check(&self, u: &UeaElement) -> Result<(), UeaError> {
        if u.fingerprint == self.fingerprint {
            Ok(())
        } else {
            Err(UeaError::AlgebraMismatch)
        }
    }

    /// `X^a · v` for a single monomial `X^a`.
    fn monomial_times(&self, a: &Monomial, v: &Terms) -> Terms {
        let mut current = v.clone();
        for idx in (0..a.len()).rev() {
            for _ in 0..a[idx] {
                let mut next = Terms::new();
                for (mono, c) in &current {
                    for (mm, cc) in self.left_mul_generator(idx, mono).iter() {
                        add_into(&mut next, mm, &(c * cc));
                    }
                }
                current = next;
            }
        }
        current
    }

    pub fn multiply(&self, u: &UeaElement, v: &UeaElement) -> Result<UeaElement, UeaError> {
        self.check(u)?;
        self.check(v)?;
        let mut out = Terms::new();
        for (a, ca) in &u.terms {
            for (m, c) in self.monomial_times(a, &v.terms) {
                add_into(&mut out, &m, &(ca * c));
            }
        }
        Ok(UeaElement { fingerprint: self.fingerprint, terms: out })
    }

    /// The anti-involution with `X_i ↦ −X_i`, i.e. the formal adjoint for a
    /// unimodular group: `(X_{i₁}⋯X_{i_k})† = (−1)^k X_{i_k}⋯X_{i₁}`.
    pub fn dagger(&self, u: &UeaElement) -> UeaElement {
        let mut out = Terms::new();
        for (a, c) in &u.terms {
            // Reverse word X_m^{a_m}⋯X_1^{a_1}, built by left multiplication.
            let mut word: Terms = Terms::new();
            word.insert(vec![0; self.dim()], Q::one());
            for (idx, &e) in a.iter().enumerate() {
                for _ in 0..e {
                    let mut next = Terms::new();
                    for (mono, cc) in &word {
                        for (mm, c3) in self.left_mul_generator(idx, mono).iter() {
                            add_into(&mut next, mm, &(cc * c3));
                        }
                    }
                    word = next;
                }
            }
            let k: u32 = a.iter().sum();
            let sign = if k.is_multiple_of(2) { c.clone() } else { -c.clone() };
            for (m, cc) in word {
                add_into(&mut out, &m, &(&sign * cc));
            }
        }
        UeaElement { fingerprint: self.fingerprint, terms: out }
    }

    pub fn format_monomial(&self, m: &Monomial) -> String {
        let parts: Vec<String> = m
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| if e == 1 { format!("X{}", i + 1) } else { format!("X{}^{}", i + 1, e) })
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }

    pub fn format(&self, u: &UeaElement) -> String {
        if u.is_zero() {
            return "0".to_string();
        }
        let parts: Vec<String> = u
            .terms
            .iter()
            .map(|(m, c)| format!("({})*{}", format_rational(c), self.format_monomial(m)))
            .collect();
        parts.join(" + ")
    }
}

/// A matrix of U(𝔤) elements, acting on vector-valued functions.
/// Entry `(i, j)` maps component `j` of the source to component `i` of the target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UeaMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<UeaElement>,
    /// Upper bound for the Heisenberg order of every entry.
    pub declared_order: u64,
}

impl UeaMatrix {
    pub fn zeros(env: &Enveloping, rows: usize, cols: usize) -> Self {
        UeaMatrix { rows, cols, entries: vec![UeaElement::zero(env); rows * cols], declared_order: 0 }
    }

    pub fn from_scalar(env: &Enveloping, m: &QMatrix) -> Self {
        let mut out = Self::zeros(env, m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out.entries[i * m.ncols() + j] = UeaElement::scalar(env, m[(i, j)].clone());
            }
        }
        out
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &UeaElement {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, u: UeaElement) {
        self.entries[i * self.cols + j] = u;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(UeaElement::is_zero)
    }

    /// Largest order among the entries, `None` if the matrix is zero.
    pub fn max_order(&self, env: &Enveloping) -> Option<u64> {
        self.entries.iter().filter_map(|u| env.order(u)).max()
    }

    /// Smallest order among the non-zero entries.
    pub fn min_order(&self, env: &Enveloping) -> Option<u64> {
        self.entries.iter().filter_map(|u| env.min_order(u)).min()
    }

    /// Sets `declared_order` to the actual maximal order.
    pub fn with_actual_order(mut self, env: &Enveloping) -> Self {
        self.declared_order = self.max_order(env).unwrap_or(0);
        self
    }

    /// Constant terms of all entries.
    pub fn order_zero_part(&self) -> QMatrix {
        let mut m = QMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self.get(i, j).constant_term();
            }
        }
        m
    }

    pub fn add(&self, other: &Self) -> Result<Self, UeaError> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(UeaError::DimensionMismatch { left: (self.rows, self.cols), right: (other.rows, other.cols) });
        }
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a.add(b)).collect::<Result<_, _>>()?;
        Ok(UeaMatrix {
            rows: self.rows,
            cols: self.cols,
            entries,
            declared_order: self.declared_order.max(other.declared_order),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, UeaError> {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn scale(&self, s: &Q) -> Self {
        UeaMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|u| u.scale(s)).collect(),
            declared_order: self.declared_order,
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, env: &Enveloping, other: &Self) -> Result<Self, UeaError> {
        if self.cols != other.rows {
            return Err(UeaError::DimensionMismatch { left: (self.rows, self.cols), right: (other.rows, other.cols) });
        }
        let mut out = Self::zeros(env, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..other.cols {
                let mut acc = UeaElement::zero(env);
                for j in 0..self.cols {
                    let a = self.get(i, j);
                    let b = other.get(j, k);
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc = acc.add(&env.multiply(a, b)?)?;
                }
                out.set(i, k, acc);
            }
        }
        out.declared_order = self.declared_order + other.declared_order;
        Ok(out)
    }

    /// `m · self` for a constant matrix `m`.
    pub fn scalar_left(&self, env: &Enveloping, m: &QMatrix) -> Self {
        assert_eq!(m.ncols(), self.rows);
        let mut out = Self::zeros(env, m.nrows(), self.cols);
        for i in 0..m.nrows() {
            for k in 0..self.cols {
                let mut terms = Terms::new();
                for j in 0..self.rows {
                    let c = &m[(i, j)];
                    if c.is_zero() {
                        continue;
                    }
                    for (mono, v) in &self.get(j, k).terms {
                        add_into(&mut terms, mono, &(c * v));
                    }
                }
                out.set(i, k, UeaElement { fingerprint: env.fingerprint, terms });
            }
        }
        out.declared_order = self.declared_order;
        out
    }

    /// `self · m` for a constant matrix `m`.
    pub fn scalar_right(&self, env: &Enveloping, m: &QMatrix) -> Self {
        self.transpose().scalar_left(env, &m.transpose()).transpose()
    }

    pub fn transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.get(i, j).clone());
            }
        }
        UeaMatrix { rows: self.cols, cols: self.rows, entries, declared_order: self.declared_order }
    }

    /// Entrywise [`Enveloping::dagger`] followed by transposition.
    pub fn dagger_transpose(&self, env: &Enveloping) -> Self {
        let mut t = self.transpose();
        for e in t.entries.iter_mut() {
            *e = env.dagger(e);
        }
        t
    }

    /// Non-zero entries as `(row, col, monomial, coefficient)`, row-major and
    /// monomials in PBW order.
    pub fn records(&self) -> Vec<(usize, usize, Monomial, Q)> {
        let mut out = Vec::new();
        for i in 0..self.rows {
            for j in 0..self.cols {
                for (m, c) in &self.get(i, j).terms {
                    out.push((i, j, m.clone(), c.clone()));
                }
            }
        }
        out
    }
}

pub fn uea_multiply(env: &Enveloping, u: &UeaElement, v: &UeaElement) -> Result<UeaElement, UeaError> {
    env.multiply(u, v)
}

/// Formal adjoint `A* = G_s⁻¹ (A†)ᵀ G_t` of `A: source → target`.
pub fn formal_adjoint_uea(env: &Enveloping, op: &UeaMatrix, source_gram: &QMatrix, target_gram: &QMatrix) -> UeaMatrix {
    let inv = source_gram.inverse().expect("Gram matrices are invertible");
    op.dagger_transpose(env).scalar_left(env, &inv).scalar_right(env, target_gram)
}
