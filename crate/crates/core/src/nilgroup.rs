//! Exact arithmetic in the simply connected (2,3,5) group in exponential coordinates.
//!
//! An element is `exp(Σ x_i X_i)` with the bracket table
//! `[X1,X2]=X3, [X1,X3]=X4, [X2,X3]=X5`. `γ₁ = exp(X1)` and `γ₂ = exp(X2)`
//! generate the lattice Γ₀.

use std::fmt;

use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;

use crate::graded_lie::{automorphism_from_generators, grading_automorphism, GradedAutomorphism, GradedLieAlgebra, GradedLieError};
use crate::rational::{format_rational, is_integer, parse_rational, q, Q};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NilgroupError {
    #[error("BadGeneratorShape: generator {index} is not in the required term of the lower central series")]
    BadGeneratorShape { index: usize },
    #[error("DegenerateGenerators: the first two generators do not span 𝔤/[𝔤,𝔤]")]
    DegenerateGenerators,
    #[error("NotUnimodular: determinant {det}")]
    NotUnimodular { det: i64 },
    #[error("StepTooLarge: the algebra is not nilpotent of step at most 3")]
    StepTooLarge,
    #[error("ParseError: {0}")]
    Parse(String),
    #[error(transparent)]
    Lie(#[from] GradedLieError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupElement(pub [Q; 5]);

impl GroupElement {
    pub fn identity() -> Self {
        GroupElement(std::array::from_fn(|_| Q::zero()))
    }

    pub fn from_i64(x: [i64; 5]) -> Self {
        GroupElement(x.map(q))
    }

    pub fn from_slice(x: &[Q]) -> Self {
        assert_eq!(x.len(), 5);
        GroupElement(std::array::from_fn(|i| x[i].clone()))
    }

    pub fn gamma1() -> Self {
        Self::from_i64([1, 0, 0, 0, 0])
    }

    pub fn gamma2() -> Self {
        Self::from_i64([0, 1, 0, 0, 0])
    }

    pub fn coords(&self) -> &[Q; 5] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn inverse(&self) -> Self {
        GroupElement(self.0.clone().map(|x| -x))
    }

    /// `exp(k·log x)`, valid for every rational `k` since the coordinates are of the first kind.
    pub fn pow(&self, k: &Q) -> Self {
        GroupElement(self.0.clone().map(|x| x * k))
    }

    /// Parses five comma- or whitespace-separated rationals, optionally in parentheses.
    pub fn parse(s: &str) -> Result<Self, NilgroupError> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let parts: Vec<&str> = inner.split(|c: char| c == ',' || c.is_whitespace()).filter(|p| !p.is_empty()).collect();
        if parts.len() != 5 {
            return Err(NilgroupError::Parse(format!("expected 5 coordinates, found {}", parts.len())));
        }
        let mut out = Vec::with_capacity(5);
        for p in parts {
            out.push(parse_rational(p).map_err(|e| NilgroupError::Parse(format!("{p}: {e}")))?);
        }
        Ok(Self::from_slice(&out))
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(format_rational).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// The closed-form product in exponential coordinates.
pub fn bch_multiply(x: &GroupElement, y: &GroupElement) -> GroupElement {
    let [x1, x2, x3, x4, x5] = &x.0;
    let [y1, y2, y3, y4, y5] = &y.0;
    let w = x1 * y2 - x2 * y1;
    let half = Q::new(1.into(), 2.into());
    let twelfth = Q::new(1.into(), 12.into());
    GroupElement([
        x1 + y1,
        x2 + y2,
        x3 + y3 + &w * &half,
        x4 + y4 + (x1 * y3 - x3 * y1) * &half + (x1 - y1) * &w * &twelfth,
        x5 + y5 + (x2 * y3 - x3 * y2) * &half + (x2 - y2) * &w * &twelfth,
    ])
}

pub fn multiply_all<'a>(xs: impl IntoIterator<Item = &'a GroupElement>) -> GroupElement {
    xs.into_iter().fold(GroupElement::identity(), |acc, x| bch_multiply(&acc, x))
}

/// `x y x⁻¹ y⁻¹` through the closed form.
pub fn commutator(x: &GroupElement, y: &GroupElement) -> GroupElement {
    let [x1, x2, x3, ..] = &x.0;
    let [y1, y2, y3, ..] = &y.0;
    let w = x1 * y2 - x2 * y1;
    let half = Q::new(1.into(), 2.into());
    GroupElement([
        Q::zero(),
        Q::zero(),
        w.clone(),
        x1 * y3 - x3 * y1 + (x1 + y1) * &w * &half,
        x2 * y3 - x3 * y2 + (x2 + y2) * &w * &half,
    ])
}

/// `x y x⁻¹ y⁻¹` as a word of products.
pub fn commutator_word(x: &GroupElement, y: &GroupElement) -> GroupElement {
    multiply_all([x, y, &x.inverse(), &y.inverse()])
}

/// The integrality congruences describing `log Γ₀`.
pub fn in_gamma0(x: &GroupElement) -> bool {
    let [x1, x2, x3, x4, x5] = &x.0;
    if !is_integer(x1) || !is_integer(x2) {
        return false;
    }
    let half = Q::new(1.into(), 2.into());
    let twelfth = Q::new(1.into(), 12.into());
    let u = x3 - x1 * x2 * &half;
    if !is_integer(&u) {
        return false;
    }
    let v = x4 - x1 * x1 * x2 * &twelfth - (x1 + Q::one()) * &half * &u;
    let w = x5 + x1 * x2 * x2 * &twelfth + (x2 + Q::one()) * &half * &u;
    is_integer(&v) && is_integer(&w)
}

/// `log(γ₁^k γ₂^l) = (k, l, kl/2, k²l/12, −kl²/12)`.
pub fn power_word(k: i64, l: i64) -> GroupElement {
    let (k, l) = (q(k), q(l));
    GroupElement([
        k.clone(),
        l.clone(),
        &k * &l / q(2),
        &k * &k * &l / q(12),
        -(&k * &l * &l) / q(12),
    ])
}

/// `γ₁^k γ₂^l` by repeated multiplication.
pub fn power_word_iterated(k: i64, l: i64) -> GroupElement {
    let g1 = if k >= 0 { GroupElement::gamma1() } else { GroupElement::gamma1().inverse() };
    let g2 = if l >= 0 { GroupElement::gamma2() } else { GroupElement::gamma2().inverse() };
    let mut out = GroupElement::identity();
    for _ in 0..k.unsigned_abs() {
        out = bch_multiply(&out, &g1);
    }
    for _ in 0..l.unsigned_abs() {
        out = bch_multiply(&out, &g2);
    }
    out
}

/// `exp ∘ φ ∘ log`.
pub fn apply_automorphism(phi: &GradedAutomorphism, x: &GroupElement) -> GroupElement {
    GroupElement::from_slice(&phi.apply(&x.0))
}

/// Product from the generic third-order BCH series of a step ≤ 3 algebra.
pub fn bch_step3(alg: &GradedLieAlgebra, x: &[Q], y: &[Q]) -> Result<Vec<Q>, NilgroupError> {
    if !is_step_at_most_3(alg) {
        return Err(NilgroupError::StepTooLarge);
    }
    let xy = alg.bracket_vec(x, y);
    let xxy = alg.bracket_vec(x, &xy);
    let yxy = alg.bracket_vec(y, &xy);
    Ok((0..alg.dim())
        .map(|i| &x[i] + &y[i] + &xy[i] / q(2) + (&xxy[i] - &yxy[i]) / q(12))
        .collect())
}

fn is_step_at_most_3(alg: &GradedLieAlgebra) -> bool {
    let m = alg.dim();
    (0..m).all(|a| {
        (0..m).all(|b| {
            (0..m).all(|c| {
                let inner = alg.bracket_vec(&unit(m, a), &alg.bracket_basis(b, c));
                (0..m).all(|d| alg.bracket_vec(&unit(m, d), &inner).iter().all(Zero::is_zero))
            })
        })
    })
}

fn unit(m: usize, i: usize) -> Vec<Q> {
    let mut v = vec![Q::zero(); m];
    v[i] = Q::one();
    v
}

/// Result of normalising a generating set into Γ₀.
#[derive(Debug, Clone, PartialEq)]
pub struct Gamma0Embedding {
    /// `φ_r ∘ ψ⁻¹` with `ψ(X1) = log ω₁`, `ψ(X2) = log ω₂`.
    pub phi: GradedAutomorphism,
    pub k: u64,
    pub r: u64,
    pub images: Vec<GroupElement>,
}

fn lcm_denominators<'a>(xs: impl IntoIterator<Item = &'a Q>) -> num_bigint::BigInt {
    xs.into_iter().fold(num_bigint::BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// An automorphism carrying the lattice generated by `ω₁,…,ω₅` into Γ₀.
pub fn embed_into_gamma0(generators: &[GroupElement]) -> Result<Gamma0Embedding, NilgroupError> {
    if generators.len() != 5 {
        return Err(NilgroupError::Parse(format!("expected 5 generators, found {}", generators.len())));
    }
    let alg = GradedLieAlgebra::two_three_five();
    let w = generators;
    if !w[2].0[..2].iter().all(Zero::is_zero) {
        return Err(NilgroupError::BadGeneratorShape { index: 3 });
    }
    for i in [3, 4] {
        if !w[i].0[..3].iter().all(Zero::is_zero) {
            return Err(NilgroupError::BadGeneratorShape { index: i + 1 });
        }
    }
    let psi = automorphism_from_generators(&alg, &w[0].0, &w[1].0).map_err(|e| match e {
        GradedLieError::DegenerateGenerators => NilgroupError::DegenerateGenerators,
        other => NilgroupError::Lie(other),
    })?;
    let psi_inv = psi.inverse();
    let normalized: Vec<GroupElement> = w.iter().map(|x| apply_automorphism(&psi_inv, x)).collect();
    debug_assert_eq!(normalized[0], GroupElement::gamma1());
    debug_assert_eq!(normalized[1], GroupElement::gamma2());
    let bound = lcm_denominators(normalized[2..].iter().flat_map(|x| x.0.iter())) * 2;
    let mut k = 1u64;
    while !normalized[2..].iter().all(|x| in_gamma0(&x.pow(&q(k as i64)))) {
        k += 1;
        assert!(num_bigint::BigInt::from(k) <= bound, "a multiple of twice the common denominator always works");
    }
    let r = 2 * k;
    let phi = grading_automorphism(&alg, &q(r as i64))?.compose(&psi_inv);
    let images: Vec<GroupElement> = w.iter().map(|x| apply_automorphism(&phi, x)).collect();
    assert!(images.iter().all(in_gamma0), "φ_r maps the normalised generators into Γ₀");
    Ok(Gamma0Embedding { phi, k, r, images })
}

/// A 2×2 integer matrix `[[a, b], [c, d]]`.
pub type IntMatrix2 = [[i64; 2]; 2];

fn check_unimodular(a: &IntMatrix2) -> Result<(), NilgroupError> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det.abs() != 1 {
        return Err(NilgroupError::NotUnimodular { det });
    }
    Ok(())
}

/// The automorphism of G preserving Γ₀ with `γ₁ ↦ γ₁^a γ₂^c`, `γ₂ ↦ γ₁^b γ₂^d`.
pub fn lattice_automorphism(a: &IntMatrix2) -> Result<GradedAutomorphism, NilgroupError> {
    check_unimodular(a)?;
    let alg = GradedLieAlgebra::two_three_five();
    let y1 = power_word(a[0][0], a[1][0]);
    let y2 = power_word(a[0][1], a[1][1]);
    Ok(automorphism_from_generators(&alg, &y1.0, &y2.0)?)
}

/// A unitary character of Γ₀, `χ(γ₁) = e^{2πis}`, `χ(γ₂) = e^{2πit}`.
#[derive(Debug, Clone, PartialEq)]
pub enum CharacterPoint {
    Exact(Q, Q),
    Float(f64, f64),
}

fn frac_q(x: Q) -> Q {
    &x - x.floor()
}

impl CharacterPoint {
    pub fn reduced(self) -> Self {
        match self {
            CharacterPoint::Exact(s, t) => CharacterPoint::Exact(frac_q(s), frac_q(t)),
            CharacterPoint::Float(s, t) => CharacterPoint::Float(s.rem_euclid(1.0), t.rem_euclid(1.0)),
        }
    }

    pub fn as_f64(&self) -> (f64, f64) {
        match self {
            CharacterPoint::Exact(s, t) => (crate::rational::to_f64(s), crate::rational::to_f64(t)),
            CharacterPoint::Float(s, t) => (*s, *t),
        }
    }
}

/// Right action of `A ∈ GL(2,ℤ)` on characters: `(s, t) ↦ Aᵀ(s, t) mod 1`.
pub fn character_action(a: &IntMatrix2, p: &CharacterPoint) -> Result<CharacterPoint, NilgroupError> {
    check_unimodular(a)?;
    Ok(match p {
        CharacterPoint::Exact(s, t) => {
            CharacterPoint::Exact(s * q(a[0][0]) + t * q(a[1][0]), s * q(a[0][1]) + t * q(a[1][1]))
        }
        CharacterPoint::Float(s, t) => {
            // Split products so large entries do not lose the fractional part.
            let f = |m: i64, x: f64| ((m as f64) * x).rem_euclid(1.0);
            CharacterPoint::Float(f(a[0][0], *s) + f(a[1][0], *t), f(a[0][1], *s) + f(a[1][1], *t))
        }
    }
    .reduced())
}

pub fn matmul2(a: &IntMatrix2, b: &IntMatrix2) -> IntMatrix2 {
    let mut out = [[0i64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Elementary matrices `T`, `U`, `T⁻¹`, `U⁻¹` followed by `S` and the swap;
/// the first four generate SL(2,ℤ).
pub const GL2_GENERATORS: [IntMatrix2; 6] =
    [[[1, 1], [0, 1]], [[1, 0], [1, 1]], [[1, -1], [0, 1]], [[1, 0], [-1, 1]], [[0, -1], [1, 0]], [[0, 1], [1, 0]]];

/// Coverage of a grid of boxes by orbit samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityReport {
    pub samples: Vec<(f64, f64)>,
    pub boxes_hit: usize,
    pub boxes_total: usize,
}

impl DensityReport {
    pub fn covers_all(&self) -> bool {
        self.boxes_hit == self.boxes_total
    }
}

/// Applies `words` random reduced words of length `word_len` in `T^{±1}`,
/// `U^{±1}` to `start` and records which `resolution`-boxes of the torus the
/// images meet.
pub fn density_probe<R: Rng>(rng: &mut R, start: (f64, f64), words: usize, word_len: usize, resolution: f64) -> DensityReport {
    let cells = (1.0 / resolution).round() as usize;
    let mut hit = vec![false; cells * cells];
    let mut samples = Vec::with_capacity(words);
    let p0 = CharacterPoint::Float(start.0, start.1);
    for _ in 0..words {
        let mut m: IntMatrix2 = [[1, 0], [0, 1]];
        let mut last: Option<usize> = None;
        for _ in 0..word_len {
            let g = loop {
                let g = rng.gen_range(0..4);
                if last != Some((g + 2) % 4) {
                    break g;
                }
            };
            m = matmul2(&m, &GL2_GENERATORS[g]);
            last = Some(g);
        }
        let (s, t) = character_action(&m, &p0).expect("generators are unimodular").as_f64();
        let cs = ((s / resolution) as usize).min(cells - 1);
        let ct = ((t / resolution) as usize).min(cells - 1);
        hit[cs * cells + ct] = true;
        samples.push((s, t));
    }
    DensityReport { samples, boxes_hit: hit.iter().filter(|&&h| h).count(), boxes_total: cells * cells }
}
