//! Chevalley–Eilenberg cohomology of a graded nilpotent Lie algebra.
//!
//! Forms live in Λ𝔤* with the lexicographic monomial basis of
//! [`ExteriorBasis`]. The differential is `∂θ^k = −Σ_{i<j} c^k_{ij} θ^i∧θ^j`
//! extended as a derivation of degree +1. A monomial θ^I has grading weight
//! `w(I) = Σ_{i∈I} |deg X_i|`, and ∂ preserves it.
//!
//! Cohomology classes are represented by canonical cocycles that depend only
//! on ∂ (never on the metric); harmonic representatives are their orthogonal
//! projections off the exact forms.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::exterior::{indices, wedge_sign, ExteriorBasis, Mask};
use crate::graded_lie::GradedLieAlgebra;
use crate::linalg::QMatrix;
use crate::rational::{q, Q};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CohomologyError {
    #[error("DimensionMismatch: Gram matrix has size {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("NotSymmetric: Gram matrix is not symmetric")]
    NotSymmetric,
    #[error("NotPositiveDefinite: Gram matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("DegreeBlocksNotOrthogonal: Gram matrix couples X{i} and X{j} of different degrees")]
    DegreeBlocksNotOrthogonal { i: usize, j: usize },
    #[error("DegreeOutOfRange: form degree {q} exceeds dimension {dim}")]
    DegreeOutOfRange { q: usize, dim: usize },
    #[error("BadOrientation: orientation must be +1 or -1, got {0}")]
    BadOrientation(i32),
}

/// A graded Euclidean inner product on 𝔤, stored as its Gram matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedInnerProduct {
    gram: QMatrix,
    /// Gram matrix of the dual basis θ¹,…,θᵐ.
    dual_gram: QMatrix,
}

impl GradedInnerProduct {
    pub fn new(alg: &GradedLieAlgebra, gram: QMatrix) -> Result<Self, CohomologyError> {
        let m = alg.dim();
        if gram.nrows() != m || gram.ncols() != m {
            return Err(CohomologyError::DimensionMismatch { expected: m, found: gram.nrows() });
        }
        if !gram.is_symmetric() {
            return Err(CohomologyError::NotSymmetric);
        }
        let deg = alg.degrees();
        for i in 0..m {
            for j in 0..m {
                if deg[i] != deg[j] && !gram[(i, j)].is_zero() {
                    return Err(CohomologyError::DegreeBlocksNotOrthogonal { i: i + 1, j: j + 1 });
                }
            }
        }
        if !gram.is_positive_definite() {
            return Err(CohomologyError::NotPositiveDefinite);
        }
        let dual_gram = gram.inverse().expect("positive definite");
        Ok(GradedInnerProduct { gram, dual_gram })
    }

    pub fn identity(alg: &GradedLieAlgebra) -> Self {
        let m = alg.dim();
        GradedInnerProduct { gram: QMatrix::identity(m), dual_gram: QMatrix::identity(m) }
    }

    /// Builds `L·Lᵀ` per degree block from a stream of integers, where `L` is
    /// lower triangular with off-diagonal entries `x` and diagonal `|x|+1`.
    /// Any stream yields a valid graded inner product; used for sampling.
    pub fn from_integer_stream(alg: &GradedLieAlgebra, mut next: impl FnMut() -> i64) -> Self {
        let m = alg.dim();
        let deg = alg.degrees();
        let mut l = QMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..=i {
                if deg[i] != deg[j] {
                    continue;
                }
                let x = next();
                l[(i, j)] = if i == j { q(x.abs() + 1) } else { q(x) };
            }
        }
        Self::new(alg, l.matmul(&l.transpose())).expect("L·Lᵀ is a graded inner product")
    }

    pub fn gram(&self) -> &QMatrix {
        &self.gram
    }

    pub fn dual_gram(&self) -> &QMatrix {
        &self.dual_gram
    }

    /// Gram matrix of the induced inner product on Λ^q𝔤*.
    pub fn form_gram(&self, ext: &ExteriorBasis, q: usize) -> QMatrix {
        let basis = ext.basis(q);
        let n = basis.len();
        let mut g = QMatrix::zeros(n, n);
        let idx: Vec<Vec<usize>> = basis.iter().map(|&b| indices(b)).collect();
        for a in 0..n {
            for b in a..n {
                let v = self.dual_gram.submatrix(&idx[a], &idx[b]).det();
                g[(a, b)] = v.clone();
                g[(b, a)] = v;
            }
        }
        g
    }
}

/// ⟨X3,X3⟩ = 4 det g and ⟨[X_i,X3],[X_j,X3]⟩ = 3⟨X3,X3⟩ g_ij on the (2,3,5) algebra.
pub fn extend_metric_235(g: &QMatrix) -> Result<GradedInnerProduct, CohomologyError> {
    if g.nrows() != 2 || g.ncols() != 2 {
        return Err(CohomologyError::DimensionMismatch { expected: 2, found: g.nrows() });
    }
    if !g.is_symmetric() {
        return Err(CohomologyError::NotSymmetric);
    }
    if !g.is_positive_definite() {
        return Err(CohomologyError::NotPositiveDefinite);
    }
    let x3 = q(4) * g.det();
    let mut full = QMatrix::zeros(5, 5);
    for i in 0..2 {
        for j in 0..2 {
            full[(i, j)] = g[(i, j)].clone();
            full[(3 + i, 3 + j)] = q(3) * &x3 * &g[(i, j)];
        }
    }
    full[(2, 2)] = x3;
    GradedInnerProduct::new(&GradedLieAlgebra::two_three_five(), full)
}

pub fn mask_weight(alg: &GradedLieAlgebra, mask: Mask) -> u64 {
    indices(mask).iter().map(|&i| alg.degrees()[i].unsigned_abs() as u64).sum()
}

/// Matrix of ∂: Λ^q𝔤* → Λ^{q+1}𝔤*.
pub fn ce_differential(alg: &GradedLieAlgebra, q: usize) -> QMatrix {
    ce_differential_on(alg, &ExteriorBasis::new(alg.dim()), q)
}

fn ce_differential_on(alg: &GradedLieAlgebra, ext: &ExteriorBasis, q: usize) -> QMatrix {
    let m = alg.dim();
    let mut d = QMatrix::zeros(ext.len(q + 1), ext.len(q));
    if q >= m {
        return d;
    }
    // ∂θ^k as a list of (θ^a∧θ^b mask, coefficient).
    let mut dtheta: Vec<Vec<(Mask, Q)>> = vec![Vec::new(); m];
    for (&(a, b), terms) in alg.bracket_table() {
        for (k, c) in terms {
            dtheta[*k].push(((1 << a) | (1 << b), -c.clone()));
        }
    }
    for (col, &mask) in ext.basis(q).iter().enumerate() {
        for (s, &k) in indices(mask).iter().enumerate() {
            let rest = mask & !(1 << k);
            for (ab, c) in &dtheta[k] {
                let Some(sign) = wedge_sign(rest, *ab) else { continue };
                let sign = if s % 2 == 0 { sign } else { -sign };
                let row = ext.index(rest | ab);
                if sign > 0 {
                    d[(row, col)] += c;
                } else {
                    d[(row, col)] -= c;
                }
            }
        }
    }
    d
}

/// The three mutually orthogonal pieces of Λ^q𝔤*, each as a column basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HodgeDecomposition {
    pub exact: QMatrix,
    pub harmonic: QMatrix,
    pub coexact: QMatrix,
}

/// The unnormalised star operator ⋆₀ for the volume form θ¹∧…∧θᵐ
/// (times the orientation). The isometric star is `sqrt(scale_sq)·⋆₀`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarOperator {
    pub q: usize,
    pub matrix: QMatrix,
    pub scale_sq: Q,
    pub orientation: i32,
}

/// Cohomology of Λ𝔤* with weights, harmonic forms and the operators built from them.
#[derive(Debug, Clone)]
pub struct WeightedCohomology {
    pub dim: usize,
    pub betti: Vec<usize>,
    /// Sorted grading weights of a basis of H^q.
    pub weights: Vec<Vec<u64>>,
    /// Canonical cocycles, metric independent, one weight per column.
    pub representatives: Vec<QMatrix>,
    /// Harmonic projections of `representatives`.
    pub harmonic: Vec<QMatrix>,
    pub pure: bool,
    pub p: Option<Vec<u64>>,
    pub k: Option<Vec<u64>>,
    pub homogeneous_dimension: u64,
    pub exterior: ExteriorBasis,
    pub differentials: Vec<QMatrix>,
    pub form_grams: Vec<QMatrix>,
    pub inner: GradedInnerProduct,
    alg: GradedLieAlgebra,
}

pub fn betti_and_weights(alg: &GradedLieAlgebra, inner: &GradedInnerProduct) -> WeightedCohomology {
    WeightedCohomology::compute(alg, inner)
}

pub fn hodge_decomposition(alg: &GradedLieAlgebra, inner: &GradedInnerProduct, q: usize) -> HodgeDecomposition {
    WeightedCohomology::compute(alg, inner).hodge_decomposition(q)
}

pub fn star(
    alg: &GradedLieAlgebra,
    inner: &GradedInnerProduct,
    q: usize,
    orientation: i32,
) -> Result<StarOperator, CohomologyError> {
    WeightedCohomology::compute(alg, inner).star(q, orientation)
}

pub fn duality_pairing(alg: &GradedLieAlgebra, inner: &GradedInnerProduct, q: usize) -> QMatrix {
    WeightedCohomology::compute(alg, inner).duality_pairing(q)
}

impl WeightedCohomology {
    pub fn compute(alg: &GradedLieAlgebra, inner: &GradedInnerProduct) -> Self {
        let m = alg.dim();
        let ext = ExteriorBasis::new(m);
        let differentials: Vec<QMatrix> = (0..=m).map(|q| ce_differential_on(alg, &ext, q)).collect();
        let form_grams: Vec<QMatrix> = (0..=m).map(|q| inner.form_gram(&ext, q)).collect();
        let mut betti = Vec::with_capacity(m + 1);
        let mut weights = Vec::with_capacity(m + 1);
        let mut representatives = Vec::with_capacity(m + 1);
        let mut harmonic = Vec::with_capacity(m + 1);
        for q in 0..=m {
            let basis = ext.basis(q);
            let n = basis.len();
            let mask_weights: Vec<u64> = basis.iter().map(|&b| mask_weight(alg, b)).collect();
            let prev_weights: Vec<u64> = if q > 0 {
                ext.basis(q - 1).iter().map(|&b| mask_weight(alg, b)).collect()
            } else {
                Vec::new()
            };
            let mut distinct = mask_weights.clone();
            distinct.sort_unstable();
            distinct.dedup();
            let mut reps: Vec<Vec<Q>> = Vec::new();
            let mut rep_weights = Vec::new();
            for &w in &distinct {
                let cols: Vec<usize> = (0..n).filter(|&i| mask_weights[i] == w).collect();
                let kernel = differentials[q].select_columns(&cols).kernel();
                let mut kernel_full = QMatrix::zeros(n, kernel.ncols());
                for (r, &c) in cols.iter().enumerate() {
                    for j in 0..kernel.ncols() {
                        kernel_full[(c, j)] = kernel[(r, j)].clone();
                    }
                }
                let image = if q > 0 {
                    let pcols: Vec<usize> = (0..prev_weights.len()).filter(|&i| prev_weights[i] == w).collect();
                    differentials[q - 1].select_columns(&pcols).column_space()
                } else {
                    QMatrix::zeros(n, 0)
                };
                let (_, pivots) = image.hstack(&kernel_full).rref();
                for p in pivots.into_iter().filter(|&p| p >= image.ncols()) {
                    reps.push(kernel_full.column(p - image.ncols()));
                    rep_weights.push(w);
                }
            }
            let reps = QMatrix::from_columns(n, &reps);
            let exact = if q > 0 { differentials[q - 1].column_space() } else { QMatrix::zeros(n, 0) };
            harmonic.push(project_off(&reps, &exact, &form_grams[q]));
            betti.push(reps.ncols());
            representatives.push(reps);
            weights.push(rep_weights);
        }
        let pure = weights.iter().all(|w| w.windows(2).all(|p| p[0] == p[1]));
        let p = pure.then(|| weights.iter().map(|w| w.first().copied().unwrap_or(0)).collect::<Vec<u64>>());
        let k = p.as_ref().map(|p| p.windows(2).map(|w| w[1] - w[0]).collect());
        WeightedCohomology {
            dim: m,
            betti,
            weights,
            representatives,
            harmonic,
            pure,
            p,
            k,
            homogeneous_dimension: alg.homogeneous_dimension(),
            exterior: ext,
            differentials,
            form_grams,
            inner: inner.clone(),
            alg: alg.clone(),
        }
    }

    pub fn algebra(&self) -> &GradedLieAlgebra {
        &self.alg
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.betti
            .iter()
            .enumerate()
            .map(|(q, &b)| if q % 2 == 0 { b as i64 } else { -(b as i64) })
            .sum()
    }

    /// ∂*: Λ^{q+1} → Λ^q, the adjoint of ∂_q.
    pub fn adjoint_differential(&self, q: usize) -> QMatrix {
        let gq_inv = self.form_grams[q].inverse().expect("positive definite");
        let next = if q < self.dim { self.form_grams[q + 1].clone() } else { QMatrix::zeros(0, 0) };
        gq_inv.matmul(&self.differentials[q].transpose()).matmul(&next)
    }

    /// Gram matrix of the harmonic basis of H^q.
    pub fn harmonic_gram(&self, q: usize) -> QMatrix {
        let h = &self.harmonic[q];
        h.transpose().matmul(&self.form_grams[q]).matmul(h)
    }

    /// π: Λ^q → H^q, orthogonal projection onto harmonic forms in harmonic-basis coordinates.
    pub fn projection(&self, q: usize) -> QMatrix {
        let h = &self.harmonic[q];
        let m = self.harmonic_gram(q).inverse().expect("harmonic basis is independent");
        m.matmul(&h.transpose()).matmul(&self.form_grams[q])
    }

    pub fn hodge_decomposition(&self, q: usize) -> HodgeDecomposition {
        let n = self.exterior.len(q);
        let exact = if q > 0 { self.differentials[q - 1].column_space() } else { QMatrix::zeros(n, 0) };
        let coexact = if q < self.dim { self.adjoint_differential(q).column_space() } else { QMatrix::zeros(n, 0) };
        HodgeDecomposition { exact, harmonic: self.harmonic[q].clone(), coexact }
    }

    pub fn star(&self, q: usize, orientation: i32) -> Result<StarOperator, CohomologyError> {
        if q > self.dim {
            return Err(CohomologyError::DegreeOutOfRange { q, dim: self.dim });
        }
        if orientation != 1 && orientation != -1 {
            return Err(CohomologyError::BadOrientation(orientation));
        }
        let ext = &self.exterior;
        let top = ext.top();
        let g = &self.form_grams[q];
        let mut s = QMatrix::zeros(ext.len(self.dim - q), ext.len(q));
        for (i, &mask) in ext.basis(q).iter().enumerate() {
            let comp = top & !mask;
            let eps = wedge_sign(mask, comp).expect("complementary") * orientation;
            let row = ext.index(comp);
            for j in 0..ext.len(q) {
                if !g[(i, j)].is_zero() {
                    s[(row, j)] = if eps > 0 { g[(i, j)].clone() } else { -g[(i, j)].clone() };
                }
            }
        }
        let scale_sq = self.inner.gram().det();
        assert!(scale_sq.is_positive(), "DegenerateMetric");
        Ok(StarOperator { q, matrix: s, scale_sq, orientation })
    }

    /// Star restricted to harmonic forms, in harmonic-basis coordinates: H^q → H^{m−q}.
    /// Unnormalised in the same way as [`StarOperator`].
    pub fn harmonic_star(&self, q: usize) -> QMatrix {
        let s = self.star(q, 1).expect("valid degree");
        self.projection(self.dim - q).matmul(&s.matrix).matmul(&self.harmonic[q])
    }

    /// Matrix of (h_i, h'_j) ↦ coefficient of θ¹∧…∧θᵐ in h_i∧h'_j on harmonic bases of H^q and H^{m−q}.
    pub fn duality_pairing(&self, q: usize) -> QMatrix {
        let m = self.dim;
        let a = &self.harmonic[q];
        let b = &self.harmonic[m - q];
        let mut out = QMatrix::zeros(a.ncols(), b.ncols());
        for i in 0..a.ncols() {
            let hi = a.column(i);
            for j in 0..b.ncols() {
                let w = self.exterior.wedge(q, &hi, m - q, &b.column(j));
                out[(i, j)] = w[0].clone();
            }
        }
        out
    }

    /// Σ_q (−1)^q Σ_{w ∈ weights(H^q)} t^w, as integer coefficients up to the homogeneous dimension.
    pub fn weight_supertrace(&self) -> Vec<BigInt> {
        let mut c = vec![BigInt::zero(); self.homogeneous_dimension as usize + 1];
        for (q, ws) in self.weights.iter().enumerate() {
            for &w in ws {
                if q % 2 == 0 {
                    c[w as usize] += 1;
                } else {
                    c[w as usize] -= 1;
                }
            }
        }
        c
    }
}

/// Orthogonal projection of the columns of `v` onto the complement of span(`b`).
fn project_off(v: &QMatrix, b: &QMatrix, g: &QMatrix) -> QMatrix {
    if b.ncols() == 0 || v.ncols() == 0 {
        return v.clone();
    }
    let btg = b.transpose().matmul(g);
    let coeffs = btg.matmul(b).inverse().expect("independent columns").matmul(&btg.matmul(v));
    v.sub(&b.matmul(&coeffs))
}

impl StarOperator {
    /// `⋆₀⁻¹`, so that `(sqrt(s)·⋆₀)⁻¹ = ⋆₀⁻¹/sqrt(s)`.
    pub fn inverse_matrix(&self) -> QMatrix {
        self.matrix.inverse().expect("star is invertible")
    }

    pub fn is_one(&self) -> bool {
        self.scale_sq.is_one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;
    use proptest::prelude::*;

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn two_three_five_cohomology() {
        let g = GradedLieAlgebra::two_three_five();
        let c = betti_and_weights(&g, &GradedInnerProduct::identity(&g));
        assert_eq!(c.betti, vec![1, 2, 3, 3, 2, 1]);
        assert!(c.pure);
        assert_eq!(c.p, Some(vec![0, 1, 4, 6, 9, 10]));
        assert_eq!(c.k, Some(vec![1, 3, 2, 3, 1]));
        assert_eq!(c.homogeneous_dimension, 10);
    }

    #[test]
    fn first_differential_of_two_three_five() {
        let g = GradedLieAlgebra::two_three_five();
        let ext = ExteriorBasis::new(5);
        let d = ce_differential(&g, 1);
        let two = |a: usize, b: usize| ext.index((1 << a) | (1 << b));
        assert!(d.column(0).iter().all(Zero::is_zero));
        assert!(d.column(1).iter().all(Zero::is_zero));
        assert_eq!(d[(two(0, 1), 2)], q(-1));
        assert_eq!(d[(two(0, 2), 3)], q(-1));
        assert_eq!(d[(two(1, 2), 4)], q(-1));
        assert_eq!(d.rank(), 3);
    }

    #[test]
    fn heisenberg_and_abelian() {
        let h = GradedLieAlgebra::heisenberg(1);
        assert_eq!(ce_differential(&h, 1).rank(), 1);
        let c = betti_and_weights(&h, &GradedInnerProduct::identity(&h));
        assert_eq!(c.betti, vec![1, 2, 2, 1]);
        assert_eq!(c.p, Some(vec![0, 1, 3, 4]));
        assert_eq!(c.k, Some(vec![1, 2, 1]));
        let a = GradedLieAlgebra::abelian(4, -1).unwrap();
        let c = betti_and_weights(&a, &GradedInnerProduct::identity(&a));
        assert_eq!(c.betti, (0..=4).map(|q| binomial(4, q)).collect::<Vec<_>>());
        assert_eq!(c.p, Some(vec![0, 1, 2, 3, 4]));
        assert_eq!(c.k, Some(vec![1; 4]));
        for q in 0..4 {
            assert!(ce_differential(&a, q).is_zero());
        }
    }

    #[test]
    fn hodge_dimensions() {
        let g = GradedLieAlgebra::two_three_five();
        let inner = GradedInnerProduct::identity(&g);
        let c = betti_and_weights(&g, &inner);
        let dims = |q| {
            let h = c.hodge_decomposition(q);
            (h.exact.ncols(), h.harmonic.ncols(), h.coexact.ncols())
        };
        assert_eq!(dims(1), (0, 2, 3));
        assert_eq!(dims(2), (3, 3, 4));
        for q in 0..=5 {
            let h = c.hodge_decomposition(q);
            let g = &c.form_grams[q];
            let parts = [&h.exact, &h.harmonic, &h.coexact];
            for a in 0..3 {
                for b in a + 1..3 {
                    assert!(parts[a].transpose().matmul(g).matmul(parts[b]).is_zero());
                }
            }
            assert_eq!(h.exact.ncols() + h.harmonic.ncols() + h.coexact.ncols(), binomial(5, q));
        }
        let a = GradedLieAlgebra::abelian(3, -1).unwrap();
        let h = hodge_decomposition(&a, &GradedInnerProduct::identity(&a), 2);
        assert_eq!((h.exact.ncols(), h.harmonic.ncols(), h.coexact.ncols()), (0, 3, 0));
    }

    #[test]
    fn star_examples() {
        let g = GradedLieAlgebra::two_three_five();
        let c = betti_and_weights(&g, &GradedInnerProduct::identity(&g));
        let s0 = c.star(0, 1).unwrap();
        assert_eq!(s0.matrix, QMatrix::identity(1));
        let s1 = c.star(1, 1).unwrap();
        // ⋆θ¹ = θ²∧θ³∧θ⁴∧θ⁵
        let col = s1.matrix.column(0);
        let target = c.exterior.index(0b11110);
        assert_eq!(col[target], q(1));
        assert_eq!(col.iter().filter(|x| !x.is_zero()).count(), 1);
        for q in 0..=5 {
            let a = c.star(q, 1).unwrap();
            let b = c.star(5 - q, 1).unwrap();
            let sign = if (q * (5 - q)) % 2 == 0 { 1 } else { -1 };
            assert_eq!(b.matrix.matmul(&a.matrix), QMatrix::identity(binomial(5, q)).scale(&crate::rational::q(sign)));
        }
        assert!(c.star(1, 2).is_err());
    }

    #[test]
    fn pairing_is_non_degenerate() {
        let g = GradedLieAlgebra::two_three_five();
        let inner = GradedInnerProduct::identity(&g);
        assert!(!duality_pairing(&g, &inner, 0).det().is_zero());
        let p = duality_pairing(&g, &inner, 2);
        assert_eq!((p.nrows(), p.ncols()), (3, 3));
        assert!(!p.det().is_zero());
        let h = GradedLieAlgebra::heisenberg(1);
        assert!(!duality_pairing(&h, &GradedInnerProduct::identity(&h), 1).det().is_zero());
    }

    #[test]
    fn metric_extension() {
        let e = extend_metric_235(&QMatrix::identity(2)).unwrap();
        assert_eq!(e.gram()[(2, 2)], q(4));
        assert_eq!(e.gram()[(3, 3)], q(12));
        assert_eq!(e.gram()[(4, 4)], q(12));
        assert_eq!(e.gram()[(3, 4)], q(0));
        let (a, b) = (frac(2, 3), q(5));
        let e = extend_metric_235(&QMatrix::diagonal(&[a.clone(), b.clone()])).unwrap();
        assert_eq!(e.gram()[(2, 2)], q(4) * &a * &b);
        assert_eq!(
            extend_metric_235(&QMatrix::from_i64(2, 2, &[1, 2, 2, 1])),
            Err(CohomologyError::NotPositiveDefinite)
        );
    }

    #[test]
    fn metric_extension_is_homogeneous() {
        let g = QMatrix::from_i64(2, 2, &[2, 1, 1, 3]);
        let s = frac(5, 2);
        let e1 = extend_metric_235(&g).unwrap();
        let e2 = extend_metric_235(&g.scale(&s)).unwrap();
        let s2 = &s * &s;
        let s3 = &s2 * &s;
        assert_eq!(e2.gram()[(2, 2)], &e1.gram()[(2, 2)] * &s2);
        for i in 3..5 {
            for j in 3..5 {
                assert_eq!(e2.gram()[(i, j)], &e1.gram()[(i, j)] * &s3);
            }
        }
    }

    #[test]
    fn rejects_bad_gram() {
        let g = GradedLieAlgebra::heisenberg(1);
        let mixed = QMatrix::from_i64(3, 3, &[2, 0, 1, 0, 2, 0, 1, 0, 2]);
        assert_eq!(
            GradedInnerProduct::new(&g, mixed),
            Err(CohomologyError::DegreeBlocksNotOrthogonal { i: 1, j: 3 })
        );
    }

    fn presets() -> Vec<GradedLieAlgebra> {
        vec![
            GradedLieAlgebra::two_three_five(),
            GradedLieAlgebra::heisenberg(1),
            GradedLieAlgebra::heisenberg(2),
            GradedLieAlgebra::abelian(3, -2).unwrap(),
        ]
    }

    #[test]
    fn differential_squares_to_zero_and_keeps_weight() {
        for g in presets() {
            let ext = ExteriorBasis::new(g.dim());
            for q in 0..g.dim() {
                let d = ce_differential(&g, q);
                assert!(ce_differential(&g, q + 1).matmul(&d).is_zero());
                for (c, &src) in ext.basis(q).iter().enumerate() {
                    for (r, &dst) in ext.basis(q + 1).iter().enumerate() {
                        if !d[(r, c)].is_zero() {
                            assert_eq!(mask_weight(&g, src), mask_weight(&g, dst));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn adjoint_via_star() {
        for g in presets() {
            let inner = GradedInnerProduct::from_integer_stream(&g, {
                let mut s = 3i64;
                move || {
                    s = (s * 7 + 1) % 5 - 2;
                    s
                }
            });
            let c = betti_and_weights(&g, &inner);
            let m = g.dim();
            for q in 1..=m {
                // ∂*_{q−1} = (−1)^q ⋆⁻¹ ∂ ⋆ on Λ^q.
                let s = c.star(q, 1).unwrap();
                let back = c.star(q - 1, 1).unwrap();
                let rhs = back.inverse_matrix().matmul(&c.differentials[m - q]).matmul(&s.matrix);
                let rhs = if q % 2 == 0 { rhs } else { rhs.neg() };
                assert_eq!(c.adjoint_differential(q - 1), rhs, "q = {q}");
                // Isometry: sqrt(s)²·⋆₀ᵀĜ⋆₀ = Ĝ.
                let lhs = s.matrix.transpose().matmul(&c.form_grams[m - q]).matmul(&s.matrix).scale(&s.scale_sq);
                assert_eq!(lhs, c.form_grams[q]);
            }
        }
    }

    #[test]
    fn supertrace_matches_euler() {
        for g in presets() {
            let c = betti_and_weights(&g, &GradedInnerProduct::identity(&g));
            assert_eq!(c.euler_characteristic(), 0);
            assert_eq!(c.betti[0], 1);
            assert_eq!(c.betti[g.dim()], 1);
            let total: BigInt = c.weight_supertrace().iter().sum();
            assert_eq!(total, BigInt::zero());
            if let Some(k) = &c.k {
                let m = g.dim();
                for q in 0..m {
                    assert_eq!(k[q], k[m - q - 1]);
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]
        #[test]
        fn purity_is_metric_independent(seed in proptest::collection::vec(-3i64..=3, 12)) {
            let g = GradedLieAlgebra::two_three_five();
            let mut it = seed.into_iter().cycle();
            let inner = GradedInnerProduct::from_integer_stream(&g, || it.next().unwrap());
            let c = betti_and_weights(&g, &inner);
            prop_assert!(c.pure);
            prop_assert_eq!(c.p.clone(), Some(vec![0, 1, 4, 6, 9, 10]));
            for q in 0..=5 {
                let h = &c.harmonic[q];
                prop_assert!(c.differentials[q].matmul(h).is_zero());
                if q > 0 {
                    prop_assert!(c.adjoint_differential(q - 1).matmul(h).is_zero());
                }
            }
        }
    }
}
